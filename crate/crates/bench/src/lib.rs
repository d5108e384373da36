//! Shared inputs for the criterion benches.

use runlength_core::Params;

/// The parameter pairs tabulated for `E = T` and `Var = (m-1) S`.
pub const REFERENCE_CELLS: [(u32, u32); 10] = [
    (2, 2),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 2),
    (3, 3),
    (3, 4),
    (4, 2),
    (4, 3),
    (4, 4),
];

pub fn params(m: u32, n: u32) -> Params {
    Params::new(m, n).expect("bench parameters are valid")
}
