//! Closed-form evaluators over arbitrary-precision integers.
//!
//! The `m >= 2` formulas carry `(m-1)^2` or `(m-1)^3` in a denominator; every
//! division here is exact and checked. For `m = 1` the process is
//! deterministic (`E = n`, `Var = 0`) and the tree degenerates to a path of
//! `n` edges, whose path sum is `sum_{j=1}^{n} j^2`. The path-graph value of
//! `S` is an extension: it follows from the definition of `S` rather than
//! from the `m >= 2` formula.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::params::Params;

fn big(v: impl Into<BigInt>) -> BigInt {
    v.into()
}

fn pow(base: u32, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

fn exact_div(num: BigInt, den: BigInt, what: &str) -> BigInt {
    let (q, r) = num.div_rem(&den);
    assert!(r.is_zero(), "{what}: {num} is not divisible by {den}");
    q
}

/// `T = m (m^n - 1) / (m - 1)`, the edge count of the complete m-ary tree.
pub fn tree_edge_count(params: Params) -> BigInt {
    let (m, n) = (params.m(), params.n());
    if m == 1 {
        return big(n);
    }
    exact_div(big(m) * (pow(m, n) - 1), big(m - 1), "tree_edge_count")
}

/// `E[xi] = sum_{k=1}^{n} m^k`.
pub fn expectation_closed(params: Params) -> BigInt {
    let (m, n) = (params.m(), params.n());
    if m == 1 {
        return big(n);
    }
    (1..=n).map(|k| pow(m, k)).sum()
}

pub fn second_moment_closed(params: Params) -> BigInt {
    let (m, n) = (params.m(), params.n());
    if m == 1 {
        return big(n) * big(n);
    }
    let bracket = 2 * pow(m, 2 * n + 1) - big(2 * n + 3) * pow(m, n + 1) + big(2 * n + 1) * pow(m, n)
        + big(m)
        - 1;
    exact_div(big(m) * bracket, big(m - 1).pow(2), "second_moment_closed")
}

// m^{2n+1} - (2n+1) m^{n+1} + (2n+1) m^n - 1, shared by Var and S.
fn variance_bracket(m: u32, n: u32) -> BigInt {
    pow(m, 2 * n + 1) - big(2 * n + 1) * pow(m, n + 1) + big(2 * n + 1) * pow(m, n) - 1
}

pub fn variance_closed(params: Params) -> BigInt {
    let (m, n) = (params.m(), params.n());
    if m == 1 {
        return BigInt::zero();
    }
    exact_div(big(m) * variance_bracket(m, n), big(m - 1).pow(2), "variance_closed")
}

/// `S`, the sum of common root-path lengths over all ordered node pairs.
pub fn path_sum_closed(params: Params) -> BigInt {
    let (m, n) = (params.m(), params.n());
    if m == 1 {
        return exact_div(big(n) * big(n + 1) * big(2 * n + 1), big(6), "path_sum_closed");
    }
    exact_div(big(m) * variance_bracket(m, n), big(m - 1).pow(3), "path_sum_closed")
}

/// OEIS A286778: `4 * 2^(2n) - (4n + 2) * 2^n - 2`.
pub fn a286778(n: u32) -> BigInt {
    assert!(n >= 1, "a286778 is indexed from n = 1");
    4 * pow(2, 2 * n) - big(4 * u64::from(n) + 2) * pow(2, n) - 2
}

/// `2^(n+1) - 2`, the edge count (and expected waiting time) for `m = 2`.
pub fn t_sequence_m2(n: u32) -> BigInt {
    assert!(n >= 1, "t_sequence_m2 is indexed from n = 1");
    pow(2, n + 1) - 2
}

/// All closed-form quantities for one parameter pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MomentReport {
    pub params: Params,
    pub expectation: BigInt,
    pub second_moment: BigInt,
    pub variance: BigInt,
    pub tree_edges: BigInt,
    pub path_sum: BigInt,
}

impl MomentReport {
    pub fn closed(params: Params) -> Self {
        MomentReport {
            params,
            expectation: expectation_closed(params),
            second_moment: second_moment_closed(params),
            variance: variance_closed(params),
            tree_edges: tree_edge_count(params),
            path_sum: path_sum_closed(params),
        }
    }

    pub fn expectation_matches_edges(&self) -> bool {
        self.expectation == self.tree_edges
    }

    pub fn variance_matches_path_sum(&self) -> bool {
        self.variance == big(self.params.m() - 1) * &self.path_sum
    }

    pub fn is_consistent(&self) -> bool {
        let fields = [&self.expectation, &self.second_moment, &self.variance, &self.tree_edges, &self.path_sum];
        self.variance == &self.second_moment - &self.expectation * &self.expectation
            && fields.iter().all(|v| !v.is_negative())
            && self.expectation_matches_edges()
            && self.variance_matches_path_sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32, n: u32) -> Params {
        Params::new(m, n).unwrap()
    }

    #[test]
    fn edge_counts() {
        assert_eq!(tree_edge_count(p(2, 2)), big(6));
        assert_eq!(tree_edge_count(p(3, 2)), big(12));
        assert_eq!(tree_edge_count(p(1, 5)), big(5));
    }

    #[test]
    fn expectations() {
        assert_eq!(expectation_closed(p(2, 5)), big(62));
        assert_eq!(expectation_closed(p(3, 4)), big(120));
        assert_eq!(expectation_closed(p(1, 7)), big(7));
    }

    #[test]
    fn second_moments() {
        assert_eq!(second_moment_closed(p(2, 2)), big(58));
        assert_eq!(second_moment_closed(p(4, 2)), big(748));
        assert_eq!(second_moment_closed(p(1, 3)), big(9));
    }

    #[test]
    fn variances() {
        assert_eq!(variance_closed(p(2, 4)), big(734));
        assert_eq!(variance_closed(p(3, 3)), big(1356));
        assert_eq!(variance_closed(p(1, 9)), big(0));
    }

    #[test]
    fn path_sums() {
        assert_eq!(path_sum_closed(p(3, 2)), big(57));
        assert_eq!(path_sum_closed(p(4, 3)), big(2228));
        assert_eq!(path_sum_closed(p(2, 2)), big(22));
        assert_eq!(path_sum_closed(p(1, 3)), big(14));
    }

    #[test]
    fn sequences() {
        assert_eq!(a286778(2), big(22));
        assert_eq!(a286778(5), big(3390));
        assert_eq!(a286778(1), big(2));
        assert_eq!(t_sequence_m2(3), big(14));
        assert_eq!(t_sequence_m2(5), big(62));
        assert_eq!(t_sequence_m2(1), big(2));
    }

    #[test]
    fn identities_hold_on_sweep() {
        for m in 1..=10 {
            for n in 1..=20 {
                let r = MomentReport::closed(p(m, n));
                assert!(r.is_consistent(), "{r:?}");
            }
        }
    }

    #[test]
    fn a286778_triple_agreement() {
        for n in 1..=20 {
            assert_eq!(a286778(n), variance_closed(p(2, n)));
            assert_eq!(a286778(n), path_sum_closed(p(2, n)));
            assert_eq!(t_sequence_m2(n), tree_edge_count(p(2, n)));
        }
    }

    #[test]
    fn large_n_stays_exact() {
        let v = variance_closed(p(3, 1000));
        assert_eq!(v, big(2) * path_sum_closed(p(3, 1000)));
        assert!(v.bits() > 3000);
    }
}
