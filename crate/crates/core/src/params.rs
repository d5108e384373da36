use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alphabet size `m` and target run length `n`.
///
/// Construction only enforces `m >= 1, n >= 1`. The transfer-matrix and
/// spectral routines additionally require `m >= 2`; the single-letter
/// alphabet is a deterministic process handled by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params {
    m: u32,
    n: u32,
}

impl Params {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::domain("m", m, "alphabet size must be at least 1"));
        }
        if n < 1 {
            return Err(Error::domain("n", n, "run length must be at least 1"));
        }
        Ok(Params { m, n })
    }

    #[inline]
    pub fn m(self) -> u32 {
        self.m
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    pub(crate) fn require_alphabet(self, min: u32) -> Result<()> {
        if self.m < min {
            return Err(Error::domain(
                "m",
                self.m,
                format!("this computation requires m >= {min}"),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero() {
        assert!(matches!(Params::new(0, 3), Err(Error::Domain { name: "m", .. })));
        assert!(matches!(Params::new(2, 0), Err(Error::Domain { name: "n", .. })));
    }

    #[test]
    fn alphabet_requirement_names_m() {
        let p = Params::new(1, 4).unwrap();
        let err = p.require_alphabet(2).unwrap_err();
        assert!(err.to_string().contains("m = 1"));
        assert!(Params::new(2, 4).unwrap().require_alphabet(2).is_ok());
    }
}
