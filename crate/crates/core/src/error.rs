use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: String,
        reason: String,
    },

    #[error("{method} needs {nodes} nodes but the cap is {cap}")]
    SizeCap {
        method: &'static str,
        nodes: String,
        cap: u64,
    },

    #[error("node {index} is out of range for a tree with {nodes} nodes")]
    NodeOutOfRange { index: u64, nodes: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("no convergence after {iterations} iterations (worst residual {worst_residual:e})")]
    NoConvergence {
        iterations: usize,
        worst_residual: f64,
    },

    #[error("root bound failed for m={m}, n={n}: max modulus {max_modulus} leaves margin {margin:e}")]
    RootBound {
        m: u32,
        n: u32,
        max_modulus: f64,
        margin: f64,
    },

    #[error("generator exceeded the step cap of {0} draws")]
    StepCap(u64),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: impl ToString, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}
