//! Sweeps that check `E = T` and `Var = (m-1) S` over a parameter grid.

use num_bigint::BigInt;
use serde::Serialize;

use crate::closed_form::{self, MomentReport};
use crate::error::Result;
use crate::params::Params;
use crate::rational::int;
use crate::transfer::TransferEngine;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyCell {
    pub m: u32,
    pub n: u32,
    pub expectation: BigInt,
    pub tree_edges: BigInt,
    pub variance: BigInt,
    pub path_sum: BigInt,
    pub expectation_eq_edges: bool,
    pub variance_eq_scaled_path_sum: bool,
    /// Matrix-form E, E[xi^2] and Var equal the closed forms; `None` where
    /// the matrix route was not run (`m = 1` or `n` above the matrix limit).
    pub matrix_route: Option<bool>,
}

impl VerifyCell {
    pub fn passed(&self) -> bool {
        self.expectation_eq_edges && self.variance_eq_scaled_path_sum && self.matrix_route != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentitySweep {
    pub m_max: u32,
    pub n_max: u32,
    pub matrix_n_max: u32,
    pub cells: Vec<VerifyCell>,
}

impl IdentitySweep {
    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(VerifyCell::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCell> {
        self.cells.iter().filter(|c| !c.passed())
    }
}

/// True iff both moment routes agree exactly on E, E[xi^2] and Var.
pub fn routes_agree(params: Params) -> Result<bool> {
    let engine = TransferEngine::new(params)?;
    Ok(engine.expectation() == int(closed_form::expectation_closed(params))
        && engine.second_moment() == int(closed_form::second_moment_closed(params))
        && engine.variance() == int(closed_form::variance_closed(params)))
}

pub fn verify_cell(params: Params, matrix_n_max: u32) -> Result<VerifyCell> {
    let report = MomentReport::closed(params);
    let matrix_route = if params.m() >= 2 && params.n() <= matrix_n_max {
        Some(routes_agree(params)?)
    } else {
        None
    };
    Ok(VerifyCell {
        m: params.m(),
        n: params.n(),
        expectation_eq_edges: report.expectation_matches_edges(),
        variance_eq_scaled_path_sum: report.variance_matches_path_sum(),
        expectation: report.expectation,
        tree_edges: report.tree_edges,
        variance: report.variance,
        path_sum: report.path_sum,
        matrix_route,
    })
}

/// Every cell `1 <= m <= m_max`, `1 <= n <= n_max`, in row-major order.
pub fn identity_sweep(m_max: u32, n_max: u32, matrix_n_max: u32) -> Result<IdentitySweep> {
    let mut cells = Vec::with_capacity((m_max * n_max) as usize);
    for m in 1..=m_max {
        for n in 1..=n_max {
            cells.push(verify_cell(Params::new(m, n)?, matrix_n_max)?);
        }
    }
    Ok(IdentitySweep {
        m_max,
        n_max,
        matrix_n_max,
        cells,
    })
}
