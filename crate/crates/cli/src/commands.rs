use clap::ValueEnum;
use runlength_core::closed_form::{
    a286778, expectation_closed, path_sum_closed, t_sequence_m2, tree_edge_count, variance_closed,
};
use runlength_core::rational::parse_rational;
use runlength_core::spectral::root_report;
use runlength_core::transfer::{distribution, TransferEngine};
use runlength_core::tree::{
    node_count, path_sum_closed_report, path_sum_depth_count, path_sum_edge_contrib, path_sum_pair_enum,
};
use runlength_core::verify::identity_sweep;
use runlength_core::{simulator, BigInt, Error, MomentReport, Params, RootOptions, TreeReport};
use serde_json::Value;

use crate::output::{exact_cell, float_cell, Exactness, OutputEnvelope};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    ResourceCap(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ResourceCap(_) => 4,
            CliError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(s) | CliError::ResourceCap(s) | CliError::Failure(s) => s,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::Domain { .. } | Error::NodeOutOfRange { .. } => CliError::Usage(err.to_string()),
            Error::SizeCap { .. } | Error::StepCap(_) => CliError::ResourceCap(err.to_string()),
            _ => CliError::Failure(err.to_string()),
        }
    }
}

/// A rendered result plus whether its self-checks held. A failed check still
/// prints the envelope, then exits with code 3.
pub struct Outcome {
    pub envelope: OutputEnvelope,
    pub verified: bool,
}

impl Outcome {
    fn ok(envelope: OutputEnvelope) -> Self {
        Outcome { envelope, verified: true }
    }
}

type CmdResult = Result<Outcome, CliError>;

fn params_envelope(command: &str, params: Params) -> OutputEnvelope {
    let mut env = OutputEnvelope::new(command);
    env.param("m", params.m()).param("n", params.n());
    env
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentMethod {
    Matrix,
    Closed,
    Both,
}

pub fn moments(params: Params, method: MomentMethod) -> CmdResult {
    let mut env = params_envelope("moments", params);
    env.param("method", format!("{method:?}").to_lowercase());
    let closed = MomentReport::closed(params);
    let use_matrix = method != MomentMethod::Closed && params.m() >= 2;
    if method != MomentMethod::Closed && !use_matrix {
        env.value(
            "note",
            "m = 1 has no transfer matrix (the string is forced); closed-form values reported",
        );
    }

    let mut verified = true;
    if use_matrix {
        let engine = TransferEngine::new(params)?;
        let (e, e2, var) = (engine.expectation(), engine.second_moment(), engine.variance());
        env.exact("expectation", &e).exact("second_moment", &e2).exact("variance", &var);
        if method == MomentMethod::Both {
            let agree = e == closed.expectation.clone().into()
                && e2 == closed.second_moment.clone().into()
                && var == closed.variance.clone().into();
            env.value("routes_agree", agree);
            verified = agree;
        }
        env.value("route", if method == MomentMethod::Both { "matrix+closed" } else { "matrix" });
    } else {
        env.exact("expectation", &closed.expectation)
            .exact("second_moment", &closed.second_moment)
            .exact("variance", &closed.variance)
            .value("route", "closed");
    }
    Ok(Outcome { envelope: env, verified })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeMethodArg {
    Pair,
    Edge,
    Depth,
    Closed,
    All,
}

pub fn tree(params: Params, method: TreeMethodArg, pair_cap: u64, edge_cap: u64) -> CmdResult {
    let mut env = params_envelope("tree", params);
    env.param("method", format!("{method:?}").to_lowercase())
        .param("pair_cap", pair_cap)
        .param("edge_cap", edge_cap);
    let nodes = node_count(params);

    let reports: Vec<TreeReport> = match method {
        TreeMethodArg::Pair => vec![path_sum_pair_enum(params, pair_cap).map_err(|e| with_advice(e, "edge or depth"))?],
        TreeMethodArg::Edge => vec![path_sum_edge_contrib(params, edge_cap).map_err(|e| with_advice(e, "depth"))?],
        TreeMethodArg::Depth => vec![path_sum_depth_count(params)?],
        TreeMethodArg::Closed => vec![path_sum_closed_report(params)?],
        TreeMethodArg::All => {
            let mut all = Vec::new();
            let mut skipped = Vec::new();
            if nodes <= BigInt::from(pair_cap) {
                all.push(path_sum_pair_enum(params, pair_cap)?);
            } else {
                skipped.push("pair_enum");
            }
            if nodes <= BigInt::from(edge_cap) {
                all.push(path_sum_edge_contrib(params, edge_cap)?);
            } else {
                skipped.push("edge_contrib");
            }
            all.push(path_sum_depth_count(params)?);
            all.push(path_sum_closed_report(params)?);
            env.value("skipped_over_cap", skipped);
            all
        }
    };

    let first = &reports[0];
    let agree = reports
        .iter()
        .all(|r| r.edges == first.edges && r.path_sum == first.path_sum && r.per_depth == first.per_depth);
    env.exact("node_count", &nodes)
        .exact("tree_edges", &first.edges)
        .exact("path_sum", &first.path_sum)
        .value("methods", reports.iter().map(method_name).collect::<Vec<_>>());
    if method == TreeMethodArg::All {
        env.value("methods_agree", agree);
    }
    let rows = first
        .per_depth
        .iter()
        .map(|d| vec![Value::from(d.depth), exact_cell(&d.pairs)])
        .collect();
    env.table(&[("depth", None), ("pairs", Some(Exactness::Exact))], rows);
    Ok(Outcome { envelope: env, verified: agree })
}

fn method_name(report: &TreeReport) -> Value {
    serde_json::to_value(report.method).expect("method serializes")
}

fn with_advice(err: Error, alternative: &str) -> CliError {
    match CliError::from(err) {
        CliError::ResourceCap(msg) => CliError::ResourceCap(format!(
            "{msg}; use --method {alternative}, or raise the cap explicitly"
        )),
        other => other,
    }
}

pub fn verify(m_max: u32, n_max: u32, matrix_n_max: u32) -> CmdResult {
    let sweep = identity_sweep(m_max, n_max, matrix_n_max)?;
    let mut env = OutputEnvelope::new("verify");
    env.param("m_max", m_max).param("n_max", n_max).param("matrix_n_max", matrix_n_max);
    let passed = sweep.cells.iter().filter(|c| c.passed()).count();
    env.value("cells", sweep.cells.len())
        .value("cells_passed", passed)
        .value("all_passed", sweep.all_passed());
    let rows = sweep
        .cells
        .iter()
        .map(|c| {
            let matrix = match c.matrix_route {
                Some(true) => "agree",
                Some(false) => "DISAGREE",
                None => "skipped",
            };
            vec![
                Value::from(c.m),
                Value::from(c.n),
                exact_cell(&c.expectation),
                exact_cell(&c.tree_edges),
                exact_cell(&c.variance),
                exact_cell(&c.path_sum),
                Value::from(c.expectation_eq_edges),
                Value::from(c.variance_eq_scaled_path_sum),
                Value::from(matrix),
                Value::from(if c.passed() { "pass" } else { "FAIL" }),
            ]
        })
        .collect();
    let ex = Some(Exactness::Exact);
    env.table(
        &[
            ("m", None),
            ("n", None),
            ("expectation", ex),
            ("tree_edges", ex),
            ("variance", ex),
            ("path_sum", ex),
            ("e_eq_t", None),
            ("var_eq_scaled_s", None),
            ("matrix_route", None),
            ("status", None),
        ],
        rows,
    );
    Ok(Outcome { envelope: env, verified: sweep.all_passed() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceName {
    /// Path sums of complete binary trees (= binary-alphabet variances).
    #[value(name = "A286778")]
    A286778,
    /// Edge counts of complete binary trees (= binary-alphabet expectations).
    #[value(name = "T-m2", alias = "A000918")]
    TM2,
    /// Path sums of complete binary trees computed through the tree route.
    #[value(name = "S-m2")]
    SM2,
}

pub fn sequence(name: SequenceName, count: u32) -> CmdResult {
    let mut env = OutputEnvelope::new("sequence");
    let label = name.to_possible_value().expect("named").get_name().to_string();
    env.param("name", label.clone()).param("count", count);
    let mut terms = Vec::with_capacity(count as usize);
    let mut checked = true;
    for n in 1..=count {
        let p = Params::new(2, n)?;
        let (term, others) = match name {
            SequenceName::A286778 => (a286778(n), [variance_closed(p), path_sum_closed(p)]),
            SequenceName::TM2 => (t_sequence_m2(n), [tree_edge_count(p), expectation_closed(p)]),
            SequenceName::SM2 => (path_sum_closed(p), [a286778(n), variance_closed(p)]),
        };
        checked &= others.iter().all(|o| *o == term);
        terms.push(exact_cell(&term));
    }
    env.value("terms", terms).mark("terms", Exactness::Exact).value("cross_checked", checked);
    Ok(Outcome { envelope: env, verified: checked })
}

pub fn distribution_cmd(params: Params, tail: &str) -> CmdResult {
    let bound = parse_rational(tail)?;
    let table = distribution(params, &bound)?;
    let mut env = params_envelope("distribution", params);
    env.param("tail", tail);
    let cumulative = table.cumulative();
    let mean = table.truncated_mean();
    let gap_bound = table.mean_gap_bound();
    let expectation = runlength_core::ExactRational::from(expectation_closed(params));
    let gap = &expectation - &mean;
    let within = gap >= num_traits::Zero::zero() && gap <= gap_bound;
    env.value("rows", table.probs.len())
        .value("last_k", table.last_step())
        .exact("tail", &table.tail)
        .exact("cumulative", &cumulative)
        .value("mass_conserved", &cumulative + &table.tail == num_traits::One::one())
        .exact("truncated_mean", &mean)
        .float("truncated_mean_float", runlength_core::rational::to_f64(&mean))
        .exact("expectation", &expectation)
        .exact("mean_gap_bound", &gap_bound)
        .value("mean_within_bound", within);
    let rows = table
        .probs
        .iter()
        .map(|(k, p)| vec![Value::from(*k), exact_cell(p), float_cell(runlength_core::rational::to_f64(p))])
        .collect();
    env.table(&[("k", None), ("p_k", Some(Exactness::Exact)), ("p_k_float", Some(Exactness::Float))], rows);
    Ok(Outcome { envelope: env, verified: within })
}

pub fn spectrum(params: Params, opts: RootOptions) -> CmdResult {
    let report = root_report(params, opts)?;
    let mut env = params_envelope("spectrum", params);
    env.param("tol", opts.residual_tol).param("margin_tol", opts.margin_tol).param("rho_tol", opts.rho_tol);
    env.value("char_poly", report.char_coeffs.to_string())
        .value("char_coeffs", serde_json::to_value(&report.char_coeffs).expect("serializes"))
        .value("transformed_poly", report.transformed_coeffs.to_string())
        .float("max_modulus", report.max_modulus)
        .float("margin", report.margin)
        .float("rho", report.rho_estimate)
        .float("max_modulus_over_m", report.max_modulus / f64::from(params.m()))
        .float(
            "worst_scaled_residual",
            report.roots.iter().map(|r| r.scaled_residual).fold(0.0, f64::max),
        )
        .value("bound_ok", report.rho_bound_ok);
    let rows = report
        .roots
        .iter()
        .map(|r| {
            vec![
                float_cell(r.re),
                float_cell(r.im),
                float_cell(r.modulus),
                float_cell(r.residual),
                float_cell(r.scaled_residual),
            ]
        })
        .collect();
    let f = Some(Exactness::Float);
    env.table(
        &[("re", f), ("im", f), ("modulus", f), ("residual", f), ("scaled_residual", f)],
        rows,
    );
    Ok(Outcome { envelope: env, verified: report.rho_bound_ok })
}

pub fn simulate(params: Params, trials: u64, seed: u64) -> CmdResult {
    let report = simulator::simulate(params, trials, seed)?;
    let mut env = params_envelope("simulate", params);
    env.param("trials", trials).param("seed", seed);
    env.value("rng", report.rng)
        .value("block_size", report.block_size)
        .float("mean", report.mean)
        .float("variance", report.variance)
        .float("std_error_of_mean", report.std_error_of_mean)
        .exact("min_len", &report.min_len)
        .exact("max_len", &report.max_len)
        .exact("expectation_exact", &expectation_closed(params))
        .exact("variance_exact", &variance_closed(params));
    let rows = report
        .histogram
        .iter()
        .map(|(len, count)| vec![Value::from(*len), Value::from(*count)])
        .collect();
    env.table(&[("length", None), ("count", None)], rows);
    Ok(Outcome::ok(env))
}
