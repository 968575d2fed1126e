//! `qcp solve`: run one algorithm on one instance.

use std::path::PathBuf;

use clap::Args;
use nalgebra::DVector;
use qcp_core::lifting::{lift_problem, project_back};
use qcp_core::lp::SimplexBackend;
use qcp_core::problems::ProblemFile;
use qcp_core::qcp::{solve_dual_qcp, solve_primal_qcp, DualSelectionRule, QcpProblem, QcpResult};
use qcp_core::scalarize::VlpProblem;
use qcp_core::vlp::{
    benson_dual, benson_primal, initial_outer_approx, ApproxSnapshot, SolveOptions,
};
use serde::{Deserialize, Serialize};

use crate::{fail, write_or_stdout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Algorithm {
    /// Modified primal outer-approximation run.
    Primal,
    /// Modified dual run with the strongest-violation vertex selection.
    Dual,
    /// Modified dual run with the first-violating vertex selection.
    DualSe,
    /// Full upper-image enumeration.
    BensonPrimal,
    /// Full lower-image enumeration.
    BensonDual,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "primal")]
    pub algorithm: Algorithm,
    /// Builtin instance name (e.g. example41).
    #[arg(long, conflicts_with = "input")]
    pub builtin: Option<String>,
    /// Instance file (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Cut / sign-test tolerance.
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    /// Override of the cone interior point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the iteration log CSV here.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Write per-iteration outer-approximation vertex dumps with this prefix.
    #[arg(long)]
    pub dump_approx: Option<String>,
}

/// Result file schema; round-trips through serde.
#[derive(Serialize, Deserialize)]
pub struct ResultFile {
    pub algorithm: String,
    pub value: f64,
    pub argument: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub lp_solves: usize,
    pub failed_cuts: usize,
    pub wall_time_ms: f64,
}

pub fn run(args: SolveArgs) -> i32 {
    let file = match load_instance(&args) {
        Ok(f) => f,
        Err(msg) => return fail("parse", &msg, 2),
    };
    let mut problem = match file.build() {
        Ok(p) => p,
        Err(e) => return fail("build", &e.to_string(), 2),
    };
    if let Some(spec) = &args.c {
        match override_c(&problem, spec) {
            Ok(p) => problem = p,
            Err(msg) => return fail("usage", &msg, 2),
        }
    }
    let opts = SolveOptions {
        tolerance: args.tolerance,
        record_approx: args.dump_approx.is_some(),
        ..Default::default()
    };
    if args.tolerance <= 0.0 {
        return fail("usage", "tolerance must be positive", 2);
    }
    match args.algorithm {
        Algorithm::Primal | Algorithm::Dual | Algorithm::DualSe => run_qcp(&args, &problem, &opts),
        Algorithm::BensonPrimal | Algorithm::BensonDual => run_image(&args, &problem, &opts),
    }
}

fn load_instance(args: &SolveArgs) -> Result<ProblemFile, String> {
    match (&args.builtin, &args.input) {
        (Some(name), None) => ProblemFile::builtin(name).map_err(|e| e.to_string()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("malformed instance file: {e}"))
        }
        _ => Err("exactly one of --builtin or --input is required".into()),
    }
}

fn override_c(problem: &QcpProblem, spec: &str) -> Result<QcpProblem, String> {
    let values: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| format!("cannot parse --c: {e}"))?;
    let vlp = VlpProblem::new(
        problem.vlp.objective_matrix.clone(),
        problem.vlp.constraints.clone(),
        problem.vlp.rhs.clone(),
        problem.vlp.cone.clone(),
        DVector::from_vec(values),
    )
    .map_err(|e| e.to_string())?;
    Ok(QcpProblem {
        vlp,
        f: problem.f.clone(),
        sign_flipped: problem.sign_flipped,
    })
}

fn run_qcp(args: &SolveArgs, problem: &QcpProblem, opts: &SolveOptions) -> i32 {
    let rule = match args.algorithm {
        Algorithm::Dual => Some(DualSelectionRule::MinPhi),
        Algorithm::DualSe => Some(DualSelectionRule::FirstViolating),
        _ => None,
    };
    let mut backend = SimplexBackend::default();
    let start = std::time::Instant::now();
    let solved: Result<(QcpResult, Vec<qcp_core::qcp::QcpIterRecord>), qcp_core::Error> = (|| {
        if problem.vlp.cone.is_solid() {
            let r = match rule {
                None => solve_primal_qcp(problem, &mut backend, opts)?,
                Some(rule) => solve_dual_qcp(problem, rule, &mut backend, opts)?,
            };
            let h = r.history.clone();
            Ok((r, h))
        } else {
            let lifted = lift_problem(problem)?;
            let r = match rule {
                None => solve_primal_qcp(&lifted.lifted, &mut backend, opts)?,
                Some(rule) => solve_dual_qcp(&lifted.lifted, rule, &mut backend, opts)?,
            };
            let h = r.history.clone();
            Ok((project_back(&lifted, r)?, h))
        }
    })();
    let (result, history) = match solved {
        Ok(r) => r,
        Err(e) => return fail("solver", &e.to_string(), 1),
    };
    let wall = start.elapsed().as_secs_f64() * 1e3;
    if let Some(log) = &args.log {
        let mut text = String::from(qcp_core::qcp::QcpIterRecord::csv_header());
        for rec in &history {
            text.push('\n');
            text.push_str(&rec.to_csv_row());
        }
        if let Err(e) = std::fs::write(log, text) {
            return fail("io", &format!("cannot write log: {e}"), 1);
        }
    }
    if let Some(prefix) = &args.dump_approx {
        if let Err(e) = dump_snapshots(prefix, &result.snapshots) {
            return fail("io", &format!("cannot write approx dump: {e}"), 1);
        }
    }
    let out = ResultFile {
        algorithm: format!("{:?}", args.algorithm).to_lowercase(),
        value: result.value,
        argument: result.x.iter().copied().collect(),
        y: result.y.iter().copied().collect(),
        iterations: result.iterations,
        lp_solves: result.lp_solves,
        failed_cuts: result.failed_cuts,
        wall_time_ms: wall,
    };
    match write_or_stdout(
        args.output.as_deref(),
        &serde_json::to_string_pretty(&out).expect("serializable"),
    ) {
        Ok(()) => 0,
        Err(e) => fail("io", &format!("cannot write output: {e}"), 1),
    }
}

fn run_image(args: &SolveArgs, problem: &QcpProblem, opts: &SolveOptions) -> i32 {
    let mut backend = SimplexBackend::default();
    // Image runs need a solid cone; lift exactly like the value solvers.
    let vlp = if problem.vlp.cone.is_solid() {
        problem.vlp.clone()
    } else {
        match lift_problem(problem) {
            Ok(l) => l.lifted.vlp,
            Err(e) => return fail("solver", &e.to_string(), 1),
        }
    };
    let start = std::time::Instant::now();
    let outcome = (|| -> Result<_, qcp_core::Error> {
        match args.algorithm {
            Algorithm::BensonPrimal => {
                let (outer, _) = initial_outer_approx(&vlp, &mut backend)?;
                benson_primal(&vlp, outer, &mut backend, opts)
            }
            _ => benson_dual(&vlp, &mut backend, opts),
        }
    })();
    let (pair, stats) = match outcome {
        Ok(r) => r,
        Err(e) => return fail("solver", &e.to_string(), 1),
    };
    let wall = start.elapsed().as_secs_f64() * 1e3;
    if let Some(log) = &args.log {
        let mut text = String::from(qcp_core::vlp::VlpIterRecord::csv_header());
        for rec in &stats.history {
            text.push('\n');
            text.push_str(&rec.to_csv_row());
        }
        if let Err(e) = std::fs::write(log, text) {
            return fail("io", &format!("cannot write log: {e}"), 1);
        }
    }
    if let Some(prefix) = &args.dump_approx {
        if let Err(e) = dump_snapshots(prefix, &stats.snapshots) {
            return fail("io", &format!("cannot write approx dump: {e}"), 1);
        }
    }
    let to_rows = |vs: &[DVector<f64>]| -> Vec<Vec<f64>> {
        vs.iter().map(|v| v.iter().copied().collect()).collect()
    };
    let primal_side = args.algorithm == Algorithm::BensonPrimal;
    let out = serde_json::json!({
        "algorithm": if primal_side { "benson-primal" } else { "benson-dual" },
        "vertices": to_rows(if primal_side { &pair.primal_points } else { &pair.dual_points }),
        "directions": to_rows(&pair.primal_dirs),
        "iterations": stats.iterations,
        "lp_solves": stats.lp_solves,
        "wall_time_ms": wall,
    });
    match write_or_stdout(
        args.output.as_deref(),
        &serde_json::to_string_pretty(&out).expect("serializable"),
    ) {
        Ok(()) => 0,
        Err(e) => fail("io", &format!("cannot write output: {e}"), 1),
    }
}

fn dump_snapshots(prefix: &str, snapshots: &[ApproxSnapshot]) -> std::io::Result<()> {
    let mut by_side: std::collections::BTreeMap<&str, String> = Default::default();
    for snap in snapshots {
        let buf = by_side
            .entry(snap.side)
            .or_insert_with(|| "iteration,vertex,coords".to_string());
        for (i, v) in snap.vertices.iter().enumerate() {
            let coords = v
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";");
            buf.push_str(&format!("\n{},{},{}", snap.iteration, i, coords));
        }
    }
    for (side, content) in by_side {
        std::fs::write(format!("{prefix}_{side}.csv"), content)?;
    }
    Ok(())
}
