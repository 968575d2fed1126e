//! `qcp bench`: averaged iteration/LP/failed-cut counts over seeded batches,
//! per grid cell and algorithm, as a CSV table.

use std::path::PathBuf;
use std::sync::Mutex;

use clap::Args;
use qcp_core::lifting::solve_auto;
use qcp_core::lp::SimplexBackend;
use qcp_core::problems::{gen_cqp_random, gen_lmp_random, make_lmp};
use qcp_core::qcp::{DualSelectionRule, QcpProblem};
use qcp_core::vlp::SolveOptions;

use crate::{fail, write_or_stdout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchFamily {
    Lmp,
    Cqp,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "lmp")]
    pub family: BenchFamily,
    /// Grid cells `q:m,n` separated by `;` (for cqp: `q:n`).
    #[arg(long)]
    pub cells: String,
    /// Number of seeds (1..=seeds).
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Comma-separated subset of primal,dual,dual-se.
    #[arg(long, default_value = "primal,dual,dual-se")]
    pub algorithms: String,
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct Cell {
    q: usize,
    m: usize,
    n: usize,
}

fn parse_cells(family: BenchFamily, spec: &str) -> Result<Vec<Cell>, String> {
    let mut cells = Vec::new();
    for part in spec.split(';').filter(|s| !s.trim().is_empty()) {
        let (q_str, rest) = part
            .split_once(':')
            .ok_or_else(|| format!("cell '{part}' must look like q:m,n"))?;
        let q: usize = q_str.trim().parse().map_err(|e| format!("bad q in '{part}': {e}"))?;
        let dims: Vec<usize> = rest
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad dims in '{part}': {e}"))?;
        let cell = match (family, dims.as_slice()) {
            (BenchFamily::Lmp, [m, n]) => Cell { q, m: *m, n: *n },
            (BenchFamily::Cqp, [n]) => Cell { q, m: 0, n: *n },
            _ => return Err(format!("cell '{part}' has the wrong arity for the family")),
        };
        if cell.q == 0 || cell.n == 0 {
            return Err(format!("cell '{part}' has zero dimensions"));
        }
        cells.push(cell);
    }
    if cells.is_empty() {
        return Err("no grid cells given".into());
    }
    Ok(cells)
}

struct Tally {
    iterations: f64,
    lp_solves: f64,
    failed_cuts: f64,
    wall_ms: f64,
    solved: usize,
    failed: usize,
}

pub fn run(args: BenchArgs) -> i32 {
    if args.seeds == 0 {
        return fail("usage", "seed count must be positive", 2);
    }
    let cells = match parse_cells(args.family, &args.cells) {
        Ok(c) => c,
        Err(msg) => return fail("usage", &msg, 2),
    };
    let algorithms: Vec<&str> = args.algorithms.split(',').map(|s| s.trim()).collect();
    for alg in &algorithms {
        if !matches!(*alg, "primal" | "dual" | "dual-se") {
            return fail("usage", &format!("unknown algorithm '{alg}'"), 2);
        }
    }
    let opts = SolveOptions {
        tolerance: args.tolerance,
        max_iterations: 100_000,
        ..Default::default()
    };
    let mut csv = String::from(
        "family,q,m,n,algorithm,seeds,solved,failed,mean_iterations,mean_lp_solves,mean_failed_cuts,mean_wall_ms",
    );
    for cell in &cells {
        for alg in &algorithms {
            let tally = Mutex::new(Tally {
                iterations: 0.0,
                lp_solves: 0.0,
                failed_cuts: 0.0,
                wall_ms: 0.0,
                solved: 0,
                failed: 0,
            });
            // Instances are independent; fan the seeds out over threads.
            let workers = std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
                .min(args.seeds as usize);
            std::thread::scope(|scope| {
                for w in 0..workers {
                    let tally = &tally;
                    let opts = &opts;
                    let seeds = args.seeds;
                    let family = args.family;
                    let cell = *cell;
                    scope.spawn(move || {
                        let mut seed = w as u64 + 1;
                        while seed <= seeds {
                            let built: Result<QcpProblem, _> = match family {
                                BenchFamily::Lmp => {
                                    make_lmp(&gen_lmp_random(cell.q, cell.m, cell.n, seed))
                                }
                                BenchFamily::Cqp => gen_cqp_random(cell.q, cell.n, seed),
                            };
                            let rule = match *alg {
                                "primal" => None,
                                "dual" => Some(DualSelectionRule::MinPhi),
                                _ => Some(DualSelectionRule::FirstViolating),
                            };
                            let started = std::time::Instant::now();
                            let outcome = built.and_then(|p| {
                                let mut backend = SimplexBackend::default();
                                solve_auto(&p, rule, &mut backend, opts)
                            });
                            let wall = started.elapsed().as_secs_f64() * 1e3;
                            let mut t = tally.lock().expect("tally lock");
                            match outcome {
                                Ok(r) => {
                                    t.iterations += r.iterations as f64;
                                    t.lp_solves += r.lp_solves as f64;
                                    t.failed_cuts += r.failed_cuts as f64;
                                    t.wall_ms += wall;
                                    t.solved += 1;
                                }
                                Err(_) => t.failed += 1,
                            }
                            seed += workers as u64;
                        }
                    });
                }
            });
            let t = tally.into_inner().expect("tally lock");
            let k = t.solved.max(1) as f64;
            csv.push_str(&format!(
                "\n{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
                match args.family {
                    BenchFamily::Lmp => "lmp",
                    BenchFamily::Cqp => "cqp",
                },
                cell.q,
                cell.m,
                cell.n,
                alg,
                args.seeds,
                t.solved,
                t.failed,
                t.iterations / k,
                t.lp_solves / k,
                t.failed_cuts / k,
                t.wall_ms / k,
            ));
        }
    }
    match write_or_stdout(args.output.as_deref(), &csv) {
        Ok(()) => 0,
        Err(e) => fail("io", &format!("cannot write table: {e}"), 1),
    }
}
