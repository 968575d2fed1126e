//! `qcp gen`: deterministic instance files per family and seed.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use qcp_core::problems::{gen_lmp_random, ProblemFile};

use crate::{fail, write_or_stdout};

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: Family,
}

#[derive(Subcommand)]
pub enum Family {
    /// Random linear multiplicative program.
    Lmp {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Concave quadratic program over a box (deterministic unless seeded).
    Cqp {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Chain-structured polyhedral DC instance, primal orientation.
    DcPrimal {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Chain-structured polyhedral DC instance, conjugate orientation.
    DcDual {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Boundary minimization over the sin-floor projection polytope.
    Boundary {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

pub fn run(args: GenArgs) -> i32 {
    let (file, output) = match args.family {
        Family::Lmp { q, m, n, seed, output } => {
            if q == 0 || m == 0 || n == 0 {
                return fail("usage", "q, m and n must be positive", 2);
            }
            let inst = gen_lmp_random(q, m, n, seed);
            let rows = |mat: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..mat.nrows())
                    .map(|i| mat.row(i).iter().copied().collect())
                    .collect()
            };
            (
                ProblemFile::Lmp {
                    a: rows(&inst.a),
                    b: inst.b.iter().copied().collect(),
                    l: inst.l.iter().copied().collect(),
                    u: inst.u.iter().copied().collect(),
                    c_rows: rows(&inst.c_rows),
                    d: inst.d.iter().copied().collect(),
                },
                output,
            )
        }
        Family::Cqp { q, n, seed, output } => {
            if q == 0 || n == 0 || q > n {
                return fail("usage", "need 0 < q <= n", 2);
            }
            (ProblemFile::Cqp { q, n, seed }, output)
        }
        Family::DcPrimal { q, output } => {
            if q < 2 {
                return fail("usage", "the chain family needs q >= 2", 2);
            }
            (ProblemFile::DcPrimal { q }, output)
        }
        Family::DcDual { q, output } => {
            if q < 2 {
                return fail("usage", "the chain family needs q >= 2", 2);
            }
            (ProblemFile::DcDual { q }, output)
        }
        Family::Boundary { q, m, output } => {
            if q == 0 || m == 0 || q > m {
                return fail("usage", "need 0 < q <= m", 2);
            }
            (ProblemFile::Boundary { q, m }, output)
        }
    };
    // Validate eagerly so unusable parameter combinations fail here.
    if let Err(e) = file.build() {
        return fail("build", &e.to_string(), 2);
    }
    let text = serde_json::to_string_pretty(&file).expect("serializable");
    match write_or_stdout(output.as_deref(), &text) {
        Ok(()) => 0,
        Err(e) => fail("io", &format!("cannot write instance: {e}"), 1),
    }
}
