use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fronthaul::mm::{mm_solve_multistart, EigenChannel, MmOptions};
use fronthaul::oracle::{grid_oracle_discrete, DEFAULT_STEPS};
use fronthaul_cli::compare::{run_comparison, RunOptions};
use fronthaul_cli::config::{load_config, Method};
use fronthaul_cli::emit::{self, sig6, write_file};
use fronthaul_cli::table1::{run_table1, table1_csv, table1_report};
use fronthaul_cli::CliError;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fronthaul", version, about = "Joint power and fronthaul-rate allocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Frequency bins, overriding the config.
    #[arg(long)]
    bins: Option<usize>,
    /// Relative residual tolerance on both budgets.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal allocation only.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Cross-check against the grid oracle (at most 4 bins).
        #[arg(long)]
        verify_oracle: bool,
    },
    /// Every method listed in the config.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        verify_oracle: bool,
    },
    /// The five-case comparison under every parameter reading.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Branch sign and concavity over a grid of (S, C), plus the dividing curve.
    RegionMap {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        s_max: f64,
        #[arg(long, default_value_t = 10.0)]
        c_max: f64,
        #[arg(long, default_value_t = 200)]
        ns: usize,
        #[arg(long, default_value_t = 100)]
        nc: usize,
    },
    /// One-bit quantizer curves.
    Quantizers {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        lo_db: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        hi_db: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 128)]
        order: usize,
    },
    /// Sub-band information of a flat unit-gain channel against bandwidth.
    FlatSweep {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Discrete eigenchannel allocation by multi-start MM.
    MmSolve {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated eigenvalues.
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        /// Cross-check against the discrete oracle (at most 3 channels).
        #[arg(long)]
        verify_oracle: bool,
    },
}

fn scenario(config: &Path, common: &Common, verify_oracle: bool, only_optimal: bool) -> Result<(), CliError> {
    let mut cfg = load_config(config)?;
    if only_optimal {
        cfg.methods = vec![Method::Optimal];
    }
    let opts = RunOptions { bins: common.bins, tol: common.tol, verify_oracle };
    let cmp = run_comparison(&cfg, &opts)?;
    let csv = cfg.outputs.csv.clone().unwrap_or_else(|| common.out.join(format!("{}.csv", cfg.name)));
    let json = cfg.outputs.json.clone().unwrap_or_else(|| common.out.join(format!("{}.json", cfg.name)));
    write_file(&csv, &cmp.csv)?;
    write_file(&json, &emit::to_json(&cmp.summary))?;
    for m in &cmp.summary.methods {
        println!("{:<16} {:>10} nats/s  {:>10} bits/s", m.method.to_string(), sig6(m.info_nats), sig6(m.info_bits));
    }
    if let Some(c) = cmp.row.cognitive {
        println!("{:<16} {:>10} nats/s", "cognitive", sig6(c));
    }
    if let Some(o) = &cmp.summary.oracle {
        println!("oracle ({} steps) {} nats/s, relative gap {:.2e}", o.steps, sig6(o.objective), o.relative_gap);
    }
    if !cmp.row.ordering_ok {
        println!("warning: ordering chain violated");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

#[derive(Serialize)]
struct MmSummary {
    lambdas: Vec<f64>,
    p: f64,
    c: f64,
    starts: usize,
    seed: u64,
    objective: f64,
    converged: bool,
    iterations: usize,
    oracle: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, common, verify_oracle } => scenario(&config, &common, verify_oracle, true),
        Command::Compare { config, common, verify_oracle } => scenario(&config, &common, verify_oracle, false),
        Command::Table1 { common } => {
            let results = run_table1(&RunOptions { bins: common.bins, tol: common.tol, verify_oracle: false })?;
            write_file(&common.out.join("table1.csv"), &table1_csv(&results))?;
            write_file(&common.out.join("table1.json"), &emit::to_json(&results))?;
            print!("{}", table1_report(&results));
            Ok(())
        }
        Command::RegionMap { out, s_max, c_max, ns, nc } => {
            write_file(&out.join("region_map.csv"), &emit::region_map_csv(s_max, c_max, ns, nc))?;
            write_file(&out.join("dividing_curve.csv"), &emit::dividing_curve_csv(200))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Quantizers { out, lo_db, hi_db, points, order } => {
            write_file(&out.join("quantizers.csv"), &emit::quantizer_csv(lo_db, hi_db, points, order)?)?;
            println!("wrote {}", out.join("quantizers.csv").display());
            Ok(())
        }
        Command::FlatSweep { out, p, c, w, samples } => {
            let (csv, sw) = emit::flat_sweep_csv(p, c, w, samples)?;
            write_file(&out.join("flat_sweep.csv"), &csv)?;
            let full = sw.samples.last().map_or(0.0, |s| s.1);
            println!("best band {} Hz: {} nats/s (full band {} nats/s)", sig6(sw.b_star), sig6(sw.i_star), sig6(full));
            Ok(())
        }
        Command::MmSolve { out, lambdas, p, c, starts, seed, tol, verify_oracle } => {
            let e = EigenChannel::new(lambdas.clone())?;
            let mut opts = MmOptions::default();
            if let Some(t) = tol {
                opts.tol = t;
            }
            let sol = mm_solve_multistart(&e, p, c, starts, seed, &opts)?;
            let oracle =
                if verify_oracle { Some(grid_oracle_discrete(&e, p, c, DEFAULT_STEPS)?.objective) } else { None };
            let summary = MmSummary {
                lambdas,
                p,
                c,
                starts,
                seed,
                objective: emit::round6(sol.state.obj),
                converged: sol.converged,
                iterations: sol.trace.len(),
                oracle: oracle.map(emit::round6),
            };
            write_file(&out.join("mm.csv"), &emit::mm_csv(&e, &sol))?;
            write_file(&out.join("mm.json"), &emit::to_json(&summary))?;
            println!("objective {} nats/use", sig6(sol.state.obj));
            if let Some(o) = oracle {
                println!("oracle ({DEFAULT_STEPS} steps) {} nats/use", sig6(o));
            }
            if !sol.converged {
                println!("warning: iteration cap reached");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
