use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use irsplit::problems::io::{write_dense_csv, write_libsvm};
use irsplit::problems::{synthetic_lasso, synthetic_logistic};
use irsplit_bench::emit::{read_json, write_csv, write_json, Report};
use irsplit_bench::{run_benchmark, summarize, BatchConfig, Overrides};

#[derive(Parser)]
#[command(name = "irsplit", version, about = "Benchmarks for inertial-relaxed ADMM, plain ADMM and FISTA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every run in a TOML config and write CSV + JSON results.
    Run(RunArgs),
    /// Recompute the summary tables from a JSON results file.
    Summarize {
        results: PathBuf,
        /// Also write the records as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a synthetic dataset to disk.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Directory for results.csv / results.json.
    #[arg(long, env = "IRSPLIT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Base name of the output files.
    #[arg(long, default_value = "results")]
    name: String,
    /// Runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "rho-bar")]
    rho_bar: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Dense LASSO instance as A.csv and b.csv.
    Lasso {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IRSPLIT_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Logistic regression instance in LIBSVM format.
    Logistic {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "IRSPLIT_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
}

fn create(path: &Path) -> anyhow::Result<File> {
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let mut config = BatchConfig::load(&args.config)?;
    config.apply(&Overrides {
        alpha: args.alpha,
        beta: args.beta,
        rho_bar: args.rho_bar,
        sigma: args.sigma,
        c: args.c,
        epsilon: args.epsilon,
    });
    config.validate()?;
    let rows = run_benchmark(&config.runs, args.jobs);
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} [{}]: {}", r.problem, r.solver.as_str(), r.error.as_deref().unwrap_or_default());
    }
    let summary = summarize(&rows).ok();
    if let Some(s) = &summary {
        for metric in ["outer", "inner", "seconds"] {
            println!("{}", s.table(metric));
        }
    }
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let csv_path = args.out_dir.join(format!("{}.csv", args.name));
    let json_path = args.out_dir.join(format!("{}.json", args.name));
    write_csv(create(&csv_path)?, &rows)?;
    let all_converged = rows.iter().all(|r| r.converged());
    write_json(create(&json_path)?, &Report::new(config, rows, summary))?;
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(all_converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Summarize { results, csv } => (|| {
            let file = File::open(&results).with_context(|| format!("cannot open {}", results.display()))?;
            let report = read_json(file)?;
            let summary = summarize(&report.records)?;
            for metric in ["outer", "inner", "seconds"] {
                println!("{}", summary.table(metric));
            }
            if let Some(path) = csv {
                write_csv(create(&path)?, &report.records)?;
            }
            Ok(report.records.iter().all(|r| r.converged()))
        })(),
        Command::Gen { kind } => (|| {
            match kind {
                GenKind::Lasso { m, n, density, noise, seed, out_dir } => {
                    anyhow::ensure!(m >= 1 && n >= 1 && density > 0.0 && density <= 1.0, "need m, n ≥ 1 and density in (0, 1]");
                    std::fs::create_dir_all(&out_dir)?;
                    let p = synthetic_lasso(m, n, density, noise, seed).problem;
                    write_dense_csv(&out_dir.join("A.csv"), &out_dir.join("b.csv"), &p.a, &p.b)?;
                    println!("nu = {:e}", p.nu);
                }
                GenKind::Logistic { q, n, seed, out_dir } => {
                    anyhow::ensure!(q >= 2 && n >= 2, "need q ≥ 2 and n ≥ 2");
                    std::fs::create_dir_all(&out_dir)?;
                    let p = synthetic_logistic(q, n, seed).problem;
                    let path = out_dir.join("data.libsvm");
                    write_libsvm(create(&path)?, &p.features, &p.labels)?;
                    println!("nu = {:e}", p.nu);
                }
            }
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
