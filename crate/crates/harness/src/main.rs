use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use lassotune::config::SweepSpec;
use lassotune::examples::{example1_grid, run_example1, run_example2, write_example1, write_example2};
use lassotune::output::{write_plot_data, write_records};
use lassotune::riskexp::{run_risk_experiment, write_mse_table, write_risk_rows};
use lassotune::summary::{summarize, write_summary};
use lassotune::sweep::run_sweep;
use lassotune_core::MethodId;

#[derive(Parser)]
#[command(
    name = "lassotune",
    version,
    about = "Compare lasso tuning-parameter selectors on simulated data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated method ids, e.g. `CV-10-Fold,R-CV-2,SSR`.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario sweep and write records.csv, plot_data.csv and summary.csv.
    Simulate(Common),
    /// Write AIC/BIC/GCV traces for ridge and lasso on the two-point example.
    Example1 {
        #[command(flatten)]
        common: Common,
        /// Number of grid values in [1e-5, 1].
        #[arg(long, default_value_t = 50)]
        grid_size: usize,
    },
    /// Compare risk-estimate and AIC choices on n = 30, p = 150 draws.
    Example2(Common),
    /// Risk-estimation experiment for the oracle least-squares fit.
    Riskexp(Common),
    /// Summarise a records CSV.
    Summarize {
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load_spec(c: &Common, base: SweepSpec) -> Result<SweepSpec> {
    let mut spec = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SweepSpec::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => base,
    };
    if let Some(w) = c.workers {
        spec.workers = w;
    }
    if let Some(s) = c.seed {
        spec.base_seed = s;
    }
    if let Some(r) = c.replications {
        spec.replications = r;
    }
    if let Some(ms) = &c.methods {
        spec.methods = ms.iter().map(|m| m.parse::<MethodId>()).collect::<Result<_, _>>()?;
    }
    Ok(spec)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(c) => {
            let spec = load_spec(&c, SweepSpec::default())?;
            let records = run_sweep(&spec)?;
            write_records(create(&c.out, "records.csv")?, &records)?;
            write_plot_data(create(&c.out, "plot_data.csv")?, &records)?;
            let mut buf = Vec::new();
            write_records(&mut buf, &records)?;
            write_summary(create(&c.out, "summary.csv")?, &summarize(&buf[..])?)?;
            eprintln!("wrote {} records to {}", records.len(), c.out.display());
        }
        Command::Example1 { common, grid_size } => {
            let results = run_example1(&example1_grid(grid_size))?;
            write_example1(create(&common.out, "example1.csv")?, &results)?;
            for r in &results {
                for m in [&r.ridge, &r.lasso] {
                    println!(
                        "sigma = {:<4} {:<5} AIC argmin {:.3e}  BIC argmin {:.3e}  GCV argmin {:.3e}",
                        r.sigma,
                        m.model,
                        m.aic.min_lambda(),
                        m.bic.min_lambda(),
                        m.gcv.min_lambda()
                    );
                }
            }
        }
        Command::Example2(c) => {
            let base = SweepSpec {
                replications: 100,
                ..SweepSpec::default()
            };
            let spec = load_spec(&c, base)?;
            let recs = run_example2(spec.replications, spec.base_seed, spec.workers, &spec.settings)?;
            write_example2(create(&c.out, "example2.csv")?, &recs)?;
            for &sigma in &lassotune::examples::SIGMAS {
                for &m in &lassotune::examples::EXAMPLE2_METHODS {
                    let mine: Vec<_> = recs.iter().filter(|r| r.sigma == sigma && r.method == m).collect();
                    let med = lassotune::examples::median(mine.iter().filter_map(|r| r.pred_risk));
                    let at_min = mine.iter().filter(|r| r.grid_min == Some(true)).count();
                    println!(
                        "sigma = {:<4} {:<12} median pred_risk {:>10}  grid-min choices {}/{}",
                        sigma,
                        m,
                        med.map_or("NA".into(), |v| format!("{v:.4}")),
                        at_min,
                        mine.len()
                    );
                }
            }
        }
        Command::Riskexp(c) => {
            let spec = load_spec(&c, SweepSpec::risk_table())?;
            let run = run_risk_experiment(&spec)?;
            write_risk_rows(create(&c.out, "risk_records.csv")?, &run)?;
            write_mse_table(create(&c.out, "risk_mse.csv")?, &run.table)?;
            write_mse_table(std::io::stdout().lock(), &run.table)?;
        }
        Command::Summarize { input, out } => {
            let f = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let rows = summarize(f).with_context(|| format!("in {}", input.display()))?;
            write_summary(create(&out, "summary.csv")?, &rows)?;
        }
    }
    Ok(())
}
