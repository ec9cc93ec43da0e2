use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tbyb::harness::{self, cell_sequence, write_sequence_csv, Cell, ExperimentConfig, OracleConfig};
use tbyb::plot::{self, PlotSpec};
use tbyb::shapley::{self, ShapleyMethod};
use tbyb::{AccuracyOracle, Catalog, CoalitionTable, Error, PricingKind, Result, SyntheticModel};

#[derive(Parser, Debug)]
#[command(
    name = "tbyb",
    version,
    about = "Simulate data purchasing strategies in a data marketplace"
)]
struct Cli {
    /// Base seed; overrides `grid.base_seed` and seeds Monte Carlo Shapley.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a parameter sweep and write experiment.csv and manifest.json.
    Sweep { config: PathBuf },
    /// Write per-round cumulative profit for one grid cell.
    Sequence(SequenceArgs),
    /// Compute Shapley values of the datasets.
    Shapley(ShapleyArgs),
    /// Render a CSV produced by `sweep` or `sequence` as SVG.
    Plot(PlotArgs),
    /// Check a config file without running it.
    ValidateConfig { config: PathBuf },
}

#[derive(Args, Debug)]
struct SequenceArgs {
    config: PathBuf,
    /// TCOD of the cell (default: first grid value).
    #[arg(long)]
    tcod: Option<f64>,
    #[arg(long)]
    mup: Option<f64>,
    #[arg(long)]
    di: Option<f64>,
    #[arg(long)]
    pricing: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Repetitions to average (default: grid.repetitions).
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OracleKind {
    Synthetic,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Method {
    Exact,
    Mc,
}

#[derive(Args, Debug)]
struct ShapleyArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    oracle: OracleKind,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    mup: f64,
    #[arg(long, default_value_t = 1.0)]
    di: f64,
    /// Coalition table CSV (table oracle).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Catalog CSV fixing n (table oracle).
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Output CSV (default: <out>/shapley.csv, or stdout without --out).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    input: PathBuf,
    #[arg(long, default_value = "tcod")]
    x: String,
    #[arg(long, default_value = "mean_profit")]
    y: String,
    #[arg(long, default_value = "strategy")]
    series: String,
    /// Column splitting the chart into panels, e.g. `mup`.
    #[arg(long)]
    facet: Option<String>,
    /// Keep only rows with `column=value`; repeatable.
    #[arg(long = "filter", value_name = "COLUMN=VALUE")]
    filters: Vec<String>,
    #[arg(long)]
    title: Option<String>,
    /// Output SVG (default: input path with .svg extension, under --out if given).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SizeLimit { .. } => 3,
        Error::Io { .. } | Error::Csv(_) => 4,
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::Load { .. }
        | Error::Plot(_)
        | Error::DegeneratePricing(_) => 2,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<(ExperimentConfig, Vec<u8>)> {
    let (mut cfg, bytes) = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.grid.base_seed = s;
    }
    Ok((cfg, bytes))
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| cfg.resolve(&cfg.output.dir))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_sweep(cli: &Cli, config: &Path) -> Result<()> {
    let (cfg, bytes) = load_config(config, cli.seed)?;
    let dir = out_dir(cli, &cfg);
    let report = harness::with_workers(cli.workers, || harness::sweep(&cfg, &bytes, &dir))??;
    eprintln!(
        "wrote {} rows to {}",
        report.outcome.rows.len(),
        report.experiment_csv.display()
    );
    for e in &report.outcome.errors {
        eprintln!(
            "cell tcod={} mup={:?} di={:?} pricing={} lambda={} failed: {}",
            e.cell.tcod,
            e.cell.mup,
            e.cell.di,
            e.cell.pricing.as_str(),
            e.cell.lambda,
            e.message
        );
    }
    match report.outcome.errors.first() {
        Some(_) if report.outcome.rows.is_empty() => Err(Error::Config("every grid cell failed".into())),
        _ => Ok(()),
    }
}

fn pick(name: &str, given: Option<f64>, grid: Vec<f64>) -> Result<f64> {
    match given {
        Some(v) => Ok(v),
        None => grid
            .first()
            .copied()
            .ok_or_else(|| Error::Config(format!("grid has no {name} values"))),
    }
}

fn cmd_sequence(cli: &Cli, args: &SequenceArgs) -> Result<()> {
    let (cfg, _) = load_config(&args.config, cli.seed)?;
    cfg.validate()?;
    let slots = harness::build_oracles(&cfg)?;
    let slot = slots
        .iter()
        .find(|s| args.mup.is_none_or(|m| s.mup == Some(m)) && args.di.is_none_or(|d| s.di == Some(d)))
        .ok_or_else(|| Error::InvalidParameter("no oracle in the config matches --mup/--di".into()))?;
    let pricing = match &args.pricing {
        Some(p) => p.parse::<PricingKind>()?,
        None => cfg.pricing.kind.to_vec()[0],
    };
    let cell = Cell {
        tcod: pick("tcod", args.tcod, cfg.pricing.tcod.to_vec())?,
        mup: slot.mup,
        di: slot.di,
        pricing,
        lambda: pick("lambda", args.lambda, cfg.grid.lambda.to_vec())?,
    };
    let reps = args.reps.unwrap_or(cfg.grid.repetitions);
    let rows = harness::with_workers(cli.workers, || cell_sequence(&cfg, slot, &cell, reps))??;
    let path = out_dir(cli, &cfg).join(&cfg.output.sequence);
    write_sequence_csv(&rows, create(&path)?)?;
    eprintln!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn cmd_shapley(cli: &Cli, args: &ShapleyArgs) -> Result<()> {
    let oracle: Box<dyn AccuracyOracle> = match args.oracle {
        OracleKind::Synthetic => Box::new(SyntheticModel::new(args.n, args.mup, args.di)?),
        OracleKind::Table => {
            let (Some(table), Some(catalog)) = (&args.table, &args.catalog) else {
                return Err(Error::InvalidParameter(
                    "the table oracle needs --table and --catalog".into(),
                ));
            };
            let n = Catalog::load(catalog)?.len();
            Box::new(CoalitionTable::load(table, n)?)
        }
    };
    let method = match args.method {
        Method::Exact => ShapleyMethod::Exact,
        Method::Mc => ShapleyMethod::MonteCarlo {
            samples: args.samples,
            seed: cli.seed.unwrap_or(0),
        },
    };
    let vf = Default::default();
    let result = harness::with_workers(cli.workers, || shapley::shapley(oracle.as_ref(), &vf, method))??;
    let target = args
        .output
        .clone()
        .or_else(|| cli.out.as_ref().map(|d| d.join("shapley.csv")));
    match target {
        Some(path) => result.write_csv(create(&path)?),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            result.write_csv(&mut lock)?;
            lock.flush().map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn cmd_plot(cli: &Cli, args: &PlotArgs) -> Result<()> {
    let filters = args
        .filters
        .iter()
        .map(|f| {
            f.split_once('=')
                .map(|(c, v)| (c.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Plot(format!("filter '{f}' is not COLUMN=VALUE")))
        })
        .collect::<Result<Vec<_>>>()?;
    let output = match (&args.output, &cli.out) {
        (Some(o), _) => o.clone(),
        (None, Some(dir)) => dir.join(args.input.with_extension("svg").file_name().unwrap_or_default()),
        (None, None) => args.input.with_extension("svg"),
    };
    let spec = PlotSpec {
        input: args.input.clone(),
        x: args.x.clone(),
        y: args.y.clone(),
        series: args.series.clone(),
        facet: args.facet.clone(),
        filters,
        output,
        title: args.title.clone(),
    };
    plot::plot(&spec)?;
    eprintln!("wrote {}", spec.output.display());
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<()> {
    let (cfg, _) = ExperimentConfig::load(config)?;
    cfg.validate()?;
    if let OracleConfig::Table { .. } = cfg.oracle {
        // loads both files and applies the size limits
        harness::build_oracles(&cfg)?;
    }
    println!("{}: ok", config.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Sweep { config } => cmd_sweep(cli, config),
        Command::Sequence(args) => cmd_sequence(cli, args),
        Command::Shapley(args) => cmd_shapley(cli, args),
        Command::Plot(args) => cmd_plot(cli, args),
        Command::ValidateConfig { config } => cmd_validate(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
