use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use homog_dirac::config::RunConfig;
use homog_dirac::run::{run_monopole, run_spectrum, run_verify, Suite};
use homog_dirac::Error;

/// Equivariant bundles, invariant connections and Hodge–Dirac operators on
/// compact homogeneous spaces.
#[derive(Parser)]
#[command(name = "homog-dirac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[command(flatten)]
        opts: Opts,
    },
    /// Write the blockwise Dirac spectrum as CSV.
    Spectrum {
        #[command(flatten)]
        opts: Opts,
    },
    /// Write sampled monopole projections and frame Gram matrices as CSV.
    Monopole {
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Geometry,
    Dirac,
    All,
}

/// Flags override the config file.
#[derive(Args)]
struct Opts {
    /// key = value config file with [section] headers
    #[arg(long)]
    config: Option<PathBuf>,
    /// catalog name (su2, su2-trivial-k) or group file
    #[arg(long)]
    group: Option<String>,
    /// u1 or trivial
    #[arg(long)]
    subgroup: Option<String>,
    #[arg(long)]
    inner_product_scale: Option<f64>,
    /// monopole(n), monopole(n, level), tangent or clifford
    #[arg(long)]
    bundle: Option<String>,
    /// canonical, levi-civita or gamma-file(PATH)
    #[arg(long)]
    connection: Option<String>,
    #[arg(long)]
    quadrature_bandwidth: Option<u32>,
    #[arg(long)]
    sample_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CHECK=VALUE, repeatable
    #[arg(long = "tolerance", value_name = "CHECK=VALUE")]
    tolerances: Vec<String>,
    /// highest spin level for spectra
    #[arg(long)]
    levels: Option<u32>,
    /// write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags: [(&str, Option<String>); 10] = [
            ("group", self.group.clone()),
            ("subgroup", self.subgroup.clone()),
            ("inner-product-scale", self.inner_product_scale.map(|v| v.to_string())),
            ("bundle", self.bundle.clone()),
            ("connection", self.connection.clone()),
            ("quadrature-bandwidth", self.quadrature_bandwidth.map(|v| v.to_string())),
            ("sample-count", self.sample_count.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("levels", self.levels.map(|v| v.to_string())),
            ("output", self.output.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        for t in &self.tolerances {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("tolerance '{t}' is not CHECK=VALUE")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("tolerance {k}: {e}")))?;
            cfg.tolerances.insert(k.trim().to_string(), v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Error> {
    match &cfg.output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("HOMOG_DIRAC_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("HOMOG_DIRAC_THREADS='{v}' is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    configure_threads()?;
    match cli.command {
        Command::Verify { suite, opts } => {
            let cfg = opts.resolve()?;
            let suite = match suite {
                SuiteArg::Geometry => Suite::Geometry,
                SuiteArg::Dirac => Suite::Dirac,
                SuiteArg::All => Suite::All,
            };
            let report = run_verify(&cfg, suite)?;
            emit(&cfg, &report.to_json())?;
            for e in report.failures() {
                eprintln!("FAIL {}: {:.3e} > {:.1e}", e.check, e.max_residual, e.tolerance);
            }
            eprintln!(
                "{} of {} checks passed",
                report.checks.iter().filter(|e| e.pass).count(),
                report.checks.len()
            );
            Ok(report.pass)
        }
        Command::Spectrum { opts } => {
            let cfg = opts.resolve()?;
            let (csv, blocks) = run_spectrum(&cfg)?;
            emit(&cfg, &csv)?;
            let kernel: usize = blocks.iter().map(|b| b.kernel_dimension(1e-6)).sum();
            eprintln!("{} blocks, kernel dimension {kernel}", blocks.len());
            Ok(true)
        }
        Command::Monopole { opts } => {
            let cfg = opts.resolve()?;
            emit(&cfg, &run_monopole(&cfg)?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
