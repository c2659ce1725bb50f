use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qscramble::check;
use qscramble::measure::{
    monte_carlo_covariance, optimal_povm, sequential_experiment, McExperiment, Povm,
};
use qscramble::optimize::maximize_det_qfim;
use qscramble::record::csv_header;
use qscramble::sweep::run_sweep;
use qscramble::{
    hierarchy_report, AngleRange, EncodingConfig, Error, Estimator, OutputFormat, OutputRecord,
    SweepSpec, WeightMatrix,
};

const EXIT_USAGE: u8 = 1;
const EXIT_SLOPPY: u8 = 2;

#[derive(Parser)]
#[command(name = "qscramble", version, about = "Two-parameter qubit estimation with a scrambling rotation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every bound at one configuration.
    Bounds {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a grid of configurations, streaming one record per point.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Range for one angle as NAME=START:STOP:STEPS (repeatable).
        #[arg(long = "range", value_name = "NAME=START:STOP:STEPS", allow_hyphen_values = true)]
        ranges: Vec<String>,
    },
    /// Multi-start search for the maximum of det Q.
    Optimize {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 50)]
        starts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo estimation experiment.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// `optimal`, `tetrahedral`, `pauli`, or a path to a POVM JSON document.
        #[arg(long, default_value = "optimal")]
        povm: String,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 200)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// `mle-refined` or `mle-grid`.
        #[arg(long, default_value = "mle-refined")]
        estimator: String,
        /// Run the two-step sequential strategy instead of a joint measurement.
        #[arg(long)]
        sequential: bool,
        /// Fraction of shots spent on the first step.
        #[arg(long, default_value_t = 0.5)]
        allocation: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the reproduction suite and print a pass/fail table.
    Check {
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda2: Option<f64>,
    /// Angles (and sweep ranges) are given in degrees.
    #[arg(long)]
    degrees: bool,
    /// Weight matrix entries as w11,w12,w22.
    #[arg(long, default_value = "1,0,1", allow_hyphen_values = true)]
    weight: String,
}

impl ConfigArgs {
    fn scale(&self) -> f64 {
        if self.degrees { PI / 180.0 } else { 1.0 }
    }

    /// Unset angles default to the minimal-sloppiness configuration.
    fn config(&self) -> anyhow::Result<EncodingConfig> {
        let base = EncodingConfig::optimal();
        let k = self.scale();
        let pick = |v: Option<f64>, d: f64| v.map_or(d, |x| x * k);
        Ok(EncodingConfig::new(
            pick(self.alpha, base.alpha),
            pick(self.beta, base.beta),
            pick(self.gamma, base.gamma),
            pick(self.theta, base.theta),
            pick(self.phi, base.phi),
            pick(self.lambda1, base.lambda1),
            pick(self.lambda2, base.lambda2),
        )?)
    }

    fn weight(&self) -> anyhow::Result<WeightMatrix> {
        let parts: Vec<f64> = self
            .weight
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("malformed --weight `{}`", self.weight))?;
        let [w11, w12, w22] = parts[..] else {
            bail!("--weight takes exactly three values w11,w12,w22");
        };
        Ok(WeightMatrix::new(w11, w12, w22)?)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// `csv` or `json`.
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> anyhow::Result<OutputFormat> {
        Ok(self.format.parse()?)
    }
}

fn open_output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&PathBuf>, value: &Value) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_bounds(config: &ConfigArgs, output: &OutputArgs) -> anyhow::Result<u8> {
    let cfg = config.config()?;
    let record = OutputRecord::compute(&cfg, &config.weight()?)?;
    let mut out = open_output(output.out.as_ref())?;
    match output.format()? {
        OutputFormat::Csv => writeln!(out, "{}\n{}", csv_header(), record.to_csv_row())?,
        OutputFormat::Json => writeln!(out, "{}", record.to_json())?,
    }
    out.flush()?;
    if record.sloppy {
        eprintln!("sloppy model: det Q = {:e}, parameters are not jointly estimable", record.det_q);
        return Ok(EXIT_SLOPPY);
    }
    Ok(0)
}

fn cmd_sweep(config: &ConfigArgs, output: &OutputArgs, ranges: &[String]) -> anyhow::Result<u8> {
    let mut spec = SweepSpec::new(config.config()?, config.weight()?);
    for r in ranges {
        let (name, text) = r
            .split_once('=')
            .with_context(|| format!("malformed --range `{r}`, expected NAME=START:STOP:STEPS"))?;
        let range = AngleRange::parse(text)?.scaled(config.scale());
        spec = spec.with_range(name.trim(), range)?;
    }
    let format = output.format()?;
    spec.grid_size()?;
    let mut out = open_output(output.out.as_ref())?;
    let n = run_sweep(&spec, format, &mut out)?;
    out.flush()?;
    eprintln!("{n} records written");
    Ok(0)
}

fn cmd_optimize(config: &ConfigArgs, starts: usize, seed: u64, out: Option<&PathBuf>) -> anyhow::Result<u8> {
    if starts == 0 {
        bail!("--starts must be at least 1");
    }
    let base = config.config()?;
    let report = maximize_det_qfim(starts, seed);
    let cfg = report.config_with(base.beta, base.lambda1, base.lambda2)?;
    let mut value = serde_json::to_value(&report)?;
    value["config"] = serde_json::to_value(cfg)?;
    write_json(out, &value)?;
    Ok(0)
}

fn load_povm(spec: &str, cfg: &EncodingConfig, w: &WeightMatrix) -> anyhow::Result<Povm> {
    Ok(match spec {
        "optimal" => optimal_povm(cfg, w)?,
        "tetrahedral" => Povm::tetrahedral(),
        "pauli" => Povm::pauli(),
        path => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read POVM file {path}"))?;
            Povm::from_json(&text)?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config: &ConfigArgs,
    povm: &str,
    shots: u64,
    repeats: usize,
    seed: u64,
    estimator: &str,
    sequential: bool,
    allocation: f64,
    out: Option<&PathBuf>,
) -> anyhow::Result<u8> {
    let cfg = config.config()?;
    let w = config.weight()?;
    let estimator: Estimator = estimator.parse()?;
    let bounds = hierarchy_report(&cfg, &w)?;
    let sloppy = bounds.is_sloppy();

    let result: qscramble::Result<Value> = if sequential {
        sequential_experiment(&cfg, shots, allocation, repeats, seed)
            .map(|r| serde_json::to_value(r).expect("serializable"))
    } else {
        let povm = if sloppy && povm == "optimal" {
            Ok(Povm::tetrahedral())
        } else {
            load_povm(povm, &cfg, &w).map_err(|e| Error::InvalidArgument(e.to_string()))
        };
        povm.and_then(|p| McExperiment::new(cfg, p, shots, repeats, seed))
            .map(|e| e.with_estimator(estimator))
            .and_then(|e| monte_carlo_covariance(&e))
            .map(|r| serde_json::to_value(r).expect("serializable"))
    };

    match result {
        Ok(mut value) => {
            value["status"] = json!("ok");
            value["config"] = serde_json::to_value(cfg)?;
            value["c_n"] = serde_json::to_value(bounds.c_n)?;
            value["k1"] = serde_json::to_value(bounds.k1)?;
            value["k2"] = serde_json::to_value(bounds.k2)?;
            write_json(out, &value)?;
            Ok(0)
        }
        Err(Error::InvalidArgument(msg)) => bail!(msg),
        Err(e) => {
            let kind = match &e {
                Error::DegenerateLikelihood { .. } => "degenerate-likelihood",
                Error::SingularModel { .. } => "singular-model",
                Error::IllConditioned { .. } => "ill-conditioned",
                _ => "estimator-failure",
            };
            let value = json!({
                "status": "failed",
                "failure": kind,
                "error": e.to_string(),
                "repeats": repeats,
                "successful_repeats": 0,
                "failed_repeats": repeats,
                "shots": shots,
                "seed": seed,
                "sloppy": sloppy,
                "det_q": bounds.scalars.det_q,
                "config": cfg,
            });
            write_json(out, &value)?;
            eprintln!("simulation failed: {e}");
            Ok(if sloppy { EXIT_SLOPPY } else { EXIT_USAGE })
        }
    }
}

fn cmd_check(output: &OutputArgs) -> anyhow::Result<u8> {
    let format = output.format()?;
    let rows = check::run_all();
    let mut out = open_output(output.out.as_ref())?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            for row in &rows {
                writeln!(out, "{row}")?;
            }
        }
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    writeln!(out, "{} of {} rows pass", rows.len() - failed, rows.len())?;
    out.flush()?;
    Ok(if failed == 0 { 0 } else { EXIT_USAGE })
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("QS_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("QS_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    match &cli.command {
        Command::Bounds { config, output } => cmd_bounds(config, output),
        Command::Sweep { config, output, ranges } => cmd_sweep(config, output, ranges),
        Command::Optimize { config, starts, seed, out } => {
            cmd_optimize(config, *starts, *seed, out.as_ref())
        }
        Command::Simulate {
            config,
            povm,
            shots,
            repeats,
            seed,
            estimator,
            sequential,
            allocation,
            out,
        } => cmd_simulate(
            config,
            povm,
            *shots,
            *repeats,
            *seed,
            estimator,
            *sequential,
            *allocation,
            out.as_ref(),
        ),
        Command::Check { output } => cmd_check(output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
