//! Command-line driver. [`run_cli`] is the whole program; `main` only
//! forwards the process arguments and exit code.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use afbench::analysis::{
    fit_1d_demo, grad_check_activation, grad_check_all, mc_mean_activation, FitOptions, MeanActivationRow, Target1d,
    DEFAULT_EPS, DEFAULT_TOLERANCE, MEAN_ACTIVATION_HEADER, RELU_MEAN_ANALYTIC, STANDARD_POINTS,
};
use afbench::experiment::{emit_report, format_2dp, resolve_config, run_experiment};
use afbench::network::{evaluate, fit};
use afbench::{ActivationKind, ActivationSpec, DatasetSpec, ExperimentConfig, RankReport, ResultTable, TrainConfig};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping benchmark parallelism.
pub const THREADS_ENV: &str = "AFBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "afbench", version, about = "Activation-function benchmark for dense networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one network and report per-epoch loss and final accuracy.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the configs x activations x runs matrix and write reports.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank activations from a mean-accuracy CSV without training.
    Rank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "relu")]
        baseline: String,
        /// Activation whose improvement over the baseline is reported.
        #[arg(long, default_value = "pfts")]
        highlight: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Statistical probes of individual activations.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Compare analytic derivatives with central differences.
    Gradcheck {
        #[arg(long = "fn")]
        kind: Option<ActivationKind>,
    },
    /// Small illustrative experiments.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Monte-Carlo mean of f(Z) for Z ~ N(0, 1).
    MeanActivation {
        #[arg(long = "fn")]
        kind: ActivationKind,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides the activation's trainable parameter.
        #[arg(long, allow_negative_numbers = true)]
        param: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Fit a scalar network to a 1-D target and write the learned curve.
    Fit1d(Fit1dArgs),
}

#[derive(Debug, Args)]
struct Fit1dArgs {
    #[arg(long)]
    target: Target1d,
    #[arg(long = "fn")]
    kind: ActivationKind,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hidden widths, dash separated.
    #[arg(long, default_value = "16-16")]
    hidden: String,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Everything `run_cli` can fail with, split by exit code.
#[derive(Debug)]
enum Failure {
    /// Bad flags, unreadable or malformed config. Exit 2.
    Config(String),
    /// Valid request that failed while computing. Exit 1.
    Compute(afbench::Error),
}

impl From<afbench::Error> for Failure {
    fn from(e: afbench::Error) -> Self {
        Failure::Compute(e)
    }
}

fn config_err(path: &Path, e: impl Display) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

/// Configuration for `train`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    dataset: DatasetSpec,
    #[serde(default)]
    test_dataset: Option<DatasetSpec>,
    /// Preset name or width list such as `64-32-C`.
    network: String,
    #[serde(default = "default_activation")]
    activation: ActivationSpec,
    #[serde(default)]
    train: TrainConfig,
}

fn default_activation() -> ActivationSpec {
    ActivationSpec::new(ActivationKind::Relu)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| config_err(path, e))?;
    // serde_json reports "... at line L column C"
    serde_json::from_str(&text).map_err(|e| config_err(path, e))
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
    }
}

fn parse_widths(text: &str) -> Result<Vec<usize>, Failure> {
    text.split('-')
        .map(|w| w.trim().parse::<usize>().ok().filter(|&w| w > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Failure::Config(format!("--hidden '{text}' must look like 16-16")))
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| afbench::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, body).map_err(|e| {
        Failure::Compute(afbench::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn print_ranks(out: &mut dyn Write, table: &ResultTable, report: &RankReport) -> std::io::Result<()> {
    writeln!(out, "activation,mean_rank,score")?;
    for (a, act) in table.activations().iter().enumerate() {
        let score = report.scores[a].map_or("-".to_string(), |s| s.to_string());
        writeln!(out, "{act},{},{score}", format_2dp(report.mean_ranks[a]))?;
    }
    writeln!(out, "best: {}", report.best(table))?;
    if let Some(imp) = &report.improvement {
        let values: Vec<String> = imp.values.iter().map(|v| format_2dp(*v)).collect();
        writeln!(out, "{} vs {} (%): {}", imp.activation, report.baseline, values.join(" "))?;
    }
    Ok(())
}

fn cmd_train(config: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let file: TrainFile = read_json(config)?;
    let base = config.parent();
    let train = file.dataset.load(base)?;
    let test = file.test_dataset.as_ref().map(|t| t.load(base)).transpose()?;
    let net_cfg = resolve_config(&file.network, &train, file.activation, file.train.dropout_rate)?;
    writeln!(
        out,
        "network {} layers {:?} activation {} samples {}",
        net_cfg.name,
        net_cfg.layers,
        net_cfg.activation.kind,
        train.len()
    )
    .ok();
    let model = fit(&net_cfg, &train, &file.train, |epoch, loss| {
        writeln!(out, "epoch {epoch:>3} loss {loss:.6}").ok();
    })?;
    let acc = evaluate(&model.network, &train)?;
    writeln!(out, "train accuracy {:.2}%", acc * 100.0).ok();
    if let Some(test) = test {
        let acc = evaluate(&model.network, &test)?;
        writeln!(out, "test accuracy {:.2}%", acc * 100.0).ok();
    }
    let params = model.network.activation_params();
    if !params.is_empty() {
        writeln!(out, "activation params {params:?}").ok();
    }
    Ok(())
}

fn cmd_benchmark(config: &Path, dir: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg: ExperimentConfig = read_json(config)?;
    cfg.activation_specs().map_err(|e| config_err(config, e))?;
    let threads = threads_from_env()?;
    let outcome = run_experiment(&cfg, config.parent(), threads)?;
    let paths = emit_report(&outcome.table, &outcome.report, dir)?;
    print_ranks(out, &outcome.table, &outcome.report).ok();
    for p in [&paths.raw_csv, &paths.summary_csv, &paths.markdown] {
        writeln!(out, "wrote {}", p.display()).ok();
    }
    Ok(())
}

fn cmd_rank(input: &Path, baseline: &str, highlight: &str, dir: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = fs::read_to_string(input).map_err(|e| config_err(input, e))?;
    let table = ResultTable::from_means_csv(&text).map_err(|e| config_err(input, e))?;
    if table.activation_index(baseline).is_none() {
        return Err(Failure::Config(format!("baseline '{baseline}' is not a row of {}", input.display())));
    }
    let report = RankReport::compute(&table, baseline, Some(highlight))?;
    print_ranks(out, &table, &report).ok();
    if let Some(dir) = dir {
        let paths = emit_report(&table, &report, dir)?;
        writeln!(out, "wrote {}", paths.markdown.display()).ok();
    }
    Ok(())
}

fn cmd_mean_activation(
    kind: ActivationKind,
    samples: usize,
    seed: u64,
    param: Option<f64>,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let spec = ActivationSpec::new(kind);
    let param = param.unwrap_or_else(|| spec.initial_param());
    let mean = mc_mean_activation(&spec, param, samples, seed)?;
    let row = MeanActivationRow {
        kind,
        param,
        n: samples,
        seed,
        mean,
    };
    let csv = format!("{MEAN_ACTIVATION_HEADER}\n{row}\n");
    out.write_all(csv.as_bytes()).ok();
    if kind == ActivationKind::Relu {
        writeln!(
            out,
            "note: analytic mean of relu(Z) is 1/sqrt(2*pi) = {RELU_MEAN_ANALYTIC:.5}; the often quoted 0.357 does not match it"
        )
        .ok();
    }
    if let Some(path) = dest {
        write_file(path, &csv)?;
    }
    Ok(())
}

fn cmd_gradcheck(kind: Option<ActivationKind>, out: &mut dyn Write) -> Result<bool, Failure> {
    let reports = match kind {
        Some(k) => {
            let spec = ActivationSpec::new(k);
            vec![grad_check_activation(&spec, spec.initial_param(), &STANDARD_POINTS, DEFAULT_EPS, DEFAULT_TOLERANCE)?]
        }
        None => grad_check_all(),
    };
    for r in &reports {
        writeln!(out, "{r}").ok();
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    writeln!(out, "{} of {} activations passed", reports.len() - failed, reports.len()).ok();
    Ok(failed == 0)
}

fn cmd_fit1d(args: &Fit1dArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let hidden = parse_widths(&args.hidden)?;
    let options = FitOptions {
        learning_rate: args.lr,
        ..FitOptions::default()
    };
    let result = fit_1d_demo(args.target, args.kind.into(), &hidden, args.epochs, args.seed, &options)?;
    let path = args.out.join(format!("fit1d_{}_{}.csv", args.target.name(), args.kind));
    write_file(&path, &result.curve_csv())?;
    writeln!(out, "target {} activation {} final mse {:.6e}", args.target.name(), args.kind, result.final_mse).ok();
    writeln!(out, "wrote {}", path.display()).ok();
    Ok(())
}

/// Runs one invocation. `args[0]` is the program name, as with
/// `std::env::args`. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                err.write_all(text.as_bytes()).ok();
                return EXIT_USAGE;
            }
            // --help and --version
            out.write_all(text.as_bytes()).ok();
            return EXIT_OK;
        }
    };
    let result = match &cli.command {
        Command::Train { config } => cmd_train(config, out),
        Command::Benchmark { config, out: dir } => cmd_benchmark(config, dir, out),
        Command::Rank {
            input,
            baseline,
            highlight,
            out: dir,
        } => cmd_rank(input, baseline, highlight, dir.as_deref(), out),
        Command::Analyze(Analyze::MeanActivation {
            kind,
            samples,
            seed,
            param,
            out: dest,
        }) => cmd_mean_activation(*kind, *samples, *seed, *param, dest.as_deref(), out),
        Command::Gradcheck { kind } => match cmd_gradcheck(*kind, out) {
            Ok(true) => Ok(()),
            Ok(false) => {
                writeln!(err, "error: gradient check failed").ok();
                return EXIT_FAILURE;
            }
            Err(e) => Err(e),
        },
        Command::Demo(Demo::Fit1d(args)) => cmd_fit1d(args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            writeln!(err, "error: {msg}").ok();
            EXIT_USAGE
        }
        Err(Failure::Compute(e)) => {
            writeln!(err, "error: {e}").ok();
            EXIT_FAILURE
        }
    }
}
