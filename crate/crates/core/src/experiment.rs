//! Benchmark matrix (network config x activation x run) and the statistics
//! used to compare activations: baseline comparison score, fractional ranks,
//! mean rank and relative improvement.
//!
//! Reports are ordered canonically (configs in the order given, activations
//! in [`ActivationKind::ALL`] order), so parallel execution never changes the
//! emitted bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::{ActivationKind, ActivationSpec};
use crate::data::{Dataset, DatasetSpec};
use crate::error::{Error, Result};
use crate::network::{evaluate, fit, preset_widths, NetworkConfig, TrainConfig};
use crate::numerics::{mix_seed, RandomStream};

/// Seed for one trial. Activations contribute their canonical index, so
/// adding an activation to an experiment leaves other trials' seeds intact.
pub fn derive_seed(base_seed: u64, config_index: usize, activation: ActivationKind, run_index: usize) -> u64 {
    mix_seed(
        base_seed,
        &[config_index as u64, activation.index() as u64, run_index as u64],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub config_index: usize,
    pub network: NetworkConfig,
    pub activation: ActivationSpec,
    pub run_index: usize,
    pub seed: u64,
    pub train: TrainConfig,
}

impl TrialSpec {
    pub fn label(&self) -> String {
        format!(
            "{} / {} / run {} (seed {})",
            self.network.name, self.activation.kind, self.run_index, self.seed
        )
    }
}

/// Resolves a config entry: a preset name (`DNN-5A`) or a dash-separated
/// width list whose last entry may be `C` for the dataset's class count
/// (`64-32-C`).
pub fn resolve_config(entry: &str, dataset: &Dataset, activation: ActivationSpec, dropout: f64) -> Result<NetworkConfig> {
    if preset_widths(entry).is_some() {
        return NetworkConfig::preset(entry, dataset.dim(), activation, dropout);
    }
    let widths = entry
        .split('-')
        .map(|w| match w.trim() {
            "C" | "c" => Ok(dataset.num_classes()),
            w => w.parse::<usize>().map_err(|_| {
                Error::Domain(format!(
                    "network '{entry}' is neither a preset nor a width list like 64-32-C"
                ))
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkConfig::new(entry, dataset.dim(), widths, activation, dropout)
}

/// Expands the full grid in canonical order.
pub fn build_trials(
    configs: &[String],
    activations: &[ActivationSpec],
    runs: usize,
    train: &TrainConfig,
    base_seed: u64,
    dataset: &Dataset,
) -> Result<Vec<TrialSpec>> {
    let mut trials = Vec::with_capacity(configs.len() * activations.len() * runs);
    for (ci, entry) in configs.iter().enumerate() {
        for spec in activations {
            let network = resolve_config(entry, dataset, *spec, train.dropout_rate)?;
            for run in 0..runs {
                let seed = derive_seed(base_seed, ci, spec.kind, run);
                trials.push(TrialSpec {
                    config_index: ci,
                    network: network.clone(),
                    activation: *spec,
                    run_index: run,
                    seed,
                    train: TrainConfig { seed, ..*train },
                });
            }
        }
    }
    Ok(trials)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// Percent.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub runs: Vec<RunRecord>,
    pub mean: f64,
}

impl Cell {
    pub fn from_runs(runs: Vec<RunRecord>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Domain("a result cell needs at least one run".into()));
        }
        let mean = runs.iter().map(|r| r.accuracy).sum::<f64>() / runs.len() as f64;
        Ok(Cell { runs, mean })
    }

    /// A cell known only by its mean (e.g. read from a summary table).
    pub fn from_mean(mean: f64) -> Self {
        Cell { runs: Vec::new(), mean }
    }
}

/// Accuracy grid; `cells[c][a]` is config `c` with activation `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    configs: Vec<String>,
    activations: Vec<String>,
    cells: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(configs: Vec<String>, activations: Vec<String>, cells: Vec<Vec<Cell>>) -> Result<Self> {
        if cells.len() != configs.len() || cells.iter().any(|row| row.len() != activations.len()) {
            return Err(Error::Shape(format!(
                "result grid does not match {} configs x {} activations",
                configs.len(),
                activations.len()
            )));
        }
        let run_count = cells.first().and_then(|r| r.first()).map(|c| c.runs.len());
        if cells.iter().flatten().any(|c| Some(c.runs.len()) != run_count) {
            return Err(Error::Domain("every cell must hold the same number of runs".into()));
        }
        if let Some(c) = cells.iter().flatten().find(|c| !c.mean.is_finite()) {
            return Err(Error::Domain(format!("cell mean {} is not finite", c.mean)));
        }
        Ok(ResultTable {
            configs,
            activations,
            cells,
        })
    }

    /// Builds a table from `means[activation][config]`, the row layout of
    /// the published accuracy tables.
    pub fn from_means(configs: Vec<String>, activations: Vec<String>, means: &[Vec<f64>]) -> Result<Self> {
        if means.len() != activations.len() || means.iter().any(|r| r.len() != configs.len()) {
            return Err(Error::Shape(format!(
                "means grid does not match {} activations x {} configs",
                activations.len(),
                configs.len()
            )));
        }
        let cells = (0..configs.len())
            .map(|c| means.iter().map(|row| Cell::from_mean(row[c])).collect())
            .collect();
        ResultTable::new(configs, activations, cells)
    }

    /// Parses `activation,<config1>,<config2>,...` with one activation per row.
    pub fn from_means_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Format(format!("accuracy table header: {e}")))?
            .clone();
        if header.get(0).map(|h| h.to_ascii_lowercase()) != Some("activation".into()) {
            return Err(Error::Format(
                "accuracy table must start with an 'activation' column".into(),
            ));
        }
        let configs: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        if configs.is_empty() {
            return Err(Error::Format("accuracy table has no config columns".into()));
        }
        let mut activations = Vec::new();
        let mut means = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
            let name = record.get(0).unwrap_or_default().to_string();
            let values = record
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, v)| {
                    v.parse::<f64>().map_err(|_| {
                        Error::Format(format!(
                            "line {line}, column '{}': '{v}' is not a number",
                            configs.get(j).map_or("?", String::as_str)
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != configs.len() {
                return Err(Error::Format(format!(
                    "line {line}: expected {} values, found {}",
                    configs.len(),
                    values.len()
                )));
            }
            activations.push(name);
            means.push(values);
        }
        if activations.is_empty() {
            return Err(Error::Format("accuracy table has no activation rows".into()));
        }
        ResultTable::from_means(configs, activations, &means)
    }

    pub fn configs(&self) -> &[String] {
        &self.configs
    }

    pub fn activations(&self) -> &[String] {
        &self.activations
    }

    pub fn cell(&self, config: usize, activation: usize) -> &Cell {
        &self.cells[config][activation]
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty() || self.activations.is_empty()
    }

    pub fn run_count(&self) -> usize {
        self.cells.first().and_then(|r| r.first()).map_or(0, |c| c.runs.len())
    }

    /// Mean accuracies of every activation for one config.
    pub fn config_means(&self, config: usize) -> Vec<f64> {
        self.cells[config].iter().map(|c| c.mean).collect()
    }

    pub fn activation_index(&self, name: &str) -> Option<usize> {
        let wanted = canonical_name(name);
        self.activations.iter().position(|a| canonical_name(a) == wanted)
    }
}

fn canonical_name(name: &str) -> String {
    name.parse::<ActivationKind>()
        .map(|k| k.name().to_string())
        .unwrap_or_else(|_| name.trim().to_ascii_lowercase())
}

fn display_name(name: &str) -> String {
    name.parse::<ActivationKind>()
        .map(|k| k.display_name().to_string())
        .unwrap_or_else(|_| name.to_string())
}

/// Trains and evaluates every trial, in parallel on up to `threads` workers
/// (all cores when `None`). Accuracy is measured on `test` in percent.
pub fn run_matrix(trials: &[TrialSpec], train: &Dataset, test: &Dataset, threads: Option<usize>) -> Result<ResultTable> {
    if trials.is_empty() {
        return Err(Error::Domain("experiment has no trials".into()));
    }
    let run_one = |t: &TrialSpec| -> Result<RunRecord> {
        let wrap = |e: Error| Error::Trial {
            trial: t.label(),
            source: Box::new(e),
        };
        let model = fit(&t.network, train, &t.train, |_, _| {}).map_err(wrap)?;
        let accuracy = evaluate(&model.network, test).map_err(wrap)? * 100.0;
        Ok(RunRecord {
            run: t.run_index,
            seed: t.seed,
            accuracy,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::State(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| trials.par_iter().map(run_one).collect::<Result<Vec<_>>>())?;

    let mut configs: Vec<(usize, String)> = Vec::new();
    let mut kinds: Vec<ActivationKind> = Vec::new();
    for t in trials {
        if !configs.iter().any(|(i, _)| *i == t.config_index) {
            configs.push((t.config_index, t.network.name.clone()));
        }
        if !kinds.contains(&t.activation.kind) {
            kinds.push(t.activation.kind);
        }
    }
    configs.sort_by_key(|(i, _)| *i);
    kinds.sort();

    let mut cells = Vec::with_capacity(configs.len());
    for (ci, _) in &configs {
        let mut row = Vec::with_capacity(kinds.len());
        for kind in &kinds {
            let mut runs: Vec<RunRecord> = trials
                .iter()
                .zip(&records)
                .filter(|(t, _)| t.config_index == *ci && t.activation.kind == *kind)
                .map(|(_, r)| r.clone())
                .collect();
            runs.sort_by_key(|r| r.run);
            row.push(Cell::from_runs(runs)?);
        }
        cells.push(row);
    }
    ResultTable::new(
        configs.into_iter().map(|(_, n)| n).collect(),
        kinds.iter().map(|k| k.name().to_string()).collect(),
        cells,
    )
}

/// Number of configs where each activation's mean strictly beats the
/// baseline's. The baseline itself gets `None`.
pub fn baseline_score(table: &ResultTable, baseline: &str) -> Result<Vec<Option<usize>>> {
    let b = table
        .activation_index(baseline)
        .ok_or_else(|| Error::Domain(format!("baseline '{baseline}' is not in the table")))?;
    Ok((0..table.activations.len())
        .map(|a| {
            (a != b).then(|| {
                (0..table.configs.len())
                    .filter(|&c| table.cells[c][a].mean > table.cells[c][b].mean)
                    .count()
            })
        })
        .collect())
}

/// Rank 1 is the highest value; tied values share the mean of the
/// positions they span.
pub fn fractional_rank(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean over configs of `ranks[config][activation]`.
pub fn mean_rank(ranks: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = ranks.first().map_or(0, Vec::len);
    if ranks.is_empty() || ranks.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(
            "every config must rank the same activations".into(),
        ));
    }
    Ok((0..n)
        .map(|a| ranks.iter().map(|r| r[a]).sum::<f64>() / ranks.len() as f64)
        .collect())
}

/// Percent change of `acc` relative to `baseline_acc`.
pub fn relative_improvement(acc: f64, baseline_acc: f64) -> Result<f64> {
    if baseline_acc.is_nan() || baseline_acc <= 0.0 {
        return Err(Error::Domain(format!(
            "baseline accuracy must be positive, got {baseline_acc}"
        )));
    }
    Ok((acc - baseline_acc) / baseline_acc * 100.0)
}

/// Rounds half toward +infinity at `decimals` places. A relative nudge
/// absorbs binary representation error so 2.375 rounds to 2.38.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    let nudge = 1e-9 * scaled.abs().max(1.0);
    let r = (scaled + 0.5 + nudge).floor() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn format_2dp(x: f64) -> String {
    format!("{:.2}", round_half_up(x, 2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Improvement {
    pub activation: String,
    /// Percent, one per config.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub baseline: String,
    /// `ranks[config][activation]`.
    pub ranks: Vec<Vec<f64>>,
    pub mean_ranks: Vec<f64>,
    pub scores: Vec<Option<usize>>,
    pub improvement: Option<Improvement>,
}

impl RankReport {
    /// `highlight` selects the activation whose relative improvement over
    /// the baseline is reported; ignored when absent from the table.
    pub fn compute(table: &ResultTable, baseline: &str, highlight: Option<&str>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::Domain("cannot rank an empty table".into()));
        }
        let scores = baseline_score(table, baseline)?;
        let b = table.activation_index(baseline).expect("checked by baseline_score");
        let ranks: Vec<Vec<f64>> = (0..table.configs.len())
            .map(|c| fractional_rank(&table.config_means(c)))
            .collect();
        let mean_ranks = mean_rank(&ranks)?;
        let improvement = match highlight.and_then(|h| table.activation_index(h)) {
            Some(h) if h != b => Some(Improvement {
                activation: table.activations[h].clone(),
                values: (0..table.configs.len())
                    .map(|c| relative_improvement(table.cells[c][h].mean, table.cells[c][b].mean))
                    .collect::<Result<_>>()?,
            }),
            _ => None,
        };
        Ok(RankReport {
            baseline: table.activations[b].clone(),
            ranks,
            mean_ranks,
            scores,
            improvement,
        })
    }

    /// Activation with the lowest mean rank (first in table order on ties).
    pub fn best(&self, table: &ResultTable) -> String {
        let mut best = 0;
        for (i, &m) in self.mean_ranks.iter().enumerate() {
            if m < self.mean_ranks[best] {
                best = i;
            }
        }
        table.activations[best].clone()
    }
}

fn fmt_rank(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{r:.0}")
    } else {
        format!("{r}")
    }
}

/// Raw per-run rows: `config,activation,run,seed,accuracy`.
pub fn raw_csv(table: &ResultTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Format(format!("CSV encoding: {e}"));
    w.write_record(["config", "activation", "run", "seed", "accuracy"]).map_err(io)?;
    for (c, config) in table.configs.iter().enumerate() {
        for (a, act) in table.activations.iter().enumerate() {
            for r in &table.cells[c][a].runs {
                w.write_record([
                    config.as_str(),
                    act.as_str(),
                    &r.run.to_string(),
                    &r.seed.to_string(),
                    &r.accuracy.to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    finish_csv(w)
}

/// Mean accuracies in the `activation,<config>...` layout that
/// [`ResultTable::from_means_csv`] reads.
pub fn summary_csv(table: &ResultTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Format(format!("CSV encoding: {e}"));
    let mut header = vec!["activation".to_string()];
    header.extend(table.configs.iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (a, act) in table.activations.iter().enumerate() {
        let mut row = vec![act.clone()];
        row.extend((0..table.configs.len()).map(|c| table.cells[c][a].mean.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Format(format!("CSV encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(format!("CSV encoding: {e}")))
}

pub fn markdown_report(table: &ResultTable, report: &RankReport) -> String {
    let names: Vec<String> = table.activations.iter().map(|a| display_name(a)).collect();
    let baseline = display_name(&report.baseline);
    let mut md = String::new();
    let header = |md: &mut String, last: &str| {
        let _ = write!(md, "| Activation |");
        for c in &table.configs {
            let _ = write!(md, " {c} |");
        }
        let _ = writeln!(md, " {last} |");
        let _ = write!(md, "|---|");
        for _ in &table.configs {
            let _ = write!(md, "---:|");
        }
        let _ = writeln!(md, "---:|");
    };

    let _ = writeln!(md, "# Activation benchmark report\n");
    let runs = table.run_count();
    if runs > 0 {
        let _ = writeln!(md, "Mean test accuracy over {runs} run(s) per cell. Baseline: {baseline}.\n");
    } else {
        let _ = writeln!(md, "Accuracies as supplied. Baseline: {baseline}.\n");
    }

    let _ = writeln!(md, "## Classification accuracy (%)\n");
    header(&mut md, "Score");
    for (a, name) in names.iter().enumerate() {
        let _ = write!(md, "| {name} |");
        for c in 0..table.configs.len() {
            let means = table.config_means(c);
            let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let star = if means[a] == best { "*" } else { "" };
            let _ = write!(md, " {}{star} |", format_2dp(means[a]));
        }
        let score = report.scores[a].map_or("-".to_string(), |s| s.to_string());
        let _ = writeln!(md, " {score} |");
    }
    let _ = writeln!(
        md,
        "\n`*` marks the best result per configuration. Score counts the configurations where the mean accuracy is strictly above {baseline}.\n"
    );

    let _ = writeln!(md, "## Fractional ranks\n");
    header(&mut md, "Mean rank");
    for (a, name) in names.iter().enumerate() {
        let _ = write!(md, "| {name} |");
        for ranks in &report.ranks {
            let _ = write!(md, " {} |", fmt_rank(ranks[a]));
        }
        let _ = writeln!(md, " {} |", format_2dp(report.mean_ranks[a]));
    }
    let _ = writeln!(
        md,
        "\nRank 1 is the highest accuracy; ties share the mean of their positions. Lower mean rank is better. Best mean rank: {}.",
        display_name(&report.best(table))
    );

    if let Some(imp) = &report.improvement {
        let _ = writeln!(
            md,
            "\n## Relative improvement of {} over {baseline} (%)\n",
            display_name(&imp.activation)
        );
        let _ = write!(md, "|");
        for c in &table.configs {
            let _ = write!(md, " {c} |");
        }
        let _ = write!(md, "\n|");
        for _ in &table.configs {
            let _ = write!(md, "---:|");
        }
        let _ = write!(md, "\n|");
        for v in &imp.values {
            let _ = write!(md, " {} |", format_2dp(*v));
        }
        let _ = writeln!(md);
    }
    md
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub raw_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub markdown: PathBuf,
}

/// Writes `raw.csv`, `summary.csv` and `report.md` into `dir`. All content
/// is rendered before any file is created.
pub fn emit_report(table: &ResultTable, report: &RankReport, dir: &Path) -> Result<ReportPaths> {
    if table.is_empty() {
        return Err(Error::Domain("refusing to write a report for an empty table".into()));
    }
    let raw = raw_csv(table)?;
    let summary = summary_csv(table)?;
    let md = markdown_report(table, report);
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = ReportPaths {
        raw_csv: dir.join("raw.csv"),
        summary_csv: dir.join("summary.csv"),
        markdown: dir.join("report.md"),
    };
    for (path, body) in [(&paths.raw_csv, raw), (&paths.summary_csv, summary), (&paths.markdown, md)] {
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(paths)
}

fn default_runs() -> usize {
    5
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_activations() -> Vec<String> {
    ActivationKind::ALL.iter().map(|k| k.name().to_string()).collect()
}

/// Benchmark description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Held-out evaluation data. When absent, `test_fraction` of `dataset`
    /// is split off with a seed derived from `base_seed`.
    #[serde(default)]
    pub test_dataset: Option<DatasetSpec>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub configs: Vec<String>,
    #[serde(default = "default_activations")]
    pub activations: Vec<String>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_baseline")]
    pub baseline: String,
}

fn default_baseline() -> String {
    "relu".into()
}

impl ExperimentConfig {
    /// Activation specs in canonical order, duplicates rejected.
    pub fn activation_specs(&self) -> Result<Vec<ActivationSpec>> {
        let mut kinds = self
            .activations
            .iter()
            .map(|a| a.parse::<ActivationKind>())
            .collect::<Result<Vec<_>>>()?;
        kinds.sort();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("activation list contains duplicates".into()));
        }
        Ok(kinds.into_iter().map(ActivationSpec::new).collect())
    }

    /// Train and test datasets.
    pub fn load_datasets(&self, base_dir: Option<&Path>) -> Result<(Dataset, Dataset)> {
        let full = self.dataset.load(base_dir)?;
        match &self.test_dataset {
            Some(t) => Ok((full, t.load(base_dir)?)),
            None if self.test_fraction == 0.0 => Ok((full.clone(), full)),
            None => {
                if !(0.0..1.0).contains(&self.test_fraction) {
                    return Err(Error::Domain(format!(
                        "test_fraction {} is outside [0, 1)",
                        self.test_fraction
                    )));
                }
                let mut rng = RandomStream::new(mix_seed(self.base_seed, &[u64::MAX]));
                let (test, train) = full.split(self.test_fraction, &mut rng)?;
                Ok((train, test))
            }
        }
    }
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub table: ResultTable,
    pub report: RankReport,
}

pub fn run_experiment(cfg: &ExperimentConfig, base_dir: Option<&Path>, threads: Option<usize>) -> Result<ExperimentOutcome> {
    if cfg.runs == 0 || cfg.configs.is_empty() {
        return Err(Error::Domain("experiment needs at least one config and one run".into()));
    }
    let specs = cfg.activation_specs()?;
    let (train, test) = cfg.load_datasets(base_dir)?;
    let trials = build_trials(&cfg.configs, &specs, cfg.runs, &cfg.train, cfg.base_seed, &train)?;
    let table = run_matrix(&trials, &train, &test, threads)?;
    let highlight = if cfg.activations.iter().any(|a| canonical_name(a) == "pfts") {
        Some("pfts")
    } else {
        None
    };
    let report = RankReport::compute(&table, &cfg.baseline, highlight)?;
    Ok(ExperimentOutcome { table, report })
}
