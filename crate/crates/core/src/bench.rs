//! Dataset generation, method evaluation, timing sweeps and report files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyzer::{analyze_text, render_trace};
use crate::bits::Bitstring;
use crate::circuits::{build_grover, sample_specs_capped, subset_count, GroverSpec, Mode};
use crate::distribution::Distribution;
use crate::metrics::{
    aggregate, classical_fidelity, is_degenerate, mean_std, search_accuracy, MetricReport,
    SampleScore, DEFAULT_TAU,
};
use crate::qasm::{parse_program, print_program};
use crate::simulator::{simulate, sv_simulate, Backend};

/// Environment variable overriding the master seed.
pub const SEED_ENV: &str = "GROVER_SEED";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLE_CAP: usize = 1024;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACES_FILE: &str = "traces.jsonl";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset item {id}: {message}")]
    Item { id: String, message: String },
}

impl BenchError {
    pub fn is_input_error(&self) -> bool {
        !matches!(self, BenchError::Item { .. })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analyzer,
    Sv,
    Unitary,
    Dm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Analyzer, Method::Sv, Method::Unitary, Method::Dm];

    fn backend(self) -> Option<Backend> {
        match self {
            Method::Analyzer => None,
            Method::Sv => Some(Backend::Sv),
            Method::Unitary => Some(Backend::Unitary),
            Method::Dm => Some(Backend::Dm),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.backend() {
            None => f.write_str("analyzer"),
            Some(b) => b.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analyzer" => Ok(Method::Analyzer),
            other => other.parse::<Backend>().map(|b| match b {
                Backend::Sv => Method::Sv,
                Backend::Unitary => Method::Unitary,
                Backend::Dm => Method::Dm,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub t_max: usize,
    /// Explicit marked-set sizes; replaces `1..=min(t_max, n)`.
    pub t_values: Option<Vec<usize>>,
    /// Samples per (n, t); default `max(100, 2^n)`. Always capped by
    /// `sample_cap` and by the number of distinct marked sets.
    pub samples: Option<usize>,
    pub sample_cap: usize,
    pub seed: u64,
    pub mode: Mode,
    pub methods: Vec<Method>,
    pub tau: f64,
    pub evaluate: bool,
    pub timing: bool,
    /// Timed runs per (method, n) after one discarded warm-up.
    pub repeats: usize,
    /// Back-to-back executions inside one timed run; the run's duration is
    /// their mean. Raises resolution for sub-millisecond methods.
    pub inner_iterations: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_max: 5,
            t_max: 3,
            t_values: None,
            samples: None,
            sample_cap: DEFAULT_SAMPLE_CAP,
            seed: DEFAULT_SEED,
            mode: Mode::Full,
            methods: vec![Method::Analyzer],
            tau: DEFAULT_TAU,
            evaluate: true,
            timing: false,
            repeats: 3,
            inner_iterations: 1,
        }
    }
}

/// Reads [`SEED_ENV`], falling back to `default`.
pub fn seed_from_env(default: u64) -> Result<u64, BenchError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            BenchError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(default),
        Err(e) => Err(BenchError::Config(format!("{SEED_ENV}: {e}"))),
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        Self::from_json(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    /// Replaces the seed with [`SEED_ENV`] when set.
    pub fn with_env_seed(mut self) -> Result<Self, BenchError> {
        self.seed = seed_from_env(self.seed)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n_min < 2 || self.n_min > self.n_max {
            return Err(BenchError::Config(format!(
                "need 2 <= n_min <= n_max, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > 30 {
            return Err(BenchError::Config("n_max above 30 is not supported".into()));
        }
        if self.repeats == 0 || self.inner_iterations == 0 {
            return Err(BenchError::Config(
                "repeats and inner_iterations must be >= 1".into(),
            ));
        }
        if self.sample_cap == 0 || self.samples == Some(0) {
            return Err(BenchError::Config("sample counts must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(BenchError::Config(format!(
                "tau {} outside [0, 1]",
                self.tau
            )));
        }
        if self.t_values.is_none() && self.t_max == 0 {
            return Err(BenchError::Config("t_max must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }

    /// Marked-set sizes used at `n`.
    pub fn t_for(&self, n: usize) -> Result<Vec<usize>, BenchError> {
        match &self.t_values {
            Some(ts) => {
                if let Some(&t) = ts.iter().find(|&&t| t == 0 || t > n) {
                    return Err(BenchError::Sampling(format!(
                        "t={t} is outside 1..={n} for n={n}"
                    )));
                }
                Ok(ts.clone())
            }
            None => Ok((1..=self.t_max.min(n)).collect()),
        }
    }

    /// Sample count at `(n, t)` after both caps.
    pub fn samples_for(&self, n: usize, t: usize) -> usize {
        let wanted = self
            .samples
            .unwrap_or_else(|| 100usize.max(1usize << n))
            .min(self.sample_cap);
        (wanted as u128).min(subset_count(n, t)) as usize
    }
}

/// Sub-seed for one `(n, t)` configuration (splitmix64 finalizer).
pub fn config_seed(seed: u64, n: usize, t: usize) -> u64 {
    let mut z = seed ^ ((n as u64) << 32 | t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub n: usize,
    pub t: usize,
    pub marked: Vec<Bitstring>,
    pub k: usize,
    pub distribution: Distribution<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub id: String,
    pub spec: GroverSpec,
    pub mode: Mode,
    pub qasm: String,
    pub label: Label,
    pub trace_text: String,
    pub results: Distribution<f64>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    qasm: &'a str,
    mode: Mode,
    trace_text: &'a str,
    results: &'a Distribution<f64>,
}

/// Builds one item: QASM in the configured mode, simulator label of the
/// full circuit, analyzer trace.
pub fn build_item(id: String, spec: GroverSpec, mode: Mode) -> Result<DatasetItem, BenchError> {
    let item_err = |message: String| BenchError::Item {
        id: id.clone(),
        message,
    };
    let program = build_grover(&spec, mode).map_err(|e| item_err(e.to_string()))?;
    let qasm = print_program(&program);
    let full = match mode {
        Mode::Full => program,
        Mode::OracleOnly => build_grover(&spec, Mode::Full).map_err(|e| item_err(e.to_string()))?,
    };
    let (_, distribution) = sv_simulate::<f64>(&full).map_err(|e| item_err(e.to_string()))?;
    let trace = analyze_text(&qasm, mode).map_err(|e| item_err(e.to_string()))?;
    Ok(DatasetItem {
        label: Label {
            n: spec.n,
            t: spec.t(),
            marked: spec.marked.clone(),
            k: spec.k,
            distribution,
        },
        trace_text: render_trace(&trace),
        results: trace.results,
        id,
        spec,
        mode,
        qasm,
    })
}

/// Samples every configuration and builds its items, in parallel but in a
/// fixed order.
pub fn build_dataset(config: &BenchConfig) -> Result<Vec<DatasetItem>, BenchError> {
    config.validate()?;
    let mut jobs = Vec::new();
    for n in config.n_range() {
        for t in config.t_for(n)? {
            let count = config.samples_for(n, t);
            let specs = sample_specs_capped(n, t, count, config_seed(config.seed, n, t), n)
                .map_err(|e| BenchError::Sampling(e.to_string()))?;
            jobs.extend(
                specs
                    .into_iter()
                    .enumerate()
                    .map(|(i, spec)| (format!("n{n:02}_t{t}_{i:04}"), spec)),
            );
        }
    }
    jobs.into_par_iter()
        .map(|(id, spec)| build_item(id, spec, config.mode))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config: BenchConfig,
    pub items: usize,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_artifact(root: &Path, rel: &str, bytes: &[u8]) -> Result<Artifact, BenchError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(Artifact {
        path: rel.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len(),
    })
}

/// Writes QASM files, labels, the trace JSONL and `manifest.json`.
pub fn write_dataset(
    config: &BenchConfig,
    items: &[DatasetItem],
    out: &Path,
) -> Result<Manifest, BenchError> {
    let mut artifacts = Vec::with_capacity(2 * items.len() + 1);
    let mut jsonl = Vec::new();
    for item in items {
        artifacts.push(write_artifact(
            out,
            &format!("circuits/{}.qasm", item.id),
            item.qasm.as_bytes(),
        )?);
        let mut label = serde_json::to_vec_pretty(&item.label)?;
        label.push(b'\n');
        artifacts.push(write_artifact(
            out,
            &format!("labels/{}.json", item.id),
            &label,
        )?);
        serde_json::to_writer(
            &mut jsonl,
            &TraceLine {
                qasm: &item.qasm,
                mode: item.mode,
                trace_text: &item.trace_text,
                results: &item.results,
            },
        )?;
        jsonl.push(b'\n');
    }
    artifacts.push(write_artifact(out, TRACES_FILE, &jsonl)?);
    let manifest = Manifest {
        seed: config.seed,
        config: config.clone(),
        items: items.len(),
        artifacts,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let path = out.join(MANIFEST_FILE);
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(manifest)
}

pub fn generate_dataset(config: &BenchConfig, out: &Path) -> Result<Manifest, BenchError> {
    let items = build_dataset(config)?;
    write_dataset(config, &items, out)
}

/// A sample the method could not score, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub method: Method,
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub method: Method,
    pub reports: Vec<MetricReport<f64>>,
    pub failures: Vec<SampleFailure>,
}

fn score_item(method: Method, item: &DatasetItem, tau: f64) -> Result<(f64, f64), String> {
    let label = &item.label;
    let (sa_input, cf_input) = match method.backend() {
        None => {
            let trace = analyze_text(&item.qasm, item.mode).map_err(|e| e.to_string())?;
            let analytic = trace
                .analytic::<f64>()
                .map_err(|e| format!("analytic stage: {e}"))?;
            (trace.results, analytic)
        }
        Some(backend) => {
            let program = match item.mode {
                Mode::Full => parse_program(&item.qasm).map_err(|e| format!("parse stage: {e}"))?,
                Mode::OracleOnly => {
                    build_grover(&item.spec, Mode::Full).map_err(|e| e.to_string())?
                }
            };
            let dist =
                simulate::<f64>(&program, backend).map_err(|e| format!("simulate stage: {e}"))?;
            (dist.clone(), dist)
        }
    };
    let sa = search_accuracy(&sa_input, &label.marked, tau).map_err(|e| e.to_string())?;
    let cf = classical_fidelity(&cf_input, &label.distribution).map_err(|e| e.to_string())?;
    Ok((sa, cf))
}

/// Scores every item with `method`. SA uses the labeled marked set, CF the
/// labeled distribution; failures are recorded and excluded.
pub fn evaluate_method(method: Method, items: &[DatasetItem], tau: f64) -> Evaluation {
    let outcomes: Vec<(SampleScore<f64>, Option<SampleFailure>)> = items
        .par_iter()
        .map(|item| {
            let label = &item.label;
            let degenerate = is_degenerate(label.n, label.t, label.k, tau);
            let (scores, failure) = match score_item(method, item, tau) {
                Ok(s) => (Some(s), None),
                Err(message) => (
                    None,
                    Some(SampleFailure {
                        method,
                        id: item.id.clone(),
                        message,
                    }),
                ),
            };
            (
                SampleScore {
                    n: label.n,
                    t: label.t,
                    scores,
                    degenerate,
                },
                failure,
            )
        })
        .collect();
    let (samples, failures): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Evaluation {
        method,
        reports: aggregate(&samples),
        failures: failures.into_iter().flatten().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub method: Method,
    pub n: usize,
    pub durations: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// `mean(n) / mean(baseline)`; the baseline is n = 2 when measured,
    /// otherwise the smallest measured n.
    pub relative: f64,
}

/// Input text timed for `method` at `n`: one seeded `t = 1` circuit, in the
/// configured mode for the analyzer and in full mode for simulators.
pub fn timing_input(config: &BenchConfig, method: Method, n: usize) -> Result<String, BenchError> {
    let spec = sample_specs_capped(n, 1, 1, config_seed(config.seed, n, 1), n)
        .map_err(|e| BenchError::Sampling(e.to_string()))?
        .remove(0);
    let mode = match method {
        Method::Analyzer => config.mode,
        _ => Mode::Full,
    };
    let program = build_grover(&spec, mode).map_err(|e| BenchError::Sampling(e.to_string()))?;
    Ok(print_program(&program))
}

/// End-to-end run: text in, distribution out.
pub fn run_method(method: Method, text: &str, mode: Mode) -> Result<Distribution<f64>, String> {
    match method.backend() {
        None => analyze_text(text, mode)
            .map(|t| t.results)
            .map_err(|e| e.to_string()),
        Some(backend) => {
            let program = parse_program(text).map_err(|e| e.to_string())?;
            simulate(&program, backend).map_err(|e| e.to_string())
        }
    }
}

/// Serial wall-clock timing. Sizes a method cannot run (for example above a
/// simulator's size limit) produce no record.
pub fn time_methods(config: &BenchConfig) -> Result<Vec<TimingRecord>, BenchError> {
    config.validate()?;
    let mut records = Vec::new();
    for &method in &config.methods {
        let mode = if method == Method::Analyzer {
            config.mode
        } else {
            Mode::Full
        };
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for n in config.n_range() {
            let text = timing_input(config, method, n)?;
            if run_method(method, &text, mode).is_err() {
                continue;
            }
            let mut durations = Vec::with_capacity(config.repeats);
            for _ in 0..config.repeats {
                let start = Instant::now();
                for _ in 0..config.inner_iterations {
                    std::hint::black_box(
                        run_method(method, std::hint::black_box(&text), mode).ok(),
                    );
                }
                let secs = start.elapsed().as_secs_f64() / config.inner_iterations as f64;
                durations.push(secs.max(1e-9));
            }
            rows.push((n, durations));
        }
        let baseline = rows
            .iter()
            .find(|(n, _)| *n == 2)
            .or(rows.first())
            .and_then(|(_, d)| mean_std(d))
            .map(|(m, _)| m);
        for (n, durations) in rows {
            let (mean, std) = mean_std(&durations).expect("repeats >= 1");
            records.push(TimingRecord {
                method,
                n,
                relative: baseline.map_or(f64::NAN, |b| mean / b),
                durations,
                mean,
                std,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BenchReport {
    pub evaluations: Vec<Evaluation>,
    pub timings: Vec<TimingRecord>,
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let mut report = BenchReport::default();
    if config.evaluate {
        let items = build_dataset(config)?;
        report.evaluations = config
            .methods
            .iter()
            .map(|&m| evaluate_method(m, &items, config.tau))
            .collect();
    }
    if config.timing {
        report.timings = time_methods(config)?;
    }
    Ok(report)
}

/// One CSV row: a metric aggregate or a timing record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: String,
    pub method: Method,
    pub n: usize,
    pub t: Option<usize>,
    pub sa_mean: Option<f64>,
    pub sa_std: Option<f64>,
    pub cf_mean: Option<f64>,
    pub cf_std: Option<f64>,
    pub count: Option<usize>,
    pub excluded: Option<usize>,
    pub degenerate: Option<bool>,
    pub time_mean: Option<f64>,
    pub time_std: Option<f64>,
    pub relative: Option<f64>,
}

const CSV_HEADER: [&str; 14] = [
    "kind",
    "method",
    "n",
    "t",
    "sa_mean",
    "sa_std",
    "cf_mean",
    "cf_std",
    "count",
    "excluded",
    "degenerate",
    "time_mean",
    "time_std",
    "relative",
];

impl BenchReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for ev in &self.evaluations {
            for r in &ev.reports {
                rows.push(ReportRow {
                    kind: "metrics".into(),
                    method: ev.method,
                    n: r.n,
                    t: r.t,
                    sa_mean: Some(r.sa_mean),
                    sa_std: Some(r.sa_std),
                    cf_mean: Some(r.cf_mean),
                    cf_std: Some(r.cf_std),
                    count: Some(r.count),
                    excluded: Some(r.excluded),
                    degenerate: Some(r.degenerate),
                    time_mean: None,
                    time_std: None,
                    relative: None,
                });
            }
        }
        for tr in &self.timings {
            rows.push(ReportRow {
                kind: "timing".into(),
                method: tr.method,
                n: tr.n,
                t: None,
                sa_mean: None,
                sa_std: None,
                cf_mean: None,
                cf_std: None,
                count: Some(tr.durations.len()),
                excluded: None,
                degenerate: None,
                time_mean: Some(tr.mean),
                time_std: Some(tr.std),
                relative: Some(tr.relative),
            });
        }
        rows
    }
}

/// CSV with a fixed header, one row per metric aggregate or timing record.
pub fn write_report_csv<W: std::io::Write>(
    report: &BenchReport,
    writer: W,
) -> Result<(), BenchError> {
    let mut csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    csv.write_record(CSV_HEADER)?;
    for row in report.rows() {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| BenchError::Csv(e.into()))?;
    Ok(())
}

pub fn read_report_csv<R: std::io::Read>(reader: R) -> Result<Vec<ReportRow>, BenchError> {
    let mut csv = csv::Reader::from_reader(reader);
    Ok(csv.deserialize().collect::<Result<Vec<ReportRow>, _>>()?)
}

/// Writes `<csv>` and, when given, the JSON rendering.
pub fn emit_report(
    report: &BenchReport,
    csv_path: &Path,
    json_path: Option<&Path>,
) -> Result<(), BenchError> {
    let mut buf = Vec::new();
    write_report_csv(report, &mut buf)?;
    fs::write(csv_path, buf).map_err(io_err(csv_path))?;
    if let Some(path) = json_path {
        let mut file = fs::File::create(path).map_err(io_err(path))?;
        serde_json::to_writer_pretty(&mut file, report)?;
        writeln!(file).map_err(io_err(path))?;
    }
    Ok(())
}

pub fn load_report(path: &Path) -> Result<BenchReport, BenchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Labels indexed by item id, read back from a written dataset.
pub fn load_labels(dir: &Path) -> Result<BTreeMap<String, Label>, BenchError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?)?;
    let mut labels = BTreeMap::new();
    for art in manifest
        .artifacts
        .iter()
        .filter(|a| a.path.starts_with("labels/"))
    {
        let path = dir.join(&art.path);
        let label: Label =
            serde_json::from_str(&fs::read_to_string(&path).map_err(io_err(&path))?)?;
        let id = art
            .path
            .trim_start_matches("labels/")
            .trim_end_matches(".json")
            .to_string();
        labels.insert(id, label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig {
            n_min: 2,
            n_max: 3,
            t_max: 2,
            samples: Some(4),
            ..BenchConfig::default()
        }
    }

    #[test]
    fn defaults_and_json() {
        let c = BenchConfig::from_json("{}").unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.t_max, 3);
        assert_eq!(c.repeats, 3);
        assert!(BenchConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(BenchConfig::from_json(r#"{"n_min": 5, "n_max": 3}"#).is_err());
        let c =
            BenchConfig::from_json(r#"{"mode": "oracle_only", "methods": ["sv", "dm"]}"#).unwrap();
        assert_eq!(c.mode, Mode::OracleOnly);
        assert_eq!(c.methods, vec![Method::Sv, Method::Dm]);
    }

    #[test]
    fn sample_counts() {
        let c = BenchConfig::default();
        assert_eq!(c.samples_for(2, 1), 4);
        assert_eq!(c.samples_for(5, 1), 32);
        assert_eq!(c.samples_for(7, 2), 128);
        assert_eq!(c.samples_for(12, 1), 1024);
        assert_eq!(c.samples_for(6, 3), 100);
    }

    #[test]
    fn t_selection() {
        let c = BenchConfig::default();
        assert_eq!(c.t_for(2).unwrap(), vec![1, 2]);
        assert_eq!(c.t_for(5).unwrap(), vec![1, 2, 3]);
        let c = BenchConfig {
            t_values: Some(vec![3]),
            ..BenchConfig::default()
        };
        assert!(matches!(c.t_for(2), Err(BenchError::Sampling(_))));
    }

    #[test]
    fn config_seeds_differ() {
        assert_ne!(config_seed(42, 2, 1), config_seed(42, 2, 2));
        assert_ne!(config_seed(42, 2, 1), config_seed(42, 3, 1));
        assert_eq!(config_seed(42, 4, 2), config_seed(42, 4, 2));
    }

    #[test]
    fn dataset_labels_match_traces() {
        let items = build_dataset(&small()).unwrap();
        // n=2: t=1 (4), t=2 (4); n=3: t=1 (4), t=2 (4)
        assert_eq!(items.len(), 16);
        for item in &items {
            let sum = item.label.distribution.total();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(item.trace_text.starts_with("=== Analysis ==="));
        }
    }

    #[test]
    fn sv_scores_itself_perfectly() {
        let items = build_dataset(&small()).unwrap();
        let ev = evaluate_method(Method::Sv, &items, DEFAULT_TAU);
        assert!(ev.failures.is_empty());
        for r in ev.reports.iter().filter(|r| !r.degenerate) {
            assert_eq!(r.sa_mean, 1.0, "{r:?}");
            assert!((r.cf_mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn size_limit_failures_are_recorded() {
        let config = BenchConfig {
            n_min: 11,
            n_max: 11,
            t_max: 1,
            samples: Some(1),
            ..BenchConfig::default()
        };
        let items = build_dataset(&config).unwrap();
        let ev = evaluate_method(Method::Dm, &items, DEFAULT_TAU);
        assert_eq!(ev.failures.len(), 1);
        assert!(ev.failures[0].message.contains("simulate stage"));
        let row = ev.reports.iter().find(|r| r.t == Some(1)).unwrap();
        assert_eq!((row.count, row.excluded), (0, 1));
    }

    #[test]
    fn empty_report_csv_is_header_only() {
        let mut buf = Vec::new();
        write_report_csv(&BenchReport::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", CSV_HEADER.join(","))
        );
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.to_string().parse::<Method>(), Ok(m));
        }
        assert!("gpu".parse::<Method>().is_err());
    }
}
