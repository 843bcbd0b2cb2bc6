//! Batch commands behind the `acx` binary.
//!
//! Every command writes into one output directory and leaves a
//! `manifest.json` there describing the run. Outputs depend only on the
//! manifest (and the input files), never on time or the environment.

mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::accuracy::{read_input, win_counts, Input, ScoreMatrix, TiePolicy, WinCounts};
use crate::error::{Error, Result};
use crate::estimators::{
    curve_csv, extrapolate_all, ConsConfig, EstimateStatus, Estimator, EstimatorReport, ExtrapolationConfig, HdConfig,
    KappaGrid,
};
use crate::simlab::{read_records_csv, records_csv, run_replication, ReplicationConfig, ReplicationRecord};

pub use plot::curves_svg;

/// Exit status for input, configuration and I/O errors.
pub const EXIT_INPUT: i32 = 1;
/// Exit status when at least one estimator failed (its report is still
/// written).
pub const EXIT_ESTIMATOR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Extrapolate,
    Simulate,
    Report,
}

/// Everything a command needs. Unset options fall back to library defaults
/// (or, for `simulate`, to the base configuration file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// Base replication configuration (JSON) for `simulate`.
    pub config: Option<PathBuf>,
    pub estimators: Option<Vec<Estimator>>,
    /// `extrapolate`: use only the first `k` classes of a score matrix.
    /// `simulate`: the list of training class counts.
    pub k: Vec<usize>,
    #[serde(rename = "target_K")]
    pub target_k: Option<usize>,
    pub grid_size: Option<usize>,
    pub kappa: Option<KappaGrid>,
    pub tie_policy: Option<TiePolicy>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    /// `simulate`: also write the win counts of every replicate.
    pub dump_wins: bool,
    pub out: PathBuf,
}

impl RunManifest {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            config: None,
            estimators: None,
            k: Vec::new(),
            target_k: None,
            grid_size: None,
            kappa: None,
            tie_policy: None,
            seed: None,
            replicates: None,
            dump_wins: false,
            out: out.into(),
        }
    }

    /// Checks the manifest for problems visible without running anything.
    /// All problems are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        match self.command {
            Command::Extrapolate => {
                if self.inputs.len() != 1 {
                    errs.push(format!("extrapolate takes exactly one input, got {}", self.inputs.len()));
                }
                if self.k.len() > 1 {
                    errs.push("extrapolate takes a single --k".into());
                }
                if let (Some(&k), Some(big)) = (self.k.first(), self.target_k) {
                    if big < k {
                        errs.push(format!("target K = {big} is below k = {k}"));
                    }
                }
            }
            Command::Simulate => {
                if let Some(c) = &self.config {
                    if !c.is_file() {
                        errs.push(format!("config file {} does not exist", c.display()));
                    }
                }
            }
            Command::Report => {
                if self.inputs.is_empty() {
                    errs.push("report needs at least one replication CSV".into());
                }
            }
        }
        for p in &self.inputs {
            if !p.is_file() {
                errs.push(format!("input {} does not exist", p.display()));
            }
        }
        if let Some(g) = self.grid_size {
            if g < 16 {
                errs.push(format!("grid size must be at least 16, got {g}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn cons(&self, base: ConsConfig) -> ConsConfig {
        ConsConfig { grid_size: self.grid_size.unwrap_or(base.grid_size), ..base }
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub files: Vec<PathBuf>,
    /// Human-readable summary lines.
    pub messages: Vec<String>,
}

/// Runs the command named in the manifest.
pub fn run(m: &RunManifest) -> Result<Outcome> {
    match m.command {
        Command::Extrapolate => cmd_extrapolate(m),
        Command::Simulate => cmd_simulate(m),
        Command::Report => cmd_report(m),
    }
}

/// Process exit status for a command result.
pub fn exit_code(r: &Result<Outcome>) -> i32 {
    match r {
        Ok(o) => o.code,
        Err(_) => EXIT_INPUT,
    }
}

fn prepare_out(m: &RunManifest) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&m.out)?;
    let path = m.out.join("manifest.json");
    write_json(&path, m)?;
    Ok(vec![path])
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Keeps the first `k` classes: their columns, and the rows labelled with
/// them.
fn restrict(s: &ScoreMatrix, k: usize) -> Result<ScoreMatrix> {
    if k > s.k() {
        return Err(Error::invalid(format!("--k {k} exceeds the {} classes in the score matrix", s.k())));
    }
    let (rows, labels): (Vec<Vec<f64>>, Vec<usize>) =
        s.rows().filter(|(l, _)| *l <= k).map(|(l, row)| (row[..k].to_vec(), l)).unzip();
    ScoreMatrix::new(rows, labels)
}

fn load_wins(m: &RunManifest, tie_policy: TiePolicy) -> Result<WinCounts> {
    let k = m.k.first().copied();
    match read_input(&m.inputs[0])? {
        Input::Scores(s) => {
            let s = match k {
                Some(k) if k != s.k() => restrict(&s, k)?,
                _ => s,
            };
            win_counts(&s, tie_policy)
        }
        Input::Wins(w) => match k {
            Some(k) if k != w.k() => Err(Error::invalid(format!(
                "--k {k} does not match the k = {} recorded in {}",
                w.k(),
                m.inputs[0].display()
            ))),
            _ => Ok(w),
        },
    }
}

/// Runs the estimators on one score matrix or win-count file and writes
/// `report.json` and `curve.csv` (t = 2..=K).
pub fn cmd_extrapolate(m: &RunManifest) -> Result<Outcome> {
    m.validate()?;
    let w = load_wins(m, m.tie_policy.unwrap_or_default())?;
    let k = w.k();
    let big_k = m.target_k.unwrap_or(k);
    if big_k < k {
        return Err(Error::invalid(format!("target K = {big_k} is below k = {k}")));
    }
    let cfg = ExtrapolationConfig {
        estimators: m.estimators.clone().unwrap_or_else(|| Estimator::ALL.to_vec()),
        targets: (2..=big_k).collect(),
        kappa: m.kappa.unwrap_or_default(),
        cons: m.cons(ConsConfig::default()),
        hd: HdConfig::default(),
    };
    cfg.cons.validate()?;
    let reports = extrapolate_all(&w, &cfg)?;

    let mut files = prepare_out(m)?;
    let report_path = m.out.join("report.json");
    write_json(&report_path, &reports)?;
    let curve_path = m.out.join("curve.csv");
    std::fs::write(&curve_path, curve_csv(&reports)?)?;
    files.extend([report_path, curve_path]);

    let mut messages = vec![format!("k = {k}, {} test points, target K = {big_k}", w.total())];
    messages.extend(reports.iter().map(|r| summary_line(r, big_k)));
    let failed = reports.iter().any(|r| r.status == EstimateStatus::Failed);
    Ok(Outcome { code: if failed { EXIT_ESTIMATOR } else { 0 }, files, messages })
}

fn summary_line(r: &EstimatorReport, big_k: usize) -> String {
    match (r.status, r.get(big_k)) {
        (EstimateStatus::Failed, _) => {
            format!("{:>4}: failed ({})", r.estimator.name(), r.diagnostics.warnings.join("; "))
        }
        (_, Some(p)) => format!("{:>4}: p_{big_k} = {p:.6}", r.estimator.name()),
        (_, None) => format!("{:>4}: no estimate at {big_k}", r.estimator.name()),
    }
}

/// Builds the replication configuration from the base file (if any) and the
/// manifest overrides.
pub fn simulation_config(m: &RunManifest) -> Result<ReplicationConfig> {
    let mut cfg = match &m.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => ReplicationConfig::default(),
    };
    if !m.k.is_empty() {
        cfg.k_list = m.k.clone();
    }
    if let Some(big) = m.target_k {
        cfg.meta.big_k = big;
    }
    if let Some(seed) = m.seed {
        cfg.meta.seed = seed;
    }
    if let Some(est) = &m.estimators {
        cfg.estimators = est.clone();
    }
    if let Some(kappa) = m.kappa {
        cfg.kappa = kappa;
    }
    if let Some(tp) = m.tie_policy {
        cfg.tie_policy = tp;
    }
    if let Some(n) = m.replicates {
        cfg.replicates = n;
    }
    cfg.cons = m.cons(cfg.cons);
    Ok(cfg)
}

/// Runs a replication study and writes `replication.csv`, the configuration
/// sidecar `replication.json` and, if asked, `wins/*.csv`.
pub fn cmd_simulate(m: &RunManifest) -> Result<Outcome> {
    m.validate()?;
    let cfg = simulation_config(m)?;
    cfg.validate()?;
    let run = run_replication(&cfg, m.dump_wins)?;

    let mut files = prepare_out(m)?;
    let csv_path = m.out.join("replication.csv");
    std::fs::write(&csv_path, records_csv(&run.records)?)?;
    let json_path = m.out.join("replication.json");
    write_json(&json_path, &cfg)?;
    files.extend([csv_path, json_path]);
    if m.dump_wins {
        let dir = m.out.join("wins");
        std::fs::create_dir_all(&dir)?;
        for d in &run.win_counts {
            let path = dir.join(format!("rep{:03}_{}_k{}.csv", d.replicate, file_safe(&d.classifier), d.k));
            let mut buf = Vec::new();
            crate::accuracy::write_win_counts(&mut buf, &d.counts)?;
            std::fs::write(&path, buf)?;
            files.push(path);
        }
    }
    let failed = run.records.iter().filter(|r| r.status == "failed").count();
    let messages = vec![
        format!(
            "{} replicates, {} classifier(s), k in {:?}, K = {}: {} records",
            cfg.replicates,
            cfg.classifiers.len(),
            cfg.k_list,
            cfg.meta.big_k,
            run.records.len()
        ),
        format!("{failed} estimator failure(s) recorded"),
    ];
    Ok(Outcome { code: 0, files, messages })
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

/// Mean absolute extrapolation error of one (classifier, estimator, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub classifier: String,
    pub estimator: String,
    pub k: usize,
    #[serde(rename = "K")]
    pub big_k: usize,
    pub n: usize,
    pub failed: usize,
    pub mean_p_hat: Option<f64>,
    pub mean_truth: f64,
    pub mae: Option<f64>,
}

/// Groups records by classifier, estimator and k (in that order).
pub fn summarize(records: &[ReplicationRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(String, String, usize, usize), Vec<&ReplicationRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.classifier.clone(), r.estimator.clone(), r.k, r.big_k)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((classifier, estimator, k, big_k), rs)| {
            let ok: Vec<(f64, f64)> = rs.iter().filter_map(|r| r.p_hat.map(|p| (p, r.truth))).collect();
            let n = ok.len();
            let mean = |f: &dyn Fn(&(f64, f64)) -> f64| (n > 0).then(|| ok.iter().map(f).sum::<f64>() / n as f64);
            SummaryRow {
                classifier,
                estimator,
                k,
                big_k,
                n,
                failed: rs.iter().filter(|r| r.status == "failed").count(),
                mean_p_hat: mean(&|x| x.0),
                mean_truth: rs.iter().map(|r| r.truth).sum::<f64>() / rs.len() as f64,
                mae: mean(&|x| (x.0 - x.1).abs()),
            }
        })
        .collect()
}

/// Reads replication CSVs and writes `curves.svg` (one panel per
/// classifier) and `summary.csv`.
pub fn cmd_report(m: &RunManifest) -> Result<Outcome> {
    m.validate()?;
    let mut records = Vec::new();
    for p in &m.inputs {
        records.extend(read_records_csv(p)?);
    }
    if records.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let rows = summarize(&records);

    let mut files = prepare_out(m)?;
    let svg_path = m.out.join("curves.svg");
    std::fs::write(&svg_path, curves_svg(&rows))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let summary_path = m.out.join("summary.csv");
    std::fs::write(&summary_path, w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    files.extend([svg_path, summary_path]);

    let mut messages = vec![format!("{:<16} {:<6} {:>4} {:>4} {:>10}", "classifier", "est", "k", "n", "MAE")];
    for r in &rows {
        let mae = r.mae.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        messages.push(format!("{:<16} {:<6} {:>4} {:>4} {:>10}", r.classifier, r.estimator, r.k, r.n, mae));
    }
    Ok(Outcome { code: 0, files, messages })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(classifier: &str, estimator: &str, k: usize, p: Option<f64>, truth: f64) -> ReplicationRecord {
        ReplicationRecord {
            replicate: 0,
            classifier: classifier.into(),
            k,
            big_k: 10,
            estimator: estimator.into(),
            p_hat: p,
            truth,
            error: p.map(|v| v - truth),
            status: if p.is_some() { "ok" } else { "failed" }.into(),
        }
    }

    #[test]
    fn summary_means_skip_failures() {
        let rows = summarize(&[
            rec("qda", "hd", 3, Some(0.5), 0.4),
            rec("qda", "hd", 3, Some(0.2), 0.4),
            rec("qda", "hd", 3, None, 0.4),
        ]);
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!((r.n, r.failed), (2, 1));
        assert!((r.mae.unwrap() - 0.15).abs() < 1e-12);
        assert!((r.mean_p_hat.unwrap() - 0.35).abs() < 1e-12);
    }

    #[test]
    fn restrict_keeps_leading_classes() {
        let s = ScoreMatrix::new(
            vec![vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1, 2, 3],
        )
        .unwrap();
        let r = restrict(&s, 2).unwrap();
        assert_eq!((r.k(), r.n_test()), (2, 2));
        assert_eq!(r.row(0), &[1.0, 0.0]);
        assert!(restrict(&s, 4).is_err());
    }

    #[test]
    fn manifest_lists_every_problem() {
        let mut m = RunManifest::new(Command::Extrapolate, "out");
        m.k = vec![5, 6];
        m.grid_size = Some(4);
        match m.validate() {
            Err(Error::Config(e)) => assert_eq!(e.len(), 3, "{e:?}"),
            other => panic!("{other:?}"),
        }
    }
}
