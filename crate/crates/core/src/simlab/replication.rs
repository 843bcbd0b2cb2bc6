use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classifiers::{fit_all, score_matrix_with};
use super::config::{ClassifierSpec, MetaConfig};
use super::ensemble::sample_ensemble;
use super::{child_seed, par_map};
use crate::accuracy::{empirical_accuracy, win_counts, TiePolicy, WinCounts};
use crate::error::{Error, Result};
use crate::estimators::{
    extrapolate_all, ConsConfig, EstimateStatus, Estimator, ExtrapolationConfig, HdConfig, KappaGrid,
};

/// Estimator label for the observed `k`-class accuracy used as a prediction.
pub const BENCHMARK: &str = "bench";

/// One simulation study: for every replicate a fresh ensemble of `K`
/// classes; for every classifier and every `k` in `k_list`, the estimators
/// see classes `1..=k` and predict the accuracy on all `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplicationConfig {
    pub meta: MetaConfig,
    pub classifiers: Vec<ClassifierSpec>,
    pub estimators: Vec<Estimator>,
    pub k_list: Vec<usize>,
    pub replicates: usize,
    pub tie_policy: TiePolicy,
    pub kappa: KappaGrid,
    pub cons: ConsConfig,
    pub hd: HdConfig,
}

impl Default for ReplicationConfig {
    fn default() -> Self {
        Self {
            meta: MetaConfig::default(),
            classifiers: vec![ClassifierSpec::qda()],
            estimators: vec![Estimator::Exp, Estimator::Cons, Estimator::Hd],
            k_list: vec![10],
            replicates: 20,
            tie_policy: TiePolicy::Strict,
            kappa: KappaGrid::default(),
            cons: ConsConfig::default(),
            hd: HdConfig::default(),
        }
    }
}

impl ReplicationConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = match self.meta.validate() {
            Err(Error::Config(e)) => e,
            Err(e) => vec![e.to_string()],
            Ok(()) => Vec::new(),
        };
        if self.classifiers.is_empty() {
            errs.push("at least one classifier is required".into());
        }
        for c in &self.classifiers {
            if let Err(e) = c.validate() {
                errs.push(e.to_string());
            }
        }
        if self.estimators.is_empty() {
            errs.push("at least one estimator is required".into());
        }
        if self.k_list.is_empty() {
            errs.push("k_list is empty".into());
        }
        for &k in &self.k_list {
            if k < 2 || k > self.meta.big_k {
                errs.push(format!("k = {k} outside 2..={}", self.meta.big_k));
            }
        }
        if self.replicates < 1 {
            errs.push("replicates must be at least 1".into());
        }
        if let Err(e) = self.cons.validate() {
            errs.push(e.to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replicate: usize,
    pub classifier: String,
    pub k: usize,
    #[serde(rename = "K")]
    pub big_k: usize,
    pub estimator: String,
    pub p_hat: Option<f64>,
    /// Accuracy measured on all `K` classes of the replicate.
    pub truth: f64,
    /// `p_hat - truth`.
    pub error: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinCountDump {
    pub replicate: usize,
    pub classifier: String,
    pub k: usize,
    pub counts: WinCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRun {
    pub records: Vec<ReplicationRecord>,
    /// Present only when requested.
    pub win_counts: Vec<WinCountDump>,
}

/// Runs every replicate (in parallel) and returns the records in
/// `(replicate, classifier, k, estimator)` order.
pub fn run_replication(cfg: &ReplicationConfig, keep_win_counts: bool) -> Result<ReplicationRun> {
    cfg.validate()?;
    let big_k = cfg.meta.big_k;
    let per_rep = par_map((0..cfg.replicates).collect(), |rep| -> Result<(Vec<ReplicationRecord>, Vec<WinCountDump>)> {
        let meta = MetaConfig { seed: child_seed(cfg.meta.seed, rep as u64), ..cfg.meta.clone() };
        let ens = sample_ensemble(&meta);
        let mut records = Vec::new();
        let mut dumps = Vec::new();
        for spec in &cfg.classifiers {
            let name = spec.to_string();
            let models = fit_all(&ens, spec)?;
            let all: Vec<usize> = (0..big_k).collect();
            let truth = empirical_accuracy(&score_matrix_with(&ens, &models, &all)?, cfg.tie_policy)?;
            for &k in &cfg.k_list {
                let subset: Vec<usize> = (0..k).collect();
                let s = score_matrix_with(&ens, &models[..k], &subset)?;
                let bench = empirical_accuracy(&s, cfg.tie_policy)?;
                let w = win_counts(&s, cfg.tie_policy)?;
                let ecfg = ExtrapolationConfig {
                    estimators: cfg.estimators.clone(),
                    targets: vec![big_k],
                    kappa: cfg.kappa,
                    cons: cfg.cons,
                    hd: cfg.hd,
                };
                let record = |estimator: String, p_hat: Option<f64>, status: &str| ReplicationRecord {
                    replicate: rep,
                    classifier: name.clone(),
                    k,
                    big_k,
                    estimator,
                    p_hat,
                    truth,
                    error: p_hat.map(|p| p - truth),
                    status: status.to_string(),
                };
                records.push(record(BENCHMARK.to_string(), Some(bench), "ok"));
                for r in extrapolate_all(&w, &ecfg)? {
                    let p = r.get(big_k);
                    let status = match (r.status, p) {
                        (EstimateStatus::Failed, _) => "failed",
                        (EstimateStatus::Ok, None) => "na",
                        (EstimateStatus::Ok, Some(_)) => "ok",
                    };
                    records.push(record(r.estimator.to_string(), p, status));
                }
                if keep_win_counts {
                    dumps.push(WinCountDump { replicate: rep, classifier: name.clone(), k, counts: w });
                }
            }
        }
        Ok((records, dumps))
    });
    let mut run = ReplicationRun { records: Vec::new(), win_counts: Vec::new() };
    for r in per_rep {
        let (records, dumps) = r?;
        run.records.extend(records);
        run.win_counts.extend(dumps);
    }
    Ok(run)
}

const COLUMNS: [&str; 9] = ["replicate", "classifier", "k", "K", "estimator", "p_hat", "truth", "error", "status"];

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub fn records_csv(records: &[ReplicationRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for r in records {
        w.write_record([
            r.replicate.to_string(),
            r.classifier.clone(),
            r.k.to_string(),
            r.big_k.to_string(),
            r.estimator.clone(),
            fmt_opt(r.p_hat),
            format!("{:?}", r.truth),
            fmt_opt(r.error),
            r.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_records_csv(path: &Path, records: &[ReplicationRecord]) -> Result<()> {
    std::fs::write(path, records_csv(records)?)?;
    Ok(())
}

/// Reads a replication CSV. The `classifier` column may be absent (a single
/// unnamed classifier is assumed); every other column is required.
pub fn read_records_csv(path: &Path) -> Result<Vec<ReplicationRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let missing: Vec<&str> = COLUMNS.iter().copied().filter(|&c| c != "classifier" && col(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 1,
            column: 1,
            message: format!("missing column(s): {}", missing.join(", ")),
        });
    }
    let idx: Vec<Option<usize>> = COLUMNS.iter().map(|c| col(c)).collect();
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |j: usize| idx[j].and_then(|i| rec.get(i)).unwrap_or("").trim();
        let err = |j: usize, what: &str| Error::Parse {
            file: path.to_path_buf(),
            line,
            column: idx[j].map_or(0, |i| i + 1),
            message: format!("{} {what}: {:?}", COLUMNS[j], field(j)),
        };
        let int = |j: usize| field(j).parse::<usize>().map_err(|_| err(j, "is not an integer"));
        let opt = |j: usize| -> Result<Option<f64>> {
            match field(j) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| err(j, "is not a number")),
            }
        };
        out.push(ReplicationRecord {
            replicate: int(0)?,
            classifier: if idx[1].is_some() { field(1).to_string() } else { "classifier".to_string() },
            k: int(2)?,
            big_k: int(3)?,
            estimator: field(4).to_string(),
            p_hat: opt(5)?,
            truth: opt(6)?.ok_or_else(|| err(6, "is empty"))?,
            error: opt(7)?,
            status: field(8).to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke() -> ReplicationConfig {
        ReplicationConfig {
            meta: MetaConfig { dim: 2, big_k: 10, test_size: 10, train_size: 20, ..MetaConfig::default() },
            k_list: vec![3, 10],
            replicates: 2,
            estimators: Estimator::ALL.to_vec(),
            ..ReplicationConfig::default()
        }
    }

    #[test]
    fn shape_and_identity_at_full_k() {
        let cfg = smoke();
        let run = run_replication(&cfg, true).unwrap();
        // per (replicate, k): bench plus 4 estimators
        assert_eq!(run.records.len(), 2 * 2 * 5);
        assert_eq!(run.win_counts.len(), 4);
        for r in run.records.iter().filter(|r| r.k == 10 && r.estimator != "cons") {
            // at k = K the estimators reproduce the measured accuracy
            assert!(r.error.unwrap().abs() < 1e-9, "{r:?}");
        }
        for r in run.records.iter().filter(|r| r.k == 3 && r.estimator == "un") {
            assert_eq!((r.p_hat, r.status.as_str()), (None, "na"));
        }
    }

    #[test]
    fn deterministic_and_csv_round_trip() {
        let cfg = smoke();
        let a = records_csv(&run_replication(&cfg, false).unwrap().records).unwrap();
        let b = records_csv(&run_replication(&cfg, false).unwrap().records).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = run_replication(&cfg, false).unwrap().records;
        write_records_csv(&path, &recs).unwrap();
        assert_eq!(read_records_csv(&path).unwrap(), recs);
    }

    #[test]
    fn validation_collects_errors() {
        let cfg = ReplicationConfig { k_list: vec![1, 99], replicates: 0, ..smoke() };
        match cfg.validate() {
            Err(Error::Config(e)) => assert_eq!(e.len(), 3, "{e:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_columns_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "replicate,k,estimator\n0,3,exp\n").unwrap();
        let msg = read_records_csv(&path).unwrap_err().to_string();
        assert!(msg.contains("K") && msg.contains("p_hat") && msg.contains("truth"), "{msg}");
    }
}
