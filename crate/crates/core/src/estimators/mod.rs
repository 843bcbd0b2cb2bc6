//! Estimators of the accuracy curve `p_t` beyond the observed number of
//! classes: unbiased moments (UN), a decay-mixture fit (EXP), the constrained
//! pseudolikelihood density (CONS) and the Gaussian margin model (HD).

mod exponential;
mod high_dim;
mod pseudolikelihood;
mod report;
mod unbiased;

pub use exponential::{exp_extrapolate, fit_decay_mixture, DecayFit, KappaGrid};
pub use high_dim::{
    hd_extrapolate, hd_extrapolate_with, pi_bar, pi_bar_inverse, pi_bar_inverse_with, pi_bar_with, HdConfig,
    HdExtrapolation,
};
pub use pseudolikelihood::{constrained_pmle, ConsConfig, ConsFit, PseudoLikelihood};
pub use report::{
    curve_csv, write_curve_csv, write_report_json, EstimateDiagnostics, EstimateStatus, EstimatorReport,
    TargetEstimate, REPORT_SCHEMA,
};
pub(crate) use unbiased::binomial_ratio;
pub use unbiased::{unbiased_moments, unbiased_moments_with, TrialConvention};

use serde::{Deserialize, Serialize};

use crate::accuracy::{density_moment, WinCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Un,
    Exp,
    Cons,
    Hd,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [Estimator::Un, Estimator::Exp, Estimator::Cons, Estimator::Hd];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Un => "un",
            Estimator::Exp => "exp",
            Estimator::Cons => "cons",
            Estimator::Hd => "hd",
        }
    }

    /// Parses a comma-separated list such as `un,exp,cons,hd`.
    pub fn parse_list(s: &str) -> Result<Vec<Estimator>> {
        let mut out: Vec<Estimator> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let e: Estimator = part.parse()?;
            if !out.contains(&e) {
                out.push(e);
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("no estimators selected"));
        }
        Ok(out)
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "un" => Ok(Estimator::Un),
            "exp" => Ok(Estimator::Exp),
            "cons" => Ok(Estimator::Cons),
            "hd" => Ok(Estimator::Hd),
            _ => Err(Error::invalid(format!("unknown estimator {s:?} (expected un, exp, cons or hd)"))),
        }
    }
}

/// Settings shared by every estimator in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationConfig {
    pub estimators: Vec<Estimator>,
    /// Class counts at which to report `p_t`; values above `k` are
    /// extrapolations.
    pub targets: Vec<usize>,
    pub kappa: KappaGrid,
    pub cons: ConsConfig,
    pub hd: HdConfig,
}

impl ExtrapolationConfig {
    /// All estimators, reporting `t = 2..=target`.
    pub fn up_to(target: usize) -> Self {
        Self {
            estimators: Estimator::ALL.to_vec(),
            targets: (2..=target).collect(),
            kappa: KappaGrid::default(),
            cons: ConsConfig::default(),
            hd: HdConfig::default(),
        }
    }
}

/// Runs every selected estimator on `w`. A failing estimator yields a report
/// with a failed status; the others are unaffected.
pub fn extrapolate_all(w: &WinCounts, cfg: &ExtrapolationConfig) -> Result<Vec<EstimatorReport>> {
    let k = w.k();
    if cfg.targets.iter().any(|&t| t < 1) {
        return Err(Error::invalid("target class counts must be at least 1"));
    }
    let un = unbiased_moments(w, k)?;
    let p_k = un.get(k).expect("unbiased curve reaches k");
    let mut un_warnings = Vec::new();
    if un.out_of_range() {
        un_warnings.push("unbiased moments outside [0, 1]; raw values kept".to_string());
    }
    let un_at = |t: usize| if t == 1 { Some(1.0) } else { un.get(t) };

    let mut reports = Vec::new();
    for &est in &cfg.estimators {
        let report = match est {
            Estimator::Un => EstimatorReport::ok(
                est,
                k,
                cfg.targets.iter().map(|&t| TargetEstimate { t, p_hat: un_at(t) }).collect(),
                EstimateDiagnostics { warnings: un_warnings.clone(), ..Default::default() },
            ),
            Estimator::Exp => match fit_decay_mixture(&un, &cfg.kappa.rates()) {
                Ok(fit) => EstimatorReport::ok(
                    est,
                    k,
                    cfg.targets
                        .iter()
                        .map(|&t| TargetEstimate {
                            t,
                            p_hat: Some(if t == 1 { 1.0 } else { exp_extrapolate(&fit.mixture, &un, t) }),
                        })
                        .collect(),
                    EstimateDiagnostics { residual: Some(fit.residual_norm), warnings: fit.warnings, ..Default::default() },
                ),
                Err(e) => EstimatorReport::failed(est, k, &cfg.targets, &e),
            },
            Estimator::Cons => match constrained_pmle(w, &ConsConfig { anchor: Some(p_k), ..cfg.cons }) {
                Ok(fit) => EstimatorReport::ok(
                    est,
                    k,
                    cfg.targets
                        .iter()
                        .map(|&t| TargetEstimate { t, p_hat: Some(density_moment(&fit.density, t)) })
                        .collect(),
                    EstimateDiagnostics {
                        residual: Some(fit.diagnostics.feasibility),
                        objective: Some(fit.objective),
                        kkt: Some(fit.diagnostics.kkt_residual),
                        warnings: fit.warnings,
                    },
                ),
                Err(e) => EstimatorReport::failed(est, k, &cfg.targets, &e),
            },
            Estimator::Hd => {
                let mut warnings = Vec::new();
                let mut targets = Vec::new();
                let mut failure = None;
                for &t in &cfg.targets {
                    if t == 1 {
                        targets.push(TargetEstimate { t, p_hat: Some(1.0) });
                        continue;
                    }
                    match hd_extrapolate_with(p_k, k, t, &cfg.hd) {
                        Ok(r) => {
                            for msg in r.warnings {
                                if !warnings.contains(&msg) {
                                    warnings.push(msg);
                                }
                            }
                            targets.push(TargetEstimate { t, p_hat: Some(r.p_hat) });
                        }
                        Err(e) => {
                            failure = Some(e);
                            break;
                        }
                    }
                }
                match failure {
                    None => EstimatorReport::ok(est, k, targets, EstimateDiagnostics { warnings, ..Default::default() }),
                    Some(e) => EstimatorReport::failed(est, k, &cfg.targets, &e),
                }
            }
        };
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert_eq!(Estimator::parse_list("un, hd,un").unwrap(), vec![Estimator::Un, Estimator::Hd]);
        assert!(Estimator::parse_list("un,mle").is_err());
        assert!(Estimator::parse_list("").is_err());
    }

    #[test]
    fn identity_target_matches_unbiased() {
        let w = WinCounts::pooled(6, vec![5, 4, 5, 3, 5, 2, 5, 5, 1, 5]).unwrap();
        let cfg = ExtrapolationConfig { targets: vec![6], ..ExtrapolationConfig::up_to(6) };
        let reports = extrapolate_all(&w, &cfg).unwrap();
        let p_k = unbiased_moments(&w, 6).unwrap().get(6).unwrap();
        for r in &reports {
            assert_eq!(r.status, EstimateStatus::Ok, "{:?}", r);
            let got = r.targets[0].p_hat.unwrap();
            let tol = if r.estimator == Estimator::Cons { 1e-6 + 1e-9 } else { 1e-12 };
            assert!((got - p_k).abs() <= tol, "{}: {got} vs {p_k}", r.estimator);
        }
    }

    #[test]
    fn perfect_input_fails_only_cons() {
        let w = WinCounts::pooled(20, vec![19; 50]).unwrap();
        let cfg = ExtrapolationConfig { targets: vec![400], ..ExtrapolationConfig::up_to(400) };
        let reports = extrapolate_all(&w, &cfg).unwrap();
        for r in &reports {
            match r.estimator {
                Estimator::Cons => {
                    assert_eq!(r.status, EstimateStatus::Failed);
                    assert!(r.diagnostics.warnings.iter().any(|m| m.contains("closest feasible anchor")));
                }
                Estimator::Un => assert_eq!(r.targets[0].p_hat, None),
                _ => assert!(r.targets[0].p_hat.is_some()),
            }
        }
    }
}
