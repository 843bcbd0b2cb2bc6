use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts `0..=n` against
/// `Binomial(n, u)`. Adjacent cells are pooled until every group expects at
/// least 5 observations.
pub fn binomial_gof(values: &[u32], n: u32, u: f64) -> Result<GofResult> {
    if values.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::invalid(format!("u = {u} outside [0, 1]")));
    }
    let total = values.len() as f64;
    let mut observed = vec![0f64; n as usize + 1];
    for &v in values {
        if v > n {
            return Err(Error::invalid(format!("count {v} exceeds {n} trials")));
        }
        observed[v as usize] += 1.0;
    }
    let law = Binomial::new(u, n as u64).map_err(|e| Error::invalid(e.to_string()))?;
    let expected: Vec<f64> = (0..=n as u64).map(|v| total * law.pmf(v)).collect();

    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (ov, ev) in observed.iter().zip(&expected) {
        o += ov;
        e += ev;
        if e >= 5.0 {
            groups.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => groups.push((o, e)),
        }
    }
    if groups.len() < 2 {
        return Ok(GofResult { statistic: 0.0, dof: 0, p_value: 1.0 });
    }
    let statistic: f64 = groups.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = groups.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(GofResult { statistic, dof, p_value: chi.sf(statistic) })
}
