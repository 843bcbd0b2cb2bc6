//! Minimal SVG line charts for replication summaries.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::SummaryRow;
use crate::simlab::BENCHMARK;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: (f64, f64, f64, f64) = (50.0, 20.0, 30.0, 45.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn color(estimator: &str, index: usize) -> &'static str {
    if estimator == BENCHMARK {
        "#7f7f7f"
    } else {
        COLORS[index % COLORS.len()]
    }
}

/// Mean prediction against `k`, one panel per classifier, with the mean
/// true accuracy at `K` dashed.
pub fn curves_svg(rows: &[SummaryRow]) -> String {
    let mut panels: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        panels.entry(r.classifier.as_str()).or_default().push(r);
    }
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="11">"#
    );
    let mut estimators: Vec<&str> = rows.iter().map(|r| r.estimator.as_str()).collect();
    estimators.sort_unstable();
    estimators.dedup();
    for (i, (classifier, rs)) in panels.iter().enumerate() {
        panel(&mut svg, i as f64 * PANEL_W, classifier, rs, &estimators);
    }
    svg.push_str("</svg>\n");
    svg
}

fn panel(svg: &mut String, x0: f64, classifier: &str, rows: &[&SummaryRow], estimators: &[&str]) {
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let kmin = rows.iter().map(|r| r.k).min().unwrap_or(0) as f64;
    let kmax = rows.iter().map(|r| r.k).max().unwrap_or(1) as f64;
    let (lo, hi) = if kmax > kmin { (kmin, kmax) } else { (kmin - 1.0, kmax + 1.0) };
    let sx = |k: f64| ml + (k - lo) / (hi - lo) * pw;
    let sy = |p: f64| mt + (1.0 - p.clamp(0.0, 1.0)) * ph;

    let _ = writeln!(svg, r#"<g class="panel" transform="translate({x0},0)">"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, ml + pw / 2.0, escape(classifier));
    let _ = writeln!(svg, r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{ml}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{p:.2}</text>"##,
            ml + pw,
            ml - 4.0,
            sy(p) + 4.0,
            y = sy(p)
        );
    }
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    for &k in &ks {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{k}</text>"#, sx(k as f64), mt + ph + 14.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">k</text>"#, ml + pw / 2.0, PANEL_H - 8.0);

    let mut truth: BTreeMap<usize, f64> = BTreeMap::new();
    for r in rows {
        truth.entry(r.k).or_insert(r.mean_truth);
    }
    polyline(svg, truth.iter().map(|(&k, &p)| (sx(k as f64), sy(p))), "#000", true);

    for (i, est) in estimators.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.estimator == *est)
            .filter_map(|r| r.mean_p_hat.map(|p| (sx(r.k as f64), sy(p))))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let c = color(est, i);
        polyline(svg, pts.iter().copied(), c, false);
        for (x, y) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}"/>"#);
        }
        let ly = mt + 12.0 + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            ml + pw - 70.0,
            ml + pw - 52.0,
            ml + pw - 48.0,
            ly + 4.0,
            escape(est)
        );
    }
    svg.push_str("</g>\n");
}

fn polyline(svg: &mut String, pts: impl Iterator<Item = (f64, f64)>, stroke: &str, dashed: bool) {
    let points: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = if dashed { r#" stroke-dasharray="5,4""# } else { "" };
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"{dash}/>"#,
        points.join(" ")
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(classifier: &str, estimator: &str, k: usize, p: f64) -> SummaryRow {
        SummaryRow {
            classifier: classifier.into(),
            estimator: estimator.into(),
            k,
            big_k: 50,
            n: 1,
            failed: 0,
            mean_p_hat: Some(p),
            mean_truth: 0.3,
            mae: Some((p - 0.3).abs()),
        }
    }

    #[test]
    fn one_panel_per_classifier() {
        let rows = vec![row("qda", "hd", 5, 0.3), row("qda", "hd", 10, 0.31), row("gnb:0", "exp", 5, 0.2)];
        let svg = curves_svg(&rows);
        assert_eq!(svg.matches(r#"<g class="panel""#).count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn single_point_renders() {
        let svg = curves_svg(&[row("qda", "cons", 10, 0.4)]);
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
