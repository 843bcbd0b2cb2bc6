/// Weighted least-squares projection of `y` onto nondecreasing sequences
/// (pool adjacent violators).
pub fn isotonic_nondecreasing(y: &[f64], weights: Option<&[f64]>) -> Vec<f64> {
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (m2, w2, l2) = blocks[n - 1];
            let (m1, w1, l1) = blocks[n - 2];
            if m1 <= m2 {
                break;
            }
            let w = w1 + w2;
            let m = if w > 0.0 { (m1 * w1 + m2 * w2) / w } else { 0.5 * (m1 + m2) };
            blocks.truncate(n - 2);
            blocks.push((m, w, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, len)| std::iter::repeat_n(m, len))
        .collect()
}
