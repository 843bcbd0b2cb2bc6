//! For a fixed trained class and test point, the number of random
//! competitors it outscores is binomial with success probability equal to its
//! conditional accuracy.

use acx::simlab::{
    binomial_gof, conditional_accuracy_of, resampled_win_counts, rng_stream, ClassifierSpec, CompetitorSampler,
    MetaConfig,
};

fn main() -> acx::Result<()> {
    let cfg = MetaConfig { dim: 3, tau: 1.0, train_size: 40, ..MetaConfig::default() };
    let spec = ClassifierSpec::qda();
    let sampler = CompetitorSampler::new(&cfg, &spec);
    let (model, y) = sampler.draw_labelled(&mut rng_stream(5, 0))?;

    let u = conditional_accuracy_of(&model, &y, &sampler, 50_000, 1)?;
    let k = 6;
    let v = resampled_win_counts(&model, &y, &sampler, k, 20_000, 2)?;
    let mut hist = vec![0usize; k];
    for &x in &v {
        hist[x as usize] += 1;
    }
    let gof = binomial_gof(&v, k as u32 - 1, u)?;
    println!("conditional accuracy u = {u:.4}");
    println!("win-count histogram against {} competitors: {hist:?}", k - 1);
    println!("chi-square {:.2} on {} dof, p = {:.3}", gof.statistic, gof.dof, gof.p_value);
    Ok(())
}
