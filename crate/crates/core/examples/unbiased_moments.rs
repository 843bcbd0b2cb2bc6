//! Unbiased accuracy estimates for every t <= k from win counts.
//!
//! Win counts of a test point are Binomial(k - 1, u); averaging
//! C(V, t - 1) / C(k - 1, t - 1) estimates E[U^(t - 1)], the expected
//! t-class accuracy, without bias.

use acx::accuracy::WinCounts;
use acx::estimators::{unbiased_moments, unbiased_moments_with, TrialConvention};
use acx::simlab::rng_stream;
use rand_distr::{Beta, Binomial, Distribution};

fn main() -> acx::Result<()> {
    let k = 12;
    let mut rng = rng_stream(3, 0);
    // U ~ Beta(3, 1): E[U^(t-1)] = 3 / (t + 2)
    let beta = Beta::new(3.0, 1.0).unwrap();
    let values: Vec<u32> = (0..20_000)
        .map(|_| {
            let u: f64 = beta.sample(&mut rng);
            Binomial::new((k - 1) as u64, u).unwrap().sample(&mut rng) as u32
        })
        .collect();
    let w = WinCounts::pooled(k, values)?;

    let un = unbiased_moments(&w, k)?;
    let literal = unbiased_moments_with(&w, k, TrialConvention::K)?;
    println!("{:>3} {:>9} {:>9} {:>9}", "t", "exact", "unbiased", "k-trials");
    for p in un.entries() {
        let exact = 3.0 / (p.t as f64 + 2.0);
        println!("{:>3} {exact:>9.4} {:>9.4} {:>9.4}", p.t, p.p, literal.get(p.t).unwrap());
    }
    Ok(())
}
