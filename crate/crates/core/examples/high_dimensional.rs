//! The high-dimensional limit: accuracy at k classes determines a single
//! separation c, which then predicts accuracy at any K.

use acx::estimators::{hd_extrapolate, pi_bar, pi_bar_inverse};

fn main() -> acx::Result<()> {
    println!("pi_bar_t(c), probability a normal shifted by c beats t - 1 standard normals");
    println!("{:>6} {:>9} {:>9} {:>9}", "c", "t = 2", "t = 20", "t = 400");
    for c in [0.0, 1.0, 2.0, 3.0, 4.0] {
        println!("{c:>6.1} {:>9.5} {:>9.5} {:>9.5}", pi_bar(2, c)?, pi_bar(20, c)?, pi_bar(400, c)?);
    }

    let (k, p_k) = (20, 0.9);
    let c = pi_bar_inverse(k, p_k)?;
    println!("\naccuracy {p_k} at k = {k} means c = {c:.4}");
    for big_k in [20, 50, 100, 400, 1000] {
        let r = hd_extrapolate(p_k, k, big_k)?;
        println!("  K = {big_k:>4}: {:.4}", r.p_hat);
    }
    Ok(())
}
