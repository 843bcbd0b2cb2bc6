//! The numerical kernels on small problems.

use acx::solvers::{
    bisect, integrate, isotonic_nondecreasing, nnls_solve, simplex_maximize, LinearBand, NnlsProblem,
    SimplexConstraints, SimplexProgram,
};
use nalgebra::{DMatrix, DVector};

fn main() -> acx::Result<()> {
    // nonnegative least squares
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, -1.0, 0.5]);
    let sol = nnls_solve(&NnlsProblem::new(a, b)?)?;
    println!("nnls: x = {:?}, residual {:.4}", sol.x, sol.residual_norm);

    // adaptive quadrature and bisection
    let area = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-12)?;
    println!("integral of exp(-x^2) = {area:.12} (sqrt(pi) = {:.12})", std::f64::consts::PI.sqrt());
    let root = bisect(|x| x.powi(3) - 2.0, 0.0, 2.0, 1e-14)?;
    println!("cube root of 2 = {root:.12}");

    // isotonic regression
    println!("isotonic fit: {:?}", isotonic_nondecreasing(&[1.0, 3.0, 2.0, 4.0, 3.5], None));

    // maximize sum log(w_i) on nondecreasing simplex vectors with a mean band
    let m = 8;
    let objective = |w: &[f64], g: &mut [f64]| {
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi = 1.0 / wi;
        }
        w.iter().map(|x| x.ln()).sum::<f64>()
    };
    let centres: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let constraints = SimplexConstraints {
        monotone: true,
        band: Some(LinearBand { coeffs: centres, lo: 0.6, hi: 0.62 }),
    };
    let start = constraints.feasible_point(&vec![1.0; m]).expect("band is reachable");
    let sol = simplex_maximize(&SimplexProgram::new(objective, constraints), &start)?;
    let w: Vec<String> = sol.weights.iter().map(|x| format!("{x:.4}")).collect();
    println!("simplex: w = [{}], objective {:.6}", w.join(", "), sol.diagnostics.objective);
    Ok(())
}
