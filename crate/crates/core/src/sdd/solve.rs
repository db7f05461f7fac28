use super::SddMatrix;

/// Iterations of [`fast_solve`] for relative accuracy `eps` on an `alpha`-SDD matrix.
pub fn fast_solve_iterations(alpha: f64, eps: f64) -> usize {
    // Projected gradient contracts the gap by 2 / (2 + alpha) per step.
    ((1.0 / eps).ln() / ((2.0 + alpha) / 2.0).ln()).ceil().max(0.0) as usize + 1
}

/// Minimizes `1/2 x^T M x + b^T x` over `||x||_inf <= 2` for `alpha`-SDD `M`, to
/// within a factor `1 - eps` of the optimum.
///
/// Projected gradient descent in the `D^{1/2}`-scaled coordinates, where the
/// Hessian has spectrum in `[1 - 1/(1+alpha), 1 + 1/(1+alpha)]`.
pub fn fast_solve(m: &SddMatrix, b: &[f64], alpha: f64, eps: f64) -> Vec<f64> {
    const R: f64 = 2.0;
    let n = m.n();
    let step = (1.0 + alpha) / (2.0 + alpha);
    let d = m.diag();
    let mut x = vec![0.0; n];
    // Coordinates with a zero diagonal carry no quadratic term (and no couplings).
    let free: Vec<bool> = d.iter().map(|&v| v > 0.0).collect();
    for i in 0..n {
        if !free[i] {
            x[i] = if b[i] > 0.0 {
                -R
            } else if b[i] < 0.0 {
                R
            } else {
                0.0
            };
        }
    }
    let mut g = vec![0.0; n];
    for _ in 0..fast_solve_iterations(alpha, eps) {
        m.matvec_into(&x, &mut g);
        for i in 0..n {
            if free[i] {
                x[i] = (x[i] - step * (g[i] + b[i]) / d[i]).clamp(-R, R);
            }
        }
    }
    x
}

/// Exact minimizer of `1/2 m x^2 + b x` over `[-1, 1]`.
pub fn trivial_solve(m: f64, b: f64) -> f64 {
    if m > 0.0 {
        (-b / m).clamp(-1.0, 1.0)
    } else if b > 0.0 {
        -1.0
    } else if b < 0.0 {
        1.0
    } else {
        0.0
    }
}
