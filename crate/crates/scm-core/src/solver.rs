//! Least squares over the unit simplex.
//!
//! Minimizes `|| y - sum_j w_j d_j ||^2` subject to `w_j >= 0`,
//! `sum w_j = 1` by projected gradient descent with an exact Euclidean
//! simplex projection. The step size is `1/L` with `L = 2 lambda_max`
//! of the donor Gram matrix, estimated by deterministic power iteration,
//! so repeated calls on the same input give bit-identical results.

use alloc::vec;
use alloc::vec::Vec;

/// Frank-Wolfe gap threshold: first-order optimality on the simplex.
const KKT_TOL: f64 = 1e-8;
/// Relative objective-decrease floor; below this the iteration has stalled.
const REL_DECREASE_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 10_000;
const POWER_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFit {
    pub weights: Vec<f64>,
    /// Sum of squared residuals at `weights`.
    pub objective: f64,
    pub iterations: usize,
    /// False only when the iteration cap was hit with the gap still open.
    pub converged: bool,
    /// Final Frank-Wolfe gap (exactly 0 for the closed-form 1-donor case).
    pub kkt_residual: f64,
}

/// `target` and every donor row must have equal nonzero length; `donors`
/// must be nonempty. Both are structural invariants of the callers here,
/// enforced by `Panel`, so violations are programming errors.
pub fn solve_simplex_ls(target: &[f64], donors: &[&[f64]]) -> SimplexFit {
    let j = donors.len();
    let t = target.len();
    assert!(j > 0, "donor pool must be nonempty");
    assert!(t > 0, "fit window must be nonempty");
    for d in donors {
        assert_eq!(d.len(), t, "donor row length must match target");
    }

    if j == 1 {
        let weights = vec![1.0];
        let objective = sq_residual(target, donors, &weights);
        return SimplexFit { weights, objective, iterations: 0, converged: true, kkt_residual: 0.0 };
    }

    let lip = 2.0 * gram_lambda_max(donors, t);
    let mut w = vec![1.0 / j as f64; j];
    if !(lip > f64::MIN_POSITIVE) {
        // All-zero donors: objective is constant in w, any point is optimal.
        let objective = sq_residual(target, donors, &w);
        return SimplexFit { weights: w, objective, iterations: 0, converged: true, kkt_residual: 0.0 };
    }
    let step = 1.0 / (lip * (1.0 + 1e-9));

    let mut grad = vec![0.0; j];
    let mut residual = vec![0.0; t];
    let mut f_prev = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..MAX_ITERS {
        iterations = iter;
        let f = eval(target, donors, &w, &mut residual, &mut grad);

        gap = fw_gap(&grad, &w);
        if gap <= KKT_TOL {
            converged = true;
            break;
        }
        if f_prev.is_finite() {
            let denom = if f_prev > 1.0 { f_prev } else { 1.0 };
            if f_prev - f <= REL_DECREASE_TOL * denom {
                converged = true;
                break;
            }
        }
        f_prev = f;

        for (wi, gi) in w.iter_mut().zip(grad.iter()) {
            *wi -= step * gi;
        }
        project_simplex(&mut w);
    }

    let objective = sq_residual(target, donors, &w);
    SimplexFit { weights: w, objective, iterations, converged, kkt_residual: gap }
}

fn eval(target: &[f64], donors: &[&[f64]], w: &[f64], residual: &mut [f64], grad: &mut [f64]) -> f64 {
    for (rt, yt) in residual.iter_mut().zip(target.iter()) {
        *rt = -yt;
    }
    for (dj, wj) in donors.iter().zip(w.iter()) {
        for (rt, djt) in residual.iter_mut().zip(dj.iter()) {
            *rt += wj * djt;
        }
    }
    let f = residual.iter().map(|r| r * r).sum();
    for (gj, dj) in grad.iter_mut().zip(donors.iter()) {
        *gj = 2.0 * residual.iter().zip(dj.iter()).map(|(r, d)| r * d).sum::<f64>();
    }
    f
}

fn sq_residual(target: &[f64], donors: &[&[f64]], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (ti, yt) in target.iter().enumerate() {
        let mut pred = 0.0;
        for (dj, wj) in donors.iter().zip(w.iter()) {
            pred += wj * dj[ti];
        }
        let r = pred - yt;
        acc += r * r;
    }
    acc
}

/// `max_{s in simplex} <grad, w - s> = <grad, w> - min_j grad_j`.
fn fw_gap(grad: &[f64], w: &[f64]) -> f64 {
    let inner: f64 = grad.iter().zip(w.iter()).map(|(g, wi)| g * wi).sum();
    let min = grad.iter().copied().fold(f64::INFINITY, f64::min);
    inner - min
}

/// Largest eigenvalue of the donor Gram matrix `G[i][j] = <d_i, d_j>`,
/// by power iteration from the normalized all-ones vector. The iterate
/// can only lose the top eigenspace if the start is exactly orthogonal
/// to it; the Gram matrix is PSD so a nonnegative start vector cannot
/// be orthogonal to a Perron-aligned eigenvector in practice, and a
/// slight overestimate of the true value only shrinks the step.
fn gram_lambda_max(donors: &[&[f64]], t: usize) -> f64 {
    let j = donors.len();
    let mut g = vec![0.0; j * j];
    for a in 0..j {
        for b in a..j {
            let mut dot = 0.0;
            for ti in 0..t {
                dot += donors[a][ti] * donors[b][ti];
            }
            g[a * j + b] = dot;
            g[b * j + a] = dot;
        }
    }

    let mut v = vec![1.0 / libm::sqrt(j as f64); j];
    let mut gv = vec![0.0; j];
    let mut lambda = 0.0_f64;
    for _ in 0..POWER_ITERS {
        for a in 0..j {
            gv[a] = (0..j).map(|b| g[a * j + b] * v[b]).sum();
        }
        let norm = libm::sqrt(gv.iter().map(|x| x * x).sum::<f64>());
        if norm <= f64::MIN_POSITIVE {
            return 0.0;
        }
        let next = gv.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>();
        let rel = (next - lambda).abs() / if next.abs() > 1.0 { next.abs() } else { 1.0 };
        lambda = next;
        for (vi, gvi) in v.iter_mut().zip(gv.iter()) {
            *vi = gvi / norm;
        }
        if rel < 1e-13 {
            break;
        }
    }
    // Rayleigh quotient lower-bounds lambda_max; pad for the step size.
    lambda.abs() * (1.0 + 1e-6)
}

/// Euclidean projection onto the unit simplex (Held/Condat threshold).
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &sv) in sorted.iter().enumerate() {
        cumsum += sv;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if sv - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    let mut sum = 0.0;
    for vi in v.iter_mut() {
        *vi = if *vi - tau > 0.0 { *vi - tau } else { 0.0 };
        sum += *vi;
    }
    // Exact renormalization keeps |sum(w) - 1| at rounding level even
    // after long gradient runs.
    if sum > 0.0 {
        for vi in v.iter_mut() {
            *vi /= sum;
        }
    } else {
        let u = 1.0 / n as f64;
        for vi in v.iter_mut() {
            *vi = u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_donor_gets_full_weight() {
        let fit = solve_simplex_ls(&[1.0, 2.0], &[&[3.0, 5.0]]);
        assert_eq!(fit.weights, vec![1.0]);
        assert!((fit.objective - (4.0 + 9.0)).abs() < 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn exact_hull_member_is_recovered() {
        // target = 0.3 a + 0.7 b exactly
        let a = [1.0, 0.0, 2.0, 4.0];
        let b = [0.0, 1.0, 1.0, -2.0];
        let y: Vec<f64> = a.iter().zip(b.iter()).map(|(ai, bi)| 0.3 * ai + 0.7 * bi).collect();
        let fit = solve_simplex_ls(&y, &[&a, &b]);
        assert!(fit.objective < 1e-14, "objective {}", fit.objective);
        assert!((fit.weights[0] - 0.3).abs() < 1e-6);
        assert!((fit.weights[1] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn two_donor_interior_matches_closed_form() {
        // On the segment w*a + (1-w)*b the objective is quadratic in w;
        // y here makes the unconstrained optimum land inside (0, 1).
        let a = [2.0, 0.0];
        let b = [0.0, 2.0];
        let y = [1.2, 0.8];
        // minimize ||y - (w a + (1-w) b)||^2 -> w* = 0.6 by direct algebra
        let fit = solve_simplex_ls(&y, &[&a, &b]);
        assert!((fit.weights[0] - 0.6).abs() < 1e-7, "weights {:?}", fit.weights);
        assert!(fit.kkt_residual <= 1e-8);
    }

    #[test]
    fn vertex_optimum_pins_single_weight() {
        // Donor a matches y exactly; any weight on b hurts.
        let a = [1.0, 1.0, 1.0];
        let b = [9.0, -4.0, 3.0];
        let fit = solve_simplex_ls(&[1.0, 1.0, 1.0], &[&a, &b]);
        assert!(fit.objective < 1e-12);
        assert!(fit.weights[0] > 1.0 - 1e-6);
    }

    #[test]
    fn weights_stay_feasible() {
        let d1 = [0.3, -2.0, 1.0, 0.4, 2.2];
        let d2 = [1.4, 0.2, -0.5, 1.9, -1.0];
        let d3 = [0.0, 0.1, 4.0, -3.0, 0.6];
        let fit = solve_simplex_ls(&[5.0, -1.0, 0.3, 2.0, 1.1], &[&d1, &d2, &d3]);
        let sum: f64 = fit.weights.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        assert!(fit.weights.iter().all(|w| *w >= 0.0));
    }

    #[test]
    fn all_zero_donors_return_uniform() {
        let z = [0.0, 0.0, 0.0];
        let fit = solve_simplex_ls(&[1.0, 2.0, 3.0], &[&z, &z]);
        assert_eq!(fit.weights, vec![0.5, 0.5]);
        assert!(fit.converged);
    }

    #[test]
    fn deterministic_across_calls() {
        let d1 = [0.77, -1.3, 2.4, 0.0];
        let d2 = [1.1, 0.9, -0.2, 3.3];
        let d3 = [-0.4, 0.5, 1.6, -2.1];
        let y = [0.9, 0.1, 1.4, 0.2];
        let a = solve_simplex_ls(&y, &[&d1, &d2, &d3]);
        let b = solve_simplex_ls(&y, &[&d1, &d2, &d3]);
        assert_eq!(a, b);
    }

    #[test]
    fn projection_handles_extremes() {
        let mut v = vec![5.0, -3.0, 0.1];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(v[1], 0.0);

        let mut all_neg = vec![-1.0, -2.0];
        project_simplex(&mut all_neg);
        assert!((all_neg.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let mut already = vec![0.25, 0.75];
        project_simplex(&mut already);
        assert!((already[0] - 0.25).abs() < 1e-12);
        assert!((already[1] - 0.75).abs() < 1e-12);
    }
}
