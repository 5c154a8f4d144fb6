//! The five spillover-handling synthetic control estimators.
//!
//! All five share the same final shape: fit simplex weights on
//! pre-period outcomes, predict the treated unit's post-period
//! counterfactual, report `effect = actual - counterfactual`. They
//! differ in how donors flagged as spillover-affected enter that fit:
//!
//! * [`estimate_unrestricted`]: ignore the flags, use every donor.
//! * [`estimate_restricted`]: drop every flagged donor.
//! * [`estimate_iterative`]: synthesize a cleaned copy of each flagged
//!   donor from the other donors, then fit on clean + cleaned.
//! * [`estimate_inclusive`]: fit every affected unit (treated included)
//!   against all other units, then solve `(I - W) e = g` for the
//!   effects, where `W` holds the cross-weights among affected units.
//! * [`estimate_sp`]: regression-adjust flagged donors' post outcomes
//!   (intercept-only by default), then fit on the full pool.

use crate::linalg::{ols, Lu};
use crate::panel::Panel;
use crate::solver::{solve_simplex_ls, SimplexFit};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Condition numbers above this mark the cross-weight system as
/// numerically fragile in the diagnostics.
pub const CONDITION_WARN: f64 = 1e8;
/// Determinant magnitudes below this fail the cross-weight solve.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    Unrestricted,
    Restricted,
    Iterative,
    Inclusive,
    Sp,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Unrestricted,
        Method::Restricted,
        Method::Iterative,
        Method::Inclusive,
        Method::Sp,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Unrestricted => "unrestricted",
            Method::Restricted => "restricted",
            Method::Iterative => "iterative",
            Method::Inclusive => "inclusive",
            Method::Sp => "sp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterativeOpts {
    /// Replace flagged donors' pre-period data with their synthetic
    /// version in the final fit (keeps each cleaned donor internally
    /// consistent between pre and post).
    pub replace_pre: bool,
    /// Let later cleanings draw on the already-cleaned versions of
    /// earlier flagged donors instead of their raw data.
    pub use_cleaned: bool,
}

impl Default for IterativeOpts {
    fn default() -> Self {
        IterativeOpts { replace_pre: true, use_cleaned: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub solver_iterations: usize,
    pub solver_converged: bool,
    pub kkt_residual: f64,
    /// Inclusive only: solved effects for every unit in the affected
    /// set, unit-major (`[s * n_post + t]`, S ordered treated-first then
    /// flagged ascending).
    pub spillover_effects: Option<Vec<f64>>,
    /// Inclusive only: determinant of `I - W`.
    pub system_det: Option<f64>,
    /// Inclusive only: 1-norm condition number of `I - W`.
    pub system_condition: Option<f64>,
    pub condition_warning: bool,
    /// SP only: adjustment coefficients, period-major
    /// (`[t * n_covariates + c]`).
    pub beta: Option<Vec<f64>>,
}

impl Diagnostics {
    fn from_fit(fit: &SimplexFit) -> Self {
        Diagnostics {
            solver_iterations: fit.iterations,
            solver_converged: fit.converged,
            kkt_residual: fit.kkt_residual,
            spillover_effects: None,
            system_det: None,
            system_condition: None,
            condition_warning: false,
            beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectEstimate {
    pub method: Method,
    /// Unit indices behind `weights`. For Inclusive this is the treated
    /// unit's own fit (its donor pool is every other unit).
    pub donor_pool: Vec<usize>,
    pub weights: Vec<f64>,
    pub counterfactual_post: Vec<f64>,
    /// `actual - counterfactual`, per post period.
    pub effect_post: Vec<f64>,
    /// Pre-period sum of squared residuals of the reported fit.
    pub pre_objective: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorError {
    /// No donors left to fit on (e.g. Restricted with every donor
    /// flagged).
    EmptyDonorPool { method: Method },
    /// The Inclusive cross-weight system is singular to tolerance.
    SingularSystem { det: f64 },
    /// The SP adjustment design has collinear columns.
    RankDeficientDesign,
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::EmptyDonorPool { method } => {
                write!(f, "{method}: donor pool is empty")
            }
            EstimatorError::SingularSystem { det } => {
                write!(f, "inclusive cross-weight system is singular (det = {det:e})")
            }
            EstimatorError::RankDeficientDesign => {
                write!(f, "sp adjustment design is rank deficient")
            }
        }
    }
}

impl core::error::Error for EstimatorError {}

/// Dispatch with default options for every method.
pub fn estimate(panel: &Panel, method: Method) -> Result<EffectEstimate, EstimatorError> {
    match method {
        Method::Unrestricted => Ok(estimate_unrestricted(panel)),
        Method::Restricted => estimate_restricted(panel),
        Method::Iterative => estimate_iterative(panel, IterativeOpts::default()),
        Method::Inclusive => estimate_inclusive(panel),
        Method::Sp => estimate_sp(panel),
    }
}

pub fn estimate_unrestricted(panel: &Panel) -> EffectEstimate {
    fit_on_pool(panel, Method::Unrestricted, panel.donors())
}

pub fn estimate_restricted(panel: &Panel) -> Result<EffectEstimate, EstimatorError> {
    let pool = panel.clean_donors();
    if pool.is_empty() {
        return Err(EstimatorError::EmptyDonorPool { method: Method::Restricted });
    }
    Ok(fit_on_pool(panel, Method::Restricted, pool))
}

/// Plain synthetic control of unit 0 on `pool`, using raw panel rows.
fn fit_on_pool(panel: &Panel, method: Method, pool: Vec<usize>) -> EffectEstimate {
    let rows: Vec<&[f64]> = pool.iter().map(|&u| panel.pre(u)).collect();
    let fit = solve_simplex_ls(panel.pre(0), &rows);
    let counterfactual: Vec<f64> = (0..panel.n_post())
        .map(|t| {
            pool.iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| w * panel.post(u)[t])
                .sum()
        })
        .collect();
    finish(panel, method, pool, fit, counterfactual)
}

fn finish(
    panel: &Panel,
    method: Method,
    pool: Vec<usize>,
    fit: SimplexFit,
    counterfactual: Vec<f64>,
) -> EffectEstimate {
    let effect: Vec<f64> = panel
        .post(0)
        .iter()
        .zip(counterfactual.iter())
        .map(|(y, c)| y - c)
        .collect();
    EffectEstimate {
        method,
        donor_pool: pool,
        diagnostics: Diagnostics::from_fit(&fit),
        weights: fit.weights,
        counterfactual_post: counterfactual,
        effect_post: effect,
        pre_objective: fit.objective,
    }
}

pub fn estimate_iterative(
    panel: &Panel,
    opts: IterativeOpts,
) -> Result<EffectEstimate, EstimatorError> {
    let flagged = panel.spillover_units();
    let n_periods = panel.n_periods();
    let t0 = panel.treatment_time();

    // Working copy that accumulates cleaned rows.
    let mut work: Vec<f64> = panel.outcomes().to_vec();

    for &j in flagged {
        // Cleaning pool: every other donor. With `use_cleaned` the rows
        // of already-processed flagged donors enter in cleaned form,
        // otherwise raw data is used throughout.
        let pool: Vec<usize> = (1..panel.n_units()).filter(|&u| u != j).collect();
        let source: &[f64] = if opts.use_cleaned { &work } else { panel.outcomes() };
        let rows: Vec<&[f64]> =
            pool.iter().map(|&u| &source[u * n_periods..u * n_periods + t0]).collect();
        let fit = solve_simplex_ls(panel.pre(j), &rows);

        let mut synthetic = vec![0.0; n_periods];
        for (ti, s) in synthetic.iter_mut().enumerate() {
            *s = pool
                .iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| w * source[u * n_periods + ti])
                .sum();
        }
        let start = if opts.replace_pre { 0 } else { t0 };
        work[j * n_periods + start..(j + 1) * n_periods]
            .copy_from_slice(&synthetic[start..]);
    }

    // Final fit: all donors, cleaned rows standing in for flagged ones.
    let pool = panel.donors();
    let rows: Vec<&[f64]> =
        pool.iter().map(|&u| &work[u * n_periods..u * n_periods + t0]).collect();
    let fit = solve_simplex_ls(panel.pre(0), &rows);
    let counterfactual: Vec<f64> = (t0..n_periods)
        .map(|ti| {
            pool.iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| w * work[u * n_periods + ti])
                .sum()
        })
        .collect();
    Ok(finish(panel, Method::Iterative, pool, fit, counterfactual))
}

pub fn estimate_inclusive(panel: &Panel) -> Result<EffectEstimate, EstimatorError> {
    let n_post = panel.n_post();

    // Affected set: treated unit first, flagged donors ascending.
    let mut s_units: Vec<usize> = Vec::with_capacity(panel.spillover_units().len() + 1);
    s_units.push(0);
    s_units.extend_from_slice(panel.spillover_units());
    let m = s_units.len();

    // Fit every affected unit against all other units (treated unit
    // included in donor pools: the symmetric system).
    let mut w_mat = vec![0.0; m * m];
    let mut gaps = vec![0.0; m * n_post];
    let mut treated_fit: Option<(Vec<usize>, SimplexFit)> = None;
    for (a, &i) in s_units.iter().enumerate() {
        let pool: Vec<usize> = (0..panel.n_units()).filter(|&u| u != i).collect();
        let rows: Vec<&[f64]> = pool.iter().map(|&u| panel.pre(u)).collect();
        let fit = solve_simplex_ls(panel.pre(i), &rows);
        for t in 0..n_post {
            let pred: f64 = pool
                .iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| w * panel.post(u)[t])
                .sum();
            gaps[a * n_post + t] = panel.post(i)[t] - pred;
        }
        for (b, &other) in s_units.iter().enumerate() {
            if let Some(pos) = pool.iter().position(|&u| u == other) {
                w_mat[a * m + b] = fit.weights[pos];
            }
        }
        if i == 0 {
            treated_fit = Some((pool, fit));
        }
    }

    // (I - W) e = g, solved per post period.
    let mut a_mat = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            a_mat[r * m + c] = if r == c { 1.0 } else { 0.0 } - w_mat[r * m + c];
        }
    }
    let lu = match Lu::factor(&a_mat, m) {
        Ok(lu) if lu.det().abs() >= SINGULAR_TOL => lu,
        Ok(lu) => return Err(EstimatorError::SingularSystem { det: lu.det() }),
        Err(s) => return Err(EstimatorError::SingularSystem { det: s.det }),
    };
    let condition = lu.condition_1(&a_mat);

    let mut effects = vec![0.0; m * n_post];
    let mut rhs = vec![0.0; m];
    for t in 0..n_post {
        for a in 0..m {
            rhs[a] = gaps[a * n_post + t];
        }
        let e = lu.solve(&rhs);
        for a in 0..m {
            effects[a * n_post + t] = e[a];
        }
    }

    let effect_post: Vec<f64> = effects[..n_post].to_vec();
    let counterfactual: Vec<f64> = panel
        .post(0)
        .iter()
        .zip(effect_post.iter())
        .map(|(y, e)| y - e)
        .collect();

    let (pool, fit) = treated_fit.expect("treated unit is always in the affected set");
    let mut diagnostics = Diagnostics::from_fit(&fit);
    diagnostics.spillover_effects = Some(effects);
    diagnostics.system_det = Some(lu.det());
    diagnostics.system_condition = Some(condition);
    diagnostics.condition_warning = condition > CONDITION_WARN;

    Ok(EffectEstimate {
        method: Method::Inclusive,
        donor_pool: pool,
        diagnostics,
        weights: fit.weights,
        counterfactual_post: counterfactual,
        effect_post,
        pre_objective: fit.objective,
    })
}

/// SP with the default intercept-only adjustment: the estimated
/// spillover is the per-period mean gap across flagged donors.
pub fn estimate_sp(panel: &Panel) -> Result<EffectEstimate, EstimatorError> {
    let ones = vec![1.0; panel.spillover_units().len()];
    estimate_sp_with_design(panel, &ones, 1)
}

/// SP with an arbitrary adjustment design: `design` is row-major
/// `n_flagged x n_covariates`, one row per flagged donor in ascending
/// unit order. Gaps are regressed on the design per post period and the
/// fitted part is subtracted from each flagged donor's post outcomes
/// before the final full-pool fit.
pub fn estimate_sp_with_design(
    panel: &Panel,
    design: &[f64],
    n_covariates: usize,
) -> Result<EffectEstimate, EstimatorError> {
    let flagged = panel.spillover_units();
    if flagged.is_empty() {
        // Fall through: nothing to adjust, SP degenerates to the
        // unrestricted fit.
        let mut est = estimate_unrestricted(panel);
        est.method = Method::Sp;
        return Ok(est);
    }
    assert_eq!(design.len(), flagged.len() * n_covariates, "one design row per flagged donor");

    let clean = panel.clean_donors();
    if clean.is_empty() {
        return Err(EstimatorError::EmptyDonorPool { method: Method::Sp });
    }
    let n_post = panel.n_post();
    let f = flagged.len();

    // Stage 1: gaps of flagged donors vs their clean-only synthetics.
    let clean_rows: Vec<&[f64]> = clean.iter().map(|&u| panel.pre(u)).collect();
    let mut gaps = vec![0.0; f * n_post];
    for (r, &j) in flagged.iter().enumerate() {
        let fit = solve_simplex_ls(panel.pre(j), &clean_rows);
        for t in 0..n_post {
            let pred: f64 = clean
                .iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| w * panel.post(u)[t])
                .sum();
            gaps[r * n_post + t] = panel.post(j)[t] - pred;
        }
    }

    // Stage 2: per-period regression of gaps on the design.
    let mut beta = vec![0.0; n_post * n_covariates];
    let mut y_t = vec![0.0; f];
    for t in 0..n_post {
        for r in 0..f {
            y_t[r] = gaps[r * n_post + t];
        }
        let b = ols(design, f, n_covariates, &y_t)
            .map_err(|_| EstimatorError::RankDeficientDesign)?;
        beta[t * n_covariates..(t + 1) * n_covariates].copy_from_slice(&b);
    }

    // Stage 3 + 4: subtract fitted spillover from flagged post rows,
    // then fit the treated unit on the full pool (raw pre everywhere).
    let pool = panel.donors();
    let rows: Vec<&[f64]> = pool.iter().map(|&u| panel.pre(u)).collect();
    let fit = solve_simplex_ls(panel.pre(0), &rows);
    let counterfactual: Vec<f64> = (0..n_post)
        .map(|t| {
            pool.iter()
                .zip(fit.weights.iter())
                .map(|(&u, w)| {
                    let mut v = panel.post(u)[t];
                    if let Some(r) = flagged.iter().position(|&x| x == u) {
                        let z = &design[r * n_covariates..(r + 1) * n_covariates];
                        let adj: f64 = z
                            .iter()
                            .zip(beta[t * n_covariates..(t + 1) * n_covariates].iter())
                            .map(|(zc, bc)| zc * bc)
                            .sum();
                        v -= adj;
                    }
                    w * v
                })
                .sum()
        })
        .collect();

    let mut est = finish(panel, Method::Sp, pool, fit, counterfactual);
    est.diagnostics.beta = Some(beta);
    Ok(est)
}
