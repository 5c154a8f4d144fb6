//! Factor-model panel generator.
//!
//! Untreated outcomes follow `y_it = factor_scale * sum_k mu_ik lambda_tk
//! + noise_sd * eps_it` with `mu` and `eps` i.i.d. standard normal. The
//! factor paths `lambda` are i.i.d. standard normal in the stationary
//! case and a random walk started at zero (unit-variance increments) in
//! the integrated case. Treatment adds `treatment_effect` to unit 0 in
//! the post period; spillover adds `spill_to_treat_ratio *
//! treatment_effect` to the first `n_spillover` donors there. Everything
//! is a pure function of the config, seed included.
//!
//! Draw order is part of the determinism contract: loadings (unit-major),
//! then factors (period-major), then noise (unit-major). Changing it
//! would silently re-randomize every downstream result.

use crate::panel::Panel;
use crate::rng::Rng;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DgpCase {
    Stationary,
    /// Factors are unit-root random walks: "I(1)".
    Integrated,
}

impl DgpCase {
    pub fn label(&self) -> &'static str {
        match self {
            DgpCase::Stationary => "stationary",
            DgpCase::Integrated => "i1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DgpConfig {
    pub case: DgpCase,
    pub n_donors: usize,
    pub n_pre: usize,
    pub n_post: usize,
    pub treatment_effect: f64,
    /// Spillover strength as a share of the treatment effect.
    pub spill_to_treat_ratio: f64,
    /// Share of donors receiving spillover; see [`spillover_count`].
    pub spillover_ratio: f64,
    pub seed: u64,
    pub factor_count: usize,
    pub loading_sd: f64,
    pub noise_sd: f64,
    /// Scales the common-factor component relative to unit noise.
    pub factor_scale: f64,
}

impl DgpConfig {
    /// Baseline parameterization: two unit-variance factors, unit noise.
    pub fn new(case: DgpCase, n_donors: usize, n_pre: usize, seed: u64) -> Self {
        DgpConfig {
            case,
            n_donors,
            n_pre,
            n_post: 1,
            treatment_effect: 0.0,
            spill_to_treat_ratio: 0.0,
            spillover_ratio: 0.0,
            seed,
            factor_count: 2,
            loading_sd: 1.0,
            noise_sd: 1.0,
            factor_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidDgpConfig {
    pub reason: &'static str,
}

impl fmt::Display for InvalidDgpConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid DGP config: {}", self.reason)
    }
}

impl core::error::Error for InvalidDgpConfig {}

/// A generated panel plus the ground truth the estimators are judged
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPanel {
    pub panel: Panel,
    /// Untreated outcome of unit 0 in the post period, recorded before
    /// the treatment effect was added.
    pub counterfactual_post: Vec<f64>,
    pub n_spillover: usize,
    /// Absolute spillover added to each affected donor's post outcomes.
    pub spillover_effect: f64,
}

/// Number of spillover-affected donors for a donor pool of size
/// `n_donors`: `ratio * n_donors` rounded half-up, clamped to
/// `[1, n_donors - 1]` so at least one donor is affected and at least
/// one stays clean. A ratio of exactly zero is the degenerate
/// no-spillover mode and yields zero.
pub fn spillover_count(ratio: f64, n_donors: usize) -> usize {
    if ratio == 0.0 {
        return 0;
    }
    let rounded = libm::floor(ratio * n_donors as f64 + 0.5) as usize;
    rounded.clamp(1, n_donors.saturating_sub(1))
}

pub fn generate(cfg: &DgpConfig) -> Result<GeneratedPanel, InvalidDgpConfig> {
    if cfg.n_donors < 1 {
        return Err(InvalidDgpConfig { reason: "need at least one donor" });
    }
    if cfg.n_pre < 1 || cfg.n_post < 1 {
        return Err(InvalidDgpConfig { reason: "need at least one pre and one post period" });
    }
    if cfg.factor_count < 1 {
        return Err(InvalidDgpConfig { reason: "factor_count must be positive" });
    }
    if !(0.0..=1.0).contains(&cfg.spillover_ratio) {
        return Err(InvalidDgpConfig { reason: "spillover_ratio must lie in [0, 1]" });
    }
    if cfg.spillover_ratio > 0.0 && cfg.n_donors < 2 {
        return Err(InvalidDgpConfig { reason: "spillover needs a donor pool of at least two" });
    }
    let params = [
        cfg.loading_sd,
        cfg.noise_sd,
        cfg.factor_scale,
        cfg.treatment_effect,
        cfg.spill_to_treat_ratio,
    ];
    if params.iter().any(|v| !v.is_finite()) {
        return Err(InvalidDgpConfig { reason: "non-finite parameter" });
    }

    let n = cfg.n_donors + 1;
    let t = cfg.n_pre + cfg.n_post;
    let k = cfg.factor_count;
    let mut rng = Rng::from_seed(cfg.seed);

    let mut loadings = vec![0.0; n * k];
    for v in loadings.iter_mut() {
        *v = cfg.loading_sd * rng.next_normal();
    }

    let factors = draw_factors(&mut rng, cfg.case, t, k);

    let mut outcomes = vec![0.0; n * t];
    for i in 0..n {
        for ti in 0..t {
            let mut common = 0.0;
            for kk in 0..k {
                common += loadings[i * k + kk] * factors[ti * k + kk];
            }
            outcomes[i * t + ti] = cfg.factor_scale * common + cfg.noise_sd * rng.next_normal();
        }
    }

    let counterfactual_post: Vec<f64> = outcomes[cfg.n_pre..t].to_vec();

    let n_spill = spillover_count(cfg.spillover_ratio, cfg.n_donors);
    let spill = cfg.spill_to_treat_ratio * cfg.treatment_effect;
    for ti in cfg.n_pre..t {
        outcomes[ti] += cfg.treatment_effect;
    }
    for donor in 1..=n_spill {
        for ti in cfg.n_pre..t {
            outcomes[donor * t + ti] += spill;
        }
    }

    let spillover: Vec<usize> = (1..=n_spill).collect();
    let panel = Panel::with_spillover(n, t, cfg.n_pre, outcomes, spillover)
        .expect("generated panel is structurally valid");

    Ok(GeneratedPanel { panel, counterfactual_post, n_spillover: n_spill, spillover_effect: spill })
}

/// Factor paths, period-major (`t * k + kk`).
fn draw_factors(rng: &mut Rng, case: DgpCase, t: usize, k: usize) -> Vec<f64> {
    let mut factors = vec![0.0; t * k];
    match case {
        DgpCase::Stationary => {
            for v in factors.iter_mut() {
                *v = rng.next_normal();
            }
        }
        DgpCase::Integrated => {
            // lambda_0 = 0: the walk starts at the first observed period.
            for ti in 1..t {
                for kk in 0..k {
                    factors[ti * k + kk] = factors[(ti - 1) * k + kk] + rng.next_normal();
                }
            }
        }
    }
    factors
}
