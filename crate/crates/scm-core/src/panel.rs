//! Balanced outcome panel with a single treated unit.
//!
//! Unit 0 is always the treated unit; units `1..n_units` are donors.
//! Time runs `0..n_periods` with treatment starting at `t0`, so
//! `0..t0` is the pre period and `t0..n_periods` the post period.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    n_units: usize,
    n_periods: usize,
    t0: usize,
    /// Row-major `n_units x n_periods`.
    outcomes: Vec<f64>,
    /// Sorted donor indices flagged as spillover-affected. Never contains 0.
    spillover: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PanelError {
    /// Need the treated unit plus at least one donor.
    TooFewUnits { n_units: usize },
    /// Need at least one pre and one post period.
    BadTreatmentTime { t0: usize, n_periods: usize },
    OutcomeLenMismatch { expected: usize, got: usize },
    NonFiniteOutcome { unit: usize, period: usize },
    /// Spillover indices must be donor indices: in `1..n_units`, unique.
    BadSpilloverIndex { index: usize },
}

impl fmt::Display for PanelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PanelError::TooFewUnits { n_units } => {
                write!(f, "panel needs >= 2 units (treated + donor), got {n_units}")
            }
            PanelError::BadTreatmentTime { t0, n_periods } => write!(
                f,
                "treatment time {t0} leaves no pre or no post period in {n_periods} periods"
            ),
            PanelError::OutcomeLenMismatch { expected, got } => {
                write!(f, "outcome buffer holds {got} values, panel shape needs {expected}")
            }
            PanelError::NonFiniteOutcome { unit, period } => {
                write!(f, "outcome for unit {unit} at period {period} is not finite")
            }
            PanelError::BadSpilloverIndex { index } => {
                write!(f, "spillover index {index} is not a valid donor index")
            }
        }
    }
}

impl core::error::Error for PanelError {}

impl Panel {
    /// Panel with an empty spillover set.
    pub fn new(
        n_units: usize,
        n_periods: usize,
        t0: usize,
        outcomes: Vec<f64>,
    ) -> Result<Self, PanelError> {
        Self::with_spillover(n_units, n_periods, t0, outcomes, Vec::new())
    }

    pub fn with_spillover(
        n_units: usize,
        n_periods: usize,
        t0: usize,
        outcomes: Vec<f64>,
        mut spillover: Vec<usize>,
    ) -> Result<Self, PanelError> {
        if n_units < 2 {
            return Err(PanelError::TooFewUnits { n_units });
        }
        if t0 == 0 || t0 >= n_periods {
            return Err(PanelError::BadTreatmentTime { t0, n_periods });
        }
        let expected = n_units * n_periods;
        if outcomes.len() != expected {
            return Err(PanelError::OutcomeLenMismatch { expected, got: outcomes.len() });
        }
        for (pos, v) in outcomes.iter().enumerate() {
            if !v.is_finite() {
                return Err(PanelError::NonFiniteOutcome {
                    unit: pos / n_periods,
                    period: pos % n_periods,
                });
            }
        }
        spillover.sort_unstable();
        for pair in spillover.windows(2) {
            if pair[0] == pair[1] {
                return Err(PanelError::BadSpilloverIndex { index: pair[0] });
            }
        }
        for &s in &spillover {
            if s == 0 || s >= n_units {
                return Err(PanelError::BadSpilloverIndex { index: s });
            }
        }
        Ok(Panel { n_units, n_periods, t0, outcomes, spillover })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_donors(&self) -> usize {
        self.n_units - 1
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn treatment_time(&self) -> usize {
        self.t0
    }

    pub fn n_pre(&self) -> usize {
        self.t0
    }

    pub fn n_post(&self) -> usize {
        self.n_periods - self.t0
    }

    pub fn row(&self, unit: usize) -> &[f64] {
        &self.outcomes[unit * self.n_periods..(unit + 1) * self.n_periods]
    }

    pub fn pre(&self, unit: usize) -> &[f64] {
        &self.row(unit)[..self.t0]
    }

    pub fn post(&self, unit: usize) -> &[f64] {
        &self.row(unit)[self.t0..]
    }

    pub fn outcome(&self, unit: usize, period: usize) -> f64 {
        self.outcomes[unit * self.n_periods + period]
    }

    /// Sorted spillover-flagged donor indices.
    pub fn spillover_units(&self) -> &[usize] {
        &self.spillover
    }

    pub fn is_spillover(&self, unit: usize) -> bool {
        self.spillover.binary_search(&unit).is_ok()
    }

    /// Donor indices not flagged as spillover-affected, ascending.
    pub fn clean_donors(&self) -> Vec<usize> {
        (1..self.n_units).filter(|u| !self.is_spillover(*u)).collect()
    }

    /// All donor indices, ascending.
    pub fn donors(&self) -> Vec<usize> {
        (1..self.n_units).collect()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn validates_shape() {
        assert!(matches!(
            Panel::new(1, 4, 2, vec![0.0; 4]),
            Err(PanelError::TooFewUnits { .. })
        ));
        assert!(matches!(
            Panel::new(2, 4, 0, vec![0.0; 8]),
            Err(PanelError::BadTreatmentTime { .. })
        ));
        assert!(matches!(
            Panel::new(2, 4, 4, vec![0.0; 8]),
            Err(PanelError::BadTreatmentTime { .. })
        ));
        assert!(matches!(
            Panel::new(2, 4, 2, vec![0.0; 7]),
            Err(PanelError::OutcomeLenMismatch { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn rejects_non_finite_and_locates_it() {
        let mut y = vec![0.0; 12];
        y[7] = f64::NAN;
        let err = Panel::new(3, 4, 2, y).unwrap_err();
        assert_eq!(err, PanelError::NonFiniteOutcome { unit: 1, period: 3 });
    }

    #[test]
    fn rejects_bad_spillover_indices() {
        let y = vec![0.0; 12];
        for bad in [vec![0], vec![3], vec![1, 1]] {
            assert!(matches!(
                Panel::with_spillover(3, 4, 2, y.clone(), bad),
                Err(PanelError::BadSpilloverIndex { .. })
            ));
        }
    }

    #[test]
    fn splits_pre_post_and_partitions_donors() {
        let y: Vec<f64> = (0..12).map(|v| v as f64).collect();
        let p = Panel::with_spillover(3, 4, 3, y, vec![2]).unwrap();
        assert_eq!(p.pre(1), &[4.0, 5.0, 6.0]);
        assert_eq!(p.post(1), &[7.0]);
        assert_eq!(p.n_pre(), 3);
        assert_eq!(p.n_post(), 1);
        assert_eq!(p.clean_donors(), vec![1]);
        assert_eq!(p.donors(), vec![1, 2]);
        assert!(p.is_spillover(2));
        assert!(!p.is_spillover(1));
    }
}
