//! Problem definition and the prox objective.

use crate::error::ProblemError;

/// A single proximity-operator query: minimize `½‖x − y‖² + μ·h(x)` where
/// `h(x) = ‖x‖₁/‖x‖₂` for `x ≠ 0` and `h(0) = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxProblem {
    pub y: Vec<f64>,
    pub mu: f64,
    pub a: f64,
}

impl ProxProblem {
    pub fn new(y: Vec<f64>, mu: f64, a: f64) -> Result<Self, ProblemError> {
        Self { y, mu, a }.validate()
    }

    /// Checks the invariants and hands the problem back unchanged.
    pub fn validate(self) -> Result<Self, ProblemError> {
        self.check().map(|()| self)
    }

    pub fn check(&self) -> Result<(), ProblemError> {
        if self.y.is_empty() {
            return Err(ProblemError::EmptyVector);
        }
        if let Some((index, &value)) = self.y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(ProblemError::NonFinite { index, value });
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(ProblemError::BadMu(self.mu));
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(ProblemError::BadA(self.a));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// `½‖y‖²`, the part of the objective shared by every candidate.
    pub fn half_norm_sq(&self) -> f64 {
        0.5 * self.y.iter().map(|v| v * v).sum::<f64>()
    }

    /// Objective value at the origin, `½‖y‖² + μa`.
    pub fn q_at_zero(&self) -> f64 {
        self.half_norm_sq() + self.mu * self.a
    }
}

/// The ratio `‖x‖₁/‖x‖₂`, with value `a` at the origin.
pub fn ratio(x: &[f64], a: f64) -> f64 {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return a;
    }
    // scale before squaring so huge entries don't overflow
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let l2 = peak * x.iter().map(|v| (v / peak).powi(2)).sum::<f64>().sqrt();
    l1 / l2
}

/// `Q_y(x) = ½‖x − y‖² + μ·h(x)`.
pub fn q_value(x: &[f64], problem: &ProxProblem) -> f64 {
    assert_eq!(x.len(), problem.y.len(), "x and y must have the same length");
    let dist: f64 = x.iter().zip(&problem.y).map(|(xi, yi)| (xi - yi).powi(2)).sum();
    0.5 * dist + problem.mu * ratio(x, problem.a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_well_formed_input() {
        let p = ProxProblem { y: vec![1.0, 2.0], mu: 1.0, a: 1.0 };
        assert_eq!(p.clone().validate(), Ok(p));
    }

    #[test]
    fn validate_rejects_bad_inputs() {
        let bad = |y: Vec<f64>, mu, a| ProxProblem { y, mu, a }.validate().unwrap_err();
        assert_eq!(bad(vec![1.0], 0.0, 1.0), ProblemError::BadMu(0.0));
        assert!(matches!(bad(vec![1.0], -2.0, 1.0), ProblemError::BadMu(_)));
        assert!(matches!(bad(vec![1.0], f64::INFINITY, 1.0), ProblemError::BadMu(_)));
        assert!(matches!(bad(vec![f64::NAN], 1.0, 1.0), ProblemError::NonFinite { index: 0, .. }));
        assert!(matches!(
            bad(vec![0.0, f64::NEG_INFINITY], 1.0, 1.0),
            ProblemError::NonFinite { index: 1, .. }
        ));
        assert_eq!(bad(vec![1.0], 1.0, 1.5), ProblemError::BadA(1.5));
        assert!(matches!(bad(vec![1.0], 1.0, f64::NAN), ProblemError::BadA(_)));
        assert_eq!(bad(vec![], 1.0, 1.0), ProblemError::EmptyVector);
    }

    #[test]
    fn q_value_at_origin() {
        let p = ProxProblem::new(vec![3.0, 4.0], 2.0, 1.0).unwrap();
        assert_eq!(q_value(&[0.0, 0.0], &p), 14.5);
        assert_eq!(p.q_at_zero(), 14.5);
    }

    #[test]
    fn q_value_table_points() {
        let p = ProxProblem::new(vec![4.0, 4.0, 3.0, 3.0, 2.0, 2.0], 1.0, 1.0).unwrap();
        let x = [4.033, 4.033, 2.990, 2.990, 1.948, 1.948];
        assert!((q_value(&x, &p) - 2.360).abs() <= 1e-3);

        let p = ProxProblem::new(vec![9.0, 7.0, 6.0, 4.0, 2.0], 1.0, 1.0).unwrap();
        let x = [9.026, 7.004, 5.993, 3.970, 1.948];
        assert!((q_value(&x, &p) - 2.051).abs() <= 1e-3);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let x = [1e300, -3e299, 0.0];
        let r = ratio(&x, 1.0);
        let small: Vec<f64> = x.iter().map(|v| v * 1e-300).collect();
        assert!((r - ratio(&small, 1.0)).abs() < 1e-14);
        assert_eq!(ratio(&[0.0, -0.0], 0.25), 0.25);
    }
}
