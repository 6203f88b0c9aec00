//! The proximity operator: candidate enumeration, selection against the
//! origin, and reconstruction in the original coordinates.

mod candidate;
mod sweep;

pub use candidate::{
    candidate_for_k, existence_statistic, existence_test, f_value_fast, Candidate, PrefixSums, POS_TOL, SPHERE_TOL,
};
pub use sweep::{enumerate, tie_tol, Enumeration, KFailure, Mode, SweepDiagnostics, SweepRecord};

use crate::canonical::{canonicalize, CanonicalForm};
use crate::error::Result;
use crate::problem::ProxProblem;

/// One minimizer of `Q_y`. Its point is rebuilt on demand through
/// [`ProxResult::member_point`], so a large tie set costs O(1) per member.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxMember {
    /// Support size; 0 for the origin.
    pub k: usize,
    /// `½‖y‖² + F(ū_k)`, or `μ·a` for the origin.
    pub q: f64,
    candidate: Option<Candidate>,
}

impl ProxMember {
    pub fn is_zero(&self) -> bool {
        self.candidate.is_none()
    }
}

/// The (possibly set-valued) proximity operator at `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    /// Nonzero minimizers by ascending `k`, then the origin if it ties.
    pub members: Vec<ProxMember>,
    pub contains_zero: bool,
    pub is_set_valued: bool,
    /// Support sizes skipped because their quartic could not be solved.
    pub failures: Vec<KFailure>,
    canon: CanonicalForm,
}

impl ProxResult {
    fn zero(problem: &ProxProblem, canon: CanonicalForm) -> Self {
        Self {
            members: vec![zero_member(problem)],
            contains_zero: true,
            is_set_valued: false,
            failures: Vec::new(),
            canon,
        }
    }

    /// Member `i` in the coordinates of `y`.
    pub fn member_point(&self, i: usize) -> Vec<f64> {
        match &self.members[i].candidate {
            Some(c) => c.point(&self.canon),
            None => vec![0.0; self.canon.len()],
        }
    }

    /// The first member; the nonzero one when the origin ties.
    pub fn point(&self) -> Vec<f64> {
        self.member_point(0)
    }

    /// Every member, materialized.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.members.len()).map(|i| self.member_point(i)).collect()
    }

    pub fn q(&self) -> f64 {
        self.members[0].q
    }
}

fn zero_member(problem: &ProxProblem) -> ProxMember {
    ProxMember { k: 0, q: problem.q_at_zero(), candidate: None }
}

/// Picks the minimizers among `candidates` and compares them with the origin.
///
/// `F` values within [`tie_tol`] of the best one all survive; the origin joins
/// (or wins) when `F_best` is within the same tolerance of (or above) `μ·a`.
pub fn select(candidates: &[Candidate], canon: &CanonicalForm, problem: &ProxProblem) -> ProxResult {
    select_owned(candidates, canon.clone(), problem)
}

fn select_owned(candidates: &[Candidate], canon: CanonicalForm, problem: &ProxProblem) -> ProxResult {
    let Some(f_best) = candidates.iter().map(|c| c.f_value).min_by(f64::total_cmp) else {
        return ProxResult::zero(problem, canon);
    };
    let tol = tie_tol(f_best);
    let at_zero = problem.mu * problem.a;
    if f_best > at_zero + tol {
        return ProxResult::zero(problem, canon);
    }

    let half_norm_sq = 0.5 * canon.sorted.iter().map(|v| v * v).sum::<f64>();
    let mut winners: Vec<&Candidate> = candidates.iter().filter(|c| c.f_value <= f_best + tol).collect();
    winners.sort_by_key(|c| c.k);
    winners.dedup_by_key(|c| c.k);
    let mut members: Vec<ProxMember> = winners
        .into_iter()
        .map(|c| ProxMember { k: c.k, q: half_norm_sq + c.f_value, candidate: Some(*c) })
        .collect();
    let contains_zero = (f_best - at_zero).abs() <= tol;
    if contains_zero {
        members.push(zero_member(problem));
    }
    ProxResult { is_set_valued: members.len() > 1, members, contains_zero, failures: Vec::new(), canon }
}

/// `prox_{μh}(y)` with the O(n) enumeration.
pub fn prox(problem: &ProxProblem) -> Result<ProxResult> {
    prox_with_mode(problem, Mode::Optimized)
}

pub fn prox_with_mode(problem: &ProxProblem, mode: Mode) -> Result<ProxResult> {
    problem.check()?;
    let canon = canonicalize(&problem.y);
    if canon.nonzero_len() == 0 {
        return Ok(ProxResult::zero(problem, canon));
    }
    Ok(prox_owned(canon, problem, mode))
}

/// Selection step on an already sorted input; exposed so that the scan can be
/// timed separately from the sort.
pub fn prox_canonical(canon: &CanonicalForm, problem: &ProxProblem, mode: Mode) -> ProxResult {
    prox_owned(canon.clone(), problem, mode)
}

fn prox_owned(canon: CanonicalForm, problem: &ProxProblem, mode: Mode) -> ProxResult {
    let (best, failures) = sweep::scan_best(&canon, problem.mu, mode);
    let mut result = select_owned(&best, canon, problem);
    result.failures = failures;
    result
}
