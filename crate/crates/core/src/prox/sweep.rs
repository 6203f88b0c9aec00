//! Scan over support sizes `k = 1..n`.

use std::fmt;
use std::str::FromStr;

use crate::canonical::CanonicalForm;
use crate::error::QuarticError;
use crate::prox::candidate::{
    a_statistic_of, candidate_fast, candidate_with_roots, passes_prune, prune_threshold, Candidate, PrefixSums, RootSearch,
};

/// Which enumeration to run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Mode {
    /// Recompute prefix statistics per `k`, solve `ψ_k` via the companion
    /// matrix, evaluate `F` on the materialized direction. O(n²).
    Naive,
    /// Incremental prefix sums, bracketed root, O(1) objective. O(n) after
    /// the sort.
    #[default]
    Optimized,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Mode::Naive),
            "optimized" => Ok(Mode::Optimized),
            other => Err(format!("unknown mode `{other}` (expected naive or optimized)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Naive => "naive",
            Mode::Optimized => "optimized",
        })
    }
}

/// A `k` whose root search failed numerically; the `k` is skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct KFailure {
    pub k: usize,
    pub error: QuarticError,
}

/// Everything computed for one support size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k: usize,
    /// `A_k`; `None` when `𝔶 = 0`.
    pub a_k: Option<f64>,
    /// Whether the existence test passed (always true for `k = 1`, false
    /// once the magnitudes reach zero).
    pub exists: bool,
    pub lambda_star: Option<f64>,
    /// The other root of `ψ_k` in the interval, when there are two.
    pub smaller_root: Option<f64>,
    pub f_value: Option<f64>,
    /// `Q_y(x_k) = ½‖y‖² + F(ū_k)`.
    pub q_value: Option<f64>,
    pub failure: Option<QuarticError>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepDiagnostics {
    pub records: Vec<SweepRecord>,
}

impl SweepDiagnostics {
    pub fn existing(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.exists).map(|r| r.k).collect()
    }

    pub fn with_candidate(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.f_value.is_some()).map(|r| r.k).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Enumeration {
    pub candidates: Vec<Candidate>,
    pub failures: Vec<KFailure>,
    pub diagnostics: SweepDiagnostics,
}

struct Step {
    k: usize,
    sums: PrefixSums,
    outcome: Result<(Option<Candidate>, RootSearch), QuarticError>,
}

/// Drives the per-`k` work and hands each step to `visit`.
fn scan(canon: &CanonicalForm, mu: f64, mode: Mode, want_smaller: bool, mut visit: impl FnMut(Step)) {
    let sorted = &canon.sorted;
    let threshold = prune_threshold(mu);
    let mut sums = PrefixSums::new();
    for (i, &yk) in sorted.iter().enumerate() {
        let k = i + 1;
        let step_sums = match mode {
            Mode::Optimized => {
                sums.push(yk);
                sums
            }
            Mode::Naive => PrefixSums::of_prefix(sorted, k),
        };
        let outcome = match mode {
            Mode::Optimized => candidate_fast(k, yk, &step_sums, mu, threshold, want_smaller),
            Mode::Naive => candidate_with_roots(k, sorted, &step_sums, mu, threshold),
        };
        visit(Step { k, sums: step_sums, outcome });
    }
}

/// All candidates with the per-`k` diagnostic sweep.
pub fn enumerate(canon: &CanonicalForm, mu: f64, mode: Mode) -> Enumeration {
    let half_norm_sq = 0.5 * canon.sorted.iter().map(|v| v * v).sum::<f64>();
    let threshold = prune_threshold(mu);
    let mut out = Enumeration::default();
    scan(canon, mu, mode, true, |step| {
        let yk = canon.sorted[step.k - 1];
        let a_k = (step.sums.s2 > 0.0).then(|| a_statistic_of(&step.sums));
        let exists = yk > 0.0 && (step.k == 1 || passes_prune(&step.sums, threshold));
        let mut record = SweepRecord {
            k: step.k,
            a_k,
            exists,
            lambda_star: None,
            smaller_root: None,
            f_value: None,
            q_value: None,
            failure: None,
        };
        match step.outcome {
            Ok((candidate, search)) => {
                record.smaller_root = search.smaller.map(|r| r.lambda);
                if let Some(c) = candidate {
                    record.lambda_star = c.lambda_star();
                    record.f_value = Some(c.f_value);
                    record.q_value = Some(half_norm_sq + c.f_value);
                    out.candidates.push(c);
                }
            }
            Err(error) => {
                record.failure = Some(error.clone());
                out.failures.push(KFailure { k: step.k, error });
            }
        }
        out.diagnostics.records.push(record);
    });
    out
}

/// `1e-9·(1 + |F|)`: objective values this close are treated as equal.
pub fn tie_tol(f_best: f64) -> f64 {
    1e-9 * (1.0 + f_best.abs())
}

/// Candidates within the tie tolerance of the running minimum. The running
/// set is pruned whenever it doubles, so the scan stays linear even when many
/// `k` tie.
pub(crate) fn scan_best(canon: &CanonicalForm, mu: f64, mode: Mode) -> (Vec<Candidate>, Vec<KFailure>) {
    let mut best: Vec<Candidate> = Vec::new();
    let mut best_f = f64::INFINITY;
    let mut prune_at = 16;
    let mut failures = Vec::new();
    let prune = |best: &mut Vec<Candidate>, best_f: f64| {
        let tol = tie_tol(best_f);
        best.retain(|b| b.f_value <= best_f + tol);
    };
    scan(canon, mu, mode, false, |step| match step.outcome {
        Ok((Some(c), _)) => {
            if c.f_value <= best_f + tie_tol(best_f) {
                best_f = best_f.min(c.f_value);
                best.push(c);
                if best.len() >= prune_at {
                    prune(&mut best, best_f);
                    prune_at = 2 * best.len().max(8);
                }
            }
        }
        Ok((None, _)) => {}
        Err(error) => failures.push(KFailure { k: step.k, error }),
    });
    prune(&mut best, best_f);
    (best, failures)
}
