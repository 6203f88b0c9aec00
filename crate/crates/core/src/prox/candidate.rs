//! Per-support-size candidates: prefix sums, the existence test, the
//! quartic-root direction and its objective value.

use crate::canonical::CanonicalForm;
use crate::error::QuarticError;
use crate::quartic::{LagrangeRoot, SphereQuartic};

/// Entries of a candidate direction must exceed this.
pub const POS_TOL: f64 = 1e-12;
/// A materialized direction further than this from the unit sphere means the
/// root belongs to a numerically degenerate configuration; it is discarded.
pub const SPHERE_TOL: f64 = 1e-8;

/// Running statistics of the leading `k` sorted magnitudes.
///
/// The centered second moment is accumulated with Welford's update so that
/// `k·S2 − S1²` stays accurate when the magnitudes are nearly equal.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PrefixSums {
    pub k: usize,
    /// `‖𝔶_{:k}‖₁`
    pub s1: f64,
    /// `‖𝔶_{:k}‖₂²`
    pub s2: f64,
    mean: f64,
    m2: f64,
}

impl PrefixSums {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.k += 1;
        self.s1 += v;
        self.s2 += v * v;
        let delta = v - self.mean;
        self.mean += delta / self.k as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Statistics of `sorted[..k]`, recomputed from scratch with a two-pass
    /// centered sum.
    pub fn of_prefix(sorted: &[f64], k: usize) -> Self {
        let head = &sorted[..k];
        let s1: f64 = head.iter().sum();
        let s2: f64 = head.iter().map(|v| v * v).sum();
        let mean = if k == 0 { 0.0 } else { s1 / k as f64 };
        let m2 = head.iter().map(|v| (v - mean).powi(2)).sum();
        Self { k, s1, s2, mean, m2 }
    }

    /// `k·S2 − S1²`.
    pub fn spread(&self) -> f64 {
        self.k as f64 * self.m2
    }
}

/// `(k·S2 − S1²)^{1/3}` and `S1^{2/3}`.
fn cube_roots(spread: f64, s1: f64) -> (f64, f64) {
    (spread.max(0.0).cbrt(), (s1 * s1).cbrt())
}

fn a_statistic(spread: f64, s1: f64, s2: f64) -> f64 {
    let (d, s) = cube_roots(spread, s1);
    (d + s) / s2
}

/// `A_k = ((k·S2 − S1²)^{1/3} + S1^{2/3}) / S2`.
pub fn existence_statistic(k: usize, s1: f64, s2: f64) -> f64 {
    a_statistic(k as f64 * s2 - s1 * s1, s1, s2)
}

/// `A_k ≤ μ^{-2/3}`: a local non-global minimizer on the `k`-sphere can
/// only exist when this holds.
pub fn existence_test(k: usize, s1: f64, s2: f64, mu: f64) -> bool {
    existence_statistic(k, s1, s2) <= prune_threshold(mu)
}

/// `μ^{-2/3}`.
pub(crate) fn prune_threshold(mu: f64) -> f64 {
    mu.powf(-2.0 / 3.0)
}

pub(crate) fn a_statistic_of(sums: &PrefixSums) -> f64 {
    a_statistic(sums.spread(), sums.s1, sums.s2)
}

pub(crate) fn passes_prune(sums: &PrefixSums, threshold: f64) -> bool {
    a_statistic_of(sums) <= threshold
}

/// One element of the finite candidate set: the local non-global minimizer
/// of `F` on the positive orthant of the `k`-sphere, padded with zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub k: usize,
    /// `λ*_k` and its gap to `S2`; `None` for `k = 1`, where `u = (1)`.
    pub root: Option<LagrangeRoot>,
    pub s1: f64,
    pub mu: f64,
    /// `F(ū) = −½⟨𝔶_{:k}, u⟩² + μ‖u‖₁`.
    pub f_value: f64,
}

impl Candidate {
    pub(crate) fn singleton(top: f64, mu: f64) -> Self {
        Self { k: 1, root: None, s1: top, mu, f_value: -0.5 * top * top + mu }
    }

    pub fn lambda_star(&self) -> Option<f64> {
        self.root.map(|r| r.lambda)
    }

    /// `u = μ/(λ*(S2 − λ*))·(S1·𝔶_{:k} − (S2 − λ*)·1)`.
    pub fn direction(&self, sorted: &[f64]) -> Vec<f64> {
        match self.root {
            None => vec![1.0],
            Some(r) => direction_from_root(&sorted[..self.k], self.s1, r, self.mu),
        }
    }

    /// The point `x_k` in the coordinates of the original `y`.
    pub fn point(&self, canon: &CanonicalForm) -> Vec<f64> {
        canon.reconstruct(&self.direction(&canon.sorted))
    }
}

fn direction_from_root(head: &[f64], s1: f64, root: LagrangeRoot, mu: f64) -> Vec<f64> {
    let scale = mu / (root.lambda * root.gap);
    head.iter().map(|&v| scale * (s1 * v - root.gap)).collect()
}

/// `F` evaluated directly on a direction.
pub(crate) fn f_direct(head: &[f64], u: &[f64], mu: f64) -> f64 {
    let inner: f64 = head.iter().zip(u).map(|(a, b)| a * b).sum();
    let l1: f64 = u.iter().sum();
    -0.5 * inner * inner + mu * l1
}

/// `F(ū_k)` in O(1) from `λ*`, `S1` and `S2`.
pub fn f_value_fast(k: usize, lambda_star: f64, s1: f64, s2: f64, mu: f64) -> f64 {
    let gap = s2 - lambda_star;
    let mu2 = mu * mu;
    -0.5 * mu2 * s1 * s1 / (gap * gap) + mu2 / (lambda_star * gap) * (s1 * s1 - k as f64 * gap)
}

/// [`f_value_fast`] using the separately tracked gap, and
/// `S1² − k·gap = k·λ − (k·S2 − S1²)` when `λ` is the smaller coordinate.
pub(crate) fn f_value_from_root(k: usize, root: LagrangeRoot, s1: f64, spread: f64, mu: f64) -> f64 {
    let kf = k as f64;
    let mu2 = mu * mu;
    let bracket = if root.lambda <= root.gap { kf * root.lambda - spread } else { s1 * s1 - kf * root.gap };
    -0.5 * mu2 * s1 * s1 / (root.gap * root.gap) + mu2 / (root.lambda * root.gap) * bracket
}

/// Smallest entry of `u`, which sits at index `k − 1`.
pub(crate) fn min_entry(yk: f64, s1: f64, root: LagrangeRoot, mu: f64) -> f64 {
    mu / (root.lambda * root.gap) * (s1 * yk - root.gap)
}

/// Outcome of the root search for one `k`, before the candidate is kept.
#[derive(Debug, Clone, Default)]
pub(crate) struct RootSearch {
    pub larger: Option<LagrangeRoot>,
    pub smaller: Option<LagrangeRoot>,
}

/// Candidate for support size `k` via the companion-matrix root route,
/// with `F` evaluated on the materialized direction.
///
/// Returns `Ok(None)` when the prune rejects `k`, no root lies in
/// `(S2 − 𝔶_k·S1, S2)`, or the direction is not strictly positive.
pub fn candidate_for_k(
    k: usize,
    canon: &CanonicalForm,
    sums: &PrefixSums,
    mu: f64,
) -> Result<Option<Candidate>, QuarticError> {
    Ok(candidate_with_roots(k, &canon.sorted, sums, mu, prune_threshold(mu))?.0)
}

pub(crate) fn candidate_with_roots(
    k: usize,
    sorted: &[f64],
    sums: &PrefixSums,
    mu: f64,
    threshold: f64,
) -> Result<(Option<Candidate>, RootSearch), QuarticError> {
    assert!(k >= 1 && k <= sorted.len(), "support size out of range");
    let yk = sorted[k - 1];
    if yk <= 0.0 {
        return Ok((None, RootSearch::default()));
    }
    if k == 1 {
        return Ok((Some(Candidate::singleton(yk, mu)), RootSearch::default()));
    }
    if !passes_prune(sums, threshold) {
        return Ok((None, RootSearch::default()));
    }
    let quartic = SphereQuartic::new(k, sums.s1, sums.s2, sums.spread(), mu)?;
    let roots = quartic.roots_in_interval(yk * sums.s1)?;
    let search = RootSearch {
        larger: roots.last().copied(),
        smaller: (roots.len() > 1).then(|| roots[0]),
    };
    let Some(root) = search.larger else {
        return Ok((None, search));
    };
    let head = &sorted[..k];
    let u = direction_from_root(head, sums.s1, root, mu);
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if u[k - 1] <= POS_TOL || (norm - 1.0).abs() > SPHERE_TOL {
        return Ok((None, search));
    }
    let f_value = f_direct(head, &u, mu);
    Ok((Some(Candidate { k, root: Some(root), s1: sums.s1, mu, f_value }), search))
}

/// Candidate for support size `k` from incrementally maintained sums:
/// bracketed root, O(1) objective, no direction materialized.
pub(crate) fn candidate_fast(
    k: usize,
    yk: f64,
    sums: &PrefixSums,
    mu: f64,
    threshold: f64,
    want_smaller: bool,
) -> Result<(Option<Candidate>, RootSearch), QuarticError> {
    if yk <= 0.0 {
        return Ok((None, RootSearch::default()));
    }
    if k == 1 {
        return Ok((Some(Candidate::singleton(yk, mu)), RootSearch::default()));
    }
    let spread = sums.spread();
    let (d13, s23) = cube_roots(spread, sums.s1);
    if (d13 + s23) / sums.s2 > threshold {
        return Ok((None, RootSearch::default()));
    }
    let quartic = SphereQuartic::new(k, sums.s1, sums.s2, spread, mu)?;
    let max_gap = yk * sums.s1;
    let mut search = RootSearch { larger: quartic.larger_root_from(max_gap, s23 / d13)?, smaller: None };
    if want_smaller {
        search.smaller = quartic.smaller_root(max_gap)?;
    }
    let Some(root) = search.larger else {
        return Ok((None, search));
    };
    if min_entry(yk, sums.s1, root, mu) <= POS_TOL {
        return Ok((None, search));
    }
    let f_value = f_value_from_root(k, root, sums.s1, spread, mu);
    Ok((Some(Candidate { k, root: Some(root), s1: sums.s1, mu, f_value }), search))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;

    const ZIGZAG: [f64; 8] = [1.0, 1.0, 0.92, 0.92, 0.8, 0.8, 0.8, 0.5];

    fn passing(sorted: &[f64], threshold: f64) -> Vec<usize> {
        let mut sums = PrefixSums::new();
        let mut out = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            sums.push(v);
            if i >= 1 && existence_statistic(i + 1, sums.s1, sums.s2) <= threshold {
                out.push(i + 1);
            }
        }
        out
    }

    #[test]
    fn zigzag_existence_sets() {
        assert_eq!(passing(&ZIGZAG, 0.795), vec![2, 4, 5, 6, 7]);
        assert_eq!(passing(&ZIGZAG, 0.755), vec![4, 6, 7]);
        let mu = 0.795_f64.powf(-1.5);
        let mut sums = PrefixSums::new();
        sums.push(1.0);
        sums.push(1.0);
        assert!(existence_test(2, sums.s1, sums.s2, mu));
        sums.push(0.92);
        assert!(!existence_test(3, sums.s1, sums.s2, mu));
    }

    #[test]
    fn equal_block_threshold() {
        // A_k ≤ μ^{-2/3} reduces to μ ≤ √k·y² for a flat block
        for k in 2..6 {
            let y = 1.3_f64;
            let edge = (k as f64).sqrt() * y * y;
            let (s1, s2) = (k as f64 * y, k as f64 * y * y);
            assert!(existence_test(k, s1, s2, edge * 0.999));
            assert!(!existence_test(k, s1, s2, edge * 1.001));
        }
    }

    #[test]
    fn prefix_sums_track_spread() {
        let v = [5.0, 4.0, 4.0, 1.5, 1e-3];
        let mut sums = PrefixSums::new();
        for (i, &x) in v.iter().enumerate() {
            sums.push(x);
            let fresh = PrefixSums::of_prefix(&v, i + 1);
            assert!((sums.s1 - fresh.s1).abs() < 1e-12);
            assert!((sums.spread() - fresh.spread()).abs() < 1e-12);
            let naive = (i + 1) as f64 * sums.s2 - sums.s1 * sums.s1;
            assert!((sums.spread() - naive).abs() < 1e-9);
        }
        let mut flat = PrefixSums::new();
        for _ in 0..7 {
            flat.push(0.1);
        }
        assert_eq!(flat.spread(), 0.0);
    }

    #[test]
    fn singleton_candidate() {
        let canon = canonicalize(&[4.0, -1.0]);
        let c = candidate_for_k(1, &canon, &PrefixSums::of_prefix(&canon.sorted, 1), 1.0).unwrap().unwrap();
        assert_eq!(c.f_value, -7.0);
        assert_eq!(c.direction(&canon.sorted), vec![1.0]);
    }

    #[test]
    fn flat_block_candidate() {
        for &(y, mu) in &[(1.0_f64, 0.5_f64), (2.0, 3.0), (0.5, 0.2)] {
            let k = 4;
            let canon = canonicalize(&vec![y; k]);
            let sums = PrefixSums::of_prefix(&canon.sorted, k);
            let c = candidate_for_k(k, &canon, &sums, mu).unwrap().unwrap();
            let expect = k as f64 * y * y - (k as f64).sqrt() * mu;
            assert!((c.lambda_star().unwrap() - expect).abs() < 1e-9);
            for ui in c.direction(&canon.sorted) {
                assert!((ui - 0.5).abs() < 1e-10);
            }
            // F = −½·k·y² + μ·√k
            let f = -0.5 * k as f64 * y * y + mu * (k as f64).sqrt();
            assert!((c.f_value - f).abs() < 1e-10);
            let fast = f_value_fast(k, c.lambda_star().unwrap(), sums.s1, sums.s2, mu);
            assert!((fast - f).abs() < 1e-10);
        }
        let canon = canonicalize(&[1.0; 3]);
        let sums = PrefixSums::of_prefix(&canon.sorted, 3);
        assert!(candidate_for_k(3, &canon, &sums, 3f64.sqrt() * 1.01).unwrap().is_none());
    }

    #[test]
    fn fast_objective_matches_direct_evaluation() {
        let sorted = [3.1, 2.2, 2.0, 0.9, 0.4];
        for mu in [0.01, 0.3, 1.0, 2.5] {
            for k in 2..=5 {
                let sums = PrefixSums::of_prefix(&sorted, k);
                let canon = canonicalize(&sorted);
                let Some(c) = candidate_for_k(k, &canon, &sums, mu).unwrap() else { continue };
                let r = c.root.unwrap();
                let fast = f_value_fast(k, r.lambda, sums.s1, sums.s2, mu);
                let stable = f_value_from_root(k, r, sums.s1, sums.spread(), mu);
                assert!((fast - c.f_value).abs() <= 1e-8 * (1.0 + c.f_value.abs()));
                assert!((stable - c.f_value).abs() <= 1e-10 * (1.0 + c.f_value.abs()));
            }
        }
    }

    #[test]
    fn zero_magnitude_has_no_candidate() {
        let canon = canonicalize(&[2.0, 0.0]);
        let sums = PrefixSums::of_prefix(&canon.sorted, 2);
        assert!(candidate_for_k(2, &canon, &sums, 0.1).unwrap().is_none());
    }
}
