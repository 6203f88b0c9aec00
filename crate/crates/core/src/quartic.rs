//! Real roots of the monic quartic `ψ_k` on an open interval.
//!
//! Two entry points share the same acceptance rules:
//!
//! * [`roots_in_interval`] works on raw [`QuarticCoeffs`]. Root estimates come
//!   from the eigenvalues of the companion matrix, are Newton-polished against
//!   `ψ` and must pass a relative residual test.
//! * [`SphereQuartic`] is `ψ_k` assembled from the prefix statistics of the
//!   sorted magnitudes. It evaluates `ψ_k(λ)` in a cancellation-free form and
//!   tracks every root as a [`LagrangeRoot`] pair `(λ, S2 − λ)`, so that roots
//!   pressed against either end of `(0, S2)` keep full relative precision.

use nalgebra::DMatrix;

use crate::error::QuarticError;

/// Relative residual accepted for a polished root.
pub const TOL_RESIDUAL: f64 = 1e-10;
/// Slack on `S1² ≤ k·S2` before prefix sums are declared corrupt.
pub const CS_SLACK: f64 = 1e-12;
/// Eigenvalues with `|im| ≤ IMAG_TOL·(1 + |re|)` (in scaled units) count as real.
pub const IMAG_TOL: f64 = 1e-8;
/// Polished roots closer than `MERGE_TOL·scale` are one root.
pub const MERGE_TOL: f64 = 1e-9;
pub const MAX_POLISH_ITERS: usize = 50;

const MAX_BRACKET_ITERS: usize = 200;

/// `ψ(λ) = a0 + a1·λ + a2·λ² + a3·λ³ + λ⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    a0: f64,
    a1: f64,
    a2: f64,
    a3: f64,
}

impl QuarticCoeffs {
    /// Monic quartic with the given lower coefficients.
    ///
    /// Panics if a coefficient is not finite.
    pub fn monic(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        assert!(
            [a0, a1, a2, a3].iter().all(|c| c.is_finite()),
            "quartic coefficients must be finite"
        );
        Self { a0, a1, a2, a3 }
    }

    /// `[a0, a1, a2, a3, a4]` with `a4 = 1`.
    pub fn coefficients(&self) -> [f64; 5] {
        [self.a0, self.a1, self.a2, self.a3, 1.0]
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((x + self.a3) * x + self.a2) * x + self.a1) * x + self.a0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        ((4.0 * x + 3.0 * self.a3) * x + 2.0 * self.a2) * x + self.a1
    }

    /// Largest term magnitude at `x`, floored at one.
    pub fn term_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        [1.0, self.a0.abs(), self.a1.abs() * ax, self.a2.abs() * ax * ax, self.a3.abs() * ax.powi(3), ax.powi(4)]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// `|ψ(x)|` accepted for a root at `x`.
    pub fn residual_bound(&self, x: f64) -> f64 {
        TOL_RESIDUAL * self.term_scale(x)
    }
}

/// `ψ_k` coefficients from the prefix sums `S1 = ‖𝔶_{:k}‖₁`, `S2 = ‖𝔶_{:k}‖₂²`.
pub fn coeffs_from_sums(k: usize, s1: f64, s2: f64, mu: f64) -> Result<QuarticCoeffs, QuarticError> {
    Ok(SphereQuartic::from_sums(k, s1, s2, mu)?.coeffs())
}

/// Distinct real roots of a quartic strictly inside an open interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalRoots {
    /// Ascending.
    pub roots: Vec<f64>,
    /// `|ψ(root)|`, parallel to `roots`.
    pub residuals: Vec<f64>,
}

impl IntervalRoots {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.roots.last().copied()
    }
}

/// Real roots of the monic polynomial with ascending lower coefficients
/// `lower` (leading coefficient 1 implied), estimated from the eigenvalues of
/// its companion matrix after substituting `x = scale·t`.
fn companion_real_roots(lower: &[f64], scale: f64) -> Result<Vec<f64>, QuarticError> {
    let deg = lower.len();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let b: Vec<f64> = lower.iter().enumerate().map(|(i, c)| c / scale.powi((deg - i) as i32)).collect();
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for (i, bi) in b.iter().enumerate() {
        m[(i, deg - 1)] = -bi;
    }
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(QuarticError::PolishDivergence {
        estimate: f64::NAN,
        residual: f64::NAN,
    })?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= IMAG_TOL * (1.0 + z.re.abs()))
        .map(|z| z.re * scale)
        .collect())
}

/// Every distinct real root of `c` in the open interval `(lo, hi)`.
///
/// Roots that numerically coincide with an endpoint which is itself a root
/// are treated as lying on the boundary and dropped.
pub fn roots_in_interval(c: &QuarticCoeffs, lo: f64, hi: f64) -> Result<IntervalRoots, QuarticError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuarticError::BadInterval { lo, hi });
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let merge = MERGE_TOL * scale;
    let full = c.coefficients();

    // strip exact roots at zero before the eigen solve, they are defective
    // eigenvalues and would come back smeared over ±√ε
    let zeros = full.iter().take_while(|&&a| a == 0.0).count();
    let reduced = &full[zeros..4];

    let mut found: Vec<f64> = Vec::new();
    if zeros > 0 && lo < 0.0 && 0.0 < hi {
        found.push(0.0);
    }
    let reduced_eval = |x: f64| reduced.iter().rev().fold(1.0, |acc, &a| acc * x + a);
    let reduced_slope = |x: f64| {
        let deg = reduced.len();
        let mut d = deg as f64;
        for (i, &a) in reduced.iter().enumerate().skip(1).rev() {
            d = d * x + i as f64 * a;
        }
        d
    };

    for estimate in companion_real_roots(reduced, scale)? {
        if estimate <= lo - 1e-6 * scale || estimate >= hi + 1e-6 * scale {
            continue;
        }
        let mut r = estimate;
        for _ in 0..MAX_POLISH_ITERS {
            let f = reduced_eval(r);
            let d = reduced_slope(r);
            if f == 0.0 || d == 0.0 || !d.is_finite() {
                break;
            }
            let step = f / d;
            r -= step;
            if step.abs() <= 4.0 * f64::EPSILON * r.abs().max(merge) {
                break;
            }
        }
        let residual = c.eval(r).abs();
        if !(residual <= c.residual_bound(r)) {
            return Err(QuarticError::PolishDivergence { estimate, residual });
        }
        if lo < r && r < hi {
            found.push(r);
        }
    }

    for end in [lo, hi] {
        if c.eval(end).abs() <= c.residual_bound(end) {
            found.retain(|r| (r - end).abs() > merge);
        }
    }
    found.sort_by(f64::total_cmp);
    found.dedup_by(|b, a| (*b - *a).abs() <= merge);

    let residuals = found.iter().map(|&r| c.eval(r).abs()).collect();
    Ok(IntervalRoots { roots: found, residuals })
}

/// A root of `ψ_k` stored together with its distance to `S2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeRoot {
    /// The multiplier `λ`.
    pub lambda: f64,
    /// `S2 − λ`, computed without cancellation.
    pub gap: f64,
    /// `|ψ_k(λ)|` evaluated on the coefficient form.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    lambda: f64,
    gap: f64,
}

impl Pair {
    /// Moves `λ` by `delta`, updating whichever coordinate is smaller directly.
    fn shifted(self, delta: f64, s2: f64) -> Pair {
        if self.lambda <= self.gap {
            let lambda = self.lambda + delta;
            Pair { lambda, gap: s2 - lambda }
        } else {
            let gap = self.gap - delta;
            Pair { lambda: s2 - gap, gap }
        }
    }

    fn small(self) -> f64 {
        self.lambda.abs().min(self.gap.abs())
    }

    /// Distance to `other`, measured in whichever coordinate of `self` is
    /// smaller so it is not swamped by rounding in the other.
    fn distance(self, other: Pair) -> f64 {
        if self.lambda <= self.gap {
            (self.lambda - other.lambda).abs()
        } else {
            (self.gap - other.gap).abs()
        }
    }
}

/// `ψ_k` built from prefix statistics of the sorted magnitudes.
///
/// With `s = S2 − λ` and `D = k·S2 − S1²`,
/// `ψ_k(λ) = λ²s² − μ²·(k·(s − S1²/k)² + S1²·D/k)`,
/// which expands to the monic coefficient form returned by [`Self::coeffs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuartic {
    k: usize,
    s1: f64,
    s2: f64,
    spread: f64,
    mu: f64,
}

impl SphereQuartic {
    /// `spread` is `k·S2 − S1² = k·Σ(𝔶ᵢ − mean)²`; pass it when it was
    /// accumulated stably, otherwise use [`Self::from_sums`].
    pub fn new(k: usize, s1: f64, s2: f64, spread: f64, mu: f64) -> Result<Self, QuarticError> {
        let k_s2 = k as f64 * s2;
        if spread < -CS_SLACK * k_s2 || !spread.is_finite() {
            return Err(QuarticError::CauchySchwarzViolated { k, s1_sq: s1 * s1, k_s2 });
        }
        Ok(Self { k, s1, s2, spread: spread.max(0.0), mu })
    }

    pub fn from_sums(k: usize, s1: f64, s2: f64, mu: f64) -> Result<Self, QuarticError> {
        Self::new(k, s1, s2, k as f64 * s2 - s1 * s1, mu)
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn coeffs(&self) -> QuarticCoeffs {
        let (k, mu2, s2, d) = (self.k as f64, self.mu * self.mu, self.s2, self.spread);
        QuarticCoeffs::monic(-mu2 * s2 * d, 2.0 * mu2 * d, s2 * s2 - k * mu2, -2.0 * s2)
    }

    fn pair_at(&self, lambda: f64) -> Pair {
        Pair { lambda, gap: self.s2 - lambda }
    }

    fn eval_pair(&self, p: Pair) -> f64 {
        self.eval_scaled(p).0
    }

    /// `ψ_k` together with the magnitude of its two terms, which sets the
    /// rounding floor of the evaluation.
    fn eval_scaled(&self, p: Pair) -> (f64, f64) {
        let k = self.k as f64;
        let c = self.s1 * self.s1 / k;
        let lg = p.lambda * p.gap;
        let lead = lg * lg;
        let tail = self.mu * self.mu * (k * (p.gap - c).powi(2) + c * self.spread);
        (lead - tail, lead + tail)
    }

    /// `dψ_k/dλ`.
    fn slope_pair(&self, p: Pair) -> f64 {
        let k = self.k as f64;
        let c = self.s1 * self.s1 / k;
        2.0 * p.lambda * p.gap * (p.gap - p.lambda) + 2.0 * self.mu * self.mu * k * (p.gap - c)
    }

    /// `ψ_k(λ)` evaluated from `λ` and `S2 − λ` separately.
    pub fn eval(&self, lambda: f64, gap: f64) -> f64 {
        self.eval_pair(Pair { lambda, gap })
    }

    fn finish(&self, p: Pair) -> LagrangeRoot {
        LagrangeRoot { lambda: p.lambda, gap: p.gap, residual: self.coeffs().eval(p.lambda).abs() }
    }

    fn accept(&self, estimate: f64, p: Pair) -> Result<LagrangeRoot, QuarticError> {
        let c = self.coeffs();
        let residual = c.eval(p.lambda).abs();
        if residual <= c.residual_bound(p.lambda) {
            Ok(LagrangeRoot { lambda: p.lambda, gap: p.gap, residual })
        } else {
            Err(QuarticError::PolishDivergence { estimate, residual })
        }
    }

    /// The minimizer `λ0` of `φ(λ) = 1 − ψ_k(λ)/(λ²(S2 − λ)²)` on `(0, S2)`.
    /// Roots of `ψ_k` in `(0, S2)` exist iff `ψ_k(λ0) ≥ 0`; the larger one
    /// lies in `[λ0, S2)`.
    pub fn stationary_point(&self) -> LagrangeRoot {
        self.finish(self.stationary_pair())
    }

    fn stationary_pair(&self) -> Pair {
        if self.spread == 0.0 {
            Pair { lambda: 0.0, gap: self.s2 }
        } else {
            self.pair_from_ratio((self.s1 * self.s1 / self.spread).cbrt())
        }
    }

    fn pair_from_ratio(&self, ratio: f64) -> Pair {
        Pair { lambda: self.s2 / (1.0 + ratio), gap: self.s2 * ratio / (1.0 + ratio) }
    }

    /// Equal leading magnitudes: `ψ_k = λ²((S2 − λ)² − kμ²)`, whose only
    /// root that can sit in `(0, S2)` has gap `√k·μ`.
    fn flat_root(&self, max_gap: f64) -> Option<LagrangeRoot> {
        let gap = (self.k as f64).sqrt() * self.mu;
        (gap < max_gap && gap < self.s2).then(|| self.finish(Pair { lambda: self.s2 - gap, gap }))
    }

    /// Roots of `ψ_k` with `λ ∈ (S2 − max_gap, S2)`, i.e. gap in `(0, max_gap)`,
    /// from companion-matrix estimates polished in pair coordinates.
    pub fn roots_in_interval(&self, max_gap: f64) -> Result<Vec<LagrangeRoot>, QuarticError> {
        if self.spread == 0.0 {
            return Ok(self.flat_root(max_gap).into_iter().collect());
        }
        let c = self.coeffs();
        let lower = [c.a0, c.a1, c.a2, c.a3];
        let lo = self.s2 - max_gap;
        let merge = MERGE_TOL * self.s2;

        let mut found: Vec<LagrangeRoot> = Vec::new();
        for estimate in companion_real_roots(&lower, self.s2)? {
            if estimate <= lo - 1e-6 * self.s2 || estimate >= self.s2 * (1.0 + 1e-6) {
                continue;
            }
            let mut p = self.pair_at(estimate);
            for _ in 0..MAX_POLISH_ITERS {
                let f = self.eval_pair(p);
                let d = self.slope_pair(p);
                if f == 0.0 || d == 0.0 || !d.is_finite() {
                    break;
                }
                let step = -f / d;
                p = p.shifted(step, self.s2);
                if step.abs() <= 4.0 * f64::EPSILON * p.small().max(f64::MIN_POSITIVE) {
                    break;
                }
            }
            let root = self.accept(estimate, p)?;
            if root.gap > 0.0 && root.gap < max_gap && root.lambda > 0.0 {
                found.push(root);
            }
        }

        let lo_end = Pair { lambda: lo, gap: max_gap };
        if c.eval(lo).abs() <= c.residual_bound(lo) {
            found.retain(|r| (r.gap - lo_end.gap).abs() > merge);
        }
        found.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        found.dedup_by(|b, a| (b.lambda - a.lambda).abs() <= merge && (b.gap - a.gap).abs() <= merge);
        Ok(found)
    }

    /// Largest root of `ψ_k` in `(0, S2)` if it lies in `(S2 − max_gap, S2)`.
    ///
    /// Solved by safeguarded Newton on the bracket `[λ0, S2]`, no eigen solve.
    pub fn larger_root(&self, max_gap: f64) -> Result<Option<LagrangeRoot>, QuarticError> {
        let ratio = (self.s1 * self.s1 / self.spread).cbrt();
        self.larger_root_from(max_gap, ratio)
    }

    /// [`Self::larger_root`] with `(S1²/(k·S2 − S1²))^{1/3}` supplied by a
    /// caller that already has the cube roots.
    pub(crate) fn larger_root_from(&self, max_gap: f64, ratio: f64) -> Result<Option<LagrangeRoot>, QuarticError> {
        if self.spread == 0.0 {
            return Ok(self.flat_root(max_gap));
        }
        let left = self.pair_from_ratio(ratio);
        let g_left = self.eval_pair(left);
        if g_left < 0.0 {
            return Ok(None);
        }
        if left.gap <= 0.0 {
            return Ok(None);
        }
        let right = Pair { lambda: self.s2, gap: 0.0 };
        // ψ ≈ λ²s² − μ²S1²S2 near S2 puts the root at s ≈ μ·S1/√S2
        let guess_gap = self.mu * self.s1 / self.s2.sqrt();
        let init = if guess_gap > 0.0 && guess_gap < left.gap {
            Pair { lambda: self.s2 - guess_gap, gap: guess_gap }
        } else {
            midpoint(left, right)
        };
        let root = self.solve_bracket(left, right, init)?;
        Ok((root.gap < max_gap && root.lambda > 0.0).then_some(root))
    }

    /// Smaller root of `ψ_k` in `(0, S2)` if it lies in `(S2 − max_gap, S2)`
    /// and differs from the larger one.
    pub fn smaller_root(&self, max_gap: f64) -> Result<Option<LagrangeRoot>, QuarticError> {
        if self.spread == 0.0 {
            return Ok(None);
        }
        let right = self.stationary_pair();
        if self.eval_pair(right) <= 0.0 {
            return Ok(None);
        }
        let left = if max_gap < self.s2 {
            Pair { lambda: self.s2 - max_gap, gap: max_gap }
        } else {
            Pair { lambda: 0.0, gap: self.s2 }
        };
        if left.lambda >= right.lambda || self.eval_pair(left) >= 0.0 {
            return Ok(None);
        }
        let root = self.solve_bracket(left, right, midpoint(left, right))?;
        Ok((root.gap < max_gap && root.lambda > 0.0).then_some(root))
    }

    /// Safeguarded Newton between two points where `ψ_k` changes sign.
    fn solve_bracket(&self, mut a: Pair, mut b: Pair, init: Pair) -> Result<LagrangeRoot, QuarticError> {
        let positive_at_a = self.eval_pair(a) >= 0.0;
        let mut x = init;
        for _ in 0..MAX_BRACKET_ITERS {
            let (f, scale) = self.eval_scaled(x);
            if f.abs() <= 8.0 * f64::EPSILON * scale {
                return self.accept(init.lambda, x);
            }
            if (f > 0.0) == positive_at_a {
                a = x;
            } else {
                b = x;
            }
            let d = self.slope_pair(x);
            let newton = if d != 0.0 && d.is_finite() { Some(x.shifted(-f / d, self.s2)) } else { None };
            let next = match newton {
                Some(n) if strictly_between(n, a, b) => n,
                _ => midpoint(a, b),
            };
            let width = next.distance(a) + next.distance(b);
            let moved = next.distance(x);
            let tol = 4.0 * f64::EPSILON * next.small().max(f64::MIN_POSITIVE);
            x = next;
            if moved <= tol || width <= tol {
                return self.accept(init.lambda, x);
            }
        }
        self.accept(init.lambda, x)
    }
}

fn midpoint(a: Pair, b: Pair) -> Pair {
    Pair { lambda: 0.5 * (a.lambda + b.lambda), gap: 0.5 * (a.gap + b.gap) }
}

/// Compared in the smaller coordinate of `x`; the larger one may not resolve
/// a step near the root.
fn strictly_between(x: Pair, a: Pair, b: Pair) -> bool {
    let coord = |p: Pair| if x.lambda <= x.gap { p.lambda } else { -p.gap };
    let (lo, hi) = if coord(a) < coord(b) { (coord(a), coord(b)) } else { (coord(b), coord(a)) };
    coord(x) > lo && coord(x) < hi
}
