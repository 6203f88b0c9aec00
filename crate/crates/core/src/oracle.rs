//! Brute-force reference minimizer for small inputs.
//!
//! Nothing here shares code with the candidate construction: the oracle runs
//! projected-gradient descent of `F(u) = −½⟨|y|, u⟩² + μ‖u‖₁` over the
//! nonnegative part of the unit sphere, restarted on many support patterns,
//! maps each local solution to `x = ⟨|y|, u⟩·(u ⊙ sign y)` and keeps the best
//! `Q_y` value (including the origin).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::{q_value, ProxProblem};

pub const MAX_ORACLE_DIM: usize = 8;

/// Patterns are enumerated exhaustively up to this dimension and sampled
/// above it.
const EXHAUSTIVE_DIM: usize = 4;
const SAMPLED_PATTERNS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Random restarts, spread over the support patterns.
    pub n_starts: usize,
    pub max_iter: usize,
    /// Stop a descent once an accepted step moves `u` less than this.
    pub step_tol: f64,
    pub seed: u64,
    /// Only search supports of exactly this size.
    pub support_size: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_starts: 120, max_iter: 2000, step_tol: 1e-13, seed: 0, support_size: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub x: Vec<f64>,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereMinimum {
    pub u: Vec<f64>,
    pub f: f64,
}

fn objective(m: &[f64], u: &[f64], mu: f64) -> f64 {
    let inner: f64 = m.iter().zip(u).map(|(a, b)| a * b).sum();
    -0.5 * inner * inner + mu * u.iter().sum::<f64>()
}

/// Projection onto `{u ≥ 0, ‖u‖ = 1, supp u ⊆ mask}`.
fn project(v: &mut [f64], mask: u32, m: &[f64]) {
    for (i, vi) in v.iter_mut().enumerate() {
        if mask & (1 << i) == 0 || *vi < 0.0 {
            *vi = 0.0;
        }
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    } else {
        let j = (0..m.len()).filter(|i| mask & (1 << i) != 0).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap_or(0);
        v[j] = 1.0;
    }
}

/// Projected gradient with step halving from `u`.
fn descend(m: &[f64], mask: u32, mu: f64, mut u: Vec<f64>, cfg: &OracleConfig) -> (Vec<f64>, f64) {
    project(&mut u, mask, m);
    let mut f = objective(m, &u, mu);
    let mut step = 1.0 / (m.iter().map(|a| a * a).sum::<f64>() + mu);
    let mut trial = vec![0.0; u.len()];
    for _ in 0..cfg.max_iter {
        let inner: f64 = m.iter().zip(&u).map(|(a, b)| a * b).sum();
        let grad: Vec<f64> = m.iter().map(|&a| -inner * a + mu).collect();
        let radial: f64 = grad.iter().zip(&u).map(|(g, b)| g * b).sum();
        let mut accepted = false;
        while step > 1e-18 {
            for i in 0..u.len() {
                trial[i] = u[i] - step * (grad[i] - radial * u[i]);
            }
            project(&mut trial, mask, m);
            let ft = objective(m, &trial, mu);
            let moved: f64 = trial.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum();
            if ft <= f - 1e-4 * moved / step {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let moved = trial.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut u, &mut trial);
        f = objective(m, &u, mu);
        step *= 2.0;
        if moved <= cfg.step_tol {
            break;
        }
    }
    (u, f)
}

fn patterns(n: usize, cfg: &OracleConfig, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let fits = |mask: u32| cfg.support_size.is_none_or(|s| mask.count_ones() as usize == s);
    if n <= EXHAUSTIVE_DIM {
        (1..(1u32 << n)).filter(|&mask| fits(mask)).collect()
    } else {
        let mut out = Vec::with_capacity(SAMPLED_PATTERNS + 1);
        let full = (1u32 << n) - 1;
        if fits(full) {
            out.push(full);
        }
        let mut guard = 0;
        while out.len() < SAMPLED_PATTERNS && guard < 100 * SAMPLED_PATTERNS {
            guard += 1;
            let mask = rng.random_range(1..=full);
            if fits(mask) {
                out.push(mask);
            }
        }
        out
    }
}

fn random_orthant_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect()
}

/// Runs every restart and returns the local solutions it found.
fn search(m: &[f64], mu: f64, cfg: &OracleConfig, extra_samples: usize) -> Vec<(Vec<f64>, f64)> {
    let n = m.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let masks = patterns(n, cfg, &mut rng);
    if masks.is_empty() {
        return Vec::new();
    }
    let per_pattern = (cfg.n_starts / masks.len()).max(1);
    let mut out = Vec::new();
    for &mask in &masks {
        let mut starts = vec![m.to_vec(), vec![1.0; n]];
        starts.extend((0..per_pattern).map(|_| random_orthant_point(n, &mut rng)));
        for s in starts {
            out.push(descend(m, mask, mu, s, cfg));
        }
    }
    if extra_samples > 0 {
        // dense sampling of the whole orthant, refine the best few
        let full = (1u32 << n) - 1;
        let mut samples: Vec<(Vec<f64>, f64)> = (0..extra_samples)
            .map(|_| {
                let mut u = random_orthant_point(n, &mut rng);
                project(&mut u, full, m);
                let f = objective(m, &u, mu);
                (u, f)
            })
            .collect();
        samples.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (u, _) in samples.into_iter().take(16) {
            out.push(descend(m, full, mu, u, cfg));
        }
    }
    out
}

/// Best point found for `problem` by multi-start local descent.
pub fn oracle_prox(problem: &ProxProblem, cfg: &OracleConfig) -> Result<OraclePoint> {
    problem.check()?;
    let n = problem.dim();
    if n > MAX_ORACLE_DIM {
        return Err(Error::OracleTooLarge { n, max: MAX_ORACLE_DIM });
    }
    let m: Vec<f64> = problem.y.iter().map(|v| v.abs()).collect();
    let zero = vec![0.0; n];
    let mut best = OraclePoint { q: q_value(&zero, problem), x: zero };
    if cfg.support_size.is_some() {
        best.q = f64::INFINITY;
    }
    if m.iter().all(|&v| v == 0.0) {
        best.q = q_value(&best.x, problem);
        return Ok(best);
    }
    for (u, _) in search(&m, problem.mu, cfg, 0) {
        let radius: f64 = m.iter().zip(&u).map(|(a, b)| a * b).sum();
        if radius <= 0.0 {
            continue;
        }
        let x: Vec<f64> = u
            .iter()
            .zip(&problem.y)
            .map(|(&ui, &yi)| if yi == 0.0 { 0.0 } else { radius * ui * yi.signum() })
            .collect();
        let q = q_value(&x, problem);
        if q < best.q {
            best = OraclePoint { x, q };
        }
    }
    Ok(best)
}

/// Minimum of `F` over the nonnegative part of the unit sphere in `ℝ^k`.
pub fn oracle_sphere_min(yk: &[f64], mu: f64, cfg: &OracleConfig) -> Result<SphereMinimum> {
    let k = yk.len();
    if k > MAX_ORACLE_DIM {
        return Err(Error::OracleTooLarge { n: k, max: MAX_ORACLE_DIM });
    }
    let m: Vec<f64> = yk.iter().map(|v| v.abs()).collect();
    let best = search(&m, mu, cfg, 20 * cfg.n_starts)
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(u, f)| SphereMinimum { u, f });
    Ok(best.unwrap_or(SphereMinimum { u: Vec::new(), f: 0.0 }))
}
