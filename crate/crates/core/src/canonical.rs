//! Sign and permutation reduction of `y` to sorted magnitudes.
//!
//! The objective is invariant under coordinate permutations and sign flips,
//! so every query is solved on `𝔶 = P|y|` (non-increasing) and the answer is
//! transported back with `P⁻¹` and `sign(y)`.

/// Sorted magnitudes of `y` together with the permutation and signs that
/// map them back.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    /// `𝔶`, non-increasing and nonnegative.
    pub sorted: Vec<f64>,
    /// `sorted[p] == |y[perm[p]]|`.
    pub perm: Vec<usize>,
    /// Componentwise sign of `y`, with `0` for zero entries.
    pub signs: Vec<i8>,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sorts `|y|` in non-increasing order. Equal magnitudes keep their original
/// index order.
pub fn canonicalize(y: &[f64]) -> CanonicalForm {
    let mut keyed: Vec<(f64, usize)> = y.iter().map(|v| v.abs()).zip(0..).collect();
    // (magnitude desc, index asc) is a total order, so an unstable sort is deterministic
    keyed.sort_unstable_by(|(ma, ia), (mb, ib)| mb.total_cmp(ma).then(ia.cmp(ib)));
    let (sorted, perm) = keyed.into_iter().unzip();
    CanonicalForm { sorted, perm, signs: y.iter().map(|&v| sign_of(v)).collect() }
}

impl CanonicalForm {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Number of leading strictly positive magnitudes.
    pub fn nonzero_len(&self) -> usize {
        self.sorted.partition_point(|&v| v > 0.0)
    }

    /// Rebuilds `y` from the stored magnitudes, permutation and signs.
    pub fn original(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.len()];
        for (p, &i) in self.perm.iter().enumerate() {
            y[i] = f64::from(self.signs[i]) * self.sorted[p];
        }
        y
    }

    /// Maps a direction `u` on the leading `k = u.len()` sorted coordinates to
    /// the point `x = r·(P⁻¹ū ⊙ sign(y))` with optimal radius `r = ⟨𝔶_{:k}, u⟩`.
    pub fn reconstruct(&self, u: &[f64]) -> Vec<f64> {
        assert!(u.len() <= self.len(), "direction longer than the input vector");
        let radius: f64 = self.sorted.iter().zip(u).map(|(s, ui)| s * ui).sum();
        let mut x = vec![0.0; self.len()];
        for (p, &ui) in u.iter().enumerate() {
            let i = self.perm[p];
            x[i] = f64::from(self.signs[i]) * radius * ui;
        }
        x
    }
}
