//! Reduction of a long occupation vector to a setting (N′, d′) with known
//! constraints: the N − N′ largest occupations are dropped as frozen and the
//! smallest ones beyond the window of length d′ as empty.  The distance in
//! the small setting matches the full one up to the discarded weight ε′.

use super::{constraint_values, q_parameter, row_distances, pauli_distance, DistanceMode, GPCSet};
use crate::error::{Error, Result};

/// `ε′ = Σ_{j < N−N′} (1 − λ_j) + Σ_{k ≥ N−N′+d′} λ_k` (0-based).
pub fn truncation_error(lambda: &[f64], n: usize, n_trunc: usize, d_trunc: usize) -> Result<f64> {
    let d = lambda.len();
    if n_trunc > n || n_trunc >= d_trunc || d_trunc - n_trunc > d.saturating_sub(n) {
        return Err(Error::InvalidSetting { n: n_trunc, d: d_trunc, reason: "does not embed in the full setting" });
    }
    let top = n - n_trunc;
    let frozen: f64 = lambda[..top].iter().map(|l| 1.0 - l).sum();
    let empty: f64 = lambda[top + d_trunc..].iter().sum();
    Ok(frozen + empty)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// Index of the chosen set in the slice passed to [`truncate`].
    pub index: usize,
    pub n: usize,
    pub d: usize,
    /// Contiguous window of the full vector, not renormalized.
    pub lambda: Vec<f64>,
    pub epsilon: f64,
    pub truncation_dominated: bool,
}

/// Picks the largest d′ with ε′ < tol (ties: smaller ε′, then larger N′);
/// if none qualifies, the smallest ε′ flagged as truncation dominated.
pub fn truncate(lambda: &[f64], n: usize, sets: &[GPCSet], tol: f64) -> Result<Truncation> {
    let mut candidates: Vec<(usize, f64)> = sets
        .iter()
        .enumerate()
        .filter_map(|(k, g)| truncation_error(lambda, n, g.n(), g.d()).ok().map(|e| (k, e)))
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoTruncation { n, d: lambda.len() });
    }
    let admissible = candidates.iter().any(|&(_, e)| e < tol);
    if admissible {
        candidates.retain(|&(_, e)| e < tol);
        candidates.sort_by(|&(a, ea), &(b, eb)| {
            sets[b].d().cmp(&sets[a].d()).then(ea.total_cmp(&eb)).then(sets[b].n().cmp(&sets[a].n()))
        });
    } else {
        candidates.sort_by(|&(_, ea), &(_, eb)| ea.total_cmp(&eb));
    }
    let (index, epsilon) = candidates[0];
    let g = &sets[index];
    let top = n - g.n();
    Ok(Truncation {
        index,
        n: g.n(),
        d: g.d(),
        lambda: lambda[top..top + g.d()].to_vec(),
        epsilon,
        truncation_dominated: !admissible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinningOptions {
    pub truncation_tol: f64,
    pub pin_tol: f64,
    pub mode: DistanceMode,
}

impl Default for PinningOptions {
    fn default() -> Self {
        Self { truncation_tol: 1e-6, pin_tol: 1e-12, mode: DistanceMode::Raw }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinningReport {
    pub n: usize,
    pub d: usize,
    pub lambda: Vec<f64>,
    /// Raw inequality values `D_j(λ′)`.
    pub values: Vec<f64>,
    /// `D′` in the requested mode.
    pub distance: f64,
    pub mode: DistanceMode,
    pub equality_residuals: Vec<f64>,
    pub epsilon: f64,
    /// Pauli-simplex distance of λ′.
    pub pauli: f64,
    /// Raw-mode `Q = log10(S / D′)`; `+∞` when D′ ≤ 0.
    pub q: f64,
    pub q_rows: Vec<f64>,
    pub pinned: bool,
    pub truncation_dominated: bool,
}

pub fn pinning_report(lambda: &[f64], n: usize, sets: &[GPCSet], opts: &PinningOptions) -> Result<PinningReport> {
    let t = truncate(lambda, n, sets, opts.truncation_tol)?;
    let g = &sets[t.index];
    let values = constraint_values(g, &t.lambda)?;
    let distance = row_distances(g, &t.lambda, opts.mode)?.into_iter().fold(f64::INFINITY, f64::min);
    let q = q_parameter(g, &t.lambda)?;
    Ok(PinningReport {
        n: t.n,
        d: t.d,
        pinned: distance <= t.epsilon.max(opts.pin_tol),
        pauli: pauli_distance(&t.lambda),
        lambda: t.lambda,
        values: values.inequalities,
        distance,
        mode: opts.mode,
        equality_residuals: values.equalities,
        epsilon: t.epsilon,
        q: q.q,
        q_rows: q.per_row,
        truncation_dominated: t.truncation_dominated,
    })
}
