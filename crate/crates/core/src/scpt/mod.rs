//! Self-consistent perturbation theory around the Hartree-Fock vertex.
//!
//! At first order only doubles enter; the second-order one-particle density
//! built from them lifts the degeneracy of the occupied and virtual blocks
//! and fixes the adapted orbitals.  In that basis the distance to an
//! HF-containing facet is `κ² Σ_i |c̃_i|² D(ê_i)` over double excitations.

mod probe;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{rotate_orbitals, CIVector, FockBasis};
use crate::gpc::GPCSet;
use crate::matels::{OneBodyTable, TwoBodyTensor};
use crate::rdm::{sorted_eigen, NONVector};

pub use probe::{scaling_probe, scaling_probe_with, ScalingFit};

/// First-order amplitudes `t_{kl}^{ab}`, antisymmetric in (k,l) and in
/// (a,b); a, b are virtual indices counted from N.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublesAmplitudes {
    n: usize,
    d: usize,
    // t[((k * n + l) * v + a) * v + b]
    t: Vec<f64>,
    /// First-order energy `Σ_{k<l} V̄_{kl;kl}`.
    pub e1: f64,
}

impl DoublesAmplitudes {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn virtuals(&self) -> usize {
        self.d - self.n
    }

    #[inline]
    fn idx(&self, k: usize, l: usize, a: usize, b: usize) -> usize {
        let v = self.virtuals();
        ((k * self.n + l) * v + a) * v + b
    }

    /// `t_{kl}^{ab}` with k, l occupied and a, b virtual (absolute indices).
    pub fn get(&self, k: usize, l: usize, a: usize, b: usize) -> f64 {
        assert!(k < self.n && l < self.n && a >= self.n && b >= self.n && a < self.d && b < self.d);
        self.t[self.idx(k, l, a - self.n, b - self.n)]
    }

    /// Coefficient of the ascending determinant `(HF \ {k,l}) ∪ {a,b}` in
    /// `κ Σ t a†_a a†_b a_l a_k |HF⟩`, per unit κ.
    pub fn ci_coefficient(&self, k: usize, l: usize, a: usize, b: usize) -> (u128, f64) {
        let (k, l) = (k.min(l), k.max(l));
        let (a, b) = (a.min(b), a.max(b));
        let rest = ((1u128 << self.n) - 1) & !(1u128 << k) & !(1u128 << l);
        // a_l a_k |HF⟩ = (-1)^{k + l - 1} |rest⟩ for k < l; adding a < b above
        // every occupied orbital costs no sign
        let sign = if (k + l - 1) % 2 == 0 { 1.0 } else { -1.0 };
        (rest | 1u128 << a | 1u128 << b, sign * self.get(k, l, a, b))
    }

    /// Sum of `|t|²` over distinct doubles.
    pub fn weight(&self) -> f64 {
        self.t.iter().map(|x| x * x).sum::<f64>() / 4.0
    }
}

pub fn first_order_amplitudes(
    one_body: &OneBodyTable,
    two_body: &TwoBodyTensor,
    n: usize,
    d: usize,
) -> Result<DoublesAmplitudes> {
    if n < 2 || n >= d {
        return Err(Error::InvalidSetting { n, d, reason: "need 2 <= N < d" });
    }
    if one_body.d() < d || two_body.d() < d {
        return Err(Error::DimensionMismatch { expected: d, got: one_body.d().min(two_body.d()) });
    }
    let h = one_body.diagonal();
    let vbar = |p, q, r, s| two_body.get(p, q, r, s) - two_body.get(p, q, s, r);
    let v = d - n;
    let mut amps = DoublesAmplitudes { n, d, t: vec![0.0; n * n * v * v], e1: 0.0 };
    for l in 0..n {
        for k in 0..l {
            amps.e1 += vbar(k, l, k, l);
            for b in n..d {
                for a in n..b {
                    if (k + l + a + b) % 2 == 1 {
                        continue;
                    }
                    let gap = h[a] + h[b] - h[k] - h[l];
                    let t = -vbar(a, b, k, l) / gap;
                    for (kk, ll, sk) in [(k, l, 1.0), (l, k, -1.0)] {
                        for (aa, bb, sa) in [(a, b, 1.0), (b, a, -1.0)] {
                            let i = amps.idx(kk, ll, aa - n, bb - n);
                            amps.t[i] = sk * sa * t;
                        }
                    }
                }
            }
        }
    }
    Ok(amps)
}

/// Rotations of the occupied and virtual blocks that diagonalize the
/// second-order density, with its eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedOrbitals {
    /// Columns are adapted occupied orbitals in bare occupied indices.
    pub u_occ: DMatrix<f64>,
    pub u_virt: DMatrix<f64>,
    /// Occupied block first (≤ 0), then virtual (≥ 0), each descending.
    pub mu: Vec<f64>,
    /// Set when degenerate μ within a block forced an index tie-break.
    pub tie_broken: bool,
    /// Largest off-diagonal magnitude of the second-order density in the
    /// bare basis (zero when the oscillator orbitals are already adapted).
    pub bare_offdiagonal: f64,
}

/// Second-order density blocks built from the doubles.
pub fn second_order_density(amps: &DoublesAmplitudes) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, v) = (amps.n, amps.virtuals());
    let mut occ = DMatrix::<f64>::zeros(n, n);
    let mut virt = DMatrix::<f64>::zeros(v, v);
    let t = |k, l, a, b| amps.t[amps.idx(k, l, a, b)];
    for a in 0..v {
        for b in 0..=a {
            let mut x = 0.0;
            for l in 0..n {
                for k in 0..l {
                    for c in 0..v {
                        x += t(k, l, a, c) * t(k, l, b, c);
                    }
                }
            }
            virt[(a, b)] = x;
            virt[(b, a)] = x;
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let mut x = 0.0;
            for k in 0..n {
                for b in 0..v {
                    for a in 0..b {
                        x += t(i, k, a, b) * t(j, k, a, b);
                    }
                }
            }
            occ[(i, j)] = -x;
            occ[(j, i)] = -x;
        }
    }
    (occ, virt)
}

fn max_offdiag(m: &DMatrix<f64>) -> f64 {
    let mut x = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                x = x.max(m[(i, j)].abs());
            }
        }
    }
    x
}

pub fn adapted_orbitals(amps: &DoublesAmplitudes) -> AdaptedOrbitals {
    let (occ, virt) = second_order_density(amps);
    let bare_offdiagonal = max_offdiag(&occ).max(max_offdiag(&virt));
    let eo = SymmetricEigen::new(occ);
    let ev = SymmetricEigen::new(virt);
    let (mo, uo, to) = sorted_eigen(eo.eigenvalues.as_slice(), &eo.eigenvectors);
    let (mv, uv, tv) = sorted_eigen(ev.eigenvalues.as_slice(), &ev.eigenvectors);
    let mut mu = mo;
    mu.extend(mv);
    AdaptedOrbitals { u_occ: uo, u_virt: uv, mu, tie_broken: to || tv, bare_offdiagonal }
}

/// Doubles in the adapted basis: `t̃ = Σ U U U U t` over all four indices.
pub fn rotate_amplitudes(amps: &DoublesAmplitudes, adapted: &AdaptedOrbitals) -> DoublesAmplitudes {
    let (n, v) = (amps.n, amps.virtuals());
    let uo = &adapted.u_occ;
    let uv = &adapted.u_virt;
    let mut cur = amps.t.clone();
    let mut next = vec![0.0; cur.len()];
    let dims = [n, n, v, v];
    for axis in 0..4 {
        let u = if axis < 2 { uo } else { uv };
        let stride: usize = dims[axis + 1..].iter().product();
        let len = dims[axis];
        let outer = cur.len() / (stride * len);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                for new in 0..len {
                    let mut x = 0.0;
                    for old in 0..len {
                        x += u[(old, new)] * cur[base + old * stride];
                    }
                    next[base + new * stride] = x;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    DoublesAmplitudes { n, d: amps.d, t: cur, e1: amps.e1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexContribution {
    /// Adapted-orbital indices occupied by the vertex.
    pub orbitals: Vec<usize>,
    pub weight: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PTPrediction {
    /// Coefficient of κ² in D(λ(κ)); minimum over HF-containing rows.
    pub d2: f64,
    /// `log10(S2 / D2)`; `None` when D2 vanishes.
    pub q0: Option<f64>,
    /// Setting of the constraint set used.
    pub n: usize,
    pub d: usize,
    /// Row index (among inequalities) attaining `d2`.
    pub row: usize,
    pub per_row: Vec<(usize, f64)>,
    /// Doubles with nonzero weight and their value on the minimizing row, in
    /// decreasing weight.
    pub vertices: Vec<VertexContribution>,
    /// Σ |t̃|² over doubles reaching beyond the setting's d′ orbitals; they
    /// enter `d2` through the orbitals inside the window only.
    pub outside_weight: f64,
    pub total_weight: f64,
}

/// `D2 = min_j Σ_{i ∈ doubles} |t̃_i|² D_j(ê_i)` over rows with `D_j(HF) = 0`,
/// with ê restricted to the setting's d′ orbitals.  If the doubles leaving
/// the window carry more than `outside_tol` of the weight, the prediction is
/// refused.
pub fn leading_order_d(
    amps: &DoublesAmplitudes,
    adapted: &AdaptedOrbitals,
    gpcs: &GPCSet,
    outside_tol: f64,
) -> Result<PTPrediction> {
    let n = amps.n;
    if gpcs.n() != n || gpcs.d() > amps.d {
        return Err(Error::InvalidSetting { n: gpcs.n(), d: gpcs.d(), reason: "PT needs a setting with the same N" });
    }
    let rt = rotate_amplitudes(amps, adapted);
    let dp = gpcs.d();
    let hf_rows: Vec<usize> = gpcs
        .inequalities()
        .iter()
        .enumerate()
        .filter(|(_, r)| r[0] + r[1..=n].iter().sum::<i64>() == 0)
        .map(|(k, _)| k)
        .collect();
    let mut outside = 0.0;
    let mut total = 0.0;
    let mut doubles: Vec<(Vec<usize>, f64)> = Vec::new();
    for l in 0..n {
        for k in 0..l {
            for b in n..amps.d {
                for a in n..b {
                    let w = rt.get(k, l, a, b).powi(2);
                    if w == 0.0 {
                        continue;
                    }
                    total += w;
                    if b >= dp {
                        outside += w;
                    }
                    let mut orbs: Vec<usize> = (0..n).filter(|&j| j != k && j != l).collect();
                    orbs.extend([a, b]);
                    doubles.push((orbs, w));
                }
            }
        }
    }
    if total > 0.0 && outside > outside_tol * total {
        return Err(Error::OutsideWeight { weight: outside / total, tol: outside_tol });
    }
    // orbitals past d′ carry no coefficient, exactly as on the truncated window
    let value = |row: &[i64], orbs: &[usize]| {
        (row[0] + orbs.iter().filter(|&&j| j < dp).map(|&j| row[j + 1]).sum::<i64>()) as f64
    };
    let per_row: Vec<(usize, f64)> = hf_rows
        .iter()
        .map(|&r| {
            let row = &gpcs.inequalities()[r];
            (r, doubles.iter().map(|(o, w)| w * value(row, o)).sum())
        })
        .collect();
    let &(row, d2) = per_row
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::InvalidSetting { n, d: dp, reason: "no constraint contains the Hartree-Fock vertex" })?;
    let r = &gpcs.inequalities()[row];
    let mut vertices: Vec<VertexContribution> = doubles
        .iter()
        .map(|(o, w)| VertexContribution { orbitals: o.clone(), weight: *w, value: value(r, o) })
        .collect();
    vertices.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    let q0 = zeroth_order_q(adapted, d2, dp);
    Ok(PTPrediction { d2, q0, n, d: dp, row, per_row, vertices, outside_weight: outside, total_weight: total })
}

/// `Q0 = log10(S2 / D2)` with `S2 = min(−μ_1, μ_{d′})`; `None` when D2 ≤ 0.
pub fn leading_order_q(adapted: &AdaptedOrbitals, prediction: &PTPrediction) -> Option<f64> {
    zeroth_order_q(adapted, prediction.d2, prediction.d)
}

fn zeroth_order_q(adapted: &AdaptedOrbitals, d2: f64, d_setting: usize) -> Option<f64> {
    let s2 = second_order_pauli(adapted, d_setting)?;
    (d2 > 0.0 && s2 > 0.0).then(|| (s2 / d2).log10())
}

/// `S2 = min(−μ_1, μ_{d′})`, the κ² coefficient of the Pauli distance of the
/// truncated vector.
pub fn second_order_pauli(adapted: &AdaptedOrbitals, d_setting: usize) -> Option<f64> {
    let first = *adapted.mu.first()?;
    let last = *adapted.mu.get(d_setting.checked_sub(1)?)?;
    Some((-first).min(last))
}

/// Expands `Σ_i |c_i|² F(ê_i)` for an affine functional on the occupations
/// in the natural-orbital basis of `state` and returns it with the direct
/// value `F(λ)`.  `functional[0]` is the constant, `functional[1 + j]`
/// multiplies `λ_{offset + j}`.
pub fn vertex_expansion(state: &CIVector, non: &NONVector, functional: &[f64], offset: usize) -> Result<(f64, f64)> {
    let rotated = rotate_orbitals(state, &non.orbitals)?;
    let expanded = expand(&rotated, functional, offset);
    let direct = functional[0]
        + functional[1..].iter().enumerate().map(|(j, f)| f * non.lambda[offset + j]).sum::<f64>();
    Ok((expanded, direct))
}

fn expand(rotated: &CIVector, functional: &[f64], offset: usize) -> f64 {
    let basis = rotated.basis();
    let mut total = 0.0;
    for (&mask, &c) in basis.masks().iter().zip(rotated.amplitudes()) {
        if c == 0.0 {
            continue;
        }
        let mut f = functional[0];
        for (j, &coef) in functional[1..].iter().enumerate() {
            if mask >> (offset + j) & 1 == 1 {
                f += coef;
            }
        }
        total += c * c * f;
    }
    total
}

/// Largest deviation between the vertex expansion and the direct row values
/// over every inequality and equality of `gpcs` (window starting at
/// `N − N′`).
pub fn vertex_expansion_check(state: &CIVector, non: &NONVector, gpcs: &GPCSet) -> Result<f64> {
    let n = state.basis().n();
    if gpcs.n() > n || gpcs.d() - gpcs.n() > state.basis().d() - n {
        return Err(Error::InvalidSetting { n: gpcs.n(), d: gpcs.d(), reason: "does not embed in the state's setting" });
    }
    let offset = n - gpcs.n();
    let rotated = rotate_orbitals(state, &non.orbitals)?;
    let mut worst = 0.0f64;
    for row in gpcs.inequalities().iter().chain(gpcs.equalities()) {
        let f: Vec<f64> = row.iter().map(|&k| k as f64).collect();
        let expanded = expand(&rotated, &f, offset);
        let direct = f[0] + f[1..].iter().enumerate().map(|(j, c)| c * non.lambda[offset + j]).sum::<f64>();
        worst = worst.max((expanded - direct).abs());
    }
    Ok(worst)
}

/// Full-CI state `|HF⟩ + κ Σ t |D⟩` (normalized), for tests and diagnostics.
pub fn first_order_state(amps: &DoublesAmplitudes, basis: &Arc<FockBasis>, kappa: f64) -> Result<CIVector> {
    let mut v = CIVector::reference(basis.clone());
    for l in 0..amps.n {
        for k in 0..l {
            for b in amps.n..amps.d.min(basis.d()) {
                for a in amps.n..b {
                    let (mask, c) = amps.ci_coefficient(k, l, a, b);
                    if c != 0.0 {
                        v.amplitudes_mut()[basis.rank_unchecked(mask)] += kappa * c;
                    }
                }
            }
        }
    }
    v.normalize();
    Ok(v)
}
