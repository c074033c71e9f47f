//! Self-checks run by `pinscan validate`: constraint data against random
//! pure states and the Hartree-Fock vertex, and the solver against the
//! closed-form energies.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use pinscan::fock::{solve_ground_state, FockBasis, HamiltonianTables, SolverOptions};
use pinscan::gpc::{constraint_values, GPCSet};
use pinscan::matels::{compute_tensor, OneBodyTable};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sweep::reference_energy;

/// Natural occupations, sorted non-increasingly, of a unitarily invariant
/// random complex N-fermion state on d orbitals (d ≤ 16).
pub fn random_occupations(n: usize, d: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(d <= 16 && n <= d);
    let dets: Vec<u32> = (0u32..1 << d).filter(|m| m.count_ones() as usize == n).collect();
    let mut c: Vec<Complex<f64>> =
        dets.iter().map(|_| Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    c.iter_mut().for_each(|z| *z /= norm);
    let rank = |m: u32| dets.binary_search(&m).expect("same particle number");
    // ρ_ij = ⟨a†_i a_j⟩; row-wise over kets so each hop is visited once
    let mut rho = DMatrix::<Complex<f64>>::zeros(d, d);
    for (k, &m) in dets.iter().enumerate() {
        for j in (0..d).filter(|&j| m >> j & 1 == 1) {
            let removed = m ^ 1 << j;
            let below_j = (m & ((1 << j) - 1)).count_ones();
            for i in (0..d).filter(|&i| removed >> i & 1 == 0) {
                let target = removed | 1 << i;
                let below_i = (removed & ((1 << i) - 1)).count_ones();
                let sign = if (below_i + below_j) % 2 == 0 { 1.0 } else { -1.0 };
                rho[(i, j)] += c[rank(target)].conj() * c[k] * sign;
            }
        }
    }
    let mut l: Vec<f64> = SymmetricEigen::new(rho).eigenvalues.iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    /// Smallest inequality value met.
    pub worst_inequality: f64,
    pub worst_equality: f64,
    /// The HF vertex satisfies every row and saturates at least one.
    pub vertex_ok: bool,
}

impl ConstraintCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.vertex_ok && self.worst_inequality >= -tol && self.worst_equality <= tol
    }
}

pub fn check_constraints(set: &GPCSet, samples: usize, rng: &mut impl Rng) -> pinscan::Result<ConstraintCheck> {
    let mut worst_inequality = f64::INFINITY;
    let mut worst_equality = 0.0f64;
    for _ in 0..samples {
        let l = random_occupations(set.n(), set.d(), rng);
        let v = constraint_values(set, &l)?;
        worst_inequality = v.inequalities.iter().copied().fold(worst_inequality, f64::min);
        worst_equality = v.equalities.iter().fold(worst_equality, |a, x| a.max(x.abs()));
    }
    let hf = constraint_values(set, &set.hf_vertex())?;
    let vertex_ok = hf.inequalities.iter().all(|&x| x >= 0.0)
        && hf.inequalities.contains(&0.0)
        && hf.equalities.iter().all(|&x| x == 0.0);
    Ok(ConstraintCheck { n: set.n(), d: set.d(), samples, worst_inequality, worst_equality, vertex_ok })
}

/// Relative energy errors against the closed forms at a few quick points.
pub fn oracle_checks() -> pinscan::Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (s, kappa, n, d) in [(1.0, 0.0, 3, 10), (2.0, 0.1, 2, 30), (2.0, 0.5, 3, 24)] {
        let basis = Arc::new(FockBasis::new(n, d)?);
        let tables = HamiltonianTables::new(&OneBodyTable::new(d), &compute_tensor(s, d)?)?;
        let e = solve_ground_state(&basis, &tables, kappa, &SolverOptions::default())?.energy;
        let exact = reference_energy(s, kappa, n).expect("closed form");
        out.push((format!("s={s} κ={kappa} N={n} d={d}"), (e - exact).abs() / exact));
    }
    Ok(out)
}
