//! Configuration space, matrix-free Hamiltonian and ground-state solver.

mod basis;
mod davidson;
mod hamiltonian;
mod rotate;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matels::{build_tensor, InteractionSpec, OneBodyTable, TwoBodyTensor};
use crate::rdm::{natural_occupations, one_rdm};

pub use basis::{binomial, FockBasis, ParitySector, SlaterConfiguration, DEFAULT_BUDGET, MAX_ORBITALS};
pub use davidson::{lowest_eigenpair, DavidsonOptions, Eigenpair};
pub use hamiltonian::{Hamiltonian, HamiltonianTables};
pub use rotate::rotate_orbitals;

/// Real amplitudes over every determinant of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CIVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<f64>,
}

impl CIVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    /// The reference determinant (0, 1, ..., N-1).
    pub fn reference(basis: Arc<FockBasis>) -> Self {
        let mut amplitudes = vec![0.0; basis.len()];
        amplitudes[basis.reference_rank()] = 1.0;
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [f64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= n);
        }
    }

    pub fn dot(&self, other: &CIVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum()
    }

    pub fn amplitude(&self, config: SlaterConfiguration) -> Option<f64> {
        self.basis.rank(config).map(|k| self.amplitudes[k])
    }
}

/// `(H⁰ + κ V) x` over the full basis.
pub fn apply_hamiltonian(
    one_body: &OneBodyTable,
    two_body: &TwoBodyTensor,
    kappa: f64,
    input: &CIVector,
) -> Result<CIVector> {
    let basis = input.basis();
    if one_body.d() != basis.d() {
        return Err(Error::DimensionMismatch { expected: basis.d(), got: one_body.d() });
    }
    let tables = HamiltonianTables::new(one_body, two_body)?;
    let sector = ParitySector::full(basis);
    let h = Hamiltonian::new(basis, &tables, &sector, kappa)?;
    let mut out = vec![0.0; basis.len()];
    h.apply(input.amplitudes(), &mut out);
    CIVector::new(basis.clone(), out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub davidson: DavidsonOptions,
    /// Restrict the search to the index-parity sector of the reference.
    pub use_sector: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { davidson: DavidsonOptions::default(), use_sector: true }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        let mut o = Self::default();
        o.davidson.tol = tol;
        o
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    pub vector: CIVector,
    pub residual: f64,
    /// Residual target actually applied (see [`DavidsonOptions::tol`]).
    pub tolerance: f64,
    pub iterations: usize,
    pub d: usize,
}

/// Lowest eigenpair from the reference determinant; the reference amplitude
/// is made nonnegative.
pub fn solve_ground_state(
    basis: &Arc<FockBasis>,
    tables: &HamiltonianTables,
    kappa: f64,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    solve_ground_state_from(basis, tables, kappa, opts, None)
}

/// As [`solve_ground_state`], starting from `guess` (any orbital count up to
/// `basis.d()`; determinants are matched by occupation).
pub fn solve_ground_state_from(
    basis: &Arc<FockBasis>,
    tables: &HamiltonianTables,
    kappa: f64,
    opts: &SolverOptions,
    guess: Option<&CIVector>,
) -> Result<GroundStateResult> {
    if kappa < 0.0 && tables.s() >= 2.0 {
        return Err(Error::Unbounded { s: tables.s(), kappa });
    }
    if !kappa.is_finite() {
        return Err(Error::NonFiniteCoupling(kappa));
    }
    let n = basis.n();
    let sector = if opts.use_sector {
        ParitySector::new(basis, n * (n - 1) / 2 % 2)
    } else {
        ParitySector::full(basis)
    };
    let h = Hamiltonian::new(basis, tables, &sector, kappa)?;
    let diag = h.diagonal();
    let mut start = vec![0.0; h.dim()];
    if let Some(g) = guess.filter(|g| g.basis().n() == n && g.basis().d() <= basis.d()) {
        for (&mask, &c) in g.basis().masks().iter().zip(g.amplitudes()) {
            let local = sector.local(basis.rank_unchecked(mask));
            if local != basis::NOT_IN_SECTOR {
                start[local as usize] = c;
            }
        }
    }
    if start.iter().all(|&c| c == 0.0) {
        start[sector.local(basis.reference_rank()) as usize] = 1.0;
    }
    let pair = lowest_eigenpair(|x, y| h.apply(x, y), &diag, &start, &opts.davidson)?;
    let mut amps = sector.embed(&pair.vector, basis.len());
    if amps[basis.reference_rank()] < 0.0 {
        amps.iter_mut().for_each(|c| *c = -*c);
    }
    Ok(GroundStateResult {
        energy: pair.value,
        vector: CIVector::new(basis.clone(), amps)?,
        residual: pair.residual,
        tolerance: pair.tolerance,
        iterations: pair.iterations,
        d: basis.d(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub energy_tol: f64,
    pub non_tol: f64,
    pub solver: SolverOptions,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { energy_tol: 1e-11, non_tol: 1e-10, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct TracePoint {
    pub d: usize,
    pub energy: f64,
    pub residual: f64,
    pub occupations: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergedGroundState {
    pub result: GroundStateResult,
    pub occupations: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub converged: bool,
}

fn max_abs_diff_padded(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Solves along `schedule` with slices of `tensor`, stopping once successive
/// energies and occupation vectors agree to the tolerances.
pub fn converge_in_d_with(
    tensor: &TwoBodyTensor,
    kappa: f64,
    n: usize,
    schedule: &[usize],
    opts: &ConvergenceOptions,
) -> Result<ConvergedGroundState> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadSchedule);
    }
    let d_max = *schedule.last().unwrap();
    if tensor.d() < d_max {
        return Err(Error::DimensionMismatch { expected: d_max, got: tensor.d() });
    }
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut last: Option<(GroundStateResult, Vec<f64>)> = None;
    for &d in schedule {
        let basis = Arc::new(FockBasis::new(n, d)?);
        let sliced = tensor.truncate(d)?;
        let tables = HamiltonianTables::new(&OneBodyTable::new(d), &sliced)?;
        // warm start from the previous, smaller basis
        let guess = last.as_ref().map(|(prev, _)| &prev.vector);
        let result = solve_ground_state_from(&basis, &tables, kappa, &opts.solver, guess)?;
        let occupations = natural_occupations(&one_rdm(&result.vector)).lambda;
        trace.push(TracePoint {
            d,
            energy: result.energy,
            residual: result.residual,
            occupations: occupations.clone(),
        });
        // without interaction the reference determinant is exact at every d
        let done = kappa == 0.0
            || last.as_ref().is_some_and(|(prev, prev_occ)| {
                (result.energy - prev.energy).abs() < opts.energy_tol
                    && max_abs_diff_padded(&occupations, prev_occ) < opts.non_tol
            });
        if done {
            return Ok(ConvergedGroundState { result, occupations, trace, converged: true });
        }
        last = Some((result, occupations));
    }
    let (result, occupations) = last.unwrap();
    Ok(ConvergedGroundState { result, occupations, trace, converged: false })
}

/// As [`converge_in_d_with`], loading the tensor from the default cache.
pub fn converge_in_d(
    spec: &InteractionSpec,
    n: usize,
    schedule: &[usize],
    opts: &ConvergenceOptions,
) -> Result<ConvergedGroundState> {
    let d_max = *schedule.iter().max().ok_or(Error::BadSchedule)?;
    let tensor = build_tensor(spec, d_max)?;
    converge_in_d_with(&tensor, spec.kappa(), n, schedule, opts)
}
