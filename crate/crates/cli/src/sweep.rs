use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use pinscan::fock::{converge_in_d_with, ConvergenceOptions, SolverOptions, TracePoint};
use pinscan::gpc::{bundled_sets, load_constraints, min_distance, pinning_report, ConstraintSource, DistanceMode, GPCSet, PinningOptions};
use pinscan::matels::{OneBodyTable, TensorCache, TwoBodyTensor};
use pinscan::rdm::{mutual_information, natural_occupations, one_rdm};
use pinscan::scpt::{adapted_orbitals, first_order_amplitudes, leading_order_d, vertex_expansion_check};
use rayon::prelude::*;

use crate::config::{GridPoint, SweepConfig};
use crate::Result;

/// Occupations written per row.
pub const LEADING_NONS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub s: f64,
    pub kappa: f64,
    pub n: usize,
    /// Basis size of the reported state.
    pub d: usize,
    pub energy: f64,
    pub lambda: [f64; LEADING_NONS],
    pub d_raw: f64,
    pub d_l1: f64,
    pub epsilon: f64,
    pub setting: (usize, usize),
    pub pauli: f64,
    pub q: f64,
    /// `κ² D2`, NaN when not computed.
    pub pt_distance: f64,
    /// NaN when not computed, +inf when D2 vanishes.
    pub pt_q0: f64,
    pub converged: bool,
    pub pinned: bool,
    pub truncation_dominated: bool,
    pub residual: f64,
    pub vertex_residual: f64,
    /// Worst of the 1-RDM trace, symmetry and spectrum-range errors.
    pub rdm_error: f64,
    pub error: Option<String>,
}

impl ResultRow {
    /// Every measured field NaN or unset.
    fn blank(p: &GridPoint) -> Self {
        Self {
            s: p.s,
            kappa: p.kappa,
            n: p.n,
            d: 0,
            energy: f64::NAN,
            lambda: [f64::NAN; LEADING_NONS],
            d_raw: f64::NAN,
            d_l1: f64::NAN,
            epsilon: f64::NAN,
            setting: (0, 0),
            pauli: f64::NAN,
            q: f64::NAN,
            pt_distance: f64::NAN,
            pt_q0: f64::NAN,
            converged: false,
            pinned: false,
            truncation_dominated: false,
            residual: f64::NAN,
            vertex_residual: f64::NAN,
            rdm_error: f64::NAN,
            error: None,
        }
    }

    fn failed(p: &GridPoint, reason: String) -> Self {
        Self { error: Some(reason), ..Self::blank(p) }
    }

    pub fn point(&self) -> GridPoint {
        GridPoint { s: self.s, kappa: self.kappa, n: self.n }
    }
}

/// Data kept beside each row for plots and checks.
#[derive(Debug, Clone)]
pub struct PointDetail {
    pub point: GridPoint,
    pub occupations: Vec<f64>,
    pub trace: Vec<TracePoint>,
    pub mutual_info: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    /// Same order as `rows`; `None` for failed points.
    pub details: Vec<Option<PointDetail>>,
    pub warnings: Vec<String>,
    pub cache_keys: Vec<String>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Closed-form ground energy where one exists: the non-interacting ladder
/// and the harmonic pair interaction (normal modes of the coupled trap).
pub fn reference_energy(s: f64, kappa: f64, n: usize) -> Option<f64> {
    let nf = n as f64;
    if kappa == 0.0 {
        Some(nf * nf / 2.0)
    } else if s == 2.0 && 1.0 + 2.0 * nf * kappa > 0.0 {
        Some(0.5 + (nf * nf - 1.0) / 2.0 * (1.0 + 2.0 * nf * kappa).sqrt())
    } else {
        None
    }
}

pub fn constraint_sets(config: &SweepConfig) -> Result<Vec<GPCSet>> {
    let mut sets = bundled_sets();
    for p in &config.constraints {
        sets.push(load_constraints(ConstraintSource::File(p))?);
    }
    Ok(sets)
}

pub fn cache(config: &SweepConfig) -> TensorCache {
    match &config.cache_dir {
        Some(dir) => TensorCache::new(dir),
        None => TensorCache::from_env(),
    }
}

fn rdm_error(matrix: &DMatrix<f64>, n: usize, lambda: &[f64]) -> f64 {
    let trace = (matrix.trace() - n as f64).abs();
    let asym = (matrix - matrix.transpose()).abs().max();
    let range = lambda.iter().map(|&l| (-l).max(l - 1.0).max(0.0)).fold(0.0, f64::max);
    trace.max(asym).max(range)
}

fn evaluate(
    p: &GridPoint,
    tensor: &TwoBodyTensor,
    sets: &[GPCSet],
    config: &SweepConfig,
) -> pinscan::Result<(ResultRow, PointDetail)> {
    let mut solver = SolverOptions::default();
    solver.davidson.tol = config.residual_tol;
    let opts = ConvergenceOptions { energy_tol: config.energy_tol, non_tol: config.non_tol, solver };
    let schedule: Vec<usize> = config.schedule.iter().copied().filter(|&d| d > p.n).collect();
    let ground = converge_in_d_with(tensor, p.kappa, p.n, &schedule, &opts)?;
    let state = &ground.result.vector;
    let rdm = one_rdm(state);
    let non = natural_occupations(&rdm);
    let lambda = &non.lambda;
    let popts = PinningOptions { truncation_tol: config.truncation_tol, pin_tol: config.pin_tol, mode: config.mode };
    let mut row = ResultRow::blank(p);
    // settings without bundled constraints (N = 2, say) still get energies and occupations
    match pinning_report(lambda, p.n, sets, &popts) {
        Err(pinscan::Error::NoTruncation { .. }) => {}
        Err(e) => return Err(e),
        Ok(report) => {
            let chosen = sets
                .iter()
                .find(|g| (g.n(), g.d()) == (report.n, report.d))
                .expect("report names a supplied set");
            row.d_l1 = min_distance(chosen, &report.lambda, DistanceMode::L1)?;
            row.d_raw = min_distance(chosen, &report.lambda, DistanceMode::Raw)?;
            row.vertex_residual = vertex_expansion_check(state, &non, chosen)?;
            if config.pt && report.n == p.n {
                let d = ground.result.d;
                let amps = first_order_amplitudes(&OneBodyTable::new(d), &tensor.truncate(d)?, p.n, d)?;
                let adapted = adapted_orbitals(&amps);
                let pred = leading_order_d(&amps, &adapted, chosen, config.outside_tol)?;
                row.pt_distance = p.kappa * p.kappa * pred.d2;
                row.pt_q0 = pred.q0.unwrap_or(f64::INFINITY);
            }
            row.epsilon = report.epsilon;
            row.setting = (report.n, report.d);
            row.pauli = report.pauli;
            row.q = report.q;
            row.pinned = report.pinned;
            row.truncation_dominated = report.truncation_dominated;
        }
    }
    let mut lead = [0.0; LEADING_NONS];
    for (slot, &l) in lead.iter_mut().zip(lambda) {
        *slot = l;
    }
    row.d = ground.result.d;
    row.energy = ground.result.energy;
    row.lambda = lead;
    row.converged = ground.converged;
    row.residual = ground.result.residual;
    row.rdm_error = rdm_error(&rdm.matrix, p.n, lambda);
    let detail = PointDetail {
        point: *p,
        occupations: lambda.clone(),
        mutual_info: config.mutual_info.then(|| mutual_information(state).matrix),
        trace: ground.trace,
    };
    Ok((row, detail))
}

/// Runs every grid point; a failing point yields a row carrying the error
/// and leaves the others untouched.  Rows come back sorted by (s, κ, N).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let sets = constraint_sets(config)?;
    let (points, warnings) = config.grid();
    let cache = cache(config);
    let d_max = *config.schedule.last().expect("validated schedule");
    let mut tensors: HashMap<u64, std::result::Result<Arc<TwoBodyTensor>, String>> = HashMap::new();
    let mut cache_keys = Vec::new();
    for p in &points {
        tensors.entry(p.s.to_bits()).or_insert_with(|| {
            cache_keys.push(TensorCache::file_name(p.s, d_max));
            cache.load_or_build(p.s, d_max).map(Arc::new).map_err(|e| e.to_string())
        });
    }
    let results: Vec<(ResultRow, Option<PointDetail>)> = points
        .par_iter()
        .map(|p| {
            let outcome = match &tensors[&p.s.to_bits()] {
                Ok(t) => evaluate(p, t, &sets, config).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match outcome {
                Ok((row, detail)) => (row, Some(detail)),
                Err(e) => (ResultRow::failed(p, e), None),
            }
        })
        .collect();
    let (rows, details) = results.into_iter().unzip();
    Ok(SweepOutput { rows, details, warnings, cache_keys })
}
