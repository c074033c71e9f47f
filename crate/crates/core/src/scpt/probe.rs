use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{rotate_orbitals, solve_ground_state, FockBasis, HamiltonianTables, SolverOptions};
use crate::matels::{build_tensor, InteractionSpec, OneBodyTable, TwoBodyTensor};
use crate::rdm::{natural_occupations, one_rdm};

/// Amplitudes below this are treated as solver noise and left out of fits.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Doubles slopes above this signal a vanishing first-order term (r > 1).
pub const R_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub kappas: Vec<f64>,
    /// Largest single / double amplitude in the natural-orbital basis.
    pub singles: Vec<f64>,
    pub doubles: Vec<f64>,
    /// `1 − |c_HF|`.
    pub deficit: Vec<f64>,
    pub singles_slope: Option<f64>,
    pub doubles_slope: Option<f64>,
    pub deficit_slope: Option<f64>,
    /// `[min, max]` of |κ| over the points above the noise floor for the
    /// doubles fit.
    pub usable: Option<(f64, f64)>,
    pub r_exceeds_one: bool,
}

fn slope(kappas: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = kappas
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > NOISE_FLOOR)
        .map(|(k, y)| (k.abs().ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

/// Log-log slopes of the singles, doubles and normalization deficit of the
/// ground state written in its own natural orbitals.
pub fn scaling_probe(spec: &InteractionSpec, n: usize, d: usize, kappas: &[f64]) -> Result<ScalingFit> {
    scaling_probe_with(&build_tensor(spec, d)?, n, d, kappas, &SolverOptions::default())
}

pub fn scaling_probe_with(
    tensor: &TwoBodyTensor,
    n: usize,
    d: usize,
    kappas: &[f64],
    opts: &SolverOptions,
) -> Result<ScalingFit> {
    if kappas.len() < 2 || kappas.iter().any(|&k| k == 0.0 || !k.is_finite()) {
        return Err(Error::BadSchedule);
    }
    let basis = Arc::new(FockBasis::new(n, d)?);
    let tables = HamiltonianTables::new(&OneBodyTable::new(d), tensor)?;
    let reference = (1u128 << n) - 1;
    let (mut singles, mut doubles, mut deficit) = (Vec::new(), Vec::new(), Vec::new());
    for &kappa in kappas {
        let ground = solve_ground_state(&basis, &tables, kappa, opts)?;
        let non = natural_occupations(&one_rdm(&ground.vector));
        let rotated = rotate_orbitals(&ground.vector, &non.orbitals)?;
        let (mut s, mut dd, mut c0) = (0.0f64, 0.0f64, 0.0);
        for (&mask, &c) in basis.masks().iter().zip(rotated.amplitudes()) {
            match (mask ^ reference).count_ones() {
                0 => c0 = c.abs(),
                2 => s = s.max(c.abs()),
                4 => dd = dd.max(c.abs()),
                _ => {}
            }
        }
        singles.push(s);
        doubles.push(dd);
        deficit.push(1.0 - c0);
    }
    let usable_k: Vec<f64> = kappas
        .iter()
        .zip(&doubles)
        .filter(|(_, &y)| y > NOISE_FLOOR)
        .map(|(k, _)| k.abs())
        .collect();
    let usable = if usable_k.is_empty() {
        None
    } else {
        Some(usable_k.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &k| (lo.min(k), hi.max(k))))
    };
    let doubles_slope = slope(kappas, &doubles);
    Ok(ScalingFit {
        singles_slope: slope(kappas, &singles),
        deficit_slope: slope(kappas, &deficit),
        r_exceeds_one: doubles_slope.is_some_and(|x| x > R_THRESHOLD),
        doubles_slope,
        usable,
        kappas: kappas.to_vec(),
        singles,
        doubles,
        deficit,
    })
}
