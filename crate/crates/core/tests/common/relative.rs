//! Two fermions: the centre of mass separates, leaving the odd states of
//! `-½ ∂² + ½ r² + κ (√2 |r|)^s` on the relative coordinate.  Solved by finite
//! differences on (0, L] with a Dirichlet wall at r = 0, Sturm bisection for
//! the lowest eigenvalue, and Richardson extrapolation in the step size.

fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (k, &a) in diag.iter().enumerate() {
        let prev = if k == 0 { 0.0 } else { off * off / q };
        q = a - x - prev;
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_fd(s: f64, kappa: f64, h: f64, length: f64) -> f64 {
    let m = (length / h).round() as usize;
    let diag: Vec<f64> = (1..=m)
        .map(|k| {
            let r = k as f64 * h;
            1.0 / (h * h) + 0.5 * r * r + kappa * (std::f64::consts::SQRT_2 * r).powf(s)
        })
        .collect();
    let off = -0.5 / (h * h);
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ground energy of two trapped fermions (centre of mass included).
pub fn two_fermion_energy(s: f64, kappa: f64) -> f64 {
    let length = 12.0;
    let e1 = lowest_fd(s, kappa, 0.004, length);
    let e2 = lowest_fd(s, kappa, 0.002, length);
    let e3 = lowest_fd(s, kappa, 0.001, length);
    // two Richardson levels for the h² and h⁴ terms
    let r1 = (4.0 * e2 - e1) / 3.0;
    let r2 = (4.0 * e3 - e2) / 3.0;
    0.5 + (16.0 * r2 - r1) / 15.0
}
