//! Two-dimensional quadrature of the pair integral in centre-of-mass and
//! relative coordinates.  With `X = (x1 + x2)/√2`, `r = (x1 - x2)/√2` the
//! Gaussian factor separates, Gauss-Hermite handles `X` and generalized
//! Gauss-Laguerre in `t = r²` with `α = (s-1)/2` absorbs `|r|^s`, so the rule
//! is exact for the polynomial part and regular for `-1 < s < 0`.

use nalgebra::{DMatrix, SymmetricEigen};

/// ln Γ(x) for x > 0 by upward shift and the Stirling series.
pub fn ln_gamma(x: f64) -> f64 {
    let mut x = x;
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    let series = (1.0 / 12.0
        - z * (1.0 / 360.0 - z * (1.0 / 1260.0 - z * (1.0 / 1680.0 - z * (1.0 / 1188.0)))))
        / x;
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Nodes and weights from a symmetric tridiagonal Jacobi matrix, weights by
/// the Christoffel sum over orthonormal polynomials after Newton polishing.
fn gauss_rule(
    n: usize,
    diag: impl Fn(usize) -> f64,
    off: impl Fn(usize) -> f64,
    p0: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        j[(k, k)] = diag(k);
        if k + 1 < n {
            j[(k, k + 1)] = off(k + 1);
            j[(k + 1, k)] = off(k + 1);
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // orthonormal p_k with x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}
    let eval = |x: f64| -> (Vec<f64>, f64, f64) {
        let mut p = vec![0.0; n + 1];
        let mut dp = vec![0.0; n + 1];
        p[0] = p0;
        for k in 0..n {
            let prev = if k > 0 { p[k - 1] } else { 0.0 };
            let dprev = if k > 0 { dp[k - 1] } else { 0.0 };
            let bk = if k > 0 { off(k) } else { 0.0 };
            p[k + 1] = ((x - diag(k)) * p[k] - bk * prev) / off(k + 1);
            dp[k + 1] = (p[k] + (x - diag(k)) * dp[k] - bk * dprev) / off(k + 1);
        }
        let (pn, dpn) = (p[n], dp[n]);
        p.truncate(n);
        (p, pn, dpn)
    };

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (_, pn, dpn) = eval(*x);
            if dpn != 0.0 {
                *x -= pn / dpn;
            }
        }
        let (p, _, _) = eval(*x);
        weights.push(1.0 / p.iter().map(|v| v * v).sum::<f64>());
    }
    (nodes, weights)
}

/// Rule for `∫ e^{-x²} f(x) dx`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_rule(
        n,
        |_| 0.0,
        |k| (k as f64 / 2.0).sqrt(),
        std::f64::consts::PI.powf(-0.25),
    )
}

/// Rule for `∫_0^∞ t^α e^{-t} f(t) dt`.
pub fn gauss_laguerre(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    gauss_rule(
        n,
        |k| 2.0 * k as f64 + alpha + 1.0,
        |k| (k as f64 * (k as f64 + alpha)).sqrt(),
        (-0.5 * ln_gamma(alpha + 1.0)).exp(),
    )
}

/// Orthonormal Hermite polynomials `ψ_n(x) e^{x²/2}` for n < count.
pub fn hermite_normalized(x: f64, count: usize) -> Vec<f64> {
    let mut h = vec![0.0; count.max(1)];
    h[0] = std::f64::consts::PI.powf(-0.25);
    if count > 1 {
        h[1] = std::f64::consts::SQRT_2 * x * h[0];
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        h[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
    }
    h.truncate(count);
    h
}

pub struct PairQuadrature {
    d: usize,
    s: f64,
    // (weight, x1, x2) triples with the Hermite values at x1 and x2
    points: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl PairQuadrature {
    pub fn new(s: f64, d: usize, nodes: usize) -> Self {
        let (xs, wx) = gauss_hermite(nodes);
        let (ts, wt) = gauss_laguerre(nodes, 0.5 * (s - 1.0));
        let scale = 2f64.powf(0.5 * s) * 0.5;
        let mut points = Vec::with_capacity(2 * nodes * nodes);
        for (x, wxi) in xs.iter().zip(&wx) {
            for (t, wti) in ts.iter().zip(&wt) {
                let r = t.sqrt();
                for rr in [r, -r] {
                    let x1 = (x + rr) / std::f64::consts::SQRT_2;
                    let x2 = (x - rr) / std::f64::consts::SQRT_2;
                    points.push((
                        scale * wxi * wti,
                        hermite_normalized(x1, d),
                        hermite_normalized(x2, d),
                    ));
                }
            }
        }
        Self { d, s, points }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn element(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> f64 {
        self.points
            .iter()
            .map(|(w, h1, h2)| w * h1[i1] * h1[j1] * h2[i2] * h2[j2])
            .sum()
    }
}
