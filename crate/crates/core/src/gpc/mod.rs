//! Generalized Pauli constraints: loading coefficient tables, facet values,
//! distances to the polytope and Pauli-simplex boundaries, and the
//! truncation of a long occupation vector to a setting with known data.
//!
//! A row `(κ0, κ1, .., κd)` stands for `D(λ) = κ0 + Σ κk λk`, with the
//! occupations ordered non-increasingly.

mod truncation;

use std::path::Path;

use crate::error::{Error, Result};

pub use truncation::{
    pinning_report, truncate, truncation_error, PinningOptions, PinningReport, Truncation,
};

const FORMAT_LINE: &str = "gpc-format 1";

const BUNDLED: [(usize, usize, &str); 3] = [
    (3, 6, include_str!("../../data/gpc_3_6.txt")),
    (3, 7, include_str!("../../data/gpc_3_7.txt")),
    (4, 7, include_str!("../../data/gpc_4_7.txt")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPCSet {
    n: usize,
    d: usize,
    inequalities: Vec<Vec<i64>>,
    equalities: Vec<Vec<i64>>,
}

/// Where constraint rows come from.
#[derive(Debug, Clone, Copy)]
pub enum ConstraintSource<'a> {
    Bundled { n: usize, d: usize },
    File(&'a Path),
    Text(&'a str),
}

pub fn load_constraints(source: ConstraintSource<'_>) -> Result<GPCSet> {
    match source {
        ConstraintSource::Bundled { n, d } => bundled(n, d),
        ConstraintSource::File(path) => GPCSet::parse(&std::fs::read_to_string(path)?),
        ConstraintSource::Text(text) => GPCSet::parse(text),
    }
}

pub fn bundled(n: usize, d: usize) -> Result<GPCSet> {
    BUNDLED
        .iter()
        .find(|(bn, bd, _)| (*bn, *bd) == (n, d))
        .map(|(_, _, text)| GPCSet::parse(text))
        .unwrap_or(Err(Error::UnknownSetting { n, d }))
}

pub fn bundled_settings() -> Vec<(usize, usize)> {
    BUNDLED.iter().map(|&(n, d, _)| (n, d)).collect()
}

/// Every bundled table, loaded.
pub fn bundled_sets() -> Vec<GPCSet> {
    BUNDLED.iter().map(|(_, _, text)| GPCSet::parse(text).expect("bundled data validates")).collect()
}

fn format_error(line: usize, reason: impl Into<String>) -> Error {
    Error::ConstraintFormat { line, reason: reason.into() }
}

impl GPCSet {
    /// Builds a set from explicit rows and checks the Hartree-Fock vertex.
    pub fn new(n: usize, d: usize, inequalities: Vec<Vec<i64>>, equalities: Vec<Vec<i64>>) -> Result<Self> {
        if n == 0 || n >= d {
            return Err(Error::InvalidSetting { n, d, reason: "need 1 <= N < d" });
        }
        let set = Self { n, d, inequalities, equalities };
        for (k, row) in set.inequalities.iter().chain(&set.equalities).enumerate() {
            if row.len() != d + 1 {
                return Err(format_error(k + 1, format!("row has {} coefficients, expected {}", row.len(), d + 1)));
            }
        }
        for (k, row) in set.inequalities.iter().enumerate() {
            let v = set.vertex_value(row);
            if v < 0 {
                return Err(Error::HartreeFockViolation { row: k + 1, value: v });
            }
        }
        for (k, row) in set.equalities.iter().enumerate() {
            let v = set.vertex_value(row);
            if v != 0 {
                return Err(Error::HartreeFockViolation { row: set.inequalities.len() + k + 1, value: v });
            }
        }
        Ok(set)
    }

    /// Parses the line-oriented text format; `row` in a Hartree-Fock error
    /// refers to the source line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == FORMAT_LINE => {}
            Some((k, l)) => return Err(format_error(k, format!("expected '{FORMAT_LINE}', found '{l}'"))),
            None => return Err(format_error(0, "empty constraint file")),
        }
        let (setting_line, n, d) = match lines.next() {
            Some((k, l)) => {
                let parts: Vec<&str> = l.split_whitespace().collect();
                let parse = |s: &str| s.parse::<usize>().map_err(|_| format_error(k, format!("bad integer '{s}'")));
                if parts.len() != 3 || parts[0] != "setting" {
                    return Err(format_error(k, "expected 'setting N d'"));
                }
                (k, parse(parts[1])?, parse(parts[2])?)
            }
            None => return Err(format_error(0, "missing setting line")),
        };
        if n == 0 || n >= d {
            return Err(format_error(setting_line, format!("setting ({n}, {d}) needs 1 <= N < d")));
        }
        let mut ineq = Vec::new();
        let mut eq = Vec::new();
        let mut ineq_lines = Vec::new();
        let mut eq_lines = Vec::new();
        for (k, l) in lines {
            let mut parts = l.split_whitespace();
            let kind = parts.next().unwrap_or("");
            let row: Vec<i64> = parts
                .map(|s| s.parse::<i64>().map_err(|_| format_error(k, format!("bad integer coefficient '{s}'"))))
                .collect::<Result<_>>()?;
            if row.len() != d + 1 {
                return Err(format_error(k, format!("row has {} coefficients, expected {}", row.len(), d + 1)));
            }
            match kind {
                "ineq" => {
                    ineq.push(row);
                    ineq_lines.push(k);
                }
                "eq" => {
                    eq.push(row);
                    eq_lines.push(k);
                }
                other => return Err(format_error(k, format!("unknown row kind '{other}'"))),
            }
        }
        match Self::new(n, d, ineq, eq) {
            Err(Error::HartreeFockViolation { row, value }) => {
                let line = ineq_lines.iter().chain(&eq_lines).nth(row - 1).copied().unwrap_or(row);
                Err(Error::HartreeFockViolation { row: line, value })
            }
            other => other,
        }
    }

    /// Serializes in the text format read by [`GPCSet::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{FORMAT_LINE}\nsetting {} {}\n", self.n, self.d);
        for (kind, rows) in [("ineq", &self.inequalities), ("eq", &self.equalities)] {
            for row in rows {
                let coeffs: Vec<String> = row.iter().map(i64::to_string).collect();
                out.push_str(&format!("{kind} {}\n", coeffs.join(" ")));
            }
        }
        out
    }

    fn vertex_value(&self, row: &[i64]) -> i64 {
        row[0] + row[1..=self.n].iter().sum::<i64>()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn setting(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    /// Number of inequality rows.
    pub fn count(&self) -> usize {
        self.inequalities.len()
    }

    pub fn inequalities(&self) -> &[Vec<i64>] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Vec<i64>] {
        &self.equalities
    }

    /// Hartree-Fock vertex `(1, .., 1, 0, .., 0)`.
    pub fn hf_vertex(&self) -> Vec<f64> {
        (0..self.d).map(|k| if k < self.n { 1.0 } else { 0.0 }).collect()
    }
}

fn evaluate(row: &[i64], lambda: &[f64]) -> f64 {
    row[0] as f64 + row[1..].iter().zip(lambda).map(|(&k, &l)| k as f64 * l).sum::<f64>()
}

/// Values of every row at λ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValues {
    pub inequalities: Vec<f64>,
    pub equalities: Vec<f64>,
}

pub fn constraint_values(gpcs: &GPCSet, lambda: &[f64]) -> Result<ConstraintValues> {
    if lambda.len() != gpcs.d {
        return Err(Error::DimensionMismatch { expected: gpcs.d, got: lambda.len() });
    }
    Ok(ConstraintValues {
        inequalities: gpcs.inequalities.iter().map(|r| evaluate(r, lambda)).collect(),
        equalities: gpcs.equalities.iter().map(|r| evaluate(r, lambda)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    /// `min_j D_j(λ)`.
    #[default]
    Raw,
    /// Each `D_j` divided by its largest coefficient magnitude.
    L1,
}

impl DistanceMode {
    pub fn name(self) -> &'static str {
        match self {
            DistanceMode::Raw => "raw",
            DistanceMode::L1 => "l1",
        }
    }
}

impl std::str::FromStr for DistanceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(DistanceMode::Raw),
            "l1" => Ok(DistanceMode::L1),
            other => Err(format!("unknown distance mode '{other}' (raw|l1)")),
        }
    }
}

fn row_scale(row: &[i64], mode: DistanceMode) -> f64 {
    match mode {
        DistanceMode::Raw => 1.0,
        DistanceMode::L1 => row[1..].iter().map(|k| k.abs()).max().unwrap_or(1).max(1) as f64,
    }
}

/// Per-inequality distances in the chosen mode.
pub fn row_distances(gpcs: &GPCSet, lambda: &[f64], mode: DistanceMode) -> Result<Vec<f64>> {
    let values = constraint_values(gpcs, lambda)?;
    Ok(values
        .inequalities
        .iter()
        .zip(&gpcs.inequalities)
        .map(|(&v, row)| v / row_scale(row, mode))
        .collect())
}

/// Minimal distance to the inequality facets; equalities never enter.
pub fn min_distance(gpcs: &GPCSet, lambda: &[f64], mode: DistanceMode) -> Result<f64> {
    Ok(row_distances(gpcs, lambda, mode)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `min(1 - λ1, λd)`.
pub fn pauli_distance(lambda: &[f64]) -> f64 {
    match (lambda.first(), lambda.last()) {
        (Some(&first), Some(&last)) => (1.0 - first).min(last),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QValue {
    /// `log10(S / D)`; `+∞` when D ≤ 0 (pinned).
    pub q: f64,
    pub per_row: Vec<f64>,
}

fn log_ratio(s: f64, d: f64) -> f64 {
    if d <= 0.0 {
        f64::INFINITY
    } else {
        (s / d).log10()
    }
}

/// Q from raw-mode distances, `Q = max_j Q_j`.
pub fn q_parameter(gpcs: &GPCSet, lambda: &[f64]) -> Result<QValue> {
    let s = pauli_distance(lambda);
    let rows = row_distances(gpcs, lambda, DistanceMode::Raw)?;
    let per_row: Vec<f64> = rows.iter().map(|&d| log_ratio(s, d)).collect();
    let q = per_row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QValue { q, per_row })
}
