//! Line-oriented sweep configuration.  Each line is `key = value`; values
//! may be comma separated, and list keys also accept `lo:hi:count` for an
//! evenly spaced inclusive range.  Repeating a list key appends to it, the
//! first occurrence replaces the default.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use pinscan::gpc::DistanceMode;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub s: Vec<f64>,
    pub kappa: Vec<f64>,
    pub n: Vec<usize>,
    /// Basis sizes tried in order until energy and occupations settle.
    pub schedule: Vec<usize>,
    pub energy_tol: f64,
    pub non_tol: f64,
    pub residual_tol: f64,
    pub pin_tol: f64,
    pub truncation_tol: f64,
    /// Largest fraction of first-order weight allowed outside the window.
    pub outside_tol: f64,
    pub constraints: Vec<PathBuf>,
    pub output: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub mode: DistanceMode,
    pub pt: bool,
    pub mutual_info: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            s: vec![-0.75, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
            kappa: vec![-1.0, -0.1, 0.1, 1.0],
            n: vec![3, 4],
            schedule: vec![20, 30, 40, 50, 60],
            energy_tol: 1e-8,
            non_tol: 1e-8,
            residual_tol: 1e-11,
            pin_tol: 1e-12,
            truncation_tol: 1e-6,
            outside_tol: 0.1,
            constraints: Vec::new(),
            output: PathBuf::from("pinscan-out"),
            cache_dir: None,
            mode: DistanceMode::Raw,
            pt: true,
            mutual_info: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub s: f64,
    pub kappa: f64,
    pub n: usize,
}

impl GridPoint {
    pub fn label(&self) -> String {
        format!("s{}_k{}_N{}", self.s, self.kappa, self.n)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> CliError {
    CliError::Config { line, reason: reason.into() }
}

fn parse_one<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| parse_err(line, format!("bad value `{}` for `{key}`", v.trim())))
}

fn parse_floats(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [x] => out.push(parse_one(line, key, x)?),
            [lo, hi, count] => {
                let lo: f64 = parse_one(line, key, lo)?;
                let hi: f64 = parse_one(line, key, hi)?;
                let count: usize = parse_one(line, key, count)?;
                match count {
                    0 => return Err(parse_err(line, "empty range")),
                    1 => out.push(lo),
                    _ => out.extend((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)),
                }
            }
            _ => return Err(parse_err(line, format!("bad list item `{part}`"))),
        }
    }
    Ok(out)
}

fn parse_usizes(line: usize, key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_one(line, key, p))
        .collect()
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        v => Err(parse_err(line, format!("bad value `{v}` for `{key}`"))),
    }
}

/// Applies `key = value` settings on top of a config.
#[derive(Debug)]
pub struct ConfigBuilder {
    config: SweepConfig,
    seen: HashSet<&'static str>,
}

impl ConfigBuilder {
    pub fn new(base: SweepConfig) -> Self {
        Self { config: base, seen: HashSet::new() }
    }

    fn list<'a, T>(&mut self, key: &'static str, field: &'a mut Vec<T>) -> &'a mut Vec<T> {
        if self.seen.insert(key) {
            field.clear();
        }
        field
    }

    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let mut c = std::mem::take(&mut self.config);
        let r = self.set_into(&mut c, line, key, value);
        self.config = c;
        r
    }

    fn set_into(&mut self, c: &mut SweepConfig, line: usize, key: &str, value: &str) -> Result<()> {
        match key {
            "s" => {
                let v = parse_floats(line, key, value)?;
                self.list("s", &mut c.s).extend(v)
            }
            "kappa" => {
                let v = parse_floats(line, key, value)?;
                self.list("kappa", &mut c.kappa).extend(v)
            }
            "n" | "N" => {
                let v = parse_usizes(line, key, value)?;
                self.list("n", &mut c.n).extend(v)
            }
            "d" => {
                let v = parse_usizes(line, key, value)?;
                self.list("d", &mut c.schedule).extend(v)
            }
            "constraints" => {
                let v = PathBuf::from(value.trim());
                self.list("constraints", &mut c.constraints).push(v)
            }
            "energy_tol" => c.energy_tol = parse_one(line, key, value)?,
            "non_tol" => c.non_tol = parse_one(line, key, value)?,
            "residual_tol" => c.residual_tol = parse_one(line, key, value)?,
            "pin_tol" => c.pin_tol = parse_one(line, key, value)?,
            "truncation_tol" => c.truncation_tol = parse_one(line, key, value)?,
            "outside_tol" => c.outside_tol = parse_one(line, key, value)?,
            "output" => c.output = PathBuf::from(value.trim()),
            "cache_dir" => c.cache_dir = Some(PathBuf::from(value.trim())),
            "mode" => {
                c.mode = value.trim().parse().map_err(|_| parse_err(line, format!("unknown mode `{}`", value.trim())))?
            }
            "pt" => c.pt = parse_bool(line, key, value)?,
            "mutual_info" => c.mutual_info = parse_bool(line, key, value)?,
            _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn parse_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| parse_err(k + 1, "expected `key = value`"))?;
            self.set(k + 1, key.trim(), value)?;
        }
        Ok(())
    }

    /// `key=value` settings from the command line, reported as line 0.
    pub fn parse_assignment(&mut self, item: &str) -> Result<()> {
        let (key, value) = item.split_once('=').ok_or_else(|| parse_err(0, format!("expected key=value, got `{item}`")))?;
        self.set(0, key.trim(), value)
    }

    pub fn build(self) -> Result<SweepConfig> {
        self.config.validate()?;
        Ok(self.config)
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = ConfigBuilder::new(Self::default());
        b.parse_text(text)?;
        b.build()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.is_empty() || self.kappa.is_empty() || self.n.is_empty() {
            return Err(parse_err(0, "empty grid"));
        }
        if self.schedule.is_empty() || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(0, "basis schedule must be strictly increasing"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0 || n >= self.schedule[0]) {
            return Err(parse_err(0, format!("N = {n} does not fit the smallest basis {}", self.schedule[0])));
        }
        if self.s.iter().chain(&self.kappa).any(|x| !x.is_finite()) {
            return Err(parse_err(0, "non-finite grid value"));
        }
        Ok(())
    }

    /// Grid points in (s, κ, N) order and a warning for every point dropped
    /// because κ < 0 has no bound ground state at s ≥ 2.
    pub fn grid(&self) -> (Vec<GridPoint>, Vec<String>) {
        let mut points = Vec::new();
        let mut warnings = Vec::new();
        for &s in &self.s {
            for &kappa in &self.kappa {
                if kappa < 0.0 && s >= 2.0 {
                    warnings.push(format!("skipping s={s}, κ={kappa}: unbounded for s >= 2"));
                    continue;
                }
                for &n in &self.n {
                    points.push(GridPoint { s, kappa, n });
                }
            }
        }
        points.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.kappa.total_cmp(&b.kappa)).then(a.n.cmp(&b.n)));
        points.dedup();
        (points, warnings)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let joinu = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "s = {}", join(&self.s));
        let _ = writeln!(out, "kappa = {}", join(&self.kappa));
        let _ = writeln!(out, "n = {}", joinu(&self.n));
        let _ = writeln!(out, "d = {}", joinu(&self.schedule));
        for (k, v) in [
            ("energy_tol", self.energy_tol),
            ("non_tol", self.non_tol),
            ("residual_tol", self.residual_tol),
            ("pin_tol", self.pin_tol),
            ("truncation_tol", self.truncation_tol),
            ("outside_tol", self.outside_tol),
        ] {
            let _ = writeln!(out, "{k} = {v:e}");
        }
        for p in &self.constraints {
            let _ = writeln!(out, "constraints = {}", p.display());
        }
        let _ = writeln!(out, "output = {}", self.output.display());
        if let Some(dir) = &self.cache_dir {
            let _ = writeln!(out, "cache_dir = {}", dir.display());
        }
        let _ = writeln!(out, "mode = {}", self.mode.name());
        let _ = writeln!(out, "pt = {}", self.pt);
        let _ = writeln!(out, "mutual_info = {}", self.mutual_info);
        out
    }
}
