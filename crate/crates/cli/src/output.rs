use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::SweepConfig;
use crate::sweep::{reference_energy, ResultRow, SweepOutput, LEADING_NONS};
use crate::{CliError, Result};

/// `%.16e`-style scientific notation with a signed two-digit exponent; enough
/// digits that parsing gives back the same bits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn csv_header() -> String {
    let mut cols: Vec<String> = ["s", "kappa", "N", "d", "E"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=LEADING_NONS).map(|k| format!("lambda{k}")));
    cols.extend(
        [
            "D_raw",
            "D_l1",
            "eps",
            "N_trunc",
            "d_trunc",
            "S",
            "Q",
            "kappa2_D2",
            "Q0",
            "converged",
            "pinned",
            "truncation_dominated",
            "residual",
            "vertex_residual",
            "rdm_error",
            "status",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn csv_line(r: &ResultRow) -> String {
    let mut f: Vec<String> = vec![fmt_float(r.s), fmt_float(r.kappa), r.n.to_string(), r.d.to_string(), fmt_float(r.energy)];
    f.extend(r.lambda.iter().map(|&x| fmt_float(x)));
    f.extend([r.d_raw, r.d_l1, r.epsilon].map(fmt_float));
    f.push(r.setting.0.to_string());
    f.push(r.setting.1.to_string());
    f.extend([r.pauli, r.q, r.pt_distance, r.pt_q0].map(fmt_float));
    f.extend([r.converged, r.pinned, r.truncation_dominated].map(|b| (b as u8).to_string()));
    f.extend([r.residual, r.vertex_residual, r.rdm_error].map(fmt_float));
    f.push(match &r.error {
        None => "ok".into(),
        Some(e) => format!("error: {}", e.replace([',', '\n'], ";")),
    });
    f.join(",")
}

pub fn write_csv(rows: &[ResultRow]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

pub fn read_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == csv_header() => {}
        _ => return Err(CliError::Csv { line: 1, reason: "unexpected header".into() }),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| CliError::Csv { line: k + 1, reason: reason.into() };
        let f: Vec<&str> = line.splitn(5 + LEADING_NONS + 16, ',').collect();
        if f.len() != 5 + LEADING_NONS + 16 {
            return Err(bad("wrong column count"));
        }
        let num = |i: usize| parse_float(f[i]).ok_or_else(|| bad("bad float"));
        let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad("bad integer"));
        let flag = |i: usize| match f[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad("bad flag")),
        };
        let mut lambda = [0.0; LEADING_NONS];
        for (j, slot) in lambda.iter_mut().enumerate() {
            *slot = num(5 + j)?;
        }
        let b = 5 + LEADING_NONS;
        let status = f[b + 15];
        rows.push(ResultRow {
            s: num(0)?,
            kappa: num(1)?,
            n: int(2)?,
            d: int(3)?,
            energy: num(4)?,
            lambda,
            d_raw: num(b)?,
            d_l1: num(b + 1)?,
            epsilon: num(b + 2)?,
            setting: (int(b + 3)?, int(b + 4)?),
            pauli: num(b + 5)?,
            q: num(b + 6)?,
            pt_distance: num(b + 7)?,
            pt_q0: num(b + 8)?,
            converged: flag(b + 9)?,
            pinned: flag(b + 10)?,
            truncation_dominated: flag(b + 11)?,
            residual: num(b + 12)?,
            vertex_residual: num(b + 13)?,
            rdm_error: num(b + 14)?,
            error: match status {
                "ok" => None,
                e => Some(e.strip_prefix("error: ").unwrap_or(e).to_string()),
            },
        });
    }
    Ok(rows)
}

/// Plot value, or `pinned` where the quantity is at its boundary.
fn plot_value(x: f64, pinned: bool) -> String {
    if pinned || x.is_infinite() {
        "pinned".into()
    } else {
        fmt_float(x)
    }
}

/// One gnuplot data block per (κ, N), separated by two blank lines; rows
/// without constraint data are left out.
fn blocks(rows: &[ResultRow], column: impl Fn(&ResultRow) -> String) -> String {
    let rows: Vec<&ResultRow> = rows.iter().filter(|r| r.error.is_none() && r.setting.0 > 0).collect();
    let mut keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.kappa, r.n)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    let mut out = String::new();
    for (k, &(kappa, n)) in keys.iter().enumerate() {
        if k > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# kappa = {kappa} N = {n}");
        for r in rows.iter().filter(|r| r.kappa == kappa && r.n == n) {
            let _ = writeln!(out, "{} {}", fmt_float(r.s), column(r));
        }
    }
    out
}

pub fn d_vs_s(rows: &[ResultRow]) -> String {
    blocks(rows, |r| plot_value(r.d_raw.log10(), r.pinned || r.d_raw <= 0.0))
}

pub fn q_vs_s(rows: &[ResultRow]) -> String {
    blocks(rows, |r| plot_value(r.q, r.pinned))
}

fn convergence(out: &SweepOutput, n: usize) -> Option<String> {
    let mut text = String::from("# d |E - E_ref| E\n");
    let mut any = false;
    for d in out.details.iter().flatten().filter(|d| d.point.n == n) {
        let Some(e_ref) = reference_energy(d.point.s, d.point.kappa, n) else { continue };
        if any {
            text.push_str("\n\n");
        }
        any = true;
        let _ = writeln!(text, "# s = {} kappa = {} E_ref = {}", d.point.s, d.point.kappa, fmt_float(e_ref));
        for t in &d.trace {
            let _ = writeln!(text, "{} {} {}", t.d, fmt_float((t.energy - e_ref).abs()), fmt_float(t.energy));
        }
    }
    any.then_some(text)
}

fn mutual_info_csv(m: &nalgebra::DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_float(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn run_meta(out: &SweepOutput, config: &SweepConfig) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "pinscan_version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "distance_mode = {}", config.mode.name());
    let _ = writeln!(text, "entropy_log = natural");
    let _ = writeln!(text, "float_format = %.16e");
    let _ = writeln!(text, "cache_dir = {}", crate::sweep::cache(config).dir().display());
    for k in &out.cache_keys {
        let _ = writeln!(text, "cache_key = {k}");
    }
    let _ = writeln!(text, "points = {}", out.rows.len());
    let _ = writeln!(text, "failures = {}", out.failures());
    for w in &out.warnings {
        let _ = writeln!(text, "warning = {w}");
    }
    text.push_str("\n# configuration\n");
    text.push_str(&config.to_text());
    text
}

/// Writes every artifact under `config.output` and returns the paths.
pub fn emit_outputs(out: &SweepOutput, config: &SweepConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("results.csv".into(), write_csv(&out.rows))?;
    put("D_vs_s.dat".into(), d_vs_s(&out.rows))?;
    put("Q_vs_s.dat".into(), q_vs_s(&out.rows))?;
    let mut ns: Vec<usize> = out.rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        if let Some(body) = convergence(out, n) {
            put(format!("convergence_N{n}.dat"), body)?;
        }
    }
    for d in out.details.iter().flatten() {
        if let Some(m) = &d.mutual_info {
            put(format!("mutualinfo_{}.csv", d.point.label()), mutual_info_csv(m))?;
        }
    }
    put("run.meta".into(), run_meta(out, config))?;
    Ok(written)
}

pub fn read_results(dir: &Path) -> Result<Vec<ResultRow>> {
    read_csv(&fs::read_to_string(dir.join("results.csv"))?)
}
