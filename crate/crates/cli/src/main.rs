use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pinscan::gpc::{bundled, bundled_sets, load_constraints, ConstraintSource};
use pinscan::matels::OneBodyTable;
use pinscan::scpt::{adapted_orbitals, first_order_amplitudes, leading_order_d};
use pinscan_cli::output::{emit_outputs, fmt_float};
use pinscan_cli::sweep::{cache, run_sweep};
use pinscan_cli::validate::{check_constraints, oracle_checks};
use pinscan_cli::{CliError, ConfigBuilder, SweepConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "pinscan", version, about = "Quasipinning scans for trapped one-dimensional fermions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings applied after the file (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Vec<String>,
    #[arg(long)]
    n: Vec<String>,
    /// Basis schedule, e.g. `20,30,40`.
    #[arg(long)]
    d: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl Overrides {
    fn build(&self) -> pinscan_cli::Result<SweepConfig> {
        let mut b = ConfigBuilder::new(SweepConfig::default());
        if let Some(path) = &self.config {
            b.parse_text(&std::fs::read_to_string(path)?)?;
        }
        for item in &self.set {
            b.parse_assignment(item)?;
        }
        for (key, values) in [("s", &self.s), ("kappa", &self.kappa), ("n", &self.n), ("d", &self.d)] {
            for v in values {
                b.set(0, key, v)?;
            }
        }
        if let Some(o) = &self.output {
            b.set(0, "output", &o.to_string_lossy())?;
        }
        if let Some(c) = &self.cache_dir {
            b.set(0, "cache_dir", &c.to_string_lossy())?;
        }
        b.build()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute (or load) two-body tables into the cache.
    Matels {
        #[arg(long, required = true, allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 60)]
        d: usize,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Solve one or a few points and print everything.
    Solve(Overrides),
    /// Run a grid and write results.csv, plot data and run.meta.
    Sweep(Overrides),
    /// Perturbative distance and Q without a full solve.
    Pt {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        d: usize,
        /// Constraint setting as `N,d`; defaults to the largest bundled one for N.
        #[arg(long)]
        setting: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        outside_tol: f64,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Check constraint data and the solver against closed forms.
    Validate {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        constraints: Vec<PathBuf>,
    },
}

fn tensor_cache(dir: &Option<PathBuf>) -> pinscan::matels::TensorCache {
    cache(&SweepConfig { cache_dir: dir.clone(), ..SweepConfig::default() })
}

fn run(cli: Cli) -> pinscan_cli::Result<bool> {
    match cli.command {
        Command::Matels { s, d, cache_dir } => {
            let cache = tensor_cache(&cache_dir);
            for s in s {
                cache.load_or_build(s, d)?;
                println!("{}", cache.path_for(s, d).display());
            }
            Ok(true)
        }
        Command::Solve(o) => {
            let config = o.build()?;
            let out = run_sweep(&config)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for (row, detail) in out.rows.iter().zip(&out.details) {
                println!("s = {}  κ = {}  N = {}", row.s, row.kappa, row.n);
                if let Some(e) = &row.error {
                    println!("  failed: {e}");
                    continue;
                }
                for t in &detail.as_ref().expect("detail for a solved point").trace {
                    println!("  d = {:3}  E = {}  residual = {:.2e}", t.d, fmt_float(t.energy), t.residual);
                }
                println!("  converged = {}  d = {}  E = {}", row.converged, row.d, fmt_float(row.energy));
                let lam: Vec<String> = row.lambda.iter().map(|x| format!("{x:.12}")).collect();
                println!("  λ = {}", lam.join(" "));
                println!(
                    "  setting ({},{})  ε' = {:.3e}  D = {:.6e}  D_l1 = {:.6e}  S = {:.6e}  Q = {:.4}  pinned = {}",
                    row.setting.0, row.setting.1, row.epsilon, row.d_raw, row.d_l1, row.pauli, row.q, row.pinned
                );
                if !row.pt_distance.is_nan() {
                    println!("  PT: κ²D2 = {:.6e}  Q0 = {:.4}", row.pt_distance, row.pt_q0);
                }
                println!("  vertex residual = {:.2e}  1-RDM error = {:.2e}", row.vertex_residual, row.rdm_error);
            }
            Ok(out.failures() == 0)
        }
        Command::Sweep(o) => {
            let config = o.build()?;
            let out = run_sweep(&config)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for path in emit_outputs(&out, &config)? {
                println!("{}", path.display());
            }
            for r in out.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("failed: s={} κ={} N={}: {}", r.s, r.kappa, r.n, r.error.as_deref().unwrap_or(""));
            }
            Ok(out.failures() == 0)
        }
        Command::Pt { s, n, d, setting, kappa, outside_tol, cache_dir } => {
            let tensor = tensor_cache(&cache_dir).load_or_build(s, d)?;
            let gpcs = match setting {
                Some(text) => {
                    let bad = || CliError::Config { line: 0, reason: format!("bad setting `{text}`") };
                    let (a, b) = text.split_once(',').ok_or_else(bad)?;
                    let a: usize = a.trim().parse().map_err(|_| bad())?;
                    let b: usize = b.trim().parse().map_err(|_| bad())?;
                    load_constraints(ConstraintSource::Bundled { n: a, d: b })?
                }
                None => bundled_sets()
                    .into_iter()
                    .filter(|g| g.n() == n)
                    .max_by_key(|g| g.d())
                    .map_or_else(|| bundled(n, 2 * n), Ok)?,
            };
            let amps = first_order_amplitudes(&OneBodyTable::new(d), &tensor, n, d)?;
            let adapted = adapted_orbitals(&amps);
            let p = leading_order_d(&amps, &adapted, &gpcs, outside_tol)?;
            println!("s = {s}  N = {n}  d = {d}  setting ({},{})", p.n, p.d);
            println!("E1 = {}", fmt_float(amps.e1));
            println!("D2 = {:.6e}  Q0 = {}", p.d2, p.q0.map_or("undefined".into(), |q| format!("{q:.4}")));
            println!("outside weight = {:.3e} of {:.3e}", p.outside_weight, p.total_weight);
            let mu: Vec<String> = adapted.mu.iter().take(p.d).map(|m| format!("{m:.4e}")).collect();
            println!("μ = {}{}", mu.join(" "), if adapted.tie_broken { "  (ties broken by index)" } else { "" });
            for k in kappa {
                println!("κ = {k}: κ²D2 = {:.6e}", k * k * p.d2);
            }
            Ok(true)
        }
        Command::Validate { samples, seed, constraints } => {
            let mut sets = bundled_sets();
            for path in &constraints {
                sets.push(load_constraints(ConstraintSource::File(path))?);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut ok = true;
            for g in &sets {
                let c = check_constraints(g, samples, &mut rng)?;
                let pass = c.passes(1e-12);
                ok &= pass;
                println!(
                    "{} constraints ({},{}): {} samples, min inequality {:.3e}, max equality residual {:.1e}, HF vertex {}",
                    if pass { "PASS" } else { "FAIL" },
                    c.n,
                    c.d,
                    c.samples,
                    c.worst_inequality,
                    c.worst_equality,
                    if c.vertex_ok { "ok" } else { "bad" }
                );
            }
            for (label, err) in oracle_checks()? {
                let pass = err < 1e-8;
                ok &= pass;
                println!("{} energy {label}: relative error {err:.1e}", if pass { "PASS" } else { "FAIL" });
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
