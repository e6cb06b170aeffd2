use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gpflow_core::{
    dissipation_audit, energy, energy_gradient_pairing, inner_l2, l2_norm, solve_ground_state, Complex, Config, Field,
    Grid, Hamiltonian, InteractionClass, Params,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, CellOutcome, SweepRow};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct GlobalOptions {
    pub output_dir: Option<PathBuf>,
    pub allow_indefinite: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The run finished without meeting its criterion (step limit, failed check).
    Incomplete,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Incomplete => 2,
        }
    }
}

fn load(path: &Path, opts: &GlobalOptions) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(dir) = &opts.output_dir {
        cfg.output_dir = dir.clone();
    }
    if opts.allow_indefinite {
        cfg.solver.krylov.allow_indefinite = true;
    }
    Ok(cfg)
}

fn prepare_output(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn warn_assumptions(params: &Params, grid: &Grid) {
    if !params.coercivity_constants(grid).satisfied {
        eprintln!("warning: the trap does not dominate the rotation; energy dissipation is not guaranteed");
    }
    if params.interaction_class() == InteractionClass::Unsupported {
        eprintln!("warning: interaction matrix is neither positive definite nor entrywise non-negative");
    }
}

pub fn solve(config: &Path, opts: &GlobalOptions) -> CliResult<Status> {
    let cfg = load(config, opts)?;
    let grid = cfg.grid()?;
    warn_assumptions(&cfg.params, &grid);
    let psi0 = cfg.initial_state()?;
    let result = solve_ground_state(&psi0, &cfg.params, &cfg.solver)?;

    prepare_output(&cfg.output_dir)?;
    output::write_energy_series(&cfg.output_dir.join("energy_series.csv"), &result.records)?;
    output::write_summary(&cfg.output_dir.join("summary.csv"), &result)?;
    if cfg.emit_fields {
        output::write_field(&cfg.output_dir.join("field.csv"), &result.psi_g)?;
    }
    println!(
        "E = {}  mu = {}  steps = {}  converged = {}",
        result.energy.total, result.mu, result.steps, result.converged
    );
    if result.converged {
        Ok(Status::Success)
    } else {
        eprintln!("step limit of {} reached before the stopping rule held", cfg.solver.max_steps);
        Ok(Status::Incomplete)
    }
}

/// Runs every `(k, tau)` cell: `k` replaces `k11` and rescales `k12`, `k22`
/// so their ratios to `k11` match the base config. Rows follow the input
/// order, `k` outermost.
pub fn sweep(config: &Path, ks: &[f64], taus: &[f64], jobs: usize, opts: &GlobalOptions) -> CliResult<Status> {
    let cfg = load(config, opts)?;
    if ks.is_empty() || taus.is_empty() {
        return Err(CliError::Input("sweep needs at least one k and one tau".into()));
    }
    if cfg.params.k11 == 0.0 {
        return Err(CliError::config("k11", "must be non-zero to scale the interaction matrix in a sweep"));
    }
    let psi0 = cfg.initial_state()?;
    let cells: Vec<(Params, Config)> = ks
        .iter()
        .flat_map(|&k| taus.iter().map(move |&tau| (k, tau)))
        .map(|(k, tau)| {
            let mut p = cfg.params.clone();
            let scale = k / cfg.params.k11;
            p.k11 = k;
            p.k12 = cfg.params.k12 * scale;
            p.k22 = cfg.params.k22 * scale;
            (p, Config { tau, ..cfg.solver })
        })
        .collect();

    let results: Vec<Mutex<Option<SweepRow>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, cells.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((p, solver)) = cells.get(i) else { break };
                let row = run_cell(&psi0, p, solver);
                *results[i].lock().expect("sweep result slot") = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> =
        results.into_iter().map(|m| m.into_inner().expect("sweep result slot").expect("every cell ran")).collect();

    prepare_output(&cfg.output_dir)?;
    output::write_sweep(&cfg.output_dir.join("sweep.csv"), &rows)?;
    let complete = rows.iter().all(|r| r.outcome.is_some_and(|o| o.converged));
    Ok(if complete { Status::Success } else { Status::Incomplete })
}

fn run_cell(psi0: &Field, p: &Params, solver: &Config) -> SweepRow {
    let outcome = match solve_ground_state(psi0, p, solver) {
        Ok(res) => {
            let grid = *psi0.grid();
            let audit = dissipation_audit(&res.records, &p.coercivity_constants(&grid));
            println!(
                "k11 = {}  tau = {}  E = {}  steps = {}  converged = {}  monotone = {}",
                p.k11, solver.tau, res.energy.total, res.steps, res.converged, audit.monotone
            );
            Some(CellOutcome {
                energy: res.energy.total,
                steps: res.steps,
                converged: res.converged,
                monotone: audit.monotone,
            })
        }
        Err(err) => {
            eprintln!("cell k11 = {}, tau = {} failed: {err}", p.k11, solver.tau);
            None
        }
    };
    SweepRow { k11: p.k11, k12: p.k12, k22: p.k22, tau: solver.tau, outcome }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Warn,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub verdict: Verdict,
    pub detail: String,
}

fn check(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn random_field(rng: &mut ChaCha8Rng, grid: Grid) -> Field {
    Field::from_fn(grid, |_, _, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Invariant suite on the configured problem.
pub fn validation_checks(cfg: &RunConfig, seed: u64) -> CliResult<Vec<Check>> {
    let grid = cfg.grid()?;
    let params = &cfg.params;
    let psi0 = cfg.initial_state()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let frozen = Hamiltonian::new(&psi0, params)?;
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let u = random_field(&mut rng, grid);
        let v = random_field(&mut rng, grid);
        let gap = inner_l2(&frozen.apply(&u)?, &v)? - inner_l2(&u, &frozen.apply(&v)?)?;
        worst = worst.max(gap.abs() / (l2_norm(&u) * l2_norm(&v)));
    }
    checks.push(check("operator symmetry", worst <= 1e-11, format!("max relative asymmetry {worst:.2e} over 20 pairs")));

    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut orders = Vec::new();
    let mut exact = true;
    for _ in 0..3 {
        let phi = random_field(&mut rng, grid).normalized()?.scaled(Complex::new(10.0, 0.0));
        let pairing = energy_gradient_pairing(&psi0, &phi, params)?;
        let mut errs = Vec::new();
        for &e in &eps {
            let plus = energy(&psi0.add_scaled(Complex::new(e, 0.0), &phi)?, params)?.total;
            let minus = energy(&psi0.add_scaled(Complex::new(-e, 0.0), &phi)?, params)?.total;
            errs.push(((plus - minus) / (2.0 * e) - pairing).abs());
        }
        if errs.iter().any(|&err| err > 1e-9 * pairing.abs().max(1.0)) {
            exact = false;
        }
        orders.push(fitted_order(&eps, &errs));
    }
    let gradient_ok = exact || orders.iter().all(|o| (o - 2.0).abs() <= 0.2);
    let detail = if exact {
        "central differences exact to rounding (quadratic energy)".to_string()
    } else {
        format!("observed orders {}", orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", "))
    };
    checks.push(check("gradient consistency", gradient_ok, detail));

    let short = Config { max_steps: 10, ..cfg.solver };
    match solve_ground_state(&psi0, params, &short) {
        Ok(run) => {
            let max_tilde = run.records.iter().map(|r| r.tilde_l2).fold(f64::NEG_INFINITY, f64::max);
            let min_lambda = run.records.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min);
            let mass_gap = run.records.iter().map(|r| (r.mass - 1.0).abs()).fold(0.0, f64::max);
            checks.push(check(
                "mass conservation",
                mass_gap <= 1e-12,
                format!("max |mass - 1| = {mass_gap:.2e} over {} steps", run.steps),
            ));
            checks.push(check("tilde norm bound", max_tilde <= 1.0 + 1e-8, format!("max |tilde| = {max_tilde:.15}")));
            checks.push(check("multiplier sign", min_lambda >= -1e-8, format!("min lambda = {min_lambda:.6e}")));
        }
        Err(err) => checks.push(check("flow steps", false, format!("first 10 steps failed: {err}"))),
    }

    let report = params.coercivity_constants(&grid);
    let scan = match report.alpha {
        Some(alpha) if report.satisfied => params.trap_dominates_rotation(&grid, alpha)?,
        _ => false,
    };
    let detail = match (report.alpha, report.c0) {
        (Some(a), Some(c0)) => format!("alpha = {a}, C0 = {c0}"),
        (Some(a), None) => format!("alpha = {a} <= 0: rotation too fast for the trap"),
        _ => "no admissible alpha for this potential".to_string(),
    };
    checks.push(check("coercivity", report.satisfied && scan, detail));

    let class = params.interaction_class();
    checks.push(Check {
        name: "interaction matrix",
        verdict: if class == InteractionClass::Unsupported { Verdict::Warn } else { Verdict::Pass },
        detail: match class {
            InteractionClass::NonNegative => "all entries non-negative".into(),
            InteractionClass::PositiveDefinite => "positive definite".into(),
            InteractionClass::Unsupported => "neither positive definite nor non-negative; dissipation theory does not apply".into(),
        },
    });
    Ok(checks)
}

fn fitted_order(eps: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn validate(config: &Path, opts: &GlobalOptions) -> CliResult<Status> {
    let cfg = load(config, opts)?;
    let checks = validation_checks(&cfg, opts.seed)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let tag = match c.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Warn => "WARN",
        };
        println!("{tag}  {:width$}  {}", c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| c.verdict == Verdict::Fail).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(Status::Success)
    } else {
        eprintln!("validation failed: {}", failed.join(", "));
        Ok(Status::Incomplete)
    }
}
