//! Gradient flow with discrete normalization and semi-implicit
//! discretization.
//!
//! One step freezes the densities at `Psi^n`, solves
//! `(I + tau H_{Psi^n}) tilde = Psi^n`, and renormalizes:
//! `Psi^{n+1} = tilde / |tilde|`. The projection multiplier
//! `lambda = (1 - |tilde|) / (tau |tilde|)` is recorded with the energy,
//! mass and increments of every step.

use num_complex::Complex;

use crate::energy::{chemical_potential, energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::grid::{h1_seminorm_sq, l2_norm, linf_norm, WaveField};
use crate::linalg::{solve_shifted, KrylovConfig, SolveMethod};
use crate::operator::{check_tau, FrozenHamiltonian};
use crate::physics::{CoercivityReport, PhysicsParams};
use crate::scalar::Real;

/// Energy increase tolerated before a step counts as non-dissipative.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Slack of the quantitative dissipation bound check.
pub const BOUND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Safeguard<T> {
    None,
    /// Shrink `tau` for the current step while the energy increases.
    Backtrack { shrink: T, max_halvings: usize },
}

impl<T: Real> Safeguard<T> {
    pub fn backtrack() -> Self {
        Safeguard::Backtrack { shrink: T::lit(0.5), max_halvings: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub tau: T,
    pub max_steps: usize,
    /// Stop once `|Psi^{n+1} - Psi^n|_inf / tau < stop_tol`.
    pub stop_tol: T,
    pub krylov: KrylovConfig<T>,
    pub safeguard: Safeguard<T>,
    pub record_h1_increments: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(tau: T) -> Self {
        Self {
            tau,
            max_steps: 100_000,
            stop_tol: T::lit(1e-7),
            krylov: KrylovConfig::default(),
            safeguard: Safeguard::None,
            record_h1_increments: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if !(self.stop_tol > T::zero()) {
            return Err(Error::InvalidParameter("stop_tol must be positive".into()));
        }
        if let Safeguard::Backtrack { shrink, .. } = self.safeguard {
            if !(shrink > T::zero() && shrink < T::one()) {
                return Err(Error::InvalidParameter("backtracking shrink factor must lie in (0, 1)".into()));
            }
        }
        self.krylov.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    /// Step index, starting at 1 for the first update.
    pub n: usize,
    /// `E(Psi^n)` of the state the step started from.
    pub prev_energy: T,
    /// `E(Psi^{n+1})`.
    pub energy: T,
    pub lambda: T,
    pub mass: T,
    pub tilde_l2: T,
    pub inf_increment: T,
    /// `|Psi^{n+1} - Psi^n|^2_{H^1}` and `|tilde|^2_{H^1}`, when requested.
    pub h1_increment_sq: Option<T>,
    pub tilde_h1_sq: Option<T>,
    pub dissipation_ok: bool,
    pub krylov_iters: usize,
    pub krylov_method: SolveMethod,
    pub tau_used: T,
    pub halvings: usize,
}

#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub next: WaveField<T>,
    /// Unnormalized solution of the shifted system; a good warm start for the next step.
    pub tilde: WaveField<T>,
    pub record: IterationRecord<T>,
}

fn normalization_slack<T: Real>() -> T {
    T::lit(1e-10).max(T::lit(100.0) * T::epsilon())
}

/// One step from a normalized state.
pub fn gfsi_step<T: Real>(
    psi_n: &WaveField<T>,
    params: &PhysicsParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<StepOutcome<T>> {
    gfsi_step_from(psi_n, params, cfg, 1, None)
}

/// One step with an explicit step index and optional Krylov warm start.
pub fn gfsi_step_from<T: Real>(
    psi_n: &WaveField<T>,
    params: &PhysicsParams<T>,
    cfg: &SolverConfig<T>,
    n: usize,
    warm: Option<&WaveField<T>>,
) -> Result<StepOutcome<T>> {
    cfg.validate()?;
    let norm = l2_norm(psi_n);
    if (norm - T::one()).abs() > normalization_slack() {
        return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
    }
    let prev_energy = energy(psi_n, params)?.total;
    let frozen = FrozenHamiltonian::new(psi_n, params)?;

    let mut tau = cfg.tau;
    let mut halvings = 0;
    let mut krylov_iters = 0;
    let (tilde, next, next_energy, tilde_l2, method) = loop {
        let (tilde, report) = solve_shifted(&frozen, tau, psi_n, &cfg.krylov, warm)?;
        krylov_iters += report.iterations;
        let t = l2_norm(&tilde);
        if !(t > T::zero()) {
            return Err(Error::NonFinite("normalization of a vanishing iterate"));
        }
        let next = tilde.scaled(Complex::new(t.recip(), T::zero()));
        let e = energy(&next, params)?.total;
        if let Safeguard::Backtrack { shrink, max_halvings } = cfg.safeguard {
            if e > prev_energy + T::lit(MONOTONE_TOL) {
                if halvings == max_halvings {
                    return Err(Error::NoDissipativeStep { step: n, halvings });
                }
                halvings += 1;
                tau *= shrink;
                continue;
            }
        }
        break (tilde, next, e, t, report.method);
    };

    let increment = next.sub(psi_n)?;
    let (h1_increment_sq, tilde_h1_sq) = if cfg.record_h1_increments {
        (Some(h1_seminorm_sq(&increment)), Some(h1_seminorm_sq(&tilde)))
    } else {
        (None, None)
    };
    let mass = l2_norm(&next).powi(2);
    let record = IterationRecord {
        n,
        prev_energy,
        energy: next_energy,
        lambda: (T::one() - tilde_l2) / (tau * tilde_l2),
        mass,
        tilde_l2,
        inf_increment: linf_norm(&increment),
        h1_increment_sq,
        tilde_h1_sq,
        dissipation_ok: next_energy <= prev_energy + T::lit(MONOTONE_TOL),
        krylov_iters,
        krylov_method: method,
        tau_used: tau,
        halvings,
    };
    Ok(StepOutcome { next, tilde, record })
}

#[derive(Debug, Clone)]
pub struct GroundStateResult<T> {
    pub psi_g: WaveField<T>,
    pub energy: EnergyBreakdown<T>,
    pub initial_energy: T,
    pub mu: T,
    /// Multiplier of the final step.
    pub lambda: T,
    pub steps: usize,
    pub records: Vec<IterationRecord<T>>,
    /// `|H psi_g - mu psi_g|_inf / max(1, |H psi_g|_inf)`.
    pub stationarity_residual: T,
    pub converged: bool,
}

/// Iterates [`gfsi_step_from`] until the stopping rule holds or `max_steps`
/// is reached. Non-convergence is reported through `converged`, not as an
/// error.
pub fn solve_ground_state<T: Real>(
    psi0: &WaveField<T>,
    params: &PhysicsParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<GroundStateResult<T>> {
    solve_ground_state_with(psi0, params, cfg, |_| {})
}

/// As [`solve_ground_state`], calling `observe` after every step.
pub fn solve_ground_state_with<T: Real>(
    psi0: &WaveField<T>,
    params: &PhysicsParams<T>,
    cfg: &SolverConfig<T>,
    mut observe: impl FnMut(&IterationRecord<T>),
) -> Result<GroundStateResult<T>> {
    cfg.validate()?;
    params.validate()?;
    let norm = l2_norm(psi0);
    if !((norm - T::one()).abs() <= T::lit(1e-6)) {
        return Err(Error::NotNormalized { norm: norm.to_f64_lossy() });
    }
    let mut psi = psi0.normalized()?;
    let initial_energy = energy(&psi, params)?.total;

    let mut records = Vec::new();
    let mut warm: Option<WaveField<T>> = None;
    let mut converged = false;
    for n in 1..=cfg.max_steps {
        let outcome = gfsi_step_from(&psi, params, cfg, n, warm.as_ref())?;
        observe(&outcome.record);
        let done = outcome.record.inf_increment / outcome.record.tau_used < cfg.stop_tol;
        records.push(outcome.record);
        psi = outcome.next;
        warm = Some(outcome.tilde);
        if done {
            converged = true;
            break;
        }
    }

    let breakdown = energy(&psi, params)?;
    let mu = chemical_potential(&psi, params)?;
    let frozen = FrozenHamiltonian::new(&psi, params)?;
    let hpsi = frozen.apply(&psi)?;
    let defect = hpsi.add_scaled(Complex::new(-mu, T::zero()), &psi)?;
    let stationarity_residual = linf_norm(&defect) / linf_norm(&hpsi).max(T::one());
    let lambda = records.last().map_or(mu, |r| r.lambda);

    Ok(GroundStateResult {
        psi_g: psi,
        energy: breakdown,
        initial_energy,
        mu,
        lambda,
        steps: records.len(),
        records,
        stationarity_residual,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationAudit {
    /// No step raised the energy by more than [`MONOTONE_TOL`].
    pub monotone: bool,
    pub first_increase: Option<usize>,
    pub max_increase: f64,
    /// Whether the quantitative bound `dE <= -C0/2 |dPsi|^2_{H^1}` could be checked.
    pub bound_checked: bool,
    pub first_bound_violation: Option<usize>,
}

/// Checks plain monotonicity of the energy sequence and, when the trap
/// assumption holds and increments were recorded, the quantitative bound
/// `E(Psi^{n+1}) - E(Psi^n) <= -C0/2 |Psi^{n+1} - Psi^n|^2_{H^1}`.
pub fn dissipation_audit<T: Real>(records: &[IterationRecord<T>], coercivity: &CoercivityReport<T>) -> DissipationAudit {
    let mut first_increase = None;
    let mut max_increase = f64::NEG_INFINITY;
    for r in records {
        let de = (r.energy - r.prev_energy).to_f64_lossy();
        max_increase = max_increase.max(de);
        if de > MONOTONE_TOL && first_increase.is_none() {
            first_increase = Some(r.n);
        }
    }
    let c0 = coercivity.c0.filter(|_| coercivity.satisfied);
    let bound_checked = c0.is_some() && records.iter().all(|r| r.h1_increment_sq.is_some());
    let mut first_bound_violation = None;
    if let (true, Some(c0)) = (bound_checked, c0) {
        let half_c0 = c0.to_f64_lossy() / 2.0;
        for r in records {
            let de = (r.energy - r.prev_energy).to_f64_lossy();
            let inc = r.h1_increment_sq.map_or(0.0, |v| v.to_f64_lossy());
            if de > -half_c0 * inc + BOUND_TOL {
                first_bound_violation = Some(r.n);
                break;
            }
        }
    }
    DissipationAudit {
        monotone: first_increase.is_none(),
        first_increase,
        max_increase: if records.is_empty() { 0.0 } else { max_increase },
        bound_checked,
        first_bound_violation,
    }
}

/// Advisory step bound `min(2 / Ct, 1 / (4 E0))` with
/// `Ct = (2 C k_m (C sqrt(E0))^{d/2})^{4/(4-d)}`, `d = 2`. The generic
/// constant `C` has no computable value and must be supplied.
pub fn heuristic_tau0<T: Real>(e0: T, params: &PhysicsParams<T>, c_user: T) -> Result<T> {
    if !(e0 > T::zero()) {
        return Err(Error::InvalidParameter(format!("initial energy must be positive, got {e0}")));
    }
    if !(c_user > T::zero()) {
        return Err(Error::InvalidParameter(format!("constant C must be positive, got {c_user}")));
    }
    let two = T::lit(2.0);
    let c_e = c_user * e0.sqrt();
    // d = 2: (C_E)^{d/2} = C_E and the outer exponent 4/(4-d) = 2.
    let c_tilde = (two * c_user * params.k_max() * c_e).powi(2);
    let dissipative = if c_tilde > T::zero() { two / c_tilde } else { T::infinity() };
    Ok(dissipative.min((T::lit(4.0) * e0).recip()))
}

/// Returns `report` with [`CoercivityReport::a_psi_hint`] set from [`heuristic_tau0`].
pub fn with_step_hint<T: Real>(
    mut report: CoercivityReport<T>,
    e0: T,
    params: &PhysicsParams<T>,
    c_user: T,
) -> Result<CoercivityReport<T>> {
    report.a_psi_hint = Some(heuristic_tau0(e0, params, c_user)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn synthetic(energies: &[f64]) -> Vec<IterationRecord<f64>> {
        energies
            .windows(2)
            .enumerate()
            .map(|(i, w)| IterationRecord {
                n: i + 1,
                prev_energy: w[0],
                energy: w[1],
                lambda: 1.0,
                mass: 1.0,
                tilde_l2: 1.0,
                inf_increment: 0.0,
                h1_increment_sq: Some(0.0),
                tilde_h1_sq: None,
                dissipation_ok: w[1] <= w[0] + MONOTONE_TOL,
                krylov_iters: 0,
                krylov_method: SolveMethod::ConjugateGradient,
                tau_used: 1.0,
                halvings: 0,
            })
            .collect()
    }

    fn report(c0: f64) -> CoercivityReport<f64> {
        CoercivityReport { alpha: Some(f64::INFINITY), c0: Some(c0), a_psi_hint: None, satisfied: true }
    }

    #[test]
    fn constant_energy_is_not_a_violation() {
        let audit = dissipation_audit(&synthetic(&[2.0, 2.0, 2.0, 2.0]), &report(0.5));
        assert!(audit.monotone);
        assert!(audit.bound_checked);
        assert_eq!(audit.first_bound_violation, None);
    }

    #[test]
    fn increase_is_located() {
        let audit = dissipation_audit(&synthetic(&[3.0, 2.0, 2.5, 1.0]), &report(0.5));
        assert!(!audit.monotone);
        assert_eq!(audit.first_increase, Some(2));
        assert!((audit.max_increase - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau0_picks_energy_bound_when_smaller() {
        let p = PhysicsParams::new(1.0, 0.0, 1.0, 0.0);
        // tiny C makes 2 / Ct huge
        let t = heuristic_tau0(2.0, &p, 1e-3).unwrap();
        assert_eq!(t, 1.0 / 8.0);
        let linear = PhysicsParams::<f64>::linear_harmonic();
        assert_eq!(heuristic_tau0(2.0, &linear, 5.0).unwrap(), 1.0 / 8.0);
    }

    #[test]
    fn tau0_shrinks_with_interaction_strength() {
        let mut prev = f64::INFINITY;
        for k in [10.0, 100.0, 1000.0, 10000.0] {
            let p = PhysicsParams::new(k, 0.8 * k, k, -1.0);
            let t = heuristic_tau0(3.0, &p, 0.05).unwrap();
            assert!(t <= prev);
            prev = t;
        }
        assert!(heuristic_tau0(0.0, &PhysicsParams::linear_harmonic(), 1.0).is_err());
        assert!(heuristic_tau0(1.0, &PhysicsParams::linear_harmonic(), 0.0).is_err());
    }

    #[test]
    fn unnormalized_step_input_is_rejected() {
        let g = GridSpec::<f64>::new(2.0, 0.5).unwrap();
        let psi = WaveField::from_fn(g, |_, _, _| Complex::new(1.0, 0.0));
        let err = gfsi_step(&psi, &PhysicsParams::linear_harmonic(), &SolverConfig::new(0.5)).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn far_from_normalized_start_is_rejected() {
        let g = GridSpec::<f64>::new(2.0, 0.5).unwrap();
        let psi = WaveField::from_fn(g, |_, _, _| Complex::new(1.0, 0.0));
        let err = solve_ground_state(&psi, &PhysicsParams::linear_harmonic(), &SolverConfig::new(0.5)).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn backtracking_recovers_monotone_steps() {
        let g = GridSpec::<f64>::new(4.0, 0.25).unwrap();
        let p = PhysicsParams::new(2000.0, 1000.0, 2000.0, -5.0);
        let psi = WaveField::from_fn(g, |_, x, y| {
            Complex::new((-(x * x + y * y) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(), 0.0)
        })
        .normalized()
        .unwrap();
        let cfg = SolverConfig { safeguard: Safeguard::backtrack(), max_steps: 40, ..SolverConfig::new(1.0) };
        let res = solve_ground_state(&psi, &p, &cfg).unwrap();
        assert!(res.records.iter().all(|r| r.dissipation_ok));
    }
}
