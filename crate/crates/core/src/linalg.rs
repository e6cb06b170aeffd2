//! Linear solves with the shifted operator `I + tau H`.
//!
//! `H` is Hermitian, so `I + tau H` is symmetric with respect to the real
//! pairing `(u, v) = h^2 Re sum u conj(v)` on the complex field viewed as a
//! real vector space. Conjugate gradients run directly in that pairing.
//! Residual norms are the weighted L2 norm, so tolerances do not depend on
//! the mesh.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{dot_re, norm_sq, WaveField};
use crate::operator::{check_tau, FrozenHamiltonian};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    /// Jacobi scaling by the (real) diagonal of `I + tau H`.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// `None` means `10 * dof`.
    pub max_iters: Option<usize>,
    pub preconditioner: Preconditioner,
    /// On negative curvature switch to MINRES instead of failing.
    pub allow_indefinite: bool,
}

impl<T: Real> Default for KrylovConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-14),
            max_iters: None,
            preconditioner: Preconditioner::None,
            allow_indefinite: false,
        }
    }
}

impl<T: Real> KrylovConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return Err(Error::InvalidParameter("Krylov tolerances must be positive".into()));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter("Krylov max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ConjugateGradient,
    Minres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Weighted L2 norm of the true residual `rhs - (I + tau H) x`.
    pub final_residual: f64,
    pub converged: bool,
    pub method: SolveMethod,
}

struct Shifted<'a, T> {
    h: &'a FrozenHamiltonian<T>,
    tau: T,
    weight: T,
}

impl<T: Real> Shifted<'_, T> {
    fn apply(&self, u: &[Complex<T>], out: &mut [Complex<T>]) {
        self.h.apply_affine(u, out, T::one(), self.tau);
    }

    /// `out = (I + tau H) u`, returning `(u, out)`.
    fn apply_pair(&self, u: &[Complex<T>], out: &mut [Complex<T>]) -> T {
        self.h.apply_affine(u, out, T::one(), self.tau) * self.weight
    }

    fn dot(&self, a: &[Complex<T>], b: &[Complex<T>]) -> T {
        dot_re(self.weight, a, b)
    }

    fn norm(&self, a: &[Complex<T>]) -> T {
        norm_sq(self.weight, a).sqrt()
    }

    fn residual(&self, x: &[Complex<T>], b: &[Complex<T>], r: &mut [Complex<T>]) -> T {
        self.apply(x, r);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        self.norm(r)
    }
}

/// `x += alpha p`, `r -= alpha ap`; returns the unweighted `|r|^2`.
fn update_iterate<T: Real>(
    alpha: T,
    p: &[Complex<T>],
    ap: &[Complex<T>],
    x: &mut [Complex<T>],
    r: &mut [Complex<T>],
) -> T {
    const BLOCK: usize = 256;
    let mut acc = T::zero();
    for (((xb, rb), pb), apb) in x.chunks_mut(BLOCK).zip(r.chunks_mut(BLOCK)).zip(p.chunks(BLOCK)).zip(ap.chunks(BLOCK)) {
        for (xi, &pi) in xb.iter_mut().zip(pb) {
            *xi = *xi + pi * alpha;
        }
        for (ri, &ai) in rb.iter_mut().zip(apb) {
            *ri = *ri - ai * alpha;
        }
        acc += dot_re(T::one(), rb, rb);
    }
    acc
}

fn axpy<T: Real>(a: T, x: &[Complex<T>], y: &mut [Complex<T>]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + xi * a;
    }
}

/// Solves `(I + tau H) x = rhs` by conjugate gradients in the real L2 pairing.
///
/// `guess` warm-starts the iteration; without one it starts from `rhs`.
/// Negative curvature is an error unless `cfg.allow_indefinite`, in which
/// case the solve restarts with MINRES from the current iterate.
pub fn solve_shifted<T: Real>(
    h: &FrozenHamiltonian<T>,
    tau: T,
    rhs: &WaveField<T>,
    cfg: &KrylovConfig<T>,
    guess: Option<&WaveField<T>>,
) -> Result<(WaveField<T>, SolveReport)> {
    check_tau(tau)?;
    cfg.validate()?;
    let grid = *h.grid();
    if *rhs.grid() != grid || guess.is_some_and(|g| *g.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let op = Shifted { h, tau, weight: grid.weight() };
    let b = rhs.as_slice();
    let dof = b.len();
    let max_iters = cfg.max_iters.unwrap_or(10 * dof);
    let target = cfg.rel_tol * op.norm(b) + cfg.abs_tol;

    let inv_diag: Option<Vec<T>> = match cfg.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Diagonal => {
            let d = h.diagonal();
            let mut inv = Vec::with_capacity(d.len());
            for &di in &d {
                let s = T::one() + tau * di;
                if !(s > T::zero()) {
                    return Err(Error::Indefinite { iteration: 0, curvature: s.to_f64_lossy() });
                }
                inv.push(s.recip());
            }
            Some(inv)
        }
    };
    let precondition = |r: &[Complex<T>], z: &mut [Complex<T>]| match &inv_diag {
        None => z.copy_from_slice(r),
        Some(inv) => {
            for ((zi, &ri), &s) in z.iter_mut().zip(r).zip(inv) {
                *zi = ri * s;
            }
        }
    };

    let mut x: Vec<Complex<T>> = guess.unwrap_or(rhs).as_slice().to_vec();
    let mut r = vec![Complex::new(T::zero(), T::zero()); dof];
    let mut z = if inv_diag.is_some() { r.clone() } else { Vec::new() };
    let mut p = r.clone();
    let mut ap = r.clone();

    let mut res = op.residual(&x, b, &mut r);
    let mut iterations = 0;
    'restart: loop {
        if res <= target {
            break;
        }
        let mut rz = if inv_diag.is_some() {
            precondition(&r, &mut z);
            p.copy_from_slice(&z);
            op.dot(&r, &z)
        } else {
            p.copy_from_slice(&r);
            res * res
        };
        while iterations < max_iters {
            let curvature = op.apply_pair(&p, &mut ap);
            iterations += 1;
            if !(curvature > T::zero()) {
                if cfg.allow_indefinite {
                    let start = WaveField::from_vec(grid, x)?;
                    let remaining = max_iters.saturating_sub(iterations).max(1);
                    let (sol, mut report) = minres(&op, rhs, &start, target, remaining)?;
                    report.iterations += iterations;
                    return finish(sol, report, target);
                }
                return Err(Error::Indefinite { iteration: iterations, curvature: curvature.to_f64_lossy() });
            }
            let alpha = rz / curvature;
            let rr = update_iterate(alpha, &p, &ap, &mut x, &mut r) * op.weight;
            if rr.sqrt() <= target {
                // Guard against drift of the recursive residual.
                res = op.residual(&x, b, &mut r);
                continue 'restart;
            }
            let (rz_next, dir) = if inv_diag.is_some() {
                precondition(&r, &mut z);
                (op.dot(&r, &z), &z)
            } else {
                (rr, &r)
            };
            let beta = rz_next / rz;
            rz = rz_next;
            for (pi, &di) in p.iter_mut().zip(dir) {
                *pi = di + *pi * beta;
            }
        }
        res = op.residual(&x, b, &mut r);
        break;
    }

    let report = SolveReport {
        iterations,
        final_residual: res.to_f64_lossy(),
        converged: res <= target,
        method: SolveMethod::ConjugateGradient,
    };
    finish(WaveField::from_vec(grid, x)?, report, target)
}

fn finish<T: Real>(x: WaveField<T>, report: SolveReport, target: T) -> Result<(WaveField<T>, SolveReport)> {
    if !x.is_finite() {
        return Err(Error::NonFinite("Krylov solve"));
    }
    if !(report.final_residual <= target.to_f64_lossy()) {
        return Err(Error::NotConverged(report));
    }
    Ok((x, report))
}

/// Unpreconditioned MINRES for the symmetric (possibly indefinite) shifted operator.
fn minres<T: Real>(
    op: &Shifted<'_, T>,
    rhs: &WaveField<T>,
    start: &WaveField<T>,
    target: T,
    max_iters: usize,
) -> Result<(WaveField<T>, SolveReport)> {
    let b = rhs.as_slice();
    let dof = b.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut x = start.as_slice().to_vec();
    let mut r1 = vec![zero; dof];
    op.residual(&x, b, &mut r1);
    let mut r2 = r1.clone();
    let mut v = vec![zero; dof];
    let mut y = vec![zero; dof];
    let mut w = vec![zero; dof];
    let mut w1 = vec![zero; dof];
    let mut w2 = vec![zero; dof];

    let beta1 = op.norm(&r1);
    let mut beta = beta1;
    let mut oldb = T::zero();
    let mut dbar = T::zero();
    let mut epsln = T::zero();
    let mut phibar = beta1;
    let mut cs = -T::one();
    let mut sn = T::zero();
    let mut iterations = 0;

    while iterations < max_iters && phibar > target && beta > T::zero() {
        iterations += 1;
        let s = beta.recip();
        for (vi, &ri) in v.iter_mut().zip(&r2) {
            *vi = ri * s;
        }
        op.apply(&v, &mut y);
        if iterations >= 2 {
            axpy(-(beta / oldb), &r1, &mut y);
        }
        let alfa = op.dot(&v, &y);
        axpy(-(alfa / beta), &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = op.norm(&r2);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(T::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let denom = gamma.recip();
        for i in 0..dof {
            w[i] = (v[i] - w1[i] * oldeps - w2[i] * delta) * denom;
        }
        axpy(phi, &w, &mut x);
    }

    let res = op.residual(&x, b, &mut r1);
    let report = SolveReport {
        iterations,
        final_residual: res.to_f64_lossy(),
        converged: res <= target,
        method: SolveMethod::Minres,
    };
    Ok((WaveField::from_vec(*rhs.grid(), x)?, report))
}

/// Direct solve of `(I + tau H) x = rhs` by LU factorization of the
/// assembled dense matrix. Small grids only.
pub fn dense_solve_shifted<T>(h: &FrozenHamiltonian<T>, tau: T, rhs: &WaveField<T>) -> Result<WaveField<T>>
where
    T: Real + RealField,
{
    check_tau(tau)?;
    if rhs.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let a = h.assemble_dense()?.shifted(tau);
    let scale = a.as_slice().iter().fold(T::one(), |m, z| num_traits::Float::max(m, z.norm()));
    let deviation = a.max_hermitian_deviation();
    if deviation > T::lit(1e-13) * scale {
        return Err(Error::InvalidParameter(format!("assembled operator is not Hermitian (deviation {deviation:e})")));
    }
    let dim = a.dim();
    let m = DMatrix::from_row_slice(dim, dim, a.as_slice());
    let b = DVector::from_column_slice(rhs.as_slice());
    let x = m.lu().solve(&b).ok_or(Error::Singular)?;
    let field = WaveField::from_vec(*rhs.grid(), x.as_slice().to_vec())?;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_norm, GridSpec};
    use crate::physics::{PhysicsParams, Potential};

    fn kinetic_only(g: GridSpec<f64>) -> PhysicsParams<f64> {
        PhysicsParams::new(0.0, 0.0, 0.0, 0.0).with_potential(Potential::Custom {
            grid: g,
            values: [vec![0.0; g.points()], vec![0.0; g.points()]],
        })
    }

    #[test]
    fn tiny_tau_is_nearly_identity() {
        let g = GridSpec::<f64>::new(2.0, 0.25).unwrap();
        let h = FrozenHamiltonian::linear(g, &PhysicsParams::new(1.0, 0.5, 1.0, -0.3)).unwrap();
        let b = WaveField::from_fn(g, |c, x, y| Complex::new(x - y, c as f64 + x * y));
        let (x, report) = solve_shifted(&h, 1e-12, &b, &KrylovConfig::default(), None).unwrap();
        assert!(report.converged);
        let diff = x.sub(&b).unwrap();
        assert!(l2_norm(&diff) <= 1e-9 * l2_norm(&b));
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let g = GridSpec::<f64>::new(1.0, 0.25).unwrap();
        let h = FrozenHamiltonian::linear(g, &kinetic_only(g)).unwrap();
        let (x, report) = solve_shifted(&h, 1.0, &WaveField::zeros(g), &KrylovConfig::default(), None).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(l2_norm(&x), 0.0);
    }

    #[test]
    fn negative_shift_is_reported_as_indefinite() {
        let g = GridSpec::<f64>::new(1.0, 0.25).unwrap();
        let p = PhysicsParams::new(0.0, 0.0, 0.0, 0.0).with_potential(Potential::Custom {
            grid: g,
            values: [vec![-500.0; g.points()], vec![-500.0; g.points()]],
        });
        let h = FrozenHamiltonian::linear(g, &p).unwrap();
        let b = WaveField::from_fn(g, |_, x, y| Complex::new(1.0 + x * y, 0.0));
        let err = solve_shifted(&h, 1.0, &b, &KrylovConfig::default(), None).unwrap_err();
        assert!(matches!(err, Error::Indefinite { .. }), "{err}");
    }

    #[test]
    fn minres_fallback_solves_indefinite_system() {
        let g = GridSpec::<f64>::new(1.0, 0.25).unwrap();
        // Shift lands between eigenvalues of I + tau H, so the system is
        // nonsingular but indefinite.
        let p = PhysicsParams::new(0.0, 0.0, 0.0, 0.0).with_potential(Potential::Custom {
            grid: g,
            values: [vec![-30.0; g.points()], vec![-30.0; g.points()]],
        });
        let h = FrozenHamiltonian::linear(g, &p).unwrap();
        let b = WaveField::from_fn(g, |c, x, y| Complex::new(1.0 + x * y, c as f64 - x));
        let cfg = KrylovConfig { allow_indefinite: true, ..KrylovConfig::default() };
        let (x, report) = solve_shifted(&h, 1.0, &b, &cfg, None).unwrap();
        assert_eq!(report.method, SolveMethod::Minres);
        let dense = dense_solve_shifted(&h, 1.0, &b).unwrap();
        assert!(l2_norm(&x.sub(&dense).unwrap()) <= 1e-7 * l2_norm(&dense));
    }

    #[test]
    fn jacobi_preconditioner_reaches_same_solution() {
        let g = GridSpec::<f64>::new(3.0, 0.25).unwrap();
        let p = PhysicsParams::new(10.0, 5.0, 8.0, -1.0).with_rotation(0.4, 0.4);
        let psi = WaveField::from_fn(g, |_, x, y| Complex::new((-(x * x + y * y) / 2.0).exp(), 0.0))
            .normalized()
            .unwrap();
        let h = FrozenHamiltonian::new(&psi, &p).unwrap();
        let plain = solve_shifted(&h, 0.5, &psi, &KrylovConfig::default(), None).unwrap().0;
        let cfg = KrylovConfig { preconditioner: Preconditioner::Diagonal, ..KrylovConfig::default() };
        let (jac, report) = solve_shifted(&h, 0.5, &psi, &cfg, None).unwrap();
        assert!(report.converged);
        assert!(l2_norm(&plain.sub(&jac).unwrap()) <= 1e-8);
    }

    #[test]
    fn iteration_cap_produces_not_converged() {
        let g = GridSpec::<f64>::new(2.0, 0.125).unwrap();
        let h = FrozenHamiltonian::linear(g, &PhysicsParams::linear_harmonic()).unwrap();
        let b = WaveField::from_fn(g, |_, x, y| Complex::new(x.sin() * y.cos() + 0.3, 0.0));
        let cfg = KrylovConfig { max_iters: Some(2), ..KrylovConfig::default() };
        match solve_shifted(&h, 1.0, &b, &cfg, None) {
            Err(Error::NotConverged(report)) => {
                assert!(!report.converged);
                assert_eq!(report.iterations, 2);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn dense_solve_near_identity() {
        let g = GridSpec::<f64>::with_interior(4, 0.5).unwrap();
        let h = FrozenHamiltonian::linear(g, &PhysicsParams::new(1.0, 0.0, 1.0, 2.0)).unwrap();
        let b = WaveField::from_fn(g, |c, x, y| Complex::new(x + c as f64, y));
        let x = dense_solve_shifted(&h, 1e-15, &b).unwrap();
        assert!(l2_norm(&x.sub(&b).unwrap()) <= 1e-12);
    }
}
