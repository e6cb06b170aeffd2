//! Discrete coupled Hamiltonian with densities frozen at a given state.
//!
//! Component `i` of `H u` is
//! `-1/2 Lap_h u_i + (V_i + rho_i) u_i - omega_i Lz_h u_i + beta u_{3-i}`,
//! where `Lap_h` is the 5-point Laplacian and
//! `Lz_h u = -i (x D0_y u - y D0_x u)` uses second-order central differences.
//! Both stencils read zero ghost values outside the interior. The first grid
//! index `j` runs along `x`, the second `k` along `y`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{dot_re, GridSpec, WaveField, COMPONENTS};
use crate::physics::PhysicsParams;
use crate::scalar::Real;

/// Largest interior size per axis accepted by [`FrozenHamiltonian::assemble_dense`].
pub const MAX_DENSE_INTERIOR: usize = 32;

/// `H_Psi` with `V_i + rho_i(Psi)` evaluated once at construction.
#[derive(Debug, Clone)]
pub struct FrozenHamiltonian<T> {
    grid: GridSpec<T>,
    beta: T,
    omega: [T; COMPONENTS],
    effective: [Vec<T>; COMPONENTS],
}

impl<T: Real> FrozenHamiltonian<T> {
    /// Freezes the densities at `psi`.
    pub fn new(psi: &WaveField<T>, params: &PhysicsParams<T>) -> Result<Self> {
        let grid = *psi.grid();
        let rho = params.densities(psi);
        let mut effective = [params.eval_potential(&grid, 0)?, params.eval_potential(&grid, 1)?];
        for (eff, r) in effective.iter_mut().zip(rho.iter()) {
            for (e, &d) in eff.iter_mut().zip(r) {
                *e += d;
            }
        }
        Self::from_parts(grid, params, effective)
    }

    /// The linear part `H_0` (densities frozen at the zero field).
    pub fn linear(grid: GridSpec<T>, params: &PhysicsParams<T>) -> Result<Self> {
        let effective = [params.eval_potential(&grid, 0)?, params.eval_potential(&grid, 1)?];
        Self::from_parts(grid, params, effective)
    }

    fn from_parts(
        grid: GridSpec<T>,
        params: &PhysicsParams<T>,
        effective: [Vec<T>; COMPONENTS],
    ) -> Result<Self> {
        params.validate()?;
        if effective.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frozen density"));
        }
        Ok(Self { grid, beta: params.beta, omega: [params.omega1, params.omega2], effective })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// `V_i + rho_i` at the freezing state.
    pub fn effective_potential(&self, c: usize) -> &[T] {
        &self.effective[c]
    }

    /// Real diagonal of `H` (the rotation and coupling terms have none).
    pub fn diagonal(&self) -> Vec<T> {
        let h = self.grid.mesh();
        let d = T::lit(2.0) / (h * h);
        self.effective.iter().flatten().map(|&e| e + d).collect()
    }

    /// `out = shift * u + scale * H u` on flattened data. Returns the
    /// unweighted pairing `Re sum u conj(out)`, accumulated row by row.
    pub(crate) fn apply_affine(&self, u: &[Complex<T>], out: &mut [Complex<T>], shift: T, scale: T) -> T {
        let n = self.grid.n_interior();
        let m = n * n;
        assert_eq!(u.len(), COMPONENTS * m);
        assert_eq!(out.len(), COMPONENTS * m);
        let h = self.grid.mesh();
        let zero = Complex::new(T::zero(), T::zero());
        let zero_row = vec![zero; n];
        let kin = scale * T::lit(0.5) / (h * h);
        let center_base = shift + kin * T::lit(4.0);
        let coords = self.grid.coords();
        let mut pairing = T::zero();
        for c in 0..COMPONENTS {
            let me = &u[c * m..(c + 1) * m];
            let other = &u[(1 - c) * m..(2 - c) * m];
            let eff = &self.effective[c];
            let stencil = Stencil {
                kin,
                rot: scale * self.omega[c] / (h + h),
                beta: scale * self.beta,
                scale,
                center_base,
            };
            let dst = &mut out[c * m..(c + 1) * m];
            for k in 0..n {
                let y = coords[k];
                let lo = k * n;
                let row = &me[lo..lo + n];
                let down = if k > 0 { &me[lo - n..lo] } else { &zero_row[..] };
                let up = if k + 1 < n { &me[lo + n..lo + 2 * n] } else { &zero_row[..] };
                let eff = &eff[lo..lo + n];
                let other = &other[lo..lo + n];
                let dst = &mut dst[lo..lo + n];
                if n == 1 {
                    dst[0] = stencil.eval(row[0], zero, zero, down[0], up[0], coords[0], y, eff[0], other[0]);
                    pairing += dot_re(T::one(), row, dst);
                    continue;
                }
                dst[0] = stencil.eval(row[0], zero, row[1], down[0], up[0], coords[0], y, eff[0], other[0]);
                for j in 1..n - 1 {
                    dst[j] = stencil.eval(row[j], row[j - 1], row[j + 1], down[j], up[j], coords[j], y, eff[j], other[j]);
                }
                let j = n - 1;
                dst[j] = stencil.eval(row[j], row[j - 1], zero, down[j], up[j], coords[j], y, eff[j], other[j]);
                pairing += dot_re(T::one(), row, dst);
            }
        }
        pairing
    }

    /// `out = H u` on flattened data.
    pub fn apply_into(&self, u: &[Complex<T>], out: &mut [Complex<T>]) {
        self.apply_affine(u, out, T::zero(), T::one());
    }

    /// `H u`.
    pub fn apply(&self, u: &WaveField<T>) -> Result<WaveField<T>> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = WaveField::zeros(self.grid);
        self.apply_into(u.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `(I + tau H) u`. Requires `tau > 0`.
    pub fn apply_shifted(&self, tau: T, u: &WaveField<T>) -> Result<WaveField<T>> {
        check_tau(tau)?;
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = WaveField::zeros(self.grid);
        self.apply_affine(u.as_slice(), out.as_mut_slice(), T::one(), tau);
        Ok(out)
    }

    /// Explicit matrix of `H` in the flattened layout, built entry by entry
    /// from the stencil coefficients.
    pub fn assemble_dense(&self) -> Result<DenseMatrix<T>> {
        let n = self.grid.n_interior();
        if n > MAX_DENSE_INTERIOR {
            return Err(Error::GridTooLarge { n, max: MAX_DENSE_INTERIOR });
        }
        let dim = self.grid.dof();
        let mut a = DenseMatrix::zeros(dim);
        let h = self.grid.mesh();
        let zero = T::zero();
        let off = -T::lit(0.5) / (h * h);
        let diag = T::lit(2.0) / (h * h);
        for c in 0..COMPONENTS {
            let s = self.omega[c] / (h + h);
            for k in 0..n {
                let y = self.grid.coord(k);
                for j in 0..n {
                    let x = self.grid.coord(j);
                    let r = self.grid.index(c, j, k);
                    a.add(r, r, Complex::new(diag + self.effective[c][k * n + j], zero));
                    if j > 0 {
                        let col = self.grid.index(c, j - 1, k);
                        a.add(r, col, Complex::new(off, s * y));
                    }
                    if j + 1 < n {
                        let col = self.grid.index(c, j + 1, k);
                        a.add(r, col, Complex::new(off, -s * y));
                    }
                    if k > 0 {
                        let col = self.grid.index(c, j, k - 1);
                        a.add(r, col, Complex::new(off, -s * x));
                    }
                    if k + 1 < n {
                        let col = self.grid.index(c, j, k + 1);
                        a.add(r, col, Complex::new(off, s * x));
                    }
                    let partner = self.grid.index(1 - c, j, k);
                    a.add(r, partner, Complex::new(self.beta, zero));
                }
            }
        }
        Ok(a)
    }
}

/// Pre-scaled coefficients of one component of `shift * u + scale * H u`.
struct Stencil<T> {
    kin: T,
    rot: T,
    beta: T,
    scale: T,
    center_base: T,
}

impl<T: Real> Stencil<T> {
    #[inline(always)]
    #[allow(clippy::too_many_arguments)]
    fn eval(
        &self,
        center: Complex<T>,
        left: Complex<T>,
        right: Complex<T>,
        down: Complex<T>,
        up: Complex<T>,
        x: T,
        y: T,
        eff: T,
        other: Complex<T>,
    ) -> Complex<T> {
        let diag = self.center_base + self.scale * eff;
        let sum = left + right + down + up;
        // -omega Lz u = i omega (x D0_y u - y D0_x u)
        let w = (up - down) * x - (right - left) * y;
        Complex::new(
            diag * center.re - self.kin * sum.re - self.rot * w.im + self.beta * other.re,
            diag * center.im - self.kin * sum.im + self.rot * w.re + self.beta * other.im,
        )
    }
}

pub(crate) fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("time step must be positive and finite, got {tau}")))
    }
}

/// 5-point Laplacian of one component with zero Dirichlet ghosts.
pub fn apply_laplacian<T: Real>(grid: &GridSpec<T>, u: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = grid.n_interior();
    assert_eq!(u.len(), n * n);
    let zero = Complex::new(T::zero(), T::zero());
    let inv_h2 = (grid.mesh() * grid.mesh()).recip();
    let at = |j: isize, k: isize| -> Complex<T> {
        if j < 0 || k < 0 || j >= n as isize || k >= n as isize {
            zero
        } else {
            u[k as usize * n + j as usize]
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n as isize {
        for j in 0..n as isize {
            let s = at(j + 1, k) + at(j - 1, k) + at(j, k + 1) + at(j, k - 1) - at(j, k) * T::lit(4.0);
            out.push(s * inv_h2);
        }
    }
    out
}

/// Central-difference angular momentum `Lz u = -i (x D0_y u - y D0_x u)` of one component.
pub fn apply_lz<T: Real>(grid: &GridSpec<T>, u: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = grid.n_interior();
    assert_eq!(u.len(), n * n);
    let zero = Complex::new(T::zero(), T::zero());
    let two_h = grid.mesh() + grid.mesh();
    let at = |j: isize, k: isize| -> Complex<T> {
        if j < 0 || k < 0 || j >= n as isize || k >= n as isize {
            zero
        } else {
            u[k as usize * n + j as usize]
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n as isize {
        let y = grid.coord(k as usize);
        for j in 0..n as isize {
            let x = grid.coord(j as usize);
            let dy = (at(j, k + 1) - at(j, k - 1)) / two_h;
            let dx = (at(j + 1, k) - at(j - 1, k)) / two_h;
            let w = dy * x - dx * y;
            // -i * w
            out.push(Complex::new(w.im, -w.re));
        }
    }
    out
}

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.dim + c] = v;
    }

    #[inline]
    fn add(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.dim + c] = self.data[r * self.dim + c] + v;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `max |A - A^H|` over all entries.
    pub fn max_hermitian_deviation(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// `I + tau A`.
    pub fn shifted(&self, tau: T) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z = *z * tau;
        }
        for i in 0..self.dim {
            out.add(i, i, Complex::new(T::one(), T::zero()));
        }
        out
    }
}
