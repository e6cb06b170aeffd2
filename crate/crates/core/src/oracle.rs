//! Brute-force reference implementations for cross-checking the production
//! path: a dense Hermitian eigensolve of the linear problem, a dense-solve
//! replica of one flow step, and a direct-summation energy. None of these is
//! used by the solver itself.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, WaveField, COMPONENTS};
use crate::linalg::dense_solve_shifted;
use crate::operator::{DenseMatrix, FrozenHamiltonian};
use crate::physics::PhysicsParams;
use crate::scalar::Real;

/// Largest interior size per axis for the dense eigensolver.
pub const MAX_EIGEN_INTERIOR: usize = 16;

/// Assembled operator together with its grid.
#[derive(Debug, Clone)]
pub struct DenseReference<T> {
    pub grid: GridSpec<T>,
    pub matrix: DenseMatrix<T>,
}

impl<T: Real> DenseReference<T> {
    pub fn new(h: &FrozenHamiltonian<T>) -> Result<Self> {
        let n = h.grid().n_interior();
        if n > MAX_EIGEN_INTERIOR {
            return Err(Error::GridTooLarge { n, max: MAX_EIGEN_INTERIOR });
        }
        Ok(Self { grid: *h.grid(), matrix: h.assemble_dense()? })
    }
}

/// Smallest eigenpair of the dense `H` for a problem without interaction.
/// The eigenvector is L2-normalized.
pub fn linear_ground_state_dense<T>(params: &PhysicsParams<T>, grid: &GridSpec<T>) -> Result<(T, WaveField<T>)>
where
    T: Real + RealField,
{
    let (value, mut basis) = linear_ground_space_dense(params, grid, T::zero())?;
    Ok((value, basis.swap_remove(0)))
}

/// Smallest eigenvalue of the dense `H` together with an orthonormal basis
/// of every eigenvector whose eigenvalue lies within `cluster_tol` of it.
/// Uncoupled components (`beta = 0`) make the lowest level degenerate.
pub fn linear_ground_space_dense<T>(
    params: &PhysicsParams<T>,
    grid: &GridSpec<T>,
    cluster_tol: T,
) -> Result<(T, Vec<WaveField<T>>)>
where
    T: Real + RealField,
{
    if params.k11 != T::zero() || params.k12 != T::zero() || params.k22 != T::zero() {
        return Err(Error::InvalidParameter("dense eigen oracle needs a vanishing interaction matrix".into()));
    }
    let reference = DenseReference::new(&FrozenHamiltonian::linear(*grid, params)?)?;
    let dim = reference.matrix.dim();
    let m = DMatrix::from_row_slice(dim, dim, reference.matrix.as_slice());
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));
    let lowest = *order.first().ok_or(Error::InvalidParameter("empty operator".into()))?;
    let value = eig.eigenvalues[lowest];
    let mut basis = Vec::new();
    for &i in order.iter().take_while(|&&i| eig.eigenvalues[i] - value <= cluster_tol) {
        let vec: Vec<Complex<T>> = eig.eigenvectors.column(i).iter().copied().collect();
        basis.push(WaveField::from_vec(*grid, vec)?.normalized()?);
    }
    Ok((value, basis))
}

/// L2 distance from `a` to the span of the L2-orthonormal `basis`.
pub fn subspace_distance<T: Real>(a: &WaveField<T>, basis: &[WaveField<T>]) -> Result<T> {
    let w = a.grid().weight();
    let mut rest = a.clone();
    for b in basis {
        if !a.same_grid(b) {
            return Err(Error::GridMismatch);
        }
        let coef = b
            .as_slice()
            .iter()
            .zip(a.as_slice())
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&u, &v)| acc + u.conj() * v)
            * w;
        rest = rest.add_scaled(-coef, b)?;
    }
    Ok(crate::grid::l2_norm(&rest))
}

/// One flow step through a dense LU solve: freeze, solve, normalize.
pub fn gfsi_step_dense<T>(psi_n: &WaveField<T>, params: &PhysicsParams<T>, tau: T) -> Result<WaveField<T>>
where
    T: Real + RealField,
{
    let h = FrozenHamiltonian::new(psi_n, params)?;
    let tilde = dense_solve_shifted(&h, tau, psi_n)?;
    tilde.normalized()
}

/// `min_theta |a - e^{i theta} b|_{L2}`.
pub fn phase_aligned_distance<T: Real>(a: &WaveField<T>, b: &WaveField<T>) -> Result<T> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let overlap = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&u, &v)| acc + u * v.conj());
    let phase = if overlap.norm() > T::zero() { overlap / overlap.norm() } else { Complex::new(T::one(), T::zero()) };
    let rotated = b.scaled(phase);
    Ok(crate::grid::l2_norm(&a.sub(&rotated)?))
}

/// Energy by explicit per-node loops over neighbours, sharing no code with
/// the production evaluation.
pub fn energy_direct<T: Real>(psi: &WaveField<T>, params: &PhysicsParams<T>) -> Result<T> {
    let g = *psi.grid();
    let n = g.n_interior() as isize;
    let h = g.mesh();
    let w = h * h;
    let zero = Complex::new(T::zero(), T::zero());
    let val = |c: usize, j: isize, k: isize| -> Complex<T> {
        if j < 0 || k < 0 || j >= n || k >= n {
            zero
        } else {
            psi.get(c, j as usize, k as usize)
        }
    };
    let mut total = T::zero();
    for c in 0..COMPONENTS {
        let v = params.eval_potential(&g, c)?;
        for k in -1..n {
            for j in -1..n {
                // forward edges leaving node (j, k), including boundary nodes
                let here = val(c, j, k);
                if k >= 0 {
                    total += T::lit(0.5) * (val(c, j + 1, k) - here).norm_sqr();
                }
                if j >= 0 {
                    total += T::lit(0.5) * (val(c, j, k + 1) - here).norm_sqr();
                }
            }
        }
        for k in 0..n {
            for j in 0..n {
                let u = val(c, j, k);
                let (x, y) = (g.coord(j as usize), g.coord(k as usize));
                let d1 = val(0, j, k).norm_sqr();
                let d2 = val(1, j, k).norm_sqr();
                let rho = params.k(c, 0) * d1 + params.k(c, 1) * d2;
                total += w * (v[(k * n + j) as usize] * u.norm_sqr() + T::lit(0.5) * rho * u.norm_sqr());
                let dy = (val(c, j, k + 1) - val(c, j, k - 1)) / (h + h);
                let dx = (val(c, j + 1, k) - val(c, j - 1, k)) / (h + h);
                let lz = (dy * x - dx * y) * Complex::new(T::zero(), -T::one());
                total -= w * params.omega(c) * (u.conj() * lz).re;
            }
        }
    }
    for k in 0..n {
        for j in 0..n {
            total += w * T::lit(2.0) * params.beta * (val(0, j, k) * val(1, j, k).conj()).re;
        }
    }
    Ok(total)
}
