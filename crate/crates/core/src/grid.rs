//! Uniform tensor grid on the square `[-L, L]^2` with homogeneous Dirichlet
//! boundary, two-component complex fields on its interior, and the discrete
//! norms and inner products used throughout.
//!
//! Flattening layout is row-major over `(component, y, x)`: the value of
//! component `c` at interior node `(j, k)` (x index `j`, y index `k`, both
//! zero-based) lives at `c * n * n + k * n + j`. Boundary nodes are not
//! stored; they are implicitly zero.
//!
//! Reductions use a fixed summation order, so results are bit-reproducible
//! across runs and thread counts.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of field components.
pub const COMPONENTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    half_width: T,
    mesh: T,
    n: usize,
}

impl<T: Real> GridSpec<T> {
    /// Grid on `[-half_width, half_width]^2` with spacing `mesh`.
    ///
    /// `2 * half_width / mesh` must be an integer of at least 2.
    pub fn new(half_width: T, mesh: T) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if !(mesh > T::zero()) || !mesh.is_finite() {
            return Err(Error::InvalidGrid(format!("mesh size must be positive, got {mesh}")));
        }
        let intervals = (half_width + half_width) / mesh;
        let rounded = intervals.round();
        if (intervals - rounded).abs() > T::lit(1e-6) * rounded.max(T::one()) {
            return Err(Error::InvalidGrid(format!(
                "2L/h = {intervals} is not an integer (L = {half_width}, h = {mesh})"
            )));
        }
        let intervals = rounded
            .to_usize()
            .ok_or_else(|| Error::InvalidGrid("interval count out of range".into()))?;
        Self::with_intervals(half_width, intervals)
    }

    /// Grid on `[-half_width, half_width]^2` split into `intervals` cells per axis.
    pub fn with_intervals(half_width: T, intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 intervals per axis, got {intervals}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        let mesh = (half_width + half_width) / T::from_usize(intervals).unwrap();
        Ok(Self { half_width, mesh, n: intervals - 1 })
    }

    /// Grid with `n` interior points per axis and spacing `mesh`, so `L = (n + 1) h / 2`.
    pub fn with_interior(n: usize, mesh: T) -> Result<Self> {
        if !(mesh > T::zero()) || !mesh.is_finite() {
            return Err(Error::InvalidGrid(format!("mesh size must be positive, got {mesh}")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one interior point".into()));
        }
        let half_width = mesh * T::from_usize(n + 1).unwrap() / T::lit(2.0);
        Ok(Self { half_width, mesh, n })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn mesh(&self) -> T {
        self.mesh
    }

    /// Interior points per axis.
    pub fn n_interior(&self) -> usize {
        self.n
    }

    /// Interior points per component.
    pub fn points(&self) -> usize {
        self.n * self.n
    }

    /// Length of a flattened two-component field.
    pub fn dof(&self) -> usize {
        COMPONENTS * self.points()
    }

    /// Quadrature weight `h^2`.
    pub fn weight(&self) -> T {
        self.mesh * self.mesh
    }

    /// Coordinate of interior index `i` (zero-based) along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::from_usize(i + 1).unwrap() * self.mesh
    }

    /// Interior coordinates along one axis.
    pub fn coords(&self) -> Vec<T> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    #[inline]
    pub fn index(&self, component: usize, j: usize, k: usize) -> usize {
        debug_assert!(component < COMPONENTS && j < self.n && k < self.n);
        component * self.n * self.n + k * self.n + j
    }
}

/// Pair of complex interior grid functions `(psi_1, psi_2)` sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T> {
    grid: GridSpec<T>,
    data: Vec<Complex<T>>,
}

impl<T: Real> WaveField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { data: vec![Complex::new(T::zero(), T::zero()); grid.dof()], grid }
    }

    /// Wraps flattened data (layout documented at module level). Rejects
    /// wrong lengths and non-finite entries.
    pub fn from_vec(grid: GridSpec<T>, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.dof() {
            return Err(Error::InvalidParameter(format!(
                "field length {} does not match grid ({} expected)",
                data.len(),
                grid.dof()
            )));
        }
        let field = Self { grid, data };
        if !field.is_finite() {
            return Err(Error::NonFinite("field construction"));
        }
        Ok(field)
    }

    /// Samples `f(component, x, y)` at every interior node.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(usize, T, T) -> Complex<T>) -> Self {
        let n = grid.n_interior();
        let mut data = Vec::with_capacity(grid.dof());
        for c in 0..COMPONENTS {
            for k in 0..n {
                let y = grid.coord(k);
                for j in 0..n {
                    data.push(f(c, grid.coord(j), y));
                }
            }
        }
        Self { grid, data }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[Complex<T>] {
        let m = self.grid.points();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        let m = self.grid.points();
        &mut self.data[c * m..(c + 1) * m]
    }

    #[inline]
    pub fn get(&self, c: usize, j: usize, k: usize) -> Complex<T> {
        self.data[self.grid.index(c, j, k)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, j: usize, k: usize, v: Complex<T>) {
        let i = self.grid.index(c, j, k);
        self.data[i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: Complex<T>) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: Complex<T>, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(&u, &v)| u + v * a).collect();
        Ok(Self { grid: self.grid, data })
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex::new(-T::one(), T::zero()), other)
    }

    /// Pointwise `|psi_c|^2` of one component.
    pub fn density(&self, c: usize) -> Vec<T> {
        self.component(c).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Returns the field divided by its L2 norm. Fails on a zero field.
    pub fn normalized(&self) -> Result<Self> {
        let norm = l2_norm(self);
        if !(norm > T::zero()) {
            return Err(Error::InvalidParameter("cannot normalize a zero field".into()));
        }
        Ok(self.scaled(Complex::new(norm.recip(), T::zero())))
    }
}

/// Independent partial sums per reduction; fixed, so results stay bit-reproducible.
const LANES: usize = 4;

/// Real L2 pairing `h^2 Re sum a conj(b)` on flattened data.
pub(crate) fn dot_re<T: Real>(weight: T, a: &[Complex<T>], b: &[Complex<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let (ta, tb) = (ca.remainder(), cb.remainder());
    for (u, v) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += u[l].re * v[l].re + u[l].im * v[l].im;
        }
    }
    let mut tail = T::zero();
    for (u, v) in ta.iter().zip(tb) {
        tail += u.re * v.re + u.im * v.im;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3]) + tail) * weight
}

pub(crate) fn norm_sq<T: Real>(weight: T, a: &[Complex<T>]) -> T {
    dot_re(weight, a, a)
}

/// Discrete L2 norm `sqrt(h^2 sum_{c,j,k} |f_c(x_j, y_k)|^2)`.
pub fn l2_norm<T: Real>(f: &WaveField<T>) -> T {
    norm_sq(f.grid.weight(), &f.data).sqrt()
}

/// Real inner product `h^2 Re sum f conj(g)` over both components.
pub fn inner_l2<T: Real>(f: &WaveField<T>, g: &WaveField<T>) -> Result<T> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    Ok(dot_re(f.grid.weight(), &f.data, &g.data))
}

/// Maximum complex modulus over all nodes of both components.
pub fn linf_norm<T: Real>(f: &WaveField<T>) -> T {
    f.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Squared discrete H^1_0 seminorm from forward differences, including the
/// edges to the zero boundary: `h^2 sum_edges |D^+ f|^2`, both axes, both
/// components. Equals `-h^2 Re sum conj(f) Lap_h f` for the 5-point Laplacian.
pub fn h1_seminorm_sq<T: Real>(f: &WaveField<T>) -> T {
    let n = f.grid.n_interior();
    let zero = Complex::new(T::zero(), T::zero());
    let mut acc = T::zero();
    for c in 0..COMPONENTS {
        let u = f.component(c);
        for k in 0..n {
            let row = &u[k * n..(k + 1) * n];
            let mut prev = zero;
            for &v in row {
                acc += (v - prev).norm_sqr();
                prev = v;
            }
            acc += prev.norm_sqr();
        }
        for j in 0..n {
            let mut prev = zero;
            for k in 0..n {
                let v = u[k * n + j];
                acc += (v - prev).norm_sqr();
                prev = v;
            }
            acc += prev.norm_sqr();
        }
    }
    // h^2 * |diff / h|^2 = |diff|^2 in two dimensions.
    acc
}
