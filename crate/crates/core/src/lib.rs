//! Ground states of two-component rotating Bose–Einstein condensates with a
//! Josephson junction, computed by the normalized gradient flow with
//! semi-implicit time stepping on a uniform finite-difference grid.
//!
//! Every routine is generic over the real scalar type (see [`Real`]); the
//! aliases below fix it to `f64` or `f32`.

pub mod energy;
pub mod error;
pub mod gfsi;
pub mod grid;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod physics;
pub mod scalar;

pub use energy::{chemical_potential, energy, energy_gradient_pairing, EnergyBreakdown};
pub use error::{Error, Result};
pub use gfsi::{
    dissipation_audit, gfsi_step, gfsi_step_from, heuristic_tau0, solve_ground_state, solve_ground_state_with,
    DissipationAudit, GroundStateResult, IterationRecord, Safeguard, SolverConfig, StepOutcome,
};
pub use grid::{h1_seminorm_sq, inner_l2, l2_norm, linf_norm, GridSpec, WaveField, COMPONENTS};
pub use linalg::{dense_solve_shifted, solve_shifted, KrylovConfig, Preconditioner, SolveMethod, SolveReport};
pub use operator::{apply_laplacian, apply_lz, DenseMatrix, FrozenHamiltonian};
pub use physics::{CoercivityReport, InteractionClass, PhysicsParams, Potential};
pub use scalar::Real;

pub use num_complex::Complex;

pub type Grid = GridSpec<f64>;
pub type Field = WaveField<f64>;
pub type Params = PhysicsParams<f64>;
pub type Config = SolverConfig<f64>;
pub type Hamiltonian = FrozenHamiltonian<f64>;
pub type GroundState = GroundStateResult<f64>;
pub type Record = IterationRecord<f64>;

pub type Grid32 = GridSpec<f32>;
pub type Field32 = WaveField<f32>;
pub type Params32 = PhysicsParams<f32>;
pub type Config32 = SolverConfig<f32>;

/// Continuum-normalized Gaussian `e^{-(x^2+y^2)/2} / sqrt(2 pi)` in both components.
pub fn gaussian_initial<T: Real>(grid: GridSpec<T>) -> WaveField<T> {
    let norm = (T::lit(2.0) * T::lit(std::f64::consts::PI)).sqrt().recip();
    WaveField::from_fn(grid, |_, x, y| Complex::new((-(x * x + y * y) / T::lit(2.0)).exp() * norm, T::zero()))
}

/// Unit-vortex Gaussian `(x + i y) e^{-(x^2+y^2)/2} / sqrt(2 pi)` in both components.
pub fn vortex_initial<T: Real>(grid: GridSpec<T>) -> WaveField<T> {
    let norm = (T::lit(2.0) * T::lit(std::f64::consts::PI)).sqrt().recip();
    WaveField::from_fn(grid, |_, x, y| {
        let g = (-(x * x + y * y) / T::lit(2.0)).exp() * norm;
        Complex::new(x * g, y * g)
    })
}
