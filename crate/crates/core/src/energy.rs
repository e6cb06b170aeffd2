//! Discrete Gross–Pitaevskii energy, chemical potential and the energy
//! gradient pairing.
//!
//! The kinetic term is half the forward-difference seminorm, which makes
//! `<-1/2 Lap_h u, u> = kinetic(u)` exact; the rotation term uses the same
//! central-difference `Lz_h` as the operator. Together these give
//! `<H_psi psi, psi> = E(psi) + 1/2 sum_i (rho_i, |psi_i|^2)` to rounding.

use crate::error::{Error, Result};
use crate::grid::{dot_re, h1_seminorm_sq, inner_l2, WaveField, COMPONENTS};
use crate::operator::{apply_lz, FrozenHamiltonian};
use crate::physics::PhysicsParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown<T> {
    pub kinetic: T,
    pub potential: T,
    pub interaction: T,
    pub rotation: T,
    pub josephson: T,
    pub total: T,
}

/// Energy of `psi`, split by term. `psi` need not be normalized.
pub fn energy<T: Real>(psi: &WaveField<T>, params: &PhysicsParams<T>) -> Result<EnergyBreakdown<T>> {
    let grid = *psi.grid();
    let w = grid.weight();
    let half = T::lit(0.5);

    let kinetic = half * h1_seminorm_sq(psi);

    let mut potential = T::zero();
    let mut interaction = T::zero();
    let mut rotation = T::zero();
    let rho = params.densities(psi);
    for c in 0..COMPONENTS {
        let v = params.eval_potential(&grid, c)?;
        let dens = psi.density(c);
        let mut pot = T::zero();
        let mut int = T::zero();
        for ((&d, &vi), &r) in dens.iter().zip(&v).zip(&rho[c]) {
            pot += vi * d;
            int += r * d;
        }
        potential += pot * w;
        interaction += half * int * w;

        let omega = params.omega(c);
        if omega != T::zero() {
            let u = psi.component(c);
            let lz = apply_lz(&grid, u);
            rotation -= omega * dot_re(w, &lz, u);
        }
    }
    let josephson = T::lit(2.0) * params.beta * dot_re(w, psi.component(0), psi.component(1));

    let total = kinetic + potential + interaction + rotation + josephson;
    if !total.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    Ok(EnergyBreakdown { kinetic, potential, interaction, rotation, josephson, total })
}

/// `mu(psi) = E(psi) + 1/2 sum_i h^2 sum rho_i |psi_i|^2`.
pub fn chemical_potential<T: Real>(psi: &WaveField<T>, params: &PhysicsParams<T>) -> Result<T> {
    let e = energy(psi, params)?;
    Ok(e.total + e.interaction)
}

/// `2 (H_psi psi, phi)`: the directional derivative of `E` at `psi` along `phi`.
pub fn energy_gradient_pairing<T: Real>(
    psi: &WaveField<T>,
    phi: &WaveField<T>,
    params: &PhysicsParams<T>,
) -> Result<T> {
    if !psi.same_grid(phi) {
        return Err(Error::GridMismatch);
    }
    let h = FrozenHamiltonian::new(psi, params)?;
    let hpsi = h.apply(psi)?;
    Ok(T::lit(2.0) * inner_l2(&hpsi, phi)?)
}
