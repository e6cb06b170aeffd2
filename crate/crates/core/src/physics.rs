//! Model parameters: interaction matrix, Josephson coupling, rotation
//! frequencies and trapping potential, plus the coercivity constants that
//! govern the dissipation estimate.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, WaveField, COMPONENTS};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Potential<T> {
    /// `V(x, y) = gamma (x^2 + y^2) / 2 + (add_abs_beta ? |beta| : 0) + offset`
    /// for both components.
    Harmonic { gamma: T, add_abs_beta: bool, offset: T },
    /// Values tabulated on the interior nodes of `grid`, one table per component.
    Custom { grid: GridSpec<T>, values: [Vec<T>; COMPONENTS] },
}

impl<T: Real> Potential<T> {
    /// Unit harmonic trap with the `|beta|` shift.
    pub fn harmonic() -> Self {
        Potential::Harmonic { gamma: T::one(), add_abs_beta: true, offset: T::zero() }
    }
}

/// How the interaction matrix relates to the structural assumption on `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionClass {
    /// Every entry is non-negative (possibly also positive definite).
    NonNegative,
    /// Positive definite with a negative off-diagonal entry.
    PositiveDefinite,
    /// Neither; the dissipation analysis does not cover this matrix.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsParams<T> {
    pub k11: T,
    pub k12: T,
    pub k22: T,
    pub beta: T,
    pub omega1: T,
    pub omega2: T,
    pub potential: Potential<T>,
}

impl<T: Real> PhysicsParams<T> {
    /// Harmonic trap with the `|beta|` shift and no rotation.
    pub fn new(k11: T, k12: T, k22: T, beta: T) -> Self {
        Self {
            k11,
            k12,
            k22,
            beta,
            omega1: T::zero(),
            omega2: T::zero(),
            potential: Potential::harmonic(),
        }
    }

    /// Linear problem: no interaction, no coupling, no rotation, `V = |x|^2 / 2`.
    pub fn linear_harmonic() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn with_rotation(mut self, omega1: T, omega2: T) -> Self {
        self.omega1 = omega1;
        self.omega2 = omega2;
        self
    }

    pub fn with_potential(mut self, potential: Potential<T>) -> Self {
        self.potential = potential;
        self
    }

    pub fn k21(&self) -> T {
        self.k12
    }

    /// Interaction matrix entry, zero-based indices.
    pub fn k(&self, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.k11,
            (1, 1) => self.k22,
            _ => self.k12,
        }
    }

    /// `k_m = max |k_ij|`.
    pub fn k_max(&self) -> T {
        self.k11.abs().max(self.k12.abs()).max(self.k22.abs())
    }

    pub fn omega(&self, c: usize) -> T {
        if c == 0 {
            self.omega1
        } else {
            self.omega2
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.k11, self.k12, self.k22, self.beta, self.omega1, self.omega2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if self.omega1 < T::zero() || self.omega2 < T::zero() {
            return Err(Error::InvalidParameter("rotation frequencies must be non-negative".into()));
        }
        if let Potential::Harmonic { gamma, offset, .. } = self.potential {
            if !gamma.is_finite() || !offset.is_finite() {
                return Err(Error::InvalidParameter("non-finite potential parameter".into()));
            }
        }
        Ok(())
    }

    pub fn interaction_class(&self) -> InteractionClass {
        let z = T::zero();
        if self.k11 >= z && self.k12 >= z && self.k22 >= z {
            InteractionClass::NonNegative
        } else if self.k11 > z && self.k11 * self.k22 - self.k12 * self.k12 > z {
            InteractionClass::PositiveDefinite
        } else {
            InteractionClass::Unsupported
        }
    }

    /// Potential of component `c` (0 or 1) at every interior node of `grid`.
    pub fn eval_potential(&self, grid: &GridSpec<T>, c: usize) -> Result<Vec<T>> {
        assert!(c < COMPONENTS, "component index {c} out of range");
        match &self.potential {
            Potential::Harmonic { gamma, add_abs_beta, offset } => {
                let shift = *offset + if *add_abs_beta { self.beta.abs() } else { T::zero() };
                let half = T::lit(0.5) * *gamma;
                let coords = grid.coords();
                let mut out = Vec::with_capacity(grid.points());
                for &y in &coords {
                    for &x in &coords {
                        out.push(half * (x * x + y * y) + shift);
                    }
                }
                Ok(out)
            }
            Potential::Custom { grid: table_grid, values } => {
                if table_grid != grid || values[c].len() != grid.points() {
                    return Err(Error::GridMismatch);
                }
                Ok(values[c].clone())
            }
        }
    }

    /// Coupled densities `rho_1 = k11 |psi_1|^2 + k12 |psi_2|^2`,
    /// `rho_2 = k12 |psi_1|^2 + k22 |psi_2|^2`.
    pub fn densities(&self, psi: &WaveField<T>) -> [Vec<T>; COMPONENTS] {
        let (a, b) = (psi.component(0), psi.component(1));
        let mut rho1 = Vec::with_capacity(a.len());
        let mut rho2 = Vec::with_capacity(a.len());
        for (u, v) in a.iter().zip(b) {
            let (d1, d2) = (u.norm_sqr(), v.norm_sqr());
            rho1.push(self.k11 * d1 + self.k12 * d2);
            rho2.push(self.k12 * d1 + self.k22 * d2);
        }
        [rho1, rho2]
    }

    /// Largest `alpha` with `V_i >= (1 + alpha)/2 omega_i^2 (x^2 + y^2) + |beta|`
    /// on the domain, and the coercivity constant `C0 = alpha / (2 (1 + alpha))`.
    pub fn coercivity_constants(&self, grid: &GridSpec<T>) -> CoercivityReport<T> {
        let Potential::Harmonic { gamma, add_abs_beta, offset } = self.potential else {
            return CoercivityReport { alpha: None, c0: None, a_psi_hint: None, satisfied: false };
        };
        let _ = grid;
        let shift = offset + if add_abs_beta { self.beta.abs() } else { T::zero() };
        let w = self.omega1.max(self.omega2);
        if shift < self.beta.abs() {
            // Fails at the origin regardless of alpha.
            return CoercivityReport { alpha: None, c0: None, a_psi_hint: None, satisfied: false };
        }
        let alpha = if w == T::zero() {
            T::infinity()
        } else {
            gamma / (w * w) - T::one()
        };
        let satisfied = alpha > T::zero();
        let c0 = if alpha.is_infinite() {
            Some(T::lit(0.5))
        } else if satisfied {
            Some(alpha / (T::lit(2.0) * (T::one() + alpha)))
        } else {
            None
        };
        CoercivityReport { alpha: Some(alpha), c0, a_psi_hint: None, satisfied }
    }

    /// Checks the trap inequality at every interior node for the given `alpha`.
    pub fn trap_dominates_rotation(&self, grid: &GridSpec<T>, alpha: T) -> Result<bool> {
        let coords = grid.coords();
        for c in 0..COMPONENTS {
            let v = self.eval_potential(grid, c)?;
            let w = self.omega(c);
            let factor = if alpha.is_infinite() {
                if w == T::zero() {
                    T::zero()
                } else {
                    T::infinity()
                }
            } else {
                T::lit(0.5) * (T::one() + alpha) * w * w
            };
            let tol = T::lit(64.0) * T::epsilon();
            for (k, &y) in coords.iter().enumerate() {
                for (j, &x) in coords.iter().enumerate() {
                    let r2 = x * x + y * y;
                    let rhs = factor * r2 + self.beta.abs();
                    let lhs = v[k * coords.len() + j];
                    if lhs < rhs - tol * rhs.abs().max(T::one()) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityReport<T> {
    /// `None` when no alpha exists or the potential is tabulated; `+inf` without rotation.
    pub alpha: Option<T>,
    /// `alpha / (2 (1 + alpha))`, in `(0, 1/2]` when the trap assumption holds.
    pub c0: Option<T>,
    /// Advisory admissible step, filled in by the step-size heuristic.
    pub a_psi_hint: Option<T>,
    pub satisfied: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn case1() -> PhysicsParams<f64> {
        PhysicsParams::new(100.0, 94.0, 97.0, -5.0).with_rotation(0.5, 0.5)
    }

    #[test]
    fn harmonic_potential_values() {
        let g = GridSpec::<f64>::new(2.0, 1.0).unwrap();
        // interior coords -1, 0, 1
        let v = case1().eval_potential(&g, 0).unwrap();
        assert_eq!(v[g.index(0, 1, 1)], 5.0);
        let p = PhysicsParams::new(0.0, 0.0, 0.0, 0.0);
        let v = p.eval_potential(&g, 1).unwrap();
        assert_eq!(v[g.index(0, 2, 2)], 1.0);
    }

    #[test]
    fn custom_potential_passthrough_and_mismatch() {
        let g = GridSpec::<f64>::new(1.0, 0.5).unwrap();
        let table: Vec<f64> = (0..g.points()).map(|i| i as f64 * 0.25).collect();
        let p = PhysicsParams::new(0.0, 0.0, 0.0, 0.0).with_potential(Potential::Custom {
            grid: g,
            values: [table.clone(), vec![1.0; g.points()]],
        });
        assert_eq!(p.eval_potential(&g, 0).unwrap(), table);
        let other = GridSpec::<f64>::new(1.0, 0.25).unwrap();
        assert!(matches!(p.eval_potential(&other, 0), Err(Error::GridMismatch)));
        assert!(!p.coercivity_constants(&g).satisfied);
    }

    #[test]
    fn densities_follow_interaction_matrix() {
        let g = GridSpec::<f64>::new(1.0, 0.5).unwrap();
        let psi = WaveField::from_fn(g, |c, x, _| {
            if c == 0 {
                Complex::new(1.0 + x, 0.5)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let [r1, r2] = case1().densities(&psi);
        for (i, z) in psi.component(0).iter().enumerate() {
            assert_eq!(r1[i], 100.0 * z.norm_sqr());
            assert_eq!(r2[i], 94.0 * z.norm_sqr());
        }
        let zero = PhysicsParams::new(0.0, 0.0, 0.0, 1.0).densities(&psi);
        assert!(zero.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn coercivity_for_case1_rotation() {
        let g = GridSpec::<f64>::new(4.0, 0.25).unwrap();
        let rep = case1().coercivity_constants(&g);
        assert!(rep.satisfied);
        assert!((rep.alpha.unwrap() - 3.0).abs() < 1e-15);
        assert!((rep.c0.unwrap() - 0.375).abs() < 1e-15);
        assert!(case1().trap_dominates_rotation(&g, 3.0).unwrap());
        // Slightly larger alpha must fail somewhere away from the origin.
        assert!(!case1().trap_dominates_rotation(&g, 3.01).unwrap());
    }

    #[test]
    fn coercivity_without_rotation_is_one_half() {
        let g = GridSpec::<f64>::new(4.0, 0.5).unwrap();
        let rep = PhysicsParams::new(1.0, 0.0, 1.0, 0.2).coercivity_constants(&g);
        assert!(rep.satisfied);
        assert!(rep.alpha.unwrap().is_infinite());
        assert_eq!(rep.c0, Some(0.5));
    }

    #[test]
    fn fast_rotation_violates_trap_assumption() {
        let g = GridSpec::<f64>::new(4.0, 0.5).unwrap();
        let rep = case1().with_rotation(1.2, 0.5).coercivity_constants(&g);
        assert!(!rep.satisfied);
        assert!(rep.alpha.unwrap() < 0.0);
        assert!(rep.c0.is_none());
    }

    #[test]
    fn interaction_classes() {
        assert_eq!(case1().interaction_class(), InteractionClass::NonNegative);
        let case2 = PhysicsParams::new(8.1, -0.94, 7.9, 0.2);
        assert_eq!(case2.interaction_class(), InteractionClass::PositiveDefinite);
        let bad = PhysicsParams::new(1.0, -3.0, 1.0, 0.0);
        assert_eq!(bad.interaction_class(), InteractionClass::Unsupported);
        assert_eq!(bad.k21(), -3.0);
        assert_eq!(bad.k_max(), 3.0);
    }

    #[test]
    fn negative_rotation_is_rejected() {
        assert!(case1().with_rotation(-0.1, 0.0).validate().is_err());
        assert!(case1().validate().is_ok());
    }
}
