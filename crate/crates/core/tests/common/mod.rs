#![allow(dead_code)]

use gpflow_core::{Complex, Field, Grid, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut impl Rng, grid: Grid) -> Field {
    Field::from_fn(grid, |_, _, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_unit_field(rng: &mut impl Rng, grid: Grid) -> Field {
    random_field(rng, grid).normalized().unwrap()
}

/// Smooth normalized field vanishing towards the boundary, with random phase structure.
pub fn smooth_unit_field(rng: &mut impl Rng, grid: Grid) -> Field {
    let l = grid.half_width();
    let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    Field::from_fn(grid, |c, x, y| {
        let bump = (1.0 - (x / l).powi(2)) * (1.0 - (y / l).powi(2));
        let s = if c == 0 { 1.0 } else { -0.5 };
        Complex::new(bump * (1.0 + a[0] * x + a[1] * y * s), bump * (a[2] * x * y + a[3] * s + a[4] * x + a[5] * y))
    })
    .normalized()
    .unwrap()
}

pub fn random_params(rng: &mut impl Rng) -> Params {
    let k11 = rng.gen_range(0.0..50.0);
    let k22 = rng.gen_range(0.0..50.0);
    let k12 = rng.gen_range(0.0..(k11 * k22 as f64).sqrt().max(1e-3));
    let beta = rng.gen_range(-3.0..3.0);
    let gamma = rng.gen_range(0.5..2.0);
    let w1 = rng.gen_range(0.0..0.6);
    let w2 = rng.gen_range(0.0..0.6);
    Params::new(k11, k12, k22, beta)
        .with_rotation(w1, w2)
        .with_potential(gpflow_core::Potential::Harmonic { gamma, add_abs_beta: true, offset: 0.0 })
}

pub fn random_interior_grid(rng: &mut impl Rng, max_n: usize) -> Grid {
    let n = rng.gen_range(1..=max_n);
    let h = rng.gen_range(0.1..0.8);
    Grid::with_interior(n, h).unwrap()
}

pub fn case1() -> Params {
    Params::new(100.0, 94.0, 97.0, -5.0).with_rotation(0.5, 0.5)
}

pub fn case2() -> Params {
    Params::new(8.1, -0.94, 7.9, 0.2).with_rotation(0.5, 0.5)
}
