mod common;

use std::f64::consts::PI;

use common::{case1, random_field, random_interior_grid, random_params, rng, smooth_unit_field};
use gpflow_core::{
    apply_laplacian, apply_lz, chemical_potential, energy, gaussian_initial, h1_seminorm_sq, inner_l2, l2_norm,
    linf_norm, vortex_initial, Complex, Field, Grid, Hamiltonian, Params, Potential, COMPONENTS,
};
use rand::Rng;

fn free_params() -> Params {
    Params::new(0.0, 0.0, 0.0, 0.0).with_potential(Potential::Harmonic { gamma: 0.0, add_abs_beta: false, offset: 0.0 })
}

fn sine_mode(grid: Grid, p: usize, q: usize) -> Vec<Complex<f64>> {
    let n = grid.n_interior();
    let m = (n + 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            let v = (PI * p as f64 * (j + 1) as f64 / m).sin() * (PI * q as f64 * (k + 1) as f64 / m).sin();
            out.push(Complex::new(v, 0.0));
        }
    }
    out
}

fn sine_eigenvalue(grid: Grid, p: usize, q: usize) -> f64 {
    let m = (grid.n_interior() + 1) as f64;
    let h = grid.mesh();
    let s = |r: usize| (PI * r as f64 / (2.0 * m)).sin().powi(2);
    -4.0 / (h * h) * (s(p) + s(q))
}

#[test]
fn laplacian_of_single_node_constant() {
    let g = Grid::with_interior(1, 1.0).unwrap();
    let out = apply_laplacian(&g, &[Complex::new(1.0, 0.0)]);
    assert_eq!(out, vec![Complex::new(-4.0, 0.0)]);
}

#[test]
fn laplacian_sine_eigenpairs() {
    let g = Grid::new(3.0, 0.25).unwrap();
    for &(p, q) in &[(1, 1), (2, 3), (7, 1), (11, 23)] {
        let u = sine_mode(g, p, q);
        let lam = sine_eigenvalue(g, p, q);
        let lu = apply_laplacian(&g, &u);
        let err = lu.iter().zip(&u).map(|(a, b)| (a - b * lam).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * lam.abs(), "mode ({p},{q}): {err}");
    }
}

#[test]
fn radial_real_field_has_no_rotation_pairing() {
    let g = Grid::new(3.0, 0.25).unwrap();
    let u: Vec<_> = g
        .coords()
        .iter()
        .flat_map(|&y| g.coords().into_iter().map(move |x| Complex::new((-(x * x + y * y)).exp(), 0.0)))
        .collect();
    let lz = apply_lz(&g, &u);
    let w = g.weight();
    let pairing: f64 = lz.iter().zip(&u).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * w;
    assert!(pairing.abs() < 1e-12);
}

fn vortex_angular_momentum(h: f64) -> f64 {
    let g = Grid::new(6.0, h).unwrap();
    let u = vortex_initial(g);
    let c = u.component(0);
    let lz = apply_lz(&g, c);
    let num: Complex<f64> = lz.iter().zip(c).map(|(a, b)| a * b.conj()).sum();
    let den: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    num.re / den
}

#[test]
fn vortex_carries_unit_angular_momentum_at_second_order() {
    let errs: Vec<f64> = [0.25, 0.125, 0.0625].iter().map(|&h| (vortex_angular_momentum(h) - 1.0).abs()).collect();
    assert!(errs[2] < 1e-2, "{errs:?}");
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}, errors {errs:?}");
    }
}

#[test]
fn free_hamiltonian_is_half_negative_laplacian() {
    let mut r = rng(10);
    let g = Grid::with_interior(5, 0.4).unwrap();
    let u = random_field(&mut r, g);
    let hu = Hamiltonian::linear(g, &free_params()).unwrap().apply(&u).unwrap();
    for c in 0..COMPONENTS {
        let lap = apply_laplacian(&g, u.component(c));
        for (a, b) in hu.component(c).iter().zip(&lap) {
            assert!((a + b * 0.5).norm() <= 1e-13 * b.norm().max(1.0));
        }
    }
}

#[test]
fn hermiticity_on_random_pairs() {
    let mut r = rng(11);
    for _ in 0..200 {
        let g = random_interior_grid(&mut r, 10);
        let mut p = random_params(&mut r);
        if r.gen_bool(0.3) {
            p.k12 = -p.k12;
        }
        let psi = random_field(&mut r, g);
        let h = Hamiltonian::new(&psi, &p).unwrap();
        let u = random_field(&mut r, g);
        let v = random_field(&mut r, g);
        let lhs = inner_l2(&h.apply(&u).unwrap(), &v).unwrap();
        let rhs = inner_l2(&u, &h.apply(&v).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-11 * l2_norm(&u) * l2_norm(&v), "{lhs} vs {rhs}");
    }
}

#[test]
fn application_is_linear() {
    let mut r = rng(12);
    let g = Grid::with_interior(9, 0.3).unwrap();
    let p = random_params(&mut r);
    let h = Hamiltonian::new(&random_field(&mut r, g), &p).unwrap();
    let u = random_field(&mut r, g);
    let v = random_field(&mut r, g);
    let (a, b) = (Complex::new(0.3, -1.2), Complex::new(-2.0, 0.7));
    let lhs = h.apply(&u.scaled(a).add_scaled(b, &v).unwrap()).unwrap();
    let rhs = h.apply(&u).unwrap().scaled(a).add_scaled(b, &h.apply(&v).unwrap()).unwrap();
    assert!(l2_norm(&lhs.sub(&rhs).unwrap()) <= 1e-12 * l2_norm(&lhs));
}

#[test]
fn matrix_free_matches_dense_up_to_12x12() {
    let mut r = rng(13);
    for n in 1..=12 {
        let g = Grid::with_interior(n, r.gen_range(0.1..0.8)).unwrap();
        let p = random_params(&mut r);
        let h = Hamiltonian::new(&random_field(&mut r, g), &p).unwrap();
        let dense = h.assemble_dense().unwrap();
        let u = random_field(&mut r, g);
        let free = h.apply(&u).unwrap();
        let reference = dense.matvec(u.as_slice());
        let scale = linf_norm(&free);
        let err = free.as_slice().iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-13 * scale, "n={n}: {err} vs scale {scale}");

        let tau = r.gen_range(0.01..2.0);
        let shifted = h.apply_shifted(tau, &u).unwrap();
        let reference = dense.shifted(tau).matvec(u.as_slice());
        let err = shifted.as_slice().iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-13 * linf_norm(&shifted));
    }
}

#[test]
fn single_node_dense_matrix_is_scaled_identity() {
    let h = 0.5;
    let c = 3.25;
    let g = Grid::with_interior(1, h).unwrap();
    let p = Params::new(0.0, 0.0, 0.0, 0.0)
        .with_potential(Potential::Harmonic { gamma: 0.0, add_abs_beta: false, offset: c });
    let m = Hamiltonian::linear(g, &p).unwrap().assemble_dense().unwrap();
    assert_eq!(m.dim(), 2);
    let d = 2.0 / (h * h) + c;
    assert_eq!(m.get(0, 0), Complex::new(d, 0.0));
    assert_eq!(m.get(1, 1), Complex::new(d, 0.0));
    assert_eq!(m.get(0, 1), Complex::new(0.0, 0.0));
}

#[test]
fn josephson_only_coupling_blocks() {
    let g = Grid::with_interior(3, 0.5).unwrap();
    let p = Params::new(0.0, 0.0, 0.0, 7.0);
    let m = Hamiltonian::linear(g, &p).unwrap().assemble_dense().unwrap();
    let half = 9;
    for r in 0..half {
        for c in 0..half {
            let want = if r == c { Complex::new(7.0, 0.0) } else { Complex::new(0.0, 0.0) };
            assert_eq!(m.get(r, c + half), want);
            assert_eq!(m.get(r + half, c), want);
        }
    }
}

#[test]
fn case1_dense_assembly_is_hermitian() {
    let g = Grid::with_interior(6, 0.5).unwrap();
    let psi = gaussian_initial(g).normalized().unwrap();
    let m = Hamiltonian::new(&psi, &case1()).unwrap().assemble_dense().unwrap();
    assert!(m.max_hermitian_deviation() < 1e-13);
}

#[test]
fn dense_assembly_refuses_large_grids() {
    let g = Grid::with_interior(33, 0.1).unwrap();
    let h = Hamiltonian::linear(g, &Params::linear_harmonic()).unwrap();
    assert!(h.assemble_dense().is_err());
}

#[test]
fn shifted_operator_rejects_non_positive_tau() {
    let g = Grid::new(1.0, 0.5).unwrap();
    let h = Hamiltonian::linear(g, &Params::linear_harmonic()).unwrap();
    let u = Field::zeros(g);
    assert!(h.apply_shifted(0.0, &u).is_err());
    assert!(h.apply_shifted(-1.0, &u).is_err());
    assert!(h.apply_shifted(f64::NAN, &u).is_err());
}

#[test]
fn shifted_operator_on_eigenvector() {
    let g = Grid::new(2.0, 0.25).unwrap();
    let mut data = sine_mode(g, 2, 1);
    data.extend(vec![Complex::new(0.0, 0.0); g.points()]);
    let u = Field::from_vec(g, data).unwrap();
    let mu = -0.5 * sine_eigenvalue(g, 2, 1);
    let tau = 0.7;
    let out = Hamiltonian::linear(g, &free_params()).unwrap().apply_shifted(tau, &u).unwrap();
    let want = u.scaled(Complex::new(1.0 + tau * mu, 0.0));
    assert!(l2_norm(&out.sub(&want).unwrap()) <= 1e-12 * l2_norm(&want));
}

#[test]
fn quadratic_form_identity_for_case1_initial_data() {
    let g = Grid::new(4.0, 0.125).unwrap();
    let psi = gaussian_initial(g).normalized().unwrap();
    let p = case1();
    let h = Hamiltonian::new(&psi, &p).unwrap();
    let form = inner_l2(&h.apply(&psi).unwrap(), &psi).unwrap();
    let e = energy(&psi, &p).unwrap();
    assert!((form - e.total - e.interaction).abs() < 1e-10);
    assert!((form - chemical_potential(&psi, &p).unwrap()).abs() < 1e-10);
}

#[test]
fn coercivity_lower_bound_holds() {
    let mut r = rng(14);
    for _ in 0..50 {
        let g = Grid::with_interior(r.gen_range(2..14), r.gen_range(0.1..0.7)).unwrap();
        let p = random_params(&mut r);
        let report = p.coercivity_constants(&g);
        if !report.satisfied {
            continue;
        }
        let c0 = report.c0.unwrap();
        let psi = random_field(&mut r, g);
        let h = Hamiltonian::new(&psi, &p).unwrap();
        for u in [random_field(&mut r, g), smooth_unit_field(&mut r, g)] {
            let form = inner_l2(&h.apply(&u).unwrap(), &u).unwrap();
            let h1 = h1_seminorm_sq(&u);
            assert!(form >= c0 * h1 - 1e-10 * h1, "form {form} < C0 {c0} * {h1}");
        }
    }
}
