//! Ground state of the non-negative interaction case with rotation.
//!
//! `cargo run --release -p gpflow-core --example case1 -- <h> <tau>`

use std::time::Instant;

use gpflow_core::{gaussian_initial, solve_ground_state_with, Config, Grid, Params};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(Ok(1.0 / 32.0), |s| s.parse())?;
    let tau: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;
    let omega: f64 = args.next().map_or(Ok(0.5), |s| s.parse())?;

    let half_width: f64 = args.next().map_or(Ok(4.0), |s| s.parse())?;
    let grid = Grid::new(half_width, h)?;
    let params = Params::new(100.0, 94.0, 97.0, -5.0).with_rotation(omega, omega);
    let psi0 = gaussian_initial(grid).normalized()?;
    let start = Instant::now();
    let result = solve_ground_state_with(&psi0, &params, &Config::new(tau), |r| {
        println!(
            "{:4} E={:.10} lambda={:.8} |tilde|={:.12} inc/tau={:.3e} cg={}",
            r.n,
            r.energy,
            r.lambda,
            r.tilde_l2,
            r.inf_increment / r.tau_used,
            r.krylov_iters
        );
    })?;
    println!(
        "E = {:.6}  mu = {:.6}  steps = {}  converged = {}  residual = {:.2e}  ({:.1?})",
        result.energy.total,
        result.mu,
        result.steps,
        result.converged,
        result.stationarity_residual,
        start.elapsed()
    );
    Ok(())
}
