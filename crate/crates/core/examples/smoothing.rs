//! Evolve KdV and Szegő from random data and compare the spectral decay of
//! the nonlinear part with that of the data.

use dispersion_lab::evolve::{evolve_kdv, recommended_dt, smoothing_profile, Flow, IntegratorConfig};
use dispersion_lab::experiments::smoothing_trial;
use dispersion_lab::random::sample_kdv_data;

fn main() -> dispersion_lab::Result<()> {
    let u0 = sample_kdv_data(128, 0.0, 3)?.coeffs;
    let dt = recommended_dt(&u0, Flow::Kdv);
    let cfg = IntegratorConfig::kdv(dt, 0.01).recording_every(1000);
    let traj = evolve_kdv(&u0, &cfg)?;
    println!("KdV, N = 128, dt = {dt:.2e}, {} steps", cfg.steps());
    for (t, c) in traj.times.iter().zip(&traj.conserved) {
        println!("  t = {t:.4}  mass {:.10}  mean {:.1e}", c.mass, c.mean.norm());
    }
    let (p_lin, p_nl) = smoothing_profile(&traj, 0.01, Flow::Kdv)?;
    println!("  decay exponents: data {p_lin:.3}, nonlinear part {p_nl:.3}");

    println!("\nSzego, N = 128, alpha = 1");
    for seed in 0..3 {
        let (p_lin, p_nl) = smoothing_trial(Flow::Szego, 128, 1.0, 0.01, None, seed)?;
        println!("  seed {seed}: data {p_lin:.3}, nonlinear part {p_nl:.3}");
    }
    Ok(())
}
