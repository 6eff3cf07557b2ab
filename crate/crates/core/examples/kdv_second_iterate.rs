//! The KdV second iterate: closed form against quadrature, and its L² size
//! as the truncation grows.

use dispersion_lab::kdv::{
    l2_bound_scan, second_iterate_closed_form, second_iterate_quadrature, KdvConstants, ScanMode,
};
use dispersion_lab::random::sample_kdv_data;
use dispersion_lab::spectral::sobolev_norm;

fn main() -> dispersion_lab::Result<()> {
    let k = KdvConstants::new(0.48)?;
    println!("threshold constants: a0 = {:.4}, alpha0 = {:.4}, s0 = {:.4}", k.a0, k.alpha0, k.s0);

    let u0 = sample_kdv_data(16, 0.0, 1)?.coeffs;
    let exact = second_iterate_closed_form(&u0, 0.3)?;
    println!("\nclosed form vs Simpson, N = 16, t = 0.3");
    for steps in [2048, 4096, 8192, 16384] {
        let q = second_iterate_quadrature(&u0, 0.3, steps)?;
        let err = sobolev_norm(&exact.sub(&q)?, 0.0) / sobolev_norm(&exact, 0.0);
        println!("  {steps:>6} steps  relative L2 error {err:.2e}");
    }

    let ladder = [16, 32, 64, 128, 256];
    for (label, s, mode) in [
        ("power-law data, s = -0.5", -0.5, ScanMode::Deterministic),
        ("random data, alpha = 0", -0.5, ScanMode::Random),
    ] {
        let summary = l2_bound_scan(s, &ladder, 1.0, mode, &[1, 2, 3, 4])?;
        println!("\n{label}: L2 norm of the second iterate at t = 1");
        for r in &summary.rungs {
            println!("  N = {:>4}  mean {:.4}", r.n_max, r.mean);
        }
        if let Some(ratio) = summary.plateau_ratio {
            println!("  last-rung ratio {ratio:.4}");
        }
    }
    Ok(())
}
