//! Szegő second iterate: exact Wick expectation, its pairing decomposition,
//! and Monte Carlo growth in H^s.

use dispersion_lab::szego::{hs_growth_curve, wick_expectation_exact};

fn main() -> dispersion_lab::Result<()> {
    println!("exact E||Pi(|u|^2 u)||^2 in H^1/2, alpha = 1");
    println!("{:>5} {:>12} {:>12} {:>12}", "N", "total", "three_pair", "one_pair");
    for n in [8, 32, 128, 512] {
        let r = wick_expectation_exact(1.0, 0.5, n)?;
        let c = r.contributions;
        println!("{n:>5} {:>12.2} {:>12.2} {:>12.2}", r.exact_expectation, c.three_pair, c.one_pair);
    }

    for s in [0.5, 0.3] {
        let summary = hs_growth_curve(1.0, s, &[16, 32, 64, 128], 32, 11)?;
        println!("\nMonte Carlo, s = {s}");
        for r in &summary.rungs {
            println!("  N = {:>4}  mean {:>10.2} +- {:.2}", r.n_max, r.mean, r.std_error);
        }
    }
    Ok(())
}
