//! Fourier restriction norms of windowed free waves, the modulation region
//! split of the bilinear term, and the L⁴ Strichartz ratio.

use dispersion_lab::experiments::random_free_wave;
use dispersion_lab::xsb::{restricted_bilinear_norm, strichartz_ratio, xsb_norm, ysb_norm, zsb_norm, Region};

fn main() -> dispersion_lab::Result<()> {
    let u = random_free_wave(8, 0.0, 1.0, 5)?;
    let w = u.window();
    println!("free wave, N = 8, T = 1, {} time samples", w.samples);
    for b in [-0.5, 0.0, 0.5] {
        println!(
            "  b = {b:>4}: X {:.4}  Y {:.4}  Z {:.4}",
            xsb_norm(&u, 0.0, b),
            ysb_norm(&u, 0.0, b),
            zsb_norm(&u, 0.0, b)
        );
    }

    let (s, b) = (-0.5, -0.5);
    println!("\nbilinear Duhamel term in X^{{{s},{b}}}");
    println!("  all regions: {:.4e}", restricted_bilinear_norm(&u, s, b, None)?);
    for r in Region::ALL {
        println!("  {r:?}: {:.4e}", restricted_bilinear_norm(&u, s, b, Some(r))?);
    }

    println!("\nL4 / X^{{0,1/3}} over 20 random fields");
    for n in [8, 16] {
        let mut worst: f64 = 0.0;
        for seed in 0..20 {
            worst = worst.max(strichartz_ratio(&random_free_wave(n, 0.0, 0.05, seed)?)?);
        }
        println!("  N = {n:>2}: max ratio {worst:.3}");
    }
    Ok(())
}
