//! Draw random KdV and Szegő initial data and look at their statistics.

use dispersion_lab::random::{dyadic_average, sample_kdv_data, sample_szego_data, tail_statistic, trial_seed};
use dispersion_lab::spectral::{sobolev_norm, to_physical};

fn main() -> dispersion_lab::Result<()> {
    let draw = sample_kdv_data(1024, 0.0, 42)?;
    println!("white-noise KdV data, N = 1024, seed 42");
    for s in [-0.6, -0.5, -0.4] {
        println!("  H^{s:<4} norm  {:.3}", sobolev_norm(&draw.coeffs, s));
    }
    for j in [2, 5, 9] {
        println!("  dyadic average of |g_n|^2 on [2^{j}, 2^{}): {:.3}", j + 1, dyadic_average(&draw, j)?);
    }
    println!("  sup <n>^-1/2 |g_n| = {:.3}", tail_statistic(&draw, 0.5)?);

    let x = to_physical(&draw.coeffs, 4096)?;
    let max_imag = x.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    println!("  physical samples are real: max |Im| = {max_imag:.1e}");

    // Seeds for independent trials; a draw on a bigger lattice extends a smaller one.
    let seed = trial_seed(7, 3);
    let small = sample_szego_data(8, 1.0, seed)?;
    let big = sample_szego_data(64, 1.0, seed)?;
    println!("\nSzego data (alpha = 1), trial 3 of master seed 7");
    println!("  first coefficients agree across lattices: {}", small.gaussians[..] == big.gaussians[..=8]);
    print!("{}", small.to_columnar());
    Ok(())
}
