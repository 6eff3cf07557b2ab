//! The paired Gaussian sum behind the white-noise KdV second iterate grows
//! like (log N)².

use dispersion_lab::kdv::{paired_sum_divergence, paired_sum_expectation};
use dispersion_lab::random::trial_seed;

fn main() -> dispersion_lab::Result<()> {
    let trials = 200;
    println!("{:>6} {:>12} {:>12} {:>12}", "N", "mean", "exact", "/ (ln N)^2");
    for n in [8, 32, 128, 512, 2048] {
        let mean = (0..trials)
            .map(|k| paired_sum_divergence(n, trial_seed(0, k)))
            .sum::<dispersion_lab::Result<f64>>()?
            / trials as f64;
        let exact = paired_sum_expectation(n);
        println!("{n:>6} {mean:>12.2} {exact:>12.2} {:>12.3}", exact / (n as f64).ln().powi(2));
    }
    Ok(())
}
