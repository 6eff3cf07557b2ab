//! Configure and run a catalog experiment from code, then write its outputs.

use dispersion_lab::experiments::{compute, list_experiments, run, ExperimentConfig};

fn main() -> dispersion_lab::Result<()> {
    for line in list_experiments() {
        println!("{line}");
    }

    let mut cfg = ExperimentConfig::parse("experiment = kdv_paired_divergence\nn_ladder = 8,16,32,64\ntrials = 100\n")?;
    cfg.set("seed", "3")?;
    let out = compute(&cfg)?;
    let s = &out.summary;
    println!("\n{} (config {})", s.experiment, s.provenance.config_hash);
    for r in &s.stats.rungs {
        println!("  N = {:>3}  mean {:.2} +- {:.2}", r.n_max, r.mean, r.std_error);
    }
    if let Some(fit) = &s.stats.fit {
        println!("  fitted growth: {:.2} ln N {:+.2}", fit.slope, fit.intercept);
    }

    let dir = std::env::temp_dir().join("dispersion-lab-example");
    cfg.set("out_dir", dir.to_str().unwrap())?;
    let (_, csv, json) = run(&cfg)?;
    println!("\nwrote {} and {}", csv.display(), json.display());
    Ok(())
}
