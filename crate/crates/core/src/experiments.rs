//! Named experiments: config parsing, Monte Carlo batching, CSV and JSON output.
//!
//! Every experiment produces a table of values indexed by (rung, trial). Trial
//! `k` uses seed [`trial_seed`]`(master_seed, k)` on every rung, so the rungs
//! of one trial are truncations of the same draw. Trials run on a rayon pool
//! but are collected in (rung, trial) order before any reduction, which makes
//! the output a pure function of the config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::evolve::{evolve_kdv, evolve_szego, recommended_dt, smoothing_profile, Flow, IntegratorConfig};
use crate::kdv::{
    paired_sum_divergence, paired_sum_expectation, power_law_data, second_iterate_closed_form,
    second_iterate_quadrature, truncation_gap, ScanMode,
};
use crate::random::{dyadic_average, gaussian, sample_kdv_data, sample_szego_data, tail_statistic, trial_seed};
use crate::spectral::{sobolev_norm, ModeVector};
use crate::stats::{check_ladder, log_growth_fit, median, StatSummary};
use crate::szego::{szego_trilinear, wick_expectation_exact, WICK_MAX_N};
use crate::xsb::{strichartz_ratio, SpaceTimeField, TimeWindow};

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "DISPERSION_LAB_OUT";

pub const CSV_HEADER: &str = "experiment,rung_index,n_max,alpha,s,trial,seed,value";

pub struct ExperimentInfo {
    pub name: &'static str,
    pub claim: &'static str,
    defaults: Defaults,
}

#[derive(Clone, Copy)]
struct Defaults {
    alpha: f64,
    s: f64,
    b: f64,
    ladder: &'static [usize],
    trials: usize,
    t: f64,
}

const fn defaults(alpha: f64, s: f64, ladder: &'static [usize], trials: usize, t: f64) -> Defaults {
    Defaults {
        alpha,
        s,
        b: 0.5,
        ladder,
        trials,
        t,
    }
}

pub const EXPERIMENTS: [ExperimentInfo; 10] = [
    ExperimentInfo {
        name: "kdv_paired_divergence",
        claim: "paired Gaussian sum behind the white-noise KdV second iterate diverges like (log N)^2",
        defaults: defaults(0.0, 0.0, &[8, 16, 32, 64, 128, 256, 512, 1024], 1000, 0.0),
    },
    ExperimentInfo {
        name: "kdv_l2_bound",
        claim: "KdV second iterate stays bounded in L^2 for s > -3/4 (alpha > -1/2 for random data)",
        defaults: defaults(0.0, -0.5, &[16, 32, 64, 128, 256, 512, 1024], 32, 1.0),
    },
    ExperimentInfo {
        name: "kdv_second_iterate_validate",
        claim: "closed-form KdV second iterate from the resonance identity agrees with direct quadrature",
        defaults: defaults(0.0, 0.0, &[16], 10, 0.3),
    },
    ExperimentInfo {
        name: "kdv_truncation_convergence",
        claim: "solutions from truncated random KdV data converge as the truncation grows",
        defaults: defaults(0.0, -0.75, &[8, 16, 32], 8, 0.01),
    },
    ExperimentInfo {
        name: "kdv_smoothing",
        claim: "nonlinear part of the KdV flow from white noise decays faster than the data",
        defaults: defaults(0.0, 0.0, &[256], 32, 0.01),
    },
    ExperimentInfo {
        name: "szego_growth",
        claim: "Szego second iterate diverges in H^s at s = alpha - 1/2 and stays bounded below it",
        defaults: defaults(1.0, 0.5, &[32, 64, 128, 256, 512], 64, 0.0),
    },
    ExperimentInfo {
        name: "szego_wick_crosscheck",
        claim: "exact Wick expectation of the Szego cubic term matches Monte Carlo",
        defaults: defaults(1.0, 0.5, &[8], 10_000, 0.0),
    },
    ExperimentInfo {
        name: "szego_smoothing",
        claim: "nonlinear part of the Szego flow gains no Fourier decay over the data",
        defaults: defaults(1.0, 0.0, &[256], 32, 0.01),
    },
    ExperimentInfo {
        name: "xsb_strichartz",
        claim: "L^4 space-time norm of random free KdV waves is controlled by X^{0,1/3}",
        defaults: defaults(0.0, 0.0, &[16, 32], 100, 0.05),
    },
    ExperimentInfo {
        name: "probabilistic_diagnostics",
        claim: "Gaussian tails grow at most like <n>^eps and dyadic shell averages tend to E|g|^2 = 2",
        defaults: defaults(0.0, 0.0, &[64, 128, 256, 512, 1024], 1000, 0.0),
    },
];

pub fn find_experiment(name: &str) -> Result<&'static ExperimentInfo> {
    EXPERIMENTS
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| LabError::UnknownExperiment(name.to_string()))
}

/// One `name: claim` line per registered experiment, in registry order.
pub fn list_experiments() -> Vec<String> {
    EXPERIMENTS.iter().map(|e| format!("{}: {}", e.name, e.claim)).collect()
}

/// Raw configuration; unset keys fall back to the experiment's defaults.
///
/// File format: `key = value` lines, `#` starts a comment. Keys: `experiment`,
/// `alpha`, `s`, `b`, `n_ladder` (comma or space separated), `trials`,
/// `master_seed` (alias `seed`), `t`, `dt`, `quad_steps` (default 2048),
/// `n_ref` (default twice the largest rung), `eps` (default 0.5), `mode`
/// (`random` or `deterministic`), `out_dir`, `threads` (0 = all cores).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub b: Option<f64>,
    pub n_ladder: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub master_seed: u64,
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub quad_steps: Option<usize>,
    pub n_ref: Option<usize>,
    pub eps: Option<f64>,
    pub mode: Option<ScanMode>,
    pub out_dir: Option<PathBuf>,
    pub threads: usize,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| LabError::Config(format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = value.to_string(),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "s" => self.s = Some(parse_value(key, value)?),
            "b" => self.b = Some(parse_value(key, value)?),
            "n_ladder" => {
                self.n_ladder = Some(
                    value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|p| !p.is_empty())
                        .map(|p| parse_value(key, p))
                        .collect::<Result<_>>()?,
                )
            }
            "trials" => self.trials = Some(parse_value(key, value)?),
            "master_seed" | "seed" => self.master_seed = parse_value(key, value)?,
            "t" => self.t = Some(parse_value(key, value)?),
            "dt" => self.dt = Some(parse_value(key, value)?),
            "quad_steps" => self.quad_steps = Some(parse_value(key, value)?),
            "n_ref" => self.n_ref = Some(parse_value(key, value)?),
            "eps" => self.eps = Some(parse_value(key, value)?),
            "mode" => {
                self.mode = Some(match value {
                    "random" => ScanMode::Random,
                    "deterministic" => ScanMode::Deterministic,
                    _ => return Err(LabError::Config(format!("mode must be random or deterministic, got `{value}`"))),
                })
            }
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "threads" => self.threads = parse_value(key, value)?,
            _ => return Err(LabError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies the experiment defaults and validates ranges.
    pub fn resolve(&self) -> Result<Params> {
        let info = find_experiment(&self.experiment)?;
        let d = info.defaults;
        let ladder = self.n_ladder.clone().unwrap_or_else(|| d.ladder.to_vec());
        check_ladder(&ladder)?;
        let p = Params {
            experiment: info.name.to_string(),
            alpha: self.alpha.unwrap_or(d.alpha),
            s: self.s.unwrap_or(d.s),
            b: self.b.unwrap_or(d.b),
            trials: self.trials.unwrap_or(d.trials),
            master_seed: self.master_seed,
            t: self.t.unwrap_or(d.t),
            dt: self.dt,
            quad_steps: self.quad_steps.unwrap_or(2048),
            n_ref: self.n_ref.unwrap_or(2 * ladder[ladder.len() - 1]),
            eps: self.eps.unwrap_or(0.5),
            mode: self.mode.unwrap_or(ScanMode::Random),
            n_ladder: ladder,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Fully resolved parameters; these, and nothing else, determine the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub experiment: String,
    pub alpha: f64,
    pub s: f64,
    pub b: f64,
    pub n_ladder: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub t: f64,
    pub dt: Option<f64>,
    pub quad_steps: usize,
    pub n_ref: usize,
    pub eps: f64,
    pub mode: ScanMode,
}

impl Params {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("s", self.s), ("b", self.b), ("t", self.t), ("eps", self.eps)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.t < 0.0 {
            return bad("t must be nonnegative".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return bad("dt must be positive".into());
            }
        }
        let top = self.n_ladder[self.n_ladder.len() - 1];
        match self.experiment.as_str() {
            "kdv_second_iterate_validate" if self.quad_steps < 2 || self.quad_steps % 2 == 1 => {
                bad("quad_steps must be even and at least 2".into())
            }
            "kdv_truncation_convergence" if self.n_ref < top => bad(format!("n_ref = {} is below the ladder", self.n_ref)),
            "kdv_smoothing" | "szego_smoothing" | "kdv_truncation_convergence" if self.t <= 0.0 => {
                bad("evolution experiments need t > 0".into())
            }
            "kdv_smoothing" | "szego_smoothing" if self.n_ladder[0] < 16 => {
                bad("decay fits need n_max >= 16".into())
            }
            "xsb_strichartz" if self.t <= 0.0 => bad("xsb_strichartz needs a window t > 0".into()),
            "xsb_strichartz" if top > 64 => bad("xsb_strichartz supports n_max <= 64".into()),
            "probabilistic_diagnostics" if self.eps <= 0.0 => bad("eps must be positive".into()),
            "probabilistic_diagnostics" if self.n_ladder[0] < 2 => bad("shell averages need n_max >= 2".into()),
            _ => Ok(()),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        let digest = format!("{:x}", Sha256::digest(json.as_bytes()));
        digest[..16].to_string()
    }

    fn seed(&self, k: usize) -> u64 {
        trial_seed(self.master_seed, k as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub provenance: Provenance,
    pub params: Params,
    pub stats: StatSummary,
    /// Experiment-specific scalars (exact values, fitted constants, checks as 0/1).
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    /// `values[rung][trial]`.
    pub values: Vec<Vec<f64>>,
    pub csv: String,
}

/// Resolves, computes and writes `<out_dir>/<experiment>.csv` and `.json`.
pub fn run(config: &ExperimentConfig) -> Result<(RunOutput, PathBuf, PathBuf)> {
    let out = compute(config)?;
    let dir = config.out_dir();
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}.csv", out.summary.experiment));
    let json_path = dir.join(format!("{}.json", out.summary.experiment));
    fs::write(&csv_path, &out.csv)?;
    fs::write(&json_path, serde_json::to_string_pretty(&out.summary)?)?;
    Ok((out, csv_path, json_path))
}

/// Runs the experiment without touching the file system.
pub fn compute(config: &ExperimentConfig) -> Result<RunOutput> {
    let params = config.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute(&params))
}

fn execute(p: &Params) -> Result<RunOutput> {
    let mut metrics = BTreeMap::new();
    let values = match p.experiment.as_str() {
        "kdv_paired_divergence" => paired_divergence(p, &mut metrics)?,
        "kdv_l2_bound" => l2_bound(p)?,
        "kdv_second_iterate_validate" => second_iterate_validate(p, &mut metrics)?,
        "kdv_truncation_convergence" => truncation(p, &mut metrics)?,
        "kdv_smoothing" => smoothing(p, Flow::Kdv, &mut metrics)?,
        "szego_growth" => szego_growth(p, &mut metrics)?,
        "szego_wick_crosscheck" => wick_crosscheck(p, &mut metrics)?,
        "szego_smoothing" => smoothing(p, Flow::Szego, &mut metrics)?,
        "xsb_strichartz" => strichartz(p, &mut metrics)?,
        "probabilistic_diagnostics" => diagnostics(p, &mut metrics)?,
        other => return Err(LabError::UnknownExperiment(other.to_string())),
    };
    let stats = StatSummary::from_rungs(&p.n_ladder, &values)?;
    let csv = render_csv(p, &values);
    Ok(RunOutput {
        summary: RunSummary {
            experiment: p.experiment.clone(),
            provenance: Provenance {
                config_hash: p.hash(),
                master_seed: p.master_seed,
            },
            params: p.clone(),
            stats,
            metrics,
        },
        values,
        csv,
    })
}

fn render_csv(p: &Params, values: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(64 * values.len() * p.trials + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (r, row) in values.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.experiment,
                r,
                p.n_ladder[r],
                p.alpha,
                p.s,
                k,
                p.seed(k),
                v
            );
        }
    }
    out
}

/// Evaluates `f(n_max, trial, seed)` over every (rung, trial), in parallel,
/// returned in rung-major, trial-minor order.
fn table<T, F>(p: &Params, f: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(usize, usize, u64) -> Result<T> + Sync,
{
    let k = p.trials;
    let flat: Vec<T> = (0..p.n_ladder.len() * k)
        .into_par_iter()
        .map(|i| {
            let (r, trial) = (i / k, i % k);
            f(p.n_ladder[r], trial, p.seed(trial)).map_err(|e| LabError::Trial {
                trial,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(p.n_ladder.len());
    let mut it = flat.into_iter();
    for _ in 0..p.n_ladder.len() {
        rows.push(it.by_ref().take(k).collect());
    }
    Ok(rows)
}

/// Fraction of trials whose values strictly increase (or decrease) along the ladder.
fn monotone_fraction(values: &[Vec<f64>], increasing: bool) -> f64 {
    let trials = values[0].len();
    let ok = (0..trials)
        .filter(|&k| {
            values.windows(2).all(|w| {
                if increasing {
                    w[1][k] > w[0][k]
                } else {
                    w[1][k] < w[0][k]
                }
            })
        })
        .count();
    ok as f64 / trials as f64
}

fn paired_divergence(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let values = table(p, |n, _, seed| paired_sum_divergence(n, seed))?;
    for &n in &p.n_ladder {
        m.insert(format!("exact_mean_{n}"), paired_sum_expectation(n));
    }
    if values.len() > 1 {
        m.insert("monotone_fraction".into(), monotone_fraction(&values, true));
    }
    Ok(values)
}

fn l2_bound(p: &Params) -> Result<Vec<Vec<f64>>> {
    table(p, |n, _, seed| {
        let u0 = match p.mode {
            ScanMode::Deterministic => power_law_data(n, p.s)?,
            ScanMode::Random => sample_kdv_data(n, p.s + 0.5, seed)?.coeffs,
        };
        Ok(sobolev_norm(&second_iterate_closed_form(&u0, p.t)?, 0.0))
    })
}

fn relative_l2(a: &ModeVector, b: &ModeVector) -> Result<f64> {
    let denom = sobolev_norm(a, 0.0);
    let diff = sobolev_norm(&a.sub(b)?, 0.0);
    Ok(if denom == 0.0 { diff } else { diff / denom })
}

fn second_iterate_validate(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let pairs = table(p, |n, _, seed| {
        let u0 = sample_kdv_data(n, p.alpha, seed)?.coeffs;
        let exact = second_iterate_closed_form(&u0, p.t)?;
        let coarse = relative_l2(&exact, &second_iterate_quadrature(&u0, p.t, p.quad_steps)?)?;
        let fine = relative_l2(&exact, &second_iterate_quadrature(&u0, p.t, 2 * p.quad_steps)?)?;
        Ok((coarse, fine))
    })?;
    let coarse: Vec<Vec<f64>> = pairs.iter().map(|r| r.iter().map(|x| x.0).collect()).collect();
    let max = coarse.iter().flatten().copied().fold(0.0, f64::max);
    let ratios: Vec<f64> = pairs.iter().flatten().filter(|x| x.1 > 0.0).map(|x| x.0 / x.1).collect();
    m.insert("max_rel_err".into(), max);
    if !ratios.is_empty() {
        m.insert("median_refinement_ratio".into(), median(&ratios));
    }
    Ok(coarse)
}

fn kdv_config(dt: f64, t: f64) -> IntegratorConfig {
    let cfg = IntegratorConfig::kdv(dt, t);
    let every = (cfg.steps() / 20).max(1);
    cfg.recording_every(every)
}

fn truncation(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let values = table(p, |n, _, seed| {
        let big = sample_kdv_data(p.n_ref, p.alpha, seed)?.coeffs;
        let small = sample_kdv_data(n, p.alpha, seed)?.coeffs.resize(p.n_ref)?;
        let dt = p.dt.unwrap_or_else(|| recommended_dt(&big, Flow::Kdv).min(recommended_dt(&small, Flow::Kdv)));
        truncation_gap(&big, &small, p.s, &kdv_config(dt, p.t))
    })?;
    m.insert("n_ref".into(), p.n_ref as f64);
    if values.len() > 1 {
        m.insert("monotone_fraction".into(), monotone_fraction(&values, false));
    }
    Ok(values)
}

/// Decay exponents `(p_lin, p_nl)` of one smoothing trial.
pub fn smoothing_trial(flow: Flow, n_max: usize, alpha: f64, t: f64, dt: Option<f64>, seed: u64) -> Result<(f64, f64)> {
    let traj = match flow {
        Flow::Kdv => {
            let u0 = sample_kdv_data(n_max, alpha, seed)?.coeffs;
            let dt = dt.unwrap_or_else(|| recommended_dt(&u0, flow));
            evolve_kdv(&u0, &IntegratorConfig::kdv(dt, t).recording_every(usize::MAX))?
        }
        Flow::Szego => {
            let u0 = sample_szego_data(n_max, alpha, seed)?.coeffs;
            let dt = dt.unwrap_or_else(|| recommended_dt(&u0, flow));
            evolve_szego(&u0, &IntegratorConfig::szego(dt, t).recording_every(usize::MAX))?
        }
    };
    smoothing_profile(&traj, t, flow)
}

fn smoothing(p: &Params, flow: Flow, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let pairs = table(p, |n, _, seed| smoothing_trial(flow, n, p.alpha, p.t, p.dt, seed))?;
    for (r, row) in pairs.iter().enumerate() {
        let n = p.n_ladder[r];
        let lin: Vec<f64> = row.iter().map(|x| x.0).collect();
        let nl: Vec<f64> = row.iter().map(|x| x.1).collect();
        let gap: Vec<f64> = row.iter().map(|x| x.1 - x.0).collect();
        m.insert(format!("median_p_lin_{n}"), median(&lin));
        m.insert(format!("median_p_nl_{n}"), median(&nl));
        m.insert(format!("median_gap_{n}"), median(&gap));
    }
    Ok(pairs.iter().map(|r| r.iter().map(|x| x.1 - x.0).collect()).collect())
}

fn szego_growth(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let values = table(p, |n, _, seed| {
        let u = sample_szego_data(n, p.alpha, seed)?.coeffs;
        Ok(sobolev_norm(&szego_trilinear(&u, &u, &u)?, p.s).powi(2))
    })?;
    let exact_rungs: Vec<usize> = p.n_ladder.iter().copied().filter(|&n| n <= WICK_MAX_N).collect();
    let mut exact = Vec::with_capacity(exact_rungs.len());
    for &n in &exact_rungs {
        let e = wick_expectation_exact(p.alpha, p.s, n)?.exact_expectation;
        m.insert(format!("exact_{n}"), e);
        exact.push(e);
    }
    if exact.len() >= 3 {
        let ns: Vec<f64> = exact_rungs.iter().map(|&n| n as f64).collect();
        let fit = log_growth_fit(&ns, &exact)?;
        m.insert("log_fit_c".into(), fit.c);
        m.insert("log_fit_d".into(), fit.d);
        m.insert("log_fit_e".into(), fit.e);
        m.insert("log_fit_residual".into(), fit.residual);
    }
    if exact.len() >= 2 {
        let k = exact.len();
        m.insert("exact_last_ratio".into(), exact[k - 1] / exact[k - 2]);
    }
    Ok(values)
}

fn wick_crosscheck(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let values = table(p, |n, _, seed| {
        let u = sample_szego_data(n, p.alpha, seed)?.coeffs;
        Ok(sobolev_norm(&szego_trilinear(&u, &u, &u)?, p.s).powi(2))
    })?;
    for (r, row) in values.iter().enumerate() {
        let n = p.n_ladder[r];
        if n > WICK_MAX_N {
            continue;
        }
        let exact = wick_expectation_exact(p.alpha, p.s, n)?.exact_expectation;
        let (mean, se) = mean_and_se(row);
        m.insert(format!("exact_{n}"), exact);
        m.insert(format!("mc_mean_{n}"), mean);
        m.insert(format!("std_error_{n}"), se);
        m.insert(format!("consistent_{n}"), ((mean - exact).abs() < 3.0 * se) as u8 as f64);
    }
    Ok(values)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// `|g₀|⁶` for `seed`: the degenerate one-mode Szegő cubic energy.
pub fn zero_mode_sextic(seed: u64) -> f64 {
    gaussian(seed, 0).norm_sqr().powi(3)
}

/// Windowed free KdV wave from random data on the lattice's minimal window.
pub fn random_free_wave(n_max: usize, alpha: f64, half_width: f64, seed: u64) -> Result<SpaceTimeField> {
    let u0 = sample_kdv_data(n_max, alpha, seed)?.coeffs;
    let window = TimeWindow::for_lattice(half_width, n_max, 1)?;
    SpaceTimeField::free_solution(&u0, window, half_width)
}

fn strichartz(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let values = table(p, |n, _, seed| strichartz_ratio(&random_free_wave(n, p.alpha, p.t, seed)?))?;
    let maxima: Vec<f64> = values.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    for (r, mx) in maxima.iter().enumerate() {
        m.insert(format!("max_ratio_{}", p.n_ladder[r]), *mx);
    }
    if maxima.len() >= 2 {
        let k = maxima.len();
        m.insert("max_ratio_growth".into(), maxima[k - 1] / maxima[k - 2]);
    }
    // one windowed plane wave e^{i(x + t)} as a baseline
    let plane = ModeVector::delta(1, 1, Complex64::new(1.0, 0.0))?;
    let window = TimeWindow::for_lattice(p.t, 1, 1)?;
    m.insert(
        "plane_wave_ratio".into(),
        strichartz_ratio(&SpaceTimeField::free_solution(&plane, window, p.t)?)?,
    );
    Ok(values)
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

fn diagnostics(p: &Params, m: &mut BTreeMap<String, f64>) -> Result<Vec<Vec<f64>>> {
    let pairs = table(p, |n, _, seed| {
        let draw = sample_kdv_data(n, p.alpha, seed)?;
        // top complete shell [2^j, 2^{j+1}) inside the lattice
        let j = (usize::BITS - 1 - n.leading_zeros()) - 1;
        Ok((tail_statistic(&draw, p.eps)?, dyadic_average(&draw, j)?))
    })?;
    let mut p99 = Vec::new();
    for (r, row) in pairs.iter().enumerate() {
        let n = p.n_ladder[r];
        let tails: Vec<f64> = row.iter().map(|x| x.0).collect();
        let shells: Vec<f64> = row.iter().map(|x| x.1).collect();
        let q = percentile(&tails, 0.99);
        p99.push(q);
        m.insert(format!("tail_p99_{n}"), q);
        m.insert(format!("shell_mean_{n}"), shells.iter().sum::<f64>() / shells.len() as f64);
    }
    if p99.len() >= 2 {
        let k = p99.len();
        let doubling = p.n_ladder[k - 1] as f64 / p.n_ladder[k - 2] as f64;
        m.insert("tail_p99_growth".into(), p99[k - 1] / p99[k - 2]);
        m.insert("tail_growth_bound".into(), doubling.powf(p.eps));
    }
    Ok(pairs.iter().map(|r| r.iter().map(|x| x.0).collect()).collect())
}
