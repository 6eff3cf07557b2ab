//! Seeded Gaussian Fourier data.
//!
//! Each Gaussian `g_n` is a function of `(seed, n)` only: a ChaCha8 stream
//! keyed by the seed, with stream id `n`, yields two uniforms that go through
//! one Box–Muller transform. Real and imaginary parts are independent
//! standard normals, so `E|g_n|² = 2`. Growing the lattice therefore extends
//! a draw without touching the coefficients that were already there.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::spectral::{bracket, LatticeSpec, ModeVector, Symmetry};

/// `E|g_n|²` under the sampling law.
pub const GAUSSIAN_SECOND_MOMENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `û₀(n) = g_n / |n|^α`, `g_{-n} = conj(g_n)`, no zero mode.
    Kdv,
    /// `û₀(n) = g_n / √(1 + n^{2α})` on `n ≥ 0`.
    Szego,
}

/// The standard complex Gaussian attached to mode `n` of `seed`.
pub fn gaussian(seed: u64, n: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n);
    // 53-bit uniforms in (0, 1]
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of Monte Carlo trial `k`: `splitmix64(master ⊕ splitmix64(k))`.
pub fn trial_seed(master: u64, k: u64) -> u64 {
    splitmix64(master ^ splitmix64(k))
}

/// One realisation of the random initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDraw {
    pub seed: u64,
    pub law: Law,
    pub alpha: f64,
    /// `g_n` for `n = 0 ..= n_max`; `g_0 = 0` for the KdV law.
    pub gaussians: Vec<Complex64>,
    pub coeffs: ModeVector,
}

fn kdv_weight(n: u64, alpha: f64) -> f64 {
    (n as f64).powf(-alpha)
}

fn szego_weight(n: u64, alpha: f64) -> f64 {
    if n == 0 {
        1.0
    } else {
        1.0 / (1.0 + (n as f64).powf(2.0 * alpha)).sqrt()
    }
}

impl GaussianDraw {
    /// Builds a draw from explicit Gaussians (index `0 ..= n_max`), used for
    /// deterministic stubs and fixtures. For the KdV law `g_0` is ignored.
    pub fn from_gaussians(law: Law, alpha: f64, seed: u64, gaussians: Vec<Complex64>) -> Result<Self> {
        if gaussians.len() < 2 {
            return invalid("need Gaussians for at least n = 0, 1");
        }
        let n_max = gaussians.len() - 1;
        let nm = n_max as i64;
        let mut gaussians = gaussians;
        let coeffs = match law {
            Law::Kdv => {
                gaussians[0] = Complex64::new(0.0, 0.0);
                let lattice = LatticeSpec::new(n_max, Symmetry::RealMeanZero)?;
                let mut c = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
                for k in 1..=n_max {
                    let v = gaussians[k] * kdv_weight(k as u64, alpha);
                    c[n_max + k] = v;
                    c[n_max - k] = v.conj();
                }
                ModeVector::new(lattice, c)?
            }
            Law::Szego => {
                let lattice = LatticeSpec::new(n_max, Symmetry::AnalyticNonneg)?;
                ModeVector::from_fn(lattice, |n| {
                    if n < 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        gaussians[n as usize] * szego_weight(n as u64, alpha)
                    }
                })?
            }
        };
        debug_assert_eq!(coeffs.n_max() as i64, nm);
        Ok(Self {
            seed,
            law,
            alpha,
            gaussians,
            coeffs,
        })
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.n_max()
    }

    /// Columnar text: header `n,re,im`, one row per retained mode.
    pub fn to_columnar(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (n, c) in self.coeffs.iter() {
            let _ = writeln!(out, "{n},{:e},{:e}", c.re, c.im);
        }
        out
    }
}

/// Parses the `n,re,im` format back into a mode vector with the given class.
pub fn parse_columnar(text: &str, symmetry: Symmetry) -> Result<ModeVector> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with('n')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return invalid(format!("line {}: expected 3 fields", i + 1));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| LabError::InvalidParameter(format!("line {}: {e}", i + 1)))
        };
        let n: i64 = fields[0]
            .parse()
            .map_err(|e| LabError::InvalidParameter(format!("line {}: {e}", i + 1)))?;
        rows.push((n, Complex64::new(parse(fields[1])?, parse(fields[2])?)));
    }
    let n_max = rows.iter().map(|(n, _)| n.unsigned_abs()).max().unwrap_or(0) as usize;
    let lattice = LatticeSpec::new(n_max, symmetry)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lattice.len()];
    for (n, c) in rows {
        coeffs[(n + n_max as i64) as usize] = c;
    }
    ModeVector::new(lattice, coeffs)
}

/// Random KdV data `Σ_{n≠0} g_n |n|^{-α} e^{inx}`, real and mean zero.
pub fn sample_kdv_data(n_max: usize, alpha: f64, seed: u64) -> Result<GaussianDraw> {
    if n_max < 1 {
        return invalid("n_max must be at least 1");
    }
    let gaussians = (0..=n_max as u64)
        .map(|n| if n == 0 { Complex64::new(0.0, 0.0) } else { gaussian(seed, n) })
        .collect();
    GaussianDraw::from_gaussians(Law::Kdv, alpha, seed, gaussians)
}

/// Random Szegő data `Σ_{n≥0} g_n (1 + n^{2α})^{-1/2} e^{inx}`.
pub fn sample_szego_data(n_max: usize, alpha: f64, seed: u64) -> Result<GaussianDraw> {
    if n_max < 1 {
        return invalid("n_max must be at least 1");
    }
    let gaussians = (0..=n_max as u64).map(|n| gaussian(seed, n)).collect();
    GaussianDraw::from_gaussians(Law::Szego, alpha, seed, gaussians)
}

/// Shell average `2^{-j} Σ_{2^j ≤ n < 2^{j+1}} |g_n|²` over positive modes.
pub fn dyadic_average(draw: &GaussianDraw, j: u32) -> Result<f64> {
    let lo = 1usize << j;
    let hi = lo << 1;
    if hi > draw.n_max() {
        return Err(LabError::InvalidParameter(format!(
            "shell 2^{j} .. 2^{} exceeds n_max = {}",
            j + 1,
            draw.n_max()
        )));
    }
    let sum: f64 = draw.gaussians[lo..hi].iter().map(|g| g.norm_sqr()).sum();
    Ok(sum / lo as f64)
}

/// `sup_{n ≠ 0} ⟨n⟩^{-ε} |g_n|`.
pub fn tail_statistic(draw: &GaussianDraw, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    Ok(draw
        .gaussians
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, g)| bracket(n as i64).powf(-eps) * g.norm())
        .fold(0.0, f64::max))
}
