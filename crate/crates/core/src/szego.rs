//! Cubic Szegő equation `i u_t = Π(|u|² u)`: trilinear term, second
//! iterate, Monte Carlo growth curves and the exact Gaussian expectation of
//! `‖Π(|u₀|² u₀)‖²_{H^s}` by Wick pairing.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::random::{sample_szego_data, trial_seed, GAUSSIAN_SECOND_MOMENT};
use crate::spectral::{bracket, fft_size, same_lattice, sobolev_norm, to_physical, ModeVector, Symmetry};
use crate::stats::{check_ladder, StatSummary};

/// Largest lattice accepted by [`wick_expectation_exact`].
pub const WICK_MAX_N: usize = 512;

fn require_analytic(u: &ModeVector) -> Result<()> {
    if u.symmetry() != Symmetry::AnalyticNonneg {
        return Err(LabError::Symmetry("Szegő operations need analytic_nonneg input".into()));
    }
    Ok(())
}

/// `Π(u₁ ū₂ u₃)` restricted to `0 ≤ n ≤ n_max`.
///
/// Formed as a pointwise product on a grid of at least `3·n_max + 1` points;
/// the product spectrum spans `[-n_max, 2 n_max]`, so nothing aliases into
/// the retained half.
pub fn szego_trilinear(u1: &ModeVector, u2: &ModeVector, u3: &ModeVector) -> Result<ModeVector> {
    same_lattice(u1, u2)?;
    same_lattice(u1, u3)?;
    for u in [u1, u2, u3] {
        require_analytic(u)?;
        u.check_finite()?;
    }
    let n_max = u1.n_max();
    let m = fft_size(3 * n_max + 1);
    let a = to_physical(u1, m)?;
    let b = to_physical(u2, m)?;
    let c = to_physical(u3, m)?;
    let mut prod: Vec<Complex64> = a
        .iter()
        .zip(&b)
        .zip(&c)
        .map(|((x, y), z)| x * y.conj() * z)
        .collect();
    crate::spectral::plan(m, false).process(&mut prod);
    let inv = 1.0 / m as f64;
    let nm = n_max as i64;
    let coeffs = (-nm..=nm)
        .map(|n| {
            if n < 0 {
                Complex64::new(0.0, 0.0)
            } else {
                prod[n as usize] * inv
            }
        })
        .collect();
    Ok(ModeVector::from_raw(u1.lattice(), coeffs))
}

/// `z(t) = u₀ − i t Π(|u₀|² u₀)`: the Duhamel integrand is constant in time
/// for the dispersionless flow.
pub fn szego_second_iterate(u0: &ModeVector, t: f64) -> Result<ModeVector> {
    let tri = szego_trilinear(u0, u0, u0)?;
    u0.add_scaled(&tri, Complex64::new(0.0, -t))
}

/// Monte Carlo growth curve of `‖Π(|u₀ᴺ|² u₀ᴺ)‖²_{H^s}` with random Szegő
/// data. Trial `k` uses seed `trial_seed(seed, k)` on every rung, so rungs
/// are truncations of one draw.
pub fn hs_growth_curve(alpha: f64, s: f64, ladder: &[usize], trials: usize, seed: u64) -> Result<StatSummary> {
    hs_growth_curve_with(s, ladder, trials, |n, k| {
        Ok(sample_szego_data(n, alpha, trial_seed(seed, k as u64))?.coeffs)
    })
}

/// [`hs_growth_curve`] with caller-supplied data `data(n_max, trial)`.
pub fn hs_growth_curve_with<F>(s: f64, ladder: &[usize], trials: usize, data: F) -> Result<StatSummary>
where
    F: Fn(usize, usize) -> Result<ModeVector> + Sync,
{
    check_ladder(ladder)?;
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let samples = ladder
        .iter()
        .map(|&n| {
            (0..trials)
                .into_par_iter()
                .map(|k| {
                    let u = data(n, k)?;
                    Ok(sobolev_norm(&szego_trilinear(&u, &u, &u)?, s).powi(2))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    StatSummary::from_rungs(ladder, &samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingClass {
    ThreePair,
    OnePair,
    NoPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingContributions {
    pub three_pair: f64,
    pub one_pair: f64,
    pub no_pair: f64,
}

impl PairingContributions {
    pub fn total(&self) -> f64 {
        self.three_pair + self.one_pair + self.no_pair
    }

    fn add(&mut self, class: PairingClass, v: f64) {
        match class {
            PairingClass::ThreePair => self.three_pair += v,
            PairingClass::OnePair => self.one_pair += v,
            PairingClass::NoPair => self.no_pair += v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WickReport {
    pub n_max: usize,
    pub alpha: f64,
    pub s: f64,
    pub exact_expectation: f64,
    pub contributions: PairingContributions,
}

/// One Wick contraction of `E[g_{n₁} ḡ_{n₂} g_{n₃} ḡ_{m₁} g_{m₂} ḡ_{m₃}]`.
///
/// Unbarred slots are `(n₁, n₃, m₂)`, barred slots `(n₂, m₁, m₃)`;
/// `partner[i]` is the barred slot contracted with unbarred slot `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Matching {
    pub partner: [usize; 3],
}

impl Matching {
    /// All `3! = 6` contractions.
    pub fn all() -> [Matching; 6] {
        [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ]
        .map(|partner| Matching { partner })
    }

    /// Number of contractions joining the `n`-side (`n₁ n₂ n₃`) to the
    /// `m`-side (`m₁ m₂ m₃`); each such contraction is a pair.
    pub fn cross_pairs(&self) -> usize {
        // unbarred: n₁, n₃ on the n-side, m₂ on the m-side
        // barred:   n₂ on the n-side, m₁, m₃ on the m-side
        const UNBARRED_N_SIDE: [bool; 3] = [true, true, false];
        const BARRED_N_SIDE: [bool; 3] = [true, false, false];
        (0..3)
            .filter(|&i| UNBARRED_N_SIDE[i] != BARRED_N_SIDE[self.partner[i]])
            .count()
    }

    pub fn class(&self) -> PairingClass {
        match self.cross_pairs() {
            3 => PairingClass::ThreePair,
            0 => PairingClass::NoPair,
            _ => PairingClass::OnePair,
        }
    }

    /// Coefficients `c` with `n = n₁ − n₂ + n₃ = Σ cᵢ vᵢ`, where `vᵢ` is the
    /// common frequency of the contraction at unbarred slot `i`.
    fn output_coefficients(&self) -> [i64; 3] {
        let mut c = [1, 1, 0];
        let n2_class = (0..3).find(|&i| self.partner[i] == 0).unwrap_or(0);
        c[n2_class] -= 1;
        c
    }
}

/// `E ‖Π(|u₀|² u₀)‖²_{H^s}` for Szegő data `g_n (1+n^{2α})^{-1/2}`, `0 ≤ n ≤ N`,
/// summed exactly over the six Wick contractions.
///
/// Each contraction ties the six frequencies into three classes `vᵢ`
/// contributing `E|g|² · W(vᵢ) = 2 / (1 + vᵢ^{2α})`; the remaining lattice
/// sum runs over all `(v₀, v₁, v₂) ∈ [0, N]³` whose output frequency lies in
/// `[0, N]`, weighted by `⟨n⟩^{2s}`. Coinciding frequencies need no special
/// treatment: the permanent expansion of complex Gaussian moments is exact.
/// No contraction can avoid joining the two copies, so the no-pair class is
/// identically zero in expectation.
pub fn wick_expectation_exact(alpha: f64, s: f64, n_max: usize) -> Result<WickReport> {
    if n_max > WICK_MAX_N {
        return invalid(format!("n_max = {n_max} exceeds the Wick guard {WICK_MAX_N}"));
    }
    let weight: Vec<f64> = (0..=n_max)
        .map(|v| {
            let w = if v == 0 { 1.0 } else { 1.0 / (1.0 + (v as f64).powf(2.0 * alpha)) };
            GAUSSIAN_SECOND_MOMENT * w
        })
        .collect();
    let sobolev: Vec<f64> = (0..=n_max).map(|n| bracket(n as i64).powf(2.0 * s)).collect();
    let total_weight: f64 = weight.iter().sum();

    let mut contributions = PairingContributions {
        three_pair: 0.0,
        one_pair: 0.0,
        no_pair: 0.0,
    };
    for matching in Matching::all() {
        let value = matching_sum(&matching, &weight, &sobolev, total_weight);
        contributions.add(matching.class(), value);
    }
    Ok(WickReport {
        n_max,
        alpha,
        s,
        exact_expectation: contributions.total(),
        contributions,
    })
}

fn matching_sum(matching: &Matching, weight: &[f64], sobolev: &[f64], total_weight: f64) -> f64 {
    let n_max = weight.len() as i64 - 1;
    let [c0, c1, c2] = matching.output_coefficients();
    let partials: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|v0| {
            let mut acc = 0.0;
            for v1 in 0..=n_max {
                let base = c0 * v0 + c1 * v1;
                let w01 = weight[v0 as usize] * weight[v1 as usize];
                let inner = if c2 == 0 {
                    if (0..=n_max).contains(&base) {
                        total_weight * sobolev[base as usize]
                    } else {
                        0.0
                    }
                } else {
                    // n = base + c2·v2 ∈ [0, N]
                    let (lo, hi) = if c2 > 0 {
                        ((-base).max(0), (n_max - base).min(n_max))
                    } else {
                        ((base - n_max).max(0), base.min(n_max))
                    };
                    let mut sum = 0.0;
                    for v2 in lo..=hi {
                        sum += weight[v2 as usize] * sobolev[(base + c2 * v2) as usize];
                    }
                    sum
                };
                acc += w01 * inner;
            }
            acc
        })
        .collect();
    partials.iter().sum()
}
