//! KdV on the circle: linear propagator, quadratic nonlinearity, the second
//! iterate of the Duhamel formulation, and the scans built on them.
//!
//! With `S(t) = e^{-t∂ₓ³}` mode `n` evolves by `e^{i n³ t}`, and the Duhamel
//! bilinear term is `N(u₁,u₂)(t) = -½ ∫₀ᵗ S(t-t') ∂ₓ(u₁u₂)(t') dt'`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::evolve::{evolve_kdv, IntegratorConfig};
use crate::random::{sample_kdv_data, GaussianDraw};
use crate::spectral::{convolve, derivative, remove_mean, sobolev_norm, ModeVector, Symmetry};
use crate::stats::{check_ladder, StatSummary};

/// Positive root of `a² + (5/3) a − 1 = 0`.
pub fn a0() -> f64 {
    -5.0 / 6.0 + 61f64.sqrt() / 6.0
}

/// `α₀ = a₀ − 1/2`.
pub fn alpha0() -> f64 {
    a0() - 0.5
}

/// `s₀ = −11/6 + √61/6`.
pub fn s0() -> f64 {
    -11.0 / 6.0 + 61f64.sqrt() / 6.0
}

/// `n³ − n₁³ − n₂³` for `n = n₁ + n₂`, in exact integer arithmetic.
pub fn resonance_phase(n1: i64, n2: i64) -> i128 {
    let (a, b) = (n1 as i128, n2 as i128);
    let n = a + b;
    n * n * n - a * a * a - b * b * b
}

/// `3 n n₁ n₂`, the factored form of [`resonance_phase`].
pub fn resonance_factored(n1: i64, n2: i64) -> i128 {
    let (a, b) = (n1 as i128, n2 as i128);
    3 * (a + b) * a * b
}

/// `n³ − n₂³ − n₃³ − n₄³` for `n = n₂ + n₃ + n₄`.
pub fn cubic_phase(n2: i64, n3: i64, n4: i64) -> i128 {
    let (a, b, c) = (n2 as i128, n3 as i128, n4 as i128);
    let n = a + b + c;
    n * n * n - a * a * a - b * b * b - c * c * c
}

/// `3 (n₂+n₃)(n₃+n₄)(n₄+n₂)`, the factored form of [`cubic_phase`].
pub fn cubic_factored(n2: i64, n3: i64, n4: i64) -> i128 {
    let (a, b, c) = (n2 as i128, n3 as i128, n4 as i128);
    3 * (a + b) * (b + c) * (c + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdvConstants {
    pub a0: f64,
    pub alpha0: f64,
    pub s0: f64,
    pub delta: f64,
    pub a: f64,
}

impl KdvConstants {
    /// `a` must lie in `(a₀, 1/2)`; `δ = 1/2 − a`.
    pub fn new(a: f64) -> Result<Self> {
        let a0 = a0();
        if !(a > a0 && a < 0.5) {
            return invalid(format!("a = {a} must lie in ({a0}, 1/2)"));
        }
        Ok(Self {
            a0,
            alpha0: alpha0(),
            s0: s0(),
            delta: 0.5 - a,
            a,
        })
    }
}

fn require_mean_zero(u: &ModeVector) -> Result<()> {
    if u.symmetry() != Symmetry::RealMeanZero {
        return Err(LabError::Symmetry(
            "KdV operations need real_mean_zero input (mean-zero reduction)".into(),
        ));
    }
    Ok(())
}

/// `S(t)u₀`: multiplies mode `n` by `e^{i n³ t}`.
pub fn linear_flow(u0: &ModeVector, t: f64) -> Result<ModeVector> {
    u0.check_finite()?;
    if !t.is_finite() {
        return invalid("t must be finite");
    }
    let nm = u0.n_max();
    let mut c = u0.coeffs().to_vec();
    for k in 1..=nm {
        let z = Complex64::from_polar(1.0, (k as f64).powi(3) * t);
        c[nm + k] *= z;
        c[nm - k] *= z.conj();
    }
    ModeVector::new(u0.lattice(), c)
}

/// `−½ ∂ₓ(u²)` with the zero mode removed.
pub fn kdv_nonlinearity(u: &ModeVector) -> Result<ModeVector> {
    require_mean_zero(u)?;
    let sq = convolve(u, u)?;
    let d = derivative(&sq)?.scale(Complex64::new(-0.5, 0.0));
    remove_mean(&d).with_symmetry(Symmetry::RealMeanZero)
}

/// `∂ₓ⁻¹` on mean-zero data: mode `n` divided by `i n`.
fn antiderivative(u: &ModeVector) -> Result<ModeVector> {
    let w = u.map_modes(|n, c| {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / Complex64::new(0.0, n as f64)
        }
    });
    w.with_symmetry(Symmetry::RealMeanZero)
}

/// Nonlinear part `N(S(·)u₀, S(·)u₀)(t)` of the second iterate, exactly.
///
/// Integrating the triad phase with `n³ − n₁³ − n₂³ = 3 n n₁ n₂` gives
///
/// ```text
/// N(n) = −e^{i n³ t} Σ_{n₁+n₂=n} û₀(n₁) û₀(n₂) (1 − e^{−3i n n₁ n₂ t}) / (6 n₁ n₂)
/// ```
///
/// and since `1/(n₁n₂)` factors, both sums are convolutions of
/// `w = ∂ₓ⁻¹u₀`: `N = (S(t)(w²) − (S(t)w)²) / 6`, mean removed. Mean-zero
/// data keeps `n₁ n₂ ≠ 0`, and the derivative kills `n = 0`, so no resonant
/// branch exists.
pub fn second_iterate_closed_form(u0: &ModeVector, t: f64) -> Result<ModeVector> {
    require_mean_zero(u0)?;
    let w = antiderivative(u0)?;
    let ww = convolve(&w, &w)?;
    let sw = linear_flow(&w, t)?;
    let swsw = convolve(&sw, &sw)?;
    let diff = linear_flow(&ww, t)?.sub(&swsw)?;
    remove_mean(&diff.scale(Complex64::new(1.0 / 6.0, 0.0))).with_symmetry(Symmetry::RealMeanZero)
}

/// Composite Simpson evaluation of `−½ ∫₀ᵗ S(t−t') ∂ₓ((S(t')u₀)²) dt'`.
/// `steps` must be even and at least 2.
pub fn second_iterate_quadrature(u0: &ModeVector, t: f64, steps: usize) -> Result<ModeVector> {
    require_mean_zero(u0)?;
    if steps < 2 {
        return invalid("Simpson quadrature needs at least 2 steps");
    }
    if steps % 2 != 0 {
        return invalid("Simpson quadrature needs an even number of steps");
    }
    let h = t / steps as f64;
    let mut acc = ModeVector::zeros(u0.lattice());
    for k in 0..=steps {
        let tk = h * k as f64;
        let weight = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let integrand = linear_flow(&kdv_nonlinearity(&linear_flow(u0, tk)?)?, t - tk)?;
        acc = acc.add_scaled(&integrand, Complex64::new(weight, 0.0))?;
    }
    acc.scale(Complex64::new(h / 3.0, 0.0))
        .with_symmetry(Symmetry::RealMeanZero)
}

/// `D_N = (Σ_{0<|n|≤N} |g_n|²/|n|)²` for the draw's Gaussians.
pub fn paired_sum_from_draw(draw: &GaussianDraw) -> f64 {
    let half: f64 = draw
        .gaussians
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, g)| g.norm_sqr() / n as f64)
        .sum();
    let full = 2.0 * half;
    full * full
}

/// `E[D_N] = 16 (H_N² + H_N⁽²⁾)` with `H_N⁽²⁾ = Σ 1/n²`: `|g_n|²` is
/// exponential with mean 2 and variance 4.
pub fn paired_sum_expectation(n_max: usize) -> f64 {
    let h: f64 = (1..=n_max).map(|n| 1.0 / n as f64).sum();
    let h2: f64 = (1..=n_max).map(|n| 1.0 / (n * n) as f64).sum();
    16.0 * (h * h + h2)
}

pub fn paired_sum_divergence(n_max: usize, seed: u64) -> Result<f64> {
    Ok(paired_sum_from_draw(&sample_kdv_data(n_max, 0.0, seed)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// `û₀(n) = |n|^s` on `1 ≤ |n| ≤ N`.
    Deterministic,
    /// Random data with `α = s + 1/2`.
    Random,
}

/// `û₀(n) = |n|^s` for `1 ≤ |n| ≤ n_max`: the scale-borderline
/// representative of `H^s`, logarithms ignored.
pub fn power_law_data(n_max: usize, s: f64) -> Result<ModeVector> {
    let lattice = crate::spectral::LatticeSpec::new(n_max, Symmetry::RealMeanZero)?;
    ModeVector::from_fn(lattice, |n| {
        if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((n.unsigned_abs() as f64).powf(s), 0.0)
        }
    })
}

/// `‖N(S(·)u₀ᴺ, S(·)u₀ᴺ)(t)‖_{L²}` per rung for arbitrary data.
/// `data(n_max, trial)` supplies the initial data of each rung and trial.
pub fn second_iterate_l2_ladder<F>(ladder: &[usize], t: f64, trials: usize, data: F) -> Result<StatSummary>
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
                .map(|k| Ok(sobolev_norm(&second_iterate_closed_form(&data(n, k)?, t)?, 0.0)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    StatSummary::from_rungs(ladder, &samples)
}

/// Boundedness scan of the second iterate in `L²`.
pub fn l2_bound_scan(s: f64, ladder: &[usize], t: f64, mode: ScanMode, seeds: &[u64]) -> Result<StatSummary> {
    match mode {
        ScanMode::Deterministic => second_iterate_l2_ladder(ladder, t, 1, |n, _| power_law_data(n, s)),
        ScanMode::Random => {
            if seeds.is_empty() {
                return invalid("random scan needs at least one seed");
            }
            second_iterate_l2_ladder(ladder, t, seeds.len(), |n, k| {
                Ok(sample_kdv_data(n, s + 0.5, seeds[k])?.coeffs)
            })
        }
    }
}

/// `sup_{t ∈ [0,T]} ‖uᴺ(t) − uᴹ(t)‖_{H^{s_meas}}` for solutions started from
/// the `N`- and `M`-truncations of one random draw, both resolved on the
/// `N` lattice with the same integrator settings.
pub fn truncation_convergence(
    alpha: f64,
    s_meas: f64,
    n: usize,
    m: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if m > n {
        return invalid("truncation M must not exceed N");
    }
    let big = sample_kdv_data(n, alpha, seed)?.coeffs;
    let small = sample_kdv_data(m, alpha, seed)?.coeffs.resize(n)?;
    truncation_gap(&big, &small, s_meas, cfg)
}

/// Shared core of [`truncation_convergence`] for explicit data.
pub fn truncation_gap(big: &ModeVector, small: &ModeVector, s_meas: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let a = evolve_kdv(big, cfg)?;
    let b = evolve_kdv(small, cfg)?;
    let mut sup = 0.0f64;
    for (ua, ub) in a.states.iter().zip(&b.states) {
        sup = sup.max(sobolev_norm(&ua.sub(ub)?, s_meas));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::LatticeSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constants_relations() {
        let a = a0();
        assert!((a * a + 5.0 / 3.0 * a - 1.0).abs() < 1e-15);
        assert!((s0() - (alpha0() - 0.5)).abs() < 1e-15);
        let k = KdvConstants::new(0.49).unwrap();
        assert!((k.delta - 0.01).abs() < 1e-15);
        assert!(KdvConstants::new(0.4).is_err());
        assert!(KdvConstants::new(0.5).is_err());
    }

    #[test]
    fn linear_flow_phase() {
        let lat = LatticeSpec::new(3, Symmetry::General).unwrap();
        let u = ModeVector::from_fn(lat, |n| if n == 2 { c(1., 0.) } else { c(0., 0.) }).unwrap();
        let v = linear_flow(&u, std::f64::consts::PI / 8.0).unwrap();
        assert!((v.get(2) - c(-1., 0.)).norm() < 1e-15);
        assert_eq!(linear_flow(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn nonlinearity_of_two_cos() {
        let lat = LatticeSpec::new(4, Symmetry::RealMeanZero).unwrap();
        let u = ModeVector::from_fn(lat, |n| if n.abs() == 1 { c(1., 0.) } else { c(0., 0.) }).unwrap();
        let f = kdv_nonlinearity(&u).unwrap();
        assert_eq!(f.get(2), c(0., -1.));
        assert_eq!(f.get(-2), c(0., 1.));
        assert_eq!(f.get(0), c(0., 0.));
        assert!(f.iter().filter(|(n, _)| n.abs() != 2).all(|(_, v)| v == c(0., 0.)));
    }

    #[test]
    fn mean_zero_required() {
        let u = ModeVector::delta(4, 1, c(1., 0.)).unwrap();
        assert!(kdv_nonlinearity(&u).is_err());
        assert!(second_iterate_closed_form(&u, 0.1).is_err());
        assert!(second_iterate_quadrature(&u, 0.1, 4).is_err());
    }

    #[test]
    fn closed_form_trivial_cases() {
        let u0 = sample_kdv_data(8, 0.0, 3).unwrap().coeffs;
        assert!(second_iterate_closed_form(&u0, 0.0).unwrap().is_zero());
        let z = ModeVector::zeros(u0.lattice());
        assert!(second_iterate_closed_form(&z, 0.7).unwrap().is_zero());
        assert!(second_iterate_quadrature(&z, 0.7, 8).unwrap().is_zero());
        assert!(second_iterate_quadrature(&u0, 0.0, 8).unwrap().is_zero());
    }

    #[test]
    fn quadrature_step_guard() {
        let u0 = sample_kdv_data(4, 0.0, 3).unwrap().coeffs;
        assert!(second_iterate_quadrature(&u0, 0.1, 1).is_err());
        assert!(second_iterate_quadrature(&u0, 0.1, 3).is_err());
    }

    #[test]
    fn stubbed_paired_sum() {
        let g = vec![c(1., 1.); 9];
        let d = GaussianDraw::from_gaussians(crate::random::Law::Kdv, 0.0, 0, g).unwrap();
        let h: f64 = (1..=8).map(|n| 1.0 / n as f64).sum();
        assert_eq!(paired_sum_from_draw(&d), (4.0 * h) * (4.0 * h));
    }

    #[test]
    fn zero_data_scan() {
        let summary = second_iterate_l2_ladder(&[4, 8], 1.0, 2, |n, _| {
            Ok(ModeVector::zeros(LatticeSpec::new(n, Symmetry::RealMeanZero)?))
        })
        .unwrap();
        assert!(summary.means().iter().all(|&m| m == 0.0));
        assert!(l2_bound_scan(-0.5, &[], 1.0, ScanMode::Deterministic, &[]).is_err());
    }
}
