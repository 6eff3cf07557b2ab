//! Discrete Bourgain-space calculus on space-time lattices.
//!
//! A [`SpaceTimeField`] holds mode coefficients `u(n, t_k)` on the uniform
//! grid `t_k = −2T + kΔt`, `Δt = 4T/m_t`. The time transform is
//! `û(n, τ_j) = Δt Σ_k u(n, t_k) e^{−iτ_j t_k}` on the dual grid
//! `τ_j = 2πj/(m_t Δt)`, `j ∈ [−m_t/2, m_t/2)`, and every τ-integral uses the
//! measure `dτ/2π`, discretised as `Δτ/2π = 1/(m_t Δt)`. With that choice
//! `‖u‖_{X^{0,0}}` equals the discrete `ℓ²_n L²_t` norm exactly.
//!
//! All values are grid-dependent estimators. The `n³` phases force
//! `m_t ≥ 4 T n_max³ / π` (the Nyquist frequency must exceed `n_max³`),
//! which caps practical lattices at `n_max ≈ 24–32`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::spectral::{bracket, fft_size, plan, LatticeSpec, ModeVector, Symmetry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub half_width: f64,
    pub samples: usize,
}

impl TimeWindow {
    pub fn new(half_width: f64, samples: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return invalid("window half-width T must be positive");
        }
        if samples < 16 || !samples.is_power_of_two() {
            return invalid(format!("m_t = {samples} must be a power of two >= 16"));
        }
        Ok(Self { half_width, samples })
    }

    /// Smallest admissible power of two for `n_max`, times `refine`.
    pub fn for_lattice(half_width: f64, n_max: usize, refine: usize) -> Result<Self> {
        let need = nyquist_samples(half_width, n_max).max(16);
        Self::new(half_width, need.next_power_of_two() * refine.max(1).next_power_of_two())
    }

    pub fn dt(&self) -> f64 {
        4.0 * self.half_width / self.samples as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        -2.0 * self.half_width + k as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.time(k)).collect()
    }

    /// Signed dual-grid index of FFT bin `j`.
    fn signed(&self, j: usize) -> i64 {
        let m = self.samples as i64;
        let j = j as i64;
        if j < m / 2 {
            j
        } else {
            j - m
        }
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / (self.samples as f64 * self.dt())
    }

    /// `τ` of FFT bin `j`.
    pub fn tau(&self, j: usize) -> f64 {
        self.signed(j) as f64 * self.dtau()
    }

    /// `Δτ / 2π`.
    fn measure(&self) -> f64 {
        1.0 / (self.samples as f64 * self.dt())
    }
}

/// `⌈4 T n³ / π⌉`.
pub fn nyquist_samples(half_width: f64, n_max: usize) -> usize {
    (4.0 * half_width * (n_max as f64).powi(3) / PI).ceil() as usize
}

/// Smooth bump with `η = 1` on `[−1, 1]`, `η = 0` off `(−2, 2)` and, for
/// `1 < |x| < 2` with `y = |x| − 1`, `η = f(1−y) / (f(1−y) + f(y))`,
/// `f(z) = e^{−1/z}`. The bridge is C^∞ at both ends.
pub fn eta(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let f = |z: f64| if z <= 0.0 { 0.0 } else { (-1.0 / z).exp() };
        let y = a - 1.0;
        let (p, q) = (f(1.0 - y), f(y));
        p / (p + q)
    }
}

/// `η_T(t_k) = η(t_k / T)` on the window grid.
pub fn cutoff_eta(half_width: f64, window: &TimeWindow) -> Result<Vec<f64>> {
    if !(half_width > 0.0) {
        return invalid("cutoff scale T must be positive");
    }
    if half_width > window.half_width {
        return invalid(format!(
            "window [−{w}, {w}] does not cover the cutoff support [−{t}, {t}]",
            w = 2.0 * window.half_width,
            t = 2.0 * half_width
        ));
    }
    Ok(window.times().iter().map(|&t| eta(t / half_width)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    lattice: LatticeSpec,
    window: TimeWindow,
    /// Row-major: mode `n` (from `−n_max`), then time sample `k`.
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn new(lattice: LatticeSpec, window: TimeWindow, values: Vec<Complex64>) -> Result<Self> {
        let need = nyquist_samples(window.half_width, lattice.n_max);
        if window.samples < need {
            return Err(LabError::GridTooSmall {
                got: window.samples,
                need,
            });
        }
        if values.len() != lattice.len() * window.samples {
            return invalid("field size does not match lattice × window");
        }
        if let Some(i) = values.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(LabError::NonFinite {
                mode: (i / window.samples) as i64 - lattice.n_max as i64,
            });
        }
        Ok(Self {
            lattice,
            window,
            values,
        })
    }

    pub fn from_fn(lattice: LatticeSpec, window: TimeWindow, f: impl Fn(i64, f64) -> Complex64) -> Result<Self> {
        let nm = lattice.n_max as i64;
        let times = window.times();
        let values = (-nm..=nm)
            .flat_map(|n| times.iter().map(move |&t| (n, t)))
            .map(|(n, t)| f(n, t))
            .collect();
        Self::new(lattice, window, values)
    }

    /// Windowed free solution `η_T(t) Σ û₀(n) e^{i(nx + n³t)}`.
    pub fn free_solution(u0: &ModeVector, window: TimeWindow, cutoff: f64) -> Result<Self> {
        let eta = cutoff_eta(cutoff, &window)?;
        let times = window.times();
        let nm = u0.n_max() as i64;
        let values = (-nm..=nm)
            .flat_map(|n| {
                let c = u0.get(n);
                let n3 = (n as f64).powi(3);
                times
                    .iter()
                    .zip(&eta)
                    .map(move |(&t, &e)| c * Complex64::from_polar(e, n3 * t))
            })
            .collect();
        Self::new(u0.lattice(), window, values)
    }

    pub fn zeros(lattice: LatticeSpec, window: TimeWindow) -> Result<Self> {
        Self::new(lattice, window, vec![Complex64::new(0.0, 0.0); lattice.len() * window.samples])
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * factor).collect(),
            ..self.clone()
        }
    }

    fn row(&self, n: i64) -> &[Complex64] {
        let m = self.window.samples;
        let i = (n + self.lattice.n_max as i64) as usize;
        &self.values[i * m..(i + 1) * m]
    }

    /// `û(n, τ_j)` for every FFT bin `j` (magnitudes are independent of the
    /// window origin, so the phase `e^{−iτ_j t_0}` is included for exactness
    /// of convolutions).
    pub fn time_transform(&self, n: i64) -> Vec<Complex64> {
        let mut buf = self.row(n).to_vec();
        let m = self.window.samples;
        plan(m, false).process(&mut buf);
        let dt = self.window.dt();
        let t0 = self.window.time(0);
        (0..m)
            .map(|j| buf[j] * Complex64::from_polar(dt, -self.window.tau(j) * t0))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

/// Modulation weights `σ(n, τ_j) = ⟨τ_j − n³⟩ ≥ 1` on the dual grid.
#[derive(Debug, Clone)]
pub struct SigmaWeights {
    n_max: usize,
    samples: usize,
    sigma: Vec<f64>,
}

impl SigmaWeights {
    pub fn new(lattice: LatticeSpec, window: &TimeWindow) -> Self {
        let nm = lattice.n_max as i64;
        let sigma = (-nm..=nm)
            .flat_map(|n| {
                let n3 = (n as f64).powi(3);
                (0..window.samples).map(move |j| 1.0 + (window.tau(j) - n3).abs())
            })
            .collect();
        Self {
            n_max: lattice.n_max,
            samples: window.samples,
            sigma,
        }
    }

    pub fn get(&self, n: i64, j: usize) -> f64 {
        self.sigma[(n + self.n_max as i64) as usize * self.samples + j]
    }

    pub fn min(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-mode `(Σ_j ⟨τ_j − n³⟩^{p} |û(n,τ_j)|^q Δτ/2π)` reduced in mode order.
fn per_mode<F>(field: &SpaceTimeField, s_weight: f64, reduce: F) -> f64
where
    F: Fn(&[Complex64], i64) -> f64 + Sync,
{
    let nm = field.lattice.n_max as i64;
    let rows: Vec<f64> = (-nm..=nm)
        .into_par_iter()
        .map(|n| bracket(n).powf(s_weight) * reduce(&field.time_transform(n), n))
        .collect();
    rows.iter().sum()
}

/// `‖⟨n⟩^s ⟨τ − n³⟩^b û(n, τ)‖_{ℓ²_n L²_τ}`.
pub fn xsb_norm(field: &SpaceTimeField, s: f64, b: f64) -> f64 {
    let w = field.window;
    per_mode(field, 2.0 * s, |hat, n| {
        let n3 = (n as f64).powi(3);
        hat.iter()
            .enumerate()
            .map(|(j, c)| (1.0 + (w.tau(j) - n3).abs()).powf(2.0 * b) * c.norm_sqr())
            .sum::<f64>()
            * w.measure()
    })
    .sqrt()
}

/// `‖⟨n⟩^s ⟨τ − n³⟩^b û(n, τ)‖_{ℓ²_n L¹_τ}`.
pub fn ysb_norm(field: &SpaceTimeField, s: f64, b: f64) -> f64 {
    let w = field.window;
    per_mode(field, 2.0 * s, |hat, n| {
        let n3 = (n as f64).powi(3);
        let l1 = hat
            .iter()
            .enumerate()
            .map(|(j, c)| (1.0 + (w.tau(j) - n3).abs()).powf(b) * c.norm())
            .sum::<f64>()
            * w.measure();
        l1 * l1
    })
    .sqrt()
}

/// `‖u‖_{X^{s,b}} + ‖u‖_{Y^{s,b−1/2}}`.
pub fn zsb_norm(field: &SpaceTimeField, s: f64, b: f64) -> f64 {
    xsb_norm(field, s, b) + ysb_norm(field, s, b - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    A0,
    A1,
    A2,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::A0, Region::A1, Region::A2];
}

/// Index of the largest modulation; ties go to the smallest index.
pub fn region_from_sigmas(sigma: [f64; 3]) -> Region {
    let mut best = 0;
    for i in 1..3 {
        if sigma[i] > sigma[best] {
            best = i;
        }
    }
    Region::ALL[best]
}

/// `(σ₀, σ₁, σ₂)` for `n = n₁ + n₂`, `τ = τ₁ + τ₂`.
pub fn modulations(n: i64, n1: i64, tau: f64, tau1: f64) -> [f64; 3] {
    let n2 = n - n1;
    let tau2 = tau - tau1;
    let cube = |k: i64| (k as f64).powi(3);
    [
        1.0 + (tau - cube(n)).abs(),
        1.0 + (tau1 - cube(n1)).abs(),
        1.0 + (tau2 - cube(n2)).abs(),
    ]
}

pub fn region_decompose(n: i64, n1: i64, tau: f64, tau1: f64) -> Region {
    region_from_sigmas(modulations(n, n1, tau, tau1))
}

/// `3 · max σ ≥ ⟨3 n n₁ n₂⟩`, the explicit-constant form of the
/// largest-modulation bound.
pub fn max_modulation_bound_holds(n: i64, n1: i64, tau: f64, tau1: f64) -> bool {
    let sig = modulations(n, n1, tau, tau1);
    let max = sig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n2 = n - n1;
    3.0 * max >= 1.0 + (3 * n * n1 * n2).unsigned_abs() as f64
}

/// Bilinear Duhamel contribution `−½ i n (u u)^(n, τ) / σ₀` on the extended
/// dual grid `τ = τ₁ + τ₂` (`2m_t − 1` points, no wrap-around), keeping only
/// convolution terms in `region` (all terms for `None`).
#[derive(Debug, Clone)]
pub struct BilinearField {
    pub n_max: usize,
    pub window: TimeWindow,
    /// Row-major: mode `n`, then extended index `j ∈ [−m_t, m_t − 2]`.
    pub values: Vec<Complex64>,
}

impl BilinearField {
    fn width(&self) -> usize {
        2 * self.window.samples - 1
    }

    fn tau(&self, idx: usize) -> f64 {
        (idx as i64 - self.window.samples as i64) as f64 * self.window.dtau()
    }

    pub fn xsb_norm(&self, s: f64, b: f64) -> f64 {
        let width = self.width();
        let nm = self.n_max as i64;
        let total: f64 = (-nm..=nm)
            .map(|n| {
                let n3 = (n as f64).powi(3);
                let row = &self.values[(n + nm) as usize * width..(n + nm + 1) as usize * width];
                bracket(n).powf(2.0 * s)
                    * row
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (1.0 + (self.tau(i) - n3).abs()).powf(2.0 * b) * c.norm_sqr())
                        .sum::<f64>()
            })
            .sum();
        (total * self.window.measure()).sqrt()
    }
}

pub fn bilinear_field(u: &SpaceTimeField, region: Option<Region>) -> Result<BilinearField> {
    let lattice = u.lattice;
    let w = u.window;
    let m = w.samples as i64;
    let nm = lattice.n_max as i64;
    // transforms ordered by signed index −m/2 .. m/2−1
    let hats: Vec<Vec<Complex64>> = (-nm..=nm)
        .map(|n| {
            let h = u.time_transform(n);
            (-m / 2..m / 2).map(|j| h[j.rem_euclid(m) as usize]).collect()
        })
        .collect();
    let dtau = w.dtau();
    let width = (2 * m - 1) as usize;
    let measure = w.measure();

    let rows: Vec<Vec<Complex64>> = (-nm..=nm)
        .into_par_iter()
        .map(|n| {
            let mut row = vec![Complex64::new(0.0, 0.0); width];
            if n == 0 {
                return row;
            }
            for n1 in (-nm).max(n - nm)..=nm.min(n + nm) {
                let n2 = n - n1;
                let h1 = &hats[(n1 + nm) as usize];
                let h2 = &hats[(n2 + nm) as usize];
                for (a, &c1) in h1.iter().enumerate() {
                    if c1.re == 0.0 && c1.im == 0.0 {
                        continue;
                    }
                    let tau1 = (a as i64 - m / 2) as f64 * dtau;
                    for (b, &c2) in h2.iter().enumerate() {
                        let jsum = a as i64 + b as i64 - m; // signed index of τ₁ + τ₂
                        let tau = jsum as f64 * dtau;
                        if let Some(r) = region {
                            if region_decompose(n, n1, tau, tau1) != r {
                                continue;
                            }
                        }
                        row[(jsum + m) as usize] += c1 * c2;
                    }
                }
            }
            let n3 = (n as f64).powi(3);
            for (i, v) in row.iter_mut().enumerate() {
                let tau = (i as i64 - m) as f64 * dtau;
                let sigma0 = 1.0 + (tau - n3).abs();
                *v *= Complex64::new(0.0, -0.5 * n as f64) * (measure / sigma0);
            }
            row
        })
        .collect();
    Ok(BilinearField {
        n_max: lattice.n_max,
        window: w,
        values: rows.into_iter().flatten().collect(),
    })
}

/// `‖N_region(u, u)‖_{X^{s,b}}` for a real mean-zero field.
pub fn restricted_bilinear_norm(u: &SpaceTimeField, s: f64, b: f64, region: Option<Region>) -> Result<f64> {
    if u.lattice.symmetry != Symmetry::RealMeanZero {
        return Err(LabError::Symmetry("bilinear estimates need a real mean-zero field".into()));
    }
    Ok(bilinear_field(u, region)?.xsb_norm(s, b))
}

/// Discrete space-time `L⁴` norm with measures `dx/2π` and `dt`.
pub fn l4_norm(u: &SpaceTimeField) -> f64 {
    let w = u.window;
    let nm = u.lattice.n_max as i64;
    // |u|⁴ has spatial modes up to ±4 n_max: 4 n_max + 1 points integrate it exactly
    let mx = fft_size(4 * u.lattice.n_max + 1);
    let inv = plan(mx, true);
    let sums: Vec<f64> = (0..w.samples)
        .into_par_iter()
        .map(|k| {
            let mut buf = vec![Complex64::new(0.0, 0.0); mx];
            for n in -nm..=nm {
                buf[n.rem_euclid(mx as i64) as usize] = u.row(n)[k];
            }
            inv.process(&mut buf);
            buf.iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>() / mx as f64
        })
        .collect();
    (sums.iter().sum::<f64>() * w.dt()).powf(0.25)
}

/// `‖u‖_{L⁴_{x,t}} / ‖u‖_{X^{0,1/3}}`.
pub fn strichartz_ratio(u: &SpaceTimeField) -> Result<f64> {
    let denom = xsb_norm(u, 0.0, 1.0 / 3.0);
    if denom == 0.0 {
        return invalid("Strichartz ratio of a zero field");
    }
    Ok(l4_norm(u) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_values() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(3.0), 0.0);
        let mid = eta(1.5);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_needs_covering_window() {
        let w = TimeWindow::new(1.0, 64).unwrap();
        assert!(cutoff_eta(2.0, &w).is_err());
        let e = cutoff_eta(1.0, &w).unwrap();
        assert_eq!(e[32], 1.0);
        assert_eq!(e[0], 0.0);
    }

    #[test]
    fn window_validation() {
        assert!(TimeWindow::new(1.0, 8).is_err());
        assert!(TimeWindow::new(1.0, 100).is_err());
        assert!(TimeWindow::new(0.0, 64).is_err());
        let lat = LatticeSpec::new(8, Symmetry::General).unwrap();
        let w = TimeWindow::new(1.0, 64).unwrap();
        assert!(matches!(SpaceTimeField::zeros(lat, w), Err(LabError::GridTooSmall { .. })));
    }

    #[test]
    fn region_ties_and_max() {
        assert_eq!(region_from_sigmas([5.0, 3.0, 1.0]), Region::A0);
        assert_eq!(region_from_sigmas([1.0, 1.0, 1.0]), Region::A0);
        assert_eq!(region_from_sigmas([1.0, 4.0, 4.0]), Region::A1);
        assert_eq!(region_from_sigmas([1.0, 2.0, 4.0]), Region::A2);
    }

    #[test]
    fn zero_field_norms() {
        let lat = LatticeSpec::new(2, Symmetry::RealMeanZero).unwrap();
        let w = TimeWindow::for_lattice(0.5, 2, 1).unwrap();
        let z = SpaceTimeField::zeros(lat, w).unwrap();
        assert_eq!(xsb_norm(&z, 0.3, 0.5), 0.0);
        assert_eq!(ysb_norm(&z, 0.3, 0.5), 0.0);
        assert_eq!(zsb_norm(&z, 0.3, 0.5), 0.0);
        assert_eq!(restricted_bilinear_norm(&z, -0.5, 0.5, None).unwrap(), 0.0);
        assert!(strichartz_ratio(&z).is_err());
    }
}
