//! Truncated Fourier representation of periodic functions on `T = R / 2πZ`.
//!
//! Coefficients follow `u(x) = Σ_{|n| ≤ n_max} û(n) e^{inx}` with no `2π`
//! factors, and the Japanese bracket is `⟨n⟩ = 1 + |n|`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

/// Above this lattice size `convolve` switches from the direct double sum to
/// the zero-padded FFT product.
const DIRECT_CONVOLUTION_MAX: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// `û(-n) = conj(û(n))` and `û(0) = 0`: real-valued, mean zero.
    RealMeanZero,
    /// `û(n) = 0` for `n < 0`: Hardy-space functions.
    AnalyticNonneg,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_max: usize,
    pub symmetry: Symmetry,
}

impl LatticeSpec {
    pub fn new(n_max: usize, symmetry: Symmetry) -> Result<Self> {
        if n_max < 1 {
            return invalid("n_max must be at least 1");
        }
        Ok(Self { n_max, symmetry })
    }

    pub fn len(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_symmetry(self, symmetry: Symmetry) -> Self {
        Self { symmetry, ..self }
    }
}

/// Sobolev / Fourier–Lebesgue exponents. The bracket is always `1 + |n|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub p: f64,
}

impl NormParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return invalid(format!("Lebesgue index p = {p} must be >= 1"));
        }
        Ok(Self { s, p })
    }

    pub fn eval(&self, u: &ModeVector) -> Result<f64> {
        fl_norm(u, self.s, self.p)
    }
}

/// `⟨n⟩ = 1 + |n|`.
#[inline]
pub fn bracket(n: i64) -> f64 {
    1.0 + n.unsigned_abs() as f64
}

/// Complex Fourier coefficients indexed by `n ∈ [-n_max, n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector {
    lattice: LatticeSpec,
    coeffs: Vec<Complex64>,
}

impl ModeVector {
    /// Validating constructor: length, finiteness and the exact symmetry
    /// constraints of the lattice class.
    pub fn new(lattice: LatticeSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if lattice.n_max < 1 {
            return invalid("n_max must be at least 1");
        }
        if coeffs.len() != lattice.len() {
            return invalid(format!(
                "expected {} coefficients for n_max = {}, got {}",
                lattice.len(),
                lattice.n_max,
                coeffs.len()
            ));
        }
        let v = Self { lattice, coeffs };
        v.check_finite()?;
        v.check_symmetry()?;
        Ok(v)
    }

    /// Builds from a closure over the mode index; negative modes are read
    /// from the closure too, so callers must respect the class themselves.
    pub fn from_fn(lattice: LatticeSpec, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let n = lattice.n_max as i64;
        Self::new(lattice, (-n..=n).map(f).collect())
    }

    pub fn zeros(lattice: LatticeSpec) -> Self {
        Self {
            lattice,
            coeffs: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    /// Single mode `value · e^{ikx}` in the general class.
    pub fn delta(n_max: usize, k: i64, value: Complex64) -> Result<Self> {
        let lattice = LatticeSpec::new(n_max, Symmetry::General)?;
        if k.unsigned_abs() as usize > n_max {
            return invalid(format!("mode {k} outside lattice n_max = {n_max}"));
        }
        let mut v = Self::zeros(lattice);
        v.coeffs[(k + n_max as i64) as usize] = value;
        Ok(v)
    }

    pub(crate) fn from_raw(lattice: LatticeSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), lattice.len());
        Self { lattice, coeffs }
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn n_max(&self) -> usize {
        self.lattice.n_max
    }

    pub fn symmetry(&self) -> Symmetry {
        self.lattice.symmetry
    }

    /// Coefficients in index order `-n_max ..= n_max`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at mode `n`; zero outside the lattice.
    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        let nm = self.lattice.n_max as i64;
        if n.abs() > nm {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + nm) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let nm = self.lattice.n_max as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - nm, c))
    }

    /// Relabels the class after verifying the constraints hold exactly.
    pub fn with_symmetry(self, symmetry: Symmetry) -> Result<Self> {
        let v = Self {
            lattice: self.lattice.with_symmetry(symmetry),
            coeffs: self.coeffs,
        };
        v.check_symmetry()?;
        Ok(v)
    }

    /// Zero-extends or truncates onto a lattice of size `n_max`.
    pub fn resize(&self, n_max: usize) -> Result<Self> {
        let lattice = LatticeSpec::new(n_max, self.symmetry())?;
        let n = n_max as i64;
        Ok(Self::from_raw(lattice, (-n..=n).map(|k| self.get(k)).collect()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_raw(self.lattice, self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// `self + factor · other`, keeping the class of `self` when both agree.
    pub fn add_scaled(&self, other: &ModeVector, factor: Complex64) -> Result<Self> {
        same_lattice(self, other)?;
        let symmetry = if self.symmetry() == other.symmetry() {
            match self.symmetry() {
                // a complex factor breaks conjugate symmetry
                Symmetry::RealMeanZero if factor.im != 0.0 => Symmetry::General,
                s => s,
            }
        } else {
            Symmetry::General
        };
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + factor * b)
            .collect();
        Ok(Self::from_raw(self.lattice.with_symmetry(symmetry), coeffs))
    }

    pub fn sub(&self, other: &ModeVector) -> Result<Self> {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }

    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let nm = self.lattice.n_max as i64;
        Self::from_raw(
            self.lattice,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f(i as i64 - nm, c))
                .collect(),
        )
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.iter().find(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
            Some((mode, _)) => Err(LabError::NonFinite { mode }),
            None => Ok(()),
        }
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.lattice.n_max as i64;
        match self.lattice.symmetry {
            Symmetry::General => Ok(()),
            Symmetry::AnalyticNonneg => match (-n..0).find(|&k| self.get(k) != Complex64::new(0.0, 0.0)) {
                Some(k) => Err(LabError::Symmetry(format!(
                    "analytic_nonneg vector has nonzero coefficient at n = {k}"
                ))),
                None => Ok(()),
            },
            Symmetry::RealMeanZero => {
                if self.get(0) != Complex64::new(0.0, 0.0) {
                    return Err(LabError::Symmetry("real_mean_zero vector has nonzero mean".into()));
                }
                match (1..=n).find(|&k| self.get(-k) != self.get(k).conj()) {
                    Some(k) => Err(LabError::Symmetry(format!(
                        "conjugate symmetry broken at n = ±{k}"
                    ))),
                    None => Ok(()),
                }
            }
        }
    }

    /// True when `û(-n) = conj(û(n))` holds bit-exactly.
    pub fn is_conj_symmetric(&self) -> bool {
        let n = self.lattice.n_max as i64;
        self.get(0).im == 0.0 && (1..=n).all(|k| self.get(-k) == self.get(k).conj())
    }
}

pub(crate) fn same_lattice(u: &ModeVector, v: &ModeVector) -> Result<()> {
    if u.n_max() != v.n_max() {
        return Err(LabError::LatticeMismatch {
            left: u.n_max(),
            right: v.n_max(),
        });
    }
    Ok(())
}

/// Forces `û(-n) = conj(û(n))` from the nonnegative half.
fn mirror_conjugate(coeffs: &mut [Complex64], n_max: usize) {
    let nm = n_max as i64;
    coeffs[n_max].im = 0.0;
    for k in 1..=nm {
        coeffs[(nm - k) as usize] = coeffs[(nm + k) as usize].conj();
    }
}

/// `ŵ(n) = Σ_{n₁+n₂=n} û(n₁) v̂(n₂)` truncated to `|n| ≤ n_max`.
///
/// Small lattices use the direct sum; larger ones multiply on a grid of at
/// least `3·n_max + 1` points so no product mode aliases into the retained
/// range. Conjugate-symmetric inputs give an exactly conjugate-symmetric
/// output, and two analytic inputs give an analytic output.
pub fn convolve(u: &ModeVector, v: &ModeVector) -> Result<ModeVector> {
    same_lattice(u, v)?;
    u.check_finite()?;
    v.check_finite()?;
    let n_max = u.n_max();
    let nm = n_max as i64;

    let mut coeffs = if n_max <= DIRECT_CONVOLUTION_MAX {
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
        for n in -nm..=nm {
            let lo = (-nm).max(n - nm);
            let hi = nm.min(n + nm);
            let mut acc = Complex64::new(0.0, 0.0);
            for n1 in lo..=hi {
                acc += u.get(n1) * v.get(n - n1);
            }
            out[(n + nm) as usize] = acc;
        }
        out
    } else {
        let m = fft_size(3 * n_max + 1);
        let a = to_physical(u, m)?;
        let b = to_physical(v, m)?;
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        physical_to_coeffs(prod, n_max)
    };

    let symmetry = if u.is_conj_symmetric() && v.is_conj_symmetric() {
        mirror_conjugate(&mut coeffs, n_max);
        Symmetry::General
    } else if u.symmetry() == Symmetry::AnalyticNonneg && v.symmetry() == Symmetry::AnalyticNonneg {
        coeffs[..n_max].iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        Symmetry::AnalyticNonneg
    } else {
        Symmetry::General
    };
    Ok(ModeVector::from_raw(u.lattice.with_symmetry(symmetry), coeffs))
}

/// `∂ₓ`: multiplies mode `n` by `i n`.
pub fn derivative(u: &ModeVector) -> Result<ModeVector> {
    u.check_finite()?;
    Ok(u.map_modes(|n, c| Complex64::new(0.0, n as f64) * c))
}

/// Szegő projector onto nonnegative frequencies.
pub fn project_szego(u: &ModeVector) -> ModeVector {
    let lattice = u.lattice.with_symmetry(Symmetry::AnalyticNonneg);
    let mut out = ModeVector::from_raw(lattice, u.coeffs.clone());
    out.coeffs[..u.n_max()]
        .iter_mut()
        .for_each(|c| *c = Complex64::new(0.0, 0.0));
    out
}

pub fn remove_mean(u: &ModeVector) -> ModeVector {
    let mut out = u.clone();
    out.coeffs[u.n_max()] = Complex64::new(0.0, 0.0);
    out
}

/// `‖u‖_{H^s} = (Σ ⟨n⟩^{2s} |û(n)|²)^{1/2}`.
pub fn sobolev_norm(u: &ModeVector, s: f64) -> f64 {
    u.iter()
        .map(|(n, c)| bracket(n).powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖⟨n⟩^s û(n)‖_{ℓ^p}`; `p = ∞` gives the weighted supremum.
pub fn fl_norm(u: &ModeVector, s: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("Lebesgue index p = {p} must be >= 1"));
    }
    let weighted = u.iter().map(|(n, c)| bracket(n).powf(s) * c.norm());
    if p.is_infinite() {
        return Ok(weighted.fold(0.0, f64::max));
    }
    Ok(weighted.map(|a| a.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `max_n |û(n)|`.
pub fn sup_fourier(u: &ModeVector) -> f64 {
    u.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

/// Cached FFT plan for this thread.
pub(crate) fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((m, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(m)
                } else {
                    planner.plan_fft_forward(m)
                }
            })
            .clone()
    })
}

/// Smallest 5-smooth integer `≥ min`.
pub fn fft_size(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Samples `u(x_k)`, `x_k = 2πk/m`, via an unnormalised inverse FFT.
pub fn to_physical(u: &ModeVector, m: usize) -> Result<Vec<Complex64>> {
    let need = 2 * u.n_max() + 2;
    if m < need {
        return Err(LabError::GridTooSmall { got: m, need });
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (n, c) in u.iter() {
        buf[n.rem_euclid(m as i64) as usize] = c;
    }
    plan(m, true).process(&mut buf);
    Ok(buf)
}

/// Forward FFT of grid samples, normalised and truncated to `|n| ≤ n_max`.
pub(crate) fn physical_to_coeffs(mut samples: Vec<Complex64>, n_max: usize) -> Vec<Complex64> {
    let m = samples.len();
    plan(m, false).process(&mut samples);
    let inv = 1.0 / m as f64;
    let nm = n_max as i64;
    (-nm..=nm)
        .map(|n| samples[n.rem_euclid(m as i64) as usize] * inv)
        .collect()
}

/// Inverse of [`to_physical`] on the retained modes. The result is projected
/// onto the requested class: real_mean_zero keeps the conjugate-symmetric
/// part with zero mean, analytic_nonneg drops negative modes.
pub fn from_physical(samples: &[Complex64], lattice: LatticeSpec) -> Result<ModeVector> {
    let need = 2 * lattice.n_max + 2;
    if samples.len() < need {
        return Err(LabError::GridTooSmall {
            got: samples.len(),
            need,
        });
    }
    let mut coeffs = physical_to_coeffs(samples.to_vec(), lattice.n_max);
    let n_max = lattice.n_max;
    match lattice.symmetry {
        Symmetry::General => {}
        Symmetry::AnalyticNonneg => coeffs[..n_max]
            .iter_mut()
            .for_each(|c| *c = Complex64::new(0.0, 0.0)),
        Symmetry::RealMeanZero => {
            for k in 1..=n_max {
                let sym = (coeffs[n_max + k] + coeffs[n_max - k].conj()) * 0.5;
                coeffs[n_max + k] = sym;
            }
            coeffs[n_max] = Complex64::new(0.0, 0.0);
            mirror_conjugate(&mut coeffs, n_max);
        }
    }
    let v = ModeVector::from_raw(lattice, coeffs);
    v.check_finite()?;
    Ok(v)
}
