//! Pseudospectral time integration of KdV and the cubic Szegő equation.
//!
//! KdV `u_t + u_xxx + u u_x = 0` is advanced with the integrating-factor
//! (Lawson) RK4 scheme: the linear propagator `e^{i n³ t}` is applied exactly
//! and RK4 acts on the nonlinear remainder only. The Szegő equation
//! `i u_t = Π(|u|² u)` has no linear part and uses classical RK4.
//! Products are formed on zero-padded grids so the retained modes see no
//! aliasing.
//!
//! Step-size guards (`dt_max`):
//!
//! - KdV: `dt ≤ min(2.8 / (n_max ‖û₀‖_ℓ¹), π / φ_max)` where
//!   `φ_max = 3 n_max³ / 4` bounds the triad phase `3 n n₁ n₂`. The first
//!   term is the RK4 imaginary-axis stability limit for the Lipschitz
//!   constant of `∂ₓ(u²)/2`, the second keeps every triad oscillation
//!   resolved (an unresolved phase aliases onto a slow one and injects
//!   spurious high-mode energy).
//! - Szegő: `dt ≤ 2.8 / (3 ‖û₀‖²_ℓ¹)`, the RK4 limit for the Lipschitz
//!   constant of `|u|² u` on the ball of radius `‖u‖_{L^∞} ≤ ‖û‖_ℓ¹`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::kdv::linear_flow;
use crate::spectral::{bracket, fft_size, plan, ModeVector, Symmetry};
use crate::stats::{linear_fit, LinearFit};

const RK4_STABILITY: f64 = 2.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    IntegratingFactorRk4,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    Kdv,
    Szego,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn kdv(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::IntegratingFactorRk4,
            record_every: 1,
        }
    }

    pub fn szego(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            scheme: Scheme::Rk4,
            record_every: 1,
        }
    }

    pub fn recording_every(self, record_every: usize) -> Self {
        Self { record_every, ..self }
    }

    /// Number of steps; the actual step is `t_final / steps ≤ dt`.
    pub fn steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }

    fn validate(&self, expected: Scheme, dt_max: f64) -> Result<()> {
        if self.scheme != expected {
            return invalid(format!("scheme {:?} does not match the flow", self.scheme));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return invalid("dt must be positive and finite");
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return invalid("t_final must be nonnegative and finite");
        }
        if self.record_every == 0 {
            return invalid("record_every must be at least 1");
        }
        if self.dt > dt_max * (1.0 + 1e-12) {
            return invalid(format!("dt = {} exceeds the step guard {dt_max:e}", self.dt));
        }
        Ok(())
    }
}

fn l1(u: &ModeVector) -> f64 {
    u.coeffs().iter().map(|c| c.norm()).sum()
}

/// Largest `|3 n n₁ n₂|` over `n = n₁ + n₂` with all `|·| ≤ n_max`.
pub fn kdv_max_triad_phase(n_max: usize) -> f64 {
    0.75 * (n_max as f64).powi(3)
}

/// Step guard for integrating-factor RK4 on KdV data `u0`.
pub fn kdv_dt_max(u0: &ModeVector) -> f64 {
    let phase = std::f64::consts::PI / kdv_max_triad_phase(u0.n_max());
    let amp = l1(u0) * u0.n_max() as f64;
    if amp == 0.0 {
        phase
    } else {
        phase.min(RK4_STABILITY / amp)
    }
}

/// Step guard for RK4 on Szegő data `u0`.
pub fn szego_dt_max(u0: &ModeVector) -> f64 {
    let a = l1(u0);
    if a == 0.0 {
        f64::INFINITY
    } else {
        RK4_STABILITY / (3.0 * a * a)
    }
}

/// Default step: the guard for KdV (slopes and mass are converged there),
/// a sixteenth of the stability guard for Szegő so that the invariants
/// drift by less than `1e-9` over unit times.
pub fn recommended_dt(u0: &ModeVector, flow: Flow) -> f64 {
    match flow {
        Flow::Kdv => kdv_dt_max(u0),
        Flow::Szego => szego_dt_max(u0) / 16.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mean: Complex64,
    /// `Σ |û(n)|²`.
    pub mass: f64,
    /// `Σ (1 + |n|) |û(n)|²`, recorded for Szegő only.
    pub h_half: Option<f64>,
}

impl Conserved {
    fn of(u: &ModeVector, flow: Flow) -> Self {
        let mass = u.coeffs().iter().map(|c| c.norm_sqr()).sum();
        let h_half = match flow {
            Flow::Kdv => None,
            Flow::Szego => Some(u.iter().map(|(n, c)| bracket(n) * c.norm_sqr()).sum()),
        };
        Self {
            mean: u.get(0),
            mass,
            h_half,
        }
    }

    pub fn l2(&self) -> f64 {
        self.mass.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub flow: Flow,
    pub times: Vec<f64>,
    pub states: Vec<ModeVector>,
    pub conserved: Vec<Conserved>,
}

impl Trajectory {
    fn start(flow: Flow, u0: &ModeVector) -> Self {
        Self {
            flow,
            times: vec![0.0],
            states: vec![u0.clone()],
            conserved: vec![Conserved::of(u0, flow)],
        }
    }

    fn push(&mut self, t: f64, u: ModeVector) {
        self.conserved.push(Conserved::of(&u, self.flow));
        self.times.push(t);
        self.states.push(u);
    }

    pub fn initial(&self) -> &ModeVector {
        &self.states[0]
    }

    pub fn last(&self) -> (f64, &ModeVector) {
        let i = self.times.len() - 1;
        (self.times[i], &self.states[i])
    }

    /// Recorded state closest to `t`; errors when `t` lies outside the
    /// recorded range or no snapshot is within `1e-9·max(1, |t|)`.
    pub fn state_at(&self, t: f64) -> Result<&ModeVector> {
        let tol = 1e-9 * t.abs().max(1.0);
        let (first, last) = (self.times[0], self.times[self.times.len() - 1]);
        if t < first - tol || t > last + tol {
            return invalid(format!("t = {t} outside trajectory range [{first}, {last}]"));
        }
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if (self.times[i] - t).abs() > tol {
            return invalid(format!("no snapshot recorded at t = {t}"));
        }
        Ok(&self.states[i])
    }

    /// Columnar snapshot export: header `t,n,re,im`.
    pub fn to_columnar(&self) -> String {
        let mut out = String::from("t,n,re,im\n");
        for (t, u) in self.times.iter().zip(&self.states) {
            for (n, c) in u.iter() {
                let _ = writeln!(out, "{t:e},{n},{:e},{:e}", c.re, c.im);
            }
        }
        out
    }
}

/// `x ↦ -x` reflection, the time-reversal partner of KdV:
/// `u(x, t)` solves KdV iff `u(-x, -t)` does.
/// Analytic inputs come back in the general class.
pub fn reflect(u: &ModeVector) -> ModeVector {
    let n = u.n_max() as i64;
    let lattice = match u.symmetry() {
        Symmetry::AnalyticNonneg => u.lattice().with_symmetry(Symmetry::General),
        _ => u.lattice(),
    };
    ModeVector::from_raw(lattice, (-n..=n).map(|k| u.get(-k)).collect())
}

/// Real-to-complex transforms for the KdV product: `u` is real in physical
/// space, so only the nonnegative half-spectrum is stored.
struct RealGrid {
    n_max: usize,
    m: usize,
    fwd: Arc<dyn RealToComplex<f64>>,
    inv: Arc<dyn ComplexToReal<f64>>,
    modes: Vec<Complex64>,
    phys: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl RealGrid {
    fn new(n_max: usize, min_points: usize) -> Self {
        let m = fft_size(min_points);
        let mut planner = RealFftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let scratch_len = fwd.get_scratch_len().max(inv.get_scratch_len());
        Self {
            n_max,
            m,
            modes: fwd.make_output_vec(),
            phys: fwd.make_input_vec(),
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            fwd,
            inv,
        }
    }

    /// `out = -(1/2) ∂ₓ(u²)` with zero mean and exact conjugate symmetry.
    fn kdv_rhs(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        let nm = self.n_max;
        self.modes.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        self.modes[1..=nm].copy_from_slice(&u[nm + 1..]);
        // mode 0 is zero and the Nyquist bin is beyond 3N/2, so the inputs are
        // exactly Hermitian-compatible and neither transform can fail
        let _ = self.inv.process_with_scratch(&mut self.modes, &mut self.phys, &mut self.scratch);
        self.phys.iter_mut().for_each(|x| *x *= *x);
        let _ = self.fwd.process_with_scratch(&mut self.phys, &mut self.modes, &mut self.scratch);
        let norm = 1.0 / self.m as f64;
        out[nm] = Complex64::new(0.0, 0.0);
        for k in 1..=nm {
            let c = self.modes[k] * Complex64::new(0.0, -0.5 * k as f64 * norm);
            out[nm + k] = c;
            out[nm - k] = c.conj();
        }
    }
}

/// Complex transforms for the Szegő product.
struct Grid {
    n_max: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Grid {
    fn new(n_max: usize, min_points: usize) -> Self {
        let m = fft_size(min_points);
        let fwd = plan(m, false);
        let inv = plan(m, true);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            n_max,
            m,
            fwd,
            inv,
            buf: vec![Complex64::new(0.0, 0.0); m],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    fn load(&mut self, coeffs: &[Complex64]) {
        self.buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let nm = self.n_max as i64;
        let m = self.m as i64;
        for (i, &c) in coeffs.iter().enumerate() {
            self.buf[(i as i64 - nm).rem_euclid(m) as usize] = c;
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
    }

    fn coeff(&self, n: i64) -> Complex64 {
        self.buf[n.rem_euclid(self.m as i64) as usize] / self.m as f64
    }

    /// `out = -i Π(|u|² u)`, negative modes exactly zero.
    fn szego_rhs(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        self.load(u);
        self.buf.iter_mut().for_each(|x| *x = *x * x.norm_sqr());
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        let nm = self.n_max;
        for k in 0..nm {
            out[k] = Complex64::new(0.0, 0.0);
        }
        for k in 0..=nm {
            let c = self.coeff(k as i64);
            out[nm + k] = Complex64::new(c.im, -c.re);
        }
    }
}

fn check_step(state: &[Complex64], step: usize, time: f64) -> Result<()> {
    if state.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(LabError::Integration { step, time })
    }
}

/// Multiplier table `e^{i n³ τ}` with exact conjugate mirroring.
fn phase_table(n_max: usize, tau: f64) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0); 2 * n_max + 1];
    for k in 1..=n_max {
        let n3 = (k as f64).powi(3);
        let z = Complex64::from_polar(1.0, n3 * tau);
        e[n_max + k] = z;
        e[n_max - k] = z.conj();
    }
    e
}

/// Integrates KdV from real mean-zero data.
pub fn evolve_kdv(u0: &ModeVector, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if u0.symmetry() != Symmetry::RealMeanZero {
        return Err(LabError::Symmetry("KdV evolution needs real_mean_zero data".into()));
    }
    u0.check_finite()?;
    cfg.validate(Scheme::IntegratingFactorRk4, kdv_dt_max(u0))?;

    let n_max = u0.n_max();
    let len = 2 * n_max + 1;
    let steps = cfg.steps();
    let mut traj = Trajectory::start(Flow::Kdv, u0);
    if steps == 0 {
        return Ok(traj);
    }
    let h = cfg.t_final / steps as f64;
    let e_half = phase_table(n_max, 0.5 * h);
    let e_full = phase_table(n_max, h);
    let mut grid = RealGrid::new(n_max, 3 * n_max + 1);

    let zero = Complex64::new(0.0, 0.0);
    let mut u = u0.coeffs().to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len]);
    let mut tmp = vec![zero; len];

    for step in 1..=steps {
        grid.kdv_rhs(&u, &mut k1);
        for i in 0..len {
            tmp[i] = e_half[i] * (u[i] + 0.5 * h * k1[i]);
        }
        grid.kdv_rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = e_half[i] * u[i] + 0.5 * h * k2[i];
        }
        grid.kdv_rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = e_full[i] * u[i] + h * e_half[i] * k3[i];
        }
        grid.kdv_rhs(&tmp, &mut k4);
        for i in 0..len {
            u[i] = e_full[i] * u[i]
                + (h / 6.0) * (e_full[i] * k1[i] + 2.0 * e_half[i] * (k2[i] + k3[i]) + k4[i]);
        }
        let t = h * step as f64;
        check_step(&u, step, t)?;
        debug_assert_eq!(u[n_max], zero);
        if step % cfg.record_every == 0 || step == steps {
            traj.push(t, ModeVector::new(u0.lattice(), u.clone())?);
        }
    }
    Ok(traj)
}

/// Integrates the cubic Szegő equation from analytic data.
pub fn evolve_szego(u0: &ModeVector, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if u0.symmetry() != Symmetry::AnalyticNonneg {
        return Err(LabError::Symmetry("Szegő evolution needs analytic_nonneg data".into()));
    }
    u0.check_finite()?;
    cfg.validate(Scheme::Rk4, szego_dt_max(u0))?;

    let n_max = u0.n_max();
    let len = 2 * n_max + 1;
    let steps = cfg.steps();
    let mut traj = Trajectory::start(Flow::Szego, u0);
    if steps == 0 {
        return Ok(traj);
    }
    let h = cfg.t_final / steps as f64;
    let mut grid = Grid::new(n_max, 3 * n_max + 1);

    let zero = Complex64::new(0.0, 0.0);
    let mut u = u0.coeffs().to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len]);
    let mut tmp = vec![zero; len];

    for step in 1..=steps {
        grid.szego_rhs(&u, &mut k1);
        for i in 0..len {
            tmp[i] = u[i] + 0.5 * h * k1[i];
        }
        grid.szego_rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = u[i] + 0.5 * h * k2[i];
        }
        grid.szego_rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = u[i] + h * k3[i];
        }
        grid.szego_rhs(&tmp, &mut k4);
        for i in 0..len {
            u[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        let t = h * step as f64;
        check_step(&u, step, t)?;
        if step % cfg.record_every == 0 || step == steps {
            traj.push(t, ModeVector::new(u0.lattice(), u.clone())?);
        }
    }
    Ok(traj)
}

/// Shells `[2^j, 2^{j+1})` covering the upper half of the dyadic range:
/// `j ≥ ⌈J/2⌉` with `J = ⌊log₂ n_max⌋`, complete shells only.
pub fn upper_shells(n_max: usize) -> Vec<(usize, usize)> {
    let big_j = usize::BITS - 1 - n_max.leading_zeros();
    let first = big_j.div_ceil(2);
    (first..=big_j)
        .map(|j| (1usize << j, 1usize << (j + 1)))
        .filter(|&(_, hi)| hi - 1 <= n_max)
        .collect()
}

/// Least-squares slope of `ln |û(n)|` against `ln ⟨n⟩` over the lower
/// medians of each upper dyadic shell (positive modes only), each placed at
/// its shell midpoint.
pub fn decay_exponent(u: &ModeVector) -> Result<LinearFit> {
    let shells = upper_shells(u.n_max());
    if shells.len() < 2 {
        return invalid(format!("n_max = {} resolves fewer than two upper shells", u.n_max()));
    }
    let mut xs = Vec::with_capacity(shells.len());
    let mut ys = Vec::with_capacity(shells.len());
    for (lo, hi) in shells {
        let mut mags: Vec<f64> = (lo..hi).map(|n| u.get(n as i64).norm()).collect();
        mags.sort_by(f64::total_cmp);
        let mid = (hi - lo - 1) / 2;
        let y = mags[mid];
        if y == 0.0 {
            return invalid(format!("shell [{lo}, {hi}) has zero median amplitude"));
        }
        xs.push((1.0 + 0.5 * (lo + hi - 1) as f64).ln());
        ys.push(y.ln());
    }
    linear_fit(&xs, &ys)
}

/// Fourier-decay exponents `(p_lin, p_nl)` of the data and of the nonlinear
/// remainder `u(t) − S(t)u₀` (KdV) or `u(t) − u₀` (Szegő).
pub fn smoothing_profile(traj: &Trajectory, t: f64, flow: Flow) -> Result<(f64, f64)> {
    let ut = traj.state_at(t)?;
    let u0 = traj.initial();
    let linear = match flow {
        Flow::Kdv => linear_flow(u0, t)?,
        Flow::Szego => u0.clone(),
    };
    let w = ut.sub(&linear)?;
    if w.is_zero() {
        return Err(LabError::NoNonlinearPart);
    }
    let p_lin = decay_exponent(&linear)?.slope;
    let p_nl = decay_exponent(&w)?.slope;
    Ok((p_lin, p_nl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{sample_kdv_data, sample_szego_data};
    use crate::spectral::LatticeSpec;

    #[test]
    fn shells_for_256() {
        assert_eq!(upper_shells(256), vec![(16, 32), (32, 64), (64, 128), (128, 256)]);
        assert_eq!(upper_shells(16), vec![(4, 8), (8, 16)]);
    }

    #[test]
    fn exact_power_law_slope() {
        let lat = LatticeSpec::new(256, Symmetry::General).unwrap();
        let u = ModeVector::from_fn(lat, |n| Complex64::new(1.0 / bracket(n), 0.0)).unwrap();
        let fit = decay_exponent(&u).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.01, "{}", fit.slope);
    }

    #[test]
    fn zero_data_stays_zero() {
        let lat = LatticeSpec::new(16, Symmetry::RealMeanZero).unwrap();
        let u0 = ModeVector::zeros(lat);
        let tr = evolve_kdv(&u0, &IntegratorConfig::kdv(1e-4, 0.01)).unwrap();
        assert!(tr.states.iter().all(|s| s.is_zero()));
        let lat = LatticeSpec::new(16, Symmetry::AnalyticNonneg).unwrap();
        let tr = evolve_szego(&ModeVector::zeros(lat), &IntegratorConfig::szego(1e-3, 0.01)).unwrap();
        assert!(tr.states.iter().all(|s| s.is_zero()));
        assert!(matches!(smoothing_profile(&tr, 0.01, Flow::Szego), Err(LabError::NoNonlinearPart)));
    }

    #[test]
    fn config_validation() {
        let u0 = sample_kdv_data(16, 0.0, 1).unwrap().coeffs;
        assert!(evolve_kdv(&u0, &IntegratorConfig::kdv(1.0, 0.1)).is_err());
        assert!(evolve_kdv(&u0, &IntegratorConfig::szego(1e-6, 0.1)).is_err());
        assert!(evolve_kdv(&u0, &IntegratorConfig::kdv(1e-6, 1e-5).recording_every(0)).is_err());
        let s0 = sample_szego_data(16, 1.0, 1).unwrap().coeffs;
        assert!(evolve_kdv(&s0, &IntegratorConfig::kdv(1e-6, 1e-5)).is_err());
        assert!(evolve_szego(&u0, &IntegratorConfig::szego(1e-6, 1e-5)).is_err());
    }

    #[test]
    fn state_lookup() {
        let u0 = sample_szego_data(8, 1.0, 2).unwrap().coeffs;
        let tr = evolve_szego(&u0, &IntegratorConfig::szego(0.01, 0.1).recording_every(5)).unwrap();
        assert_eq!(tr.times.len(), 3);
        assert!(tr.state_at(0.05).is_ok());
        assert!(tr.state_at(0.07).is_err());
        assert!(tr.state_at(0.2).is_err());
    }
}
