//! Library results against independent brute-force or closed-form oracles.

use dispersion_lab::evolve::{
    evolve_kdv, evolve_szego, kdv_dt_max, reflect, recommended_dt, smoothing_profile, Flow, IntegratorConfig,
};
use dispersion_lab::kdv::{
    kdv_nonlinearity, linear_flow, paired_sum_expectation, second_iterate_closed_form, second_iterate_quadrature,
    truncation_convergence,
};
use dispersion_lab::random::{
    dyadic_average, gaussian, sample_kdv_data, sample_szego_data, tail_statistic, trial_seed, GaussianDraw, Law,
};
use dispersion_lab::spectral::{convolve, sobolev_norm, to_physical};
use dispersion_lab::szego::{szego_trilinear, wick_expectation_exact};
use dispersion_lab::xsb::{cutoff_eta, xsb_norm, ysb_norm, SpaceTimeField, TimeWindow};
use dispersion_lab::{LatticeSpec, ModeVector, Symmetry};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel_err(a: &ModeVector, b: &ModeVector) -> f64 {
    sobolev_norm(&a.sub(b).unwrap(), 0.0) / sobolev_norm(a, 0.0).max(f64::MIN_POSITIVE)
}

fn general(n_max: usize, seed: u64) -> ModeVector {
    let lat = LatticeSpec::new(n_max, Symmetry::General).unwrap();
    ModeVector::from_fn(lat, |n| gaussian(seed, (n + n_max as i64) as u64)).unwrap()
}

#[test]
fn convolution_matches_double_sum() {
    for (n_max, seed) in [(5usize, 1u64), (40, 2), (64, 3), (100, 4)] {
        let u = general(n_max, seed);
        let v = general(n_max, seed + 100);
        let got = convolve(&u, &v).unwrap();
        let nm = n_max as i64;
        let want = ModeVector::from_fn(u.lattice(), |n| {
            let mut acc = c(0.0, 0.0);
            for n1 in -nm..=nm {
                acc += u.get(n1) * v.get(n - n1);
            }
            acc
        })
        .unwrap();
        assert!(rel_err(&want, &got) < 1e-12, "n_max = {n_max}");
    }
}

#[test]
fn two_cos_nonlinearity_by_hand() {
    let lat = LatticeSpec::new(4, Symmetry::RealMeanZero).unwrap();
    let u = ModeVector::from_fn(lat, |n| if n.abs() == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
    let sq = convolve(&u, &u).unwrap();
    assert!((sq.get(0) - c(2.0, 0.0)).norm() < 1e-15);
    assert!((sq.get(2) - c(1.0, 0.0)).norm() < 1e-15);
    let nl = kdv_nonlinearity(&u).unwrap();
    assert!((nl.get(2) - c(0.0, -1.0)).norm() < 1e-15);
    assert!((nl.get(-2) - c(0.0, 1.0)).norm() < 1e-15);
    assert_eq!(nl.get(0), c(0.0, 0.0));
    assert!(nl.get(1).norm() < 1e-15 && nl.get(3).norm() < 1e-15);
}

#[test]
fn trilinear_matches_triple_sum() {
    let n_max = 8usize;
    let lat = LatticeSpec::new(n_max, Symmetry::AnalyticNonneg).unwrap();
    let make = |seed: u64| {
        ModeVector::from_fn(lat, |n| if n < 0 { c(0.0, 0.0) } else { gaussian(seed, n as u64) }).unwrap()
    };
    let (u1, u2, u3) = (make(11), make(12), make(13));
    let got = szego_trilinear(&u1, &u2, &u3).unwrap();
    let nm = n_max as i64;
    let want = ModeVector::from_fn(lat, |n| {
        let mut acc = c(0.0, 0.0);
        if n < 0 {
            return acc;
        }
        for a in 0..=nm {
            for b in 0..=nm {
                let d = n - a + b;
                if (0..=nm).contains(&d) {
                    acc += u1.get(a) * u2.get(b).conj() * u3.get(d);
                }
            }
        }
        acc
    })
    .unwrap();
    assert!(rel_err(&want, &got) < 1e-11);
}

/// Second iterate by the explicit triad sum with the time integral done by hand.
fn triad_sum_second_iterate(u0: &ModeVector, t: f64) -> ModeVector {
    let nm = u0.n_max() as i64;
    ModeVector::from_fn(u0.lattice(), |n| {
        if n == 0 {
            return c(0.0, 0.0);
        }
        let mut acc = c(0.0, 0.0);
        for n1 in -nm..=nm {
            let n2 = n - n1;
            if n1 == 0 || n2 == 0 || n2.abs() > nm {
                continue;
            }
            // −½ i n ∫₀ᵗ e^{i n³ (t−t')} e^{i (n₁³+n₂³) t'} dt'
            let omega = (n1.pow(3) + n2.pow(3) - n.pow(3)) as f64;
            let integral = (Complex64::from_polar(1.0, omega * t) - 1.0) / c(0.0, omega);
            acc += u0.get(n1) * u0.get(n2) * integral;
        }
        acc * c(0.0, -0.5 * n as f64) * Complex64::from_polar(1.0, (n as f64).powi(3) * t)
    })
    .unwrap()
}

#[test]
fn closed_form_matches_triad_sum() {
    for (n_max, alpha, t) in [(8usize, 0.0, 0.3), (16, 0.0, 0.3), (24, 0.5, 1.0)] {
        let u0 = sample_kdv_data(n_max, alpha, 77).unwrap().coeffs;
        let a = second_iterate_closed_form(&u0, t).unwrap();
        let b = triad_sum_second_iterate(&u0, t);
        assert!(rel_err(&b, &a) < 1e-13, "n_max = {n_max}: {}", rel_err(&b, &a));
    }
}

#[test]
fn simpson_converges_at_fourth_order() {
    let u0 = sample_kdv_data(16, 0.0, 5).unwrap().coeffs;
    let exact = second_iterate_closed_form(&u0, 0.3).unwrap();
    let errs: Vec<f64> = [2048, 4096, 8192]
        .iter()
        .map(|&k| rel_err(&exact, &second_iterate_quadrature(&u0, 0.3, k).unwrap()))
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((14.0..18.0).contains(&ratio), "refinement ratio {ratio}");
    }
}

#[test]
fn paired_sum_expectation_matches_moment_sum() {
    for n in [1usize, 5, 8, 50] {
        let mut e = 0.0;
        for i in 1..=n {
            for j in 1..=n {
                e += 4.0 * if i == j { 8.0 } else { 4.0 } / (i * j) as f64;
            }
        }
        assert!((paired_sum_expectation(n) - e).abs() < 1e-12 * e);
    }
}

/// `E[g_{a₁} g_{a₂} g_{a₃} ḡ_{b₁} ḡ_{b₂} ḡ_{b₃}]` for independent complex
/// Gaussians with `E|g|² = 2`: the permanent of the pairing matrix.
fn sextic_moment(a: [usize; 3], b: [usize; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .filter(|p| (0..3).all(|i| a[i] == b[p[i]]))
        .count() as f64
        * 8.0
}

/// `E ‖Π(|u|²u)‖²_{H^s}` by enumerating every frequency sextuple.
fn wick_brute_force(alpha: f64, s: f64, n_max: usize) -> f64 {
    let w: Vec<f64> = (0..=n_max)
        .map(|n| if n == 0 { 1.0 } else { 1.0 / (1.0 + (n as f64).powf(2.0 * alpha)) }.sqrt())
        .collect();
    let nm = n_max as i64;
    let mut total = 0.0;
    for n in 0..=nm {
        let weight = (1.0 + n as f64).powf(2.0 * s);
        for n1 in 0..=nm {
            for n2 in 0..=nm {
                let n3 = n - n1 + n2;
                if !(0..=nm).contains(&n3) {
                    continue;
                }
                for m1 in 0..=nm {
                    for m2 in 0..=nm {
                        let m3 = n - m1 + m2;
                        if !(0..=nm).contains(&m3) {
                            continue;
                        }
                        // ĉ(n) conj(ĉ(n)) with ĉ(n) = Σ û(n₁) conj(û(n₂)) û(n₃)
                        let idx = |k: i64| k as usize;
                        let mom = sextic_moment([idx(n1), idx(n3), idx(m2)], [idx(n2), idx(m1), idx(m3)]);
                        if mom == 0.0 {
                            continue;
                        }
                        let amp = w[idx(n1)] * w[idx(n2)] * w[idx(n3)] * w[idx(m1)] * w[idx(m2)] * w[idx(m3)];
                        total += weight * amp * mom;
                    }
                }
            }
        }
    }
    total
}

#[test]
fn wick_matches_brute_force_enumeration() {
    for (alpha, s, n) in [(1.0, 0.5, 0usize), (1.0, 0.5, 3), (0.5, 0.25, 4), (1.0, -0.3, 5), (0.0, 0.0, 2)] {
        let exact = wick_expectation_exact(alpha, s, n).unwrap();
        let brute = wick_brute_force(alpha, s, n);
        assert!(
            (exact.exact_expectation - brute).abs() < 1e-10 * brute,
            "alpha {alpha} s {s} n {n}: {} vs {brute}",
            exact.exact_expectation
        );
        let sum = exact.contributions.total();
        assert!((sum - exact.exact_expectation).abs() <= 1e-10 * sum);
        assert!(exact.contributions.three_pair >= 0.0);
        assert_eq!(exact.contributions.no_pair, 0.0);
    }
}

#[test]
fn wick_matches_monte_carlo_at_small_lattices() {
    for n in [4usize, 8, 16] {
        let exact = wick_expectation_exact(1.0, 0.5, n).unwrap().exact_expectation;
        let samples: Vec<f64> = (0..10_000)
            .map(|k| {
                let u = sample_szego_data(n, 1.0, trial_seed(99, k)).unwrap().coeffs;
                sobolev_norm(&szego_trilinear(&u, &u, &u).unwrap(), 0.5).powi(2)
            })
            .collect();
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let se = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "n {n}: {mean} ± {se} vs {exact}");
    }
}

#[test]
fn gaussian_second_moment() {
    let m: f64 = (0..10_000).map(|k| gaussian(trial_seed(3, k), 5).norm_sqr()).sum::<f64>() / 1e4;
    assert!((1.9..=2.1).contains(&m), "{m}");
}

#[test]
fn kdv_l2_expectation_at_alpha_one() {
    let n_max = 32;
    let want: f64 = 2.0 * (1..=n_max).map(|n| 2.0 / (n * n) as f64).sum::<f64>();
    let got: f64 = (0..1000)
        .map(|k| sobolev_norm(&sample_kdv_data(n_max, 1.0, trial_seed(4, k)).unwrap().coeffs, 0.0).powi(2))
        .sum::<f64>()
        / 1000.0;
    assert!((got / want - 1.0).abs() < 0.05, "{got} vs {want}");
}

#[test]
fn szego_mode_variance() {
    let got: f64 = (0..1000)
        .map(|k| sample_szego_data(8, 1.0, trial_seed(5, k)).unwrap().coeffs.get(4).norm_sqr())
        .sum::<f64>()
        / 1000.0;
    let want = 2.0 / 17.0;
    assert!((got / want - 1.0).abs() < 0.10, "{got} vs {want}");
}

#[test]
fn mode_correlations_vanish() {
    let k = 10_000;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..k {
        let seed = trial_seed(6, i);
        let (x, y) = (gaussian(seed, 3).re, gaussian(seed, 7).re);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    let corr = sxy / (sxx * syy).sqrt();
    assert!(corr.abs() < 0.05, "{corr}");
}

#[test]
fn dyadic_averages() {
    let stub = GaussianDraw::from_gaussians(Law::Kdv, 0.0, 0, vec![c(1.0, 1.0); 65]).unwrap();
    for j in 0..=5 {
        assert!((dyadic_average(&stub, j).unwrap() - 2.0).abs() < 1e-15);
    }
    assert!(dyadic_average(&stub, 6).is_err());
    let d = sample_kdv_data(8, 0.0, 1).unwrap();
    assert_eq!(dyadic_average(&d, 0).unwrap(), d.gaussians[1].norm_sqr());
    let mean: f64 = (0..64)
        .map(|k| dyadic_average(&sample_kdv_data(2048, 0.0, trial_seed(8, k)).unwrap(), 10).unwrap())
        .sum::<f64>()
        / 64.0;
    assert!((1.8..=2.2).contains(&mean), "{mean}");
}

#[test]
fn tail_statistic_stubs() {
    let mut g = vec![c(0.0, 0.0); 9];
    let zero = GaussianDraw::from_gaussians(Law::Kdv, 0.0, 0, g.clone()).unwrap();
    assert_eq!(tail_statistic(&zero, 0.3).unwrap(), 0.0);
    g[1] = c(4.0, 0.0);
    let one = GaussianDraw::from_gaussians(Law::Kdv, 0.0, 0, g).unwrap();
    for eps in [0.1, 0.5, 2.0] {
        assert!((tail_statistic(&one, eps).unwrap() - 4.0 / 2f64.powf(eps)).abs() < 1e-14);
    }
}

#[test]
fn tail_percentile_grows_slower_than_power() {
    let eps = 0.5;
    let p99 = |n: usize| {
        let mut v: Vec<f64> = (0..1000)
            .map(|k| tail_statistic(&sample_kdv_data(n, 0.0, trial_seed(9, k)).unwrap(), eps).unwrap())
            .collect();
        v.sort_by(f64::total_cmp);
        v[989]
    };
    let (a, b) = (p99(256), p99(512));
    assert!(a.is_finite() && b / a < 2f64.powf(eps));
}

#[test]
fn kdv_draws_are_real() {
    let d = sample_kdv_data(64, 0.2, 12).unwrap();
    let x = to_physical(&d.coeffs, 256).unwrap();
    assert!(x.iter().all(|v| v.im.abs() < 1e-12));
}

#[test]
fn single_mode_szego_rotates() {
    let z = c(0.8, -0.6) * 1.3;
    let lat = LatticeSpec::new(4, Symmetry::AnalyticNonneg).unwrap();
    let u0 = ModeVector::from_fn(lat, |n| if n == 0 { z } else { c(0.0, 0.0) }).unwrap();
    let t = 0.7;
    let tr = evolve_szego(&u0, &IntegratorConfig::szego(1e-3, t)).unwrap();
    let want = z * Complex64::from_polar(1.0, -z.norm_sqr() * t);
    let got = tr.last().1.get(0);
    assert!((got - want).norm() < 1e-10, "{got} vs {want}");
    assert!(tr.states.iter().all(|s| (1..=4).all(|k| s.get(-k) == c(0.0, 0.0))));
}

#[test]
fn small_amplitude_is_linear_to_second_order() {
    let base = sample_kdv_data(32, 1.0, 3).unwrap().coeffs;
    let dev = |eps: f64| {
        let u0 = base.scale(c(eps, 0.0));
        let cfg = IntegratorConfig::kdv(kdv_dt_max(&u0), 0.05);
        let tr = evolve_kdv(&u0, &cfg).unwrap();
        sobolev_norm(&tr.last().1.sub(&linear_flow(&u0, 0.05).unwrap()).unwrap(), 0.0)
    };
    let ratio = dev(1e-2) / dev(5e-3);
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
}

#[test]
fn kdv_time_reversal() {
    let u0 = sample_kdv_data(64, 0.5, 21).unwrap().coeffs;
    let t = 0.02;
    let cfg = IntegratorConfig::kdv(recommended_dt(&u0, Flow::Kdv) / 16.0, t);
    let forward = evolve_kdv(&u0, &cfg).unwrap();
    let ut = forward.last().1.clone();
    // u(x, t) solves KdV iff u(−x, −t) does
    let back = evolve_kdv(&reflect(&ut).with_symmetry(Symmetry::RealMeanZero).unwrap(), &cfg).unwrap();
    let recovered = reflect(back.last().1).with_symmetry(Symmetry::RealMeanZero).unwrap();
    assert!(rel_err(&u0, &recovered) < 1e-8, "{}", rel_err(&u0, &recovered));
}

fn self_convergence(flow: Flow) -> f64 {
    let (u0, dt, t) = match flow {
        Flow::Kdv => {
            let u0 = sample_kdv_data(32, 0.5, 8).unwrap().coeffs;
            let dt = kdv_dt_max(&u0) * 4.0;
            (u0, dt, 0.01)
        }
        Flow::Szego => (sample_szego_data(32, 1.0, 8).unwrap().coeffs, 0.02, 0.4),
    };
    let solve = |h: f64| match flow {
        Flow::Kdv => evolve_kdv(&u0, &IntegratorConfig::kdv(h, t)),
        Flow::Szego => evolve_szego(&u0, &IntegratorConfig::szego(h, t)),
    };
    let guard = match flow {
        Flow::Kdv => kdv_dt_max(&u0),
        Flow::Szego => dispersion_lab::evolve::szego_dt_max(&u0),
    };
    let dt = dt.min(guard);
    let a = solve(dt).unwrap().last().1.clone();
    let b = solve(dt / 2.0).unwrap().last().1.clone();
    let c4 = solve(dt / 4.0).unwrap().last().1.clone();
    sobolev_norm(&a.sub(&b).unwrap(), 0.0) / sobolev_norm(&b.sub(&c4).unwrap(), 0.0)
}

#[test]
fn rk4_order() {
    for flow in [Flow::Kdv, Flow::Szego] {
        let r = self_convergence(flow);
        assert!((13.0..19.0).contains(&r), "{flow:?}: {r}");
    }
}

#[test]
fn smoothing_needs_a_nonlinear_part() {
    let lat = LatticeSpec::new(64, Symmetry::RealMeanZero).unwrap();
    let tr = evolve_kdv(&ModeVector::zeros(lat), &IntegratorConfig::kdv(1e-5, 1e-3)).unwrap();
    assert!(smoothing_profile(&tr, 1e-3, Flow::Kdv).is_err());
}

#[test]
fn truncation_gap_behaviour() {
    let cfg = IntegratorConfig::kdv(1e-5, 2e-3).recording_every(50);
    assert_eq!(truncation_convergence(0.0, -0.5, 32, 32, 4, &cfg).unwrap(), 0.0);
    for seed in 0..3 {
        let g: Vec<f64> = [4usize, 8, 16]
            .iter()
            .map(|&m| truncation_convergence(0.0, -0.5, 32, m, seed, &cfg).unwrap())
            .collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]), "{g:?}");
    }
}

/// `û(n, τ_j)` by the explicit O(m²) DFT.
fn xsb_direct(f: &SpaceTimeField, s: f64, b: f64, l1: bool) -> f64 {
    let w = f.window();
    let m = w.samples;
    let nm = f.lattice().n_max as i64;
    let dt = w.dt();
    let mut total = 0.0;
    for (row, n) in (-nm..=nm).enumerate() {
        let vals = &f.values()[row * m..(row + 1) * m];
        let n3 = (n as f64).powi(3);
        let mut inner = 0.0;
        for j in 0..m {
            let jj = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
            let tau = 2.0 * std::f64::consts::PI * jj / (m as f64 * dt);
            let mut hat = c(0.0, 0.0);
            for (k, v) in vals.iter().enumerate() {
                hat += v * Complex64::from_polar(dt, -tau * w.time(k));
            }
            let sigma = 1.0 + (tau - n3).abs();
            inner += if l1 {
                sigma.powf(b) * hat.norm()
            } else {
                sigma.powf(2.0 * b) * hat.norm_sqr()
            };
        }
        let measure = 1.0 / (m as f64 * dt);
        let inner = inner * measure;
        total += (1.0 + n.abs() as f64).powf(2.0 * s) * if l1 { inner * inner } else { inner };
    }
    total.sqrt()
}

#[test]
fn xsb_matches_direct_sum() {
    let u0 = sample_kdv_data(3, 0.0, 14).unwrap().coeffs;
    let w = TimeWindow::for_lattice(0.3, 3, 1).unwrap();
    let f = SpaceTimeField::free_solution(&u0, w, 0.3).unwrap();
    for (s, b) in [(0.0, 0.0), (-0.5, 0.5), (0.3, -0.4)] {
        let a = xsb_norm(&f, s, b);
        let d = xsb_direct(&f, s, b, false);
        assert!((a - d).abs() < 1e-10 * d, "{a} vs {d}");
        let a = ysb_norm(&f, s, b);
        let d = xsb_direct(&f, s, b, true);
        assert!((a - d).abs() < 1e-10 * d, "{a} vs {d}");
    }
}

#[test]
fn xsb_zero_is_discrete_l2() {
    let u0 = sample_kdv_data(8, 0.0, 15).unwrap().coeffs;
    let w = TimeWindow::for_lattice(0.2, 8, 1).unwrap();
    let f = SpaceTimeField::free_solution(&u0, w, 0.2).unwrap();
    let l2 = (f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * w.dt()).sqrt();
    assert!((xsb_norm(&f, 0.0, 0.0) - l2).abs() < 1e-12 * l2);
}

#[test]
fn windowed_plane_wave_concentrates() {
    for k in [1i64, 2] {
        let t = 50.0;
        let w = TimeWindow::for_lattice(t, 2, 8).unwrap();
        let lat = LatticeSpec::new(2, Symmetry::General).unwrap();
        let eta = cutoff_eta(t, &w).unwrap();
        let values = (-2..=2i64)
            .flat_map(|n| {
                let eta = &eta;
                (0..w.samples).map(move |i| {
                    if n == k {
                        Complex64::from_polar(eta[i], (k as f64).powi(3) * w.time(i))
                    } else {
                        c(0.0, 0.0)
                    }
                })
            })
            .collect();
        let f = SpaceTimeField::new(lat, w, values).unwrap();
        let v: Vec<f64> = [-0.5, 0.0, 0.5].iter().map(|&b| xsb_norm(&f, 0.0, b)).collect();
        assert!(v[2] / v[0] - 1.0 < 0.05, "{v:?}");
    }
}
