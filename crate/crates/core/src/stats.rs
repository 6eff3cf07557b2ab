//! Monte Carlo summaries and least-squares fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungStats {
    pub n_max: usize,
    pub trials: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub variance: f64,
    pub std_error: f64,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl RungStats {
    pub fn from_samples(n_max: usize, samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return invalid("rung has no samples");
        }
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            n_max,
            trials: samples.len(),
            mean,
            variance,
            std_error: (variance / k).sqrt(),
            min: sorted[0],
            median: median_sorted(&sorted),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// `y ≈ slope · x + intercept`; `residual` is the RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return invalid("fit inputs differ in length");
    }
    if x.len() < 2 {
        return invalid("fit needs at least two points");
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("fit abscissae are all equal");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        residual,
    })
}

/// `y ≈ c ln N + d + e N^{-1/2}`, the leading terms of a logarithmically
/// divergent lattice sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthFit {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub residual: f64,
}

impl LogGrowthFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.c * n.ln() + self.d + self.e / n.sqrt()
    }
}

pub fn log_growth_fit(n: &[f64], y: &[f64]) -> Result<LogGrowthFit> {
    if n.len() != y.len() {
        return invalid("fit inputs differ in length");
    }
    if n.len() < 3 {
        return invalid("log-growth fit needs at least three points");
    }
    if n.iter().any(|&v| !(v > 0.0)) {
        return invalid("log-growth fit needs positive abscissae");
    }
    let rows: Vec<[f64; 3]> = n.iter().map(|&v| [v.ln(), 1.0, 1.0 / v.sqrt()]).collect();
    let mut a = [[0.0; 4]; 3];
    for (r, &yv) in rows.iter().zip(y) {
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
            a[i][3] += r[i] * yv;
        }
    }
    // Gaussian elimination with partial pivoting on the normal equations
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            return invalid("log-growth fit is singular");
        }
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let (c, d, e) = (a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]);
    let residual = (rows
        .iter()
        .zip(y)
        .map(|(r, yv)| (yv - c * r[0] - d - e * r[2]).powi(2))
        .sum::<f64>()
        / n.len() as f64)
        .sqrt();
    Ok(LogGrowthFit { c, d, e, residual })
}

/// Median of an already sorted slice (mean of the middle pair for even length).
pub fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    median_sorted(&v)
}

/// Per-rung statistics plus a fitted growth model `value ≈ slope · ln N + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub rungs: Vec<RungStats>,
    pub fit: Option<LinearFit>,
    /// `mean(last rung) / mean(second-to-last rung)`.
    pub plateau_ratio: Option<f64>,
}

impl StatSummary {
    /// `samples[r]` holds the per-trial values of rung `r`.
    pub fn from_rungs(ladder: &[usize], samples: &[Vec<f64>]) -> Result<Self> {
        if ladder.len() != samples.len() {
            return invalid("ladder and sample table differ in length");
        }
        let rungs = ladder
            .iter()
            .zip(samples)
            .map(|(&n, s)| RungStats::from_samples(n, s))
            .collect::<Result<Vec<_>>>()?;
        let fit = if rungs.len() >= 2 {
            let x: Vec<f64> = rungs.iter().map(|r| (r.n_max as f64).ln()).collect();
            let y: Vec<f64> = rungs.iter().map(|r| r.mean).collect();
            linear_fit(&x, &y).ok()
        } else {
            None
        };
        let plateau_ratio = match rungs.as_slice() {
            [.., a, b] => Some(b.mean / a.mean),
            _ => None,
        };
        Ok(Self {
            rungs,
            fit,
            plateau_ratio,
        })
    }

    pub fn means(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.mean).collect()
    }
}

pub fn check_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() {
        return invalid("empty lattice ladder");
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("lattice ladder must be strictly increasing");
    }
    if ladder[0] == 0 {
        return invalid("ladder entries must be positive");
    }
    Ok(())
}
