//! Extraction of the `1/N` coefficient of the reduced moment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One value of `⟨D̃_k(N)⟩` with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub k: u32,
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedCoefficient {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub points: Vec<ScalingPoint>,
    /// Fitted `1/N` coefficient, once [`fit_subleading`] has run.
    pub fitted_c1: Option<FittedCoefficient>,
}

impl ScalingEstimate {
    pub fn new(points: Vec<ScalingPoint>) -> Self {
        Self {
            points,
            fitted_c1: None,
        }
    }

    pub fn push(&mut self, k: u32, n: u64, mean: f64, stderr: f64) {
        self.points.push(ScalingPoint { k, n, mean, stderr });
    }

    /// Distinct `N` values, ascending.
    pub fn n_grid(&self) -> Vec<u64> {
        let mut g: Vec<u64> = self.points.iter().map(|p| p.n).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FitModel {
    /// `⟨D̃⟩ − 1 = c₁/N`.
    #[default]
    Linear,
    /// `⟨D̃⟩ − 1 = c₁/N + c₂/N²`, with `c₂` discarded.
    WithQuadratic,
}

impl FitModel {
    fn params(self) -> usize {
        match self {
            FitModel::Linear => 1,
            FitModel::WithQuadratic => 2,
        }
    }
}

/// Weighted least squares of `⟨D̃_k(N)⟩ − 1` against `1/N` for rank `k`.
///
/// Points are weighted by `1/stderr²`. If every stderr is zero the fit is
/// unweighted and the reported uncertainty comes from the residuals.
pub fn fit_subleading(se: &ScalingEstimate, k: u32, model: FitModel) -> Result<FittedCoefficient> {
    let pts: Vec<&ScalingPoint> = se.points.iter().filter(|p| p.k == k).collect();
    let p = model.params();
    if pts.len() < p {
        return Err(Error::IllConditioned(format!(
            "{} points for {p} parameters",
            pts.len()
        )));
    }
    let n_min = pts.iter().map(|q| q.n).min().unwrap() as f64;
    let n_max = pts.iter().map(|q| q.n).max().unwrap() as f64;
    if n_max < 10.0 * n_min {
        return Err(Error::IllConditioned(format!(
            "N range [{n_min}, {n_max}] spans less than a decade"
        )));
    }
    let weighted = pts.iter().all(|q| q.stderr > 0.0);
    if !weighted && pts.iter().any(|q| q.stderr > 0.0) {
        return Err(Error::IllConditioned(
            "mixture of zero and nonzero standard errors".into(),
        ));
    }

    // columns in x = n_min/N keep the normal equations well scaled
    let mut a = [[0.0f64; 2]; 2];
    let mut b = [0.0f64; 2];
    let rows: Vec<([f64; 2], f64, f64)> = pts
        .iter()
        .map(|q| {
            let x = n_min / q.n as f64;
            let w = if weighted { q.stderr.powi(-2) } else { 1.0 };
            ([x, x * x], q.mean - 1.0, w)
        })
        .collect();
    for (x, y, w) in &rows {
        for i in 0..p {
            b[i] += w * x[i] * y;
            for j in 0..p {
                a[i][j] += w * x[i] * x[j];
            }
        }
    }
    let (beta, cov00) = if p == 1 {
        ([b[0] / a[0][0], 0.0], 1.0 / a[0][0])
    } else {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if !(det.abs() > 1e-12 * a[0][0] * a[1][1]) {
            return Err(Error::IllConditioned("design matrix is singular".into()));
        }
        let inv00 = a[1][1] / det;
        let inv01 = -a[0][1] / det;
        let inv11 = a[0][0] / det;
        ([inv00 * b[0] + inv01 * b[1], inv01 * b[0] + inv11 * b[1]], inv00)
    };
    let var = if weighted {
        cov00
    } else if rows.len() > p {
        let rss: f64 = rows
            .iter()
            .map(|(x, y, _)| {
                let fit = beta[0] * x[0] + if p == 2 { beta[1] * x[1] } else { 0.0 };
                (y - fit).powi(2)
            })
            .sum();
        rss / (rows.len() - p) as f64 * cov00
    } else {
        0.0
    };
    Ok(FittedCoefficient {
        value: beta[0] * n_min,
        stderr: var.sqrt() * n_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c1: f64, c2: f64, ns: &[u64]) -> ScalingEstimate {
        let mut se = ScalingEstimate::default();
        for &n in ns {
            let x = 1.0 / n as f64;
            se.push(1, n, 1.0 + c1 * x + c2 * x * x, 0.0);
        }
        se
    }

    #[test]
    fn exact_linear_recovery() {
        let se = synthetic(-0.375, 0.0, &[100, 1000, 10_000]);
        let f = fit_subleading(&se, 1, FitModel::Linear).unwrap();
        assert!((f.value + 0.375).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
    }

    #[test]
    fn quadratic_nuisance_is_absorbed() {
        let se = synthetic(-0.125, 0.7, &[25, 50, 100, 200, 400]);
        let f = fit_subleading(&se, 1, FitModel::WithQuadratic).unwrap();
        assert!((f.value + 0.125).abs() < 1e-10, "{f:?}");
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let se = synthetic(-0.375, 0.0, &[100, 200, 500]);
        assert!(matches!(
            fit_subleading(&se, 1, FitModel::Linear),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn weighted_stderr_scales_with_noise() {
        let mut se = ScalingEstimate::default();
        for &n in &[10u64, 100, 1000] {
            se.push(2, n, 1.0 - 0.2 / n as f64, 1e-3);
        }
        let f = fit_subleading(&se, 2, FitModel::Linear).unwrap();
        assert!((f.value + 0.2).abs() < 1e-12);
        // dominated by the N = 10 point: σ·N = 0.01
        assert!((f.stderr - 1e-3 / (1.0f64 + 0.01 + 1e-4).sqrt() * 10.0).abs() < 1e-9);
    }
}
