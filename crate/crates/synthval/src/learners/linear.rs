//! Ordinary and weighted least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A fitted linear model. Prediction is `intercept + dot(coefficients, x)`
/// where `x` matches the design columns described by `feature_map`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Labels of the design columns after the intercept.
    pub feature_map: Vec<String>,
    /// Set when the design was rank deficient and the minimum-norm
    /// pseudoinverse solution was returned.
    pub rank_deficient: bool,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

/// Fit `y ~ intercept + design columns` over the given rows by (weighted)
/// least squares. `design` is column-major; `y` and `weights` are indexed
/// by row id. A rank-deficient design is solved via the SVD pseudoinverse
/// and flagged rather than rejected.
pub fn fit_ols(
    design: &[Vec<f64>],
    rows: &[usize],
    y: &[f64],
    weights: Option<&[f64]>,
    feature_map: Vec<String>,
) -> Result<LinearModel> {
    let n = rows.len();
    let q = design.len() + 1;
    if n < q {
        return Err(Error::InvalidParameter(format!(
            "{n} rows is fewer than {q} design columns"
        )));
    }
    if let Some(w) = weights {
        let mut sum = 0.0;
        for &r in rows {
            if !(w[r] >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "negative or NaN weight at row {r}"
                )));
            }
            sum += w[r];
        }
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
    }

    // Scale rows by sqrt(weight) and solve the plain least-squares problem.
    let mut a = DMatrix::<f64>::zeros(n, q);
    let mut b = DVector::<f64>::zeros(n);
    for (i, &r) in rows.iter().enumerate() {
        let s = weights.map_or(1.0, |w| w[r]).sqrt();
        a[(i, 0)] = s;
        for (j, col) in design.iter().enumerate() {
            a[(i, j + 1)] = s * col[r];
        }
        b[i] = s * y[r];
    }

    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max_sv * n.max(q) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let beta = svd
        .solve(&b, eps)
        .map_err(|e| Error::InvalidParameter(format!("svd solve failed: {e}")))?;

    Ok(LinearModel {
        intercept: beta[0],
        coefficients: beta.as_slice()[1..].to_vec(),
        feature_map,
        rank_deficient: rank < q,
    })
}
