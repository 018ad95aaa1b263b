//! Logistic regression fit by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Any coefficient beyond this magnitude is treated as quasi-separation:
/// the fitted probabilities have saturated and larger values carry no
/// usable information for propensity weighting or matching.
pub const SEPARATION_CAP: f64 = 30.0;

#[derive(Clone, Debug)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Predicted probability, always strictly inside (0, 1).
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(x))
    }

    pub fn probability_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        let eta = self.intercept
            + self
                .coefficients
                .iter()
                .zip(columns)
                .map(|(c, col)| c * col[row])
                .sum::<f64>();
        sigmoid(eta)
    }
}

pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood of labels `w` under parameters
/// (`intercept`, `coefficients`) on a column-major feature matrix.
pub fn log_likelihood(
    columns: &[Vec<f64>],
    w: &[u8],
    intercept: f64,
    coefficients: &[f64],
) -> f64 {
    let n = w.len();
    let mut ll = 0.0;
    for i in 0..n {
        let eta = intercept
            + coefficients
                .iter()
                .zip(columns)
                .map(|(c, col)| c * col[i])
                .sum::<f64>();
        // log p = -log(1 + e^-eta), log (1-p) = -eta - log(1 + e^-eta)
        let log1p_exp = if eta > 0.0 {
            (-eta).exp().ln_1p()
        } else {
            -eta + eta.exp().ln_1p()
        };
        ll -= log1p_exp;
        if w[i] == 0 {
            ll -= eta;
        }
    }
    ll
}

/// Fit a logistic regression of the binary labels `w` on all columns by
/// Newton steps (IRLS) with step halving. Converged when the maximum
/// absolute gradient component is at most `tol`.
pub fn fit_logistic(
    columns: &[Vec<f64>],
    w: &[u8],
    max_iter: usize,
    tol: f64,
) -> Result<LogisticModel> {
    let n = w.len();
    let q = columns.len() + 1;
    if !w.iter().any(|&v| v == 1) || !w.iter().any(|&v| v == 0) {
        return Err(Error::EmptyArm {
            arm: if w.iter().any(|&v| v == 1) {
                "untreated"
            } else {
                "treated"
            },
        });
    }

    let mut beta = DVector::<f64>::zeros(q);
    let mut ll = log_likelihood(columns, w, beta[0], beta.as_slice().split_at(1).1);
    let mut grad = DVector::<f64>::zeros(q);
    let mut last_grad_norm = f64::INFINITY;

    for _iter in 0..max_iter {
        // Gradient and Hessian at beta.
        grad.fill(0.0);
        let mut hess = DMatrix::<f64>::zeros(q, q);
        for i in 0..n {
            let mut eta = beta[0];
            for (j, col) in columns.iter().enumerate() {
                eta += beta[j + 1] * col[i];
            }
            let p = sigmoid(eta);
            let resid = w[i] as f64 - p;
            let wt = (p * (1.0 - p)).max(1e-12);
            grad[0] += resid;
            hess[(0, 0)] += wt;
            for (j, col) in columns.iter().enumerate() {
                let xj = col[i];
                grad[j + 1] += resid * xj;
                hess[(j + 1, 0)] += wt * xj;
                for (k, colk) in columns.iter().enumerate().take(j + 1) {
                    hess[(j + 1, k + 1)] += wt * xj * colk[i];
                }
            }
        }
        for j in 0..q {
            for k in (j + 1)..q {
                hess[(j, k)] = hess[(k, j)];
            }
        }

        last_grad_norm = grad.amax();
        if last_grad_norm <= tol {
            return Ok(LogisticModel {
                intercept: beta[0],
                coefficients: beta.as_slice()[1..].to_vec(),
            });
        }

        let step = hess
            .clone()
            .cholesky()
            .map(|ch| ch.solve(&grad))
            .unwrap_or_else(|| {
                // Singular curvature: fall back to a ridge-damped solve.
                let mut damped = hess.clone();
                for j in 0..q {
                    damped[(j, j)] += 1e-8;
                }
                damped
                    .cholesky()
                    .map(|ch| ch.solve(&grad))
                    .unwrap_or_else(|| grad.clone())
            });

        // Step halving keeps the likelihood non-decreasing.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &beta + &step * scale;
            let cand_ll =
                log_likelihood(columns, w, candidate[0], candidate.as_slice().split_at(1).1);
            if cand_ll >= ll - 1e-12 {
                beta = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }

        if beta.amax() > SEPARATION_CAP {
            return Err(Error::QuasiSeparation {
                cap: SEPARATION_CAP,
            });
        }
    }

    if last_grad_norm <= tol {
        return Ok(LogisticModel {
            intercept: beta[0],
            coefficients: beta.as_slice()[1..].to_vec(),
        });
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        gradient: last_grad_norm,
        last_iterate: beta.as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn independent_labels_give_logit_of_rate() {
        let mut rng = crate::rng::RngSeed::new(21).rng();
        let n = 500;
        let columns: Vec<Vec<f64>> =
            vec![(0..n).map(|_| rng.random_range(-1.0..1.0)).collect()];
        // Exactly 40% treated, independent of x.
        let w: Vec<u8> = (0..n).map(|i| u8::from(i % 5 < 2)).collect();
        let m = fit_logistic(&columns, &w, 100, 1e-10).unwrap();
        let expected = (0.4f64 / 0.6).ln();
        assert!((m.intercept - expected).abs() < 0.3, "{}", m.intercept);
        // Slope SE is roughly 0.16 here; 3 SE keeps the check sharp but stable.
        assert!(m.coefficients[0].abs() < 0.5);
        // Score equation: mean fitted probability equals the treated rate.
        let mean_p: f64 = (0..n)
            .map(|i| m.probability_row(&columns, i))
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(mean_p, 0.4, epsilon = 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::RngSeed::new(77).rng();
        let n = 60;
        let columns: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let w: Vec<u8> = (0..n)
            .map(|i| u8::from(rng.random_range(0.0..1.0) < sigmoid(columns[0][i])))
            .collect();
        let point = [0.3, -0.7, 0.2];

        // Analytic gradient of the log-likelihood at `point`.
        let mut analytic = [0.0; 3];
        for i in 0..n {
            let eta = point[0] + point[1] * columns[0][i] + point[2] * columns[1][i];
            let r = w[i] as f64 - sigmoid(eta);
            analytic[0] += r;
            analytic[1] += r * columns[0][i];
            analytic[2] += r * columns[1][i];
        }

        let h = 1e-5;
        for j in 0..3 {
            let mut up = point;
            let mut dn = point;
            up[j] += h;
            dn[j] -= h;
            let f_up = log_likelihood(&columns, &w, up[0], &up[1..]);
            let f_dn = log_likelihood(&columns, &w, dn[0], &dn[1..]);
            let numeric = (f_up - f_dn) / (2.0 * h);
            let rel = (numeric - analytic[j]).abs() / analytic[j].abs().max(1.0);
            assert!(rel <= 1e-6, "component {j}: {numeric} vs {}", analytic[j]);
        }
    }

    #[test]
    fn saturated_binary_feature_recovers_cell_frequencies() {
        // x in {0,1}; P(w=1 | x=0) = 1/4, P(w=1 | x=1) = 3/5.
        let mut columns = vec![Vec::new()];
        let mut w = Vec::new();
        for _ in 0..3 {
            columns[0].push(0.0);
            w.push(0);
        }
        columns[0].push(0.0);
        w.push(1);
        for _ in 0..2 {
            columns[0].push(1.0);
            w.push(0);
        }
        for _ in 0..3 {
            columns[0].push(1.0);
            w.push(1);
        }
        let m = fit_logistic(&columns, &w, 200, 1e-10).unwrap();
        assert_relative_eq!(m.probability(&[0.0]), 0.25, epsilon = 1e-6);
        assert_relative_eq!(m.probability(&[1.0]), 0.6, epsilon = 1e-6);
    }

    #[test]
    fn separation_is_detected() {
        let columns = vec![vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]];
        let w = vec![0, 0, 0, 1, 1, 1];
        let err = fit_logistic(&columns, &w, 500, 1e-12).unwrap_err();
        assert!(matches!(err, Error::QuasiSeparation { .. }), "unexpected {err:?}");
    }

    #[test]
    fn deterministic_given_data() {
        let columns = vec![vec![0.1, 0.4, -0.2, 0.9, -0.5, 0.3]];
        let w = vec![0, 1, 0, 1, 1, 0];
        let a = fit_logistic(&columns, &w, 100, 1e-9).unwrap();
        let b = fit_logistic(&columns, &w, 100, 1e-9).unwrap();
        assert_eq!(a.intercept, b.intercept);
        assert_eq!(a.coefficients, b.coefficients);
    }
}
