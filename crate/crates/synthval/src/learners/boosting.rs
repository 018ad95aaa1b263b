//! Least-squares gradient tree boosting.
//!
//! The initial value is the training mean; each stage fits a regression
//! tree to the current residuals and adds its leaf means scaled by the
//! shrinkage factor. With squared-error loss the residuals are exactly the
//! negative gradient, so the training error never increases with stages.

use crate::error::{Error, Result};
use crate::learners::tree::{fit_tree, RegressionTree};

#[derive(Clone, Debug, PartialEq)]
pub struct GbtParams {
    pub n_stages: usize,
    /// Learning rate in (0, 1].
    pub shrinkage: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_stages: 200,
            shrinkage: 0.1,
            max_depth: 3,
            min_leaf: 10,
        }
    }
}

/// One boosting stage: tree structure plus its (already scaled) leaf values.
#[derive(Clone, Debug)]
pub struct BoostStage {
    pub tree: RegressionTree,
    pub leaf_values: Vec<f64>,
}

impl BoostStage {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf_values[self.tree.leaf_of(x)]
    }

    pub fn predict_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        self.leaf_values[self.tree.leaf_of_row(columns, row)]
    }
}

#[derive(Clone, Debug)]
pub struct BoostedModel {
    pub initial_value: f64,
    pub stages: Vec<BoostStage>,
    pub shrinkage: f64,
}

impl BoostedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.initial_value + self.stages.iter().map(|s| s.predict(x)).sum::<f64>()
    }

    pub fn predict_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        self.initial_value
            + self
                .stages
                .iter()
                .map(|s| s.predict_row(columns, row))
                .sum::<f64>()
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }
}

/// Incremental booster: lets callers advance one stage at a time, which is
/// how cross-validation evaluates every stage-count checkpoint from a
/// single fit (the first m stages of a longer fit are exactly the m-stage
/// fit).
pub struct GbtFitter<'a> {
    columns: &'a [Vec<f64>],
    rows: &'a [usize],
    params: GbtParams,
    initial_value: f64,
    /// Residual per row id for rows in the training set.
    residuals: Vec<f64>,
    stages: Vec<BoostStage>,
}

impl<'a> GbtFitter<'a> {
    pub fn new(
        columns: &'a [Vec<f64>],
        rows: &'a [usize],
        targets: &[f64],
        params: GbtParams,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty training data".into()));
        }
        if !(params.shrinkage > 0.0 && params.shrinkage <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrinkage {} outside (0, 1]",
                params.shrinkage
            )));
        }
        let initial_value = rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64;
        let n_total = columns.first().map_or(targets.len(), |c| c.len());
        let mut residuals = vec![0.0; n_total];
        for &r in rows {
            residuals[r] = targets[r] - initial_value;
        }
        Ok(GbtFitter {
            columns,
            rows,
            params,
            initial_value,
            residuals,
            stages: Vec::new(),
        })
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn stages(&self) -> &[BoostStage] {
        &self.stages
    }

    /// Current residuals (equal to target minus current prediction).
    pub fn residual(&self, row: usize) -> f64 {
        self.residuals[row]
    }

    /// Fit one more stage and return it.
    pub fn step(&mut self) -> Result<&BoostStage> {
        let tree = fit_tree(
            self.columns,
            self.rows,
            &self.residuals,
            None,
            self.params.max_depth,
            self.params.min_leaf,
        )?;
        let leaf_values: Vec<f64> = tree
            .training_leaf_values()
            .iter()
            .map(|v| v * self.params.shrinkage)
            .collect();
        for &r in self.rows {
            self.residuals[r] -= leaf_values[tree.leaf_of_row(self.columns, r)];
        }
        self.stages.push(BoostStage { tree, leaf_values });
        Ok(self.stages.last().unwrap())
    }

    pub fn into_model(self) -> BoostedModel {
        BoostedModel {
            initial_value: self.initial_value,
            stages: self.stages,
            shrinkage: self.params.shrinkage,
        }
    }
}

/// Fit a boosted model over the given rows (targets indexed by row id).
pub fn fit_gbt(
    columns: &[Vec<f64>],
    rows: &[usize],
    targets: &[f64],
    params: &GbtParams,
) -> Result<BoostedModel> {
    let mut fitter = GbtFitter::new(columns, rows, targets, params.clone())?;
    for _ in 0..params.n_stages {
        fitter.step()?;
    }
    Ok(fitter.into_model())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn sse(model: &BoostedModel, columns: &[Vec<f64>], y: &[f64]) -> f64 {
        (0..y.len())
            .map(|i| (y[i] - model.predict_row(columns, i)).powi(2))
            .sum()
    }

    #[test]
    fn zero_stages_predicts_the_mean() {
        let columns = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let y = vec![1.0, 5.0, 2.0, 4.0];
        let params = GbtParams {
            n_stages: 0,
            ..GbtParams::default()
        };
        let model = fit_gbt(&columns, &[0, 1, 2, 3], &y, &params).unwrap();
        assert_eq!(model.predict(&[10.0]), 3.0);
    }

    #[test]
    fn interpolates_with_unit_shrinkage() {
        let mut rng = crate::rng::RngSeed::new(31).rng();
        let n = 20;
        let columns: Vec<Vec<f64>> = vec![(0..n).map(|i| i as f64 + 0.0001).collect()];
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let params = GbtParams {
            n_stages: 50,
            shrinkage: 1.0,
            max_depth: 8,
            min_leaf: 1,
        };
        let rows: Vec<usize> = (0..n).collect();
        let model = fit_gbt(&columns, &rows, &y, &params).unwrap();
        let err = sse(&model, &columns, &y);
        assert!(err <= 1e-6, "training sse {err}");
    }

    #[test]
    fn training_error_is_monotone_in_stages() {
        let mut rng = crate::rng::RngSeed::new(8).rng();
        let n = 60;
        let columns: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| (columns[0][i] * 3.0).sin() + 0.2 * rng.random_range(-1.0..1.0))
            .collect();
        let rows: Vec<usize> = (0..n).collect();
        let mut fitter = GbtFitter::new(
            &columns,
            &rows,
            &y,
            GbtParams {
                n_stages: 30,
                shrinkage: 0.3,
                max_depth: 2,
                min_leaf: 2,
            },
        )
        .unwrap();
        let mut prev: f64 = rows.iter().map(|&r| fitter.residual(r).powi(2)).sum();
        for _ in 0..30 {
            fitter.step().unwrap();
            let cur: f64 = rows.iter().map(|&r| fitter.residual(r).powi(2)).sum();
            assert!(cur <= prev + 1e-12, "sse rose from {prev} to {cur}");
            prev = cur;
        }
    }

    #[test]
    fn residuals_match_target_minus_prediction() {
        let mut rng = crate::rng::RngSeed::new(14).rng();
        let n = 40;
        let columns: Vec<Vec<f64>> = vec![(0..n).map(|_| rng.random_range(0.0..1.0)).collect()];
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let rows: Vec<usize> = (0..n).collect();
        let mut fitter =
            GbtFitter::new(&columns, &rows, &y, GbtParams::default()).unwrap();
        for _ in 0..10 {
            fitter.step().unwrap();
        }
        let model_sofar = BoostedModel {
            initial_value: fitter.initial_value(),
            stages: fitter.stages().to_vec(),
            shrinkage: 0.1,
        };
        for &r in &rows {
            let direct = y[r] - model_sofar.predict_row(&columns, r);
            assert!(
                (direct - fitter.residual(r)).abs() <= 1e-10,
                "residual drift at row {r}"
            );
        }
    }
}
