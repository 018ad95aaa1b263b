//! Seeded k-fold cross-validation and grid selection.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::learners::boosting::{GbtFitter, GbtParams};
use crate::rng::RngSeed;

/// Retries allowed when stratified fold assignment leaves a training set
/// without one of the arms.
pub const FOLD_RETRY_CAP: usize = 100;

/// Deterministic fold assignment: shuffle the rows with the seeded stream
/// and deal them into `n_folds` nearly equal chunks. Returns the held-out
/// row set per fold.
pub fn make_folds(rows: &[usize], n_folds: usize, seed: &RngSeed) -> Result<Vec<Vec<usize>>> {
    if n_folds < 2 {
        return Err(Error::InvalidParameter("n_folds must be >= 2".into()));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 rows".into(),
        ));
    }
    let k = n_folds.min(rows.len());
    let mut shuffled = rows.to_vec();
    shuffled.shuffle(&mut seed.rng());
    Ok(deal(&shuffled, k))
}

fn deal(shuffled: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = shuffled.len();
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(shuffled[start..start + len].to_vec());
        start += len;
    }
    folds
}

/// As [`make_folds`], additionally requiring that every fold's training
/// complement contains both treatment arms. Redraws up to
/// [`FOLD_RETRY_CAP`] times, then errors.
pub fn make_stratified_folds(
    rows: &[usize],
    treatment: &[u8],
    n_folds: usize,
    seed: &RngSeed,
) -> Result<Vec<Vec<usize>>> {
    if n_folds < 2 {
        return Err(Error::InvalidParameter("n_folds must be >= 2".into()));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 rows".into(),
        ));
    }
    let k = n_folds.min(rows.len());
    let n1: usize = rows.iter().map(|&r| treatment[r] as usize).sum();
    let n0 = rows.len() - n1;
    for attempt in 0..FOLD_RETRY_CAP {
        let mut shuffled = rows.to_vec();
        shuffled.shuffle(&mut seed.child(attempt as u64).rng());
        let folds = deal(&shuffled, k);
        let ok = folds.iter().all(|fold| {
            let held1: usize = fold.iter().map(|&r| treatment[r] as usize).sum();
            let held0 = fold.len() - held1;
            n1 > held1 && n0 > held0
        });
        if ok {
            return Ok(folds);
        }
    }
    Err(Error::FoldEmptyArm(FOLD_RETRY_CAP))
}

/// Select the grid point with the lowest pooled held-out mean squared
/// error. `eval` receives (grid point, training rows, held-out rows) and
/// returns the held-out *sum* of squared errors. Ties break to the
/// earliest grid point; a singleton grid is returned without any fitting.
pub fn cv_grid_select<'g, P>(
    grid: &'g [P],
    folds: &[Vec<usize>],
    mut eval: impl FnMut(&P, &[usize], &[usize]) -> Result<f64>,
) -> Result<(usize, &'g P)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.len() == 1 {
        return Ok((0, &grid[0]));
    }
    let all: Vec<usize> = folds.iter().flatten().copied().collect();
    let mut best: Option<(usize, f64)> = None;
    for (gi, point) in grid.iter().enumerate() {
        let mut sse = 0.0;
        for fold in folds {
            let train: Vec<usize> = all
                .iter()
                .copied()
                .filter(|r| !fold.contains(r))
                .collect();
            sse += eval(point, &train, fold)?;
        }
        let mse = sse / all.len() as f64;
        if best.map_or(true, |(_, b)| mse < b) {
            best = Some((gi, mse));
        }
    }
    let (gi, _) = best.unwrap();
    Ok((gi, &grid[gi]))
}

/// Hyperparameter grid for boosted models. The grid order (outer to inner)
/// is `n_stages`, then `max_depth`; ties in held-out error break to the
/// earliest point in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct GbtGrid {
    pub n_stages: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub shrinkage: f64,
    pub min_leaf: usize,
}

impl GbtGrid {
    /// The default grid used by every boosting cross-validation in this
    /// crate: stages {50, 200, 500}, depth {2, 3, 5}, shrinkage 0.1,
    /// min_leaf 10.
    pub fn standard() -> Self {
        GbtGrid {
            n_stages: vec![50, 200, 500],
            max_depth: vec![2, 3, 5],
            shrinkage: 0.1,
            min_leaf: 10,
        }
    }

    /// A one-point grid (no cross-validation work at all).
    pub fn singleton(params: &GbtParams) -> Self {
        GbtGrid {
            n_stages: vec![params.n_stages],
            max_depth: vec![params.max_depth],
            shrinkage: params.shrinkage,
            min_leaf: params.min_leaf,
        }
    }

    pub fn points(&self) -> Vec<GbtParams> {
        let mut out = Vec::with_capacity(self.n_stages.len() * self.max_depth.len());
        for &m in &self.n_stages {
            for &d in &self.max_depth {
                out.push(GbtParams {
                    n_stages: m,
                    shrinkage: self.shrinkage,
                    max_depth: d,
                    min_leaf: self.min_leaf,
                });
            }
        }
        out
    }

    pub fn is_singleton(&self) -> bool {
        self.n_stages.len() == 1 && self.max_depth.len() == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stages.is_empty() || self.max_depth.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrinkage {} outside (0, 1]",
                self.shrinkage
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// Cross-validated parameter choice for a boosted model over `rows`.
///
/// Selection matches [`cv_grid_select`] over the grid's points exactly, but
/// every stage-count checkpoint of one depth is evaluated from a single fit
/// (boosting fits are prefix-stable), so the cost scales with the number of
/// depths rather than grid points. Falls back to the first grid point when
/// the row set is too small to fold.
pub fn gbt_cv_select(
    columns: &[Vec<f64>],
    rows: &[usize],
    targets: &[f64],
    grid: &GbtGrid,
    n_folds: usize,
    seed: &RngSeed,
) -> Result<GbtParams> {
    grid.validate()?;
    let points = grid.points();
    if points.len() == 1 || rows.len() < 2 {
        return Ok(points[0].clone());
    }
    let folds = make_folds(rows, n_folds, &seed.child(crate::rng::stream::CV_FOLDS))?;
    let n_eval: usize = folds.iter().map(|f| f.len()).sum();

    let max_stages = *grid.n_stages.iter().max().unwrap();
    let mut checkpoints = grid.n_stages.clone();
    checkpoints.sort_unstable();

    // sse[depth index][checkpoint index], pooled over folds.
    let mut sse = vec![vec![0.0; checkpoints.len()]; grid.max_depth.len()];
    let mut row_buf = Vec::new();
    for fold in &folds {
        let train: Vec<usize> = rows.iter().copied().filter(|r| !fold.contains(r)).collect();
        if train.is_empty() {
            continue;
        }
        for (di, &depth) in grid.max_depth.iter().enumerate() {
            let params = GbtParams {
                n_stages: max_stages,
                shrinkage: grid.shrinkage,
                max_depth: depth,
                min_leaf: grid.min_leaf,
            };
            let mut fitter = GbtFitter::new(columns, &train, targets, params)?;
            let mut held_pred: Vec<f64> = vec![fitter.initial_value(); fold.len()];
            let record = |stage_count: usize, held_pred: &[f64], sse_row: &mut Vec<f64>| {
                if let Some(ci) = checkpoints.iter().position(|&c| c == stage_count) {
                    let err: f64 = fold
                        .iter()
                        .zip(held_pred)
                        .map(|(&r, &p)| (targets[r] - p).powi(2))
                        .sum();
                    sse_row[ci] += err;
                }
            };
            record(0, &held_pred, &mut sse[di]);
            for stage_count in 1..=max_stages {
                let stage = fitter.step()?;
                for (slot, &r) in held_pred.iter_mut().zip(fold.iter()) {
                    row_buf.clear();
                    row_buf.extend(columns.iter().map(|c| c[r]));
                    *slot += stage.predict(&row_buf);
                }
                record(stage_count, &held_pred, &mut sse[di]);
            }
        }
    }

    // Pick the best point in grid order (stages outer, depth inner).
    let mut best: Option<(usize, f64)> = None;
    for (pi, point) in points.iter().enumerate() {
        let ci = checkpoints
            .iter()
            .position(|&c| c == point.n_stages)
            .unwrap();
        let di = grid
            .max_depth
            .iter()
            .position(|&d| d == point.max_depth)
            .unwrap();
        let mse = sse[di][ci] / n_eval as f64;
        if best.map_or(true, |(_, b)| mse < b) {
            best = Some((pi, mse));
        }
    }
    Ok(points[best.unwrap().0].clone())
}
