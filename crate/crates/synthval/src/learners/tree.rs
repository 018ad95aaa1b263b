//! CART-style regression trees with exhaustive split search.
//!
//! Splits minimize (weighted) squared error. Thresholds are midpoints
//! between adjacent sorted feature values; equal-gain ties go to the lowest
//! feature index, then the lowest threshold, so fits are reproducible.
//! Feature orderings are presorted once and partitioned stably down the
//! tree, so each level costs O(n * p).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        leaf_id: u32,
    },
}

/// A fitted regression tree. Prediction is piecewise constant; every input
/// row reaches exactly one leaf.
#[derive(Clone, Debug)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    /// Training value per leaf id: the (weighted) mean target in the leaf.
    leaf_values: Vec<f64>,
    max_depth: usize,
    min_leaf: usize,
}

impl RegressionTree {
    pub fn n_leaves(&self) -> usize {
        self.leaf_values.len()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    /// Training mean of the targets in each leaf, indexed by leaf id.
    pub fn training_leaf_values(&self) -> &[f64] {
        &self.leaf_values
    }

    /// All (feature, threshold) pairs used by internal nodes.
    pub fn thresholds(&self) -> Vec<(usize, f64)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split {
                    feature, threshold, ..
                } => Some((*feature, *threshold)),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    /// Leaf id reached by a feature row given as a slice.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { leaf_id } => return *leaf_id as usize,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Leaf id reached by row `row` of a column-major matrix.
    pub fn leaf_of_row(&self, columns: &[Vec<f64>], row: usize) -> usize {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { leaf_id } => return *leaf_id as usize,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if columns[*feature][row] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf_values[self.leaf_of(x)]
    }

    pub fn predict_row(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        self.leaf_values[self.leaf_of_row(columns, row)]
    }
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    targets: &'a [f64],
    weights: Option<&'a [f64]>,
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
    /// Scratch: side of the current split per row id.
    goes_left: Vec<bool>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a> Builder<'a> {
    fn weight(&self, row: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[row])
    }

    /// Weighted count and weighted target sum over rows.
    fn sums(&self, rows: &[usize]) -> (f64, f64) {
        let mut w_sum = 0.0;
        let mut wy_sum = 0.0;
        for &r in rows {
            let w = self.weight(r);
            w_sum += w;
            wy_sum += w * self.targets[r];
        }
        (w_sum, wy_sum)
    }

    fn make_leaf(&mut self, w_sum: f64, wy_sum: f64) -> u32 {
        let leaf_id = self.leaf_values.len() as u32;
        let value = if w_sum > 0.0 { wy_sum / w_sum } else { 0.0 };
        self.leaf_values.push(value);
        self.nodes.push(Node::Leaf { leaf_id });
        (self.nodes.len() - 1) as u32
    }

    /// Exhaustive best split over all features and midpoint thresholds.
    /// `sorted[j]` holds this node's rows ordered by feature `j`.
    fn best_split(&self, sorted: &[Vec<usize>], w_total: f64, wy_total: f64) -> Option<BestSplit> {
        let n = sorted[0].len();
        let parent_score = wy_total * wy_total / w_total;
        let mut best: Option<BestSplit> = None;
        for (feature, order) in sorted.iter().enumerate() {
            let col = &self.columns[feature];
            let mut w_left = 0.0;
            let mut wy_left = 0.0;
            for (pos, &row) in order[..n - 1].iter().enumerate() {
                let w = self.weight(row);
                w_left += w;
                wy_left += w * self.targets[row];
                let left_count = pos + 1;
                if left_count < self.min_leaf || n - left_count < self.min_leaf {
                    continue;
                }
                let here = col[row];
                let next = col[order[pos + 1]];
                if here == next {
                    continue;
                }
                let w_right = w_total - w_left;
                if w_left <= 0.0 || w_right <= 0.0 {
                    continue;
                }
                let wy_right = wy_total - wy_left;
                let gain =
                    wy_left * wy_left / w_left + wy_right * wy_right / w_right - parent_score;
                if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next {
                        threshold = here;
                    }
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, sorted: Vec<Vec<usize>>, depth: usize) -> u32 {
        let rows = &sorted[0];
        let n = rows.len();
        let (w_sum, wy_sum) = self.sums(rows);

        if depth >= self.max_depth || n < 2 * self.min_leaf || w_sum <= 0.0 {
            return self.make_leaf(w_sum, wy_sum);
        }
        // Constant targets cannot be improved by any split.
        let first = self.targets[rows[0]];
        if rows.iter().all(|&r| self.targets[r] == first) {
            return self.make_leaf(w_sum, wy_sum);
        }

        let Some(split) = self.best_split(&sorted, w_sum, wy_sum) else {
            return self.make_leaf(w_sum, wy_sum);
        };

        let split_col = &self.columns[split.feature];
        for &r in rows {
            self.goes_left[r] = split_col[r] <= split.threshold;
        }
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for order in &sorted {
            let mut l = Vec::with_capacity(n / 2 + 1);
            let mut r = Vec::with_capacity(n / 2 + 1);
            for &row in order {
                if self.goes_left[row] {
                    l.push(row);
                } else {
                    r.push(row);
                }
            }
            left_sorted.push(l);
            right_sorted.push(r);
        }
        drop(sorted);

        let node_idx = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.build(left_sorted, depth + 1);
        let right = self.build(right_sorted, depth + 1);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[node_idx]
        {
            *l = left;
            *r = right;
        }
        node_idx as u32
    }
}

/// Fit a regression tree to `targets` over the given rows of a column-major
/// feature matrix. `targets` and `weights` are indexed by row id.
///
/// Leaf values are (weighted) mean targets; each split is the exhaustive
/// best (feature, threshold) by squared-error reduction. Constant targets
/// yield a single-leaf tree.
pub fn fit_tree(
    columns: &[Vec<f64>],
    rows: &[usize],
    targets: &[f64],
    weights: Option<&[f64]>,
    max_depth: usize,
    min_leaf: usize,
) -> Result<RegressionTree> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("empty training data".into()));
    }
    if min_leaf == 0 {
        return Err(Error::InvalidParameter("min_leaf must be >= 1".into()));
    }
    if let Some(w) = weights {
        for &r in rows {
            if !(w[r] >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "negative or NaN weight at row {r}"
                )));
            }
        }
    }

    let n_total = columns.first().map_or(0, |c| c.len());
    let mut builder = Builder {
        columns,
        targets,
        weights,
        max_depth,
        min_leaf,
        nodes: Vec::new(),
        leaf_values: Vec::new(),
        goes_left: vec![false; n_total],
    };

    let sorted: Vec<Vec<usize>> = if columns.is_empty() {
        // No features: a single pseudo-ordering so the row set is tracked.
        vec![rows.to_vec()]
    } else {
        columns
            .iter()
            .map(|col| {
                let mut order = rows.to_vec();
                order.sort_unstable_by(|&a, &b| {
                    col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b))
                });
                order
            })
            .collect()
    };
    let root = if columns.is_empty() {
        let (w_sum, wy_sum) = builder.sums(rows);
        builder.make_leaf(w_sum, wy_sum)
    } else {
        builder.build(sorted, 0)
    };
    debug_assert_eq!(root, 0);

    Ok(RegressionTree {
        nodes: builder.nodes,
        leaf_values: builder.leaf_values,
        max_depth,
        min_leaf,
    })
}
