//! Base supervised learners: regression trees, least squares, logistic
//! regression, gradient tree boosting, and cross-validated grid selection.

pub mod boosting;
pub mod cv;
pub mod linear;
pub mod logistic;
pub mod tree;

pub use boosting::{fit_gbt, BoostStage, BoostedModel, GbtFitter, GbtParams};
pub use cv::{cv_grid_select, gbt_cv_select, make_folds, make_stratified_folds, GbtGrid};
pub use linear::{fit_ols, LinearModel};
pub use logistic::{fit_logistic, log_likelihood, sigmoid, LogisticModel, SEPARATION_CAP};
pub use tree::{fit_tree, RegressionTree};
