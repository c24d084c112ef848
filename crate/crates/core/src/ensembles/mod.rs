//! Bagging and multiclass AdaBoost over decision trees.

pub mod adaboost;
pub mod bagging;

pub use adaboost::{adaboost_fit, adaboost_fit_traced, samme_alpha, AdaBoostModel, RoundTrace};
pub use bagging::{bagging_fit, bootstrap_indices, BaggingModel};
