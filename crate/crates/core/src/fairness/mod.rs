//! Fairness-constrained training.
//!
//! [`egd_train`] runs the exponentiated-gradient Lagrangian reduction and
//! returns a [`RandomizedClassifier`] (hard labels); [`advdebias_train`]
//! trains a network against a discriminator that reads its soft labels.

mod advdebias;
mod egd;
mod randomized;

pub use advdebias::{advdebias_train, AdvDebiasConfig};
pub use egd::{egd_train, egd_train_traced, EgdConfig, EgdTrace, FairnessConstraint};
pub use randomized::{
    expected_group_rates, expected_positive, sample_prediction, Component, RandomizedClassifier,
};
