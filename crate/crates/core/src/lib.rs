//! Knot distributions, neuron states and initialization strategies for
//! shallow and deep ReLU networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`] and [`quadrature`] provide the numerical primitives.
//! - [`ratiodist`] evaluates distributions of ratios of independent scalars,
//!   which govern where a randomly initialized neuron places its knot.
//! - [`geometry`] classifies neurons on a finite data set.
//! - [`netcore`] holds the network, losses, gradients and the trainer.
//! - [`initstrat`] draws initial parameters, including data-dependent biases.
//! - [`analytics`] turns initialization distributions into state
//!   probabilities, norm statistics and output-size predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod geometry;
pub mod initstrat;
pub mod netcore;
pub mod quadrature;
pub mod ratiodist;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
