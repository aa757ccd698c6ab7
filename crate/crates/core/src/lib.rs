//! Hierarchical interactiveness learning for human-object interaction (HOI)
//! detection.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numeric piece of
//! the two-stage pipeline:
//!
//! - [`hoi`]: boxes, poses, body-part boxes, the dense human-object graph,
//!   binary interactiveness labels and minibatch balancing.
//! - [`raster`]: the 64x64 spatial and pose maps.
//! - [`nn`]: a small differentiable core (dense, conv2d, max-pooling, losses,
//!   SGD with cosine restarts, finite-difference checking).
//! - [`net`]: the interactiveness discriminator with ten part classifiers,
//!   part attention, instance classifier and the consistency loss.
//! - [`classifier`]: the late-fusion HOI classifier.
//! - [`suppression`]: low-grade instance suppression (LIS), non-interaction
//!   suppression (NIS) and final score composition.
//! - [`eval`]: role mAP, interactiveness AP, NIS reduction statistics and the
//!   part-pattern table.
//! - [`data`]: dataset records, the synthetic oracle generator, feature
//!   provision and training orchestration.
//!
//! File formats, checkpoints and the command-line tool live in the companion
//! `tin` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod config;
pub mod data;
mod error;
pub mod eval;
pub mod hoi;
pub mod math;
pub mod net;
pub mod nn;
pub mod raster;
pub mod suppression;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
