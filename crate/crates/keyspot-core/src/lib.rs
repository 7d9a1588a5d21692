//! Desk-scale training and evaluation bench for descriptor-agnostic keypoint
//! detectors on synthetic multi-view scenes with exact ground-truth geometry.
//!
//! The pipeline: [`scenegen`] renders two-view pairs with exact depth and 3D
//! tracks; [`targets`] turns track projections into binarized supervision
//! maps (train-time NMS + per-pair top-k); [`losses`] provides the keypoint
//! cross-entropy and coverage regularizer; [`detector`] is a small trainable
//! scorer; [`sampler`] extracts keypoints at inference; [`evalbench`] scores
//! repeatability and downstream relative-pose accuracy with an oracle
//! matcher and a RANSAC essential-matrix solver.

pub mod augment;
pub mod config;
pub mod detector;
pub mod error;
pub mod evalbench;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod losses;
pub mod sampler;
pub mod scenegen;
pub mod targets;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use grid::Grid;
