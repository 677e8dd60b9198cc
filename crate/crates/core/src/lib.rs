//! Color-filtering localization for mobile nodes in 3D underwater acoustic
//! sensor networks.
//!
//! A mobile node hears a handful of anchors, measures the elevation angle of
//! each signal, and knows its own depth from a pressure sensor. Projecting the
//! anchors into the node's depth plane turns the problem into 2D: the node lies
//! in the intersection of one disk per anchor. Candidate points are sampled in
//! that intersection, every point is encoded as an RGB color from its distances
//! to the anchors, and the samples whose color matches the node's own color are
//! averaged into the estimate.
//!
//! - [`geometry`]: distances, projections, task rings, intersection sampling.
//! - [`color`]: RGB/HSV conversion and the distance encoding.
//! - [`localization`]: the PCFL and ACFL estimators.
//! - [`netsim`]: deployment, mobility, and measurement synthesis.
//! - [`experiments`]: Monte-Carlo trials, sweeps, statistics, CSV output.
//! - [`cli`]: the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod color;
pub mod experiments;
pub mod geometry;
pub mod localization;
pub mod netsim;
pub mod rng;

pub use color::{HsvColor, RgbColor};
pub use geometry::{PlanarPoint, Position3D, TaskRing};
pub use localization::{
    localize, AnchorObservation, Estimate, LocalizationConfig, LocalizationInput, LocalizeError,
    Variant, WeightingMode,
};
