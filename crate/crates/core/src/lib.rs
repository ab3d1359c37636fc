//! Tikhonov-Mann iteration for countable families of nonexpansive mappings in
//! CAT(0) spaces, together with explicit rates of asymptotic regularity and
//! metastability computed in arbitrary precision.

// `!(x < bound)` is used on purpose: NaN must fail such checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod geometry;
pub mod mappings;
pub mod rates;
pub mod scalar;
pub mod scenarios;
pub mod schedules;
pub mod verify;

pub use scalar::Scalar;

/// Double-precision instantiations used by the command-line driver.
pub type Point64 = geometry::Point<f64>;
pub type SpaceModel64 = geometry::SpaceModel<f64>;
pub type MappingFamily64 = mappings::MappingFamily<f64>;
pub type Trajectory64 = engine::Trajectory<f64>;
pub type Scenario64 = scenarios::Scenario<f64>;

/// Single-precision instantiations.
pub type Point32 = geometry::Point<f32>;
pub type SpaceModel32 = geometry::SpaceModel<f32>;
pub type MappingFamily32 = mappings::MappingFamily<f32>;
pub type Trajectory32 = engine::Trajectory<f32>;
