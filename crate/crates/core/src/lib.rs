//! One-dimensional two-phase PEM fuel cell model with balance of plant,
//! simulation drivers and genetic-algorithm calibration.

pub mod bop;
pub mod calibrate;
pub mod config;
pub mod constants;
pub mod experiment;
pub mod io;
pub mod model;
pub mod parallel;
pub mod physics;
