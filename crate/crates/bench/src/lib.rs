//! Shared fixtures for the criterion benches.

pub const REFERENCE_AXES: [f64; 3] = [0.46, 0.58, 1.0];
pub const PLANAR_AXES: [f64; 2] = [4.0 / 9.0, 1.0];
