// `!(x > 0.0)` rejects NaN along with the rest; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod bifurcation;
pub mod error;
pub mod frequency;
pub mod geometry;
pub mod periodic;
pub mod quadrature;

pub use asymptotics::CollapseKind;
pub use error::{Error, Result};
pub use frequency::{EdgePoint, EdgeTag, Frequency, Source};
pub use geometry::{BirkhoffCoord, CausticParam, Ellipsoid, PhasePoint, Sigma};
pub use periodic::{CayleyReport, WindingNumbers};
pub use quadrature::{CollapseConfig, Knot, QuadratureConfig};
