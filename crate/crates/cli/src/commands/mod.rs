pub mod freq;
pub mod orbit;
pub mod periodic;
pub mod range;
