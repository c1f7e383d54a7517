//! Two small applications of the robust machinery.

pub mod pricing;
pub mod rl;
