//! Probability formulas and Monte Carlo estimators.

mod formulas;
mod simulate;

pub use formulas::*;
pub use simulate::*;
