//! Equilibrium simulator for a salary-history disclosure game.
//!
//! Workers privately know their previous wage and choose whether to reveal
//! it to a prospective employer, who commits to a wage schedule before the
//! choice. Psychic costs of disclosing, of refusing when asked, and of
//! staying silent when not asked shape who discloses, and a salary-history
//! ban is modelled as nobody being asked.

pub mod config;
pub mod dist;
pub mod econ;
pub mod error;
pub mod harness;
pub mod heatmap;
pub mod metrics;
pub mod numerics;
pub mod population;
pub mod theory;
pub mod continuous;

pub use error::{Error, Result};
