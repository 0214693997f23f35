//! Garsia entropy and Hausdorff dimension of Cantor-like (m,d)-measures.
//!
//! The uniform entropy is evaluated from a rapidly convergent series over the
//! Euclidean tree with a certified error radius; non-uniform measures get
//! rigorous interval bounds. A brute-force construction of the weighted
//! (m,d)-graph serves as an exact oracle for every formula.

pub mod bounds;
pub mod certified;
pub mod cli;
pub mod error;
pub mod euclid;
pub mod graph;
pub mod params;
pub mod series;
pub mod uniform;

pub use certified::{CertifiedValue, Interval, Precision};
pub use error::{Error, Result};
pub use params::{MdParams, ProbabilityVector};
