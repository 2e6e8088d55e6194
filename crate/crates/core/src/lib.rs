//! Statistical and predictive analysis of student cohorts for academic
//! advising.

pub mod advisor;
pub mod classifiers;
pub mod data;
pub mod descriptive;
pub mod evaluation;
pub mod inferential;
pub mod rng;
pub mod special;
pub mod synthetic;
mod table;
