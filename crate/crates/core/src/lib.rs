//! A desk-scale workbench for second-order logic over finite structures.

pub mod cli;
pub mod error;
pub mod formula_space;
pub mod formulas;
pub mod gen;
pub mod structures;
pub mod types_omitting;
pub mod ultra;
pub mod workbench;

pub use error::{Error, Result};
