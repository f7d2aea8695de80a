//! Random instance generation, cross-validation and DOT export for the `ftctl` tool.

pub mod crosscheck;
pub mod dot;
pub mod gen;

pub use crosscheck::{
    compare, crosscheck, crosscheck_with, instance, Compilers, CrosscheckReport, Direction,
    Mismatch, Mode, Subject,
};
pub use gen::{GenConfig, Generator};
