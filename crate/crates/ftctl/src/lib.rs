//! Failure trace testing and CTL model checking over finite labelled
//! transition systems, with conversions in both directions.

pub mod convert;
pub mod ctl;
pub mod ctl2ft;
pub mod error;
pub mod failures;
pub mod ft2ctl;
pub mod harness;
pub mod kripke;
pub mod lts;
pub mod test;

pub use error::{Error, Result};
