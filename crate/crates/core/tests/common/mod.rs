//! Independent reference implementations used to cross-check the library.
//!
//! Nothing here calls into the code under test except for reading graph
//! structure and the distance functions themselves.

#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;
