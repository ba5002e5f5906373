//! Spherical-wave de-embedding of antennas from body-area-network channels
//! and eigen-optimal excitation across scenario ensembles.
//!
//! Antennas are coefficient vectors over vector spherical waves, channels are
//! mode-to-mode matrices, and a link is `S21 = R' M' T'`. See the guide in
//! `book/` for the concepts and worked examples.

pub mod cli;
pub mod error;
pub mod decompose;
pub mod ensemble;
pub mod modes;
pub mod network;
pub mod optimize;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/modes.md")]
    mod modes {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/files.md")]
    mod files {}
}
