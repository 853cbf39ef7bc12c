//! Numerical laboratory for dynamical determinants, flat traces and Ruelle
//! resonances of weighted shifts and linear horseshoes.

pub mod acceptance;
pub mod counterexamples;
pub mod entire;
pub mod error;
pub mod fit;
pub mod gevrey;
pub mod horseshoe;
pub mod nuclear;
pub mod roots;
pub mod series;
pub mod shift;
pub mod textio;

pub use error::{Error, Result};

/// Guide chapters, compiled as doc-tests.
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/series.md")]
    pub mod series {}
    #[doc = include_str!("../../../book/src/shift.md")]
    pub mod shift {}
    #[doc = include_str!("../../../book/src/horseshoe.md")]
    pub mod horseshoe {}
    #[doc = include_str!("../../../book/src/counterexamples.md")]
    pub mod counterexamples {}
    #[doc = include_str!("../../../book/src/nuclear_gevrey.md")]
    pub mod nuclear_gevrey {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
