pub mod error;
pub mod erosion;
pub mod exactlin;
pub mod fixtures;
pub mod functors;
pub mod gen;
pub mod height;
pub mod interleave;
pub mod io;
pub mod kan;
pub mod pmod;
pub mod poset;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/posets-and-heights.md")]
    mod posets_and_heights {}
    #[doc = include_str!("../../../book/src/modules.md")]
    mod modules {}
    #[doc = include_str!("../../../book/src/interleavings.md")]
    mod interleavings {}
    #[doc = include_str!("../../../book/src/erosion.md")]
    mod erosion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/examples.md")]
    mod examples {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
