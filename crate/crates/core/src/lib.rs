pub mod checks;
pub mod config;
pub mod dict;
pub mod encoder;
mod error;
pub mod glyph;
pub mod pipeline;
pub mod polymrc;
pub mod retrieval;
pub mod shuowen;
pub mod tensor;

pub use error::{Error, Result};

/// The guide in `book/`, compiled so its listings run as doc-tests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/dictionary.md")]
    pub mod dictionary {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    pub mod tensors {}
    #[doc = include_str!("../../../book/src/pretraining.md")]
    pub mod pretraining {}
    #[doc = include_str!("../../../book/src/glyphs.md")]
    pub mod glyphs {}
    #[doc = include_str!("../../../book/src/polymrc.md")]
    pub mod polymrc {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    pub mod fusion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
