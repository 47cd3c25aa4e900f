//! The chapters of `book/` compiled as doctests, so that every listing in the
//! guide is checked by `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/system.md")]
pub mod system {}

#[doc = include_str!("../../../book/src/melnikov.md")]
pub mod melnikov {}

#[doc = include_str!("../../../book/src/crests.md")]
pub mod crests {}

#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}

#[doc = include_str!("../../../book/src/inner.md")]
pub mod inner {}

#[doc = include_str!("../../../book/src/chain.md")]
pub mod chain {}

#[doc = include_str!("../../../book/src/flow.md")]
pub mod flow {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
