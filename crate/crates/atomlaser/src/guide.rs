//! The rendered guide, compiled. Each module's documentation is a chapter
//! of the mdbook under `book/`, included verbatim, so every code block
//! the book shows is built and run by `cargo test --doc`. If the library
//! drifts, the book fails the suite.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}

#[doc = include_str!("../../../book/src/stability.md")]
pub mod stability {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/coupled.md")]
pub mod coupled {}

#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
