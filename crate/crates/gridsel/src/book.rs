//! The user guide, chapter by chapter.
//!
//! Each module's documentation is one chapter of the mdbook under
//! `book/`, included verbatim so every code block in the guide compiles
//! and runs as a doctest. If a chapter drifts from the library, the test
//! suite fails.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/grid-format.md")]
pub mod grid_format {}

#[doc = include_str!("../../../book/src/power-flow.md")]
pub mod power_flow {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}

#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}

#[doc = include_str!("../../../book/src/congestion.md")]
pub mod congestion_classifiers {}

#[doc = include_str!("../../../book/src/selection.md")]
pub mod selection {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line {}
