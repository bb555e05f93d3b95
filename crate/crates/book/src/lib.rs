//! The guide under `book/` is plain mdbook, which can't link against
//! workspace crates when it tests listings. Each chapter is pulled in here
//! as module docs instead, so `cargo test` runs every `rust` block.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/intro.md")]
mod intro {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/time.md")]
mod time {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/selection.md")]
mod selection {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/bucket-list.md")]
mod bucket_list {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/hermite.md")]
mod hermite {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmarks.md")]
mod benchmarks {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/locality.md")]
mod locality {}
