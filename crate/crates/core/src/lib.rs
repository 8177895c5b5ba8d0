//! Identity elements of the abelian sandpile on elliptical lattice domains.

pub mod apollonian;
pub mod cache;
pub mod circle;
pub mod config;
pub mod constants;
pub mod domain;
pub mod exact;
pub mod geometry;
pub mod goodness;
pub mod grid;
pub mod identity;
pub mod lattice;
pub mod pattern;
pub mod render;
pub mod stabilize;
pub mod sweep;

pub use domain::{Domain, DomainError};
pub use geometry::{build_domain, EllipseDomain, EllipseSpec, GeometryError, Spectrum};
pub use grid::{CellGrid, GridError, LatticePoint, Odometer, SandpileConfig};
pub use stabilize::{group_add, stabilize, Stabilized};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/identity.md")]
    mod identity {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/apollonian.md")]
    mod apollonian {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    mod patterns {}
    #[doc = include_str!("../../../book/src/goodness.md")]
    mod goodness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
