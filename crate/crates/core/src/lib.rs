//! Certified computation on presented compact metric spaces.
//!
//! The crate is layered bottom-up: exact dyadic arithmetic, presented
//! spaces, names of points and compact sets, functions as graph names,
//! and two applications built on top (Fréchet distances between curves and
//! certified constrained optimization, including convex shape problems).

pub mod convex;
pub mod dyadic;
pub mod expr;
pub mod frechet;
pub mod functions;
pub mod names;
pub mod optimize;
pub mod spaces;

pub use dyadic::{Dyadic, DyadicInterval};
pub use names::{PointName, SetName};
pub use spaces::{Coord, Point, PresentedSpace, SpaceId};
