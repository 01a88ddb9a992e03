//! Complex-plane primitives: the chordal metric, truncated Taylor series,
//! and bidisc boundary sampling.

pub mod bidisc;
pub mod series;
pub mod sphere;

pub use bidisc::{Bidisc, BidiscError, NonFinite, SampleError, TorusSampler};
pub use series::{SeriesError, TaylorSeries};
pub use sphere::{chordal_diameter, chordal_distance, chordal_mean, SpherePoint};
