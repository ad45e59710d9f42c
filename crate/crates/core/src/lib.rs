//! Kakeya sets in finite affine planes.
//!
//! Builds Desarguesian (and user-supplied) affine planes, evaluates Kakeya
//! sets and their knot spectra, computes the exact large-Kakeya bounds, and
//! enumerates selections to verify the classification of large Kakeya sets
//! at small orders.

pub mod bounds;
pub mod constructions;
pub mod gf;
pub mod kakeya;
pub mod plane;
pub mod search;

pub use bounds::{BoundsError, BoundsProfile, Rational, Verdict};
pub use constructions::{Construction, ConstructionError, Family};
pub use gf::{Field, GfError};
pub use kakeya::{
    cover, IncrementalEvaluator, KakeyaError, KakeyaSet, KnotSpectrum, LineSelection,
};
pub use plane::{AffinePlane, PlaneError, ProjectivePlane};
pub use search::{SearchError, SpectrumReport};
