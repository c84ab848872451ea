//! Numerical laboratory for (p,q)-frame and Bessel measures: finite
//! measures on `R^d`, compatible semi-inner products on `L^p(mu)`, frequency
//! spectra, frame-bound estimation with certified analytic bounds, and
//! frame-producing constructions.

pub mod bounds;
pub mod catalog;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod json;
pub mod measures;
pub mod quadrature;
pub mod sip;
pub mod spectra;

pub use error::{FrameError, Result};
pub use geometry::BoxNd;
pub use measures::Measure;
pub use quadrature::QuadSpec;
pub use sip::{ExponentPair, TestFunction};
pub use spectra::SpectrumSet;
