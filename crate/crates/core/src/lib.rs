//! Selective inference for linear regression after outlier removal.
//!
//! Outlier detection by Cook's distance, DFFITS or soft-thresholded IPOD
//! selects a subset of observations. Each rule's selection event is a union
//! of quadratic regions in the response space, and conditioning on it gives
//! valid p-values and intervals for the refitted model.

pub mod datasets;
pub mod detection;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod simulation;
pub mod special;
pub mod truncated;

pub use error::{Error, Result};
pub use geometry::{IntervalSet, QuadraticConstraint, SelectionEvent};
pub use model::{fit_ols, Dataset, OlsFit};
