//! Selection events as unions of quadratic regions, and their restriction
//! to lines and to the F-statistic curve.

pub mod constraint;
pub mod event;
pub mod fcurve;
pub mod interval;

pub use constraint::{solve_quadratic_sign_set, PlaneQuadratic, ProjectionCache, QuadTerm, QuadraticConstraint};
pub use event::SelectionEvent;
pub use fcurve::{slice_event_on_f_curve, FCurve, FCurveSlice};
pub use interval::{Interval, IntervalSet};
