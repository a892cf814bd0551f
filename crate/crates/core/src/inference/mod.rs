//! Selective and naive inference for the refitted model.

pub mod contrast;
pub mod ftest;
pub mod group;
pub mod naive;
pub mod report;
pub mod sigma;
pub mod ztest;

pub use contrast::{make_contrast, ContrastKind, ContrastSpec};
pub use ftest::{f_test_spec, selective_f_test, FTest, FTestSpec};
pub use group::{group_chi2_test, group_test_spec, Chi2Test, GroupTestSpec};
pub use naive::{naive_coefficient, naive_contrast, naive_group_f, NaiveInference};
pub use report::{analyze, AnalysisOptions, AnalysisReport, CoefficientReport, MethodTag, SigmaMode};
pub use sigma::{estimate_sigma_aug_lasso, estimate_sigma_with, sigma_at_penalty, CvRule, LassoFit, LassoProblem, SigmaEstimate, SigmaOptions};
pub use ztest::{prediction_interval, selective_ci, selective_z_inference, z_truncation_set, PredictionInterval, ZInference};
