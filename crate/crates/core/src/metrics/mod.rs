//! Physical-plausibility metrics and the extractor-free FID*.

mod fid;
mod ground;
mod overlap;
mod pfc;
mod report;

pub use fid::{fid_star, frechet_distance, gaussian_stats, pose_features, COVARIANCE_RIDGE, NEGATIVE_EIGEN_TOL};
pub use ground::{ground_contact_metrics, lowest_clearance, skate, GroundContact, GroundPlane};
pub use overlap::{interpenetration, interpenetration_placed, sphere_overlap_volume};
pub use pfc::{pfc, PFC_SCALE};
pub use report::{aggregate_reports, evaluate_clip, evaluate_positions, fid_star_between, MetricConfig, MetricsReport};
