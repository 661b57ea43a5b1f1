use serde::{Deserialize, Serialize};

use super::fid::{fid_star, pose_features};
use super::ground::{ground_contact_metrics, skate, GroundPlane};
use super::overlap::interpenetration;
use super::pfc::pfc;
use crate::bodymodel::BodyModel;
use crate::error::{Error, Result};
use crate::kinematics::Skeleton;
use crate::representation::{pos_rot_mpjpe, InteractionClip};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Physical metrics for one clip or a whole dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub penetration_mm: f64,
    pub float_mm: f64,
    pub foot_contact_mm: f64,
    pub skate_cm_s: f64,
    pub pfc: f64,
    pub interpenetration_cm3: Option<f64>,
    pub mpjpe_mm: Option<f64>,
    pub fid_star: Option<f64>,
    pub frames: usize,
    pub persons: usize,
    pub clips: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub ground: GroundPlane,
    /// Sphere-to-ground distance counted as contact by the skate metric, m.
    pub contact_eps: f64,
    /// Express FID* features relative to the root joint.
    pub fid_root_centered: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            ground: GroundPlane::default(),
            contact_eps: 0.005,
            fid_root_centered: false,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.contact_eps >= 0.0) || !self.contact_eps.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "contact_eps must be non-negative, got {}",
                self.contact_eps
            )));
        }
        if !self.ground.height.is_finite() {
            return Err(Error::InvalidConfig("ground height must be finite".into()));
        }
        Ok(())
    }
}

/// Metrics from joint positions alone; `mpjpe_mm` is passed through when
/// the caller has a rotation component to compare against.
pub fn evaluate_positions<T: Real>(
    persons: &[Trajectory<T>],
    mpjpe_mm: Option<f64>,
    skeleton: &Skeleton<T>,
    body: &BodyModel<T>,
    fps: T,
    cfg: &MetricConfig,
) -> Result<MetricsReport> {
    let Some(first) = persons.first() else {
        return Err(Error::ShapeMismatch("no persons to evaluate".into()));
    };
    let n = persons.len() as f64;
    let (mut pen, mut flt, mut sk, mut pf) = (0.0, 0.0, 0.0, 0.0);
    for p in persons {
        if p.frames() != first.frames() {
            return Err(Error::ShapeMismatch("persons have different frame counts".into()));
        }
        let g = ground_contact_metrics(p, &body.spheres, &cfg.ground)?;
        pen += g.penetration_mm.as_f64();
        flt += g.float_mm.as_f64();
        sk += skate(p, &body.spheres, &cfg.ground, fps, T::lit(cfg.contact_eps))?.as_f64();
        pf += pfc(p, skeleton, fps)?.as_f64();
    }
    let interpenetration_cm3 = if persons.len() >= 2 {
        Some(interpenetration(persons, &body.spheres)?.as_f64())
    } else {
        None
    };
    let (penetration_mm, float_mm) = (pen / n, flt / n);
    Ok(MetricsReport {
        penetration_mm,
        float_mm,
        foot_contact_mm: penetration_mm + float_mm,
        skate_cm_s: sk / n,
        pfc: pf / n,
        interpenetration_cm3,
        mpjpe_mm,
        fid_star: None,
        frames: first.frames(),
        persons: persons.len(),
        clips: 1,
    })
}

/// All per-clip metrics, averaged across persons.
pub fn evaluate_clip<T: Real>(
    clip: &InteractionClip<T>,
    skeleton: &Skeleton<T>,
    body: &BodyModel<T>,
    cfg: &MetricConfig,
) -> Result<MetricsReport> {
    let positions: Vec<Trajectory<T>> = clip.persons().iter().map(|p| p.positions().clone()).collect();
    let mut mpjpe = 0.0;
    for p in clip.persons() {
        mpjpe += pos_rot_mpjpe(p, skeleton)?.as_f64();
    }
    let mpjpe = mpjpe / clip.persons().len() as f64;
    evaluate_positions(&positions, Some(mpjpe), skeleton, body, clip.fps(), cfg)
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Dataset-level means in input order. Optional metrics average over the
/// clips that report them.
pub fn aggregate_reports(reports: &[MetricsReport]) -> Option<MetricsReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let penetration_mm = mean(|r| r.penetration_mm);
    let float_mm = mean(|r| r.float_mm);
    Some(MetricsReport {
        penetration_mm,
        float_mm,
        foot_contact_mm: penetration_mm + float_mm,
        skate_cm_s: mean(|r| r.skate_cm_s),
        pfc: mean(|r| r.pfc),
        interpenetration_cm3: mean_of(reports.iter().map(|r| r.interpenetration_cm3)),
        mpjpe_mm: mean_of(reports.iter().map(|r| r.mpjpe_mm)),
        fid_star: None,
        frames: reports.iter().map(|r| r.frames).sum(),
        persons: reports.iter().map(|r| r.persons).sum(),
        clips: reports.iter().map(|r| r.clips).sum(),
    })
}

/// FID* between two collections of joint-position trajectories.
pub fn fid_star_between<T: Real>(set_a: &[&Trajectory<T>], set_b: &[&Trajectory<T>], root: Option<usize>) -> Result<T> {
    let stack = |set: &[&Trajectory<T>]| -> Result<nalgebra::DMatrix<T>> {
        let Some(first) = set.first() else {
            return Err(Error::TooShort { needed: 1, found: 0 });
        };
        let width = first.points() * 3;
        let rows: usize = set.iter().map(|t| t.frames()).sum();
        let mut out = nalgebra::DMatrix::zeros(rows, width);
        let mut r = 0;
        for t in set {
            if t.points() * 3 != width {
                return Err(Error::ShapeMismatch("trajectories have different joint counts".into()));
            }
            let f = pose_features(t, root);
            out.rows_mut(r, f.nrows()).copy_from(&f);
            r += f.nrows();
        }
        Ok(out)
    };
    fid_star(&stack(set_a)?, &stack(set_b)?)
}
