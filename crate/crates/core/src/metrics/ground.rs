use serde::{Deserialize, Serialize};

use crate::bodymodel::{sphere_centers, SphereBody};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Horizontal ground plane `z = height` (z is the canonical up axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundPlane {
    pub height: f64,
}

impl Default for GroundPlane {
    fn default() -> Self {
        Self { height: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundContact<T: Real> {
    pub penetration_mm: T,
    pub float_mm: T,
    pub foot_contact_mm: T,
}

/// Signed clearance of the lowest sphere surface point above the ground, per frame (m).
pub fn lowest_clearance<T: Real>(positions: &Trajectory<T>, sb: &SphereBody<T>, g: &GroundPlane) -> Result<Vec<T>> {
    if sb.is_empty() {
        return Err(Error::ShapeMismatch("sphere body has no spheres".into()));
    }
    let placed = sphere_centers(positions, sb)?;
    let height = T::lit(g.height);
    Ok((0..positions.frames())
        .map(|t| {
            placed
                .centers
                .frame(t)
                .iter()
                .zip(&placed.radii)
                .map(|(c, r)| c.z - *r)
                .fold(T::max_value().unwrap(), |m, z| m.min(z))
                - height
        })
        .collect())
}

/// Mean below-ground depth, mean above-ground clearance of the lowest body
/// point, and their sum, in millimeters.
pub fn ground_contact_metrics<T: Real>(
    positions: &Trajectory<T>,
    sb: &SphereBody<T>,
    g: &GroundPlane,
) -> Result<GroundContact<T>> {
    let clearance = lowest_clearance(positions, sb, g)?;
    if clearance.is_empty() {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    let n = T::lit(clearance.len() as f64);
    let (mut pen, mut flt) = (T::zero(), T::zero());
    for z in &clearance {
        pen += (-*z).max(T::zero());
        flt += z.max(T::zero());
    }
    let mm = T::lit(1000.0);
    let penetration_mm = pen / n * mm;
    let float_mm = flt / n * mm;
    Ok(GroundContact {
        penetration_mm,
        float_mm,
        foot_contact_mm: penetration_mm + float_mm,
    })
}

/// Mean horizontal speed (cm/s) of spheres touching the ground.
///
/// A sphere touches at frame `t` when its lowest point is within
/// `contact_eps` of the ground; its speed is the forward difference to
/// frame `t + 1`. Returns 0 when nothing touches.
pub fn skate<T: Real>(
    positions: &Trajectory<T>,
    sb: &SphereBody<T>,
    g: &GroundPlane,
    fps: T,
    contact_eps: T,
) -> Result<T> {
    if positions.frames() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            found: positions.frames(),
        });
    }
    let placed = sphere_centers(positions, sb)?;
    let limit = T::lit(g.height) + contact_eps;
    let (mut total, mut n) = (T::zero(), 0usize);
    for t in 0..positions.frames() - 1 {
        for (i, r) in placed.radii.iter().enumerate() {
            let c = placed.centers.get(t, i);
            if c.z - *r <= limit {
                let d = placed.centers.get(t + 1, i) - c;
                total += (d.x * d.x + d.y * d.y).sqrt() * fps;
                n += 1;
            }
        }
    }
    Ok(if n == 0 {
        T::zero()
    } else {
        total / T::lit(n as f64) * T::lit(100.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodymodel::SphereSpec;
    use nalgebra::Vector3;

    fn ball() -> SphereBody<f64> {
        SphereBody::new(vec![SphereSpec { joint_a: 0, joint_b: 0, t: 0.0, radius: 0.1 }], 1).unwrap()
    }

    #[test]
    fn per_frame_clamp_then_mean() {
        let p = Trajectory::from_fn(2, 1, |t, _| Vector3::new(0.0, 0.0, if t == 0 { 0.09 } else { 0.105 }));
        let m = ground_contact_metrics(&p, &ball(), &GroundPlane::default()).unwrap();
        assert!((m.penetration_mm - 5.0).abs() < 1e-9);
        assert!((m.float_mm - 2.5).abs() < 1e-9);
        assert!((m.foot_contact_mm - 7.5).abs() < 1e-9);
    }

    #[test]
    fn raised_ground_plane() {
        let p = Trajectory::from_fn(1, 1, |_, _| Vector3::new(0.0, 0.0, 0.6));
        let m = ground_contact_metrics(&p, &ball(), &GroundPlane { height: 0.5 }).unwrap();
        assert!(m.penetration_mm.abs() < 1e-9 && m.float_mm.abs() < 1e-9);
    }

    #[test]
    fn skate_of_sliding_ball() {
        let p = Trajectory::from_fn(5, 1, |t, _| Vector3::new(0.012 * t as f64, 0.0, 0.1));
        let s = skate(&p, &ball(), &GroundPlane::default(), 20.0, 0.005).unwrap();
        assert!((s - 24.0).abs() < 1e-9, "{s}");
        let airborne = p.map(|v| v + Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(skate(&airborne, &ball(), &GroundPlane::default(), 20.0, 0.005).unwrap(), 0.0);
        let one = Trajectory::from_fn(1, 1, |_, _| Vector3::zeros());
        assert!(matches!(
            skate(&one, &ball(), &GroundPlane::default(), 20.0, 0.005),
            Err(Error::TooShort { .. })
        ));
    }
}
