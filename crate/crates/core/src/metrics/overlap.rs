use nalgebra::Vector3;

use crate::bodymodel::{sphere_centers, PlacedSpheres, SphereBody};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Volume shared by two spheres (m³ for inputs in m).
pub fn sphere_overlap_volume<T: Real>(c1: &Vector3<T>, r1: T, c2: &Vector3<T>, r2: T) -> T {
    let d = (c1 - c2).norm();
    let sum = r1 + r2;
    if d >= sum {
        return T::zero();
    }
    let diff = (r1 - r2).abs();
    if d <= diff {
        let r = r1.min(r2);
        return T::lit(4.0 / 3.0) * T::pi() * r * r * r;
    }
    let gap = sum - d;
    T::pi() * gap * gap * (d * d + T::lit(2.0) * d * sum - T::lit(3.0) * diff * diff) / (T::lit(12.0) * d)
}

/// Total cross-person sphere overlap per frame averaged over frames (m³).
pub fn interpenetration_placed<T: Real>(persons: &[PlacedSpheres<T>]) -> Result<T> {
    if persons.len() < 2 {
        return Err(Error::SinglePerson);
    }
    let frames = persons[0].centers.frames();
    if persons.iter().any(|p| p.centers.frames() != frames) {
        return Err(Error::ShapeMismatch("persons have different frame counts".into()));
    }
    if frames == 0 {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    let mut total = T::zero();
    for t in 0..frames {
        for a in 0..persons.len() {
            for b in a + 1..persons.len() {
                let (pa, pb) = (&persons[a], &persons[b]);
                for (ca, ra) in pa.centers.frame(t).iter().zip(&pa.radii) {
                    for (cb, rb) in pb.centers.frame(t).iter().zip(&pb.radii) {
                        total += sphere_overlap_volume(ca, *ra, cb, *rb);
                    }
                }
            }
        }
    }
    Ok(total / T::lit(frames as f64))
}

/// Mean per-frame volumetric overlap between persons' sphere bodies, cm³.
pub fn interpenetration<T: Real>(persons: &[Trajectory<T>], sb: &SphereBody<T>) -> Result<T> {
    if persons.len() < 2 {
        return Err(Error::SinglePerson);
    }
    let placed = persons
        .iter()
        .map(|p| sphere_centers(p, sb))
        .collect::<Result<Vec<_>>>()?;
    Ok(interpenetration_placed(&placed)? * T::lit(1e6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disjoint_contained_and_lens() {
        let o = Vector3::zeros();
        assert_eq!(sphere_overlap_volume(&o, 1.0, &Vector3::new(2.5, 0.0, 0.0), 1.0), 0.0);
        assert!((sphere_overlap_volume(&o, 1.0, &o, 1.0) - 4.0 * PI / 3.0).abs() < 1e-12);
        let lens = sphere_overlap_volume(&o, 1.0, &Vector3::new(1.0, 0.0, 0.0), 1.0);
        assert!((lens - 5.0 * PI / 12.0).abs() < 1e-12);
        // small sphere inside a big one
        let inner = sphere_overlap_volume(&o, 2.0, &Vector3::new(0.5, 0.0, 0.0), 0.5);
        assert!((inner - 4.0 * PI / 3.0 * 0.125).abs() < 1e-12);
    }

    #[test]
    fn continuity_at_boundaries() {
        let o = Vector3::zeros();
        let (r1, r2): (f64, f64) = (0.7, 0.3);
        for d in [r1 + r2, r1 - r2] {
            let below = sphere_overlap_volume(&o, r1, &Vector3::new(d - 1e-12, 0.0, 0.0), r2);
            let above = sphere_overlap_volume(&o, r1, &Vector3::new(d + 1e-12, 0.0, 0.0), r2);
            assert!((below - above).abs() < 1e-9, "d={d}: {below} vs {above}");
        }
    }

    #[test]
    fn single_person_is_an_error() {
        let p = Trajectory::<f64>::zeros(1, 1);
        let sb = SphereBody::new(vec![], 1).unwrap();
        assert!(matches!(interpenetration(&[p], &sb), Err(Error::SinglePerson)));
    }
}
