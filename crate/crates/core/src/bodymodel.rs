//! Mesh-free body geometry: surface markers regressed from joints and a
//! sphere-based volumetric body.
//!
//! Markers are convex combinations of joint positions, so marker
//! trajectories follow directly from skeleton motion. The shipped 67-marker
//! regressor is a stand-in for mesh-sampled mocap markers; supply your own
//! weights (or marker trajectories) when a calibrated set is available.

use std::path::Path;

use indexmap::IndexMap;
use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Skeleton;
use crate::scalar::Real;
use crate::trajectory::Trajectory;

pub const MARKER_COUNT: usize = 67;
pub const SPHERE_COUNT: usize = 45;

/// Default marker regressor and sphere layout for the shipped skeleton.
pub const DEFAULT_BODY_JSON: &str = include_str!("../data/body_default.json");

const WEIGHT_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSet<T: Real> {
    weights: DMatrix<T>,
    names: Vec<String>,
}

impl<T: Real> MarkerSet<T> {
    /// `weights` is `markers × joints`; each row must be a convex combination.
    pub fn new(weights: DMatrix<T>, names: Vec<String>) -> Result<Self> {
        if names.len() != weights.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "{} marker names for {} weight rows",
                names.len(),
                weights.nrows()
            )));
        }
        for (k, row) in weights.row_iter().enumerate() {
            if let Some(w) = row.iter().find(|w| !(**w >= T::zero())) {
                return Err(Error::InvariantViolation(format!(
                    "marker {:?} has negative or non-finite weight {}",
                    names[k],
                    w.as_f64()
                )));
            }
            let sum = row.sum().as_f64();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::InvariantViolation(format!(
                    "marker {:?} weights sum to {sum}, expected 1",
                    names[k]
                )));
            }
        }
        Ok(Self { weights, names })
    }

    pub fn weights(&self) -> &DMatrix<T> {
        &self.weights
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A sphere riding on the segment between two joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec<T: Real> {
    pub joint_a: usize,
    pub joint_b: usize,
    /// Interpolation fraction from `joint_a` (0) to `joint_b` (1).
    pub t: T,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereBody<T: Real> {
    spheres: Vec<SphereSpec<T>>,
    joints: usize,
}

impl<T: Real> SphereBody<T> {
    /// Any number of spheres; the shipped config additionally pins the count to 45.
    pub fn new(spheres: Vec<SphereSpec<T>>, joints: usize) -> Result<Self> {
        for (i, s) in spheres.iter().enumerate() {
            if s.joint_a >= joints || s.joint_b >= joints {
                return Err(Error::InvariantViolation(format!(
                    "sphere {i} references joint out of range ({}, {})",
                    s.joint_a, s.joint_b
                )));
            }
            if !(s.radius > T::zero()) || !s.radius.is_finite() {
                return Err(Error::InvariantViolation(format!(
                    "sphere {i} radius {} must be positive",
                    s.radius.as_f64()
                )));
            }
            if !(s.t >= T::zero() && s.t <= T::one()) {
                return Err(Error::InvariantViolation(format!(
                    "sphere {i} fraction t={} outside [0, 1]",
                    s.t.as_f64()
                )));
            }
        }
        Ok(Self { spheres, joints })
    }

    pub fn spheres(&self) -> &[SphereSpec<T>] {
        &self.spheres
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    pub fn max_radius(&self) -> T {
        self.spheres.iter().fold(T::zero(), |m, s| m.max(s.radius))
    }
}

/// Sphere centers over time plus their (constant) radii.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedSpheres<T: Real> {
    pub centers: Trajectory<T>,
    pub radii: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel<T: Real> {
    pub markers: MarkerSet<T>,
    pub spheres: SphereBody<T>,
}

impl<T: Real> BodyModel<T> {
    /// The shipped regressor/layout bound to `skeleton`'s joint names.
    pub fn default_for(skeleton: &Skeleton<T>) -> Result<Self> {
        Self::from_json_str(DEFAULT_BODY_JSON, skeleton)
    }

    pub fn from_json_str(text: &str, skeleton: &Skeleton<T>) -> Result<Self> {
        let file: BodyFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("body config: {e}")))?;
        file.into_model(skeleton)
    }

    pub fn load(path: impl AsRef<Path>, skeleton: &Skeleton<T>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, skeleton).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            Error::InvariantViolation(msg) => Error::InvariantViolation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical JSON form; zero weights are omitted.
    pub fn to_json_string(&self, skeleton: &Skeleton<T>) -> String {
        let names = skeleton.joint_names();
        let markers = self
            .markers
            .names
            .iter()
            .enumerate()
            .map(|(k, name)| MarkerEntry {
                name: name.clone(),
                weights: self
                    .markers
                    .weights
                    .row(k)
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != T::zero())
                    .map(|(j, w)| (names[j].clone(), w.as_f64()))
                    .collect(),
            })
            .collect();
        let spheres = self
            .spheres
            .spheres
            .iter()
            .map(|s| SphereEntry {
                a: names[s.joint_a].clone(),
                b: names[s.joint_b].clone(),
                t: s.t.as_f64(),
                radius: s.radius.as_f64(),
            })
            .collect();
        serde_json::to_string_pretty(&BodyFile { markers, spheres }).expect("body config serializes")
    }
}

/// Loads a body config from disk, binding joint names through `skeleton`.
pub fn load_body_config<T: Real>(path: impl AsRef<Path>, skeleton: &Skeleton<T>) -> Result<BodyModel<T>> {
    BodyModel::load(path, skeleton)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyFile {
    markers: Vec<MarkerEntry>,
    spheres: Vec<SphereEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkerEntry {
    name: String,
    weights: IndexMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereEntry {
    a: String,
    b: String,
    t: f64,
    radius: f64,
}

impl BodyFile {
    fn into_model<T: Real>(self, skeleton: &Skeleton<T>) -> Result<BodyModel<T>> {
        if self.markers.len() != MARKER_COUNT {
            return Err(Error::InvariantViolation(format!(
                "expected {MARKER_COUNT} markers, found {}",
                self.markers.len()
            )));
        }
        if self.spheres.len() != SPHERE_COUNT {
            return Err(Error::InvariantViolation(format!(
                "expected {SPHERE_COUNT} spheres, found {}",
                self.spheres.len()
            )));
        }
        let joints = skeleton.joint_count();
        let lookup = |name: &str, ctx: &str| {
            skeleton
                .joint_index(name)
                .ok_or_else(|| Error::InvariantViolation(format!("{ctx} references unknown joint {name:?}")))
        };
        let mut weights = DMatrix::zeros(MARKER_COUNT, joints);
        let mut names = Vec::with_capacity(MARKER_COUNT);
        for (k, m) in self.markers.iter().enumerate() {
            for (joint, w) in &m.weights {
                let j = lookup(joint, &format!("marker {:?}", m.name))?;
                weights[(k, j)] = T::lit(*w);
            }
            names.push(m.name.clone());
        }
        let markers = MarkerSet::new(weights, names)?;
        let spheres = self
            .spheres
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(SphereSpec {
                    joint_a: lookup(&s.a, &format!("sphere {i}"))?,
                    joint_b: lookup(&s.b, &format!("sphere {i}"))?,
                    t: T::lit(s.t),
                    radius: T::lit(s.radius),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BodyModel {
            markers,
            spheres: SphereBody::new(spheres, joints)?,
        })
    }
}

/// `marker[t, k] = Σ_j weights[k, j] · p[t, j]`.
pub fn regress_markers<T: Real>(p: &Trajectory<T>, ms: &MarkerSet<T>) -> Result<Trajectory<T>> {
    if p.points() != ms.weights.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "marker regressor expects {} joints, got {}",
            ms.weights.ncols(),
            p.points()
        )));
    }
    Ok(Trajectory::from_fn(p.frames(), ms.len(), |t, k| {
        let frame = p.frame(t);
        ms.weights
            .row(k)
            .iter()
            .zip(frame)
            .filter(|(w, _)| **w != T::zero())
            .fold(Vector3::zeros(), |acc, (w, x)| acc + x * *w)
    }))
}

/// Places every sphere at `(1 − t)·p[a] + t·p[b]`.
pub fn sphere_centers<T: Real>(p: &Trajectory<T>, sb: &SphereBody<T>) -> Result<PlacedSpheres<T>> {
    if p.points() != sb.joints {
        return Err(Error::ShapeMismatch(format!(
            "sphere body expects {} joints, got {}",
            sb.joints,
            p.points()
        )));
    }
    let centers = Trajectory::from_fn(p.frames(), sb.len(), |t, i| {
        let s = &sb.spheres[i];
        p.get(t, s.joint_a) * (T::one() - s.t) + p.get(t, s.joint_b) * s.t
    });
    Ok(PlacedSpheres {
        centers,
        radii: sb.spheres.iter().map(|s| s.radius).collect(),
    })
}
