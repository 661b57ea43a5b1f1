//! Dense `frames × points × 3` storage used for joint positions, velocities
//! and marker trajectories.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    frames: usize,
    points: usize,
    data: Vec<Vector3<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Wraps frame-major point data (`data[t * points + j]`).
    pub fn new(frames: usize, points: usize, data: Vec<Vector3<T>>) -> Result<Self> {
        if data.len() != frames * points {
            return Err(Error::ShapeMismatch(format!(
                "trajectory of {frames}x{points} needs {} points, got {}",
                frames * points,
                data.len()
            )));
        }
        Ok(Self { frames, points, data })
    }

    pub fn zeros(frames: usize, points: usize) -> Self {
        Self {
            frames,
            points,
            data: vec![Vector3::zeros(); frames * points],
        }
    }

    pub fn from_fn(frames: usize, points: usize, mut f: impl FnMut(usize, usize) -> Vector3<T>) -> Self {
        let mut data = Vec::with_capacity(frames * points);
        for t in 0..frames {
            for j in 0..points {
                data.push(f(t, j));
            }
        }
        Self { frames, points, data }
    }

    /// Builds a trajectory from a flat `frames × points × 3` scalar buffer.
    pub fn from_flat(frames: usize, points: usize, flat: &[T]) -> Result<Self> {
        if flat.len() != frames * points * 3 {
            return Err(Error::ShapeMismatch(format!(
                "flat trajectory of {frames}x{points}x3 needs {} values, got {}",
                frames * points * 3,
                flat.len()
            )));
        }
        let data = flat
            .chunks_exact(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        Ok(Self { frames, points, data })
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.data.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
    }

    #[inline]
    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> Vector3<T> {
        self.data[t * self.points + j]
    }

    #[inline]
    pub fn get_mut(&mut self, t: usize, j: usize) -> &mut Vector3<T> {
        &mut self.data[t * self.points + j]
    }

    #[inline]
    pub fn frame(&self, t: usize) -> &[Vector3<T>] {
        &self.data[t * self.points..(t + 1) * self.points]
    }

    #[inline]
    pub fn frame_mut(&mut self, t: usize) -> &mut [Vector3<T>] {
        &mut self.data[t * self.points..(t + 1) * self.points]
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = &[Vector3<T>]> + '_ {
        self.data.chunks_exact(self.points.max(1)).take(self.frames)
    }

    pub fn data(&self) -> &[Vector3<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Vector3<T>] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.x.is_finite() && v.y.is_finite() && v.z.is_finite())
    }

    /// Applies `f` to every point.
    pub fn map(&self, f: impl Fn(&Vector3<T>) -> Vector3<T>) -> Self {
        Self {
            frames: self.frames,
            points: self.points,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Keeps only the first `points` points of every frame.
    pub fn truncate_points(&self, points: usize) -> Result<Self> {
        if points > self.points {
            return Err(Error::ShapeMismatch(format!(
                "cannot keep {points} of {} points",
                self.points
            )));
        }
        Ok(Self::from_fn(self.frames, points, |t, j| self.get(t, j)))
    }

    pub(crate) fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.frames != other.frames || self.points != other.points {
            return Err(Error::ShapeMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.frames, self.points, other.frames, other.points
            )));
        }
        Ok(())
    }
}
