//! Joint hierarchy and rest-pose offsets.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default 22-joint body skeleton shipped with the crate (z-up, meters).
pub const SMPL22_JSON: &str = include_str!("../../data/skeleton_smpl22.json");

/// Number of body joints in the motion representation.
pub const BODY_JOINTS: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton<T: Real> {
    joint_names: Vec<String>,
    parent: Vec<Option<usize>>,
    rest_offset: Vec<Vector3<T>>,
    root: usize,
    left_foot: usize,
    right_foot: usize,
    /// Joints ordered so that every parent precedes its children.
    order: Vec<usize>,
}

impl<T: Real> Skeleton<T> {
    pub fn new(
        joint_names: Vec<String>,
        parent: Vec<Option<usize>>,
        rest_offset: Vec<Vector3<T>>,
        root: usize,
        left_foot: usize,
        right_foot: usize,
    ) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidSkeleton("no joints".into()));
        }
        if joint_names.len() != n || rest_offset.len() != n {
            return Err(Error::InvalidSkeleton(format!(
                "{} parents, {} names, {} offsets",
                n,
                joint_names.len(),
                rest_offset.len()
            )));
        }
        for (what, idx) in [("root", root), ("left_foot", left_foot), ("right_foot", right_foot)] {
            if idx >= n {
                return Err(Error::InvalidSkeleton(format!("{what} index {idx} out of range")));
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&j| parent[j].is_none()).collect();
        if roots != [root] {
            return Err(Error::InvalidSkeleton(format!(
                "expected exactly one parentless joint ({root}), found {roots:?}"
            )));
        }
        let mut children = vec![Vec::new(); n];
        for (j, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::InvalidSkeleton(format!("joint {j} has parent {p} out of range")));
                }
                children[p].push(j);
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(j) = stack.pop() {
            order.push(j);
            stack.extend(children[j].iter().rev());
        }
        if order.len() != n {
            return Err(Error::InvalidSkeleton("parent table contains a cycle".into()));
        }
        for j in 0..n {
            if j != root && !(rest_offset[j].norm() > T::zero()) {
                return Err(Error::InvalidSkeleton(format!(
                    "joint {} ({}) has a zero-length rest offset",
                    j, joint_names[j]
                )));
            }
        }
        Ok(Self {
            joint_names,
            parent,
            rest_offset,
            root,
            left_foot,
            right_foot,
            order,
        })
    }

    /// The shipped 22-joint skeleton.
    pub fn smpl22() -> Self {
        Self::from_json_str(SMPL22_JSON).expect("shipped skeleton config is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SkeletonFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("skeleton config: {e}")))?;
        file.into_skeleton()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        let file = SkeletonFile {
            joints: (0..self.joint_count())
                .map(|j| JointEntry {
                    name: self.joint_names[j].clone(),
                    parent: self.parent[j].map(|p| self.joint_names[p].clone()),
                    offset: [
                        self.rest_offset[j].x.as_f64(),
                        self.rest_offset[j].y.as_f64(),
                        self.rest_offset[j].z.as_f64(),
                    ],
                })
                .collect(),
            root: self.joint_names[self.root].clone(),
            left_foot: self.joint_names[self.left_foot].clone(),
            right_foot: self.joint_names[self.right_foot].clone(),
        };
        serde_json::to_string_pretty(&file).expect("skeleton serializes")
    }

    #[inline]
    pub fn joint_count(&self) -> usize {
        self.parent.len()
    }

    #[inline]
    pub fn parent(&self, j: usize) -> Option<usize> {
        self.parent[j]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    #[inline]
    pub fn rest_offset(&self, j: usize) -> Vector3<T> {
        self.rest_offset[j]
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    #[inline]
    pub fn root(&self) -> usize {
        self.root
    }

    #[inline]
    pub fn left_foot(&self) -> usize {
        self.left_foot
    }

    #[inline]
    pub fn right_foot(&self) -> usize {
        self.right_foot
    }

    /// Parent-before-child traversal order.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// `(parent, child)` pairs in child index order; `joint_count − 1` bones.
    pub fn bones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.joint_count()).filter_map(move |j| self.parent[j].map(|p| (p, j)))
    }

    pub fn bone_count(&self) -> usize {
        self.joint_count() - 1
    }

    /// True when `ancestor` lies strictly above `j` in the tree.
    pub fn is_ancestor(&self, ancestor: usize, j: usize) -> bool {
        let mut cur = self.parent[j];
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.parent[p];
        }
        false
    }

    /// Global rest positions with the root at the origin.
    pub fn rest_positions(&self) -> Vec<Vector3<T>> {
        let mut pos = vec![Vector3::zeros(); self.joint_count()];
        for &j in &self.order {
            if let Some(p) = self.parent[j] {
                pos[j] = pos[p] + self.rest_offset[j];
            }
        }
        pos
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SkeletonFile {
    joints: Vec<JointEntry>,
    root: String,
    left_foot: String,
    right_foot: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointEntry {
    name: String,
    parent: Option<String>,
    offset: [f64; 3],
}

impl SkeletonFile {
    fn into_skeleton<T: Real>(self) -> Result<Skeleton<T>> {
        let names: Vec<String> = self.joints.iter().map(|j| j.name.clone()).collect();
        let lookup = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidSkeleton(format!("unknown joint name {name:?}")))
        };
        let mut parent = Vec::with_capacity(names.len());
        let mut offsets = Vec::with_capacity(names.len());
        for j in &self.joints {
            parent.push(match &j.parent {
                Some(p) => Some(lookup(p)?),
                None => None,
            });
            if j.offset.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSkeleton(format!("joint {:?} has a non-finite offset", j.name)));
            }
            offsets.push(Vector3::new(T::lit(j.offset[0]), T::lit(j.offset[1]), T::lit(j.offset[2])));
        }
        let root = lookup(&self.root)?;
        let left = lookup(&self.left_foot)?;
        let right = lookup(&self.right_foot)?;
        Skeleton::new(names, parent, offsets, root, left, right)
    }
}
