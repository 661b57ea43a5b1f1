//! Continuous 6D rotation encoding: the first two columns of a rotation
//! matrix, decoded by Gram–Schmidt.

use nalgebra::{Matrix3, Matrix3x6, Vector3};

use crate::error::{Error, Result};
use crate::scalar::Real;

const DEGENERATE_NORM: f64 = 1e-8;
const ROTATION_CHECK_TOL: f64 = 1e-4;

/// Two 3-vectors spanning the first two columns of a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation6D<T: Real> {
    pub a: Vector3<T>,
    pub b: Vector3<T>,
}

impl<T: Real> Rotation6D<T> {
    pub fn new(a: Vector3<T>, b: Vector3<T>) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self {
            a: Vector3::x(),
            b: Vector3::y(),
        }
    }

    /// Components in storage order `(a.x, a.y, a.z, b.x, b.y, b.z)`.
    pub fn to_array(&self) -> [T; 6] {
        [self.a.x, self.a.y, self.a.z, self.b.x, self.b.y, self.b.z]
    }

    pub fn from_slice(c: &[T]) -> Self {
        Self {
            a: Vector3::new(c[0], c[1], c[2]),
            b: Vector3::new(c[3], c[4], c[5]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn to_matrix(&self) -> Result<Matrix3<T>> {
        rot6d_to_matrix(self)
    }

    /// Re-expresses this rotation with orthonormal `a`, `b`.
    pub fn normalized(&self) -> Result<Self> {
        let m = rot6d_to_matrix(self)?;
        Ok(Self {
            a: m.column(0).into_owned(),
            b: m.column(1).into_owned(),
        })
    }
}

impl<T: Real> Default for Rotation6D<T> {
    fn default() -> Self {
        Self::identity()
    }
}

struct GramSchmidt<T: Real> {
    c1: Vector3<T>,
    c2: Vector3<T>,
    norm_a: T,
    norm_u: T,
}

fn gram_schmidt<T: Real>(r: &Rotation6D<T>) -> Result<GramSchmidt<T>> {
    if !r.is_finite() {
        return Err(Error::DegenerateRotation("non-finite component".into()));
    }
    let norm_a = r.a.norm();
    if norm_a.as_f64() < DEGENERATE_NORM {
        return Err(Error::DegenerateRotation(format!(
            "first column norm {:.3e} below {DEGENERATE_NORM:e}",
            norm_a.as_f64()
        )));
    }
    let c1 = r.a / norm_a;
    let u = r.b - c1 * r.b.dot(&c1);
    let norm_u = u.norm();
    if norm_u.as_f64() < DEGENERATE_NORM {
        return Err(Error::DegenerateRotation(format!(
            "second column parallel to first (residual norm {:.3e})",
            norm_u.as_f64()
        )));
    }
    Ok(GramSchmidt {
        c1,
        c2: u / norm_u,
        norm_a,
        norm_u,
    })
}

/// Decodes a 6D rotation: `c1 = â`, `c2 = normalize(b − (b·c1)c1)`, `c3 = c1 × c2`.
pub fn rot6d_to_matrix<T: Real>(r: &Rotation6D<T>) -> Result<Matrix3<T>> {
    let gs = gram_schmidt(r)?;
    let c3 = gs.c1.cross(&gs.c2);
    Ok(Matrix3::from_columns(&[gs.c1, gs.c2, c3]))
}

/// Encodes a proper rotation matrix by its first two columns.
pub fn matrix_to_rot6d<T: Real>(m: &Matrix3<T>) -> Result<Rotation6D<T>> {
    let gram = m.transpose() * m - Matrix3::identity();
    let orthonormality = gram.iter().fold(0.0f64, |acc, v| acc.max(v.as_f64().abs()));
    let determinant = m.determinant().as_f64();
    if !(orthonormality <= ROTATION_CHECK_TOL) || !((determinant - 1.0).abs() <= ROTATION_CHECK_TOL) {
        return Err(Error::NotARotation {
            orthonormality,
            determinant,
        });
    }
    Ok(Rotation6D {
        a: m.column(0).into_owned(),
        b: m.column(1).into_owned(),
    })
}

/// Cross-product matrix `[v]×` with `[v]× w = v × w`.
fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(
        T::zero(),
        -v.z,
        v.y,
        v.z,
        T::zero(),
        -v.x,
        -v.y,
        v.x,
        T::zero(),
    )
}

/// Derivatives of the decoded columns with respect to the six raw components.
///
/// Returns `[∂c1, ∂c2, ∂c3]`, each a 3×6 block whose columns follow
/// [`Rotation6D::to_array`] order.
pub fn rot6d_column_jacobians<T: Real>(r: &Rotation6D<T>) -> Result<[Matrix3x6<T>; 3]> {
    let gs = gram_schmidt(r)?;
    let eye = Matrix3::<T>::identity();
    let (c1, c2) = (gs.c1, gs.c2);
    let b_dot_c1 = r.b.dot(&c1);

    let proj1 = eye - c1 * c1.transpose();
    let dc1_da = proj1 / gs.norm_a;

    // u = (I − c1 c1ᵀ) b
    let du_dc1 = -(c1 * r.b.transpose() + eye * b_dot_c1);
    let du_da = du_dc1 * dc1_da;
    let du_db = proj1;
    let dc2_du = (eye - c2 * c2.transpose()) / gs.norm_u;
    let dc2_da = dc2_du * du_da;
    let dc2_db = dc2_du * du_db;

    // c3 = c1 × c2
    let dc3_da = skew(&c1) * dc2_da - skew(&c2) * dc1_da;
    let dc3_db = skew(&c1) * dc2_db;

    let mut out = [Matrix3x6::zeros(), Matrix3x6::zeros(), Matrix3x6::zeros()];
    out[0].fixed_view_mut::<3, 3>(0, 0).copy_from(&dc1_da);
    out[1].fixed_view_mut::<3, 3>(0, 0).copy_from(&dc2_da);
    out[1].fixed_view_mut::<3, 3>(0, 3).copy_from(&dc2_db);
    out[2].fixed_view_mut::<3, 3>(0, 0).copy_from(&dc3_da);
    out[2].fixed_view_mut::<3, 3>(0, 3).copy_from(&dc3_db);
    Ok(out)
}

/// Derivative of `R(r)·w` with respect to the raw 6D components, for fixed `w`.
pub fn rotate_jacobian<T: Real>(r: &Rotation6D<T>, w: &Vector3<T>) -> Result<Matrix3x6<T>> {
    let [d1, d2, d3] = rot6d_column_jacobians(r)?;
    Ok(d1 * w.x + d2 * w.y + d3 * w.z)
}
