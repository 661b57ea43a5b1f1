//! Fréchet distance between Gaussian fits of raw joint-position frames.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Ridge added to both covariances when a fit is rank deficient.
pub const COVARIANCE_RIDGE: f64 = 1e-10;
/// Eigenvalues below this are treated as a failed square root.
pub const NEGATIVE_EIGEN_TOL: f64 = -1e-8;

/// One row per frame: the flattened global joint positions, optionally
/// relative to the root joint.
pub fn pose_features<T: Real>(positions: &Trajectory<T>, root_centered: Option<usize>) -> DMatrix<T> {
    let width = positions.points() * 3;
    DMatrix::from_fn(positions.frames(), width, |t, c| {
        let p = positions.get(t, c / 3);
        let p = match root_centered {
            Some(root) => p - positions.get(t, root),
            None => p,
        };
        p[c % 3]
    })
}

/// Sample mean and unbiased covariance of the rows of `features`.
pub fn gaussian_stats<T: Real>(features: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let n = features.nrows();
    let mean = features.row_mean().transpose();
    let mut centered = features.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let denom = T::lit(n.saturating_sub(1).max(1) as f64);
    let cov = centered.transpose() * &centered / denom;
    (mean, cov)
}

fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Either the distance or the offending smallest eigenvalue.
fn try_frechet<T: Real>(
    mu_a: &DVector<T>,
    cov_a: &DMatrix<T>,
    mu_b: &DVector<T>,
    cov_b: &DMatrix<T>,
) -> std::result::Result<T, f64> {
    let tol = T::lit(NEGATIVE_EIGEN_TOL);
    let check = |values: &DVector<T>| -> std::result::Result<(), f64> {
        let min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.as_f64()));
        if values.iter().any(|v| !v.is_finite()) {
            return Err(f64::NAN);
        }
        if values.iter().any(|v| *v < tol) {
            return Err(min);
        }
        Ok(())
    };
    let eig_a = SymmetricEigen::new(symmetrize(cov_a));
    check(&eig_a.eigenvalues)?;
    let sqrt_vals = eig_a.eigenvalues.map(|v| v.max(T::zero()).sqrt());
    let sqrt_a = &eig_a.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig_a.eigenvectors.transpose();
    // Tr((Σa Σb)^½) = Tr((Σa^½ Σb Σa^½)^½)
    let inner = symmetrize(&(&sqrt_a * cov_b * &sqrt_a));
    let eig_m = SymmetricEigen::new(inner);
    check(&eig_m.eigenvalues)?;
    let tr_sqrt = eig_m.eigenvalues.iter().fold(T::zero(), |acc, v| acc + v.max(T::zero()).sqrt());
    let d = (mu_a - mu_b).norm_squared() + cov_a.trace() + cov_b.trace() - T::lit(2.0) * tr_sqrt;
    if !d.is_finite() {
        return Err(f64::NAN);
    }
    Ok(d.max(T::zero()))
}

/// `‖μa − μb‖² + Tr(Σa + Σb − 2(Σa Σb)^½)`.
///
/// Retries once with [`COVARIANCE_RIDGE`] added to both covariances before
/// reporting [`Error::RankDeficient`].
pub fn frechet_distance<T: Real>(
    mu_a: &DVector<T>,
    cov_a: &DMatrix<T>,
    mu_b: &DVector<T>,
    cov_b: &DMatrix<T>,
) -> Result<T> {
    let d = mu_a.len();
    if mu_b.len() != d || cov_a.shape() != (d, d) || cov_b.shape() != (d, d) {
        return Err(Error::ShapeMismatch(format!(
            "gaussians of dimension {d} and {} (covariances {:?}, {:?})",
            mu_b.len(),
            cov_a.shape(),
            cov_b.shape()
        )));
    }
    match try_frechet(mu_a, cov_a, mu_b, cov_b) {
        Ok(v) => Ok(v),
        Err(_) => {
            let ridge = DMatrix::identity(d, d) * T::lit(COVARIANCE_RIDGE);
            try_frechet(mu_a, &(cov_a + &ridge), mu_b, &(cov_b + &ridge))
                .map_err(|min_eigenvalue| Error::RankDeficient { min_eigenvalue })
        }
    }
}

/// Fréchet distance between Gaussian fits of two feature sets (rows are frames).
///
/// Sets with no more frames than feature dimensions get the covariance
/// ridge up front.
pub fn fid_star<T: Real>(set_a: &DMatrix<T>, set_b: &DMatrix<T>) -> Result<T> {
    if set_a.ncols() != set_b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "feature widths {} and {}",
            set_a.ncols(),
            set_b.ncols()
        )));
    }
    if set_a.nrows() == 0 || set_b.nrows() == 0 {
        return Err(Error::TooShort { needed: 1, found: 0 });
    }
    let dim = set_a.ncols();
    let (mu_a, mut cov_a) = gaussian_stats(set_a);
    let (mu_b, mut cov_b) = gaussian_stats(set_b);
    if set_a.nrows() <= dim || set_b.nrows() <= dim {
        let ridge = DMatrix::identity(dim, dim) * T::lit(COVARIANCE_RIDGE);
        cov_a += &ridge;
        cov_b += &ridge;
    }
    frechet_distance(&mu_a, &cov_a, &mu_b, &cov_b)
}
