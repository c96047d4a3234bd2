//! Orthonormal subspace bases.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// An orthonormal basis of a subspace `E` of `R^m`, stored as the columns of
/// an `m x dim(E)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Validates pairwise orthogonality and unit norms to 1e-10.
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (m, d) = (columns.nrows(), columns.ncols());
        if d == 0 || d > m {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {d} must be in 1..={m}"
            )));
        }
        if columns.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "subspace basis".into(),
            });
        }
        let gram = columns.transpose() * &columns;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "basis columns {i},{j} not orthonormal: gram entry {}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(SubspaceBasis { columns })
    }

    /// Coordinate subspace spanned by the given axes.
    pub fn coordinate(m: usize, axes: &[usize]) -> Result<Self> {
        if let Some(&bad) = axes.iter().find(|&&a| a >= m) {
            return Err(Error::IndexOutOfRange { index: bad, size: m });
        }
        let mut cols = DMatrix::zeros(m, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            cols[(a, j)] = 1.0;
        }
        Self::new(cols)
    }

    /// Haar-ish random subspace: QR of a Gaussian matrix.
    pub fn random<R: Rng>(m: usize, d: usize, rng: &mut R) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {d} must be in 1..={m}"
            )));
        }
        let g = DMatrix::from_fn(m, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        Self::new(q.columns(0, d).into_owned())
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// Coordinates of (the projection of) `v` in this basis: `B^T v`.
    pub fn to_coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.columns.transpose() * v
    }

    /// Embed basis coordinates back into the ambient space: `B z`.
    pub fn from_coords(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.columns * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_basis_is_orthonormal() {
        let mut rng = crate::rng::stream(3, 0);
        let b = SubspaceBasis::random(6, 3, &mut rng).unwrap();
        assert_eq!(b.ambient_dim(), 6);
        assert_eq!(b.dim(), 3);
    }

    #[test]
    fn coordinate_basis_projects_by_selection() {
        let b = SubspaceBasis::coordinate(4, &[1, 3]).unwrap();
        let v = DVector::from_column_slice(&[9.0, 7.0, 5.0, 3.0]);
        assert_eq!(b.to_coords(&v), DVector::from_column_slice(&[7.0, 3.0]));
    }

    #[test]
    fn non_orthonormal_rejected() {
        let cols = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!(SubspaceBasis::new(cols).is_err());
    }
}
