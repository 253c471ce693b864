//! Dense complex matrices and the small amount of spectral calculus the
//! rest of the crate needs: Hermitian eigendecompositions, operator norms,
//! positive square roots, and the JSON wire encoding shared by every module.

use nalgebra::{Complex, DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix, the scalar field of the whole crate.
pub type CMatrix = DMatrix<Complex<f64>>;

/// Complex scalar shorthand.
pub type C64 = Complex<f64>;

/// `true` iff every entry is finite (no NaN or infinity in either part).
pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Identity of size `n`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Zero matrix of shape `(rows, cols)`.
pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a matrix from a real one.
pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

/// Diagonal complex matrix from real entries.
pub fn diag_real(entries: &[f64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(entries[i], 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    })
}

/// Forces exact Hermitian symmetry: `(M + M*)/2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Operator (spectral) norm via singular values.
pub fn opnorm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    crate::jacobi::singular_values_jacobi(m)
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Frobenius norm.
pub fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// All singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    crate::jacobi::singular_values_jacobi(m)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized first so that roundoff in the caller cannot
/// leak into complex eigenvalues. Returns `(eigenvalues, eigenvectors)`
/// with real eigenvalues in ascending order and unitary eigenvector
/// columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !is_finite(m) {
        return Err(Error::NonFinite("hermitian_eigen input"));
    }
    let h = hermitize(m);
    let (vals, vecs) = crate::jacobi::hermitian_eigen_jacobi(&h);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigFailure("hermitian eigendecomposition diverged"));
    }
    Ok((vals, vecs))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_calculus(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let diag = DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex::new(f(v), 0.0)));
    let scaled = &vecs * CMatrix::from_diagonal(&diag);
    Ok(scaled * vecs.adjoint())
}

/// Positive square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues are clamped at zero before the root is taken.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    hermitian_calculus(m, |v| v.max(0.0).sqrt())
}

/// Inverse square root of a Hermitian positive definite matrix.
///
/// `margin` is the smallest admissible eigenvalue; anything below it is a
/// hard error rather than a silent regularization.
pub fn inv_sqrt_pd(m: &CMatrix, margin: f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(m)?;
    if let Some(&min) = vals.first() {
        if min < margin {
            return Err(Error::NotPositiveDefinite { min, margin });
        }
    }
    let diag = DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| Complex::new(1.0 / v.sqrt(), 0.0)),
    );
    let scaled = &vecs * CMatrix::from_diagonal(&diag);
    Ok(scaled * vecs.adjoint())
}

/// Unitary defect `‖U*U − 1‖`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    opnorm(&(u.adjoint() * u - identity(n)))
}

/// Direct sum `a ⊕ b` (block diagonal).
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Stacks four blocks into `[[a, b], [c, d]]`.
pub fn block2x2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(c.nrows(), d.nrows());
    assert_eq!(a.ncols(), c.ncols());
    assert_eq!(b.ncols(), d.ncols());
    let (ra, ca) = a.shape();
    let (rc, cb) = (c.nrows(), b.ncols());
    let mut out = CMatrix::zeros(ra + rc, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((0, ca), (ra, cb)).copy_from(b);
    out.view_mut((ra, 0), (rc, ca)).copy_from(c);
    out.view_mut((ra, ca), (rc, cb)).copy_from(d);
    out
}

/// JSON wire form of a complex matrix: nested row-major arrays of
/// `[re, im]` pairs. Every module reuses this encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJson(pub CMatrix);

impl Serialize for MatrixJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.0;
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixJson {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let m = CMatrix::from_fn(nrows, ncols, |i, j| {
            Complex::new(rows[i][j][0], rows[i][j][1])
        });
        Ok(MatrixJson(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn hermitian_eigen_complex_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[cx(2.0, 0.0), cx(0.0, 1.0), cx(0.0, -1.0), cx(2.0, 0.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        assert!(unitarity_defect(&vecs) < 1e-12);
        // reconstruct
        let d = diag_real(&vals);
        let rec = &vecs * d * vecs.adjoint();
        assert!(opnorm(&(rec - m)) < 1e-12);
    }

    #[test]
    fn opnorm_matches_known_values() {
        let m = from_real(&DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]));
        assert!((opnorm(&m) - 4.0).abs() < 1e-13);
        assert_eq!(opnorm(&zeros(3, 2)), 0.0);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[cx(2.0, 0.0), cx(1.0, 1.0), cx(1.0, -1.0), cx(3.0, 0.0)],
        );
        let r = sqrt_psd(&m).unwrap();
        assert!(opnorm(&(&r * &r - m)) < 1e-12);
    }

    #[test]
    fn inv_sqrt_rejects_indefinite() {
        let m = diag_real(&[1.0, -0.5]);
        assert!(inv_sqrt_pd(&m, 1e-9).is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = CMatrix::from_row_slice(1, 2, &[cx(1.5, -2.0), cx(0.0, 3.25)]);
        let s = serde_json::to_string(&MatrixJson(m.clone())).unwrap();
        assert_eq!(s, "[[[1.5,-2.0],[0.0,3.25]]]");
        let back: MatrixJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, m);
    }
}
