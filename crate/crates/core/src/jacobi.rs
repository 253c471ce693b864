//! Jacobi eigensolvers for dense complex matrices.
//!
//! Two-sided cyclic Jacobi for Hermitian eigendecompositions and
//! one-sided (Hestenes) Jacobi for singular values. Both converge
//! unconditionally at desk scale and keep full accuracy on clustered
//! spectra, where faster tridiagonalization-based solvers can silently
//! lose digits.

use nalgebra::Complex;

use crate::cmatrix::CMatrix;

type C = Complex<f64>;

const MAX_SWEEPS: usize = 60;

/// Small rotation angle zeroing the off-diagonal entry `r > 0` of the
/// real symmetric 2×2 matrix `[[α, r], [r, β]]`: the root of
/// `t² − 2τt − 1 = 0` with the smaller magnitude, `τ = (β − α)/(2r)`.
fn small_tangent(tau: f64) -> f64 {
    if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    }
}

/// Two mutable column slices of a column-major buffer.
fn column_pair(data: &mut [C], rows: usize, p: usize, q: usize) -> (&mut [C], &mut [C]) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * rows);
    (&mut head[p * rows..(p + 1) * rows], &mut tail[..rows])
}

/// Applies the plane rotation `[x', y'] = [x, y]·J` with
/// `J = [[c, −s], [s·e^{−iφ}, c·e^{−iφ}]]` to a pair of columns.
fn rotate_columns(x: &mut [C], y: &mut [C], c: f64, s: f64, phase_conj: C) {
    let sp = phase_conj * s;
    let cp = phase_conj * c;
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = a * c + b * sp;
        *yi = b * cp - a * s;
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic two-sided Jacobi.
///
/// Returns eigenvalues ascending with matching eigenvector columns. The
/// input is taken as exactly Hermitian (callers symmetrize first); only
/// its Hermitian part influences the result.
pub fn hermitian_eigen_jacobi(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = CMatrix::identity(n, n);
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return (vals, v);
    }

    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    let stop = 1e-15 * scale;
    let skip = 1e-18 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += 2.0 * a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let gamma = a[(p, q)];
                let r = gamma.norm();
                if r <= skip {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let phase = gamma / C::new(r, 0.0);
                let tau = (beta - alpha) / (2.0 * r);
                let t = small_tangent(tau);
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← J* A J as the column update A·J followed by the
                // row update J*·A; V ← V·J.
                {
                    let (cp, cq) = column_pair(a.as_mut_slice(), n, p, q);
                    rotate_columns(cp, cq, c, s, phase.conj());
                }
                {
                    let data = a.as_mut_slice();
                    let spc = phase * s;
                    let cpc = phase * c;
                    for k in 0..n {
                        let ip = p + k * n;
                        let iq = q + k * n;
                        let apk = data[ip];
                        let aqk = data[iq];
                        data[ip] = apk * c + aqk * spc;
                        data[iq] = aqk * cpc - apk * s;
                    }
                }
                {
                    let (vp, vq) = column_pair(v.as_mut_slice(), n, p, q);
                    rotate_columns(vp, vq, c, s, phase.conj());
                }
                // pin the zeroed pair and the real diagonal
                a[(p, q)] = C::new(0.0, 0.0);
                a[(q, p)] = C::new(0.0, 0.0);
                a[(p, p)] = C::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &v.column(i));
    }
    (vals, vecs)
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi: returns
/// `(u, sigma, v)` with `m = u · diag(sigma) · v*` and
/// `sigma.len() = min(rows, cols)` descending. Columns of `u` belonging
/// to zero singular values are zero — callers needing a full basis must
/// complete it themselves.
pub fn svd_jacobi(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    if rows < cols {
        let (u, sigma, v) = svd_jacobi(&m.adjoint());
        return (v, sigma, u);
    }
    let mut work = m.clone();
    let mut v = CMatrix::identity(cols, cols);
    if cols == 0 {
        return (work, Vec::new(), v);
    }

    let scale: f64 = work.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..cols - 1 {
                for q in p + 1..cols {
                    let (alpha, beta, gamma) = {
                        let data = work.as_slice();
                        let cp = &data[p * rows..(p + 1) * rows];
                        let cq = &data[q * rows..(q + 1) * rows];
                        let mut alpha = 0.0f64;
                        let mut beta = 0.0f64;
                        let mut gamma = C::new(0.0, 0.0);
                        for (wp, wq) in cp.iter().zip(cq) {
                            alpha += wp.norm_sqr();
                            beta += wq.norm_sqr();
                            gamma += wp.conj() * wq;
                        }
                        (alpha, beta, gamma)
                    };
                    let r = gamma.norm();
                    if r <= 1e-15 * (alpha * beta).sqrt() + 1e-30 * scale * scale {
                        continue;
                    }
                    rotated = true;
                    let phase = gamma / C::new(r, 0.0);
                    let tau = (beta - alpha) / (2.0 * r);
                    let t = small_tangent(tau);
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    {
                        let (cp, cq) = column_pair(work.as_mut_slice(), rows, p, q);
                        rotate_columns(cp, cq, c, s, phase.conj());
                    }
                    {
                        let (vp, vq) = column_pair(v.as_mut_slice(), cols, p, q);
                        rotate_columns(vp, vq, c, s, phase.conj());
                    }
                }
            }
            if !rotated {
                break;
            }
        }
    }

    let mut sigma: Vec<(f64, usize)> = (0..cols).map(|j| (work.column(j).norm(), j)).collect();
    sigma.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut u = CMatrix::zeros(rows, cols);
    let mut v_sorted = CMatrix::zeros(cols, cols);
    let mut values = Vec::with_capacity(cols);
    for (col, &(s, j)) in sigma.iter().enumerate() {
        values.push(s);
        v_sorted.set_column(col, &v.column(j));
        if s > 0.0 {
            let scaled = work.column(j) / C::new(s, 0.0);
            u.set_column(col, &scaled);
        }
    }
    (u, values, v_sorted)
}

/// Singular values only, descending.
pub fn singular_values_jacobi(m: &CMatrix) -> Vec<f64> {
    svd_jacobi(m).1
}
