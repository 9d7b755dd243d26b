//! Minimal dense linear algebra for the regression module: Householder QR
//! with rank diagnostics, Cholesky for symmetric positive-definite solves,
//! and small matrix products. Row-major storage; desk-scale dimensions.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first()?.len();
        if rows.iter().any(|row| row.len() != c) || c == 0 {
            return None;
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Some(Mat {
            rows: r,
            cols: c,
            data,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    /// `A^T A`.
    pub fn gram(&self) -> Mat {
        let mut g = Mat::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut s = 0.0;
                for r in 0..self.rows {
                    s += self.at(r, i) * self.at(r, j);
                }
                *g.at_mut(i, j) = s;
                *g.at_mut(j, i) = s;
            }
        }
        g
    }

    /// `A x` for a vector.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * x[j]).sum())
            .collect()
    }
}

/// Householder QR factorization of a tall matrix (`rows >= cols`).
///
/// Stores the reflectors in the lower trapezoid and `R` in the upper
/// triangle, LAPACK style.
#[derive(Debug, Clone)]
pub struct Qr {
    h: Mat,
    /// Leading scalar of each reflector.
    tau: Vec<f64>,
    r_diag: Vec<f64>,
}

impl Qr {
    pub fn factor(a: &Mat) -> Qr {
        assert!(a.rows >= a.cols, "QR expects rows >= cols");
        let mut h = a.clone();
        let k = a.cols;
        let mut tau = vec![0.0; k];
        let mut r_diag = vec![0.0; k];
        for j in 0..k {
            // Norm of the column below (and including) the diagonal.
            let mut norm2 = 0.0;
            for i in j..h.rows {
                norm2 += h.at(i, j) * h.at(i, j);
            }
            let norm = norm2.sqrt();
            let pivot = h.at(j, j);
            if norm == 0.0 {
                r_diag[j] = 0.0;
                tau[j] = 0.0;
                continue;
            }
            let alpha = if pivot >= 0.0 { -norm } else { norm };
            r_diag[j] = alpha;
            // v = x - alpha e1, normalized so v[0] = 1.
            let v0 = pivot - alpha;
            if v0 == 0.0 {
                tau[j] = 0.0;
                continue;
            }
            for i in (j + 1)..h.rows {
                *h.at_mut(i, j) /= v0;
            }
            tau[j] = -v0 / alpha;
            *h.at_mut(j, j) = alpha;
            // Apply the reflector to the remaining columns.
            for c in (j + 1)..k {
                let mut dot = h.at(j, c);
                for i in (j + 1)..h.rows {
                    dot += h.at(i, j) * h.at(i, c);
                }
                let scale = tau[j] * dot;
                *h.at_mut(j, c) -= scale;
                for i in (j + 1)..h.rows {
                    let hij = h.at(i, j);
                    *h.at_mut(i, c) -= scale * hij;
                }
            }
        }
        Qr { h, tau, r_diag }
    }

    /// Absolute values of the diagonal of `R`; the rank diagnostic.
    pub fn r_diag_abs(&self) -> Vec<f64> {
        self.r_diag.iter().map(|d| d.abs()).collect()
    }

    /// True iff `min |r_ii| > rel_tol * max |r_ii|` (and the max is
    /// positive).
    pub fn is_full_rank(&self, rel_tol: f64) -> bool {
        let diag = self.r_diag_abs();
        let max = diag.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return false;
        }
        diag.iter().all(|&d| d > rel_tol * max)
    }

    /// Applies `Q^T` to a vector of length `rows`.
    pub fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.h.rows);
        let mut out = y.to_vec();
        for j in 0..self.h.cols {
            if self.tau[j] == 0.0 {
                continue;
            }
            let mut dot = out[j];
            for i in (j + 1)..self.h.rows {
                dot += self.h.at(i, j) * out[i];
            }
            let scale = self.tau[j] * dot;
            out[j] -= scale;
            for i in (j + 1)..self.h.rows {
                out[i] -= scale * self.h.at(i, j);
            }
        }
        out
    }

    /// Least-squares solve `min ||A x - y||` via `R x = Q^T y`.
    pub fn solve_ls(&self, y: &[f64]) -> Option<Vec<f64>> {
        let k = self.h.cols;
        let qty = self.apply_qt(y);
        let mut x = vec![0.0; k];
        for j in (0..k).rev() {
            let mut s = qty[j];
            for c in (j + 1)..k {
                s -= self.h.at(j, c) * x[c];
            }
            let d = self.r_diag[j];
            if d == 0.0 {
                return None;
            }
            x[j] = s / d;
        }
        Some(x)
    }
}

/// Cholesky factor (lower triangular) of a symmetric positive-definite
/// matrix; `None` when a pivot fails.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                *l.at_mut(i, j) = s.sqrt();
            } else {
                *l.at_mut(i, j) = s / l.at(j, j);
            }
        }
    }
    Some(l)
}

/// Solves `A x = b` given the Cholesky factor `L` of `A`.
pub fn chol_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    assert_eq!(b.len(), n);
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l.at(i, k) * y[k];
        }
        y[i] = s / l.at(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l.at(k, i) * x[k];
        }
        x[i] = s / l.at(i, i);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn qr_reproduces_least_squares_mean() {
        // Column of ones: LS solution is the mean.
        let a = Mat::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let qr = Qr::factor(&a);
        let x = qr.solve_ls(&[1.0, 2.0, 3.0]).unwrap();
        approx(&x, &[2.0], 1e-14);
    }

    #[test]
    fn qr_recovers_exact_solutions() {
        let a = Mat::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
            vec![0.5, 0.5, 0.5],
        ])
        .unwrap();
        let truth = vec![1.0, -2.0, 0.5];
        let y = a.mul_vec(&truth);
        let qr = Qr::factor(&a);
        assert!(qr.is_full_rank(1e-10));
        let x = qr.solve_ls(&y).unwrap();
        approx(&x, &truth, 1e-12);
    }

    #[test]
    fn qr_flags_rank_deficiency() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        let qr = Qr::factor(&a);
        assert!(!qr.is_full_rank(1e-10));
    }

    #[test]
    fn qt_preserves_norms() {
        let a = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.5], vec![2.0, -1.0]]).unwrap();
        let qr = Qr::factor(&a);
        let y = [1.0, -2.0, 3.0];
        let qty = qr.apply_qt(&y);
        let n1: f64 = y.iter().map(|v| v * v).sum();
        let n2: f64 = qty.iter().map(|v| v * v).sum();
        assert!((n1 - n2).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Mat::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        let x = chol_solve(&l, &[1.0, 2.0]);
        approx(&a.mul_vec(&x), &[1.0, 2.0], 1e-13);
        let not_pd = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cholesky(&not_pd).is_none());
    }
}
