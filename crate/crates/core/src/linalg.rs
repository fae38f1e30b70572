//! Small dense kernels shared by the dual evaluators.
//!
//! The matrices handled here have at most a few dozen columns, so everything
//! is plain dense arithmetic on `nalgebra` storage.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{CMat, CVec, C64};

/// Thin QR factorization with column pivoting, truncated at the numerical rank.
///
/// `A[:, perm] ≈ Q * R` where `Q` is `m × rank` with orthonormal columns and
/// `R` is `rank × n` upper trapezoidal (columns in pivoted order).
#[derive(Debug, Clone)]
pub struct PivotedQr {
    pub q: CMat,
    pub r: CMat,
    /// `perm[k]` is the original column index placed at position `k`.
    pub perm: Vec<usize>,
    pub rank: usize,
}

impl PivotedQr {
    /// Householder QR with largest-remaining-column-norm pivoting.
    ///
    /// A column is dropped when its pivot magnitude falls below
    /// `m * EPSILON * |R[0,0]|`.
    pub fn new(a: &CMat) -> Self {
        let (m, n) = a.shape();
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let steps = m.min(n);
        let mut reflectors: Vec<CVec> = Vec::with_capacity(steps);
        let mut diag = Vec::with_capacity(steps);

        for k in 0..steps {
            let (best, _) = (k..n)
                .map(|j| (j, work.view((k, j), (m - k, 1)).norm_squared()))
                .fold((k, -1.0), |acc, (j, nj)| if nj > acc.1 { (j, nj) } else { acc });
            if best != k {
                work.swap_columns(k, best);
                perm.swap(k, best);
            }

            let x: CVec = work.view((k, k), (m - k, 1)).column(0).into_owned();
            let xnorm = x.norm();
            let mut v = x.clone();
            let alpha = if xnorm == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                let phase = if x[0].norm() == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    x[0] / x[0].norm()
                };
                -phase * xnorm
            };
            v[0] -= alpha;
            let vnorm = v.norm();
            if vnorm > 0.0 {
                v /= C64::new(vnorm, 0.0);
                // work[k.., k..] -= 2 v (v^H work[k.., k..])
                let mut block = work.view_mut((k, k), (m - k, n - k));
                let proj = v.adjoint() * &block;
                block -= (&v * proj) * C64::new(2.0, 0.0);
            }
            diag.push(alpha.norm());
            reflectors.push(v);
        }

        let lead = diag.first().copied().unwrap_or(0.0);
        let threshold = m as f64 * f64::EPSILON * lead;
        let rank = if lead == 0.0 {
            0
        } else {
            diag.iter().take_while(|&&d| d > threshold).count()
        };

        let mut r = CMat::zeros(rank, n);
        for i in 0..rank {
            for j in i..n {
                r[(i, j)] = work[(i, j)];
            }
        }

        // Q = H_0 H_1 ... H_{s-1} applied to the first `rank` unit vectors.
        let mut q = CMat::zeros(m, rank);
        for i in 0..rank {
            q[(i, i)] = C64::new(1.0, 0.0);
        }
        for (k, v) in reflectors.iter().enumerate().rev() {
            if v.norm_squared() == 0.0 {
                continue;
            }
            let mut block = q.view_mut((k, 0), (m - k, rank));
            let proj = v.adjoint() * &block;
            block -= (v * proj) * C64::new(2.0, 0.0);
        }

        Self { q, r, perm, rank }
    }

    /// Minimum-norm solution of `R_unpermuted * x = rhs` (`rhs` has `rank`
    /// entries). Uses back substitution when the factor has full column rank.
    pub fn solve_r(&self, rhs: &CVec) -> CVec {
        let n = self.perm.len();
        if self.rank == n {
            if let Some(y) = self.r.solve_upper_triangular(rhs) {
                if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    let mut x = CVec::zeros(n);
                    for (k, &orig) in self.perm.iter().enumerate() {
                        x[orig] = y[k];
                    }
                    return x;
                }
            }
        }
        min_norm_solve(&self.r_unpermuted(), rhs)
    }

    /// `R` with its columns returned to the original order, so that
    /// `A ≈ Q * r_unpermuted()`.
    pub fn r_unpermuted(&self) -> CMat {
        let mut out = CMat::zeros(self.rank, self.perm.len());
        for (k, &orig) in self.perm.iter().enumerate() {
            out.set_column(orig, &self.r.column(k));
        }
        out
    }
}

/// Minimum-norm solution of `R x = y` for a full-row-rank trapezoidal `R`.
pub fn min_norm_solve(r: &CMat, y: &CVec) -> CVec {
    let (rows, cols) = r.shape();
    if rows == cols {
        if let Some(x) = r.solve_upper_triangular(y) {
            if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return x;
            }
        }
    }
    let pinv = r
        .clone()
        .pseudo_inverse(0.0)
        .unwrap_or_else(|_| CMat::zeros(cols, rows));
    pinv * y
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized as `(M + M^H) / 2` first.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Moore-Penrose inverse of a Hermitian PSD-ish matrix via its eigensystem,
/// discarding eigenvalues below `rel_tol * max|λ|`.
pub fn hermitian_pinv(m: &CMat, rel_tol: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let scale = vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut out = CMat::zeros(n, n);
    if scale == 0.0 {
        return out;
    }
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() > rel_tol * scale {
            let col = vecs.column(k);
            out += (col * col.adjoint()) * C64::new(1.0 / lam, 0.0);
        }
    }
    out
}

/// Singular values of a complex matrix, sorted ascending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Multiply `v` by a phase so that its largest-magnitude entry (lowest index
/// on ties) is real and positive.
pub fn fix_phase(v: &mut CVec) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / best_mag;
        *v *= phase;
        v[best] = C64::new(v[best].norm(), 0.0);
    }
}

/// `diag(d) * M` for a real diagonal.
pub fn scale_rows(d: &[f64], m: &CMat) -> CMat {
    let mut out = m.clone();
    for (i, &s) in d.iter().enumerate() {
        out.row_mut(i).scale_mut(s);
    }
    out
}

/// `diag(d) * M` for a complex diagonal.
pub fn scale_rows_complex(d: &[C64], m: &CMat) -> CMat {
    let mut out = m.clone();
    for (i, &s) in d.iter().enumerate() {
        for j in 0..out.ncols() {
            out[(i, j)] *= s;
        }
    }
    out
}

pub fn to_cvec(v: &[C64]) -> CVec {
    DVector::from_column_slice(v)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.norm()
}
