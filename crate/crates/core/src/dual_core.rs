//! The dual function `d2(w)` and its certificate quantities.
//!
//! For weights `w` on the simplex,
//!
//! ```text
//! d2(w) = min { sum_j w_j |f_j q(x_j) - p(x_j)|^2 : p in P_n1, q in P_n2, sum_j w_j |q(x_j)|^2 = 1 }.
//! ```
//!
//! Two independent evaluators are provided. [`eval_dual`] works in the
//! column spaces of `W^{1/2} Psi` and `W^{1/2} Phi`: with thin QR factors
//! `Q_p`, `Q_q` it takes the smallest eigenpair of the small Hermitian matrix
//! `S_F - S_qp S_qp^H`, where `S_F = Q_q^H |F|^2 Q_q` and `S_qp = Q_q^H F^H Q_p`.
//! [`eval_dual_dense`] solves the full Hermitian pencil `(A_w, B_w)` after
//! deflating the null space of `B_w`, and is used as the test oracle.

use crate::basis::BasisMatrix;
use crate::linalg::{self, PivotedQr};
use crate::problem::SampleSet;
use crate::{CMat, CVec, Error, Result, C64};

/// Absolute floor below which `|q_j|` is treated as zero.
pub const Q_FLOOR: f64 = 1e-300;
/// Relative guard on `|q_j|` against `max_j |q_j|`.
pub const Q_GUARD_REL: f64 = 1e-14;
/// `simple` is set when the eigenvalue gap exceeds this times `max(1, d2)`.
pub const SIMPLE_GAP_REL: f64 = 1e-8;

/// A point of the probability simplex: the dual variable.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    /// Validates nonnegativity and finiteness, then renormalizes to sum 1.
    /// A vector already summing to 1 within roundoff is kept bit for bit, so
    /// rebuilding from a stored snapshot reproduces it exactly.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        if (total - 1.0).abs() <= 4.0 * f64::EPSILON * w.len() as f64 {
            return Ok(Self { w });
        }
        Ok(Self {
            w: w.into_iter().map(|x| x / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            w: vec![1.0 / m as f64; m],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.w.len()).filter(|&j| self.w[j] > 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.w.iter().filter(|&&x| x > 0.0).count()
    }

    pub fn is_interior(&self) -> bool {
        self.w.iter().all(|&x| x > 0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.w
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.w[j]
    }
}

/// Minimizer of the dual subproblem at a fixed weight vector.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// Dual objective value `sum_j w_j |f_j q_j - p_j|^2` at the minimizer.
    pub d2: f64,
    /// Numerator coefficients in the `psi` basis.
    pub a: Vec<C64>,
    /// Denominator coefficients in the `phi` basis.
    pub b: Vec<C64>,
    /// `Psi a` at every node.
    pub p: Vec<C64>,
    /// `Phi b` at every node.
    pub q: Vec<C64>,
    /// `|f_j - p_j / q_j|`, with `0/0 = 0`.
    pub residual_abs: Vec<f64>,
    /// Second smallest minus smallest eigenvalue of the reduced matrix
    /// (infinite when the reduced matrix is `1 × 1`).
    pub eig_gap: f64,
    pub simple: bool,
    /// Some `|q_j|` fell below the relative guard.
    pub a1_suspect: bool,
    /// The eigenvalue came out negative from roundoff.
    pub d2_clamped: bool,
    /// Numerical ranks of `W^{1/2} Psi` and `W^{1/2} Phi`.
    pub rank_psi: usize,
    pub rank_phi: usize,
}

impl DualSolution {
    /// `e(xi) = max_j r_j`.
    pub fn max_residual(&self) -> f64 {
        self.residual_abs.iter().fold(0.0, |acc, &r| acc.max(r))
    }

    /// `sum_j w_j |q_j|^2`.
    pub fn normalization(&self, w: &WeightVector) -> f64 {
        weighted_norm_sq(w.as_slice(), &self.q)
    }

    /// `sum_j w_j |f_j q_j - p_j|^2` recomputed from `p` and `q`.
    pub fn objective(&self, samples: &SampleSet, w: &WeightVector) -> f64 {
        let lin = linearized_residual(samples.values(), &self.p, &self.q);
        weighted_norm_sq(w.as_slice(), &lin)
    }
}

pub(crate) fn weighted_norm_sq(w: &[f64], v: &[C64]) -> f64 {
    w.iter().zip(v).map(|(&wj, z)| wj * z.norm_sqr()).sum()
}

/// `f_j q_j - p_j` for every node.
pub fn linearized_residual(values: &[C64], p: &[C64], q: &[C64]) -> Vec<C64> {
    values
        .iter()
        .zip(p.iter().zip(q))
        .map(|(f, (pj, qj))| f * qj - pj)
        .collect()
}

/// Pointwise errors `|f_j - p_j/q_j|` with guarded division.
///
/// `0/0` (both `|q_j|` and `|f_j q_j - p_j|` under the guard) evaluates to 0.
/// A nonzero numerator over a `|q_j|` under the guard is divided by
/// `max(|q_j|, guard)` and flags the result as suspect. Returns the errors and
/// the suspect flag.
pub fn pointwise_residuals(values: &[C64], p: &[C64], q: &[C64]) -> (Vec<f64>, bool) {
    let qmax = q.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let guard = Q_FLOOR.max(Q_GUARD_REL * qmax);
    let mut suspect = false;
    let r = values
        .iter()
        .zip(p.iter().zip(q))
        .map(|(f, (pj, qj))| {
            let num = (f * qj - pj).norm();
            let qa = qj.norm();
            if qa >= guard {
                num / qa
            } else if num < guard * f.norm().max(1.0) {
                0.0
            } else {
                suspect = true;
                if qa < Q_FLOOR {
                    num / guard
                } else {
                    num / qa
                }
            }
        })
        .collect();
    (r, suspect)
}

fn check_dims(samples: &SampleSet, psi: &BasisMatrix, phi: &BasisMatrix, w: &WeightVector) -> Result<()> {
    let m = samples.len();
    if psi.nrows() != m || phi.nrows() != m || w.len() != m {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: m = {m}, psi rows = {}, phi rows = {}, weights = {}",
            psi.nrows(),
            phi.nrows(),
            w.len()
        )));
    }
    let required = psi.deg().max(phi.deg()) + 1;
    let support = w.support_size();
    if support < required {
        return Err(Error::SupportTooSmall { support, required });
    }
    Ok(())
}

/// Hermitian pencil `(A_w, B_w)` with `A_w = G^H W G`, `G = [-Psi, F Phi]`,
/// and `B_w = [0, Phi]^H W [0, Phi]`.
pub fn assemble_pencil(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
) -> (CMat, CMat) {
    let m = samples.len();
    let k1 = psi.deg() + 1;
    let k2 = phi.deg() + 1;
    let mut g = CMat::zeros(m, k1 + k2);
    let mut h = CMat::zeros(m, k1 + k2);
    for j in 0..m {
        let f = samples.values()[j];
        for i in 0..k1 {
            g[(j, i)] = -psi.entries()[(j, i)];
        }
        for i in 0..k2 {
            g[(j, k1 + i)] = f * phi.entries()[(j, i)];
            h[(j, k1 + i)] = phi.entries()[(j, i)];
        }
    }
    let wg = linalg::scale_rows(w.as_slice(), &g);
    let wh = linalg::scale_rows(w.as_slice(), &h);
    let a = linalg::hermitian_part(&(g.adjoint() * wg));
    let b = linalg::hermitian_part(&(h.adjoint() * wh));
    (a, b)
}

struct Eigen {
    smallest: f64,
    gap: f64,
}

/// Normalizes `(a, b)` so that `sum w |q|^2 = 1`, evaluates node values and
/// residuals, and fills in the objective value.
#[allow(clippy::too_many_arguments)]
fn finish(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
    a: CVec,
    b: CVec,
    eig: Eigen,
    ranks: (usize, usize),
) -> Result<DualSolution> {
    let mut p: Vec<C64> = (psi.entries() * &a).iter().copied().collect();
    let mut q: Vec<C64> = (phi.entries() * &b).iter().copied().collect();
    let norm_sq = weighted_norm_sq(w.as_slice(), &q);
    if !(norm_sq > 0.0) || !norm_sq.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let s = 1.0 / norm_sq.sqrt();
    let scale = C64::new(s, 0.0);
    p.iter_mut().for_each(|z| *z *= scale);
    q.iter_mut().for_each(|z| *z *= scale);
    let a: Vec<C64> = a.iter().map(|z| z * scale).collect();
    let b: Vec<C64> = b.iter().map(|z| z * scale).collect();

    let lin = linearized_residual(samples.values(), &p, &q);
    let d2 = weighted_norm_sq(w.as_slice(), &lin);
    let (residual_abs, a1_suspect) = pointwise_residuals(samples.values(), &p, &q);
    let simple = eig.gap > SIMPLE_GAP_REL * d2.max(1.0);
    Ok(DualSolution {
        d2,
        a,
        b,
        p,
        q,
        residual_abs,
        eig_gap: eig.gap,
        simple,
        a1_suspect,
        d2_clamped: eig.smallest < 0.0,
        rank_psi: ranks.0,
        rank_phi: ranks.1,
    })
}

struct Reduced {
    qr_p: PivotedQr,
    qr_q: PivotedQr,
    /// `F Q_q`
    fqq: CMat,
}

fn reduce(samples: &SampleSet, psi: &BasisMatrix, phi: &BasisMatrix, w: &WeightVector) -> Result<Reduced> {
    let sw: Vec<f64> = w.as_slice().iter().map(|x| x.sqrt()).collect();
    let qr_q = PivotedQr::new(&linalg::scale_rows(&sw, phi.entries()));
    if qr_q.rank == 0 {
        return Err(Error::DegenerateDenominator);
    }
    let qr_p = PivotedQr::new(&linalg::scale_rows(&sw, psi.entries()));
    let fqq = linalg::scale_rows_complex(samples.values(), &qr_q.q);
    Ok(Reduced { qr_p, qr_q, fqq })
}

/// Evaluates `d2(w)` through the QR-reduced Hermitian eigenproblem.
///
/// The eigenvector `R_q b` is phased so its largest entry is real positive;
/// `b` and `a` are recovered through the triangular factors (minimum norm when
/// rank deficient), and `a` solves `R_p a = S_qp^H R_q b`.
pub fn eval_dual(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
) -> Result<DualSolution> {
    check_dims(samples, psi, phi, w)?;
    let red = reduce(samples, psi, phi, w)?;
    let qq = &red.qr_q.q;
    let qp = &red.qr_p.q;

    let abs_f2: Vec<f64> = samples.values().iter().map(|f| f.norm_sqr()).collect();
    let s_f = qq.adjoint() * linalg::scale_rows(&abs_f2, qq);
    let s_qp = red.fqq.adjoint() * qp;
    let reduced = &s_f - &s_qp * s_qp.adjoint();

    let (vals, vecs) = linalg::hermitian_eigen(&reduced);
    let mut v: CVec = vecs.column(0).into_owned();
    linalg::fix_phase(&mut v);
    let gap = vals.get(1).map_or(f64::INFINITY, |v1| v1 - vals[0]);

    let b = red.qr_q.solve_r(&v);
    let a = if red.qr_p.rank == 0 {
        CVec::zeros(psi.deg() + 1)
    } else {
        red.qr_p.solve_r(&(s_qp.adjoint() * &v))
    };
    finish(
        samples,
        psi,
        phi,
        w,
        a,
        b,
        Eigen {
            smallest: vals[0],
            gap,
        },
        (red.qr_p.rank, red.qr_q.rank),
    )
}

/// Evaluates `d2(w)` as the smallest finite eigenvalue of the full pencil
/// `(A_w, B_w)`.
///
/// With `B_w = V diag(lambda) V^H`, write `c = V_0 y + V_r z` over the null
/// and range parts. The null-space rows force `y = -A_00^+ A_0r z`, leaving
/// the Hermitian problem `Lambda^{-1/2} S Lambda^{-1/2} u = d2 u` with the
/// Schur complement `S = A_rr - A_0r^H A_00^+ A_0r` and `c^H B_w c = |u|^2 = 1`.
pub fn eval_dual_dense(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
) -> Result<DualSolution> {
    check_dims(samples, psi, phi, w)?;
    let (a_mat, b_mat) = assemble_pencil(samples, psi, phi, w);
    let n = a_mat.nrows();
    let (lam, v) = linalg::hermitian_eigen(&b_mat);
    let lam_max = lam.last().copied().unwrap_or(0.0);
    if !(lam_max > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    let tol = 1e-13 * lam_max;
    let range: Vec<usize> = (0..n).filter(|&i| lam[i] > tol).collect();
    let null: Vec<usize> = (0..n).filter(|&i| lam[i] <= tol).collect();

    let pick = |idx: &[usize]| {
        let mut out = CMat::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set_column(k, &v.column(i));
        }
        out
    };
    let v0 = pick(&null);
    let vr = pick(&range);
    let a00 = v0.adjoint() * &a_mat * &v0;
    let a0r = v0.adjoint() * &a_mat * &vr;
    let arr = vr.adjoint() * &a_mat * &vr;
    let a00_pinv = linalg::hermitian_pinv(&a00, 1e-13);
    let schur = &arr - a0r.adjoint() * &a00_pinv * &a0r;
    let inv_sqrt: Vec<f64> = range.iter().map(|&i| 1.0 / lam[i].sqrt()).collect();
    let scaled = linalg::scale_rows(&inv_sqrt, &linalg::scale_rows(&inv_sqrt, &schur).adjoint()).adjoint();

    let (mu, u) = linalg::hermitian_eigen(&scaled);
    let u0 = u.column(0).into_owned();
    let z = CVec::from_iterator(inv_sqrt.len(), inv_sqrt.iter().zip(u0.iter()).map(|(s, x)| x * *s));
    let y = -(&a00_pinv * &a0r * &z);
    let c = &v0 * y + &vr * z;

    let k1 = psi.deg() + 1;
    let a = c.rows(0, k1).into_owned();
    let mut b = c.rows(k1, n - k1).into_owned();
    // deterministic phase on b, applied to the whole pair
    let before = b.clone();
    linalg::fix_phase(&mut b);
    let idx = before.iter().position(|z| z.norm() > 0.0);
    let phase = match idx {
        Some(i) => b[i] / before[i],
        None => C64::new(1.0, 0.0),
    };
    let a = a * phase;
    let gap = mu.get(1).map_or(f64::INFINITY, |m1| m1 - mu[0]);
    finish(
        samples,
        psi,
        phi,
        w,
        a,
        b,
        Eigen {
            smallest: mu[0],
            gap,
        },
        (psi.deg() + 1, range.len()),
    )
}

/// `|F q - p|^2 - d2 |q|^2` without checking differentiability.
pub fn gradient_formula(sol: &DualSolution, samples: &SampleSet) -> Vec<f64> {
    samples
        .values()
        .iter()
        .zip(sol.p.iter().zip(&sol.q))
        .map(|(f, (p, q))| (f * q - p).norm_sqr() - sol.d2 * q.norm_sqr())
        .collect()
}

/// Gradient of `d2` at `w`; requires a simple smallest eigenvalue and `w > 0`.
pub fn gradient_d2(sol: &DualSolution, w: &WeightVector, samples: &SampleSet) -> Result<Vec<f64>> {
    if !sol.simple {
        return Err(Error::NotDifferentiable(format!(
            "eigenvalue gap {:e} below simplicity threshold",
            sol.eig_gap
        )));
    }
    if !w.is_interior() {
        return Err(Error::NotDifferentiable("weight vector has zero entries".into()));
    }
    Ok(gradient_formula(sol, samples))
}

/// Scaled residuals of the two first-order optimality conditions
/// `Fq - p ⟂_w span(Psi)` and `F^H(Fq - p) - d2 q ⟂_w span(Phi)`.
///
/// Each is `|X^H W v|_2 / (|W^{1/2} X|_F * s)` where `s` bounds the
/// `w`-norm of the terms forming `v`.
pub fn optimality_residuals(
    sol: &DualSolution,
    w: &WeightVector,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    samples: &SampleSet,
) -> (f64, f64) {
    let wv = w.as_slice();
    let sw: Vec<f64> = wv.iter().map(|x| x.sqrt()).collect();
    let f = samples.values();
    let lin = linearized_residual(f, &sol.p, &sol.q);
    let fq: Vec<C64> = f.iter().zip(&sol.q).map(|(a, b)| a * b).collect();
    let fh_lin: Vec<C64> = f.iter().zip(&lin).map(|(a, b)| a.conj() * b).collect();
    let second: Vec<C64> = fh_lin
        .iter()
        .zip(&sol.q)
        .map(|(a, q)| a - q * sol.d2)
        .collect();

    let wnorm = |v: &[C64]| weighted_norm_sq(wv, v).sqrt();
    let project = |x: &CMat, v: &[C64]| -> f64 {
        let wv_vec = CVec::from_iterator(v.len(), v.iter().zip(wv).map(|(z, &wj)| z * wj));
        (x.adjoint() * wv_vec).norm()
    };

    let scale1 = linalg::fro(&linalg::scale_rows(&sw, psi.entries())) * (wnorm(&fq) + wnorm(&sol.p));
    let scale2 = linalg::fro(&linalg::scale_rows(&sw, phi.entries())) * (wnorm(&fh_lin) + sol.d2 * wnorm(&sol.q));
    let res1 = ratio(project(psi.entries(), &lin), scale1);
    let res2 = ratio(project(phi.entries(), &second), scale2);
    (res1, res2)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Squared smallest singular value of `(I - Q_p Q_p^H) F Q_q`, an independent
/// route to `d2(w)`.
pub fn smallest_singular_value_sq(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
) -> Result<f64> {
    check_dims(samples, psi, phi, w)?;
    let red = reduce(samples, psi, phi, w)?;
    let qp = &red.qr_p.q;
    let proj = &red.fqq - qp * (qp.adjoint() * &red.fqq);
    let s = linalg::singular_values(&proj);
    Ok(s.first().map_or(0.0, |x| x * x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_arnoldi, build_monomial};
    use crate::problem::{builtin_problem, BuiltinProblem};

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn weight_vector_renormalizes() {
        let w = WeightVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        assert!(WeightVector::new(vec![-1.0, 2.0]).is_err());
        assert!(WeightVector::new(vec![0.0, 0.0]).is_err());
        assert_eq!(WeightVector::new(vec![0.5, 0.0, 0.5]).unwrap().support(), vec![0, 2]);
    }

    #[test]
    fn pencil_single_node() {
        let s = SampleSet::new(vec![r(0.0)], vec![r(2.0)]).unwrap();
        let one = build_monomial(s.nodes(), 0);
        let w = WeightVector::uniform(1);
        let (a, b) = assemble_pencil(&s, &one, &one, &w);
        let expect_a = CMat::from_row_slice(2, 2, &[r(1.0), r(-2.0), r(-2.0), r(4.0)]);
        let expect_b = CMat::from_row_slice(2, 2, &[r(0.0), r(0.0), r(0.0), r(1.0)]);
        assert!((a - expect_a).norm() < 1e-15);
        assert!((b - expect_b).norm() < 1e-15);

        let sol = eval_dual_dense(&s, &one, &one, &w).unwrap();
        assert!(sol.d2.abs() < 1e-14);
        // c ∝ [2, 1]
        assert!((sol.a[0] - sol.b[0] * 2.0).norm() < 1e-12);
    }

    #[test]
    fn pencil_block_structure() {
        let nodes: Vec<C64> = (0..6).map(|j| C64::new(j as f64 * 0.3 - 0.7, 0.1 * j as f64)).collect();
        let vals: Vec<C64> = nodes.iter().map(|z| z.exp()).collect();
        let s = SampleSet::new(nodes.clone(), vals).unwrap();
        let psi = build_monomial(&nodes, 1);
        let phi = build_monomial(&nodes, 1);
        let w = WeightVector::new(vec![0.1, 0.2, 0.15, 0.25, 0.2, 0.1]).unwrap();
        let (a, b) = assemble_pencil(&s, &psi, &phi, &w);
        assert_eq!((a.clone() - a.adjoint()).norm(), 0.0);
        for i in 0..2 {
            assert!(b.row(i).iter().all(|z| *z == r(0.0)));
            assert!(b.column(i).iter().all(|z| *z == r(0.0)));
        }
        assert!(b[(2, 2)].re > 0.0);
    }

    #[test]
    fn constant_data_has_zero_dual() {
        let nodes: Vec<C64> = (0..5).map(|j| r(j as f64)).collect();
        let s = SampleSet::new(nodes.clone(), vec![C64::new(2.0, -1.0); 5]).unwrap();
        let psi = build_monomial(&nodes, 2);
        let phi = build_monomial(&nodes, 1);
        let sol = eval_dual(&s, &psi, &phi, &WeightVector::uniform(5)).unwrap();
        assert!(sol.d2 < 1e-24);
        for (p, q) in sol.p.iter().zip(&sol.q) {
            assert!((p - q * C64::new(2.0, -1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn example1_denominator_is_x_minus_one() {
        let s = builtin_problem(BuiltinProblem::Example1, 4).unwrap();
        let basis = build_monomial(s.nodes(), 1);
        let sol = eval_dual(&s, &basis, &basis, &WeightVector::uniform(4)).unwrap();
        assert!(sol.d2 <= 1e-12);
        // b ∝ [-1, 1]
        let ratio = sol.b[0] / sol.b[1];
        assert!((ratio + 1.0).norm() < 1e-10);
        let ratio = sol.a[0] / sol.b[0];
        assert!((ratio - 1.0).norm() < 1e-10);
        assert!(sol.residual_abs.iter().all(|&x| x < 1e-12));
        assert!(sol.simple);
    }

    #[test]
    fn normalization_and_objective_invariants() {
        let nodes: Vec<C64> = (0..9).map(|j| C64::from_polar(1.0, 0.6 * j as f64)).collect();
        let vals: Vec<C64> = nodes.iter().map(|z| (z * 2.0).exp() / (z - 1.7)).collect();
        let s = SampleSet::new(nodes.clone(), vals).unwrap();
        let w = WeightVector::new((1..=9).map(|j| j as f64).collect()).unwrap();
        let basis = build_arnoldi(&nodes, 2, w.as_slice()).unwrap();
        let sol = eval_dual(&s, &basis, &basis, &w).unwrap();
        assert!((sol.normalization(&w) - 1.0).abs() < 1e-10);
        assert!((sol.objective(&s, &w) - sol.d2).abs() <= 1e-10 * sol.d2.max(1e-300));
        let (r1, r2) = optimality_residuals(&sol, &w, &basis, &basis, &s);
        assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
    }

    #[test]
    fn support_too_small() {
        let s = builtin_problem(BuiltinProblem::Example1, 4).unwrap();
        let basis = build_monomial(s.nodes(), 1);
        let w = WeightVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            eval_dual(&s, &basis, &basis, &w),
            Err(Error::SupportTooSmall { support: 1, required: 2 })
        ));
    }

    #[test]
    fn zero_over_zero_residual() {
        let (res, suspect) = pointwise_residuals(&[r(0.0), r(1.0)], &[r(0.0), r(1.0)], &[r(0.0), r(1.0)]);
        assert_eq!(res, vec![0.0, 0.0]);
        assert!(!suspect);
        let (res, suspect) = pointwise_residuals(&[r(1.0), r(1.0)], &[r(1.0), r(1.0)], &[r(0.0), r(1.0)]);
        assert!(suspect);
        assert!(res[0] > 1e10);
    }

    #[test]
    fn gradient_requires_interior_weights() {
        let s = builtin_problem(BuiltinProblem::AbsOnGrid, 7).unwrap();
        let basis = build_monomial(s.nodes(), 1);
        let w = WeightVector::new(vec![0.2, 0.2, 0.2, 0.0, 0.2, 0.1, 0.1]).unwrap();
        let sol = eval_dual(&s, &basis, &basis, &w).unwrap();
        assert!(matches!(gradient_d2(&sol, &w, &s), Err(Error::NotDifferentiable(_))));
        assert_eq!(gradient_formula(&sol, &s).len(), 7);
    }
}
