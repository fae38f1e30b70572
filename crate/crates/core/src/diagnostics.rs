//! Convergence diagnostics: the dual lower bound between consecutive Lawson
//! iterates, the exponent function `nu(beta)`, complementary slackness,
//! reference points, the degree defect, and randomized checks of two
//! supporting inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dual_core::{linearized_residual, DualSolution, WeightVector};
use crate::linalg::PivotedQr;
use crate::problem::DegreePair;
use crate::{CMat, CVec, Error, Result, C64};

/// Two consecutive Lawson iterates; `w_next` is the update of `w_k` with
/// exponent `beta`. `values` are the samples `f_j`.
#[derive(Debug, Clone, Copy)]
pub struct IterPairContext<'a> {
    pub values: &'a [C64],
    pub w_k: &'a WeightVector,
    pub sol_k: &'a DualSolution,
    pub w_next: &'a WeightVector,
    pub sol_next: &'a DualSolution,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub chi: f64,
    pub gamma: f64,
    pub zeta: f64,
}

impl LowerBound {
    /// `sqrt(d2_next) >= d2_k * chi - slack`.
    pub fn holds(&self, d2_k: f64, d2_next: f64, slack: f64) -> bool {
        d2_next.max(0.0).sqrt() >= d2_k * self.chi - slack
    }
}

/// Lower bound factor `chi` with `sqrt(d2(w_next)) >= d2(w_k) * chi`.
pub fn chi_lower_bound(ctx: &IterPairContext) -> Result<LowerBound> {
    let wk = ctx.w_k.as_slice();
    let wn = ctx.w_next.as_slice();
    let r = &ctx.sol_k.residual_abs;
    let beta = ctx.beta;

    let gamma: f64 = wk
        .iter()
        .zip(r)
        .filter(|(&w, &rj)| w > 0.0 && rj > 0.0)
        .map(|(&w, &rj)| w * rj.powf(beta))
        .sum();
    if !(gamma > 0.0) {
        return Err(Error::DegenerateBound);
    }

    let lin = linearized_residual(ctx.values, &ctx.sol_k.p, &ctx.sol_k.q);
    let zeta_sq: f64 = wn
        .iter()
        .zip(lin.iter().zip(r))
        .filter(|(&w, (_, &rj))| w > 0.0 && rj > 0.0)
        .map(|(&w, (l, &rj))| w * l.norm_sqr() / rj.powf(2.0 * beta))
        .sum();
    let zeta = zeta_sq.sqrt();

    let inner: C64 = wk
        .iter()
        .zip(ctx.sol_next.q.iter().zip(&ctx.sol_k.q))
        .map(|(&w, (qn, qk))| qn.conj() * qk * w)
        .sum();
    let chi = if zeta > 0.0 { inner.norm() / (gamma * zeta) } else { 0.0 };
    Ok(LowerBound { chi, gamma, zeta })
}

struct NuSums {
    weighted_q: f64,
    weighted_r: f64,
    weighted_q_log: f64,
    weighted_r_log: f64,
}

fn nu_sums(sol: &DualSolution, w: &WeightVector, beta: f64) -> Result<NuSums> {
    let mut s = NuSums {
        weighted_q: 0.0,
        weighted_r: 0.0,
        weighted_q_log: 0.0,
        weighted_r_log: 0.0,
    };
    let mut any = false;
    for ((&wj, &rj), qj) in w.as_slice().iter().zip(&sol.residual_abs).zip(&sol.q) {
        if !(wj > 0.0 && rj > 0.0) {
            continue;
        }
        any = true;
        let lr = rj.ln();
        let tq = wj * qj.norm_sqr() * rj.powf(2.0 - beta);
        let tr = wj * rj.powf(beta);
        s.weighted_q += tq;
        s.weighted_r += tr;
        s.weighted_q_log += tq * lr;
        s.weighted_r_log += tr * lr;
    }
    if !any {
        return Err(Error::EmptySupport);
    }
    Ok(s)
}

/// `nu(beta) = (sum_I w |q|^2 r^(2-beta)) (sum_I w r^beta)` over
/// `I = {j : w_j r_j > 0}`.
pub fn nu(sol: &DualSolution, w: &WeightVector, beta: f64) -> Result<f64> {
    let s = nu_sums(sol, w, beta)?;
    Ok(s.weighted_q * s.weighted_r)
}

/// Derivative of [`nu`] in `beta`.
pub fn nu_prime(sol: &DualSolution, w: &WeightVector, beta: f64) -> Result<f64> {
    let s = nu_sums(sol, w, beta)?;
    Ok(-s.weighted_q_log * s.weighted_r + s.weighted_q * s.weighted_r_log)
}

/// `max_j |w_j r_j (r_j - c)|`.
pub fn slackness_residual(w: &WeightVector, residual_abs: &[f64], c: f64) -> f64 {
    w.as_slice()
        .iter()
        .zip(residual_abs)
        .map(|(&wj, &rj)| (wj * rj * (rj - c)).abs())
        .fold(0.0, f64::max)
}

/// `c >= max_{j outside supp(w)} r_j`. True when the support is everything.
pub fn certificate_condition(w: &WeightVector, residual_abs: &[f64], c: f64) -> bool {
    w.as_slice()
        .iter()
        .zip(residual_abs)
        .filter(|(&wj, _)| wj == 0.0)
        .all(|(_, &rj)| c >= rj)
}

/// Number of nodes whose error is within `tol` (relative) of `e_xi`.
pub fn reference_point_count(residual_abs: &[f64], e_xi: f64, tol: f64) -> usize {
    let cut = (1.0 - tol) * e_xi;
    residual_abs.iter().filter(|&&r| r >= cut).count()
}

fn numeric_degree(coef: &[C64], tol: f64) -> Option<usize> {
    let max = coef.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return None;
    }
    coef.iter().rposition(|z| z.norm() > tol * max)
}

/// `min(n1 - deg p, n2 - deg q)` for monomial coefficients. A zero numerator
/// has degree minus infinity and drops out of the minimum.
pub fn compute_defect(a: &[C64], b: &[C64], degrees: DegreePair, tol: f64) -> Result<usize> {
    let dq = numeric_degree(b, tol).ok_or(Error::ZeroPolynomial)?;
    let from_q = degrees.n2.saturating_sub(dq);
    Ok(match numeric_degree(a, tol) {
        Some(dp) => degrees.n1.saturating_sub(dp).min(from_q),
        None => from_q,
    })
}

fn weighted_inner(w: &[f64], x: &CVec, y: &CVec) -> C64 {
    w.iter()
        .zip(x.iter().zip(y.iter()))
        .map(|(&wj, (a, b))| a.conj() * b * wj)
        .sum()
}

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_iterator(
        n,
        (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    )
}

/// Randomized check that the weighted least-squares residual of `z` against
/// `span(A)` maximizes `|<z, y>_w|` over `w`-unit vectors `y` that are
/// `w`-orthogonal to `span(A)`. Sampling is restricted to the support of `w`.
pub fn verify_lsmax_lemma(w: &WeightVector, a: &CMat, z: &CVec, trials: usize, seed: u64) -> Result<bool> {
    let (m, n) = a.shape();
    if w.len() != m || z.len() != m {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let support = w.support();
    let ws = w.as_slice();
    let sw: Vec<f64> = ws.iter().map(|x| x.sqrt()).collect();

    // Orthonormal basis of W^{1/2} A restricted to the support.
    let mut a_s = CMat::zeros(support.len(), n);
    for (i, &j) in support.iter().enumerate() {
        for c in 0..n {
            a_s[(i, c)] = a[(j, c)] * sw[j];
        }
    }
    let qr = PivotedQr::new(&a_s);
    if qr.rank < n {
        return Err(Error::RankDeficient);
    }
    let project_out = |v: &CVec| -> CVec { v - &qr.q * (qr.q.adjoint() * v) };
    let lift = |u: &CVec| -> CVec {
        // back from W^{1/2}-scaled support coordinates to full length
        let mut out = CVec::zeros(m);
        for (i, &j) in support.iter().enumerate() {
            out[j] = u[i] / sw[j];
        }
        out
    };

    let z_s = CVec::from_iterator(support.len(), support.iter().map(|&j| z[j] * sw[j]));
    let res_s = project_out(&z_s);
    let res_norm = res_s.norm();
    let best = if res_norm > 0.0 {
        let y = lift(&(&res_s / C64::new(res_norm, 0.0)));
        weighted_inner(ws, z, &y).norm()
    } else {
        0.0
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let g = project_out(&random_complex(&mut rng, support.len()));
        let gn = g.norm();
        if gn == 0.0 {
            continue;
        }
        let y = lift(&(&g / C64::new(gn, 0.0)));
        if weighted_inner(ws, z, &y).norm() > best + 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Named real function.
pub type NamedFn = (&'static str, fn(f64) -> f64);

/// Strictly increasing functions on a positive interval used by
/// [`verify_chebyshev_sum_lemma`].
pub fn monotone_family() -> Vec<NamedFn> {
    vec![
        ("square", |u| u * u),
        ("cube", |u| u * u * u),
        ("exp", f64::exp),
        ("log", f64::ln),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChebyshevSumReport {
    /// The sum inequality held for every ordered pair.
    pub holds: bool,
    /// Near-equality occurred exactly when predicted.
    pub equality_consistent: bool,
}

/// Checks `(sum s t(x)) (sum s h(x)) <= sum s t(x) h(x)` for every pair of
/// functions in [`monotone_family`], applied to `u = x - min(x) + 1 > 0`.
/// Equality is expected iff `s_i s_j (x_i - x_j) = 0` for all `i, j`.
pub fn chebyshev_sum_report(s: &[f64], x: &[f64]) -> ChebyshevSumReport {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let u: Vec<f64> = x.iter().map(|&v| v - lo + 1.0).collect();
    let degenerate = {
        let active: Vec<f64> = s.iter().zip(x).filter(|(&sj, _)| sj != 0.0).map(|(_, &xj)| xj).collect();
        active.windows(2).all(|p| p[0] == p[1])
    };
    let fam = monotone_family();
    let mut holds = true;
    let mut consistent = true;
    for (_, t) in &fam {
        for (_, h) in &fam {
            let st: f64 = s.iter().zip(&u).map(|(&sj, &uj)| sj * t(uj)).sum();
            let sh: f64 = s.iter().zip(&u).map(|(&sj, &uj)| sj * h(uj)).sum();
            let sth: f64 = s.iter().zip(&u).map(|(&sj, &uj)| sj * t(uj) * h(uj)).sum();
            let lhs = st * sh;
            let scale = sth.abs().max(lhs.abs()).max(1.0);
            let slack = 1e-12 * scale;
            if lhs > sth + slack {
                holds = false;
            }
            let equal = (sth - lhs).abs() <= slack;
            if equal != degenerate {
                consistent = false;
            }
        }
    }
    ChebyshevSumReport {
        holds,
        equality_consistent: consistent,
    }
}

/// True iff the sum inequality holds for all function pairs and equality
/// shows up only in the degenerate configuration.
pub fn verify_chebyshev_sum_lemma(s: &[f64], x: &[f64]) -> bool {
    let rep = chebyshev_sum_report(s, x);
    rep.holds && rep.equality_consistent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_monomial;
    use crate::dual_core::eval_dual;
    use crate::linalg;
    use crate::lawson::update_weights;
    use crate::problem::SampleSet;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn solution_with(r: Vec<f64>, q: Vec<C64>) -> DualSolution {
        let m = r.len();
        DualSolution {
            d2: 0.0,
            a: vec![],
            b: vec![],
            p: vec![c(0.0); m],
            q,
            residual_abs: r,
            eig_gap: f64::INFINITY,
            simple: true,
            a1_suspect: false,
            d2_clamped: false,
            rank_psi: 0,
            rank_phi: 0,
        }
    }

    fn linear_instance() -> (SampleSet, WeightVector, DualSolution) {
        let nodes: Vec<C64> = [0.0, 0.3, 0.7, 1.0, 1.4].iter().map(|&x| c(x)).collect();
        let values: Vec<C64> = [0.2, -1.0, 0.5, 2.0, 0.1].iter().map(|&x| c(x)).collect();
        let s = SampleSet::new(nodes.clone(), values).unwrap();
        let w = WeightVector::new(vec![0.1, 0.3, 0.2, 0.25, 0.15]).unwrap();
        let sol = eval_dual(&s, &build_monomial(&nodes, 1), &build_monomial(&nodes, 0), &w).unwrap();
        (s, w, sol)
    }

    #[test]
    fn linear_case_nu_identities() {
        let (_, w, sol) = linear_instance();
        let n0 = nu(&sol, &w, 0.0).unwrap();
        let n2 = nu(&sol, &w, 2.0).unwrap();
        assert!((n0 - sol.d2).abs() < 1e-12, "{n0} vs {}", sol.d2);
        assert!((n2 - sol.d2).abs() < 1e-12);
        assert!(nu_prime(&sol, &w, 1.0).unwrap().abs() < 1e-12);
        assert!(nu(&sol, &w, 1.0).unwrap() <= sol.d2 + 1e-15);
    }

    #[test]
    fn nu_prime_matches_finite_difference() {
        let (_, w, sol) = linear_instance();
        for &b in &[-0.5, 0.3, 1.7, 2.5] {
            let h = 1e-5;
            let fd = (nu(&sol, &w, b + h).unwrap() - nu(&sol, &w, b - h).unwrap()) / (2.0 * h);
            let an = nu_prime(&sol, &w, b).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(nu(&sol, &w, b).unwrap()), "{fd} vs {an}");
        }
    }

    #[test]
    fn nu_is_convex_on_grid() {
        let (_, w, sol) = linear_instance();
        let vals: Vec<f64> = (0..41).map(|i| nu(&sol, &w, -1.0 + 0.1 * i as f64).unwrap()).collect();
        let scale = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        assert!(vals.windows(3).all(|t| t[0] - 2.0 * t[1] + t[2] >= -1e-8 * scale));
    }

    #[test]
    fn nu_single_point_and_empty_support() {
        let w = WeightVector::new(vec![1.0, 0.0]).unwrap();
        let sol = solution_with(vec![0.7, 0.2], vec![c(1.0), c(1.0)]);
        assert_eq!(nu_prime(&sol, &w, 0.4).unwrap(), 0.0);
        let zero = solution_with(vec![0.0, 0.2], vec![c(1.0), c(1.0)]);
        assert!(matches!(nu(&zero, &w, 1.0), Err(Error::EmptySupport)));
    }

    #[test]
    fn linear_chi_has_unit_numerator_and_bound_holds() {
        let (s, w, sol) = linear_instance();
        let nodes = s.nodes().to_vec();
        let w1 = update_weights(&w, &sol.residual_abs, 1.0).unwrap();
        let sol1 = eval_dual(&s, &build_monomial(&nodes, 1), &build_monomial(&nodes, 0), &w1).unwrap();
        let ctx = IterPairContext {
            values: s.values(),
            w_k: &w,
            sol_k: &sol,
            w_next: &w1,
            sol_next: &sol1,
            beta: 1.0,
        };
        let lb = chi_lower_bound(&ctx).unwrap();
        assert!((lb.chi * lb.gamma * lb.zeta - 1.0).abs() < 1e-12);
        assert!(lb.holds(sol.d2, sol1.d2, 1e-10));
    }

    #[test]
    fn chi_needs_positive_gamma() {
        let w = WeightVector::uniform(2);
        let sol = solution_with(vec![0.0, 0.0], vec![c(1.0), c(1.0)]);
        let ctx = IterPairContext {
            values: &[c(0.0), c(0.0)],
            w_k: &w,
            sol_k: &sol,
            w_next: &w,
            sol_next: &sol,
            beta: 1.0,
        };
        assert!(matches!(chi_lower_bound(&ctx), Err(Error::DegenerateBound)));
    }

    #[test]
    fn slackness_examples() {
        let w = WeightVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(slackness_residual(&w, &[0.3, 0.3, 0.9], 0.3), 0.0);
        let e1 = WeightVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(slackness_residual(&e1, &[0.0, 5.0], 1.0), 0.0);
        assert!(!certificate_condition(&w, &[0.3, 0.3, 0.9], 0.3));
        assert!(certificate_condition(&w, &[0.3, 0.3, 0.2], 0.3));
    }

    #[test]
    fn reference_point_examples() {
        assert_eq!(reference_point_count(&[0.5; 6], 0.5, 1e-6), 6);
        assert_eq!(reference_point_count(&[0.5, 0.5], 0.5, 1e-6), 2);
        assert_eq!(reference_point_count(&[0.5, 0.1, 0.4999999], 0.5, 1e-6), 2);
    }

    #[test]
    fn defect_examples() {
        let d = |a: &[f64], b: &[f64], n1, n2| {
            let a: Vec<C64> = a.iter().map(|&x| c(x)).collect();
            let b: Vec<C64> = b.iter().map(|&x| c(x)).collect();
            compute_defect(&a, &b, DegreePair::new(n1, n2), 1e-10)
        };
        assert_eq!(d(&[-1.0, 1.0], &[-1.0, 1.0], 1, 1).unwrap(), 0);
        assert_eq!(d(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 2, 2).unwrap(), 0);
        assert_eq!(d(&[1.0, 2.0, 0.0, 0.0], &[1.0, 0.0, 3.0, 0.0], 3, 3).unwrap(), 1);
        assert_eq!(d(&[0.0, 0.0], &[1.0, 0.0], 1, 1).unwrap(), 1);
        assert!(matches!(d(&[1.0], &[0.0, 0.0], 0, 1), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn lsmax_examples() {
        let ones = CMat::from_element(4, 1, c(1.0));
        let w = WeightVector::uniform(4);
        let in_span = linalg::to_cvec(&[c(2.0); 4]);
        assert!(verify_lsmax_lemma(&w, &ones, &in_span, 50, 1).unwrap());
        let z = linalg::to_cvec(&[c(0.3), C64::new(-1.0, 0.5), c(2.0), C64::new(0.0, 1.0)]);
        assert!(verify_lsmax_lemma(&w, &ones, &z, 200, 2).unwrap());
        let wz = WeightVector::new(vec![0.5, 0.0, 0.25, 0.25]).unwrap();
        assert!(verify_lsmax_lemma(&wz, &ones, &z, 200, 3).unwrap());
        let two = CMat::from_element(4, 2, c(1.0));
        assert!(matches!(verify_lsmax_lemma(&w, &two, &z, 5, 4), Err(Error::RankDeficient)));
    }

    #[test]
    fn chebyshev_sum_examples() {
        assert!(verify_chebyshev_sum_lemma(&[0.2, 0.3, 0.5], &[1.5, 1.5, 1.5]));
        assert!(verify_chebyshev_sum_lemma(&[1.0, 0.0, 0.0], &[0.1, 2.0, 3.0]));
        let rep = chebyshev_sum_report(&[0.2, 0.3, 0.5], &[0.1, 2.0, 3.0]);
        assert!(rep.holds && rep.equality_consistent);
    }
}
