//! The dual Lawson iteration.
//!
//! Each outer step evaluates `d2(w)` with the current weights, checks the
//! relative duality gap `|sqrt(d2) - e(xi)| / e(xi)`, and applies the
//! multiplicative update `w_j <- w_j r_j^beta / sum_i w_i r_i^beta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisKind, BasisMatrix};
use crate::diagnostics::{self, IterPairContext};
use crate::dual_core::{self, DualSolution, WeightVector};
use crate::problem::{DegreePair, SampleSet};
use crate::{Error, Result, C64};

/// Decrease in `d2` (relative to `max(1, d2)`) that triggers halving beta.
pub const STAGNATION_DROP_REL: f64 = 1e-8;
/// A fit whose maximum error is below this times `max(1, |f|_inf)` is treated
/// as exact interpolation.
pub const EXACT_FIT_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// `w_j = 1/m`.
    #[default]
    Uniform,
    /// Positive random weights drawn from `config.seed`.
    Random,
}

impl std::str::FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "random" => Ok(Self::Random),
            other => Err(Error::InvalidInput(format!("unknown init `{other}` (expected uniform or random)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Lawson exponent.
    pub beta: f64,
    pub max_iter: usize,
    /// Stopping tolerance on the relative duality gap.
    pub eps_r: f64,
    /// Weights below this are zeroed before each dual evaluation.
    pub eps_w: f64,
    pub basis_kind: BasisKind,
    /// Build the Arnoldi basis in the Lawson weights (otherwise uniform).
    pub arnoldi_lawson_weights: bool,
    pub record_weights: bool,
    pub seed: u64,
    pub init: InitKind,
    /// Halve beta whenever `d2` drops between iterates.
    pub adaptive_beta: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            max_iter: 1000,
            eps_r: 1e-10,
            eps_w: 0.0,
            basis_kind: BasisKind::Arnoldi,
            arnoldi_lawson_weights: true,
            record_weights: false,
            seed: 0,
            init: InitKind::Uniform,
            adaptive_beta: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return Err(Error::InvalidInput(format!(
                "beta = {} outside (0, 2]",
                self.beta
            )));
        }
        if self.beta > 1.0 {
            log::warn!("beta = {} > 1: ascent is only guaranteed for small beta in the rational case", self.beta);
        }
        if !(self.eps_r > 0.0) {
            return Err(Error::InvalidInput("eps_r must be positive".into()));
        }
        if !(self.eps_w >= 0.0) {
            return Err(Error::InvalidInput("eps_w must be nonnegative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub d2: f64,
    pub e_xi: f64,
    pub eps: f64,
    pub support: usize,
    /// `None` when the reduced matrix is `1 × 1` (gap is infinite).
    pub eig_gap: Option<f64>,
    pub simple: bool,
    /// Lower-bound factor linking this iterate to the next one.
    pub chi: Option<f64>,
    /// Exponent used for the update leaving this iterate.
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub rows: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn d2_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d2).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with columns `k,d2,e_xi,eps,support,eig_gap,simple,chi`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("k,d2,e_xi,eps,support,eig_gap,simple,chi\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{},{},{},{}",
                r.k,
                r.d2,
                r.e_xi,
                r.eps,
                r.support,
                r.eig_gap.map_or("inf".to_string(), |g| format!("{g:.16e}")),
                r.simple,
                r.chi.map_or(String::new(), |c| format!("{c:.16e}")),
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIter,
    InterpolationFound,
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Last successful dual evaluation (absent if the first one failed).
    pub solution: Option<DualSolution>,
    pub weights: WeightVector,
    pub trace: IterationTrace,
    pub status: RunStatus,
    /// Relative duality gap below `eps_r` at exit.
    pub certified_minimax: bool,
    /// Bases used for the final solution (for evaluating the approximant).
    pub psi: Option<BasisMatrix>,
    pub phi: Option<BasisMatrix>,
    /// Error that ended a degenerate run.
    pub failure: Option<String>,
    /// Some iterate had a denominator value under the guard.
    pub a1_suspect: bool,
    /// Number of times beta was halved by the stagnation guard.
    pub beta_halvings: usize,
}

impl RunResult {
    pub fn d2(&self) -> f64 {
        self.solution.as_ref().map_or(0.0, |s| s.d2)
    }

    pub fn e_xi(&self) -> f64 {
        self.solution.as_ref().map_or(f64::NAN, |s| s.max_residual())
    }

    /// Monomial coefficients `(a, b)` of the final approximant.
    pub fn monomial_coefficients(&self) -> Option<(Vec<C64>, Vec<C64>)> {
        let sol = self.solution.as_ref()?;
        let psi = self.psi.as_ref()?;
        let phi = self.phi.as_ref()?;
        Some((
            psi.coefficients_to_monomial(&sol.a),
            phi.coefficients_to_monomial(&sol.b),
        ))
    }
}

/// Lawson weight update. Residuals are scaled by their maximum before
/// exponentiation, which leaves the normalized result unchanged.
pub fn update_weights(w: &WeightVector, residual_abs: &[f64], beta: f64) -> Result<WeightVector> {
    if residual_abs.len() != w.len() {
        return Err(Error::InvalidInput("residual length mismatch".into()));
    }
    let rmax = w
        .as_slice()
        .iter()
        .zip(residual_abs)
        .filter(|(&wj, _)| wj > 0.0)
        .fold(0.0_f64, |acc, (_, &r)| acc.max(r));
    if !(rmax > 0.0) {
        return Err(Error::AllResidualsZero);
    }
    let raw: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(residual_abs)
        .map(|(&wj, &r)| if wj > 0.0 && r > 0.0 { wj * (r / rmax).powf(beta) } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllResidualsZero);
    }
    WeightVector::new(raw)
}

/// Zeroes weights below `eps_w` and renormalizes. Returns the original
/// weights with `SupportTooSmall` if fewer than `min_support` would survive.
pub fn filter_weights(w: &WeightVector, eps_w: f64, min_support: usize) -> Result<(WeightVector, Vec<usize>)> {
    if eps_w <= 0.0 {
        return Ok((w.clone(), w.support()));
    }
    let kept: Vec<f64> = w.as_slice().iter().map(|&x| if x < eps_w { 0.0 } else { x }).collect();
    let active: Vec<usize> = (0..kept.len()).filter(|&j| kept[j] > 0.0).collect();
    if active.len() < min_support {
        log::warn!(
            "filtering at eps_w = {eps_w:e} would leave {} nodes (< {min_support}); skipped",
            active.len()
        );
        return Err(Error::SupportTooSmall {
            support: active.len(),
            required: min_support,
        });
    }
    Ok((WeightVector::new(kept)?, active))
}

/// Relative duality gap `|sqrt(d2) - e| / e`.
pub fn stopping_epsilon(d2: f64, e_xi: f64) -> Result<f64> {
    if !(e_xi > 0.0) {
        return Err(Error::ExactFit);
    }
    Ok((d2.max(0.0).sqrt() - e_xi).abs() / e_xi)
}

fn initial_weights(m: usize, config: &SolverConfig, w0: Option<WeightVector>) -> Result<WeightVector> {
    match (w0, config.init) {
        (Some(w), _) => {
            if w.len() != m {
                return Err(Error::InvalidInput(format!("w0 has {} entries for {m} samples", w.len())));
            }
            Ok(w)
        }
        (None, InitKind::Random) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            WeightVector::new((0..m).map(|_| rng.random_range(0.5..1.5)).collect())
        }
        (None, InitKind::Uniform) => Ok(WeightVector::uniform(m)),
    }
}

fn build_bases(
    samples: &SampleSet,
    degrees: DegreePair,
    config: &SolverConfig,
    w: &WeightVector,
) -> Result<(BasisMatrix, BasisMatrix)> {
    let top = degrees.n1.max(degrees.n2);
    let uniform;
    let weights = if config.arnoldi_lawson_weights {
        w.as_slice()
    } else {
        uniform = vec![1.0 / samples.len() as f64; samples.len()];
        &uniform
    };
    let full = basis::build(config.basis_kind, samples.nodes(), top, weights)?;
    Ok((full.leading(degrees.n1), full.leading(degrees.n2)))
}

/// Builds the bases the solver would use at `w` and evaluates the dual there.
pub fn evaluate_at(
    samples: &SampleSet,
    degrees: DegreePair,
    config: &SolverConfig,
    w: &WeightVector,
) -> Result<(DualSolution, BasisMatrix, BasisMatrix)> {
    let (psi, phi) = build_bases(samples, degrees, config, w)?;
    let sol = dual_core::eval_dual(samples, &psi, &phi, w)?;
    Ok((sol, psi, phi))
}

struct Iterate {
    w: WeightVector,
    sol: DualSolution,
}

/// Runs the dual Lawson iteration from `w0` (uniform by default).
pub fn run_d_lawson(
    samples: &SampleSet,
    degrees: DegreePair,
    config: &SolverConfig,
    w0: Option<WeightVector>,
) -> Result<RunResult> {
    config.validate()?;
    degrees.check_against(samples.len())?;
    let min_support = degrees.min_support();
    let mut w = initial_weights(samples.len(), config, w0)?;
    if w.support_size() < min_support {
        return Err(Error::SupportTooSmall {
            support: w.support_size(),
            required: min_support,
        });
    }
    let exact_tol = EXACT_FIT_REL * samples.max_abs_value().max(1.0);

    let mut beta = config.beta;
    let mut trace = IterationTrace::default();
    let mut prev: Option<Iterate> = None;
    let mut bases: Option<(BasisMatrix, BasisMatrix)> = None;
    let mut a1_suspect = false;
    let mut beta_halvings = 0;
    // whether the weights leaving the previous iterate are exactly its Lawson update
    let mut pure_update = true;

    let finish = |sol: Option<DualSolution>,
                  w: WeightVector,
                  trace: IterationTrace,
                  status: RunStatus,
                  certified: bool,
                  bases: Option<(BasisMatrix, BasisMatrix)>,
                  failure: Option<String>,
                  a1: bool,
                  halvings: usize| {
        let (psi, phi) = match bases {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        RunResult {
            solution: sol,
            weights: w,
            trace,
            status,
            certified_minimax: certified,
            psi,
            phi,
            failure,
            a1_suspect: a1,
            beta_halvings: halvings,
        }
    };

    for k in 0..=config.max_iter {
        if config.eps_w > 0.0 {
            if let Ok((filtered, _)) = filter_weights(&w, config.eps_w, min_support) {
                if filtered != w {
                    pure_update = false;
                }
                w = filtered;
            }
        }

        let (sol, psi, phi) = match evaluate_at(samples, degrees, config, &w) {
            Ok(x) => x,
            Err(e) => {
                log::warn!("iteration {k}: dual evaluation failed: {e}");
                let last = prev.map(|it| (it.sol, it.w));
                let (sol, wl) = match last {
                    Some((s, wl)) => (Some(s), wl),
                    None => (None, w),
                };
                return Ok(finish(sol, wl, trace, RunStatus::Degenerate, false, bases, Some(e.to_string()), a1_suspect, beta_halvings));
            }
        };
        a1_suspect |= sol.a1_suspect;

        let e_xi = sol.max_residual();
        let exact = e_xi <= exact_tol;
        let eps = stopping_epsilon(sol.d2, e_xi).unwrap_or(0.0);

        if let Some(p) = prev.as_ref() {
            if pure_update {
                let ctx = IterPairContext {
                    values: samples.values(),
                    w_k: &p.w,
                    sol_k: &p.sol,
                    w_next: &w,
                    sol_next: &sol,
                    beta: trace.rows.last().map_or(beta, |r| r.beta),
                };
                if let Ok(bound) = diagnostics::chi_lower_bound(&ctx) {
                    if let Some(row) = trace.rows.last_mut() {
                        row.chi = Some(bound.chi);
                    }
                }
            }
            let drop = p.sol.d2 - sol.d2;
            if config.adaptive_beta && drop > STAGNATION_DROP_REL * sol.d2.max(1.0) {
                beta *= 0.5;
                beta_halvings += 1;
                log::info!("iteration {k}: d2 decreased by {drop:e}; beta halved to {beta}");
            }
        }

        trace.rows.push(IterationRecord {
            k,
            d2: sol.d2,
            e_xi,
            eps,
            support: w.support_size(),
            eig_gap: sol.eig_gap.is_finite().then_some(sol.eig_gap),
            simple: sol.simple,
            chi: None,
            beta,
            weights: config.record_weights.then(|| w.as_slice().to_vec()),
        });
        bases = Some((psi, phi));

        if exact {
            return Ok(finish(Some(sol), w, trace, RunStatus::InterpolationFound, false, bases, None, a1_suspect, beta_halvings));
        }
        if eps < config.eps_r {
            return Ok(finish(Some(sol), w, trace, RunStatus::Converged, true, bases, None, a1_suspect, beta_halvings));
        }
        if k >= config.max_iter {
            return Ok(finish(Some(sol), w, trace, RunStatus::MaxIter, false, bases, None, a1_suspect, beta_halvings));
        }

        let next = match update_weights(&w, &sol.residual_abs, beta) {
            Ok(next) => next,
            Err(Error::AllResidualsZero) => {
                return Ok(finish(Some(sol), w, trace, RunStatus::InterpolationFound, false, bases, None, a1_suspect, beta_halvings));
            }
            Err(e) => return Err(e),
        };
        if next.support_size() < min_support {
            let e = Error::SupportTooSmall {
                support: next.support_size(),
                required: min_support,
            };
            log::warn!("iteration {k}: {e}");
            return Ok(finish(Some(sol), w, trace, RunStatus::Degenerate, false, bases, Some(e.to_string()), a1_suspect, beta_halvings));
        }
        pure_update = true;
        prev = Some(Iterate { w, sol });
        w = next;
    }
    unreachable!("loop exits through the k >= max_iter branch")
}
