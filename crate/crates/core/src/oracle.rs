//! Brute-force references for tests: grid search over coefficient space and
//! finite-difference gradients of `d2`.

use rayon::prelude::*;

use crate::basis::BasisMatrix;
use crate::dual_core::{eval_dual, WeightVector};
use crate::problem::{DegreePair, SampleSet};
use crate::{Error, Result, C64};

/// Maximum number of grid points evaluated per round.
pub const MAX_GRID_POINTS: u128 = 100_000_000;
/// Grid points with some `|q(x_j)|` below this are skipped.
pub const Q_SKIP: f64 = 1e-12;

/// Closed interval searched for one real coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Search box for one complex coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffRange {
    pub re: Interval,
    pub im: Interval,
}

impl CoeffRange {
    pub fn real(lo: f64, hi: f64) -> Self {
        Self {
            re: Interval::new(lo, hi),
            im: Interval::point(0.0),
        }
    }

    pub fn square(half_width: f64) -> Self {
        Self {
            re: Interval::new(-half_width, half_width),
            im: Interval::new(-half_width, half_width),
        }
    }
}

/// Refined grid search over the free coefficients.
///
/// `ranges` lists the numerator coefficients `a_0..a_n1` followed by the
/// `n2` free denominator coefficients. In the first gauge pass these are
/// `b_0..b_{n2-1}` with `b_n2 = 1`; in the second pass they are
/// `b_1..b_n2` with `b_0 = 1`. A zero-width interval is a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub ranges: Vec<CoeffRange>,
    pub points_per_axis: usize,
    pub refinement_rounds: usize,
}

impl GridSpec {
    fn axes(&self) -> Vec<Interval> {
        self.ranges.iter().flat_map(|r| [r.re, r.im]).collect()
    }

    fn axis_counts(&self, axes: &[Interval]) -> Vec<usize> {
        axes.iter()
            .map(|a| if a.width() > 0.0 { self.points_per_axis } else { 1 })
            .collect()
    }

    /// Grid points per round.
    pub fn size(&self) -> u128 {
        self.axis_counts(&self.axes()).iter().map(|&c| c as u128).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Smallest maximum error found, an upper bound on the minimax value.
    pub eta_est: f64,
    /// Monomial coefficients of the best numerator and denominator.
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// Best value after each refinement round (all passes merged).
    pub history: Vec<f64>,
}

fn horner(coef: &[C64], x: C64) -> C64 {
    coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// `max_j |f_j - p(x_j)/q(x_j)|`, or `None` if some `|q(x_j)|` is tiny.
pub fn max_error(samples: &SampleSet, a: &[C64], b: &[C64]) -> Option<f64> {
    let mut worst = 0.0_f64;
    for (&x, &f) in samples.nodes().iter().zip(samples.values()) {
        let q = horner(b, x);
        if q.norm() < Q_SKIP {
            return None;
        }
        worst = worst.max((f - horner(a, x) / q).norm());
    }
    Some(worst)
}

#[derive(Clone, Copy)]
enum Gauge {
    LeadingOne,
    ConstantOne,
}

fn split(point: &[f64], n1: usize, gauge: Gauge) -> (Vec<C64>, Vec<C64>) {
    let coef: Vec<C64> = point.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    let a = coef[..=n1].to_vec();
    let free = &coef[n1 + 1..];
    let one = C64::new(1.0, 0.0);
    let b = match gauge {
        Gauge::LeadingOne => free.iter().copied().chain([one]).collect(),
        Gauge::ConstantOne => [one].into_iter().chain(free.iter().copied()).collect(),
    };
    (a, b)
}

struct Best {
    value: f64,
    point: Vec<f64>,
}

fn search_pass(samples: &SampleSet, degrees: DegreePair, spec: &GridSpec, gauge: Gauge, history: &mut Vec<f64>) -> Option<Best> {
    let mut axes = spec.axes();
    let mut best: Option<Best> = None;
    for round in 0..spec.refinement_rounds.max(1) {
        let counts = spec.axis_counts(&axes);
        let total: usize = counts.iter().product();
        let coord = |idx: usize| -> Vec<f64> {
            let mut rem = idx;
            axes.iter()
                .zip(&counts)
                .map(|(ax, &c)| {
                    let i = rem % c;
                    rem /= c;
                    if c == 1 {
                        0.5 * (ax.lo + ax.hi)
                    } else {
                        ax.lo + ax.width() * i as f64 / (c - 1) as f64
                    }
                })
                .collect()
        };
        let found = (0..total)
            .into_par_iter()
            .filter_map(|idx| {
                let pt = coord(idx);
                let (a, b) = split(&pt, degrees.n1, gauge);
                max_error(samples, &a, &b).map(|v| (v, idx))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        if let Some((v, idx)) = found {
            if best.as_ref().is_none_or(|b| v < b.value) {
                best = Some(Best { value: v, point: coord(idx) });
            }
        }
        let Some(b) = best.as_ref() else {
            history.push(f64::INFINITY);
            continue;
        };
        history.push(b.value);
        if round + 1 < spec.refinement_rounds {
            // recenter on the best point with half-width equal to one grid step
            axes = axes
                .iter()
                .zip(&counts)
                .zip(&b.point)
                .map(|((ax, &c), &x)| {
                    if c == 1 {
                        *ax
                    } else {
                        let step = ax.width() / (c - 1) as f64;
                        Interval::new(x - step, x + step)
                    }
                })
                .collect();
        }
    }
    best
}

/// Estimates the minimax error by refined grid search over coefficients.
pub fn brute_force_minimax(samples: &SampleSet, degrees: DegreePair, grid: &GridSpec) -> Result<BruteForceResult> {
    degrees.check_against(samples.len())?;
    let free = degrees.n1 + 1 + degrees.n2;
    if grid.ranges.len() != free {
        return Err(Error::BadSize {
            name: "grid ranges".into(),
            msg: format!("expected {free} coefficient ranges, got {}", grid.ranges.len()),
        });
    }
    if grid.points_per_axis < 2 {
        return Err(Error::InvalidInput("points_per_axis must be at least 2".into()));
    }
    let points = grid.size();
    if points > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge {
            points,
            limit: MAX_GRID_POINTS,
        });
    }

    let gauges: &[Gauge] = if degrees.n2 == 0 {
        &[Gauge::LeadingOne]
    } else {
        &[Gauge::LeadingOne, Gauge::ConstantOne]
    };
    let mut overall: Option<(Best, Gauge)> = None;
    let mut histories = Vec::new();
    for &g in gauges {
        let mut hist = Vec::new();
        if let Some(b) = search_pass(samples, degrees, grid, g, &mut hist) {
            if overall.as_ref().is_none_or(|(o, _)| b.value < o.value) {
                overall = Some((b, g));
            }
        }
        histories.push(hist);
    }
    let rounds = histories.iter().map(Vec::len).max().unwrap_or(0);
    let history = (0..rounds)
        .map(|i| {
            histories
                .iter()
                .filter_map(|h| h.get(i))
                .fold(f64::INFINITY, |acc, &v| acc.min(v))
        })
        .collect();

    let (best, gauge) = overall.ok_or(Error::DegenerateDenominator)?;
    let (a, b) = split(&best.point, degrees.n1, gauge);
    Ok(BruteForceResult {
        eta_est: best.value,
        a,
        b,
        history,
    })
}

/// Removes the mean, projecting onto the tangent space of the simplex.
pub fn project_tangent(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Central differences of `d2` along `e_i - e_m` (for `i < m`), lifted to a
/// full gradient with last entry zero and then projected onto the tangent
/// space of the simplex.
pub fn finite_diff_gradient(
    samples: &SampleSet,
    psi: &BasisMatrix,
    phi: &BasisMatrix,
    w: &WeightVector,
    h: f64,
) -> Result<Vec<f64>> {
    if !(h >= 1e-10) {
        return Err(Error::StepUnderflow(h));
    }
    if !w.is_interior() {
        return Err(Error::NotDifferentiable("weight vector has zero entries".into()));
    }
    let m = w.len();
    let base = w.as_slice();
    if base.iter().any(|&x| x <= h) {
        return Err(Error::InvalidInput(format!("step {h:e} leaves the simplex")));
    }
    let d2_at = |i: usize, t: f64| -> Result<f64> {
        let mut v = base.to_vec();
        v[i] += t;
        v[m - 1] -= t;
        Ok(eval_dual(samples, psi, phi, &WeightVector::new(v)?)?.d2)
    };
    let mut lifted = vec![0.0; m];
    for (i, g) in lifted.iter_mut().enumerate().take(m - 1) {
        *g = (d2_at(i, h)? - d2_at(i, -h)?) / (2.0 * h);
    }
    Ok(project_tangent(&lifted))
}
