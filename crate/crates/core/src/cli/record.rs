//! JSON run record written by `fit` and read back by `verify`.

use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::lawson::{IterationRecord, RunResult, RunStatus, SolverConfig};
use crate::problem::{DegreePair, SampleSet};
use crate::{Error, Result, C64};

pub const SCHEMA_VERSION: u32 = 1;
/// Minimum relative band for counting reference points.
pub const REFERENCE_TOL: f64 = 1e-6;

/// Band used at a final duality gap `eps`: residuals on the support sit near
/// `sqrt(d2)`, which may lie a relative `eps` below `e(xi)`.
pub fn reference_band(eps: f64) -> f64 {
    REFERENCE_TOL.max(10.0 * eps)
}

/// Relative cutoff for the numeric degree of a coefficient vector.
pub const DEGREE_TOL: f64 = 1e-8;

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

fn to_pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    /// `builtin:<name>` or the input path.
    pub source: String,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub nodes: Vec<Pair>,
    pub values: Vec<Pair>,
}

impl ProblemDescriptor {
    pub fn new(source: String, samples: &SampleSet, degrees: DegreePair) -> Self {
        Self {
            source,
            m: samples.len(),
            n1: degrees.n1,
            n2: degrees.n2,
            nodes: to_pairs(samples.nodes()),
            values: to_pairs(samples.values()),
        }
    }

    pub fn samples(&self) -> Result<SampleSet> {
        if self.nodes.len() != self.m || self.values.len() != self.m {
            return Err(Error::SchemaMismatch(format!(
                "m = {} but {} nodes and {} values",
                self.m,
                self.nodes.len(),
                self.values.len()
            )));
        }
        SampleSet::new(from_pairs(&self.nodes), from_pairs(&self.values))
    }

    pub fn degrees(&self) -> DegreePair {
        DegreePair::new(self.n1, self.n2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    /// `max_j |w_j r_j (r_j - sqrt(d2))|` at the final iterate.
    pub slackness_residual: Option<f64>,
    pub reference_count: Option<usize>,
    pub defect: Option<usize>,
    pub certified_minimax: bool,
    /// `sqrt(d2) >= max r_j` over nodes with zero weight.
    pub certificate_condition: Option<bool>,
    pub a1_suspect: bool,
    pub beta_halvings: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: u32,
    pub problem: ProblemDescriptor,
    pub config: SolverConfig,
    pub status: RunStatus,
    pub d2: Option<f64>,
    pub sqrt_d2: Option<f64>,
    pub e_xi: Option<f64>,
    pub eps: Option<f64>,
    /// Monomial coefficients of the numerator, constant term first.
    pub a: Vec<Pair>,
    /// Monomial coefficients of the denominator, constant term first.
    pub b: Vec<Pair>,
    pub final_weights: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub diagnostics: DiagnosticsSummary,
}

impl OutputRecord {
    pub fn from_run(problem: ProblemDescriptor, config: &SolverConfig, run: &RunResult) -> Self {
        let degrees = problem.degrees();
        let sol = run.solution.as_ref();
        let (a, b) = run.monomial_coefficients().unwrap_or_default();
        let d2 = sol.map(|s| s.d2);
        let e_xi = sol.map(|s| s.max_residual());
        let eps = match (d2, e_xi) {
            (Some(d), Some(e)) if e > 0.0 => Some((d.sqrt() - e).abs() / e),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        let diagnostics = DiagnosticsSummary {
            slackness_residual: sol.map(|s| diagnostics::slackness_residual(&run.weights, &s.residual_abs, s.d2.sqrt())),
            reference_count: sol.filter(|s| s.max_residual() > 0.0).map(|s| {
                diagnostics::reference_point_count(&s.residual_abs, s.max_residual(), reference_band(eps.unwrap_or(0.0)))
            }),
            defect: diagnostics::compute_defect(&a, &b, degrees, DEGREE_TOL).ok(),
            certified_minimax: run.certified_minimax,
            certificate_condition: sol.map(|s| diagnostics::certificate_condition(&run.weights, &s.residual_abs, s.d2.sqrt())),
            a1_suspect: run.a1_suspect,
            beta_halvings: run.beta_halvings,
            failure: run.failure.clone(),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            problem,
            config: config.clone(),
            status: run.status,
            d2,
            sqrt_d2: d2.map(f64::sqrt),
            e_xi,
            eps,
            a: to_pairs(&a),
            b: to_pairs(&b),
            final_weights: run.weights.as_slice().to_vec(),
            trace: run.trace.rows.clone(),
            diagnostics,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record contains only finite floats")
    }

    /// Parses a record, rejecting unknown schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::SchemaMismatch(e.to_string()))?;
        match value.get("schema_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::SchemaMismatch(format!("unsupported schema_version {v}"))),
            None => return Err(Error::SchemaMismatch("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| Error::SchemaMismatch(e.to_string()))
    }

    pub fn coefficients(&self) -> (Vec<C64>, Vec<C64>) {
        (from_pairs(&self.a), from_pairs(&self.b))
    }
}
