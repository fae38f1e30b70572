//! Polynomial bases evaluated at the sample nodes.
//!
//! The Arnoldi basis is the weighted Vandermonde-with-Arnoldi construction:
//! starting from the constant vector, each new column is `x .* q_k`
//! orthogonalized (two passes of classical Gram-Schmidt) against the previous
//! columns in the inner product `<u, v>_w = u^H diag(w) v`. The Hessenberg
//! coefficients are kept so the same polynomials can be evaluated anywhere.

use serde::{Deserialize, Serialize};

use crate::{CMat, Error, Result, C64};

const BREAKDOWN_REL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    Arnoldi,
    Monomial,
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arnoldi" => Ok(Self::Arnoldi),
            "monomial" => Ok(Self::Monomial),
            other => Err(Error::InvalidInput(format!("unknown basis `{other}`"))),
        }
    }
}

/// Basis functions `phi_0..phi_deg` evaluated at the nodes (one column each).
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    entries: CMat,
    kind: BasisKind,
    deg: usize,
    /// Upper Hessenberg `(deg+1) × deg`; column `k` holds the coefficients of
    /// `x * phi_k = sum_{i<=k+1} H[i,k] phi_i`.
    recurrence: Option<CMat>,
}

impl BasisMatrix {
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn recurrence(&self) -> Option<&CMat> {
        self.recurrence.as_ref()
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    /// The basis for `P_d`, `d <= deg`, formed by the first `d + 1` columns.
    /// Both constructions are degree-graded, so this is again a valid basis.
    pub fn leading(&self, d: usize) -> BasisMatrix {
        assert!(d <= self.deg, "leading degree {d} exceeds basis degree {}", self.deg);
        BasisMatrix {
            entries: self.entries.columns(0, d + 1).into_owned(),
            kind: self.kind,
            deg: d,
            recurrence: self
                .recurrence
                .as_ref()
                .map(|h| h.view((0, 0), (d + 1, d)).into_owned()),
        }
    }

    /// Evaluates the same basis functions at arbitrary points.
    pub fn evaluate(&self, points: &[C64]) -> CMat {
        match (&self.kind, &self.recurrence) {
            (BasisKind::Monomial, _) | (BasisKind::Arnoldi, None) => {
                monomial_entries(points, self.deg)
            }
            (BasisKind::Arnoldi, Some(h)) => {
                let n = points.len();
                let mut out = CMat::zeros(n, self.deg + 1);
                out.column_mut(0).fill(C64::new(1.0, 0.0));
                for k in 0..self.deg {
                    for (i, &z) in points.iter().enumerate() {
                        let mut v = z * out[(i, k)];
                        for j in 0..=k {
                            v -= h[(j, k)] * out[(i, j)];
                        }
                        out[(i, k + 1)] = v / h[(k + 1, k)];
                    }
                }
                out
            }
        }
    }

    /// Change of basis to monomial coordinates: column `j` holds the monomial
    /// coefficients of basis function `j`. Upper triangular.
    pub fn to_monomial(&self) -> CMat {
        let n = self.deg + 1;
        match &self.recurrence {
            None => CMat::identity(n, n),
            Some(h) => {
                let mut c = CMat::zeros(n, n);
                c[(0, 0)] = C64::new(1.0, 0.0);
                for k in 0..self.deg {
                    // x * phi_k: shift coefficients up by one degree
                    let mut next = vec![C64::new(0.0, 0.0); n];
                    for i in 0..=k {
                        next[i + 1] = c[(i, k)];
                    }
                    for j in 0..=k {
                        for (i, slot) in next.iter_mut().enumerate().take(j + 1) {
                            *slot -= h[(j, k)] * c[(i, j)];
                        }
                    }
                    for (i, v) in next.into_iter().enumerate() {
                        c[(i, k + 1)] = v / h[(k + 1, k)];
                    }
                }
                c
            }
        }
    }

    /// Converts a coefficient vector in this basis to monomial coefficients.
    pub fn coefficients_to_monomial(&self, coef: &[C64]) -> Vec<C64> {
        let c = self.to_monomial();
        let v = crate::linalg::to_cvec(coef);
        (c * v).iter().copied().collect()
    }
}

fn monomial_entries(points: &[C64], deg: usize) -> CMat {
    let mut out = CMat::zeros(points.len(), deg + 1);
    for (i, &z) in points.iter().enumerate() {
        let mut pow = C64::new(1.0, 0.0);
        for k in 0..=deg {
            out[(i, k)] = pow;
            pow *= z;
        }
    }
    out
}

/// Vandermonde matrix `entries[j][i] = x_j^i`.
pub fn build_monomial(nodes: &[C64], deg: usize) -> BasisMatrix {
    BasisMatrix {
        entries: monomial_entries(nodes, deg),
        kind: BasisKind::Monomial,
        deg,
        recurrence: None,
    }
}

fn w_dot(w: &[f64], u: impl Iterator<Item = C64>, v: impl Iterator<Item = C64>) -> C64 {
    u.zip(v)
        .zip(w)
        .map(|((a, b), &wj)| a.conj() * b * wj)
        .sum()
}

/// Weighted Vandermonde-with-Arnoldi basis; columns are orthonormal in the
/// `w`-inner product.
pub fn build_arnoldi(nodes: &[C64], deg: usize, weights: &[f64]) -> Result<BasisMatrix> {
    let m = nodes.len();
    if weights.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} weights for {m} nodes",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::RankBreakdown { column: 0, deg });
    }
    let w: Vec<f64> = weights.iter().map(|&x| x / total).collect();
    let support = w.iter().filter(|&&x| x > 0.0).count();
    if support < deg + 1 {
        return Err(Error::RankBreakdown {
            column: support,
            deg,
        });
    }

    let mut q = CMat::zeros(m, deg + 1);
    q.column_mut(0).fill(C64::new(1.0, 0.0));
    let mut h = CMat::zeros(deg + 1, deg);

    for k in 0..deg {
        let mut v: Vec<C64> = nodes.iter().zip(q.column(k).iter()).map(|(x, c)| x * c).collect();
        let scale = w_dot(&w, v.iter().copied(), v.iter().copied()).re.sqrt();
        for _pass in 0..2 {
            for j in 0..=k {
                let coef = w_dot(&w, q.column(j).iter().copied(), v.iter().copied());
                h[(j, k)] += coef;
                for (vi, qi) in v.iter_mut().zip(q.column(j).iter()) {
                    *vi -= coef * qi;
                }
            }
        }
        let norm = w_dot(&w, v.iter().copied(), v.iter().copied()).re.sqrt();
        if !(norm > BREAKDOWN_REL * scale) || norm == 0.0 {
            return Err(Error::RankBreakdown { column: k + 1, deg });
        }
        h[(k + 1, k)] = C64::new(norm, 0.0);
        for (i, vi) in v.into_iter().enumerate() {
            q[(i, k + 1)] = vi / norm;
        }
    }

    Ok(BasisMatrix {
        entries: q,
        kind: BasisKind::Arnoldi,
        deg,
        recurrence: Some(h),
    })
}

/// Builds a basis of the requested kind; Arnoldi bases are orthonormal in the
/// given weights.
pub fn build(kind: BasisKind, nodes: &[C64], deg: usize, weights: &[f64]) -> Result<BasisMatrix> {
    match kind {
        BasisKind::Monomial => Ok(build_monomial(nodes, deg)),
        BasisKind::Arnoldi => build_arnoldi(nodes, deg, weights),
    }
}

/// Evaluates `basis` at `points`.
pub fn evaluate_basis(basis: &BasisMatrix, points: &[C64]) -> CMat {
    basis.evaluate(points)
}
