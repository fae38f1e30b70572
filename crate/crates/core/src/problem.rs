//! Sample data: the nodes `x_j`, values `f_j`, and degree bounds.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Header line recognized (and skipped) at the top of a sample CSV.
pub const CSV_HEADER: &str = "x_re,x_im,f_re,f_im";

/// Distinct complex nodes with their sampled values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    nodes: Vec<C64>,
    values: Vec<C64>,
}

impl SampleSet {
    /// Validates finiteness, matching lengths, `m >= 1` and exact node
    /// distinctness.
    pub fn new(nodes: Vec<C64>, values: Vec<C64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("sample set is empty".into()));
        }
        if let Some(j) = nodes
            .iter()
            .chain(values.iter())
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at position {}",
                j % nodes.len()
            )));
        }
        if let Some((first, second)) = find_duplicate(&nodes) {
            return Err(Error::DuplicateNode { first, second });
        }
        warn_near_duplicates(&nodes);
        Ok(Self { nodes, values })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, f| acc.max(f.norm()))
    }

    /// Serializes to the sample CSV format with a header and 17 significant
    /// digits per float, so `parse_samples(to_csv())` reproduces the data
    /// bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 96);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (x, f) in self.nodes.iter().zip(&self.values) {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                x.re, x.im, f.re, f.im
            );
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Returns the original (0-based) indices of an exactly repeated node.
fn find_duplicate(nodes: &[C64]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (nodes[i], nodes[j]);
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    order.windows(2).find_map(|w| {
        (nodes[w[0]] == nodes[w[1]]).then(|| (w[0].min(w[1]), w[0].max(w[1])))
    })
}

fn warn_near_duplicates(nodes: &[C64]) {
    if nodes.len() < 2 || nodes.len() > 20_000 {
        return;
    }
    let mut min_d = f64::INFINITY;
    let mut max_d = 0.0_f64;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let d = (nodes[i] - nodes[j]).norm();
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
    }
    if min_d < 1e-12 * max_d {
        log::warn!(
            "nearly coincident nodes: min pairwise distance {min_d:e} vs max {max_d:e}"
        );
    }
}

/// Numerator and denominator degree bounds `(n1, n2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreePair {
    pub n1: usize,
    pub n2: usize,
}

impl DegreePair {
    pub fn new(n1: usize, n2: usize) -> Self {
        Self { n1, n2 }
    }

    /// Minimum number of samples for a well-posed problem: `n1 + n2 + 2`.
    pub fn min_samples(&self) -> usize {
        self.n1 + self.n2 + 2
    }

    /// Minimum weight support size, `max(n1 + 1, n2 + 1)`.
    pub fn min_support(&self) -> usize {
        self.n1.max(self.n2) + 1
    }

    pub fn check_against(&self, m: usize) -> Result<()> {
        if m < self.min_samples() {
            return Err(Error::BadSize {
                name: format!("degrees ({}, {})", self.n1, self.n2),
                msg: format!("need at least {} samples, have {m}", self.min_samples()),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Csv,
}

/// Reads a sample file from disk.
pub fn load_samples(path: &Path, format: SampleFormat) -> Result<SampleSet> {
    match format {
        SampleFormat::Csv => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_samples(&text)
        }
    }
}

/// Parses the sample CSV format: optional `x_re,x_im,f_re,f_im` header, then
/// one `x_re,x_im,f_re,f_im` row per sample.
pub fn parse_samples(text: &str) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(None)
        .from_reader(text.as_bytes());

    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let mut seen_row = false;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|s| s.is_empty()) {
            continue;
        }
        if !seen_row && is_header(&record) {
            seen_row = true;
            continue;
        }
        seen_row = true;
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let mut nums = [0.0; 4];
        for (slot, field) in nums.iter_mut().zip(record.iter()) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("not a number: `{field}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite value `{field}`"),
                });
            }
            *slot = v;
        }
        nodes.push(C64::new(nums[0], nums[1]));
        values.push(C64::new(nums[2], nums[3]));
    }
    if nodes.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no sample rows".into(),
        });
    }
    SampleSet::new(nodes, values)
}

fn is_header(record: &csv::StringRecord) -> bool {
    let expected = ["x_re", "x_im", "f_re", "f_im"];
    record.len() == 4 && record.iter().zip(expected).all(|(a, b)| a == b)
}

/// Named test instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinProblem {
    /// Four integer nodes where the linearized infimum is attained but the
    /// rational one is not.
    Example1,
    /// `|x|` on an equispaced grid over `[-1, 1]`.
    AbsOnGrid,
    /// `exp(x)` on the `m`-th roots of unity.
    ExpUnitCircle,
    /// Runge's function on an equispaced grid over `[-1, 1]`.
    RungeGrid,
}

impl BuiltinProblem {
    pub fn name(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::AbsOnGrid => "abs_on_grid",
            Self::ExpUnitCircle => "exp_unit_circle",
            Self::RungeGrid => "runge_grid",
        }
    }
}

impl FromStr for BuiltinProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Self::Example1),
            "abs_on_grid" => Ok(Self::AbsOnGrid),
            "exp_unit_circle" => Ok(Self::ExpUnitCircle),
            "runge_grid" => Ok(Self::RungeGrid),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

fn equispaced(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| -1.0 + 2.0 * j as f64 / (m - 1) as f64)
        .collect()
}

/// Builds a deterministic builtin instance with `m` samples.
pub fn builtin_problem(kind: BuiltinProblem, m: usize) -> Result<SampleSet> {
    let bad = |msg: &str| Error::BadSize {
        name: kind.name().to_string(),
        msg: msg.to_string(),
    };
    let real = |v: f64| C64::new(v, 0.0);
    let (nodes, values): (Vec<C64>, Vec<C64>) = match kind {
        BuiltinProblem::Example1 => {
            if m != 4 {
                return Err(bad("example1 has exactly m = 4 samples"));
            }
            (
                (1..=4).map(|j| real(j as f64)).collect(),
                vec![real(0.0), real(1.0), real(1.0), real(1.0)],
            )
        }
        BuiltinProblem::AbsOnGrid => {
            if m < 2 {
                return Err(bad("equispaced grid needs m >= 2"));
            }
            equispaced(m)
                .into_iter()
                .map(|x| (real(x), real(x.abs())))
                .unzip()
        }
        BuiltinProblem::RungeGrid => {
            if m < 2 {
                return Err(bad("equispaced grid needs m >= 2"));
            }
            equispaced(m)
                .into_iter()
                .map(|x| (real(x), real(1.0 / (1.0 + 25.0 * x * x))))
                .unzip()
        }
        BuiltinProblem::ExpUnitCircle => {
            if m < 1 {
                return Err(bad("need m >= 1"));
            }
            (0..m)
                .map(|j| {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    let x = C64::from_polar(1.0, theta);
                    (x, x.exp())
                })
                .unzip()
        }
    };
    SampleSet::new(nodes, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn parses_example1_rows() {
        let s = parse_samples("1,0,0,0\n2,0,1,0\n3,0,1,0\n4,0,1,0\n").unwrap();
        assert_eq!(s, builtin_problem(BuiltinProblem::Example1, 4).unwrap());
    }

    #[test]
    fn parses_single_row_and_header() {
        let s = parse_samples("x_re,x_im,f_re,f_im\n0,0,5,0\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.values()[0], r(5.0));
    }

    #[test]
    fn rejects_duplicate_nodes() {
        let err = parse_samples("1,0,2,0\n3,0,1,0\n1,0,5,0\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateNode { first: 0, second: 2 }));
    }

    #[test]
    fn negative_zero_is_the_same_node() {
        let err = parse_samples("0,0,1,0\n-0,0,2,0\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateNode { .. }));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(
            parse_samples("1,0,2\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_samples("1,0,2,0\n2,0,abc,0\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_samples("1,0,inf,0\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_samples("1,0,NaN,0\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(parse_samples("").unwrap_err(), Error::Parse { .. }));
        assert!(matches!(
            parse_samples("x_re,x_im,f_re,f_im\n").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn values_may_repeat_and_be_zero() {
        let s = parse_samples("1,0,0,0\n2,0,0,0\n").unwrap();
        assert_eq!(s.values(), &[r(0.0), r(0.0)]);
    }

    #[test]
    fn builtin_instances() {
        let e = builtin_problem(BuiltinProblem::Example1, 4).unwrap();
        assert_eq!(e.nodes(), &[r(1.0), r(2.0), r(3.0), r(4.0)]);
        assert_eq!(e.values(), &[r(0.0), r(1.0), r(1.0), r(1.0)]);

        let a = builtin_problem(BuiltinProblem::AbsOnGrid, 3).unwrap();
        assert_eq!(a.nodes(), &[r(-1.0), r(0.0), r(1.0)]);
        assert_eq!(a.values(), &[r(1.0), r(0.0), r(1.0)]);

        let c = builtin_problem(BuiltinProblem::ExpUnitCircle, 1).unwrap();
        assert_eq!(c.nodes(), &[r(1.0)]);
        assert_eq!(c.values(), &[r(std::f64::consts::E)]);

        let g = builtin_problem(BuiltinProblem::RungeGrid, 5).unwrap();
        assert!((g.values()[2].re - 1.0).abs() < 1e-15);
        assert!((g.values()[0].re - 1.0 / 26.0).abs() < 1e-15);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            builtin_problem(BuiltinProblem::Example1, 5),
            Err(Error::BadSize { .. })
        ));
        assert!(matches!(
            "nope".parse::<BuiltinProblem>(),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn builtin_is_deterministic() {
        for kind in [
            BuiltinProblem::AbsOnGrid,
            BuiltinProblem::ExpUnitCircle,
            BuiltinProblem::RungeGrid,
        ] {
            assert_eq!(builtin_problem(kind, 17).unwrap(), builtin_problem(kind, 17).unwrap());
        }
    }

    #[test]
    fn degree_pair_checks() {
        let d = DegreePair::new(1, 1);
        assert!(d.check_against(4).is_ok());
        assert!(d.check_against(3).is_err());
        assert_eq!(d.min_support(), 2);
    }
}
