//! Byte decoder for the `eval_dual` target, shared with the corpus test.

use ratmin::basis::build_arnoldi;
use ratmin::dual_core::eval_dual;
use ratmin::{SampleSet, WeightVector, C64};

pub struct DualInput {
    pub samples: SampleSet,
    pub weights: WeightVector,
    pub n1: usize,
    pub n2: usize,
}

fn scaled(pair: &[u8]) -> f64 {
    f64::from(i16::from_le_bytes([pair[0], pair[1]])) / 1000.0
}

/// Layout: `m`, `n1`, `n2` header bytes, then per node four `i16` values
/// (node and value, scaled by 1/1000) and one weight byte.
pub fn decode_dual_input(data: &[u8]) -> Option<DualInput> {
    let (&[m, n1, n2], rest) = data.split_first_chunk::<3>()?;
    let m = 2 + usize::from(m) % 15;
    let n1 = usize::from(n1) % 4;
    let n2 = usize::from(n2) % 4;
    if rest.len() < 9 * m {
        return None;
    }
    let mut nodes = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for row in rest.chunks_exact(9).take(m) {
        nodes.push(C64::new(scaled(&row[0..2]), scaled(&row[2..4])));
        values.push(C64::new(scaled(&row[4..6]), scaled(&row[6..8])));
        weights.push(f64::from(row[8]));
    }
    let samples = SampleSet::new(nodes, values).ok()?;
    let weights = WeightVector::new(weights).ok()?;
    Some(DualInput { samples, weights, n1, n2 })
}

impl DualInput {
    /// Evaluates the dual and asserts the invariants that hold for any input
    /// the evaluator accepts.
    pub fn check(&self) {
        let Ok(full) = build_arnoldi(self.samples.nodes(), self.n1.max(self.n2), self.weights.as_slice()) else {
            return;
        };
        let (psi, phi) = (full.leading(self.n1), full.leading(self.n2));
        let Ok(sol) = eval_dual(&self.samples, &psi, &phi, &self.weights) else {
            return;
        };
        assert!(sol.d2.is_finite() && sol.d2 >= 0.0, "d2 = {}", sol.d2);
        assert_eq!(sol.residual_abs.len(), self.samples.len());
        assert!(sol.residual_abs.iter().all(|r| !r.is_nan()));
        if !sol.a1_suspect {
            let e = sol.max_residual();
            assert!(sol.d2.sqrt() <= e * (1.0 + 1e-6) + 1e-9, "sqrt(d2) {} above e {}", sol.d2.sqrt(), e);
        }
    }
}
