#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ratmin::basis::{build_arnoldi, BasisMatrix};
use ratmin::{SampleSet, WeightVector, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `m` complex Gaussian nodes and values.
pub fn gaussian_samples(rng: &mut ChaCha8Rng, m: usize) -> SampleSet {
    let nodes = (0..m).map(|_| gaussian(rng)).collect();
    let values = (0..m).map(|_| gaussian(rng)).collect();
    SampleSet::new(nodes, values).expect("Gaussian nodes are distinct")
}

pub fn interior_weights(rng: &mut ChaCha8Rng, m: usize) -> WeightVector {
    WeightVector::new((0..m).map(|_| rng.random_range(0.2..1.0)).collect()).unwrap()
}

/// Numerator and denominator bases of the given degrees, from one Arnoldi
/// basis built with uniform weights.
pub fn uniform_bases(samples: &SampleSet, n1: usize, n2: usize) -> (BasisMatrix, BasisMatrix) {
    let m = samples.len();
    let full = build_arnoldi(samples.nodes(), n1.max(n2), &vec![1.0 / m as f64; m]).unwrap();
    (full.leading(n1), full.leading(n2))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
