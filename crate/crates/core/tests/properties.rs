mod common;

use proptest::prelude::*;
use ratmin::basis::{build_arnoldi, build_monomial};
use ratmin::dual_core::{eval_dual, eval_dual_dense};
use ratmin::lawson::update_weights;
use ratmin::problem::parse_samples;
use ratmin::{SampleSet, WeightVector, C64};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3_f64,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn complex_in(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn simplex(m: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.05..1.0_f64, m).prop_map(|w| WeightVector::new(w).unwrap())
}

/// Random instance with `m` nodes in the unit square, values in `[-2, 2]^2`,
/// and interior weights.
fn instance(m: std::ops::Range<usize>) -> impl Strategy<Value = (SampleSet, WeightVector)> {
    m.prop_flat_map(|m| {
        (
            prop::collection::vec(complex_in(1.0), m),
            prop::collection::vec(complex_in(2.0), m),
            simplex(m),
        )
    })
    .prop_filter_map("distinct nodes", |(x, f, w)| SampleSet::new(x, f).ok().map(|s| (s, w)))
}

fn arnoldi_pair(s: &SampleSet, w: &WeightVector, n1: usize, n2: usize) -> (ratmin::BasisMatrix, ratmin::BasisMatrix) {
    let full = build_arnoldi(s.nodes(), n1.max(n2), w.as_slice()).unwrap();
    (full.leading(n1), full.leading(n2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec((finite(), finite(), finite(), finite()), 1..12)) {
        let nodes: Vec<C64> = rows.iter().enumerate().map(|(i, r)| C64::new(r.0, i as f64)).collect();
        let values: Vec<C64> = rows.iter().map(|r| C64::new(r.2, r.3)).collect();
        let s = SampleSet::new(nodes, values).unwrap();
        let back = parse_samples(&s.to_csv()).unwrap();
        for (a, b) in s.nodes().iter().chain(s.values()).zip(back.nodes().iter().chain(back.values())) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn arnoldi_is_orthonormal_and_spans_monomials((s, w) in instance(8..20), deg in 0usize..5) {
        let q = build_arnoldi(s.nodes(), deg, w.as_slice()).unwrap();
        let e = q.entries();
        for i in 0..=deg {
            for j in 0..=deg {
                let ip: C64 = (0..s.len()).map(|r| e[(r, i)].conj() * e[(r, j)] * w.as_slice()[r]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - target).norm() < 1e-10, "gram ({i},{j}) = {ip}");
            }
        }
        let rebuilt = build_monomial(s.nodes(), deg).entries() * q.to_monomial();
        prop_assert!((&rebuilt - e).norm() < 1e-8 * e.norm());
    }

    #[test]
    fn reduced_and_dense_evaluations_agree((s, w) in instance(10..18), n1 in 0usize..4, n2 in 0usize..4) {
        let (psi, phi) = arnoldi_pair(&s, &w, n1, n2);
        let red = eval_dual(&s, &psi, &phi, &w).unwrap();
        let dense = eval_dual_dense(&s, &psi, &phi, &w).unwrap();
        prop_assert!((red.d2 - dense.d2).abs() <= 1e-8 * red.d2.max(1.0), "{} vs {}", red.d2, dense.d2);
    }

    #[test]
    fn d2_is_nonnegative_and_below_weak_duality_bound((s, w) in instance(8..18), n1 in 0usize..4, n2 in 0usize..4) {
        let (psi, phi) = arnoldi_pair(&s, &w, n1, n2);
        let sol = eval_dual(&s, &psi, &phi, &w).unwrap();
        prop_assert!(sol.d2 >= 0.0);
        prop_assert!(sol.d2.sqrt() <= sol.max_residual() * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn d2_scales_quadratically_with_values((s, w) in instance(8..14), n2 in 1usize..3, c in 0.1..10.0_f64) {
        let (psi, phi) = arnoldi_pair(&s, &w, 1, n2);
        let scaled = SampleSet::new(s.nodes().to_vec(), s.values().iter().map(|f| f * c).collect()).unwrap();
        let base = eval_dual(&s, &psi, &phi, &w).unwrap().d2;
        let big = eval_dual(&scaled, &psi, &phi, &w).unwrap().d2;
        prop_assert!((big - c * c * base).abs() <= 1e-8 * big.max(1e-12));
    }

    #[test]
    fn d2_ignores_unimodular_rotation_of_values((s, w) in instance(8..14), n1 in 0usize..3, n2 in 0usize..3, theta in 0.0..std::f64::consts::TAU) {
        let (psi, phi) = arnoldi_pair(&s, &w, n1, n2);
        let turn = C64::from_polar(1.0, theta);
        let rotated = SampleSet::new(s.nodes().to_vec(), s.values().iter().map(|f| f * turn).collect()).unwrap();
        let base = eval_dual(&s, &psi, &phi, &w).unwrap().d2;
        let spun = eval_dual(&rotated, &psi, &phi, &w).unwrap().d2;
        prop_assert!((spun - base).abs() <= 1e-10 * base.max(1e-12), "{base} vs {spun}");
    }

    #[test]
    fn update_stays_in_simplex_and_shrinks_support(
        (w, r) in (2usize..30).prop_flat_map(|m| (
            prop::collection::vec(prop_oneof![Just(0.0), 0.01..1.0_f64], m),
            prop::collection::vec(prop_oneof![Just(0.0), 1e-12..1e3_f64], m),
        )),
        beta in 0.01..2.0_f64,
    ) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let w = WeightVector::new(w).unwrap();
        prop_assume!(w.as_slice().iter().zip(&r).any(|(&wj, &rj)| wj > 0.0 && rj > 0.0));
        let next = update_weights(&w, &r, beta).unwrap();
        let sum: f64 = next.as_slice().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        for (j, (&old, &new)) in w.as_slice().iter().zip(next.as_slice()).enumerate() {
            prop_assert!(new >= 0.0);
            if old == 0.0 || r[j] == 0.0 {
                prop_assert_eq!(new, 0.0);
            }
        }
    }

    #[test]
    fn equal_residuals_are_a_fixed_point(w in (2usize..20).prop_flat_map(simplex), level in 1e-6..1e6_f64, beta in 0.01..2.0_f64) {
        let r = vec![level; w.len()];
        let next = update_weights(&w, &r, beta).unwrap();
        for (a, b) in w.as_slice().iter().zip(next.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }
}
