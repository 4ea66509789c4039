use geneprio::discretize::ColumnarMatrix;
use geneprio::mi::{self, batch_relevance, entropy, mutual_information, Variable};
use geneprio_testkit::oracle::{direct_entropy, direct_mi};
use geneprio_testkit::synth;
use proptest::prelude::*;
use rand::Rng;

fn vars(m: &ColumnarMatrix) -> Vec<Variable> {
    (0..m.n_features())
        .map(Variable::Feature)
        .chain(std::iter::once(Variable::Label))
        .collect()
}

fn codes(m: &ColumnarMatrix, v: Variable) -> &[u8] {
    match v {
        Variable::Feature(j) => m.column(j),
        Variable::Label => m.labels(),
    }
}

#[test]
fn histogram_matches_direct_computation() {
    let mut rng = synth::rng(11);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=64);
        let f = rng.gen_range(1..=16);
        let m = synth::random_matrix(&mut rng, n, f, 4);
        let vs = vars(&m);
        for &x in &vs {
            for &y in &vs {
                let fast: f64 = mutual_information(&m, x, y);
                let slow = direct_mi(codes(&m, x), codes(&m, y));
                assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
            }
        }
    }
}

#[test]
fn batch_relevance_equals_scalar_calls() {
    let mut rng = synth::rng(3);
    let m = synth::random_matrix(&mut rng, 30, 10, 2);
    let batch: Vec<f64> = batch_relevance(&m);
    for (j, &b) in batch.iter().enumerate() {
        let s: f64 = mutual_information(&m, Variable::Feature(j), Variable::Label);
        assert_eq!(b.to_bits(), s.to_bits());
    }
    let batch32: Vec<f32> = batch_relevance(&m);
    for (a, b) in batch.iter().zip(&batch32) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}

#[test]
fn all_constant_features_have_zero_relevance() {
    let m = ColumnarMatrix::from_columns(vec![vec![0; 6]; 4], vec![1, 0, 1, 0, 0, 0]).unwrap();
    assert!(batch_relevance::<f64>(&m).iter().all(|&r| r == 0.0));
}

#[test]
fn entropy_matches_direct() {
    let mut rng = synth::rng(5);
    let m = synth::random_matrix(&mut rng, 50, 8, 4);
    for v in vars(&m) {
        let h: f64 = entropy(&m, v);
        assert!((h - direct_entropy(codes(&m, v))).abs() < 1e-12);
    }
}

fn small_matrix() -> impl Strategy<Value = ColumnarMatrix> {
    (2usize..=64, 1usize..=16, 1u8..=4, any::<u64>()).prop_map(|(n, f, card, seed)| {
        let mut rng = synth::rng(seed);
        synth::random_matrix(&mut rng, n, f, card)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetric_and_bounded(m in small_matrix()) {
        let vs = vars(&m);
        for &x in &vs {
            for &y in &vs {
                let xy: f64 = mutual_information(&m, x, y);
                let yx: f64 = mutual_information(&m, y, x);
                prop_assert!((xy - yx).abs() < 1e-12);
                let hx: f64 = entropy(&m, x);
                let hy: f64 = entropy(&m, y);
                prop_assert!(xy >= 0.0);
                prop_assert!(xy <= hx.min(hy) + 1e-12);
            }
        }
    }

    #[test]
    fn gene_permutation_invariant(m in small_matrix(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..m.n_genes()).collect();
        order.shuffle(&mut synth::rng(seed));
        let cols = (0..m.n_features())
            .map(|j| order.iter().map(|&g| m.column(j)[g]).collect())
            .collect();
        let labels = order.iter().map(|&g| m.labels()[g]).collect();
        let p = ColumnarMatrix::from_columns(cols, labels).unwrap();
        for &x in &vars(&m) {
            for &y in &vars(&m) {
                let a: f64 = mutual_information(&m, x, y);
                let b: f64 = mutual_information(&p, x, y);
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contingency_marginals(m in small_matrix()) {
        let t = mi::contingency(&m, Variable::Feature(0), Variable::Label);
        prop_assert_eq!(t.total() as usize, m.n_genes());
        prop_assert_eq!(t.row_sums().iter().sum::<u32>(), t.total());
        prop_assert_eq!(t.col_sums().iter().sum::<u32>(), t.total());
        prop_assert_eq!(t.col_sums()[1] as usize, m.n_positives());
    }
}
