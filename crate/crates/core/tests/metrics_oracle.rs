use geneprio::metrics::{auc_pr, auc_roc, f1, g_mean};
use geneprio::stats::paired_t_test;
use geneprio_testkit::oracle::{concordant_auc, quadrature_paired_t, sweep_average_precision};
use geneprio_testkit::synth;
use proptest::prelude::*;
use rand::Rng;

fn random_case<R: Rng>(rng: &mut R, n: usize, levels: u32) -> (Vec<f64>, Vec<bool>) {
    let scores = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
    let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    labels[0] = true;
    labels[n - 1] = false;
    (scores, labels)
}

#[test]
fn auc_roc_equals_pair_counting() {
    let mut rng = synth::rng(1);
    for n in 2..=200 {
        // coarse levels force plenty of ties
        let (s, l) = random_case(&mut rng, n, if n % 2 == 0 { 5 } else { 1000 });
        assert_eq!(auc_roc(&s, &l).unwrap(), concordant_auc(&s, &l), "n = {n}");
    }
}

#[test]
fn auc_pr_equals_threshold_sweep() {
    let mut rng = synth::rng(2);
    for n in 2..=200 {
        let (s, l) = random_case(&mut rng, n, if n % 3 == 0 { 4 } else { 10_000 });
        let ap = auc_pr(&s, &l).unwrap();
        assert!((ap - sweep_average_precision(&s, &l)).abs() < 1e-9, "n = {n}");
        assert!((0.0..=1.0).contains(&ap));
    }
}

#[test]
fn t_test_matches_quadrature() {
    let mut rng = synth::rng(3);
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4..0.9)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4..0.9)).collect();
        let r = paired_t_test(&a, &b).unwrap();
        let (t, p) = quadrature_paired_t(&a, &b);
        assert!((r.t - t).abs() < 1e-9 * t.abs().max(1.0));
        assert!((r.p - p).abs() < 1e-6, "n={n} p={} oracle={p}", r.p);
    }
}

proptest! {
    #[test]
    fn rank_metrics_invariant_under_monotone_maps(
        raw in prop::collection::vec(0u32..50, 4..60),
        flips in prop::collection::vec(any::<bool>(), 60),
    ) {
        let n = raw.len();
        let scores: Vec<f64> = raw.iter().map(|&v| v as f64 / 50.0).collect();
        let mut labels: Vec<bool> = flips[..n].to_vec();
        labels[0] = true;
        labels[n - 1] = false;
        let warped: Vec<f64> = scores.iter().map(|&s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(auc_roc(&scores, &labels).unwrap(), auc_roc(&warped, &labels).unwrap());
        prop_assert!((auc_pr(&scores, &labels).unwrap() - auc_pr(&warped, &labels).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn threshold_metrics_depend_on_sign_pattern(
        raw in prop::collection::vec(0.0f64..1.0, 4..60),
        flips in prop::collection::vec(any::<bool>(), 60),
    ) {
        let n = raw.len();
        let mut labels: Vec<bool> = flips[..n].to_vec();
        labels[0] = true;
        labels[n - 1] = false;
        // push every score further from the threshold without crossing it
        let stretched: Vec<f64> = raw
            .iter()
            .map(|&s| if s >= 0.5 { 0.5 + (s - 0.5) / 2.0 + 0.4 } else { s / 3.0 })
            .collect();
        prop_assert_eq!(f1(&raw, &labels, 0.5).unwrap(), f1(&stretched, &labels, 0.5).unwrap());
        prop_assert_eq!(g_mean(&raw, &labels, 0.5).unwrap(), g_mean(&stretched, &labels, 0.5).unwrap());
    }
}
