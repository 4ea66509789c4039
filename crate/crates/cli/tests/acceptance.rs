//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use geneprio::evaluate::{bool_labels, FoldPlan};
use geneprio::forest::{predict_proba, train, ForestConfig, ForestModel};
use geneprio::metrics::{auc_pr, auc_roc};
use geneprio::mi::{mutual_information, Variable};
use geneprio::mrmr::MrmrState;
use geneprio::stats::paired_t_test;
use geneprio::*;
use geneprio_cli::commands::{cmd_evaluate, REPORT_FILE};
use geneprio_cli::config::RunConfig;
use geneprio_testkit::oracle;
use geneprio_testkit::synth;
use rand::Rng;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn codes(m: &ColumnarMatrix, v: Variable) -> &[u8] {
    match v {
        Variable::Feature(j) => m.column(j),
        Variable::Label => m.labels(),
    }
}

fn mi_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = synth::rng(1);
    let (mut worst, mut worst_sym, mut pairs) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=64);
        let f = rng.gen_range(1..=16);
        let m = synth::random_matrix(&mut rng, n, f, 4);
        let vars: Vec<Variable> = (0..f)
            .map(Variable::Feature)
            .chain([Variable::Label])
            .collect();
        for &x in &vars {
            for &y in &vars {
                let fast: f64 = mutual_information(&m, x, y);
                let back: f64 = mutual_information(&m, y, x);
                worst = worst.max((fast - oracle::direct_mi(codes(&m, x), codes(&m, y))).abs());
                worst_sym = worst_sym.max((fast - back).abs());
                pairs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-9 && worst_sym < 1e-12 && secs < 10.0,
        format!("1000 matrices, {pairs} pairs, max err {worst:.2e}, max asym {worst_sym:.2e}, {secs:.2}s"),
    )
}

fn mrmr_equivalence() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let mut rng = synth::rng(1000 + seed);
        let n = rng.gen_range(10..=200);
        let f = rng.gen_range(1..=100);
        let k = rng.gen_range(1..=20);
        let m = synth::random_matrix(&mut rng, n, f, 3);
        let fast: Selection = select(&m, &SelectionConfig::Count(k)).map_err(|e| e.to_string())?;
        if fast.selected != oracle::naive_mrmr(&m, k) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches == 0 && secs < 60.0,
        format!("100 instances, {mismatches} mismatching sequences, {secs:.2}s"),
    )
}

fn redundancy_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for seed in 0..20u64 {
        let mut rng = synth::rng(2000 + seed);
        let m = synth::random_matrix(&mut rng, 150, 40, 4);
        let mut state: MrmrState<f64> = MrmrState::new(&m);
        for _ in 0..20 {
            state.step();
            let sel = state.selected().to_vec();
            for f in (0..m.n_features()).filter(|f| !sel.contains(f)) {
                let direct = oracle::redundancy_sum(&m, f, &sel);
                worst = worst.max((state.accumulated_redundancy()[f] - direct).abs());
                checks += 1;
            }
        }
    }
    check(worst < 1e-9, format!("{checks} running sums, max err {worst:.2e}"))
}

fn metric_correctness() -> Outcome {
    let mut rng = synth::rng(3);
    let (mut roc_bad, mut pr_worst) = (0, 0.0f64);
    for n in 2..=200 {
        let levels = if n % 2 == 0 { 5 } else { 100_000 };
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        labels[0] = true;
        labels[n - 1] = false;
        if auc_roc(&scores, &labels).unwrap() != oracle::concordant_auc(&scores, &labels) {
            roc_bad += 1;
        }
        let ap = auc_pr(&scores, &labels).unwrap();
        pr_worst = pr_worst.max((ap - oracle::sweep_average_precision(&scores, &labels)).abs());
    }
    let s = [0.9, 0.8, 0.7, 0.6];
    let l = [true, false, true, false];
    let roc: f64 = auc_roc(&s, &l).unwrap();
    let pr: f64 = auc_pr(&s, &l).unwrap();
    check(
        roc_bad == 0 && pr_worst < 1e-9 && roc == 0.75 && (pr - 5.0 / 6.0).abs() < 1e-9,
        format!(
            "lengths 2..=200: {roc_bad} AUC-ROC mismatches, AUC-PR max err {pr_worst:.2e}; example ROC {roc} PR {pr:.4}"
        ),
    )
}

fn t_test_oracle() -> Outcome {
    let mut rng = synth::rng(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=30);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..0.95)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..0.95)).collect();
        let r: TTest = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
        let (_, p) = oracle::quadrature_paired_t(&a, &b);
        worst = worst.max((r.p - p).abs());
    }
    check(worst < 1e-6, format!("100 paired vectors, max |dp| {worst:.2e}"))
}

/// Select once on every gene, then cross-validate only the forest.
fn leaky_cv(d: &Dataset, k: usize, fcfg: &ForestConfig, plan: &FoldPlan) -> f64 {
    let full = discretize(d, 256).unwrap();
    let sel: Selection = select(&full, &SelectionConfig::Count(k)).unwrap();
    let labels = bool_labels(d);
    let aucs: Vec<f64> = plan
        .outer
        .iter()
        .enumerate()
        .map(|(i, test)| {
            let m_train = discretize(&d.subset_rows(&plan.train_rows(i)).unwrap(), 256).unwrap();
            let m_test = discretize(&d.subset_rows(test).unwrap(), 256).unwrap();
            let model = train(&m_train, &sel.selected, fcfg).unwrap();
            let p: Vec<f64> = predict_proba(&model, &m_test, &sel.selected).unwrap();
            let l: Vec<bool> = test.iter().map(|&g| labels[g]).collect();
            auc_roc(&p, &l).unwrap()
        })
        .collect();
    mean(&aucs)
}

fn leakage_sentinel() -> Outcome {
    let opts = CvOptions::default();
    let fraction = 0.05;
    let (mut honest, mut leaky) = (Vec::new(), Vec::new());
    for s in 0..10u64 {
        let d = synth::null_dataset(s, 300, 500, 0.3);
        let fcfg = ForestConfig {
            n_trees: 100,
            seed: s,
            ..ForestConfig::default()
        };
        let strategy = SelectionStrategy::Fixed(SelectionConfig::Fraction(fraction));
        let r: Report = nested_cv(&d, &strategy, &fcfg, s, &opts).map_err(|e| e.to_string())?;
        honest.push(r.mean.auc_roc);
        let plan = FoldPlan::for_dataset(&d, &opts, s).map_err(|e| e.to_string())?;
        leaky.push(leaky_cv(&d, threshold_to_k(fraction, 500), &fcfg, &plan));
    }
    let (h, l) = (mean(&honest), mean(&leaky));
    check(
        (0.4..=0.6).contains(&h) && l > 0.7,
        format!("10 seeds, fold-local mean AUC {h:.3}, select-then-split mean AUC {l:.3}"),
    )
}

fn synergy_direction() -> Outcome {
    let opts = CvOptions::default();
    let strategy = SelectionStrategy::Fixed(SelectionConfig::Fraction(0.05));
    let (mut a_auc, mut b_auc, mut m_auc) = (Vec::new(), Vec::new(), Vec::new());
    let mut wins = 0;
    for s in 0..10u64 {
        let pair = synth::complementary_pair(s, 300, 3, 40, 5, 4);
        let merged = merge_common(&pair.a, &pair.b).map_err(|e| e.to_string())?;
        let fcfg = ForestConfig {
            n_trees: 100,
            seed: s,
            ..ForestConfig::default()
        };
        let run = |d: &Dataset| -> std::result::Result<f64, String> {
            let r: Report = nested_cv(d, &strategy, &fcfg, s, &opts).map_err(|e| e.to_string())?;
            Ok(r.mean.auc_roc)
        };
        let (a, b, m) = (run(&pair.a)?, run(&pair.b)?, run(&merged)?);
        if m > a && m > b {
            wins += 1;
        }
        a_auc.push(a);
        b_auc.push(b);
        m_auc.push(m);
    }
    let (a, b, m) = (mean(&a_auc), mean(&b_auc), mean(&m_auc));
    check(
        m >= a - 0.01 && m >= b - 0.01 && wins >= 7,
        format!("mean AUC setA {a:.3}, setB {b:.3}, merged {m:.3}; merged strictly best in {wins}/10 seeds"),
    )
}

fn in_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

fn forest_balance_determinism() -> Outcome {
    // 109 positives among 981 genes
    let d = synth::class_shifted(8, 981, 109, 10, 200);
    let m = discretize(&d, 256).map_err(|e| e.to_string())?;
    let labels = bool_labels(&d);
    let subset: Vec<usize> = (0..30).collect();
    let cfg = ForestConfig {
        n_trees: 200,
        seed: 11,
        keep_samples: true,
        ..ForestConfig::default()
    };
    let one: ForestModel = in_threads(1, || train(&m, &subset, &cfg)).map_err(|e| e.to_string())?;
    let four: ForestModel = in_threads(4, || train(&m, &subset, &cfg)).map_err(|e| e.to_string())?;
    let p = d.n_positives();
    let balanced = one.samples().unwrap().iter().all(|s| {
        let pos = s.iter().filter(|&&g| labels[g as usize]).count();
        pos == p && s.len() == 2 * p
    });
    let p1: Vec<f64> = in_threads(1, || predict_proba(&one, &m, &subset)).unwrap();
    let p4: Vec<f64> = in_threads(4, || predict_proba(&four, &m, &subset)).unwrap();
    let identical = one == four && p1.iter().zip(&p4).all(|(a, b)| a.to_bits() == b.to_bits());

    let train_m = discretize(&synth::planted(20, 600, 5, 45, 4), 256).unwrap();
    let test_m = discretize(&synth::planted(21, 1000, 5, 45, 4), 256).unwrap();
    let planted: Vec<usize> = (0..5).collect();
    let model = train(
        &train_m,
        &planted,
        &ForestConfig {
            seed: 4,
            ..ForestConfig::default()
        },
    )
    .unwrap();
    let scores: Vec<f64> = predict_proba(&model, &test_m, &planted).unwrap();
    let test_labels: Vec<bool> = test_m.labels().iter().map(|&l| l == 1).collect();
    let auc = auc_roc(&scores, &test_labels).unwrap();
    check(
        balanced && identical && auc >= 0.95,
        format!(
            "200 trees with {p}+{p} samples: {}; 1 vs 4 threads bitwise equal: {identical}; held-out planted AUC {auc:.4}",
            if balanced { "all balanced" } else { "UNBALANCED" }
        ),
    )
}

fn threshold_arithmetic() -> Outcome {
    let a = threshold_to_k(0.05, 8640);
    let b = threshold_to_k(0.25, 1640);
    check(a == 432 && b == 410, format!("0.05 x 8640 -> {a}, 0.25 x 1640 -> {b}"))
}

fn end_to_end_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = synth::class_shifted(10, 981, 109, 20, 1000);
    let data = tmp.path().join("synthetic.csv");
    d.write(std::fs::File::create(&data).unwrap(), b',', "gene", "label")
        .map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::defaults("evaluate");
    cfg.dataset = Some(data);
    cfg.fractions = vec![0.01, 0.05, 0.1, 0.25];
    cfg.seed = 42;
    cfg.out_dir = tmp.path().join("out");

    let mut reports = Vec::new();
    let mut times = Vec::new();
    for _ in 0..2 {
        let start = Instant::now();
        cmd_evaluate(&cfg).map_err(|e| e.to_string())?;
        times.push(start.elapsed());
        reports.push(std::fs::read(cfg.out_dir.join(REPORT_FILE)).unwrap());
    }
    let slowest = times.iter().max().copied().unwrap_or_default();
    let same = reports[0] == reports[1];
    check(
        same && slowest < Duration::from_secs(300),
        format!(
            "981x1000 nested CV (10x5 folds, 4 fractions, 500 trees): reports identical: {same}; slowest run {:.1}s",
            slowest.as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("MI oracle equivalence", mi_oracle),
        ("fast mRMR equals naive mRMR", mrmr_equivalence),
        ("accumulated redundancy identity", redundancy_identity),
        ("metric correctness", metric_correctness),
        ("paired t-test oracle", t_test_oracle),
        ("leakage sentinel", leakage_sentinel),
        ("synergy direction", synergy_direction),
        ("BRF balance and determinism", forest_balance_determinism),
        ("threshold arithmetic", threshold_arithmetic),
        ("end-to-end determinism and runtime", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
