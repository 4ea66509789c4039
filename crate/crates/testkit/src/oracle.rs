use geneprio::discretize::ColumnarMatrix;
use geneprio::mi::{mutual_information, Variable};

/// I(X;Y) in bits by direct probability estimates: every p(a,b), p(a) and
/// p(b) is counted with its own pass over the data.
pub fn direct_mi(x: &[u8], y: &[u8]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mut xs: Vec<u8> = x.to_vec();
    xs.sort_unstable();
    xs.dedup();
    let mut ys: Vec<u8> = y.to_vec();
    ys.sort_unstable();
    ys.dedup();
    let mut total = 0.0;
    for &a in &xs {
        let pa = x.iter().filter(|&&v| v == a).count() as f64 / n;
        for &b in &ys {
            let pb = y.iter().filter(|&&v| v == b).count() as f64 / n;
            let pab = x
                .iter()
                .zip(y)
                .filter(|&(&u, &v)| u == a && v == b)
                .count() as f64
                / n;
            if pab > 0.0 {
                total += pab * (pab / (pa * pb)).ln();
            }
        }
    }
    total / std::f64::consts::LN_2
}

pub fn direct_entropy(x: &[u8]) -> f64 {
    let n = x.len() as f64;
    let mut vals = x.to_vec();
    vals.sort_unstable();
    vals.dedup();
    -vals
        .iter()
        .map(|&a| {
            let p = x.iter().filter(|&&v| v == a).count() as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Textbook mRMR (difference form): every round recomputes
/// Σ_{s∈S} I(f; s) from scratch, summing in pick order. Ties go to the
/// lowest index.
pub fn naive_mrmr(m: &ColumnarMatrix, k: usize) -> Vec<usize> {
    let f = m.n_features();
    let rel: Vec<f64> = (0..f)
        .map(|j| mutual_information(m, Variable::Feature(j), Variable::Label))
        .collect();
    let mut selected: Vec<usize> = Vec::new();
    for _ in 0..k.min(f) {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..f {
            if selected.contains(&j) {
                continue;
            }
            let crit = if selected.is_empty() {
                rel[j]
            } else {
                let mut sum = 0.0f64;
                for &s in &selected {
                    sum += mutual_information::<f64>(m, Variable::Feature(j), Variable::Feature(s));
                }
                rel[j] - sum / selected.len() as f64
            };
            if best.is_none_or(|(_, b)| crit > b) {
                best = Some((j, crit));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}

/// Σ_{s∈selected} I(f; s) computed directly.
pub fn redundancy_sum(m: &ColumnarMatrix, f: usize, selected: &[usize]) -> f64 {
    selected
        .iter()
        .map(|&s| direct_mi(m.column(f), m.column(s)))
        .sum()
}

/// (#concordant + ½ #tied) / (P·N) over every positive/negative pair.
pub fn concordant_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Average precision by sweeping every distinct score as a threshold and
/// recounting precision and recall from scratch.
pub fn sweep_average_precision(scores: &[f64], labels: &[bool]) -> f64 {
    let p_total = labels.iter().filter(|&&l| l).count() as f64;
    let mut thresholds = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in thresholds {
        let predicted: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= t).collect();
        let tp = predicted.iter().filter(|&&i| labels[i]).count() as f64;
        let precision = tp / predicted.len() as f64;
        let recall = tp / p_total;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

/// Γ(ν/2) for a positive integer ν via Γ(1)=1, Γ(½)=√π, Γ(x+1)=xΓ(x).
fn gamma_half_integer(nu: usize) -> f64 {
    let (mut g, mut x) = if nu % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while x < nu as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

fn student_density(x: f64, nu: usize) -> f64 {
    let nu_f = nu as f64;
    let c = gamma_half_integer(nu + 1) / ((nu_f * std::f64::consts::PI).sqrt() * gamma_half_integer(nu));
    c * (1.0 + x * x / nu_f).powf(-(nu_f + 1.0) / 2.0)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (f(a) + 4.0 * fm + f(b)), fm)
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (left, _) = simpson(f, a, m);
        let (right, _) = simpson(f, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, eps / 2.0, left, depth - 1) + rec(f, m, b, eps / 2.0, right, depth - 1)
        }
    }
    let (whole, _) = simpson(f, a, b);
    rec(f, a, b, eps, whole, depth)
}

/// Two-sided paired t-test by numerically integrating the t density.
/// Returns `(t, p)`.
pub fn quadrature_paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    let nu = d.len() - 1;
    // Split the range so each piece is smooth on its own scale.
    let upper = t.abs();
    let mut mass = 0.0;
    let mut lo = 0.0;
    while lo < upper {
        let hi = if lo < 1.0 { (lo + 0.25).min(upper) } else { (lo * 1.5).min(upper) };
        mass += adaptive_simpson(&|x| student_density(x, nu), lo, hi, 1e-13, 40);
        lo = hi;
    }
    (t, (1.0 - 2.0 * mass).max(0.0))
}
