//! Confusion-matrix statistics: accuracy with an exact binomial interval,
//! the no-information rate and a one-sided binomial test against it,
//! Cohen's kappa, and per-class sensitivity and specificity.
//!
//! Matrices are oriented with rows = actual class, columns = predicted class.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// Values below this print as `< 2.2e-16`, the usual reporting floor.
pub const P_VALUE_DISPLAY_FLOOR: f64 = 2.2e-16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = labels.len();
        if c == 0 {
            return Err(Error::Argument("confusion matrix needs at least one label".into()));
        }
        if counts.len() != c || counts.iter().any(|r| r.len() != c) {
            return Err(Error::Argument(format!("counts must be {c}x{c}")));
        }
        let cm = Self { labels, counts };
        if cm.n() == 0 {
            return Err(Error::Argument("confusion matrix is empty".into()));
        }
        Ok(cm)
    }

    /// Builds from class indices into `labels`.
    pub fn from_indices(labels: Vec<String>, actual: &[usize], predicted: &[usize]) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(Error::Argument(format!(
                "{} actual labels vs {} predictions",
                actual.len(),
                predicted.len()
            )));
        }
        let c = labels.len();
        let mut counts = vec![vec![0u64; c]; c];
        for (&a, &p) in actual.iter().zip(predicted) {
            if a >= c || p >= c {
                return Err(Error::Argument(format!("class index {} outside 0..{c}", a.max(p))));
            }
            counts[a][p] += 1;
        }
        Self::from_counts(labels, counts)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|k| self.counts[k][k]).sum()
    }

    pub fn row_total(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn col_total(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }
}

/// Counts label pairs drawn from the declared label set.
pub fn confusion<S: AsRef<str>>(labels: &[String], actual: &[S], predicted: &[S]) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::Argument(format!(
            "{} actual labels vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    let index = |s: &S| {
        labels
            .iter()
            .position(|l| l == s.as_ref())
            .ok_or_else(|| Error::Argument(format!("unknown label {:?}", s.as_ref())))
    };
    let a = actual.iter().map(index).collect::<Result<Vec<_>>>()?;
    let p = predicted.iter().map(index).collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(labels.to_vec(), &a, &p)
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.trace() as f64 / cm.n() as f64
}

/// Largest actual-class proportion.
pub fn nir(cm: &ConfusionMatrix) -> f64 {
    let top = (0..cm.n_classes()).map(|k| cm.row_total(k)).max().unwrap_or(0);
    top as f64 / cm.n() as f64
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn ln_pmf(n: u64, j: u64, p: f64) -> f64 {
    // 0 · ln 0 = 0 at the support edges
    let success = if j == 0 { 0.0 } else { j as f64 * p.ln() };
    let failure = if j == n { 0.0 } else { (n - j) as f64 * (-p).ln_1p() };
    ln_choose(n, j) + success + failure
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `ln P(X >= k)` for `X ~ Binomial(n, p)`.
pub fn ln_upper_tail(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return 0.0;
    }
    log_sum_exp((k..=n).map(|j| ln_pmf(n, j, p)))
}

/// `ln P(X <= k)` for `X ~ Binomial(n, p)`.
pub fn ln_lower_tail(k: u64, n: u64, p: f64) -> f64 {
    if k >= n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::NEG_INFINITY;
    }
    log_sum_exp((0..=k).map(|j| ln_pmf(n, j, p)))
}

/// Bisection stops once the bracket is this narrow.
pub const CI_TOLERANCE: f64 = 1e-10;

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
pub fn clopper_pearson(k: u64, n: u64, conf: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(Error::Argument(format!("need 0 <= k <= n and n >= 1, got k={k}, n={n}")));
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(Error::Argument(format!("confidence {conf} outside (0, 1)")));
    }
    let ln_half_alpha = ((1.0 - conf) / 2.0).ln();
    // P(X >= k | p) increases with p
    let low = if k == 0 {
        0.0
    } else {
        bisect(|p| ln_upper_tail(k, n, p) >= ln_half_alpha, false)
    };
    // P(X <= k | p) decreases with p
    let high = if k == n {
        1.0
    } else {
        bisect(|p| ln_lower_tail(k, n, p) >= ln_half_alpha, true)
    };
    Ok((low, high))
}

/// Boundary of a predicate that is monotone on `[0, 1]`. With
/// `holds_below = false` the predicate is false then true and the smallest
/// `p` where it holds is located; otherwise the largest.
fn bisect(pred: impl Fn(f64) -> bool, holds_below: bool) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > CI_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if pred(mid) != holds_below {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialTest {
    /// `P(X >= k | n, p0)`, or `f64::MIN_POSITIVE` as an upper bound when the
    /// true value is below the normal range.
    pub p_value: f64,
    pub underflow: bool,
    /// Natural log of the tail probability, always finite unless it is exactly 0.
    pub ln_p_value: f64,
}

/// One-sided exact binomial test `P(X >= k)` under success probability `p0`.
pub fn binom_p_value(k: u64, n: u64, p0: f64) -> Result<BinomialTest> {
    if k > n {
        return Err(Error::Argument(format!("k={k} exceeds n={n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::Argument(format!("p0 {p0} outside (0, 1)")));
    }
    let ln_p = ln_upper_tail(k, n, p0);
    let p = ln_p.exp().min(1.0);
    if k == 0 {
        return Ok(BinomialTest {
            p_value: 1.0,
            underflow: false,
            ln_p_value: 0.0,
        });
    }
    if p < f64::MIN_POSITIVE {
        return Ok(BinomialTest {
            p_value: f64::MIN_POSITIVE,
            underflow: true,
            ln_p_value: ln_p,
        });
    }
    Ok(BinomialTest {
        p_value: p,
        underflow: false,
        ln_p_value: ln_p,
    })
}

/// `(p_o - p_e) / (1 - p_e)` with `p_e = Σ row_k col_k / n²`.
pub fn cohen_kappa(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.n();
    let chance: u128 = (0..cm.n_classes())
        .map(|k| u128::from(cm.row_total(k)) * u128::from(cm.col_total(k)))
        .sum();
    let n2 = u128::from(n) * u128::from(n);
    if chance == n2 {
        return if cm.trace() == n {
            Ok(1.0)
        } else {
            Err(Error::Degenerate("chance agreement is 1 but observed agreement is not".into()))
        };
    }
    let p_o = accuracy(cm);
    let p_e = chance as f64 / n2 as f64;
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: String,
    /// Absent when the class never occurs.
    pub sensitivity: Option<f64>,
    /// Absent when every sample belongs to the class.
    pub specificity: Option<f64>,
}

pub fn per_class_stats(cm: &ConfusionMatrix) -> Vec<ClassStats> {
    let n = cm.n();
    let c = cm.n_classes();
    (0..c)
        .map(|k| {
            let row = cm.row_total(k);
            let sensitivity = (row > 0).then(|| cm.counts[k][k] as f64 / row as f64);
            let true_negatives: u64 = (0..c)
                .filter(|&i| i != k)
                .map(|i| (0..c).filter(|&j| j != k).map(|j| cm.counts[i][j]).sum::<u64>())
                .sum();
            let negatives = n - row;
            let specificity = (negatives > 0).then(|| true_negatives as f64 / negatives as f64);
            ClassStats {
                label: cm.labels[k].clone(),
                sensitivity,
                specificity,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub nir: f64,
    pub p_value: f64,
    pub p_underflow: bool,
    pub kappa: f64,
    pub per_class: Vec<ClassStats>,
    pub n: u64,
    pub labels: Vec<String>,
}

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

pub fn evaluate(cm: &ConfusionMatrix) -> Result<EvalReport> {
    evaluate_with_confidence(cm, DEFAULT_CONFIDENCE)
}

pub fn evaluate_with_confidence(cm: &ConfusionMatrix, confidence: f64) -> Result<EvalReport> {
    let n = cm.n();
    let k = cm.trace();
    let (ci_low, ci_high) = clopper_pearson(k, n, confidence)?;
    let nir = nir(cm);
    // one-sided test of accuracy > NIR; a NIR of 1 leaves nothing to beat
    let test = if nir < 1.0 {
        binom_p_value(k, n, nir)?
    } else {
        BinomialTest {
            p_value: 1.0,
            underflow: false,
            ln_p_value: 0.0,
        }
    };
    Ok(EvalReport {
        accuracy: accuracy(cm),
        ci_low,
        ci_high,
        confidence,
        nir,
        p_value: test.p_value,
        p_underflow: test.underflow,
        kappa: cohen_kappa(cm)?,
        per_class: per_class_stats(cm),
        n,
        labels: cm.labels.clone(),
    })
}

/// `< 2.2e-16` below the display floor, otherwise three significant digits.
pub fn format_p_value(p: f64) -> String {
    if p < P_VALUE_DISPLAY_FLOOR {
        "< 2.2e-16".to_string()
    } else {
        format!("{p:.3e}")
    }
}

/// Plain-text summary of a report.
pub fn render_table(report: &EvalReport) -> String {
    let pct = |v: f64| format!("{:.2}%", 100.0 * v);
    let mut out = String::new();
    out.push_str(&format!("{:<24}{}\n", "Observations", report.n));
    out.push_str(&format!("{:<24}{:.3}\n", "Accuracy", report.accuracy));
    out.push_str(&format!(
        "{:<24}({}, {})\n",
        format!("{:.0}% CI", 100.0 * report.confidence),
        pct(report.ci_low),
        pct(report.ci_high)
    ));
    out.push_str(&format!("{:<24}{:.4}\n", "No Information Rate", report.nir));
    out.push_str(&format!("{:<24}{}\n", "P-Value [Acc > NIR]", format_p_value(report.p_value)));
    out.push_str(&format!("{:<24}{:.3}\n", "Kappa", report.kappa));
    out.push('\n');
    out.push_str(&format!("{:<28}{:>12}{:>12}\n", "Class", "Sensitivity", "Specificity"));
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), pct);
    for c in &report.per_class {
        out.push_str(&format!(
            "{:<28}{:>12}{:>12}\n",
            c.label,
            opt(c.sensitivity),
            opt(c.specificity)
        ));
    }
    out
}
