//! Statistical procedures: descriptives, normality, paired omnibus and
//! post-hoc tests, multiple-comparison corrections, correlation, and the
//! cluster-based permutation test over frequency bins.
//!
//! Conventions used throughout: two-sided p values, mid-ranks for ties,
//! and sample (n−1) variances. Randomised procedures take an explicit
//! seed and draw from a ChaCha8 generator so results are reproducible
//! across platforms and parallel schedules.

pub mod cluster;
pub mod dist;
mod shapiro;

pub use cluster::{cluster_permutation_freq, Cluster, ClusterResult};
pub use shapiro::shapiro_wilk;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("sample size {n} outside [{min}, {max}]")]
    OutOfRangeN { n: usize, min: usize, max: usize },
    #[error("zero variance in input")]
    ZeroVariance,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("degenerate matrix shape: {0}")]
    DegenerateShape(String),
    #[error("constant input")]
    ConstantInput,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {need} subjects, got {got}")]
    InsufficientSubjects { got: usize, need: usize },
    #[error("p value {0} outside [0, 1]")]
    PValueOutOfRange(f64),
}

/// Outcome of a single statistical test.
#[derive(Debug, Clone, PartialEq)]
pub struct StatResult {
    pub test: String,
    pub statistic: f64,
    /// Degrees of freedom, in test-specific order; empty when undefined.
    pub df: Vec<f64>,
    /// Raw (uncorrected) p value.
    pub p: f64,
    /// Correction-adjusted p value, when a correction applies.
    pub adjusted_p: Option<f64>,
    pub correction: Option<String>,
    pub n: usize,
}

/// One pairwise comparison between condition columns `a` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseResult {
    pub a: usize,
    pub b: usize,
    pub result: StatResult,
}

/// Deterministic generator for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for sub-task `stream` of `seed`; streams are independent, so
/// per-iteration work can run in parallel and still reproduce the serial
/// result exactly.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One standard normal draw (Box–Muller, cosine branch).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Median and 25th/75th percentiles with linear-interpolation (type-7)
/// quantiles.
pub fn median_iqr(values: &[f64]) -> Result<(f64, f64, f64), StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut x: Vec<f64> = values.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    Ok((quantile_sorted(&x, 0.5), quantile_sorted(&x, 0.25), quantile_sorted(&x, 0.75)))
}

/// Type-7 quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n−1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Two-sided one-sample t test of `values` against `mu0`.
pub fn t_test_one_sample(values: &[f64], mu0: f64) -> Result<StatResult, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::OutOfRangeN { n, min: 2, max: usize::MAX });
    }
    let sd = sample_sd(values);
    if sd == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let nf = n as f64;
    let t = (mean(values) - mu0) / (sd / nf.sqrt());
    Ok(StatResult {
        test: "one-sample-t".into(),
        statistic: t,
        df: vec![nf - 1.0],
        p: dist::t_two_sided_p(t, nf - 1.0),
        adjusted_p: None,
        correction: None,
        n,
    })
}

/// Mid-ranks of `values` (1-based; ties share the average rank).
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

const WILCOXON_EXACT_MAX_N: usize = 25;

/// Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped (their count lands in `df[0]`); ties get
/// mid-ranks. For n ≤ 25 the two-sided p is exact over all 2ⁿ sign
/// assignments; above that a normal approximation with continuity and
/// tie correction is used. The statistic is W = min(W⁺, W⁻).
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<StatResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::ShapeMismatch(format!(
            "paired inputs of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n_zero = x.len() - diffs.len();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let n = diffs.len();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(ranks.iter())
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    let p = if n <= WILCOXON_EXACT_MAX_N {
        exact_signed_rank_p(&ranks, w)
    } else {
        let nf = n as f64;
        let mean_w = nf * (nf + 1.0) / 4.0;
        // Tie correction on the variance.
        let mut tie_term = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = (w - mean_w + 0.5) / var.sqrt();
        (2.0 * dist::normal_cdf(z)).min(1.0)
    };

    Ok(StatResult {
        test: "wilcoxon-signed-rank".into(),
        statistic: w,
        df: vec![n_zero as f64],
        p,
        adjusted_p: None,
        correction: None,
        n,
    })
}

/// Exact two-sided p for the signed-rank statistic: P(W⁺ ≤ w) summed with
/// the mirrored upper tail. Computed by dynamic programming over doubled
/// ranks (mid-ranks are multiples of ½), which is equivalent to full 2ⁿ
/// enumeration.
fn exact_signed_rank_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in &doubled {
        let r = r as usize;
        reach += r;
        for s in (0..=reach).rev() {
            if s >= r && counts[s - r] > 0.0 {
                counts[s] += counts[s - r];
            }
        }
    }
    let threshold = (w * 2.0).round() as usize;
    let below: f64 = counts[..=threshold.min(counts.len() - 1)].iter().sum();
    let n_patterns = 2f64.powi(ranks.len() as i32);
    // The null distribution of W⁺ is symmetric, so double the lower tail.
    (2.0 * below / n_patterns).min(1.0)
}

/// Friedman rank test over a subjects × conditions matrix, with tie
/// correction. All-tied input yields χ² = 0, p = 1.
pub fn friedman(matrix: &[Vec<f64>]) -> Result<StatResult, StatsError> {
    let (n, k) = check_matrix(matrix, 2, 2)?;
    let nf = n as f64;
    let kf = k as f64;
    let mut rank_sums = vec![0.0; k];
    let mut sum_sq_ranks = 0.0;
    for row in matrix {
        let ranks = mid_ranks(row);
        for (j, r) in ranks.iter().enumerate() {
            rank_sums[j] += r;
            sum_sq_ranks += r * r;
        }
    }
    let expected = nf * (kf + 1.0) / 2.0;
    let spread: f64 = rank_sums.iter().map(|r| (r - expected) * (r - expected)).sum();
    let denom = sum_sq_ranks - nf * kf * (kf + 1.0) * (kf + 1.0) / 4.0;
    let chi2 = if denom <= 0.0 {
        0.0
    } else {
        (kf - 1.0) * spread / denom
    };
    Ok(StatResult {
        test: "friedman".into(),
        statistic: chi2,
        df: vec![kf - 1.0],
        p: 1.0 - dist::chi2_cdf(chi2, kf - 1.0),
        adjusted_p: None,
        correction: None,
        n,
    })
}

/// One-way repeated-measures ANOVA with subject blocking.
///
/// F = MS_condition / MS_error with df (k−1, (k−1)(n−1)).
pub fn rm_anova_one_way(matrix: &[Vec<f64>]) -> Result<StatResult, StatsError> {
    let (n, k) = check_matrix(matrix, 2, 2)?;
    let (ss_cond, ss_err, df1, df2) = rm_anova_ss(matrix, n, k);
    let ms_cond = ss_cond / df1;
    let ms_err = ss_err / df2;
    let (f, p) = if ms_err <= 0.0 {
        if ms_cond <= 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_cond / ms_err;
        (f, 1.0 - dist::f_cdf(f, df1, df2))
    };
    Ok(StatResult {
        test: "rm-anova".into(),
        statistic: f,
        df: vec![df1, df2],
        p,
        adjusted_p: None,
        correction: None,
        n,
    })
}

fn rm_anova_ss(matrix: &[Vec<f64>], n: usize, k: usize) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let kf = k as f64;
    let grand = matrix.iter().flatten().sum::<f64>() / (nf * kf);
    let mut ss_total = 0.0;
    let mut ss_subj = 0.0;
    let mut col_means = vec![0.0; k];
    for row in matrix {
        let row_mean = row.iter().sum::<f64>() / kf;
        ss_subj += kf * (row_mean - grand) * (row_mean - grand);
        for (j, v) in row.iter().enumerate() {
            ss_total += (v - grand) * (v - grand);
            col_means[j] += v / nf;
        }
    }
    let ss_cond: f64 = col_means
        .iter()
        .map(|m| nf * (m - grand) * (m - grand))
        .sum();
    let ss_err = (ss_total - ss_subj - ss_cond).max(0.0);
    (ss_cond, ss_err, kf - 1.0, (kf - 1.0) * (nf - 1.0))
}

/// Tukey HSD over all condition pairs of a repeated-measures fit.
///
/// q uses the ANOVA's MS_error; p comes from the studentized range
/// distribution and is already familywise-adjusted.
pub fn tukey_hsd(matrix: &[Vec<f64>]) -> Result<Vec<PairwiseResult>, StatsError> {
    let (n, k) = check_matrix(matrix, 2, 2)?;
    let nf = n as f64;
    let (_, ss_err, _, df2) = rm_anova_ss(matrix, n, k);
    let ms_err = ss_err / df2;
    let se = (ms_err / nf).sqrt();
    let col_means: Vec<f64> = (0..k)
        .map(|j| matrix.iter().map(|row| row[j]).sum::<f64>() / nf)
        .collect();
    let mut out = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            let diff = (col_means[a] - col_means[b]).abs();
            let (q, p) = if se == 0.0 {
                if diff == 0.0 {
                    (0.0, 1.0)
                } else {
                    (f64::INFINITY, 0.0)
                }
            } else {
                let q = diff / se;
                (q, dist::studentized_range_sf(q, k, df2))
            };
            out.push(PairwiseResult {
                a,
                b,
                result: StatResult {
                    test: "tukey-hsd".into(),
                    statistic: q,
                    df: vec![k as f64, df2],
                    p,
                    adjusted_p: Some(p),
                    correction: Some("tukey-hsd".into()),
                    n,
                },
            });
        }
    }
    Ok(out)
}

fn check_matrix(
    matrix: &[Vec<f64>],
    min_subjects: usize,
    min_conditions: usize,
) -> Result<(usize, usize), StatsError> {
    let n = matrix.len();
    if n == 0 {
        return Err(StatsError::EmptyInput);
    }
    let k = matrix[0].len();
    if matrix.iter().any(|row| row.len() != k) {
        return Err(StatsError::ShapeMismatch("ragged matrix rows".into()));
    }
    if n < min_subjects || k < min_conditions {
        return Err(StatsError::DegenerateShape(format!(
            "{n} subjects × {k} conditions"
        )));
    }
    Ok((n, k))
}

/// Holm step-down adjustment. Monotone, capped at 1.
pub fn holm_adjust(pvalues: &[f64]) -> Result<Vec<f64>, StatsError> {
    validate_ps(pvalues)?;
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].partial_cmp(&pvalues[b]).unwrap());
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = (m - rank) as f64 * pvalues[idx];
        running = running.max(scaled).min(1.0);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}

/// Benjamini–Hochberg step-up adjustment. Monotone from the largest rank
/// down, capped at 1.
pub fn bh_fdr_adjust(pvalues: &[f64]) -> Result<Vec<f64>, StatsError> {
    validate_ps(pvalues)?;
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].partial_cmp(&pvalues[b]).unwrap());
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let scaled = pvalues[idx] * m as f64 / (rank + 1) as f64;
        running = running.min(scaled).min(1.0);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}

fn validate_ps(pvalues: &[f64]) -> Result<(), StatsError> {
    for &p in pvalues {
        if !(0.0..=1.0).contains(&p) {
            return Err(StatsError::PValueOutOfRange(p));
        }
    }
    Ok(())
}

/// Pearson correlation with a two-sided t-based p value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<StatResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::ShapeMismatch(format!(
            "paired inputs of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::OutOfRangeN { n, min: 3, max: usize::MAX });
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        dist::t_two_sided_p(t, df)
    };
    Ok(StatResult {
        test: "pearson".into(),
        statistic: r,
        df: vec![df],
        p,
        adjusted_p: None,
        correction: None,
        n,
    })
}

/// Full normality-gated comparison of a subjects × conditions matrix:
/// Shapiro–Wilk per condition, then either RM-ANOVA with Tukey HSD (all
/// conditions normal at `alpha`) or Friedman with pairwise Wilcoxon and
/// Holm correction.
#[derive(Debug, Clone)]
pub struct ConditionTestReport {
    /// Per-condition normality results, in column order. A constant
    /// column is recorded with statistic 0 and p 0 and routes the
    /// analysis to the nonparametric branch.
    pub normality: Vec<StatResult>,
    pub parametric: bool,
    pub omnibus: StatResult,
    pub pairwise: Vec<PairwiseResult>,
}

pub fn gated_condition_tests(
    matrix: &[Vec<f64>],
    alpha: f64,
) -> Result<ConditionTestReport, StatsError> {
    let (n, k) = check_matrix(matrix, 2, 2)?;
    if n < 3 {
        return Err(StatsError::InsufficientSubjects { got: n, need: 3 });
    }
    let mut normality = Vec::with_capacity(k);
    let mut parametric = true;
    for j in 0..k {
        let col: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
        match shapiro_wilk(&col) {
            Ok(r) => {
                if r.p < alpha {
                    parametric = false;
                }
                normality.push(r);
            }
            Err(StatsError::ConstantInput) => {
                parametric = false;
                normality.push(StatResult {
                    test: "shapiro-wilk".into(),
                    statistic: 0.0,
                    df: vec![],
                    p: 0.0,
                    adjusted_p: None,
                    correction: None,
                    n,
                });
            }
            Err(e) => return Err(e),
        }
    }

    if parametric {
        let omnibus = rm_anova_one_way(matrix)?;
        let pairwise = tukey_hsd(matrix)?;
        Ok(ConditionTestReport {
            normality,
            parametric,
            omnibus,
            pairwise,
        })
    } else {
        let omnibus = friedman(matrix)?;
        let mut pairwise = Vec::new();
        for a in 0..k {
            for b in (a + 1)..k {
                let xa: Vec<f64> = matrix.iter().map(|row| row[a]).collect();
                let xb: Vec<f64> = matrix.iter().map(|row| row[b]).collect();
                let result = match wilcoxon_signed_rank(&xa, &xb) {
                    Ok(r) => r,
                    // Identical columns carry no evidence of a difference.
                    Err(StatsError::AllZeroDifferences) => StatResult {
                        test: "wilcoxon-signed-rank".into(),
                        statistic: 0.0,
                        df: vec![n as f64],
                        p: 1.0,
                        adjusted_p: None,
                        correction: None,
                        n,
                    },
                    Err(e) => return Err(e),
                };
                pairwise.push(PairwiseResult { a, b, result });
            }
        }
        let ps: Vec<f64> = pairwise.iter().map(|pr| pr.result.p).collect();
        let adjusted = holm_adjust(&ps)?;
        for (pr, adj) in pairwise.iter_mut().zip(adjusted) {
            pr.result.adjusted_p = Some(adj);
            pr.result.correction = Some("holm".into());
        }
        Ok(ConditionTestReport {
            normality,
            parametric,
            omnibus,
            pairwise,
        })
    }
}
