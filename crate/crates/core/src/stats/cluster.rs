//! Cluster-based permutation test over frequency bins for paired designs.
//!
//! Per-bin paired t statistics form clusters of contiguous bins whose raw
//! p falls below the cluster-forming alpha; cluster mass is the summed
//! |t|. The null distribution of the maximum cluster mass comes from
//! random per-subject sign flips of the paired differences, and cluster p
//! values are Benjamini–Hochberg adjusted across the observed clusters.

use rand::Rng;

use super::dist;
use super::{bh_fdr_adjust, StatsError};

/// One contiguous significant frequency cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// First bin index of the cluster (inclusive).
    pub bin_lo: usize,
    /// Last bin index of the cluster (inclusive).
    pub bin_hi: usize,
    /// Sum of |t| over the cluster's bins.
    pub mass: f64,
    /// Permutation p value; never below 1/(n_permutations + 1).
    pub p: f64,
    /// BH-adjusted p across this comparison's clusters.
    pub adjusted_p: f64,
    /// True when condition `a` has the higher mean inside the cluster.
    pub higher_in_a: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Clusters sorted by bin range; ranges are disjoint.
    pub clusters: Vec<Cluster>,
    pub n_permutations: usize,
    pub seed: u64,
    pub alpha_cluster: f64,
    pub n_subjects: usize,
    pub n_bins: usize,
}

impl ClusterResult {
    /// Smallest adjusted p over all clusters, 1 when there are none.
    pub fn min_adjusted_p(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.adjusted_p)
            .fold(1.0, f64::min)
    }
}

/// Paired cluster permutation test of `a` against `b`, both
/// subjects × bins. `seed` fixes the sign-flip draws; permutation `i`
/// uses random stream `i + 1` of the seed, so iterations are independent
/// of evaluation order.
pub fn cluster_permutation_freq(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    alpha_cluster: f64,
    n_perm: usize,
    seed: u64,
) -> Result<ClusterResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::ShapeMismatch(format!(
            "{} vs {} subjects",
            a.len(),
            b.len()
        )));
    }
    let n_subjects = a.len();
    if n_subjects < 3 {
        return Err(StatsError::InsufficientSubjects {
            got: n_subjects,
            need: 3,
        });
    }
    let n_bins = a[0].len();
    if n_bins == 0 {
        return Err(StatsError::EmptyInput);
    }
    for (ra, rb) in a.iter().zip(b.iter()) {
        if ra.len() != n_bins || rb.len() != n_bins {
            return Err(StatsError::ShapeMismatch("ragged bin rows".into()));
        }
    }
    if !(0.0..1.0).contains(&alpha_cluster) || alpha_cluster <= 0.0 {
        return Err(StatsError::PValueOutOfRange(alpha_cluster));
    }

    // Paired differences, bin-major for the permutation inner loop.
    let mut diffs = vec![vec![0.0f64; n_subjects]; n_bins];
    for (i, (ra, rb)) in a.iter().zip(b.iter()).enumerate() {
        for k in 0..n_bins {
            diffs[k][i] = ra[k] - rb[k];
        }
    }
    // Σd² per bin is invariant under sign flips.
    let sumsq: Vec<f64> = diffs
        .iter()
        .map(|col| col.iter().map(|d| d * d).sum())
        .collect();

    let nf = n_subjects as f64;
    let df = nf - 1.0;
    // |t| threshold equivalent to a two-sided p < alpha at n−1 df.
    let t_crit = dist::t_ppf(1.0 - alpha_cluster / 2.0, df);

    let t_abs_of_sum = |sum: f64, sumsq: f64| -> f64 {
        let mean = sum / nf;
        let var = ((sumsq - nf * mean * mean) / df).max(0.0);
        if var == 0.0 {
            if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (mean / (var / nf).sqrt()).abs()
        }
    };

    // Observed clusters.
    let observed_t: Vec<f64> = (0..n_bins)
        .map(|k| t_abs_of_sum(diffs[k].iter().sum(), sumsq[k]))
        .collect();
    let spans = cluster_spans(&observed_t, t_crit);
    let masses: Vec<f64> = spans
        .iter()
        .map(|&(lo, hi)| observed_t[lo..=hi].iter().sum())
        .collect();

    // Null distribution of the maximum cluster mass under sign flips.
    let mut null_max = Vec::with_capacity(n_perm);
    let mut signs = vec![1.0f64; n_subjects];
    for iter in 0..n_perm {
        let mut rng = super::derived_rng(seed, iter as u64 + 1);
        for s in signs.iter_mut() {
            *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
        let mut max_mass = 0.0f64;
        let mut run_mass = 0.0f64;
        for k in 0..n_bins {
            let sum: f64 = diffs[k]
                .iter()
                .zip(signs.iter())
                .map(|(d, s)| d * s)
                .sum();
            let t = t_abs_of_sum(sum, sumsq[k]);
            if t > t_crit {
                run_mass += t;
            } else {
                max_mass = max_mass.max(run_mass);
                run_mass = 0.0;
            }
        }
        null_max.push(max_mass.max(run_mass));
    }

    let raw_ps: Vec<f64> = masses
        .iter()
        .map(|&m| {
            let exceed = null_max.iter().filter(|&&nm| nm >= m).count();
            (1 + exceed) as f64 / (n_perm + 1) as f64
        })
        .collect();
    let adjusted = if raw_ps.is_empty() {
        vec![]
    } else {
        bh_fdr_adjust(&raw_ps)?
    };

    let clusters = spans
        .iter()
        .zip(masses.iter())
        .zip(raw_ps.iter().zip(adjusted.iter()))
        .map(|((&(lo, hi), &mass), (&p, &adjusted_p))| {
            let mean_diff: f64 = diffs[lo..=hi]
                .iter()
                .map(|col| col.iter().sum::<f64>())
                .sum::<f64>()
                / (nf * (hi - lo + 1) as f64);
            Cluster {
                bin_lo: lo,
                bin_hi: hi,
                mass,
                p,
                adjusted_p,
                higher_in_a: mean_diff > 0.0,
            }
        })
        .collect();

    Ok(ClusterResult {
        clusters,
        n_permutations: n_perm,
        seed,
        alpha_cluster,
        n_subjects,
        n_bins,
    })
}

/// Contiguous runs of bins with |t| above the threshold.
fn cluster_spans(t_abs: &[f64], t_crit: f64) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (k, &t) in t_abs.iter().enumerate() {
        if t > t_crit {
            start.get_or_insert(k);
        } else if let Some(s) = start.take() {
            spans.push((s, k - 1));
        }
    }
    if let Some(s) = start {
        spans.push((s, t_abs.len() - 1));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::super::{derived_rng, standard_normal};
    use super::*;
    use approx::assert_abs_diff_eq;

    fn noise_matrix(seed: u64, subjects: usize, bins: usize) -> Vec<Vec<f64>> {
        (0..subjects)
            .map(|i| {
                let mut rng = derived_rng(seed, i as u64 + 1000);
                (0..bins).map(|_| standard_normal(&mut rng)).collect()
            })
            .collect()
    }

    #[test]
    fn identical_inputs_give_no_clusters() {
        let a = noise_matrix(3, 6, 64);
        let r = cluster_permutation_freq(&a, &a, 0.05, 99, 7).unwrap();
        assert!(r.clusters.is_empty());
        assert_eq!(r.min_adjusted_p(), 1.0);
    }

    #[test]
    fn injected_cluster_detected_at_floor_p() {
        // +10 into bins 100–120 of `a` for all 20 subjects.
        let mut a = noise_matrix(5, 20, 256);
        let b = noise_matrix(6, 20, 256);
        for row in a.iter_mut() {
            for k in 100..=120 {
                row[k] += 10.0;
            }
        }
        let r = cluster_permutation_freq(&a, &b, 0.05, 999, 42).unwrap();
        let big = r
            .clusters
            .iter()
            .max_by(|x, y| x.mass.partial_cmp(&y.mass).unwrap())
            .unwrap();
        assert!(big.bin_lo <= 100 && big.bin_hi >= 120);
        assert_abs_diff_eq!(big.p, 1.0 / 1000.0);
        assert!(big.higher_in_a);
        for c in &r.clusters {
            assert!(c.p >= 1.0 / 1000.0);
        }
    }

    #[test]
    fn subject_order_does_not_change_masses() {
        let a = noise_matrix(8, 10, 128);
        let mut b = noise_matrix(9, 10, 128);
        for row in b.iter_mut() {
            for v in row.iter_mut() {
                *v += 0.8;
            }
        }
        let r1 = cluster_permutation_freq(&a, &b, 0.05, 49, 1).unwrap();
        let perm: Vec<usize> = vec![3, 1, 4, 0, 9, 6, 2, 8, 5, 7];
        let a2: Vec<Vec<f64>> = perm.iter().map(|&i| a[i].clone()).collect();
        let b2: Vec<Vec<f64>> = perm.iter().map(|&i| b[i].clone()).collect();
        let r2 = cluster_permutation_freq(&a2, &b2, 0.05, 49, 1).unwrap();
        assert_eq!(r1.clusters.len(), r2.clusters.len());
        for (c1, c2) in r1.clusters.iter().zip(r2.clusters.iter()) {
            assert_eq!((c1.bin_lo, c1.bin_hi), (c2.bin_lo, c2.bin_hi));
            assert_abs_diff_eq!(c1.mass, c2.mass, epsilon = 1e-9);
        }
    }

    #[test]
    fn fixed_seed_reproduces_exactly() {
        let a = noise_matrix(10, 8, 96);
        let mut b = noise_matrix(11, 8, 96);
        for row in b.iter_mut() {
            for (k, v) in row.iter_mut().enumerate() {
                if (30..40).contains(&k) {
                    *v += 2.0;
                }
            }
        }
        let r1 = cluster_permutation_freq(&a, &b, 0.05, 199, 77).unwrap();
        let r2 = cluster_permutation_freq(&a, &b, 0.05, 199, 77).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn shape_errors() {
        let a = noise_matrix(1, 4, 16);
        let b = noise_matrix(2, 5, 16);
        assert!(matches!(
            cluster_permutation_freq(&a, &b, 0.05, 9, 0),
            Err(StatsError::ShapeMismatch(_))
        ));
        let c = noise_matrix(3, 2, 16);
        assert!(matches!(
            cluster_permutation_freq(&c, &c, 0.05, 9, 0),
            Err(StatsError::InsufficientSubjects { .. })
        ));
    }
}
