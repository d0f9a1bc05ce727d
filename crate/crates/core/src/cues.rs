//! Numerical localisation-cue metrics: interaural time difference,
//! interaural level difference, and log-spectral distortion, per
//! direction and aggregated per subject, plus the spatial-grid and
//! per-frequency statistical summaries built on them.
//!
//! Sign conventions: ITD is (right onset − left onset), positive when
//! the left ear leads; ILD is the right-over-left energy ratio in dB, so
//! a louder right ear is positive. Signed per-direction differences are
//! candidate minus reference throughout.

use rustfft::{num_complex::Complex, FftPlanner};
use thiserror::Error;

use crate::model::{
    great_circle_deg, match_directions, Direction, Ear, HrirSet, MetricConfig, ModelError,
    DEFAULT_DIRECTION_TOL_DEG,
};
use crate::preprocess::{detect_onset, PreprocessError};
use crate::stats::{self, StatsError};

#[derive(Debug, Error)]
pub enum CueError {
    #[error("impulse lengths differ: candidate {cand}, reference {reference}")]
    LengthMismatch { cand: usize, reference: usize },
    #[error("sample rates differ: candidate {cand} Hz, reference {reference} Hz")]
    SampleRateMismatch { cand: u32, reference: u32 },
    #[error("frequency band selects no DFT bins")]
    EmptyBand,
    #[error("heterogeneous grids: {0}")]
    HeterogeneousGrids(String),
    #[error("all-zero impulse at direction {direction} ({ear} ear)")]
    SilentImpulse { direction: usize, ear: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid metric config: {0}")]
    BadConfig(String),
}

/// Per-direction cue values and errors for one candidate-vs-reference
/// pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CueRecord {
    pub direction: Direction,
    pub itd_cand_us: f64,
    pub itd_ref_us: f64,
    pub itd_abs_err_us: f64,
    pub ild_cand_db: f64,
    pub ild_ref_db: f64,
    pub ild_abs_err_db: f64,
    /// Candidate minus reference ILD.
    pub ild_signed_db: f64,
    pub lsd_left_db: f64,
    pub lsd_right_db: f64,
    /// Mean (not RMS) log-magnitude difference over bins and ears; the
    /// signed counterpart of the LSD used for difference heatmaps.
    pub lsd_signed_mean_db: f64,
}

/// Full cue comparison of one candidate set against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct CueReport {
    pub subject_id: String,
    pub condition: String,
    pub records: Vec<CueRecord>,
    /// Mean |ITD error| across directions, µs.
    pub mean_abs_itd_us: f64,
    /// Mean |ILD error| across directions, dB.
    pub mean_abs_ild_db: f64,
    /// Mean LSD across ears and directions (1/(2D) double sum), dB.
    pub mean_lsd_db: f64,
}

/// Which cue a spatial summary aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CueMetric {
    Itd,
    Ild,
    Lsd,
}

impl CueMetric {
    pub fn name(&self) -> &'static str {
        match self {
            CueMetric::Itd => "itd",
            CueMetric::Ild => "ild",
            CueMetric::Lsd => "lsd",
        }
    }

    /// Signed candidate-minus-reference difference for one direction.
    fn signed_diff(&self, r: &CueRecord) -> f64 {
        match self {
            CueMetric::Itd => r.itd_cand_us - r.itd_ref_us,
            CueMetric::Ild => r.ild_signed_db,
            CueMetric::Lsd => r.lsd_signed_mean_db,
        }
    }
}

/// Signed interaural time difference in microseconds: (right onset −
/// left onset)/fs, positive when the left ear leads.
pub fn estimate_itd(set: &HrirSet, direction: usize, cfg: &MetricConfig) -> Result<f64, CueError> {
    let imp = set.impulse(direction);
    let onset = |x: &[f64], ear: &'static str| -> Result<f64, CueError> {
        detect_onset(x, cfg).map_err(|e| match e {
            PreprocessError::SilentImpulse { .. } => CueError::SilentImpulse { direction, ear },
            other => CueError::BadConfig(other.to_string()),
        })
    };
    let left = onset(&imp.left, "left")?;
    let right = onset(&imp.right, "right")?;
    Ok((right - left) / set.sample_rate_hz() as f64 * 1e6)
}

fn broadband_energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Broadband interaural level difference in dB:
/// 10·log10((E_R + ε)/(E_L + ε)) with E the mean squared amplitude.
pub fn ild_db(set: &HrirSet, direction: usize, cfg: &MetricConfig) -> f64 {
    let imp = set.impulse(direction);
    let e_left = broadband_energy(&imp.left);
    let e_right = broadband_energy(&imp.right);
    10.0 * ((e_right + cfg.epsilon) / (e_left + cfg.epsilon)).log10()
}

/// Magnitude spectrum |H_k| for k = 0..=N/2 (DC to Nyquist inclusive),
/// from the DFT of the full impulse with no zero padding.
pub fn magnitude_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm()).collect()
}

/// Indices into the 0..=N/2 spectrum selected by the metric config's
/// frequency band (all bins when no band is set).
pub fn selected_bins(n: usize, sample_rate_hz: u32, cfg: &MetricConfig) -> Result<Vec<usize>, CueError> {
    let all = 0..=n / 2;
    let bins: Vec<usize> = match cfg.freq_band_hz {
        None => all.collect(),
        Some((lo, hi)) => {
            let df = sample_rate_hz as f64 / n as f64;
            all.filter(|&k| {
                let f = k as f64 * df;
                f >= lo && f <= hi
            })
            .collect()
        }
    };
    if bins.is_empty() {
        return Err(CueError::EmptyBand);
    }
    Ok(bins)
}

fn log_mag(mag: f64, epsilon: f64) -> f64 {
    20.0 * (mag + epsilon).log10()
}

/// Log-spectral distortion in dB for one matched direction pair and one
/// ear: RMS over frequency bins of the log-magnitude spectrum
/// difference.
pub fn lsd_db(
    cand: &HrirSet,
    reference: &HrirSet,
    pair: (usize, usize),
    ear: Ear,
    cfg: &MetricConfig,
) -> Result<f64, CueError> {
    let (ref_idx, cand_idx) = pair;
    let xc = cand.impulse(cand_idx).ear(ear);
    let xr = reference.impulse(ref_idx).ear(ear);
    if xc.len() != xr.len() {
        return Err(CueError::LengthMismatch {
            cand: xc.len(),
            reference: xr.len(),
        });
    }
    let bins = selected_bins(xr.len(), reference.sample_rate_hz(), cfg)?;
    let mc = magnitude_spectrum(xc);
    let mr = magnitude_spectrum(xr);
    let sum_sq: f64 = bins
        .iter()
        .map(|&k| {
            let d = log_mag(mc[k], cfg.epsilon) - log_mag(mr[k], cfg.epsilon);
            d * d
        })
        .sum();
    Ok((sum_sq / bins.len() as f64).sqrt())
}

/// Per-pair log-magnitude differences for one ear over the selected bins.
fn log_mag_diffs(
    cand: &HrirSet,
    reference: &HrirSet,
    pair: (usize, usize),
    ear: Ear,
    bins: &[usize],
    epsilon: f64,
) -> Vec<f64> {
    let (ref_idx, cand_idx) = pair;
    let mc = magnitude_spectrum(cand.impulse(cand_idx).ear(ear));
    let mr = magnitude_spectrum(reference.impulse(ref_idx).ear(ear));
    bins.iter()
        .map(|&k| log_mag(mc[k], epsilon) - log_mag(mr[k], epsilon))
        .collect()
}

fn check_comparable(cand: &HrirSet, reference: &HrirSet) -> Result<(), CueError> {
    if cand.sample_rate_hz() != reference.sample_rate_hz() {
        return Err(CueError::SampleRateMismatch {
            cand: cand.sample_rate_hz(),
            reference: reference.sample_rate_hz(),
        });
    }
    if cand.impulse_len() != reference.impulse_len() {
        return Err(CueError::LengthMismatch {
            cand: cand.impulse_len(),
            reference: reference.impulse_len(),
        });
    }
    Ok(())
}

/// Compares a candidate set against a reference over all matched
/// directions.
pub fn compare_sets(
    cand: &HrirSet,
    reference: &HrirSet,
    cfg: &MetricConfig,
) -> Result<CueReport, CueError> {
    cfg.validate().map_err(|e| CueError::BadConfig(e.to_string()))?;
    check_comparable(cand, reference)?;
    let pairs = match_directions(cand, reference, DEFAULT_DIRECTION_TOL_DEG)?;
    let bins = selected_bins(reference.impulse_len(), reference.sample_rate_hz(), cfg)?;

    let mut records = Vec::with_capacity(pairs.len());
    for &(ri, ci) in &pairs {
        let itd_cand_us = estimate_itd(cand, ci, cfg)?;
        let itd_ref_us = estimate_itd(reference, ri, cfg)?;
        let ild_cand_db = ild_db(cand, ci, cfg);
        let ild_ref_db = ild_db(reference, ri, cfg);
        let lsd_left_db = lsd_db(cand, reference, (ri, ci), Ear::Left, cfg)?;
        let lsd_right_db = lsd_db(cand, reference, (ri, ci), Ear::Right, cfg)?;
        let mut signed_sum = 0.0;
        for ear in [Ear::Left, Ear::Right] {
            let diffs = log_mag_diffs(cand, reference, (ri, ci), ear, &bins, cfg.epsilon);
            signed_sum += diffs.iter().sum::<f64>() / diffs.len() as f64;
        }
        records.push(CueRecord {
            direction: reference.directions()[ri],
            itd_cand_us,
            itd_ref_us,
            itd_abs_err_us: (itd_cand_us - itd_ref_us).abs(),
            ild_cand_db,
            ild_ref_db,
            ild_abs_err_db: (ild_cand_db - ild_ref_db).abs(),
            ild_signed_db: ild_cand_db - ild_ref_db,
            lsd_left_db,
            lsd_right_db,
            lsd_signed_mean_db: signed_sum / 2.0,
        });
    }
    let d = records.len() as f64;
    let mean_abs_itd_us = records.iter().map(|r| r.itd_abs_err_us).sum::<f64>() / d;
    let mean_abs_ild_db = records.iter().map(|r| r.ild_abs_err_db).sum::<f64>() / d;
    let mean_lsd_db = records
        .iter()
        .map(|r| r.lsd_left_db + r.lsd_right_db)
        .sum::<f64>()
        / (2.0 * d);
    Ok(CueReport {
        subject_id: cand.subject_id().to_string(),
        condition: cand.label().to_string(),
        records,
        mean_abs_itd_us,
        mean_abs_ild_db,
        mean_lsd_db,
    })
}

/// Frequency-resolved LSD averaged over a group of subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLsdCurve {
    /// Centre frequency of each selected DFT bin, strictly increasing.
    pub freq_bins_hz: Vec<f64>,
    /// Mean across subjects of the per-subject per-bin LSD, dB.
    pub lsd_db: Vec<f64>,
    /// Sample standard deviation across subjects per bin, dB.
    pub lsd_sd_db: Vec<f64>,
    /// Per-subject curves backing the mean, subject-major.
    pub per_subject_lsd_db: Vec<Vec<f64>>,
    pub n_subjects: usize,
}

/// Per-bin LSD for each subject: RMS over ears and matched directions of
/// the log-magnitude difference at that bin, then mean and SD across
/// subjects.
pub fn lsd_frequency_curve(
    cands: &[HrirSet],
    refs: &[HrirSet],
    cfg: &MetricConfig,
) -> Result<FrequencyLsdCurve, CueError> {
    cfg.validate().map_err(|e| CueError::BadConfig(e.to_string()))?;
    if cands.len() != refs.len() {
        return Err(CueError::HeterogeneousGrids(format!(
            "{} candidate sets vs {} reference sets",
            cands.len(),
            refs.len()
        )));
    }
    if cands.is_empty() {
        return Err(CueError::HeterogeneousGrids("no subjects".into()));
    }
    let fs = refs[0].sample_rate_hz();
    let n = refs[0].impulse_len();
    for s in cands.iter().chain(refs.iter()) {
        if s.sample_rate_hz() != fs || s.impulse_len() != n {
            return Err(CueError::HeterogeneousGrids(format!(
                "set {}/{} has fs {} Hz, N {} (expected {} Hz, {})",
                s.subject_id(),
                s.label(),
                s.sample_rate_hz(),
                s.impulse_len(),
                fs,
                n
            )));
        }
    }
    let bins = selected_bins(n, fs, cfg)?;
    let df = fs as f64 / n as f64;

    let mut per_subject = Vec::with_capacity(cands.len());
    for (cand, reference) in cands.iter().zip(refs.iter()) {
        let pairs = match_directions(cand, reference, DEFAULT_DIRECTION_TOL_DEG)?;
        let mut sum_sq = vec![0.0f64; bins.len()];
        let mut count = 0usize;
        for &pair in &pairs {
            for ear in [Ear::Left, Ear::Right] {
                let diffs = log_mag_diffs(cand, reference, pair, ear, &bins, cfg.epsilon);
                for (acc, d) in sum_sq.iter_mut().zip(diffs.iter()) {
                    *acc += d * d;
                }
                count += 1;
            }
        }
        let curve: Vec<f64> = sum_sq
            .into_iter()
            .map(|s| (s / count as f64).sqrt())
            .collect();
        per_subject.push(curve);
    }

    let n_subjects = per_subject.len();
    let mut mean = vec![0.0; bins.len()];
    let mut sd = vec![0.0; bins.len()];
    for (k, m) in mean.iter_mut().enumerate() {
        let vals: Vec<f64> = per_subject.iter().map(|c| c[k]).collect();
        *m = stats::mean(&vals);
        sd[k] = stats::sample_sd(&vals);
    }
    Ok(FrequencyLsdCurve {
        freq_bins_hz: bins.iter().map(|&k| k as f64 * df).collect(),
        lsd_db: mean,
        lsd_sd_db: sd,
        per_subject_lsd_db: per_subject,
        n_subjects,
    })
}

/// Significance tier of an adjusted p value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignificanceTier {
    NotSignificant,
    P05,
    P01,
    P001,
}

impl SignificanceTier {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            SignificanceTier::P001
        } else if p < 0.01 {
            SignificanceTier::P01
        } else if p < 0.05 {
            SignificanceTier::P05
        } else {
            SignificanceTier::NotSignificant
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SignificanceTier::NotSignificant => "ns",
            SignificanceTier::P05 => "p<0.05",
            SignificanceTier::P01 => "p<0.01",
            SignificanceTier::P001 => "p<0.001",
        }
    }
}

/// One grid node of a spatial difference map.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Subjects contributing at least one direction to this node.
    pub n_subjects: usize,
    /// Mean across subjects of the per-subject mean signed difference.
    pub mean_diff: f64,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub adjusted_p: Option<f64>,
    pub tier: SignificanceTier,
    /// True when the node was excluded from testing (fewer than two
    /// contributing subjects).
    pub excluded: bool,
}

/// Spatial map of signed cue differences with per-node one-sample tests
/// and FDR correction across nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGridSummary {
    pub metric: CueMetric,
    pub grid_step_deg: u32,
    pub nodes: Vec<GridNode>,
    pub n_subjects: usize,
}

/// Grid nodes at `step`° spacing; the poles collapse to a single node.
pub fn grid_nodes(step: u32) -> Vec<(f64, f64)> {
    let step = step as f64;
    let mut nodes = Vec::new();
    let mut el = -90.0;
    while el <= 90.0 {
        if el.abs() >= 90.0 {
            nodes.push((0.0, el));
        } else {
            let mut az = 0.0;
            while az < 360.0 {
                nodes.push((az, el));
                az += step;
            }
        }
        el += step;
    }
    nodes
}

/// Bins each report's directions to the nearest grid node, averages the
/// selected signed cue difference per subject per node, and tests each
/// node's across-subject mean against zero with BH correction across
/// nodes.
///
/// Ties in the node assignment go to the lower azimuth, then lower
/// elevation. Nodes with a single contributing subject are excluded from
/// testing but still reported.
pub fn spatial_grid_differences(
    reports: &[CueReport],
    metric: CueMetric,
    grid_step_deg: u32,
    alpha: f64,
) -> Result<SpatialGridSummary, CueError> {
    if reports.len() < 3 {
        return Err(StatsError::InsufficientSubjects {
            got: reports.len(),
            need: 3,
        }
        .into());
    }
    if grid_step_deg == 0 || grid_step_deg > 90 {
        return Err(CueError::BadConfig(format!(
            "grid step {grid_step_deg}° outside 1..=90"
        )));
    }
    let nodes = grid_nodes(grid_step_deg);
    let node_dirs: Vec<Direction> = nodes
        .iter()
        .map(|&(az, el)| Direction::new(az, el).expect("valid grid node"))
        .collect();

    // Per-subject per-node mean of the signed difference.
    let mut sums = vec![vec![0.0f64; nodes.len()]; reports.len()];
    let mut counts = vec![vec![0usize; nodes.len()]; reports.len()];
    for (si, report) in reports.iter().enumerate() {
        for rec in &report.records {
            let mut best = 0usize;
            let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            for (ni, nd) in node_dirs.iter().enumerate() {
                let key = (
                    great_circle_deg(&rec.direction, nd),
                    nodes[ni].0,
                    nodes[ni].1,
                );
                if key.0 < best_key.0 - 1e-9
                    || ((key.0 - best_key.0).abs() <= 1e-9
                        && (key.1, key.2) < (best_key.1, best_key.2))
                {
                    best = ni;
                    best_key = key;
                }
            }
            sums[si][best] += metric.signed_diff(rec);
            counts[si][best] += 1;
        }
    }

    let mut out_nodes = Vec::new();
    let mut tested: Vec<usize> = Vec::new();
    let mut raw_ps: Vec<f64> = Vec::new();
    for (ni, &(az, el)) in nodes.iter().enumerate() {
        let values: Vec<f64> = (0..reports.len())
            .filter(|&si| counts[si][ni] > 0)
            .map(|si| sums[si][ni] / counts[si][ni] as f64)
            .collect();
        if values.is_empty() {
            continue;
        }
        let mean_diff = stats::mean(&values);
        if values.len() < 2 {
            out_nodes.push(GridNode {
                azimuth_deg: az,
                elevation_deg: el,
                n_subjects: values.len(),
                mean_diff,
                t: None,
                p: None,
                adjusted_p: None,
                tier: SignificanceTier::NotSignificant,
                excluded: true,
            });
            continue;
        }
        let (t, p) = match stats::t_test_one_sample(&values, 0.0) {
            Ok(r) => (r.statistic, r.p),
            // Constant differences: exactly zero is a perfect null,
            // anything else is unambiguous evidence.
            Err(StatsError::ZeroVariance) => {
                if mean_diff == 0.0 {
                    (0.0, 1.0)
                } else {
                    (f64::INFINITY * mean_diff.signum(), 0.0)
                }
            }
            Err(e) => return Err(e.into()),
        };
        tested.push(out_nodes.len());
        raw_ps.push(p);
        out_nodes.push(GridNode {
            azimuth_deg: az,
            elevation_deg: el,
            n_subjects: values.len(),
            mean_diff,
            t: Some(t),
            p: Some(p),
            adjusted_p: None,
            tier: SignificanceTier::NotSignificant,
            excluded: false,
        });
    }
    if !raw_ps.is_empty() {
        let adjusted = stats::bh_fdr_adjust(&raw_ps)?;
        for (&idx, adj) in tested.iter().zip(adjusted) {
            out_nodes[idx].adjusted_p = Some(adj);
            let _ = alpha;
            out_nodes[idx].tier = SignificanceTier::from_p(adj);
        }
    }
    Ok(SpatialGridSummary {
        metric,
        grid_step_deg,
        nodes: out_nodes,
        n_subjects: reports.len(),
    })
}
