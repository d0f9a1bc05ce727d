//! Post-processing chain that turns raw HRIR sets into aligned, windowed,
//! level-normalised, no-ITD sets.
//!
//! Stages run in a fixed order — direction matching, temporal windowing,
//! broadband level normalisation against a reference RMS, then ITD
//! removal by onset-aligned circular shifting — and every stage is a pure
//! function, so reruns are bit-identical.

use thiserror::Error;

use crate::model::{
    match_directions, Direction, HrirSet, MetricConfig, ModelError, StereoImpulse,
    DEFAULT_DIRECTION_TOL_DEG,
};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("set length {got} shorter than target length {target}")]
    LengthTooShort { got: usize, target: usize },
    #[error("frontal direction (az {azimuth_deg}°, el {elevation_deg}°) not present within {tol_deg}°")]
    FrontalDirectionMissing {
        azimuth_deg: f64,
        elevation_deg: f64,
        tol_deg: f64,
    },
    #[error("frontal impulse has zero energy")]
    ZeroFrontalEnergy,
    #[error("all-zero impulse at direction {direction} ({ear} ear)")]
    SilentImpulse { direction: usize, ear: &'static str },
    #[error("invalid preprocessing config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parameters of the post-processing chain.
#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub fade_in_samples: usize,
    pub fade_out_samples: usize,
    /// Output impulse length; input sets must be at least this long.
    pub target_length: usize,
    pub frontal_direction: Direction,
    /// Arrival-time padding left in front of the aligned onsets.
    pub itd_padding_ms: f64,
    pub direction_match_tol_deg: f64,
    pub metric: MetricConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            fade_in_samples: 16,
            fade_out_samples: 128,
            target_length: 256,
            frontal_direction: Direction::new(0.0, 0.0).expect("frontal direction"),
            itd_padding_ms: 0.8,
            direction_match_tol_deg: DEFAULT_DIRECTION_TOL_DEG,
            metric: MetricConfig::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.fade_in_samples + self.fade_out_samples > self.target_length {
            return Err(PreprocessError::BadConfig(format!(
                "fade_in {} + fade_out {} exceed target length {}",
                self.fade_in_samples, self.fade_out_samples, self.target_length
            )));
        }
        if !self.itd_padding_ms.is_finite() || self.itd_padding_ms < 0.0 {
            return Err(PreprocessError::BadConfig(format!(
                "itd_padding_ms {} must be ≥ 0",
                self.itd_padding_ms
            )));
        }
        self.metric
            .validate()
            .map_err(|e| PreprocessError::BadConfig(e.to_string()))?;
        Ok(())
    }

    /// Padding in whole samples at a given rate (0.8 ms @ 48 kHz → 38).
    pub fn pad_samples(&self, sample_rate_hz: u32) -> i64 {
        (self.itd_padding_ms * sample_rate_hz as f64 / 1000.0).round() as i64
    }
}

/// Truncates every impulse to the target length and applies the
/// sine-squared fade-in and cosine-squared fade-out.
///
/// Fade-in weight: sin²(πn/(2F_in)) for n ∈ [0, F_in); fade-out weight
/// cos²(πk/(2F_out)) for the k-th sample of the final F_out.
pub fn window_hrirs(set: &HrirSet, cfg: &PreprocessConfig) -> Result<HrirSet, PreprocessError> {
    cfg.validate()?;
    if set.impulse_len() < cfg.target_length {
        return Err(PreprocessError::LengthTooShort {
            got: set.impulse_len(),
            target: cfg.target_length,
        });
    }
    let window_one = |x: &[f64]| -> Vec<f64> {
        let mut out = x[..cfg.target_length].to_vec();
        for (n, v) in out.iter_mut().enumerate().take(cfg.fade_in_samples) {
            let w = (std::f64::consts::PI * n as f64 / (2.0 * cfg.fade_in_samples as f64)).sin();
            *v *= w * w;
        }
        let start = cfg.target_length - cfg.fade_out_samples;
        for k in 0..cfg.fade_out_samples {
            let w = (std::f64::consts::PI * k as f64 / (2.0 * cfg.fade_out_samples as f64)).cos();
            out[start + k] *= w * w;
        }
        out
    };
    let impulses = set
        .impulses()
        .iter()
        .map(|imp| StereoImpulse {
            left: window_one(&imp.left),
            right: window_one(&imp.right),
        })
        .collect();
    Ok(HrirSet::new(
        set.sample_rate_hz(),
        set.directions().to_vec(),
        impulses,
        set.itd_shifts().map(|s| s.to_vec()),
        set.subject_id(),
        set.label(),
    )?)
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Mean of the left/right RMS levels at the set's frontal direction.
pub fn frontal_mean_rms(set: &HrirSet, cfg: &PreprocessConfig) -> Result<f64, PreprocessError> {
    let idx = set
        .find_direction(&cfg.frontal_direction, cfg.direction_match_tol_deg)
        .ok_or(PreprocessError::FrontalDirectionMissing {
            azimuth_deg: cfg.frontal_direction.azimuth_deg(),
            elevation_deg: cfg.frontal_direction.elevation_deg(),
            tol_deg: cfg.direction_match_tol_deg,
        })?;
    let imp = set.impulse(idx);
    Ok((rms(&imp.left) + rms(&imp.right)) / 2.0)
}

/// Scales the whole set by one scalar so its frontal mean RMS equals
/// `reference_rms`. Returns the scaled set and the scale factor.
pub fn normalise_level(
    set: &HrirSet,
    cfg: &PreprocessConfig,
    reference_rms: f64,
) -> Result<(HrirSet, f64), PreprocessError> {
    let current = frontal_mean_rms(set, cfg)?;
    if current == 0.0 {
        return Err(PreprocessError::ZeroFrontalEnergy);
    }
    let scale = reference_rms / current;
    let impulses = set
        .impulses()
        .iter()
        .map(|imp| StereoImpulse {
            left: imp.left.iter().map(|v| v * scale).collect(),
            right: imp.right.iter().map(|v| v * scale).collect(),
        })
        .collect();
    let scaled = HrirSet::new(
        set.sample_rate_hz(),
        set.directions().to_vec(),
        impulses,
        set.itd_shifts().map(|s| s.to_vec()),
        set.subject_id(),
        set.label(),
    )?;
    Ok((scaled, scale))
}

/// Threshold onset detector: the first sample whose |amplitude| reaches
/// `onset_threshold_fraction` of the peak |amplitude|.
///
/// The estimate is refined on a grid of 1/upsample_factor samples using
/// a previous-value hold, which keeps onsets of discrete pulses on their
/// exact sample index; interpolating refinements would report energy
/// before any sample exists.
pub fn detect_onset(impulse: &[f64], cfg: &MetricConfig) -> Result<f64, PreprocessError> {
    let peak = impulse.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(PreprocessError::SilentImpulse {
            direction: 0,
            ear: "unknown",
        });
    }
    let threshold = cfg.onset_threshold_fraction * peak;
    let idx = impulse
        .iter()
        .position(|v| v.abs() >= threshold)
        .expect("peak sample itself reaches the threshold");
    Ok(idx as f64)
}

/// Removes interaural time differences: every impulse is circularly
/// shifted so its onset lands on the configured padding, wrapped samples
/// are zeroed, and the applied shifts are recorded per direction.
pub fn remove_itd(set: &HrirSet, cfg: &PreprocessConfig) -> Result<HrirSet, PreprocessError> {
    cfg.validate()?;
    let pad = cfg.pad_samples(set.sample_rate_hz());
    let mut impulses = Vec::with_capacity(set.len());
    let mut shifts = Vec::with_capacity(set.len());
    for (di, imp) in set.impulses().iter().enumerate() {
        let mut shifted_pair = Vec::with_capacity(2);
        let mut pair_shifts = [0i32; 2];
        for (slot, (ear, x)) in [("left", &imp.left), ("right", &imp.right)]
            .into_iter()
            .enumerate()
        {
            let onset = detect_onset(x, &cfg.metric).map_err(|_| PreprocessError::SilentImpulse {
                direction: di,
                ear,
            })?;
            let k = (pad as f64 - onset).round() as i64;
            shifted_pair.push(circular_shift_zeroed(x, k));
            pair_shifts[slot] = k as i32;
        }
        let right = shifted_pair.pop().expect("two ears");
        let left = shifted_pair.pop().expect("two ears");
        impulses.push(StereoImpulse { left, right });
        shifts.push((pair_shifts[0], pair_shifts[1]));
    }
    Ok(HrirSet::new(
        set.sample_rate_hz(),
        set.directions().to_vec(),
        impulses,
        Some(shifts),
        set.subject_id(),
        set.label(),
    )?)
}

/// Circular shift by `k` samples (positive = later), zeroing the wrapped
/// region.
fn circular_shift_zeroed(x: &[f64], k: i64) -> Vec<f64> {
    let n = x.len() as i64;
    let mut out = vec![0.0; x.len()];
    if k.abs() >= n {
        // Everything wraps; the zeroing leaves silence.
        return out;
    }
    for (i, &v) in x.iter().enumerate() {
        let j = (i as i64 + k).rem_euclid(n) as usize;
        out[j] = v;
    }
    if k > 0 {
        for v in out.iter_mut().take(k as usize) {
            *v = 0.0;
        }
    } else if k < 0 {
        for v in out.iter_mut().skip((n + k) as usize) {
            *v = 0.0;
        }
    }
    out
}

/// Full §-chain: match directions against the reference, window,
/// normalise to the reference's frontal RMS, and remove ITDs. The output
/// follows the reference's direction order.
pub fn preprocess_pipeline(
    set: &HrirSet,
    reference: &HrirSet,
    cfg: &PreprocessConfig,
) -> Result<HrirSet, PreprocessError> {
    cfg.validate()?;
    let pairs = match_directions(set, reference, cfg.direction_match_tol_deg)?;
    let directions: Vec<Direction> = pairs
        .iter()
        .map(|&(ri, _)| reference.directions()[ri])
        .collect();
    let impulses: Vec<StereoImpulse> = pairs
        .iter()
        .map(|&(_, ci)| set.impulse(ci).clone())
        .collect();
    let aligned = HrirSet::new(
        set.sample_rate_hz(),
        directions,
        impulses,
        None,
        set.subject_id(),
        set.label(),
    )?;
    let windowed = window_hrirs(&aligned, cfg)?;
    let reference_rms = frontal_mean_rms(reference, cfg)?;
    let (normalised, _scale) = normalise_level(&windowed, cfg, reference_rms)?;
    remove_itd(&normalised, cfg)
}
