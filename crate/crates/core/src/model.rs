//! Domain model: directions, interaural coordinates, HRIR sets, and the
//! geometry primitives everything else builds on.
//!
//! Angle conventions follow the SOFA ecosystem: azimuth in degrees,
//! counterclockwise viewed from above (0° front, 90° to the listener's
//! left), elevation in degrees up from the horizontal plane. The
//! lateral–polar system puts `lateral` on the interaural axis (positive
//! left) and `polar` as rotation about that axis (0° front-horizontal,
//! 90° above, 180° rear-horizontal).

use thiserror::Error;

/// Default tolerance (degrees) when pairing source directions of two sets.
pub const DEFAULT_DIRECTION_TOL_DEG: f64 = 0.5;

/// Minimum great-circle separation (degrees) between directions of one set.
pub const MIN_DIRECTION_SEPARATION_DEG: f64 = 0.1;

/// Shortest windowed impulse length: fade-in (16) plus fade-out (128)
/// must fit with room to spare.
pub const MIN_IMPULSE_LEN: usize = 145;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("elevation {0}° outside [-90, 90]")]
    InvalidElevation(f64),
    #[error("distance {0} m must be > 0 and finite")]
    InvalidDistance(f64),
    #[error("azimuth {0}° is not finite")]
    InvalidAzimuth(f64),
    #[error("lateral angle {0}° outside [-90, 90]")]
    InvalidLateral(f64),
    #[error("polar angle {0}° outside [-90, 270)")]
    InvalidPolar(f64),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("HRIR set has no directions")]
    EmptySet,
    #[error("direction count {directions} does not match impulse count {impulses}")]
    CountMismatch { directions: usize, impulses: usize },
    #[error("impulse length {got} at direction {index} differs from {expected}")]
    RaggedImpulses {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("impulse length {0} below minimum {MIN_IMPULSE_LEN}")]
    ImpulseTooShort(usize),
    #[error("directions {a} and {b} closer than {MIN_DIRECTION_SEPARATION_DEG}° ({sep_deg}°)")]
    DuplicateDirection { a: usize, b: usize, sep_deg: f64 },
    #[error("itd_shifts length {got} does not match direction count {expected}")]
    ShiftCountMismatch { got: usize, expected: usize },
    #[error("non-finite sample at direction {direction}, {ear} ear")]
    NonFiniteSample { direction: usize, ear: Ear },
    #[error(
        "reference direction {index} (az {azimuth_deg}°, el {elevation_deg}°) has no \
         candidate within {tol_deg}°"
    )]
    UnmatchedDirection {
        index: usize,
        azimuth_deg: f64,
        elevation_deg: f64,
        tol_deg: f64,
    },
}

/// Ear channel selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ear {
    Left,
    Right,
}

impl std::fmt::Display for Ear {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ear::Left => write!(f, "left"),
            Ear::Right => write!(f, "right"),
        }
    }
}

/// A source direction in vertical-polar coordinates.
///
/// Azimuth is stored normalised into `[0, 360)`. Poles keep whatever
/// azimuth they were constructed with; distance functions treat every
/// azimuth at |elevation| = 90° as the same point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
    distance_m: f64,
}

pub const DEFAULT_DISTANCE_M: f64 = 1.5;

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self, ModelError> {
        Self::with_distance(azimuth_deg, elevation_deg, DEFAULT_DISTANCE_M)
    }

    pub fn with_distance(
        azimuth_deg: f64,
        elevation_deg: f64,
        distance_m: f64,
    ) -> Result<Self, ModelError> {
        if !azimuth_deg.is_finite() {
            return Err(ModelError::InvalidAzimuth(azimuth_deg));
        }
        if !elevation_deg.is_finite() || elevation_deg.abs() > 90.0 {
            return Err(ModelError::InvalidElevation(elevation_deg));
        }
        if !distance_m.is_finite() || distance_m <= 0.0 {
            return Err(ModelError::InvalidDistance(distance_m));
        }
        Ok(Self {
            azimuth_deg: normalize_deg(azimuth_deg),
            elevation_deg,
            distance_m,
        })
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    /// Unit vector in listener coordinates: x front, y left, z up.
    pub fn unit_vector(&self) -> [f64; 3] {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    }

    /// Mirrors through the frontal plane: azimuth ↦ (180 − az) mod 360,
    /// elevation unchanged. Involution; the interaural axis (az 90/270)
    /// is its fixed-point set.
    pub fn mirror_front_back(&self) -> Direction {
        Direction {
            azimuth_deg: normalize_deg(180.0 - self.azimuth_deg),
            elevation_deg: self.elevation_deg,
            distance_m: self.distance_m,
        }
    }
}

/// Interaural lateral–polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralPolar {
    lateral_deg: f64,
    polar_deg: f64,
}

impl LateralPolar {
    pub fn new(lateral_deg: f64, polar_deg: f64) -> Result<Self, ModelError> {
        if !lateral_deg.is_finite() || lateral_deg.abs() > 90.0 {
            return Err(ModelError::InvalidLateral(lateral_deg));
        }
        if !polar_deg.is_finite() || polar_deg < -90.0 || polar_deg >= 270.0 {
            return Err(ModelError::InvalidPolar(polar_deg));
        }
        Ok(Self {
            lateral_deg,
            polar_deg,
        })
    }

    pub fn lateral_deg(&self) -> f64 {
        self.lateral_deg
    }

    pub fn polar_deg(&self) -> f64 {
        self.polar_deg
    }

    /// On the interaural axis the polar angle is undefined; it is stored
    /// as 0 by convention and callers can check for the degenerate case.
    pub fn is_degenerate(&self) -> bool {
        self.lateral_deg.abs() >= 90.0
    }
}

fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can return 360.0 when deg is a tiny negative number.
    if r >= 360.0 {
        r - 360.0
    } else {
        r
    }
}

/// Wraps an angle difference into (−180, 180].
pub fn wrap_signed_deg(deg: f64) -> f64 {
    let mut r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r -= 360.0;
    }
    r
}

/// Great-circle angle between two directions in degrees, in [0, 180].
///
/// Symmetric, zero only for coincident points; all azimuths at a pole
/// collapse to the same point.
pub fn great_circle_deg(a: &Direction, b: &Direction) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cx = u[1] * v[2] - u[2] * v[1];
    let cy = u[2] * v[0] - u[0] * v[2];
    let cz = u[0] * v[1] - u[1] * v[0];
    let cross = (cx * cx + cy * cy + cz * cz).sqrt();
    cross.atan2(dot).to_degrees()
}

/// Converts a direction to interaural lateral–polar coordinates.
///
/// lateral = asin(cos el · sin az), polar = atan2(sin el, cos el · cos az)
/// mapped into [−90, 270). On the interaural axis (|lateral| = 90) the
/// polar angle is set to 0.
pub fn to_lateral_polar(d: &Direction) -> LateralPolar {
    let [x, y, z] = d.unit_vector();
    let lateral = y.clamp(-1.0, 1.0).asin().to_degrees();
    if lateral.abs() >= 90.0 || (x == 0.0 && z == 0.0) {
        return LateralPolar {
            lateral_deg: lateral.clamp(-90.0, 90.0),
            polar_deg: 0.0,
        };
    }
    let mut polar = z.atan2(x).to_degrees();
    if polar < -90.0 {
        polar += 360.0;
    }
    LateralPolar {
        lateral_deg: lateral,
        polar_deg: polar,
    }
}

/// Inverse of [`to_lateral_polar`] away from the interaural axis.
pub fn from_lateral_polar(lp: &LateralPolar) -> Direction {
    let lat = lp.lateral_deg.to_radians();
    let pol = lp.polar_deg.to_radians();
    let y = lat.sin();
    let x = lat.cos() * pol.cos();
    let z = lat.cos() * pol.sin();
    let azimuth_deg = normalize_deg(y.atan2(x).to_degrees());
    let elevation_deg = z.clamp(-1.0, 1.0).asin().to_degrees();
    Direction {
        azimuth_deg,
        elevation_deg,
        distance_m: DEFAULT_DISTANCE_M,
    }
}

/// One direction's stereo impulse response pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoImpulse {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl StereoImpulse {
    pub fn ear(&self, ear: Ear) -> &[f64] {
        match ear {
            Ear::Left => &self.left,
            Ear::Right => &self.right,
        }
    }
}

/// A subject/condition's HRIR set.
///
/// Impulses are linear amplitude, one equal-length pair per direction.
/// `itd_shifts` is present exactly when the set has been through ITD
/// removal; it records the circular shift applied per direction and ear.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    sample_rate_hz: u32,
    directions: Vec<Direction>,
    impulses: Vec<StereoImpulse>,
    itd_shifts: Option<Vec<(i32, i32)>>,
    label: String,
    subject_id: String,
}

impl HrirSet {
    pub fn new(
        sample_rate_hz: u32,
        directions: Vec<Direction>,
        impulses: Vec<StereoImpulse>,
        itd_shifts: Option<Vec<(i32, i32)>>,
        subject_id: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        if sample_rate_hz == 0 {
            return Err(ModelError::InvalidSampleRate);
        }
        if directions.is_empty() {
            return Err(ModelError::EmptySet);
        }
        if directions.len() != impulses.len() {
            return Err(ModelError::CountMismatch {
                directions: directions.len(),
                impulses: impulses.len(),
            });
        }
        let n = impulses[0].left.len();
        if n < MIN_IMPULSE_LEN {
            return Err(ModelError::ImpulseTooShort(n));
        }
        for (i, imp) in impulses.iter().enumerate() {
            for (ear, samples) in [(Ear::Left, &imp.left), (Ear::Right, &imp.right)] {
                if samples.len() != n {
                    return Err(ModelError::RaggedImpulses {
                        index: i,
                        got: samples.len(),
                        expected: n,
                    });
                }
                if samples.iter().any(|s| !s.is_finite()) {
                    return Err(ModelError::NonFiniteSample { direction: i, ear });
                }
            }
        }
        for i in 0..directions.len() {
            for j in (i + 1)..directions.len() {
                let sep = great_circle_deg(&directions[i], &directions[j]);
                if sep < MIN_DIRECTION_SEPARATION_DEG {
                    return Err(ModelError::DuplicateDirection {
                        a: i,
                        b: j,
                        sep_deg: sep,
                    });
                }
            }
        }
        if let Some(shifts) = &itd_shifts {
            if shifts.len() != directions.len() {
                return Err(ModelError::ShiftCountMismatch {
                    got: shifts.len(),
                    expected: directions.len(),
                });
            }
        }
        Ok(Self {
            sample_rate_hz,
            directions,
            impulses,
            itd_shifts,
            label: label.into(),
            subject_id: subject_id.into(),
        })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn impulses(&self) -> &[StereoImpulse] {
        &self.impulses
    }

    pub fn impulse(&self, index: usize) -> &StereoImpulse {
        &self.impulses[index]
    }

    pub fn itd_shifts(&self) -> Option<&[(i32, i32)]> {
        self.itd_shifts.as_deref()
    }

    /// True when the set has been through ITD removal.
    pub fn is_no_itd(&self) -> bool {
        self.itd_shifts.is_some()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Impulse length N shared by every direction and ear.
    pub fn impulse_len(&self) -> usize {
        self.impulses[0].left.len()
    }

    /// Index of the direction nearest `target` within `tol_deg`, if any.
    pub fn find_direction(&self, target: &Direction, tol_deg: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in self.directions.iter().enumerate() {
            let sep = great_circle_deg(d, target);
            if sep <= tol_deg && best.map_or(true, |(_, b)| sep < b) {
                best = Some((i, sep));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Metric evaluation parameters shared by onset detection, ILD, and LSD.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    /// Linear stabiliser added before logarithms.
    pub epsilon: f64,
    /// Onset threshold as a fraction of the peak |amplitude|.
    pub onset_threshold_fraction: f64,
    /// Grid refinement factor for onset estimates (≥ 1).
    pub upsample_factor: u32,
    /// Optional (lo, hi) band limit in Hz applied to spectral metrics.
    pub freq_band_hz: Option<(f64, f64)>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-10,
            onset_threshold_fraction: 0.20,
            upsample_factor: 10,
            freq_band_hz: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricConfigError {
    #[error("epsilon must be > 0, got {0}")]
    BadEpsilon(f64),
    #[error("onset threshold fraction must be in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("upsample factor must be ≥ 1")]
    BadUpsample,
    #[error("frequency band ({0}, {1}) must satisfy 0 ≤ lo < hi")]
    BadBand(f64, f64),
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), MetricConfigError> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(MetricConfigError::BadEpsilon(self.epsilon));
        }
        let f = self.onset_threshold_fraction;
        if !f.is_finite() || f <= 0.0 || f >= 1.0 {
            return Err(MetricConfigError::BadThreshold(f));
        }
        if self.upsample_factor < 1 {
            return Err(MetricConfigError::BadUpsample);
        }
        if let Some((lo, hi)) = self.freq_band_hz {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
                return Err(MetricConfigError::BadBand(lo, hi));
            }
        }
        Ok(())
    }
}

/// Pairs each reference direction with the nearest candidate direction
/// within `tol_deg`. The pairing is injective: a candidate direction is
/// consumed by at most one reference direction (closest pairs win).
///
/// Returns `(reference_index, candidate_index)` pairs sorted by reference
/// index. Fails with [`ModelError::UnmatchedDirection`] naming the first
/// reference direction that cannot be paired.
pub fn match_directions(
    candidate: &HrirSet,
    reference: &HrirSet,
    tol_deg: f64,
) -> Result<Vec<(usize, usize)>, ModelError> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ri, rd) in reference.directions().iter().enumerate() {
        for (ci, cd) in candidate.directions().iter().enumerate() {
            let sep = great_circle_deg(rd, cd);
            if sep <= tol_deg {
                pairs.push((sep, ri, ci));
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut ref_used = vec![false; reference.len()];
    let mut cand_used = vec![false; candidate.len()];
    let mut matched = Vec::with_capacity(reference.len());
    for (_, ri, ci) in pairs {
        if !ref_used[ri] && !cand_used[ci] {
            ref_used[ri] = true;
            cand_used[ci] = true;
            matched.push((ri, ci));
        }
    }
    if let Some(ri) = ref_used.iter().position(|u| !u) {
        let d = &reference.directions()[ri];
        return Err(ModelError::UnmatchedDirection {
            index: ri,
            azimuth_deg: d.azimuth_deg(),
            elevation_deg: d.elevation_deg(),
            tol_deg,
        });
    }
    matched.sort_by_key(|&(ri, _)| ri);
    Ok(matched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dir(az: f64, el: f64) -> Direction {
        Direction::new(az, el).unwrap()
    }

    fn pulse_set(dirs: Vec<Direction>) -> HrirSet {
        let impulses = dirs
            .iter()
            .map(|_| {
                let mut left = vec![0.0; 256];
                left[64] = 1.0;
                StereoImpulse {
                    right: left.clone(),
                    left,
                }
            })
            .collect();
        HrirSet::new(48_000, dirs, impulses, None, "S", "test").unwrap()
    }

    #[test]
    fn azimuth_normalised() {
        assert_abs_diff_eq!(dir(-30.0, 0.0).azimuth_deg(), 330.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dir(720.0, 0.0).azimuth_deg(), 0.0, epsilon = 1e-12);
        assert!(Direction::new(0.0, 90.5).is_err());
        assert!(Direction::with_distance(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn great_circle_basic() {
        assert_abs_diff_eq!(great_circle_deg(&dir(0.0, 0.0), &dir(0.0, 0.0)), 0.0);
        assert_abs_diff_eq!(
            great_circle_deg(&dir(0.0, 0.0), &dir(180.0, 0.0)),
            180.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            great_circle_deg(&dir(90.0, 0.0), &dir(0.0, 90.0)),
            90.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn great_circle_pole_equivalence() {
        let a = dir(10.0, 90.0);
        let b = dir(250.0, 90.0);
        assert_abs_diff_eq!(great_circle_deg(&a, &b), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn great_circle_symmetric_triangle() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let a = dir(next() * 360.0, next() * 180.0 - 90.0);
            let b = dir(next() * 360.0, next() * 180.0 - 90.0);
            let c = dir(next() * 360.0, next() * 180.0 - 90.0);
            let ab = great_circle_deg(&a, &b);
            let ba = great_circle_deg(&b, &a);
            assert_abs_diff_eq!(ab, ba, epsilon = 1e-9);
            let bc = great_circle_deg(&b, &c);
            let ac = great_circle_deg(&a, &c);
            assert!(ac <= ab + bc + 1e-9);
        }
    }

    #[test]
    fn lateral_polar_examples() {
        let lp = to_lateral_polar(&dir(30.0, 0.0));
        assert_abs_diff_eq!(lp.lateral_deg(), 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lp.polar_deg(), 0.0, epsilon = 1e-9);

        let lp = to_lateral_polar(&dir(150.0, 0.0));
        assert_abs_diff_eq!(lp.lateral_deg(), 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lp.polar_deg(), 180.0, epsilon = 1e-9);

        let lp = to_lateral_polar(&dir(0.0, 45.0));
        assert_abs_diff_eq!(lp.lateral_deg(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(lp.polar_deg(), 45.0, epsilon = 1e-9);
    }

    #[test]
    fn lateral_polar_inverse_examples() {
        let d = from_lateral_polar(&LateralPolar::new(30.0, 0.0).unwrap());
        assert_abs_diff_eq!(d.azimuth_deg(), 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.elevation_deg(), 0.0, epsilon = 1e-9);

        let d = from_lateral_polar(&LateralPolar::new(0.0, 180.0).unwrap());
        assert_abs_diff_eq!(d.azimuth_deg(), 180.0, epsilon = 1e-9);
        assert_abs_diff_eq!(d.elevation_deg(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn interaural_axis_degenerate() {
        let lp = to_lateral_polar(&dir(90.0, 0.0));
        assert!(lp.is_degenerate());
        assert_abs_diff_eq!(lp.polar_deg(), 0.0);
    }

    #[test]
    fn mirror_front_back_examples() {
        let m = dir(30.0, 0.0).mirror_front_back();
        assert_abs_diff_eq!(m.azimuth_deg(), 150.0);
        assert_abs_diff_eq!(m.elevation_deg(), 0.0);

        let m = dir(90.0, 20.0).mirror_front_back();
        assert_abs_diff_eq!(m.azimuth_deg(), 90.0);
        assert_abs_diff_eq!(m.elevation_deg(), 20.0);

        let m = dir(330.0, -10.0).mirror_front_back();
        assert_abs_diff_eq!(m.azimuth_deg(), 210.0);

        for az in [0.0, 17.0, 123.5, 359.0] {
            let d = dir(az, 5.0);
            let mm = d.mirror_front_back().mirror_front_back();
            assert_abs_diff_eq!(mm.azimuth_deg(), d.azimuth_deg(), epsilon = 1e-12);
        }
    }

    #[test]
    fn match_identity() {
        let set = pulse_set(vec![dir(0.0, 0.0), dir(90.0, 0.0), dir(180.0, 30.0)]);
        let pairs = match_directions(&set, &set, DEFAULT_DIRECTION_TOL_DEG).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn match_rotated_within_tolerance() {
        let reference = pulse_set(vec![dir(0.0, 0.0), dir(45.0, 0.0), dir(90.0, 0.0)]);
        let candidate = pulse_set(vec![dir(0.4, 0.0), dir(45.4, 0.0), dir(90.4, 0.0)]);
        let pairs = match_directions(&candidate, &reference, 0.5).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn match_missing_direction_names_it() {
        let reference = pulse_set(vec![dir(0.0, 0.0), dir(45.0, 0.0)]);
        let candidate = pulse_set(vec![dir(0.0, 0.0)]);
        let err = match_directions(&candidate, &reference, 0.5).unwrap_err();
        match err {
            ModelError::UnmatchedDirection {
                index, azimuth_deg, ..
            } => {
                assert_eq!(index, 1);
                assert_abs_diff_eq!(azimuth_deg, 45.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn set_invariants_enforced() {
        let dirs = vec![dir(0.0, 0.0), dir(0.05, 0.0)];
        let impulses = dirs
            .iter()
            .map(|_| StereoImpulse {
                left: vec![0.0; 256],
                right: vec![0.0; 256],
            })
            .collect();
        let err = HrirSet::new(48_000, dirs, impulses, None, "S", "x").unwrap_err();
        assert!(matches!(err, ModelError::DuplicateDirection { .. }));

        let err = HrirSet::new(
            48_000,
            vec![dir(0.0, 0.0)],
            vec![StereoImpulse {
                left: vec![0.0; 144],
                right: vec![0.0; 144],
            }],
            None,
            "S",
            "x",
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::ImpulseTooShort(144)));
    }

    #[test]
    fn wrap_signed() {
        assert_abs_diff_eq!(wrap_signed_deg(190.0), -170.0);
        assert_abs_diff_eq!(wrap_signed_deg(-190.0), 170.0);
        assert_abs_diff_eq!(wrap_signed_deg(180.0), 180.0);
        assert_abs_diff_eq!(wrap_signed_deg(540.0), 180.0);
    }
}
