//! The HRIR bundle container: a human-readable header followed by raw
//! float32 little-endian impulse data.
//!
//! Layout: the magic line `HRIRB1`, `key value` header lines, a blank
//! line, then the payload of D × 2 × N × 4 bytes ordered
//! direction-major, left ear before right. Header keys are documented in
//! `docs/formats.md`. Numeric angle fields use shortest round-trip
//! decimal formatting, so write → read → write is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::{Direction, HrirSet, ModelError, StereoImpulse};

pub const MAGIC: &str = "HRIRB1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("unsupported bundle version {0} (supported: {FORMAT_VERSION})")]
    UnsupportedVersion(String),
    #[error(
        "payload size mismatch at byte offset {payload_offset}: expected {expected} bytes \
         (D={directions} × 2 ears × N={impulse_length} × 4), found {actual}"
    )]
    PayloadSizeMismatch {
        expected: usize,
        actual: usize,
        payload_offset: usize,
        directions: usize,
        impulse_length: usize,
    },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bundle violates set invariants: {0}")]
    InvalidSet(#[from] ModelError),
}

struct HeaderData {
    version: u32,
    sample_rate_hz: u32,
    subject_id: String,
    label: String,
    impulse_length: usize,
    directions: Vec<Direction>,
    itd_shifts: Option<Vec<(i32, i32)>>,
}

/// Serialises a set into bundle bytes.
pub fn bundle_bytes(set: &HrirSet) -> Vec<u8> {
    let mut header = String::new();
    let _ = writeln!(header, "{MAGIC}");
    let _ = writeln!(header, "version {FORMAT_VERSION}");
    let _ = writeln!(header, "sample_rate_hz {}", set.sample_rate_hz());
    let _ = writeln!(header, "subject_id {}", set.subject_id());
    let _ = writeln!(header, "label {}", set.label());
    let _ = writeln!(header, "impulse_length {}", set.impulse_len());
    let _ = writeln!(header, "byte_order little_endian");
    let _ = writeln!(header, "sample_encoding float32");
    let _ = writeln!(header, "direction_count {}", set.len());
    for (i, d) in set.directions().iter().enumerate() {
        let _ = writeln!(
            header,
            "direction {i} {} {} {}",
            d.azimuth_deg(),
            d.elevation_deg(),
            d.distance_m()
        );
    }
    if let Some(shifts) = set.itd_shifts() {
        for (i, (l, r)) in shifts.iter().enumerate() {
            let _ = writeln!(header, "itd_shift {i} {l} {r}");
        }
    }
    header.push('\n');

    let mut bytes = header.into_bytes();
    bytes.reserve(set.len() * 2 * set.impulse_len() * 4);
    for imp in set.impulses() {
        for channel in [&imp.left, &imp.right] {
            for &v in channel.iter() {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    bytes
}

pub fn write_bundle(set: &HrirSet, path: &Path) -> Result<(), BundleError> {
    std::fs::write(path, bundle_bytes(set)).map_err(|source| BundleError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_bundle(path: &Path) -> Result<HrirSet, BundleError> {
    let bytes = std::fs::read(path).map_err(|source| BundleError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    parse_bundle(&bytes)
}

pub fn parse_bundle(bytes: &[u8]) -> Result<HrirSet, BundleError> {
    let (header, payload, payload_offset) = split_header(bytes)?;
    let data = parse_header(header)?;

    let expected = data.directions.len() * 2 * data.impulse_length * 4;
    if payload.len() != expected {
        return Err(BundleError::PayloadSizeMismatch {
            expected,
            actual: payload.len(),
            payload_offset,
            directions: data.directions.len(),
            impulse_length: data.impulse_length,
        });
    }

    let n = data.impulse_length;
    let mut impulses = Vec::with_capacity(data.directions.len());
    let mut cursor = payload;
    for _ in 0..data.directions.len() {
        let mut channels = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for channel in channels.iter_mut() {
            for _ in 0..n {
                let (sample, rest) = cursor.split_at(4);
                channel.push(f32::from_le_bytes(sample.try_into().expect("4 bytes")) as f64);
                cursor = rest;
            }
        }
        let [left, right] = channels;
        impulses.push(StereoImpulse { left, right });
    }

    Ok(HrirSet::new(
        data.sample_rate_hz,
        data.directions,
        impulses,
        data.itd_shifts,
        data.subject_id,
        data.label,
    )?)
}

/// Splits raw bytes into the UTF-8 header (without the terminating blank
/// line) and the payload, returning the payload's byte offset.
fn split_header(bytes: &[u8]) -> Result<(&str, &[u8], usize), BundleError> {
    let sep = bytes
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| BundleError::MalformedHeader {
            line: 0,
            reason: "missing blank-line header terminator".into(),
        })?;
    let header = std::str::from_utf8(&bytes[..sep + 1]).map_err(|e| {
        BundleError::MalformedHeader {
            line: 0,
            reason: format!("header is not UTF-8: {e}"),
        }
    })?;
    Ok((header, &bytes[sep + 2..], sep + 2))
}

fn parse_header(header: &str) -> Result<HeaderData, BundleError> {
    let err = |line: usize, reason: String| BundleError::MalformedHeader { line, reason };
    let mut lines = header.lines().enumerate();

    let (_, magic) = lines
        .next()
        .ok_or_else(|| err(1, "empty header".into()))?;
    if magic != MAGIC {
        return Err(err(1, format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }

    let mut version: Option<u32> = None;
    let mut sample_rate_hz: Option<u32> = None;
    let mut subject_id: Option<String> = None;
    let mut label: Option<String> = None;
    let mut impulse_length: Option<usize> = None;
    let mut direction_count: Option<usize> = None;
    let mut directions: Vec<Direction> = Vec::new();
    let mut itd_shifts: Vec<(i32, i32)> = Vec::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        let (key, value) = line.split_once(' ').unwrap_or((line, ""));
        match key {
            "version" => {
                if value != FORMAT_VERSION.to_string() {
                    return Err(BundleError::UnsupportedVersion(value.to_string()));
                }
                version = Some(FORMAT_VERSION);
            }
            "sample_rate_hz" => {
                sample_rate_hz = Some(value.parse().map_err(|e| {
                    err(line_no, format!("sample_rate_hz {value:?}: {e}"))
                })?);
            }
            "subject_id" => subject_id = Some(value.to_string()),
            "label" => label = Some(value.to_string()),
            "impulse_length" => {
                impulse_length = Some(value.parse().map_err(|e| {
                    err(line_no, format!("impulse_length {value:?}: {e}"))
                })?);
            }
            "byte_order" => {
                if value != "little_endian" {
                    return Err(err(line_no, format!("unsupported byte_order {value:?}")));
                }
            }
            "sample_encoding" => {
                if value != "float32" {
                    return Err(err(line_no, format!("unsupported sample_encoding {value:?}")));
                }
            }
            "direction_count" => {
                direction_count = Some(value.parse().map_err(|e| {
                    err(line_no, format!("direction_count {value:?}: {e}"))
                })?);
            }
            "direction" => {
                let fields: Vec<&str> = value.split(' ').collect();
                if fields.len() != 4 {
                    return Err(err(
                        line_no,
                        format!("direction needs `index az el dist`, got {value:?}"),
                    ));
                }
                let index: usize = fields[0]
                    .parse()
                    .map_err(|e| err(line_no, format!("direction index: {e}")))?;
                if index != directions.len() {
                    return Err(err(
                        line_no,
                        format!("direction index {index} out of order (expected {})", directions.len()),
                    ));
                }
                let parse_f = |s: &str, what: &str| -> Result<f64, BundleError> {
                    s.parse()
                        .map_err(|e| err(line_no, format!("direction {what} {s:?}: {e}")))
                };
                let az = parse_f(fields[1], "azimuth")?;
                let el = parse_f(fields[2], "elevation")?;
                let dist = parse_f(fields[3], "distance")?;
                directions.push(
                    Direction::with_distance(az, el, dist)
                        .map_err(|e| err(line_no, e.to_string()))?,
                );
            }
            "itd_shift" => {
                let fields: Vec<&str> = value.split(' ').collect();
                if fields.len() != 3 {
                    return Err(err(
                        line_no,
                        format!("itd_shift needs `index left right`, got {value:?}"),
                    ));
                }
                let index: usize = fields[0]
                    .parse()
                    .map_err(|e| err(line_no, format!("itd_shift index: {e}")))?;
                if index != itd_shifts.len() {
                    return Err(err(line_no, format!("itd_shift index {index} out of order")));
                }
                let l: i32 = fields[1]
                    .parse()
                    .map_err(|e| err(line_no, format!("itd_shift left: {e}")))?;
                let r: i32 = fields[2]
                    .parse()
                    .map_err(|e| err(line_no, format!("itd_shift right: {e}")))?;
                itd_shifts.push((l, r));
            }
            other => {
                return Err(err(line_no, format!("unknown header key {other:?}")));
            }
        }
    }

    let version = version.ok_or_else(|| err(0, "missing version".into()))?;
    let sample_rate_hz = sample_rate_hz.ok_or_else(|| err(0, "missing sample_rate_hz".into()))?;
    let impulse_length = impulse_length.ok_or_else(|| err(0, "missing impulse_length".into()))?;
    let direction_count =
        direction_count.ok_or_else(|| err(0, "missing direction_count".into()))?;
    if directions.len() != direction_count {
        return Err(err(
            0,
            format!(
                "direction_count {} does not match {} direction lines",
                direction_count,
                directions.len()
            ),
        ));
    }
    if !itd_shifts.is_empty() && itd_shifts.len() != direction_count {
        return Err(err(
            0,
            format!(
                "{} itd_shift lines for {} directions",
                itd_shifts.len(),
                direction_count
            ),
        ));
    }
    let _ = version;
    Ok(HeaderData {
        version: FORMAT_VERSION,
        sample_rate_hz,
        subject_id: subject_id.unwrap_or_default(),
        label: label.unwrap_or_default(),
        impulse_length,
        directions,
        itd_shifts: if itd_shifts.is_empty() {
            None
        } else {
            Some(itd_shifts)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_sphere_set, lattice_directions, GainLaw, SphereModelConfig};

    fn sample_set() -> HrirSet {
        let mut cfg = SphereModelConfig::new(lattice_directions(45, &[-30.0, 0.0, 30.0]));
        cfg.gain_law = GainLaw::CosineShadow;
        cfg.noise_seed = Some(17);
        generate_sphere_set(&cfg, "P0001", "PR synthetic").unwrap()
    }

    #[test]
    fn round_trip_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.hrirb");
        let set = sample_set();
        write_bundle(&set, &path).unwrap();
        let loaded = read_bundle(&path).unwrap();
        assert_eq!(loaded.sample_rate_hz(), set.sample_rate_hz());
        assert_eq!(loaded.subject_id(), "P0001");
        assert_eq!(loaded.label(), "PR synthetic");
        assert_eq!(loaded.len(), set.len());
        for (a, b) in loaded.directions().iter().zip(set.directions()) {
            assert_eq!(a.azimuth_deg(), b.azimuth_deg());
            assert_eq!(a.elevation_deg(), b.elevation_deg());
            assert_eq!(a.distance_m(), b.distance_m());
        }
        // Samples survive the f32 round trip bit-exactly once quantised.
        let requantised: Vec<f64> = set.impulse(3).left.iter().map(|&v| v as f32 as f64).collect();
        assert_eq!(loaded.impulse(3).left, requantised);

        // Writing the loaded set reproduces identical bytes.
        let bytes1 = bundle_bytes(&loaded);
        let path2 = dir.path().join("set2.hrirb");
        write_bundle(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path2).unwrap(), bytes1);
    }

    #[test]
    fn itd_shift_metadata_round_trips() {
        let set = sample_set();
        let shifts: Vec<(i32, i32)> = (0..set.len() as i32).map(|i| (-i, i * 2)).collect();
        let with_shifts = HrirSet::new(
            set.sample_rate_hz(),
            set.directions().to_vec(),
            set.impulses().to_vec(),
            Some(shifts.clone()),
            set.subject_id(),
            set.label(),
        )
        .unwrap();
        let parsed = parse_bundle(&bundle_bytes(&with_shifts)).unwrap();
        assert!(parsed.is_no_itd());
        assert_eq!(parsed.itd_shifts().unwrap(), shifts.as_slice());
    }

    #[test]
    fn truncated_payload_reports_sizes() {
        let set = sample_set();
        let mut bytes = bundle_bytes(&set);
        bytes.truncate(bytes.len() - 10);
        match parse_bundle(&bytes) {
            Err(BundleError::PayloadSizeMismatch {
                expected, actual, ..
            }) => {
                assert_eq!(expected, set.len() * 2 * set.impulse_len() * 4);
                assert_eq!(actual, expected - 10);
            }
            other => panic!("expected PayloadSizeMismatch, got {other:?}"),
        }
    }

    #[test]
    fn payload_byte_count_formula() {
        // Header says N=256, D=440: payload must be exactly 901,120 bytes.
        assert_eq!(440 * 2 * 256 * 4, 901_120);
    }

    #[test]
    fn unsupported_version_rejected() {
        let set = sample_set();
        let text = String::from_utf8(bundle_bytes(&set)[..200].to_vec());
        drop(text);
        let bytes = bundle_bytes(&set);
        let patched = String::from_utf8_lossy(&bytes[..40]).replace("version 1", "version 9");
        let mut all = patched.into_bytes();
        all.extend_from_slice(&bytes[40..]);
        assert!(matches!(
            parse_bundle(&all),
            Err(BundleError::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn corrupted_headers_error_not_panic() {
        let set = sample_set();
        let clean = bundle_bytes(&set);
        let header_len = clean
            .windows(2)
            .position(|w| w == b"\n\n")
            .unwrap();
        let mut state = 1u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state
        };
        let mut corrupted_rejects = 0usize;
        for _ in 0..500 {
            let mut bytes = clean.clone();
            let pos = (next() % header_len as u64) as usize;
            let value = (next() % 256) as u8;
            if bytes[pos] == value {
                continue;
            }
            bytes[pos] = value;
            match parse_bundle(&bytes) {
                Ok(parsed) => {
                    // A mutation inside free-text fields can still parse;
                    // the result must satisfy set invariants regardless.
                    assert!(parsed.len() > 0);
                }
                Err(_) => corrupted_rejects += 1,
            }
        }
        assert!(corrupted_rejects > 100);
    }

    #[test]
    fn missing_file_is_io_failure() {
        let err = read_bundle(Path::new("/nonexistent/place/set.hrirb")).unwrap_err();
        assert!(matches!(err, BundleError::IoFailure { .. }));
    }
}
