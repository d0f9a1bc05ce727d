//! AES69 (SOFA) import adapter for `SimpleFreeFieldHRIR` containers.
//!
//! Optional: enabled by the `sofa` feature and backed by the system HDF5
//! library. Reads the datasets and attributes common SOFA writers emit
//! (variable-length string attributes); import only, no SOFA output.

use std::path::Path;

use hdf5::types::{VarLenAscii, VarLenUnicode};
use thiserror::Error;

use crate::model::{Direction, HrirSet, ModelError, StereoImpulse};

#[derive(Debug, Error)]
pub enum SofaError {
    #[error("unsupported SOFA convention: {0}")]
    UnsupportedConvention(String),
    #[error("missing SOFA variable or attribute: {0}")]
    MissingVariable(String),
    #[error("malformed SOFA file: {0}")]
    Malformed(String),
    #[error(transparent)]
    InvalidSet(#[from] ModelError),
}

/// Azimuth sign convention of the source file. AES69 specifies
/// counterclockwise-positive; the hint exists so mirrored data can be
/// ingested without silent left/right flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AzimuthConvention {
    #[default]
    CounterclockwisePositive,
    ClockwisePositive,
}

fn read_string_attr(file: &hdf5::File, name: &str) -> Result<String, SofaError> {
    let attr = file
        .attr(name)
        .map_err(|_| SofaError::MissingVariable(format!("global attribute {name}")))?;
    if let Ok(v) = attr.read_scalar::<VarLenUnicode>() {
        return Ok(v.to_string());
    }
    attr.read_scalar::<VarLenAscii>()
        .map(|v| v.to_string())
        .map_err(|e| SofaError::Malformed(format!("attribute {name}: {e}")))
}

/// Imports a `SimpleFreeFieldHRIR` SOFA file as an [`HrirSet`].
pub fn import_sofa(path: &Path, convention_hint: AzimuthConvention) -> Result<HrirSet, SofaError> {
    let file = hdf5::File::open(path)
        .map_err(|e| SofaError::Malformed(format!("{}: {e}", path.display())))?;

    let conventions = read_string_attr(&file, "SOFAConventions")?;
    if conventions != "SimpleFreeFieldHRIR" {
        return Err(SofaError::UnsupportedConvention(format!(
            "SOFAConventions {conventions:?} (expected \"SimpleFreeFieldHRIR\")"
        )));
    }

    let ir = file
        .dataset("Data.IR")
        .map_err(|_| SofaError::MissingVariable("Data.IR".into()))?;
    let shape = ir.shape();
    if shape.len() != 3 {
        return Err(SofaError::Malformed(format!(
            "Data.IR has rank {}, expected 3 (measurements × receivers × samples)",
            shape.len()
        )));
    }
    let (m, r, n) = (shape[0], shape[1], shape[2]);
    if r != 2 {
        return Err(SofaError::UnsupportedConvention(format!(
            "{r} receivers (expected 2)"
        )));
    }
    let samples = ir
        .read_raw::<f64>()
        .map_err(|e| SofaError::Malformed(format!("Data.IR: {e}")))?;
    if samples.len() != m * r * n {
        return Err(SofaError::Malformed(format!(
            "Data.IR has {} values for shape {m}×{r}×{n}",
            samples.len()
        )));
    }

    let fs_ds = file
        .dataset("Data.SamplingRate")
        .map_err(|_| SofaError::MissingVariable("Data.SamplingRate".into()))?;
    let fs_values = fs_ds
        .read_raw::<f64>()
        .map_err(|e| SofaError::Malformed(format!("Data.SamplingRate: {e}")))?;
    let fs = *fs_values
        .first()
        .ok_or_else(|| SofaError::MissingVariable("Data.SamplingRate".into()))?;
    if !(fs.is_finite() && fs > 0.0 && fs.fract() == 0.0) {
        return Err(SofaError::Malformed(format!("sampling rate {fs}")));
    }

    let source_pos = file
        .dataset("SourcePosition")
        .map_err(|_| SofaError::MissingVariable("SourcePosition".into()))?;
    if let Ok(attr) = source_pos.attr("Type") {
        let kind = attr
            .read_scalar::<VarLenUnicode>()
            .map(|v| v.to_string())
            .or_else(|_| attr.read_scalar::<VarLenAscii>().map(|v| v.to_string()))
            .unwrap_or_default();
        if !kind.is_empty() && kind != "spherical" {
            return Err(SofaError::UnsupportedConvention(format!(
                "SourcePosition Type {kind:?} (expected \"spherical\")"
            )));
        }
    }
    let pos_shape = source_pos.shape();
    if pos_shape.len() != 2 || pos_shape[0] != m || pos_shape[1] != 3 {
        return Err(SofaError::Malformed(format!(
            "SourcePosition shape {pos_shape:?}, expected [{m}, 3]"
        )));
    }
    let pos = source_pos
        .read_raw::<f64>()
        .map_err(|e| SofaError::Malformed(format!("SourcePosition: {e}")))?;

    let mut directions = Vec::with_capacity(m);
    for i in 0..m {
        let mut az = pos[i * 3];
        let el = pos[i * 3 + 1];
        let dist = pos[i * 3 + 2];
        if convention_hint == AzimuthConvention::ClockwisePositive {
            az = -az;
        }
        directions.push(
            Direction::with_distance(az, el, dist)
                .map_err(|e| SofaError::Malformed(format!("SourcePosition row {i}: {e}")))?,
        );
    }

    let mut impulses = Vec::with_capacity(m);
    for i in 0..m {
        let base = i * 2 * n;
        impulses.push(StereoImpulse {
            left: samples[base..base + n].to_vec(),
            right: samples[base + n..base + 2 * n].to_vec(),
        });
    }

    let subject_id = read_string_attr(&file, "GLOBAL_ListenerShortName").unwrap_or_default();

    Ok(HrirSet::new(
        fs as u32,
        directions,
        impulses,
        None,
        subject_id,
        "sofa-import",
    )?)
}
