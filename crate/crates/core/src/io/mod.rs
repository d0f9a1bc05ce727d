//! On-disk formats: the HRIR bundle container, behavioural response
//! logs, batch manifests, and the optional AES69 (SOFA) import adapter.
//!
//! Readers validate everything they load; an `HrirSet` coming out of
//! this module satisfies the same invariants as one built in memory.
//! Writers are bit-stable: the same value always serialises to the same
//! bytes.

pub mod bundle;
pub mod manifest;
pub mod response_log;
#[cfg(feature = "sofa")]
pub mod sofa;

pub use bundle::{read_bundle, write_bundle};
pub use manifest::BatchManifest;
pub use response_log::{read_response_log, write_response_log, ResponseLog, Trial};
