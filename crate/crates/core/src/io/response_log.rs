//! Behavioural response logs: delimited text with one row per trial.
//!
//! Format: UTF-8, header row
//! `participant,condition,trial,target_az,target_el,resp_az,resp_el`,
//! decimal degrees with `.` separator. (participant, condition, trial)
//! triples are unique.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::Direction;

pub const HEADER: &str = "participant,condition,trial,target_az,target_el,resp_az,resp_el";

#[derive(Debug, Error)]
pub enum ResponseLogError {
    #[error("parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("duplicate trial ({participant}, {condition}, {trial}) at line {line}")]
    DuplicateTrial {
        participant: String,
        condition: String,
        trial: u32,
        line: usize,
    },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One localisation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub participant: String,
    pub condition: String,
    pub trial_index: u32,
    pub target: Direction,
    pub response: Direction,
}

/// A validated set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseLog {
    trials: Vec<Trial>,
}

impl ResponseLog {
    /// Builds a log from trials, enforcing the uniqueness invariant.
    pub fn from_trials(trials: Vec<Trial>) -> Result<Self, ResponseLogError> {
        let mut seen = HashSet::new();
        for (i, t) in trials.iter().enumerate() {
            if !seen.insert((t.participant.clone(), t.condition.clone(), t.trial_index)) {
                return Err(ResponseLogError::DuplicateTrial {
                    participant: t.participant.clone(),
                    condition: t.condition.clone(),
                    trial: t.trial_index,
                    line: i + 2,
                });
            }
        }
        Ok(Self { trials })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    /// Distinct participants, sorted.
    pub fn participants(&self) -> Vec<String> {
        let mut v: Vec<String> = self.trials.iter().map(|t| t.participant.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Distinct conditions, sorted.
    pub fn conditions(&self) -> Vec<String> {
        let mut v: Vec<String> = self.trials.iter().map(|t| t.condition.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn read_response_log(path: &Path) -> Result<ResponseLog, ResponseLogError> {
    let text = std::fs::read_to_string(path).map_err(|source| ResponseLogError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    parse_response_log(&text)
}

pub fn parse_response_log(text: &str) -> Result<ResponseLog, ResponseLogError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| ResponseLogError::ParseError {
        line: 1,
        reason: "empty file".into(),
    })?;
    if header.trim_end() != HEADER {
        return Err(ResponseLogError::ParseError {
            line: 1,
            reason: format!("expected header {HEADER:?}, got {header:?}"),
        });
    }
    let mut trials = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(ResponseLogError::ParseError {
                line: line_no,
                reason: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let participant = fields[0].to_string();
        let condition = fields[1].to_string();
        let trial_index: u32 = fields[2].parse().map_err(|e| ResponseLogError::ParseError {
            line: line_no,
            reason: format!("trial {:?}: {e}", fields[2]),
        })?;
        let parse_deg = |s: &str, what: &str| -> Result<f64, ResponseLogError> {
            s.parse().map_err(|e| ResponseLogError::ParseError {
                line: line_no,
                reason: format!("{what} {s:?}: {e}"),
            })
        };
        let target = Direction::new(
            parse_deg(fields[3], "target_az")?,
            parse_deg(fields[4], "target_el")?,
        )
        .map_err(|e| ResponseLogError::ParseError {
            line: line_no,
            reason: format!("target: {e}"),
        })?;
        let response = Direction::new(
            parse_deg(fields[5], "resp_az")?,
            parse_deg(fields[6], "resp_el")?,
        )
        .map_err(|e| ResponseLogError::ParseError {
            line: line_no,
            reason: format!("response: {e}"),
        })?;
        if !seen.insert((participant.clone(), condition.clone(), trial_index)) {
            return Err(ResponseLogError::DuplicateTrial {
                participant,
                condition,
                trial: trial_index,
                line: line_no,
            });
        }
        trials.push(Trial {
            participant,
            condition,
            trial_index,
            target,
            response,
        });
    }
    Ok(ResponseLog { trials })
}

pub fn response_log_text(log: &ResponseLog) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for t in &log.trials {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.participant,
            t.condition,
            t.trial_index,
            t.target.azimuth_deg(),
            t.target.elevation_deg(),
            t.response.azimuth_deg(),
            t.response.elevation_deg()
        );
    }
    out
}

pub fn write_response_log(log: &ResponseLog, path: &Path) -> Result<(), ResponseLogError> {
    std::fs::write(path, response_log_text(log)).map_err(|source| ResponseLogError::IoFailure {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed_file_parses() {
        let text = "participant,condition,trial,target_az,target_el,resp_az,resp_el\n\
                    P01,Measured,0,0,0,5,2\n\
                    P01,Measured,1,45,30,50,28\n\
                    P02,PR,0,135,-15,130,-20\n";
        let log = parse_response_log(text).unwrap();
        assert_eq!(log.trials().len(), 3);
        assert_eq!(log.participants(), vec!["P01", "P02"]);
        assert_eq!(log.conditions(), vec!["Measured", "PR"]);
        assert_eq!(log.trials()[1].target.azimuth_deg(), 45.0);
    }

    #[test]
    fn invalid_elevation_names_line() {
        let text = "participant,condition,trial,target_az,target_el,resp_az,resp_el\n\
                    P01,Measured,0,0,0,5,2\n\
                    P01,Measured,1,45,120,50,28\n";
        match parse_response_log(text) {
            Err(ResponseLogError::ParseError { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("elevation"), "{reason}");
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_trial_rejected() {
        let text = "participant,condition,trial,target_az,target_el,resp_az,resp_el\n\
                    P01,Measured,5,0,0,5,2\n\
                    P01,Measured,5,45,30,50,28\n";
        match parse_response_log(text) {
            Err(ResponseLogError::DuplicateTrial {
                participant,
                condition,
                trial,
                line,
            }) => {
                assert_eq!(participant, "P01");
                assert_eq!(condition, "Measured");
                assert_eq!(trial, 5);
                assert_eq!(line, 3);
            }
            other => panic!("expected DuplicateTrial, got {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let text = "participant,condition,trial,target_az,target_el,resp_az,resp_el\n\
                    P01,Measured,0,12.5,-7.25,13.75,-6.5\n";
        let log = parse_response_log(text).unwrap();
        assert_eq!(response_log_text(&log), text);
    }

    #[test]
    fn bad_header_rejected() {
        let text = "participant,condition,trial\nP01,Measured,0\n";
        assert!(matches!(
            parse_response_log(text),
            Err(ResponseLogError::ParseError { line: 1, .. })
        ));
    }
}
