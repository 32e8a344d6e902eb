//! Machine-readable verification reports (CSV and JSON).

use crate::error::{Result, SereError};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str =
    "epsilon,n_replicas,mc_estimate,mc_std_err,theory_value,oracle_value,abs_error,ks_p_value,verdict";

/// One ladder entry. For `lln` the `epsilon` column carries the horizon
/// `T`, for `ruin` the initial capital `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub n_replicas: usize,
    pub mc_estimate: f64,
    pub mc_std_err: f64,
    pub theory_value: f64,
    pub oracle_value: f64,
    pub abs_error: f64,
    pub ks_p_value: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl VerificationReport {
    /// CSV with the fixed column set and a trailing newline; an empty
    /// report renders as the header line only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.epsilon,
                r.n_replicas,
                r.mc_estimate,
                r.mc_std_err,
                r.theory_value,
                r.oracle_value,
                r.abs_error,
                r.ks_p_value,
                r.verdict
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| SereError::InvalidConfig(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Csv => Ok(self.to_csv()),
            ReportFormat::Json => self.to_json(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SereError::InvalidConfig(e.to_string()))
    }
}

/// Pass/fail labels used in the verdict column.
pub fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        VerificationReport {
            kind: "lln".into(),
            seed: 42,
            rows: vec![ReportRow {
                epsilon: 0.2,
                n_replicas: 100,
                mc_estimate: 1.98,
                mc_std_err: 0.01,
                theory_value: 2.0,
                oracle_value: 2.0,
                abs_error: 0.02,
                ks_p_value: 0.5,
                verdict: "pass".into(),
            }],
            passed: true,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = VerificationReport { kind: "lln".into(), seed: 0, rows: vec![], passed: true };
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_csv() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "0.2,100,1.98,0.01,2,2,0.02,0.5,pass");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_round_trips() {
        let r = sample();
        let json = r.to_json().unwrap();
        assert!(json.ends_with('\n'));
        assert_eq!(VerificationReport::from_json(&json).unwrap(), r);
    }
}
