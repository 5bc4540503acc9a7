use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One evaluation point of a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: usize,
    pub classes: usize,
    pub examples: usize,
    pub accuracy: f64,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub method: String,
    pub rows: Vec<StageRow>,
    /// Copy of the last row.
    pub summary: Option<StageRow>,
}

impl ScenarioReport {
    pub fn new(scenario: impl Into<String>, method: impl Into<String>) -> Self {
        ScenarioReport {
            scenario: scenario.into(),
            method: method.into(),
            rows: Vec::new(),
            summary: None,
        }
    }

    pub fn push(&mut self, row: StageRow) {
        self.summary = Some(row.clone());
        self.rows.push(row);
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.summary.as_ref().map(|r| r.accuracy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

pub const COLUMNS: [&str; 5] = ["stage", "classes", "examples", "accuracy", "bytes"];

pub fn report_emit(report: &ScenarioReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Csv => {
            let mut s = COLUMNS.join(",");
            s.push('\n');
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.6},{}",
                    r.stage, r.classes, r.examples, r.accuracy, r.bytes
                );
            }
            s.into_bytes()
        }
        ReportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(report).expect("report serializes");
            v.push(b'\n');
            v
        }
        ReportFormat::Text => {
            let mut s = format!(
                "{:>6}  {:>8}  {:>9}  {:>9}  {:>12}\n",
                COLUMNS[0], COLUMNS[1], COLUMNS[2], COLUMNS[3], COLUMNS[4]
            );
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{:>6}  {:>8}  {:>9}  {:>8.2}%  {:>12}",
                    r.stage,
                    r.classes,
                    r.examples,
                    r.accuracy * 100.0,
                    r.bytes
                );
            }
            s.into_bytes()
        }
    }
}

pub fn parse_json_report(bytes: &[u8]) -> Result<ScenarioReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::CorruptPayload(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> ScenarioReport {
        let mut r = ScenarioReport::new("ci", "tilda");
        r.push(StageRow {
            stage: 1,
            classes: 1,
            examples: 50,
            accuracy: 1.0,
            bytes: 1280,
        });
        r.push(StageRow {
            stage: 2,
            classes: 2,
            examples: 100,
            accuracy: 0.97,
            bytes: 2560,
        });
        r.push(StageRow {
            stage: 3,
            classes: 3,
            examples: 150,
            accuracy: 0.9533333333333334,
            bytes: 3840,
        });
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = ScenarioReport::new("ei", "nn");
        assert_eq!(
            report_emit(&r, ReportFormat::Csv),
            b"stage,classes,examples,accuracy,bytes\n"
        );
        let text = String::from_utf8(report_emit(&r, ReportFormat::Text)).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn csv_golden() {
        let expected = "stage,classes,examples,accuracy,bytes\n\
                        1,1,50,1.000000,1280\n\
                        2,2,100,0.970000,2560\n\
                        3,3,150,0.953333,3840\n";
        assert_eq!(
            String::from_utf8(report_emit(&fixture(), ReportFormat::Csv)).unwrap(),
            expected
        );
    }

    #[test]
    fn text_golden() {
        let expected = " stage   classes   examples   accuracy         bytes\n     \
                        1         1         50    100.00%          1280\n     \
                        2         2        100     97.00%          2560\n     \
                        3         3        150     95.33%          3840\n";
        assert_eq!(
            String::from_utf8(report_emit(&fixture(), ReportFormat::Text)).unwrap(),
            expected
        );
    }

    #[test]
    fn json_round_trip() {
        let r = fixture();
        let bytes = report_emit(&r, ReportFormat::Json);
        assert_eq!(parse_json_report(&bytes).unwrap(), r);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["summary"]["stage"], 3);
    }
}
