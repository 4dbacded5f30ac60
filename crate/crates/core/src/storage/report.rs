use std::fs;
use std::path::Path;

use crate::eval::DiceReport;

use super::{io_err, StorageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// JSON, readable back with [`read_report`].
    Structured,
    /// Aligned percentage table.
    Text,
}

pub fn render_report(report: &DiceReport<f64>, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => report.table().render(),
    }
}

pub fn write_report(
    path: &Path,
    report: &DiceReport<f64>,
    format: ReportFormat,
) -> Result<(), StorageError> {
    fs::write(path, render_report(report, format)).map_err(io_err(path))
}

pub fn read_report(path: &Path) -> Result<DiceReport<f64>, StorageError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StorageError::MalformedJson(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{aggregate, CaseScore};

    fn report(cells: &[(&str, f64)]) -> DiceReport<f64> {
        aggregate(
            cells
                .iter()
                .enumerate()
                .map(|(i, (t, d))| CaseScore {
                    case_id: format!("{t}/{i}"),
                    source_domain: "A".into(),
                    target_domain: (*t).into(),
                    dice: *d,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn singleton_text_has_one_row_one_domain() {
        let text = render_report(&report(&[("B", 0.7)]), ReportFormat::Text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["Source", "B", "AVG"]
        );
        assert!(lines[1].ends_with("70.00"));
    }

    #[test]
    fn six_domain_avg_is_mean_of_cells() {
        let domains = [
            ("B", 0.61),
            ("C", 0.72),
            ("D", 0.83),
            ("E", 0.55),
            ("F", 0.97),
            ("G", 0.44),
        ];
        let text = render_report(&report(&domains), ReportFormat::Text);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
        // label is "A to Rest", then 6 domain cells, then AVG
        let cells: Vec<f64> = row[3..].iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 7);
        let mean = cells[..6].iter().sum::<f64>() / 6.0;
        assert!((mean - cells[6]).abs() < 0.01);
    }

    #[test]
    fn structured_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        let r = report(&[("B", 0.1), ("C", 2.0 / 3.0), ("C", 0.3)]);
        write_report(&p, &r, ReportFormat::Structured).unwrap();
        assert_eq!(read_report(&p).unwrap(), r);
    }
}
