use std::fmt::Write as _;

use crate::scalar::Confidence;

use super::{DiceReport, EvalError};

/// Rows of Dice values with a shared column set and a per-row average.
#[derive(Debug, Clone, PartialEq)]
pub struct DiceTable<T> {
    corner: String,
    columns: Vec<String>,
    rows: Vec<(String, Vec<T>)>,
}

impl<T: Confidence> DiceTable<T> {
    pub fn new(
        corner: impl Into<String>,
        columns: Vec<String>,
        rows: Vec<(String, Vec<T>)>,
    ) -> Result<Self, EvalError> {
        if let Some((label, cells)) = rows.iter().find(|(_, c)| c.len() != columns.len()) {
            return Err(EvalError::InconsistentColumns {
                row: label.clone(),
                expected: columns.clone(),
                found: vec![format!("{} cells", cells.len())],
            });
        }
        Ok(Self {
            corner: corner.into(),
            columns,
            rows,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[(String, Vec<T>)] {
        &self.rows
    }

    pub fn cell(&self, row: usize, col: usize) -> T {
        self.rows[row].1[col]
    }

    /// Unweighted mean of each row's cells.
    pub fn row_averages(&self) -> Vec<T> {
        self.rows
            .iter()
            .map(|(_, cells)| cells.iter().copied().sum::<T>() / T::from_count(cells.len()))
            .collect()
    }

    /// Aligned plain text, values as percentages with two decimals.
    pub fn render(&self) -> String {
        let header: Vec<&str> = std::iter::once(self.corner.as_str())
            .chain(self.columns.iter().map(String::as_str))
            .chain(std::iter::once("AVG"))
            .collect();
        let averages = self.row_averages();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .zip(&averages)
            .map(|((label, cells), &avg)| {
                std::iter::once(label.clone())
                    .chain(
                        cells
                            .iter()
                            .chain(std::iter::once(&avg))
                            .map(|&v| percent(v)),
                    )
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(header[c].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();

        let mut out = String::new();
        let mut line = |cells: &mut dyn Iterator<Item = &str>| {
            let mut parts = Vec::new();
            for (c, cell) in cells.enumerate() {
                if c == 0 {
                    parts.push(format!("{cell:<w$}", w = widths[0]));
                } else {
                    parts.push(format!("{cell:>w$}", w = widths[c]));
                }
            }
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut header.iter().copied());
        for row in &body {
            line(&mut row.iter().map(String::as_str));
        }
        out
    }
}

fn percent<T: Confidence>(v: T) -> String {
    format!("{:.2}", v.to_f64().unwrap_or(f64::NAN) * 100.0)
}

/// One row per method, one column per source domain holding its
/// source-to-rest mean.
pub fn cross_domain_table<T: Confidence>(
    rows: &[(String, Vec<DiceReport<T>>)],
) -> Result<DiceTable<T>, EvalError> {
    let (_, first) = rows.first().ok_or(EvalError::EmptyInput)?;
    if first.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let columns: Vec<String> = first.iter().map(|r| r.source_domain().to_owned()).collect();
    let mut out = Vec::with_capacity(rows.len());
    for (label, reports) in rows {
        let found: Vec<String> = reports
            .iter()
            .map(|r| r.source_domain().to_owned())
            .collect();
        if found != columns {
            return Err(EvalError::InconsistentColumns {
                row: label.clone(),
                expected: columns,
                found,
            });
        }
        out.push((
            label.clone(),
            reports.iter().map(|r| r.source_to_rest()).collect(),
        ));
    }
    DiceTable::new(
        "Method",
        columns.iter().map(|c| format!("{c} to Rest")).collect(),
        out,
    )
}

/// Threshold sweep: one row per `theta2`, one column per source configuration.
pub fn sweep_report<T: Confidence>(
    runs: &[(T, Vec<DiceReport<T>>)],
) -> Result<DiceTable<T>, EvalError> {
    let rows: Vec<(String, Vec<DiceReport<T>>)> = runs
        .iter()
        .map(|(theta, reports)| (format!("theta2={theta}"), reports.clone()))
        .collect();
    cross_domain_table(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{aggregate, CaseScore};

    fn report(source: &str, cells: &[(&str, f64)]) -> DiceReport<f64> {
        aggregate(
            cells
                .iter()
                .map(|(t, d)| CaseScore {
                    case_id: format!("{t}/0"),
                    source_domain: source.into(),
                    target_domain: (*t).into(),
                    dice: *d,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_sweep_entry() {
        let r = report("A", &[("B", 0.8), ("C", 0.6)]);
        let t = sweep_report(&[(0.5, vec![r.clone()])]).unwrap();
        assert_eq!(t.rows().len(), 1);
        assert_eq!(t.columns().len(), 1);
        assert_eq!(t.cell(0, 0), r.source_to_rest());
    }

    #[test]
    fn paper_sweep_points_are_rows() {
        let runs: Vec<(f64, Vec<DiceReport<f64>>)> = [0.5, 0.75, 0.9]
            .into_iter()
            .map(|th| (th, vec![report("A", &[("B", 1.0 - th / 2.0)])]))
            .collect();
        let t = sweep_report(&runs).unwrap();
        let labels: Vec<&str> = t.rows().iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["theta2=0.5", "theta2=0.75", "theta2=0.9"]);
        assert!(t.render().contains("theta2=0.75"));
    }

    #[test]
    fn mismatched_columns_rejected() {
        let rows = vec![
            ("x".to_string(), vec![report("A", &[("B", 0.5)])]),
            ("y".to_string(), vec![report("B", &[("A", 0.5)])]),
        ];
        assert!(matches!(
            cross_domain_table(&rows),
            Err(EvalError::InconsistentColumns { .. })
        ));
        assert_eq!(sweep_report::<f64>(&[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn render_alignment() {
        let r = report("A", &[("B", 0.5), ("C", 0.75)]);
        let text = r.table().render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("Source"));
        assert!(lines[0].ends_with("AVG"));
        assert!(lines[1].starts_with("A to Rest"));
        assert!(lines[1].ends_with("62.50"));
        assert!(lines[1].contains("50.00") && lines[1].contains("75.00"));
    }
}
