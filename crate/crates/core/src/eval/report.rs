use std::fmt::Write as _;
use std::str::FromStr;

use super::cv::EvaluationReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Text => "txt",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "txt" | "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::input(format!("unknown report format {s:?}"))),
        }
    }
}

fn chance_label(p: f64) -> String {
    let s = format!("{p:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn caption(report: &EvaluationReport) -> String {
    let classes = match report.scheme {
        super::ClassScheme::Multi => "easy, medium and hard",
        super::ClassScheme::Binary => "low and medium load",
    };
    format!(
        "Classification accuracy (Mean±Std, %) for {} ({}), participant-level nested cross-validation. The random chance level is {}%.",
        report.task.display_name(),
        classes,
        chance_label(report.chance_percent)
    )
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("model");
            for s in &report.subsets {
                let _ = write!(out, ",{}", s.label());
            }
            out.push('\n');
            for (m, kind) in report.models.iter().enumerate() {
                out.push_str(kind.label());
                for cell in &report.cells[m] {
                    match cell {
                        Some(c) => {
                            let _ = write!(out, ",{}±{}", c.mean, c.std);
                        }
                        None => out.push(','),
                    }
                }
                out.push('\n');
            }
            out
        }
        ReportFormat::Text => {
            let mut rows: Vec<Vec<String>> = vec![std::iter::once("Model".to_string())
                .chain(report.subsets.iter().map(|s| s.label().to_string()))
                .collect()];
            for (m, kind) in report.models.iter().enumerate() {
                let mut row = vec![kind.label().to_string()];
                for cell in &report.cells[m] {
                    row.push(match cell {
                        Some(c) => format!("{:.1}±{:.1}", c.mean, c.std),
                        None => "-".to_string(),
                    });
                }
                rows.push(row);
            }
            let widths: Vec<usize> = (0..rows[0].len())
                .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
                .collect();
            let mut out = String::new();
            out.push_str(&caption(report));
            out.push_str("\n\n");
            for row in &rows {
                let mut line = String::new();
                for (c, cell) in row.iter().enumerate() {
                    let pad = " ".repeat(widths[c] - cell.chars().count());
                    if c == 0 {
                        let _ = write!(line, "{cell}{pad}");
                    } else {
                        let _ = write!(line, "  {pad}{cell}");
                    }
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
            out
        }
    })
}

/// Parses the CSV rendering back into `(model, [(mean, std)])` rows.
pub fn parse_report_csv(text: &str) -> Result<Vec<(String, Vec<Option<(f64, f64)>>)>> {
    let bad = |m: &str| Error::input(format!("malformed report CSV: {m}"));
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    let width = header.split(',').count();
    lines
        .map(|line| {
            let mut fields = line.split(',');
            let model = fields.next().ok_or_else(|| bad("empty row"))?.to_string();
            let cells = fields
                .map(|f| {
                    if f.is_empty() {
                        return Ok(None);
                    }
                    let (m, s) = f.split_once('±').ok_or_else(|| bad(f))?;
                    Ok(Some((m.parse().map_err(|_| bad(f))?, s.parse().map_err(|_| bad(f))?)))
                })
                .collect::<Result<Vec<_>>>()?;
            if cells.len() + 1 != width {
                return Err(bad("row width differs from header"));
            }
            Ok((model, cells))
        })
        .collect()
}
