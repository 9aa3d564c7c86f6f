use std::fmt::Write as _;

use super::{CorrelationMatrix, DescriptiveTable, ManipulationCheck, ReliabilityScreen, CONDITIONS};

fn condition_label(c: usize) -> String {
    let (task, level) = CONDITIONS[c];
    format!("{} {}", task.display_name(), level.as_str())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Aligns cells into columns; the first column is left-aligned.
fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - cell.chars().count();
            if c == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// One row per dimension with `mean,std,n` triples per condition.
pub fn descriptive_csv(table: &DescriptiveTable) -> String {
    let mut out = String::from("dimension");
    for (task, level) in CONDITIONS {
        for stat in ["mean", "std", "n"] {
            let _ = write!(out, ",{}_{}_{}", task.as_str(), level.as_str(), stat);
        }
    }
    out.push('\n');
    for (dim, cells) in &table.rows {
        out.push_str(dim.label());
        for cell in cells {
            match cell {
                Some(d) => {
                    let _ = write!(out, ",{},{},{}", d.mean, opt(d.std), d.n);
                }
                None => out.push_str(",,,0"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn descriptive_text(table: &DescriptiveTable) -> String {
    let mut rows = vec![std::iter::once("Measure".to_string())
        .chain((0..CONDITIONS.len()).map(condition_label))
        .collect::<Vec<_>>()];
    for (dim, cells) in &table.rows {
        let mut row = vec![dim.label().to_string()];
        for cell in cells {
            row.push(match cell {
                Some(d) => match d.std {
                    Some(s) => format!("{:.2}±{:.2}", d.mean, s),
                    None => format!("{:.2}±-", d.mean),
                },
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }
    let mut out = String::from("Descriptive analysis (Mean±Std) per condition.\n\n");
    out.push_str(&align(&rows));
    out
}

/// Long format: one line per unordered pair, diagonal included.
pub fn correlation_csv(m: &CorrelationMatrix) -> String {
    let mut out = String::from("row,column,r,p,n,stars\n");
    for i in 0..m.labels.len() {
        for j in i..m.labels.len() {
            let c = &m.cells[i][j];
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                m.labels[i],
                m.labels[j],
                opt(c.r),
                opt(c.p),
                c.n,
                c.stars()
            );
        }
    }
    out
}

/// Lower-triangular matrix with two decimals and significance stars.
pub fn correlation_text(m: &CorrelationMatrix) -> String {
    let k = m.labels.len();
    let mut rows = vec![std::iter::once(String::new())
        .chain((1..=k).map(|i| format!("({i})")))
        .collect::<Vec<_>>()];
    for i in 0..k {
        let mut row = vec![format!("({}) {}", i + 1, m.labels[i])];
        for j in 0..=i {
            let c = &m.cells[i][j];
            row.push(match c.r {
                Some(r) if i == j => format!("{r:.0}"),
                Some(r) => format!("{r:.2}{}", c.stars()),
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }
    let mut out = format!("{}\n(*) p<.05, (**) p<.001\n\n", m.title);
    out.push_str(&align(&rows));
    out
}

pub fn reliability_csv(screen: &ReliabilityScreen) -> String {
    let mut out = String::from("dimension,alpha,n,retained\n");
    for e in &screen.entries {
        let _ = writeln!(out, "{},{},{},{}", e.dimension.label(), opt(e.alpha), e.n, e.retained);
    }
    out
}

pub fn reliability_text(screen: &ReliabilityScreen) -> String {
    let mut rows = vec![vec![
        "Dimension".to_string(),
        "alpha".to_string(),
        "n".to_string(),
        "decision".to_string(),
    ]];
    for e in &screen.entries {
        rows.push(vec![
            e.dimension.label().to_string(),
            e.alpha.map_or("-".to_string(), |a| format!("{a:.2}")),
            e.n.to_string(),
            if e.retained { "retained" } else { "excluded" }.to_string(),
        ]);
    }
    let mut out = format!("Cronbach's alpha over six conditions, threshold {}\n\n", screen.threshold);
    out.push_str(&align(&rows));
    out
}

pub fn checks_csv(checks: &[ManipulationCheck]) -> String {
    let mut out = String::from("task,measure,level_a,level_b,mean_a,mean_b,t,df,p,n,degenerate\n");
    for c in checks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.task,
            c.measure,
            c.a,
            c.b,
            c.mean_a,
            c.mean_b,
            c.result.statistic,
            c.result.df,
            c.result.p_value,
            c.result.n,
            c.result.degenerate
        );
    }
    out
}

pub fn checks_text(checks: &[ManipulationCheck]) -> String {
    let mut rows = vec![["Task", "Measure", "Comparison", "M(a)", "M(b)", "t(df)", "p"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for c in checks {
        rows.push(vec![
            c.task.display_name().to_string(),
            c.measure.clone(),
            format!("{} vs {}", c.a, c.b),
            format!("{:.2}", c.mean_a),
            format!("{:.2}", c.mean_b),
            format!("t({}) = {:.2}", c.result.df, c.result.statistic),
            format!("{:.4}{}", c.result.p_value, super::stars(c.result.p_value)),
        ]);
    }
    let mut out = String::from("Paired t-tests between load levels\n\n");
    out.push_str(&align(&rows));
    out
}
