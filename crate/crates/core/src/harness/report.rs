use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::{ReportTable, SplitStats};
use super::grid::EvalRecord;
use crate::error::{Error, Result};
use crate::railsim::{HaltReason, StageFlags};

#[derive(Serialize, Deserialize)]
struct RecordRow {
    strategy: String,
    z_index: usize,
    x: f64,
    ood: bool,
    seed: u64,
    repeat: usize,
    score: u8,
    grasped: bool,
    uprighted: bool,
    bottom_on_shelf: bool,
    released_stable: bool,
    halt: String,
    steps_used: usize,
}

const RECORD_HEADER: [&str; 13] = [
    "strategy",
    "z_index",
    "x",
    "ood",
    "seed",
    "repeat",
    "score",
    "grasped",
    "uprighted",
    "bottom_on_shelf",
    "released_stable",
    "halt",
    "steps_used",
];

const TABLE_HEADER: [&str; 10] = [
    "strategy",
    "id_mean",
    "id_sd",
    "ood_mean",
    "ood_sd",
    "total_mean",
    "total_sd",
    "id_success",
    "ood_success",
    "total_success",
];

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Malformed {
            line: 0,
            message: format!("{}: {other:?}", path.display()),
        },
    }
}

pub fn write_records(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(RECORD_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let row = RecordRow {
            strategy: r.strategy.clone(),
            z_index: r.z_index,
            x: r.x,
            ood: r.ood,
            seed: r.seed,
            repeat: r.repeat,
            score: r.score,
            grasped: r.flags.grasped,
            uprighted: r.flags.uprighted,
            bottom_on_shelf: r.flags.bottom_on_shelf,
            released_stable: r.flags.released_stable,
            halt: r.halt.map(|h| h.to_string()).unwrap_or_default(),
            steps_used: r.steps_used,
        };
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<RecordRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let halt = match row.halt.as_str() {
            "" => None,
            "timeout" => Some(HaltReason::Timeout),
            "safety-violation" => Some(HaltReason::SafetyViolation),
            other => {
                return Err(Error::Malformed {
                    line: i + 2,
                    message: format!("unknown halt reason {other:?}"),
                })
            }
        };
        out.push(EvalRecord {
            strategy: row.strategy,
            z_index: row.z_index,
            x: row.x,
            ood: row.ood,
            seed: row.seed,
            repeat: row.repeat,
            score: row.score,
            flags: StageFlags {
                grasped: row.grasped,
                uprighted: row.uprighted,
                bottom_on_shelf: row.bottom_on_shelf,
                released_stable: row.released_stable,
            },
            halt,
            steps_used: row.steps_used,
        });
    }
    Ok(out)
}

fn fmt_mean(s: &Option<SplitStats>) -> String {
    s.map(|s| format!("{:.2}", s.mean)).unwrap_or_default()
}

fn fmt_sd(s: &Option<SplitStats>) -> String {
    s.map(|s| format!("{:.2}", s.sd)).unwrap_or_default()
}

fn fmt_success(s: &Option<SplitStats>) -> String {
    s.map(|s| format!("{:.1}%", 100.0 * s.success)).unwrap_or_default()
}

/// Means and SDs to two decimals, success rates as percentages to one
/// decimal. Absent splits are empty fields.
pub fn write_tables(table: &ReportTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TABLE_HEADER).map_err(|e| csv_err(path, e))?;
    for row in &table.rows {
        w.write_record([
            row.strategy.clone(),
            fmt_mean(&row.id),
            fmt_sd(&row.id),
            fmt_mean(&row.ood),
            fmt_sd(&row.ood),
            fmt_mean(&row.total),
            fmt_sd(&row.total),
            fmt_success(&row.id),
            fmt_success(&row.ood),
            fmt_success(&row.total),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Grouped bar chart of mean ± SD per strategy, ID and OOD side by side.
pub fn render_chart(table: &ReportTable) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const LEFT: f64 = 50.0;
    const BOTTOM: f64 = 320.0;
    const TOP: f64 = 30.0;
    let y = |v: f64| BOTTOM - (BOTTOM - TOP) * v / 4.0;
    let group_w = (W - LEFT - 20.0) / table.rows.len().max(1) as f64;
    let bar_w = group_w * 0.3;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{}" y2="{BOTTOM}" stroke="black"/>"#, W - 10.0);
    for tick in 0..=4 {
        let ty = y(f64::from(tick));
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{tick}</text>"#, LEFT - 6.0, ty + 4.0);
        let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{ty:.1}" x2="{}" y2="{ty:.1}" stroke="#ddd"/>"##, W - 10.0);
    }
    for (g, row) in table.rows.iter().enumerate() {
        let gx = LEFT + g as f64 * group_w + group_w * 0.2;
        for (k, (split, color, stats)) in [("ID", "#4c72b0", row.id), ("OOD", "#dd8452", row.ood)]
            .into_iter()
            .enumerate()
        {
            let Some(s) = stats else { continue };
            let x = gx + k as f64 * bar_w;
            let top = y(s.mean);
            let _ = writeln!(
                svg,
                r#"<rect class="bar" data-strategy="{}" data-split="{split}" x="{x:.1}" y="{top:.1}" width="{bar_w:.1}" height="{:.1}" fill="{color}"/>"#,
                row.strategy,
                BOTTOM - top
            );
            let cx = x + bar_w / 2.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
                y((s.mean - s.sd).max(0.0)),
                y((s.mean + s.sd).min(4.0))
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            gx + bar_w,
            BOTTOM + 18.0,
            row.strategy
        );
    }
    let _ = writeln!(svg, r##"<text x="{}" y="18" fill="#4c72b0">ID</text>"##, W - 90.0);
    let _ = writeln!(svg, r##"<text x="{}" y="18" fill="#dd8452">OOD</text>"##, W - 60.0);
    svg.push_str("</svg>\n");
    svg
}

/// Writes `records.csv` and `tables.csv`, plus `chart.svg` when there is
/// anything to plot.
pub fn write_report(table: &ReportTable, records: &[EvalRecord], out_dir: impl AsRef<Path>) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_records(records, dir.join("records.csv"))?;
    write_tables(table, dir.join("tables.csv"))?;
    let chart = dir.join("chart.svg");
    if records.is_empty() {
        if chart.exists() {
            fs::remove_file(&chart).map_err(|e| Error::io(&chart, e))?;
        }
    } else {
        fs::write(&chart, render_chart(table)).map_err(|e| Error::io(&chart, e))?;
    }
    Ok(())
}
