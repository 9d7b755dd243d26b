//! Report model: named check rows with recorded comparisons, JSON and CSV
//! encodings, and replay comparison.
//!
//! Reports are self-describing: the `config` block is the exact resolved
//! run specification, so a report alone suffices to reproduce itself.
//! Numbers are carried as shortest-round-trip decimal strings (with `"inf"`
//! / `"-inf"` for infinities) so re-reading and comparing is bit-exact, and
//! two runs with the same seed produce byte-identical files. Wall-clock
//! duration is kept out of the serialized form for the same reason; it is
//! reported on stderr.

use std::fmt;

use serde::{Deserialize, Serialize};

use rb_evalues::extreal::{parse_ext_real, ExtReal};

/// How a row's estimate is compared against its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpKind {
    /// `|estimate - target| <= tolerance`.
    AbsLe,
    /// `estimate <= target + tolerance`.
    Le,
    /// `estimate >= target - tolerance`.
    Ge,
    /// `estimate > target` (strict; tolerance unused).
    Gt,
    /// Estimate is the literal string `"true"`.
    IsTrue,
}

impl fmt::Display for CmpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpKind::AbsLe => "abs_le",
            CmpKind::Le => "le",
            CmpKind::Ge => "ge",
            CmpKind::Gt => "gt",
            CmpKind::IsTrue => "is_true",
        };
        write!(f, "{s}")
    }
}

/// One named check: pass/fail is determined solely by the recorded
/// estimate, target, tolerance, and comparison kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub estimate: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<String>,
    pub target: String,
    pub tolerance: String,
    pub cmp: CmpKind,
    pub pass: bool,
}

fn fmt_f64(x: f64) -> String {
    ExtReal::from_f64(x).to_string()
}

impl CheckRow {
    pub fn numeric(
        name: impl Into<String>,
        estimate: f64,
        std_error: Option<f64>,
        target: f64,
        tolerance: f64,
        cmp: CmpKind,
    ) -> Self {
        let mut row = CheckRow {
            name: name.into(),
            estimate: fmt_f64(estimate),
            std_error: std_error.map(fmt_f64),
            target: fmt_f64(target),
            tolerance: fmt_f64(tolerance),
            cmp,
            pass: false,
        };
        row.pass = row.evaluate();
        row
    }

    pub fn boolean(name: impl Into<String>, value: bool) -> Self {
        CheckRow {
            name: name.into(),
            estimate: value.to_string(),
            std_error: None,
            target: "true".into(),
            tolerance: "0".into(),
            cmp: CmpKind::IsTrue,
            pass: value,
        }
    }

    /// Recomputes pass/fail from the recorded fields.
    pub fn evaluate(&self) -> bool {
        if self.cmp == CmpKind::IsTrue {
            return self.estimate == "true";
        }
        let (Ok(est), Ok(target), Ok(tol)) = (
            parse_ext_real(&self.estimate),
            parse_ext_real(&self.target),
            parse_ext_real(&self.tolerance),
        ) else {
            return false;
        };
        let (e, t, tol) = (est.as_f64(), target.as_f64(), tol.as_f64());
        match self.cmp {
            CmpKind::AbsLe => (e - t).abs() <= tol,
            CmpKind::Le => e <= t + tol,
            CmpKind::Ge => e >= t - tol,
            CmpKind::Gt => e > t,
            CmpKind::IsTrue => unreachable!(),
        }
    }
}

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// A complete run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: serde_json::Value,
    pub rows: Vec<CheckRow>,
    /// Wall-clock duration; excluded from the serialized forms so that
    /// equal-seed runs emit byte-identical files.
    #[serde(skip)]
    pub duration_ms: u128,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// CSV with one line per check row; nested config fields become dotted
    /// columns repeated on every line. Infinities stay `"inf"` / `"-inf"`.
    pub fn to_csv(&self) -> String {
        let config_cells = flatten(&self.config);
        let mut header = vec!["version".to_string()];
        header.extend(config_cells.iter().map(|(k, _)| format!("config.{k}")));
        header.extend(
            [
                "name",
                "estimate",
                "std_error",
                "target",
                "tolerance",
                "cmp",
                "pass",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        let mut out = String::new();
        out.push_str(&csv_line(&header));
        for row in &self.rows {
            let mut cells = vec![self.version.clone()];
            cells.extend(config_cells.iter().map(|(_, v)| v.clone()));
            cells.push(row.name.clone());
            cells.push(row.estimate.clone());
            cells.push(row.std_error.clone().unwrap_or_default());
            cells.push(row.target.clone());
            cells.push(row.tolerance.clone());
            cells.push(row.cmp.to_string());
            cells.push(row.pass.to_string());
            out.push_str(&csv_line(&cells));
        }
        out
    }

    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Parses a report back from either encoding (JSON documents start with
    /// a brace).
    pub fn parse(text: &str) -> Result<Report, String> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| format!("bad JSON report: {e}"));
        }
        parse_csv_report(text)
    }
}

/// Flattens a JSON value into dotted-path/value string pairs; array
/// elements use numeric path segments.
pub fn flatten(value: &serde_json::Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into(value, String::new(), &mut out);
    out
}

fn flatten_into(value: &serde_json::Value, path: String, out: &mut Vec<(String, String)>) {
    use serde_json::Value::*;
    match value {
        Object(map) => {
            for (k, v) in map {
                let next = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                flatten_into(v, next, out);
            }
        }
        Array(items) => {
            for (i, v) in items.iter().enumerate() {
                let next = if path.is_empty() {
                    i.to_string()
                } else {
                    format!("{path}.{i}")
                };
                flatten_into(v, next, out);
            }
        }
        Null => out.push((path, std::string::String::new())),
        Bool(b) => out.push((path, b.to_string())),
        Number(n) => out.push((path, n.to_string())),
        String(s) => out.push((path, s.clone())),
    }
}

/// Rebuilds a JSON value from dotted-path/value pairs. Numeric segments are
/// treated as array indices; leaf strings keep their raw form (numbers stay
/// strings only when they fail to parse as JSON numbers).
pub fn unflatten(cells: &[(String, String)]) -> serde_json::Value {
    let mut root = serde_json::Value::Object(Default::default());
    for (path, raw) in cells {
        let leaf = if raw.is_empty() {
            serde_json::Value::Null
        } else if raw == "true" || raw == "false" {
            serde_json::Value::Bool(raw == "true")
        } else if let Ok(n) = raw.parse::<i64>() {
            serde_json::Value::Number(n.into())
        } else if let Ok(f) = raw.parse::<f64>() {
            match serde_json::Number::from_f64(f) {
                Some(n) if raw.chars().all(|c| "0123456789+-.eE".contains(c)) => {
                    serde_json::Value::Number(n)
                }
                _ => serde_json::Value::String(raw.clone()),
            }
        } else {
            serde_json::Value::String(raw.clone())
        };
        insert_path(&mut root, &path.split('.').collect::<Vec<_>>(), leaf);
    }
    root
}

fn insert_path(node: &mut serde_json::Value, segments: &[&str], leaf: serde_json::Value) {
    if segments.is_empty() {
        *node = leaf;
        return;
    }
    let head = segments[0];
    if let Ok(idx) = head.parse::<usize>() {
        if !node.is_array() {
            *node = serde_json::Value::Array(Vec::new());
        }
        let arr = node.as_array_mut().unwrap();
        while arr.len() <= idx {
            arr.push(serde_json::Value::Null);
        }
        insert_path(&mut arr[idx], &segments[1..], leaf);
    } else {
        if !node.is_object() {
            *node = serde_json::Value::Object(Default::default());
        }
        let obj = node.as_object_mut().unwrap();
        let entry = obj
            .entry(head.to_string())
            .or_insert(serde_json::Value::Null);
        insert_path(entry, &segments[1..], leaf);
    }
}

fn csv_line(cells: &[String]) -> String {
    let escaped: Vec<String> = cells
        .iter()
        .map(|c| {
            if c.contains(',') || c.contains('"') || c.contains('\n') {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        })
        .collect();
    format!("{}\n", escaped.join(","))
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    quoted = false;
                }
            }
            '"' => quoted = true,
            ',' if !quoted => {
                cells.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    cells.push(cur);
    cells
}

fn parse_csv_report(text: &str) -> Result<Report, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = split_csv_line(lines.next().ok_or("empty CSV report")?);
    let fixed = [
        "name",
        "estimate",
        "std_error",
        "target",
        "tolerance",
        "cmp",
        "pass",
    ];
    if header.len() < fixed.len() + 1 {
        return Err("CSV header too short".into());
    }
    let fixed_start = header.len() - fixed.len();
    if header[fixed_start..] != fixed.map(String::from) {
        return Err("CSV header does not end with the row columns".into());
    }
    let mut version = String::new();
    let mut config_cells: Vec<(String, String)> = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells = split_csv_line(line);
        if cells.len() != header.len() {
            return Err(format!("CSV row {i} has {} cells", cells.len()));
        }
        if i == 0 {
            version = cells[0].clone();
            for (h, v) in header[1..fixed_start].iter().zip(&cells[1..fixed_start]) {
                let key = h.strip_prefix("config.").ok_or("bad config column")?;
                config_cells.push((key.to_string(), v.clone()));
            }
        }
        let std_error = if cells[fixed_start + 2].is_empty() {
            None
        } else {
            Some(cells[fixed_start + 2].clone())
        };
        let cmp = match cells[fixed_start + 5].as_str() {
            "abs_le" => CmpKind::AbsLe,
            "le" => CmpKind::Le,
            "ge" => CmpKind::Ge,
            "gt" => CmpKind::Gt,
            "is_true" => CmpKind::IsTrue,
            other => return Err(format!("bad cmp {other:?}")),
        };
        rows.push(CheckRow {
            name: cells[fixed_start].clone(),
            estimate: cells[fixed_start + 1].clone(),
            std_error,
            target: cells[fixed_start + 3].clone(),
            tolerance: cells[fixed_start + 4].clone(),
            cmp,
            pass: cells[fixed_start + 6] == "true",
        });
    }
    Ok(Report {
        version,
        config: unflatten(&config_cells),
        rows,
        duration_ms: 0,
    })
}

/// Outcome of comparing a replayed report against the original.
#[derive(Debug)]
pub struct ReplayDiff {
    pub differing_rows: Vec<String>,
    pub version_mismatch: bool,
}

/// Compares estimates (and standard errors) bitwise, by row name.
pub fn compare_replay(original: &Report, replayed: &Report) -> ReplayDiff {
    let mut differing = Vec::new();
    for row in &original.rows {
        match replayed.rows.iter().find(|r| r.name == row.name) {
            None => differing.push(format!("{}: missing in replay", row.name)),
            Some(other) => {
                if other.estimate != row.estimate || other.std_error != row.std_error {
                    differing.push(format!(
                        "{}: {} -> {}",
                        row.name, row.estimate, other.estimate
                    ));
                }
            }
        }
    }
    for row in &replayed.rows {
        if !original.rows.iter().any(|r| r.name == row.name) {
            differing.push(format!("{}: new in replay", row.name));
        }
    }
    ReplayDiff {
        differing_rows: differing,
        version_mismatch: original.version != replayed.version,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_evaluate_from_recorded_fields() {
        let row = CheckRow::numeric("x", 1.0005, Some(0.001), 1.0, 0.003, CmpKind::AbsLe);
        assert!(row.pass);
        let row = CheckRow::numeric("x", 1.05, None, 1.0, 0.003, CmpKind::Le);
        assert!(!row.pass);
        let row = CheckRow::numeric("x", f64::NEG_INFINITY, None, 0.0, 0.0, CmpKind::Le);
        assert!(row.pass);
        assert_eq!(row.estimate, "-inf");
        let row = CheckRow::numeric("x", 0.0, None, 0.0, 0.0, CmpKind::Gt);
        assert!(!row.pass);
    }

    #[test]
    fn json_and_csv_round_trip() {
        let config = serde_json::json!({
            "subcommand": "demo",
            "seed": 7,
            "params": {"alpha": 0.05, "values": [1.5, 2.5]}
        });
        let report = Report {
            version: "0.1.0".into(),
            config,
            rows: vec![
                CheckRow::numeric("a", 1.0, Some(0.1), 1.0, 0.5, CmpKind::AbsLe),
                CheckRow::boolean("b", true),
            ],
            duration_ms: 12,
        };
        let json = report.to_json();
        let back = Report::parse(&json).unwrap();
        assert_eq!(back.rows, report.rows);
        assert_eq!(back.config, report.config);
        let csv = report.to_csv();
        let back = Report::parse(&csv).unwrap();
        assert_eq!(back.rows, report.rows);
        assert_eq!(back.config["params"]["values"][1], serde_json::json!(2.5));
    }

    #[test]
    fn flatten_unflatten_inverse() {
        let value = serde_json::json!({
            "a": {"b": [1, 2, {"c": "x,y"}]},
            "d": true,
            "e": null
        });
        let cells = flatten(&value);
        let back = unflatten(&cells);
        assert_eq!(back, value);
    }

    #[test]
    fn replay_comparison_flags_differences() {
        let mk = |est: &str| Report {
            version: "0.1.0".into(),
            config: serde_json::json!({}),
            rows: vec![CheckRow {
                name: "only".into(),
                estimate: est.into(),
                std_error: None,
                target: "0".into(),
                tolerance: "1".into(),
                cmp: CmpKind::AbsLe,
                pass: true,
            }],
            duration_ms: 0,
        };
        let same = compare_replay(&mk("0.5"), &mk("0.5"));
        assert!(same.differing_rows.is_empty());
        let diff = compare_replay(&mk("0.5"), &mk("0.75"));
        assert_eq!(diff.differing_rows.len(), 1);
    }
}
