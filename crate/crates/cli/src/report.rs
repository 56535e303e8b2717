//! Versioned JSON reports and CSV tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

/// One pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: false,
            value: None,
            threshold: None,
            detail: detail.into(),
        }
    }

    pub fn passed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            passed: true,
            ..Check::failed(name, detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i128),
    Num(f64),
    Text(String),
}

impl Cell {
    /// Non-finite values become text so they survive JSON.
    pub fn num(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Text(format!("{v}"))
        }
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub command: String,
    pub passed: bool,
    pub failed_checks: usize,
    pub checks: Vec<Check>,
    pub config: serde_json::Value,
    pub tables: Vec<Table>,
    /// Command-specific structured payload.
    pub results: serde_json::Value,
    /// Extra CSV files (file name, table) not embedded in the JSON.
    #[serde(skip)]
    pub attachments: Vec<(String, Table)>,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Report {
            report_version: REPORT_VERSION,
            command: command.to_string(),
            passed: true,
            failed_checks: 0,
            checks: Vec::new(),
            config,
            tables: Vec::new(),
            results: serde_json::Value::Null,
            attachments: Vec::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        if !check.passed {
            self.failed_checks += 1;
            self.passed = false;
        }
        self.checks.push(check);
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed_checks == 0 {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["name", "passed", "value", "threshold", "detail"]);
        for c in &self.checks {
            let opt = |v: Option<f64>| v.map_or(Cell::text(""), Cell::num);
            t.push(vec![
                Cell::text(&c.name),
                Cell::text(c.passed.to_string()),
                opt(c.value),
                opt(c.threshold),
                Cell::text(&c.detail),
            ]);
        }
        t
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(s, "{verdict} {}", c.name);
            if let (Some(v), Some(t)) = (c.value, c.threshold) {
                let _ = write!(s, " value={v:.6e} threshold={t:.6e}");
            }
            if !c.detail.is_empty() {
                let _ = write!(s, " ({})", c.detail);
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "{}: {} checks, {} failed",
            self.command,
            self.checks.len(),
            self.failed_checks
        );
        s
    }

    /// Writes `<command>_report.json`, its `.meta.json` sidecar and the CSV
    /// tables into `dir`. Returns the written paths.
    pub fn write(&self, dir: &Path, json: bool, csv: bool) -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if json {
            let path = dir.join(format!("{}_report.json", self.command));
            fs::write(&path, self.to_json())?;
            written.push(path);
            let meta = dir.join(format!("{}_report.meta.json", self.command));
            fs::write(&meta, sidecar())?;
            written.push(meta);
        }
        if csv {
            let path = dir.join(format!("{}_checks.csv", self.command));
            self.checks_table().write_csv(&path)?;
            written.push(path);
            for t in &self.tables {
                let path = dir.join(format!("{}_{}.csv", self.command, t.name));
                t.write_csv(&path)?;
                written.push(path);
            }
        }
        for (name, t) in &self.attachments {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            t.write_csv(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn sidecar() -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "report_version": REPORT_VERSION,
        "generated_unix_seconds": now,
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    format!("{}\n", serde_json::to_string_pretty(&meta).expect("sidecar serializes"))
}
