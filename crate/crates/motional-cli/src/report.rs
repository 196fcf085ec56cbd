//! Summary-table rendering and atomic file output.

use motional::error::Result;
use std::path::Path;

/// Write-then-rename so partially written output never replaces a good
/// file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = dir.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    tmp.push(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

enum Check {
    Rel { target: f64, tol: f64 },
    Abs { target: f64, tol: f64 },
    Max { bound: f64 },
    Min { bound: f64 },
}

struct Row {
    label: String,
    value: String,
    target: String,
    pass: Option<bool>,
}

/// Pass/fail summary table against reference targets.
pub struct Table {
    rows: Vec<Row>,
}

impl Table {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn push(&mut self, label: &str, value: f64, check: Check) {
        let (target, pass) = match check {
            Check::Rel { target, tol } => (
                format!("{target} +- {:.0}%", tol * 100.0),
                Some((value - target).abs() <= tol * target.abs()),
            ),
            Check::Abs { target, tol } => (
                format!("{target} +- {tol}"),
                Some((value - target).abs() <= tol),
            ),
            Check::Max { bound } => (format!("<= {bound}"), Some(value <= bound)),
            Check::Min { bound } => (format!(">= {bound}"), Some(value >= bound)),
        };
        self.rows.push(Row {
            label: label.to_string(),
            value: format!("{value:.5}"),
            target,
            pass,
        });
    }

    pub fn row_rel(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.push(label, value, Check::Rel { target, tol });
    }

    pub fn row_abs(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.push(label, value, Check::Abs { target, tol });
    }

    pub fn row_max(&mut self, label: &str, value: f64, bound: f64) {
        self.push(label, value, Check::Max { bound });
    }

    pub fn row_min(&mut self, label: &str, value: f64, bound: f64) {
        self.push(label, value, Check::Min { bound });
    }

    pub fn row_text(&mut self, label: &str, note: &str) {
        self.rows.push(Row {
            label: label.to_string(),
            value: note.to_string(),
            target: String::new(),
            pass: None,
        });
    }

    pub fn render(&self) -> String {
        let w_label = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let w_value = self.rows.iter().map(|r| r.value.len()).max().unwrap_or(5);
        let w_target = self.rows.iter().map(|r| r.target.len()).max().unwrap_or(6);
        let mut out = String::new();
        out.push_str(&format!(
            "{:<w_label$}  {:>w_value$}  {:<w_target$}  result\n",
            "quantity", "value", "target"
        ));
        for r in &self.rows {
            let verdict = match r.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "",
            };
            out.push_str(&format!(
                "{:<w_label$}  {:>w_value$}  {:<w_target$}  {verdict}\n",
                r.label, r.value, r.target
            ));
        }
        out
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }
}
