//! Report tables and their CSV / JSON encodings.

use std::io::Write;
use std::path::Path;

use geomlab::report::Status;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// One command's output: a flat table plus the full structured results.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Map<String, Value>>,
    pub details: Value,
}

impl Report {
    pub fn new(command: impl Into<String>, columns: &[&'static str]) -> Self {
        Self {
            command: command.into(),
            status: Status::Pass,
            columns: columns.to_vec(),
            rows: Vec::new(),
            details: Value::Array(Vec::new()),
        }
    }

    /// Appends a row; `row` must serialize to an object whose keys cover the columns.
    pub fn push(&mut self, row: Value) {
        match row {
            Value::Object(m) => {
                debug_assert!(self.columns.iter().all(|c| m.contains_key(*c)), "row misses a column: {m:?}");
                self.rows.push(m);
            }
            other => panic!("report rows must be objects, got {other}"),
        }
    }

    pub fn detail(&mut self, item: &impl Serialize) {
        if let Value::Array(a) = &mut self.details {
            a.push(serde_json::to_value(item).expect("report details serialize"));
        }
    }

    pub fn note(&mut self, status: Status) {
        self.status = self.status.worst(status);
    }
}

/// Floats at 17 significant digits; vectors joined by `;`, tuples of vectors by `|`.
fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => format!("{:.16e}", n.as_f64().expect("finite number")),
        },
        Value::String(s) => s.clone(),
        Value::Array(a) => {
            let sep = if a.iter().any(Value::is_array) { "|" } else { ";" };
            a.iter().map(csv_cell).collect::<Vec<_>>().join(sep)
        }
        Value::Object(_) => serde_json::to_string(v).expect("object serializes"),
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&report.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = report
            .columns
            .iter()
            .map(|c| csv_quote(&csv_cell(row.get(*c).unwrap_or(&Value::Null))))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &Report) -> String {
    let mut top = Map::new();
    top.insert("command".into(), Value::String(report.command.clone()));
    top.insert("status".into(), Value::String(report.status.as_str().into()));
    top.insert("rows".into(), Value::Array(report.rows.iter().cloned().map(Value::Object).collect()));
    top.insert("details".into(), report.details.clone());
    let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("report serializes");
    s.push('\n');
    s
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}

/// Writes `report` to `path` via a temporary file in the same directory, or to stdout.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> std::io::Result<()> {
    let text = render(report, format);
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn status() -> impl proptest::strategy::Strategy<Value = Status> {
        proptest::prop_oneof![
            proptest::strategy::Just(Status::Pass),
            proptest::strategy::Just(Status::NotApplicable),
            proptest::strategy::Just(Status::Violation),
        ]
    }

    proptest::proptest! {
        #[test]
        fn exit_status_contract(statuses in proptest::collection::vec(status(), 0..20)) {
            let mut r = Report::new("x", &[]);
            for s in &statuses {
                r.note(*s);
            }
            let expected = if statuses.contains(&Status::Violation) {
                1
            } else if statuses.contains(&Status::NotApplicable) {
                2
            } else {
                0
            };
            proptest::prop_assert_eq!(r.status.exit_code(), expected);
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("x", &["a", "b"]);
        assert_eq!(to_csv(&r), "a,b\n");
    }

    #[test]
    fn cells() {
        let mut r = Report::new("x", &["f", "n", "v", "s", "t"]);
        r.push(json!({"f": 0.25, "n": 3, "v": [1.0, -0.5], "s": "a,b", "t": [[1.0], [2.0]]}));
        assert_eq!(
            to_csv(&r),
            "f,n,v,s,t\n2.5000000000000000e-1,3,1.0000000000000000e0;-5.0000000000000000e-1,\"a,b\",1.0000000000000000e0|2.0000000000000000e0\n"
        );
    }

    #[test]
    fn json_round_trips_floats() {
        let mut r = Report::new("x", &["f"]);
        let v: f64 = 0.1 + 0.2;
        r.push(json!({"f": v}));
        let text = to_json(&r);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["rows"][0]["f"].as_f64().unwrap().to_bits(), v.to_bits());
        assert_eq!(back["status"], "pass");
        let keys: Vec<&String> = back.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["command", "status", "rows", "details"]);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "old").unwrap();
        let r = Report::new("x", &["a"]);
        emit_report(&r, Format::Csv, Some(&path)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
