//! Deterministic JSON and CSV emission, and the sinks experiments write through.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::tfld::{self, FieldData};

/// Floats print as `{:.12e}`; non-finite values become `null`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else {
        "null".into()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push_str("{\n");
            for (i, (k, item)) in sorted.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Sorted keys, two-space indent, fixed float format, trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// `serde_json::to_value`, with non-finite floats already mapped to `null`.
pub fn value_of<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// A named pass/fail assertion with the measured value and its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Value,
    pub limit: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, value: impl Serialize, limit: impl Serialize) -> Self {
        Check {
            name: name.into(),
            pass,
            value: value_of(&value),
            limit: value_of(&limit),
        }
    }

    /// `value <= limit`, failing on NaN.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value <= limit, value, limit)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value >= limit, value, limit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// A search or solver ran out of grid, iterations or budget.
    Exhausted,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Exhausted => "exhausted",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Exhausted => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub results: Value,
    /// Relative path to content hash for every field written.
    pub fields: BTreeMap<String, String>,
    /// Set when the run stopped early for lack of resources.
    pub exhausted: bool,
}

impl Report {
    pub fn new(experiment: impl Into<String>, config: BTreeMap<String, String>) -> Self {
        Report {
            experiment: experiment.into(),
            config,
            checks: Vec::new(),
            results: json!({}),
            fields: BTreeMap::new(),
            exhausted: false,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn pass(&self) -> bool {
        !self.exhausted && self.checks.iter().all(|c| c.pass)
    }

    pub fn status(&self) -> Status {
        if self.exhausted {
            Status::Exhausted
        } else if self.pass() {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_value(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass, "value": c.value, "limit": c.limit}))
            .collect();
        json!({
            "experiment": self.experiment,
            "config": self.config,
            "pass": self.pass(),
            "status": self.status().name(),
            "checks": checks,
            "results": self.results,
            "fields": self.fields,
        })
    }

    pub fn to_json(&self) -> String {
        to_json_string(&self.to_value())
    }
}

/// Plot-ready table; the header comment names the columns.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// The rate-fit layout: one row per parameter value, the fitted slope repeated.
    pub fn rate_fit(params: &[f64], measured: &[f64], predicted: &[f64], slope: Option<f64>) -> Self {
        let mut t = CsvTable::new(&["param", "measured", "predicted", "slope"]);
        for ((p, m), q) in params.iter().zip(measured).zip(predicted) {
            t.rows.push(vec![*p, *m, *q, slope.unwrap_or(f64::NAN)]);
        }
        t
    }

    pub fn render(&self) -> String {
        let mut out = format!("# columns: {}\n", self.columns.join(", "));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| if v.is_finite() { format!("{v:.12e}") } else { "nan".into() })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Destination for experiment artifacts, addressed by relative path.
pub trait Sink {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> std::io::Result<()>;

    fn put_json(&mut self, rel: &str, v: &Value) -> std::io::Result<()> {
        self.put(rel, to_json_string(v).as_bytes())
    }

    fn put_csv(&mut self, rel: &str, t: &CsvTable) -> std::io::Result<()> {
        self.put(rel, t.render().as_bytes())
    }

    /// Writes a field and records its hash in the report.
    fn put_field(&mut self, report: &mut Report, rel: &str, data: &FieldData) -> std::io::Result<()> {
        let bytes = tfld::encode(data);
        report.fields.insert(rel.to_string(), tfld::content_hash(&bytes));
        self.put(rel, &bytes)
    }
}

pub struct DirSink {
    root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl DirSink {
    pub fn new(root: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(DirSink {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }
}

impl Sink for DirSink {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }
}

/// Keeps artifacts in memory; field payloads can be dropped to save space.
#[derive(Default)]
pub struct MemSink {
    pub files: BTreeMap<String, Vec<u8>>,
    pub keep_fields: bool,
}

impl Sink for MemSink {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> std::io::Result<()> {
        let payload = if !self.keep_fields && rel.ends_with(".bin") {
            tfld::content_hash(bytes).into_bytes()
        } else {
            bytes.to_vec()
        };
        self.files.insert(rel.to_string(), payload);
        Ok(())
    }
}
