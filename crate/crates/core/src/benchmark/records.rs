//! Machine scaling records: CSV ingestion, output and ranking.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recognised column names, in canonical output order.
pub const RECORD_FIELDS: [&str; 7] = [
    "machine",
    "cores",
    "time_seconds",
    "node_type",
    "interconnect",
    "chip_bandwidth_gbs",
    "peak_tflops",
];

const REQUIRED: [&str; 3] = ["machine", "cores", "time_seconds"];

/// One measured run: a machine, the cores it used, and its wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub machine: String,
    pub cores: u64,
    pub time_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interconnect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chip_bandwidth_gbs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_tflops: Option<f64>,
    /// Columns outside the schema, kept verbatim in input order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, String)>,
}

impl ScalingRecord {
    pub fn new(machine: impl Into<String>, cores: u64, time_seconds: f64) -> Result<Self> {
        let r = Self {
            machine: machine.into(),
            cores,
            time_seconds,
            node_type: None,
            interconnect: None,
            chip_bandwidth_gbs: None,
            peak_tflops: None,
            extra: Vec::new(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.machine.trim().is_empty() {
            return Err(Error::InvalidParameter("machine name is empty".into()));
        }
        if self.cores == 0 {
            return Err(Error::InvalidParameter("cores must be at least 1".into()));
        }
        if !(self.time_seconds.is_finite() && self.time_seconds > 0.0) {
            return Err(Error::InvalidParameter(format!("time_seconds {} must be positive", self.time_seconds)));
        }
        for (name, v) in [("chip_bandwidth_gbs", self.chip_bandwidth_gbs), ("peak_tflops", self.peak_tflops)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} {v} must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn extra(&self, key: &str) -> Option<&str> {
        self.extra.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `(sockets, cores per socket)` parsed from the node description,
    /// e.g. `"2×12 core Intel Xeon"` or `"16 core 1.6 GHz"`.
    pub fn node_layout(&self) -> Option<(u64, u64)> {
        self.node_type.as_deref().and_then(parse_node_layout)
    }

    /// Nodes used: `ceil(cores / cores_per_node)`. A `cores_per_node` extra
    /// column overrides the node description.
    pub fn nodes_used(&self) -> Option<u64> {
        let per_node = match self.extra("cores_per_node") {
            Some(v) => parse_count(v).ok()?,
            None => {
                let (sockets, per_socket) = self.node_layout()?;
                sockets * per_socket
            }
        };
        (per_node > 0).then(|| self.cores.div_ceil(per_node))
    }

    /// Total theoretical RAM bandwidth of the nodes used: per-node bandwidth
    /// (chip bandwidth times sockets) times the number of nodes. Without node
    /// information the run is taken to be a single one-socket node.
    pub fn total_bandwidth_gbs(&self) -> Option<f64> {
        let chip = self.chip_bandwidth_gbs?;
        match (self.node_layout(), self.nodes_used()) {
            (Some((sockets, _)), Some(nodes)) => Some(chip * sockets as f64 * nodes as f64),
            (None, Some(nodes)) => Some(chip * nodes as f64),
            _ => Some(chip),
        }
    }
}

/// Parses `"2×12 core ..."`, `"2x12 core ..."` or `"16 core ..."`.
pub fn parse_node_layout(text: &str) -> Option<(u64, u64)> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let pos = tokens.iter().position(|t| t.eq_ignore_ascii_case("core") || t.eq_ignore_ascii_case("cores"))?;
    let spec = *tokens.get(pos.checked_sub(1)?)?;
    let spec = spec.replace("$\\times$", "×");
    let parts: Vec<&str> = spec.split(['×', 'x', 'X', '*']).collect();
    let nums: Option<Vec<u64>> = parts.iter().map(|p| p.parse::<u64>().ok().filter(|&v| v > 0)).collect();
    match nums?.as_slice() {
        [c] => Some((1, *c)),
        [s, c] => Some((*s, *c)),
        _ => None,
    }
}

/// Integer with optional thousands separators (`12,288`, `12_288`).
fn parse_count(text: &str) -> std::result::Result<u64, String> {
    let cleaned: String = text.chars().filter(|c| !matches!(c, ',' | '_' | ' ')).collect();
    cleaned.parse::<u64>().map_err(|e| format!("'{text}' is not a count: {e}"))
}

fn parse_real(text: &str) -> std::result::Result<f64, String> {
    let cleaned: String = text.chars().filter(|c| !matches!(c, ',' | '_' | ' ')).collect();
    cleaned.parse::<f64>().map_err(|e| format!("'{text}' is not a number: {e}"))
}

/// Parses a scaling-record CSV. The header must contain `machine`, `cores`
/// and `time_seconds`; other schema columns are optional and unknown ones
/// are kept as opaque metadata.
pub fn parse_records(text: &str) -> Result<Vec<ScalingRecord>> {
    read_records(text.as_bytes())
}

pub fn read_records(reader: impl Read) -> Result<Vec<ScalingRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Parse { line: 1, message: format!("column {} has an empty name", i + 1) });
        }
        if names[..i].contains(name) {
            return Err(Error::Parse { line: 1, message: format!("duplicate column '{name}'") });
        }
    }
    for required in REQUIRED {
        if !names.iter().any(|n| n == required) {
            return Err(Error::Parse { line: 1, message: format!("missing required column '{required}'") });
        }
    }

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        let mut rec = ScalingRecord {
            machine: String::new(),
            cores: 0,
            time_seconds: 0.0,
            node_type: None,
            interconnect: None,
            chip_bandwidth_gbs: None,
            peak_tflops: None,
            extra: Vec::new(),
        };
        for (name, value) in names.iter().zip(row.iter()) {
            let opt = |v: &str| (!v.is_empty()).then(|| v.to_owned());
            match name.as_str() {
                "machine" => rec.machine = value.to_owned(),
                "cores" => rec.cores = parse_count(value).map_err(bad)?,
                "time_seconds" => rec.time_seconds = parse_real(value).map_err(bad)?,
                "node_type" => rec.node_type = opt(value),
                "interconnect" => rec.interconnect = opt(value),
                "chip_bandwidth_gbs" => {
                    rec.chip_bandwidth_gbs = opt(value).map(|v| parse_real(&v)).transpose().map_err(bad)?
                }
                "peak_tflops" => rec.peak_tflops = opt(value).map(|v| parse_real(&v)).transpose().map_err(bad)?,
                _ => rec.extra.push((name.clone(), value.to_owned())),
            }
        }
        rec.validate().map_err(|e| bad(e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse { line, message: e.to_string() }
}

/// Column order used when writing `records`: the schema first, then any
/// extra columns in first-seen order.
pub fn output_columns(records: &[ScalingRecord]) -> Vec<String> {
    let mut cols: Vec<String> = RECORD_FIELDS.iter().map(|s| s.to_string()).collect();
    for r in records {
        for (k, _) in &r.extra {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

pub fn record_value(r: &ScalingRecord, column: &str) -> String {
    let real = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    match column {
        "machine" => r.machine.clone(),
        "cores" => r.cores.to_string(),
        "time_seconds" => format_real(r.time_seconds),
        "node_type" => r.node_type.clone().unwrap_or_default(),
        "interconnect" => r.interconnect.clone().unwrap_or_default(),
        "chip_bandwidth_gbs" => real(r.chip_bandwidth_gbs),
        "peak_tflops" => real(r.peak_tflops),
        other => r.extra(other).unwrap_or_default().to_owned(),
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_records(records: &[ScalingRecord], writer: impl Write) -> Result<()> {
    let cols = output_columns(records);
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&cols).map_err(io)?;
    for r in records {
        w.write_record(cols.iter().map(|c| record_value(r, c))).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a ranking: a machine and its fastest record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMachine {
    pub rank: usize,
    pub best: ScalingRecord,
}

fn best_order(a: &ScalingRecord, b: &ScalingRecord) -> Ordering {
    a.time_seconds
        .total_cmp(&b.time_seconds)
        .then(a.cores.cmp(&b.cores))
        .then_with(|| format!("{a:?}").cmp(&format!("{b:?}")))
}

/// Ranks machines by their shortest run time, ties broken by machine name.
pub fn rank(records: &[ScalingRecord]) -> Result<Vec<RankedMachine>> {
    if records.is_empty() {
        return Err(Error::Empty("scaling records"));
    }
    let mut best: BTreeMap<&str, &ScalingRecord> = BTreeMap::new();
    for r in records {
        best.entry(&r.machine)
            .and_modify(|cur| {
                if best_order(r, cur) == Ordering::Less {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    let mut rows: Vec<&ScalingRecord> = best.into_values().collect();
    rows.sort_by(|a, b| a.time_seconds.total_cmp(&b.time_seconds).then_with(|| a.machine.cmp(&b.machine)));
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| RankedMachine { rank: i + 1, best: r.clone() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_schema_and_extras() {
        let text = "machine,time_seconds,cores,fft_library,chip_bandwidth_gbs\n\
                    Hornet,0.319,\"12,288\",FFTW 3,68\n";
        let recs = parse_records(text).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].cores, 12288);
        assert_eq!(recs[0].chip_bandwidth_gbs, Some(68.0));
        assert_eq!(recs[0].extra("fft_library"), Some("FFTW 3"));
    }

    #[test]
    fn missing_column_and_bad_rows() {
        assert!(matches!(parse_records("machine,cores\nA,1\n"), Err(Error::Parse { line: 1, .. })));
        let err = parse_records("machine,cores,time_seconds\nA,1,1.0\nB,two,1.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_records("machine,cores,time_seconds\nA,1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_records("machine,cores,time_seconds\nA,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_records("machine,cores,cores,time_seconds\n").is_err());
    }

    #[test]
    fn node_layouts() {
        assert_eq!(parse_node_layout("2×12 core Intel Xeon 2.5 GHz E5-2680v3"), Some((2, 12)));
        assert_eq!(parse_node_layout("2x8 core Intel Xeon"), Some((2, 8)));
        assert_eq!(parse_node_layout("16 core 1.6 GHz Power PC A2"), Some((1, 16)));
        assert_eq!(parse_node_layout("Power PC"), None);
        assert_eq!(parse_node_layout("core"), None);
        assert_eq!(parse_node_layout("0 core"), None);
    }

    #[test]
    fn bandwidth_axis() {
        let mut r = ScalingRecord::new("MareNostrum III", 64, 4.0).unwrap();
        r.node_type = Some("2×8 core Intel Xeon".into());
        r.chip_bandwidth_gbs = Some(51.2);
        assert_eq!(r.nodes_used(), Some(4));
        assert!((r.total_bandwidth_gbs().unwrap() - 409.6).abs() < 1e-12);
        r.extra.push(("cores_per_node".into(), "32".into()));
        assert_eq!(r.nodes_used(), Some(2));
        let local = ScalingRecord { chip_bandwidth_gbs: Some(20.0), ..ScalingRecord::new("local", 2, 1.0).unwrap() };
        assert_eq!(local.total_bandwidth_gbs(), Some(20.0));
    }

    #[test]
    fn ranking_ties_and_minimum() {
        let recs = vec![
            ScalingRecord::new("b", 4, 2.0).unwrap(),
            ScalingRecord::new("a", 8, 2.0).unwrap(),
            ScalingRecord::new("c", 1, 9.0).unwrap(),
            ScalingRecord::new("c", 2, 1.0).unwrap(),
        ];
        let r = rank(&recs).unwrap();
        let order: Vec<&str> = r.iter().map(|m| m.best.machine.as_str()).collect();
        assert_eq!(order, ["c", "a", "b"]);
        assert_eq!(r[0].best.cores, 2);
        assert_eq!(r[2].rank, 3);
        assert!(rank(&[]).is_err());
    }

    #[test]
    fn write_then_read() {
        let mut r = ScalingRecord::new("x,y", 3, 0.1 + 0.2).unwrap();
        r.extra.push(("steps".into(), "30".into()));
        let mut buf = Vec::new();
        write_records(std::slice::from_ref(&r), &mut buf).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back, vec![r]);
    }
}
