//! CSV and JSON emitters and the run manifest.
//!
//! Every float is written with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` exactly, so identical results give identical bytes.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::params::Group;
use crate::scenario::ScenarioResult;
use crate::sweep::SweepResult;

/// Column order of scenario CSV files. Frozen; see the README.
pub const SCENARIO_COLUMNS: [&str; 18] = [
    "scenario",
    "t",
    "group",
    "hbar",
    "tau_effective",
    "n_formal",
    "n_informal",
    "informality_share",
    "ell_formal",
    "labor_formal",
    "labor_informal",
    "labor",
    "output",
    "deadweight",
    "adjustment",
    "informal_cost",
    "hours_paid",
    "consumption_total",
];

/// Column order of sweep CSV files. Frozen; see the README.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "kind",
    "hbar",
    "sigma_sub",
    "relief",
    "a_req_terminal_pct",
    "d_informality_pp",
    "dy_pct",
    "d_informality_s_pp",
    "settled",
    "diagnostic",
    "message",
];

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

/// One row per (period, group).
pub fn scenario_csv(name: &str, result: &ScenarioResult) -> String {
    let mut w = csv_writer();
    w.write_record(SCENARIO_COLUMNS).expect("in-memory write");
    for rec in &result.records {
        for g in Group::ALL {
            let r = rec.groups.get(g);
            let row = [
                name.to_string(),
                rec.t.to_string(),
                g.to_string(),
                fmt_f64(rec.hbar),
                fmt_f64(r.tau_effective),
                fmt_f64(r.n_formal),
                fmt_f64(r.n_informal),
                fmt_f64(r.informality_share()),
                fmt_f64(r.ell_formal),
                fmt_f64(r.labor_formal),
                fmt_f64(r.labor_informal),
                fmt_f64(r.labor),
                fmt_f64(r.output),
                fmt_f64(r.deadweight),
                fmt_f64(r.adjustment),
                fmt_f64(r.informal_cost),
                fmt_f64(r.hours_paid),
                fmt_f64(rec.consumption),
            ];
            w.write_record(&row).expect("in-memory write");
        }
    }
    finish(w)
}

/// One row per sweep cell, missing values left empty.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut w = csv_writer();
    w.write_record(SWEEP_COLUMNS).expect("in-memory write");
    for c in &result.cells {
        let row = [
            result.spec.kind.as_str().to_string(),
            fmt_f64(c.coordinates.hbar),
            fmt_opt(c.coordinates.sigma_sub),
            fmt_f64(c.coordinates.relief),
            fmt_opt(c.a_req_terminal_pct),
            fmt_opt(c.d_informality_pp),
            fmt_opt(c.dy_pct),
            fmt_opt(c.d_informality_s_pp),
            c.settled.map(|s| s.to_string()).unwrap_or_default(),
            c.diagnostic.as_ref().map(|d| d.code.as_str().to_string()).unwrap_or_default(),
            c.diagnostic.as_ref().map(|d| d.message.clone()).unwrap_or_default(),
        ];
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// Pretty JSON whose floats carry 17 significant digits.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with 17-digit floats and a trailing newline.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("results serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8 json")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    pub engine_version: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub command: String,
    /// File names relative to the output directory, in write order.
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Collects files for one command and writes them sequentially.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(mut self, mut manifest: RunManifest) -> io::Result<PathBuf> {
        manifest.outputs = std::mem::take(&mut self.written);
        let path = self.root.join("manifest.json");
        std::fs::write(&path, to_json(&manifest))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 8.344_000_000_000_001, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_floats_have_fixed_width_mantissa() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: f64,
        }
        let s = to_json(&S {
            a: 0.1,
            b: vec![2.0],
            c: f64::NAN,
        });
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.0000000000000000e0"), "{s}");
        assert!(s.contains("\"c\": null"), "{s}");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64().unwrap(), 0.1);
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn csv_quotes_messages_with_commas() {
        let mut w = csv_writer();
        w.write_record(["a", "b, \"c\""]).unwrap();
        assert_eq!(finish(w), "a,\"b, \"\"c\"\"\"\n");
    }
}
