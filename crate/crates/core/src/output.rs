//! Deterministic text serialisation: CSV tables and JSON documents with
//! every float written to 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::dynamics::Sample;
use crate::error::Result;
use crate::geometry::{RegionOfAttraction, Separatrix};

/// A float with 17 significant digits; non-finite values become `nan`/`inf`/`-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON formatter writing floats as `fmt_f64` does.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with 17-significant-digit floats (non-finite as `null`)
/// and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// CSV with a header line and one row of floats per record.
pub fn csv_table<'a, I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Trajectory samples as `t,y,z`.
pub fn trajectory_csv(samples: &[Sample]) -> String {
    let rows: Vec<[f64; 3]> = samples.iter().map(|s| [s.t, s.y, s.z]).collect();
    csv_table(&["t", "y", "z"], rows.iter().map(|r| &r[..]))
}

/// Separatrix polyline as `y,z`.
pub fn separatrix_csv(sep: &Separatrix) -> String {
    csv_table(&["y", "z"], sep.polyline.iter().map(|r| &r[..]))
}

/// `{"P": …, "c_star": …, "center": [y, z]}`.
pub fn roa_json(roa: &RegionOfAttraction) -> Result<String> {
    to_json(roa)
}

/// One row of the entry-exit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryExitRow {
    pub tau: f64,
    pub z_in: f64,
    pub z_out_predicted: f64,
    pub z_out_measured: Option<f64>,
    pub epsilon: Option<f64>,
}

/// Entry-exit table; absent measurements are empty cells.
pub fn entry_exit_csv(rows: &[EntryExitRow]) -> String {
    let mut out = String::from("tau,z_in,z_out_predicted,z_out_measured,epsilon\n");
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.tau),
            fmt_f64(r.z_in),
            fmt_f64(r.z_out_predicted),
            opt(r.z_out_measured),
            opt(r.epsilon)
        ));
    }
    out
}
