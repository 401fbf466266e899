//! Artifact writers: records CSV, tie-set CSV, P5 heatmaps.
//!
//! Floats in `records.csv` use the shortest round-trip exponent form, so a
//! rerun with the same inputs gives the same bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use markerflow_core::diagnostics::DiagnosticRecord;
use markerflow_core::{Measured, Polyline, ScalarField};

/// Display form used in file names: `40`, `2.5`, `0.25`.
pub fn label(v: f64) -> String {
    format!("{v}")
}

/// Pair id as used in column and file names, one-based: `12`.
pub fn pair_id(i: usize, j: usize) -> String {
    format!("{}{}", i + 1, j + 1)
}

fn value_text(m: Measured) -> String {
    match m {
        Measured::Value(v) => format!("{v:e}"),
        Measured::Empty => "inf".to_string(),
    }
}

/// `t,beta,<sorted entry names>,notes`; one row per record, missing entries
/// left blank. Records are written in the given order.
pub fn records_csv(records: &[DiagnosticRecord]) -> String {
    let columns: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.entries.keys().map(String::as_str))
        .collect();
    let mut out = String::from("t,beta");
    for c in &columns {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",notes\n");
    for r in records {
        let _ = write!(out, "{},{}", label(r.t), label(r.beta));
        for c in &columns {
            out.push(',');
            if let Some(m) = r.get(c) {
                out.push_str(&value_text(m));
            }
        }
        out.push(',');
        out.push_str(&r.notes.join("; ").replace(',', ";"));
        out.push('\n');
    }
    out
}

/// `pair,polyline,x,y`; closed polylines repeat their first point at the end.
pub fn tieset_csv(pair: &str, polylines: &[Polyline]) -> String {
    let mut out = String::from("pair,polyline,x,y\n");
    for (id, line) in polylines.iter().enumerate() {
        let closing = line.closed.then(|| line.points.first()).flatten();
        for p in line.points.iter().chain(closing) {
            let _ = writeln!(out, "{pair},{id},{:e},{:e}", p.x, p.y);
        }
    }
    out
}

/// Linear map `[lo, hi] → [0, 255]`, rounded, values outside clamped.
pub fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    if hi <= lo {
        return 0;
    }
    ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn dequantize(q: u8, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * q as f64 / 255.0
}

/// Binary P5 image, width and height `n`. Column `c` is the x index, row
/// `r` is the y index `n − 1 − r` so the picture has y pointing up.
pub fn pgm_bytes(field: &ScalarField, lo: f64, hi: f64) -> Vec<u8> {
    let n = field.grid().n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for r in 0..n {
        let j = n - 1 - r;
        out.extend((0..n).map(|i| quantize(field.get(i, j), lo, hi)));
    }
    out
}

/// A decoded P5 image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u8>,
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

/// Parse an 8-bit P5 file (comments in the header are allowed).
pub fn parse_pgm(bytes: &[u8]) -> io::Result<Pgm> {
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII PGM header"))?);
    }
    if tokens[0] != "P5" {
        return Err(bad("not a P5 file"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad PGM header number"));
    let (width, height, maxval) = (num(tokens[1])?, num(tokens[2])?, num(tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit PGM is supported"));
    }
    pos += 1;
    let pixels = bytes.get(pos..pos + width * height).ok_or_else(|| bad("truncated PGM data"))?;
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        pixels: pixels.to_vec(),
    })
}

impl Pgm {
    /// Inverse of [`pgm_bytes`]: grid values indexed like a `ScalarField`.
    pub fn to_values(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.width;
        let mut values = vec![0.0; n * self.height];
        for r in 0..self.height {
            let j = self.height - 1 - r;
            for i in 0..n {
                values[i * self.height + j] = dequantize(self.pixels[r * n + i], lo, hi);
            }
        }
        values
    }
}

pub fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> io::Result<()> {
    std::fs::write(dir.join(name), bytes)
}
