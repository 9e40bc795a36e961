//! Signal, recovery and spectrum files.
//!
//! Text signals carry a `# ts=<f64>, wm=<f64>, origin=<i64>` header line and
//! one sample per line. Binary signals are a 32-byte little-endian header
//! (magic `UFK1`, `ts: f64`, `wm: f64`, `origin: i64`, `length: u32`)
//! followed by `length` little-endian `f64` samples. Floats are written in
//! shortest round-trip form, so a write/read cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{SampledSignal, SamplingGrid};
use crate::spectral::SpectrumSlice;

pub const BINARY_MAGIC: &[u8; 4] = b"UFK1";
pub const BINARY_HEADER_LEN: usize = 32;

pub fn signal_to_csv_string(signal: &SampledSignal) -> String {
    let g = &signal.grid;
    let mut out = format!("# ts={}, wm={}, origin={}\n", g.sample_interval, g.band_edge, g.origin);
    for v in &signal.values {
        writeln!(out, "{v}").expect("writing to a String");
    }
    out
}

fn parse_header(line: &str) -> Result<(f64, f64, i64)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing '# ts=..' header, got '{line}'")))?;
    let (mut ts, mut wm, mut origin) = (None, None, None);
    for field in body.split(',') {
        let (key, value) = field
            .trim()
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header field '{}'", field.trim())))?;
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("header field {key}: {e}"));
        match key.trim() {
            "ts" => ts = Some(value.trim().parse::<f64>().map_err(|e| bad(&e))?),
            "wm" => wm = Some(value.trim().parse::<f64>().map_err(|e| bad(&e))?),
            "origin" => origin = Some(value.trim().parse::<i64>().map_err(|e| bad(&e))?),
            other => return Err(Error::Parse(format!("unknown header field '{other}'"))),
        }
    }
    match (ts, wm, origin) {
        (Some(t), Some(w), Some(o)) => Ok((t, w, o)),
        _ => Err(Error::Parse("header needs ts, wm and origin".into())),
    }
}

pub fn signal_from_csv_str(text: &str) -> Result<SampledSignal> {
    let mut lines = text.lines();
    let (ts, wm, origin) = parse_header(lines.next().unwrap_or("").trim())?;
    let values = lines
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| Error::Parse(format!("sample line {}: {e}", i + 2)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let grid = SamplingGrid::new(ts, wm, values.len())?.with_origin(origin);
    SampledSignal::new(grid, values)
}

pub fn signal_to_bytes(signal: &SampledSignal) -> Result<Vec<u8>> {
    let g = &signal.grid;
    let len = u32::try_from(signal.len())
        .map_err(|_| Error::Config(format!("{} samples do not fit the binary header", signal.len())))?;
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 8 * signal.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&g.sample_interval.to_le_bytes());
    out.extend_from_slice(&g.band_edge.to_le_bytes());
    out.extend_from_slice(&g.origin.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
    debug_assert_eq!(out.len(), BINARY_HEADER_LEN);
    for v in &signal.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn signal_from_bytes(bytes: &[u8]) -> Result<SampledSignal> {
    if bytes.len() < BINARY_HEADER_LEN || &bytes[..4] != BINARY_MAGIC {
        return Err(Error::Parse("not a UFK1 signal file".into()));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let ts = f(4);
    let wm = f(12);
    let origin = i64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    let len = u32::from_le_bytes(bytes[28..32].try_into().expect("4 bytes")) as usize;
    let body = &bytes[BINARY_HEADER_LEN..];
    if body.len() != 8 * len {
        return Err(Error::Parse(format!(
            "header announces {len} samples, body holds {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let grid = SamplingGrid::new(ts, wm, len)?.with_origin(origin);
    SampledSignal::new(grid, values)
}

fn is_binary_path(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("bin" | "ufk"))
}

/// Writes `.bin`/`.ufk` paths in the binary layout, anything else as text.
pub fn write_signal(signal: &SampledSignal, path: &Path) -> Result<()> {
    let bytes = if is_binary_path(path) {
        signal_to_bytes(signal)?
    } else {
        signal_to_csv_string(signal).into_bytes()
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads either layout; binary files are recognized by their magic.
pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = if bytes.starts_with(BINARY_MAGIC) {
        signal_from_bytes(&bytes)
    } else {
        std::str::from_utf8(&bytes)
            .map_err(|e| Error::Parse(e.to_string()))
            .and_then(signal_from_csv_str)
    };
    parsed.map_err(|e| Error::io(path, e))
}

/// Per-sample recovery dump. `truth` may be absent, in which case that
/// column is left empty.
pub fn recovery_to_csv_string(
    truth: Option<&SampledSignal>,
    folded: &SampledSignal,
    recovered: &SampledSignal,
) -> Result<String> {
    if recovered.len() != folded.len() || truth.is_some_and(|t| t.len() != folded.len()) {
        return Err(Error::Config("recovery columns differ in length".into()));
    }
    let mut out = String::from("n,true,folded,recovered,residual\n");
    for (p, n) in folded.grid.indices().enumerate() {
        let y = folded.values[p];
        let r = recovered.values[p];
        let t = truth.map(|t| t.values[p].to_string()).unwrap_or_default();
        writeln!(out, "{n},{t},{y},{r},{}", r - y).expect("writing to a String");
    }
    Ok(out)
}

pub fn spectrum_to_csv_string(slice: &SpectrumSlice) -> String {
    let mut out = String::from("omega,re,im\n");
    for (w, v) in slice.omegas.iter().zip(&slice.values) {
        writeln!(out, "{w},{},{}", v.re, v.im).expect("writing to a String");
    }
    out
}
