//! JSON and CSV writers. Every float is printed with 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clt_lab::BoundReport;
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// Compact JSON formatter writing floats as `d.dddddddddddddddde±x`.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn sig17(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes JSON to `out`, or to stdout when `out` is `None`.
pub fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let bytes = to_json(value)?;
    let mut w = sink(out)?;
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// One row per report: name, lhs, rhs, margin, pass, error_budget, params.
pub fn write_csv(reports: &[BoundReport], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record([
        "name",
        "lhs",
        "rhs",
        "margin",
        "pass",
        "error_budget",
        "params",
    ])?;
    for r in reports {
        let params = String::from_utf8(to_json(&r.params)?)?;
        w.write_record([
            r.name.clone(),
            sig17(r.lhs),
            sig17(r.rhs),
            sig17(r.margin),
            r.pass.to_string(),
            sig17(r.error_budget),
            params.trim_end().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 4.1, 1e-300, -2.5e17, 0.0] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(sig17(0.41), "4.0999999999999998e-1");
        // Needs the exact float parser in serde_json.
        let x = 0.085_431_589_991_748_935;
        let back: f64 = serde_json::from_slice(&to_json(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn json_uses_seventeen_digits() {
        let text =
            String::from_utf8(to_json(&serde_json::json!({"a": 0.5, "b": [1, 2.25]})).unwrap())
                .unwrap();
        assert_eq!(
            text,
            "{\"a\":5.0000000000000000e-1,\"b\":[1,2.2500000000000000e0]}\n"
        );
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"][1], 2.25);
    }
}
