use std::io::{Read, Write};

use crate::deployment::Method;
use crate::error::{Error, Result};
use crate::geometry::RisPose;

use super::config::SweepVariable;
use super::experiment::ResultRow;

pub const HEADER: [&str; 11] =
    ["method", "sweep_variable", "sweep_value", "sum_rate_bps_hz", "std_error", "iterations", "d0", "phi0", "h0", "phiR", "seed"];

/// Nine significant digits, exponent form.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Write rows as CSV with a header, LF line endings and nine-digit floats.
pub fn emit_csv<W: Write>(rows: &[ResultRow], dest: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(dest);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.sweep_variable.as_str().to_string(),
            format_float(r.sweep_value),
            format_float(r.sum_rate),
            format_float(r.std_error),
            r.iterations.to_string(),
            format_float(r.pose.d0),
            format_float(r.pose.phi0),
            format_float(r.pose.h0),
            format_float(r.pose.phi_r),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    emit_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn sweep_variable(s: &str) -> Result<SweepVariable> {
    toml::Value::String(s.to_string())
        .try_into()
        .map_err(|_| Error::Validation(format!("unknown sweep variable `{s}`")))
}

/// Parse CSV produced by [`emit_csv`].
pub fn parse_csv<R: Read>(src: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(src);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, message: "unexpected CSV header".into() });
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let bad = |what: &str| Error::Parse { line, message: format!("invalid {what}") };
        if rec.len() != HEADER.len() {
            return Err(bad("column count"));
        }
        let f = |j: usize| rec[j].parse::<f64>().map_err(|_| bad(HEADER[j]));
        rows.push(ResultRow {
            method: rec[0].parse::<Method>().map_err(|_| bad("method"))?,
            sweep_variable: sweep_variable(&rec[1]).map_err(|_| bad("sweep_variable"))?,
            sweep_value: f(2)?,
            sum_rate: f(3)?,
            std_error: f(4)?,
            iterations: rec[5].parse().map_err(|_| bad("iterations"))?,
            pose: RisPose { d0: f(6)?, phi0: f(7)?, h0: f(8)?, phi_r: f(9)? },
            seed: rec[10].parse().map_err(|_| bad("seed"))?,
            failure: None,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            method: Method::Heuristic,
            sweep_variable: SweepVariable::PowerDbm,
            sweep_value: v,
            sum_rate: 12.345678912345,
            std_error: 0.0123,
            iterations: 3,
            pose: RisPose { d0: 10.0, phi0: 0.785398163, h0: 9.41, phi_r: 5.5 },
            seed: 42,
            failure: None,
        }
    }

    #[test]
    fn one_row_two_lines() {
        let s = emit_csv_string(&[row(25.0)]);
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert_eq!(s.lines().next().unwrap(), HEADER.join(","));
        assert!(s.contains("1.23456789e1"));
    }

    #[test]
    fn fixed_column_count() {
        let s = emit_csv_string(&[row(0.0), row(10.0), row(-5.5)]);
        assert!(s.lines().all(|l| l.split(',').count() == 11));
    }

    #[test]
    fn round_trip() {
        let rows = vec![row(0.0), row(30.0)];
        let text = emit_csv_string(&rows);
        let back = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(emit_csv_string(&back), text);
        assert_eq!(back[1].sweep_value, 30.0);
        assert_eq!(back[0].sum_rate, 1.23456789e1);
        assert_eq!(back[0].seed, 42);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_float(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(format_float(0.0), "0.00000000e0");
    }
}
