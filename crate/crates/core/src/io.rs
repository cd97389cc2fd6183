//! Decimal formatting and CSV output for exported datasets.

use std::io::Write;

use crate::error::{Error, Result};

/// Significant digits written for every exported number.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// Plain decimal with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", SIGNIFICANT_DIGITS - 1, 0.0);
    }
    // rounding can carry into a new leading digit, so read the exponent back
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    let out = format!("{x:.decimals$}");
    if out.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        format!("{:.*}", decimals, 0.0)
    } else {
        out
    }
}

/// Writes one header row followed by numeric rows.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Parameter(format!("row has {} fields, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|v| format_decimal(*v))).map_err(io_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(format_decimal(0.5), "0.500000000000000");
        assert_eq!(format_decimal(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_decimal(-2.0 / 3.0), "-0.666666666666667");
        assert_eq!(format_decimal(12.5), "12.5000000000000");
        assert_eq!(format_decimal(0.0), "0.00000000000000");
        assert_eq!(format_decimal(9.9999999999999999), "10.0000000000000");
        assert_eq!(format_decimal(1e-3), "0.00100000000000000");
    }

    #[test]
    fn header_and_rows() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["x".into(), "y".into()], vec![vec![0.0, 1.0], vec![0.25, 0.5]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("x,y"));
        assert_eq!(text.lines().count(), 3);
        assert!(write_csv(Vec::new(), &["x".into()], vec![vec![0.0, 1.0]]).is_err());
    }
}
