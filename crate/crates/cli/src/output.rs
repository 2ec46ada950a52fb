//! CSV artifacts: `#` metadata lines, one header row, then data rows.

use std::io::Write;

use crate::config::ResolvedConfig;
use crate::error::Result;

/// A rendered table; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros dropped,
/// exponent form outside `[1e-5, 1e9)`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g9).unwrap_or_default()
}

/// Metadata lines for a sweep artifact.
pub fn sweep_metadata(cfg: &ResolvedConfig) -> Vec<String> {
    vec![
        format!("cwf {}", env!("CARGO_PKG_VERSION")),
        format!("kind: {}", cfg.kind.name()),
        format!("config_sha256: {}", cfg.hash_hex()),
        format!(
            "seed: {}",
            cfg.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into())
        ),
        "power: configured in dB, used as linear p = 10^(dB/10)".into(),
    ]
}

pub fn write_csv<W: Write>(out: W, metadata: &[String], table: &Table) -> Result<()> {
    let mut out = out;
    for line in metadata {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_csv(metadata: &[String], table: &Table) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, metadata, table)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g9_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (1052.0334275725735, "1052.03343"),
            (2455.507358760906, "2455.50736"),
            (123456789.4, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.00012345678912, "0.000123456789"),
            (0.0000012345, "1.2345e-06"),
            (-3.25, "-3.25"),
            (99999999999.0, "1e+11"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec!["1".into(), "x,y".into()]);
        let bytes = render_csv(&["meta".into()], &t).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "# meta\na,b\n1,\"x,y\"\n");
    }
}
