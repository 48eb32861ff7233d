//! CSV artifacts: `#`-prefixed metadata lines, one header row, then data.
//! Floats are written with 17 significant digits so they round-trip.

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use std::io::{Read, Write};
use std::ops::RangeInclusive;

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Writer for one CSV artifact.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
    columns: usize,
}

impl<W: Write> CsvSink<W> {
    /// Writes `# key=value` lines, then the header row.
    pub fn new(mut out: W, meta: &[(&str, String)], header: &[&str]) -> Result<Self> {
        for (k, v) in meta {
            let v = v.replace(['\n', '\r'], " ");
            writeln!(out, "# {k}={v}")?;
        }
        let mut inner = csv::WriterBuilder::new().from_writer(out);
        inner.write_record(header)?;
        Ok(CsvSink { inner, columns: header.len() })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        if fields.len() != self.columns {
            return Err(Error::InvalidArgument(format!("row has {} fields, header has {}", fields.len(), self.columns)));
        }
        self.inner.write_record(fields.iter().map(|f| f.as_ref()))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// A parsed CSV artifact.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column by name.
    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name).ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column '{name}'") })?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| parse_f64(&r[c], i + 2))
            .collect()
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { line, msg: format!("expected a finite number, got '{t}'") })
}

/// Splits leading `#` lines (as `key=value` pairs) from the CSV body.
fn split_meta(text: &str) -> (Vec<(String, String)>, usize, &str) {
    let mut meta = Vec::new();
    let mut offset = 0;
    let mut skipped = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('#') {
            let rest = rest.trim();
            match rest.split_once('=') {
                Some((k, v)) => meta.push((k.trim().to_string(), v.trim().to_string())),
                None if !rest.is_empty() => meta.push((rest.to_string(), String::new())),
                None => {}
            }
        } else if !t.is_empty() {
            break;
        }
        offset += line.len();
        skipped += 1;
    }
    (meta, skipped, &text[offset..])
}

fn read_text<R: Read>(mut r: R) -> Result<String> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse { line: 1, msg: format!("not UTF-8: {e}") })
}

/// Parses an artifact with a header row; every row must match its width.
pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let text = read_text(r)?;
    let (meta, skipped, body) = split_meta(&text);
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).comment(Some(b'#')).from_reader(body.as_bytes());
    let mut records = rd.records();
    let header: Vec<String> = match records.next() {
        Some(h) => h?.iter().map(|s| s.trim().to_string()).collect(),
        None => return Err(Error::Parse { line: skipped + 1, msg: "missing header row".into() }),
    };
    if header.iter().any(|h| h.is_empty()) {
        return Err(Error::Parse { line: skipped + 1, msg: "empty column name".into() });
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = skipped + rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::Parse { line, msg: format!("{} fields, header has {}", rec.len(), header.len()) });
        }
        rows.push(rec.iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(Table { meta, header, rows })
}

/// Numeric rows of width `1..=max_width`, skipping `#` lines and a
/// non-numeric first (header) row. All rows share one width.
fn read_numeric<R: Read>(r: R, max_width: usize) -> Result<(Vec<f64>, usize)> {
    let text = read_text(r)?;
    let mut width = 0;
    let mut out = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(',').map(str::trim).collect();
        if first {
            first = false;
            if fields.iter().any(|f| f.parse::<f64>().is_err()) && fields.iter().all(|f| !f.is_empty()) {
                continue;
            }
        }
        if fields.len() > max_width {
            return Err(Error::Parse { line: i + 1, msg: format!("{} fields, at most {max_width} allowed", fields.len()) });
        }
        if width == 0 {
            width = fields.len();
        } else if fields.len() != width {
            return Err(Error::Parse { line: i + 1, msg: format!("{} fields, expected {width}", fields.len()) });
        }
        for f in fields {
            out.push(parse_f64(f, i + 1)?);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    Ok((out, width))
}

/// Reads `x[,y]` rows into a point set with a padded bounding domain.
pub fn read_points<R: Read>(r: R) -> Result<PointSet> {
    let (coords, d) = read_numeric(r, 2)?;
    PointSet::with_bounding_domain(coords, d)
}

/// Reads a single numeric column.
pub fn read_values<R: Read>(r: R) -> Result<Vec<f64>> {
    let (v, w) = read_numeric(r, 1)?;
    debug_assert_eq!(w, 1);
    Ok(v)
}

pub fn write_points<W: Write>(out: W, ps: &PointSet, meta: &[(&str, String)]) -> Result<W> {
    let header: &[&str] = if ps.dim() == 1 { &["x"] } else { &["x", "y"] };
    let mut s = CsvSink::new(out, meta, header)?;
    for p in ps.iter() {
        s.row(&p.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>())?;
    }
    s.finish()
}

pub fn write_values<W: Write>(out: W, name: &str, values: &[f64], meta: &[(&str, String)]) -> Result<W> {
    let mut s = CsvSink::new(out, meta, &[name])?;
    for &v in values {
        s.row(&[fmt_f64(v)])?;
    }
    s.finish()
}

/// Parses `a..b` (inclusive), `a..=b` or a single integer.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let t = s.trim();
    let bad = |msg: &str| Error::Parse { line: 1, msg: format!("{msg}: '{t}'") };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad("expected an integer range"));
    let (a, b) = match t.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = num(t)?;
            (v, v)
        }
    };
    if a > b {
        return Err(bad("range start exceeds end"));
    }
    if b - a > 1_000_000 {
        return Err(bad("range too long"));
    }
    Ok(a..=b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let ps = PointSet::with_bounding_domain(vec![0.1, 1.0 / 3.0, -2.5e-7, 7.0, 0.3, 1e300f64.sqrt()], 2).unwrap();
        let buf = write_points(Vec::new(), &ps, &[("seed", "4".into())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed=4\nx,y\n"));
        let back = read_points(&buf[..]).unwrap();
        assert_eq!(back.coords(), ps.coords());
    }

    #[test]
    fn values_and_bad_input() {
        let v = read_values("# c\nvalue\n1.5\n-2\n\n3e-3\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.5, -2.0, 3e-3]);
        assert!(matches!(read_values("1\n2,3\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_values("1\nfoo\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_values("1\nNaN\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_points("x\n".as_bytes()), Err(Error::EmptyPointSet)));
        assert!(read_points("1,2,3\n".as_bytes()).is_err());
        assert!(read_points("0.5\n0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn table_round_trip() {
        let mut s = CsvSink::new(Vec::new(), &[("command", "tables".into()), ("version", "x".into())], &["K", "sup_error", "pass"]).unwrap();
        s.row(&["5".to_string(), fmt_f64(0.012345678901234567), "true".into()]).unwrap();
        assert!(s.row(&["1"]).is_err());
        let buf = s.finish().unwrap();
        let t = read_table(&buf[..]).unwrap();
        assert_eq!(t.meta[0], ("command".to_string(), "tables".to_string()));
        assert_eq!(t.header, vec!["K", "sup_error", "pass"]);
        assert_eq!(t.f64_column("sup_error").unwrap(), vec![0.012345678901234567]);
        assert!(read_table("a,b\n1\n".as_bytes()).is_err());
        assert!(read_table("# only\n".as_bytes()).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("9..15").unwrap(), 9..=15);
        assert_eq!(parse_range("9..=15").unwrap(), 9..=15);
        assert_eq!(parse_range(" 12 ").unwrap(), 12..=12);
        for bad in ["15..9", "a..b", "", "..", "1..2..3", "-1..4"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
