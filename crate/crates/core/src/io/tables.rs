//! CSV tables. Header row required, `#` starts a comment line, `.` decimal point.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimation::CurvePrediction;
use crate::fringe::{FringeScan, RatioPoint};

pub const SCAN_HEADER: [&str; 3] = ["position_m", "counts", "dwell_s"];

/// The ratio tables differ only in the name of their abscissa column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioTable {
    /// `distance_m,ratio,ratio_err`
    Curve,
    /// `offset_m,ratio,ratio_err`
    Offsets,
    /// `power_w,ratio,ratio_err`
    Powers,
    /// `grating_power_w,ratio,ratio_err`, the abscissa is informational only.
    Constancy,
}

impl RatioTable {
    pub fn abscissa(self) -> &'static str {
        match self {
            RatioTable::Curve => "distance_m",
            RatioTable::Offsets => "offset_m",
            RatioTable::Powers => "power_w",
            RatioTable::Constancy => "grating_power_w",
        }
    }

    pub fn header(self) -> [&'static str; 3] {
        [self.abscissa(), "ratio", "ratio_err"]
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn table_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Table {
        path: path.to_path_buf(),
        line: line as usize,
        message: message.into(),
    }
}

/// Reads rows of `expected.len()` numbers after checking the header.
fn read_numeric<R: Read>(mut reader: R, path: &Path, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let header_line = text
        .lines()
        .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map_or(1, |i| i as u64 + 1);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| table_err(path, 1, e.to_string()))?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(table_err(
            path,
            header_line,
            format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            table_err(path, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != expected.len() {
            return Err(table_err(
                path,
                line,
                format!("expected {} fields, found {}", expected.len(), rec.len()),
            ));
        }
        let row = rec
            .iter()
            .zip(expected)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| table_err(path, line, format!("{name}: '{field}' is not a finite number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(table_err(path, header_line, "table has no data rows"));
    }
    Ok(rows)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_scan<R: Read>(reader: R, path: &Path) -> Result<FringeScan> {
    let rows = read_numeric(reader, path, &SCAN_HEADER)?;
    let dwell = rows[0][2];
    if let Some(i) = rows.iter().position(|r| r[2] != dwell) {
        return Err(Error::Domain(format!(
            "{}: row {} has dwell_s {} but the scan uses {dwell}; one dwell time per scan",
            path.display(),
            i + 1,
            rows[i][2]
        )));
    }
    let positions = rows.iter().map(|r| r[0]).collect();
    let counts = rows.iter().map(|r| r[1]).collect();
    Ok(FringeScan::new(positions, counts, dwell)?.with_metadata("source", path.display().to_string()))
}

pub fn read_scan(path: impl AsRef<Path>) -> Result<FringeScan> {
    let path = path.as_ref();
    parse_scan(open(path)?, path)
}

pub fn parse_ratio_table<R: Read>(reader: R, path: &Path, kind: RatioTable) -> Result<Vec<RatioPoint>> {
    read_numeric(reader, path, &kind.header())?
        .into_iter()
        .map(|r| RatioPoint::new(r[0], r[1], r[2]))
        .collect()
}

pub fn read_ratio_table(path: impl AsRef<Path>, kind: RatioTable) -> Result<Vec<RatioPoint>> {
    let path = path.as_ref();
    parse_ratio_table(open(path)?, path, kind)
}

fn write_rows<'a>(header: &[&str], rows: impl Iterator<Item = Vec<String>> + 'a) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn scan_to_csv(scan: &FringeScan) -> Vec<u8> {
    let dwell = format_float(scan.dwell_time());
    write_rows(
        &SCAN_HEADER,
        scan.positions()
            .iter()
            .zip(scan.counts())
            .map(move |(x, c)| vec![format_float(*x), format_float(*c), dwell.clone()]),
    )
}

pub fn ratio_table_to_csv(points: &[RatioPoint], kind: RatioTable) -> Vec<u8> {
    write_rows(
        &kind.header(),
        points
            .iter()
            .map(|p| vec![format_float(p.abscissa), format_float(p.ratio), format_float(p.ratio_err)]),
    )
}

/// Plot-ready model curve; optional columns appear only when every row has them.
pub fn prediction_to_csv(rows: &[CurvePrediction]) -> Vec<u8> {
    let mono = rows.iter().all(|r| r.ratio_mono.is_some());
    let band = rows.iter().all(|r| r.band_lo.is_some() && r.band_hi.is_some());
    let mut header = vec!["distance_m", "ratio"];
    if mono {
        header.push("ratio_mono");
    }
    if band {
        header.extend(["band_lo", "band_hi"]);
    }
    write_rows(
        &header,
        rows.iter().map(|r| {
            let mut out = vec![format_float(r.distance_m), format_float(r.ratio)];
            if let (true, Some(m)) = (mono, r.ratio_mono) {
                out.push(format_float(m));
            }
            if let (true, Some(lo), Some(hi)) = (band, r.band_lo, r.band_hi) {
                out.push(format_float(lo));
                out.push(format_float(hi));
            }
            out
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("t.csv")
    }

    #[test]
    fn scan_roundtrip_with_comments() {
        let text = "# scan at D = 3.5 cm\nposition_m,counts,dwell_s\n0,300,1\n# mid-scan note\n";
        let mut body = text.to_string();
        for i in 1..8 {
            body += &format!("{}e-8,{},1\n", i * 3, 300 + i);
        }
        let scan = parse_scan(body.as_bytes(), p()).unwrap();
        assert_eq!(scan.len(), 8);
        let again = parse_scan(&scan_to_csv(&scan)[..], p()).unwrap();
        assert_eq!(again.positions(), scan.positions());
        assert_eq!(again.counts(), scan.counts());
    }

    #[test]
    fn wrong_header_reports_line() {
        let e = parse_ratio_table("# c\nD,ratio,ratio_err\n0.035,0.6,0.03\n".as_bytes(), p(), RatioTable::Curve)
            .unwrap_err();
        match e {
            Error::Table { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let e = parse_ratio_table(
            "distance_m,ratio,ratio_err\n0.035,0.6,0.03\n0.04,abc,0.03\n".as_bytes(),
            p(),
            RatioTable::Curve,
        )
        .unwrap_err();
        assert!(matches!(e, Error::Table { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn mixed_dwell_rejected() {
        let mut body = "position_m,counts,dwell_s\n".to_string();
        for i in 0..8 {
            body += &format!("{i}e-8,300,{}\n", if i == 5 { 2 } else { 1 });
        }
        assert!(matches!(parse_scan(body.as_bytes(), p()), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_table_rejected() {
        assert!(parse_ratio_table("power_w,ratio,ratio_err\n".as_bytes(), p(), RatioTable::Powers).is_err());
    }

    proptest! {
        #[test]
        fn ratio_table_roundtrip_is_exact(
            rows in prop::collection::vec((-1e3f64..1e3, 1e-300f64..1e300, 1e-300f64..1e10), 1..20)
        ) {
            let pts: Vec<RatioPoint> = rows.iter().map(|&(a, r, e)| RatioPoint::new(a, r, e).unwrap()).collect();
            let csv = ratio_table_to_csv(&pts, RatioTable::Offsets);
            let back = parse_ratio_table(&csv[..], p(), RatioTable::Offsets).unwrap();
            prop_assert_eq!(back, pts);
        }

        #[test]
        fn float_format_roundtrips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
