//! File formats: single-column CSV signals, binary PGM images, JSON reports
//! with CSV mirrors, and JSON segmentation dumps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bench::RateReport;
use crate::error::{Error, Result};
use crate::grid::{Dim, GridSignal};
use crate::segmentation::Segmentation;

/// One value per row. A non-numeric first row is taken as a header.
pub fn read_signal_csv(path: &Path) -> Result<GridSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 1 {
            return Err(Error::Parse(format!("row {}: expected one column, got {}", row + 1, rec.len())));
        }
        match rec[0].parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => return Err(Error::Parse(format!("row {}: non-finite value", row + 1))),
            Err(_) if row == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", row + 1))),
        }
    }
    GridSignal::from_vec_1d(values)
}

pub fn write_signal_csv(path: &Path, signal: &GridSignal) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for v in signal.values() {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn pgm_token<R: Read>(bytes: &mut std::iter::Peekable<std::io::Bytes<R>>) -> Result<String> {
    let mut tok = String::new();
    while let Some(b) = bytes.next() {
        let b = b?;
        if b == b'#' && tok.is_empty() {
            for c in bytes.by_ref() {
                if c? == b'\n' {
                    break;
                }
            }
        } else if b.is_ascii_whitespace() {
            if !tok.is_empty() {
                break;
            }
        } else {
            tok.push(b as char);
        }
    }
    if tok.is_empty() {
        return Err(Error::Parse("truncated PGM header".into()));
    }
    Ok(tok)
}

/// Binary PGM (P5). Rows in file order become grid rows `y = 0, 1, ..`;
/// values are mapped to `[0, 1]` as `b / maxval`. Images must be square.
pub fn read_pgm(path: &Path) -> Result<GridSignal> {
    let mut bytes = BufReader::new(File::open(path)?).bytes().peekable();
    if pgm_token(&mut bytes)? != "P5" {
        return Err(Error::Parse("not a binary PGM (P5)".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        pgm_token(&mut bytes)?
            .parse()
            .map_err(|_| Error::Parse(format!("bad PGM {what}")))
    };
    let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported maxval {maxval}")));
    }
    if w != h {
        return Err(Error::Dimension(format!("image is {w}x{h}, expected a square")));
    }
    let data: Vec<u8> = bytes.take(w * h).collect::<std::io::Result<_>>()?;
    if data.len() != w * h {
        return Err(Error::Parse("truncated PGM raster".into()));
    }
    GridSignal::new(Dim::Two, w, data.iter().map(|&b| b as f64 / maxval as f64).collect())
}

/// Inverse of [`read_pgm`] with maxval 255; values are clamped to `[0, 1]`.
pub fn write_pgm(path: &Path, image: &GridSignal) -> Result<()> {
    if image.dim() != Dim::Two {
        return Err(Error::Dimension("PGM output needs a 2D signal".into()));
    }
    let n = image.side();
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let raster: Vec<u8> = image
        .values()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    w.write_all(&raster)?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Fragments (type, square, direction `(p, q)`, `r`, side) with their fitted
/// coefficients, as JSON.
pub fn write_segmentation(path: &Path, seg: &Segmentation) -> Result<()> {
    write_json(path, seg)
}

pub fn read_segmentation(path: &Path) -> Result<Segmentation> {
    let seg: Segmentation = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    seg.validate_partition()?;
    Ok(seg)
}

/// `path` with its extension replaced by `csv`.
pub fn csv_mirror_path(path: &Path) -> PathBuf {
    path.with_extension("csv")
}

/// JSON report plus a CSV mirror of the per-trial records next to it.
/// Returns the CSV path.
pub fn write_rate_report(path: &Path, report: &RateReport) -> Result<PathBuf> {
    write_json(path, report)?;
    let csv_path = csv_mirror_path(path);
    let mut w = csv::Writer::from_path(&csv_path)?;
    for rec in &report.records {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "y\n1.5\n-2\n 3e-1 \n").unwrap();
        let s = read_signal_csv(&p).unwrap();
        assert_eq!(s.values(), &[1.5, -2.0, 0.3]);
        let q = dir.path().join("t.csv");
        write_signal_csv(&q, &s).unwrap();
        assert_eq!(read_signal_csv(&q).unwrap().values(), s.values());
        std::fs::write(&p, "1\nx\n").unwrap();
        assert!(read_signal_csv(&p).is_err());
    }

    #[test]
    fn pgm_roundtrip_and_orientation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        let img = GridSignal::from_fn_2d(4, |x, y| if y == 0 { 1.0 } else { x as f64 / 3.0 }).unwrap();
        write_pgm(&p, &img).unwrap();
        let raw = std::fs::read(&p).unwrap();
        assert!(raw.starts_with(b"P5\n4 4\n255\n"));
        // first stored row is y = 0
        assert_eq!(&raw[raw.len() - 16..raw.len() - 12], &[255, 255, 255, 255]);
        let back = read_pgm(&p).unwrap();
        for (a, b) in back.values().iter().zip(img.values()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn pgm_header_comments_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.pgm");
        let mut bytes = b"P5 # comment\n2 2\n# more\n15\n".to_vec();
        bytes.extend([0, 15, 5, 10]);
        std::fs::write(&p, &bytes).unwrap();
        assert_eq!(read_pgm(&p).unwrap().values(), &[0.0, 1.0, 1.0 / 3.0, 2.0 / 3.0]);
        std::fs::write(&p, b"P5\n2 3\n255\n123456").unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::Dimension(_))));
        std::fs::write(&p, b"P2\n2 2\n255\n1 2 3 4").unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::Parse(_))));
        std::fs::write(&p, b"P5\n2 2\n255\n12").unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::Parse(_))));
    }

    #[test]
    fn segmentation_dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seg.json");
        let img = GridSignal::from_fn_2d(8, |x, y| if x + 2 * y > 9 { 1.0 } else { 0.0 }).unwrap();
        let seg = crate::wedgelet::solve_wedgelet(&img, 0.1, 0, usize::MAX >> 1).unwrap();
        write_segmentation(&p, &seg).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"type\"") && text.contains("coefficients"));
        assert_eq!(read_segmentation(&p).unwrap(), seg);
    }
}
