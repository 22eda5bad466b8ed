//! Text formats: tab-separated edge lists and CSV feature tables.
//!
//! Edge list: one `source<TAB>target` pair per line, 0-based, `#` starts a
//! comment line. Feature table: header row, entity index in the first column,
//! real features after it.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub fn parse_edge_list(text: &str, origin: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line: lineno + 1,
            message,
        };
        let mut fields = line.split('\t');
        let (Some(s), Some(t), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!(
                "expected `source<TAB>target`, got {line:?}"
            )));
        };
        let s = s
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad source index {s:?}: {e}")))?;
        let t = t
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad target index {t:?}: {e}")))?;
        edges.push((s, t));
    }
    Ok(edges)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

pub fn write_edge_list<W: Write>(mut w: W, edges: &[(usize, usize)]) -> Result<()> {
    for (s, t) in edges {
        writeln!(w, "{s}\t{t}")?;
    }
    Ok(())
}

/// Parses a feature table. Rows may appear in any order but every index in
/// `0..rows` must occur exactly once.
pub fn parse_features<R: Read>(reader: R, origin: &str) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 1 {
        return Err(Error::Parse {
            origin: origin.to_string(),
            line: 1,
            message: "header must name the index column".into(),
        });
    }
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            origin: origin.to_string(),
            line,
            message,
        };
        if record.len() != width {
            return Err(parse_err(format!(
                "expected {width} fields, found {}",
                record.len()
            )));
        }
        let idx = record[0]
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad index {:?}: {e}", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| {
                let v = f
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("bad value {f:?}: {e}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(format!("non-finite value {f:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((idx, values));
    }
    rows.sort_by_key(|r| r.0);
    for (expect, (idx, _)) in rows.iter().enumerate() {
        if *idx != expect {
            return Err(Error::Parse {
                origin: origin.to_string(),
                line: 0,
                message: format!("indices must cover 0..{} exactly; missing or repeated {expect}", rows.len()),
            });
        }
    }
    let data: Vec<f64> = rows.into_iter().flat_map(|r| r.1).collect();
    let n = data.len() / (width - 1).max(1);
    Matrix::new(if width == 1 { 0 } else { n }, width - 1, data)
}

pub fn read_features(path: &Path) -> Result<Matrix> {
    let file = fs::File::open(path)?;
    parse_features(file, &path.display().to_string())
}

/// Writes `index,f0,f1,...` with the given index column name.
pub fn write_features<W: Write>(w: W, index_name: &str, m: &Matrix) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec![index_name.to_string()];
    header.extend((0..m.cols()).map(|j| format!("f{j}")));
    wtr.write_record(&header)?;
    for i in 0..m.rows() {
        let mut rec = vec![i.to_string()];
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
