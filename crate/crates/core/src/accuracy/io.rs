//! CSV formats.
//!
//! Score matrix: header `label,c1,...,ck`, one row per test point, labels
//! 1-based. Win counts: header `class,repeat,v,k`, one row per test point.
//! Half-tie win counts are written with one decimal (`3.5`, `2.0`) and parse
//! back as doubled counts.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{ScoreMatrix, WinCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Scores(ScoreMatrix),
    Wins(WinCounts),
}

fn parse_err(file: &Path, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line: line as usize,
        column,
        message: message.into(),
    }
}

fn reader<R: Read>(src: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(src)
}

fn csv_err(file: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    parse_err(file, line, 1, e.to_string())
}

pub fn read_score_matrix(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let path = path.as_ref();
    parse_score_matrix(File::open(path)?, path)
}

pub fn parse_score_matrix<R: Read>(src: R, name: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let name = name.as_ref();
    let mut rdr = reader(src);
    let header = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    if header.get(0) != Some("label") {
        return Err(parse_err(name, 1, 1, "first column must be `label`"));
    }
    let k = header.len() - 1;
    for (c, h) in header.iter().enumerate().skip(1) {
        if h != format!("c{c}") {
            return Err(parse_err(name, 1, c + 1, format!("expected column `c{c}`, found `{h}`")));
        }
    }
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != k + 1 {
            return Err(parse_err(name, line, rec.len().min(k + 1), format!("expected {} fields, found {}", k + 1, rec.len())));
        }
        let label: usize = rec[0]
            .parse()
            .map_err(|_| parse_err(name, line, 1, format!("bad label `{}`", &rec[0])))?;
        if label == 0 || label > k {
            return Err(parse_err(name, line, 1, format!("label {label} outside 1..={k}")));
        }
        labels.push(label);
        for c in 1..=k {
            let v: f64 = rec[c]
                .parse()
                .map_err(|_| parse_err(name, line, c + 1, format!("bad score `{}`", &rec[c])))?;
            if !v.is_finite() {
                return Err(parse_err(name, line, c + 1, "score is not finite"));
            }
            scores.push(v);
        }
    }
    ScoreMatrix::from_flat(k, scores, labels)
}

pub fn write_score_matrix<W: Write>(dst: W, s: &ScoreMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    let mut header = vec!["label".to_string()];
    header.extend((1..=s.k()).map(|c| format!("c{c}")));
    w.write_record(&header)?;
    for (label, row) in s.rows() {
        let mut rec = vec![label.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_win_counts(path: impl AsRef<Path>) -> Result<WinCounts> {
    let path = path.as_ref();
    parse_win_counts(File::open(path)?, path)
}

pub fn parse_win_counts<R: Read>(src: R, name: impl AsRef<Path>) -> Result<WinCounts> {
    let name = name.as_ref();
    let mut rdr = reader(src);
    let header = rdr.headers().map_err(|e| csv_err(name, e))?.clone();
    for (c, expected) in ["class", "repeat", "v", "k"].iter().enumerate() {
        if header.get(c) != Some(*expected) {
            return Err(parse_err(name, 1, c + 1, format!("expected column `{expected}`")));
        }
    }
    // (class, repeat, doubled value, line)
    let mut rows: Vec<(usize, usize, u32, u64)> = Vec::new();
    let mut k: Option<usize> = None;
    let mut doubled = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 4 {
            return Err(parse_err(name, line, rec.len().min(4), format!("expected 4 fields, found {}", rec.len())));
        }
        let int = |c: usize, what: &str| -> Result<usize> {
            rec[c]
                .parse()
                .map_err(|_| parse_err(name, line, c + 1, format!("bad {what} `{}`", &rec[c])))
        };
        let class = int(0, "class")?;
        let repeat = int(1, "repeat")?;
        let row_k = int(3, "k")?;
        match k {
            None => k = Some(row_k),
            Some(k0) if k0 != row_k => {
                return Err(parse_err(name, line, 4, format!("k = {row_k} disagrees with earlier k = {k0}")))
            }
            _ => {}
        }
        if class == 0 || class > row_k {
            return Err(parse_err(name, line, 1, format!("class {class} outside 1..={row_k}")));
        }
        if repeat == 0 {
            return Err(parse_err(name, line, 2, "repeats are 1-based"));
        }
        let text = &rec[2];
        let twice = if text.contains('.') {
            doubled = true;
            let v: f64 = text
                .parse()
                .map_err(|_| parse_err(name, line, 3, format!("bad win count `{text}`")))?;
            let t = 2.0 * v;
            if t < 0.0 || t.fract() != 0.0 {
                return Err(parse_err(name, line, 3, format!("win count `{text}` is not a multiple of 1/2")));
            }
            t as u32
        } else {
            let v: u32 = text
                .parse()
                .map_err(|_| parse_err(name, line, 3, format!("bad win count `{text}`")))?;
            2 * v
        };
        if twice > 2 * (row_k as u32 - 1) {
            return Err(parse_err(name, line, 3, format!("win count {text} exceeds k - 1 = {}", row_k - 1)));
        }
        rows.push((class, repeat, twice, line));
    }
    let k = k.ok_or_else(|| parse_err(name, 1, 1, "no win-count rows"))?;
    rows.sort_by_key(|r| (r.0, r.1));
    let mut per_class = vec![Vec::new(); k];
    for (class, repeat, twice, line) in rows {
        let slot: &mut Vec<u32> = &mut per_class[class - 1];
        if repeat != slot.len() + 1 {
            return Err(parse_err(
                name,
                line,
                2,
                format!("class {class}: repeat {repeat} out of sequence (expected {})", slot.len() + 1),
            ));
        }
        slot.push(if doubled { twice } else { twice / 2 });
    }
    if doubled {
        WinCounts::new_doubled(k, per_class)
    } else {
        WinCounts::new(k, per_class)
    }
}

pub fn write_win_counts<W: Write>(dst: W, w: &WinCounts) -> Result<()> {
    let mut out = csv::Writer::from_writer(dst);
    out.write_record(["class", "repeat", "v", "k"])?;
    let k = w.k().to_string();
    for (i, reps) in w.raw().iter().enumerate() {
        for (j, &raw) in reps.iter().enumerate() {
            let v = if w.is_doubled() {
                format!("{:.1}", raw as f64 / 2.0)
            } else {
                raw.to_string()
            };
            out.write_record([(i + 1).to_string(), (j + 1).to_string(), v, k.clone()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads either format, chosen by the header line.
pub fn read_input(path: impl AsRef<Path>) -> Result<Input> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_input(&text, path)
}

pub fn parse_input(text: &str, name: impl Into<PathBuf>) -> Result<Input> {
    let name = name.into();
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with("label") {
        parse_score_matrix(text.as_bytes(), &name).map(Input::Scores)
    } else if first.starts_with("class") {
        parse_win_counts(text.as_bytes(), &name).map(Input::Wins)
    } else {
        Err(parse_err(&name, 1, 1, "unrecognized header (expected `label,...` or `class,repeat,v,k`)"))
    }
}
