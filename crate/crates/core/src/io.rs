//! CSV datasets, result tables and the JSON-lines run manifest.
//!
//! Labeled files have the header `x0,...,x{d-1},y` with an optional trailing
//! `origin` column holding `Q`, `P` or `P1..Pm`. Numbers are written in the
//! shortest form that parses back to the same value.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Label, LabeledSample, MultiSourceDataset, SampleSet, TransferDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulation::ExperimentRecord;

/// Contents of a labeled CSV file, shaped by its origin column.
#[derive(Debug, Clone, PartialEq)]
pub enum LabeledData<T> {
    /// No origin column.
    Single(SampleSet<T>),
    /// Origins `P` and `Q` only.
    Transfer(TransferDataset<T>),
    /// At least one numbered source tag.
    Multi(MultiSourceDataset<T>),
}

impl<T: Scalar> LabeledData<T> {
    pub fn d(&self) -> usize {
        match self {
            LabeledData::Single(s) => s.d,
            LabeledData::Transfer(t) => t.d(),
            LabeledData::Multi(m) => m.d(),
        }
    }

    /// Views the data as multi-source; a plain set becomes the target sample
    /// next to one empty source.
    pub fn into_multi(self) -> MultiSourceDataset<T> {
        match self {
            LabeledData::Single(s) => MultiSourceDataset {
                sources: vec![SampleSet::empty(s.d)],
                q_data: s,
            },
            LabeledData::Transfer(t) => t.into(),
            LabeledData::Multi(m) => m,
        }
    }

    /// All rows as one set, target rows first.
    pub fn pooled(&self) -> SampleSet<T> {
        match self {
            LabeledData::Single(s) => s.clone(),
            LabeledData::Transfer(t) => t.pooled(),
            LabeledData::Multi(m) => m.merge_sources().pooled(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Q,
    PlainP,
    Numbered(usize),
}

fn parse_tag(s: &str, line: u64) -> Result<Tag> {
    let unknown = || Error::UnknownOrigin {
        line,
        tag: s.to_string(),
    };
    match s {
        "Q" => Ok(Tag::Q),
        "P" => Ok(Tag::PlainP),
        _ => {
            let digits = s.strip_prefix('P').ok_or_else(unknown)?;
            if digits.starts_with('0') {
                return Err(unknown());
            }
            let i: usize = digits.parse().map_err(|_| unknown())?;
            Ok(Tag::Numbered(i - 1))
        }
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Column layout found in a header row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    d: usize,
    label: bool,
    origin: bool,
}

fn parse_header(header: &csv::StringRecord, need_label: bool) -> Result<Layout> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let d = names
        .iter()
        .enumerate()
        .take_while(|(i, n)| **n == format!("x{i}"))
        .count();
    let rest = &names[d..];
    let (label, origin) = match rest {
        [] => (false, false),
        ["y"] => (true, false),
        ["y", "origin"] => (true, true),
        _ => {
            return Err(parse_error(
                1,
                format!(
                    "expected header x0..x{{d-1}},y[,origin], found {:?}",
                    names.join(",")
                ),
            ))
        }
    };
    if d == 0 {
        return Err(parse_error(1, "no feature columns"));
    }
    if need_label && !label {
        return Err(parse_error(1, "missing label column y"));
    }
    Ok(Layout { d, label, origin })
}

fn parse_coords<T: Scalar>(record: &csv::StringRecord, d: usize, line: u64) -> Result<Vec<T>> {
    (0..d)
        .map(|j| {
            let raw = record[j].trim();
            let v = raw.parse::<T>().map_err(|_| {
                parse_error(line, format!("x{j}: cannot parse {raw:?} as a number"))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_error(line, format!("x{j}: non-finite value {raw:?}")))
            }
        })
        .collect()
}

fn parse_label(raw: &str, line: u64) -> Result<Label> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(parse_error(
            line,
            format!("label must be 0 or 1, found {other:?}"),
        )),
    }
}

fn records<R: Read>(reader: R) -> Result<(csv::StringRecord, Vec<(u64, csv::StringRecord)>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_error(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((line, rec));
    }
    Ok((header, rows))
}

/// Parses labeled rows from any reader.
pub fn parse_labeled_csv<T: Scalar, R: Read>(reader: R) -> Result<LabeledData<T>> {
    let (header, rows) = records(reader)?;
    let layout = parse_header(&header, true)?;
    let d = layout.d;
    let mut q = SampleSet::empty(d);
    let mut plain_p = SampleSet::empty(d);
    let mut numbered: Vec<SampleSet<T>> = Vec::new();
    for (line, rec) in rows {
        let x = parse_coords(&rec, d, line)?;
        let y = parse_label(&rec[d], line)?;
        let sample = LabeledSample { x, y };
        if !layout.origin {
            q.push(sample);
            continue;
        }
        match parse_tag(rec[d + 1].trim(), line)? {
            Tag::Q => q.push(sample),
            Tag::PlainP => plain_p.push(sample),
            Tag::Numbered(i) => {
                if numbered.len() <= i {
                    numbered.resize_with(i + 1, || SampleSet::empty(d));
                }
                numbered[i].push(sample);
            }
        }
    }
    if !layout.origin {
        return Ok(LabeledData::Single(q));
    }
    if numbered.is_empty() {
        return Ok(LabeledData::Transfer(TransferDataset::new(plain_p, q)?));
    }
    // A bare `P` next to numbered tags denotes the first source.
    let first = &mut numbered[0];
    first.samples.splice(0..0, plain_p.samples);
    Ok(LabeledData::Multi(MultiSourceDataset::new(numbered, q)?))
}

pub fn read_labeled_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledData<T>> {
    parse_labeled_csv(File::open(path)?)
}

/// Feature rows of an evaluation file, with labels when a `y` column exists.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    pub d: usize,
    pub points: Vec<Vec<T>>,
    pub labels: Option<Vec<Label>>,
}

pub fn parse_points_csv<T: Scalar, R: Read>(reader: R) -> Result<PointSet<T>> {
    let (header, rows) = records(reader)?;
    let layout = parse_header(&header, false)?;
    let mut points = Vec::with_capacity(rows.len());
    let mut labels = layout.label.then(Vec::new);
    for (line, rec) in rows {
        points.push(parse_coords(&rec, layout.d, line)?);
        if let Some(l) = labels.as_mut() {
            l.push(parse_label(&rec[layout.d], line)?);
        }
    }
    Ok(PointSet {
        d: layout.d,
        points,
        labels,
    })
}

pub fn read_points_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<PointSet<T>> {
    parse_points_csv(File::open(path)?)
}

fn header_row(d: usize, origin: bool) -> Vec<String> {
    let mut h: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    h.push("y".into());
    if origin {
        h.push("origin".into());
    }
    h
}

fn write_rows<T: Scalar, W: Write>(
    wtr: &mut csv::Writer<W>,
    set: &SampleSet<T>,
    tag: Option<&str>,
) -> Result<()> {
    for s in &set.samples {
        let mut row: Vec<String> = s.x.iter().map(ToString::to_string).collect();
        row.push(s.y.to_string());
        if let Some(t) = tag {
            row.push(t.to_string());
        }
        wtr.write_record(&row)?;
    }
    Ok(())
}

/// Writes labeled data in the layout [`parse_labeled_csv`] reads back.
///
/// A source without rows leaves no trace in the file, so trailing empty
/// sources do not survive a round trip.
pub fn write_labeled_csv<T: Scalar, W: Write>(writer: W, data: &LabeledData<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    match data {
        LabeledData::Single(s) => {
            wtr.write_record(header_row(s.d, false))?;
            write_rows(&mut wtr, s, None)?;
        }
        LabeledData::Transfer(t) => {
            wtr.write_record(header_row(t.d(), true))?;
            write_rows(&mut wtr, &t.p_data, Some("P"))?;
            write_rows(&mut wtr, &t.q_data, Some("Q"))?;
        }
        LabeledData::Multi(m) => {
            wtr.write_record(header_row(m.d(), true))?;
            for (i, s) in m.sources.iter().enumerate() {
                write_rows(&mut wtr, s, Some(&format!("P{}", i + 1)))?;
            }
            write_rows(&mut wtr, &m.q_data, Some("Q"))?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_labeled_csv<T: Scalar>(path: impl AsRef<Path>, data: &LabeledData<T>) -> Result<()> {
    write_labeled_csv(BufWriter::new(File::create(path)?), data)
}

/// Tidy results table: one row per method and grid point.
pub fn write_records_csv<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// One line of the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    /// Stamps `config` with the library version and the given start time;
    /// the finish time is taken now.
    pub fn new<C: Serialize>(
        config: &C,
        seed: u64,
        started: chrono::DateTime<chrono::Utc>,
    ) -> Result<Self> {
        Ok(Self {
            config: serde_json::to_value(config)?,
            seed,
            version: crate::VERSION.to_string(),
            started: started.to_rfc3339(),
            finished: chrono::Utc::now().to_rfc3339(),
        })
    }
}

/// Appends one JSON line.
pub fn append_manifest(path: impl AsRef<Path>, manifest: &RunManifest) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(manifest)?;
    line.push('\n');
    f.write_all(line.as_bytes())?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<RunManifest>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Pretty-printed JSON document, e.g. a rate-check report.
pub fn save_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledData<f64>> {
        parse_labeled_csv(text.as_bytes())
    }

    #[test]
    fn transfer_split() {
        let data = parse("x0,x1,y,origin\n0.1,0.2,1,P\n0.3,0.4,0,P\n0.5,0.6,1,Q\n").unwrap();
        let LabeledData::Transfer(t) = data else {
            panic!("expected transfer data")
        };
        assert_eq!((t.n_p(), t.n_q()), (2, 1));
        assert_eq!(t.q_data.samples[0].x, vec![0.5, 0.6]);
    }

    #[test]
    fn single_without_origin() {
        let data = parse("x0,y\n1.5,0\n2.5,1\n").unwrap();
        assert!(matches!(data, LabeledData::Single(ref s) if s.len() == 2));
    }

    #[test]
    fn bad_label_cites_line() {
        let err = parse("x0,y\n0.1,0\n0.2,1\n0.3,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains('4'));
    }

    #[test]
    fn unknown_origin() {
        for tag in ["R", "P0", "Px", "p", "P01"] {
            let err = parse(&format!("x0,y,origin\n0.1,0,Q\n0.2,1,{tag}\n")).unwrap_err();
            assert!(
                matches!(err, Error::UnknownOrigin { line: 3, .. }),
                "{tag}: {err}"
            );
        }
    }

    #[test]
    fn numbered_sources() {
        let data = parse("x0,y,origin\n0,1,P2\n1,0,Q\n2,1,P1\n3,0,P\n").unwrap();
        let LabeledData::Multi(m) = data else {
            panic!("expected multi-source data")
        };
        assert_eq!(m.source_sizes(), vec![2, 1]);
        assert_eq!(m.sources[0].samples[0].x, vec![3.0]);
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(
            parse("x0,y\n0.1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("x0,y\nabc,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("x0,y\nNaN,1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("x1,y\n0.1,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("x0,label\n0.1,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = SampleSet::new(2, vec![LabeledSample::new(vec![0.1 + 0.2, 1e-300], 1)]).unwrap();
        let q = SampleSet::new(
            2,
            vec![LabeledSample::new(vec![std::f64::consts::PI, -0.0], 0)],
        )
        .unwrap();
        let data = LabeledData::Transfer(TransferDataset::new(p, q).unwrap());
        let mut buf = Vec::new();
        write_labeled_csv(&mut buf, &data).unwrap();
        let back: LabeledData<f64> = parse_labeled_csv(buf.as_slice()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let data = parse("x0,y,origin\n0.5,1,P\n0.25,0,Q\n").unwrap();
        let path = dir.path().join("d.csv");
        save_labeled_csv(&path, &data).unwrap();
        assert_eq!(read_labeled_csv::<f64>(&path).unwrap(), data);

        let m = dir.path().join("run.manifest.jsonl");
        let started = chrono::Utc::now();
        for seed in [3, 4] {
            let rm = RunManifest::new(&serde_json::json!({ "reps": 10 }), seed, started).unwrap();
            append_manifest(&m, &rm).unwrap();
        }
        let lines = read_manifest(&m).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].seed, 4);
        assert_eq!(lines[0].config["reps"], 10);
        assert_eq!(lines[0].version, crate::VERSION);
    }

    #[test]
    fn records_round_trip() {
        let s = crate::simulation::SimulationSettings::standard(1);
        let recs = crate::simulation::experiment_accuracy_vs_pmax(
            "t",
            &[crate::simulation::Method::Weighted],
            100,
            100,
            &[0.55],
            5,
            &s,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &recs).unwrap();
        let back = read_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].accuracy, recs[0].accuracy);
        assert_eq!(back[0].wall_time_s, 0.0);
    }

    #[test]
    fn points_with_and_without_labels() {
        let p: PointSet<f32> = parse_points_csv("x0,x1\n1,2\n".as_bytes()).unwrap();
        assert_eq!(p.points, vec![vec![1.0f32, 2.0]]);
        assert!(p.labels.is_none());
        let p: PointSet<f64> = parse_points_csv("x0,y\n1,1\n".as_bytes()).unwrap();
        assert_eq!(p.labels, Some(vec![1]));
    }
}
