//! On-disk formats: trajectory, workspace and contact CSV files, the metrics
//! JSON array and the run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! file reads back to identical values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use snakefit_core::analysis::{ContactPattern, GaitTrajectory, Method, ReportRecord};
use snakefit_core::Vec3;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Malformed(String),
}

type Result<T> = std::result::Result<T, FormatError>;

fn malformed(what: impl Into<String>) -> FormatError {
    FormatError::Malformed(what.into())
}

fn parse_f64(field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| malformed(format!("not a number: {field:?}")))
}

/// Joint angles per frame, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub angles: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn from_trajectory(traj: &GaitTrajectory) -> Self {
        TrajectoryTable {
            times: traj.frames().iter().map(|f| f.time).collect(),
            angles: traj.frames().iter().map(|f| f.config.joint_angles.clone()).collect(),
        }
    }
}

/// Header `t,theta_1..theta_n`, one row per frame.
pub fn write_trajectory<W: Write>(out: W, table: &TrajectoryTable) -> Result<()> {
    let joints = table.angles.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> =
        std::iter::once("t".to_string()).chain((1..=joints).map(|i| format!("theta_{i}"))).collect();
    w.write_record(&header)?;
    for (t, row) in table.times.iter().zip(&table.angles) {
        w.write_record(std::iter::once(t).chain(row).map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<TrajectoryTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("t") {
        return Err(malformed("trajectory header must start with `t`"));
    }
    for (i, name) in header.iter().enumerate().skip(1) {
        if name != format!("theta_{i}") {
            return Err(malformed(format!("unexpected column {name:?}")));
        }
    }
    let mut table = TrajectoryTable { times: Vec::new(), angles: Vec::new() };
    for record in r.records() {
        let record = record?;
        let values = record.iter().map(parse_f64).collect::<Result<Vec<_>>>()?;
        table.times.push(values[0]);
        table.angles.push(values[1..].to_vec());
    }
    Ok(table)
}

/// Header `frame,t,point,x,y,z`, one row per chain point per frame.
pub fn write_workspace<W: Write>(out: W, traj: &GaitTrajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "t", "point", "x", "y", "z"])?;
    for (k, frame) in traj.frames().iter().enumerate() {
        for (i, p) in frame.workspace.points.iter().enumerate() {
            w.write_record([
                k.to_string(),
                frame.time.to_string(),
                i.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Chain points grouped by frame, with frame times.
pub fn read_workspace<R: Read>(input: R) -> Result<Vec<(f64, Vec<Vec3>)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut frames: Vec<(f64, Vec<Vec3>)> = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != 6 {
            return Err(malformed("workspace rows need 6 fields"));
        }
        let frame: usize = record[0].parse().map_err(|_| malformed("bad frame index"))?;
        let point: usize = record[2].parse().map_err(|_| malformed("bad point index"))?;
        let t = parse_f64(&record[1])?;
        let p = Vec3::new(parse_f64(&record[3])?, parse_f64(&record[4])?, parse_f64(&record[5])?);
        if frame == frames.len() {
            frames.push((t, Vec::new()));
        }
        let Some(entry) = frames.get_mut(frame) else {
            return Err(malformed("workspace frames out of order"));
        };
        if point != entry.1.len() {
            return Err(malformed("workspace points out of order"));
        }
        entry.1.push(p);
    }
    Ok(frames)
}

/// One row per marker, one 0/1 column per frame, no header.
pub fn write_contact<W: Write>(out: W, pattern: &ContactPattern) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for m in 0..pattern.marker_count() {
        w.write_record(pattern.row(m).iter().map(|&c| if c { "1" } else { "0" }))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_contact<R: Read>(input: R) -> Result<ContactPattern> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut rows = Vec::new();
    for record in r.records() {
        let row = record?
            .iter()
            .map(|c| match c {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(malformed(format!("contact cell {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let frames = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != frames) {
        return Err(malformed("ragged contact rows"));
    }
    ContactPattern::from_cells(rows.len(), frames, rows.concat()).map_err(|e| malformed(e.to_string()))
}

pub fn write_metrics<W: Write>(mut out: W, records: &[ReportRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_metrics<R: Read>(input: R) -> Result<Vec<ReportRecord>> {
    Ok(serde_json::from_reader(input)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub method: Method,
    pub f_hz: f64,
    pub trajectory: String,
    pub workspace: String,
    pub contact: String,
    pub overlay: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDesired {
    pub f_hz: f64,
    pub contact: String,
}

/// Index of the files a run produced, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub gait: String,
    pub config: String,
    pub metrics: String,
    pub runs: Vec<ManifestRun>,
    pub desired_contact: Vec<ManifestDesired>,
}

pub fn write_manifest<W: Write>(mut out: W, manifest: &Manifest) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, manifest)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_manifest<R: Read>(input: R) -> Result<Manifest> {
    Ok(serde_json::from_reader(input)?)
}
