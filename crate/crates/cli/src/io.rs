//! On-disk formats for every pipeline artifact.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! reading a file and writing it back reproduces it byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::Array2;
use roadrough_core::{to_iri_level, Dataset, GeoPoint, IriLevel, ReferenceSegment, TelemetrySample, TelemetryTrace};
use roadrough_geoalign::{AlignedPiece, RoadNetwork};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const TELEMETRY_HEADER: [&str; 5] = ["t_s", "acc_z_ms2", "speed_ms", "lat", "lon"];
pub const REFERENCE_HEADER: [&str; 7] = ["seg_id", "start_lat", "start_lon", "end_lat", "end_lon", "length_m", "iri_mkm"];
pub const PIECES_HEADER: [&str; 4] = ["seg_id", "iri_mkm", "start_sample", "end_sample"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn require(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("missing input file {}", path.display());
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(path)?))
}

fn csv_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    require(path)?;
    let mut r = csv::ReaderBuilder::new().from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let found = r.headers().with_context(|| format!("reading header of {}", path.display()))?;
    if found.iter().ne(header.iter().copied()) {
        bail!("{}: expected header {}, found {}", path.display(), header.join(","), found.iter().collect::<Vec<_>>().join(","));
    }
    Ok(r)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, path: &Path) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(i).ok_or_else(|| anyhow!("{}:{line}: missing column {name}", path.display()))?;
    raw.parse().map_err(|e| anyhow!("{}:{line}: bad {name} '{raw}': {e}", path.display()))
}

pub fn write_telemetry(path: &Path, trace: &TelemetryTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TELEMETRY_HEADER)?;
    for s in trace.samples() {
        let (lat, lon) = s.gps.map_or((String::new(), String::new()), |g| (fmt_f64(g.lat), fmt_f64(g.lon)));
        w.write_record([fmt_f64(s.t), fmt_f64(s.acc_z), fmt_f64(s.speed), lat, lon])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_telemetry(path: &Path) -> Result<TelemetryTrace> {
    let mut r = csv_reader(path, &TELEMETRY_HEADER)?;
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let gps = match (rec.get(3), rec.get(4)) {
            (Some(""), Some("")) => None,
            _ => Some(GeoPoint::new(field(&rec, 3, "lat", path)?, field(&rec, 4, "lon", path)?)?),
        };
        samples.push(TelemetrySample {
            t: field(&rec, 0, "t_s", path)?,
            acc_z: field(&rec, 1, "acc_z_ms2", path)?,
            speed: field(&rec, 2, "speed_ms", path)?,
            gps,
        });
    }
    TelemetryTrace::new(samples).with_context(|| format!("invalid telemetry in {}", path.display()))
}

pub fn write_reference(path: &Path, segments: &[ReferenceSegment]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(REFERENCE_HEADER)?;
    for s in segments {
        w.write_record([
            s.seg_id.to_string(),
            fmt_f64(s.start.lat),
            fmt_f64(s.start.lon),
            fmt_f64(s.end.lat),
            fmt_f64(s.end.lon),
            fmt_f64(s.length),
            fmt_f64(s.iri),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reference(path: &Path) -> Result<Vec<ReferenceSegment>> {
    let mut r = csv_reader(path, &REFERENCE_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        out.push(ReferenceSegment {
            seg_id: field(&rec, 0, "seg_id", path)?,
            start: GeoPoint::new(field(&rec, 1, "start_lat", path)?, field(&rec, 2, "start_lon", path)?)?,
            end: GeoPoint::new(field(&rec, 3, "end_lat", path)?, field(&rec, 4, "end_lon", path)?)?,
            length: field(&rec, 5, "length_m", path)?,
            iri: field(&rec, 6, "iri_mkm", path)?,
        });
    }
    Ok(out)
}

/// `node,<id>,<lat>,<lon>` and `edge,<id_a>,<id_b>,<length_m>` lines.
pub fn write_network(path: &Path, net: &RoadNetwork) -> Result<()> {
    let mut w = create(path)?;
    for (id, p) in net.nodes() {
        writeln!(w, "node,{id},{},{}", fmt_f64(p.lat), fmt_f64(p.lon))?;
    }
    for e in net.edges() {
        writeln!(w, "edge,{},{},{}", net.node_id(e.a), net.node_id(e.b), fmt_f64(e.length))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<RoadNetwork> {
    require(path)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let at = || format!("{}:{}", path.display(), i + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<f64> { parts[k].parse().with_context(|| format!("{}: bad number '{}'", at(), parts[k])) };
        let id = |k: usize| -> Result<u64> { parts[k].parse().with_context(|| format!("{}: bad node id '{}'", at(), parts[k])) };
        match (parts[0], parts.len()) {
            ("node", 4) => nodes.push((id(1)?, GeoPoint::new(num(2)?, num(3)?)?)),
            ("edge", 4) => edges.push((id(1)?, id(2)?, num(3)?)),
            _ => bail!("{}: expected node,<id>,<lat>,<lon> or edge,<a>,<b>,<length>", at()),
        }
    }
    RoadNetwork::new(nodes, edges).with_context(|| format!("invalid network in {}", path.display()))
}

/// Retained pieces only; the samples themselves live in the telemetry file.
pub fn write_pieces(path: &Path, pieces: &[Option<AlignedPiece>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(PIECES_HEADER)?;
    for p in pieces.iter().flatten() {
        w.write_record([p.seg_id.to_string(), fmt_f64(p.iri), p.samples.start.to_string(), p.samples.end.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuild the piece list against `reference`, with `None` for segments the
/// alignment dropped.
pub fn read_pieces(path: &Path, trace: &TelemetryTrace, reference: &[ReferenceSegment]) -> Result<Vec<Option<AlignedPiece>>> {
    let mut r = csv_reader(path, &PIECES_HEADER)?;
    let mut out: Vec<Option<AlignedPiece>> = vec![None; reference.len()];
    let samples = trace.samples();
    for rec in r.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let seg_id: usize = field(&rec, 0, "seg_id", path)?;
        let (a, b): (usize, usize) = (field(&rec, 2, "start_sample", path)?, field(&rec, 3, "end_sample", path)?);
        let slot = reference
            .iter()
            .position(|s| s.seg_id == seg_id)
            .ok_or_else(|| anyhow!("{}: segment {seg_id} is not in the reference set", path.display()))?;
        if !(a < b && b <= samples.len()) {
            bail!("{}: segment {seg_id} sample range {a}..{b} outside the {}-sample trace", path.display(), samples.len());
        }
        let slice = &samples[a..b];
        out[slot] = Some(AlignedPiece {
            seg_id,
            iri: field(&rec, 1, "iri_mkm", path)?,
            samples: a..b,
            t: slice.iter().map(|s| s.t).collect(),
            acc_z: slice.iter().map(|s| s.acc_z).collect(),
            speed: slice.iter().map(|s| s.speed).collect(),
        });
    }
    Ok(out)
}

/// Feature rows with their window ids, targets and levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub window_ids: Vec<usize>,
    pub data: Dataset,
}

pub fn write_features(path: &Path, table: &FeatureTable) -> Result<()> {
    let d = &table.data;
    let mut w = csv_writer(path)?;
    let mut header = vec!["window_id".to_string(), "iri_mkm".into(), "level".into()];
    header.extend(d.feature_names.iter().cloned());
    w.write_record(&header)?;
    for (i, row) in d.x.rows().into_iter().enumerate() {
        let mut rec = vec![table.window_ids[i].to_string(), fmt_f64(d.y[i]), d.level[i].name().to_string()];
        rec.extend(row.iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<FeatureTable> {
    require(path)?;
    let mut r = csv::ReaderBuilder::new().from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.len() < 4 || header.iter().take(3).ne(["window_id", "iri_mkm", "level"]) {
        bail!("{}: header must start with window_id,iri_mkm,level and name at least one feature", path.display());
    }
    let names: Vec<String> = header.iter().skip(3).map(String::from).collect();
    let d = names.len();
    let (mut ids, mut y, mut level, mut flat) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        ids.push(field(&rec, 0, "window_id", path)?);
        let iri: f64 = field(&rec, 1, "iri_mkm", path)?;
        let lv: IriLevel = field(&rec, 2, "level", path)?;
        if lv != to_iri_level(iri)? {
            bail!("{}: window {} has level {lv} but IRI {iri}", path.display(), ids.last().expect("pushed"));
        }
        y.push(iri);
        level.push(lv);
        for (j, name) in names.iter().enumerate() {
            flat.push(field::<f64>(&rec, 3 + j, name, path)?);
        }
    }
    let x = Array2::from_shape_vec((y.len(), d), flat)?;
    Ok(FeatureTable { window_ids: ids, data: Dataset::new(x, y, level, names)? })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    require(path)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}
