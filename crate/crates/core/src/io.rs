//! Point ingestion and label output.
//!
//! Points come from delimited text with a `lat,lon` or `x,y` header, or from a
//! GeoJSON FeatureCollection of Point features. Point ids are 0-based input
//! order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::dendrogram::CutLabels;
use crate::error::{Error, Result};
use crate::geo::{GeoPoint, PlanarPoint, PointSet};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InputFormat {
    /// `.geojson` and `.json` are GeoJSON, everything else delimited text.
    #[default]
    Auto,
    Csv,
    GeoJson,
}

impl InputFormat {
    fn resolve(self, path: &Path) -> InputFormat {
        match self {
            InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("geojson") || ext.eq_ignore_ascii_case("json") => {
                    InputFormat::GeoJson
                }
                _ => InputFormat::Csv,
            },
            f => f,
        }
    }
}

pub fn load_points(path: impl AsRef<Path>, format: InputFormat) -> Result<PointSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format.resolve(path) {
        InputFormat::GeoJson => {
            let mut text = String::new();
            BufReader::new(file)
                .read_to_string(&mut text)
                .map_err(|e| Error::io(path, e))?;
            parse_geojson(path, &text)
        }
        _ => read_delimited(path, file),
    }
}

/// Parses delimited point text already in memory; `origin` names it in errors.
pub fn parse_points_csv(origin: impl AsRef<Path>, text: &str) -> Result<PointSet> {
    read_delimited(origin.as_ref(), text.as_bytes())
}

#[derive(Clone, Copy)]
enum Columns {
    LatLon,
    Xy,
}

fn read_delimited<R: Read>(path: &Path, reader: R) -> Result<PointSet> {
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let columns = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["lat", "lon"] => Columns::LatLon,
        ["x", "y"] => Columns::Xy,
        other => {
            return Err(format_err(format!(
                "expected header 'lat,lon' or 'x,y', found '{}'",
                other.join(",")
            )))
        }
    };

    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", record.len())));
        }
        let mut xy = [0.0; 2];
        for (slot, (field, name)) in xy.iter_mut().zip(record.iter().zip(&header)) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| parse_err(format!("{name} '{field}' is not a number")))?;
        }
        let row = values.len();
        let point_at = |reason: Error| match reason {
            Error::InvalidPoint { reason, .. } | Error::InvalidArgument(reason) => {
                parse_err(format!("row {row}: {reason}"))
            }
            other => other,
        };
        values.push(match columns {
            Columns::LatLon => Coord::Geo(GeoPoint::new(xy[0], xy[1]).map_err(point_at)?),
            Columns::Xy => Coord::Planar(PlanarPoint::new(xy[0], xy[1]).map_err(point_at)?),
        });
    }
    match columns {
        Columns::LatLon => PointSet::geodesic(
            values
                .into_iter()
                .filter_map(|c| if let Coord::Geo(g) = c { Some(g) } else { None })
                .collect(),
        ),
        Columns::Xy => PointSet::planar(
            values
                .into_iter()
                .filter_map(|c| if let Coord::Planar(p) = c { Some(p) } else { None })
                .collect(),
        ),
    }
}

enum Coord {
    Geo(GeoPoint),
    Planar(PlanarPoint),
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Reads a FeatureCollection whose features all have Point geometry with
/// `[lon, lat]` coordinates.
pub fn parse_geojson(origin: impl AsRef<Path>, text: &str) -> Result<PointSet> {
    let path = origin.as_ref();
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(format_err("top-level object must be a FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err("FeatureCollection has no 'features' array".into()))?;
    let mut points = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let geom = f
            .get("geometry")
            .ok_or_else(|| format_err(format!("feature {i} has no geometry")))?;
        if geom.get("type").and_then(Value::as_str) != Some("Point") {
            return Err(format_err(format!("feature {i} is not a Point")));
        }
        let coords = geom
            .get("coordinates")
            .and_then(Value::as_array)
            .filter(|c| c.len() == 2 || c.len() == 3)
            .and_then(|c| Some((c[0].as_f64()?, c[1].as_f64()?)))
            .ok_or_else(|| format_err(format!("feature {i} needs numeric [lon, lat] coordinates")))?;
        let (lon, lat) = coords;
        let p = GeoPoint::new(lat, lon).map_err(|e| match e {
            Error::InvalidPoint { reason, .. } | Error::InvalidArgument(reason) => {
                format_err(format!("feature {i}: {reason}"))
            }
            other => other,
        })?;
        points.push(p);
    }
    PointSet::geodesic(points)
}

/// Column name for a cut height, using the shortest text that round-trips.
pub fn height_column(h: f64) -> String {
    format!("h={h}")
}

pub fn write_labels_to<W: Write>(out: W, cuts: &[CutLabels]) -> Result<()> {
    let n = cuts.first().map_or(0, |c| c.labels.len());
    if cuts.iter().any(|c| c.labels.len() != n) {
        return Err(Error::invalid("cuts have different lengths"));
    }
    let mut wtr = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::invalid(format!("writing labels: {e}"));
    let mut header = vec!["point_id".to_string()];
    header.extend(cuts.iter().map(|c| height_column(c.height)));
    wtr.write_record(&header).map_err(wrap)?;
    let mut row = Vec::with_capacity(cuts.len() + 1);
    for i in 0..n {
        row.clear();
        row.push(i.to_string());
        row.extend(cuts.iter().map(|c| c.labels[i].to_string()));
        wtr.write_record(&row).map_err(wrap)?;
    }
    wtr.flush().map_err(|e| Error::invalid(format!("writing labels: {e}")))?;
    Ok(())
}

pub fn write_labels(path: impl AsRef<Path>, cuts: &[CutLabels]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_labels_to(BufWriter::new(file), cuts).map_err(|e| match e {
        Error::InvalidArgument(msg) if msg.starts_with("writing") => Error::io(path, std::io::Error::other(msg)),
        other => other,
    })
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<CutLabels>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(file));
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.get(0) != Some("point_id") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "first column must be point_id".into(),
        });
    }
    let mut cuts = header
        .iter()
        .skip(1)
        .map(|name| {
            name.strip_prefix("h=")
                .and_then(|h| h.parse::<f64>().ok())
                .map(|height| CutLabels {
                    height,
                    labels: Vec::new(),
                })
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: format!("column '{name}' is not of the form h=<height>"),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    for (expected_id, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.get(0).and_then(|s| s.parse::<usize>().ok()) != Some(expected_id) {
            return Err(bad(format!("expected point_id {expected_id}")));
        }
        for (cut, field) in cuts.iter_mut().zip(record.iter().skip(1)) {
            cut.labels
                .push(field.parse().map_err(|_| bad(format!("label '{field}' is not an integer")))?);
        }
    }
    Ok(cuts)
}

/// Writes planar points as `x,y` rows, or geodesic points as `lat,lon`.
pub fn write_points<W: Write>(out: W, points: &PointSet) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::invalid(format!("writing points: {e}"));
    match points.coordinates() {
        crate::geo::Coordinates::Planar(p) => {
            wtr.write_record(["x", "y"]).map_err(wrap)?;
            for q in p {
                wtr.write_record([q.x.to_string(), q.y.to_string()]).map_err(wrap)?;
            }
        }
        crate::geo::Coordinates::Geo(p) => {
            wtr.write_record(["lat", "lon"]).map_err(wrap)?;
            for q in p {
                wtr.write_record([q.lat.to_string(), q.lon.to_string()]).map_err(wrap)?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::invalid(format!("writing points: {e}")))?;
    Ok(())
}

/// Parses a distance in kilometres; a trailing `m` means metres and `km` is
/// accepted explicitly.
pub fn parse_distance_km(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = if let Some(v) = t.strip_suffix("km") {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix('m') {
        (v, 1e-3)
    } else {
        (t, 1.0)
    };
    match num.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v * scale),
        _ => Err(Error::invalid(format!("'{s}' is not a non-negative distance"))),
    }
}
