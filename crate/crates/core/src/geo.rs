//! Point types and the two supported metrics.
//!
//! Planar coordinates are kilometres in a projected frame and use the
//! Euclidean distance. Geodesic coordinates are WGS-84 style degrees and use
//! the haversine great-circle distance on a sphere of radius
//! [`EARTH_RADIUS_KM`] unless a [`PointSet`] overrides it.
//!
//! For spatial indexing, geodesic points are embedded on the unit sphere and
//! radii are converted to chord lengths; a chord bound is equivalent to a
//! great-circle bound because both are monotone in the central angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// IUGG mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    /// Latitude in degrees, `[-90, 90]`.
    pub lat: f64,
    /// Longitude in degrees, `[-180, 180]`.
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.check().map_err(Error::InvalidArgument)?;
        Ok(p)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(format!("latitude {} outside [-90, 90]", self.lat));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(format!("longitude {} outside [-180, 180]", self.lon));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    /// Easting in kilometres.
    pub x: f64,
    /// Northing in kilometres.
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = PlanarPoint { x, y };
        p.check().map_err(Error::InvalidArgument)?;
        Ok(p)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(format!("non-finite coordinate ({}, {})", self.x, self.y));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    Haversine,
    Euclidean,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coordinates {
    Geo(Vec<GeoPoint>),
    Planar(Vec<PlanarPoint>),
}

/// A non-empty, homogeneous set of points indexed `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    coords: Coordinates,
    earth_radius_km: f64,
}

impl PointSet {
    pub fn planar(points: Vec<PlanarPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for (index, p) in points.iter().enumerate() {
            p.check()
                .map_err(|reason| Error::InvalidPoint { index, reason })?;
        }
        Ok(PointSet {
            coords: Coordinates::Planar(points),
            earth_radius_km: EARTH_RADIUS_KM,
        })
    }

    pub fn geodesic(points: Vec<GeoPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        for (index, p) in points.iter().enumerate() {
            p.check()
                .map_err(|reason| Error::InvalidPoint { index, reason })?;
        }
        Ok(PointSet {
            coords: Coordinates::Geo(points),
            earth_radius_km: EARTH_RADIUS_KM,
        })
    }

    /// Convenience constructor from `(x, y)` pairs in kilometres.
    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        Self::planar(xy.iter().map(|&(x, y)| PlanarPoint { x, y }).collect())
    }

    /// Convenience constructor from `(lat, lon)` pairs in degrees.
    pub fn from_lat_lon(ll: &[(f64, f64)]) -> Result<Self> {
        Self::geodesic(ll.iter().map(|&(lat, lon)| GeoPoint { lat, lon }).collect())
    }

    /// Replaces the sphere radius used by the haversine metric.
    pub fn with_earth_radius(mut self, radius_km: f64) -> Result<Self> {
        if !(radius_km.is_finite() && radius_km > 0.0) {
            return Err(Error::invalid(format!(
                "earth radius must be positive, got {radius_km}"
            )));
        }
        self.earth_radius_km = radius_km;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        match &self.coords {
            Coordinates::Geo(p) => p.len(),
            Coordinates::Planar(p) => p.len(),
        }
    }

    /// Always false; construction rejects empty sets.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn metric(&self) -> Metric {
        match &self.coords {
            Coordinates::Geo(_) => Metric::Haversine,
            Coordinates::Planar(_) => Metric::Euclidean,
        }
    }

    pub fn coordinates(&self) -> &Coordinates {
        &self.coords
    }

    pub fn earth_radius_km(&self) -> f64 {
        self.earth_radius_km
    }

    /// Exact distance in kilometres between points `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.coords {
            Coordinates::Geo(p) => haversine_distance_on(p[i], p[j], self.earth_radius_km),
            Coordinates::Planar(p) => euclidean_distance(p[i], p[j]),
        }
    }

    /// The points at `ids`, in that order, as a new set with the same metric.
    pub fn select(&self, ids: &[usize]) -> Result<PointSet> {
        let coords = match &self.coords {
            Coordinates::Geo(p) => Coordinates::Geo(ids.iter().map(|&i| p[i]).collect()),
            Coordinates::Planar(p) => Coordinates::Planar(ids.iter().map(|&i| p[i]).collect()),
        };
        let out = PointSet {
            coords,
            earth_radius_km: self.earth_radius_km,
        };
        if out.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        Ok(out)
    }

    /// Coordinates used by the spatial index: planar points as-is, geodesic
    /// points on the unit sphere.
    pub(crate) fn embedded(&self) -> Embedded {
        match &self.coords {
            Coordinates::Planar(p) => Embedded::Plane(p.iter().map(|q| [q.x, q.y]).collect()),
            Coordinates::Geo(p) => {
                Embedded::Sphere(p.iter().map(|&q| geo_to_unit_sphere(q)).collect())
            }
        }
    }
}

pub(crate) enum Embedded {
    Plane(Vec<[f64; 2]>),
    Sphere(Vec<[f64; 3]>),
}

#[inline]
pub fn euclidean_distance(a: PlanarPoint, b: PlanarPoint) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Great-circle distance on the default sphere.
#[inline]
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    haversine_distance_on(a, b, EARTH_RADIUS_KM)
}

/// Great-circle distance on a sphere of radius `radius_km`, in the
/// `2R asin(sqrt(hav))` form.
#[inline]
pub fn haversine_distance_on(a: GeoPoint, b: GeoPoint, radius_km: f64) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let s_lat = ((lat2 - lat1) * 0.5).sin();
    let s_lon = ((b.lon - a.lon).to_radians() * 0.5).sin();
    let hav = s_lat * s_lat + lat1.cos() * lat2.cos() * s_lon * s_lon;
    2.0 * radius_km * hav.sqrt().min(1.0).asin()
}

pub fn geo_to_unit_sphere(p: GeoPoint) -> [f64; 3] {
    let (sin_lat, cos_lat) = p.lat.to_radians().sin_cos();
    let (sin_lon, cos_lon) = p.lon.to_radians().sin_cos();
    [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat]
}

/// Chord length on the unit sphere subtending a great-circle arc of `h_km`.
pub fn radius_to_chord(h_km: f64) -> Result<f64> {
    radius_to_chord_on(h_km, EARTH_RADIUS_KM)
}

pub fn radius_to_chord_on(h_km: f64, radius_km: f64) -> Result<f64> {
    let max = PI * radius_km;
    if !(0.0..=max).contains(&h_km) {
        return Err(Error::invalid(format!(
            "radius {h_km} km outside [0, {max}] km"
        )));
    }
    Ok(2.0 * (h_km / (2.0 * radius_km)).sin())
}

/// Straight-line distance between two unit-sphere embeddings.
#[inline]
pub fn chord_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}
