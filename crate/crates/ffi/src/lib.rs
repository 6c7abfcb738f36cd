//! Flat C ABI over the clustering pipeline, for language bindings.
//!
//! Coordinates are passed as `n` interleaved pairs: `(lat, lon)` in degrees for
//! [`METRIC_HAVERSINE`] or `(x, y)` in kilometres for [`METRIC_EUCLIDEAN`].
//! Every function returns a status code; [`geohclust_status_message`] turns it
//! into text. No function here unwinds across the boundary.
//!
//! The binding layer does no computation of its own: it marshals buffers in,
//! calls [`geohclust::sparse_geo_hclust`] or the graph builder, and copies
//! results out.

use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use geohclust::graph::{build_distance_graph, SparseDistanceGraph};
use geohclust::{sparse_geo_hclust, ClusterConfig, Error, Method, PointSet};

pub const METRIC_HAVERSINE: c_int = 0;
pub const METRIC_EUCLIDEAN: c_int = 1;

pub const LINKAGE_SINGLE: c_int = 0;
pub const LINKAGE_COMPLETE: c_int = 1;
pub const LINKAGE_AVERAGE: c_int = 2;
pub const LINKAGE_WARD: c_int = 3;

pub const STATUS_OK: c_int = 0;
pub const STATUS_NULL_POINTER: c_int = 1;
pub const STATUS_INVALID_ARGUMENT: c_int = 2;
pub const STATUS_INVALID_POINT: c_int = 3;
pub const STATUS_THRESHOLD_ABOVE_RADIUS: c_int = 4;
pub const STATUS_INTERNAL: c_int = 5;

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn geohclust_status_message(status: c_int) -> *const c_char {
    let msg: &'static [u8] = match status {
        STATUS_OK => b"ok\0",
        STATUS_NULL_POINTER => b"null pointer argument\0",
        STATUS_INVALID_ARGUMENT => b"invalid argument\0",
        STATUS_INVALID_POINT => b"invalid or empty coordinates\0",
        STATUS_THRESHOLD_ABOVE_RADIUS => b"distance threshold exceeds h_max\0",
        STATUS_INTERNAL => b"internal error\0",
        _ => b"unknown status\0",
    };
    msg.as_ptr().cast()
}

fn status_of(e: &Error) -> c_int {
    match e {
        Error::CutAboveRadius { .. } => STATUS_THRESHOLD_ABOVE_RADIUS,
        Error::EmptyPointSet | Error::InvalidPoint { .. } => STATUS_INVALID_POINT,
        Error::InvalidArgument(_) => STATUS_INVALID_ARGUMENT,
        _ => STATUS_INTERNAL,
    }
}

pub fn method_from_code(code: c_int) -> Option<Method> {
    match code {
        LINKAGE_SINGLE => Some(Method::Single),
        LINKAGE_COMPLETE => Some(Method::Complete),
        LINKAGE_AVERAGE => Some(Method::Average),
        LINKAGE_WARD => Some(Method::Ward),
        _ => None,
    }
}

/// Builds a point set from interleaved pairs.
pub fn points_from_pairs(pairs: &[f64], metric: c_int) -> Result<PointSet, c_int> {
    if !pairs.len().is_multiple_of(2) {
        return Err(STATUS_INVALID_ARGUMENT);
    }
    let xy: Vec<(f64, f64)> = pairs.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let built = match metric {
        METRIC_HAVERSINE => PointSet::from_lat_lon(&xy),
        METRIC_EUCLIDEAN => PointSet::from_xy(&xy),
        _ => return Err(STATUS_INVALID_ARGUMENT),
    };
    built.map_err(|e| status_of(&e))
}

/// Outcome of one fit, as seen from the binding side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fit {
    pub labels: Vec<usize>,
    pub n_connected_components: usize,
    pub n_clusters: usize,
}

/// Safe core of [`geohclust_fit`].
pub fn fit(pairs: &[f64], metric: c_int, h_max: f64, threshold: f64, linkage: c_int) -> Result<Fit, c_int> {
    let method = method_from_code(linkage).ok_or(STATUS_INVALID_ARGUMENT)?;
    let points = points_from_pairs(pairs, metric)?;
    let cfg = ClusterConfig::new(h_max, method, vec![threshold]);
    let mut result = sparse_geo_hclust(&points, &cfg).map_err(|e| status_of(&e))?;
    let cut = result.cuts.pop().ok_or(STATUS_INTERNAL)?;
    Ok(Fit {
        n_clusters: cut.n_clusters(),
        labels: cut.labels,
        n_connected_components: result.n_components(),
    })
}

fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(STATUS_INTERNAL)
}

/// Clusters `n` points and writes one canonical label per point.
///
/// # Safety
///
/// `coords` must point to `2 * n` readable `f64`s, `labels_out` to `n`
/// writable `i64`s, and both count pointers must be writable. Outputs are left
/// untouched on failure.
#[no_mangle]
pub unsafe extern "C" fn geohclust_fit(
    n: usize,
    coords: *const f64,
    metric: c_int,
    h_max: f64,
    threshold: f64,
    linkage: c_int,
    labels_out: *mut i64,
    n_components_out: *mut usize,
    n_clusters_out: *mut usize,
) -> c_int {
    if coords.is_null() || labels_out.is_null() || n_components_out.is_null() || n_clusters_out.is_null() {
        return STATUS_NULL_POINTER;
    }
    let Some(len) = n.checked_mul(2) else {
        return STATUS_INVALID_ARGUMENT;
    };
    guarded(|| {
        // SAFETY: the caller guarantees 2n readable doubles.
        let pairs = unsafe { std::slice::from_raw_parts(coords, len) };
        match fit(pairs, metric, h_max, threshold, linkage) {
            Ok(f) => {
                // SAFETY: the caller guarantees n writable labels and the count slots.
                let out = unsafe { std::slice::from_raw_parts_mut(labels_out, n) };
                for (o, &l) in out.iter_mut().zip(&f.labels) {
                    *o = l as i64;
                }
                unsafe {
                    *n_components_out = f.n_connected_components;
                    *n_clusters_out = f.n_clusters;
                }
                STATUS_OK
            }
            Err(code) => code,
        }
    })
}

/// Opaque distance-band graph handed across the boundary.
pub struct GeohclustGraph {
    graph: SparseDistanceGraph,
}

impl GeohclustGraph {
    pub fn inner(&self) -> &SparseDistanceGraph {
        &self.graph
    }
}

/// Builds the distance-band graph; release it with [`geohclust_graph_free`].
///
/// # Safety
///
/// `coords` must point to `2 * n` readable `f64`s and `graph_out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn geohclust_connectivity(
    n: usize,
    coords: *const f64,
    metric: c_int,
    h_max: f64,
    graph_out: *mut *mut GeohclustGraph,
) -> c_int {
    if coords.is_null() || graph_out.is_null() {
        return STATUS_NULL_POINTER;
    }
    let Some(len) = n.checked_mul(2) else {
        return STATUS_INVALID_ARGUMENT;
    };
    guarded(|| {
        // SAFETY: the caller guarantees 2n readable doubles.
        let pairs = unsafe { std::slice::from_raw_parts(coords, len) };
        let points = match points_from_pairs(pairs, metric) {
            Ok(p) => p,
            Err(code) => return code,
        };
        match build_distance_graph(&points, h_max) {
            Ok(graph) => {
                unsafe { *graph_out = Box::into_raw(Box::new(GeohclustGraph { graph })) };
                STATUS_OK
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of rows and of stored (directed) entries, i.e. `n` and `2m`.
///
/// # Safety
///
/// `graph` must come from [`geohclust_connectivity`] and not be freed; the
/// output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn geohclust_graph_shape(
    graph: *const GeohclustGraph,
    n_rows_out: *mut usize,
    nnz_out: *mut usize,
) -> c_int {
    if graph.is_null() || n_rows_out.is_null() || nnz_out.is_null() {
        return STATUS_NULL_POINTER;
    }
    let g = unsafe { &(*graph).graph };
    unsafe {
        *n_rows_out = g.node_count();
        *nnz_out = g.col_indices().len();
    }
    STATUS_OK
}

/// Copies the binary CSR pattern: `n + 1` row offsets and `nnz` column indices.
///
/// # Safety
///
/// `graph` as for [`geohclust_graph_shape`]; `indptr_out` must hold `n + 1` and
/// `indices_out` `nnz` writable `i64`s.
#[no_mangle]
pub unsafe extern "C" fn geohclust_graph_copy_csr(
    graph: *const GeohclustGraph,
    indptr_out: *mut i64,
    indices_out: *mut i64,
) -> c_int {
    if graph.is_null() || indptr_out.is_null() || indices_out.is_null() {
        return STATUS_NULL_POINTER;
    }
    let g = unsafe { &(*graph).graph };
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let indptr = unsafe { std::slice::from_raw_parts_mut(indptr_out, offsets.len()) };
    for (o, &v) in indptr.iter_mut().zip(offsets) {
        *o = v as i64;
    }
    let indices = unsafe { std::slice::from_raw_parts_mut(indices_out, cols.len()) };
    for (o, &v) in indices.iter_mut().zip(cols) {
        *o = v as i64;
    }
    STATUS_OK
}

/// # Safety
///
/// `graph` must be null or a live handle from [`geohclust_connectivity`].
#[no_mangle]
pub unsafe extern "C" fn geohclust_graph_free(graph: *mut GeohclustGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}
