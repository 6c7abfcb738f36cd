//! Exact hierarchical agglomerative clustering of spatial points.
//!
//! Only pairs within a maximum radius `h_max` are ever measured. They form a
//! sparse distance-band graph whose connected components are clustered one at
//! a time; every dendrogram cut at or below `h_max` is identical to the one
//! produced by dense clustering of the full point set.
//!
//! ```
//! use geohclust::{sparse_geo_hclust, ClusterConfig, Method, PointSet};
//!
//! let points = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (10.0, 0.0)]).unwrap();
//! let cfg = ClusterConfig::new(3.0, Method::Single, vec![0.5, 1.0]);
//! let result = sparse_geo_hclust(&points, &cfg).unwrap();
//! assert_eq!(result.n_components(), 2);
//! assert_eq!(result.cuts[1].labels, vec![0, 0, 0, 1]);
//! ```

// Validation uses `!(x >= 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dendrogram;
pub mod error;
pub mod geo;
pub mod graph;
pub mod index;
pub mod io;
pub mod linkage;
pub mod mst;
pub mod pipeline;
pub mod synth;
pub mod union_find;

pub use dendrogram::{adjusted_rand_index, count_clusters, cut_tree, CutLabels};
pub use error::{Error, Result};
pub use geo::{GeoPoint, Metric, PlanarPoint, PointSet, EARTH_RADIUS_KM};
pub use graph::{build_distance_graph, connected_components, ComponentPartition, SparseDistanceGraph};
pub use index::SpatialIndex;
pub use linkage::{LinkageMatrix, Merge, Method};
pub use pipeline::{
    dense_hclust_oracle, sparse_geo_hclust, verify_exactness, ClusterConfig, ClusteringResult,
    ComponentOrder,
};
