use std::ffi::CStr;

use geohclust::graph::build_distance_graph;
use geohclust::synth::{generate_gaussian_mixture, Scenario, ScenarioSpec};
use geohclust::dendrogram::canonicalize as canonical;
use geohclust::{sparse_geo_hclust, ClusterConfig, PointSet};
use geohclust_ffi::*;

fn four_points() -> Vec<f64> {
    vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 10.0, 0.0]
}

fn call_fit(pairs: &[f64], metric: i32, h_max: f64, threshold: f64, linkage: i32) -> (i32, Vec<i64>, usize, usize) {
    let n = pairs.len() / 2;
    let mut labels = vec![-1i64; n];
    let (mut k, mut c) = (usize::MAX, usize::MAX);
    let status = unsafe {
        geohclust_fit(n, pairs.as_ptr(), metric, h_max, threshold, linkage, labels.as_mut_ptr(), &mut k, &mut c)
    };
    (status, labels, k, c)
}

fn call_connectivity(pairs: &[f64], metric: i32, h_max: f64) -> (Vec<i64>, Vec<i64>) {
    let mut handle = std::ptr::null_mut();
    let status = unsafe { geohclust_connectivity(pairs.len() / 2, pairs.as_ptr(), metric, h_max, &mut handle) };
    assert_eq!(status, STATUS_OK);
    let (mut rows, mut nnz) = (0, 0);
    assert_eq!(unsafe { geohclust_graph_shape(handle, &mut rows, &mut nnz) }, STATUS_OK);
    let mut indptr = vec![0i64; rows + 1];
    let mut indices = vec![0i64; nnz];
    assert_eq!(
        unsafe { geohclust_graph_copy_csr(handle, indptr.as_mut_ptr(), indices.as_mut_ptr()) },
        STATUS_OK
    );
    unsafe { geohclust_graph_free(handle) };
    (indptr, indices)
}

#[test]
fn four_point_fit() {
    let (status, labels, k, c) = call_fit(&four_points(), METRIC_EUCLIDEAN, 3.0, 1.0, LINKAGE_SINGLE);
    assert_eq!(status, STATUS_OK);
    assert_eq!(labels, vec![0, 0, 0, 1]);
    assert_eq!((k, c), (2, 2));
}

#[test]
fn single_point_fit() {
    let (status, labels, k, c) = call_fit(&[5.0, 5.0], METRIC_EUCLIDEAN, 1.0, 1.0, LINKAGE_WARD);
    assert_eq!(status, STATUS_OK);
    assert_eq!(labels, vec![0]);
    assert_eq!((k, c), (1, 1));
}

#[test]
fn repeated_fits_agree() {
    let pairs = mixture(600, 3);
    let a = call_fit(&pairs, METRIC_EUCLIDEAN, 10.0, 5.0, LINKAGE_AVERAGE);
    let b = call_fit(&pairs, METRIC_EUCLIDEAN, 10.0, 5.0, LINKAGE_AVERAGE);
    assert_eq!(a, b);
}

#[test]
fn error_codes() {
    let p = four_points();
    assert_eq!(call_fit(&p, METRIC_EUCLIDEAN, 3.0, 4.0, LINKAGE_SINGLE).0, STATUS_THRESHOLD_ABOVE_RADIUS);
    assert_eq!(call_fit(&p, 7, 3.0, 1.0, LINKAGE_SINGLE).0, STATUS_INVALID_ARGUMENT);
    assert_eq!(call_fit(&p, METRIC_EUCLIDEAN, 3.0, 1.0, 9).0, STATUS_INVALID_ARGUMENT);
    assert_eq!(call_fit(&p, METRIC_EUCLIDEAN, -1.0, 0.0, LINKAGE_SINGLE).0, STATUS_INVALID_ARGUMENT);
    assert_eq!(call_fit(&[91.0, 0.0], METRIC_HAVERSINE, 3.0, 1.0, LINKAGE_SINGLE).0, STATUS_INVALID_POINT);
    assert_eq!(call_fit(&[], METRIC_EUCLIDEAN, 3.0, 1.0, LINKAGE_SINGLE).0, STATUS_INVALID_POINT);
    let status = unsafe {
        geohclust_fit(
            1,
            std::ptr::null(),
            METRIC_EUCLIDEAN,
            1.0,
            1.0,
            LINKAGE_SINGLE,
            std::ptr::null_mut(),
            std::ptr::null_mut(),
            std::ptr::null_mut(),
        )
    };
    assert_eq!(status, STATUS_NULL_POINTER);
    for code in 0..7 {
        let msg = unsafe { CStr::from_ptr(geohclust_status_message(code)) };
        assert!(!msg.to_bytes().is_empty());
    }
}

#[test]
fn four_point_connectivity() {
    let (indptr, indices) = call_connectivity(&four_points(), METRIC_EUCLIDEAN, 3.0);
    assert_eq!(indptr, vec![0, 2, 4, 6, 6]);
    assert_eq!(indices, vec![1, 2, 0, 2, 0, 1]);
    assert_eq!(indices.len() / 2, 3);
    let (far_ptr, far_idx) = call_connectivity(&[0.0, 0.0, 50.0, 0.0, 0.0, 50.0], METRIC_EUCLIDEAN, 1.0);
    assert_eq!(far_ptr, vec![0, 0, 0, 0]);
    assert!(far_idx.is_empty());
}

fn mixture(n: usize, seed: u64) -> Vec<f64> {
    let ps = generate_gaussian_mixture(&ScenarioSpec::new(Scenario::Moderate, n, 10.0, seed).with_domain(150.0)).unwrap();
    let geohclust::geo::Coordinates::Planar(p) = ps.coordinates() else { unreachable!() };
    p.iter().flat_map(|q| [q.x, q.y]).collect()
}

#[test]
fn binding_matches_primary_pipeline() {
    let methods = [LINKAGE_SINGLE, LINKAGE_COMPLETE, LINKAGE_AVERAGE, LINKAGE_WARD];
    for instance in 0..20u64 {
        let n = 100 + (instance as usize * 97) % 1900;
        let pairs = mixture(n, instance);
        let code = methods[instance as usize % 4];
        let threshold = 2.0 + (instance % 5) as f64;
        let (status, labels, k, c) = call_fit(&pairs, METRIC_EUCLIDEAN, 10.0, threshold, code);
        assert_eq!(status, STATUS_OK);

        let xy: Vec<(f64, f64)> = pairs.chunks(2).map(|c| (c[0], c[1])).collect();
        let ps = PointSet::from_xy(&xy).unwrap();
        let method = method_from_code(code).unwrap();
        let direct = sparse_geo_hclust(&ps, &ClusterConfig::new(10.0, method, vec![threshold])).unwrap();
        let got: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        assert_eq!(canonical(&got), direct.cuts[0].labels, "instance {instance}");
        assert_eq!((k, c), (direct.n_components(), direct.cuts[0].n_clusters()));

        let (indptr, indices) = call_connectivity(&pairs, METRIC_EUCLIDEAN, 10.0);
        let g = build_distance_graph(&ps, 10.0).unwrap();
        assert!(indptr.iter().zip(g.row_offsets()).all(|(&a, &b)| a as usize == b));
        assert!(indices.iter().zip(g.col_indices()).all(|(&a, &b)| a as usize == b));
        assert_eq!(indices.len(), g.col_indices().len());
    }
}

#[test]
fn geodesic_pattern_is_symmetric() {
    let pairs: Vec<f64> = (0..60).flat_map(|i| [45.0 + 0.01 * (i % 7) as f64, 7.0 + 0.013 * i as f64]).collect();
    let (indptr, indices) = call_connectivity(&pairs, METRIC_HAVERSINE, 2.0);
    let n = indptr.len() - 1;
    let has = |i: usize, j: i64| indices[indptr[i] as usize..indptr[i + 1] as usize].contains(&j);
    for i in 0..n {
        for &j in &indices[indptr[i] as usize..indptr[i + 1] as usize] {
            assert!(has(j as usize, i as i64));
        }
    }
}
