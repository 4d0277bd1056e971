use netclust_core::dbscan::{dbscan, dbscan_points, k_distances, knee_eps, NOISE};
use netclust_core::distance::point_distances;
use netclust_core::metrics::ami;
use netclust_core::Labeling;
use proptest::prelude::*;

fn core_flags(d: &netclust_core::DistanceMatrix, eps: f64, min_pts: usize) -> Vec<bool> {
    (0..d.len()).map(|i| d.row(i).iter().filter(|&&x| x <= eps).count() >= min_pts).collect()
}

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 10..80).prop_map(|mut v| {
        v.truncate(v.len() / 2 * 2);
        v
    })
}

proptest! {
    #[test]
    fn matrix_and_coordinate_routes_agree(pts in points(), eps in 0.1f64..2.0, min_pts in 1usize..6) {
        let d = point_distances(&pts, 2);
        let from_matrix = dbscan(&d, eps, min_pts).unwrap();
        let from_points = dbscan_points(&pts, 2, eps, min_pts);
        // squared comparison may differ on exact boundary ties only
        let boundary = d.values().iter().any(|&x| (x - eps).abs() < 1e-12);
        prop_assume!(!boundary);
        prop_assert_eq!(from_matrix, from_points);
    }

    #[test]
    fn row_permutation_keeps_core_status_and_partition(pts in points(), eps in 0.2f64..2.0, shift in 1usize..7) {
        let n = pts.len() / 2;
        let d = point_distances(&pts, 2);
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let dp = d.permuted(&order);
        let a = dbscan(&d, eps, 3).unwrap();
        let b = dbscan(&dp, eps, 3).unwrap();
        let core_a = core_flags(&d, eps, 3);
        let core_b = core_flags(&dp, eps, 3);
        for (new, &old) in order.iter().enumerate() {
            prop_assert_eq!(core_b[new], core_a[old]);
            prop_assert_eq!(b.labels()[new] == NOISE, a.labels()[old] == NOISE);
        }
        // compare on core points, where membership is unambiguous
        let ca: Vec<i64> = order.iter().filter(|&&o| core_a[o]).map(|&o| a.labels()[o]).collect();
        let cb: Vec<i64> = (0..n).filter(|&k| core_b[k]).map(|k| b.labels()[k]).collect();
        if !ca.is_empty() {
            prop_assert!((ami(&Labeling::new(ca), &Labeling::new(cb)).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn larger_eps_never_demotes_core_points(pts in points(), eps in 0.1f64..1.5, grow in 0.0f64..1.0) {
        let d = point_distances(&pts, 2);
        let small = core_flags(&d, eps, 4);
        let large = core_flags(&d, eps + grow, 4);
        let lab = dbscan(&d, eps + grow, 4).unwrap();
        for i in 0..small.len() {
            if small[i] {
                prop_assert!(large[i]);
                prop_assert!(lab.labels()[i] != NOISE);
            }
        }
    }

    #[test]
    fn labels_follow_core_discovery_order(pts in points(), eps in 0.1f64..2.0) {
        let d = point_distances(&pts, 2);
        let l = dbscan(&d, eps, 3).unwrap();
        let core = core_flags(&d, eps, 3);
        let c = l.n_clusters() as i64;
        prop_assert!(l.labels().iter().all(|&x| x == NOISE || (0..c).contains(&x)));
        // the lowest-index core point of each cluster increases with its label
        let first_core: Vec<usize> = (0..c)
            .map(|k| (0..core.len()).find(|&i| core[i] && l.labels()[i] == k).unwrap())
            .collect();
        prop_assert!(first_core.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn k_distance_counts_the_point_itself() {
    let d = point_distances(&[0.0, 1.0, 3.0, 6.0], 1);
    assert_eq!(k_distances(&d, 1).unwrap(), vec![0.0; 4]);
    assert_eq!(k_distances(&d, 2).unwrap(), vec![1.0, 1.0, 2.0, 3.0]);
}

#[test]
fn far_blobs_give_two_clusters() {
    let mut pts = Vec::new();
    for i in 0..30 {
        let (a, b) = ((i % 6) as f64 * 0.15, (i / 6) as f64 * 0.15);
        pts.extend([a, b]);
        pts.extend([a + 150.0, b - 120.0]);
    }
    let d = point_distances(&pts, 2);
    let eps = knee_eps(&d, 4).unwrap();
    assert!(!eps.fallback);
    let l = dbscan(&d, eps.eps, 4).unwrap();
    assert_eq!(l.n_clusters(), 2);
    assert_eq!(l.n_noise(), 0);
}
