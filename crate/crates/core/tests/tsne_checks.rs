use netclust_core::distance::point_distances;
use netclust_core::exec::Sequential;
use netclust_core::tsne::{calibrate_row, joint_probabilities, kl_divergence, kl_gradient, tsne_embed, TsneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(seed: u64, n: usize, dims: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * dims).map(|_| rng.random_range(-3.0..3.0)).collect()
}

fn silhouette(coords: &[f64], labels: &[usize]) -> f64 {
    let n = labels.len();
    let d = |i: usize, j: usize| ((coords[2 * i] - coords[2 * j]).powi(2) + (coords[2 * i + 1] - coords[2 * j + 1]).powi(2)).sqrt();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..n {
        let mut sums = vec![(0.0, 0usize); k];
        for j in 0..n {
            if j != i {
                sums[labels[j]].0 += d(i, j);
                sums[labels[j]].1 += 1;
            }
        }
        let a = sums[labels[i]].0 / sums[labels[i]].1 as f64;
        let b = (0..k).filter(|&c| c != labels[i]).map(|c| sums[c].0 / sums[c].1 as f64).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

#[test]
fn calibration_hits_target_perplexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let m = rng.random_range(10..80);
        let sq: Vec<f64> = (0..m).map(|_| rng.random_range(0.01f64..25.0)).collect();
        let target = rng.random_range(2.0..(m as f64 / 2.0));
        let cal = calibrate_row(&sq, target).unwrap();
        // recompute from beta alone
        let w: Vec<f64> = sq.iter().map(|d| (-cal.beta * d).exp()).collect();
        let z: f64 = w.iter().sum();
        let h: f64 = w.iter().map(|x| x / z).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
        assert!((h.exp() - target).abs() < 1e-4 * target.max(1.0), "{} vs {target}", h.exp());
    }
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let pts = random_points(4, 10, 5);
    let d = point_distances(&pts, 5);
    let p = joint_probabilities(&d, 3.0, &Sequential).unwrap();
    let y = random_points(5, 10, 2);
    let g = kl_gradient(&p, &y, 1.0);
    let h = 1e-5;
    for k in 0..y.len() {
        let (mut up, mut down) = (y.clone(), y.clone());
        up[k] += h;
        down[k] -= h;
        let fd = (kl_divergence(&p, &up) - kl_divergence(&p, &down)) / (2.0 * h);
        assert!((g[k] - fd).abs() <= 1e-4 * g[k].abs().max(1e-3), "coord {k}: {} vs {fd}", g[k]);
    }
}

#[test]
fn two_separated_blocks_embed_apart() {
    // exactly equidistant block mates would pin each row's entropy above
    // the clipped perplexity, so spread each block inside a unit disc
    let n = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut pts = Vec::new();
    for i in 0..n {
        let (r, t) = (0.5 * rng.random_range(0.0f64..1.0).sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
        let offset = if i < n / 2 { 0.0 } else { 100.0 };
        pts.extend([offset + r * t.cos(), r * t.sin()]);
    }
    let d = point_distances(&pts, 2);
    let e = tsne_embed(&d, &TsneConfig::default()).unwrap();
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let s = silhouette(&e.coords, &labels);
    assert!(s > 0.5, "silhouette {s}");
}

#[test]
fn permuting_rows_permutes_the_embedding() {
    let pts = random_points(8, 30, 3);
    let d = point_distances(&pts, 3);
    let cfg = TsneConfig { perplexity: 8.0, iterations: 400, seed: 3, ..Default::default() };
    let base = tsne_embed(&d, &cfg).unwrap();
    let order: Vec<usize> = (0..30).map(|i| (i * 7 + 3) % 30).collect();
    let permuted = tsne_embed(&d.permuted(&order), &cfg).unwrap();
    for (new, &old) in order.iter().enumerate() {
        assert_eq!(permuted.point(new), base.point(old));
    }
    assert_eq!(permuted.kl, base.kl);
}

#[test]
fn same_seed_same_embedding() {
    let d = point_distances(&random_points(1, 25, 4), 4);
    let cfg = TsneConfig { perplexity: 6.0, iterations: 300, seed: 42, ..Default::default() };
    assert_eq!(tsne_embed(&d, &cfg).unwrap(), tsne_embed(&d, &cfg).unwrap());
    let other = tsne_embed(&d, &TsneConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(other.coords, tsne_embed(&d, &cfg).unwrap().coords);
}

#[test]
fn duplicate_observations_are_allowed() {
    let mut pts = random_points(6, 20, 2);
    pts.extend_from_within(..10);
    let d = point_distances(&pts, 2);
    let e = tsne_embed(&d, &TsneConfig { perplexity: 5.0, ..Default::default() }).unwrap();
    assert!(e.coords.iter().all(|v| v.is_finite()));
    assert!(e.kl < e.initial_kl);
}
