use netclust_core::sbm::{generate_observations, generate_sbm_graph, node_communities, sample_sbm, SbmConfig};
use netclust_core::seed;

#[test]
fn realized_mean_degree_near_twenty() {
    let mut total = 0.0;
    for s in 0..20 {
        let (g, _) = generate_sbm_graph(&SbmConfig { seed: s, ..Default::default() }).unwrap();
        total += 2.0 * g.edge_count() as f64 / g.node_count() as f64;
    }
    let mean = total / 20.0;
    assert!((mean - 20.0).abs() <= 1.5, "mean degree {mean}");
}

#[test]
fn block_edge_counts_within_three_sigma() {
    for s in 0..10 {
        let cfg = SbmConfig { seed: s, d_out: 3.0, ..Default::default() };
        let g = sample_sbm(&cfg, &mut seed::rng(s, &[])).unwrap();
        let comm = node_communities(&cfg);
        let inside = g.edges().iter().filter(|e| comm[e.u] == comm[e.v]).count() as f64;
        let outside = g.edge_count() as f64 - inside;
        let size = cfg.community_size as f64;
        let k = cfg.k as f64;
        let pairs_in = k * size * (size - 1.0) / 2.0;
        let pairs_out = k * (k - 1.0) / 2.0 * size * size;
        for (count, pairs, p) in [(inside, pairs_in, cfg.p_in()), (outside, pairs_out, cfg.p_out())] {
            let (mu, sd) = (pairs * p, (pairs * p * (1.0 - p)).sqrt());
            assert!((count - mu).abs() <= 3.0 * sd, "seed {s}: {count} vs {mu} ± {sd}");
        }
    }
}

#[test]
fn noisy_entry_variance_is_uniform_plus_gaussian() {
    let cfg = SbmConfig { sigma: 1.0, n_obs: 400, seed: 77, ..Default::default() };
    let truth = node_communities(&cfg);
    let (attrs, labels) = generate_observations(&cfg, &truth).unwrap();
    // centre each entry on its range midpoint, then pool
    let mut sq = 0.0;
    let mut count = 0.0;
    for (i, row) in attrs.rows().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let mid = if truth[j] as i64 == labels.labels()[i] { 0.75 } else { 0.25 };
            sq += (x - mid) * (x - mid);
            count += 1.0;
        }
    }
    let var = sq / count;
    let expected = 1.0 / 48.0 + 1.0;
    // 80k draws: standard error of the variance is about 0.005
    assert!((var - expected).abs() < 0.02, "variance {var}");
}

#[test]
fn community_counts_differ_by_at_most_one() {
    for n_obs in [4, 5, 99, 301] {
        let cfg = SbmConfig { n_obs, sigma: 0.0, ..Default::default() };
        let (_, labels) = generate_observations(&cfg, &node_communities(&cfg)).unwrap();
        let mut c = [0i64; 4];
        labels.labels().iter().for_each(|&l| c[l as usize] += 1);
        assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
    }
}
