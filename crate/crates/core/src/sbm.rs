//! Synthetic benchmark: stochastic block model graphs with planted
//! communities and community-aligned noisy attribute vectors.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};

use crate::attributes::AttributeMatrix;
use crate::dbscan::Labeling;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphBuilder};
use crate::seed::{self, Tag};

/// Connectivity resampling budget for [`generate_sbm_graph`].
pub const MAX_CONNECT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmConfig {
    /// Number of communities.
    pub k: usize,
    pub community_size: usize,
    /// Expected node degree.
    pub avg_degree: f64,
    /// Expected number of a node's edges leaving its community.
    pub d_out: f64,
    /// Standard deviation of the Gaussian noise added to every attribute.
    pub sigma: f64,
    pub n_obs: usize,
    pub seed: u64,
}

impl Default for SbmConfig {
    fn default() -> Self {
        SbmConfig { k: 4, community_size: 50, avg_degree: 20.0, d_out: 2.0, sigma: 1.0, n_obs: 300, seed: 0 }
    }
}

impl SbmConfig {
    pub fn nodes(&self) -> usize {
        self.k * self.community_size
    }

    /// Within-community edge probability.
    pub fn p_in(&self) -> f64 {
        (self.avg_degree - self.d_out) / (self.community_size - 1) as f64
    }

    /// Between-community edge probability.
    pub fn p_out(&self) -> f64 {
        let outside = self.nodes() - self.community_size;
        if outside == 0 {
            0.0
        } else {
            self.d_out / outside as f64
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: alloc::string::String| Err(Error::InvalidConfig(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.community_size < 2 {
            return bad("community_size must be at least 2".into());
        }
        if !(self.d_out >= 0.0 && self.d_out <= self.avg_degree) || !self.avg_degree.is_finite() {
            return bad(format!("need 0 <= d_out ({}) <= avg_degree ({})", self.d_out, self.avg_degree));
        }
        if self.n_obs < self.k {
            return bad(format!("n_obs ({}) must be at least k ({})", self.n_obs, self.k));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad(format!("sigma must be finite and non-negative, got {}", self.sigma));
        }
        if self.p_in() > 1.0 || self.p_out() > 1.0 {
            return bad(format!(
                "edge probabilities exceed 1 (p_in = {}, p_out = {})",
                self.p_in(),
                self.p_out()
            ));
        }
        Ok(())
    }
}

/// Node `i` belongs to community `i / community_size`.
pub fn node_communities(cfg: &SbmConfig) -> Vec<usize> {
    (0..cfg.nodes()).map(|i| i / cfg.community_size).collect()
}

/// Bernoulli(p) trials over `count` slots, visiting successes in increasing
/// slot order by jumping geometric gaps.
fn sample_slots<R: Rng>(rng: &mut R, count: u64, p: f64, mut hit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(hit);
        return;
    }
    let gap = Geometric::new(p).expect("0 < p < 1");
    let mut slot = 0u64;
    loop {
        let skip = gap.sample(rng);
        slot = match slot.checked_add(skip) {
            Some(s) if s < count => s,
            _ => return,
        };
        hit(slot);
        slot += 1;
    }
}

/// One SBM draw, connected or not.
pub fn sample_sbm<R: Rng>(cfg: &SbmConfig, rng: &mut R) -> Result<Graph> {
    cfg.validate()?;
    let s = cfg.community_size;
    let mut b = GraphBuilder::new();
    for i in 0..cfg.nodes() {
        b.node(&format!("v{i}"));
    }
    let (p_in, p_out) = (cfg.p_in(), cfg.p_out());
    for c in 0..cfg.k {
        let base = c * s;
        // upper triangle of the block, row by row
        let mut row = 0usize;
        let mut row_start = 0u64;
        let pairs = (s * (s - 1) / 2) as u64;
        let mut edges = Vec::new();
        sample_slots(rng, pairs, p_in, |slot| {
            while slot >= row_start + (s - 1 - row) as u64 {
                row_start += (s - 1 - row) as u64;
                row += 1;
            }
            let col = row + 1 + (slot - row_start) as usize;
            edges.push((base + row, base + col));
        });
        for (u, v) in edges {
            b.edge_by_index(u, v, 1.0)?;
        }
        for d in c + 1..cfg.k {
            let other = d * s;
            let mut edges = Vec::new();
            sample_slots(rng, (s * s) as u64, p_out, |slot| {
                edges.push((base + (slot / s as u64) as usize, other + (slot % s as u64) as usize));
            });
            for (u, v) in edges {
                b.edge_by_index(u, v, 1.0)?;
            }
        }
    }
    Ok(b.build())
}

/// Samples until connected, each attempt on its own RNG stream.
pub fn generate_sbm_graph(cfg: &SbmConfig) -> Result<(Graph, Vec<usize>)> {
    cfg.validate()?;
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let mut rng = seed::rng(cfg.seed, &[Tag::Str("sbm-graph"), Tag::U64(attempt as u64)]);
        let g = sample_sbm(cfg, &mut rng)?;
        if g.validate().connected {
            return Ok((g, node_communities(cfg)));
        }
    }
    Err(Error::SbmConnectivity { attempts: MAX_CONNECT_ATTEMPTS })
}

/// Observation `i` belongs to community `i mod k`. Entries on its own
/// community's nodes are uniform in `[0.5, 1)`, all others uniform in
/// `[0, 0.5)`; then `N(0, σ²)` noise is added to every entry, unclipped.
pub fn generate_observations(cfg: &SbmConfig, node_truth: &[usize]) -> Result<(AttributeMatrix, Labeling)> {
    cfg.validate()?;
    if node_truth.len() != cfg.nodes() {
        return Err(Error::DimensionMismatch { expected: cfg.nodes(), found: node_truth.len() });
    }
    let mut rng = seed::rng(cfg.seed, &[Tag::Str("sbm-observations")]);
    let dim = node_truth.len();
    let mut values = Vec::with_capacity(cfg.n_obs * dim);
    let mut truth = Vec::with_capacity(cfg.n_obs);
    for i in 0..cfg.n_obs {
        let c = i % cfg.k;
        truth.push(c as i64);
        for &node_c in node_truth {
            let mut x = if node_c == c { rng.random_range(0.5..1.0) } else { rng.random_range(0.0..0.5) };
            if cfg.sigma > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                x += cfg.sigma * z;
            }
            values.push(x);
        }
    }
    let ids = (0..cfg.n_obs).map(|i| format!("o{i}")).collect();
    Ok((AttributeMatrix::new(ids, dim, values)?, Labeling::new(truth)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub graph: Graph,
    pub attributes: AttributeMatrix,
    /// Community of every observation.
    pub truth: Labeling,
    /// Community of every node.
    pub node_truth: Vec<usize>,
}

pub fn generate_dataset(cfg: &SbmConfig) -> Result<LabeledDataset> {
    let (graph, node_truth) = generate_sbm_graph(cfg)?;
    let (attributes, truth) = generate_observations(cfg, &node_truth)?;
    Ok(LabeledDataset { graph, attributes, truth, node_truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_size_is_two_hundred() {
        let cfg = SbmConfig::default();
        let (g, truth) = generate_sbm_graph(&cfg).unwrap();
        assert_eq!(g.node_count(), 200);
        assert_eq!(truth.len(), 200);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn zero_d_out_exhausts_retries() {
        let cfg = SbmConfig { k: 2, d_out: 0.0, community_size: 10, avg_degree: 5.0, ..Default::default() };
        assert_eq!(generate_sbm_graph(&cfg).unwrap_err(), Error::SbmConnectivity { attempts: 100 });
    }

    #[test]
    fn config_validation() {
        let ok = SbmConfig::default();
        assert!(ok.validate().is_ok());
        assert!(SbmConfig { d_out: 21.0, ..ok }.validate().is_err());
        assert!(SbmConfig { d_out: -1.0, ..ok }.validate().is_err());
        assert!(SbmConfig { community_size: 1, ..ok }.validate().is_err());
        assert!(SbmConfig { n_obs: 3, ..ok }.validate().is_err());
        assert!(SbmConfig { avg_degree: 100.0, ..ok }.validate().is_err());
        assert!(SbmConfig { sigma: f64::NAN, ..ok }.validate().is_err());
    }

    #[test]
    fn noiseless_observations_sit_in_their_ranges() {
        let cfg = SbmConfig { sigma: 0.0, n_obs: 40, ..Default::default() };
        let truth_nodes = node_communities(&cfg);
        let (attrs, truth) = generate_observations(&cfg, &truth_nodes).unwrap();
        for (i, row) in attrs.rows().enumerate() {
            let c = truth.labels()[i] as usize;
            assert_eq!(c, i % 4);
            for (j, &x) in row.iter().enumerate() {
                if truth_nodes[j] == c {
                    assert!((0.5..1.0).contains(&x));
                } else {
                    assert!((0.0..0.5).contains(&x));
                }
            }
            // thresholding at 0.5 recovers the community
            let above: Vec<usize> = (0..row.len()).filter(|&j| row[j] >= 0.5).map(|j| truth_nodes[j]).collect();
            assert!(above.iter().all(|&k| k == c) && above.len() == cfg.community_size);
        }
    }

    #[test]
    fn round_robin_balance() {
        let cfg = SbmConfig { n_obs: 302, ..Default::default() };
        let (_, truth) = generate_observations(&cfg, &node_communities(&cfg)).unwrap();
        let mut counts = [0usize; 4];
        for &l in truth.labels() {
            counts[l as usize] += 1;
        }
        assert_eq!(counts, [76, 76, 75, 75]);
    }

    #[test]
    fn same_seed_same_dataset() {
        let cfg = SbmConfig { seed: 99, n_obs: 20, ..Default::default() };
        assert_eq!(generate_dataset(&cfg).unwrap(), generate_dataset(&cfg).unwrap());
        let other = SbmConfig { seed: 100, ..cfg };
        assert_ne!(generate_dataset(&cfg).unwrap().graph, generate_dataset(&other).unwrap().graph);
    }
}
