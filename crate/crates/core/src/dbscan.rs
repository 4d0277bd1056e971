//! DBSCAN over a precomputed distance matrix, plus the k-distance knee
//! heuristic for picking `eps`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

pub const NOISE: i64 = -1;

/// Cluster label per observation in observation order; [`NOISE`] marks
/// noise. Clusters are numbered `0..c` in discovery order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(Vec<i64>);

impl Labeling {
    pub fn new(labels: Vec<i64>) -> Self {
        Labeling(labels)
    }

    pub fn labels(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_noise(&self) -> usize {
        self.0.iter().filter(|&&l| l == NOISE).count()
    }

    /// Number of distinct non-noise labels.
    pub fn n_clusters(&self) -> usize {
        let mut seen: Vec<i64> = self.0.iter().copied().filter(|&l| l != NOISE).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Every noise point becomes its own cluster, numbered after the largest
    /// existing label in observation order.
    pub fn singleton_expanded(&self) -> Labeling {
        let mut next = self.0.iter().copied().max().unwrap_or(NOISE).max(NOISE) + 1;
        Labeling(
            self.0
                .iter()
                .map(|&l| {
                    if l == NOISE {
                        next += 1;
                        next - 1
                    } else {
                        l
                    }
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsMode {
    Explicit(f64),
    /// Knee of the sorted k-distance curve, see [`knee_eps`].
    Knee,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanConfig {
    pub eps: EpsMode,
    pub min_pts: usize,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        DbscanConfig { eps: EpsMode::Knee, min_pts: 4 }
    }
}

impl DbscanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_pts == 0 {
            return Err(Error::InvalidConfig("min_pts must be at least 1".into()));
        }
        if let EpsMode::Explicit(eps) = self.eps {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidConfig(alloc::format!("eps must be positive, got {eps}")));
            }
        }
        Ok(())
    }
}

/// A resolved clustering: labels plus the `eps` actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub labeling: Labeling,
    pub eps: f64,
    pub min_pts: usize,
    /// Set when the knee heuristic fell back to the median k-distance.
    pub knee_fallback: bool,
}

/// Resolves `eps` from `cfg` and clusters.
pub fn cluster(d: &DistanceMatrix, cfg: &DbscanConfig) -> Result<Clustering> {
    cfg.validate()?;
    let (eps, knee_fallback) = match cfg.eps {
        EpsMode::Explicit(e) => (e, false),
        EpsMode::Knee => {
            let k = knee_eps(d, cfg.min_pts)?;
            (k.eps, k.fallback)
        }
    };
    Ok(Clustering { labeling: dbscan(d, eps, cfg.min_pts)?, eps, min_pts: cfg.min_pts, knee_fallback })
}

/// Classical DBSCAN. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Core points are grouped into
/// density-connected components, expanded in ascending index order. A
/// border point joins the cluster of its lowest-index core neighbor.
pub fn dbscan(d: &DistanceMatrix, eps: f64, min_pts: usize) -> Result<Labeling> {
    if min_pts == 0 {
        return Err(Error::InvalidConfig("min_pts must be at least 1".into()));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("eps must be non-negative, got {eps}")));
    }
    let n = d.len();
    let neighbors = |i: usize| d.row(i).iter().enumerate().filter(move |&(_, &x)| x <= eps).map(|(j, _)| j);
    Ok(dbscan_from_neighbors(n, min_pts, neighbors))
}

/// DBSCAN directly on point coordinates (`dims` values per point), with
/// distances computed on the fly.
pub fn dbscan_points(coords: &[f64], dims: usize, eps: f64, min_pts: usize) -> Labeling {
    let n = coords.len() / dims;
    let p = |i: usize| &coords[i * dims..(i + 1) * dims];
    let eps2 = eps * eps;
    let neighbors = |i: usize| {
        (0..n).filter(move |&j| p(i).iter().zip(p(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= eps2)
    };
    dbscan_from_neighbors(n, min_pts, neighbors)
}

fn dbscan_from_neighbors<I, F>(n: usize, min_pts: usize, neighbors: F) -> Labeling
where
    I: Iterator<Item = usize>,
    F: Fn(usize) -> I,
{
    let hoods: Vec<Vec<usize>> = (0..n).map(|i| neighbors(i).collect()).collect();
    let core: Vec<bool> = hoods.iter().map(|h| h.len() >= min_pts).collect();
    let mut labels = vec![NOISE; n];
    let mut next = 0i64;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !core[start] || labels[start] != NOISE {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for &q in &hoods[p] {
                if core[q] && labels[q] == NOISE {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if !core[i] {
            // neighborhoods are in ascending index order
            if let Some(&c) = hoods[i].iter().find(|&&j| core[j]) {
                labels[i] = labels[c];
            }
        }
    }
    Labeling(labels)
}

/// Each point's distance to its `min_pts`-th nearest point, counting the
/// point itself as the first; this is the smallest `eps` that makes it core.
pub fn k_distances(d: &DistanceMatrix, min_pts: usize) -> Result<Vec<f64>> {
    let n = d.len();
    if min_pts == 0 || n < min_pts {
        return Err(Error::InvalidConfig(alloc::format!(
            "k-distance needs 1 <= min_pts <= n (min_pts = {min_pts}, n = {n})"
        )));
    }
    Ok((0..n)
        .map(|i| {
            let mut row = d.row(i).to_vec();
            row.select_nth_unstable_by(min_pts - 1, f64::total_cmp);
            row[min_pts - 1]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneeEps {
    pub eps: f64,
    /// The curve was flat and the median k-distance was returned instead.
    pub fallback: bool,
}

/// Sorts the k-distances ascending, rescales both axes to `[0, 1]` and
/// returns the value farthest below the chord joining the first and last
/// points, where the curve bends upward. If no point lies below the chord
/// the farthest point on either side is used. A flat curve has no knee and
/// yields the median.
pub fn knee_eps(d: &DistanceMatrix, min_pts: usize) -> Result<KneeEps> {
    let n = d.len();
    if n <= min_pts {
        return Err(Error::InvalidConfig(alloc::format!(
            "knee selection needs more points ({n}) than min_pts ({min_pts})"
        )));
    }
    let mut curve = k_distances(d, min_pts)?;
    curve.sort_by(f64::total_cmp);
    Ok(knee_of_sorted(&curve))
}

fn knee_of_sorted(curve: &[f64]) -> KneeEps {
    let n = curve.len();
    let (lo, hi) = (curve[0], curve[n - 1]);
    if !(hi > lo) {
        let median = if n % 2 == 1 { curve[n / 2] } else { 0.5 * (curve[n / 2 - 1] + curve[n / 2]) };
        return KneeEps { eps: median, fallback: true };
    }
    let span = hi - lo;
    let last = (n - 1) as f64;
    // positive gap: the curve lies below the chord
    let gaps: Vec<f64> = curve.iter().enumerate().map(|(i, &y)| i as f64 / last - (y - lo) / span).collect();
    let argmax = |score: &dyn Fn(f64) -> f64| {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &g) in gaps.iter().enumerate() {
            if score(g) > best.1 {
                best = (i, score(g));
            }
        }
        best
    };
    let below = argmax(&|g| g);
    let knee = if below.1 > 0.0 { below.0 } else { argmax(&f64::abs).0 };
    KneeEps { eps: curve[knee], fallback: false }
}
