//! Exact t-SNE to two dimensions over a precomputed distance matrix.
//!
//! Rows are processed in a canonical order derived from each row's sorted
//! distances, so permuting the input permutes the output identically.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
use num_traits::Float;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::seed::{self, Tag};

pub const OUTPUT_DIMS: usize = 2;
pub const MIN_GAIN: f64 = 0.01;
pub const INIT_STD: f64 = 1e-4;
/// Bisection budget of [`calibrate_row`].
pub const MAX_BANDWIDTH_ITERATIONS: usize = 200;
/// Entropy tolerance in bits.
pub const PERPLEXITY_TOLERANCE_BITS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneConfig {
    /// Clipped to `(n - 1) / 3` for small inputs.
    pub perplexity: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
    /// `None` selects `max(n / 12, 50)`.
    pub learning_rate: Option<f64>,
    pub momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: None,
            momentum: 0.5,
            final_momentum: 0.8,
            seed: 0,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("perplexity", self.perplexity)?;
        positive("exaggeration", self.exaggeration)?;
        if let Some(lr) = self.learning_rate {
            positive("learning_rate", lr)?;
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be positive".into()));
        }
        for (name, m) in [("momentum", self.momentum), ("final_momentum", self.final_momentum)] {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1), got {m}")));
            }
        }
        Ok(())
    }

    pub fn effective_perplexity(&self, n: usize) -> f64 {
        self.perplexity.min((n as f64 - 1.0) / 3.0)
    }

    pub fn effective_learning_rate(&self, n: usize) -> f64 {
        self.learning_rate.unwrap_or_else(|| (n as f64 / 12.0).max(50.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// Row-major `n x 2` coordinates in input row order.
    pub coords: Vec<f64>,
    /// KL(P || Q) at the initial layout, without exaggeration.
    pub initial_kl: f64,
    pub kl: f64,
    pub perplexity: f64,
    pub learning_rate: f64,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len() / OUTPUT_DIMS
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.coords[2 * i], self.coords[2 * i + 1]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub beta: f64,
    /// Conditional probabilities, aligned with the input distances.
    pub p: Vec<f64>,
    /// Shannon entropy in nats.
    pub entropy: f64,
}

fn row_entropy(sq: &[f64], beta: f64, p: &mut [f64]) -> f64 {
    let min = sq.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (pj, &d) in p.iter_mut().zip(sq) {
        let shifted = d - min;
        *pj = (-beta * shifted).exp();
        sum += *pj;
        weighted += *pj * shifted;
    }
    for pj in p.iter_mut() {
        *pj /= sum;
    }
    sum.ln() + beta * weighted / sum
}

/// Finds the Gaussian precision `beta` over squared distances `sq` (self
/// excluded) whose conditional distribution has the target perplexity.
/// Starts from `1 / mean(sq)` and doubles, halves or bisects, so scaling
/// all distances by a power of two scales `beta` exactly.
pub fn calibrate_row(sq: &[f64], perplexity: f64) -> Option<Calibration> {
    if sq.is_empty() || sq.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return None;
    }
    let target = perplexity.ln();
    let tol = PERPLEXITY_TOLERANCE_BITS * core::f64::consts::LN_2;
    let mean = sq.iter().sum::<f64>() / sq.len() as f64;
    let mut beta = if mean > 0.0 { 1.0 / mean } else { 1.0 };
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut p = vec![0.0; sq.len()];
    for _ in 0..MAX_BANDWIDTH_ITERATIONS {
        let h = row_entropy(sq, beta, &mut p);
        if !h.is_finite() {
            return None;
        }
        let diff = h - target;
        if diff.abs() < tol {
            return Some(Calibration { beta, p, entropy: h });
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
        } else {
            hi = beta;
            beta = if lo == 0.0 { beta * 0.5 } else { 0.5 * (beta + lo) };
        }
    }
    None
}

/// Symmetric joint affinities `P`, row-major `n x n`, summing to one.
pub fn joint_probabilities<E: Executor + ?Sized>(d: &DistanceMatrix, perplexity: f64, exec: &E) -> Result<Vec<f64>> {
    let n = d.len();
    let rows = exec.map(n, &|i: usize| {
        let sq: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d.get(i, j) * d.get(i, j)).collect();
        calibrate_row(&sq, perplexity).ok_or(Error::Bandwidth { row: i })
    });
    let mut cond = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        let cal = row?;
        let others = (0..n).filter(|&j| j != i);
        for (j, p) in others.zip(cal.p) {
            cond[i * n + j] = p;
        }
    }
    let mut p = vec![0.0; n * n];
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = cond[i * n + j] + cond[j * n + i];
            p[i * n + j] = v;
            total += v;
        }
    }
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

fn student_kernel(y: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut num = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = y[2 * i] - y[2 * j];
                let dy = y[2 * i + 1] - y[2 * j + 1];
                let q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = q;
                z += q;
            }
        }
    }
    (num, z)
}

/// KL(P || Q) for the layout `y` (row-major `n x 2`).
pub fn kl_divergence(p: &[f64], y: &[f64]) -> f64 {
    let n = y.len() / OUTPUT_DIMS;
    let (num, z) = student_kernel(y, n);
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                kl += pij * (pij / (num[i * n + j] / z)).ln();
            }
        }
    }
    kl
}

/// Gradient of KL(exaggeration * P || Q) with respect to `y`.
pub fn kl_gradient(p: &[f64], y: &[f64], exaggeration: f64) -> Vec<f64> {
    gradient_with(p, y, exaggeration, &Sequential)
}

fn gradient_with<E: Executor + ?Sized>(p: &[f64], y: &[f64], exaggeration: f64, exec: &E) -> Vec<f64> {
    let n = y.len() / OUTPUT_DIMS;
    let (num, z) = student_kernel(y, n);
    let rows = exec.map(n, &|i: usize| {
        let (mut gx, mut gy) = (0.0, 0.0);
        for j in 0..n {
            if j != i {
                let q = num[i * n + j];
                let m = (exaggeration * p[i * n + j] - q / z) * q;
                gx += m * (y[2 * i] - y[2 * j]);
                gy += m * (y[2 * i + 1] - y[2 * j + 1]);
            }
        }
        [4.0 * gx, 4.0 * gy]
    });
    rows.into_iter().flatten().collect()
}

/// Processing order: rows sorted by a hash of their sorted distances, ties
/// by index.
fn canonical_order(d: &DistanceMatrix) -> Vec<usize> {
    let n = d.len();
    let keys: Vec<[u8; 32]> = (0..n)
        .map(|i| {
            let mut row = d.row(i).to_vec();
            row.sort_by(f64::total_cmp);
            let mut h = Sha256::new();
            for v in row {
                h.update(v.to_bits().to_le_bytes());
            }
            h.finalize().into()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    order
}

fn center_layout(y: &mut [f64]) {
    let n = (y.len() / OUTPUT_DIMS) as f64;
    for axis in 0..OUTPUT_DIMS {
        let mean = y.iter().skip(axis).step_by(OUTPUT_DIMS).sum::<f64>() / n;
        y.iter_mut().skip(axis).step_by(OUTPUT_DIMS).for_each(|v| *v -= mean);
    }
}

pub fn tsne_embed(d: &DistanceMatrix, cfg: &TsneConfig) -> Result<Embedding> {
    tsne_embed_with(d, cfg, &Sequential)
}

pub fn tsne_embed_with<E: Executor + ?Sized>(d: &DistanceMatrix, cfg: &TsneConfig, exec: &E) -> Result<Embedding> {
    cfg.validate()?;
    let n = d.len();
    if n < 4 {
        return Err(Error::InvalidConfig(format!("t-SNE needs at least 4 observations, got {n}")));
    }
    if d.is_all_zero() {
        return Err(Error::Degenerate("all distances are zero; perplexity calibration is impossible".into()));
    }
    let perplexity = cfg.effective_perplexity(n);
    let learning_rate = cfg.effective_learning_rate(n);

    let order = canonical_order(d);
    let dc = d.permuted(&order);
    let p = joint_probabilities(&dc, perplexity, exec).map_err(|e| match e {
        Error::Bandwidth { row } => Error::Bandwidth { row: order[row] },
        other => other,
    })?;

    let mut rng = seed::rng(cfg.seed, &[Tag::Str("tsne-init")]);
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    let mut y: Vec<f64> = (0..n * OUTPUT_DIMS).map(|_| normal.sample(&mut rng)).collect();
    center_layout(&mut y);
    let initial_kl = kl_divergence(&p, &y);

    let mut update = vec![0.0; n * OUTPUT_DIMS];
    let mut gains = vec![1.0; n * OUTPUT_DIMS];
    for it in 0..cfg.iterations {
        let early = it < cfg.exaggeration_iterations;
        let exaggeration = if early { cfg.exaggeration } else { 1.0 };
        let momentum = if early { cfg.momentum } else { cfg.final_momentum };
        // the main phase starts from a fresh optimizer state
        if it == cfg.exaggeration_iterations {
            update.iter_mut().for_each(|u| *u = 0.0);
            gains.iter_mut().for_each(|g| *g = 1.0);
        }
        let grad = gradient_with(&p, &y, exaggeration, exec);
        for k in 0..y.len() {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) { gains[k] + 0.2 } else { gains[k] * 0.8 };
            gains[k] = gains[k].max(MIN_GAIN);
            update[k] = momentum * update[k] - learning_rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        center_layout(&mut y);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "t-SNE layout" });
    }
    let kl = kl_divergence(&p, &y);

    let mut coords = vec![0.0; n * OUTPUT_DIMS];
    for (canon, &orig) in order.iter().enumerate() {
        coords[2 * orig] = y[2 * canon];
        coords[2 * orig + 1] = y[2 * canon + 1];
    }
    Ok(Embedding { coords, initial_kl, kl, perplexity, learning_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::point_distances;

    #[test]
    fn equidistant_row_is_uniform() {
        let sq = [4.0; 9];
        let cal = calibrate_row(&sq, 9.0).unwrap();
        for p in cal.p {
            assert!((p - 1.0 / 9.0).abs() < 1e-6);
        }
    }

    #[test]
    fn doubling_distances_quarters_beta() {
        let row: Vec<f64> = (1..20).map(|i| ((i * 37) % 11) as f64 * 0.3 + 0.1).collect();
        let sq: Vec<f64> = row.iter().map(|d| d * d).collect();
        let sq2: Vec<f64> = row.iter().map(|d| (2.0 * d) * (2.0 * d)).collect();
        let a = calibrate_row(&sq, 5.0).unwrap();
        let b = calibrate_row(&sq2, 5.0).unwrap();
        assert_eq!(b.beta, a.beta / 4.0);
    }

    #[test]
    fn joint_p_is_symmetric_and_normalized() {
        let xs: Vec<f64> = (0..30).map(|i| ((i * 7919) % 101) as f64 / 10.0).collect();
        let d = point_distances(&xs, 2);
        let p = joint_probabilities(&d, 5.0, &Sequential).unwrap();
        let n = d.len();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        for i in 0..n {
            assert_eq!(p[i * n + i], 0.0);
            for j in 0..n {
                assert_eq!(p[i * n + j], p[j * n + i]);
                assert!(p[i * n + j] >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let zero = point_distances(&[1.0; 8], 1);
        assert!(matches!(tsne_embed(&zero, &TsneConfig::default()), Err(Error::Degenerate(_))));
        let tiny = point_distances(&[0.0, 1.0, 2.0], 1);
        assert!(tsne_embed(&tiny, &TsneConfig::default()).is_err());
        let bad = TsneConfig { momentum: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn embedding_is_centered_and_finite() {
        let xs: Vec<f64> = (0..40).map(|i| (i % 4) as f64 * 10.0 + (i as f64) * 0.01).collect();
        let d = point_distances(&xs, 1);
        let e = tsne_embed(&d, &TsneConfig::default()).unwrap();
        assert_eq!(e.len(), 40);
        assert!(e.coords.iter().all(|v| v.is_finite()));
        for axis in 0..2 {
            let mean: f64 = e.coords.iter().skip(axis).step_by(2).sum::<f64>() / 40.0;
            assert!(mean.abs() < 1e-6);
        }
        assert!(e.kl < e.initial_kl);
    }
}
