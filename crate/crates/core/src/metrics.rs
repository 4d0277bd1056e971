//! Adjusted mutual information between two labelings. Natural logarithms,
//! arithmetic-mean normalization, hypergeometric expected MI.

use alloc::vec;
use alloc::vec::Vec;

use crate::dbscan::Labeling;
use crate::error::{Error, Result};

/// Co-occurrence counts. Rows follow the sorted distinct labels of the
/// first labeling, columns those of the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

fn dense_codes(labels: &[i64]) -> (Vec<usize>, usize) {
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let codes = labels.iter().map(|l| distinct.binary_search(l).expect("present")).collect();
    (codes, distinct.len())
}

impl ContingencyTable {
    pub fn new(a: &Labeling, b: &Labeling) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        if a.is_empty() {
            return Err(Error::EmptyLabeling);
        }
        let (ra, rows) = dense_codes(a.labels());
        let (cb, cols) = dense_codes(b.labels());
        let mut counts = vec![0u64; rows * cols];
        for (&i, &j) in ra.iter().zip(&cb) {
            counts[i * cols + j] += 1;
        }
        Ok(Self::from_counts(rows, cols, counts))
    }

    /// Panics when `counts.len() != rows * cols`.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), rows * cols, "table shape");
        let mut row_sums = vec![0u64; rows];
        let mut col_sums = vec![0u64; cols];
        for i in 0..rows {
            for j in 0..cols {
                row_sums[i] += counts[i * cols + j];
                col_sums[j] += counts[i * cols + j];
            }
        }
        let total = row_sums.iter().sum();
        ContingencyTable { rows, cols, counts, row_sums, col_sums, total }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

fn entropy_of_counts(counts: &[u64], n: u64) -> f64 {
    let n = n as f64;
    -counts.iter().filter(|&&c| c > 0).map(|&c| (c as f64 / n) * (c as f64 / n).ln()).sum::<f64>()
}

pub fn entropy(labeling: &Labeling) -> Result<f64> {
    if labeling.is_empty() {
        return Err(Error::EmptyLabeling);
    }
    let (codes, k) = dense_codes(labeling.labels());
    let mut counts = vec![0u64; k];
    for c in codes {
        counts[c] += 1;
    }
    Ok(entropy_of_counts(&counts, labeling.len() as u64))
}

pub fn mutual_information(ct: &ContingencyTable) -> f64 {
    let n = ct.total as f64;
    let mut mi = 0.0;
    for i in 0..ct.rows {
        for j in 0..ct.cols {
            let nij = ct.get(i, j);
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (ct.row_sums[i] as f64 * ct.col_sums[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// `ln(k!)` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    t.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        t.push(acc);
    }
    t
}

/// Expected mutual information under the hypergeometric model with the
/// table's marginals fixed.
pub fn expected_mutual_information(ct: &ContingencyTable) -> f64 {
    let n = ct.total as usize;
    let lf = log_factorials(n);
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in &ct.row_sums {
        let a = a as usize;
        for &b in &ct.col_sums {
            let b = b as usize;
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = lf[a] + lf[b] + lf[n - a] + lf[n - b] - lf[n];
            for nij in lo..=hi {
                let x = nij as f64;
                let log_p = fixed - lf[nij] - lf[a - nij] - lf[b - nij] - lf[n + nij - a - b];
                emi += x / nf * (nf * x / (a as f64 * b as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

fn same_partition(a: &Labeling, b: &Labeling) -> bool {
    dense_first_seen(a.labels()) == dense_first_seen(b.labels())
}

fn dense_first_seen(labels: &[i64]) -> Vec<usize> {
    let mut seen: Vec<i64> = Vec::new();
    labels
        .iter()
        .map(|l| match seen.iter().position(|s| s == l) {
            Some(p) => p,
            None => {
                seen.push(*l);
                seen.len() - 1
            }
        })
        .collect()
}

/// Adjusted mutual information. Every distinct label, including `-1`, is
/// treated as an ordinary cluster; expand noise first with
/// [`Labeling::singleton_expanded`] when needed.
pub fn ami(truth: &Labeling, predicted: &Labeling) -> Result<f64> {
    let ct = ContingencyTable::new(truth, predicted)?;
    let n = ct.total;
    let hu = entropy_of_counts(&ct.row_sums, n);
    let hv = entropy_of_counts(&ct.col_sums, n);
    if hu == 0.0 && hv == 0.0 {
        return Ok(1.0);
    }
    let mi = mutual_information(&ct);
    let emi = expected_mutual_information(&ct);
    let num = mi - emi;
    let den = 0.5 * (hu + hv) - emi;
    if den.abs() < 1e-12 {
        let identical = num.abs() < 1e-12 && same_partition(truth, predicted);
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub ami: f64,
    pub n_clusters: usize,
    pub n_noise: usize,
}

/// Scores a raw clustering (noise as `-1`) against the truth, expanding
/// noise points into singleton clusters.
pub fn evaluate(truth: &Labeling, predicted: &Labeling) -> Result<EvalMetrics> {
    Ok(EvalMetrics {
        ami: ami(truth, &predicted.singleton_expanded())?,
        n_clusters: predicted.n_clusters(),
        n_noise: predicted.n_noise(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(v: &[i64]) -> Labeling {
        Labeling::new(v.to_vec())
    }

    #[test]
    fn identical_and_renamed() {
        let a = lab(&[0, 0, 1, 1, 2, 2, 2]);
        assert!((ami(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let b = lab(&[5, 5, 3, 3, 9, 9, 9]);
        assert!((ami(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_prediction_scores_zero() {
        let a = lab(&[0, 0, 1, 1, 2, 2]);
        assert_eq!(ami(&a, &lab(&[7; 6])).unwrap(), 0.0);
        assert_eq!(ami(&lab(&[1; 5]), &lab(&[2; 5])).unwrap(), 1.0);
    }

    #[test]
    fn entropies() {
        assert!((entropy(&lab(&[0, 1, 0, 1])).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&lab(&[3, 3, 3])).unwrap(), 0.0);
        assert_eq!(entropy(&lab(&[])).unwrap_err(), Error::EmptyLabeling);
    }

    #[test]
    fn independent_table_has_no_information() {
        let ct = ContingencyTable::from_counts(2, 3, vec![1, 2, 3, 2, 4, 6]);
        assert!(mutual_information(&ct) < 1e-12);
    }

    #[test]
    fn all_singletons_on_both_sides() {
        let a = lab(&[0, 1, 2, 3]);
        assert_eq!(ami(&a, &lab(&[3, 2, 1, 0])).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(ami(&lab(&[0, 1]), &lab(&[0])).unwrap_err(), Error::LengthMismatch(2, 1));
    }

    #[test]
    fn noise_is_expanded_for_evaluation() {
        let truth = lab(&[0, 0, 0, 1, 1, 1]);
        let m = evaluate(&truth, &lab(&[0, 0, -1, 1, 1, -1])).unwrap();
        assert_eq!((m.n_clusters, m.n_noise), (2, 2));
        let collapsed = ami(&truth, &lab(&[0, 0, -1, 1, 1, -1])).unwrap();
        assert!(m.ami != collapsed);
    }
}
