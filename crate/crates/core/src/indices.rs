//! Cluster validity indices on similarity-derived distances, and the
//! adjusted Rand index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::SimilarityMatrix;

/// Symmetric pairwise distances, `d = max(0, 1 - rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: BTreeMap<(usize, usize), f64>,
}

impl DistanceMatrix {
    pub fn from_similarities(m: &SimilarityMatrix) -> Self {
        Self {
            entries: m.iter().map(|(&k, e)| (k, (1.0 - e.rho).max(0.0))).collect(),
        }
    }

    /// From explicit distances; each unordered pair may appear once.
    pub fn from_pairs(pairs: impl IntoIterator<Item = ((usize, usize), f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for ((a, b), d) in pairs {
            if a == b || !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidParameter(format!("bad distance {d} for ({a}, {b})")));
            }
            if entries.insert((a.min(b), a.max(b)), d).is_some() {
                return Err(Error::InvalidParameter(format!("pair ({a}, {b}) given twice")));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, a: usize, b: usize) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        self.entries
            .get(&(a.min(b), a.max(b)))
            .copied()
            .ok_or_else(|| Error::Internal(format!("no distance for pair ({a}, {b})")))
    }
}

/// Inter-cluster distance for the Dunn index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Inter {
    /// Closest pair.
    #[default]
    I1,
    /// Farthest pair.
    I2,
    /// Mean over pairs.
    I3,
}

/// Intra-cluster distance for the Dunn index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Intra {
    /// Diameter.
    #[default]
    J1,
    /// Mean over distinct pairs.
    J2,
}

/// The index used to score partitions; larger is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ClusterIndex {
    #[default]
    Silhouette,
    Dunn { inter: Inter, intra: Intra },
}

impl ClusterIndex {
    pub fn evaluate(&self, groups: &[Vec<usize>], dist: &DistanceMatrix) -> Result<f64> {
        match *self {
            Self::Silhouette => silhouette(groups, dist),
            Self::Dunn { inter, intra } => dunn(groups, dist, inter, intra),
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ClusterIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Silhouette => write!(f, "silhouette"),
            Self::Dunn { inter, intra } => write!(f, "dunn({inter:?},{intra:?})"),
        }
    }
}

impl FromStr for Inter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I1" => Ok(Self::I1),
            "I2" => Ok(Self::I2),
            "I3" => Ok(Self::I3),
            _ => Err(Error::Config(format!("unknown inter-cluster distance {s}"))),
        }
    }
}

impl FromStr for Intra {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "J1" => Ok(Self::J1),
            "J2" => Ok(Self::J2),
            _ => Err(Error::Config(format!("unknown intra-cluster distance {s}"))),
        }
    }
}

fn mean_distance(x: usize, group: &[usize], dist: &DistanceMatrix) -> Result<f64> {
    let mut s = 0.0;
    let mut n = 0usize;
    for &y in group {
        if y != x {
            s += dist.get(x, y)?;
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { s / n as f64 })
}

/// Mean silhouette width. Members of singleton groups score 0.
pub fn silhouette(groups: &[Vec<usize>], dist: &DistanceMatrix) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::UndefinedIndex("silhouette needs at least two groups".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (k, g) in groups.iter().enumerate() {
        for &x in g {
            count += 1;
            if g.len() == 1 {
                continue;
            }
            let a = mean_distance(x, g, dist)?;
            let mut b = f64::INFINITY;
            for (l, h) in groups.iter().enumerate() {
                if l != k {
                    b = b.min(mean_distance(x, h, dist)?);
                }
            }
            let m = a.max(b);
            if m > 0.0 {
                total += (b - a) / m;
            }
        }
    }
    Ok(total / count as f64)
}

fn inter_distance(g: &[usize], h: &[usize], dist: &DistanceMatrix, kind: Inter) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for &x in g {
        for &y in h {
            let d = dist.get(x, y)?;
            min = min.min(d);
            max = max.max(d);
            sum += d;
        }
    }
    Ok(match kind {
        Inter::I1 => min,
        Inter::I2 => max,
        Inter::I3 => sum / (g.len() * h.len()) as f64,
    })
}

fn intra_distance(g: &[usize], dist: &DistanceMatrix, kind: Intra) -> Result<f64> {
    if g.len() < 2 {
        return Ok(0.0);
    }
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for (i, &x) in g.iter().enumerate() {
        for &y in &g[i + 1..] {
            let d = dist.get(x, y)?;
            max = max.max(d);
            sum += d;
        }
    }
    Ok(match kind {
        Intra::J1 => max,
        Intra::J2 => 2.0 * sum / (g.len() * (g.len() - 1)) as f64,
    })
}

/// Smallest inter-group distance over largest intra-group distance. Returns
/// `f64::INFINITY` when every intra-group distance is zero.
pub fn dunn(groups: &[Vec<usize>], dist: &DistanceMatrix, inter: Inter, intra: Intra) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::UndefinedIndex("Dunn index needs at least two groups".into()));
    }
    let mut num = f64::INFINITY;
    for (i, g) in groups.iter().enumerate() {
        for h in &groups[i + 1..] {
            num = num.min(inter_distance(g, h, dist, inter)?);
        }
    }
    let mut den = 0.0f64;
    for g in groups {
        den = den.max(intra_distance(g, dist, intra)?);
    }
    Ok(if den > 0.0 { num / den } else { f64::INFINITY })
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Hubert-Arabie adjusted Rand index.
pub fn adjusted_rand(p: &Partition, q: &Partition) -> Result<f64> {
    let lp = p.labels();
    let lq = q.labels();
    if lp.len() != lq.len() || lp.keys().ne(lq.keys()) {
        return Err(Error::ElementMismatch);
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (id, &a) in &lp {
        *table.entry((a, lq[id])).or_default() += 1;
    }
    let mut rows = vec![0u64; p.n_groups()];
    let mut cols = vec![0u64; q.n_groups()];
    for (&(a, b), &n) in &table {
        rows[a] += n;
        cols[b] += n;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let sum_a: f64 = rows.iter().map(|&n| choose2(n)).sum();
    let sum_b: f64 = cols.iter().map(|&n| choose2(n)).sum();
    let total = choose2(lp.len() as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        // both partitions trivial (all singletons or one group): agreement is perfect
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> DistanceMatrix {
        DistanceMatrix::from_pairs([((0, 1), 0.1), ((0, 2), 1.0), ((1, 2), 1.0)]).unwrap()
    }

    #[test]
    fn silhouette_hand_values() {
        let d = abc();
        assert!((silhouette(&[vec![0, 1], vec![2]], &d).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(silhouette(&[vec![0], vec![1]], &d).unwrap(), 0.0);
        assert!(matches!(silhouette(&[vec![0, 1, 2]], &d), Err(Error::UndefinedIndex(_))));
        let dup = DistanceMatrix::from_pairs([
            ((0, 1), 0.0),
            ((2, 3), 0.0),
            ((0, 2), 1.0),
            ((0, 3), 1.0),
            ((1, 2), 1.0),
            ((1, 3), 1.0),
        ])
        .unwrap();
        assert_eq!(silhouette(&[vec![0, 1], vec![2, 3]], &dup).unwrap(), 1.0);
    }

    #[test]
    fn dunn_hand_values() {
        let d = abc();
        let g = [vec![0, 1], vec![2]];
        assert!((dunn(&g, &d, Inter::I1, Intra::J1).unwrap() - 10.0).abs() < 1e-12);
        assert!((dunn(&g, &d, Inter::I3, Intra::J2).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(dunn(&[vec![0], vec![1]], &d, Inter::I1, Intra::J1).unwrap(), f64::INFINITY);
    }

    #[test]
    fn ari_basics() {
        let p = Partition::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!((adjusted_rand(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        let q = Partition::new(vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert!((adjusted_rand(&p, &q).unwrap() + 0.5).abs() < 1e-12);
        let r = Partition::new(vec![vec![0, 1, 2], vec![4]]).unwrap();
        assert!(matches!(adjusted_rand(&p, &r), Err(Error::ElementMismatch)));
    }
}
