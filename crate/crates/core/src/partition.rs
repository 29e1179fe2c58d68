use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grouping of ids into nonempty disjoint groups. Stored canonically: ids
/// ascending within a group, groups ordered by their smallest id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Partition {
    groups: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut canon = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() {
                return Err(Error::Input("empty group in partition".into()));
            }
            let mut g = g;
            g.sort_unstable();
            for &id in &g {
                if !seen.insert(id) {
                    return Err(Error::Input(format!("id {id} appears in more than one group")));
                }
            }
            canon.push(g);
        }
        if canon.is_empty() {
            return Err(Error::Input("partition has no groups".into()));
        }
        canon.sort();
        Ok(Self { groups: canon })
    }

    /// Groups from one label per id.
    pub fn from_labels<L: Ord>(pairs: impl IntoIterator<Item = (usize, L)>) -> Result<Self> {
        let mut by_label: std::collections::BTreeMap<L, Vec<usize>> = Default::default();
        for (id, l) in pairs {
            by_label.entry(l).or_default().push(id);
        }
        Self::new(by_label.into_values().collect())
    }

    pub fn singletons(ids: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(ids.into_iter().map(|i| vec![i]).collect())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn ids(&self) -> BTreeSet<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    /// Group index of every id.
    pub fn labels(&self) -> std::collections::BTreeMap<usize, usize> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(k, g)| g.iter().map(move |&id| (id, k)))
            .collect()
    }
}

impl TryFrom<Vec<Vec<usize>>> for Partition {
    type Error = Error;

    fn try_from(groups: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(groups)
    }
}

impl From<Partition> for Vec<Vec<usize>> {
    fn from(p: Partition) -> Self {
        p.groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let p = Partition::new(vec![vec![5, 3], vec![1], vec![4, 2]]).unwrap();
        assert_eq!(p.groups(), &[vec![1], vec![2, 4], vec![3, 5]]);
        let q = Partition::from_labels([(1, "x"), (2, "b"), (4, "b"), (3, "z"), (5, "z")]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_overlap_and_empty() {
        assert!(Partition::new(vec![vec![1, 2], vec![2]]).is_err());
        assert!(Partition::new(vec![vec![1], vec![]]).is_err());
        assert!(Partition::new(vec![]).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let p = Partition::new(vec![vec![2, 0], vec![1]]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0,2],[1]]");
        assert_eq!(serde_json::from_str::<Partition>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Partition>("[[0,1],[1]]").is_err());
    }
}
