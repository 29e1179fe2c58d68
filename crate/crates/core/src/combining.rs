//! Grouping similar curves for combination, building group representatives,
//! and completing a partial grouping into a full candidate partition.

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::indices::{ClusterIndex, DistanceMatrix};
use crate::partition::Partition;
use crate::similarity::{Curve, SimilarityMatrix};
use crate::warping::Direction;

/// Pairwise similarity values keyed by unordered id pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    values: BTreeMap<(usize, usize), f64>,
}

impl SimilarityTable {
    pub fn from_matrix(m: &SimilarityMatrix) -> Self {
        Self {
            values: m.iter().map(|(&k, e)| (k, e.rho)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = ((usize, usize), f64)>) -> Self {
        Self {
            values: pairs.into_iter().map(|((a, b), v)| ((a.min(b), a.max(b)), v)).collect(),
        }
    }

    pub fn get(&self, a: usize, b: usize) -> Result<f64> {
        if a == b {
            return Ok(1.0);
        }
        self.values
            .get(&(a.min(b), a.max(b)))
            .copied()
            .ok_or_else(|| Error::Internal(format!("no similarity for pair ({a}, {b})")))
    }

    /// Distances `max(0, 1 - rho)` for the index functions.
    pub fn distances(&self) -> DistanceMatrix {
        DistanceMatrix::from_pairs(self.values.iter().map(|(&k, &v)| (k, (1.0 - v).max(0.0))))
            .expect("table keys are distinct unordered pairs")
    }
}

/// Groups chosen for combination (each of size at least two) and the curves
/// left out, by current curve id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialClustering {
    pub groups: Vec<Vec<usize>>,
    pub unassigned: Vec<usize>,
}

/// An index evaluated against one fixed distance matrix.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub index: ClusterIndex,
    pub dist: &'a DistanceMatrix,
}

impl Scorer<'_> {
    pub fn score(&self, groups: &[Vec<usize>]) -> Result<f64> {
        self.index.evaluate(groups, self.dist)
    }
}

/// Chooses groups of mutually similar curves (`rho > c_star`). Conflicts,
/// where a member is also similar to curves the rest of the group is not, are
/// settled by comparing the index `nu` of the two competing two-group
/// splits; `nu` must be built from the same (current) similarities.
pub fn assign_groups(ids: &[usize], sims: &SimilarityTable, c_star: f64, nu: Scorer<'_>) -> Result<PartialClustering> {
    let mut ids: Vec<usize> = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let similar = |a: usize, b: usize| -> Result<bool> { Ok(a == b || sims.get(a, b)? > c_star) };

    let mut strength = BTreeMap::new();
    for &a in &ids {
        let mut s = 0.0;
        for &b in &ids {
            if a != b {
                let r = sims.get(a, b)?;
                if r > c_star {
                    s += r;
                }
            }
        }
        strength.insert(a, s);
    }
    let mut order = ids.clone();
    order.sort_by(|a, b| strength[b].total_cmp(&strength[a]).then(a.cmp(b)));

    let mut remaining: BTreeSet<usize> = ids.iter().copied().collect();
    let mut groups = Vec::new();
    let mut unassigned = Vec::new();

    while let Some(&seed) = order.iter().find(|i| remaining.contains(i)) {
        let mut candidates = Vec::new();
        for &i in &order {
            if i != seed && remaining.contains(&i) && sims.get(seed, i)? > c_star {
                candidates.push((i, sims.get(seed, i)?));
            }
        }
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut g0 = vec![seed];
        for (c, _) in candidates {
            let mut ok = true;
            for &m in &g0 {
                if !similar(c, m)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                g0.push(c);
            }
        }

        let outside_similar = |g0: &[usize], f: usize| -> Result<Vec<usize>> {
            let mut out = Vec::new();
            for &s in &remaining {
                if !g0.contains(&s) && s != f && sims.get(f, s)? > c_star {
                    out.push(s);
                }
            }
            Ok(out)
        };
        let mut conflict = false;
        for &f in &g0 {
            if !outside_similar(&g0, f)?.is_empty() {
                conflict = true;
                break;
            }
        }
        if conflict {
            for f in g0.clone() {
                if g0.len() < 2 {
                    break;
                }
                let mut d = Vec::new();
                for s in outside_similar(&g0, f)? {
                    let mut all = true;
                    for &m in &g0 {
                        if !similar(s, m)? {
                            all = false;
                            break;
                        }
                    }
                    if !all {
                        d.push(s);
                    }
                }
                if d.is_empty() {
                    continue;
                }
                let mut s_star = d[0];
                for &s in &d[1..] {
                    let (r, best) = (sims.get(f, s)?, sims.get(f, s_star)?);
                    if r > best || (r == best && s < s_star) {
                        s_star = s;
                    }
                }
                let rest: Vec<usize> = g0.iter().copied().filter(|&m| m != f).collect();
                let keep = nu.score(&[g0.clone(), vec![s_star]])?;
                let moved = nu.score(&[vec![f, s_star], rest.clone()])?;
                if !(keep > moved) {
                    g0 = rest;
                }
            }
        }

        // the retention pass never empties g0, so every round removes at least
        // one curve; a seed dropped by it goes back into the sequence
        for &m in &g0 {
            remaining.remove(&m);
        }
        match g0.len() {
            0 => {}
            1 => unassigned.push(g0[0]),
            _ => groups.push(g0),
        }
    }
    unassigned.sort_unstable();
    Ok(PartialClustering { groups, unassigned })
}

/// Representative of a group: members are warped onto the member with the
/// highest mean similarity to the rest and fitted jointly, each member
/// weighted by the number of original curves it stands for. The result
/// takes the smallest member id.
pub fn combine_group(group: &[&Curve], matrix: &SimilarityMatrix, domain: &Domain) -> Result<Curve> {
    if group.len() < 2 {
        return Err(Error::InvalidParameter("a combined group needs at least two curves".into()));
    }
    let mut members: Vec<&Curve> = group.to_vec();
    members.sort_by_key(|c| c.id());
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in members.iter().enumerate() {
        let mut s = 0.0;
        for o in &members {
            if o.id() != c.id() {
                s += matrix
                    .rho(c.id(), o.id())
                    .ok_or_else(|| Error::Internal(format!("no similarity for ({}, {})", c.id(), o.id())))?;
            }
        }
        let mean = s / (members.len() - 1) as f64;
        if best.is_none_or(|(_, b)| mean > b) {
            best = Some((i, mean));
        }
    }
    let reference = members[best.map(|b| b.0).unwrap_or(0)];

    // pooled weighted least squares on a shared grid equals the fit of the
    // weighted pointwise average
    let mut sum = vec![0.0; domain.len()];
    let mut total = 0.0;
    for c in &members {
        let w = c.n_orig() as f64;
        let values = if c.id() == reference.id() {
            c.samples().to_vec()
        } else {
            let psi = matrix.warp_aligning(reference.id(), c.id())?;
            c.spline().eval_many(psi.on_grid(Direction::Forward))
        };
        for (s, v) in sum.iter_mut().zip(&values) {
            *s += w * v;
        }
        total += w;
    }
    sum.iter_mut().for_each(|v| *v /= total);
    let spline = domain.fit_shape(&sum)?;
    let ids: BTreeSet<usize> = members.iter().flat_map(|c| c.members().iter().copied()).collect();
    Curve::from_spline(members[0].id(), spline, ids, domain)
}

fn with_added(groups: &[Vec<usize>], k: usize, item: &[usize]) -> Vec<Vec<usize>> {
    let mut g = groups.to_vec();
    if k == g.len() {
        g.push(item.to_vec());
    } else {
        g[k].extend_from_slice(item);
    }
    g
}

/// Completes groups of original ids by placing every remaining item (a set
/// of original ids), scoring with `nu0`. Items are placed in the given order:
/// an item joins the group whose enlargement scores best, unless starting a
/// new group scores at least as well; if nothing joins in a sweep, the item
/// that scores best on its own opens a new group.
pub fn cluster_1(groups: Vec<Vec<usize>>, unassigned: Vec<Vec<usize>>, nu0: Scorer<'_>) -> Result<Partition> {
    let mut groups = groups;
    let mut s = unassigned;
    while !s.is_empty() {
        let mut i = 0;
        while i < s.len() {
            let p = groups.len();
            let mut best_k = p;
            let mut best = nu0.score(&with_added(&groups, p, &s[i]))?;
            for k in 0..p {
                let v = nu0.score(&with_added(&groups, k, &s[i]))?;
                if v > best {
                    best = v;
                    best_k = k;
                }
            }
            if best_k < p {
                let item = s.remove(i);
                groups[best_k].extend(item);
            } else {
                i += 1;
            }
        }
        if s.is_empty() {
            break;
        }
        let p = groups.len();
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, h) in s.iter().enumerate() {
            let v = nu0.score(&with_added(&groups, p, h))?;
            if v > best {
                best = v;
                best_i = i;
            }
        }
        groups.push(s.remove(best_i));
    }
    Partition::new(groups)
}

/// Turns the partial grouping of one combination step into a full partition
/// of the original ids. `sims` are the current similarities (used for the
/// "similar" tests), `nu0` scores on the original curves, and `members` maps
/// each current curve id to the original ids it stands for.
pub fn candidate_result(
    partial: &PartialClustering,
    members: &BTreeMap<usize, Vec<usize>>,
    sims: &SimilarityTable,
    c_star: f64,
    nu0: Scorer<'_>,
) -> Result<Partition> {
    let expand = |id: usize| -> Result<Vec<usize>> {
        members
            .get(&id)
            .cloned()
            .ok_or_else(|| Error::Internal(format!("no members recorded for curve {id}")))
    };
    let expand_group = |g: &[usize]| -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for &id in g {
            out.extend(expand(id)?);
        }
        Ok(out)
    };
    let groups: Vec<Vec<usize>> = partial.groups.iter().map(|g| expand_group(g)).collect::<Result<_>>()?;
    let mut s0 = partial.unassigned.clone();
    s0.sort_unstable();
    let items: Vec<Vec<usize>> = s0.iter().map(|&id| expand(id)).collect::<Result<_>>()?;
    let (p0, q0) = (groups.len(), s0.len());

    match (p0, q0) {
        (_, 0) if p0 >= 1 => Partition::new(groups),
        (0, 0) => Err(Error::Internal("nothing to cluster".into())),
        (0, 1) => Partition::new(items),
        (p, _) if p >= 2 => cluster_1(groups, items, nu0),
        (0, 2) => {
            if sims.get(s0[0], s0[1])? > c_star {
                Partition::new(vec![items.concat()])
            } else {
                Partition::new(items)
            }
        }
        (0, _) => {
            let mut first = 0;
            let mut best = f64::NEG_INFINITY;
            for (i, &a) in s0.iter().enumerate() {
                let mut total = 0.0;
                for &b in &s0 {
                    total += sims.get(a, b)?;
                }
                if total > best {
                    best = total;
                    first = i;
                }
            }
            // two singletons score alike under both indices, so ties go to the
            // curve least similar to the first seed
            let mut second = None;
            let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (i, item) in items.iter().enumerate() {
                if i == first {
                    continue;
                }
                let v = nu0.score(&[items[first].clone(), item.clone()])?;
                let key = (v, -sims.get(s0[first], s0[i])?);
                if second.is_none() || key.0 > best.0 || (key.0 == best.0 && key.1 > best.1) {
                    best = key;
                    second = Some(i);
                }
            }
            let second = second.expect("at least three unassigned curves");
            let rest = items
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != first && *i != second)
                .map(|(_, v)| v.clone())
                .collect();
            cluster_1(vec![items[first].clone(), items[second].clone()], rest, nu0)
        }
        (1, 1) => {
            let g1 = &partial.groups[0];
            let kappa0 = nu0.score(&[groups[0].clone(), items[0].clone()])?;
            let mut joined = false;
            for &f in g1 {
                let fi = expand(f)?;
                let mut others = items[0].clone();
                for &h in g1 {
                    if h != f {
                        others.extend(expand(h)?);
                    }
                }
                if nu0.score(&[others, fi])? > kappa0 {
                    joined = true;
                    break;
                }
            }
            if joined {
                Partition::new(vec![[groups[0].clone(), items[0].clone()].concat()])
            } else {
                Partition::new(vec![groups[0].clone(), items[0].clone()])
            }
        }
        _ => {
            // one group and several leftovers: open a second group with the
            // leftover that best separates from the first, then place the rest
            let mut best_i = 0;
            let mut best = f64::NEG_INFINITY;
            for (i, item) in items.iter().enumerate() {
                let v = nu0.score(&[groups[0].clone(), item.clone()])?;
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            let mut rest = items;
            let seed = rest.remove(best_i);
            cluster_1(vec![groups[0].clone(), seed], rest, nu0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indices::{Inter, Intra};

    fn table(pairs: &[((usize, usize), f64)]) -> SimilarityTable {
        SimilarityTable::from_pairs(pairs.iter().copied())
    }

    fn sil(d: &DistanceMatrix) -> Scorer<'_> {
        Scorer {
            index: ClusterIndex::Silhouette,
            dist: d,
        }
    }

    #[test]
    fn all_similar_or_none() {
        let t = table(&[((0, 1), 0.9), ((0, 2), 0.8), ((1, 2), 0.95)]);
        let d = t.distances();
        let p = assign_groups(&[0, 1, 2], &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups.len(), 1);
        assert_eq!(p.groups[0].iter().copied().collect::<BTreeSet<_>>(), BTreeSet::from([0, 1, 2]));
        assert!(p.unassigned.is_empty());
        let p = assign_groups(&[0, 1, 2], &t, 0.99, sil(&d)).unwrap();
        assert!(p.groups.is_empty());
        assert_eq!(p.unassigned, vec![0, 1, 2]);
    }

    #[test]
    fn conflict_hand_trace() {
        // seed 0 (similar to both), 1 admitted, 2 blocked by rho(1, 2);
        // keeping 0 with 1 scores 0.4028 against 0.1597 for moving it to 2
        let t = table(&[((0, 1), 0.9), ((0, 2), 0.85), ((1, 2), 0.2)]);
        let d = t.distances();
        let p = assign_groups(&[0, 1, 2], &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups, vec![vec![0, 1]]);
        assert_eq!(p.unassigned, vec![2]);
    }

    #[test]
    fn conflict_under_dunn() {
        // dunn(I1, J1): keep -> min(d02, d12)/d01, move -> min(d01, d12)/d02
        let t = table(&[((0, 1), 0.9), ((0, 2), 0.89), ((1, 2), 0.0)]);
        let d = t.distances();
        let nu = Scorer {
            index: ClusterIndex::Dunn {
                inter: Inter::I1,
                intra: Intra::J1,
            },
            dist: &d,
        };
        // keep: 0.11 / 0.1 = 1.1; move: 0.1 / 0.11 = 0.909 -> 0 stays
        let p = assign_groups(&[0, 1, 2], &t, 0.5, nu).unwrap();
        assert_eq!(p.groups, vec![vec![0, 1]]);
    }

    fn two_blocks() -> (SimilarityTable, DistanceMatrix) {
        // {0,1} and {2,3} tight, 4 near the first block
        let mut pairs = vec![((0, 1), 0.95), ((2, 3), 0.95)];
        for a in [0, 1] {
            for b in [2, 3] {
                pairs.push(((a, b), 0.1));
            }
        }
        pairs.extend([((0, 4), 0.8), ((1, 4), 0.8), ((2, 4), 0.1), ((3, 4), 0.1)]);
        let t = table(&pairs);
        let d = t.distances();
        (t, d)
    }

    #[test]
    fn cluster_1_attaches_near_curve() {
        let (_, d) = two_blocks();
        let p = cluster_1(vec![vec![0, 1], vec![2, 3]], vec![vec![4]], sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1, 4], vec![2, 3]]);
        assert_eq!(cluster_1(vec![vec![0, 1], vec![2, 3]], vec![], sil(&d)).unwrap().n_groups(), 2);
    }

    #[test]
    fn cluster_1_isolates_outlier() {
        let mut pairs = vec![((0, 1), 0.95), ((2, 3), 0.95)];
        for a in [0, 1] {
            for b in [2, 3] {
                pairs.push(((a, b), 0.1));
            }
        }
        for a in 0..4 {
            pairs.push(((a, 4), 0.0));
        }
        let d = table(&pairs).distances();
        let p = cluster_1(vec![vec![0, 1], vec![2, 3]], vec![vec![4]], sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn candidate_special_cases() {
        let (t, d) = two_blocks();
        let members: BTreeMap<usize, Vec<usize>> = (0..5).map(|i| (i, vec![i])).collect();
        let one = PartialClustering {
            groups: vec![vec![0, 1]],
            unassigned: vec![],
        };
        assert_eq!(candidate_result(&one, &members, &t, 0.5, sil(&d)).unwrap().groups(), &[vec![0, 1]]);
        let pair = PartialClustering {
            groups: vec![],
            unassigned: vec![0, 1],
        };
        assert_eq!(candidate_result(&pair, &members, &t, 0.5, sil(&d)).unwrap().n_groups(), 1);
        assert_eq!(candidate_result(&pair, &members, &t, 0.99, sil(&d)).unwrap().n_groups(), 2);

        // one group, one far curve: no split beats keeping it apart
        let far = PartialClustering {
            groups: vec![vec![0, 1]],
            unassigned: vec![2],
        };
        let p = candidate_result(&far, &members, &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1], vec![2]]);

        let loose = PartialClustering {
            groups: vec![],
            unassigned: vec![0, 1, 2, 3, 4],
        };
        let p = candidate_result(&loose, &members, &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1, 4], vec![2, 3]]);

        let one_plus = PartialClustering {
            groups: vec![vec![0, 1]],
            unassigned: vec![2, 3, 4],
        };
        let p = candidate_result(&one_plus, &members, &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1, 4], vec![2, 3]]);
    }

    #[test]
    fn members_are_expanded() {
        let (t, d) = two_blocks();
        let mut members: BTreeMap<usize, Vec<usize>> = (0..5).map(|i| (i, vec![i])).collect();
        members.insert(0, vec![0, 10, 11]);
        let partial = PartialClustering {
            groups: vec![vec![0, 1]],
            unassigned: vec![],
        };
        let p = candidate_result(&partial, &members, &t, 0.5, sil(&d)).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1, 10, 11]]);
    }
}
