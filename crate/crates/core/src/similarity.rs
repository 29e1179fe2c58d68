//! Curves, the centered inner product and correlation, the penalised warping
//! similarity `rho`, and pairwise similarity matrices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::spline::SplineRep;
use crate::warping::{optimize_warping, Direction, OptimizerSettings, Warping};

/// Relative seminorm below which a curve counts as constant.
const DEGENERATE_NORM: f64 = 1e-12;

/// A functional observation: samples on the shared grid plus the shape spline
/// they were evaluated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    id: usize,
    samples: Vec<f64>,
    spline: SplineRep,
    members: BTreeSet<usize>,
}

impl Curve {
    /// A curve built from an already fitted shape spline.
    pub fn from_spline(id: usize, spline: SplineRep, members: BTreeSet<usize>, domain: &Domain) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Internal(format!("curve {id} has no members")));
        }
        let samples = spline.evaluate(domain.grid());
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("curve {id} has non-finite values")));
        }
        Ok(Self {
            id,
            samples,
            spline,
            members,
        })
    }

    /// Smooths values given on the domain grid with the shape spline space.
    /// The new curve stands for the single original curve `id`.
    pub fn from_grid_values(id: usize, values: &[f64], domain: &Domain) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Input(format!(
                "curve {id}: {} values for a grid of {}",
                values.len(),
                domain.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("curve {id} has non-finite values")));
        }
        let spline = domain.fit_shape(values)?;
        Self::from_spline(id, spline, BTreeSet::from([id]), domain)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn spline(&self) -> &SplineRep {
        &self.spline
    }

    /// Original curves this curve aggregates.
    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    /// Number of original curves this curve aggregates.
    pub fn n_orig(&self) -> usize {
        self.members.len()
    }

    /// Centered L2 seminorm.
    pub fn norm(&self, domain: &Domain) -> f64 {
        center_inner(&self.samples, &self.samples, domain).max(0.0).sqrt()
    }

    pub fn ensure_nonconstant(&self, domain: &Domain) -> Result<()> {
        let scale = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if self.norm(domain) <= DEGENERATE_NORM * scale.max(1.0) {
            return Err(Error::DegenerateCurve(self.id.to_string()));
        }
        Ok(())
    }

    /// The curve rescaled to unit seminorm.
    pub fn normalized(&self, domain: &Domain) -> Result<Self> {
        self.ensure_nonconstant(domain)?;
        let factor = 1.0 / self.norm(domain);
        Ok(Self {
            id: self.id,
            samples: self.samples.iter().map(|v| v * factor).collect(),
            spline: self.spline.scaled(factor),
            members: self.members.clone(),
        })
    }

    /// Same shape, new id and membership.
    pub fn relabeled(&self, id: usize, members: BTreeSet<usize>) -> Self {
        Self {
            id,
            members,
            ..self.clone()
        }
    }

    /// Hash of the sample values, used to key cached similarities.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for v in &self.samples {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

fn weighted_mean(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>()
}

/// `int (f - Ef)(g - Eg)` by the trapezoid rule on the domain grid.
pub fn center_inner(f: &[f64], g: &[f64], domain: &Domain) -> f64 {
    let w = domain.weights();
    let mf = weighted_mean(f, w);
    let mg = weighted_mean(g, w);
    f.iter()
        .zip(g)
        .zip(w)
        .map(|((a, b), c)| c * (a - mf) * (b - mg))
        .sum()
}

/// Correlation-type similarity `<f, g> / (|f| |g|)`.
pub fn corr(f: &[f64], g: &[f64], domain: &Domain) -> Result<f64> {
    let fg = center_inner(f, g, domain);
    let ff = center_inner(f, f, domain);
    let gg = center_inner(g, g, domain);
    if !(ff > 0.0 && gg > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((fg / (ff.sqrt() * gg.sqrt())).clamp(-1.0, 1.0))
}

/// Components of `rho(f, g | psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoParts {
    pub rho: f64,
    pub r_fwd: f64,
    pub r_inv: f64,
    pub penalty_fwd: f64,
    pub penalty_inv: f64,
}

/// `((r(f, g o psi) - l0 P(psi)) + (r(g, f o psi^-1) - l0 P(psi^-1))) / 2`.
pub fn rho_given_psi(f: &Curve, g: &Curve, psi: &Warping, lambda0: f64, domain: &Domain) -> Result<RhoParts> {
    let fwd = psi.forward().eval_many(domain.points());
    if let Some(bad) = fwd.iter().find(|v| !(**v >= -1e-9 && **v <= 1.0 + 1e-9)) {
        return Err(Error::Range(*bad));
    }
    let g_warped = g.spline().eval_many(psi.on_grid(Direction::Forward));
    let f_warped = f.spline().eval_many(psi.on_grid(Direction::Inverse));
    let r_fwd = corr(f.samples(), &g_warped, domain)?;
    let r_inv = corr(g.samples(), &f_warped, domain)?;
    let penalty_fwd = psi.roughness_penalty(Direction::Forward, domain);
    let penalty_inv = psi.roughness_penalty(Direction::Inverse, domain);
    let rho = 0.5 * ((r_fwd - lambda0 * penalty_fwd) + (r_inv - lambda0 * penalty_inv));
    Ok(RhoParts {
        rho,
        r_fwd,
        r_inv,
        penalty_fwd,
        penalty_inv,
    })
}

/// Cached similarity of an ordered pair: `warp` aligns the first curve to the
/// second, i.e. `second o warp` matches `first`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityEntry {
    pub rho: f64,
    pub warp: Warping,
    pub penalty_fwd: f64,
    pub penalty_inv: f64,
    pub r_fwd: f64,
    pub r_inv: f64,
}

/// `rho(f, g)`, maximised over warps, with the maximising warp.
pub fn similarity(f: &Curve, g: &Curve, lambda0: f64, opts: &OptimizerSettings, domain: &Domain) -> Result<SimilarityEntry> {
    let (warp, _) = optimize_warping(f, g, lambda0, opts, domain)?;
    let p = rho_given_psi(f, g, &warp, lambda0, domain)?;
    Ok(SimilarityEntry {
        rho: p.rho,
        warp,
        penalty_fwd: p.penalty_fwd,
        penalty_inv: p.penalty_inv,
        r_fwd: p.r_fwd,
        r_inv: p.r_inv,
    })
}

/// Similarities for every unordered pair of a set of curves. One entry is
/// stored per pair, keyed by `(smaller id, larger id)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<usize>,
    entries: BTreeMap<(usize, usize), SimilarityEntry>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl SimilarityMatrix {
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&SimilarityEntry> {
        self.entries.get(&key(a, b))
    }

    /// `rho(a, b)`; 1 on the diagonal.
    pub fn rho(&self, a: usize, b: usize) -> Option<f64> {
        if a == b {
            return self.ids.binary_search(&a).ok().map(|_| 1.0);
        }
        self.get(a, b).map(|e| e.rho)
    }

    /// Warp `psi` with `curve_b o psi` matching `curve_a`.
    pub fn warp_aligning(&self, a: usize, b: usize) -> Result<Warping> {
        let e = self
            .get(a, b)
            .ok_or_else(|| Error::Internal(format!("no cached warp for pair ({a}, {b})")))?;
        Ok(if a < b { e.warp.clone() } else { e.warp.swapped() })
    }

    /// Entries in ascending pair order.
    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &SimilarityEntry)> {
        self.entries.iter()
    }

    /// Off-diagonal similarity values in ascending pair order.
    pub fn values(&self) -> Vec<f64> {
        self.entries.values().map(|e| e.rho).collect()
    }

    pub fn mean_rho(&self) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        self.entries.values().map(|e| e.rho).sum::<f64>() / self.entries.len() as f64
    }
}

/// Reuses pair similarities of curves whose samples did not change.
#[derive(Debug, Default, Clone)]
pub struct SimilarityCache {
    entries: HashMap<(u64, u64), SimilarityEntry>,
}

impl SimilarityCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Records the entries of a matrix computed for `curves`.
    pub fn insert_matrix(&mut self, curves: &[Curve], matrix: &SimilarityMatrix) {
        let prints: BTreeMap<usize, u64> = curves.iter().map(|c| (c.id(), c.fingerprint())).collect();
        for (&(a, b), e) in matrix.iter() {
            if let (Some(&pa), Some(&pb)) = (prints.get(&a), prints.get(&b)) {
                self.entries.insert((pa, pb), e.clone());
            }
        }
    }
}

/// Computes `rho` for every unordered pair of `curves`.
pub fn similarity_matrix(
    curves: &[Curve],
    lambda0: f64,
    opts: &OptimizerSettings,
    domain: &Domain,
) -> Result<SimilarityMatrix> {
    similarity_matrix_cached(curves, lambda0, opts, domain, &mut SimilarityCache::new())
}

/// As [`similarity_matrix`], consulting and filling `cache`.
pub fn similarity_matrix_cached(
    curves: &[Curve],
    lambda0: f64,
    opts: &OptimizerSettings,
    domain: &Domain,
    cache: &mut SimilarityCache,
) -> Result<SimilarityMatrix> {
    if curves.len() < 2 {
        return Err(Error::Input("need at least two curves".into()));
    }
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.id());
    if sorted.windows(2).any(|w| w[0].id() == w[1].id()) {
        return Err(Error::Input("duplicate curve ids".into()));
    }
    let prints: Vec<u64> = sorted.iter().map(|c| c.fingerprint()).collect();
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push((i, j));
        }
    }
    let missing: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| !cache.entries.contains_key(&(prints[i], prints[j])))
        .collect();
    let computed: Vec<((u64, u64), SimilarityEntry)> = missing
        .par_iter()
        .map(|&(i, j)| {
            similarity(sorted[i], sorted[j], lambda0, opts, domain).map(|e| ((prints[i], prints[j]), e))
        })
        .collect::<Result<_>>()?;
    cache.entries.extend(computed);

    let entries = pairs
        .iter()
        .map(|&(i, j)| {
            let e = cache.entries[&(prints[i], prints[j])].clone();
            ((sorted[i].id(), sorted[j].id()), e)
        })
        .collect();
    Ok(SimilarityMatrix {
        ids: sorted.iter().map(|c| c.id()).collect(),
        entries,
    })
}
