//! The iterative clustering driver: for each combination threshold, alternate
//! combining similar curves and updating curves toward their neighbours,
//! record a candidate partition whenever curves were combined, and finally
//! keep the candidate with the best index on the original curves.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::combining::{assign_groups, candidate_result, combine_group, Scorer, SimilarityTable};
use crate::domain::{Domain, SplineSettings};
use crate::error::{Error, Result};
use crate::indices::{ClusterIndex, DistanceMatrix};
use crate::io::CurveSet;
use crate::partition::Partition;
use crate::similarity::{similarity_matrix_cached, Curve, SimilarityCache, SimilarityMatrix};
use crate::spline::{equally_spaced_knots, Projector};
use crate::updating::{compute_tau, update_all};
use crate::warping::OptimizerSettings;

/// Similarities at or above this count as "equal to one" and are left out of
/// quantiles and the weight exponent.
const ONE_TOL: f64 = 1e-9;

/// Number of points at which warps are reported.
pub const WARP_REPORT_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda0: f64,
    /// Thresholds sit near the `1 - quantile_a` quantile of the original
    /// similarities.
    pub quantile_a: f64,
    pub threshold_offsets: [f64; 4],
    pub index: ClusterIndex,
    pub grid_size: usize,
    pub max_iterations: usize,
    pub stability_tol: f64,
    pub optimizer: OptimizerSettings,
    pub splines: SplineSettings,
    /// Recorded in results; the procedure itself draws no random numbers.
    pub seed: u64,
    pub report_warps: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda0: 0.0,
            quantile_a: 0.25,
            threshold_offsets: std::array::from_fn(|i| -0.01 + 0.01 * i as f64 / 3.0),
            index: ClusterIndex::Silhouette,
            grid_size: 500,
            max_iterations: 10,
            stability_tol: 1e-3,
            optimizer: OptimizerSettings::default(),
            splines: SplineSettings::default(),
            seed: 0,
            report_warps: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return Err(Error::Config(format!("lambda0 must be nonnegative, got {}", self.lambda0)));
        }
        if !(self.quantile_a > 0.0 && self.quantile_a < 1.0) {
            return Err(Error::Config(format!("quantile a must lie in (0, 1), got {}", self.quantile_a)));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max iterations must be at least 1".into()));
        }
        if self.grid_size < 50 {
            return Err(Error::Config(format!("grid size must be at least 50, got {}", self.grid_size)));
        }
        if !(self.stability_tol.is_finite() && self.stability_tol >= 0.0) {
            return Err(Error::Config("stability tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

fn below_one(v: f64) -> bool {
    v.is_finite() && v < 1.0 - ONE_TOL
}

/// Linear-interpolation sample quantile.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// The four combination thresholds `q + offset`, `q` the `1 - a` quantile of
/// the similarities below one.
pub fn threshold_set(original_sims: &[f64], a: f64, offsets: &[f64; 4]) -> Result<[f64; 4]> {
    let mut v: Vec<f64> = original_sims.iter().copied().filter(|&x| below_one(x)).collect();
    if v.is_empty() {
        return Err(Error::DegenerateData("all similarities equal one".into()));
    }
    v.sort_by(f64::total_cmp);
    let q = quantile(&v, 1.0 - a);
    Ok(offsets.map(|o| q + o))
}

/// A candidate partition with its index on the original curves (`None` when
/// the index is undefined, e.g. a single group).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub threshold: f64,
    pub iteration: usize,
    pub partition: Partition,
    pub nu0: Option<f64>,
}

impl Candidate {
    fn score(&self) -> f64 {
        self.nu0.unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub curves_before: usize,
    pub groups_combined: usize,
    pub curves_after: usize,
    pub mean_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRun {
    pub threshold: f64,
    pub iterations: usize,
    pub candidates: Vec<Candidate>,
    pub log: Vec<IterationLog>,
}

/// Everything computed once per run and shared by all thresholds.
pub struct Prepared {
    pub domain: Domain,
    pub curves: Vec<Curve>,
    pub original: SimilarityMatrix,
    pub distances: DistanceMatrix,
    pub tau: f64,
}

/// Smooths the raw curves onto the working grid, normalises them, and
/// computes the original similarity matrix.
pub fn prepare(set: &CurveSet, config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    if set.curves.len() < 2 {
        return Err(Error::Input("need at least two curves".into()));
    }
    let domain = Domain::with_settings(crate::spline::TimeGrid::uniform(config.grid_size)?, config.splines.clone())?;
    let knots = equally_spaced_knots(config.splines.shape_knots);
    let smoother = Projector::new(&set.unit_grid(), config.splines.shape_degree, &knots)?;
    let curves = set
        .curves
        .iter()
        .map(|(id, raw)| {
            let s = smoother.fit(raw)?;
            let c = Curve::from_grid_values(*id, &s.evaluate(domain.grid()), &domain)?;
            c.normalized(&domain)
        })
        .collect::<Result<Vec<_>>>()?;
    let original = similarity_matrix_cached(&curves, config.lambda0, &config.optimizer, &domain, &mut SimilarityCache::new())?;
    let tau = compute_tau(&original.values()).map_err(|_| Error::DegenerateData("all similarities equal one".into()))?;
    let distances = DistanceMatrix::from_similarities(&original);
    Ok(Prepared {
        domain,
        curves,
        original,
        distances,
        tau,
    })
}

fn score_partition(p: &Partition, nu0: Scorer<'_>) -> Result<Option<f64>> {
    if p.n_groups() < 2 {
        return Ok(None);
    }
    nu0.score(p.groups()).map(Some)
}

/// Runs the combine/update loop for one threshold.
pub fn run_single_threshold(prep: &Prepared, c_star: f64, config: &RunConfig) -> Result<ThresholdRun> {
    let domain = &prep.domain;
    let nu0 = Scorer {
        index: config.index,
        dist: &prep.distances,
    };
    let mut cache = SimilarityCache::new();
    cache.insert_matrix(&prep.curves, &prep.original);
    let mut curves = prep.curves.clone();
    let mut matrix = prep.original.clone();
    let mut prev_mean = matrix.mean_rho();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut log = Vec::new();
    let mut iterations = 0;

    for it in 1..=config.max_iterations {
        iterations = it;
        let before = curves.len();
        let sims = SimilarityTable::from_matrix(&matrix);
        let dist = sims.distances();
        let nu = Scorer {
            index: config.index,
            dist: &dist,
        };
        let ids: Vec<usize> = curves.iter().map(Curve::id).collect();
        let partial = assign_groups(&ids, &sims, c_star, nu)?;
        let combined = partial.groups.len();

        if combined > 0 {
            let members: BTreeMap<usize, Vec<usize>> =
                curves.iter().map(|c| (c.id(), c.members().iter().copied().collect())).collect();
            let partition = candidate_result(&partial, &members, &sims, c_star, nu0)?;
            if !candidates.iter().any(|c| c.partition == partition) {
                let nu0_value = score_partition(&partition, nu0)?;
                candidates.push(Candidate {
                    threshold: c_star,
                    iteration: it,
                    partition,
                    nu0: nu0_value,
                });
            }
            let by_id: BTreeMap<usize, &Curve> = curves.iter().map(|c| (c.id(), c)).collect();
            let mut next = Vec::with_capacity(curves.len());
            for g in &partial.groups {
                let group: Vec<&Curve> = g.iter().map(|id| by_id[id]).collect();
                next.push(combine_group(&group, &matrix, domain)?.normalized(domain)?);
            }
            for id in &partial.unassigned {
                next.push(by_id[id].clone());
            }
            next.sort_by_key(Curve::id);
            curves = next;
        }
        if curves.len() < 2 {
            log.push(IterationLog {
                iteration: it,
                curves_before: before,
                groups_combined: combined,
                curves_after: curves.len(),
                mean_rho: 1.0,
            });
            break;
        }
        if combined > 0 {
            matrix = similarity_matrix_cached(&curves, config.lambda0, &config.optimizer, domain, &mut cache)?;
        }
        curves = update_all(&curves, &matrix, prep.tau, domain)?;
        matrix = similarity_matrix_cached(&curves, config.lambda0, &config.optimizer, domain, &mut cache)?;
        let mean = matrix.mean_rho();
        log.push(IterationLog {
            iteration: it,
            curves_before: before,
            groups_combined: combined,
            curves_after: curves.len(),
            mean_rho: mean,
        });
        if (mean - prev_mean).abs() < config.stability_tol {
            break;
        }
        prev_mean = mean;
    }

    if candidates.is_empty() {
        let partition = Partition::singletons(prep.curves.iter().map(Curve::id))?;
        let nu0_value = score_partition(&partition, nu0)?;
        candidates.push(Candidate {
            threshold: c_star,
            iteration: 0,
            partition,
            nu0: nu0_value,
        });
    }
    Ok(ThresholdRun {
        threshold: c_star,
        iterations,
        candidates,
        log,
    })
}

/// Picks the best candidate: highest index, then fewer groups, then the
/// smaller threshold, then the earlier candidate.
pub fn select<'a>(candidates: impl IntoIterator<Item = &'a Candidate>) -> Option<&'a Candidate> {
    let mut best: Option<&Candidate> = None;
    for c in candidates {
        let better = match best {
            None => true,
            Some(b) => {
                c.score() > b.score()
                    || (c.score() == b.score()
                        && (c.partition.n_groups() < b.partition.n_groups()
                            || (c.partition.n_groups() == b.partition.n_groups() && c.threshold < b.threshold)))
            }
        };
        if better {
            best = Some(c);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub partition: Partition,
    pub threshold: f64,
    pub index_name: String,
    pub index_value: Option<f64>,
    pub iterations: usize,
    pub lambda0: f64,
    pub seed: u64,
    pub thresholds: Vec<f64>,
    pub candidates: Vec<Candidate>,
    pub runs: Vec<ThresholdRun>,
    /// Per original curve, the warp aligning it to its group's reference
    /// curve, as `(t, psi(t))` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warps: Option<BTreeMap<usize, Vec<(f64, f64)>>>,
}

/// For each group of the final partition, the member with the highest mean
/// original similarity to the others is the reference; every member is
/// reported with the warp that aligns it to the reference.
fn group_warps(p: &Partition, prep: &Prepared) -> Result<BTreeMap<usize, Vec<(f64, f64)>>> {
    let ts: Vec<f64> = (0..WARP_REPORT_POINTS).map(|i| i as f64 / (WARP_REPORT_POINTS - 1) as f64).collect();
    let identity: Vec<(f64, f64)> = ts.iter().map(|&t| (t, t)).collect();
    let mut out = BTreeMap::new();
    for g in p.groups() {
        let mut reference = g[0];
        let mut best = f64::NEG_INFINITY;
        for &a in g {
            let s: f64 = g.iter().filter(|&&b| b != a).filter_map(|&b| prep.original.rho(a, b)).sum();
            if s > best {
                best = s;
                reference = a;
            }
        }
        for &m in g {
            if m == reference {
                out.insert(m, identity.clone());
                continue;
            }
            let psi = prep.original.warp_aligning(reference, m)?;
            let ys = psi.forward().eval_many(&ts);
            out.insert(m, ts.iter().copied().zip(ys).collect());
        }
    }
    Ok(out)
}

/// Runs every threshold and selects the final partition.
pub fn run(set: &CurveSet, config: &RunConfig) -> Result<RunResult> {
    let prep = prepare(set, config)?;
    run_prepared(&prep, config)
}

pub fn run_prepared(prep: &Prepared, config: &RunConfig) -> Result<RunResult> {
    let thresholds = threshold_set(&prep.original.values(), config.quantile_a, &config.threshold_offsets)?;
    let runs: Vec<ThresholdRun> = thresholds
        .par_iter()
        .map(|&c| run_single_threshold(prep, c, config))
        .collect::<Result<_>>()?;
    let all: Vec<Candidate> = runs.iter().flat_map(|r| r.candidates.iter().cloned()).collect();
    let best = select(&all).ok_or_else(|| Error::Internal("no candidates".into()))?.clone();
    let iterations = runs
        .iter()
        .find(|r| r.threshold == best.threshold)
        .map_or(0, |r| r.iterations);
    let warps = if config.report_warps {
        Some(group_warps(&best.partition, prep)?)
    } else {
        None
    };
    Ok(RunResult {
        partition: best.partition.clone(),
        threshold: best.threshold,
        index_name: config.index.name(),
        index_value: best.nu0,
        iterations,
        lambda0: config.lambda0,
        seed: config.seed,
        thresholds: thresholds.to_vec(),
        candidates: all,
        runs,
        warps,
    })
}

/// Similarity, its parts, and the aligning warp for one pair of curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    pub ids: (usize, usize),
    pub rho: f64,
    pub r_fwd: f64,
    pub r_inv: f64,
    pub penalty_fwd: f64,
    pub penalty_inv: f64,
    /// `(t, psi(t))` with `second o psi` matching `first`.
    pub warp: Vec<(f64, f64)>,
    pub inverse: Vec<(f64, f64)>,
}

/// Aligns curve `b` to curve `a` after the same smoothing as [`run`].
pub fn align_pair(set: &CurveSet, a: usize, b: usize, config: &RunConfig) -> Result<Alignment> {
    config.validate()?;
    let pick = |id: usize| -> Result<CurveSet> {
        let c = set
            .curves
            .iter()
            .find(|c| c.0 == id)
            .ok_or_else(|| Error::Input(format!("no curve with id {id}")))?;
        CurveSet::new(set.grid.clone(), vec![c.clone()])
    };
    let domain = Domain::with_settings(crate::spline::TimeGrid::uniform(config.grid_size)?, config.splines.clone())?;
    let knots = equally_spaced_knots(config.splines.shape_knots);
    let mut curves = Vec::new();
    for id in [a, b] {
        let one = pick(id)?;
        let smoother = Projector::new(&one.unit_grid(), config.splines.shape_degree, &knots)?;
        let s = smoother.fit(&one.curves[0].1)?;
        curves.push(Curve::from_grid_values(id, &s.evaluate(domain.grid()), &domain)?.normalized(&domain)?);
    }
    let e = crate::similarity::similarity(&curves[0], &curves[1], config.lambda0, &config.optimizer, &domain)?;
    let ts: Vec<f64> = (0..WARP_REPORT_POINTS).map(|i| i as f64 / (WARP_REPORT_POINTS - 1) as f64).collect();
    let fwd = e.warp.forward().eval_many(&ts);
    let inv = e.warp.inverse().eval_many(&ts);
    Ok(Alignment {
        ids: (a, b),
        rho: e.rho,
        r_fwd: e.r_fwd,
        r_inv: e.r_inv,
        penalty_fwd: e.penalty_fwd,
        penalty_inv: e.penalty_inv,
        warp: ts.iter().copied().zip(fwd).collect(),
        inverse: ts.iter().copied().zip(inv).collect(),
    })
}
