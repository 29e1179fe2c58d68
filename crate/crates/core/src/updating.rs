//! Curve updating: each curve moves toward a weighted average of its warped
//! neighbours, with weights and shrinkage chosen so that the summed
//! similarity to the neighbours does not decrease.

use std::f64::consts::SQRT_2;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::similarity::{center_inner, Curve, SimilarityMatrix};
use crate::warping::{Direction, Warping};

const NORM_TOL: f64 = 1e-9;
const MIN_WEIGHT: f64 = 1e-6;
const LC5_DENOM_TOL: f64 = 1e-12;
/// Sign-test quantities at or below this (times the neighbour count) count as
/// zero; exact matches otherwise leave rounding residue of either sign.
const SIGN_TOL: f64 = 1e-12;

/// Quadrature weights of `E_j`: trapezoid weights times `psi'`, normalised to
/// sum to one so constants center exactly.
fn warp_measure(psi: &Warping, domain: &Domain) -> Vec<f64> {
    let slope = psi.slope_on_grid(Direction::Forward);
    let mut p: Vec<f64> = domain.weights().iter().zip(slope).map(|(w, d)| w * d.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

fn mean_p(f: &[f64], p: &[f64]) -> f64 {
    f.iter().zip(p).map(|(a, b)| a * b).sum()
}

fn inner_p(f: &[f64], g: &[f64], p: &[f64]) -> f64 {
    let mf = mean_p(f, p);
    let mg = mean_p(g, p);
    f.iter()
        .zip(g)
        .zip(p)
        .map(|((a, b), w)| w * (a - mf) * (b - mg))
        .sum()
}

/// `E_j f`, the mean of `f` under the measure `psi_j'(t) dt`.
pub fn weighted_mean_j(f: &[f64], psi: &Warping, domain: &Domain) -> f64 {
    mean_p(f, &warp_measure(psi, domain))
}

/// `<f, g>_j = E_j (f - E_j f)(g - E_j g)`.
pub fn weighted_inner_j(f: &[f64], g: &[f64], psi: &Warping, domain: &Domain) -> f64 {
    inner_p(f, g, &warp_measure(psi, domain))
}

/// Exponent applied to the similarity weights: `log 0.5 / log(max rho < 1)`.
/// Values within 1e-9 of one count as one.
pub fn compute_tau(original_sims: &[f64]) -> Result<f64> {
    let ind_max = original_sims
        .iter()
        .copied()
        .filter(|v| v.is_finite() && *v < 1.0 - 1e-9)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or(Error::MissingSimilarities)?;
    let clamped = ind_max.clamp(1e-6, 1.0 - 1e-6);
    Ok(0.5f64.ln() / clamped.ln())
}

/// Target curve, its neighbours, and the warps aligning the target to each.
#[derive(Debug, Clone)]
pub struct UpdateContext {
    target: Curve,
    others: Vec<Curve>,
    warps: Vec<Warping>,
    sims: Vec<f64>,
    tau: f64,
}

impl UpdateContext {
    /// `warps[j]` must satisfy `others[j] o warps[j] ~ target`; all curves
    /// must have unit seminorm.
    pub fn new(target: Curve, others: Vec<Curve>, warps: Vec<Warping>, sims: Vec<f64>, tau: f64, domain: &Domain) -> Result<Self> {
        if others.len() != warps.len() || others.len() != sims.len() {
            return Err(Error::InvalidParameter(format!(
                "{} neighbours, {} warps, {} similarities",
                others.len(),
                warps.len(),
                sims.len()
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        for c in std::iter::once(&target).chain(&others) {
            let n = c.norm(domain);
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!("curve {} has seminorm {n}, expected 1", c.id())));
            }
        }
        Ok(Self {
            target,
            others,
            warps,
            sims,
            tau,
        })
    }

    /// Context for `target` against `others`, taking warps and similarities
    /// from `matrix`.
    pub fn from_matrix(target: Curve, others: Vec<Curve>, matrix: &SimilarityMatrix, tau: f64, domain: &Domain) -> Result<Self> {
        let mut warps = Vec::with_capacity(others.len());
        let mut sims = Vec::with_capacity(others.len());
        for o in &others {
            warps.push(matrix.warp_aligning(target.id(), o.id())?);
            sims.push(
                matrix
                    .rho(target.id(), o.id())
                    .ok_or_else(|| Error::Internal(format!("no similarity for ({}, {})", target.id(), o.id())))?,
            );
        }
        Self::new(target, others, warps, sims, tau, domain)
    }

    pub fn target(&self) -> &Curve {
        &self.target
    }

    pub fn others(&self) -> &[Curve] {
        &self.others
    }

    pub fn warps(&self) -> &[Warping] {
        &self.warps
    }

    pub fn sims(&self) -> &[f64] {
        &self.sims
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Per-neighbour quantities shared by the weight and shrinkage rules.
struct Prepared {
    f1: Vec<f64>,
    /// `f_j o psi_j` on the grid.
    warped: Vec<Vec<f64>>,
    /// `|f_j o psi_j|`.
    c: Vec<f64>,
    /// Measures defining `<., .>_j`.
    p: Vec<Vec<f64>>,
    /// `|f_1|_j`.
    f1_norm_j: Vec<f64>,
}

impl Prepared {
    fn new(ctx: &UpdateContext, domain: &Domain) -> Result<Self> {
        let f1 = ctx.target.samples().to_vec();
        let mut warped = Vec::with_capacity(ctx.others.len());
        let mut c = Vec::with_capacity(ctx.others.len());
        let mut p = Vec::with_capacity(ctx.others.len());
        let mut f1_norm_j = Vec::with_capacity(ctx.others.len());
        for (other, psi) in ctx.others.iter().zip(&ctx.warps) {
            let fw = other.spline().eval_many(psi.on_grid(Direction::Forward));
            let cj = center_inner(&fw, &fw, domain).max(0.0).sqrt();
            if !(cj > 0.0) {
                return Err(Error::DegenerateCurve(other.id().to_string()));
            }
            let pj = warp_measure(psi, domain);
            let nj = inner_p(&f1, &f1, &pj).max(0.0).sqrt();
            if !(nj > 0.0) {
                return Err(Error::DegenerateSeminorm(other.id()));
            }
            warped.push(fw);
            c.push(cj);
            p.push(pj);
            f1_norm_j.push(nj);
        }
        Ok(Self {
            f1,
            warped,
            c,
            p,
            f1_norm_j,
        })
    }

    fn unit(&self, j: usize) -> Vec<f64> {
        self.warped[j].iter().map(|v| v / self.c[j]).collect()
    }

    /// `sum_l (F_l - <F_l, f1> f1) / c_l`.
    fn s0(&self, domain: &Domain) -> Vec<f64> {
        let mut s0 = vec![0.0; self.f1.len()];
        for (fw, cl) in self.warped.iter().zip(&self.c) {
            let a = center_inner(fw, &self.f1, domain);
            for ((s, v), f) in s0.iter_mut().zip(fw).zip(&self.f1) {
                *s += (v - a * f) / cl;
            }
        }
        s0
    }

    /// `(F_l - <F_l, f1>_l f1 / |f1|_l^2) / |f1|_l`.
    fn residual_j(&self, l: usize) -> Vec<f64> {
        let n = self.f1_norm_j[l];
        let a = inner_p(&self.warped[l], &self.f1, &self.p[l]) / (n * n);
        self.warped[l]
            .iter()
            .zip(&self.f1)
            .map(|(v, f)| (v - a * f) / n)
            .collect()
    }

    fn conditions(&self, domain: &Domain) -> Conditions {
        let k = self.warped.len();
        let s0 = self.s0(domain);
        let units: Vec<Vec<f64>> = (0..k).map(|j| self.unit(j)).collect();
        let residuals: Vec<Vec<f64>> = (0..k).map(|l| self.residual_j(l)).collect();
        let inner = self.warped.iter().map(|fw| center_inner(&self.f1, fw, domain)).collect();
        let res1 = units.iter().map(|u| center_inner(u, &s0, domain)).collect();
        let res2 = units
            .iter()
            .map(|u| (0..k).map(|l| inner_p(u, &residuals[l], &self.p[l])).sum())
            .collect();
        Conditions { inner, res1, res2 }
    }

    fn g0(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.f1.len()];
        for (j, t) in theta.iter().enumerate() {
            if *t == 0.0 {
                continue;
            }
            for (gi, v) in g.iter_mut().zip(&self.warped[j]) {
                *gi += t * v / self.c[j];
            }
        }
        g
    }
}

/// The per-neighbour quantities whose sign decides whether a neighbour may
/// contribute: `<f1, f_j o psi_j>` and the two residual projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditions {
    pub inner: Vec<f64>,
    pub res1: Vec<f64>,
    pub res2: Vec<f64>,
}

impl Conditions {
    /// Whether neighbour `j` survives all three sign tests.
    pub fn admits(&self, j: usize) -> bool {
        let tol = SIGN_TOL * self.inner.len() as f64;
        self.inner[j] > tol && self.res1[j] > tol && self.res2[j] > tol
    }
}

pub fn update_conditions(ctx: &UpdateContext, domain: &Domain) -> Result<Conditions> {
    Ok(Prepared::new(ctx, domain)?.conditions(domain))
}

/// Neighbour weights; `all_zero` means no neighbour qualified and the target
/// is left as is.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    pub weights: Vec<f64>,
    pub all_zero: bool,
}

/// Weights proportional to `n_j w_j^tau` over the kept neighbours, where
/// `w_j` is the similarity relative to the best kept similarity.
pub fn theta_weights(n: &[usize], sims: &[f64], keep: &[bool], tau: f64) -> Theta {
    let k = n.len();
    let best = (0..k)
        .filter(|&j| keep[j])
        .map(|j| sims[j])
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Theta {
            weights: vec![0.0; k],
            all_zero: true,
        };
    }
    let raw: Vec<f64> = (0..k)
        .map(|j| {
            if !keep[j] {
                return 0.0;
            }
            let w = if best <= 0.0 { 1.0 } else { (sims[j] / best).max(MIN_WEIGHT) };
            n[j] as f64 * w.powf(tau)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Theta {
            weights: vec![0.0; k],
            all_zero: true,
        };
    }
    Theta {
        weights: raw.iter().map(|v| v / total).collect(),
        all_zero: false,
    }
}

fn theta_from(ctx: &UpdateContext, cond: &Conditions) -> Theta {
    let n: Vec<usize> = ctx.others.iter().map(Curve::n_orig).collect();
    let keep: Vec<bool> = (0..n.len()).map(|j| cond.admits(j)).collect();
    theta_weights(&n, &ctx.sims, &keep, ctx.tau)
}

pub fn select_theta(ctx: &UpdateContext, domain: &Domain) -> Result<Theta> {
    let cond = update_conditions(ctx, domain)?;
    Ok(theta_from(ctx, &cond))
}

/// The two lower bounds on the shrinkage `lambda` and their maximum.
/// `lc5` is `None` when its denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBounds {
    pub lc5: Option<f64>,
    pub lc6: f64,
    pub lambda: f64,
}

fn lambda_bounds(prep: &Prepared, theta: &[f64], domain: &Domain) -> Result<LambdaBounds> {
    let f1 = &prep.f1;
    let g0 = prep.g0(theta);
    let mut s = vec![0.0; f1.len()];
    for j in 0..prep.warped.len() {
        for (si, v) in s.iter_mut().zip(&prep.warped[j]) {
            *si += v / prep.c[j];
        }
    }
    let s0 = prep.s0(domain);

    let g0_f1 = center_inner(&g0, f1, domain);
    let r_g0: Vec<f64> = g0.iter().zip(f1).map(|(g, f)| g - g0_f1 * f).collect();
    let s_f1 = center_inner(&s, f1, domain);
    let g0_s0 = center_inner(&g0, &s0, domain);
    let denom = 2.0 * s_f1 * g0_s0;
    let lc5 = (denom.abs() > LC5_DENOM_TOL).then(|| {
        let num = center_inner(&r_g0, &r_g0, domain) * s_f1 * s_f1 - g0_s0 * g0_s0;
        num / denom - g0_f1
    });

    let mut sum_alpha = 0.0;
    let mut sum_beta = 0.0;
    let mut eb_max = f64::NEG_INFINITY;
    for j in 0..prep.warped.len() {
        let p = &prep.p[j];
        let n1 = prep.f1_norm_j[j];
        let a = inner_p(f1, &prep.warped[j], p) / n1;
        let b = inner_p(&g0, &prep.warped[j], p) / n1;
        let d = 2.0 * inner_p(f1, &g0, p) / (n1 * n1);
        let e = inner_p(&g0, &g0, p).max(0.0).sqrt() / n1;
        sum_alpha += b - 0.5 * a * d;
        sum_beta += 0.5 * (a * e * e + b * d + b.abs() * e) + 3.0 / SQRT_2 * (a.abs() + 1.0) * (d.abs() + e).powi(2);
        eb_max = eb_max.max(e.max(b.abs()));
    }
    let lc6 = if sum_alpha > 0.0 { eb_max.max(sum_beta / sum_alpha) } else { eb_max };
    let lambda = lc5.map_or(lc6, |v| v.max(lc6));
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Internal(format!("shrinkage bound is {lambda}")));
    }
    Ok(LambdaBounds { lc5, lc6, lambda })
}

pub fn compute_lambda(ctx: &UpdateContext, theta: &Theta, domain: &Domain) -> Result<LambdaBounds> {
    if theta.all_zero {
        return Err(Error::InvalidParameter("no neighbour has positive weight".into()));
    }
    lambda_bounds(&Prepared::new(ctx, domain)?, &theta.weights, domain)
}

/// `(lambda f1 + g0) / (lambda + 1)` on the grid, before the spline refit.
pub fn combination_samples(ctx: &UpdateContext, theta: &Theta, lambda: f64, domain: &Domain) -> Result<Vec<f64>> {
    let prep = Prepared::new(ctx, domain)?;
    Ok(blend(&prep, &theta.weights, lambda))
}

fn blend(prep: &Prepared, theta: &[f64], lambda: f64) -> Vec<f64> {
    let g0 = prep.g0(theta);
    prep.f1
        .iter()
        .zip(&g0)
        .map(|(f, g)| (lambda * f + g) / (lambda + 1.0))
        .collect()
}

/// Result of updating one curve.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub curve: Curve,
    pub theta: Theta,
    pub bounds: Option<LambdaBounds>,
}

pub fn update_curve(ctx: &UpdateContext, domain: &Domain) -> Result<UpdateOutcome> {
    if ctx.others.is_empty() {
        return Ok(UpdateOutcome {
            curve: ctx.target.clone(),
            theta: Theta {
                weights: Vec::new(),
                all_zero: true,
            },
            bounds: None,
        });
    }
    let prep = Prepared::new(ctx, domain)?;
    let theta = theta_from(ctx, &prep.conditions(domain));
    if theta.all_zero {
        return Ok(UpdateOutcome {
            curve: ctx.target.clone(),
            theta,
            bounds: None,
        });
    }
    let bounds = lambda_bounds(&prep, &theta.weights, domain)?;
    let values = blend(&prep, &theta.weights, bounds.lambda);
    let spline = domain.fit_shape(&values)?;
    let curve = Curve::from_spline(ctx.target.id(), spline, ctx.target.members().clone(), domain)?;
    Ok(UpdateOutcome {
        curve,
        theta,
        bounds: Some(bounds),
    })
}

/// Summed similarity of `x` to the warped neighbours with the warps held
/// fixed, in the form the non-decrease guarantee is stated for:
/// `sum_j (<x, F_j> / (|x| |F_j|) + <x, F_j>_j / |x|_j) / 2`.
/// Penalties are omitted because they do not depend on `x`.
pub fn aggregate_similarity(ctx: &UpdateContext, x: &[f64], domain: &Domain) -> Result<f64> {
    if x.len() != domain.len() {
        return Err(Error::InvalidParameter("sample length does not match grid".into()));
    }
    let prep = Prepared::new(ctx, domain)?;
    let nx = center_inner(x, x, domain).max(0.0).sqrt();
    if !(nx > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut total = 0.0;
    for j in 0..prep.warped.len() {
        let fwd = center_inner(x, &prep.warped[j], domain) / (nx * prep.c[j]);
        let nxj = inner_p(x, x, &prep.p[j]).max(0.0).sqrt();
        if !(nxj > 0.0) {
            return Err(Error::DegenerateSeminorm(ctx.others[j].id()));
        }
        let inv = inner_p(x, &prep.warped[j], &prep.p[j]) / nxj;
        total += 0.5 * (fwd + inv);
    }
    Ok(total)
}

/// Updates every curve once, in ascending id order. Each update sees the
/// latest versions of the other curves; warps and similarities come from
/// `matrix`. All curves are renormalised before each update and on return.
pub fn update_all(curves: &[Curve], matrix: &SimilarityMatrix, tau: f64, domain: &Domain) -> Result<Vec<Curve>> {
    let mut current: Vec<Curve> = curves.to_vec();
    current.sort_by_key(Curve::id);
    if current.len() < 2 {
        return Ok(current);
    }
    for t in 0..current.len() {
        current = current.iter().map(|c| c.normalized(domain)).collect::<Result<_>>()?;
        let target = current[t].clone();
        let others: Vec<Curve> = current
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t)
            .map(|(_, c)| c.clone())
            .collect();
        let ctx = UpdateContext::from_matrix(target, others, matrix, tau, domain)?;
        current[t] = update_curve(&ctx, domain)?.curve;
    }
    current.iter().map(|c| c.normalized(domain)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::rho_given_psi;
    use std::f64::consts::PI;

    fn unit_curve(id: usize, d: &Domain, f: impl Fn(f64) -> f64) -> Curve {
        let v: Vec<f64> = d.points().iter().map(|&t| f(t)).collect();
        Curve::from_grid_values(id, &v, d).unwrap().normalized(d).unwrap()
    }

    #[test]
    fn inner_j_identity_matches_center_inner() {
        let d = Domain::new(200).unwrap();
        let f: Vec<f64> = d.points().iter().map(|t| (4.0 * t).sin()).collect();
        let g: Vec<f64> = d.points().iter().map(|t| t * t - t).collect();
        let id = d.warps().identity();
        assert!((weighted_inner_j(&f, &g, &id, &d) - center_inner(&f, &g, &d)).abs() < 1e-10);
        let psi = d.warps().power_warp(1.7).unwrap();
        assert!(weighted_inner_j(&vec![2.0; f.len()], &g, &psi, &d).abs() < 1e-14);
    }

    #[test]
    fn mean_j_of_t_under_square() {
        let d = Domain::new(1000).unwrap();
        let psi = d.warps().power_warp(2.0).unwrap();
        let t = d.points().to_vec();
        assert!((weighted_mean_j(&t, &psi, &d) - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn tau_values() {
        assert!((compute_tau(&[0.5, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((compute_tau(&[0.25, 0.1]).unwrap() - 0.5).abs() < 1e-12);
        let t = compute_tau(&[0.99999999]).unwrap();
        assert!((t - 0.5f64.ln() / (1.0 - 1e-6f64).ln()).abs() < 1e-6 && (t - 693147.0).abs() < 1.0);
        assert!(matches!(compute_tau(&[]), Err(Error::MissingSimilarities)));
        assert!(matches!(compute_tau(&[1.0]), Err(Error::MissingSimilarities)));
        assert!(matches!(compute_tau(&[1.0 - 1e-12]), Err(Error::MissingSimilarities)));
    }

    #[test]
    fn theta_proportionality() {
        let th = theta_weights(&[1, 2], &[0.9, 0.72], &[true, true], 1.0);
        assert!((th.weights[0] - 1.0 / 2.6).abs() < 1e-12);
        assert!((th.weights[1] - 1.6 / 2.6).abs() < 1e-12);
        let none = theta_weights(&[1, 1], &[0.5, 0.5], &[false, false], 1.0);
        assert!(none.all_zero);
        let neg = theta_weights(&[1, 3], &[-0.2, -0.1], &[true, true], 2.0);
        assert!((neg.weights[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn exact_match_and_anticorrelated_are_zeroed() {
        let d = Domain::new(100).unwrap();
        let f = unit_curve(0, &d, |t| (2.5 * PI * t).sin());
        let g = f.relabeled(1, [1].into());
        let id = d.warps().identity();
        let ctx = UpdateContext::new(f.clone(), vec![g], vec![id.clone()], vec![1.0], 1.0, &d).unwrap();
        let out = update_curve(&ctx, &d).unwrap();
        assert!(out.theta.all_zero);
        assert_eq!(out.curve, f);

        let neg = unit_curve(2, &d, |t| -(2.5 * PI * t).sin());
        let ctx = UpdateContext::new(f, vec![neg], vec![id], vec![-1.0], 1.0, &d).unwrap();
        let cond = update_conditions(&ctx, &d).unwrap();
        assert!(cond.inner[0] < 0.0);
        assert!(select_theta(&ctx, &d).unwrap().all_zero);
    }

    fn three_curve_context(d: &Domain) -> UpdateContext {
        let f1 = unit_curve(0, d, |t| (2.5 * PI * t).sin());
        let f2 = unit_curve(1, d, |t| (2.5 * PI * t.powf(1.1)).sin() + 0.1 * t);
        let f3 = unit_curve(2, d, |t| (2.5 * PI * t.powf(0.9)).sin() - 0.2 * t * t);
        let w2 = d.warps().power_warp(1.0 / 1.1).unwrap();
        let w3 = d.warps().power_warp(1.0 / 0.9).unwrap();
        let s2 = rho_given_psi(&f1, &f2, &w2, 0.0, d).unwrap().rho;
        let s3 = rho_given_psi(&f1, &f3, &w3, 0.0, d).unwrap().rho;
        UpdateContext::new(f1, vec![f2, f3], vec![w2, w3], vec![s2, s3], 2.0, d).unwrap()
    }

    #[test]
    fn lambda_dominates_eb_terms_and_update_is_convex() {
        let d = Domain::new(150).unwrap();
        let ctx = three_curve_context(&d);
        let th = select_theta(&ctx, &d).unwrap();
        assert!(!th.all_zero);
        assert!((th.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = compute_lambda(&ctx, &th, &d).unwrap();
        assert!(b.lambda >= b.lc6 && b.lc5.map_or(true, |v| b.lambda >= v));
        let x = combination_samples(&ctx, &th, b.lambda, &d).unwrap();
        let before = aggregate_similarity(&ctx, ctx.target().samples(), &d).unwrap();
        let after = aggregate_similarity(&ctx, &x, &d).unwrap();
        assert!(after >= before - 1e-9, "{after} < {before}");
    }

    #[test]
    fn huge_lambda_leaves_target_in_place() {
        let d = Domain::new(150).unwrap();
        let ctx = three_curve_context(&d);
        let th = select_theta(&ctx, &d).unwrap();
        let x = combination_samples(&ctx, &th, 1e9, &d).unwrap();
        let sup = x
            .iter()
            .zip(ctx.target().samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6);
    }

    #[test]
    fn update_all_keeps_single_curve() {
        let d = Domain::new(60).unwrap();
        let f = unit_curve(0, &d, |t| t * t);
        let g = unit_curve(1, &d, |t| t);
        let m = crate::similarity::similarity_matrix(&[f.clone(), g], 0.0, &Default::default(), &d).unwrap();
        let out = update_all(&[f.clone()], &m, 1.0, &d).unwrap();
        assert_eq!(out, vec![f]);
    }
}
