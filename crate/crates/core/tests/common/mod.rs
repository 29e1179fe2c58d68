#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use warpclust::similarity::{center_inner, rho_given_psi, Curve};
use warpclust::spline::SplineRep;
use warpclust::updating::{weighted_inner_j, UpdateContext};
use warpclust::warping::Warping;
use warpclust::Domain;

/// A random unit-norm update problem: a target near a base shape and `k`
/// neighbours that are warped, perturbed copies of the same base.
pub fn random_instance(seed: u64, k: usize, domain: &Domain) -> UpdateContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let knots = domain.shape_knots().to_vec();
    let nb = knots.len() + 4;
    let base: Vec<f64> = (0..nb).map(|_| normal.sample(&mut rng)).collect();
    let jitter = rng.random_range(0.05..0.6);
    let perturbed = |rng: &mut ChaCha8Rng| -> SplineRep {
        let c = base.iter().map(|b| b + jitter * normal.sample(rng)).collect();
        SplineRep::new(3, knots.clone(), c).unwrap()
    };
    let f1_spline = perturbed(&mut rng);
    let f1 = Curve::from_grid_values(0, &f1_spline.evaluate(domain.grid()), domain)
        .unwrap()
        .normalized(domain)
        .unwrap();
    let ws = domain.warps();
    let mut others = Vec::new();
    let mut warps = Vec::new();
    let mut sims = Vec::new();
    for j in 1..=k {
        let raw: Vec<f64> = (0..ws.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let psi = ws.make_warping(&raw).unwrap();
        let h = perturbed(&mut rng);
        // f_j o psi_j stays close to the base shape
        let values = h.eval_many(&psi.inverse().eval_many(domain.points()));
        let fj = Curve::from_grid_values(j, &values, domain).unwrap().normalized(domain).unwrap();
        sims.push(rho_given_psi(&f1, &fj, &psi, 0.0, domain).unwrap().rho);
        others.push(fj);
        warps.push(psi);
    }
    let tau = rng.random_range(0.3..3.0);
    UpdateContext::new(f1, others, warps, sims, tau, domain).unwrap()
}

/// Quantities of the update bounds computed straight from their definitions,
/// using only the two inner products.
pub struct Oracle {
    pub lc5: Option<f64>,
    pub lc6: f64,
    pub c2: bool,
    pub c3: f64,
    pub c4: f64,
}

fn add_scaled(acc: &mut [f64], v: &[f64], s: f64) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
}

pub fn oracle(ctx: &UpdateContext, theta: &[f64], d: &Domain) -> Oracle {
    let ip = |a: &[f64], b: &[f64]| center_inner(a, b, d);
    let ipj = |a: &[f64], b: &[f64], psi: &Warping| weighted_inner_j(a, b, psi, d);
    let f1 = ctx.target().samples();
    let n = f1.len();
    let k = ctx.others().len();
    let fw: Vec<Vec<f64>> = ctx
        .others()
        .iter()
        .zip(ctx.warps())
        .map(|(c, psi)| c.spline().eval_many(&psi.forward().eval_many(d.points())))
        .collect();
    let norms: Vec<f64> = fw.iter().map(|v| ip(v, v).sqrt()).collect();

    let mut g0 = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s0 = vec![0.0; n];
    for j in 0..k {
        add_scaled(&mut g0, &fw[j], theta[j] / norms[j]);
        add_scaled(&mut s, &fw[j], 1.0 / norms[j]);
        add_scaled(&mut s0, &fw[j], 1.0 / norms[j]);
        add_scaled(&mut s0, f1, -ip(&fw[j], f1) / norms[j]);
    }
    let g0f1 = ip(&g0, f1);
    let mut rg = g0.clone();
    add_scaled(&mut rg, f1, -g0f1);
    let sf1 = ip(&s, f1);
    let g0s0 = ip(&g0, &s0);
    let den = 2.0 * sf1 * g0s0;
    let lc5 = (den.abs() > 1e-12).then(|| (ip(&rg, &rg) * sf1 * sf1 - g0s0 * g0s0) / den - g0f1);

    let (mut sa, mut sb, mut eb) = (0.0, 0.0, f64::NEG_INFINITY);
    let mut c4 = 0.0;
    for j in 0..k {
        let psi = &ctx.warps()[j];
        let nf = ipj(f1, f1, psi).sqrt();
        let a = ipj(f1, &fw[j], psi) / nf;
        let b = ipj(&g0, &fw[j], psi) / nf;
        let dd = 2.0 * ipj(f1, &g0, psi) / (nf * nf);
        let e = ipj(&g0, &g0, psi).sqrt() / nf;
        sa += b - 0.5 * a * dd;
        sb += 0.5 * (a * e * e + b * dd + b.abs() * e) + 3.0 / 2f64.sqrt() * (a.abs() + 1.0) * (dd.abs() + e).powi(2);
        eb = eb.max(e.max(b.abs()));
        let mut r = fw[j].clone();
        add_scaled(&mut r, f1, -ipj(&fw[j], f1, psi) / (nf * nf));
        r.iter_mut().for_each(|v| *v /= nf);
        c4 += ipj(&g0, &r, psi);
    }
    let lc6 = if sa > 0.0 { (sb / sa).max(eb) } else { eb };
    Oracle {
        lc5,
        lc6,
        c2: fw.iter().all(|v| ip(f1, v) >= 0.0),
        c3: ip(&g0, &s0),
        c4,
    }
}
