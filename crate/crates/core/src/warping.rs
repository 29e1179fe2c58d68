//! Monotone warping functions `psi: [0, 1] -> [0, 1]` with `psi(0) = 0` and
//! `psi(1) = 1`, each carried together with a spline approximation of its
//! inverse.
//!
//! Forward warps are quadratic splines whose coefficients increase from 0 to
//! 1. They are parameterised by unconstrained "raw" values: coefficient
//! increments are the Greville spacings scaled by `exp(raw)`, so equal raw
//! values give the identity and every raw vector gives a valid warp.

use nalgebra::{DMatrix, DVector};

use crate::domain::{Domain, SplineSettings};
use crate::error::{Error, Result};
use crate::nelder_mead::{minimize, SimplexOptions};
use crate::similarity::{rho_given_psi, Curve};
use crate::spline::{basis_matrix, equally_spaced_knots, weighted_pseudo_inverse, SplineRep, TimeGrid};

/// Tolerance on the boundary values of a warp.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed data for building warps on a given grid.
#[derive(Debug, Clone)]
pub struct WarpSpace {
    degree: usize,
    knots: Vec<f64>,
    greville_steps: Vec<f64>,
    inverse_degree: usize,
    inverse_knots: Vec<f64>,
    /// Abscissae `u_i` at which `psi^{-1}(u_i)` is computed exactly before
    /// the inverse spline is fitted; also serves as the check grid.
    fit_points: Vec<f64>,
    /// Projection onto the interior inverse coefficients (end coefficients
    /// fixed at 0 and 1).
    inverse_pinv: DMatrix<f64>,
    inverse_last_column: Vec<f64>,
    /// Same construction for forward warps, used to fit raw parameters.
    forward_pinv: DMatrix<f64>,
    forward_last_column: Vec<f64>,
    grid: Vec<f64>,
}

/// Endpoint-constrained least-squares projector: coefficients 0 and `n - 1`
/// are pinned to 0 and 1, the rest are fitted.
fn pinned_projector(points: &[f64], degree: usize, knots: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let full = basis_matrix(points, degree, knots)?;
    let nb = full.ncols();
    let interior = full.columns(1, nb - 2).into_owned();
    let pinv = weighted_pseudo_inverse(&interior, &vec![1.0; points.len()])?;
    let last = full.column(nb - 1).iter().copied().collect();
    Ok((pinv, last))
}

fn pinned_fit(pinv: &DMatrix<f64>, last_column: &[f64], values: &[f64]) -> Vec<f64> {
    let rhs = DVector::from_iterator(
        values.len(),
        values.iter().zip(last_column).map(|(v, l)| v - l),
    );
    let interior = pinv * rhs;
    let mut coeffs = Vec::with_capacity(interior.len() + 2);
    coeffs.push(0.0);
    coeffs.extend(interior.iter());
    coeffs.push(1.0);
    coeffs
}

impl WarpSpace {
    pub fn new(grid: &TimeGrid, settings: &SplineSettings) -> Result<Self> {
        if settings.warp_degree < 1 || settings.inverse_degree < 1 {
            return Err(Error::UnsupportedDegree(0));
        }
        let degree = settings.warp_degree;
        let knots = equally_spaced_knots(settings.warp_knots);
        let proto = SplineRep::constant(degree, knots.clone(), 0.0)?;
        let full = proto.knots();
        let nb = proto.n_basis();
        let greville: Vec<f64> = (0..nb)
            .map(|i| full[i + 1..=i + degree].iter().sum::<f64>() / degree as f64)
            .collect();
        let greville_steps = greville.windows(2).map(|w| w[1] - w[0]).collect();

        let inverse_knots = equally_spaced_knots(settings.inverse_knots);
        let m = settings.inverse_fit_points.max(inverse_knots.len() + settings.inverse_degree + 2);
        let fit_points = TimeGrid::uniform(m)?.points().to_vec();
        let (inverse_pinv, inverse_last_column) =
            pinned_projector(&fit_points, settings.inverse_degree, &inverse_knots)?;
        let (forward_pinv, forward_last_column) = pinned_projector(&fit_points, degree, &knots)?;

        Ok(Self {
            degree,
            knots,
            greville_steps,
            inverse_degree: settings.inverse_degree,
            inverse_knots,
            fit_points,
            inverse_pinv,
            inverse_last_column,
            forward_pinv,
            forward_last_column,
            grid: grid.points().to_vec(),
        })
    }

    /// Length of the raw parameter vector (`basis functions - 1`).
    pub fn n_params(&self) -> usize {
        self.greville_steps.len()
    }

    pub fn check_points(&self) -> &[f64] {
        &self.fit_points
    }

    /// Builds the warp for a raw parameter vector.
    pub fn make_warping(&self, raw: &[f64]) -> Result<Warping> {
        if raw.len() != self.n_params() {
            return Err(Error::InvalidParameter(format!(
                "expected {} warp parameters, got {}",
                self.n_params(),
                raw.len()
            )));
        }
        if raw.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter("non-finite warp parameter".into()));
        }
        let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let increments: Vec<f64> = raw
            .iter()
            .zip(&self.greville_steps)
            .map(|(r, g)| g * (r - top).exp())
            .collect();
        let total: f64 = increments.iter().sum();
        let mut coeffs = Vec::with_capacity(raw.len() + 1);
        let mut acc = 0.0;
        coeffs.push(0.0);
        for inc in &increments[..increments.len() - 1] {
            acc += inc / total;
            coeffs.push(acc);
        }
        coeffs.push(1.0);
        let forward = SplineRep::new(self.degree, self.knots.clone(), coeffs)?;
        let inverse = self.inverse_of_monotone(&forward);
        Warping::assemble(forward, inverse?, &self.grid)
    }

    pub fn identity(&self) -> Warping {
        self.make_warping(&vec![0.0; self.n_params()])
            .expect("identity warp is always valid")
    }

    /// Raw parameters whose warp approximates `target` in least squares over
    /// the check grid. `target` should be increasing with fixed endpoints.
    pub fn fit_raw_params<F: Fn(f64) -> f64>(&self, target: F) -> Vec<f64> {
        let values: Vec<f64> = self.fit_points.iter().map(|&u| target(u)).collect();
        let coeffs = pinned_fit(&self.forward_pinv, &self.forward_last_column, &values);
        let floor = 1e-8;
        let raw: Vec<f64> = coeffs
            .windows(2)
            .zip(&self.greville_steps)
            .map(|(w, g)| ((w[1] - w[0]).max(floor * g) / g).ln())
            .collect();
        let last = raw[raw.len() - 1];
        raw.iter().map(|r| r - last).collect()
    }

    /// Warp approximating `t^alpha`.
    pub fn power_warp(&self, alpha: f64) -> Result<Warping> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("power exponent {alpha}")));
        }
        self.make_warping(&self.fit_raw_params(|t| t.powf(alpha)))
    }

    fn inverse_of_monotone(&self, forward: &SplineRep) -> Result<SplineRep> {
        let preimages = invert_values(forward, &self.fit_points)?;
        let coeffs = pinned_fit(&self.inverse_pinv, &self.inverse_last_column, &preimages);
        SplineRep::new(self.inverse_degree, self.inverse_knots.clone(), coeffs)
    }

    /// Inverse spline of a monotone forward spline: the least-squares fit, in
    /// the inverse spline space, to the points `(psi(s_i), s_i)` where the
    /// `s_i` are chosen so that `psi(s_i)` runs over the check grid.
    pub fn invert_warping(&self, psi: &SplineRep) -> Result<SplineRep> {
        check_monotone(psi, &self.fit_points)?;
        self.inverse_of_monotone(psi)
    }

    /// Wraps an arbitrary monotone spline as a warp.
    pub fn warping_from_forward(&self, forward: SplineRep) -> Result<Warping> {
        let inverse = self.invert_warping(&forward)?;
        Warping::assemble(forward, inverse, &self.grid)
    }
}

fn check_monotone(psi: &SplineRep, check: &[f64]) -> Result<()> {
    let (a, b) = (psi.eval(0.0), psi.eval(1.0));
    if a.abs() > BOUNDARY_TOL || (b - 1.0).abs() > BOUNDARY_TOL {
        return Err(Error::MonotonicityViolation(format!(
            "boundary values psi(0) = {a}, psi(1) = {b}"
        )));
    }
    let d = psi.derivative()?;
    if let Some(t) = check.iter().find(|&&t| !(d.eval(t) > 0.0)) {
        return Err(Error::MonotonicityViolation(format!(
            "non-positive derivative at t = {t}"
        )));
    }
    Ok(())
}

/// Solves `psi(s) = u` for every `u` in `targets` (ascending).
fn invert_values(psi: &SplineRep, targets: &[f64]) -> Result<Vec<f64>> {
    if psi.degree() == 2 {
        Ok(invert_quadratic(psi, targets))
    } else {
        Ok(targets.iter().map(|&u| bisect(psi, u)).collect())
    }
}

fn bisect(psi: &SplineRep, u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if psi.eval(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Piecewise-analytic inversion of an increasing quadratic spline.
fn invert_quadratic(psi: &SplineRep, targets: &[f64]) -> Vec<f64> {
    let mut breaks = vec![0.0];
    breaks.extend_from_slice(psi.interior_knots());
    breaks.push(1.0);
    // local polynomial p0 + p1 x + p2 x^2 on each span, x = s - a
    let pieces: Vec<(f64, f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let y0 = psi.eval(a);
            let ym = psi.eval(a + 0.5 * h);
            let y1 = psi.eval(b);
            let p1 = (4.0 * ym - 3.0 * y0 - y1) / h;
            let p2 = (2.0 * y1 - 4.0 * ym + 2.0 * y0) / (h * h);
            (a, h, y0, p1, p2)
        })
        .collect();
    let tops: Vec<f64> = breaks[1..].iter().map(|&b| psi.eval(b)).collect();

    let mut out = Vec::with_capacity(targets.len());
    let mut k = 0;
    for &u in targets {
        while k + 1 < pieces.len() && u > tops[k] {
            k += 1;
        }
        let (a, h, p0, p1, p2) = pieces[k];
        let c = u - p0;
        let disc = (p1 * p1 + 4.0 * p2 * c).max(0.0);
        let denom = p1 + disc.sqrt();
        let x = if denom > 0.0 { 2.0 * c / denom } else { 0.0 };
        out.push((a + x.clamp(0.0, h)).clamp(0.0, 1.0));
    }
    out
}

/// A warping function together with its inverse, both also tabulated on the
/// grid of the domain that built it.
#[derive(Debug, Clone, PartialEq)]
pub struct Warping {
    forward: SplineRep,
    inverse: SplineRep,
    forward_grid: Vec<f64>,
    forward_slope: Vec<f64>,
    inverse_grid: Vec<f64>,
    inverse_slope: Vec<f64>,
}

impl Warping {
    fn assemble(forward: SplineRep, inverse: SplineRep, grid: &[f64]) -> Result<Self> {
        let tabulate = |s: &SplineRep| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut values = s.eval_many(grid);
            values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            let slope = s.derivative()?.eval_many(grid);
            Ok((values, slope))
        };
        let (forward_grid, forward_slope) = tabulate(&forward)?;
        let (inverse_grid, inverse_slope) = tabulate(&inverse)?;
        Ok(Self {
            forward,
            inverse,
            forward_grid,
            forward_slope,
            inverse_grid,
            inverse_slope,
        })
    }

    pub fn forward(&self) -> &SplineRep {
        &self.forward
    }

    pub fn inverse(&self) -> &SplineRep {
        &self.inverse
    }

    /// `psi` (or its inverse) on the grid, clamped to `[0, 1]`.
    pub fn on_grid(&self, direction: Direction) -> &[f64] {
        match direction {
            Direction::Forward => &self.forward_grid,
            Direction::Inverse => &self.inverse_grid,
        }
    }

    /// Derivative of `psi` (or its inverse) on the grid.
    pub fn slope_on_grid(&self, direction: Direction) -> &[f64] {
        match direction {
            Direction::Forward => &self.forward_slope,
            Direction::Inverse => &self.inverse_slope,
        }
    }

    /// The inverse warp: forward and inverse exchange roles.
    pub fn swapped(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            forward_grid: self.inverse_grid.clone(),
            forward_slope: self.inverse_slope.clone(),
            inverse_grid: self.forward_grid.clone(),
            inverse_slope: self.forward_slope.clone(),
        }
    }

    /// Trapezoid value of the integral of `(psi' - 1)^2`.
    pub fn roughness_penalty(&self, direction: Direction, domain: &Domain) -> f64 {
        self.slope_on_grid(direction)
            .iter()
            .zip(domain.weights())
            .map(|(d, w)| w * (d - 1.0) * (d - 1.0))
            .sum()
    }

    /// Largest `|psi^{-1}(psi(t)) - t|` over `points`.
    pub fn composition_error(&self, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&t| (self.inverse.eval(self.forward.eval(t)) - t).abs())
            .fold(0.0, f64::max)
    }

    /// Checks boundary values, strict monotonicity of the forward warp and the
    /// accuracy of the inverse on `check` points.
    pub fn validate(&self, check: &[f64]) -> Result<()> {
        check_monotone(&self.forward, check)?;
        let err = self.composition_error(check);
        if err > 0.01 {
            return Err(Error::MonotonicityViolation(format!(
                "inverse approximation error {err}"
            )));
        }
        Ok(())
    }
}

/// Roughness penalty of a warp in the given direction.
pub fn roughness_penalty(psi: &Warping, direction: Direction, domain: &Domain) -> f64 {
    psi.roughness_penalty(direction, domain)
}

/// Search settings for the warp maximising the penalised similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    /// Exponents `alpha` of the `t^alpha` start warps (1.0 is the identity).
    pub start_exponents: Vec<f64>,
    pub max_evals_per_start: usize,
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            start_exponents: vec![0.7, 0.85, 1.0, 1.18, 1.43],
            max_evals_per_start: 400,
            initial_step: 0.5,
            f_tol: 1e-10,
            x_tol: 1e-6,
        }
    }
}

/// Maximises `rho(f, g | psi)` over the warp family by multi-start
/// Nelder-Mead and returns the best warp with its value.
pub fn optimize_warping(
    f: &Curve,
    g: &Curve,
    lambda0: f64,
    opts: &OptimizerSettings,
    domain: &Domain,
) -> Result<(Warping, f64)> {
    if !(lambda0 >= 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda0 = {lambda0}")));
    }
    f.ensure_nonconstant(domain)?;
    g.ensure_nonconstant(domain)?;
    let space = domain.warps();
    let n = space.n_params();

    // The last raw parameter is fixed at zero: adding a constant to every raw
    // value leaves the warp unchanged.
    let to_raw = |free: &[f64]| -> Vec<f64> {
        let mut raw = free.to_vec();
        raw.push(0.0);
        raw
    };
    let objective = |free: &[f64]| -> f64 {
        match space.make_warping(&to_raw(free)) {
            Ok(w) => match rho_given_psi(f, g, &w, lambda0, domain) {
                Ok(parts) => -parts.rho,
                Err(_) => f64::NAN,
            },
            Err(_) => f64::NAN,
        }
    };
    let simplex = SimplexOptions {
        max_evals: opts.max_evals_per_start,
        initial_step: opts.initial_step,
        f_tol: opts.f_tol,
        x_tol: opts.x_tol,
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for &alpha in &opts.start_exponents {
        let start = if alpha == 1.0 {
            vec![0.0; n]
        } else {
            space.fit_raw_params(|t| t.powf(alpha))
        };
        // the simplex keeps its best vertex, so the start value is never lost
        let m = minimize(objective, &start[..n - 1], &simplex);
        if m.value.is_finite() && best.as_ref().map_or(true, |(_, bv)| m.value < *bv) {
            best = Some((m.x, m.value));
        }
    }
    let (x, _) = best.ok_or_else(|| Error::DegenerateCurve(format!("{} / {}", f.id(), g.id())))?;
    let warp = space.make_warping(&to_raw(&x))?;
    let rho = rho_given_psi(f, g, &warp, lambda0, domain)?.rho;
    Ok((warp, rho))
}
