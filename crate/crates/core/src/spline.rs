//! Clamped B-splines on `[0, 1]`: basis evaluation, de Boor style evaluation,
//! differentiation and (weighted) least-squares fitting.
//!
//! Every spline in the crate uses an open uniform (clamped) knot vector, so a
//! spline interpolates its first and last coefficient at `0` and `1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition estimate above which a least-squares design is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Ordered observation times on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 points, got {}",
                points.len()
            )));
        }
        if points[0] != 0.0 || points[points.len() - 1] != 1.0 {
            return Err(Error::InvalidGrid("grid must start at 0 and end at 1".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points including both endpoints.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("need at least 4 points, got {n}")));
        }
        let step = (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| i as f64 / step).collect();
        points[n - 1] = 1.0;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite trapezoid weights, so that `sum(w_i * f(t_i))` approximates
    /// the integral of `f` over `[0, 1]`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let t = &self.points;
        let n = t.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (t[i + 1] - t[i]);
            w[i] += h;
            w[i + 1] += h;
        }
        w
    }
}

/// `count` equally spaced interior knots in `(0, 1)`.
pub fn equally_spaced_knots(count: usize) -> Vec<f64> {
    let denom = (count + 1) as f64;
    (1..=count).map(|i| i as f64 / denom).collect()
}

fn validate_knots(interior_knots: &[f64]) -> Result<()> {
    if interior_knots.iter().any(|k| !(*k > 0.0 && *k < 1.0)) {
        return Err(Error::InvalidKnots("interior knots must lie in (0, 1)".into()));
    }
    if interior_knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidKnots(
            "interior knots must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn clamped_knot_vector(degree: usize, interior_knots: &[f64]) -> Vec<f64> {
    let mut knots = Vec::with_capacity(interior_knots.len() + 2 * degree + 2);
    knots.extend(std::iter::repeat_n(0.0, degree + 1));
    knots.extend_from_slice(interior_knots);
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    knots
}

/// Number of basis functions of a clamped spline space.
pub fn basis_count(degree: usize, interior_knots: usize) -> usize {
    interior_knots + degree + 1
}

/// Index `i` such that `knots[i] <= x < knots[i + 1]`, restricted to the
/// non-degenerate spans of a clamped knot vector.
fn find_span(knots: &[f64], degree: usize, n_basis: usize, x: f64) -> usize {
    if x >= knots[n_basis] {
        return n_basis - 1;
    }
    if x <= knots[degree] {
        return degree;
    }
    let (mut low, mut high) = (degree, n_basis);
    let mut mid = (low + high) / 2;
    while x < knots[mid] || x >= knots[mid + 1] {
        if x < knots[mid] {
            high = mid;
        } else {
            low = mid;
        }
        mid = (low + high) / 2;
    }
    mid
}

/// Non-zero basis values at `x` on span `span` (Cox-de Boor triangle).
fn basis_funs(knots: &[f64], degree: usize, span: usize, x: f64, out: &mut [f64]) {
    let mut left = [0.0f64; 8];
    let mut right = [0.0f64; 8];
    out[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

/// A spline in the clamped B-spline basis on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineRep {
    degree: usize,
    interior_knots: Vec<f64>,
    coefficients: Vec<f64>,
    knots: Vec<f64>,
}

impl SplineRep {
    pub fn new(degree: usize, interior_knots: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if degree > 7 {
            return Err(Error::UnsupportedDegree(degree));
        }
        validate_knots(&interior_knots)?;
        let expected = basis_count(degree, interior_knots.len());
        if coefficients.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} coefficients, got {}",
                coefficients.len()
            )));
        }
        let knots = clamped_knot_vector(degree, &interior_knots);
        Ok(Self {
            degree,
            interior_knots,
            coefficients,
            knots,
        })
    }

    /// Constant spline equal to `value` everywhere.
    pub fn constant(degree: usize, interior_knots: Vec<f64>, value: f64) -> Result<Self> {
        let n = basis_count(degree, interior_knots.len());
        Self::new(degree, interior_knots, vec![value; n])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interior_knots(&self) -> &[f64] {
        &self.interior_knots
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Full clamped knot vector.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.coefficients.len()
    }

    /// Same knots, coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coefficients.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Value at `x`; arguments outside `[0, 1]` are clamped to the interval.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let p = self.degree;
        let span = find_span(&self.knots, p, self.n_basis(), x);
        let mut n = [0.0f64; 8];
        basis_funs(&self.knots, p, span, x, &mut n);
        (0..=p)
            .map(|k| self.coefficients[span - p + k] * n[k])
            .sum()
    }

    /// Values at every point in `xs`, written to `out`.
    pub fn eval_into(&self, xs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(xs.len(), out.len());
        let p = self.degree;
        let nb = self.n_basis();
        let mut n = [0.0f64; 8];
        for (x, o) in xs.iter().zip(out.iter_mut()) {
            let x = x.clamp(0.0, 1.0);
            let span = find_span(&self.knots, p, nb, x);
            basis_funs(&self.knots, p, span, x, &mut n);
            let mut acc = 0.0;
            for k in 0..=p {
                acc += self.coefficients[span - p + k] * n[k];
            }
            *o = acc;
        }
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xs.len()];
        self.eval_into(xs, &mut out);
        out
    }

    /// Values on a time grid.
    pub fn evaluate(&self, grid: &TimeGrid) -> Vec<f64> {
        self.eval_many(grid.points())
    }

    /// The derivative, a spline of degree `degree - 1` on the same interior knots.
    pub fn derivative(&self) -> Result<Self> {
        let p = self.degree;
        if p == 0 {
            return Err(Error::UnsupportedDegree(0));
        }
        let c = &self.coefficients;
        let t = &self.knots;
        let coeffs = (0..c.len() - 1)
            .map(|i| p as f64 * (c[i + 1] - c[i]) / (t[i + p + 1] - t[i + 1]))
            .collect();
        Self::new(p - 1, self.interior_knots.clone(), coeffs)
    }
}

/// Basis matrix with one row per grid point and one column per basis function.
pub fn basis_matrix(points: &[f64], degree: usize, interior_knots: &[f64]) -> Result<DMatrix<f64>> {
    if degree > 7 {
        return Err(Error::UnsupportedDegree(degree));
    }
    validate_knots(interior_knots)?;
    let knots = clamped_knot_vector(degree, interior_knots);
    let nb = basis_count(degree, interior_knots.len());
    let mut m = DMatrix::zeros(points.len(), nb);
    let mut n = [0.0f64; 8];
    for (row, &x) in points.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        let span = find_span(&knots, degree, nb, x);
        basis_funs(&knots, degree, span, x, &mut n);
        for k in 0..=degree {
            m[(row, span - degree + k)] = n[k];
        }
    }
    Ok(m)
}

/// Weighted least-squares solution of `design * c ~ y`, with the condition of
/// the weighted design checked against [`MAX_CONDITION`].
///
/// Solved via Householder QR; the condition estimate comes from the singular
/// values of the triangular factor.
pub(crate) fn weighted_lstsq(design: &DMatrix<f64>, y: &[f64], weights: &[f64]) -> Result<DVector<f64>> {
    let pinv = weighted_pseudo_inverse(design, weights)?;
    let wy = DVector::from_iterator(y.len(), y.iter().zip(weights).map(|(v, w)| v * w.sqrt()));
    Ok(pinv * wy)
}

/// Matrix `P` with `P * (sqrt(w) .* y)` equal to the weighted least-squares
/// coefficients for `design`.
pub(crate) fn weighted_pseudo_inverse(design: &DMatrix<f64>, weights: &[f64]) -> Result<DMatrix<f64>> {
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(Error::SingularFit {
            condition: f64::INFINITY,
        });
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be positive".into()));
    }
    let mut a = design.clone();
    for (r, w) in weights.iter().enumerate() {
        let s = w.sqrt();
        a.row_mut(r).iter_mut().for_each(|v| *v *= s);
    }
    let qr = a.qr();
    let r = qr.r();
    let sv = r.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularFit { condition });
    }
    let q = qr.q();
    let r_inv = r
        .try_inverse()
        .ok_or(Error::SingularFit { condition })?;
    Ok(r_inv * q.transpose())
}

/// Fits a spline of the given degree and knots to `(t, y)` samples by weighted
/// least squares.
pub fn fit_least_squares(
    samples: &[(f64, f64)],
    weights: &[f64],
    degree: usize,
    interior_knots: &[f64],
) -> Result<SplineRep> {
    if samples.len() != weights.len() {
        return Err(Error::InvalidParameter(
            "samples and weights differ in length".into(),
        ));
    }
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let design = basis_matrix(&ts, degree, interior_knots)?;
    let coeffs = weighted_lstsq(&design, &ys, weights)?;
    SplineRep::new(degree, interior_knots.to_vec(), coeffs.iter().copied().collect())
}

/// Precomputed unweighted least-squares projection for fixed abscissae.
///
/// Fitting then reduces to one matrix-vector product.
#[derive(Debug, Clone)]
pub struct Projector {
    degree: usize,
    interior_knots: Vec<f64>,
    pinv: DMatrix<f64>,
}

impl Projector {
    pub fn new(points: &[f64], degree: usize, interior_knots: &[f64]) -> Result<Self> {
        let design = basis_matrix(points, degree, interior_knots)?;
        let pinv = weighted_pseudo_inverse(&design, &vec![1.0; points.len()])?;
        Ok(Self {
            degree,
            interior_knots: interior_knots.to_vec(),
            pinv,
        })
    }

    pub fn n_points(&self) -> usize {
        self.pinv.ncols()
    }

    pub fn fit(&self, values: &[f64]) -> Result<SplineRep> {
        if values.len() != self.n_points() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                self.n_points(),
                values.len()
            )));
        }
        let coeffs = &self.pinv * DVector::from_column_slice(values);
        SplineRep::new(
            self.degree,
            self.interior_knots.clone(),
            coeffs.iter().copied().collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn linear_hat_functions() {
        let m = basis_matrix(&[0.0, 0.5, 1.0], 1, &[]).unwrap();
        assert_eq!(m.shape(), (3, 2));
        let expected = [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]];
        for r in 0..3 {
            for c in 0..2 {
                assert!((m[(r, c)] - expected[r][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cubic_one_knot_has_five_columns() {
        let grid = TimeGrid::uniform(101).unwrap();
        let m = basis_matrix(grid.points(), 3, &[0.5]).unwrap();
        assert_eq!(m.ncols(), 5);
    }

    #[test]
    fn partition_of_unity() {
        let grid = TimeGrid::uniform(257).unwrap();
        for (degree, knots) in [(1, vec![0.3]), (2, equally_spaced_knots(3)), (3, equally_spaced_knots(16)), (2, equally_spaced_knots(23))] {
            let m = basis_matrix(grid.points(), degree, &knots).unwrap();
            for r in 0..m.nrows() {
                let row = m.row(r);
                assert!((row.sum() - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|v| (0.0..=1.0 + 1e-15).contains(v)));
            }
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(matches!(
            basis_matrix(&[0.0, 1.0], 2, &[0.5, 0.5]),
            Err(Error::InvalidKnots(_))
        ));
        assert!(matches!(
            basis_matrix(&[0.0, 1.0], 2, &[0.6, 0.4]),
            Err(Error::InvalidKnots(_))
        ));
        assert!(matches!(
            basis_matrix(&[0.0, 1.0], 2, &[0.0]),
            Err(Error::InvalidKnots(_))
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.6, 0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2, 0.5, 1.0]).is_err());
        let g = TimeGrid::uniform(11).unwrap();
        let w: f64 = g.trapezoid_weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_spline_evaluates_to_constant() {
        let s = SplineRep::constant(3, equally_spaced_knots(16), 2.75).unwrap();
        let grid = TimeGrid::uniform(500).unwrap();
        assert!(s.evaluate(&grid).iter().all(|v| (v - 2.75).abs() < 1e-14));
        let d = s.derivative().unwrap();
        assert!(d.evaluate(&grid).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn recovers_coefficients_of_spline_in_same_space() {
        let knots = equally_spaced_knots(16);
        let coeffs: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64 - 1.3 * (i as f64).sin()).collect();
        let s = SplineRep::new(3, knots.clone(), coeffs.clone()).unwrap();
        let grid = TimeGrid::uniform(500).unwrap();
        let samples: Vec<(f64, f64)> = grid.points().iter().map(|&t| (t, s.eval(t))).collect();
        let fit = fit_least_squares(&samples, &vec![1.0; samples.len()], 3, &knots).unwrap();
        assert!(max_abs_diff(fit.coefficients(), &coeffs) < 1e-8);

        let proj = Projector::new(grid.points(), 3, &knots).unwrap();
        let fit2 = proj.fit(&s.evaluate(&grid)).unwrap();
        assert!(max_abs_diff(fit2.coefficients(), &coeffs) < 1e-8);
    }

    #[test]
    fn reproduces_lower_degree_polynomials() {
        let grid = TimeGrid::uniform(50).unwrap();
        let samples: Vec<(f64, f64)> = grid.points().iter().map(|&t| (t, 2.0 * t + 1.0)).collect();
        let fit = fit_least_squares(&samples, &vec![1.0; 50], 3, &[0.25, 0.5, 0.75]).unwrap();
        let vals = fit.evaluate(&grid);
        for (v, (t, _)) in vals.iter().zip(&samples) {
            assert!((v - (2.0 * t + 1.0)).abs() < 1e-8);
        }
        let d = fit.derivative().unwrap();
        assert!(d.evaluate(&grid).iter().all(|v| (v - 2.0).abs() < 1e-8));
    }

    #[test]
    fn weights_equal_replication() {
        // Two conflicting replicate sample sets; weight (2, 1) must equal
        // unit weights with the first set listed twice (normal equations).
        let grid = TimeGrid::uniform(40).unwrap();
        let knots = equally_spaced_knots(5);
        let a: Vec<(f64, f64)> = grid.points().iter().map(|&t| (t, (3.0 * t).sin())).collect();
        let b: Vec<(f64, f64)> = grid.points().iter().map(|&t| (t, (3.0 * t).cos() - t)).collect();

        let mut pooled = a.clone();
        pooled.extend(&b);
        let mut w = vec![2.0; a.len()];
        w.extend(vec![1.0; b.len()]);
        let weighted = fit_least_squares(&pooled, &w, 3, &knots).unwrap();

        let mut replicated = a.clone();
        replicated.extend(&a);
        replicated.extend(&b);
        let unit = fit_least_squares(&replicated, &vec![1.0; replicated.len()], 3, &knots).unwrap();
        assert!(max_abs_diff(weighted.coefficients(), unit.coefficients()) < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_basis() {
        let grid = TimeGrid::uniform(120).unwrap();
        let knots = equally_spaced_knots(6);
        let samples: Vec<(f64, f64)> = grid.points().iter().map(|&t| (t, (7.0 * t).sin() + t * t)).collect();
        let weights: Vec<f64> = (0..120).map(|i| 1.0 + (i % 3) as f64).collect();
        let fit = fit_least_squares(&samples, &weights, 3, &knots).unwrap();
        let m = basis_matrix(grid.points(), 3, &knots).unwrap();
        for c in 0..m.ncols() {
            let dot: f64 = samples
                .iter()
                .enumerate()
                .map(|(r, (t, y))| weights[r] * (y - fit.eval(*t)) * m[(r, c)])
                .sum();
            let scale: f64 = (0..m.nrows()).map(|r| weights[r] * m[(r, c)]).sum();
            assert!(dot.abs() <= 1e-8 * scale.max(1.0));
        }
    }

    #[test]
    fn sin_fit_accuracy() {
        let grid = TimeGrid::uniform(500).unwrap();
        let f = |t: f64| (2.5 * std::f64::consts::PI * t).sin();
        let proj = Projector::new(grid.points(), 3, &equally_spaced_knots(16)).unwrap();
        let fit = proj.fit(&grid.points().iter().map(|&t| f(t)).collect::<Vec<_>>()).unwrap();
        let err = grid.points().iter().map(|&t| (fit.eval(t) - f(t)).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-3, "max error {err}");
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let grid = TimeGrid::uniform(300).unwrap();
        let proj = Projector::new(grid.points(), 3, &equally_spaced_knots(16)).unwrap();
        let s = proj
            .fit(&grid.points().iter().map(|&t| (4.0 * t).sin() + t.powi(3)).collect::<Vec<_>>())
            .unwrap();
        let d = s.derivative().unwrap();
        let h = 1e-5;
        for &t in &grid.points()[1..grid.len() - 1] {
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((fd - d.eval(t)).abs() <= 1e-4);
        }
    }

    #[test]
    fn degree_zero_derivative_is_rejected() {
        let s = SplineRep::constant(0, vec![0.5], 1.0).unwrap();
        assert!(matches!(s.derivative(), Err(Error::UnsupportedDegree(0))));
    }

    #[test]
    fn rank_deficient_design_is_reported() {
        // All samples at one abscissa cannot determine a cubic.
        let samples = vec![(0.3, 1.0); 30];
        let err = fit_least_squares(&samples, &vec![1.0; 30], 3, &[0.5]).unwrap_err();
        assert!(matches!(err, Error::SingularFit { .. }));
    }
}
