//! The shared evaluation grid and the spline spaces every curve and warp
//! lives in. One `Domain` is built per run and borrowed everywhere.

use crate::error::Result;
use crate::spline::{equally_spaced_knots, Projector, SplineRep, TimeGrid};
use crate::warping::WarpSpace;

/// Spline configuration for shape curves, warps and inverse warps.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSettings {
    pub shape_degree: usize,
    pub shape_knots: usize,
    pub warp_degree: usize,
    pub warp_knots: usize,
    pub inverse_degree: usize,
    pub inverse_knots: usize,
    /// Number of equally spaced abscissae used when fitting inverse warps.
    pub inverse_fit_points: usize,
}

impl Default for SplineSettings {
    fn default() -> Self {
        Self {
            shape_degree: 3,
            shape_knots: 16,
            warp_degree: 2,
            warp_knots: 3,
            inverse_degree: 2,
            inverse_knots: 23,
            inverse_fit_points: 201,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    grid: TimeGrid,
    weights: Vec<f64>,
    settings: SplineSettings,
    shape_knots: Vec<f64>,
    shape_projector: Projector,
    warps: WarpSpace,
}

impl Domain {
    /// Uniform grid of `grid_size` points with default spline settings.
    pub fn new(grid_size: usize) -> Result<Self> {
        Self::with_settings(TimeGrid::uniform(grid_size)?, SplineSettings::default())
    }

    pub fn with_settings(grid: TimeGrid, settings: SplineSettings) -> Result<Self> {
        let weights = grid.trapezoid_weights();
        let shape_knots = equally_spaced_knots(settings.shape_knots);
        let shape_projector = Projector::new(grid.points(), settings.shape_degree, &shape_knots)?;
        let warps = WarpSpace::new(&grid, &settings)?;
        Ok(Self {
            grid,
            weights,
            settings,
            shape_knots,
            shape_projector,
            warps,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Trapezoid quadrature weights on the grid.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn settings(&self) -> &SplineSettings {
        &self.settings
    }

    pub fn shape_knots(&self) -> &[f64] {
        &self.shape_knots
    }

    pub fn warps(&self) -> &WarpSpace {
        &self.warps
    }

    /// Least-squares shape spline through values given on the grid.
    pub fn fit_shape(&self, values: &[f64]) -> Result<SplineRep> {
        self.shape_projector.fit(values)
    }
}
