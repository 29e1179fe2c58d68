//! Synthetic warped-curve scenarios with known groupings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Default exponents of the power warps `t^alpha`: 0.86, 0.89, ..., 1.13.
pub fn default_alphas() -> Vec<f64> {
    (0..10).map(|k| 0.86 + 0.03 * k as f64).collect()
}

/// Exponents for the two-group scenario of sine/cosine chirps.
pub const CHIRP_ALPHAS: [f64; 4] = [0.78, 0.89, 1.11, 1.22];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Shapes f1-f3 under power warps.
    S31,
    /// Shapes f1-f3 under random linear warps `a1 t + a2`.
    S32a,
    /// Shapes f1-f3 under `(1 + b2 - b1) t^alpha + b1`.
    S32b,
    /// Random two-sine shapes f4-f6 with shared draws per replicate.
    S33a,
    /// Chirps g1, g2 under power warps.
    S33b,
}

impl FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s31" => Ok(Self::S31),
            "s32a" => Ok(Self::S32a),
            "s32b" => Ok(Self::S32b),
            "s33a" => Ok(Self::S33a),
            "s33b" => Ok(Self::S33b),
            _ => Err(Error::Config(format!("unknown scenario {s}"))),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::S31 => "s31",
            Self::S32a => "s32a",
            Self::S32b => "s32b",
            Self::S33a => "s33a",
            Self::S33b => "s33b",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Curves per group.
    pub sizes: Vec<usize>,
    pub sigma: f64,
    pub n_points: usize,
    pub seed: u64,
    /// Power-warp exponents, cycled over the curves of each group.
    pub alphas: Vec<f64>,
    /// Scale of the standard normal draws in the random shapes.
    pub shape_noise: f64,
}

impl Scenario {
    /// Defaults for `kind`: sizes 10 per group (4 for the chirps), 100 points,
    /// sigma 0.15 (0 for the chirps).
    pub fn new(kind: ScenarioKind) -> Self {
        let (sizes, sigma, alphas) = match kind {
            ScenarioKind::S33a => (vec![10, 10, 10], 0.0, default_alphas()),
            ScenarioKind::S33b => (vec![4, 4], 0.0, CHIRP_ALPHAS.to_vec()),
            _ => (vec![10, 10, 10], 0.15, default_alphas()),
        };
        Self {
            kind,
            sizes,
            sigma,
            n_points: 100,
            seed: 0,
            alphas,
            shape_noise: 0.1,
        }
    }

    fn n_groups(&self) -> usize {
        match self.kind {
            ScenarioKind::S33b => 2,
            _ => 3,
        }
    }

    /// Names of the generated groups.
    pub fn group_names(&self) -> Vec<String> {
        let first = match self.kind {
            ScenarioKind::S33a => 4,
            ScenarioKind::S33b => 7,
            _ => 1,
        };
        (0..self.n_groups()).map(|i| format!("G{}", first + i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.sizes.len() != self.n_groups() {
            return Err(Error::Config(format!(
                "scenario {} needs {} group sizes, got {}",
                self.kind,
                self.n_groups(),
                self.sizes.len()
            )));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Config("group sizes must be positive".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) || !(self.shape_noise.is_finite() && self.shape_noise >= 0.0) {
            return Err(Error::Config("noise scales must be nonnegative".into()));
        }
        if self.n_points < 4 {
            return Err(Error::Config("need at least 4 points".into()));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::Config("warp exponents must be positive".into()));
        }
        Ok(())
    }
}

pub fn f1(t: f64) -> f64 {
    (2.5 * PI * t).sin()
}

pub fn f2(t: f64) -> f64 {
    (-t * t + (2.0 * PI * t).sin() + 0.25) / 1.3
}

pub fn f3(t: f64) -> f64 {
    (2.5 * PI * t.powf(2.5)).sin()
}

pub fn g1(t: f64) -> f64 {
    (2.0 * PI * t * t).sin()
}

pub fn g2(t: f64) -> f64 {
    (2.0 * PI * t * t).cos()
}

/// Random two-sine shapes (`which` in 4..=6) for draws `eps`.
pub fn random_shape(which: u8, eps: [f64; 4], t: f64) -> Result<f64> {
    let [e1, e2, e3, e4] = eps;
    let (amp1, amp2, offset, freq) = match which {
        4 => (1.0 + e1, 1.0 + e4, 0.0, 1.0),
        5 => (2.0 + e1, -1.0 + e4, 0.0, 1.0),
        6 => (1.0 + e1, 1.0 + e4, -1.0 / 3.0, 0.75),
        _ => return Err(Error::Config(format!("no random shape f{which}"))),
    };
    let u = offset + e2 + (freq + e3) * 2.0 * PI * t;
    Ok(amp1 * u.sin() + amp2 * (u * u / (2.0 * PI)).sin())
}

/// Generated curves, ids `0..n` in group order, with their true groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub grid: Vec<f64>,
    /// `(id, values on grid)`.
    pub curves: Vec<(usize, Vec<f64>)>,
    /// Group name of every curve.
    pub labels: Vec<(usize, String)>,
    /// One group per generated set.
    pub truth: Partition,
    /// First and third sets merged, for the scenarios whose shapes f1 and f3
    /// coincide up to warping.
    pub merged: Option<Partition>,
}

fn curve_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const SHAPE_STREAM: u64 = 1 << 40;

pub fn generate(sc: &Scenario) -> Result<Simulated> {
    sc.validate()?;
    let n = sc.n_points;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let noise = Normal::new(0.0, sc.sigma.max(f64::MIN_POSITIVE)).map_err(|e| Error::Config(e.to_string()))?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let names = sc.group_names();

    let mut curves = Vec::new();
    let mut labels = Vec::new();
    let mut groups = vec![Vec::new(); sc.sizes.len()];
    let mut id = 0usize;
    for (gi, &size) in sc.sizes.iter().enumerate() {
        for j in 0..size {
            let mut rng = curve_rng(sc.seed, id as u64);
            let alpha = sc.alphas[j % sc.alphas.len()];
            let warp: Box<dyn Fn(f64) -> f64> = match sc.kind {
                ScenarioKind::S31 | ScenarioKind::S33b => Box::new(move |t: f64| t.powf(alpha)),
                ScenarioKind::S32a => {
                    let a1 = rng.sample(Uniform::new(0.975, 1.025).expect("range"));
                    let a2 = rng.sample(Uniform::new(0.0, 0.05).expect("range"));
                    Box::new(move |t| a1 * t + a2)
                }
                ScenarioKind::S32b => {
                    let b1 = rng.sample(Uniform::new(0.0, 0.05).expect("range"));
                    let b2 = rng.sample(Uniform::new(-0.05, 0.05).expect("range"));
                    Box::new(move |t: f64| (1.0 + b2 - b1) * t.powf(alpha) + b1)
                }
                ScenarioKind::S33a => Box::new(|t| t),
            };
            let values: Vec<f64> = match sc.kind {
                ScenarioKind::S33a => {
                    // the same draws for the j-th curve of every group
                    let mut shape_rng = curve_rng(sc.seed, SHAPE_STREAM + j as u64);
                    let eps: [f64; 4] = std::array::from_fn(|_| sc.shape_noise * std_normal.sample(&mut shape_rng));
                    let which = 4 + gi as u8;
                    grid.iter().map(|&t| random_shape(which, eps, warp(t))).collect::<Result<_>>()?
                }
                ScenarioKind::S33b => {
                    let shape = if gi == 0 { g1 } else { g2 };
                    grid.iter().map(|&t| shape(warp(t))).collect()
                }
                _ => {
                    let shape = [f1, f2, f3][gi];
                    grid.iter().map(|&t| shape(warp(t))).collect()
                }
            };
            let values = if sc.sigma > 0.0 {
                values.into_iter().map(|v| v + noise.sample(&mut rng)).collect()
            } else {
                values
            };
            curves.push((id, values));
            labels.push((id, names[gi].clone()));
            groups[gi].push(id);
            id += 1;
        }
    }
    let truth = Partition::new(groups.clone())?;
    let merged = match sc.kind {
        ScenarioKind::S31 | ScenarioKind::S32a | ScenarioKind::S32b => {
            let mut g13 = groups[0].clone();
            g13.extend(&groups[2]);
            Some(Partition::new(vec![g13, groups[1].clone()])?)
        }
        _ => None,
    };
    Ok(Simulated {
        grid,
        curves,
        labels,
        truth,
        merged,
    })
}
