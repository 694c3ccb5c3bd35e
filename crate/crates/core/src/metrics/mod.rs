//! Reconstruction metrics and the two training objectives, as pure
//! scoring functions.

mod assignment;

pub use assignment::min_cost_assignment;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{TokenProgram, ARG_SLOTS};
use crate::grid::{Dims, FloatGrid, VoxelGrid};

/// Probability clamp applied before taking logs in [`weighted_bce`].
pub const BCE_EPS: f64 = 1e-7;

/// Default number of surface samples for Chamfer / EMD.
pub const DEFAULT_POINTS: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("grid dims differ: {0} vs {1}")]
    Shape(Dims, Dims),
    #[error("shape is empty")]
    EmptyShape,
    #[error("point sets differ in size: {0} vs {1}")]
    Cardinality(usize, usize),
    #[error("prediction has {pred} steps, ground truth has {truth}")]
    Alignment { pred: usize, truth: usize },
    #[error("step {step}: predicted distribution is not normalized ({reason})")]
    Distribution { step: usize, reason: String },
    #[error("invalid loss weights: {0}")]
    Weights(String),
}

fn same_dims(a: Dims, b: Dims) -> Result<(), MetricError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricError::Shape(a, b))
    }
}

/// Intersection over union; two empty grids score 1.
pub fn iou(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64, MetricError> {
    same_dims(a.dims(), b.dims())?;
    let union = a.union_count(b);
    if union == 0 {
        return Ok(1.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}

/// Points in the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<[f64; 3]>,
}

impl PointSet {
    /// Returns `None` if any component leaves `[0, 1]`.
    pub fn new(points: Vec<[f64; 3]>) -> Option<Self> {
        points
            .iter()
            .all(|p| p.iter().all(|c| (0.0..=1.0).contains(c)))
            .then_some(PointSet { points })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Occupied voxels with at least one vacant face neighbor; the space
/// outside the grid counts as vacant.
pub fn surface_voxels(g: &VoxelGrid) -> Vec<[usize; 3]> {
    const FACES: [[i32; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    g.occupied()
        .filter(|&[x, y, z]| {
            FACES
                .iter()
                .any(|o| !g.get_i32([x as i32 + o[0], y as i32 + o[1], z as i32 + o[2]]))
        })
        .collect()
}

/// Samples `n` surface voxel centers uniformly (with replacement),
/// normalized by the grid extents.
pub fn surface_points<R: Rng + ?Sized>(g: &VoxelGrid, n: usize, rng: &mut R) -> Result<PointSet, MetricError> {
    let surface = surface_voxels(g);
    if surface.is_empty() {
        return Err(MetricError::EmptyShape);
    }
    let d = g.dims().as_array();
    let points = (0..n)
        .map(|_| {
            let v = surface[rng.gen_range(0..surface.len())];
            [0, 1, 2].map(|a| (v[a] as f64 + 0.5) / d[a] as f64)
        })
        .collect();
    Ok(PointSet { points })
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn mean_nearest(from: &[[f64; 3]], to: &[[f64; 3]]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| to.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
        .sum();
    total / from.len() as f64
}

/// Symmetric Chamfer distance: the average of the two directed mean
/// nearest-neighbor distances.
pub fn chamfer(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyShape);
    }
    Ok(0.5 * mean_nearest(&a.points, &b.points) + 0.5 * mean_nearest(&b.points, &a.points))
}

fn cost_matrix(a: &PointSet, b: &PointSet) -> Vec<Vec<f64>> {
    a.points
        .iter()
        .map(|p| b.points.iter().map(|q| dist(p, q)).collect())
        .collect()
}

/// Earth Mover's distance: mean matched distance under the optimal
/// bijection, solved exactly.
pub fn emd(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::Cardinality(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricError::EmptyShape);
    }
    let cost = cost_matrix(a, b);
    let assign = min_cost_assignment(&cost);
    let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(total / a.len() as f64)
}

/// Mean distance of the greedy matching that repeatedly takes the closest
/// remaining pair. Always at least [`emd`].
pub fn greedy_matching_cost(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::Cardinality(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricError::EmptyShape);
    }
    let cost = cost_matrix(a, b);
    let n = a.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (cost[i][j], i, j))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut used_a, mut used_b) = (vec![false; n], vec![false; n]);
    let mut total = 0.0;
    for (c, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            total += c;
        }
    }
    Ok(total / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Vacant-voxel weight.
    pub w0: f64,
    /// Occupied-voxel weight.
    pub w1: f64,
    /// Program-id classification weight.
    pub wp: f64,
    /// Argument regression weight.
    pub wa: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            w0: 1.0,
            w1: 1.0,
            wp: 1.0,
            wa: 1.0,
        }
    }
}

impl LossWeights {
    pub fn new(w0: f64, w1: f64, wp: f64, wa: f64) -> Result<Self, MetricError> {
        let w = LossWeights { w0, w1, wp, wa };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<(), MetricError> {
        let all = [self.w0, self.w1, self.wp, self.wa];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(MetricError::Weights("weights must be finite and >= 0".into()));
        }
        if self.w0 == 0.0 && self.w1 == 0.0 {
            return Err(MetricError::Weights("w0 and w1 are both zero".into()));
        }
        Ok(())
    }
}

/// Voxel-wise weighted binary cross-entropy, summed over the grid:
/// `sum_v -w1 y log p - w0 (1 - y) log(1 - p)` with `p` clamped to
/// `[BCE_EPS, 1 - BCE_EPS]`.
pub fn weighted_bce(pred: &FloatGrid, target: &VoxelGrid, w: &LossWeights) -> Result<f64, MetricError> {
    same_dims(pred.dims(), target.dims())?;
    let mut total = 0.0;
    for (i, &p) in pred.values().iter().enumerate() {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        total += if target.get_index(i) {
            -w.w1 * p.ln()
        } else {
            -w.w0 * (1.0 - p).ln()
        };
    }
    Ok(total)
}

/// One predicted step: a distribution over token ids and an argument row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPrediction {
    pub probs: Vec<f64>,
    pub args: [f64; ARG_SLOTS],
}

/// Tolerance on `sum(probs) == 1`.
pub const DISTRIBUTION_TOL: f64 = 1e-6;

/// Generator objective: per step, `wp` times the cross-entropy of the true
/// id plus `wa` times the squared L2 error of the argument row.
pub fn generator_loss(pred: &[StepPrediction], truth: &TokenProgram, w: &LossWeights) -> Result<f64, MetricError> {
    if pred.len() != truth.steps.len() {
        return Err(MetricError::Alignment {
            pred: pred.len(),
            truth: truth.steps.len(),
        });
    }
    let n = truth.num_ids();
    let mut total = 0.0;
    for (step, (p, t)) in pred.iter().zip(&truth.steps).enumerate() {
        if p.probs.len() != n {
            return Err(MetricError::Distribution {
                step,
                reason: format!("{} classes, expected {n}", p.probs.len()),
            });
        }
        let sum: f64 = p.probs.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOL || p.probs.iter().any(|&q| q < 0.0) {
            return Err(MetricError::Distribution {
                step,
                reason: format!("sums to {sum}"),
            });
        }
        let cls = -p.probs[t.id as usize].ln();
        let reg: f64 = p.args.iter().zip(&t.args).map(|(a, b)| (a - b) * (a - b)).sum();
        total += w.wp * cls + w.wa * reg;
    }
    Ok(total)
}
