//! File formats and batch report records.

mod binvox;
mod obj;

pub use binvox::{read_binvox, read_binvox_with_header, write_binvox, write_binvox_with, BinvoxError, BinvoxHeader, MAX_VOLUME};
pub use obj::export_obj;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{is_stable, AnalysisError};
use crate::grid::VoxelGrid;
use crate::metrics::{chamfer, emd, iou, surface_points, MetricError};

/// One line of an evaluation report. Distances are `None` when either
/// shape is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub iou: f64,
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub stable: bool,
    pub connected: bool,
}

/// Means over the records; distance means skip `None` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalAggregate {
    pub id: String,
    pub count: usize,
    pub iou: f64,
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub stable: f64,
    pub connected: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub points: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            points: crate::metrics::DEFAULT_POINTS,
            seed: 0,
        }
    }
}

/// Compares a prediction against ground truth. Stability and connectivity
/// describe the prediction. Both shapes sample their surface points from
/// the same seed.
pub fn evaluate_pair(id: &str, pred: &VoxelGrid, gt: &VoxelGrid, cfg: EvalConfig) -> Result<EvalRecord, MetricError> {
    let iou = iou(pred, gt)?;
    let (cd, emd) = if pred.is_empty() || gt.is_empty() {
        (None, None)
    } else {
        let a = surface_points(pred, cfg.points, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
        let b = surface_points(gt, cfg.points, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;
        (Some(chamfer(&a, &b)?), Some(emd(&a, &b)?))
    };
    let (stable, connected) = match is_stable(pred) {
        Ok(r) => (r.stable, r.connected),
        Err(AnalysisError::EmptyShape) => (false, false),
    };
    Ok(EvalRecord {
        id: id.to_string(),
        iou,
        cd,
        emd,
        stable,
        connected,
    })
}

/// Evaluates pairs in parallel; output order follows input order.
pub fn evaluate_batch(pairs: &[(String, VoxelGrid, VoxelGrid)], cfg: EvalConfig) -> Result<Vec<EvalRecord>, MetricError> {
    pairs.par_iter().map(|(id, p, g)| evaluate_pair(id, p, g, cfg)).collect()
}

pub fn aggregate(records: &[EvalRecord]) -> EvalAggregate {
    let n = records.len();
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let frac = |f: fn(&EvalRecord) -> bool| {
        if n == 0 {
            0.0
        } else {
            100.0 * records.iter().filter(|r| f(r)).count() as f64 / n as f64
        }
    };
    EvalAggregate {
        id: "mean".into(),
        count: n,
        iou: mean(records.iter().map(|r| r.iou).collect()).unwrap_or(0.0),
        cd: mean(records.iter().filter_map(|r| r.cd).collect()),
        emd: mean(records.iter().filter_map(|r| r.emd).collect()),
        stable: frac(|r| r.stable),
        connected: frac(|r| r.connected),
    }
}

/// Line-delimited JSON: one record per line, then the aggregate row.
pub fn write_eval_report(records: &[EvalRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&aggregate(records)).expect("aggregate serializes"));
    out.push('\n');
    out
}
