use crate::grid::VoxelGrid;
use crate::metrics::{LossWeights, BCE_EPS};

use super::SearchLoss;

/// Incremental scorer for adding voxels to a fixed reconstruction.
///
/// Adding a block only matters through the voxels it adds outside the
/// current reconstruction; those split into true positives (inside the
/// target) and false positives. Both objectives are closed forms in those
/// two counts.
pub(crate) struct Scorer<'a> {
    target: &'a VoxelGrid,
    current: &'a VoxelGrid,
    inter: usize,
    union: usize,
    loss: SearchLoss,
    weights: LossWeights,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(target: &'a VoxelGrid, current: &'a VoxelGrid, loss: SearchLoss, weights: LossWeights) -> Self {
        Scorer {
            target,
            current,
            inter: current.intersection_count(target),
            union: current.union_count(target),
            loss,
            weights,
        }
    }

    pub(crate) fn target(&self) -> &VoxelGrid {
        self.target
    }

    /// The reconstruction blocks are scored against.
    pub(crate) fn background(&self) -> &VoxelGrid {
        self.current
    }

    /// `(true positives, false positives)` added by `block`.
    pub(crate) fn added(&self, block: &VoxelGrid) -> (usize, usize) {
        let (mut tp, mut fp) = (0usize, 0usize);
        let words = block.words().iter().zip(self.current.words()).zip(self.target.words());
        for ((&b, &c), &t) in words {
            let new = b & !c;
            tp += (new & t).count_ones() as usize;
            fp += (new & !t).count_ones() as usize;
        }
        (tp, fp)
    }

    pub(crate) fn iou_before(&self) -> f64 {
        ratio(self.inter, self.union)
    }

    pub(crate) fn gain(&self, block: &VoxelGrid) -> f64 {
        let (tp, fp) = self.added(block);
        match self.loss {
            SearchLoss::IoUGain => ratio(self.inter + tp, self.union + fp) - self.iou_before(),
            SearchLoss::WeightedBce => {
                // each flipped voxel moves from eps to 1 - eps
                let swing = (1.0 - BCE_EPS).ln() - BCE_EPS.ln();
                (self.weights.w1 * tp as f64 - self.weights.w0 * fp as f64) * swing
            }
        }
    }
}

fn ratio(i: usize, u: usize) -> f64 {
    if u == 0 {
        1.0
    } else {
        i as f64 / u as f64
    }
}
