//! Connectivity and physical stability of voxel shapes.
//!
//! A shape is connected when its occupied voxels form one component, and
//! stable when its center of mass, projected to the ground plane `(x, z)`,
//! lies in the convex hull of its ground contacts. Ground contacts are the
//! voxels of the shape's own lowest occupied layer, not the grid floor.

mod hull;

pub use hull::{contains as hull_contains, convex_hull, point_segment_distance};

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Dims, VoxelGrid};

/// Tolerance for a center of mass lying on a hull edge.
pub const HULL_TOL: f64 = 1e-9;
/// Distance allowed from a degenerate (point or segment) contact set.
pub const DEGENERATE_TOL: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("shape is empty")]
    EmptyShape,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    /// Face neighbors only.
    Six,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

impl Connectivity {
    fn offsets(self) -> Vec<[i32; 3]> {
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let manhattan = i32::abs(dx) + i32::abs(dy) + i32::abs(dz);
                    let keep = match self {
                        Connectivity::Six => manhattan == 1,
                        Connectivity::TwentySix => manhattan > 0,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

/// Per-voxel component labels; 0 marks vacant voxels, components are
/// numbered from 1 in scan order of their first voxel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    pub dims: Dims,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Labels {
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[self.dims.index(x, y, z)]
    }
}

pub fn connected_components(g: &VoxelGrid, conn: Connectivity) -> Labels {
    let dims = g.dims();
    let offsets = conn.offsets();
    let mut labels = vec![0u32; dims.volume()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in g.occupied_indices() {
        if labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let [x, y, z] = dims.coords(i);
            for o in &offsets {
                let p = [x as i32 + o[0], y as i32 + o[1], z as i32 + o[2]];
                if !g.get_i32(p) {
                    continue;
                }
                let j = dims.index(p[0] as usize, p[1] as usize, p[2] as usize);
                if labels[j] == 0 {
                    labels[j] = count;
                    queue.push_back(j);
                }
            }
        }
    }
    Labels {
        dims,
        labels,
        count: count as usize,
    }
}

/// Mean of occupied voxel centers, in voxel units.
pub fn center_of_mass(g: &VoxelGrid) -> Result<[f64; 3], AnalysisError> {
    let mut sum = [0.0f64; 3];
    let mut n = 0usize;
    for v in g.occupied() {
        for a in 0..3 {
            sum[a] += v[a] as f64 + 0.5;
        }
        n += 1;
    }
    if n == 0 {
        return Err(AnalysisError::EmptyShape);
    }
    Ok(sum.map(|s| s / n as f64))
}

/// `(x, z)` centers of the occupied voxels in the lowest occupied layer.
pub fn ground_contacts(g: &VoxelGrid) -> Result<Vec<[f64; 2]>, AnalysisError> {
    let dims = g.dims();
    let floor = (0..dims.y)
        .find(|&y| (0..dims.x).any(|x| (0..dims.z).any(|z| g.get(x, y, z))))
        .ok_or(AnalysisError::EmptyShape)?;
    let mut out = Vec::new();
    for x in 0..dims.x {
        for z in 0..dims.z {
            if g.get(x, floor, z) {
                out.push([x as f64 + 0.5, z as f64 + 0.5]);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub connected: bool,
    pub component_count: usize,
    pub center_of_mass: [f64; 3],
    /// Counter-clockwise hull of the ground contacts in the `(x, z)` plane.
    pub contact_hull: Vec<[f64; 2]>,
}

/// Stability and connectivity of a non-empty shape.
pub fn is_stable(g: &VoxelGrid) -> Result<StabilityReport, AnalysisError> {
    is_stable_with(g, Connectivity::default())
}

pub fn is_stable_with(g: &VoxelGrid, conn: Connectivity) -> Result<StabilityReport, AnalysisError> {
    let com = center_of_mass(g)?;
    let contacts = ground_contacts(g)?;
    let hull = convex_hull(&contacts);
    let p = [com[0], com[2]];
    let stable = match hull.as_slice() {
        [a] => point_segment_distance(p, *a, *a) <= DEGENERATE_TOL,
        [a, b] => point_segment_distance(p, *a, *b) <= DEGENERATE_TOL,
        h => hull_contains(h, p, HULL_TOL),
    };
    let component_count = connected_components(g, conn).count;
    Ok(StabilityReport {
        stable,
        connected: component_count == 1,
        component_count,
        center_of_mass: com,
        contact_hull: hull,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeAnalysis {
    pub id: String,
    pub stable: bool,
    pub connected: bool,
    pub component_count: usize,
    /// `None` for empty shapes.
    pub report: Option<StabilityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetAnalysis {
    pub shapes: Vec<ShapeAnalysis>,
    pub stable_pct: f64,
    pub connected_pct: f64,
    pub both_pct: f64,
    pub connectivity: Connectivity,
    pub notes: Vec<String>,
}

impl DatasetAnalysis {
    /// Aligned text table with one row of percentages.
    pub fn table(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "{:>8} | {:>10} | {:>9} | {:>18}",
            "shapes", "Stable (%)", "Conn. (%)", "Stable & Conn. (%)"
        )
        .unwrap();
        writeln!(s, "{:->8}-+-{:->10}-+-{:->9}-+-{:->18}", "", "", "", "").unwrap();
        writeln!(
            s,
            "{:>8} | {:>10.1} | {:>9.1} | {:>18.1}",
            self.shapes.len(),
            self.stable_pct,
            self.connected_pct,
            self.both_pct
        )
        .unwrap();
        s
    }
}

impl fmt::Display for DatasetAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.table())
    }
}

/// Per-shape reports plus percentage aggregates. Empty shapes count as
/// neither stable nor connected.
pub fn analyze_dataset<'a, I>(grids: I, conn: Connectivity) -> DatasetAnalysis
where
    I: IntoIterator<Item = (String, &'a VoxelGrid)>,
{
    let items: Vec<(String, &VoxelGrid)> = grids.into_iter().collect();
    let shapes: Vec<ShapeAnalysis> = items
        .into_par_iter()
        .map(|(id, g)| match is_stable_with(g, conn) {
            Ok(r) => ShapeAnalysis {
                id,
                stable: r.stable,
                connected: r.connected,
                component_count: r.component_count,
                report: Some(r),
            },
            Err(AnalysisError::EmptyShape) => ShapeAnalysis {
                id,
                stable: false,
                connected: false,
                component_count: 0,
                report: None,
            },
        })
        .collect();
    let n = shapes.len().max(1) as f64;
    let pct = |f: &dyn Fn(&ShapeAnalysis) -> bool| 100.0 * shapes.iter().filter(|s| f(s)).count() as f64 / n;
    let stable_pct = pct(&|s| s.stable);
    let connected_pct = pct(&|s| s.connected);
    let both_pct = pct(&|s| s.stable && s.connected);
    DatasetAnalysis {
        stable_pct,
        connected_pct,
        both_pct,
        connectivity: conn,
        notes: vec![
            format!("connectivity: {conn:?} adjacency"),
            "ground contacts: lowest occupied layer of each shape".into(),
            format!("center of mass on a hull edge counts as stable (tolerance {HULL_TOL})"),
        ],
        shapes,
    }
}
