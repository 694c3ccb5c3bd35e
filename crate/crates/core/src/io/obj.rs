//! Wavefront OBJ export of surface voxels as unit cubes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::grid::VoxelGrid;
use crate::metrics::surface_voxels;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

// Two outward-facing triangles per cube face, indices into CORNERS.
const TRIANGLES: [[usize; 3]; 12] = [
    [0, 3, 2],
    [0, 2, 1],
    [4, 5, 6],
    [4, 6, 7],
    [0, 1, 5],
    [0, 5, 4],
    [3, 7, 6],
    [3, 6, 2],
    [0, 4, 7],
    [0, 7, 3],
    [1, 2, 6],
    [1, 6, 5],
];

/// Vertices are numbered in first-use order while walking surface voxels in
/// index order, so the output is a pure function of the grid.
pub fn export_obj(g: &VoxelGrid) -> String {
    let d = g.dims();
    let mut out = String::new();
    writeln!(out, "# voxel surface export").unwrap();
    writeln!(out, "# dims {} {} {}", d.x, d.y, d.z).unwrap();

    let mut ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut verts: Vec<[usize; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for [x, y, z] in surface_voxels(g) {
        let mut local = [0usize; 8];
        for (slot, c) in local.iter_mut().zip(CORNERS) {
            let v = [x + c[0], y + c[1], z + c[2]];
            *slot = *ids.entry(v).or_insert_with(|| {
                verts.push(v);
                verts.len()
            });
        }
        faces.extend(TRIANGLES.iter().map(|t| [local[t[0]], local[t[1]], local[t[2]]]));
    }
    for [x, y, z] in &verts {
        writeln!(out, "v {x} {y} {z}").unwrap();
    }
    for [a, b, c] in &faces {
        writeln!(out, "f {a} {b} {c}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Dims;

    fn counts(s: &str) -> (usize, usize) {
        let v = s.lines().filter(|l| l.starts_with("v ")).count();
        let f = s.lines().filter(|l| l.starts_with("f ")).count();
        (v, f)
    }

    #[test]
    fn empty_is_header_only() {
        let s = export_obj(&VoxelGrid::new(Dims::cube(4)));
        assert_eq!(counts(&s), (0, 0));
        assert!(s.lines().all(|l| l.starts_with('#')));
    }

    #[test]
    fn single_voxel() {
        let mut g = VoxelGrid::new(Dims::cube(4));
        g.set(1, 2, 3, true);
        assert_eq!(counts(&export_obj(&g)), (8, 12));
    }

    #[test]
    fn bar_shares_a_face() {
        let mut g = VoxelGrid::new(Dims::cube(4));
        g.set(1, 1, 1, true);
        g.set(2, 1, 1, true);
        assert_eq!(counts(&export_obj(&g)), (12, 24));
    }

    #[test]
    fn triangles_face_outward() {
        // signed volume of a closed outward-oriented unit cube is +1
        let mut g = VoxelGrid::new(Dims::cube(2));
        g.set(0, 0, 0, true);
        let s = export_obj(&g);
        let vs: Vec<[f64; 3]> = s
            .lines()
            .filter_map(|l| l.strip_prefix("v "))
            .map(|l| {
                let n: Vec<f64> = l.split(' ').map(|t| t.parse().unwrap()).collect();
                [n[0], n[1], n[2]]
            })
            .collect();
        let mut vol = 0.0;
        for l in s.lines().filter_map(|l| l.strip_prefix("f ")) {
            let i: Vec<usize> = l.split(' ').map(|t| t.parse::<usize>().unwrap() - 1).collect();
            let (a, b, c) = (vs[i[0]], vs[i[1]], vs[i[2]]);
            vol += a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
        }
        assert!((vol / 6.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_voxels_skipped() {
        let g = VoxelGrid::from_fn(Dims::cube(3), |_, _, _| true);
        let (_, f) = counts(&export_obj(&g));
        assert_eq!(f, 26 * 12);
    }
}
