//! Symbolic executor: rasterizes programs into occupancy grids.
//!
//! Frame: x is depth (front/back), y is height, z is width. Cylinders,
//! circles and squares are centered on the voxel `P` in x/z and rise from
//! `P.y`; cuboids, rectangles and lines use `P` as their minimum corner or
//! first endpoint. Out-of-range voxels are clipped.

use thiserror::Error;

use crate::dsl::{Axis, Block, DrawStmt, ForStmt, Limits, LoopKind, Program, ShapeKind, Statement};
use crate::grid::{Dims, VoxelGrid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("execution budget exceeded: loop expands to {expanded} draws, limit {limit}")]
    Budget { expanded: u64, limit: u64 },
}

pub fn render_draw(d: &DrawStmt, dims: Dims) -> VoxelGrid {
    let mut g = VoxelGrid::new(dims);
    render_into(d, &mut g);
    g
}

/// Rasterizes `d` into `g` (union).
pub fn render_into(d: &DrawStmt, g: &mut VoxelGrid) {
    let [px, py, pz] = d.position;
    match d.shape {
        ShapeKind::Cuboid | ShapeKind::Rectangle => {
            let (t, r1, r2) = (d.geom_int(0), d.geom_int(1), d.geom_int(2));
            let tan = d.tilt().to_radians().tan();
            for k in 0..t.max(0) {
                let shear = (f64::from(k) * tan).round() as i32;
                fill_box(g, [px + shear, py + k, pz], [r1, 1, r2]);
            }
        }
        ShapeKind::Cylinder | ShapeKind::Circle => {
            let (t, r) = (d.geom_int(0), d.geom_int(1));
            if r < 0 {
                return;
            }
            for dx in -r..=r {
                // widest |dz| with dx^2 + dz^2 <= r^2
                let rem = r * r - dx * dx;
                let mut w = (f64::from(rem)).sqrt() as i32;
                while w * w > rem {
                    w -= 1;
                }
                while (w + 1) * (w + 1) <= rem {
                    w += 1;
                }
                fill_box(g, [px + dx, py, pz - w], [1, t, 2 * w + 1]);
            }
        }
        ShapeKind::Square => {
            let (t, r) = (d.geom_int(0), d.geom_int(1));
            if r >= 0 {
                fill_box(g, [px - r, py, pz - r], [2 * r + 1, t, 2 * r + 1]);
            }
        }
        ShapeKind::Line => {
            let end = [d.geom_int(0), d.geom_int(1), d.geom_int(2)];
            for p in line_voxels(d.position, end) {
                g.set_clipped(p);
            }
        }
    }
}

/// Fills `[lo, lo + size)` clipped to the grid.
fn fill_box(g: &mut VoxelGrid, lo: [i32; 3], size: [i32; 3]) {
    let dims = g.dims().as_array();
    let mut a = [0usize; 3];
    let mut b = [0usize; 3];
    for i in 0..3 {
        let l = lo[i].max(0);
        let h = (lo[i].saturating_add(size[i])).min(dims[i] as i32);
        if h <= l {
            return;
        }
        a[i] = l as usize;
        b[i] = h as usize;
    }
    for x in a[0]..b[0] {
        for y in a[1]..b[1] {
            for z in a[2]..b[2] {
                g.set(x, y, z, true);
            }
        }
    }
}

/// 3D Bresenham line, inclusive of both endpoints. Endpoints are ordered
/// before stepping so the voxel set does not depend on direction.
pub fn line_voxels(p: [i32; 3], q: [i32; 3]) -> Vec<[i32; 3]> {
    let (a, b) = if p <= q { (p, q) } else { (q, p) };
    let d = [(b[0] - a[0]).abs(), (b[1] - a[1]).abs(), (b[2] - a[2]).abs()];
    let s = [(b[0] - a[0]).signum(), (b[1] - a[1]).signum(), (b[2] - a[2]).signum()];
    let major = if d[0] >= d[1] && d[0] >= d[2] {
        0
    } else if d[1] >= d[2] {
        1
    } else {
        2
    };
    let (m1, m2) = ((major + 1) % 3, (major + 2) % 3);
    let mut cur = a;
    let mut e1 = 2 * d[m1] - d[major];
    let mut e2 = 2 * d[m2] - d[major];
    let mut out = Vec::with_capacity(d[major] as usize + 1);
    out.push(cur);
    for _ in 0..d[major] {
        cur[major] += s[major];
        if e1 >= 0 {
            cur[m1] += s[m1];
            e1 -= 2 * d[major];
        }
        if e2 >= 0 {
            cur[m2] += s[m2];
            e2 -= 2 * d[major];
        }
        e1 += 2 * d[m1];
        e2 += 2 * d[m2];
        out.push(cur);
    }
    out
}

/// Exact sine/cosine for multiples of 90 degrees.
fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let q = deg / 90.0;
    if q.fract() == 0.0 {
        match (q as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        deg.to_radians().sin_cos()
    }
}

/// Rotates an integer point by `deg` about the grid-center line parallel to
/// `axis`, snapping to the nearest voxel.
pub fn rotate_point(p: [i32; 3], deg: f64, axis: Axis, dims: Dims) -> [i32; 3] {
    let (i, j) = match axis {
        Axis::X => (1, 2),
        Axis::Y => (2, 0),
        Axis::Z => (0, 1),
    };
    let d = dims.as_array();
    let ci = (d[i] as f64 - 1.0) / 2.0;
    let cj = (d[j] as f64 - 1.0) / 2.0;
    let (s, c) = sin_cos_deg(deg);
    let (u, v) = (f64::from(p[i]) - ci, f64::from(p[j]) - cj);
    let mut out = p;
    out[i] = (ci + c * u - s * v).round() as i32;
    out[j] = (cj + s * u + c * v).round() as i32;
    out
}

fn translated(d: &DrawStmt, by: [i32; 3]) -> DrawStmt {
    let mut out = d.clone();
    for (c, b) in out.position.iter_mut().zip(by) {
        *c += b;
    }
    if d.shape == ShapeKind::Line {
        for (g, b) in out.geometry.iter_mut().zip(by) {
            *g += f64::from(b);
        }
    }
    out
}

fn rotated(d: &DrawStmt, deg: f64, axis: Axis, dims: Dims) -> DrawStmt {
    let mut out = d.clone();
    out.position = rotate_point(d.position, deg, axis, dims);
    if d.shape == ShapeKind::Line && d.geometry.len() == 3 {
        let end = rotate_point([d.geom_int(0), d.geom_int(1), d.geom_int(2)], deg, axis, dims);
        out.geometry = end.iter().map(|&c| f64::from(c)).collect();
    }
    out
}

/// Expands a loop (inner loops first) into the draws it performs.
pub fn unroll_for(f: &ForStmt, dims: Dims) -> Result<Vec<DrawStmt>, ExecError> {
    let limit = Limits::for_dims(dims).max_expanded;
    let expanded = f.expanded_len();
    if expanded > limit {
        return Err(ExecError::Budget { expanded, limit });
    }
    Ok(unroll_unchecked(f, dims))
}

fn unroll_unchecked(f: &ForStmt, dims: Dims) -> Vec<DrawStmt> {
    let body = expand(&f.body, dims);
    let mut out = Vec::with_capacity(body.len() * f.times as usize);
    for k in 0..f.times as i32 {
        for d in &body {
            out.push(match f.kind {
                LoopKind::Translation { step } => translated(d, [k * step[0], k * step[1], k * step[2]]),
                LoopKind::Rotation { angle, axis } => rotated(d, f64::from(k) * angle, axis, dims),
            });
        }
    }
    out
}

fn expand(stmts: &[Statement], dims: Dims) -> Vec<DrawStmt> {
    let mut out = Vec::new();
    for s in stmts {
        match s {
            Statement::Draw(d) => out.push(d.clone()),
            Statement::For(f) => out.extend(unroll_unchecked(f, dims)),
        }
    }
    out
}

pub fn execute_block(b: &Block, dims: Dims) -> Result<VoxelGrid, ExecError> {
    let mut g = VoxelGrid::new(dims);
    execute_block_into(b, &mut g)?;
    Ok(g)
}

/// Unions the block's voxels into `g`.
pub fn execute_block_into(b: &Block, g: &mut VoxelGrid) -> Result<(), ExecError> {
    match b {
        Block::Draw(d) => render_into(d, g),
        Block::For(f) => {
            for d in unroll_for(f, g.dims())? {
                render_into(&d, g);
            }
        }
    }
    Ok(())
}

/// Union of every block's grid.
pub fn execute_program(p: &Program, dims: Dims) -> Result<VoxelGrid, ExecError> {
    let mut g = VoxelGrid::new(dims);
    for s in &p.statements {
        match s {
            Statement::Draw(d) => render_into(d, &mut g),
            Statement::For(f) => {
                for d in unroll_for(f, dims)? {
                    render_into(&d, &mut g);
                }
            }
        }
    }
    Ok(g)
}
