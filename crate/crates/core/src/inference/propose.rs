//! Candidate blocks for one greedy round.
//!
//! Draws are seeded from residual voxels on a coarse lattice (plus one
//! anchor per residual component). From each seed we grow maximal boxes in
//! every axis order, fit centered cylinders and squares from axis runs,
//! estimate a cuboid tilt from the layer-to-layer shear, and, for thin
//! components, join extremal voxels with lines. The best draws are then
//! wrapped in translation loops (one and two axes) and rotation loops
//! whose copies land on the target.

use std::collections::HashSet;

use rayon::prelude::*;

use super::score::Scorer;
use super::SearchConfig;
use crate::analysis::{connected_components, Connectivity};
use crate::dsl::{validate_with, Axis, Block, DrawStmt, ForStmt, Limits, Program, Semantics, ShapeKind, Statement};
use crate::exec::{execute_block, render_draw, unroll_for};
use crate::grid::VoxelGrid;

/// Fraction of a loop copy that must land on the target.
pub(crate) const COPY_COVERAGE: f64 = 0.9;
/// Rotation loop sizes tried around each axis.
pub(crate) const ROTATION_TIMES: [u32; 4] = [2, 3, 4, 5];
const BOX_ORDERS: [[usize; 3]; 6] = [[0, 2, 1], [2, 0, 1], [0, 1, 2], [1, 0, 2], [1, 2, 0], [2, 1, 0]];
/// Draw candidates one seed can produce: six boxes in each of two grids,
/// four cylinders, four squares and one tilted cuboid.
pub(crate) const DRAWS_PER_SEED: usize = 2 * BOX_ORDERS.len() + 9;

type Key = (ShapeKind, [i32; 3], Vec<i64>);

fn key(d: &DrawStmt) -> Key {
    (
        d.shape,
        d.position,
        d.canonical_geometry().iter().map(|v| (v * 1000.0).round() as i64).collect(),
    )
}

fn occ(g: &VoxelGrid, p: [i32; 3]) -> bool {
    g.get_i32(p)
}

/// Inclusive run of occupied voxels through `p` along `axis`.
fn run(g: &VoxelGrid, p: [i32; 3], axis: usize) -> Option<(i32, i32)> {
    if !occ(g, p) {
        return None;
    }
    let (mut lo, mut hi) = (p, p);
    while occ(g, {
        let mut q = lo;
        q[axis] -= 1;
        q
    }) {
        lo[axis] -= 1;
    }
    while occ(g, {
        let mut q = hi;
        q[axis] += 1;
        q
    }) {
        hi[axis] += 1;
    }
    Some((lo[axis], hi[axis]))
}

/// Grows a box from `p`, extending one axis at a time while the next face
/// is fully occupied.
fn grow_box(g: &VoxelGrid, p: [i32; 3], order: [usize; 3]) -> ([i32; 3], [i32; 3]) {
    let (mut lo, mut hi) = (p, p);
    for &a in &order {
        for dir in [1, -1] {
            loop {
                let at = if dir > 0 { hi[a] + 1 } else { lo[a] - 1 };
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                let full = (lo[b]..=hi[b]).all(|u| {
                    (lo[c]..=hi[c]).all(|v| {
                        let mut q = [0; 3];
                        q[a] = at;
                        q[b] = u;
                        q[c] = v;
                        occ(g, q)
                    })
                });
                if !full {
                    break;
                }
                if dir > 0 {
                    hi[a] += 1;
                } else {
                    lo[a] -= 1;
                }
            }
        }
    }
    (lo, hi)
}

struct Labeler {
    floor: i32,
    ceiling: i32,
}

impl Labeler {
    fn new(target: &VoxelGrid) -> Self {
        let (lo, hi) = target.bounding_box().map_or(([0; 3], [0; 3]), |b| b);
        Labeler {
            floor: lo[1] as i32,
            ceiling: hi[1] as i32,
        }
    }

    /// Semantic role guessed from the primitive's proportions and height.
    fn label(&self, shape: ShapeKind, size: [i32; 3], y0: i32) -> Semantics {
        let [sx, sy, sz] = size;
        let grounded = y0 <= self.floor;
        let top = y0 + sy > self.ceiling - 2;
        if shape == ShapeKind::Line {
            return Semantics::Leg;
        }
        if sy >= 2 * sx.max(sz) {
            return if grounded { Semantics::Leg } else { Semantics::VerticalBoard };
        }
        if sy <= 3 && sx >= 4 && sz >= 4 {
            return if top {
                Semantics::Top
            } else if grounded {
                Semantics::Base
            } else {
                Semantics::Layer
            };
        }
        if sy >= 4 && sx.min(sz) <= 3 {
            return if grounded { Semantics::Sideboard } else { Semantics::Back };
        }
        if sy <= 3 {
            return Semantics::HorizontalBar;
        }
        match (grounded, shape) {
            (true, ShapeKind::Cuboid) => Semantics::Locker,
            (true, _) => Semantics::Support,
            (false, _) => Semantics::Top,
        }
    }

    fn cuboid(&self, lo: [i32; 3], hi: [i32; 3]) -> DrawStmt {
        let size = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        DrawStmt::new(
            self.label(ShapeKind::Cuboid, size, lo[1]),
            ShapeKind::Cuboid,
            lo,
            &[size[1], size[0], size[2]].map(f64::from),
        )
    }

    fn centered(&self, shape: ShapeKind, c: [i32; 3], t: i32, r: i32) -> DrawStmt {
        let size = [2 * r + 1, t, 2 * r + 1];
        DrawStmt::new(self.label(shape, size, c[1]), shape, c, &[t, r].map(f64::from))
    }
}

fn centered_fits(g: &VoxelGrid, p: [i32; 3], first: usize, lab: &Labeler) -> Vec<DrawStmt> {
    let second = if first == 0 { 2 } else { 0 };
    let Some((a_lo, a_hi)) = run(g, p, first) else {
        return Vec::new();
    };
    let mut c = p;
    c[first] = (a_lo + a_hi).div_euclid(2);
    let Some((b_lo, b_hi)) = run(g, c, second) else {
        return Vec::new();
    };
    c[second] = (b_lo + b_hi).div_euclid(2);
    let (Some(ra), Some(rb)) = (run(g, c, first), run(g, c, second)) else {
        return Vec::new();
    };
    c[first] = (ra.0 + ra.1).div_euclid(2);
    let r = ((ra.1 - ra.0) / 2).max((rb.1 - rb.0) / 2);
    let Some((y_lo, y_hi)) = run(g, c, 1) else {
        return Vec::new();
    };
    // stacked parts share the axis; keep only the layers as wide as this one
    let width = |y: i32| run(g, [c[0], y, c[2]], first).map(|(a, b)| b - a);
    let w = width(p[1]);
    let (mut s_lo, mut s_hi) = (p[1], p[1]);
    while s_lo > y_lo && width(s_lo - 1) == w {
        s_lo -= 1;
    }
    while s_hi < y_hi && width(s_hi + 1) == w {
        s_hi += 1;
    }
    let mut out = Vec::new();
    for (lo, hi) in [(y_lo, y_hi), (s_lo, s_hi)] {
        c[1] = lo;
        let t = hi - lo + 1;
        out.push(lab.centered(ShapeKind::Cylinder, c, t, r));
        out.push(lab.centered(ShapeKind::Square, c, t, r));
    }
    if (s_lo, s_hi) == (y_lo, y_hi) {
        out.truncate(2);
    }
    out
}

/// Follows the x-run through `p` up and down the layers, then turns the
/// observed shear into a tilt angle.
fn tilted_fit(g: &VoxelGrid, p: [i32; 3], lab: &Labeler, max_tilt: f64) -> Option<DrawStmt> {
    let (xa, xb) = run(g, p, 0)?;
    let (za, zb) = run(g, p, 2)?;
    let follow = |dir: i32| {
        let mut out = Vec::new();
        let (mut a, mut b) = (xa, xb);
        let mut y = p[1] + dir;
        loop {
            let hit = (a - 2..=b + 2).find(|&x| occ(g, [x, y, p[2]]));
            let Some(x) = hit else { break };
            let Some((na, nb)) = run(g, [x, y, p[2]], 0) else { break };
            if ((nb - na) - (b - a)).abs() > 1 {
                break;
            }
            out.push((y, na));
            a = na;
            b = nb;
            y += dir;
        }
        out
    };
    let mut layers = follow(-1);
    layers.reverse();
    layers.push((p[1], xa));
    layers.extend(follow(1));
    let t = layers.len() as i32;
    let (y0, s0) = layers[0];
    let (_, s1) = layers[layers.len() - 1];
    if t < 3 || s0 == s1 {
        return None;
    }
    // integer angle whose per-layer shear best reproduces the observed starts
    let lim = max_tilt.floor() as i32;
    let slope_deg = (f64::from(s1 - s0) / f64::from(t - 1)).atan().to_degrees();
    let ang = (-lim..=lim)
        .map(f64::from)
        .min_by(|&a, &b| {
            let err = |ang: f64| -> i64 {
                let tan = ang.to_radians().tan();
                layers
                    .iter()
                    .enumerate()
                    .map(|(k, &(_, s))| i64::from((s0 + (k as f64 * tan).round() as i32 - s).abs()))
                    .sum()
            };
            err(a)
                .cmp(&err(b))
                .then((a - slope_deg).abs().total_cmp(&(b - slope_deg).abs()))
        })
        .unwrap_or(0.0);
    if ang == 0.0 {
        return None;
    }
    let (r1, r2) = (xb - xa + 1, zb - za + 1);
    let sem = lab.label(ShapeKind::Cuboid, [r1, t, r2], y0);
    Some(DrawStmt::new(
        sem,
        ShapeKind::Cuboid,
        [s0, y0, za],
        &[f64::from(t), f64::from(r1), f64::from(r2), ang],
    ))
}

/// Lines between extremal voxels of each thin residual component.
fn line_fits(residual: &VoxelGrid) -> Vec<DrawStmt> {
    let labels = connected_components(residual, Connectivity::TwentySix);
    let mut comps: Vec<Vec<[i32; 3]>> = vec![Vec::new(); labels.count];
    for i in residual.occupied_indices() {
        let [x, y, z] = residual.dims().coords(i);
        comps[labels.labels[i] as usize - 1].push([x as i32, y as i32, z as i32]);
    }
    let mut out = Vec::new();
    for c in comps {
        let mut ext = Vec::new();
        for a in 0..3 {
            let lo = *c.iter().min_by_key(|p| p[a]).unwrap();
            let hi = *c.iter().max_by_key(|p| p[a]).unwrap();
            ext.push(lo);
            ext.push(hi);
        }
        let major = (0..3).map(|a| ext[2 * a + 1][a] - ext[2 * a][a] + 1).max().unwrap();
        if c.len() as i32 > 3 * major || major < 2 {
            continue;
        }
        let mut seen = HashSet::new();
        ext.retain(|p| seen.insert(*p));
        for i in 0..ext.len() {
            for j in i + 1..ext.len() {
                let (a, b) = (ext[i], ext[j]);
                out.push(DrawStmt::new(Semantics::Leg, ShapeKind::Line, a, &b.map(f64::from)));
            }
        }
    }
    out
}

fn seeds(residual: &VoxelGrid, stride: usize) -> Vec<[i32; 3]> {
    let Some((lo, hi)) = residual.bounding_box() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for x in (lo[0]..=hi[0]).step_by(stride) {
        for y in (lo[1]..=hi[1]).step_by(stride) {
            for z in (lo[2]..=hi[2]).step_by(stride) {
                if residual.get(x, y, z) {
                    out.push([x as i32, y as i32, z as i32]);
                }
            }
        }
    }
    // one anchor per component so thin parts between lattice points are seen
    let labels = connected_components(residual, Connectivity::TwentySix);
    let mut seen = vec![false; labels.count];
    for i in residual.occupied_indices() {
        let l = labels.labels[i] as usize - 1;
        if !seen[l] {
            seen[l] = true;
            let [x, y, z] = residual.dims().coords(i);
            out.push([x as i32, y as i32, z as i32]);
        }
    }
    out
}

fn valid(s: &Statement, limits: &Limits) -> bool {
    validate_with(&Program::new(vec![s.clone()]), limits).ok()
}

/// Draw candidates in enumeration order, deduplicated and valid.
pub(crate) fn draw_candidates(target: &VoxelGrid, residual: &VoxelGrid, cfg: &SearchConfig, limits: &Limits) -> Vec<DrawStmt> {
    let lab = Labeler::new(target);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |d: DrawStmt| {
        if seen.insert(key(&d)) && valid(&Statement::Draw(d.clone()), limits) {
            out.push(d);
        }
    };
    for p in seeds(residual, cfg.candidate_grid_stride) {
        for g in [residual, target] {
            for order in BOX_ORDERS {
                let (lo, hi) = grow_box(g, p, order);
                push(lab.cuboid(lo, hi));
            }
        }
        for first in [2, 0] {
            for d in centered_fits(residual, p, first, &lab) {
                push(d);
            }
        }
        if let Some(d) = tilted_fit(residual, p, &lab, limits.max_tilt) {
            push(d);
        }
    }
    for d in line_fits(residual) {
        push(d);
    }
    out
}

fn voxels(g: &VoxelGrid) -> Vec<[i32; 3]> {
    g.occupied().map(|[x, y, z]| [x as i32, y as i32, z as i32]).collect()
}

/// Number of consecutive shifted copies (by `j * step`, `j >= 1`) that stay
/// inside the grid and mostly on the target, stopping at `max_copies`.
fn copies_on_target(vox: &[[i32; 3]], step: [i32; 3], target: &VoxelGrid, max_copies: u32) -> u32 {
    let need = (COPY_COVERAGE * vox.len() as f64).ceil() as usize;
    let mut j = 1;
    while j <= max_copies {
        let mut hits = 0;
        for p in vox {
            let q = [
                p[0] + j as i32 * step[0],
                p[1] + j as i32 * step[1],
                p[2] + j as i32 * step[2],
            ];
            if !target.dims().contains(q) {
                return j - 1;
            }
            hits += target.get_i32(q) as usize;
        }
        if hits < need {
            return j - 1;
        }
        j += 1;
    }
    max_copies
}

fn translation_wrappers(
    body: Statement,
    vox: &[[i32; 3]],
    skip_axis: Option<usize>,
    target: &VoxelGrid,
    limits: &Limits,
) -> Vec<(ForStmt, usize)> {
    let body_len = crate::dsl::expanded_len(std::slice::from_ref(&body)).max(1);
    let max_times = (limits.max_expanded / body_len).min(u64::from(u32::MAX)) as u32;
    if max_times < 2 {
        return Vec::new();
    }
    let dims = target.dims().as_array();
    let mut out = Vec::new();
    for a in (0..3).filter(|&a| Some(a) != skip_axis) {
        for m in 1..dims[a] as i32 {
            for delta in [m, -m] {
                let mut step = [0; 3];
                step[a] = delta;
                let k = copies_on_target(vox, step, target, max_times - 1);
                if k >= 1 {
                    out.push((ForStmt::translation(k + 1, step, vec![body.clone()]), a));
                }
            }
        }
    }
    out
}

fn rotation_wrappers(d: &DrawStmt, n_vox: usize, target: &VoxelGrid, limits: &Limits) -> Vec<ForStmt> {
    let dims = target.dims();
    let need = (COPY_COVERAGE * n_vox as f64).ceil() as usize;
    let mut out = Vec::new();
    for axis in Axis::ALL {
        for times in ROTATION_TIMES {
            let f = ForStmt::rotation(times, 360.0 / f64::from(times), axis, vec![Statement::Draw(d.clone())]);
            if !valid(&Statement::For(f.clone()), limits) {
                continue;
            }
            let Ok(copies) = unroll_for(&f, dims) else { continue };
            let ok = copies.iter().skip(1).all(|c| {
                let g = render_draw(c, dims);
                g.count() == n_vox && g.intersection_count(target) >= need
            });
            if ok {
                out.push(f);
            }
        }
    }
    out
}

/// Loop wrappers around `draws`, in enumeration order: per draw, one-axis
/// translations, then two-axis translations built on the strongest one-axis
/// loop per axis, then rotations.
pub(crate) fn wrapper_candidates(draws: &[DrawStmt], target: &VoxelGrid, limits: &Limits) -> Vec<ForStmt> {
    let dims = target.dims();
    let per_draw: Vec<Vec<ForStmt>> = draws
        .par_iter()
        .map(|d| {
            let g = render_draw(d, dims);
            let vox = voxels(&g);
            if vox.is_empty() {
                return Vec::new();
            }
            let mut out = Vec::new();
            let singles = translation_wrappers(Statement::Draw(d.clone()), &vox, None, target, limits);
            let mut best: [Option<(u32, &ForStmt)>; 3] = [None, None, None];
            for (f, a) in &singles {
                if best[*a].is_none_or(|(t, _)| f.times > t) {
                    best[*a] = Some((f.times, f));
                }
            }
            for (a, inner) in best.iter().enumerate() {
                let Some((_, inner)) = inner else { continue };
                let Ok(g) = execute_block(&Block::For((*inner).clone()), dims) else {
                    continue;
                };
                let inner_vox = voxels(&g);
                let nested = translation_wrappers(Statement::For((*inner).clone()), &inner_vox, Some(a), target, limits);
                out.extend(nested.into_iter().map(|(f, _)| f));
            }
            let mut all: Vec<ForStmt> = singles.into_iter().map(|(f, _)| f).collect();
            all.extend(out);
            all.extend(rotation_wrappers(d, vox.len(), target, limits));
            all.retain(|f| valid(&Statement::For(f.clone()), limits));
            all
        })
        .collect();
    per_draw.into_iter().flatten().collect()
}

/// Every candidate with its score, in enumeration order: all draws, then
/// the wrappers of the `wrap_top` best-scoring draws.
pub(crate) fn scored_candidates(
    scorer: &Scorer<'_>,
    residual: &VoxelGrid,
    cfg: &SearchConfig,
    limits: &Limits,
    call_cap: u64,
) -> (Vec<(Block, f64)>, u64) {
    let target = scorer.target();
    let dims = target.dims();
    let mut draws = draw_candidates(target, residual, cfg, limits);
    draws.truncate(call_cap as usize);
    let draw_scores: Vec<f64> = draws.par_iter().map(|d| scorer.gain(&render_draw(d, dims))).collect();
    let mut calls = draws.len() as u64;

    let mut order: Vec<usize> = (0..draws.len()).collect();
    order.sort_by(|&i, &j| draw_scores[j].total_cmp(&draw_scores[i]).then(i.cmp(&j)));
    let top: Vec<DrawStmt> = order.iter().take(cfg.beam_width).map(|&i| draws[i].clone()).collect();

    let mut wrappers = wrapper_candidates(&top, target, limits);
    wrappers.truncate(call_cap.saturating_sub(calls) as usize);
    let wrapper_scores: Vec<f64> = wrappers
        .par_iter()
        .map(|f| execute_block(&Block::For(f.clone()), dims).map_or(f64::NEG_INFINITY, |g| scorer.gain(&g)))
        .collect();
    calls += wrappers.len() as u64;

    let mut out: Vec<(Block, f64)> = draws.into_iter().map(Block::Draw).zip(draw_scores).collect();
    out.extend(wrappers.into_iter().map(Block::For).zip(wrapper_scores));
    (out, calls)
}
