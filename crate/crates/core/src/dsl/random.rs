//! Random valid programs, for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Axis, DrawStmt, ForStmt, Limits, Program, Semantics, ShapeKind, Statement};
use crate::grid::Dims;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomConfig {
    pub dims: Dims,
    /// Top-level statements drawn uniformly from `1..=max_statements`.
    pub max_statements: usize,
    /// Statements per loop body, at least one.
    pub max_body: usize,
    pub max_times: u32,
    /// Chance that a statement is a loop when nesting is still allowed.
    pub loop_chance: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            dims: Dims::default(),
            max_statements: 6,
            max_body: 3,
            max_times: 5,
            loop_chance: 0.35,
        }
    }
}

/// A draw with every argument inside the limits for `dims`. Extents stay
/// below half the largest grid side so most shapes are not clipped away.
pub fn random_draw<R: Rng + ?Sized>(rng: &mut R, dims: Dims) -> DrawStmt {
    let limits = Limits::for_dims(dims);
    let semantics = *Semantics::ALL.choose(rng).expect("non-empty");
    let shape = *ShapeKind::ALL.choose(rng).expect("non-empty");
    let cm = limits.coord_max;
    let position = [rng.gen_range(0..=cm[0]), rng.gen_range(0..=cm[1]), rng.gen_range(0..=cm[2])];
    let half = (limits.extent_max / 2).max(1);
    let ext = |rng: &mut R| f64::from(rng.gen_range(1..=half));
    let geometry: Vec<f64> = match shape {
        ShapeKind::Cylinder | ShapeKind::Circle | ShapeKind::Square => {
            vec![ext(rng), f64::from(rng.gen_range(0..=(half / 2).max(1)))]
        }
        ShapeKind::Rectangle => vec![ext(rng), ext(rng), ext(rng)],
        ShapeKind::Cuboid => {
            let mut g = vec![ext(rng), ext(rng), ext(rng)];
            if rng.gen_bool(0.3) {
                let m = limits.max_tilt as i32;
                let ang = loop {
                    let a = rng.gen_range(-m..=m);
                    if a != 0 {
                        break a;
                    }
                };
                g.push(f64::from(ang));
            }
            g
        }
        ShapeKind::Line => (0..3).map(|a| f64::from(rng.gen_range(0..=cm[a]))).collect(),
    };
    DrawStmt::new(semantics, shape, position, &geometry)
}

/// A statement expanding to at most `budget` draws, with at most `depth`
/// more levels of loop nesting.
fn random_statement<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomConfig, depth: usize, budget: u64) -> Statement {
    if depth == 0 || budget < 2 || !rng.gen_bool(cfg.loop_chance) {
        return random_draw(rng, cfg.dims).into();
    }
    let times = rng.gen_range(2..=u64::from(cfg.max_times).min(budget).max(2)) as u32;
    let inner = budget / u64::from(times);
    let n = rng.gen_range(1..=(cfg.max_body as u64).min(inner).max(1));
    let body = (0..n).map(|_| random_statement(rng, cfg, depth - 1, inner / n)).collect();
    let kind = rng.gen_range(0..3);
    if kind == 0 {
        let axis = *Axis::ALL.choose(rng).expect("non-empty");
        let angle = if rng.gen_bool(0.5) {
            360.0 / f64::from(times)
        } else {
            f64::from(rng.gen_range(-180..=180))
        };
        ForStmt::rotation(times, angle, axis, body).into()
    } else {
        let d = cfg.dims.as_array();
        let step = [0, 1, 2].map(|a| {
            let s = (d[a] as i32 / 4).max(1);
            rng.gen_range(-s..=s)
        });
        ForStmt::translation(times, step, body).into()
    }
}

/// A program that passes validation for `cfg.dims`.
pub fn random_program<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomConfig) -> Program {
    let limits = Limits::for_dims(cfg.dims);
    let n = rng.gen_range(1..=cfg.max_statements.clamp(1, limits.max_statements));
    let share = limits.max_expanded / n as u64;
    Program::new((0..n).map(|_| random_statement(rng, cfg, limits.max_depth, share)).collect())
}
