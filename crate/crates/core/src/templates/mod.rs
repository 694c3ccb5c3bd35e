//! Parametric table and chair templates for synthetic data.
//!
//! A template is a program builder over named integer parameters. Sampling
//! draws every parameter uniformly from its inclusive range and retries
//! until the template's geometric constraint holds. Templates are authored
//! for a 32-voxel cube with parts centered in `x` and `z`.
//!
//! The table families follow the commonly depicted variants (four legs,
//! pedestal, sideboards, shelves, lockers, swivel-style bases) and the chair
//! families are built at the level of seat, back, legs, bars and arms; the
//! exact parameterizations are reconstructions, not transcriptions.

mod chairs;
mod dataset;
mod tables;

pub use dataset::{dataset_records, generate_dataset, DatasetError, DatasetManifest, DatasetRecord, DatasetSpec};

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{validate_program, Axis, DrawStmt, ForStmt, Program, Semantics, ShapeKind, Statement};

/// Grid extent the templates are authored for.
pub const TEMPLATE_EXTENT: i32 = 32;
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Table,
    Chair,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Table => "table",
            Category::Chair => "chair",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamRange {
    pub name: &'static str,
    pub lo: i32,
    pub hi: i32,
}

const fn p(name: &'static str, lo: i32, hi: i32) -> ParamRange {
    ParamRange { name, lo, hi }
}

/// A parameter assignment, ordered by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params(pub BTreeMap<String, i32>);

impl Params {
    /// Panics on an undeclared name, which is a template bug.
    pub fn get(&self, name: &str) -> i32 {
        match self.0.get(name) {
            Some(&v) => v,
            None => panic!("template reads undeclared parameter `{name}`"),
        }
    }
}

pub struct Template {
    pub id: &'static str,
    pub category: Category,
    pub ranges: Vec<ParamRange>,
    build: fn(&Params) -> Program,
    feasible: fn(&Params) -> bool,
}

impl fmt::Debug for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Template")
            .field("id", &self.id)
            .field("category", &self.category)
            .field("ranges", &self.ranges)
            .finish()
    }
}

impl Template {
    pub fn build(&self, params: &Params) -> Program {
        (self.build)(params)
    }

    pub fn is_feasible(&self, params: &Params) -> bool {
        (self.feasible)(params)
    }

    /// Every parameter at the (floored) middle of its range.
    pub fn midpoint(&self) -> Params {
        Params(
            self.ranges
                .iter()
                .map(|r| (r.name.to_string(), (r.lo + r.hi).div_euclid(2)))
                .collect(),
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template `{id}`: no feasible parameters after {attempts} attempts")]
    Infeasible { id: String, attempts: usize },
}

/// Draws a feasible assignment and its program.
pub fn sample<R: Rng + ?Sized>(t: &Template, rng: &mut R) -> Result<(Program, Params), TemplateError> {
    for _ in 0..MAX_ATTEMPTS {
        let params = Params(
            t.ranges
                .iter()
                .map(|r| (r.name.to_string(), rng.gen_range(r.lo..=r.hi)))
                .collect(),
        );
        if !t.is_feasible(&params) {
            continue;
        }
        let program = t.build(&params);
        if validate_program(&program).ok() {
            return Ok((program, params));
        }
    }
    Err(TemplateError::Infeasible {
        id: t.id.to_string(),
        attempts: MAX_ATTEMPTS,
    })
}

pub fn builtin_templates() -> Vec<Template> {
    let mut out = tables::templates();
    out.extend(chairs::templates());
    out
}

pub fn find_template(id: &str) -> Option<Template> {
    builtin_templates().into_iter().find(|t| t.id == id)
}

// Statement helpers shared by the families.

/// Lower bound of a centered span of `len` voxels.
fn centered(len: i32) -> i32 {
    (TEMPLATE_EXTENT - len) / 2
}

fn cub(s: Semantics, at: [i32; 3], t: i32, r1: i32, r2: i32) -> Statement {
    DrawStmt::new(s, ShapeKind::Cuboid, at, &[t, r1, r2].map(f64::from)).into()
}

fn cub_tilt(s: Semantics, at: [i32; 3], t: i32, r1: i32, r2: i32, ang: i32) -> Statement {
    DrawStmt::new(s, ShapeKind::Cuboid, at, &[t, r1, r2, ang].map(f64::from)).into()
}

fn cyl(s: Semantics, at: [i32; 3], t: i32, r: i32) -> Statement {
    DrawStmt::new(s, ShapeKind::Cylinder, at, &[t, r].map(f64::from)).into()
}

fn sqr(s: Semantics, at: [i32; 3], t: i32, r: i32) -> Statement {
    DrawStmt::new(s, ShapeKind::Square, at, &[t, r].map(f64::from)).into()
}

fn line(s: Semantics, from: [i32; 3], to: [i32; 3]) -> Statement {
    DrawStmt::new(s, ShapeKind::Line, from, &to.map(f64::from)).into()
}

fn trans(times: i32, step: [i32; 3], body: Vec<Statement>) -> Statement {
    ForStmt::translation(times as u32, step, body).into()
}

fn rot_y(times: i32, body: Vec<Statement>) -> Statement {
    ForStmt::rotation(times as u32, 360.0 / f64::from(times), Axis::Y, body).into()
}

/// A 2x2 grid of copies of `part` spaced `dx` in x and `dz` in z.
fn grid2x2(dx: i32, dz: i32, part: Statement) -> Statement {
    trans(2, [dx, 0, 0], vec![trans(2, [0, 0, dz], vec![part])])
}
