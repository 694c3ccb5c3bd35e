use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DrawStmt, ForStmt, LoopKind, Program, ShapeKind, Statement};
use crate::grid::Dims;

/// Bounds a valid program must respect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub max_statements: usize,
    pub max_expanded: u64,
    pub max_depth: usize,
    /// Largest legal coordinate on each axis; the smallest is 0.
    pub coord_max: [i32; 3],
    pub extent_max: i32,
    pub max_tilt: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits::for_dims(Dims::default())
    }
}

impl Limits {
    pub fn for_dims(dims: Dims) -> Self {
        let d = dims.as_array();
        Limits {
            max_statements: 32,
            max_expanded: 1024,
            max_depth: 3,
            coord_max: [d[0] as i32 - 1, d[1] as i32 - 1, d[2] as i32 - 1],
            extent_max: d.into_iter().max().unwrap_or(1) as i32,
            max_tilt: 45.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    Arity,
    Range,
    Times,
    EmptyBody,
    Nesting,
    Budget,
    TooManyStatements,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_program(p: &Program) -> ValidationReport {
    validate_with(p, &Limits::default())
}

/// Checks every structural and range invariant; never stops at the first
/// problem.
pub fn validate_with(p: &Program, limits: &Limits) -> ValidationReport {
    let mut v = Validator { limits, out: Vec::new() };
    if p.statements.len() > limits.max_statements {
        v.push(
            "program".into(),
            ViolationKind::TooManyStatements,
            format!("{} top-level statements, limit {}", p.statements.len(), limits.max_statements),
        );
    }
    for (i, s) in p.statements.iter().enumerate() {
        v.statement(s, format!("stmt[{i}]"), 0);
    }
    let total = super::expanded_len(&p.statements);
    let any_loop_over = v.out.iter().any(|x| x.kind == ViolationKind::Budget);
    if total > limits.max_expanded && !any_loop_over {
        v.push(
            "program".into(),
            ViolationKind::Budget,
            format!("expands to {total} draws, limit {}", limits.max_expanded),
        );
    }
    ValidationReport { violations: v.out }
}

struct Validator<'a> {
    limits: &'a Limits,
    out: Vec<Violation>,
}

impl Validator<'_> {
    fn push(&mut self, path: String, kind: ViolationKind, message: String) {
        self.out.push(Violation { path, kind, message });
    }

    fn statement(&mut self, s: &Statement, path: String, level: usize) {
        match s {
            Statement::Draw(d) => self.draw(d, &path),
            Statement::For(f) => self.for_stmt(f, path, level + 1),
        }
    }

    fn for_stmt(&mut self, f: &ForStmt, path: String, level: usize) {
        if level == self.limits.max_depth + 1 {
            self.push(
                path.clone(),
                ViolationKind::Nesting,
                format!("loop nesting depth exceeds {}", self.limits.max_depth),
            );
        }
        if f.times < 2 {
            self.push(
                path.clone(),
                ViolationKind::Times,
                format!("times = {}, must be >= 2", f.times),
            );
        }
        if let LoopKind::Rotation { angle, .. } = f.kind {
            if !angle.is_finite() || angle.abs() > 360.0 {
                self.push(
                    path.clone(),
                    ViolationKind::Range,
                    format!("rotation angle {angle} outside [-360, 360]"),
                );
            }
        }
        if f.body.is_empty() {
            self.push(path.clone(), ViolationKind::EmptyBody, "loop body is empty".into());
        }
        let n = f.expanded_len();
        if n > self.limits.max_expanded {
            self.push(
                path.clone(),
                ViolationKind::Budget,
                format!("loop expands to {n} draws, limit {}", self.limits.max_expanded),
            );
        }
        for (i, s) in f.body.iter().enumerate() {
            self.statement(s, format!("{path}.body[{i}]"), level);
        }
    }

    fn draw(&mut self, d: &DrawStmt, path: &str) {
        let (lo, hi) = d.shape.arity();
        let n = d.geometry.len();
        if n < lo || n > hi {
            let want = if lo == hi { lo.to_string() } else { format!("{lo}..={hi}") };
            self.push(
                path.into(),
                ViolationKind::Arity,
                format!("{} takes {want} geometry values, got {n}", d.shape.keyword()),
            );
            return;
        }
        for (axis, &c) in d.position.iter().enumerate() {
            if c < 0 || c > self.limits.coord_max[axis] {
                self.push(
                    path.into(),
                    ViolationKind::Range,
                    format!("position {c} outside [0, {}]", self.limits.coord_max[axis]),
                );
            }
        }
        let emax = self.limits.extent_max;
        match d.shape {
            ShapeKind::Cylinder | ShapeKind::Circle | ShapeKind::Square => {
                self.int_in(path, "t", d.geometry[0], 1, emax);
                self.int_in(path, "r", d.geometry[1], 0, emax);
            }
            ShapeKind::Rectangle | ShapeKind::Cuboid => {
                self.int_in(path, "t", d.geometry[0], 1, emax);
                self.int_in(path, "r1", d.geometry[1], 1, emax);
                self.int_in(path, "r2", d.geometry[2], 1, emax);
                if let Some(&ang) = d.geometry.get(3) {
                    let m = self.limits.max_tilt;
                    if !ang.is_finite() || ang.abs() > m {
                        self.push(path.into(), ViolationKind::Range, format!("tilt {ang} outside [-{m}, {m}]"));
                    }
                }
            }
            ShapeKind::Line => {
                for (axis, &g) in d.geometry.iter().enumerate() {
                    self.int_in(path, "endpoint", g, 0, self.limits.coord_max[axis]);
                }
            }
        }
    }

    fn int_in(&mut self, path: &str, name: &str, v: f64, lo: i32, hi: i32) {
        if v.fract() != 0.0 || !v.is_finite() {
            self.push(path.into(), ViolationKind::Range, format!("{name} = {v} is not an integer"));
        } else if v < f64::from(lo) || v > f64::from(hi) {
            self.push(
                path.into(),
                ViolationKind::Range,
                format!("{name} = {v} outside [{lo}, {hi}]"),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Semantics, ShapeKind};

    fn cyl(g: &[f64]) -> Statement {
        DrawStmt::new(Semantics::Leg, ShapeKind::Cylinder, [4, 0, 4], g).into()
    }

    #[test]
    fn empty_program_is_valid() {
        assert!(validate_program(&Program::default()).ok());
    }

    #[test]
    fn arity_violation_reports_path() {
        let r = validate_program(&Program::new(vec![cyl(&[10.0])]));
        assert!(!r.ok());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, "stmt[0]");
        assert_eq!(r.violations[0].kind, ViolationKind::Arity);
    }

    #[test]
    fn depth_four_nesting_rejected() {
        let mut s = cyl(&[4.0, 1.0]);
        for _ in 0..4 {
            s = ForStmt::translation(2, [0, 0, 1], vec![s]).into();
        }
        let r = validate_program(&Program::new(vec![s]));
        let nest: Vec<_> = r.violations.iter().filter(|v| v.kind == ViolationKind::Nesting).collect();
        assert_eq!(nest.len(), 1);
        assert_eq!(nest[0].path, "stmt[0].body[0].body[0].body[0]");
    }

    #[test]
    fn depth_three_nesting_accepted() {
        let mut s = cyl(&[4.0, 1.0]);
        for _ in 0..3 {
            s = ForStmt::translation(2, [0, 0, 1], vec![s]).into();
        }
        assert!(validate_program(&Program::new(vec![s])).ok());
    }

    #[test]
    fn nested_paths() {
        let f = ForStmt::translation(2, [0, 0, 6], vec![cyl(&[4.0, 1.0]), cyl(&[0.0, 1.0])]);
        let r = validate_program(&Program::new(vec![cyl(&[4.0, 1.0]), f.into()]));
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, "stmt[1].body[1]");
    }

    #[test]
    fn ranges_and_loop_fields() {
        let bad = DrawStmt::new(Semantics::Top, ShapeKind::Cuboid, [32, -1, 0], &[2.5, 4.0, 40.0, 60.0]);
        let r = validate_program(&Program::new(vec![bad.into()]));
        // two positions, fractional t, r2 too large, tilt too steep
        assert_eq!(r.violations.len(), 5, "{r}");

        let f = ForStmt::translation(1, [0, 0, 0], vec![]);
        let r = validate_program(&Program::new(vec![f.into()]));
        let kinds: Vec<_> = r.violations.iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::Times, ViolationKind::EmptyBody]);
    }

    #[test]
    fn budgets() {
        let many = Program::new(vec![cyl(&[4.0, 1.0]); 33]);
        let r = validate_program(&many);
        assert_eq!(r.violations[0].kind, ViolationKind::TooManyStatements);

        let inner = ForStmt::translation(32, [0, 0, 0], vec![cyl(&[4.0, 1.0])]);
        let outer = ForStmt::translation(33, [0, 0, 0], vec![inner.into()]);
        let r = validate_program(&Program::new(vec![outer.into()]));
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::Budget);
        assert_eq!(r.violations[0].path, "stmt[0]");

        let f = ForStmt::translation(32, [0, 0, 0], vec![cyl(&[4.0, 1.0]); 32]);
        let p = Program::new(vec![f.into(), cyl(&[4.0, 1.0])]);
        let r = validate_program(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, "program");
    }

    #[test]
    fn zero_radius_is_valid() {
        assert!(validate_program(&Program::new(vec![cyl(&[1.0, 0.0])])).ok());
    }
}
