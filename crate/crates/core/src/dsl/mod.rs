//! Shape-program abstract syntax: `draw` statements for semantic primitives
//! and `for` statements that repeat a sub-program under translation or
//! rotation.

mod random;
mod text;
mod token;
mod validate;

pub use random::{random_draw, random_program, RandomConfig};
pub use text::{parse_text, parse_text_with, print_text, ParseError, SyntaxError};
pub use token::{
    detokenize, read_token_json, read_token_lines, tokenize, write_token_json, write_token_lines, TokenError, TokenProgram,
    TokenStep, Vocabulary, ARG_SLOTS,
};
pub use validate::{validate_program, validate_with, Limits, ValidationReport, Violation};

use std::fmt;

use serde::{Deserialize, Serialize};

/// Semantic role of a primitive. Never affects the rendered geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Semantics {
    Leg,
    Top,
    Layer,
    Support,
    Base,
    Sideboard,
    HorizontalBar,
    VerticalBoard,
    Locker,
    Back,
    BackSupport,
    ChairBeam,
}

impl Semantics {
    pub const ALL: [Semantics; 12] = [
        Semantics::Leg,
        Semantics::Top,
        Semantics::Layer,
        Semantics::Support,
        Semantics::Base,
        Semantics::Sideboard,
        Semantics::HorizontalBar,
        Semantics::VerticalBoard,
        Semantics::Locker,
        Semantics::Back,
        Semantics::BackSupport,
        Semantics::ChairBeam,
    ];

    /// Keyword used by the text syntax.
    pub fn keyword(self) -> &'static str {
        match self {
            Semantics::Leg => "Leg",
            Semantics::Top => "Top",
            Semantics::Layer => "Layer",
            Semantics::Support => "Support",
            Semantics::Base => "Base",
            Semantics::Sideboard => "Sideboard",
            Semantics::HorizontalBar => "HBar",
            Semantics::VerticalBoard => "VBoard",
            Semantics::Locker => "Locker",
            Semantics::Back => "Back",
            Semantics::BackSupport => "BackSup",
            Semantics::ChairBeam => "Beam",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.keyword() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Primitive shape family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeKind {
    Cuboid,
    Cylinder,
    Circle,
    Square,
    Rectangle,
    Line,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Cuboid,
        ShapeKind::Cylinder,
        ShapeKind::Circle,
        ShapeKind::Square,
        ShapeKind::Rectangle,
        ShapeKind::Line,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ShapeKind::Cuboid => "Cub",
            ShapeKind::Cylinder => "Cyl",
            ShapeKind::Circle => "Cir",
            ShapeKind::Square => "Sqr",
            ShapeKind::Rectangle => "Rect",
            ShapeKind::Line => "Line",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.keyword() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Accepted geometry lengths, inclusive.
    pub fn arity(self) -> (usize, usize) {
        match self {
            ShapeKind::Cylinder | ShapeKind::Circle | ShapeKind::Square => (2, 2),
            ShapeKind::Rectangle | ShapeKind::Line => (3, 3),
            ShapeKind::Cuboid => (3, 4),
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Rotation axis of a `for` loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn keyword(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        }
    }
}

/// A single primitive.
///
/// `geometry` is interpreted per shape kind:
///
/// | kind                         | geometry            |
/// |------------------------------|---------------------|
/// | `Cylinder`, `Circle`, `Square` | `(t, r)`          |
/// | `Rectangle`                  | `(t, r1, r2)`       |
/// | `Cuboid`                     | `(t, r1, r2[, ang])` |
/// | `Line`                       | `(x2, y2, z2)`      |
///
/// Extents and endpoints are integral voxel counts stored as `f64` so that
/// malformed input stays representable for validation. A cuboid's tilt of
/// zero is equivalent to an omitted tilt, and equality treats them alike.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DrawStmt {
    pub semantics: Semantics,
    pub shape: ShapeKind,
    pub position: [i32; 3],
    pub geometry: Vec<f64>,
}

impl DrawStmt {
    pub fn new(semantics: Semantics, shape: ShapeKind, position: [i32; 3], geometry: &[f64]) -> Self {
        DrawStmt {
            semantics,
            shape,
            position,
            geometry: geometry.to_vec(),
        }
    }

    /// Geometry with a trailing zero cuboid tilt removed.
    pub fn canonical_geometry(&self) -> &[f64] {
        match (self.shape, self.geometry.as_slice()) {
            (ShapeKind::Cuboid, [rest @ .., ang]) if self.geometry.len() == 4 && *ang == 0.0 => rest,
            (_, g) => g,
        }
    }

    /// Integer geometry entry `i`, rounding toward the nearest voxel.
    pub fn geom_int(&self, i: usize) -> i32 {
        self.geometry.get(i).map_or(0, |v| v.round() as i32)
    }

    /// Cuboid tilt in degrees; zero for other kinds.
    pub fn tilt(&self) -> f64 {
        match self.shape {
            ShapeKind::Cuboid => self.geometry.get(3).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }
}

impl PartialEq for DrawStmt {
    fn eq(&self, other: &Self) -> bool {
        self.semantics == other.semantics
            && self.shape == other.shape
            && self.position == other.position
            && self.canonical_geometry() == other.canonical_geometry()
    }
}

/// Per-iteration transform of a `for` loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LoopKind {
    /// Offset every position by `k * step` in iteration `k`.
    Translation { step: [i32; 3] },
    /// Rotate every position by `k * angle` degrees about the grid-center
    /// line parallel to `axis`.
    Rotation { angle: f64, axis: Axis },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForStmt {
    pub kind: LoopKind,
    pub times: u32,
    pub body: Vec<Statement>,
}

impl ForStmt {
    pub fn translation(times: u32, step: [i32; 3], body: Vec<Statement>) -> Self {
        ForStmt {
            kind: LoopKind::Translation { step },
            times,
            body,
        }
    }

    pub fn rotation(times: u32, angle: f64, axis: Axis, body: Vec<Statement>) -> Self {
        ForStmt {
            kind: LoopKind::Rotation { angle, axis },
            times,
            body,
        }
    }

    /// Number of draw statements this loop unrolls to.
    pub fn expanded_len(&self) -> u64 {
        u64::from(self.times).saturating_mul(expanded_len(&self.body))
    }

    /// Loop nesting depth; a loop with only draws in its body has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .body
            .iter()
            .map(|s| match s {
                Statement::For(f) => f.depth(),
                Statement::Draw(_) => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Statement {
    Draw(DrawStmt),
    For(ForStmt),
}

impl From<DrawStmt> for Statement {
    fn from(d: DrawStmt) -> Self {
        Statement::Draw(d)
    }
}

impl From<ForStmt> for Statement {
    fn from(f: ForStmt) -> Self {
        Statement::For(f)
    }
}

/// Draw statements reached after unrolling every loop in `stmts`.
pub fn expanded_len(stmts: &[Statement]) -> u64 {
    stmts
        .iter()
        .map(|s| match s {
            Statement::Draw(_) => 1,
            Statement::For(f) => f.expanded_len(),
        })
        .fold(0u64, u64::saturating_add)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn new(statements: Vec<Statement>) -> Self {
        Program { statements }
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Splits the program into execution blocks: each top-level statement
    /// (a single draw, or a whole loop with its body) is one block.
    pub fn blocks(&self) -> Vec<Block> {
        self.statements.iter().cloned().map(Block::from).collect()
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Self {
        Program::new(blocks.into_iter().map(Statement::from).collect())
    }
}

/// Free-function form of [`Program::blocks`].
pub fn blocks(p: &Program) -> Vec<Block> {
    p.blocks()
}

/// Unit of execution: one draw, or one complete loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Block {
    Draw(DrawStmt),
    For(ForStmt),
}

impl Block {
    pub fn statement(&self) -> Statement {
        self.clone().into()
    }
}

impl From<Statement> for Block {
    fn from(s: Statement) -> Self {
        match s {
            Statement::Draw(d) => Block::Draw(d),
            Statement::For(f) => Block::For(f),
        }
    }
}

impl From<Block> for Statement {
    fn from(b: Block) -> Self {
        match b {
            Block::Draw(d) => Statement::Draw(d),
            Block::For(f) => Statement::For(f),
        }
    }
}
