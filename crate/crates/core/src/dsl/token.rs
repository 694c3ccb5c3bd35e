//! Flat token encoding: one `(id, args)` step per draw, loop header and loop
//! end in pre-order, with a fixed-width argument row.
//!
//! Argument layout (`K = 7` slots, unused trailing slots are zero):
//!
//! | token          | slots                                  |
//! |----------------|----------------------------------------|
//! | draw           | `x y z g1 g2 g3 g4`                    |
//! | for-translation| `times ux uy uz 0 0 0`                 |
//! | for-rotation   | `times theta axis 0 0 0 0` (X=1 Y=2 Z=3) |
//! | end-for, vacant| all zero                               |

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_program, Axis, DrawStmt, ForStmt, LoopKind, Program, Semantics, ShapeKind, Statement, ValidationReport};

pub const ARG_SLOTS: usize = 7;

const DRAW_BASE: u32 = 1;
const DRAW_COUNT: u32 = (Semantics::ALL.len() * ShapeKind::ALL.len()) as u32;
const FOR_TRANSLATION: u32 = DRAW_BASE + DRAW_COUNT;
const FOR_ROTATION: u32 = FOR_TRANSLATION + 1;
const END_FOR: u32 = FOR_ROTATION + 1;
const VOCAB_SIZE: u32 = END_FOR + 1;

/// What a token id stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Vacant,
    Draw(Semantics, ShapeKind),
    ForTranslation,
    ForRotation,
    EndFor,
}

/// The fixed id table. Vacant is 0, then every (semantics, shape) pair in
/// declaration order, semantics-major, then the loop tokens.
#[derive(Clone, Copy, Debug, Default)]
pub struct Vocabulary;

impl Vocabulary {
    pub fn len(&self) -> usize {
        VOCAB_SIZE as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, kind: TokenKind) -> u32 {
        match kind {
            TokenKind::Vacant => 0,
            TokenKind::Draw(s, k) => DRAW_BASE + (s.index() * ShapeKind::ALL.len() + k.index()) as u32,
            TokenKind::ForTranslation => FOR_TRANSLATION,
            TokenKind::ForRotation => FOR_ROTATION,
            TokenKind::EndFor => END_FOR,
        }
    }

    pub fn kind(&self, id: u32) -> Option<TokenKind> {
        match id {
            0 => Some(TokenKind::Vacant),
            FOR_TRANSLATION => Some(TokenKind::ForTranslation),
            FOR_ROTATION => Some(TokenKind::ForRotation),
            END_FOR => Some(TokenKind::EndFor),
            i if (DRAW_BASE..DRAW_BASE + DRAW_COUNT).contains(&i) => {
                let j = (i - DRAW_BASE) as usize;
                let n = ShapeKind::ALL.len();
                Some(TokenKind::Draw(Semantics::ALL[j / n], ShapeKind::ALL[j % n]))
            }
            _ => None,
        }
    }

    pub fn name(&self, id: u32) -> Option<String> {
        self.kind(id).map(|k| match k {
            TokenKind::Vacant => "Vacant".to_string(),
            TokenKind::Draw(s, k) => format!("draw({s}, {k})"),
            TokenKind::ForTranslation => "for(Trans)".to_string(),
            TokenKind::ForRotation => "for(Rot)".to_string(),
            TokenKind::EndFor => "endfor".to_string(),
        })
    }

    pub fn entries(&self) -> Vec<VocabEntry> {
        (0..VOCAB_SIZE)
            .map(|id| VocabEntry {
                id,
                token: self.name(id).expect("id in range"),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub id: u32,
    pub token: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenStep {
    pub id: u32,
    pub args: [f64; ARG_SLOTS],
}

impl TokenStep {
    pub fn vacant() -> Self {
        TokenStep {
            id: 0,
            args: [0.0; ARG_SLOTS],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenProgram {
    pub steps: Vec<TokenStep>,
}

impl TokenProgram {
    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary
    }

    /// Total number of ids, `N`.
    pub fn num_ids(&self) -> usize {
        Vocabulary.len()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum TokenError {
    #[error("invalid program: {0}")]
    Invalid(ValidationReport),
    #[error("unbalanced loop markers at step {step}")]
    Unbalanced { step: usize },
    #[error("unknown token id {id} at step {step}")]
    UnknownId { step: usize, id: u32 },
    #[error("bad arguments at step {step}: {reason}")]
    BadArgs { step: usize, reason: String },
    #[error("token file line {line}: {reason}")]
    Format { line: usize, reason: String },
}

pub fn tokenize(p: &Program) -> Result<TokenProgram, TokenError> {
    let report = validate_program(p);
    if !report.ok() {
        return Err(TokenError::Invalid(report));
    }
    let mut steps = Vec::new();
    emit(&p.statements, &mut steps);
    Ok(TokenProgram { steps })
}

fn emit(stmts: &[Statement], out: &mut Vec<TokenStep>) {
    let vocab = Vocabulary;
    for s in stmts {
        match s {
            Statement::Draw(d) => {
                let mut args = [0.0; ARG_SLOTS];
                for (slot, &c) in args.iter_mut().zip(&d.position) {
                    *slot = f64::from(c);
                }
                for (slot, &g) in args[3..].iter_mut().zip(d.canonical_geometry()) {
                    *slot = g;
                }
                out.push(TokenStep {
                    id: vocab.id(TokenKind::Draw(d.semantics, d.shape)),
                    args,
                });
            }
            Statement::For(f) => {
                let mut args = [0.0; ARG_SLOTS];
                args[0] = f64::from(f.times);
                let id = match f.kind {
                    LoopKind::Translation { step } => {
                        for (slot, &u) in args[1..4].iter_mut().zip(&step) {
                            *slot = f64::from(u);
                        }
                        vocab.id(TokenKind::ForTranslation)
                    }
                    LoopKind::Rotation { angle, axis } => {
                        args[1] = angle;
                        args[2] = axis_code(axis);
                        vocab.id(TokenKind::ForRotation)
                    }
                };
                out.push(TokenStep { id, args });
                emit(&f.body, out);
                out.push(TokenStep {
                    id: vocab.id(TokenKind::EndFor),
                    args: [0.0; ARG_SLOTS],
                });
            }
        }
    }
}

fn axis_code(a: Axis) -> f64 {
    match a {
        Axis::X => 1.0,
        Axis::Y => 2.0,
        Axis::Z => 3.0,
    }
}

struct Frame {
    header: usize,
    kind: LoopKind,
    times: u32,
    body: Vec<Statement>,
}

/// Rebuilds a program from tokens. Vacant steps are dropped.
pub fn detokenize(t: &TokenProgram) -> Result<Program, TokenError> {
    let vocab = Vocabulary;
    let mut root: Vec<Statement> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();

    for (i, step) in t.steps.iter().enumerate() {
        let kind = vocab.kind(step.id).ok_or(TokenError::UnknownId { step: i, id: step.id })?;
        let a = &step.args;
        let stmt = match kind {
            TokenKind::Vacant => continue,
            TokenKind::Draw(semantics, shape) => {
                let position = [int_arg(a[0], i)?, int_arg(a[1], i)?, int_arg(a[2], i)?];
                let arity = match shape {
                    ShapeKind::Cuboid if a[6] != 0.0 => 4,
                    _ => shape.arity().0,
                };
                zero_tail(a, 3 + arity, i)?;
                Statement::Draw(DrawStmt::new(semantics, shape, position, &a[3..3 + arity]))
            }
            TokenKind::ForTranslation => {
                zero_tail(a, 4, i)?;
                stack.push(Frame {
                    header: i,
                    kind: LoopKind::Translation {
                        step: [int_arg(a[1], i)?, int_arg(a[2], i)?, int_arg(a[3], i)?],
                    },
                    times: times_arg(a[0], i)?,
                    body: Vec::new(),
                });
                continue;
            }
            TokenKind::ForRotation => {
                zero_tail(a, 3, i)?;
                let axis = match a[2] {
                    1.0 => Axis::X,
                    2.0 => Axis::Y,
                    3.0 => Axis::Z,
                    c => {
                        return Err(TokenError::BadArgs {
                            step: i,
                            reason: format!("axis code {c} not in {{1, 2, 3}}"),
                        })
                    }
                };
                stack.push(Frame {
                    header: i,
                    kind: LoopKind::Rotation { angle: a[1], axis },
                    times: times_arg(a[0], i)?,
                    body: Vec::new(),
                });
                continue;
            }
            TokenKind::EndFor => {
                let frame = stack.pop().ok_or(TokenError::Unbalanced { step: i })?;
                Statement::For(ForStmt {
                    kind: frame.kind,
                    times: frame.times,
                    body: frame.body,
                })
            }
        };
        match stack.last_mut() {
            Some(frame) => frame.body.push(stmt),
            None => root.push(stmt),
        }
    }
    if let Some(open) = stack.first() {
        return Err(TokenError::Unbalanced { step: open.header });
    }
    Ok(Program::new(root))
}

fn int_arg(v: f64, step: usize) -> Result<i32, TokenError> {
    if v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX) {
        Ok(v as i32)
    } else {
        Err(TokenError::BadArgs {
            step,
            reason: format!("{v} is not an integer"),
        })
    }
}

fn times_arg(v: f64, step: usize) -> Result<u32, TokenError> {
    let n = int_arg(v, step)?;
    u32::try_from(n).map_err(|_| TokenError::BadArgs {
        step,
        reason: format!("loop count {v} is negative"),
    })
}

fn zero_tail(a: &[f64; ARG_SLOTS], from: usize, step: usize) -> Result<(), TokenError> {
    match a[from..].iter().position(|&v| v != 0.0) {
        None => Ok(()),
        Some(j) => Err(TokenError::BadArgs {
            step,
            reason: format!("unused slot {} holds {}", from + j + 1, a[from + j]),
        }),
    }
}

/// One `id a1 .. a7` record per line.
pub fn write_token_lines(t: &TokenProgram) -> String {
    let mut s = String::new();
    for step in &t.steps {
        write!(s, "{}", step.id).unwrap();
        for a in &step.args {
            write!(s, " {a}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn read_token_lines(src: &str) -> Result<TokenProgram, TokenError> {
    let mut steps = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != ARG_SLOTS + 1 {
            return Err(TokenError::Format {
                line: n + 1,
                reason: format!("expected {} fields, found {}", ARG_SLOTS + 1, fields.len()),
            });
        }
        let id = fields[0].parse::<u32>().map_err(|e| TokenError::Format {
            line: n + 1,
            reason: format!("id {:?}: {e}", fields[0]),
        })?;
        let mut args = [0.0; ARG_SLOTS];
        for (slot, f) in args.iter_mut().zip(&fields[1..]) {
            *slot = f.parse::<f64>().map_err(|e| TokenError::Format {
                line: n + 1,
                reason: format!("argument {f:?}: {e}"),
            })?;
        }
        steps.push(TokenStep { id, args });
    }
    Ok(TokenProgram { steps })
}

#[derive(Serialize, Deserialize)]
struct TokenContainer {
    num_ids: usize,
    arg_slots: usize,
    vocabulary: Vec<VocabEntry>,
    steps: Vec<TokenStep>,
}

/// Self-describing JSON container carrying the vocabulary table.
pub fn write_token_json(t: &TokenProgram) -> String {
    let c = TokenContainer {
        num_ids: Vocabulary.len(),
        arg_slots: ARG_SLOTS,
        vocabulary: Vocabulary.entries(),
        steps: t.steps.clone(),
    };
    serde_json::to_string_pretty(&c).expect("token container serializes")
}

pub fn read_token_json(src: &str) -> Result<TokenProgram, TokenError> {
    let c: TokenContainer = serde_json::from_str(src).map_err(|e| TokenError::Format {
        line: e.line(),
        reason: e.to_string(),
    })?;
    if c.vocabulary != Vocabulary.entries() || c.arg_slots != ARG_SLOTS {
        return Err(TokenError::Format {
            line: 1,
            reason: "vocabulary table does not match this build".into(),
        });
    }
    Ok(TokenProgram { steps: c.steps })
}
