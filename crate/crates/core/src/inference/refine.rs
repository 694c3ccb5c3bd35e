//! Integer coordinate descent over a block's parameters.

use super::score::Scorer;
use crate::dsl::{validate_with, Block, Limits, LoopKind, Program, ShapeKind, Statement};
use crate::exec::execute_block;
use crate::grid::Dims;

/// Degrees moved per step for tilts and rotation angles.
pub const ANGLE_STEP: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Knob {
    Position(usize),
    Geometry(usize),
    Tilt,
    Times,
    Step(usize),
    Angle,
}

/// Every tunable parameter as (path to the statement, knob). Paths index
/// into nested loop bodies.
fn knobs(s: &Statement, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Knob)>) {
    match s {
        Statement::Draw(d) => {
            for a in 0..3 {
                out.push((path.clone(), Knob::Position(a)));
            }
            let n = match d.shape {
                ShapeKind::Cuboid => 3,
                _ => d.geometry.len(),
            };
            for i in 0..n {
                out.push((path.clone(), Knob::Geometry(i)));
            }
            if d.shape == ShapeKind::Cuboid {
                out.push((path.clone(), Knob::Tilt));
            }
        }
        Statement::For(f) => {
            out.push((path.clone(), Knob::Times));
            match f.kind {
                LoopKind::Translation { .. } => {
                    for a in 0..3 {
                        out.push((path.clone(), Knob::Step(a)));
                    }
                }
                LoopKind::Rotation { .. } => out.push((path.clone(), Knob::Angle)),
            }
            for (i, b) in f.body.iter().enumerate() {
                path.push(i);
                knobs(b, path, out);
                path.pop();
            }
        }
    }
}

fn at_mut<'a>(s: &'a mut Statement, path: &[usize]) -> &'a mut Statement {
    match path.split_first() {
        None => s,
        Some((&i, rest)) => match s {
            Statement::For(f) => at_mut(&mut f.body[i], rest),
            Statement::Draw(_) => unreachable!("knob path descends into a draw"),
        },
    }
}

/// The statement with one knob moved `delta` steps, if still valid.
fn nudge(s: &Statement, path: &[usize], knob: Knob, delta: i32, limits: &Limits) -> Option<Statement> {
    let mut out = s.clone();
    match (at_mut(&mut out, path), knob) {
        (Statement::Draw(d), Knob::Position(a)) => d.position[a] += delta,
        (Statement::Draw(d), Knob::Geometry(i)) => d.geometry[i] += f64::from(delta),
        (Statement::Draw(d), Knob::Tilt) => {
            let ang = d.tilt() + ANGLE_STEP * f64::from(delta);
            d.geometry.truncate(3);
            if ang != 0.0 {
                d.geometry.push(ang);
            }
        }
        (Statement::For(f), Knob::Times) => f.times = f.times.checked_add_signed(delta)?,
        (Statement::For(f), Knob::Step(a)) => match &mut f.kind {
            LoopKind::Translation { step } => step[a] += delta,
            LoopKind::Rotation { .. } => return None,
        },
        (Statement::For(f), Knob::Angle) => match &mut f.kind {
            LoopKind::Rotation { angle, .. } => *angle += ANGLE_STEP * f64::from(delta),
            LoopKind::Translation { .. } => return None,
        },
        _ => return None,
    }
    let p = Program::new(vec![out]);
    if !validate_with(&p, limits).ok() {
        return None;
    }
    p.statements.into_iter().next()
}

pub(crate) struct Refined {
    pub block: Block,
    pub score: f64,
    pub calls: u64,
    pub exhausted: bool,
}

/// Cyclic descent: for each knob try `+1`, then `-1`, and keep stepping in
/// a direction while the score strictly improves. Stops after `rounds`
/// passes, a pass without improvement, or `budget` evaluations.
pub(crate) fn refine(block: &Block, start_score: f64, scorer: &Scorer<'_>, dims: Dims, rounds: usize, budget: u64) -> Refined {
    let limits = Limits::for_dims(dims);
    let mut cur = block.statement();
    let mut best = start_score;
    let mut calls = 0u64;
    let eval = |s: &Statement, calls: &mut u64| -> Option<f64> {
        if *calls >= budget {
            return None;
        }
        *calls += 1;
        Some(execute_block(&Block::from(s.clone()), dims).map_or(f64::NEG_INFINITY, |g| scorer.gain(&g)))
    };
    let mut exhausted = false;
    'rounds: for _ in 0..rounds {
        let mut list = Vec::new();
        knobs(&cur, &mut Vec::new(), &mut list);
        let mut improved = false;
        for (path, knob) in list {
            for dir in [1, -1] {
                let mut moved = false;
                while let Some(next) = nudge(&cur, &path, knob, dir, &limits) {
                    let Some(score) = eval(&next, &mut calls) else {
                        exhausted = true;
                        break 'rounds;
                    };
                    if score > best {
                        best = score;
                        cur = next;
                        moved = true;
                        improved = true;
                    } else {
                        break;
                    }
                }
                if moved {
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Refined {
        block: Block::from(cur),
        score: best,
        calls,
        exhausted,
    }
}
