//! Fits a program to a target grid by greedy block search.
//!
//! Each round proposes candidate blocks against the residual (target voxels
//! the current reconstruction misses), keeps the best `beam_width` by score,
//! polishes each with integer coordinate descent and accepts the winner if
//! it gains at least `min_gain`. When the greedy loop stalls, a backfit pass
//! re-refines every accepted block against the union of the others and drops
//! blocks that no longer contribute, then the greedy loop resumes. Search is
//! deterministic: candidates are scored in parallel but ranked by
//! (score, enumeration order).

mod propose;
mod refine;
mod score;

pub use refine::ANGLE_STEP;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{expanded_len, Block, DrawStmt, Limits, Program, Statement};
use crate::exec::{execute_block, execute_block_into, unroll_for, ExecError};
use crate::grid::{Dims, VoxelGrid};
use crate::metrics::{iou, LossWeights, MetricError};

use score::Scorer;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchLoss {
    /// Increase in IoU against the target.
    #[default]
    IoUGain,
    /// Decrease in weighted voxel cross-entropy, reading the reconstruction
    /// as a near-binary prediction.
    WeightedBce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_blocks: usize,
    pub beam_width: usize,
    pub min_gain: f64,
    pub refine_rounds: usize,
    pub candidate_grid_stride: usize,
    pub loss: SearchLoss,
    pub weights: LossWeights,
    /// Maximum number of block executions.
    pub budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_blocks: 10,
            beam_width: 8,
            min_gain: 0.002,
            refine_rounds: 3,
            candidate_grid_stride: 2,
            loss: SearchLoss::IoUGain,
            weights: LossWeights::default(),
            budget: 200_000,
        }
    }
}

impl SearchConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&self) -> Result<(), SearchError> {
        let bad = |what: &str| Err(SearchError::Config(what.to_string()));
        if self.max_blocks == 0 || self.beam_width == 0 || self.refine_rounds == 0 || self.candidate_grid_stride == 0 {
            return bad("counts must be at least 1");
        }
        // also rejects NaN
        if !(self.min_gain > 0.0) {
            return bad("min_gain must be positive");
        }
        if self.budget == 0 {
            return bad("budget must be positive");
        }
        self.weights.check().map_err(|e| SearchError::Config(e.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepKind {
    /// A new block appended to the program.
    Add,
    /// An accepted block replaced by its refit.
    Refit,
    /// A block dropped because the others already cover it.
    Remove,
    /// A loop replaced by its copies as separate, individually refit draws.
    Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub kind: StepKind,
    /// Statement index in the program at the time of the step.
    pub index: usize,
    /// The added or refit block, or the removed one.
    pub block: Block,
    /// IoU of the reconstruction after the step.
    pub iou: f64,
    /// Change in the configured loss's score caused by the step.
    pub gain: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Reconstruction covers the target exactly.
    Exact,
    MaxBlocks,
    MinGain,
    Budget,
    /// No candidate fits in the remaining statement or expansion limits.
    Limits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub program: Program,
    pub score_trace: Vec<TraceStep>,
    pub final_iou: f64,
    pub executor_calls: u64,
    pub budget_exhausted: bool,
    pub stop: StopReason,
}

/// Upper bound on the candidates one round can propose for a grid of
/// `dims`: every voxel may be a seed, every draw may be wrapped along every
/// axis and offset, and nested once more along each remaining axis.
pub fn candidate_cap(dims: Dims, config: &SearchConfig) -> usize {
    let d = dims.as_array();
    let seeds = dims.volume();
    let draws = seeds * propose::DRAWS_PER_SEED + seeds * 15 / 2;
    let offsets: usize = d.iter().map(|&n| 2 * n.saturating_sub(1)).sum();
    let per_draw = offsets + 3 * offsets + 3 * propose::ROTATION_TIMES.len();
    draws + config.beam_width * per_draw
}

/// Candidate blocks that explain parts of `residual`, in enumeration order.
pub fn propose_candidates(residual: &VoxelGrid, config: &SearchConfig) -> Vec<Block> {
    let empty = VoxelGrid::new(residual.dims());
    let scorer = Scorer::new(residual, &empty, config.loss, config.weights);
    let limits = Limits::for_dims(residual.dims());
    propose::scored_candidates(&scorer, residual, config, &limits, u64::MAX)
        .0
        .into_iter()
        .map(|(b, _)| b)
        .collect()
}

fn same_dims(a: &VoxelGrid, b: &VoxelGrid) -> Result<(), SearchError> {
    if a.dims() != b.dims() {
        return Err(MetricError::Shape(a.dims(), b.dims()).into());
    }
    Ok(())
}

/// Gain of adding `b` to `current` when reconstructing `target`.
pub fn score_block(b: &Block, target: &VoxelGrid, current: &VoxelGrid, config: &SearchConfig) -> Result<f64, SearchError> {
    same_dims(target, current)?;
    let g = execute_block(b, target.dims())?;
    Ok(Scorer::new(target, current, config.loss, config.weights).gain(&g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutcome {
    pub block: Block,
    pub score: f64,
    pub executor_calls: u64,
    pub budget_exhausted: bool,
}

/// Improves `b` by integer coordinate descent; never returns a block that
/// scores below `b`.
pub fn refine_block(
    b: &Block,
    target: &VoxelGrid,
    current: &VoxelGrid,
    config: &SearchConfig,
) -> Result<RefineOutcome, SearchError> {
    config.check()?;
    let start = score_block(b, target, current, config)?;
    let scorer = Scorer::new(target, current, config.loss, config.weights);
    let r = refine::refine(b, start, &scorer, target.dims(), config.refine_rounds, config.budget);
    Ok(RefineOutcome {
        block: r.block,
        score: r.score,
        executor_calls: r.calls,
        budget_exhausted: r.exhausted,
    })
}

/// Greedy block-at-a-time fit of `target`.
pub fn fit_program(target: &VoxelGrid, config: &SearchConfig) -> Result<FitResult, SearchError> {
    config.check()?;
    let dims = target.dims();
    let limits = Limits::for_dims(dims);
    let max_blocks = config.max_blocks.min(limits.max_statements);
    let mut current = VoxelGrid::new(dims);
    let mut program = Program::default();
    let mut trace = Vec::new();
    let mut calls = 0u64;
    let mut exhausted = false;
    let mut backfits = 0;

    let stop = loop {
        let residual = target.difference(&current);
        let stalled = if residual.is_empty() {
            Some(StopReason::Exact)
        } else if program.statements.len() >= max_blocks {
            Some(StopReason::MaxBlocks)
        } else {
            None
        };
        if calls >= config.budget {
            exhausted = true;
            break StopReason::Budget;
        }
        let stalled = match stalled {
            Some(r) => Some(r),
            None => {
                let step = greedy_step(target, &current, &program, config, &limits, &mut calls, &mut exhausted)?;
                match step {
                    Ok(best) => {
                        execute_block_into(&best.block, &mut current)?;
                        program.statements.push(best.block.statement());
                        trace.push(TraceStep {
                            kind: StepKind::Add,
                            index: program.statements.len() - 1,
                            block: best.block,
                            iou: iou(&current, target)?,
                            gain: best.score,
                        });
                        None
                    }
                    Err(r) => Some(r),
                }
            }
        };
        if exhausted {
            break StopReason::Budget;
        }
        let Some(reason) = stalled else { continue };
        if backfits == MAX_BACKFITS || program.statements.is_empty() {
            break reason;
        }
        backfits += 1;
        let before = trace.len();
        current = backfit(
            target,
            &mut program,
            &mut trace,
            config,
            &limits,
            max_blocks,
            &mut calls,
            &mut exhausted,
        )?;
        if trace.len() == before {
            break if exhausted { StopReason::Budget } else { reason };
        }
    };

    Ok(FitResult {
        final_iou: iou(&current, target)?,
        program,
        score_trace: trace,
        executor_calls: calls,
        budget_exhausted: exhausted,
        stop,
    })
}

/// Backfit passes allowed per fit.
const MAX_BACKFITS: usize = 4;

/// One greedy round: the best refined candidate, or why none qualifies.
fn greedy_step(
    target: &VoxelGrid,
    current: &VoxelGrid,
    program: &Program,
    config: &SearchConfig,
    limits: &Limits,
    calls: &mut u64,
    exhausted: &mut bool,
) -> Result<Result<refine::Refined, StopReason>, SearchError> {
    let dims = target.dims();
    let residual = target.difference(current);
    let scorer = Scorer::new(target, current, config.loss, config.weights);
    let (pool, used) = propose::scored_candidates(&scorer, &residual, config, limits, config.budget - *calls);
    *calls += used;

    let room = limits.max_expanded - expanded_len(&program.statements);
    let mut ranked: Vec<(usize, &Block, f64)> = pool
        .iter()
        .enumerate()
        .filter(|(_, (b, _))| expanded_len(&[b.statement()]) <= room)
        .map(|(i, (b, s))| (i, b, *s))
        .collect();
    if ranked.is_empty() {
        return Ok(Err(StopReason::Limits));
    }
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    ranked.truncate(config.beam_width);

    let share = (config.budget.saturating_sub(*calls)) / ranked.len() as u64;
    let refined: Vec<refine::Refined> = ranked
        .par_iter()
        .map(|&(_, b, s)| refine::refine(b, s, &scorer, dims, config.refine_rounds, share))
        .collect();
    *calls += refined.iter().map(|r| r.calls).sum::<u64>();
    *exhausted |= refined.iter().any(|r| r.exhausted);

    let mut best: Option<refine::Refined> = None;
    for r in refined {
        let fits = expanded_len(&[r.block.statement()]) <= room;
        if fits && best.as_ref().is_none_or(|b| r.score > b.score) {
            best = Some(r);
        }
    }
    let Some(best) = best else {
        return Ok(Err(StopReason::Limits));
    };
    if best.score < config.min_gain {
        return Ok(Err(if *exhausted { StopReason::Budget } else { StopReason::MinGain }));
    }
    Ok(Ok(best))
}

/// Refits each block with the rest of the program held fixed, removes
/// blocks that add nothing and splits loops whose copies overshoot the
/// target. Every recorded step strictly improves the score or, for
/// removals, leaves it unchanged. Returns the new reconstruction.
#[allow(clippy::too_many_arguments)]
fn backfit(
    target: &VoxelGrid,
    program: &mut Program,
    trace: &mut Vec<TraceStep>,
    config: &SearchConfig,
    limits: &Limits,
    max_blocks: usize,
    calls: &mut u64,
    exhausted: &mut bool,
) -> Result<VoxelGrid, SearchError> {
    let dims = target.dims();
    let mut grids = program
        .statements
        .iter()
        .map(|s| execute_block(&Block::from(s.clone()), dims))
        .collect::<Result<Vec<_>, _>>()?;
    let union_except = |grids: &[VoxelGrid], skip: usize| {
        let mut g = VoxelGrid::new(dims);
        for (j, h) in grids.iter().enumerate() {
            if j != skip {
                g = g.union(h);
            }
        }
        g
    };
    let mut i = 0;
    while i < program.statements.len() {
        let others = union_except(&grids, i);
        let scorer = Scorer::new(target, &others, config.loss, config.weights);
        let block = Block::from(program.statements[i].clone());
        let score = scorer.gain(&grids[i]);
        if score <= 0.0 {
            program.statements.remove(i);
            grids.remove(i);
            trace.push(TraceStep {
                kind: StepKind::Remove,
                index: i,
                block,
                iou: iou(&others, target)?,
                gain: -score,
            });
            continue;
        }
        if let Some(split) = try_split(
            &block,
            score,
            &scorer,
            config,
            program.statements.len() - 1,
            max_blocks,
            calls,
        )? {
            let n = split.draws.len();
            let g = split.draws.iter().try_fold(VoxelGrid::new(dims), |acc, d| {
                execute_block(&Block::Draw(d.clone()), dims).map(|h| acc.union(&h))
            })?;
            program
                .statements
                .splice(i..=i, split.draws.iter().cloned().map(Statement::Draw));
            grids.splice(i..=i, split.grids);
            trace.push(TraceStep {
                kind: StepKind::Split,
                index: i,
                block,
                iou: iou(&others.union(&g), target)?,
                gain: split.score - score,
            });
            if *calls >= config.budget {
                *exhausted = true;
                break;
            }
            i += n;
            continue;
        }
        let share = config.budget.saturating_sub(*calls) / (program.statements.len() - i) as u64;
        let r = refine::refine(&block, score, &scorer, dims, config.refine_rounds, share);
        *calls += r.calls;
        *exhausted |= r.exhausted;
        if r.score > score {
            let mut stmts = program.statements.clone();
            stmts[i] = r.block.statement();
            if expanded_len(&stmts) <= limits.max_expanded {
                let g = execute_block(&r.block, dims)?;
                program.statements = stmts;
                trace.push(TraceStep {
                    kind: StepKind::Refit,
                    index: i,
                    block: r.block,
                    iou: iou(&others.union(&g), target)?,
                    gain: r.score - score,
                });
                grids[i] = g;
            }
        }
        if *exhausted {
            break;
        }
        i += 1;
    }
    Ok(union_except(&grids, usize::MAX))
}

struct Split {
    draws: Vec<DrawStmt>,
    grids: Vec<VoxelGrid>,
    score: f64,
}

/// Unrolls a loop that adds false positives and refits each copy against
/// `scorer`'s fixed background plus the other copies. Returns the copies if
/// together they beat the loop's `score`.
fn try_split(
    block: &Block,
    score: f64,
    scorer: &Scorer<'_>,
    config: &SearchConfig,
    other_statements: usize,
    max_blocks: usize,
    calls: &mut u64,
) -> Result<Option<Split>, SearchError> {
    let Block::For(f) = block else { return Ok(None) };
    let dims = scorer.target().dims();
    let whole = execute_block(block, dims)?;
    if scorer.added(&whole).1 == 0 {
        return Ok(None);
    }
    let mut draws = unroll_for(f, dims)?;
    if other_statements + draws.len() > max_blocks {
        return Ok(None);
    }
    let mut grids = draws
        .iter()
        .map(|d| execute_block(&Block::Draw(d.clone()), dims))
        .collect::<Result<Vec<_>, _>>()?;
    for k in 0..draws.len() {
        let mut background = scorer.background().clone();
        for (j, g) in grids.iter().enumerate() {
            if j != k {
                background = background.union(g);
            }
        }
        let local = Scorer::new(scorer.target(), &background, config.loss, config.weights);
        let own = local.gain(&grids[k]);
        let share = config.budget.saturating_sub(*calls) / (draws.len() - k) as u64;
        let r = refine::refine(&Block::Draw(draws[k].clone()), own, &local, dims, config.refine_rounds, share);
        *calls += r.calls;
        if r.score > own {
            if let Block::Draw(d) = r.block {
                grids[k] = execute_block(&Block::Draw(d.clone()), dims)?;
                draws[k] = d;
            }
        }
    }
    let union = grids.iter().fold(VoxelGrid::new(dims), |acc, g| acc.union(g));
    let total = scorer.gain(&union);
    Ok((total > score).then_some(Split {
        draws,
        grids,
        score: total,
    }))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::dsl::{validate_program, ForStmt, Semantics, ShapeKind};
    use crate::exec::{execute_program, render_draw};
    use crate::grid::FloatGrid;
    use crate::metrics::{weighted_bce, BCE_EPS};

    fn cuboid(p: [i32; 3], t: i32, r1: i32, r2: i32) -> DrawStmt {
        DrawStmt::new(Semantics::Top, ShapeKind::Cuboid, p, &[t, r1, r2].map(f64::from))
    }

    fn random_grid(rng: &mut ChaCha8Rng, dims: Dims, density: f64) -> VoxelGrid {
        VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(density))
    }

    #[test]
    fn incremental_score_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = Dims::cube(16);
        for _ in 0..50 {
            let target = random_grid(&mut rng, dims, 0.3);
            let current = random_grid(&mut rng, dims, 0.1);
            let p = [rng.gen_range(0..12), rng.gen_range(0..12), rng.gen_range(0..12)];
            let b = Block::Draw(cuboid(p, rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..6)));
            let g = execute_block(&b, dims).unwrap();
            let oracle = iou(&current.union(&g), &target).unwrap() - iou(&current, &target).unwrap();
            let fast = score_block(&b, &target, &current, &SearchConfig::default()).unwrap();
            assert!((fast - oracle).abs() <= 1e-12, "{fast} vs {oracle}");

            let cfg = SearchConfig {
                loss: SearchLoss::WeightedBce,
                weights: LossWeights::new(2.0, 3.0, 1.0, 1.0).unwrap(),
                ..SearchConfig::default()
            };
            let bce =
                |c: &VoxelGrid| weighted_bce(&FloatGrid::from_grid(c, BCE_EPS, 1.0 - BCE_EPS), &target, &cfg.weights).unwrap();
            let oracle = bce(&current) - bce(&current.union(&g));
            let fast = score_block(&b, &target, &current, &cfg).unwrap();
            // both sides are differences of sums over every voxel
            let scale = bce(&current);
            assert!((fast - oracle).abs() <= 1e-9 * scale, "{fast} vs {oracle}");
        }
    }

    #[test]
    fn gain_signs() {
        let dims = Dims::default();
        let target = render_draw(&cuboid([4, 4, 4], 8, 8, 8), dims);
        let current = VoxelGrid::new(dims);
        let cfg = SearchConfig::default();
        let inside = Block::Draw(cuboid([5, 5, 5], 2, 2, 2));
        assert!(score_block(&inside, &target, &current, &cfg).unwrap() > 0.0);
        let outside = Block::Draw(cuboid([20, 20, 20], 2, 2, 2));
        assert!(score_block(&outside, &target, &current, &cfg).unwrap() <= 0.0);
    }

    #[test]
    fn dims_mismatch_is_an_error() {
        let a = VoxelGrid::new(Dims::cube(8));
        let b = VoxelGrid::new(Dims::cube(9));
        let blk = Block::Draw(cuboid([0, 0, 0], 1, 1, 1));
        assert!(matches!(
            score_block(&blk, &a, &b, &SearchConfig::default()),
            Err(SearchError::Metric(_))
        ));
    }

    #[test]
    fn refinement_fixes_off_by_one() {
        let dims = Dims::default();
        let target = render_draw(&cuboid([9, 0, 5], 6, 4, 10), dims);
        let current = VoxelGrid::new(dims);
        let cfg = SearchConfig::default();
        let seed = Block::Draw(cuboid([8, 0, 5], 6, 4, 10));
        let before = score_block(&seed, &target, &current, &cfg).unwrap();
        let out = refine_block(&seed, &target, &current, &cfg).unwrap();
        assert_eq!(out.block, Block::Draw(cuboid([9, 0, 5], 6, 4, 10)));
        assert!(out.score > before);
        assert_eq!(out.score, 1.0);
    }

    #[test]
    fn optimal_block_is_unchanged() {
        let dims = Dims::default();
        let d = cuboid([3, 2, 7], 5, 6, 7);
        let target = render_draw(&d, dims);
        let out = refine_block(
            &Block::Draw(d.clone()),
            &target,
            &VoxelGrid::new(dims),
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(out.block, Block::Draw(d));
    }

    #[test]
    fn empty_target_gives_empty_program() {
        let r = fit_program(&VoxelGrid::new(Dims::default()), &SearchConfig::default()).unwrap();
        assert!(r.program.is_empty());
        assert_eq!(r.final_iou, 1.0);
        assert_eq!(r.stop, StopReason::Exact);
    }

    #[test]
    fn single_draw_self_reconstruction() {
        let dims = Dims::default();
        let draws = [
            cuboid([4, 0, 6], 12, 9, 5),
            DrawStmt::new(Semantics::Support, ShapeKind::Cylinder, [15, 3, 16], &[10.0, 6.0]),
            DrawStmt::new(Semantics::Back, ShapeKind::Cuboid, [12, 4, 8], &[14.0, 2.0, 12.0, -15.0]),
            DrawStmt::new(Semantics::Leg, ShapeKind::Line, [3, 0, 4], &[17.0, 22.0, 9.0]),
        ];
        for d in draws {
            let target = render_draw(&d, dims);
            let r = fit_program(&target, &SearchConfig::default()).unwrap();
            assert!(r.final_iou >= 0.99, "{d:?}: {}", r.final_iou);
        }
    }

    #[test]
    fn four_legs_found_as_loop() {
        let dims = Dims::default();
        let leg = cuboid([6, 0, 6], 12, 2, 2);
        let legs = crate::dsl::ForStmt::translation(
            2,
            [16, 0, 0],
            vec![Statement::For(crate::dsl::ForStmt::translation(
                2,
                [0, 0, 18],
                vec![leg.into()],
            ))],
        );
        let p = Program::new(vec![Statement::Draw(cuboid([5, 12, 5], 2, 19, 21)), legs.into()]);
        let target = execute_program(&p, dims).unwrap();
        let r = fit_program(&target, &SearchConfig::default()).unwrap();
        assert_eq!(r.final_iou, 1.0);
        assert!(r.program.statements.len() <= 2, "{:?}", r.program);
        assert!(validate_program(&r.program).ok());
    }

    #[test]
    fn trace_is_monotone_and_deterministic() {
        let dims = Dims::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let target = VoxelGrid::from_fn(dims, |x, y, z| (x + y + z) % 7 == 0 && y < 10 && rng.gen_bool(0.9));
        let cfg = SearchConfig {
            max_blocks: 4,
            ..SearchConfig::default()
        };
        let a = fit_program(&target, &cfg).unwrap();
        let b = fit_program(&target, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.score_trace.windows(2).all(|w| w[1].iou >= w[0].iou));
        let replay = execute_program(&a.program, dims).unwrap();
        assert_eq!(iou(&replay, &target).unwrap(), a.final_iou);
    }

    #[test]
    fn budget_is_respected() {
        let dims = Dims::default();
        let target = render_draw(&cuboid([4, 0, 6], 12, 9, 5), dims);
        let cfg = SearchConfig {
            budget: 50,
            ..SearchConfig::default()
        };
        let r = fit_program(&target, &cfg).unwrap();
        assert!(r.executor_calls <= 50);
        assert!(r.budget_exhausted);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = SearchConfig {
            min_gain: 0.0,
            ..SearchConfig::default()
        };
        assert!(fit_program(&VoxelGrid::new(Dims::cube(4)), &cfg).is_err());
    }

    #[test]
    fn candidate_count_within_cap() {
        let dims = Dims::cube(12);
        let full = VoxelGrid::from_fn(dims, |_, _, _| true);
        let cfg = SearchConfig::default();
        assert!(propose_candidates(&full, &cfg).len() <= candidate_cap(dims, &cfg));
    }

    #[test]
    fn single_cuboid_residual_is_proposed_exactly() {
        let dims = Dims::default();
        let d = cuboid([7, 3, 2], 5, 11, 4);
        let g = render_draw(&d, dims);
        let c = propose_candidates(&g, &SearchConfig::default());
        assert!(c.iter().any(|b| execute_block(b, dims).unwrap() == g));
        assert!(propose_candidates(&VoxelGrid::new(dims), &SearchConfig::default()).is_empty());
    }

    #[test]
    fn overshooting_loop_is_split() {
        let dims = Dims::default();
        let seat = cuboid([10, 9, 6], 1, 12, 20);
        let back = cuboid([10, 22, 6], 1, 2, 20);
        let target = render_draw(&seat, dims).union(&render_draw(&back, dims));
        let lp = Block::For(ForStmt::translation(2, [0, 13, 0], vec![seat.into()]));
        let cfg = SearchConfig::default();
        let empty = VoxelGrid::new(dims);
        let scorer = Scorer::new(&target, &empty, cfg.loss, cfg.weights);
        let score = scorer.gain(&execute_block(&lp, dims).unwrap());
        let mut calls = 0;
        let split = try_split(&lp, score, &scorer, &cfg, 0, cfg.max_blocks, &mut calls)
            .unwrap()
            .unwrap();
        assert_eq!(split.draws.len(), 2);
        assert!((split.score - 1.0).abs() < 1e-12, "{}", split.score);
        // a loop without overshoot stays whole
        let exact = execute_block(&lp, dims).unwrap();
        let scorer = Scorer::new(&exact, &empty, cfg.loss, cfg.weights);
        assert!(try_split(&lp, 1.0, &scorer, &cfg, 0, cfg.max_blocks, &mut calls)
            .unwrap()
            .is_none());
    }

    #[test]
    fn backfit_steps_match_program() {
        let t = crate::templates::find_template("chair/slat-back").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let (p, _) = crate::templates::sample(&t, &mut rng).unwrap();
            let target = execute_program(&p, Dims::default()).unwrap();
            let r = fit_program(&target, &SearchConfig::default()).unwrap();
            assert!(validate_program(&r.program).ok());
            let recon = execute_program(&r.program, Dims::default()).unwrap();
            assert_eq!(iou(&recon, &target).unwrap(), r.final_iou);
            assert_eq!(r.score_trace.last().map_or(0.0, |s| s.iou), r.final_iou);
        }
    }
}
