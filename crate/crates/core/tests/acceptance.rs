//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every check uses a fixed seed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use shapeprog::analysis::{connected_components, is_stable, Connectivity};
use shapeprog::dsl::{
    blocks, detokenize, parse_text, print_text, random_draw, random_program, tokenize, RandomConfig, TokenProgram, Vocabulary,
    ARG_SLOTS,
};
use shapeprog::exec::{execute_block, execute_program, render_draw, unroll_for};
use shapeprog::inference::{fit_program, SearchConfig, StepKind};
use shapeprog::io::{read_binvox, write_binvox};
use shapeprog::metrics::{chamfer, emd, generator_loss, iou, weighted_bce, LossWeights, PointSet, StepPrediction};
use shapeprog::templates::{builtin_templates, dataset_records, find_template, sample, DatasetSpec};
use shapeprog::{Block, Dims, FloatGrid, Program, VoxelGrid};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Template samples cycling through every built-in template.
fn template_samples(n: usize, seed: u64) -> Vec<(String, Program)> {
    let all = builtin_templates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = &all[i % all.len()];
            (t.id.to_string(), sample(t, &mut rng).expect("templates are satisfiable").0)
        })
        .collect()
}

fn self_reconstruction() -> Outcome {
    let start = Instant::now();
    let dims = Dims::default();
    let cfg = SearchConfig::default();
    let templates = template_samples(200, SEED);
    let scores: Vec<f64> = templates
        .par_iter()
        .map(|(_, p)| {
            let g = execute_program(p, dims).unwrap();
            fit_program(&g, &cfg).unwrap().final_iou
        })
        .collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let singles: Vec<Program> = (0..100)
        .map(|_| Program::new(vec![random_draw(&mut rng, dims).into()]))
        .collect();
    let single: Vec<f64> = singles
        .par_iter()
        .map(|p| {
            let g = execute_program(p, dims).unwrap();
            fit_program(&g, &cfg).unwrap().final_iou
        })
        .collect();
    let single_mean = single.iter().sum::<f64>() / single.len() as f64;
    let single_min = single.iter().copied().fold(1.0, f64::min);
    let elapsed = start.elapsed();
    outcome(
        mean >= 0.90 && single_mean >= 0.99 && elapsed <= Duration::from_secs(30 * 60),
        format!(
            "template mean IoU {mean:.4} over {} shapes (>= 0.90); single-draw mean IoU {single_mean:.4}, min {single_min:.4} over {} programs (>= 0.99); {:.1}s (<= 1800s)",
            scores.len(),
            single.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn executor_identities() -> Outcome {
    let dims = Dims::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let cfg = RandomConfig::default();
    let (mut unroll_fail, mut compose_fail, mut det_fail, mut loops) = (0, 0, 0, 0);
    for _ in 0..500 {
        let p = random_program(&mut rng, &cfg);
        let g = execute_program(&p, dims).unwrap();
        let mut pooled = VoxelGrid::new(dims);
        for b in blocks(&p) {
            let bg = execute_block(&b, dims).unwrap();
            if let Block::For(f) = &b {
                loops += 1;
                let mut u = VoxelGrid::new(dims);
                for d in unroll_for(f, dims).unwrap() {
                    u.union_with(&render_draw(&d, dims));
                }
                unroll_fail += usize::from(u != bg);
            }
            pooled.union_with(&bg);
        }
        compose_fail += usize::from(pooled != g);
        det_fail += usize::from(execute_program(&p, dims).unwrap().words() != g.words());
    }
    outcome(
        unroll_fail + compose_fail + det_fail == 0,
        format!("500 programs ({loops} loop blocks): unroll failures {unroll_fail}, max-pool failures {compose_fail}, determinism failures {det_fail}"),
    )
}

fn roundtrips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let cfg = RandomConfig::default();
    let (mut tok_fail, mut text_fail) = (0, 0);
    for _ in 0..1000 {
        let p = random_program(&mut rng, &cfg);
        tok_fail += usize::from(tokenize(&p).ok().and_then(|t| detokenize(&t).ok()).as_ref() != Some(&p));
        text_fail += usize::from(parse_text(&print_text(&p)).ok().as_ref() != Some(&p));
    }
    let mut bin_fail = 0;
    for _ in 0..100 {
        let dims = Dims::new(rng.gen_range(1..40), rng.gen_range(1..40), rng.gen_range(1..40));
        let density = rng.gen_range(0.0..1.0);
        let g = VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(density));
        bin_fail += usize::from(read_binvox(&write_binvox(&g)).ok().as_ref() != Some(&g));
    }
    outcome(
        tok_fail + text_fail + bin_fail == 0,
        format!("1000 programs: token failures {tok_fail}, text failures {text_fail}; 100 grids: binvox failures {bin_fail}"),
    )
}

// Brute-force oracles, written without the library's helpers.

fn oracle_iou(a: &VoxelGrid, b: &VoxelGrid) -> f64 {
    let d = a.dims();
    let (mut inter, mut union) = (0u64, 0u64);
    for x in 0..d.x {
        for y in 0..d.y {
            for z in 0..d.z {
                let (p, q) = (a.get(x, y, z), b.get(x, y, z));
                inter += u64::from(p && q);
                union += u64::from(p || q);
            }
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

fn euclid(p: [f64; 3], q: [f64; 3]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

fn oracle_chamfer(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let directed = |from: &[[f64; 3]], to: &[[f64; 3]]| {
        let mut sum = 0.0;
        for &p in from {
            let mut best = f64::INFINITY;
            for &q in to {
                best = best.min(euclid(p, q));
            }
            sum += best;
        }
        sum / from.len() as f64
    };
    0.5 * directed(a, b) + 0.5 * directed(b, a)
}

fn oracle_bce(pred: &[f64], target: &VoxelGrid, w0: f64, w1: f64) -> f64 {
    let eps = 1e-7;
    let mut sum = 0.0;
    for (i, &p) in pred.iter().enumerate() {
        let p = p.max(eps).min(1.0 - eps);
        let y = if target.get_index(i) { 1.0 } else { 0.0 };
        sum += -(w1 * y * p.ln() + w0 * (1.0 - y) * (1.0 - p).ln());
    }
    sum
}

/// Minimum mean matching distance over all permutations (Heap's algorithm).
fn oracle_emd(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let cost = |perm: &[usize]| perm.iter().enumerate().map(|(i, &j)| euclid(a[i], b[j])).sum::<f64>();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best / n as f64
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
    (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut fails = [0usize; 5];
    let mut worst = [0.0f64; 5];
    let mut track = |k: usize, a: f64, b: f64, tol: f64, fails: &mut [usize; 5]| {
        let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst[k] = worst[k].max(rel);
        fails[k] += usize::from(!rel_close(a, b, tol));
    };

    for _ in 0..100 {
        let dims = Dims::new(rng.gen_range(1..20), rng.gen_range(1..20), rng.gen_range(1..20));
        let (da, db) = (rng.gen_range(0.0..0.7), rng.gen_range(0.0..0.7));
        let a = VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(da));
        let b = VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(db));
        track(0, iou(&a, &b).unwrap(), oracle_iou(&a, &b), 1e-9, &mut fails);
    }
    for _ in 0..100 {
        let (na, nb) = (rng.gen_range(1..65), rng.gen_range(1..65));
        let (a, b) = (random_points(&mut rng, na), random_points(&mut rng, nb));
        let fast = chamfer(&PointSet::new(a.clone()).unwrap(), &PointSet::new(b.clone()).unwrap()).unwrap();
        track(1, fast, oracle_chamfer(&a, &b), 1e-9, &mut fails);
    }
    for _ in 0..100 {
        let dims = Dims::new(rng.gen_range(1..16), rng.gen_range(1..16), rng.gen_range(1..16));
        let target = VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(0.4));
        let pred: Vec<f64> = (0..dims.volume())
            .map(|_| match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen(),
            })
            .collect();
        let (w0, w1) = if rng.gen_bool(0.5) {
            (2.0, 3.0)
        } else {
            (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0))
        };
        let w = LossWeights::new(w0, w1, 1.0, 1.0).unwrap();
        let fast = weighted_bce(&FloatGrid::new(dims, pred.clone()).unwrap(), &target, &w).unwrap();
        track(2, fast, oracle_bce(&pred, &target, w0, w1), 1e-9, &mut fails);
    }
    let cfg = RandomConfig::default();
    let n_ids = Vocabulary.len();
    for _ in 0..100 {
        let truth: TokenProgram = tokenize(&random_program(&mut rng, &cfg)).unwrap();
        let preds: Vec<StepPrediction> = truth
            .steps
            .iter()
            .map(|_| {
                let raw: Vec<f64> = (0..n_ids).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = raw.iter().sum();
                let mut args = [0.0; ARG_SLOTS];
                args.iter_mut().for_each(|a| *a = rng.gen_range(-40.0..40.0));
                StepPrediction {
                    probs: raw.iter().map(|r| r / s).collect(),
                    args,
                }
            })
            .collect();
        let (wp, wa) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let w = LossWeights::new(1.0, 1.0, wp, wa).unwrap();
        let mut oracle = 0.0;
        for (p, t) in preds.iter().zip(&truth.steps) {
            let mut sq = 0.0;
            for k in 0..ARG_SLOTS {
                sq += (p.args[k] - t.args[k]).powi(2);
            }
            oracle += wp * -p.probs[t.id as usize].ln() + wa * sq;
        }
        track(3, generator_loss(&preds, &truth, &w).unwrap(), oracle, 1e-9, &mut fails);
    }
    for _ in 0..50 {
        let (a, b) = (random_points(&mut rng, 8), random_points(&mut rng, 8));
        let fast = emd(&PointSet::new(a.clone()).unwrap(), &PointSet::new(b.clone()).unwrap()).unwrap();
        let o = oracle_emd(&a, &b);
        worst[4] = worst[4].max((fast - o).abs());
        fails[4] += usize::from((fast - o).abs() > 1e-12);
    }
    let elapsed = start.elapsed();
    let names = ["IoU", "CD", "BCE", "generator loss", "EMD"];
    let detail = names
        .iter()
        .zip(fails.iter().zip(worst))
        .map(|(n, (f, w))| format!("{n} {f} failures (worst {w:.1e})"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        fails.iter().all(|&f| f == 0) && elapsed <= Duration::from_secs(120),
        format!("{detail}; {:.2}s (<= 120s)", elapsed.as_secs_f64()),
    )
}

fn boxed(lo: [usize; 3], hi: [usize; 3]) -> VoxelGrid {
    VoxelGrid::from_fn(Dims::default(), |x, y, z| {
        (lo[0]..hi[0]).contains(&x) && (lo[1]..hi[1]).contains(&y) && (lo[2]..hi[2]).contains(&z)
    })
}

fn structural_analysis() -> Outcome {
    let spec = DatasetSpec {
        tables: 500,
        chairs: 500,
        seed: SEED + 5,
        dims: Dims::default(),
    };
    let records = dataset_records(&spec).unwrap();
    let flags: Vec<(bool, bool)> = records
        .par_iter()
        .map(|r| {
            let t = find_template(&r.template).unwrap();
            let g = execute_program(&t.build(&r.params), spec.dims).unwrap();
            let s = is_stable(&g).unwrap();
            (s.stable, s.connected)
        })
        .collect();
    let n = flags.len() as f64;
    let stable = 100.0 * flags.iter().filter(|f| f.0).count() as f64 / n;
    let connected = 100.0 * flags.iter().filter(|f| f.1).count() as f64 / n;

    // a column with a slab reaching far past its footprint
    let cantilever = boxed([2, 0, 10], [3, 10, 11]).union(&boxed([2, 10, 8], [21, 12, 13]));
    let cantilever_unstable = !is_stable(&cantilever).unwrap().stable;
    // two cubes sharing only a corner
    let two = boxed([4, 0, 4], [7, 3, 7]).union(&boxed([7, 3, 7], [10, 6, 10]));
    let six = connected_components(&two, Connectivity::Six).count;
    let full = connected_components(&two, Connectivity::TwentySix).count;
    outcome(
        stable >= 95.0 && connected >= 95.0 && cantilever_unstable && six == 2 && full == 1,
        format!(
            "{} shapes: stable {stable:.1}%, connected {connected:.1}% (>= 95%); cantilever unstable: {cantilever_unstable}; corner-touching cubes: {six} components (6-adjacency, want 2), {full} (26-adjacency, want 1)",
            flags.len()
        ),
    )
}

fn declared_irreproducible() -> Outcome {
    outcome(
        true,
        "ShapeNet reconstruction IoU/CD/EMD and unseen-category results need trained neural generators and ShapeNet data; replaced by criteria 1-5, with the voxel BCE and generator loss checked as pure functions in criterion 4".into(),
    )
}

fn stability_properties() -> Outcome {
    let shapes = template_samples(100, SEED + 6);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut shift_fail = 0;
    for (_, p) in &shapes {
        let g = execute_program(p, Dims::default()).unwrap();
        let (lo, hi) = g.bounding_box().unwrap();
        let d = g.dims().as_array();
        let mut by = [0; 3];
        for a in [0, 2] {
            by[a] = rng.gen_range(-(lo[a] as i32)..=(d[a] - 1 - hi[a]) as i32);
        }
        let moved = g.shifted(by);
        let (a, b) = (is_stable(&g).unwrap(), is_stable(&moved).unwrap());
        shift_fail += usize::from(moved.count() != g.count() || (a.stable, a.connected) != (b.stable, b.connected));
    }

    let fits = template_samples(50, SEED + 8);
    let results: Vec<_> = fits
        .par_iter()
        .map(|(_, p)| {
            let g = execute_program(p, Dims::default()).unwrap();
            fit_program(&g, &SearchConfig::default()).unwrap()
        })
        .collect();
    let mut trace_fail = 0;
    let mut steps = 0;
    for r in &results {
        let mut last = 0.0;
        let mut ok = true;
        for s in &r.score_trace {
            steps += 1;
            ok &= s.iou >= last && (s.kind == StepKind::Remove || s.gain > 0.0);
            last = s.iou;
        }
        ok &= r.score_trace.last().map_or(0.0, |s| s.iou) == r.final_iou;
        trace_fail += usize::from(!ok);
    }
    outcome(
        shift_fail == 0 && trace_fail == 0,
        format!("100 shifted shapes: {shift_fail} flag changes; 50 fits ({steps} trace steps): {trace_fail} non-monotone traces"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("self-reconstruction benchmark", self_reconstruction),
        ("executor identities", executor_identities),
        ("roundtrips", roundtrips),
        ("metric oracles", metric_oracles),
        ("structural analysis", structural_analysis),
        ("declared irreproducible", declared_irreproducible),
        ("stability and trace properties", stability_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("[{}] {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
