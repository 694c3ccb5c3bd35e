//! `shapeprog` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage, format and I/O errors, 2 when a
//! search runs out of budget or a template cannot be satisfied.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use shapeprog::analysis::{analyze_dataset, Connectivity};
use shapeprog::dsl::{
    detokenize, parse_text_with, print_text, read_token_json, read_token_lines, tokenize, write_token_json, write_token_lines,
    Limits, ParseError,
};
use shapeprog::exec::execute_program;
use shapeprog::inference::{fit_program, SearchConfig, SearchError, SearchLoss};
use shapeprog::io::{aggregate, evaluate_batch, export_obj, read_binvox, write_binvox, write_eval_report, EvalConfig};
use shapeprog::templates::{generate_dataset, DatasetError, DatasetSpec};
use shapeprog::{Dims, Program, VoxelGrid};

#[derive(Parser, Debug)]
#[command(name = "shapeprog", version, about = "Shape programs over voxel grids")]
struct Cli {
    /// Grid extents as X,Y,Z (default 32,32,32).
    #[arg(long, global = true, value_parser = parse_dims)]
    dims: Option<Dims>,
    /// Report errors on stderr as one JSON object.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a program and print its canonical text.
    Parse { file: PathBuf },
    /// Execute a program into a binvox grid.
    Exec {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also export the surface as a Wavefront OBJ mesh.
        #[arg(long)]
        obj: Option<PathBuf>,
    },
    /// Convert a program to its token sequence.
    Tokenize {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the JSON container instead of one step per line.
        #[arg(long)]
        json: bool,
    },
    /// Print the program encoded by a token file.
    Detokenize { file: PathBuf },
    /// Generate a synthetic table and chair dataset.
    Sample {
        #[arg(long, default_value_t = 0)]
        tables: usize,
        #[arg(long, default_value_t = 0)]
        chairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Infer a program for a binvox target.
    Fit(FitArgs),
    /// Compare predicted grids with ground truth, matched by relative path.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Surface points sampled per shape for CD and EMD.
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stability and connectivity of every binvox file under a directory.
    Analyze {
        dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Adjacency::TwentySix)]
        connectivity: Adjacency,
    },
}

#[derive(Args, Debug)]
struct FitArgs {
    target: PathBuf,
    /// Program text output; `.tok`, `.binvox` and `.fit.json` siblings are
    /// written next to it.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    max_blocks: Option<usize>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    min_gain: Option<f64>,
    /// Executor call budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Loss::Iou)]
    loss: Loss,
    /// Recorded in the trace; the search itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Loss {
    Iou,
    Bce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Adjacency {
    #[value(name = "6")]
    Six,
    #[value(name = "26")]
    TwentySix,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(format!("expected X,Y,Z, got `{s}`"));
    };
    let n = |v: &str| match usize::from_str(v.trim()) {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("bad extent `{v}`")),
    };
    Ok(Dims::new(n(x)?, n(y)?, n(z)?))
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn format(kind: &'static str, message: impl fmt::Display) -> Self {
        Failure {
            code: 1,
            kind,
            message: message.to_string(),
        }
    }

    fn budget(kind: &'static str, message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            kind,
            message: message.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::format("io", format!("{}: {e}", path.display())))
}

fn read_string(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure::format("format", format!("{}: not UTF-8", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::format("io", format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::format("io", format!("{}: {e}", path.display())))
}

fn load_program(path: &Path, dims: Dims) -> Result<Program, Failure> {
    let src = read_string(path)?;
    parse_text_with(&src, &Limits::for_dims(dims)).map_err(|e| match e {
        ParseError::Syntax(_) => Failure::format("syntax", format!("{}: {e}", path.display())),
        ParseError::Semantic(_) => Failure::format("invalid", format!("{}: {e}", path.display())),
    })
}

fn load_grid(path: &Path, dims: Option<Dims>) -> Result<VoxelGrid, Failure> {
    let g = read_binvox(&read(path)?).map_err(|e| Failure::format("binvox", format!("{}: {e}", path.display())))?;
    match dims {
        Some(d) if d != g.dims() => Err(Failure::format(
            "dims",
            format!(
                "{}: grid is {:?}, expected {:?}",
                path.display(),
                g.dims().as_array(),
                d.as_array()
            ),
        )),
        _ => Ok(g),
    }
}

/// Binvox files under `dir`, as sorted paths relative to it.
fn binvox_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    fn walk(root: &Path, rel: &Path, out: &mut Vec<PathBuf>) -> Outcome {
        let here = root.join(rel);
        let entries = fs::read_dir(&here).map_err(|e| Failure::format("io", format!("{}: {e}", here.display())))?;
        for entry in entries {
            let entry = entry.map_err(|e| Failure::format("io", format!("{}: {e}", here.display())))?;
            let rel = rel.join(entry.file_name());
            if entry.path().is_dir() {
                walk(root, &rel, out)?;
            } else if rel.extension().is_some_and(|x| x == "binvox") {
                out.push(rel);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, Path::new(""), &mut out)?;
    out.sort();
    Ok(out)
}

fn id_of(rel: &Path) -> String {
    rel.to_string_lossy().replace('\\', "/")
}

fn run(cli: Cli) -> Outcome {
    let dims = cli.dims.unwrap_or_default();
    match cli.command {
        Command::Parse { file } => {
            print!("{}", print_text(&load_program(&file, dims)?));
            Ok(())
        }
        Command::Exec { file, output, obj } => {
            let p = load_program(&file, dims)?;
            let g = execute_program(&p, dims).map_err(|e| Failure::budget("exec", e))?;
            write(&output, write_binvox(&g))?;
            if let Some(obj) = obj {
                write(&obj, export_obj(&g))?;
            }
            println!("{} voxels", g.count());
            Ok(())
        }
        Command::Tokenize { file, output, json } => {
            let p = load_program(&file, dims)?;
            let t = tokenize(&p).map_err(|e| Failure::format("tokens", e))?;
            write(&output, if json { write_token_json(&t) } else { write_token_lines(&t) })
        }
        Command::Detokenize { file } => {
            let src = read_string(&file)?;
            let t = if src.trim_start().starts_with('{') {
                read_token_json(&src)
            } else {
                read_token_lines(&src)
            };
            let p = t
                .and_then(|t| detokenize(&t))
                .map_err(|e| Failure::format("tokens", format!("{}: {e}", file.display())))?;
            print!("{}", print_text(&p));
            Ok(())
        }
        Command::Sample {
            tables,
            chairs,
            seed,
            output,
        } => {
            let spec = DatasetSpec {
                tables,
                chairs,
                seed,
                dims,
            };
            let m = generate_dataset(&spec, &output).map_err(|e| match e {
                DatasetError::Io { .. } => Failure::format("io", e),
                _ => Failure::budget("sample", e),
            })?;
            println!("{} shapes written to {}", m.records.len(), output.display());
            Ok(())
        }
        Command::Fit(args) => fit(args, cli.dims),
        Command::Eval {
            pred,
            gt,
            output,
            points,
            seed,
        } => {
            let mut pairs = Vec::new();
            for rel in binvox_files(&gt)? {
                let p = pred.join(&rel);
                if !p.is_file() {
                    return Err(Failure::format("eval", format!("no prediction for {}", id_of(&rel))));
                }
                pairs.push((id_of(&rel), load_grid(&p, cli.dims)?, load_grid(&gt.join(&rel), cli.dims)?));
            }
            let records = evaluate_batch(&pairs, EvalConfig { points, seed }).map_err(|e| Failure::format("eval", e))?;
            write(&output, write_eval_report(&records))?;
            let a = aggregate(&records);
            let dist = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            println!("{} shapes  IoU {:.4}  CD {}  EMD {}", a.count, a.iou, dist(a.cd), dist(a.emd));
            Ok(())
        }
        Command::Analyze {
            dir,
            output,
            connectivity,
        } => {
            let files = binvox_files(&dir)?;
            let grids = files
                .iter()
                .map(|rel| load_grid(&dir.join(rel), cli.dims).map(|g| (id_of(rel), g)))
                .collect::<Result<Vec<_>, _>>()?;
            let conn = match connectivity {
                Adjacency::Six => Connectivity::Six,
                Adjacency::TwentySix => Connectivity::TwentySix,
            };
            let report = analyze_dataset(grids.iter().map(|(id, g)| (id.clone(), g)), conn);
            let text = serde_json::to_string_pretty(&report).expect("analysis serializes");
            write(&output, text + "\n")?;
            print!("{}", report.table());
            Ok(())
        }
    }
}

fn fit(args: FitArgs, dims: Option<Dims>) -> Outcome {
    let target = load_grid(&args.target, dims)?;
    let mut cfg = SearchConfig::default();
    if let Some(b) = args.max_blocks {
        cfg.max_blocks = b;
    }
    if let Some(w) = args.beam {
        cfg.beam_width = w;
    }
    if let Some(g) = args.min_gain {
        cfg.min_gain = g;
    }
    if let Some(b) = args.budget {
        cfg.budget = b;
    }
    cfg.loss = match args.loss {
        Loss::Iou => SearchLoss::IoUGain,
        Loss::Bce => SearchLoss::WeightedBce,
    };
    let r = fit_program(&target, &cfg).map_err(|e| match e {
        SearchError::Config(_) => Failure::format("config", e),
        _ => Failure::budget("fit", e),
    })?;
    let tokens = tokenize(&r.program).map_err(|e| Failure::budget("fit", e))?;
    let recon = execute_program(&r.program, target.dims()).map_err(|e| Failure::budget("fit", e))?;

    let out = &args.output;
    let sibling = |ext: &str| out.with_extension(ext);
    write(out, print_text(&r.program))?;
    write(&sibling("tok"), write_token_lines(&tokens))?;
    write(&sibling("binvox"), write_binvox(&recon))?;
    let trace = json!({ "seed": args.seed, "config": cfg, "result": r });
    write(
        &sibling("fit.json"),
        serde_json::to_string_pretty(&trace).expect("trace serializes") + "\n",
    )?;
    println!(
        "IoU {:.4} with {} statements ({:?}, {} executor calls)",
        r.final_iou,
        r.program.statements.len(),
        r.stop,
        r.executor_calls
    );
    if r.budget_exhausted {
        return Err(Failure::budget(
            "budget",
            format!("search budget of {} executor calls exhausted", cfg.budget),
        ));
    }
    Ok(())
}

fn report(f: &Failure, json_errors: bool) {
    if json_errors {
        eprintln!("{}", json!({ "error": f.kind, "message": f.message, "exit_code": f.code }));
    } else {
        eprintln!("error: {}", f.message);
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json_errors {
                report(&Failure::format("usage", e.to_string().trim()), true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };
    let json_errors = cli.json_errors;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f, json_errors);
            ExitCode::from(f.code)
        }
    }
}
