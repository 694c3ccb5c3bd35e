//! Synthetic dataset generation.
//!
//! Layout under the output directory:
//!
//! ```text
//! programs/NNNNNN.sp
//! tokens/NNNNNN.tok
//! voxels/NNNNNN.binvox
//! manifest.json
//! ```
//!
//! Record `i` draws from its own generator seeded with `seed ^ i`, so any
//! record can be regenerated alone and parallel generation is exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{builtin_templates, sample, Category, Params, Template, TemplateError};
use crate::dsl::{print_text, tokenize, validate_with, write_token_lines, Limits, ValidationReport};
use crate::exec::{execute_program, ExecError};
use crate::grid::Dims;
use crate::io::write_binvox;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub tables: usize,
    pub chairs: usize,
    pub seed: u64,
    pub dims: Dims,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub index: usize,
    pub template: String,
    pub category: Category,
    pub params: Params,
    pub program: String,
    pub tokens: String,
    pub voxels: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub dims: Dims,
    pub counts: BTreeMap<Category, usize>,
    /// Probability of each template within its category.
    pub mix: BTreeMap<String, f64>,
    pub records: Vec<DatasetRecord>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("record {index}: {report}")]
    Invalid { index: usize, report: ValidationReport },
    #[error("record {index}: {source}")]
    Exec {
        index: usize,
        #[source]
        source: ExecError,
    },
}

struct Rendered {
    record: DatasetRecord,
    text: String,
    tokens: String,
    voxels: Vec<u8>,
}

fn family(all: &[Template], c: Category) -> Vec<&Template> {
    all.iter().filter(|t| t.category == c).collect()
}

fn render(index: usize, category: Category, pool: &[&Template], spec: &DatasetSpec) -> Result<Rendered, DatasetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ index as u64);
    let t = pool[rng.gen_range(0..pool.len())];
    let (program, params) = sample(t, &mut rng)?;
    let report = validate_with(&program, &Limits::for_dims(spec.dims));
    if !report.ok() {
        return Err(DatasetError::Invalid { index, report });
    }
    let grid = execute_program(&program, spec.dims).map_err(|source| DatasetError::Exec { index, source })?;
    let tokens = tokenize(&program).map_err(|_| DatasetError::Invalid {
        index,
        report: report.clone(),
    })?;
    let stem = format!("{index:06}");
    Ok(Rendered {
        record: DatasetRecord {
            index,
            template: t.id.to_string(),
            category,
            params,
            program: format!("programs/{stem}.sp"),
            tokens: format!("tokens/{stem}.tok"),
            voxels: format!("voxels/{stem}.binvox"),
        },
        text: print_text(&program),
        tokens: write_token_lines(&tokens),
        voxels: write_binvox(&grid),
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), DatasetError> {
    fs::write(path, bytes).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn mkdir(path: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Builds the records in memory without touching the filesystem.
pub fn dataset_records(spec: &DatasetSpec) -> Result<Vec<DatasetRecord>, DatasetError> {
    Ok(render_all(spec)?.into_iter().map(|r| r.record).collect())
}

fn render_all(spec: &DatasetSpec) -> Result<Vec<Rendered>, DatasetError> {
    let all = builtin_templates();
    let tables = family(&all, Category::Table);
    let chairs = family(&all, Category::Chair);
    (0..spec.tables + spec.chairs)
        .into_par_iter()
        .map(|i| {
            if i < spec.tables {
                render(i, Category::Table, &tables, spec)
            } else {
                render(i, Category::Chair, &chairs, spec)
            }
        })
        .collect()
}

/// Writes the dataset under `dir` and returns its manifest. The manifest is
/// written even when no records are requested; record directories are
/// created only when there is something to put in them.
pub fn generate_dataset(spec: &DatasetSpec, dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let rendered = render_all(spec)?;
    mkdir(dir)?;
    if !rendered.is_empty() {
        for sub in ["programs", "tokens", "voxels"] {
            mkdir(&dir.join(sub))?;
        }
    }
    for r in &rendered {
        write(&dir.join(&r.record.program), r.text.as_bytes())?;
        write(&dir.join(&r.record.tokens), r.tokens.as_bytes())?;
        write(&dir.join(&r.record.voxels), &r.voxels)?;
    }

    let all = builtin_templates();
    let mut mix = BTreeMap::new();
    for c in [Category::Table, Category::Chair] {
        let f = family(&all, c);
        for t in &f {
            mix.insert(t.id.to_string(), 1.0 / f.len() as f64);
        }
    }
    let manifest = DatasetManifest {
        seed: spec.seed,
        dims: spec.dims,
        counts: BTreeMap::from([(Category::Table, spec.tables), (Category::Chair, spec.chairs)]),
        mix,
        records: rendered.into_iter().map(|r| r.record).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&dir.join("manifest.json"), json.as_bytes())?;
    Ok(manifest)
}
