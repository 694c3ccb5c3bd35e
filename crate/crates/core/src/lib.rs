//! Shape programs over voxel grids: a small language of parts and loops,
//! an executor, synthetic templates, metrics, structural analysis and a
//! search-based program fitter.

pub mod analysis;
pub mod dsl;
pub mod exec;
pub mod grid;
pub mod inference;
pub mod io;
pub mod metrics;
pub mod templates;

pub use dsl::{Block, DrawStmt, ForStmt, LoopKind, Program, Statement};
pub use grid::{Dims, FloatGrid, VoxelGrid};
