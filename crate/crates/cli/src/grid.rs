//! Grid files for `codecnf experiment`.
//!
//! ```toml
//! policy = "fixed"            # or "max-occurrence"
//! cache = true
//! budget = 200000             # decisions per cell; omit for none
//!
//! [[cells]]
//! mode = "blockpw"            # naive | blockpw | nd
//! k = [1, 2]
//! b = [2]
//! n = [4, 6, 8]               # code length; nd mode takes `c` instead
//! seeds = [5]
//! ```
//!
//! Each `[[cells]]` table expands to the product of its lists in the order
//! k, b, n (or c), seed.

use anyhow::{bail, Context, Result};
use codecnf::cnfgen::GeneratorMode;
use codecnf::compile::experiment::{Cell, ExperimentGrid};
use codecnf::compile::{BranchingPolicy, CompileOptions};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    policy: Option<String>,
    cache: Option<bool>,
    budget: Option<u64>,
    #[serde(default)]
    cells: Vec<CellSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    mode: String,
    k: Vec<usize>,
    b: Vec<usize>,
    n: Option<Vec<usize>>,
    c: Option<Vec<usize>>,
    seeds: Vec<u64>,
}

pub fn parse_grid(text: &str) -> Result<ExperimentGrid> {
    let file: GridFile = toml::from_str(text).context("invalid grid file")?;
    let mut options = CompileOptions::default();
    if let Some(p) = &file.policy {
        options.policy = p.parse::<BranchingPolicy>()?;
    }
    options.cache = file.cache.unwrap_or(true);
    options.budget = file.budget;
    let mut cells: Vec<Cell> = Vec::new();
    for (i, cell) in file.cells.iter().enumerate() {
        let mode: GeneratorMode = cell.mode.parse()?;
        let lens = match (mode, &cell.n, &cell.c) {
            (GeneratorMode::Nd, None, Some(c)) => c,
            (GeneratorMode::Nd, _, _) => bail!("cells[{i}]: nd mode takes `c` and no `n`"),
            (_, Some(n), None) => n,
            _ => bail!("cells[{i}]: {mode} mode takes `n` and no `c`"),
        };
        if cell.seeds.is_empty() {
            bail!("cells[{i}]: `seeds` must not be empty");
        }
        cells.extend(ExperimentGrid::product(mode, &cell.k, &cell.b, lens, &cell.seeds));
    }
    if cells.is_empty() {
        bail!("grid has no cells");
    }
    Ok(ExperimentGrid { cells, options })
}
