//! Scaling experiments: generate, compile, verify and measure each cell of
//! a parameter grid, then tabulate circuit size against code length.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Duration;

use num_bigint::BigUint;

use super::{compile_dpll, CompileOptions, CompileStats};
use crate::cnfgen::{
    encode_blocked_pathwidth, encode_naive, encode_neighborhood_diversity, formula_size, CnfFormula,
    GeneratorMode, GeneratorParams,
};
use crate::error::{Error, Result};
use crate::f2code::{affine_model_count, sample_parity_check, LinearCode};
use crate::dnnf::BRUTE_FORCE_CIRCUIT_VARS;
use crate::graphwidth::{incidence_graph, neighborhood_partition, resolve_claim_decomposition};
use crate::par::Exec;

pub const REPORT_VERSION: u32 = 1;

/// One grid point. `len` is the code length `n` for the naive and blocked
/// encoders and the column-block count `c` for the nd encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub mode: GeneratorMode,
    pub k: usize,
    pub b: usize,
    pub len: usize,
    pub seed: u64,
}

impl Cell {
    fn params(&self) -> GeneratorParams {
        let c = if self.mode == GeneratorMode::Nd { self.len } else { 0 };
        GeneratorParams::new(self.k, self.b, c).with_seed(self.seed)
    }

    /// Code length of the generated instance.
    pub fn code_len(&self) -> usize {
        match self.mode {
            GeneratorMode::Nd => self.params().nd_len(),
            _ => self.len,
        }
    }

    pub fn generate(&self) -> Result<CnfFormula> {
        let params = self.params();
        let a = sample_parity_check(params.m(), self.code_len(), self.seed);
        match self.mode {
            GeneratorMode::Naive => {
                let mut f = encode_naive(&a);
                if let Some(p) = &mut f.provenance {
                    p.params.seed = Some(self.seed);
                }
                Ok(f)
            }
            GeneratorMode::BlockPw => encode_blocked_pathwidth(&a, &params),
            GeneratorMode::Nd => encode_neighborhood_diversity(&a, &params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentGrid {
    pub cells: Vec<Cell>,
    pub options: CompileOptions,
}

impl ExperimentGrid {
    /// Cartesian product over the given axes, in lexicographic axis order.
    pub fn product(
        mode: GeneratorMode,
        ks: &[usize],
        bs: &[usize],
        lens: &[usize],
        seeds: &[u64],
    ) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &k in ks {
            for &b in bs {
                for &len in lens {
                    for &seed in seeds {
                        cells.push(Cell { mode, k, b, len, seed });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellResult {
    pub vars: usize,
    pub clauses: usize,
    pub size: usize,
    pub nd: usize,
    /// Width of the validated modular path decomposition, blocked mode only.
    pub modpw: Option<Option<usize>>,
    pub stats: CompileStats,
    pub decomposable: bool,
    /// `None` when the circuit is too large for the brute-force check.
    pub deterministic: Option<bool>,
    pub models: BigUint,
    pub oracle: BigUint,
}

impl CellResult {
    pub fn passed(&self) -> bool {
        self.decomposable
            && self.deterministic != Some(false)
            && self.models == self.oracle
            && self.modpw.is_none_or(|w| w.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub options: CompileOptions,
    pub rows: Vec<(Cell, Result<CellResult>)>,
}

pub fn run_cell(cell: &Cell, options: CompileOptions) -> Result<CellResult> {
    let f = cell.generate()?;
    let prov = f.provenance.as_ref().expect("generated formulas carry provenance");
    let oracle = affine_model_count(&LinearCode::new(prov.matrix.clone()));
    let nd = neighborhood_partition(&incidence_graph(&f)).diversity();
    let modpw = (cell.mode == GeneratorMode::BlockPw).then(|| {
        resolve_claim_decomposition(&f)
            .ok()
            .and_then(|r| r.validation.width())
            .filter(|&w| w < 2 * cell.k)
    });
    let (circuit, stats) = compile_dpll(&f, options)?;
    let over: BTreeSet<u32> = (1..=f.num_vars() as u32).collect();
    let decomposable = circuit.is_decomposable();
    let deterministic = (circuit.vars().len() <= BRUTE_FORCE_CIRCUIT_VARS)
        .then(|| circuit.check_deterministic_with(Exec::Sequential).map(|v| v.is_empty()))
        .transpose()?;
    let models = circuit.count_models(&over)?;
    Ok(CellResult {
        vars: f.num_vars(),
        clauses: f.num_clauses(),
        size: formula_size(&f),
        nd,
        modpw,
        stats,
        decomposable,
        deterministic,
        models,
        oracle,
    })
}

/// Runs every cell; failures are recorded per row. Rows keep grid order.
pub fn scaling_experiment(grid: &ExperimentGrid, exec: Exec) -> Report {
    let rows = exec.map(&grid.cells, |cell| (*cell, run_cell(cell, grid.options)));
    Report { options: grid.options, rows }
}

fn status(e: &Error) -> String {
    match e {
        Error::BudgetExceeded { .. } => "BudgetExceeded".into(),
        Error::ScopeTooLarge { .. } => "ScopeTooLarge".into(),
        Error::ParameterMismatch(_) => "ParameterMismatch".into(),
        other => format!("error({})", other.to_string().replace(' ', "_")),
    }
}

/// `floor(1000 * log2(x))` for `x ≥ 1`.
fn milli_log2(x: u64) -> i64 {
    (1000.0 * (x as f64).log2()).floor() as i64
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|(_, r)| r.as_ref().is_ok_and(CellResult::passed))
    }

    /// Versioned text report. Identical inputs give identical text; wall
    /// times appear only in the optional trailing section.
    pub fn render(&self, timing: bool) -> String {
        let o = &self.options;
        let mut out = format!("codecnf-report v{REPORT_VERSION}\n");
        let budget = o.budget.map_or("none".to_string(), |b| b.to_string());
        writeln!(out, "policy={} cache={} budget={budget}", o.policy, if o.cache { "on" } else { "off" }).unwrap();
        out.push_str(
            "# mode k b n c seed vars clauses size nd modpw nodes edges cache_hits splits decisions decomp det models oracle match status\n",
        );
        for (cell, r) in &self.rows {
            let c = if cell.mode == GeneratorMode::Nd { cell.len.to_string() } else { "-".into() };
            write!(out, "{} {} {} {} {c} {}", cell.mode, cell.k, cell.b, cell.code_len(), cell.seed).unwrap();
            match r {
                Ok(r) => {
                    let modpw = match r.modpw {
                        None => "n/a".to_string(),
                        Some(Some(w)) => format!("ok:{w}"),
                        Some(None) => "FAIL".to_string(),
                    };
                    let det = match r.deterministic {
                        None => "skip",
                        Some(true) => "ok",
                        Some(false) => "FAIL",
                    };
                    let s = &r.stats;
                    writeln!(
                        out,
                        " {} {} {} {} {modpw} {} {} {} {} {} {} {det} {} {} {} {}",
                        r.vars,
                        r.clauses,
                        r.size,
                        r.nd,
                        s.nodes,
                        s.edges,
                        s.cache_hits,
                        s.component_splits,
                        s.decisions,
                        if r.decomposable { "ok" } else { "FAIL" },
                        r.models,
                        r.oracle,
                        if r.models == r.oracle { "MATCH" } else { "MISMATCH" },
                        if r.passed() { "ok" } else { "FAIL" },
                    )
                    .unwrap();
                }
                Err(e) => writeln!(out, "{} {}", " -".repeat(17), status(e)).unwrap(),
            }
        }
        out.push_str(&self.loglog_table());
        if timing {
            out.push_str("timing\n# row wall_ms\n");
            for (i, (_, r)) in self.rows.iter().enumerate() {
                let ms = r.as_ref().map_or(Duration::ZERO, |r| r.stats.wall).as_secs_f64() * 1000.0;
                writeln!(out, "{i} {ms:.3}").unwrap();
            }
        }
        out
    }

    /// Per `(mode, k, b)` series: milli-log2 of code length and edge count,
    /// with the slope between consecutive points in thousandths.
    fn loglog_table(&self) -> String {
        let mut series: BTreeMap<(String, usize, usize), BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        for (cell, r) in &self.rows {
            if let Ok(r) = r {
                series
                    .entry((cell.mode.to_string(), cell.k, cell.b))
                    .or_default()
                    .entry(cell.code_len())
                    .or_default()
                    .push(r.stats.edges);
            }
        }
        let mut out = String::from("loglog\n# mode k b n edges mlog2_n mlog2_edges slope_milli\n");
        for ((mode, k, b), points) in series {
            let mut prev: Option<(i64, i64)> = None;
            for (n, edges) in points {
                let e = *edges.iter().max().unwrap() as u64;
                let (ln, le) = (milli_log2(n as u64), milli_log2(e.max(1)));
                let slope = match prev {
                    Some((pn, pe)) if ln != pn => ((le - pe) * 1000 / (ln - pn)).to_string(),
                    _ => "-".into(),
                };
                writeln!(out, "{mode} {k} {b} {n} {e} {ln} {le} {slope}").unwrap();
                prev = Some((ln, le));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lens: &[usize], budget: Option<u64>) -> ExperimentGrid {
        ExperimentGrid {
            cells: ExperimentGrid::product(GeneratorMode::BlockPw, &[1], &[2], lens, &[5]),
            options: CompileOptions { budget, ..CompileOptions::default() },
        }
    }

    #[test]
    fn rows_match_oracle() {
        let r = scaling_experiment(&grid(&[4, 6, 8], None), Exec::default());
        assert_eq!(r.rows.len(), 3);
        assert!(r.all_passed());
        for (_, row) in &r.rows {
            let row = row.as_ref().unwrap();
            assert_eq!(row.models, row.oracle);
        }
    }

    #[test]
    fn reproducible_and_strategy_independent() {
        let g = grid(&[4, 6], None);
        let a = scaling_experiment(&g, Exec::Parallel).render(false);
        let b = scaling_experiment(&g, Exec::Sequential).render(false);
        assert_eq!(a, b);
        assert!(a.starts_with("codecnf-report v1\n"));
        assert!(!a.contains("timing"));
    }

    #[test]
    fn over_budget_cell_is_isolated() {
        let small = scaling_experiment(&grid(&[4], None), Exec::Sequential);
        let limit = small.rows[0].1.as_ref().unwrap().stats.decisions;
        let r = scaling_experiment(&grid(&[4, 10], Some(limit)), Exec::default());
        assert!(r.rows[0].1.is_ok());
        assert_eq!(r.rows[1].1, Err(Error::BudgetExceeded { limit }));
        assert!(r.render(false).lines().any(|l| l.ends_with("BudgetExceeded")));
        assert!(!r.all_passed());
    }

    #[test]
    fn nd_cells() {
        let cells = ExperimentGrid::product(GeneratorMode::Nd, &[1], &[1, 2], &[2], &[3]);
        let r = scaling_experiment(&ExperimentGrid { cells, options: CompileOptions::default() }, Exec::default());
        let nds: Vec<usize> = r.rows.iter().map(|(_, r)| r.as_ref().unwrap().nd).collect();
        assert_eq!(nds[0], nds[1]);
        assert!(r.all_passed());
    }

    #[test]
    fn milli_log() {
        assert_eq!(milli_log2(1), 0);
        assert_eq!(milli_log2(8), 3000);
        assert_eq!(milli_log2(3), 1584);
    }
}
