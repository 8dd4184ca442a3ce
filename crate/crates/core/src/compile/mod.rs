//! Exhaustive DPLL compilation of CNF into decision-DNNF.
//!
//! Each call conditions on a branching variable after unit propagation,
//! splits the residual formula into variable-disjoint components, and (with
//! caching on) shares identical residual subproblems as DAG nodes.

pub mod experiment;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::cnfgen::{CnfFormula, Lit};
use crate::dnnf::{CircuitBuilder, NnfCircuit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BranchingPolicy {
    /// Smallest variable index first.
    #[default]
    Fixed,
    /// Variable with most occurrences in the current component.
    MaxOccurrence,
}

impl fmt::Display for BranchingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchingPolicy::Fixed => "fixed",
            BranchingPolicy::MaxOccurrence => "max-occurrence",
        })
    }
}

impl FromStr for BranchingPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(BranchingPolicy::Fixed),
            "max-occurrence" => Ok(BranchingPolicy::MaxOccurrence),
            _ => Err(Error::ParameterMismatch(format!("unknown branching policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub policy: BranchingPolicy,
    /// Caches residual subproblems and hash-conses circuit nodes.
    pub cache: bool,
    /// Maximum number of decisions before aborting.
    pub budget: Option<u64>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { policy: BranchingPolicy::default(), cache: true, budget: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompileStats {
    pub nodes: usize,
    pub edges: usize,
    pub cache_hits: u64,
    /// Residual formulas that split into two or more components.
    pub component_splits: u64,
    pub decisions: u64,
    pub wall: Duration,
}

type Clauses = Vec<Vec<i32>>;

struct Compiler {
    builder: CircuitBuilder,
    cache: Option<HashMap<Clauses, usize>>,
    options: CompileOptions,
    stats: CompileStats,
    t: usize,
    f: usize,
}

pub fn compile_dpll(formula: &CnfFormula, options: CompileOptions) -> Result<(NnfCircuit, CompileStats)> {
    let start = Instant::now();
    let mut builder = CircuitBuilder::new(options.cache);
    let (t, f) = (builder.constant(true), builder.constant(false));
    let mut c = Compiler {
        builder,
        cache: options.cache.then(HashMap::new),
        options,
        stats: CompileStats::default(),
        t,
        f,
    };
    let clauses = canonical(formula.clauses.iter().map(|cl| cl.lits().iter().map(|l| l.dimacs()).collect()).collect());
    let root = c.compile(clauses)?;
    let circuit = c.builder.finish(root, formula.num_vars());
    let mut stats = c.stats;
    stats.nodes = circuit.num_nodes();
    stats.edges = circuit.num_edges();
    stats.wall = start.elapsed();
    Ok((circuit, stats))
}

fn canonical(mut clauses: Clauses) -> Clauses {
    for c in &mut clauses {
        c.sort_unstable_by_key(|l| (l.unsigned_abs(), *l));
    }
    clauses.sort_unstable();
    clauses.dedup();
    clauses
}

/// Sets `lit` true; `None` on an empty clause.
fn condition(clauses: &Clauses, lit: i32) -> Option<Clauses> {
    let mut out = Vec::with_capacity(clauses.len());
    for c in clauses {
        if c.contains(&lit) {
            continue;
        }
        let r: Vec<i32> = c.iter().copied().filter(|&l| l != -lit).collect();
        if r.is_empty() {
            return None;
        }
        out.push(r);
    }
    Some(out)
}

/// Groups clauses into variable-connected components, ordered by their
/// smallest clause.
fn components(clauses: &Clauses) -> Vec<Clauses> {
    let mut parent: HashMap<u32, u32> = HashMap::new();
    fn find(p: &mut HashMap<u32, u32>, v: u32) -> u32 {
        let mut r = v;
        while let Some(&q) = p.get(&r).filter(|&&q| q != r) {
            r = q;
        }
        let mut x = v;
        while x != r {
            let next = p[&x];
            p.insert(x, r);
            x = next;
        }
        r
    }
    for c in clauses {
        let first = c[0].unsigned_abs();
        parent.entry(first).or_insert(first);
        for l in &c[1..] {
            let v = l.unsigned_abs();
            parent.entry(v).or_insert(v);
            let (a, b) = (find(&mut parent, first), find(&mut parent, v));
            if a != b {
                parent.insert(a.max(b), a.min(b));
            }
        }
    }
    let mut groups: Vec<Clauses> = Vec::new();
    let mut slot: HashMap<u32, usize> = HashMap::new();
    for c in clauses {
        let root = find(&mut parent, c[0].unsigned_abs());
        let i = *slot.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[i].push(c.clone());
    }
    groups
}

impl Compiler {
    fn is_false(&self, id: usize) -> bool {
        self.builder.node(id).as_constant() == Some(false)
    }

    fn compile(&mut self, clauses: Clauses) -> Result<usize> {
        if clauses.is_empty() {
            return Ok(self.t);
        }
        if let Some(&hit) = self.cache.as_ref().and_then(|c| c.get(&clauses)) {
            self.stats.cache_hits += 1;
            return Ok(hit);
        }
        let result = self.solve(&clauses)?;
        if let Some(c) = &mut self.cache {
            c.insert(clauses, result);
        }
        Ok(result)
    }

    fn solve(&mut self, clauses: &Clauses) -> Result<usize> {
        let mut residual = clauses.clone();
        let mut implied = Vec::new();
        while let Some(unit) = residual.iter().find(|c| c.len() == 1).map(|c| c[0]) {
            match condition(&residual, unit) {
                Some(r) => residual = r,
                None => return Ok(self.f),
            }
            implied.push(unit);
        }
        let body = if !implied.is_empty() {
            self.compile(canonical(residual))?
        } else {
            let parts = components(clauses);
            if parts.len() == 1 {
                self.decide(clauses.clone())?
            } else {
                self.stats.component_splits += 1;
                let mut children = Vec::with_capacity(parts.len());
                for p in parts {
                    let child = self.compile(p)?;
                    if self.is_false(child) {
                        return Ok(self.f);
                    }
                    children.push(child);
                }
                self.builder.and(children)
            }
        };
        if self.is_false(body) {
            return Ok(self.f);
        }
        if implied.is_empty() {
            return Ok(body);
        }
        implied.sort_unstable_by_key(|l: &i32| l.unsigned_abs());
        let mut children: Vec<usize> = implied.into_iter().map(|l| self.lit(l)).collect();
        if body != self.t {
            children.push(body);
        }
        Ok(if children.len() == 1 { children[0] } else { self.builder.and(children) })
    }

    fn lit(&mut self, l: i32) -> usize {
        self.builder.lit(Lit::from_dimacs(l).expect("nonzero literal"))
    }

    fn branch_var(&self, clauses: &Clauses) -> u32 {
        match self.options.policy {
            BranchingPolicy::Fixed => clauses.iter().flatten().map(|l| l.unsigned_abs()).min().unwrap(),
            BranchingPolicy::MaxOccurrence => {
                let mut occ: HashMap<u32, usize> = HashMap::new();
                for l in clauses.iter().flatten() {
                    *occ.entry(l.unsigned_abs()).or_default() += 1;
                }
                occ.into_iter().max_by_key(|&(v, n)| (n, std::cmp::Reverse(v))).unwrap().0
            }
        }
    }

    fn decide(&mut self, clauses: Clauses) -> Result<usize> {
        self.stats.decisions += 1;
        if let Some(limit) = self.options.budget {
            if self.stats.decisions > limit {
                return Err(Error::BudgetExceeded { limit });
            }
        }
        let v = self.branch_var(&clauses);
        let mut branches = Vec::with_capacity(2);
        for lit in [v as i32, -(v as i32)] {
            let Some(r) = condition(&clauses, lit) else { continue };
            let sub = self.compile(canonical(r))?;
            if self.is_false(sub) {
                continue;
            }
            let l = self.lit(lit);
            branches.push(if sub == self.t { l } else { self.builder.and(vec![l, sub]) });
        }
        Ok(match branches.len() {
            0 => self.f,
            1 => branches[0],
            _ => self.builder.or(Some(v), branches),
        })
    }
}
