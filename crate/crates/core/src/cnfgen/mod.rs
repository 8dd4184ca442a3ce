//! CNF data model, the three code-membership encodings, DIMACS I/O, and
//! brute-force solution oracles.

mod dimacs;
mod encode;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::f2code::{BitWord, F2Matrix};
use crate::par::Exec;

pub use dimacs::{parse_dimacs, write_dimacs};
pub use encode::{
    abstract_blocked, abstract_naive, abstract_nd, constraint_to_clauses, encode_blocked_pathwidth,
    encode_naive, encode_neighborhood_diversity, AbstractInstance, Acceptance, Condition, ConstraintBlock,
    ParityChain, DEFAULT_SCOPE_CAP, MAX_SCOPE_CAP,
};

/// What a variable stands for in a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRole {
    /// Code bit `x_j`, `j` in `1..=n`.
    X(usize),
    /// Parity accumulator `z_{i,j}`: parity of row `i` after columns `1..=j`.
    Z(usize, usize),
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::X(j) => write!(f, "x[{j}]"),
            VarRole::Z(i, j) => write!(f, "z[{i},{j}]"),
        }
    }
}

/// Bijection between DIMACS indices (1-based) and variable roles.
///
/// Variables of external formulas carry no role.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableTable {
    roles: Vec<Option<VarRole>>,
    index: HashMap<VarRole, u32>,
}

impl VariableTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `count` variables without roles.
    pub fn unnamed(count: usize) -> Self {
        VariableTable { roles: vec![None; count], index: HashMap::new() }
    }

    /// Appends a variable with the given role and returns its index.
    pub fn push(&mut self, role: VarRole) -> u32 {
        assert!(!self.index.contains_key(&role), "duplicate variable role {role}");
        self.roles.push(Some(role));
        let var = self.roles.len() as u32;
        self.index.insert(role, var);
        var
    }

    pub(crate) fn assign_role(&mut self, var: u32, role: VarRole) -> Result<()> {
        let slot = self
            .roles
            .get_mut(var as usize - 1)
            .ok_or_else(|| Error::ParameterMismatch(format!("variable {var} out of range")))?;
        if slot.is_some() || self.index.contains_key(&role) {
            return Err(Error::ParameterMismatch(format!("role {role} or variable {var} assigned twice")));
        }
        *slot = Some(role);
        self.index.insert(role, var);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, var: u32) -> Option<VarRole> {
        self.roles.get((var as usize).checked_sub(1)?).copied().flatten()
    }

    pub fn var(&self, role: VarRole) -> Option<u32> {
        self.index.get(&role).copied()
    }

    /// Indices of the code variables ordered by `j`.
    pub fn x_vars(&self) -> Vec<u32> {
        let mut xs: Vec<(usize, u32)> = self
            .index
            .iter()
            .filter_map(|(r, &v)| match r {
                VarRole::X(j) => Some((*j, v)),
                VarRole::Z(..) => None,
            })
            .collect();
        xs.sort_unstable();
        xs.into_iter().map(|(_, v)| v).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Option<VarRole>)> + '_ {
        self.roles.iter().enumerate().map(|(i, r)| (i as u32 + 1, *r))
    }
}

/// A literal in DIMACS convention: `+v` or `-v` for variable `v >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1 && var <= i32::MAX as u32, "invalid variable {var}");
        Lit(if positive { var as i32 } else { -(var as i32) })
    }

    pub fn from_dimacs(value: i32) -> Option<Self> {
        (value != 0 && value != i32::MIN).then_some(Lit(value))
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn dimacs(self) -> i32 {
        self.0
    }

    /// Value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for l in &lits {
            if !seen.insert(l.var()) {
                return Err(Error::ParameterMismatch(format!("clause mentions variable {} twice", l.var())));
            }
        }
        Ok(Clause(lits))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|l| l.var())
    }
}

/// Which encoder produced an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorMode {
    Naive,
    BlockPw,
    Nd,
}

impl fmt::Display for GeneratorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorMode::Naive => "naive",
            GeneratorMode::BlockPw => "blockpw",
            GeneratorMode::Nd => "nd",
        })
    }
}

impl FromStr for GeneratorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(GeneratorMode::Naive),
            "blockpw" => Ok(GeneratorMode::BlockPw),
            "nd" => Ok(GeneratorMode::Nd),
            other => Err(Error::ParameterMismatch(format!("unknown generator mode {other:?}"))),
        }
    }
}

/// Encoder parameters.
///
/// `k` row blocks of `b` equations each, so `m = k * b`. In nd mode the
/// code length is `n = c * k * b`. `block_width` overrides the nd column
/// block width, which defaults to `n / c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GeneratorParams {
    pub k: usize,
    pub b: usize,
    pub c: usize,
    pub seed: Option<u64>,
    pub block_width: Option<usize>,
}

impl GeneratorParams {
    pub fn new(k: usize, b: usize, c: usize) -> Self {
        GeneratorParams { k, b, c, seed: None, block_width: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn m(&self) -> usize {
        self.k * self.b
    }

    /// Code length required by nd mode.
    pub fn nd_len(&self) -> usize {
        self.c * self.k * self.b
    }
}

/// Generator metadata attached to generated formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub mode: GeneratorMode,
    pub params: GeneratorParams,
    pub matrix: F2Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub vars: VariableTable,
    pub clauses: Vec<Clause>,
    pub provenance: Option<Provenance>,
}

impl CnfFormula {
    pub fn new(vars: VariableTable, clauses: Vec<Clause>) -> Result<Self> {
        let n = vars.len() as u32;
        if let Some(l) = clauses.iter().flat_map(|c| c.lits()).find(|l| l.var() > n) {
            return Err(Error::ParameterMismatch(format!("literal {l} exceeds variable count {n}")));
        }
        Ok(CnfFormula { vars, clauses, provenance: None })
    }

    /// Formula over `num_vars` unnamed variables from DIMACS-style literal lists.
    ///
    /// Panics on malformed input; intended for tests and examples.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i32]]) -> Self {
        let clauses = clauses
            .iter()
            .map(|c| Clause::new(c.iter().map(|&v| Lit::from_dimacs(v).expect("zero literal")).collect()).unwrap())
            .collect();
        CnfFormula::new(VariableTable::unnamed(num_vars), clauses).unwrap()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }
}

/// Σ clause lengths.
pub fn formula_size(formula: &CnfFormula) -> usize {
    formula.clauses.iter().map(Clause::len).sum()
}

/// Largest variable count accepted by the brute-force oracles.
pub const BRUTE_FORCE_VARS: usize = 24;

/// Clauses as (positive-mask, negative-mask) pairs over bit `v - 1`.
fn clause_masks(formula: &CnfFormula) -> Result<Vec<(u32, u32)>> {
    let n = formula.num_vars();
    if n > BRUTE_FORCE_VARS {
        return Err(Error::TooLarge { what: "brute-force variable count", size: n, limit: BRUTE_FORCE_VARS });
    }
    Ok(formula
        .clauses
        .iter()
        .map(|c| {
            c.lits().iter().fold((0u32, 0u32), |(p, q), l| {
                let bit = 1u32 << (l.var() - 1);
                if l.is_positive() {
                    (p | bit, q)
                } else {
                    (p, q | bit)
                }
            })
        })
        .collect())
}

fn satisfies(masks: &[(u32, u32)], assignment: u32) -> bool {
    masks.iter().all(|&(p, q)| assignment & p != 0 || !assignment & q != 0)
}

/// All models of `formula`, as bitmasks with bit `v - 1` holding variable `v`.
pub fn models_bruteforce(formula: &CnfFormula, exec: Exec) -> Result<Vec<u32>> {
    let masks = clause_masks(formula)?;
    let total = 1u64 << formula.num_vars();
    Ok(exec
        .chunked(total, |r| r.map(|a| a as u32).filter(|&a| satisfies(&masks, a)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect())
}

pub fn count_models_bruteforce(formula: &CnfFormula) -> Result<u64> {
    let masks = clause_masks(formula)?;
    let total = 1u64 << formula.num_vars();
    Ok(Exec::default()
        .chunked(total, |r| r.filter(|&a| satisfies(&masks, a as u32)).count() as u64)
        .into_iter()
        .sum())
}

/// `{τ|vars : τ ⊨ F}` by exhaustive enumeration.
///
/// Projected words list the values of `vars` in the given order.
pub fn solution_projection(formula: &CnfFormula, vars: &[u32], cap: usize) -> Result<BTreeSet<BitWord>> {
    solution_projection_with(Exec::default(), formula, vars, cap)
}

pub fn solution_projection_with(
    exec: Exec,
    formula: &CnfFormula,
    vars: &[u32],
    cap: usize,
) -> Result<BTreeSet<BitWord>> {
    if let Some(&v) = vars.iter().find(|&&v| v == 0 || v as usize > formula.num_vars()) {
        return Err(Error::ParameterMismatch(format!("projection variable {v} not in formula")));
    }
    let masks = clause_masks(formula)?;
    let total = 1u64 << formula.num_vars();
    let project = |a: u32| {
        let bits: Vec<bool> = vars.iter().map(|&v| a >> (v - 1) & 1 == 1).collect();
        BitWord::from_bits(&bits)
    };
    let mut out = BTreeSet::new();
    for chunk in exec.chunked(total, |r| {
        r.map(|a| a as u32).filter(|&a| satisfies(&masks, a)).map(project).collect::<BTreeSet<_>>()
    }) {
        out.extend(chunk);
        if out.len() > cap {
            return Err(Error::CapExceeded { size: out.len() as u128, cap: cap as u128 });
        }
    }
    Ok(out)
}
