//! Constraint blocks and the three encodings of `A x = 0`.
//!
//! All encodings share one recurrence: `z_{i,j} = z_{i,j-1} + a_{ij} x_j`
//! with `z_{i,0} ≡ 0`, so the first column needs no special case and
//! `z_{i,0}` never becomes a variable.

use std::fmt::Write as _;

use super::{Clause, CnfFormula, GeneratorMode, GeneratorParams, Lit, Provenance, VarRole, VariableTable};
use crate::error::{Error, Result};
use crate::f2code::F2Matrix;

/// Default largest scope expanded into canonical clauses.
pub const DEFAULT_SCOPE_CAP: usize = 20;
/// Hard upper limit for the cap (acceptance checks use 64-bit scope masks).
pub const MAX_SCOPE_CAP: usize = 30;

/// `z[row,to_col] = z[row,from_col] + Σ_{j=from_col+1..=to_col} a[row,j] x[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityChain {
    pub row: usize,
    pub from_col: usize,
    pub to_col: usize,
    /// Variable of `z[row,from_col]`; `None` when `from_col == 0`.
    pub from: Option<u32>,
    pub to: u32,
    /// `a[row,j]` for `j = from_col+1..=to_col`.
    pub coeffs: Vec<bool>,
    /// Variables `x[j]` for the same column range.
    pub xs: Vec<u32>,
}

/// One parity condition of a constraint's acceptance predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Chain(ParityChain),
    /// `z[row,col] = 0`.
    Zero { row: usize, col: usize, var: u32 },
}

impl Condition {
    /// Variables whose XOR must vanish.
    fn xor_vars(&self) -> Vec<u32> {
        match self {
            Condition::Chain(ch) => {
                let mut vs = vec![ch.to];
                vs.extend(ch.from);
                vs.extend(ch.xs.iter().zip(&ch.coeffs).filter(|(_, &a)| a).map(|(&x, _)| x));
                vs
            }
            Condition::Zero { var, .. } => vec![*var],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Acceptance {
    /// Conjunction of parity conditions.
    Conditions(Vec<Condition>),
    /// Explicit truth table indexed by the scope assignment, position `p`
    /// of the scope at bit `p`.
    Table(Vec<bool>),
}

/// A constraint over an ordered scope with a closed-form acceptance predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintBlock {
    scope: Vec<u32>,
    accepts: Acceptance,
    /// Scope positions of each condition's XOR terms.
    xor_positions: Vec<Vec<usize>>,
}

impl ConstraintBlock {
    pub fn new(scope: Vec<u32>, accepts: Acceptance) -> Result<Self> {
        for (p, v) in scope.iter().enumerate() {
            if scope[..p].contains(v) {
                return Err(Error::ParameterMismatch(format!("variable {v} repeated in scope")));
            }
        }
        let xor_positions = match &accepts {
            Acceptance::Table(t) => {
                if scope.len() >= 64 || t.len() != 1usize << scope.len() {
                    return Err(Error::ParameterMismatch(format!(
                        "truth table of length {} does not match scope of {} variables",
                        t.len(),
                        scope.len()
                    )));
                }
                Vec::new()
            }
            Acceptance::Conditions(conds) => {
                let mut all = Vec::with_capacity(conds.len());
                for c in conds {
                    let positions = c
                        .xor_vars()
                        .into_iter()
                        .map(|v| {
                            scope.iter().position(|&s| s == v).ok_or_else(|| {
                                Error::ParameterMismatch(format!("condition variable {v} outside scope"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    all.push(positions);
                }
                all
            }
        };
        Ok(ConstraintBlock { scope, accepts, xor_positions })
    }

    pub fn scope(&self) -> &[u32] {
        &self.scope
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.accepts
    }

    /// Evaluates the predicate on an assignment to the scope, one value per
    /// scope position.
    pub fn accepts(&self, values: &[bool]) -> bool {
        assert_eq!(values.len(), self.scope.len());
        match &self.accepts {
            Acceptance::Table(t) => {
                t[values.iter().enumerate().fold(0usize, |acc, (p, &v)| acc | (v as usize) << p)]
            }
            Acceptance::Conditions(_) => {
                self.xor_positions.iter().all(|ps| ps.iter().filter(|&&p| values[p]).count() % 2 == 0)
            }
        }
    }

    /// Acceptance test on a packed assignment (bit `p` = scope position `p`).
    fn packed_acceptor(&self) -> impl Fn(u64) -> bool + '_ {
        debug_assert!(self.scope.len() < 64);
        let masks: Vec<u64> =
            self.xor_positions.iter().map(|ps| ps.iter().fold(0u64, |m, &p| m ^ 1 << p)).collect();
        move |a: u64| match &self.accepts {
            Acceptance::Table(t) => t[a as usize],
            Acceptance::Conditions(_) => masks.iter().all(|m| (m & a).count_ones().is_multiple_of(2)),
        }
    }
}

/// Canonical CNF of a constraint: one clause per rejected scope assignment,
/// each clause over the whole scope and falsified exactly by that assignment.
pub fn constraint_to_clauses(block: &ConstraintBlock, cap: usize) -> Result<Vec<Clause>> {
    let cap = cap.min(MAX_SCOPE_CAP);
    let s = block.scope.len();
    if s > cap {
        return Err(Error::ScopeTooLarge { scope: s, cap });
    }
    let accepts = block.packed_acceptor();
    let mut out = Vec::new();
    for a in 0..1u64 << s {
        if !accepts(a) {
            let lits = block.scope.iter().enumerate().map(|(p, &v)| Lit::new(v, a >> p & 1 == 0)).collect();
            out.push(Clause(lits));
        }
    }
    Ok(out)
}

/// An instance as structured constraints, before clause expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractInstance {
    pub vars: VariableTable,
    pub blocks: Vec<ConstraintBlock>,
    pub provenance: Provenance,
}

impl AbstractInstance {
    pub fn max_scope(&self) -> usize {
        self.blocks.iter().map(|b| b.scope.len()).max().unwrap_or(0)
    }

    /// Expands every block canonically; fails before any work if a scope exceeds `cap`.
    pub fn materialize(&self, cap: usize) -> Result<CnfFormula> {
        let cap = cap.min(MAX_SCOPE_CAP);
        let widest = self.max_scope();
        if widest > cap {
            return Err(Error::ScopeTooLarge { scope: widest, cap });
        }
        let mut clauses = Vec::new();
        for b in &self.blocks {
            clauses.extend(constraint_to_clauses(b, cap)?);
        }
        Ok(CnfFormula { vars: self.vars.clone(), clauses, provenance: Some(self.provenance.clone()) })
    }

    /// Text rendering: variables with roles, then each block's scope and
    /// its parity-chain specification.
    pub fn render(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "abstract {} k={} b={} c={} seed={}",
            p.mode,
            p.params.k,
            p.params.b,
            p.params.c,
            p.params.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
        );
        let _ = writeln!(out, "matrix {} {}", p.matrix.num_rows(), p.matrix.num_cols());
        for r in p.matrix.rows() {
            let _ = writeln!(out, "arow {r}");
        }
        for (v, role) in self.vars.iter() {
            match role {
                Some(r) => {
                    let _ = writeln!(out, "var {v} = {r}");
                }
                None => {
                    let _ = writeln!(out, "var {v}");
                }
            }
        }
        let name = |v: u32| self.vars.role(v).map_or_else(|| format!("v{v}"), |r| r.to_string());
        for (t, b) in self.blocks.iter().enumerate() {
            let scope: Vec<String> = b.scope.iter().map(|&v| name(v)).collect();
            let _ = writeln!(out, "constraint {} scope {}", t + 1, scope.join(" "));
            match &b.accepts {
                Acceptance::Conditions(conds) => {
                    for c in conds {
                        match c {
                            Condition::Chain(ch) => {
                                let coeffs: String = ch.coeffs.iter().map(|&a| if a { '1' } else { '0' }).collect();
                                let _ = writeln!(
                                    out,
                                    "  z[{i},{j2}] = z[{i},{j1}] + sum a[{i},j]*x[j], j={lo}..{j2} coeffs={coeffs}",
                                    i = ch.row,
                                    j1 = ch.from_col,
                                    j2 = ch.to_col,
                                    lo = ch.from_col + 1,
                                );
                            }
                            Condition::Zero { row, col, .. } => {
                                let _ = writeln!(out, "  z[{row},{col}] = 0");
                            }
                        }
                    }
                }
                Acceptance::Table(t) => {
                    let bits: String = t.iter().map(|&a| if a { '1' } else { '0' }).collect();
                    let _ = writeln!(out, "  table {bits}");
                }
            }
        }
        out
    }
}

fn chain(a: &F2Matrix, vars: &VariableTable, row: usize, from_col: usize, to_col: usize) -> ParityChain {
    let z = |j: usize| vars.var(VarRole::Z(row, j)).expect("accumulator variable exists");
    ParityChain {
        row,
        from_col,
        to_col,
        from: (from_col > 0).then(|| z(from_col)),
        to: z(to_col),
        coeffs: (from_col + 1..=to_col).map(|j| a.get(row - 1, j - 1)).collect(),
        xs: (from_col + 1..=to_col).map(|j| vars.var(VarRole::X(j)).expect("code variable exists")).collect(),
    }
}

fn x_table(n: usize) -> VariableTable {
    let mut vars = VariableTable::new();
    for j in 1..=n {
        vars.push(VarRole::X(j));
    }
    vars
}

/// One constraint per `(i, j)` plus a unit `¬z_{i,n}` per row.
pub fn abstract_naive(a: &F2Matrix) -> AbstractInstance {
    let (m, n) = (a.num_rows(), a.num_cols());
    let mut vars = x_table(n);
    for j in 1..=n {
        for i in 1..=m {
            vars.push(VarRole::Z(i, j));
        }
    }
    let mut blocks = Vec::new();
    for i in 1..=m {
        for j in 1..=n {
            let ch = chain(a, &vars, i, j - 1, j);
            let mut scope = vec![ch.xs[0]];
            scope.extend(ch.from);
            scope.push(ch.to);
            blocks.push(ConstraintBlock::new(scope, Acceptance::Conditions(vec![Condition::Chain(ch)])).unwrap());
        }
    }
    for i in 1..=m {
        let var = vars.var(VarRole::Z(i, n)).unwrap();
        blocks.push(
            ConstraintBlock::new(vec![var], Acceptance::Conditions(vec![Condition::Zero { row: i, col: n, var }]))
                .unwrap(),
        );
    }
    let provenance = Provenance {
        mode: GeneratorMode::Naive,
        params: GeneratorParams { k: 1, b: m, c: 0, seed: None, block_width: None },
        matrix: a.clone(),
    };
    AbstractInstance { vars, blocks, provenance }
}

/// Row blocks of `b` equations merged per column into `R_j^ℓ`.
pub fn abstract_blocked(a: &F2Matrix, params: &GeneratorParams) -> Result<AbstractInstance> {
    let (m, n) = (a.num_rows(), a.num_cols());
    let GeneratorParams { k, b, .. } = *params;
    if k == 0 || b == 0 || m != k * b {
        return Err(Error::ParameterMismatch(format!("matrix has {m} rows but k*b = {k}*{b}")));
    }
    if n < 2 {
        return Err(Error::ParameterMismatch(format!("blocked encoding needs n >= 2, got {n}")));
    }
    let mut vars = x_table(n);
    for j in 1..=n {
        for i in 1..=m {
            vars.push(VarRole::Z(i, j));
        }
    }
    let mut blocks = Vec::with_capacity(k * n);
    for j in 1..=n {
        for l in 0..k {
            let rows = l * b + 1..=(l + 1) * b;
            let chains: Vec<ParityChain> = rows.clone().map(|i| chain(a, &vars, i, j - 1, j)).collect();
            let mut scope = vec![chains[0].xs[0]];
            scope.extend(chains.iter().filter_map(|c| c.from));
            scope.extend(chains.iter().map(|c| c.to));
            let mut conds: Vec<Condition> = chains.into_iter().map(Condition::Chain).collect();
            if j == n {
                conds.extend(rows.map(|i| Condition::Zero { row: i, col: n, var: vars.var(VarRole::Z(i, n)).unwrap() }));
            }
            blocks.push(ConstraintBlock::new(scope, Acceptance::Conditions(conds))?);
        }
    }
    let provenance = Provenance { mode: GeneratorMode::BlockPw, params: *params, matrix: a.clone() };
    Ok(AbstractInstance { vars, blocks, provenance })
}

/// Column blocks of width `w` with interior accumulators projected out;
/// each `R'_{r,s}` spans all code variables plus the boundary accumulators
/// of row block `r` at columns `(s-1)w` and `s w`.
pub fn abstract_nd(a: &F2Matrix, params: &GeneratorParams) -> Result<AbstractInstance> {
    let (m, n) = (a.num_rows(), a.num_cols());
    let GeneratorParams { k, b, c, .. } = *params;
    if k == 0 || b == 0 || c == 0 || m != k * b || n != c * k * b {
        return Err(Error::ParameterMismatch(format!(
            "nd mode needs m = k*b and n = c*k*b; got m={m}, n={n}, k={k}, b={b}, c={c}"
        )));
    }
    let w = params.block_width.unwrap_or(n / c);
    if w == 0 || n % w != 0 {
        return Err(Error::ParameterMismatch(format!("block width {w} does not divide n = {n}")));
    }
    let col_blocks = n / w;
    let mut vars = x_table(n);
    for t in 1..=col_blocks {
        for i in 1..=m {
            vars.push(VarRole::Z(i, t * w));
        }
    }
    let xs: Vec<u32> = (1..=n as u32).collect();
    let mut blocks = Vec::with_capacity(k * col_blocks);
    for t in 1..=col_blocks {
        for r in 0..k {
            let rows = r * b + 1..=(r + 1) * b;
            let chains: Vec<ParityChain> = rows.clone().map(|i| chain(a, &vars, i, (t - 1) * w, t * w)).collect();
            let mut scope = xs.clone();
            scope.extend(chains.iter().filter_map(|c| c.from));
            scope.extend(chains.iter().map(|c| c.to));
            let mut conds: Vec<Condition> = chains.into_iter().map(Condition::Chain).collect();
            if t == col_blocks {
                conds.extend(rows.map(|i| Condition::Zero { row: i, col: n, var: vars.var(VarRole::Z(i, n)).unwrap() }));
            }
            blocks.push(ConstraintBlock::new(scope, Acceptance::Conditions(conds))?);
        }
    }
    let provenance = Provenance { mode: GeneratorMode::Nd, params: *params, matrix: a.clone() };
    Ok(AbstractInstance { vars, blocks, provenance })
}

pub fn encode_naive(a: &F2Matrix) -> CnfFormula {
    abstract_naive(a).materialize(DEFAULT_SCOPE_CAP).expect("naive scopes have at most 3 variables")
}

pub fn encode_blocked_pathwidth(a: &F2Matrix, params: &GeneratorParams) -> Result<CnfFormula> {
    abstract_blocked(a, params)?.materialize(DEFAULT_SCOPE_CAP)
}

pub fn encode_neighborhood_diversity(a: &F2Matrix, params: &GeneratorParams) -> Result<CnfFormula> {
    abstract_nd(a, params)?.materialize(DEFAULT_SCOPE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnfgen::{formula_size, models_bruteforce, solution_projection};
    use crate::f2code::{enumerate_codewords, sample_parity_check, LinearCode};
    use crate::par::Exec;

    fn table_block(scope: Vec<u32>, f: impl Fn(u64) -> bool) -> ConstraintBlock {
        let t = (0..1u64 << scope.len()).map(f).collect();
        ConstraintBlock::new(scope, Acceptance::Table(t)).unwrap()
    }

    #[test]
    fn canonical_clause_examples() {
        let only_zero = table_block(vec![1, 2], |a| a == 0);
        let cl = constraint_to_clauses(&only_zero, 20).unwrap();
        assert_eq!(cl.len(), 3);
        assert!(cl.iter().all(|c| c.len() == 2));

        assert!(constraint_to_clauses(&table_block(vec![1, 2], |_| true), 20).unwrap().is_empty());

        let even = table_block(vec![1, 2], |a| a.count_ones() % 2 == 0);
        let mut cl: Vec<Vec<i32>> = constraint_to_clauses(&even, 20)
            .unwrap()
            .iter()
            .map(|c| c.lits().iter().map(|l| l.dimacs()).collect())
            .collect();
        cl.sort();
        assert_eq!(cl, vec![vec![-1, 2], vec![1, -2]]);
    }

    #[test]
    fn scope_cap_is_enforced() {
        let wide = table_block((1..=5).collect(), |_| false);
        assert!(matches!(constraint_to_clauses(&wide, 4), Err(Error::ScopeTooLarge { scope: 5, cap: 4 })));
        assert!(ConstraintBlock::new(vec![1, 1], Acceptance::Table(vec![true; 4])).is_err());
    }

    #[test]
    fn naive_single_parity_check() {
        let a = F2Matrix::from_bits(2, &[[1, 1]]);
        let f = encode_naive(&a);
        assert_eq!(f.num_vars(), 4);
        assert_eq!(formula_size(&f), 17);
        let p = solution_projection(&f, &[1, 2], 16).unwrap();
        let words: Vec<String> = p.iter().map(|w| w.to_string()).collect();
        assert_eq!(words, ["00", "11"]);
        let z11 = f.vars.var(VarRole::Z(1, 1)).unwrap();
        let z12 = f.vars.var(VarRole::Z(1, 2)).unwrap();
        for model in models_bruteforce(&f, Exec::Sequential).unwrap() {
            let bit = |v: u32| model >> (v - 1) & 1;
            assert_eq!(bit(z11), bit(1));
            assert_eq!(bit(z12), 0);
        }
    }

    #[test]
    fn naive_without_rows_is_unconstrained() {
        let f = encode_naive(&F2Matrix::zeros(0, 2));
        assert!(f.clauses.is_empty());
        assert_eq!(solution_projection(&f, &[1, 2], 16).unwrap().len(), 4);
    }

    #[test]
    fn blocked_matches_naive_for_single_row() {
        let a = F2Matrix::from_bits(2, &[[1, 1]]);
        let naive = encode_naive(&a);
        let blocked = encode_blocked_pathwidth(&a, &GeneratorParams::new(1, 1, 0)).unwrap();
        assert_eq!(naive.vars, blocked.vars);
        let mut m1 = models_bruteforce(&naive, Exec::Sequential).unwrap();
        let mut m2 = models_bruteforce(&blocked, Exec::Sequential).unwrap();
        m1.sort();
        m2.sort();
        assert_eq!(m1, m2);
    }

    #[test]
    fn blocked_projection_is_the_code() {
        let a = sample_parity_check(2, 4, 3);
        let f = encode_blocked_pathwidth(&a, &GeneratorParams::new(1, 2, 0)).unwrap();
        let code = enumerate_codewords(&LinearCode::new(a), 1 << 10).unwrap();
        assert_eq!(solution_projection(&f, &f.vars.x_vars(), 1 << 10).unwrap(), code);
    }

    #[test]
    fn blocked_clause_lengths() {
        let a = sample_parity_check(4, 4, 9);
        let inst = abstract_blocked(&a, &GeneratorParams::new(2, 2, 0)).unwrap();
        for (t, b) in inst.blocks.iter().enumerate() {
            let j = t / 2 + 1;
            let expect = if j >= 2 { 5 } else { 3 };
            assert_eq!(b.scope().len(), expect);
            for c in constraint_to_clauses(b, 20).unwrap() {
                assert_eq!(c.len(), expect);
            }
        }
    }

    #[test]
    fn blocked_rejects_bad_parameters() {
        let a = sample_parity_check(3, 4, 0);
        assert!(matches!(
            encode_blocked_pathwidth(&a, &GeneratorParams::new(2, 2, 0)),
            Err(Error::ParameterMismatch(_))
        ));
    }

    #[test]
    fn nd_projection_and_structure() {
        let a = sample_parity_check(2, 4, 5);
        let params = GeneratorParams::new(1, 2, 2);
        let f = encode_neighborhood_diversity(&a, &params).unwrap();
        let code = enumerate_codewords(&LinearCode::new(a), 1 << 10).unwrap();
        let xs = f.vars.x_vars();
        assert_eq!(solution_projection(&f, &xs, 1 << 10).unwrap(), code);
        for c in &f.clauses {
            for x in &xs {
                assert!(c.vars().any(|v| v == *x));
            }
        }
        assert!(f.vars.iter().all(|(_, r)| !matches!(r, Some(VarRole::Z(_, 0)))));
        assert_eq!(f.vars.var(VarRole::Z(1, 2)), Some(5));
        assert_eq!(f.vars.var(VarRole::Z(2, 4)), Some(8));
    }

    #[test]
    fn nd_cap_and_parameters() {
        let params = GeneratorParams::new(1, 20, 32);
        let a = sample_parity_check(20, 640, 0);
        assert!(matches!(encode_neighborhood_diversity(&a, &params), Err(Error::ScopeTooLarge { .. })));
        assert!(abstract_nd(&a, &params).is_ok());
        let bad = sample_parity_check(2, 5, 0);
        assert!(matches!(abstract_nd(&bad, &GeneratorParams::new(1, 2, 2)), Err(Error::ParameterMismatch(_))));
    }

    #[test]
    fn nd_square_block_variant() {
        let a = sample_parity_check(4, 8, 2);
        let mut params = GeneratorParams::new(2, 2, 2);
        params.block_width = Some(2);
        let inst = abstract_nd(&a, &params).unwrap();
        assert_eq!(inst.blocks.len(), 2 * 4);
        assert_eq!(inst.max_scope(), 8 + 4);
    }

    #[test]
    fn abstract_render_mentions_chains() {
        let a = F2Matrix::from_bits(4, &[[1, 0, 1, 1]]);
        let inst = abstract_nd(&a, &GeneratorParams::new(1, 1, 4)).unwrap();
        let text = inst.render();
        assert!(text.starts_with("abstract nd k=1 b=1 c=4 seed=none\n"));
        assert!(text.contains("z[1,2] = z[1,1] + sum a[1,j]*x[j], j=2..2 coeffs=0"));
        assert!(text.contains("z[1,4] = 0"));
    }
}
