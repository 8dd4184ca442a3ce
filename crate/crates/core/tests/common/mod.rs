#![allow(dead_code)]

use codecnf::cnfgen::{Clause, CnfFormula, Lit, VariableTable};
use codecnf::dnnf::{CircuitBuilder, NnfCircuit, Node};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random CNF with clauses of 1..=width distinct variables.
pub fn random_cnf(rng: &mut ChaCha8Rng, nvars: usize, nclauses: usize, width: usize) -> CnfFormula {
    let vars: Vec<u32> = (1..=nvars as u32).collect();
    let clauses = (0..nclauses)
        .map(|_| {
            let w = rng.gen_range(1..=width.min(nvars));
            let lits = vars.choose_multiple(rng, w).map(|&v| Lit::new(v, rng.gen())).collect();
            Clause::new(lits).unwrap()
        })
        .collect();
    CnfFormula::new(VariableTable::unnamed(nvars), clauses).unwrap()
}

/// Random decomposable circuit over `vars`. With `decisions`, every OR is a
/// decision on one variable, so the circuit is also deterministic.
pub fn random_dnnf(rng: &mut ChaCha8Rng, vars: &[u32], decisions: bool) -> NnfCircuit {
    let mut b = CircuitBuilder::new(rng.gen());
    let root = grow(rng, &mut b, vars.to_vec(), 4, decisions);
    b.finish(root, vars.iter().copied().max().unwrap_or(0) as usize)
}

fn grow(rng: &mut ChaCha8Rng, b: &mut CircuitBuilder, mut vars: Vec<u32>, depth: usize, decisions: bool) -> usize {
    if vars.is_empty() || depth == 0 || rng.gen_bool(0.2) {
        return match vars.choose(rng) {
            Some(&v) if rng.gen_bool(0.9) => b.lit(Lit::new(v, rng.gen())),
            _ => b.constant(rng.gen_bool(0.7)),
        };
    }
    vars.shuffle(rng);
    if rng.gen_bool(0.5) {
        let cut = rng.gen_range(0..=vars.len());
        let right = vars.split_off(cut);
        let l = grow(rng, b, vars, depth - 1, decisions);
        let r = grow(rng, b, right, depth - 1, decisions);
        b.and(vec![l, r])
    } else if decisions {
        let v = vars.pop().unwrap();
        let hi = grow(rng, b, vars.clone(), depth - 1, decisions);
        let lo = grow(rng, b, vars, depth - 1, decisions);
        let (p, n) = (b.lit(Lit::new(v, true)), b.lit(Lit::new(v, false)));
        let (hi, lo) = (b.and(vec![p, hi]), b.and(vec![n, lo]));
        b.or(Some(v), vec![hi, lo])
    } else {
        let l = grow(rng, b, vars.clone(), depth - 1, decisions);
        let r = grow(rng, b, vars, depth - 1, decisions);
        b.or(None, vec![l, r])
    }
}

/// Value of `node` by the recursive min/max definition, without sharing.
pub fn eval_recursive(c: &NnfCircuit, node: usize, value: &dyn Fn(u32) -> bool) -> bool {
    match &c.nodes()[node] {
        Node::Lit(l) => l.is_positive() == value(l.var()),
        Node::And(ch) => ch.iter().all(|&i| eval_recursive(c, i, value)),
        Node::Or { children, .. } => children.iter().any(|&i| eval_recursive(c, i, value)),
    }
}

/// Truth table over `vars` via the recursive evaluator; bit `p` of the
/// index is `vars[p]`.
pub fn recursive_table(c: &NnfCircuit, vars: &[u32]) -> Vec<bool> {
    (0..1u64 << vars.len())
        .map(|mask| {
            let value = |v: u32| mask >> vars.iter().position(|&x| x == v).unwrap() & 1 == 1;
            eval_recursive(c, c.sink(), &value)
        })
        .collect()
}

/// Existential projection of a table over `vars` onto `keep`, re-expanded to
/// `vars` so the result is comparable with the original indexing.
pub fn project(table: &[bool], vars: &[u32], keep: &[u32]) -> Vec<bool> {
    let kept_mask: u64 = vars.iter().enumerate().filter(|(_, v)| keep.contains(v)).map(|(p, _)| 1 << p).sum();
    (0..table.len() as u64)
        .map(|mask| (0..table.len() as u64).any(|other| other & kept_mask == mask & kept_mask && table[other as usize]))
        .collect()
}

/// Truth table of a CNF over `1..=n`; bit `p` of the index is variable `p + 1`.
pub fn cnf_table(f: &CnfFormula) -> Vec<bool> {
    (0..1u64 << f.num_vars())
        .map(|mask| f.clauses.iter().all(|c| c.lits().iter().any(|l| l.eval(mask >> (l.var() - 1) & 1 == 1))))
        .collect()
}
