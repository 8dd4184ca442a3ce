//! The explicit path decomposition of the contracted incidence graph of a
//! blocked instance.
//!
//! After contraction the graph has one vertex `x_j` per code variable, one
//! `s_{ℓ,j}` per accumulator class (row block `ℓ`, column `j`) and one
//! `r_{ℓ,j}` per constraint `R_j^ℓ`. The bags are
//!
//! ```text
//! B_2    = {x_1, r_{1,1}..r_{k,1}}
//! B_3    = {s_{1,1}..s_{k,1}, r_{1,1}..r_{k,1}}
//! B_3j-2 = {s_{1,j-1}..s_{k,j-1}, r_{1,j}..r_{k,j}}     j = 2..n
//! B_3j-1 = {x_j, r_{1,j}..r_{k,j}}
//! B_3j   = {s_{1,j}..s_{k,j}, r_{1,j}..r_{k,j}}
//! ```
//!
//! giving `3n - 1` bags of width `2k - 1`.

use std::fmt;

use super::{
    incidence_graph, modular_contraction_map, validate_path_decomposition, Graph, PathDecomposition, Validation,
    Vertex,
};
use crate::cnfgen::{CnfFormula, GeneratorMode, VarRole};
use crate::error::{Error, Result};

/// Vertex names of the contracted blocked-instance graph (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClaimVertex {
    X(usize),
    S(usize, usize),
    R(usize, usize),
}

impl fmt::Display for ClaimVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClaimVertex::X(j) => write!(f, "x{j}"),
            ClaimVertex::S(l, j) => write!(f, "s{l}_{j}"),
            ClaimVertex::R(l, j) => write!(f, "r{l}_{j}"),
        }
    }
}

pub fn build_claim_decomposition(k: usize, n: usize) -> PathDecomposition<ClaimVertex> {
    assert!(k >= 1 && n >= 2, "needs k >= 1 and n >= 2");
    let s = |j: usize| (1..=k).map(move |l| ClaimVertex::S(l, j));
    let r = |j: usize| (1..=k).map(move |l| ClaimVertex::R(l, j));
    let mut bags = Vec::with_capacity(3 * n - 1);
    bags.push(std::iter::once(ClaimVertex::X(1)).chain(r(1)).collect());
    bags.push(s(1).chain(r(1)).collect());
    for j in 2..=n {
        bags.push(s(j - 1).chain(r(j)).collect());
        bags.push(std::iter::once(ClaimVertex::X(j)).chain(r(j)).collect());
        bags.push(s(j).chain(r(j)).collect());
    }
    PathDecomposition::new(bags)
}

/// The contracted graph exactly as enumerated by its vertex and edge sets:
/// edges `x_j r_{ℓ,j}`, `s_{ℓ,j-1} r_{ℓ,j}` and `s_{ℓ,j} r_{ℓ,j}`.
pub fn claim_graph(k: usize, n: usize) -> Graph {
    let mut g = Graph::new();
    let mut id = std::collections::HashMap::new();
    for j in 1..=n {
        let mut names = vec![ClaimVertex::X(j)];
        names.extend((1..=k).map(|l| ClaimVertex::S(l, j)));
        names.extend((1..=k).map(|l| ClaimVertex::R(l, j)));
        for name in names {
            id.insert(name, g.add_vertex(Vertex::Named(name.to_string())));
        }
    }
    for j in 1..=n {
        for l in 1..=k {
            let r = id[&ClaimVertex::R(l, j)];
            g.add_edge(id[&ClaimVertex::X(j)], r);
            g.add_edge(id[&ClaimVertex::S(l, j)], r);
            if j >= 2 {
                g.add_edge(id[&ClaimVertex::S(l, j - 1)], r);
            }
        }
    }
    g
}

/// The decomposition mapped onto the contracted incidence graph of a formula.
#[derive(Debug, Clone)]
pub struct ResolvedClaim {
    pub contracted: Graph,
    pub decomposition: PathDecomposition,
    pub validation: Validation,
}

/// Maps the labelled bags onto the modular contraction of `formula`'s
/// incidence graph and validates them.
///
/// `s_{ℓ,j}` resolves to the class of `z_{(ℓ-1)b+1, j}` and `r_{ℓ,j}` to the
/// class of any clause containing both `x_j` and that accumulator. Labels
/// whose classes coincide resolve to the same vertex. Contracted vertices no
/// bag reaches get a leading bag each.
pub fn resolve_claim_decomposition(formula: &CnfFormula) -> Result<ResolvedClaim> {
    let prov = formula
        .provenance
        .as_ref()
        .filter(|p| p.mode == GeneratorMode::BlockPw)
        .ok_or_else(|| Error::ParameterMismatch("formula was not produced by the blocked encoder".into()))?;
    let (k, b, n) = (prov.params.k, prov.params.b, prov.matrix.num_cols());
    let g = incidence_graph(formula);
    let (contracted, class_of) = modular_contraction_map(&g);
    let nvars = formula.num_vars();

    let var_vertex = |role: VarRole| -> Result<usize> {
        let v = formula.vars.var(role).ok_or_else(|| Error::ParameterMismatch(format!("formula has no {role}")))?;
        Ok(class_of[v as usize - 1])
    };
    let mut constraint_clause = std::collections::HashMap::new();
    for (ci, c) in formula.clauses.iter().enumerate() {
        let mut x = None;
        let mut zs = Vec::new();
        for v in c.vars() {
            match formula.vars.role(v) {
                Some(VarRole::X(j)) => x = Some(j),
                Some(VarRole::Z(i, j)) => zs.push((i, j)),
                None => {}
            }
        }
        if let Some(j) = x {
            for (i, zj) in zs {
                if zj == j && (i - 1) % b == 0 {
                    constraint_clause.entry(((i - 1) / b + 1, j)).or_insert(ci);
                }
            }
        }
    }
    let resolve = |cv: ClaimVertex| -> Result<usize> {
        match cv {
            ClaimVertex::X(j) => var_vertex(VarRole::X(j)),
            ClaimVertex::S(l, j) => var_vertex(VarRole::Z((l - 1) * b + 1, j)),
            ClaimVertex::R(l, j) => constraint_clause
                .get(&(l, j))
                .map(|&ci| class_of[nvars + ci])
                .ok_or_else(|| Error::ParameterMismatch(format!("no clause for constraint {cv}"))),
        }
    };

    let labelled = build_claim_decomposition(k, n);
    let mut bags = Vec::with_capacity(labelled.len());
    let mut covered = vec![false; contracted.num_vertices()];
    for bag in &labelled.bags {
        let mut resolved: Vec<usize> = Vec::with_capacity(bag.len());
        for &cv in bag {
            let v = resolve(cv)?;
            if !resolved.contains(&v) {
                resolved.push(v);
            }
            covered[v] = true;
        }
        bags.push(resolved);
    }
    let leading: Vec<Vec<usize>> = (0..contracted.num_vertices()).filter(|&v| !covered[v]).map(|v| vec![v]).collect();
    let decomposition = PathDecomposition::new(leading.into_iter().chain(bags).collect());
    let validation = validate_path_decomposition(&contracted, &decomposition);
    Ok(ResolvedClaim { contracted, decomposition, validation })
}
