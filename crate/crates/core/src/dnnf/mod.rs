//! Circuits in negation normal form: structural checks, evaluation,
//! forgetting and model counting.
//!
//! Nodes are stored in topological order (children before parents) and the
//! last node is the sink. Constants are childless gates: `And([])` is true
//! and `Or([])` is false, matching min/max over an empty set.

mod format;

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::cnfgen::Lit;
use crate::error::{Error, Result};
use crate::par::Exec;

pub use format::{parse_nnf, write_nnf};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Lit(Lit),
    And(Vec<usize>),
    /// `decision` names the variable the children branch on, if any.
    Or { decision: Option<u32>, children: Vec<usize> },
}

impl Node {
    pub const TRUE: Node = Node::And(Vec::new());
    pub const FALSE: Node = Node::Or { decision: None, children: Vec::new() };

    pub fn children(&self) -> &[usize] {
        match self {
            Node::Lit(_) => &[],
            Node::And(c) | Node::Or { children: c, .. } => c,
        }
    }

    pub fn as_constant(&self) -> Option<bool> {
        match self {
            Node::And(c) if c.is_empty() => Some(true),
            Node::Or { children, .. } if children.is_empty() => Some(false),
            _ => None,
        }
    }
}

/// A rooted NNF DAG over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NnfCircuit {
    nodes: Vec<Node>,
    num_vars: usize,
}

impl NnfCircuit {
    /// Validates topological order, literal range and the single-sink rule.
    pub fn new(nodes: Vec<Node>, num_vars: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ParameterMismatch("circuit has no nodes".into()));
        }
        let mut has_parent = vec![false; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            if let Node::Lit(l) = node {
                if l.var() as usize > num_vars {
                    return Err(Error::ParameterMismatch(format!("literal {l} exceeds {num_vars} variables")));
                }
            }
            for &c in node.children() {
                if c >= i {
                    return Err(Error::CyclicCircuit { node: i });
                }
                has_parent[c] = true;
            }
        }
        if let Some(node) = has_parent[..nodes.len() - 1].iter().position(|&p| !p) {
            return Err(Error::MultipleSinks { node });
        }
        Ok(NnfCircuit { nodes, num_vars })
    }

    pub fn constant(value: bool, num_vars: usize) -> Self {
        NnfCircuit { nodes: vec![if value { Node::TRUE } else { Node::FALSE }], num_vars }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    /// `var(φ_v)` for every node `v`.
    pub fn var_sets(&self) -> Vec<BTreeSet<u32>> {
        let mut sets: Vec<BTreeSet<u32>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let set = match node {
                Node::Lit(l) => BTreeSet::from([l.var()]),
                _ => node.children().iter().flat_map(|&c| sets[c].iter().copied()).collect(),
            };
            sets.push(set);
        }
        sets
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.var_sets().pop().unwrap_or_default()
    }

    /// AND nodes with two children sharing a variable.
    pub fn check_decomposable(&self) -> Vec<usize> {
        let sets = self.var_sets();
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::And(_)))
            .filter(|(_, n)| {
                let mut seen = BTreeSet::new();
                n.children().iter().any(|&c| sets[c].iter().any(|v| !seen.insert(*v)))
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_decomposable(&self) -> bool {
        self.check_decomposable().is_empty()
    }

    /// Bit position of each literal node's variable within `vars`.
    fn lit_positions(&self, vars: &[u32]) -> Vec<usize> {
        let pos: HashMap<u32, usize> = vars.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        self.nodes.iter().map(|n| if let Node::Lit(l) = n { pos[&l.var()] } else { 0 }).collect()
    }

    /// Node values for the 64 assignments `base..base + 64` packed in lanes,
    /// where assignment `mask` gives bit `p` to `vars[p]`. `base` is a
    /// multiple of 64.
    fn node_words(&self, lit_pos: &[usize], base: u64) -> Vec<u64> {
        let mut val: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for (node, &p) in self.nodes.iter().zip(lit_pos) {
            let w = match node {
                Node::Lit(l) => {
                    let w = if p < 6 { LANE_PATTERNS[p] } else if base >> p & 1 == 1 { !0 } else { 0 };
                    if l.is_positive() { w } else { !w }
                }
                Node::And(c) => c.iter().fold(!0, |acc, &i| acc & val[i]),
                Node::Or { children, .. } => children.iter().fold(0, |acc, &i| acc | val[i]),
            };
            val.push(w);
        }
        val
    }

    /// OR nodes two of whose children share a model, by enumerating all
    /// assignments to `var(φ)`.
    pub fn check_deterministic(&self) -> Result<Vec<usize>> {
        self.check_deterministic_with(Exec::default())
    }

    pub fn check_deterministic_with(&self, exec: Exec) -> Result<Vec<usize>> {
        let vars: Vec<u32> = self.vars().into_iter().collect();
        if vars.len() > BRUTE_FORCE_CIRCUIT_VARS {
            return Err(Error::TooLarge {
                what: "circuit for determinism check",
                size: vars.len(),
                limit: BRUTE_FORCE_CIRCUIT_VARS,
            });
        }
        let lit_pos = self.lit_positions(&vars);
        let lanes = lane_mask(vars.len());
        let ors: Vec<usize> = (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i], Node::Or { .. })).collect();
        let flagged = exec.chunked(words(vars.len()), |range| {
            let mut bad = BTreeSet::new();
            for w in range {
                let val = self.node_words(&lit_pos, w << 6);
                for &o in &ors {
                    let (mut seen, mut dup) = (0u64, 0u64);
                    for &c in self.nodes[o].children() {
                        dup |= seen & val[c];
                        seen |= val[c];
                    }
                    if dup & lanes != 0 {
                        bad.insert(o);
                    }
                }
            }
            bad
        });
        Ok(flagged.into_iter().flatten().collect::<BTreeSet<_>>().into_iter().collect())
    }

    /// OR nodes whose determinism is not witnessed syntactically: a decision
    /// node on `d` with two children, one having literal `d` and the other
    /// `¬d` as itself or as a direct AND child.
    fn undecided_or_nodes(&self) -> Vec<usize> {
        let has_lit = |c: usize, l: Lit| match &self.nodes[c] {
            Node::Lit(x) => *x == l,
            Node::And(cs) => cs.iter().any(|&g| self.nodes[g] == Node::Lit(l)),
            Node::Or { .. } => false,
        };
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| match n {
                Node::Or { decision, children } if children.len() >= 2 => match (decision, children.as_slice()) {
                    (Some(d), &[a, b]) => {
                        let (p, q) = (Lit::new(*d, true), Lit::new(*d, false));
                        !((has_lit(a, p) && has_lit(b, q)) || (has_lit(a, q) && has_lit(b, p)))
                    }
                    _ => true,
                },
                _ => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool> {
        let mut val = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Lit(l) => l.eval(assignment.get(l.var()).ok_or(Error::IncompleteAssignment { var: l.var() })?),
                Node::And(c) => c.iter().all(|&i| val[i]),
                Node::Or { children, .. } => children.iter().any(|&i| val[i]),
            };
            val.push(v);
        }
        Ok(val[self.sink()])
    }

    /// Truth table over `vars`; entry `mask` has bit `p` holding `vars[p]`.
    pub fn truth_table(&self, vars: &[u32], exec: Exec) -> Result<Vec<bool>> {
        if vars.len() > BRUTE_FORCE_CIRCUIT_VARS {
            return Err(Error::TooLarge { what: "truth table", size: vars.len(), limit: BRUTE_FORCE_CIRCUIT_VARS });
        }
        if let Some(&missing) = self.vars().iter().find(|v| !vars.contains(v)) {
            return Err(Error::IncompleteAssignment { var: missing });
        }
        let lit_pos = self.lit_positions(vars);
        let sink = self.sink();
        let packed = exec.map_range(words(vars.len()), |w| self.node_words(&lit_pos, w << 6)[sink]);
        let len = 1usize << vars.len();
        Ok((0..len).map(|mask| packed[mask >> 6] >> (mask & 63) & 1 == 1).collect())
    }

    /// Existentially quantifies `vars` by turning their literals into the
    /// constant true. Node and edge counts are unchanged.
    pub fn forget(&self, vars: &BTreeSet<u32>) -> Result<NnfCircuit> {
        if let Some(&node) = self.check_decomposable().first() {
            return Err(Error::NotDecomposable { node });
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Lit(l) if vars.contains(&l.var()) => Node::TRUE,
                Node::Or { decision: Some(d), children } if vars.contains(d) => {
                    Node::Or { decision: None, children: children.clone() }
                }
                other => other.clone(),
            })
            .collect();
        Ok(NnfCircuit { nodes, num_vars: self.num_vars }.sweep())
    }

    /// Drops nodes the sink does not reach.
    fn sweep(self) -> NnfCircuit {
        let sink = self.sink();
        let mut live = vec![false; self.nodes.len()];
        live[sink] = true;
        for i in (0..self.nodes.len()).rev() {
            if live[i] {
                for &c in self.nodes[i].children() {
                    live[c] = true;
                }
            }
        }
        if live.iter().all(|&l| l) {
            return self;
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.into_iter().enumerate() {
            if live[i] {
                remap[i] = nodes.len();
                nodes.push(match node {
                    Node::Lit(l) => Node::Lit(l),
                    Node::And(c) => Node::And(c.iter().map(|&x| remap[x]).collect()),
                    Node::Or { decision, children } => {
                        Node::Or { decision, children: children.iter().map(|&x| remap[x]).collect() }
                    }
                });
            }
        }
        NnfCircuit { nodes, num_vars: self.num_vars }
    }

    /// Number of assignments to `over` that satisfy the circuit.
    ///
    /// Requires decomposability and determinism; the latter is accepted on
    /// syntactic decision witnesses or, failing those, by brute force on
    /// small circuits. OR children are smoothed on the fly by weighting
    /// each with `2^|var(v) \ var(child)|`.
    pub fn count_models(&self, over: &BTreeSet<u32>) -> Result<BigUint> {
        if let Some(&node) = self.check_decomposable().first() {
            return Err(Error::NotDecomposable { node });
        }
        let undecided = self.undecided_or_nodes();
        if let Some(&first) = undecided.first() {
            if self.vars().len() > BRUTE_FORCE_CIRCUIT_VARS {
                return Err(Error::NotDeterministic { node: first });
            }
            if let Some(&node) = self.check_deterministic()?.first() {
                return Err(Error::NotDeterministic { node });
            }
        }
        let sets = self.var_sets();
        if let Some(&v) = sets[self.sink()].iter().find(|v| !over.contains(v)) {
            return Err(Error::IncompleteAssignment { var: v });
        }
        let mut counts: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let c = match node {
                Node::Lit(_) => BigUint::one(),
                Node::And(cs) => cs.iter().fold(BigUint::one(), |acc, &c| acc * &counts[c]),
                Node::Or { children, .. } => children
                    .iter()
                    .fold(BigUint::zero(), |acc, &c| acc + (&counts[c] << (sets[i].len() - sets[c].len()))),
            };
            counts.push(c);
        }
        let root = self.sink();
        Ok(counts.swap_remove(root) << (over.len() - sets[root].len()))
    }
}

/// Lane `t` of pattern `p` holds bit `p` of `t`.
const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Number of 64-lane words covering `2^nvars` assignments.
fn words(nvars: usize) -> u64 {
    (1u64 << nvars).div_ceil(64)
}

/// Lanes that hold real assignments.
fn lane_mask(nvars: usize) -> u64 {
    if nvars >= 6 { !0 } else { (1u64 << (1 << nvars)) - 1 }
}

/// Largest `|var(φ)|` for brute-force checks.
pub const BRUTE_FORCE_CIRCUIT_VARS: usize = 20;

/// A partial map from variables to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: HashMap<u32, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns `vars[p]` the bit `p` of `mask`.
    pub fn from_mask(vars: &[u32], mask: u64) -> Self {
        Assignment { values: vars.iter().enumerate().map(|(p, &v)| (v, mask >> p & 1 == 1)).collect() }
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values.get(&var).copied()
    }
}

/// Incremental construction with optional structural hashing.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    unique: Option<HashMap<Node, usize>>,
}

impl CircuitBuilder {
    /// `share` enables hashing so structurally equal nodes are stored once.
    pub fn new(share: bool) -> Self {
        CircuitBuilder { nodes: Vec::new(), unique: share.then(HashMap::new) }
    }

    pub fn add(&mut self, node: Node) -> usize {
        if let Some(u) = &self.unique {
            if let Some(&id) = u.get(&node) {
                return id;
            }
        }
        let id = self.nodes.len();
        if let Some(u) = &mut self.unique {
            u.insert(node.clone(), id);
        }
        self.nodes.push(node);
        id
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn lit(&mut self, l: Lit) -> usize {
        self.add(Node::Lit(l))
    }

    pub fn constant(&mut self, value: bool) -> usize {
        self.add(if value { Node::TRUE } else { Node::FALSE })
    }

    pub fn and(&mut self, children: Vec<usize>) -> usize {
        self.add(Node::And(children))
    }

    pub fn or(&mut self, decision: Option<u32>, children: Vec<usize>) -> usize {
        self.add(Node::Or { decision, children })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The circuit rooted at `root`, restricted to nodes it reaches.
    pub fn finish(mut self, root: usize, num_vars: usize) -> NnfCircuit {
        self.nodes.truncate(root + 1);
        NnfCircuit { nodes: self.nodes, num_vars }.sweep()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i32) -> Node {
        Node::Lit(Lit::from_dimacs(v).unwrap())
    }

    fn circuit(nodes: Vec<Node>, nv: usize) -> NnfCircuit {
        NnfCircuit::new(nodes, nv).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(matches!(NnfCircuit::new(vec![lit(1), Node::And(vec![1])], 1), Err(Error::CyclicCircuit { node: 1 })));
        assert!(matches!(NnfCircuit::new(vec![lit(1), lit(2), Node::And(vec![1])], 2), Err(Error::MultipleSinks { node: 0 })));
        assert!(NnfCircuit::new(vec![lit(3)], 2).is_err());
    }

    #[test]
    fn decomposability_examples() {
        assert!(circuit(vec![lit(1), lit(2), Node::And(vec![0, 1])], 2).is_decomposable());
        assert_eq!(circuit(vec![lit(1), Node::And(vec![0, 0])], 1).check_decomposable(), vec![1]);
        let c = circuit(vec![lit(1), lit(2), Node::Or { decision: None, children: vec![0, 1] }, Node::And(vec![2, 0])], 2);
        assert_eq!(c.check_decomposable(), vec![3]);
    }

    #[test]
    fn determinism_examples() {
        let xor = circuit(
            vec![
                lit(1),
                lit(-2),
                Node::And(vec![0, 1]),
                lit(-1),
                lit(2),
                Node::And(vec![3, 4]),
                Node::Or { decision: None, children: vec![2, 5] },
            ],
            2,
        );
        assert!(xor.check_deterministic().unwrap().is_empty());
        let or = circuit(vec![lit(1), lit(2), Node::Or { decision: None, children: vec![0, 1] }], 2);
        assert_eq!(or.check_deterministic().unwrap(), vec![2]);
    }

    #[test]
    fn evaluation_examples() {
        let t = NnfCircuit::constant(true, 0);
        assert!(t.evaluate(&Assignment::new()).unwrap());
        let taut = circuit(vec![lit(1), lit(-1), Node::Or { decision: None, children: vec![0, 1] }], 1);
        assert!(taut.evaluate(&Assignment::from_mask(&[1], 0)).unwrap());
        assert!(matches!(taut.evaluate(&Assignment::new()), Err(Error::IncompleteAssignment { var: 1 })));
    }

    #[test]
    fn forget_examples() {
        let and = circuit(vec![lit(1), lit(2), Node::And(vec![0, 1])], 2);
        let f = and.forget(&BTreeSet::from([2])).unwrap();
        assert_eq!(f.truth_table(&[1, 2], Exec::Sequential).unwrap(), vec![false, true, false, true]);
        assert_eq!((f.num_nodes(), f.num_edges()), (and.num_nodes(), and.num_edges()));
        let all = and.forget(&BTreeSet::from([1, 2])).unwrap();
        assert!(all.truth_table(&[1, 2], Exec::Sequential).unwrap().into_iter().all(|b| b));
        let bad = circuit(vec![lit(1), Node::And(vec![0, 0])], 1);
        assert!(matches!(bad.forget(&BTreeSet::new()), Err(Error::NotDecomposable { node: 1 })));
    }

    #[test]
    fn counting_examples() {
        // decision-DNNF of (x ∨ y): x ∨ (¬x ∧ y)
        let c = circuit(
            vec![lit(1), lit(-1), lit(2), Node::And(vec![1, 2]), Node::Or { decision: Some(1), children: vec![0, 3] }],
            2,
        );
        assert_eq!(c.count_models(&BTreeSet::from([1, 2])).unwrap(), BigUint::from(3u32));
        let t = NnfCircuit::constant(true, 5);
        assert_eq!(t.count_models(&(1..=5).collect()).unwrap(), BigUint::from(32u32));
        assert_eq!(NnfCircuit::constant(false, 2).count_models(&BTreeSet::from([1, 2])).unwrap(), BigUint::zero());
        let or = circuit(vec![lit(1), lit(2), Node::Or { decision: None, children: vec![0, 1] }], 2);
        assert!(matches!(or.count_models(&BTreeSet::from([1, 2])), Err(Error::NotDeterministic { node: 2 })));
        assert!(matches!(c.count_models(&BTreeSet::from([1])), Err(Error::IncompleteAssignment { var: 2 })));
    }

    #[test]
    fn packed_truth_table_matches_evaluate() {
        // parity-like chain over 8 variables crosses the 64-lane boundary
        let mut nodes = vec![lit(1)];
        for v in 2..=8 {
            let prev = nodes.len() - 1;
            nodes.push(lit(if v % 2 == 0 { v } else { -v }));
            let l = nodes.len() - 1;
            nodes.push(Node::Or { decision: None, children: vec![prev, l] });
        }
        let c = circuit(nodes, 8);
        let vars: Vec<u32> = (1..=8).collect();
        let table = c.truth_table(&vars, Exec::Parallel).unwrap();
        for mask in 0..256u64 {
            assert_eq!(table[mask as usize], c.evaluate(&Assignment::from_mask(&vars, mask)).unwrap());
        }
        let small = circuit(vec![lit(1)], 1);
        assert_eq!(small.truth_table(&[1], Exec::Sequential).unwrap(), vec![false, true]);
    }

    #[test]
    fn builder_shares_and_sweeps() {
        let mut b = CircuitBuilder::new(true);
        let x = b.lit(Lit::new(1, true));
        assert_eq!(b.lit(Lit::new(1, true)), x);
        let _dead = b.lit(Lit::new(2, true));
        let root = b.and(vec![x]);
        let c = b.finish(root, 2);
        assert_eq!(c.num_nodes(), 2);
        assert!(NnfCircuit::new(c.nodes().to_vec(), 2).is_ok());
    }
}
