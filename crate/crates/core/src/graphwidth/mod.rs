//! Incidence graphs, neighborhood types, modular contraction and path
//! decompositions.

mod claim;
mod pathwidth;

use std::collections::HashMap;
use std::fmt;

use crate::cnfgen::CnfFormula;
use crate::error::{Error, Result};

pub use claim::{build_claim_decomposition, claim_graph, resolve_claim_decomposition, ClaimVertex, ResolvedClaim};
pub use pathwidth::{exact_pathwidth, EXACT_PATHWIDTH_LIMIT};

/// Vertex label. `Var` and `Clause` label incidence graphs; `Named`
/// covers everything else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Var(u32),
    Clause(usize),
    Named(String),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Var(v) => write!(f, "v{v}"),
            Vertex::Clause(c) => write!(f, "c{c}"),
            Vertex::Named(s) => f.write_str(s),
        }
    }
}

impl Vertex {
    fn parse(token: &str) -> Vertex {
        let numeric = |rest: &str| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit());
        if let Some(rest) = token.strip_prefix('v').filter(|r| numeric(r)) {
            if let Ok(v) = rest.parse() {
                return Vertex::Var(v);
            }
        }
        if let Some(rest) = token.strip_prefix('c').filter(|r| numeric(r)) {
            if let Ok(c) = rest.parse() {
                return Vertex::Clause(c);
            }
        }
        Vertex::Named(token.to_string())
    }
}

/// Simple undirected graph with labelled vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<Vertex>,
    /// Sorted neighbor lists.
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: Vertex) -> usize {
        self.labels.push(label);
        self.adj.push(Vec::new());
        self.labels.len() - 1
    }

    /// Adds `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            insert_sorted(&mut self.adj[u], v);
            insert_sorted(&mut self.adj[v], u);
        }
    }

    /// Graph on vertices named by `labels` with the listed edges.
    pub fn from_edges(labels: &[&str], edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new();
        for l in labels {
            g.add_vertex(Vertex::Named((*l).to_string()));
        }
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn label(&self, v: usize) -> &Vertex {
        &self.labels[v]
    }

    pub fn find(&self, label: &Vertex) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `keep`, vertices renumbered in the given order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = Graph::new();
        for &v in keep {
            g.add_vertex(self.labels[v].clone());
        }
        for (i, &v) in keep.iter().enumerate() {
            for w in &self.adj[v] {
                if let Some(&j) = pos.get(w) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Exchange format: `graph <V> <E>` then one `label: neighbors...` line
    /// per vertex in index order.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {} {}\n", self.num_vertices(), self.num_edges());
        for (v, ns) in self.adj.iter().enumerate() {
            out.push_str(&self.labels[v].to_string());
            out.push(':');
            for &w in ns {
                out.push(' ');
                out.push_str(&self.labels[w].to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "graph" {
            return Err(Error::parse(1, "header must be `graph <V> <E>`"));
        }
        let nv: usize = toks[1].parse().map_err(|_| Error::parse(1, "bad vertex count"))?;
        let ne: usize = toks[2].parse().map_err(|_| Error::parse(1, "bad edge count"))?;
        let rows: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.trim().is_empty()).collect();
        if rows.len() != nv {
            return Err(Error::parse(1, format!("header declares {nv} vertices, found {}", rows.len())));
        }
        let mut g = Graph::new();
        let mut index = HashMap::new();
        let mut pending = Vec::new();
        for &(lno, line) in &rows {
            let (label, rest) =
                line.split_once(':').ok_or_else(|| Error::parse(lno + 1, "expected `label: neighbors`"))?;
            let label = label.trim();
            if label.is_empty() || label.contains(char::is_whitespace) {
                return Err(Error::parse(lno + 1, "bad vertex label"));
            }
            let v = g.add_vertex(Vertex::parse(label));
            if index.insert(label.to_string(), v).is_some() {
                return Err(Error::parse(lno + 1, format!("duplicate vertex {label:?}")));
            }
            pending.push((lno, v, rest));
        }
        for (lno, v, rest) in pending {
            for tok in rest.split_whitespace() {
                let &w = index.get(tok).ok_or_else(|| Error::parse(lno + 1, format!("unknown vertex {tok:?}")))?;
                if w == v {
                    return Err(Error::parse(lno + 1, "self-loop"));
                }
                g.adj[v].push(w);
            }
            g.adj[v].sort_unstable();
            g.adj[v].dedup();
        }
        for (v, row) in rows.iter().enumerate() {
            if let Some(&w) = g.adj[v].iter().find(|&&w| !g.has_edge(w, v)) {
                return Err(Error::parse(row.0 + 1, format!("edge to {} is not symmetric", g.labels[w])));
            }
        }
        if g.num_edges() != ne {
            return Err(Error::parse(1, format!("header declares {ne} edges, found {}", g.num_edges())));
        }
        Ok(g)
    }
}

fn insert_sorted(list: &mut Vec<usize>, v: usize) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

/// Bipartite graph with one vertex per variable (`Var(1..=n)`, in index
/// order) followed by one per clause.
pub fn incidence_graph(formula: &CnfFormula) -> Graph {
    let n = formula.num_vars();
    let mut g = Graph::new();
    for v in 1..=n as u32 {
        g.add_vertex(Vertex::Var(v));
    }
    for (i, c) in formula.clauses.iter().enumerate() {
        let cv = g.add_vertex(Vertex::Clause(i));
        // clause ids grow, so variable lists stay sorted by pushing
        let mut vars: Vec<usize> = c.vars().map(|v| v as usize - 1).collect();
        vars.sort_unstable();
        for &v in &vars {
            g.adj[v].push(cv);
        }
        g.adj[cv] = vars;
    }
    g
}

/// Neighborhood-type classes: `u ~ v` iff `N(u) \ {v} = N(v) \ {u}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodPartition {
    /// Classes sorted by smallest member, members ascending.
    pub classes: Vec<Vec<usize>>,
    /// Class index of each vertex.
    pub class_of: Vec<usize>,
}

impl NeighborhoodPartition {
    /// The neighborhood diversity.
    pub fn diversity(&self) -> usize {
        self.classes.len()
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Non-adjacent twins share their open neighborhood and adjacent twins share
/// their closed neighborhood, so grouping by both keys finds every class.
pub fn neighborhood_partition(g: &Graph) -> NeighborhoodPartition {
    let n = g.num_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    let union = |a: usize, b: usize, parent: &mut Vec<usize>| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    let mut open: HashMap<&[usize], usize> = HashMap::new();
    for v in 0..n {
        match open.get(g.adj[v].as_slice()) {
            Some(&u) => union(u, v, &mut parent),
            None => {
                open.insert(&g.adj[v], v);
            }
        }
    }
    let mut closed: HashMap<Vec<usize>, usize> = HashMap::new();
    for v in 0..n {
        if g.adj[v].is_empty() {
            continue;
        }
        let mut key = g.adj[v].clone();
        insert_sorted(&mut key, v);
        match closed.get(&key) {
            Some(&u) => union(u, v, &mut parent),
            None => {
                closed.insert(key, v);
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        if class_of[r] == usize::MAX {
            class_of[r] = classes.len();
            classes.push(Vec::new());
        }
        class_of[v] = class_of[r];
        classes[class_of[v]].push(v);
    }
    NeighborhoodPartition { classes, class_of }
}

/// Keeps the lowest-numbered vertex of every neighborhood class.
pub fn modular_contraction(g: &Graph) -> Graph {
    modular_contraction_map(g).0
}

/// Like [`modular_contraction`], also returning the contracted vertex of
/// every original vertex.
pub fn modular_contraction_map(g: &Graph) -> (Graph, Vec<usize>) {
    let part = neighborhood_partition(g);
    let reps: Vec<usize> = part.classes.iter().map(|c| c[0]).collect();
    (g.induced(&reps), part.class_of)
}

/// Ordered bags over vertices of type `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition<V = usize> {
    pub bags: Vec<Vec<V>>,
}

impl<V> PathDecomposition<V> {
    pub fn new(bags: Vec<Vec<V>>) -> Self {
        PathDecomposition { bags }
    }

    /// Largest bag size minus one (0 for an empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }
}

impl PathDecomposition<usize> {
    /// One bag per line, vertices by label.
    pub fn to_text(&self, g: &Graph) -> String {
        let mut out = String::new();
        for bag in &self.bags {
            let names: Vec<String> = bag.iter().map(|&v| g.label(v).to_string()).collect();
            out.push_str(&names.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(g: &Graph, text: &str) -> Result<Self> {
        let index: HashMap<String, usize> = (0..g.num_vertices()).map(|v| (g.label(v).to_string(), v)).collect();
        let bags = text
            .lines()
            .enumerate()
            .map(|(lno, line)| {
                line.split_whitespace()
                    .map(|t| index.get(t).copied().ok_or_else(|| Error::parse(lno + 1, format!("unknown vertex {t:?}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(PathDecomposition { bags })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownVertex(usize),
    VertexNotCovered(usize),
    EdgeNotCovered(usize, usize),
    /// The vertex occurs in bags `first` and `later` but not in `gap`.
    NotContiguous { vertex: usize, first: usize, gap: usize, later: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Valid { width: usize },
    Invalid(Violation),
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validation::Valid { .. })
    }

    pub fn width(&self) -> Option<usize> {
        match self {
            Validation::Valid { width } => Some(*width),
            Validation::Invalid(_) => None,
        }
    }
}

/// Checks vertex coverage, edge coverage and contiguity, in that order.
pub fn validate_path_decomposition(g: &Graph, d: &PathDecomposition) -> Validation {
    let n = g.num_vertices();
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, bag) in d.bags.iter().enumerate() {
        for &v in bag {
            if v >= n {
                return Validation::Invalid(Violation::UnknownVertex(v));
            }
            if occurs[v].last() != Some(&i) {
                occurs[v].push(i);
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| occurs[v].is_empty()) {
        return Validation::Invalid(Violation::VertexNotCovered(v));
    }
    for (u, v) in g.edges() {
        let together = occurs[u].iter().any(|i| occurs[v].binary_search(i).is_ok());
        if !together {
            return Validation::Invalid(Violation::EdgeNotCovered(u, v));
        }
    }
    for (v, occ) in occurs.iter().enumerate() {
        if let Some(w) = occ.windows(2).find(|w| w[1] != w[0] + 1) {
            return Validation::Invalid(Violation::NotContiguous { vertex: v, first: w[0], gap: w[0] + 1, later: w[1] });
        }
    }
    Validation::Valid { width: d.width() }
}
