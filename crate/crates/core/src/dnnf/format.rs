//! Text format: header `nnf <nodes> <edges> <vars>`, then one node per line
//! (`L <±var>`, `A <n> <ids…>`, `O <decision|0> <n> <ids…>`), sink last.

use std::fmt::Write as _;

use super::{NnfCircuit, Node};
use crate::cnfgen::Lit;
use crate::error::{Error, Result};

pub fn write_nnf(circuit: &NnfCircuit) -> String {
    let mut out = format!("nnf {} {} {}\n", circuit.num_nodes(), circuit.num_edges(), circuit.num_vars());
    for node in circuit.nodes() {
        match node {
            Node::Lit(l) => writeln!(out, "L {}", l.dimacs()),
            Node::And(c) => writeln!(out, "A {}{}", c.len(), ids(c)),
            Node::Or { decision, children } => {
                writeln!(out, "O {} {}{}", decision.unwrap_or(0), children.len(), ids(children))
            }
        }
        .unwrap();
    }
    out
}

fn ids(children: &[usize]) -> String {
    children.iter().map(|c| format!(" {c}")).collect()
}

pub fn parse_nnf(text: &str) -> Result<NnfCircuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'));
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing nnf header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "nnf" {
        return Err(Error::parse(hline, "expected `nnf <nodes> <edges> <vars>`"));
    }
    let num = |s: &str, line: usize| s.parse::<usize>().map_err(|_| Error::parse(line, format!("bad number `{s}`")));
    let (n_nodes, n_edges, n_vars) = (num(h[1], hline)?, num(h[2], hline)?, num(h[3], hline)?);

    let mut nodes = Vec::with_capacity(n_nodes);
    for (line, body) in lines {
        let t: Vec<&str> = body.split_whitespace().collect();
        let id = nodes.len();
        let children = |count: &str, rest: &[&str]| -> Result<Vec<usize>> {
            let n = num(count, line)?;
            if rest.len() != n {
                return Err(Error::parse(line, format!("expected {n} children, found {}", rest.len())));
            }
            let ids = rest.iter().map(|s| num(s, line)).collect::<Result<Vec<_>>>()?;
            if let Some(&c) = ids.iter().find(|&&c| c == id) {
                return Err(Error::CyclicCircuit { node: c });
            }
            if let Some(&c) = ids.iter().find(|&&c| c > id) {
                return Err(Error::parse(line, format!("node {id} references later node {c}")));
            }
            Ok(ids)
        };
        let node = match t.as_slice() {
            ["L", v] => {
                let v: i32 = v.parse().map_err(|_| Error::parse(line, format!("bad literal `{v}`")))?;
                Node::Lit(Lit::from_dimacs(v).ok_or_else(|| Error::parse(line, "literal 0"))?)
            }
            ["A", count, rest @ ..] => Node::And(children(count, rest)?),
            ["O", d, count, rest @ ..] => {
                let d = num(d, line)? as u32;
                Node::Or { decision: (d != 0).then_some(d), children: children(count, rest)? }
            }
            _ => return Err(Error::parse(line, format!("unrecognised node line `{body}`"))),
        };
        nodes.push(node);
    }
    if nodes.len() != n_nodes {
        return Err(Error::parse(hline, format!("header declares {n_nodes} nodes, found {}", nodes.len())));
    }
    let circuit = NnfCircuit::new(nodes, n_vars)?;
    if circuit.num_edges() != n_edges {
        return Err(Error::parse(hline, format!("header declares {n_edges} edges, found {}", circuit.num_edges())));
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// A random circuit in which every non-sink node has a parent.
    fn random_circuit(rng: &mut ChaCha8Rng) -> NnfCircuit {
        let nv = rng.gen_range(1..=5u32);
        let mut nodes: Vec<Node> = Vec::new();
        let mut orphans: Vec<usize> = Vec::new();
        for _ in 0..rng.gen_range(1..=12) {
            let id = nodes.len();
            let node = if id == 0 || rng.gen_bool(0.4) {
                Node::Lit(Lit::new(rng.gen_range(1..=nv), rng.gen()))
            } else {
                let mut ch: Vec<usize> = std::mem::take(&mut orphans);
                if ch.is_empty() || rng.gen_bool(0.3) {
                    ch.push(rng.gen_range(0..id));
                }
                if rng.gen() {
                    Node::And(ch)
                } else {
                    Node::Or { decision: rng.gen_bool(0.5).then(|| rng.gen_range(1..=nv)), children: ch }
                }
            };
            nodes.push(node);
            orphans.push(id);
        }
        if orphans.len() > 1 {
            nodes.push(Node::And(orphans));
        }
        NnfCircuit::new(nodes, nv as usize).unwrap()
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let c = random_circuit(&mut rng);
            let text = write_nnf(&c);
            assert_eq!(parse_nnf(&text).unwrap(), c, "{text}");
            assert_eq!(write_nnf(&parse_nnf(&text).unwrap()), text);
        }
    }

    #[test]
    fn header_and_lines() {
        let c = parse_nnf("nnf 3 2 2\nL 1\nL -2\nA 2 0 1\n").unwrap();
        assert_eq!(c.num_edges(), 2);
        assert!(parse_nnf("nnf 3 2 2\nL 1\nA 2 0 2\nL -2\n").is_err_and(|e| matches!(e, Error::Parse { line: 3, .. })));
        assert!(matches!(parse_nnf("nnf 2 1 1\nL 1\nA 1 1\n"), Err(Error::CyclicCircuit { node: 1 })));
        assert!(matches!(parse_nnf("nnf 3 1 2\nL 1\nL 2\nA 1 1\n"), Err(Error::MultipleSinks { node: 0 })));
        assert!(parse_nnf("cnf 1 0 1\nL 1\n").is_err());
        assert!(parse_nnf("nnf 1 0 0\nO 0 0\n").unwrap().nodes()[0].as_constant() == Some(false));
    }
}
