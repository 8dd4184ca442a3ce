use super::Graph;
use crate::error::{Error, Result};

pub const EXACT_PATHWIDTH_LIMIT: usize = 20;

/// Exact pathwidth via the vertex separation number.
///
/// `best[S]` is the smallest possible maximum boundary over orderings that
/// place `S` first, where the boundary of a prefix counts its vertices with
/// a neighbor outside it.
pub fn exact_pathwidth(g: &Graph) -> Result<usize> {
    let n = g.num_vertices();
    if n > EXACT_PATHWIDTH_LIMIT {
        return Err(Error::TooLarge { what: "graph for exact pathwidth", size: n, limit: EXACT_PATHWIDTH_LIMIT });
    }
    if n == 0 {
        return Ok(0);
    }
    let nbr: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    let full = (1u32 << n) - 1;
    let mut best = vec![u8::MAX; 1 << n];
    best[0] = 0;
    for set in 1..=full {
        let boundary = (0..n).filter(|&v| set >> v & 1 == 1 && nbr[v] & !set != 0).count() as u8;
        let mut rest = set;
        let mut val = u8::MAX;
        while rest != 0 {
            let v = rest.trailing_zeros();
            rest &= rest - 1;
            val = val.min(best[(set & !(1 << v)) as usize]);
        }
        best[set as usize] = val.max(boundary);
    }
    Ok(best[full as usize] as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnfgen::{encode_blocked_pathwidth, GeneratorParams};
    use crate::f2code::sample_parity_check;
    use crate::graphwidth::{build_claim_decomposition, incidence_graph, modular_contraction};

    /// Minimum over all orderings of the maximum prefix boundary.
    fn separation_by_permutation(g: &Graph) -> usize {
        fn boundary_max(g: &Graph, order: &[usize]) -> usize {
            (1..=order.len())
                .map(|i| {
                    let prefix = &order[..i];
                    prefix.iter().filter(|&&v| g.neighbors(v).iter().any(|w| !prefix.contains(w))).count()
                })
                .max()
                .unwrap_or(0)
        }
        fn rec(g: &Graph, order: &mut Vec<usize>, best: &mut usize) {
            if order.len() == g.num_vertices() {
                *best = (*best).min(boundary_max(g, order));
                return;
            }
            for v in 0..g.num_vertices() {
                if !order.contains(&v) {
                    order.push(v);
                    rec(g, order, best);
                    order.pop();
                }
            }
        }
        let mut best = usize::MAX;
        rec(g, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn small_examples() {
        let p5 = Graph::from_edges(&["a", "b", "c", "d", "e"], &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(exact_pathwidth(&p5).unwrap(), 1);
        let k4 = Graph::from_edges(&["a", "b", "c", "d"], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(exact_pathwidth(&k4).unwrap(), 3);
        let star = Graph::from_edges(&["h", "a", "b", "c"], &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(exact_pathwidth(&star).unwrap(), 1);
        assert_eq!(exact_pathwidth(&Graph::new()).unwrap(), 0);
    }

    #[test]
    fn agrees_with_permutation_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..7);
            let mut g = Graph::new();
            for i in 0..n {
                g.add_vertex(super::super::Vertex::Named(format!("u{i}")));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.45) {
                        g.add_edge(u, v);
                    }
                }
            }
            assert_eq!(exact_pathwidth(&g).unwrap(), separation_by_permutation(&g));
        }
    }

    #[test]
    fn blocked_contraction_is_within_claim_width() {
        let a = sample_parity_check(1, 3, 4);
        let f = encode_blocked_pathwidth(&a, &GeneratorParams::new(1, 1, 0)).unwrap();
        let g = modular_contraction(&incidence_graph(&f));
        let pw = exact_pathwidth(&g).unwrap();
        assert!(pw <= build_claim_decomposition(1, 3).width());
    }

    #[test]
    fn refuses_large_graphs() {
        let mut g = Graph::new();
        for i in 0..21 {
            g.add_vertex(super::super::Vertex::Named(format!("u{i}")));
        }
        assert!(matches!(exact_pathwidth(&g), Err(Error::TooLarge { .. })));
    }
}
