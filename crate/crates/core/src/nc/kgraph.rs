use crate::error::Result;
use crate::nc::partition::SetPartition;

/// The multigraph obtained by closing `1, 2, ..., n` into a cycle and then
/// merging vertices that share a class of the partition.
///
/// Edge `r` (0-based here, `e_{r+1}` in one-based notation) joins the classes
/// of `r + 1` and `r + 2`, with the last edge wrapping back to element 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    cycles: Vec<Vec<usize>>,
}

impl KGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// `(u, v)` class indices for each edge, in edge order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge indices (0-based) grouped by block. For a noncrossing source
    /// partition every block is a simple cycle.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// The cycle decomposition as a partition of `{1..n}` (edge `e_r` ↦ `r`).
    pub fn edge_partition(&self) -> Result<SetPartition> {
        SetPartition::new(
            self.edges.len(),
            self.cycles
                .iter()
                .map(|c| c.iter().map(|&e| e + 1).collect())
                .collect(),
        )
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// True when every block is a simple cycle (the graph is a cactus).
    pub fn is_cactus(&self) -> bool {
        self.cycles.iter().all(|block| {
            let mut degree = vec![0usize; self.vertex_count];
            for &e in block {
                let (u, v) = self.edges[e];
                degree[u] += 1;
                degree[v] += 1;
            }
            degree.iter().all(|&d| d == 0 || d == 2)
        })
    }
}

/// Builds the K-graph of `p` and splits its edges into blocks (biconnected
/// components). Self-loops form their own blocks; parallel edges between the
/// same two vertices share one.
pub fn build_kgraph(p: &SetPartition) -> KGraph {
    let n = p.n();
    let labels = p.labels();
    let edges: Vec<(usize, usize)> = (0..n).map(|r| (labels[r], labels[(r + 1) % n])).collect();
    let vertex_count = p.class_count();

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertex_count];
    for (e, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            cycles.push(vec![e]);
        } else {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
    }

    let mut blocks = Blocks {
        adj: &adj,
        disc: vec![usize::MAX; vertex_count],
        low: vec![0; vertex_count],
        time: 0,
        edge_stack: Vec::new(),
        blocks: Vec::new(),
    };
    for v in 0..vertex_count {
        if blocks.disc[v] == usize::MAX {
            blocks.visit(v, None);
        }
    }
    cycles.extend(blocks.blocks);
    for c in &mut cycles {
        c.sort_unstable();
    }
    cycles.sort_unstable_by_key(|c| c[0]);

    KGraph {
        vertex_count,
        edges,
        cycles,
    }
}

/// Tarjan's edge-stack biconnected components, keyed on edge ids so that
/// parallel edges are not mistaken for the tree edge.
struct Blocks<'a> {
    adj: &'a [Vec<(usize, usize)>],
    disc: Vec<usize>,
    low: Vec<usize>,
    time: usize,
    edge_stack: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Blocks<'_> {
    fn visit(&mut self, u: usize, parent_edge: Option<usize>) {
        self.disc[u] = self.time;
        self.low[u] = self.time;
        self.time += 1;
        for &(v, e) in &self.adj[u] {
            if Some(e) == parent_edge {
                continue;
            }
            if self.disc[v] == usize::MAX {
                self.edge_stack.push(e);
                self.visit(v, Some(e));
                self.low[u] = self.low[u].min(self.low[v]);
                if self.low[v] >= self.disc[u] {
                    let mut block = Vec::new();
                    while let Some(top) = self.edge_stack.pop() {
                        block.push(top);
                        if top == e {
                            break;
                        }
                    }
                    self.blocks.push(block);
                }
            } else if self.disc[v] < self.disc[u] {
                self.edge_stack.push(e);
                self.low[u] = self.low[u].min(self.disc[v]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nc::partition::{enumerate_nc, kreweras};

    #[test]
    fn singletons_give_one_long_cycle() {
        for n in 1..=6 {
            let g = build_kgraph(&SetPartition::singletons(n).unwrap());
            assert_eq!(g.cycle_count(), 1);
            assert_eq!(g.cycles()[0].len(), n);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn eight_element_example_decomposes_into_five_cycles() {
        let p = SetPartition::new(8, vec![vec![1], vec![2, 3, 7, 8], vec![4, 5], vec![6]]).unwrap();
        let g = build_kgraph(&p);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.cycle_count(), 5);
        let expected =
            SetPartition::new(8, vec![vec![1, 8], vec![2], vec![3, 5, 6], vec![4], vec![7]])
                .unwrap();
        assert_eq!(g.edge_partition().unwrap(), expected);
        assert!(g.is_cactus());
    }

    #[test]
    fn pair_on_two_elements_has_two_self_loops() {
        let g = build_kgraph(&SetPartition::full(2).unwrap());
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edges(), &[(0, 0), (0, 0)]);
        assert_eq!(g.cycle_count(), 2);
    }

    #[test]
    fn crossing_partition_is_not_a_cactus() {
        let p = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        let g = build_kgraph(&p);
        assert!(g.is_connected());
        assert!(!g.is_cactus());
        assert_eq!(g.cycle_count(), 1);
    }

    #[test]
    fn cycles_are_the_kreweras_complement() {
        for n in 1..=8 {
            for p in enumerate_nc(n).unwrap() {
                let g = build_kgraph(&p);
                assert!(g.is_connected());
                assert!(g.is_cactus());
                assert_eq!(g.cycle_count(), n - p.class_count() + 1);
                assert_eq!(g.edge_partition().unwrap(), kreweras(&p).unwrap(), "{p}");
            }
        }
    }
}
