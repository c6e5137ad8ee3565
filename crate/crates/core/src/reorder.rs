//! Graph partitioning and reordering.
//!
//! The partitioner is a dependency-free recursive bisection: grow
//! breadth-first level sets from a pseudo-peripheral vertex to split the
//! vertex set, then convert the resulting edge cut into a vertex separator
//! by a greedy vertex cover over the cut edges. Ties break toward the lower
//! vertex index everywhere, so orderings are reproducible.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use std::io::Write;

/// Symmetric adjacency structure without self-loops.
#[derive(Debug, Clone)]
pub struct AdjGraph {
    adj: Vec<Vec<usize>>,
}

impl AdjGraph {
    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    /// Induced subgraph on `vertices`; vertex `i` of the result is
    /// `vertices[i]`.
    pub fn induced(&self, vertices: &[usize]) -> AdjGraph {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                let mut n: Vec<usize> = self.adj[v]
                    .iter()
                    .filter(|&&w| local[w] != usize::MAX)
                    .map(|&w| local[w])
                    .collect();
                n.sort_unstable();
                n
            })
            .collect();
        AdjGraph { adj }
    }
}

/// Adjacency graph of the symmetrized sparsity pattern: edge `(i, j)`,
/// `i != j`, iff `A_ij != 0` or `A_ji != 0`.
pub fn build_graph<S: Scalar>(a: &CsrMatrix<S>) -> Result<AdjGraph> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::DimensionMismatch(
            "adjacency graph requires a square matrix".into(),
        ));
    }
    let n = a.n_rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, _) = a.row(i);
        for &j in cols {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    Ok(AdjGraph { adj })
}

/// Assignment of one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartLabel {
    Part(usize),
    Separator,
}

/// A p-way partition with vertex separator: no edge joins two distinct
/// non-separator parts.
#[derive(Debug, Clone)]
pub struct SeparatorPartition {
    pub assignment: Vec<PartLabel>,
    /// Per-part vertex lists, sorted.
    pub parts: Vec<Vec<usize>>,
    /// Separator vertices, sorted.
    pub separator: Vec<usize>,
}

impl SeparatorPartition {
    pub fn nonempty_parts(&self) -> usize {
        self.parts.iter().filter(|p| !p.is_empty()).count()
    }

    /// Scan all edges; returns the number joining two distinct parts.
    pub fn cross_edges(&self, g: &AdjGraph) -> usize {
        let mut count = 0;
        for v in 0..g.vertex_count() {
            if let PartLabel::Part(pv) = self.assignment[v] {
                for &w in g.neighbors(v) {
                    if w > v {
                        if let PartLabel::Part(pw) = self.assignment[w] {
                            if pv != pw {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    /// max part size / min nonempty part size.
    pub fn imbalance(&self) -> f64 {
        let sizes: Vec<usize> = self
            .parts
            .iter()
            .map(|p| p.len())
            .filter(|&s| s > 0)
            .collect();
        if sizes.is_empty() {
            return 1.0;
        }
        let max = *sizes.iter().max().unwrap() as f64;
        let min = *sizes.iter().min().unwrap() as f64;
        max / min
    }
}

/// Pseudo-peripheral vertex by repeated BFS from a minimum-degree seed,
/// restricted to the component of that seed within `in_set`.
fn pseudo_peripheral(g: &AdjGraph, in_set: &[bool]) -> Option<usize> {
    let n = g.vertex_count();
    let mut seed = None;
    let mut best_deg = usize::MAX;
    for v in 0..n {
        if in_set[v] && g.degree(v) < best_deg {
            best_deg = g.degree(v);
            seed = Some(v);
        }
    }
    let mut v = seed?;
    let mut ecc = 0usize;
    loop {
        let levels = bfs_levels(g, v, in_set);
        let (far, far_ecc) = levels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l != usize::MAX)
            .fold((v, 0usize), |(bv, be), (w, &l)| {
                if l > be || (l == be && g.degree(w) < g.degree(bv)) {
                    (w, l)
                } else {
                    (bv, be)
                }
            });
        if far_ecc <= ecc {
            return Some(v);
        }
        v = far;
        ecc = far_ecc;
    }
}

fn bfs_levels(g: &AdjGraph, start: usize, in_set: &[bool]) -> Vec<usize> {
    let mut level = vec![usize::MAX; g.vertex_count()];
    let mut queue = std::collections::VecDeque::new();
    level[start] = 0;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if in_set[w] && level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

/// Bisect `vertices` into two sides with sizes proportional to
/// `left_share : total_share - left_share`.
///
/// Vertices are ordered by connected component (components discovered by
/// BFS from the lowest unvisited index) and by ascending index within each
/// component, then cut at the proportional point. Cutting an index-ordered
/// component keeps cut surfaces flat on lexicographically numbered grids,
/// which is what keeps interface subgraphs connected level after level;
/// BFS level-set cuts cannot do this on bipartite graphs, where every
/// breadth-first shell is an independent set.
fn bisect(
    g: &AdjGraph,
    vertices: &[usize],
    left_share: usize,
    total_share: usize,
) -> (Vec<usize>, Vec<usize>) {
    let n = g.vertex_count();
    let mut in_set = vec![false; n];
    for &v in vertices {
        in_set[v] = true;
    }
    let mut order: Vec<usize> = Vec::with_capacity(vertices.len());
    let mut visited = vec![false; n];
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    for &seed in &sorted {
        if visited[seed] || !in_set[seed] {
            continue;
        }
        // collect the component of `seed`, then append in index order
        let levels = bfs_levels(g, seed, &in_set);
        let mut component: Vec<usize> = sorted
            .iter()
            .copied()
            .filter(|&v| !visited[v] && levels[v] != usize::MAX)
            .collect();
        for &v in &component {
            visited[v] = true;
        }
        order.append(&mut component);
    }
    let target = (vertices.len() * left_share + total_share / 2) / total_share;
    let side_b = order.split_off(target.min(order.len()));
    (order, side_b)
}

/// Recursive bisection with separator extraction.
///
/// Each bisection leaves an edge cut; the cut is covered by taking the
/// smaller of its two boundary vertex sets (the whole endpoint side of the
/// cut edges), which moves into the separator before the recursion
/// continues. Ties go to the side holding the lower vertex index.
fn partition_with_separator(
    g: &AdjGraph,
    vertices: Vec<usize>,
    p: usize,
    parts: &mut Vec<Vec<usize>>,
    separator: &mut Vec<usize>,
) {
    if p == 1 || vertices.len() <= 1 {
        let mut v = vertices;
        v.sort_unstable();
        parts.push(v);
        for _ in 1..p {
            parts.push(Vec::new());
        }
        return;
    }
    let p_left = p / 2;
    let (a, b) = bisect(g, &vertices, p_left, p);

    let in_a = {
        let mut m = vec![false; g.vertex_count()];
        for &v in &a {
            m[v] = true;
        }
        m
    };
    let in_b = {
        let mut m = vec![false; g.vertex_count()];
        for &v in &b {
            m[v] = true;
        }
        m
    };
    let mut boundary_a: Vec<usize> = a
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().any(|&w| in_b[w]))
        .collect();
    let mut boundary_b: Vec<usize> = b
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().any(|&w| in_a[w]))
        .collect();
    boundary_a.sort_unstable();
    boundary_b.sort_unstable();

    let take_a = match boundary_a.len().cmp(&boundary_b.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => boundary_a.first() <= boundary_b.first(),
    };
    let side_sep = if take_a { &boundary_a } else { &boundary_b };
    let in_sep = {
        let mut m = vec![false; g.vertex_count()];
        for &v in side_sep {
            m[v] = true;
        }
        m
    };
    separator.extend_from_slice(side_sep);

    let a_rest: Vec<usize> = a.into_iter().filter(|&v| !in_sep[v]).collect();
    let b_rest: Vec<usize> = b.into_iter().filter(|&v| !in_sep[v]).collect();
    partition_with_separator(g, a_rest, p_left, parts, separator);
    partition_with_separator(g, b_rest, p - p_left, parts, separator);
}

/// p-way partition with vertex separator.
pub fn pway_separator(g: &AdjGraph, p: usize) -> Result<SeparatorPartition> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let mut parts: Vec<Vec<usize>> = Vec::with_capacity(p);
    let mut separator: Vec<usize> = Vec::new();
    partition_with_separator(g, (0..n).collect(), p, &mut parts, &mut separator);
    debug_assert_eq!(parts.len(), p);
    separator.sort_unstable();

    let mut assignment = vec![PartLabel::Separator; n];
    for (k, part) in parts.iter().enumerate() {
        for &v in part {
            assignment[v] = PartLabel::Part(k);
        }
    }
    Ok(SeparatorPartition {
        assignment,
        parts,
        separator,
    })
}

/// Ordering of one level: interior vertices part by part, then the
/// interface.
#[derive(Debug, Clone)]
pub struct LevelOrdering {
    /// New-to-old permutation within the level's window.
    pub perm: Vec<usize>,
    /// Interior block sizes, one per part.
    pub part_sizes: Vec<usize>,
    /// Interface (separator) size.
    pub separator_len: usize,
}

/// The composed multilevel ordering.
#[derive(Debug, Clone)]
pub struct MultilevelOrdering {
    pub levels: Vec<LevelOrdering>,
    /// New-to-old permutation on the full index set.
    pub global_perm: Vec<usize>,
    /// Levels actually created (may be fewer than requested).
    pub achieved_levels: usize,
}

impl MultilevelOrdering {
    /// Window size at `level`: the whole matrix at level 0, the previous
    /// interface below.
    pub fn window_len(&self, level: usize) -> usize {
        if level == 0 {
            self.global_perm.len()
        } else {
            self.levels[level - 1].separator_len
        }
    }

    /// Dump: level boundaries plus the global permutation.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "levels {}", self.achieved_levels)?;
        for (l, lev) in self.levels.iter().enumerate() {
            let sizes: Vec<String> = lev.part_sizes.iter().map(|s| s.to_string()).collect();
            writeln!(
                w,
                "level {} interiors {} separator {}",
                l,
                sizes.join(" "),
                lev.separator_len
            )?;
        }
        writeln!(w, "permutation")?;
        for &v in &self.global_perm {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// Multilevel interiors-first reordering.
///
/// At each level the interface graph of the previous level is partitioned
/// into `p` parts plus a separator; interiors are ordered part by part
/// (ascending original index inside a part) ahead of the separator. Level
/// creation stops early when the remaining interface has fewer than `2p`
/// vertices to split.
pub fn multilevel_reorder<S: Scalar>(
    a: &CsrMatrix<S>,
    requested_levels: usize,
    p: usize,
) -> Result<MultilevelOrdering> {
    if requested_levels == 0 {
        return Err(Error::InvalidArgument(
            "level count must be at least 1".into(),
        ));
    }
    let n = a.n_rows();
    let g0 = build_graph(a)?;

    let mut levels: Vec<LevelOrdering> = Vec::new();
    // active[i] = original index of position i in the current window
    let mut active: Vec<usize> = (0..n).collect();
    let mut graph = g0;
    let mut global_perm: Vec<usize> = Vec::with_capacity(n);

    for level in 0..requested_levels {
        let sp = pway_separator(&graph, p)?;
        let mut perm: Vec<usize> = Vec::with_capacity(graph.vertex_count());
        let mut part_sizes = Vec::with_capacity(p);
        for part in &sp.parts {
            perm.extend_from_slice(part);
            part_sizes.push(part.len());
        }
        perm.extend_from_slice(&sp.separator);
        let interface = sp.separator;
        let separator_len = interface.len();

        global_perm.extend(
            perm[..perm.len() - separator_len]
                .iter()
                .map(|&i| active[i]),
        );
        levels.push(LevelOrdering {
            perm,
            part_sizes,
            separator_len,
        });

        let last_level = level + 1 == requested_levels || separator_len < 2 * p;
        if last_level {
            global_perm.extend(interface.iter().map(|&i| active[i]));
            break;
        }
        graph = graph.induced(&interface);
        active = interface.iter().map(|&i| active[i]).collect();
    }

    debug_assert_eq!(global_perm.len(), n);
    Ok(MultilevelOrdering {
        achieved_levels: levels.len(),
        levels,
        global_perm,
    })
}

/// Reverse Cuthill-McKee: reverse breadth-first layering from a
/// pseudo-peripheral vertex of each component, neighbors visited in
/// ascending (degree, index) order.
pub fn rcm(g: &AdjGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];

    while order.len() < n {
        let mut remaining = vec![false; n];
        for v in 0..n {
            remaining[v] = !visited[v];
        }
        let Some(start) = pseudo_peripheral(g, &remaining) else {
            break;
        };
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            nbrs.sort_by_key(|&w| (g.degree(w), w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Bandwidth of the pattern under `perm` (new-to-old).
pub fn graph_bandwidth(g: &AdjGraph, perm: &[usize]) -> usize {
    let n = g.vertex_count();
    let mut pos = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    let mut bw = 0;
    for v in 0..n {
        for &w in g.neighbors(v) {
            bw = bw.max(pos[v].abs_diff(pos[w]));
        }
    }
    bw
}
