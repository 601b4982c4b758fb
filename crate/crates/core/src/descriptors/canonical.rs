//! Canonical forms of rooted, species-labeled graphs.
//!
//! Vertices are first colored by (root flag, shell index, species). The
//! coloring is refined to an equitable ordered partition, and the search tree
//! of individualization–refinement is explored for the lexicographically
//! smallest adjacency certificate. Automorphisms found at equal leaves prune
//! the tree, both by backjumping and by orbits of the pointwise stabilizer
//! of the current prefix.

use std::collections::VecDeque;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::network::LocalEnvironment;

/// Default upper bound on the number of atoms we attempt to canonize.
pub const DEFAULT_SIZE_CAP: usize = 512;

/// Canonical byte string of a rooted labeled graph. Two keys are equal iff
/// the graphs are isomorphic by a map that fixes the root and preserves
/// species.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalGraphKey(Vec<u8>);

impl CanonicalGraphKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    /// Atom and bond counts read back from the key header.
    pub fn size(&self) -> (usize, usize) {
        let n = u32::from_le_bytes(self.0[0..4].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(self.0[4..8].try_into().unwrap()) as usize;
        (n, m)
    }

    pub fn digest_hex(&self) -> String {
        let digest = Sha256::digest(&self.0);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalGraphKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = self.size();
        write!(f, "{n} atoms, {m} bonds, #{}", self.digest_hex())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct VertexLabel {
    not_root: bool,
    shell: u32,
    species: String,
}

/// Canonical form of the whole environment graph, rooted at its root.
pub fn canonical_form(env: &LocalEnvironment<'_>, cap: usize) -> Result<CanonicalGraphKey> {
    if env.len() > cap {
        return Err(Error::TooLarge { size: env.len(), cap });
    }
    let labels: Vec<VertexLabel> = (0..env.len())
        .map(|i| VertexLabel {
            not_root: i != 0,
            shell: env.shell(i),
            species: env.species_label(i).to_string(),
        })
        .collect();
    let adj: Vec<Vec<u32>> = (0..env.len()).map(|i| env.neighbors(i).to_vec()).collect();
    Ok(canonize(&labels, &adj))
}

/// Canonical form of the subgraph of an environment spanned by `edges`
/// (local indices), rooted at the environment root. Vertices are the
/// root plus every endpoint.
pub(crate) fn canonical_form_of_edges(
    env: &LocalEnvironment<'_>,
    edges: &[(u32, u32)],
    cap: usize,
) -> Result<CanonicalGraphKey> {
    let mut vertices: Vec<u32> = vec![0];
    for &(a, b) in edges {
        vertices.push(a);
        vertices.push(b);
    }
    vertices.sort_unstable();
    vertices.dedup();
    if vertices.len() > cap {
        return Err(Error::TooLarge { size: vertices.len(), cap });
    }
    let index = |v: u32| vertices.binary_search(&v).unwrap() as u32;
    let mut adj = vec![Vec::new(); vertices.len()];
    for &(a, b) in edges {
        let (ia, ib) = (index(a), index(b));
        adj[ia as usize].push(ib);
        adj[ib as usize].push(ia);
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    let labels: Vec<VertexLabel> = vertices
        .iter()
        .map(|&v| VertexLabel {
            not_root: v != 0,
            shell: env.shell(v as usize),
            species: env.species_label(v as usize).to_string(),
        })
        .collect();
    Ok(canonize(&labels, &adj))
}

/// Canonical key of an arbitrary rooted graph given by species labels and
/// edges. Shell indices are BFS distances from the root; atoms the root
/// cannot reach share a separate "unreachable" shell.
pub fn rooted_canonical_key<S: AsRef<str>>(
    species: &[S],
    edges: &[(u32, u32)],
    root: u32,
    cap: usize,
) -> Result<CanonicalGraphKey> {
    let n = species.len();
    if n > cap {
        return Err(Error::TooLarge { size: n, cap });
    }
    if root as usize >= n {
        return Err(Error::InvalidArgument(format!("root {root} out of range")));
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a == b || a as usize >= n || b as usize >= n {
            return Err(Error::InvalidArgument(format!("bad edge ({a},{b})")));
        }
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    let mut shell = vec![u32::MAX; n];
    shell[root as usize] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u as usize] {
            if shell[w as usize] == u32::MAX {
                shell[w as usize] = shell[u as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    let labels: Vec<VertexLabel> = (0..n)
        .map(|v| VertexLabel {
            not_root: v as u32 != root,
            shell: shell[v],
            species: species[v].as_ref().to_string(),
        })
        .collect();
    Ok(canonize(&labels, &adj))
}

fn canonize(labels: &[VertexLabel], adj: &[Vec<u32>]) -> CanonicalGraphKey {
    let n = labels.len();
    let mut distinct: Vec<&VertexLabel> = labels.iter().collect();
    distinct.sort();
    distinct.dedup();
    let color: Vec<u32> = labels
        .iter()
        .map(|l| distinct.binary_search(&l).unwrap() as u32)
        .collect();

    let best = if n == 0 {
        Vec::new()
    } else {
        let mut part = Partition::from_colors(&color, distinct.len());
        let mut scratch = Scratch::new(n);
        let all_cells = part.cell_starts();
        part.refine(adj, all_cells, &mut scratch);
        let mut search = Search {
            adj,
            scratch,
            path: Vec::new(),
            first: None,
            best: None,
            generators: Vec::new(),
        };
        search.explore(part);
        search.best.map(|leaf| leaf.lab).unwrap_or_default()
    };

    encode(labels, adj, &distinct, &color, &best)
}

fn encode(
    labels: &[VertexLabel],
    adj: &[Vec<u32>],
    distinct: &[&VertexLabel],
    color: &[u32],
    lab: &[u32],
) -> CanonicalGraphKey {
    let n = labels.len();
    let m: usize = adj.iter().map(|r| r.len()).sum::<usize>() / 2;
    let mut out = Vec::with_capacity(16 + 4 * n + 4 * m);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    out.extend_from_slice(&(distinct.len() as u32).to_le_bytes());
    for (c, l) in distinct.iter().enumerate() {
        let size = color.iter().filter(|&&x| x as usize == c).count() as u32;
        out.push(u8::from(!l.not_root));
        out.extend_from_slice(&l.shell.to_le_bytes());
        out.extend_from_slice(&(l.species.len() as u32).to_le_bytes());
        out.extend_from_slice(l.species.as_bytes());
        out.extend_from_slice(&size.to_le_bytes());
    }
    for word in certificate(adj, lab) {
        out.extend_from_slice(&word.to_le_bytes());
    }
    CanonicalGraphKey(out)
}

/// Adjacency of the relabeled graph: for each position, the sorted positions
/// of its neighbors, preceded by their count.
fn certificate(adj: &[Vec<u32>], lab: &[u32]) -> Vec<u32> {
    let n = lab.len();
    let mut pos = vec![0u32; n];
    for (p, &v) in lab.iter().enumerate() {
        pos[v as usize] = p as u32;
    }
    let mut out = Vec::with_capacity(n + adj.iter().map(|r| r.len()).sum::<usize>());
    let mut row = Vec::new();
    for &v in lab {
        row.clear();
        row.extend(adj[v as usize].iter().map(|&w| pos[w as usize]));
        row.sort_unstable();
        out.push(row.len() as u32);
        out.extend_from_slice(&row);
    }
    out
}

struct Scratch {
    count: Vec<u32>,
    touched: Vec<u32>,
    in_queue: Vec<bool>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n],
            touched: Vec::new(),
            in_queue: vec![false; n],
        }
    }
}

/// Ordered partition of `0..n`. Cells are contiguous ranges of `lab` and are
/// identified by their start index.
#[derive(Clone)]
struct Partition {
    lab: Vec<u32>,
    pos: Vec<u32>,
    cell_of: Vec<u32>,
    cell_end: Vec<u32>,
    cells: usize,
}

impl Partition {
    fn from_colors(color: &[u32], num_colors: usize) -> Self {
        let n = color.len();
        let mut lab: Vec<u32> = (0..n as u32).collect();
        lab.sort_by_key(|&v| (color[v as usize], v));
        let mut pos = vec![0u32; n];
        let mut cell_of = vec![0u32; n];
        let mut cell_end = vec![0u32; n];
        let mut start = 0usize;
        let mut cells = 0;
        while start < n {
            let c = color[lab[start] as usize];
            let mut end = start;
            while end < n && color[lab[end] as usize] == c {
                end += 1;
            }
            for p in start..end {
                pos[lab[p] as usize] = p as u32;
                cell_of[lab[p] as usize] = start as u32;
            }
            cell_end[start] = end as u32;
            cells += 1;
            start = end;
        }
        debug_assert!(cells <= num_colors);
        Self {
            lab,
            pos,
            cell_of,
            cell_end,
            cells,
        }
    }

    fn is_discrete(&self) -> bool {
        self.cells == self.lab.len()
    }

    fn cell_starts(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.cells);
        let mut s = 0usize;
        while s < self.lab.len() {
            out.push(s as u32);
            s = self.cell_end[s] as usize;
        }
        out
    }

    /// First smallest non-singleton cell.
    fn target_cell(&self) -> Option<u32> {
        let mut best: Option<(u32, u32)> = None;
        let mut s = 0usize;
        while s < self.lab.len() {
            let e = self.cell_end[s] as usize;
            let size = (e - s) as u32;
            if size > 1 && best.is_none_or(|(_, b)| size < b) {
                best = Some((s as u32, size));
            }
            s = e;
        }
        best.map(|(s, _)| s)
    }

    /// Splits `v` off the front of its cell; returns the new singleton cell.
    fn individualize(&mut self, v: u32) -> u32 {
        let s = self.cell_of[v as usize];
        let e = self.cell_end[s as usize];
        let p = self.pos[v as usize];
        let first = self.lab[s as usize];
        self.lab.swap(s as usize, p as usize);
        self.pos[first as usize] = p;
        self.pos[v as usize] = s;
        self.cell_end[s as usize] = s + 1;
        self.cell_end[s as usize + 1] = e;
        for q in s + 1..e {
            self.cell_of[self.lab[q as usize] as usize] = s + 1;
        }
        self.cells += 1;
        s
    }

    /// Refines to the coarsest equitable partition finer than the current
    /// one, given that it is already stable against every cell not queued.
    fn refine(&mut self, adj: &[Vec<u32>], initial: Vec<u32>, scratch: &mut Scratch) {
        let mut queue: VecDeque<u32> = VecDeque::with_capacity(initial.len());
        for s in initial {
            if !scratch.in_queue[s as usize] {
                scratch.in_queue[s as usize] = true;
                queue.push_back(s);
            }
        }
        let mut split_cells: Vec<u32> = Vec::new();
        while let Some(splitter) = queue.pop_front() {
            scratch.in_queue[splitter as usize] = false;
            if self.is_discrete() {
                continue;
            }
            let end = self.cell_end[splitter as usize];
            for p in splitter..end {
                let v = self.lab[p as usize];
                for &w in &adj[v as usize] {
                    if scratch.count[w as usize] == 0 {
                        scratch.touched.push(w);
                    }
                    scratch.count[w as usize] += 1;
                }
            }
            split_cells.clear();
            split_cells.extend(scratch.touched.iter().map(|&w| self.cell_of[w as usize]));
            split_cells.sort_unstable();
            split_cells.dedup();

            for &c in &split_cells {
                let (cs, ce) = (c as usize, self.cell_end[c as usize] as usize);
                if ce - cs == 1 {
                    continue;
                }
                let count = &scratch.count;
                let cell = &mut self.lab[cs..ce];
                cell.sort_unstable_by_key(|&v| count[v as usize]);
                if count[cell[0] as usize] == count[cell[ce - cs - 1] as usize] {
                    continue;
                }
                // fragment boundaries
                let mut fragments: Vec<(usize, usize)> = Vec::new();
                let mut fs = cs;
                for p in cs + 1..=ce {
                    if p == ce || count[self.lab[p] as usize] != count[self.lab[fs] as usize] {
                        fragments.push((fs, p));
                        fs = p;
                    }
                }
                for &(a, b) in &fragments {
                    self.cell_end[a] = b as u32;
                    for p in a..b {
                        let v = self.lab[p] as usize;
                        self.pos[v] = p as u32;
                        self.cell_of[v] = a as u32;
                    }
                }
                self.cells += fragments.len() - 1;

                if scratch.in_queue[cs] {
                    for &(a, _) in &fragments[1..] {
                        scratch.in_queue[a] = true;
                        queue.push_back(a as u32);
                    }
                } else {
                    let largest = fragments
                        .iter()
                        .enumerate()
                        .max_by(|x, y| (x.1 .1 - x.1 .0).cmp(&(y.1 .1 - y.1 .0)).then(y.0.cmp(&x.0)))
                        .map(|(i, _)| i)
                        .unwrap();
                    for (i, &(a, _)) in fragments.iter().enumerate() {
                        if i != largest {
                            scratch.in_queue[a] = true;
                            queue.push_back(a as u32);
                        }
                    }
                }
            }
            for &w in &scratch.touched {
                scratch.count[w as usize] = 0;
            }
            scratch.touched.clear();
        }
    }
}

struct Leaf {
    lab: Vec<u32>,
    cert: Vec<u32>,
    path: Vec<u32>,
}

struct Search<'a> {
    adj: &'a [Vec<u32>],
    scratch: Scratch,
    path: Vec<u32>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    /// Explores the subtree below `part`. Returns `Some(depth)` to unwind
    /// to the ancestor at that depth, whose remaining children are still
    /// to be explored.
    fn explore(&mut self, part: Partition) -> Option<usize> {
        let depth = self.path.len();
        let Some(target) = part.target_cell() else {
            return self.visit_leaf(&part);
        };
        let end = part.cell_end[target as usize] as usize;
        let mut children: Vec<u32> = part.lab[target as usize..end].to_vec();
        children.sort_unstable();

        let mut done: Vec<u32> = Vec::new();
        let mut orbits: Option<(usize, Vec<u32>)> = None;
        for &child in &children {
            if !done.is_empty() {
                if orbits.as_ref().is_none_or(|(g, _)| *g != self.generators.len()) {
                    orbits = Some((self.generators.len(), self.stabilizer_orbits()));
                }
                let rep = &orbits.as_ref().unwrap().1;
                if done.iter().any(|&d| rep[d as usize] == rep[child as usize]) {
                    continue;
                }
            }
            let mut next = part.clone();
            let cell = next.individualize(child);
            next.refine(self.adj, vec![cell], &mut self.scratch);
            self.path.push(child);
            let jump = self.explore(next);
            self.path.pop();
            done.push(child);
            if let Some(t) = jump {
                if t < depth {
                    return Some(t);
                }
            }
        }
        None
    }

    fn visit_leaf(&mut self, part: &Partition) -> Option<usize> {
        let cert = certificate(self.adj, &part.lab);
        let Some(first) = &self.first else {
            let leaf = Leaf {
                lab: part.lab.clone(),
                cert,
                path: self.path.clone(),
            };
            self.best = Some(Leaf {
                lab: leaf.lab.clone(),
                cert: leaf.cert.clone(),
                path: leaf.path.clone(),
            });
            self.first = Some(leaf);
            return None;
        };
        if cert == first.cert {
            let gen = automorphism(&part.lab, &first.lab);
            let t = common_prefix(&self.path, &first.path);
            self.generators.push(gen);
            return Some(t);
        }
        let best = self.best.as_ref().unwrap();
        match cert.cmp(&best.cert) {
            std::cmp::Ordering::Less => {
                self.best = Some(Leaf {
                    lab: part.lab.clone(),
                    cert,
                    path: self.path.clone(),
                });
                None
            }
            std::cmp::Ordering::Equal => {
                let gen = automorphism(&part.lab, &best.lab);
                let t = common_prefix(&self.path, &best.path);
                self.generators.push(gen);
                Some(t)
            }
            std::cmp::Ordering::Greater => None,
        }
    }

    /// Orbit representatives under the automorphisms found so far that fix
    /// every vertex of the current path.
    fn stabilizer_orbits(&self) -> Vec<u32> {
        let n = self.adj.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for g in &self.generators {
            if self.path.iter().any(|&p| g[p as usize] != p) {
                continue;
            }
            for v in 0..n as u32 {
                let (a, b) = (find(&mut parent, v), find(&mut parent, g[v as usize]));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi as usize] = lo;
                }
            }
        }
        (0..n as u32).map(|v| find(&mut parent, v)).collect()
    }
}

/// Permutation sending each vertex at position `p` of `from` to the vertex
/// at position `p` of `to`.
fn automorphism(from: &[u32], to: &[u32]) -> Vec<u32> {
    let mut g = vec![0u32; from.len()];
    for (&a, &b) in from.iter().zip(to) {
        g[a as usize] = b;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(species: &[&str], edges: &[(u32, u32)], root: u32) -> CanonicalGraphKey {
        rooted_canonical_key(species, edges, root, DEFAULT_SIZE_CAP).unwrap()
    }

    #[test]
    fn path_and_star_differ() {
        let p4 = key(&["C"; 4], &[(0, 1), (1, 2), (2, 3)], 1);
        let s3 = key(&["C"; 4], &[(0, 1), (0, 2), (0, 3)], 0);
        assert_ne!(p4, s3);
    }

    #[test]
    fn root_position_matters() {
        let end = key(&["C"; 3], &[(0, 1), (1, 2)], 0);
        let mid = key(&["C"; 3], &[(0, 1), (1, 2)], 1);
        let other_end = key(&["C"; 3], &[(0, 1), (1, 2)], 2);
        assert_ne!(end, mid);
        assert_eq!(end, other_end);
    }

    #[test]
    fn species_matter() {
        let a = key(&["Si", "O", "O"], &[(0, 1), (1, 2)], 0);
        let b = key(&["Si", "O", "Si"], &[(0, 1), (1, 2)], 0);
        assert_ne!(a, b);
    }

    #[test]
    fn relabeling_invariance_on_cycles_and_trees() {
        // 6-cycle with a pendant: many relabelings
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (3, 6)];
        let base = key(&["A"; 7], &edges, 0);
        let perm = [0u32, 5, 4, 3, 2, 1, 6];
        let permuted: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (perm[a as usize], perm[b as usize])).collect();
        assert_eq!(base, key(&["A"; 7], &permuted, 0));
        let perm = [6u32, 2, 0, 1, 5, 4, 3];
        let permuted: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (perm[a as usize], perm[b as usize])).collect();
        assert_eq!(base, key(&["A"; 7], &permuted, 6));
    }

    #[test]
    fn large_symmetric_tree_is_fast() {
        // complete ternary tree of depth 6: automorphism group is huge
        let mut edges = Vec::new();
        let mut next = 1u32;
        let mut level = vec![0u32];
        for _ in 0..6 {
            let mut new_level = Vec::new();
            for &v in &level {
                for _ in 0..3 {
                    edges.push((v, next));
                    new_level.push(next);
                    next += 1;
                }
            }
            level = new_level;
        }
        let species = vec!["A"; next as usize];
        let k = rooted_canonical_key(&species, &edges, 0, 2000).unwrap();
        assert_eq!(k.size(), (next as usize, edges.len()));
    }

    #[test]
    fn size_cap_is_enforced() {
        let err = rooted_canonical_key(&["A"; 10], &[], 0, 5).unwrap_err();
        assert!(matches!(err, Error::TooLarge { size: 10, cap: 5 }));
    }
}
