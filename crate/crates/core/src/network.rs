//! Bond networks, rooted local environments and shell annuli.
//!
//! Atom ids are dense integers `0..N`. Species are interned per network, but
//! everything that leaves the network (descriptor keys, files) refers to the
//! species *label*, never to the interned id.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{invalid, Result};

pub type AtomId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeciesId(pub u16);

/// Undirected, species-labeled graph of atoms and bonds.
#[derive(Clone, Debug)]
pub struct BondNetwork {
    labels: Vec<String>,
    species: Vec<SpeciesId>,
    // CSR adjacency, each row sorted ascending
    offsets: Vec<usize>,
    adjacency: Vec<AtomId>,
    bonds: Vec<(AtomId, AtomId)>,
    positions: Option<Vec<[f64; 3]>>,
    cell: Option<[[f64; 3]; 3]>,
    boundary: Option<Vec<bool>>,
}

impl BondNetwork {
    /// Builds a network from one species label per atom and a list of bonds.
    ///
    /// Bonds may be given in either orientation; self-bonds, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn new<S, I>(species_labels: &[S], bonds: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut species = Vec::with_capacity(species_labels.len());
        for label in species_labels {
            let label = label.as_ref();
            let id = match labels.iter().position(|l| l == label) {
                Some(i) => i,
                None => {
                    labels.push(label.to_string());
                    labels.len() - 1
                }
            };
            species.push(SpeciesId(id as u16));
        }
        Self::from_interned(labels, species, bonds)
    }

    pub fn from_interned<I>(labels: Vec<String>, species: Vec<SpeciesId>, bonds: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = species.len();
        if n > AtomId::MAX as usize {
            return Err(invalid("too many atoms"));
        }
        if let Some(bad) = species.iter().find(|s| s.0 as usize >= labels.len()) {
            return Err(invalid(format!("species id {} has no label", bad.0)));
        }
        let mut list = Vec::new();
        for (a, b) in bonds {
            if a >= n || b >= n {
                return Err(invalid(format!("bond ({a},{b}) references a missing atom")));
            }
            if a == b {
                return Err(invalid(format!("self-bond on atom {a}")));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            list.push((a as AtomId, b as AtomId));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate bond ({},{})", w[0].0, w[0].1)));
        }

        let mut degree = vec![0usize; n];
        for &(a, b) in &list {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0; 2 * list.len()];
        for &(a, b) in &list {
            adjacency[fill[a as usize]] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable();
        }

        Ok(Self {
            labels,
            species,
            offsets,
            adjacency,
            bonds: list,
            positions: None,
            cell: None,
            boundary: None,
        })
    }

    pub fn with_positions(mut self, positions: Vec<[f64; 3]>) -> Result<Self> {
        if positions.len() != self.len() {
            return Err(invalid(format!(
                "{} positions for {} atoms",
                positions.len(),
                self.len()
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn with_cell(mut self, cell: [[f64; 3]; 3]) -> Self {
        self.cell = Some(cell);
        self
    }

    /// Marks atoms that sit on an open (non-periodic) boundary. Environments
    /// that would need to grow past such an atom are flagged as truncated.
    pub fn with_boundary_atoms(mut self, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != self.len() {
            return Err(invalid("boundary mask length differs from atom count"));
        }
        self.boundary = Some(boundary);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn bonds(&self) -> &[(AtomId, AtomId)] {
        &self.bonds
    }

    #[inline]
    pub fn neighbors(&self, atom: AtomId) -> &[AtomId] {
        let a = atom as usize;
        &self.adjacency[self.offsets[a]..self.offsets[a + 1]]
    }

    #[inline]
    pub fn degree(&self, atom: AtomId) -> usize {
        let a = atom as usize;
        self.offsets[a + 1] - self.offsets[a]
    }

    pub fn has_bond(&self, a: AtomId, b: AtomId) -> bool {
        (a as usize) < self.len() && self.neighbors(a).binary_search(&b).is_ok()
    }

    #[inline]
    pub fn species(&self, atom: AtomId) -> SpeciesId {
        self.species[atom as usize]
    }

    pub fn species_label(&self, atom: AtomId) -> &str {
        &self.labels[self.species[atom as usize].0 as usize]
    }

    pub fn label_of(&self, species: SpeciesId) -> &str {
        &self.labels[species.0 as usize]
    }

    pub fn species_id(&self, label: &str) -> Option<SpeciesId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| SpeciesId(i as u16))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn species_ids(&self) -> &[SpeciesId] {
        &self.species
    }

    pub fn positions(&self) -> Option<&[[f64; 3]]> {
        self.positions.as_deref()
    }

    pub fn cell(&self) -> Option<&[[f64; 3]; 3]> {
        self.cell.as_ref()
    }

    pub fn is_boundary_atom(&self, atom: AtomId) -> bool {
        self.boundary
            .as_ref()
            .is_some_and(|b| b[atom as usize])
    }

    /// Atoms whose species label is `label`, ascending.
    pub fn atoms_of_species(&self, label: &str) -> Vec<AtomId> {
        match self.species_id(label) {
            Some(s) => (0..self.len() as AtomId)
                .filter(|&a| self.species(a) == s)
                .collect(),
            None => Vec::new(),
        }
    }

    fn check_atom(&self, atom: AtomId) -> Result<()> {
        if (atom as usize) < self.len() {
            Ok(())
        } else {
            Err(invalid(format!(
                "atom {atom} does not exist (network has {} atoms)",
                self.len()
            )))
        }
    }
}

/// Graph distances from `root` to every reachable atom.
pub fn bfs_distances(network: &BondNetwork, root: AtomId) -> Result<BTreeMap<AtomId, u32>> {
    network.check_atom(root)?;
    let mut dist = BTreeMap::new();
    dist.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        for &w in network.neighbors(u) {
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(du + 1);
                queue.push_back(w);
            }
        }
    }
    Ok(dist)
}

/// Rooted subgraph of every atom within graph distance `radius` of the root,
/// with all bonds among those atoms.
///
/// Members are ordered by shell, then by atom id; local indices refer to
/// positions in that order, so the root is always local index 0.
#[derive(Clone, Debug)]
pub struct LocalEnvironment<'a> {
    network: &'a BondNetwork,
    root: AtomId,
    radius: u32,
    members: Vec<AtomId>,
    shells: Vec<u32>,
    shell_starts: Vec<usize>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    lookup: Vec<(AtomId, u32)>,
    truncated: bool,
}

pub fn extract_environment(
    network: &BondNetwork,
    root: AtomId,
    radius: u32,
) -> Result<LocalEnvironment<'_>> {
    Extractor::new(network).extract(root, radius)
}

/// Reusable scratch space for extracting many environments from one network.
pub struct Extractor<'a> {
    network: &'a BondNetwork,
    stamp: Vec<u32>,
    local: Vec<u32>,
    epoch: u32,
}

impl<'a> Extractor<'a> {
    pub fn new(network: &'a BondNetwork) -> Self {
        Self {
            network,
            stamp: vec![0; network.len()],
            local: vec![0; network.len()],
            epoch: 0,
        }
    }

    pub fn network(&self) -> &'a BondNetwork {
        self.network
    }

    pub fn extract(&mut self, root: AtomId, radius: u32) -> Result<LocalEnvironment<'a>> {
        if radius < 1 {
            return Err(invalid("environment radius must be at least 1"));
        }
        let net = self.network;
        net.check_atom(root)?;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let epoch = self.epoch;

        let mut members = vec![root];
        let mut shells = vec![0u32];
        let mut shell_starts = vec![0usize];
        self.stamp[root as usize] = epoch;
        let mut start = 0;
        for depth in 1..=radius {
            let end = members.len();
            shell_starts.push(end);
            for i in start..end {
                let u = members[i];
                for &w in net.neighbors(u) {
                    if self.stamp[w as usize] != epoch {
                        self.stamp[w as usize] = epoch;
                        members.push(w);
                        shells.push(depth);
                    }
                }
            }
            members[end..].sort_unstable();
            start = end;
        }
        shell_starts.push(members.len());

        for (i, &m) in members.iter().enumerate() {
            self.local[m as usize] = i as u32;
        }
        let mut offsets = Vec::with_capacity(members.len() + 1);
        offsets.push(0);
        let mut adjacency = Vec::new();
        for &m in &members {
            let row = adjacency.len();
            for &w in net.neighbors(m) {
                if self.stamp[w as usize] == epoch {
                    adjacency.push(self.local[w as usize]);
                }
            }
            adjacency[row..].sort_unstable();
            offsets.push(adjacency.len());
        }
        let mut lookup: Vec<(AtomId, u32)> = members
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();
        lookup.sort_unstable();

        let truncated = members
            .iter()
            .zip(&shells)
            .any(|(&m, &s)| s < radius && net.is_boundary_atom(m));

        Ok(LocalEnvironment {
            network: net,
            root,
            radius,
            members,
            shells,
            shell_starts,
            offsets,
            adjacency,
            lookup,
            truncated,
        })
    }
}

impl<'a> LocalEnvironment<'a> {
    pub fn network(&self) -> &'a BondNetwork {
        self.network
    }

    pub fn root(&self) -> AtomId {
        self.root
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Parent-network atom ids, ordered by shell then id.
    pub fn members(&self) -> &[AtomId] {
        &self.members
    }

    pub fn shell(&self, local: usize) -> u32 {
        self.shells[local]
    }

    pub fn shells(&self) -> &[u32] {
        &self.shells
    }

    /// Local indices of the atoms in shell `i` (empty past the frontier).
    pub fn shell_range(&self, i: u32) -> std::ops::Range<usize> {
        let i = i as usize;
        if i > self.radius as usize {
            let n = self.members.len();
            return n..n;
        }
        self.shell_starts[i]..self.shell_starts[i + 1]
    }

    /// Degree of the member in the *parent* network.
    pub fn full_degree(&self, local: usize) -> usize {
        self.network.degree(self.members[local])
    }

    pub fn species(&self, local: usize) -> SpeciesId {
        self.network.species(self.members[local])
    }

    pub fn species_label(&self, local: usize) -> &'a str {
        self.network.species_label(self.members[local])
    }

    /// Neighbors of a member inside the environment, as local indices.
    pub fn neighbors(&self, local: usize) -> &[u32] {
        &self.adjacency[self.offsets[local]..self.offsets[local + 1]]
    }

    pub fn local_index(&self, atom: AtomId) -> Option<usize> {
        self.lookup
            .binary_search_by_key(&atom, |&(a, _)| a)
            .ok()
            .map(|i| self.lookup[i].1 as usize)
    }

    pub fn num_bonds(&self) -> usize {
        self.adjacency.len() / 2
    }

    /// Induced bonds as ascending local-index pairs `(a, b)` with `a < b`.
    pub fn bonds(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.members.len()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .filter(move |&&b| b as usize > a)
                .map(move |&b| (a as u32, b))
        })
    }

    /// True when the environment may be cut short by an open boundary.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn as_subgraph(&self) -> Subgraph {
        Subgraph {
            vertices: self.members.clone(),
            edges: self.bonds().collect(),
        }
    }

    /// Induced subgraph on the atoms with shell index in `lo..=hi`.
    pub fn shell_annulus(&self, lo: u32, hi: u32) -> Result<ShellAnnulus> {
        if lo > hi || hi > self.radius {
            return Err(invalid(format!(
                "annulus ({lo},{hi}) is not inside 0..={}",
                self.radius
            )));
        }
        let range = self.shell_range(lo).start..self.shell_range(hi).end;
        let base = range.start;
        let vertices = self.members[range.clone()].to_vec();
        let mut edges = Vec::new();
        for a in range.clone() {
            for &b in self.neighbors(a) {
                let b = b as usize;
                if b > a && range.contains(&b) {
                    edges.push(((a - base) as u32, (b - base) as u32));
                }
            }
        }
        Ok(ShellAnnulus {
            lo,
            hi,
            subgraph: Subgraph { vertices, edges },
        })
    }
}

/// A plain subgraph: parent atom ids plus edges between local indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subgraph {
    pub vertices: Vec<AtomId>,
    pub edges: Vec<(u32, u32)>,
}

impl Subgraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Clone, Debug)]
pub struct ShellAnnulus {
    pub lo: u32,
    pub hi: u32,
    pub subgraph: Subgraph,
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.components = self.parent.len();
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

pub fn connected_components(subgraph: &Subgraph) -> usize {
    let mut uf = UnionFind::new(subgraph.num_vertices());
    for &(a, b) in &subgraph.edges {
        uf.union(a, b);
    }
    uf.components()
}

/// Rank of the first homology group: #components − #atoms + #bonds.
pub fn h1_rank(subgraph: &Subgraph) -> usize {
    let rank = connected_components(subgraph) as i64 - subgraph.num_vertices() as i64
        + subgraph.num_edges() as i64;
    debug_assert!(rank >= 0);
    rank as usize
}

/// True iff the environment is bipartite across shells and every member has
/// parent-network degree `d0` on even shells and `d1` on odd shells.
pub fn perfect_coordination_check(env: &LocalEnvironment<'_>, d0: usize, d1: usize) -> bool {
    (0..env.len()).all(|i| {
        let want = if env.shell(i).is_multiple_of(2) { d0 } else { d1 };
        env.full_degree(i) == want
            && env
                .neighbors(i)
                .iter()
                .all(|&j| env.shell(j as usize) != env.shell(i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> BondNetwork {
        let labels = vec!["C"; n];
        BondNetwork::new(&labels, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    fn cycle(n: usize) -> BondNetwork {
        let labels = vec!["C"; n];
        BondNetwork::new(&labels, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn rejects_bad_bonds() {
        assert!(BondNetwork::new(&["A", "B"], [(0, 0)]).is_err());
        assert!(BondNetwork::new(&["A", "B"], [(0, 1), (1, 0)]).is_err());
        assert!(BondNetwork::new(&["A", "B"], [(0, 2)]).is_err());
        assert!(BondNetwork::new(&["A", "B"], [(0, 1)])
            .unwrap()
            .with_positions(vec![[0.0; 3]])
            .is_err());
    }

    #[test]
    fn bfs_on_path_and_isolated_atom() {
        let net = path(3);
        let d = bfs_distances(&net, 0).unwrap();
        assert_eq!(d.into_iter().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 2)]);

        let lone = BondNetwork::new(&["Si", "O"], std::iter::empty()).unwrap();
        let d = bfs_distances(&lone, 1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[&1], 0);
        assert!(bfs_distances(&lone, 2).is_err());
    }

    #[test]
    fn environment_of_even_cycle_is_whole_cycle() {
        let net = cycle(10);
        for r in 5..8 {
            let env = extract_environment(&net, 3, r).unwrap();
            assert_eq!(env.len(), 10);
            assert_eq!(env.num_bonds(), 10);
            assert_eq!(h1_rank(&env.as_subgraph()), 1);
        }
        let env = extract_environment(&net, 3, 4).unwrap();
        assert_eq!(env.len(), 9);
        assert_eq!(env.num_bonds(), 8);
    }

    #[test]
    fn star_environment() {
        let net = BondNetwork::new(&["Si", "O", "O", "O", "O", "Si"], [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)])
            .unwrap();
        let env = extract_environment(&net, 0, 1).unwrap();
        assert_eq!(env.len(), 5);
        assert_eq!(env.num_bonds(), 4);
        // leaf 4 has degree 2 in the parent network even though it is a leaf here
        let i = env.local_index(4).unwrap();
        assert_eq!(env.full_degree(i), 2);
        assert_eq!(env.neighbors(i).len(), 1);
        assert!(extract_environment(&net, 0, 0).is_err());
    }

    #[test]
    fn unreachable_atoms_are_skipped() {
        let net = BondNetwork::new(&["A", "A", "A"], [(0, 1)]).unwrap();
        let env = extract_environment(&net, 0, 3).unwrap();
        assert_eq!(env.members(), &[0, 1]);
        assert_eq!(connected_components(&env.as_subgraph()), 1);
    }

    #[test]
    fn annulus_bounds_and_contents() {
        let net = cycle(8);
        let env = extract_environment(&net, 0, 4).unwrap();
        assert!(env.shell_annulus(3, 2).is_err());
        assert!(env.shell_annulus(0, 5).is_err());
        let whole = env.shell_annulus(0, 4).unwrap();
        assert_eq!(whole.subgraph, env.as_subgraph());
        // cycle graphs of even length are bipartite: a single shell has no bonds
        let s = env.shell_annulus(2, 2).unwrap();
        assert_eq!(s.subgraph.num_vertices(), 2);
        assert_eq!(s.subgraph.num_edges(), 0);
        assert_eq!(h1_rank(&env.shell_annulus(1, 4).unwrap().subgraph), 0);
    }

    #[test]
    fn components_and_rank_basics() {
        assert_eq!(connected_components(&Subgraph::default()), 0);
        let two_edges = Subgraph {
            vertices: vec![0, 1, 2, 3],
            edges: vec![(0, 1), (2, 3)],
        };
        assert_eq!(connected_components(&two_edges), 2);
        assert_eq!(h1_rank(&two_edges), 0);
    }

    #[test]
    fn figure_four_ranks() {
        // three squares meeting at a corner: three independent rings
        let corner = BondNetwork::new(
            &["X"; 7],
            [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (2, 5), (3, 5), (3, 6), (1, 6)],
        )
        .unwrap();
        let env = extract_environment(&corner, 0, 3).unwrap();
        assert_eq!(h1_rank(&env.as_subgraph()), 3);

        // squares abcd, abed and bcde share edges: only two are independent
        let (a, b, c, d, e) = (0, 1, 2, 3, 4);
        let fig4b = BondNetwork::new(&["X"; 5], [(a, b), (b, c), (c, d), (d, a), (b, e), (e, d)]).unwrap();
        let env = extract_environment(&fig4b, b as AtomId, 2).unwrap();
        assert_eq!(h1_rank(&env.as_subgraph()), 2);
    }

    #[test]
    fn perfect_coordination_detects_defects() {
        // Si(4 O) where one O dangles: O must have degree 2
        let net = BondNetwork::new(
            &["Si", "O", "O", "O", "O", "Si", "Si", "Si"],
            [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (2, 6), (3, 7)],
        )
        .unwrap();
        let env = extract_environment(&net, 0, 1).unwrap();
        assert!(!perfect_coordination_check(&env, 4, 2));
        let net = BondNetwork::new(
            &["Si", "O", "O", "O", "O", "Si", "Si", "Si", "Si"],
            [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (2, 6), (3, 7), (4, 8)],
        )
        .unwrap();
        let env = extract_environment(&net, 0, 1).unwrap();
        assert!(perfect_coordination_check(&env, 4, 2));
        // a five-valent root
        let net = BondNetwork::new(
            &["Si", "O", "O", "O", "O", "O"],
            [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)],
        )
        .unwrap();
        let env = extract_environment(&net, 0, 1).unwrap();
        assert!(!perfect_coordination_check(&env, 4, 2));
    }

    #[test]
    fn truncation_flag_follows_boundary_mask() {
        let net = path(5).with_boundary_atoms(vec![false, false, false, false, true]).unwrap();
        assert!(!extract_environment(&net, 0, 4).unwrap().is_truncated());
        assert!(extract_environment(&net, 0, 5).unwrap().is_truncated());
    }
}
