//! Primitive rings through the root of an environment.
//!
//! A ring is primitive when every pair of its atoms is joined by a shortest
//! path lying on the ring, i.e. graph distance equals ring distance for all
//! pairs. For a ring through the root this forces every ring atom to sit at
//! its ring distance from the root, so each such ring is two root geodesics
//! that meet at an antipodal atom (even length) or an antipodal bond (odd
//! length). Candidates are enumerated that way and filtered pairwise.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{invalid, Result};
use crate::network::{AtomId, BondNetwork, LocalEnvironment};

/// Minimal adjacency view shared by environments and whole networks.
pub trait Adjacency {
    fn vertex_count(&self) -> usize;
    fn adjacent(&self, v: u32) -> &[u32];
}

impl Adjacency for LocalEnvironment<'_> {
    fn vertex_count(&self) -> usize {
        self.len()
    }
    fn adjacent(&self, v: u32) -> &[u32] {
        self.neighbors(v as usize)
    }
}

impl Adjacency for BondNetwork {
    fn vertex_count(&self) -> usize {
        self.len()
    }
    fn adjacent(&self, v: u32) -> &[u32] {
        self.neighbors(v)
    }
}

/// Multiset of primitive ring lengths through the root, sorted ascending.
/// Lengths count every atom of the ring.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimitiveRingProfile {
    lengths: Vec<u32>,
}

impl PrimitiveRingProfile {
    pub fn from_lengths(mut lengths: Vec<u32>) -> Self {
        lengths.sort_unstable();
        Self { lengths }
    }

    pub fn lengths(&self) -> &[u32] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn count_of(&self, length: u32) -> usize {
        self.lengths.iter().filter(|&&l| l == length).count()
    }

    /// `(length, count)` pairs, ascending by length.
    pub fn histogram(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &l in &self.lengths {
            match out.last_mut() {
                Some(last) if last.0 == l => last.1 += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

impl fmt::Display for PrimitiveRingProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lengths.is_empty() {
            return f.write_str("no rings");
        }
        for (k, (len, count)) in self.histogram().into_iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            let plural = if count == 1 { "" } else { "s" };
            write!(f, "{count} {len}-ring{plural}")?;
        }
        Ok(())
    }
}

/// Primitive rings through the root of `env` with at most `max_len` atoms,
/// each listed as local indices in cyclic order starting at the root.
pub fn primitive_rings(env: &LocalEnvironment<'_>, max_len: u32) -> Result<Vec<Vec<u32>>> {
    if max_len > 2 * env.radius() {
        return Err(invalid(format!(
            "ring length bound {max_len} exceeds twice the radius {}",
            env.radius()
        )));
    }
    let depth: Vec<u32> = env.shells().to_vec();
    Ok(RingSearch::new(env, depth, max_len).run(0))
}

pub fn primitive_rings_through(env: &LocalEnvironment<'_>, max_len: u32) -> Result<PrimitiveRingProfile> {
    let rings = primitive_rings(env, max_len)?;
    Ok(PrimitiveRingProfile::from_lengths(
        rings.iter().map(|r| r.len() as u32).collect(),
    ))
}

/// Same search run on the whole network, with distances measured in the
/// full graph. Rings are returned as parent atom ids.
pub fn primitive_rings_in_network(net: &BondNetwork, root: AtomId, max_len: u32) -> Result<Vec<Vec<AtomId>>> {
    if root as usize >= net.len() {
        return Err(invalid(format!("atom {root} does not exist")));
    }
    let depth = bfs_depths(net, root, max_len / 2 + 1);
    Ok(RingSearch::new(net, depth, max_len).run(root))
}

const UNSEEN: u32 = u32::MAX;

fn bfs_depths<G: Adjacency>(g: &G, source: u32, limit: u32) -> Vec<u32> {
    let mut dist = vec![UNSEEN; g.vertex_count()];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        if du >= limit {
            continue;
        }
        for &w in g.adjacent(u) {
            if dist[w as usize] == UNSEEN {
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

struct RingSearch<'g, G: Adjacency> {
    graph: &'g G,
    depth: Vec<u32>,
    max_len: u32,
    geodesics: Vec<Option<Vec<Vec<u32>>>>,
    distances: Vec<Option<Vec<u32>>>,
}

impl<'g, G: Adjacency> RingSearch<'g, G> {
    fn new(graph: &'g G, depth: Vec<u32>, max_len: u32) -> Self {
        let n = graph.vertex_count();
        Self {
            graph,
            depth,
            max_len,
            geodesics: vec![None; n],
            distances: vec![None; n],
        }
    }

    fn run(mut self, root: u32) -> Vec<Vec<u32>> {
        let mut rings = Vec::new();
        let half_even = self.max_len / 2;
        let half_odd = self.max_len.saturating_sub(1) / 2;
        let reach = half_even.max(half_odd);
        let mut frontier: Vec<u32> = (0..self.graph.vertex_count() as u32)
            .filter(|&v| self.depth[v as usize] >= 1 && self.depth[v as usize] <= reach)
            .collect();
        frontier.sort_by_key(|&v| (self.depth[v as usize], v));

        for &a in &frontier {
            let k = self.depth[a as usize];
            // even rings: two geodesics meeting at a
            if k >= 2 && 2 * k <= self.max_len {
                let paths = self.geodesics_to(a, root).to_vec();
                for (i, p) in paths.iter().enumerate() {
                    for q in &paths[i + 1..] {
                        let (p, q) = if p[1] < q[1] { (p, q) } else { (q, p) };
                        if (1..k as usize).all(|t| p[t] != q[t]) {
                            let mut ring = p.clone();
                            ring.extend(q[1..k as usize].iter().rev());
                            if self.is_primitive(&ring) {
                                rings.push(ring);
                            }
                        }
                    }
                }
            }
            // odd rings: geodesics to the two ends of an intra-level bond
            if 2 * k < self.max_len {
                let partners: Vec<u32> = self
                    .graph
                    .adjacent(a)
                    .iter()
                    .copied()
                    .filter(|&b| b > a && self.depth[b as usize] == k)
                    .collect();
                for b in partners {
                    let pa = self.geodesics_to(a, root).to_vec();
                    let pb = self.geodesics_to(b, root).to_vec();
                    for p in &pa {
                        for q in &pb {
                            if (1..=k as usize).all(|t| p[t] != q[t]) {
                                let mut ring = p.clone();
                                ring.extend(q[1..].iter().rev());
                                if self.is_primitive(&ring) {
                                    rings.push(ring);
                                }
                            }
                        }
                    }
                }
            }
        }
        rings
    }

    /// All shortest paths from the root to `v`, each starting at the root.
    fn geodesics_to(&mut self, v: u32, root: u32) -> &[Vec<u32>] {
        if self.geodesics[v as usize].is_none() {
            let paths = if v == root {
                vec![vec![root]]
            } else {
                let dv = self.depth[v as usize];
                let preds: Vec<u32> = self
                    .graph
                    .adjacent(v)
                    .iter()
                    .copied()
                    .filter(|&u| self.depth[u as usize] != UNSEEN && self.depth[u as usize] + 1 == dv)
                    .collect();
                let mut out = Vec::new();
                for u in preds {
                    for p in self.geodesics_to(u, root) {
                        let mut q = p.clone();
                        q.push(v);
                        out.push(q);
                    }
                }
                out
            };
            self.geodesics[v as usize] = Some(paths);
        }
        self.geodesics[v as usize].as_deref().unwrap()
    }

    fn distances_from(&mut self, v: u32) -> &[u32] {
        if self.distances[v as usize].is_none() {
            let limit = self.max_len / 2;
            self.distances[v as usize] = Some(bfs_depths(self.graph, v, limit));
        }
        self.distances[v as usize].as_deref().unwrap()
    }

    fn is_primitive(&mut self, ring: &[u32]) -> bool {
        let len = ring.len();
        // pairs involving the root hold by construction
        for i in 1..len {
            let dist = self.distances_from(ring[i]).to_vec();
            for j in i + 2..len {
                let gap = j - i;
                let on_ring = gap.min(len - gap) as u32;
                if dist[ring[j] as usize] < on_ring {
                    return false;
                }
            }
        }
        true
    }
}
