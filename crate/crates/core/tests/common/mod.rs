#![allow(dead_code)]

use std::collections::VecDeque;

use bondscope::crystals::{bond_switch, generate_cristobalite};
use bondscope::BondNetwork;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random spanning tree plus `extra` further edges
/// drawn by shuffling the remaining vertex pairs.
pub fn random_connected_edges(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        let (a, b) = (order[k].min(parent), order[k].max(parent));
        edges.push((a, b));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !edges.contains(e))
        .collect();
    rest.shuffle(rng);
    edges.extend(rest.into_iter().take(extra));
    edges.sort_unstable();
    edges
}

/// Random connected network of at most `max_n` atoms with two species.
pub fn random_network(seed: u64, max_n: usize) -> BondNetwork {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let extra = r.gen_range(0..=n);
    let edges = random_connected_edges(&mut r, n, extra);
    let species: Vec<&str> = (0..n).map(|_| if r.gen_bool(0.5) { "A" } else { "B" }).collect();
    BondNetwork::new(&species, edges).unwrap()
}

/// Random bipartite network: Si atoms bonded only to O atoms.
pub fn random_bipartite(seed: u64, max_n: usize) -> BondNetwork {
    let mut r = rng(seed);
    let n = r.gen_range(4..=max_n);
    let species: Vec<&str> = (0..n).map(|i| if i % 2 == 0 { "Si" } else { "O" }).collect();
    let mut edges = Vec::new();
    for a in (0..n).step_by(2) {
        for b in (1..n).step_by(2) {
            if r.gen_bool(0.3) {
                edges.push((a, b));
            }
        }
    }
    BondNetwork::new(&species, edges).unwrap()
}

/// Cristobalite with random bond switches and a few broken bonds.
pub fn defect_variant(seed: u64) -> BondNetwork {
    let mut r = rng(seed);
    let base = generate_cristobalite(3).unwrap();
    let switched = bond_switch(&base, r.gen_range(5..60), seed).unwrap();
    let mut bonds: Vec<(usize, usize)> = switched.bonds().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    for _ in 0..r.gen_range(0..6) {
        let k = r.gen_range(0..bonds.len());
        bonds.swap_remove(k);
    }
    let labels: Vec<&str> = (0..switched.len() as u32).map(|a| switched.species_label(a)).collect();
    BondNetwork::new(&labels, bonds).unwrap()
}

/// Perfectly coordinated silica-like network: bond-switched cristobalite.
pub fn switched_cristobalite(n: usize, switches: usize, seed: u64) -> BondNetwork {
    bond_switch(&generate_cristobalite(n).unwrap(), switches, seed).unwrap()
}

/// Cycle-space dimension from a BFS spanning forest.
pub fn spanning_forest_rank(n: usize, edges: &[(u32, u32)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut seen = vec![false; n];
    let mut tree_edges = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    tree_edges += 1;
                    q.push_back(w);
                }
            }
        }
    }
    edges.len() - tree_edges
}

/// Random permutation of `0..n` that keeps `fixed` in place.
pub fn permutation_fixing(rng: &mut ChaCha8Rng, n: usize, fixed: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = (0..n).filter(|&v| v != fixed).collect();
    rest.shuffle(rng);
    let mut perm = vec![0; n];
    let mut it = rest.into_iter();
    for (v, p) in perm.iter_mut().enumerate() {
        *p = if v == fixed { fixed } else { it.next().unwrap() };
    }
    perm
}

/// `net` with atom `v` renamed to `perm[v]`.
pub fn relabel(net: &BondNetwork, perm: &[usize]) -> BondNetwork {
    let n = net.len();
    let mut labels = vec![""; n];
    for v in 0..n {
        labels[perm[v]] = net.species_label(v as u32);
    }
    let bonds = net.bonds().iter().map(|&(a, b)| (perm[a as usize], perm[b as usize]));
    BondNetwork::new(&labels, bonds).unwrap()
}

/// Vertex pairs `(a, b)`, `a < b`, in lexicographic order; bit `k` of an
/// edge mask refers to the `k`-th pair.
pub fn vertex_pairs(n: usize) -> Vec<(u32, u32)> {
    (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect()
}

pub fn edges_of_mask(pairs: &[(u32, u32)], mask: u64) -> Vec<(u32, u32)> {
    pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect()
}

/// Edge mask of the graph with vertex `v` renamed to `perm[v]`.
pub fn permute_mask(n: usize, pairs: &[(u32, u32)], mask: u64, perm: &[usize]) -> u64 {
    let index = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    };
    let mut out = 0;
    for (k, &(a, b)) in pairs.iter().enumerate() {
        if mask >> k & 1 == 1 {
            out |= 1 << index(perm[a as usize], perm[b as usize]);
        }
    }
    out
}

/// All permutations of `0..n` fixing 0.
pub fn root_fixing_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 1..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut used = vec![false; n];
    used[0] = true;
    go(&mut vec![0], &mut used, &mut out);
    out
}

/// Exhaustive backtracking search for a species-preserving isomorphism
/// mapping `root_a` to `root_b`.
pub fn brute_isomorphic(
    species_a: &[&str],
    edges_a: &[(u32, u32)],
    root_a: usize,
    species_b: &[&str],
    edges_b: &[(u32, u32)],
    root_b: usize,
) -> bool {
    let n = species_a.len();
    if n != species_b.len() || edges_a.len() != edges_b.len() {
        return false;
    }
    let adjacency = |edges: &[(u32, u32)]| {
        let mut m = vec![vec![false; n]; n];
        for &(a, b) in edges {
            m[a as usize][b as usize] = true;
            m[b as usize][a as usize] = true;
        }
        m
    };
    let (ma, mb) = (adjacency(edges_a), adjacency(edges_b));
    let deg = |m: &Vec<Vec<bool>>, v: usize| m[v].iter().filter(|&&x| x).count();
    let mut order: Vec<usize> = vec![root_a];
    order.extend((0..n).filter(|&v| v != root_a));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        depth: usize,
        order: &[usize],
        root_b: usize,
        map: &mut [usize],
        used: &mut [bool],
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        let candidates: Vec<usize> = if depth == 0 { vec![root_b] } else { (0..map.len()).collect() };
        for w in candidates {
            if used[w] || (depth > 0 && w == root_b) || !ok(v, w, map) {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if extend(depth + 1, order, root_b, map, used, ok) {
                return true;
            }
            map[v] = usize::MAX;
            used[w] = false;
        }
        false
    }

    let ok = |v: usize, w: usize, map: &[usize]| {
        species_a[v] == species_b[w]
            && deg(&ma, v) == deg(&mb, w)
            && (0..n).all(|u| map[u] == usize::MAX || ma[v][u] == mb[w][map[u]])
    };
    extend(0, &order, root_b, &mut map, &mut used, &ok)
}

/// Renderings of the distinct classes of every Si root of `net`.
pub fn si_classes(net: &BondNetwork, tag: bondscope::DescriptorTag, radius: u32) -> Vec<String> {
    let d = bondscope::stats::classify_all(net, tag, radius, |s| s == "Si", 4).unwrap();
    d.ranked().into_iter().map(|(k, _)| k.render()).collect()
}

pub type RootedGraph = (Vec<&'static str>, Vec<(u32, u32)>);

/// A random rooted graph (root 0) and a relabeled copy that fixes the root.
/// Half of the time the copy gets one bond toggled and the original one
/// bond removed, so the two may or may not be isomorphic.
pub fn random_rooted_pair(g: &mut ChaCha8Rng) -> (RootedGraph, RootedGraph) {
    let n = g.gen_range(3..=9);
    let extra = g.gen_range(0..=n);
    let mut edges_a = random_connected_edges(g, n, extra);
    let species_a: Vec<&'static str> = (0..n).map(|_| if g.gen_bool(0.7) { "Si" } else { "O" }).collect();
    let perm = permutation_fixing(g, n, 0);
    let mut species_b = vec![""; n];
    for v in 0..n {
        species_b[perm[v]] = species_a[v];
    }
    let mut edges_b: Vec<(u32, u32)> = edges_a
        .iter()
        .map(|&(a, b)| (perm[a].min(perm[b]) as u32, perm[a].max(perm[b]) as u32))
        .collect();
    if g.gen_bool(0.5) {
        let (a, b) = (g.gen_range(0..n as u32), g.gen_range(0..n as u32));
        if a != b {
            let e = (a.min(b), a.max(b));
            match edges_b.iter().position(|&x| x == e) {
                Some(k) => {
                    edges_b.swap_remove(k);
                }
                None => edges_b.push(e),
            }
            let k = g.gen_range(0..edges_a.len());
            if edges_b.len() < edges_a.len() {
                edges_a.swap_remove(k);
            }
        }
    }
    let edges_a = edges_a.iter().map(|&(a, b)| (a as u32, b as u32)).collect();
    ((species_a, edges_a), (species_b, edges_b))
}
