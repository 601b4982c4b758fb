//! Periodic supercells of α-quartz, cristobalite and tridymite, and a
//! random bond-switching perturbation.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::ingest::{bond_pairs, build_bond_network, frac_to_cart, AtomicConfiguration, BondRule, Cell};
use crate::network::BondNetwork;

/// Si–Si distance of the decorated nets, in Å.
pub const SI_SI: f64 = 3.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrystalForm {
    Quartz,
    Cristobalite,
    Tridymite,
}

impl CrystalForm {
    pub const ALL: [CrystalForm; 3] = [CrystalForm::Quartz, CrystalForm::Cristobalite, CrystalForm::Tridymite];

    pub fn as_str(self) -> &'static str {
        match self {
            CrystalForm::Quartz => "quartz",
            CrystalForm::Cristobalite => "cristobalite",
            CrystalForm::Tridymite => "tridymite",
        }
    }
}

impl fmt::Display for CrystalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrystalForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CrystalForm::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown crystal form '{s}'")))
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("supercell size must be at least 3, got {n}")));
    }
    Ok(())
}

fn scale(cell: Cell, n: [usize; 3]) -> Cell {
    let mut out = cell;
    for (row, &k) in out.iter_mut().zip(&n) {
        for x in row.iter_mut() {
            *x *= k as f64;
        }
    }
    out
}

/// Positions of `basis` (fractional in `cell`) replicated over an
/// `n × n × n` supercell, in lexicographic (cell, basis) order.
fn replicate(cell: &Cell, basis: &[[f64; 3]], n: [usize; 3]) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(basis.len() * n[0] * n[1] * n[2]);
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                for b in basis {
                    out.push(frac_to_cart(cell, [b[0] + i as f64, b[1] + j as f64, b[2] + k as f64]));
                }
            }
        }
    }
    out
}

/// Si on a four-connected net with one O at the midpoint of every Si–Si
/// edge. Si come first; each O follows the order of its (sorted) Si pair.
fn decorated_net(cell: Cell, si: Vec<[f64; 3]>) -> Result<AtomicConfiguration> {
    let n_si = si.len();
    let si_cfg = AtomicConfiguration::new(vec!["Si".to_string(); n_si], si.clone(), Some(cell), [true; 3])?;
    let rule = BondRule::new().with_pair("Si", "Si", SI_SI * 1.05)?;
    let edges = bond_pairs(&si_cfg, &rule)?;
    let inv = crate::ingest::inverse(&cell);
    let mut species = vec!["Si".to_string(); n_si];
    let mut positions = si;
    for &(a, b) in &edges {
        let (pa, pb) = (positions[a as usize], positions[b as usize]);
        let mut d = crate::ingest::cart_to_frac(&inv, [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]]);
        for x in &mut d {
            *x -= x.round();
        }
        let d = frac_to_cart(&cell, d);
        species.push("O".to_string());
        positions.push([pa[0] + d[0] / 2.0, pa[1] + d[1] / 2.0, pa[2] + d[2] / 2.0]);
    }
    AtomicConfiguration::new(species, positions, Some(cell), [true; 3])
}

pub fn cristobalite_configuration(n: usize) -> Result<AtomicConfiguration> {
    check_size(n)?;
    let a = 4.0 * SI_SI / 3f64.sqrt();
    let cell = [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]];
    let mut basis = Vec::new();
    for shift in [0.0, 0.25] {
        for f in [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]] {
            basis.push([f[0] + shift, f[1] + shift, f[2] + shift]);
        }
    }
    decorated_net(scale(cell, [n; 3]), replicate(&cell, &basis, [n; 3]))
}

/// Hexagonal diamond net. The repeat unit is a 2 × 2 × 1 block of
/// hexagonal cells.
pub fn tridymite_configuration(n: usize) -> Result<AtomicConfiguration> {
    check_size(n)?;
    let a = SI_SI * (8.0f64 / 3.0).sqrt();
    let c = 8.0 * SI_SI / 3.0;
    let hex = [[a, 0.0, 0.0], [-a / 2.0, a * 3f64.sqrt() / 2.0, 0.0], [0.0, 0.0, c]];
    let cell_basis = [
        [1.0 / 3.0, 2.0 / 3.0, 0.0],
        [2.0 / 3.0, 1.0 / 3.0, 0.5],
        [1.0 / 3.0, 2.0 / 3.0, 3.0 / 8.0],
        [2.0 / 3.0, 1.0 / 3.0, 7.0 / 8.0],
    ];
    let block = scale(hex, [2, 2, 1]);
    let basis: Vec<[f64; 3]> = replicate(&hex, &cell_basis, [2, 2, 1])
        .into_iter()
        .map(|x| crate::ingest::cart_to_frac(&crate::ingest::inverse(&block), x))
        .collect();
    decorated_net(scale(block, [n; 3]), replicate(&block, &basis, [n; 3]))
}

const QUARTZ_A: f64 = 4.9134;
const QUARTZ_C: f64 = 5.4052;
const QUARTZ_SI: [f64; 3] = [0.4697, 0.0, 2.0 / 3.0];
const QUARTZ_O: [f64; 3] = [0.4135, 0.2669, 0.1191 + 2.0 / 3.0];

fn quartz_orbit(p: [f64; 3]) -> Vec<[f64; 3]> {
    let [x, y, z] = p;
    let images = [
        [x, y, z],
        [-y, x - y, z + 2.0 / 3.0],
        [-x + y, -x, z + 1.0 / 3.0],
        [y, x, -z],
        [x - y, -y, -z + 1.0 / 3.0],
        [-x, -x + y, -z + 2.0 / 3.0],
    ];
    let mut out: Vec<[f64; 3]> = Vec::new();
    for q in images {
        let q = q.map(|v| v - v.floor());
        let same = |r: &[f64; 3]| {
            (0..3).all(|k| {
                let d = q[k] - r[k];
                (d - d.round()).abs() < 1e-6
            })
        };
        if !out.iter().any(same) {
            out.push(q);
        }
    }
    out
}

/// α-quartz (space group P3₂21), bonded with the 2.2 Å Si–O rule. The
/// repeat unit is a 2 × 2 × 1 block of hexagonal cells.
pub fn quartz_configuration(n: usize) -> Result<AtomicConfiguration> {
    check_size(n)?;
    quartz_supercell([2 * n, 2 * n, n])
}

/// α-quartz replicated `reps[k]` times along each hexagonal axis.
pub fn quartz_supercell(reps: [usize; 3]) -> Result<AtomicConfiguration> {
    let (a, c) = (QUARTZ_A, QUARTZ_C);
    let hex = [[a, 0.0, 0.0], [-a / 2.0, a * 3f64.sqrt() / 2.0, 0.0], [0.0, 0.0, c]];
    let si = quartz_orbit(QUARTZ_SI);
    let o = quartz_orbit(QUARTZ_O);
    debug_assert_eq!((si.len(), o.len()), (3, 6));
    let mut positions = replicate(&hex, &si, reps);
    let n_si = positions.len();
    positions.extend(replicate(&hex, &o, reps));
    let mut species = vec!["Si".to_string(); n_si];
    species.resize(positions.len(), "O".to_string());
    AtomicConfiguration::new(species, positions, Some(scale(hex, reps)), [true; 3])
}

pub fn crystal_configuration(form: CrystalForm, n: usize) -> Result<AtomicConfiguration> {
    match form {
        CrystalForm::Quartz => quartz_configuration(n),
        CrystalForm::Cristobalite => cristobalite_configuration(n),
        CrystalForm::Tridymite => tridymite_configuration(n),
    }
}

pub fn generate(form: CrystalForm, n: usize) -> Result<BondNetwork> {
    build_bond_network(&crystal_configuration(form, n)?, &BondRule::silica())
}

pub fn generate_quartz(n: usize) -> Result<BondNetwork> {
    generate(CrystalForm::Quartz, n)
}

pub fn generate_cristobalite(n: usize) -> Result<BondNetwork> {
    generate(CrystalForm::Cristobalite, n)
}

pub fn generate_tridymite(n: usize) -> Result<BondNetwork> {
    generate(CrystalForm::Tridymite, n)
}

/// Applies `switches` random valence-preserving bond switches to the
/// Si–O bonds of `net`. Each switch takes bonds a–o1 and c–o2, where o2 lies
/// within six bonds of o1, and rewires them to a–o2 and c–o1. Switches
/// that would duplicate a bond are redrawn. Positions are dropped.
pub fn bond_switch(net: &BondNetwork, switches: usize, seed: u64) -> Result<BondNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<u32>> = (0..net.len() as u32).map(|a| net.neighbors(a).to_vec()).collect();
    let is_si = |a: u32| net.species_label(a) == "Si";
    let is_o = |a: u32| net.species_label(a) == "O";
    let mut bonds: Vec<(u32, u32)> = net
        .bonds()
        .iter()
        .filter_map(|&(x, y)| {
            if is_si(x) && is_o(y) {
                Some((x, y))
            } else if is_si(y) && is_o(x) {
                Some((y, x))
            } else {
                None
            }
        })
        .collect();
    if bonds.is_empty() && switches > 0 {
        return Err(invalid("network has no Si–O bonds to switch"));
    }
    let mut done = 0;
    let mut attempts = 0usize;
    let mut dist = vec![u32::MAX; net.len()];
    let mut seen: Vec<u32> = Vec::new();
    while done < switches {
        attempts += 1;
        if attempts > 1000 * (switches + 1) {
            return Err(invalid("could not find enough admissible bond switches"));
        }
        let bi = rng.gen_range(0..bonds.len());
        let (a, o1) = bonds[bi];

        for &v in &seen {
            dist[v as usize] = u32::MAX;
        }
        seen.clear();
        let mut queue = VecDeque::from([o1]);
        dist[o1 as usize] = 0;
        seen.push(o1);
        let mut candidates = Vec::new();
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du > 0 && is_o(u) {
                candidates.push(u);
            }
            if du == 6 {
                continue;
            }
            for &w in &adj[u as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        let Some(&o2) = candidates.choose(&mut rng) else { continue };
        let sis: Vec<u32> = adj[o2 as usize].iter().copied().filter(|&c| is_si(c) && c != a).collect();
        let Some(&c) = sis.choose(&mut rng) else { continue };
        if adj[a as usize].contains(&o2) || adj[c as usize].contains(&o1) {
            continue;
        }
        let swap = |list: &mut Vec<u32>, from: u32, to: u32| {
            let k = list.iter().position(|&x| x == from).unwrap();
            list[k] = to;
            list.sort_unstable();
        };
        swap(&mut adj[a as usize], o1, o2);
        swap(&mut adj[o1 as usize], a, c);
        swap(&mut adj[c as usize], o2, o1);
        swap(&mut adj[o2 as usize], c, a);
        bonds[bi] = (a, o2);
        let bj = bonds.iter().position(|&b| b == (c, o2)).unwrap();
        bonds[bj] = (c, o1);
        done += 1;
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, row) in adj.iter().enumerate() {
        for &w in row {
            if (u as u32) < w {
                edges.push((u, w as usize));
            }
        }
    }
    let labels: Vec<&str> = (0..net.len() as u32).map(|a| net.species_label(a)).collect();
    BondNetwork::new(&labels, edges)
}
