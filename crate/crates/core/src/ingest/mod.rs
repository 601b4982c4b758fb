//! Atomic configurations, file formats, and distance-cutoff bonding.

mod bonding;
mod formats;

use std::collections::BTreeMap;

pub use bonding::{bond_pairs, bond_pairs_brute_force, build_bond_network};
pub use formats::{
    network_from_json, network_to_json, parse_configuration, parse_lammps_dump, parse_species_map, parse_xyz,
    write_xyz, InputFormat,
};

use crate::descriptors::{DescriptorConfig, DescriptorTag};
use crate::error::{invalid, Result};
use crate::stats::{root_keys, select_roots};

pub type Cell = [[f64; 3]; 3];

/// Species and Cartesian positions, with an optional cell whose rows are the
/// lattice vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicConfiguration {
    pub species: Vec<String>,
    pub positions: Vec<[f64; 3]>,
    pub cell: Option<Cell>,
    pub periodic: [bool; 3],
}

impl AtomicConfiguration {
    pub fn new(species: Vec<String>, positions: Vec<[f64; 3]>, cell: Option<Cell>, periodic: [bool; 3]) -> Result<Self> {
        let cfg = Self {
            species,
            positions,
            cell,
            periodic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.cell.is_some() && self.periodic.iter().any(|&p| p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.len() != self.positions.len() {
            return Err(invalid(format!(
                "{} species but {} positions",
                self.species.len(),
                self.positions.len()
            )));
        }
        if self.positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        match &self.cell {
            Some(cell) => {
                if determinant(cell).abs() < 1e-12 {
                    return Err(invalid("cell matrix is singular"));
                }
            }
            None => {
                if self.periodic.iter().any(|&p| p) {
                    return Err(invalid("periodic boundaries need a cell"));
                }
            }
        }
        Ok(())
    }

    /// Applies `perm`: atom `i` of the result is atom `perm[i]` of `self`.
    pub fn reordered(&self, perm: &[usize]) -> Self {
        Self {
            species: perm.iter().map(|&i| self.species[i].clone()).collect(),
            positions: perm.iter().map(|&i| self.positions[i]).collect(),
            cell: self.cell,
            periodic: self.periodic,
        }
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut out = self.clone();
        for p in &mut out.positions {
            for k in 0..3 {
                p[k] += shift[k];
            }
        }
        out
    }

    /// Periodic `na × nb × nc` replication, atoms ordered by image then atom.
    pub fn replicated(&self, reps: [usize; 3]) -> Result<Self> {
        let cell = self.cell.ok_or_else(|| invalid("replication needs a cell"))?;
        let mut species = Vec::new();
        let mut positions = Vec::new();
        for i in 0..reps[0] {
            for j in 0..reps[1] {
                for k in 0..reps[2] {
                    let shift = frac_to_cart(&cell, [i as f64, j as f64, k as f64]);
                    for (s, p) in self.species.iter().zip(&self.positions) {
                        species.push(s.clone());
                        positions.push([p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]]);
                    }
                }
            }
        }
        let mut new_cell = cell;
        for (row, &n) in new_cell.iter_mut().zip(&reps) {
            for x in row.iter_mut() {
                *x *= n as f64;
            }
        }
        Self::new(species, positions, Some(new_cell), self.periodic)
    }
}

pub(crate) fn determinant(m: &Cell) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Distances between opposite faces of the cell.
pub fn perpendicular_widths(cell: &Cell) -> [f64; 3] {
    let v = determinant(cell).abs();
    [
        v / norm(cross(cell[1], cell[2])),
        v / norm(cross(cell[2], cell[0])),
        v / norm(cross(cell[0], cell[1])),
    ]
}

pub(crate) fn inverse(m: &Cell) -> Cell {
    let det = determinant(m);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    inv
}

pub(crate) fn frac_to_cart(cell: &Cell, f: [f64; 3]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for k in 0..3 {
        for (fi, row) in f.iter().zip(cell) {
            x[k] += fi * row[k];
        }
    }
    x
}

pub(crate) fn cart_to_frac(inv: &Cell, x: [f64; 3]) -> [f64; 3] {
    frac_to_cart(inv, x)
}

/// Bonding cutoffs per unordered species pair. Pairs without a rule never bond.
#[derive(Clone, Debug, PartialEq)]
pub struct BondRule {
    cutoffs: BTreeMap<(String, String), f64>,
}

impl BondRule {
    pub fn new() -> Self {
        Self {
            cutoffs: BTreeMap::new(),
        }
    }

    /// Si–O bonds shorter than 2.2 Å; no Si–Si or O–O bonds.
    pub fn silica() -> Self {
        Self::new().with_pair("Si", "O", 2.2).expect("positive cutoff")
    }

    pub fn with_pair(mut self, a: &str, b: &str, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(invalid(format!("cutoff for {a}-{b} must be positive, got {cutoff}")));
        }
        self.cutoffs.insert(Self::pair(a, b), cutoff);
        Ok(self)
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    pub fn cutoff(&self, a: &str, b: &str) -> Option<f64> {
        self.cutoffs.get(&Self::pair(a, b)).copied()
    }

    pub fn max_cutoff(&self) -> f64 {
        self.cutoffs.values().copied().fold(0.0, f64::max)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.cutoffs.iter().map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    /// Every cutoff shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let mut out = Self::new();
        for (a, b, c) in self.pairs() {
            out = out.with_pair(a, b, c + delta)?;
        }
        Ok(out)
    }

    /// Parses `A-B:cutoff` entries separated by commas, e.g. `Si-O:2.2`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rule = Self::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (pair, cutoff) = item
                .split_once(':')
                .ok_or_else(|| invalid(format!("bond rule '{item}' is not of the form A-B:cutoff")))?;
            let (a, b) = pair
                .split_once('-')
                .ok_or_else(|| invalid(format!("bond rule '{item}' is not of the form A-B:cutoff")))?;
            let c: f64 = cutoff
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad cutoff in '{item}'")))?;
            rule = rule.with_pair(a.trim(), b.trim(), c)?;
        }
        if rule.cutoffs.is_empty() {
            return Err(invalid("empty bond rule"));
        }
        Ok(rule)
    }
}

impl Default for BondRule {
    fn default() -> Self {
        Self::silica()
    }
}

/// Fraction of roots (with species `root_species`, or all atoms) whose key is
/// the same with every cutoff lowered by `delta`, unchanged, and raised by
/// `delta`.
pub fn cutoff_stability(
    cfg: &AtomicConfiguration,
    rule: &BondRule,
    radius: u32,
    delta: f64,
    tag: DescriptorTag,
    root_species: Option<&str>,
    threads: usize,
) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(invalid("delta must be non-negative"));
    }
    let base = build_bond_network(cfg, rule)?;
    let roots = select_roots(&base, |s| root_species.is_none_or(|r| r == s));
    if roots.is_empty() {
        return Err(invalid("no roots to classify"));
    }
    let dcfg = DescriptorConfig::default();
    let keys = root_keys(&base, &roots, tag, radius, &dcfg, threads)?;
    if delta == 0.0 {
        return Ok(1.0);
    }
    let mut stable = vec![true; roots.len()];
    for d in [-delta, delta] {
        let net = build_bond_network(cfg, &rule.shifted(d)?)?;
        let other = root_keys(&net, &roots, tag, radius, &dcfg, threads)?;
        for ((s, a), b) in stable.iter_mut().zip(&keys).zip(&other) {
            *s &= a == b;
        }
    }
    Ok(stable.iter().filter(|&&s| s).count() as f64 / roots.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_and_inverse() {
        let cell = [[10.0, 0.0, 0.0], [5.0, 8.0, 0.0], [0.0, 0.0, 6.0]];
        let w = perpendicular_widths(&cell);
        assert!((w[1] - 8.0).abs() < 1e-12);
        assert!((w[2] - 6.0).abs() < 1e-12);
        let inv = inverse(&cell);
        let f = cart_to_frac(&inv, frac_to_cart(&cell, [0.25, 0.5, 0.75]));
        for (a, b) in f.iter().zip([0.25, 0.5, 0.75]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rule_parsing() {
        let r = BondRule::parse("Si-O:2.2, Ge-O:2.4").unwrap();
        assert_eq!(r.cutoff("O", "Si"), Some(2.2));
        assert_eq!(r.cutoff("O", "O"), None);
        assert_eq!(r.max_cutoff(), 2.4);
        assert!(BondRule::parse("Si-O").is_err());
        assert!(BondRule::new().with_pair("A", "B", 0.0).is_err());
        assert_eq!(BondRule::default(), BondRule::silica());
    }
}
