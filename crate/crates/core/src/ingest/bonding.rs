use crate::error::{Error, Result};
use crate::ingest::{cart_to_frac, frac_to_cart, inverse, perpendicular_widths, AtomicConfiguration, BondRule};
use crate::network::BondNetwork;

struct Geometry {
    cell: Option<[[f64; 3]; 3]>,
    periodic: [bool; 3],
    frac: Vec<[f64; 3]>,
}

/// Species-pair cutoff table indexed by interned species.
struct Cutoffs {
    species: Vec<usize>,
    table: Vec<Vec<Option<f64>>>,
    max: f64,
}

impl Cutoffs {
    fn new(cfg: &AtomicConfiguration, rule: &BondRule) -> Self {
        let mut labels: Vec<&str> = cfg.species.iter().map(String::as_str).collect();
        labels.sort_unstable();
        labels.dedup();
        let species = cfg
            .species
            .iter()
            .map(|s| labels.binary_search(&s.as_str()).unwrap())
            .collect();
        let table: Vec<Vec<Option<f64>>> = labels
            .iter()
            .map(|a| labels.iter().map(|b| rule.cutoff(a, b)).collect())
            .collect();
        let max = table.iter().flatten().flatten().copied().fold(0.0, f64::max);
        Self { species, table, max }
    }

    fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.table[self.species[i]][self.species[j]]
    }
}

fn check_minimum_image(cfg: &AtomicConfiguration, max_cutoff: f64) -> Result<()> {
    if let (Some(cell), true) = (&cfg.cell, cfg.is_periodic()) {
        let w = perpendicular_widths(cell);
        for k in 0..3 {
            if cfg.periodic[k] && max_cutoff >= w[k] / 2.0 {
                return Err(Error::MinimumImage {
                    cutoff: max_cutoff,
                    half_width: w[k] / 2.0,
                });
            }
        }
    }
    Ok(())
}

fn geometry(cfg: &AtomicConfiguration) -> Geometry {
    match (&cfg.cell, cfg.is_periodic()) {
        (Some(cell), true) => {
            let inv = inverse(cell);
            let frac = cfg
                .positions
                .iter()
                .map(|&x| {
                    let mut f = cart_to_frac(&inv, x);
                    for k in 0..3 {
                        if cfg.periodic[k] {
                            f[k] -= f[k].floor();
                        }
                    }
                    f
                })
                .collect();
            Geometry {
                cell: Some(*cell),
                periodic: cfg.periodic,
                frac,
            }
        }
        _ => Geometry {
            cell: None,
            periodic: [false; 3],
            frac: cfg.positions.clone(),
        },
    }
}

impl Geometry {
    fn displacement(&self, i: usize, j: usize, image: [f64; 3]) -> f64 {
        let (a, b) = (self.frac[i], self.frac[j]);
        let d = [b[0] + image[0] - a[0], b[1] + image[1] - a[1], b[2] + image[2] - a[2]];
        let x = match &self.cell {
            Some(cell) => frac_to_cart(cell, d),
            None => d,
        };
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Shortest distance over the nearest images along periodic axes.
    fn min_image_distance(&self, i: usize, j: usize) -> f64 {
        let mut base = [0.0; 3];
        for k in 0..3 {
            if self.periodic[k] {
                base[k] = -(self.frac[j][k] - self.frac[i][k]).round();
            }
        }
        let span = |k: usize| if self.periodic[k] { -1..=1 } else { 0..=0 };
        let mut best = f64::INFINITY;
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    let img = [base[0] + a as f64, base[1] + b as f64, base[2] + c as f64];
                    best = best.min(self.displacement(i, j, img));
                }
            }
        }
        best
    }
}

/// All bonded pairs `(i, j)` with `i < j`, by an all-pairs scan.
pub fn bond_pairs_brute_force(cfg: &AtomicConfiguration, rule: &BondRule) -> Result<Vec<(u32, u32)>> {
    cfg.validate()?;
    let cut = Cutoffs::new(cfg, rule);
    check_minimum_image(cfg, cut.max)?;
    let geo = geometry(cfg);
    let mut out = Vec::new();
    for i in 0..cfg.len() {
        for j in i + 1..cfg.len() {
            if let Some(c) = cut.get(i, j) {
                if geo.min_image_distance(i, j) < c {
                    out.push((i as u32, j as u32));
                }
            }
        }
    }
    Ok(out)
}

/// All bonded pairs `(i, j)` with `i < j`, sorted. Uses a cell list when
/// every axis is periodic (or none is) and at least three bins fit per axis.
pub fn bond_pairs(cfg: &AtomicConfiguration, rule: &BondRule) -> Result<Vec<(u32, u32)>> {
    cfg.validate()?;
    let cut = Cutoffs::new(cfg, rule);
    check_minimum_image(cfg, cut.max)?;
    if cut.max == 0.0 || cfg.is_empty() {
        return Ok(Vec::new());
    }
    let geo = geometry(cfg);
    let all_periodic = geo.periodic.iter().all(|&p| p);
    let none_periodic = geo.periodic.iter().all(|&p| !p);
    let (origin, extent) = if all_periodic {
        let w = perpendicular_widths(geo.cell.as_ref().unwrap());
        ([0.0; 3], w.map(|x| (x / cut.max).floor() as usize))
    } else if none_periodic {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &geo.frac {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let n = [0, 1, 2].map(|k| (((hi[k] - lo[k]) / cut.max).floor() as usize).clamp(1, 1024));
        (lo, n)
    } else {
        return bond_pairs_brute_force(cfg, rule);
    };
    if all_periodic && extent.iter().any(|&n| n < 3) {
        return bond_pairs_brute_force(cfg, rule);
    }
    let nb = extent;
    let bin_of = |p: [f64; 3]| -> [usize; 3] {
        [0, 1, 2].map(|k| {
            let t = if all_periodic {
                p[k] * nb[k] as f64
            } else {
                (p[k] - origin[k]) / cut.max
            };
            (t.floor().max(0.0) as usize).min(nb[k] - 1)
        })
    };
    let flat = |b: [usize; 3]| (b[0] * nb[1] + b[1]) * nb[2] + b[2];
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); nb[0] * nb[1] * nb[2]];
    let atom_bin: Vec<[usize; 3]> = geo.frac.iter().map(|&p| bin_of(p)).collect();
    for (i, b) in atom_bin.iter().enumerate() {
        bins[flat(*b)].push(i as u32);
    }

    let mut out = Vec::new();
    for i in 0..cfg.len() {
        let b = atom_bin[i];
        for da in -1i64..=1 {
            for db in -1i64..=1 {
                for dc in -1i64..=1 {
                    let raw = [b[0] as i64 + da, b[1] as i64 + db, b[2] as i64 + dc];
                    let mut wrapped = [0usize; 3];
                    let mut image = [0.0; 3];
                    let mut inside = true;
                    for k in 0..3 {
                        let n = nb[k] as i64;
                        if all_periodic {
                            wrapped[k] = raw[k].rem_euclid(n) as usize;
                            image[k] = raw[k].div_euclid(n) as f64;
                        } else if raw[k] < 0 || raw[k] >= n {
                            inside = false;
                        } else {
                            wrapped[k] = raw[k] as usize;
                        }
                    }
                    if !inside {
                        continue;
                    }
                    for &j in &bins[flat(wrapped)] {
                        let j = j as usize;
                        if j <= i {
                            continue;
                        }
                        if let Some(c) = cut.get(i, j) {
                            if geo.displacement(i, j, image) < c {
                                out.push((i as u32, j as u32));
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Bond network of a configuration. Positions and the cell are carried
/// over; atoms within the largest cutoff of an open boundary are flagged so
/// that environments reaching them report truncation.
pub fn build_bond_network(cfg: &AtomicConfiguration, rule: &BondRule) -> Result<BondNetwork> {
    let bonds = bond_pairs(cfg, rule)?;
    let mut net = BondNetwork::new(&cfg.species, bonds.into_iter().map(|(a, b)| (a as usize, b as usize)))?.with_positions(cfg.positions.clone())?;
    if let Some(cell) = cfg.cell {
        net = net.with_cell(cell);
    }
    let open = cfg.cell.is_some() && cfg.periodic.iter().any(|&p| !p);
    if open {
        let geo = geometry(cfg);
        let cell = cfg.cell.unwrap();
        let w = perpendicular_widths(&cell);
        let inv = inverse(&cell);
        let margin = rule.max_cutoff();
        let mask = cfg
            .positions
            .iter()
            .map(|&x| {
                let f = cart_to_frac(&inv, x);
                (0..3).any(|k| !geo.periodic[k] && (f[k] * w[k] < margin || (1.0 - f[k]) * w[k] < margin))
            })
            .collect();
        net = net.with_boundary_atoms(mask)?;
    } else if cfg.cell.is_none() && !cfg.is_empty() {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &cfg.positions {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let margin = rule.max_cutoff();
        let mask = cfg
            .positions
            .iter()
            .map(|p| (0..3).any(|k| p[k] - lo[k] < margin || hi[k] - p[k] < margin))
            .collect();
        net = net.with_boundary_atoms(mask)?;
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(l: f64) -> Option<[[f64; 3]; 3]> {
        Some([[l, 0.0, 0.0], [0.0, l, 0.0], [0.0, 0.0, l]])
    }

    fn cfg(species: &[&str], pos: Vec<[f64; 3]>, cell: Option<[[f64; 3]; 3]>) -> AtomicConfiguration {
        let periodic = [cell.is_some(); 3];
        AtomicConfiguration::new(species.iter().map(|s| s.to_string()).collect(), pos, cell, periodic).unwrap()
    }

    #[test]
    fn strict_cutoff() {
        let rule = BondRule::silica();
        let c = cfg(&["Si", "O", "O"], vec![[0.0; 3], [2.0, 0.0, 0.0], [0.0, 2.3, 0.0]], None);
        assert_eq!(bond_pairs(&c, &rule).unwrap(), vec![(0, 1)]);
        let c = cfg(&["Si", "O"], vec![[0.0; 3], [2.2, 0.0, 0.0]], None);
        assert!(bond_pairs(&c, &rule).unwrap().is_empty());
    }

    #[test]
    fn wraps_across_the_cell() {
        let c = cfg(&["Si", "O"], vec![[0.1, 0.0, 0.0], [9.5, 0.0, 0.0]], cubic(10.0));
        assert_eq!(bond_pairs(&c, &BondRule::silica()).unwrap(), vec![(0, 1)]);
        assert_eq!(bond_pairs_brute_force(&c, &BondRule::silica()).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn no_oxygen_oxygen_bonds() {
        let c = cfg(&["O", "O"], vec![[0.0; 3], [1.0, 0.0, 0.0]], None);
        assert!(bond_pairs(&c, &BondRule::silica()).unwrap().is_empty());
    }

    #[test]
    fn minimum_image_violation() {
        let c = cfg(&["Si", "O"], vec![[0.0; 3], [1.0, 0.0, 0.0]], cubic(4.0));
        assert!(matches!(bond_pairs(&c, &BondRule::silica()), Err(Error::MinimumImage { .. })));
    }

    #[test]
    fn cell_list_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let skew = [[14.0, 0.0, 0.0], [4.0, 13.0, 0.0], [-3.0, 2.5, 15.0]];
        for cell in [cubic(15.0), Some(skew), None] {
            let n = 300;
            let species: Vec<&str> = (0..n).map(|i| if i % 3 == 0 { "Si" } else { "O" }).collect();
            let pos = (0..n)
                .map(|_| [rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0), rng.gen_range(0.0..15.0)])
                .collect();
            let c = cfg(&species, pos, cell);
            let rule = BondRule::silica();
            let fast = bond_pairs(&c, &rule).unwrap();
            assert!(!fast.is_empty());
            assert_eq!(fast, bond_pairs_brute_force(&c, &rule).unwrap());
        }
    }

    #[test]
    fn open_boundary_atoms_are_flagged() {
        let c = cfg(&["Si", "O", "Si"], vec![[0.0; 3], [1.6, 0.0, 0.0], [10.0, 0.0, 0.0]], None);
        let net = build_bond_network(&c, &BondRule::silica()).unwrap();
        assert!(net.is_boundary_atom(0));
        assert!(net.is_boundary_atom(2));
    }
}
