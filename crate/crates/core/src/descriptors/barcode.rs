//! H1 barcodes of rooted environments.
//!
//! `F(i, j)` is the rank of the first homology of the shell annulus `S(i, j)`.
//! The barcode is the unique multiset of intervals whose inclusion counts
//! reproduce `F`; it is recovered by Möbius inversion over the poset of
//! sub-intervals of `(0, r)` ordered by inclusion.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::descriptors::coordination::ShellCount;
use crate::error::{invalid, Error, Result};
use crate::network::{LocalEnvironment, UnionFind};

/// Number of intervals `(a, b)` with `0 <= a <= b <= r`.
fn interval_count(r: u32) -> usize {
    let n = r as usize + 1;
    n * (n + 1) / 2
}

/// Dense index of `(a, b)`, grouped by left endpoint.
#[inline]
fn interval_index(r: u32, a: u32, b: u32) -> usize {
    let (n, a, b) = (r as usize + 1, a as usize, b as usize);
    // row a' holds n - a' intervals
    a * n - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Table of `F(i, j)` for `0 <= i <= j <= r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMatrix {
    radius: u32,
    values: Vec<i64>,
}

impl FMatrix {
    pub fn zeros(radius: u32) -> Self {
        Self {
            radius,
            values: vec![0; interval_count(radius)],
        }
    }

    /// Builds the table from a closure evaluated on every interval.
    pub fn from_fn(radius: u32, mut f: impl FnMut(u32, u32) -> i64) -> Self {
        let mut m = Self::zeros(radius);
        for i in 0..=radius {
            for j in i..=radius {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn get(&self, i: u32, j: u32) -> i64 {
        assert!(i <= j && j <= self.radius, "({i},{j}) outside 0..={}", self.radius);
        self.values[interval_index(self.radius, i, j)]
    }

    pub fn set(&mut self, i: u32, j: u32, value: i64) {
        assert!(i <= j && j <= self.radius);
        let k = interval_index(self.radius, i, j);
        self.values[k] = value;
    }

    /// `F(i, j)` with the convention that empty intervals (`i > j`) are 0.
    fn get_or_zero(&self, i: u32, j: i64) -> i64 {
        if j < 0 || i as i64 > j {
            0
        } else {
            self.get(i, j as u32)
        }
    }
}

/// `F(i, j) = rank H1(S(i, j))` for every sub-interval of `(0, r)`.
///
/// For each left endpoint the annulus is grown one shell at a time with a
/// union-find, so the whole table costs `O(r (n + m) α)`.
pub fn f_matrix(env: &LocalEnvironment<'_>) -> FMatrix {
    let r = env.radius();
    let mut table = FMatrix::zeros(r);
    let mut uf = UnionFind::new(env.len());
    for lo in 0..=r {
        uf.reset();
        let (mut atoms, mut bonds, mut comps) = (0i64, 0i64, 0i64);
        for hi in lo..=r {
            for v in env.shell_range(hi) {
                atoms += 1;
                comps += 1;
                for &u in env.neighbors(v) {
                    let su = env.shell(u as usize);
                    let inside = su >= lo && (su < hi || (su == hi && (u as usize) < v));
                    if inside {
                        bonds += 1;
                        if uf.union(u, v as u32) {
                            comps -= 1;
                        }
                    }
                }
            }
            table.set(lo, hi, comps - atoms + bonds);
        }
    }
    table
}

/// Möbius function of the interval poset of `(0, r)`, computed from its
/// recursive definition: `μ(x, x) = 1`, `μ(x, y) = -Σ_{x <= z < y} μ(x, z)`.
#[derive(Debug)]
pub struct MobiusTable {
    radius: u32,
    intervals: Vec<(u32, u32)>,
    mu: Vec<i64>,
}

impl MobiusTable {
    pub fn new(radius: u32) -> Self {
        let mut intervals = Vec::with_capacity(interval_count(radius));
        for a in 0..=radius {
            for b in a..=radius {
                intervals.push((a, b));
            }
        }
        let n = intervals.len();
        let contains = |outer: (u32, u32), inner: (u32, u32)| outer.0 <= inner.0 && inner.1 <= outer.1;

        // process upper elements by increasing length so every z strictly
        // between x and y is finished before y
        let mut by_len: Vec<usize> = (0..n).collect();
        by_len.sort_by_key(|&k| intervals[k].1 - intervals[k].0);

        let mut mu = vec![0i64; n * n];
        for x in 0..n {
            mu[x * n + x] = 1;
            for &y in &by_len {
                if y == x || !contains(intervals[y], intervals[x]) {
                    continue;
                }
                let mut sum = 0;
                for &z in &by_len {
                    if z != y
                        && contains(intervals[z], intervals[x])
                        && contains(intervals[y], intervals[z])
                    {
                        sum += mu[x * n + z];
                    }
                }
                mu[x * n + y] = -sum;
            }
        }
        Self { radius, intervals, mu }
    }

    /// Shared table for `radius`, built once per process.
    pub fn cached(radius: u32) -> Arc<MobiusTable> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<MobiusTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("mobius cache poisoned");
        guard
            .entry(radius)
            .or_insert_with(|| Arc::new(MobiusTable::new(radius)))
            .clone()
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// `μ[(a, b), (c, d)]`; zero unless `(a, b) ⊆ (c, d)`.
    pub fn mu(&self, lower: (u32, u32), upper: (u32, u32)) -> i64 {
        let n = self.intervals.len();
        let x = interval_index(self.radius, lower.0, lower.1);
        let y = interval_index(self.radius, upper.0, upper.1);
        self.mu[x * n + y]
    }
}

/// Multiset of integer intervals `(lo, hi)`, stored sorted with multiplicity.
///
/// Intervals normally satisfy `lo < hi`. A degenerate `(i, i)` appears only
/// when a ring lies entirely inside one shell, which needs a bond between two
/// atoms at the same distance from the root (impossible in bipartite networks).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Barcode {
    intervals: Vec<(u32, u32, u32)>,
}

impl Barcode {
    /// Builds a barcode from `(lo, hi)` pairs, in any order, with repeats.
    pub fn from_intervals(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        let mut intervals: Vec<(u32, u32, u32)> = Vec::new();
        for (a, b) in pairs {
            match intervals.last_mut() {
                Some(last) if (last.0, last.1) == (a, b) => last.2 += 1,
                _ => intervals.push((a, b, 1)),
            }
        }
        Self { intervals }
    }

    /// `(lo, hi, multiplicity)` triples in ascending interval order.
    pub fn intervals(&self) -> &[(u32, u32, u32)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.iter().map(|t| t.2 as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn multiplicity(&self, lo: u32, hi: u32) -> u32 {
        self.intervals
            .iter()
            .find(|t| (t.0, t.1) == (lo, hi))
            .map_or(0, |t| t.2)
    }

    /// Number of intervals contained in `(i, j)`.
    pub fn count_within(&self, i: u32, j: u32) -> usize {
        self.intervals
            .iter()
            .filter(|t| i <= t.0 && t.1 <= j)
            .map(|t| t.2 as usize)
            .sum()
    }

    /// Cumulative right-endpoint tally: entry `r0` counts intervals ending
    /// at or before `r0`.
    pub fn right_endpoint_tally(&self, radius: u32) -> Vec<i64> {
        (0..=radius).map(|r0| self.count_within(0, r0) as i64).collect()
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (k, &(a, b, m)) in self.intervals.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            if m > 1 {
                write!(f, "{m}×")?;
            }
            write!(f, "({a},{b})")?;
        }
        Ok(())
    }
}

/// Recovers interval multiplicities `G` from `F` by Möbius inversion.
pub fn mobius_invert(f: &FMatrix, radius: u32) -> Result<Barcode> {
    if f.radius() != radius {
        return Err(invalid(format!(
            "F table has radius {}, expected {radius}",
            f.radius()
        )));
    }
    let table = MobiusTable::cached(radius);
    let mut intervals = Vec::new();
    for c in 0..=radius {
        for d in c..=radius {
            let mut g = 0i64;
            for a in c..=d {
                for b in a..=d {
                    let fv = f.get(a, b);
                    if fv != 0 {
                        g += fv * table.mu((a, b), (c, d));
                    }
                }
            }
            if g < 0 {
                return Err(Error::InconsistentF {
                    lo: c as usize,
                    hi: d as usize,
                    multiplicity: g,
                });
            }
            if g > 0 {
                intervals.push((c, d, g as u32));
            }
        }
    }
    Ok(Barcode { intervals })
}

/// Inclusion–exclusion form of the inversion on the interval poset, which
/// only needs the four corners of each interval.
pub fn interval_multiplicity(f: &FMatrix, lo: u32, hi: u32) -> i64 {
    f.get(lo, hi) - f.get_or_zero(lo + 1, hi as i64) - f.get_or_zero(lo, hi as i64 - 1)
        + f.get_or_zero(lo + 1, hi as i64 - 1)
}

pub fn h1_barcode(env: &LocalEnvironment<'_>) -> Result<Barcode> {
    mobius_invert(&f_matrix(env), env.radius())
}

fn bond_layers(shell_count: &[i64], d0: i64, d1: i64) -> Result<Vec<i64>> {
    // layers[t] = #bonds between shells t and t-1; layers[0] is unused
    let mut layers = vec![0i64; shell_count.len()];
    for t in 1..shell_count.len() {
        let d = if (t - 1) % 2 == 0 { d0 } else { d1 };
        let previous = if t >= 2 { layers[t - 1] } else { 0 };
        let b = d * shell_count[t - 1] - previous;
        if b < 0 {
            return Err(Error::NotPerfectlyCoordinated(format!(
                "negative bond count {b} between shells {} and {t}",
                t - 1
            )));
        }
        layers[t] = b;
    }
    Ok(layers)
}

/// `F(0, r0)` for `r0 = 0..=r` of a perfectly coordinated environment,
/// computed from its shell count alone.
pub fn endpoints_from_shell_count(sc: &ShellCount, d0: usize, d1: usize) -> Result<Vec<i64>> {
    if d0 < 1 || d1 < 1 {
        return Err(invalid("coordination numbers must be positive"));
    }
    let counts: Vec<i64> = sc.counts().iter().map(|&c| c as i64).collect();
    if counts.first() != Some(&1) {
        return Err(invalid("shell count must start with the root"));
    }
    let layers = bond_layers(&counts, d0 as i64, d1 as i64)?;
    let (mut atoms, mut bonds) = (0i64, 0i64);
    let mut out = Vec::with_capacity(counts.len());
    for t in 0..counts.len() {
        atoms += counts[t];
        bonds += layers[t];
        let f = 1 - atoms + bonds;
        if f < 0 {
            return Err(Error::NotPerfectlyCoordinated(format!(
                "shell count implies negative rank {f} at radius {t}"
            )));
        }
        out.push(f);
    }
    Ok(out)
}

/// Inverse of [`endpoints_from_shell_count`].
pub fn shell_count_from_endpoints(endpoints: &[i64], d0: usize, d1: usize) -> Result<ShellCount> {
    if d0 < 1 || d1 < 1 {
        return Err(invalid("coordination numbers must be positive"));
    }
    if endpoints.first().is_some_and(|&f| f != 0) {
        return Err(invalid("F(0,0) of a single atom must be 0"));
    }
    let (d0, d1) = (d0 as i64, d1 as i64);
    let mut counts: Vec<i64> = Vec::with_capacity(endpoints.len());
    let mut layer_prev = 0i64;
    let (mut atoms, mut bonds) = (0i64, 0i64);
    for (t, &f) in endpoints.iter().enumerate() {
        let layer = if t == 0 {
            0
        } else {
            let d = if (t - 1) % 2 == 0 { d0 } else { d1 };
            let b = d * counts[t - 1] - layer_prev;
            if b < 0 {
                return Err(Error::NotPerfectlyCoordinated(format!(
                    "negative bond count {b} between shells {} and {t}",
                    t - 1
                )));
            }
            b
        };
        bonds += layer;
        let total_atoms = 1 + bonds - f;
        let shell = total_atoms - atoms;
        if shell < 0 {
            return Err(Error::NotPerfectlyCoordinated(format!(
                "endpoints imply {shell} atoms in shell {t}"
            )));
        }
        counts.push(shell);
        atoms = total_atoms;
        layer_prev = layer;
    }
    Ok(ShellCount::new(counts.into_iter().map(|c| c as u32).collect()))
}
