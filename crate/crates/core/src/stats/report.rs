//! Ranked comparison tables of two distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::descriptors::DescriptorKey;
use crate::error::{invalid, Error, Result};
use crate::stats::info::{standard_error, symmetrized_kl};
use crate::stats::EmpiricalDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortMode {
    F1,
    F1MinusF2,
    F2MinusF1,
}

impl SortMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SortMode::F1 => "f1",
            SortMode::F1MinusF2 => "f1-f2",
            SortMode::F2MinusF1 => "f2-f1",
        }
    }
}

impl fmt::Display for SortMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SortMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(SortMode::F1),
            "f1-f2" => Ok(SortMode::F1MinusF2),
            "f2-f1" => Ok(SortMode::F2MinusF1),
            _ => Err(invalid(format!("unknown sort mode '{s}' (expected f1, f1-f2 or f2-f1)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub key: DescriptorKey,
    pub rendering: String,
    pub f1: f64,
    pub f2: f64,
    /// 1-based rank in the first distribution; `None` if the class is absent.
    pub r1: Option<usize>,
    pub r2: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub sort: SortMode,
    pub rows: Vec<ComparisonRow>,
    pub divergence: f64,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "f1", "f2", "r1", "r2"]).map_err(csv_err)?;
        let rank = |r: Option<usize>| r.map_or_else(|| "-".to_string(), |r| r.to_string());
        for row in &self.rows {
            w.write_record([
                row.rendering.clone(),
                format!("{:.6}", row.f1),
                format!("{:.6}", row.f2),
                rank(row.r1),
                rank(row.r2),
            ])
            .map_err(csv_err)?;
        }
        finish(w)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn ranks(d: &EmpiricalDistribution) -> BTreeMap<&DescriptorKey, usize> {
    d.ranked().into_iter().enumerate().map(|(i, (k, _))| (k, i + 1)).collect()
}

pub fn ranked_diff_table(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    sort: SortMode,
    top: usize,
) -> Result<ComparisonReport> {
    p.check_compatible(q)?;
    if top < 1 {
        return Err(invalid("top-n must be at least 1"));
    }
    let (rp, rq) = (ranks(p), ranks(q));
    let keys: BTreeSet<&DescriptorKey> = p.counts().keys().chain(q.counts().keys()).collect();
    let mut rows: Vec<ComparisonRow> = keys
        .into_iter()
        .map(|k| ComparisonRow {
            key: k.clone(),
            rendering: k.render(),
            f1: p.frequency(k),
            f2: q.frequency(k),
            r1: rp.get(k).copied(),
            r2: rq.get(k).copied(),
        })
        .collect();
    let score = |r: &ComparisonRow| match sort {
        SortMode::F1 => r.f1,
        SortMode::F1MinusF2 => r.f1 - r.f2,
        SortMode::F2MinusF1 => r.f2 - r.f1,
    };
    rows.sort_by(|a, b| {
        score(b)
            .total_cmp(&score(a))
            .then_with(|| a.key.payload().cmp(b.key.payload()))
    });
    rows.truncate(top);
    Ok(ComparisonReport {
        sort,
        rows,
        divergence: symmetrized_kl(p, q)?,
    })
}

/// Rank-frequency curves: classes ordered by frequency in the first
/// distribution, with frequency and standard error columns for each input.
pub fn rank_frequency_table(dists: &[&EmpiricalDistribution]) -> Result<String> {
    let Some(first) = dists.first() else {
        return Err(invalid("no distributions given"));
    };
    for d in &dists[1..] {
        first.check_compatible(d)?;
    }
    let mut keys: Vec<&DescriptorKey> = dists
        .iter()
        .flat_map(|d| d.counts().keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    keys.sort_by(|a, b| {
        first
            .count(b)
            .cmp(&first.count(a))
            .then_with(|| a.payload().cmp(b.payload()))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string(), "key".to_string()];
    for i in 1..=dists.len() {
        header.push(format!("f{i}"));
        header.push(format!("se{i}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, k) in keys.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string(), k.render()];
        for d in dists {
            let f = d.frequency(k);
            rec.push(format!("{f:.6}"));
            rec.push(format!("{:.6}", standard_error(f, d.total())));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}
