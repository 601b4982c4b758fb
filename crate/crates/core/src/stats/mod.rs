//! Empirical distributions of descriptor classes and the statistics used to
//! compare them.

pub mod info;
pub mod report;

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::{describe_with, DescriptorConfig, DescriptorKey, DescriptorTag};
use crate::error::{invalid, Error, Result};
use crate::network::{AtomId, BondNetwork, Extractor};

pub use info::{
    frequency_standard_error, mutual_information, scaled_entropy, shannon_entropy, standard_error,
    symmetrized_kl, symmetrized_kl_smoothed, uncertainty_coefficient,
};
pub use report::{ranked_diff_table, rank_frequency_table, ComparisonReport, ComparisonRow, SortMode};

/// Counts of descriptor classes over a set of roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    tag: DescriptorTag,
    radius: u32,
    source: String,
    total: u64,
    counts: BTreeMap<DescriptorKey, u64>,
}

impl EmpiricalDistribution {
    pub fn new(tag: DescriptorTag, radius: u32, source: impl Into<String>) -> Self {
        Self {
            tag,
            radius,
            source: source.into(),
            total: 0,
            counts: BTreeMap::new(),
        }
    }

    pub fn from_keys(
        tag: DescriptorTag,
        radius: u32,
        source: impl Into<String>,
        keys: impl IntoIterator<Item = DescriptorKey>,
    ) -> Result<Self> {
        let mut d = Self::new(tag, radius, source);
        for k in keys {
            d.add(k)?;
        }
        Ok(d)
    }

    pub fn add(&mut self, key: DescriptorKey) -> Result<()> {
        self.add_count(key, 1)
    }

    pub fn add_count(&mut self, key: DescriptorKey, count: u64) -> Result<()> {
        if key.tag() != self.tag || key.radius() != self.radius {
            return Err(invalid(format!(
                "key {}/{} does not belong to a {}/{} distribution",
                key.tag(),
                key.radius(),
                self.tag,
                self.radius
            )));
        }
        if count > 0 {
            *self.counts.entry(key).or_insert(0) += count;
            self.total += count;
        }
        Ok(())
    }

    /// Adds the counts of `other`, which must describe the same tag and radius.
    pub fn merge(&mut self, other: &EmpiricalDistribution) -> Result<()> {
        for (k, &c) in &other.counts {
            self.add_count(k.clone(), c)?;
        }
        Ok(())
    }

    pub fn tag(&self) -> DescriptorTag {
        self.tag
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn set_source(&mut self, source: impl Into<String>) {
        self.source = source.into();
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct classes.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &BTreeMap<DescriptorKey, u64> {
        &self.counts
    }

    pub fn count(&self, key: &DescriptorKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &DescriptorKey) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(key) as f64 / self.total as f64
    }

    /// Classes by descending count, ties by ascending key bytes.
    pub fn ranked(&self) -> Vec<(&DescriptorKey, u64)> {
        let mut v: Vec<(&DescriptorKey, u64)> = self.counts.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.payload().cmp(b.0.payload())));
        v
    }

    pub fn check_compatible(&self, other: &EmpiricalDistribution) -> Result<()> {
        if self.tag != other.tag || self.radius != other.radius {
            return Err(invalid(format!(
                "distributions differ in descriptor or radius: {}/{} vs {}/{}",
                self.tag, self.radius, other.tag, other.radius
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DistributionFile {
            descriptor_tag: self.tag,
            radius: self.radius,
            total: self.total,
            source: self.source.clone(),
            classes: self
                .ranked()
                .into_iter()
                .map(|(k, count)| ClassEntry {
                    key: BASE64.encode(k.payload()),
                    rendering: k.render(),
                    count,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DistributionFile = serde_json::from_str(text)?;
        let mut d = Self::new(file.descriptor_tag, file.radius, file.source);
        for class in file.classes {
            let payload = BASE64
                .decode(class.key.as_bytes())
                .map_err(|e| invalid(format!("bad base64 key: {e}")))?;
            d.add_count(DescriptorKey::new(d.tag, d.radius, payload), class.count)?;
        }
        if d.total != file.total {
            return Err(invalid(format!(
                "class counts sum to {} but total is {}",
                d.total, file.total
            )));
        }
        Ok(d)
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    descriptor_tag: DescriptorTag,
    radius: u32,
    total: u64,
    source: String,
    classes: Vec<ClassEntry>,
}

#[derive(Serialize, Deserialize)]
struct ClassEntry {
    key: String,
    rendering: String,
    count: u64,
}

/// Joint counts of two descriptors evaluated on the same roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    total: u64,
    counts: BTreeMap<(DescriptorKey, DescriptorKey), u64>,
}

impl JointDistribution {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (DescriptorKey, DescriptorKey)>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for p in pairs {
            *counts.entry(p).or_insert(0) += 1;
            total += 1;
        }
        Self { total, counts }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<(DescriptorKey, DescriptorKey), u64> {
        &self.counts
    }

    pub fn marginal_x(&self) -> BTreeMap<&DescriptorKey, u64> {
        let mut m = BTreeMap::new();
        for ((x, _), &c) in &self.counts {
            *m.entry(x).or_insert(0) += c;
        }
        m
    }

    pub fn marginal_y(&self) -> BTreeMap<&DescriptorKey, u64> {
        let mut m = BTreeMap::new();
        for ((_, y), &c) in &self.counts {
            *m.entry(y).or_insert(0) += c;
        }
        m
    }
}

/// Roots whose species label satisfies `filter`, in id order.
pub fn select_roots(net: &BondNetwork, filter: impl Fn(&str) -> bool) -> Vec<AtomId> {
    (0..net.len() as AtomId)
        .filter(|&a| filter(net.species_label(a)))
        .collect()
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// One key per root, in the order of `roots`.
pub fn root_keys(
    net: &BondNetwork,
    roots: &[AtomId],
    tag: DescriptorTag,
    radius: u32,
    cfg: &DescriptorConfig,
    threads: usize,
) -> Result<Vec<DescriptorKey>> {
    if let Some(&bad) = roots.iter().find(|&&r| r as usize >= net.len()) {
        return Err(invalid(format!("atom {bad} does not exist")));
    }
    pool(threads)?.install(|| {
        roots
            .par_iter()
            .map_init(
                || Extractor::new(net),
                |ex, &root| {
                    let env = ex.extract(root, radius)?;
                    describe_with(&env, tag, cfg)
                },
            )
            .collect()
    })
}

pub fn classify_roots(
    net: &BondNetwork,
    roots: &[AtomId],
    tag: DescriptorTag,
    radius: u32,
    cfg: &DescriptorConfig,
    threads: usize,
) -> Result<EmpiricalDistribution> {
    if roots.is_empty() {
        return Err(invalid("no roots to classify"));
    }
    let keys = root_keys(net, roots, tag, radius, cfg, threads)?;
    EmpiricalDistribution::from_keys(tag, radius, "", keys)
}

/// Classifies every root whose species passes `filter`.
pub fn classify_all(
    net: &BondNetwork,
    tag: DescriptorTag,
    radius: u32,
    filter: impl Fn(&str) -> bool,
    threads: usize,
) -> Result<EmpiricalDistribution> {
    let roots = select_roots(net, filter);
    classify_roots(net, &roots, tag, radius, &DescriptorConfig::default(), threads)
}

pub fn classify_joint(
    net: &BondNetwork,
    roots: &[AtomId],
    x: (DescriptorTag, u32),
    y: (DescriptorTag, u32),
    cfg: &DescriptorConfig,
    threads: usize,
) -> Result<JointDistribution> {
    if roots.is_empty() {
        return Err(invalid("no roots to classify"));
    }
    let kx = root_keys(net, roots, x.0, x.1, cfg, threads)?;
    let ky = root_keys(net, roots, y.0, y.1, cfg, threads)?;
    Ok(JointDistribution::from_pairs(kx.into_iter().zip(ky)))
}
