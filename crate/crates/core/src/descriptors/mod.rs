//! Descriptors of local environments and their serialized keys.

pub mod barcode;
pub mod canonical;
pub mod coordination;
pub mod rings;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::network::LocalEnvironment;

pub use barcode::{
    endpoints_from_shell_count, f_matrix, h1_barcode, interval_multiplicity, mobius_invert,
    shell_count_from_endpoints, Barcode, FMatrix, MobiusTable,
};
pub use canonical::{canonical_form, rooted_canonical_key, CanonicalGraphKey, DEFAULT_SIZE_CAP};
pub use coordination::{
    coordination_profile, coordination_profile_with_species, shell_count, CoordinationProfile,
    ShellCount,
};
pub use rings::{primitive_rings, primitive_rings_in_network, primitive_rings_through, PrimitiveRingProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DescriptorTag {
    Coordination,
    ShellCount,
    PrimitiveRings,
    H1Barcode,
    GraphIso,
    PrimitiveCluster,
}

impl DescriptorTag {
    pub const ALL: [DescriptorTag; 6] = [
        DescriptorTag::Coordination,
        DescriptorTag::ShellCount,
        DescriptorTag::PrimitiveRings,
        DescriptorTag::H1Barcode,
        DescriptorTag::GraphIso,
        DescriptorTag::PrimitiveCluster,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DescriptorTag::Coordination => "coordination",
            DescriptorTag::ShellCount => "shell-count",
            DescriptorTag::PrimitiveRings => "primitive-rings",
            DescriptorTag::H1Barcode => "h1-barcode",
            DescriptorTag::GraphIso => "graph-iso",
            DescriptorTag::PrimitiveCluster => "primitive-cluster",
        }
    }
}

impl fmt::Display for DescriptorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DescriptorTag {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        DescriptorTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown descriptor '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct DescriptorConfig {
    /// Largest graph handed to the canonical labeler.
    pub canonical_cap: usize,
    /// Append species labels to coordination profile entries.
    pub coordination_species: bool,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        Self {
            canonical_cap: DEFAULT_SIZE_CAP,
            coordination_species: false,
        }
    }
}

/// Serialized value of one descriptor on one environment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DescriptorKey {
    tag: DescriptorTag,
    radius: u32,
    payload: Vec<u8>,
}

impl DescriptorKey {
    pub fn new(tag: DescriptorTag, radius: u32, payload: Vec<u8>) -> Self {
        Self { tag, radius, payload }
    }

    pub fn tag(&self) -> DescriptorTag {
        self.tag
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Human-readable form of the payload.
    pub fn render(&self) -> String {
        let mut words = Words(&self.payload);
        match self.tag {
            DescriptorTag::Coordination => {
                let mut shells = Vec::new();
                for _ in 0..=self.radius {
                    let Some(len) = words.next() else { break };
                    let mut shell = Vec::new();
                    for _ in 0..len {
                        let v = words.next().unwrap_or(0);
                        let s = words.string().unwrap_or_default();
                        shell.push((v, s));
                    }
                    shells.push(shell);
                }
                CoordinationProfile::from_shells(shells).to_string()
            }
            DescriptorTag::ShellCount => ShellCount::new(words.collect()).to_string(),
            DescriptorTag::PrimitiveRings => PrimitiveRingProfile::from_lengths(words.collect()).to_string(),
            DescriptorTag::H1Barcode => {
                let v: Vec<u32> = words.collect();
                let pairs = v
                    .chunks_exact(3)
                    .flat_map(|c| std::iter::repeat_n((c[0], c[1]), c[2] as usize));
                Barcode::from_intervals(pairs).to_string()
            }
            DescriptorTag::GraphIso | DescriptorTag::PrimitiveCluster => {
                if self.payload.len() < 8 {
                    return String::new();
                }
                CanonicalGraphKey::from_bytes(self.payload.clone()).to_string()
            }
        }
    }
}

struct Words<'a>(&'a [u8]);

impl Words<'_> {
    fn string(&mut self) -> Option<String> {
        let len = self.next()? as usize;
        let (head, tail) = self.0.split_at(len.min(self.0.len()));
        self.0 = tail;
        Some(String::from_utf8_lossy(head).into_owned())
    }
}

impl Iterator for Words<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0.len() < 4 {
            return None;
        }
        let (head, tail) = self.0.split_at(4);
        self.0 = tail;
        Some(u32::from_le_bytes(head.try_into().unwrap()))
    }
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn coordination_payload(profile: &CoordinationProfile) -> Vec<u8> {
    let mut out = Vec::new();
    for shell in profile.shells() {
        push_u32(&mut out, shell.len() as u32);
        for (v, s) in shell {
            push_u32(&mut out, *v);
            push_u32(&mut out, s.len() as u32);
            out.extend_from_slice(s.as_bytes());
        }
    }
    out
}

/// Same bytes as `coordination_payload` of a species-free profile, without
/// building the profile.
fn valence_payload(env: &LocalEnvironment<'_>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 * env.len() + 4 * (env.radius() as usize + 1));
    let mut shell: Vec<u32> = Vec::new();
    for i in 0..=env.radius() {
        shell.clear();
        shell.extend(env.shell_range(i).map(|k| env.full_degree(k) as u32));
        shell.sort_unstable();
        push_u32(&mut out, shell.len() as u32);
        for &v in &shell {
            push_u32(&mut out, v);
            push_u32(&mut out, 0);
        }
    }
    out
}

fn words_payload(words: impl IntoIterator<Item = u32>) -> Vec<u8> {
    let mut out = Vec::new();
    for w in words {
        push_u32(&mut out, w);
    }
    out
}

/// Canonical key of the union of the primitive rings through the root.
pub fn primitive_cluster(env: &LocalEnvironment<'_>, cap: usize) -> Result<CanonicalGraphKey> {
    let rings = primitive_rings(env, 2 * env.radius())?;
    let mut edges = Vec::new();
    for ring in &rings {
        for k in 0..ring.len() {
            let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    canonical::canonical_form_of_edges(env, &edges, cap)
}

pub fn describe(env: &LocalEnvironment<'_>, tag: DescriptorTag) -> Result<DescriptorKey> {
    describe_with(env, tag, &DescriptorConfig::default())
}

pub fn describe_with(env: &LocalEnvironment<'_>, tag: DescriptorTag, cfg: &DescriptorConfig) -> Result<DescriptorKey> {
    let payload = match tag {
        DescriptorTag::Coordination if cfg.coordination_species => {
            coordination_payload(&coordination_profile_with_species(env))
        }
        DescriptorTag::Coordination => valence_payload(env),
        DescriptorTag::ShellCount => {
            words_payload((0..=env.radius()).map(|i| env.shell_range(i).len() as u32))
        }
        DescriptorTag::PrimitiveRings => {
            let profile = primitive_rings_through(env, 2 * env.radius())?;
            words_payload(profile.lengths().iter().copied())
        }
        DescriptorTag::H1Barcode => {
            let bc = h1_barcode(env)?;
            words_payload(bc.intervals().iter().flat_map(|&(a, b, m)| [a, b, m]))
        }
        DescriptorTag::GraphIso => canonical_form(env, cfg.canonical_cap)?.into_bytes(),
        DescriptorTag::PrimitiveCluster => primitive_cluster(env, cfg.canonical_cap)?.into_bytes(),
    };
    Ok(DescriptorKey::new(tag, env.radius(), payload))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{extract_environment, BondNetwork};

    fn hexagon_with_tail() -> BondNetwork {
        BondNetwork::new(
            &["Si", "O", "Si", "O", "Si", "O", "O"],
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 6)],
        )
        .unwrap()
    }

    #[test]
    fn tags_roundtrip_through_strings() {
        for tag in DescriptorTag::ALL {
            assert_eq!(tag.as_str().parse::<DescriptorTag>().unwrap(), tag);
        }
        assert!("rings".parse::<DescriptorTag>().is_err());
    }

    #[test]
    fn keys_are_deterministic_and_render() {
        let net = hexagon_with_tail();
        let env = extract_environment(&net, 0, 3).unwrap();
        let expected = [
            (DescriptorTag::Coordination, "3 | 1,2×2 | 2×2 | 2"),
            (DescriptorTag::ShellCount, "(1,3,2,1)"),
            (DescriptorTag::PrimitiveRings, "1 6-ring"),
            (DescriptorTag::H1Barcode, "(0,3)"),
        ];
        for (tag, text) in expected {
            let a = describe(&env, tag).unwrap();
            let b = describe(&env, tag).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.render(), text, "{tag}");
        }
        let g = describe(&env, DescriptorTag::GraphIso).unwrap();
        assert!(g.render().starts_with("7 atoms, 7 bonds"));
        let c = describe(&env, DescriptorTag::PrimitiveCluster).unwrap();
        assert!(c.render().starts_with("6 atoms, 6 bonds"));
    }

    #[test]
    fn species_flag_changes_coordination_key() {
        let net = hexagon_with_tail();
        let env = extract_environment(&net, 0, 2).unwrap();
        let plain = describe(&env, DescriptorTag::Coordination).unwrap();
        let cfg = DescriptorConfig {
            coordination_species: true,
            ..Default::default()
        };
        let labeled = describe_with(&env, DescriptorTag::Coordination, &cfg).unwrap();
        assert_ne!(plain, labeled);
        assert_eq!(labeled.render(), "3Si | 1O,2×2O | 2×2Si");
    }

    #[test]
    fn fast_coordination_payload_matches_profile() {
        let net = hexagon_with_tail();
        for root in 0..7 {
            let env = extract_environment(&net, root, 3).unwrap();
            assert_eq!(valence_payload(&env), coordination_payload(&coordination_profile(&env)));
        }
    }

    #[test]
    fn tree_cluster_is_single_vertex() {
        let net = BondNetwork::new(&["A", "B", "B"], [(0, 1), (0, 2)]).unwrap();
        let env = extract_environment(&net, 0, 2).unwrap();
        let k = primitive_cluster(&env, 512).unwrap();
        assert_eq!(k.size(), (1, 0));
    }
}
