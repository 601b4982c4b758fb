use std::fmt;

use crate::network::LocalEnvironment;

/// Per-shell sorted multisets of parent-network valences.
///
/// With `with_species` set, each entry also carries the atom's species label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordinationProfile {
    shells: Vec<Vec<(u32, String)>>,
}

impl CoordinationProfile {
    pub fn from_shells(mut shells: Vec<Vec<(u32, String)>>) -> Self {
        for shell in &mut shells {
            shell.sort();
        }
        Self { shells }
    }

    pub fn shells(&self) -> &[Vec<(u32, String)>] {
        &self.shells
    }

    /// Sorted valences of shell `i`, without species.
    pub fn valences(&self, i: usize) -> Vec<u32> {
        self.shells[i].iter().map(|(v, _)| *v).collect()
    }

    pub fn radius(&self) -> usize {
        self.shells.len() - 1
    }

    pub fn shell_count(&self) -> ShellCount {
        ShellCount::new(self.shells.iter().map(|s| s.len() as u32).collect())
    }
}

impl fmt::Display for CoordinationProfile {
    /// Shells separated by `|`, each as `count×valence` groups, e.g.
    /// `4 | 4×2 | 4×4 | 11×2,1×1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, shell) in self.shells.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let mut k = 0;
            let mut first = true;
            while k < shell.len() {
                let run = shell[k..].iter().take_while(|e| **e == shell[k]).count();
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                let (v, s) = &shell[k];
                if run > 1 {
                    write!(f, "{run}×")?;
                }
                write!(f, "{v}")?;
                if !s.is_empty() {
                    write!(f, "{s}")?;
                }
                k += run;
            }
        }
        Ok(())
    }
}

/// Number of atoms in each shell; `counts[0] = 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShellCount {
    counts: Vec<u32>,
}

impl ShellCount {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

impl fmt::Display for ShellCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

pub fn coordination_profile(env: &LocalEnvironment<'_>) -> CoordinationProfile {
    build_profile(env, false)
}

pub fn coordination_profile_with_species(env: &LocalEnvironment<'_>) -> CoordinationProfile {
    build_profile(env, true)
}

fn build_profile(env: &LocalEnvironment<'_>, with_species: bool) -> CoordinationProfile {
    let mut shells = Vec::with_capacity(env.radius() as usize + 1);
    for i in 0..=env.radius() {
        let mut shell: Vec<(u32, String)> = env
            .shell_range(i)
            .map(|k| {
                let label = if with_species {
                    env.species_label(k).to_string()
                } else {
                    String::new()
                };
                (env.full_degree(k) as u32, label)
            })
            .collect();
        shell.sort();
        shells.push(shell);
    }
    CoordinationProfile { shells }
}

pub fn shell_count(profile: &CoordinationProfile) -> ShellCount {
    profile.shell_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{extract_environment, BondNetwork};

    #[test]
    fn isolated_root() {
        let net = BondNetwork::new(&["Si"], std::iter::empty()).unwrap();
        let env = extract_environment(&net, 0, 3).unwrap();
        let p = coordination_profile(&env);
        assert_eq!(p.radius(), 3);
        assert_eq!(p.valences(0), vec![0]);
        assert!(p.valences(1).is_empty());
        assert_eq!(shell_count(&p).counts(), &[1, 0, 0, 0]);
    }

    #[test]
    fn valences_come_from_parent_network() {
        // Si with four O, each O bonded to one further Si
        let mut labels = vec!["Si"];
        let mut bonds = Vec::new();
        for k in 0..4 {
            labels.push("O");
            bonds.push((0, 1 + k));
        }
        for k in 0..4 {
            labels.push("Si");
            bonds.push((1 + k, 5 + k));
        }
        let net = BondNetwork::new(&labels, bonds).unwrap();
        let env = extract_environment(&net, 0, 1).unwrap();
        let p = coordination_profile(&env);
        assert_eq!(p.valences(0), vec![4]);
        assert_eq!(p.valences(1), vec![2, 2, 2, 2]);
        assert_eq!(p.to_string(), "4 | 4×2");
        let ps = coordination_profile_with_species(&env);
        assert_eq!(ps.to_string(), "4Si | 4×2O");
        assert_ne!(p, ps);
    }

    #[test]
    fn shell_count_rendering() {
        let sc = ShellCount::new(vec![1, 4, 4, 12, 12, 33]);
        assert_eq!(sc.to_string(), "(1,4,4,12,12,33)");
        assert_eq!(sc.total(), 66);
    }
}
