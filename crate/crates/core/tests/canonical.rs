mod common;

use std::collections::HashMap;

use bondscope::descriptors::{canonical_form, rooted_canonical_key, CanonicalGraphKey, DEFAULT_SIZE_CAP};
use bondscope::{extract_environment, Error};
use common::{
    brute_isomorphic, edges_of_mask, permute_mask, random_rooted_pair, rng, root_fixing_permutations, vertex_pairs,
};

fn key(species: &[&str], edges: &[(u32, u32)]) -> CanonicalGraphKey {
    rooted_canonical_key(species, edges, 0, DEFAULT_SIZE_CAP).unwrap()
}

/// Key equality against orbit equality for every rooted graph on `n`
/// vertices whose species are given by `species`.
fn exhaustive(n: usize, species: &[&str]) {
    let pairs = vertex_pairs(n);
    let perms = root_fixing_permutations(n);
    let total = 1u64 << pairs.len();
    let mut orbit = vec![u32::MAX; total as usize];
    let mut orbits = 0;
    for mask in 0..total {
        if orbit[mask as usize] != u32::MAX {
            continue;
        }
        for p in &perms {
            let relabeled: Vec<&str> = (0..n).map(|v| species[p.iter().position(|&x| x == v).unwrap()]).collect();
            if relabeled == species {
                orbit[permute_mask(n, &pairs, mask, p) as usize] = orbits;
            }
        }
        orbits += 1;
    }
    let mut by_key: HashMap<CanonicalGraphKey, u32> = HashMap::new();
    for mask in 0..total {
        let k = key(species, &edges_of_mask(&pairs, mask));
        let o = orbit[mask as usize];
        assert_eq!(*by_key.entry(k).or_insert(o), o, "n={n} {species:?} mask {mask:b}");
    }
    assert_eq!(by_key.len(), orbits as usize);
}

#[test]
fn exhaustive_unlabeled_up_to_six() {
    for n in 1..=6 {
        exhaustive(n, &vec!["X"; n]);
    }
}

#[test]
fn exhaustive_two_species_up_to_five() {
    for n in 1..=5 {
        for assignment in 0..1u32 << n {
            let species: Vec<&str> = (0..n).map(|v| if assignment >> v & 1 == 1 { "O" } else { "Si" }).collect();
            exhaustive(n, &species);
        }
    }
}

#[test]
fn random_pairs_agree_with_brute_force() {
    let mut g = rng(99);
    let (mut same, mut differ) = (0, 0);
    for _ in 0..1500 {
        let (a, b) = random_rooted_pair(&mut g);
        let iso = brute_isomorphic(&a.0, &a.1, 0, &b.0, &b.1, 0);
        assert_eq!(iso, key(&a.0, &a.1) == key(&b.0, &b.1));
        if iso {
            same += 1;
        } else {
            differ += 1;
        }
    }
    assert!(same > 300 && differ > 300, "{same} {differ}");
}

#[test]
fn environment_form_and_cap() {
    let labels = vec!["C"; 8];
    let net = bondscope::BondNetwork::new(&labels, (0..8).map(|i| (i, (i + 1) % 8))).unwrap();
    let a = canonical_form(&extract_environment(&net, 0, 4).unwrap(), DEFAULT_SIZE_CAP).unwrap();
    let b = canonical_form(&extract_environment(&net, 5, 4).unwrap(), DEFAULT_SIZE_CAP).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.size(), (8, 8));
    assert_eq!(CanonicalGraphKey::from_bytes(a.as_bytes().to_vec()), a);
    assert!(matches!(
        canonical_form(&extract_environment(&net, 0, 4).unwrap(), 7),
        Err(Error::TooLarge { size: 8, cap: 7 })
    ));
}
