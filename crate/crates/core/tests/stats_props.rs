mod common;

use std::collections::BTreeMap;

use bondscope::stats::{
    classify_all, mutual_information, scaled_entropy, shannon_entropy, symmetrized_kl, symmetrized_kl_smoothed,
    uncertainty_coefficient, EmpiricalDistribution, JointDistribution,
};
use bondscope::{DescriptorKey, DescriptorTag};
use common::defect_variant;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn key(k: u32) -> DescriptorKey {
    DescriptorKey::new(DescriptorTag::ShellCount, 3, k.to_le_bytes().to_vec())
}

fn dist(counts: &BTreeMap<u32, u64>) -> EmpiricalDistribution {
    let mut d = EmpiricalDistribution::new(DescriptorTag::ShellCount, 3, "");
    for (&k, &c) in counts {
        d.add_count(key(k), c).unwrap();
    }
    d
}

fn counts() -> impl Strategy<Value = BTreeMap<u32, u64>> {
    prop::collection::btree_map(0u32..20, 1u64..50, 1..12)
}

proptest! {
    #[test]
    fn entropy_bounds(c in counts()) {
        let d = dist(&c);
        let h = shannon_entropy(&d);
        prop_assert!(h >= 0.0 && h <= (d.len() as f64).ln() + TOL);
        let s = scaled_entropy(&d);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn information_bounds(pairs in prop::collection::vec((0u32..6, 0u32..6), 1..200)) {
        let j = JointDistribution::from_pairs(pairs.iter().map(|&(x, y)| (key(x), key(y))));
        let hx = shannon_entropy(&EmpiricalDistribution::from_keys(
            DescriptorTag::ShellCount, 3, "", pairs.iter().map(|&(x, _)| key(x))).unwrap());
        let hy = shannon_entropy(&EmpiricalDistribution::from_keys(
            DescriptorTag::ShellCount, 3, "", pairs.iter().map(|&(_, y)| key(y))).unwrap());
        let i = mutual_information(&j);
        prop_assert!(i >= 0.0 && i <= hx.min(hy) + TOL);
        if hx > 0.0 {
            let u = uncertainty_coefficient(&j).unwrap();
            prop_assert!((-TOL..=1.0 + TOL).contains(&u));
        } else {
            prop_assert!(uncertainty_coefficient(&j).is_err());
        }
        let self_joint = JointDistribution::from_pairs(pairs.iter().map(|&(x, _)| (key(x), key(x))));
        if hx > 0.0 {
            prop_assert!((uncertainty_coefficient(&self_joint).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn divergence_zero_iff_equal_on_shared_support(a in counts(), b in counts()) {
        let (p, q) = (dist(&a), dist(&b));
        let kl = symmetrized_kl(&p, &q).unwrap();
        prop_assert!(kl >= 0.0);
        prop_assert!((symmetrized_kl(&q, &p).unwrap() - kl).abs() < TOL);
        prop_assert_eq!(symmetrized_kl(&p, &p).unwrap(), 0.0);
        let equal_on_shared = p
            .counts()
            .keys()
            .filter(|k| q.count(k) > 0)
            .all(|k| (p.frequency(k) - q.frequency(k)).abs() < TOL);
        prop_assert_eq!(kl < TOL, equal_on_shared);
        prop_assert!(symmetrized_kl_smoothed(&p, &q, 0.5).unwrap() >= 0.0);
    }

    #[test]
    fn merge_is_commutative_and_associative(a in counts(), b in counts(), c in counts()) {
        let (p, q, r) = (dist(&a), dist(&b), dist(&c));
        let mut pq = p.clone();
        pq.merge(&q).unwrap();
        let mut qp = q.clone();
        qp.merge(&p).unwrap();
        prop_assert_eq!(&pq, &qp);
        let mut left = pq.clone();
        left.merge(&r).unwrap();
        let mut qr = q.clone();
        qr.merge(&r).unwrap();
        let mut right = p.clone();
        right.merge(&qr).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.total(), p.total() + q.total() + r.total());
    }

    #[test]
    fn json_roundtrip(c in counts()) {
        let d = dist(&c);
        prop_assert_eq!(EmpiricalDistribution::from_json(&d.to_json().unwrap()).unwrap(), d);
    }
}

#[test]
fn distribution_files_do_not_depend_on_thread_count() {
    let net = defect_variant(5);
    for tag in DescriptorTag::ALL {
        let files: Vec<String> = [1, 2, 3, 8]
            .iter()
            .map(|&k| classify_all(&net, tag, 4, |s| s == "Si", k).unwrap().to_json().unwrap())
            .collect();
        assert!(files.windows(2).all(|w| w[0] == w[1]), "{tag}");
    }
}
