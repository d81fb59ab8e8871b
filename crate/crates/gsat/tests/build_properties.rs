//! Property tests over ideal construction: flatten is the exact inverse,
//! the per-child access bound holds for every policy, and interpolated
//! slot location always agrees with binary search.

use gsat::{binary_slot, DegreePolicy, Gsat, InterpolationIndex, Key, KeyRecord, SlotRef};
use proptest::prelude::*;

fn arb_policy() -> impl Strategy<Value = DegreePolicy> {
    prop_oneof![
        (0.5f64..0.95).prop_map(DegreePolicy::sait),
        (2u32..64).prop_map(DegreePolicy::sabt),
        Just(DegreePolicy::salt()),
        Just(DegreePolicy::sa2t()),
        (0.5f64..0.95).prop_map(DegreePolicy::ist_baseline),
        (2u32..16).prop_map(DegreePolicy::lazy_btree_baseline),
    ]
}

fn arb_records() -> impl Strategy<Value = Vec<KeyRecord<i64>>> {
    prop::collection::btree_map(-5_000i64..5_000, (1u64..200, any::<i64>()), 0..300).prop_map(|m| {
        m.into_iter()
            .map(|(key, (accesses, value))| KeyRecord {
                key,
                value,
                accesses,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn flatten_inverts_build(records in arb_records(), policy in arb_policy()) {
        let tree = Gsat::from_records(records.clone(), -5_000, 5_000, policy).unwrap();
        let unit = policy.weighting == gsat::Weighting::UnitSize;
        let expect: Vec<KeyRecord<i64>> = records
            .iter()
            .map(|r| KeyRecord {
                key: r.key,
                value: r.value,
                accesses: if unit { 1 } else { r.accesses },
            })
            .collect();
        prop_assert_eq!(tree.flatten(false), expect);
        tree.check_invariants().unwrap();
    }

    #[test]
    fn built_trees_are_ideal(records in arb_records(), policy in arb_policy()) {
        let tree = Gsat::from_records(records.clone(), -5_000, 5_000, policy).unwrap();
        prop_assert!(tree.check_ideal());
        prop_assert!(tree.node_count() <= records.len());
    }

    #[test]
    fn interpolated_slots_match_binary_search(
        keys in prop::collection::btree_set(0i64..100_000, 1..400),
        m in 1u64..1_000_000,
        alpha in 0.5f64..0.95,
        probes in prop::collection::vec(0i64..100_000, 50),
    ) {
        let keys: Vec<Key> = keys.into_iter().collect();
        let lower = 0;
        let upper = 100_000;
        let idx = InterpolationIndex::build(&keys, lower, upper, m, alpha);
        for q in probes {
            let got = idx.lookup(&keys, q);
            let want = keys.partition_point(|&k| k < q);
            prop_assert_eq!(got, want);
            // And through the slot lens used by node search.
            match binary_slot(&keys, q) {
                SlotRef::Key(i) => prop_assert_eq!(keys[i], q),
                SlotRef::Child(c) => prop_assert_eq!(c, want),
            }
        }
    }
}
