//! Differential checks for the range-query tree against a flat oracle over
//! a small key universe, plus access-accounting conservation and the
//! flat-vs-segment-tree equivalence.

use gsat::range::{AggregatesMode, MinAlgebra, RangeAlgebra, RangeGsat, SumAdd, SumAssign};
use gsat::{DegreePolicy, DeleteMode, Key};

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Flat reference model: one slot per key in the universe.
struct FlatOracle<A: RangeAlgebra<Value = i64>> {
    live: Vec<Option<i64>>,
    alg: A,
}

impl<A: RangeAlgebra<Value = i64>> FlatOracle<A> {
    fn new(universe: usize, alg: A) -> Self {
        FlatOracle {
            live: vec![None; universe],
            alg,
        }
    }

    fn get(&self, key: Key) -> Option<i64> {
        self.live[key as usize]
    }

    fn insert(&mut self, key: Key, value: i64) {
        let slot = &mut self.live[key as usize];
        if slot.is_none() {
            *slot = Some(value);
        }
    }

    fn delete(&mut self, key: Key) {
        self.live[key as usize] = None;
    }

    fn range_keys(&self, a: Key, b: Key) -> Vec<Key> {
        (a..=b)
            .filter(|&k| self.live[k as usize].is_some())
            .collect()
    }

    fn range_fold(&self, a: Key, b: Key) -> i64 {
        let mut acc = self.alg.identity();
        for k in a..=b {
            if let Some(v) = self.live[k as usize] {
                acc = self.alg.combine(&acc, &v);
            }
        }
        acc
    }

    fn range_update(&mut self, a: Key, b: Key, u: &A::Update) {
        for k in a..=b {
            if let Some(v) = self.live[k as usize] {
                self.live[k as usize] = Some(self.alg.apply(u, &v, 1));
            }
        }
    }
}

struct Plan {
    universe: u64,
    ops: usize,
    seed: u64,
    delete_mode: DeleteMode,
}

fn run_differential<A, FU>(
    alg: A,
    plan: Plan,
    policy: DegreePolicy,
    mode: AggregatesMode,
    mut pick_update: FU,
) where
    A: RangeAlgebra<Value = i64> + Clone,
    FU: FnMut(&mut XorShift) -> A::Update,
{
    let mut rng = XorShift(plan.seed | 1);
    let mut tree = RangeGsat::with_bounds(policy, alg.clone(), 0, plan.universe as Key);
    tree.set_aggregates_mode(mode);
    tree.set_delete_mode(plan.delete_mode);
    let mut oracle = FlatOracle::new(plan.universe as usize, alg);
    for step in 0..plan.ops {
        let key = rng.below(plan.universe) as Key;
        match rng.below(12) {
            0..=2 => {
                tree.insert(key, step as i64);
                oracle.insert(key, step as i64);
            }
            3 => {
                tree.delete(key);
                oracle.delete(key);
            }
            4..=6 => {
                assert_eq!(tree.get(key), oracle.get(key), "get({key}) at step {step}");
            }
            kind => {
                let other = rng.below(plan.universe) as Key;
                let (a, b) = (key.min(other), key.max(other));
                let expected_len = oracle.range_keys(a, b).len() as u64;
                let m_before = tree.total_accesses();
                let dropped_before = tree.stats().dropped_accesses;
                match kind {
                    7 | 8 => {
                        assert_eq!(
                            tree.range_get(a, b),
                            oracle.range_keys(a, b),
                            "range_get({a},{b}) at step {step}"
                        );
                    }
                    9 | 10 => {
                        assert_eq!(
                            tree.range_calculate(a, b),
                            oracle.range_fold(a, b),
                            "range_calculate({a},{b}) at step {step}"
                        );
                    }
                    _ => {
                        let u = pick_update(&mut rng);
                        tree.range_update(a, b, u.clone());
                        oracle.range_update(a, b, &u);
                    }
                }
                // Conservation: the root gains exactly one access per live
                // key covered, minus whatever tombstone history a
                // counter-triggered standard rebuild discarded in the same
                // operation.
                let dropped = tree.stats().dropped_accesses - dropped_before;
                assert_eq!(
                    tree.total_accesses() as i64 - m_before as i64,
                    expected_len as i64 - dropped as i64,
                    "charge for [{a},{b}] at step {step}"
                );
            }
        }
        if step % 997 == 0 {
            tree.check_invariants().unwrap();
        }
    }
    tree.check_invariants().unwrap();
    let live: Vec<Key> = (0..plan.universe as Key)
        .filter(|&k| oracle.get(k).is_some())
        .collect();
    assert_eq!(tree.live_keys(), live);
}

fn policies() -> Vec<DegreePolicy> {
    vec![
        DegreePolicy::sait(0.5),
        DegreePolicy::sabt(16),
        DegreePolicy::sa2t(),
        DegreePolicy::salt(),
    ]
}

#[test]
fn sum_add_matches_flat_oracle() {
    for (i, policy) in policies().into_iter().enumerate() {
        run_differential(
            SumAdd,
            Plan {
                universe: 512,
                ops: 10_000,
                seed: 0xA11CE + i as u64,
                delete_mode: DeleteMode::Standard,
            },
            policy,
            AggregatesMode::Auto,
            |rng| rng.below(1_000) as i64 - 500,
        );
    }
}

#[test]
fn sum_assign_matches_flat_oracle() {
    for (i, policy) in policies().into_iter().enumerate() {
        run_differential(
            SumAssign,
            Plan {
                universe: 512,
                ops: 10_000,
                seed: 0xBEEF + i as u64,
                delete_mode: DeleteMode::Standard,
            },
            policy,
            AggregatesMode::Auto,
            |rng| Some(rng.below(1_000) as i64 - 500),
        );
    }
}

#[test]
fn min_matches_flat_oracle() {
    for (i, policy) in policies().into_iter().enumerate() {
        run_differential(
            MinAlgebra,
            Plan {
                universe: 512,
                ops: 10_000,
                seed: 0xF00D + i as u64,
                delete_mode: DeleteMode::LazyDelete,
            },
            policy,
            AggregatesMode::Auto,
            |_| (),
        );
    }
}

#[test]
fn forced_representations_match_flat_oracle() {
    for mode in [AggregatesMode::ForceFlat, AggregatesMode::ForceSeg] {
        run_differential(
            SumAssign,
            Plan {
                universe: 256,
                ops: 6_000,
                seed: 0xDADA,
                delete_mode: DeleteMode::Standard,
            },
            DegreePolicy::sait(0.5),
            mode,
            |rng| Some(rng.below(1_000) as i64 - 500),
        );
    }
}

/// The two per-node bookkeeping paths must agree on every observable, not
/// just on oracle-visible state: replay one stream on both and compare.
#[test]
fn flat_and_seg_paths_produce_identical_observables() {
    let policy = DegreePolicy::sait(0.5);
    let mut a = RangeGsat::with_bounds(policy, SumAdd, 0, 300);
    a.set_aggregates_mode(AggregatesMode::ForceFlat);
    let mut b = RangeGsat::with_bounds(policy, SumAdd, 0, 300);
    b.set_aggregates_mode(AggregatesMode::ForceSeg);
    let mut rng = XorShift(0x5EED);
    for step in 0..8_000i64 {
        let key = rng.below(300) as Key;
        match rng.below(10) {
            0 | 1 => {
                a.insert(key, step);
                b.insert(key, step);
            }
            2 => {
                a.delete(key);
                b.delete(key);
            }
            3..=5 => assert_eq!(a.get(key), b.get(key)),
            kind => {
                let other = rng.below(300) as Key;
                let (lo, hi) = (key.min(other), key.max(other));
                match kind {
                    6 => assert_eq!(a.range_get(lo, hi), b.range_get(lo, hi)),
                    7 | 8 => assert_eq!(a.range_calculate(lo, hi), b.range_calculate(lo, hi)),
                    _ => {
                        a.range_update(lo, hi, 7);
                        b.range_update(lo, hi, 7);
                    }
                }
            }
        }
        assert_eq!(a.total_accesses(), b.total_accesses(), "step {step}");
    }
    assert_eq!(a.flatten(true), b.flatten(true));
}

#[test]
fn lazy_delete_mode_keeps_tombstones_across_range_rebuilds() {
    let mut t = RangeGsat::with_bounds(DegreePolicy::sabt(4), SumAdd, 0, 64);
    t.set_delete_mode(DeleteMode::LazyDelete);
    for k in 0..64 {
        t.insert(k, k);
    }
    t.delete(10);
    // Updates over the tombstone leave its frozen value alone.
    t.range_update(0, 63, 5);
    t.force_rebuild();
    assert_eq!(t.get(10), None);
    t.insert(10, -1);
    // Revived with the new value; the pending-era update did not leak in.
    assert_eq!(t.get(10), Some(-1));
    let rec = t.flatten(false);
    let r10 = rec.iter().find(|r| r.key == 10).unwrap();
    assert!(r10.accesses >= 4, "history carried: {}", r10.accesses);
    t.check_invariants().unwrap();
}

#[test]
fn empty_tree_and_empty_ranges() {
    let mut t = RangeGsat::new(DegreePolicy::sait(0.5), SumAdd);
    assert_eq!(t.range_get(3, 9), Vec::<Key>::new());
    assert_eq!(t.range_calculate(3, 9), 0);
    t.range_update(3, 9, 4);
    for k in [5, 20] {
        t.insert(k, k);
    }
    // In-bounds range with no live keys: identity, nothing charged.
    let before = t.total_accesses();
    assert_eq!(t.range_calculate(6, 19), 0);
    assert_eq!(t.total_accesses(), before);
}

#[test]
#[should_panic]
fn reversed_range_is_a_contract_violation() {
    let mut t = RangeGsat::new(DegreePolicy::sait(0.5), SumAdd);
    t.range_get(9, 3);
}

#[test]
fn repeated_range_queries_pull_the_range_toward_the_root() {
    let n = 4_096u64;
    let records: Vec<gsat::KeyRecord<i64>> = (0..n)
        .map(|i| gsat::KeyRecord {
            key: i as Key,
            value: i as i64,
            accesses: 1,
        })
        .collect();
    let mut t =
        RangeGsat::from_records(records, 0, n as Key, DegreePolicy::sait(0.5), SumAdd).unwrap();
    let initial = t.depth_of(100).unwrap() + t.depth_of(131).unwrap();
    for _ in 0..2_000 {
        let got = t.range_get(100, 131);
        assert_eq!(got.len(), 32);
    }
    t.force_rebuild();
    let adapted = t.depth_of(100).unwrap() + t.depth_of(131).unwrap();
    assert!(
        adapted < initial,
        "range keys did not rise: {initial} -> {adapted}"
    );
}

/// In lazy-delete mode nothing is ever discarded, so every key's access
/// count is exactly predictable. Replay a long interleaving and compare
/// the fully flushed tree against the shadow model, key by key.
#[test]
fn lazy_mode_access_counts_are_exact_after_flush() {
    let universe = 300u64;
    for mode in [AggregatesMode::Auto, AggregatesMode::ForceSeg] {
        let mut tree = RangeGsat::with_bounds(DegreePolicy::sait(0.5), SumAdd, 0, universe as Key);
        tree.set_delete_mode(DeleteMode::LazyDelete);
        tree.set_aggregates_mode(mode);
        let mut shadow_ac = vec![0u64; universe as usize]; // 0 = never inserted
        let mut live = vec![false; universe as usize];
        let mut rng = XorShift(0xCAFE);
        for step in 0..12_000i64 {
            let key = rng.below(universe) as usize;
            match rng.below(10) {
                0 | 1 => {
                    tree.insert(key as Key, step);
                    shadow_ac[key] += 1;
                    live[key] = true;
                }
                2 => {
                    tree.delete(key as Key);
                    if shadow_ac[key] > 0 {
                        shadow_ac[key] += 1; // tombstoned keys still count the access
                    }
                    live[key] = false;
                }
                3..=5 => {
                    tree.get(key as Key);
                    if shadow_ac[key] > 0 {
                        shadow_ac[key] += 1;
                    }
                }
                kind => {
                    let other = rng.below(universe) as usize;
                    let (a, b) = (key.min(other), key.max(other));
                    match kind {
                        6 | 7 => {
                            tree.range_get(a as Key, b as Key);
                        }
                        8 => {
                            tree.range_calculate(a as Key, b as Key);
                        }
                        _ => tree.range_update(a as Key, b as Key, 3),
                    }
                    for k in a..=b {
                        if live[k] {
                            shadow_ac[k] += 1;
                        }
                    }
                }
            }
        }
        let records = tree.flatten(true);
        let mut seen = vec![0u64; universe as usize];
        for r in &records {
            seen[r.key as usize] = r.accesses;
        }
        assert_eq!(seen, shadow_ac, "per-key access counts diverged ({mode:?})");
        assert_eq!(
            tree.total_accesses(),
            shadow_ac.iter().sum::<u64>(),
            "total accesses diverged ({mode:?})"
        );
    }
}

#[test]
fn golden_range_walk() {
    let recs: Vec<gsat::KeyRecord<i64>> = [(1i64, 1u64), (2, 18), (3, 2), (4, 3)]
        .iter()
        .map(|&(key, accesses)| gsat::KeyRecord {
            key,
            value: key,
            accesses,
        })
        .collect();
    let mut t = RangeGsat::from_records(recs, 1, 5, DegreePolicy::sait(0.5), SumAdd).unwrap();
    assert_eq!(t.range_get(1, 4), vec![1, 2, 3, 4]);
    assert_eq!(t.total_accesses(), 28);
    let rec = t.flatten(false);
    assert_eq!(
        rec.iter().map(|r| r.accesses).collect::<Vec<_>>(),
        vec![2, 19, 3, 4]
    );
}
