//! Every backend against a brute-force shadow table.

use hitsel::scheduler::{ActiveSet, BackendKind, ParticleId, Scheduler};
use hitsel::timebase::{quantize_dt, ActiveTime, TickTime};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Linear scan over the shadow table: the reference answer.
fn oracle(shadow: &[ActiveTime]) -> (ActiveTime, Vec<ParticleId>) {
    let min_t = *shadow.iter().min().unwrap();
    let ids = shadow
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t == min_t)
        .map(|(i, _)| ParticleId(i as u32))
        .collect();
    (min_t, ids)
}

fn block_step(rng: &mut impl Rng, now: ActiveTime) -> ActiveTime {
    let raw = 2f64.powi(-rng.random_range(3..=14));
    now + quantize_dt(raw, now).unwrap()
}

fn initial_block_times(rng: &mut impl Rng, n: usize) -> Vec<ActiveTime> {
    (0..n).map(|_| block_step(rng, TickTime::ZERO)).collect()
}

fn entries(times: &[ActiveTime]) -> Vec<(ParticleId, ActiveTime)> {
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| (ParticleId(i as u32), t))
        .collect()
}

fn run_cycles(n: usize, cycles: usize, seed: u64, segments: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shadow = initial_block_times(&mut rng, n);
    let mut schedulers: Vec<_> = BackendKind::ALL
        .iter()
        .map(|&k| Scheduler::build(&entries(&shadow), k, segments).unwrap())
        .collect();

    let mut last = ActiveTime::ZERO;
    for _ in 0..cycles {
        let (min_t, ids) = oracle(&shadow);
        assert!(min_t > last);
        last = min_t;
        let expected = ActiveSet { time: min_t, ids };
        for s in &mut schedulers {
            assert_eq!(s.peek_min(), expected, "{} diverged", s.kind());
        }
        let updates: Vec<_> = expected
            .ids
            .iter()
            .map(|&id| (id, block_step(&mut rng, min_t)))
            .collect();
        for &(id, t) in &updates {
            shadow[id.index()] = t;
        }
        for s in &mut schedulers {
            s.commit_updates(&updates).unwrap();
            if let Some(list) = s.bucket_list() {
                list.check_invariants().unwrap();
                assert_eq!(list.n_particles(), n);
            }
        }
    }
    let steps = schedulers[0].counters().steps;
    let selected = schedulers[0].counters().particles_selected;
    for s in &schedulers {
        assert_eq!(s.counters().steps, steps);
        assert_eq!(s.counters().particles_selected, selected);
    }
}

#[test]
fn backends_match_oracle_small() {
    run_cycles(16, 2000, 1, 3);
}

#[test]
fn backends_match_oracle_medium() {
    run_cycles(256, 2000, 2, 4);
}

#[test]
fn random_hundred_particles_peek_equals_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let shadow = initial_block_times(&mut rng, 100);
    let (min_t, ids) = oracle(&shadow);
    for kind in BackendKind::ALL {
        let mut s = Scheduler::build(&entries(&shadow), kind, 7).unwrap();
        assert_eq!(s.peek_min(), ActiveSet { time: min_t, ids: ids.clone() });
    }
}

#[test]
fn naive_scans_twice() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shadow = initial_block_times(&mut rng, 1000);
    let mut s = Scheduler::build(&entries(&shadow), BackendKind::Naive, 1).unwrap();
    s.peek_min();
    assert_eq!(s.counters().elements_scanned, 2000);
}

#[test]
fn per_step_counter_identities() {
    let n = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut shadow = initial_block_times(&mut rng, n);
    let mut schedulers: Vec<_> = BackendKind::ALL
        .iter()
        .map(|&k| Scheduler::build(&entries(&shadow), k, 4).unwrap())
        .collect();
    for _ in 0..500 {
        let (min_t, ids) = oracle(&shadow);
        let updates: Vec<_> = ids.iter().map(|&id| (id, block_step(&mut rng, min_t))).collect();
        for &(id, t) in &updates {
            shadow[id.index()] = t;
        }
        for s in &mut schedulers {
            let before = s.counters();
            let set = s.peek_min();
            s.commit_updates(&updates).unwrap();
            let d = s.counters().since(&before);
            match s.kind() {
                BackendKind::Naive => assert_eq!(d.elements_scanned, 2 * n as u64),
                BackendKind::Segmented => {
                    assert_eq!(d.elements_scanned, 2 * n as u64);
                    assert_eq!(d.sync_events, 2);
                }
                BackendKind::Bucket => {
                    assert_eq!(d.pnodes_scanned, set.len() as u64);
                    assert_eq!(d.elements_scanned, 0);
                    let tnodes = s.bucket_list().unwrap().n_tnodes() as u64 + 1;
                    assert!(d.tnodes_traversed <= set.len() as u64 * tnodes);
                }
                BackendKind::Sorted => assert!(d.elements_scanned <= set.len() as u64 + 1),
            }
        }
    }
}

#[test]
fn segmented_counters_do_not_depend_on_segment_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shadow = initial_block_times(&mut rng, 300);
    let runs: Vec<_> = [1, 2, 4, 7]
        .iter()
        .map(|&p| {
            let mut s = Scheduler::build(&entries(&shadow), BackendKind::Segmented, p).unwrap();
            let set = s.peek_min();
            (set, s.counters().elements_scanned, s.counters().sync_events)
        })
        .collect();
    for r in &runs {
        assert_eq!(r.0, runs[0].0);
        assert_eq!(r.1, 600);
        assert_eq!(r.2, 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Arbitrary (not block-aligned) times and sparse ids.
    #[test]
    fn arbitrary_times_agree(
        raw in prop::collection::vec(1u64..50, 1..60),
        id_stride in 1u32..5,
        seed in any::<u64>(),
        segments in 1usize..6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<ParticleId> = (0..raw.len() as u32).map(|i| ParticleId(i * id_stride + 3)).collect();
        let mut shadow: Vec<ActiveTime> = raw.iter().map(|&t| TickTime::from_ticks(t).unwrap()).collect();
        let input: Vec<_> = ids.iter().copied().zip(shadow.iter().copied()).collect();
        let mut schedulers: Vec<_> = BackendKind::ALL
            .iter()
            .map(|&k| Scheduler::build(&input, k, segments).unwrap())
            .collect();
        for _ in 0..40 {
            let (min_t, slots) = oracle(&shadow);
            let expected = ActiveSet { time: min_t, ids: slots.iter().map(|s| ids[s.index()]).collect() };
            let updates: Vec<_> = slots
                .iter()
                .map(|s| (s.index(), TickTime::from_ticks(min_t.ticks() + rng.random_range(1..30)).unwrap()))
                .collect();
            for &(slot, t) in &updates {
                shadow[slot] = t;
            }
            let updates: Vec<_> = updates.iter().map(|&(slot, t)| (ids[slot], t)).collect();
            for s in &mut schedulers {
                prop_assert_eq!(s.peek_min(), expected.clone());
                s.commit_updates(&updates).unwrap();
                if let Some(list) = s.bucket_list() {
                    prop_assert!(list.check_invariants().is_ok());
                }
            }
        }
    }
}
