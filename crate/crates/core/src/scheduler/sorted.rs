use super::{SchedulerCounters, SelectionBackend};
use crate::timebase::ActiveTime;

/// An array of `(active time, slot)` kept in ascending order. The active set
/// is its leading run of equal times. After a commit the run is overwritten
/// in place and the array re-sorted; only that run is out of place, which the
/// library sort detects, and the comparison counter shows.
#[derive(Debug, Clone)]
pub struct SortedArray {
    entries: Vec<(ActiveTime, u32)>,
}

impl SortedArray {
    pub fn new(times: &[ActiveTime]) -> Self {
        assert!(!times.is_empty());
        let mut entries: Vec<_> = times
            .iter()
            .enumerate()
            .map(|(slot, &t)| (t, slot as u32))
            .collect();
        entries.sort_unstable();
        SortedArray { entries }
    }

    pub fn entries(&self) -> &[(ActiveTime, u32)] {
        &self.entries
    }
}

impl SelectionBackend for SortedArray {
    fn select(&mut self, out: &mut Vec<u32>, c: &mut SchedulerCounters) -> ActiveTime {
        let min_t = self.entries[0].0;
        out.push(self.entries[0].1);
        c.elements_scanned += 1;
        for &(t, slot) in &self.entries[1..] {
            c.elements_scanned += 1;
            c.comparisons += 1;
            if t != min_t {
                break;
            }
            out.push(slot);
        }
        min_t
    }

    fn apply(&mut self, min_t: ActiveTime, updates: &[(u32, ActiveTime)], c: &mut SchedulerCounters) {
        let run = &mut self.entries[..updates.len()];
        debug_assert!(run.iter().all(|&(t, _)| t == min_t));
        for (entry, &(slot, t)) in run.iter_mut().zip(updates) {
            *entry = (t, slot);
        }
        let mut comparisons = 0u64;
        self.entries.sort_by(|a, b| {
            comparisons += 1;
            a.cmp(b)
        });
        c.comparisons += comparisons;
    }
}
