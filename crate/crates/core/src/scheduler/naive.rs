use super::{SchedulerCounters, SelectionBackend};
use crate::timebase::ActiveTime;

/// Two passes over a flat array of active times: the first finds `min_t`,
/// the second collects every slot equal to it.
#[derive(Debug, Clone)]
pub struct NaiveScan {
    times: Vec<ActiveTime>,
}

impl NaiveScan {
    pub fn new(times: Vec<ActiveTime>) -> Self {
        assert!(!times.is_empty());
        NaiveScan { times }
    }

    pub fn times(&self) -> &[ActiveTime] {
        &self.times
    }
}

impl SelectionBackend for NaiveScan {
    fn select(&mut self, out: &mut Vec<u32>, c: &mut SchedulerCounters) -> ActiveTime {
        let n = self.times.len() as u64;

        let mut min_t = self.times[0];
        for &t in &self.times[1..] {
            if t < min_t {
                min_t = t;
            }
        }
        c.elements_scanned += n;
        c.comparisons += n - 1;

        out.extend(
            self.times
                .iter()
                .enumerate()
                .filter(|&(_, &t)| t == min_t)
                .map(|(slot, _)| slot as u32),
        );
        c.elements_scanned += n;
        c.comparisons += n;
        min_t
    }

    fn apply(&mut self, _min_t: ActiveTime, updates: &[(u32, ActiveTime)], _: &mut SchedulerCounters) {
        for &(slot, t) in updates {
            self.times[slot as usize] = t;
        }
    }
}
