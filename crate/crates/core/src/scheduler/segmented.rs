use std::ops::Range;

use rayon::prelude::*;

use super::{SchedulerCounters, SelectionBackend};
use crate::timebase::ActiveTime;

/// Below this many particles the segments are processed on the calling
/// thread; spawning work costs more than the scan.
const PARALLEL_MIN: usize = 1 << 15;

/// The naive two-pass scan split across `segments` equal slices of the
/// active-time array. Each pass runs per segment; a reduction of the local
/// minima sits between them and a gather of the local matches follows the
/// second, each counted as one sync event.
///
/// Segments may run on worker threads. Results and counters do not depend on
/// whether they do.
#[derive(Debug, Clone)]
pub struct SegmentedScan {
    times: Vec<ActiveTime>,
    bounds: Vec<Range<usize>>,
    threaded: bool,
    local: Vec<Vec<u32>>,
}

impl SegmentedScan {
    pub fn new(times: Vec<ActiveTime>, segments: usize) -> Self {
        assert!(!times.is_empty() && segments > 0);
        let n = times.len();
        let bounds = (0..segments)
            .map(|i| i * n / segments..(i + 1) * n / segments)
            .collect();
        SegmentedScan {
            threaded: segments > 1 && n >= PARALLEL_MIN,
            times,
            bounds,
            local: vec![Vec::new(); segments],
        }
    }

    /// Forces segments onto worker threads (or off them).
    pub fn set_threaded(&mut self, threaded: bool) {
        self.threaded = threaded;
    }

    pub fn segments(&self) -> usize {
        self.bounds.len()
    }

    pub fn segment_bounds(&self) -> &[Range<usize>] {
        &self.bounds
    }

    fn local_min(times: &[ActiveTime]) -> Option<ActiveTime> {
        times.iter().copied().min()
    }

    fn local_select(times: &[ActiveTime], offset: usize, min_t: ActiveTime, out: &mut Vec<u32>) {
        out.clear();
        out.extend(
            times
                .iter()
                .enumerate()
                .filter(|&(_, &t)| t == min_t)
                .map(|(i, _)| (offset + i) as u32),
        );
    }
}

impl SelectionBackend for SegmentedScan {
    fn select(&mut self, out: &mut Vec<u32>, c: &mut SchedulerCounters) -> ActiveTime {
        let times = &self.times;
        let segs = |r: &Range<usize>| &times[r.clone()];

        let minima: Vec<Option<ActiveTime>> = if self.threaded {
            self.bounds.par_iter().map(|r| Self::local_min(segs(r))).collect()
        } else {
            self.bounds.iter().map(|r| Self::local_min(segs(r))).collect()
        };
        let non_empty = minima.iter().flatten().count() as u64;
        let n = times.len() as u64;
        c.elements_scanned += n;
        c.comparisons += n - non_empty;

        // Reduction of the local minima.
        let min_t = minima.iter().flatten().copied().min().expect("non-empty system");
        c.comparisons += non_empty - 1;
        c.sync_events += 1;

        if self.threaded {
            self.local
                .par_iter_mut()
                .zip(self.bounds.par_iter())
                .for_each(|(buf, r)| Self::local_select(segs(r), r.start, min_t, buf));
        } else {
            for (buf, r) in self.local.iter_mut().zip(&self.bounds) {
                Self::local_select(segs(r), r.start, min_t, buf);
            }
        }
        c.elements_scanned += n;
        c.comparisons += n;

        // Gather in segment order.
        for buf in &self.local {
            out.extend_from_slice(buf);
        }
        c.sync_events += 1;
        min_t
    }

    fn apply(&mut self, _min_t: ActiveTime, updates: &[(u32, ActiveTime)], _: &mut SchedulerCounters) {
        for &(slot, t) in updates {
            self.times[slot as usize] = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timebase::TickTime;

    fn times(ticks: &[u64]) -> Vec<ActiveTime> {
        ticks.iter().map(|&t| TickTime::from_ticks(t).unwrap()).collect()
    }

    #[test]
    fn segments_cover_the_array() {
        let s = SegmentedScan::new(times(&[5; 10]), 4);
        let covered: usize = s.segment_bounds().iter().map(|r| r.len()).sum();
        assert_eq!(covered, 10);
        assert_eq!(s.segment_bounds()[0].start, 0);
        assert_eq!(s.segment_bounds()[3].end, 10);
    }

    #[test]
    fn more_segments_than_particles() {
        let mut s = SegmentedScan::new(times(&[4, 2, 2]), 8);
        let mut out = Vec::new();
        let mut c = SchedulerCounters::default();
        let min_t = s.select(&mut out, &mut c);
        assert_eq!(min_t.ticks(), 2);
        assert_eq!(out, vec![1, 2]);
        assert_eq!(c.elements_scanned, 6);
        assert_eq!(c.sync_events, 2);
    }

    #[test]
    fn threading_does_not_change_results_or_counters() {
        let ticks: Vec<u64> = (0..5000u64).map(|i| 1 + (i * 7919) % 13).collect();
        let mut serial = SegmentedScan::new(times(&ticks), 4);
        let mut threaded = serial.clone();
        serial.set_threaded(false);
        threaded.set_threaded(true);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let (mut ca, mut cb) = (SchedulerCounters::default(), SchedulerCounters::default());
        assert_eq!(serial.select(&mut a, &mut ca), threaded.select(&mut b, &mut cb));
        assert_eq!(a, b);
        assert_eq!(ca, cb);
    }
}
