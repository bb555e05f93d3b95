//! Active-particle selection.
//!
//! Every cycle of an individual-time-step integrator has to find `min_t`, the
//! smallest active time `t_i + dt_i` over all particles, together with every
//! particle that attains it. [`Scheduler`] wraps four interchangeable
//! strategies for doing so:
//!
//! * [`BackendKind::Naive`]: two full passes over the active-time array, one
//!   for the minimum and one to collect the matches.
//! * [`BackendKind::Segmented`]: the same two passes split into equal
//!   segments with a reduction between them, the way a distributed code runs
//!   them on several processes.
//! * [`BackendKind::Sorted`]: an array kept sorted by active time; the active
//!   set is its leading run.
//! * [`BackendKind::Bucket`]: a sorted list of time buckets (T-nodes), each
//!   holding the particles (P-nodes) that share that active time. The head
//!   bucket is the active set.
//!
//! All backends share one contract: [`Scheduler::peek_min`] reports the
//! active set without changing it, and [`Scheduler::commit_updates`] receives
//! the new active time of every particle in that set. Each backend counts the
//! work it does in [`SchedulerCounters`].

mod bucket;
mod naive;
mod segmented;
mod sorted;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::timebase::ActiveTime;

pub use bucket::BucketList;
pub use naive::NaiveScan;
pub use segmented::SegmentedScan;
pub use sorted::SortedArray;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticleId(pub u32);

impl ParticleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ParticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for ParticleId {
    fn from(id: u32) -> Self {
        ParticleId(id)
    }
}

/// The particles due at `time`. The order of `ids` carries no meaning, and
/// equality between sets ignores it.
#[derive(Debug, Clone, Eq)]
pub struct ActiveSet {
    pub time: ActiveTime,
    pub ids: Vec<ParticleId>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn sorted_ids(&self) -> Vec<ParticleId> {
        let mut ids = self.ids.clone();
        ids.sort_unstable();
        ids
    }
}

impl PartialEq for ActiveSet {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time
            && self.ids.len() == other.ids.len()
            && self.sorted_ids() == other.sorted_ids()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Naive,
    Segmented,
    Sorted,
    Bucket,
}

impl BackendKind {
    pub const ALL: [BackendKind; 4] = [
        BackendKind::Naive,
        BackendKind::Segmented,
        BackendKind::Sorted,
        BackendKind::Bucket,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Naive => "naive",
            BackendKind::Segmented => "segmented",
            BackendKind::Sorted => "sorted",
            BackendKind::Bucket => "bucket",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BackendKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown backend {s:?} (expected naive, segmented, sorted or bucket)"))
    }
}

/// Work done by a scheduler since it was built.
///
/// * `comparisons`: ordering or equality tests between two active times.
/// * `pnodes_scanned`: particle entries read from a bucket's P-list.
/// * `tnodes_traversed`: buckets visited while inserting an updated particle.
/// * `elements_scanned`: array slots read by the scan and sort backends.
/// * `sync_events`: reductions and gathers between segments.
/// * `particles_selected`: running sum of active-set sizes over committed steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchedulerCounters {
    pub steps: u64,
    pub comparisons: u64,
    pub pnodes_scanned: u64,
    pub tnodes_traversed: u64,
    pub elements_scanned: u64,
    pub sync_events: u64,
    pub particles_selected: u64,
}

impl SchedulerCounters {
    /// Mean active-set size per committed step, or 0 before the first commit.
    pub fn mean_nact(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.particles_selected as f64 / self.steps as f64
        }
    }

    /// Counter increments between an earlier snapshot and this one.
    pub fn since(&self, earlier: &SchedulerCounters) -> SchedulerCounters {
        SchedulerCounters {
            steps: self.steps - earlier.steps,
            comparisons: self.comparisons - earlier.comparisons,
            pnodes_scanned: self.pnodes_scanned - earlier.pnodes_scanned,
            tnodes_traversed: self.tnodes_traversed - earlier.tnodes_traversed,
            elements_scanned: self.elements_scanned - earlier.elements_scanned,
            sync_events: self.sync_events - earlier.sync_events,
            particles_selected: self.particles_selected - earlier.particles_selected,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("no particles to schedule")]
    EmptySystem,
    #[error("particle {0} appears more than once")]
    DuplicateId(ParticleId),
    #[error("particle {0} has a non-positive active time")]
    NonPositiveTime(ParticleId),
    #[error("segment count must be at least 1")]
    BadSegments,
    #[error("particle {0} is not in the current active set")]
    NotActive(ParticleId),
    #[error("particle {id}: new active time {time} does not exceed min_t {min_t}")]
    NonMonotonicTime {
        id: ParticleId,
        time: ActiveTime,
        min_t: ActiveTime,
    },
    #[error("commit covers {got} of {expected} active particles")]
    IncompleteCommit { expected: usize, got: usize },
}

/// What each selection strategy implements. Backends see dense slot indices
/// `0..n`; the [`Scheduler`] maps those to caller ids and validates commits.
trait SelectionBackend {
    /// Writes the slots attaining the minimum into `out` and returns it.
    fn select(&mut self, out: &mut Vec<u32>, counters: &mut SchedulerCounters) -> ActiveTime;

    /// Moves the current active set to new times. `updates` holds exactly the
    /// slots last returned by `select`, each with a time above `min_t`.
    fn apply(
        &mut self,
        min_t: ActiveTime,
        updates: &[(u32, ActiveTime)],
        counters: &mut SchedulerCounters,
    );
}

enum Backend {
    Naive(NaiveScan),
    Segmented(SegmentedScan),
    Sorted(SortedArray),
    Bucket(BucketList),
}

impl Backend {
    fn as_dyn(&mut self) -> &mut dyn SelectionBackend {
        match self {
            Backend::Naive(b) => b,
            Backend::Segmented(b) => b,
            Backend::Sorted(b) => b,
            Backend::Bucket(b) => b,
        }
    }
}

/// Caller ids to dense slots. Ids that already form `0..n` are used as slots
/// directly.
#[derive(Debug, Clone)]
enum IdMap {
    Dense,
    Sparse {
        ids: Vec<ParticleId>,
        slots: HashMap<ParticleId, u32>,
    },
}

impl IdMap {
    fn slot(&self, id: ParticleId, n: usize) -> Option<u32> {
        match self {
            IdMap::Dense => (id.index() < n).then_some(id.0),
            IdMap::Sparse { slots, .. } => slots.get(&id).copied(),
        }
    }

    fn id(&self, slot: u32) -> ParticleId {
        match self {
            IdMap::Dense => ParticleId(slot),
            IdMap::Sparse { ids, .. } => ids[slot as usize],
        }
    }
}

#[derive(Debug, Clone)]
struct Selection {
    time: ActiveTime,
    slots: Vec<u32>,
}

/// An active-particle scheduler over one of the four backends.
///
/// Single owner: one peek/commit cycle at a time.
pub struct Scheduler {
    kind: BackendKind,
    segments: usize,
    n: usize,
    backend: Backend,
    ids: IdMap,
    counters: SchedulerCounters,
    selection: Option<Selection>,
    // Per-slot stamps: `epoch` marks membership of the current selection,
    // `epoch + 1` marks an id already seen in the commit being validated.
    marks: Vec<u32>,
    epoch: u32,
    scratch: Vec<(u32, ActiveTime)>,
}

impl fmt::Debug for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scheduler")
            .field("kind", &self.kind)
            .field("segments", &self.segments)
            .field("n", &self.n)
            .field("counters", &self.counters)
            .finish_non_exhaustive()
    }
}

impl Scheduler {
    /// Builds a scheduler over `(id, active time)` entries. `segments` only
    /// matters for [`BackendKind::Segmented`] but must be at least 1.
    pub fn build(
        entries: &[(ParticleId, ActiveTime)],
        kind: BackendKind,
        segments: usize,
    ) -> Result<Scheduler, SchedulerError> {
        if entries.is_empty() {
            return Err(SchedulerError::EmptySystem);
        }
        if segments == 0 {
            return Err(SchedulerError::BadSegments);
        }
        let n = entries.len();
        let (ids, times) = index_entries(entries)?;
        let backend = match kind {
            BackendKind::Naive => Backend::Naive(NaiveScan::new(times)),
            BackendKind::Segmented => Backend::Segmented(SegmentedScan::new(times, segments)),
            BackendKind::Sorted => Backend::Sorted(SortedArray::new(&times)),
            BackendKind::Bucket => Backend::Bucket(BucketList::new(&times)),
        };
        Ok(Scheduler {
            kind,
            segments,
            n,
            backend,
            ids,
            counters: SchedulerCounters::default(),
            selection: None,
            marks: vec![0; n],
            epoch: 1,
            scratch: Vec::new(),
        })
    }

    /// Replaces the managed set, e.g. after restoring a checkpoint. Counters
    /// keep accumulating. On error the scheduler is left as it was.
    pub fn rebuild(&mut self, entries: &[(ParticleId, ActiveTime)]) -> Result<(), SchedulerError> {
        let counters = self.counters;
        *self = Scheduler::build(entries, self.kind, self.segments)?;
        self.counters = counters;
        Ok(())
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Number of particles under management.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn counters(&self) -> SchedulerCounters {
        self.counters
    }

    /// The minimum active time and every particle attaining it. Each call does
    /// the backend's full selection work and counts it.
    pub fn peek_min(&mut self) -> ActiveSet {
        let mut slots = self
            .selection
            .take()
            .map(|s| s.slots)
            .unwrap_or_default();
        slots.clear();
        let time = self.backend.as_dyn().select(&mut slots, &mut self.counters);
        self.begin_epoch();
        for &slot in &slots {
            self.marks[slot as usize] = self.epoch;
        }
        let ids = slots.iter().map(|&s| self.ids.id(s)).collect();
        self.selection = Some(Selection { time, slots });
        ActiveSet { time, ids }
    }

    /// Hands the scheduler the next active time of every particle in the
    /// current active set. If no selection is pending, one is made first.
    pub fn commit_updates(
        &mut self,
        updates: &[(ParticleId, ActiveTime)],
    ) -> Result<(), SchedulerError> {
        if self.selection.is_none() {
            self.peek_min();
        }
        let (min_t, expected) = {
            let sel = self.selection.as_ref().expect("selection made above");
            (sel.time, sel.slots.len())
        };
        let active = self.epoch;
        let seen = self.epoch + 1;
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        let mut failure = None;
        for &(id, time) in updates {
            let Some(slot) = self.ids.slot(id, self.n) else {
                failure = Some(SchedulerError::NotActive(id));
                break;
            };
            let mark = self.marks[slot as usize];
            if mark == seen {
                failure = Some(SchedulerError::DuplicateId(id));
                break;
            }
            if mark != active {
                failure = Some(SchedulerError::NotActive(id));
                break;
            }
            if time <= min_t {
                failure = Some(SchedulerError::NonMonotonicTime { id, time, min_t });
                break;
            }
            self.marks[slot as usize] = seen;
            scratch.push((slot, time));
        }
        if failure.is_none() && scratch.len() != expected {
            failure = Some(SchedulerError::IncompleteCommit {
                expected,
                got: scratch.len(),
            });
        }
        if let Some(err) = failure {
            for &(slot, _) in &scratch {
                self.marks[slot as usize] = active;
            }
            self.scratch = scratch;
            return Err(err);
        }

        self.backend.as_dyn().apply(min_t, &scratch, &mut self.counters);
        self.counters.steps += 1;
        self.counters.particles_selected += scratch.len() as u64;
        self.selection = None;
        self.scratch = scratch;
        Ok(())
    }

    /// The bucket list behind a [`BackendKind::Bucket`] scheduler.
    pub fn bucket_list(&self) -> Option<&BucketList> {
        match &self.backend {
            Backend::Bucket(b) => Some(b),
            _ => None,
        }
    }

    /// The T-list as `(time, P-list)` pairs in list order, with caller ids.
    /// `None` for the other backends.
    pub fn t_list(&self) -> Option<Vec<(ActiveTime, Vec<ParticleId>)>> {
        let list = self.bucket_list()?;
        Some(
            list.t_list()
                .into_iter()
                .map(|(t, slots)| (t, slots.into_iter().map(|s| self.ids.id(s)).collect()))
                .collect(),
        )
    }

    fn begin_epoch(&mut self) {
        self.epoch = match self.epoch.checked_add(2) {
            Some(e) if e < u32::MAX => e,
            _ => {
                self.marks.iter_mut().for_each(|m| *m = 0);
                1
            }
        };
    }
}

fn index_entries(
    entries: &[(ParticleId, ActiveTime)],
) -> Result<(IdMap, Vec<ActiveTime>), SchedulerError> {
    let n = entries.len();
    for &(id, time) in entries {
        if time.ticks() == 0 {
            return Err(SchedulerError::NonPositiveTime(id));
        }
    }
    if entries.iter().all(|(id, _)| id.index() < n) {
        let mut times = vec![ActiveTime::ZERO; n];
        for &(id, time) in entries {
            let slot = &mut times[id.index()];
            if slot.ticks() != 0 {
                return Err(SchedulerError::DuplicateId(id));
            }
            *slot = time;
        }
        return Ok((IdMap::Dense, times));
    }
    let mut slots = HashMap::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for (slot, &(id, time)) in entries.iter().enumerate() {
        if slots.insert(id, slot as u32).is_some() {
            return Err(SchedulerError::DuplicateId(id));
        }
        ids.push(id);
        times.push(time);
    }
    Ok((IdMap::Sparse { ids, slots }, times))
}
