use std::fmt::Write as _;

use hitsel::SchedulerCounters;

use crate::config::{RunConfig, Scenario};

/// One benchmarked run. Column order in the CSV follows field order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub backend: hitsel::BackendKind,
    pub n: usize,
    pub segments: usize,
    pub steps: u64,
    pub mean_nact: f64,
    pub elements_scanned: u64,
    pub pnodes_scanned: u64,
    pub tnodes_traversed: u64,
    pub comparisons: u64,
    pub sync_events: u64,
    pub select_seconds: f64,
    pub force_seconds: f64,
    pub energy_rel_drift: f64,
}

pub const CSV_HEADER: &str = "scenario,backend,n,segments,steps,mean_nact,elements_scanned,\
pnodes_scanned,tnodes_traversed,comparisons,sync_events,select_seconds,force_seconds,energy_rel_drift";

/// Columns that must not change between identical runs.
pub const COUNTER_COLUMNS: std::ops::Range<usize> = 0..11;

impl BenchRow {
    pub(crate) fn new(
        cfg: &RunConfig,
        n: usize,
        counters: SchedulerCounters,
        select_seconds: f64,
        force_seconds: f64,
        energy_rel_drift: f64,
    ) -> BenchRow {
        BenchRow {
            scenario: cfg.scenario,
            backend: cfg.backend,
            n,
            segments: cfg.segments,
            steps: counters.steps,
            mean_nact: counters.mean_nact(),
            elements_scanned: counters.elements_scanned,
            pnodes_scanned: counters.pnodes_scanned,
            tnodes_traversed: counters.tnodes_traversed,
            comparisons: counters.comparisons,
            sync_events: counters.sync_events,
            select_seconds,
            force_seconds,
            energy_rel_drift,
        }
    }

    pub fn particles_selected(&self) -> u64 {
        (self.mean_nact * self.steps as f64).round() as u64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{:e}",
            self.scenario,
            self.backend,
            self.n,
            self.segments,
            self.steps,
            self.mean_nact,
            self.elements_scanned,
            self.pnodes_scanned,
            self.tnodes_traversed,
            self.comparisons,
            self.sync_events,
            self.select_seconds,
            self.force_seconds,
            self.energy_rel_drift,
        )
        .expect("writing to a String");
        s
    }
}
