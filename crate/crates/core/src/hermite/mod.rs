//! A 4th-order Hermite integrator with individual block time steps.
//!
//! Each cycle asks a [`Scheduler`] for the active set, predicts every
//! particle to `min_t`, recomputes acceleration and jerk for the active
//! particles by direct summation, corrects them, picks their next step with
//! the Aarseth criterion, and hands the new active times back to the
//! scheduler. The physics never depends on which backend made the selection.

pub mod force;
mod plummer;
pub mod snapshot;
mod vec3;

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::scheduler::{BackendKind, ParticleId, Scheduler, SchedulerError};
use crate::timebase::{quantize_dt, ActiveTime, DtLevel, TickTime, TimeError};

pub use force::{aarseth_dt, acc_jerk, correct, initial_dt, predict, total_energy, HigherDerivatives};
pub use plummer::generate_plummer;
pub use vec3::Vec3;

/// Default accuracy parameter of the Aarseth criterion.
pub const DEFAULT_ETA: f64 = 0.01;
/// Default parameter of the starting-step estimate.
pub const DEFAULT_ETA_S: f64 = 0.01;
/// Default Plummer softening length.
pub const DEFAULT_SOFTENING: f64 = 0.01;

/// Force loops with at least this many pair interactions run on the rayon
/// pool.
const PARALLEL_PAIRS: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum HermiteError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("particles {0} and {1} coincide with zero softening")]
    SingularEncounter(usize, usize),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error("snapshot line {line}: {msg}")]
    Snapshot { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub mass: f64,
    pub pos: Vec3,
    pub vel: Vec3,
    pub acc: Vec3,
    pub jerk: Vec3,
    /// Time of the last correction.
    pub t: TickTime,
    pub dt: DtLevel,
    pub pos_pred: Vec3,
    pub vel_pred: Vec3,
}

impl Particle {
    pub fn new(mass: f64, pos: Vec3, vel: Vec3) -> Particle {
        Particle {
            mass,
            pos,
            vel,
            acc: Vec3::ZERO,
            jerk: Vec3::ZERO,
            t: TickTime::ZERO,
            dt: DtLevel::MAX_STEP,
            pos_pred: pos,
            vel_pred: vel,
        }
    }

    pub fn active_time(&self) -> ActiveTime {
        self.t + self.dt
    }
}

/// What one cycle did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub time: TickTime,
    pub n_active: usize,
    pub select_seconds: f64,
    pub force_seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Diagnostics {
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub steps: u64,
    pub sum_nact: u64,
    pub walltime_select: f64,
    pub walltime_force: f64,
}

impl Diagnostics {
    pub fn mean_nact(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.sum_nact as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct System {
    pub particles: Vec<Particle>,
    /// The most recent `min_t`.
    pub time: TickTime,
    pub softening: f64,
    pub eta: f64,
    pub eta_s: f64,
}

impl System {
    pub fn new(particles: Vec<Particle>, softening: f64) -> Result<System, HermiteError> {
        if particles.iter().any(|p| p.mass.is_nan() || p.mass < 0.0 || !p.pos.is_finite() || !p.vel.is_finite()) {
            return Err(HermiteError::BadParameter("masses must be non-negative and states finite".into()));
        }
        if softening.is_nan() || softening < 0.0 {
            return Err(HermiteError::BadParameter(format!("softening must be >= 0, got {softening}")));
        }
        Ok(System {
            particles,
            time: TickTime::ZERO,
            softening,
            eta: DEFAULT_ETA,
            eta_s: DEFAULT_ETA_S,
        })
    }

    pub fn with_accuracy(mut self, eta: f64, eta_s: f64) -> Result<System, HermiteError> {
        if !(eta > 0.0 && eta_s > 0.0) {
            return Err(HermiteError::BadParameter(format!("eta and eta_s must be positive, got {eta}, {eta_s}")));
        }
        self.eta = eta;
        self.eta_s = eta_s;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.particles.len()
    }

    fn eps2(&self) -> f64 {
        self.softening * self.softening
    }

    /// Synchronizes every particle at the system time, computes its force
    /// derivatives and its starting step.
    pub fn initialize(&mut self) -> Result<(), HermiteError> {
        if self.n() < 2 {
            return Err(HermiteError::BadParameter("integration needs at least 2 particles".into()));
        }
        let t = self.time;
        for p in &mut self.particles {
            p.t = t;
            p.pos_pred = p.pos;
            p.vel_pred = p.vel;
        }
        let forces = self.forces((0..self.n()).collect::<Vec<_>>().as_slice())?;
        for (p, (acc, jerk)) in self.particles.iter_mut().zip(forces) {
            p.acc = acc;
            p.jerk = jerk;
            p.dt = quantize_dt(initial_dt(acc, jerk, self.eta_s), t)?;
        }
        Ok(())
    }

    /// `(id, active time)` for every particle, for building a scheduler.
    pub fn scheduler_entries(&self) -> Vec<(ParticleId, ActiveTime)> {
        self.particles
            .iter()
            .enumerate()
            .map(|(i, p)| p.t.checked_add(p.dt).map(|t| (ParticleId(i as u32), t)))
            .collect::<Result<_, _>>()
            .expect("active times checked when steps are assigned")
    }

    pub fn build_scheduler(&self, kind: BackendKind, segments: usize) -> Result<Scheduler, HermiteError> {
        Ok(Scheduler::build(&self.scheduler_entries(), kind, segments)?)
    }

    /// Kinetic and potential energy of the current corrected state.
    pub fn energy(&self) -> (f64, f64) {
        total_energy(&self.particles, self.eps2())
    }

    pub fn is_synchronized(&self) -> bool {
        self.particles.iter().all(|p| p.t == self.time)
    }

    fn forces(&self, ids: &[usize]) -> Result<Vec<(Vec3, Vec3)>, HermiteError> {
        let eps2 = self.eps2();
        let ps = &self.particles;
        if ids.len() > 1 && ids.len() * ps.len() >= PARALLEL_PAIRS {
            ids.par_iter().map(|&i| acc_jerk(i, ps, eps2)).collect()
        } else {
            ids.iter().map(|&i| acc_jerk(i, ps, eps2)).collect()
        }
    }

    /// One block-step cycle. On error the system may be left mid-step.
    pub fn step(&mut self, sched: &mut Scheduler) -> Result<StepReport, HermiteError> {
        let started = Instant::now();
        let active = sched.peek_min();
        let mut select_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let min_t = active.time;
        if min_t <= self.time {
            return Err(HermiteError::BadParameter(format!(
                "scheduler returned {min_t}, not after system time {}",
                self.time
            )));
        }
        for p in &mut self.particles {
            (p.pos_pred, p.vel_pred) = predict(p, min_t);
        }
        let ids: Vec<usize> = active.ids.iter().map(|id| id.index()).collect();
        let forces = self.forces(&ids)?;
        let mut updates = Vec::with_capacity(ids.len());
        for (&i, (acc, jerk)) in ids.iter().zip(forces) {
            let p = &mut self.particles[i];
            debug_assert_eq!(p.active_time(), min_t);
            let derivs = correct(p, acc, jerk, p.dt);
            let raw = aarseth_dt(acc, jerk, derivs.snap, derivs.crackle, self.eta);
            // Grow by at most one level per step.
            let cap = p.dt.coarser().unwrap_or(p.dt).to_units();
            p.dt = quantize_dt(raw.min(cap), p.t)?;
            updates.push((ParticleId(i as u32), p.t.checked_add(p.dt)?));
        }
        let force_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        sched.commit_updates(&updates)?;
        select_seconds += started.elapsed().as_secs_f64();
        self.time = min_t;
        Ok(StepReport {
            time: min_t,
            n_active: ids.len(),
            select_seconds,
            force_seconds,
        })
    }

    /// Steps until the system time reaches `t_end`, which must be a whole
    /// multiple of the largest step; every particle is then synchronized at
    /// `t_end`.
    pub fn run(&mut self, sched: &mut Scheduler, t_end: TickTime) -> Result<Diagnostics, HermiteError> {
        if t_end < self.time || !t_end.is_commensurate(DtLevel::MAX_STEP) {
            return Err(HermiteError::BadParameter(format!(
                "t_end {t_end} must be a multiple of {} not before {}",
                DtLevel::MAX_STEP.to_units(),
                self.time
            )));
        }
        let mut diag = Diagnostics::default();
        while self.time < t_end {
            let report = self.step(sched)?;
            debug_assert!(report.time <= t_end);
            diag.steps += 1;
            diag.sum_nact += report.n_active as u64;
            diag.walltime_select += report.select_seconds;
            diag.walltime_force += report.force_seconds;
        }
        let (kinetic, potential) = self.energy();
        diag.kinetic = kinetic;
        diag.potential = potential;
        diag.energy = kinetic + potential;
        Ok(diag)
    }
}
