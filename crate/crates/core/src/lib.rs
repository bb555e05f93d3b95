//! Active-particle selection for Hermite individual block time step N-body
//! integration.
//!
//! * [`timebase`]: exact integer block times and power-of-two steps.
//! * [`scheduler`]: four selection backends behind one contract, including
//!   the two-level time-bucket list.
//! * [`hermite`]: a 4th-order Hermite integrator with Plummer initial
//!   conditions that drives the schedulers with realistic workloads.

pub mod hermite;
pub mod scheduler;
pub mod timebase;

pub use scheduler::{ActiveSet, BackendKind, ParticleId, Scheduler, SchedulerCounters, SchedulerError};
pub use timebase::{ActiveTime, DtLevel, TickTime, TimeError};
pub use hermite::{Diagnostics, HermiteError, Particle, System, Vec3};
