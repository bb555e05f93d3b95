//! The pieces of one Hermite cycle: Taylor prediction, softened direct
//! summation of acceleration and jerk, the 4th-order corrector, and the
//! Aarseth step criterion.

use super::{HermiteError, Particle, Vec3};
use crate::timebase::{DtLevel, TickTime};

/// Predicted position and velocity of `p` at `t >= p.t`.
pub fn predict(p: &Particle, t: TickTime) -> (Vec3, Vec3) {
    predict_by(p, t.units_since(p.t))
}

pub(crate) fn predict_by(p: &Particle, dt: f64) -> (Vec3, Vec3) {
    let dt2 = dt * dt / 2.0;
    let dt3 = dt2 * dt / 3.0;
    let pos = p.pos + p.vel * dt + p.acc * dt2 + p.jerk * dt3;
    let vel = p.vel + p.acc * dt + p.jerk * dt2;
    (pos, vel)
}

/// Acceleration and jerk on particle `i` from every other particle, using the
/// predicted positions and velocities in `particles`.
///
/// `a_i = sum_j m_j r_ij / (r^2 + eps^2)^(3/2)`, and the jerk is its exact
/// time derivative.
pub fn acc_jerk(i: usize, particles: &[Particle], eps2: f64) -> Result<(Vec3, Vec3), HermiteError> {
    let pi = &particles[i];
    let (xi, vi) = (pi.pos_pred, pi.vel_pred);
    let mut acc = Vec3::ZERO;
    let mut jerk = Vec3::ZERO;
    for (j, pj) in particles.iter().enumerate() {
        if j == i {
            continue;
        }
        let dr = pj.pos_pred - xi;
        let dv = pj.vel_pred - vi;
        let r2 = dr.norm2() + eps2;
        if r2 == 0.0 {
            return Err(HermiteError::SingularEncounter(i, j));
        }
        let inv_r = 1.0 / r2.sqrt();
        let inv_r2 = inv_r * inv_r;
        let m_inv_r3 = pj.mass * inv_r * inv_r2;
        let rv = 3.0 * dr.dot(dv) * inv_r2;
        acc += dr * m_inv_r3;
        jerk += (dv - dr * rv) * m_inv_r3;
    }
    Ok((acc, jerk))
}

/// Force derivatives reconstructed by the corrector, valid at the end of the
/// step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HigherDerivatives {
    pub snap: Vec3,
    pub crackle: Vec3,
}

/// Hermite corrector: given the new acceleration and jerk `(acc1, jerk1)` at
/// `p.t + dt` (evaluated on the predicted state), fits snap and crackle from
/// the old and new pairs, corrects position and velocity, and advances `p`.
pub fn correct(p: &mut Particle, acc1: Vec3, jerk1: Vec3, dt: DtLevel) -> HigherDerivatives {
    let h = dt.to_units();
    let (pos_p, vel_p) = predict_by(p, h);
    let (acc0, jerk0) = (p.acc, p.jerk);
    let da = acc0 - acc1;
    let snap0 = (da * -6.0 - (jerk0 * 4.0 + jerk1 * 2.0) * h) / (h * h);
    let crackle = (da * 12.0 + (jerk0 + jerk1) * (6.0 * h)) / (h * h * h);

    let h2 = h * h;
    let h3 = h2 * h;
    let h4 = h3 * h;
    p.pos = pos_p + snap0 * (h4 / 24.0) + crackle * (h4 * h / 120.0);
    p.vel = vel_p + snap0 * (h3 / 6.0) + crackle * (h4 / 24.0);
    p.acc = acc1;
    p.jerk = jerk1;
    p.t = p.t + dt;
    HigherDerivatives {
        snap: snap0 + crackle * h,
        crackle,
    }
}

/// The Aarseth criterion
/// `dt = sqrt(eta (|a||s| + |j|^2) / (|j||c| + |s|^2))`, falling back to the
/// largest step when the denominator vanishes.
pub fn aarseth_dt(acc: Vec3, jerk: Vec3, snap: Vec3, crackle: Vec3, eta: f64) -> f64 {
    let (a, j, s, c) = (acc.norm(), jerk.norm(), snap.norm(), crackle.norm());
    let den = j * c + s * s;
    if den == 0.0 {
        return DtLevel::MAX_STEP.to_units();
    }
    (eta * (a * s + j * j) / den).sqrt()
}

/// Starting step `eta_s |a| / |j|`, or the largest step for zero jerk.
pub fn initial_dt(acc: Vec3, jerk: Vec3, eta_s: f64) -> f64 {
    let j = jerk.norm();
    if j == 0.0 {
        DtLevel::MAX_STEP.to_units()
    } else {
        eta_s * acc.norm() / j
    }
}

/// Kinetic and potential energy of the (synchronized) current state.
pub fn total_energy(particles: &[Particle], eps2: f64) -> (f64, f64) {
    let kinetic = particles
        .iter()
        .map(|p| 0.5 * p.mass * p.vel.norm2())
        .sum();
    let mut potential = 0.0;
    for (i, pi) in particles.iter().enumerate() {
        let mut row = 0.0;
        for pj in &particles[i + 1..] {
            row += pj.mass / ((pj.pos - pi.pos).norm2() + eps2).sqrt();
        }
        potential -= pi.mass * row;
    }
    (kinetic, potential)
}
