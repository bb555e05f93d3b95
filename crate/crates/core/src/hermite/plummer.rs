use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HermiteError, Particle, System, Vec3};

/// Largest sampled radius in Plummer scale lengths; the rare tail beyond it is
/// redrawn.
const R_CUT: f64 = 22.8;

fn random_direction(rng: &mut impl Rng, len: f64) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z) * len
}

/// Plummer sphere in standard N-body units (G = 1, M = 1, E = -1/4).
///
/// Radii come from inverting the cumulative mass profile, speeds from von
/// Neumann rejection on the isotropic distribution function
/// `g(q) = q^2 (1 - q^2)^(7/2)`. The result is moved to its centre-of-mass
/// frame.
///
/// With `central_mass > 0`, particle 0 sits at rest at the origin with that
/// mass and the other `n - 1` share the remainder equally.
pub fn generate_plummer(
    n: usize,
    seed: u64,
    central_mass: f64,
) -> Result<Vec<Particle>, HermiteError> {
    if n < 2 {
        return Err(HermiteError::BadParameter(format!("need at least 2 particles, got {n}")));
    }
    if !(0.0..1.0).contains(&central_mass) {
        return Err(HermiteError::BadParameter(format!(
            "central mass ratio must lie in [0, 1), got {central_mass}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos_scale = 3.0 * std::f64::consts::PI / 16.0;
    let vel_scale = 1.0 / pos_scale.sqrt();

    let field = if central_mass > 0.0 { n - 1 } else { n };
    let field_mass = (1.0 - central_mass) / field as f64;
    let mut particles = Vec::with_capacity(n);
    if central_mass > 0.0 {
        particles.push(Particle::new(central_mass, Vec3::ZERO, Vec3::ZERO));
    }
    while particles.len() < n {
        let r = loop {
            let x: f64 = rng.random();
            if x == 0.0 {
                continue;
            }
            let r = (x.powf(-2.0 / 3.0) - 1.0).powf(-0.5);
            if r < R_CUT {
                break r;
            }
        };
        let q = loop {
            let q: f64 = rng.random();
            let y: f64 = rng.random_range(0.0..0.1);
            if y < q * q * (1.0 - q * q).powf(3.5) {
                break q;
            }
        };
        let speed = q * std::f64::consts::SQRT_2 * (1.0 + r * r).powf(-0.25);
        let pos = random_direction(&mut rng, r * pos_scale);
        let vel = random_direction(&mut rng, speed * vel_scale);
        particles.push(Particle::new(field_mass, pos, vel));
    }

    let first_field = n - field;
    let field_particles = &mut particles[first_field..];
    let total: f64 = field_particles.iter().map(|p| p.mass).sum();
    let (mut com, mut cov) = (Vec3::ZERO, Vec3::ZERO);
    for p in field_particles.iter() {
        com += p.pos * p.mass;
        cov += p.vel * p.mass;
    }
    let (com, cov) = (com / total, cov / total);
    for p in field_particles.iter_mut() {
        p.pos -= com;
        p.vel -= cov;
    }
    Ok(particles)
}

impl System {
    /// Moves `companion` onto a circular orbit of separation `a_bin` around
    /// `primary`, accounting for softening. The primary and every other
    /// particle stay where they are.
    pub fn inject_binary(
        &mut self,
        a_bin: f64,
        primary: usize,
        companion: usize,
    ) -> Result<(), HermiteError> {
        if !(a_bin > 0.0 && a_bin.is_finite()) {
            return Err(HermiteError::BadParameter(format!("binary separation must be positive, got {a_bin}")));
        }
        if primary == companion {
            return Err(HermiteError::BadParameter("binary members must differ".into()));
        }
        let n = self.particles.len();
        if primary >= n || companion >= n {
            return Err(HermiteError::BadParameter(format!("binary member out of range 0..{n}")));
        }
        let (p1_pos, p1_vel, m1) = {
            let p = &self.particles[primary];
            (p.pos, p.vel, p.mass)
        };
        let m2 = self.particles[companion].mass;
        let eps2 = self.softening * self.softening;
        let r2 = a_bin * a_bin;
        let v_rel = ((m1 + m2) * r2 / (r2 + eps2).powf(1.5)).sqrt();
        let p2 = &mut self.particles[companion];
        p2.pos = p1_pos + Vec3::new(a_bin, 0.0, 0.0);
        p2.vel = p1_vel + Vec3::new(0.0, v_rel, 0.0);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::force::total_energy;

    fn momentum(ps: &[Particle]) -> Vec3 {
        ps.iter().fold(Vec3::ZERO, |acc, p| acc + p.vel * p.mass)
    }

    #[test]
    fn standard_units_and_virial_equilibrium() {
        let ps = generate_plummer(1024, 42, 0.0).unwrap();
        assert!(momentum(&ps).norm() < 1e-12);
        let mass: f64 = ps.iter().map(|p| p.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let (ke, pe) = total_energy(&ps, 0.0);
        let q = -2.0 * ke / pe;
        assert!(q > 0.9 && q < 1.1, "virial ratio {q}");
    }

    #[test]
    fn energy_near_minus_quarter() {
        let ps = generate_plummer(4096, 9, 0.0).unwrap();
        let (ke, pe) = total_energy(&ps, 0.0);
        assert!(ke >= 0.0);
        assert!((ke + pe + 0.25).abs() < 0.05, "E = {}", ke + pe);
    }

    #[test]
    fn central_mass() {
        let ps = generate_plummer(1024, 1, 0.01).unwrap();
        assert_eq!(ps[0].mass, 0.01);
        assert_eq!(ps[0].pos, Vec3::ZERO);
        assert_eq!(ps[0].vel, Vec3::ZERO);
        let rest: f64 = ps[1..].iter().map(|p| p.mass).sum();
        assert!((rest - 0.99).abs() < 1e-12);
        assert!(momentum(&ps).norm() < 1e-12);
    }

    #[test]
    fn two_bodies_and_bad_parameters() {
        let ps = generate_plummer(2, 5, 0.0).unwrap();
        let (ke, pe) = total_energy(&ps, 0.0);
        assert!((ke + pe).is_finite());
        assert!(generate_plummer(1, 5, 0.0).is_err());
        assert!(generate_plummer(10, 5, 1.0).is_err());
        assert!(generate_plummer(10, 5, -0.1).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_plummer(64, 3, 0.01).unwrap();
        let b = generate_plummer(64, 3, 0.01).unwrap();
        let c = generate_plummer(64, 4, 0.01).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.pos == y.pos && x.vel == y.vel));
        assert!(a.iter().zip(&c).any(|(x, y)| x.pos != y.pos));
    }
}
