//! Plain-text snapshots.
//!
//! ```text
//! # n=<N> time=<t> eps=<softening>
//! <id> <mass> <x> <y> <z> <vx> <vy> <vz>
//! ```
//!
//! Reals are written with 17 significant digits so a snapshot reads back
//! bit-for-bit.

use std::io::{BufRead, Write};

use super::{HermiteError, Particle, System, Vec3};
use crate::timebase::TickTime;

pub fn write_snapshot<W: Write>(sys: &System, mut out: W) -> Result<(), HermiteError> {
    writeln!(
        out,
        "# n={} time={:.16e} eps={:.16e}",
        sys.n(),
        sys.time.to_units(),
        sys.softening
    )?;
    for (id, p) in sys.particles.iter().enumerate() {
        write!(out, "{id} {:.16e}", p.mass)?;
        for c in p.pos.0.iter().chain(&p.vel.0) {
            write!(out, " {c:.16e}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> HermiteError {
    HermiteError::Snapshot { line, msg: msg.into() }
}

fn header_field<'a>(header: &'a str, key: &str, line: usize) -> Result<&'a str, HermiteError> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| bad(line, format!("header lacks {key}=")))
}

/// Reads a snapshot into a [`System`] with default accuracy parameters. Ids
/// must run `0..n` in order.
pub fn read_snapshot<R: BufRead>(input: R) -> Result<System, HermiteError> {
    let mut lines = input.lines().enumerate();
    let (n, time, eps) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(bad(1, "missing header"));
        };
        let line = line?;
        let Some(header) = line.trim().strip_prefix('#') else {
            return Err(bad(i + 1, "expected '# n=... time=... eps=...' header"));
        };
        if header.trim().is_empty() {
            continue;
        }
        let n: usize = header_field(header, "n", i + 1)?
            .parse()
            .map_err(|e| bad(i + 1, format!("n: {e}")))?;
        let time: f64 = header_field(header, "time", i + 1)?
            .parse()
            .map_err(|e| bad(i + 1, format!("time: {e}")))?;
        let eps: f64 = header_field(header, "eps", i + 1)?
            .parse()
            .map_err(|e| bad(i + 1, format!("eps: {e}")))?;
        break (n, time, eps);
    };

    let mut particles = Vec::with_capacity(n);
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(bad(i + 1, format!("expected 8 fields, found {}", fields.len())));
        }
        let id: usize = fields[0].parse().map_err(|e| bad(i + 1, format!("id: {e}")))?;
        if id != particles.len() {
            return Err(bad(i + 1, format!("expected id {}, found {id}", particles.len())));
        }
        let mut v = [0.0; 7];
        for (slot, field) in v.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().map_err(|e| bad(i + 1, format!("{field:?}: {e}")))?;
        }
        particles.push(Particle::new(
            v[0],
            Vec3::new(v[1], v[2], v[3]),
            Vec3::new(v[4], v[5], v[6]),
        ));
    }
    if particles.len() != n {
        return Err(bad(0, format!("header says n={n}, found {} particles", particles.len())));
    }
    let mut sys = System::new(particles, eps)?;
    sys.time = TickTime::from_units(time)?;
    Ok(sys)
}
