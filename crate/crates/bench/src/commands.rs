use std::fs::{File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hitsel::hermite::snapshot::{read_snapshot, write_snapshot};
use hitsel::hermite::{generate_plummer, System};
use hitsel::timebase::{quantize_dt, TickTime};
use hitsel::{BackendKind, ParticleId, Scheduler};

use crate::config::{RunConfig, Scenario};
use crate::row::{BenchRow, CSV_HEADER};
use crate::BenchError;

/// Levels drawn by the random scenario.
const RANDOM_LEVELS: std::ops::RangeInclusive<i32> = 3..=14;

/// The initial system of a good or bad case run, not yet initialized.
pub fn build_system(cfg: &RunConfig) -> Result<System, BenchError> {
    cfg.validate()?;
    let mut sys = match &cfg.input {
        Some(path) => {
            let mut sys = read_snapshot(BufReader::new(File::open(path)?))?;
            sys.softening = cfg.softening;
            sys
        }
        None => System::new(generate_plummer(cfg.n, cfg.seed, cfg.central)?, cfg.softening)?,
    };
    sys = sys.with_accuracy(cfg.eta, cfg.eta_s)?;
    if let Some(a) = cfg.binary_a {
        sys.inject_binary(a, 0, 1)?;
    }
    Ok(sys)
}

/// Writes the configured initial conditions as a snapshot.
pub fn cmd_generate<W: Write>(cfg: &RunConfig, out: W) -> Result<(), BenchError> {
    let sys = build_system(cfg)?;
    write_snapshot(&sys, out)?;
    Ok(())
}

/// One full run under the configured backend.
pub fn run_once(cfg: &RunConfig) -> Result<BenchRow, BenchError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Random => run_random(cfg),
        Scenario::Good | Scenario::Bad => run_physics(cfg),
    }
}

fn run_physics(cfg: &RunConfig) -> Result<BenchRow, BenchError> {
    let mut sys = build_system(cfg)?;
    sys.initialize()?;
    let (k0, p0) = sys.energy();
    let e0 = k0 + p0;
    let mut sched = sys.build_scheduler(cfg.backend, cfg.segments)?;
    let diag = sys.run(&mut sched, cfg.t_end_ticks()?)?;
    let drift = if e0 != 0.0 { (diag.energy - e0) / e0 } else { 0.0 };
    Ok(BenchRow::new(
        cfg,
        sys.n(),
        sched.counters(),
        diag.walltime_select,
        diag.walltime_force,
        drift,
    ))
}

fn run_random(cfg: &RunConfig) -> Result<BenchRow, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = |now: TickTime| -> Result<TickTime, BenchError> {
        let raw = 2f64.powi(-rng.random_range(RANDOM_LEVELS));
        Ok(now.checked_add(quantize_dt(raw, now)?)?)
    };
    let entries = (0..cfg.n)
        .map(|i| Ok((ParticleId(i as u32), draw(TickTime::ZERO)?)))
        .collect::<Result<Vec<_>, BenchError>>()?;
    let mut sched = Scheduler::build(&entries, cfg.backend, cfg.segments)?;
    let t_end = cfg.t_end_ticks()?;
    let mut select_seconds = 0.0;
    let mut updates = Vec::new();
    // Every drawn step divides t_end, so the system lands on it exactly.
    let mut now = TickTime::ZERO;
    while now < t_end {
        let started = Instant::now();
        let active = sched.peek_min();
        select_seconds += started.elapsed().as_secs_f64();
        debug_assert!(active.time <= t_end);
        now = active.time;
        updates.clear();
        for &id in &active.ids {
            updates.push((id, draw(active.time)?));
        }
        let started = Instant::now();
        sched.commit_updates(&updates)?;
        select_seconds += started.elapsed().as_secs_f64();
    }
    Ok(BenchRow::new(cfg, cfg.n, sched.counters(), select_seconds, 0.0, 0.0))
}

/// Writes `#` config lines, the header and `rows`.
pub fn write_table<W: Write>(mut out: W, cfg: &RunConfig, rows: &[BenchRow]) -> io::Result<()> {
    for line in cfg.comment_lines() {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()
}

/// Appends one row to `path`, starting the file with config lines and the
/// header if it is new or empty.
pub fn append_row(path: &Path, cfg: &RunConfig, row: &BenchRow) -> io::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = BufWriter::new(file);
    if fresh {
        write_table(&mut out, cfg, std::slice::from_ref(row))
    } else {
        writeln!(out, "{}", row.to_csv())?;
        out.flush()
    }
}

/// Runs once and records the row: appended to `cfg.output` when set,
/// otherwise written to `stdout` with its header.
pub fn cmd_run<W: Write>(cfg: &RunConfig, stdout: W) -> Result<BenchRow, BenchError> {
    let row = run_once(cfg)?;
    match &cfg.output {
        Some(path) => append_row(path, cfg, &row)?,
        None => write_table(stdout, cfg, std::slice::from_ref(&row))?,
    }
    Ok(row)
}

/// One row per backend; segmented gets one row per entry of `segments`, the
/// others a single row with one segment.
pub fn cmd_compare(
    cfg: &RunConfig,
    backends: &[BackendKind],
    segments: &[usize],
) -> Result<Vec<BenchRow>, BenchError> {
    if backends.is_empty() {
        return Err(BenchError::BadParameter("no backends to compare".into()));
    }
    let mut rows = Vec::new();
    for &backend in backends {
        if backend == BackendKind::Segmented {
            if segments.is_empty() {
                return Err(BenchError::BadParameter("segmented backend needs --segments".into()));
            }
            for &p in segments {
                rows.push(run_once(&cfg.with_backend(backend, p))?);
            }
        } else {
            rows.push(run_once(&cfg.with_backend(backend, 1))?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub steps: u64,
    pub mean_nact: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln mean_nact` against `ln n`.
    pub exponent: f64,
}

impl ScalingTable {
    pub fn write_csv<W: Write>(&self, mut out: W, cfg: &RunConfig) -> io::Result<()> {
        for line in cfg.comment_lines().iter().filter(|l| !l.starts_with("# n=")) {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "# fitted_exponent={}", self.exponent)?;
        writeln!(out, "n,steps,mean_nact,efficiency")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.n, p.steps, p.mean_nact, p.mean_nact / p.n as f64)?;
        }
        out.flush()
    }
}

/// Good-case runs at each `n`, with the power-law exponent of mean active
/// count against particle number.
pub fn cmd_scaling(cfg: &RunConfig, n_list: &[usize]) -> Result<ScalingTable, BenchError> {
    if n_list.len() < 3 {
        return Err(BenchError::BadParameter(format!(
            "scaling needs at least 3 particle numbers, got {}",
            n_list.len()
        )));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let row = run_once(&RunConfig { n, ..cfg.clone() })?;
        points.push(ScalingPoint {
            n,
            steps: row.steps,
            mean_nact: row.mean_nact,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|p| ((p.n as f64).ln(), p.mean_nact.ln()))
        .unzip();
    let exponent = least_squares_slope(&xs, &ys)
        .ok_or_else(|| BenchError::BadParameter("particle numbers must not all be equal".into()))?;
    Ok(ScalingTable { points, exponent })
}

/// Ordinary least-squares slope, or `None` when the `xs` have no spread.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = [1024.0f64, 2048.0, 4096.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1024.0f64, 2048.0, 4096.0].iter().map(|x| 3.0 * x.powf(0.613)).map(f64::ln).collect();
        assert!((least_squares_slope(&xs, &ys).unwrap() - 0.613).abs() < 1e-12);
        assert_eq!(least_squares_slope(&[1.0, 1.0], &[2.0, 3.0]), None);
    }

    #[test]
    fn scaling_needs_three_sizes() {
        let cfg = RunConfig::good(64);
        assert!(matches!(cmd_scaling(&cfg, &[1024]), Err(BenchError::BadParameter(_))));
    }

    #[test]
    fn random_scenario_reaches_t_end() {
        let cfg = RunConfig {
            scenario: Scenario::Random,
            n: 500,
            t_end: 0.125,
            ..RunConfig::default()
        };
        let rows = cmd_compare(&cfg, &BackendKind::ALL, &[1, 3]).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert_eq!(r.steps, rows[0].steps);
            assert_eq!(r.mean_nact, rows[0].mean_nact);
            assert_eq!(r.force_seconds, 0.0);
        }
        assert!(rows[0].steps > 0 && rows[0].steps <= 1 << 11);
        assert_eq!(rows[0].elements_scanned, 2 * 500 * rows[0].steps);
    }
}
