use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hitsel::timebase::{DtLevel, TickTime};
use hitsel::BackendKind;

use crate::BenchError;

/// Which workload drives the scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Plummer sphere with a light central mass.
    Good,
    /// The good case plus a tight binary around the central mass.
    Bad,
    /// No physics: particles draw random block steps.
    Random,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Good => "good",
            Scenario::Bad => "bad",
            Scenario::Random => "random",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "good" => Ok(Scenario::Good),
            "bad" => Ok(Scenario::Bad),
            "random" => Ok(Scenario::Random),
            _ => Err(format!("unknown scenario {s:?} (expected good, bad or random)")),
        }
    }
}

pub const DEFAULT_SOFTENING: f64 = 1e-3;
pub const DEFAULT_CENTRAL_MASS: f64 = 0.01;
pub const DEFAULT_BINARY_A: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub seed: u64,
    /// Integration span in time units; a multiple of the largest block step.
    pub t_end: f64,
    pub eta: f64,
    pub eta_s: f64,
    pub softening: f64,
    pub central: f64,
    pub binary_a: Option<f64>,
    pub backend: BackendKind,
    pub segments: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Good,
            n: 1024,
            seed: 42,
            t_end: 0.25,
            eta: hitsel::hermite::DEFAULT_ETA,
            eta_s: hitsel::hermite::DEFAULT_ETA_S,
            softening: DEFAULT_SOFTENING,
            central: DEFAULT_CENTRAL_MASS,
            binary_a: None,
            backend: BackendKind::Bucket,
            segments: 1,
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn good(n: usize) -> RunConfig {
        RunConfig { n, ..RunConfig::default() }
    }

    pub fn bad(n: usize) -> RunConfig {
        RunConfig {
            scenario: Scenario::Bad,
            binary_a: Some(DEFAULT_BINARY_A),
            ..RunConfig::good(n)
        }
    }

    pub fn with_backend(&self, backend: BackendKind, segments: usize) -> RunConfig {
        RunConfig {
            backend,
            segments,
            ..self.clone()
        }
    }

    pub fn t_end_ticks(&self) -> Result<TickTime, BenchError> {
        let t = TickTime::from_units(self.t_end)
            .map_err(|_| BenchError::BadParameter(format!("t_end {} is not on the tick grid", self.t_end)))?;
        if !t.is_commensurate(DtLevel::MAX_STEP) {
            return Err(BenchError::BadParameter(format!(
                "t_end {} must be a multiple of {}",
                self.t_end,
                DtLevel::MAX_STEP.to_units()
            )));
        }
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::BadParameter(msg));
        if self.n < 2 && self.input.is_none() {
            return bad(format!("need at least 2 particles, got {}", self.n));
        }
        self.t_end_ticks()?;
        if !(self.eta > 0.0 && self.eta_s > 0.0) {
            return bad(format!("eta and eta_s must be positive, got {} and {}", self.eta, self.eta_s));
        }
        if self.softening.is_nan() || self.softening < 0.0 {
            return bad(format!("softening must be >= 0, got {}", self.softening));
        }
        if !(0.0..1.0).contains(&self.central) {
            return bad(format!("central mass ratio must lie in [0, 1), got {}", self.central));
        }
        if let Some(a) = self.binary_a {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("binary separation must be positive, got {a}"));
            }
        }
        if self.scenario == Scenario::Bad && self.binary_a.is_none() {
            return bad("the bad case needs --binary-a".into());
        }
        if self.segments == 0 {
            return bad("segments must be at least 1".into());
        }
        Ok(())
    }

    /// `#`-prefixed `key=value` lines recording the configuration.
    pub fn comment_lines(&self) -> Vec<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("-".to_string(), |p| p.display().to_string());
        vec![
            format!("# scenario={}", self.scenario),
            format!("# n={}", self.n),
            format!("# seed={}", self.seed),
            format!("# t_end={}", self.t_end),
            format!("# eta={}", self.eta),
            format!("# eta_s={}", self.eta_s),
            format!("# eps={}", self.softening),
            format!("# central={}", self.central),
            format!("# binary_a={}", self.binary_a.map_or("-".to_string(), |a| a.to_string())),
            format!("# backend={}", self.backend),
            format!("# segments={}", self.segments),
            format!("# in={}", path(&self.input)),
        ]
    }
}
