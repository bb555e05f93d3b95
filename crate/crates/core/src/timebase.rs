//! Exact block-time arithmetic.
//!
//! Simulation time is an unsigned count of ticks, with one N-body time unit
//! equal to 2^52 ticks. Individual steps are powers of two,
//! `dt = 2^-level` time units with `level` in `3..=52`, so "same active time"
//! is integer equality and every block boundary is exact.

use std::fmt;
use std::ops::Add;

use thiserror::Error;

/// log2 of the number of ticks in one time unit.
pub const TICK_BITS: u32 = 52;

/// Ticks in one N-body time unit.
pub const TICKS_PER_UNIT: u64 = 1 << TICK_BITS;

/// Largest representable tick count. Leaves room for `t + dt` in runs of up to
/// 2048 time units.
pub const MAX_TICKS: u64 = 1 << 63;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum TimeError {
    #[error("time step underflow: no commensurate step at or below level {max} for dt={dt_raw:e} at t={at}", max = DtLevel::MIN_STEP.level())]
    TimestepUnderflow { dt_raw: f64, at: TickTime },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("time {0} time units is not representable on the tick grid")]
    OutOfRange(f64),
    #[error("step level {0} outside 3..=52")]
    BadLevel(u32),
    #[error("tick count overflow")]
    Overflow,
}

/// A point on the tick grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TickTime(u64);

impl TickTime {
    pub const ZERO: TickTime = TickTime(0);

    pub fn from_ticks(ticks: u64) -> Result<Self, TimeError> {
        if ticks > MAX_TICKS {
            return Err(TimeError::Overflow);
        }
        Ok(TickTime(ticks))
    }

    /// Converts a time in N-body units to ticks. Fails unless the value lands
    /// exactly on the grid.
    pub fn from_units(t: f64) -> Result<Self, TimeError> {
        let scaled = t * TICKS_PER_UNIT as f64;
        if !scaled.is_finite() || scaled < 0.0 || scaled > MAX_TICKS as f64 || scaled.fract() != 0.0
        {
            return Err(TimeError::OutOfRange(t));
        }
        Ok(TickTime(scaled as u64))
    }

    /// The exact dyadic value `num / 2^log2_den` time units, e.g. `(1, 2)` is 1/4.
    pub fn dyadic(num: u64, log2_den: u32) -> Result<Self, TimeError> {
        if log2_den > TICK_BITS {
            return Err(TimeError::OutOfRange(num as f64 / 2f64.powi(log2_den as i32)));
        }
        let ticks = num
            .checked_mul(1 << (TICK_BITS - log2_den))
            .ok_or(TimeError::Overflow)?;
        TickTime::from_ticks(ticks)
    }

    pub const fn ticks(self) -> u64 {
        self.0
    }

    /// Exact for every representable tick count below 2^53.
    pub fn to_units(self) -> f64 {
        ticks_to_units(self)
    }

    pub fn checked_add(self, dt: DtLevel) -> Result<TickTime, TimeError> {
        self.0
            .checked_add(dt.ticks())
            .ok_or(TimeError::Overflow)
            .and_then(TickTime::from_ticks)
    }

    /// Whether this time lies on a block boundary of the given step.
    pub fn is_commensurate(self, dt: DtLevel) -> bool {
        self.0 & (dt.ticks() - 1) == 0
    }

    /// `self - earlier` in time units.
    pub fn units_since(self, earlier: TickTime) -> f64 {
        debug_assert!(self >= earlier);
        (self.0 - earlier.0) as f64 / TICKS_PER_UNIT as f64
    }
}

impl fmt::Display for TickTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_units())
    }
}

impl Add<DtLevel> for TickTime {
    type Output = TickTime;

    /// Panics on overflow past [`MAX_TICKS`]; use [`TickTime::checked_add`]
    /// where that can happen.
    fn add(self, dt: DtLevel) -> TickTime {
        self.checked_add(dt).expect("tick overflow")
    }
}

/// An active time `t_i + dt_i`: the moment a particle next needs correcting.
pub type ActiveTime = TickTime;

/// Power-of-two step `2^-level` time units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DtLevel(u8);

impl DtLevel {
    /// The largest step, 1/8 time unit.
    pub const MAX_STEP: DtLevel = DtLevel(3);
    /// The smallest step, one tick.
    pub const MIN_STEP: DtLevel = DtLevel(52);

    pub fn new(level: u32) -> Result<Self, TimeError> {
        if (Self::MAX_STEP.0 as u32..=Self::MIN_STEP.0 as u32).contains(&level) {
            Ok(DtLevel(level as u8))
        } else {
            Err(TimeError::BadLevel(level))
        }
    }

    pub const fn level(self) -> u32 {
        self.0 as u32
    }

    pub const fn ticks(self) -> u64 {
        1 << (TICK_BITS - self.0 as u32)
    }

    pub fn to_units(self) -> f64 {
        // 2^-k is exact in binary floating point.
        f64::powi(2.0, -(self.0 as i32))
    }

    /// Next larger step (one level up), if any.
    pub fn coarser(self) -> Option<DtLevel> {
        (self.0 > Self::MAX_STEP.0).then(|| DtLevel(self.0 - 1))
    }
}

impl fmt::Display for DtLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^-{}", self.0)
    }
}

/// Exact conversion of a tick count to time units.
pub fn ticks_to_units(t: TickTime) -> f64 {
    t.0 as f64 / TICKS_PER_UNIT as f64
}

/// Picks the block step for a particle at time `t` whose accuracy criterion
/// asks for `dt_raw`: the largest `2^-k <= dt_raw` with `k >= 3` that also
/// divides `t`.
pub fn quantize_dt(dt_raw: f64, t: TickTime) -> Result<DtLevel, TimeError> {
    if dt_raw.is_nan() || dt_raw <= 0.0 {
        return Err(TimeError::InvalidStep(dt_raw));
    }
    let mut level = DtLevel::MAX_STEP.0;
    while level <= DtLevel::MIN_STEP.0 && DtLevel(level).to_units() > dt_raw {
        level += 1;
    }
    while level <= DtLevel::MIN_STEP.0 && !t.is_commensurate(DtLevel(level)) {
        level += 1;
    }
    if level > DtLevel::MIN_STEP.0 {
        return Err(TimeError::TimestepUnderflow { dt_raw, at: t });
    }
    Ok(DtLevel(level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent brute force: try every level from coarsest to finest and
    /// keep the first that satisfies both conditions, using real division
    /// for the size test and integer remainder for commensurability.
    fn brute_force_level(dt_raw: f64, ticks: u64) -> Option<u32> {
        (3..=52u32).find(|&k| {
            let step = 1.0 / (1u64 << k) as f64;
            step <= dt_raw && ticks.is_multiple_of(1u64 << (52 - k))
        })
    }

    fn quarter_units(q: u64) -> TickTime {
        TickTime::from_ticks(q << 50).unwrap()
    }

    #[test]
    fn clamps_to_largest_step() {
        assert_eq!(quantize_dt(0.3, TickTime::ZERO).unwrap(), DtLevel::MAX_STEP);
        assert_eq!(quantize_dt(f64::INFINITY, TickTime::ZERO).unwrap().level(), 3);
    }

    #[test]
    fn frozen_examples_match_brute_force() {
        let three_eighths = TickTime::from_ticks(3 << 49).unwrap();
        assert_eq!(brute_force_level(0.26, three_eighths.ticks()), Some(3));
        assert_eq!(quantize_dt(0.26, three_eighths).unwrap().level(), 3);

        let quarter = quarter_units(1);
        assert_eq!(brute_force_level(0.26, quarter.ticks()), Some(3));
        assert_eq!(quantize_dt(0.26, quarter).unwrap().level(), 3);

        // 3/8 is not a multiple of 1/4, so a raw step of 0.3 at 3/16 has to
        // come down to 1/16.
        let three_sixteenths = TickTime::dyadic(3, 4).unwrap();
        assert_eq!(brute_force_level(0.3, three_sixteenths.ticks()), Some(4));
        assert_eq!(quantize_dt(0.3, three_sixteenths).unwrap().level(), 4);
    }

    #[test]
    fn underflow_and_invalid() {
        assert!(matches!(
            quantize_dt(1e-20, TickTime::ZERO),
            Err(TimeError::TimestepUnderflow { .. })
        ));
        assert_eq!(quantize_dt(0.0, TickTime::ZERO), Err(TimeError::InvalidStep(0.0)));
        assert!(quantize_dt(f64::NAN, TickTime::ZERO).is_err());
        assert!(quantize_dt(-1.0, TickTime::ZERO).is_err());
    }

    #[test]
    fn unit_conversion() {
        assert_eq!(ticks_to_units(TickTime::ZERO), 0.0);
        assert_eq!(ticks_to_units(TickTime::from_ticks(1 << 50).unwrap()), 0.25);
        assert_eq!(ticks_to_units(TickTime::from_ticks(1 << 52).unwrap()), 1.0);
        assert_eq!(TickTime::from_units(0.5).unwrap().ticks(), 1 << 51);
        assert_eq!(TickTime::dyadic(1, 2).unwrap(), quarter_units(1));
        assert!(TickTime::from_units(0.1).is_err());
        assert!(TickTime::from_units(-1.0).is_err());
        assert!(TickTime::from_ticks(MAX_TICKS + 1).is_err());
    }

    #[test]
    fn level_bounds() {
        assert!(DtLevel::new(2).is_err());
        assert!(DtLevel::new(53).is_err());
        assert_eq!(DtLevel::new(3).unwrap().to_units(), 0.125);
        assert_eq!(DtLevel::MIN_STEP.ticks(), 1);
        assert_eq!(DtLevel::MAX_STEP.coarser(), None);
        assert_eq!(DtLevel::new(5).unwrap().coarser(), Some(DtLevel::new(4).unwrap()));
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(dt_raw in 1e-17f64..2.0, ticks in 0u64..(1u64 << 56)) {
            let t = TickTime::from_ticks(ticks).unwrap();
            match (quantize_dt(dt_raw, t), brute_force_level(dt_raw, ticks)) {
                (Ok(level), Some(expected)) => prop_assert_eq!(level.level(), expected),
                (Err(TimeError::TimestepUnderflow { .. }), None) => {}
                (got, want) => prop_assert!(false, "got {:?}, oracle {:?}", got, want),
            }
        }

        #[test]
        fn exact_steps_round_trip(k in 3u32..=52, multiple in 0u64..4096) {
            let dt = DtLevel::new(k).unwrap();
            let t = TickTime::from_ticks(multiple * dt.ticks()).unwrap();
            let got = quantize_dt(dt.to_units(), t).unwrap();
            prop_assert!(got.level() <= k);
            prop_assert!(t.is_commensurate(got));
            prop_assert_eq!(t.ticks() % got.ticks(), 0);
        }

        #[test]
        fn monotone_in_requested_step(a in 1e-12f64..1.0, b in 1e-12f64..1.0, ticks in 0u64..(1u64 << 54)) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t = TickTime::from_ticks(ticks).unwrap();
            if let (Ok(l_lo), Ok(l_hi)) = (quantize_dt(lo, t), quantize_dt(hi, t)) {
                prop_assert!(l_lo >= l_hi);
            }
        }
    }
}
