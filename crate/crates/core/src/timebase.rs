//! Clock domains and rounding-specified conversions between wall time and
//! discrete device cycles / master ticks.
//!
//! Requested delays are always rounded *up* when turned into cycles or ticks,
//! so a task can never be woken before its deadline. Conversions back to
//! nanoseconds round down. Every intermediate product is computed in 128 bits
//! and a result that does not fit in 64 bits is reported as
//! [`TimeError::Overflow`].

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

pub const NS_PER_SEC: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("{field} must be strictly positive")]
    NonPositive { field: &'static str },
    #[error("base period of {base_period_ns} ns is finer than one FPGA cycle at {fpga_freq_hz} Hz")]
    BasePeriodTooFine { base_period_ns: u64, fpga_freq_hz: u64 },
    #[error("unit mismatch: expected {expected}, got {actual}")]
    UnitMismatch { expected: Unit, actual: Unit },
    #[error("conversion overflows a 64-bit counter")]
    Overflow,
}

/// The unit a [`Duration`] or [`Instant`] is counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Ns,
    FpgaCycle,
    MasterTick,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Ns => "ns",
            Unit::FpgaCycle => "fpga_cycle",
            Unit::MasterTick => "master_tick",
        })
    }
}

/// A span of time tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Duration {
    value: u64,
    unit: Unit,
}

impl Duration {
    pub const fn new(value: u64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub const fn ns(value: u64) -> Self {
        Self::new(value, Unit::Ns)
    }

    pub const fn fpga_cycles(value: u64) -> Self {
        Self::new(value, Unit::FpgaCycle)
    }

    pub const fn master_ticks(value: u64) -> Self {
        Self::new(value, Unit::MasterTick)
    }

    pub const fn value(self) -> u64 {
        self.value
    }

    pub const fn unit(self) -> Unit {
        self.unit
    }

    /// Returns the raw count if `self` is expressed in `unit`.
    pub fn value_in(self, unit: Unit) -> Result<u64, TimeError> {
        same_unit(unit, self.unit)?;
        Ok(self.value)
    }

    pub fn checked_add(self, rhs: Duration) -> Result<Duration, TimeError> {
        same_unit(self.unit, rhs.unit)?;
        self.value
            .checked_add(rhs.value)
            .map(|v| Duration::new(v, self.unit))
            .ok_or(TimeError::Overflow)
    }

    pub fn checked_sub(self, rhs: Duration) -> Result<Duration, TimeError> {
        same_unit(self.unit, rhs.unit)?;
        self.value
            .checked_sub(rhs.value)
            .map(|v| Duration::new(v, self.unit))
            .ok_or(TimeError::Overflow)
    }

    /// Orders two durations; comparing different units is an error.
    pub fn try_cmp(self, rhs: Duration) -> Result<Ordering, TimeError> {
        same_unit(self.unit, rhs.unit)?;
        Ok(self.value.cmp(&rhs.value))
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// A point in time, counted from reset in a given unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instant {
    value: u64,
    unit: Unit,
}

impl Instant {
    pub const fn new(value: u64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub const fn value(self) -> u64 {
        self.value
    }

    pub const fn unit(self) -> Unit {
        self.unit
    }

    pub fn checked_add(self, d: Duration) -> Result<Instant, TimeError> {
        same_unit(self.unit, d.unit)?;
        self.value
            .checked_add(d.value)
            .map(|v| Instant::new(v, self.unit))
            .ok_or(TimeError::Overflow)
    }

    /// Elapsed time from `earlier` to `self`.
    pub fn checked_duration_since(self, earlier: Instant) -> Result<Duration, TimeError> {
        same_unit(self.unit, earlier.unit)?;
        self.value
            .checked_sub(earlier.value)
            .map(|v| Duration::new(v, self.unit))
            .ok_or(TimeError::Overflow)
    }

    pub fn try_cmp(self, rhs: Instant) -> Result<Ordering, TimeError> {
        same_unit(self.unit, rhs.unit)?;
        Ok(self.value.cmp(&rhs.value))
    }
}

fn same_unit(expected: Unit, actual: Unit) -> Result<(), TimeError> {
    if expected == actual {
        Ok(())
    } else {
        Err(TimeError::UnitMismatch { expected, actual })
    }
}

/// The three clock domains of the co-simulated platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClockMap {
    cpu_freq_hz: u64,
    fpga_freq_hz: u64,
    base_period_ns: u64,
}

impl ClockMap {
    /// 400 MHz CPU, 102 MHz FPGA fabric and a 10 ms software base period.
    pub const PLATFORM: ClockMap = ClockMap {
        cpu_freq_hz: 400_000_000,
        fpga_freq_hz: 102_000_000,
        base_period_ns: 10_000_000,
    };

    pub fn new(cpu_freq_hz: u64, fpga_freq_hz: u64, base_period_ns: u64) -> Result<Self, TimeError> {
        if cpu_freq_hz == 0 {
            return Err(TimeError::NonPositive { field: "cpu_freq_hz" });
        }
        if fpga_freq_hz == 0 {
            return Err(TimeError::NonPositive { field: "fpga_freq_hz" });
        }
        if base_period_ns == 0 {
            return Err(TimeError::NonPositive {
                field: "base_period_ns",
            });
        }
        // base_period_ns >= 1e9 / fpga_freq_hz, kept in integers
        if (base_period_ns as u128) * (fpga_freq_hz as u128) < NS_PER_SEC as u128 {
            return Err(TimeError::BasePeriodTooFine {
                base_period_ns,
                fpga_freq_hz,
            });
        }
        Ok(Self {
            cpu_freq_hz,
            fpga_freq_hz,
            base_period_ns,
        })
    }

    pub const fn cpu_freq_hz(&self) -> u64 {
        self.cpu_freq_hz
    }

    pub const fn fpga_freq_hz(&self) -> u64 {
        self.fpga_freq_hz
    }

    pub const fn base_period_ns(&self) -> u64 {
        self.base_period_ns
    }

    /// Length of one FPGA cycle in nanoseconds, for presentation only.
    pub fn fpga_cycle_ns(&self) -> f64 {
        NS_PER_SEC as f64 / self.fpga_freq_hz as f64
    }

    /// Number of master ticks in one second, as an exact rational `(num, den)`.
    pub fn master_ticks_per_second(&self) -> (u64, u64) {
        (NS_PER_SEC, self.base_period_ns)
    }

    /// Last FPGA cycle whose (floored) nanosecond timestamp is not after `t_ns`.
    ///
    /// This is the device cycle count a CPU observing the wall clock at `t_ns`
    /// sees, and it is consistent with [`fpga_cycles_to_ns`]:
    /// `fpga_cycles_to_ns(device_cycle_at(t)) <= t < fpga_cycles_to_ns(device_cycle_at(t) + 1)`.
    pub fn device_cycle_at(&self, t_ns: u64) -> Result<u64, TimeError> {
        let num = (t_ns as u128 + 1) * self.fpga_freq_hz as u128;
        let c = num.div_ceil(NS_PER_SEC as u128) - 1;
        u64::try_from(c).map_err(|_| TimeError::Overflow)
    }
}

impl Default for ClockMap {
    fn default() -> Self {
        Self::PLATFORM
    }
}

fn narrow(v: u128) -> Result<u64, TimeError> {
    u64::try_from(v).map_err(|_| TimeError::Overflow)
}

/// `ceil(d * fpga_freq_hz / 1e9)`.
pub fn ns_to_fpga_cycles(d: Duration, clk: &ClockMap) -> Result<Duration, TimeError> {
    let ns = d.value_in(Unit::Ns)? as u128;
    let cycles = (ns * clk.fpga_freq_hz as u128).div_ceil(NS_PER_SEC as u128);
    Ok(Duration::fpga_cycles(narrow(cycles)?))
}

/// `floor(c * 1e9 / fpga_freq_hz)`.
pub fn fpga_cycles_to_ns(c: Duration, clk: &ClockMap) -> Result<Duration, TimeError> {
    let cycles = c.value_in(Unit::FpgaCycle)? as u128;
    let ns = cycles * NS_PER_SEC as u128 / clk.fpga_freq_hz as u128;
    Ok(Duration::ns(narrow(ns)?))
}

/// `ceil(d / base_period_ns)`.
pub fn ns_to_master_ticks(d: Duration, clk: &ClockMap) -> Result<Duration, TimeError> {
    let ns = d.value_in(Unit::Ns)?;
    Ok(Duration::master_ticks(ns.div_ceil(clk.base_period_ns)))
}

/// `ticks * base_period_ns`.
pub fn master_ticks_to_ns(t: Duration, clk: &ClockMap) -> Result<Duration, TimeError> {
    let ticks = t.value_in(Unit::MasterTick)?;
    ticks
        .checked_mul(clk.base_period_ns)
        .map(Duration::ns)
        .ok_or(TimeError::Overflow)
}
