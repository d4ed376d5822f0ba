//! Deterministic co-simulation of two RTOS time managers.
//!
//! * [`hwdev`]: an FPGA time manager with a system-time counter, per-task
//!   down-counters, a register interface and an interrupt/acknowledge
//!   handshake.
//! * [`swtick`]: the classic periodic master tick that walks every delayed
//!   task timer.
//! * [`simkit`]: a discrete-event engine that runs periodic tasks on either
//!   backend and records an event trace.
//! * [`bench`]: calibration-based measurement, CPU overhead, improvement
//!   factor, latency sweeps and an FPGA resource model.
//!
//! [`timebase`] holds the clock domains shared by all of them.

use std::fmt;

pub mod bench;
pub mod hwdev;
pub mod simkit;
pub mod swtick;
pub mod timebase;

pub use bench::{
    calibrate, estimate_resources, hw_overhead_per_second, improvement_factor, latency_sweep, measure,
    sw_overhead_per_second, BatchProfile, BenchError, Measurement, ResourceEstimate, RunReport,
};
pub use hwdev::{CycleStepped, DeviceError, DeviceSnapshot, EventDriven, TimeManager, WakeSet};
pub use simkit::{run_scenario, wake_latency, CostModel, EventKind, EventTrace, Mode, Scenario, SimError, TaskSpec};
pub use swtick::{SwTickError, SwTimerTable};
pub use timebase::{ClockMap, Duration, Instant, TimeError, Unit};

/// Identifier of a periodic task within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
