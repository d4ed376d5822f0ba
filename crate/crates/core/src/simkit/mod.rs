//! Discrete-event engine running periodic tasks on either time manager.
//!
//! A task with period `p` and offset `o` has ideal releases at `o + k·p` for
//! `k ≥ 1`; every release that falls inside `(0, duration]` is simulated. The
//! task starts waiting at `o` and re-arms its timer right after each wake.
//! Deadlines are absolute: each wait targets the next ideal release rather
//! than "now + period", so rounding never accumulates from one period to the
//! next.
//!
//! Handler costs go to an overhead ledger and delay the wakes they perform,
//! but task bodies take no time and nothing is preempted. Handlers are
//! serialized on the single CPU: a handler that becomes ready while another
//! one runs starts when the first one exits.
//!
//! In software mode each wait registers `ceil(release / base_period) − jiffies`
//! master ticks with a [`SwTimerTable`]; the master tick handler runs every
//! base period and wakes expired tasks when it finishes. In hardware mode each
//! task owns device slot `index` and loads the cycles remaining to its next
//! release. A slot expiry raises the interrupt; the ISR reads every pending
//! wake at once, then acknowledges and wakes each task in turn.

mod engine;
mod trace;


use thiserror::Error;

use crate::hwdev::{DeviceError, MAX_SLOTS};
use crate::swtick::SwTickError;
use crate::timebase::{ClockMap, TimeError};
use crate::TaskId;

pub use engine::{run_hardware_with, run_scenario};
pub use trace::{EventKind, EventTrace, TraceEvent, TRACE_CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("scenario duration must be at least 1 ns")]
    EmptyDuration,
    #[error("task {0} has a zero period")]
    ZeroPeriod(TaskId),
    #[error("task id {0} appears more than once")]
    DuplicateTask(TaskId),
    #[error("{tasks} tasks do not fit on a device with {n_slots} slots")]
    Capacity { tasks: usize, n_slots: usize },
    #[error("device needs between 1 and {MAX_SLOTS} slots, got {0}")]
    SlotCount(usize),
    #[error("no releases of task {0} in the trace")]
    UnknownTask(TaskId),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Time(#[from] TimeError),
    #[error(transparent)]
    SwTick(#[from] SwTickError),
}

/// Execution costs of the time-manager code paths, in nanoseconds.
///
/// The defaults are placeholders chosen to exercise the qualitative behavior
/// of both designs; they are not measurements. Calibrate them for a real
/// target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostModel {
    pub sw_fixed_ns: u64,
    pub sw_per_timer_ns: u64,
    pub hw_isr_fixed_ns: u64,
    pub hw_per_wakeup_ns: u64,
    pub reg_access_ns: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            sw_fixed_ns: 2000,
            sw_per_timer_ns: 500,
            hw_isr_fixed_ns: 3000,
            hw_per_wakeup_ns: 500,
            reg_access_ns: 150,
        }
    }
}

impl CostModel {
    /// Master tick handler walking `timers` entries.
    pub fn sw_tick_cost(&self, timers: usize) -> u64 {
        self.sw_fixed_ns
            .saturating_add(self.sw_per_timer_ns.saturating_mul(timers as u64))
    }

    /// Wake-up ISR servicing `wakeups` tasks.
    pub fn hw_isr_cost(&self, wakeups: usize) -> u64 {
        self.hw_isr_fixed_ns
            .saturating_add(self.hw_per_wakeup_ns.saturating_mul(wakeups as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Software,
    Hardware,
}

impl Mode {
    pub const fn as_str(self) -> &'static str {
        match self {
            Mode::Software => "software",
            Mode::Hardware => "hardware",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "software" => Ok(Mode::Software),
            "hardware" => Ok(Mode::Hardware),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Static parameters of a periodic task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TaskSpec {
    pub id: TaskId,
    pub period_ns: u64,
    pub initial_offset_ns: u64,
}

impl TaskSpec {
    pub fn new(id: TaskId, period_ns: u64, initial_offset_ns: u64) -> Result<Self, SimError> {
        if period_ns == 0 {
            return Err(SimError::ZeroPeriod(id));
        }
        Ok(Self {
            id,
            period_ns,
            initial_offset_ns,
        })
    }

    pub fn periodic(id: u32, period_ns: u64) -> Self {
        Self::new(TaskId(id), period_ns, 0).expect("period must be non-zero")
    }

    /// Ideal instant of release `k` (k ≥ 1), or `None` on overflow.
    pub fn release(&self, k: u64) -> Option<u64> {
        k.checked_mul(self.period_ns)?.checked_add(self.initial_offset_ns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskState {
    Ready,
    Waiting,
}

/// Dynamic state of a task during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRuntime {
    pub spec: TaskSpec,
    pub state: TaskState,
    /// Index of the release being waited for (or last serviced).
    pub release_index: u64,
    pub next_release_ns: u64,
    pub slot: Option<usize>,
}

/// Everything a run needs except the mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub tasks: Vec<TaskSpec>,
    pub clock: ClockMap,
    pub cost: CostModel,
    pub n_slots: usize,
    pub duration_ns: u64,
}

impl Scenario {
    pub fn new(
        tasks: Vec<TaskSpec>,
        clock: ClockMap,
        cost: CostModel,
        n_slots: usize,
        duration_ns: u64,
    ) -> Result<Self, SimError> {
        let s = Self {
            tasks,
            clock,
            cost,
            n_slots,
            duration_ns,
        };
        s.validate()?;
        Ok(s)
    }

    /// Reference platform defaults with the given tasks.
    pub fn platform(tasks: Vec<TaskSpec>, duration_ns: u64) -> Result<Self, SimError> {
        Self::new(
            tasks,
            ClockMap::PLATFORM,
            CostModel::default(),
            crate::hwdev::DEFAULT_SLOTS,
            duration_ns,
        )
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.duration_ns == 0 {
            return Err(SimError::EmptyDuration);
        }
        if !(1..=MAX_SLOTS).contains(&self.n_slots) {
            return Err(SimError::SlotCount(self.n_slots));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.tasks {
            if t.period_ns == 0 {
                return Err(SimError::ZeroPeriod(t.id));
            }
            if !seen.insert(t.id) {
                return Err(SimError::DuplicateTask(t.id));
            }
        }
        Ok(())
    }

    /// Validation for a run in `mode`, including device capacity.
    pub fn validate_for(&self, mode: Mode) -> Result<(), SimError> {
        self.validate()?;
        if mode == Mode::Hardware && self.tasks.len() > self.n_slots {
            return Err(SimError::Capacity {
                tasks: self.tasks.len(),
                n_slots: self.n_slots,
            });
        }
        Ok(())
    }
}

/// Per-release wake latency of `task` in `trace`.
pub fn wake_latency(trace: &EventTrace, task: TaskId) -> Result<Vec<u64>, SimError> {
    trace.wake_latency(task)
}
