//! Scenario files.
//!
//! A scenario is a TOML document; see `scenarios/platform.toml` for an
//! annotated example holding every key. Sections may be left out and take the
//! reference platform values. Unknown keys are errors.

use std::path::Path;

use serde::Deserialize;

use hwtm_core::hwdev::{DEFAULT_SLOTS, MAX_SLOTS};
use hwtm_core::timebase::{ns_to_fpga_cycles, TimeError};
use hwtm_core::{ClockMap, CostModel, Duration, Mode, Scenario, SimError, TaskId, TaskSpec};

use crate::CliError;

/// The embedded reference scenario.
pub const PLATFORM_SCENARIO: &str = include_str!("../scenarios/platform.toml");

pub const DEFAULT_COUNTER_WIDTH_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeSel {
    Software,
    Hardware,
    Both,
}

impl ModeSel {
    pub fn modes(self) -> &'static [Mode] {
        match self {
            ModeSel::Software => &[Mode::Software],
            ModeSel::Hardware => &[Mode::Hardware],
            ModeSel::Both => &[Mode::Software, Mode::Hardware],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    duration_ns: Option<u64>,
    mode: Option<ModeSel>,
    #[serde(default)]
    clock: ClockSection,
    #[serde(default)]
    cost: CostSection,
    #[serde(default)]
    device: DeviceSection,
    #[serde(default)]
    tasks: Vec<TaskEntry>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClockSection {
    cpu_freq_hz: Option<u64>,
    fpga_freq_hz: Option<u64>,
    base_period_ns: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostSection {
    sw_fixed_ns: Option<u64>,
    sw_per_timer_ns: Option<u64>,
    hw_isr_fixed_ns: Option<u64>,
    hw_per_wakeup_ns: Option<u64>,
    reg_access_ns: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceSection {
    n_slots: Option<usize>,
    counter_width_bits: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskEntry {
    id: u32,
    period_ns: u64,
    #[serde(default)]
    offset_ns: u64,
}

/// A parsed and fully validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub mode: ModeSel,
    pub counter_width_bits: u32,
}

fn invalid(field: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

impl LoadedScenario {
    pub fn platform() -> Self {
        Self::parse(PLATFORM_SCENARIO).expect("embedded scenario is valid")
    }

    /// Reads `path`, or the embedded scenario when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::platform()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse(&text).map_err(|e| match e {
                    CliError::Validation(m) => CliError::Validation(format!("{}: {m}", p.display())),
                    other => other,
                })
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;

        let p = ClockMap::PLATFORM;
        let clock = ClockMap::new(
            file.clock.cpu_freq_hz.unwrap_or(p.cpu_freq_hz()),
            file.clock.fpga_freq_hz.unwrap_or(p.fpga_freq_hz()),
            file.clock.base_period_ns.unwrap_or(p.base_period_ns()),
        )
        .map_err(|e| match e {
            TimeError::NonPositive { field } => invalid(format_args!("clock.{field}"), "must be strictly positive"),
            other => invalid("clock.base_period_ns", other),
        })?;

        let d = CostModel::default();
        let c = file.cost;
        let cost = CostModel {
            sw_fixed_ns: c.sw_fixed_ns.unwrap_or(d.sw_fixed_ns),
            sw_per_timer_ns: c.sw_per_timer_ns.unwrap_or(d.sw_per_timer_ns),
            hw_isr_fixed_ns: c.hw_isr_fixed_ns.unwrap_or(d.hw_isr_fixed_ns),
            hw_per_wakeup_ns: c.hw_per_wakeup_ns.unwrap_or(d.hw_per_wakeup_ns),
            reg_access_ns: c.reg_access_ns.unwrap_or(d.reg_access_ns),
        };

        let n_slots = file.device.n_slots.unwrap_or(DEFAULT_SLOTS);
        if !(1..=MAX_SLOTS).contains(&n_slots) {
            return Err(invalid(
                "device.n_slots",
                format_args!("must be between 1 and {MAX_SLOTS}, got {n_slots}"),
            ));
        }
        let width = file.device.counter_width_bits.unwrap_or(DEFAULT_COUNTER_WIDTH_BITS);
        if !(1..=64).contains(&width) {
            return Err(invalid(
                "device.counter_width_bits",
                format_args!("must be between 1 and 64, got {width}"),
            ));
        }

        let duration_ns = file.duration_ns.unwrap_or(1_000_000_000);
        if duration_ns == 0 {
            return Err(invalid("duration_ns", "must be strictly positive"));
        }

        let mut tasks = Vec::with_capacity(file.tasks.len());
        for (i, t) in file.tasks.iter().enumerate() {
            let spec = TaskSpec::new(TaskId(t.id), t.period_ns, t.offset_ns)
                .map_err(|_| invalid(format_args!("tasks[{i}].period_ns"), "must be strictly positive"))?;
            if spec.release(1).is_none() {
                return Err(invalid(
                    format_args!("tasks[{i}].offset_ns"),
                    "first release overflows 64 bits",
                ));
            }
            check_counter_width(i, t.period_ns, &clock, width)?;
            tasks.push(spec);
        }

        let scenario = Scenario::new(tasks, clock, cost, n_slots, duration_ns).map_err(|e| match e {
            SimError::DuplicateTask(id) => invalid("tasks", format_args!("task id {id} appears more than once")),
            other => CliError::Validation(other.to_string()),
        })?;
        Ok(Self {
            scenario,
            mode: file.mode.unwrap_or(ModeSel::Both),
            counter_width_bits: width,
        })
    }

    /// Capacity and other mode-dependent checks, before anything runs.
    pub fn validate_modes(&self, mode: ModeSel) -> Result<(), CliError> {
        for &m in mode.modes() {
            self.scenario.validate_for(m).map_err(|e| match e {
                SimError::Capacity { tasks, n_slots } => invalid(
                    "device.n_slots",
                    format_args!("{tasks} tasks exceed the capacity of {n_slots} hardware slots"),
                ),
                other => CliError::Validation(other.to_string()),
            })?;
        }
        Ok(())
    }
}

/// The largest delay a task ever loads is one period in cycles plus one
/// cycle of phase; it has to fit the down-counter.
fn check_counter_width(index: usize, period_ns: u64, clock: &ClockMap, width: u32) -> Result<(), CliError> {
    let field = format_args!("tasks[{index}].period_ns").to_string();
    let cycles = ns_to_fpga_cycles(Duration::ns(period_ns), clock)
        .map_err(|e| invalid(&field, e))?
        .value();
    let max = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    if cycles >= max {
        return Err(invalid(
            field,
            format_args!(
                "a delay of {} cycles does not fit a {width}-bit counter",
                cycles as u128 + 1
            ),
        ));
    }
    Ok(())
}
