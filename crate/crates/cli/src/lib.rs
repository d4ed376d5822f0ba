//! Commands behind the `hwtm` binary.
//!
//! Each `cmd_*` function does the whole job of one verb and returns the files
//! it wrote; `main` only parses flags and maps [`CliError`] to an exit code.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use hwtm_core::bench::{coprime_tasks, overhead_sweep, write_report_csv, DEFAULT_LUT_PER_COUNTER_BIT};
use hwtm_core::{estimate_resources, run_scenario, RunReport, Scenario, TaskSpec};

pub mod scenario;

pub use scenario::{LoadedScenario, ModeSel, PLATFORM_SCENARIO};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

/// Inclusive task-count range written `min..max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRange {
    pub min: usize,
    pub max: usize,
}

impl TaskRange {
    pub fn counts(self) -> Vec<usize> {
        (self.min..=self.max).collect()
    }
}

impl FromStr for TaskRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected `min..max`, got `{s}`"))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        let r = TaskRange {
            min: num(a)?,
            max: num(b)?,
        };
        if r.min > r.max {
            return Err(format!("range {}..{} is inverted", r.min, r.max));
        }
        if r.min == 0 {
            return Err("task counts start at 1".into());
        }
        Ok(r)
    }
}

fn create_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn report_bytes(reports: &[RunReport]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_report_csv(reports, &mut buf).expect("writing to memory");
    buf
}

/// Runs one scenario and writes `trace_<mode>.csv` per mode plus `report.csv`.
///
/// `scenario` of `None` uses the embedded reference scenario; `mode` overrides
/// the one in the file.
pub fn cmd_run(scenario: Option<&Path>, out: &Path, mode: Option<ModeSel>) -> Result<Vec<PathBuf>, CliError> {
    let loaded = LoadedScenario::load(scenario)?;
    let mode = mode.unwrap_or(loaded.mode);
    loaded.validate_modes(mode)?;
    let sc = &loaded.scenario;
    let id = scenario
        .and_then(|p| p.file_stem())
        .map_or("platform".to_string(), |s| s.to_string_lossy().into_owned());

    let mut traces = Vec::new();
    for &m in mode.modes() {
        let trace = run_scenario(sc, m).map_err(|e| CliError::Validation(e.to_string()))?;
        traces.push((m, trace));
    }
    let mut reports: Vec<RunReport> = traces
        .iter()
        .map(|(m, t)| RunReport::from_trace(&id, *m, sc, t))
        .collect();
    if let [sw, hw] = &mut reports[..] {
        RunReport::pair(sw, hw);
    }

    create_dir(out)?;
    let mut written = Vec::new();
    for (m, trace) in &traces {
        written.push(write_file(
            out.join(format!("trace_{m}.csv")),
            trace.to_csv().as_bytes(),
        )?);
    }
    written.push(write_file(out.join("report.csv"), &report_bytes(&reports))?);
    Ok(written)
}

/// Sweeps the task count over `range` in both modes.
///
/// Uses the first `n` tasks of the scenario when it holds at least `range.max`
/// of them, and tasks with pairwise-coprime periods otherwise. Writes
/// `sweep_latency.csv` and `sweep_report.csv`.
pub fn cmd_sweep(scenario: Option<&Path>, range: TaskRange, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let loaded = LoadedScenario::load(scenario)?;
    let template = Scenario {
        tasks: Vec::new(),
        ..loaded.scenario.clone()
    };
    if range.max > template.n_slots {
        return Err(CliError::Validation(format!(
            "--tasks: {} tasks exceed the capacity of {} hardware slots",
            range.max, template.n_slots
        )));
    }
    let own = &loaded.scenario.tasks;
    let clk = template.clock;
    let tasks_for = |n: usize| -> Vec<TaskSpec> {
        if own.len() >= range.max {
            own[..n].to_vec()
        } else {
            coprime_tasks(n, &clk)
        }
    };

    // One worker per count; results are joined back in count order.
    let counts = range.counts();
    let per_count: Vec<Result<Vec<RunReport>, _>> = std::thread::scope(|s| {
        let handles: Vec<_> = counts
            .iter()
            .map(|&n| {
                let template = &template;
                let tasks_for = &tasks_for;
                s.spawn(move || overhead_sweep(template, &[n], tasks_for))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut reports = Vec::with_capacity(counts.len() * 2);
    for r in per_count {
        reports.extend(r.map_err(|e| CliError::Validation(e.to_string()))?);
    }

    let mut latency = String::from("n_tasks,mode,mean_latency_ns\n");
    for r in &reports {
        writeln!(latency, "{},{},{}", r.n_tasks, r.mode, r.mean_latency_ns).unwrap();
    }

    create_dir(out)?;
    Ok(vec![
        write_file(out.join("sweep_latency.csv"), latency.as_bytes())?,
        write_file(out.join("sweep_report.csv"), &report_bytes(&reports))?,
    ])
}

pub const RESOURCES_CSV_HEADER: &str = "n_tasks,flip_flops,luts";

/// Resource table for every task count in `range` at counter width `width`.
pub fn cmd_resources(range: TaskRange, width: u32) -> Result<String, CliError> {
    if width == 0 || width > 64 {
        return Err(CliError::Validation(format!(
            "--width: must be between 1 and 64, got {width}"
        )));
    }
    let mut csv = format!("{RESOURCES_CSV_HEADER}\n");
    for n in range.counts() {
        let r = estimate_resources(n as u64, width, DEFAULT_LUT_PER_COUNTER_BIT)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        writeln!(csv, "{},{},{}", r.n_tasks, r.flip_flops, r.luts).unwrap();
    }
    Ok(csv)
}
