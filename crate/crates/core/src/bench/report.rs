use std::io::{self, Write};

use crate::simkit::{run_scenario, CostModel, EventTrace, Mode, Scenario, TaskSpec};
use crate::timebase::{ClockMap, NS_PER_SEC};

use super::{improvement_factor, BatchProfile, BenchError, ResourceEstimate};

pub const REPORT_CSV_HEADER: &str = "scenario_id,mode,n_tasks,wakeups_per_s,overhead_ns_per_s,mean_latency_ns,speedup";

/// Per-run metrics extracted from a trace.
///
/// Handlers count toward the overhead when they are entered inside the
/// scenario window `(0, duration]`; the per-second figures are scaled by
/// `1e9 / duration`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario_id: String,
    pub mode: Mode,
    pub n_tasks: usize,
    pub wakeups_per_s: f64,
    pub overhead_ns_per_s: f64,
    pub mean_latency_ns: f64,
    /// Only set once the software and hardware runs have been paired.
    pub speedup: Option<f64>,
    pub resource_estimate: Option<ResourceEstimate>,
}

fn per_second(count: u128, window_ns: u64) -> f64 {
    (count * NS_PER_SEC as u128) as f64 / window_ns as f64
}

impl RunReport {
    pub fn from_trace(scenario_id: impl Into<String>, mode: Mode, sc: &Scenario, trace: &EventTrace) -> Self {
        let d = sc.duration_ns;
        let mut latencies = Vec::new();
        for t in &sc.tasks {
            if let Ok(l) = trace.wake_latency(t.id) {
                latencies.extend(l);
            }
        }
        let mean_latency_ns = if latencies.is_empty() {
            0.0
        } else {
            latencies.iter().map(|&l| l as f64).sum::<f64>() / latencies.len() as f64
        };
        Self {
            scenario_id: scenario_id.into(),
            mode,
            n_tasks: sc.tasks.len(),
            wakeups_per_s: per_second(trace.release_count() as u128, d),
            overhead_ns_per_s: per_second(trace.handler_cost_until(d) as u128, d),
            mean_latency_ns,
            speedup: None,
            resource_estimate: None,
        }
    }

    /// Fills `speedup` on both reports. A zero hardware overhead yields an
    /// infinite factor.
    pub fn pair(software: &mut RunReport, hardware: &mut RunReport) {
        let s = improvement_factor(software.overhead_ns_per_s, hardware.overhead_ns_per_s).unwrap_or(f64::INFINITY);
        software.speedup = Some(s);
        hardware.speedup = Some(s);
    }
}

/// The ISR batch sizes of a hardware trace over the scenario window.
pub fn batch_profile(trace: &EventTrace, duration_ns: u64) -> BatchProfile {
    BatchProfile::Batched {
        sizes: trace.isr_batches_until(duration_ns),
        window_ns: duration_ns,
    }
}

pub fn write_report_csv<W: Write>(reports: &[RunReport], mut w: W) -> io::Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        write!(
            w,
            "{},{},{},{},{},{},",
            r.scenario_id, r.mode, r.n_tasks, r.wakeups_per_s, r.overhead_ns_per_s, r.mean_latency_ns
        )?;
        if let Some(s) = r.speedup {
            write!(w, "{s}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn parse_report_csv(text: &str) -> Result<Vec<RunReport>, BenchError> {
    let err = |line: usize, msg: String| BenchError::Csv(format!("line {line}: {msg}"));
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_CSV_HEADER) {
        return Err(BenchError::Csv("missing or wrong header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let cols: Vec<&str> = line.split(',').collect();
            let [id, mode, n_tasks, wps, ovh, lat, speedup] = cols[..] else {
                return Err(err(n, format!("expected 7 columns, got {}", cols.len())));
            };
            let float = |s: &str| s.parse::<f64>().map_err(|e| err(n, format!("`{s}`: {e}")));
            Ok(RunReport {
                scenario_id: id.to_string(),
                mode: mode.parse().map_err(|e| err(n, e))?,
                n_tasks: n_tasks.parse().map_err(|e| err(n, format!("`{n_tasks}`: {e}")))?,
                wakeups_per_s: float(wps)?,
                overhead_ns_per_s: float(ovh)?,
                mean_latency_ns: float(lat)?,
                speedup: if speedup.is_empty() {
                    None
                } else {
                    Some(float(speedup)?)
                },
                resource_estimate: None,
            })
        })
        .collect()
}

/// First primes from 11 upward; used as pairwise-coprime period multipliers.
const COPRIME_MULTIPLIERS: [u64; 32] = [
    11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127,
    131, 137, 139, 149, 151,
];

/// `n` tasks whose periods are distinct primes times the base period, so no
/// two tasks release together before the product of their multipliers.
pub fn coprime_tasks(n: usize, clk: &ClockMap) -> Vec<TaskSpec> {
    assert!(n <= COPRIME_MULTIPLIERS.len(), "at most 32 coprime tasks");
    COPRIME_MULTIPLIERS[..n]
        .iter()
        .enumerate()
        .map(|(i, m)| TaskSpec::periodic(i as u32, m * clk.base_period_ns()))
        .collect()
}

/// Runs both modes for every task count and pairs the reports.
///
/// `tasks_for(n)` supplies the task set for count `n`. Rows come out ordered
/// by count, software before hardware.
pub fn overhead_sweep(
    template: &Scenario,
    task_counts: &[usize],
    tasks_for: &dyn Fn(usize) -> Vec<TaskSpec>,
) -> Result<Vec<RunReport>, BenchError> {
    let mut out = Vec::with_capacity(task_counts.len() * 2);
    for &n in task_counts {
        let sc = Scenario {
            tasks: tasks_for(n),
            ..template.clone()
        };
        sc.validate_for(Mode::Hardware)?;
        let id = format!("n{n}");
        let mut sw = RunReport::from_trace(&id, Mode::Software, &sc, &run_scenario(&sc, Mode::Software)?);
        let mut hw = RunReport::from_trace(&id, Mode::Hardware, &sc, &run_scenario(&sc, Mode::Hardware)?);
        RunReport::pair(&mut sw, &mut hw);
        out.push(sw);
        out.push(hw);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub n_tasks: usize,
    pub mode: Mode,
    pub mean_latency_ns: f64,
}

/// Mean wake latency per task count and mode, using [`coprime_tasks`].
pub fn latency_sweep(
    task_counts: &[usize],
    clk: &ClockMap,
    cost: &CostModel,
    n_slots: usize,
    duration_ns: u64,
) -> Result<Vec<SweepRow>, BenchError> {
    let template = Scenario::new(Vec::new(), *clk, *cost, n_slots, duration_ns)?;
    let clk = *clk;
    let reports = overhead_sweep(&template, task_counts, &|n| coprime_tasks(n, &clk))?;
    Ok(reports
        .iter()
        .map(|r| SweepRow {
            n_tasks: r.n_tasks,
            mode: r.mode,
            mean_latency_ns: r.mean_latency_ns,
        })
        .collect())
}
