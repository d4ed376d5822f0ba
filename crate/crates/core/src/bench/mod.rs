//! Evaluation machinery: calibrated timing, CPU overhead per second in both
//! modes, the improvement factor, latency sweeps and a structural FPGA
//! resource model.

mod report;

use thiserror::Error;

use crate::simkit::{CostModel, SimError};
use crate::timebase::{ClockMap, NS_PER_SEC};

pub use report::{
    batch_profile, coprime_tasks, latency_sweep, overhead_sweep, parse_report_csv, write_report_csv, RunReport,
    SweepRow, REPORT_CSV_HEADER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("at least one repetition is required")]
    ZeroRepetitions,
    #[error("wake-up rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("batch profile needs a non-empty window")]
    EmptyWindow,
    #[error("improvement factor is undefined when the hardware overhead is zero")]
    UndefinedRatio,
    #[error("resource model needs at least one task")]
    ZeroTasks,
    #[error("counter width must be at least one bit")]
    ZeroWidth,
    #[error("malformed report CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Simulated CPU timeline seen by a measurement.
///
/// Each `get_time` returns the current instant and then spends one register
/// access; an operation under test spends its modeled cost with [`Probe::spend`].
#[derive(Debug, Clone)]
pub struct Probe {
    now_ns: u64,
    reg_access_ns: u64,
}

impl Probe {
    pub fn new(cost: &CostModel) -> Self {
        Self {
            now_ns: 0,
            reg_access_ns: cost.reg_access_ns,
        }
    }

    pub fn get_time(&mut self) -> u64 {
        let t = self.now_ns;
        self.now_ns += self.reg_access_ns;
        t
    }

    pub fn spend(&mut self, ns: u64) {
        self.now_ns += ns;
    }
}

/// Cost of the time read itself: the gap between two back-to-back reads.
pub fn calibrate(cost: &CostModel) -> u64 {
    let mut probe = Probe::new(cost);
    let c1 = probe.get_time();
    let c2 = probe.get_time();
    c2 - c1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Calibration-corrected samples.
    pub samples: Vec<u64>,
    pub calibration_ns: u64,
    pub mean_ns: f64,
}

pub const DEFAULT_REPETITIONS: usize = 10;

/// Times `op` `repetitions` times, subtracting the calibration value from
/// each sample, and averages.
pub fn measure<F: FnMut(&mut Probe)>(
    mut op: F,
    cost: &CostModel,
    repetitions: usize,
) -> Result<Measurement, BenchError> {
    if repetitions == 0 {
        return Err(BenchError::ZeroRepetitions);
    }
    let calibration_ns = calibrate(cost);
    let samples: Vec<u64> = (0..repetitions)
        .map(|_| {
            let mut probe = Probe::new(cost);
            let t1 = probe.get_time();
            op(&mut probe);
            let t2 = probe.get_time();
            (t2 - t1).saturating_sub(calibration_ns)
        })
        .collect();
    let mean_ns = samples.iter().map(|&s| s as f64).sum::<f64>() / samples.len() as f64;
    Ok(Measurement {
        samples,
        calibration_ns,
        mean_ns,
    })
}

/// Software mode: every master tick walks `n_tasks` timers.
///
/// `(sw_fixed + sw_per_timer · n) · (1e9 / base_period)`
pub fn sw_overhead_per_second(n_tasks: usize, clk: &ClockMap, cost: &CostModel) -> f64 {
    let per_tick = cost.sw_tick_cost(n_tasks) as u128;
    (per_tick * NS_PER_SEC as u128) as f64 / clk.base_period_ns() as f64
}

/// How wakes are grouped into ISR invocations.
#[derive(Debug, Clone, PartialEq)]
pub enum BatchProfile {
    /// Every wake gets its own ISR.
    Unbatched { wakeups_per_s: f64 },
    /// Sizes of the ISRs observed over a window.
    Batched { sizes: Vec<u64>, window_ns: u64 },
}

impl BatchProfile {
    pub fn wakeups_per_s(&self) -> f64 {
        match self {
            BatchProfile::Unbatched { wakeups_per_s } => *wakeups_per_s,
            BatchProfile::Batched { sizes, window_ns } => {
                (sizes.iter().sum::<u64>() as u128 * NS_PER_SEC as u128) as f64 / *window_ns as f64
            }
        }
    }
}

/// Hardware mode: ISR cost summed over the ISRs of one second.
pub fn hw_overhead_per_second(profile: &BatchProfile, cost: &CostModel) -> Result<f64, BenchError> {
    match profile {
        BatchProfile::Unbatched { wakeups_per_s } => {
            if !wakeups_per_s.is_finite() || *wakeups_per_s < 0.0 {
                return Err(BenchError::InvalidRate(*wakeups_per_s));
            }
            Ok(wakeups_per_s * cost.hw_isr_cost(1) as f64)
        }
        BatchProfile::Batched { sizes, window_ns } => {
            if *window_ns == 0 {
                return Err(BenchError::EmptyWindow);
            }
            let total: u128 = sizes.iter().map(|&b| cost.hw_isr_cost(b as usize) as u128).sum();
            Ok((total * NS_PER_SEC as u128) as f64 / *window_ns as f64)
        }
    }
}

/// Software overhead divided by hardware overhead.
pub fn improvement_factor(sw_overhead: f64, hw_overhead: f64) -> Result<f64, BenchError> {
    if hw_overhead == 0.0 {
        return Err(BenchError::UndefinedRatio);
    }
    Ok(sw_overhead / hw_overhead)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResourceEstimate {
    pub flip_flops: u64,
    pub luts: u64,
    pub n_tasks: u64,
    pub counter_width_bits: u32,
}

pub const DEFAULT_LUT_PER_COUNTER_BIT: u64 = 2;

/// Structural register/logic count of the device (an analytic model, not a
/// synthesis result).
///
/// Flip-flops: the system-time counter and one counter per task, plus one
/// pending flag per task. LUTs: `lut_per_counter_bit` per counter bit for the
/// increment/decrement and zero-compare logic.
pub fn estimate_resources(
    n_tasks: u64,
    counter_width_bits: u32,
    lut_per_counter_bit: u64,
) -> Result<ResourceEstimate, BenchError> {
    if n_tasks == 0 {
        return Err(BenchError::ZeroTasks);
    }
    if counter_width_bits == 0 {
        return Err(BenchError::ZeroWidth);
    }
    let counter_bits = counter_width_bits as u64 * (n_tasks + 1);
    Ok(ResourceEstimate {
        flip_flops: counter_bits + n_tasks,
        luts: lut_per_counter_bit * counter_bits,
        n_tasks,
        counter_width_bits,
    })
}
