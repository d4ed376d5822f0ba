//! The baseline software time manager: a periodic master tick handler that
//! walks every delayed-task timer on each base period.
//!
//! Timers live in a flat list and the whole list is walked on every tick, so
//! the handler's cost grows linearly with the number of delayed tasks.

use thiserror::Error;

use crate::simkit::CostModel;
use crate::TaskId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwTickError {
    #[error("task {0} already has a running timer")]
    DuplicateTask(TaskId),
    #[error("a delay of zero master ticks is not allowed")]
    ZeroDelay,
}

/// Result of one master tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickOutcome {
    /// Tasks whose timers expired on this tick, in list order.
    pub expired: Vec<TaskId>,
    pub entries_walked: usize,
    pub cost_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SwTimerTable {
    jiffies: u64,
    entries: Vec<(TaskId, u64)>,
}

impl SwTimerTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Master ticks handled since construction.
    pub fn jiffies(&self) -> u64 {
        self.jiffies
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn remaining(&self, task: TaskId) -> Option<u64> {
        self.entries.iter().find(|(t, _)| *t == task).map(|(_, r)| *r)
    }

    /// Starts a timer that expires on the `ticks`-th following master tick.
    pub fn add_timer(&mut self, task: TaskId, ticks: u64) -> Result<(), SwTickError> {
        if ticks == 0 {
            return Err(SwTickError::ZeroDelay);
        }
        if self.remaining(task).is_some() {
            return Err(SwTickError::DuplicateTask(task));
        }
        self.entries.push((task, ticks));
        Ok(())
    }

    /// Runs the master tick handler: bump jiffies, decrement every timer, then
    /// collect and drop the ones that reached zero.
    pub fn master_tick(&mut self, cost: &CostModel) -> TickOutcome {
        self.jiffies += 1;
        let walked = self.entries.len();
        for (_, remaining) in &mut self.entries {
            *remaining -= 1;
        }
        let mut expired = Vec::new();
        self.entries.retain(|&(task, remaining)| {
            if remaining == 0 {
                expired.push(task);
                false
            } else {
                true
            }
        });
        TickOutcome {
            expired,
            entries_walked: walked,
            cost_ns: cost.sw_tick_cost(walked),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(i: u32) -> TaskId {
        TaskId(i)
    }

    #[test]
    fn add_timer_rules() {
        let mut tbl = SwTimerTable::new();
        tbl.add_timer(t(1), 3).unwrap();
        assert_eq!(tbl.len(), 1);
        assert_eq!(tbl.add_timer(t(1), 3), Err(SwTickError::DuplicateTask(t(1))));
        assert_eq!(tbl.add_timer(t(2), 0), Err(SwTickError::ZeroDelay));
        assert_eq!(tbl.len(), 1);
    }

    #[test]
    fn tick_cost_examples() {
        let cost = CostModel::default();
        let mut tbl = SwTimerTable::new();
        let out = tbl.master_tick(&cost);
        assert!(out.expired.is_empty());
        assert_eq!(out.cost_ns, 2000);

        for i in 0..10 {
            tbl.add_timer(t(i), 5).unwrap();
        }
        let out = tbl.master_tick(&cost);
        assert!(out.expired.is_empty());
        assert_eq!(out.entries_walked, 10);
        assert_eq!(out.cost_ns, 2000 + 10 * 500);
    }

    #[test]
    fn expiring_entry_is_removed() {
        let mut tbl = SwTimerTable::new();
        tbl.add_timer(t(7), 1).unwrap();
        tbl.add_timer(t(8), 2).unwrap();
        let out = tbl.master_tick(&CostModel::default());
        assert_eq!(out.expired, vec![t(7)]);
        assert_eq!(out.entries_walked, 2);
        assert_eq!(tbl.remaining(t(7)), None);
        assert_eq!(tbl.remaining(t(8)), Some(1));
        // the slot is free again
        tbl.add_timer(t(7), 4).unwrap();
    }

    #[test]
    fn cost_slope_is_per_timer_cost() {
        // least-squares over n = 0..=12
        let cost = CostModel::default();
        let pts: Vec<(f64, f64)> = (0..=12u32)
            .map(|n| {
                let mut tbl = SwTimerTable::new();
                for i in 0..n {
                    tbl.add_timer(t(i), 1000).unwrap();
                }
                (n as f64, tbl.master_tick(&cost).cost_ns as f64)
            })
            .collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!(((slope - 500.0) / 500.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn timer_expires_on_kth_tick(k in 1u64..300, others in proptest::collection::vec(1u64..300, 0..6)) {
            let cost = CostModel::default();
            let mut tbl = SwTimerTable::new();
            tbl.add_timer(t(0), k).unwrap();
            for (i, o) in others.iter().enumerate() {
                tbl.add_timer(t(i as u32 + 1), *o).unwrap();
            }
            for tick in 1..=k {
                let out = tbl.master_tick(&cost);
                prop_assert_eq!(out.expired.contains(&t(0)), tick == k);
                prop_assert_eq!(tbl.jiffies(), tick);
            }
            prop_assert_eq!(tbl.remaining(t(0)), None);
        }
    }
}
