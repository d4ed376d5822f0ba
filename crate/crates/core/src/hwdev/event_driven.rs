use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{check_ack, check_delay, check_slot_count, DeviceError, RegisterFile, SlotState, TimeManager, WakeSet};

/// Fast engine: slots store their absolute expiry cycle and a min-heap
/// yields the earliest one, so stepping costs `O(expiries · log n)` instead of
/// `O(cycles · n)`.
///
/// Time is tracked as a 128-bit count of cycles since reset, independent of
/// the software-visible system-time register (which `set_time` may rewrite).
#[derive(Debug, Clone)]
pub struct EventDriven {
    elapsed: u128,
    time_offset: u64,
    expiry: Vec<Option<u128>>,
    queue: BinaryHeap<Reverse<(u128, usize)>>,
    pending: WakeSet,
    regs: RegisterFile,
}

impl TimeManager for EventDriven {
    fn reset(n_slots: usize) -> Result<Self, DeviceError> {
        check_slot_count(n_slots)?;
        Ok(Self {
            elapsed: 0,
            time_offset: 0,
            expiry: vec![None; n_slots],
            queue: BinaryHeap::new(),
            pending: WakeSet::EMPTY,
            regs: RegisterFile::default(),
        })
    }

    fn n_slots(&self) -> usize {
        self.expiry.len()
    }

    fn step_cycles(&mut self, n: u64) {
        let target = self.elapsed + n as u128;
        // Jump from expiry to expiry until the window is exhausted.
        while let Some(&Reverse((at, slot))) = self.queue.peek() {
            if at > target {
                break;
            }
            self.queue.pop();
            self.elapsed = at;
            self.expiry[slot] = None;
            self.pending.insert(slot);
        }
        self.elapsed = target;
    }

    fn get_time(&self) -> u64 {
        // Truncation to 64 bits is the modular wrap of the hardware counter.
        (self.elapsed as u64).wrapping_add(self.time_offset)
    }

    fn set_time(&mut self, value: u64) {
        self.time_offset = value.wrapping_sub(self.elapsed as u64);
    }

    fn task_delay(&mut self, slot: usize, ticks: u64) -> Result<(), DeviceError> {
        check_delay(self, slot, ticks)?;
        let at = self.elapsed + ticks as u128;
        self.expiry[slot] = Some(at);
        self.queue.push(Reverse((at, slot)));
        Ok(())
    }

    fn get_tasks_to_wake(&self) -> WakeSet {
        self.pending
    }

    fn clear_task(&mut self, slot: usize) -> Result<(), DeviceError> {
        check_ack(self, slot)?;
        self.pending.remove(slot);
        Ok(())
    }

    fn slot(&self, slot: usize) -> SlotState {
        match self.expiry[slot] {
            Some(at) => SlotState {
                remaining: (at - self.elapsed) as u64,
                active: true,
            },
            None => SlotState::default(),
        }
    }

    fn cycles_to_next_expiry(&self) -> Option<u64> {
        self.queue.peek().map(|Reverse((at, _))| (*at - self.elapsed) as u64)
    }

    fn register_file(&mut self) -> &mut RegisterFile {
        &mut self.regs
    }
}
