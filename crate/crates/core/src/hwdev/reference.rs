use super::{check_ack, check_delay, check_slot_count, DeviceError, RegisterFile, SlotState, TimeManager, WakeSet};

/// Reference engine: every call to [`TimeManager::step_cycles`] simulates the
/// requested number of clock edges one by one, exactly as the counters in the
/// fabric would.
///
/// It is slow on long spans and only meant as an oracle.
#[derive(Debug, Clone)]
pub struct CycleStepped {
    system_time: u64,
    slots: Vec<SlotState>,
    pending: WakeSet,
    regs: RegisterFile,
}

impl CycleStepped {
    fn clock_edge(&mut self) {
        self.system_time = self.system_time.wrapping_add(1);
        for (i, slot) in self.slots.iter_mut().enumerate() {
            if !slot.active {
                continue;
            }
            slot.remaining -= 1;
            if slot.remaining == 0 {
                slot.active = false;
                self.pending.insert(i);
            }
        }
    }
}

impl TimeManager for CycleStepped {
    fn reset(n_slots: usize) -> Result<Self, DeviceError> {
        check_slot_count(n_slots)?;
        Ok(Self {
            system_time: 0,
            slots: vec![SlotState::default(); n_slots],
            pending: WakeSet::EMPTY,
            regs: RegisterFile::default(),
        })
    }

    fn n_slots(&self) -> usize {
        self.slots.len()
    }

    fn step_cycles(&mut self, n: u64) {
        for _ in 0..n {
            self.clock_edge();
        }
    }

    fn get_time(&self) -> u64 {
        self.system_time
    }

    fn set_time(&mut self, value: u64) {
        self.system_time = value;
    }

    fn task_delay(&mut self, slot: usize, ticks: u64) -> Result<(), DeviceError> {
        check_delay(self, slot, ticks)?;
        self.slots[slot] = SlotState {
            remaining: ticks,
            active: true,
        };
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
        self.slots[slot]
    }

    fn cycles_to_next_expiry(&self) -> Option<u64> {
        self.slots.iter().filter(|s| s.active).map(|s| s.remaining).min()
    }

    fn register_file(&mut self) -> &mut RegisterFile {
        &mut self.regs
    }
}
