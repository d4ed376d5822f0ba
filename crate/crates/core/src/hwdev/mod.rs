//! Behavioral model of the hardware time manager.
//!
//! The device has two blocks: a free-running 64-bit system-time counter and an
//! array of per-task 64-bit down-counters ("slots"). A slot that reaches zero
//! is flagged as a pending wake and holds the interrupt line high until the CPU
//! acknowledges it. The line is level-triggered: it stays asserted as long as
//! any wake is pending.
//!
//! Two engines implement [`TimeManager`]:
//!
//! * [`CycleStepped`] advances one cycle at a time and is the reference.
//! * [`EventDriven`] jumps straight to the next expiry and is what the
//!   simulator uses. Both must produce identical [`DeviceSnapshot`]s.
//!
//! The CPU-facing 32-bit register interface is described in [`regs`].

mod event_driven;
mod reference;
pub mod regs;

use std::fmt;

use thiserror::Error;

pub use event_driven::EventDriven;
pub use reference::CycleStepped;
pub use regs::{RegisterFile, RegisterName};

/// Slots that fit in the 32-bit WAKE_MASK register.
pub const MAX_SLOTS: usize = 32;

/// Slot count of the reference platform.
pub const DEFAULT_SLOTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("device needs between 1 and {MAX_SLOTS} slots, got {0}")]
    SlotCount(usize),
    #[error("slot {slot} out of range (device has {n_slots} slots)")]
    SlotOutOfRange { slot: usize, n_slots: usize },
    #[error("a delay of zero cycles is not allowed")]
    InvalidDelay,
    #[error("slot {0} is still active or awaiting acknowledgment")]
    SlotBusy(usize),
    #[error("acknowledgment for slot {0}, which has no pending wake")]
    SpuriousAck(usize),
    #[error("bus error: no register at offset {0:#x}")]
    Bus(u32),
    #[error("register {0} is not {1}")]
    Access(RegisterName, &'static str),
    #[error("register protocol violation: {0}")]
    Protocol(&'static str),
}

/// Set of slot indices, bit `i` standing for slot `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct WakeSet(u32);

impl WakeSet {
    pub const EMPTY: WakeSet = WakeSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, slot: usize) -> bool {
        slot < MAX_SLOTS && self.0 & (1 << slot) != 0
    }

    pub fn insert(&mut self, slot: usize) {
        self.0 |= 1 << slot;
    }

    pub fn remove(&mut self, slot: usize) {
        self.0 &= !(1 << slot);
    }

    /// Slot indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_SLOTS).filter(move |&i| self.0 & (1 << i) != 0)
    }
}

impl fmt::Debug for WakeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for WakeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = WakeSet::EMPTY;
        for i in iter {
            set.insert(i);
        }
        set
    }
}

/// Observable state of one waiting-task counter.
///
/// An inactive slot always reads `remaining == 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotState {
    pub remaining: u64,
    pub active: bool,
}

/// Everything the CPU (or a test) can observe about the device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSnapshot {
    pub system_time: u64,
    pub slots: Vec<SlotState>,
    pub pending: WakeSet,
    pub irq_line: bool,
}

pub(crate) fn check_slot_count(n_slots: usize) -> Result<(), DeviceError> {
    if (1..=MAX_SLOTS).contains(&n_slots) {
        Ok(())
    } else {
        Err(DeviceError::SlotCount(n_slots))
    }
}

/// The five logical operations of the time manager plus clocking.
///
/// Register access is provided on top of the logical operations, so every
/// implementation gets an identical bus protocol.
pub trait TimeManager: Sized {
    fn reset(n_slots: usize) -> Result<Self, DeviceError>;

    fn n_slots(&self) -> usize;

    /// Advances the device by `n` clock cycles.
    fn step_cycles(&mut self, n: u64);

    fn get_time(&self) -> u64;

    /// Overwrites the system-time counter. Slots are not affected.
    fn set_time(&mut self, value: u64);

    /// Loads `slot` so that it expires exactly `ticks` cycles from now.
    fn task_delay(&mut self, slot: usize, ticks: u64) -> Result<(), DeviceError>;

    /// Pending wakes. Reading does not acknowledge.
    fn get_tasks_to_wake(&self) -> WakeSet;

    fn clear_task(&mut self, slot: usize) -> Result<(), DeviceError>;

    fn irq_line(&self) -> bool {
        !self.get_tasks_to_wake().is_empty()
    }

    fn slot(&self, slot: usize) -> SlotState;

    /// Cycles until the earliest active slot expires, if any slot is active.
    fn cycles_to_next_expiry(&self) -> Option<u64>;

    fn register_file(&mut self) -> &mut RegisterFile;

    fn snapshot(&self) -> DeviceSnapshot {
        DeviceSnapshot {
            system_time: self.get_time(),
            slots: (0..self.n_slots()).map(|i| self.slot(i)).collect(),
            pending: self.get_tasks_to_wake(),
            irq_line: self.irq_line(),
        }
    }

    fn read_register(&mut self, addr: u32) -> Result<u32, DeviceError> {
        regs::read(self, addr)
    }

    fn write_register(&mut self, addr: u32, value: u32) -> Result<(), DeviceError> {
        regs::write(self, addr, value)
    }
}

/// Validation shared by both engines before a slot is loaded.
pub(crate) fn check_delay<D: TimeManager>(dev: &D, slot: usize, ticks: u64) -> Result<(), DeviceError> {
    if slot >= dev.n_slots() {
        return Err(DeviceError::SlotOutOfRange {
            slot,
            n_slots: dev.n_slots(),
        });
    }
    if ticks == 0 {
        return Err(DeviceError::InvalidDelay);
    }
    if dev.slot(slot).active || dev.get_tasks_to_wake().contains(slot) {
        return Err(DeviceError::SlotBusy(slot));
    }
    Ok(())
}

pub(crate) fn check_ack<D: TimeManager>(dev: &D, slot: usize) -> Result<(), DeviceError> {
    if slot >= dev.n_slots() {
        return Err(DeviceError::SlotOutOfRange {
            slot,
            n_slots: dev.n_slots(),
        });
    }
    if !dev.get_tasks_to_wake().contains(slot) {
        return Err(DeviceError::SpuriousAck(slot));
    }
    Ok(())
}
