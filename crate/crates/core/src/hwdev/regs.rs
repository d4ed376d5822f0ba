//! 32-bit register interface of the time manager.
//!
//! | Offset | Name         | Access | Semantics |
//! |--------|--------------|--------|-----------|
//! | `0x00` | `TIME_LO`    | R/W    | Read: low word of system time; latches the high word. Write: stages the low word of a new time. |
//! | `0x04` | `TIME_HI`    | R/W    | Read: high word latched by the last `TIME_LO` read. Write: commits `SetTime(hi:lo)`. |
//! | `0x08` | `DELAY_SLOT` | W      | Stages the slot index of the next delay. |
//! | `0x0C` | `DELAY_LO`   | W      | Stages the low word of the delay (cycles). |
//! | `0x10` | `DELAY_HI`   | W      | Commits `TaskDelay(slot, hi:lo)`. |
//! | `0x14` | `WAKE_MASK`  | R      | Pending wakes, bit `i` = slot `i`. Reading does not acknowledge. |
//! | `0x18` | `ACK`        | W      | `ClearTask(value)`. |
//!
//! Any other offset is a bus error. Reading a write-only register or writing a
//! read-only one is an access error. Multi-word sequences that are used out of
//! order are protocol errors: reading `TIME_HI` with nothing latched, writing
//! `TIME_HI` without a staged `TIME_LO`, or writing `DELAY_HI` before both
//! `DELAY_SLOT` and `DELAY_LO`. A commit consumes the staged words whether or
//! not the underlying operation succeeds.

use std::fmt;

use super::{DeviceError, TimeManager};

pub const REG_TIME_LO: u32 = 0x00;
pub const REG_TIME_HI: u32 = 0x04;
pub const REG_DELAY_SLOT: u32 = 0x08;
pub const REG_DELAY_LO: u32 = 0x0C;
pub const REG_DELAY_HI: u32 = 0x10;
pub const REG_WAKE_MASK: u32 = 0x14;
pub const REG_ACK: u32 = 0x18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegisterName {
    TimeLo,
    TimeHi,
    DelaySlot,
    DelayLo,
    DelayHi,
    WakeMask,
    Ack,
}

impl RegisterName {
    pub const ALL: [RegisterName; 7] = [
        RegisterName::TimeLo,
        RegisterName::TimeHi,
        RegisterName::DelaySlot,
        RegisterName::DelayLo,
        RegisterName::DelayHi,
        RegisterName::WakeMask,
        RegisterName::Ack,
    ];

    pub const fn offset(self) -> u32 {
        match self {
            RegisterName::TimeLo => REG_TIME_LO,
            RegisterName::TimeHi => REG_TIME_HI,
            RegisterName::DelaySlot => REG_DELAY_SLOT,
            RegisterName::DelayLo => REG_DELAY_LO,
            RegisterName::DelayHi => REG_DELAY_HI,
            RegisterName::WakeMask => REG_WAKE_MASK,
            RegisterName::Ack => REG_ACK,
        }
    }

    pub fn decode(addr: u32) -> Result<Self, DeviceError> {
        Self::ALL
            .into_iter()
            .find(|r| r.offset() == addr)
            .ok_or(DeviceError::Bus(addr))
    }

    pub const fn readable(self) -> bool {
        matches!(
            self,
            RegisterName::TimeLo | RegisterName::TimeHi | RegisterName::WakeMask
        )
    }

    pub const fn writable(self) -> bool {
        !matches!(self, RegisterName::WakeMask)
    }
}

impl fmt::Display for RegisterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegisterName::TimeLo => "TIME_LO",
            RegisterName::TimeHi => "TIME_HI",
            RegisterName::DelaySlot => "DELAY_SLOT",
            RegisterName::DelayLo => "DELAY_LO",
            RegisterName::DelayHi => "DELAY_HI",
            RegisterName::WakeMask => "WAKE_MASK",
            RegisterName::Ack => "ACK",
        })
    }
}

/// Latches and staging words behind the register interface.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegisterFile {
    time_hi_latch: Option<u32>,
    time_lo_stage: Option<u32>,
    delay_slot: Option<u32>,
    delay_lo: Option<u32>,
}

pub(super) fn read<D: TimeManager>(dev: &mut D, addr: u32) -> Result<u32, DeviceError> {
    let reg = RegisterName::decode(addr)?;
    if !reg.readable() {
        return Err(DeviceError::Access(reg, "readable"));
    }
    match reg {
        RegisterName::TimeLo => {
            let now = dev.get_time();
            dev.register_file().time_hi_latch = Some((now >> 32) as u32);
            Ok(now as u32)
        }
        RegisterName::TimeHi => dev
            .register_file()
            .time_hi_latch
            .take()
            .ok_or(DeviceError::Protocol("TIME_HI read without a preceding TIME_LO read")),
        RegisterName::WakeMask => Ok(dev.get_tasks_to_wake().bits()),
        _ => unreachable!("write-only registers rejected above"),
    }
}

pub(super) fn write<D: TimeManager>(dev: &mut D, addr: u32, value: u32) -> Result<(), DeviceError> {
    let reg = RegisterName::decode(addr)?;
    if !reg.writable() {
        return Err(DeviceError::Access(reg, "writable"));
    }
    match reg {
        RegisterName::TimeLo => dev.register_file().time_lo_stage = Some(value),
        RegisterName::TimeHi => {
            let lo = dev
                .register_file()
                .time_lo_stage
                .take()
                .ok_or(DeviceError::Protocol("TIME_HI written without a staged TIME_LO"))?;
            dev.set_time((value as u64) << 32 | lo as u64);
        }
        RegisterName::DelaySlot => dev.register_file().delay_slot = Some(value),
        RegisterName::DelayLo => dev.register_file().delay_lo = Some(value),
        RegisterName::DelayHi => {
            let regs = dev.register_file();
            let staged = (regs.delay_slot.take(), regs.delay_lo.take());
            let (Some(slot), Some(lo)) = staged else {
                return Err(DeviceError::Protocol(
                    "DELAY_HI written without staged DELAY_SLOT and DELAY_LO",
                ));
            };
            dev.task_delay(slot as usize, (value as u64) << 32 | lo as u64)?;
        }
        RegisterName::Ack => dev.clear_task(value as usize)?,
        RegisterName::WakeMask => unreachable!("read-only register rejected above"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hwdev::{CycleStepped, EventDriven, WakeSet};

    #[test]
    fn map_is_well_formed() {
        let offsets: Vec<u32> = RegisterName::ALL.iter().map(|r| r.offset()).collect();
        for (i, a) in offsets.iter().enumerate() {
            assert_eq!(a % 4, 0);
            assert!(!offsets[i + 1..].contains(a));
            assert_eq!(RegisterName::decode(*a).unwrap(), RegisterName::ALL[i]);
        }
    }

    #[test]
    fn wake_mask_encoding() {
        let mut dev = EventDriven::reset(4).unwrap();
        dev.task_delay(0, 3).unwrap();
        dev.task_delay(3, 3).unwrap();
        dev.step_cycles(3);
        assert_eq!(dev.read_register(REG_WAKE_MASK).unwrap(), 0b1001);
        dev.write_register(REG_ACK, 3).unwrap();
        assert_eq!(dev.read_register(REG_WAKE_MASK).unwrap(), 0b0001);
    }

    #[test]
    fn staged_delay_commit() {
        let mut dev = EventDriven::reset(4).unwrap();
        dev.write_register(REG_DELAY_SLOT, 2).unwrap();
        dev.write_register(REG_DELAY_LO, 100).unwrap();
        dev.write_register(REG_DELAY_HI, 0).unwrap();
        assert!(dev.slot(2).active);
        assert_eq!(dev.slot(2).remaining, 100);

        let mut big = CycleStepped::reset(1).unwrap();
        big.write_register(REG_DELAY_SLOT, 0).unwrap();
        big.write_register(REG_DELAY_LO, 7).unwrap();
        big.write_register(REG_DELAY_HI, 1).unwrap();
        assert_eq!(big.slot(0).remaining, (1 << 32) + 7);
    }

    #[test]
    fn latched_time_read_across_low_word_wrap() {
        let mut dev = CycleStepped::reset(1).unwrap();
        dev.set_time((1 << 32) - 1);
        let lo = dev.read_register(REG_TIME_LO).unwrap();
        dev.step_cycles(1);
        let hi = dev.read_register(REG_TIME_HI).unwrap();
        // time at the LO read, not a torn mix with the later high word
        assert_eq!((hi as u64) << 32 | lo as u64, (1 << 32) - 1);
        assert_eq!(dev.get_time(), 1 << 32);
    }

    #[test]
    fn set_time_through_registers() {
        let mut dev = EventDriven::reset(1).unwrap();
        dev.write_register(REG_TIME_LO, 0xDEAD_BEEF).unwrap();
        dev.write_register(REG_TIME_HI, 0x1234).unwrap();
        assert_eq!(dev.get_time(), 0x1234_DEAD_BEEF);
    }

    #[test]
    fn bus_access_and_protocol_errors() {
        let mut dev = EventDriven::reset(2).unwrap();
        assert_eq!(dev.read_register(0x1C), Err(DeviceError::Bus(0x1C)));
        assert_eq!(dev.write_register(0x02, 0), Err(DeviceError::Bus(0x02)));
        assert_eq!(
            dev.write_register(REG_WAKE_MASK, 1),
            Err(DeviceError::Access(RegisterName::WakeMask, "writable"))
        );
        assert_eq!(
            dev.read_register(REG_ACK),
            Err(DeviceError::Access(RegisterName::Ack, "readable"))
        );
        assert!(matches!(dev.read_register(REG_TIME_HI), Err(DeviceError::Protocol(_))));
        assert!(matches!(
            dev.write_register(REG_TIME_HI, 0),
            Err(DeviceError::Protocol(_))
        ));
        assert!(matches!(
            dev.write_register(REG_DELAY_HI, 0),
            Err(DeviceError::Protocol(_))
        ));

        // slot staged but no low word
        dev.write_register(REG_DELAY_SLOT, 1).unwrap();
        assert!(matches!(
            dev.write_register(REG_DELAY_HI, 0),
            Err(DeviceError::Protocol(_))
        ));
        // the failed commit consumed the staged slot
        dev.write_register(REG_DELAY_LO, 5).unwrap();
        assert!(matches!(
            dev.write_register(REG_DELAY_HI, 0),
            Err(DeviceError::Protocol(_))
        ));

        // the latch is consumed by the HI read
        dev.read_register(REG_TIME_LO).unwrap();
        dev.read_register(REG_TIME_HI).unwrap();
        assert!(matches!(dev.read_register(REG_TIME_HI), Err(DeviceError::Protocol(_))));

        // logical errors surface unchanged
        dev.write_register(REG_DELAY_SLOT, 0).unwrap();
        dev.write_register(REG_DELAY_LO, 0).unwrap();
        assert_eq!(dev.write_register(REG_DELAY_HI, 0), Err(DeviceError::InvalidDelay));
        assert_eq!(dev.write_register(REG_ACK, 1), Err(DeviceError::SpuriousAck(1)));
        assert_eq!(dev.get_tasks_to_wake(), WakeSet::EMPTY);
    }
}
