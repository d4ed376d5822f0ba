use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::hwdev::{EventDriven, TimeManager, WakeSet};
use crate::swtick::SwTimerTable;
use crate::timebase::{fpga_cycles_to_ns, ns_to_fpga_cycles, ns_to_master_ticks, Duration};
use crate::TaskId;

use super::{EventKind, EventTrace, Mode, Scenario, SimError, TaskRuntime, TaskState};

/// Queue priority at equal timestamps: releases first, then the master tick,
/// then task starts, then everything else in scheduling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    ReleaseDue { task: usize, k: u64 },
    MasterTick { j: u64 },
    TaskStart { task: usize },
    WakeDone { task: usize },
    AckWake { task: usize },
    IsrExit,
}

impl Action {
    fn class(self) -> u8 {
        match self {
            Action::ReleaseDue { .. } => 0,
            Action::MasterTick { .. } => 1,
            Action::TaskStart { .. } => 2,
            _ => 3,
        }
    }
}

#[derive(Default)]
struct Agenda {
    heap: BinaryHeap<Reverse<(u64, u8, u64, Action)>>,
    seq: u64,
}

impl Agenda {
    fn schedule(&mut self, at: u64, action: Action) {
        self.seq += 1;
        self.heap.push(Reverse((at, action.class(), self.seq, action)));
    }

    fn peek_time(&self) -> Option<u64> {
        self.heap.peek().map(|Reverse((t, ..))| *t)
    }

    fn pop(&mut self) -> Option<(u64, Action)> {
        self.heap.pop().map(|Reverse((t, _, _, a))| (t, a))
    }
}

/// State shared by both backends.
struct Run<'a> {
    sc: &'a Scenario,
    tasks: Vec<TaskRuntime>,
    done: Vec<bool>,
    agenda: Agenda,
    trace: EventTrace,
    cpu_free_at: u64,
}

impl<'a> Run<'a> {
    fn new(sc: &'a Scenario, hardware: bool) -> Self {
        let mut agenda = Agenda::default();
        let mut done = Vec::with_capacity(sc.tasks.len());
        let tasks = sc
            .tasks
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let first = spec.release(1).filter(|&r| r <= sc.duration_ns);
                if let Some(r) = first {
                    agenda.schedule(r, Action::ReleaseDue { task: i, k: 1 });
                    agenda.schedule(spec.initial_offset_ns, Action::TaskStart { task: i });
                }
                done.push(first.is_none());
                TaskRuntime {
                    spec: *spec,
                    state: TaskState::Ready,
                    release_index: 1,
                    next_release_ns: first.unwrap_or(u64::MAX),
                    slot: hardware.then_some(i),
                }
            })
            .collect();
        Self {
            sc,
            tasks,
            done,
            agenda,
            trace: EventTrace::default(),
            cpu_free_at: 0,
        }
    }

    fn id(&self, task: usize) -> TaskId {
        self.tasks[task].spec.id
    }

    fn release_due(&mut self, at: u64, task: usize, k: u64) {
        self.trace.push(at, EventKind::ReleaseDue, Some(self.id(task)), None);
        if let Some(next) = self.tasks[task].spec.release(k + 1) {
            if next <= self.sc.duration_ns {
                self.agenda.schedule(next, Action::ReleaseDue { task, k: k + 1 });
            }
        }
    }

    /// Marks the awaited release as serviced. Returns `false` once the task
    /// has no further release inside the horizon.
    fn advance_release(&mut self, task: usize) -> bool {
        let rt = &mut self.tasks[task];
        rt.state = TaskState::Ready;
        rt.release_index += 1;
        match rt.spec.release(rt.release_index) {
            Some(r) if r <= self.sc.duration_ns => {
                rt.next_release_ns = r;
                true
            }
            _ => {
                self.done[task] = true;
                false
            }
        }
    }

    fn woken(&mut self, at: u64, task: usize) {
        self.trace.push(at, EventKind::TaskWoken, Some(self.id(task)), None);
    }

    fn all_done(&self) -> bool {
        self.done.iter().all(|d| *d)
    }
}

/// Runs `sc` in `mode`. Hardware mode uses the event-driven device engine.
pub fn run_scenario(sc: &Scenario, mode: Mode) -> Result<EventTrace, SimError> {
    match mode {
        Mode::Software => run_software(sc),
        Mode::Hardware => run_hardware_with::<EventDriven>(sc),
    }
}

fn run_software(sc: &Scenario) -> Result<EventTrace, SimError> {
    sc.validate_for(Mode::Software)?;
    if sc.tasks.is_empty() {
        return Ok(EventTrace::default());
    }
    let base = sc.clock.base_period_ns();
    let mut run = Run::new(sc, false);
    let mut table = SwTimerTable::new();
    run.agenda.schedule(base, Action::MasterTick { j: 1 });

    // Arms the timer for the awaited release, waking immediately for releases
    // that are already behind the tick count.
    let wait = |run: &mut Run, table: &mut SwTimerTable, task: usize, now: u64| -> Result<(), SimError> {
        loop {
            let rt = &run.tasks[task];
            let target = ns_to_master_ticks(Duration::ns(rt.next_release_ns), &sc.clock)?.value();
            if target > table.jiffies() {
                table.add_timer(rt.spec.id, target - table.jiffies())?;
                run.tasks[task].state = TaskState::Waiting;
                return Ok(());
            }
            run.woken(now, task);
            if !run.advance_release(task) {
                return Ok(());
            }
        }
    };

    let index_of = |id: TaskId| {
        sc.tasks
            .iter()
            .position(|t| t.id == id)
            .expect("timer for a known task")
    };

    while let Some((now, action)) = run.agenda.pop() {
        match action {
            Action::ReleaseDue { task, k } => run.release_due(now, task, k),
            Action::TaskStart { task } => wait(&mut run, &mut table, task, now)?,
            Action::MasterTick { j } => {
                let enter = now.max(run.cpu_free_at);
                let out = table.master_tick(&sc.cost);
                run.trace.push(enter, EventKind::MasterTick, None, Some(out.cost_ns));
                let exit = enter + out.cost_ns;
                run.cpu_free_at = exit;
                for id in out.expired {
                    run.agenda.schedule(exit, Action::WakeDone { task: index_of(id) });
                }
                let next = (j + 1) * base;
                if next <= sc.duration_ns || !run.all_done() {
                    run.agenda.schedule(next, Action::MasterTick { j: j + 1 });
                }
            }
            Action::WakeDone { task } => {
                run.woken(now, task);
                if run.advance_release(task) {
                    wait(&mut run, &mut table, task, now)?;
                }
            }
            Action::AckWake { .. } | Action::IsrExit => unreachable!("hardware-only action"),
        }
    }
    Ok(run.trace)
}

/// Runs `sc` in hardware mode on device engine `D`.
///
/// Exposed so the event-driven engine can be checked end to end against the
/// cycle-stepped reference.
pub fn run_hardware_with<D: TimeManager>(sc: &Scenario) -> Result<EventTrace, SimError> {
    sc.validate_for(Mode::Hardware)?;
    if sc.tasks.is_empty() {
        return Ok(EventTrace::default());
    }
    let clk = sc.clock;
    let cost = sc.cost;
    let mut run = Run::new(sc, true);
    let mut dev = D::reset(sc.n_slots)?;
    let mut isr_active = false;

    let cycles_to_ns = |c: u64| fpga_cycles_to_ns(Duration::fpga_cycles(c), &clk).map(|d| d.value());

    let wait = |run: &mut Run, dev: &mut D, task: usize, now: u64| -> Result<(), SimError> {
        loop {
            let rt = &run.tasks[task];
            let target = ns_to_fpga_cycles(Duration::ns(rt.next_release_ns), &clk)?.value();
            let current = dev.get_time();
            if target > current {
                dev.task_delay(rt.slot.expect("hardware task owns a slot"), target - current)?;
                run.tasks[task].state = TaskState::Waiting;
                return Ok(());
            }
            run.woken(now, task);
            if !run.advance_release(task) {
                return Ok(());
            }
        }
    };

    // ISR entry: one read of the pending set, then ack + wake per task.
    let enter_isr = |run: &mut Run, dev: &D, now: u64| {
        let batch: WakeSet = dev.get_tasks_to_wake();
        let total = cost.hw_isr_cost(batch.len());
        run.trace.push(now, EventKind::IsrEnter, None, Some(total));
        for (i, slot) in batch.iter().enumerate() {
            let at = now + cost.hw_isr_cost(i + 1);
            run.agenda.schedule(at, Action::AckWake { task: slot });
        }
        run.agenda.schedule(now + total, Action::IsrExit);
        run.cpu_free_at = now + total;
    };

    loop {
        let device_next = match dev.cycles_to_next_expiry() {
            Some(c) => {
                let at_cycle = dev.get_time() + c;
                Some((cycles_to_ns(at_cycle)?, c))
            }
            None => None,
        };
        let agenda_next = run.agenda.peek_time();

        if let Some((t_expiry, c)) = device_next.filter(|(t, _)| agenda_next.is_none_or(|a| *t <= a)) {
            let before = dev.get_tasks_to_wake();
            dev.step_cycles(c);
            let fresh = dev.get_tasks_to_wake().bits() & !before.bits();
            for slot in WakeSet::from_bits(fresh).iter() {
                run.trace.push(t_expiry, EventKind::IrqRaised, Some(run.id(slot)), None);
            }
            if !isr_active && dev.irq_line() {
                isr_active = true;
                enter_isr(&mut run, &dev, t_expiry);
            }
            continue;
        }

        let Some((now, action)) = run.agenda.pop() else {
            break;
        };
        let target = clk.device_cycle_at(now)?;
        if target > dev.get_time() {
            dev.step_cycles(target - dev.get_time());
        }
        match action {
            Action::ReleaseDue { task, k } => run.release_due(now, task, k),
            Action::TaskStart { task } => wait(&mut run, &mut dev, task, now)?,
            Action::AckWake { task } => {
                dev.clear_task(run.tasks[task].slot.expect("hardware task owns a slot"))?;
                run.trace.push(now, EventKind::AckSent, Some(run.id(task)), None);
                run.woken(now, task);
                if run.advance_release(task) {
                    wait(&mut run, &mut dev, task, now)?;
                }
            }
            Action::IsrExit => {
                run.trace.push(now, EventKind::IsrExit, None, None);
                isr_active = false;
                if dev.irq_line() {
                    isr_active = true;
                    enter_isr(&mut run, &dev, now);
                }
            }
            Action::MasterTick { .. } | Action::WakeDone { .. } => unreachable!("software-only action"),
        }
    }
    Ok(run.trace)
}
