use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::TaskId;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// The ideal instant a periodic task should be released.
    ReleaseDue,
    /// Software master tick handler entry; carries the handler cost.
    MasterTick,
    /// A device slot expired for the given task.
    IrqRaised,
    /// Wake-up ISR entry; carries the ISR cost.
    IsrEnter,
    TaskWoken,
    AckSent,
    IsrExit,
}

impl EventKind {
    pub const fn as_str(self) -> &'static str {
        match self {
            EventKind::ReleaseDue => "release_due",
            EventKind::MasterTick => "master_tick",
            EventKind::IrqRaised => "irq_raised",
            EventKind::IsrEnter => "isr_enter",
            EventKind::TaskWoken => "task_woken",
            EventKind::AckSent => "ack_sent",
            EventKind::IsrExit => "isr_exit",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "release_due" => EventKind::ReleaseDue,
            "master_tick" => EventKind::MasterTick,
            "irq_raised" => EventKind::IrqRaised,
            "isr_enter" => EventKind::IsrEnter,
            "task_woken" => EventKind::TaskWoken,
            "ack_sent" => EventKind::AckSent,
            "isr_exit" => EventKind::IsrExit,
            other => return Err(format!("unknown event kind `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub timestamp_ns: u64,
    pub kind: EventKind,
    pub task: Option<TaskId>,
    pub cost_ns: Option<u64>,
}

pub const TRACE_CSV_HEADER: &str = "timestamp_ns,kind,task_id,cost_ns";

/// Time-ordered record of everything that happened during a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTrace {
    events: Vec<TraceEvent>,
}

impl EventTrace {
    pub(crate) fn push(&mut self, timestamp_ns: u64, kind: EventKind, task: Option<TaskId>, cost_ns: Option<u64>) {
        debug_assert!(self.events.last().is_none_or(|e| e.timestamp_ns <= timestamp_ns));
        self.events.push(TraceEvent {
            timestamp_ns,
            kind,
            task,
            cost_ns,
        });
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    fn for_task(&self, kind: EventKind, task: TaskId) -> impl Iterator<Item = &TraceEvent> {
        self.of_kind(kind).filter(move |e| e.task == Some(task))
    }

    /// Every `(task, release index)` that was woken, in trace order.
    /// Release indices start at 1.
    pub fn wake_events(&self) -> Vec<(TaskId, u64)> {
        let mut counts = std::collections::BTreeMap::new();
        self.of_kind(EventKind::TaskWoken)
            .filter_map(|e| e.task)
            .map(|t| {
                let k = counts.entry(t).or_insert(0u64);
                *k += 1;
                (t, *k)
            })
            .collect()
    }

    /// Total cost of the handlers (master ticks and ISRs) entered at or
    /// before `window_end_ns`.
    pub fn handler_cost_until(&self, window_end_ns: u64) -> u64 {
        self.events
            .iter()
            .filter(|e| e.timestamp_ns <= window_end_ns)
            .filter_map(|e| e.cost_ns)
            .sum()
    }

    /// Number of wakes serviced by each ISR entered at or before
    /// `window_end_ns`, in order.
    pub fn isr_batches_until(&self, window_end_ns: u64) -> Vec<u64> {
        let mut batches = Vec::new();
        let mut current = None;
        for e in &self.events {
            match e.kind {
                EventKind::IsrEnter if e.timestamp_ns > window_end_ns => break,
                EventKind::IsrEnter => current = Some(0),
                EventKind::AckSent => {
                    if let Some(b) = current.as_mut() {
                        *b += 1;
                    }
                }
                EventKind::IsrExit => batches.extend(current.take()),
                _ => {}
            }
        }
        batches
    }

    pub fn release_count(&self) -> usize {
        self.of_kind(EventKind::ReleaseDue).count()
    }

    /// Per-release wake latency (`task_woken − release_due`) of one task.
    pub fn wake_latency(&self, task: TaskId) -> Result<Vec<u64>, SimError> {
        let releases: Vec<u64> = self
            .for_task(EventKind::ReleaseDue, task)
            .map(|e| e.timestamp_ns)
            .collect();
        if releases.is_empty() {
            return Err(SimError::UnknownTask(task));
        }
        let wakes = self.for_task(EventKind::TaskWoken, task).map(|e| e.timestamp_ns);
        Ok(releases.iter().zip(wakes).map(|(r, w)| w - r).collect())
    }

    /// Per-release delay between the ideal release and the instant the time
    /// manager noticed it: the slot expiry in hardware mode, the master tick
    /// handler entry in software mode. Handler execution time is excluded.
    pub fn quantization_errors(&self, task: TaskId) -> Result<Vec<u64>, SimError> {
        let mut out = Vec::new();
        let mut releases = std::collections::VecDeque::new();
        let mut last_tick: Option<u64> = None;
        let mut last_irq: Option<u64> = None;
        for e in &self.events {
            match e.kind {
                EventKind::MasterTick => last_tick = Some(e.timestamp_ns),
                EventKind::IrqRaised if e.task == Some(task) => last_irq = Some(e.timestamp_ns),
                EventKind::ReleaseDue if e.task == Some(task) => releases.push_back(e.timestamp_ns),
                EventKind::TaskWoken if e.task == Some(task) => {
                    let Some(release) = releases.pop_front() else {
                        continue;
                    };
                    let trigger = [last_irq, last_tick]
                        .into_iter()
                        .flatten()
                        .filter(|&t| t >= release)
                        .max()
                        .unwrap_or(e.timestamp_ns);
                    out.push(trigger - release);
                }
                _ => {}
            }
        }
        if out.is_empty() && self.for_task(EventKind::ReleaseDue, task).next().is_none() {
            return Err(SimError::UnknownTask(task));
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for e in &self.events {
            write!(w, "{},{},", e.timestamp_ns, e.kind)?;
            if let Some(t) = e.task {
                write!(w, "{t}")?;
            }
            w.write_all(b",")?;
            if let Some(c) = e.cost_ns {
                write!(w, "{c}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace CSV is ASCII")
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_CSV_HEADER) {
            return Err("missing trace CSV header".into());
        }
        let mut trace = EventTrace::default();
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            let [ts, kind, task, cost] = cols[..] else {
                return Err(format!("line {}: expected 4 columns", n + 2));
            };
            let opt = |s: &str| -> Result<Option<u64>, String> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|e| format!("line {}: {e}", n + 2))
                }
            };
            trace.events.push(TraceEvent {
                timestamp_ns: ts.parse().map_err(|e| format!("line {}: {e}", n + 2))?,
                kind: kind.parse()?,
                task: if task.is_empty() {
                    None
                } else {
                    Some(TaskId(task.parse().map_err(|e| format!("line {}: {e}", n + 2))?))
                },
                cost_ns: opt(cost)?,
            });
        }
        Ok(trace)
    }
}
