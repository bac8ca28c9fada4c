use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    AttemptStart,
    Herald { success: bool },
    Reinit,
    SwitchReconfig,
    GateDone,
    MeasureDone,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::AttemptStart => "attempt_start",
            EventKind::Herald { success: true } => "herald_success",
            EventKind::Herald { success: false } => "herald_fail",
            EventKind::Reinit => "reinit",
            EventKind::SwitchReconfig => "switch_reconfig",
            EventKind::GateDone => "gate_done",
            EventKind::MeasureDone => "measure_done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    /// Seconds since the start of the run.
    pub time: f64,
    pub kind: EventKind,
    pub elu_id: usize,
    pub port_id: usize,
    pub request_id: usize,
}

struct Entry<T> {
    time: f64,
    seq: u64,
    event: SimEvent,
    payload: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Entry<T> {}

impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Entry<T> {
    // Reversed so the max-heap pops the earliest event; ties by insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Time-ordered queue with FIFO tie-breaking and a causality check.
pub struct EventQueue<T> {
    heap: BinaryHeap<Entry<T>>,
    now: f64,
    seq: u64,
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: 0.0,
            seq: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn push(&mut self, event: SimEvent, payload: T) -> Result<()> {
        if !(event.time >= self.now) {
            return Err(Error::Domain(format!(
                "event at {} scheduled before current time {}",
                event.time, self.now
            )));
        }
        self.heap.push(Entry {
            time: event.time,
            seq: self.seq,
            event,
            payload,
        });
        self.seq += 1;
        Ok(())
    }

    pub fn pop(&mut self) -> Option<(SimEvent, T)> {
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.event, e.payload))
    }
}

pub const EVENT_LOG_HEADER: &str = "time_s,kind,elu,port,request";

/// Ordered record of processed events.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn push(&mut self, e: SimEvent) {
        self.events.push(e);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * (self.events.len() + 1));
        s.push_str(EVENT_LOG_HEADER);
        s.push('\n');
        for e in &self.events {
            let _ = writeln!(
                s,
                "{:e},{},{},{},{}",
                e.time,
                e.kind.name(),
                e.elu_id,
                e.port_id,
                e.request_id
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, r: usize) -> SimEvent {
        SimEvent {
            time: t,
            kind: EventKind::GateDone,
            elu_id: 0,
            port_id: 0,
            request_id: r,
        }
    }

    #[test]
    fn pops_in_time_then_insertion_order() {
        let mut q = EventQueue::new();
        q.push(ev(2.0, 0), ()).unwrap();
        q.push(ev(1.0, 1), ()).unwrap();
        q.push(ev(1.0, 2), ()).unwrap();
        let order: Vec<usize> = std::iter::from_fn(|| q.pop().map(|(e, _)| e.request_id)).collect();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn rejects_past_events() {
        let mut q = EventQueue::new();
        q.push(ev(1.0, 0), ()).unwrap();
        q.pop();
        assert!(q.push(ev(0.5, 1), ()).is_err());
        assert!(q.push(ev(f64::NAN, 1), ()).is_err());
        assert!(q.push(ev(1.0, 1), ()).is_ok());
    }

    #[test]
    fn csv_format() {
        let mut log = EventLog::default();
        log.push(SimEvent {
            time: 1.5e-6,
            kind: EventKind::Herald { success: true },
            elu_id: 1,
            port_id: 2,
            request_id: 3,
        });
        assert_eq!(log.to_csv(), "time_s,kind,elu,port,request\n1.5e-6,herald_success,1,2,3\n");
    }
}
