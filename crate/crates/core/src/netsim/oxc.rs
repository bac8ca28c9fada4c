use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type CircuitId = u64;
pub type TicketId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grant {
    Granted(CircuitId),
    Queued(TicketId),
}

/// A ticket that was waiting and has now been connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Granted {
    pub ticket: TicketId,
    pub circuit: CircuitId,
    pub ports: (usize, usize),
}

/// Non-blocking optical crossconnect routing port pairs onto Bell-state
/// detectors.
#[derive(Debug, Clone)]
pub struct OXCSwitch {
    n_ports: usize,
    capacity: usize,
    busy: Vec<bool>,
    active: BTreeMap<CircuitId, (usize, usize)>,
    queue: VecDeque<(TicketId, usize, usize)>,
    next_id: u64,
    peak: usize,
}

impl OXCSwitch {
    /// Switch with ⌊n_ports/2⌋ detectors.
    pub fn new(n_ports: usize) -> Self {
        Self::with_detectors(n_ports, n_ports / 2)
    }

    /// Switch with fewer detectors than the non-blocking maximum.
    pub fn with_detectors(n_ports: usize, detectors: usize) -> Self {
        Self {
            n_ports,
            capacity: detectors.min(n_ports / 2),
            busy: vec![false; n_ports],
            active: BTreeMap::new(),
            queue: VecDeque::new(),
            next_id: 0,
            peak: 0,
        }
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn active(&self) -> usize {
        self.active.len()
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Largest number of simultaneous circuits seen so far.
    pub fn peak(&self) -> usize {
        self.peak
    }

    fn check_port(&self, p: usize) -> Result<()> {
        if p >= self.n_ports {
            return Err(Error::InvalidPort {
                port: p,
                n_ports: self.n_ports,
            });
        }
        Ok(())
    }

    fn can_connect(&self, a: usize, b: usize) -> bool {
        !self.busy[a] && !self.busy[b] && self.active.len() < self.capacity
    }

    fn connect(&mut self, a: usize, b: usize) -> CircuitId {
        let id = self.next_id;
        self.next_id += 1;
        self.busy[a] = true;
        self.busy[b] = true;
        self.active.insert(id, (a, b));
        self.peak = self.peak.max(self.active.len());
        id
    }

    /// Connects `a` to `b` now if both ports are idle and a detector is free,
    /// otherwise queues the request.
    pub fn request(&mut self, a: usize, b: usize) -> Result<Grant> {
        self.check_port(a)?;
        self.check_port(b)?;
        if a == b {
            return Err(invalid("port", "a circuit needs two distinct ports"));
        }
        if self.can_connect(a, b) {
            Ok(Grant::Granted(self.connect(a, b)))
        } else {
            let t = self.next_id;
            self.next_id += 1;
            self.queue.push_back((t, a, b));
            Ok(Grant::Queued(t))
        }
    }

    /// Tears down a circuit and grants queued requests in arrival order.
    pub fn release(&mut self, id: CircuitId) -> Result<Vec<Granted>> {
        let (a, b) = self
            .active
            .remove(&id)
            .ok_or_else(|| invalid("circuit", format!("{id} is not active")))?;
        self.busy[a] = false;
        self.busy[b] = false;
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.queue.len() {
            let (t, qa, qb) = self.queue[i];
            if self.can_connect(qa, qb) {
                self.queue.remove(i);
                let c = self.connect(qa, qb);
                out.push(Granted {
                    ticket: t,
                    circuit: c,
                    ports: (qa, qb),
                });
            } else {
                i += 1;
            }
        }
        Ok(out)
    }

    /// Port pairs currently connected.
    pub fn circuits(&self) -> impl Iterator<Item = (CircuitId, (usize, usize))> + '_ {
        self.active.iter().map(|(&k, &v)| (k, v))
    }

    pub fn check_invariants(&self) -> bool {
        let mut seen = vec![false; self.n_ports];
        for &(a, b) in self.active.values() {
            if seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
        }
        self.active.len() <= self.n_ports / 2 && self.active.len() <= self.capacity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_switch_grants() {
        let mut s = OXCSwitch::new(8);
        assert!(matches!(s.request(0, 5).unwrap(), Grant::Granted(_)));
    }

    #[test]
    fn full_switch_queues() {
        let mut s = OXCSwitch::new(8);
        for i in 0..4 {
            assert!(matches!(s.request(2 * i, 2 * i + 1).unwrap(), Grant::Granted(_)));
        }
        assert!(matches!(s.request(0, 7).unwrap(), Grant::Queued(_)));
        let mut s = OXCSwitch::with_detectors(8, 1);
        s.request(0, 1).unwrap();
        assert!(matches!(s.request(2, 3).unwrap(), Grant::Queued(_)));
    }

    #[test]
    fn bad_ports() {
        let mut s = OXCSwitch::new(4);
        assert_eq!(s.request(0, 4), Err(Error::InvalidPort { port: 4, n_ports: 4 }));
        assert!(s.request(1, 1).is_err());
        assert!(s.release(99).is_err());
    }

    #[test]
    fn fifo_after_release() {
        // Replay: one detector, three waiting requests; releases must serve
        // them in arrival order.
        let mut s = OXCSwitch::with_detectors(10, 1);
        let Grant::Granted(mut live) = s.request(0, 1).unwrap() else { panic!() };
        let tickets: Vec<TicketId> = [(2, 3), (4, 5), (6, 7)]
            .iter()
            .map(|&(a, b)| match s.request(a, b).unwrap() {
                Grant::Queued(t) => t,
                Grant::Granted(_) => panic!("should queue"),
            })
            .collect();
        let mut served = Vec::new();
        for _ in 0..3 {
            let g = s.release(live).unwrap();
            assert_eq!(g.len(), 1);
            served.push(g[0].ticket);
            live = g[0].circuit;
            // A later arrival must not jump the queue.
            if s.queued() > 0 {
                assert!(matches!(s.request(8, 9).unwrap(), Grant::Queued(_)));
            }
        }
        assert_eq!(served, tickets);
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity(ops in proptest::collection::vec((0usize..12, 0usize..12, any::<bool>()), 1..200)) {
            let mut s = OXCSwitch::new(12);
            let mut live: Vec<CircuitId> = Vec::new();
            for (a, b, rel) in ops {
                if rel && !live.is_empty() {
                    let id = live.remove(a % live.len());
                    for g in s.release(id).unwrap() {
                        live.push(g.circuit);
                    }
                } else if a != b {
                    if let Grant::Granted(id) = s.request(a, b).unwrap() {
                        live.push(id);
                    }
                }
                prop_assert!(s.check_invariants());
                prop_assert!(s.active() <= 6);
                prop_assert_eq!(s.active(), live.len());
            }
        }
    }
}
