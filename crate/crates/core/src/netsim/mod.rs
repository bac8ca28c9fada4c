//! Discrete-event model of the photonic fabric: heralded link attempts,
//! port and time-division multiplexing, the optical crossconnect and the
//! teleported Toffoli pipeline.

mod engine;
mod event;
mod oxc;
mod pipeline;

pub use engine::{
    run_link_sim, run_link_sim_with, FeedbackWindow, LinkSimConfig, LinkSimResult, SamplingMode,
    SimSummary, DEFAULT_HERALD_LATENCY,
};
pub use event::{EventKind, EventLog, EventQueue, SimEvent, EVENT_LOG_HEADER};
pub use oxc::{CircuitId, Grant, Granted, OXCSwitch, TicketId};
pub use pipeline::{run_toffoli_pipeline, run_toffoli_pipeline_with, PipelineConfig, PipelineResult};

use serde::{Deserialize, Serialize};

use crate::arch::MusiqcLayout;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitRole {
    Memory,
    Communication { port: u32, slot: u32 },
}

/// Qubit bookkeeping for one ELU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EluState {
    pub n_qubits: u32,
    pub ports: u32,
    pub tdm_slots: u32,
    pub roles: Vec<QubitRole>,
    /// Time at which each qubit next becomes free.
    pub busy_until: Vec<f64>,
}

impl EluState {
    /// The first `ports * tdm_slots` qubits are communication ions, the rest
    /// are memory.
    pub fn new(n_qubits: u32, ports: u32, tdm_slots: u32) -> Result<Self> {
        if ports == 0 || tdm_slots == 0 {
            return Err(invalid("ports", "an ELU needs at least one port and one slot"));
        }
        let comm = ports as u64 * tdm_slots as u64;
        if comm > n_qubits as u64 {
            return Err(invalid(
                "n_qubits",
                format!("{comm} communication ions do not fit in {n_qubits} qubits"),
            ));
        }
        let mut roles = Vec::with_capacity(n_qubits as usize);
        for port in 0..ports {
            for slot in 0..tdm_slots {
                roles.push(QubitRole::Communication { port, slot });
            }
        }
        roles.resize(n_qubits as usize, QubitRole::Memory);
        Ok(Self {
            n_qubits,
            ports,
            tdm_slots,
            roles,
            busy_until: vec![0.0; n_qubits as usize],
        })
    }

    /// ELU with `m_p` active ports of `m_T` ions each.
    pub fn from_layout(layout: &MusiqcLayout) -> Result<Self> {
        Self::new(layout.elu_qubits, layout.m_p, layout.m_t)
    }

    pub fn comm_qubit(&self, port: u32, slot: u32) -> Option<usize> {
        (port < self.ports && slot < self.tdm_slots)
            .then(|| (port * self.tdm_slots + slot) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.roles.len() != self.n_qubits as usize || self.busy_until.len() != self.roles.len() {
            return Err(invalid("roles", "one role and one busy time per qubit"));
        }
        let mut per_port = vec![0u32; self.ports as usize];
        for r in &self.roles {
            if let QubitRole::Communication { port, slot } = *r {
                if port >= self.ports || slot >= self.tdm_slots {
                    return Err(invalid("roles", "communication ion outside the port grid"));
                }
                per_port[port as usize] += 1;
            }
        }
        if per_port.iter().any(|&c| c > self.tdm_slots) {
            return Err(invalid("roles", "more communication ions on a port than TDM slots"));
        }
        Ok(())
    }
}

/// Bell pairs wanted between two ELUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntanglementRequest {
    pub elu_a: usize,
    pub elu_b: usize,
    pub pairs_needed: u64,
    pub completed: u64,
}

impl EntanglementRequest {
    pub fn new(elu_a: usize, elu_b: usize, pairs_needed: u64) -> Self {
        Self {
            elu_a,
            elu_b,
            pairs_needed,
            completed: 0,
        }
    }

    pub fn is_done(&self) -> bool {
        self.completed >= self.pairs_needed
    }

    /// Counts one heralded pair. Returns false once the request is full.
    pub fn record(&mut self) -> bool {
        if self.is_done() {
            return false;
        }
        self.completed += 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elu_roles() {
        let e = EluState::from_layout(&MusiqcLayout::default()).unwrap();
        assert_eq!(e.roles.iter().filter(|r| **r != QubitRole::Memory).count(), 20);
        assert_eq!(e.comm_qubit(1, 9), Some(19));
        assert_eq!(e.comm_qubit(2, 0), None);
        e.validate().unwrap();
        assert!(EluState::new(10, 2, 6).is_err());
        assert!(EluState::new(10, 0, 1).is_err());
        let mut bad = EluState::new(10, 1, 2).unwrap();
        bad.roles[5] = QubitRole::Communication { port: 0, slot: 1 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn request_saturates() {
        let mut r = EntanglementRequest::new(0, 1, 2);
        assert!(r.record());
        assert!(r.record());
        assert!(!r.record());
        assert_eq!(r.completed, 2);
    }
}
