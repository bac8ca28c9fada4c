use serde::{Deserialize, Serialize};

use crate::device::{effective_connection_time, DeviceParams};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    Musiqc,
    Qla,
    Nn,
}

impl LayoutKind {
    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Musiqc => "musiqc",
            LayoutKind::Qla => "qla",
            LayoutKind::Nn => "nn",
        }
    }
}

impl std::str::FromStr for LayoutKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "musiqc" => Ok(LayoutKind::Musiqc),
            "qla" => Ok(LayoutKind::Qla),
            "nn" => Ok(LayoutKind::Nn),
            other => Err(invalid("arch", format!("unknown layout `{other}`"))),
        }
    }
}

/// ELUs joined by an optical crossconnect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MusiqcLayout {
    pub elu_qubits: u32,
    pub ports: u32,
    /// Ports used in parallel for one block transfer.
    pub m_p: u32,
    /// Communication ions pipelined behind each port.
    pub m_t: u32,
    /// ELUs per logical bit, as a fraction.
    pub elus_per_bit: (u32, u32),
    /// Simultaneous operations one ELU supports.
    pub ops_per_elu: u32,
}

impl Default for MusiqcLayout {
    fn default() -> Self {
        Self {
            elu_qubits: 100,
            ports: 6,
            m_p: 2,
            m_t: 10,
            elus_per_bit: (3, 2),
            ops_per_elu: 12,
        }
    }
}

/// Quantum logic array tiles: logical units grouped into logical blocks with
/// communication units for entanglement swapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QlaLayout {
    pub lu_side: u32,
    pub lus_per_lb: u32,
    pub comm_units_per_lb: u32,
    pub comm_unit_side: u32,
}

impl Default for QlaLayout {
    fn default() -> Self {
        Self {
            lu_side: 7,
            lus_per_lb: 6,
            comm_units_per_lb: 18,
            comm_unit_side: 7,
        }
    }
}

/// Nearest-neighbour chain running a ripple-carry adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NnLayout {
    pub qubits_per_bit: u64,
    pub qubits_const: u64,
}

impl Default for NnLayout {
    fn default() -> Self {
        Self {
            qubits_per_bit: 20,
            qubits_const: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchLayout {
    Musiqc(MusiqcLayout),
    Qla(QlaLayout),
    Nn(NnLayout),
}

/// Bell-pair slots needed to move one code block between ELUs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSchedule {
    pub slots: u32,
    pub slot_time: f64,
}

impl LinkSchedule {
    pub fn time(&self) -> f64 {
        f64::from(self.slots) * self.slot_time
    }
}

impl ArchLayout {
    pub fn musiqc() -> Self {
        ArchLayout::Musiqc(MusiqcLayout::default())
    }

    pub fn qla() -> Self {
        ArchLayout::Qla(QlaLayout::default())
    }

    pub fn nn() -> Self {
        ArchLayout::Nn(NnLayout::default())
    }

    pub fn from_kind(kind: LayoutKind) -> Self {
        match kind {
            LayoutKind::Musiqc => Self::musiqc(),
            LayoutKind::Qla => Self::qla(),
            LayoutKind::Nn => Self::nn(),
        }
    }

    pub fn kind(&self) -> LayoutKind {
        match self {
            ArchLayout::Musiqc(_) => LayoutKind::Musiqc,
            ArchLayout::Qla(_) => LayoutKind::Qla,
            ArchLayout::Nn(_) => LayoutKind::Nn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArchLayout::Musiqc(m) => {
                if m.m_p == 0 || m.m_t == 0 {
                    return Err(invalid("m_p/m_T", "multiplexities must be at least 1"));
                }
                if m.m_p > m.ports {
                    return Err(invalid("m_p", "cannot exceed the number of ports"));
                }
                if m.m_p * m.m_t > m.elu_qubits {
                    return Err(invalid("m_T", "communication ions exceed ELU size"));
                }
                if m.elus_per_bit.1 == 0 {
                    return Err(invalid("elus_per_bit", "zero denominator"));
                }
            }
            ArchLayout::Qla(q) => {
                if q.lu_side == 0 || q.lus_per_lb == 0 || q.comm_unit_side == 0 {
                    return Err(invalid("qla", "geometry entries must be positive"));
                }
            }
            ArchLayout::Nn(_) => {}
        }
        Ok(())
    }

    /// Link schedule for transferring a 7-qubit block, if the layout uses
    /// photonic links for logical gates.
    ///
    /// The seven pairs are spread over `m_p` ports, so they need `⌈7/m_p⌉`
    /// sequential slots, each lasting `τ_E/m_T`.
    pub fn link_schedule(&self, params: &DeviceParams) -> Option<LinkSchedule> {
        match self {
            ArchLayout::Musiqc(m) => Some(LinkSchedule {
                slots: 7u32.div_ceil(m.m_p.max(1)),
                slot_time: effective_connection_time(params.t_remote_entangle, 1, m.m_t.max(1))
                    .expect("m_T checked non-zero"),
            }),
            _ => None,
        }
    }
}
