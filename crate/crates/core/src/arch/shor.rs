use serde::{Deserialize, Serialize};

use super::adder::{adder_execution_time, adder_qubits_at};
use super::layout::ArchLayout;
use crate::device::DeviceParams;
use crate::error::{invalid, Result};
use crate::steane::{required_concat_level, LogicalCostTable, LogicalOptions};

/// Decomposition of modular exponentiation into adder calls.
///
/// `2n` multiplications of `2n` additions each give `4n²` adder calls on
/// `adder_width·n`-bit registers. The logical workspace `Q = q_coeff·n²` is
/// split into concurrent units of `unit_qubits_per_bit` logical qubits per
/// adder bit (6 for the adder itself, the rest for the multiplier registers
/// it serves), and calls run in sequential rounds of that many adders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShorModel {
    pub adder_width: u64,
    pub q_coeff: f64,
    pub unit_qubits_per_bit: f64,
    /// Logical gates per adder bit, used for K.
    pub gates_per_adder_bit: f64,
    pub eps_phys: f64,
    pub eps_threshold: f64,
    pub options: LogicalOptions,
}

impl Default for ShorModel {
    fn default() -> Self {
        Self {
            adder_width: 2,
            q_coeff: 2.0,
            unit_qubits_per_bit: 9.0,
            gates_per_adder_bit: 10.0,
            eps_phys: 1e-7,
            eps_threshold: 1e-4,
            options: LogicalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShorEstimate {
    pub n: u64,
    pub level: u8,
    /// Total logical gate count K.
    pub k: f64,
    /// Logical qubits Q.
    pub q: f64,
    pub adder_calls: f64,
    pub concurrent_adders: f64,
    pub sequential_rounds: f64,
    pub adder_time_s: f64,
    pub time_s: f64,
    pub qubits: f64,
}

impl ShorModel {
    pub fn logical_qubits(&self, n: u64) -> f64 {
        self.q_coeff * (n as f64).powi(2)
    }

    pub fn adder_calls(&self, n: u64) -> f64 {
        4.0 * (n as f64).powi(2)
    }

    pub fn gate_count(&self, n: u64) -> f64 {
        self.adder_calls(n) * self.gates_per_adder_bit * (self.adder_width * n) as f64
    }
}

/// Physical qubits per logical qubit at the table's level, from the adder's
/// level-1 layout (6 logical qubits per adder bit) and the per-level growth.
pub fn physical_per_logical(layout: &ArchLayout, table: &LogicalCostTable) -> f64 {
    let per_bit = adder_qubits_at(1, layout, table) as f64;
    per_bit / 6.0
}

pub fn shor_estimate(n: u64, layout: &ArchLayout, params: &DeviceParams) -> Result<ShorEstimate> {
    shor_estimate_with(n, layout, params, &ShorModel::default())
}

pub fn shor_estimate_with(
    n: u64,
    layout: &ArchLayout,
    params: &DeviceParams,
    model: &ShorModel,
) -> Result<ShorEstimate> {
    if n < 8 {
        return Err(invalid("n", "Shor estimate needs n >= 8"));
    }
    if model.adder_width == 0
        || !(model.q_coeff > 0.0)
        || !(model.gates_per_adder_bit > 0.0)
        || !(model.unit_qubits_per_bit >= 6.0)
    {
        return Err(invalid("shor model", "coefficients must be positive"));
    }
    let k = model.gate_count(n);
    let q = model.logical_qubits(n);
    let sel = required_concat_level(k, q, model.eps_phys, model.eps_threshold)?;
    let table = LogicalCostTable::build(params, layout, model.options, sel.level)?;
    let width = model.adder_width * n;
    let concurrent = q / (model.unit_qubits_per_bit * width as f64);
    let calls = model.adder_calls(n);
    let rounds = calls / concurrent;
    let adder_time_s = adder_execution_time(width, layout, &table)?;
    Ok(ShorEstimate {
        n,
        level: sel.level,
        k,
        q,
        adder_calls: calls,
        concurrent_adders: concurrent,
        sequential_rounds: rounds,
        adder_time_s,
        time_s: rounds * adder_time_s,
        qubits: q * physical_per_logical(layout, &table),
    })
}
