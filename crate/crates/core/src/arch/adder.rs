use serde::{Deserialize, Serialize};

use super::depth::{qcla_depth, qla_depth, qrca_depth, DepthProfile};
use super::layout::{ArchLayout, LayoutKind};
use crate::device::DeviceParams;
use crate::error::Result;
use crate::steane::{LogicalCostTable, LogicalOptions, PrimitiveKind};

/// Adder circuit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Circuit {
    Qcla,
    Qrca,
}

impl Circuit {
    pub fn for_layout(kind: LayoutKind) -> Self {
        match kind {
            LayoutKind::Musiqc | LayoutKind::Qla => Circuit::Qcla,
            LayoutKind::Nn => Circuit::Qrca,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Circuit::Qcla => "qcla",
            Circuit::Qrca => "qrca",
        }
    }
}

pub fn depth_profile(n: u64, layout: &ArchLayout) -> Result<DepthProfile> {
    match layout {
        ArchLayout::Musiqc(_) => qcla_depth(n),
        ArchLayout::Qla(_) => qla_depth(n),
        ArchLayout::Nn(_) => qrca_depth(n),
    }
}

/// Time of one bus swapping step: a CNOT, two single-qubit gates and a
/// measurement.
pub fn swap_step_time(costs: &LogicalCostTable) -> f64 {
    costs.time(PrimitiveKind::TransversalCNOT)
        + 2.0 * costs.time(PrimitiveKind::TransversalSingle)
        + costs.time(PrimitiveKind::LogicalMeasure)
}

fn musiqc_time(d: &DepthProfile, costs: &LogicalCostTable) -> f64 {
    // No distance enters here: every remote gate costs the same.
    let ec = costs.time(PrimitiveKind::ErrorCorrectRound);
    d.toffoli_steps as f64 * (costs.time(PrimitiveKind::Toffoli) + ec)
        + d.x_steps as f64 * (costs.time(PrimitiveKind::TransversalSingle) + ec)
        + d.cnot_steps as f64 * (costs.time(PrimitiveKind::RemoteCNOT) + ec)
}

fn qla_time(d: &DepthProfile, costs: &LogicalCostTable) -> f64 {
    let ec = costs.time(PrimitiveKind::ErrorCorrectRound);
    d.toffoli_steps as f64 * (costs.time(PrimitiveKind::Toffoli) + ec)
        + d.x_steps as f64 * (costs.time(PrimitiveKind::TransversalSingle) + ec)
        + d.cnot_steps as f64 * (costs.time(PrimitiveKind::TransversalCNOT) + ec)
        + d.comm_steps * swap_step_time(costs)
}

fn nn_time(d: &DepthProfile, costs: &LogicalCostTable) -> f64 {
    d.toffoli_steps as f64 * costs.time(PrimitiveKind::Toffoli)
}

/// Execution time of one n-bit addition using `costs` at its level.
///
/// QCLA on MUSIQC and QLA with one error-correction round after every step;
/// QRCA on the nearest-neighbour chain.
pub fn adder_execution_time(n: u64, layout: &ArchLayout, costs: &LogicalCostTable) -> Result<f64> {
    let d = depth_profile(n, layout)?;
    Ok(match layout {
        ArchLayout::Musiqc(_) => musiqc_time(&d, costs),
        ArchLayout::Qla(_) => qla_time(&d, costs),
        ArchLayout::Nn(_) => nn_time(&d, costs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdderResources {
    pub qubits: u64,
    pub parallel_ops: u64,
    /// QLA only: qubits implied by the tile geometry (LU plus communication
    /// units per 4-bit block), which disagrees with the tabulated count.
    pub geometry_qubits: Option<u64>,
    /// QLA only: ⌈441n/4⌉ simultaneous CNOTs before rounding to 110n.
    pub exact_parallel_ops: Option<u64>,
}

/// Level-1 physical resources of an n-bit adder. Exact integer arithmetic.
pub fn adder_resources(n: u64, layout: &ArchLayout) -> AdderResources {
    match layout {
        ArchLayout::Musiqc(m) => {
            let (num, den) = m.elus_per_bit;
            AdderResources {
                qubits: u64::from(m.elu_qubits) * u64::from(num) * n / u64::from(den),
                parallel_ops: u64::from(m.ops_per_elu) * u64::from(num) * n / u64::from(den),
                geometry_qubits: None,
                exact_parallel_ops: None,
            }
        }
        ArchLayout::Qla(q) => {
            let lu = u64::from(q.lu_side * q.lu_side);
            let cu = u64::from(q.comm_unit_side * q.comm_unit_side);
            let per_block = u64::from(q.lus_per_lb) * lu + u64::from(q.comm_units_per_lb) * cu;
            // Each CNOT pairs two communication qubits of a block.
            let half_comm = u64::from(q.comm_units_per_lb) * cu / 2;
            AdderResources {
                qubits: per_block * n,
                parallel_ops: (half_comm / 4) * n,
                geometry_qubits: Some((per_block * n).div_ceil(4)),
                exact_parallel_ops: Some((half_comm * n).div_ceil(4)),
            }
        }
        ArchLayout::Nn(l) => AdderResources {
            qubits: l.qubits_per_bit * n + l.qubits_const,
            parallel_ops: 8 * n + 43,
            geometry_qubits: None,
            exact_parallel_ops: None,
        },
    }
}

/// One row of an adder report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdderRow {
    pub n: u64,
    pub layout: LayoutKind,
    pub circuit: Circuit,
    pub level: u8,
    pub depth_total: u64,
    pub toffoli_steps: u64,
    pub comm_steps: u64,
    pub time_s: f64,
    pub qubits: u64,
    pub parallel_ops: u64,
}

pub const ADDER_CSV_HEADER: &str = "n,layout,circuit,level,depth_total,toffoli_steps,time_s,qubits,parallel_ops";

impl AdderRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.layout.name(),
            self.circuit.name(),
            self.level,
            self.depth_total,
            self.toffoli_steps,
            self.time_s,
            self.qubits,
            self.parallel_ops
        )
    }
}

/// Physical qubits of the adder at `level`, scaling the level-1 count by the
/// table's accumulated qubit growth.
pub fn adder_qubits_at(n: u64, layout: &ArchLayout, costs: &LogicalCostTable) -> u64 {
    let base = adder_resources(n, layout).qubits;
    base * (costs.footprint / crate::steane::BLOCK_FOOTPRINT)
}

pub fn adder_row(n: u64, layout: &ArchLayout, costs: &LogicalCostTable) -> Result<AdderRow> {
    let d = depth_profile(n, layout)?;
    let time_s = adder_execution_time(n, layout, costs)?;
    let r = adder_resources(n, layout);
    Ok(AdderRow {
        n,
        layout: layout.kind(),
        circuit: Circuit::for_layout(layout.kind()),
        level: costs.level,
        depth_total: d.total,
        toffoli_steps: d.toffoli_steps,
        comm_steps: d.comm_steps_reported(),
        time_s,
        qubits: adder_qubits_at(n, layout, costs),
        parallel_ops: r.parallel_ops,
    })
}

/// Adder rows for every (n, layout) pair, ordered by n then layout, plus the
/// smallest n in range where MUSIQC beats NN, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverScan {
    pub rows: Vec<AdderRow>,
    pub crossover_n: Option<u64>,
}

pub fn crossover_scan(
    ns: &[u64],
    layouts: &[ArchLayout],
    params: &DeviceParams,
    options: LogicalOptions,
    level: u8,
) -> Result<CrossoverScan> {
    if ns.is_empty() || layouts.is_empty() {
        return Err(crate::error::invalid("n_range", "empty sweep"));
    }
    let tables = layouts
        .iter()
        .map(|l| LogicalCostTable::build(params, l, options, level))
        .collect::<Result<Vec<_>>>()?;
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for &n in &ns {
        for (l, t) in layouts.iter().zip(&tables) {
            rows.push(adder_row(n, l, t)?);
        }
    }
    let mq = LogicalCostTable::build(params, &ArchLayout::musiqc(), options, level)?;
    let nn = LogicalCostTable::build(params, &ArchLayout::nn(), options, level)?;
    let mut crossover_n = None;
    for &n in &ns {
        if n <= super::depth::MIN_N {
            continue;
        }
        let a = adder_execution_time(n, &ArchLayout::musiqc(), &mq)?;
        let b = adder_execution_time(n, &ArchLayout::nn(), &nn)?;
        if a < b {
            crossover_n = Some(n);
            break;
        }
    }
    Ok(CrossoverScan { rows, crossover_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steane::level1_costs;
    use proptest::prelude::*;

    fn t1(layout: &ArchLayout) -> LogicalCostTable {
        level1_costs(&DeviceParams::default(), layout).unwrap()
    }

    #[test]
    fn resource_formulas() {
        let m = ArchLayout::musiqc();
        let q = ArchLayout::qla();
        let nn = ArchLayout::nn();
        let r = adder_resources(128, &m);
        assert_eq!((r.qubits, r.parallel_ops), (19200, 2304));
        assert_eq!(adder_resources(4, &q).qubits, 4704);
        assert_eq!(adder_resources(1, &nn).qubits, 40);
        for n in 1..2000u64 {
            assert_eq!(adder_resources(n, &m).qubits, 150 * n);
            assert_eq!(adder_resources(n, &m).parallel_ops, 18 * n);
            let rq = adder_resources(n, &q);
            assert_eq!(rq.qubits, 1176 * n);
            assert_eq!(rq.parallel_ops, 110 * n);
            assert_eq!(rq.exact_parallel_ops, Some((441 * n).div_ceil(4)));
            assert_eq!(rq.geometry_qubits, Some(294 * n));
            assert_eq!(adder_resources(n, &nn).qubits, 20 * (n + 1));
            assert_eq!(adder_resources(n, &nn).parallel_ops, 8 * n + 43);
        }
    }

    #[test]
    fn elu_budget() {
        // 3 logical blocks of 7, 3 sets of 4 ancillas and 2·10 communication
        // ions on each of 3 operands: 93 ions, which fits in the 100-ion ELU.
        let crate::arch::ArchLayout::Musiqc(m) = ArchLayout::musiqc() else { unreachable!() };
        let used = 3 * 7 + 3 * 4 + 3 * m.m_p * m.m_t;
        assert_eq!(used, 93);
        assert!(used <= m.elu_qubits);
    }

    #[test]
    fn hand_computed_musiqc_128() {
        let l = ArchLayout::musiqc();
        let c = t1(&l);
        let ec = c.time(PrimitiveKind::ErrorCorrectRound);
        let expect = 31.0 * (c.time(PrimitiveKind::Toffoli) + ec)
            + 2.0 * (c.time(PrimitiveKind::TransversalSingle) + ec)
            + 4.0 * (c.time(PrimitiveKind::RemoteCNOT) + ec);
        assert_eq!(adder_execution_time(128, &l, &c).unwrap(), expect);
    }

    #[test]
    fn qcla_domain() {
        let l = ArchLayout::musiqc();
        assert!(adder_execution_time(4, &l, &t1(&l)).is_err());
        let nn = ArchLayout::nn();
        assert!(adder_execution_time(4, &nn, &t1(&nn)).is_ok());
    }

    #[test]
    fn csv_row_shape() {
        let l = ArchLayout::qla();
        let row = adder_row(128, &l, &t1(&l)).unwrap();
        assert_eq!(row.csv().split(',').count(), ADDER_CSV_HEADER.split(',').count());
        assert!(row.csv().starts_with("128,qla,qcla,1,37,31,"));
    }

    #[test]
    fn crossover_found() {
        let ns: Vec<u64> = (7..=256).collect();
        let s = crossover_scan(&ns, &[ArchLayout::musiqc(), ArchLayout::nn()], &DeviceParams::default(), LogicalOptions::default(), 1).unwrap();
        assert!(s.crossover_n.is_some());
        assert_eq!(s.rows.len(), 2 * ns.len());
    }

    proptest! {
        #[test]
        fn monotone_in_durations(bump in 0usize..5, f in 1.0..3.0f64, n in 7u64..5000) {
            let base = DeviceParams::default();
            let mut p = base;
            match bump {
                0 => p.t_single_gate *= f,
                1 => p.t_two_gate *= f,
                2 => p.t_toffoli *= f,
                3 => p.t_measure *= f,
                _ => p.t_remote_entangle *= f,
            }
            for l in [ArchLayout::musiqc(), ArchLayout::qla(), ArchLayout::nn()] {
                let a = adder_execution_time(n, &l, &level1_costs(&base, &l).unwrap()).unwrap();
                let b = adder_execution_time(n, &l, &level1_costs(&p, &l).unwrap()).unwrap();
                prop_assert!(b >= a);
            }
        }
    }
}
