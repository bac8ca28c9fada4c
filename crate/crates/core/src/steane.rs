//! Time and qubit costs of fault-tolerant Steane [[7,1,3]] primitives.
//!
//! Every primitive is described once as a recipe of abstract operations
//! (reset, single-qubit gate, two-qubit gate, Toffoli, measurement, Bell pair
//! transfer). At level 1 the operations are physical; at level L+1 each one
//! is replaced by the matching level-L primitive. Each level-L gate used
//! inside a level-(L+1) recipe is followed by `ec_passes` level-L syndrome
//! passes, the same folding the level-1 Toffoli applies after each of its two
//! stages.

use serde::{Deserialize, Serialize};

use crate::arch::{ArchLayout, LinkSchedule};
use crate::device::DeviceParams;
use crate::error::{invalid, Error, Result};

/// Qubits in a level-1 logical block: 7 data plus 4 cat ancillas.
pub const BLOCK_FOOTPRINT: u64 = 11;
/// Stabilizer generators of the Steane code.
pub const STABILIZERS: u32 = 6;
pub const MAX_LEVEL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimitiveKind {
    PrepZero,
    TransversalSingle,
    TransversalCNOT,
    Toffoli,
    LogicalMeasure,
    RemoteCNOT,
    ErrorCorrectRound,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 7] = [
        PrimitiveKind::PrepZero,
        PrimitiveKind::TransversalSingle,
        PrimitiveKind::TransversalCNOT,
        PrimitiveKind::Toffoli,
        PrimitiveKind::LogicalMeasure,
        PrimitiveKind::RemoteCNOT,
        PrimitiveKind::ErrorCorrectRound,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Level-1 qubit count in physical qubits. At higher levels each of these
    /// becomes a lower-level block.
    fn base_qubits(self) -> u64 {
        match self {
            PrimitiveKind::PrepZero | PrimitiveKind::ErrorCorrectRound => BLOCK_FOOTPRINT,
            PrimitiveKind::TransversalSingle | PrimitiveKind::LogicalMeasure => 7,
            PrimitiveKind::TransversalCNOT => 14,
            // Overhead beyond the three operand blocks: three ancilla blocks
            // and a 7-qubit cat state.
            PrimitiveKind::Toffoli => 3 * BLOCK_FOOTPRINT + 7,
            // Two data blocks plus two Bell halves per code qubit.
            PrimitiveKind::RemoteCNOT => 28,
        }
    }
}

/// How many times the six stabilizers are measured during preparation and
/// error correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Repetitions {
    /// Three repetitions, the deterministic upper bound.
    WorstCase,
    /// Two repetitions.
    ExpectedCase,
}

impl Repetitions {
    pub fn count(self) -> u32 {
        match self {
            Repetitions::WorstCase => 3,
            Repetitions::ExpectedCase => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalOptions {
    pub repetitions: Repetitions,
    /// Syndrome passes folded after every logical step.
    pub ec_passes: u32,
    /// Extra lower-level blocks per level, on top of the 7 data blocks, when
    /// counting qubits of a lifted block. Zero means cat ancillas of a lifted
    /// block are borrowed from the lower-level workspace already counted.
    pub ancilla_share: u64,
}

impl Default for LogicalOptions {
    fn default() -> Self {
        Self {
            repetitions: Repetitions::WorstCase,
            ec_passes: 1,
            ancilla_share: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhysOp {
    Reset,
    Single,
    Two,
    Toffoli,
    Measure,
}

/// Where the duration of an audit step comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSource {
    Physical(PhysOp),
    /// Bell-pair generation over the photonic fabric.
    Link(LinkSchedule),
    Primitive { level: u8, kind: PrimitiveKind },
    /// One pass over the six stabilizers.
    SyndromePass { level: u8 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    pub label: String,
    pub source: StepSource,
    /// Operations of this kind running in parallel.
    pub width: u32,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub time: f64,
    pub qubits: u64,
    pub parallel_ops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveCost {
    pub kind: PrimitiveKind,
    pub time: f64,
    pub qubits: u64,
    pub parallel_ops: u64,
    pub audit: Vec<AuditStep>,
}

impl PrimitiveCost {
    pub fn cost(&self) -> Cost {
        Cost {
            time: self.time,
            qubits: self.qubits,
            parallel_ops: self.parallel_ops,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyndromePass {
    pub time: f64,
    pub parallel_ops: u64,
    pub audit: Vec<AuditStep>,
}

/// Costs of every primitive at one concatenation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCostTable {
    pub level: u8,
    pub options: LogicalOptions,
    pub params: DeviceParams,
    pub link: Option<LinkSchedule>,
    /// Physical qubits per logical block at this level.
    pub footprint: u64,
    /// Qubit multiplier relative to the level below (1 at level 1).
    pub qubit_factor: u64,
    pub syndrome_pass: SyndromePass,
    pub entries: Vec<PrimitiveCost>,
}

impl LogicalCostTable {
    pub fn get(&self, kind: PrimitiveKind) -> &PrimitiveCost {
        &self.entries[kind.index()]
    }

    pub fn time(&self, kind: PrimitiveKind) -> f64 {
        self.get(kind).time
    }

    /// Builds the table at `level` by lifting from level 1.
    pub fn build(
        params: &DeviceParams,
        layout: &ArchLayout,
        options: LogicalOptions,
        level: u8,
    ) -> Result<Self> {
        if level == 0 {
            return Err(invalid("level", "concatenation level starts at 1"));
        }
        let mut t = level1_costs_with(params, layout, options)?;
        while t.level < level {
            t = lift_level(&t);
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cost table serializes")
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Reset,
    Single,
    Two,
    ToffoliGate,
    Measure,
    Link,
    Same(PrimitiveKind),
    Pass,
}

#[derive(Debug, Clone, Copy)]
struct RecipeStep {
    label: &'static str,
    op: Op,
    width: u32,
}

const fn st(label: &'static str, op: Op, width: u32) -> RecipeStep {
    RecipeStep { label, op, width }
}

/// One stabilizer measurement: 4-qubit cat, 4 CNOTs onto data, cat readout.
const STABILIZER: [RecipeStep; 6] = [
    st("reset cat ancillas", Op::Reset, 4),
    st("cat Hadamard", Op::Single, 1),
    st("cat CNOT layer 1", Op::Two, 1),
    st("cat CNOT layer 2", Op::Two, 2),
    st("CNOTs cat to data", Op::Two, 4),
    st("measure cat", Op::Measure, 4),
];

/// Z_L readout through a 3-qubit cat.
const Z_LOGICAL: [RecipeStep; 6] = [
    st("reset cat3 ancillas", Op::Reset, 3),
    st("cat3 Hadamard", Op::Single, 1),
    st("cat3 CNOT layer 1", Op::Two, 1),
    st("cat3 CNOT layer 2", Op::Two, 1),
    st("CNOTs cat3 to data", Op::Two, 3),
    st("measure cat3", Op::Measure, 3),
];

fn pass_recipe() -> Vec<RecipeStep> {
    (0..STABILIZERS).flat_map(|_| STABILIZER).collect()
}

fn recipe(kind: PrimitiveKind, opts: &LogicalOptions, photonic: bool) -> Vec<RecipeStep> {
    let reps = opts.repetitions.count();
    let fold = |v: &mut Vec<RecipeStep>| {
        for _ in 0..opts.ec_passes {
            v.push(st("folded syndrome pass", Op::Pass, 1));
        }
    };
    let mut v = Vec::new();
    match kind {
        PrimitiveKind::ErrorCorrectRound => {
            for _ in 0..reps {
                v.push(st("syndrome pass", Op::Pass, 1));
            }
        }
        PrimitiveKind::PrepZero => {
            v.push(st("reset data", Op::Reset, 7));
            for _ in 0..reps {
                v.push(st("syndrome pass", Op::Pass, 1));
            }
            v.extend(Z_LOGICAL);
        }
        PrimitiveKind::TransversalSingle => v.push(st("gate on 7 qubits", Op::Single, 7)),
        PrimitiveKind::TransversalCNOT => v.push(st("pairwise CNOTs", Op::Two, 7)),
        PrimitiveKind::LogicalMeasure => v.push(st("measure 7 qubits", Op::Measure, 7)),
        PrimitiveKind::RemoteCNOT => {
            if photonic {
                v.push(st("Bell pairs", Op::Link, 7));
            }
            v.push(st("CNOTs into Bell halves", Op::Two, 14));
            v.push(st("measure Bell halves", Op::Measure, 14));
            v.push(st("Pauli corrections", Op::Single, 14));
        }
        PrimitiveKind::Toffoli => {
            // Ancilla state preparation.
            v.push(st("prepare three |0> blocks", Op::Same(PrimitiveKind::PrepZero), 3));
            v.push(st("Hadamard on blocks 1 and 2", Op::Same(PrimitiveKind::TransversalSingle), 2));
            v.push(st("reset cat7 ancillas", Op::Reset, 7));
            v.push(st("cat7 Hadamard", Op::Single, 1));
            v.push(st("cat7 CNOT layer 1", Op::Two, 1));
            v.push(st("cat7 CNOT layer 2", Op::Two, 2));
            v.push(st("cat7 CNOT layer 3", Op::Two, 3));
            v.push(st("cat-controlled Z on block 3", Op::Two, 7));
            v.push(st("cat-controlled CNOT blocks 1,2", Op::ToffoliGate, 7));
            v.push(st("measure cat7", Op::Measure, 7));
            fold(&mut v);
            // Teleport the operands into the prepared state.
            if photonic {
                v.push(st("Bell pairs to operand ELUs", Op::Link, 21));
            }
            v.push(st("CNOTs operands to ancilla", Op::Same(PrimitiveKind::TransversalCNOT), 3));
            v.push(st("measure operands", Op::Same(PrimitiveKind::LogicalMeasure), 3));
            v.push(st("conditioned CNOT", Op::Same(PrimitiveKind::TransversalCNOT), 1));
            v.push(st("conditioned CZ", Op::Same(PrimitiveKind::TransversalCNOT), 1));
            v.push(st("Pauli corrections", Op::Same(PrimitiveKind::TransversalSingle), 3));
            fold(&mut v);
            return v;
        }
    }
    v
}

/// Order in which primitives are evaluated within a level.
const EVAL_ORDER: [PrimitiveKind; 7] = [
    PrimitiveKind::ErrorCorrectRound,
    PrimitiveKind::PrepZero,
    PrimitiveKind::TransversalSingle,
    PrimitiveKind::TransversalCNOT,
    PrimitiveKind::LogicalMeasure,
    PrimitiveKind::RemoteCNOT,
    PrimitiveKind::Toffoli,
];

/// Durations of the abstract operations one level down.
enum Lower<'a> {
    Physical {
        params: &'a DeviceParams,
        link: Option<LinkSchedule>,
    },
    Logical(&'a LogicalCostTable),
}

struct Expanded {
    steps: Vec<AuditStep>,
    parallel_ops: u64,
}

fn expand(
    recipe: &[RecipeStep],
    level: u8,
    lower: &Lower<'_>,
    opts: &LogicalOptions,
    same: &[Option<PrimitiveCost>],
    pass: Option<&SyndromePass>,
) -> Expanded {
    let mut steps = Vec::with_capacity(recipe.len());
    let mut par = 0u64;
    for s in recipe {
        let w = u64::from(s.width);
        match s.op {
            Op::Same(kind) => {
                let c = same[kind.index()].as_ref().expect("evaluated earlier in the level");
                par = par.max(w * c.parallel_ops);
                steps.push(AuditStep {
                    label: s.label.to_string(),
                    source: StepSource::Primitive { level, kind },
                    width: s.width,
                    duration: c.time,
                });
            }
            Op::Pass => {
                let p = pass.expect("syndrome pass evaluated first");
                par = par.max(w * p.parallel_ops);
                steps.push(AuditStep {
                    label: s.label.to_string(),
                    source: StepSource::SyndromePass { level },
                    width: s.width,
                    duration: p.time,
                });
            }
            op => match lower {
                Lower::Physical { params, link } => {
                    let (source, duration) = match op {
                        Op::Reset => (StepSource::Physical(PhysOp::Reset), params.reinit_time),
                        Op::Single => (StepSource::Physical(PhysOp::Single), params.t_single_gate),
                        Op::Two => (StepSource::Physical(PhysOp::Two), params.t_two_gate),
                        Op::ToffoliGate => (StepSource::Physical(PhysOp::Toffoli), params.t_toffoli),
                        Op::Measure => (StepSource::Physical(PhysOp::Measure), params.t_measure),
                        Op::Link => {
                            let l = link.expect("link step only in photonic recipes");
                            (StepSource::Link(l), l.time())
                        }
                        Op::Same(_) | Op::Pass => unreachable!(),
                    };
                    par = par.max(w);
                    steps.push(AuditStep {
                        label: s.label.to_string(),
                        source,
                        width: s.width,
                        duration,
                    });
                }
                Lower::Logical(t) => {
                    let (kind, folded) = match op {
                        Op::Reset => (PrimitiveKind::PrepZero, false),
                        Op::Single => (PrimitiveKind::TransversalSingle, true),
                        Op::Two => (PrimitiveKind::TransversalCNOT, true),
                        Op::ToffoliGate => (PrimitiveKind::Toffoli, true),
                        Op::Measure => (PrimitiveKind::LogicalMeasure, false),
                        Op::Link => (PrimitiveKind::RemoteCNOT, true),
                        Op::Same(_) | Op::Pass => unreachable!(),
                    };
                    let c = t.get(kind);
                    par = par.max(w * c.parallel_ops);
                    steps.push(AuditStep {
                        label: s.label.to_string(),
                        source: StepSource::Primitive { level: t.level, kind },
                        width: s.width,
                        duration: c.time,
                    });
                    if folded {
                        for _ in 0..opts.ec_passes {
                            par = par.max(w * t.syndrome_pass.parallel_ops);
                            steps.push(AuditStep {
                                label: format!("{}: syndrome pass", s.label),
                                source: StepSource::SyndromePass { level: t.level },
                                width: s.width,
                                duration: t.syndrome_pass.time,
                            });
                        }
                    }
                }
            },
        }
    }
    Expanded {
        steps,
        parallel_ops: par,
    }
}

fn sum(steps: &[AuditStep]) -> f64 {
    steps.iter().map(|s| s.duration).sum()
}

fn evaluate(
    level: u8,
    lower: Lower<'_>,
    params: DeviceParams,
    link: Option<LinkSchedule>,
    options: LogicalOptions,
    qubit_factor: u64,
    qubit_scale: u64,
) -> LogicalCostTable {
    let pass_steps = expand(&pass_recipe(), level, &lower, &options, &[], None);
    let syndrome_pass = SyndromePass {
        time: sum(&pass_steps.steps),
        parallel_ops: pass_steps.parallel_ops,
        audit: pass_steps.steps,
    };
    let mut done: Vec<Option<PrimitiveCost>> = vec![None; PrimitiveKind::ALL.len()];
    for kind in EVAL_ORDER {
        let r = recipe(kind, &options, link.is_some());
        let e = expand(&r, level, &lower, &options, &done, Some(&syndrome_pass));
        done[kind.index()] = Some(PrimitiveCost {
            kind,
            time: sum(&e.steps),
            qubits: kind.base_qubits() * qubit_scale,
            parallel_ops: e.parallel_ops,
            audit: e.steps,
        });
    }
    let entries: Vec<PrimitiveCost> = done.into_iter().map(|c| c.expect("all evaluated")).collect();
    let footprint = entries[PrimitiveKind::PrepZero.index()].qubits;
    LogicalCostTable {
        level,
        options,
        params,
        link,
        footprint,
        qubit_factor,
        syndrome_pass,
        entries,
    }
}

fn level1_costs_with(
    params: &DeviceParams,
    layout: &ArchLayout,
    options: LogicalOptions,
) -> Result<LogicalCostTable> {
    params.validate()?;
    layout.validate()?;
    let link = layout.link_schedule(params);
    Ok(level1_with_link(params, link, options))
}

fn level1_with_link(
    params: &DeviceParams,
    link: Option<LinkSchedule>,
    options: LogicalOptions,
) -> LogicalCostTable {
    evaluate(1, Lower::Physical { params, link }, *params, link, options, 1, 1)
}

/// Level-1 table with default options (worst-case repetitions, one folded
/// syndrome pass per logical step).
pub fn level1_costs(params: &DeviceParams, layout: &ArchLayout) -> Result<LogicalCostTable> {
    level1_costs_with(params, layout, LogicalOptions::default())
}

pub fn level1_costs_with_options(
    params: &DeviceParams,
    layout: &ArchLayout,
    options: LogicalOptions,
) -> Result<LogicalCostTable> {
    level1_costs_with(params, layout, options)
}

pub fn toffoli_cost(table: &LogicalCostTable) -> Cost {
    table.get(PrimitiveKind::Toffoli).cost()
}

/// Teleported CNOT between blocks in different ELUs, with `link_time` the
/// effective duration of one Bell-pair slot.
///
/// Layouts without a photonic schedule move the 7 pairs through one port.
pub fn remote_cnot_cost(table: &LogicalCostTable, link_time: f64) -> Result<Cost> {
    if !(link_time >= 0.0 && link_time.is_finite()) {
        return Err(invalid("link_time", "must be non-negative"));
    }
    let slots = table.link.map_or(7, |l| l.slots);
    let link = (link_time > 0.0).then_some(LinkSchedule {
        slots,
        slot_time: link_time,
    });
    let mut t = level1_with_link(&table.params, link, table.options);
    while t.level < table.level {
        t = lift_level(&t);
    }
    let c = t.get(PrimitiveKind::RemoteCNOT);
    Ok(Cost {
        time: c.time,
        qubits: c.qubits,
        parallel_ops: c.parallel_ops,
    })
}

/// Level L+1 table built from level-L primitives.
///
/// Qubit counts scale by `7 + ancilla_share` per level.
pub fn lift_level(table: &LogicalCostTable) -> LogicalCostTable {
    let factor = 7 + table.options.ancilla_share;
    let scale = table.footprint / BLOCK_FOOTPRINT * factor;
    evaluate(
        table.level + 1,
        Lower::Logical(table),
        table.params,
        table.link,
        table.options,
        factor,
        scale,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcatSelection {
    pub level: u8,
    pub logical_error_per_op: f64,
    /// The per-operation target 1/(K·Q).
    pub target: f64,
}

/// Logical error per operation at `level`: ε_th·(ε/ε_th)^(2^L).
pub fn logical_error(level: u8, eps_phys: f64, eps_threshold: f64) -> f64 {
    eps_threshold * (eps_phys / eps_threshold).powi(1 << level)
}

/// Smallest level in 1..=3 whose logical error per operation is at most
/// 1/(K·Q).
pub fn required_concat_level(
    k: f64,
    q: f64,
    eps_phys: f64,
    eps_threshold: f64,
) -> Result<ConcatSelection> {
    if !(k >= 1.0 && q >= 1.0) {
        return Err(invalid("K, Q", "must be at least 1"));
    }
    if !(eps_phys >= 0.0 && eps_phys < eps_threshold) {
        return Err(invalid("eps_phys", "must be below the threshold"));
    }
    let target = 1.0 / (k * q);
    let mut last = f64::NAN;
    for level in 1..=MAX_LEVEL {
        last = logical_error(level, eps_phys, eps_threshold);
        if last <= target {
            return Ok(ConcatSelection {
                level,
                logical_error_per_op: last,
                target,
            });
        }
    }
    Err(Error::InsufficientConcatenation {
        achieved: last,
        target,
    })
}
