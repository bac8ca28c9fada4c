use serde::{Deserialize, Serialize};

use super::engine::{simulate, LinkSimConfig, Timing};
use super::event::{EventKind, EventLog, EventQueue, SimEvent};
use super::oxc::{Grant, OXCSwitch};
use super::{EluState, EntanglementRequest};
use crate::arch::ArchLayout;
use crate::device::LinkModel;
use crate::error::{invalid, Result};
use crate::rng::stream_rng;
use crate::steane::{LogicalCostTable, LogicalOptions, PrimitiveKind, StepSource};

/// Operand blocks teleported into each Toffoli ancilla.
const OPERANDS: usize = 3;
/// Bell pairs per block transfer.
const PAIRS_PER_BLOCK: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Fresh ELUs available for ancilla preparation.
    pub elu_pool: usize,
    /// Start link generation together with ancilla preparation instead of
    /// after it.
    pub overlap_links: bool,
    pub link: LinkSimConfig,
    pub options: LogicalOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            elu_pool: 1,
            overlap_links: false,
            link: LinkSimConfig::default(),
            options: LogicalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub makespan: f64,
    /// Start-to-finish time of each Toffoli.
    pub toffoli_times: Vec<f64>,
    /// Share of ELU busy time spent waiting for Bell pairs.
    pub link_wait_fraction: f64,
    /// Local work before and after the teleportation links.
    pub stage_a: f64,
    pub stage_b: f64,
    pub attempts: u64,
    pub successes: u64,
    /// Largest number of switch circuits held at once.
    pub peak_circuits: usize,
    pub log: EventLog,
}

impl PipelineResult {
    pub fn mean_toffoli_time(&self) -> f64 {
        self.toffoli_times.iter().sum::<f64>() / self.toffoli_times.len() as f64
    }

    pub fn summary(&self) -> super::SimSummary {
        let pairs = self.successes.max(1) as f64;
        super::SimSummary {
            makespan_s: self.makespan,
            mean_pair_latency_s: self.makespan / pairs,
            attempts: self.attempts,
            successes: self.successes,
            link_wait_fraction: self.link_wait_fraction,
        }
    }
}

/// Splits the Toffoli audit trail at its link step.
fn stage_durations(table: &LogicalCostTable) -> (f64, f64) {
    let audit = &table.get(PrimitiveKind::Toffoli).audit;
    let split = audit
        .iter()
        .position(|s| matches!(s.source, StepSource::Link(_)))
        .unwrap_or(audit.len());
    let a = audit[..split].iter().map(|s| s.duration).sum();
    let b = audit[split..]
        .iter()
        .filter(|s| !matches!(s.source, StepSource::Link(_)))
        .map(|s| s.duration)
        .sum();
    (a, b)
}

/// Completion time once both the ancilla and all transfers are ready.
fn finish_time(a_done: &[f64], link_done: &[f64], i: u64, stage_b: f64, wait: &mut f64) -> Option<f64> {
    let k = i as usize;
    if a_done[k].is_nan() || link_done[k].is_nan() {
        return None;
    }
    let ready = a_done[k].max(link_done[k]);
    *wait += ready - a_done[k];
    Some(ready + stage_b)
}

pub fn run_toffoli_pipeline(
    n_toffolis: u64,
    layout: &ArchLayout,
    link: &LinkModel<'_>,
    seed: u64,
) -> Result<PipelineResult> {
    run_toffoli_pipeline_with(n_toffolis, layout, link, seed, &PipelineConfig::default())
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Start { i: u64, elu: usize },
    StageA { i: u64 },
    LinkStart { i: u64 },
    OperandLinked { i: u64, op: usize },
    Done { i: u64, elu: usize },
}

/// Runs `n_toffolis` teleported Toffolis, each on a fresh ELU from the pool.
///
/// Each Toffoli prepares its ancilla locally, pulls seven Bell pairs from
/// each of three operand ELUs over `m_p` ports with `m_T` ions apiece, then
/// finishes the teleportation locally.
pub fn run_toffoli_pipeline_with(
    n_toffolis: u64,
    layout: &ArchLayout,
    link: &LinkModel<'_>,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    let ArchLayout::Musiqc(m) = layout else {
        return Err(invalid("layout", "the Toffoli pipeline needs a MUSIQC layout"));
    };
    if n_toffolis == 0 {
        return Err(invalid("n_toffolis", "at least one Toffoli"));
    }
    if cfg.elu_pool == 0 {
        return Err(invalid("elu_pool", "at least one ELU"));
    }
    layout.validate()?;
    let fresh = EluState::new(m.elu_qubits, OPERANDS as u32 * m.m_p, m.m_t)?;
    fresh.validate()?;
    let table = LogicalCostTable::build(link.params, layout, cfg.options, 1)?;
    let (stage_a, stage_b) = stage_durations(&table);
    let timing = Timing::new(link, m.m_p, m.m_t, &cfg.link)?;

    let w = cfg.elu_pool;
    let mp = m.m_p as usize;
    // Pool ELU ports first, then each pool slot's three operand ELUs.
    let block = OPERANDS * mp;
    let mut switch = OXCSwitch::new(2 * w * block);
    let mut circuits = vec![Vec::new(); w * OPERANDS];

    let mut rng = stream_rng(seed, 1);
    let mut q: EventQueue<Step> = EventQueue::new();
    let mut log = EventLog::default();
    let ev = |time, kind, elu: usize, i: u64| SimEvent {
        time,
        kind,
        elu_id: elu,
        port_id: 0,
        request_id: i as usize,
    };

    let mut next = 0u64;
    let mut elu_of = vec![0usize; n_toffolis as usize];
    let mut start = vec![0.0f64; n_toffolis as usize];
    let mut a_done = vec![f64::NAN; n_toffolis as usize];
    let mut link_done = vec![f64::NAN; n_toffolis as usize];
    let mut linked = vec![0usize; n_toffolis as usize];
    let mut times = vec![0.0; n_toffolis as usize];
    let mut wait = 0.0;
    let mut busy = 0.0;
    let mut attempts = 0;
    let mut successes = 0;
    let mut makespan: f64 = 0.0;

    for elu in 0..w.min(n_toffolis as usize) {
        q.push(ev(0.0, EventKind::SwitchReconfig, elu, next), Step::Start { i: next, elu })?;
        next += 1;
    }

    while let Some((e, step)) = q.pop() {
        let now = e.time;
        match step {
            Step::Start { i, elu } => {
                let k = i as usize;
                elu_of[k] = elu;
                start[k] = now;
                q.push(ev(now + stage_a, EventKind::GateDone, elu, i), Step::StageA { i })?;
                let at = if cfg.overlap_links { now } else { now + stage_a };
                q.push(ev(at, EventKind::SwitchReconfig, elu, i), Step::LinkStart { i })?;
            }
            Step::StageA { i } => {
                a_done[i as usize] = now;
                log.push(e);
                if let Some(t) = finish_time(&a_done, &link_done, i, stage_b, &mut wait) {
                    let elu = elu_of[i as usize];
                    q.push(ev(t, EventKind::MeasureDone, elu, i), Step::Done { i, elu })?;
                }
            }
            Step::LinkStart { i } => {
                let elu = elu_of[i as usize];
                log.push(e);
                for op in 0..OPERANDS {
                    let slot = elu * OPERANDS + op;
                    for c in 0..mp {
                        let a = elu * block + op * mp + c;
                        let b = w * block + elu * block + op * mp + c;
                        match switch.request(a, b)? {
                            Grant::Granted(id) => circuits[slot].push(id),
                            Grant::Queued(_) => {
                                return Err(invalid("switch", "operand ports must be free"));
                            }
                        }
                    }
                    let mut req = EntanglementRequest::new(elu, w + slot, PAIRS_PER_BLOCK);
                    let run = simulate(&timing, &mut req, cfg.link.sampling, &mut rng, None, i as usize)?;
                    attempts += run.attempts;
                    successes += req.completed;
                    q.push(
                        ev(now + run.makespan, EventKind::Herald { success: true }, w + slot, i),
                        Step::OperandLinked { i, op },
                    )?;
                }
                debug_assert!(switch.check_invariants());
            }
            Step::OperandLinked { i, op } => {
                let k = i as usize;
                log.push(e);
                let slot = elu_of[k] * OPERANDS + op;
                for id in circuits[slot].drain(..) {
                    switch.release(id)?;
                }
                linked[k] += 1;
                if linked[k] == OPERANDS {
                    link_done[k] = now;
                    if let Some(t) = finish_time(&a_done, &link_done, i, stage_b, &mut wait) {
                        let elu = elu_of[k];
                        q.push(ev(t, EventKind::MeasureDone, elu, i), Step::Done { i, elu })?;
                    }
                }
            }
            Step::Done { i, elu } => {
                let k = i as usize;
                log.push(e);
                times[k] = now - start[k];
                busy += times[k];
                makespan = makespan.max(now);
                if next < n_toffolis {
                    q.push(ev(now, EventKind::SwitchReconfig, elu, next), Step::Start { i: next, elu })?;
                    next += 1;
                }
            }
        }
    }
    debug_assert_eq!(switch.active(), 0);

    Ok(PipelineResult {
        makespan,
        toffoli_times: times,
        link_wait_fraction: if busy > 0.0 { wait / busy } else { 0.0 },
        stage_a,
        stage_b,
        attempts,
        successes,
        peak_circuits: switch.peak(),
        log,
    })
}
