use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use super::event::{EventKind, EventLog, EventQueue, SimEvent};
use super::oxc::{Grant, OXCSwitch};
use super::{EluState, EntanglementRequest};
use crate::device::LinkModel;
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

/// Photon flight plus detection.
pub const DEFAULT_HERALD_LATENCY: f64 = 10e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Draws the number of failures before each success in one go.
    Geometric,
    /// One Bernoulli draw and one event per attempt.
    Explicit,
}

/// Whether an ion may fire again before the herald of its previous attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackWindow {
    Blocked,
    Overlapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSimConfig {
    pub herald_latency: f64,
    pub sampling: SamplingMode,
    pub feedback: FeedbackWindow,
    pub record_log: bool,
}

impl Default for LinkSimConfig {
    fn default() -> Self {
        Self {
            herald_latency: DEFAULT_HERALD_LATENCY,
            sampling: SamplingMode::Geometric,
            feedback: FeedbackWindow::Blocked,
            record_log: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSimResult {
    pub makespan: f64,
    /// Gaps between consecutive heralded pairs, the first measured from 0.
    pub latencies: Vec<f64>,
    pub attempts: u64,
    pub successes: u64,
    /// Own-cycles an ion waits after a failed or successful attempt.
    pub cycles_after_fail: u64,
    pub cycles_after_success: u64,
    pub log: EventLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub makespan_s: f64,
    pub mean_pair_latency_s: f64,
    pub attempts: u64,
    pub successes: u64,
    pub link_wait_fraction: f64,
}

impl LinkSimResult {
    pub fn mean_latency(&self) -> f64 {
        self.latencies.iter().sum::<f64>() / self.latencies.len() as f64
    }

    pub fn throughput(&self) -> f64 {
        self.successes as f64 / self.makespan
    }

    /// A bare link run spends all of its time waiting on heralds.
    pub fn summary(&self) -> SimSummary {
        SimSummary {
            makespan_s: self.makespan,
            mean_pair_latency_s: self.mean_latency(),
            attempts: self.attempts,
            successes: self.successes,
            link_wait_fraction: 1.0,
        }
    }
}

impl SimSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

/// Attempt grid shared by every ion on a link.
///
/// Ports fire every `1/(R m_T)`; ion `s` of a port owns ticks `s + k m_T`,
/// so each ion's own cycle is `1/R`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Timing {
    pub tick: f64,
    pub m_t: u64,
    pub channels: u64,
    pub herald: f64,
    pub c_fail: u64,
    pub c_success: u64,
    pub p: f64,
}

impl Timing {
    pub fn new(link: &LinkModel<'_>, channels: u32, m_t: u32, cfg: &LinkSimConfig) -> Result<Self> {
        if !(cfg.herald_latency >= 0.0 && cfg.herald_latency.is_finite()) {
            return Err(invalid("herald_latency", "must be finite and non-negative"));
        }
        if channels == 0 || m_t == 0 {
            return Err(invalid("ports", "a link needs at least one port and one slot"));
        }
        if link.success_probability() <= 0.0 {
            return Err(crate::error::Error::ZeroSuccessProbability);
        }
        let params = link.params;
        let cycle = 1.0 / params.repetition_rate;
        let wait = |delta: f64| ((delta / cycle) - 1e-9).ceil().max(1.0) as u64;
        let (fail, success) = match cfg.feedback {
            FeedbackWindow::Blocked => (cfg.herald_latency + params.reinit_time, cfg.herald_latency),
            FeedbackWindow::Overlapped => (params.reinit_time, 0.0),
        };
        Ok(Self {
            tick: cycle / m_t as f64,
            m_t: m_t as u64,
            channels: channels as u64,
            herald: cfg.herald_latency,
            c_fail: wait(fail),
            c_success: wait(success),
            p: link.success_probability(),
        })
    }

    pub fn ions(&self) -> u64 {
        self.channels * self.m_t
    }

    fn time(&self, tick: u64) -> f64 {
        tick as f64 * self.tick
    }

    fn step(&self, success: bool) -> u64 {
        (if success { self.c_success } else { self.c_fail }) * self.m_t
    }
}

#[derive(Debug, Clone, Copy)]
enum Payload {
    Attempt { ion: u64, tick: u64 },
    Herald { success: bool },
    /// Geometric mode: a run of `fails` failures starting at `start`, ending
    /// in the success at `tick`.
    Run { ion: u64, start: u64, tick: u64, fails: u64 },
    /// Geometric mode: the successful attempt, logged in time order.
    Mark,
}

pub(crate) struct LinkRun {
    pub makespan: f64,
    pub heralds: Vec<f64>,
    pub attempts: u64,
}

/// Runs one request to completion on `timing`'s ion grid.
pub(crate) fn simulate(
    timing: &Timing,
    request: &mut EntanglementRequest,
    sampling: SamplingMode,
    rng: &mut ChaCha8Rng,
    mut log: Option<&mut EventLog>,
    request_id: usize,
) -> Result<LinkRun> {
    let mut q: EventQueue<Payload> = EventQueue::new();
    let geo = match sampling {
        SamplingMode::Geometric => Some(
            Geometric::new(timing.p).map_err(|e| invalid("p", e.to_string()))?,
        ),
        SamplingMode::Explicit => None,
    };
    let elu = request.elu_a;
    let ev = |time, kind, ion: u64| SimEvent {
        time,
        kind,
        elu_id: elu,
        port_id: (ion / timing.m_t) as usize,
        request_id,
    };
    let schedule = |q: &mut EventQueue<Payload>, rng: &mut ChaCha8Rng, ion: u64, start: u64| {
        match &geo {
            Some(g) => {
                let fails = g.sample(rng);
                let tick = start + fails * timing.step(false);
                q.push(ev(timing.time(tick), EventKind::AttemptStart, ion), Payload::Mark)?;
                q.push(
                    ev(timing.time(tick) + timing.herald, EventKind::Herald { success: true }, ion),
                    Payload::Run { ion, start, tick, fails },
                )
            }
            None => q.push(
                ev(timing.time(start), EventKind::AttemptStart, ion),
                Payload::Attempt { ion, tick: start },
            ),
        }
    };
    for ion in 0..timing.ions() {
        schedule(&mut q, rng, ion, ion % timing.m_t)?;
    }
    let mut attempts = 0u64;
    let mut heralds = Vec::with_capacity(request.pairs_needed as usize);
    // Runs still in flight when the request completes, for attempt counting.
    let mut open: Vec<(u64, u64)> = Vec::new();
    let mut makespan = 0.0;
    while let Some((e, payload)) = q.pop() {
        match payload {
            Payload::Attempt { ion, tick } => {
                attempts += 1;
                let success = rng.random_bool(timing.p);
                if let Some(l) = log.as_deref_mut() {
                    l.push(e);
                }
                q.push(
                    ev(timing.time(tick) + timing.herald, EventKind::Herald { success }, ion),
                    Payload::Herald { success },
                )?;
                let next = tick + timing.step(success);
                q.push(
                    ev(timing.time(next), EventKind::AttemptStart, ion),
                    Payload::Attempt { ion, tick: next },
                )?;
            }
            Payload::Mark => {
                if let Some(l) = log.as_deref_mut() {
                    l.push(e);
                }
            }
            Payload::Herald { success, .. } => {
                if let Some(l) = log.as_deref_mut() {
                    l.push(e);
                    if !success {
                        l.push(SimEvent { kind: EventKind::Reinit, ..e });
                    }
                }
                if success && request.record() {
                    heralds.push(e.time);
                    if request.is_done() {
                        makespan = e.time;
                        break;
                    }
                }
            }
            Payload::Run { ion, tick, fails, .. } => {
                attempts += fails + 1;
                if let Some(l) = log.as_deref_mut() {
                    l.push(e);
                }
                request.record();
                heralds.push(e.time);
                if request.is_done() {
                    makespan = e.time;
                    while let Some((_, p)) = q.pop() {
                        if let Payload::Run { start, fails, .. } = p {
                            open.push((start, fails));
                        }
                    }
                    break;
                }
                schedule(&mut q, rng, ion, tick + timing.step(true))?;
            }
        }
    }
    // Failures already started in unfinished geometric runs.
    let last_tick = (makespan / timing.tick + 1e-9).floor() as u64;
    for (start, fails) in open {
        if start <= last_tick {
            let started = (last_tick - start) / timing.step(false) + 1;
            attempts += started.min(fails + 1);
        }
    }
    Ok(LinkRun {
        makespan,
        heralds,
        attempts,
    })
}

/// Generates `n_pairs` Bell pairs between `a` and `b` with default options.
pub fn run_link_sim(
    link: &LinkModel<'_>,
    a: &EluState,
    b: &EluState,
    n_pairs: u64,
    seed: u64,
) -> Result<LinkSimResult> {
    run_link_sim_with(link, a, b, n_pairs, seed, &LinkSimConfig::default())
}

pub fn run_link_sim_with(
    link: &LinkModel<'_>,
    a: &EluState,
    b: &EluState,
    n_pairs: u64,
    seed: u64,
    cfg: &LinkSimConfig,
) -> Result<LinkSimResult> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs", "at least one pair"));
    }
    a.validate()?;
    b.validate()?;
    let channels = a.ports.min(b.ports);
    let timing = Timing::new(link, channels, a.tdm_slots.min(b.tdm_slots), cfg)?;
    let mut log = cfg.record_log.then(EventLog::default);

    // Port c of `a` is wired to port c of `b`.
    let mut switch = OXCSwitch::new(2 * channels as usize);
    let mut circuits = Vec::new();
    for c in 0..channels as usize {
        match switch.request(c, channels as usize + c)? {
            Grant::Granted(id) => circuits.push(id),
            Grant::Queued(_) => unreachable!("a fresh switch has a detector per port pair"),
        }
        if let Some(l) = log.as_mut() {
            l.push(SimEvent {
                time: 0.0,
                kind: EventKind::SwitchReconfig,
                elu_id: 0,
                port_id: c,
                request_id: 0,
            });
        }
    }
    let mut request = EntanglementRequest::new(0, 1, n_pairs);
    let mut rng = stream_rng(seed, 0);
    let run = simulate(&timing, &mut request, cfg.sampling, &mut rng, log.as_mut(), 0)?;
    for (c, id) in circuits.into_iter().enumerate() {
        switch.release(id)?;
        if let Some(l) = log.as_mut() {
            l.push(SimEvent {
                time: run.makespan,
                kind: EventKind::SwitchReconfig,
                elu_id: 0,
                port_id: c,
                request_id: 0,
            });
        }
    }
    debug_assert_eq!(switch.active(), 0);

    let mut prev = 0.0;
    let latencies = run
        .heralds
        .iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect();
    Ok(LinkSimResult {
        makespan: run.makespan,
        latencies,
        attempts: run.attempts,
        successes: request.completed,
        cycles_after_fail: timing.c_fail,
        cycles_after_success: timing.c_success,
        log: log.unwrap_or_default(),
    })
}
