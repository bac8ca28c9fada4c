use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::{CellLattice, LocationKind, Source};
use super::{
    stabilizer_expectation_analytic, type1_coefficient, type2_link_coefficients,
    type3_coefficient, ErrorBudget,
};
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

pub const CLUSTER_CSV_HEADER: &str =
    "eps,r,analytic_first_order,analytic_product,mc_estimate,mc_stderr,samples,seed";

pub const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// Mean of the measured stabilizer sign.
    Sign,
    /// Mean of `1 − 2N`, N the number of sources that flip the stabilizer.
    /// Its expectation is `1 − 2 Σ p_E`, the first-order expansion.
    FirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkSampling {
    /// Every Bell pair, CNOT, idle step and readout in each link gadget.
    Explicit,
    /// One draw per link from its (ZI, IZ, ZZ) class probabilities.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub estimator: Estimator,
    pub links: LinkSampling,
    /// Samples per random stream; fixes the partition across workers.
    pub chunk: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            estimator: Estimator::Sign,
            links: LinkSampling::Explicit,
            chunk: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub budget: ErrorBudget,
    pub samples: u64,
    pub seed: u64,
    pub estimator: Estimator,
    pub sign: Stat,
    pub first_order: Stat,
}

impl McResult {
    pub fn stat(&self) -> Stat {
        match self.estimator {
            Estimator::Sign => self.sign,
            Estimator::FirstOrder => self.first_order,
        }
    }

    pub fn estimate(&self) -> f64 {
        self.stat().mean
    }

    pub fn stderr(&self) -> f64 {
        self.stat().stderr
    }

    pub fn csv_row(&self) -> Result<String> {
        let a = stabilizer_expectation_analytic(&self.budget)?;
        Ok(format!(
            "{:e},{:e},{:.10},{:.10},{:.10},{:.3e},{},{}",
            self.budget.eps,
            self.budget.r,
            a.first_order,
            a.product,
            self.estimate(),
            self.stderr(),
            self.samples,
            self.seed
        ))
    }
}

fn lattice() -> &'static CellLattice {
    static L: OnceLock<CellLattice> = OnceLock::new();
    L.get_or_init(|| CellLattice::new(1).expect("default lattice is valid"))
}

/// A place where an error may strike, with its weighted outcomes.
struct McLoc {
    source: u32,
    cum: Vec<f64>,
    flips: Vec<bool>,
}

impl McLoc {
    fn uniform(source: usize, flips: Vec<bool>) -> Self {
        let n = flips.len();
        Self {
            source: source as u32,
            cum: (1..=n).map(|k| k as f64 / n as f64).collect(),
            flips,
        }
    }

    fn pick(&self, u: f64) -> bool {
        let k = self.cum.partition_point(|&c| c <= u).min(self.flips.len() - 1);
        self.flips[k]
    }
}

/// Locations grouped by their error probability. Locations that cannot
/// flip the stabilizer are dropped; they never change either estimator.
fn build_groups(lat: &CellLattice, b: &ErrorBudget, mode: LinkSampling) -> Vec<(f64, Vec<McLoc>)> {
    let mut groups: HashMap<u64, (f64, Vec<McLoc>)> = HashMap::new();
    let mut put = |p: f64, loc: McLoc| {
        if p > 0.0 && loc.flips.iter().any(|&f| f) {
            groups.entry(p.to_bits()).or_insert_with(|| (p, Vec::new())).1.push(loc);
        }
    };
    match mode {
        LinkSampling::Explicit => {
            for (i, l) in lat.locations.iter().enumerate() {
                let p = match l.kind {
                    LocationKind::Memory => b.r,
                    _ => b.eps,
                };
                put(p, McLoc::uniform(l.source, lat.outcomes(i)));
            }
        }
        LinkSampling::Effective => {
            let t2 = type2_link_coefficients();
            let (zi, iz, zz) = (t2.zi.eval(b), t2.iz.eval(b), t2.zz.eval(b));
            for (s, src) in lat.sources.iter().enumerate() {
                match *src {
                    Source::Type1 { face, .. } => {
                        let l = lat
                            .locations
                            .iter()
                            .find(|l| l.source == s && l.kind == LocationKind::BellPair)
                            .expect("type-1 source has a Bell pair");
                        debug_assert_eq!(l.qubits[0], face);
                        put(type1_coefficient().eval(b), McLoc::uniform(s, vec![l.flips[0][1]]));
                    }
                    Source::Type2 { link } => {
                        let k = lat.links[link];
                        // Z right after the link's CNOTs.
                        let z_after = |q| {
                            lat.locations
                                .iter()
                                .find(|l| {
                                    l.source == s
                                        && l.kind == LocationKind::Memory
                                        && l.step == k.slot + 1
                                        && l.qubits[0] == q
                                })
                                .expect("second idle round exists")
                                .flips[0][1]
                        };
                        let (ff, fe) = (z_after(k.face), z_after(k.edge));
                        let tot = zi + iz + zz;
                        if tot > 0.0 {
                            put(
                                tot,
                                McLoc {
                                    source: s as u32,
                                    cum: vec![zi / tot, (zi + iz) / tot, 1.0],
                                    flips: vec![ff, fe, ff ^ fe],
                                },
                            );
                        }
                    }
                    Source::Type3 { .. } => {
                        let l = lat.locations.iter().find(|l| l.source == s).expect("readout");
                        put(type3_coefficient().eval(b), McLoc::uniform(s, vec![l.flips[0][1]]));
                    }
                }
            }
        }
    }
    let mut v: Vec<(f64, Vec<McLoc>)> = groups.into_values().collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

#[derive(Default, Clone, Copy)]
struct Sums {
    n: u64,
    lin: f64,
    lin2: f64,
    sign: f64,
}

fn run_chunk(groups: &[(f64, Vec<McLoc>)], n: u64, seed: u64, stream: u64) -> Sums {
    let mut rng = stream_rng(seed, stream);
    // (sample, source, flip)
    let mut events: Vec<(u64, u32, bool)> = Vec::new();
    for (p, locs) in groups {
        let len = locs.len() as u64;
        let space = n * len;
        let geo = Geometric::new(*p).expect("probability in (0, 1]");
        let mut idx = 0u64;
        loop {
            idx = idx.saturating_add(geo.sample(&mut rng));
            if idx >= space {
                break;
            }
            let loc = &locs[(idx % len) as usize];
            let flip = loc.pick(rng.random::<f64>());
            events.push((idx / len, loc.source, flip));
            idx += 1;
        }
    }
    events.sort_unstable();
    let mut s = Sums {
        n,
        ..Sums::default()
    };
    let mut hit = 0u64;
    let mut i = 0;
    while i < events.len() {
        let sample = events[i].0;
        let mut flipped_sources = 0i64;
        while i < events.len() && events[i].0 == sample {
            let src = events[i].1;
            let mut odd = false;
            while i < events.len() && events[i].0 == sample && events[i].1 == src {
                odd ^= events[i].2;
                i += 1;
            }
            flipped_sources += odd as i64;
        }
        hit += 1;
        let lin = 1.0 - 2.0 * flipped_sources as f64;
        s.lin += lin;
        s.lin2 += lin * lin;
        s.sign += if flipped_sources % 2 == 0 { 1.0 } else { -1.0 };
    }
    let clean = (n - hit) as f64;
    s.lin += clean;
    s.lin2 += clean;
    s.sign += clean;
    s
}

fn stat(n: u64, sum: f64, sum2: f64) -> Stat {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Stat {
        mean,
        stderr: (var / nf).sqrt(),
    }
}

/// Pauli-frame estimate of the cell stabilizer expectation.
pub fn mc_stabilizer_expectation(b: &ErrorBudget, samples: u64, seed: u64) -> Result<McResult> {
    mc_stabilizer_expectation_with(b, samples, seed, &McOptions::default())
}

pub fn mc_stabilizer_expectation_with(
    b: &ErrorBudget,
    samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McResult> {
    b.validate()?;
    if samples < MIN_SAMPLES {
        return Err(invalid("samples", format!("need at least {MIN_SAMPLES}")));
    }
    if opts.chunk == 0 {
        return Err(invalid("chunk", "must be positive"));
    }
    let groups = build_groups(lattice(), b, opts.links);
    let chunks = samples.div_ceil(opts.chunk);
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = opts.chunk.min(samples - c * opts.chunk);
            run_chunk(&groups, n, seed, c)
        })
        .collect();
    // Summed in chunk order so the result does not depend on scheduling.
    let t = parts.iter().fold(Sums::default(), |a, p| Sums {
        n: a.n + p.n,
        lin: a.lin + p.lin,
        lin2: a.lin2 + p.lin2,
        sign: a.sign + p.sign,
    });
    Ok(McResult {
        budget: *b,
        samples,
        seed,
        estimator: opts.estimator,
        sign: stat(t.n, t.sign, t.n as f64),
        first_order: stat(t.n, t.lin, t.lin2),
    })
}

/// Runs every budget with the same seed and returns CSV with a header.
pub fn mc_sweep(points: &[ErrorBudget], samples: u64, seed: u64, opts: &McOptions) -> Result<String> {
    let mut out = String::from(CLUSTER_CSV_HEADER);
    out.push('\n');
    for b in points {
        let r = mc_stabilizer_expectation_with(b, samples, seed, opts)?;
        let _ = writeln!(out, "{}", r.csv_row()?);
    }
    Ok(out)
}

/// Exact first-order ⟨K⟩ from summing single-error injections.
pub fn injection_first_order(b: &ErrorBudget) -> f64 {
    1.0 - 2.0 * lattice().total_flip_weight().eval(b)
}
