//! Hypercells: trees of ELUs that expose many photonic ports so that two
//! root qubits can be linked near-deterministically.
//!
//! Construction I builds a snowflake tree per neighbour and teleports one
//! successful cross-link down to the roots. Its error grows with the tree
//! depth. Construction II nests a 3D cluster state and is modelled only by
//! its linear error form.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_prob, invalid, Error, Result};
use crate::rng::stream_rng;

pub const DEFAULT_EPS_CRIT: f64 = 2.9e-3;
/// −ln P_fail, so P_fail ≈ 5%.
pub const DEFAULT_C: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypercellBudget {
    /// Length of one entanglement attempt window.
    pub t: f64,
    pub tau_e: f64,
    /// Memory lifetime; may be infinite.
    pub tau_d: f64,
    pub eps: f64,
    pub eps_crit: f64,
    /// Target −ln P_fail.
    pub c: f64,
}

impl HypercellBudget {
    pub fn new(t: f64, tau_e: f64, tau_d: f64, eps: f64) -> Result<Self> {
        let b = Self {
            t,
            tau_e,
            tau_d,
            eps,
            eps_crit: DEFAULT_EPS_CRIT,
            c: DEFAULT_C,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name, x: f64| {
            if x > 0.0 && !x.is_nan() {
                Ok(())
            } else {
                Err(invalid(name, format!("{x} must be positive")))
            }
        };
        pos("t", self.t)?;
        pos("tau_e", self.tau_e)?;
        pos("tau_d", self.tau_d)?;
        pos("eps_crit", self.eps_crit)?;
        pos("c", self.c)?;
        if !self.t.is_finite() || !self.tau_e.is_finite() {
            return Err(invalid("t", "attempt window and τ_E must be finite"));
        }
        if self.t > self.tau_e {
            return Err(invalid("t", "the window cannot exceed τ_E (p = t/τ_E ≤ 1)"));
        }
        check_prob("eps", self.eps)
    }

    /// Success probability of one attempt window.
    pub fn p(&self) -> f64 {
        self.t / self.tau_e
    }

    /// Ports needed for the target failure rate, `c τ_E / t`.
    pub fn ports_needed(&self) -> f64 {
        self.c * self.tau_e / self.t
    }

    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailProb {
    pub exact: f64,
    pub approx: f64,
}

/// Probability that all `m` cross-link attempts fail.
pub fn fail_prob(p: f64, m: u64) -> Result<FailProb> {
    check_prob("p", p)?;
    if m == 0 {
        return Err(invalid("m", "at least one port"));
    }
    Ok(FailProb {
        exact: (m as f64 * (-p).ln_1p()).exp(),
        approx: (-(m as f64) * p).exp(),
    })
}

/// Bell pairs between the two roots for `m` ports, `2 log₂ m + 1`.
pub fn path_length(m: u64) -> Result<u32> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid("m", format!("{m} is not a power of two ≥ 2")));
    }
    Ok(2 * m.trailing_zeros() + 1)
}

/// Same law for any `m ≥ 2` and branching `arity`: `2 log_arity m + 1`.
pub fn path_length_general(m: f64, arity: u32) -> Result<f64> {
    if !(m >= 2.0) || arity < 2 {
        return Err(invalid("m", "need m ≥ 2 and arity ≥ 2"));
    }
    Ok(2.0 * m.ln() / (arity as f64).ln() + 1.0)
}

fn log_ports(b: &HypercellBudget) -> Result<f64> {
    b.validate()?;
    let m = b.ports_needed();
    if m < 2.0 {
        return Err(Error::Domain(format!("c·τ_E/t = {m} is below 2")));
    }
    Ok(m.log2())
}

/// Memory error accrued by the root-to-root pair.
pub fn memory_error(b: &HypercellBudget) -> Result<f64> {
    let lg = log_ports(b)?;
    Ok(b.t / b.tau_d * (3.0 * lg + 0.5))
}

/// Memory error plus one swap error per intermediate ELU.
pub fn total_error(b: &HypercellBudget) -> Result<f64> {
    let lg = log_ports(b)?;
    Ok(b.t / b.tau_d * (3.0 * lg + 0.5) + 2.0 * b.eps * lg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtBounds {
    /// Shortest window keeping the gate error alone below threshold.
    pub t_min: f64,
    /// Longest window keeping the memory error below threshold.
    pub t_max: f64,
    /// Largest tolerable τ_E/τ_D.
    pub ratio_bound: f64,
    /// Whether the window is nonempty, which is necessary but not
    /// sufficient for fault tolerance.
    pub feasible: bool,
}

pub fn ft_bounds(b: &HypercellBudget) -> Result<FtBounds> {
    b.validate()?;
    let x = if b.eps > 0.0 { b.eps_crit / (2.0 * b.eps) } else { f64::INFINITY };
    let head = b.eps_crit - 2.0 * b.eps;
    let t_min = b.c * b.tau_e * (-x).exp2();
    let t_max = head * b.tau_d / 3.0;
    let ratio_bound = if head <= 0.0 { 0.0 } else { head / (3.0 * b.c) * x.exp2() };
    Ok(FtBounds {
        t_min,
        t_max,
        ratio_bound,
        feasible: t_min < t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypercellCost {
    /// Natural log of the cost.
    pub ln_cost: f64,
    /// The cost itself when it fits in an f64.
    pub value: Option<f64>,
}

/// `(1/p)^(4.5 c / p)`, evaluated in the log domain.
pub fn hypercell_cost(p: f64, c: f64) -> Result<HypercellCost> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("{p} not in (0, 1]")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c", "must be positive"));
    }
    let ln_cost = 4.5 * c / p * (-p.ln());
    let v = ln_cost.exp();
    Ok(HypercellCost {
        ln_cost,
        value: v.is_finite().then_some(v),
    })
}

/// Construction II error `c₁ t/τ_D + c₂ ε`.
pub fn construction2_error(t: f64, tau_d: f64, eps: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(invalid("c1", "c₁ and c₂ must be positive"));
    }
    if !(t >= 0.0 && tau_d > 0.0) {
        return Err(invalid("t", "need t ≥ 0 and τ_D > 0"));
    }
    check_prob("eps", eps)?;
    Ok(c1 * t / tau_d + c2 * eps)
}

/// Longest window for Construction II, or `None` when the gate error alone
/// is at or above threshold.
pub fn construction2_max_t(eps_crit: f64, tau_d: f64, eps: f64, c1: f64, c2: f64) -> Result<Option<f64>> {
    construction2_error(0.0, tau_d, eps, c1, c2)?;
    let head = eps_crit - c2 * eps;
    Ok((head > 0.0).then(|| head * tau_d / c1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuildMode {
    /// Every tree link in the same window, repeated until all succeed.
    SingleShot,
    /// Links retried one by one, leaves first.
    Staged,
}

/// One snowflake tree: the root is linked to a base ELU, which branches
/// `layers` times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// 3, 4 or 5; branching is one less.
    pub elu_coordination: u32,
    pub layers: u32,
    pub mode: BuildMode,
}

impl TreeConfig {
    pub fn new(elu_coordination: u32, layers: u32) -> Result<Self> {
        let c = Self {
            elu_coordination,
            layers,
            mode: BuildMode::SingleShot,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=5).contains(&self.elu_coordination) {
            return Err(invalid("elu_coordination", "must be 3, 4 or 5"));
        }
        if self.layers == 0 {
            return Err(invalid("layers", "need at least one layer"));
        }
        if self.ports() > 1e15 {
            return Err(invalid("layers", "tree too large"));
        }
        Ok(())
    }

    pub fn arity(&self) -> u32 {
        self.elu_coordination - 1
    }

    /// Free ports on the top layer, `arity^(layers+1)`.
    pub fn ports(&self) -> f64 {
        (self.arity() as f64).powi(self.layers as i32 + 1)
    }

    /// Links from the root to a top-layer ELU.
    pub fn depth(&self) -> u32 {
        self.layers + 1
    }

    /// Links in one tree.
    pub fn links(&self) -> f64 {
        let a = self.arity() as f64;
        (0..=self.layers).map(|k| a.powi(k as i32)).sum()
    }

    /// Bell pairs between the roots.
    pub fn path_length(&self) -> u32 {
        2 * self.depth() + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeBuildResult {
    pub trials: u64,
    pub success_rate: f64,
    /// Share of successful trials whose root pair picked up an error.
    pub mean_accumulated_error: f64,
    pub error_stderr: f64,
    /// Mean of the per-trial summed error probabilities.
    pub mean_expected_error: f64,
    /// Mean age of tree and cross pairs on the path, in units of t.
    pub mean_tree_age: f64,
    pub mean_cross_age: f64,
    /// Mean natural log of link attempts spent building both trees.
    pub mean_ln_cost: f64,
}

const TRIAL_CHUNK: u64 = 4096;

#[derive(Default, Clone, Copy)]
struct TrialSums {
    n: u64,
    ok: u64,
    err: f64,
    expected: f64,
    tree_age: f64,
    cross_age: f64,
    ln_cost: f64,
}

impl TrialSums {
    fn add(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            ok: self.ok + o.ok,
            err: self.err + o.err,
            expected: self.expected + o.expected,
            tree_age: self.tree_age + o.tree_age,
            cross_age: self.cross_age + o.cross_age,
            ln_cost: self.ln_cost + o.ln_cost,
        }
    }
}

/// `ln` of a Geometric(q) count of windows (≥ 1), from `ln q`.
fn ln_windows(rng: &mut impl Rng, ln_q: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    if ln_q >= 0.0 {
        return 0.0;
    }
    let q = ln_q.exp();
    if q > 1e-12 {
        (1.0 + (u.ln() / (-q).ln_1p()).floor()).ln()
    } else {
        // (1 − q)^k ≈ e^{−qk}
        (-u.ln()).max(f64::MIN_POSITIVE).ln() - ln_q
    }
}

/// Largest of `n` Geometric(p) failure counts, by inverting its CDF.
fn max_geometric(rng: &mut impl Rng, p: f64, n: f64) -> f64 {
    if n <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let u: f64 = rng.random::<f64>();
    // P(max ≤ k) = (1 − (1 − p)^{k+1})^n
    let tail = -(u.ln() / n).exp_m1();
    ((tail.ln() / (-p).ln_1p()).ceil() - 1.0).max(0.0)
}

fn run_trials(cfg: &TreeConfig, b: &HypercellBudget, n: u64, seed: u64, stream: u64) -> TrialSums {
    let mut rng = stream_rng(seed, stream);
    let p = b.p();
    let depth = cfg.depth() as usize;
    let links = cfg.links();
    let ports = cfg.ports();
    let p_connect = -(ports * (-p).ln_1p()).exp_m1();
    let geo = (cfg.mode == BuildMode::Staged).then(|| Geometric::new(p).expect("p in (0, 1]"));
    let mut s = TrialSums {
        n,
        ..TrialSums::default()
    };
    let mut created = vec![0.0f64; 2 * depth];
    for _ in 0..n {
        // Creation time of each path pair in units of t, and when both
        // trees are complete.
        let (done, ln_cost) = match &geo {
            None => {
                for c in created.iter_mut() {
                    *c = rng.random::<f64>();
                }
                let ln_w = ln_windows(&mut rng, 2.0 * links * p.ln());
                (1.0, (2.0 * links).ln() + ln_w)
            }
            Some(g) => {
                let mut last = 0.0f64;
                let mut attempts = 0.0;
                for c in created.iter_mut() {
                    let k = g.sample(&mut rng) as f64;
                    attempts += k + 1.0;
                    last = last.max(k);
                    *c = k + rng.random::<f64>();
                }
                // Off-path links only set the completion time.
                let off = 2.0 * links - 2.0 * depth as f64;
                last = last.max(max_geometric(&mut rng, p, off));
                attempts += off / p;
                (last + 1.0, attempts.ln())
            }
        };
        s.ln_cost += ln_cost;
        if rng.random::<f64>() >= p_connect {
            continue;
        }
        s.ok += 1;
        let cross = done + rng.random::<f64>();
        let end = done + 1.0;
        let mut any = false;
        let mut expected = 0.0;
        for &c in &created {
            let age = end - c;
            s.tree_age += age / (2 * depth) as f64;
            let pm = (age * b.t / b.tau_d).min(1.0);
            expected += pm;
            any |= rng.random::<f64>() < pm;
        }
        let cross_age = end - cross;
        s.cross_age += cross_age;
        let pm = (cross_age * b.t / b.tau_d).min(1.0);
        expected += pm;
        any |= rng.random::<f64>() < pm;
        // One swap in every ELU between the roots.
        for _ in 0..2 * depth {
            expected += b.eps;
            any |= rng.random::<f64>() < b.eps;
        }
        s.err += any as u8 as f64;
        s.expected += expected;
    }
    s
}

/// Monte Carlo of building two trees and linking their roots.
pub fn mc_tree_build(
    cfg: &TreeConfig,
    b: &HypercellBudget,
    trials: u64,
    seed: u64,
) -> Result<TreeBuildResult> {
    cfg.validate()?;
    b.validate()?;
    if trials < 100 {
        return Err(invalid("trials", "need at least 100"));
    }
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let parts: Vec<TrialSums> = (0..chunks)
        .into_par_iter()
        .map(|c| run_trials(cfg, b, TRIAL_CHUNK.min(trials - c * TRIAL_CHUNK), seed, c))
        .collect();
    let t = parts.iter().fold(TrialSums::default(), |a, p| a.add(*p));
    let ok = t.ok.max(1) as f64;
    let e = t.err / ok;
    Ok(TreeBuildResult {
        trials,
        success_rate: t.ok as f64 / t.n as f64,
        mean_accumulated_error: e,
        error_stderr: (e * (1.0 - e) / ok).sqrt(),
        mean_expected_error: t.expected / ok,
        mean_tree_age: t.tree_age / ok,
        mean_cross_age: t.cross_age / ok,
        mean_ln_cost: t.ln_cost / t.n as f64,
    })
}

pub const BOUNDARY_CSV_HEADER: &str = "eps,ratio,t_opt,layers_opt,eps_total,p_fail,feasible";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub eps: f64,
    /// τ_E/τ_D.
    pub ratio: f64,
    /// Window in units of τ_D.
    pub t_opt: f64,
    pub layers_opt: u32,
    pub eps_total: f64,
    pub p_fail: f64,
    pub feasible: bool,
}

impl BoundaryPoint {
    pub fn csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{},{:e},{:.6},{}",
            self.eps, self.ratio, self.t_opt, self.layers_opt, self.eps_total, self.p_fail, self.feasible
        )
    }
}

/// Expected root-pair error of a tree depth, with the window set so that
/// `m p = c`.
fn tree_error(depth: f64, t_over_tau_d: f64, eps: f64) -> f64 {
    t_over_tau_d * (3.0 * depth + 0.5) + 2.0 * eps * depth
}

/// Searches tree depth (and with it the window `t = c τ_E / m`) for the
/// lowest root-pair error at each grid point. With `trials > 0` the chosen
/// configuration is re-estimated by Monte Carlo and that estimate decides
/// feasibility.
pub fn boundary_scan(
    eps_grid: &[f64],
    ratio_grid: &[f64],
    coordination: u32,
    eps_crit: f64,
    c: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<BoundaryPoint>> {
    if eps_grid.is_empty() || ratio_grid.is_empty() {
        return Err(invalid("grid", "grids must be nonempty"));
    }
    TreeConfig::new(coordination, 1)?;
    let arity = (coordination - 1) as f64;
    let mut out = Vec::with_capacity(eps_grid.len() * ratio_grid.len());
    for (i, &eps) in eps_grid.iter().enumerate() {
        check_prob("eps", eps)?;
        for (j, &ratio) in ratio_grid.iter().enumerate() {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(invalid("ratio", "τ_E/τ_D must be positive"));
            }
            let mut best: Option<(f64, u32, f64, f64)> = None;
            for layers in 1..=48u32 {
                let m = arity.powi(layers as i32 + 1);
                if m > 1e15 {
                    break;
                }
                if m < c {
                    continue;
                }
                let t = c * ratio / m;
                let err = tree_error((layers + 1) as f64, t, eps);
                if best.is_none_or(|b| err < b.2) {
                    let pf = fail_prob(c / m, m as u64).map(|f| f.exact).unwrap_or(0.0);
                    best = Some((t, layers, err, pf));
                }
            }
            let (t, layers, mut err, mut pf) =
                best.ok_or_else(|| invalid("c", "no tree depth reaches c ports"))?;
            if trials > 0 {
                let cfg = TreeConfig::new(coordination, layers)?;
                let b = HypercellBudget {
                    t: t / ratio,
                    tau_e: 1.0,
                    tau_d: 1.0 / ratio,
                    eps,
                    eps_crit,
                    c,
                };
                let stream_seed = seed ^ ((i as u64) << 32 | j as u64);
                let r = mc_tree_build(&cfg, &b, trials, stream_seed)?;
                err = r.mean_accumulated_error;
                pf = 1.0 - r.success_rate;
            }
            out.push(BoundaryPoint {
                eps,
                ratio,
                t_opt: t,
                layers_opt: layers,
                eps_total: err,
                p_fail: pf,
                feasible: err < eps_crit,
            });
        }
    }
    Ok(out)
}

pub fn boundary_csv(points: &[BoundaryPoint]) -> String {
    let mut s = String::from(BOUNDARY_CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{}", p.csv());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn fail_prob_examples() {
        assert_eq!(fail_prob(1.0, 5).unwrap().exact, 0.0);
        let f = fail_prob(0.01, 300).unwrap();
        assert_relative_eq!(f.exact, 0.04904, max_relative = 1e-3);
        assert_relative_eq!(f.approx, 0.04979, max_relative = 1e-3);
        assert!(fail_prob(0.5, 0).is_err());
    }

    #[test]
    fn path_lengths() {
        assert_eq!(path_length(2).unwrap(), 3);
        assert_eq!(path_length(256).unwrap(), 17);
        assert!(path_length(3).is_err());
        for k in 1..40 {
            assert_eq!(path_length(1 << (k + 1)).unwrap(), path_length(1 << k).unwrap() + 2);
        }
        let t = TreeConfig::new(3, 7).unwrap();
        assert_eq!(t.ports(), 256.0);
        assert_eq!(t.path_length(), 17);
        assert_relative_eq!(path_length_general(81.0, 3).unwrap(), 9.0, max_relative = 1e-12);
    }

    #[test]
    fn memory_error_examples() {
        let b = HypercellBudget::new(1e-3, 1.0, 1.0, 0.0).unwrap();
        let want = 1e-3 * (3.0 * 3000f64.log2() + 0.5);
        assert_relative_eq!(memory_error(&b).unwrap(), want, max_relative = 1e-12);
        assert!((want - 0.0352).abs() < 1e-4);
        let slow = HypercellBudget { tau_d: 2.0, ..b };
        assert_relative_eq!(memory_error(&slow).unwrap(), want / 2.0, max_relative = 1e-12);
        let tiny = HypercellBudget { t: 1e-300, ..b };
        assert!(memory_error(&tiny).unwrap() < 1e-295);
        let wide = HypercellBudget { t: 1.0, c: 1.0, ..b };
        assert!(matches!(memory_error(&wide), Err(Error::Domain(_))));
    }

    #[test]
    fn total_error_examples() {
        let b = HypercellBudget::new(1e-3, 1.0, 10.0, 0.0).unwrap();
        assert_eq!(total_error(&b).unwrap(), memory_error(&b).unwrap());
        // m = 2: the log term is one.
        let two = HypercellBudget { t: 1.5, tau_e: 1.5, c: 2.0, eps: 1e-3, ..b };
        assert_relative_eq!(
            total_error(&two).unwrap(),
            memory_error(&two).unwrap() + 2e-3,
            max_relative = 1e-12
        );
        assert!(total_error(&b.with_eps(2e-3)).unwrap() > total_error(&b.with_eps(1e-3)).unwrap());
    }

    #[test]
    fn bounds_examples() {
        let b = HypercellBudget::new(1e-3, 1.0, 1.0, 2.9e-4).unwrap();
        let f = ft_bounds(&b).unwrap();
        let want = (2.9e-3 - 5.8e-4) / 9.0 * 32.0;
        assert_relative_eq!(f.ratio_bound, want, max_relative = 1e-12);
        assert!((f.ratio_bound / 8.25e-3 - 1.0).abs() < 0.01);
        assert!(!f.feasible);
        assert!(ft_bounds(&b.with_eps(0.0)).unwrap().ratio_bound.is_infinite());
        let half = ft_bounds(&b.with_eps(1.45e-3)).unwrap();
        assert_eq!(half.ratio_bound, 0.0);
        assert!(!half.feasible);
    }

    #[test]
    fn cost_examples() {
        assert_eq!(hypercell_cost(1.0, 3.0).unwrap().value, Some(1.0));
        assert_relative_eq!(hypercell_cost(0.5, 1.0).unwrap().value.unwrap(), 512.0, max_relative = 1e-12);
        let huge = hypercell_cost(1e-3, 3.0).unwrap();
        assert!(huge.value.is_none());
        assert_relative_eq!(huge.ln_cost, 13_500.0 * 1000f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn construction2() {
        assert_eq!(construction2_error(0.0, 1.0, 1e-3, 5.0, 7.0).unwrap(), 7e-3);
        assert_eq!(construction2_error(0.25, 1.0, 0.0, 1.0, 1.0).unwrap(), 0.25);
        assert!(construction2_error(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert_eq!(construction2_max_t(1e-2, 1.0, 1e-3, 2.0, 20.0).unwrap(), None);
        assert_relative_eq!(
            construction2_max_t(1e-2, 1.0, 1e-4, 2.0, 20.0).unwrap().unwrap(),
            4e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn noiseless_deterministic_build() {
        let cfg = TreeConfig::new(3, 3).unwrap();
        let b = HypercellBudget {
            t: 1.0,
            tau_e: 1.0,
            tau_d: f64::INFINITY,
            eps: 0.0,
            eps_crit: DEFAULT_EPS_CRIT,
            c: 32.0,
        };
        for mode in [BuildMode::SingleShot, BuildMode::Staged] {
            let r = mc_tree_build(&TreeConfig { mode, ..cfg }, &b, 1000, 1).unwrap();
            assert_eq!(r.success_rate, 1.0);
            assert_eq!(r.mean_accumulated_error, 0.0);
        }
    }

    #[test]
    fn ages_match_schedule() {
        let cfg = TreeConfig::new(3, 4).unwrap();
        let b = HypercellBudget::new(3.0 / 32.0, 1.0, 1e6, 0.0).unwrap();
        let r = mc_tree_build(&cfg, &b, 50_000, 2).unwrap();
        assert!((r.mean_tree_age - 1.5).abs() < 0.01);
        assert!((r.mean_cross_age - 0.5).abs() < 0.01);
        let pf = fail_prob(b.p(), 32).unwrap().exact;
        let se = (pf * (1.0 - pf) / 50_000.0).sqrt();
        assert!((1.0 - r.success_rate - pf).abs() < 4.0 * se);
    }

    #[test]
    fn staged_is_cheaper() {
        let b = HypercellBudget::new(0.3, 1.0, 1e3, 0.0).unwrap();
        let single = TreeConfig::new(3, 2).unwrap();
        let staged = TreeConfig { mode: BuildMode::Staged, ..single };
        let a = mc_tree_build(&single, &b, 2000, 5).unwrap();
        let s = mc_tree_build(&staged, &b, 2000, 5).unwrap();
        assert!(s.mean_ln_cost <= a.mean_ln_cost, "{} vs {}", s.mean_ln_cost, a.mean_ln_cost);
    }

    #[test]
    fn scan_csv_and_monotone() {
        let eps: Vec<f64> = (0..8).map(|k| k as f64 * 2e-4).collect();
        let ratio: Vec<f64> = (0..8).map(|k| 10f64.powi(k - 6)).collect();
        let pts = boundary_scan(&eps, &ratio, 3, DEFAULT_EPS_CRIT, DEFAULT_C, 0, 1).unwrap();
        let feas = |i: usize, j: usize| pts[i * ratio.len() + j].feasible;
        for i in 0..eps.len() {
            for j in 0..ratio.len() {
                if feas(i, j) {
                    if i > 0 {
                        assert!(feas(i - 1, j));
                    }
                    if j > 0 {
                        assert!(feas(i, j - 1));
                    }
                }
            }
        }
        let csv = boundary_csv(&pts);
        assert!(csv.starts_with(BOUNDARY_CSV_HEADER));
        assert_eq!(csv.lines().count(), 65);
        assert!(boundary_scan(&[], &ratio, 3, DEFAULT_EPS_CRIT, DEFAULT_C, 0, 1).is_err());
    }

    proptest! {
        #[test]
        fn exact_fail_below_approx(p in 1e-6f64..1.0, m in 1u64..10_000) {
            let f = fail_prob(p, m).unwrap();
            prop_assert!(f.exact <= f.approx * (1.0 + 1e-12));
            // ln(1−p) + p ≥ −p²/(2(1−p))
            if p < 0.5 && f.approx > 1e-250 {
                let rel = m as f64 * p * p / (2.0 * (1.0 - p));
                prop_assert!((f.approx - f.exact) / f.approx <= rel + 1e-12);
            }
        }

        #[test]
        fn memory_error_increases_with_t(t1 in 1e-6f64..0.1, k in 1.01f64..1.4) {
            let b = HypercellBudget::new(t1, 1.0, 1.0, 0.0).unwrap();
            let b2 = HypercellBudget { t: t1 * k, ..b };
            prop_assert!(memory_error(&b2).unwrap() > memory_error(&b).unwrap());
        }

        #[test]
        fn window_implies_ratio_bound(eps in 0.0f64..2e-3, ratio in 1e-6f64..1e3, c in 0.5f64..6.0) {
            let b = HypercellBudget { t: 1e-9, tau_e: ratio, tau_d: 1.0, eps, eps_crit: DEFAULT_EPS_CRIT, c };
            let f = ft_bounds(&b).unwrap();
            if f.feasible {
                prop_assert!(ratio < f.ratio_bound);
            }
        }

        #[test]
        fn log_cost_matches_direct(p in 0.2f64..1.0, c in 0.1f64..3.0) {
            let h = hypercell_cost(p, c).unwrap();
            let direct = (1.0 / p).powf(4.5 * c / p);
            prop_assert!((h.value.unwrap() / direct - 1.0).abs() < 1e-9);
        }
    }
}
