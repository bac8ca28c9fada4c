//! `modqc`: command-line front end for the estimators and simulators.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_decimal, parse_list, ConfigFile};
use modqc_core::arch::{adder_row, crossover_scan, shor_estimate_with, ShorModel, ADDER_CSV_HEADER};
use modqc_core::cluster::{self, ErrorBudget, Estimator, LinkSampling, McOptions, Q};
use modqc_core::hypercell::{self, BuildMode, HypercellBudget, TreeConfig};
use modqc_core::netsim::{
    run_link_sim_with, run_toffoli_pipeline_with, EluState, FeedbackWindow, LinkSimConfig, PipelineConfig,
    SamplingMode, DEFAULT_HERALD_LATENCY,
};
use modqc_core::{ArchLayout, DeviceParams, Error, LayoutKind, LinkKind, LinkModel, LogicalCostTable, LogicalOptions};

const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "modqc", version, about = "Modular ion-trap quantum computer estimates and simulations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Adder execution time and resources.
    EstimateAdder {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        arch: Option<String>,
        #[arg(long)]
        level: Option<u8>,
    },
    /// Shor's algorithm time and qubits.
    EstimateShor {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        arch: Option<String>,
    },
    /// Cluster-state threshold margin, exact in rationals.
    Threshold {
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        /// Memory error T/τ_D.
        #[arg(long, allow_hyphen_values = true)]
        ratio: Option<String>,
        /// Margin over a grid of ε and r.
        #[arg(long, conflicts_with_all = ["eps", "ratio"])]
        scan: bool,
    },
    /// Monte Carlo of the cluster stabilizer expectation.
    McCluster {
        #[arg(long)]
        samples: Option<u64>,
        /// Comma-separated ε values.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
        /// Comma-separated r values.
        #[arg(long, allow_hyphen_values = true)]
        r: Option<String>,
        /// `sign` or `first-order`.
        #[arg(long)]
        estimator: Option<String>,
        /// `explicit` or `effective`.
        #[arg(long)]
        links: Option<String>,
    },
    /// Photonic link simulation, or a Toffoli pipeline with `--toffolis`.
    Netsim {
        #[arg(long)]
        pairs: Option<u64>,
        /// `type1` or `type2`.
        #[arg(long)]
        link: Option<String>,
        /// `geometric` or `explicit`.
        #[arg(long)]
        sampling: Option<String>,
        /// `blocked` or `overlapped`.
        #[arg(long)]
        feedback: Option<String>,
        #[arg(long)]
        toffolis: Option<u64>,
        #[arg(long)]
        p_excite: Option<f64>,
        #[arg(long)]
        m_p: Option<u32>,
        #[arg(long)]
        m_t: Option<u32>,
        /// Event log CSV.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Hypercell error budget, tree Monte Carlo, or feasibility scan.
    Hypercell {
        /// Attempt window t.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        tau_e: Option<f64>,
        #[arg(long)]
        tau_d: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        eps_crit: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        coordination: Option<u32>,
        #[arg(long)]
        layers: Option<u32>,
        #[arg(long)]
        trials: Option<u64>,
        /// Build trees one link at a time.
        #[arg(long)]
        staged: bool,
        /// Run the tree Monte Carlo.
        #[arg(long, conflicts_with = "scan")]
        mc: bool,
        /// Feasibility map over ε and τ_E/τ_D.
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 3e-3)]
        eps_max: f64,
        #[arg(long, default_value_t = 31)]
        eps_steps: usize,
        #[arg(long, default_value_t = 1e-8)]
        ratio_min: f64,
        #[arg(long, default_value_t = 1.0)]
        ratio_max: f64,
        #[arg(long, default_value_t = 33)]
        ratio_steps: usize,
    },
    /// Adder times across n and the first n where MUSIQC beats NN.
    Crossover {
        #[arg(long)]
        n_min: Option<u64>,
        #[arg(long)]
        n_max: Option<u64>,
        #[arg(long)]
        level: Option<u8>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InsufficientConcatenation { .. }) => EXIT_INFEASIBLE,
        Some(_) => EXIT_VALIDATION,
        None if e.downcast_ref::<std::io::Error>().is_some() => 1,
        None => EXIT_VALIDATION,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let params = device_params(&cfg)?;
    let options = logical_options(&cfg)?;
    let seed = cfg.pick(cli.common.seed, "run.seed", 0u64)?;
    let json = cli.common.json;
    let report = match &cli.cmd {
        Cmd::EstimateAdder { n, arch, level } => {
            let n = cfg.pick(*n, "run.n", 128u64)?;
            let layout = layout(&cfg, &cfg.pick(arch.clone(), "run.arch", "musiqc".into())?)?;
            let level = cfg.pick(*level, "run.level", 1u8)?;
            let table = LogicalCostTable::build(&params, &layout, options, level)?;
            let row = adder_row(n, &layout, &table)?;
            if json {
                serde_json::to_string_pretty(&row)?
            } else {
                format!("{ADDER_CSV_HEADER}\n{}\n", row.csv())
            }
        }
        Cmd::EstimateShor { n, arch } => {
            let n = cfg.pick(*n, "run.n", 32u64)?;
            let layout = layout(&cfg, &cfg.pick(arch.clone(), "run.arch", "musiqc".into())?)?;
            let model = ShorModel {
                options,
                ..ShorModel::default()
            };
            let e = shor_estimate_with(n, &layout, &params, &model)?;
            if json {
                serde_json::to_string_pretty(&e)?
            } else {
                format!(
                    "n,layout,level,logical_gates,logical_qubits,adder_time_s,time_s,qubits\n{},{},{},{:e},{:e},{},{},{:e}\n",
                    n,
                    layout.kind().name(),
                    e.level,
                    e.k,
                    e.q,
                    e.adder_time_s,
                    e.time_s,
                    e.qubits
                )
            }
        }
        Cmd::Threshold { eps, ratio, scan } => threshold(&cfg, eps.clone(), ratio.clone(), *scan, json)?,
        Cmd::McCluster {
            samples,
            eps,
            r,
            estimator,
            links,
        } => {
            let samples = cfg.pick(*samples, "cluster.samples", 1_000_000u64)?;
            let eps = parse_list(&eps.clone().unwrap_or_else(|| "0,1e-4,3e-4".into()))?;
            let rs = parse_list(&r.clone().unwrap_or_else(|| "0,1e-4,3e-4".into()))?;
            let estimator = match cfg.pick(estimator.clone(), "cluster.estimator", "sign".into())?.as_str() {
                "sign" => Estimator::Sign,
                "first-order" => Estimator::FirstOrder,
                other => bail!(Error::Domain(format!("unknown estimator `{other}`"))),
            };
            let links = match cfg.pick(links.clone(), "cluster.links", "explicit".into())?.as_str() {
                "explicit" => LinkSampling::Explicit,
                "effective" => LinkSampling::Effective,
                other => bail!(Error::Domain(format!("unknown link sampling `{other}`"))),
            };
            let opts = McOptions {
                estimator,
                links,
                ..McOptions::default()
            };
            let mut points = Vec::new();
            for &e in &eps {
                for &r in &rs {
                    points.push(ErrorBudget::new(e, r)?);
                }
            }
            if json {
                let rows = points
                    .iter()
                    .map(|b| cluster::mc_stabilizer_expectation_with(b, samples, seed, &opts))
                    .collect::<modqc_core::Result<Vec<_>>>()?;
                serde_json::to_string_pretty(&rows)?
            } else {
                cluster::mc_sweep(&points, samples, seed, &opts)?
            }
        }
        Cmd::Netsim {
            pairs,
            link,
            sampling,
            feedback,
            toffolis,
            p_excite,
            m_p,
            m_t,
            log,
        } => {
            let mut params = params;
            if let Some(p) = p_excite {
                params.p_excite = *p;
            }
            let kind = match cfg.pick(link.clone(), "netsim.link", "type1".into())?.as_str() {
                "type1" => LinkKind::TypeI,
                "type2" => LinkKind::TypeII,
                other => bail!(Error::Domain(format!("unknown link kind `{other}`"))),
            };
            let link = LinkModel::new(kind, &params)?;
            let sim = LinkSimConfig {
                herald_latency: cfg.pick(None, "netsim.herald_latency", DEFAULT_HERALD_LATENCY)?,
                sampling: match cfg.pick(sampling.clone(), "netsim.sampling", "geometric".into())?.as_str() {
                    "geometric" => SamplingMode::Geometric,
                    "explicit" => SamplingMode::Explicit,
                    other => bail!(Error::Domain(format!("unknown sampling `{other}`"))),
                },
                feedback: match cfg.pick(feedback.clone(), "netsim.feedback", "blocked".into())?.as_str() {
                    "blocked" => FeedbackWindow::Blocked,
                    "overlapped" => FeedbackWindow::Overlapped,
                    other => bail!(Error::Domain(format!("unknown feedback window `{other}`"))),
                },
                record_log: log.is_some(),
            };
            let mut lay = musiqc_layout(&cfg)?;
            if let Some(v) = m_p {
                lay.m_p = *v;
            }
            if let Some(v) = m_t {
                lay.m_t = *v;
            }
            ArchLayout::Musiqc(lay).validate()?;
            let (summary, events) = match cfg.pick_opt(*toffolis, "netsim.toffolis")? {
                Some(n) => {
                    let pc = PipelineConfig {
                        link: sim,
                        options,
                        ..PipelineConfig::default()
                    };
                    let r = run_toffoli_pipeline_with(n, &ArchLayout::Musiqc(lay), &link, seed, &pc)?;
                    (json!({"summary": r.summary(), "mean_toffoli_time_s": r.mean_toffoli_time()}), r.log)
                }
                None => {
                    let pairs = cfg.pick(*pairs, "netsim.pairs", 10_000u64)?;
                    let elu = EluState::new(lay.elu_qubits, lay.m_p, lay.m_t)?;
                    let r = run_link_sim_with(&link, &elu, &elu, pairs, seed, &sim)?;
                    (serde_json::to_value(r.summary())?, r.log)
                }
            };
            if let Some(path) = log {
                std::fs::write(path, events.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            format!("{summary}\n")
        }
        Cmd::Hypercell {
            t,
            tau_e,
            tau_d,
            eps,
            eps_crit,
            c,
            coordination,
            layers,
            trials,
            staged,
            mc,
            scan,
            eps_max,
            eps_steps,
            ratio_min,
            ratio_max,
            ratio_steps,
        } => {
            let eps_crit = cfg.pick(*eps_crit, "hypercell.eps_crit", hypercell::DEFAULT_EPS_CRIT)?;
            let c = cfg.pick(*c, "hypercell.c", hypercell::DEFAULT_C)?;
            let coordination = cfg.pick(*coordination, "hypercell.coordination", 3u32)?;
            let trials = cfg.pick(*trials, "hypercell.trials", if *scan { 0 } else { 100_000 })?;
            if *scan {
                if *eps_steps < 2 || *ratio_steps < 2 || !(*ratio_min > 0.0 && ratio_max > ratio_min) {
                    bail!(Error::Domain("scan grids need two points and 0 < ratio_min < ratio_max".into()));
                }
                let eg: Vec<f64> = (0..*eps_steps).map(|k| eps_max * k as f64 / (*eps_steps - 1) as f64).collect();
                let (lo, hi) = (ratio_min.log10(), ratio_max.log10());
                let rg: Vec<f64> = (0..*ratio_steps)
                    .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (*ratio_steps - 1) as f64))
                    .collect();
                let pts = hypercell::boundary_scan(&eg, &rg, coordination, eps_crit, c, trials, seed)?;
                if json {
                    serde_json::to_string_pretty(&pts)?
                } else {
                    hypercell::boundary_csv(&pts)
                }
            } else {
                let b = HypercellBudget {
                    t: cfg.pick(*t, "hypercell.t", 1e-3)?,
                    tau_e: cfg.pick(*tau_e, "hypercell.tau_e", 1.0)?,
                    tau_d: cfg.pick(*tau_d, "hypercell.tau_d", 1.0)?,
                    eps: cfg.pick(*eps, "hypercell.eps", 0.0)?,
                    eps_crit,
                    c,
                };
                b.validate()?;
                let mut report = json!({
                    "budget": b,
                    "p": b.p(),
                    "ports_needed": b.ports_needed(),
                    "memory_error": hypercell::memory_error(&b)?,
                    "total_error": hypercell::total_error(&b)?,
                    "bounds": hypercell::ft_bounds(&b)?,
                    "ln_cost": hypercell::hypercell_cost(b.p(), c)?.ln_cost,
                });
                if *mc {
                    let default_layers = ((b.ports_needed().ln() / ((coordination - 1) as f64).ln()).round() as u32)
                        .saturating_sub(1)
                        .max(1);
                    let tree = TreeConfig {
                        mode: if *staged { BuildMode::Staged } else { BuildMode::SingleShot },
                        ..TreeConfig::new(coordination, cfg.pick(*layers, "hypercell.layers", default_layers)?)?
                    };
                    report["tree"] = serde_json::to_value(tree)?;
                    report["mc"] = serde_json::to_value(hypercell::mc_tree_build(&tree, &b, trials, seed)?)?;
                }
                if json {
                    serde_json::to_string_pretty(&report)?
                } else {
                    flat_csv(&report)
                }
            }
        }
        Cmd::Crossover { n_min, n_max, level } => {
            let lo = cfg.pick(*n_min, "crossover.n_min", 32u64)?;
            let hi = cfg.pick(*n_max, "crossover.n_max", 256u64)?;
            if lo > hi {
                bail!(Error::Domain(format!("n_min {lo} exceeds n_max {hi}")));
            }
            let level = cfg.pick(*level, "run.level", 1u8)?;
            let ns: Vec<u64> = (lo..=hi).collect();
            let layouts = [ArchLayout::Musiqc(musiqc_layout(&cfg)?), ArchLayout::qla(), ArchLayout::nn()];
            let scan = crossover_scan(&ns, &layouts, &params, options, level)?;
            if json {
                serde_json::to_string_pretty(&scan)?
            } else {
                let mut s = String::from(ADDER_CSV_HEADER);
                s.push('\n');
                for r in &scan.rows {
                    s.push_str(&r.csv());
                    s.push('\n');
                }
                match scan.crossover_n {
                    Some(n) => eprintln!("MUSIQC overtakes NN at n = {n}"),
                    None => eprintln!("no crossover in [{lo}, {hi}]"),
                }
                s
            }
        }
    };
    emit(&cli.common.out, &report)
}

fn emit(out: &Option<PathBuf>, report: &str) -> Result<()> {
    let mut text = report.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Two-line CSV of a nested JSON object, with dotted column names.
fn flat_csv(v: &serde_json::Value) -> String {
    fn walk(prefix: &str, v: &serde_json::Value, cols: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(m) => {
                for (k, x) in m {
                    let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&name, x, cols);
                }
            }
            serde_json::Value::String(s) => cols.push((prefix.into(), s.clone())),
            other => cols.push((prefix.into(), other.to_string())),
        }
    }
    let mut cols = Vec::new();
    walk("", v, &mut cols);
    let (h, r): (Vec<_>, Vec<_>) = cols.into_iter().unzip();
    format!("{}\n{}\n", h.join(","), r.join(","))
}

fn threshold(cfg: &ConfigFile, eps: Option<String>, ratio: Option<String>, scan: bool, json: bool) -> Result<String> {
    let row = |e: Q, r: Q| -> Result<serde_json::Value> {
        let f = cluster::to_f64;
        ErrorBudget::new(f(e), f(r))?;
        let margin = cluster::threshold_margin_exact(e, r);
        Ok(json!({
            "eps": f(e),
            "r": f(r),
            "margin": f(margin),
            "k_first_order": f(Q::from_integer(1) - cluster::keval().eval_exact(e, r)),
            "below_threshold": margin > Q::from_integer(0),
        }))
    };
    let rows = if scan {
        let mut rows = Vec::new();
        for i in 0..=30 {
            for j in 0..=20 {
                rows.push(row(Q::new(i, 10_000), Q::new(j, 10_000))?);
            }
        }
        rows
    } else {
        let e = cfg.pick_opt(eps, "threshold.eps")?.unwrap_or_else(|| "0".into());
        let r = cfg.pick_opt(ratio, "threshold.ratio")?.unwrap_or_else(|| "0".into());
        vec![row(parse_decimal(&e)?, parse_decimal(&r)?)?]
    };
    if json {
        return Ok(serde_json::to_string_pretty(if scan { &rows[..] } else { &rows[..1] })?);
    }
    let mut s = String::from("eps,r,margin,k_first_order,below_threshold\n");
    for r in &rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r["eps"], r["r"], r["margin"], r["k_first_order"], r["below_threshold"]
        ));
    }
    Ok(s)
}

fn device_params(cfg: &ConfigFile) -> Result<DeviceParams> {
    let d = DeviceParams::default();
    let p = DeviceParams {
        t_single_gate: cfg.pick(None, "device.t_single_gate", d.t_single_gate)?,
        t_two_gate: cfg.pick(None, "device.t_two_gate", d.t_two_gate)?,
        t_toffoli: cfg.pick(None, "device.t_toffoli", d.t_toffoli)?,
        t_measure: cfg.pick(None, "device.t_measure", d.t_measure)?,
        t_remote_entangle: cfg.pick(None, "device.t_remote_entangle", d.t_remote_entangle)?,
        gamma: cfg.pick(None, "device.gamma", d.gamma)?,
        repetition_rate: cfg.pick(None, "device.repetition_rate", d.repetition_rate)?,
        dark_rate: cfg.pick(None, "device.dark_rate", d.dark_rate)?,
        p_excite: cfg.pick(None, "device.p_excite", d.p_excite)?,
        solid_angle_fraction: cfg.pick(None, "device.solid_angle_fraction", d.solid_angle_fraction)?,
        detector_efficiency: cfg.pick(None, "device.detector_efficiency", d.detector_efficiency)?,
        tau_decoherence: cfg.pick(None, "device.tau_decoherence", d.tau_decoherence)?,
        reinit_time: cfg.pick(None, "device.reinit_time", d.reinit_time)?,
    };
    p.validate()?;
    Ok(p)
}

fn logical_options(cfg: &ConfigFile) -> Result<LogicalOptions> {
    let d = LogicalOptions::default();
    Ok(LogicalOptions {
        ec_passes: cfg.pick(None, "logical.ec_passes", d.ec_passes)?,
        ancilla_share: cfg.pick(None, "logical.ancilla_share", d.ancilla_share)?,
        ..d
    })
}

fn musiqc_layout(cfg: &ConfigFile) -> Result<modqc_core::MusiqcLayout> {
    let d = modqc_core::MusiqcLayout::default();
    let l = modqc_core::MusiqcLayout {
        elu_qubits: cfg.pick(None, "layout.elu_qubits", d.elu_qubits)?,
        ports: cfg.pick(None, "layout.ports", d.ports)?,
        m_p: cfg.pick(None, "layout.m_p", d.m_p)?,
        m_t: cfg.pick(None, "layout.m_t", d.m_t)?,
        ..d
    };
    ArchLayout::Musiqc(l).validate()?;
    Ok(l)
}

fn layout(cfg: &ConfigFile, arch: &str) -> Result<ArchLayout> {
    let kind: LayoutKind = arch.parse().map_err(|e: Error| anyhow!(e))?;
    Ok(match kind {
        LayoutKind::Musiqc => ArchLayout::Musiqc(musiqc_layout(cfg)?),
        other => ArchLayout::from_kind(other),
    })
}
