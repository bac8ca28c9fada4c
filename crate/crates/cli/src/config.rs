//! `key = value` config files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use modqc_core::cluster::Q;

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "device.t_single_gate",
    "device.t_two_gate",
    "device.t_toffoli",
    "device.t_measure",
    "device.t_remote_entangle",
    "device.gamma",
    "device.repetition_rate",
    "device.dark_rate",
    "device.p_excite",
    "device.solid_angle_fraction",
    "device.detector_efficiency",
    "device.tau_decoherence",
    "device.reinit_time",
    "layout.elu_qubits",
    "layout.ports",
    "layout.m_p",
    "layout.m_t",
    "logical.ec_passes",
    "logical.ancilla_share",
    "run.seed",
    "run.arch",
    "run.n",
    "run.level",
    "threshold.eps",
    "threshold.ratio",
    "cluster.samples",
    "cluster.estimator",
    "cluster.links",
    "netsim.pairs",
    "netsim.link",
    "netsim.sampling",
    "netsim.feedback",
    "netsim.herald_latency",
    "netsim.toffolis",
    "hypercell.t",
    "hypercell.tau_e",
    "hypercell.tau_d",
    "hypercell.eps",
    "hypercell.eps_crit",
    "hypercell.c",
    "hypercell.coordination",
    "hypercell.layers",
    "hypercell.trials",
    "crossover.n_min",
    "crossover.n_max",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                bail!("line {}: unknown key `{k}`", i + 1);
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                bail!("line {}: duplicate key `{k}`", i + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.values.get(key).map(String::as_str)
    }

    /// Flag, then file, then default.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s.parse().map_err(|e| anyhow!("config key `{key}`: {e}")),
            None => Ok(default),
        }
    }

    /// Like `pick` for keys without a default.
    pub fn pick_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|s| s.parse().map_err(|e| anyhow!("config key `{key}`: {e}")))
            .transpose()
    }
}

/// Parses a plain decimal such as `0.0029`, `3e-4` or `-1.5E2` exactly.
pub fn parse_decimal(s: &str) -> Result<Q> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| anyhow!("bad exponent in `{s}`"))?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        bail!("`{s}` is not a decimal number");
    }
    let digits: i64 = format!("{int}{frac}")
        .parse()
        .map_err(|_| anyhow!("`{s}` has too many digits"))?;
    let scale = exp - frac.len() as i32;
    if scale.abs() > 18 {
        bail!("`{s}` is out of range");
    }
    let ten = 10i64.pow(scale.unsigned_abs());
    let q = if scale >= 0 {
        Q::from_integer(digits.checked_mul(ten).ok_or_else(|| anyhow!("`{s}` is out of range"))?)
    } else {
        Q::new(digits, ten)
    };
    Ok(if neg { -q } else { q })
}

/// Comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("`{x}`: {e}")))
        .collect()
}
