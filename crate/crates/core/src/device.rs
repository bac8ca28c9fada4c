//! Physical-layer parameters and closed-form link and gate timing.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_prob, invalid, Error, Result};

/// Reduced Planck constant (J·s, CODATA 2018 exact value).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Largest excitation probability accepted for a Type I link.
pub const TYPE1_MAX_EXCITE: f64 = 0.25;

/// Physical timescales and photonic link parameters.
///
/// All durations are stored in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub t_single_gate: f64,
    pub t_two_gate: f64,
    pub t_toffoli: f64,
    pub t_measure: f64,
    pub t_remote_entangle: f64,
    /// Excited-state linewidth (rad/s).
    pub gamma: f64,
    /// Excitation repetition rate R (Hz).
    pub repetition_rate: f64,
    /// Detector dark count rate (Hz).
    pub dark_rate: f64,
    pub p_excite: f64,
    pub solid_angle_fraction: f64,
    pub detector_efficiency: f64,
    /// Memory decoherence time (s).
    pub tau_decoherence: f64,
    pub reinit_time: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let gamma = 2.0 * std::f64::consts::PI * 20.0e6;
        Self {
            t_single_gate: 1.0e-6,
            t_two_gate: 10.0e-6,
            t_toffoli: 10.0e-6,
            t_measure: 30.0e-6,
            t_remote_entangle: 3000.0e-6,
            gamma,
            repetition_rate: 0.1 * gamma / (2.0 * std::f64::consts::PI),
            dark_rate: 10.0,
            p_excite: 0.05,
            solid_angle_fraction: 0.01,
            detector_efficiency: 0.2,
            tau_decoherence: 1.0,
            reinit_time: 1.0e-6,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("t_single_gate", self.t_single_gate)?;
        check_positive("t_two_gate", self.t_two_gate)?;
        check_positive("t_toffoli", self.t_toffoli)?;
        check_positive("t_measure", self.t_measure)?;
        check_positive("t_remote_entangle", self.t_remote_entangle)?;
        check_positive("gamma", self.gamma)?;
        check_positive("repetition_rate", self.repetition_rate)?;
        check_positive("tau_decoherence", self.tau_decoherence)?;
        check_positive("reinit_time", self.reinit_time)?;
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(invalid("dark_rate", "must be non-negative"));
        }
        check_prob("p_excite", self.p_excite)?;
        check_prob("solid_angle_fraction", self.solid_angle_fraction)?;
        check_prob("detector_efficiency", self.detector_efficiency)?;
        Ok(())
    }

    /// Photon collection product p_e·F·η_D.
    pub fn collection(&self) -> f64 {
        self.p_excite * self.solid_angle_fraction * self.detector_efficiency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    /// Single-photon heralding.
    TypeI,
    /// Two-photon heralding.
    TypeII,
}

/// A photonic link of a given kind over a set of device parameters.
#[derive(Debug, Clone, Copy)]
pub struct LinkModel<'a> {
    pub kind: LinkKind,
    pub params: &'a DeviceParams,
}

impl<'a> LinkModel<'a> {
    pub fn new(kind: LinkKind, params: &'a DeviceParams) -> Result<Self> {
        params.validate()?;
        if kind == LinkKind::TypeI && params.p_excite > TYPE1_MAX_EXCITE {
            return Err(invalid(
                "p_excite",
                format!(
                    "{} exceeds {TYPE1_MAX_EXCITE}; single-photon heralding assumes weak excitation",
                    params.p_excite
                ),
            ));
        }
        Ok(Self { kind, params })
    }

    pub fn success_probability(&self) -> f64 {
        link_success_probability(self)
    }

    pub fn mean_connection_time(&self) -> Result<f64> {
        mean_connection_time(self)
    }
}

pub fn link_success_probability(link: &LinkModel<'_>) -> f64 {
    let c = link.params.collection();
    match link.kind {
        LinkKind::TypeI => c,
        LinkKind::TypeII => c * c / 2.0,
    }
}

/// τ_E = 1/(R·p).
pub fn mean_connection_time(link: &LinkModel<'_>) -> Result<f64> {
    let p = link_success_probability(link);
    if p <= 0.0 {
        return Err(Error::ZeroSuccessProbability);
    }
    Ok(1.0 / (link.params.repetition_rate * p))
}

/// Connection time with `m_p` ports and `m_T` time-multiplexed ions per port.
pub fn effective_connection_time(tau_e: f64, m_p: u32, m_t: u32) -> Result<f64> {
    if m_p == 0 {
        return Err(invalid("m_p", "must be at least 1"));
    }
    if m_t == 0 {
        return Err(invalid("m_T", "must be at least 1"));
    }
    Ok(tau_e / (f64::from(m_p) * f64::from(m_t)))
}

/// Double-excitation and dark-count error probabilities of a Type I link.
pub fn type1_error_terms(params: &DeviceParams) -> (f64, f64) {
    (params.p_excite * params.p_excite, params.dark_rate / params.gamma)
}

/// Parameters of the collective motional gate inside one ELU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EluPhysics {
    /// Effective wavenumber (1/m).
    pub wavenumber: f64,
    /// Ion mass (kg).
    pub ion_mass: f64,
    /// Motional mode frequency (rad/s).
    pub mode_frequency: f64,
    /// Rabi frequency (rad/s).
    pub rabi_frequency: f64,
    pub n_qubits: u32,
}

impl EluPhysics {
    pub fn validate(&self) -> Result<()> {
        check_positive("wavenumber", self.wavenumber)?;
        check_positive("ion_mass", self.ion_mass)?;
        check_positive("mode_frequency", self.mode_frequency)?;
        if !(self.rabi_frequency >= 0.0 && self.rabi_frequency.is_finite()) {
            return Err(invalid("rabi_frequency", "must be non-negative"));
        }
        if self.n_qubits == 0 {
            return Err(invalid("n_qubits", "must be at least 1"));
        }
        let eta = self.lamb_dicke();
        if eta >= 1.0 {
            log::warn!("Lamb-Dicke parameter {eta:.3} is not small; gate rate formula is outside its regime");
        }
        Ok(())
    }

    /// η = sqrt(ħk²/(2·m0·N_q·ω)).
    pub fn lamb_dicke(&self) -> f64 {
        (HBAR * self.wavenumber * self.wavenumber
            / (2.0 * self.ion_mass * f64::from(self.n_qubits) * self.mode_frequency))
            .sqrt()
    }
}

/// Entangling gate speed R_gate = η·Ω.
pub fn elu_gate_rate(phys: &EluPhysics) -> f64 {
    phys.lamb_dicke() * phys.rabi_frequency
}
