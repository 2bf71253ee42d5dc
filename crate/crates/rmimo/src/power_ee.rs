//! Component-level precoder power consumption and energy efficiency.
//!
//! Each RF chain carries two DACs, two low-pass filters, and two mixers; a
//! single local oscillator is shared by all chains. The sub-connected
//! architectures add one phase shifter per antenna, and the reconfigurable
//! variant additionally powers the pattern-control switches of every
//! antenna.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three compared base-station architectures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Fully-digital array with fixed patterns.
    FdaT,
    /// Sub-connected hybrid array with fixed patterns.
    ScaT,
    /// Sub-connected hybrid array with reconfigurable patterns.
    ScaR,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::FdaT, Architecture::ScaT, Architecture::ScaR];

    pub fn label(&self) -> &'static str {
        match self {
            Architecture::FdaT => "FDA_T",
            Architecture::ScaT => "SCA_T",
            Architecture::ScaR => "SCA_R",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fda_t" | "fda" => Ok(Architecture::FdaT),
            "sca_t" | "sca" => Ok(Architecture::ScaT),
            "sca_r" | "r" => Ok(Architecture::ScaR),
            other => Err(Error::Config(format!(
                "unknown architecture {other:?}; expected fda_t, sca_t, or sca_r"
            ))),
        }
    }
}

/// Component power constants (milliwatts) and the transmit power used in
/// the energy-efficiency denominator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerModel {
    pub p_dac_mw: f64,
    pub p_lpf_mw: f64,
    pub p_mixer_mw: f64,
    pub p_lo_mw: f64,
    pub p_phase_shifter_mw: f64,
    pub p_switch_mw: f64,
    pub switches_per_rpa: usize,
    pub transmit_power_w: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_dac_mw: 200.0,
            p_lpf_mw: 14.0,
            p_mixer_mw: 19.0,
            p_lo_mw: 5.0,
            p_phase_shifter_mw: 30.0,
            p_switch_mw: 5.0,
            switches_per_rpa: 12,
            transmit_power_w: 14.4,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.p_dac_mw,
            self.p_lpf_mw,
            self.p_mixer_mw,
            self.p_lo_mw,
            self.p_phase_shifter_mw,
            self.p_switch_mw,
            self.transmit_power_w,
        ];
        if fields.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("power model components must be >= 0".into()));
        }
        Ok(())
    }

    fn rf_chain_mw(&self) -> f64 {
        2.0 * self.p_dac_mw + 2.0 * self.p_lpf_mw + 2.0 * self.p_mixer_mw
    }
}

/// Precoder power consumption in milliwatts.
///
/// FDA runs one RF chain per antenna; SCA runs `m_t` chains plus one phase
/// shifter per antenna; the reconfigurable variant adds the per-antenna
/// switch bank, charged flat regardless of switch state.
pub fn precoder_power(arch: Architecture, n_t: usize, m_t: usize, model: &PowerModel) -> Result<f64> {
    if n_t < m_t || m_t == 0 {
        return Err(Error::Config(format!(
            "need N_t >= M_t >= 1, got N_t={n_t}, M_t={m_t}"
        )));
    }
    model.validate()?;
    let chain = model.rf_chain_mw();
    let sca_t = m_t as f64 * chain + model.p_lo_mw + n_t as f64 * model.p_phase_shifter_mw;
    Ok(match arch {
        Architecture::FdaT => n_t as f64 * chain + model.p_lo_mw,
        Architecture::ScaT => sca_t,
        Architecture::ScaR => {
            sca_t + (n_t * model.switches_per_rpa) as f64 * model.p_switch_mw
        }
    })
}

/// Spectral efficiency, total consumed power, and their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EeRecord {
    pub se: f64,
    pub total_power_w: f64,
    pub ee: f64,
}

/// Energy efficiency: SE divided by the total consumed power, which is the
/// precoder power plus the transmit power.
pub fn energy_efficiency(
    se: f64,
    arch: Architecture,
    n_t: usize,
    m_t: usize,
    model: &PowerModel,
) -> Result<EeRecord> {
    if !(se >= 0.0) {
        return Err(Error::Domain(format!("spectral efficiency {se} must be >= 0")));
    }
    let total_power_w = precoder_power(arch, n_t, m_t, model)? / 1000.0 + model.transmit_power_w;
    Ok(EeRecord {
        se,
        total_power_w,
        ee: se / total_power_w,
    })
}
