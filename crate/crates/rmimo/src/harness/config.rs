//! Scenario configuration: a TOML document in which every field defaults to
//! the urban-macro evaluation setup, with per-preset adjustments applied
//! underneath whatever the file or command line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModelParams;
use crate::emr_search::SearchConfig;
use crate::error::{Error, Result};
use crate::patterns::{make_type_set, PatternSet};
use crate::power_ee::{Architecture, PowerModel};

/// The packaged experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Free-space E-field comparison over a fixed aperture.
    Fig1,
    /// Per-region SE gains at one scheduled user per TTI.
    Regions,
    /// SE distribution across scheduled-user counts.
    Cdf,
    /// Energy efficiency across scheduled-user counts.
    Ee,
    Custom,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Regions => "regions",
            Preset::Cdf => "cdf",
            Preset::Ee => "ee",
            Preset::Custom => "custom",
        }
    }
}

/// Free-space experiment geometry and sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Fig1Config {
    pub n_sweep: Vec<usize>,
    pub draws: usize,
    /// Element count of the dense-discretization reference arm.
    pub dense_reference_n: usize,
    pub aperture_wavelengths: f64,
    pub target_x_m: [f64; 2],
    pub target_y_m: [f64; 2],
    /// Dipole axis of the fixed-pattern arm. The default lies along the
    /// array so in-plane targets see the elevation roll-off of the element
    /// pattern; the reconfigurable arm rotates it away per element.
    pub fixed_dipole_axis: [f64; 3],
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            n_sweep: vec![2, 4, 8, 16, 32, 64],
            draws: 3000,
            dense_reference_n: 1024,
            aperture_wavelengths: 4.0,
            target_x_m: [5.0, 50.0],
            target_y_m: [50.0, 100.0],
            fixed_dipole_axis: [0.0, 1.0, 0.0],
        }
    }
}

/// Greedy-search settings as they appear in the config document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub t_iter: usize,
    pub budget: Option<usize>,
    pub early_exit: bool,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            t_iter: d.t_iter,
            budget: d.budget,
            early_exit: d.early_exit,
        }
    }
}

impl SearchSettings {
    pub fn to_search_config(&self) -> SearchConfig {
        SearchConfig {
            t_iter: self.t_iter,
            budget: self.budget,
            early_exit: self.early_exit,
        }
    }
}

/// Full resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub preset: Preset,
    pub seed: u64,
    pub n_t: usize,
    pub m_t: usize,
    pub dual_polarized: bool,
    pub element_spacing_wavelengths: f64,
    /// Scheduled users per TTI for presets that do not sweep user counts.
    pub users_per_tti: usize,
    /// User counts swept by the cdf and ee presets.
    pub user_counts: Vec<usize>,
    pub ue_count: usize,
    pub trials: usize,
    pub ttis_per_trial: usize,
    pub indoor_ratio: f64,
    pub cell_radius_min_m: f64,
    pub cell_radius_max_m: f64,
    /// Angular width of the served sector, centered on boresight.
    pub sector_deg: f64,
    pub architectures: Vec<Architecture>,
    pub phase_bits: Option<u32>,
    /// Cell transmit power driving the link budget (the energy-efficiency
    /// denominator uses `power.transmit_power_w` instead).
    pub tx_power_dbm: f64,
    pub search: SearchSettings,
    pub patterns: PatternSet,
    pub channel: ChannelModelParams,
    pub power: PowerModel,
    pub fig1: Fig1Config,
    /// Optional fixed UE drop shared by all trials, one `x y z indoor` line
    /// per user.
    pub ue_positions_file: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Custom,
            seed: 1,
            n_t: 32,
            m_t: 8,
            dual_polarized: true,
            element_spacing_wavelengths: 0.5,
            users_per_tti: 4,
            user_counts: vec![1, 2, 4, 6],
            ue_count: 15,
            trials: 50,
            ttis_per_trial: 15,
            indoor_ratio: 0.2,
            cell_radius_min_m: 35.0,
            cell_radius_max_m: 289.0,
            sector_deg: 120.0,
            architectures: vec![Architecture::FdaT, Architecture::ScaT, Architecture::ScaR],
            phase_bits: Some(4),
            tx_power_dbm: 42.0,
            search: SearchSettings::default(),
            patterns: make_type_set(),
            channel: ChannelModelParams::default(),
            power: PowerModel::default(),
            fig1: Fig1Config::default(),
            ue_positions_file: None,
        }
    }
}

impl ScenarioConfig {
    /// Baseline configuration of a preset before file or flag overrides.
    pub fn for_preset(preset: Preset) -> Self {
        let mut cfg = Self {
            preset,
            ..Self::default()
        };
        match preset {
            Preset::Regions => {
                cfg.users_per_tti = 1;
                cfg.architectures = vec![Architecture::ScaT, Architecture::ScaR];
                cfg.trials = 200;
                cfg.ttis_per_trial = 15;
            }
            Preset::Cdf | Preset::Ee => {
                cfg.trials = 30;
                cfg.ttis_per_trial = 10;
            }
            Preset::Fig1 | Preset::Custom => {}
        }
        cfg
    }

    /// Parses a config document, treating the preset's baseline as the
    /// default for every missing field.
    pub fn from_toml_str(text: &str, preset: Preset) -> Result<Self> {
        let overlay: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        let base = toml::Table::try_from(Self::for_preset(preset))
            .map_err(|e| Error::Config(format!("internal default serialization: {e}")))?;
        let merged = merge_tables(base, overlay);
        let mut cfg: Self = merged
            .try_into()
            .map_err(|e| Error::Config(format!("config error: {e}")))?;
        cfg.preset = preset;
        Ok(cfg)
    }

    pub fn load(path: &Path, preset: Preset) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, preset)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize config: {e}")))
    }

    /// Transmit power of the link budget in watts.
    pub fn tx_power_watts(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - 30.0) / 10.0)
    }

    /// Transmit power per subcarrier in watts.
    pub fn tx_power_per_subcarrier(&self) -> f64 {
        self.tx_power_watts() / self.channel.n_subcarriers as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.m_t == 0 || self.n_t < self.m_t {
            return Err(Error::Config(format!(
                "need N_t >= M_t >= 1, got N_t={}, M_t={}",
                self.n_t, self.m_t
            )));
        }
        if !self.n_t.is_multiple_of(self.m_t) {
            return Err(Error::Config(format!(
                "M_t={} must divide N_t={} for the sub-connected architecture",
                self.m_t, self.n_t
            )));
        }
        if self.dual_polarized && !self.n_t.is_multiple_of(2) {
            return Err(Error::Config("dual polarization needs an even N_t".into()));
        }
        if self.users_per_tti == 0 || self.users_per_tti > self.m_t {
            return Err(Error::Config(format!(
                "users per TTI must satisfy 1 <= U <= M_t, got {}",
                self.users_per_tti
            )));
        }
        if self.users_per_tti > self.ue_count {
            return Err(Error::Config("cannot schedule more users than the pool".into()));
        }
        if matches!(self.preset, Preset::Cdf | Preset::Ee | Preset::Custom) {
            for &u in &self.user_counts {
                if u == 0 || u > self.m_t || u > self.ue_count {
                    return Err(Error::Config(format!("invalid swept user count {u}")));
                }
            }
        }
        if self.trials == 0 || self.ttis_per_trial == 0 {
            return Err(Error::Config("trials and TTIs must be >= 1".into()));
        }
        if !(self.cell_radius_min_m > 0.0 && self.cell_radius_max_m > self.cell_radius_min_m) {
            return Err(Error::Config(format!(
                "cell radius bounds [{}, {}] must be ordered and positive",
                self.cell_radius_min_m, self.cell_radius_max_m
            )));
        }
        if !(0.0..=1.0).contains(&self.indoor_ratio) {
            return Err(Error::Config(format!(
                "indoor ratio {} outside [0, 1]",
                self.indoor_ratio
            )));
        }
        if !(self.sector_deg > 0.0 && self.sector_deg <= 360.0) {
            return Err(Error::Config(format!(
                "sector width {} outside (0, 360]",
                self.sector_deg
            )));
        }
        if self.architectures.is_empty() {
            return Err(Error::Config("at least one architecture is required".into()));
        }
        if self.search.t_iter == 0 {
            return Err(Error::Config("greedy search needs t_iter >= 1".into()));
        }
        if self.fig1.draws == 0 || self.fig1.n_sweep.is_empty() || self.fig1.dense_reference_n == 0
        {
            return Err(Error::Config("fig1 needs draws, a sweep, and a reference N".into()));
        }
        if self.fig1.target_x_m[0] > self.fig1.target_x_m[1]
            || self.fig1.target_y_m[0] > self.fig1.target_y_m[1]
        {
            return Err(Error::Config("fig1 target ranges must be ordered".into()));
        }
        let axis = self.fig1.fixed_dipole_axis;
        if axis.iter().map(|c| c * c).sum::<f64>() == 0.0 {
            return Err(Error::Config("fig1 fixed dipole axis must be non-zero".into()));
        }
        self.channel.validate()?;
        self.power.validate()?;
        Ok(())
    }
}

/// Recursive TOML merge: overlay tables merge into base tables; any other
/// overlay value replaces the base value.
fn merge_tables(mut base: toml::Table, overlay: toml::Table) -> toml::Table {
    for (key, value) in overlay {
        match (base.remove(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                base.insert(key, toml::Value::Table(merge_tables(b, o)));
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
    base
}
