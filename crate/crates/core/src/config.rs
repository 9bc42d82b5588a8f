//! Scenario configuration.
//!
//! The file format is flat `section.key = value` lines (TOML dotted keys):
//!
//! ```text
//! experiment.seed = 42
//! femto.tx_power_dbm = 0.0
//! sweep.densities = [0.1, 0.2, 0.5]
//! ```
//!
//! Omitted keys keep their defaults; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};
use crate::radio_sim::{ChannelParams, Geometry, MacroPathLoss};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seed: u64,
    /// Auction rounds per sweep point and per `single-mue`/`multi-mue` run.
    pub rounds: usize,
    /// Time slots per auction round, `T`.
    pub slots: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seed: 1,
            rounds: 500,
            slots: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuctionSection {
    /// Double-auction reserve price. `-inf` disables it.
    pub reserve_price: f64,
}

impl Default for AuctionSection {
    fn default() -> Self {
        AuctionSection {
            reserve_price: f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MueSection {
    pub demand_mbps: f64,
    pub satisfaction: f64,
    /// MUEs in a `multi-mue` run.
    pub count: usize,
}

impl Default for MueSection {
    fn default() -> Self {
        MueSection {
            demand_mbps: 4.0,
            satisfaction: 1.0,
            count: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FueSection {
    /// FUE demands are uniform on `[0, max_demand_mbps]`.
    pub max_demand_mbps: f64,
    pub satisfaction: f64,
    pub per_femto: usize,
}

impl Default for FueSection {
    fn default() -> Self {
        FueSection {
            max_demand_mbps: 6.0,
            satisfaction: 1.0,
            per_femto: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologySection {
    pub road_length_m: f64,
    pub road_width_m: f64,
    pub apartment_size_m: f64,
    pub macro_offset_m: f64,
    /// Probability that an apartment hosts a femtocell.
    pub density: f64,
}

impl Default for TopologySection {
    fn default() -> Self {
        let g = Geometry::default();
        TopologySection {
            road_length_m: g.road_length_m,
            road_width_m: g.road_width_m,
            apartment_size_m: g.apartment_size_m,
            macro_offset_m: g.macro_offset_m,
            density: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacroSection {
    pub tx_power_dbm: f64,
    pub bandwidth_mhz: f64,
    pub antenna_gain_db: f64,
    pub user_count: usize,
    pub path_loss_model: MacroPathLoss,
}

impl Default for MacroSection {
    fn default() -> Self {
        let c = ChannelParams::default();
        MacroSection {
            tx_power_dbm: c.macro_tx_power_dbm,
            bandwidth_mhz: c.macro_bandwidth_mhz,
            antenna_gain_db: c.macro_antenna_gain_db,
            user_count: c.macro_user_count,
            path_loss_model: c.macro_path_loss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FemtoSection {
    pub tx_power_dbm: f64,
    pub bandwidth_mhz: f64,
    pub reuse_factor: usize,
}

impl Default for FemtoSection {
    fn default() -> Self {
        let c = ChannelParams::default();
        FemtoSection {
            tx_power_dbm: c.femto_tx_power_dbm,
            bandwidth_mhz: c.femto_bandwidth_mhz,
            reuse_factor: c.femto_reuse_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UeSection {
    pub noise_figure_db: f64,
}

impl Default for UeSection {
    fn default() -> Self {
        UeSection {
            noise_figure_db: ChannelParams::default().ue_noise_figure_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub density_dbm_hz: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            density_dbm_hz: ChannelParams::default().noise_density_dbm_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub wall_loss_db: f64,
    pub max_walls: usize,
    pub shadowing_std_db: f64,
    pub rayleigh_sigma: f64,
    pub min_distance_m: f64,
    pub shadowing: bool,
    pub fading: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelParams::default();
        ChannelSection {
            wall_loss_db: c.wall_loss_db,
            max_walls: c.max_walls,
            shadowing_std_db: c.shadowing_std_db,
            rayleigh_sigma: c.rayleigh_sigma,
            min_distance_m: c.min_distance_m,
            shadowing: c.shadowing,
            fading: c.fading,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Density grid of the single-MUE density sweep.
    pub densities: Vec<f64>,
    pub mue_counts: Vec<usize>,
    /// One MUE-count curve per density.
    pub mue_count_densities: Vec<f64>,
    pub max_demands_mbps: Vec<f64>,
    /// MUEs in the multi-MUE half of the demand sweep.
    pub demand_mue_count: usize,
    pub demand_density: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            densities: (1..=10).map(|k| k as f64 / 10.0).collect(),
            mue_counts: vec![1, 2, 4, 6, 8, 10, 15, 20],
            mue_count_densities: vec![0.5, 1.0],
            max_demands_mbps: (1..=10).map(|k| k as f64).collect(),
            demand_mue_count: 10,
            demand_density: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruthfulnessSection {
    pub rounds: usize,
    pub factors: Vec<f64>,
    pub density: f64,
    pub max_demand_mbps: f64,
    /// MUEs in the multi-MUE panels.
    pub mue_count: usize,
}

impl Default for TruthfulnessSection {
    fn default() -> Self {
        TruthfulnessSection {
            rounds: 50,
            factors: vec![0.5, 0.8, 1.5, 2.0],
            density: 1.0,
            max_demand_mbps: 6.0,
            mue_count: 10,
        }
    }
}

/// Everything a run needs. [`Config::default`] is the reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub experiment: ExperimentSection,
    pub auction: AuctionSection,
    pub mue: MueSection,
    pub fue: FueSection,
    pub topology: TopologySection,
    #[serde(rename = "macro")]
    pub macro_bs: MacroSection,
    pub femto: FemtoSection,
    pub ue: UeSection,
    pub noise: NoiseSection,
    pub channel: ChannelSection,
    pub sweep: SweepSection,
    pub truthfulness: TruthfulnessSection,
}

fn domain(msg: String) -> AuctionError {
    AuctionError::Domain(msg)
}

fn check_density(name: &str, d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(domain(format!("{name} must be in [0, 1], got {d}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_demand(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| domain(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| domain(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| domain(format!("{}: {e}", path.display())))
    }

    /// Flat `section.key = value` rendering; [`Config::parse`] reads it back
    /// to an identical config.
    pub fn to_flat_string(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = String::new();
        if let toml::Value::Table(sections) = value {
            for (section, body) in sections {
                if let toml::Value::Table(keys) = body {
                    for (key, v) in keys {
                        out.push_str(&format!("{section}.{key} = {v}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.rounds == 0 {
            return Err(domain("experiment.rounds must be >= 1".into()));
        }
        if e.slots == 0 {
            return Err(domain("experiment.slots must be >= 1".into()));
        }
        if self.auction.reserve_price.is_nan() || self.auction.reserve_price == f64::INFINITY {
            return Err(domain("auction.reserve_price must be < +inf".into()));
        }
        check_positive("mue.demand_mbps", self.mue.demand_mbps)?;
        check_positive("mue.satisfaction", self.mue.satisfaction)?;
        check_positive("fue.satisfaction", self.fue.satisfaction)?;
        check_demand("fue.max_demand_mbps", self.fue.max_demand_mbps)?;
        if self.mue.count == 0 {
            return Err(domain("mue.count must be >= 1".into()));
        }
        check_density("topology.density", self.topology.density)?;
        self.geometry().validate()?;
        self.channel_params().validate()?;

        let s = &self.sweep;
        if s.densities.is_empty() || s.mue_counts.is_empty() || s.mue_count_densities.is_empty() || s.max_demands_mbps.is_empty()
        {
            return Err(domain("sweep grids must be non-empty".into()));
        }
        for d in s.densities.iter().chain(&s.mue_count_densities) {
            check_density("sweep densities", *d)?;
        }
        check_density("sweep.demand_density", s.demand_density)?;
        if s.mue_counts.contains(&0) || s.demand_mue_count == 0 {
            return Err(domain("sweep MUE counts must be >= 1".into()));
        }
        for d in &s.max_demands_mbps {
            check_demand("sweep.max_demands_mbps", *d)?;
        }

        let t = &self.truthfulness;
        if t.rounds == 0 {
            return Err(domain("truthfulness.rounds must be >= 1".into()));
        }
        if t.factors.is_empty() {
            return Err(domain("truthfulness.factors must be non-empty".into()));
        }
        if let Some(f) = t.factors.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
            return Err(domain(format!("manipulation factors must be finite and >= 0, got {f}")));
        }
        check_density("truthfulness.density", t.density)?;
        check_demand("truthfulness.max_demand_mbps", t.max_demand_mbps)?;
        if t.mue_count == 0 {
            return Err(domain("truthfulness.mue_count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            road_length_m: self.topology.road_length_m,
            road_width_m: self.topology.road_width_m,
            apartment_size_m: self.topology.apartment_size_m,
            macro_offset_m: self.topology.macro_offset_m,
            fues_per_femto: self.fue.per_femto,
        }
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            macro_tx_power_dbm: self.macro_bs.tx_power_dbm,
            femto_tx_power_dbm: self.femto.tx_power_dbm,
            noise_density_dbm_hz: self.noise.density_dbm_hz,
            macro_bandwidth_mhz: self.macro_bs.bandwidth_mhz,
            femto_bandwidth_mhz: self.femto.bandwidth_mhz,
            femto_reuse_factor: self.femto.reuse_factor,
            macro_antenna_gain_db: self.macro_bs.antenna_gain_db,
            ue_noise_figure_db: self.ue.noise_figure_db,
            wall_loss_db: self.channel.wall_loss_db,
            max_walls: self.channel.max_walls,
            shadowing_std_db: self.channel.shadowing_std_db,
            rayleigh_sigma: self.channel.rayleigh_sigma,
            macro_user_count: self.macro_bs.user_count,
            macro_path_loss: self.macro_bs.path_loss_model,
            min_distance_m: self.channel.min_distance_m,
            shadowing: self.channel.shadowing,
            fading: self.channel.fading,
        }
    }
}
