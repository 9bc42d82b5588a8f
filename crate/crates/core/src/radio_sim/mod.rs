//! Street-scale HetNet simulator: one road segment lined with apartments,
//! some hosting a femtocell, under a distant macro base station.
//!
//! A round draws log-normal shadowing and Rayleigh fading for every link
//! and turns the resulting SINR into Shannon rates.

mod channel;
mod topology;

pub use channel::{fading_samples, sample_round, ChannelRealization, LinkKind, LinkSample, REALIZATION_CSV_HEADER};
pub use topology::{generate_topology, generate_topology_with, Apartment, Femtocell, Geometry, Point, Topology};

use serde::{Deserialize, Serialize};

use crate::error::{AuctionError, Result};

/// Macrocell path-loss model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MacroPathLoss {
    /// `17.39 + 3.76 log10(d)`, `d` in meters.
    #[default]
    Default,
    /// `128.1 + 37.6 log10(d / 1000)`, the usual urban macro model.
    Conventional,
}

/// Radio parameters of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub macro_tx_power_dbm: f64,
    pub femto_tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub macro_bandwidth_mhz: f64,
    pub femto_bandwidth_mhz: f64,
    pub femto_reuse_factor: usize,
    pub macro_antenna_gain_db: f64,
    pub ue_noise_figure_db: f64,
    pub wall_loss_db: f64,
    pub max_walls: usize,
    pub shadowing_std_db: f64,
    /// Rayleigh scale; the fading power gain has mean `sigma^2`.
    pub rayleigh_sigma: f64,
    pub macro_user_count: usize,
    pub macro_path_loss: MacroPathLoss,
    /// Links shorter than this are evaluated at this distance.
    pub min_distance_m: f64,
    pub shadowing: bool,
    pub fading: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            macro_tx_power_dbm: 46.0,
            femto_tx_power_dbm: 0.0,
            noise_density_dbm_hz: -174.0,
            macro_bandwidth_mhz: 10.0,
            femto_bandwidth_mhz: 5.0,
            femto_reuse_factor: 6,
            macro_antenna_gain_db: 7.0,
            ue_noise_figure_db: 4.0,
            wall_loss_db: 10.0,
            max_walls: 2,
            shadowing_std_db: 8.0,
            rayleigh_sigma: 1.0,
            macro_user_count: 500,
            macro_path_loss: MacroPathLoss::Default,
            min_distance_m: 1.0,
            shadowing: true,
            fading: true,
        }
    }
}

impl ChannelParams {
    /// Shadowing and fading switched off.
    pub fn deterministic() -> Self {
        ChannelParams {
            shadowing: false,
            fading: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("macro.bandwidth_mhz", self.macro_bandwidth_mhz),
            ("femto.bandwidth_mhz", self.femto_bandwidth_mhz),
            ("channel.rayleigh_sigma", self.rayleigh_sigma),
            ("channel.min_distance_m", self.min_distance_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AuctionError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let finite = [
            ("noise.density_dbm_hz", self.noise_density_dbm_hz),
            ("macro.antenna_gain_db", self.macro_antenna_gain_db),
            ("ue.noise_figure_db", self.ue_noise_figure_db),
            ("channel.wall_loss_db", self.wall_loss_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(AuctionError::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        // -inf dBm is a switched-off transmitter.
        for (name, v) in [
            ("macro.tx_power_dbm", self.macro_tx_power_dbm),
            ("femto.tx_power_dbm", self.femto_tx_power_dbm),
        ] {
            if v.is_nan() || v == f64::INFINITY {
                return Err(AuctionError::Domain(format!("{name} must be < +inf, got {v}")));
            }
        }
        if !(self.shadowing_std_db >= 0.0 && self.shadowing_std_db.is_finite()) {
            return Err(AuctionError::Domain(format!(
                "channel.shadowing_std_db must be >= 0, got {}",
                self.shadowing_std_db
            )));
        }
        if self.femto_reuse_factor == 0 {
            return Err(AuctionError::Domain("femto.reuse_factor must be >= 1".into()));
        }
        if self.macro_user_count == 0 {
            return Err(AuctionError::Domain("macro.user_count must be >= 1".into()));
        }
        Ok(())
    }

    /// Thermal noise plus receiver noise figure over `bandwidth_mhz`.
    pub fn noise_dbm(&self, bandwidth_mhz: f64) -> f64 {
        self.noise_density_dbm_hz + 10.0 * (bandwidth_mhz * 1e6).log10() + self.ue_noise_figure_db
    }

    /// Bandwidth of one femtocell sub-channel.
    pub fn femto_channel_mhz(&self) -> f64 {
        self.femto_bandwidth_mhz / self.femto_reuse_factor as f64
    }

    pub fn macro_path_loss_db(&self, d: f64) -> Result<f64> {
        match self.macro_path_loss {
            MacroPathLoss::Default => path_loss_macro(d),
            MacroPathLoss::Conventional => path_loss_macro_conventional(d),
        }
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(AuctionError::Domain(format!("distance must be positive, got {d}")))
    }
}

/// `17.39 + 3.76 log10(d)` dB at `d` meters.
pub fn path_loss_macro(d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(17.39 + 3.76 * d.log10())
}

/// `128.1 + 37.6 log10(d / 1 km)` dB at `d` meters.
pub fn path_loss_macro_conventional(d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(128.1 + 37.6 * (d / 1000.0).log10())
}

/// `38.46 + 20 log10(d) + 0.7 d` dB at `d` meters.
pub fn path_loss_femto(d: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(38.46 + 20.0 * d.log10() + 0.7 * d)
}

/// `B log2(1 + SINR)` in Mb/s for `B` in MHz and linear SINR.
pub fn shannon_rate_mbps(bandwidth_mhz: f64, sinr: f64) -> f64 {
    bandwidth_mhz * sinr.ln_1p() / std::f64::consts::LN_2
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests;
