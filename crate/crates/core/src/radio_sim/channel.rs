use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{
    db_to_linear, linear_to_db, path_loss_femto, shannon_rate_mbps, ChannelParams, Point, Topology,
};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// Macro BS to MUE.
    MacroMue,
    /// Femtocell to one of its own FUEs.
    FemtoFue,
    /// Femtocell to an MUE it could serve.
    FemtoMue,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::MacroMue => "macro-mue",
            LinkKind::FemtoFue => "femto-fue",
            LinkKind::FemtoMue => "femto-mue",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub kind: LinkKind,
    /// Femtocell index, or 0 for the macro BS.
    pub tx: usize,
    /// MUE index, or `femto * fues_per_femto + k` for FUE `k`.
    pub rx: usize,
    pub distance_m: f64,
    pub walls: usize,
    pub path_loss_db: f64,
    pub shadow_db: f64,
    /// Linear fast-fading power gain `|h|^2`.
    pub fade_gain: f64,
    pub sinr_db: f64,
    pub rate_mbps: f64,
}

pub const REALIZATION_CSV_HEADER: &str =
    "link_id,kind,tx,rx,distance_m,walls,path_loss_db,shadow_db,fade_gain,sinr_db,rate_mbps";

/// One round of link draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub links: Vec<LinkSample>,
    /// `fue_rates[j][k]`: rate of FUE `k` when femtocell `j` serves it alone.
    pub fue_rates: Vec<Vec<f64>>,
    /// `mue_femto_rates[m][j]`: rate femtocell `j` would give MUE `m` over
    /// a whole round.
    pub mue_femto_rates: Vec<Vec<f64>>,
    /// MUE's share of the macro cell, `R^mac`.
    pub mue_macro_rates: Vec<f64>,
}

impl ChannelRealization {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(96 * (self.links.len() + 1));
        out.push_str(REALIZATION_CSV_HEADER);
        out.push('\n');
        for (id, l) in self.links.iter().enumerate() {
            let _ = writeln!(
                out,
                "{id},{},{},{},{},{},{},{},{},{},{}",
                l.kind.as_str(),
                l.tx,
                l.rx,
                l.distance_m,
                l.walls,
                l.path_loss_db,
                l.shadow_db,
                l.fade_gain,
                l.sinr_db,
                l.rate_mbps
            );
        }
        out
    }
}

struct Sampler<'a> {
    topo: &'a Topology,
    params: &'a ChannelParams,
    rng: ChaCha8Rng,
}

/// Shadowing (dB) and fast-fading power gain for one link. Both are always
/// drawn so that toggling either leaves every other draw unchanged.
fn draw_fading(p: &ChannelParams, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let z: f64 = StandardNormal.sample(rng);
    let e: f64 = Exp1.sample(rng);
    let shadow = if p.shadowing { z * p.shadowing_std_db } else { 0.0 };
    let fade = if p.fading { e * p.rayleigh_sigma * p.rayleigh_sigma } else { 1.0 };
    (shadow, fade)
}

struct Draw {
    distance_m: f64,
    walls: usize,
    path_loss_db: f64,
    shadow_db: f64,
    fade_gain: f64,
    rx_dbm: f64,
}

impl Sampler<'_> {
    fn femto_link(&mut self, from: Point, to: Point) -> Result<Draw> {
        let p = self.params;
        let distance_m = from.distance(to);
        let walls = self.topo.walls_between(from, to).min(p.max_walls);
        let path_loss_db = path_loss_femto(distance_m.max(p.min_distance_m))?;
        let (shadow_db, fade_gain) = draw_fading(p, &mut self.rng);
        let rx_dbm = p.femto_tx_power_dbm - path_loss_db - walls as f64 * p.wall_loss_db - shadow_db
            + linear_to_db(fade_gain);
        Ok(Draw {
            distance_m,
            walls,
            path_loss_db,
            shadow_db,
            fade_gain,
            rx_dbm,
        })
    }

    fn macro_link(&mut self, to: Point) -> Result<Draw> {
        let p = self.params;
        let distance_m = self.topo.macro_bs.distance(to);
        let path_loss_db = p.macro_path_loss_db(distance_m.max(p.min_distance_m))?;
        let (shadow_db, fade_gain) = draw_fading(p, &mut self.rng);
        let rx_dbm = p.macro_tx_power_dbm + p.macro_antenna_gain_db - path_loss_db - shadow_db
            + linear_to_db(fade_gain);
        Ok(Draw {
            distance_m,
            walls: 0,
            path_loss_db,
            shadow_db,
            fade_gain,
            rx_dbm,
        })
    }

    /// Serving femtocell `j` to `to`, interfered by co-channel femtocells.
    fn femto_served(&mut self, j: usize, to: Point) -> Result<(Draw, f64, f64)> {
        let reuse = self.params.femto_reuse_factor;
        let signal = self.femto_link(self.topo.femtos[j].position, to)?;
        let mut interference_mw = 0.0;
        for k in (j % reuse..self.topo.femtos.len()).step_by(reuse) {
            if k != j {
                interference_mw += db_to_linear(self.femto_link(self.topo.femtos[k].position, to)?.rx_dbm);
            }
        }
        let bw = self.params.femto_channel_mhz();
        let noise_mw = db_to_linear(self.params.noise_dbm(bw));
        let sinr = db_to_linear(signal.rx_dbm) / (noise_mw + interference_mw);
        Ok((signal, sinr, shannon_rate_mbps(bw, sinr)))
    }
}

fn sample(kind: LinkKind, tx: usize, rx: usize, d: Draw, sinr: f64, rate_mbps: f64) -> LinkSample {
    LinkSample {
        kind,
        tx,
        rx,
        distance_m: d.distance_m,
        walls: d.walls,
        path_loss_db: d.path_loss_db,
        shadow_db: d.shadow_db,
        fade_gain: d.fade_gain,
        sinr_db: linear_to_db(sinr),
        rate_mbps,
    }
}

/// Draws every link of one auction round. A pure function of its
/// arguments: the generator is seeded with `seed` on stream `round`.
///
/// Femtocells share the femto band on `reuse` sub-channels assigned round
/// robin by index; only co-channel femtocells interfere. The macro layer
/// uses its own band and its rate is split evenly among its active users.
pub fn sample_round(topo: &Topology, params: &ChannelParams, round: u64, seed: u64) -> Result<ChannelRealization> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    let mut s = Sampler { topo, params, rng };
    let mut links = Vec::new();

    let per_femto = topo.geometry.fues_per_femto;
    let mut fue_rates = Vec::with_capacity(topo.femtos.len());
    for (j, f) in topo.femtos.iter().enumerate() {
        let mut rates = Vec::with_capacity(f.fues.len());
        for (k, fue) in f.fues.iter().enumerate() {
            let (d, sinr, rate) = s.femto_served(j, *fue)?;
            rates.push(rate);
            links.push(sample(LinkKind::FemtoFue, j, j * per_femto + k, d, sinr, rate));
        }
        fue_rates.push(rates);
    }

    let macro_noise_mw = db_to_linear(params.noise_dbm(params.macro_bandwidth_mhz));
    let mut mue_macro_rates = Vec::with_capacity(topo.mues.len());
    let mut mue_femto_rates = Vec::with_capacity(topo.mues.len());
    for (m, mue) in topo.mues.iter().enumerate() {
        let d = s.macro_link(*mue)?;
        let sinr = db_to_linear(d.rx_dbm) / macro_noise_mw;
        let rate = shannon_rate_mbps(params.macro_bandwidth_mhz, sinr) / params.macro_user_count as f64;
        mue_macro_rates.push(rate);
        links.push(sample(LinkKind::MacroMue, 0, m, d, sinr, rate));

        let mut rates = Vec::with_capacity(topo.femtos.len());
        for j in 0..topo.femtos.len() {
            let (d, sinr, rate) = s.femto_served(j, *mue)?;
            rates.push(rate);
            links.push(sample(LinkKind::FemtoMue, j, m, d, sinr, rate));
        }
        mue_femto_rates.push(rates);
    }
    debug_assert!(links.iter().all(|l| l.rate_mbps >= 0.0));

    Ok(ChannelRealization {
        links,
        fue_rates,
        mue_femto_rates,
        mue_macro_rates,
    })
}

/// `n` independent `(shadow dB, fade gain)` pairs from the per-link model.
pub fn fading_samples(params: &ChannelParams, seed: u64, n: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw_fading(params, &mut rng)).collect()
}
