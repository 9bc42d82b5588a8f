//! Monte Carlo harness: truthfulness checks and performance sweeps over
//! simulated streets.
//!
//! Every round draws a fresh street, fresh FUE demands and fresh channels.
//! A sweep point owns a seed derived from the master seed, and round `r`
//! of a point reads stream `r` of that seed, so points and rounds are
//! independent and each can be reproduced alone. Rounds run in parallel
//! and are merged in round order.

mod records;
mod stats;

pub use records::{
    records_csv, summaries_csv, PointSummary, RoundRecord, RECORDS_SCHEMA, SUMMARY_SCHEMA,
};
pub use stats::{aggregate, improvement_pct, spearman, Summary};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bids::BidVector;
use crate::config::Config;
use crate::double_auction::{settle_double, DoubleInstance, DoubleSettlement};
use crate::error::{AuctionError, Result};
use crate::radio_sim::{generate_topology_with, sample_round, ChannelRealization, Topology};
use crate::reverse_auction::{settle_reverse, ReverseInstance, ReverseSettlement};
use crate::valuation::{FemtoValuationModel, MueValuationModel, SigmoidUtility, MIN_DEMAND_MBPS};

/// Utilities below `-IR_TOL` count as individual-rationality violations,
/// and utility losses below `-IR_TOL` as truthfulness violations.
pub const IR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// One MUE buys slots from any number of femtocells.
    SingleMue,
    /// Several MUEs, each matched to at most one femtocell.
    MultiMue,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::SingleMue => "single-mue",
            Scenario::MultiMue => "multi-mue",
        }
    }
}

/// Agent whose report is scaled in a truthfulness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Panel {
    /// A femtocell's bid in the single-MUE auction.
    SingleFemto,
    /// A femtocell's ask in the double auction.
    MultiFemto,
    /// An MUE's bids in the double auction.
    MultiMue,
}

impl Panel {
    pub const ALL: [Panel; 3] = [Panel::SingleFemto, Panel::MultiFemto, Panel::MultiMue];

    pub fn as_str(self) -> &'static str {
        match self {
            Panel::SingleFemto => "single-femto",
            Panel::MultiFemto => "multi-femto",
            Panel::MultiMue => "multi-mue",
        }
    }
}

/// Parameters that vary along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSpec {
    pub scenario: Scenario,
    pub density: f64,
    pub num_mues: usize,
    pub max_demand_mbps: f64,
}

/// One round's street, channels and truthful valuations.
#[derive(Debug, Clone)]
pub struct Market {
    pub topology: Topology,
    pub channel: ChannelRealization,
    /// Truthful ask schedule of each femtocell over `0..=T`.
    pub femto_values: Vec<BidVector>,
    pub mues: Vec<MueValuationModel>,
    pub slots: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sweep point `point` of experiment `tag`.
pub fn point_seed(master: u64, tag: &str, point: usize) -> u64 {
    let t = tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    splitmix(splitmix(master ^ t) ^ point as u64)
}

pub fn build_market(cfg: &Config, spec: &MarketSpec, seed: u64, round: u64) -> Result<Market> {
    let slots = cfg.experiment.slots;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    let topology =
        generate_topology_with(&cfg.geometry(), spec.density, spec.num_mues, &mut rng)?;
    let demands: Vec<Vec<f64>> = topology
        .femtos
        .iter()
        .map(|f| {
            f.fues
                .iter()
                .map(|_| (rng.random::<f64>() * spec.max_demand_mbps).max(MIN_DEMAND_MBPS))
                .collect()
        })
        .collect();
    let channel = sample_round(&topology, &cfg.channel_params(), round, splitmix(seed))?;

    let femto_values = demands
        .iter()
        .zip(&channel.fue_rates)
        .map(|(ds, rates)| {
            let utils = ds
                .iter()
                .map(|d| SigmoidUtility::new(cfg.fue.satisfaction, *d))
                .collect::<Result<Vec<_>>>()?;
            FemtoValuationModel::new(utils, rates.clone(), slots)?.truthful_bid_vector(slots)
        })
        .collect::<Result<Vec<_>>>()?;
    let mue_utility = SigmoidUtility::new(cfg.mue.satisfaction, cfg.mue.demand_mbps)?;
    let mues = channel
        .mue_macro_rates
        .iter()
        .zip(&channel.mue_femto_rates)
        .map(|(rmac, rates)| MueValuationModel::new(mue_utility, *rmac, rates.clone(), slots))
        .collect::<Result<Vec<_>>>()?;
    Ok(Market {
        topology,
        channel,
        femto_values,
        mues,
        slots,
    })
}

impl Market {
    /// Reverse auction run by the first MUE.
    pub fn reverse_instance(&self) -> Result<ReverseInstance> {
        let mue = &self.mues[0];
        ReverseInstance::new(
            self.femto_values.clone(),
            mue.link_rates().to_vec(),
            self.slots,
            mue.macro_rate(),
            *mue.utility(),
        )
    }

    pub fn buyer_values(&self) -> Vec<Vec<BidVector>> {
        self.mues
            .iter()
            .map(|m| (0..self.femto_values.len()).map(|j| m.bid_vector(j, self.slots)).collect())
            .collect()
    }

    pub fn double_instance(&self, reserve_price: f64) -> Result<DoubleInstance> {
        DoubleInstance::new(self.buyer_values(), self.femto_values.clone(), self.slots, reserve_price)
    }

    /// Femtocell with the fastest link to any MUE; first on ties.
    pub fn best_femto(&self) -> Option<usize> {
        let best = |j: usize| self.mues.iter().map(|m| m.link_rates()[j]).fold(0.0, f64::max);
        (0..self.femto_values.len()).reduce(|a, b| if best(b) > best(a) { b } else { a })
    }

    /// MUE with the fastest link to any femtocell; first on ties.
    pub fn best_mue(&self) -> Option<usize> {
        let best = |i: usize| self.mues[i].link_rates().iter().copied().fold(0.0, f64::max);
        (0..self.mues.len()).reduce(|a, b| if best(b) > best(a) { b } else { a })
    }
}

/// What one auction round did, reduced to the quantities the sweeps track.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub femtos: usize,
    /// Average MUE utility after trading and paying.
    pub mue_utility: f64,
    /// Average MUE utility on the macro cell alone.
    pub baseline_utility: f64,
    pub efficiency: f64,
    pub budget_balance: Option<f64>,
    pub voided: bool,
    pub trades: usize,
    pub traded_slots: usize,
    pub allocations: String,
    pub payments: String,
    pub utilities: String,
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = (String, T)>) -> String {
    items.map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn check_ir(who: &str, utilities: &[f64]) -> Result<()> {
    match utilities.iter().position(|u| !(*u >= -IR_TOL && u.is_finite())) {
        Some(i) => Err(AuctionError::Invariant(format!(
            "{who} {i} ends with utility {} under truthful reporting",
            utilities[i]
        ))),
        None => Ok(()),
    }
}

pub fn reverse_outcome(inst: &ReverseInstance, s: &ReverseSettlement) -> RoundOutcome {
    let winners = || s.allocation.slots.iter().enumerate().filter(|(_, n)| **n > 0);
    RoundOutcome {
        femtos: inst.femto_count(),
        mue_utility: s.mue_net_utility,
        baseline_utility: inst.baseline(),
        efficiency: s.allocation.efficiency,
        budget_balance: None,
        voided: false,
        trades: winners().count(),
        traded_slots: s.allocation.slots.iter().sum(),
        allocations: join(winners().map(|(j, n)| (format!("f{j}"), *n))),
        payments: join(winners().map(|(j, _)| (format!("f{j}"), s.payments[j]))),
        utilities: join(winners().map(|(j, _)| (format!("f{j}"), s.utilities[j]))),
    }
}

/// Single-MUE round under truthful reporting.
pub fn run_reverse_round(market: &Market) -> Result<(ReverseSettlement, RoundOutcome)> {
    let inst = market.reverse_instance()?;
    let s = settle_reverse(&inst, &market.femto_values)?;
    check_ir("femtocell", &s.utilities)?;
    let outcome = reverse_outcome(&inst, &s);
    Ok((s, outcome))
}

pub fn double_outcome(market: &Market, s: &DoubleSettlement) -> RoundOutcome {
    let trades = s.executed();
    let baselines: Vec<f64> = market.mues.iter().map(|m| m.baseline()).collect();
    let count = market.mues.len() as f64;
    RoundOutcome {
        femtos: market.femto_values.len(),
        mue_utility: baselines.iter().zip(&s.buyer_utilities).map(|(b, u)| b + u).sum::<f64>() / count,
        baseline_utility: baselines.iter().sum::<f64>() / count,
        efficiency: if s.terminated_by_reserve { 0.0 } else { s.allocation.efficiency },
        budget_balance: Some(s.budget_balance),
        voided: s.terminated_by_reserve,
        trades: trades.len(),
        traded_slots: trades.iter().map(|t| t.slots).sum(),
        allocations: join(trades.iter().map(|t| (format!("m{}>f{}", t.buyer, t.seller), t.slots))),
        payments: join(trades.iter().flat_map(|t| {
            [
                (format!("m{}", t.buyer), s.buyer_payments[t.buyer]),
                (format!("f{}", t.seller), s.seller_receipts[t.seller]),
            ]
        })),
        utilities: join(trades.iter().flat_map(|t| {
            [
                (format!("m{}", t.buyer), s.buyer_utilities[t.buyer]),
                (format!("f{}", t.seller), s.seller_utilities[t.seller]),
            ]
        })),
    }
}

/// Multi-MUE round under truthful reporting.
pub fn run_double_round(market: &Market, reserve_price: f64) -> Result<(DoubleSettlement, RoundOutcome)> {
    let inst = market.double_instance(reserve_price)?;
    let buyer_values = market.buyer_values();
    let s = settle_double(&inst, &buyer_values, &market.femto_values)?;
    check_ir("MUE", &s.buyer_utilities)?;
    check_ir("femtocell", &s.seller_utilities)?;
    let outcome = double_outcome(market, &s);
    Ok((s, outcome))
}

fn run_round(cfg: &Config, spec: &MarketSpec, seed: u64, round: u64) -> Result<RoundOutcome> {
    let market = build_market(cfg, spec, seed, round)?;
    Ok(match spec.scenario {
        Scenario::SingleMue => run_reverse_round(&market)?.1,
        Scenario::MultiMue => run_double_round(&market, cfg.auction.reserve_price)?.1,
    })
}

/// Records and per-point summaries of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub records: Vec<RoundRecord>,
    pub points: Vec<PointSummary>,
}

impl ExperimentRun {
    pub fn records_csv(&self) -> Result<String> {
        records_csv(&self.records)
    }

    pub fn summaries_csv(&self) -> Result<String> {
        summaries_csv(&self.points)
    }
}

fn run_points(cfg: &Config, experiment: &'static str, specs: &[MarketSpec]) -> Result<ExperimentRun> {
    let rounds = cfg.experiment.rounds;
    let mut records = Vec::with_capacity(specs.len() * rounds);
    let mut points = Vec::with_capacity(specs.len());
    for (p, spec) in specs.iter().enumerate() {
        let seed = point_seed(cfg.experiment.seed, experiment, p);
        let outcomes = (0..rounds)
            .into_par_iter()
            .map(|r| run_round(cfg, spec, seed, r as u64))
            .collect::<Result<Vec<_>>>()?;
        let first = records.len();
        records.extend(
            outcomes
                .into_iter()
                .enumerate()
                .map(|(r, o)| RoundRecord::from_outcome(experiment, p, r, seed, spec, o)),
        );
        points.push(PointSummary::from_records(experiment, p, spec, &records[first..])?);
    }
    Ok(ExperimentRun { records, points })
}

/// `rounds` rounds of one scenario at the configured density, MUE count
/// and FUE demand.
pub fn run_scenario(cfg: &Config, scenario: Scenario) -> Result<ExperimentRun> {
    cfg.validate()?;
    let spec = MarketSpec {
        scenario,
        density: cfg.topology.density,
        num_mues: match scenario {
            Scenario::SingleMue => 1,
            Scenario::MultiMue => cfg.mue.count,
        },
        max_demand_mbps: cfg.fue.max_demand_mbps,
    };
    run_points(cfg, scenario.as_str(), &[spec])
}

/// Single-MUE utility against femtocell density.
pub fn run_density_sweep(cfg: &Config) -> Result<ExperimentRun> {
    cfg.validate()?;
    let specs: Vec<MarketSpec> = cfg
        .sweep
        .densities
        .iter()
        .map(|&density| MarketSpec {
            scenario: Scenario::SingleMue,
            density,
            num_mues: 1,
            max_demand_mbps: cfg.fue.max_demand_mbps,
        })
        .collect();
    run_points(cfg, "density", &specs)
}

/// Multi-MUE utility against the number of MUEs, one curve per density.
pub fn run_mue_count_sweep(cfg: &Config) -> Result<ExperimentRun> {
    cfg.validate()?;
    let mut specs = Vec::new();
    for &density in &cfg.sweep.mue_count_densities {
        for &num_mues in &cfg.sweep.mue_counts {
            specs.push(MarketSpec {
                scenario: Scenario::MultiMue,
                density,
                num_mues,
                max_demand_mbps: cfg.fue.max_demand_mbps,
            });
        }
    }
    run_points(cfg, "mue-count", &specs)
}

/// MUE utility against the FUE demand ceiling, for both scenarios.
pub fn run_demand_sweep(cfg: &Config) -> Result<ExperimentRun> {
    cfg.validate()?;
    let mut specs = Vec::new();
    for (scenario, num_mues) in [
        (Scenario::SingleMue, 1),
        (Scenario::MultiMue, cfg.sweep.demand_mue_count),
    ] {
        for &max_demand_mbps in &cfg.sweep.max_demands_mbps {
            specs.push(MarketSpec {
                scenario,
                density: cfg.sweep.demand_density,
                num_mues,
                max_demand_mbps,
            });
        }
    }
    run_points(cfg, "demand", &specs)
}

/// Utility of the reference agent in `panel` when its report is scaled by
/// `factor`, measured against its true values.
fn manipulated_utility(market: &Market, panel: Panel, reference: usize, factor: f64, reserve: f64) -> Result<f64> {
    match panel {
        Panel::SingleFemto => {
            let inst = market.reverse_instance()?;
            let lie = inst.with_bid(reference, market.femto_values[reference].scaled(factor))?;
            Ok(settle_reverse(&lie, &market.femto_values)?.utilities[reference])
        }
        Panel::MultiFemto => {
            let inst = market.double_instance(reserve)?;
            let lie = inst.with_seller_ask(reference, market.femto_values[reference].scaled(factor))?;
            Ok(settle_double(&lie, &market.buyer_values(), &market.femto_values)?.seller_utilities[reference])
        }
        Panel::MultiMue => {
            let inst = market.double_instance(reserve)?;
            let values = market.buyer_values();
            let lie = inst.with_buyer_bids(reference, values[reference].iter().map(|b| b.scaled(factor)).collect())?;
            Ok(settle_double(&lie, &values, &market.femto_values)?.buyer_utilities[reference])
        }
    }
}

fn truthfulness_round(cfg: &Config, panel: Panel, spec: &MarketSpec, seed: u64, round: u64) -> Result<Vec<RoundRecord>> {
    let t = &cfg.truthfulness;
    let reserve = cfg.auction.reserve_price;
    let market = build_market(cfg, spec, seed, round)?;
    let (outcome, reference, truthful) = match panel {
        Panel::SingleFemto => {
            let (s, o) = run_reverse_round(&market)?;
            let j = market.best_femto();
            (o, j, j.map(|j| s.utilities[j]))
        }
        Panel::MultiFemto => {
            let (s, o) = run_double_round(&market, reserve)?;
            let j = market.best_femto();
            (o, j, j.map(|j| s.seller_utilities[j]))
        }
        Panel::MultiMue => {
            let (s, o) = run_double_round(&market, reserve)?;
            let i = market.best_mue();
            (o, i, i.map(|i| s.buyer_utilities[i]))
        }
    };
    let mut out = Vec::with_capacity(t.factors.len());
    for &f in &t.factors {
        // Without a femtocell there is nobody to manipulate; the loss is 0.
        let (u, u_lie) = match (reference, truthful) {
            (Some(r), Some(u)) => (u, manipulated_utility(&market, panel, r, f, reserve)?),
            _ => (0.0, 0.0),
        };
        let delta = u - u_lie;
        if delta.is_nan() || delta < -IR_TOL {
            return Err(AuctionError::Invariant(format!(
                "panel {} round {round}: scaling by {f} gains {} over truthful reporting",
                panel.as_str(),
                -delta
            )));
        }
        let mut rec = RoundRecord::from_outcome("truthfulness", panel as usize, round as usize, seed, spec, outcome.clone());
        rec.panel = Some(panel);
        rec.reference = reference;
        rec.factor = Some(f);
        rec.truthful_utility = Some(u);
        rec.manipulated_utility = Some(u_lie);
        rec.delta_u = Some(delta);
        out.push(rec);
    }
    Ok(out)
}

/// Manipulation test: per panel and round, the reference agent reports
/// `f * v` for every configured factor and `Delta U = U - U'` is recorded.
/// Fails on the first negative loss or IR violation.
pub fn run_truthfulness(cfg: &Config) -> Result<Vec<RoundRecord>> {
    cfg.validate()?;
    let t = &cfg.truthfulness;
    let mut records = Vec::with_capacity(3 * t.rounds * t.factors.len());
    for panel in Panel::ALL {
        let spec = MarketSpec {
            scenario: match panel {
                Panel::SingleFemto => Scenario::SingleMue,
                _ => Scenario::MultiMue,
            },
            density: t.density,
            num_mues: match panel {
                Panel::SingleFemto => 1,
                _ => t.mue_count,
            },
            max_demand_mbps: t.max_demand_mbps,
        };
        let seed = point_seed(cfg.experiment.seed, "truthfulness", panel as usize);
        let rows = (0..t.rounds)
            .into_par_iter()
            .map(|r| truthfulness_round(cfg, panel, &spec, seed, r as u64))
            .collect::<Result<Vec<_>>>()?;
        records.extend(rows.into_iter().flatten());
    }
    Ok(records)
}

#[cfg(test)]
mod tests;
