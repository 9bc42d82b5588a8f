use serde::Serialize;

use super::stats::{aggregate, improvement_pct};
use super::{MarketSpec, Panel, RoundOutcome, Scenario};
use crate::error::{AuctionError, Result};

/// Value of the `schema` column of every record row.
pub const RECORDS_SCHEMA: &str = "records/1";
/// Value of the `schema` column of every summary row.
pub const SUMMARY_SCHEMA: &str = "summary/1";

/// One auction round. Truthfulness runs emit one record per manipulation
/// factor, all sharing the truthful outcome columns.
///
/// `allocations`, `payments` and `utilities` list traders as space
/// separated `agent=value` pairs, with agents named `f<j>` (femtocell) and
/// `m<i>` (MUE); double-auction allocations are keyed `m<i>>f<j>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub schema: &'static str,
    pub experiment: &'static str,
    pub point: usize,
    pub round: usize,
    pub seed: u64,
    pub scenario: Scenario,
    pub density: f64,
    pub num_mues: usize,
    pub max_demand_mbps: f64,
    pub femtos: usize,
    pub panel: Option<Panel>,
    pub reference: Option<usize>,
    pub factor: Option<f64>,
    pub truthful_utility: Option<f64>,
    pub manipulated_utility: Option<f64>,
    pub delta_u: Option<f64>,
    pub mue_utility: f64,
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

impl RoundRecord {
    pub(crate) fn from_outcome(
        experiment: &'static str,
        point: usize,
        round: usize,
        seed: u64,
        spec: &MarketSpec,
        o: RoundOutcome,
    ) -> Self {
        RoundRecord {
            schema: RECORDS_SCHEMA,
            experiment,
            point,
            round,
            seed,
            scenario: spec.scenario,
            density: spec.density,
            num_mues: spec.num_mues,
            max_demand_mbps: spec.max_demand_mbps,
            femtos: o.femtos,
            panel: None,
            reference: None,
            factor: None,
            truthful_utility: None,
            manipulated_utility: None,
            delta_u: None,
            mue_utility: o.mue_utility,
            baseline_utility: o.baseline_utility,
            efficiency: o.efficiency,
            budget_balance: o.budget_balance,
            voided: o.voided,
            trades: o.trades,
            traded_slots: o.traded_slots,
            allocations: o.allocations,
            payments: o.payments,
            utilities: o.utilities,
        }
    }
}

/// Statistics of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub schema: &'static str,
    pub experiment: &'static str,
    pub point: usize,
    pub scenario: Scenario,
    pub density: f64,
    pub num_mues: usize,
    pub max_demand_mbps: f64,
    pub rounds: usize,
    pub mean_utility: f64,
    pub std_utility: f64,
    pub ci95_utility: f64,
    pub mean_baseline: f64,
    pub improvement_pct: f64,
    pub mean_efficiency: f64,
    pub mean_femtos: f64,
    pub mean_budget_balance: Option<f64>,
    pub voided_rounds: usize,
}

impl PointSummary {
    pub(crate) fn from_records(
        experiment: &'static str,
        point: usize,
        spec: &MarketSpec,
        records: &[RoundRecord],
    ) -> Result<Self> {
        let col = |f: fn(&RoundRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
        let utility = aggregate(&col(|r| r.mue_utility))?;
        let baseline = aggregate(&col(|r| r.baseline_utility))?;
        let balances: Vec<f64> = records.iter().filter_map(|r| r.budget_balance).collect();
        Ok(PointSummary {
            schema: SUMMARY_SCHEMA,
            experiment,
            point,
            scenario: spec.scenario,
            density: spec.density,
            num_mues: spec.num_mues,
            max_demand_mbps: spec.max_demand_mbps,
            rounds: records.len(),
            mean_utility: utility.mean,
            std_utility: utility.std,
            ci95_utility: utility.ci95,
            mean_baseline: baseline.mean,
            improvement_pct: improvement_pct(utility.mean, baseline.mean),
            mean_efficiency: aggregate(&col(|r| r.efficiency))?.mean,
            mean_femtos: aggregate(&col(|r| r.femtos as f64))?.mean,
            mean_budget_balance: aggregate(&balances).ok().map(|s| s.mean),
            voided_rounds: records.iter().filter(|r| r.voided).count(),
        })
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    if rows.is_empty() {
        return Err(AuctionError::Domain("nothing to write: empty record set".into()));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| AuctionError::Consistency(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| AuctionError::Consistency(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| AuctionError::Consistency(format!("csv: {e}")))
}

pub fn records_csv(records: &[RoundRecord]) -> Result<String> {
    to_csv(records)
}

pub fn summaries_csv(points: &[PointSummary]) -> Result<String> {
    to_csv(points)
}
