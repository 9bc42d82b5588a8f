//! Single-MUE multi-unit reverse auction.
//!
//! Femtocells sell slots to one MUE. Winner determination maximises
//! `U(sum n_i R_i / T) - sum b_i(n_i) - U(R_mac)` subject to
//! `sum n_i <= T` and `n_i <= N_i`. The no-trade outcome keeps the MUE on
//! the macro cell and is worth exactly zero, so every reported efficiency is
//! non-negative. Payments follow the VCG rule
//! `p_i = b_i(n_i*) + (Q* - Q*_{-i})`.

mod exact;

pub use exact::exact_wd;

use crate::bids::BidVector;
use crate::error::{AuctionError, Result};
use crate::valuation::SigmoidUtility;

/// Largest search space [`exhaustive_wd`] agrees to enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseInstance {
    bids: Vec<BidVector>,
    rates: Vec<f64>,
    slots: usize,
    macro_rate: f64,
    utility: SigmoidUtility,
}

impl ReverseInstance {
    pub fn new(
        bids: Vec<BidVector>,
        rates: Vec<f64>,
        slots: usize,
        macro_rate: f64,
        utility: SigmoidUtility,
    ) -> Result<Self> {
        if slots == 0 {
            return Err(AuctionError::Domain("a round needs at least one slot".into()));
        }
        if bids.len() != rates.len() {
            return Err(AuctionError::Consistency(format!(
                "{} bid vectors but {} link rates",
                bids.len(),
                rates.len()
            )));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(AuctionError::Domain(format!("link rate must be finite and >= 0, got {r}")));
        }
        if !(macro_rate >= 0.0 && macro_rate.is_finite()) {
            return Err(AuctionError::Domain(format!("macro rate must be >= 0, got {macro_rate}")));
        }
        if let Some((i, b)) = bids.iter().enumerate().find(|(_, b)| b.max_slots() > slots) {
            return Err(AuctionError::Domain(format!(
                "femtocell {i} offers {} slots but the round has {slots}",
                b.max_slots()
            )));
        }
        Ok(ReverseInstance {
            bids,
            rates,
            slots,
            macro_rate,
            utility,
        })
    }

    pub fn femto_count(&self) -> usize {
        self.bids.len()
    }

    pub fn bids(&self) -> &[BidVector] {
        &self.bids
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn macro_rate(&self) -> f64 {
        self.macro_rate
    }

    pub fn utility(&self) -> &SigmoidUtility {
        &self.utility
    }

    /// `U(R_mac)`.
    pub fn baseline(&self) -> f64 {
        self.utility.eval(self.macro_rate)
    }

    /// Rate the MUE gets from each slot of femtocell `i`, `R_i / T`.
    pub(crate) fn slot_rate(&self, i: usize) -> f64 {
        self.rates[i] / self.slots as f64
    }

    /// Same market with femtocell `i`'s bid withdrawn.
    pub fn without(&self, i: usize) -> Result<Self> {
        self.with_bid(i, BidVector::empty())
    }

    /// Same market with femtocell `i` bidding `bid` instead.
    pub fn with_bid(&self, i: usize, bid: BidVector) -> Result<Self> {
        if i >= self.bids.len() {
            return Err(AuctionError::UnknownAgent(i));
        }
        let mut next = self.clone();
        next.bids[i] = bid;
        Ok(next)
    }

    /// Rejects vectors without the `(0, 0)` anchor, decreasing vectors and
    /// non-convex vectors, naming the femtocell and entry at fault.
    pub fn validate_bids(&self) -> Result<()> {
        self.check_bids(true)
    }

    pub(crate) fn check_bids(&self, require_convex: bool) -> Result<()> {
        for (agent, b) in self.bids.iter().enumerate() {
            b.check(require_convex)
                .map_err(|(index, defect)| AuctionError::InvalidVector { agent, index, defect })?;
        }
        Ok(())
    }

    /// Rate delivered to the MUE by `alloc`.
    pub fn delivered_rate(&self, alloc: &[usize]) -> f64 {
        alloc
            .iter()
            .zip(&self.rates)
            .map(|(n, r)| *n as f64 * r)
            .sum::<f64>()
            / self.slots as f64
    }

    /// Raw objective `U(sum n_i R_i / T) - sum b_i(n_i) - U(R_mac)`.
    pub fn objective(&self, alloc: &[usize]) -> f64 {
        let cost: f64 = alloc.iter().zip(&self.bids).map(|(n, b)| b.price(*n)).sum();
        self.utility.eval(self.delivered_rate(alloc)) - cost - self.baseline()
    }

    /// Efficiency of an allocation: the objective, or zero for no trade.
    pub fn efficiency_of(&self, alloc: &[usize]) -> f64 {
        if alloc.iter().all(|n| *n == 0) {
            0.0
        } else {
            self.objective(alloc)
        }
    }

    /// Packages `alloc` with the macro fallback applied: allocations that do
    /// not beat the macro cell net of bids become no-trade.
    pub(crate) fn finish(&self, alloc: Vec<usize>) -> ReverseAllocation {
        let q = self.efficiency_of(&alloc);
        if q > 0.0 {
            ReverseAllocation {
                slots: alloc,
                efficiency: q,
            }
        } else {
            ReverseAllocation::no_trade(self.femto_count())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseAllocation {
    /// `n_i*` per femtocell.
    pub slots: Vec<usize>,
    /// `Q*`.
    pub efficiency: f64,
}

impl ReverseAllocation {
    pub fn no_trade(femtos: usize) -> Self {
        ReverseAllocation {
            slots: vec![0; femtos],
            efficiency: 0.0,
        }
    }

    pub fn is_trade(&self) -> bool {
        self.slots.iter().any(|n| *n > 0)
    }

    /// Capacity and per-femtocell cap constraints.
    pub fn check_feasible(&self, inst: &ReverseInstance) -> Result<()> {
        if self.slots.len() != inst.femto_count() {
            return Err(AuctionError::Invariant(format!(
                "allocation covers {} femtocells, instance has {}",
                self.slots.len(),
                inst.femto_count()
            )));
        }
        let total: usize = self.slots.iter().sum();
        if total > inst.slots() {
            return Err(AuctionError::Invariant(format!(
                "{total} slots allocated, round has {}",
                inst.slots()
            )));
        }
        for (i, (n, b)) in self.slots.iter().zip(inst.bids()).enumerate() {
            if *n > b.max_slots() {
                return Err(AuctionError::Invariant(format!(
                    "femtocell {i} allocated {n} slots, offered {}",
                    b.max_slots()
                )));
            }
        }
        Ok(())
    }
}

/// Winner-determination routine used by pricing and settlement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WdSolver {
    /// Marginal-gain greedy; only exact when rates are homogeneous.
    Greedy,
    /// Greedy warm start plus branch and bound; exact.
    #[default]
    Exact,
    /// Full enumeration; exact, small instances only.
    Exhaustive,
}

impl WdSolver {
    pub fn solve(self, inst: &ReverseInstance) -> Result<ReverseAllocation> {
        match self {
            WdSolver::Greedy => greedy_wd(inst),
            WdSolver::Exact => exact_wd(inst),
            WdSolver::Exhaustive => exhaustive_wd(inst),
        }
    }
}

/// Marginal-gain greedy over `alloc` starting at zero, no validation.
/// Returns the allocation and the number of marginal evaluations.
pub(crate) fn greedy_fill(inst: &ReverseInstance, caps: &[usize]) -> (Vec<usize>, usize) {
    let u = inst.utility();
    let mut n = vec![0usize; inst.femto_count()];
    let mut rate = 0.0;
    let mut evaluations = 0;
    for _ in 0..inst.slots() {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n.len() {
            if n[i] >= caps[i] {
                continue;
            }
            evaluations += 1;
            let gain = u.eval(rate + inst.slot_rate(i)) - u.eval(rate);
            let loss = inst.bids()[i].marginal(n[i]);
            let delta = gain - loss;
            if best.is_none_or(|(_, d)| delta > d) {
                best = Some((i, delta));
            }
        }
        match best {
            Some((i, delta)) if delta > 0.0 => {
                n[i] += 1;
                rate += inst.slot_rate(i);
            }
            _ => break,
        }
    }
    (n, evaluations)
}

/// Marginal-gain greedy winner determination.
///
/// Grants one slot at a time to the femtocell with the largest
/// `[U(S + R_i/T) - U(S)] - [b_i(n_i + 1) - b_i(n_i)]` (lowest index on
/// ties) until the round is full, every femtocell is exhausted, or no slot
/// adds value. Falls back to no trade when the result does not beat the
/// macro cell. Bids must be convex.
///
/// The result is optimal when all femtocells offer the same rate. With
/// heterogeneous rates the objective is no longer separable and greedy can
/// stop short of the optimum; [`exact_wd`] closes that gap.
pub fn greedy_wd(inst: &ReverseInstance) -> Result<ReverseAllocation> {
    greedy_wd_counted(inst).map(|(a, _)| a)
}

/// [`greedy_wd`] plus the number of marginal-gain evaluations performed.
pub fn greedy_wd_counted(inst: &ReverseInstance) -> Result<(ReverseAllocation, usize)> {
    inst.validate_bids()?;
    let caps: Vec<usize> = inst.bids().iter().map(BidVector::max_slots).collect();
    let (n, evals) = greedy_fill(inst, &caps);
    let alloc = inst.finish(n);
    alloc.check_feasible(inst)?;
    Ok((alloc, evals))
}

/// Exact winner determination by enumerating every feasible allocation.
/// Ties go to the lexicographically smallest allocation, so no trade wins
/// any tie at zero.
pub fn exhaustive_wd(inst: &ReverseInstance) -> Result<ReverseAllocation> {
    inst.check_bids(false)?;
    let caps: Vec<usize> = inst
        .bids()
        .iter()
        .map(|b| b.max_slots().min(inst.slots()))
        .collect();
    let space = caps
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(*c as u64 + 1))
        .filter(|s| *s <= EXHAUSTIVE_LIMIT);
    if space.is_none() {
        return Err(AuctionError::TooLarge(format!(
            "more than {EXHAUSTIVE_LIMIT} allocations"
        )));
    }

    let mut best = ReverseAllocation::no_trade(caps.len());
    let mut n = vec![0usize; caps.len()];
    // odometer with the last femtocell fastest: lexicographic order
    'outer: loop {
        let mut k = caps.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            if n[k] < caps[k] {
                n[k] += 1;
                break;
            }
            n[k] = 0;
        }
        if n.iter().sum::<usize>() > inst.slots() {
            continue;
        }
        let q = inst.objective(&n);
        if q > best.efficiency {
            best = ReverseAllocation {
                slots: n.clone(),
                efficiency: q,
            };
        }
    }
    Ok(best)
}

/// VCG payment `p_i = b_i(n_i*) + (Q* - Q*_{-i})` to femtocell `femto`.
/// Losers are paid nothing. `alloc` must be optimal for `inst`.
pub fn vcg_price(inst: &ReverseInstance, alloc: &ReverseAllocation, femto: usize, solver: WdSolver) -> Result<f64> {
    if femto >= inst.femto_count() {
        return Err(AuctionError::UnknownAgent(femto));
    }
    let n = alloc.slots[femto];
    if n == 0 {
        return Ok(0.0);
    }
    let without = solver.solve(&inst.without(femto)?)?;
    Ok(inst.bids()[femto].price(n) + (alloc.efficiency - without.efficiency))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverseSettlement {
    pub allocation: ReverseAllocation,
    /// `p_i`, zero for losers.
    pub payments: Vec<f64>,
    /// `u_i = p_i - v_i(n_i*)`, measured against true values.
    pub utilities: Vec<f64>,
    pub mue_total_payment: f64,
    /// Rate the MUE ends up with: femtocell aggregate, or the macro rate.
    pub mue_rate: f64,
    /// `U(rate) - sum p_i`; equals `U(R_mac)` without trade.
    pub mue_net_utility: f64,
}

/// Runs the auction on `inst` and settles against each femtocell's true
/// value schedule.
pub fn settle_reverse(inst: &ReverseInstance, true_values: &[BidVector]) -> Result<ReverseSettlement> {
    settle_reverse_with(inst, true_values, WdSolver::Exact)
}

pub fn settle_reverse_with(
    inst: &ReverseInstance,
    true_values: &[BidVector],
    solver: WdSolver,
) -> Result<ReverseSettlement> {
    inst.validate_bids()?;
    if true_values.len() != inst.femto_count() {
        return Err(AuctionError::Consistency(format!(
            "{} value schedules for {} femtocells",
            true_values.len(),
            inst.femto_count()
        )));
    }
    let allocation = solver.solve(inst)?;
    allocation.check_feasible(inst)?;

    let mut payments = vec![0.0; inst.femto_count()];
    let mut utilities = vec![0.0; inst.femto_count()];
    for (i, &n) in allocation.slots.iter().enumerate() {
        if n == 0 {
            continue;
        }
        if n > true_values[i].max_slots() {
            return Err(AuctionError::Consistency(format!(
                "femtocell {i} won {n} slots but its value schedule stops at {}",
                true_values[i].max_slots()
            )));
        }
        payments[i] = vcg_price(inst, &allocation, i, solver)?;
        utilities[i] = payments[i] - true_values[i].price(n);
    }

    let mue_total_payment: f64 = payments.iter().sum();
    let mue_rate = if allocation.is_trade() {
        inst.delivered_rate(&allocation.slots)
    } else {
        inst.macro_rate()
    };
    let mue_net_utility = inst.utility().eval(mue_rate) - mue_total_payment;
    Ok(ReverseSettlement {
        allocation,
        payments,
        utilities,
        mue_total_payment,
        mue_rate,
        mue_net_utility,
    })
}

#[cfg(test)]
mod tests;
