//! Multi-MUE, multi-femtocell double auction.
//!
//! Every MUE `i` bids a vector `b_ij` towards every femtocell `j`, every
//! femtocell asks `a_j`. Trades are one-to-one. Winner determination
//! reduces to a maximum-weight bipartite matching with edge weights
//! `w_ij = max_{n <= N_j} (b_ij(n) - a_j(n))`, and both sides are priced by
//! VCG:
//!
//! ```text
//! p^b_i = b_{i,s(i)}(n*) - (Q* - Q*_{-b_i})
//! p^s_j = a_j(n*)        + (Q* - Q*_{-a_j})
//! ```
//!
//! The auctioneer may run a deficit. If its profit falls below the reserve
//! price, every trade is voided.

use crate::bids::BidVector;
use crate::error::{AuctionError, Result};
use crate::matching::{max_weight_matching, Matching, WeightedBipartiteGraph};

/// Largest market [`exhaustive_double_wd`] enumerates.
pub const EXHAUSTIVE_MAX_AGENTS: usize = 5;
pub const EXHAUSTIVE_MAX_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleInstance {
    /// `buyer_bids[i][j]` is MUE `i`'s bid vector towards femtocell `j`.
    buyer_bids: Vec<Vec<BidVector>>,
    seller_asks: Vec<BidVector>,
    slots: usize,
    reserve_price: f64,
}

impl DoubleInstance {
    /// Bid vectors may run past `N_j`; those entries are ignored.
    pub fn new(buyer_bids: Vec<Vec<BidVector>>, seller_asks: Vec<BidVector>, slots: usize, reserve_price: f64) -> Result<Self> {
        if slots == 0 {
            return Err(AuctionError::Domain("a round needs at least one slot".into()));
        }
        if reserve_price.is_nan() || reserve_price == f64::INFINITY {
            return Err(AuctionError::Domain(format!("reserve price must be < +inf, got {reserve_price}")));
        }
        let sellers = seller_asks.len();
        for (i, row) in buyer_bids.iter().enumerate() {
            if row.len() != sellers {
                return Err(AuctionError::Consistency(format!(
                    "MUE {i} bids on {} femtocells, market has {sellers}",
                    row.len()
                )));
            }
            for b in row {
                b.check(false)
                    .map_err(|(index, defect)| AuctionError::InvalidVector { agent: i, index, defect })?;
                if b.max_slots() > slots {
                    return Err(AuctionError::Domain(format!("MUE {i} bids past the {slots}-slot round")));
                }
            }
        }
        for (j, a) in seller_asks.iter().enumerate() {
            a.check(false)
                .map_err(|(index, defect)| AuctionError::InvalidVector { agent: j, index, defect })?;
            if a.max_slots() > slots {
                return Err(AuctionError::Domain(format!(
                    "femtocell {j} offers {} of {slots} slots",
                    a.max_slots()
                )));
            }
        }
        Ok(DoubleInstance {
            buyer_bids,
            seller_asks,
            slots,
            reserve_price,
        })
    }

    pub fn buyers(&self) -> usize {
        self.buyer_bids.len()
    }

    pub fn sellers(&self) -> usize {
        self.seller_asks.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn reserve_price(&self) -> f64 {
        self.reserve_price
    }

    pub fn bid(&self, buyer: usize, seller: usize) -> &BidVector {
        &self.buyer_bids[buyer][seller]
    }

    pub fn ask(&self, seller: usize) -> &BidVector {
        &self.seller_asks[seller]
    }

    /// Slot counts over which the pair can trade: `0..=N_j`, shortened if
    /// the bid vector stops earlier.
    fn pair_cap(&self, buyer: usize, seller: usize) -> usize {
        self.seller_asks[seller]
            .max_slots()
            .min(self.buyer_bids[buyer][seller].max_slots())
    }

    fn surplus(&self, buyer: usize, seller: usize, n: usize) -> f64 {
        self.buyer_bids[buyer][seller].price(n) - self.seller_asks[seller].price(n)
    }

    /// Market with MUE `buyer` withdrawn entirely.
    pub fn without_buyer(&self, buyer: usize) -> Result<Self> {
        if buyer >= self.buyers() {
            return Err(AuctionError::UnknownAgent(buyer));
        }
        let mut next = self.clone();
        next.buyer_bids[buyer].iter_mut().for_each(|b| *b = BidVector::empty());
        Ok(next)
    }

    /// Market with femtocell `seller` withdrawn.
    pub fn without_seller(&self, seller: usize) -> Result<Self> {
        if seller >= self.sellers() {
            return Err(AuctionError::UnknownAgent(seller));
        }
        let mut next = self.clone();
        next.seller_asks[seller] = BidVector::empty();
        Ok(next)
    }

    /// Market where MUE `buyer` submits `bids` (one vector per femtocell).
    pub fn with_buyer_bids(&self, buyer: usize, bids: Vec<BidVector>) -> Result<Self> {
        if buyer >= self.buyers() {
            return Err(AuctionError::UnknownAgent(buyer));
        }
        let mut rows = self.buyer_bids.clone();
        rows[buyer] = bids;
        Self::new(rows, self.seller_asks.clone(), self.slots, self.reserve_price)
    }

    /// Market where femtocell `seller` asks `ask`.
    pub fn with_seller_ask(&self, seller: usize, ask: BidVector) -> Result<Self> {
        if seller >= self.sellers() {
            return Err(AuctionError::UnknownAgent(seller));
        }
        let mut asks = self.seller_asks.clone();
        asks[seller] = ask;
        Self::new(self.buyer_bids.clone(), asks, self.slots, self.reserve_price)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trade {
    pub buyer: usize,
    pub seller: usize,
    pub slots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleAllocation {
    /// One entry per matched pair, sorted by buyer.
    pub trades: Vec<Trade>,
    /// `Q* = sum b_ij(n*) - sum a_j(n*)`.
    pub efficiency: f64,
}

impl DoubleAllocation {
    pub fn empty() -> Self {
        DoubleAllocation {
            trades: Vec::new(),
            efficiency: 0.0,
        }
    }

    pub fn trade_of_buyer(&self, buyer: usize) -> Option<&Trade> {
        self.trades.iter().find(|t| t.buyer == buyer)
    }

    pub fn trade_of_seller(&self, seller: usize) -> Option<&Trade> {
        self.trades.iter().find(|t| t.seller == seller)
    }

    /// One-to-one trading, slot caps, and the reported efficiency.
    pub fn check_feasible(&self, inst: &DoubleInstance) -> Result<()> {
        let mut buyer_used = vec![false; inst.buyers()];
        let mut seller_used = vec![false; inst.sellers()];
        let mut total = 0.0;
        for t in &self.trades {
            if t.buyer >= inst.buyers() || t.seller >= inst.sellers() {
                return Err(AuctionError::Invariant(format!("trade {t:?} names an unknown agent")));
            }
            if std::mem::replace(&mut buyer_used[t.buyer], true) {
                return Err(AuctionError::Invariant(format!("MUE {} trades twice", t.buyer)));
            }
            if std::mem::replace(&mut seller_used[t.seller], true) {
                return Err(AuctionError::Invariant(format!("femtocell {} trades twice", t.seller)));
            }
            if t.slots > inst.pair_cap(t.buyer, t.seller) {
                return Err(AuctionError::Invariant(format!(
                    "trade {t:?} exceeds the femtocell's {} slots",
                    inst.ask(t.seller).max_slots()
                )));
            }
            total += inst.surplus(t.buyer, t.seller, t.slots);
        }
        if (total - self.efficiency).abs() > 1e-9 {
            return Err(AuctionError::Invariant(format!(
                "efficiency {} does not match trades ({total})",
                self.efficiency
            )));
        }
        if self.efficiency < 0.0 {
            return Err(AuctionError::Invariant(format!("negative efficiency {}", self.efficiency)));
        }
        Ok(())
    }
}

/// Best trade between a pair: `(max_n b(n) - a(n), argmax n)` over
/// `n <= N_j`, smallest `n` on ties. Never negative since `n = 0` gives 0.
pub fn edge_weight(inst: &DoubleInstance, buyer: usize, seller: usize) -> (f64, usize) {
    let mut best = (0.0, 0);
    for n in 1..=inst.pair_cap(buyer, seller) {
        let s = inst.surplus(buyer, seller, n);
        if s > best.0 {
            best = (s, n);
        }
    }
    best
}

/// Edge weights and their argmax slot counts, computed once per market.
struct EdgeTable {
    graph: WeightedBipartiteGraph,
    best_n: Vec<usize>,
}

impl EdgeTable {
    fn build(inst: &DoubleInstance) -> Result<Self> {
        let mut graph = WeightedBipartiteGraph::empty(inst.buyers(), inst.sellers());
        let mut best_n = vec![0usize; inst.buyers() * inst.sellers()];
        for i in 0..inst.buyers() {
            for j in 0..inst.sellers() {
                let (w, n) = edge_weight(inst, i, j);
                graph.set_weight(i, j, w)?;
                best_n[i * inst.sellers() + j] = n;
            }
        }
        Ok(EdgeTable { graph, best_n })
    }

    /// Optimal efficiency with one buyer or one seller removed.
    fn efficiency_without(&self, buyer: Option<usize>, seller: Option<usize>) -> Result<f64> {
        let mut g = self.graph.clone();
        if let Some(i) = buyer {
            for j in 0..g.sellers() {
                g.set_weight(i, j, 0.0)?;
            }
        }
        if let Some(j) = seller {
            for i in 0..g.buyers() {
                g.set_weight(i, j, 0.0)?;
            }
        }
        Ok(max_weight_matching(&g)?.total_weight)
    }
}

/// Winner determination via maximum-weight matching.
pub fn double_wd(inst: &DoubleInstance) -> Result<DoubleAllocation> {
    solve_table(inst, &EdgeTable::build(inst)?)
}

fn solve_table(inst: &DoubleInstance, table: &EdgeTable) -> Result<DoubleAllocation> {
    let matching: Matching = max_weight_matching(&table.graph)?;
    let trades = matching
        .pairs
        .iter()
        .map(|&(buyer, seller)| Trade {
            buyer,
            seller,
            slots: table.best_n[buyer * inst.sellers() + seller],
        })
        .collect();
    let alloc = DoubleAllocation {
        trades,
        efficiency: matching.total_weight,
    };
    alloc.check_feasible(inst)?;
    Ok(alloc)
}

/// Enumerates every one-to-one matching and every slot count per pair.
/// Prefers fewer trades, then the lexicographically smallest trade list,
/// among equal-efficiency optima.
pub fn exhaustive_double_wd(inst: &DoubleInstance) -> Result<DoubleAllocation> {
    if inst.buyers() > EXHAUSTIVE_MAX_AGENTS || inst.sellers() > EXHAUSTIVE_MAX_AGENTS {
        return Err(AuctionError::TooLarge(format!(
            "{}x{} market; the oracle handles at most {EXHAUSTIVE_MAX_AGENTS} per side",
            inst.buyers(),
            inst.sellers()
        )));
    }
    if let Some(j) = (0..inst.sellers()).find(|&j| inst.ask(j).max_slots() > EXHAUSTIVE_MAX_CAP) {
        return Err(AuctionError::TooLarge(format!(
            "femtocell {j} offers {} slots; the oracle handles at most {EXHAUSTIVE_MAX_CAP}",
            inst.ask(j).max_slots()
        )));
    }
    let mut best = DoubleAllocation::empty();
    let mut taken = vec![false; inst.sellers()];
    let mut trades = Vec::new();
    enumerate(inst, 0, 0.0, &mut taken, &mut trades, &mut best);
    Ok(best)
}

fn trade_key(t: &Trade) -> (usize, usize, usize) {
    (t.buyer, t.seller, t.slots)
}

fn enumerate(
    inst: &DoubleInstance,
    buyer: usize,
    total: f64,
    taken: &mut [bool],
    trades: &mut Vec<Trade>,
    best: &mut DoubleAllocation,
) {
    if buyer == inst.buyers() {
        let smaller = || {
            trades.len() < best.trades.len()
                || (trades.len() == best.trades.len()
                    && trades.iter().map(trade_key).lt(best.trades.iter().map(trade_key)))
        };
        if total > best.efficiency || (total == best.efficiency && smaller()) {
            best.trades.clone_from(trades);
            best.efficiency = total;
        }
        return;
    }
    enumerate(inst, buyer + 1, total, taken, trades, best);
    for seller in 0..inst.sellers() {
        if taken[seller] {
            continue;
        }
        taken[seller] = true;
        for n in 1..=inst.pair_cap(buyer, seller) {
            trades.push(Trade { buyer, seller, slots: n });
            enumerate(inst, buyer + 1, total + inst.surplus(buyer, seller, n), taken, trades, best);
            trades.pop();
        }
        taken[seller] = false;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleSettlement {
    pub allocation: DoubleAllocation,
    /// `p^b_i`, zero for losing MUEs.
    pub buyer_payments: Vec<f64>,
    /// `p^s_j`, zero for losing femtocells.
    pub seller_receipts: Vec<f64>,
    /// `v^b(n*) - p^b_i`.
    pub buyer_utilities: Vec<f64>,
    /// `p^s_j - v^s_j(n*)`.
    pub seller_utilities: Vec<f64>,
    /// `sum p^b - sum p^s`; negative is an auctioneer deficit.
    pub budget_balance: f64,
    /// Profit fell below the reserve price and every trade was voided.
    pub terminated_by_reserve: bool,
}

impl DoubleSettlement {
    /// Trades that actually go through.
    pub fn executed(&self) -> &[Trade] {
        if self.terminated_by_reserve {
            &[]
        } else {
            &self.allocation.trades
        }
    }
}

/// VCG prices for an optimal allocation of `inst`. Utilities are measured
/// against the submitted vectors, i.e. assuming truthful reports.
pub fn vcg_double_pricing(inst: &DoubleInstance, alloc: &DoubleAllocation) -> Result<DoubleSettlement> {
    alloc
        .check_feasible(inst)
        .map_err(|e| AuctionError::Consistency(format!("allocation does not fit the instance: {e}")))?;

    let table = EdgeTable::build(inst)?;
    let q = alloc.efficiency;
    let mut buyer_payments = vec![0.0; inst.buyers()];
    let mut seller_receipts = vec![0.0; inst.sellers()];
    let mut buyer_utilities = vec![0.0; inst.buyers()];
    let mut seller_utilities = vec![0.0; inst.sellers()];
    for t in &alloc.trades {
        let bid = inst.bid(t.buyer, t.seller).price(t.slots);
        let ask = inst.ask(t.seller).price(t.slots);
        let q_no_buyer = table.efficiency_without(Some(t.buyer), None)?;
        let q_no_seller = table.efficiency_without(None, Some(t.seller))?;
        buyer_payments[t.buyer] = bid - (q - q_no_buyer);
        seller_receipts[t.seller] = ask + (q - q_no_seller);
        buyer_utilities[t.buyer] = bid - buyer_payments[t.buyer];
        seller_utilities[t.seller] = seller_receipts[t.seller] - ask;
    }
    let budget_balance = buyer_payments.iter().sum::<f64>() - seller_receipts.iter().sum::<f64>();

    let mut settlement = DoubleSettlement {
        allocation: alloc.clone(),
        buyer_payments,
        seller_receipts,
        buyer_utilities,
        seller_utilities,
        budget_balance,
        terminated_by_reserve: false,
    };
    if !alloc.trades.is_empty() && budget_balance < inst.reserve_price() {
        settlement.buyer_payments.iter_mut().for_each(|p| *p = 0.0);
        settlement.seller_receipts.iter_mut().for_each(|p| *p = 0.0);
        settlement.buyer_utilities.iter_mut().for_each(|u| *u = 0.0);
        settlement.seller_utilities.iter_mut().for_each(|u| *u = 0.0);
        settlement.budget_balance = 0.0;
        settlement.terminated_by_reserve = true;
    }
    Ok(settlement)
}

/// Runs the auction and settles against the agents' true values:
/// `buyer_values[i][j]` and `seller_values[j]`.
pub fn settle_double(
    inst: &DoubleInstance,
    buyer_values: &[Vec<BidVector>],
    seller_values: &[BidVector],
) -> Result<DoubleSettlement> {
    if buyer_values.len() != inst.buyers() || seller_values.len() != inst.sellers() {
        return Err(AuctionError::Consistency("true values do not cover every agent".into()));
    }
    let alloc = solve_table(inst, &EdgeTable::build(inst)?)?;
    let mut s = vcg_double_pricing(inst, &alloc)?;
    if s.terminated_by_reserve {
        return Ok(s);
    }
    for t in &alloc.trades {
        let v_b = buyer_values[t.buyer]
            .get(t.seller)
            .filter(|v| v.max_slots() >= t.slots)
            .ok_or_else(|| AuctionError::Consistency(format!("no true value for trade {t:?}")))?;
        let v_s = seller_values[t.seller]
            .prices()
            .get(t.slots)
            .ok_or_else(|| AuctionError::Consistency(format!("no true cost for trade {t:?}")))?;
        s.buyer_utilities[t.buyer] = v_b.price(t.slots) - s.buyer_payments[t.buyer];
        s.seller_utilities[t.seller] = s.seller_receipts[t.seller] - v_s;
    }
    Ok(s)
}
