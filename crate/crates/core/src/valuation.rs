//! Utility functions and the private-value models that produce truthful
//! bid and ask vectors.
//!
//! Rates are in Mb/s. A round has `slots` time slots; holding `n` of them on
//! a link of full-frame rate `R` yields an average rate of `n * R / slots`.

use crate::bids::BidVector;
use crate::error::{AuctionError, Result};

/// Demand draws below this are clamped so the sigmoid stays well defined.
pub const MIN_DEMAND_MBPS: f64 = 1e-6;

/// `U(R) = 1 - exp(-a R / R_dem)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidUtility {
    satisfaction: f64,
    demand_mbps: f64,
}

impl SigmoidUtility {
    pub fn new(satisfaction: f64, demand_mbps: f64) -> Result<Self> {
        if !(satisfaction > 0.0 && satisfaction.is_finite()) {
            return Err(AuctionError::Domain(format!(
                "satisfaction factor must be positive, got {satisfaction}"
            )));
        }
        if !(demand_mbps > 0.0 && demand_mbps.is_finite()) {
            return Err(AuctionError::Domain(format!(
                "demand must be positive, got {demand_mbps}"
            )));
        }
        Ok(SigmoidUtility {
            satisfaction,
            demand_mbps,
        })
    }

    pub fn satisfaction(&self) -> f64 {
        self.satisfaction
    }

    pub fn demand_mbps(&self) -> f64 {
        self.demand_mbps
    }

    fn scale(&self) -> f64 {
        self.satisfaction / self.demand_mbps
    }

    /// Utility at `rate`, rejecting negative or NaN rates.
    pub fn utility(&self, rate: f64) -> Result<f64> {
        if rate.is_nan() || rate < 0.0 {
            return Err(AuctionError::Domain(format!("rate must be >= 0, got {rate}")));
        }
        Ok(self.eval(rate))
    }

    /// Unchecked evaluation; callers guarantee `rate >= 0`.
    #[inline]
    pub fn eval(&self, rate: f64) -> f64 {
        -(-self.scale() * rate).exp_m1()
    }

    /// `U'(R) = (a / R_dem) exp(-a R / R_dem)`.
    #[inline]
    pub fn derivative(&self, rate: f64) -> f64 {
        self.scale() * (-self.scale() * rate).exp()
    }

    /// Rate at which the slope equals `slope`; `None` when the slope is out
    /// of `(0, U'(0)]`.
    pub fn rate_for_slope(&self, slope: f64) -> Option<f64> {
        let k = self.scale();
        if slope <= 0.0 || slope > k {
            return None;
        }
        Some(-(slope / k).ln() / k)
    }
}

/// Opportunity cost to a femtocell owner of leasing slots away from its
/// registered users.
///
/// The FUEs split the frame equally, so FUE `k` normally gets
/// `R'_k / K`. Leasing `n` slots shrinks every share by `(T - n) / T` and the
/// value is the summed utility loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FemtoValuationModel {
    fue_utilities: Vec<SigmoidUtility>,
    fue_rates: Vec<f64>,
    slots: usize,
}

impl FemtoValuationModel {
    pub fn new(fue_utilities: Vec<SigmoidUtility>, fue_rates: Vec<f64>, slots: usize) -> Result<Self> {
        if fue_utilities.len() != fue_rates.len() {
            return Err(AuctionError::Consistency(format!(
                "{} FUE utilities but {} FUE rates",
                fue_utilities.len(),
                fue_rates.len()
            )));
        }
        if slots == 0 {
            return Err(AuctionError::Domain("a round needs at least one slot".into()));
        }
        if let Some(r) = fue_rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(AuctionError::Domain(format!("FUE rate must be finite and >= 0, got {r}")));
        }
        Ok(FemtoValuationModel {
            fue_utilities,
            fue_rates,
            slots,
        })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn fue_count(&self) -> usize {
        self.fue_rates.len()
    }

    /// Each FUE's rate under the equal time share of the full frame.
    pub fn shared_rates(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.fue_rates.len().max(1) as f64;
        self.fue_rates.iter().map(move |r| r / k)
    }

    /// Private value `v(n)` of leasing `n` slots.
    pub fn value(&self, n: usize) -> Result<f64> {
        if n > self.slots {
            return Err(AuctionError::Domain(format!(
                "cannot lease {n} of {} slots",
                self.slots
            )));
        }
        if n == 0 {
            return Ok(0.0);
        }
        let keep = (self.slots - n) as f64 / self.slots as f64;
        Ok(self
            .fue_utilities
            .iter()
            .zip(self.shared_rates())
            .map(|(u, r)| u.eval(r) - u.eval(r * keep))
            .sum())
    }

    /// `{(0, 0), (1, v(1)), ..., (cap, v(cap))}`.
    pub fn truthful_bid_vector(&self, cap: usize) -> Result<BidVector> {
        let prices = (0..=cap).map(|n| self.value(n)).collect::<Result<Vec<_>>>()?;
        Ok(BidVector::new(prices))
    }
}

/// An MUE's value for femtocell access.
///
/// Trading moves the MUE off the macro cell: holding `k` slots of femtocell
/// `j` yields `U(k R_j / T) - U(R_mac)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MueValuationModel {
    utility: SigmoidUtility,
    macro_rate: f64,
    link_rates: Vec<f64>,
    slots: usize,
}

impl MueValuationModel {
    pub fn new(utility: SigmoidUtility, macro_rate: f64, link_rates: Vec<f64>, slots: usize) -> Result<Self> {
        if slots == 0 {
            return Err(AuctionError::Domain("a round needs at least one slot".into()));
        }
        if !(macro_rate >= 0.0 && macro_rate.is_finite()) {
            return Err(AuctionError::Domain(format!("macro rate must be >= 0, got {macro_rate}")));
        }
        if let Some(r) = link_rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(AuctionError::Domain(format!("link rate must be finite and >= 0, got {r}")));
        }
        Ok(MueValuationModel {
            utility,
            macro_rate,
            link_rates,
            slots,
        })
    }

    pub fn utility(&self) -> &SigmoidUtility {
        &self.utility
    }

    pub fn macro_rate(&self) -> f64 {
        self.macro_rate
    }

    pub fn link_rates(&self) -> &[f64] {
        &self.link_rates
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Macro-only utility `U(R_mac)`.
    pub fn baseline(&self) -> f64 {
        self.utility.eval(self.macro_rate)
    }

    /// Aggregated value of a reverse-auction allocation,
    /// `U(sum n_i R_i / T) - U(R_mac)`. Negative when the femtocells deliver
    /// less than the macro cell.
    pub fn value_single(&self, alloc: &[usize]) -> f64 {
        let rate: f64 = alloc
            .iter()
            .zip(&self.link_rates)
            .map(|(n, r)| *n as f64 * r)
            .sum::<f64>()
            / self.slots as f64;
        self.utility.eval(rate) - self.baseline()
    }

    /// Unclamped pair value `U(k R_j / T) - U(R_mac)`; concave in `k`.
    pub fn raw_pair_value(&self, femto: usize, k: usize) -> f64 {
        let rate = k as f64 * self.link_rates[femto] / self.slots as f64;
        self.utility.eval(rate) - self.baseline()
    }

    /// Value of buying `k` slots from `femto`. An MUE offered a worse rate
    /// than the macro cell keeps the macro cell, so the value is floored at 0.
    pub fn pair_value(&self, femto: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.raw_pair_value(femto, k).max(0.0)
        }
    }

    /// Truthful bid vector towards `femto` for `0..=cap` slots.
    pub fn bid_vector(&self, femto: usize, cap: usize) -> BidVector {
        BidVector::new((0..=cap).map(|k| self.pair_value(femto, k)).collect())
    }
}
