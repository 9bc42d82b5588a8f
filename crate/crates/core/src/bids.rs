//! Price schedules over leased-slot counts.
//!
//! A [`BidVector`] stores `b(0), b(1), ..., b(N)`: the price for trading
//! `n` slots sits at index `n`. The same type carries femtocell bids in the
//! reverse auction and both bid and ask vectors in the double auction.

use crate::error::VectorDefect;

/// Slack allowed when checking monotonicity and convexity of float schedules.
pub const SHAPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BidVector {
    prices: Vec<f64>,
}

impl BidVector {
    /// Wraps a raw schedule without validating it. See [`BidVector::check`].
    pub fn new(prices: Vec<f64>) -> Self {
        BidVector { prices }
    }

    /// The schedule that offers nothing: `{(0, 0)}`.
    pub fn empty() -> Self {
        BidVector { prices: vec![0.0] }
    }

    /// Builds `b` from marginal prices `b(n) - b(n-1)`, anchored at zero.
    pub fn from_increments(increments: &[f64]) -> Self {
        let mut prices = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        prices.push(acc);
        for d in increments {
            acc += d;
            prices.push(acc);
        }
        BidVector { prices }
    }

    /// Largest slot count with a price, `N`.
    pub fn max_slots(&self) -> usize {
        self.prices.len().saturating_sub(1)
    }

    pub fn price(&self, n: usize) -> f64 {
        self.prices[n]
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// `(n, b(n))` pairs in increasing `n`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.prices.iter().copied().enumerate()
    }

    /// Marginal price of the `(n+1)`-th slot.
    pub fn marginal(&self, n: usize) -> f64 {
        self.prices[n + 1] - self.prices[n]
    }

    /// Entry-wise scaling `b' = f * b`.
    pub fn scaled(&self, factor: f64) -> Self {
        BidVector {
            prices: self.prices.iter().map(|p| p * factor).collect(),
        }
    }

    /// Keeps only the first `cap + 1` entries.
    pub fn truncated(&self, cap: usize) -> Self {
        let end = (cap + 1).min(self.prices.len());
        BidVector {
            prices: self.prices[..end].to_vec(),
        }
    }

    /// Second forward differences are all non-negative (within [`SHAPE_TOL`]).
    pub fn is_convex(&self) -> bool {
        self.prices
            .windows(3)
            .all(|w| (w[2] - w[1]) - (w[1] - w[0]) >= -SHAPE_TOL)
    }

    /// Checks the `(0, 0)` anchor, finiteness and monotonicity, and
    /// convexity when `require_convex` is set. Returns the first offending
    /// index.
    pub fn check(&self, require_convex: bool) -> Result<(), (usize, VectorDefect)> {
        match self.prices.first() {
            Some(p) if *p == 0.0 => {}
            Some(p) if !p.is_finite() => return Err((0, VectorDefect::NonFinite)),
            _ => return Err((0, VectorDefect::NonZeroAnchor)),
        }
        for (n, p) in self.prices.iter().enumerate().skip(1) {
            if !p.is_finite() {
                return Err((n, VectorDefect::NonFinite));
            }
            if p - self.prices[n - 1] < -SHAPE_TOL {
                return Err((n, VectorDefect::Decreasing));
            }
            if require_convex && n >= 2 {
                let prev = self.prices[n - 1] - self.prices[n - 2];
                if (p - self.prices[n - 1]) - prev < -SHAPE_TOL {
                    return Err((n, VectorDefect::NonConvex));
                }
            }
        }
        Ok(())
    }
}

impl From<Vec<f64>> for BidVector {
    fn from(prices: Vec<f64>) -> Self {
        BidVector::new(prices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_vector_passes() {
        let b = BidVector::new(vec![0.0, 2.0, 5.0]);
        assert_eq!(b.check(true), Ok(()));
        assert!(b.is_convex());
    }

    #[test]
    fn nonzero_anchor_rejected() {
        let b = BidVector::new(vec![1.0, 2.0]);
        assert_eq!(b.check(false), Err((0, VectorDefect::NonZeroAnchor)));
        assert_eq!(BidVector::new(vec![]).check(false), Err((0, VectorDefect::NonZeroAnchor)));
    }

    #[test]
    fn concave_increments_rejected_only_when_convexity_required() {
        let b = BidVector::new(vec![0.0, 3.0, 4.0]);
        assert_eq!(b.check(true), Err((2, VectorDefect::NonConvex)));
        assert_eq!(b.check(false), Ok(()));
    }

    #[test]
    fn decreasing_and_nan_rejected() {
        assert_eq!(
            BidVector::new(vec![0.0, 2.0, 1.0]).check(false),
            Err((2, VectorDefect::Decreasing))
        );
        assert_eq!(
            BidVector::new(vec![0.0, f64::NAN]).check(false),
            Err((1, VectorDefect::NonFinite))
        );
    }

    #[test]
    fn scaling_keeps_anchor_and_convexity() {
        let b = BidVector::from_increments(&[0.1, 0.3, 0.7]);
        for f in [0.5, 0.8, 1.5, 2.0] {
            let s = b.scaled(f);
            assert_eq!(s.price(0), 0.0);
            assert!(s.is_convex());
        }
    }
}
