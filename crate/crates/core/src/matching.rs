//! Maximum-weight bipartite matching between buyers (MUEs) and sellers
//! (femtocells).
//!
//! Vertices may stay unmatched and zero-weight edges are never selected, so
//! the empty matching is always available. [`max_weight_matching`] runs the
//! Hungarian method in `O(n^2 m)` for `n <= m` on the smaller side;
//! [`brute_force_matching`] is the enumeration oracle.

use crate::error::{AuctionError, Result};

/// Weights `w[buyer][seller] >= 0`; zero means no trade is possible.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBipartiteGraph {
    buyers: usize,
    sellers: usize,
    weights: Vec<f64>,
}

impl WeightedBipartiteGraph {
    /// `weights` is row-major, one row per buyer.
    pub fn new(buyers: usize, sellers: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != buyers * sellers {
            return Err(AuctionError::Consistency(format!(
                "{} weights for a {buyers}x{sellers} graph",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(AuctionError::Domain(format!("edge weight must be finite and >= 0, got {w}")));
        }
        Ok(WeightedBipartiteGraph { buyers, sellers, weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let sellers = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != sellers) {
            return Err(AuctionError::Consistency("ragged weight matrix".into()));
        }
        Self::new(rows.len(), sellers, rows.concat())
    }

    pub fn empty(buyers: usize, sellers: usize) -> Self {
        WeightedBipartiteGraph {
            buyers,
            sellers,
            weights: vec![0.0; buyers * sellers],
        }
    }

    pub fn buyers(&self) -> usize {
        self.buyers
    }

    pub fn sellers(&self) -> usize {
        self.sellers
    }

    pub fn weight(&self, buyer: usize, seller: usize) -> f64 {
        self.weights[buyer * self.sellers + seller]
    }

    pub fn set_weight(&mut self, buyer: usize, seller: usize, w: f64) -> Result<()> {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(AuctionError::Domain(format!("edge weight must be finite and >= 0, got {w}")));
        }
        self.weights[buyer * self.sellers + seller] = w;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    /// `(buyer, seller)` pairs sorted by buyer.
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: f64,
}

impl Matching {
    fn from_pairs(g: &WeightedBipartiteGraph, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        let total_weight = pairs.iter().map(|&(b, s)| g.weight(b, s)).sum();
        Matching { pairs, total_weight }
    }

    pub fn seller_of(&self, buyer: usize) -> Option<usize> {
        self.pairs.iter().find(|(b, _)| *b == buyer).map(|(_, s)| *s)
    }

    pub fn buyer_of(&self, seller: usize) -> Option<usize> {
        self.pairs.iter().find(|(_, s)| *s == seller).map(|(b, _)| *b)
    }

    /// Degree at most one on both sides, indices in range, positive edges.
    pub fn check_valid(&self, g: &WeightedBipartiteGraph) -> Result<()> {
        let mut buyer_used = vec![false; g.buyers()];
        let mut seller_used = vec![false; g.sellers()];
        for &(b, s) in &self.pairs {
            if b >= g.buyers() || s >= g.sellers() {
                return Err(AuctionError::Invariant(format!("pair ({b}, {s}) outside the graph")));
            }
            if std::mem::replace(&mut buyer_used[b], true) {
                return Err(AuctionError::Invariant(format!("buyer {b} matched twice")));
            }
            if std::mem::replace(&mut seller_used[s], true) {
                return Err(AuctionError::Invariant(format!("seller {s} matched twice")));
            }
            if g.weight(b, s) <= 0.0 {
                return Err(AuctionError::Invariant(format!("zero-weight pair ({b}, {s}) selected")));
            }
        }
        Ok(())
    }
}

/// Maximum-weight matching by the Hungarian method.
///
/// Solves a min-cost assignment on `-w` over the smaller side (every row is
/// assigned, zero-weight assignments stand for "unmatched") and drops the
/// zero-weight pairs afterwards. Among equal-weight optima the result is the
/// one the algorithm reaches first, scanning rows and columns in index order.
pub fn max_weight_matching(g: &WeightedBipartiteGraph) -> Result<Matching> {
    if g.buyers() == 0 || g.sellers() == 0 {
        return Ok(Matching::default());
    }
    let transpose = g.buyers() > g.sellers();
    let (n, m) = if transpose {
        (g.sellers(), g.buyers())
    } else {
        (g.buyers(), g.sellers())
    };
    let cost = |row: usize, col: usize| -> f64 {
        if transpose {
            -g.weight(col, row)
        } else {
            -g.weight(row, col)
        }
    };

    // 1-indexed potentials; column 0 is the virtual start.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for col in 1..=m {
                if used[col] {
                    continue;
                }
                let cur = cost(r0 - 1, col - 1) - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=m {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let pairs = (1..=m)
        .filter(|&col| owner[col] != 0)
        .map(|col| {
            let (row, col) = (owner[col] - 1, col - 1);
            if transpose {
                (col, row)
            } else {
                (row, col)
            }
        })
        .filter(|&(b, s)| g.weight(b, s) > 0.0)
        .collect();
    let matching = Matching::from_pairs(g, pairs);
    matching.check_valid(g)?;
    Ok(matching)
}

/// Largest side the oracle enumerates over.
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Enumerates every matching. Among equal-weight optima it prefers fewer
/// edges, then the lexicographically smallest sorted pair list.
pub fn brute_force_matching(g: &WeightedBipartiteGraph) -> Result<Matching> {
    if g.buyers().min(g.sellers()) > BRUTE_FORCE_LIMIT {
        return Err(AuctionError::TooLarge(format!(
            "{}x{} graph; brute force handles a smaller side of at most {BRUTE_FORCE_LIMIT}",
            g.buyers(),
            g.sellers()
        )));
    }
    let mut best = Matching::default();
    let mut taken = vec![false; g.sellers()];
    let mut pairs = Vec::new();
    enumerate(g, 0, 0.0, &mut taken, &mut pairs, &mut best);
    Ok(best)
}

fn enumerate(
    g: &WeightedBipartiteGraph,
    buyer: usize,
    total: f64,
    taken: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    best: &mut Matching,
) {
    if buyer == g.buyers() {
        let better = total > best.total_weight
            || (total == best.total_weight
                && (pairs.len() < best.pairs.len()
                    || (pairs.len() == best.pairs.len() && pairs[..] < best.pairs[..])));
        if better {
            best.pairs.clone_from(pairs);
            best.total_weight = total;
        }
        return;
    }
    enumerate(g, buyer + 1, total, taken, pairs, best);
    for seller in 0..g.sellers() {
        let w = g.weight(buyer, seller);
        if taken[seller] || w <= 0.0 {
            continue;
        }
        taken[seller] = true;
        pairs.push((buyer, seller));
        enumerate(g, buyer + 1, total + w, taken, pairs, best);
        pairs.pop();
        taken[seller] = false;
    }
}
