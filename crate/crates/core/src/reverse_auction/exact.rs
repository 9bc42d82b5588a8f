//! Exact winner determination by branch and bound.
//!
//! Maximises `F(n) = U(S(n)) - C(n)` with `S(n) = sum n_i R_i / T` and
//! `C(n) = sum b_i(n_i)`. Upper bounds come from a tangent relaxation of
//! the concave `U`: for any slope `l`,
//!
//! ```text
//! U(S) <= max_x (U(x) - l x) + l S
//! ```
//!
//! so the free part of the problem turns into a separable one, solved
//! exactly by taking the best `R` positive slot values `l R_i / T - db_i`.
//! The slope is tuned per node by golden-section search (the bound is convex
//! in `l`).

use super::{greedy_fill, ReverseAllocation, ReverseInstance};
use crate::error::Result;
use crate::valuation::SigmoidUtility;

/// A node is explored only if its bound beats the incumbent by more than this.
const PRUNE_TOL: f64 = 1e-13;
const GOLDEN_STEPS: usize = 24;

struct Femto {
    index: usize,
    slot_rate: f64,
    /// Marginal prices of slots `1..=cap`.
    increments: Vec<f64>,
}

struct Search<'a> {
    utility: &'a SigmoidUtility,
    femtos: Vec<Femto>,
    /// Suffix sums of `cap * slot_rate`, for the reachable-rate bound.
    reach: Vec<f64>,
    /// Prefix sums of `increments`, i.e. the bid at each count.
    prices: Vec<Vec<f64>>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
    scratch: Vec<f64>,
}

/// Exact winner determination for any anchored, non-decreasing bids.
///
/// Agrees with [`super::exhaustive_wd`] on efficiency but scales to full
/// neighbourhoods (dozens of femtocells, `T = 100`).
pub fn exact_wd(inst: &ReverseInstance) -> Result<ReverseAllocation> {
    inst.check_bids(false)?;
    let u = inst.utility();
    let top_slope = u.derivative(0.0);

    // A slot priced at or above U'(0) R_i / T can be dropped from any
    // allocation without loss, and so can every later slot of the same
    // femtocell.
    let caps: Vec<usize> = inst
        .bids()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let limit = top_slope * inst.slot_rate(i);
            let upto = b.max_slots().min(inst.slots());
            (1..=upto).rev().find(|&k| b.marginal(k - 1) < limit).unwrap_or(0)
        })
        .collect();

    let (greedy, _) = greedy_fill(inst, &caps);
    let mut femtos: Vec<Femto> = caps
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(i, &cap)| Femto {
            index: i,
            slot_rate: inst.slot_rate(i),
            increments: (0..cap).map(|k| inst.bids()[i].marginal(k)).collect(),
        })
        .collect();
    femtos.sort_by(|a, b| b.slot_rate.total_cmp(&a.slot_rate).then(a.index.cmp(&b.index)));

    let mut reach = vec![0.0; femtos.len() + 1];
    for d in (0..femtos.len()).rev() {
        reach[d] = reach[d + 1] + femtos[d].increments.len() as f64 * femtos[d].slot_rate;
    }
    let prices = femtos
        .iter()
        .map(|f| {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(f.increments.iter().map(|d| {
                    acc += d;
                    acc
                }))
                .collect()
        })
        .collect();

    let greedy_local: Vec<usize> = femtos.iter().map(|f| greedy[f.index]).collect();
    let greedy_value = value_of(u, &femtos, &greedy_local);
    let baseline = inst.baseline();
    let (best, best_value) = if greedy_value > baseline {
        (greedy_local, greedy_value)
    } else {
        (vec![0; femtos.len()], baseline)
    };

    let mut search = Search {
        utility: u,
        current: vec![0; femtos.len()],
        femtos,
        reach,
        prices,
        best,
        best_value,
        scratch: Vec::new(),
    };
    search.descend(0, inst.slots(), 0.0, 0.0);

    let mut alloc = vec![0usize; inst.femto_count()];
    for (f, n) in search.femtos.iter().zip(&search.best) {
        alloc[f.index] = *n;
    }
    let alloc = inst.finish(alloc);
    alloc.check_feasible(inst)?;
    Ok(alloc)
}

fn value_of(u: &SigmoidUtility, femtos: &[Femto], n: &[usize]) -> f64 {
    let rate: f64 = femtos.iter().zip(n).map(|(f, k)| *k as f64 * f.slot_rate).sum();
    let cost: f64 = femtos
        .iter()
        .zip(n)
        .map(|(f, k)| f.increments[..*k].iter().sum::<f64>())
        .sum();
    u.eval(rate) - cost
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, remaining: usize, rate: f64, cost: f64) {
        let m = self.femtos.len();
        if depth == m || remaining == 0 {
            let value = self.utility.eval(rate) - cost;
            if value > self.best_value {
                self.best_value = value;
                self.best.copy_from_slice(&self.current);
                self.best[depth..].iter_mut().for_each(|n| *n = 0);
            }
            return;
        }
        if depth + 1 == m {
            self.finish_last(depth, remaining, rate, cost);
            return;
        }
        if self.bound(depth, remaining, rate, cost) <= self.best_value + PRUNE_TOL {
            return;
        }
        let top = self.femtos[depth].increments.len().min(remaining);
        let step = self.femtos[depth].slot_rate;
        for k in (0..=top).rev() {
            self.current[depth] = k;
            let price = self.prices[depth][k];
            self.descend(depth + 1, remaining - k, rate + k as f64 * step, cost + price);
        }
        self.current[depth] = 0;
    }

    /// Last femtocell: its value is concave-minus-anything in one variable,
    /// so scan it.
    fn finish_last(&mut self, depth: usize, remaining: usize, rate: f64, cost: f64) {
        let f = &self.femtos[depth];
        let top = f.increments.len().min(remaining);
        let mut best_k = None;
        let mut best_value = self.best_value;
        for k in 0..=top {
            let v = self.utility.eval(rate + k as f64 * f.slot_rate) - cost - self.prices[depth][k];
            if v > best_value {
                best_value = v;
                best_k = Some(k);
            }
        }
        if let Some(k) = best_k {
            self.current[depth] = k;
            self.best_value = best_value;
            self.best.copy_from_slice(&self.current);
            self.current[depth] = 0;
        }
    }

    fn bound(&mut self, depth: usize, remaining: usize, rate: f64, cost: f64) -> f64 {
        let max_step = self.femtos[depth..]
            .iter()
            .map(|f| f.slot_rate)
            .fold(0.0, f64::max);
        let hi_rate = rate + self.reach[depth].min(remaining as f64 * max_step);
        let u = self.utility;
        let slope_hi = u.derivative(rate);
        let slope_lo = u.derivative(hi_rate);

        let eval = |slope: f64, s: &mut Self| -> f64 {
            let x = u.rate_for_slope(slope).unwrap_or(rate).clamp(rate, hi_rate);
            let conj = u.eval(x) - slope * x;
            conj + slope * rate - cost + s.separable(depth, remaining, slope)
        };

        let mut best = eval(slope_hi, self).min(eval(slope_lo, self));
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let (mut a, mut b) = (slope_lo, slope_hi);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = eval(c, self);
        let mut fd = eval(d, self);
        for _ in 0..GOLDEN_STEPS {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = eval(c, self);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = eval(d, self);
            }
        }
        best = best.min(fc).min(fd);
        best
    }

    /// Best `remaining` positive slot values `slope * rate - increment`
    /// among the free femtocells, ignoring the in-order constraint.
    fn separable(&mut self, depth: usize, remaining: usize, slope: f64) -> f64 {
        self.scratch.clear();
        for f in &self.femtos[depth..] {
            let gain = slope * f.slot_rate;
            self.scratch
                .extend(f.increments.iter().map(|d| gain - d).filter(|v| *v > 0.0));
        }
        if self.scratch.len() > remaining {
            let cut = self.scratch.len() - remaining;
            self.scratch.select_nth_unstable_by(cut, |a, b| a.total_cmp(b));
            self.scratch[cut..].iter().sum()
        } else {
            self.scratch.iter().sum()
        }
    }
}
