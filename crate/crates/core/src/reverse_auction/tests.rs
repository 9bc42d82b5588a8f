use super::*;
use crate::error::VectorDefect;
use crate::valuation::FemtoValuationModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mue() -> SigmoidUtility {
    SigmoidUtility::new(1.0, 4.0).unwrap()
}

fn inst(bids: Vec<Vec<f64>>, rates: Vec<f64>, slots: usize, macro_rate: f64) -> ReverseInstance {
    ReverseInstance::new(bids.into_iter().map(BidVector::new).collect(), rates, slots, macro_rate, mue()).unwrap()
}

/// Truthful market drawn from the femtocell valuation model.
fn random_truthful(rng: &mut ChaCha8Rng, max_femtos: usize, max_cap: usize, max_slots: usize) -> (ReverseInstance, Vec<BidVector>) {
    let slots = rng.random_range(1..=max_slots);
    let femtos = rng.random_range(1..=max_femtos);
    let mut values = Vec::new();
    let mut rates = Vec::new();
    for _ in 0..femtos {
        let fues = rng.random_range(0..=3);
        let us = (0..fues)
            .map(|_| SigmoidUtility::new(1.0, rng.random_range(1e-6..6.0)).unwrap())
            .collect();
        let rs = (0..fues).map(|_| rng.random_range(0.0..30.0)).collect();
        let model = FemtoValuationModel::new(us, rs, slots).unwrap();
        let cap = rng.random_range(0..=max_cap.min(slots));
        values.push(model.truthful_bid_vector(cap).unwrap());
        rates.push(rng.random_range(0.0..25.0));
    }
    let macro_rate = rng.random_range(0.0..2.0);
    let inst = ReverseInstance::new(values.clone(), rates, slots, macro_rate, mue()).unwrap();
    (inst, values)
}

/// Convex bids with arbitrary marginal prices.
fn random_convex(rng: &mut ChaCha8Rng, homogeneous: bool) -> ReverseInstance {
    let slots = rng.random_range(1..=15);
    let femtos = rng.random_range(1..=5);
    let shared = rng.random_range(0.0..30.0);
    let mut bids = Vec::new();
    let mut rates = Vec::new();
    for _ in 0..femtos {
        let cap = rng.random_range(0..=5usize.min(slots));
        let mut inc: Vec<f64> = (0..cap).map(|_| rng.random_range(0.0..0.08)).collect();
        inc.sort_by(f64::total_cmp);
        bids.push(BidVector::from_increments(&inc));
        rates.push(if homogeneous { shared } else { rng.random_range(0.0..30.0) });
    }
    ReverseInstance::new(bids, rates, slots, rng.random_range(0.0..2.0), mue()).unwrap()
}

#[test]
fn validation_examples() {
    assert!(inst(vec![vec![0.0, 2.0, 5.0]], vec![1.0], 4, 0.0).validate_bids().is_ok());
    assert_eq!(
        inst(vec![vec![1.0, 2.0]], vec![1.0], 4, 0.0).validate_bids(),
        Err(AuctionError::InvalidVector { agent: 0, index: 0, defect: VectorDefect::NonZeroAnchor })
    );
    assert_eq!(
        inst(vec![vec![0.0, 1.0], vec![0.0, 3.0, 4.0]], vec![1.0, 1.0], 4, 0.0).validate_bids(),
        Err(AuctionError::InvalidVector { agent: 1, index: 2, defect: VectorDefect::NonConvex })
    );
}

#[test]
fn instance_rejects_offers_beyond_the_round() {
    let r = ReverseInstance::new(vec![BidVector::new(vec![0.0; 6])], vec![1.0], 4, 0.0, mue());
    assert!(matches!(r, Err(AuctionError::Domain(_))));
}

#[test]
fn greedy_rejects_non_convex_bids() {
    let i = inst(vec![vec![0.0, 3.0, 4.0]], vec![10.0], 4, 0.0);
    assert!(matches!(greedy_wd(&i), Err(AuctionError::InvalidVector { .. })));
}

#[test]
fn empty_market_is_no_trade() {
    let i = inst(vec![], vec![], 10, 1.0);
    for solver in [WdSolver::Greedy, WdSolver::Exact, WdSolver::Exhaustive] {
        let a = solver.solve(&i).unwrap();
        assert!(a.slots.is_empty());
        assert_eq!(a.efficiency, 0.0);
    }
}

#[test]
fn prohibitive_bids_fall_back_to_macro() {
    let i = inst(vec![vec![0.0, 5.0, 10.0, 15.0]], vec![20.0], 10, 0.5);
    for solver in [WdSolver::Greedy, WdSolver::Exact, WdSolver::Exhaustive] {
        assert_eq!(solver.solve(&i).unwrap(), ReverseAllocation::no_trade(1));
    }
}

#[test]
fn cheap_linear_seller_sells_everything() {
    // the last slot still adds more than 1e-4 of utility in both markets
    let i = inst(vec![(0..=6).map(|n| 1e-4 * n as f64).collect()], vec![40.0], 10, 0.1);
    assert_eq!(exhaustive_wd(&i).unwrap().slots, vec![6]);
    let j = inst(vec![(0..=5).map(|n| 1e-4 * n as f64).collect()], vec![20.0], 5, 0.1);
    assert_eq!(exhaustive_wd(&j).unwrap().slots, vec![5]);
}

#[test]
fn zero_rates_buy_nothing() {
    let i = inst(vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.1]], vec![0.0, 0.0], 5, 0.0);
    assert_eq!(exhaustive_wd(&i).unwrap(), ReverseAllocation::no_trade(2));
    assert_eq!(exact_wd(&i).unwrap(), ReverseAllocation::no_trade(2));
}

#[test]
fn greedy_misses_optimum_with_heterogeneous_rates() {
    // values computed by an independent enumeration script
    let i = inst(
        vec![vec![0.0, 0.02, 0.07], vec![0.0, 0.01, 0.03]],
        vec![20.0, 12.0],
        4,
        0.5,
    );
    let g = greedy_wd(&i).unwrap();
    assert_eq!(g.slots, vec![2, 2]);
    assert!((g.efficiency - 0.764_181_263_695_861_1).abs() < 1e-12);
    let e = exhaustive_wd(&i).unwrap();
    assert_eq!(e.slots, vec![1, 2]);
    assert!((e.efficiency - 0.768_569_041_377_887_8).abs() < 1e-12);
    assert_eq!(exact_wd(&i).unwrap().slots, vec![1, 2]);
}

#[test]
fn greedy_matches_enumeration_on_a_homogeneous_market() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bids = Vec::new();
    for _ in 0..3 {
        let mut inc: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.05)).collect();
        inc.sort_by(f64::total_cmp);
        bids.push(BidVector::from_increments(&inc));
    }
    let i = ReverseInstance::new(bids, vec![9.0; 3], 10, 0.4, mue()).unwrap();
    let g = greedy_wd(&i).unwrap();
    let e = exhaustive_wd(&i).unwrap();
    assert!((g.efficiency - e.efficiency).abs() < 1e-9);
    assert!(g.is_trade());
}

#[test]
fn exhaustive_refuses_huge_instances() {
    let bids = (0..8).map(|_| BidVector::new(vec![0.0; 11])).collect();
    let i = ReverseInstance::new(bids, vec![1.0; 8], 10, 0.0, mue()).unwrap();
    assert!(matches!(exhaustive_wd(&i), Err(AuctionError::TooLarge(_))));
}

#[test]
fn greedy_work_is_bounded_by_slots_times_femtos() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let i = random_convex(&mut rng, false);
        let (_, evals) = greedy_wd_counted(&i).unwrap();
        assert!(evals <= i.slots() * i.femto_count());
    }
}

#[test]
fn loser_is_paid_nothing() {
    let i = inst(vec![vec![0.0, 0.001, 0.002], vec![0.0, 0.5, 1.0]], vec![20.0, 20.0], 4, 0.2);
    let a = exact_wd(&i).unwrap();
    assert_eq!(a.slots[1], 0);
    assert_eq!(vcg_price(&i, &a, 1, WdSolver::Exact).unwrap(), 0.0);
    assert_eq!(vcg_price(&i, &a, 7, WdSolver::Exact), Err(AuctionError::UnknownAgent(7)));
}

#[test]
fn sole_seller_collects_bid_plus_surplus() {
    let i = inst(vec![vec![0.0, 0.001, 0.003, 0.006]], vec![20.0], 10, 0.2);
    let a = exhaustive_wd(&i).unwrap();
    assert!(a.is_trade());
    let p = vcg_price(&i, &a, 0, WdSolver::Exhaustive).unwrap();
    assert!((p - (i.bids()[0].price(a.slots[0]) + a.efficiency)).abs() < 1e-15);
}

#[test]
fn identical_linear_sellers_are_paid_their_bids() {
    let linear: Vec<f64> = (0..=4).map(|n| 0.002 * n as f64).collect();
    let i = inst(vec![linear.clone(), linear], vec![15.0, 15.0], 4, 0.3);
    let a = exhaustive_wd(&i).unwrap();
    let q_without = exhaustive_wd(&i.without(0).unwrap()).unwrap().efficiency;
    assert!((q_without - a.efficiency).abs() < 1e-12);
    for f in 0..2 {
        if a.slots[f] > 0 {
            let p = vcg_price(&i, &a, f, WdSolver::Exhaustive).unwrap();
            assert!((p - i.bids()[f].price(a.slots[f])).abs() < 1e-12);
        }
    }
}

#[test]
fn no_trade_settlement_leaves_mue_on_macro() {
    let i = inst(vec![vec![0.0, 5.0]], vec![3.0], 10, 0.7);
    let s = settle_reverse(&i, i.bids()).unwrap();
    assert!(!s.allocation.is_trade());
    assert_eq!(s.utilities, vec![0.0]);
    assert_eq!(s.mue_total_payment, 0.0);
    assert_eq!(s.mue_net_utility, i.baseline());
}

#[test]
fn settlement_identity_and_individual_rationality() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let (i, values) = random_truthful(&mut rng, 5, 5, 15);
        let s = settle_reverse(&i, &values).unwrap();
        for (f, v) in values.iter().enumerate() {
            let n = s.allocation.slots[f];
            assert_eq!(s.utilities[f] + v.price(n), s.payments[f]);
            assert!(s.utilities[f] >= -1e-9, "IR violated: {}", s.utilities[f]);
            if n == 0 {
                assert_eq!(s.payments[f], 0.0);
            }
        }
    }
}

#[test]
fn exact_handles_full_neighbourhoods() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (i, _) = random_truthful(&mut rng, 32, 100, 100);
        let e = exact_wd(&i).unwrap();
        let g = greedy_wd(&i).unwrap();
        e.check_feasible(&i).unwrap();
        assert!(e.efficiency >= g.efficiency - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exact_matches_exhaustive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = random_convex(&mut rng, false);
        let e = exhaustive_wd(&i).unwrap();
        let x = exact_wd(&i).unwrap();
        x.check_feasible(&i).unwrap();
        prop_assert!((e.efficiency - x.efficiency).abs() < 1e-9, "{} vs {}", e.efficiency, x.efficiency);
    }

    #[test]
    fn greedy_is_feasible_and_never_beats_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = random_convex(&mut rng, false);
        let g = greedy_wd(&i).unwrap();
        g.check_feasible(&i).unwrap();
        prop_assert!(g.efficiency <= exhaustive_wd(&i).unwrap().efficiency + 1e-12);
    }

    #[test]
    fn greedy_exact_when_rates_are_homogeneous(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = random_convex(&mut rng, true);
        let g = greedy_wd(&i).unwrap();
        let e = exhaustive_wd(&i).unwrap();
        prop_assert!((g.efficiency - e.efficiency).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn truthful_bidding_is_weakly_dominant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (i, values) = random_truthful(&mut rng, 5, 5, 15);
        let truthful = settle_reverse(&i, &values).unwrap();
        for f in 0..i.femto_count() {
            let v = &values[f];
            let mut lies: Vec<BidVector> = [0.5, 0.8, 1.5, 2.0].iter().map(|k| v.scaled(*k)).collect();
            for _ in 0..10 {
                let mut inc: Vec<f64> = (0..v.max_slots())
                    .map(|n| v.marginal(n) * rng.random_range(0.5..1.5))
                    .collect();
                inc.sort_by(f64::total_cmp);
                lies.push(BidVector::from_increments(&inc));
            }
            for lie in lies {
                let m = i.with_bid(f, lie).unwrap();
                let s = settle_reverse(&m, &values).unwrap();
                let du = truthful.utilities[f] - s.utilities[f];
                prop_assert!(du >= -1e-9, "femto {f} gains {} by lying", -du);
            }
        }
    }
}
