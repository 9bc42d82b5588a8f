use super::*;

fn small(rounds: usize) -> Config {
    let mut c = Config::default();
    c.experiment.rounds = rounds;
    c.experiment.slots = 20;
    c.truthfulness.rounds = rounds;
    c.sweep.densities = vec![0.0, 0.5, 1.0];
    c.sweep.mue_counts = vec![1, 4];
    c.sweep.mue_count_densities = vec![1.0];
    c.sweep.max_demands_mbps = vec![1.0, 10.0];
    c
}

#[test]
fn point_seeds_differ() {
    let a = point_seed(1, "density", 0);
    assert_eq!(a, point_seed(1, "density", 0));
    assert_ne!(a, point_seed(1, "density", 1));
    assert_ne!(a, point_seed(1, "demand", 0));
    assert_ne!(a, point_seed(2, "density", 0));
}

#[test]
fn markets_are_reproducible() {
    let cfg = small(1);
    let spec = MarketSpec {
        scenario: Scenario::MultiMue,
        density: 0.7,
        num_mues: 3,
        max_demand_mbps: 6.0,
    };
    let a = build_market(&cfg, &spec, 5, 2).unwrap();
    let b = build_market(&cfg, &spec, 5, 2).unwrap();
    assert_eq!(a.femto_values, b.femto_values);
    assert_eq!(a.channel, b.channel);
    assert_eq!(a.mues.len(), 3);
    assert!(a.femto_values.iter().all(|v| v.max_slots() == 20 && v.is_convex()));
    let c = build_market(&cfg, &spec, 5, 3).unwrap();
    assert_ne!(a.channel, c.channel);
}

#[test]
fn empty_street_has_no_trade() {
    let mut cfg = small(5);
    cfg.topology.density = 0.0;
    let run = run_scenario(&cfg, Scenario::SingleMue).unwrap();
    assert_eq!(run.records.len(), 5);
    for r in &run.records {
        assert_eq!(r.femtos, 0);
        assert_eq!(r.efficiency, 0.0);
        assert_eq!(r.mue_utility, r.baseline_utility);
    }
    assert_eq!(run.points[0].improvement_pct, 0.0);
}

#[test]
fn one_mue_one_femto_is_a_bilateral_trade() {
    let cfg = small(1);
    let spec = MarketSpec {
        scenario: Scenario::MultiMue,
        density: 1.0,
        num_mues: 1,
        max_demand_mbps: 6.0,
    };
    let mut market = build_market(&cfg, &spec, 9, 0).unwrap();
    market.femto_values.truncate(1);
    for m in &mut market.mues {
        *m = MueValuationModel::new(*m.utility(), m.macro_rate(), m.link_rates()[..1].to_vec(), m.slots()).unwrap();
    }
    let (s, o) = run_double_round(&market, f64::NEG_INFINITY).unwrap();
    assert!(o.trades <= 1);
    if let Some(t) = s.executed().first() {
        // with nobody else in the market each side is paid the other's quote
        let bid = market.buyer_values()[0][0].price(t.slots);
        let ask = market.femto_values[0].price(t.slots);
        assert!((s.buyer_payments[0] - ask).abs() < 1e-12);
        assert!((s.seller_receipts[0] - bid).abs() < 1e-12);
    }
}

#[test]
fn truthfulness_run_is_clean() {
    let cfg = small(4);
    let recs = run_truthfulness(&cfg).unwrap();
    assert_eq!(recs.len(), 3 * 4 * 4);
    assert!(recs.iter().all(|r| r.delta_u.unwrap() >= -IR_TOL));
    for panel in Panel::ALL {
        assert_eq!(recs.iter().filter(|r| r.panel == Some(panel)).count(), 16);
    }
}

#[test]
fn unit_factor_changes_nothing() {
    let mut cfg = small(3);
    cfg.truthfulness.factors = vec![1.0];
    for r in run_truthfulness(&cfg).unwrap() {
        assert_eq!(r.delta_u, Some(0.0));
    }
}

#[test]
fn sweeps_have_one_point_per_grid_value() {
    let cfg = small(3);
    let d = run_density_sweep(&cfg).unwrap();
    assert_eq!(d.points.len(), 3);
    assert_eq!(d.records.len(), 9);
    assert!(d.points.iter().all(|p| p.rounds == 3));
    let m = run_mue_count_sweep(&cfg).unwrap();
    assert_eq!(m.points.len(), 2);
    assert!(m.points.iter().all(|p| p.mean_budget_balance.is_some()));
    let q = run_demand_sweep(&cfg).unwrap();
    assert_eq!(q.points.len(), 4);
    assert_eq!(q.points[0].scenario, Scenario::SingleMue);
    assert_eq!(q.points[3].num_mues, 10);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small(6);
    let a = run_density_sweep(&cfg).unwrap();
    let b = run_density_sweep(&cfg).unwrap();
    assert_eq!(a.records_csv().unwrap(), b.records_csv().unwrap());
    assert_eq!(a.summaries_csv().unwrap(), b.summaries_csv().unwrap());
    let header = a.records_csv().unwrap().lines().next().unwrap().to_string();
    assert!(header.starts_with("schema,experiment,point,round,seed,scenario"));
    assert!(a.records_csv().unwrap().lines().nth(1).unwrap().starts_with(RECORDS_SCHEMA));
}

#[test]
fn empty_record_sets_are_rejected() {
    assert!(records_csv(&[]).is_err());
    assert!(summaries_csv(&[]).is_err());
}
