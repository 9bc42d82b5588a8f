use super::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn macro_path_loss_examples() {
    assert_eq!(path_loss_macro(1.0).unwrap(), 17.39);
    assert!(close(path_loss_macro(10.0).unwrap(), 21.15, 1e-12));
    assert!(close(path_loss_macro(300.0).unwrap(), 26.703_975_917_745_93, 1e-12));
    assert!(path_loss_macro(0.0).is_err());
    assert!(path_loss_macro(-3.0).is_err());
    assert!(close(path_loss_macro_conventional(1000.0).unwrap(), 128.1, 1e-12));
}

#[test]
fn femto_path_loss_examples() {
    assert!(close(path_loss_femto(1.0).unwrap(), 39.16, 1e-12));
    assert!(close(path_loss_femto(10.0).unwrap(), 65.46, 1e-12));
    assert!(close(path_loss_femto(20.0).unwrap(), 78.480_599_913_279_6, 1e-12));
    assert!(path_loss_femto(0.0).is_err());
    assert!(path_loss_femto(f64::NAN).is_err());
}

#[test]
fn default_street_has_32_apartments() {
    let g = Geometry::default();
    let apts = g.apartments();
    assert_eq!(apts.len(), 32);
    assert_eq!(apts[0].min, Point::new(-120.0, 5.0));
    assert_eq!(apts[31].min, Point::new(105.0, -20.0));
    assert_eq!(g.macro_bs(), Point::new(0.0, 300.0));
}

#[test]
fn density_extremes() {
    let g = Geometry::default();
    for seed in 0..20 {
        assert!(generate_topology(&g, 0.0, 1, seed).unwrap().femtos.is_empty());
        let full = generate_topology(&g, 1.0, 1, seed).unwrap();
        assert_eq!(full.femtos.len(), 32);
        assert_eq!(full.fue_count(), 96);
    }
    assert!(generate_topology(&g, 1.5, 1, 0).is_err());
    assert!(generate_topology(&g, 0.5, 0, 0).is_err());
}

#[test]
fn half_density_averages_16_femtocells() {
    let g = Geometry::default();
    let n = 10_000;
    let total: usize = (0..n)
        .map(|seed| generate_topology(&g, 0.5, 1, seed).unwrap().femtos.len())
        .sum();
    let mean = total as f64 / n as f64;
    assert!((mean - 16.0).abs() < 0.5, "mean femtocell count {mean}");
}

#[test]
fn nodes_stay_in_place() {
    let g = Geometry::default();
    for seed in 0..50 {
        let t = generate_topology(&g, 0.7, 5, seed).unwrap();
        for f in &t.femtos {
            let apt = t.apartments[f.apartment];
            assert!(apt.contains(f.position));
            assert_eq!(f.fues.len(), 3);
            assert!(f.fues.iter().all(|p| apt.contains(*p)));
        }
        for m in &t.mues {
            assert_eq!(m.y, 0.0);
            assert!(m.x.abs() <= 120.0);
        }
        assert_eq!(t, generate_topology(&g, 0.7, 5, seed).unwrap());
    }
}

fn lone_femto(fue: Point) -> Topology {
    let femto = Femtocell {
        apartment: 0,
        position: Point::new(-112.5, 12.5),
        fues: vec![fue],
    };
    Topology::from_parts(Geometry::default(), vec![femto], vec![Point::new(-112.5, 0.0)]).unwrap()
}

#[test]
fn wall_counting() {
    let t = lone_femto(Point::new(-107.5, 12.5));
    let inside = Point::new(-112.5, 12.5);
    assert_eq!(t.walls_between(inside, Point::new(-107.5, 12.5)), 0);
    // out onto the road
    assert_eq!(t.walls_between(inside, Point::new(-112.5, 0.0)), 1);
    // into the neighbour: the shared wall counts once
    assert_eq!(t.walls_between(inside, Point::new(-100.0, 12.5)), 1);
    // through one full neighbour into the next
    assert_eq!(t.walls_between(inside, Point::new(-85.0, 12.5)), 2);
    // across the road into the opposite apartment
    assert_eq!(t.walls_between(inside, Point::new(-112.5, -12.5)), 2);
    // along the road outside every apartment
    assert_eq!(t.walls_between(Point::new(-100.0, 0.0), Point::new(100.0, 0.0)), 0);
}

#[test]
fn from_parts_rejects_misplaced_nodes() {
    let femto = Femtocell {
        apartment: 0,
        position: Point::new(0.0, 0.0),
        fues: vec![],
    };
    assert!(Topology::from_parts(Geometry::default(), vec![femto], vec![]).is_err());
}

#[test]
fn five_meter_link_budget() {
    let t = lone_femto(Point::new(-107.5, 12.5));
    let r = sample_round(&t, &ChannelParams::deterministic(), 0, 0).unwrap();
    // PL = 38.46 + 20 log10(5) + 3.5, noise = -174 + 10 log10(5e6 / 6) + 4
    let pl = 38.46 + 13.979_400_086_720_377 + 3.5;
    let noise = -174.0 + 59.208_187_539_523_75 + 4.0;
    let snr_db = -pl - noise;
    let rate = 5.0 / 6.0 * (1.0 + 10f64.powf(snr_db / 10.0)).log2();
    let link = &r.links[0];
    assert_eq!(link.kind, LinkKind::FemtoFue);
    assert_eq!(link.walls, 0);
    assert!(close(link.distance_m, 5.0, 1e-12));
    assert!(close(link.path_loss_db, pl, 1e-12));
    assert!(close(link.sinr_db, snr_db, 1e-12));
    assert!(close(r.fue_rates[0][0], rate, 1e-12));
    assert!(close(rate, 15.1847, 1e-5));
}

#[test]
fn walls_cost_exactly_their_loss() {
    let t = lone_femto(Point::new(-107.5, 12.5));
    let walled = sample_round(&t, &ChannelParams::deterministic(), 0, 0).unwrap();
    let open = sample_round(
        &t,
        &ChannelParams {
            wall_loss_db: 0.0,
            ..ChannelParams::deterministic()
        },
        0,
        0,
    )
    .unwrap();
    let mue_link = |r: &ChannelRealization| r.links.iter().find(|l| l.kind == LinkKind::FemtoMue).unwrap().sinr_db;
    assert_eq!(walled.links.iter().find(|l| l.kind == LinkKind::FemtoMue).unwrap().walls, 1);
    assert!(close(mue_link(&open) - mue_link(&walled), 10.0, 1e-12));
}

#[test]
fn silent_transmitter_gives_zero_rate() {
    let t = lone_femto(Point::new(-107.5, 12.5));
    let p = ChannelParams {
        femto_tx_power_dbm: f64::NEG_INFINITY,
        macro_tx_power_dbm: f64::NEG_INFINITY,
        ..ChannelParams::default()
    };
    let r = sample_round(&t, &p, 3, 9).unwrap();
    assert!(r.links.iter().all(|l| l.rate_mbps == 0.0));
}

#[test]
fn rate_falls_with_distance() {
    let femto = Femtocell {
        apartment: 0,
        position: Point::new(-112.5, 12.5),
        fues: vec![],
    };
    let mues: Vec<Point> = (0..40).map(|k| Point::new(-112.5 + 5.0 * k as f64, 0.0)).collect();
    let t = Topology::from_parts(Geometry::default(), vec![femto], mues).unwrap();
    let r = sample_round(&t, &ChannelParams::deterministic(), 0, 0).unwrap();
    let femto_rates: Vec<f64> = r.mue_femto_rates.iter().map(|row| row[0]).collect();
    assert!(femto_rates.windows(2).all(|w| w[1] < w[0]), "{femto_rates:?}");
    assert!(r.mue_macro_rates.iter().all(|r| *r > 0.0));
}

#[test]
fn only_co_channel_femtocells_interfere() {
    let g = Geometry::default();
    let full = generate_topology(&g, 1.0, 1, 4).unwrap();
    let p = ChannelParams::deterministic();
    let mut first_six = full.clone();
    first_six.femtos.truncate(6);
    let mut alone = full.clone();
    alone.femtos.truncate(1);
    let a = sample_round(&first_six, &p, 0, 0).unwrap();
    let b = sample_round(&alone, &p, 0, 0).unwrap();
    assert_eq!(a.fue_rates[0], b.fue_rates[0]);
    let c = sample_round(&full, &p, 0, 0).unwrap();
    assert!(c.fue_rates[0][0] < b.fue_rates[0][0]);
}

#[test]
fn rounds_are_reproducible() {
    let t = generate_topology(&Geometry::default(), 0.6, 4, 11).unwrap();
    let p = ChannelParams::default();
    let a = sample_round(&t, &p, 7, 99).unwrap();
    let b = sample_round(&t, &p, 7, 99).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_ne!(a.to_csv(), sample_round(&t, &p, 8, 99).unwrap().to_csv());
    assert!(a.to_csv().starts_with(REALIZATION_CSV_HEADER));
    assert!(a.links.iter().all(|l| l.rate_mbps >= 0.0 && l.rate_mbps.is_finite()));
}

#[test]
fn fading_statistics() {
    let n = 100_000;
    let draws = fading_samples(&ChannelParams::default(), 2024, n);
    let mean_s = draws.iter().map(|d| d.0).sum::<f64>() / n as f64;
    let var_s = draws.iter().map(|d| (d.0 - mean_s).powi(2)).sum::<f64>() / (n - 1) as f64;
    let mean_f = draws.iter().map(|d| d.1).sum::<f64>() / n as f64;
    assert!(mean_s.abs() < 0.1, "shadow mean {mean_s}");
    assert!((var_s.sqrt() / 8.0 - 1.0).abs() < 0.02, "shadow std {}", var_s.sqrt());
    assert!((mean_f - 1.0).abs() < 0.02, "fade mean {mean_f}");
}
