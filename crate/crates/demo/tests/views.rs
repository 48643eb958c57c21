use lae_isac_demo::{beam_view, guarded_flight, target_track};

#[test]
fn pattern_peaks_toward_the_served_node() {
    let v = beam_view(8, [-100.0, 100.0, 80.0], [150.0, 20.0, 70.0], 1.0).unwrap();
    let best = v.pattern_db.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!((v.angles_deg[best] - v.target_aod_deg).abs() <= 1.0, "{} vs {}", v.angles_deg[best], v.target_aod_deg);
    assert_eq!(v.pattern_db.len(), 181);
    assert!(v.pattern_db.iter().all(|g| (-40.0..=0.0).contains(g)));
}

#[test]
fn more_sensing_power_raises_snr_and_lowers_rate() {
    let lo = beam_view(4, [-100.0, 100.0, 80.0], [-60.0, 100.0, 70.0], 0.1).unwrap();
    let hi = beam_view(4, [-100.0, 100.0, 80.0], [-60.0, 100.0, 70.0], 0.9).unwrap();
    assert!(hi.snr_db > lo.snr_db);
    assert!(hi.sum_rate < lo.sum_rate);
}

#[test]
fn track_is_repeatable_and_has_fixed_steps() {
    let a = target_track(5, 40, 0.9, 10.0, 10.0);
    let b = target_track(5, 40, 0.9, 10.0, 10.0);
    assert_eq!(a.points, b.points);
    assert_eq!(a.points.len(), 41);
    for w in a.points.windows(2) {
        let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt();
        assert!(d <= 10.0 + 1e-9);
    }
}

#[test]
fn guard_lands_every_uav() {
    for seed in 0..10 {
        let f = guarded_flight(seed, 4, true).unwrap();
        assert!(f.mission_ok.iter().all(|&ok| ok), "seed {seed}");
        assert_eq!(f.paths[0].len(), 41);
    }
    let misses: usize = (0..10).map(|s| guarded_flight(s, 4, false).unwrap().mission_ok.iter().filter(|ok| !**ok).count()).sum();
    assert!(misses > 0);
}
