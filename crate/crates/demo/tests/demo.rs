use nfirs_demo::{correlation_map, irs_phase_pattern, rayleigh_distance_m, run_trial};

#[test]
fn phase_pattern_shape_and_reference() {
    let p = irs_phase_pattern(60.0, 20.0, 2.0, 16, 4);
    assert_eq!(p.len(), 64);
    assert_eq!(p[0], 0.0);
    assert!(p.iter().all(|x| x.abs() <= std::f64::consts::PI));
}

#[test]
fn far_scatterer_gives_linear_phase_rows() {
    // second differences of the unwrapped phase along a row vanish for a
    // planar wavefront
    let p = irs_phase_pattern(70.0, 30.0, 1e7, 16, 1);
    let wrap = |x: f64| (x + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    for w in p.windows(3) {
        assert!(wrap(w[2] - 2.0 * w[1] + w[0]).abs() < 1e-4);
    }
    let near = irs_phase_pattern(70.0, 30.0, 0.5, 16, 1);
    let curvature: f64 = near.windows(3).map(|w| wrap(w[2] - 2.0 * w[1] + w[0]).abs()).sum();
    assert!(curvature > 1e-3);
}

#[test]
fn correlation_peaks_at_truth_with_matched_distance() {
    let grid = 60;
    let map = correlation_map(72.0, -30.0, 1.5, 1.5, 8, 8, grid);
    assert_eq!(map.len(), grid * grid);
    assert!(map.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
    let (at, _) = map.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let th = 180.0 * ((at / grid) as f64 + 0.5) / grid as f64;
    let ph = 180.0 * ((at % grid) as f64 + 0.5) / grid as f64 - 90.0;
    assert!((th - 72.0).abs() <= 3.0 && (ph + 30.0).abs() <= 3.0, "{th} {ph}");
}

#[test]
fn rayleigh_distance_grows_with_aperture() {
    assert!(rayleigh_distance_m(64, 8) > rayleigh_distance_m(8, 8));
    assert_eq!(rayleigh_distance_m(1, 1), 0.0);
}

#[test]
fn trial_json_is_complete_and_deterministic() {
    let a = run_trial(25.0, 2, 3, 1.0, 6.0);
    assert_eq!(a, run_trial(25.0, 2, 3, 1.0, 6.0));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert!(v["error"].is_null(), "{a}");
    assert_eq!(v["truth"].as_array().unwrap().len(), 2);
    assert_eq!(v["estimate"].as_array().unwrap().len(), 2);
    assert!(v["channel_nmse_db"].as_f64().unwrap() < 0.0);
    assert!(v["delay_crlb_db"].as_f64().is_some());

    let noiseless: serde_json::Value = serde_json::from_str(&run_trial(f64::INFINITY, 1, 3, 1.0, 6.0)).unwrap();
    assert!(noiseless["channel_crlb_db"].is_null());

    let bad: serde_json::Value = serde_json::from_str(&run_trial(20.0, 2, 3, 6.0, 1.0)).unwrap();
    assert!(bad["error"].as_str().unwrap().starts_with("InvalidConfig"));
}
