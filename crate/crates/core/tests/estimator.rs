mod common;

use common::rng;
use nfirs::channel::{self, PathParams};
use nfirs::estimator::{self, Codebooks, CorrelationMetric};
use nfirs::harness::metrics::aligned;
use nfirs::measurement::{self, add_noise};
use nfirs::tensor::khatri_rao;
use nfirs::{linalg, CMat, CVec, ScenarioConfig, C64};
use proptest::prelude::*;

fn on_grid_case(seed: u64, paths: usize) -> (ScenarioConfig, Codebooks, Vec<PathParams>, measurement::TrainingOperators) {
    let cfg = ScenarioConfig { paths, ..ScenarioConfig::default() };
    let books = Codebooks::from_config(&cfg);
    let truth = books.sample_on_grid_paths(&cfg, &mut rng(seed));
    let ops = measurement::make_training_operators(&cfg, &cfg.link, seed + 1000);
    (cfg, books, truth, ops)
}

#[test]
fn noiseless_on_grid_recovery() {
    for seed in 0..5 {
        let (cfg, books, truth, ops) = on_grid_case(seed, 4);
        let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
        let est = estimator::estimate_tensor(&y, &ops, &cfg, &books).unwrap();
        let m = aligned(&truth, &est.paths).unwrap();
        for (t, e) in truth.iter().zip(&m) {
            assert!((t.delay() - e.delay).abs() <= 1e-8 * t.delay(), "delay {} vs {}", t.delay(), e.delay);
            assert_eq!((t.theta, t.phi, t.psi), (e.theta, e.phi, e.psi));
            assert!((t.gain - e.gain).norm() <= 1e-6 * t.gain.norm());
            assert_eq!(e.distance, e.delay * nfirs::SPEED_OF_LIGHT);
        }
    }
}

#[test]
fn singular_spectrum_and_subspace() {
    let (cfg, _, truth, ops) = on_grid_case(3, 4);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let svd = estimator::truncated_svd_mode1(&y, 4, &cfg).unwrap();
    let s = &svd.singular_values;
    assert!(s[4] <= 1e-10 * s[0]);
    let gram = svd.u.adjoint() * &svd.u;
    assert!((gram - CMat::identity(4, 4)).norm() < 1e-12);
    // principal angles between span(U) and span(C ⊙ B)
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    let kr = khatri_rao(&f.c, &f.b).unwrap();
    let q = kr.clone().qr().q();
    // sines of the principal angles are the singular values of (I - U U^H) Q
    let resid = &q - &svd.u * (svd.u.adjoint() * &q);
    for s in linalg::singular_values(&resid) {
        assert!(s.min(1.0).asin() <= 1e-8);
    }
}

#[test]
fn rank_deficiency_is_reported() {
    let (cfg, _, truth, ops) = on_grid_case(4, 2);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let err = estimator::truncated_svd_mode1(&y, 3, &cfg).unwrap_err();
    assert_eq!(err.kind(), "RankDeficient");
}

#[test]
fn shift_invariance_generators_and_rotation_invariance() {
    let (cfg, _, truth, ops) = on_grid_case(5, 4);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let svd = estimator::truncated_svd_mode1(&y, 4, &cfg).unwrap();
    let si = estimator::shift_invariance_evd(&svd.u, cfg.frames).unwrap();
    let mut want: Vec<C64> = truth.iter().map(|p| channel::delay_generator(p.delay(), &cfg)).collect();
    want.sort_by(|a, b| b.arg().total_cmp(&a.arg()));
    for (z, w) in si.z.iter().zip(&want) {
        assert!((z - w).norm() < 1e-8);
    }
    // U R for a unitary R gives the same eigenvalues
    let r = common::random_matrix(4, 4, &mut rng(9)).qr().q();
    let si2 = estimator::shift_invariance_evd(&(&svd.u * r), cfg.frames).unwrap();
    for (a, b) in si.z.iter().zip(&si2.z) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn single_path_evd_is_scalar() {
    let (cfg, _, truth, ops) = on_grid_case(6, 1);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let svd = estimator::truncated_svd_mode1(&y, 1, &cfg).unwrap();
    let si = estimator::shift_invariance_evd(&svd.u, cfg.frames).unwrap();
    assert_eq!(si.z.len(), 1);
    assert!((si.z[0].norm() - 1.0).abs() < 1e-8);
    assert!((si.z[0] - channel::delay_generator(truth[0].delay(), &cfg)).norm() < 1e-8);
    assert!(si.m[(0, 0)].norm() > 0.0);
}

#[test]
fn b_columns_collinear_with_truth_and_linear() {
    let (cfg, _, truth, ops) = on_grid_case(7, 3);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let svd = estimator::truncated_svd_mode1(&y, 3, &cfg).unwrap();
    let si = estimator::shift_invariance_evd(&svd.u, cfg.frames).unwrap();
    let c_hat = CMat::from_columns(
        &si.z.iter().map(|&z| estimator::vandermonde_column(z, cfg.subcarriers)).collect::<Vec<_>>(),
    );
    let b_hat = estimator::recover_b_columns(&svd.u, &si.m, &c_hat, cfg.frames);
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    for k in 0..3 {
        let best = (0..3)
            .map(|j| {
                let (x, y) = (b_hat.column(k), f.b.column(j));
                x.dotc(&y).norm() / (x.norm() * y.norm())
            })
            .fold(0.0, f64::max);
        assert!(best >= 1.0 - 1e-8);
    }
    let scaled = estimator::recover_b_columns(&svd.u, &(&si.m * C64::new(0.0, 2.0)), &c_hat, cfg.frames);
    assert!((scaled - &b_hat * C64::new(0.0, 2.0)).norm() < 1e-12 * b_hat.norm());
}

#[test]
fn recover_a_from_exact_factors() {
    let (cfg, _, truth, ops) = on_grid_case(8, 4);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    let y1 = y.unfold(1).unwrap();
    let a = estimator::recover_a(&y1, &f.c, &f.b).unwrap();
    assert!(common::rel_err(&a, &f.a) < 1e-8);

    // least squares: perturbations never lower the residual
    let noisy = &y1 + common::random_matrix(y1.nrows(), y1.ncols(), &mut rng(2)) * C64::from(0.1);
    let a_ls = estimator::recover_a(&noisy, &f.c, &f.b).unwrap();
    let kr = khatri_rao(&f.c, &f.b).unwrap();
    let resid = |a: &CMat| (noisy.transpose() - &kr * a.transpose()).norm();
    let base = resid(&a_ls);
    let mut r = rng(3);
    for _ in 0..10 {
        let pert = &a_ls + common::random_matrix(a_ls.nrows(), a_ls.ncols(), &mut r) * C64::from(1e-3);
        assert!(resid(&pert) >= base);
    }
}

#[test]
fn recover_a_single_path_is_matched_filter() {
    let (cfg, _, truth, ops) = on_grid_case(10, 1);
    let y1 = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap().unfold(1).unwrap();
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    let a = estimator::recover_a(&y1, &f.c, &f.b).unwrap();
    let cb = khatri_rao(&f.c, &f.b).unwrap();
    let mf = &y1 * cb.map(|z| z.conj()) / C64::from(cb.norm_squared());
    assert!(common::rel_err(&a, &mf) < 1e-12);
}

#[test]
fn singular_khatri_rao_is_reported() {
    let (cfg, _, truth, ops) = on_grid_case(11, 2);
    let y1 = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap().unfold(1).unwrap();
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    let mut c = f.c.clone();
    let first = c.column(0).into_owned();
    c.set_column(1, &first);
    let mut b = f.b.clone();
    let first = b.column(0).into_owned();
    b.set_column(1, &first);
    let err = estimator::recover_a(&y1, &c, &b).unwrap_err();
    assert_eq!(err.kind(), "SingularKhatriRao");
}

#[test]
fn gains_exact_zero_and_linear() {
    let (cfg, _, truth, ops) = on_grid_case(12, 3);
    let f = measurement::ground_truth_factors(&truth, &ops, &cfg);
    let b_bar = CMat::from_columns(
        &truth.iter().map(|p| ops.frame_response(&channel::ue_ff_response(p.psi, &cfg))).collect::<Vec<_>>(),
    );
    let solve = |paths: &[PathParams]| {
        let y2 = measurement::synthesize_noiseless(paths, &ops, &cfg).unwrap().unfold(2).unwrap();
        estimator::recover_gains(&y2, &f.a, &b_bar, &f.c).unwrap()
    };
    let (g, leak) = solve(&truth);
    for (p, gh) in truth.iter().zip(&g) {
        assert!((p.gain - gh).norm() <= 1e-6 * p.gain.norm());
    }
    assert!(leak < 1e-8);
    let doubled: Vec<PathParams> = truth.iter().map(|p| PathParams { gain: p.gain * 2.0, ..*p }).collect();
    let (g2, _) = solve(&doubled);
    for (a, b) in g.iter().zip(&g2) {
        assert!((a * 2.0 - b).norm() < 1e-10);
    }
    let zeroed: Vec<PathParams> = truth.iter().map(|p| PathParams { gain: C64::new(0.0, 0.0), ..*p }).collect();
    let (g0, _) = solve(&zeroed);
    assert!(g0.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn permuting_truth_leaves_estimates_unchanged() {
    let (cfg, books, truth, ops) = on_grid_case(13, 3);
    let y = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let mut rev = truth.clone();
    rev.reverse();
    let y2 = measurement::synthesize_noiseless(&rev, &ops, &cfg).unwrap();
    let a = estimator::estimate_tensor(&y, &ops, &cfg, &books).unwrap();
    let b = estimator::estimate_tensor(&y2, &ops, &cfg, &books).unwrap();
    for (x, y) in a.paths.iter().zip(&b.paths) {
        assert_eq!((x.theta, x.phi, x.psi), (y.theta, y.phi, y.psi));
        assert!((x.delay - y.delay).abs() < 1e-8 * x.delay);
        assert!((x.gain - y.gain).norm() < 1e-6 * x.gain.norm());
    }
}

#[test]
fn noisy_estimate_is_sane() {
    let cfg = ScenarioConfig::default();
    let books = Codebooks::from_config(&cfg);
    let mut r = rng(21);
    let truth = channel::sample_paths(&cfg, &mut r);
    let ops = measurement::make_training_operators(&cfg, &cfg.link, 22);
    let clean = measurement::synthesize_noiseless(&truth, &ops, &cfg).unwrap();
    let y = add_noise(&clean, ops, 30.0, 23);
    let est = estimator::estimate(&y, &cfg, &books).unwrap();
    let nmse = nfirs::harness::channel_nmse(&truth, &est.to_paths(), &cfg).unwrap();
    assert!(nmse.is_finite() && nmse < 1.0, "channel nmse {nmse}");
    assert!(est.diagnostics.irs_peaks.iter().all(|&p| p > 0.0 && p <= 1.0 + 1e-12));
}

fn brute_force_irs(a_hat: &CVec, u: f64, books: &Codebooks, ops: &measurement::TrainingOperators, cfg: &ScenarioConfig) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &th in &books.theta {
        for &ph in &books.phi {
            let x = &ops.v_tilde * channel::irs_response(th, ph, u, cfg);
            let num = a_hat.dotc(&x).norm_sqr();
            let s = match books.metric {
                CorrelationMetric::Normalized => num / (a_hat.norm_squared() * x.norm_squared()),
                CorrelationMetric::Unsquared => num / (a_hat.norm() * x.norm()),
            };
            if s > best.0 {
                best = (s, th, ph);
            }
        }
    }
    (best.1, best.2)
}

fn small_books_cfg() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.codebook.g_z = 24;
    cfg.codebook.g_y = 20;
    cfg.codebook.g_u = 64;
    cfg
}

#[test]
fn irs_search_on_grid_self_peak_and_scale_invariance() {
    let cfg = small_books_cfg();
    let books = Codebooks::from_config(&cfg);
    let ops = measurement::make_training_operators(&cfg, &cfg.link, 5);
    let (th, ph, u) = (books.theta[7], books.phi[11], 3.3);
    let a = &ops.v_tilde * channel::irs_response(th, ph, u, &cfg);
    let (t1, p1, peak) = estimator::search_irs_angles(&a, u, &books, &ops, &cfg);
    assert_eq!((t1, p1), (th, ph));
    assert!((peak.score - 1.0).abs() < 1e-12);
    let (t2, p2, _) = estimator::search_irs_angles(&(&a * C64::new(-0.3, 2.0)), u, &books, &ops, &cfg);
    assert_eq!((t2, p2), (th, ph));
}

#[test]
fn ue_search_on_grid_and_gain_invariance() {
    let cfg = small_books_cfg();
    let books = Codebooks::from_config(&cfg);
    let ops = measurement::make_training_operators(&cfg, &cfg.link, 6);
    let psi = books.psi[40];
    let b = ops.frame_response(&channel::ue_ff_response(psi, &cfg));
    assert_eq!(estimator::search_ue_angle(&b, &books, &ops.f, &cfg).0, psi);
    assert_eq!(estimator::search_ue_angle(&(&b * C64::new(0.1, -0.7)), &books, &ops.f, &cfg).0, psi);
}

#[test]
fn irs_search_ties_go_to_smallest_index() {
    // With a one-element IRS every grid point has the same score.
    let mut cfg = small_books_cfg();
    cfg.n_y = 1;
    cfg.n_z = 1;
    let books = Codebooks::from_config(&cfg);
    let ops = measurement::make_training_operators(&cfg, &cfg.link, 7);
    let a = ops.v_tilde.column(0).into_owned();
    let (th, ph, peak) = estimator::search_irs_angles(&a, 2.0, &books, &ops, &cfg);
    assert_eq!(peak.index, 0);
    assert_eq!((th, ph), (books.theta[0], books.phi[0]));
}

#[test]
fn unsquared_metric_also_matches_brute_force() {
    let mut cfg = small_books_cfg();
    cfg.codebook.metric = CorrelationMetric::Unsquared;
    let books = Codebooks::from_config(&cfg);
    let ops = measurement::make_training_operators(&cfg, &cfg.link, 8);
    let mut r = rng(4);
    for _ in 0..3 {
        let q = CVec::from_fn(cfg.slots, |_, _| channel::sample_unit_cn(&mut r));
        let (th, ph, _) = estimator::search_irs_angles(&q, 2.5, &books, &ops, &cfg);
        assert_eq!((th, ph), brute_force_irs(&q, 2.5, &books, &ops, &cfg));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn irs_search_equals_brute_force(seed in 0u64..10_000, u in 1.0f64..6.0) {
        let cfg = small_books_cfg();
        let books = Codebooks::from_config(&cfg);
        let ops = measurement::make_training_operators(&cfg, &cfg.link, seed);
        let mut r = rng(seed);
        let q = CVec::from_fn(cfg.slots, |_, _| channel::sample_unit_cn(&mut r));
        let (th, ph, _) = estimator::search_irs_angles(&q, u, &books, &ops, &cfg);
        prop_assert_eq!((th, ph), brute_force_irs(&q, u, &books, &ops, &cfg));
    }

    #[test]
    fn ue_search_scale_invariant(seed in 0u64..10_000, re in -3.0f64..3.0, im in 0.1f64..3.0) {
        let cfg = small_books_cfg();
        let books = Codebooks::from_config(&cfg);
        let ops = measurement::make_training_operators(&cfg, &cfg.link, seed);
        let mut r = rng(seed);
        let q = CVec::from_fn(cfg.frames, |_, _| channel::sample_unit_cn(&mut r));
        let a = estimator::search_ue_angle(&q, &books, &ops.f, &cfg).0;
        let b = estimator::search_ue_angle(&(&q * C64::new(re, im)), &books, &ops.f, &cfg).0;
        prop_assert_eq!(a, b);
    }
}

#[test]
fn pinv_of_transposed_kr_used_by_recover_a_is_left_inverse() {
    let mut r = rng(31);
    let c = common::random_matrix(5, 3, &mut r);
    let b = common::random_matrix(4, 3, &mut r);
    let kr = khatri_rao(&c, &b).unwrap();
    let p = linalg::pinv(&kr.transpose());
    assert!((kr.transpose() * p - CMat::identity(3, 3)).norm() < 1e-12);
}
