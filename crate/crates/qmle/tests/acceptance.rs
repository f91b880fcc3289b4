//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (visible with `--nocapture`).
//!
//! Run with `cargo test -p qmle --test acceptance`.

use qmle::classfn::{self, BoundaryFamily, ClassFunction, DecayFunction, IntegrabilityVerdict, Verdict};
use qmle::expfam::{self, Exponential, GammaShape, Model};
use qmle::mle;
use qmle::montecarlo::{self, ExperimentConfig, ModelSpec};
use qmle::qsim::{self, ObservationWindow, StoppingRule};
use qmle::rng;

fn mm1_experiment(grid: Vec<f64>, replications: usize, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        arrival: ModelSpec {
            model: "exponential".into(),
            param: 1.0,
        },
        service: ModelSpec {
            model: "exponential".into(),
            param: 1.5,
        },
        rule: None,
        time_grid: Some(grid),
        replications,
        master_seed,
        class_functions: vec![],
        epsilon: DecayFunction::Power(0.4),
        series_constant: 1.0,
        stability_check: false,
    }
}

/// Draw a window under a pseudo-random rule and parameters, stream `id` of
/// `seed`. Returns the window plus the parameters used.
fn random_window(seed: u64, id: u64, gamma_arrivals: bool) -> (ObservationWindow, f64, f64) {
    use rand::Rng;
    let mut stream = rng::stream(seed, id);
    let theta = stream.random_range(0.4..3.0);
    let phi = stream.random_range(0.4..3.0);
    let rule = match stream.random_range(0..4u32) {
        0 => StoppingRule::FixedTime(stream.random_range(0.5..50.0)),
        1 => StoppingRule::FixedDepartures(stream.random_range(1..40)),
        2 => StoppingRule::FixedArrivals(stream.random_range(1..40)),
        _ => StoppingRule::FixedTransitions(stream.random_range(2..80)),
    };
    let arrival_gamma;
    let window = if gamma_arrivals {
        arrival_gamma = GammaShape::new(2.0).unwrap();
        qsim::simulate(&arrival_gamma, theta, &Exponential, phi, rule, &mut stream).unwrap()
    } else {
        qsim::simulate(&Exponential, theta, &Exponential, phi, rule, &mut stream).unwrap()
    };
    (window, theta, phi)
}

#[test]
fn acceptance_01_closed_form_mle_equivalence() {
    let start = std::time::Instant::now();
    let mut checked = 0u64;
    let mut id = 0u64;
    let mut max_dev: f64 = 0.0;
    while checked < 1000 {
        let (w, _, _) = random_window(101, id, false);
        id += 1;
        if w.arrivals.is_empty() || w.services.is_empty() {
            continue;
        }
        let a = w.arrivals.len() as f64;
        let d = w.services.len() as f64;
        let closed_theta = a / w.sum_arrivals();
        let closed_phi = d / w.sum_services();

        // Generic mean-map inversion, bypassing the closed-form hooks.
        let generic_theta =
            expfam::eta_inv_numeric(&Exponential, -w.sum_arrivals() / a).unwrap();
        let generic_phi = expfam::eta_inv_numeric(&Exponential, -w.sum_services() / d).unwrap();
        max_dev = max_dev
            .max((generic_theta - closed_theta).abs())
            .max((generic_phi - closed_phi).abs());
        assert!(
            (generic_theta - closed_theta).abs() <= 1e-10,
            "window {id}: generic {generic_theta} vs closed {closed_theta}"
        );
        assert!(
            (generic_phi - closed_phi).abs() <= 1e-10,
            "window {id}: generic {generic_phi} vs closed {closed_phi}"
        );

        // The estimator itself agrees with the closed forms as well.
        let fit = mle::estimate(&w, &Exponential, &Exponential, None).unwrap();
        assert!((fit.theta_hat - closed_theta).abs() <= 1e-10);
        assert!((fit.phi_hat - closed_phi).abs() <= 1e-10);
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 1 overshot its runtime budget: {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 1 (closed-form MLE equivalence): PASS — 1000 windows, max |Δ| = {max_dev:.2e}, {elapsed:?}"
    );
}

#[test]
fn acceptance_02_score_and_information_gradient_checks() {
    let start = std::time::Instant::now();
    let exponential = Exponential;
    let gamma = GammaShape::new(2.0).unwrap();
    let mut worst_score_rel: f64 = 0.0;
    let mut worst_info_rel: f64 = 0.0;
    for id in 0..100u64 {
        let gamma_arrivals = id % 2 == 1;
        let (w, theta, phi) = random_window(202, id, gamma_arrivals);
        let arrival: &dyn Model = if gamma_arrivals { &gamma } else { &exponential };
        let service: &dyn Model = &exponential;

        // Arrival side in θ, service side in φ.
        for side in 0..2 {
            let (param, score_analytic, info_analytic) = if side == 0 {
                (
                    theta,
                    mle::score(&w, arrival, theta).unwrap(),
                    mle::observed_info(&w, arrival, theta).unwrap(),
                )
            } else {
                (
                    phi,
                    mle::score_service(&w, service, phi).unwrap(),
                    mle::observed_info_service(&w, service, phi).unwrap(),
                )
            };
            let ll = |p: f64| {
                if side == 0 {
                    mle::loglik_approx(&w, arrival, service, p, phi).unwrap()
                } else {
                    mle::loglik_approx(&w, arrival, service, theta, p).unwrap()
                }
            };

            let step = 1e-5;
            let fd_score = (ll(param + step) - ll(param - step)) / (2.0 * step);
            let scale = score_analytic.abs().max(fd_score.abs()).max(1e-9);
            let score_rel = (fd_score - score_analytic).abs() / scale;
            worst_score_rel = worst_score_rel.max(score_rel);
            assert!(
                score_rel <= 1e-6,
                "window {id} side {side}: score rel err {score_rel:.2e}"
            );

            if info_analytic > 0.0 {
                let step2 = 1e-3 * param;
                let fd_info =
                    -(ll(param + step2) - 2.0 * ll(param) + ll(param - step2)) / (step2 * step2);
                let info_rel = (fd_info - info_analytic).abs() / info_analytic;
                worst_info_rel = worst_info_rel.max(info_rel);
                assert!(
                    info_rel <= 1e-6,
                    "window {id} side {side}: info rel err {info_rel:.2e}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0);
    println!(
        "ACCEPTANCE 2 (score/information gradient checks): PASS — 100 windows, worst score rel {worst_score_rel:.2e}, worst info rel {worst_info_rel:.2e}, {elapsed:?}"
    );
}

#[test]
fn acceptance_03_asymptotic_normality_with_rate() {
    let cfg = mm1_experiment(vec![200.0, 800.0, 3200.0], 2000, 303);
    let report = montecarlo::run_normality(&cfg).unwrap();
    let ks: Vec<f64> = report.rows.iter().map(|r| r.ks_theta).collect();
    for pair in ks.windows(2) {
        assert!(
            pair[1] <= pair[0],
            "KS distance must be nonincreasing in T: {ks:?}"
        );
    }
    let last = report.rows.last().unwrap();
    assert!(
        last.ks_theta <= 0.05,
        "KS at T=3200 is {}, above 0.05",
        last.ks_theta
    );
    let clt_bound = 3.0 / (last.n_used as f64).sqrt();
    assert!(
        last.mean_z_theta.abs() <= clt_bound,
        "z mean {} outside ±{clt_bound} at T=3200",
        last.mean_z_theta
    );
    for row in &report.rows {
        assert!(
            row.ks_theta <= row.bound_25x,
            "KS {} exceeds 25·T^(-1/5) = {} at T = {}",
            row.ks_theta,
            row.bound_25x,
            row.t
        );
    }
    println!(
        "ACCEPTANCE 3 (asymptotic normality with rate): PASS — KS = {:?} over T = [200, 800, 3200]",
        ks
    );
}

#[test]
fn acceptance_04_condition_c1_envelope() {
    let cfg = mm1_experiment(vec![250.0, 1000.0, 4000.0], 2000, 404);
    let report = montecarlo::run_condition_c1(&cfg).unwrap();
    for row in &report.rows {
        assert!(
            row.exceed_a <= row.eps_half + 2.0 * row.se_a,
            "arrival exceedance {} above envelope {} at T = {}",
            row.exceed_a,
            row.eps_half,
            row.t
        );
        assert!(
            row.exceed_d <= row.eps_half + 2.0 * row.se_d,
            "departure exceedance {} above envelope {} at T = {}",
            row.exceed_d,
            row.eps_half,
            row.t
        );
    }
    assert!(report.envelope_ok());
    let summary: Vec<(f64, f64, f64)> = report
        .rows
        .iter()
        .map(|r| (r.t, r.exceed_a, r.eps_half))
        .collect();
    println!(
        "ACCEPTANCE 4 (counting concentration envelope): PASS — (T, exceedance, envelope) = {summary:?}"
    );
}

#[test]
fn acceptance_05_c2_verdicts() {
    let start = std::time::Instant::now();
    let finite = classfn::condition_c2_check(|t| t.powf(-0.4), classfn::DEFAULT_T_MAX).unwrap();
    assert_eq!(finite.verdict, IntegrabilityVerdict::Finite, "{finite:?}");
    let infinite =
        classfn::condition_c2_check(|t| t.ln().ln().powi(-2), classfn::DEFAULT_T_MAX).unwrap();
    assert_eq!(
        infinite.verdict,
        IntegrabilityVerdict::Infinite,
        "{infinite:?}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0);
    println!(
        "ACCEPTANCE 5 (decay integrability verdicts): PASS — t^(-2/5) Finite, (loglog t)^(-2) Infinite, {elapsed:?}"
    );
}

#[test]
fn acceptance_06_integral_test_classifier() {
    let start = std::time::Instant::now();
    let classify = |family: BoundaryFamily| {
        classfn::integral_test(
            &ClassFunction::new(family),
            classfn::DEFAULT_T_MAX,
            classfn::DEFAULT_MARGIN,
        )
        .unwrap()
        .verdict
    };
    for c in [1.2, 1.5, 2.0] {
        assert_eq!(
            classify(BoundaryFamily::ScaledLil(c)),
            Verdict::Upper,
            "scaled_lil({c})"
        );
    }
    for c in [0.6, 0.8] {
        assert_eq!(
            classify(BoundaryFamily::ScaledLil(c)),
            Verdict::Lower,
            "scaled_lil({c})"
        );
    }
    assert_eq!(classify(BoundaryFamily::PowerLogLog(2.0)), Verdict::Upper);
    assert_eq!(classify(BoundaryFamily::PowerLogLog(1.0)), Verdict::Lower);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0);
    println!(
        "ACCEPTANCE 6 (integral-test classifier vs analytic oracle): PASS — 7 boundaries, {elapsed:?}"
    );
}

#[test]
fn acceptance_07_crossing_dichotomy_direction() {
    // Seven geometric checkpoints from 1e2 to 1e5.
    let grid: Vec<f64> = (0..7).map(|k| 10f64.powf(2.0 + k as f64 * 0.5)).collect();
    let mut cfg = mm1_experiment(grid, 500, 707);
    cfg.class_functions = vec![
        ClassFunction::new(BoundaryFamily::ScaledLil(0.5)),
        ClassFunction::new(BoundaryFamily::ScaledLil(1.5)),
    ];
    let report = montecarlo::run_crossings(&cfg).unwrap();
    let low = &report.boundaries[0];
    let high = &report.boundaries[1];
    assert_eq!(low.verdict, Some(Verdict::Lower));
    assert_eq!(high.verdict, Some(Verdict::Upper));
    for (lf, hf) in low.tail_fractions.iter().zip(&high.tail_fractions) {
        assert!(
            lf.2 > hf.2,
            "tail index {}: low-boundary fraction {} not above high-boundary {}",
            lf.0,
            lf.2,
            hf.2
        );
    }
    let last_high = high.tail_fractions.last().unwrap().2;
    assert!(
        last_high <= 0.1,
        "upper boundary crossed too often at the last tail index: {last_high}"
    );
    let lows: Vec<f64> = low.tail_fractions.iter().map(|f| f.2).collect();
    let highs: Vec<f64> = high.tail_fractions.iter().map(|f| f.2).collect();
    println!(
        "ACCEPTANCE 7 (crossing dichotomy direction): PASS — tails low = {lows:?}, high = {highs:?}"
    );
}

#[test]
fn acceptance_08_consistency_rate() {
    let cfg = mm1_experiment(vec![100.0, 400.0, 1600.0, 6400.0], 2000, 808);
    let report = montecarlo::run_consistency(&cfg).unwrap();
    // Errors shrink monotonically along the grid.
    for pair in report.rows.windows(2) {
        assert!(
            pair[1].mae_theta < pair[0].mae_theta,
            "MAE must decrease: {} -> {}",
            pair[0].mae_theta,
            pair[1].mae_theta
        );
    }
    for row in report.rows.iter().filter(|r| r.t >= 400.0) {
        if let Some(ratio) = row.ratio_theta {
            assert!(
                (0.4..=0.6).contains(&ratio),
                "MAE(4T)/MAE(T) = {ratio} at T = {} outside [0.4, 0.6]",
                row.t
            );
        }
    }
    let ratios: Vec<Option<f64>> = report.rows.iter().map(|r| r.ratio_theta).collect();
    println!("ACCEPTANCE 8 (consistency rate): PASS — MAE ratios = {ratios:?}");
}

#[test]
fn acceptance_09_observation_window_invariants() {
    let start = std::time::Instant::now();
    for id in 0..10_000u64 {
        let (w, theta, phi) = random_window(909, id, id % 7 == 0);
        w.validate().expect("window invariants violated");
        let tol = 1e-9 * w.t.max(1.0);
        assert!(w.sum_arrivals() <= w.t + tol, "Σu > T");
        assert!(w.idle + w.sum_services() <= w.t + tol, "γ + Σv > T");
        assert!(w.d_count <= w.a_count + 1, "D > A + 1");
        let _ = (theta, phi);
    }

    // Rule identities, pinned per rule on a second pass.
    for id in 0..2_500u64 {
        use rand::Rng;
        let mut stream = rng::stream(919, id);
        let theta = stream.random_range(0.4..3.0);
        let phi = stream.random_range(0.4..3.0);
        let m = stream.random_range(1..40u64);
        let d = stream.random_range(1..40u64);
        let n = stream.random_range(2..80u64);

        let w = qsim::simulate(
            &Exponential,
            theta,
            &Exponential,
            phi,
            StoppingRule::FixedArrivals(m),
            &mut stream,
        )
        .unwrap();
        assert_eq!(w.a_count, m);
        assert!((w.t - w.sum_arrivals()).abs() <= 1e-12 * w.t.max(1.0), "T ≠ Σu under the arrival rule");

        let w = qsim::simulate(
            &Exponential,
            theta,
            &Exponential,
            phi,
            StoppingRule::FixedDepartures(d),
            &mut stream,
        )
        .unwrap();
        assert_eq!(w.d_count, d);
        assert!((w.t - (w.idle + w.sum_services())).abs() <= 1e-9 * w.t.max(1.0));

        let w = qsim::simulate(
            &Exponential,
            theta,
            &Exponential,
            phi,
            StoppingRule::FixedTransitions(n),
            &mut stream,
        )
        .unwrap();
        assert_eq!(w.a_count + w.d_count, n, "A + D ≠ n under the transition rule");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?}");
    println!(
        "ACCEPTANCE 9 (window invariant suite): PASS — 10000 random windows plus 7500 rule-pinned windows, zero violations, {elapsed:?}"
    );
}

#[test]
fn acceptance_10_determinism_across_parallelism() {
    let run = |threads: usize, cfg: &ExperimentConfig, which: &str| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| match which {
            "normality" => {
                let r = montecarlo::run_normality(cfg).unwrap();
                vec![r.to_csv(), serde_json::to_string(&r).unwrap()]
            }
            "c1check" => {
                let r = montecarlo::run_condition_c1(cfg).unwrap();
                vec![r.to_csv(), serde_json::to_string(&r).unwrap()]
            }
            "crossings" => {
                let r = montecarlo::run_crossings(cfg).unwrap();
                vec![
                    r.freqs_csv(),
                    r.tails_csv(),
                    serde_json::to_string(&r).unwrap(),
                ]
            }
            "consistency" => {
                let r = montecarlo::run_consistency(cfg).unwrap();
                vec![r.to_csv(), serde_json::to_string(&r).unwrap()]
            }
            _ => unreachable!(),
        })
    };

    let mut crossing_cfg = mm1_experiment(vec![25.0, 50.0, 100.0, 200.0, 400.0, 800.0], 500, 111);
    crossing_cfg.class_functions = vec![
        ClassFunction::new(BoundaryFamily::ScaledLil(0.5)),
        ClassFunction::new(BoundaryFamily::ScaledLil(1.5)),
    ];
    let cases: Vec<(&str, ExperimentConfig)> = vec![
        ("normality", mm1_experiment(vec![50.0, 100.0], 200, 110)),
        ("c1check", mm1_experiment(vec![50.0, 100.0], 500, 110)),
        ("crossings", crossing_cfg),
        ("consistency", mm1_experiment(vec![25.0, 100.0, 400.0], 500, 112)),
    ];
    for (which, cfg) in &cases {
        let single = run(1, cfg, which);
        let multi = run(4, cfg, which);
        let multi_again = run(4, cfg, which);
        assert_eq!(single, multi, "{which}: 1 vs 4 threads differ");
        assert_eq!(multi, multi_again, "{which}: rerun differs");
    }
    println!(
        "ACCEPTANCE 10 (determinism across parallelism): PASS — 4 experiments bit-identical at 1 and 4 threads"
    );
}
