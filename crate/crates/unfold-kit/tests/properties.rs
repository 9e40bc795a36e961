use proptest::prelude::*;

use unfold_kit::bench::{
    draw_noise, run_experiment, sweep_from_str, sweep_to_string, Algorithm, ExperimentConfig, MseReport,
    MseRow, NoiseKind, NoiseLevel, NoiseModel,
};
use unfold_kit::io::{signal_from_bytes, signal_from_csv_str, signal_to_bytes, signal_to_csv_string};
use unfold_kit::ops::{apply_modulo, apply_operator, fold_count, invert_in_range};
use unfold_kit::signal::{
    check_edge_decay, compute_support_bound, normalize_peak, synthesize_sum_of_sincs,
};
use unfold_kit::spectral::{partial_dtft, project_support, GramOperator};
use unfold_kit::{
    b2r2_recover, pgd_residual, FrequencyBand, OperatorKind, OperatorSpec, PgdConfig, SampledSignal,
    SamplingGrid, SupportConstraint, SynthesisConfig,
};

const DYADIC_LAMBDAS: [f64; 4] = [0.125, 0.25, 0.5, 1.0];

fn signal(of: f64, length: usize, num_sincs: usize, seed: u64) -> SampledSignal {
    let g = SamplingGrid::from_oversampling(of, length).unwrap();
    synthesize_sum_of_sincs(&SynthesisConfig::new(g, num_sincs, seed)).unwrap()
}

fn kind() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Clip),
        Just(OperatorKind::Modulo),
        Just(OperatorKind::MulawModulo)
    ]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn modulo_is_periodic_on_dyadic_grids(
        m in -(1i64 << 26)..(1i64 << 26),
        k in -1000i64..1000,
        li in 0usize..4,
    ) {
        let lambda = DYADIC_LAMBDAS[li];
        let x = m as f64 / (1u64 << 20) as f64;
        let shifted = x + 2.0 * lambda * k as f64;
        prop_assert_eq!(apply_modulo(shifted, lambda).unwrap(), apply_modulo(x, lambda).unwrap());
    }

    #[test]
    fn modulo_residual_is_a_whole_number_of_periods(x in -1e3f64..1e3, lambda in 0.01f64..2.0) {
        let y = apply_modulo(x, lambda).unwrap();
        prop_assert!((-lambda..lambda).contains(&y));
        let k = fold_count(x, lambda);
        prop_assert!((x - y - 2.0 * lambda * k as f64).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
    }

    #[test]
    fn operator_output_stays_in_range(x in -50f64..50.0, lambda in 0.01f64..2.0, k in kind()) {
        let op = OperatorSpec::from_kind(k, lambda, 255.0).unwrap();
        let y = op.apply(x);
        prop_assert!(y.abs() <= lambda, "{y} escapes [-{lambda}, {lambda}]");
    }

    #[test]
    fn in_range_map_inverts(u in -1f64..=1.0, lambda in 0.01f64..2.0, mu in 1f64..1000.0, k in kind()) {
        let op = OperatorSpec::from_kind(k, lambda, mu).unwrap();
        let x = u * lambda;
        let back = invert_in_range(&op, op.compand(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-12, "{x} -> {back}");
    }

    #[test]
    fn bounded_noise_never_exceeds_sigma(sigma in 0f64..1.0, seed in any::<u64>(), len in 1usize..512) {
        let g = SamplingGrid::from_oversampling(2.0, len).unwrap();
        let folded = SampledSignal::zeros(g);
        let model = NoiseModel { kind: NoiseKind::BoundedUniform { sigma }, seed };
        let v = draw_noise(&folded, &model).unwrap();
        prop_assert_eq!(v.len(), len);
        prop_assert!(v.iter().all(|e| e.abs() <= sigma));
        prop_assert_eq!(v, draw_noise(&folded, &model).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_peak_is_idempotent(seed in any::<u64>(), of in 1.5f64..8.0, scale in 1e-3f64..1e3) {
        let s = signal(of, 128, 4, seed);
        prop_assert!((s.peak() - 1.0).abs() <= 1e-12);
        let scaled = s.with_values(s.values.iter().map(|v| v * scale).collect());
        let once = normalize_peak(&scaled).unwrap();
        prop_assert_eq!(normalize_peak(&once).unwrap(), once.clone());
        prop_assert!((once.peak() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn synthesized_signals_are_bandlimited(seed in any::<u64>(), of in 1.5f64..8.0, j in 1usize..16) {
        let s = signal(of, 256, j, seed);
        let gram = GramOperator::for_grid(&s.grid, FrequencyBand::for_grid(&s.grid, 1).unwrap()).unwrap();
        let leak = norm(&gram.apply(&s.values)).powi(2);
        prop_assert!(leak <= 1e-6 * s.energy(), "out-of-band fraction {}", leak / s.energy());
    }

    #[test]
    fn support_bound_shrinks_as_threshold_grows(seed in any::<u64>(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
        let s = signal(4.0, 256, 6, seed);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(compute_support_bound(&s, lo) >= compute_support_bound(&s, hi));
    }

    #[test]
    fn gram_is_a_self_adjoint_contraction(seed in any::<u64>(), of in 1.5f64..8.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = SamplingGrid::from_oversampling(of, 200).unwrap();
        let gram = GramOperator::for_grid(&g, FrequencyBand::for_grid(&g, 1).unwrap()).unwrap();
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hx = gram.apply(&x);
        let hy = gram.apply(&y);
        prop_assert!(norm(&hx) <= norm(&x) * (1.0 + 1e-12));
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        prop_assert!((dot(&hx, &y) - dot(&x, &hy)).abs() <= 1e-10 * norm(&x) * norm(&y));
        let hhx = gram.apply(&hx);
        prop_assert!(hhx.iter().zip(&hx).all(|(a, b)| (a - b).abs() <= 1e-10));
    }

    #[test]
    fn partial_dtft_is_linear(seed in any::<u64>(), alpha in -3f64..3.0, beta in -3f64..3.0) {
        let x = signal(3.0, 128, 5, seed);
        let y = signal(3.0, 128, 5, seed ^ 0x5555);
        let band = FrequencyBand::for_grid(&x.grid, 1).unwrap();
        let mix = x.with_values(x.values.iter().zip(&y.values).map(|(a, b)| alpha * a + beta * b).collect());
        let (fx, fy, fm) = (
            partial_dtft(&x, &band).unwrap(),
            partial_dtft(&y, &band).unwrap(),
            partial_dtft(&mix, &band).unwrap(),
        );
        for ((a, b), m) in fx.values.iter().zip(&fy.values).zip(&fm.values) {
            prop_assert!((a * alpha + b * beta - m).norm() <= 1e-11);
        }
    }

    #[test]
    fn support_projection_is_idempotent(seed in any::<u64>(), half in 0usize..80) {
        let s = signal(4.0, 128, 5, seed);
        let c = SupportConstraint::new(half);
        let once = project_support(&s, &c);
        prop_assert_eq!(project_support(&once, &c), once.clone());
        for (n, v) in s.grid.indices().zip(&once.values) {
            if n.unsigned_abs() as usize > half {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn file_formats_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..64), origin in -100i64..100) {
        let g = SamplingGrid::new(0.5, 1.25, values.len()).unwrap().with_origin(origin);
        let s = SampledSignal::new(g, values).unwrap();
        prop_assert_eq!(signal_from_csv_str(&signal_to_csv_string(&s)).unwrap(), s.clone());
        prop_assert_eq!(signal_from_bytes(&signal_to_bytes(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn sweep_csv_round_trips(rows in prop::collection::vec(
        (0usize..3, 0.01f64..1.0, 1f64..40.0, -400f64..100.0, 0f64..30.0, 1usize..1000, 0f64..=1.0),
        1..20,
    )) {
        let report = MseReport {
            rows: rows
                .into_iter()
                .map(|(a, lambda, of, mse_db, std, trials, fail_rate)| MseRow {
                    algorithm: ["b2r2", "hod", "vandermonde"][a].into(),
                    lambda,
                    of,
                    snr_db: f64::INFINITY,
                    mse_db,
                    mse_std_db: std,
                    trials,
                    fail_rate,
                })
                .collect(),
        };
        prop_assert_eq!(sweep_from_str(&sweep_to_string(&report).unwrap()).unwrap(), report);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The recovered signal differs from the folded samples by whole periods.
    #[test]
    fn modulo_recovery_stays_on_the_lattice(seed in any::<u64>(), of in 4f64..8.0, lambda in 0.2f64..0.6) {
        let s = signal(of, 128, 3, seed);
        prop_assume!(check_edge_decay(&s, lambda).is_ok());
        let op = OperatorSpec::modulo(lambda).unwrap();
        let folded = apply_operator(&s, &op);
        let n = compute_support_bound(&s, lambda);
        let r = b2r2_recover(&folded, &op, n, &PgdConfig::default()).unwrap();
        let folds = r.folds.unwrap();
        for ((x, y), k) in r.signal.values.iter().zip(&folded.values).zip(&folds) {
            let periods = (x - y) / (2.0 * lambda);
            prop_assert!((periods - *k as f64).abs() <= 1e-9, "{periods} vs {k}");
        }
        prop_assert_eq!(r.passes, n.max(1));
    }

    #[test]
    fn dyadic_thresholds_keep_the_lattice_bitwise(seed in any::<u64>(), li in 0usize..2) {
        let lambda = DYADIC_LAMBDAS[li + 1];
        let s = signal(6.0, 128, 3, seed);
        let op = OperatorSpec::modulo(lambda).unwrap();
        let folded = apply_operator(&s, &op);
        let n = compute_support_bound(&s, lambda).min(50);
        let r = b2r2_recover(&folded, &op, n, &PgdConfig::default()).unwrap();
        for ((x, y), k) in r.signal.values.iter().zip(&folded.values).zip(r.folds.unwrap()) {
            prop_assert_eq!(x - y, 2.0 * lambda * k as f64);
        }
    }

    #[test]
    fn pgd_cost_never_increases(seed in any::<u64>(), of in 2f64..8.0, half in 1usize..30) {
        let s = signal(of, 128, 4, seed);
        let op = OperatorSpec::modulo(0.3).unwrap();
        let folded = apply_operator(&s, &op);
        let band = FrequencyBand::for_grid(&s.grid, 1).unwrap();
        prop_assume!(2 * half < band.bin_count());
        let cfg = PgdConfig { record_trace: true, max_iters: 2000, ..PgdConfig::default() };
        let est = pgd_residual(&folded, &band, &SupportConstraint::new(half), &cfg).unwrap();
        for w in est.trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-300, "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn experiments_are_deterministic_and_sized() {
    let cfg = ExperimentConfig {
        lambdas: vec![0.25, 0.3],
        ofs: vec![4.0, 6.0],
        levels: vec![NoiseLevel::BoundedSnr(30.0), NoiseLevel::GaussianSnr(40.0)],
        algorithms: vec![Algorithm::B2r2, Algorithm::Hod],
        trials: 2,
        length: 256,
        seed: 99,
        ..ExperimentConfig::default()
    };
    let a = run_experiment(&cfg).unwrap();
    assert_eq!(a.rows.len(), cfg.cell_count());
    assert_eq!(a.rows.len(), 16);
    let parallel = run_experiment(&ExperimentConfig { jobs: 3, ..cfg.clone() }).unwrap();
    assert_eq!(sweep_to_string(&a).unwrap(), sweep_to_string(&parallel).unwrap());
    assert_eq!(a, run_experiment(&cfg).unwrap());
}
