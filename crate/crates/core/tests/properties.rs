use proptest::prelude::*;

use singlab::constructor::{ramp_step, sawtooth_closed_form, sawtooth_net, square_net, step_l2_error};
use singlab::estimators::{fit, EstimatorKind, FitConfig};
use singlab::funcgen::{gen_dataset, make_pieces, named_target};
use singlab::harness::fit_slope;
use singlab::network::{compose, parallel, Layer};
use singlab::{Activation, Network};

fn dense_net(widths: &[usize], weights: &[f64], act: Activation) -> Network {
    let mut it = weights.iter().copied().cycle();
    let layers = widths
        .windows(2)
        .map(|w| {
            let ws: Vec<f64> = (0..w[0] * w[1]).map(|_| it.next().unwrap()).collect();
            let b: Vec<f64> = (0..w[1]).map(|_| it.next().unwrap()).collect();
            Layer::from_dense(w[1], w[0], &ws, b).unwrap()
        })
        .collect();
    Network::new(layers, act).unwrap()
}

fn activation() -> impl Strategy<Value = Activation> {
    prop_oneof![
        Just(Activation::ReLU),
        (0.0f64..0.9).prop_map(|s| Activation::leaky(s).unwrap()),
        Just(Activation::Sigmoid),
        Just(Activation::SoftPlus),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_extensional(
        act in activation(),
        weights in prop::collection::vec(-2.0f64..2.0, 12..40),
        x in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let inner = dense_net(&[2, 4, 3], &weights, act);
        let outer = dense_net(&[3, 2, 1], &weights[3..], act);
        let c = compose(&outer, &inner).unwrap();
        let direct = outer.evaluate(&inner.evaluate(&x).unwrap()).unwrap()[0];
        prop_assert!((c.evaluate(&x).unwrap()[0] - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        prop_assert_eq!(c.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());

        // parallel branches share the input
        let p = parallel(&[&inner, &inner]).unwrap();
        let (a, b) = (p.evaluate(&x).unwrap(), inner.evaluate(&x).unwrap());
        for (u, v) in a.iter().zip(b.iter().chain(b.iter())) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn zeroing_a_parameter_never_increases_sparsity(
        weights in prop::collection::vec(-2.0f64..2.0, 21),
        idx in 0usize..21,
    ) {
        let net = dense_net(&[2, 5, 1], &weights, Activation::ReLU);
        let mut zeroed = weights.clone();
        zeroed[idx] = 0.0;
        let after = dense_net(&[2, 5, 1], &zeroed, Activation::ReLU);
        let (m0, m1) = (net.metrics(), after.metrics());
        prop_assert!(m1.sparsity <= m0.sparsity);
        let max = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        prop_assert_eq!(m0.magnitude, max);
    }

    #[test]
    fn sawtooth_is_exact(t in 1usize..9, slope in 0.0f64..0.9, x in 0.0f64..1.0) {
        let net = sawtooth_net(t, Activation::leaky(slope).unwrap()).unwrap();
        prop_assert!((net.eval1(&[x]).unwrap() - sawtooth_closed_form(t, x)).abs() <= 1e-12);
    }

    #[test]
    fn rebuilding_is_bit_identical(m in 1usize..9) {
        prop_assert_eq!(square_net(m, Activation::ReLU).unwrap(), square_net(m, Activation::ReLU).unwrap());
    }

    #[test]
    fn step_error_decreases_with_steepness(a in 1.0f64..200.0, factor in 1.0f64..4.0) {
        let e1 = step_l2_error(&ramp_step(a, Activation::ReLU).unwrap(), 1.0, 20_000);
        let e2 = step_l2_error(&ramp_step(a * factor, Activation::ReLU).unwrap(), 1.0, 20_000);
        prop_assert!(e2 <= e1 + 1e-12);
    }

    #[test]
    fn exactly_one_piece_claims_each_point(
        seed in 0u64..1000,
        j in 1usize..3,
        x in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let spec = make_pieces(seed, 1.0, 1.0, j, 1 << j, 2).unwrap();
        let total: f64 = (0..spec.num_pieces()).map(|m| spec.indicator(m, &x)).sum();
        prop_assert_eq!(total, 1.0);
    }

    #[test]
    fn slope_fit_recovers_power_laws(p in -2.0f64..0.0, c in 0.01f64..10.0) {
        let rows: Vec<(f64, f64)> = (6..12).map(|k| {
            let n = (1u64 << k) as f64;
            (n, c * n.powf(p))
        }).collect();
        let s = fit_slope(&rows).unwrap();
        prop_assert!((s.slope - p).abs() < 1e-10);
    }

    #[test]
    fn design_does_not_depend_on_noise(seed in 0u64..10_000, sigma in 0.0f64..1.0) {
        let f = named_target("rectangle").unwrap();
        let a = gen_dataset(&f, 32, sigma, seed, f.domain).unwrap();
        let b = gen_dataset(&f, 32, 0.3, seed, f.domain).unwrap();
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(a, gen_dataset(&f, 32, sigma, seed, f.domain).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_estimators_superpose(seed in 0u64..1000, c in -3.0f64..3.0) {
        let f = named_target("rectangle").unwrap();
        let data = gen_dataset(&f, 64, 0.1, seed, f.domain).unwrap();
        let noise = gen_dataset(&f, 64, 1.0, seed ^ 0x5eed, f.domain).unwrap().y;
        let mixed: Vec<f64> = data.y.iter().zip(&noise).map(|(a, b)| a + c * b).collect();
        let probe = [0.3, 0.7];
        for kind in [EstimatorKind::Wavelet, EstimatorKind::KernelRidge] {
            let cfg = FitConfig::default();
            let eval = |y: Vec<f64>| fit(kind, &data.with_y(y), &cfg, 0).unwrap().predict(&probe).unwrap();
            let lhs = eval(mixed.clone());
            let rhs = eval(data.y.clone()) + c * eval(noise.clone());
            prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "{:?}: {} vs {}", kind, lhs, rhs);
        }
    }
}
