use anticip_core::spectral::{cumulative_probability, in_tail};
use anticip_core::stats::{self, MomentTuple};
use anticip_core::{
    amplitudes_continuous_with, amplitudes_periodic, probabilities, SpectralDifferenceContinuous,
    SpectralDifferencePeriodic, TransformMode,
};
use proptest::prelude::*;

fn differences(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 2..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_total_equals_mean_square(values in differences(300)) {
        let mean_sq = values.iter().map(|y| y * y).sum::<f64>() / values.len() as f64;
        let sd = SpectralDifferencePeriodic::new(values).unwrap();
        let probs = probabilities(&amplitudes_periodic(&sd, TransformMode::FastTransform));
        prop_assert!((probs.total() - mean_sq).abs() <= 1e-12);
        prop_assert!((cumulative_probability(&probs, 0).unwrap() - probs.total()).abs() <= 1e-15);
    }

    #[test]
    fn periodic_probabilities_are_mirror_symmetric(values in differences(200)) {
        let p = values.len() as i64;
        let sd = SpectralDifferencePeriodic::new(values).unwrap();
        let probs = probabilities(&amplitudes_periodic(&sd, TransformMode::FastTransform));
        for n in 1..=p {
            let a = probs.get(n).unwrap();
            let b = probs.get(p + 1 - n).unwrap();
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn transform_modes_agree(values in differences(128)) {
        let sd = SpectralDifferencePeriodic::new(values.clone()).unwrap();
        let fast = amplitudes_periodic(&sd, TransformMode::FastTransform);
        let exact = amplitudes_periodic(&sd, TransformMode::ExactSum);
        for ((_, a), (_, b)) in fast.iter().zip(exact.iter()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
        let sd = SpectralDifferenceContinuous::new(values).unwrap();
        let fast = amplitudes_continuous_with(&sd, -40, 40, TransformMode::FastTransform).unwrap();
        let exact = amplitudes_continuous_with(&sd, -40, 40, TransformMode::ExactSum).unwrap();
        for ((_, a), (_, b)) in fast.iter().zip(exact.iter()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn continuous_amplitudes_repeat_across_residues(values in differences(32), n in -50i64..50) {
        let m = values.len() as i64;
        let sd = SpectralDifferenceContinuous::new(values).unwrap();
        let amps = amplitudes_continuous_with(&sd, n, n + m, TransformMode::ExactSum).unwrap();
        // α_n (n - ½) e^{iπ(n-½)/M} / sin(π(n - ½)/M) depends on n mod M only
        let scaled = |k: i64| {
            let w = k as f64 - 0.5;
            let phase = num_complex::Complex64::from_polar(1.0, std::f64::consts::PI * w / m as f64);
            amps.get(k).unwrap() * w / (std::f64::consts::PI * w / m as f64).sin() * phase
        };
        prop_assert!((scaled(n) - scaled(n + m)).norm() <= 1e-9 * scaled(n).norm().max(1.0));
    }

    #[test]
    fn continuous_window_total_respects_tail_bound(values in differences(24), k in 1i64..400) {
        let sd = SpectralDifferenceContinuous::new(values).unwrap();
        let probs = probabilities(&amplitudes_continuous_with(&sd, 1 - k, k, TransformMode::FastTransform).unwrap());
        let exact = sd.total_probability();
        let missing = exact - probs.total();
        prop_assert!(missing >= -1e-12);
        prop_assert!(missing <= probs.tail_bound().unwrap() + 1e-12);
        let mean_sq = sd.values().iter().map(|y| y * y).sum::<f64>() / sd.cells() as f64;
        prop_assert!((exact - mean_sq).abs() <= 1e-12);
    }

    #[test]
    fn tail_windows_nest(p in 2usize..200, n in -500i64..500) {
        let origin = anticip_core::Origin::Periodic { period: p };
        for cut in 1..p.div_ceil(2) {
            if in_tail(origin, n, cut) {
                prop_assert!(in_tail(origin, n, cut - 1));
            }
        }
    }

    #[test]
    fn variance_formulas_are_nonnegative(
        m1 in -1.0f64..1.0,
        spread in 0.0f64..1.0,
        p in 2usize..300,
        n_frac in 0.0f64..1.0,
        cut_frac in 0.0f64..1.0,
    ) {
        // two-point law at m1 ± spread, clipped into [-1, 1]
        let a = (m1 - spread).max(-1.0);
        let b = (m1 + spread).min(1.0);
        let moment = |k: i32| 0.5 * (a.powi(k) + b.powi(k));
        let m = MomentTuple::new(moment(1), moment(2), moment(3), moment(4)).unwrap();
        let n = 1 + ((p - 1) as f64 * n_frac) as i64;
        let cut = ((p - 1) / 2) as f64 * cut_frac;
        prop_assert!(stats::var_pn(p, n, &m).unwrap() >= -1e-12);
        prop_assert!(stats::var_pN(p, cut as usize, &m).unwrap() >= -1e-12);
    }
}

#[test]
fn built_in_laws_have_nonnegative_variances_on_a_grid() {
    let laws = [
        MomentTuple::new(0.0, 1.0 / 3.0, 0.0, 0.2).unwrap(),
        MomentTuple::new(0.0, 1.0, 0.0, 1.0).unwrap(),
        MomentTuple::new(0.0, 0.25, 0.0, 0.0625).unwrap(),
        MomentTuple::new(0.5, 1.0, 0.5, 1.0).unwrap(),
        MomentTuple::point_mass(0.8),
    ];
    for m in &laws {
        for p in [2usize, 3, 4, 5, 16, 64, 101, 256, 1024] {
            for n in 1..=p as i64 {
                let v = stats::var_pn(p, n, m).unwrap();
                assert!(v >= -1e-12, "Var(p_{n}) = {v} at p = {p}, {m:?}");
            }
            for cut in 0..p.div_ceil(2) {
                let v = stats::var_pN(p, cut, m).unwrap();
                assert!(v >= -1e-12, "Var(p_N) = {v} at p = {p}, N = {cut}, {m:?}");
            }
        }
    }
}

#[test]
fn variance_of_p_n_is_order_inverse_p_squared_away_from_the_edges() {
    let m = MomentTuple::new(0.0, 1.0 / 3.0, 0.0, 0.2).unwrap();
    let mut scaled = Vec::new();
    for p in [64usize, 256, 1024] {
        let n = (p / 4) as i64;
        scaled.push(p as f64 * p as f64 * stats::var_pn(p, n, &m).unwrap());
    }
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 1.1, "{scaled:?}");
}
