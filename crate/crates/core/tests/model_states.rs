use std::f64::consts::PI;

use anticip_core::spectral::cumulative_probability;
use anticip_core::{
    amplitudes_continuous_with, amplitudes_periodic, closed_form_pn, make_model, moment_observable,
    probabilities, tilde_index, ModelKind, ModelSpec, Period, SpectralDifference,
    SpectralDifferenceContinuous, SpectralDifferencePeriodic, TransformMode,
};

fn periodic(kind: ModelKind, p: usize, y: f64) -> SpectralDifferencePeriodic {
    match make_model(&ModelSpec::new(kind, p, y).unwrap()).unwrap() {
        SpectralDifference::Periodic(sd) => sd,
        other => panic!("{other:?}"),
    }
}

fn continuous(kind: ModelKind, m: usize, y: f64) -> SpectralDifferenceContinuous {
    match make_model(&ModelSpec::new(kind, m, y).unwrap()).unwrap() {
        SpectralDifference::Continuous(sd) => sd,
        other => panic!("{other:?}"),
    }
}

#[test]
fn periodic_pipeline_matches_closed_forms_up_to_4096() {
    for kind in [ModelKind::ConstPeriodic, ModelKind::AltPeriodic] {
        for e in 1..=12 {
            let p = 1usize << e;
            let spec = ModelSpec::new(kind, p, 0.9).unwrap();
            let probs = probabilities(&amplitudes_periodic(&periodic(kind, p, 0.9), TransformMode::FastTransform));
            for (n, pn) in probs.iter() {
                let want = closed_form_pn(&spec, n).unwrap();
                assert!((pn - want).abs() <= 1e-10 * want, "{kind} p={p} n={n}: {pn} vs {want}");
            }
            assert!((probs.total() - 0.81).abs() <= 1e-10);
        }
    }
    // odd periods exercise the special index 2n - 1 ≡ 0 (mod p)
    for p in [3usize, 5, 7, 99, 1001] {
        let spec = ModelSpec::new(ModelKind::ConstPeriodic, p, 1.0).unwrap();
        let probs = probabilities(&amplitudes_periodic(&periodic(ModelKind::ConstPeriodic, p, 1.0), TransformMode::ExactSum));
        let mid = (p as i64 + 1) / 2;
        assert!((probs.get(mid).unwrap() - 1.0 / (p * p) as f64).abs() < 1e-15);
        for (n, pn) in probs.iter() {
            let want = closed_form_pn(&spec, n).unwrap();
            assert!((pn - want).abs() <= 1e-10 * want);
        }
    }
}

#[test]
fn continuous_pipeline_matches_closed_forms_up_to_1024_cells() {
    for kind in [ModelKind::ConstContinuous, ModelKind::AltContinuous] {
        for e in 1..=10 {
            let m = 1usize << e;
            let spec = ModelSpec::new(kind, m, -0.7).unwrap();
            let sd = continuous(kind, m, -0.7);
            let k = 4 * m as i64;
            let probs = probabilities(&amplitudes_continuous_with(&sd, 1 - k, k, TransformMode::FastTransform).unwrap());
            for (n, pn) in probs.iter() {
                let want = closed_form_pn(&spec, n).unwrap();
                assert!((pn - want).abs() <= 1e-10 * want, "{kind} M={m} n={n}: {pn} vs {want}");
            }
            let missing = 0.49 - probs.total();
            assert!(missing >= -1e-12 && missing <= probs.tail_bound().unwrap(), "{kind} M={m}");
            assert!((sd.total_probability() - 0.49).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_model_extremes() {
    for p in [4usize, 5, 16, 33] {
        let probs = probabilities(&amplitudes_periodic(&periodic(ModelKind::ConstPeriodic, p, 1.0), TransformMode::FastTransform));
        let (argmax, _) = probs.iter().fold((0, f64::MIN), |b, (n, v)| if v > b.1 { (n, v) } else { b });
        let (argmin, _) = probs.iter().fold((0, f64::MAX), |b, (n, v)| if v < b.1 { (n, v) } else { b });
        assert!(tilde_index(argmax, Period::Finite(p)) <= 1, "p={p}");
        assert_eq!(tilde_index(argmin, Period::Finite(p)), p.div_ceil(2) as u64, "p={p}");
    }
    for p in [4usize, 16, 64] {
        let probs = probabilities(&amplitudes_periodic(&periodic(ModelKind::AltPeriodic, p, 1.0), TransformMode::FastTransform));
        let (argmax, _) = probs.iter().fold((0, f64::MIN), |b, (n, v)| if v > b.1 { (n, v) } else { b });
        let (argmin, _) = probs.iter().fold((0, f64::MAX), |b, (n, v)| if v < b.1 { (n, v) } else { b });
        assert_eq!(tilde_index(argmax, Period::Finite(p)), (p / 2) as u64, "p={p}");
        assert!(tilde_index(argmin, Period::Finite(p)) <= 1, "p={p}");
    }
}

#[test]
fn constant_model_maximum_approaches_four_over_pi_squared() {
    let spec = ModelSpec::new(ModelKind::ConstPeriodic, 4096, 1.0).unwrap();
    assert!((closed_form_pn(&spec, 1).unwrap() - 4.0 / (PI * PI)).abs() < 1e-6);
}

#[test]
fn constant_model_tail_decays_like_inverse_cut() {
    let p = 4096;
    let probs = probabilities(&amplitudes_periodic(&periodic(ModelKind::ConstPeriodic, p, 1.0), TransformMode::FastTransform));
    let scaled: Vec<f64> = (1..=p / 4)
        .map(|cut| cut as f64 * cumulative_probability(&probs, cut).unwrap())
        .collect();
    let max = scaled.iter().copied().fold(0.0, f64::max);
    // N p_N stays below 2/π² plus the finite-N correction
    assert!(max < 0.25, "{max}");
    assert!(scaled.iter().all(|&x| x > 0.1));
}

#[test]
fn constant_model_mean_distance_grows_logarithmically() {
    // ⟨ñ⟩ - (2/π²) ln p converges
    let mut offsets = Vec::new();
    for e in [8u32, 10, 12, 14] {
        let p = 1usize << e;
        let probs = probabilities(&amplitudes_periodic(&periodic(ModelKind::ConstPeriodic, p, 1.0), TransformMode::FastTransform));
        let mean = moment_observable(&probs, 1.0).value;
        offsets.push(mean - 2.0 / (PI * PI) * (p as f64).ln());
    }
    let steps: Vec<f64> = offsets.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(steps.windows(2).all(|w| w[1] < w[0]), "{offsets:?}");
    assert!(steps[steps.len() - 1] < 1e-3, "{offsets:?}");
    // a unit coefficient on ln p would leave a drift of about (1 - 2/π²) ln 4 per step
    assert!(steps[0] < 0.1 * (1.0 - 2.0 / (PI * PI)) * 4f64.ln());
}

#[test]
fn alternating_continuous_peak_sits_at_half_the_cells() {
    let mut gaps = Vec::new();
    for m in [4usize, 16, 64, 256, 4096] {
        let spec = ModelSpec::new(ModelKind::AltContinuous, m, 1.0).unwrap();
        let (argmax, max) = (1..=2 * m as i64)
            .map(|n| (n, closed_form_pn(&spec, n).unwrap()))
            .fold((0, f64::MIN), |b, x| if x.1 > b.1 { x } else { b });
        assert_eq!(argmax, m as i64 / 2, "M={m}");
        gaps.push((max - 16.0 / PI.powi(4)).abs());
    }
    // the gap shrinks like 1/M
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[gaps.len() - 1] < 1e-4, "{gaps:?}");
}

#[test]
fn continuous_probabilities_mirror_about_one_half() {
    for kind in [ModelKind::ConstContinuous, ModelKind::AltContinuous] {
        let sd = continuous(kind, 8, 0.6);
        let probs = probabilities(&amplitudes_continuous_with(&sd, -60, 61, TransformMode::ExactSum).unwrap());
        for n in -60..=61 {
            assert!((probs.get(n).unwrap() - probs.get(1 - n).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn transform_modes_agree_at_sixteen_thousand() {
    let p = 1 << 14;
    let values: Vec<f64> = (0..p).map(|k| ((k * 7919 % 2003) as f64 / 1001.0) - 1.0).collect();
    let sd = SpectralDifferencePeriodic::new(values).unwrap();
    let fast = amplitudes_periodic(&sd, TransformMode::FastTransform);
    let exact = amplitudes_periodic(&sd, TransformMode::ExactSum);
    let worst = fast
        .iter()
        .zip(exact.iter())
        .map(|((_, a), (_, b))| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-12, "{worst}");
}
