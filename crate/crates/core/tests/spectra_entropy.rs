use nnichain::random::{item_rng, probability_vector, t_transform_mix};
use nnichain::spectra_entropy::{
    entropies_to_csv, example_state, finiteness_check, gibbs_entropy_bound, majorizes,
    rank_lower_bound, renyi_entropy, renyi_lower_bound, renyi_upper_bound, sequence_from_csv,
    sequence_to_csv, EntropyValue, ProbabilitySequence,
};
use nnichain::tensor_core::{schmidt_spectrum, truncation_error, SchmidtSpectrum};
use nnichain::Error;
use proptest::prelude::*;

fn power_law_spectrum(rate: f64, len: usize) -> SchmidtSpectrum {
    let raw: Vec<f64> = (1..=len).map(|k| (k as f64).powf(-rate)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    SchmidtSpectrum::new(1, raw.iter().map(|x| x / norm).collect()).unwrap()
}

fn closed_form_renyi(p: f64, j: usize, alpha: f64) -> f64 {
    ((1.0 - p).powf(alpha) + 2f64.powf((1.0 - alpha) * j as f64) * p.powf(alpha)).log2()
        / (1.0 - alpha)
}

#[test]
fn finiteness_decisions_on_power_laws() {
    let fast = finiteness_check(&power_law_spectrum(2.0, 64), 2.0, 1.0).unwrap();
    assert!(fast.finite);
    assert!((fast.fitted_rate - 2.0).abs() < 1e-9);
    let slow = finiteness_check(&power_law_spectrum(0.4, 64), 0.4, 1.0).unwrap();
    assert!(!slow.finite && !slow.hypothesis_finite);
    let rank_one = SchmidtSpectrum::new(1, vec![1.0]).unwrap();
    assert!(matches!(
        finiteness_check(&rank_one, 1.0, 1.0),
        Err(Error::InsufficientData(_))
    ));
}

/// `x = e^{−β}` solving the closed form `x/(1−x) − n x^n/(1−x^n) = E` by Newton.
fn geometric_beta(n: i32, energy: f64) -> f64 {
    let e = |x: f64| x / (1.0 - x) - n as f64 * x.powi(n) / (1.0 - x.powi(n));
    let mut x: f64 = 0.4;
    for _ in 0..100 {
        let h = 1e-7;
        let step = (e(x) - energy) / ((e(x + h) - e(x - h)) / (2.0 * h));
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    -x.ln()
}

#[test]
fn gibbs_linear_spectrum_matches_geometric_series() {
    let levels: Vec<f64> = (0..64).map(f64::from).collect();
    let g = gibbs_entropy_bound(&levels, 1.0).unwrap();
    let oracle = geometric_beta(64, 1.0);
    assert!((g.beta - oracle).abs() < 1e-6);
    assert!((g.beta - std::f64::consts::LN_2).abs() < 1e-6);
    assert!((g.bound - g.state.entropy_bits()).abs() < 1e-9);
    assert!((g.state.energy() - 1.0).abs() < 1e-12);
    assert!((g.state.partition_value() - 2.0).abs() < 1e-9);
}

#[test]
fn gibbs_two_level_matches_binary_entropy() {
    let delta = 3.0;
    let energy = 0.4 * delta;
    let g = gibbs_entropy_bound(&[0.0, delta], energy).unwrap();
    let occ: f64 = energy / delta;
    let h2 = -(occ * occ.log2() + (1.0 - occ) * (1.0 - occ).log2());
    assert!(g.bound >= h2 - 1e-12);
    assert!((g.bound - h2).abs() < 1e-9);
    let beta_exact = ((1.0 - occ) / occ).ln() / delta;
    assert!((g.beta - beta_exact).abs() < 1e-9);
}

#[test]
fn gibbs_zero_temperature_limit() {
    let levels: Vec<f64> = (0..16).map(f64::from).collect();
    let g = gibbs_entropy_bound(&levels, 1e-6).unwrap();
    assert!(g.beta > 10.0);
    assert!(g.bound < 1e-3);
}

#[test]
fn counterexample_state_small_case() {
    let s = example_state(2, 0.5).unwrap();
    let sp = schmidt_spectrum(&s, 1).unwrap();
    assert!((truncation_error(&sp, 1) - 0.5f64.sqrt()).abs() < 1e-12);
    let sp2 = schmidt_spectrum(&s, 2).unwrap();
    let got = renyi_entropy(&ProbabilitySequence::from_schmidt(&sp2), 0.5).unwrap();
    let expect = 2.0 * (2f64.powf(-0.5) + 2.0 * 2f64.powf(-0.5)).log2();
    assert!((expect - 2.16993).abs() < 1e-5);
    assert!((got.value - expect).abs() < 1e-9);
}

#[test]
fn counterexample_closed_form_all_cuts() {
    for d in 1..=3 {
        let p = 0.3;
        let s = example_state(d, p).unwrap();
        for j in 1..=d {
            let sp = schmidt_spectrum(&s, j).unwrap();
            let seq = ProbabilitySequence::from_schmidt(&sp);
            for alpha in [0.3, 0.5, 2.0] {
                let got = renyi_entropy(&seq, alpha).unwrap().value;
                assert!((got - closed_form_renyi(p, j, alpha)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = ProbabilitySequence::new(vec![0.5, 0.3, 0.2]).unwrap();
    let path = dir.path().join("p.csv");
    sequence_to_csv(&path, &p).unwrap();
    assert_eq!(sequence_from_csv(&path).unwrap(), p);
    let rows = vec![
        EntropyValue { alpha: 0.5, value: 1.25 },
        EntropyValue { alpha: 2.0, value: 0.75 },
    ];
    let epath = dir.path().join("e.csv");
    entropies_to_csv(&epath, &rows).unwrap();
    let text = std::fs::read_to_string(&epath).unwrap();
    assert!(text.starts_with("alpha,value_bits\n0.5,"));
}

#[test]
fn upper_bound_equals_entropy_of_flattened_head() {
    for k in 0..50 {
        let mut rng = item_rng(21, k);
        let p = ProbabilitySequence::new(probability_vector(&mut rng, 32)).unwrap();
        for r in 1..32 {
            let eps = p.tail(r);
            let head = (1.0 - eps) / r as f64;
            for alpha in [1.5, 2.0, 5.0] {
                // Rényi functional of the sub-normalized uniform head
                let flat = (r as f64 * head.powf(alpha)).log2() / (1.0 - alpha);
                let bound = renyi_upper_bound(eps, r, alpha).unwrap();
                assert!((bound - flat).abs() < 1e-9);
                let s = renyi_entropy(&p, alpha).unwrap().value;
                assert!(s <= bound + 1e-9);
            }
        }
    }
}

fn sequence_strategy() -> impl Strategy<Value = ProbabilitySequence> {
    (4usize..=64, any::<u64>()).prop_map(|(n, seed)| {
        ProbabilitySequence::new(probability_vector(&mut item_rng(seed, 0), n)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schur_concavity(a in sequence_strategy(), seed in any::<u64>()) {
        let b = ProbabilitySequence::new(
            t_transform_mix(&mut item_rng(seed, 1), a.values(), 20)
        ).unwrap();
        prop_assert!(majorizes(&a, &b));
        for alpha in [0.3, 0.7, 1.0, 2.0, 5.0] {
            let sa = renyi_entropy(&a, alpha).unwrap().value;
            let sb = renyi_entropy(&b, alpha).unwrap().value;
            prop_assert!(sa <= sb + 1e-9);
        }
    }

    #[test]
    fn max_entropy_bound(p in sequence_strategy()) {
        let cap = (p.support_size() as f64).log2();
        for alpha in [0.3, 0.7, 1.0, 2.0, 5.0] {
            prop_assert!(renyi_entropy(&p, alpha).unwrap().value <= cap + 1e-9);
            let u = ProbabilitySequence::uniform(p.support_size()).unwrap();
            prop_assert!((renyi_entropy(&u, alpha).unwrap().value - cap).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_in_alpha(p in sequence_strategy()) {
        let alphas = [0.2, 0.5, 0.9, 1.0, 1.1, 2.0, 3.0, 8.0];
        let vals: Vec<f64> = alphas.iter().map(|&a| renyi_entropy(&p, a).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn continuity_at_one(p in sequence_strategy()) {
        let s1 = renyi_entropy(&p, 1.0).unwrap().value;
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            prop_assert!((renyi_entropy(&p, a).unwrap().value - s1).abs() <= 1e-4);
        }
    }

    #[test]
    fn sandwich(p in sequence_strategy()) {
        for r in 2..p.values().len() {
            let eps = p.tail(r);
            if eps <= 0.0 {
                continue;
            }
            for alpha in [0.3, 0.5, 0.9] {
                let lb = renyi_lower_bound(eps, r, alpha).unwrap();
                prop_assert!(lb <= renyi_entropy(&p, alpha).unwrap().value + 1e-9);
            }
            for alpha in [1.5, 2.0, 5.0] {
                let ub = renyi_upper_bound(eps, r, alpha).unwrap();
                prop_assert!(renyi_entropy(&p, alpha).unwrap().value <= ub + 1e-9);
            }
        }
    }

    #[test]
    fn rank_bound_below_support(p in sequence_strategy()) {
        let s = renyi_entropy(&p, 1.0).unwrap().value;
        prop_assert!(rank_lower_bound(s, 0.0) <= p.support_size() as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn majorization_matches_prefix_oracle(a in sequence_strategy(), b in sequence_strategy()) {
        let n = a.values().len().max(b.values().len());
        let prefix = |v: &[f64], m: usize| v.iter().take(m).sum::<f64>();
        let oracle = (1..=n).all(|m| prefix(a.values(), m) + 1e-12 >= prefix(b.values(), m));
        prop_assert_eq!(majorizes(&a, &b), oracle);
    }

    #[test]
    fn gibbs_bound_is_exact_entropy(n in 2usize..40, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let mut levels: Vec<f64> = probability_vector(&mut item_rng(seed, 2), n)
            .iter().map(|x| 10.0 * x).collect();
        levels.sort_by(|a, b| a.total_cmp(b));
        let mean = levels.iter().sum::<f64>() / n as f64;
        prop_assume!(mean - levels[0] > 1e-6);
        let energy = levels[0] + frac * (mean - levels[0]);
        let g = gibbs_entropy_bound(&levels, energy).unwrap();
        prop_assert!((g.bound - g.state.entropy_bits()).abs() < 1e-9);
        prop_assert!((g.state.energy() - energy).abs() < 1e-9 * (1.0 + energy.abs()));
    }
}
