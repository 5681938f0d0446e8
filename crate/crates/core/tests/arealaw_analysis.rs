use nnichain::arealaw_analysis::*;
use nnichain::linalg::{self, CMat, CVec, Interval, C64};
use nnichain::locality_filters::{
    approximate_ground_projector, FilterParams, LocalOperator, DEFAULT_FILTER_CONSTANT,
};
use nnichain::nni_hamiltonian::{diagonalize, tfi_chain, ModelSpec};
use nnichain::random::{self, item_rng};
use nnichain::tensor_core::{DenseState, SiteGeometry};
use nnichain::Error;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn bell_pair() -> DenseState {
    let s = 0.5f64.sqrt();
    let amps = CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
    DenseState::new(SiteGeometry::uniform(2, 2).unwrap(), amps).unwrap()
}

fn product_state(d: usize) -> DenseState {
    let f = CVec::from_vec(vec![c(0.6), C64::new(0.0, 0.8)]);
    DenseState::product(&vec![f; d]).unwrap()
}

/// Bell pairs on sites (1,2), (3,4), ...
fn paired_chain(pairs: usize) -> DenseState {
    let s = 0.5f64.sqrt();
    let mut amps = CVec::from_element(1, c(1.0));
    for _ in 0..pairs {
        let bell = CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        amps = amps.kronecker(&bell);
    }
    DenseState::new(SiteGeometry::uniform(2 * pairs, 2).unwrap(), amps).unwrap()
}

/// Reduced density of qubit sites `[first, last]` by explicit index loops.
fn loop_partial_trace(psi: &CVec, d: usize, first: usize, last: usize) -> CMat {
    let keep = last - first + 1;
    let n = 1usize << d;
    let k = 1usize << keep;
    let mut rho = CMat::zeros(k, k);
    let bit = |x: usize, site: usize| (x >> (d - site)) & 1;
    let kept = |x: usize| (first..=last).fold(0, |acc, s| (acc << 1) | bit(x, s));
    let rest = |x: usize| (1..=d).filter(|s| *s < first || *s > last).fold(0, |acc, s| (acc << 1) | bit(x, s));
    for x in 0..n {
        for y in 0..n {
            if rest(x) == rest(y) {
                rho[(kept(x), kept(y))] += psi[x] * psi[y].conj();
            }
        }
    }
    rho
}

fn entropy_bits(rho: &CMat) -> f64 {
    linalg::eigh(rho)
        .values
        .iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

#[test]
fn mutual_information_small_cases() {
    let bell = bell_pair();
    let a = Interval::site(1).unwrap();
    let b = Interval::site(2).unwrap();
    let rec = mutual_information_regions(&bell, a, b).unwrap();
    assert!((rec.mutual_information - 2.0).abs() < 1e-12);
    assert!(rec.s_ab.value.abs() < 1e-12);
    let prod = product_state(4);
    let rec = mutual_information_regions(&prod, Interval::new(1, 2).unwrap(), Interval::new(3, 4).unwrap()).unwrap();
    assert!(rec.mutual_information.abs() < 1e-12);
    assert!(mutual_information_regions(&prod, a, Interval::site(3).unwrap()).is_err());
}

#[test]
fn mutual_information_tfi_matches_loop_oracle() {
    let eig = diagonalize(&tfi_chain(8, 2.0, 1.0).unwrap()).unwrap();
    let st = eig.ground_state().unwrap();
    let rec = mutual_information(&st, 4, 1).unwrap();
    let psi = st.amplitudes();
    let sa = entropy_bits(&loop_partial_trace(psi, 8, 1, 4));
    let sb = entropy_bits(&loop_partial_trace(psi, 8, 5, 8));
    let sab = entropy_bits(&loop_partial_trace(psi, 8, 1, 8));
    assert!((rec.mutual_information - (sa + sb - sab)).abs() < 1e-9);
    assert!(matches!(mutual_information(&st, 4, 2), Err(Error::Range(_))));
}

#[test]
fn relent_bound_values() {
    assert!((relent_lower_bound(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
    assert!(relent_lower_bound(0.0, 0.999_999).unwrap() < 2e-6);
    // binary divergence form
    let (eps, eb) = (0.1, 0.3);
    let expect = binary_relative_entropy(1.0 - 2.0 * eps, eb);
    assert!((relent_lower_bound(eps, eb).unwrap() - expect).abs() < 1e-14);
    assert!(matches!(relent_lower_bound(0.6, 0.3), Err(Error::BoundUndefined(_))));
    assert!(matches!(relent_lower_bound(0.1, 0.0), Err(Error::BoundUndefined(_))));
}

#[test]
fn channel_extremes_and_validation() {
    let dims = vec![2, 2];
    let mut rng = item_rng(1, 0);
    let rho = random::density_matrix(&mut rng, 4);
    let id = LocalOperator::identity(dims.clone());
    let (p, q) = dephasing_channel(&rho, &id).unwrap();
    assert!((p - 1.0).abs() < 1e-12 && q.abs() < 1e-12);
    let zero = LocalOperator::zero(dims.clone());
    let (p, _) = dephasing_channel(&rho, &zero).unwrap();
    assert!(p.abs() < 1e-12);
    let twice = LocalOperator::new(CMat::identity(4, 4) * c(2.0), dims, None).unwrap();
    assert!(dephasing_channel(&rho, &twice).is_err());
}

#[test]
fn relative_entropy_commuting_oracle() {
    let p = [0.5, 0.3, 0.2];
    let q = [0.2, 0.2, 0.6];
    let dp = CMat::from_diagonal(&CVec::from_iterator(3, p.iter().map(|&x| c(x))));
    let dq = CMat::from_diagonal(&CVec::from_iterator(3, q.iter().map(|&x| c(x))));
    let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).log2()).sum();
    assert!((relative_entropy(&dp, &dq).unwrap() - kl).abs() < 1e-12);
    assert_eq!(relative_entropy(&dp, &dp).unwrap(), 0.0);
    let pure = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(1.0), c(0.0)]));
    let other = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0), c(0.0)]));
    assert!(relative_entropy(&pure, &other).unwrap().is_infinite());
}

#[test]
fn expectation_small_cases() {
    assert!((expectation_e(&product_state(3), 1).unwrap() - 1.0).abs() < 1e-12);
    assert!((expectation_e(&bell_pair(), 1).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn expectation_random_states_against_marginal_oracle() {
    for seed in 0..20u64 {
        let mut rng = item_rng(seed, 0);
        let st = DenseState::random(SiteGeometry::uniform(5, 2).unwrap(), &mut rng);
        let psi = st.amplitudes();
        for j in 1..5 {
            let e = expectation_e(&st, j).unwrap();
            // tr ρ_A³ computed from the loop oracle equals Σσ⁶
            let ra = loop_partial_trace(psi, 5, 1, j);
            let oracle = (&ra * &ra * &ra).trace().re;
            assert!((e - oracle).abs() < 1e-12);
        }
    }
}

#[test]
fn eb_check_zero_error_reduces_to_ordering() {
    let rec = ExpectationRecord {
        j: 1,
        e: 0.8,
        e_b: 0.7,
        epsilon: 0.0,
    };
    let out = eb_bound_check(&rec).unwrap();
    assert!(out.stated.holds && out.derived.holds);
    assert!((out.stated.slack - 0.1).abs() < 1e-15);
    let rec = ExpectationRecord { e_b: 0.9, ..rec };
    assert!(!eb_bound_check(&rec).unwrap().stated.holds);
    let rec = ExpectationRecord { epsilon: 0.5, ..rec };
    assert!(eb_bound_check(&rec).is_err());
}

#[test]
fn pipeline_expectations_on_tfi() {
    let spec = tfi_chain(8, 2.0, 1.0).unwrap();
    let eig = diagonalize(&spec).unwrap();
    let st = eig.ground_state().unwrap();
    let params = FilterParams::for_overlap(1, eig.gap(), DEFAULT_FILTER_CONSTANT).unwrap();
    let approx = approximate_ground_projector(&spec, &eig, 4, 1, &params).unwrap();
    let check = relent_check(&st, &approx).unwrap();
    assert!(check.weight_holds);
    assert!(check.bound.is_some() && check.bound_holds);
    let eb = eb_bound_check(&check.record).unwrap();
    assert!(eb.derived.holds && eb.derived.slack > 0.0);
    let tm = normalized_tm(&st, &approx).unwrap();
    assert!((tm.trace().re - 1.0).abs() < 1e-12);
    assert!(linalg::is_hermitian(&tm, 1e-12));
}

#[test]
fn recursion_on_product_and_paired_states() {
    let prod = product_state(6);
    for l in 1..=3 {
        let t = recursion_terms(&prod, l, 0.0, 1.0).unwrap();
        assert!(t.s_l.abs() < 1e-12 && t.s_2l.abs() < 1e-12);
        assert!(sl_recursion_check(&prod, l, 0.0, 1.0, 0.0).unwrap().holds);
    }
    let pairs = paired_chain(3);
    let terms: Vec<_> = (1..=3)
        .map(|l| recursion_terms(&pairs, l, 0.0, 0.25).unwrap())
        .collect();
    // odd windows cut one pair, even windows starting mid-pair cut two
    assert!((terms[0].s_l - 1.0).abs() < 1e-12);
    assert!((terms[0].s_2l - 2.0).abs() < 1e-12);
    let fit = fit_recursion_constant(&terms).unwrap();
    for l in 1..=3 {
        assert!(sl_recursion_check(&pairs, l, 0.0, 0.25, fit.constant).unwrap().holds);
    }
    assert!(fit.residuals.iter().all(|&r| r >= 0.0));
    assert!(recursion_terms(&pairs, 4, 0.0, 0.25).is_err());
}

#[test]
fn recursion_on_tfi_ten_sites() {
    let st = diagonalize(&tfi_chain(10, 2.0, 1.0).unwrap())
        .unwrap()
        .ground_state()
        .unwrap();
    let e = expectation_e(&st, 5).unwrap();
    // errors of the order measured by the three-factor pipeline at d=8
    let terms: Vec<_> = [(1, 0.135), (2, 0.0025)]
        .iter()
        .map(|&(l, eps)| recursion_terms(&st, l, eps, e).unwrap())
        .collect();
    let fit = fit_recursion_constant(&terms).unwrap();
    for (t, eps) in terms.iter().zip([0.135, 0.0025]) {
        assert!(sl_recursion_check(&st, t.l, eps, e, fit.constant).unwrap().holds);
    }
}

#[test]
fn truncation_fit_recovers_power_law() {
    for s in [0.7, 1.5, 3.0] {
        let points: Vec<(usize, f64)> = (1..1024).map(|r| (r, ((r + 1) as f64).powf(-s))).collect();
        let curve = TruncationCurve {
            cut: 1,
            points,
            dimension: 6,
        };
        let fit = truncation_rate_fit_curves(&[&curve]).unwrap();
        let power = fit
            .fits
            .iter()
            .find(|f| f.case == TruncationCase::ExponentialPrefactor)
            .unwrap();
        assert!((power.rate - s).abs() < 0.1 * s, "s={s}: fitted {}", power.rate);
    }
}

#[test]
fn truncation_fit_classifies_families() {
    let make = |dim: usize, f: &dyn Fn(f64, f64) -> f64| TruncationCurve {
        cut: 1,
        points: (2..200).map(|r| (r, f(r as f64, dim as f64))).collect(),
        dimension: dim,
    };
    let s = 1.2;
    let log_corrected = make(6, &|r, dim| 0.5 * r.powf(-s) * r.log2().powf(s * dim));
    assert_eq!(
        truncation_rate_fit_curves(&[&log_corrected]).unwrap().case,
        TruncationCase::LogCorrected
    );
    let poly: Vec<_> = [6, 8, 10].iter().map(|&m| make(m, &|r, dim| 2.0 * r.powf(-s / dim))).collect();
    let fit = truncation_rate_fit_curves(&poly.iter().collect::<Vec<_>>()).unwrap();
    assert_eq!(fit.case, TruncationCase::PolynomialInDimension);
    assert!((fit.rate - s).abs() < 1e-8);
    let expo: Vec<_> = [6, 8, 10].iter().map(|&m| make(m, &|r, dim| 1.3f64.powf(dim) * r.powf(-s))).collect();
    let fit = truncation_rate_fit_curves(&expo.iter().collect::<Vec<_>>()).unwrap();
    assert_eq!(fit.case, TruncationCase::ExponentialPrefactor);
    assert!((fit.rate - s).abs() < 1e-8);
}

#[test]
fn truncation_curve_of_diagonal_state() {
    // ρ = Σ_k p_k |k⟩⟨k| ⊗ |k⟩⟨k| has operator Schmidt coefficients p_k
    let p: Vec<f64> = (1..=4).map(|k| (k as f64).powi(-2)).collect();
    let total: f64 = p.iter().sum();
    let mut rho = CMat::zeros(16, 16);
    for (k, pk) in p.iter().enumerate() {
        rho[(k * 4 + k, k * 4 + k)] = c(pk / total);
    }
    let curve = truncation_curve(&rho, &[2, 2, 2, 2], 2, 8).unwrap();
    assert_eq!(curve.points.len(), 3);
    for &(r, e) in &curve.points {
        assert!((e - p[r] / total).abs() < 1e-12);
    }
    // rank one across the cut leaves nothing to fit
    let mut pure = CMat::zeros(16, 16);
    pure[(0, 0)] = c(1.0);
    assert!(matches!(
        truncation_rate_fit(&pure, &[2, 2, 2, 2], 2, 8),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn sweep_trivial_and_degenerate_models() {
    let free = ModelSpec::Tfi { h: 1.5, g: 0.0 };
    let reports = entropy_sweep(&[free], &[4, 6], 0.05).unwrap();
    let r = &reports[0];
    assert!(r.points.iter().all(|p| p.max_cut.abs() < 1e-12));
    assert!(r.delta_sat.unwrap() < 1e-12);
    assert!(r.passed());
    let degenerate = ModelSpec::Tfi { h: 0.0, g: 1.0 };
    assert!(entropy_sweep(&[degenerate], &[4], 0.05).is_err());
}

#[test]
fn sweep_tfi_small_chains() {
    let models = [ModelSpec::Tfi { h: 2.0, g: 1.0 }, ModelSpec::Tfi { h: 1.0, g: 1.0 }];
    let reports = entropy_sweep(&models, &[6, 8], 0.05).unwrap();
    assert!(!reports[0].exempt && reports[1].exempt);
    assert!(reports[0].saturated && reports[0].plateau_ok);
    let p = &reports[0].points[1];
    assert_eq!(p.cut_entropies.len(), 7);
    assert!(p.single_site_max <= 1.0 + 1e-12);
    // critical chain carries more entanglement
    assert!(reports[1].points[1].mid_cut > p.mid_cut);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn subadditivity_on_random_states(seed in any::<u64>(), k in 1usize..5, m in 1usize..5) {
        let mut rng = item_rng(seed, 0);
        let st = DenseState::random(SiteGeometry::uniform(6, 2).unwrap(), &mut rng);
        let a = Interval::new(1, k.min(5)).unwrap();
        let b = Interval::new(a.last + 1, (a.last + m).min(6)).unwrap();
        let rec = mutual_information_regions(&st, a, b).unwrap();
        prop_assert!(rec.s_ab.value <= rec.s_a.value + rec.s_b.value + 1e-9);
    }

    #[test]
    fn chained_partial_traces(seed in any::<u64>(), first in 1usize..=3, len in 1usize..=3) {
        let mut rng = item_rng(seed, 1);
        let d = 5;
        let st = DenseState::random(SiteGeometry::uniform(d, 2).unwrap(), &mut rng);
        let keep = Interval::new(first, (first + len - 1).min(d)).unwrap();
        let wide = Interval::new(first, d).unwrap();
        let dims = vec![2; d];
        let rho_wide = linalg::reduced_density(st.amplitudes(), &dims, wide);
        let sub_dims = vec![2; wide.len()];
        let inner = Interval::new(1, keep.len()).unwrap();
        let chained = linalg::partial_trace(&rho_wide, &sub_dims, inner);
        let direct = linalg::reduced_density(st.amplitudes(), &dims, keep);
        prop_assert!(linalg::frobenius_distance(&chained, &direct) < 1e-12);
    }

    #[test]
    fn channel_does_not_increase_relative_entropy(seed in any::<u64>()) {
        let mut rng = item_rng(seed, 2);
        let rho = random::density_matrix(&mut rng, 4);
        let sigma = random::density_matrix(&mut rng, 4);
        let h = random::hermitian(&mut rng, 4);
        let eig = linalg::eigh(&h);
        let op = eig.apply_function(|x| c(1.0 / (1.0 + (-x).exp())));
        let op = LocalOperator::new(op, vec![2, 2], Interval::new(1, 2).ok()).unwrap();
        let (p, _) = dephasing_channel(&rho, &op).unwrap();
        let (q, _) = dephasing_channel(&sigma, &op).unwrap();
        prop_assert!(binary_relative_entropy(p, q) <= relative_entropy(&rho, &sigma).unwrap() + 1e-9);
    }
}
