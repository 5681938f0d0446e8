use nalgebra::DMatrix;
use nnichain::linalg::{self, CMat, C64};
use nnichain::nni_hamiltonian::{
    assemble, diagonalize, ground_state, interaction_constants, lbr_split, pauli_x, pauli_y,
    pauli_z, tfi_chain, truncated_oscillator_chain, xxz_chain, NniSpec, SolverKind,
};
use nnichain::tensor_core::SiteGeometry;
use nnichain::Error;
use proptest::prelude::*;

/// `⊗_k ops[k]` with identities elsewhere, built with explicit Kronecker products.
fn string_op(d: usize, placed: &[(usize, CMat)]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for site in 1..=d {
        let f = placed
            .iter()
            .find(|(k, _)| *k == site)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| CMat::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn tfi_oracle(d: usize, h: f64, g: f64) -> CMat {
    let n = 1 << d;
    let mut m = CMat::zeros(n, n);
    for k in 1..d {
        m -= string_op(d, &[(k, pauli_z()), (k + 1, pauli_z())]) * c(g);
    }
    for k in 1..=d {
        m -= string_op(d, &[(k, pauli_x())]) * c(h);
    }
    m
}

/// Free-fermion ground energy and gap of the open transverse-field Ising chain.
fn free_fermion_tfi(d: usize, h: f64, g: f64) -> (f64, f64) {
    let m = DMatrix::<f64>::from_fn(d, d, |i, j| {
        if i == j {
            h
        } else if j == i + 1 {
            g
        } else {
            0.0
        }
    });
    let s = m.singular_values();
    let e0 = -s.iter().sum::<f64>();
    let gap = 2.0 * s.iter().copied().fold(f64::INFINITY, f64::min);
    (e0, gap)
}

#[test]
fn non_interacting_pair() {
    let g = SiteGeometry::uniform(2, 2).unwrap();
    let hd = linalg::real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    let spec = NniSpec::new(g, vec![hd.clone(), hd], vec![CMat::zeros(4, 4)]).unwrap();
    let h = assemble(&spec).unwrap();
    let expect = linalg::real_matrix(
        4,
        4,
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0],
    );
    assert!(linalg::frobenius_distance(&h, &expect) < 1e-15);
    let eig = diagonalize(&spec).unwrap();
    assert_eq!(eig.eigenvalues().len(), 4);
    for (a, b) in eig.eigenvalues().iter().zip([0.0, 1.0, 1.0, 2.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(eig.excited_degenerate());
    assert!((eig.gap() - 1.0).abs() < 1e-12);
}

#[test]
fn tfi_three_sites_matches_kronecker_oracle() {
    let spec = tfi_chain(3, 0.8, 1.3).unwrap();
    let h = assemble(&spec).unwrap();
    assert!(linalg::frobenius_distance(&h, &tfi_oracle(3, 0.8, 1.3)) < 1e-13);
    assert!(linalg::hermiticity_defect(&h) < 1e-12);
}

#[test]
fn tfi_decoupled_ground_energy() {
    for h in [0.5, -1.7, 2.0] {
        let eig = diagonalize(&tfi_chain(2, h, 0.0).unwrap()).unwrap();
        assert!((eig.shift() + 2.0 * f64::abs(h)).abs() < 1e-12);
    }
}

#[test]
fn tfi_six_sites_matches_free_fermions() {
    let spec = tfi_chain(6, 2.0, 1.0).unwrap();
    let eig = diagonalize(&spec).unwrap();
    let (e0, gap) = free_fermion_tfi(6, 2.0, 1.0);
    assert!((eig.shift() - e0).abs() < 1e-10);
    assert!((eig.gap() - gap).abs() < 1e-10);
    assert!(!eig.ground_degenerate());
    // regression baseline
    assert!((eig.gap() - 2.293_278_473_320_7).abs() < 1e-9);
    let h = assemble(&spec).unwrap();
    assert!(eig.max_residual(&h) <= 1e-9 * eig.hamiltonian_norm());
    assert!(eig.orthonormality_defect() < 1e-10);
}

#[test]
fn oscillator_without_coupling_sums_levels() {
    let eig = diagonalize(&truncated_oscillator_chain(2, 3, 0.0).unwrap()).unwrap();
    let mut sums: Vec<f64> = (0..3)
        .flat_map(|a| (0..3).map(move |b| a as f64 + b as f64 + 1.0))
        .collect();
    sums.sort_by(f64::total_cmp);
    for (a, b) in eig.eigenvalues().iter().zip(&sums) {
        assert!((a + eig.shift() - b).abs() < 1e-12);
    }
}

#[test]
fn xx_chain_matches_oracle_spectrum() {
    let spec = xxz_chain(3, 0.0).unwrap();
    let mut oracle = CMat::zeros(8, 8);
    for k in 1..3 {
        oracle += string_op(3, &[(k, pauli_x()), (k + 1, pauli_x())]);
        oracle += string_op(3, &[(k, pauli_y()), (k + 1, pauli_y())]);
    }
    let mut expect: Vec<f64> = oracle.symmetric_eigenvalues().iter().copied().collect();
    expect.sort_by(f64::total_cmp);
    let eig = diagonalize(&spec).unwrap();
    for (a, b) in eig.eigenvalues().iter().zip(&expect) {
        assert!((a + eig.shift() - b).abs() < 1e-12);
    }
}

#[test]
fn interaction_constant_examples() {
    let free = tfi_chain(4, 2.0, 0.0).unwrap();
    assert_eq!(interaction_constants(&free).j, 0.0);
    let tfi = interaction_constants(&tfi_chain(4, 2.0, 1.0).unwrap());
    assert!(tfi.bonds.iter().all(|b| (b.coupling - 1.0).abs() < 1e-12));
    // [ZZ, X] terms give 2gh
    assert!((tfi.j - 4.0).abs() < 1e-12);
    let xxz = interaction_constants(&xxz_chain(4, 0.5).unwrap());
    assert!(xxz.bonds.iter().all(|b| b.right_commutator == 0.0 && b.left_commutator == 0.0));
}

#[test]
fn split_reconstructs_shifted_hamiltonian() {
    let spec = tfi_chain(8, 2.0, 1.0).unwrap();
    let eig = diagonalize(&spec).unwrap();
    let h = assemble(&spec).unwrap();
    let n = h.nrows();
    let split = lbr_split(&spec, &eig, 4, 1).unwrap();
    let sum = split.left.matrix() + split.bulk.matrix() + split.right.matrix();
    let target = &h - CMat::identity(n, n) * c(eig.shift());
    assert!(linalg::frobenius_distance(&sum, &target) < 1e-10);
    let total_shift: f64 = split.shifts.iter().sum();
    assert!((total_shift - eig.shift()).abs() < 1e-10);
    let psi = eig.ground_vector();
    for part in split.parts() {
        assert!((psi.adjoint() * part.matrix() * &psi)[(0, 0)].norm() < 1e-10);
        assert!(part.is_self_adjoint(1e-12));
        assert!(part.support_defect() < 1e-10);
    }
    assert_eq!(split.left.support().unwrap().last, 2);
    assert_eq!(split.bulk.support().unwrap().first, 2);
    assert_eq!(split.bulk.support().unwrap().last, 7);
    assert_eq!(split.right.support().unwrap().first, 7);
}

#[test]
fn split_with_empty_left_part() {
    let spec = tfi_chain(5, 2.0, 1.0).unwrap();
    let eig = diagonalize(&spec).unwrap();
    let split = lbr_split(&spec, &eig, 2, 0).unwrap();
    assert_eq!(split.left.norm(), 0.0);
    assert!(split.left.support().is_none());
    assert!(matches!(lbr_split(&spec, &eig, 4, 0), Err(Error::Range(_))));
}

#[test]
fn lanczos_path_agrees_with_free_fermions() {
    let spec = tfi_chain(11, 2.0, 1.0).unwrap();
    let gs = ground_state(&spec).unwrap();
    assert_eq!(gs.solver, SolverKind::Lanczos);
    let (e0, gap) = free_fermion_tfi(11, 2.0, 1.0);
    assert!((gs.energy - e0).abs() < 1e-8);
    assert!((gs.gap - gap).abs() < 1e-8);
    assert!(!gs.degenerate());
}

#[test]
fn builders_reject_bad_parameters() {
    assert!(tfi_chain(1, 1.0, 1.0).is_err());
    assert!(tfi_chain(3, f64::NAN, 1.0).is_err());
    assert!(truncated_oscillator_chain(3, 1, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_identities_hold(d in 4usize..=7, h in 0.2f64..3.0, g in 0.2f64..2.0, pick in any::<u64>()) {
        let spec = tfi_chain(d, h, g).unwrap();
        let eig = diagonalize(&spec).unwrap();
        let hm = assemble(&spec).unwrap();
        let n = hm.nrows();
        let admissible: Vec<(usize, usize)> = (0..d)
            .flat_map(|l| (1..d).map(move |j| (j, l)))
            .filter(|&(j, l)| j >= 1 + l && j + 2 + l <= d)
            .collect();
        let (j, l) = admissible[(pick % admissible.len() as u64) as usize];
        let split = lbr_split(&spec, &eig, j, l).unwrap();
        let sum = split.left.matrix() + split.bulk.matrix() + split.right.matrix();
        let target = &hm - CMat::identity(n, n) * c(eig.shift());
        prop_assert!(linalg::frobenius_distance(&sum, &target) < 1e-10);
        for part in split.parts() {
            prop_assert!(part.is_self_adjoint(1e-12));
        }
    }

    #[test]
    fn commutator_with_left_part_bounded(d in 4usize..=7, h in 1.0f64..3.0) {
        // with g = 1 the constant J = max(1, 2h) ≥ 1
        let spec = tfi_chain(d, h, 1.0).unwrap();
        let eig = diagonalize(&spec).unwrap();
        let hm = assemble(&spec).unwrap();
        let jc = interaction_constants(&spec).j;
        for j in 2..=d - 2 {
            let split = lbr_split(&spec, &eig, j, 0).unwrap();
            let comm = linalg::commutator(&hm, split.left.matrix());
            prop_assert!(linalg::operator_norm(&comm) <= 3.0 * jc * jc + 1e-9);
        }
    }

    #[test]
    fn assembled_operators_self_adjoint(d in 2usize..=5, dz in -2.0f64..2.0, cpl in -0.5f64..0.5) {
        for spec in [xxz_chain(d, dz).unwrap(), truncated_oscillator_chain(d.min(4), 3, cpl).unwrap()] {
            let h = assemble(&spec).unwrap();
            prop_assert!(linalg::hermiticity_defect(&h) < 1e-12);
        }
    }
}
