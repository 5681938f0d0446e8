//! Nearest-neighbour chain Hamiltonians: builders, assembly, spectral data,
//! the left/bulk/right split around a cut and the interaction constants.
//!
//! Every single-site term enters the Hamiltonian exactly once. When a bond
//! sum is split, site `k` travels with bond `k` (site `d` with bond `d−1`).

mod eigen;

pub use eigen::{
    diagonalize, diagonalize_with_cap, ground_state, lanczos_lowest, EigenSystem, GroundState, SolverKind,
    DENSE_EIGEN_CAP, GROUND_STATE_DENSE_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, Interval, C64};
use crate::operator::LocalOperator;
use crate::tensor_core::SiteGeometry;

const SELF_ADJOINT_TOL: f64 = 1e-12;
/// Largest chain dimension for which full operator matrices are assembled.
pub const ASSEMBLY_CAP: usize = 1 << 13;

#[derive(Debug, Clone, PartialEq)]
pub struct NniSpec {
    geometry: SiteGeometry,
    site_terms: Vec<CMat>,
    couplings: Vec<CMat>,
}

impl NniSpec {
    pub fn new(geometry: SiteGeometry, site_terms: Vec<CMat>, couplings: Vec<CMat>) -> Result<Self> {
        let d = geometry.d();
        if site_terms.len() != d || couplings.len() != d - 1 {
            return Err(Error::Validation(format!(
                "need {d} site terms and {} couplings, got {} and {}",
                d - 1,
                site_terms.len(),
                couplings.len()
            )));
        }
        let dims = geometry.dims();
        for (k, h) in site_terms.iter().enumerate() {
            if h.nrows() != dims[k] || h.ncols() != dims[k] {
                return Err(Error::Validation(format!("site term {} has wrong shape", k + 1)));
            }
            if linalg::hermiticity_defect(h) > SELF_ADJOINT_TOL {
                return Err(Error::Validation(format!("site term {} is not self-adjoint", k + 1)));
            }
        }
        for (k, phi) in couplings.iter().enumerate() {
            let n = dims[k] * dims[k + 1];
            if phi.nrows() != n || phi.ncols() != n {
                return Err(Error::Validation(format!("coupling {} has wrong shape", k + 1)));
            }
            if linalg::hermiticity_defect(phi) > SELF_ADJOINT_TOL {
                return Err(Error::Validation(format!("coupling {} is not self-adjoint", k + 1)));
            }
        }
        Ok(Self {
            geometry,
            site_terms,
            couplings,
        })
    }

    pub fn geometry(&self) -> &SiteGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> &[usize] {
        self.geometry.dims()
    }

    pub fn d(&self) -> usize {
        self.geometry.d()
    }

    pub fn site_terms(&self) -> &[CMat] {
        &self.site_terms
    }

    pub fn couplings(&self) -> &[CMat] {
        &self.couplings
    }

    /// Bond `k` (1-based) as a two-site operator including its assigned site terms.
    pub fn bond_operator(&self, k: usize) -> CMat {
        let (na, nb) = (self.dims()[k - 1], self.dims()[k]);
        let mut op = self.couplings[k - 1].clone();
        op += linalg::kron(&self.site_terms[k - 1], &linalg::identity(nb));
        if k == self.d() - 1 {
            op += linalg::kron(&linalg::identity(na), &self.site_terms[k]);
        }
        op
    }

    /// `Σ_{k ∈ bonds} (bond operator k)` as a full-space matrix.
    pub fn bond_sum(&self, bonds: std::ops::RangeInclusive<usize>) -> CMat {
        let n = self.geometry.total_dim();
        let mut h = CMat::zeros(n, n);
        for k in bonds {
            if k == 0 || k >= self.d() {
                continue;
            }
            h += linalg::embed(&self.bond_operator(k), self.dims(), Interval { first: k, last: k + 1 });
        }
        h
    }

    /// `H ψ` without forming `H`.
    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for k in 1..self.d() {
            out += linalg::apply_embedded(
                &self.bond_operator(k),
                self.dims(),
                Interval { first: k, last: k + 1 },
                v,
            );
        }
        out
    }
}

/// Dense `H = Σ_j H_j + Σ_j Φ_{j,j+1}`.
pub fn assemble(spec: &NniSpec) -> Result<CMat> {
    let n = spec.geometry.total_dim();
    if n > ASSEMBLY_CAP {
        return Err(Error::Resource(format!(
            "chain dimension {n} exceeds the assembly cap {ASSEMBLY_CAP}"
        )));
    }
    Ok(spec.bond_sum(1..=spec.d() - 1))
}

fn pauli(kind: char) -> CMat {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match kind {
        'x' => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        'y' => CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        'z' => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!("unknown Pauli matrix"),
    }
}

pub fn pauli_x() -> CMat {
    pauli('x')
}

pub fn pauli_y() -> CMat {
    pauli('y')
}

pub fn pauli_z() -> CMat {
    pauli('z')
}

fn check_chain(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Validation(format!("a chain needs d ≥ 2, got {d}")));
    }
    Ok(())
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Validation(format!("{name} must be finite")));
    }
    Ok(())
}

/// Transverse-field Ising chain `−g Σ Z_j Z_{j+1} − h Σ X_j`.
pub fn tfi_chain(d: usize, h: f64, g: f64) -> Result<NniSpec> {
    check_chain(d)?;
    check_finite("h", h)?;
    check_finite("g", g)?;
    let site = pauli_x() * C64::new(-h, 0.0);
    let bond = linalg::kron(&pauli_z(), &pauli_z()) * C64::new(-g, 0.0);
    NniSpec::new(SiteGeometry::uniform(d, 2)?, vec![site; d], vec![bond; d - 1])
}

/// XXZ chain `Σ (X X + Y Y + Δz Z Z)`.
pub fn xxz_chain(d: usize, delta_z: f64) -> Result<NniSpec> {
    check_chain(d)?;
    check_finite("delta_z", delta_z)?;
    let bond = linalg::kron(&pauli_x(), &pauli_x())
        + linalg::kron(&pauli_y(), &pauli_y())
        + linalg::kron(&pauli_z(), &pauli_z()) * C64::new(delta_z, 0.0);
    NniSpec::new(SiteGeometry::uniform(d, 2)?, vec![CMat::zeros(2, 2); d], vec![bond; d - 1])
}

/// Position operator `(a + a†)/√2` truncated to `n` levels.
pub fn truncated_position(n: usize) -> CMat {
    let mut x = CMat::zeros(n, n);
    for k in 0..n - 1 {
        let v = C64::new(((k + 1) as f64 / 2.0).sqrt(), 0.0);
        x[(k, k + 1)] = v;
        x[(k + 1, k)] = v;
    }
    x
}

/// Harmonic oscillators truncated to `n_levels`, coupled by `coupling · x ⊗ x`.
pub fn truncated_oscillator_chain(d: usize, n_levels: usize, coupling: f64) -> Result<NniSpec> {
    check_chain(d)?;
    check_finite("coupling", coupling)?;
    if n_levels < 2 {
        return Err(Error::Validation(format!("n_levels must be ≥ 2, got {n_levels}")));
    }
    let site = CMat::from_diagonal(&CVec::from_fn(n_levels, |k, _| C64::new(k as f64 + 0.5, 0.0)));
    let x = truncated_position(n_levels);
    let bond = linalg::kron(&x, &x) * C64::new(coupling, 0.0);
    NniSpec::new(
        SiteGeometry::uniform(d, n_levels)?,
        vec![site; d],
        vec![bond; d - 1],
    )
}

/// Serializable model selection used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Tfi {
        h: f64,
        #[serde(default = "default_coupling")]
        g: f64,
    },
    Xxz {
        delta_z: f64,
    },
    Oscillator {
        n_levels: usize,
        coupling: f64,
    },
}

fn default_coupling() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self, d: usize) -> Result<NniSpec> {
        match *self {
            ModelSpec::Tfi { h, g } => tfi_chain(d, h, g),
            ModelSpec::Xxz { delta_z } => xxz_chain(d, delta_z),
            ModelSpec::Oscillator { n_levels, coupling } => {
                truncated_oscillator_chain(d, n_levels, coupling)
            }
        }
    }

    /// Short identifier used in CSV rows.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Tfi { h, g } => format!("tfi(h={h},g={g})"),
            ModelSpec::Xxz { delta_z } => format!("xxz(dz={delta_z})"),
            ModelSpec::Oscillator { n_levels, coupling } => {
                format!("osc(n={n_levels},c={coupling})")
            }
        }
    }

    /// Local dimension of every site.
    pub fn local_dim(&self) -> usize {
        match self {
            ModelSpec::Tfi { .. } | ModelSpec::Xxz { .. } => 2,
            ModelSpec::Oscillator { n_levels, .. } => *n_levels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BondNorms {
    pub coupling: f64,
    /// `‖[Φ, I ⊗ H_{k+1}]‖`.
    pub right_commutator: f64,
    /// `‖[H_k ⊗ I, Φ]‖`.
    pub left_commutator: f64,
}

impl BondNorms {
    pub fn max(&self) -> f64 {
        self.coupling.max(self.right_commutator).max(self.left_commutator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionConstants {
    pub j: f64,
    pub bonds: Vec<BondNorms>,
}

pub fn interaction_constants(spec: &NniSpec) -> InteractionConstants {
    let bonds: Vec<BondNorms> = (0..spec.d() - 1)
        .map(|k| {
            let phi = &spec.couplings[k];
            let (na, nb) = (spec.dims()[k], spec.dims()[k + 1]);
            let right = linalg::kron(&linalg::identity(na), &spec.site_terms[k + 1]);
            let left = linalg::kron(&spec.site_terms[k], &linalg::identity(nb));
            BondNorms {
                coupling: linalg::operator_norm(phi),
                right_commutator: linalg::operator_norm(&linalg::commutator(phi, &right)),
                left_commutator: linalg::operator_norm(&linalg::commutator(&left, phi)),
            }
        })
        .collect();
    let j = bonds.iter().map(BondNorms::max).fold(0.0, f64::max);
    InteractionConstants { j, bonds }
}

/// The Hamiltonian split into parts left of, around, and right of a cut.
#[derive(Debug, Clone)]
pub struct LbrSplit {
    pub j: usize,
    pub l: usize,
    /// Shifted parts `H_X − c_X I` with `⟨ψ₀, H_X ψ₀⟩ = c_X`.
    pub left: LocalOperator,
    pub bulk: LocalOperator,
    pub right: LocalOperator,
    /// `(c_L, c_B, c_R)`; they sum to the unshifted ground energy.
    pub shifts: [f64; 3],
}

impl LbrSplit {
    pub fn parts(&self) -> [&LocalOperator; 3] {
        [&self.left, &self.bulk, &self.right]
    }
}

/// Bond ranges `(left, bulk, right)` for cut `j` and overlap `l`, 1-based and
/// possibly empty.
pub fn split_bonds(d: usize, j: usize, l: usize) -> [(usize, usize); 3] {
    let (j, l, d) = (j as i64, l as i64, d as i64);
    let clip = |a: i64, b: i64| -> (usize, usize) {
        let a = a.max(1);
        let b = b.min(d - 1);
        if a > b {
            (1, 0)
        } else {
            (a as usize, b as usize)
        }
    };
    [
        clip(1, j - l - 2),
        clip(j - l - 1, j + l + 1),
        clip(j + l + 2, d - 1),
    ]
}

pub fn check_admissible(d: usize, j: usize, l: usize) -> Result<()> {
    if j < 1 + l || j + 2 + l > d {
        return Err(Error::Range(format!(
            "(j={j}, l={l}) outside the admissible range 1+l ≤ j ≤ d−2−l for d = {d}"
        )));
    }
    Ok(())
}

pub fn lbr_split(spec: &NniSpec, eig: &EigenSystem, j: usize, l: usize) -> Result<LbrSplit> {
    let d = spec.d();
    check_admissible(d, j, l)?;
    let n = spec.geometry.total_dim();
    if eig.dim() != n {
        return Err(Error::Validation("eigensystem does not match the chain".into()));
    }
    let psi0 = eig.ground_vector();
    let mut parts = Vec::with_capacity(3);
    let mut shifts = [0.0; 3];
    for (slot, (a, b)) in split_bonds(d, j, l).into_iter().enumerate() {
        if a > b {
            parts.push(LocalOperator::zero(spec.dims().to_vec()));
            continue;
        }
        let raw = spec.bond_sum(a..=b);
        let c = (psi0.adjoint() * &raw * &psi0)[(0, 0)].re;
        shifts[slot] = c;
        let shifted = raw - CMat::identity(n, n) * C64::new(c, 0.0);
        let support = Interval::new(a, b + 1)?;
        parts.push(LocalOperator::new(shifted, spec.dims().to_vec(), Some(support))?);
    }
    let right = parts.pop().expect("three parts");
    let bulk = parts.pop().expect("three parts");
    let left = parts.pop().expect("three parts");
    Ok(LbrSplit {
        j,
        l,
        left,
        bulk,
        right,
        shifts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_bond_ranges() {
        assert_eq!(split_bonds(5, 2, 0), [(1, 0), (1, 3), (4, 4)]);
        assert_eq!(split_bonds(8, 4, 1), [(1, 1), (2, 6), (7, 7)]);
        assert_eq!(split_bonds(8, 2, 1), [(1, 0), (1, 4), (5, 7)]);
        assert!(check_admissible(8, 1, 1).is_err());
        assert!(check_admissible(8, 6, 1).is_err());
        assert!(check_admissible(8, 5, 1).is_ok());
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let g = SiteGeometry::uniform(2, 2).unwrap();
        let bad = linalg::real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let r = NniSpec::new(g, vec![bad.clone(), bad], vec![CMat::zeros(4, 4)]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn model_spec_from_toml() {
        let m: ModelSpec = toml::from_str("name = \"tfi\"\nh = 2.0").unwrap();
        assert_eq!(m, ModelSpec::Tfi { h: 2.0, g: 1.0 });
        assert!(toml::from_str::<ModelSpec>("name = \"tfi\"\nhh = 2.0").is_err());
        let spec = m.build(3).unwrap();
        assert_eq!(spec.d(), 3);
    }

    #[test]
    fn apply_matches_assembly() {
        let spec = tfi_chain(4, 1.3, 0.7).unwrap();
        let h = assemble(&spec).unwrap();
        let v = CVec::from_fn(16, |i, _| C64::new(i as f64, (i * i) as f64 * 0.1));
        assert!((h * &v - spec.apply(&v)).norm() < 1e-12);
    }
}
