//! Gaussian spectral filters, support localization, spectral-window
//! projectors and the three-factor approximation of the ground projector.
//!
//! Filters that are a fixed operator conjugated by `exp(iHt)` are evaluated
//! exactly in the eigenbasis. The ordered exponential behind the bulk factor
//! is discretized as a midpoint product integral and refined until stable.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, HermitianEigen, Interval, C64};
use crate::nni_hamiltonian::{interaction_constants, lbr_split, EigenSystem, NniSpec};

pub use crate::operator::LocalOperator;

const HERMITIAN_TOL: f64 = 1e-10;

/// Default `c` in `q = c · 2(l+1)/ΔE²`.
pub const DEFAULT_FILTER_CONSTANT: f64 = 8.0;

/// Default multiplier on the edge-window threshold `√(‖Mψ₀‖·‖M‖)`.
pub const DEFAULT_TAU_SCALE: f64 = 1.0;

/// Discretization and filter parameters for the bulk factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterParams {
    /// Gaussian width in units of time².
    pub q: f64,
    pub l: usize,
    /// Half-width of the time window; `None` picks `max(6√q, l/(2v))`.
    pub time_truncation: Option<f64>,
    /// Minimum number of quadrature nodes on `[−T, T]`.
    pub quadrature_nodes: usize,
    /// Initial number of product-integral steps per node spacing.
    pub ode_steps: usize,
    /// Accept once one refinement changes the result by less than this.
    pub refine_tol: f64,
    pub max_refinements: usize,
    /// Propagation speed used for the time window; `None` uses the
    /// interaction constant of the chain.
    pub velocity: Option<f64>,
    /// Window threshold for the edge projectors; `None` uses `tau_scale·√(‖Mψ₀‖·‖M‖)`.
    pub tau: Option<f64>,
    /// Multiplier on the default window threshold when `tau` is `None`.
    pub tau_scale: f64,
}

impl FilterParams {
    /// `q = c · 2(l+1)/ΔE²` with default discretization.
    pub fn for_overlap(l: usize, gap: f64, c: f64) -> Result<Self> {
        if !(gap > 0.0) || !(c > 0.0) {
            return Err(Error::Validation(format!(
                "gap and filter constant must be positive, got {gap} and {c}"
            )));
        }
        Self::with_q(2.0 * c * (l as f64 + 1.0) / (gap * gap), l)
    }

    pub fn with_q(q: f64, l: usize) -> Result<Self> {
        let p = Self {
            q,
            l,
            time_truncation: None,
            quadrature_nodes: 16,
            ode_steps: 8,
            refine_tol: 1e-6,
            max_refinements: 24,
            velocity: None,
            tau: None,
            tau_scale: DEFAULT_TAU_SCALE,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0) || !self.q.is_finite() {
            return Err(Error::Validation(format!("q must be > 0, got {}", self.q)));
        }
        if let Some(t) = self.time_truncation {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Validation(format!("time truncation must be > 0, got {t}")));
            }
        }
        if self.quadrature_nodes < 8 || self.ode_steps < 8 {
            return Err(Error::Validation(
                "quadrature_nodes and ode_steps must both be ≥ 8".into(),
            ));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::Validation("refine_tol must be > 0".into()));
        }
        if let Some(v) = self.velocity {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("velocity must be > 0, got {v}")));
            }
        }
        if !(self.tau_scale > 0.0) || !self.tau_scale.is_finite() {
            return Err(Error::Validation(format!("tau_scale must be > 0, got {}", self.tau_scale)));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return Err(Error::Validation(format!("tau must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    /// Same parameters with twice the nodes and twice the steps.
    pub fn doubled(&self) -> Self {
        Self {
            quadrature_nodes: 2 * self.quadrature_nodes,
            ode_steps: 2 * self.ode_steps,
            ..self.clone()
        }
    }
}

fn full_interval(dims: &[usize]) -> Interval {
    Interval {
        first: 1,
        last: dims.len(),
    }
}

fn require_shifted(eig: &EigenSystem) -> Result<()> {
    if eig.eigenvalues().first().copied() != Some(0.0) {
        return Err(Error::Validation("spectrum must be shifted so that λ₀ = 0".into()));
    }
    Ok(())
}

/// `ρ^q = Σ_k exp(−λ_k² q/2) P_k`, the Gaussian time average of `exp(iHt)`.
pub fn gaussian_projector(eig: &EigenSystem, q: f64) -> Result<LocalOperator> {
    require_shifted(eig)?;
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Validation(format!("q must be finite and ≥ 0, got {q}")));
    }
    let m = eig.apply_function(|lam| C64::new((-0.5 * q * lam * lam).exp(), 0.0));
    LocalOperator::new(m, eig.dims().to_vec(), Some(full_interval(eig.dims())))
}

/// `‖ρ^q − ρ⁰‖` measured as the largest eigenvalue modulus of the difference.
pub fn gaussian_projector_error(eig: &EigenSystem, q: f64) -> Result<f64> {
    let rho_q = gaussian_projector(eig, q)?;
    let diff = rho_q.matrix() - eig.ground_projector();
    Ok(linalg::hermitian_norm(&diff))
}

/// Entrywise Gaussian damping of `A` in the eigenbasis of `H`.
pub fn filtered_operator(eig: &EigenSystem, a: &LocalOperator, q: f64) -> Result<LocalOperator> {
    if a.dim() != eig.dim() {
        return Err(Error::Validation("operator does not match the eigensystem".into()));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Validation(format!("q must be finite and ≥ 0, got {q}")));
    }
    let v = eig.eigenvectors();
    let lam = eig.eigenvalues();
    let mut inner = v.adjoint() * a.matrix() * v;
    for c in 0..inner.ncols() {
        for r in 0..inner.nrows() {
            let w = lam[r] - lam[c];
            inner[(r, c)] *= (-0.5 * q * w * w).exp();
        }
    }
    let m = v * inner * v.adjoint();
    LocalOperator::new(m, a.dims().to_vec(), Some(full_interval(a.dims())))
}

/// `‖Ã ψ₀‖` for the filtered operator without forming it: only the column
/// of `A` in the eigenbasis that meets the ground state is needed.
pub fn filtered_ground_residual(eig: &EigenSystem, a: &LocalOperator, q: f64) -> Result<f64> {
    require_shifted(eig)?;
    if a.dim() != eig.dim() {
        return Err(Error::Validation("operator does not match the eigensystem".into()));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Validation(format!("q must be finite and ≥ 0, got {q}")));
    }
    let column = eig.eigenvectors().adjoint() * (a.matrix() * eig.ground_vector());
    let sq: f64 = column
        .iter()
        .zip(eig.eigenvalues())
        .map(|(c, &lam)| c.norm_sqr() * (-q * lam * lam).exp())
        .sum();
    Ok(sq.sqrt())
}

/// Partial expectation in the maximally mixed state outside `target`.
pub fn localize(a: &LocalOperator, target: Interval) -> Result<LocalOperator> {
    target.check_within(a.dims().len())?;
    let m = linalg::project_onto_support(a.matrix(), a.dims(), target);
    LocalOperator::new(m, a.dims().to_vec(), Some(target))
}

/// Spectral projector of `M` onto `|λ| ≤ τ` together with its leakage data.
#[derive(Debug, Clone)]
pub struct WindowProjection {
    pub op: LocalOperator,
    pub tau: f64,
    /// `‖(O − I)ψ₀‖`.
    pub defect: f64,
    /// `‖Mψ₀‖/τ`.
    pub bound: f64,
}

pub fn default_tau(m: &LocalOperator, psi0: &CVec) -> f64 {
    let m_psi = (m.matrix() * psi0).norm();
    let floor = 1e-12 * m.norm().max(1.0);
    (m_psi * m.norm()).sqrt().max(floor)
}

/// Projector onto the spectral window `|λ| ≤ τ` of a self-adjoint `M`.
///
/// The projector is built on the support of `M` and embedded, so it has the
/// same support. The leakage bound `‖(O − I)ψ₀‖ ≤ ‖Mψ₀‖/τ` is checked on
/// every call.
pub fn window_projector(m: &LocalOperator, psi0: &CVec, tau: Option<f64>) -> Result<WindowProjection> {
    if !m.is_self_adjoint(HERMITIAN_TOL * m.norm().max(1.0)) {
        return Err(Error::Validation("window projector needs a self-adjoint operator".into()));
    }
    if psi0.len() != m.dim() {
        return Err(Error::Validation("state does not match the operator".into()));
    }
    let tau = tau.unwrap_or_else(|| default_tau(m, psi0));
    if !(tau > 0.0) {
        return Err(Error::Validation(format!("tau must be > 0, got {tau}")));
    }
    let dims = m.dims().to_vec();
    let op = match m.support() {
        None => {
            let c = m.matrix().trace().re / m.dim() as f64;
            if c.abs() <= tau {
                LocalOperator::identity(dims)
            } else {
                LocalOperator::zero(dims)
            }
        }
        Some(_) => {
            let (support, local) = m.local_matrix();
            let eig = linalg::eigh(&local);
            let p = eig.apply_function(|x| {
                if x.abs() <= tau {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            LocalOperator::from_local(&p, dims, support)?
        }
    };
    let defect = (op.matrix() * psi0 - psi0).norm();
    let bound = (m.matrix() * psi0).norm() / tau;
    if defect > bound + 1e-12 {
        return Err(Error::Numeric(format!(
            "window leakage {defect:.3e} exceeds the bound {bound:.3e}"
        )));
    }
    Ok(WindowProjection {
        op,
        tau,
        defect,
        bound,
    })
}

/// The bulk factor and its discretization diagnostics.
#[derive(Debug, Clone)]
pub struct BulkFactor {
    pub op: LocalOperator,
    /// Change caused by the last refinement.
    pub residual: f64,
    /// Product-integral steps per node spacing in the accepted result.
    pub steps: usize,
    /// Number of quadrature nodes on `[−T, T]`.
    pub nodes: usize,
    pub time_truncation: f64,
}

struct TimeGrid {
    spacing: f64,
    half_count: usize,
    weights: Vec<f64>,
}

impl TimeGrid {
    fn time(&self, n: i64) -> f64 {
        n as f64 * self.spacing
    }

    fn weight(&self, n: i64) -> f64 {
        self.weights[n.unsigned_abs() as usize]
    }
}

fn time_grid(q: f64, t_max: f64, omega_max: f64, min_nodes: usize) -> TimeGrid {
    // trapezoid aliasing error for a frequency ω is about exp(−(2π/Δ − ω)² q/2)
    let needed = 2.0 * PI / (omega_max + (80.0 / q).sqrt());
    let half_min = (min_nodes.saturating_sub(1) / 2).max(1);
    let half_count = ((t_max / needed).ceil() as usize).max(half_min);
    let spacing = t_max / half_count as f64;
    let norm = spacing / (2.0 * PI * q).sqrt();
    let weights = (0..=half_count)
        .map(|n| {
            let t = n as f64 * spacing;
            norm * (-t * t / (2.0 * q)).exp()
        })
        .collect();
    TimeGrid {
        spacing,
        half_count,
        weights,
    }
}

fn spectral_radius_span(a: &HermitianEigen, b: &HermitianEigen) -> f64 {
    let (amin, amax) = (a.values[0], *a.values.last().expect("non-empty"));
    let (bmin, bmax) = (b.values[0], *b.values.last().expect("non-empty"));
    (amax - bmin).abs().max((bmax - amin).abs())
}

/// Eigen-decomposition of a unitary `S = Q diag(e^{iθ}) Q†`.
///
/// Uses the Hermitian part `(S − S†)/2i`, which shares eigenvectors with `S`
/// while all phases stay inside `(−π/2, π/2)`. Returns `None` if the
/// reconstruction check fails.
fn unitary_phases(s: &CMat) -> Option<(CMat, Vec<f64>)> {
    let gen = (s - s.adjoint()) * C64::new(0.0, -0.5);
    let eig = linalg::eigh(&gen);
    let q = eig.vectors;
    let sq = s * &q;
    let mut phases = Vec::with_capacity(q.ncols());
    for k in 0..q.ncols() {
        let mu = q.column(k).dotc(&sq.column(k));
        phases.push(mu.arg());
    }
    let mut recon = q.clone();
    for (k, &th) in phases.iter().enumerate() {
        let c = C64::from_polar(1.0, th);
        for r in 0..recon.nrows() {
            recon[(r, k)] *= c;
        }
    }
    let err = (recon - sq).norm();
    (err <= 1e-10 * (s.nrows() as f64).sqrt()).then_some((q, phases))
}

/// One discretization of the bulk factor.
fn bulk_factor_once(
    k_eig: &HermitianEigen,
    b_eig: &HermitianEigen,
    grid: &TimeGrid,
    steps: usize,
) -> CMat {
    let n = k_eig.values.len();
    let delta = grid.spacing / steps as f64;
    let half_k = linalg::unitary_evolution(k_eig, 0.5 * delta);
    let kick = linalg::unitary_evolution(b_eig, delta);
    let s = &half_k * kick * &half_k;

    let weighted_sum = |powers: &dyn Fn(i64) -> CMat| -> CMat {
        let mut acc = CMat::zeros(n, n);
        let h = grid.half_count as i64;
        for m in -h..=h {
            let back = linalg::unitary_evolution(k_eig, -grid.time(m));
            acc += powers(m) * back * C64::new(grid.weight(m), 0.0);
        }
        acc
    };

    match unitary_phases(&s) {
        Some((q, phases)) => {
            // Σ_m w_m S^{steps·m} e^{−iK t_m} = Q [(Q†V_K) ∘ G] V_K†
            let overlap = q.adjoint() * &k_eig.vectors;
            let h = grid.half_count as i64;
            let mut g = CMat::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in -h..=h {
                        let phase = phases[a] * (steps as i64 * m) as f64
                            - k_eig.values[b] * grid.time(m);
                        acc += C64::from_polar(grid.weight(m), phase);
                    }
                    g[(a, b)] = acc;
                }
            }
            let inner = overlap.component_mul(&g);
            &q * inner * k_eig.vectors.adjoint()
        }
        None => {
            let mut p = s.clone();
            let mut e = 1;
            while e < steps {
                p = &p * &p;
                e *= 2;
            }
            let step_power = if e == steps {
                p
            } else {
                (0..steps - 1).fold(s.clone(), |acc, _| &acc * &s)
            };
            let inverse = step_power.adjoint();
            weighted_sum(&|m: i64| {
                let base = if m >= 0 { &step_power } else { &inverse };
                (0..m.unsigned_abs()).fold(CMat::identity(n, n), |acc, _| &acc * base)
            })
        }
    }
}

/// Gaussian-weighted average of the ordered exponential generated by
/// `A(t) = exp(iKt) i M_B exp(−iKt)` with `K = M_L + M_R`.
///
/// The ordered exponential solves `U' = U A(t)`, `U(0) = I`. It is computed
/// by a midpoint product integral whose steps are doubled until the result
/// moves by less than `params.refine_tol`.
pub fn time_ordered_ob(
    m_l: &LocalOperator,
    m_b: &LocalOperator,
    m_r: &LocalOperator,
    params: &FilterParams,
) -> Result<BulkFactor> {
    params.validate()?;
    for (name, m) in [("M_L", m_l), ("M_B", m_b), ("M_R", m_r)] {
        if !m.is_self_adjoint(HERMITIAN_TOL * m.norm().max(1.0)) {
            return Err(Error::Validation(format!("{name} is not self-adjoint")));
        }
    }
    if m_l.dim() != m_b.dim() || m_b.dim() != m_r.dim() {
        return Err(Error::Validation("operators act on different spaces".into()));
    }
    let k = m_l.matrix() + m_r.matrix();
    let k_eig = linalg::eigh(&k);
    let b_eig = linalg::eigh(m_b.matrix());
    let m_eig = linalg::eigh(&(&k + m_b.matrix()));
    let omega = spectral_radius_span(&m_eig, &k_eig);

    let velocity = params
        .velocity
        .unwrap_or_else(|| m_b.norm().max(1.0));
    let t_max = params
        .time_truncation
        .unwrap_or_else(|| (6.0 * params.q.sqrt()).max(params.l as f64 / (2.0 * velocity)));
    let grid = time_grid(params.q, t_max, omega, params.quadrature_nodes);

    let mut steps = params.ode_steps;
    let mut current = bulk_factor_once(&k_eig, &b_eig, &grid, steps);
    for _ in 0..params.max_refinements {
        let finer = bulk_factor_once(&k_eig, &b_eig, &grid, 2 * steps);
        let change = linalg::operator_norm(&(&finer - &current));
        steps *= 2;
        current = finer;
        if change < params.refine_tol {
            let op = LocalOperator::new(
                current,
                m_b.dims().to_vec(),
                Some(full_interval(m_b.dims())),
            )?;
            return Ok(BulkFactor {
                op,
                residual: change,
                steps,
                nodes: 2 * grid.half_count + 1,
                time_truncation: t_max,
            });
        }
    }
    Err(Error::Numeric(format!(
        "product integral did not settle below {:.1e} after {} refinements",
        params.refine_tol, params.max_refinements
    )))
}

/// Projects `A` onto `[0, 1]`-valued self-adjoint operators with the same support.
///
/// Takes the Hermitian part on the support and clamps its spectrum.
pub fn positive_contraction(a: &LocalOperator) -> Result<LocalOperator> {
    let (support, local) = a.local_matrix();
    let herm = (&local + local.adjoint()) * C64::new(0.5, 0.0);
    let eig = linalg::eigh(&herm);
    let clamped = eig.apply_function(|x| C64::new(x.clamp(0.0, 1.0), 0.0));
    LocalOperator::from_local(&clamped, a.dims().to_vec(), support)
}

/// Windows on which the filtered corrections are localized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineSupports {
    pub left_window: Interval,
    pub bulk_window: Interval,
    pub right_window: Interval,
    pub bulk_factor: Interval,
}

pub fn pipeline_supports(d: usize, j: usize, l: usize) -> Result<PipelineSupports> {
    let (j, l) = (j as i64, l as i64);
    Ok(PipelineSupports {
        left_window: Interval::clipped(j - 2 * l - 2, j, d)?,
        bulk_window: Interval::clipped(j - 2 * l - 2, j + 2 * l + 3, d)?,
        right_window: Interval::clipped(j + 1, j + 2 * l + 3, d)?,
        bulk_factor: Interval::clipped(j - 3 * l - 2, j + 3 * l + 3, d)?,
    })
}

/// Outputs of the full three-factor construction.
#[derive(Debug, Clone)]
pub struct GroundProjectorApprox {
    pub j: usize,
    pub l: usize,
    pub q: f64,
    pub left: WindowProjection,
    pub right: WindowProjection,
    /// Localized bulk factor, in general not self-adjoint.
    pub bulk: LocalOperator,
    /// Positive contraction derived from `bulk`.
    pub bulk_positive: LocalOperator,
    /// `‖O_B O_L O_R − ρ⁰‖`.
    pub error: f64,
    /// Same error with the positive bulk factor.
    pub error_positive: f64,
    /// `‖ρ^q − ρ⁰‖`.
    pub gaussian_error: f64,
    /// `‖H̃_X − M_X‖` for X = L, B, R.
    pub localization_errors: [f64; 3],
    /// `‖H̃_X ψ₀‖` for X = L, B, R.
    pub filtered_residuals: [f64; 3],
    pub bulk_residual: f64,
    /// Product-integral steps per node spacing and quadrature nodes accepted for the bulk factor.
    pub bulk_steps: usize,
    pub bulk_nodes: usize,
    pub supports: PipelineSupports,
    pub interaction: f64,
}

impl GroundProjectorApprox {
    pub fn operator_norms(&self) -> [f64; 3] {
        [self.left.op.norm(), self.bulk.norm(), self.right.op.norm()]
    }
}

/// Runs split → filter → localize → window projectors → bulk factor and
/// measures `‖O_B O_L O_R − ρ⁰‖` exactly.
pub fn approximate_ground_projector(
    spec: &NniSpec,
    eig: &EigenSystem,
    j: usize,
    l: usize,
    params: &FilterParams,
) -> Result<GroundProjectorApprox> {
    params.validate()?;
    let d = spec.d();
    let split = lbr_split(spec, eig, j, l)?;
    let supports = pipeline_supports(d, j, l)?;
    let psi0 = eig.ground_vector();
    let q = params.q;
    let interaction = interaction_constants(spec).j;

    let windows = [supports.left_window, supports.bulk_window, supports.right_window];
    let mut m_parts = Vec::with_capacity(3);
    let mut localization_errors = [0.0; 3];
    let mut filtered_residuals = [0.0; 3];
    for (x, (part, window)) in split.parts().into_iter().zip(windows).enumerate() {
        let filtered = filtered_operator(eig, part, q)?;
        filtered_residuals[x] = (filtered.matrix() * &psi0).norm();
        let correction = LocalOperator::new(
            filtered.matrix() - part.matrix(),
            part.dims().to_vec(),
            None,
        )?;
        let theta = localize(&correction, window)?;
        let support = match part.support() {
            Some(s) => Interval::new(s.first.min(window.first), s.last.max(window.last))?,
            None => window,
        };
        let m = LocalOperator::new(part.matrix() + theta.matrix(), part.dims().to_vec(), Some(support))?;
        localization_errors[x] = linalg::operator_norm(&(filtered.matrix() - m.matrix()));
        m_parts.push(m);
    }
    let (m_l, m_b, m_r) = (&m_parts[0], &m_parts[1], &m_parts[2]);

    let edge_tau = |m: &LocalOperator| params.tau.unwrap_or_else(|| params.tau_scale * default_tau(m, &psi0));
    let left = window_projector(m_l, &psi0, Some(edge_tau(m_l)))?;
    let right = window_projector(m_r, &psi0, Some(edge_tau(m_r)))?;
    let mut bulk_params = params.clone();
    if bulk_params.velocity.is_none() {
        bulk_params.velocity = Some(interaction.max(1e-12));
    }
    let bulk_tilde = time_ordered_ob(m_l, m_b, m_r, &bulk_params)?;
    let bulk = localize(&bulk_tilde.op, supports.bulk_factor)?;
    let bulk_positive = positive_contraction(&bulk)?;

    let rho0 = eig.ground_projector();
    let edge = left.op.matrix() * right.op.matrix();
    let error = linalg::operator_norm(&(bulk.matrix() * &edge - &rho0));
    let error_positive = linalg::operator_norm(&(bulk_positive.matrix() * &edge - &rho0));
    let gaussian_error = gaussian_projector_error(eig, q)?;

    Ok(GroundProjectorApprox {
        j,
        l,
        q,
        left,
        right,
        bulk,
        bulk_positive,
        error,
        error_positive,
        gaussian_error,
        localization_errors,
        filtered_residuals,
        bulk_residual: bulk_tilde.residual,
        bulk_steps: bulk_tilde.steps,
        bulk_nodes: bulk_tilde.nodes,
        supports,
        interaction,
    })
}
