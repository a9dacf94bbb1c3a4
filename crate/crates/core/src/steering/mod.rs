//! One-sided certificates of two-qubit (un)steerability from linear programs.
//!
//! The measuring party uses projective qubit measurements along a finite set
//! of axes `n_k`. A local-hidden-state model with deterministic responses
//! `λ ∈ {±1}^N` and hidden states drawn from a polytope `P` of the Bloch
//! ball is a feasible point of
//!
//! ```text
//! Σ_{λ,j} μ_{λ,j} (1, w_j) ⊗ (1, λ_1, …, λ_N) = (bloch(T_0), bloch(T_1), …, bloch(T_N)),
//! μ ≥ 0,
//! ```
//!
//! with `w_j` the vertices of `P`, `T_0` the steered party's reduced state
//! and `T_k = Tr_meas[(n_k·σ ⊗ I) ρ]`. Columns are priced analytically
//! (`λ_k = sign` of the dual weight of axis `k`), so the `2^N` responses are
//! never materialized.
//!
//! * Unsteerable: the state with the measuring side depolarized by
//!   `1/r` (`r` the inradius of the axis polytope) admits a model with the
//!   inscribed state polytope, in both directions. Every projective
//!   measurement on the original state is then a mixture of vertex
//!   measurements on the depolarized one.
//! * Steerable: no model exists for the original state even with the
//!   circumscribed state polytope, in some direction.

pub mod lp;
pub mod polytope;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::protocol::Family;
use crate::qmath::{bloch_coordinates, pauli_x, pauli_y, pauli_z, CMat, Subsystem};
use crate::states::DensityMatrix;

pub use lp::{LpOptions, LpSolution, LpStatus};
pub use polytope::{
    inner_state_polytope, level_frequency, measurement_polytope, outer_state_polytope, BlochPolytope, Vec3,
};

/// Default refinement level.
pub const DEFAULT_LEVEL: u32 = 2;
/// Resolution of [`certified_visibility`].
pub const VISIBILITY_TOL: f64 = 1e-3;

/// Which party measures (first) and which is steered (second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    BobToCharlie,
    CharlieToBob,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::BobToCharlie, Direction::CharlieToBob];

    pub fn name(self) -> &'static str {
        match self {
            Direction::BobToCharlie => "B->C",
            Direction::CharlieToBob => "C->B",
        }
    }

    fn measuring_side(self) -> Subsystem {
        match self {
            Direction::BobToCharlie => Subsystem::First,
            Direction::CharlieToBob => Subsystem::Second,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectionSet {
    BobToCharlie,
    CharlieToBob,
    Both,
}

impl DirectionSet {
    fn from_flags(b_to_c: bool, c_to_b: bool) -> Option<Self> {
        match (b_to_c, c_to_b) {
            (true, true) => Some(DirectionSet::Both),
            (true, false) => Some(DirectionSet::BobToCharlie),
            (false, true) => Some(DirectionSet::CharlieToBob),
            (false, false) => None,
        }
    }

    /// The directions in the set.
    pub fn members(self) -> &'static [Direction] {
        match self {
            DirectionSet::BobToCharlie => &[Direction::BobToCharlie],
            DirectionSet::CharlieToBob => &[Direction::CharlieToBob],
            DirectionSet::Both => &Direction::ALL,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DirectionSet::BobToCharlie => "B->C",
            DirectionSet::CharlieToBob => "C->B",
            DirectionSet::Both => "both",
        }
    }
}

/// Bloch coordinates of `Tr_meas[(n·σ ⊗ I) ρ]` (with `n·σ` replaced by `I`
/// for the reduced state), ordered as the rows of the program.
fn assemblage_rhs(rho: &CMat, axes: &[Vec3], direction: Direction) -> Vec<f64> {
    let rho = match direction {
        Direction::BobToCharlie => *rho,
        Direction::CharlieToBob => rho.swap_factors().expect("two-qubit state"),
    };
    let n = axes.len();
    let mut ops = vec![CMat::identity(2)];
    ops.extend(axes.iter().map(|a| pauli_x().scale_re(a[0]) + pauli_y().scale_re(a[1]) + pauli_z().scale_re(a[2])));
    let mut rhs = vec![0.0; 4 * (n + 1)];
    for (k, op) in ops.iter().enumerate() {
        let lifted = op.tensor(&CMat::identity(2)).expect("qubit operator");
        let t = (lifted * rho).partial_trace(Subsystem::First).expect("4x4");
        for (a, c) in bloch_coordinates(&t).iter().enumerate() {
            rhs[a * (n + 1) + k] = *c;
        }
    }
    rhs
}

/// Analytic pricing over all (response function, state vertex) columns.
struct LhsColumns {
    axes: usize,
    states: Vec<[f64; 4]>,
}

impl LhsColumns {
    fn new(axes: usize, states: &BlochPolytope) -> Self {
        LhsColumns { axes, states: states.vertices().iter().map(|w| [1.0, w[0], w[1], w[2]]).collect() }
    }
}

impl lp::ColumnOracle for LhsColumns {
    fn rows(&self) -> usize {
        4 * (self.axes + 1)
    }

    fn best_column(&self, y: &[f64], out: &mut [f64]) -> f64 {
        let n1 = self.axes + 1;
        let weights = |c: &[f64; 4], k: usize| -> f64 { (0..4).map(|a| c[a] * y[a * n1 + k]).sum() };
        let mut best = (f64::NEG_INFINITY, 0);
        for (j, c) in self.states.iter().enumerate() {
            let v = weights(c, 0) + (1..n1).map(|k| libm::fabs(weights(c, k))).sum::<f64>();
            if v > best.0 {
                best = (v, j);
            }
        }
        let c = &self.states[best.1];
        for k in 0..n1 {
            let lambda = if k == 0 || weights(c, k) >= 0.0 { 1.0 } else { -1.0 };
            for a in 0..4 {
                out[a * n1 + k] = c[a] * lambda;
            }
        }
        best.0
    }
}

/// Whether `ρ` admits a local-hidden-state model for projective measurements
/// along the axes of `meas` with hidden states in `states`.
pub fn lhs_feasible(
    rho: &DensityMatrix,
    meas: &BlochPolytope,
    states: &BlochPolytope,
    direction: Direction,
) -> Result<LpSolution> {
    lhs_feasible_axes(rho.mat(), &meas.axes()?, states, direction)
}

/// [`lhs_feasible`] for an explicit axis list and a Hermitian, unit-trace
/// operator (not necessarily positive).
pub fn lhs_feasible_axes(rho: &CMat, axes: &[Vec3], states: &BlochPolytope, direction: Direction) -> Result<LpSolution> {
    lhs_feasible_with(rho, axes, states, direction, LpOptions::default())
}

/// [`lhs_feasible_axes`] with explicit solver options.
pub fn lhs_feasible_with(
    rho: &CMat,
    axes: &[Vec3],
    states: &BlochPolytope,
    direction: Direction,
    opts: LpOptions,
) -> Result<LpSolution> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
    }
    let rhs = assemblage_rhs(rho, axes, direction);
    lp::solve(&LhsColumns::new(axes.len(), states), &rhs, opts)
}

/// `(D_{1/r} ⊗ id) ρ` with `D_{1/r}(X) = (X - (1-r) Tr[X] I/2) / r` on the measuring side.
pub fn depolarize_inverse(rho: &CMat, r: f64, direction: Direction) -> CMat {
    let side = direction.measuring_side();
    let other = rho.partial_trace(side).expect("two-qubit operator");
    let half = CMat::identity(2).scale_re(0.5);
    let noise = match side {
        Subsystem::First => half.tensor(&other),
        Subsystem::Second => other.tensor(&half),
    }
    .expect("qubit operators");
    (*rho - noise.scale_re(1.0 - r)).scale_re(1.0 / r)
}

/// Polytopes used by [`certify_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyConfig {
    /// Refinement level, if the polytopes come from [`CertifyConfig::level`].
    pub level: Option<u32>,
    /// Axis polytope of the unsteerability branch.
    pub measurement: BlochPolytope,
    pub inner: BlochPolytope,
    pub outer: BlochPolytope,
    /// Axis polytope of the steerability branch.
    pub steering_axes: BlochPolytope,
}

impl CertifyConfig {
    pub fn level(level: u32) -> Result<Self> {
        let measurement = measurement_polytope(level)?;
        Ok(CertifyConfig {
            level: Some(level),
            steering_axes: measurement.clone(),
            measurement,
            inner: inner_state_polytope(),
            outer: outer_state_polytope(),
        })
    }

    /// Uses the axes of `p` for steerability certificates.
    pub fn with_steering_axes(mut self, p: BlochPolytope) -> Self {
        self.steering_axes = p;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatePolytope {
    Inner,
    Outer,
}

/// One linear program run during certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpRecord {
    pub direction: Direction,
    pub polytope: StatePolytope,
    pub status: LpStatus,
    pub iterations: usize,
    pub residual: f64,
    pub margin: f64,
}

impl LpRecord {
    fn new(direction: Direction, polytope: StatePolytope, sol: &LpSolution) -> Self {
        LpRecord {
            direction,
            polytope,
            status: sol.status,
            iterations: sol.iterations,
            residual: sol.residual,
            margin: sol.margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SteeringStatus {
    CertifiedUnsteerable,
    CertifiedSteerable,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVerdict {
    pub status: SteeringStatus,
    /// Directions covered by the certificate (both for unsteerability).
    pub directions: Option<DirectionSet>,
    pub level: Option<u32>,
    pub measurement_axes: usize,
    pub steering_axes: usize,
    /// Inradius of the axis polytope, the shrink factor `r`.
    pub shrink_factor: f64,
    pub state_vertices: usize,
    pub outer_scale: f64,
    /// Minimum eigenvalue of the depolarization-inverted state per direction.
    pub shrunk_min_eigenvalue: [f64; 2],
    pub lps: Vec<LpRecord>,
}

/// Unsteerability branch only: `(certified, records, min eigenvalues)`.
pub fn certify_unsteerable(rho: &DensityMatrix, cfg: &CertifyConfig) -> Result<(bool, Vec<LpRecord>, [f64; 2])> {
    certify_unsteerable_in(rho, cfg, DirectionSet::Both)
}

/// [`certify_unsteerable`] for the directions in `dirs` only. Minimum
/// eigenvalues of directions not examined are reported as zero.
pub fn certify_unsteerable_in(
    rho: &DensityMatrix,
    cfg: &CertifyConfig,
    dirs: DirectionSet,
) -> Result<(bool, Vec<LpRecord>, [f64; 2])> {
    let axes = cfg.measurement.axes()?;
    let r = cfg.measurement.inradius();
    let mut records = Vec::new();
    let mut min_eigs = [0.0; 2];
    let mut all = true;
    for &direction in dirs.members() {
        let d = direction as usize;
        let shrunk = depolarize_inverse(rho.mat(), r, direction);
        min_eigs[d] = shrunk.herm_eig()?.min_value();
        if min_eigs[d] < -1e-12 {
            all = false;
            break;
        }
        let sol = lhs_feasible_axes(&shrunk, &axes, &cfg.inner, direction)?;
        records.push(LpRecord::new(direction, StatePolytope::Inner, &sol));
        if sol.status != LpStatus::Feasible {
            all = false;
            break;
        }
    }
    Ok((all, records, min_eigs))
}

/// Steerability branch only: directions with an infeasibility certificate.
pub fn certify_steerable(rho: &DensityMatrix, cfg: &CertifyConfig) -> Result<(Option<DirectionSet>, Vec<LpRecord>)> {
    certify_steerable_in(rho, cfg, DirectionSet::Both)
}

/// [`certify_steerable`] for the directions in `dirs` only.
pub fn certify_steerable_in(
    rho: &DensityMatrix,
    cfg: &CertifyConfig,
    dirs: DirectionSet,
) -> Result<(Option<DirectionSet>, Vec<LpRecord>)> {
    let axes = cfg.steering_axes.axes()?;
    let mut records = Vec::new();
    let mut flags = [false; 2];
    for &direction in dirs.members() {
        let d = direction as usize;
        let sol = lhs_feasible_axes(rho.mat(), &axes, &cfg.outer, direction)?;
        flags[d] = sol.status == LpStatus::Infeasible;
        records.push(LpRecord::new(direction, StatePolytope::Outer, &sol));
    }
    Ok((DirectionSet::from_flags(flags[0], flags[1]), records))
}

/// Runs both branches.
///
/// # Errors
/// Solver failures, and [`Error::SolverFailure`] if both certificates were
/// obtained for the same state.
pub fn certify_with(rho: &DensityMatrix, cfg: &CertifyConfig) -> Result<SteeringVerdict> {
    certify_in(rho, cfg, DirectionSet::Both)
}

/// [`certify_with`] restricted to the directions in `dirs`: an unsteerable
/// verdict then covers exactly `dirs`.
pub fn certify_in(rho: &DensityMatrix, cfg: &CertifyConfig, dirs: DirectionSet) -> Result<SteeringVerdict> {
    let (unsteerable, mut lps, shrunk_min_eigenvalue) = certify_unsteerable_in(rho, cfg, dirs)?;
    let (steerable, steer_lps) = certify_steerable_in(rho, cfg, dirs)?;
    lps.extend(steer_lps);
    let (status, directions) = match (unsteerable, steerable) {
        (true, Some(_)) => return Err(Error::SolverFailure("contradictory steering certificates")),
        (true, None) => (SteeringStatus::CertifiedUnsteerable, Some(dirs)),
        (false, Some(d)) => (SteeringStatus::CertifiedSteerable, Some(d)),
        (false, None) => (SteeringStatus::Undecided, None),
    };
    Ok(SteeringVerdict {
        status,
        directions,
        level: cfg.level,
        measurement_axes: cfg.measurement.vertices().len() / 2,
        steering_axes: cfg.steering_axes.vertices().len() / 2,
        shrink_factor: cfg.measurement.inradius(),
        state_vertices: cfg.inner.vertices().len(),
        outer_scale: 1.0 / cfg.inner.inradius(),
        shrunk_min_eigenvalue,
        lps,
    })
}

/// [`certify_with`] using the polytopes of a refinement level.
pub fn certify(rho: &DensityMatrix, level: u32) -> Result<SteeringVerdict> {
    certify_with(rho, &CertifyConfig::level(level)?)
}

/// Largest certified visibility and the smallest tested one that was not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityBound {
    pub certified: f64,
    pub rejected: f64,
    pub level: Option<u32>,
    pub steps: usize,
}

/// Bisects `v` in `[0, 1]` for the largest visibility at which `accept`
/// holds, given `accept(0)`; `accept` must be monotone (true on an interval).
pub fn bisect_visibility(mut accept: impl FnMut(f64) -> Result<bool>, tol: f64) -> Result<(f64, f64, usize)> {
    if !accept(0.0)? {
        return Err(Error::NotMonotone(0.0));
    }
    if accept(1.0)? {
        return Ok((1.0, 1.0, 0));
    }
    let (mut lo, mut hi, mut steps) = (0.0, 1.0, 0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if accept(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((lo, hi, steps))
}

/// Largest visibility of `family` certified unsteerable, to [`VISIBILITY_TOL`].
pub fn certified_visibility_with(family: &Family, cfg: &CertifyConfig) -> Result<VisibilityBound> {
    if matches!(family, Family::Pure { .. }) {
        return Err(Error::InvalidArgument("family has no visibility parameter"));
    }
    let (lo, hi, steps) = bisect_visibility(
        |v| Ok(certify_unsteerable(&family.with_visibility(v)?.state()?, cfg)?.0),
        VISIBILITY_TOL,
    )?;
    Ok(VisibilityBound { certified: lo, rejected: hi, level: cfg.level, steps })
}

pub fn certified_visibility(family: &Family, level: u32) -> Result<VisibilityBound> {
    certified_visibility_with(family, &CertifyConfig::level(level)?)
}

/// Visibility at which the LP for `axes` and `states` turns infeasible,
/// bracketed to `tol`: `(last feasible, first infeasible)`.
pub fn feasibility_transition(
    family: &Family,
    axes: &BlochPolytope,
    states: &BlochPolytope,
    direction: Direction,
    tol: f64,
) -> Result<(f64, f64)> {
    let axes = axes.axes()?;
    let (lo, hi, _) = bisect_visibility(
        |v| {
            let rho = family.with_visibility(v)?.state()?;
            Ok(lhs_feasible_axes(rho.mat(), &axes, states, direction)?.status == LpStatus::Feasible)
        },
        tol,
    )?;
    Ok((lo, hi))
}

/// Certification result for one perturbed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditEntry {
    pub index: usize,
    /// Minimum eigenvalue of the perturbed, renormalized matrix.
    pub min_eigenvalue: f64,
    /// `None` when the perturbed matrix is not a state.
    pub unsteerable: Option<bool>,
}

/// Certifies `ρ + δ` (Hermitian part, renormalized) for every `δ`.
pub fn perturbation_audit(rho: &DensityMatrix, deltas: &[CMat], cfg: &CertifyConfig) -> Result<Vec<AuditEntry>> {
    deltas
        .iter()
        .enumerate()
        .map(|(index, delta)| audit_one(rho, index, delta, cfg))
        .collect()
}

/// Single entry of [`perturbation_audit`].
pub fn audit_one(rho: &DensityMatrix, index: usize, delta: &CMat, cfg: &CertifyConfig) -> Result<AuditEntry> {
    if delta.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: delta.dim() });
    }
    let m = (*rho.mat() + delta.hermitian_part()).hermitian_part();
    let tr = m.trace().re;
    if !(tr > 0.0) {
        return Ok(AuditEntry { index, min_eigenvalue: f64::NAN, unsteerable: None });
    }
    let m = m.scale_re(1.0 / tr);
    let min_eigenvalue = m.herm_eig()?.min_value();
    let unsteerable = match DensityMatrix::new(m) {
        Ok(state) => Some(certify_unsteerable(&state, cfg)?.0),
        Err(_) => None,
    };
    Ok(AuditEntry { index, min_eigenvalue, unsteerable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::CVec;
    use crate::states::isotropic;

    #[test]
    fn rhs_of_singlet_like_state() {
        let rho = isotropic(1.0).unwrap();
        let rhs = assemblage_rhs(rho.mat(), &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], Direction::BobToCharlie);
        // Φ⁺: reduced state I/2; Z on Bob steers +Z on Charlie, X steers +X.
        let n1 = 3;
        assert!((rhs[0] - 1.0).abs() < 1e-12);
        assert!((rhs[3 * n1 + 1] - 1.0).abs() < 1e-12);
        assert!((rhs[n1 + 2] - 1.0).abs() < 1e-12);
        assert!(rhs.iter().map(|v| v.abs()).sum::<f64>() - 3.0 < 1e-12);
    }

    #[test]
    fn depolarize_inverse_undoes_depolarization() {
        let rho = isotropic(0.3).unwrap();
        for direction in Direction::ALL {
            let r = 0.8;
            let shrunk = depolarize_inverse(rho.mat(), r, direction);
            // Isotropic states: inverting measuring-side noise rescales v by 1/r.
            assert!(shrunk.max_abs_diff(isotropic(0.3 / r).unwrap().mat()) < 1e-12);
        }
    }

    #[test]
    fn product_state_is_feasible() {
        let ket = CVec::basis(4, 0);
        let rho = DensityMatrix::pure(&ket).unwrap();
        let sol = lhs_feasible(&rho, &BlochPolytope::icosphere(1), &inner_state_polytope(), Direction::BobToCharlie)
            .unwrap();
        assert_eq!(sol.status, LpStatus::Feasible);
    }

    #[test]
    fn maximally_mixed_state_is_certified_unsteerable() {
        let v = certify(&DensityMatrix::maximally_mixed(), 1).unwrap();
        assert_eq!(v.status, SteeringStatus::CertifiedUnsteerable);
        assert_eq!(v.directions, Some(DirectionSet::Both));
    }
}
