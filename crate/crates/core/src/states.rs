//! Two-qubit states and measurement operators.
//!
//! Conventions: `|0> = |H>`, `|1> = |V>`; the first tensor factor is Bob's
//! qubit and the second is Charlie's.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::qmath::{c, CMat, CVec, Subsystem, HERM_TOL};

/// One of Alice's outcomes. `Bottom` is the stochastic task's "round not
/// used" symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Zero,
    One,
    Bottom,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Zero, Outcome::One, Outcome::Bottom];

    pub fn index(self) -> usize {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
            Outcome::Bottom => 2,
        }
    }

    pub fn from_index(k: usize) -> Option<Outcome> {
        Outcome::ALL.get(k).copied()
    }

    pub fn from_bit(bit: u8) -> Outcome {
        if bit & 1 == 0 {
            Outcome::Zero
        } else {
            Outcome::One
        }
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn ket(self) -> CVec {
        let h = FRAC_1_SQRT_2;
        match self {
            Bell::PhiPlus => CVec::from_real(&[h, 0.0, 0.0, h]),
            Bell::PhiMinus => CVec::from_real(&[h, 0.0, 0.0, -h]),
            Bell::PsiPlus => CVec::from_real(&[0.0, h, h, 0.0]),
            Bell::PsiMinus => CVec::from_real(&[0.0, h, -h, 0.0]),
        }
    }

    pub fn projector(self) -> CMat {
        CMat::outer(&self.ket())
    }

    /// The Bell state reached from `Φ+` after flips `(s0, s1)` of `σx^s0 σz^s1`
    /// applied to either qubit.
    pub fn from_flips(s0: u8, s1: u8) -> Bell {
        match (s0 & 1, s1 & 1) {
            (0, 0) => Bell::PhiPlus,
            (1, 0) => Bell::PsiPlus,
            (0, _) => Bell::PhiMinus,
            _ => Bell::PsiMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bell::PhiPlus => "phi+",
            Bell::PhiMinus => "phi-",
            Bell::PsiPlus => "psi+",
            Bell::PsiMinus => "psi-",
        }
    }
}

/// The orthonormal frame `{φθ+, φθ-, ψθ+, ψθ-}` used to depolarize the
/// partially entangled state; reduces to the Bell basis at `θ = π/4`.
pub fn theta_frame(theta: f64) -> [CVec; 4] {
    let (s, co) = (libm::sin(theta), libm::cos(theta));
    [
        CVec::from_real(&[co, 0.0, 0.0, s]),
        CVec::from_real(&[s, 0.0, 0.0, -co]),
        CVec::from_real(&[0.0, co, s, 0.0]),
        CVec::from_real(&[0.0, s, -co, 0.0]),
    ]
}

/// A valid two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all to `1e-9`).
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: mat.dim() });
        }
        let eig = mat.herm_eig()?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > HERM_TOL || tr.im.abs() > HERM_TOL {
            return Err(Error::NotNormalized(tr.re));
        }
        if eig.min_value() < -HERM_TOL {
            return Err(Error::NotPsd(eig.min_value()));
        }
        Ok(DensityMatrix { mat: mat.hermitian_part() })
    }

    /// Pure state `|ψ><ψ|` of a (not necessarily normalized) ket.
    pub fn pure(ket: &CVec) -> Result<Self> {
        if ket.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: ket.dim() });
        }
        Ok(DensityMatrix { mat: CMat::outer(&ket.normalized()) })
    }

    /// Convex mixture `Σ w_k |ψ_k><ψ_k|`; weights must be non-negative and sum to one.
    pub fn mixture(weights: &[f64], kets: &[CVec]) -> Result<Self> {
        let mut m = CMat::zeros(4);
        for (&w, k) in weights.iter().zip(kets) {
            if w < 0.0 {
                return Err(Error::OutOfRange { name: "weight", value: w });
            }
            m = m + CMat::outer(&k.normalized()).scale_re(w);
        }
        Self::new(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { mat: CMat::identity(4).scale_re(0.25) }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn reduced(&self, keep: Subsystem) -> CMat {
        self.mat.partial_trace(keep.other()).expect("4x4 by construction")
    }

    /// The same state with Bob and Charlie exchanged.
    pub fn swapped(&self) -> Self {
        DensityMatrix { mat: self.mat.swap_factors().expect("4x4 by construction") }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.herm_eig().expect("Hermitian by construction").min_value()
    }
}

/// Projector onto a Bell state.
pub fn bell_state(which: Bell) -> DensityMatrix {
    DensityMatrix { mat: which.projector() }
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { name: "v", value: v });
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= FRAC_PI_4 + 1e-12) {
        return Err(Error::OutOfRange { name: "theta", value: theta });
    }
    Ok(())
}

/// `v Φ+ + (1 - v) I/4`.
pub fn isotropic(v: f64) -> Result<DensityMatrix> {
    check_visibility(v)?;
    let m = Bell::PhiPlus.projector().scale_re(v) + CMat::identity(4).scale_re((1.0 - v) / 4.0);
    Ok(DensityMatrix { mat: m })
}

/// `v |φθ><φθ| + (1 - v) I/4` with `|φθ> = cos θ |00> + sin θ |11>`.
pub fn partial_iso(v: f64, theta: f64) -> Result<DensityMatrix> {
    check_visibility(v)?;
    check_theta(theta)?;
    let phi = theta_frame(theta)[0];
    let m = CMat::outer(&phi).scale_re(v) + CMat::identity(4).scale_re((1.0 - v) / 4.0);
    Ok(DensityMatrix { mat: m })
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    let pt = rho.mat.partial_transpose(Subsystem::Second).expect("4x4 by construction");
    let eig = pt.herm_eig().expect("partial transpose of a Hermitian matrix is Hermitian");
    eig.values().iter().filter(|&&x| x < 0.0).map(|x| -x).sum()
}

/// Squared Uhlmann fidelity `(Tr sqrt(sqrt(ρ) σ sqrt(ρ)))^2`, clipped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s = rho.mat.psd_sqrt().expect("density matrices are PSD");
    let inner = (s * sigma.mat * s).hermitian_part();
    let eig = inner.herm_eig().expect("Hermitian by construction");
    let root: f64 = eig.values().iter().map(|&x| libm::sqrt(x.max(0.0))).sum();
    (root * root).clamp(0.0, 1.0)
}

/// A finite-outcome measurement: PSD elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
    labels: Vec<Outcome>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>, labels: Vec<Outcome>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements"));
        }
        if elements.len() != labels.len() {
            return Err(Error::InvalidPovm("label count differs from element count"));
        }
        let dim = elements[0].dim();
        let mut total = CMat::zeros(dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::InvalidPovm("elements of different dimension"));
            }
            let eig = e.herm_eig().map_err(|_| Error::InvalidPovm("element not Hermitian"))?;
            if eig.min_value() < -HERM_TOL {
                return Err(Error::InvalidPovm("element not positive semidefinite"));
            }
            total = total + *e;
        }
        if total.max_abs_diff(&CMat::identity(dim)) > HERM_TOL {
            return Err(Error::InvalidPovm("elements do not sum to the identity"));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPovm("duplicate outcome label"));
        }
        Ok(Povm { elements, labels })
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, label: Outcome) -> Option<&CMat> {
        self.labels.iter().position(|&l| l == label).map(|k| &self.elements[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, &CMat)> {
        self.labels.iter().copied().zip(self.elements.iter())
    }

    /// The measurement preceded by the unitary `u`: elements `U† M U`.
    pub fn pulled_back(&self, u: &CMat) -> Povm {
        let adj = u.adjoint();
        Povm {
            elements: self.elements.iter().map(|m| adj * *m * *u).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Builds a diagonal projector from a list of basis indices; used by
/// classical embeddings.
pub(crate) fn basis_projector(dim: usize, indices: impl IntoIterator<Item = usize>) -> CMat {
    let mut m = CMat::zeros(dim);
    for k in indices {
        m[(k, k)] = c(1.0, 0.0);
    }
    m
}
