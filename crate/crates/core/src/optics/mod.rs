//! Jones-calculus model of the photonic apparatus.
//!
//! Polarization `H` is `|0>` and `V` is `|1>`. A half-wave plate with its
//! fast axis at angle `θ` from horizontal acts as
//! `[[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]]` and a phase plate as
//! `diag(1, e^{iφ})`. Every table check and every simulated event uses this
//! convention.

pub mod experiment;
pub mod tables;
pub mod tomography;

use crate::qmath::{c, CMat, C64, ONE, ZERO};

/// The convention string printed with every settings report.
pub const CONVENTION: &str =
    "H=|0>, V=|1>; HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]; phase plate(p) = diag(1, exp(i p))";

/// Standard deviation of motorized plate settings, degrees.
pub const MOTORIZED_JITTER_DEG: f64 = 0.02;
/// Standard deviation of Alice's manually set plates, degrees.
pub const MANUAL_JITTER_DEG: f64 = 0.5;

/// 2x2 Jones matrix stored row-major.
pub type Jones = [[C64; 2]; 2];

pub(crate) const JONES_IDENTITY: Jones = [[ONE, ZERO], [ZERO, ONE]];

/// Half-wave plate at `theta` radians.
pub(crate) fn hwp_jones(theta: f64) -> Jones {
    let (s, co) = libm::sincos(2.0 * theta);
    [[c(co, 0.0), c(s, 0.0)], [c(s, 0.0), c(-co, 0.0)]]
}

/// Phase plate with retardance `phi` radians.
pub(crate) fn phase_jones(phi: f64) -> Jones {
    let (s, co) = libm::sincos(phi);
    [[ONE, ZERO], [ZERO, c(co, s)]]
}

pub(crate) fn jones_mul(a: &Jones, b: &Jones) -> Jones {
    core::array::from_fn(|r| core::array::from_fn(|k| a[r][0] * b[0][k] + a[r][1] * b[1][k]))
}

pub(crate) fn jones_to_cmat(j: &Jones) -> CMat {
    CMat::from_fn(2, |r, k| j[r][k])
}

/// `(a ⊗ b) ψ` on a two-qubit ket.
pub(crate) fn apply_local(a: &Jones, b: &Jones, psi: &[C64; 4]) -> [C64; 4] {
    let mut out = [ZERO; 4];
    for (r, o) in out.iter_mut().enumerate() {
        let (r0, r1) = (r >> 1, r & 1);
        for (k, p) in psi.iter().enumerate() {
            *o += a[r0][k >> 1] * b[r1][k & 1] * p;
        }
    }
    out
}

/// Half-wave plate with its fast axis at `theta` radians.
pub fn hwp(theta: f64) -> CMat {
    jones_to_cmat(&hwp_jones(theta))
}

/// Phase plate adding phase `phi` radians to `V`.
pub fn phase_shifter(phi: f64) -> CMat {
    jones_to_cmat(&phase_jones(phi))
}

/// Kind of polarization element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    HalfWave,
    PhaseShifter,
}

/// A plate with its nominal setting and the standard deviation of its
/// setting error, both in degrees. For a phase plate the setting is the
/// retardance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlateSetting {
    pub element: Element,
    pub degrees: f64,
    pub jitter_deg: f64,
}

impl WavePlateSetting {
    pub fn new(element: Element, degrees: f64, jitter_deg: f64) -> crate::Result<Self> {
        if !(jitter_deg >= 0.0) || !jitter_deg.is_finite() {
            return Err(crate::Error::OutOfRange { name: "jitter", value: jitter_deg });
        }
        if !degrees.is_finite() {
            return Err(crate::Error::NonFinite);
        }
        Ok(WavePlateSetting { element, degrees, jitter_deg })
    }

    /// Jones matrix at a given deviation (degrees) from the nominal setting.
    pub(crate) fn jones_at(&self, delta_deg: f64) -> Jones {
        let rad = (self.degrees + delta_deg).to_radians();
        match self.element {
            Element::HalfWave => hwp_jones(rad),
            Element::PhaseShifter => phase_jones(rad),
        }
    }

    pub fn matrix(&self) -> CMat {
        jones_to_cmat(&self.jones_at(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{pauli_x, pauli_z, CVec};
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8, PI};

    #[test]
    fn elementary_plates() {
        assert!(hwp(0.0).eq_up_to_phase(&pauli_z(), 1e-12));
        assert!(hwp(PI / 4.0).eq_up_to_phase(&pauli_x(), 1e-12));
        assert!(phase_shifter(PI).eq_up_to_phase(&pauli_z(), 1e-12));
        let d = hwp(FRAC_PI_8).apply(&CVec::basis(2, 0));
        assert!((d[0].re - FRAC_1_SQRT_2).abs() < 1e-12 && (d[1].re - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn plates_are_unitary() {
        for k in 0..50 {
            let t = 0.37 * k as f64;
            for u in [hwp(t), phase_shifter(t), hwp(t) * phase_shifter(1.3 * t)] {
                assert!((u * u.adjoint()).max_abs_diff(&CMat::identity(2)) < 1e-12);
            }
        }
    }

    #[test]
    fn local_application_matches_tensor_product() {
        let a = jones_mul(&hwp_jones(0.3), &phase_jones(1.1));
        let b = hwp_jones(-0.8);
        let psi = [c(0.1, 0.2), c(-0.5, 0.3), c(0.7, 0.0), c(0.2, -0.4)];
        let out = apply_local(&a, &b, &psi);
        let full = jones_to_cmat(&a).tensor(&jones_to_cmat(&b)).unwrap().apply(&CVec::from_slice(&psi));
        for k in 0..4 {
            assert!((out[k] - full[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn jitter_must_be_non_negative() {
        assert!(WavePlateSetting::new(Element::HalfWave, 22.5, -0.1).is_err());
        assert!(WavePlateSetting::new(Element::HalfWave, 22.5, f64::NAN).is_err());
        assert!(WavePlateSetting::new(Element::PhaseShifter, 180.0, 0.0).unwrap().matrix().eq_up_to_phase(&pauli_z(), 1e-12));
    }
}
