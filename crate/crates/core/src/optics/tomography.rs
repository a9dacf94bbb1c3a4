//! Two-qubit state tomography from the nine local Pauli settings.

use rand_distr::{Binomial, Distribution};

use super::experiment::mixing_weights;
use crate::error::{Error, Result};
use crate::qmath::{paulis, CMat};
use crate::rng::Rng;
use crate::states::{bell_state, fidelity, isotropic, Bell, DensityMatrix};

/// Coincidence counts `counts[i][j][k]` for the setting `σ_{i+1} ⊗ σ_{j+1}`
/// (`X, Y, Z`); outcome `k = 2 s_b + s_c` with `s = 0` for eigenvalue `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomographyData {
    pub events_per_setting: u64,
    pub counts: [[[u64; 4]; 3]; 3],
}

/// Two-point correlators `t[i][j] = <σ_i ⊗ σ_j>` with `σ_0 = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlators(pub [[f64; 4]; 4]);

fn eigenprojector(pauli: usize, sign: usize) -> CMat {
    let s = if sign == 0 { 1.0 } else { -1.0 };
    (CMat::identity(2) + paulis()[pauli].scale_re(s)).scale_re(0.5)
}

/// Outcome probabilities of every setting.
pub fn setting_probabilities(rho: &DensityMatrix) -> [[[f64; 4]; 3]; 3] {
    core::array::from_fn(|i| {
        core::array::from_fn(|j| {
            core::array::from_fn(|k| {
                let p = eigenprojector(i + 1, k >> 1).tensor(&eigenprojector(j + 1, k & 1)).expect("2x2 factors");
                rho.mat().trace_product_re(&p).max(0.0)
            })
        })
    })
}

fn correlators_from(freq: &[[[f64; 4]; 3]; 3]) -> Correlators {
    let sign = |k: usize, bob: bool, charlie: bool| -> f64 {
        let sb = if bob && (k >> 1) == 1 { -1.0 } else { 1.0 };
        let sc = if charlie && (k & 1) == 1 { -1.0 } else { 1.0 };
        sb * sc
    };
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            let f = &freq[i][j];
            t[i + 1][j + 1] = (0..4).map(|k| sign(k, true, true) * f[k]).sum();
            // Single-party marginals: averaged over the three settings that fix the party's Pauli.
            t[i + 1][0] += (0..4).map(|k| sign(k, true, false) * f[k]).sum::<f64>() / 3.0;
            t[0][j + 1] += (0..4).map(|k| sign(k, false, true) * f[k]).sum::<f64>() / 3.0;
        }
    }
    Correlators(t)
}

impl TomographyData {
    /// Multinomial sampling of every setting.
    pub fn simulate(rho: &DensityMatrix, events_per_setting: u64, rng: &mut Rng) -> Result<Self> {
        if events_per_setting == 0 {
            return Err(Error::OutOfRange { name: "events per setting", value: 0.0 });
        }
        let probs = setting_probabilities(rho);
        let mut counts = [[[0u64; 4]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut left = events_per_setting;
                let mut mass = 1.0;
                for k in 0..3 {
                    let q = (probs[i][j][k] / mass).clamp(0.0, 1.0);
                    let n = if left == 0 || q == 0.0 {
                        0
                    } else {
                        Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
                    };
                    counts[i][j][k] = n;
                    left -= n;
                    mass = (mass - probs[i][j][k]).max(1e-300);
                }
                counts[i][j][3] = left;
            }
        }
        Ok(TomographyData { events_per_setting, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().sum()
    }

    pub fn correlators(&self) -> Correlators {
        let n = self.events_per_setting as f64;
        correlators_from(&self.counts.map(|row| row.map(|c| c.map(|k| k as f64 / n))))
    }
}

/// Correlators in the limit of infinitely many events.
pub fn exact_correlators(rho: &DensityMatrix) -> Correlators {
    correlators_from(&setting_probabilities(rho))
}

impl Correlators {
    /// Linear inversion `¼ Σ t_ij σ_i ⊗ σ_j`; Hermitian with unit trace but
    /// not necessarily positive.
    pub fn linear_inversion(&self) -> CMat {
        let p = paulis();
        let mut m = CMat::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                m = m + p[i].tensor(&p[j]).expect("2x2 factors").scale_re(self.0[i][j] / 4.0);
            }
        }
        m
    }

    /// Weighted combination of several correlator sets.
    pub fn combine(parts: &[(f64, Correlators)]) -> Correlators {
        let mut t = [[0.0; 4]; 4];
        for (w, c) in parts {
            for i in 0..4 {
                for j in 0..4 {
                    t[i][j] += w * c.0[i][j];
                }
            }
        }
        Correlators(t)
    }
}

/// Nearest density matrix by clipping negative eigenvalues and renormalizing.
/// Leaves an already valid matrix unchanged.
pub fn project_psd(m: &CMat) -> Result<DensityMatrix> {
    let eig = m.hermitian_part().herm_eig()?;
    if eig.min_value() >= 0.0 {
        return DensityMatrix::new(m.hermitian_part());
    }
    let total: f64 = eig.values().iter().map(|&x| x.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::NotPsd(eig.min_value()));
    }
    DensityMatrix::new(eig.map_values(|x| x.max(0.0) / total))
}

/// A reconstructed state.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// The linear-inversion estimate before projection.
    pub linear: CMat,
    pub state: DensityMatrix,
    /// Whether eigenvalue clipping changed the estimate.
    pub projected: bool,
    /// Fidelity with the reference state.
    pub fidelity: f64,
}

/// Linear inversion of `c`, projection, and fidelity with `reference`.
pub fn reconstruct(c: &Correlators, reference: &DensityMatrix) -> Result<Reconstruction> {
    let linear = c.linear_inversion();
    let projected = linear.herm_eig()?.min_value() < 0.0;
    let state = project_psd(&linear)?;
    let fidelity = fidelity(&state, reference);
    Ok(Reconstruction { linear, state, projected, fidelity })
}

/// Simulated tomography of `rho` with its fidelity to `rho`.
pub fn tomography(rho: &DensityMatrix, events_per_setting: u64, rng: &mut Rng) -> Result<Reconstruction> {
    let data = TomographyData::simulate(rho, events_per_setting, rng)?;
    reconstruct(&data.correlators(), rho)
}

/// Tomography with exact outcome probabilities.
pub fn tomography_exact(rho: &DensityMatrix) -> Result<Reconstruction> {
    reconstruct(&exact_correlators(rho), rho)
}

/// The isotropic state at visibility `v` reconstructed from separate
/// tomographies of the four Bell states, recombined afterwards with the
/// mixing weights; fidelity is with the ideal isotropic state.
pub fn recombined_isotropic(v: f64, events_per_setting: u64, rng: &mut Rng) -> Result<Reconstruction> {
    Ok(recombined_isotropic_data(v, events_per_setting, rng)?.1)
}

/// [`recombined_isotropic`] together with the counts of each Bell state, in
/// the order of [`Bell::ALL`].
pub fn recombined_isotropic_data(
    v: f64,
    events_per_setting: u64,
    rng: &mut Rng,
) -> Result<(alloc::vec::Vec<TomographyData>, Reconstruction)> {
    let target = isotropic(v)?;
    let weights = mixing_weights(v);
    let mut data = alloc::vec::Vec::new();
    let mut parts = alloc::vec::Vec::new();
    for (b, w) in Bell::ALL.iter().zip(weights) {
        let d = TomographyData::simulate(&bell_state(*b), events_per_setting, rng)?;
        parts.push((w, d.correlators()));
        data.push(d);
    }
    Ok((data, reconstruct(&Correlators::combine(&parts), &target)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::THETA_STAR;
    use crate::rng::stream;
    use crate::states::partial_iso;

    #[test]
    fn exact_inversion_recovers_the_state() {
        for rho in [isotropic(0.47).unwrap(), partial_iso(0.72, THETA_STAR).unwrap(), bell_state(Bell::PsiMinus)] {
            let r = tomography_exact(&rho).unwrap();
            assert!(r.linear.max_abs_diff(rho.mat()) < 1e-12);
            assert!((r.fidelity - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn counts_add_up() {
        let d = TomographyData::simulate(&isotropic(0.3).unwrap(), 1000, &mut stream(1, 2)).unwrap();
        assert_eq!(d.total(), 9000);
        for row in &d.counts {
            for c in row {
                assert_eq!(c.iter().sum::<u64>(), 1000);
            }
        }
    }

    #[test]
    fn projection_is_identity_on_valid_states() {
        let rho = isotropic(0.4).unwrap();
        assert!(project_psd(rho.mat()).unwrap().mat().max_abs_diff(rho.mat()) < 1e-12);
        let mut bad = *bell_state(Bell::PhiPlus).mat();
        bad = bad.scale_re(1.1) - CMat::identity(4).scale_re(0.025);
        let fixed = project_psd(&bad).unwrap();
        assert!(fixed.min_eigenvalue() >= -1e-12);
    }
}
