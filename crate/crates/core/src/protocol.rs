//! Exact evaluation of the deterministic and stochastic secret-sharing tasks.
//!
//! Inputs are indexed `x = x0 + 2 x1` (and likewise `y`). Alice's input `z`
//! selects which bit pair carries the secret. In the deterministic task the
//! correct answer is `x_z ⊕ y_z`; in the stochastic task a round with
//! `x_z ⊕ y_z = 1` carries the secret `x_z̄ ⊕ y_z̄` and every other round
//! should be flagged with [`Outcome::Bottom`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::qmath::{pauli_x, pauli_z, CMat, HERM_TOL};
use crate::states::{isotropic, partial_iso, Bell, DensityMatrix, Outcome, Povm};

/// Optimal secret-sharing angle for the partially entangled family.
pub const THETA_STAR: f64 = 0.2356;

/// Unassisted (classical or qubit) bound on `S`.
pub const DETERMINISTIC_BOUND: f64 = 0.75;
/// Unassisted bound on `R`.
pub const STOCHASTIC_BOUND: f64 = 0.625;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Deterministic,
    Stochastic,
}

impl Task {
    pub fn alphabet(self) -> usize {
        match self {
            Task::Deterministic => 2,
            Task::Stochastic => 3,
        }
    }

    pub fn outcomes(self) -> &'static [Outcome] {
        &Outcome::ALL[..self.alphabet()]
    }

    /// Score above which an entanglement-assisted protocol beats every
    /// unassisted one.
    pub fn unassisted_bound(self) -> f64 {
        match self {
            Task::Deterministic => DETERMINISTIC_BOUND,
            Task::Stochastic => STOCHASTIC_BOUND,
        }
    }
}

#[inline]
pub fn bit(input: usize, k: usize) -> u8 {
    ((input >> k) & 1) as u8
}

/// True for stochastic rounds that carry the secret (`x_z ⊕ y_z = 1`).
#[inline]
pub fn is_secret_round(x: usize, y: usize, z: usize) -> bool {
    bit(x, z) ^ bit(y, z) == 1
}

/// The outcome that counts as a success for inputs `(x, y, z)`.
pub fn correct_outcome(task: Task, x: usize, y: usize, z: usize) -> Outcome {
    match task {
        Task::Deterministic => Outcome::from_bit(bit(x, z) ^ bit(y, z)),
        Task::Stochastic => {
            if is_secret_round(x, y, z) {
                Outcome::from_bit(bit(x, 1 - z) ^ bit(y, 1 - z))
            } else {
                Outcome::Bottom
            }
        }
    }
}

/// A sender's encoding: one local channel (Kraus list of 2x2 operators) per input.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    channels: [Vec<CMat>; 4],
}

impl Encoding {
    pub fn new(channels: [Vec<CMat>; 4]) -> Result<Self> {
        for kraus in &channels {
            if kraus.is_empty() {
                return Err(Error::InvalidEncoding("empty Kraus list"));
            }
            let mut total = CMat::zeros(2);
            for k in kraus {
                if k.dim() != 2 {
                    return Err(Error::InvalidEncoding("Kraus operators must be 2x2"));
                }
                total = total + k.adjoint() * *k;
            }
            if total.max_abs_diff(&CMat::identity(2)) > HERM_TOL {
                return Err(Error::InvalidEncoding("channel is not trace preserving"));
            }
        }
        Ok(Encoding { channels })
    }

    /// One unitary per input.
    pub fn unitary(us: [CMat; 4]) -> Result<Self> {
        Self::new(us.map(|u| vec![u]))
    }

    pub fn kraus(&self, input: usize) -> &[CMat] {
        &self.channels[input]
    }
}

/// `σx^b0 σz^b1` for the input `b = b0 + 2 b1`.
pub fn canonical_unitary(input: usize) -> CMat {
    let mut u = CMat::identity(2);
    if bit(input, 0) == 1 {
        u = u * pauli_x();
    }
    if bit(input, 1) == 1 {
        u = u * pauli_z();
    }
    u
}

/// Bob's and Charlie's dense-coding encodings (they are identical).
pub fn canonical_encodings() -> (Encoding, Encoding) {
    let enc = Encoding::unitary([0, 1, 2, 3].map(canonical_unitary)).expect("Pauli products are unitary");
    (enc.clone(), enc)
}

/// Alice's measurement for `z = 0` and `z = 1`.
pub type MeasurementPair = [Povm; 2];

/// Parity measurements `σz⊗σz` (`z = 0`) and `σx⊗σx` (`z = 1`).
pub fn product_measurements() -> MeasurementPair {
    use Bell::*;
    let labels = vec![Outcome::Zero, Outcome::One];
    let z0 = Povm::new(
        vec![PhiPlus.projector() + PhiMinus.projector(), PsiPlus.projector() + PsiMinus.projector()],
        labels.clone(),
    );
    let z1 = Povm::new(
        vec![PhiPlus.projector() + PsiPlus.projector(), PhiMinus.projector() + PsiMinus.projector()],
        labels,
    );
    [z0.expect("parity projectors"), z1.expect("parity projectors")]
}

/// Three-outcome partial Bell analysers.
///
/// `z = 0` resolves `Ψ+ → 0`, `Ψ- → 1` and lumps `Φ+ + Φ- → ⊥`; `z = 1`
/// resolves `Φ- → 0`, `Ψ- → 1` and lumps `Φ+ + Ψ+ → ⊥`. This labelling is
/// the unique one under which the ideal protocol scores `R_scrt = R_ctrl = 1`.
pub fn partial_bell_measurements() -> MeasurementPair {
    use Bell::*;
    let labels = vec![Outcome::Zero, Outcome::One, Outcome::Bottom];
    let z0 = Povm::new(
        vec![PsiPlus.projector(), PsiMinus.projector(), PhiPlus.projector() + PhiMinus.projector()],
        labels.clone(),
    );
    let z1 = Povm::new(
        vec![PhiMinus.projector(), PsiMinus.projector(), PhiPlus.projector() + PsiPlus.projector()],
        labels,
    );
    [z0.expect("Bell projectors"), z1.expect("Bell projectors")]
}

/// Canonical decoding measurement for a task.
pub fn canonical_measurements(task: Task) -> MeasurementPair {
    match task {
        Task::Deterministic => product_measurements(),
        Task::Stochastic => partial_bell_measurements(),
    }
}

/// Conditional outcome distribution `p(a | x, y, z)`, stored as `p[z][x][y][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    task: Task,
    p: [[[[f64; 3]; 4]; 4]; 2],
}

impl Behavior {
    /// Validates non-negativity (to `-1e-12`) and normalization (to `1e-9`).
    pub fn new(task: Task, p: [[[[f64; 3]; 4]; 4]; 2]) -> Result<Self> {
        let n = task.alphabet();
        for row in p.iter().flat_map(|z| z.iter()).flat_map(|x| x.iter()) {
            if row[n..].iter().any(|&q| q != 0.0) {
                return Err(Error::AlphabetMismatch);
            }
            if row[..n].iter().any(|&q| !(q >= -1e-12)) {
                return Err(Error::OutOfRange { name: "probability", value: row.iter().copied().fold(f64::NAN, f64::min) });
            }
            let total: f64 = row[..n].iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::OutOfRange { name: "row sum", value: total });
            }
        }
        Ok(Behavior { task, p })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn prob(&self, a: Outcome, x: usize, y: usize, z: usize) -> f64 {
        self.p[z][x][y][a.index()]
    }

    /// Raw table `p[z][x][y][a]`.
    pub fn table(&self) -> &[[[[f64; 3]; 4]; 4]; 2] {
        &self.p
    }

    /// `p'(a|x,y,z) = p(a | σ(x), σ(y), ζ(z))` for one of the task's input symmetries.
    pub fn permuted(&self, sym: InputSymmetry) -> Behavior {
        let mut p = [[[[0.0; 3]; 4]; 4]; 2];
        for z in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    let (sx, sy, sz) = sym.apply(x, y, z);
                    p[z][x][y] = self.p[sz][sx][sy];
                }
            }
        }
        Behavior { task: self.task, p }
    }
}

/// Input relabellings that leave both tasks' scores invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputSymmetry {
    /// Simultaneous flip of `x0` and `y0`.
    FlipFirst,
    /// Simultaneous flip of `x1` and `y1`.
    FlipSecond,
    /// Simultaneous swaps `x0 ↔ x1`, `y0 ↔ y1` (with `z ↔ z̄`).
    Swap,
}

impl InputSymmetry {
    pub const ALL: [InputSymmetry; 3] = [InputSymmetry::FlipFirst, InputSymmetry::FlipSecond, InputSymmetry::Swap];

    pub fn apply(self, x: usize, y: usize, z: usize) -> (usize, usize, usize) {
        let swap = |b: usize| ((b & 1) << 1) | (b >> 1);
        match self {
            InputSymmetry::FlipFirst => (x ^ 1, y ^ 1, z),
            InputSymmetry::FlipSecond => (x ^ 2, y ^ 2, z),
            InputSymmetry::Swap => (swap(x), swap(y), 1 - z),
        }
    }
}

/// `p(a|x,y,z) = Tr[(Λx ⊗ Λy)(ρ) M_{a|z}]`.
pub fn evaluate(
    rho: &DensityMatrix,
    bob: &Encoding,
    charlie: &Encoding,
    meas: &MeasurementPair,
    task: Task,
) -> Result<Behavior> {
    for povm in meas {
        if povm.elements()[0].dim() != 4 {
            return Err(Error::InvalidPovm("decoding measurement must act on two qubits"));
        }
        let mut labels: Vec<Outcome> = povm.labels().to_vec();
        labels.sort();
        if labels != task.outcomes() {
            return Err(Error::AlphabetMismatch);
        }
    }
    let mut p = [[[[0.0; 3]; 4]; 4]; 2];
    for x in 0..4 {
        for y in 0..4 {
            let out = apply_channels(rho.mat(), bob.kraus(x), charlie.kraus(y));
            for (z, povm) in meas.iter().enumerate() {
                for (label, m) in povm.iter() {
                    p[z][x][y][label.index()] = out.trace_product_re(m);
                }
            }
        }
    }
    Behavior::new(task, p)
}

/// `(Λ ⊗ Γ)(ρ)` for Kraus lists on either qubit.
pub fn apply_channels(rho: &CMat, bob: &[CMat], charlie: &[CMat]) -> CMat {
    let mut out = CMat::zeros(4);
    for kb in bob {
        for kc in charlie {
            let k = kb.tensor(kc).expect("Kraus operators are 2x2");
            out = out + rho.conjugate_by(&k);
        }
    }
    out
}

/// Evaluates the canonical protocol of a task on `rho`.
pub fn evaluate_canonical(rho: &DensityMatrix, task: Task) -> Behavior {
    let (b, c) = canonical_encodings();
    evaluate(rho, &b, &c, &canonical_measurements(task), task).expect("canonical protocol is valid")
}

/// Task scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scores {
    /// Average success probability over all 32 input triples.
    Deterministic { s: f64 },
    /// Secret and control rates and their mean `R`.
    Stochastic { scrt: f64, ctrl: f64, r: f64 },
}

impl Scores {
    /// `S` for the deterministic task and `R` for the stochastic one.
    pub fn value(&self) -> f64 {
        match *self {
            Scores::Deterministic { s } => s,
            Scores::Stochastic { r, .. } => r,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Scores::Deterministic { .. } => Task::Deterministic,
            Scores::Stochastic { .. } => Task::Stochastic,
        }
    }

    /// Largest absolute difference between matching fields.
    pub fn max_abs_diff(&self, other: &Scores) -> f64 {
        match (*self, *other) {
            (Scores::Deterministic { s: a }, Scores::Deterministic { s: b }) => (a - b).abs(),
            (
                Scores::Stochastic { scrt: a1, ctrl: a2, r: a3 },
                Scores::Stochastic { scrt: b1, ctrl: b2, r: b3 },
            ) => (a1 - b1).abs().max((a2 - b2).abs()).max((a3 - b3).abs()),
            _ => f64::INFINITY,
        }
    }
}

fn score_over(b: &Behavior, zs: &[usize]) -> Scores {
    let mut hit = [0.0f64; 2];
    let mut count = [0usize; 2];
    for &z in zs {
        for x in 0..4 {
            for y in 0..4 {
                let role = usize::from(b.task == Task::Stochastic && !is_secret_round(x, y, z));
                hit[role] += b.prob(correct_outcome(b.task, x, y, z), x, y, z);
                count[role] += 1;
            }
        }
    }
    match b.task {
        Task::Deterministic => Scores::Deterministic { s: hit[0] / count[0] as f64 },
        Task::Stochastic => {
            let scrt = hit[0] / count[0] as f64;
            let ctrl = hit[1] / count[1] as f64;
            Scores::Stochastic { scrt, ctrl, r: 0.5 * (scrt + ctrl) }
        }
    }
}

/// Scores of a behavior.
pub fn score(b: &Behavior) -> Scores {
    score_over(b, &[0, 1])
}

/// Scores restricted to a single value of `z` (each averaged over that `z`'s rounds).
pub fn score_by_z(b: &Behavior) -> [Scores; 2] {
    [score_over(b, &[0]), score_over(b, &[1])]
}

/// State families used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `v Φ+ + (1 - v) I/4`.
    Isotropic { v: f64 },
    /// `v |φθ><φθ| + (1 - v) I/4`.
    Partial { v: f64, theta: f64 },
    /// `|φθ><φθ|`.
    Pure { theta: f64 },
}

impl Family {
    pub fn state(&self) -> Result<DensityMatrix> {
        match *self {
            Family::Isotropic { v } => isotropic(v),
            Family::Partial { v, theta } => partial_iso(v, theta),
            Family::Pure { theta } => partial_iso(1.0, theta),
        }
    }

    pub fn visibility(&self) -> f64 {
        match *self {
            Family::Isotropic { v } | Family::Partial { v, .. } => v,
            Family::Pure { .. } => 1.0,
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            Family::Isotropic { .. } => FRAC_PI_4,
            Family::Partial { theta, .. } | Family::Pure { theta } => theta,
        }
    }

    /// The same family at another visibility; pure states have no visibility knob.
    pub fn with_visibility(&self, v: f64) -> Result<Family> {
        match *self {
            Family::Isotropic { .. } => Ok(Family::Isotropic { v }),
            Family::Partial { theta, .. } => Ok(Family::Partial { v, theta }),
            Family::Pure { .. } => Err(Error::InvalidArgument("pure family has no visibility parameter")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Isotropic { .. } => "isotropic",
            Family::Partial { .. } => "partial",
            Family::Pure { .. } => "pure",
        }
    }
}

/// Closed-form scores of the canonical protocol on a family.
pub fn closed_form(family: &Family, task: Task) -> Result<Scores> {
    family.state()?;
    Ok(match (task, *family) {
        (Task::Deterministic, Family::Isotropic { v }) => Scores::Deterministic { s: (1.0 + v) / 2.0 },
        (Task::Deterministic, Family::Pure { theta }) => {
            Scores::Deterministic { s: (3.0 + libm::sin(2.0 * theta)) / 4.0 }
        }
        (Task::Deterministic, Family::Partial { v, theta }) => {
            Scores::Deterministic { s: (2.0 + v * (1.0 + libm::sin(2.0 * theta))) / 4.0 }
        }
        (Task::Stochastic, Family::Isotropic { v }) => Scores::Stochastic {
            scrt: (1.0 + 3.0 * v) / 4.0,
            ctrl: (1.0 + v) / 2.0,
            r: (3.0 + 5.0 * v) / 8.0,
        },
        (Task::Stochastic, f) => {
            // |φθ> = α Φ+ + β Φ- with α² = (1 + sin 2θ)/2.
            let v = f.visibility();
            let alpha2 = (1.0 + libm::sin(2.0 * f.theta())) / 2.0;
            let scrt = v * alpha2 + (1.0 - v) / 4.0;
            let ctrl = v * (1.0 + alpha2) / 2.0 + (1.0 - v) / 2.0;
            Scores::Stochastic { scrt, ctrl, r: 0.5 * (scrt + ctrl) }
        }
    })
}

/// Smallest visibility at which the canonical protocol's score reaches
/// `target`, by bisection on exact evaluation to `|Δv| <= 1e-6`.
///
/// Fails with [`Error::NotMonotone`] if the score is not non-decreasing in
/// `v` on a 41-point grid and with [`Error::NoCrossing`] if `target` is not
/// bracketed by the scores at `v = 0` and `v = 1`.
pub fn threshold(family: &Family, task: Task, target: f64) -> Result<f64> {
    let score_at = |v: f64| -> Result<f64> {
        Ok(score(&evaluate_canonical(&family.with_visibility(v)?.state()?, task)).value())
    };
    let mut prev = score_at(0.0)?;
    for k in 1..=40 {
        let v = k as f64 / 40.0;
        let cur = score_at(v)?;
        if cur < prev - 1e-12 {
            return Err(Error::NotMonotone(v));
        }
        prev = cur;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(score_at(lo)? < target && score_at(hi)? > target) {
        return Err(Error::NoCrossing);
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if score_at(mid)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{c, pauli_y};
    use crate::states::bell_state;
    use proptest::prelude::*;

    #[test]
    fn canonical_unitaries() {
        assert_eq!(canonical_unitary(0), CMat::identity(2));
        // x = (1, 1): σx σz = -i σy
        let xz = canonical_unitary(3);
        assert!(xz.max_abs_diff(&pauli_y().scale(c(0.0, -1.0))) < 1e-15);
    }

    #[test]
    fn bob_flip_maps_phi_plus_to_psi_plus() {
        let (b, c) = canonical_encodings();
        let out = apply_channels(&Bell::PhiPlus.projector(), b.kraus(1), c.kraus(0));
        assert!(out.max_abs_diff(&Bell::PsiPlus.projector()) < 1e-15);
    }

    #[test]
    fn ideal_inputs_produce_bell_states() {
        let (b, c) = canonical_encodings();
        for x in 0..4 {
            for y in 0..4 {
                let out = apply_channels(&Bell::PhiPlus.projector(), b.kraus(x), c.kraus(y));
                let expected = Bell::from_flips(bit(x, 0) ^ bit(y, 0), bit(x, 1) ^ bit(y, 1));
                assert!(out.max_abs_diff(&expected.projector()) < 1e-15);
            }
        }
    }

    #[test]
    fn measurement_elements() {
        let [z0, z1] = product_measurements();
        let phi = Bell::PhiPlus.projector() + Bell::PhiMinus.projector();
        assert!(z0.element(Outcome::Zero).unwrap().max_abs_diff(&phi) < 1e-15);
        let e = Bell::PhiPlus.projector() + Bell::PsiPlus.projector();
        assert!(z1.element(Outcome::Zero).unwrap().max_abs_diff(&e) < 1e-15);
        for povm in [&z0, &z1] {
            let sum = povm.elements().iter().fold(CMat::zeros(4), |a, m| a + *m);
            assert!(sum.max_abs_diff(&CMat::identity(4)) < 1e-15);
        }
    }

    #[test]
    fn partial_bell_elements_are_orthogonal_projectors() {
        let [z0, z1] = partial_bell_measurements();
        assert!(z0.element(Outcome::Bottom).unwrap().max_abs_diff(&phi_pm()) < 1e-15);
        for povm in [&z0, &z1] {
            for (i, a) in povm.elements().iter().enumerate() {
                assert!((*a * *a).max_abs_diff(a) < 1e-15);
                for b in &povm.elements()[i + 1..] {
                    assert!((*a * *b).max_abs() < 1e-15);
                }
            }
        }
    }

    fn phi_pm() -> CMat {
        Bell::PhiPlus.projector() + Bell::PhiMinus.projector()
    }

    /// Exhaustive search over the label assignments of both analysers.
    #[test]
    fn analyser_labels_are_pinned_by_the_ideal_score() {
        use Bell::*;
        let sets = [
            [PsiPlus.projector(), PsiMinus.projector(), phi_pm()],
            [PhiMinus.projector(), PsiMinus.projector(), PhiPlus.projector() + PsiPlus.projector()],
        ];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let (b, c) = canonical_encodings();
        let mut winners = Vec::new();
        for p0 in perms {
            for p1 in perms {
                let mk = |set: &[CMat; 3], p: [usize; 3]| {
                    Povm::new(set.to_vec(), p.iter().map(|&k| Outcome::ALL[k]).collect()).unwrap()
                };
                let meas = [mk(&sets[0], p0), mk(&sets[1], p1)];
                let beh = evaluate(&bell_state(PhiPlus), &b, &c, &meas, Task::Stochastic).unwrap();
                if (score(&beh).value() - 1.0).abs() < 1e-12 {
                    winners.push((p0, p1));
                }
            }
        }
        assert_eq!(winners, vec![([0, 1, 2], [0, 1, 2])]);
    }

    #[test]
    fn ideal_protocols_are_perfect() {
        let phi = bell_state(Bell::PhiPlus);
        let det = evaluate_canonical(&phi, Task::Deterministic);
        for z in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    let a = correct_outcome(Task::Deterministic, x, y, z);
                    assert!((det.prob(a, x, y, z) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!((score(&det).value() - 1.0).abs() < 1e-12);
        match score(&evaluate_canonical(&phi, Task::Stochastic)) {
            Scores::Stochastic { scrt, ctrl, .. } => {
                assert!((scrt - 1.0).abs() < 1e-12 && (ctrl - 1.0).abs() < 1e-12)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn maximally_mixed_gives_trace_over_four() {
        let mixed = DensityMatrix::maximally_mixed();
        let task = Task::Stochastic;
        let beh = evaluate_canonical(&mixed, task);
        let meas = canonical_measurements(task);
        for z in 0..2 {
            for (a, m) in meas[z].iter() {
                let expected = m.trace().re / 4.0;
                assert!((beh.prob(a, 2, 1, z) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn control_probability_at_047() {
        let beh = evaluate_canonical(&isotropic(0.47).unwrap(), Task::Stochastic);
        assert!((beh.prob(Outcome::Bottom, 0, 0, 0) - 0.735).abs() < 1e-12);
    }

    #[test]
    fn uniform_guessing_scores_half() {
        let p = [[[[0.5, 0.5, 0.0]; 4]; 4]; 2];
        let b = Behavior::new(Task::Deterministic, p).unwrap();
        assert_eq!(score(&b), Scores::Deterministic { s: 0.5 });
    }

    #[test]
    fn behavior_validation() {
        let p = [[[[0.5, 0.5, 0.1]; 4]; 4]; 2];
        assert_eq!(Behavior::new(Task::Deterministic, p), Err(Error::AlphabetMismatch));
        let p = [[[[0.6, 0.5, 0.0]; 4]; 4]; 2];
        assert!(Behavior::new(Task::Deterministic, p).is_err());
    }

    #[test]
    fn evaluate_rejects_mismatched_alphabet() {
        let (b, c) = canonical_encodings();
        let r = evaluate(&bell_state(Bell::PhiPlus), &b, &c, &product_measurements(), Task::Stochastic);
        assert_eq!(r.unwrap_err(), Error::AlphabetMismatch);
    }

    #[test]
    fn encoding_validation() {
        let bad = [CMat::identity(2).scale_re(0.5), CMat::identity(2), CMat::identity(2), CMat::identity(2)];
        assert!(matches!(Encoding::unitary(bad), Err(Error::InvalidEncoding(_))));
        // Fully dephasing channel is a valid (non-unitary) encoding.
        let deph = vec![CMat::diag_real(&[1.0, 0.0]), CMat::diag_real(&[0.0, 1.0])];
        assert!(Encoding::new([deph.clone(), deph.clone(), deph.clone(), deph]).is_ok());
    }

    #[test]
    fn closed_forms_at_reported_points() {
        let r = closed_form(&Family::Isotropic { v: 0.47 }, Task::Stochastic).unwrap();
        assert!((r.value() - 0.66875).abs() < 1e-12);
        let s = closed_form(&Family::Partial { v: 0.72, theta: THETA_STAR }, Task::Deterministic).unwrap();
        assert!((s.value() - 0.7617).abs() < 5e-5);
        let p = closed_form(&Family::Pure { theta: FRAC_PI_4 }, Task::Deterministic).unwrap();
        assert!((p.value() - 1.0).abs() < 1e-15);
        assert!(closed_form(&Family::Isotropic { v: 2.0 }, Task::Stochastic).is_err());
    }

    #[test]
    fn closed_forms_match_evaluation_on_grids() {
        for task in [Task::Deterministic, Task::Stochastic] {
            for i in 0..=20 {
                let v = i as f64 / 20.0;
                for j in 1..=10 {
                    let theta = FRAC_PI_4 * j as f64 / 10.0;
                    for fam in [
                        Family::Isotropic { v },
                        Family::Partial { v, theta },
                        Family::Pure { theta },
                    ] {
                        let exact = score(&evaluate_canonical(&fam.state().unwrap(), task));
                        let closed = closed_form(&fam, task).unwrap();
                        assert!(exact.max_abs_diff(&closed) <= 1e-12, "{fam:?} {task:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn thresholds() {
        let iso = Family::Isotropic { v: 0.0 };
        let t = threshold(&iso, Task::Deterministic, 0.75).unwrap();
        assert!((t - 0.5).abs() <= 1e-6);
        let t = threshold(&iso, Task::Stochastic, 0.625).unwrap();
        assert!((t - 0.4).abs() <= 1e-6);
        let part = Family::Partial { v: 0.0, theta: THETA_STAR };
        let t = threshold(&part, Task::Deterministic, 0.75).unwrap();
        assert!((t - 0.6878).abs() <= 1e-3);
        assert_eq!(threshold(&iso, Task::Deterministic, 1.5), Err(Error::NoCrossing));
        assert!(threshold(&Family::Pure { theta: 0.3 }, Task::Deterministic, 0.75).is_err());
    }

    #[test]
    fn pure_state_advantage_iff_entangled() {
        for k in 1..=100 {
            let theta = FRAC_PI_4 * k as f64 / 100.0;
            let s = score(&evaluate_canonical(&partial_iso(1.0, theta).unwrap(), Task::Deterministic));
            assert!(s.value() > 0.75);
        }
        // θ = 0 is the product state |00>.
        let product = DensityMatrix::pure(&crate::qmath::CVec::basis(4, 0)).unwrap();
        let s = score(&evaluate_canonical(&product, Task::Deterministic)).value();
        assert!((s - 0.75).abs() < 1e-15);
    }

    #[test]
    fn per_z_scores_average_to_total() {
        let beh = evaluate_canonical(&partial_iso(0.72, THETA_STAR).unwrap(), Task::Deterministic);
        let [a, b] = score_by_z(&beh);
        assert!((0.5 * (a.value() + b.value()) - score(&beh).value()).abs() < 1e-15);
        // z = 0 parity is insensitive to θ.
        assert!((a.value() / 2.0 - 0.43).abs() < 1e-12);
    }

    fn random_state(s: &[f64]) -> DensityMatrix {
        let a = CMat::from_fn(4, |r, col| c(s[2 * (4 * r + col)], s[2 * (4 * r + col) + 1]));
        let m = a * a.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m.scale_re(1.0 / tr)).unwrap()
    }

    proptest! {
        #[test]
        fn scores_invariant_under_input_symmetries(s in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let rho = random_state(&s);
            for task in [Task::Deterministic, Task::Stochastic] {
                let beh = evaluate_canonical(&rho, task);
                let base = score(&beh);
                for sym in InputSymmetry::ALL {
                    prop_assert!(score(&beh.permuted(sym)).max_abs_diff(&base) < 1e-12);
                }
            }
        }

        #[test]
        fn partial_family_identity(v in 0.0f64..=1.0, theta in 0.001f64..FRAC_PI_4) {
            let s = score(&evaluate_canonical(&partial_iso(v, theta).unwrap(), Task::Deterministic)).value();
            prop_assert!((s - (2.0 + v * (1.0 + libm::sin(2.0 * theta))) / 4.0).abs() < 1e-12);
        }
    }
}
