//! Alternating maximization over unassisted qubit strategies.
//!
//! Bob and Charlie each send a qubit state (`β_x`, `γ_y`) and Alice measures
//! the product with a POVM depending on `z`. With everything but one block
//! fixed the score is linear in that block: states are updated to the top
//! eigenvector of their effective operator, two-outcome measurements by the
//! Helstrom rule and three-outcome measurements by a guarded eigenbasis
//! assignment. The resulting values are lower bounds on the qubit optimum.

use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::classical::ClassicalStrategy;
use crate::error::{Error, Result};
use crate::protocol::{correct_outcome, score, Behavior, MeasurementPair, Scores, Task};
use crate::qmath::{CMat, CVec, Subsystem, C64};
use crate::rng::{self, Rng};
use crate::states::{basis_projector, Outcome, Povm};

/// Sweeps stop once a sweep gains less than this.
pub const GAIN_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 500;
/// Slack allowed when checking that a sweep did not decrease the objective.
const MONOTONE_SLACK: f64 = 1e-12;

/// Qubit messages and Alice's decoding measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitStrategy {
    pub task: Task,
    /// `β_x`, pure 2x2 density matrices.
    pub bob: [CMat; 4],
    /// `γ_y`.
    pub charlie: [CMat; 4],
    /// `M_{a|z}` indexed `[z][a]`; the `⊥` slot is zero for the deterministic task.
    pub measurements: [[CMat; 3]; 2],
}

impl QubitStrategy {
    /// Embeds a deterministic classical strategy: basis-state messages and
    /// diagonal projective measurements.
    pub fn classical(s: &ClassicalStrategy) -> Self {
        let basis = |b: u8| basis_projector(2, [usize::from(b)]);
        let mut measurements = [[CMat::zeros(4); 3]; 2];
        for (z, mz) in measurements.iter_mut().enumerate() {
            for (a, m) in mz.iter_mut().enumerate() {
                let cells = (0..4u8).filter(|&k| s.decode(k / 2, k % 2, z).index() == a);
                *m = basis_projector(4, cells.map(usize::from));
            }
        }
        QubitStrategy {
            task: s.task,
            bob: core::array::from_fn(|x| basis(s.bob(x))),
            charlie: core::array::from_fn(|y| basis(s.charlie(y))),
            measurements,
        }
    }

    /// Haar-random pure messages and a random projective measurement per `z`
    /// (random orthonormal basis, uniformly random labels).
    pub fn random(task: Task, rng: &mut Rng) -> Self {
        let bob = core::array::from_fn(|_| CMat::outer(&haar_ket(2, rng)));
        let charlie = core::array::from_fn(|_| CMat::outer(&haar_ket(2, rng)));
        let mut measurements = [[CMat::zeros(4); 3]; 2];
        for mz in measurements.iter_mut() {
            let basis = random_basis(rng);
            for v in &basis {
                let a = rng.random_range(0..task.alphabet());
                mz[a] = mz[a] + CMat::outer(v);
            }
        }
        QubitStrategy { task, bob, charlie, measurements }
    }

    pub fn probability(&self, a: Outcome, x: usize, y: usize, z: usize) -> f64 {
        let joint = self.bob[x].tensor(&self.charlie[y]).expect("qubit messages");
        joint.trace_product_re(&self.measurements[z][a.index()])
    }

    /// `S` or `R`, the average probability of the correct answer over all 32 inputs.
    pub fn objective(&self) -> f64 {
        let mut total = 0.0;
        for z in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    total += self.probability(correct_outcome(self.task, x, y, z), x, y, z);
                }
            }
        }
        total / 32.0
    }

    pub fn behavior(&self) -> Result<Behavior> {
        let mut p = [[[[0.0; 3]; 4]; 4]; 2];
        for (z, pz) in p.iter_mut().enumerate() {
            for (x, px) in pz.iter_mut().enumerate() {
                for (y, row) in px.iter_mut().enumerate() {
                    for &a in self.task.outcomes() {
                        row[a.index()] = self.probability(a, x, y, z).max(0.0);
                    }
                }
            }
        }
        Behavior::new(self.task, p)
    }

    pub fn scores(&self) -> Result<Scores> {
        Ok(score(&self.behavior()?))
    }

    /// Alice's measurements as validated POVMs.
    pub fn measurement_pair(&self) -> Result<MeasurementPair> {
        let outcomes = self.task.outcomes();
        let make = |z: usize| {
            Povm::new(
                outcomes.iter().map(|a| self.measurements[z][a.index()]).collect(),
                outcomes.to_vec(),
            )
        };
        Ok([make(0)?, make(1)?])
    }

    /// `O_{a,z} = (1/32) Σ_{x,y: correct = a} β_x ⊗ γ_y`.
    fn weighted_operators(&self, z: usize) -> [CMat; 3] {
        let mut ops = [CMat::zeros(4); 3];
        for x in 0..4 {
            for y in 0..4 {
                let a = correct_outcome(self.task, x, y, z).index();
                let joint = self.bob[x].tensor(&self.charlie[y]).expect("qubit messages");
                ops[a] = ops[a] + joint.scale_re(1.0 / 32.0);
            }
        }
        ops
    }
}

fn haar_ket(dim: usize, rng: &mut Rng) -> CVec {
    let entries: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    CVec::from_slice(&entries).normalized()
}

/// Eigenbasis of a Gaussian Hermitian matrix: a uniformly random basis up to phases.
fn random_basis(rng: &mut Rng) -> [CVec; 4] {
    let g = CMat::from_fn(4, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let eig = g.hermitian_part().herm_eig().expect("finite Hermitian matrix");
    core::array::from_fn(|k| eig.vector(k))
}

fn top_eigenprojector(a: &CMat) -> CMat {
    let eig = a.hermitian_part().herm_eig().expect("finite Hermitian matrix");
    CMat::outer(&eig.vector(a.dim() - 1))
}

/// Replaces every `β_x` by the best response to the current `γ` and measurements.
pub fn update_bob(s: &mut QubitStrategy) {
    for x in 0..4 {
        let mut a = CMat::zeros(2);
        for y in 0..4 {
            let lift = CMat::identity(2).tensor(&s.charlie[y]).expect("qubit");
            for z in 0..2 {
                let m = s.measurements[z][correct_outcome(s.task, x, y, z).index()];
                a = a + (lift * m).partial_trace(Subsystem::Second).expect("4x4");
            }
        }
        s.bob[x] = top_eigenprojector(&a);
    }
}

/// Replaces every `γ_y` by the best response to the current `β` and measurements.
pub fn update_charlie(s: &mut QubitStrategy) {
    for y in 0..4 {
        let mut a = CMat::zeros(2);
        for x in 0..4 {
            let lift = s.bob[x].tensor(&CMat::identity(2)).expect("qubit");
            for z in 0..2 {
                let m = s.measurements[z][correct_outcome(s.task, x, y, z).index()];
                a = a + (lift * m).partial_trace(Subsystem::First).expect("4x4");
            }
        }
        s.charlie[y] = top_eigenprojector(&a);
    }
}

/// Bob's then Charlie's best-response update.
pub fn update_states(s: &mut QubitStrategy) {
    update_bob(s);
    update_charlie(s);
}

/// Optimal two-outcome measurement maximizing `Tr[O_0 M_0] + Tr[O_1 M_1]`.
pub fn helstrom(o0: &CMat, o1: &CMat) -> [CMat; 2] {
    let dim = o0.dim();
    let eig = (*o0 - *o1).hermitian_part().herm_eig().expect("finite Hermitian matrix");
    let mut m0 = CMat::zeros(dim);
    for (k, &lambda) in eig.values().iter().enumerate() {
        if lambda >= 0.0 {
            m0 = m0 + CMat::outer(&eig.vector(k));
        }
    }
    [m0, CMat::identity(dim) - m0]
}

/// Best projective measurement among eigenbases of each `O_a` and each
/// difference `O_a - O_b`, every basis vector assigned to the outcome with
/// the largest `<v|O_a|v>`.
pub fn eigen_assignment(ops: &[CMat; 3]) -> [CMat; 3] {
    let mut candidates: Vec<CMat> = ops.to_vec();
    for a in 0..3 {
        for b in a + 1..3 {
            candidates.push(ops[a] - ops[b]);
        }
    }
    let mut best = ([CMat::zeros(4); 3], f64::NEG_INFINITY);
    for cand in candidates {
        let eig = cand.hermitian_part().herm_eig().expect("finite Hermitian matrix");
        let mut m = [CMat::zeros(4); 3];
        let mut value = 0.0;
        for k in 0..4 {
            let v = eig.vector(k);
            let (a, gain) = (0..3)
                .map(|a| (a, ops[a].expectation(&v).re))
                .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            m[a] = m[a] + CMat::outer(&v);
            value += gain;
        }
        if value > best.1 {
            best = (m, value);
        }
    }
    best.0
}

fn measurement_value(ops: &[CMat; 3], m: &[CMat; 3]) -> f64 {
    ops.iter().zip(m).map(|(o, e)| o.trace_product_re(e)).sum()
}

/// Updates Alice's measurements for both `z`; three-outcome candidates are
/// kept only if they do not lower the objective.
pub fn update_measurements(s: &mut QubitStrategy) {
    for z in 0..2 {
        let ops = s.weighted_operators(z);
        match s.task {
            Task::Deterministic => {
                let [m0, m1] = helstrom(&ops[0], &ops[1]);
                s.measurements[z] = [m0, m1, CMat::zeros(4)];
            }
            Task::Stochastic => {
                let cand = eigen_assignment(&ops);
                if measurement_value(&ops, &cand) >= measurement_value(&ops, &s.measurements[z]) {
                    s.measurements[z] = cand;
                }
            }
        }
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartReport {
    pub index: u64,
    pub value: f64,
    /// Objective after initialization and after every sweep.
    pub trajectory: Vec<f64>,
    pub converged: bool,
}

impl RestartReport {
    pub fn sweeps(&self) -> usize {
        self.trajectory.len() - 1
    }
}

/// Runs sweeps from `start` until the gain drops below [`GAIN_TOL`] or
/// [`MAX_SWEEPS`] is reached.
///
/// # Panics
/// If a sweep lowers the objective by more than `1e-12`.
pub fn optimize(mut s: QubitStrategy, index: u64) -> (QubitStrategy, RestartReport) {
    let mut value = s.objective();
    let mut trajectory = alloc::vec![value];
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        update_states(&mut s);
        update_measurements(&mut s);
        let next = s.objective();
        assert!(next >= value - MONOTONE_SLACK, "seesaw sweep decreased the objective: {value} -> {next}");
        trajectory.push(next);
        let gain = next - value;
        value = next;
        if gain < GAIN_TOL {
            converged = true;
            break;
        }
    }
    (s, RestartReport { index, value, trajectory, converged })
}

/// Classical optimum used to seed restart 0.
pub fn classical_seed(task: Task) -> ClassicalStrategy {
    match task {
        Task::Deterministic => ClassicalStrategy::relay_deterministic(),
        Task::Stochastic => ClassicalStrategy::relay_stochastic(),
    }
}

/// Restart `index` of a run: index 0 starts from the classical optimum,
/// others from a random strategy drawn from stream `index` of `seed`.
pub fn seesaw_restart(task: Task, index: u64, seed: u64) -> (QubitStrategy, RestartReport) {
    let start = if index == 0 {
        QubitStrategy::classical(&classical_seed(task))
    } else {
        QubitStrategy::random(task, &mut rng::stream(seed, index))
    };
    optimize(start, index)
}

/// Best strategy over a set of restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct SeesawReport {
    pub task: Task,
    pub best: Scores,
    pub best_restart: u64,
    pub strategy: QubitStrategy,
    pub per_restart: Vec<RestartReport>,
}

impl SeesawReport {
    /// Collects restarts (in any order); ties go to the lowest index.
    pub fn from_restarts(task: Task, mut runs: Vec<(QubitStrategy, RestartReport)>) -> Result<Self> {
        runs.sort_by_key(|(_, r)| r.index);
        let best = runs
            .iter()
            .enumerate()
            .fold(None::<usize>, |acc, (k, (_, r))| match acc {
                Some(b) if runs[b].1.value >= r.value => Some(b),
                _ => Some(k),
            })
            .ok_or(Error::InvalidArgument("at least one restart is required"))?;
        let strategy = runs[best].0.clone();
        let best_restart = runs[best].1.index;
        Ok(SeesawReport {
            task,
            best: strategy.scores()?,
            best_restart,
            strategy,
            per_restart: runs.into_iter().map(|(_, r)| r).collect(),
        })
    }
}

/// Runs restarts `0..restarts` sequentially.
pub fn seesaw(task: Task, restarts: u64, seed: u64) -> Result<SeesawReport> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required"));
    }
    let runs = (0..restarts).map(|k| seesaw_restart(task, k, seed)).collect();
    SeesawReport::from_restarts(task, runs)
}
