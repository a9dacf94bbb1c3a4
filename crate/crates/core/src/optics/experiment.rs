//! Event-by-event simulation of the photonic experiments.
//!
//! Each event draws the inputs `(x, y, z)` uniformly, picks which frame state
//! the preparation plates produce according to the mixing weights, perturbs
//! every plate by its setting error, propagates the photon pair through the
//! Jones pipeline and samples Alice's outcome. Events are processed in fixed
//! chunks, each with its own random stream, so any partition of the chunks
//! over workers gives identical merged counts.

use rand::Rng as _;
use rand_distr::StandardNormal;

use super::tables::{
    encoder_settings, parity_plates, partial_bell_plates, EncoderSetting, PrepRow, BELL_PREPARATION,
    FRAME_PREPARATION,
};
use super::{apply_local, jones_mul, Jones, MANUAL_JITTER_DEG, MOTORIZED_JITTER_DEG};
use crate::error::{Error, Result};
use crate::protocol::{correct_outcome, is_secret_round, Behavior, Family, Scores, Task};
use crate::qmath::C64;
use crate::rng::{self, Rng};
use crate::states::{theta_frame, Bell};

/// Events per independently seeded chunk.
pub const CHUNK_EVENTS: u64 = 1 << 16;

/// Standard deviations of the plate setting errors, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    /// Preparation, Bob's and Charlie's plates.
    pub motorized_deg: f64,
    /// Alice's plates.
    pub manual_deg: f64,
}

impl Jitter {
    pub const PAPER: Jitter = Jitter { motorized_deg: MOTORIZED_JITTER_DEG, manual_deg: MANUAL_JITTER_DEG };
    pub const NONE: Jitter = Jitter { motorized_deg: 0.0, manual_deg: 0.0 };
}

/// A simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub task: Task,
    pub events: u64,
    /// Coincidences per second; recorded, not simulated.
    pub rate: f64,
    pub seed: u64,
    pub jitter: Jitter,
}

impl ExperimentConfig {
    /// A run with the published setting errors and a rate of one coincidence per second.
    pub fn new(family: Family, task: Task, events: u64, seed: u64) -> Self {
        ExperimentConfig { family, task, events, rate: 1.0, seed, jitter: Jitter::PAPER }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.state()?;
        if self.events == 0 {
            return Err(Error::OutOfRange { name: "events", value: 0.0 });
        }
        for (name, s) in [("motorized jitter", self.jitter.motorized_deg), ("manual jitter", self.jitter.manual_deg)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::OutOfRange { name, value: s });
            }
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::OutOfRange { name: "rate", value: self.rate });
        }
        Ok(())
    }

    /// Probabilities of the four preparation rows: the target state gets
    /// `v + (1 - v)/4`, each other frame state `(1 - v)/4`.
    pub fn mixing_weights(&self) -> [f64; 4] {
        mixing_weights(self.family.visibility())
    }

    pub fn chunk_count(&self) -> u64 {
        self.events.div_ceil(CHUNK_EVENTS)
    }

    /// Run duration implied by the rate, in seconds.
    pub fn duration(&self) -> f64 {
        self.events as f64 / self.rate
    }
}

pub fn mixing_weights(v: f64) -> [f64; 4] {
    let noise = (1.0 - v) / 4.0;
    [v + noise, noise, noise, noise]
}

/// Preparation stage: the source ket and the table rows acting on it.
struct Preparation {
    source: [C64; 4],
    rows: &'static [PrepRow; 4],
}

impl Preparation {
    /// Isotropic states are built from Bell states with one plate; the
    /// partially entangled families from the `θ` frame with two. The source
    /// is the state that the all-zero row maps to the target.
    fn of(family: &Family) -> Self {
        let (rows, target): (&'static [PrepRow; 4], [C64; 4]) = match family {
            Family::Isotropic { .. } => (&BELL_PREPARATION, ket(&Bell::PhiPlus.ket())),
            _ => (&FRAME_PREPARATION, ket(&theta_frame(family.theta())[0])),
        };
        let (b, c) = rows[0].jones([0.0; 3]);
        let source = apply_local(&adjoint(&b), &adjoint(&c), &target);
        Preparation { source, rows }
    }
}

fn ket(v: &crate::qmath::CVec) -> [C64; 4] {
    core::array::from_fn(|k| v[k])
}

fn adjoint(j: &Jones) -> Jones {
    core::array::from_fn(|r| core::array::from_fn(|k| j[k][r].conj()))
}

/// Outcome probabilities indexed by `Outcome::index`.
fn detect(task: Task, psi: &[C64; 4]) -> [f64; 3] {
    let p = match task {
        Task::Deterministic => {
            let even = psi[0].norm_sqr() + psi[3].norm_sqr();
            [even, psi[1].norm_sqr() + psi[2].norm_sqr(), 0.0]
        }
        Task::Stochastic => {
            let plus = (psi[0] + psi[3]).norm_sqr() / 2.0;
            let minus = (psi[0] - psi[3]).norm_sqr() / 2.0;
            [plus, minus, psi[1].norm_sqr() + psi[2].norm_sqr()]
        }
    };
    // Rounding noise must not turn a certain outcome into a possible error.
    let p = p.map(|q| if q < 1e-14 { 0.0 } else { q });
    let total: f64 = p.iter().sum();
    p.map(|q| q / total)
}

/// Plates traversed by a pair, at given deviations.
struct Deviations {
    prep: [f64; 3],
    bob: [f64; 2],
    charlie: [f64; 2],
    alice: [f64; 3],
}

impl Deviations {
    const ZERO: Deviations = Deviations { prep: [0.0; 3], bob: [0.0; 2], charlie: [0.0; 2], alice: [0.0; 3] };

    fn draw(jitter: &Jitter, rng: &mut Rng) -> Self {
        let mut gauss = |s: f64| if s > 0.0 { s * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        let m = jitter.motorized_deg;
        let a = jitter.manual_deg;
        Deviations {
            prep: [gauss(m), gauss(m), gauss(m)],
            bob: [gauss(m), gauss(m)],
            charlie: [gauss(m), gauss(m)],
            alice: [gauss(a), gauss(a), gauss(a)],
        }
    }
}

struct Pipeline {
    task: Task,
    prep: Preparation,
    encoders: [EncoderSetting; 4],
}

impl Pipeline {
    fn new(family: &Family, task: Task) -> Self {
        Pipeline { task, prep: Preparation::of(family), encoders: encoder_settings() }
    }

    fn probabilities(&self, row: usize, x: usize, y: usize, z: usize, d: &Deviations) -> [f64; 3] {
        let (pb, pc) = self.prep.rows[row].jones(d.prep);
        let eb = self.encoders[x].jones(d.bob);
        let ec = self.encoders[y].jones(d.charlie);
        let (ab, ac) = match self.task {
            Task::Deterministic => parity_plates(z, [d.alice[0], d.alice[1]]),
            Task::Stochastic => partial_bell_plates(z, d.alice),
        };
        let bob = jones_mul(&ab, &jones_mul(&eb, &pb));
        let charlie = jones_mul(&ac, &jones_mul(&ec, &pc));
        detect(self.task, &apply_local(&bob, &charlie, &self.prep.source))
    }
}

/// Outcome counts `n[z][x][y][a]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentCounts {
    pub task: Task,
    pub counts: [[[[u64; 3]; 4]; 4]; 2],
}

impl ExperimentCounts {
    pub fn empty(task: Task) -> Self {
        ExperimentCounts { task, counts: [[[[0; 3]; 4]; 4]; 2] }
    }

    pub fn merge(mut self, other: &ExperimentCounts) -> Self {
        for z in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    for a in 0..3 {
                        self.counts[z][x][y][a] += other.counts[z][x][y][a];
                    }
                }
            }
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().flatten().flatten().sum()
    }

    fn cell(&self, x: usize, y: usize, z: usize) -> (u64, u64) {
        let n: u64 = self.counts[z][x][y].iter().sum();
        let hits = self.counts[z][x][y][correct_outcome(self.task, x, y, z).index()];
        (n, hits)
    }

    /// Empirical behavior; fails if some input triple was never drawn.
    pub fn behavior(&self) -> Result<Behavior> {
        let mut p = [[[[0.0; 3]; 4]; 4]; 2];
        for z in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    let n: u64 = self.counts[z][x][y].iter().sum();
                    if n == 0 {
                        return Err(Error::InvalidArgument("too few events: an input triple was never drawn"));
                    }
                    for a in 0..3 {
                        p[z][x][y][a] = self.counts[z][x][y][a] as f64 / n as f64;
                    }
                }
            }
        }
        Behavior::new(self.task, p)
    }

    /// Scores over the rounds with `z` in `zs` and their stratified binomial
    /// standard errors (each round's success frequency is an independent
    /// binomial estimate).
    pub fn estimate(&self, zs: &[usize]) -> Result<(Scores, Scores)> {
        let mut mean = [0.0f64; 2];
        let mut var = [0.0f64; 2];
        let mut cells = [0usize; 2];
        for &z in zs {
            for x in 0..4 {
                for y in 0..4 {
                    let (n, hits) = self.cell(x, y, z);
                    if n == 0 {
                        return Err(Error::InvalidArgument("too few events: an input triple was never drawn"));
                    }
                    let role = usize::from(self.task == Task::Stochastic && !is_secret_round(x, y, z));
                    let p = hits as f64 / n as f64;
                    mean[role] += p;
                    var[role] += p * (1.0 - p) / n as f64;
                    cells[role] += 1;
                }
            }
        }
        let m = cells.map(|c| c.max(1) as f64);
        let est = [mean[0] / m[0], mean[1] / m[1]];
        let se = [libm::sqrt(var[0]) / m[0], libm::sqrt(var[1]) / m[1]];
        Ok(match self.task {
            Task::Deterministic => (Scores::Deterministic { s: est[0] }, Scores::Deterministic { s: se[0] }),
            Task::Stochastic => (
                Scores::Stochastic { scrt: est[0], ctrl: est[1], r: 0.5 * (est[0] + est[1]) },
                Scores::Stochastic {
                    scrt: se[0],
                    ctrl: se[1],
                    r: 0.5 * libm::sqrt(se[0] * se[0] + se[1] * se[1]),
                },
            ),
        })
    }
}

/// Simulates chunk `chunk` of a run.
pub fn run_chunk(cfg: &ExperimentConfig, chunk: u64) -> Result<ExperimentCounts> {
    cfg.validate()?;
    let start = chunk * CHUNK_EVENTS;
    if start >= cfg.events {
        return Err(Error::OutOfRange { name: "chunk", value: chunk as f64 });
    }
    let n = (cfg.events - start).min(CHUNK_EVENTS);
    let pipeline = Pipeline::new(&cfg.family, cfg.task);
    let weights = cfg.mixing_weights();
    let mut rng = rng::stream(cfg.seed, chunk);
    let mut out = ExperimentCounts::empty(cfg.task);
    for _ in 0..n {
        let r: u32 = rng.random();
        let (x, y, z) = ((r & 3) as usize, ((r >> 2) & 3) as usize, ((r >> 4) & 1) as usize);
        let u: f64 = rng.random();
        let mut row = 3;
        let mut acc = 0.0;
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                row = k;
                break;
            }
        }
        let d = Deviations::draw(&cfg.jitter, &mut rng);
        let p = pipeline.probabilities(row, x, y, z, &d);
        let u: f64 = rng.random();
        let a = if u < p[0] {
            0
        } else if u < p[0] + p[1] || cfg.task == Task::Deterministic {
            1
        } else {
            2
        };
        out.counts[z][x][y][a] += 1;
    }
    Ok(out)
}

/// Result of a simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub counts: ExperimentCounts,
    pub behavior: Behavior,
    pub scores: Scores,
    /// Standard errors of `scores`, field by field.
    pub errors: Scores,
    /// Scores and standard errors restricted to `z = 0` and `z = 1`.
    pub by_z: [(Scores, Scores); 2],
}

/// Turns merged counts into estimates.
pub fn finish(cfg: &ExperimentConfig, counts: ExperimentCounts) -> Result<ExperimentResult> {
    if counts.total() != cfg.events {
        return Err(Error::InvalidArgument("merged counts do not match the configured events"));
    }
    let behavior = counts.behavior()?;
    let (scores, errors) = counts.estimate(&[0, 1])?;
    let by_z = [counts.estimate(&[0])?, counts.estimate(&[1])?];
    Ok(ExperimentResult { config: *cfg, counts, behavior, scores, errors, by_z })
}

/// Runs all chunks in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut counts = ExperimentCounts::empty(cfg.task);
    for chunk in 0..cfg.chunk_count() {
        counts = counts.merge(&run_chunk(cfg, chunk)?);
    }
    finish(cfg, counts)
}

/// Exact behavior of the nominal pipeline (no setting errors, infinite statistics).
pub fn ideal_behavior(family: &Family, task: Task) -> Result<Behavior> {
    family.state()?;
    let pipeline = Pipeline::new(family, task);
    let weights = mixing_weights(family.visibility());
    let mut p = [[[[0.0; 3]; 4]; 4]; 2];
    for z in 0..2 {
        for x in 0..4 {
            for y in 0..4 {
                for (row, w) in weights.iter().enumerate() {
                    let q = pipeline.probabilities(row, x, y, z, &Deviations::ZERO);
                    for a in 0..3 {
                        p[z][x][y][a] += w * q[a];
                    }
                }
            }
        }
    }
    Behavior::new(task, p)
}

/// The state the nominal preparation produces for a family: the weighted
/// mixture of the preparation rows' output states.
pub fn prepared_state(family: &Family) -> Result<crate::states::DensityMatrix> {
    family.state()?;
    let prep = Preparation::of(family);
    let weights = mixing_weights(family.visibility());
    let mut m = crate::qmath::CMat::zeros(4);
    for (row, w) in prep.rows.iter().zip(weights) {
        let (b, c) = row.jones([0.0; 3]);
        let psi = crate::qmath::CVec::from_slice(&apply_local(&b, &c, &prep.source));
        m = m + crate::qmath::CMat::outer(&psi).scale_re(w);
    }
    crate::states::DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{evaluate_canonical, score, THETA_STAR};

    #[test]
    fn prepared_mixture_is_the_family_state() {
        for fam in [
            Family::Isotropic { v: 0.47 },
            Family::Isotropic { v: 1.0 },
            Family::Partial { v: 0.72, theta: THETA_STAR },
            Family::Pure { theta: 0.5 },
        ] {
            let got = prepared_state(&fam).unwrap();
            assert!(got.mat().max_abs_diff(fam.state().unwrap().mat()) < 1e-12, "{fam:?}");
        }
    }

    #[test]
    fn nominal_pipeline_matches_exact_evaluation() {
        for fam in [Family::Isotropic { v: 0.47 }, Family::Partial { v: 0.72, theta: THETA_STAR }] {
            for task in [Task::Deterministic, Task::Stochastic] {
                let ideal = ideal_behavior(&fam, task).unwrap();
                let exact = evaluate_canonical(&fam.state().unwrap(), task);
                for z in 0..2 {
                    for x in 0..4 {
                        for y in 0..4 {
                            for a in 0..3 {
                                let d = ideal.table()[z][x][y][a] - exact.table()[z][x][y][a];
                                assert!(d.abs() < 1e-12, "{fam:?} {task:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn perfect_run_never_errs() {
        let mut cfg = ExperimentConfig::new(Family::Isotropic { v: 1.0 }, Task::Stochastic, 20_000, 5);
        cfg.jitter = Jitter::NONE;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(score(&r.behavior).value(), 1.0);
        assert_eq!(r.scores, Scores::Stochastic { scrt: 1.0, ctrl: 1.0, r: 1.0 });
        assert_eq!(r.errors.value(), 0.0);
    }

    #[test]
    fn chunking_is_order_independent() {
        let cfg = ExperimentConfig::new(Family::Partial { v: 0.72, theta: THETA_STAR }, Task::Deterministic, 150_000, 9);
        let forward = run_experiment(&cfg).unwrap();
        let mut counts = ExperimentCounts::empty(cfg.task);
        for chunk in (0..cfg.chunk_count()).rev() {
            counts = counts.merge(&run_chunk(&cfg, chunk).unwrap());
        }
        assert_eq!(counts, forward.counts);
        assert_eq!(forward.counts.total(), 150_000);
    }

    #[test]
    fn weights_sum_to_one() {
        for v in [0.0, 0.47, 1.0] {
            assert!((mixing_weights(v).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::new(Family::Isotropic { v: 0.5 }, Task::Stochastic, 0, 1);
        assert!(run_experiment(&cfg).is_err());
        cfg.events = 10;
        cfg.jitter.manual_deg = -1.0;
        assert!(run_experiment(&cfg).is_err());
        cfg.jitter = Jitter::NONE;
        assert!(run_experiment(&cfg).is_err(), "ten events cannot cover all 32 input triples");
    }
}
