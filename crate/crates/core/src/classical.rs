//! Exhaustive enumeration of one-bit classical strategies.
//!
//! Bob sends `f(x)`, Charlie sends `g(y)` (one bit each) and Alice answers
//! `h(f(x), g(y), z)`. Shared randomness only mixes deterministic strategies,
//! so for any linear score the deterministic maximum is the global one and
//! the randomized region is the convex hull of the deterministic points.
//!
//! Scores are kept as exact counts: the deterministic task's hits out of 32,
//! the stochastic task's secret and control hits out of 16 each.

use alloc::vec::Vec;

use crate::protocol::{correct_outcome, is_secret_round, Behavior, Scores, Task};
use crate::states::Outcome;

/// Identifier of a deterministic strategy. `f` and `g` index the 16 Boolean
/// functions of two bits (`f(x) = (f >> x) & 1`); `h` indexes Alice's decoding
/// table over the cells `m_B + 2 m_C + 4 z`, in base 2 (deterministic task)
/// or base 3 (stochastic task).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalStrategy {
    pub task: Task,
    pub f: u8,
    pub g: u8,
    pub h: u16,
}

/// Number of decoding tables for a task.
pub fn decoder_count(task: Task) -> u32 {
    (task.alphabet() as u32).pow(8)
}

/// Total number of deterministic strategies for a task.
pub fn strategy_count(task: Task) -> u32 {
    16 * 16 * decoder_count(task)
}

impl ClassicalStrategy {
    /// Strategy with linear index `idx = (16 f + g) * decoders + h`.
    pub fn from_index(task: Task, idx: u32) -> Self {
        let n = decoder_count(task);
        let h = (idx % n) as u16;
        let fg = idx / n;
        ClassicalStrategy { task, f: (fg / 16) as u8, g: (fg % 16) as u8, h }
    }

    pub fn index(&self) -> u32 {
        (u32::from(self.f) * 16 + u32::from(self.g)) * decoder_count(self.task) + u32::from(self.h)
    }

    pub fn bob(&self, x: usize) -> u8 {
        (self.f >> x) & 1
    }

    pub fn charlie(&self, y: usize) -> u8 {
        (self.g >> y) & 1
    }

    pub fn decode(&self, mb: u8, mc: u8, z: usize) -> Outcome {
        let cell = u32::from(mb) + 2 * u32::from(mc) + 4 * z as u32;
        let base = self.task.alphabet() as u32;
        let digit = (u32::from(self.h) / base.pow(cell)) % base;
        Outcome::ALL[digit as usize]
    }

    pub fn answer(&self, x: usize, y: usize, z: usize) -> Outcome {
        self.decode(self.bob(x), self.charlie(y), z)
    }

    /// Builds a strategy from explicit tables.
    pub fn from_tables(task: Task, bob: [u8; 4], charlie: [u8; 4], decoder: [Outcome; 8]) -> Self {
        let f = bob.iter().enumerate().fold(0u8, |acc, (x, &b)| acc | ((b & 1) << x));
        let g = charlie.iter().enumerate().fold(0u8, |acc, (y, &b)| acc | ((b & 1) << y));
        let base = task.alphabet() as u32;
        let h = decoder.iter().rev().fold(0u32, |acc, o| acc * base + o.index() as u32);
        assert!(decoder.iter().all(|o| o.index() < task.alphabet()), "decoder outcome outside the task alphabet");
        ClassicalStrategy { task, f, g, h: h as u16 }
    }

    /// Relay `x0`, `y0`; decode `z = 0` as the parity and answer `0` for `z = 1`.
    pub fn relay_deterministic() -> Self {
        use Outcome::*;
        // cells: (mb, mc, z) = (0,0,0) (1,0,0) (0,1,0) (1,1,0) then z = 1
        Self::from_tables(
            Task::Deterministic,
            [0, 1, 0, 1],
            [0, 1, 0, 1],
            [Zero, One, One, Zero, Zero, Zero, Zero, Zero],
        )
    }

    /// Relay `x0`, `y0`; for `z = 1` answer the parity, for `z = 0` answer `⊥`
    /// on even parity and `0` otherwise.
    pub fn relay_stochastic() -> Self {
        use Outcome::*;
        Self::from_tables(
            Task::Stochastic,
            [0, 1, 0, 1],
            [0, 1, 0, 1],
            [Bottom, Zero, Zero, Bottom, Zero, One, One, Zero],
        )
    }
}

/// Exact score of a deterministic strategy, as integer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExactScores {
    /// Successes out of 32.
    Deterministic { hits: u32 },
    /// Secret-round successes out of 16 and control-round successes out of 16.
    Stochastic { scrt: u32, ctrl: u32 },
}

impl ExactScores {
    /// Numerator of `S` or `R` over 32.
    pub fn numerator(&self) -> u32 {
        match *self {
            ExactScores::Deterministic { hits } => hits,
            ExactScores::Stochastic { scrt, ctrl } => scrt + ctrl,
        }
    }

    pub fn to_scores(&self) -> Scores {
        match *self {
            ExactScores::Deterministic { hits } => Scores::Deterministic { s: f64::from(hits) / 32.0 },
            ExactScores::Stochastic { scrt, ctrl } => {
                let (a, b) = (f64::from(scrt) / 16.0, f64::from(ctrl) / 16.0);
                Scores::Stochastic { scrt: a, ctrl: b, r: 0.5 * (a + b) }
            }
        }
    }
}

/// Direct combinatorial count over all 32 input triples.
pub fn exact_score(s: &ClassicalStrategy) -> ExactScores {
    let (mut hit, mut ctrl) = (0u32, 0u32);
    for z in 0..2 {
        for x in 0..4 {
            for y in 0..4 {
                if s.answer(x, y, z) == correct_outcome(s.task, x, y, z) {
                    if s.task == Task::Stochastic && !is_secret_round(x, y, z) {
                        ctrl += 1;
                    } else {
                        hit += 1;
                    }
                }
            }
        }
    }
    match s.task {
        Task::Deterministic => ExactScores::Deterministic { hits: hit },
        Task::Stochastic => ExactScores::Stochastic { scrt: hit, ctrl },
    }
}

/// The 0/1 behavior of a deterministic strategy.
pub fn strategy_to_behavior(s: &ClassicalStrategy) -> Behavior {
    let mut p = [[[[0.0; 3]; 4]; 4]; 2];
    for (z, pz) in p.iter_mut().enumerate() {
        for (x, px) in pz.iter_mut().enumerate() {
            for (y, row) in px.iter_mut().enumerate() {
                row[s.answer(x, y, z).index()] = 1.0;
            }
        }
    }
    Behavior::new(s.task, p).expect("deterministic rows are normalized")
}

/// Gains of every (cell, outcome) pair for fixed encoders: `[secret, control]` counts.
fn cell_gains(task: Task, f: u8, g: u8) -> [[[u32; 2]; 3]; 8] {
    let mut gains = [[[0u32; 2]; 3]; 8];
    for z in 0..2 {
        for x in 0..4usize {
            for y in 0..4usize {
                let cell = usize::from((f >> x) & 1) + 2 * usize::from((g >> y) & 1) + 4 * z;
                let role = usize::from(task == Task::Stochastic && !is_secret_round(x, y, z));
                gains[cell][correct_outcome(task, x, y, z).index()][role] += 1;
            }
        }
    }
    gains
}

/// Result of scanning a range of encoder pairs.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub task: Task,
    /// Number of strategies scanned.
    pub scanned: u64,
    /// Best numerator over 32.
    pub best: u32,
    /// Number of strategies attaining `best`.
    pub maximizers: u64,
    /// The first (lowest index) maximizers, at most [`Enumeration::KEPT_MAXIMIZERS`].
    pub argmax: Vec<ClassicalStrategy>,
    /// Lowest-index witness for every attainable `(secret, control)` count
    /// pair, `[secret][control]`; deterministic scores use the secret slot.
    pub witnesses: [[Option<ClassicalStrategy>; 17]; 33],
}

impl Enumeration {
    pub const KEPT_MAXIMIZERS: usize = 256;

    fn empty(task: Task) -> Self {
        Enumeration {
            task,
            scanned: 0,
            best: 0,
            maximizers: 0,
            argmax: Vec::new(),
            witnesses: [[None; 17]; 33],
        }
    }

    fn record(&mut self, s: ClassicalStrategy, scores: ExactScores) {
        self.scanned += 1;
        let n = scores.numerator();
        if n > self.best || self.maximizers == 0 {
            self.best = n;
            self.maximizers = 0;
            self.argmax.clear();
        }
        if n == self.best {
            self.maximizers += 1;
            if self.argmax.len() < Self::KEPT_MAXIMIZERS {
                self.argmax.push(s);
            }
        }
        let (a, b) = match scores {
            ExactScores::Deterministic { hits } => (hits, 0),
            ExactScores::Stochastic { scrt, ctrl } => (scrt, ctrl),
        };
        let slot = &mut self.witnesses[a as usize][b as usize];
        if slot.map_or(true, |w| s.index() < w.index()) {
            *slot = Some(s);
        }
    }

    /// Combines two partial scans.
    pub fn merge(mut self, other: Enumeration) -> Enumeration {
        assert_eq!(self.task, other.task);
        if other.scanned == 0 {
            return self;
        }
        if self.scanned == 0 {
            return other;
        }
        if other.best > self.best {
            self.best = other.best;
            self.maximizers = other.maximizers;
            self.argmax = other.argmax;
        } else if other.best == self.best {
            self.maximizers += other.maximizers;
            self.argmax.extend(other.argmax);
            self.argmax.sort_by_key(ClassicalStrategy::index);
            self.argmax.truncate(Self::KEPT_MAXIMIZERS);
        }
        for a in 0..33 {
            for b in 0..17 {
                match (self.witnesses[a][b], other.witnesses[a][b]) {
                    (None, w) => self.witnesses[a][b] = w,
                    (Some(x), Some(y)) if y.index() < x.index() => self.witnesses[a][b] = Some(y),
                    _ => {}
                }
            }
        }
        self.scanned += other.scanned;
        self
    }

    pub fn best_scores(&self) -> Scores {
        match self.task {
            Task::Deterministic => Scores::Deterministic { s: f64::from(self.best) / 32.0 },
            Task::Stochastic => Scores::Stochastic {
                scrt: f64::NAN,
                ctrl: f64::NAN,
                r: f64::from(self.best) / 32.0,
            },
        }
    }

    /// Attainable `(secret, control)` count pairs with their witnesses.
    pub fn points(&self) -> Vec<((u32, u32), ClassicalStrategy)> {
        let mut out = Vec::new();
        for (a, row) in self.witnesses.iter().enumerate() {
            for (b, w) in row.iter().enumerate() {
                if let Some(s) = w {
                    out.push(((a as u32, b as u32), *s));
                }
            }
        }
        out
    }
}

/// Scans the encoder pairs `16 f + g` in `pairs` (each with every decoder).
pub fn enumerate_pairs(task: Task, pairs: core::ops::Range<u32>) -> Enumeration {
    let mut out = Enumeration::empty(task);
    let base = task.alphabet() as u32;
    let decoders = decoder_count(task);
    for fg in pairs {
        let (f, g) = ((fg / 16) as u8, (fg % 16) as u8);
        let gains = cell_gains(task, f, g);
        for h in 0..decoders {
            let (mut sec, mut ctl, mut code) = (0u32, 0u32, h);
            for cell in &gains {
                let a = (code % base) as usize;
                code /= base;
                sec += cell[a][0];
                ctl += cell[a][1];
            }
            let s = ClassicalStrategy { task, f, g, h: h as u16 };
            let scores = match task {
                Task::Deterministic => ExactScores::Deterministic { hits: sec },
                Task::Stochastic => ExactScores::Stochastic { scrt: sec, ctrl: ctl },
            };
            out.record(s, scores);
        }
    }
    out
}

/// Exact maximum over every deterministic strategy of the task.
pub fn enumerate_deterministic(task: Task) -> Enumeration {
    enumerate_pairs(task, 0..256)
}

/// A vertex (or supporting point) of the classical `(R_scrt, R_ctrl)` frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub scrt: f64,
    pub ctrl: f64,
    /// Exact counts out of 16.
    pub counts: (u32, u32),
    pub strategy: ClassicalStrategy,
}

/// Upper-right concave envelope of the attainable stochastic points, ordered
/// by increasing `R_scrt`. Points lying on an envelope edge are kept.
pub fn frontier_from(en: &Enumeration) -> Vec<FrontierPoint> {
    assert_eq!(en.task, Task::Stochastic, "frontier is defined for the stochastic task");
    let pts = en.points();
    // Pareto filter.
    let mut pareto: Vec<((u32, u32), ClassicalStrategy)> = pts
        .iter()
        .copied()
        .filter(|&((a, b), _)| !pts.iter().any(|&((c, d), _)| c >= a && d >= b && (c, d) != (a, b)))
        .collect();
    pareto.sort_by_key(|&((a, _), _)| a);
    // Concave envelope; drop strictly interior points only.
    let mut hull: Vec<((u32, u32), ClassicalStrategy)> = Vec::new();
    for p in pareto {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2].0, hull[hull.len() - 1].0);
            let cross = (i64::from(b.0) - i64::from(a.0)) * (i64::from(p.0 .1) - i64::from(b.1))
                - (i64::from(b.1) - i64::from(a.1)) * (i64::from(p.0 .0) - i64::from(b.0));
            if cross > 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.into_iter()
        .map(|((a, b), s)| FrontierPoint {
            scrt: f64::from(a) / 16.0,
            ctrl: f64::from(b) / 16.0,
            counts: (a, b),
            strategy: s,
        })
        .collect()
}

/// Classical `(R_scrt, R_ctrl)` frontier of the stochastic task.
pub fn frontier() -> Vec<FrontierPoint> {
    frontier_from(&enumerate_deterministic(Task::Stochastic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::score;

    #[test]
    fn index_round_trip() {
        for task in [Task::Deterministic, Task::Stochastic] {
            for idx in [0, 1, 12345, strategy_count(task) - 1] {
                assert_eq!(ClassicalStrategy::from_index(task, idx).index(), idx);
            }
        }
    }

    #[test]
    fn constant_strategy_scores_half() {
        let s = ClassicalStrategy { task: Task::Deterministic, f: 0, g: 0, h: 0 };
        assert_eq!(exact_score(&s), ExactScores::Deterministic { hits: 16 });
        assert_eq!(score(&strategy_to_behavior(&s)), Scores::Deterministic { s: 0.5 });
    }

    #[test]
    fn relay_strategies() {
        let d = ClassicalStrategy::relay_deterministic();
        assert_eq!(exact_score(&d), ExactScores::Deterministic { hits: 24 });
        let s = ClassicalStrategy::relay_stochastic();
        assert_eq!(exact_score(&s), ExactScores::Stochastic { scrt: 12, ctrl: 8 });
        assert_eq!(
            score(&strategy_to_behavior(&s)),
            Scores::Stochastic { scrt: 0.75, ctrl: 0.5, r: 0.625 }
        );
    }

    #[test]
    fn behavior_rows_are_normalized() {
        for idx in [7u32, 99_999, 1_234_567] {
            let s = ClassicalStrategy::from_index(Task::Stochastic, idx);
            let b = strategy_to_behavior(&s);
            for z in 0..2 {
                for x in 0..4 {
                    for y in 0..4 {
                        let row: f64 = Outcome::ALL.iter().map(|&a| b.prob(a, x, y, z)).sum();
                        assert_eq!(row, 1.0);
                    }
                }
            }
            assert_eq!(score(&b), exact_score(&s).to_scores());
        }
    }

    #[test]
    fn deterministic_maximum_is_three_quarters() {
        let en = enumerate_deterministic(Task::Deterministic);
        assert_eq!(en.scanned, u64::from(strategy_count(Task::Deterministic)));
        assert_eq!(en.best, 24);
        assert!(en.argmax.iter().all(|s| exact_score(s).numerator() == 24));
    }

    #[test]
    fn merge_matches_single_scan() {
        let whole = enumerate_deterministic(Task::Deterministic);
        let parts = enumerate_pairs(Task::Deterministic, 0..100)
            .merge(enumerate_pairs(Task::Deterministic, 100..256));
        assert_eq!(whole.best, parts.best);
        assert_eq!(whole.maximizers, parts.maximizers);
        assert_eq!(whole.argmax, parts.argmax);
        assert_eq!(whole.witnesses, parts.witnesses);
    }
}
