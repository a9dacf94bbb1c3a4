//! Acceptance criteria, one PASS/FAIL line each. Runs without the test
//! harness so the lines are always printed; exits non-zero if any fails.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::StandardNormal;

use secshare::drivers;
use secshare_core::classical::frontier_from;
use secshare_core::optics::experiment::ExperimentConfig;
use secshare_core::optics::tables::{verify_settings_tables, RowStatus, Table};
use secshare_core::optics::tomography::{recombined_isotropic, tomography_exact};
use secshare_core::protocol::{closed_form, evaluate_canonical, score, threshold, Family, Scores, Task, THETA_STAR};
use secshare_core::rng::{stream, Rng};
use secshare_core::states::{bell_state, isotropic, partial_iso, DensityMatrix};
use secshare_core::steering::*;
use secshare_core::{Bell, CMat, CVec, C64};

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn check(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn ideal_protocols() -> Verdict {
    let start = Instant::now();
    let phi = bell_state(Bell::PhiPlus);
    let det = score(&evaluate_canonical(&phi, Task::Deterministic));
    let sto = score(&evaluate_canonical(&phi, Task::Stochastic));
    let secs = start.elapsed().as_secs_f64();
    let err_det = (det.value() - 1.0).abs();
    let err_sto = match sto {
        Scores::Stochastic { scrt, ctrl, .. } => (scrt - 1.0).abs().max((ctrl - 1.0).abs()),
        _ => f64::INFINITY,
    };
    check(
        err_det <= 1e-12 && err_sto <= 1e-12 && secs < 1.0,
        format!("|S - 1| = {err_det:.1e}, max |R_scrt - 1|, |R_ctrl - 1| = {err_sto:.1e}, {secs:.3} s"),
    )
}

fn closed_forms() -> Verdict {
    let grid = |k: usize| k as f64 / 100.0;
    // θ ranges over (0, π/4].
    let theta_grid = |k: usize| k as f64 / 101.0 * FRAC_PI_4;
    let diff = |f: Family, t: Task| -> f64 {
        score(&evaluate_canonical(&f.state().unwrap(), t)).max_abs_diff(&closed_form(&f, t).unwrap())
    };
    let s_iso = (0..=100).map(|k| diff(Family::Isotropic { v: grid(k) }, Task::Deterministic)).fold(0.0, f64::max);
    let r_iso = (0..=100).map(|k| diff(Family::Isotropic { v: grid(k) }, Task::Stochastic)).fold(0.0, f64::max);
    let s_pure =
        (1..=101).map(|k| diff(Family::Pure { theta: theta_grid(k) }, Task::Deterministic)).fold(0.0, f64::max);
    // Independent check of the closed forms themselves.
    let formula = (0..=100)
        .map(|k| {
            let v = grid(k);
            let th = theta_grid(k + 1);
            let a = (closed_form(&Family::Isotropic { v }, Task::Deterministic).unwrap().value() - (1.0 + v) / 2.0).abs();
            let b = (closed_form(&Family::Isotropic { v }, Task::Stochastic).unwrap().value() - (3.0 + 5.0 * v) / 8.0).abs();
            let c = (closed_form(&Family::Pure { theta: th }, Task::Deterministic).unwrap().value()
                - (3.0 + (2.0 * th).sin()) / 4.0)
                .abs();
            a.max(b).max(c)
        })
        .fold(0.0, f64::max);
    let worst = s_iso.max(r_iso).max(s_pure).max(formula);
    check(
        worst <= 1e-12,
        format!("S=(1+v)/2: {s_iso:.1e}, R=(3+5v)/8: {r_iso:.1e}, S=(3+sin 2t)/4: {s_pure:.1e}, formulas {formula:.1e}"),
    )
}

fn thresholds() -> Verdict {
    let det = threshold(&Family::Isotropic { v: 1.0 }, Task::Deterministic, 0.75).unwrap();
    let sto = threshold(&Family::Isotropic { v: 1.0 }, Task::Stochastic, 0.625).unwrap();
    let part = threshold(&Family::Partial { v: 1.0, theta: THETA_STAR }, Task::Deterministic, 0.75).unwrap();
    let ok = (det - 0.5).abs() <= 1e-6 && (sto - 0.4).abs() <= 1e-6 && (part - 0.6878).abs() <= 1e-3;
    check(ok, format!("{det:.6} (0.500000), {sto:.6} (0.400000), {part:.6} (0.6878 +- 1e-3)"))
}

fn classical() -> Verdict {
    let start = Instant::now();
    let det = drivers::classical(Task::Deterministic);
    let sto = drivers::classical(Task::Stochastic);
    let front = frontier_from(&sto);
    let secs = start.elapsed().as_secs_f64();
    let max_ok = det.best * 4 == 3 * 32 && sto.best * 8 == 5 * 32;
    let corner = front.iter().any(|p| p.counts == (12, 8));
    let at_58: Vec<_> = front.iter().filter(|p| p.counts.0 + p.counts.1 == 20).collect();
    let ctrl_ok = at_58.iter().all(|p| p.counts.1 * 4 <= 3 * 16);
    let worst = at_58.iter().map(|p| p.ctrl).fold(0.0, f64::max);
    let frontier_text: Vec<String> = front.iter().map(|p| format!("({}/16, {}/16)", p.counts.0, p.counts.1)).collect();
    check(
        max_ok && corner && ctrl_ok && secs < 300.0,
        format!(
            "maxima {}/32 and {}/32 [{}]; frontier contains (3/4, 1/2) [{}]; R_ctrl <= 3/4 on the R = 5/8 frontier points [{}: max R_ctrl = {worst}]; frontier {}; {secs:.1} s",
            det.best,
            sto.best,
            mark(max_ok),
            mark(corner),
            mark(ctrl_ok),
            frontier_text.join(" ")
        ),
    )
}

fn seesaw() -> Verdict {
    let det = drivers::seesaw(Task::Deterministic, 100, 2024).unwrap();
    let sto = drivers::seesaw(Task::Stochastic, 100, 2024).unwrap();
    let (d, s) = (det.best.value(), sto.best.value());
    let monotone = det
        .per_restart
        .iter()
        .chain(&sto.per_restart)
        .all(|r| r.trajectory.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    let ok = (d - 0.75).abs() <= 1e-6 && (0.625 - 1e-4..=0.625 + 1e-6).contains(&s) && monotone;
    check(ok, format!("best S = {d:.9}, best R = {s:.9} over 100 restarts each; monotone: {monotone}"))
}

fn random_state(rng: &mut Rng, rank: usize) -> DensityMatrix {
    let mut m = CMat::zeros(4);
    for _ in 0..rank {
        let v: Vec<C64> = (0..4).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        m = m + CMat::outer(&CVec::from_slice(&v));
    }
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / tr)).unwrap()
}

fn steering() -> Verdict {
    let unsteer = certify(&isotropic(1.0 / 3.0).unwrap(), DEFAULT_LEVEL).unwrap();
    let u_ok = unsteer.status == SteeringStatus::CertifiedUnsteerable;
    let cfg3 = CertifyConfig::level(1).unwrap().with_steering_axes(BlochPolytope::octahedron());
    let steer = certify_with(&isotropic(0.7).unwrap(), &cfg3).unwrap();
    let s_ok = steer.status == SteeringStatus::CertifiedSteerable && steer.steering_axes == 3;
    let iso = Family::Isotropic { v: 0.5 };
    let oct = BlochPolytope::octahedron();
    let target = 1.0 / 3f64.sqrt();
    let mut t_ok = true;
    let mut brackets = Vec::new();
    for states in [inner_state_polytope(), outer_state_polytope()] {
        let (lo, hi) = feasibility_transition(&iso, &oct, &states, Direction::BobToCharlie, 1e-4).unwrap();
        t_ok &= (lo - target).abs() <= 5e-3 && (hi - target).abs() <= 5e-3;
        brackets.push(format!("[{lo:.5}, {hi:.5}]"));
    }
    let vis = certified_visibility(&Family::Isotropic { v: 0.5 }, DEFAULT_LEVEL).unwrap();
    let v_ok = vis.certified >= 0.40;
    let cfg = CertifyConfig::level(DEFAULT_LEVEL).unwrap();
    let mut rng = stream(606, 0);
    let mut states: Vec<DensityMatrix> = (0..=20).map(|k| isotropic(0.05 * k as f64).unwrap()).collect();
    states.extend((0..=10).map(|k| partial_iso(0.1 * k as f64, THETA_STAR).unwrap()));
    states.extend((0..40).map(|k| random_state(&mut rng, 1 + k % 4)));
    let mut both = 0;
    for rho in &states {
        let u = certify_unsteerable(rho, &cfg).unwrap().0;
        let s = certify_steerable(rho, &cfg).unwrap().0.is_some();
        both += usize::from(u && s);
    }
    check(
        u_ok && s_ok && t_ok && v_ok && both == 0,
        format!(
            "iso(1/3) {:?} [{}]; iso(0.7) {:?} with {} axes [{}]; 3-axis transition inner {} outer {} vs 1/sqrt3 = {target:.5} [{}]; certified visibility {:.4} at level {DEFAULT_LEVEL} [{}]; {} states, {both} with both certificates",
            unsteer.status,
            mark(u_ok),
            steer.status,
            steer.steering_axes,
            mark(s_ok),
            brackets[0],
            brackets[1],
            mark(t_ok),
            vis.certified,
            mark(v_ok),
            states.len()
        ),
    )
}

fn settings_tables() -> Verdict {
    let rep = verify_settings_tables();
    let gated = [Table::FramePreparation, Table::ParityAnalyser, Table::PartialBellAnalyser];
    let parts: Vec<String> = gated.iter().map(|&t| format!("{} {}", t.name(), mark(rep.reproduced(t)))).collect();
    let unitaries: Vec<_> = rep.rows_of(Table::Unitaries).collect();
    let u_ok = unitaries.len() == 4
        && unitaries.iter().all(|r| matches!(r.status, RowStatus::Resolved | RowStatus::Ambiguous));
    let failing: Vec<String> = gated
        .iter()
        .flat_map(|&t| rep.rows_of(t))
        .filter(|r| r.status != RowStatus::Match)
        .map(|r| format!("{} row {}: {}", r.table.name(), r.row, r.detail))
        .collect();
    check(
        gated.iter().all(|&t| rep.reproduced(t)) && u_ok,
        format!(
            "{}; unitaries findings {} [{}]{}",
            parts.join(", "),
            unitaries.iter().map(|r| r.status.name()).collect::<Vec<_>>().join("/"),
            mark(u_ok),
            if failing.is_empty() { String::new() } else { format!("; {}", failing.join("; ")) }
        ),
    )
}

fn experiment() -> Verdict {
    let family = Family::Partial { v: 0.72, theta: THETA_STAR };
    let mut within = 0;
    let mut mean_se = 0.0;
    for seed in 0..100 {
        let r = drivers::experiment(&ExperimentConfig::new(family, Task::Deterministic, 800_000, seed)).unwrap();
        within += usize::from((r.scores.value() - 0.7617).abs() <= 3.0 * r.errors.value());
        mean_se += r.errors.value() / 100.0;
    }
    // Least-squares slope of log SE against log N.
    let ns: [f64; 3] = [1e4, 1e5, 1e6];
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let r = drivers::experiment(&ExperimentConfig::new(family, Task::Deterministic, n as u64, 77)).unwrap();
            (n.ln(), r.errors.value().ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check(
        within >= 95 && (slope + 0.5).abs() <= 0.05,
        format!("{within}/100 seeds within 3 SE of 0.7617 (mean SE {mean_se:.2e}); SE exponent {slope:.4}"),
    )
}

fn tomography() -> Verdict {
    let states =
        [isotropic(0.47).unwrap(), partial_iso(0.72, THETA_STAR).unwrap(), bell_state(Bell::PhiPlus), isotropic(0.0).unwrap()];
    let exact = states.iter().map(|r| tomography_exact(r).unwrap().linear.max_abs_diff(r.mat())).fold(0.0, f64::max);
    let mut good = 0;
    let mut worst: f64 = 1.0;
    for seed in 0..100 {
        let f = recombined_isotropic(0.47, 1400, &mut stream(seed, 0)).unwrap().fidelity;
        good += usize::from(f >= 0.995);
        worst = worst.min(f);
    }
    check(
        exact <= 1e-12 && good >= 95,
        format!("exact inversion error {exact:.1e}; {good}/100 seeds with fidelity >= 0.995 at 1400 events per setting (min {worst:.5})"),
    )
}

fn determinism() -> Verdict {
    let dir = common::scratch("acceptance");
    let runs: [&[&str]; 13] = [
        &["eval", "--task", "det", "--family", "partial", "--v", "0.72"],
        &["eval", "--task", "stoch", "--v", "0.47", "--format", "json"],
        &["sweep", "--task", "stoch", "--svg"],
        &["threshold", "--task", "det", "--family", "partial"],
        &["classical", "--task", "det"],
        &["frontier"],
        &["seesaw", "--task", "stoch", "--restarts", "8", "--seed", "5"],
        &["certify", "--v", "0.45", "--level", "1", "--scan"],
        &["experiment", "--family", "partial", "--v", "0.72", "--events", "200000", "--seed", "3"],
        &["experiment", "--task", "stoch", "--v", "0.47", "--events", "100000", "--format", "json"],
        &["tomography", "--v", "0.47", "--recombine", "--seed", "4"],
        &["verify-tables"],
        &["reproduce", "--events", "70000", "--tomography-events", "500"],
    ];
    let mut failures = Vec::new();
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let first = dir.join(format!("run{k}"));
        let again = dir.join(format!("replay{k}"));
        let mut full: Vec<&str> = args.to_vec();
        let first_s = first.to_string_lossy().into_owned();
        full.extend(["--out", &first_s]);
        let (code, _, err) = common::run(&full, &[]);
        if code != 0 {
            failures.push(format!("{} exited {code}: {err}", args[0]));
            continue;
        }
        let manifest = first.join("manifest.json");
        let again_s = again.to_string_lossy().into_owned();
        let (code, _, err) = common::run(&["replay", &manifest.to_string_lossy(), "--out", &again_s], &[("SECSHARE_THREADS", "3")]);
        if code != 0 {
            failures.push(format!("replay of {} exited {code}: {err}", args[0]));
            continue;
        }
        let (a, b) = (common::hashes(&first), common::hashes(&again));
        files += a.len();
        if a != b || a.is_empty() {
            failures.push(format!("{} outputs differ after replay", args[0]));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(
        failures.is_empty(),
        format!("{} runs replayed from their manifests, {files} CSV/JSON/SVG files hash-identical{}", runs.len(), if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ideal protocols", ideal_protocols),
        ("closed forms vs evaluation", closed_forms),
        ("thresholds by bisection", thresholds),
        ("classical enumeration", classical),
        ("seesaw", seesaw),
        ("steering certificates", steering),
        ("settings tables", settings_tables),
        ("experiment simulation", experiment),
        ("tomography", tomography),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        failed += usize::from(!v.pass);
        println!(
            "criterion {:>2} {}: {} ({:.1} s) {}",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
