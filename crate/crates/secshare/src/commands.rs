//! Subcommand bodies. Each returns a [`Report`] and writes nothing.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use secshare_core::classical::{frontier_from, Enumeration};
use secshare_core::optics::experiment::{prepared_state, ExperimentConfig, Jitter};
use secshare_core::optics::tables::{verify_settings_tables, Table as SettingsTable};
use secshare_core::optics::tomography::{reconstruct, recombined_isotropic_data, TomographyData};
use secshare_core::protocol::{closed_form, evaluate_canonical, score, score_by_z, threshold, Family, Task};
use secshare_core::rng::stream;
use secshare_core::states::{fidelity, negativity};
use secshare_core::steering::{
    certified_visibility_with, certify_in, BlochPolytope, CertifyConfig, Direction, DirectionSet, StatePolytope,
};
use secshare_core::{Bell, DensityMatrix};

use crate::cli::*;
use crate::drivers;
use crate::error::{CliError, CliResult};
use crate::formats::{behavior_json, score_fields, scores_json, state_json, task_name, Cell, MatrixFile, Table};
use crate::reproduce;
use crate::svg::{line_plot, Series};

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct Report {
    /// Written as `<name>.csv` or `<name>.json`.
    pub tables: Vec<Table>,
    /// Written as `<name>.json`.
    pub documents: Vec<(String, Value)>,
    /// Written verbatim under the given file name.
    pub extras: Vec<(String, String)>,
    /// Lines printed on success.
    pub summary: Vec<String>,
}

impl Report {
    fn document(&mut self, name: &str, v: Value) {
        self.documents.push((name.to_string(), v));
    }
}

pub fn run(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Threshold(a) => threshold_cmd(a),
        Command::Classical(a) => classical(a),
        Command::Frontier(_) => frontier(),
        Command::Seesaw(a) => seesaw(a),
        Command::Certify(a) => certify(a),
        Command::Experiment(a) => experiment(a),
        Command::Tomography(a) => tomography(a),
        Command::VerifyTables(_) => verify_tables(),
        Command::Reproduce(a) => reproduce::run(a),
        Command::Replay(_) => Err(CliError::validation("replay is resolved before running")),
    }
}

/// The state named by a state file, or else by the family flags.
fn state_of(args: &StateArgs, file: &Option<PathBuf>) -> CliResult<(DensityMatrix, Option<Family>)> {
    match file {
        Some(path) => Ok((crate::formats::read_state(path)?, None)),
        None => {
            let f = args.family()?;
            Ok((f.state()?, Some(f)))
        }
    }
}

fn family_json(f: &Family) -> Value {
    json!({ "family": f.name(), "v": f.visibility(), "theta": f.theta() })
}

fn fmt_scores(s: &secshare_core::protocol::Scores) -> String {
    score_fields(s).iter().map(|(k, v)| format!("{k} = {v:.6}")).collect::<Vec<_>>().join(", ")
}

fn eval(a: &EvalArgs) -> CliResult<Report> {
    let task = Task::from(a.task);
    let (rho, family) = state_of(&a.state, &a.state_file)?;
    let b = evaluate_canonical(&rho, task);
    let s = score(&b);
    let mut t = Table::new("scores", &["quantity", "value"]);
    for (k, v) in score_fields(&s) {
        t.push(vec![k.into(), v.into()]);
    }
    for (z, sz) in score_by_z(&b).iter().enumerate() {
        for (k, v) in score_fields(sz) {
            t.push(vec![format!("{k}[z={z}]").into(), v.into()]);
        }
    }
    if let Some(f) = family {
        for (k, v) in score_fields(&closed_form(&f, task)?) {
            t.push(vec![format!("closed_form.{k}").into(), v.into()]);
        }
    }
    t.push(vec!["negativity".into(), negativity(&rho).into()]);
    let mut r = Report { summary: vec![fmt_scores(&s)], ..Report::default() };
    r.tables.push(t);
    r.document("behavior", behavior_json(&b));
    r.document("state", state_json(&rho));
    Ok(r)
}

fn sweep(a: &SweepArgs) -> CliResult<Report> {
    let task = Task::from(a.task);
    if a.points < 2 {
        return Err(CliError::validation("a sweep needs at least 2 points"));
    }
    let grid = |k: usize, hi: f64| hi * k as f64 / (a.points - 1) as f64;
    let members: Vec<Family> = (0..a.points)
        .map(|k| match a.family {
            FamilyArg::Isotropic => Family::Isotropic { v: grid(k, 1.0) },
            FamilyArg::Partial => Family::Partial { v: grid(k, 1.0), theta: a.theta },
            FamilyArg::Pure => Family::Pure { theta: FRAC_PI_4 * (k + 1) as f64 / a.points as f64 },
        })
        .collect();
    if let Some(f) = members.first() {
        f.state()?;
    }
    let scores = drivers::sweep(&members, task)?;
    let fields: Vec<&str> = score_fields(&scores[0]).iter().map(|(k, _)| *k).collect();
    let mut columns = vec!["family", "v", "theta"];
    columns.extend(&fields);
    let mut t = Table::new("sweep", &columns);
    for (f, s) in members.iter().zip(&scores) {
        let mut row: Vec<Cell> = vec![f.name().into(), f.visibility().into(), f.theta().into()];
        row.extend(score_fields(s).into_iter().map(|(_, v)| Cell::from(v)));
        t.push(row);
    }
    let mut r = Report::default();
    if a.svg {
        let x_of = |f: &Family| if a.family == FamilyArg::Pure { f.theta() } else { f.visibility() };
        let colors = ["#1f77b4", "#ff7f0e", "#2ca02c"];
        let mut series: Vec<Series> = fields
            .iter()
            .enumerate()
            .map(|(i, name)| Series {
                label: name,
                color: colors[i % colors.len()],
                points: members.iter().zip(&scores).map(|(f, s)| (x_of(f), score_fields(s)[i].1)).collect(),
                dashed: false,
            })
            .collect();
        let (x0, x1) = (x_of(&members[0]), x_of(&members[a.points - 1]));
        let bound = task.unassisted_bound();
        series.push(Series { label: "bound without entanglement", color: "#777777", points: vec![(x0, bound), (x1, bound)], dashed: true });
        let x_label = if a.family == FamilyArg::Pure { "theta" } else { "v" };
        let title = format!("{} task, {} family", task_name(task), members[0].name());
        r.extras.push(("sweep.svg".into(), line_plot(&title, x_label, "success probability", &series)));
    }
    r.summary.push(format!("{} points, last: {}", a.points, fmt_scores(&scores[a.points - 1])));
    r.tables.push(t);
    Ok(r)
}

fn threshold_cmd(a: &ThresholdArgs) -> CliResult<Report> {
    let task = Task::from(a.task);
    let family = match a.family {
        FamilyArg::Isotropic => Family::Isotropic { v: 1.0 },
        FamilyArg::Partial => Family::Partial { v: 1.0, theta: a.theta },
        FamilyArg::Pure => return Err(CliError::validation("the pure family has no visibility to threshold")),
    };
    family.state()?;
    let target = a.target.unwrap_or(task.unassisted_bound());
    if !(0.0..=1.0).contains(&target) {
        return Err(CliError::validation(format!("target {target} is not a probability")));
    }
    let v = threshold(&family, task, target)?;
    let mut t = Table::new("threshold", &["family", "theta", "task", "target", "v"]);
    t.push(vec![family.name().into(), family.theta().into(), task_name(task).into(), target.into(), v.into()]);
    Ok(Report { tables: vec![t], summary: vec![format!("threshold v = {v:.6}")], ..Report::default() })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn classical(a: &ClassicalArgs) -> CliResult<Report> {
    let task = Task::from(a.task);
    let en = drivers::classical(task);
    let g = gcd(en.best, 32).max(1);
    let mut t = Table::new("maximizers", &["f_id", "g_id", "h_id"]);
    for s in &en.argmax {
        t.push(vec![u32::from(s.f).into(), u32::from(s.g).into(), u32::from(s.h).into()]);
    }
    let doc = json!({
        "task": task_name(task),
        "scanned": en.scanned,
        "best": { "numerator": en.best, "denominator": 32, "reduced": format!("{}/{}", en.best / g, 32 / g), "value": f64::from(en.best) / 32.0 },
        "maximizers": en.maximizers,
        "maximizers_listed": en.argmax.len(),
    });
    let summary = vec![format!(
        "classical maximum = {}/{} = {} over {} strategies ({} maximizers)",
        en.best / g,
        32 / g,
        f64::from(en.best) / 32.0,
        en.scanned,
        en.maximizers
    )];
    Ok(Report { tables: vec![t], documents: vec![("classical".into(), doc)], summary, ..Report::default() })
}

fn frontier_table(en: &Enumeration) -> Table {
    let mut t = Table::new("frontier", &["Rscrt", "Rctrl", "f_id", "g_id", "h_id"]);
    for p in frontier_from(en) {
        let s = p.strategy;
        t.push(vec![p.scrt.into(), p.ctrl.into(), u32::from(s.f).into(), u32::from(s.g).into(), u32::from(s.h).into()]);
    }
    t
}

fn frontier() -> CliResult<Report> {
    let t = frontier_table(&drivers::classical(Task::Stochastic));
    let summary = vec![format!("{} frontier points", t.rows.len())];
    Ok(Report { tables: vec![t], summary, ..Report::default() })
}

fn seesaw(a: &SeesawArgs) -> CliResult<Report> {
    let task = Task::from(a.task);
    let rep = drivers::seesaw(task, a.restarts, a.seed)?;
    let mut t = Table::new("restarts", &["index", "value", "sweeps", "converged"]);
    for r in &rep.per_restart {
        t.push(vec![r.index.into(), r.value.into(), r.sweeps().into(), r.converged.into()]);
    }
    let doc = json!({
        "task": task_name(task),
        "restarts": a.restarts,
        "seed": a.seed,
        "best": scores_json(&rep.best),
        "best_value": rep.best.value(),
        "best_restart": rep.best_restart,
        "per_restart": rep.per_restart.iter().map(|r| json!({
            "index": r.index, "value": r.value, "sweeps": r.sweeps(), "converged": r.converged,
        })).collect::<Vec<_>>(),
        "sweeps": rep.per_restart.iter().map(|r| r.trajectory.clone()).collect::<Vec<_>>(),
    });
    let summary = vec![format!("best over {} restarts: {} (restart {})", a.restarts, fmt_scores(&rep.best), rep.best_restart)];
    Ok(Report { tables: vec![t], documents: vec![("seesaw".into(), doc)], summary, ..Report::default() })
}

fn direction_name(d: Direction) -> &'static str {
    d.name()
}

fn certify(a: &CertifyArgs) -> CliResult<Report> {
    let (rho, family) = state_of(&a.state, &a.state_file)?;
    let mut cfg = CertifyConfig::level(a.level)?;
    if a.steering_axes == SteeringAxesArg::Xyz {
        cfg = cfg.with_steering_axes(BlochPolytope::octahedron());
    }
    let dirs = DirectionSet::from(a.direction);
    let v = certify_in(&rho, &cfg, dirs)?;
    let mut t = Table::new("lps", &["direction", "polytope", "status", "iterations", "residual", "margin"]);
    for lp in &v.lps {
        let poly = match lp.polytope {
            StatePolytope::Inner => "inner",
            StatePolytope::Outer => "outer",
        };
        t.push(vec![
            direction_name(lp.direction).into(),
            poly.into(),
            format!("{:?}", lp.status).into(),
            lp.iterations.into(),
            lp.residual.into(),
            lp.margin.into(),
        ]);
    }
    let mut doc = json!({
        "status": format!("{:?}", v.status),
        "directions": v.directions.map(|d| d.name()),
        "examined": dirs.name(),
        "state": match family { Some(f) => family_json(&f), None => json!({ "file": a.state_file }) },
        "polytopes": {
            "level": v.level,
            "measurement_axes": v.measurement_axes,
            "steering_axes": v.steering_axes,
            "shrink_factor": v.shrink_factor,
            "state_vertices": v.state_vertices,
            "outer_scale": v.outer_scale,
        },
        "shrunk_min_eigenvalue": {
            "B->C": v.shrunk_min_eigenvalue[0],
            "C->B": v.shrunk_min_eigenvalue[1],
        },
        "lp_iterations": v.lps.iter().map(|l| l.iterations).sum::<usize>(),
        "lps": v.lps.iter().map(|l| json!({
            "direction": direction_name(l.direction),
            "polytope": match l.polytope { StatePolytope::Inner => "inner", StatePolytope::Outer => "outer" },
            "status": format!("{:?}", l.status),
            "iterations": l.iterations,
            "residual": l.residual,
            "margin": l.margin,
        })).collect::<Vec<_>>(),
    });
    let mut summary = vec![format!(
        "{:?} ({}; level {}, {} measurement axes, {} steering axes)",
        v.status,
        v.directions.map_or("no direction", |d| d.name()),
        a.level,
        v.measurement_axes,
        v.steering_axes
    )];
    if a.scan {
        let f = match family {
            Some(f @ (Family::Isotropic { .. } | Family::Partial { .. })) => f,
            _ => return Err(CliError::validation("--scan needs the isotropic or partial family")),
        };
        let b = certified_visibility_with(&f, &cfg)?;
        doc["visibility"] = json!({ "certified": b.certified, "rejected": b.rejected, "steps": b.steps, "level": b.level });
        summary.push(format!("certified unsteerable up to v = {:.4} at level {}", b.certified, a.level));
    }
    Ok(Report { tables: vec![t], documents: vec![("verdict".into(), doc)], summary, ..Report::default() })
}

/// Experiment settings read from a TOML or JSON file; missing entries keep
/// the command line values.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub task: Option<TaskArg>,
    pub family: Option<FamilyArg>,
    pub v: Option<f64>,
    pub theta: Option<f64>,
    pub events: Option<u64>,
    pub seed: Option<u64>,
    pub rate: Option<f64>,
    pub jitter_motorized: Option<f64>,
    pub jitter_manual: Option<f64>,
}

impl ExperimentFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        let bad = |e: String| CliError::validation(format!("malformed config {}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))
        }
    }

    pub fn apply(self, a: &mut ExperimentArgs) {
        if let Some(x) = self.task {
            a.task = x;
        }
        if let Some(x) = self.family {
            a.state.family = x;
        }
        if let Some(x) = self.v {
            a.state.v = x;
        }
        if let Some(x) = self.theta {
            a.state.theta = x;
        }
        if let Some(x) = self.events {
            a.events = x;
        }
        if let Some(x) = self.seed {
            a.seed = x;
        }
        if let Some(x) = self.rate {
            a.rate = x;
        }
        if let Some(x) = self.jitter_motorized {
            a.jitter_motorized = x;
        }
        if let Some(x) = self.jitter_manual {
            a.jitter_manual = x;
        }
    }
}

/// Folds a config file into the arguments so the manifest records plain values.
pub fn resolve(cmd: Command) -> CliResult<Command> {
    match cmd {
        Command::Experiment(mut a) => {
            if let Some(path) = a.config.take() {
                ExperimentFile::read(&path)?.apply(&mut a);
            }
            Ok(Command::Experiment(a))
        }
        other => Ok(other),
    }
}

pub fn experiment_config(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let family = a.state.family()?;
    let cfg = ExperimentConfig {
        family,
        task: a.task.into(),
        events: a.events,
        rate: a.rate,
        seed: a.seed,
        jitter: Jitter { motorized_deg: a.jitter_motorized, manual_deg: a.jitter_manual },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn outcome_name(a: usize) -> &'static str {
    ["0", "1", "bot"][a]
}

fn experiment(a: &ExperimentArgs) -> CliResult<Report> {
    let cfg = experiment_config(a)?;
    let res = drivers::experiment(&cfg)?;
    let alphabet = cfg.task.alphabet();
    let mut t = Table::new("counts", &["setting", "outcome", "count"]);
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..2 {
                for k in 0..alphabet {
                    t.push(vec![format!("x{x}y{y}z{z}").into(), outcome_name(k).into(), res.counts.counts[z][x][y][k].into()]);
                }
            }
        }
    }
    let theory = closed_form(&cfg.family, cfg.task)?;
    let prepared = prepared_state(&cfg.family)?;
    let doc = json!({
        "config": {
            "task": task_name(cfg.task),
            "state": family_json(&cfg.family),
            "events": cfg.events,
            "seed": cfg.seed,
            "rate": cfg.rate,
            "duration_s": cfg.duration(),
            "chunks": cfg.chunk_count(),
            "jitter_deg": { "motorized": cfg.jitter.motorized_deg, "manual": cfg.jitter.manual_deg },
        },
        "scores": scores_json(&res.scores),
        "standard_errors": scores_json(&res.errors),
        "by_z": res.by_z.iter().enumerate().map(|(z, (s, e))| json!({
            "z": z, "scores": scores_json(s), "standard_errors": scores_json(e),
        })).collect::<Vec<_>>(),
        "theory": scores_json(&theory),
        "fidelities": { "prepared_vs_target": fidelity(&prepared, &cfg.family.state()?) },
    });
    let summary = vec![
        format!("{} events: {}", cfg.events, fmt_scores(&res.scores)),
        format!("standard errors: {}", fmt_scores(&res.errors)),
        format!("theory: {}", fmt_scores(&theory)),
    ];
    let mut r = Report { tables: vec![t], summary, ..Report::default() };
    r.document("summary", doc);
    r.document("behavior", behavior_json(&res.behavior));
    Ok(r)
}

const PAULI: [char; 3] = ['X', 'Y', 'Z'];
const SIGNS: [&str; 4] = ["++", "+-", "-+", "--"];

fn push_counts(t: &mut Table, source: &str, d: &TomographyData) {
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..4 {
                t.push(vec![source.into(), format!("{}{}", PAULI[i], PAULI[j]).into(), SIGNS[k].into(), d.counts[i][j][k].into()]);
            }
        }
    }
}

fn tomography(a: &TomographyArgs) -> CliResult<Report> {
    let mut t = Table::new("counts", &["source", "setting", "outcome", "count"]);
    let mut rng = stream(a.seed, 0);
    let (target, rec) = if a.recombine {
        let v = match (a.state_file.is_some(), a.state.family()?) {
            (false, Family::Isotropic { v }) => v,
            _ => return Err(CliError::validation("--recombine needs the isotropic family")),
        };
        let (data, rec) = recombined_isotropic_data(v, a.events, &mut rng)?;
        for (b, d) in Bell::ALL.iter().zip(&data) {
            push_counts(&mut t, b.name(), d);
        }
        (Family::Isotropic { v }.state()?, rec)
    } else {
        let (rho, _) = state_of(&a.state, &a.state_file)?;
        let d = TomographyData::simulate(&rho, a.events, &mut rng)?;
        push_counts(&mut t, "state", &d);
        let rec = reconstruct(&d.correlators(), &rho)?;
        (rho, rec)
    };
    let doc = json!({
        "events_per_setting": a.events,
        "recombined": a.recombine,
        "fidelity": rec.fidelity,
        "projected": rec.projected,
        "target": state_json(&target),
        "reconstructed": state_json(&rec.state),
        "linear_inversion": MatrixFile::from_mat(&rec.linear),
    });
    let summary = vec![format!("fidelity = {:.6}{}", rec.fidelity, if rec.projected { " (after PSD projection)" } else { "" })];
    Ok(Report { tables: vec![t], documents: vec![("tomography".into(), doc)], summary, ..Report::default() })
}

fn verify_tables() -> CliResult<Report> {
    let rep = verify_settings_tables();
    let mut t = Table::new("tables", &["table", "row", "settings", "status", "detail"]);
    for f in &rep.rows {
        t.push(vec![f.table.name().into(), f.row.clone().into(), f.settings.clone().into(), f.status.name().into(), f.detail.clone().into()]);
    }
    let reproduced: serde_json::Map<String, Value> =
        SettingsTable::ALL.iter().map(|&tb| (tb.name().to_string(), json!(rep.reproduced(tb)))).collect();
    let doc = json!({ "convention": rep.convention, "reproduced": reproduced, "notes": rep.notes });
    let mut summary = vec![format!("convention: {}", rep.convention)];
    for tb in SettingsTable::ALL {
        let rows: Vec<&str> = rep.rows_of(tb).map(|f| f.status.name()).collect();
        summary.push(format!("{}: {}", tb.name(), rows.join(", ")));
    }
    Ok(Report { tables: vec![t], documents: vec![("tables-summary".into(), doc)], summary, ..Report::default() })
}
