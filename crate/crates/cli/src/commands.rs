use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use chrono::Utc;
use distctl::stability::{affine_residual, require_observable, StaticGain};
use distctl::{
    baseline_fully_connected, baseline_topology_restricted, baseline_topology_restricted_with,
    build_horizon, design_estimator, evaluate_global_cost, extract_horizon_covariances, load_config,
    lyapunov_decrement_check, monte_carlo, propagate_affine_map, rollout as run_rollout, run_synthesis,
    sample_noise, topology_sweep, BatchStats, Controller, ControlLaw, Error, NetworkTopology, TopologySpec,
    ValidatedInstance,
};
use serde::Serialize;

use crate::bundle::{read_bundle, write_bundle};
use crate::output::{artifact, sha256_hex, write_csv, RunManifest};
use crate::Common;

/// A check ran to completion and did not hold.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    Usage,
    Validation,
    Numerical,
    Check,
}

impl Failure {
    pub fn classify(e: &anyhow::Error) -> Self {
        if e.downcast_ref::<CheckFailed>().is_some() {
            return Failure::Check;
        }
        match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
            Some(err) if err.is_validation() => Failure::Validation,
            Some(_) => Failure::Numerical,
            None => Failure::Usage,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Failure::Usage => 1,
            Failure::Validation => 2,
            Failure::Numerical => 3,
            Failure::Check => 4,
        }
    }
}

struct Run<'a> {
    common: &'a Common,
    subcommand: &'static str,
    started_at: String,
    config_sha256: String,
    inst: ValidatedInstance,
    artifacts: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    fn start(common: &'a Common, subcommand: &'static str) -> Result<Self> {
        let started_at = Utc::now().to_rfc3339();
        let bytes = fs::read(&common.config).with_context(|| format!("cannot read {}", common.config.display()))?;
        let mut inst = load_config(&common.config)?;
        if let Some(spec) = &common.topology_override {
            let topo = spec.parse::<TopologySpec>()?.build(inst.dims().agents)?;
            inst = inst.with_topology(topo)?;
        }
        if let Some(seed) = common.seed {
            let mut cfg = inst.config().clone();
            cfg.rng_seed = seed;
            inst = inst.with_config(cfg)?;
        }
        fs::create_dir_all(&common.out).with_context(|| format!("cannot create {}", common.out.display()))?;
        Ok(Self {
            common,
            subcommand,
            started_at,
            config_sha256: sha256_hex(&bytes),
            inst,
            artifacts: Vec::new(),
        })
    }

    fn seed(&self) -> u64 {
        self.inst.config().rng_seed
    }

    fn path(&self, name: &str) -> PathBuf {
        self.common.out.join(name)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = write_csv(&self.path(name), rows)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn finish(self) -> Result<()> {
        let out = &self.common.out;
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            config: self.common.config.display().to_string(),
            config_sha256: self.config_sha256.clone(),
            seed: self.seed(),
            topology_override: self.common.topology_override.clone(),
            output_dir: out.display().to_string(),
            started_at: self.started_at.clone(),
            finished_at: Utc::now().to_rfc3339(),
            artifacts: self.artifacts.iter().map(|p| artifact(out, p)).collect::<Result<_>>()?,
        };
        let path = out.join(RunManifest::file_name(self.subcommand));
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    cost: f64,
    delta: Option<f64>,
    state_cost: f64,
    input_cost: f64,
    disturbance: f64,
    error: f64,
    cross: f64,
    mean: f64,
    selected: bool,
}

#[derive(Serialize)]
struct TimingRow {
    iteration: usize,
    seconds: f64,
}

pub fn synth(common: &Common) -> Result<()> {
    let mut run = Run::start(common, "synth")?;
    if run.inst.config().n_max == 1 {
        eprintln!("warning: n_max = 1, the stopping rule is never evaluated");
    }
    let res = run_synthesis(&run.inst)?;
    let history: Vec<HistoryRow> = res
        .history
        .records()
        .iter()
        .map(|r| HistoryRow {
            iteration: r.iteration,
            cost: r.cost.total,
            delta: r.delta,
            state_cost: r.cost.state_cost,
            input_cost: r.cost.input_cost,
            disturbance: r.cost.disturbance,
            error: r.cost.error,
            cross: r.cost.cross,
            mean: r.cost.mean,
            selected: r.iteration == res.best_iteration,
        })
        .collect();
    run.csv("history.csv", &history)?;
    // Wall time lives apart so history.csv stays reproducible.
    let timing: Vec<TimingRow> = res
        .history
        .records()
        .iter()
        .map(|r| TimingRow { iteration: r.iteration, seconds: r.elapsed.as_secs_f64() })
        .collect();
    run.csv("timing.csv", &timing)?;
    let files = write_bundle(&run.path("bundle"), &run.inst, &res)?;
    run.artifacts.extend(files);
    println!(
        "J = {} at iteration {} of {} ({:?})",
        res.cost.total,
        res.best_iteration,
        res.history.len(),
        res.stop
    );
    run.finish()
}

fn bundle_dir(common: &Common, bundle: Option<PathBuf>) -> PathBuf {
    bundle.unwrap_or_else(|| common.out.join("bundle"))
}

fn analytic_cost(inst: &ValidatedInstance, law: &ControlLaw) -> Result<f64> {
    let ops = build_horizon(inst)?;
    let (_, cov) = design_estimator(law, inst)?;
    Ok(evaluate_global_cost(law, &extract_horizon_covariances(&cov), &ops, inst.config())?.total)
}

#[derive(Serialize)]
struct CostRow {
    run: usize,
    cost: f64,
}

#[derive(Serialize)]
struct McSummary {
    runs: usize,
    seed: u64,
    mean: f64,
    std_error: f64,
    analytic_cost: f64,
    z: f64,
}

pub fn montecarlo(common: &Common, bundle: Option<PathBuf>, runs: Option<u64>) -> Result<()> {
    let mut run = Run::start(common, "montecarlo")?;
    let b = read_bundle(&bundle_dir(common, bundle), &run.inst)?;
    let runs = runs.map(|r| r as usize).unwrap_or(run.inst.config().mc_runs);
    let analytic = analytic_cost(&run.inst, &b.law)?;
    log::info!("bundle recorded J = {} at iteration {}", b.manifest.cost, b.manifest.best_iteration);
    let ctrl = Controller::EstimateFeedback { law: b.law, gains: b.gains };
    let stats = monte_carlo(&run.inst, &ctrl, runs, run.seed())?;
    let rows: Vec<CostRow> = stats.costs.iter().enumerate().map(|(k, c)| CostRow { run: k, cost: *c }).collect();
    run.csv("montecarlo_costs.csv", &rows)?;
    let z = if stats.std_error > 0.0 { (stats.mean - analytic) / stats.std_error } else { 0.0 };
    let summary = McSummary {
        runs,
        seed: run.seed(),
        mean: stats.mean,
        std_error: stats.std_error,
        analytic_cost: analytic,
        z,
    };
    run.csv("montecarlo_summary.csv", &[summary])?;
    println!("mean {} ± {} over {runs} runs; analytic {analytic} (z = {z:.3})", stats.mean, stats.std_error);
    run.finish()
}

pub fn rollout(common: &Common, bundle: Option<PathBuf>) -> Result<()> {
    let mut run = Run::start(common, "rollout")?;
    let b = read_bundle(&bundle_dir(common, bundle), &run.inst)?;
    let ctrl = Controller::EstimateFeedback { law: b.law, gains: b.gains };
    let r = run_rollout(&run.inst, &ctrl, run.seed())?;
    let d = run.inst.dims();
    let (nn, np) = (d.mas_state(), d.mas_input());

    let mut header = vec!["t".to_string()];
    header.extend((1..=nn).map(|k| format!("x{k}")));
    header.extend((1..=np).map(|k| format!("u{k}")));
    for i in 1..=d.agents {
        header.extend((1..=nn).map(|k| format!("xhat{i}_{k}")));
    }
    let path = run.path("rollout.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&header)?;
    let num = |v: f64| format!("{v:?}");
    for t in 0..=d.horizon {
        let mut rec = vec![t.to_string()];
        rec.extend(r.states[t].iter().map(|v| num(*v)));
        match r.inputs.get(t) {
            Some(u) => rec.extend(u.iter().map(|v| num(*v))),
            None => rec.extend(std::iter::repeat(String::new()).take(np)),
        }
        for belief in &r.beliefs {
            rec.extend(belief[t].iter().map(|v| num(*v)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    run.artifacts.push(path);
    println!("realized cost {}", r.cost);
    run.finish()
}

#[derive(Serialize)]
struct CompareRow {
    method: &'static str,
    analytic_cost: f64,
    mc_mean: f64,
    mc_std_error: f64,
    runs: usize,
}

#[derive(Serialize)]
struct CompareRunRow {
    run: usize,
    proposed: f64,
    fully_connected: f64,
    restricted: f64,
    restricted_matched: f64,
}

pub fn compare(common: &Common, runs: Option<u64>) -> Result<()> {
    let mut run = Run::start(common, "compare")?;
    let inst = run.inst.clone();
    let runs = runs.map(|r| r as usize).unwrap_or(inst.config().mc_runs);
    let seed = run.seed();

    let proposed = run_synthesis(&inst).context("proposed law")?;
    let fc_inst = inst.with_topology(NetworkTopology::complete(inst.dims().agents))?;
    let fc = baseline_fully_connected(&inst).context("fully connected baseline")?;
    let restricted = baseline_topology_restricted(&inst).context("restricted baseline")?;
    let matched = baseline_topology_restricted_with(&inst, false).context("restricted baseline")?;

    // Common random numbers: every controller sees the same noise.
    let batches: Vec<(&'static str, f64, BatchStats)> = vec![
        (
            "proposed",
            proposed.cost.total,
            monte_carlo(&inst, &Controller::EstimateFeedback { law: proposed.law, gains: proposed.gains }, runs, seed)?,
        ),
        (
            "fully_connected",
            fc.cost.total,
            monte_carlo(&fc_inst, &Controller::EstimateFeedback { law: fc.law, gains: fc.gains }, runs, seed)?,
        ),
        (
            "restricted",
            restricted.cost.total,
            monte_carlo(&inst, &Controller::MeasurementFeedback { law: restricted.law }, runs, seed)?,
        ),
        (
            "restricted_matched",
            matched.cost.total,
            monte_carlo(&inst, &Controller::MeasurementFeedback { law: matched.law }, runs, seed)?,
        ),
    ];
    let rows: Vec<CompareRow> = batches
        .iter()
        .map(|(method, j, s)| CompareRow {
            method,
            analytic_cost: *j,
            mc_mean: s.mean,
            mc_std_error: s.std_error,
            runs,
        })
        .collect();
    run.csv("compare.csv", &rows)?;
    let per_run: Vec<CompareRunRow> = (0..runs)
        .map(|k| CompareRunRow {
            run: k,
            proposed: batches[0].2.costs[k],
            fully_connected: batches[1].2.costs[k],
            restricted: batches[2].2.costs[k],
            restricted_matched: batches[3].2.costs[k],
        })
        .collect();
    run.csv("compare_runs.csv", &per_run)?;
    for r in &rows {
        println!("{:<20} J = {:<12.4} MC = {:.4} ± {:.4}", r.method, r.analytic_cost, r.mc_mean, r.mc_std_error);
    }
    run.finish()
}

#[derive(Serialize)]
struct SweepCsvRow {
    links: usize,
    status: &'static str,
    cost: Option<f64>,
    iterations: Option<usize>,
    best_iteration: Option<usize>,
    message: String,
}

fn default_links(agents: usize) -> Vec<usize> {
    let max = agents * agents.saturating_sub(1) / 2;
    let ring = NetworkTopology::ring(agents).links();
    (ring..=max).collect()
}

pub fn sweep(common: &Common, links: Option<Vec<usize>>) -> Result<()> {
    let mut run = Run::start(common, "sweep")?;
    let links = links.unwrap_or_else(|| default_links(run.inst.dims().agents));
    let rows: Vec<SweepCsvRow> = topology_sweep(&run.inst, &links)
        .into_iter()
        .map(|row| match row.outcome {
            Ok(o) => SweepCsvRow {
                links: row.links,
                status: "ok",
                cost: Some(o.cost),
                iterations: Some(o.iterations),
                best_iteration: Some(o.best_iteration),
                message: String::new(),
            },
            Err(e) => SweepCsvRow {
                links: row.links,
                status: if e.is_validation() { "invalid" } else { "failed" },
                cost: None,
                iterations: None,
                best_iteration: None,
                message: e.to_string(),
            },
        })
        .collect();
    run.csv("sweep.csv", &rows)?;
    let costs: Vec<f64> = rows.iter().filter_map(|r| r.cost).collect();
    for r in &rows {
        match r.cost {
            Some(c) => println!("{:>3} links  J = {c:.4}", r.links),
            None => println!("{:>3} links  {}", r.links, r.message),
        }
    }
    if !costs.is_empty() {
        let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        println!("spread max/min = {:.4}", max / min);
    }
    run.finish()
}

#[derive(Serialize)]
struct StabilityRow {
    agent: usize,
    t: usize,
    min_eig_subtraction: f64,
    min_eig_inverse: f64,
    min_eig_direct: f64,
    form_gap: f64,
}

#[derive(Serialize)]
struct StabilitySummary {
    steps: usize,
    seed: u64,
    affine_residual: f64,
    min_eig_subtraction: f64,
    min_eig_inverse: f64,
    min_eig_direct: f64,
    max_form_gap: f64,
    passed: bool,
}

const STABILITY_TOL: f64 = 1e-8;

pub fn stability(common: &Common, gain: Option<f64>, bundle: Option<PathBuf>, steps: usize) -> Result<()> {
    let mut run = Run::start(common, "stability")?;
    let inst = run.inst.clone();
    if steps == 0 {
        return Err(anyhow!("--steps must be at least 1"));
    }
    if let Err(e) = require_observable(inst.topology(), inst.dims().state_dim) {
        return Err(anyhow::Error::new(e).context(CheckFailed("topology is not observable".into())));
    }
    let static_gain = match bundle {
        Some(dir) => StaticGain::new(read_bundle(&dir, &inst)?.law.block(0, 0), &inst)?,
        None => StaticGain::diagonal(gain.unwrap_or(0.5), &inst)?,
    };
    let design = static_gain.design(&inst, steps).context("estimator design")?;
    let map = propagate_affine_map(&inst, &static_gain, &design.gains, steps).context("affine map")?;
    let entries = lyapunov_decrement_check(&inst, &static_gain, &design, &map)?;
    let noise = sample_noise(&inst, steps, run.seed())?;
    let residual = affine_residual(&inst, &static_gain, &design.gains, &map, &noise)?;

    let rows: Vec<StabilityRow> = entries
        .iter()
        .map(|e| StabilityRow {
            agent: e.agent + 1,
            t: e.t,
            min_eig_subtraction: e.min_eig_subtraction,
            min_eig_inverse: e.min_eig_inverse,
            min_eig_direct: e.min_eig_direct,
            form_gap: e.form_gap,
        })
        .collect();
    run.csv("stability.csv", &rows)?;
    let min = |f: fn(&StabilityRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let max_gap = rows.iter().map(|r| r.form_gap).fold(0.0, f64::max);
    let mut summary = StabilitySummary {
        steps,
        seed: run.seed(),
        affine_residual: residual,
        min_eig_subtraction: min(|r| r.min_eig_subtraction),
        min_eig_inverse: min(|r| r.min_eig_inverse),
        min_eig_direct: min(|r| r.min_eig_direct),
        max_form_gap: max_gap,
        passed: false,
    };
    let mut failures = Vec::new();
    if !(summary.min_eig_subtraction > 0.0 && summary.min_eig_inverse > 0.0) {
        failures.push(format!("decrement matrix not positive definite (min eig {})", summary.min_eig_inverse));
    }
    if !(max_gap <= STABILITY_TOL) {
        failures.push(format!("decrement forms disagree by {max_gap:e}"));
    }
    if !(residual <= STABILITY_TOL) {
        failures.push(format!("affine identity residual {residual:e}"));
    }
    summary.passed = failures.is_empty();
    println!(
        "min eig {:.6}, form gap {:.2e}, affine residual {:.2e}",
        summary.min_eig_inverse, max_gap, residual
    );
    run.csv("stability_summary.csv", &[summary])?;
    run.finish()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CheckFailed(failures.join("; ")).into())
    }
}

pub fn report(out: &Path) -> Result<()> {
    let mut manifests: Vec<PathBuf> = fs::read_dir(out)
        .with_context(|| format!("cannot read {}", out.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("manifest-") && n.ends_with(".json"))
        })
        .collect();
    manifests.sort();
    if manifests.is_empty() {
        return Err(anyhow!("no run manifests in {}", out.display()));
    }
    let mut bad = Vec::new();
    for path in &manifests {
        let m: RunManifest = serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("malformed {}", path.display()))?;
        println!("{} (config {}, seed {}, finished {})", m.subcommand, m.config, m.seed, m.finished_at);
        for a in &m.artifacts {
            let ok = artifact(out, &out.join(&a.path)).map(|now| now == *a).unwrap_or(false);
            println!("  {} {}", if ok { "ok     " } else { "CHANGED" }, a.path);
            if !ok {
                bad.push(a.path.clone());
            }
        }
    }
    if let Ok(text) = fs::read_to_string(out.join("history.csv")) {
        let rows = text.lines().count().saturating_sub(1);
        println!("history: {rows} iterations");
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CheckFailed(format!("{} artifact(s) changed: {}", bad.len(), bad.join(", "))).into())
    }
}
