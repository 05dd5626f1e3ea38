//! Command-line front end: scenario loading, command dispatch and output
//! files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::json;

use crate::bifurcation::{
    assemble_g, branch_existence_diagnostic, check_transversality, classify_linearization, codim_criterion,
    continue_branch, isotropy_types, lift_branch, presweep_seeds, BranchRecord, CodimReport, CodimSettings,
    ContinuationResult, ContinuationSettings, NondegeneracyReport, Seed,
};
use crate::groups::DEFAULT_TOL;
use crate::poly::CompiledPoly;
use crate::reduction::{check_tangency, FieldFamily, ReducedSystem};
use crate::scenario::{load_scenario, BuildOptions, Model, ReducedJson, ScenarioError};
use crate::simulate::{commutation_error, conservation_drift, integrate_poly, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Reduce,
    Equilibria,
    Continue,
    Classify,
    Transversality,
    Codim,
    Simulate,
    Check,
}

#[derive(Debug, Parser)]
#[command(name = "symbreak", version, about = "Orbit-space reduction and symmetry-breaking branches")]
pub struct Cli {
    pub command: Command,
    /// Catalog name or path to a scenario JSON file.
    #[arg(value_name = "SCENARIO")]
    pub scenario_arg: Option<String>,
    #[arg(long, value_name = "PATH|NAME")]
    pub scenario: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Solver tolerance (stacked residual norm).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_degree: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError {
        code: 1,
        message: e.to_string(),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let name = cli.scenario.as_ref().or(cli.scenario_arg.as_ref()).ok_or_else(|| CliError {
        code: 2,
        message: "no scenario given (positional or --scenario)".into(),
    })?;
    let scenario = load_scenario(name)?;
    let model = Model::build(
        &scenario,
        &BuildOptions {
            max_degree: cli.max_degree,
        },
    )?;
    fs::create_dir_all(&cli.out).map_err(fail)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match cli.command {
        Command::Reduce => reduce_cmd(&model, &cli.out),
        Command::Equilibria => equilibria_cmd(&model, cli, &mut rng),
        Command::Continue => continue_cmd(&model, cli, &mut rng),
        Command::Classify => classify_cmd(&model, &cli.out),
        Command::Transversality => transversality_cmd(&model, &cli.out),
        Command::Codim => codim_cmd(&model, &cli.out, &mut rng),
        Command::Simulate => simulate_cmd(&model, &cli.out, &mut rng),
        Command::Check => check_cmd(&model, &cli.out, &mut rng),
    }
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(fail)?;
    s.push('\n');
    fs::write(dir.join(file), s).map_err(fail)
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn reduce_cmd(model: &Model, out: &Path) -> Result<String, CliError> {
    let r = ReducedJson::from_model(model);
    write_json(out, "reduced.json", &r)?;
    Ok(format!("reduced {}: {} invariants, {} relations", r.scenario, r.invariants.len(), r.relations.len()))
}

fn seed_lambda(model: &Model, cli: &Cli) -> f64 {
    cli.from.unwrap_or(model.scenario.lambda.seed)
}

fn cont_settings(model: &Model, cli: &Cli) -> ContinuationSettings {
    let c = &model.scenario.continuation;
    ContinuationSettings {
        step: cli.step.unwrap_or(c.step),
        min_step: c.min_step,
        tol: cli.tol.unwrap_or(c.tol),
        max_iter: c.max_iter,
        ..ContinuationSettings::default()
    }
}

fn find_seeds(model: &Model, lambda: f64, rng: &mut ChaCha8Rng) -> Vec<Seed> {
    presweep_seeds(&model.g, &model.basis, lambda, model.scenario.continuation.presweep, rng)
}

fn equilibria_cmd(model: &Model, cli: &Cli, rng: &mut ChaCha8Rng) -> Result<String, CliError> {
    let lambda = seed_lambda(model, cli);
    let seeds = find_seeds(model, lambda, rng);
    let points: Vec<_> = seeds
        .iter()
        .map(|s| crate::bifurcation::ContinuationPoint {
            theta: s.theta.clone(),
            lambda: s.lambda,
            residual: crate::linalg::norm(&model.g.stacked(&s.theta, s.lambda, s.levels.as_deref())),
            condition_number: s.condition_number,
        })
        .collect();
    let lifts = lift_branch(&points, &model.basis, &model.full_field, &model.group, rng);
    let records: Vec<_> = seeds
        .iter()
        .zip(&lifts)
        .map(|(s, r)| {
            json!({
                "theta": s.theta,
                "levels": s.levels,
                "condition_number": s.condition_number,
                "v": r.v,
                "isotropy": r.isotropy,
                "velocity": r.velocity,
                "n_H": r.n_h,
            })
        })
        .collect();
    write_json(
        &cli.out,
        "equilibria.json",
        &json!({ "scenario": model.scenario.name, "lambda": lambda, "equilibria": records }),
    )?;
    if seeds.is_empty() {
        return Err(fail(format!("no nondegenerate equilibrium found at lambda = {lambda}")));
    }
    Ok(format!("{} equilibria at lambda = {lambda}", seeds.len()))
}

pub struct BranchRun {
    pub seed: Seed,
    pub result: ContinuationResult,
    pub records: Vec<BranchRecord>,
    pub settings: ContinuationSettings,
    pub range: (f64, f64),
}

/// Pre-sweep seed, continuation and lift, as run by the `continue` command.
pub fn run_branch(
    model: &Model,
    from: Option<f64>,
    to: Option<f64>,
    settings: ContinuationSettings,
    rng: &mut ChaCha8Rng,
) -> Result<BranchRun, CliError> {
    let lambda0 = from.unwrap_or(model.scenario.lambda.seed);
    let [lo, hi] = model.scenario.lambda.range;
    let range = match (from, to) {
        (Some(a), Some(b)) => (a, b),
        (None, Some(b)) => (lambda0, b),
        _ => (lo, hi),
    };
    let seeds = presweep_seeds(&model.g, &model.basis, lambda0, model.scenario.continuation.presweep, rng);
    let seed = seeds
        .into_iter()
        .next()
        .ok_or_else(|| fail(format!("no nondegenerate seed found at lambda = {lambda0}")))?;
    let result = continue_branch(&model.g, &seed, range.0, range.1, &settings).map_err(fail)?;
    let records = lift_branch(&result.points, &model.basis, &model.full_field, &model.group, rng);
    Ok(BranchRun {
        seed,
        result,
        records,
        settings,
        range,
    })
}

pub fn branch_csv(model: &Model, records: &[BranchRecord]) -> String {
    let l = model.basis.len();
    let n = model.basis.nvars();
    let m = model.group.torus_rank();
    let mut cols = vec!["λ".to_string()];
    cols.extend((1..=l).map(|i| format!("θ_{i}")));
    cols.extend((1..=n).map(|i| format!("v_{i}")));
    cols.push("isotropy".into());
    cols.extend((1..=m).map(|i| format!("velocity_{i}")));
    cols.extend(["residual_reduced".into(), "residual_lift".into(), "n_H".into()]);
    let mut s = cols.join(",");
    s.push('\n');
    for r in records {
        let mut row = vec![f(r.lambda)];
        row.extend(r.theta.iter().map(|&x| f(x)));
        match &r.v {
            Some(v) => row.extend(v.iter().map(|&x| f(x))),
            None => row.extend((0..n).map(|_| "nan".to_string())),
        }
        row.push(r.isotropy.as_ref().map(|i| i.key.clone()).unwrap_or_else(|| "lift failed".into()));
        row.extend(r.velocity.iter().map(|&x| f(x)));
        row.push(f(r.residual_reduced));
        row.push(f(r.residual_lift));
        row.push(r.n_h.to_string());
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

fn continue_cmd(model: &Model, cli: &Cli, rng: &mut ChaCha8Rng) -> Result<String, CliError> {
    let run = run_branch(model, cli.from, cli.to, cont_settings(model, cli), rng)?;
    fs::write(cli.out.join("branch.csv"), branch_csv(model, &run.records)).map_err(fail)?;
    write_json(
        &cli.out,
        "branch.json",
        &json!({
            "scenario": model.scenario.name,
            "seed": run.seed,
            "range": [run.range.0, run.range.1],
            "settings": run.settings,
            "termination": run.result.termination,
            "singular_lambda": run.result.singular_lambda,
            "points": run.records,
        }),
    )?;
    Ok(format!(
        "{} points, termination: {}",
        run.records.len(),
        run.result.termination
    ))
}

pub fn classification(model: &Model) -> Result<NondegeneracyReport, CliError> {
    classify_linearization(&model.full_field, &model.spans).map_err(fail)
}

fn classify_cmd(model: &Model, out: &Path) -> Result<String, CliError> {
    let r = classification(model)?;
    write_json(out, "classify.json", &json!({ "scenario": model.scenario.name, "report": r }))?;
    Ok(format!("class: {:?}, transversal: {}", r.class, r.transversal))
}

fn transversality_cmd(model: &Model, out: &Path) -> Result<String, CliError> {
    let r = classification(model)?;
    let t = check_transversality(&model.family, &r).map_err(fail)?;
    write_json(
        out,
        "transversality.json",
        &json!({ "scenario": model.scenario.name, "classification": r, "transversality": t }),
    )?;
    Ok(format!("transversal: {}", t.transversal))
}

pub fn codim_report(model: &Model, rng: &mut ChaCha8Rng) -> Result<CodimReport, CliError> {
    match &model.poisson {
        Some(p) => codim_criterion(&model.basis, p, &CodimSettings::default(), rng).map_err(fail),
        None => Ok(CodimReport {
            found: false,
            i0: None,
            i1: None,
            x0: None,
            max_residual: None,
            conclusion: "no Poisson structure on the orbit space; inconclusive".into(),
            witnesses: Vec::new(),
        }),
    }
}

fn codim_cmd(model: &Model, out: &Path, rng: &mut ChaCha8Rng) -> Result<String, CliError> {
    let r = codim_report(model, rng)?;
    write_json(out, "codim.json", &json!({ "scenario": model.scenario.name, "report": r }))?;
    Ok(r.conclusion)
}

#[derive(Serialize)]
pub struct SimulationSummary {
    pub lambda: f64,
    pub horizon: f64,
    pub dt: f64,
    pub starts: usize,
    pub commutation_errors: Vec<f64>,
    pub max_commutation_error: f64,
    pub relation_drift: f64,
    pub energy_drift: Option<f64>,
}

/// Random starts integrated upstairs and downstairs; returns the summary
/// and the first pair of trajectories.
pub fn simulate_model(
    model: &Model,
    rng: &mut ChaCha8Rng,
) -> Result<(SimulationSummary, Trajectory, Trajectory), CliError> {
    let sim = &model.scenario.simulation;
    let lambda = sim.lambda.unwrap_or(model.scenario.lambda.seed);
    let n = model.basis.nvars();
    let normal = Normal::new(0.0, sim.scale).map_err(fail)?;
    let energy = model
        .family
        .full_hamiltonian(&model.basis)
        .map_err(fail)?
        .map(|h| CompiledPoly::new(&h));
    let mut errors = Vec::with_capacity(sim.starts);
    let mut rel_drift = 0.0f64;
    let mut energy_drift: Option<f64> = energy.as_ref().map(|_| 0.0);
    let mut first = None;
    let rels: Vec<_> = model.basis.relations().to_vec();
    for _ in 0..sim.starts.max(1) {
        let v0: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
        let full = integrate_poly(&model.full_field, &[lambda], &v0, sim.horizon, sim.dt, sim.stride).map_err(fail)?;
        let th0 = model.basis.hilbert_map(&v0);
        let red = integrate_poly(model.reduced.field(), &[lambda], &th0, sim.horizon, sim.dt, sim.stride).map_err(fail)?;
        errors.push(commutation_error(&full, &red, &model.basis).map_err(fail)?);
        for r in &rels {
            rel_drift = rel_drift.max(conservation_drift(&red, r).map_err(fail)?);
        }
        if let (Some(e), Some(d)) = (&energy, energy_drift.as_mut()) {
            *d = d.max(energy_excursion(&full, e, lambda));
        }
        if first.is_none() {
            first = Some((full, red));
        }
    }
    let (full, red) = first.expect("at least one start");
    let max = errors.iter().copied().fold(0.0, f64::max);
    Ok((
        SimulationSummary {
            lambda,
            horizon: sim.horizon,
            dt: sim.dt,
            starts: errors.len(),
            commutation_errors: errors,
            max_commutation_error: max,
            relation_drift: rel_drift,
            energy_drift,
        },
        full,
        red,
    ))
}

fn energy_excursion(traj: &Trajectory, h: &CompiledPoly, lambda: f64) -> f64 {
    let at = |v: &[f64]| {
        let mut x = v.to_vec();
        x.push(lambda);
        h.eval(&x)
    };
    let h0 = at(&traj.states[0]);
    traj.states.iter().map(|v| (at(v) - h0).abs()).fold(0.0, f64::max)
}

fn trajectory_csv(t: &Trajectory, names: &[String]) -> String {
    let mut s = String::from("t");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (time, x) in t.times.iter().zip(&t.states) {
        s.push_str(&f(*time));
        for v in x {
            s.push(',');
            s.push_str(&f(*v));
        }
        s.push('\n');
    }
    s
}

fn simulate_cmd(model: &Model, out: &Path, rng: &mut ChaCha8Rng) -> Result<String, CliError> {
    let (summary, full, red) = simulate_model(model, rng)?;
    fs::write(out.join("trajectory_full.csv"), trajectory_csv(&full, &model.scenario.coordinates)).map_err(fail)?;
    let names = model.names();
    fs::write(out.join("trajectory_reduced.csv"), trajectory_csv(&red, &names[..names.len() - 1])).map_err(fail)?;
    write_json(out, "simulate.json", &json!({ "scenario": model.scenario.name, "method": full.method, "summary": summary }))?;
    Ok(format!("max commutation error {:.3e}", summary.max_commutation_error))
}

fn check_cmd(model: &Model, out: &Path, rng: &mut ChaCha8Rng) -> Result<String, CliError> {
    let tangency = check_tangency(model.reduced.field(), &model.basis, 200, 1e-10, rng).map_err(fail)?;
    let consistency = match (&model.family, &model.reduced) {
        (FieldFamily::Hamiltonian { hamiltonian, .. }, ReducedSystem::Hamiltonian(h)) => {
            Some(&assemble_g(hamiltonian, &h.poisson).map_err(fail)? == model.reduced.field())
        }
        _ => None,
    };
    let class = classification(model)?;
    let trans = check_transversality(&model.family, &class).ok();
    let codim = codim_report(model, rng)?;
    let mut diagnostics = Vec::new();
    for t in isotropy_types(&model.group, rng) {
        if t.label.key == "G" {
            continue;
        }
        diagnostics.push(branch_existence_diagnostic(
            &model.family,
            &model.basis,
            &model.group,
            &class,
            trans.as_ref(),
            Some(&codim),
            &t,
            10_000,
            rng,
        ));
    }
    let passed = tangency.passed && consistency.unwrap_or(true);
    write_json(
        out,
        "check.json",
        &json!({
            "scenario": model.scenario.name,
            "tangency": tangency,
            "hamiltonian_consistency": consistency,
            "class": class.class,
            "transversal": trans.as_ref().map(|t| t.transversal),
            "codim": codim,
            "isotropy_tol": DEFAULT_TOL,
            "existence": diagnostics,
            "passed": passed,
        }),
    )?;
    if !passed {
        return Err(fail("consistency checks failed; see check.json"));
    }
    Ok(format!("checks passed, {} isotropy types examined", diagnostics.len()))
}
