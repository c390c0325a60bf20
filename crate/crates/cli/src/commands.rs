//! The three subcommands. Each returns a finished [`Report`]; configuration
//! problems become an error report rather than a panic.

use crate::config::{ConfigError, RunConfig};
use crate::report::{IdentitiesSection, Report, RunStatus};
use ifconv_core::classify::{full_verdict_with_reference, ConvergenceReport, Status};
use ifconv_core::coeffspec::{parse_expr, validate_problem, ValidatedProblem};
use ifconv_core::quad::Tolerances;
use ifconv_core::simkit::{
    agreement_path, cherny_dichotomy_check, fubini_mean_check, occupation_check, ray_knight_check,
    verdict_agreement, williams_check, TrendRule,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Verify,
    Identities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Verify => "verify",
            Command::Identities => "identities",
        }
    }
}

pub fn run(cmd: Command, config: RunConfig) -> Report {
    let start = Instant::now();
    let mut report = Report::new(cmd.name(), Some(config.clone()));
    let res = match cmd {
        Command::Classify => classify(&config, &mut report).map(|_| ()),
        Command::Verify => verify(&config, &mut report),
        Command::Identities => identities(&config, &mut report),
    };
    if let Err(e) = res {
        report = report.fail(&e);
    }
    report.timings.total_seconds = start.elapsed().as_secs_f64();
    report
}

struct Classified {
    vp: ValidatedProblem,
    tol: Tolerances,
    verdict: ConvergenceReport,
}

fn classify(config: &RunConfig, report: &mut Report) -> Result<Classified, ConfigError> {
    let pc = config.problem.as_ref().ok_or(ConfigError::Invalid {
        field: "problem",
        message: "a problem block is required by classify and verify".into(),
    })?;
    let p = pc.to_problem()?;
    let tol = config.tolerances.to_tolerances().map_err(ConfigError::Tolerances)?;
    let start = Instant::now();
    let vp = validate_problem(p, pc.probes).map_err(ConfigError::Violations)?;
    let verdict = full_verdict_with_reference(&vp, pc.reference_point, &tol).map_err(ConfigError::Reference)?;
    report.timings.classify_seconds = Some(start.elapsed().as_secs_f64());
    if let Status::Inconclusive { blocking } = &verdict.status {
        report.status = RunStatus::Inconclusive;
        report.flags.extend(blocking.iter().map(|b| format!("inconclusive:{b}")));
    }
    report.classifier = Some(verdict.clone());
    Ok(Classified { vp, tol, verdict })
}

fn verify(config: &RunConfig, report: &mut Report) -> Result<(), ConfigError> {
    let c = classify(config, report)?;
    if !c.verdict.is_conclusive() {
        report.flags.push("simulation_skipped".into());
        return Ok(());
    }
    let params = config.simulation.sim_params();
    let start = Instant::now();
    let summary = verdict_agreement(c.vp.problem(), &c.verdict, &params, &c.tol).map_err(ConfigError::Simulation)?;
    report.timings.simulate_seconds = Some(start.elapsed().as_secs_f64());
    report.flags.extend(summary.flags.iter().cloned());
    if !summary.passed {
        report.status = RunStatus::Inconclusive;
    }
    report.simulation = Some(summary);
    let out = &config.output;
    if out.dump_paths > 0 {
        let dir = out.dump_dir.clone().unwrap_or_else(|| PathBuf::from("ifconv-paths"));
        dump_paths(&c, &params, out.dump_paths.min(params.n_paths), &dir)?;
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError::Io { path: path.to_path_buf(), message: e.to_string() }
}

/// Writes `path_NNNNN.csv` with columns `t,y,partial_integral` for the
/// first `n` paths of the agreement run.
fn dump_paths(c: &Classified, params: &ifconv_core::simkit::SimParams, n: usize, dir: &Path) -> Result<(), ConfigError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    for i in 0..n {
        let (_, run) = agreement_path(c.vp.problem(), &c.verdict, params, &c.tol, i).map_err(ConfigError::Simulation)?;
        let Some((path, cum)) = run else { continue };
        let mut csv = String::from("t,y,partial_integral\n");
        for ((t, y), s) in path.times.iter().zip(&path.values).zip(&cum) {
            let _ = writeln!(csv, "{t},{y},{s}");
        }
        let file = dir.join(format!("path_{i:05}.csv"));
        std::fs::write(&file, csv).map_err(|e| io_error(&file, e))?;
    }
    Ok(())
}

fn identities(config: &RunConfig, report: &mut Report) -> Result<(), ConfigError> {
    let ic = config.identities.clone().resolved();
    let seed = config.simulation.master_seed;
    let bw = config.simulation.bandwidth;
    let sim = ConfigError::Simulation;
    let expr = |field: &'static str, text: &str| parse_expr(text).map_err(|error| ConfigError::Expr { field, error });
    let fubini_f = ic
        .fubini_f
        .iter()
        .map(|t| expr("identities.fubini_f", t))
        .collect::<Result<Vec<_>, _>>()?;
    let occ_f = expr("identities.occupation_f", &ic.occupation_f)?;

    let start = Instant::now();
    let ray_knight = ray_knight_check(ic.r, ic.x0, ic.u, ic.n_paths, ic.dt, bw, seed, ic.alpha).map_err(sim)?;
    let williams = williams_check(ic.r, ic.x0, ic.n_paths, ic.dt, seed, ic.alpha).map_err(sim)?;
    let rule = TrendRule { window: ic.cherny_window, ..config.simulation.trend_rule() };
    let cherny_n = ic.cherny_n_paths.unwrap_or(ic.n_paths);
    let cherny = ic
        .cherny_p
        .iter()
        .map(|&p| {
            cherny_dichotomy_check(p, ic.cherny_eps, cherny_n, ic.cherny_dt, ic.cherny_levels, &rule, seed, ic.cherny_threshold)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(sim)?;
    let fubini_n = ic.fubini_n_paths.unwrap_or(ic.n_paths);
    let fubini = fubini_f
        .iter()
        .map(|f| fubini_mean_check(f, ic.r, ic.x0, fubini_n, ic.fubini_dt, seed))
        .collect::<Result<Vec<_>, _>>()
        .map_err(sim)?;
    let occ_n = ic.occupation_n_paths.unwrap_or(ic.n_paths);
    let occupation =
        occupation_check(&occ_f, ic.r, ic.x0, ic.occupation_low, occ_n, ic.dt, bw, seed).map_err(sim)?;
    report.timings.simulate_seconds = Some(start.elapsed().as_secs_f64());

    let flags = &mut report.flags;
    let mut note = |ok: bool, what: &str, name: String| {
        if !ok {
            flags.push(format!("{what}:{name}"));
        }
    };
    note(ray_knight.passed, "failed", "ray_knight".into());
    note(!ray_knight.underpowered, "underpowered", "ray_knight".into());
    note(!ray_knight.bandwidth_sensitive, "bandwidth_sensitive", "ray_knight".into());
    note(williams.passed, "failed", "williams".into());
    note(!williams.underpowered, "underpowered", "williams".into());
    for c in &cherny {
        let name = format!("cherny:p={}", c.p);
        note(c.passed, "failed", name.clone());
        note(!c.underpowered, "underpowered", name.clone());
        note(!c.refinement_unstable, "refinement_unstable", name);
    }
    for c in &fubini {
        let name = format!("fubini:f={}", c.f);
        note(c.passed, "failed", name.clone());
        note(!c.underpowered, "underpowered", name);
    }
    note(occupation.passed, "failed", "occupation".into());
    note(!occupation.underpowered, "underpowered", "occupation".into());
    if !report.flags.is_empty() {
        report.status = RunStatus::Inconclusive;
    }
    report.identities = Some(IdentitiesSection { ray_knight, williams, cherny, fubini, occupation });
    Ok(())
}
