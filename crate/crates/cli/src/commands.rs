//! Batch subcommands. Each returns the process exit code: 0 on success, 1
//! when the input has diagnostics, 2 on a runtime error.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use tom_core::appraisal::AppraisalTheory;
use tom_core::engine::{run_script, Engine, EngineOptions};
use tom_core::exec::Exec;
use tom_core::oracle::{cross_check, soundness_sweep, ModelSpace};
use tom_core::scenario::{ProfileId, ScenarioDoc};
use tom_core::session::{parse_affect_script, run_interview, Session};
use tom_core::syntax::{parse_scenario, parse_script, parse_theory, Diagnostic};

pub const OK: i32 = 0;
pub const DIAGNOSTICS: i32 = 1;
pub const RUNTIME: i32 = 2;

/// Outcome of loading an input: either the value or an exit code after the
/// problem has been reported.
pub type Loaded<T> = std::result::Result<T, i32>;

fn read(path: &Path, err: &mut dyn Write) -> Loaded<String> {
    fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
        RUNTIME
    })
}

fn report(path: &Path, diags: &[Diagnostic], err: &mut dyn Write) -> i32 {
    for d in diags {
        let _ = writeln!(err, "{}", d.render(&path.display().to_string()));
    }
    let _ = writeln!(err, "{} diagnostic(s)", diags.len());
    DIAGNOSTICS
}

pub fn load_scenario(path: &Path, err: &mut dyn Write) -> Loaded<ScenarioDoc> {
    let text = read(path, err)?;
    parse_scenario(&text).map_err(|d| report(path, &d, err))
}

pub fn load_theory(path: Option<&Path>, err: &mut dyn Write) -> Loaded<AppraisalTheory> {
    match path {
        None => Ok(AppraisalTheory::default()),
        Some(p) => {
            let text = read(p, err)?;
            parse_theory(&text).map_err(|d| report(p, &d, err))
        }
    }
}

fn write_out(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => out.write_all(text.as_bytes()).context("cannot write to standard output"),
    }
}

pub struct RunArgs<'a> {
    pub scenario: &'a Path,
    pub script: Option<&'a Path>,
    pub trace: Option<&'a Path>,
    pub theory: Option<&'a Path>,
    pub opts: EngineOptions,
}

pub fn run(a: &RunArgs<'_>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = (|| {
        let doc = load_scenario(a.scenario, err)?;
        let script = match a.script {
            None => Default::default(),
            Some(p) => {
                let text = read(p, err)?;
                parse_script(&text).map_err(|d| report(p, &d, err))?
            }
        };
        let theory = load_theory(a.theory, err)?;
        Ok((doc, script, theory))
    })();
    let (doc, script, theory) = match loaded {
        Ok(x) => x,
        Err(code) => return code,
    };
    let (trace, _) = match run_script(&doc, &script, theory, a.opts) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return RUNTIME;
        }
    };
    match write_out(a.trace, &trace.render(), out) {
        Ok(()) => OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            RUNTIME
        }
    }
}

/// Parses and validates a scenario without running it.
pub fn check(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let doc = match load_scenario(path, err) {
        Ok(d) => d,
        Err(code) => return code,
    };
    if let Err(e) = Engine::from_scenario(&doc, AppraisalTheory::default(), EngineOptions::default()) {
        let _ = writeln!(err, "{}: {e}", path.display());
        return DIAGNOSTICS;
    }
    if doc.roles.is_some() {
        // selecting a first question exercises every question of the opening topics
        for p in [ProfileId::A, ProfileId::B, ProfileId::C] {
            if let Err(e) = Session::new(&doc, p, AppraisalTheory::default(), EngineOptions::default(), Exec::Sequential) {
                let _ = writeln!(err, "{}: profile {}: {e}", path.display(), p.name());
                return DIAGNOSTICS;
            }
        }
    }
    let _ = writeln!(
        out,
        "{}: ok ({} agents, {} facts, {} rules, {} topics)",
        path.display(),
        doc.agents.len(),
        doc.initial_facts.len(),
        doc.rules.len(),
        doc.topics.len()
    );
    OK
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub worlds: usize,
    pub atoms: usize,
    pub agents: usize,
    pub models: u64,
    pub law_instances: u64,
    pub skipped_empty_belief: u64,
    pub counterexamples: Vec<String>,
    pub recount_models: usize,
    pub recount_mismatches: Vec<String>,
    pub seconds: f64,
}

pub struct OracleArgs {
    pub worlds: usize,
    pub atoms: usize,
    pub agents: usize,
    pub recount: usize,
    pub seed: u64,
    pub exec: Exec,
}

/// Sweeps every admissible model up to the given size, then cross-checks the
/// two evaluators on random models. Prints a JSON report.
pub fn oracle(a: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let start = Instant::now();
    let mut rep = OracleReport {
        worlds: a.worlds,
        atoms: a.atoms,
        agents: a.agents,
        models: 0,
        law_instances: 0,
        skipped_empty_belief: 0,
        counterexamples: Vec::new(),
        recount_models: 0,
        recount_mismatches: Vec::new(),
        seconds: 0.0,
    };
    // reject the largest size before sweeping the smaller ones
    if let Err(e) = ModelSpace::new(a.atoms, a.worlds, a.agents) {
        let _ = writeln!(err, "error: {e}");
        return RUNTIME;
    }
    for w in 1..=a.worlds {
        let space = match ModelSpace::new(a.atoms, w, a.agents) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return RUNTIME;
            }
        };
        let s = soundness_sweep(&space, a.exec);
        rep.models += s.models;
        rep.law_instances += s.checks;
        rep.skipped_empty_belief += s.skipped_empty;
        rep.counterexamples.extend(
            s.counterexamples
                .iter()
                .map(|c| format!("{} at w{} for {} in {}", c.law, c.world, c.formula, c.model)),
        );
    }
    if a.recount > 0 {
        let cc = cross_check(a.seed, a.recount, 20, a.exec);
        rep.recount_models = cc.models;
        rep.recount_mismatches = cc.mismatches;
    }
    rep.seconds = start.elapsed().as_secs_f64();
    let clean = rep.counterexamples.is_empty() && rep.recount_mismatches.is_empty();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    if clean {
        OK
    } else {
        DIAGNOSTICS
    }
}

pub struct InterviewArgs<'a> {
    pub scenario: Option<&'a Path>,
    pub profile: ProfileId,
    pub affects: Option<&'a Path>,
    pub trace: Option<&'a Path>,
    pub opts: EngineOptions,
    pub exec: Exec,
}

#[derive(Serialize)]
struct InterviewReport<'a> {
    profile_id: &'static str,
    final_state: tom_core::session::TurnResponse,
    transcript: &'a [tom_core::session::TranscriptEntry],
}

/// Runs a whole interview from an affect stream; prints the transcript and
/// final payload as JSON.
pub fn interview(a: &InterviewArgs<'_>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = (|| {
        let doc = match a.scenario {
            Some(p) => load_scenario(p, err)?,
            None => parse_scenario(tom_core::session::INTERVIEW_SCENARIO).expect("shipped scenario parses"),
        };
        let answers = match a.affects {
            None => Vec::new(),
            Some(p) => {
                let text = read(p, err)?;
                parse_affect_script(&text).map_err(|errs| {
                    for e in &errs {
                        let _ = writeln!(err, "{}: {e}", p.display());
                    }
                    DIAGNOSTICS
                })?
            }
        };
        Ok((doc, answers))
    })();
    let (doc, answers) = match loaded {
        Ok(x) => x,
        Err(code) => return code,
    };
    let s = match run_interview(&doc, a.profile, &answers, AppraisalTheory::default(), a.opts, a.exec) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return RUNTIME;
        }
    };
    if let Some(p) = a.trace {
        if let Err(e) = fs::write(p, s.trace().render()) {
            let _ = writeln!(err, "error: cannot write {}: {e}", p.display());
            return RUNTIME;
        }
    }
    let rep = InterviewReport {
        profile_id: a.profile.name(),
        final_state: s.snapshot(),
        transcript: s.transcript(),
    };
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    OK
}
