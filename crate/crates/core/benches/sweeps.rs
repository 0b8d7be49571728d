//! Sequential against data-parallel execution for the three fan-out points:
//! the exhaustive model sweep, batches of independent runs, and scoring
//! every candidate question before the recruiter picks one.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tom_core::appraisal::AppraisalTheory;
use tom_core::engine::{run_script, Engine, EngineOptions};
use tom_core::exec::Exec;
use tom_core::interview::{profile_goal, select_question};
use tom_core::oracle::{soundness_sweep, ModelSpace};
use tom_core::scenario::{ProfileId, ScenarioDoc, Script};
use tom_core::session::INTERVIEW_SCENARIO;
use tom_core::synth::generate;
use tom_core::syntax::{parse_scenario, parse_script};

const MODES: [(&str, Exec); 2] = [("seq", Exec::Sequential), ("par", Exec::Parallel)];

fn oracle_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_sweep");
    g.sample_size(10).measurement_time(Duration::from_secs(8));
    let space = ModelSpace::new(1, 3, 1).expect("valid size");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "1 atom, 3 worlds"), |b| {
            b.iter(|| black_box(soundness_sweep(&space, exec).checks))
        });
    }
    g.finish();
}

fn batch_runs(c: &mut Criterion) {
    let cases: Vec<(ScenarioDoc, Script)> = (0..64)
        .map(|seed| {
            let gcase = generate(seed);
            (
                parse_scenario(&gcase.scenario).expect("generated scenario parses"),
                parse_script(&gcase.script).expect("generated script parses"),
            )
        })
        .collect();
    let mut g = c.benchmark_group("batch_runs");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "64 scenarios"), |b| {
            b.iter(|| {
                let out = exec.map(&cases, |(doc, script)| {
                    run_script(doc, script, AppraisalTheory::default(), EngineOptions::default())
                        .map(|(t, _)| t.records.len())
                        .unwrap_or(0)
                });
                black_box(out)
            })
        });
    }
    g.finish();
}

fn candidate_scoring(c: &mut Criterion) {
    let doc = parse_scenario(INTERVIEW_SCENARIO).expect("shipped scenario parses");
    let roles = doc.roles.clone().expect("interview roles");
    let engine = Engine::for_agent(&doc, &roles.interviewer, AppraisalTheory::default(), EngineOptions::default())
        .expect("engine builds");
    // everything but the greeting is open: the widest choice of the interview
    let asked: Vec<bool> = doc.topics.iter().map(|t| t.id == "greeting").collect();
    let goal = profile_goal(&doc, ProfileId::A);
    let mut g = c.benchmark_group("candidate_scoring");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "open topics"), |b| {
            b.iter(|| {
                let proj = engine.projector();
                let sel = select_question(&doc.topics, &asked, goal, exec, |q| {
                    proj.predict_impact(&engine.state, &roles.candidate, &q.event, &q.expect)
                        .map(|i| i.score)
                        .map_err(|e| e.to_string())
                })
                .expect("scoring succeeds");
                black_box(sel.topic)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, oracle_sweep, batch_runs, candidate_scoring);
criterion_main!(benches);
