//! One PASS/FAIL line per primary acceptance criterion.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use tom_core::appraisal::{intensity, AppraisalTheory, IntensityMode};
use tom_core::combine::{avg, Combinator};
use tom_core::engine::{run_script, Engine, EngineOptions};
use tom_core::exec::Exec;
use tom_core::folk::DEFAULT_CAP;
use tom_core::oracle::{cross_check, soundness_sweep, ModelSpace};
use tom_core::scenario::ProfileId;
use tom_core::session::{parse_affect_script, run_interview, Speaker};
use tom_core::syntax::{parse_scenario, parse_script};
use tom_core::synth;

type Outcome = Result<String, String>;

fn ensure(ok: bool, why: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why.into())
    }
}

fn maryjohn() -> Outcome {
    let start = Instant::now();
    let doc = parse_scenario(include_str!("../fixtures/maryjohn.tom")).map_err(|e| format!("{e:?}"))?;
    let script = parse_script(include_str!("../fixtures/empty.evt")).map_err(|e| format!("{e:?}"))?;
    let (trace, _) = run_script(&doc, &script, AppraisalTheory::default(), EngineOptions::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let pos = |rule: &str| trace.records.iter().position(|r| r.rule == rule);
    let chain: Vec<Option<usize>> = ["belief_from_implication", "adopt_desire", "weak_inconsistency", "goal"]
        .iter()
        .map(|r| pos(r))
        .collect();
    ensure(chain.iter().all(Option::is_some), format!("missing chain step: {chain:?}"))?;
    ensure(chain.windows(2).all(|w| w[0] < w[1]), format!("chain out of order: {chain:?}"))?;
    let goal = trace
        .records
        .iter()
        .find(|r| r.rule == "goal" && r.effect == "Goal(M,<M,J,visiting_ht>)")
        .ok_or("no goal for <M,J,visiting_ht>")?;
    let k = goal.degree.unwrap_or(f64::NAN);
    ensure((k - 0.77).abs() <= 1e-9, format!("goal degree {k}"))?;
    ensure(
        !trace
            .records
            .iter()
            .any(|r| r.rule == "goal" && r.effect.contains("visiting_ht_and_dad")),
        "goal adopted for <M,J,visiting_ht_and_dad>",
    )?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("Goal(M,<M,J,visiting_ht>)={k}, no goal for the _and_dad variant, {elapsed:?}"))
}

/// Rules fired over `ticks` ticks of a one-agent scenario.
fn fired(text: &str, ticks: usize) -> Result<Vec<String>, String> {
    let doc = parse_scenario(text).map_err(|e| format!("{e:?}"))?;
    let mut e = Engine::from_scenario(&doc, AppraisalTheory::default(), EngineOptions::default())
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for _ in 0..ticks {
        let r = e.tick(&[]).map_err(|e| e.to_string())?;
        out.extend(r.records.into_iter().map(|r| r.rule));
    }
    Ok(out)
}

fn thresholds() -> Outcome {
    let cases = [
        (
            "adopt_desire",
            "agent M J\nfact M : Des(M,0.8,g)\nfact M : Bel(M,LINK,<M,J,act> -> F(g))\n",
        ),
        (
            "intention_from_means",
            "agent M J\nfact M : Des(M,0.8,g)\nfact M : Bel(M,0.9,F(g))\nfact M : Bel(M,LINK,q -> F(g))\nfact M : Bel(M,0.9,F(q))\n",
        ),
        (
            "intention_from_intention",
            "agent M J\nfact M : Int(M,g)\nfact M : Bel(M,LINK,<M,J,act> -> F(g))\n",
        ),
    ];
    let mut notes = Vec::new();
    for (rule, text) in cases {
        let at = fired(&text.replace("LINK", "0.75"), 3)?;
        let above = fired(&text.replace("LINK", "0.76"), 3)?;
        ensure(!at.iter().any(|r| r == rule), format!("{rule} fired with a link at exactly 0.75"))?;
        ensure(above.iter().any(|r| r == rule), format!("{rule} did not fire with a link at 0.76"))?;
        notes.push(rule);
    }
    let th = parse_scenario("agent M\n").map_err(|e| format!("{e:?}"))?.thresholds();
    ensure(
        (th.mod_th, th.str_th, th.des_th) == (0.5, 0.75, 0.7),
        format!("defaults {} {} {}", th.mod_th, th.str_th, th.des_th),
    )?;
    Ok(format!("defaults 0.5/0.75/0.7; 0.75 blocks and 0.76 fires {}", notes.join(", ")))
}

fn combinator() -> Outcome {
    let f = |a: f64, b: f64| avg(&[a, b]);
    let via_name = Combinator::from_name("avg")
        .ok_or("avg not registered")?
        .apply(&[1.0, 1.0], IntensityMode::default())
        .map_err(|e| e.to_string())?;
    for (a, b, want) in [(1.0, 1.0, 1.0), (0.0, 0.0, 0.5), (-1.0, -1.0, 0.0)] {
        ensure((f(a, b) - want).abs() <= 1e-9, format!("f({a},{b})={}", f(a, b)))?;
    }
    ensure((via_name - 1.0).abs() <= 1e-9, "rule-level avg differs")?;
    Ok("f(1,1)=1 f(0,0)=0.5 f(-1,-1)=0".into())
}

fn intensity_contract() -> Outcome {
    let mode = IntensityMode::Normalized;
    let n = 100;
    let ls: Vec<f64> = (1..=n).map(|i| 0.5 + 0.5 * i as f64 / n as f64).collect();
    let ks: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
    let mut grid = vec![vec![0.0; n]; n];
    for (i, &l) in ls.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let v = intensity(l, sign * k, &[], mode).map_err(|e| e.to_string())?;
                ensure((0.5..=1.0).contains(&v), format!("I({l},{}) = {v} outside [0.5,1]", sign * k))?;
                grid[i][j] = v;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                ensure(grid[i + 1][j] >= grid[i][j], format!("not monotone in l at ({i},{j})"))?;
            }
            if j + 1 < n {
                ensure(grid[i][j + 1] >= grid[i][j], format!("not monotone in |k| at ({i},{j})"))?;
            }
        }
    }
    let top = intensity(1.0, 1.0, &[], mode).map_err(|e| e.to_string())?;
    ensure((top - 1.0).abs() <= 1e-9, format!("I(1,1)={top}"))?;
    for l in [0.5, 0.3, 0.0] {
        ensure(intensity(l, 0.5, &[], mode).is_err(), format!("no error at l={l}"))?;
    }
    Ok("monotone on a 100x100 grid, range [0.5,1], I(1,1)=1, error for l<=0.5".into())
}

fn kripke() -> Outcome {
    let start = Instant::now();
    let mut models = 0;
    let mut checks = 0;
    for worlds in 1..=3 {
        for atoms in 1..=2 {
            let space = ModelSpace::new(atoms, worlds, 1).map_err(|e| e.to_string())?;
            let rep = soundness_sweep(&space, Exec::default());
            ensure(rep.frame_violations == 0, format!("{} inadmissible frames", rep.frame_violations))?;
            if let Some(c) = rep.counterexamples.first() {
                return Err(format!("{} counterexample(s), first: {} at w{} for {}", rep.counterexamples.len(), c.law, c.world, c.formula));
            }
            models += rep.models;
            checks += rep.checks;
        }
    }
    let cc = cross_check(2024, 1000, 20, Exec::default());
    if let Some(m) = cc.mismatches.first() {
        return Err(format!("{} recount mismatches, first: {m}", cc.mismatches.len()));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{models} models, {checks} law instances, 0 counterexamples; recount agrees on {} models; {elapsed:.1?}",
        cc.models
    ))
}

fn determinism() -> Outcome {
    let mut max_firings = 0;
    for seed in 0..50 {
        let g = synth::generate(seed);
        let doc = parse_scenario(&g.scenario).map_err(|e| format!("seed {seed}: {e:?}"))?;
        let script = parse_script(&g.script).map_err(|e| format!("seed {seed}: {e:?}"))?;
        let run = || run_script(&doc, &script, AppraisalTheory::default(), EngineOptions::default());
        let (a, reports) = run().map_err(|e| format!("seed {seed}: {e}"))?;
        let (b, _) = run().map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(a.render() == b.render(), format!("seed {seed}: traces differ"))?;
        for r in &reports {
            max_firings = max_firings.max(r.records.len());
        }
    }
    ensure(max_firings <= DEFAULT_CAP, format!("{max_firings} firings in one tick"))?;
    Ok(format!("50 seeds replayed byte-identically; busiest tick {max_firings} records (cap {DEFAULT_CAP})"))
}

fn divergence() -> Outcome {
    let doc = parse_scenario(include_str!("../fixtures/divergence.tom")).map_err(|e| format!("{e:?}"))?;
    let stream = parse_affect_script(include_str!("../fixtures/divergence.affects")).map_err(|e| e.join("; "))?;
    let picks = |p: ProfileId| -> Result<Vec<String>, String> {
        let s = run_interview(&doc, p, &stream, AppraisalTheory::default(), EngineOptions::default(), Exec::default())
            .map_err(|e| e.to_string())?;
        Ok(s.transcript()
            .iter()
            .filter(|e| e.speaker == Speaker::Recruiter)
            .map(|e| format!("{}/{}", e.topic, e.variant.as_deref().unwrap_or("?")))
            .collect())
    };
    let (a, b, c) = (picks(ProfileId::A)?, picks(ProfileId::B)?, picks(ProfileId::C)?);
    let differs = |x: &[String], y: &[String]| x.iter().zip(y).any(|(p, q)| p != q);
    ensure(differs(&a, &b), format!("A equals B: {a:?}"))?;
    ensure(differs(&c, &b), format!("C equals B: {c:?}"))?;
    ensure(differs(&a, &c), format!("A equals C: {a:?}"))?;
    Ok(format!("A {a:?} | B {b:?} | C {c:?}"))
}

fn parser() -> Outcome {
    common::run(1000, common::formula(), |f| common::round_trip(&f))?;
    common::run(10_000, common::fuzz_input(), |t| {
        common::parse_everything(&t);
        Ok(())
    })?;
    Ok("1000 generated ASTs round-trip; 10000 fuzz inputs parsed without a crash".into())
}

fn store() -> Outcome {
    common::run(10_000, common::store_ops(), |ops| common::store_invariants(&ops))?;
    Ok("10000 random assert sequences, 0 violations".into())
}

#[test]
fn primary_acceptance() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("Mary/John regression", maryjohn),
        ("Threshold defaults", thresholds),
        ("Combinator f(k,k')", combinator),
        ("Intensity function properties", intensity_contract),
        ("Kripke oracle", kripke),
        ("Loop determinism and termination", determinism),
        ("Profile divergence", divergence),
        ("Parser", parser),
        ("Store invariants", store),
    ];
    let mut failed = Vec::new();
    // written to the raw handle so the lines show without --nocapture
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out);
    for (name, check) in criteria {
        let line = match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => format!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed.push(name);
                format!("FAIL  {name}: {why}")
            }
            Err(_) => {
                failed.push(name);
                format!("FAIL  {name}: panicked")
            }
        };
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
    }
    drop(out);
    assert!(failed.is_empty(), "failed: {failed:?}");
}
