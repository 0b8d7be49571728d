//! Generators and checks shared by the property and acceptance targets.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use tom_core::degree::{Signed, Unit};
use tom_core::logic::{canonicalize, negate, Act, AgentId, EmotionKind, Event, Formula, Illocution, Slot};
use tom_core::state::MentalState;
use tom_core::syntax::{parse_formula, parse_rule_file, parse_scenario, parse_script, parse_theory};

const ATOMS: [&str; 5] = ["p", "q", "rain", "talk_about_holidays", "x1"];
const AGENTS: [&str; 3] = ["M", "J", "A0"];
const ACTS: [&str; 3] = ["visit", "call", "dad"];

fn agent() -> impl Strategy<Value = AgentId> {
    prop::sample::select(&AGENTS[..]).prop_map(|a| AgentId::new(a).unwrap())
}

fn unit() -> impl Strategy<Value = Unit> {
    (0u32..=1000).prop_map(|x| Unit::new(x as f64 / 1000.0).unwrap())
}

fn signed() -> impl Strategy<Value = Signed> {
    (-1000i32..=1000).prop_map(|x| Signed::new(x as f64 / 1000.0).unwrap())
}

fn atom() -> impl Strategy<Value = Formula> {
    prop::sample::select(&ATOMS[..]).prop_map(Formula::atom)
}

fn physical_event() -> impl Strategy<Value = Event> {
    (agent(), prop::option::of(agent()), prop::sample::select(&ACTS[..]))
        .prop_map(|(a, r, act)| Event::physical(&a, r.as_ref(), act))
}

/// Arbitrary formulas over a small vocabulary, nested up to depth 4.
pub fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        4 => atom(),
        1 => physical_event().prop_map(Formula::Event),
        1 => (agent(), agent(), signed()).prop_map(|(a, b, k)| Formula::Like(a, b, k)),
        1 => (agent(), agent(), signed()).prop_map(|(a, b, k)| Formula::Dom(a, b, k)),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        let ill = prop::sample::select(&Illocution::ALL[..]);
        let kind = prop::sample::select(&EmotionKind::BUILTIN[..]);
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (agent(), unit(), inner.clone()).prop_map(|(a, l, f)| Formula::bel(&a, l, f)),
            (agent(), signed(), inner.clone()).prop_map(|(a, k, f)| Formula::Att(a, k, Box::new(f))),
            (agent(), signed(), inner.clone())
                .prop_map(|(a, k, f)| Formula::Att(a, k, Box::new(Formula::future(f)))),
            (agent(), signed(), inner.clone())
                .prop_map(|(a, k, f)| Formula::Att(a, k, Box::new(Formula::globally(f)))),
            (agent(), inner.clone()).prop_map(|(a, f)| Formula::int(&a, f)),
            (agent(), inner.clone()).prop_map(|(a, f)| Formula::Resp(a, Box::new(f))),
            inner.clone().prop_map(|f| Formula::Next(Box::new(f))),
            inner.clone().prop_map(Formula::future),
            inner.clone().prop_map(Formula::globally),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Until(Box::new(a), Box::new(b))),
            (agent(), agent(), ill, inner.clone()).prop_map(|(a, r, i, f)| Formula::Event(Event {
                actor: Slot::Agent(a),
                recipient: Slot::Agent(r),
                act: Act::Speech(i, Box::new(f)),
            })),
            (kind, agent(), prop::option::of(agent()), unit(), inner).prop_map(|(kind, holder, target, i, f)| {
                Formula::Emo {
                    kind,
                    holder,
                    target,
                    intensity: i,
                    about: Box::new(f),
                }
            }),
        ]
    })
}

/// Printing then parsing gives back the canonical form.
pub fn round_trip(f: &Formula) -> Result<(), TestCaseError> {
    let want = canonicalize(f);
    for text in [f.to_string(), want.to_string()] {
        let got = parse_formula(&text).map_err(|d| TestCaseError::fail(format!("{text}: {}", d.message)))?;
        prop_assert_eq!(&got, &want, "text: {}", text);
    }
    Ok(())
}

/// Random bytes, and token soup that reaches deeper into the grammar.
pub fn fuzz_input() -> impl Strategy<Value = String> {
    let tokens = prop::sample::select(vec![
        "Bel", "Des", "Ideal", "Att", "Int", "Emo", "Resp", "F", "G", "N", "U", "(", ")", "<", ">", ",", "!", "&",
        "->", "=>", "?l", "?phi", "self", "_", "-", "M", "J", "p", "0.5", "1", "-0.3", "2", "rule", "fact", "agent",
        "topic", "{", "}", ";", ":", "stage", "tick", "question", "\"s\"", "\n", " ", "select", "max", "per", "avg",
        "Assert", "Request", "emotion", "valence", "+", "interpret", "HES", ">", "#",
    ]);
    prop_oneof![
        prop::collection::vec(any::<u8>(), 0..200).prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
        prop::collection::vec(tokens, 0..60).prop_map(|t| t.concat()),
    ]
}

/// Every entry point reports diagnostics instead of panicking.
pub fn parse_everything(text: &str) {
    let _ = parse_formula(text);
    let _ = parse_scenario(text);
    let _ = parse_script(text);
    let _ = parse_rule_file(text);
    let _ = parse_theory(text);
}

#[derive(Debug, Clone)]
pub enum StoreOp {
    Belief(Formula, Unit),
    Attitude(Formula, Signed),
    Intend(Formula),
    Drop(Formula),
}

fn small_formula() -> impl Strategy<Value = Formula> {
    let base = prop_oneof![atom(), physical_event().prop_map(Formula::Event)];
    base.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            inner.clone().prop_map(Formula::future),
            inner.prop_map(Formula::globally),
        ]
    })
}

pub fn store_ops() -> impl Strategy<Value = Vec<StoreOp>> {
    let op = prop_oneof![
        (small_formula(), unit()).prop_map(|(f, l)| StoreOp::Belief(f, l)),
        (small_formula(), signed()).prop_map(|(f, k)| StoreOp::Attitude(f, k)),
        small_formula().prop_map(StoreOp::Intend),
        small_formula().prop_map(StoreOp::Drop),
    ];
    prop::collection::vec(op, 1..25)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Complement of beliefs, sign flip of attitudes under the desire/ideal
/// duality, and never intending both a formula and its negation.
pub fn store_invariants(ops: &[StoreOp]) -> Result<(), TestCaseError> {
    let mut s = MentalState::new(AgentId::new("M").unwrap());
    for op in ops {
        match op {
            StoreOp::Belief(f, l) => {
                s.assert_belief(f, *l);
                let q = s.query_belief(f).unwrap();
                prop_assert!(close(q.value(), l.value()));
                let n = s.query_belief(&negate(canonicalize(f))).unwrap();
                prop_assert!(close(n.value(), 1.0 - l.value()), "{f}: {} vs {}", n.value(), l.value());
            }
            StoreOp::Attitude(f, k) => {
                s.assert_attitude(f, *k);
                let c = canonicalize(f);
                prop_assert!(close(s.query_attitude(&c).unwrap().value(), k.value()));
                let dual = match &c {
                    Formula::Future(x) => Some(Formula::globally(negate((**x).clone()))),
                    Formula::Globally(x) => Some(Formula::future(negate((**x).clone()))),
                    _ => None,
                };
                if let Some(d) = dual {
                    let got = s.query_attitude(&d).unwrap().value();
                    prop_assert!(close(got, -k.value()), "{c} at {} but dual {d} at {got}", k.value());
                }
            }
            StoreOp::Intend(f) => {
                let neg = negate(canonicalize(f));
                if s.add_intention(f).is_ok() {
                    prop_assert!(!s.intends(&neg));
                }
            }
            StoreOp::Drop(f) => {
                s.retract_belief(f);
                s.remove_intention(f);
                prop_assert!(s.query_belief(f).is_none() || matches!(canonicalize(f), Formula::Bel(..) | Formula::Att(..) | Formula::Int(..)));
            }
        }
        for (f, l) in s.belief_views() {
            let q = s.query_belief(&f).unwrap();
            prop_assert!(close(q.value(), l.value()));
        }
        for f in s.intentions() {
            let mut negations = vec![negate(f.clone())];
            match f {
                Formula::Future(x) => negations.push(Formula::globally(negate((**x).clone()))),
                Formula::Globally(x) => negations.push(Formula::future(negate((**x).clone()))),
                Formula::Not(x) => negations.push((**x).clone()),
                _ => {}
            }
            for n in negations {
                prop_assert!(!s.intends(&n), "both {f} and {n} intended");
            }
        }
    }
    Ok(())
}

/// Runs `cases` cases of a property with a fixed seed; returns the failure.
pub fn run<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner.run(&strategy, test).map_err(|e| e.to_string())
}
