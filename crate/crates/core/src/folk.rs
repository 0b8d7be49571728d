//! Forward-chaining evaluation of folk-psychology rules over one mental
//! state.
//!
//! A [`Matcher`] answers premises against a frozen view of the state;
//! [`run_rules`] drives a stage to its fixpoint, applying immediate effects
//! and queueing next-tick ones. The built-in rule catalog lives in
//! `rules/folk.rules`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::appraisal::IntensityMode;
use crate::degree::Unit;
use crate::logic::{canonicalize, is_responsible, Event, Formula, LogicError, Slot};
use crate::pattern::{
    instantiate, match_from, AgentPat, Bindings, Bound, EvalCtx, Pattern, PatternError,
};
use crate::rules::{Effect, Premise, Rule, RuleSet, Thresholds, Timing};
use crate::state::{EmotionInstance, FactKey, MentalState, StateError};

/// Firings allowed per agent and tick.
pub const DEFAULT_CAP: usize = 10_000;

pub const FOLK_RULES: &str = include_str!("../rules/folk.rules");

/// The built-in folk-psychology rules, by stage.
pub fn default_rules() -> RuleSet {
    crate::syntax::parse_rule_file(FOLK_RULES).expect("built-in rules parse")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FolkError {
    #[error("rule `{rule}`: {source}")]
    Effect { rule: String, source: PatternError },
    #[error("firing cap of {cap} per tick exceeded; rule `{rule}` keeps firing")]
    Cap { cap: usize, rule: String },
    #[error("not a witness: {agent} took no part in {event}")]
    NotWitness { agent: String, event: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// One way of satisfying a rule's premises.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub bindings: Bindings,
    /// Stored entries the premises read.
    pub used: Vec<FactKey>,
}

/// An instantiated effect.
#[derive(Debug, Clone, PartialEq)]
pub enum Produced {
    Fact(Formula),
    Emit(Event),
}

impl Produced {
    /// The degree carried by the effect, if any.
    pub fn degree(&self) -> Option<f64> {
        match self {
            Produced::Fact(Formula::Bel(_, l, _)) => Some(l.value()),
            Produced::Fact(Formula::Att(_, k, _))
            | Produced::Fact(Formula::Like(_, _, k))
            | Produced::Fact(Formula::Dom(_, _, k)) => Some(k.value()),
            Produced::Fact(Formula::Emo { intensity, .. }) => Some(intensity.value()),
            _ => None,
        }
    }

    pub fn render(&self, timing: Timing) -> String {
        let body = match self {
            Produced::Fact(f) => f.to_string(),
            Produced::Emit(e) => format!("Emit({e})"),
        };
        match timing {
            Timing::Immediate => body,
            Timing::Next => format!("N({body})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Firing {
    pub rule: String,
    pub bindings: Bindings,
    pub produced: Vec<(Produced, Timing)>,
    pub used: Vec<FactKey>,
    /// Set when an effect was dropped, with the reason.
    pub suppressed: Option<String>,
}

/// Premise evaluation against a frozen state.
pub struct Matcher<'a> {
    state: &'a MentalState,
    /// Facts above the moderate floor, for positive premises.
    facts: Vec<(Formula, FactKey)>,
    /// Every fact, for negated premises.
    all: Vec<(Formula, FactKey)>,
    observed: &'a [Event],
    ctx: EvalCtx<'a>,
}

#[derive(Clone)]
struct Partial {
    b: Bindings,
    used: Vec<FactKey>,
}

impl<'a> Matcher<'a> {
    pub fn new(state: &'a MentalState, observed: &'a [Event], ctx: EvalCtx<'a>) -> Self {
        Self {
            state,
            facts: state.facts(Some(ctx.thresholds.mod_th)),
            all: state.facts(None),
            observed,
            ctx,
        }
    }

    pub fn ctx(&self) -> &EvalCtx<'a> {
        &self.ctx
    }

    fn thresholds(&self) -> &Thresholds {
        &self.ctx.thresholds
    }

    /// Every match of the rule's premises, after its `select` clause.
    pub fn matches(&self, rule: &Rule) -> Result<Vec<Match>, FolkError> {
        let start = Partial {
            b: Bindings::new(),
            used: Vec::new(),
        };
        let sols = self.solve(&rule.premises, vec![start], false);
        let mut out: Vec<Match> = sols
            .into_iter()
            .map(|p| Match {
                bindings: p.b,
                used: p.used,
            })
            .collect();
        if let Some(sel) = &rule.select {
            let mut best: BTreeMap<String, (f64, String, usize)> = BTreeMap::new();
            for (i, m) in out.iter().enumerate() {
                let Ok(key) = sel.key.eval(&m.bindings, &self.ctx) else {
                    continue;
                };
                let group = sel
                    .per
                    .iter()
                    .map(|v| m.bindings.get(v.as_str()).map_or(String::new(), |b| b.to_string()))
                    .collect::<Vec<_>>()
                    .join(",");
                let tie = self.fire(rule, m.clone()).map_or(String::new(), |f| {
                    f.produced
                        .iter()
                        .map(|(p, t)| p.render(*t))
                        .collect::<Vec<_>>()
                        .join(" & ")
                });
                let better = match best.get(&group) {
                    None => true,
                    Some((k, t, _)) => {
                        crate::degree::gt(key, *k) || (crate::degree::approx_eq(key, *k) && tie < *t)
                    }
                };
                if better {
                    best.insert(group, (key, tie, i));
                }
            }
            let keep: BTreeSet<usize> = best.values().map(|(_, _, i)| *i).collect();
            out = out
                .into_iter()
                .enumerate()
                .filter(|(i, _)| keep.contains(i))
                .map(|(_, m)| m)
                .collect();
        }
        Ok(out)
    }

    fn solve(&self, premises: &[Premise], mut parts: Vec<Partial>, negated: bool) -> Vec<Partial> {
        for p in premises {
            let mut next = Vec::new();
            for part in parts {
                self.premise(p, part, negated, &mut next);
            }
            parts = next;
            if parts.is_empty() {
                break;
            }
        }
        parts
    }

    fn premise(&self, p: &Premise, part: Partial, negated: bool, out: &mut Vec<Partial>) {
        let ctx = &self.ctx;
        let concrete = |pat: &Pattern, b: &Bindings| instantiate(pat, b, ctx).ok();
        match p {
            Premise::Holds(pat) => {
                let facts = if negated { &self.all } else { &self.facts };
                for (f, key) in facts {
                    for b in match_from(pat, f, ctx, &part.b) {
                        let mut used = part.used.clone();
                        used.push(key.clone());
                        out.push(Partial { b, used });
                    }
                }
            }
            Premise::Goal(a, d, pat) => {
                let owner = self.state.owner();
                let goal_of = Formula::Like(owner.clone(), owner.clone(), crate::degree::Signed::ZERO);
                for (g, k) in self.state.goals() {
                    // reuse the Like matcher for the agent and degree slots
                    let probe = Pattern::Like(a.clone(), a.clone(), d.clone());
                    let kf = crate::degree::Signed::new(*k).unwrap_or(crate::degree::Signed::ZERO);
                    let target = match &goal_of {
                        Formula::Like(x, y, _) => Formula::Like(x.clone(), y.clone(), kf),
                        _ => unreachable!(),
                    };
                    for b in match_from(&probe, &target, ctx, &part.b) {
                        for b in match_from(pat, g, ctx, &b) {
                            out.push(Partial {
                                b,
                                used: part.used.clone(),
                            });
                        }
                    }
                }
            }
            Premise::Resp(a, pat) | Premise::Wit(a, pat) => {
                let Some(Formula::Event(e)) = concrete(pat, &part.b) else {
                    return;
                };
                if !e.is_concrete() {
                    return;
                }
                let who: Vec<Slot> = if matches!(p, Premise::Resp(..)) {
                    vec![e.actor.clone()]
                } else {
                    e.witnesses().into_iter().map(Slot::Agent).collect()
                };
                for w in who {
                    let Slot::Agent(agent) = &w else { continue };
                    let probe = Pattern::Int(a.clone(), Box::new(Pattern::Atom(crate::logic::Symbol::new("_"))));
                    let target = Formula::int(agent, Formula::atom("_"));
                    for b in match_from(&probe, &target, ctx, &part.b) {
                        out.push(Partial {
                            b,
                            used: part.used.clone(),
                        });
                    }
                }
            }
            Premise::Observed(pat) => {
                for e in self.observed {
                    let f = Formula::Event(e.clone());
                    for b in match_from(pat, &f, ctx, &part.b) {
                        out.push(Partial {
                            b,
                            used: part.used.clone(),
                        });
                    }
                }
            }
            Premise::IncDes(a, _, pat) | Premise::WIncDes(a, _, pat) => {
                if !self.is_owner(a, &part.b) {
                    return;
                }
                let Some(f) = concrete(pat, &part.b) else { return };
                let holds = match p {
                    Premise::IncDes(..) => self.state.inc_des(self.thresholds(), &f).is_some(),
                    Premise::WIncDes(_, d, _) => {
                        let Ok(k) = d.eval(&part.b, ctx) else { return };
                        self.state.winc_des(self.thresholds(), k, &f).is_some()
                    }
                    _ => unreachable!(),
                };
                if holds {
                    out.push(part);
                }
            }
            Premise::Atemporal(pat) => {
                if concrete(pat, &part.b).is_some_and(|f| f.is_atemporal()) {
                    out.push(part);
                }
            }
            Premise::Not(inner) => {
                let probe = Partial {
                    b: part.b.clone(),
                    used: Vec::new(),
                };
                if self
                    .solve(std::slice::from_ref(inner), vec![probe], true)
                    .is_empty()
                {
                    out.push(part);
                }
            }
            Premise::Guard(x, cmp, y) => {
                if let (Ok(a), Ok(b)) = (x.eval(&part.b, ctx), y.eval(&part.b, ctx)) {
                    if cmp.holds(a, b) {
                        out.push(part);
                    }
                }
            }
        }
    }

    fn is_owner(&self, a: &AgentPat, b: &Bindings) -> bool {
        match a {
            AgentPat::Owner | AgentPat::Any => true,
            AgentPat::Named(x) => x == self.state.owner(),
            AgentPat::Var(v) => matches!(b.get(v.as_str()), Some(Bound::Agent(Slot::Agent(x))) if x == self.state.owner()),
            AgentPat::Nobody => false,
        }
    }

    /// Instantiates the rule's effects under a match.
    pub fn fire(&self, rule: &Rule, m: Match) -> Result<Firing, FolkError> {
        let err = |source: PatternError| FolkError::Effect {
            rule: rule.name.clone(),
            source,
        };
        let mut produced = Vec::with_capacity(rule.effects.len());
        for (eff, timing) in &rule.effects {
            let p = match eff {
                Effect::Assert(p) => Produced::Fact(instantiate(p, &m.bindings, &self.ctx).map_err(err)?),
                Effect::Emit(p) => match instantiate(p, &m.bindings, &self.ctx).map_err(err)? {
                    Formula::Event(e) if e.is_concrete() => Produced::Emit(e),
                    _ => return Err(err(PatternError::NotConcrete)),
                },
            };
            produced.push((p, *timing));
        }
        Ok(Firing {
            rule: rule.name.clone(),
            bindings: m.bindings,
            produced,
            used: m.used,
            suppressed: None,
        })
    }
}

/// A next-tick effect waiting in the queue.
#[derive(Debug, Clone, PartialEq)]
pub struct Pending {
    pub item: Produced,
    pub rule: String,
}

/// Per-tick bookkeeping shared by every stage of one agent.
#[derive(Debug, Clone)]
pub struct TickMemory {
    fired: BTreeSet<(String, String)>,
    count: usize,
    cap: usize,
}

impl TickMemory {
    pub fn new(cap: usize) -> Self {
        Self {
            fired: BTreeSet::new(),
            count: 0,
            cap,
        }
    }

    pub fn firings(&self) -> usize {
        self.count
    }
}

/// Where the effects of a stage run go.
pub struct Sink<'q> {
    pub queue: &'q mut Vec<Pending>,
    /// Events emitted by immediate `Emit` effects.
    pub emitted: &'q mut Vec<Event>,
}

/// Applies a produced fact to the state. `Ok(false)` when nothing changed.
pub fn apply_fact(state: &mut MentalState, f: &Formula, tick: u64) -> Result<bool, StateError> {
    if let Some(e) = EmotionInstance::from_formula(f, tick) {
        if state.emotions().iter().any(|x| x.to_formula() == *f) {
            return Ok(false);
        }
        let mut all = state.emotions().to_vec();
        all.push(e);
        state.set_emotions(all)?;
        return Ok(true);
    }
    state.assert_fact(f)
}

fn holds(state: &MentalState, f: &Formula) -> bool {
    match f {
        Formula::Emo { .. } => state.emotions().iter().any(|x| x.to_formula() == *f),
        _ => state.holds_fact(f),
    }
}

/// Runs the rules to fixpoint. Each `(rule, non-degree bindings)` pair fires
/// at most once per tick, and only when some effect would change the state
/// or the queue.
#[allow(clippy::too_many_arguments)]
pub fn run_rules(
    state: &mut MentalState,
    rules: &[&Rule],
    observed: &[Event],
    th: Thresholds,
    mode: IntensityMode,
    tick: u64,
    mem: &mut TickMemory,
    sink: &mut Sink<'_>,
) -> Result<Vec<Firing>, FolkError> {
    let owner = state.owner().clone();
    let mut log = Vec::new();
    loop {
        let mut progressed = false;
        for rule in rules {
            let candidates = {
                let ctx = EvalCtx {
                    owner: Some(&owner),
                    thresholds: th,
                    mode,
                };
                let m = Matcher::new(state, observed, ctx);
                let mut fs = Vec::new();
                for mt in m.matches(rule)? {
                    let key = (rule.name.clone(), mt.bindings.structural_key());
                    if mem.fired.contains(&key) {
                        continue;
                    }
                    fs.push((key, m.fire(rule, mt)?));
                }
                fs
            };
            for (key, mut firing) in candidates {
                if mem.fired.contains(&key) {
                    continue;
                }
                let changes = firing.produced.iter().any(|(p, t)| match (p, t) {
                    (Produced::Fact(f), Timing::Immediate) => !holds(state, f),
                    (Produced::Emit(e), Timing::Immediate) => !sink.emitted.contains(e),
                    (item, Timing::Next) => {
                        !sink.queue.iter().any(|q| q.item == *item)
                            && !matches!(item, Produced::Fact(f) if holds(state, f))
                    }
                });
                if !changes {
                    continue;
                }
                mem.fired.insert(key);
                mem.count += 1;
                if mem.count > mem.cap {
                    return Err(FolkError::Cap {
                        cap: mem.cap,
                        rule: rule.name.clone(),
                    });
                }
                for (p, t) in &firing.produced {
                    match (p, t) {
                        (Produced::Fact(f), Timing::Immediate) => {
                            if let Err(e) = apply_fact(state, f, tick) {
                                firing.suppressed = Some(e.to_string());
                            }
                        }
                        (Produced::Emit(e), Timing::Immediate) => {
                            if !sink.emitted.contains(e) {
                                sink.emitted.push(e.clone());
                            }
                        }
                        (item, Timing::Next) => {
                            if !sink.queue.iter().any(|q| q.item == *item) {
                                sink.queue.push(Pending {
                                    item: item.clone(),
                                    rule: rule.name.clone(),
                                });
                            }
                        }
                    }
                }
                progressed = true;
                log.push(firing);
            }
        }
        if !progressed {
            break;
        }
    }
    Ok(log)
}

/// What a witness comes to believe about an event: that it happened, that
/// every other witness believes it too, and who is responsible for it.
pub fn witness_beliefs(state: &MentalState, e: &Event) -> Result<Vec<Formula>, FolkError> {
    let me = state.owner();
    if !crate::logic::is_witness(me, e)? {
        return Err(FolkError::NotWitness {
            agent: me.to_string(),
            event: e.to_string(),
        });
    }
    let ev = canonicalize(&Formula::Event(e.clone()));
    let mut out = vec![Formula::bel(me, Unit::ONE, ev.clone())];
    for w in e.witnesses() {
        if w != *me {
            out.push(Formula::bel(me, Unit::ONE, Formula::bel(&w, Unit::ONE, ev.clone())));
        }
    }
    if let Slot::Agent(actor) = &e.actor {
        debug_assert!(is_responsible(actor, e).unwrap_or(false));
        out.push(Formula::bel(
            me,
            Unit::ONE,
            Formula::Resp(actor.clone(), Box::new(ev.clone())),
        ));
    }
    Ok(out)
}

/// Perceives an event the owner took part in. Returns the beliefs that were
/// new. Observing the same event twice changes nothing.
pub fn observe_event(state: &mut MentalState, e: &Event) -> Result<Vec<Formula>, FolkError> {
    let mut added = Vec::new();
    for f in witness_beliefs(state, e)? {
        if state.assert_fact(&f).expect("beliefs never conflict") {
            added.push(f);
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::AgentId;
    use crate::rules::Stage;
    use crate::syntax::{parse_formula, parse_rule};

    fn ag(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn state(facts: &[&str]) -> MentalState {
        let mut s = MentalState::new(ag("M"));
        for f in facts {
            s.assert_fact(&parse_formula(f).unwrap()).unwrap();
        }
        s
    }

    fn run(s: &mut MentalState, rules: &[&Rule], observed: &[Event]) -> (Vec<Firing>, Vec<Pending>) {
        let mut queue = Vec::new();
        let mut emitted = Vec::new();
        let mut mem = TickMemory::new(DEFAULT_CAP);
        let mut sink = Sink {
            queue: &mut queue,
            emitted: &mut emitted,
        };
        let f = run_rules(
            s,
            rules,
            observed,
            Thresholds::default(),
            IntensityMode::Normalized,
            0,
            &mut mem,
            &mut sink,
        )
        .unwrap();
        (f, queue)
    }

    fn catalog_rule(name: &str) -> Rule {
        default_rules().get(name).unwrap().clone()
    }

    fn bel(s: &MentalState, f: &str) -> Option<f64> {
        s.query_belief(&parse_formula(f).unwrap()).map(|u| u.value())
    }

    #[test]
    fn catalog_parses_with_stages() {
        let set = default_rules();
        assert!(set.in_stage(Stage::UpdateBeliefsWithNewSoa).count() >= 3);
        assert_eq!(set.in_stage(Stage::ExecuteIntentions).count(), 1);
        assert!(!set.catalog().is_empty());
    }

    #[test]
    fn belief_from_implication_degree() {
        let mut s = state(&[
            "Bel(M,1,J_lost_his_dad)",
            "Bel(M,0.76,J_lost_his_dad -> Ideal(J,0.8,!<-,J,dad>))",
        ]);
        let r = catalog_rule("belief_from_implication");
        let (f, _) = run(&mut s, &[&r], &[]);
        assert_eq!(f.len(), 1);
        let l = bel(&s, "Ideal(J,0.8,!<-,J,dad>)").unwrap();
        assert!((l - 0.94).abs() < 1e-9, "{l}");
    }

    #[test]
    fn no_implications_no_effects() {
        let mut s = state(&["Bel(M,1,p)"]);
        let r = catalog_rule("belief_from_implication");
        assert!(run(&mut s, &[&r], &[]).0.is_empty());
    }

    #[test]
    fn implication_chain_reaches_fixpoint() {
        let mut s = state(&["Bel(M,1,a)", "Bel(M,0.9,a -> b)", "Bel(M,0.8,b -> c)"]);
        let r = catalog_rule("belief_from_implication");
        let (f, _) = run(&mut s, &[&r], &[]);
        assert_eq!(f.len(), 2);
        // b = (1 + 0.9)/4 + 0.5, c = (b + 0.8)/4 + 0.5
        let b = 1.9 / 4.0 + 0.5;
        assert!((bel(&s, "b").unwrap() - b).abs() < 1e-9);
        assert!((bel(&s, "c").unwrap() - ((b + 0.8) / 4.0 + 0.5)).abs() < 1e-9);
    }

    #[test]
    fn contagion_toward_liked_agent() {
        let mut s = state(&["Bel(M,0.8,Des(J,0.6,phi))", "Like(M,J,0.5)"]);
        let r = catalog_rule("desire_contagion");
        let (f, q) = run(&mut s, &[&r], &[]);
        assert_eq!(f.len(), 1);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].item.degree(), Some(0.775));
        // next-tick effect is not visible now
        assert_eq!(s.query_desire(&parse_formula("phi").unwrap()), None);

        let mut s = state(&["Bel(M,0.8,Des(J,0.6,phi))", "Like(M,J,0)"]);
        assert!(run(&mut s, &[&r], &[]).0.is_empty());
    }

    #[test]
    fn neutral_attitude_update() {
        let mut s = state(&[
            "Bel(M,0.9,phi)",
            "Des(M,0,phi)",
            "Bel(M,0.9,Des(J,0,phi))",
            "Like(M,J,0)",
            "Dom(M,J,0)",
        ]);
        let r = catalog_rule("attitude_update");
        run(&mut s, &[&r], &[]);
        assert_eq!(
            s.query_attitude(&parse_formula("phi").unwrap()).map(|k| k.value()),
            Some(0.5)
        );
    }

    #[test]
    fn adoption_guard_is_strict() {
        let r = catalog_rule("adopt_desire");
        for (l, fires) in [(0.75, false), (0.76, true)] {
            let mut s = state(&["Des(M,0.77,tah)", &format!("Bel(M,{l},<M,J,vht> -> F(tah))")]);
            let (_, q) = run(&mut s, &[&r], &[]);
            assert_eq!(!q.is_empty(), fires, "l={l}");
        }
    }

    #[test]
    fn perlocution_of_assert() {
        let r = catalog_rule("assert_perlocution");
        let mut s = state(&["Like(M,R,0.2)", "Dom(M,R,-0.4)"]);
        let e = parse_formula("<R,M,Assert(salary_is_bad)>").unwrap();
        let Formula::Event(e) = e else { panic!() };
        let (_, q) = run(&mut s, &[&r], &[e]);
        assert_eq!(q.len(), 1);
        assert!((q[0].item.degree().unwrap() - 0.45).abs() < 1e-9);
    }

    #[test]
    fn request_needs_submission() {
        let r = catalog_rule("request_perlocution");
        let Formula::Event(e) = parse_formula("<R,M,Request(<M,R,call>)>").unwrap() else { panic!() };
        let mut s = state(&["Dom(M,R,0)"]);
        assert!(run(&mut s, &[&r], std::slice::from_ref(&e)).1.is_empty());
        let mut s = state(&["Dom(M,R,-0.3)"]);
        assert_eq!(run(&mut s, &[&r], &[e]).1.len(), 1);
    }

    #[test]
    fn request_generation_respects_belief() {
        let r = catalog_rule("request_generation");
        let mut s = state(&["Int(M,Int(J,<J,M,call>))"]);
        let mut queue = Vec::new();
        let mut emitted = Vec::new();
        let mut mem = TickMemory::new(DEFAULT_CAP);
        let mut sink = Sink {
            queue: &mut queue,
            emitted: &mut emitted,
        };
        run_rules(&mut s, &[&r], &[], Thresholds::default(), IntensityMode::Normalized, 0, &mut mem, &mut sink)
            .unwrap();
        assert_eq!(emitted.len(), 1);
        assert_eq!(emitted[0].to_string(), "<M,J,Request(<J,M,call>)>");

        let mut s = state(&["Int(M,Int(J,<J,M,call>))", "Bel(M,1,Int(J,<J,M,call>))"]);
        let mut emitted = Vec::new();
        let mut sink = Sink {
            queue: &mut queue,
            emitted: &mut emitted,
        };
        let mut mem = TickMemory::new(DEFAULT_CAP);
        run_rules(&mut s, &[&r], &[], Thresholds::default(), IntensityMode::Normalized, 0, &mut mem, &mut sink)
            .unwrap();
        assert!(emitted.is_empty());
    }

    #[test]
    fn witnessing() {
        let mut s = state(&[]);
        let Formula::Event(e) = parse_formula("<M,J,Assert(p)>").unwrap() else { panic!() };
        let added = observe_event(&mut s, &e).unwrap();
        assert_eq!(added.len(), 3);
        assert_eq!(bel(&s, "<M,J,Assert(p)>"), Some(1.0));
        assert_eq!(bel(&s, "Bel(J,1,<M,J,Assert(p)>)"), Some(1.0));
        assert!(observe_event(&mut s, &e).unwrap().is_empty());
        let Formula::Event(other) = parse_formula("<K,J,x>").unwrap() else { panic!() };
        let err = observe_event(&mut s, &other).unwrap_err();
        assert!(err.to_string().contains("not a witness"));
    }

    #[test]
    fn responsibility_propagates_with_mean() {
        let mut s = state(&[
            "Bel(M,1,Resp(J,gift))",
            "Bel(M,1,gift)",
            "Bel(M,1,thanks)",
            "Bel(M,1,gift -> F(thanks))",
        ]);
        let r = catalog_rule("responsibility_propagation");
        run(&mut s, &[&r], &[]);
        assert_eq!(bel(&s, "Resp(J,thanks)"), Some(1.0));
    }

    #[test]
    fn means_are_ranked() {
        let r = catalog_rule("intention_from_means");
        let mut s = state(&[
            "Bel(M,0.9,a -> F(goal))",
            "Bel(M,0.9,b -> F(goal))",
            "Bel(M,0.9,F(a))",
            "Bel(M,0.6,F(b))",
        ]);
        s.set_goals(vec![(parse_formula("goal").unwrap(), 0.8)]);
        let (_, q) = run(&mut s, &[&r], &[]);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].item, Produced::Fact(parse_formula("Int(M,a)").unwrap()));
        // equal achievability: lexicographic on the effect
        let mut s = state(&[
            "Bel(M,0.9,b -> F(goal))",
            "Bel(M,0.9,a -> F(goal))",
            "Bel(M,0.9,F(b))",
            "Bel(M,0.9,F(a))",
        ]);
        s.set_goals(vec![(parse_formula("goal").unwrap(), 0.8)]);
        let (_, q) = run(&mut s, &[&r], &[]);
        assert_eq!(q[0].item, Produced::Fact(parse_formula("Int(M,a)").unwrap()));
    }

    #[test]
    fn goal_with_nonpositive_degree_gives_no_intention() {
        let r = catalog_rule("intention_from_responsibility");
        let mut s = state(&[]);
        s.set_goals(vec![(parse_formula("<M,J,call>").unwrap(), 0.0)]);
        assert!(run(&mut s, &[&r], &[]).1.is_empty());
        s.set_goals(vec![(parse_formula("<M,J,call>").unwrap(), 0.8)]);
        assert_eq!(run(&mut s, &[&r], &[]).1.len(), 1);
    }

    #[test]
    fn conflicting_intention_is_suppressed() {
        let r = parse_rule("rule want_not : Bel(self,?l,p) => Int(self,!p)").unwrap();
        let mut s = state(&["Bel(M,0.9,p)", "Int(M,p)"]);
        let (f, _) = run(&mut s, &[&r], &[]);
        assert_eq!(f.len(), 1);
        assert!(f[0].suppressed.is_some());
        assert!(!s.intends(&parse_formula("!p").unwrap()));
    }

    #[test]
    fn runaway_rule_hits_cap() {
        let r = parse_rule("rule grow : Bel(self,?l,?p) => Bel(self,?l,N(?p))").unwrap();
        let mut s = state(&["Bel(M,0.9,p)"]);
        let mut queue = Vec::new();
        let mut emitted = Vec::new();
        let mut mem = TickMemory::new(50);
        let mut sink = Sink {
            queue: &mut queue,
            emitted: &mut emitted,
        };
        let err = run_rules(&mut s, &[&r], &[], Thresholds::default(), IntensityMode::Normalized, 0, &mut mem, &mut sink)
            .unwrap_err();
        assert!(matches!(err, FolkError::Cap { ref rule, .. } if rule == "grow"));
    }
}
