//! The per-tick reasoning loop of one agent and the trace it writes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::appraisal::{appraise, AppraisalTheory, IntensityMode};
use crate::folk::{
    apply_fact, default_rules, observe_event, run_rules, Firing, FolkError, Matcher, Pending,
    Produced, Sink, TickMemory, DEFAULT_CAP,
};
use crate::logic::{is_witness, AgentId, Event, Formula, Slot};
use crate::pattern::EvalCtx;
use crate::projection::Projector;
use crate::rules::{RuleSet, Stage, Thresholds, Timing};
use crate::scenario::{ScenarioDoc, Script};
use crate::state::{EmotionInstance, GoalStatus, MentalState};

pub const TRACE_VERSION: &str = "tom-trace v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("scenario declares no agents")]
    NoAgents,
    #[error("unknown agent `{agent}` in {what}")]
    UnknownAgent { agent: String, what: String },
    #[error("tick {tick}: {source}")]
    Folk { tick: u64, source: FolkError },
}

#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub mode: IntensityMode,
    pub cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            mode: IntensityMode::Normalized,
            cap: DEFAULT_CAP,
        }
    }
}

/// One line of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringRecord {
    pub tick: u64,
    /// A stage name, or `select` / `interpret` for interview bookkeeping.
    pub stage: String,
    pub rule: String,
    pub bindings: String,
    pub effect: String,
    pub degree: Option<f64>,
}

impl FiringRecord {
    /// `tick|stage|rule|bindings|effect|degree`, with `-` for no degree.
    pub fn line(&self) -> String {
        let d = self.degree.map_or_else(|| "-".to_string(), |d| d.to_string());
        format!(
            "{}|{}|{}|{}|{}|{}",
            self.tick, self.stage, self.rule, self.bindings, self.effect, d
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickReport {
    pub tick: u64,
    /// Stages in the order they ran.
    pub stages: Vec<Stage>,
    pub records: Vec<FiringRecord>,
    /// Events performed by the agent this tick.
    pub emitted: Vec<Event>,
    /// Next-tick effects queued this tick, emotion batch included.
    pub enqueued: usize,
    /// Next-tick effects applied at the start of this tick.
    pub drained: usize,
}

impl TickReport {
    /// Number of rule firings, excluding bookkeeping records.
    pub fn firings(&self) -> usize {
        self.records
            .iter()
            .filter(|r| !matches!(r.stage.as_str(), "drain" | "perceive"))
            .count()
    }
}

/// A complete run: header plus every record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: Vec<String>,
    pub records: Vec<FiringRecord>,
}

impl Trace {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            let _ = writeln!(out, "# {h}");
        }
        for r in &self.records {
            let _ = writeln!(out, "{}", r.line());
        }
        out
    }
}

/// One reasoning agent with its queue of pending effects.
#[derive(Debug, Clone)]
pub struct Engine {
    pub state: MentalState,
    others: Vec<AgentId>,
    thresholds: Thresholds,
    rules: RuleSet,
    theory: AppraisalTheory,
    opts: EngineOptions,
    queue: Vec<Pending>,
    next_emotions: Option<Vec<EmotionInstance>>,
    /// Own speech acts from the previous tick, perceived at the next one.
    inbox: Vec<Event>,
    reported_goals: BTreeSet<(bool, Formula)>,
    tick: u64,
    name: String,
}

fn goal_effect(agent: &AgentId, kind: &str, f: &Formula) -> String {
    format!("{kind}({agent},{f})")
}

impl Engine {
    /// The engine of the scenario's reasoning agent.
    pub fn from_scenario(doc: &ScenarioDoc, theory: AppraisalTheory, opts: EngineOptions) -> Result<Self, EngineError> {
        let owner = doc.reasoner().ok_or(EngineError::NoAgents)?.clone();
        Self::for_agent(doc, &owner, theory, opts)
    }

    /// The engine of any declared agent, seeded with that agent's facts and
    /// outgoing relations.
    pub fn for_agent(
        doc: &ScenarioDoc,
        owner: &AgentId,
        theory: AppraisalTheory,
        opts: EngineOptions,
    ) -> Result<Self, EngineError> {
        if !doc.agents.contains(owner) {
            return Err(EngineError::UnknownAgent {
                agent: owner.to_string(),
                what: "scenario".into(),
            });
        }
        let mut state = MentalState::new(owner.clone());
        for (who, f) in &doc.initial_facts {
            if who == owner {
                // scenario facts never state conflicting intentions; the
                // parser already rejected foreign mental states
                let _ = state.assert_fact(f);
            }
        }
        for r in doc.relations.iter().filter(|r| &r.from == owner) {
            if let Some(k) = r.like {
                state.set_like(&r.to, k);
            }
            if let Some(k) = r.dom {
                state.set_dom(&r.to, k);
            }
        }
        let mut rules = default_rules();
        for r in &doc.rules {
            rules.rules.push((Stage::UpdateBeliefsWithNewSoa, r.clone()));
        }
        Ok(Self {
            state,
            others: doc.agents.iter().filter(|a| *a != owner).cloned().collect(),
            thresholds: doc.thresholds(),
            rules,
            theory,
            opts,
            queue: Vec::new(),
            next_emotions: None,
            inbox: Vec::new(),
            reported_goals: BTreeSet::new(),
            tick: 0,
            name: doc.name.clone().unwrap_or_else(|| "unnamed".into()),
        })
    }

    pub fn owner(&self) -> &AgentId {
        self.state.owner()
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn theory(&self) -> &AppraisalTheory {
        &self.theory
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn projector(&self) -> Projector<'_> {
        Projector {
            rules: &self.rules,
            theory: &self.theory,
            thresholds: self.thresholds,
            mode: self.opts.mode,
            cap: self.opts.cap,
        }
    }

    /// Effects waiting for the next tick.
    pub fn pending(&self) -> &[Pending] {
        &self.queue
    }

    pub fn header(&self) -> Vec<String> {
        let t = self.thresholds;
        vec![
            TRACE_VERSION.to_string(),
            format!("scenario {}", self.name),
            format!("agent {}", self.owner()),
            format!("thresholds mod={} str={} des={}", t.mod_th, t.str_th, t.des_th),
        ]
    }

    fn record(&self, stage: &str, rule: &str, bindings: String, effect: String, degree: Option<f64>) -> FiringRecord {
        FiringRecord {
            tick: self.tick,
            stage: stage.to_string(),
            rule: rule.to_string(),
            bindings,
            effect,
            degree,
        }
    }

    fn firing_records(&self, stage: Stage, firings: &[Firing]) -> Vec<FiringRecord> {
        let mut out = Vec::new();
        for f in firings {
            for (p, t) in &f.produced {
                let mut effect = p.render(*t);
                if let Some(why) = &f.suppressed {
                    effect = format!("{effect} [suppressed: {why}]");
                }
                out.push(self.record(stage.name(), &f.rule, f.bindings.to_string(), effect, p.degree()));
            }
        }
        out
    }

    fn run_stage(
        &mut self,
        stage: Stage,
        observed: &[Event],
        mem: &mut TickMemory,
        emitted: &mut Vec<Event>,
        report: &mut TickReport,
    ) -> Result<(), FolkError> {
        let rules: Vec<_> = self.rules.in_stage(stage).cloned().collect();
        let refs: Vec<_> = rules.iter().collect();
        let mut sink = Sink {
            queue: &mut self.queue,
            emitted,
        };
        let before = sink.queue.len();
        let firings = run_rules(
            &mut self.state,
            &refs,
            observed,
            self.thresholds,
            self.opts.mode,
            self.tick,
            mem,
            &mut sink,
        )?;
        report.enqueued += self.queue.len() - before;
        report.records.extend(self.firing_records(stage, &firings));
        Ok(())
    }

    /// Runs one tick over the events arriving now.
    pub fn tick(&mut self, incoming: &[Event]) -> Result<TickReport, EngineError> {
        let t = self.tick;
        let res = self.tick_inner(incoming);
        self.tick += 1;
        res.map_err(|source| EngineError::Folk { tick: t, source })
    }

    fn tick_inner(&mut self, incoming: &[Event]) -> Result<TickReport, FolkError> {
        let mut report = TickReport {
            tick: self.tick,
            ..Default::default()
        };
        let mut mem = TickMemory::new(self.opts.cap);
        let me = self.owner().clone();

        // drain
        report.stages.push(Stage::Drain);
        let due = std::mem::take(&mut self.queue);
        report.drained = due.len();
        let mut to_perform = Vec::new();
        for p in due {
            let mut effect = p.item.render(Timing::Next);
            match &p.item {
                Produced::Fact(f) => {
                    if let Err(e) = apply_fact(&mut self.state, f, self.tick) {
                        effect = format!("{effect} [suppressed: {e}]");
                    }
                }
                Produced::Emit(e) => to_perform.push(e.clone()),
            }
            report
                .records
                .push(self.record("drain", &p.rule, String::new(), effect, p.item.degree()));
        }
        if let Some(emotions) = self.next_emotions.take() {
            report.drained += emotions.len();
            for e in &emotions {
                let f = e.to_formula();
                report.records.push(self.record(
                    "drain",
                    &e.kind.name().to_lowercase(),
                    String::new(),
                    format!("N({f})"),
                    Some(e.intensity.value()),
                ));
            }
            self.state
                .set_emotions(emotions)
                .expect("appraisal only yields atemporal emotions");
        }

        // execute_intentions
        report.stages.push(Stage::ExecuteIntentions);
        let mut emitted: Vec<Event> = Vec::new();
        for e in to_perform {
            self.state.remove_intention(&Formula::Event(e.clone()));
            if !emitted.contains(&e) {
                report
                    .records
                    .push(self.record("execute_intentions", "emit", String::new(), e.to_string(), None));
                emitted.push(e);
            }
        }
        let mut scratch = Vec::new();
        self.run_stage(Stage::ExecuteIntentions, &[], &mut mem, &mut scratch, &mut report)?;

        // perceive
        report.stages.push(Stage::Perceive);
        let mut observed: Vec<Event> = Vec::new();
        let arriving = std::mem::take(&mut self.inbox)
            .into_iter()
            .chain(emitted.iter().cloned())
            .chain(incoming.iter().cloned());
        for e in arriving {
            if observed.contains(&e) || !is_witness(&me, &e)? {
                continue;
            }
            for f in observe_event(&mut self.state, &e)? {
                report
                    .records
                    .push(self.record("perceive", "perceive", String::new(), f.to_string(), Some(1.0)));
            }
            observed.push(e);
        }

        // simulate_others
        report.stages.push(Stage::SimulateOthers);
        for other in self.others.clone() {
            let proj = Projector {
                rules: &self.rules,
                theory: &self.theory,
                thresholds: self.thresholds,
                mode: self.opts.mode,
                cap: self.opts.cap,
            };
            let sim = proj.refresh_predictions(&mut self.state, &other, &observed)?;
            for p in &sim.predicted {
                report.records.push(self.record(
                    "simulate_others",
                    "simulate",
                    format!("?other={other}"),
                    p.belief(&me).to_string(),
                    Some(p.certainty.value()),
                ));
            }
        }

        // update_beliefs_and_attitudes
        report.stages.push(Stage::UpdateBeliefsWithNewSoa);
        self.run_stage(Stage::UpdateBeliefsWithNewSoa, &observed, &mut mem, &mut scratch, &mut report)?;
        // the store keeps every formula in canonical form, so equivalent
        // operators never coexist
        report.stages.push(Stage::HandleOperatorsEquivalence);
        report.stages.push(Stage::AdoptNewDesires);
        self.run_stage(Stage::AdoptNewDesires, &observed, &mut mem, &mut scratch, &mut report)?;

        report.stages.push(Stage::OrderGoals);
        self.order_goals(&mut report);

        report.stages.push(Stage::Appraise);
        let ctx = EvalCtx {
            owner: Some(&me),
            thresholds: self.thresholds,
            mode: self.opts.mode,
        };
        let m = Matcher::new(&self.state, &observed, ctx);
        let a = appraise(&self.state, &self.theory, &m, self.tick)?;
        let mut recs = self.firing_records(Stage::Appraise, &a.firings);
        for r in &mut recs {
            if a.suppressed.iter().any(|s| r.effect == format!("N({})", s.to_formula())) {
                r.effect.push_str(" [suppressed: less specific]");
            }
        }
        report.records.extend(recs);
        report.enqueued += a.emotions.len();
        self.next_emotions = Some(a.emotions);

        // adopt_new_intentions
        report.stages.push(Stage::AdoptNewIntentionsFromGoals);
        self.run_stage(Stage::AdoptNewIntentionsFromGoals, &observed, &mut mem, &mut scratch, &mut report)?;
        report.stages.push(Stage::AdoptNewIntentionsFromIntentions);
        self.run_stage(Stage::AdoptNewIntentionsFromIntentions, &observed, &mut mem, &mut scratch, &mut report)?;

        report.stages.push(Stage::SpeechActs);
        let mut spoken = Vec::new();
        self.run_stage(Stage::SpeechActs, &observed, &mut mem, &mut spoken, &mut report)?;
        for e in spoken {
            if !emitted.contains(&e) {
                emitted.push(e.clone());
                self.inbox.push(e);
            }
        }
        report.emitted = emitted;
        Ok(report)
    }

    fn order_goals(&mut self, report: &mut TickReport) {
        let me = self.owner().clone();
        let mut goals = Vec::new();
        let mut blocked = Vec::new();
        for c in self.state.goal_candidates(&self.thresholds) {
            match c.status {
                GoalStatus::Goal => goals.push((c.content, c.k)),
                GoalStatus::Blocked { link, rival, rival_k } => blocked.push((c.content, c.k, link, rival, rival_k)),
                _ => {}
            }
        }
        crate::state::order_goals(&mut goals);
        blocked.sort_by_cached_key(|b| b.0.to_string());
        let mut now = BTreeSet::new();
        for (content, k, link, rival, rival_k) in blocked {
            let key = (false, content.clone());
            if !self.reported_goals.contains(&key) {
                report.records.push(self.record(
                    "order_goals",
                    "weak_inconsistency",
                    format!("?link={link},?rival={rival},?rival_k={rival_k}"),
                    goal_effect(&me, "WIncDes", &content),
                    Some(k),
                ));
            }
            now.insert(key);
        }
        for (content, k) in &goals {
            let key = (true, content.clone());
            if !self.reported_goals.contains(&key) {
                report
                    .records
                    .push(self.record("order_goals", "goal", String::new(), goal_effect(&me, "Goal", content), Some(*k)));
            }
            now.insert(key);
        }
        self.reported_goals = now;
        self.state.set_goals(goals);
    }
}

fn check_agents(doc: &ScenarioDoc, e: &Event, tick: usize) -> Result<(), EngineError> {
    for s in [&e.actor, &e.recipient] {
        if let Slot::Agent(a) = s {
            if !doc.agents.contains(a) {
                return Err(EngineError::UnknownAgent {
                    agent: a.to_string(),
                    what: format!("script at tick {tick}"),
                });
            }
        }
    }
    Ok(())
}

/// Runs the reasoning agent over a script. The run lasts `horizon` ticks,
/// extended to cover the last scripted batch.
pub fn run_script(
    doc: &ScenarioDoc,
    script: &Script,
    theory: AppraisalTheory,
    opts: EngineOptions,
) -> Result<(Trace, Vec<TickReport>), EngineError> {
    for (t, batch) in &script.batches {
        for e in batch {
            check_agents(doc, e, *t)?;
        }
    }
    let mut engine = Engine::from_scenario(doc, theory, opts)?;
    let ticks = doc.horizon.max(script.last_tick().map_or(0, |t| t + 1));
    let mut trace = Trace {
        header: engine.header(),
        records: Vec::new(),
    };
    let mut reports = Vec::with_capacity(ticks);
    for t in 0..ticks {
        let r = engine.tick(script.at(t))?;
        trace.records.extend(r.records.iter().cloned());
        reports.push(r);
    }
    Ok((trace, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_scenario, parse_script};

    fn doc(text: &str) -> ScenarioDoc {
        parse_scenario(text).unwrap()
    }

    fn engine(text: &str) -> Engine {
        Engine::from_scenario(&doc(text), AppraisalTheory::default(), EngineOptions::default()).unwrap()
    }

    #[test]
    fn empty_state_no_firings() {
        let mut e = engine("agent M\n");
        let r = e.tick(&[]).unwrap();
        assert_eq!(r.firings(), 0);
        assert_eq!(r.stages.len(), Stage::ORDER.len());
        assert_eq!(r.stages, Stage::ORDER.to_vec());
    }

    #[test]
    fn next_effect_visible_one_tick_later() {
        let mut e = engine(
            "agent M J\nrelation M -> J like 0.5\nfact M : Bel(M,0.8,Des(J,0.6,phi))\n",
        );
        let phi = parse_formula("phi").unwrap();
        let r0 = e.tick(&[]).unwrap();
        assert_eq!(e.state.query_desire(&phi), None);
        assert_eq!(r0.enqueued, 1);
        let r1 = e.tick(&[]).unwrap();
        assert_eq!(r1.drained, 1);
        assert_eq!(e.state.query_desire(&phi), Some(0.775));
    }

    #[test]
    fn unknown_script_agent_is_an_error() {
        let d = doc("agent M\nhorizon 1\n");
        let s = parse_script("tick 0: <Z,M,hello>\n").unwrap();
        let err = run_script(&d, &s, AppraisalTheory::default(), EngineOptions::default()).unwrap_err();
        assert!(err.to_string().contains("unknown agent `Z`"));
    }

    #[test]
    fn empty_script_header_only() {
        let d = doc("scenario nothing\nagent M\n");
        let (t, _) = run_script(&d, &Default::default(), AppraisalTheory::default(), EngineOptions::default()).unwrap();
        assert!(t.records.is_empty());
        let text = t.render();
        assert!(text.starts_with("# tom-trace v1\n# scenario nothing\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn request_is_performed_and_perceived() {
        let mut e = engine("agent M J\nfact M : Int(M,Int(J,<J,M,call>))\n");
        let r = e.tick(&[]).unwrap();
        assert_eq!(r.emitted.len(), 1);
        let r = e.tick(&[]).unwrap();
        assert!(r.records.iter().any(|x| x.stage == "perceive"));
    }

    #[test]
    fn non_witness_events_are_ignored() {
        let mut e = engine("agent M J K\n");
        let ev = match parse_formula("<J,K,x>").unwrap() {
            Formula::Event(ev) => ev,
            _ => unreachable!(),
        };
        let r = e.tick(&[ev]).unwrap();
        assert!(r.records.is_empty());
    }
}
