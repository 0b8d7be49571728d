//! Simulation of other agents: the owner's beliefs about someone are turned
//! into a stand-alone state for them and run through the owner's own rules
//! and appraisal theory.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::appraisal::{appraise, intensity, Appraisal, AppraisalTheory, IntensityMode};
use crate::degree::{gt, Unit};
use crate::folk::{
    apply_fact, run_rules, witness_beliefs, Firing, FolkError, Matcher, Pending, Produced, Sink,
    TickMemory,
};
use crate::interview::Channel;
use crate::logic::{is_responsible, is_witness, negate, unifies, AgentId, Event, Formula};
use crate::pattern::EvalCtx;
use crate::rules::{Rule, RuleSet, Stage, Thresholds, Timing};
use crate::state::{EmotionInstance, FactKey, MentalState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("{owner} is not responsible for {event}; only the owner's own acts can be evaluated")]
    NotOwnAct { owner: String, event: String },
    #[error(transparent)]
    Folk(#[from] FolkError),
}

/// An emotion the owner attributes to someone else, with the owner's
/// certainty about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicted {
    pub emotion: EmotionInstance,
    pub certainty: Unit,
}

impl Predicted {
    pub fn belief(&self, owner: &AgentId) -> Formula {
        Formula::bel(owner, self.certainty, self.emotion.to_formula())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Simulation {
    pub predicted: Vec<Predicted>,
    pub firings: Vec<Firing>,
}

/// Predicted effect of one of the owner's acts on the other agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Impact {
    /// `emotions + penalty + offset`.
    pub score: f64,
    /// Signed sum of predicted emotion intensities.
    pub emotions: f64,
    /// Minus the intensity of each ideal of the other that the act
    /// violates.
    pub penalty: f64,
    /// Declared expectation offsets, signed by channel.
    pub offset: f64,
    pub predicted: Vec<EmotionInstance>,
}

/// Reuses the owner's rules and theory to reason as someone else.
#[derive(Debug, Clone, Copy)]
pub struct Projector<'a> {
    pub rules: &'a RuleSet,
    pub theory: &'a AppraisalTheory,
    pub thresholds: Thresholds,
    pub mode: IntensityMode,
    pub cap: usize,
}

fn support_of(used: &[FactKey], support: &BTreeMap<FactKey, f64>) -> f64 {
    used.iter()
        .map(|k| support.get(k).copied().unwrap_or(1.0))
        .fold(1.0, f64::min)
}

impl<'a> Projector<'a> {
    fn stage(&self, s: Stage) -> Vec<&'a Rule> {
        self.rules.in_stage(s).collect()
    }

    fn ctx<'o>(&self, owner: &'o AgentId) -> EvalCtx<'o> {
        EvalCtx {
            owner: Some(owner),
            thresholds: self.thresholds,
            mode: self.mode,
        }
    }

    /// Runs a stage over `view`. Next-tick effects are dropped unless
    /// `collapse`, in which case they apply right away.
    fn run(
        &self,
        view: &mut MentalState,
        stage: Stage,
        observed: &[Event],
        mem: &mut TickMemory,
        support: &mut BTreeMap<FactKey, f64>,
        collapse: bool,
    ) -> Result<Vec<Firing>, FolkError> {
        let rules = self.stage(stage);
        let mut queue: Vec<Pending> = Vec::new();
        let mut emitted = Vec::new();
        let mut sink = Sink {
            queue: &mut queue,
            emitted: &mut emitted,
        };
        let firings = run_rules(view, &rules, observed, self.thresholds, self.mode, 0, mem, &mut sink)?;
        for f in &firings {
            let s = support_of(&f.used, support);
            for (p, t) in &f.produced {
                let Produced::Fact(x) = p else { continue };
                if *t == Timing::Next && collapse {
                    // a conflicting intention is simply not adopted
                    let _ = apply_fact(view, x, 0);
                }
                if let Some(k) = view.key_of(x) {
                    support.entry(k).or_insert(s);
                }
            }
        }
        Ok(firings)
    }

    fn appraise_view(
        &self,
        view: &mut MentalState,
        observed: &[Event],
        support: &BTreeMap<FactKey, f64>,
    ) -> Result<(Appraisal, Vec<Predicted>), FolkError> {
        view.set_goals(view.compute_goals(&self.thresholds));
        let who = view.owner().clone();
        let m = Matcher::new(view, observed, self.ctx(&who));
        let a = appraise(view, self.theory, &m, 0)?;
        let mut cert: BTreeMap<Formula, f64> = BTreeMap::new();
        for f in &a.firings {
            let s = support_of(&f.used, support);
            for (p, _) in &f.produced {
                if let Produced::Fact(x) = p {
                    let e = cert.entry(x.clone()).or_insert(s);
                    *e = e.min(s);
                }
            }
        }
        let predicted = a
            .emotions
            .iter()
            .filter_map(|e| {
                let l = cert.get(&e.to_formula()).copied().unwrap_or(1.0);
                Unit::new(l).ok().map(|certainty| Predicted {
                    emotion: e.clone(),
                    certainty,
                })
            })
            .collect();
        Ok((a, predicted))
    }

    /// What the owner expects `other` to feel now, after the events of
    /// `observed` that `other` witnessed. Does not touch `state`.
    pub fn simulate_other(
        &self,
        state: &MentalState,
        other: &AgentId,
        observed: &[Event],
    ) -> Result<Simulation, FolkError> {
        let (mut view, mut support) = state.attributed_view_with_support(other, &self.thresholds);
        if view.is_empty() {
            return Ok(Simulation::default());
        }
        let mut seen = Vec::new();
        for e in observed {
            if is_witness(other, e)? {
                for f in witness_beliefs(&view, e)? {
                    let _ = view.assert_fact(&f);
                }
                seen.push(e.clone());
            }
        }
        let mut mem = TickMemory::new(self.cap);
        let mut firings = self.run(&mut view, Stage::SpeechActs, &seen, &mut mem, &mut support, true)?;
        firings.extend(self.run(&mut view, Stage::UpdateBeliefsWithNewSoa, &seen, &mut mem, &mut support, false)?);
        let (a, predicted) = self.appraise_view(&mut view, &seen, &support)?;
        firings.extend(a.firings);
        Ok(Simulation { predicted, firings })
    }

    /// Replaces the owner's beliefs about `other`'s emotions with fresh
    /// predictions. Returns the simulation that produced them.
    pub fn refresh_predictions(
        &self,
        state: &mut MentalState,
        other: &AgentId,
        observed: &[Event],
    ) -> Result<Simulation, FolkError> {
        let stale: Vec<Formula> = state
            .belief_views()
            .into_iter()
            .filter_map(|(f, _)| match &f {
                Formula::Emo { holder, .. } if holder == other => Some(f.clone()),
                _ => None,
            })
            .collect();
        for f in &stale {
            state.retract_belief(f);
        }
        let sim = self.simulate_other(state, other, observed)?;
        for p in &sim.predicted {
            state.assert_belief(&p.emotion.to_formula(), p.certainty);
        }
        Ok(sim)
    }

    /// Scores `candidate`, an act of the owner, by the reaction it is
    /// predicted to cause in `other`.
    pub fn predict_impact(
        &self,
        state: &MentalState,
        other: &AgentId,
        candidate: &Event,
        offsets: &[(Channel, f64)],
    ) -> Result<Impact, ProjectionError> {
        let owner = state.owner();
        if !is_responsible(owner, candidate).map_err(FolkError::from)? {
            return Err(ProjectionError::NotOwnAct {
                owner: owner.to_string(),
                event: candidate.to_string(),
            });
        }
        let (mut view, mut support) = state.attributed_view_with_support(other, &self.thresholds);
        let observed: Vec<Event> = if is_witness(other, candidate).map_err(FolkError::from)? {
            for f in witness_beliefs(&view, candidate)? {
                let _ = view.assert_fact(&f);
            }
            vec![candidate.clone()]
        } else {
            Vec::new()
        };
        let mut mem = TickMemory::new(self.cap);
        self.run(&mut view, Stage::SpeechActs, &observed, &mut mem, &mut support, true)?;
        self.run(&mut view, Stage::UpdateBeliefsWithNewSoa, &observed, &mut mem, &mut support, false)?;
        let (a, _) = self.appraise_view(&mut view, &observed, &support)?;

        let emotions: f64 = self.theory.signed_sum(&a.emotions);
        let mut penalty = 0.0;
        let beliefs = view.belief_views();
        for (body, k) in view.attitudes() {
            let Formula::Globally(phi) = body else { continue };
            if !gt(k.value(), 0.0) {
                continue;
            }
            let violation = negate((**phi).clone());
            let worst = beliefs
                .iter()
                .filter(|(f, l)| gt(l.value(), self.thresholds.mod_th) && unifies(f, &violation))
                .map(|(_, l)| l.value())
                .fold(None, |m: Option<f64>, l| Some(m.map_or(l, |m| m.max(l))));
            if let Some(l) = worst {
                penalty -= intensity(l, k.value(), &[], self.mode).unwrap_or(0.0);
            }
        }
        let offset: f64 = offsets.iter().map(|(c, v)| c.sign() * v).sum();
        let q = crate::degree::quantize;
        Ok(Impact {
            score: q(emotions + penalty + offset),
            emotions: q(emotions),
            penalty: q(penalty),
            offset: q(offset),
            predicted: a.emotions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folk::default_rules;
    use crate::logic::EmotionKind;
    use crate::syntax::parse_formula;

    fn ag(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn state(owner: &str, facts: &[&str]) -> MentalState {
        let mut s = MentalState::new(ag(owner));
        for f in facts {
            s.assert_fact(&parse_formula(f).unwrap()).unwrap();
        }
        s
    }

    fn with<T>(f: impl FnOnce(&Projector<'_>) -> T) -> T {
        let rules = default_rules();
        let theory = AppraisalTheory::default();
        let p = Projector {
            rules: &rules,
            theory: &theory,
            thresholds: Thresholds::default(),
            mode: IntensityMode::Normalized,
            cap: crate::folk::DEFAULT_CAP,
        };
        f(&p)
    }

    fn event(s: &str) -> Event {
        match parse_formula(s).unwrap() {
            Formula::Event(e) => e,
            _ => panic!("not an event"),
        }
    }

    #[test]
    fn empty_view_predicts_nothing() {
        let s = state("M", &["Bel(M,1,p)"]);
        assert!(with(|p| p.simulate_other(&s, &ag("J"), &[])).unwrap().predicted.is_empty());
    }

    #[test]
    fn attributed_joy_matches_first_person() {
        let s = state("M", &["Bel(M,0.9,Bel(J,0.9,g))", "Bel(M,0.8,Att(J,0.7,g))"]);
        let sim = with(|p| p.simulate_other(&s, &ag("J"), &[])).unwrap();
        assert_eq!(sim.predicted.len(), 1);
        let got = &sim.predicted[0];
        assert_eq!(got.emotion.kind, EmotionKind::Joy);
        assert_eq!(got.emotion.holder, ag("J"));
        assert_eq!(got.certainty.value(), 0.8);

        let direct = state("J", &["Bel(J,0.9,g)", "Att(J,0.7,g)"]);
        let th = Thresholds::default();
        let me = ag("J");
        let m = Matcher::new(&direct, &[], EvalCtx::new(&me, th));
        let a = with(|p| appraise(&direct, p.theory, &m, 0)).unwrap();
        assert_eq!(a.emotions[0].intensity, got.emotion.intensity);
    }

    #[test]
    fn refresh_replaces_old_predictions_and_keeps_sources() {
        let mut s = state("M", &["Bel(M,0.9,Bel(J,0.9,g))", "Bel(M,0.8,Att(J,0.7,g))"]);
        let before = s.attributed_view(&ag("J"), &Thresholds::default());
        with(|p| p.refresh_predictions(&mut s, &ag("J"), &[])).unwrap();
        with(|p| p.refresh_predictions(&mut s, &ag("J"), &[])).unwrap();
        let emo: Vec<_> = s
            .belief_views()
            .into_iter()
            .filter(|(f, _)| matches!(f, Formula::Emo { .. }))
            .collect();
        assert_eq!(emo.len(), 1);
        assert_eq!(s.attributed_view(&ag("J"), &Thresholds::default()), before);
    }

    #[test]
    fn taboo_act_is_penalized_without_emotions() {
        let s = state("M", &["Bel(M,0.94,Ideal(J,0.8,!<-,J,dad>))"]);
        let imp = with(|p| p.predict_impact(&s, &ag("J"), &event("<M,J,dad>"), &[])).unwrap();
        assert!(imp.predicted.is_empty());
        assert!(imp.penalty < -0.5, "{imp:?}");
        let safe = with(|p| p.predict_impact(&s, &ag("J"), &event("<M,J,visiting_ht>"), &[])).unwrap();
        assert_eq!(safe.score, 0.0);
    }

    #[test]
    fn offsets_only() {
        let s = state("R", &[]);
        let imp = with(|p| {
            p.predict_impact(&s, &ag("C"), &event("<R,C,ask>"), &[(Channel::Embarrassed, 0.4)])
        })
        .unwrap();
        assert_eq!(imp.score, -0.4);
        let again = with(|p| {
            p.predict_impact(&s, &ag("C"), &event("<R,C,ask>"), &[(Channel::Embarrassed, 0.4)])
        })
        .unwrap();
        assert_eq!(imp, again);
    }

    #[test]
    fn someone_elses_act_is_rejected() {
        let s = state("R", &[]);
        let err = with(|p| p.predict_impact(&s, &ag("C"), &event("<C,R,ask>"), &[])).unwrap_err();
        assert!(matches!(err, ProjectionError::NotOwnAct { .. }));
    }

    #[test]
    fn ranking_follows_attributed_attitude() {
        // C believes the recruiter's assertion; whether that pleases C
        // depends on C's attitude toward its content.
        let base = [
            "Bel(R,0.9,Like(C,R,0.6))",
            "Bel(R,0.9,Dom(C,R,0.6))",
        ];
        let rank = |k: &str| {
            let mut facts = base.to_vec();
            let att = format!("Bel(R,0.9,Att(C,{k},good_fit))");
            facts.push(&att);
            let s = state("R", &facts);
            let a = with(|p| p.predict_impact(&s, &ag("C"), &event("<R,C,Assert(good_fit)>"), &[])).unwrap();
            let b = with(|p| p.predict_impact(&s, &ag("C"), &event("<R,C,small_talk>"), &[])).unwrap();
            a.score > b.score
        };
        assert!(rank("0.8"));
        assert!(!rank("-0.8"));
    }
}
