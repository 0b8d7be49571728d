//! One interview between the recruiter agent and a human candidate.
//!
//! Each turn runs: interpret the candidate's affects for the current topic,
//! update the assessment, assert the resulting beliefs, tick the recruiter's
//! engine with the question and the answer, then pick the next question.

use serde::Serialize;
use thiserror::Error;

use crate::appraisal::AppraisalTheory;
use crate::degree::quantize;
use crate::engine::{Engine, EngineError, EngineOptions, FiringRecord, Trace};
use crate::exec::Exec;
use crate::interview::{
    interpret_affects, profile_goal, select_question, update_assessment, AffectVector, Assessment, Channel,
    InterviewError, Selection,
};
use crate::logic::{AgentId, Event, Formula};
use crate::scenario::{AffectGoal, ProfileId, Roles, ScenarioDoc};

/// The shipped six-topic interview.
pub const INTERVIEW_SCENARIO: &str = include_str!("../fixtures/interview.tom");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("scenario declares no interviewer and candidate")]
    NoRoles,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Interview(#[from] InterviewError),
}

/// What the recruiter believes the candidate feels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedEmotion {
    pub kind: String,
    pub intensity: f64,
    pub certainty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Recruiter,
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub speaker: Speaker,
    pub topic: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affects: Option<AffectVector>,
    /// Assessment right after this answer was interpreted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assessment: Option<Assessment>,
}

/// The payload returned for each turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnResponse {
    /// The next question, absent once the interview is over.
    pub utterance: Option<String>,
    pub topic: Option<String>,
    pub recruiter_valence: f64,
    pub assessment: Assessment,
    pub predicted_user_emotions: Vec<PredictedEmotion>,
    pub interview_done: bool,
}

#[derive(Debug, Clone)]
pub struct Session {
    doc: ScenarioDoc,
    profile: ProfileId,
    goal: Option<AffectGoal>,
    roles: Roles,
    engine: Engine,
    exec: Exec,
    asked: Vec<bool>,
    current: Option<Selection>,
    assessment: Assessment,
    valence: f64,
    predicted: Vec<PredictedEmotion>,
    transcript: Vec<TranscriptEntry>,
    records: Vec<FiringRecord>,
}

impl Session {
    /// Starts an interview and selects the first question.
    pub fn new(
        doc: &ScenarioDoc,
        profile: ProfileId,
        theory: AppraisalTheory,
        opts: EngineOptions,
        exec: Exec,
    ) -> Result<Self, SessionError> {
        let roles = doc.roles.clone().ok_or(SessionError::NoRoles)?;
        let engine = Engine::for_agent(doc, &roles.interviewer, theory, opts)?;
        let mut s = Session {
            doc: doc.clone(),
            profile,
            goal: profile_goal(doc, profile),
            roles,
            engine,
            exec,
            asked: vec![false; doc.topics.len()],
            current: None,
            assessment: Assessment::default(),
            valence: 0.0,
            predicted: Vec::new(),
            transcript: Vec::new(),
            records: Vec::new(),
        };
        s.select_next()?;
        Ok(s)
    }

    pub fn profile(&self) -> ProfileId {
        self.profile
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn is_done(&self) -> bool {
        self.current.is_none()
    }

    pub fn assessment(&self) -> Assessment {
        self.assessment
    }

    pub fn valence(&self) -> f64 {
        self.valence
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Topic and variant of the pending question.
    pub fn current(&self) -> Option<(&str, &str)> {
        self.current.as_ref().map(|sel| {
            let t = &self.doc.topics[sel.topic];
            (t.id.as_str(), t.questions[sel.question].variant.as_str())
        })
    }

    pub fn utterance(&self) -> Option<&str> {
        self.current
            .as_ref()
            .map(|sel| sel.question(&self.doc.topics).utterance.as_str())
    }

    pub fn records(&self) -> &[FiringRecord] {
        &self.records
    }

    pub fn trace(&self) -> Trace {
        let mut header = self.engine.header();
        header.push(format!("profile {}", self.profile.name()));
        Trace {
            header,
            records: self.records.clone(),
        }
    }

    /// The current payload, as sent after the last turn.
    pub fn snapshot(&self) -> TurnResponse {
        TurnResponse {
            utterance: self.utterance().map(str::to_string),
            topic: self.current().map(|(t, _)| t.to_string()),
            recruiter_valence: self.valence,
            assessment: self.assessment,
            predicted_user_emotions: self.predicted.clone(),
            interview_done: self.is_done(),
        }
    }

    fn record(&self, stage: &str, rule: &str, bindings: String, effect: String, degree: Option<f64>) -> FiringRecord {
        FiringRecord {
            tick: self.engine.current_tick(),
            stage: stage.to_string(),
            rule: rule.to_string(),
            bindings,
            effect,
            degree,
        }
    }

    fn select_next(&mut self) -> Result<(), SessionError> {
        let topics = &self.doc.topics;
        if topics.iter().zip(&self.asked).all(|(_, a)| *a) && !topics.is_empty() {
            self.current = None;
            return Ok(());
        }
        let proj = self.engine.projector();
        let state = &self.engine.state;
        let other = &self.roles.candidate;
        let sel = select_question(topics, &self.asked, self.goal, self.exec, |q| {
            proj.predict_impact(state, other, &q.event, &q.expect)
                .map(|i| i.score)
                .map_err(|e| e.to_string())
        })?;
        let mut recs = Vec::with_capacity(sel.scores.len() + 1);
        for s in &sel.scores {
            let q = &topics[s.topic].questions[s.question];
            recs.push(self.record(
                "select",
                "predict_impact",
                format!("?topic={} ?variant={}", topics[s.topic].id, q.variant),
                Formula::Event(q.event.clone()).to_string(),
                Some(s.score),
            ));
        }
        let q = sel.question(topics);
        recs.push(self.record(
            "select",
            "select_question",
            format!("?profile={} ?topic={} ?variant={}", self.profile.name(), topics[sel.topic].id, q.variant),
            Formula::Event(q.event.clone()).to_string(),
            None,
        ));
        self.transcript.push(TranscriptEntry {
            speaker: Speaker::Recruiter,
            topic: topics[sel.topic].id.clone(),
            text: q.utterance.clone(),
            variant: Some(q.variant.clone()),
            affects: None,
            assessment: None,
        });
        self.asked[sel.topic] = true;
        self.records.extend(recs);
        self.current = Some(sel);
        Ok(())
    }

    /// Processes one candidate answer. `answer_text` is kept in the
    /// transcript only.
    pub fn turn(&mut self, answer_text: &str, affects: &AffectVector) -> Result<TurnResponse, SessionError> {
        let sel = self.current.clone().ok_or(InterviewError::Complete)?;
        let topic = self.doc.topics[sel.topic].clone();
        let question = topic.questions[sel.question].event.clone();

        let interp = interpret_affects(&topic, affects);
        self.assessment = update_assessment(self.assessment, &interp.deltas);
        let mut recs = Vec::new();
        for (d, v) in &interp.deltas {
            recs.push(self.record(
                "interpret",
                "interpret_affects",
                format!("?topic={}", topic.id),
                format!("{} {:+}", d.name(), v),
                Some(*v),
            ));
        }
        let owner = self.engine.owner().clone();
        for (f, l) in &interp.beliefs {
            self.engine.state.assert_belief(f, *l);
            recs.push(self.record(
                "interpret",
                "interpret_belief",
                format!("?topic={}", topic.id),
                Formula::bel(&owner, *l, f.clone()).to_string(),
                Some(l.value()),
            ));
        }
        self.records.extend(recs);
        self.transcript.push(TranscriptEntry {
            speaker: Speaker::Candidate,
            topic: topic.id.clone(),
            text: answer_text.to_string(),
            variant: None,
            affects: Some(*affects),
            assessment: Some(self.assessment),
        });

        let answer = answer_event(&self.roles.candidate, &self.roles.interviewer, &topic.id);
        let report = self.engine.tick(&[question, answer])?;
        self.records.extend(report.records);

        let theory = self.engine.theory();
        self.valence = quantize(theory.signed_sum(self.engine.state.emotions()).clamp(-1.0, 1.0));
        self.predicted = predicted_emotions(&self.engine, &self.roles.candidate);
        self.select_next()?;
        Ok(self.snapshot())
    }
}

/// Parses an affect stream: one answer per line, `CODE=value` pairs
/// separated by spaces, unlisted channels at 0, `#` comments.
pub fn parse_affect_script(text: &str) -> Result<Vec<AffectVector>, Vec<String>> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut v = AffectVector::default();
        for tok in line.split_whitespace() {
            let parsed = tok.split_once('=').and_then(|(c, x)| {
                Some((Channel::from_code(c)?, x.parse::<f64>().ok()?))
            });
            match parsed {
                Some((c, x)) => match v.with(c, x) {
                    Ok(nv) => v = nv,
                    Err(e) => errs.push(format!("line {}: {}: {}", n + 1, e.field, e.problem)),
                },
                None => errs.push(format!("line {}: expected CODE=value, found `{tok}`", n + 1)),
            }
        }
        out.push(v);
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Runs a whole interview, answering the i-th question with the i-th
/// vector (all zeros once the stream runs out).
pub fn run_interview(
    doc: &ScenarioDoc,
    profile: ProfileId,
    answers: &[AffectVector],
    theory: AppraisalTheory,
    opts: EngineOptions,
    exec: Exec,
) -> Result<Session, SessionError> {
    let mut s = Session::new(doc, profile, theory, opts, exec)?;
    let mut i = 0;
    while !s.is_done() {
        let a = answers.get(i).copied().unwrap_or_default();
        s.turn("", &a)?;
        i += 1;
    }
    Ok(s)
}

/// The candidate's answer as the recruiter perceives it.
pub fn answer_event(candidate: &AgentId, interviewer: &AgentId, topic: &str) -> Event {
    Event::physical(candidate, Some(interviewer), &format!("answer_{topic}"))
}

fn predicted_emotions(engine: &Engine, other: &AgentId) -> Vec<PredictedEmotion> {
    let mut out: Vec<PredictedEmotion> = engine
        .state
        .belief_views()
        .into_iter()
        .filter_map(|(f, l)| match f {
            Formula::Emo {
                kind, holder, intensity, ..
            } if &holder == other => Some(PredictedEmotion {
                kind: kind.name().to_string(),
                intensity: intensity.value(),
                certainty: l.value(),
            }),
            _ => None,
        })
        .collect();
    out.sort_by(|a, b| a.kind.cmp(&b.kind).then(b.intensity.total_cmp(&a.intensity)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_scenario;

    const SCENARIO: &str = INTERVIEW_SCENARIO;

    fn session(p: ProfileId) -> Session {
        let doc = parse_scenario(SCENARIO).unwrap();
        Session::new(&doc, p, AppraisalTheory::default(), EngineOptions::default(), Exec::default()).unwrap()
    }

    fn zero() -> AffectVector {
        AffectVector::default()
    }

    #[test]
    fn every_topic_asked_once() {
        let mut s = session(ProfileId::A);
        let n = parse_scenario(SCENARIO).unwrap().topics.len();
        let mut turns = 0;
        while !s.is_done() {
            s.turn("ok", &zero()).unwrap();
            turns += 1;
        }
        assert_eq!(turns, n);
        let mut topics: Vec<_> = s
            .transcript()
            .iter()
            .filter(|e| e.speaker == Speaker::Recruiter)
            .map(|e| e.topic.clone())
            .collect();
        topics.sort();
        topics.dedup();
        assert_eq!(topics.len(), n);
        assert_eq!(s.turn("more", &zero()), Err(SessionError::Interview(InterviewError::Complete)));
    }

    #[test]
    fn profile_b_ignores_affects() {
        let run = |v: f64| {
            let mut s = session(ProfileId::B);
            let a = AffectVector::default().with(Channel::Embarrassed, v).unwrap();
            let mut asked = vec![s.current().map(|(t, q)| (t.to_string(), q.to_string()))];
            while !s.is_done() {
                s.turn("", &a).unwrap();
                asked.push(s.current().map(|(t, q)| (t.to_string(), q.to_string())));
            }
            asked
        };
        let calm = run(0.0);
        assert_eq!(calm, run(1.0));
        assert!(calm.iter().flatten().all(|(_, q)| q == "neutral"));
    }

    #[test]
    fn hesitation_on_job_description_lowers_qualification() {
        let mut s = session(ProfileId::B);
        while s.current().map(|(t, _)| t) != Some("job_description") {
            s.turn("", &zero()).unwrap();
        }
        let a = AffectVector::default().with(Channel::Hesitating, 0.8).unwrap();
        let r = s.turn("well...", &a).unwrap();
        assert!((r.assessment.qualification + 0.16).abs() < 1e-9, "{r:?}");
        assert!(s.records().iter().any(|x| x.rule == "interpret_belief"));
    }

    #[test]
    fn scoring_profiles_consult_predictions() {
        for p in [ProfileId::A, ProfileId::C] {
            let s = session(p);
            assert!(s.records().iter().any(|r| r.rule == "predict_impact"));
        }
        assert!(!session(ProfileId::B).records().iter().any(|r| r.rule == "predict_impact"));
    }

    #[test]
    fn affect_scripts() {
        let v = parse_affect_script("# c\nHES=0.8 FOC=0.1\n\nBOR=1\n").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].get(Channel::Hesitating), 0.8);
        assert_eq!(v[1].get(Channel::Bored), 1.0);
        let errs = parse_affect_script("HES=2\nXYZ=0.1 FOC\n").unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs[0].contains("hesitating"));
    }

    #[test]
    fn valence_is_bounded() {
        let mut s = session(ProfileId::C);
        let a = AffectVector::default().with(Channel::Relieved, 1.0).unwrap();
        while !s.is_done() {
            let r = s.turn("", &a).unwrap();
            assert!((-1.0..=1.0).contains(&r.recruiter_valence));
        }
    }
}
