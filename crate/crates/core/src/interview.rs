//! Job-interview layer: affect channels, the candidate assessment, turning
//! affect readings into beliefs, and question selection per recruiter
//! profile.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combine::avg;
use crate::degree::{self, Unit};
use crate::exec::Exec;
use crate::logic::Formula;
use crate::scenario::{AffectGoal, Placement, ProfileId, QuestionDecl, ScenarioDoc, TopicDecl};

/// The eight affect sliders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Relieved,
    Embarrassed,
    Hesitating,
    Stressed,
    IllAtEase,
    Focused,
    Aggressive,
    Bored,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::Relieved,
        Channel::Embarrassed,
        Channel::Hesitating,
        Channel::Stressed,
        Channel::IllAtEase,
        Channel::Focused,
        Channel::Aggressive,
        Channel::Bored,
    ];

    /// Three-letter code used in scenario files.
    pub fn code(self) -> &'static str {
        match self {
            Channel::Relieved => "REL",
            Channel::Embarrassed => "EMB",
            Channel::Hesitating => "HES",
            Channel::Stressed => "STR",
            Channel::IllAtEase => "IAE",
            Channel::Focused => "FOC",
            Channel::Aggressive => "AGG",
            Channel::Bored => "BOR",
        }
    }

    /// Field name on the wire.
    pub fn name(self) -> &'static str {
        match self {
            Channel::Relieved => "relieved",
            Channel::Embarrassed => "embarrassed",
            Channel::Hesitating => "hesitating",
            Channel::Stressed => "stressed",
            Channel::IllAtEase => "ill_at_ease",
            Channel::Focused => "focused",
            Channel::Aggressive => "aggressive",
            Channel::Bored => "bored",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == s)
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// +1 for the comfortable channels (relieved, focused), -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Channel::Relieved | Channel::Focused => 1.0,
            _ => -1.0,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    SelfConfidence,
    Motivation,
    Qualification,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::SelfConfidence,
        Dimension::Motivation,
        Dimension::Qualification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dimension::SelfConfidence => "self_confidence",
            Dimension::Motivation => "motivation",
            Dimension::Qualification => "qualification",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s)
    }
}

/// A problem with one field of an affect vector.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {problem}")]
pub struct FieldError {
    pub field: String,
    pub problem: String,
}

/// One reading of the eight sliders, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AffectVector([f64; 8]);

impl AffectVector {
    pub fn get(&self, c: Channel) -> f64 {
        self.0[c.index()]
    }

    pub fn with(mut self, c: Channel, v: f64) -> Result<Self, FieldError> {
        if !(0.0..=1.0).contains(&v) {
            return Err(FieldError {
                field: c.name().into(),
                problem: format!("{v} is outside [0, 1]"),
            });
        }
        self.0[c.index()] = v;
        Ok(self)
    }

    /// Builds a vector from named values. `None` stands for a value that is
    /// present but not a number. Reports every bad field.
    pub fn from_fields<'a, I>(fields: I) -> Result<Self, Vec<FieldError>>
    where
        I: IntoIterator<Item = (&'a str, Option<f64>)>,
    {
        let mut seen: BTreeMap<Channel, f64> = BTreeMap::new();
        let mut errs = Vec::new();
        for (name, v) in fields {
            let Some(c) = Channel::from_name(name) else {
                errs.push(FieldError {
                    field: name.into(),
                    problem: "unknown affect channel".into(),
                });
                continue;
            };
            match v {
                Some(x) if (0.0..=1.0).contains(&x) => {
                    seen.insert(c, x);
                }
                Some(x) => errs.push(FieldError {
                    field: name.into(),
                    problem: format!("{x} is outside [0, 1]"),
                }),
                None => errs.push(FieldError {
                    field: name.into(),
                    problem: "expected a number".into(),
                }),
            }
        }
        for c in Channel::ALL {
            if !seen.contains_key(&c) && !errs.iter().any(|e| e.field == c.name()) {
                errs.push(FieldError {
                    field: c.name().into(),
                    problem: "missing".into(),
                });
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let mut out = AffectVector::default();
        for (c, v) in seen {
            out.0[c.index()] = v;
        }
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Channel, f64)> + '_ {
        Channel::ALL.into_iter().map(|c| (c, self.get(c)))
    }
}

impl Serialize for AffectVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(8))?;
        for (c, v) in self.iter() {
            m.serialize_entry(c.name(), &v)?;
        }
        m.end()
    }
}

/// The recruiter's running estimate of the candidate, each in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Assessment {
    pub self_confidence: f64,
    pub motivation: f64,
    pub qualification: f64,
}

impl Assessment {
    pub fn get(&self, d: Dimension) -> f64 {
        match d {
            Dimension::SelfConfidence => self.self_confidence,
            Dimension::Motivation => self.motivation,
            Dimension::Qualification => self.qualification,
        }
    }

    fn slot(&mut self, d: Dimension) -> &mut f64 {
        match d {
            Dimension::SelfConfidence => &mut self.self_confidence,
            Dimension::Motivation => &mut self.motivation,
            Dimension::Qualification => &mut self.qualification,
        }
    }
}

/// Adds every delta, then clamps each dimension to `[-1, 1]`. Deltas within
/// one call commute.
pub fn update_assessment(a: Assessment, deltas: &[(Dimension, f64)]) -> Assessment {
    let mut out = a;
    for &(d, x) in deltas {
        *out.slot(d) += x;
    }
    for d in Dimension::ALL {
        let v = out.slot(d);
        *v = degree::quantize(v.clamp(-1.0, 1.0));
    }
    out
}

/// What one affect reading means for the current topic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interpretation {
    pub deltas: Vec<(Dimension, f64)>,
    /// Beliefs about the candidate, with their degree.
    pub beliefs: Vec<(Formula, Unit)>,
}

/// Applies the topic's interpretation rules. A rule fires when its channel
/// is strictly above the threshold; the delta is `coefficient · value` and
/// any belief gets degree `avg(value)`.
pub fn interpret_affects(topic: &TopicDecl, a: &AffectVector) -> Interpretation {
    let mut out = Interpretation::default();
    for rule in &topic.interpretations {
        let v = a.get(rule.channel);
        if !degree::gt(v, rule.above) {
            continue;
        }
        out.deltas
            .push((rule.dimension, degree::quantize(rule.coefficient * v)));
        if let Some(f) = &rule.believe {
            let l = Unit::new(avg(&[v])).expect("avg of a unit value is a unit value");
            out.beliefs.push((f.clone(), l));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterviewError {
    #[error("interview complete")]
    Complete,
    #[error("scenario declares no topics")]
    NoTopics,
    #[error("scoring failed: {0}")]
    Scoring(String),
}

/// Indices of topics that may be asked next. A `first` topic blocks all
/// others until asked; a `last` topic waits until it is the only one left.
pub fn eligible_topics(topics: &[TopicDecl], asked: &[bool]) -> Vec<usize> {
    let open: Vec<usize> = (0..topics.len()).filter(|&i| !asked[i]).collect();
    if let Some(&f) = open.iter().find(|&&i| topics[i].placement == Placement::First) {
        return vec![f];
    }
    let free: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&i| topics[i].placement != Placement::Last)
        .collect();
    if free.is_empty() {
        open
    } else {
        free
    }
}

/// The affective reaction a profile aims for: A positive, C negative, B
/// none, unless the scenario says otherwise.
pub fn profile_goal(doc: &ScenarioDoc, id: ProfileId) -> Option<AffectGoal> {
    match (id, doc.profile(id).and_then(|p| p.seek)) {
        (ProfileId::B, _) => None,
        (_, Some(g)) => Some(g),
        (ProfileId::A, None) => Some(AffectGoal::Positive),
        (ProfileId::C, None) => Some(AffectGoal::Negative),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub topic: usize,
    pub question: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub topic: usize,
    pub question: usize,
    /// Every candidate scored, in declared order. Empty for profile B.
    pub scores: Vec<Scored>,
}

impl Selection {
    pub fn question<'a>(&self, topics: &'a [TopicDecl]) -> &'a QuestionDecl {
        &topics[self.topic].questions[self.question]
    }
}

/// Picks the next question. Without an affective goal, the first eligible
/// topic is asked with its `neutral` variant (or its first question).
/// Otherwise every question of every eligible topic is scored by `score`
/// and the best for the goal wins; ties go to declared order.
pub fn select_question<F>(
    topics: &[TopicDecl],
    asked: &[bool],
    goal: Option<AffectGoal>,
    exec: Exec,
    score: F,
) -> Result<Selection, InterviewError>
where
    F: Fn(&QuestionDecl) -> Result<f64, String> + Sync + Send,
{
    if topics.is_empty() {
        return Err(InterviewError::NoTopics);
    }
    let open = eligible_topics(topics, asked);
    let Some(&first) = open.first() else {
        return Err(InterviewError::Complete);
    };
    let Some(goal) = goal else {
        let q = topics[first]
            .questions
            .iter()
            .position(|q| q.variant == "neutral")
            .unwrap_or(0);
        return Ok(Selection {
            topic: first,
            question: q,
            scores: Vec::new(),
        });
    };
    let cands: Vec<(usize, usize)> = open
        .iter()
        .flat_map(|&t| (0..topics[t].questions.len()).map(move |q| (t, q)))
        .collect();
    let results = exec.map(&cands, |&(t, q)| score(&topics[t].questions[q]));
    let mut scores = Vec::with_capacity(cands.len());
    for (&(topic, question), r) in cands.iter().zip(results) {
        scores.push(Scored {
            topic,
            question,
            score: r.map_err(InterviewError::Scoring)?,
        });
    }
    let mut best = &scores[0];
    for s in &scores[1..] {
        let better = match goal {
            AffectGoal::Positive => degree::gt(s.score, best.score),
            AffectGoal::Negative => degree::lt(s.score, best.score),
        };
        if better {
            best = s;
        }
    }
    Ok(Selection {
        topic: best.topic,
        question: best.question,
        scores: scores.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{AgentId, Event};
    use crate::scenario::Interpretation as Rule;
    use proptest::prelude::*;

    fn topic(id: &str, placement: Placement, variants: &[&str]) -> TopicDecl {
        let r = AgentId::new("R").unwrap();
        let c = AgentId::new("C").unwrap();
        TopicDecl {
            id: id.into(),
            placement,
            questions: variants
                .iter()
                .map(|v| QuestionDecl {
                    variant: (*v).into(),
                    utterance: format!("{id} {v}"),
                    event: Event::physical(&r, Some(&c), &format!("ask_{id}_{v}")),
                    expect: Vec::new(),
                })
                .collect(),
            interpretations: Vec::new(),
        }
    }

    #[test]
    fn channel_codes_and_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(Channel::from_code(c.code()), Some(c));
            assert_eq!(Channel::from_name(c.name()), Some(c));
        }
        assert_eq!(Channel::Focused.sign(), 1.0);
        assert_eq!(Channel::Bored.sign(), -1.0);
    }

    #[test]
    fn affect_vector_reports_field_names() {
        let errs = AffectVector::from_fields([("relieved", Some(0.2)), ("stressed", Some(1.5))])
            .unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert!(fields.contains(&"stressed"));
        assert!(fields.contains(&"bored"));
        assert!(!fields.contains(&"relieved"));
        let ok = AffectVector::from_fields(Channel::ALL.map(|c| (c.name(), Some(0.5)))).unwrap();
        assert_eq!(ok.get(Channel::IllAtEase), 0.5);
    }

    #[test]
    fn assessment_add_then_clamp() {
        let a = update_assessment(
            Assessment::default(),
            &[(Dimension::SelfConfidence, 0.2), (Dimension::Qualification, -0.1)],
        );
        assert_eq!((a.self_confidence, a.motivation, a.qualification), (0.2, 0.0, -0.1));
        let a = Assessment {
            self_confidence: 0.95,
            ..Default::default()
        };
        assert_eq!(update_assessment(a, &[(Dimension::SelfConfidence, 0.2)]).self_confidence, 1.0);
    }

    #[test]
    fn interpretation_rules() {
        let mut t = topic("job_description", Placement::Free, &["neutral"]);
        t.interpretations.push(Rule {
            channel: Channel::Hesitating,
            above: 0.5,
            dimension: Dimension::Qualification,
            coefficient: -0.2,
            believe: Some(Formula::not(Formula::atom("candidate_is_qualified"))),
        });
        let a = AffectVector::default().with(Channel::Hesitating, 0.8).unwrap();
        let i = interpret_affects(&t, &a);
        assert_eq!(i.deltas, vec![(Dimension::Qualification, -0.16)]);
        assert_eq!(i.beliefs[0].1.value(), 0.9);
        assert_eq!(interpret_affects(&t, &AffectVector::default()), Interpretation::default());
        // strictly above the threshold
        let a = AffectVector::default().with(Channel::Hesitating, 0.5).unwrap();
        assert!(interpret_affects(&t, &a).deltas.is_empty());
    }

    #[test]
    fn placement_rules() {
        let ts = vec![
            topic("greeting", Placement::First, &["neutral"]),
            topic("salary", Placement::Free, &["neutral"]),
            topic("closing", Placement::Last, &["neutral"]),
            topic("experience", Placement::Free, &["neutral"]),
        ];
        assert_eq!(eligible_topics(&ts, &[false; 4]), vec![0]);
        assert_eq!(eligible_topics(&ts, &[true, false, false, false]), vec![1, 3]);
        assert_eq!(eligible_topics(&ts, &[true, true, false, true]), vec![2]);
        assert!(eligible_topics(&ts, &[true; 4]).is_empty());
    }

    #[test]
    fn neutral_profile_follows_declared_order() {
        let ts = vec![
            topic("salary", Placement::Free, &["at_ease", "neutral"]),
            topic("experience", Placement::Free, &["neutral"]),
        ];
        let s = select_question(&ts, &[false, false], None, Exec::Sequential, |_| {
            Err("never scored".into())
        })
        .unwrap();
        assert_eq!((s.topic, s.question), (0, 1));
        let err = select_question(&ts, &[true, true], None, Exec::Sequential, |_| Ok(0.0)).unwrap_err();
        assert_eq!(err.to_string(), "interview complete");
    }

    #[test]
    fn goal_profiles_pick_extremes_ties_by_order() {
        let ts = vec![
            topic("a", Placement::Free, &["x", "y"]),
            topic("b", Placement::Free, &["z"]),
        ];
        let score = |q: &QuestionDecl| {
            Ok(match q.variant.as_str() {
                "x" => 0.3,
                "y" => -0.4,
                _ => 0.3,
            })
        };
        let up = select_question(&ts, &[false, false], Some(AffectGoal::Positive), Exec::Parallel, score).unwrap();
        assert_eq!((up.topic, up.question), (0, 0));
        assert_eq!(up.scores.len(), 3);
        let down = select_question(&ts, &[false, false], Some(AffectGoal::Negative), Exec::Sequential, score).unwrap();
        assert_eq!((down.topic, down.question), (0, 1));
    }

    fn dim() -> impl Strategy<Value = Dimension> {
        prop::sample::select(Dimension::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn assessment_stays_in_range_and_deltas_commute(
            deltas in prop::collection::vec((dim(), -1.0f64..=1.0), 0..8),
            start in (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0),
        ) {
            let a = Assessment { self_confidence: start.0, motivation: start.1, qualification: start.2 };
            let fwd = update_assessment(a, &deltas);
            let mut rev = deltas.clone();
            rev.reverse();
            let back = update_assessment(a, &rev);
            for d in Dimension::ALL {
                prop_assert!((-1.0..=1.0).contains(&fwd.get(d)));
                prop_assert!((fwd.get(d) - back.get(d)).abs() < 1e-9);
            }
        }
    }
}
