//! Parsed scenario documents and event scripts.

use std::collections::BTreeMap;

use crate::degree::Signed;
use crate::interview::{Channel, Dimension};
use crate::logic::{AgentId, Event, Formula};
use crate::rules::{Rule, Thresholds};

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub from: AgentId,
    pub to: AgentId,
    pub like: Option<Signed>,
    pub dom: Option<Signed>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roles {
    pub interviewer: AgentId,
    pub candidate: AgentId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    #[default]
    Free,
    /// Must be asked before any other topic.
    First,
    /// Only eligible once every other topic has been asked.
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionDecl {
    pub variant: String,
    pub utterance: String,
    pub event: Event,
    pub expect: Vec<(Channel, f64)>,
}

/// `interpret HES > 0.5 => qualification -0.2 believe !candidate_is_qualified`
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    pub channel: Channel,
    pub above: f64,
    pub dimension: Dimension,
    pub coefficient: f64,
    pub believe: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicDecl {
    pub id: String,
    pub placement: Placement,
    pub questions: Vec<QuestionDecl>,
    pub interpretations: Vec<Interpretation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProfileId {
    A,
    B,
    C,
}

impl ProfileId {
    pub fn name(self) -> &'static str {
        match self {
            ProfileId::A => "A",
            ProfileId::B => "B",
            ProfileId::C => "C",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "A" => Some(ProfileId::A),
            "B" => Some(ProfileId::B),
            "C" => Some(ProfileId::C),
            _ => None,
        }
    }
}

/// The affective reaction a recruiter profile tries to elicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffectGoal {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileDecl {
    pub id: ProfileId,
    pub seek: Option<AffectGoal>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioDoc {
    pub name: Option<String>,
    pub agents: Vec<AgentId>,
    pub self_agent: Option<AgentId>,
    /// Minimum number of ticks for a scripted run.
    pub horizon: usize,
    pub thresholds: Option<Thresholds>,
    pub relations: Vec<Relation>,
    pub initial_facts: Vec<(AgentId, Formula)>,
    pub rules: Vec<Rule>,
    pub topics: Vec<TopicDecl>,
    pub profiles: Vec<ProfileDecl>,
    pub roles: Option<Roles>,
}

impl ScenarioDoc {
    /// The agent whose engine runs: the declared `self`, else the first agent.
    pub fn reasoner(&self) -> Option<&AgentId> {
        self.self_agent.as_ref().or(self.agents.first())
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds.unwrap_or_default()
    }

    pub fn profile(&self, id: ProfileId) -> Option<&ProfileDecl> {
        self.profiles.iter().find(|p| p.id == id)
    }
}

/// Events keyed by the tick at which they arrive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub batches: BTreeMap<usize, Vec<Event>>,
}

impl Script {
    pub fn last_tick(&self) -> Option<usize> {
        self.batches.keys().next_back().copied()
    }

    pub fn at(&self, tick: usize) -> &[Event] {
        self.batches.get(&tick).map_or(&[], Vec::as_slice)
    }
}
