//! Declarative inference rules: premises, guards and effects.
//!
//! Rules are written in a small text DSL (see `docs/scenario-format.md`) and
//! parsed by [`crate::syntax::parse_rule_file`]. This module only holds the
//! data model and static validation; evaluation lives in [`crate::folk`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::{AgentPat, DegTerm, Pattern, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Threshold {
    Mod,
    Str,
    Des,
}

impl Threshold {
    pub fn name(self) -> &'static str {
        match self {
            Threshold::Mod => "mod",
            Threshold::Str => "str",
            Threshold::Des => "des",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "mod" => Some(Threshold::Mod),
            "str" => Some(Threshold::Str),
            "des" => Some(Threshold::Des),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("thresholds must satisfy 0.5 <= mod < str <= 1 (got mod={0}, str={1})")]
    Order(f64, f64),
    #[error("des threshold {0} outside [0, 1]")]
    Desire(f64),
}

/// Moderate, strong and desire thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub mod_th: f64,
    pub str_th: f64,
    pub des_th: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            mod_th: 0.5,
            str_th: 0.75,
            des_th: 0.7,
        }
    }
}

impl Thresholds {
    pub fn new(mod_th: f64, str_th: f64, des_th: f64) -> Result<Self, ThresholdError> {
        if !(mod_th >= 0.5 && mod_th < str_th && str_th <= 1.0) {
            return Err(ThresholdError::Order(mod_th, str_th));
        }
        if !(0.0..=1.0).contains(&des_th) {
            return Err(ThresholdError::Desire(des_th));
        }
        Ok(Self {
            mod_th,
            str_th,
            des_th,
        })
    }

    pub fn get(&self, t: Threshold) -> f64 {
        match t {
            Threshold::Mod => self.mod_th,
            Threshold::Str => self.str_th,
            Threshold::Des => self.des_th,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Gt,
    Lt,
    Ge,
    Le,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Gt => ">",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
        }
    }

    /// Tolerant comparison; `>` and `<` are strict beyond `EPS`.
    pub fn holds(self, a: f64, b: f64) -> bool {
        use crate::degree::{gt, lt};
        match self {
            Cmp::Gt => gt(a, b),
            Cmp::Lt => lt(a, b),
            Cmp::Ge => !lt(a, b),
            Cmp::Le => !gt(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Premise {
    /// A stored belief, attitude, intention or relation of the reasoning agent.
    Holds(Pattern),
    /// A goal computed by the goal-ordering stage.
    Goal(AgentPat, DegTerm, Pattern),
    /// Direct responsibility: the agent is the actor of the event.
    Resp(AgentPat, Pattern),
    Wit(AgentPat, Pattern),
    /// An event perceived during the current tick.
    Observed(Pattern),
    IncDes(AgentPat, DegTerm, Pattern),
    WIncDes(AgentPat, DegTerm, Pattern),
    Atemporal(Pattern),
    Not(Box<Premise>),
    Guard(DegTerm, Cmp, DegTerm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timing {
    Immediate,
    Next,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    /// Add to the store (Bel, Att/Des/Ideal, Int, Like, Dom, Emo).
    Assert(Pattern),
    /// Perform an event. Emitting retracts the intention to perform it.
    Emit(Pattern),
}

/// Keep only the best match per group, ranked by `key` descending then by the
/// serialized effect.
#[derive(Debug, Clone, PartialEq)]
pub struct Select {
    pub key: DegTerm,
    pub per: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub select: Option<Select>,
    pub premises: Vec<Premise>,
    pub effects: Vec<(Effect, Timing)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Drain,
    ExecuteIntentions,
    Perceive,
    SimulateOthers,
    UpdateBeliefsWithNewSoa,
    HandleOperatorsEquivalence,
    AdoptNewDesires,
    OrderGoals,
    Appraise,
    AdoptNewIntentionsFromGoals,
    AdoptNewIntentionsFromIntentions,
    SpeechActs,
}

impl Stage {
    /// Stages in execution order.
    pub const ORDER: [Stage; 12] = [
        Stage::Drain,
        Stage::ExecuteIntentions,
        Stage::Perceive,
        Stage::SimulateOthers,
        Stage::UpdateBeliefsWithNewSoa,
        Stage::HandleOperatorsEquivalence,
        Stage::AdoptNewDesires,
        Stage::OrderGoals,
        Stage::Appraise,
        Stage::AdoptNewIntentionsFromGoals,
        Stage::AdoptNewIntentionsFromIntentions,
        Stage::SpeechActs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Drain => "drain",
            Stage::ExecuteIntentions => "execute_intentions",
            Stage::Perceive => "perceive",
            Stage::SimulateOthers => "simulate_others",
            Stage::UpdateBeliefsWithNewSoa => "update_beliefs_with_new_soa",
            Stage::HandleOperatorsEquivalence => "handle_operators_equivalence",
            Stage::AdoptNewDesires => "adopt_new_desires",
            Stage::OrderGoals => "order_goals",
            Stage::Appraise => "appraise",
            Stage::AdoptNewIntentionsFromGoals => "adopt_new_intentions_from_goals",
            Stage::AdoptNewIntentionsFromIntentions => "adopt_new_intentions_from_intentions",
            Stage::SpeechActs => "speech_acts",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ORDER.into_iter().find(|st| st.name() == s)
    }

    /// Stages that run rules from a rule file.
    pub fn accepts_rules(self) -> bool {
        matches!(
            self,
            Stage::ExecuteIntentions
                | Stage::UpdateBeliefsWithNewSoa
                | Stage::AdoptNewDesires
                | Stage::AdoptNewIntentionsFromGoals
                | Stage::AdoptNewIntentionsFromIntentions
                | Stage::SpeechActs
        )
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Premise {
    /// Variables this premise can bind (positive premises only).
    pub fn binds(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let agent = |a: &AgentPat, out: &mut Vec<Var>| {
            if let AgentPat::Var(v) = a {
                out.push(v.clone());
            }
        };
        match self {
            Premise::Holds(p) | Premise::Observed(p) => out.extend(p.vars()),
            Premise::Goal(a, d, p) => {
                agent(a, &mut out);
                if let DegTerm::Var(v) = d {
                    out.push(v.clone());
                }
                out.extend(p.vars());
            }
            Premise::Resp(a, p) | Premise::Wit(a, p) => {
                // the formula must already be bound; only the agent can bind
                agent(a, &mut out);
                let _ = p;
            }
            Premise::IncDes(..)
            | Premise::WIncDes(..)
            | Premise::Atemporal(_)
            | Premise::Not(_)
            | Premise::Guard(..) => {}
        }
        out
    }

    /// Variables that must be bound before the premise is evaluated.
    pub fn needs(&self) -> Vec<Var> {
        let mut out = Vec::new();
        match self {
            Premise::Holds(_) | Premise::Observed(_) | Premise::Goal(..) => {}
            Premise::Resp(_, p) | Premise::Wit(_, p) | Premise::Atemporal(p) => {
                out.extend(p.vars())
            }
            Premise::IncDes(a, d, p) | Premise::WIncDes(a, d, p) => {
                if let AgentPat::Var(v) = a {
                    out.push(v.clone());
                }
                d.vars(&mut out);
                out.extend(p.vars());
            }
            Premise::Not(inner) => {
                // negation as absence may mention fresh variables; they are
                // treated existentially
                let fresh = inner.binds();
                out.extend(inner.needs().into_iter().filter(|v| !fresh.contains(v)));
            }
            Premise::Guard(a, _, b) => {
                a.vars(&mut out);
                b.vars(&mut out);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule `{rule}`: {message}")]
pub struct RuleError {
    pub rule: String,
    pub message: String,
}

impl Rule {
    /// Checks that every variable is bound before use.
    pub fn validate(&self) -> Result<(), RuleError> {
        let err = |m: String| RuleError {
            rule: self.name.clone(),
            message: m,
        };
        let mut bound: Vec<Var> = Vec::new();
        for p in &self.premises {
            for v in p.needs() {
                if !bound.contains(&v) {
                    return Err(err(format!("variable ?{v} used before it is bound")));
                }
            }
            bound.extend(p.binds());
        }
        if let Some(sel) = &self.select {
            let mut vs = Vec::new();
            sel.key.vars(&mut vs);
            vs.extend(sel.per.iter().cloned());
            if let Some(v) = vs.iter().find(|v| !bound.contains(v)) {
                return Err(err(format!("select uses unbound variable ?{v}")));
            }
        }
        if self.effects.is_empty() {
            return Err(err("rule has no effect".into()));
        }
        for (e, _) in &self.effects {
            let p = match e {
                Effect::Assert(p) | Effect::Emit(p) => p,
            };
            if let Some(v) = p.vars().into_iter().find(|v| !bound.contains(v)) {
                return Err(err(format!("effect uses unbound variable ?{v}")));
            }
            if let Effect::Assert(p) = e {
                if !matches!(
                    p,
                    Pattern::Bel(..)
                        | Pattern::Att(..)
                        | Pattern::Int(..)
                        | Pattern::Like(..)
                        | Pattern::Dom(..)
                        | Pattern::Emo { .. }
                ) {
                    return Err(err(
                        "effect must be a mental attitude, a relation, an emotion or Emit(...)"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// An ordered collection of rules, each attached to the stage it runs in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<(Stage, Rule)>,
}

/// One row of the exported rule table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub stage: String,
    pub premises: String,
    pub effects: String,
}

impl RuleSet {
    pub fn in_stage(&self, stage: Stage) -> impl Iterator<Item = &Rule> {
        self.rules
            .iter()
            .filter(move |(s, _)| *s == stage)
            .map(|(_, r)| r)
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().map(|(_, r)| r).find(|r| r.name == name)
    }

    pub fn extend(&mut self, other: RuleSet) {
        self.rules.extend(other.rules);
    }

    pub fn catalog(&self) -> Vec<CatalogEntry> {
        use crate::syntax::{serialize_effect, serialize_premise};
        self.rules
            .iter()
            .map(|(stage, r)| CatalogEntry {
                name: r.name.clone(),
                stage: stage.name().to_string(),
                premises: r
                    .premises
                    .iter()
                    .map(serialize_premise)
                    .collect::<Vec<_>>()
                    .join(" & "),
                effects: r
                    .effects
                    .iter()
                    .map(serialize_effect)
                    .collect::<Vec<_>>()
                    .join(" & "),
            })
            .collect()
    }
}
