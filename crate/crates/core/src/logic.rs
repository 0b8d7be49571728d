//! The formula language: agents, events, modal and temporal operators.
//!
//! Formulas are plain immutable values. Desire and ideal are not separate
//! constructors: `Des(a,k,φ)` is `Att(a,k,F φ)` and `Ideal(a,k,φ)` is
//! `Att(a,k,G φ)`. [`canonicalize`] picks one representative per equivalence
//! class so that stores never hold two encodings of the same attitude.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::degree::{Signed, Unit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("pattern not concrete: {0}")]
    PatternNotConcrete(String),
    #[error("agent name must be nonempty")]
    EmptyAgent,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(Arc<str>);

impl AgentId {
    pub fn new(name: &str) -> Result<Self, LogicError> {
        if name.is_empty() {
            return Err(LogicError::EmptyAgent);
        }
        Ok(Self(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Interned-ish name of an atom or physical act.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Self(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An agent position inside an event. `Any` is the `-` wildcard and `Nobody`
/// the empty recipient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Agent(AgentId),
    Nobody,
    Any,
}

impl Slot {
    pub fn agent(&self) -> Option<&AgentId> {
        match self {
            Slot::Agent(a) => Some(a),
            _ => None,
        }
    }

    /// Two slots are compatible when equal or when either is the wildcard.
    pub fn compatible(&self, other: &Slot) -> bool {
        matches!(self, Slot::Any) || matches!(other, Slot::Any) || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Illocution {
    Assert,
    Request,
    Commit,
    Express,
}

impl Illocution {
    pub const ALL: [Illocution; 4] = [
        Illocution::Assert,
        Illocution::Request,
        Illocution::Commit,
        Illocution::Express,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Illocution::Assert => "Assert",
            Illocution::Request => "Request",
            Illocution::Commit => "Commit",
            Illocution::Express => "Express",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Act {
    Physical(Symbol),
    Speech(Illocution, Box<Formula>),
}

/// `⟨actor, recipient, act⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub actor: Slot,
    pub recipient: Slot,
    pub act: Act,
}

impl Event {
    pub fn physical(actor: &AgentId, recipient: Option<&AgentId>, act: &str) -> Self {
        Event {
            actor: Slot::Agent(actor.clone()),
            recipient: recipient.map_or(Slot::Nobody, |r| Slot::Agent(r.clone())),
            act: Act::Physical(Symbol::new(act)),
        }
    }

    pub fn speech(actor: &AgentId, recipient: &AgentId, ill: Illocution, content: Formula) -> Self {
        Event {
            actor: Slot::Agent(actor.clone()),
            recipient: Slot::Agent(recipient.clone()),
            act: Act::Speech(ill, Box::new(content)),
        }
    }

    /// No wildcard in actor or recipient position.
    pub fn is_concrete(&self) -> bool {
        matches!(self.actor, Slot::Agent(_)) && !matches!(self.recipient, Slot::Any)
    }

    pub fn is_speech(&self) -> bool {
        matches!(self.act, Act::Speech(..))
    }

    fn require_concrete(&self) -> Result<(), LogicError> {
        if self.is_concrete() {
            Ok(())
        } else {
            Err(LogicError::PatternNotConcrete(
                Formula::Event(self.clone()).to_string(),
            ))
        }
    }

    /// Agents taking part in the event (actor first).
    pub fn witnesses(&self) -> Vec<AgentId> {
        let mut out = Vec::with_capacity(2);
        if let Slot::Agent(a) = &self.actor {
            out.push(a.clone());
        }
        if let Slot::Agent(r) = &self.recipient {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
        out
    }
}

/// Direct responsibility: the agent is the actor.
pub fn is_responsible(agent: &AgentId, event: &Event) -> Result<bool, LogicError> {
    event.require_concrete()?;
    Ok(event.actor == Slot::Agent(agent.clone()))
}

/// The agent took part in the event, as actor or recipient.
pub fn is_witness(agent: &AgentId, event: &Event) -> Result<bool, LogicError> {
    event.require_concrete()?;
    let me = Slot::Agent(agent.clone());
    Ok(event.actor == me || event.recipient == me)
}

/// Emotion categories. The five built-in kinds carry default appraisal rules;
/// any other name can be registered by a loaded appraisal theory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmotionKind {
    Joy,
    Fear,
    Gloating,
    Admiration,
    Gratitude,
    Other(Symbol),
}

impl EmotionKind {
    pub const BUILTIN: [EmotionKind; 5] = [
        EmotionKind::Joy,
        EmotionKind::Fear,
        EmotionKind::Gloating,
        EmotionKind::Admiration,
        EmotionKind::Gratitude,
    ];

    pub fn name(&self) -> &str {
        match self {
            EmotionKind::Joy => "Joy",
            EmotionKind::Fear => "Fear",
            EmotionKind::Gloating => "Gloating",
            EmotionKind::Admiration => "Admiration",
            EmotionKind::Gratitude => "Gratitude",
            EmotionKind::Other(s) => s.as_str(),
        }
    }

    pub fn from_name(name: &str) -> Self {
        Self::BUILTIN
            .into_iter()
            .find(|k| k.name() == name)
            .unwrap_or_else(|| EmotionKind::Other(Symbol::new(name)))
    }
}

impl fmt::Display for EmotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Symbol),
    Event(Event),
    Like(AgentId, AgentId, Signed),
    Dom(AgentId, AgentId, Signed),
    Bel(AgentId, Unit, Box<Formula>),
    Att(AgentId, Signed, Box<Formula>),
    Int(AgentId, Box<Formula>),
    Emo {
        kind: EmotionKind,
        holder: AgentId,
        target: Option<AgentId>,
        intensity: Unit,
        about: Box<Formula>,
    },
    /// Believed responsibility of an agent for a state of affairs.
    Resp(AgentId, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Future(Box<Formula>),
    Globally(Box<Formula>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(Symbol::new(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn future(f: Formula) -> Self {
        Formula::Future(Box::new(f))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn bel(agent: &AgentId, l: Unit, f: Formula) -> Self {
        Formula::Bel(agent.clone(), l, Box::new(f))
    }

    pub fn att(agent: &AgentId, k: Signed, f: Formula) -> Self {
        Formula::Att(agent.clone(), k, Box::new(f))
    }

    /// `Des(a,k,φ) = Att(a,k,F φ)`.
    pub fn des(agent: &AgentId, k: Signed, f: Formula) -> Self {
        Formula::att(agent, k, Formula::future(f))
    }

    /// `Ideal(a,k,φ) = Att(a,k,G φ)`.
    pub fn ideal(agent: &AgentId, k: Signed, f: Formula) -> Self {
        Formula::att(agent, k, Formula::globally(f))
    }

    pub fn int(agent: &AgentId, f: Formula) -> Self {
        Formula::Int(agent.clone(), Box::new(f))
    }

    pub fn as_event(&self) -> Option<&Event> {
        match self {
            Formula::Event(e) => Some(e),
            _ => None,
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(Formula::depth).max().unwrap_or(0)
    }

    /// Immediate subformulas, including speech-act contents.
    pub fn children(&self) -> impl Iterator<Item = &Formula> {
        let mut kids: Vec<&Formula> = Vec::new();
        match self {
            Formula::Atom(_) | Formula::Like(..) | Formula::Dom(..) => {}
            Formula::Event(e) => {
                if let Act::Speech(_, c) = &e.act {
                    kids.push(c);
                }
            }
            Formula::Bel(_, _, f)
            | Formula::Att(_, _, f)
            | Formula::Int(_, f)
            | Formula::Resp(_, f)
            | Formula::Next(f)
            | Formula::Future(f)
            | Formula::Globally(f)
            | Formula::Not(f) => kids.push(f),
            Formula::Emo { about, .. } => kids.push(about),
            Formula::Until(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                kids.push(a);
                kids.push(b);
            }
        }
        kids.into_iter()
    }

    /// True when no N/U/F/G operator occurs anywhere in the formula.
    pub fn is_atemporal(&self) -> bool {
        match self {
            Formula::Next(_) | Formula::Until(..) | Formula::Future(_) | Formula::Globally(_) => {
                false
            }
            other => other.children().all(Formula::is_atemporal),
        }
    }

    /// Atoms and events occurring in the formula, sorted and deduplicated.
    pub fn leaves(&self) -> Vec<Formula> {
        fn walk(f: &Formula, out: &mut Vec<Formula>) {
            match f {
                Formula::Atom(_) => out.push(f.clone()),
                Formula::Event(e) => match &e.act {
                    Act::Physical(_) => out.push(f.clone()),
                    Act::Speech(i, c) => {
                        walk(c, out);
                        // the event itself, content elided
                        out.push(Formula::Event(Event {
                            act: Act::Speech(*i, Box::new(Formula::atom("_"))),
                            ..e.clone()
                        }));
                    }
                },
                other => other.children().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

/// Canonical negation of an already canonical formula: removes double
/// negations and folds `¬F¬φ` / `¬G¬φ` into `Gφ` / `Fφ`.
pub fn negate(f: Formula) -> Formula {
    match f {
        Formula::Not(inner) => *inner,
        Formula::Future(inner) if matches!(*inner, Formula::Not(_)) => match *inner {
            Formula::Not(x) => Formula::Globally(x),
            _ => unreachable!(),
        },
        Formula::Globally(inner) if matches!(*inner, Formula::Not(_)) => match *inner {
            Formula::Not(x) => Formula::Future(x),
            _ => unreachable!(),
        },
        other => Formula::Not(Box::new(other)),
    }
}

/// Normal form for an attitude over a canonical body: a negative desire is
/// stored as the equivalent positive ideal, `Att(a,-k,F φ) ≡ Att(a,k,G ¬φ)`.
fn normal_attitude(agent: AgentId, k: Signed, body: Formula) -> Formula {
    match body {
        Formula::Future(inner) if k.value() < 0.0 => {
            Formula::Att(agent, k.negated(), Box::new(Formula::Globally(Box::new(negate(*inner)))))
        }
        body => Formula::Att(agent, k, Box::new(body)),
    }
}

/// The other encoding of the same attitude, if there is one.
pub fn alternate_attitude(f: &Formula) -> Option<Formula> {
    let Formula::Att(a, k, body) = f else {
        return None;
    };
    match &**body {
        Formula::Globally(inner) if k.value() > 0.0 => Some(Formula::Att(
            a.clone(),
            k.negated(),
            Box::new(Formula::Future(Box::new(negate((**inner).clone())))),
        )),
        Formula::Future(inner) if k.value() < 0.0 => Some(Formula::Att(
            a.clone(),
            k.negated(),
            Box::new(Formula::Globally(Box::new(negate((**inner).clone())))),
        )),
        _ => None,
    }
}

/// Rewrites a formula into its canonical representative. Idempotent.
pub fn canonicalize(f: &Formula) -> Formula {
    use Formula::*;
    let b = |x: &Formula| Box::new(canonicalize(x));
    match f {
        Atom(_) | Like(..) | Dom(..) => f.clone(),
        Event(e) => Event(canonical_event(e)),
        Bel(a, l, x) => Bel(a.clone(), *l, b(x)),
        Att(a, k, x) => normal_attitude(a.clone(), *k, canonicalize(x)),
        Int(a, x) => Int(a.clone(), b(x)),
        Emo {
            kind,
            holder,
            target,
            intensity,
            about,
        } => Emo {
            kind: kind.clone(),
            holder: holder.clone(),
            target: target.clone(),
            intensity: *intensity,
            about: b(about),
        },
        Resp(a, x) => Resp(a.clone(), b(x)),
        Next(x) => Next(b(x)),
        Until(x, y) => Until(b(x), b(y)),
        Future(x) => Future(b(x)),
        Globally(x) => Globally(b(x)),
        Not(x) => negate(canonicalize(x)),
        And(x, y) => And(b(x), b(y)),
        Implies(x, y) => Implies(b(x), b(y)),
    }
}

fn canonical_event(e: &Event) -> Event {
    let mut out = e.clone();
    if let Act::Speech(i, c) = &e.act {
        out.act = Act::Speech(*i, Box::new(canonicalize(c)));
    }
    out
}

/// Structural equality where an event wildcard on either side matches any
/// agent. Used to apply schematic beliefs such as `⟨M,-,x⟩ ⇒ ⟨M,-,y⟩`.
pub fn unifies(a: &Formula, b: &Formula) -> bool {
    use crate::degree::approx_eq;
    use Formula::*;
    match (a, b) {
        (Atom(x), Atom(y)) => x == y,
        (Event(x), Event(y)) => events_unify(x, y),
        (Like(a1, b1, k1), Like(a2, b2, k2)) | (Dom(a1, b1, k1), Dom(a2, b2, k2)) => {
            a1 == a2 && b1 == b2 && approx_eq(k1.value(), k2.value())
        }
        (Bel(a1, l1, x), Bel(a2, l2, y)) => {
            a1 == a2 && approx_eq(l1.value(), l2.value()) && unifies(x, y)
        }
        (Att(a1, k1, x), Att(a2, k2, y)) => {
            a1 == a2 && approx_eq(k1.value(), k2.value()) && unifies(x, y)
        }
        (Int(a1, x), Int(a2, y)) | (Resp(a1, x), Resp(a2, y)) => a1 == a2 && unifies(x, y),
        (
            Emo {
                kind: k1,
                holder: h1,
                target: t1,
                intensity: i1,
                about: x,
            },
            Emo {
                kind: k2,
                holder: h2,
                target: t2,
                intensity: i2,
                about: y,
            },
        ) => {
            k1 == k2
                && h1 == h2
                && t1 == t2
                && approx_eq(i1.value(), i2.value())
                && unifies(x, y)
        }
        (Next(x), Next(y))
        | (Future(x), Future(y))
        | (Globally(x), Globally(y))
        | (Not(x), Not(y)) => unifies(x, y),
        (Until(x1, y1), Until(x2, y2))
        | (And(x1, y1), And(x2, y2))
        | (Implies(x1, y1), Implies(x2, y2)) => unifies(x1, x2) && unifies(y1, y2),
        _ => false,
    }
}

fn events_unify(x: &Event, y: &Event) -> bool {
    if !x.actor.compatible(&y.actor) || !x.recipient.compatible(&y.recipient) {
        return false;
    }
    match (&x.act, &y.act) {
        (Act::Physical(a), Act::Physical(b)) => a == b,
        (Act::Speech(i, c), Act::Speech(j, d)) => i == j && unifies(c, d),
        _ => false,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::serialize_formula(self))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::serialize_formula(&Formula::Event(self.clone())))
    }
}
