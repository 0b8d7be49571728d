//! Formula patterns with variables, and matching against concrete formulas.
//!
//! A pattern mirrors [`Formula`] but any position may hold a `?var`. Agent
//! positions also accept `self` (the reasoning agent) and the `-` wildcard,
//! which matches anything without binding. Matching an attitude pattern also
//! tries the equivalent desire/ideal encoding of the target.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::appraisal::IntensityMode;
use crate::combine::{CombineError, Combinator};
use crate::degree::{approx_eq, DegreeError, Signed, Unit};
use crate::logic::{
    alternate_attitude, canonicalize, unifies, Act, AgentId, EmotionKind, Event, Formula,
    Illocution, Slot, Symbol,
};
use crate::rules::{Threshold, Thresholds};

pub type Var = Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternError {
    #[error("unbound variable ?{0}")]
    Unbound(String),
    #[error("variable ?{0} bound to the wrong kind of value")]
    Kind(String),
    #[error("`self` used outside of an agent context")]
    NoOwner,
    #[error("wildcard or empty agent cannot be instantiated here")]
    NotConcrete,
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Combine(#[from] CombineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentPat {
    Owner,
    Named(AgentId),
    Any,
    Nobody,
    Var(Var),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DegTerm {
    Lit(f64),
    Var(Var),
    Wild,
    Threshold(Threshold),
    Call(Combinator, Vec<DegTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymPat {
    Lit(Symbol),
    Var(Var),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActPat {
    Physical(SymPat),
    Speech(Illocution, Box<Pattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventPat {
    pub actor: AgentPat,
    pub recipient: AgentPat,
    pub act: ActPat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Var(Var),
    Atom(Symbol),
    Event(EventPat),
    Like(AgentPat, AgentPat, DegTerm),
    Dom(AgentPat, AgentPat, DegTerm),
    Bel(AgentPat, DegTerm, Box<Pattern>),
    Att(AgentPat, DegTerm, Box<Pattern>),
    Int(AgentPat, Box<Pattern>),
    Emo {
        kind: EmotionKind,
        holder: AgentPat,
        target: AgentPat,
        intensity: DegTerm,
        about: Box<Pattern>,
    },
    Resp(AgentPat, Box<Pattern>),
    Next(Box<Pattern>),
    Until(Box<Pattern>, Box<Pattern>),
    Future(Box<Pattern>),
    Globally(Box<Pattern>),
    Not(Box<Pattern>),
    And(Box<Pattern>, Box<Pattern>),
    Implies(Box<Pattern>, Box<Pattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Agent(Slot),
    Degree(f64),
    Formula(Formula),
    Symbol(Symbol),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Agent(Slot::Agent(a)) => write!(f, "{a}"),
            Bound::Agent(Slot::Nobody) => f.write_str("_"),
            Bound::Agent(Slot::Any) => f.write_str("-"),
            Bound::Degree(d) => write!(f, "{d}"),
            Bound::Formula(x) => write!(f, "{x}"),
            Bound::Symbol(s) => write!(f, "{s}"),
        }
    }
}

/// Variable assignment produced by matching.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(BTreeMap<Var, Bound>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Bound> {
        self.0.get(&Symbol::new(var))
    }

    pub fn degree(&self, var: &str) -> Option<f64> {
        match self.get(var) {
            Some(Bound::Degree(d)) => Some(*d),
            _ => None,
        }
    }

    pub fn formula(&self, var: &str) -> Option<&Formula> {
        match self.get(var) {
            Some(Bound::Formula(f)) => Some(f),
            _ => None,
        }
    }

    pub fn agent(&self, var: &str) -> Option<&AgentId> {
        match self.get(var) {
            Some(Bound::Agent(Slot::Agent(a))) => Some(a),
            _ => None,
        }
    }

    pub fn insert(&mut self, var: Var, value: Bound) {
        self.0.insert(var, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Bound)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bindings of non-degree variables, rendered. Used as the identity of a
    /// rule firing so that degree drift alone never re-fires a rule.
    pub fn structural_key(&self) -> String {
        self.0
            .iter()
            .filter(|(_, b)| !matches!(b, Bound::Degree(_)))
            .map(|(k, v)| format!("?{k}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("?{k}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Evaluation environment for degree terms and `self`.
#[derive(Debug, Clone, Copy)]
pub struct EvalCtx<'a> {
    pub owner: Option<&'a AgentId>,
    pub thresholds: Thresholds,
    pub mode: IntensityMode,
}

impl<'a> EvalCtx<'a> {
    pub fn new(owner: &'a AgentId, thresholds: Thresholds) -> Self {
        Self {
            owner: Some(owner),
            thresholds,
            mode: IntensityMode::Normalized,
        }
    }

    pub fn detached() -> Self {
        Self {
            owner: None,
            thresholds: Thresholds::default(),
            mode: IntensityMode::Normalized,
        }
    }
}

impl DegTerm {
    pub fn eval(&self, b: &Bindings, ctx: &EvalCtx<'_>) -> Result<f64, PatternError> {
        match self {
            DegTerm::Lit(x) => Ok(*x),
            DegTerm::Var(v) => match b.0.get(v) {
                Some(Bound::Degree(d)) => Ok(*d),
                Some(_) => Err(PatternError::Kind(v.to_string())),
                None => Err(PatternError::Unbound(v.to_string())),
            },
            DegTerm::Wild => Err(PatternError::NotConcrete),
            DegTerm::Threshold(t) => Ok(ctx.thresholds.get(*t)),
            DegTerm::Call(c, args) => {
                let vals = args
                    .iter()
                    .map(|a| a.eval(b, ctx))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(c.apply(&vals, ctx.mode)?)
            }
        }
    }

    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            DegTerm::Var(v) => out.push(v.clone()),
            DegTerm::Call(_, args) => args.iter().for_each(|a| a.vars(out)),
            _ => {}
        }
    }
}

impl Pattern {
    /// A pattern matching exactly this formula.
    pub fn literal(f: &Formula) -> Pattern {
        use Pattern as P;
        let ag = |a: &AgentId| AgentPat::Named(a.clone());
        let bx = |x: &Formula| Box::new(Pattern::literal(x));
        match f {
            Formula::Atom(s) => P::Atom(s.clone()),
            Formula::Event(e) => P::Event(EventPat::literal(e)),
            Formula::Like(a, b, k) => P::Like(ag(a), ag(b), DegTerm::Lit(k.value())),
            Formula::Dom(a, b, k) => P::Dom(ag(a), ag(b), DegTerm::Lit(k.value())),
            Formula::Bel(a, l, x) => P::Bel(ag(a), DegTerm::Lit(l.value()), bx(x)),
            Formula::Att(a, k, x) => P::Att(ag(a), DegTerm::Lit(k.value()), bx(x)),
            Formula::Int(a, x) => P::Int(ag(a), bx(x)),
            Formula::Emo {
                kind,
                holder,
                target,
                intensity,
                about,
            } => P::Emo {
                kind: kind.clone(),
                holder: ag(holder),
                target: target.as_ref().map_or(AgentPat::Nobody, ag),
                intensity: DegTerm::Lit(intensity.value()),
                about: bx(about),
            },
            Formula::Resp(a, x) => P::Resp(ag(a), bx(x)),
            Formula::Next(x) => P::Next(bx(x)),
            Formula::Until(x, y) => P::Until(bx(x), bx(y)),
            Formula::Future(x) => P::Future(bx(x)),
            Formula::Globally(x) => P::Globally(bx(x)),
            Formula::Not(x) => P::Not(bx(x)),
            Formula::And(x, y) => P::And(bx(x), bx(y)),
            Formula::Implies(x, y) => P::Implies(bx(x), bx(y)),
        }
    }

    /// Variables occurring anywhere in the pattern (formula, agent, degree and
    /// act-symbol positions).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        let agent = |a: &AgentPat, out: &mut Vec<Var>| {
            if let AgentPat::Var(v) = a {
                out.push(v.clone());
            }
        };
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Atom(_) => {}
            Pattern::Event(e) => {
                agent(&e.actor, out);
                agent(&e.recipient, out);
                match &e.act {
                    ActPat::Physical(SymPat::Var(v)) => out.push(v.clone()),
                    ActPat::Physical(SymPat::Lit(_)) => {}
                    ActPat::Speech(_, c) => c.collect_vars(out),
                }
            }
            Pattern::Like(a, b, k) | Pattern::Dom(a, b, k) => {
                agent(a, out);
                agent(b, out);
                k.vars(out);
            }
            Pattern::Bel(a, d, x) | Pattern::Att(a, d, x) => {
                agent(a, out);
                d.vars(out);
                x.collect_vars(out);
            }
            Pattern::Int(a, x) | Pattern::Resp(a, x) => {
                agent(a, out);
                x.collect_vars(out);
            }
            Pattern::Emo {
                holder,
                target,
                intensity,
                about,
                ..
            } => {
                agent(holder, out);
                agent(target, out);
                intensity.vars(out);
                about.collect_vars(out);
            }
            Pattern::Next(x) | Pattern::Future(x) | Pattern::Globally(x) | Pattern::Not(x) => {
                x.collect_vars(out)
            }
            Pattern::Until(x, y) | Pattern::And(x, y) | Pattern::Implies(x, y) => {
                x.collect_vars(out);
                y.collect_vars(out);
            }
        }
    }
}

impl EventPat {
    pub fn literal(e: &Event) -> EventPat {
        let slot = |s: &Slot| match s {
            Slot::Agent(a) => AgentPat::Named(a.clone()),
            Slot::Nobody => AgentPat::Nobody,
            Slot::Any => AgentPat::Any,
        };
        EventPat {
            actor: slot(&e.actor),
            recipient: slot(&e.recipient),
            act: match &e.act {
                Act::Physical(s) => ActPat::Physical(SymPat::Lit(s.clone())),
                Act::Speech(i, c) => ActPat::Speech(*i, Box::new(Pattern::literal(c))),
            },
        }
    }
}

/// All consistent bindings of `pattern` against `target`. An empty result means
/// no match.
pub fn match_pattern(pattern: &Pattern, target: &Formula, ctx: &EvalCtx<'_>) -> Vec<Bindings> {
    match_from(pattern, target, ctx, &Bindings::new())
}

/// Matching that extends an existing assignment.
pub fn match_from(
    pattern: &Pattern,
    target: &Formula,
    ctx: &EvalCtx<'_>,
    start: &Bindings,
) -> Vec<Bindings> {
    let mut out = Vec::new();
    go(pattern, target, ctx, start.clone(), &mut out);
    out
}

fn match_agent(p: &AgentPat, t: &Slot, ctx: &EvalCtx<'_>, b: &mut Bindings) -> bool {
    match p {
        AgentPat::Owner => match ctx.owner {
            Some(o) => Slot::Agent(o.clone()).compatible(t),
            None => false,
        },
        AgentPat::Named(a) => Slot::Agent(a.clone()).compatible(t),
        AgentPat::Any => true,
        AgentPat::Nobody => matches!(t, Slot::Nobody | Slot::Any),
        AgentPat::Var(v) => match b.0.get(v) {
            Some(Bound::Agent(s)) => s.compatible(t),
            Some(_) => false,
            None => {
                b.0.insert(v.clone(), Bound::Agent(t.clone()));
                true
            }
        },
    }
}

fn match_degree(p: &DegTerm, t: f64, ctx: &EvalCtx<'_>, b: &mut Bindings) -> bool {
    match p {
        DegTerm::Wild => true,
        DegTerm::Var(v) => match b.0.get(v) {
            Some(Bound::Degree(d)) => approx_eq(*d, t),
            Some(_) => false,
            None => {
                b.0.insert(v.clone(), Bound::Degree(t));
                true
            }
        },
        other => other
            .eval(b, ctx)
            .map(|x| approx_eq(x, t))
            .unwrap_or(false),
    }
}

fn go(p: &Pattern, t: &Formula, ctx: &EvalCtx<'_>, mut b: Bindings, out: &mut Vec<Bindings>) {
    use Pattern as P;
    let slot = |a: &AgentId| Slot::Agent(a.clone());
    match (p, t) {
        (P::Var(v), _) => match b.0.get(v) {
            Some(Bound::Formula(f)) => {
                if unifies(f, t) {
                    out.push(b);
                }
            }
            Some(_) => {}
            None => {
                b.0.insert(v.clone(), Bound::Formula(t.clone()));
                out.push(b);
            }
        },
        (P::Atom(x), Formula::Atom(y)) => {
            if x == y {
                out.push(b)
            }
        }
        (P::Event(ep), Formula::Event(e)) => {
            if !match_agent(&ep.actor, &e.actor, ctx, &mut b)
                || !match_agent(&ep.recipient, &e.recipient, ctx, &mut b)
            {
                return;
            }
            match (&ep.act, &e.act) {
                (ActPat::Physical(SymPat::Lit(x)), Act::Physical(y)) => {
                    if x == y {
                        out.push(b)
                    }
                }
                (ActPat::Physical(SymPat::Var(v)), Act::Physical(y)) => match b.0.get(v) {
                    Some(Bound::Symbol(s)) => {
                        if s == y {
                            out.push(b)
                        }
                    }
                    Some(_) => {}
                    None => {
                        b.0.insert(v.clone(), Bound::Symbol(y.clone()));
                        out.push(b);
                    }
                },
                (ActPat::Speech(i, cp), Act::Speech(j, c)) if i == j => go(cp, c, ctx, b, out),
                _ => {}
            }
        }
        (P::Like(pa, pb, pk), Formula::Like(a, c, k)) | (P::Dom(pa, pb, pk), Formula::Dom(a, c, k)) => {
            if match_agent(pa, &slot(a), ctx, &mut b)
                && match_agent(pb, &slot(c), ctx, &mut b)
                && match_degree(pk, k.value(), ctx, &mut b)
            {
                out.push(b);
            }
        }
        (P::Bel(pa, pl, px), Formula::Bel(a, l, x)) => {
            if match_agent(pa, &slot(a), ctx, &mut b) && match_degree(pl, l.value(), ctx, &mut b) {
                go(px, x, ctx, b, out);
            }
        }
        (P::Att(..), Formula::Att(..)) => {
            go_attitude(p, t, ctx, b.clone(), out);
            if let Some(alt) = alternate_attitude(t) {
                go_attitude(p, &alt, ctx, b, out);
            }
        }
        (P::Int(pa, px), Formula::Int(a, x)) | (P::Resp(pa, px), Formula::Resp(a, x)) => {
            if match_agent(pa, &slot(a), ctx, &mut b) {
                go(px, x, ctx, b, out);
            }
        }
        (
            P::Emo {
                kind: pk,
                holder: ph,
                target: pt,
                intensity: pi,
                about: px,
            },
            Formula::Emo {
                kind,
                holder,
                target,
                intensity,
                about,
            },
        ) => {
            let tslot = target.as_ref().map_or(Slot::Nobody, slot);
            if pk == kind
                && match_agent(ph, &slot(holder), ctx, &mut b)
                && match_agent(pt, &tslot, ctx, &mut b)
                && match_degree(pi, intensity.value(), ctx, &mut b)
            {
                go(px, about, ctx, b, out);
            }
        }
        (P::Next(px), Formula::Next(x))
        | (P::Future(px), Formula::Future(x))
        | (P::Globally(px), Formula::Globally(x))
        | (P::Not(px), Formula::Not(x)) => go(px, x, ctx, b, out),
        (P::Until(p1, p2), Formula::Until(x, y))
        | (P::And(p1, p2), Formula::And(x, y))
        | (P::Implies(p1, p2), Formula::Implies(x, y)) => {
            let mut firsts = Vec::new();
            go(p1, x, ctx, b, &mut firsts);
            for fb in firsts {
                go(p2, y, ctx, fb, out);
            }
        }
        _ => {}
    }
}

fn go_attitude(p: &Pattern, t: &Formula, ctx: &EvalCtx<'_>, mut b: Bindings, out: &mut Vec<Bindings>) {
    if let (Pattern::Att(pa, pk, px), Formula::Att(a, k, x)) = (p, t) {
        if match_agent(pa, &Slot::Agent(a.clone()), ctx, &mut b)
            && match_degree(pk, k.value(), ctx, &mut b)
        {
            let before = out.len();
            go(px, x, ctx, b, out);
            // the same assignment can arise from both encodings
            let mut i = before;
            while i < out.len() {
                if out[..before].contains(&out[i]) {
                    out.remove(i);
                } else {
                    i += 1;
                }
            }
        }
    }
}

fn inst_agent(p: &AgentPat, b: &Bindings, ctx: &EvalCtx<'_>) -> Result<Slot, PatternError> {
    match p {
        AgentPat::Owner => ctx
            .owner
            .map(|o| Slot::Agent(o.clone()))
            .ok_or(PatternError::NoOwner),
        AgentPat::Named(a) => Ok(Slot::Agent(a.clone())),
        AgentPat::Any => Ok(Slot::Any),
        AgentPat::Nobody => Ok(Slot::Nobody),
        AgentPat::Var(v) => match b.0.get(v) {
            Some(Bound::Agent(s)) => Ok(s.clone()),
            Some(_) => Err(PatternError::Kind(v.to_string())),
            None => Err(PatternError::Unbound(v.to_string())),
        },
    }
}

fn concrete(s: Slot) -> Result<AgentId, PatternError> {
    match s {
        Slot::Agent(a) => Ok(a),
        _ => Err(PatternError::NotConcrete),
    }
}

/// Builds the formula described by `p` under `b`, then canonicalizes it.
pub fn instantiate(p: &Pattern, b: &Bindings, ctx: &EvalCtx<'_>) -> Result<Formula, PatternError> {
    Ok(canonicalize(&build(p, b, ctx)?))
}

fn build(p: &Pattern, b: &Bindings, ctx: &EvalCtx<'_>) -> Result<Formula, PatternError> {
    use Pattern as P;
    let agent = |a: &AgentPat| inst_agent(a, b, ctx).and_then(concrete);
    let bx = |x: &Pattern| build(x, b, ctx).map(Box::new);
    let unit = |d: &DegTerm| -> Result<Unit, PatternError> { Ok(Unit::new(d.eval(b, ctx)?)?) };
    let signed = |d: &DegTerm| -> Result<Signed, PatternError> { Ok(Signed::new(d.eval(b, ctx)?)?) };
    Ok(match p {
        P::Var(v) => match b.0.get(v) {
            Some(Bound::Formula(f)) => f.clone(),
            Some(_) => return Err(PatternError::Kind(v.to_string())),
            None => return Err(PatternError::Unbound(v.to_string())),
        },
        P::Atom(s) => Formula::Atom(s.clone()),
        P::Event(e) => Formula::Event(Event {
            actor: inst_agent(&e.actor, b, ctx)?,
            recipient: inst_agent(&e.recipient, b, ctx)?,
            act: match &e.act {
                ActPat::Physical(SymPat::Lit(s)) => Act::Physical(s.clone()),
                ActPat::Physical(SymPat::Var(v)) => match b.0.get(v) {
                    Some(Bound::Symbol(s)) => Act::Physical(s.clone()),
                    Some(_) => return Err(PatternError::Kind(v.to_string())),
                    None => return Err(PatternError::Unbound(v.to_string())),
                },
                ActPat::Speech(i, c) => Act::Speech(*i, bx(c)?),
            },
        }),
        P::Like(x, y, k) => Formula::Like(agent(x)?, agent(y)?, signed(k)?),
        P::Dom(x, y, k) => Formula::Dom(agent(x)?, agent(y)?, signed(k)?),
        P::Bel(a, l, x) => Formula::Bel(agent(a)?, unit(l)?, bx(x)?),
        P::Att(a, k, x) => Formula::Att(agent(a)?, signed(k)?, bx(x)?),
        P::Int(a, x) => Formula::Int(agent(a)?, bx(x)?),
        P::Emo {
            kind,
            holder,
            target,
            intensity,
            about,
        } => Formula::Emo {
            kind: kind.clone(),
            holder: agent(holder)?,
            target: match inst_agent(target, b, ctx)? {
                Slot::Agent(a) => Some(a),
                Slot::Nobody => None,
                Slot::Any => return Err(PatternError::NotConcrete),
            },
            intensity: unit(intensity)?,
            about: bx(about)?,
        },
        P::Resp(a, x) => Formula::Resp(agent(a)?, bx(x)?),
        P::Next(x) => Formula::Next(bx(x)?),
        P::Until(x, y) => Formula::Until(bx(x)?, bx(y)?),
        P::Future(x) => Formula::Future(bx(x)?),
        P::Globally(x) => Formula::Globally(bx(x)?),
        P::Not(x) => Formula::Not(bx(x)?),
        P::And(x, y) => Formula::And(bx(x)?, bx(y)?),
        P::Implies(x, y) => Formula::Implies(bx(x)?, bx(y)?),
    })
}
