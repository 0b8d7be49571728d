//! One agent's graded mental state.
//!
//! Beliefs and attitudes are keyed on the positive canonical form of their
//! content: `Bel(¬φ)=l` is stored as `φ ↦ 1-l` and `Att(¬φ)=k` as `φ ↦ -k`.
//! The complement law for beliefs and the `k = -k'` consistency of attitudes
//! therefore hold by construction. Revision is last-writer-wins.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::degree::{approx_eq, gt, Signed, Unit, EPS};
use crate::logic::{canonicalize, negate, unifies, AgentId, EmotionKind, Formula};
use crate::rules::Thresholds;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("intention {0} conflicts with an intention for its negation")]
    ConflictingIntention(String),
    #[error("emotions cannot be about temporal formulas: {0}")]
    TemporalEmotion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Relation {
    pub like: Option<Signed>,
    pub dom: Option<Signed>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EmotionInstance {
    pub kind: EmotionKind,
    pub holder: AgentId,
    pub target: Option<AgentId>,
    pub intensity: Unit,
    pub about: Formula,
    pub tick: u64,
}

impl EmotionInstance {
    pub fn to_formula(&self) -> Formula {
        Formula::Emo {
            kind: self.kind.clone(),
            holder: self.holder.clone(),
            target: self.target.clone(),
            intensity: self.intensity,
            about: Box::new(self.about.clone()),
        }
    }

    pub fn from_formula(f: &Formula, tick: u64) -> Option<Self> {
        match f {
            Formula::Emo {
                kind,
                holder,
                target,
                intensity,
                about,
            } => Some(Self {
                kind: kind.clone(),
                holder: holder.clone(),
                target: target.clone(),
                intensity: *intensity,
                about: (**about).clone(),
                tick,
            }),
            _ => None,
        }
    }
}

/// Identity of a stored entry, independent of which view of it was matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactKey {
    Bel(Formula),
    Att(Formula),
    Int(Formula),
    Like(AgentId),
    Dom(AgentId),
}

/// Which reading of a stored attitude produced a desire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesireView {
    /// `Att(F ψ)=k` read as `Des^k ψ`.
    Future,
    /// `Att(G φ)=k` read as `Des^-k ¬φ`.
    IdealNegated,
    /// `Att(G φ)=k>0` read as `Des^k φ`. Only used for inconsistency checks.
    IdealAsDesire,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Desire {
    pub content: Formula,
    pub k: f64,
    pub view: DesireView,
}

/// Why a desire is or is not a goal.
#[derive(Debug, Clone, PartialEq)]
pub enum GoalStatus {
    Goal,
    /// Weakly inconsistent: leads to the negation of a stronger desire.
    Blocked { link: Formula, rival: Formula, rival_k: f64 },
    Unachievable,
    Achieved,
    BelowThreshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalCandidate {
    pub content: Formula,
    pub k: f64,
    pub status: GoalStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MentalStateData {
    beliefs: BTreeMap<Formula, Unit>,
    attitudes: BTreeMap<Formula, Signed>,
    intentions: BTreeSet<Formula>,
    emotions: Vec<EmotionInstance>,
    relations: BTreeMap<AgentId, Relation>,
    goals: Vec<(Formula, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MentalState {
    owner: AgentId,
    d: MentalStateData,
}

/// Splits outer negations off an attitude body and folds a negative desire
/// into the equivalent ideal. Returns the storage key and the degree to
/// store.
fn attitude_entry(body: Formula, k: f64) -> (Formula, f64) {
    let (mut body, mut k) = (body, k);
    loop {
        match body {
            Formula::Not(x) => {
                body = *x;
                k = -k;
            }
            Formula::Future(y) if k < 0.0 => {
                body = Formula::Globally(Box::new(negate(*y)));
                k = -k;
            }
            other => return (other, k),
        }
    }
}

/// The other key under which the same attitude may have been stored.
fn alternate_key(key: &Formula) -> Option<Formula> {
    match key {
        Formula::Future(y) => Some(Formula::Globally(Box::new(negate((**y).clone())))),
        Formula::Globally(z) => Some(Formula::Future(Box::new(negate((**z).clone())))),
        _ => None,
    }
}

/// Belief key and whether the formula is its complement. `G φ` is keyed
/// as the complement of `F ¬φ`.
fn positive(f: Formula) -> (Formula, bool) {
    match f {
        Formula::Not(x) => {
            let (key, neg) = positive(*x);
            (key, !neg)
        }
        Formula::Globally(x) => (Formula::Future(Box::new(negate(*x))), true),
        other => (other, false),
    }
}

impl MentalState {
    pub fn new(owner: AgentId) -> Self {
        Self {
            owner,
            d: MentalStateData::default(),
        }
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    pub fn is_empty(&self) -> bool {
        self.d == MentalStateData::default()
    }

    // ---- beliefs ----------------------------------------------------------

    /// Stores `Bel(φ)=l`; returns whether the store changed.
    pub fn assert_belief(&mut self, phi: &Formula, l: Unit) -> bool {
        let (key, neg) = positive(canonicalize(phi));
        let l = if neg { l.complement() } else { l };
        self.d.beliefs.insert(key, l) != Some(l)
    }

    /// Stored certainty of `φ`, its complement if `¬φ` is stored, or `None`
    /// when nothing is known. The agent is also certain of its own mental
    /// states.
    pub fn query_belief(&self, phi: &Formula) -> Option<Unit> {
        let phi = canonicalize(phi);
        let (key, neg) = positive(phi.clone());
        if let Some(l) = self.d.beliefs.get(&key) {
            return Some(if neg { l.complement() } else { *l });
        }
        self.introspect(&phi).then_some(Unit::ONE)
    }

    fn introspect(&self, phi: &Formula) -> bool {
        match phi {
            Formula::Bel(a, l, x) if *a == self.owner => self
                .query_belief(x)
                .is_some_and(|m| approx_eq(m.value(), l.value())),
            Formula::Att(a, k, x) if *a == self.owner => self
                .query_attitude(x)
                .is_some_and(|m| approx_eq(m.value(), k.value())),
            Formula::Int(a, x) if *a == self.owner => self.intends(x),
            Formula::Like(a, b, k) if *a == self.owner => self
                .relation(b)
                .like
                .is_some_and(|m| approx_eq(m.value(), k.value())),
            Formula::Dom(a, b, k) if *a == self.owner => self
                .relation(b)
                .dom
                .is_some_and(|m| approx_eq(m.value(), k.value())),
            _ => false,
        }
    }

    pub fn retract_belief(&mut self, phi: &Formula) -> bool {
        let (key, _) = positive(canonicalize(phi));
        self.d.beliefs.remove(&key).is_some()
    }

    /// Every stored belief in both readings: `(φ, l)` and `(¬φ, 1-l)`.
    pub fn belief_views(&self) -> Vec<(Formula, Unit)> {
        let mut out = Vec::with_capacity(self.d.beliefs.len() * 2);
        for (f, l) in &self.d.beliefs {
            out.push((f.clone(), *l));
            out.push((negate(f.clone()), l.complement()));
        }
        out
    }

    pub fn belief_count(&self) -> usize {
        self.d.beliefs.len()
    }

    // ---- attitudes --------------------------------------------------------

    /// Stores `Att(φ)=k`; the complementary reading and the alternate
    /// desire/ideal encoding are overwritten.
    pub fn assert_attitude(&mut self, phi: &Formula, k: Signed) -> bool {
        let (key, k) = attitude_entry(canonicalize(phi), k.value());
        let k = Signed::new(k).expect("negation stays in range");
        let mut changed = false;
        if let Some(alt) = alternate_key(&key) {
            changed |= self.d.attitudes.remove(&alt).is_some();
        }
        changed |= self.d.attitudes.insert(key, k) != Some(k);
        changed
    }

    pub fn query_attitude(&self, phi: &Formula) -> Option<Signed> {
        let (key, sign) = attitude_entry(canonicalize(phi), 1.0);
        if let Some(k) = self.d.attitudes.get(&key) {
            return Some(if sign < 0.0 { k.negated() } else { *k });
        }
        let alt = alternate_key(&key)?;
        self.d
            .attitudes
            .get(&alt)
            .map(|k| if sign < 0.0 { *k } else { k.negated() })
    }

    /// Stored attitudes as `(body, k)` in canonical storage form.
    pub fn attitudes(&self) -> impl Iterator<Item = (&Formula, Signed)> {
        self.d.attitudes.iter().map(|(f, k)| (f, *k))
    }

    /// Desires in every reading (see [`DesireView`]).
    pub fn desires(&self) -> Vec<Desire> {
        let mut out = Vec::new();
        for (body, k) in &self.d.attitudes {
            let k = k.value();
            match body {
                Formula::Future(psi) => out.push(Desire {
                    content: (**psi).clone(),
                    k,
                    view: DesireView::Future,
                }),
                Formula::Globally(phi) => {
                    out.push(Desire {
                        content: negate((**phi).clone()),
                        k: -k,
                        view: DesireView::IdealNegated,
                    });
                    if k > 0.0 {
                        out.push(Desire {
                            content: (**phi).clone(),
                            k,
                            view: DesireView::IdealAsDesire,
                        });
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Strongest-magnitude desire degree for `φ` over all readings.
    pub fn query_desire(&self, phi: &Formula) -> Option<f64> {
        let phi = canonicalize(phi);
        self.desires()
            .into_iter()
            .filter(|d| unifies(&d.content, &phi))
            .map(|d| d.k)
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
    }

    // ---- intentions -------------------------------------------------------

    /// Adds an intention unless its negation, in any form, is already
    /// intended.
    pub fn add_intention(&mut self, phi: &Formula) -> Result<bool, StateError> {
        let phi = canonicalize(phi);
        let (key, neg) = positive(phi.clone());
        let conflict = self.d.intentions.iter().any(|i| {
            let (k, n) = positive(i.clone());
            k == key && n != neg
        });
        if conflict {
            return Err(StateError::ConflictingIntention(phi.to_string()));
        }
        Ok(self.d.intentions.insert(phi))
    }

    pub fn remove_intention(&mut self, phi: &Formula) -> bool {
        self.d.intentions.remove(&canonicalize(phi))
    }

    pub fn intends(&self, phi: &Formula) -> bool {
        self.d.intentions.contains(&canonicalize(phi))
    }

    pub fn intentions(&self) -> impl Iterator<Item = &Formula> {
        self.d.intentions.iter()
    }

    // ---- relations --------------------------------------------------------

    pub fn relation(&self, other: &AgentId) -> Relation {
        self.d.relations.get(other).copied().unwrap_or_default()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&AgentId, &Relation)> {
        self.d.relations.iter()
    }

    pub fn set_like(&mut self, other: &AgentId, k: Signed) -> bool {
        let r = self.d.relations.entry(other.clone()).or_default();
        r.like.replace(k) != Some(k)
    }

    pub fn set_dom(&mut self, other: &AgentId, k: Signed) -> bool {
        let r = self.d.relations.entry(other.clone()).or_default();
        r.dom.replace(k) != Some(k)
    }

    // ---- emotions and goals ----------------------------------------------

    pub fn emotions(&self) -> &[EmotionInstance] {
        &self.d.emotions
    }

    pub fn set_emotions(&mut self, mut emotions: Vec<EmotionInstance>) -> Result<(), StateError> {
        if let Some(e) = emotions.iter().find(|e| !e.about.is_atemporal()) {
            return Err(StateError::TemporalEmotion(e.about.to_string()));
        }
        emotions.sort();
        self.d.emotions = emotions;
        Ok(())
    }

    /// Goals as last ordered by the engine.
    pub fn goals(&self) -> &[(Formula, f64)] {
        &self.d.goals
    }

    pub fn set_goals(&mut self, goals: Vec<(Formula, f64)>) {
        self.d.goals = goals;
    }

    // ---- generic fact access ---------------------------------------------

    /// Applies a canonical fact formula owned by this agent: a belief,
    /// attitude, intention or relation. Returns whether the store changed.
    pub fn assert_fact(&mut self, f: &Formula) -> Result<bool, StateError> {
        Ok(match canonicalize(f) {
            Formula::Bel(a, l, x) if a == self.owner => self.assert_belief(&x, l),
            Formula::Att(a, k, x) if a == self.owner => self.assert_attitude(&x, k),
            Formula::Int(a, x) if a == self.owner => self.add_intention(&x)?,
            Formula::Like(a, b, k) if a == self.owner => self.set_like(&b, k),
            Formula::Dom(a, b, k) if a == self.owner => self.set_dom(&b, k),
            // anything else is a plain belief
            other => self.assert_belief(&other, Unit::ONE),
        })
    }

    /// Whether asserting `f` would change nothing.
    pub fn holds_fact(&self, f: &Formula) -> bool {
        match canonicalize(f) {
            Formula::Bel(a, l, x) if a == self.owner => {
                let (key, neg) = positive(x.as_ref().clone());
                self.d
                    .beliefs
                    .get(&key)
                    .is_some_and(|m| *m == if neg { l.complement() } else { l })
            }
            Formula::Att(a, k, x) if a == self.owner => {
                let (key, k) = attitude_entry(*x, k.value());
                self.d
                    .attitudes
                    .get(&key)
                    .is_some_and(|m| (m.value() - k).abs() < EPS)
            }
            Formula::Int(a, x) if a == self.owner => self.intends(&x),
            Formula::Like(a, b, k) if a == self.owner => self.relation(&b).like == Some(k),
            Formula::Dom(a, b, k) if a == self.owner => self.relation(&b).dom == Some(k),
            other => self.query_belief(&other) == Some(Unit::ONE),
        }
    }

    /// All matchable facts with their storage key. Beliefs at or below
    /// `floor` are left out (pass `None` for every belief).
    pub fn facts(&self, floor: Option<f64>) -> Vec<(Formula, FactKey)> {
        let me = &self.owner;
        let mut out = Vec::new();
        for (f, l) in &self.d.beliefs {
            for (content, deg) in [(f.clone(), *l), (negate(f.clone()), l.complement())] {
                if floor.is_none_or(|m| gt(deg.value(), m)) {
                    out.push((Formula::bel(me, deg, content), FactKey::Bel(f.clone())));
                }
            }
        }
        for (body, k) in &self.d.attitudes {
            out.push((Formula::att(me, *k, body.clone()), FactKey::Att(body.clone())));
            if !matches!(body, Formula::Future(_) | Formula::Globally(_)) {
                out.push((
                    Formula::att(me, k.negated(), negate(body.clone())),
                    FactKey::Att(body.clone()),
                ));
            }
        }
        for i in &self.d.intentions {
            out.push((Formula::int(me, i.clone()), FactKey::Int(i.clone())));
        }
        for (b, r) in &self.d.relations {
            if let Some(k) = r.like {
                out.push((Formula::Like(me.clone(), b.clone(), k), FactKey::Like(b.clone())));
            }
            if let Some(k) = r.dom {
                out.push((Formula::Dom(me.clone(), b.clone(), k), FactKey::Dom(b.clone())));
            }
        }
        out
    }

    /// Storage key for a fact formula produced by [`MentalState::facts`] or
    /// about to be asserted.
    pub fn key_of(&self, f: &Formula) -> Option<FactKey> {
        match canonicalize(f) {
            Formula::Bel(a, _, x) if a == self.owner => Some(FactKey::Bel(positive(*x).0)),
            Formula::Att(a, k, x) if a == self.owner => {
                Some(FactKey::Att(attitude_entry(*x, k.value()).0))
            }
            Formula::Int(a, x) if a == self.owner => Some(FactKey::Int(*x)),
            Formula::Like(a, b, _) if a == self.owner => Some(FactKey::Like(b)),
            Formula::Dom(a, b, _) if a == self.owner => Some(FactKey::Dom(b)),
            _ => None,
        }
    }

    /// Sorted, line-per-fact export of the whole state.
    pub fn snapshot(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .d
            .beliefs
            .iter()
            .map(|(f, l)| Formula::bel(&self.owner, *l, f.clone()).to_string())
            .chain(
                self.d
                    .attitudes
                    .iter()
                    .map(|(f, k)| Formula::att(&self.owner, *k, f.clone()).to_string()),
            )
            .chain(
                self.d
                    .intentions
                    .iter()
                    .map(|f| Formula::int(&self.owner, f.clone()).to_string()),
            )
            .chain(self.d.relations.iter().flat_map(|(b, r)| {
                let me = self.owner.clone();
                r.like
                    .map(|k| Formula::Like(me.clone(), b.clone(), k).to_string())
                    .into_iter()
                    .chain(r.dom.map(|k| Formula::Dom(me.clone(), b.clone(), k).to_string()))
            }))
            .chain(self.d.emotions.iter().map(|e| e.to_formula().to_string()))
            .collect();
        lines.sort();
        lines
    }

    // ---- derived operators -----------------------------------------------

    fn strong_links<'a>(
        &'a self,
        th: &'a Thresholds,
        antecedent: &'a Formula,
    ) -> impl Iterator<Item = (Formula, Formula)> + 'a {
        self.belief_views().into_iter().filter_map(move |(f, l)| {
            if !gt(l.value(), th.str_th) {
                return None;
            }
            match &f {
                Formula::Implies(a, c) if unifies(a, antecedent) => Some((f.clone(), (**c).clone())),
                _ => None,
            }
        })
    }

    /// Desiring `ψ` is inconsistent: `ψ` strongly leads to `¬χ` with `χ`
    /// desired, or to `χ` with `χ` undesired.
    pub fn inc_des(&self, th: &Thresholds, psi: &Formula) -> Option<(Formula, Formula, f64)> {
        let psi = canonicalize(psi);
        let desires = self.desires();
        for (link, conseq) in self.strong_links(th, &psi) {
            let neg = negate(conseq.clone());
            for d in &desires {
                if (d.k > 0.0 && unifies(&d.content, &neg))
                    || (d.k < 0.0 && unifies(&d.content, &conseq))
                {
                    return Some((link, d.content.clone(), d.k));
                }
            }
        }
        None
    }

    /// Weak inconsistency: `φ` strongly leads to `¬ψ` with `ψ` desired more
    /// strongly than `|k|`.
    pub fn winc_des(&self, th: &Thresholds, k: f64, phi: &Formula) -> Option<(Formula, Formula, f64)> {
        let phi = canonicalize(phi);
        let desires = self.desires();
        for (link, conseq) in self.strong_links(th, &phi) {
            let neg = negate(conseq);
            for d in &desires {
                if gt(d.k.abs(), k.abs()) && unifies(&d.content, &neg) {
                    return Some((link, d.content.clone(), d.k));
                }
            }
        }
        None
    }

    /// Believed achievable: some `Bel(F φ)` above zero, or `φ` is an act of
    /// the owner.
    pub fn achievable(&self, phi: &Formula) -> bool {
        if let Formula::Event(e) = phi {
            if e.is_concrete() && e.actor == crate::logic::Slot::Agent(self.owner.clone()) {
                return true;
            }
        }
        self.belief_views().into_iter().any(|(f, l)| {
            l.value() > 0.0 && matches!(&f, Formula::Future(x) if unifies(x, phi))
        })
    }

    /// An event the owner is certain already happened.
    pub fn achieved(&self, phi: &Formula) -> bool {
        matches!(phi, Formula::Event(_))
            && self
                .belief_views()
                .into_iter()
                .any(|(f, l)| l.value() >= 1.0 - EPS && unifies(&f, phi))
    }

    /// Every desire read as `Att(F·)` or through its ideal encoding, with
    /// its goal status.
    pub fn goal_candidates(&self, th: &Thresholds) -> Vec<GoalCandidate> {
        let mut seen: BTreeMap<Formula, f64> = BTreeMap::new();
        for d in self.desires() {
            if d.view == DesireView::IdealAsDesire {
                continue;
            }
            let e = seen.entry(d.content).or_insert(d.k);
            if d.k > *e {
                *e = d.k;
            }
        }
        seen.into_iter()
            .map(|(content, k)| {
                let status = if !gt(k, th.des_th) {
                    GoalStatus::BelowThreshold
                } else if !self.achievable(&content) {
                    GoalStatus::Unachievable
                } else if self.achieved(&content) {
                    GoalStatus::Achieved
                } else if let Some((link, rival, rival_k)) = self.winc_des(th, k, &content) {
                    GoalStatus::Blocked {
                        link,
                        rival,
                        rival_k,
                    }
                } else {
                    GoalStatus::Goal
                };
                GoalCandidate { content, k, status }
            })
            .collect()
    }

    /// Goals ordered by degree descending, then by serialized formula.
    pub fn compute_goals(&self, th: &Thresholds) -> Vec<(Formula, f64)> {
        let mut goals: Vec<(Formula, f64)> = self
            .goal_candidates(th)
            .into_iter()
            .filter(|c| c.status == GoalStatus::Goal)
            .map(|c| (c.content, c.k))
            .collect();
        order_goals(&mut goals);
        goals
    }

    pub fn query_goal(&self, th: &Thresholds, phi: &Formula) -> Option<f64> {
        let phi = canonicalize(phi);
        self.compute_goals(th)
            .into_iter()
            .find(|(g, _)| *g == phi)
            .map(|(_, k)| k)
    }

    /// The other agent's state as this agent strongly believes it to be.
    pub fn attributed_view(&self, other: &AgentId, th: &Thresholds) -> MentalState {
        self.attributed_view_with_support(other, th).0
    }

    /// Like [`MentalState::attributed_view`], also returning for each entry
    /// of the view the owner's certainty about it.
    pub fn attributed_view_with_support(
        &self,
        other: &AgentId,
        th: &Thresholds,
    ) -> (MentalState, BTreeMap<FactKey, f64>) {
        let mut view = MentalState::new(other.clone());
        let mut support = BTreeMap::new();
        for (f, l) in self.belief_views() {
            if !gt(l.value(), th.str_th) {
                continue;
            }
            let attributed = match &f {
                Formula::Bel(a, ..)
                | Formula::Att(a, ..)
                | Formula::Int(a, _)
                | Formula::Like(a, ..)
                | Formula::Dom(a, ..) => a == other,
                _ => false,
            };
            if !attributed {
                continue;
            }
            if let (Ok(true), Some(key)) = (view.assert_fact(&f), view.key_of(&f)) {
                support.insert(key, l.value());
            }
        }
        (view, support)
    }
}

/// Degree descending, then serialized formula.
pub fn order_goals(goals: &mut [(Formula, f64)]) {
    goals.sort_by(|(fa, ka), (fb, kb)| {
        kb.total_cmp(ka)
            .then_with(|| fa.to_string().cmp(&fb.to_string()))
    });
}

/// Serializable copy of a state for export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub owner: String,
    pub facts: Vec<String>,
}

impl From<&MentalState> for Snapshot {
    fn from(s: &MentalState) -> Self {
        Snapshot {
            owner: s.owner.to_string(),
            facts: s.snapshot(),
        }
    }
}
