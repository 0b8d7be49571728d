//! Finite possible-world models for checking graded-belief semantics.
//!
//! A model has up to 16 worlds stored as bitmasks. `Bel^l φ` holds at `w`
//! when the share of belief-accessible worlds satisfying `φ` is exactly `l`;
//! degrees are read as rationals with denominator at most 64 and compared
//! exactly.
//!
//! The event condition is vacuous: an event holds wherever all the worlds of
//! its extension exist, which every well-formed model guarantees.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use thiserror::Error;

use crate::degree::{Signed, Unit};
use crate::exec::Exec;
use crate::logic::{AgentId, Formula};

pub type Mask = u16;
pub const MAX_WORLDS: usize = 16;
/// Largest world count `enumerate_models` accepts.
pub const MAX_ENUM_WORLDS: usize = 5;
const MAX_DENOM: i64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("undefined proportion: {agent} has no belief-accessible world at w{world}")]
    UndefinedProportion { agent: String, world: usize },
    #[error("unsupported construct in the model semantics: {0}")]
    Unsupported(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("degree {0} is not a fraction with denominator at most 64")]
    Irrational(f64),
    #[error("enumeration bounds too large: {0}")]
    Bounds(String),
}

/// Per-agent accessibility relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentFrame {
    /// `b[w]`: worlds belief-accessible from `w`.
    pub b: Vec<Mask>,
    /// `i[w]`: worlds compatible with the agent's intentions at `w`.
    pub i: Vec<Mask>,
    /// `d[w]`: desire-accessible worlds per level. Missing levels are empty.
    pub d: Vec<BTreeMap<Ratio<i64>, Mask>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteModel {
    pub worlds: usize,
    pub atoms: Vec<String>,
    /// `val[w]`: bitmask over `atoms` true at `w`.
    pub val: Vec<u32>,
    pub agents: Vec<AgentId>,
    pub frames: Vec<AgentFrame>,
    /// Event extensions, keyed by the rendered event.
    pub events: BTreeMap<String, Mask>,
}

/// Converts a degree to the nearest fraction with a small denominator.
pub fn to_ratio(x: f64) -> Result<Ratio<i64>, OracleError> {
    for q in 1..=MAX_DENOM {
        let p = (x * q as f64).round();
        if (p / q as f64 - x).abs() < 1e-9 {
            return Ok(Ratio::new(p as i64, q));
        }
    }
    Err(OracleError::Irrational(x))
}

fn bits(m: Mask) -> impl Iterator<Item = usize> {
    (0..MAX_WORLDS).filter(move |i| m & (1 << i) != 0)
}

impl FiniteModel {
    fn all(&self) -> Mask {
        ((1u32 << self.worlds) - 1) as Mask
    }

    fn agent(&self, a: &AgentId) -> Result<&AgentFrame, OracleError> {
        self.agents
            .iter()
            .position(|x| x == a)
            .map(|i| &self.frames[i])
            .ok_or_else(|| OracleError::UnknownAgent(a.to_string()))
    }

    /// The set of worlds where `f` holds.
    pub fn extension(&self, f: &Formula) -> Result<Mask, OracleError> {
        self.extension_in(self.all(), f)
    }

    /// The worlds of `within` where `f` holds. Worlds outside `within` are
    /// not evaluated, so undefinedness there does not leak in.
    pub fn extension_in(&self, within: Mask, f: &Formula) -> Result<Mask, OracleError> {
        let mut m = 0;
        for w in bits(within & self.all()) {
            if self.eval(w, f)? {
                m |= 1 << w;
            }
        }
        Ok(m)
    }

    pub fn eval(&self, w: usize, f: &Formula) -> Result<bool, OracleError> {
        Ok(match f {
            Formula::Atom(s) => {
                let i = self
                    .atoms
                    .iter()
                    .position(|a| a == s.as_str())
                    .ok_or_else(|| OracleError::UnknownAtom(s.to_string()))?;
                self.val[w] & (1 << i) != 0
            }
            Formula::Not(x) => !self.eval(w, x)?,
            // both sides are evaluated so that undefinedness is symmetric
            Formula::And(a, b) => {
                let (x, y) = (self.eval(w, a)?, self.eval(w, b)?);
                x && y
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.eval(w, a)?, self.eval(w, b)?);
                !x || y
            }
            Formula::Bel(a, l, x) => {
                let acc = self.agent(a)?.b[w];
                if acc == 0 {
                    return Err(OracleError::UndefinedProportion {
                        agent: a.to_string(),
                        world: w,
                    });
                }
                let want = to_ratio(l.value())?;
                let sat = self.extension_in(acc, x)?;
                Ratio::new(sat.count_ones() as i64, acc.count_ones() as i64) == want
            }
            Formula::Att(a, k, body) => match body.as_ref() {
                Formula::Future(x) => {
                    let level = to_ratio(k.value())?;
                    let acc = self.agent(a)?.d[w].get(&level).copied().unwrap_or(0);
                    self.extension_in(acc, x)? == acc
                }
                _ => return Err(OracleError::Unsupported(f.to_string())),
            },
            Formula::Int(a, x) => {
                let acc = self.agent(a)?.i[w];
                self.extension_in(acc, x)? == acc
            }
            Formula::Event(e) => {
                let ext = self.events.get(&e.to_string()).copied().unwrap_or(0);
                ext & !self.all() == 0
            }
            _ => return Err(OracleError::Unsupported(f.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FrameProperty {
    /// `wBv ∧ vBu → wBu`.
    Transitive,
    /// `wBv ∧ wBu → vBu`.
    Euclidean,
    /// `I(w)` nonempty.
    Serial,
    /// A relation points outside the model.
    Range,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub agent: String,
    pub property: FrameProperty,
    pub worlds: Vec<usize>,
}

fn transitive_violations(rel: &[Mask]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (w, &bw) in rel.iter().enumerate() {
        for v in bits(bw) {
            for u in bits(rel[v]) {
                if bw & (1 << u) == 0 {
                    out.push(vec![w, v, u]);
                }
            }
        }
    }
    out
}

fn euclidean_violations(rel: &[Mask]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (w, &bw) in rel.iter().enumerate() {
        for v in bits(bw) {
            for u in bits(bw) {
                if rel[v] & (1 << u) == 0 {
                    out.push(vec![w, v, u]);
                }
            }
        }
    }
    out
}

/// Every violation of: B transitive and euclidean, I serial, all relations
/// inside the model.
pub fn check_frame(m: &FiniteModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let all = m.all();
    for (a, fr) in m.agents.iter().zip(&m.frames) {
        let push = |out: &mut Vec<Violation>, property, worlds| {
            out.push(Violation {
                agent: a.to_string(),
                property,
                worlds,
            })
        };
        for w in 0..m.worlds {
            let stray = fr.b[w] | fr.i[w] | fr.d[w].values().fold(0, |x, y| x | y);
            if stray & !all != 0 {
                push(&mut out, FrameProperty::Range, vec![w]);
            }
            if fr.i[w] == 0 {
                push(&mut out, FrameProperty::Serial, vec![w]);
            }
        }
        for ws in transitive_violations(&fr.b) {
            push(&mut out, FrameProperty::Transitive, ws);
        }
        for ws in euclidean_violations(&fr.b) {
            push(&mut out, FrameProperty::Euclidean, ws);
        }
    }
    out
}

/// Bounds of an exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpace {
    pub atoms: usize,
    pub worlds: usize,
    pub agents: usize,
}

fn atom_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn agent_names(n: usize) -> Vec<AgentId> {
    (0..n)
        .map(|i| AgentId::new(&format!("A{i}")).expect("valid name"))
        .collect()
}

/// All relations over `n` worlds, as one mask per world.
fn relations(n: usize) -> impl Iterator<Item = Vec<Mask>> {
    let total: u64 = 1 << (n * n);
    (0..total).map(move |code| {
        (0..n)
            .map(|w| ((code >> (w * n)) & ((1 << n) - 1)) as Mask)
            .collect()
    })
}

impl ModelSpace {
    pub fn new(atoms: usize, worlds: usize, agents: usize) -> Result<Self, OracleError> {
        if worlds == 0 || worlds > MAX_ENUM_WORLDS {
            return Err(OracleError::Bounds(format!(
                "worlds must be 1..={MAX_ENUM_WORLDS}, got {worlds}"
            )));
        }
        if atoms > 4 || agents == 0 || agents > 2 {
            return Err(OracleError::Bounds(format!(
                "need atoms <= 4 and 1..=2 agents, got {atoms} atoms and {agents} agents"
            )));
        }
        Ok(Self { atoms, worlds, agents })
    }

    /// Belief relations that are transitive and euclidean.
    pub fn belief_relations(&self) -> Vec<Vec<Mask>> {
        relations(self.worlds)
            .filter(|r| transitive_violations(r).is_empty() && euclidean_violations(r).is_empty())
            .collect()
    }

    /// Serial intention relations.
    pub fn intention_relations(&self) -> Vec<Vec<Mask>> {
        relations(self.worlds)
            .filter(|r| r.iter().all(|&m| m != 0))
            .collect()
    }

    fn frames(&self) -> Vec<AgentFrame> {
        let bs = self.belief_relations();
        let is = self.intention_relations();
        let mut out = Vec::with_capacity(bs.len() * is.len());
        for b in &bs {
            for i in &is {
                out.push(AgentFrame {
                    b: b.clone(),
                    i: i.clone(),
                    d: vec![BTreeMap::new(); self.worlds],
                });
            }
        }
        out
    }

    pub fn valuations(&self) -> u64 {
        1u64 << (self.atoms * self.worlds)
    }

    fn model(&self, val_code: u64, frames: Vec<AgentFrame>) -> FiniteModel {
        let per = (1u64 << self.atoms) - 1;
        FiniteModel {
            worlds: self.worlds,
            atoms: atom_names(self.atoms),
            val: (0..self.worlds)
                .map(|w| ((val_code >> (w * self.atoms)) & per) as u32)
                .collect(),
            agents: agent_names(self.agents),
            frames,
            events: BTreeMap::new(),
        }
    }

    /// Every admissible model with the given valuation code, in a fixed
    /// order. Desire relations are left empty.
    pub fn models_for_valuation(&self, val_code: u64) -> impl Iterator<Item = FiniteModel> + '_ {
        let frames = self.frames();
        let k = frames.len();
        let combos = (k as u64).pow(self.agents as u32);
        (0..combos).map(move |mut c| {
            let mut fs = Vec::with_capacity(self.agents);
            for _ in 0..self.agents {
                fs.push(frames[(c % k as u64) as usize].clone());
                c /= k as u64;
            }
            self.model(val_code, fs)
        })
    }

    /// Every admissible model, in a fixed order.
    pub fn models(&self) -> impl Iterator<Item = FiniteModel> + '_ {
        (0..self.valuations()).flat_map(move |v| self.models_for_valuation(v))
    }
}

/// Exhaustive, deterministic enumeration of admissible models.
pub fn enumerate_models(atoms: usize, worlds: usize, agents: usize) -> Result<Vec<FiniteModel>, OracleError> {
    let s = ModelSpace::new(atoms, worlds, agents)?;
    Ok(s.models().collect())
}

/// Formulas probed by the soundness sweep.
pub fn probe_formulas(atoms: &[String], agents: &[AgentId]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    let ps: Vec<Formula> = atoms.iter().map(|a| Formula::atom(a)).collect();
    for p in &ps {
        out.push(p.clone());
        out.push(Formula::not(p.clone()));
    }
    if ps.len() >= 2 {
        out.push(Formula::and(ps[0].clone(), ps[1].clone()));
        out.push(Formula::implies(ps[0].clone(), ps[1].clone()));
    }
    for a in agents {
        for p in &ps {
            out.push(Formula::int(a, p.clone()));
            out.push(Formula::bel(a, Unit::new(0.5).expect("unit"), p.clone()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub law: &'static str,
    pub world: usize,
    pub formula: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub models: u64,
    pub checks: u64,
    pub skipped_empty: u64,
    pub frame_violations: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepReport {
    fn merge(mut self, o: SweepReport) -> SweepReport {
        self.models += o.models;
        self.checks += o.checks;
        self.skipped_empty += o.skipped_empty;
        self.frame_violations += o.frame_violations;
        self.counterexamples.extend(o.counterexamples);
        self
    }
}

fn unit(r: Ratio<i64>) -> Unit {
    Unit::new(*r.numer() as f64 / *r.denom() as f64).expect("ratio in [0,1]")
}

/// Checks, on one model, for every world with a nonempty belief image and
/// every probe formula `φ` with actual share `l`:
/// introspection, `Bel^l φ → Bel^1 Bel^l φ`, and complement,
/// `Bel^l φ → Bel^{1-l} ¬φ`.
pub fn check_model(m: &FiniteModel, probes: &[Formula]) -> SweepReport {
    let mut rep = SweepReport {
        models: 1,
        frame_violations: check_frame(m).len() as u64,
        ..Default::default()
    };
    let mut fail = |law: &'static str, w: usize, f: &Formula| {
        rep.counterexamples.push(Counterexample {
            law,
            world: w,
            formula: f.to_string(),
            model: format!("{m:?}"),
        })
    };
    let mut checks = 0;
    let mut skipped = 0;
    for (a, fr) in m.agents.iter().zip(&m.frames) {
        for w in 0..m.worlds {
            let acc = fr.b[w];
            if acc == 0 {
                skipped += 1;
                continue;
            }
            for phi in probes {
                let Ok(ext) = m.extension(phi) else {
                    // nested belief undefined somewhere; not a law instance
                    continue;
                };
                let l = Ratio::new((ext & acc).count_ones() as i64, acc.count_ones() as i64);
                let bel = Formula::bel(a, unit(l), phi.clone());
                checks += 2;
                match m.eval(w, &bel) {
                    Ok(true) => {}
                    _ => {
                        fail("share", w, phi);
                        continue;
                    }
                }
                let intro = Formula::bel(a, Unit::ONE, bel.clone());
                if m.eval(w, &intro) != Ok(true) {
                    fail("introspection", w, phi);
                }
                let comp = Formula::bel(a, unit(Ratio::from_integer(1) - l), Formula::not(phi.clone()));
                if m.eval(w, &comp) != Ok(true) {
                    fail("complement", w, phi);
                }
            }
        }
    }
    rep.checks = checks;
    rep.skipped_empty = skipped;
    rep
}

/// Runs [`check_model`] over the whole space, partitioned by valuation.
pub fn soundness_sweep(space: &ModelSpace, exec: Exec) -> SweepReport {
    let probes = probe_formulas(&atom_names(space.atoms), &agent_names(space.agents));
    let parts = exec.map_range(space.valuations() as usize, |v| {
        space
            .models_for_valuation(v as u64)
            .map(|m| check_model(&m, &probes))
            .fold(SweepReport::default(), SweepReport::merge)
    });
    parts.into_iter().fold(SweepReport::default(), SweepReport::merge)
}

/// A second, deliberately naive evaluator over adjacency matrices, sharing
/// nothing with [`FiniteModel::eval`] beyond the model data.
pub mod recount {
    use super::*;

    fn related(m: &Mask, v: usize) -> bool {
        (m >> v) & 1 == 1
    }

    pub fn eval(m: &FiniteModel, w: usize, f: &Formula) -> Result<bool, OracleError> {
        match f {
            Formula::Atom(s) => {
                for (i, a) in m.atoms.iter().enumerate() {
                    if a == s.as_str() {
                        return Ok((m.val[w] >> i) & 1 == 1);
                    }
                }
                Err(OracleError::UnknownAtom(s.to_string()))
            }
            Formula::Not(x) => eval(m, w, x).map(|b| !b),
            Formula::And(a, b) => {
                let x = eval(m, w, a)?;
                let y = eval(m, w, b)?;
                Ok(x && y)
            }
            Formula::Implies(a, b) => {
                let x = eval(m, w, a)?;
                let y = eval(m, w, b)?;
                Ok(!x || y)
            }
            Formula::Bel(a, l, x) => {
                let fr = frame(m, a)?;
                let mut total = 0i64;
                let mut yes = 0i64;
                for v in 0..m.worlds {
                    if related(&fr.b[w], v) {
                        total += 1;
                        if eval(m, v, x)? {
                            yes += 1;
                        }
                    }
                }
                if total == 0 {
                    return Err(OracleError::UndefinedProportion {
                        agent: a.to_string(),
                        world: w,
                    });
                }
                // yes/total == p/q  <=>  yes*q == p*total
                let r = to_ratio(l.value())?;
                Ok(yes * r.denom() == r.numer() * total)
            }
            Formula::Att(a, k, body) => {
                let Formula::Future(x) = body.as_ref() else {
                    return Err(OracleError::Unsupported(f.to_string()));
                };
                let fr = frame(m, a)?;
                let r = to_ratio(k.value())?;
                let acc = fr.d[w].iter().find(|(lv, _)| **lv == r).map_or(0, |(_, m)| *m);
                let mut all = true;
                for v in 0..m.worlds {
                    if related(&acc, v) {
                        all &= eval(m, v, x)?;
                    }
                }
                Ok(all)
            }
            Formula::Int(a, x) => {
                let fr = frame(m, a)?;
                let mut all = true;
                for v in 0..m.worlds {
                    if related(&fr.i[w], v) {
                        all &= eval(m, v, x)?;
                    }
                }
                Ok(all)
            }
            Formula::Event(e) => {
                let ext = m.events.get(&e.to_string()).copied().unwrap_or(0);
                Ok((m.worlds..MAX_WORLDS).all(|v| !related(&ext, v)))
            }
            other => Err(OracleError::Unsupported(other.to_string())),
        }
    }

    fn frame<'a>(m: &'a FiniteModel, a: &AgentId) -> Result<&'a AgentFrame, OracleError> {
        for (x, fr) in m.agents.iter().zip(&m.frames) {
            if x == a {
                return Ok(fr);
            }
        }
        Err(OracleError::UnknownAgent(a.to_string()))
    }
}

/// A random model, not necessarily admissible. Desire relations are filled
/// for the levels -1, -1/2, 0, 1/2 and 1.
pub fn random_model<R: Rng>(rng: &mut R, worlds: usize, atoms: usize, agents: usize) -> FiniteModel {
    let full: Mask = ((1u32 << worlds) - 1) as Mask;
    let levels = [-1, -1, 0, 1, 1]
        .iter()
        .zip([1, 2, 1, 2, 1])
        .map(|(p, q)| Ratio::new(*p, q));
    let levels: Vec<Ratio<i64>> = levels.collect();
    let frames = (0..agents)
        .map(|_| AgentFrame {
            b: (0..worlds).map(|_| rng.gen::<Mask>() & full).collect(),
            i: (0..worlds).map(|_| rng.gen::<Mask>() & full).collect(),
            d: (0..worlds)
                .map(|_| levels.iter().map(|l| (*l, rng.gen::<Mask>() & full)).collect())
                .collect(),
        })
        .collect();
    FiniteModel {
        worlds,
        atoms: atom_names(atoms),
        val: (0..worlds).map(|_| rng.gen::<u32>() & ((1 << atoms) - 1)).collect(),
        agents: agent_names(agents),
        frames,
        events: BTreeMap::new(),
    }
}

/// A random formula over the model's vocabulary, with degrees that are
/// small fractions.
pub fn random_formula<R: Rng>(rng: &mut R, m: &FiniteModel, depth: usize) -> Formula {
    let atom = |rng: &mut R| Formula::atom(&m.atoms[rng.gen_range(0..m.atoms.len())]);
    if depth == 0 {
        return atom(rng);
    }
    let agent = m.agents[rng.gen_range(0..m.agents.len())].clone();
    let sub = |rng: &mut R| random_formula(rng, m, depth - 1);
    match rng.gen_range(0..7) {
        0 => atom(rng),
        1 => Formula::not(sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => {
            let q = rng.gen_range(1..=4);
            let p = rng.gen_range(0..=q);
            Formula::bel(&agent, Unit::new(p as f64 / q as f64).expect("unit"), sub(rng))
        }
        5 => {
            let k = [-1.0, -0.5, 0.0, 0.5, 1.0][rng.gen_range(0..5)];
            Formula::Att(agent, Signed::new(k).expect("signed"), Box::new(Formula::future(sub(rng))))
        }
        _ => Formula::int(&agent, sub(rng)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossCheck {
    pub models: usize,
    pub formulas: usize,
    pub mismatches: Vec<String>,
}

/// Evaluates random formulas on random models with both evaluators.
pub fn cross_check(seed: u64, models: usize, formulas_per_model: usize, exec: Exec) -> CrossCheck {
    use rand::SeedableRng;
    let parts = exec.map_range(models, |i| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let worlds = rng.gen_range(1..=5);
        let atoms = rng.gen_range(1..=3);
        let agents = rng.gen_range(1..=2);
        let m = random_model(&mut rng, worlds, atoms, agents);
        let mut bad = Vec::new();
        for _ in 0..formulas_per_model {
            let f = random_formula(&mut rng, &m, 3);
            for w in 0..m.worlds {
                let a = m.eval(w, &f);
                let b = recount::eval(&m, w, &f);
                // both must agree on truth; errors must agree on being errors
                if a.is_ok() != b.is_ok() || (a.is_ok() && a != b) {
                    bad.push(format!("model {i}, w{w}, {f}: {a:?} vs {b:?}"));
                }
            }
        }
        bad
    });
    CrossCheck {
        models,
        formulas: models * formulas_per_model,
        mismatches: parts.into_iter().flatten().collect(),
    }
}
