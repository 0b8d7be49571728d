//! Emotional appraisal: the intensity function and swappable appraisal
//! theories.
//!
//! A theory is a text file (see `rules/occ_default.theory`) declaring emotion
//! kinds with their valence, one rule per kind and optional specificity
//! preferences. Rules are ordinary folk rules whose single effect is
//! `N(Emo(...))`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folk::{Firing, FolkError, Matcher, Produced};
use crate::logic::EmotionKind;
use crate::rules::{Rule, Timing};
use crate::state::{EmotionInstance, MentalState};

/// `ln` of the smallest positive normal `f64`, about -708.396.
pub const L_MIN: f64 = -708.396_418_532_264_1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    /// `0.5 + (m/2)(1 - ln(2l-1)/L_MIN)`, clamped to `[0.5, 1]`.
    #[default]
    Normalized,
    /// The historical closed form `(k/2)(ln(2l-1) - L_MIN)/L_MIN + 0.5`. It
    /// tends to `0.5 - k/2` as `l → 1`, so strong beliefs give weak emotions.
    /// Kept for comparison only.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntensityError {
    #[error("below certainty floor: intensity needs l > 0.5, got {0}")]
    BelowFloor(f64),
}

/// Emotion intensity from a certainty `l` and attitude `k`. Extra degrees are
/// folded in by averaging magnitudes with `|k|`.
pub fn intensity(l: f64, k: f64, extras: &[f64], mode: IntensityMode) -> Result<f64, IntensityError> {
    // written negated so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(l > 0.5) {
        return Err(IntensityError::BelowFloor(l));
    }
    let log = (2.0 * l - 1.0).ln().max(L_MIN);
    let out = match mode {
        IntensityMode::Normalized => {
            let m = (k.abs() + extras.iter().map(|x| x.abs()).sum::<f64>())
                / (1 + extras.len()) as f64;
            (0.5 + (m / 2.0) * (1.0 - log / L_MIN)).clamp(0.5, 1.0)
        }
        IntensityMode::Literal => ((k / 2.0) * (log - L_MIN) / L_MIN + 0.5).clamp(0.0, 1.0),
    };
    Ok(crate::degree::quantize(out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionDecl {
    pub kind: EmotionKind,
    /// +1 or -1.
    pub valence: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppraisalRule {
    pub kind: EmotionKind,
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppraisalTheory {
    pub name: String,
    pub emotions: Vec<EmotionDecl>,
    pub rules: Vec<AppraisalRule>,
    /// `(winner, loser)`: when both fire on the same target and content, the
    /// loser is dropped.
    pub preferences: Vec<(EmotionKind, EmotionKind)>,
}

pub const DEFAULT_THEORY: &str = include_str!("../rules/occ_default.theory");

impl Default for AppraisalTheory {
    fn default() -> Self {
        crate::syntax::parse_theory(DEFAULT_THEORY).expect("built-in theory parses")
    }
}

impl AppraisalTheory {
    /// Valence sign of a declared kind, 0 if undeclared.
    pub fn valence(&self, kind: &EmotionKind) -> i8 {
        self.emotions
            .iter()
            .find(|e| &e.kind == kind)
            .map_or(0, |e| e.valence)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &EmotionKind> {
        self.emotions.iter().map(|e| &e.kind)
    }

    /// Signed sum of intensities.
    pub fn signed_sum(&self, emotions: &[EmotionInstance]) -> f64 {
        emotions
            .iter()
            .map(|e| f64::from(self.valence(&e.kind)) * e.intensity.value())
            .sum()
    }
}

/// Result of one appraisal pass.
#[derive(Debug, Clone, Default)]
pub struct Appraisal {
    /// Emotions to hold from the next tick on, after specificity filtering.
    pub emotions: Vec<EmotionInstance>,
    /// Every rule firing, including those whose emotion was suppressed.
    pub firings: Vec<Firing>,
    pub suppressed: Vec<EmotionInstance>,
}

/// Runs every rule of the theory once over the state. Emotions about
/// temporal formulas are discarded.
pub fn appraise(
    state: &MentalState,
    theory: &AppraisalTheory,
    m: &Matcher<'_>,
    tick: u64,
) -> Result<Appraisal, FolkError> {
    let mut out = Appraisal::default();
    let mut found: Vec<EmotionInstance> = Vec::new();
    for ar in &theory.rules {
        for mt in m.matches(&ar.rule)? {
            let firing = m.fire(&ar.rule, mt)?;
            for (p, timing) in &firing.produced {
                debug_assert_eq!(*timing, Timing::Next);
                if let Produced::Fact(f) = p {
                    if let Some(e) = EmotionInstance::from_formula(f, tick + 1) {
                        if e.holder == *state.owner() && e.about.is_atemporal() && !found.contains(&e) {
                            found.push(e);
                        }
                    }
                }
            }
            out.firings.push(firing);
        }
    }
    let mut losers = BTreeSet::new();
    for (i, e) in found.iter().enumerate() {
        for (winner, loser) in &theory.preferences {
            if e.kind == *loser
                && found
                    .iter()
                    .any(|w| w.kind == *winner && w.target == e.target && w.about == e.about)
            {
                losers.insert(i);
            }
        }
    }
    for (i, e) in found.into_iter().enumerate() {
        if losers.contains(&i) {
            out.suppressed.push(e);
        } else {
            out.emotions.push(e);
        }
    }
    out.emotions.sort();
    Ok(out)
}
