//! Whole-file formats. Every parser here reports all diagnostics it can find
//! instead of stopping at the first one.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Tok};
use super::parser::{Mode, PResult, Parser};
use super::{literal_formula, Diagnostic, SourceSpan};
use crate::appraisal::{AppraisalRule, AppraisalTheory, EmotionDecl};
use crate::degree::Signed;
use crate::interview::{Channel, Dimension};
use crate::logic::{AgentId, EmotionKind, Formula};
use crate::pattern::Pattern;
use crate::rules::{Effect, Rule, RuleSet, Stage, Thresholds, Timing};
use crate::scenario::{
    AffectGoal, Interpretation, Placement, ProfileDecl, ProfileId, QuestionDecl, Relation, Roles,
    ScenarioDoc, Script, TopicDecl,
};

/// Skips to the next line that starts with one of `keywords`.
fn recover(p: &mut Parser<'_>, keywords: &[&str]) {
    p.bump();
    while !p.at_eof() {
        if p.at_line_start() {
            if let Tok::Ident(s) = p.peek() {
                if keywords.contains(&s.as_str()) {
                    return;
                }
            }
        }
        p.bump();
    }
}

fn finish<T>(value: T, mut diags: Vec<Diagnostic>) -> Result<T, Vec<Diagnostic>> {
    if diags.is_empty() {
        Ok(value)
    } else {
        diags.sort_by_key(|d| (d.span.line, d.span.col));
        Err(diags)
    }
}

fn checked_rule(p: &mut Parser<'_>) -> PResult<Rule> {
    let span = p.span();
    let r = p.rule()?;
    r.validate()
        .map_err(|e| Diagnostic::new(span, e.to_string()))?;
    Ok(r)
}

/// Rule file: `stage <name>` switches the stage for the following rules
/// (default `update_beliefs_with_new_soa`).
pub fn parse_rule_file(text: &str) -> Result<RuleSet, Vec<Diagnostic>> {
    const KW: &[&str] = &["stage", "rule"];
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks, Mode::Pattern);
    let mut set = RuleSet::default();
    let mut stage = Stage::UpdateBeliefsWithNewSoa;
    let mut names = BTreeSet::new();
    while !p.at_eof() {
        let span = p.span();
        let res: PResult<()> = (|| {
            if p.is_keyword("stage") {
                p.bump();
                let (name, sp) = p.ident("a stage name")?;
                match Stage::from_name(&name) {
                    Some(s) if s.accepts_rules() => stage = s,
                    Some(_) => {
                        return Err(Diagnostic::new(sp, format!("stage `{name}` has no rules")))
                    }
                    None => return Err(Diagnostic::new(sp, format!("unknown stage `{name}`"))),
                }
                Ok(())
            } else if p.is_keyword("rule") {
                let r = checked_rule(&mut p)?;
                if !names.insert(r.name.clone()) {
                    return Err(Diagnostic::new(span, format!("duplicate rule `{}`", r.name)));
                }
                set.rules.push((stage, r));
                Ok(())
            } else {
                p.error(format!("expected `stage` or `rule`, found {}", p.peek().describe()))
            }
        })();
        if let Err(d) = res {
            diags.push(d);
            recover(&mut p, KW);
        }
    }
    finish(set, diags)
}

/// Appraisal theory file:
///
/// ```text
/// theory occ_default
/// emotion Joy valence +
/// prefer Gratitude over Admiration
/// rule joy : ... => N(Emo(Joy,self,_,intensity(?l,?k),?g))
/// ```
pub fn parse_theory(text: &str) -> Result<AppraisalTheory, Vec<Diagnostic>> {
    const KW: &[&str] = &["theory", "emotion", "prefer", "rule"];
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks, Mode::Pattern);
    let mut name = String::from("unnamed");
    let mut emotions: Vec<EmotionDecl> = Vec::new();
    let mut rules: Vec<(AppraisalRule, SourceSpan)> = Vec::new();
    let mut prefs = Vec::new();
    while !p.at_eof() {
        let span = p.span();
        let res: PResult<()> = (|| {
            if p.is_keyword("theory") {
                p.bump();
                name = p.ident("a theory name")?.0;
            } else if p.is_keyword("emotion") {
                p.bump();
                let (kind, sp) = p.ident("an emotion kind")?;
                p.expect_keyword("valence")?;
                let valence = match p.peek() {
                    Tok::Plus => 1,
                    Tok::Minus => -1,
                    other => {
                        return p.error(format!("expected `+` or `-`, found {}", other.describe()))
                    }
                };
                p.bump();
                let kind = EmotionKind::from_name(&kind);
                if emotions.iter().any(|e| e.kind == kind) {
                    return Err(Diagnostic::new(sp, format!("emotion `{kind}` declared twice")));
                }
                emotions.push(EmotionDecl { kind, valence });
            } else if p.is_keyword("prefer") {
                p.bump();
                let winner = EmotionKind::from_name(&p.ident("an emotion kind")?.0);
                p.expect_keyword("over")?;
                let loser = EmotionKind::from_name(&p.ident("an emotion kind")?.0);
                prefs.push((winner, loser));
            } else if p.is_keyword("rule") {
                let rule = checked_rule(&mut p)?;
                let kind = match rule.effects.as_slice() {
                    [(Effect::Assert(Pattern::Emo { kind, about, .. }), Timing::Next)] => {
                        if !about.vars().is_empty() || is_atemporal_pattern(about) {
                            kind.clone()
                        } else {
                            return Err(Diagnostic::new(
                                span,
                                "emotions cannot be about temporal formulas",
                            ));
                        }
                    }
                    _ => {
                        return Err(Diagnostic::new(
                            span,
                            "an appraisal rule has exactly one effect of the form N(Emo(...))",
                        ))
                    }
                };
                rules.push((AppraisalRule { kind, rule }, span));
            } else {
                return p.error(format!("unexpected {}", p.peek().describe()));
            }
            Ok(())
        })();
        if let Err(d) = res {
            diags.push(d);
            recover(&mut p, KW);
        }
    }
    let mut seen = BTreeSet::new();
    for (r, sp) in &rules {
        if !emotions.iter().any(|e| e.kind == r.kind) {
            diags.push(Diagnostic::new(
                *sp,
                format!("emotion `{}` has no `emotion` declaration", r.kind),
            ));
        }
        if !seen.insert(r.kind.clone()) {
            diags.push(Diagnostic::new(
                *sp,
                format!("second rule for emotion `{}`", r.kind),
            ));
        }
    }
    let eof = p.span();
    for e in &emotions {
        if !seen.contains(&e.kind) {
            diags.push(Diagnostic::new(
                eof,
                format!("emotion `{}` is declared without a rule", e.kind),
            ));
        }
    }
    let theory = AppraisalTheory {
        name,
        emotions,
        rules: rules.into_iter().map(|(r, _)| r).collect(),
        preferences: prefs,
    };
    finish(theory, diags)
}

fn is_atemporal_pattern(p: &Pattern) -> bool {
    match p {
        Pattern::Next(_) | Pattern::Until(..) | Pattern::Future(_) | Pattern::Globally(_) => false,
        Pattern::Not(x) => is_atemporal_pattern(x),
        Pattern::And(x, y) | Pattern::Implies(x, y) => {
            is_atemporal_pattern(x) && is_atemporal_pattern(y)
        }
        Pattern::Bel(_, _, x) | Pattern::Int(_, x) | Pattern::Resp(_, x) => is_atemporal_pattern(x),
        Pattern::Att(_, _, x) => is_atemporal_pattern(x),
        Pattern::Emo { about, .. } => is_atemporal_pattern(about),
        _ => true,
    }
}

const SCENARIO_KW: &[&str] = &[
    "scenario",
    "agent",
    "self",
    "horizon",
    "thresholds",
    "relation",
    "fact",
    "rule",
    "interviewer",
    "profile",
    "topic",
];

/// Parses and validates a `.tom` scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks, Mode::Pattern);
    let mut doc = ScenarioDoc::default();
    let mut declared: BTreeMap<AgentId, SourceSpan> = BTreeMap::new();
    let mut topic_ids: BTreeSet<String> = BTreeSet::new();
    while !p.at_eof() {
        let res = statement(&mut p, &mut doc, &mut declared, &mut topic_ids, &mut diags);
        if let Err(d) = res {
            diags.push(d);
            recover(&mut p, SCENARIO_KW);
        }
    }
    for (agent, span) in &p.agent_refs {
        if !declared.contains_key(agent) {
            diags.push(Diagnostic::new(*span, format!("undeclared agent `{agent}`")));
        }
    }
    finish(doc, diags)
}

fn statement(
    p: &mut Parser<'_>,
    doc: &mut ScenarioDoc,
    declared: &mut BTreeMap<AgentId, SourceSpan>,
    topic_ids: &mut BTreeSet<String>,
    diags: &mut Vec<Diagnostic>,
) -> PResult<()> {
    let span = p.span();
    let Tok::Ident(kw) = p.peek().clone() else {
        return p.error(format!("expected a declaration, found {}", p.peek().describe()));
    };
    match kw.as_str() {
        "scenario" => {
            p.bump();
            doc.name = Some(p.ident("a scenario name")?.0);
        }
        "agent" => {
            p.bump();
            let line = span.line;
            let mut any = false;
            while let Tok::Ident(name) = p.peek().clone() {
                if p.span().line != line {
                    break;
                }
                let sp = p.span();
                p.bump();
                if name == "self" || name == "_" {
                    diags.push(Diagnostic::new(sp, format!("`{name}` is reserved")));
                    continue;
                }
                let id = AgentId::new(&name).expect("nonempty");
                if declared.insert(id.clone(), sp).is_some() {
                    diags.push(Diagnostic::new(sp, format!("agent `{name}` declared twice")));
                } else {
                    doc.agents.push(id);
                }
                any = true;
            }
            if !any {
                return Err(Diagnostic::new(span, "expected at least one agent name"));
            }
        }
        "self" => {
            p.bump();
            doc.self_agent = Some(named_agent(p)?);
        }
        "horizon" => {
            p.bump();
            let sp = p.span();
            let n = p.number("a tick count")?;
            if n < 0.0 || n.fract() != 0.0 || n > 1e6 {
                return Err(Diagnostic::new(sp, "horizon must be a whole number of ticks"));
            }
            doc.horizon = n as usize;
        }
        "thresholds" => {
            p.bump();
            let mut t = Thresholds::default();
            while let Tok::Ident(name) = p.peek().clone() {
                if !matches!(name.as_str(), "mod" | "str" | "des") {
                    break;
                }
                p.bump();
                p.expect(Tok::Eq)?;
                let x = p.number("a threshold value")?;
                match name.as_str() {
                    "mod" => t.mod_th = x,
                    "str" => t.str_th = x,
                    _ => t.des_th = x,
                }
            }
            let t = Thresholds::new(t.mod_th, t.str_th, t.des_th)
                .map_err(|e| Diagnostic::new(span, e.to_string()))?;
            doc.thresholds = Some(t);
        }
        "relation" => {
            p.bump();
            let from = named_agent(p)?;
            p.expect(Tok::Arrow)?;
            let to = named_agent(p)?;
            let mut rel = Relation {
                from,
                to,
                like: None,
                dom: None,
            };
            loop {
                let which = if p.is_keyword("like") {
                    true
                } else if p.is_keyword("dom") {
                    false
                } else {
                    break;
                };
                p.bump();
                let sp = p.span();
                let x = p.number("a degree")?;
                let k = Signed::new(x).map_err(|e| Diagnostic::new(sp, e.to_string()))?;
                if which {
                    rel.like = Some(k);
                } else {
                    rel.dom = Some(k);
                }
            }
            if rel.like.is_none() && rel.dom.is_none() {
                return Err(Diagnostic::new(span, "relation needs `like` or `dom`"));
            }
            doc.relations.push(rel);
        }
        "fact" => {
            p.bump();
            let owner = named_agent(p)?;
            p.expect(Tok::Colon)?;
            let f = concrete_formula(p)?;
            let foreign = match &f {
                Formula::Bel(a, ..) | Formula::Att(a, ..) | Formula::Int(a, _) => Some(a),
                Formula::Like(a, ..) | Formula::Dom(a, ..) => Some(a),
                _ => None,
            };
            if let Some(a) = foreign {
                if *a != owner {
                    return Err(Diagnostic::new(
                        span,
                        format!(
                            "fact of `{owner}` states a mental state of `{a}`; wrap it in Bel({owner},...)"
                        ),
                    ));
                }
            }
            if matches!(f, Formula::Emo { .. }) {
                return Err(Diagnostic::new(span, "emotions cannot be initial facts"));
            }
            doc.initial_facts.push((owner, f));
        }
        "rule" => {
            let r = checked_rule(p)?;
            if doc.rules.iter().any(|x| x.name == r.name) {
                return Err(Diagnostic::new(span, format!("duplicate rule `{}`", r.name)));
            }
            doc.rules.push(r);
        }
        "interviewer" => {
            p.bump();
            let interviewer = named_agent(p)?;
            p.expect_keyword("candidate")?;
            let candidate = named_agent(p)?;
            if interviewer == candidate {
                return Err(Diagnostic::new(span, "interviewer and candidate must differ"));
            }
            doc.roles = Some(Roles {
                interviewer,
                candidate,
            });
        }
        "profile" => {
            p.bump();
            let (name, sp) = p.ident("a profile id")?;
            let id = ProfileId::from_name(&name)
                .ok_or_else(|| Diagnostic::new(sp, format!("unknown profile `{name}` (A, B or C)")))?;
            let seek = if p.is_keyword("seek") {
                p.bump();
                let (g, gsp) = p.ident("`positive` or `negative`")?;
                Some(match g.as_str() {
                    "positive" => AffectGoal::Positive,
                    "negative" => AffectGoal::Negative,
                    _ => return Err(Diagnostic::new(gsp, "expected `positive` or `negative`")),
                })
            } else {
                None
            };
            if id == ProfileId::B && seek.is_some() {
                return Err(Diagnostic::new(span, "profile B has no affective goal"));
            }
            if doc.profiles.iter().any(|x| x.id == id) {
                return Err(Diagnostic::new(sp, format!("profile `{name}` declared twice")));
            }
            doc.profiles.push(ProfileDecl { id, seek });
        }
        "topic" => {
            p.bump();
            let (id, sp) = p.ident("a topic id")?;
            if !topic_ids.insert(id.clone()) {
                return Err(Diagnostic::new(sp, format!("duplicate topic `{id}`")));
            }
            let placement = if p.is_keyword("first") {
                p.bump();
                Placement::First
            } else if p.is_keyword("last") {
                p.bump();
                Placement::Last
            } else {
                Placement::Free
            };
            p.expect(Tok::LBrace)?;
            let mut topic = TopicDecl {
                id,
                placement,
                questions: Vec::new(),
                interpretations: Vec::new(),
            };
            while !matches!(p.peek(), Tok::RBrace | Tok::Eof) {
                topic_item(p, &mut topic)?;
            }
            p.expect(Tok::RBrace)?;
            if topic.questions.is_empty() {
                return Err(Diagnostic::new(sp, format!("topic `{}` has no question", topic.id)));
            }
            let firsts = doc.topics.iter().filter(|t| t.placement == Placement::First).count();
            let lasts = doc.topics.iter().filter(|t| t.placement == Placement::Last).count();
            if (placement == Placement::First && firsts > 0)
                || (placement == Placement::Last && lasts > 0)
            {
                return Err(Diagnostic::new(sp, "only one topic may be `first` and one `last`"));
            }
            doc.topics.push(topic);
        }
        other => return p.error(format!("unknown declaration `{other}`")),
    }
    Ok(())
}

fn topic_item(p: &mut Parser<'_>, topic: &mut TopicDecl) -> PResult<()> {
    if p.is_keyword("question") {
        p.bump();
        let (variant, vsp) = p.ident("a question variant")?;
        if topic.questions.iter().any(|q| q.variant == variant) {
            return Err(Diagnostic::new(vsp, format!("variant `{variant}` declared twice")));
        }
        let utterance = match p.peek().clone() {
            Tok::Str(s) => {
                p.bump();
                s
            }
            other => return p.error(format!("expected the utterance text, found {}", other.describe())),
        };
        let esp = p.span();
        let event = match concrete_formula(p)? {
            Formula::Event(e) if e.is_concrete() => e,
            _ => return Err(Diagnostic::new(esp, "a question must be a concrete event")),
        };
        let mut expect = Vec::new();
        if p.is_keyword("expect") {
            p.bump();
            loop {
                let ch = channel(p)?;
                p.expect(Tok::Eq)?;
                let sp = p.span();
                let x = p.number("an expectation offset")?;
                if !(-1.0..=1.0).contains(&x) {
                    return Err(Diagnostic::new(sp, "expectation offsets lie in [-1, 1]"));
                }
                expect.push((ch, x));
                if !p.eat(&Tok::Comma) && !matches!(p.peek(), Tok::Ident(_)) {
                    break;
                }
            }
        }
        p.expect(Tok::Semi)?;
        topic.questions.push(QuestionDecl {
            variant,
            utterance,
            event,
            expect,
        });
        Ok(())
    } else if p.is_keyword("interpret") {
        p.bump();
        let ch = channel(p)?;
        p.expect(Tok::Gt)?;
        let sp = p.span();
        let above = p.number("a channel threshold")?;
        if !(0.0..=1.0).contains(&above) {
            return Err(Diagnostic::new(sp, "channel thresholds lie in [0, 1]"));
        }
        p.expect(Tok::DArrow)?;
        let (dim, dsp) = p.ident("an assessment dimension")?;
        let dimension = Dimension::from_name(&dim)
            .ok_or_else(|| Diagnostic::new(dsp, format!("unknown dimension `{dim}`")))?;
        let csp = p.span();
        let coefficient = p.number("a coefficient")?;
        if !(-1.0..=1.0).contains(&coefficient) {
            return Err(Diagnostic::new(csp, "coefficients lie in [-1, 1]"));
        }
        let believe = if p.is_keyword("believe") {
            p.bump();
            Some(concrete_formula(p)?)
        } else {
            None
        };
        p.expect(Tok::Semi)?;
        topic.interpretations.push(Interpretation {
            channel: ch,
            above,
            dimension,
            coefficient,
            believe,
        });
        Ok(())
    } else {
        p.error(format!(
            "expected `question` or `interpret`, found {}",
            p.peek().describe()
        ))
    }
}

fn channel(p: &mut Parser<'_>) -> PResult<Channel> {
    let (name, sp) = p.ident("an affect channel")?;
    Channel::from_code(&name)
        .ok_or_else(|| Diagnostic::new(sp, format!("unknown affect channel `{name}`")))
}

fn named_agent(p: &mut Parser<'_>) -> PResult<AgentId> {
    let (name, sp) = p.ident("an agent name")?;
    if name == "self" || name == "_" {
        return Err(Diagnostic::new(sp, "expected an agent name"));
    }
    let id = AgentId::new(&name).expect("nonempty");
    p.agent_refs.push((id.clone(), sp));
    Ok(id)
}

/// A formula inside a pattern-mode file, rejected if it mentions variables.
fn concrete_formula(p: &mut Parser<'_>) -> PResult<Formula> {
    let span = p.span();
    p.mode = Mode::Formula;
    let res = p.formula();
    p.mode = Mode::Pattern;
    literal_formula(&res?, span)
}

/// Event script: one `tick <n>: <event>; <event>` line per batch.
pub fn parse_script(text: &str) -> Result<Script, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(text);
    let mut p = Parser::new(&toks, Mode::Formula);
    let mut script = Script::default();
    while !p.at_eof() {
        let res: PResult<()> = (|| {
            p.expect_keyword("tick")?;
            let sp = p.span();
            let n = p.number("a tick number")?;
            if n < 0.0 || n.fract() != 0.0 || n > 1e6 {
                return Err(Diagnostic::new(sp, "tick numbers are whole and nonnegative"));
            }
            p.expect(Tok::Colon)?;
            let batch = script.batches.entry(n as usize).or_default();
            loop {
                let esp = p.span();
                let f = p.formula()?;
                match literal_formula(&f, esp)? {
                    Formula::Event(e) if e.is_concrete() => batch.push(e),
                    _ => return Err(Diagnostic::new(esp, "expected a concrete event")),
                }
                if !p.eat(&Tok::Semi) || p.is_keyword("tick") || p.at_eof() {
                    break;
                }
            }
            Ok(())
        })();
        if let Err(d) = res {
            diags.push(d);
            recover(&mut p, &["tick"]);
        }
    }
    finish(script, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenario_is_valid() {
        let doc = parse_scenario("").unwrap();
        assert!(doc.agents.is_empty() && doc.initial_facts.is_empty() && doc.topics.is_empty());
        let doc = parse_scenario("# only a comment\n").unwrap();
        assert_eq!(doc, ScenarioDoc::default());
    }

    #[test]
    fn undeclared_agent_is_reported_with_span() {
        let errs = parse_scenario("agent M J\nfact M: Bel(M,1,Like(K,M,0.5))\n").unwrap_err();
        assert_eq!(errs.len(), 1, "{errs:?}");
        assert!(errs.iter().any(|d| d.message.contains("`K`") && d.span.line == 2));
    }

    #[test]
    fn errors_are_aggregated() {
        let text = "agent A\nfact A: Bel(A,2,p)\nfact A: Know(A,p)\nhorizon x\n";
        let errs = parse_scenario(text).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert_eq!(
            errs.iter().map(|d| d.span.line).collect::<Vec<_>>(),
            vec![2, 3, 4]
        );
    }

    #[test]
    fn topics_and_profiles() {
        let text = r#"
agent R C
interviewer R candidate C
profile A seek positive
profile B
topic salary last {
  question neutral "What are your expectations?" <R,C,ask_salary> ;
  question harsh "Why so greedy?" <R,C,Assert(candidate_is_greedy)> expect EMB=0.4 STR=0.2 ;
  interpret HES > 0.5 => qualification -0.2 believe !candidate_is_qualified ;
}
topic salary { question x "y" <R,C,z> ; }
"#;
        let errs = parse_scenario(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("duplicate topic"));
        let doc = parse_scenario(&text.replace("topic salary {", "topic other {")).unwrap();
        assert_eq!(doc.topics.len(), 2);
        let t = &doc.topics[0];
        assert_eq!(t.placement, Placement::Last);
        assert_eq!(t.questions[1].expect, vec![(Channel::Embarrassed, 0.4), (Channel::Stressed, 0.2)]);
        assert_eq!(t.interpretations[0].coefficient, -0.2);
        assert_eq!(doc.profiles.len(), 2);
    }

    #[test]
    fn scripts() {
        let s = parse_script("# comment\ntick 0: <C,R,answer>; <C,R,Assert(p)>\ntick 3: <R,C,ask>\n")
            .unwrap();
        assert_eq!(s.at(0).len(), 2);
        assert_eq!(s.at(3).len(), 1);
        assert_eq!(s.last_tick(), Some(3));
        assert!(parse_script("tick 0: <-,R,x>").is_err());
        assert_eq!(parse_script("").unwrap(), Script::default());
    }

    #[test]
    fn rule_files_track_stages() {
        let set = parse_rule_file(
            "rule a : Bel(self,?l,?p) => Bel(self,?l,N(?p))\nstage speech_acts\nrule b : Int(self,?e) => Emit(?e)\n",
        )
        .unwrap();
        assert_eq!(set.rules[0].0, Stage::UpdateBeliefsWithNewSoa);
        assert_eq!(set.rules[1].0, Stage::SpeechActs);
        assert!(parse_rule_file("stage order_goals\n").is_err());
    }
}
