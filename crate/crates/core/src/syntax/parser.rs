//! Recursive-descent parser for formulas, patterns and rules.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! formula := or ("->" formula)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | primary
//! primary := "(" formula ")" | "<" slot "," slot "," act ">" | ?var
//!          | Op "(" args ")" | atom
//! ```
//!
//! `a | b` has no AST node of its own and is read as `!(!a & !b)`.

use super::lexer::{Tok, Token};
use super::{Diagnostic, SourceSpan};
use crate::combine::Combinator;
use crate::degree::{Signed, Unit};
use crate::logic::{AgentId, EmotionKind, Illocution, Symbol};
use crate::pattern::{ActPat, AgentPat, DegTerm, EventPat, Pattern, SymPat};
use crate::rules::{Cmp, Effect, Premise, Rule, Select, Threshold, Timing};

pub type PResult<T> = Result<T, Diagnostic>;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Concrete formulas: no variables, no `self`.
    Formula,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Unit,
    Signed,
    Free,
}

pub struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    pub mode: Mode,
    depth: usize,
    /// Every named agent seen, for declaration checks.
    pub agent_refs: Vec<(AgentId, SourceSpan)>,
}

impl<'t> Parser<'t> {
    pub fn new(toks: &'t [Token], mode: Mode) -> Self {
        Self {
            toks,
            pos: 0,
            mode,
            depth: 0,
            agent_refs: Vec::new(),
        }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    /// True when the current token is the first one on its line.
    pub fn at_line_start(&self) -> bool {
        self.pos == 0 || self.toks[self.pos - 1].span.line < self.toks[self.pos].span.line
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.span(), msg))
    }

    pub fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            ))
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek().describe()))
        }
    }

    pub fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.span();
                self.bump();
                Ok((s, sp))
            }
            other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    pub fn number(&mut self, what: &str) -> PResult<f64> {
        match *self.peek() {
            Tok::Num(x) => {
                self.bump();
                Ok(x)
            }
            ref other => self.error(format!("expected {what}, found {}", other.describe())),
        }
    }

    pub fn var(&mut self) -> PResult<Symbol> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Symbol::new(&v))
            }
            other => self.error(format!("expected a variable, found {}", other.describe())),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("formula nested too deeply");
        }
        Ok(())
    }

    // ---- formulas ------------------------------------------------------

    pub fn formula(&mut self) -> PResult<Pattern> {
        self.enter()?;
        let lhs = self.or()?;
        let out = if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            Pattern::Implies(Box::new(lhs), Box::new(rhs))
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn or(&mut self) -> PResult<Pattern> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            let not = |p: Pattern| Pattern::Not(Box::new(p));
            lhs = not(Pattern::And(Box::new(not(lhs)), Box::new(not(rhs))));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Pattern> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Pattern::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    pub fn unary(&mut self) -> PResult<Pattern> {
        if self.eat(&Tok::Bang) {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Pattern::Not(Box::new(inner)));
        }
        self.primary()
    }

    pub fn primary(&mut self) -> PResult<Pattern> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Lt => {
                self.bump();
                self.enter()?;
                let e = self.event_body()?;
                self.depth -= 1;
                Ok(Pattern::Event(e))
            }
            Tok::Var(v) => {
                if self.mode == Mode::Formula {
                    return self.error("variables are only allowed in rules");
                }
                self.bump();
                Ok(Pattern::Var(Symbol::new(&v)))
            }
            Tok::Ident(name) => {
                if matches!(self.peek_at(1), Tok::LParen) {
                    self.operator(&name)
                } else {
                    self.bump();
                    Ok(Pattern::Atom(Symbol::new(&name)))
                }
            }
            other => self.error(format!("expected a formula, found {}", other.describe())),
        }
    }

    fn operator(&mut self, name: &str) -> PResult<Pattern> {
        let op_span = self.span();
        self.bump();
        self.expect(Tok::LParen)?;
        self.enter()?;
        let bx = Box::new;
        let out = match name {
            "Bel" => {
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let l = self.degree(Range::Unit)?;
                self.expect(Tok::Comma)?;
                Pattern::Bel(a, l, bx(self.formula()?))
            }
            "Att" | "Des" | "Ideal" => {
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let k = self.degree(Range::Signed)?;
                self.expect(Tok::Comma)?;
                let body = self.formula()?;
                let body = match name {
                    "Des" => Pattern::Future(bx(body)),
                    "Ideal" => Pattern::Globally(bx(body)),
                    _ => body,
                };
                Pattern::Att(a, k, bx(body))
            }
            "Int" | "Resp" => {
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let f = self.formula()?;
                if name == "Int" {
                    Pattern::Int(a, bx(f))
                } else {
                    Pattern::Resp(a, bx(f))
                }
            }
            "Like" | "Dom" => {
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let b = self.agent()?;
                self.expect(Tok::Comma)?;
                let k = self.degree(Range::Signed)?;
                if name == "Like" {
                    Pattern::Like(a, b, k)
                } else {
                    Pattern::Dom(a, b, k)
                }
            }
            "Emo" => {
                let (kind, _) = self.ident("an emotion kind")?;
                self.expect(Tok::Comma)?;
                let holder = self.agent()?;
                self.expect(Tok::Comma)?;
                let target = if self.is_keyword("_") {
                    self.bump();
                    AgentPat::Nobody
                } else {
                    self.agent()?
                };
                self.expect(Tok::Comma)?;
                let i = self.degree(Range::Unit)?;
                self.expect(Tok::Comma)?;
                Pattern::Emo {
                    kind: EmotionKind::from_name(&kind),
                    holder,
                    target,
                    intensity: i,
                    about: bx(self.formula()?),
                }
            }
            "N" => Pattern::Next(bx(self.formula()?)),
            "F" => Pattern::Future(bx(self.formula()?)),
            "G" => Pattern::Globally(bx(self.formula()?)),
            "U" => {
                let a = self.formula()?;
                self.expect(Tok::Comma)?;
                Pattern::Until(bx(a), bx(self.formula()?))
            }
            other => {
                return Err(Diagnostic::new(
                    op_span,
                    format!("unknown operator `{other}`"),
                ))
            }
        };
        self.expect(Tok::RParen)?;
        self.depth -= 1;
        Ok(out)
    }

    /// Agent position of a modal operator.
    pub fn agent(&mut self) -> PResult<AgentPat> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "self" => {
                if self.mode == Mode::Formula {
                    return self.error("`self` is only allowed in rules");
                }
                self.bump();
                Ok(AgentPat::Owner)
            }
            Tok::Ident(s) if s == "_" => self.error("expected an agent, found `_`"),
            Tok::Ident(s) => {
                let sp = self.span();
                self.bump();
                // identifiers are never empty
                let id = AgentId::new(&s).expect("nonempty");
                self.agent_refs.push((id.clone(), sp));
                Ok(AgentPat::Named(id))
            }
            Tok::Var(v) if self.mode == Mode::Pattern => {
                self.bump();
                Ok(AgentPat::Var(Symbol::new(&v)))
            }
            Tok::Minus if self.mode == Mode::Pattern => {
                self.bump();
                Ok(AgentPat::Any)
            }
            other => self.error(format!("expected an agent, found {}", other.describe())),
        }
    }

    /// Agent slot inside an event: agents, `-` (any) and `_` (nobody).
    fn slot(&mut self) -> PResult<AgentPat> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(AgentPat::Any)
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(AgentPat::Nobody)
            }
            _ => self.agent(),
        }
    }

    fn event_body(&mut self) -> PResult<EventPat> {
        let actor_span = self.span();
        let actor = self.slot()?;
        if actor == AgentPat::Nobody {
            return Err(Diagnostic::new(
                actor_span,
                "an event needs an actor (use `-` for any agent)",
            ));
        }
        self.expect(Tok::Comma)?;
        let recipient = self.slot()?;
        self.expect(Tok::Comma)?;
        let act = match self.peek().clone() {
            Tok::Var(v) if self.mode == Mode::Pattern => {
                self.bump();
                ActPat::Physical(SymPat::Var(Symbol::new(&v)))
            }
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                match Illocution::from_name(&name) {
                    Some(ill) if matches!(self.peek(), Tok::LParen) => {
                        if recipient == AgentPat::Nobody {
                            return Err(Diagnostic::new(sp, "speech acts need a recipient"));
                        }
                        self.bump();
                        let content = self.formula()?;
                        self.expect(Tok::RParen)?;
                        ActPat::Speech(ill, Box::new(content))
                    }
                    _ => ActPat::Physical(SymPat::Lit(Symbol::new(&name))),
                }
            }
            other => return self.error(format!("expected an act, found {}", other.describe())),
        };
        self.expect(Tok::Gt)?;
        Ok(EventPat {
            actor,
            recipient,
            act,
        })
    }

    fn degree(&mut self, range: Range) -> PResult<DegTerm> {
        if self.mode == Mode::Formula {
            let sp = self.span();
            let x = match *self.peek() {
                Tok::Num(x) => x,
                ref other => {
                    return self.error(format!("expected a degree, found {}", other.describe()))
                }
            };
            self.bump();
            check_range(x, range, sp)?;
            return Ok(DegTerm::Lit(x));
        }
        self.deg_term(range)
    }

    pub fn deg_term_free(&mut self) -> PResult<DegTerm> {
        self.deg_term(Range::Free)
    }

    fn deg_term(&mut self, range: Range) -> PResult<DegTerm> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                check_range(x, range, sp)?;
                Ok(DegTerm::Lit(x))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(DegTerm::Var(Symbol::new(&v)))
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(DegTerm::Wild)
            }
            Tok::Ident(s) => {
                if let Some(t) = Threshold::from_name(&s) {
                    self.bump();
                    return Ok(DegTerm::Threshold(t));
                }
                if let Some(c) = Combinator::from_name(&s) {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    self.enter()?;
                    let mut args = vec![self.deg_term(Range::Free)?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.deg_term(Range::Free)?);
                    }
                    self.expect(Tok::RParen)?;
                    self.depth -= 1;
                    return Ok(DegTerm::Call(c, args));
                }
                self.error(format!("expected a degree, found `{s}`"))
            }
            other => self.error(format!("expected a degree, found {}", other.describe())),
        }
    }

    // ---- rules ---------------------------------------------------------

    /// `rule name [select max <deg> per ?v...] : premises => effects`
    pub fn rule(&mut self) -> PResult<Rule> {
        self.expect_keyword("rule")?;
        let (name, _) = self.ident("a rule name")?;
        let select = if self.is_keyword("select") {
            self.bump();
            self.expect_keyword("max")?;
            let key = self.deg_term_free()?;
            self.expect_keyword("per")?;
            let mut per = vec![self.var()?];
            while matches!(self.peek(), Tok::Var(_)) {
                per.push(self.var()?);
            }
            Some(Select { key, per })
        } else {
            None
        };
        self.expect(Tok::Colon)?;
        let mut premises = vec![self.premise()?];
        while self.eat(&Tok::Amp) {
            premises.push(self.premise()?);
        }
        self.expect(Tok::DArrow)?;
        let mut effects = vec![self.effect()?];
        while self.eat(&Tok::Amp) {
            effects.push(self.effect()?);
        }
        Ok(Rule {
            name,
            select,
            premises,
            effects,
        })
    }

    fn starts_guard(&self) -> bool {
        match self.peek() {
            Tok::Var(_) | Tok::Num(_) => true,
            Tok::Ident(s) => {
                Threshold::from_name(s).is_some()
                    || (Combinator::from_name(s).is_some() && matches!(self.peek_at(1), Tok::LParen))
            }
            _ => false,
        }
    }

    fn premise(&mut self) -> PResult<Premise> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(Premise::Not(Box::new(self.premise()?)));
        }
        if self.starts_guard() {
            let a = self.deg_term_free()?;
            let cmp = match self.peek() {
                Tok::Gt => Cmp::Gt,
                Tok::Lt => Cmp::Lt,
                Tok::Ge => Cmp::Ge,
                Tok::Le => Cmp::Le,
                other => {
                    return self.error(format!(
                        "expected a comparison, found {}",
                        other.describe()
                    ))
                }
            };
            self.bump();
            let b = self.deg_term_free()?;
            return Ok(Premise::Guard(a, cmp, b));
        }
        let Tok::Ident(name) = self.peek().clone() else {
            return self.error(format!(
                "expected a premise, found {}",
                self.peek().describe()
            ));
        };
        match name.as_str() {
            "Bel" | "Att" | "Des" | "Ideal" | "Int" | "Like" | "Dom" => {
                Ok(Premise::Holds(self.primary()?))
            }
            "Goal" | "IncDes" | "WIncDes" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let k = self.deg_term(Range::Signed)?;
                self.expect(Tok::Comma)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(match name.as_str() {
                    "Goal" => Premise::Goal(a, k, f),
                    "IncDes" => Premise::IncDes(a, k, f),
                    _ => Premise::WIncDes(a, k, f),
                })
            }
            "Resp" | "Wit" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.agent()?;
                self.expect(Tok::Comma)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(if name == "Resp" {
                    Premise::Resp(a, f)
                } else {
                    Premise::Wit(a, f)
                })
            }
            "Observed" | "Atemporal" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(if name == "Observed" {
                    Premise::Observed(f)
                } else {
                    Premise::Atemporal(f)
                })
            }
            other => self.error(format!("unknown premise `{other}`")),
        }
    }

    fn effect(&mut self) -> PResult<(Effect, Timing)> {
        if self.is_keyword("N") && matches!(self.peek_at(1), Tok::LParen) {
            self.bump();
            self.bump();
            let (e, _) = self.effect_body()?;
            self.expect(Tok::RParen)?;
            return Ok((e, Timing::Next));
        }
        self.effect_body()
    }

    fn effect_body(&mut self) -> PResult<(Effect, Timing)> {
        if self.is_keyword("Emit") {
            self.bump();
            self.expect(Tok::LParen)?;
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok((Effect::Emit(f), Timing::Immediate));
        }
        Ok((Effect::Assert(self.primary()?), Timing::Immediate))
    }
}

fn check_range(x: f64, range: Range, sp: SourceSpan) -> PResult<()> {
    let res = match range {
        Range::Unit => Unit::new(x).map(|_| ()),
        Range::Signed => Signed::new(x).map(|_| ()),
        Range::Free => Ok(()),
    };
    res.map_err(|e| Diagnostic::new(sp, e.to_string()))
}
