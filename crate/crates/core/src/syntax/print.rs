//! Canonical text output for formulas, patterns and rules.

use crate::logic::{canonicalize, Formula};
use crate::pattern::{ActPat, AgentPat, DegTerm, Pattern, SymPat};
use crate::rules::{Effect, Premise, Rule, Timing};

const IMPLIES: u8 = 1;
const AND: u8 = 3;
const ATOM: u8 = 4;

/// Canonical text of a formula. `parse_formula(serialize_formula(f))`
/// returns `canonicalize(f)`.
pub fn serialize_formula(f: &Formula) -> String {
    serialize_pattern(&Pattern::literal(&canonicalize(f)))
}

pub fn serialize_pattern(p: &Pattern) -> String {
    let mut s = String::new();
    write(p, &mut s);
    s
}

fn level(p: &Pattern) -> u8 {
    match p {
        Pattern::Implies(..) => IMPLIES,
        Pattern::And(..) => AND,
        _ => ATOM,
    }
}

fn write_sub(p: &Pattern, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write(p, out);
        out.push(')');
    } else {
        write(p, out);
    }
}

pub fn agent(a: &AgentPat) -> String {
    match a {
        AgentPat::Owner => "self".into(),
        AgentPat::Named(n) => n.to_string(),
        AgentPat::Any => "-".into(),
        AgentPat::Nobody => "_".into(),
        AgentPat::Var(v) => format!("?{v}"),
    }
}

pub fn degree(d: &DegTerm) -> String {
    match d {
        DegTerm::Lit(x) => format!("{x}"),
        DegTerm::Var(v) => format!("?{v}"),
        DegTerm::Wild => "_".into(),
        DegTerm::Threshold(t) => t.name().into(),
        DegTerm::Call(c, args) => format!(
            "{}({})",
            c.name(),
            args.iter().map(degree).collect::<Vec<_>>().join(",")
        ),
    }
}

fn write(p: &Pattern, out: &mut String) {
    use std::fmt::Write as _;
    let s = serialize_pattern;
    match p {
        Pattern::Var(v) => {
            let _ = write!(out, "?{v}");
        }
        Pattern::Atom(a) => out.push_str(a.as_str()),
        Pattern::Event(e) => {
            let act = match &e.act {
                ActPat::Physical(SymPat::Lit(x)) => x.to_string(),
                ActPat::Physical(SymPat::Var(v)) => format!("?{v}"),
                ActPat::Speech(i, c) => format!("{}({})", i.name(), s(c)),
            };
            let _ = write!(out, "<{},{},{}>", agent(&e.actor), agent(&e.recipient), act);
        }
        Pattern::Like(a, b, k) => {
            let _ = write!(out, "Like({},{},{})", agent(a), agent(b), degree(k));
        }
        Pattern::Dom(a, b, k) => {
            let _ = write!(out, "Dom({},{},{})", agent(a), agent(b), degree(k));
        }
        Pattern::Bel(a, l, x) => {
            let _ = write!(out, "Bel({},{},{})", agent(a), degree(l), s(x));
        }
        Pattern::Att(a, k, x) => {
            let (op, body) = match &**x {
                Pattern::Future(b) => ("Des", &**b),
                Pattern::Globally(b) => ("Ideal", &**b),
                other => ("Att", other),
            };
            let _ = write!(out, "{op}({},{},{})", agent(a), degree(k), s(body));
        }
        Pattern::Int(a, x) => {
            let _ = write!(out, "Int({},{})", agent(a), s(x));
        }
        Pattern::Resp(a, x) => {
            let _ = write!(out, "Resp({},{})", agent(a), s(x));
        }
        Pattern::Emo {
            kind,
            holder,
            target,
            intensity,
            about,
        } => {
            let _ = write!(
                out,
                "Emo({},{},{},{},{})",
                kind.name(),
                agent(holder),
                agent(target),
                degree(intensity),
                s(about)
            );
        }
        Pattern::Next(x) => {
            let _ = write!(out, "N({})", s(x));
        }
        Pattern::Future(x) => {
            let _ = write!(out, "F({})", s(x));
        }
        Pattern::Globally(x) => {
            let _ = write!(out, "G({})", s(x));
        }
        Pattern::Until(x, y) => {
            let _ = write!(out, "U({},{})", s(x), s(y));
        }
        Pattern::Not(x) => {
            out.push('!');
            write_sub(x, level(x) < ATOM, out);
        }
        Pattern::And(x, y) => {
            write_sub(x, level(x) < AND, out);
            out.push_str(" & ");
            write_sub(y, level(y) <= AND, out);
        }
        Pattern::Implies(x, y) => {
            write_sub(x, level(x) <= IMPLIES, out);
            out.push_str(" -> ");
            write_sub(y, false, out);
        }
    }
}

pub fn serialize_premise(p: &Premise) -> String {
    let s = serialize_pattern;
    match p {
        Premise::Holds(x) => s(x),
        Premise::Goal(a, k, x) => format!("Goal({},{},{})", agent(a), degree(k), s(x)),
        Premise::Resp(a, x) => format!("Resp({},{})", agent(a), s(x)),
        Premise::Wit(a, x) => format!("Wit({},{})", agent(a), s(x)),
        Premise::Observed(x) => format!("Observed({})", s(x)),
        Premise::IncDes(a, k, x) => format!("IncDes({},{},{})", agent(a), degree(k), s(x)),
        Premise::WIncDes(a, k, x) => format!("WIncDes({},{},{})", agent(a), degree(k), s(x)),
        Premise::Atemporal(x) => format!("Atemporal({})", s(x)),
        Premise::Not(inner) => format!("not {}", serialize_premise(inner)),
        Premise::Guard(a, c, b) => format!("{} {} {}", degree(a), c.symbol(), degree(b)),
    }
}

pub fn serialize_effect((e, t): &(Effect, Timing)) -> String {
    let body = match e {
        Effect::Assert(p) => serialize_pattern(p),
        Effect::Emit(p) => format!("Emit({})", serialize_pattern(p)),
    };
    match t {
        Timing::Immediate => body,
        Timing::Next => format!("N({body})"),
    }
}

pub fn serialize_rule(r: &Rule) -> String {
    let select = r
        .select
        .as_ref()
        .map(|s| {
            format!(
                " select max {} per {}",
                degree(&s.key),
                s.per
                    .iter()
                    .map(|v| format!("?{v}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        })
        .unwrap_or_default();
    format!(
        "rule {}{select} : {} => {}",
        r.name,
        r.premises
            .iter()
            .map(serialize_premise)
            .collect::<Vec<_>>()
            .join(" & "),
        r.effects
            .iter()
            .map(serialize_effect)
            .collect::<Vec<_>>()
            .join(" & ")
    )
}
