//! The `.plts` and `.ppda` text formats and the configuration syntax.
//!
//! ```text
//! plts
//! states: s u t1 t2
//! actions: a b
//! s -a-> 1/3 t1 + 2/3 t2     // comments run to the end of the line
//! ```
//!
//! ```text
//! ppda vpda(r=ret, i=int, c=call)
//! controls: p q
//! stack: X Z
//! actions: ret int call
//! p X -call-> 1/2 q X X + 1/2 p X Z
//! q X -ret-> 1 p _
//! ```
//!
//! `_` stands for the empty word. A target whose probability is omitted
//! gets probability 1.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dist::Dist;
use crate::error::{Error, Location, Result};
use crate::machines::{ActionClass, Config, ControlId, HeadTarget, Ppda, PpdaBuilder, Stack, SymbolId};
use crate::plts::{Plts, PltsBuilder};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    at: Location,
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (i, ch) in line.char_indices() {
        column += 1;
        if ch.is_whitespace() {
            if let Some((s, c)) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    at: Location { line: line_no, column: c },
                });
            }
        } else if start.is_none() {
            start = Some((i, column));
        }
    }
    if let Some((s, c)) = start {
        out.push(Token {
            text: &line[s..],
            at: Location { line: line_no, column: c },
        });
    }
    out
}

fn syntax(at: Location, message: impl Into<String>) -> Error {
    Error::Syntax {
        at,
        message: message.into(),
    }
}

fn arrow_action<'a>(tok: &Token<'a>) -> Option<&'a str> {
    let inner = tok.text.strip_prefix('-')?.strip_suffix("->")?;
    (!inner.is_empty()).then_some(inner)
}

fn probability(tok: &Token<'_>) -> Option<Result<Rational>> {
    let r: Rational = tok.text.parse().ok()?;
    if r.is_positive() {
        Some(Ok(r))
    } else {
        Some(Err(syntax(tok.at, format!("probability `{}` must be positive", tok.text))))
    }
}

/// Splits target tokens at `+` into `(probability, rest)` terms.
fn split_terms<'a>(tokens: &[Token<'a>], after: Location) -> Result<Vec<(Rational, Vec<Token<'a>>)>> {
    let mut terms = Vec::new();
    let mut current: Vec<Token<'a>> = Vec::new();
    let mut last = after;
    let mut flush = |current: &mut Vec<Token<'a>>, at: Location| -> Result<()> {
        if current.is_empty() {
            return Err(syntax(at, "empty term in distribution"));
        }
        let (p, rest) = match probability(&current[0]) {
            Some(p) => (p?, current[1..].to_vec()),
            None => (Rational::one(), current.clone()),
        };
        if rest.is_empty() {
            return Err(syntax(current[0].at, "probability without a target"));
        }
        terms.push((p, rest));
        current.clear();
        Ok(())
    };
    for tok in tokens {
        if tok.text == "+" {
            flush(&mut current, tok.at)?;
        } else {
            current.push(*tok);
        }
        last = tok.at;
    }
    flush(&mut current, last)?;
    Ok(terms)
}

fn check_sum(terms: &[(Rational, Vec<Token<'_>>)], at: Location, line: &str) -> Result<()> {
    let sum: Rational = terms.iter().map(|(p, _)| p).sum();
    if sum.is_one() {
        Ok(())
    } else {
        Err(Error::ProbabilitySum {
            at,
            rule: line.trim().to_string(),
            sum,
        })
    }
}

fn header_line<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, keyword: &str) -> Result<(usize, &'a str)> {
    for (no, raw) in lines.by_ref() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let rest = line.strip_prefix(keyword).filter(|r| r.is_empty() || r.starts_with(char::is_whitespace));
        return match rest {
            Some(r) => Ok((no, r.trim())),
            None => Err(syntax(Location { line: no, column: 1 }, format!("expected `{keyword}` header"))),
        };
    }
    Err(syntax(Location { line: 1, column: 1 }, format!("expected `{keyword}` header")))
}

fn declaration<'a>(tokens: &[Token<'a>], key: &str) -> Option<Vec<Token<'a>>> {
    let first = tokens.first()?;
    if first.text == key {
        return Some(tokens[1..].to_vec());
    }
    // `states:s t` with the name glued to the colon
    let glued = first.text.strip_prefix(key)?;
    let mut rest = vec![Token {
        text: glued,
        at: Location {
            line: first.at.line,
            column: first.at.column + key.chars().count(),
        },
    }];
    rest.extend_from_slice(&tokens[1..]);
    Some(rest)
}

pub fn parse_plts(text: &str) -> Result<Plts> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (no, rest) = header_line(&mut lines, "plts")?;
    if !rest.is_empty() {
        return Err(syntax(Location { line: no, column: 6 }, "unexpected text after `plts`"));
    }
    let mut b = PltsBuilder::new();
    let mut declared_states = false;
    for (no, raw) in lines {
        let line = strip_comment(raw);
        let tokens = tokenize(line, no);
        if tokens.is_empty() {
            continue;
        }
        if let Some(names) = declaration(&tokens, "states:") {
            for t in names {
                if b.state_id(t.text).is_some() {
                    return Err(syntax(t.at, format!("state `{}` declared twice", t.text)));
                }
                b.state(t.text);
            }
            declared_states = true;
            continue;
        }
        if let Some(names) = declaration(&tokens, "actions:") {
            for t in names {
                b.action(t.text);
            }
            continue;
        }
        if !declared_states {
            return Err(syntax(tokens[0].at, "transitions must follow the `states:` line"));
        }
        if tokens.len() < 3 {
            return Err(syntax(tokens[0].at, "expected `state -action-> distribution`"));
        }
        let source = b
            .state_id(tokens[0].text)
            .ok_or_else(|| unknown(tokens[0], "state"))?;
        let action = arrow_action(&tokens[1])
            .ok_or_else(|| syntax(tokens[1].at, format!("expected `-action->`, found `{}`", tokens[1].text)))?;
        let action = b.action(action);
        let terms = split_terms(&tokens[2..], tokens[1].at)?;
        check_sum(&terms, tokens[0].at, line)?;
        let mut entries = Vec::new();
        for (p, rest) in terms {
            if rest.len() != 1 {
                return Err(syntax(rest[1].at, "expected a single state per term"));
            }
            let s = b.state_id(rest[0].text).ok_or_else(|| unknown(rest[0], "state"))?;
            entries.push((s, p));
        }
        b.transition(source, action, Dist::new(entries)?);
    }
    Ok(b.build())
}

fn unknown(tok: Token<'_>, kind: &'static str) -> Error {
    Error::UnknownSymbol {
        at: tok.at,
        kind,
        name: tok.text.to_string(),
    }
}

fn parse_vpda_header(rest: &str, no: usize) -> Result<Option<HashMap<String, ActionClass>>> {
    if rest.is_empty() {
        return Ok(None);
    }
    let at = Location { line: no, column: 6 };
    let inner = rest
        .strip_prefix("vpda(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| syntax(at, "expected `vpda(r=..., i=..., c=...)`"))?;
    let mut classes = HashMap::new();
    for part in inner.split(',') {
        let (key, names) = part
            .split_once('=')
            .ok_or_else(|| syntax(at, format!("expected `key=actions` in `{}`", part.trim())))?;
        let class = match key.trim() {
            "r" => ActionClass::Return,
            "i" => ActionClass::Internal,
            "c" => ActionClass::Call,
            other => return Err(syntax(at, format!("unknown action class `{other}`"))),
        };
        for name in names.split_whitespace() {
            if classes.insert(name.to_string(), class).is_some() {
                return Err(syntax(at, format!("action `{name}` classified twice")));
            }
        }
    }
    Ok(Some(classes))
}

pub fn parse_ppda(text: &str) -> Result<Ppda> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, rest) = header_line(&mut lines, "ppda")?;
    let classes = parse_vpda_header(rest, header_no)?;
    let mut b = PpdaBuilder::new();
    let (mut have_controls, mut have_stack) = (false, false);
    for (no, raw) in lines {
        let line = strip_comment(raw);
        let tokens = tokenize(line, no);
        if tokens.is_empty() {
            continue;
        }
        if let Some(names) = declaration(&tokens, "controls:") {
            for t in names {
                if b.has_control(t.text) {
                    return Err(syntax(t.at, format!("control state `{}` declared twice", t.text)));
                }
                b.control(t.text);
            }
            have_controls = true;
            continue;
        }
        if let Some(names) = declaration(&tokens, "stack:") {
            for t in names {
                if t.text == "_" {
                    return Err(syntax(t.at, "`_` is reserved for the empty word"));
                }
                if b.has_symbol(t.text) {
                    return Err(syntax(t.at, format!("stack symbol `{}` declared twice", t.text)));
                }
                b.symbol(t.text);
            }
            have_stack = true;
            continue;
        }
        if let Some(names) = declaration(&tokens, "actions:") {
            for t in names {
                b.action(t.text);
            }
            continue;
        }
        if !have_controls || !have_stack {
            return Err(syntax(tokens[0].at, "rules must follow the `controls:` and `stack:` lines"));
        }
        if tokens.len() < 4 {
            return Err(syntax(tokens[0].at, "expected `control symbol -action-> distribution`"));
        }
        let q = b.control_id(tokens[0].text).ok_or_else(|| unknown(tokens[0], "control state"))?;
        let x = b.symbol_id(tokens[1].text).ok_or_else(|| unknown(tokens[1], "stack symbol"))?;
        let action = arrow_action(&tokens[2])
            .ok_or_else(|| syntax(tokens[2].at, format!("expected `-action->`, found `{}`", tokens[2].text)))?;
        let action = b.action(action);
        let terms = split_terms(&tokens[3..], tokens[2].at)?;
        check_sum(&terms, tokens[0].at, line)?;
        let mut entries = Vec::new();
        for (p, rest) in terms {
            let pc = b.control_id(rest[0].text).ok_or_else(|| unknown(rest[0], "control state"))?;
            let mut push = Vec::new();
            let syms = &rest[1..];
            if !(syms.len() == 1 && syms[0].text == "_") {
                for t in syms {
                    push.push(b.symbol_id(t.text).ok_or_else(|| unknown(*t, "stack symbol"))?);
                }
            }
            if push.len() > 2 {
                return Err(syntax(syms[2].at, "a rule may push at most two symbols"));
            }
            entries.push((HeadTarget::new(pc, push), p));
        }
        b.rule(q, x, action, Dist::new(entries)?)?;
    }
    if let Some(classes) = classes {
        let names: Vec<String> = {
            let mut extra: Vec<&String> = classes.keys().collect();
            extra.sort();
            extra.into_iter().cloned().collect()
        };
        for n in &names {
            b.action(n);
        }
        let mut list = Vec::new();
        for a in b.actions() {
            let class = classes.get(a).ok_or_else(|| {
                syntax(
                    Location { line: header_no, column: 6 },
                    format!("action `{a}` has no return/internal/call class"),
                )
            })?;
            list.push(*class);
        }
        b.set_classes(list)?;
    }
    if !have_controls || !have_stack {
        return Err(syntax(
            Location { line: header_no, column: 1 },
            "missing `controls:` or `stack:` declaration",
        ));
    }
    Ok(b.build())
}

pub fn write_plts(l: &Plts) -> String {
    write_plts_annotated(l, &[])
}

/// Canonical text with `comments` emitted as `//` lines after the header.
pub fn write_plts_annotated(l: &Plts, comments: &[String]) -> String {
    let mut out = String::from("plts\n");
    for c in comments {
        let _ = writeln!(out, "// {c}");
    }
    let _ = writeln!(out, "states: {}", l.state_names().join(" "));
    let _ = writeln!(out, "actions: {}", l.action_names().join(" "));
    for t in l.transitions() {
        let terms: Vec<String> = t
            .target
            .entries()
            .iter()
            .map(|(s, w)| format!("{w} {}", l.state_name(*s)))
            .collect();
        let _ = writeln!(
            out,
            "{} -{}-> {}",
            l.state_name(t.source),
            l.action_name(t.action),
            terms.join(" + ")
        );
    }
    out
}

pub fn write_ppda(m: &Ppda) -> String {
    write_ppda_annotated(m, &[])
}

pub fn write_ppda_annotated(m: &Ppda, comments: &[String]) -> String {
    let mut out = String::from("ppda");
    if let Some(classes) = m.action_classes() {
        let group = |c: ActionClass| {
            m.actions()
                .iter()
                .zip(classes)
                .filter(|(_, k)| **k == c)
                .map(|(a, _)| a.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = write!(
            out,
            " vpda(r={}, i={}, c={})",
            group(ActionClass::Return),
            group(ActionClass::Internal),
            group(ActionClass::Call)
        );
    }
    out.push('\n');
    for c in comments {
        let _ = writeln!(out, "// {c}");
    }
    let _ = writeln!(out, "controls: {}", m.controls().join(" "));
    let _ = writeln!(out, "stack: {}", m.symbols().join(" "));
    let _ = writeln!(out, "actions: {}", m.actions().join(" "));
    for r in m.rules() {
        let terms: Vec<String> = r
            .target
            .entries()
            .iter()
            .map(|(t, w)| {
                let mut s = format!("{w} {}", m.control_name(t.control));
                if t.push.is_empty() {
                    s.push_str(" _");
                }
                for x in &t.push {
                    s.push(' ');
                    s.push_str(m.symbol_name(*x));
                }
                s
            })
            .collect();
        let _ = writeln!(
            out,
            "{} {} -{}-> {}",
            m.control_name(r.control),
            m.symbol_name(r.symbol),
            m.action_name(r.action),
            terms.join(" + ")
        );
    }
    out
}

fn parse_count(digits: &str) -> Option<(u64, usize)> {
    if let Some(bin) = digits.strip_prefix("0b") {
        let len = bin.bytes().take_while(|b| *b == b'0' || *b == b'1').count();
        if len == 0 {
            return None;
        }
        return u64::from_str_radix(&bin[..len], 2).ok().map(|n| (n, len + 2));
    }
    let len = digits.bytes().take_while(u8::is_ascii_digit).count();
    if len == 0 {
        return None;
    }
    digits[..len].parse().ok().map(|n| (n, len))
}

/// Parses a glued run of symbols, each optionally followed by `^count`.
/// Longer symbol names are tried first; the first complete parse wins.
fn glued_symbols(m: &Ppda, text: &str, names: &[(String, SymbolId)]) -> Option<Vec<(SymbolId, u64)>> {
    if text.is_empty() {
        return Some(Vec::new());
    }
    for (name, id) in names {
        let Some(rest) = text.strip_prefix(name.as_str()) else {
            continue;
        };
        let mut options = Vec::new();
        if let Some(exp) = rest.strip_prefix('^') {
            if let Some((n, used)) = parse_count(exp) {
                options.push((n, &exp[used..]));
            }
        }
        options.push((1, rest));
        for (n, tail) in options {
            if let Some(mut more) = glued_symbols(m, tail, names) {
                more.insert(0, (*id, n));
                return Some(more);
            }
        }
    }
    None
}

/// Parses a configuration such as `pXXZ`, `p X X Z`, `p I^12 Z` or
/// `p I^0b1100 Z`. The stack is written top first; `p` or `p _` is the
/// empty stack.
pub fn parse_config(m: &Ppda, text: &str) -> Result<Config> {
    let at = Location { line: 1, column: 1 };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let Some(first) = tokens.first() else {
        return Err(syntax(at, "empty configuration"));
    };
    let mut symbol_names: Vec<(String, SymbolId)> =
        m.symbol_ids().map(|x| (m.symbol_name(x).to_string(), x)).collect();
    symbol_names.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
    let mut control_names: Vec<(String, ControlId)> =
        m.control_ids().map(|q| (m.control_name(q).to_string(), q)).collect();
    control_names.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));

    let rest_tokens = &tokens[1..];
    let parse_rest = |head: &str| -> Option<Vec<(SymbolId, u64)>> {
        let mut runs = glued_symbols(m, head, &symbol_names)?;
        for t in rest_tokens {
            if *t == "_" && rest_tokens.len() == 1 && head.is_empty() {
                continue;
            }
            runs.extend(glued_symbols(m, t, &symbol_names)?);
        }
        Some(runs)
    };
    for (name, q) in &control_names {
        let Some(head) = first.strip_prefix(name.as_str()) else {
            continue;
        };
        if let Some(runs) = parse_rest(head) {
            let mut stack = Stack::empty();
            for &(x, n) in runs.iter().rev() {
                stack.push_run(x, n);
            }
            return Ok(Config::new(*q, stack));
        }
    }
    Err(syntax(at, format!("cannot read `{text}` as a configuration of this machine")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_carry_columns() {
        let t = tokenize("  ab\tc  d", 3);
        let cols: Vec<_> = t.iter().map(|t| (t.text, t.at.column)).collect();
        assert_eq!(cols, vec![("ab", 3), ("c", 6), ("d", 9)]);
    }

    #[test]
    fn probability_sum_is_checked() {
        let err = parse_plts("plts\nstates: s t\nactions: a\ns -a-> 1/2 t + 2/5 s\n").unwrap_err();
        match err {
            Error::ProbabilitySum { at, rule, sum } => {
                assert_eq!(at.line, 4);
                assert_eq!(rule, "s -a-> 1/2 t + 2/5 s");
                assert_eq!(sum, Rational::new(9, 10));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_names_are_located() {
        let err = parse_plts("plts\nstates: s\ns -a-> 1 zz\n").unwrap_err();
        match err {
            Error::UnknownSymbol { at, kind, name } => {
                assert_eq!((at.line, at.column), (3, 10));
                assert_eq!(kind, "state");
                assert_eq!(name, "zz");
            }
            other => panic!("unexpected {other}"),
        }
        let err = parse_ppda("ppda\ncontrols: p\nstack: X\np Y -a-> 1 p _\n").unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol { kind: "stack symbol", .. }));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_plts("plz\n"), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_plts("plts\nstates: s\ns a 1 s\n"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_ppda("ppda\ncontrols: p\nstack: X\np X -a-> 1 p X X X\n"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn configs_in_all_notations() {
        let m = parse_ppda("ppda\ncontrols: p pq\nstack: I Z\n").unwrap();
        let a = parse_config(&m, "pIIZ").unwrap();
        let b = parse_config(&m, "p I I Z").unwrap();
        let c = parse_config(&m, "p I^2 Z").unwrap();
        let d = parse_config(&m, "pI^0b10Z").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a, d);
        assert_eq!(a.stack.len(), 3);
        let e = parse_config(&m, "pqZ").unwrap();
        assert_eq!(m.control_name(e.control), "pq");
        assert!(parse_config(&m, "p _").unwrap().stack.is_empty());
        assert!(parse_config(&m, "p").unwrap().stack.is_empty());
        assert!(parse_config(&m, "xZ").is_err());
        let big = parse_config(&m, "p I^0b10000000000000000000000000000000000000000 Z").unwrap();
        assert_eq!(big.stack.len(), (1u64 << 40) + 1);
    }

    #[test]
    fn vpda_header() {
        let m = parse_ppda(
            "ppda vpda(r=ar, i=ai, c=ac)\ncontrols: p\nstack: X\np X -ac-> 1 p X X\np X -ar-> 1 p _\n",
        )
        .unwrap();
        assert!(m.classify().vpda);
        assert_eq!(m.actions(), &["ac", "ar", "ai"]);
        let again = parse_ppda(&write_ppda(&m)).unwrap();
        assert_eq!(again, m);
    }
}
