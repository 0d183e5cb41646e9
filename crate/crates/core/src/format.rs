//! Line-oriented text formats for FMP, SMP and tripartite instances.
//!
//! All three formats are header-tagged (`fmp v1`, `smp v1`, `tri v1`),
//! use `#` line comments, and round-trip bit-exactly: weights are printed
//! in lowest terms exactly as the model stores them.
//!
//! ```text
//! fmp v1
//! girl g1: { 1/2 b1, 1/2 b2 } ; { 1 b3 }
//!
//! smp v1
//! girl g1 : b1 b2        # listed girl (colon present)
//! girl g2                # unlisted girl
//! boy b1 : g1 g2
//! boy b2
//!
//! tri v1
//! triple g1 x1 y1
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fmp::{ElementId, FmpInstance, Fragment, GirlId, Tradeoff, TradeoffSet};
use crate::matching::SmpInstance;
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some((i + 1, trimmed))
        }
    })
}

fn expect_header<'a, I>(lines: &mut I, want: &str) -> Result<(), ParseError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    match lines.next() {
        Some((_, line)) if line == want => Ok(()),
        Some((n, line)) => Err(ParseError::new(
            n,
            1,
            format!("expected header `{want}`, found `{line}`"),
        )),
        None => Err(ParseError::new(1, 1, format!("missing `{want}` header"))),
    }
}

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            names: Vec::new(),
            ids: HashMap::new(),
        }
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }
}

fn valid_identifier(tok: &str) -> bool {
    !tok.is_empty()
        && tok
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '@' | '+'))
}

/// Parses the `fmp v1` format. Elements are interned in first-mention
/// order; the set of elements is exactly the set mentioned by fragments.
pub fn parse_fmp(text: &str) -> Result<FmpInstance, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, "fmp v1")?;

    let mut girls = Interner::new();
    let mut elements = Interner::new();
    let mut sets: Vec<TradeoffSet> = Vec::new();

    for (line_no, line) in lines {
        let rest = line.strip_prefix("girl").ok_or_else(|| {
            ParseError::new(line_no, 1, format!("expected `girl <id>: ...`, found `{line}`"))
        })?;
        let (name, body) = rest.split_once(':').ok_or_else(|| {
            ParseError::new(line_no, 1, "missing `:` after girl id".to_string())
        })?;
        let name = name.trim();
        if !valid_identifier(name) {
            return Err(ParseError::new(line_no, 1, format!("bad girl id `{name}`")));
        }
        if girls.ids.contains_key(name) {
            return Err(ParseError::new(
                line_no,
                1,
                format!("girl `{name}` declared twice"),
            ));
        }
        let girl = GirlId(girls.intern(name));

        let mut tradeoffs = Vec::new();
        let body = body.trim();
        if !body.is_empty() {
            for chunk in body.split(';') {
                let chunk = chunk.trim();
                let inner = chunk
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| {
                        ParseError::new(
                            line_no,
                            1,
                            format!("tradeoff must be braced, found `{chunk}`"),
                        )
                    })?;
                let mut fragments = Vec::new();
                for item in inner.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        return Err(ParseError::new(line_no, 1, "empty fragment".to_string()));
                    }
                    let (w, e) = item.split_once(char::is_whitespace).ok_or_else(|| {
                        ParseError::new(
                            line_no,
                            1,
                            format!("fragment `{item}` must be `<weight> <element>`"),
                        )
                    })?;
                    let weight: Rational = w.trim().parse().map_err(|err| {
                        ParseError::new(line_no, 1, format!("bad weight `{}`: {err}", w.trim()))
                    })?;
                    let elem = e.trim();
                    if !valid_identifier(elem) {
                        return Err(ParseError::new(
                            line_no,
                            1,
                            format!("bad element id `{elem}`"),
                        ));
                    }
                    fragments.push(Fragment::new(ElementId(elements.intern(elem)), weight));
                }
                tradeoffs.push(Tradeoff::canonical(fragments));
            }
        }
        sets.push(TradeoffSet { girl, tradeoffs });
    }

    FmpInstance::new(girls.names, elements.names, sets)
        .map_err(|e| ParseError::new(1, 1, e.to_string()))
}

/// Emits the `fmp v1` format; `parse_fmp(emit_fmp(x))` reproduces `x`
/// whenever every element of `x` is mentioned by some fragment.
pub fn emit_fmp(inst: &FmpInstance) -> String {
    let mut out = String::from("fmp v1\n");
    for set in inst.sets() {
        let _ = write!(out, "girl {}:", inst.girl_name(set.girl));
        for (i, t) in set.tradeoffs.iter().enumerate() {
            let sep = if i == 0 { " " } else { " ; " };
            let _ = write!(out, "{sep}{{ ");
            for (j, frag) in t.fragments.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} {}", frag.weight, inst.element_name(frag.element));
            }
            let _ = write!(out, " }}");
        }
        out.push('\n');
    }
    out
}

/// Parses the `smp v1` format. The colon distinguishes a listed member
/// (colon present, even with an empty list) from an unlisted one.
pub fn parse_smp(text: &str) -> Result<SmpInstance, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, "smp v1")?;

    struct Member {
        name: String,
        list: Option<Vec<String>>,
        line: usize,
    }
    let mut girls: Vec<Member> = Vec::new();
    let mut boys: Vec<Member> = Vec::new();

    for (line_no, line) in lines {
        let (kind, rest) = if let Some(rest) = line.strip_prefix("girl") {
            ("girl", rest)
        } else if let Some(rest) = line.strip_prefix("boy") {
            ("boy", rest)
        } else {
            return Err(ParseError::new(
                line_no,
                1,
                format!("expected `girl ...` or `boy ...`, found `{line}`"),
            ));
        };
        let (name, list) = match rest.split_once(':') {
            Some((name, items)) => {
                let list = items
                    .split_whitespace()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>();
                (name.trim(), Some(list))
            }
            None => (rest.trim(), None),
        };
        if !valid_identifier(name) {
            return Err(ParseError::new(line_no, 1, format!("bad {kind} id `{name}`")));
        }
        let member = Member {
            name: name.to_string(),
            list,
            line: line_no,
        };
        if kind == "girl" {
            girls.push(member);
        } else {
            boys.push(member);
        }
    }

    let girl_index: HashMap<&str, usize> = girls
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name.as_str(), i))
        .collect();
    let boy_index: HashMap<&str, usize> = boys
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name.as_str(), i))
        .collect();
    if girl_index.len() != girls.len() {
        return Err(ParseError::new(1, 1, "duplicate girl id".to_string()));
    }
    if boy_index.len() != boys.len() {
        return Err(ParseError::new(1, 1, "duplicate boy id".to_string()));
    }

    let girl_lists = girls
        .iter()
        .map(|m| {
            m.list
                .as_ref()
                .map(|items| {
                    items
                        .iter()
                        .map(|b| {
                            boy_index.get(b.as_str()).copied().ok_or_else(|| {
                                ParseError::new(
                                    m.line,
                                    1,
                                    format!("girl {} lists undeclared boy `{b}`", m.name),
                                )
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let boy_lists = boys
        .iter()
        .map(|m| {
            m.list
                .as_ref()
                .map(|items| {
                    items
                        .iter()
                        .map(|g| {
                            girl_index.get(g.as_str()).copied().ok_or_else(|| {
                                ParseError::new(
                                    m.line,
                                    1,
                                    format!("boy {} lists undeclared girl `{g}`", m.name),
                                )
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(SmpInstance {
        girl_names: girls.into_iter().map(|m| m.name).collect(),
        boy_names: boys.into_iter().map(|m| m.name).collect(),
        girl_lists,
        boy_lists,
    })
}

pub fn emit_smp(smp: &SmpInstance) -> String {
    let mut out = String::from("smp v1\n");
    for (i, name) in smp.girl_names.iter().enumerate() {
        match &smp.girl_lists[i] {
            Some(list) => {
                let _ = write!(out, "girl {name} :");
                for &b in list {
                    let _ = write!(out, " {}", smp.boy_names[b]);
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(out, "girl {name}");
            }
        }
    }
    for (i, name) in smp.boy_names.iter().enumerate() {
        match &smp.boy_lists[i] {
            Some(list) => {
                let _ = write!(out, "boy {name} :");
                for &g in list {
                    let _ = write!(out, " {}", smp.girl_names[g]);
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(out, "boy {name}");
            }
        }
    }
    out
}

/// A tripartite matching instance: a list of `(g, x, y)` triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripartiteInstance {
    pub triples: Vec<(String, String, String)>,
}

pub fn parse_tri(text: &str) -> Result<TripartiteInstance, ParseError> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, "tri v1")?;
    let mut triples = Vec::new();
    for (line_no, line) in lines {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("triple"), Some(g), Some(x), Some(y), None) => {
                for tok in [g, x, y] {
                    if !valid_identifier(tok) {
                        return Err(ParseError::new(line_no, 1, format!("bad id `{tok}`")));
                    }
                }
                triples.push((g.to_string(), x.to_string(), y.to_string()));
            }
            _ => {
                return Err(ParseError::new(
                    line_no,
                    1,
                    format!("expected `triple <g> <x> <y>`, found `{line}`"),
                ))
            }
        }
    }
    Ok(TripartiteInstance { triples })
}

pub fn emit_tri(tri: &TripartiteInstance) -> String {
    let mut out = String::from("tri v1\n");
    for (g, x, y) in &tri.triples {
        let _ = writeln!(out, "triple {g} {x} {y}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_minimal_fmp() {
        let inst = parse_fmp("fmp v1\ngirl g1: { 1 b1 }\n").unwrap();
        assert_eq!(inst.girl_count(), 1);
        assert_eq!(inst.element_count(), 1);
    }

    #[test]
    fn missing_header_is_an_error() {
        let err = parse_fmp("girl g1: { 1 b1 }\n").unwrap_err();
        assert!(err.msg.contains("fmp v1"));
    }

    #[test]
    fn bad_weight_is_an_error() {
        let err = parse_fmp("fmp v1\ngirl g1: { 2/0 b1 }\n").unwrap_err();
        assert!(err.msg.contains("2/0"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let text = "fmp v1\n# leading comment\n\ngirl g1: { 1 b1 } # trailing\n";
        assert!(parse_fmp(text).is_ok());
    }

    #[test]
    fn empty_tradeoff_set_round_trips() {
        let inst = parse_fmp("fmp v1\ngirl doomed:\ngirl g: { 1 b }\n").unwrap();
        assert!(inst.set(GirlId(0)).tradeoffs.is_empty());
        let again = parse_fmp(&emit_fmp(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn fmp_round_trip_on_worked_instances() {
        for inst in [
            crate::fixtures::psi_fmp(),
            crate::fixtures::psi_prime_fmp(),
            crate::fixtures::eq4_fmp(),
        ] {
            let text = emit_fmp(&inst);
            let again = parse_fmp(&text).unwrap();
            assert_eq!(inst, again, "round trip through:\n{text}");
        }
    }

    #[test]
    fn smp_listedness_is_explicit() {
        let text = "smp v1\ngirl g1 : b1 b2\ngirl g2\ngirl g3 :\nboy b1 : g1\nboy b2\n";
        let smp = parse_smp(text).unwrap();
        assert_eq!(smp.girl_lists[0], Some(vec![0, 1]));
        assert_eq!(smp.girl_lists[1], None);
        assert_eq!(smp.girl_lists[2], Some(vec![]), "listed with empty list");
        assert_eq!(smp.boy_lists[0], Some(vec![0]));
        assert_eq!(smp.boy_lists[1], None);
        let again = parse_smp(&emit_smp(&smp)).unwrap();
        assert_eq!(smp, again);
    }

    #[test]
    fn tri_round_trip() {
        let text = "tri v1\ntriple g1 x1 y1\ntriple g2 x1 y2\n";
        let tri = parse_tri(text).unwrap();
        assert_eq!(tri.triples.len(), 2);
        assert_eq!(emit_tri(&tri), text);
    }

    prop_compose! {
        fn arb_fmp()(girl_count in 1usize..5, elem_count in 1usize..6)
                    (girl_count in Just(girl_count),
                     elem_count in Just(elem_count),
                     shape in proptest::collection::vec(
                         proptest::collection::vec(
                             proptest::collection::vec(0u32..6, 1..4), 0..4),
                         1..5))
                    -> FmpInstance {
            // weights are built to sum to 1 within each tradeoff
            let girl_names: Vec<String> = (0..girl_count.max(shape.len()))
                .map(|i| format!("g{i}")).collect();
            let elem_count = elem_count as u32;
            let mut sets = Vec::new();
            for (gi, tradeoffs) in shape.iter().enumerate().take(girl_names.len()) {
                let mut ts = Vec::new();
                for elems in tradeoffs {
                    let mut uniq: Vec<u32> = Vec::new();
                    for &e in elems {
                        let e = e % elem_count;
                        if !uniq.contains(&e) {
                            uniq.push(e);
                        }
                    }
                    let n = uniq.len() as i64;
                    let frags = uniq
                        .into_iter()
                        .map(|e| Fragment::new(ElementId(e), Rational::ratio(1, n)))
                        .collect();
                    ts.push(Tradeoff::canonical(frags));
                }
                sets.push(TradeoffSet { girl: GirlId(gi as u32), tradeoffs: ts });
            }
            for (gi, set) in sets.iter_mut().enumerate() {
                set.girl = GirlId(gi as u32);
            }
            // keep only mentioned elements so emit/parse agree on the table
            let names: Vec<String> = (0..elem_count).map(|e| format!("b{e}")).collect();
            let inst = FmpInstance::new(girl_names, names, sets).unwrap();
            let text = emit_fmp(&inst);
            parse_fmp(&text).unwrap()
        }
    }

    proptest! {
        #[test]
        fn fmp_emit_parse_round_trip(inst in arb_fmp()) {
            let text = emit_fmp(&inst);
            let again = parse_fmp(&text).unwrap();
            prop_assert_eq!(inst, again);
        }
    }
}
