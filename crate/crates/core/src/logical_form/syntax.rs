//! Textual form of logical forms, e.g.
//! `removeFiles(argmax(R[type].File, R[sizeInBytes]))`.
//!
//! Literals: integers are digits, enumeration symbols are bare upper-case
//! words, text is a bare lower-case word or a quoted string, entities are
//! `@id:Type`.

use std::fmt::{self, Write};
use std::sync::Arc;

use thiserror::Error;

use super::{LogicalForm, SuperlativeKind};
use crate::knowledge::{Relation, Value, TYPE_RELATION};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

const KEYWORDS: [&str; 3] = ["and", "argmax", "argmin"];

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_bare_text(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('a'..='z'))
        && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !KEYWORDS.contains(&s)
}

fn is_bare_sym(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('A'..='Z'))
        && cs.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn write_quoted(s: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('"')
}

fn write_value(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Int(i) => write!(f, "{i}"),
        Value::Text(t) if is_bare_text(t) => f.write_str(t),
        Value::Text(t) => write_quoted(t, f),
        Value::Sym(s) if is_bare_sym(s) => f.write_str(s),
        Value::Sym(s) => {
            f.write_char('#')?;
            write_quoted(s, f)
        }
        Value::Entity(e) => write!(f, "@{}:{}", e.id, e.ty),
    }
}

pub(super) fn write_lf(lf: &LogicalForm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match lf {
        LogicalForm::Value(v) => write_value(v, f),
        LogicalForm::TypeSet(t) => write!(f, "R[{TYPE_RELATION}].{t}"),
        LogicalForm::ReverseJoin(r, z) => {
            write!(f, "R[{r}].")?;
            write_lf(z, f)
        }
        LogicalForm::ForwardJoin(r, z) => {
            write!(f, "F[{r}].")?;
            write_lf(z, f)
        }
        LogicalForm::Intersect(a, b) => {
            f.write_str("and(")?;
            write_lf(a, f)?;
            f.write_str(", ")?;
            write_lf(b, f)?;
            f.write_char(')')
        }
        LogicalForm::Superlative { kind, set, key } => {
            write!(f, "{}(", kind.name())?;
            write_lf(set, f)?;
            write!(f, ", R[{key}])")
        }
        LogicalForm::Call(m, args) => {
            write!(f, "{m}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_lf(a, f)?;
            }
            f.write_char(')')
        }
    }
}

/// Parses the textual syntax. Also accepts `r.z` and `R[r.z]` for
/// `R[r].z`.
pub fn parse(input: &str) -> Result<LogicalForm, SyntaxError> {
    let mut p = Parser { src: input, pos: 0 };
    let lf = p.lf()?;
    p.skip_ws();
    if p.pos != input.len() {
        return Err(p.err("trailing input"));
    }
    Ok(lf)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str, SyntaxError> {
        self.skip_ws();
        let len = self.rest().find(|c| !is_ident_char(c)).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected an identifier"));
        }
        let s = &self.rest()[..len];
        self.pos += len;
        Ok(s)
    }

    fn quoted(&mut self) -> Result<String, SyntaxError> {
        self.expect('"')?;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(self.err("unterminated string"))
    }

    /// `[rel]` or `[rel.z]` after `R`/`F`.
    fn bracket(&mut self) -> Result<(Relation, Option<LogicalForm>), SyntaxError> {
        self.expect('[')?;
        let r = Relation::new(self.ident()?);
        let inner = if self.eat('.') { Some(self.lf()?) } else { None };
        self.expect(']')?;
        Ok((r, inner))
    }

    fn lf(&mut self) -> Result<LogicalForm, SyntaxError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some('"') => Ok(LogicalForm::Value(Value::text(self.quoted()?))),
            Some('#') => {
                self.pos += 1;
                Ok(LogicalForm::Value(Value::sym(self.quoted()?)))
            }
            Some('@') => {
                self.pos += 1;
                let id = self.ident()?;
                self.expect(':')?;
                let ty = self.ident()?;
                Ok(LogicalForm::Value(Value::entity(id, ty)))
            }
            Some(c) if c == '-' || c.is_ascii_digit() => self.int(),
            Some(_) => self.word(),
        }
    }

    fn int(&mut self) -> Result<LogicalForm, SyntaxError> {
        let start = self.pos;
        if self.rest().starts_with('-') {
            self.pos += 1;
        }
        let digits = self.rest().find(|c: char| !c.is_ascii_digit()).unwrap_or(self.rest().len());
        self.pos += digits;
        self.src[start..self.pos]
            .parse::<i64>()
            .map(|i| LogicalForm::Value(Value::Int(i)))
            .map_err(|_| SyntaxError {
                pos: start,
                msg: "bad integer".into(),
            })
    }

    fn word(&mut self) -> Result<LogicalForm, SyntaxError> {
        let start = self.pos;
        let name = self.ident()?;
        if (name == "R" || name == "F") && self.peek() == Some('[') {
            let (r, inner) = self.bracket()?;
            let forward = name == "F";
            let child = match inner {
                Some(z) => z,
                None => {
                    self.expect('.')?;
                    if !forward && r.is_type() {
                        return self.type_target();
                    }
                    self.lf()?
                }
            };
            return Ok(if forward {
                LogicalForm::ForwardJoin(r, Arc::new(child))
            } else {
                LogicalForm::ReverseJoin(r, Arc::new(child))
            });
        }
        if self.eat('(') {
            return self.application(name, start);
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            let child = self.lf()?;
            return Ok(LogicalForm::ReverseJoin(Relation::new(name), Arc::new(child)));
        }
        if is_bare_sym(name) {
            Ok(LogicalForm::Value(Value::sym(name)))
        } else if is_bare_text(name) {
            Ok(LogicalForm::Value(Value::text(name)))
        } else {
            Err(SyntaxError {
                pos: start,
                msg: format!("`{name}` is not a literal"),
            })
        }
    }

    /// The part after `R[type].`: a bare type name, or any other form.
    fn type_target(&mut self) -> Result<LogicalForm, SyntaxError> {
        let save = self.pos;
        if let Ok(name) = self.ident() {
            let followed = matches!(self.peek(), Some('(' | '.' | '['));
            if !followed && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                return Ok(LogicalForm::TypeSet(name.into()));
            }
        }
        self.pos = save;
        let child = self.lf()?;
        Ok(LogicalForm::ReverseJoin(Relation::new(TYPE_RELATION), Arc::new(child)))
    }

    fn application(&mut self, name: &str, start: usize) -> Result<LogicalForm, SyntaxError> {
        match name {
            "and" => {
                let a = self.lf()?;
                self.expect(',')?;
                let b = self.lf()?;
                self.expect(')')?;
                Ok(LogicalForm::Intersect(Arc::new(a), Arc::new(b)))
            }
            "argmax" | "argmin" => {
                let kind = if name == "argmax" {
                    SuperlativeKind::Argmax
                } else {
                    SuperlativeKind::Argmin
                };
                let set = self.lf()?;
                self.expect(',')?;
                if self.ident()? != "R" {
                    return Err(self.err("expected `R[key]`"));
                }
                let (key, inner) = self.bracket()?;
                if inner.is_some() {
                    return Err(self.err("a superlative key is a bare relation"));
                }
                self.expect(')')?;
                Ok(LogicalForm::Superlative {
                    kind,
                    set: Arc::new(set),
                    key,
                })
            }
            _ if name.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) => {
                let mut args = Vec::new();
                if !self.eat(')') {
                    loop {
                        args.push(Arc::new(self.lf()?));
                        if self.eat(')') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Ok(LogicalForm::Call(name.into(), args))
            }
            _ => Err(SyntaxError {
                pos: start,
                msg: format!("`{name}` cannot be applied"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_printed_examples() {
        for s in [
            "removeFiles(argmax(R[type].File, R[sizeInBytes]))",
            "turnLightOff(and(R[name].bedroom, R[floor].2))",
            "unloadContainers(R[index].4)",
            "assignEmployeesToNewManager(R[position].QA, F[manager].R[name].alice)",
            "setEventColor(R[title].\"Team Meeting\", BLUE)",
            "moveFiles(R[name].report, @dir2:Directory)",
        ] {
            let lf = parse(s).unwrap();
            assert_eq!(lf.to_string(), s);
        }
    }

    #[test]
    fn accepts_aliases() {
        let canonical = parse("remove(R[value].2)").unwrap();
        assert_eq!(parse("remove(R[value.2])").unwrap(), canonical);
        assert_eq!(parse("remove(value.2)").unwrap(), canonical);
    }

    #[test]
    fn type_set_sugar() {
        assert_eq!(parse("R[type].Room").unwrap(), LogicalForm::type_set("Room"));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "and(1)", "argmax(R[type].File, size)", "foo(", "R[x", "1 2", "Room"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![
            (-50i64..50).prop_map(Value::Int),
            "[a-z]{1,6}".prop_map(Value::text),
            "[A-Za-z ]{0,6}".prop_map(Value::text),
            "[A-Z]{1,5}".prop_map(Value::sym),
            ("[a-z][a-z0-9]{0,3}", "[A-Z][a-zA-Z]{0,5}").prop_map(|(i, t)| Value::entity(i, t)),
        ]
    }

    fn arb_lf() -> impl Strategy<Value = LogicalForm> {
        let rel = "[a-z][a-zA-Z]{0,6}";
        let leaf = prop_oneof![
            arb_value().prop_map(LogicalForm::Value),
            "[A-Z][a-zA-Z]{0,6}".prop_map(|t| LogicalForm::type_set(&t)),
        ];
        let set = leaf.prop_recursive(4, 24, 2, move |inner| {
            prop_oneof![
                (rel, inner.clone()).prop_map(|(r, z)| LogicalForm::reverse_join(&r, z)),
                (rel, inner.clone()).prop_map(|(r, z)| LogicalForm::forward_join(&r, z)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| LogicalForm::intersect(a, b)),
                (inner, rel, any::<bool>()).prop_map(|(s, k, max)| {
                    let kind = if max { SuperlativeKind::Argmax } else { SuperlativeKind::Argmin };
                    LogicalForm::superlative(kind, s, &k)
                }),
            ]
        });
        prop_oneof![
            set.clone(),
            ("[a-z][a-zA-Z]{0,8}", prop::collection::vec(set, 0..3))
                .prop_filter("method name is not a keyword", |(m, _)| !KEYWORDS.contains(&m.as_str()))
                .prop_map(|(m, args)| LogicalForm::call(&m, args)),
        ]
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(lf in arb_lf()) {
            let printed = lf.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), lf);
        }
    }
}
