use std::collections::BTreeMap;

use super::lexer::{tokenize, SourceSpan, Tok, Token};
use super::{Document, ParseError};
use crate::bridge::{Attribute, ClassSpec, Method};
use crate::dynamics::{CmpOp, Cond, Event, EventKind, Literal, Program, Stmt};
use crate::model::{Edge, Machine, Model, Path, StageKind};

type PResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    model: Model,
    classes: Vec<ClassSpec>,
    source_map: BTreeMap<String, SourceSpan>,
}

pub(super) fn parse_document(text: &str) -> PResult<Document> {
    let tokens = tokenize(text).map_err(|e| ParseError::Syntax { message: e.message, span: e.span })?;
    let mut p = Parser { tokens, pos: 0, model: Model::new(), classes: Vec::new(), source_map: BTreeMap::new() };
    while p.peek() != &Tok::Eof {
        p.item()?;
    }
    Ok(Document { model: p.model, classes: p.classes, source_map: p.source_map })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax { message: message.into(), span: self.span() })
    }

    fn expect(&mut self, want: Tok) -> PResult<SourceSpan> {
        if *self.peek() == want {
            Ok(self.next().span)
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.next().span)
        } else {
            self.error(format!("expected `{kw}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.next().span)),
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    /// A name that may not be a stage keyword.
    fn name(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        if let Tok::Ident(s) = self.peek() {
            if StageKind::from_keyword(s).is_some() {
                return self.error(format!("`{s}` is a stage keyword and cannot be used as {what}"));
            }
        }
        self.ident(what)
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    /// `NAME ("." NAME)* ("." KIND)?`, prefixed by `scope` when given.
    fn path(&mut self, scope: Option<&Path>) -> PResult<Path> {
        let mut segments: Vec<String> = scope.map(|s| s.segments().to_vec()).unwrap_or_default();
        let mut stage = None;
        loop {
            let (seg, span) = self.ident("a path")?;
            match StageKind::from_keyword(&seg) {
                Some(kind) if segments.is_empty() => {
                    return Err(ParseError::Syntax {
                        message: format!("path cannot start with stage keyword `{kind}`"),
                        span,
                    })
                }
                Some(kind) => {
                    stage = Some(kind);
                    if self.peek() == &Tok::Dot {
                        return self.error("a stage keyword must end the path");
                    }
                    break;
                }
                None => segments.push(seg),
            }
            if self.peek() != &Tok::Dot {
                break;
            }
            self.next();
        }
        Ok(Path::from_parts(segments, stage))
    }

    fn item(&mut self) -> PResult<()> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.error(format!("expected a declaration, found {}", self.peek()));
        };
        match kw.as_str() {
            "machine" => {
                let m = self.machine(None)?;
                self.model.machines.push(m);
                Ok(())
            }
            "flow" => self.edge(None, true),
            "trigger" => self.edge(None, false),
            "event" => self.event(),
            "chronology" => self.chronology(),
            "program" => self.program(),
            "class" => self.class(),
            other => self.error(format!("unknown declaration `{other}`")),
        }
    }

    fn machine(&mut self, parent: Option<&Path>) -> PResult<Machine> {
        let start = self.keyword("machine")?;
        let (name, _) = self.name("a machine name")?;
        let here = match parent {
            Some(p) => p.child(&name),
            None => Path::machine([name.clone()]),
        };
        let mut machine = Machine::new(&name);
        if self.is_keyword("of") {
            self.next();
            machine.of_owner = Some(self.path(None)?);
        }
        self.expect(Tok::LBrace)?;
        self.source_map.entry(here.to_string()).or_insert(start);
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "stage" => {
                        self.next();
                        let (k, span) = self.ident("a stage kind")?;
                        let Some(kind) = StageKind::from_keyword(&k) else {
                            return Err(ParseError::Syntax { message: format!("`{k}` is not a stage kind"), span });
                        };
                        if !machine.stages.insert(kind) {
                            return Err(ParseError::Syntax { message: format!("stage `{k}` declared twice"), span });
                        }
                    }
                    "meta" => {
                        self.next();
                        let (key, span) = self.ident("a metadata key")?;
                        self.expect(Tok::Colon)?;
                        let value = self.string("a metadata string")?;
                        if machine.metadata.insert(key.clone(), value).is_some() {
                            return Err(ParseError::Syntax { message: format!("metadata `{key}` set twice"), span });
                        }
                    }
                    "machine" => {
                        let child = self.machine(Some(&here))?;
                        machine.children.push(child);
                    }
                    "flow" => self.edge(Some(&here), true)?,
                    "trigger" => self.edge(Some(&here), false)?,
                    other => return self.error(format!("unexpected `{other}` in machine body")),
                },
                other => return self.error(format!("expected a machine body item or `}}`, found {other}")),
            }
        }
        Ok(machine)
    }

    fn edge(&mut self, scope: Option<&Path>, flow: bool) -> PResult<()> {
        let start = self.keyword(if flow { "flow" } else { "trigger" })?;
        let from = self.path(scope)?;
        self.expect(if flow { Tok::Arrow } else { Tok::FatArrow })?;
        let to = self.path(scope)?;
        let edge = Edge::new(from, to);
        let key = if flow { format!("flow {edge}") } else { format!("trigger {} => {}", edge.from, edge.to) };
        self.source_map.entry(key).or_insert(start);
        if flow {
            self.model.flows.push(edge);
        } else {
            self.model.triggers.push(edge);
        }
        Ok(())
    }

    fn event(&mut self) -> PResult<()> {
        let start = self.keyword("event")?;
        let (id, _) = self.name("an event id")?;
        let label = match self.peek() {
            Tok::Str(_) => self.string("a label")?,
            _ => String::new(),
        };
        self.expect(Tok::LBrace)?;
        self.keyword("region")?;
        self.expect(Tok::Colon)?;
        let mut event = Event { id: id.clone(), label, ..Event::default() };
        loop {
            event.region.insert(self.path(None)?);
            if self.peek() != &Tok::Comma {
                break;
            }
            self.next();
        }
        if self.is_keyword("kind") {
            self.next();
            self.expect(Tok::Colon)?;
            let (tag, span) = self.ident("an event kind")?;
            event.kind = match tag.as_str() {
                "plain" => EventKind::Plain,
                "ctor" => EventKind::Ctor(self.path(None)?),
                "set" => EventKind::Set(self.path(None)?),
                "get" => EventKind::Get(self.path(None)?),
                other => {
                    return Err(ParseError::Syntax {
                        message: format!("unknown event kind `{other}` (expected plain, ctor, set or get)"),
                        span,
                    })
                }
            };
        }
        if self.is_keyword("time") {
            self.next();
            self.expect(Tok::Colon)?;
            event.time = Some(self.string("a time annotation")?);
        }
        if self.is_keyword("meta") {
            self.next();
            self.expect(Tok::Colon)?;
            event.meta = Some(self.string("a meta annotation")?);
        }
        self.expect(Tok::RBrace)?;
        self.source_map.entry(format!("event {id}")).or_insert(start);
        self.model.events.push(event);
        Ok(())
    }

    fn chronology(&mut self) -> PResult<()> {
        let start = self.keyword("chronology")?;
        self.source_map.entry("chronology".to_string()).or_insert(start);
        self.expect(Tok::LBrace)?;
        while self.peek() != &Tok::RBrace {
            let (a, span) = self.name("an event id")?;
            self.expect(Tok::Arrow)?;
            let (b, _) = self.name("an event id")?;
            self.source_map.entry(format!("chronology {a} -> {b}")).or_insert(span);
            self.model.chronology.insert(a, b);
        }
        self.next();
        Ok(())
    }

    fn program(&mut self) -> PResult<()> {
        let start = self.keyword("program")?;
        let (name, _) = self.name("a program name")?;
        let body = self.block()?;
        self.source_map.entry(format!("program {name}")).or_insert(start);
        self.model.programs.push(Program { name, body });
        Ok(())
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while self.peek() != &Tok::RBrace {
            body.push(self.stmt()?);
        }
        self.next();
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        // `if` and `repeat` are only keywords when not used as `NAME;`
        if self.peek_at(1) != &Tok::Semi {
            if self.is_keyword("if") {
                self.next();
                let lhs = self.path(None)?;
                let op = match self.next().tok {
                    Tok::EqEq => CmpOp::Eq,
                    Tok::NotEq => CmpOp::Ne,
                    _ => {
                        self.pos -= 1;
                        return self.error(format!("expected `==` or `!=`, found {}", self.peek()));
                    }
                };
                let rhs = match self.peek().clone() {
                    Tok::Str(s) => Literal::Str(s),
                    Tok::Int(i) => Literal::Int(i),
                    Tok::Ident(s) if s == "null" => Literal::Null,
                    other => return self.error(format!("expected a string, integer or `null`, found {other}")),
                };
                self.next();
                let then = self.block()?;
                let otherwise = if self.is_keyword("else") {
                    self.next();
                    Some(self.block()?)
                } else {
                    None
                };
                return Ok(Stmt::If { cond: Cond { lhs, op, rhs }, then, otherwise });
            }
            if self.is_keyword("repeat") {
                self.next();
                let count = match self.peek().clone() {
                    Tok::Int(i) if (0..=u32::MAX as i64).contains(&i) => i as u32,
                    Tok::Int(i) => return self.error(format!("repeat count {i} is out of range")),
                    other => return self.error(format!("expected a repeat count, found {other}")),
                };
                self.next();
                let body = self.block()?;
                return Ok(Stmt::Repeat { count, body });
            }
        }
        let (id, _) = self.name("an event id")?;
        self.expect(Tok::Semi)?;
        Ok(Stmt::Fire(id))
    }

    fn class(&mut self) -> PResult<()> {
        let start = self.keyword("class")?;
        let (name, _) = self.name("a class name")?;
        let mut spec = ClassSpec::new(&name);
        if self.is_keyword("extends") {
            self.next();
            spec.superclass = Some(self.name("a superclass name")?.0);
        }
        self.expect(Tok::LBrace)?;
        let mut method_names = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "attr" => {
                    self.next();
                    let (attr, _) = self.name("an attribute name")?;
                    self.expect(Tok::Colon)?;
                    let (ty, span) = self.ident("a type")?;
                    let ty = ty
                        .parse()
                        .map_err(|e: crate::types::UnknownType| ParseError::Syntax { message: e.to_string(), span })?;
                    self.expect(Tok::Semi)?;
                    spec.attributes.push(Attribute::new(attr, ty));
                }
                Tok::Ident(kw) if kw == "method" => {
                    self.next();
                    method_names.push(self.name("a method name")?.0);
                    self.expect(Tok::Semi)?;
                }
                other => return self.error(format!("expected `attr`, `method` or `}}`, found {other}")),
            }
        }
        spec.methods = method_names.iter().map(|m| Method::new(m, spec.infer_kind(m))).collect();
        self.source_map.entry(format!("class {name}")).or_insert(start);
        self.classes.push(spec);
        Ok(())
    }
}
