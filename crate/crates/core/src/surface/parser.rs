use std::collections::BTreeMap;
use std::fmt;

use super::lexer::{lex, Pos, Tok};
use crate::syntax::*;
use crate::types::*;
use crate::typing::dual_sess;

#[derive(Debug, Clone, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

/// A parsed source file: type aliases, free-name typings, named process
/// definitions (inlined at use sites), and the entry process.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub aliases: BTreeMap<String, SessType>,
    pub chans: Vec<(Name, ChanType)>,
    pub defs: Vec<(String, Proc)>,
    pub entry: Proc,
}

const KEYWORDS: &[&str] = &[
    "new", "rec", "type", "chan", "def", "main", "end", "mu", "lin", "sh", "dual", "len", "true",
    "false", "int", "bool", "str",
];

#[derive(Debug, Clone)]
enum Binding {
    BoundName(NameKind),
    ChanVar,
    ValVar,
    RecV,
    Def,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    aliases: BTreeMap<String, SessType>,
    defs: BTreeMap<String, Proc>,
    scope: Vec<(String, Binding)>,
    tvars: Vec<String>,
    /// resolution for unbound identifiers in channel position
    lenient: bool,
}

pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    let toks = lex(text).map_err(|(p, m)| err_at(p, m))?;
    let mut p = Parser {
        toks,
        at: 0,
        aliases: BTreeMap::new(),
        defs: BTreeMap::new(),
        scope: Vec::new(),
        tvars: Vec::new(),
        lenient: false,
    };
    p.file()
}

/// Parses a bare process; unbound identifiers in channel position become
/// session names.
pub fn parse_proc(text: &str) -> Result<Proc, ParseError> {
    let toks = lex(text).map_err(|(p, m)| err_at(p, m))?;
    let mut p = Parser {
        toks,
        at: 0,
        aliases: BTreeMap::new(),
        defs: BTreeMap::new(),
        scope: Vec::new(),
        tvars: Vec::new(),
        lenient: true,
    };
    let proc = p.par()?;
    p.expect(Tok::Eof)?;
    Ok(proc)
}

/// Parses a session type in isolation.
pub fn parse_sess_type(text: &str) -> Result<SessType, ParseError> {
    let toks = lex(text).map_err(|(p, m)| err_at(p, m))?;
    let mut p = Parser {
        toks,
        at: 0,
        aliases: BTreeMap::new(),
        defs: BTreeMap::new(),
        scope: Vec::new(),
        tvars: Vec::new(),
        lenient: true,
    };
    let s = p.sess()?;
    p.expect(Tok::Eof)?;
    Ok(s)
}

fn err_at(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError { line: pos.line, col: pos.col, msg: msg.into() }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        let i = (self.at + 1).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(err_at(self.pos(), format!("expected `{t}`, found `{}`", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(err_at(self.pos(), format!("expected identifier, found `{other}`"))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn lookup(&self, id: &str) -> Option<&Binding> {
        self.scope.iter().rev().find(|(b, _)| b == id).map(|(_, b)| b)
    }

    // ---------- files ----------

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut chans: Vec<(Name, ChanType)> = Vec::new();
        let mut defs: Vec<(String, Proc)> = Vec::new();
        let mut entry: Option<Proc> = None;
        loop {
            if *self.peek() == Tok::Eof {
                break;
            }
            let pos = self.pos();
            if self.eat_kw("type") {
                let name = self.ident()?;
                if self.aliases.contains_key(&name) {
                    return Err(err_at(pos, format!("duplicate type alias `{name}`")));
                }
                self.expect(Tok::Eq)?;
                let s = self.sess()?;
                self.aliases.insert(name, s);
            } else if self.eat_kw("chan") {
                let (name, _) = self.binder_name()?;
                self.expect(Tok::Colon)?;
                let t = self.chan_type()?;
                let name = match &t {
                    ChanType::Session(_) => Name { kind: NameKind::Session, ..name },
                    ChanType::Shared(_) => {
                        if name.dual {
                            return Err(err_at(pos, "shared names have no dual endpoint"));
                        }
                        Name { kind: NameKind::Shared, ..name }
                    }
                    ChanType::Base(_) => {
                        return Err(err_at(pos, "a channel cannot have a base type"))
                    }
                };
                self.scope.push((name.base.clone(), Binding::BoundName(name.kind)));
                chans.push((name, t));
            } else if self.eat_kw("def") {
                let name = self.ident()?;
                if self.defs.contains_key(&name) {
                    return Err(err_at(pos, format!("duplicate definition `{name}`")));
                }
                self.expect(Tok::Eq)?;
                let p = self.par()?;
                self.defs.insert(name.clone(), p.clone());
                self.scope.push((name.clone(), Binding::Def));
                defs.push((name, p));
            } else if self.eat_kw("main") {
                self.expect(Tok::Eq)?;
                let p = self.par()?;
                if entry.is_some() {
                    return Err(err_at(pos, "duplicate `main`"));
                }
                entry = Some(p);
            } else {
                return Err(err_at(
                    pos,
                    format!("expected declaration or `main`, found `{}`", self.peek()),
                ));
            }
        }
        let entry = entry.ok_or_else(|| err_at(self.pos(), "missing `main = ...`"))?;
        Ok(SourceFile { aliases: self.aliases.clone(), chans, defs, entry })
    }

    /// A binder-position name: optionally-dualled, optionally-indexed name
    /// atom (identifier, `^..`, or `$..`).
    fn binder_name(&mut self) -> Result<(Name, Pos), ParseError> {
        let pos = self.pos();
        let dual = if *self.peek() == Tok::Tilde {
            self.bump();
            true
        } else {
            false
        };
        let n = self.name_atom(dual, pos)?;
        Ok((n, pos))
    }

    fn name_atom(&mut self, dual: bool, pos: Pos) -> Result<Name, ParseError> {
        match self.bump() {
            Tok::Caret => match self.bump() {
                Tok::Int(k) => Ok(Name {
                    base: "c".into(),
                    index: Some(k as u32),
                    dual,
                    kind: NameKind::Propagator,
                }),
                Tok::Ident(base) => {
                    let index = self.opt_index()?;
                    Ok(Name { base, index, dual, kind: NameKind::Propagator })
                }
                other => Err(err_at(pos, format!("expected propagator name, found `{other}`"))),
            },
            Tok::Dollar => {
                if dual {
                    return Err(err_at(pos, "recursive propagators take no outer `~`"));
                }
                let ep_dual = if *self.peek() == Tok::Tilde {
                    self.bump();
                    true
                } else {
                    false
                };
                let base = self.ident()?;
                Ok(Name { base, index: None, dual: ep_dual, kind: NameKind::RecPropagator })
            }
            Tok::Ident(base) => {
                if KEYWORDS.contains(&base.as_str()) {
                    return Err(err_at(pos, format!("`{base}` is a keyword")));
                }
                let index = self.opt_index()?;
                Ok(Name { base, index, dual, kind: NameKind::Session })
            }
            other => Err(err_at(pos, format!("expected name, found `{other}`"))),
        }
    }

    fn opt_index(&mut self) -> Result<Option<u32>, ParseError> {
        if *self.peek() == Tok::At {
            self.bump();
            match self.bump() {
                Tok::Int(i) if i >= 1 => Ok(Some(i as u32)),
                other => Err(err_at(self.pos(), format!("expected index >= 1, found `{other}`"))),
            }
        } else {
            Ok(None)
        }
    }

    /// A channel reference in subject/argument position.
    fn chan_ref(&mut self) -> Result<Chan, ParseError> {
        let pos = self.pos();
        let dual = if *self.peek() == Tok::Tilde {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Caret | Tok::Dollar => {
                let n = self.name_atom(dual, pos)?;
                Ok(Chan::Name(n))
            }
            Tok::Ident(id) => {
                self.bump();
                if KEYWORDS.contains(&id.as_str()) {
                    return Err(err_at(pos, format!("`{id}` is a keyword")));
                }
                let index = self.opt_index()?;
                match self.lookup(&id) {
                    Some(Binding::ChanVar) | Some(Binding::ValVar) => {
                        if dual {
                            return Err(err_at(pos, format!("cannot dualize variable `{id}`")));
                        }
                        Ok(Chan::Var(Var { base: id, index }))
                    }
                    Some(Binding::BoundName(kind)) => {
                        if *kind == NameKind::Shared && dual {
                            return Err(err_at(pos, "shared names have no dual endpoint"));
                        }
                        Ok(Chan::Name(Name { base: id, index, dual, kind: *kind }))
                    }
                    Some(Binding::RecV) | Some(Binding::Def) => {
                        Err(err_at(pos, format!("`{id}` is not a channel")))
                    }
                    None => {
                        if self.lenient {
                            Ok(Chan::Name(Name { base: id, index, dual, kind: NameKind::Session }))
                        } else {
                            Err(err_at(pos, format!("unbound name `{id}`")))
                        }
                    }
                }
            }
            other => Err(err_at(pos, format!("expected channel, found `{other}`"))),
        }
    }

    // ---------- processes ----------

    fn par(&mut self) -> Result<Proc, ParseError> {
        let mut ps = vec![self.prefix()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            ps.push(self.prefix()?);
        }
        if ps.len() == 1 {
            Ok(ps.pop().unwrap())
        } else {
            Ok(Proc::par_all(ps))
        }
    }

    fn prefix(&mut self) -> Result<Proc, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Proc::Nil)
            }
            Tok::Ident(id) if id == "new" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (mut name, npos) = self.binder_name()?;
                if name.dual {
                    return Err(err_at(npos, "restriction binds the positive endpoint"));
                }
                self.expect(Tok::Colon)?;
                let annot = self.chan_type()?;
                self.expect(Tok::RParen)?;
                if name.kind == NameKind::Session {
                    name.kind = match &annot {
                        ChanType::Session(_) => NameKind::Session,
                        ChanType::Shared(_) => NameKind::Shared,
                        ChanType::Base(_) => {
                            return Err(err_at(npos, "cannot restrict a base-typed name"))
                        }
                    };
                }
                self.scope.push((name.base.clone(), Binding::BoundName(name.kind)));
                let body = self.prefix()?;
                self.scope.pop();
                Ok(Proc::Res { name, annot, body: Box::new(body) })
            }
            Tok::Ident(id) if id == "rec" => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Dot)?;
                self.scope.push((x.clone(), Binding::RecV));
                let body = self.prefix()?;
                self.scope.pop();
                Ok(Proc::Rec { var: x, body: Box::new(body) })
            }
            Tok::LParen => {
                // either a parenthesized process or an application of a
                // parenthesized abstraction
                if matches!(self.peek2(), Tok::Lambda)
                    || (matches!(self.peek2(), Tok::Bang)
                        && matches!(&self.toks.get(self.at + 2).map(|t| t.0.clone()), Some(Tok::Lambda)))
                {
                    let fun = self.value()?;
                    let args = self.app_args()?;
                    return Ok(Proc::App { fun, args });
                }
                self.bump();
                let p = self.par()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Lambda | Tok::Bang => {
                // abstraction applied directly (rare without parens); `!` alone
                // cannot start a process
                if *self.peek() == Tok::Bang && !matches!(self.peek2(), Tok::Lambda) {
                    return Err(err_at(pos, "expected process"));
                }
                let fun = self.value()?;
                let args = self.app_args()?;
                Ok(Proc::App { fun, args })
            }
            Tok::Ident(_) | Tok::Tilde | Tok::Caret | Tok::Dollar => {
                // definition / recursion variable references: bare identifier
                if let Tok::Ident(id) = self.peek().clone() {
                    match self.lookup(&id) {
                        Some(Binding::RecV)
                            if !matches!(
                                self.peek2(),
                                Tok::Bang | Tok::Query | Tok::Lt | Tok::Gt | Tok::At
                            ) =>
                        {
                            self.bump();
                            return Ok(Proc::RecVar(id));
                        }
                        Some(Binding::Def)
                            if !matches!(
                                self.peek2(),
                                Tok::Bang | Tok::Query | Tok::Lt | Tok::Gt | Tok::At
                            ) =>
                        {
                            self.bump();
                            return Ok(self.defs[&id].clone());
                        }
                        _ => {}
                    }
                }
                let subj = self.chan_ref()?;
                match self.peek().clone() {
                    Tok::Bang => {
                        self.bump();
                        match self.bump() {
                            Tok::Lt => {
                                let payload = if *self.peek() == Tok::Gt {
                                    vec![]
                                } else {
                                    self.comma_list(|p| p.value())?
                                };
                                self.expect(Tok::Gt)?;
                                self.expect(Tok::Dot)?;
                                let cont = self.prefix()?;
                                Ok(Proc::Output { subj, payload, cont: Box::new(cont) })
                            }
                            Tok::LtLt => {
                                let items = self.comma_list(|p| {
                                    let a = p.arg()?;
                                    p.expect(Tok::Colon)?;
                                    let t = p.chan_type()?;
                                    Ok((a, t))
                                })?;
                                self.expect(Tok::GtGt)?;
                                self.expect(Tok::Dot)?;
                                let cont = self.prefix()?;
                                Ok(Proc::OutputNp { subj, items, cont: Box::new(cont) })
                            }
                            other => {
                                Err(err_at(pos, format!("expected `<` after `!`, found `{other}`")))
                            }
                        }
                    }
                    Tok::Query => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        if *self.peek() == Tok::LParen {
                            // name-passing input u?((x: C,..)).P
                            self.bump();
                            let mut binders = Vec::new();
                            if *self.peek() != Tok::RParen {
                                loop {
                                    let id = self.ident()?;
                                    let ix = self.opt_index()?;
                                    self.expect(Tok::Colon)?;
                                    let t = self.chan_type()?;
                                    binders.push((Var { base: id, index: ix }, t));
                                    if *self.peek() == Tok::Comma {
                                        self.bump();
                                    } else {
                                        break;
                                    }
                                }
                            }
                            self.expect(Tok::RParen)?;
                            self.expect(Tok::RParen)?;
                            self.expect(Tok::Dot)?;
                            for (b, _) in &binders {
                                self.scope.push((b.base.clone(), Binding::ChanVar));
                            }
                            let cont = self.prefix()?;
                            for _ in &binders {
                                self.scope.pop();
                            }
                            Ok(Proc::InputNp { subj, binders, cont: Box::new(cont) })
                        } else {
                            let mut binders = Vec::new();
                            if *self.peek() != Tok::RParen {
                                loop {
                                    binders.push(self.ident()?);
                                    if *self.peek() == Tok::Comma {
                                        self.bump();
                                    } else {
                                        break;
                                    }
                                }
                            }
                            self.expect(Tok::RParen)?;
                            self.expect(Tok::Dot)?;
                            for b in &binders {
                                self.scope.push((b.clone(), Binding::ValVar));
                            }
                            let cont = self.prefix()?;
                            for _ in &binders {
                                self.scope.pop();
                            }
                            Ok(Proc::Input { subj, binders, cont: Box::new(cont) })
                        }
                    }
                    Tok::Lt => {
                        self.bump();
                        let label = self.ident()?;
                        self.expect(Tok::Dot)?;
                        let cont = self.prefix()?;
                        Ok(Proc::Select { subj, label, cont: Box::new(cont) })
                    }
                    Tok::Gt => {
                        self.bump();
                        self.expect(Tok::LBrace)?;
                        let mut arms = BTreeMap::new();
                        loop {
                            let label = self.ident()?;
                            self.expect(Tok::Colon)?;
                            let p = self.par()?;
                            if arms.insert(label.clone(), p).is_some() {
                                return Err(err_at(pos, format!("duplicate branch label `{label}`")));
                            }
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace)?;
                        Ok(Proc::Branch { subj, arms })
                    }
                    // an application `x u`, `x(u,..)`, `x 5`
                    Tok::Ident(_)
                    | Tok::LParen
                    | Tok::Int(_)
                    | Tok::Str(_)
                    | Tok::Caret
                    | Tok::Dollar => {
                        let fun = match subj {
                            Chan::Var(v) if v.index.is_none() => Value::Var(v.base),
                            other => {
                                return Err(err_at(
                                    pos,
                                    format!("`{other}` cannot be applied (not a variable)"),
                                ))
                            }
                        };
                        let args = self.app_args()?;
                        Ok(Proc::App { fun, args })
                    }
                    other => Err(err_at(pos, format!("expected process, found `{other}`"))),
                }
            }
            other => Err(err_at(pos, format!("expected process, found `{other}`"))),
        }
    }

    fn app_args(&mut self) -> Result<Vec<Arg>, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                args = self.comma_list(|p| p.arg())?;
            }
            self.expect(Tok::RParen)?;
            Ok(args)
        } else {
            Ok(vec![self.arg()?])
        }
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Arg::Val(Value::Lit(Lit::Int(i))))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Arg::Val(Value::Lit(Lit::Str(s))))
            }
            Tok::Ident(id) if id == "true" || id == "false" => {
                self.bump();
                Ok(Arg::Val(Value::Lit(Lit::Bool(id == "true"))))
            }
            Tok::Ident(id) if matches!(self.lookup(&id), Some(Binding::ValVar)) => {
                self.bump();
                Ok(Arg::Val(Value::Var(id)))
            }
            _ => Ok(Arg::Chan(self.chan_ref()?)),
        }
    }

    fn comma_list<T>(
        &mut self,
        f: impl Fn(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut out = vec![f(self)?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(f(self)?);
        }
        Ok(out)
    }

    // ---------- values ----------

    fn value(&mut self) -> Result<Value, ParseError> {
        let lhs = self.value_unary()?;
        match self.peek() {
            Tok::Eq => {
                self.bump();
                let rhs = self.value_unary()?;
                Ok(Value::Expr(Op::Eq, vec![lhs, rhs]))
            }
            Tok::Plus => {
                self.bump();
                let rhs = self.value_unary()?;
                Ok(Value::Expr(Op::Add, vec![lhs, rhs]))
            }
            _ => Ok(lhs),
        }
    }

    fn value_unary(&mut self) -> Result<Value, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                let v = self.value_atom()?;
                match v {
                    Value::Lit(Lit::Int(i)) => Ok(Value::Lit(Lit::Int(-i))),
                    other => Ok(Value::Expr(Op::Neg, vec![other])),
                }
            }
            Tok::Ident(id) if id == "len" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let v = self.value()?;
                self.expect(Tok::RParen)?;
                Ok(Value::Expr(Op::Len, vec![v]))
            }
            _ => self.value_atom().map_err(|e| if e.msg.starts_with("expected value") {
                err_at(pos, e.msg)
            } else {
                e
            }),
        }
    }

    fn value_atom(&mut self) -> Result<Value, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Value::Lit(Lit::Int(i)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Lit(Lit::Str(s)))
            }
            Tok::Ident(id) if id == "true" || id == "false" => {
                self.bump();
                Ok(Value::Lit(Lit::Bool(id == "true")))
            }
            Tok::Ident(id) => {
                if KEYWORDS.contains(&id.as_str()) {
                    return Err(err_at(pos, format!("`{id}` is a keyword")));
                }
                self.bump();
                Ok(Value::Var(id))
            }
            Tok::Lambda => self.lambda(ArrowKind::Lin),
            Tok::Bang if matches!(self.peek2(), Tok::Lambda) => {
                self.bump();
                self.lambda(ArrowKind::Sh)
            }
            Tok::LParen => {
                self.bump();
                let v = self.value()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            other => Err(err_at(pos, format!("expected value, found `{other}`"))),
        }
    }

    fn lambda(&mut self, arrow: ArrowKind) -> Result<Value, ParseError> {
        self.expect(Tok::Lambda)?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let id = self.ident()?;
                let ix = self.opt_index()?;
                self.expect(Tok::Colon)?;
                let t = self.chan_type()?;
                params.push((Var { base: id, index: ix }, t));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        for (v, _) in &params {
            self.scope.push((v.base.clone(), Binding::ChanVar));
        }
        let body = self.prefix()?;
        for _ in &params {
            self.scope.pop();
        }
        Ok(Value::Abs(Abs { params, arrow, body: Box::new(body) }))
    }

    // ---------- types ----------

    fn sess(&mut self) -> Result<SessType, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                self.expect(Tok::LParen)?;
                let us = if *self.peek() == Tok::RParen {
                    vec![]
                } else {
                    self.comma_list(|p| p.val_type())?
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                let s = self.sess()?;
                Ok(SessType::Out(us, Box::new(s)))
            }
            Tok::Query => {
                self.bump();
                self.expect(Tok::LParen)?;
                let us = if *self.peek() == Tok::RParen {
                    vec![]
                } else {
                    self.comma_list(|p| p.val_type())?
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                let s = self.sess()?;
                Ok(SessType::In(us, Box::new(s)))
            }
            Tok::Plus => {
                self.bump();
                self.choice_arms().map(SessType::Sel)
            }
            Tok::Amp => {
                self.bump();
                self.choice_arms().map(SessType::Bra)
            }
            Tok::Ident(id) if id == "end" => {
                self.bump();
                Ok(SessType::End)
            }
            Tok::Ident(id) if id == "mu" => {
                self.bump();
                let t = self.ident()?;
                self.expect(Tok::Dot)?;
                self.tvars.push(t.clone());
                let s = self.sess()?;
                self.tvars.pop();
                Ok(SessType::Rec(t, Box::new(s)))
            }
            Tok::Ident(id) if id == "dual" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let s = self.sess()?;
                self.expect(Tok::RParen)?;
                Ok(dual_sess(&s))
            }
            Tok::Ident(id) => {
                self.bump();
                if self.tvars.contains(&id) {
                    Ok(SessType::Var(id))
                } else if let Some(s) = self.aliases.get(&id) {
                    Ok(s.clone())
                } else if self.lenient {
                    Ok(SessType::Var(id))
                } else {
                    Err(err_at(pos, format!("unbound type alias `{id}`")))
                }
            }
            other => Err(err_at(pos, format!("expected session type, found `{other}`"))),
        }
    }

    fn choice_arms(&mut self) -> Result<BTreeMap<Label, SessType>, ParseError> {
        let pos = self.pos();
        self.expect(Tok::LBrace)?;
        let mut arms = BTreeMap::new();
        loop {
            let l = self.ident()?;
            self.expect(Tok::Colon)?;
            let s = self.sess()?;
            if arms.insert(l.clone(), s).is_some() {
                return Err(err_at(pos, format!("duplicate choice label `{l}`")));
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(arms)
    }

    fn val_type(&mut self) -> Result<ValType, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(id) if id == "lin" || id == "sh" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cs = if *self.peek() == Tok::RParen {
                    vec![]
                } else {
                    self.comma_list(|p| p.chan_type())?
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                let o = self.ident()?;
                if o != "o" {
                    return Err(err_at(pos, format!("expected `o` after `->`, found `{o}`")));
                }
                Ok(if id == "lin" { ValType::LinArrow(cs) } else { ValType::ShArrow(cs) })
            }
            Tok::Ident(id) if id == "int" => {
                self.bump();
                Ok(ValType::Base(BaseType::Int))
            }
            Tok::Ident(id) if id == "bool" => {
                self.bump();
                Ok(ValType::Base(BaseType::Bool))
            }
            Tok::Ident(id) if id == "str" => {
                self.bump();
                Ok(ValType::Base(BaseType::Str))
            }
            Tok::LtLt => {
                self.bump();
                let cs = self.comma_list(|p| p.chan_type())?;
                self.expect(Tok::GtGt)?;
                Ok(ValType::NpSugar(cs))
            }
            other => Err(err_at(pos, format!("expected value type, found `{other}`"))),
        }
    }

    fn chan_type(&mut self) -> Result<ChanType, ParseError> {
        match self.peek().clone() {
            Tok::Ident(id) if id == "chan" => {
                self.bump();
                self.expect(Tok::Lt)?;
                let u = self.val_type()?;
                self.expect(Tok::Gt)?;
                Ok(ChanType::Shared(Box::new(u)))
            }
            Tok::Ident(id) if id == "int" => {
                self.bump();
                Ok(ChanType::Base(BaseType::Int))
            }
            Tok::Ident(id) if id == "bool" => {
                self.bump();
                Ok(ChanType::Base(BaseType::Bool))
            }
            Tok::Ident(id) if id == "str" => {
                self.bump();
                Ok(ChanType::Base(BaseType::Str))
            }
            _ => Ok(ChanType::Session(self.sess()?)),
        }
    }
}

impl fmt::Display for SourceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in &self.chans {
            writeln!(f, "chan {n} : {}", super::printer::print_chan_type(t))?;
        }
        writeln!(f, "main = {}", super::printer::print_proc(&self.entry))
    }
}
