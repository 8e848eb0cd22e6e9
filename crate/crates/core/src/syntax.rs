//! Names, values, and processes for higher-order session processes.
//!
//! Channels are either proper names (session endpoints, shared names, and the
//! reserved propagator namespaces used by the decomposition) or variables
//! bound by inputs and abstraction parameters. Both carry an optional index:
//! decomposed processes use `u@1, u@2, ...` to slice a single channel into
//! single-use pieces.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use crate::types::{BaseType, ChanType, Label, SessType, ValType};

pub type Ident = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NameKind {
    /// Linear session endpoint (`s` / `~s`).
    Session,
    /// Shared name (`a`); duality is the identity on these.
    Shared,
    /// Reserved sequencing propagator `^k` (session-typed, linear).
    Propagator,
    /// Reserved recursive propagator `$r` (shared server channel). The `dual`
    /// flag on such a name tags which endpoint of `r` it serves; it is part of
    /// the name's identity, not a session polarity.
    RecPropagator,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub base: Ident,
    pub index: Option<u32>,
    pub dual: bool,
    pub kind: NameKind,
}

impl Name {
    pub fn session(base: &str) -> Name {
        Name { base: base.into(), index: None, dual: false, kind: NameKind::Session }
    }

    pub fn shared(base: &str) -> Name {
        Name { base: base.into(), index: None, dual: false, kind: NameKind::Shared }
    }

    /// The sequencing propagator `c_k`.
    pub fn propagator(k: u32) -> Name {
        Name { base: "c".into(), index: Some(k), dual: false, kind: NameKind::Propagator }
    }

    /// A sequencing propagator in a named namespace (`^base@k`), used by the
    /// duo transform and for variable-keyed value propagators.
    pub fn propagator_in(base: &str, k: Option<u32>) -> Name {
        Name { base: base.into(), index: k, dual: false, kind: NameKind::Propagator }
    }

    /// The recursive propagator `$r` serving the decomposition of endpoint
    /// `(base, dual)`.
    pub fn rec_propagator(base: &str, endpoint_dual: bool) -> Name {
        Name { base: base.into(), index: None, dual: endpoint_dual, kind: NameKind::RecPropagator }
    }

    /// Duality: flips the polarity of session names and propagators, identity
    /// on shared names and recursive propagators.
    pub fn dual(&self) -> Name {
        match self.kind {
            NameKind::Session | NameKind::Propagator => Name { dual: !self.dual, ..self.clone() },
            NameKind::Shared | NameKind::RecPropagator => self.clone(),
        }
    }

    pub fn with_index(&self, i: u32) -> Name {
        Name { index: Some(i), ..self.clone() }
    }

    /// Both endpoints (`n`, `~n`) for session names; the name itself otherwise.
    pub fn endpoints(&self) -> Vec<Name> {
        if self.kind == NameKind::Session || self.kind == NameKind::Propagator {
            vec![Name { dual: false, ..self.clone() }, Name { dual: true, ..self.clone() }]
        } else {
            vec![self.clone()]
        }
    }

    pub fn is_reserved(&self) -> bool {
        matches!(self.kind, NameKind::Propagator | NameKind::RecPropagator)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dual && self.kind != NameKind::RecPropagator {
            write!(f, "~")?;
        }
        match self.kind {
            NameKind::Session | NameKind::Shared => {
                write!(f, "{}", self.base)?;
                if let Some(i) = self.index {
                    write!(f, "@{i}")?;
                }
            }
            NameKind::Propagator => {
                if self.base == "c" {
                    write!(f, "^{}", self.index.unwrap_or(0))?;
                } else {
                    write!(f, "^{}", self.base)?;
                    if let Some(i) = self.index {
                        write!(f, "@{i}")?;
                    }
                }
            }
            NameKind::RecPropagator => {
                write!(f, "${}{}", if self.dual { "~" } else { "" }, self.base)?;
            }
        }
        Ok(())
    }
}

/// A variable used in channel position (input-bound or an abstraction
/// parameter). Indexed variants appear in decomposed terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub base: Ident,
    pub index: Option<u32>,
}

impl Var {
    pub fn plain(base: &str) -> Var {
        Var { base: base.into(), index: None }
    }

    pub fn indexed(base: &str, i: u32) -> Var {
        Var { base: base.into(), index: Some(i) }
    }

    pub fn with_index(&self, i: u32) -> Var {
        Var { base: self.base.clone(), index: Some(i) }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if let Some(i) = self.index {
            write!(f, "@{i}")?;
        }
        Ok(())
    }
}

/// Subject of a prefix or argument of an application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chan {
    Name(Name),
    Var(Var),
}

impl Chan {
    pub fn name(&self) -> Option<&Name> {
        match self {
            Chan::Name(n) => Some(n),
            Chan::Var(_) => None,
        }
    }

    pub fn dual(&self) -> Option<Chan> {
        match self {
            Chan::Name(n) => Some(Chan::Name(n.dual())),
            Chan::Var(_) => None,
        }
    }

    pub fn index(&self) -> Option<u32> {
        match self {
            Chan::Name(n) => n.index,
            Chan::Var(v) => v.index,
        }
    }

    pub fn with_index(&self, i: u32) -> Chan {
        match self {
            Chan::Name(n) => Chan::Name(n.with_index(i)),
            Chan::Var(v) => Chan::Var(v.with_index(i)),
        }
    }

    /// Base identity ignoring the index: (base, dual-for-names, kind tag).
    pub fn family(&self) -> (Ident, bool, Option<NameKind>) {
        match self {
            Chan::Name(n) => (n.base.clone(), n.dual, Some(n.kind)),
            Chan::Var(v) => (v.base.clone(), false, None),
        }
    }
}

impl fmt::Display for Chan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chan::Name(n) => write!(f, "{n}"),
            Chan::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Lit {
    pub fn base_type(&self) -> BaseType {
        match self {
            Lit::Int(_) => BaseType::Int,
            Lit::Bool(_) => BaseType::Bool,
            Lit::Str(_) => BaseType::Str,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(i) => write!(f, "{i}"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Neg,
    Add,
    Eq,
    Len,
}

impl Op {
    pub fn arity(&self) -> usize {
        match self {
            Op::Neg | Op::Len => 1,
            Op::Add | Op::Eq => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArrowKind {
    Lin,
    Sh,
}

/// An abstraction `\(x1:C1,..,xn:Cn).P` (linear) or `!\(..).P` (shared).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Abs {
    pub params: Vec<(Var, ChanType)>,
    pub arrow: ArrowKind,
    pub body: Box<Proc>,
}

impl Abs {
    pub fn val_type(&self) -> ValType {
        let cs = self.params.iter().map(|(_, c)| c.clone()).collect();
        match self.arrow {
            ArrowKind::Lin => ValType::LinArrow(cs),
            ArrowKind::Sh => ValType::ShArrow(cs),
        }
    }
}

/// Values: variables, abstractions, and base expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Var(Ident),
    Abs(Abs),
    Lit(Lit),
    Expr(Op, Vec<Value>),
}

impl Value {
    pub fn abs(params: Vec<(Var, ChanType)>, arrow: ArrowKind, body: Proc) -> Value {
        Value::Abs(Abs { params, arrow, body: Box::new(body) })
    }

    /// Evaluates ground expressions; non-ground values are returned as-is.
    pub fn eval(&self) -> Value {
        match self {
            Value::Expr(op, args) => {
                let args: Vec<Value> = args.iter().map(Value::eval).collect();
                let lits: Option<Vec<&Lit>> = args
                    .iter()
                    .map(|v| match v {
                        Value::Lit(l) => Some(l),
                        _ => None,
                    })
                    .collect();
                if let Some(lits) = lits {
                    match (op, lits.as_slice()) {
                        (Op::Neg, [Lit::Int(i)]) => return Value::Lit(Lit::Int(-i)),
                        (Op::Add, [Lit::Int(a), Lit::Int(b)]) => {
                            return Value::Lit(Lit::Int(a + b))
                        }
                        (Op::Eq, [Lit::Int(a), Lit::Int(b)]) => {
                            return Value::Lit(Lit::Bool(a == b))
                        }
                        (Op::Eq, [Lit::Bool(a), Lit::Bool(b)]) => {
                            return Value::Lit(Lit::Bool(a == b))
                        }
                        (Op::Eq, [Lit::Str(a), Lit::Str(b)]) => {
                            return Value::Lit(Lit::Bool(a == b))
                        }
                        (Op::Len, [Lit::Str(s)]) => {
                            return Value::Lit(Lit::Int(s.chars().count() as i64))
                        }
                        _ => {}
                    }
                }
                Value::Expr(*op, args)
            }
            other => other.clone(),
        }
    }
}

/// Argument of an application: a channel or a (base) value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Chan(Chan),
    Val(Value),
}

impl Arg {
    pub fn name(n: Name) -> Arg {
        Arg::Chan(Chan::Name(n))
    }

    pub fn var(v: Var) -> Arg {
        Arg::Chan(Chan::Var(v))
    }
}

/// Process terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proc {
    /// `u!<V1,..,Vn>.P`
    Output { subj: Chan, payload: Vec<Value>, cont: Box<Proc> },
    /// `u?(x1,..,xn).P`
    Input { subj: Chan, binders: Vec<Ident>, cont: Box<Proc> },
    /// `V (a1,..,an)`
    App { fun: Value, args: Vec<Arg> },
    Par(Box<Proc>, Box<Proc>),
    /// `new (n:C) P` — binds both endpoints when C is a session type.
    Res { name: Name, annot: ChanType, body: Box<Proc> },
    Nil,
    /// `u<l.P`
    Select { subj: Chan, label: Label, cont: Box<Proc> },
    /// `u>{l1:P1,..}`
    Branch { subj: Chan, arms: BTreeMap<Label, Proc> },
    /// Name-passing sugar `u!<<a1: C1,..>>.P`; removed by
    /// `desugar_name_passing`. Items carry their channel type so the
    /// generated abstraction can be annotated.
    OutputNp { subj: Chan, items: Vec<(Arg, ChanType)>, cont: Box<Proc> },
    /// Name-passing sugar `u?((x1: C1,..)).P`; removed by
    /// `desugar_name_passing`.
    InputNp { subj: Chan, binders: Vec<(Var, ChanType)>, cont: Box<Proc> },
    /// Surface recursion `rec X.P`; removed by `encode_recursion`.
    Rec { var: Ident, body: Box<Proc> },
    /// Surface recursion variable `X`.
    RecVar(Ident),
}

impl Proc {
    pub fn output(subj: Chan, payload: Vec<Value>, cont: Proc) -> Proc {
        Proc::Output { subj, payload, cont: Box::new(cont) }
    }

    pub fn input(subj: Chan, binders: Vec<Ident>, cont: Proc) -> Proc {
        Proc::Input { subj, binders, cont: Box::new(cont) }
    }

    pub fn res(name: Name, annot: impl Into<ChanType>, body: Proc) -> Proc {
        Proc::Res { name, annot: annot.into(), body: Box::new(body) }
    }

    pub fn par(l: Proc, r: Proc) -> Proc {
        Proc::Par(Box::new(l), Box::new(r))
    }

    /// Right-nested parallel composition of a list (Nil for the empty list).
    pub fn par_all(ps: Vec<Proc>) -> Proc {
        let mut it = ps.into_iter().rev();
        match it.next() {
            None => Proc::Nil,
            Some(last) => it.fold(last, |acc, p| Proc::par(p, acc)),
        }
    }

    pub fn select(subj: Chan, label: &str, cont: Proc) -> Proc {
        Proc::Select { subj, label: label.into(), cont: Box::new(cont) }
    }

    pub fn contains_choice(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if matches!(p, Proc::Select { .. } | Proc::Branch { .. }) {
                found = true;
            }
        });
        found
    }

    pub fn contains_rec(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if matches!(p, Proc::Rec { .. } | Proc::RecVar(_)) {
                found = true;
            }
        });
        found
    }

    pub fn contains_np_sugar(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if matches!(p, Proc::OutputNp { .. } | Proc::InputNp { .. }) {
                found = true;
            }
        });
        found
    }

    /// Visits every subprocess, including abstraction bodies.
    pub fn visit(&self, f: &mut impl FnMut(&Proc)) {
        f(self);
        let visit_value = |v: &Value, f: &mut dyn FnMut(&Proc)| {
            if let Value::Abs(a) = v {
                a.body.visit_dyn(f);
            }
        };
        match self {
            Proc::Output { payload, cont, .. } => {
                for v in payload {
                    visit_value(v, f);
                }
                cont.visit(f);
            }
            Proc::Input { cont, .. } => cont.visit(f),
            Proc::App { fun, args } => {
                visit_value(fun, f);
                for a in args {
                    if let Arg::Val(v) = a {
                        visit_value(v, f);
                    }
                }
            }
            Proc::Par(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Proc::Res { body, .. } => body.visit(f),
            Proc::Nil | Proc::RecVar(_) => {}
            Proc::Select { cont, .. } => cont.visit(f),
            Proc::Branch { arms, .. } => {
                for p in arms.values() {
                    p.visit(f);
                }
            }
            Proc::OutputNp { cont, .. } => cont.visit(f),
            Proc::InputNp { cont, .. } => cont.visit(f),
            Proc::Rec { body, .. } => body.visit(f),
        }
    }

    fn visit_dyn(&self, f: &mut dyn FnMut(&Proc)) {
        let mut g = |p: &Proc| f(p);
        self.visit(&mut g);
    }
}

/// Set of free names of a process (variables excluded).
pub fn free_names(p: &Proc) -> BTreeSet<Name> {
    p.fn_set()
}

/// Set of free value-position variables and free channel-position variables.
pub fn free_vars(p: &Proc) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut |c| {
        if let Chan::Var(v) = c {
            out.insert(v.base.clone());
        }
    }, &mut |x| {
        out.insert(x.to_string());
    });
    out
}

/// Free variables in channel position, as full (possibly indexed) variables.
pub fn free_chan_vars(p: &Proc) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut |c| {
        if let Chan::Var(v) = c {
            out.insert(v.clone());
        }
    }, &mut |_| {});
    out
}

/// Free variables in value position (payloads, applied values, expressions).
pub fn free_value_vars(p: &Proc) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut |_| {}, &mut |x| {
        out.insert(x.to_string());
    });
    out
}

fn bound_here(scopes: &[Vec<Ident>], x: &str) -> bool {
    scopes.iter().any(|s| s.iter().any(|b| b == x))
}

fn collect_free(
    p: &Proc,
    scopes: &mut Vec<Vec<Ident>>,
    on_chan: &mut impl FnMut(&Chan),
    on_val_var: &mut impl FnMut(&str),
) {
    fn chan(
        c: &Chan,
        scopes: &[Vec<Ident>],
        on_chan: &mut impl FnMut(&Chan),
    ) {
        match c {
            Chan::Name(_) => on_chan(c),
            Chan::Var(v) => {
                if !bound_here(scopes, &v.base) {
                    on_chan(c);
                }
            }
        }
    }
    fn value(
        v: &Value,
        scopes: &mut Vec<Vec<Ident>>,
        on_chan: &mut impl FnMut(&Chan),
        on_val_var: &mut impl FnMut(&str),
    ) {
        match v {
            Value::Var(x) => {
                if !bound_here(scopes, x) {
                    on_val_var(x);
                }
            }
            Value::Abs(a) => {
                scopes.push(a.params.iter().map(|(v, _)| v.base.clone()).collect());
                collect_free(&a.body, scopes, on_chan, on_val_var);
                scopes.pop();
            }
            Value::Lit(_) => {}
            Value::Expr(_, args) => {
                for a in args {
                    value(a, scopes, on_chan, on_val_var);
                }
            }
        }
    }
    match p {
        Proc::Output { subj, payload, cont } => {
            chan(subj, scopes, on_chan);
            for v in payload {
                value(v, scopes, on_chan, on_val_var);
            }
            collect_free(cont, scopes, on_chan, on_val_var);
        }
        Proc::OutputNp { subj, items, cont } => {
            chan(subj, scopes, on_chan);
            for (a, _) in items {
                match a {
                    Arg::Chan(c) => chan(c, scopes, on_chan),
                    Arg::Val(v) => value(v, scopes, on_chan, on_val_var),
                }
            }
            collect_free(cont, scopes, on_chan, on_val_var);
        }
        Proc::Input { subj, binders, cont } => {
            chan(subj, scopes, on_chan);
            scopes.push(binders.clone());
            collect_free(cont, scopes, on_chan, on_val_var);
            scopes.pop();
        }
        Proc::InputNp { subj, binders, cont } => {
            chan(subj, scopes, on_chan);
            scopes.push(binders.iter().map(|(v, _)| v.base.clone()).collect());
            collect_free(cont, scopes, on_chan, on_val_var);
            scopes.pop();
        }
        Proc::App { fun, args } => {
            value(fun, scopes, on_chan, on_val_var);
            for a in args {
                match a {
                    Arg::Chan(c) => chan(c, scopes, on_chan),
                    Arg::Val(v) => value(v, scopes, on_chan, on_val_var),
                }
            }
        }
        Proc::Par(l, r) => {
            collect_free(l, scopes, on_chan, on_val_var);
            collect_free(r, scopes, on_chan, on_val_var);
        }
        Proc::Res { body, .. } => {
            // Res binds names, not variables; name filtering happens on the
            // caller side via the shadow set below.
            collect_free(body, scopes, on_chan, on_val_var);
        }
        Proc::Nil | Proc::RecVar(_) => {}
        Proc::Select { subj, cont, .. } => {
            chan(subj, scopes, on_chan);
            collect_free(cont, scopes, on_chan, on_val_var);
        }
        Proc::Branch { subj, arms } => {
            chan(subj, scopes, on_chan);
            for q in arms.values() {
                collect_free(q, scopes, on_chan, on_val_var);
            }
        }
        Proc::Rec { body, .. } => collect_free(body, scopes, on_chan, on_val_var),
    }
}

impl Proc {
    /// Free names, with Res-bound names (both endpoints, any index) removed.
    pub fn fn_set(&self) -> BTreeSet<Name> {
        fn go(p: &Proc, bound: &mut Vec<(Ident, NameKind)>, out: &mut BTreeSet<Name>) {
            match p {
                Proc::Res { name, body, .. } => {
                    bound.push((name.base.clone(), name.kind));
                    go(body, bound, out);
                    bound.pop();
                }
                _ => {
                    let sub: Vec<Proc> = direct_children(p);
                    for c in direct_chans(p) {
                        if let Chan::Name(n) = c {
                            if !bound.iter().any(|(b, k)| *b == n.base && *k == n.kind) {
                                out.insert(n.clone());
                            }
                        }
                    }
                    for v in direct_values(p) {
                        if let Value::Abs(a) = v {
                            go(&a.body, bound, out);
                        }
                    }
                    for q in sub {
                        go(&q, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Direct channel occurrences of the top construct (subject + np names + args).
pub(crate) fn direct_chans(p: &Proc) -> Vec<Chan> {
    match p {
        Proc::Output { subj, .. }
        | Proc::Input { subj, .. }
        | Proc::Select { subj, .. }
        | Proc::Branch { subj, .. }
        | Proc::InputNp { subj, .. } => vec![subj.clone()],
        Proc::OutputNp { subj, items, .. } => {
            let mut v = vec![subj.clone()];
            v.extend(items.iter().filter_map(|(a, _)| match a {
                Arg::Chan(c) => Some(c.clone()),
                Arg::Val(_) => None,
            }));
            v
        }
        Proc::App { args, .. } => args
            .iter()
            .filter_map(|a| match a {
                Arg::Chan(c) => Some(c.clone()),
                Arg::Val(_) => None,
            })
            .collect(),
        _ => vec![],
    }
}

/// Direct value occurrences of the top construct (payloads, fun, val args).
pub(crate) fn direct_values(p: &Proc) -> Vec<Value> {
    match p {
        Proc::Output { payload, .. } => payload.clone(),
        Proc::App { fun, args } => {
            let mut v = vec![fun.clone()];
            v.extend(args.iter().filter_map(|a| match a {
                Arg::Val(x) => Some(x.clone()),
                Arg::Chan(_) => None,
            }));
            v
        }
        _ => vec![],
    }
}

/// Direct subprocesses (continuations and parallel components), not entering
/// abstraction bodies.
pub(crate) fn direct_children(p: &Proc) -> Vec<Proc> {
    match p {
        Proc::Output { cont, .. }
        | Proc::Input { cont, .. }
        | Proc::Select { cont, .. }
        | Proc::OutputNp { cont, .. }
        | Proc::InputNp { cont, .. }
        | Proc::Rec { body: cont, .. } => vec![(**cont).clone()],
        Proc::Par(l, r) => vec![(**l).clone(), (**r).clone()],
        Proc::Res { body, .. } => vec![(**body).clone()],
        Proc::Branch { arms, .. } => arms.values().cloned().collect(),
        _ => vec![],
    }
}

/// The degree of a process: the number of propagators its decomposition needs.
///
/// Select counts one slot plus its continuation; Branch counts a single slot
/// because each arm is packed into an abstraction with its own private
/// propagator namespace.
pub fn degree(p: &Proc) -> u32 {
    match p {
        Proc::Output { cont, .. } | Proc::Input { cont, .. } => degree(cont) + 1,
        Proc::Res { body, .. } => degree(body),
        Proc::Par(l, r) => degree(l) + degree(r) + 1,
        Proc::App { .. } | Proc::Nil => 1,
        Proc::Select { cont, .. } => degree(cont) + 1,
        Proc::Branch { .. } => 1,
        Proc::OutputNp { .. } | Proc::InputNp { .. } | Proc::Rec { .. } | Proc::RecVar(_) => {
            panic!("degree is defined on desugared processes")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Chan {
        Chan::Name(Name::session(name))
    }

    #[test]
    fn dual_involution() {
        let n = Name::session("s");
        assert_eq!(n.dual().dual(), n);
        let a = Name::shared("a");
        assert_eq!(a.dual(), a);
        let c = Name::propagator(3);
        assert_eq!(c.dual().dual(), c);
        let r = Name::rec_propagator("r", true);
        assert_eq!(r.dual(), r);
    }

    #[test]
    fn free_names_of_closed_restriction() {
        // new s (s!<y>.0 | ~s?(x).0) has no free names
        let body = Proc::par(
            Proc::output(s("s"), vec![Value::Var("y".into())], Proc::Nil),
            Proc::input(Chan::Name(Name::session("s").dual()), vec!["x".into()], Proc::Nil),
        );
        let p = Proc::res(Name::session("s"), ChanType::Session(SessType::End), body);
        assert!(p.fn_set().is_empty());
        assert_eq!(
            free_vars(&p).into_iter().collect::<Vec<_>>(),
            vec!["y".to_string()]
        );
    }

    #[test]
    fn free_vars_of_output() {
        let p = Proc::output(s("u"), vec![Value::Var("y".into())], Proc::Nil);
        assert!(free_vars(&p).contains("y"));
        assert!(!free_vars(&p).contains("u"));
    }

    #[test]
    fn degree_examples() {
        // degree(0) = 1
        assert_eq!(degree(&Proc::Nil), 1);
        // degree(new s (x ~s | s!<y>.0)) = 4
        let p = Proc::res(
            Name::session("s"),
            ChanType::Session(SessType::End),
            Proc::par(
                Proc::App {
                    fun: Value::Var("x".into()),
                    args: vec![Arg::Chan(Chan::Name(Name::session("s").dual()))],
                },
                Proc::output(s("s"), vec![Value::Var("y".into())], Proc::Nil),
            ),
        );
        assert_eq!(degree(&p), 4);
    }

    #[test]
    fn eval_expressions() {
        let e = Value::Expr(Op::Add, vec![Value::Lit(Lit::Int(16)), Value::Lit(Lit::Int(26))]);
        assert_eq!(e.eval(), Value::Lit(Lit::Int(42)));
        let l = Value::Expr(Op::Len, vec![Value::Lit(Lit::Str("Hello".into()))]);
        assert_eq!(l.eval(), Value::Lit(Lit::Int(5)));
        let q = Value::Expr(Op::Eq, vec![Value::Lit(Lit::Int(2)), Value::Lit(Lit::Int(3))]);
        assert_eq!(q.eval(), Value::Lit(Lit::Bool(false)));
        let n = Value::Expr(Op::Neg, vec![Value::Lit(Lit::Int(7))]);
        assert_eq!(n.eval(), Value::Lit(Lit::Int(-7)));
    }
}
