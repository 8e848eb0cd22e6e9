//! Typechecker for higher-order session processes: duality, balancedness,
//! session environment reduction, and the minimality predicate.
//!
//! Linear splitting is resolved by syntax-directed environment threading:
//! the checker consumes resources as it walks the term and rejects leftover
//! linear assumptions at the end.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::syntax::*;
use crate::types::*;

/// Entries of the shared environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaType {
    /// `u : chan<U>`
    Chan(ValType),
    /// `x : sh(C..)->o`
    Arrow(Vec<ChanType>),
    /// `x : int|bool|str`
    Base(BaseType),
}

/// The environment triple: shared, linear higher-order, and session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnvs {
    pub gamma: BTreeMap<Chan, GammaType>,
    pub lambda: BTreeMap<Ident, Vec<ChanType>>,
    pub delta: BTreeMap<Chan, SessType>,
}

impl TypeEnvs {
    pub fn new() -> TypeEnvs {
        TypeEnvs::default()
    }

    pub fn with_session(mut self, c: Chan, s: SessType) -> TypeEnvs {
        self.delta.insert(c, s);
        self
    }

    pub fn with_shared(mut self, c: Chan, u: ValType) -> TypeEnvs {
        self.gamma.insert(c, GammaType::Chan(u));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeReport {
    pub ok: bool,
    pub derivation: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound channel `{0}`")]
    Unbound(String),
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("linear variable `{0}` used more than once")]
    LinearReuse(String),
    #[error("linear resources left unused: {0}")]
    LinearLeftover(String),
    #[error("session `{0}` not finished (remaining: {1})")]
    SessionLeftover(String, String),
    #[error("`{0}`: expected payload types ({1}), found ({2})")]
    PayloadMismatch(String, String, String),
    #[error("`{0}`: direction mismatch (type is {1})")]
    Direction(String, String),
    #[error("restriction `{0}`: endpoints are not dual")]
    NotDual(String),
    #[error("branch label `{0}` missing from process arms")]
    MissingLabel(String),
    #[error("label `{0}` not offered by type of `{1}`")]
    UnknownLabel(String, String),
    #[error("branch arms consume resources differently")]
    ArmsDisagree,
    #[error("`{0}` is not a channel of the right sort here")]
    BadSubject(String),
    #[error("shared channels exchange exactly one value (subject `{0}`)")]
    SharedPolyadic(String),
    #[error("applied value is not an abstraction type: {0}")]
    AppliedNonAbstraction(String),
    #[error("application arity mismatch on `{0}`")]
    AppArity(String),
    #[error("argument `{0}` does not match parameter type {1}")]
    ArgMismatch(String, String),
    #[error("expression {0} is ill-typed")]
    BadExpr(String),
    #[error("shadowing of linear `{0}` is not supported")]
    ShadowLinear(String),
    #[error("name-passing sugar must be desugared before typechecking")]
    ResidualSugar,
    #[error("recursion must be encoded before typechecking (rec/`{0}`)")]
    ResidualRec(String),
    #[error("cannot send a value of type {0} where {1} is expected")]
    ValueMismatch(String, String),
}

// ---------- duality and equality ----------

/// Structural duality: swaps !/? and +/&, recursing under mu; payload types
/// are unchanged. An involution.
pub fn dual_sess(s: &SessType) -> SessType {
    match s {
        SessType::End => SessType::End,
        SessType::Var(t) => SessType::Var(t.clone()),
        SessType::Rec(t, b) => SessType::Rec(t.clone(), Box::new(dual_sess(b))),
        SessType::Out(us, b) => SessType::In(us.clone(), Box::new(dual_sess(b))),
        SessType::In(us, b) => SessType::Out(us.clone(), Box::new(dual_sess(b))),
        SessType::Sel(arms) => {
            SessType::Bra(arms.iter().map(|(l, x)| (l.clone(), dual_sess(x))).collect())
        }
        SessType::Bra(arms) => {
            SessType::Sel(arms.iter().map(|(l, x)| (l.clone(), dual_sess(x))).collect())
        }
    }
}

/// Coinductive duality check via unfolding with a visited-pair set.
pub fn is_dual(s: &SessType, t: &SessType) -> bool {
    fn go(s: &SessType, t: &SessType, seen: &mut BTreeSet<(SessType, SessType)>) -> bool {
        let key = (s.clone(), t.clone());
        if !seen.insert(key) {
            return true;
        }
        let s = s.unfold();
        let t = t.unfold();
        match (&s, &t) {
            (SessType::End, SessType::End) => true,
            (SessType::Var(a), SessType::Var(b)) => a == b,
            (SessType::Out(us, s2), SessType::In(vs, t2))
            | (SessType::In(us, s2), SessType::Out(vs, t2)) => {
                us.len() == vs.len()
                    && us.iter().zip(vs).all(|(u, v)| val_type_eq(u, v))
                    && go(s2, t2, seen)
            }
            (SessType::Sel(a), SessType::Bra(b)) | (SessType::Bra(a), SessType::Sel(b)) => {
                a.len() == b.len()
                    && a.iter().all(|(l, x)| b.get(l).is_some_and(|y| go(x, y, seen)))
            }
            _ => false,
        }
    }
    go(s, t, &mut BTreeSet::new())
}

/// Coinductive (iso-recursive, unfolding-closed) session type equality.
pub fn sess_eq(s: &SessType, t: &SessType) -> bool {
    fn go(s: &SessType, t: &SessType, seen: &mut BTreeSet<(SessType, SessType)>) -> bool {
        if s == t {
            return true;
        }
        let key = (s.clone(), t.clone());
        if !seen.insert(key) {
            return true;
        }
        let s = s.unfold();
        let t = t.unfold();
        match (&s, &t) {
            (SessType::End, SessType::End) => true,
            (SessType::Var(a), SessType::Var(b)) => a == b,
            (SessType::Out(us, s2), SessType::Out(vs, t2))
            | (SessType::In(us, s2), SessType::In(vs, t2)) => {
                us.len() == vs.len()
                    && us.iter().zip(vs).all(|(u, v)| val_type_eq(u, v))
                    && go(s2, t2, seen)
            }
            (SessType::Sel(a), SessType::Sel(b)) | (SessType::Bra(a), SessType::Bra(b)) => {
                a.len() == b.len()
                    && a.iter().all(|(l, x)| b.get(l).is_some_and(|y| go(x, y, seen)))
            }
            _ => false,
        }
    }
    go(s, t, &mut BTreeSet::new())
}

pub fn val_type_eq(u: &ValType, v: &ValType) -> bool {
    match (u, v) {
        (ValType::LinArrow(a), ValType::LinArrow(b))
        | (ValType::ShArrow(a), ValType::ShArrow(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| chan_type_eq(x, y))
        }
        (ValType::Base(a), ValType::Base(b)) => a == b,
        _ => false,
    }
}

pub fn chan_type_eq(a: &ChanType, b: &ChanType) -> bool {
    match (a, b) {
        (ChanType::Session(x), ChanType::Session(y)) => sess_eq(x, y),
        (ChanType::Shared(x), ChanType::Shared(y)) => val_type_eq(x, y),
        (ChanType::Base(x), ChanType::Base(y)) => x == y,
        _ => false,
    }
}

/// A value of type `found` can be used where `expected` is required: equal
/// types, or a shared arrow where a linear one is expected.
pub fn val_type_matches(expected: &ValType, found: &ValType) -> bool {
    if val_type_eq(expected, found) {
        return true;
    }
    match (expected, found) {
        (ValType::LinArrow(a), ValType::ShArrow(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| chan_type_eq(x, y))
        }
        _ => false,
    }
}

// ---------- balancedness and environment reduction ----------

/// A session environment is balanced when every co-located pair of dual
/// endpoints carries dual types.
pub fn balanced(delta: &BTreeMap<Chan, SessType>) -> bool {
    delta.iter().all(|(c, s)| match c.dual() {
        Some(d) => delta.get(&d).map_or(true, |t| is_dual(s, t)),
        None => true,
    })
}

/// One-step reductions of a session environment: communication on a dual
/// pair, or a label choice.
pub fn env_reduce(delta: &BTreeMap<Chan, SessType>) -> Vec<BTreeMap<Chan, SessType>> {
    let mut out = Vec::new();
    for (c, s) in delta {
        let d = match c.dual() {
            Some(d) => d,
            None => continue,
        };
        if *c > d {
            continue; // visit each pair once
        }
        let t = match delta.get(&d) {
            Some(t) => t,
            None => continue,
        };
        let su = s.unfold();
        let tu = t.unfold();
        match (&su, &tu) {
            (SessType::Out(us, s2), SessType::In(vs, t2))
            | (SessType::In(us, s2), SessType::Out(vs, t2)) => {
                if us.len() == vs.len() && us.iter().zip(vs).all(|(a, b)| val_type_eq(a, b)) {
                    let mut next = delta.clone();
                    next.insert(c.clone(), (**s2).clone());
                    next.insert(d.clone(), (**t2).clone());
                    out.push(next);
                }
            }
            (SessType::Sel(a), SessType::Bra(b)) | (SessType::Bra(a), SessType::Sel(b)) => {
                for (l, x) in a {
                    if let Some(y) = b.get(l) {
                        let mut next = delta.clone();
                        next.insert(c.clone(), x.clone());
                        next.insert(d.clone(), y.clone());
                        out.push(next);
                    }
                }
            }
            _ => {}
        }
    }
    out
}

// ---------- minimality ----------

/// True when the type fits the minimal grammar: every prefix continues with
/// `end` or a recursion variable; recursion bodies are single-prefix minimal;
/// choice arms minimal.
pub fn is_minimal_sess(s: &SessType) -> bool {
    fn gamma(s: &SessType) -> bool {
        matches!(s, SessType::End | SessType::Var(_))
    }
    match s {
        SessType::End | SessType::Var(_) => true,
        SessType::Out(us, c) | SessType::In(us, c) => {
            gamma(c) && us.iter().all(is_minimal_val)
        }
        SessType::Rec(_, b) => is_minimal_sess(b),
        SessType::Sel(arms) | SessType::Bra(arms) => arms.values().all(is_minimal_sess),
    }
}

pub fn is_minimal_val(u: &ValType) -> bool {
    match u {
        ValType::LinArrow(cs) | ValType::ShArrow(cs) => cs.iter().all(is_minimal_chan),
        ValType::Base(_) => true,
        ValType::NpSugar(_) => false,
    }
}

pub fn is_minimal_chan(c: &ChanType) -> bool {
    match c {
        ChanType::Session(s) => is_minimal_sess(s),
        ChanType::Shared(u) => is_minimal_val(u),
        ChanType::Base(_) => true,
    }
}

// ---------- the checker ----------

struct Checker {
    gamma: BTreeMap<Chan, GammaType>,
    lambda: BTreeMap<Ident, Vec<ChanType>>,
    delta: BTreeMap<Chan, SessType>,
    trace: Vec<String>,
}

type CheckResult<T> = Result<T, TypeError>;

pub fn typecheck(envs: &TypeEnvs, p: &Proc) -> TypeReport {
    match run_check(envs, p) {
        Ok(trace) => TypeReport { ok: true, derivation: trace, error: None },
        Err(e) => TypeReport { ok: false, derivation: vec![], error: Some(e.to_string()) },
    }
}

pub fn typecheck_err(envs: &TypeEnvs, p: &Proc) -> CheckResult<()> {
    run_check(envs, p).map(|_| ())
}

fn run_check(envs: &TypeEnvs, p: &Proc) -> CheckResult<Vec<String>> {
    let mut ck = Checker {
        gamma: envs.gamma.clone(),
        lambda: envs.lambda.clone(),
        delta: envs.delta.clone(),
        trace: Vec::new(),
    };
    ck.proc(p)?;
    ck.check_exhausted()?;
    Ok(ck.trace)
}

/// Types a value under the given environments (which must be exactly
/// consumed by the value).
pub fn typecheck_value(envs: &TypeEnvs, v: &Value) -> (Option<ValType>, TypeReport) {
    let mut ck = Checker {
        gamma: envs.gamma.clone(),
        lambda: envs.lambda.clone(),
        delta: envs.delta.clone(),
        trace: Vec::new(),
    };
    match ck.value(v).and_then(|t| ck.check_exhausted().map(|_| t)) {
        Ok(t) => {
            let report = TypeReport { ok: true, derivation: ck.trace, error: None };
            (Some(t), report)
        }
        Err(e) => (None, TypeReport { ok: false, derivation: vec![], error: Some(e.to_string()) }),
    }
}

impl Checker {
    fn rule(&mut self, r: &str, subj: impl std::fmt::Display) {
        self.trace.push(format!("{r} {subj}"));
    }

    fn check_exhausted(&self) -> CheckResult<()> {
        if let Some((x, _)) = self.lambda.iter().next() {
            return Err(TypeError::LinearLeftover(x.clone()));
        }
        for (c, s) in &self.delta {
            if !matches!(s, SessType::End) {
                return Err(TypeError::SessionLeftover(
                    c.to_string(),
                    crate::surface::print_sess_type(s),
                ));
            }
        }
        Ok(())
    }

    fn proc(&mut self, p: &Proc) -> CheckResult<()> {
        match p {
            Proc::Nil => {
                self.rule("Nil", "");
                Ok(())
            }
            Proc::Par(l, r) => {
                self.rule("Par", "");
                self.proc(l)?;
                self.proc(r)
            }
            Proc::Output { subj, payload, cont } => self.output(subj, payload, cont),
            Proc::Input { subj, binders, cont } => self.input(subj, binders, cont),
            Proc::App { fun, args } => self.app(fun, args),
            Proc::Res { name, annot, body } => self.res(name, annot, body),
            Proc::Select { subj, label, cont } => self.select(subj, label, cont),
            Proc::Branch { subj, arms } => self.branch(subj, arms),
            Proc::OutputNp { .. } | Proc::InputNp { .. } => Err(TypeError::ResidualSugar),
            Proc::Rec { var, .. } => Err(TypeError::ResidualRec(var.clone())),
            Proc::RecVar(x) => Err(TypeError::ResidualRec(x.clone())),
        }
    }

    fn output(&mut self, subj: &Chan, payload: &[Value], cont: &Proc) -> CheckResult<()> {
        if let Some(s) = self.delta.get(subj).cloned() {
            let s = s.unfold();
            match s {
                SessType::Out(us, s2) => {
                    if us.len() != payload.len() {
                        return Err(TypeError::PayloadMismatch(
                            subj.to_string(),
                            us.len().to_string(),
                            payload.len().to_string(),
                        ));
                    }
                    self.rule("Send", subj);
                    self.delta.insert(subj.clone(), *s2);
                    for (v, u) in payload.iter().zip(&us) {
                        self.value_against(v, u)?;
                    }
                    self.proc(cont)
                }
                other => Err(TypeError::Direction(
                    subj.to_string(),
                    crate::surface::print_sess_type(&other),
                )),
            }
        } else if let Some(GammaType::Chan(u)) = self.gamma.get(subj).cloned() {
            if payload.len() != 1 {
                return Err(TypeError::SharedPolyadic(subj.to_string()));
            }
            self.rule("Req", subj);
            self.value_against(&payload[0], &u)?;
            self.proc(cont)
        } else {
            Err(TypeError::Unbound(subj.to_string()))
        }
    }

    fn input(&mut self, subj: &Chan, binders: &[Ident], cont: &Proc) -> CheckResult<()> {
        let (us, rule): (Vec<ValType>, &str) =
            if let Some(s) = self.delta.get(subj).cloned() {
                match s.unfold() {
                    SessType::In(us, s2) => {
                        self.delta.insert(subj.clone(), *s2);
                        (us, "Rcv")
                    }
                    other => {
                        return Err(TypeError::Direction(
                            subj.to_string(),
                            crate::surface::print_sess_type(&other),
                        ))
                    }
                }
            } else if let Some(GammaType::Chan(u)) = self.gamma.get(subj).cloned() {
                if binders.len() != 1 {
                    return Err(TypeError::SharedPolyadic(subj.to_string()));
                }
                (vec![u], "Acc")
            } else {
                return Err(TypeError::Unbound(subj.to_string()));
            };
        if us.len() != binders.len() {
            return Err(TypeError::PayloadMismatch(
                subj.to_string(),
                us.len().to_string(),
                binders.len().to_string(),
            ));
        }
        self.rule(rule, subj);
        let mut saved_gamma = Vec::new();
        let mut lin_binders = Vec::new();
        for (x, u) in binders.iter().zip(&us) {
            match u {
                ValType::LinArrow(cs) => {
                    if self.lambda.contains_key(x) {
                        return Err(TypeError::ShadowLinear(x.clone()));
                    }
                    self.lambda.insert(x.clone(), cs.clone());
                    lin_binders.push(x.clone());
                }
                ValType::ShArrow(cs) => {
                    saved_gamma
                        .push((x.clone(), self.gamma.insert(chan_var(x), GammaType::Arrow(cs.clone()))));
                }
                ValType::Base(b) => {
                    saved_gamma
                        .push((x.clone(), self.gamma.insert(chan_var(x), GammaType::Base(*b))));
                }
                ValType::NpSugar(_) => return Err(TypeError::ResidualSugar),
            }
        }
        self.proc(cont)?;
        for x in lin_binders {
            if self.lambda.remove(&x).is_some() {
                return Err(TypeError::LinearLeftover(x));
            }
        }
        for (x, old) in saved_gamma.into_iter().rev() {
            match old {
                Some(g) => {
                    self.gamma.insert(chan_var(&x), g);
                }
                None => {
                    self.gamma.remove(&chan_var(&x));
                }
            }
        }
        Ok(())
    }

    fn app(&mut self, fun: &Value, args: &[Arg]) -> CheckResult<()> {
        let t = self.value(fun)?;
        let cs = match t {
            ValType::LinArrow(cs) | ValType::ShArrow(cs) => cs,
            other => {
                return Err(TypeError::AppliedNonAbstraction(crate::surface::print_val_type(
                    &other,
                )))
            }
        };
        if cs.len() != args.len() {
            return Err(TypeError::AppArity(format!(
                "{} args vs {} params",
                args.len(),
                cs.len()
            )));
        }
        self.rule("App", "");
        for (a, c) in args.iter().zip(&cs) {
            self.arg_against(a, c)?;
        }
        Ok(())
    }

    fn arg_against(&mut self, a: &Arg, c: &ChanType) -> CheckResult<()> {
        match (a, c) {
            (Arg::Chan(ch), ChanType::Session(s)) => {
                let have = self
                    .delta
                    .get(ch)
                    .cloned()
                    .ok_or_else(|| TypeError::Unbound(ch.to_string()))?;
                if !sess_eq(&have, s) {
                    return Err(TypeError::ArgMismatch(
                        ch.to_string(),
                        crate::surface::print_sess_type(s),
                    ));
                }
                self.delta.remove(ch);
                Ok(())
            }
            (Arg::Chan(ch), ChanType::Shared(u)) => match self.gamma.get(ch) {
                Some(GammaType::Chan(u2)) if val_type_eq(u, u2) => Ok(()),
                _ => Err(TypeError::ArgMismatch(
                    ch.to_string(),
                    crate::surface::print_chan_type(c),
                )),
            },
            (Arg::Chan(ch), ChanType::Base(b)) => match self.gamma.get(ch) {
                Some(GammaType::Base(b2)) if b == b2 => Ok(()),
                _ => Err(TypeError::ArgMismatch(ch.to_string(), b.to_string())),
            },
            (Arg::Val(v), ChanType::Base(b)) => {
                let t = self.value(v)?;
                if t == ValType::Base(*b) {
                    Ok(())
                } else {
                    Err(TypeError::ArgMismatch(
                        crate::surface::print_value(v),
                        b.to_string(),
                    ))
                }
            }
            (Arg::Val(v), _) => Err(TypeError::ArgMismatch(
                crate::surface::print_value(v),
                crate::surface::print_chan_type(c),
            )),
        }
    }

    fn res(&mut self, name: &Name, annot: &ChanType, body: &Proc) -> CheckResult<()> {
        match annot {
            ChanType::Session(s) => {
                self.rule("ResS", name);
                let pos = Chan::Name(name.clone());
                let neg = Chan::Name(name.dual());
                if self.delta.contains_key(&pos) || self.delta.contains_key(&neg) {
                    return Err(TypeError::ShadowLinear(name.to_string()));
                }
                self.delta.insert(pos.clone(), s.clone());
                self.delta.insert(neg.clone(), dual_sess(s));
                self.proc(body)?;
                for c in [pos, neg] {
                    match self.delta.remove(&c) {
                        Some(SessType::End) | None => {}
                        Some(rest) => {
                            return Err(TypeError::SessionLeftover(
                                c.to_string(),
                                crate::surface::print_sess_type(&rest),
                            ))
                        }
                    }
                }
                Ok(())
            }
            ChanType::Shared(u) => {
                self.rule("Res", name);
                let c = Chan::Name(name.clone());
                let old = self.gamma.insert(c.clone(), GammaType::Chan((**u).clone()));
                self.proc(body)?;
                match old {
                    Some(g) => {
                        self.gamma.insert(c, g);
                    }
                    None => {
                        self.gamma.remove(&c);
                    }
                }
                Ok(())
            }
            ChanType::Base(_) => Err(TypeError::BadSubject(name.to_string())),
        }
    }

    fn select(&mut self, subj: &Chan, label: &str, cont: &Proc) -> CheckResult<()> {
        let s = self
            .delta
            .get(subj)
            .cloned()
            .ok_or_else(|| TypeError::Unbound(subj.to_string()))?;
        match s.unfold() {
            SessType::Sel(arms) => match arms.get(label) {
                Some(next) => {
                    self.rule("Sel", subj);
                    self.delta.insert(subj.clone(), next.clone());
                    self.proc(cont)
                }
                None => Err(TypeError::UnknownLabel(label.to_string(), subj.to_string())),
            },
            other => Err(TypeError::Direction(
                subj.to_string(),
                crate::surface::print_sess_type(&other),
            )),
        }
    }

    fn branch(&mut self, subj: &Chan, arms: &BTreeMap<Label, Proc>) -> CheckResult<()> {
        let s = self
            .delta
            .get(subj)
            .cloned()
            .ok_or_else(|| TypeError::Unbound(subj.to_string()))?;
        let tarms = match s.unfold() {
            SessType::Bra(tarms) => tarms,
            other => {
                return Err(TypeError::Direction(
                    subj.to_string(),
                    crate::surface::print_sess_type(&other),
                ))
            }
        };
        for l in tarms.keys() {
            if !arms.contains_key(l) {
                return Err(TypeError::MissingLabel(l.clone()));
            }
        }
        for l in arms.keys() {
            if !tarms.contains_key(l) {
                return Err(TypeError::UnknownLabel(l.clone(), subj.to_string()));
            }
        }
        self.rule("Bra", subj);
        // every arm must consume the same resources
        let mut states: Option<(BTreeMap<Ident, Vec<ChanType>>, BTreeMap<Chan, SessType>)> = None;
        let lambda0 = self.lambda.clone();
        let delta0 = self.delta.clone();
        for (l, p) in arms {
            self.lambda = lambda0.clone();
            self.delta = delta0.clone();
            self.delta.insert(subj.clone(), tarms[l].clone());
            self.proc(p)?;
            // the subject itself may end at different residuals per arm; it
            // must be finished in each
            match self.delta.remove(subj) {
                Some(SessType::End) | None => {}
                Some(rest) => {
                    return Err(TypeError::SessionLeftover(
                        subj.to_string(),
                        crate::surface::print_sess_type(&rest),
                    ))
                }
            }
            let state = (self.lambda.clone(), self.delta.clone());
            match &states {
                None => states = Some(state),
                Some(prev) => {
                    if *prev != state {
                        return Err(TypeError::ArmsDisagree);
                    }
                }
            }
        }
        if let Some((l, d)) = states {
            self.lambda = l;
            self.delta = d;
            self.delta.insert(subj.clone(), SessType::End);
        }
        Ok(())
    }

    fn value(&mut self, v: &Value) -> CheckResult<ValType> {
        match v {
            Value::Var(x) => {
                if let Some(cs) = self.lambda.remove(x) {
                    self.rule("LVar", x);
                    Ok(ValType::LinArrow(cs))
                } else if let Some(g) = self.gamma.get(&chan_var(x)) {
                    self.rule("Sh", x);
                    match g {
                        GammaType::Arrow(cs) => Ok(ValType::ShArrow(cs.clone())),
                        GammaType::Base(b) => Ok(ValType::Base(*b)),
                        GammaType::Chan(_) => Err(TypeError::BadSubject(x.clone())),
                    }
                } else {
                    Err(TypeError::UnboundVar(x.clone()))
                }
            }
            Value::Lit(l) => Ok(ValType::Base(l.base_type())),
            Value::Expr(op, args) => {
                let ts: Vec<ValType> =
                    args.iter().map(|a| self.value(a)).collect::<CheckResult<_>>()?;
                let b = |t: &ValType| match t {
                    ValType::Base(b) => Some(*b),
                    _ => None,
                };
                let bs: Option<Vec<BaseType>> = ts.iter().map(b).collect();
                let bs = bs.ok_or_else(|| TypeError::BadExpr(crate::surface::print_value(v)))?;
                match (op, bs.as_slice()) {
                    (Op::Neg, [BaseType::Int]) => Ok(ValType::Base(BaseType::Int)),
                    (Op::Add, [BaseType::Int, BaseType::Int]) => Ok(ValType::Base(BaseType::Int)),
                    (Op::Eq, [a2, b2]) if a2 == b2 => Ok(ValType::Base(BaseType::Bool)),
                    (Op::Len, [BaseType::Str]) => Ok(ValType::Base(BaseType::Int)),
                    _ => Err(TypeError::BadExpr(crate::surface::print_value(v))),
                }
            }
            Value::Abs(a) => self.abs(a),
        }
    }

    fn abs(&mut self, a: &Abs) -> CheckResult<ValType> {
        self.rule("Abs", "");
        match a.arrow {
            ArrowKind::Lin => {
                let (saved_gamma, lin_params, sess_params) = self.push_params(&a.params)?;
                self.proc(&a.body)?;
                self.pop_params(saved_gamma, lin_params, sess_params)?;
                Ok(a.val_type())
            }
            ArrowKind::Sh => {
                // a shared abstraction types in the shared environment alone
                let mut inner = Checker {
                    gamma: self.gamma.clone(),
                    lambda: BTreeMap::new(),
                    delta: BTreeMap::new(),
                    trace: Vec::new(),
                };
                let (saved_gamma, lin_params, sess_params) = inner.push_params(&a.params)?;
                inner.proc(&a.body)?;
                inner.pop_params(saved_gamma, lin_params, sess_params)?;
                inner.check_exhausted()?;
                self.trace.append(&mut inner.trace);
                self.rule("Prom", "");
                Ok(a.val_type())
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn push_params(
        &mut self,
        params: &[(Var, ChanType)],
    ) -> CheckResult<(Vec<(Chan, Option<GammaType>)>, Vec<Ident>, Vec<Chan>)> {
        let mut saved_gamma = Vec::new();
        let mut lin_params = Vec::new();
        let mut sess_params = Vec::new();
        for (p, c) in params {
            let key = Chan::Var(p.clone());
            match c {
                ChanType::Session(s) => {
                    if self.delta.contains_key(&key) {
                        return Err(TypeError::ShadowLinear(p.to_string()));
                    }
                    self.delta.insert(key.clone(), s.clone());
                    sess_params.push(key);
                }
                ChanType::Shared(u) => {
                    saved_gamma
                        .push((key.clone(), self.gamma.insert(key, GammaType::Chan((**u).clone()))));
                }
                ChanType::Base(b) => {
                    saved_gamma.push((key.clone(), self.gamma.insert(key, GammaType::Base(*b))));
                }
            }
        }
        Ok((saved_gamma, lin_params, sess_params))
    }

    fn pop_params(
        &mut self,
        saved_gamma: Vec<(Chan, Option<GammaType>)>,
        lin_params: Vec<Ident>,
        sess_params: Vec<Chan>,
    ) -> CheckResult<()> {
        for x in lin_params {
            if self.lambda.remove(&x).is_some() {
                return Err(TypeError::LinearLeftover(x));
            }
        }
        for c in sess_params {
            match self.delta.remove(&c) {
                Some(SessType::End) | None => {}
                Some(rest) => {
                    return Err(TypeError::SessionLeftover(
                        c.to_string(),
                        crate::surface::print_sess_type(&rest),
                    ))
                }
            }
        }
        for (c, old) in saved_gamma.into_iter().rev() {
            match old {
                Some(g) => {
                    self.gamma.insert(c, g);
                }
                None => {
                    self.gamma.remove(&c);
                }
            }
        }
        Ok(())
    }

    fn value_against(&mut self, v: &Value, expected: &ValType) -> CheckResult<()> {
        let found = self.value(v)?;
        if val_type_matches(expected, &found) {
            Ok(())
        } else {
            Err(TypeError::ValueMismatch(
                crate::surface::print_val_type(&found),
                crate::surface::print_val_type(expected),
            ))
        }
    }
}

fn chan_var(x: &str) -> Chan {
    Chan::Var(Var::plain(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int() -> ValType {
        ValType::Base(BaseType::Int)
    }

    fn boolean() -> ValType {
        ValType::Base(BaseType::Bool)
    }

    #[test]
    fn dual_examples() {
        assert_eq!(dual_sess(&SessType::End), SessType::End);
        let s = SessType::out1(int(), SessType::End);
        assert_eq!(dual_sess(&s), SessType::in1(int(), SessType::End));
        // dual(mu t.!(int);t) = mu t.?(int);t, checked by unfolding three levels
        let rec_out = SessType::rec("t", SessType::out1(int(), SessType::Var("t".into())));
        let rec_in = SessType::rec("t", SessType::in1(int(), SessType::Var("t".into())));
        assert_eq!(dual_sess(&rec_out), rec_in);
        let mut a = rec_out.clone();
        let mut b = dual_sess(&rec_out);
        for _ in 0..3 {
            a = a.unfold();
            b = b.unfold();
            match (&a, &b) {
                (SessType::Out(_, x), SessType::In(_, y)) => {
                    a = (**x).clone();
                    b = (**y).clone();
                }
                _ => panic!("expected dual prefixes"),
            }
        }
        assert!(is_dual(&rec_out, &rec_in));
        assert_eq!(dual_sess(&dual_sess(&rec_out)), rec_out);
    }

    #[test]
    fn is_dual_unfoldings() {
        assert!(is_dual(&SessType::End, &SessType::End));
        let s = SessType::out1(int(), SessType::End);
        assert!(is_dual(&s, &SessType::in1(int(), SessType::End)));
        // mu t.!(U);t is dual to ?(U);mu t.!(U);t unfolded mate
        let rec_out = SessType::rec("t", SessType::out1(int(), SessType::Var("t".into())));
        let unfolded_in = SessType::in1(
            int(),
            SessType::rec("t", SessType::in1(int(), SessType::Var("t".into()))),
        );
        assert!(is_dual(&rec_out, &unfolded_in));
        // but not to an input of a different payload chain
        let bad = SessType::in1(
            boolean(),
            SessType::rec("t", SessType::out1(int(), SessType::Var("t".into()))),
        );
        assert!(!is_dual(&rec_out, &bad));
    }

    #[test]
    fn typecheck_equality_service() {
        // {s: ?(int);?(int);!(bool);end} |- s?(x).s?(y).s!<x=y>.0
        let s = Chan::Name(Name::session("s"));
        let ty = SessType::in1(
            int(),
            SessType::in1(int(), SessType::out1(boolean(), SessType::End)),
        );
        let p = Proc::input(
            s.clone(),
            vec!["x".into()],
            Proc::input(
                s.clone(),
                vec!["y".into()],
                Proc::output(
                    s.clone(),
                    vec![Value::Expr(
                        Op::Eq,
                        vec![Value::Var("x".into()), Value::Var("y".into())],
                    )],
                    Proc::Nil,
                ),
            ),
        );
        let envs = TypeEnvs::new().with_session(s.clone(), ty);
        let report = typecheck(&envs, &p);
        assert!(report.ok, "{:?}", report.error);
        // direction mismatch: sending on an input type fails
        let bad_envs =
            TypeEnvs::new().with_session(s.clone(), SessType::in1(boolean(), SessType::End));
        let bad = Proc::output(s, vec![Value::Lit(Lit::Bool(true))], Proc::Nil);
        assert!(!typecheck(&bad_envs, &bad).ok);
    }

    #[test]
    fn nil_types_in_empty_envs() {
        assert!(typecheck(&TypeEnvs::new(), &Proc::Nil).ok);
        // but not with a pending session
        let envs = TypeEnvs::new().with_session(
            Chan::Name(Name::session("s")),
            SessType::out1(int(), SessType::End),
        );
        assert!(!typecheck(&envs, &Proc::Nil).ok);
    }

    #[test]
    fn balanced_and_env_reduce() {
        let s = Chan::Name(Name::session("s"));
        let sd = s.dual().unwrap();
        let mut delta = BTreeMap::new();
        assert!(balanced(&delta));
        delta.insert(s.clone(), SessType::out1(int(), SessType::End));
        delta.insert(sd.clone(), SessType::in1(int(), SessType::End));
        assert!(balanced(&delta));
        let red = env_reduce(&delta);
        assert_eq!(red.len(), 1);
        assert_eq!(red[0][&s], SessType::End);
        assert_eq!(red[0][&sd], SessType::End);
        // label choice
        let mut arms = BTreeMap::new();
        arms.insert("l".to_string(), SessType::End);
        let mut delta2 = BTreeMap::new();
        delta2.insert(s.clone(), SessType::Sel(arms.clone()));
        delta2.insert(sd.clone(), SessType::Bra(arms));
        let red2 = env_reduce(&delta2);
        assert_eq!(red2.len(), 1);
        assert_eq!(red2[0][&s], SessType::End);
    }

    #[test]
    fn minimality_predicate() {
        assert!(is_minimal_sess(&SessType::in1(int(), SessType::End)));
        let two = SessType::in1(int(), SessType::in1(int(), SessType::End));
        assert!(!is_minimal_sess(&two));
        let rec = SessType::rec("t", SessType::out1(int(), SessType::Var("t".into())));
        assert!(is_minimal_sess(&rec));
    }
}
