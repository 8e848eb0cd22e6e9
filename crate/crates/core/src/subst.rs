//! Capture-avoiding substitution over processes and values.
//!
//! A substitution carries two maps: channels for channels (names or channel
//! variables, matched exactly including index and polarity) and values for
//! value variables. Bound names and binders are renamed on demand through a
//! fresh-name supply.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::syntax::*;

/// Monotone supply of fresh base identifiers.
#[derive(Debug, Default, Clone)]
pub struct Fresh {
    counter: u64,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh { counter: 0 }
    }

    /// A fresh identifier derived from `base` (`x` -> `x'1`, `x'2`, ...).
    pub fn base(&mut self, base: &str) -> String {
        self.counter += 1;
        let stem = base.split('\'').next().unwrap_or(base);
        let stem = if stem.is_empty() { "x" } else { stem };
        format!("{stem}'{}", self.counter)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    pub chan_map: BTreeMap<Chan, Chan>,
    pub val_map: BTreeMap<Ident, Value>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn is_identity(&self) -> bool {
        self.chan_map.is_empty() && self.val_map.is_empty()
    }

    pub fn chan(mut self, from: Chan, to: Chan) -> Subst {
        self.chan_map.insert(from, to);
        self
    }

    pub fn val(mut self, from: &str, to: Value) -> Subst {
        self.val_map.insert(from.into(), to);
        self
    }

    /// `{init(us)/us}`: maps every listed name to its index-1 variant.
    pub fn init<I: IntoIterator<Item = Name>>(names: I) -> Subst {
        let mut s = Subst::new();
        for n in names {
            if n.index.is_none() {
                s.chan_map.insert(Chan::Name(n.clone()), Chan::Name(n.with_index(1)));
            }
        }
        s
    }

    /// `next(n_i)`: `{n_{i+1}/n_i}` when `linear` (a non-tail-recursive
    /// session), the identity otherwise.
    pub fn next_index(c: &Chan, linear: bool) -> Subst {
        match (linear, c.index()) {
            (true, Some(i)) => Subst::new().chan(c.clone(), c.with_index(i + 1)),
            _ => Subst::new(),
        }
    }

    /// Composition biased to the left: apply `self` first, then `other`.
    pub fn then(&self, other: &Subst, fresh: &mut Fresh) -> Subst {
        let mut out = Subst::new();
        for (k, v) in &self.chan_map {
            let v2 = other.chan_map.get(v).cloned().unwrap_or_else(|| v.clone());
            out.chan_map.insert(k.clone(), v2);
        }
        for (k, v) in &other.chan_map {
            out.chan_map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        for (k, v) in &self.val_map {
            out.val_map.insert(k.clone(), other.apply_value(v, fresh));
        }
        for (k, v) in &other.val_map {
            out.val_map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        out
    }

    pub fn apply_chan(&self, c: &Chan) -> Chan {
        self.chan_map.get(c).cloned().unwrap_or_else(|| c.clone())
    }

    pub fn apply_arg(&self, a: &Arg, fresh: &mut Fresh) -> Arg {
        match a {
            Arg::Chan(c) => {
                // A channel-position variable may be replaced by a value
                // (base argument substituted for a base-typed parameter).
                if let Chan::Var(v) = c {
                    if v.index.is_none() {
                        if let Some(val) = self.val_map.get(&v.base) {
                            return Arg::Val(val.clone());
                        }
                    }
                }
                Arg::Chan(self.apply_chan(c))
            }
            Arg::Val(v) => match v {
                // A value-position variable may be replaced by a channel.
                Value::Var(x) => {
                    let as_chan = Chan::Var(Var::plain(x));
                    if let Some(c) = self.chan_map.get(&as_chan) {
                        Arg::Chan(c.clone())
                    } else {
                        Arg::Val(self.apply_value(v, fresh))
                    }
                }
                _ => Arg::Val(self.apply_value(v, fresh)),
            },
        }
    }

    pub fn apply_value(&self, v: &Value, fresh: &mut Fresh) -> Value {
        match v {
            Value::Var(x) => self.val_map.get(x).cloned().unwrap_or_else(|| v.clone()),
            Value::Lit(_) => v.clone(),
            Value::Expr(op, args) => {
                Value::Expr(*op, args.iter().map(|a| self.apply_value(a, fresh)).collect())
            }
            Value::Abs(a) => {
                let mut sub = self.clone();
                let mut params = a.params.clone();
                let mut renames = Subst::new();
                for (p, _) in &mut params {
                    sub.shadow_param(p);
                    if sub.range_mentions_var(p) {
                        let fresh_base = fresh.base(&p.base);
                        let np = Var { base: fresh_base, index: p.index };
                        renames.chan_map.insert(Chan::Var(p.clone()), Chan::Var(np.clone()));
                        if p.index.is_none() {
                            renames.val_map.insert(p.base.clone(), Value::Var(np.base.clone()));
                        }
                        *p = np;
                    }
                }
                let body = if renames.is_identity() {
                    (*a.body).clone()
                } else {
                    renames.apply_proc(&a.body, fresh)
                };
                Value::Abs(Abs {
                    params,
                    arrow: a.arrow,
                    body: Box::new(sub.apply_proc(&body, fresh)),
                })
            }
        }
    }

    pub fn apply_proc(&self, p: &Proc, fresh: &mut Fresh) -> Proc {
        if self.is_identity() {
            return p.clone();
        }
        match p {
            Proc::Output { subj, payload, cont } => Proc::Output {
                subj: self.apply_chan(subj),
                payload: payload.iter().map(|v| self.apply_value(v, fresh)).collect(),
                cont: Box::new(self.apply_proc(cont, fresh)),
            },
            Proc::OutputNp { subj, items, cont } => Proc::OutputNp {
                subj: self.apply_chan(subj),
                items: items
                    .iter()
                    .map(|(a, t)| (self.apply_arg(a, fresh), t.clone()))
                    .collect(),
                cont: Box::new(self.apply_proc(cont, fresh)),
            },
            Proc::Input { subj, binders, cont } => {
                let subj = self.apply_chan(subj);
                let mut sub = self.clone();
                let mut binders = binders.clone();
                let mut renames = Subst::new();
                for b in &mut binders {
                    sub.shadow_ident(b);
                    if sub.range_mentions_ident(b) {
                        let nb = fresh.base(b);
                        renames.val_map.insert(b.clone(), Value::Var(nb.clone()));
                        *b = nb;
                    }
                }
                let cont = if renames.is_identity() {
                    (**cont).clone()
                } else {
                    renames.apply_proc(cont, fresh)
                };
                Proc::Input { subj, binders, cont: Box::new(sub.apply_proc(&cont, fresh)) }
            }
            Proc::InputNp { subj, binders, cont } => {
                let subj = self.apply_chan(subj);
                let mut sub = self.clone();
                let mut binders = binders.clone();
                let mut renames = Subst::new();
                for (b, _) in &mut binders {
                    sub.shadow_param(b);
                    if sub.range_mentions_var(b) {
                        let nb = Var { base: fresh.base(&b.base), index: b.index };
                        renames.chan_map.insert(Chan::Var(b.clone()), Chan::Var(nb.clone()));
                        *b = nb;
                    }
                }
                let cont = if renames.is_identity() {
                    (**cont).clone()
                } else {
                    renames.apply_proc(cont, fresh)
                };
                Proc::InputNp { subj, binders, cont: Box::new(sub.apply_proc(&cont, fresh)) }
            }
            Proc::App { fun, args } => Proc::App {
                fun: self.apply_value(fun, fresh),
                args: args.iter().map(|a| self.apply_arg(a, fresh)).collect(),
            },
            Proc::Par(l, r) => {
                Proc::par(self.apply_proc(l, fresh), self.apply_proc(r, fresh))
            }
            Proc::Res { name, annot, body } => {
                let mut sub = self.clone();
                sub.shadow_name(name);
                if sub.range_mentions_name(name) {
                    let nb = fresh.base(&name.base);
                    let newname = Name { base: nb, ..name.clone() };
                    let mut ren = Subst::new();
                    for ep in name.endpoints() {
                        let nep = Name { base: newname.base.clone(), ..ep.clone() };
                        ren.chan_map.insert(Chan::Name(ep), Chan::Name(nep));
                    }
                    let body = ren.apply_proc(body, fresh);
                    Proc::Res {
                        name: newname,
                        annot: annot.clone(),
                        body: Box::new(sub.apply_proc(&body, fresh)),
                    }
                } else {
                    Proc::Res {
                        name: name.clone(),
                        annot: annot.clone(),
                        body: Box::new(sub.apply_proc(body, fresh)),
                    }
                }
            }
            Proc::Nil => Proc::Nil,
            Proc::Select { subj, label, cont } => Proc::Select {
                subj: self.apply_chan(subj),
                label: label.clone(),
                cont: Box::new(self.apply_proc(cont, fresh)),
            },
            Proc::Branch { subj, arms } => Proc::Branch {
                subj: self.apply_chan(subj),
                arms: arms
                    .iter()
                    .map(|(l, q)| (l.clone(), self.apply_proc(q, fresh)))
                    .collect(),
            },
            Proc::Rec { var, body } => Proc::Rec {
                var: var.clone(),
                body: Box::new(self.apply_proc(body, fresh)),
            },
            Proc::RecVar(x) => Proc::RecVar(x.clone()),
        }
    }

    /// Removes entries shadowed by a restriction binder.
    fn shadow_name(&mut self, n: &Name) {
        self.chan_map.retain(|k, _| match k {
            Chan::Name(m) => !binds_name(n, m),
            Chan::Var(_) => true,
        });
    }

    fn shadow_ident(&mut self, x: &str) {
        self.val_map.remove(x);
        self.chan_map.retain(|k, _| !matches!(k, Chan::Var(v) if v.base == x));
    }

    fn shadow_param(&mut self, p: &Var) {
        self.chan_map.retain(|k, _| !matches!(k, Chan::Var(v) if v == p));
        if p.index.is_none() {
            self.val_map.remove(&p.base);
        }
    }

    fn range_mentions_name(&self, n: &Name) -> bool {
        self.chan_map.values().any(|c| matches!(c, Chan::Name(m) if binds_name(n, m)))
            || self.val_map.values().any(|v| value_mentions_name(v, n))
    }

    fn range_mentions_var(&self, p: &Var) -> bool {
        self.chan_map.values().any(|c| matches!(c, Chan::Var(v) if v == p))
            || self
                .val_map
                .values()
                .any(|v| p.index.is_none() && value_free_idents(v).contains(&p.base))
    }

    fn range_mentions_ident(&self, x: &str) -> bool {
        self.val_map.values().any(|v| value_free_idents(v).contains(x))
            || self.chan_map.values().any(|c| matches!(c, Chan::Var(v) if v.base == x))
    }
}

/// Whether restriction of `binder` captures name `n` (same base, kind, index;
/// either polarity for session-like kinds).
pub fn binds_name(binder: &Name, n: &Name) -> bool {
    binder.base == n.base
        && binder.kind == n.kind
        && binder.index == n.index
        && match binder.kind {
            NameKind::Session | NameKind::Propagator => true,
            NameKind::Shared => true,
            NameKind::RecPropagator => binder.dual == n.dual,
        }
}

fn value_mentions_name(v: &Value, n: &Name) -> bool {
    match v {
        Value::Var(_) | Value::Lit(_) => false,
        Value::Expr(_, args) => args.iter().any(|a| value_mentions_name(a, n)),
        Value::Abs(a) => a.body.fn_set().iter().any(|m| binds_name(n, m)),
    }
}

fn value_free_idents(v: &Value) -> BTreeSet<Ident> {
    match v {
        Value::Var(x) => std::iter::once(x.clone()).collect(),
        Value::Lit(_) => BTreeSet::new(),
        Value::Expr(_, args) => args.iter().flat_map(value_free_idents).collect(),
        Value::Abs(a) => free_vars(&a.body)
            .into_iter()
            .filter(|x| !a.params.iter().any(|(p, _)| p.base == *x))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ChanType, SessType};

    #[test]
    fn rename_name_in_output() {
        // (u!<y>.0){m/y, n@1/u} = n@1!<m>.0
        let p = Proc::output(
            Chan::Name(Name::session("u")),
            vec![Value::Var("y".into())],
            Proc::Nil,
        );
        let s = Subst::new()
            .chan(Chan::Name(Name::session("u")), Chan::Name(Name::session("n").with_index(1)))
            .val("y", Value::Var("m".into()));
        let mut f = Fresh::new();
        let q = s.apply_proc(&p, &mut f);
        assert_eq!(
            q,
            Proc::output(
                Chan::Name(Name::session("n").with_index(1)),
                vec![Value::Var("m".into())],
                Proc::Nil
            )
        );
    }

    #[test]
    fn init_indexes_free_names() {
        let p = Proc::output(Chan::Name(Name::session("s")), vec![], Proc::Nil);
        let s = Subst::init(p.fn_set());
        let mut f = Fresh::new();
        let q = s.apply_proc(&p, &mut f);
        match q {
            Proc::Output { subj, .. } => assert_eq!(subj.index(), Some(1)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn capture_avoided_under_restriction() {
        // (new m (u!<\(x:end).x m'... )){m/y} must rename the bound m.
        let inner = Proc::output(
            Chan::Name(Name::session("u")),
            vec![Value::Var("y".into())],
            Proc::output(Chan::Name(Name::session("m")), vec![], Proc::Nil),
        );
        let p = Proc::res(Name::session("m"), ChanType::Session(SessType::End), inner);
        let s = Subst::new().val(
            "y",
            Value::abs(
                vec![(Var::plain("z"), ChanType::Session(SessType::End))],
                ArrowKind::Lin,
                Proc::output(Chan::Name(Name::session("m")), vec![], Proc::Nil),
            ),
        );
        let mut f = Fresh::new();
        let q = s.apply_proc(&p, &mut f);
        if let Proc::Res { name, body, .. } = &q {
            assert_ne!(name.base, "m");
            // the substituted abstraction still mentions the free m
            let frees = body.fn_set();
            assert!(frees.iter().any(|n| n.base == "m"));
        } else {
            panic!("expected restriction");
        }
    }

    #[test]
    fn disjoint_substs_commute() {
        let p = Proc::par(
            Proc::output(Chan::Name(Name::session("u")), vec![Value::Var("x".into())], Proc::Nil),
            Proc::output(Chan::Name(Name::session("v")), vec![Value::Var("y".into())], Proc::Nil),
        );
        let s1 = Subst::new().val("x", Value::Lit(Lit::Int(1)));
        let s2 = Subst::new().val("y", Value::Lit(Lit::Int(2)));
        let mut f = Fresh::new();
        let a = s2.apply_proc(&s1.apply_proc(&p, &mut f), &mut f);
        let b = s1.apply_proc(&s2.apply_proc(&p, &mut f), &mut f);
        assert_eq!(a, b);
    }
}
