//! Structural congruence: canonical forms, alpha-canonical renaming, and the
//! congruence test used by golden comparisons and state deduplication.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::subst::{binds_name, Fresh, Subst};
use crate::syntax::*;
use crate::types::{ChanType, SessType, ValType};

/// Canonical form: nil units removed, parallel flattened and sorted, unused
/// restrictions dropped, restriction scope maximized across parallel.
/// Idempotent, and `p` is structurally congruent to `normalize(p)`.
pub fn normalize(p: &Proc) -> Proc {
    let mut fresh = Fresh::new();
    norm(p, &mut fresh)
}

fn norm(p: &Proc, fresh: &mut Fresh) -> Proc {
    // normalize continuations / nested values first
    let p = map_children(p, &mut |q| norm(q, fresh), &mut |v| norm_value(v, fresh));
    // gather the local nu-cluster and parallel components; gather renames on
    // binder/free-name clashes so the cluster is capture-free
    let (binders, comps) = gather(p);
    let mut flat: Vec<Proc> = comps.into_iter().filter(|c| !matches!(c, Proc::Nil)).collect();
    // drop binders that do not occur in any component
    let mut used: Vec<(Name, ChanType)> = binders
        .into_iter()
        .filter(|(n, _)| flat.iter().any(|c| c.fn_set().iter().any(|m| binds_name(n, m))))
        .collect();
    used.sort_by(|a, b| a.0.cmp(&b.0));
    flat.sort();
    let body = Proc::par_all(flat);
    if matches!(body, Proc::Nil) {
        return Proc::Nil;
    }
    used.into_iter().rev().fold(body, |acc, (n, t)| Proc::Res {
        name: n,
        annot: t,
        body: Box::new(acc),
    })
}

/// Collects the top nu-binders and parallel components, hoisting restrictions
/// out of parallel compositions (renaming to avoid capture).
fn gather(p: Proc) -> (Vec<(Name, ChanType)>, Vec<Proc>) {
    let mut fresh = Fresh::new();
    let mut cluster = gather_in(p, &mut fresh);
    cluster.comps.retain(|c| !matches!(c, Proc::Nil));
    (cluster.binders, cluster.comps)
}

struct Cluster {
    binders: Vec<(Name, ChanType)>,
    comps: Vec<Proc>,
}

fn gather_in(p: Proc, fresh: &mut Fresh) -> Cluster {
    match p {
        Proc::Res { name, annot, body } => {
            let mut inner = gather_in(*body, fresh);
            // a directly nested binder with the same key shadows this one
            // completely, so the outer binder binds nothing and is dropped
            let shadowed = inner.binders.iter().any(|(b, _)| {
                b.base == name.base && b.kind == name.kind && b.index == name.index
            });
            if shadowed {
                return inner;
            }
            let mut binders = vec![(name, annot)];
            binders.append(&mut inner.binders);
            Cluster { binders, comps: inner.comps }
        }
        Proc::Par(l, r) => {
            let cl = gather_in(*l, fresh);
            let cr = gather_in(*r, fresh);
            merge(cl, cr, fresh)
        }
        Proc::Nil => Cluster { binders: vec![], comps: vec![] },
        other => Cluster { binders: vec![], comps: vec![other] },
    }
}

/// Merges two sibling clusters, renaming binders of one side that would
/// capture free names of the other (or clash with its binders).
fn merge(mut a: Cluster, mut b: Cluster, fresh: &mut Fresh) -> Cluster {
    rename_clashes(&mut a, &b, fresh);
    rename_clashes(&mut b, &a, fresh);
    a.binders.append(&mut b.binders);
    a.comps.append(&mut b.comps);
    a
}

fn rename_clashes(this: &mut Cluster, other: &Cluster, fresh: &mut Fresh) {
    let other_free: BTreeSet<Name> = other.comps.iter().flat_map(|c| c.fn_set()).collect();
    for i in 0..this.binders.len() {
        let name = this.binders[i].0.clone();
        let clash = other_free.iter().any(|m| binds_name(&name, m))
            || other.binders.iter().any(|(b, _)| {
                b.base == name.base && b.kind == name.kind && b.index == name.index
            });
        if clash {
            let newname = Name { base: fresh.base(&name.base), ..name.clone() };
            let mut ren = Subst::new();
            for ep in name.endpoints() {
                let nep = Name { base: newname.base.clone(), ..ep.clone() };
                ren.chan_map.insert(Chan::Name(ep), Chan::Name(nep));
            }
            // the rename applies to this cluster's components and to later
            // binders' occurrences only through components (types are pure)
            for c in this.comps.iter_mut() {
                *c = ren.apply_proc(c, fresh);
            }
            this.binders[i].0 = newname;
        }
    }
}

/// Rebuilds a process applying `f` to direct subprocesses and `g` to direct
/// values (without crossing into abstraction bodies, which `g` handles).
fn map_children(
    p: &Proc,
    f: &mut impl FnMut(&Proc) -> Proc,
    g: &mut impl FnMut(&Value) -> Value,
) -> Proc {
    match p {
        Proc::Output { subj, payload, cont } => Proc::Output {
            subj: subj.clone(),
            payload: payload.iter().map(|v| g(v)).collect(),
            cont: Box::new(f(cont)),
        },
        Proc::Input { subj, binders, cont } => Proc::Input {
            subj: subj.clone(),
            binders: binders.clone(),
            cont: Box::new(f(cont)),
        },
        Proc::App { fun, args } => Proc::App {
            fun: g(fun),
            args: args
                .iter()
                .map(|a| match a {
                    Arg::Chan(c) => Arg::Chan(c.clone()),
                    Arg::Val(v) => Arg::Val(g(v)),
                })
                .collect(),
        },
        Proc::Par(l, r) => Proc::par(f(l), f(r)),
        Proc::Res { name, annot, body } => Proc::Res {
            name: name.clone(),
            annot: annot.clone(),
            body: Box::new(f(body)),
        },
        Proc::Nil => Proc::Nil,
        Proc::Select { subj, label, cont } => Proc::Select {
            subj: subj.clone(),
            label: label.clone(),
            cont: Box::new(f(cont)),
        },
        Proc::Branch { subj, arms } => Proc::Branch {
            subj: subj.clone(),
            arms: arms.iter().map(|(l, q)| (l.clone(), f(q))).collect(),
        },
        Proc::OutputNp { subj, items, cont } => Proc::OutputNp {
            subj: subj.clone(),
            items: items.clone(),
            cont: Box::new(f(cont)),
        },
        Proc::InputNp { subj, binders, cont } => Proc::InputNp {
            subj: subj.clone(),
            binders: binders.clone(),
            cont: Box::new(f(cont)),
        },
        Proc::Rec { var, body } => Proc::Rec { var: var.clone(), body: Box::new(f(body)) },
        Proc::RecVar(x) => Proc::RecVar(x.clone()),
    }
}

fn norm_value(v: &Value, fresh: &mut Fresh) -> Value {
    match v {
        Value::Abs(a) => Value::Abs(Abs {
            params: a.params.clone(),
            arrow: a.arrow,
            body: Box::new(norm(&a.body, fresh)),
        }),
        Value::Expr(op, args) => {
            Value::Expr(*op, args.iter().map(|x| norm_value(x, fresh)).collect())
        }
        other => other.clone(),
    }
}

/// Alpha-canonical renaming: all bound names, variables, and type variables
/// are renamed to position-derived identifiers so that alpha-equivalent terms
/// become syntactically equal.
pub fn alpha_canonical(p: &Proc) -> Proc {
    let mut st = CanonState::default();
    canon_proc(p, &mut Scope::default(), &mut st)
}

#[derive(Default)]
struct CanonState {
    next: u64,
}

impl CanonState {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("%{}", self.next)
    }
}

#[derive(Default, Clone)]
struct Scope {
    /// (base, kind, index) -> canonical base for bound names
    names: BTreeMap<(Ident, NameKind, Option<u32>), Ident>,
    /// (base, index) -> canonical (base, index) for bound channel vars
    chan_vars: BTreeMap<(Ident, Option<u32>), Ident>,
    /// base -> canonical base for bound value vars
    idents: BTreeMap<Ident, Ident>,
    /// bound type variables
    tvars: BTreeMap<Ident, Ident>,
    /// bound recursion variables
    rec_vars: BTreeMap<Ident, Ident>,
}

impl Scope {
    fn canon_chan(&self, c: &Chan) -> Chan {
        match c {
            Chan::Name(n) => {
                let key = (n.base.clone(), n.kind, n.index);
                match self.names.get(&key) {
                    Some(b) => Chan::Name(Name { base: b.clone(), index: None, ..n.clone() }),
                    None => c.clone(),
                }
            }
            Chan::Var(v) => {
                let key = (v.base.clone(), v.index);
                match self.chan_vars.get(&key) {
                    Some(b) => Chan::Var(Var { base: b.clone(), index: None }),
                    None => match self.idents.get(&v.base) {
                        Some(b) if v.index.is_none() => Chan::Var(Var::plain(b)),
                        _ => c.clone(),
                    },
                }
            }
        }
    }
}

fn canon_proc(p: &Proc, sc: &mut Scope, st: &mut CanonState) -> Proc {
    match p {
        Proc::Output { subj, payload, cont } => Proc::Output {
            subj: sc.canon_chan(subj),
            payload: payload.iter().map(|v| canon_value(v, sc, st)).collect(),
            cont: Box::new(canon_proc(cont, sc, st)),
        },
        Proc::OutputNp { subj, items, cont } => Proc::OutputNp {
            subj: sc.canon_chan(subj),
            items: items
                .iter()
                .map(|(a, t)| {
                    let a = match a {
                        Arg::Chan(c) => Arg::Chan(sc.canon_chan(c)),
                        Arg::Val(v) => Arg::Val(canon_value(v, sc, st)),
                    };
                    (a, canon_chan_type(t, sc, st))
                })
                .collect(),
            cont: Box::new(canon_proc(cont, sc, st)),
        },
        Proc::Input { subj, binders, cont } => {
            let subj = sc.canon_chan(subj);
            let mut inner = sc.clone();
            let mut bs = Vec::new();
            for b in binders {
                let nb = st.fresh();
                inner.idents.insert(b.clone(), nb.clone());
                bs.push(nb);
            }
            Proc::Input { subj, binders: bs, cont: Box::new(canon_proc(cont, &mut inner, st)) }
        }
        Proc::InputNp { subj, binders, cont } => {
            let subj = sc.canon_chan(subj);
            let mut inner = sc.clone();
            let mut bs = Vec::new();
            for (b, t) in binders {
                let nb = st.fresh();
                inner.chan_vars.insert((b.base.clone(), b.index), nb.clone());
                bs.push((Var::plain(&nb), canon_chan_type(t, sc, st)));
            }
            Proc::InputNp { subj, binders: bs, cont: Box::new(canon_proc(cont, &mut inner, st)) }
        }
        Proc::App { fun, args } => Proc::App {
            fun: canon_value(fun, sc, st),
            args: args
                .iter()
                .map(|a| match a {
                    Arg::Chan(c) => {
                        let cc = sc.canon_chan(c);
                        // a value-var used as arg canonicalizes as value too
                        Arg::Chan(cc)
                    }
                    Arg::Val(v) => Arg::Val(canon_value(v, sc, st)),
                })
                .collect(),
        },
        Proc::Par(l, r) => Proc::par(canon_proc(l, sc, st), canon_proc(r, sc, st)),
        Proc::Res { name, annot, body } => {
            let nb = st.fresh();
            let mut inner = sc.clone();
            inner.names.insert((name.base.clone(), name.kind, name.index), nb.clone());
            let annot = canon_chan_type(annot, sc, st);
            Proc::Res {
                name: Name { base: nb, index: None, ..name.clone() },
                annot,
                body: Box::new(canon_proc(body, &mut inner, st)),
            }
        }
        Proc::Nil => Proc::Nil,
        Proc::Select { subj, label, cont } => Proc::Select {
            subj: sc.canon_chan(subj),
            label: label.clone(),
            cont: Box::new(canon_proc(cont, sc, st)),
        },
        Proc::Branch { subj, arms } => Proc::Branch {
            subj: sc.canon_chan(subj),
            arms: arms.iter().map(|(l, q)| (l.clone(), canon_proc(q, sc, st))).collect(),
        },
        Proc::Rec { var, body } => {
            let nb = st.fresh();
            let mut inner = sc.clone();
            inner.rec_vars.insert(var.clone(), nb.clone());
            Proc::Rec { var: nb, body: Box::new(canon_proc(body, &mut inner, st)) }
        }
        Proc::RecVar(x) => {
            Proc::RecVar(sc.rec_vars.get(x).cloned().unwrap_or_else(|| x.clone()))
        }
    }
}

fn canon_value(v: &Value, sc: &mut Scope, st: &mut CanonState) -> Value {
    match v {
        Value::Var(x) => Value::Var(sc.idents.get(x).cloned().unwrap_or_else(|| x.clone())),
        Value::Lit(l) => Value::Lit(l.clone()),
        Value::Expr(op, args) => {
            Value::Expr(*op, args.iter().map(|a| canon_value(a, sc, st)).collect())
        }
        Value::Abs(a) => {
            let mut inner = sc.clone();
            let mut params = Vec::new();
            for (p, t) in &a.params {
                let nb = st.fresh();
                inner.chan_vars.insert((p.base.clone(), p.index), nb.clone());
                if p.index.is_none() {
                    inner.idents.insert(p.base.clone(), nb.clone());
                }
                params.push((Var::plain(&nb), canon_chan_type(t, sc, st)));
            }
            Value::Abs(Abs {
                params,
                arrow: a.arrow,
                body: Box::new(canon_proc(&a.body, &mut inner, st)),
            })
        }
    }
}

fn canon_chan_type(t: &ChanType, _sc: &Scope, st: &mut CanonState) -> ChanType {
    match t {
        ChanType::Session(s) => ChanType::Session(canon_sess(s, &mut BTreeMap::new(), st)),
        ChanType::Shared(u) => {
            ChanType::Shared(Box::new(canon_val_type(u, &mut BTreeMap::new(), st)))
        }
        ChanType::Base(b) => ChanType::Base(*b),
    }
}

fn canon_sess(s: &SessType, env: &mut BTreeMap<String, String>, st: &mut CanonState) -> SessType {
    match s {
        SessType::End => SessType::End,
        SessType::Var(t) => SessType::Var(env.get(t).cloned().unwrap_or_else(|| t.clone())),
        SessType::Rec(t, b) => {
            let nt = st.fresh();
            env.insert(t.clone(), nt.clone());
            let b = canon_sess(b, env, st);
            env.remove(t);
            SessType::Rec(nt, Box::new(b))
        }
        SessType::Out(us, b) => SessType::Out(
            us.iter().map(|u| canon_val_type(u, env, st)).collect(),
            Box::new(canon_sess(b, env, st)),
        ),
        SessType::In(us, b) => SessType::In(
            us.iter().map(|u| canon_val_type(u, env, st)).collect(),
            Box::new(canon_sess(b, env, st)),
        ),
        SessType::Sel(arms) => SessType::Sel(
            arms.iter().map(|(l, x)| (l.clone(), canon_sess(x, env, st))).collect(),
        ),
        SessType::Bra(arms) => SessType::Bra(
            arms.iter().map(|(l, x)| (l.clone(), canon_sess(x, env, st))).collect(),
        ),
    }
}

fn canon_val_type(
    u: &ValType,
    env: &mut BTreeMap<String, String>,
    st: &mut CanonState,
) -> ValType {
    let map_list = |cs: &Vec<ChanType>, env: &mut BTreeMap<String, String>, st: &mut CanonState| {
        cs.iter()
            .map(|c| match c {
                ChanType::Session(s) => ChanType::Session(canon_sess(s, env, st)),
                ChanType::Shared(u) => ChanType::Shared(Box::new(canon_val_type(u, env, st))),
                ChanType::Base(b) => ChanType::Base(*b),
            })
            .collect()
    };
    match u {
        ValType::LinArrow(cs) => ValType::LinArrow(map_list(cs, env, st)),
        ValType::ShArrow(cs) => ValType::ShArrow(map_list(cs, env, st)),
        ValType::Base(b) => ValType::Base(*b),
        ValType::NpSugar(cs) => ValType::NpSugar(map_list(cs, env, st)),
    }
}

/// Structural congruence up to alpha: canonical forms compared for equality.
pub fn congruent(p: &Proc, q: &Proc) -> bool {
    canonical_key(p) == canonical_key(q)
}

/// A stable key identifying a process up to structural congruence and alpha.
pub fn canonical_key(p: &Proc) -> Proc {
    // normalize, canonicalize binders, then normalize again so that the
    // component order is decided on canonical names
    let n = normalize(p);
    let a = alpha_canonical(&n);
    let n2 = normalize(&a);
    alpha_canonical(&n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SessType;

    fn ch(n: &str) -> Chan {
        Chan::Name(Name::session(n))
    }

    #[test]
    fn par_nil_unit() {
        let p = Proc::par(Proc::output(ch("u"), vec![], Proc::Nil), Proc::Nil);
        assert_eq!(normalize(&p), Proc::output(ch("u"), vec![], Proc::Nil));
    }

    #[test]
    fn res_nil_collapses() {
        let p = Proc::res(Name::session("n"), ChanType::Session(SessType::End), Proc::Nil);
        assert_eq!(normalize(&p), Proc::Nil);
    }

    #[test]
    fn scope_extrusion() {
        // P | new n Q (n not free in P)  ==  new n (P | Q)
        let pp = Proc::output(ch("u"), vec![], Proc::Nil);
        let q = Proc::input(ch("n"), vec!["x".into()], Proc::Nil);
        let lhs = Proc::par(
            pp.clone(),
            Proc::res(Name::session("n"), ChanType::Session(SessType::End), q.clone()),
        );
        let rhs = Proc::res(
            Name::session("n"),
            ChanType::Session(SessType::End),
            Proc::par(pp, q),
        );
        assert!(congruent(&lhs, &rhs));
    }

    #[test]
    fn normalize_idempotent() {
        let p = Proc::par(
            Proc::par(Proc::Nil, Proc::output(ch("b"), vec![], Proc::Nil)),
            Proc::output(ch("a"), vec![], Proc::Nil),
        );
        let n1 = normalize(&p);
        let n2 = normalize(&n1);
        assert_eq!(n1, n2);
    }

    #[test]
    fn alpha_equivalent_restrictions() {
        let p = Proc::res(
            Name::session("s"),
            ChanType::Session(SessType::End),
            Proc::output(ch("s"), vec![], Proc::Nil),
        );
        let q = Proc::res(
            Name::session("r"),
            ChanType::Session(SessType::End),
            Proc::output(ch("r"), vec![], Proc::Nil),
        );
        assert!(congruent(&p, &q));
        assert!(!congruent(&p, &Proc::Nil));
    }

    #[test]
    fn normalize_preserves_free_names() {
        let p = Proc::par(
            Proc::output(ch("u"), vec![], Proc::Nil),
            Proc::res(
                Name::session("n"),
                ChanType::Session(SessType::End),
                Proc::input(ch("n"), vec!["x".into()], Proc::Nil),
            ),
        );
        assert_eq!(p.fn_set(), normalize(&p).fn_set());
    }
}
