//! Expansion of the name-passing sugar into abstraction passing.
//!
//! `t!<<a : C>>.P` packs the channels into an abstraction; `t?((x : C)).Q`
//! unpacks by applying the received value to a fresh session and receiving
//! the continuation abstraction on its dual. Inside the sugar, payload types
//! are recursively encoded as well, so a sugared exchange lives entirely in
//! the encoded world.

use crate::subst::Fresh;
use crate::syntax::*;
use crate::types::*;

/// `<<C1,..,Cn>>  =  lin(?(lin(C1^t,..,Cn^t)->o);end)->o`
fn wrap_items(cs: &[ChanType]) -> ValType {
    let inner = ValType::LinArrow(cs.iter().map(t_map).collect());
    ValType::LinArrow(vec![ChanType::Session(SessType::In(
        vec![inner],
        Box::new(SessType::End),
    ))])
}

/// Payload-position encoding of a value type.
fn wrap(u: &ValType) -> ValType {
    match u {
        ValType::LinArrow(cs) => ValType::LinArrow(cs.iter().map(t_map).collect()),
        ValType::ShArrow(cs) => ValType::ShArrow(cs.iter().map(t_map).collect()),
        ValType::Base(b) => wrap_items(&[ChanType::Base(*b)]),
        ValType::NpSugar(cs) => wrap_items(cs),
    }
}

/// Channel-position encoding: rewrites every payload with `wrap`.
fn t_map(c: &ChanType) -> ChanType {
    match c {
        ChanType::Session(s) => ChanType::Session(t_sess(s)),
        ChanType::Shared(u) => ChanType::Shared(Box::new(wrap(u))),
        ChanType::Base(b) => ChanType::Base(*b),
    }
}

fn t_sess(s: &SessType) -> SessType {
    match s {
        SessType::End => SessType::End,
        SessType::Var(t) => SessType::Var(t.clone()),
        SessType::Rec(t, b) => SessType::Rec(t.clone(), Box::new(t_sess(b))),
        SessType::Out(us, b) => SessType::Out(us.iter().map(wrap).collect(), Box::new(t_sess(b))),
        SessType::In(us, b) => SessType::In(us.iter().map(wrap).collect(), Box::new(t_sess(b))),
        SessType::Sel(arms) => {
            SessType::Sel(arms.iter().map(|(l, x)| (l.clone(), t_sess(x))).collect())
        }
        SessType::Bra(arms) => {
            SessType::Bra(arms.iter().map(|(l, x)| (l.clone(), t_sess(x))).collect())
        }
    }
}

/// Removes `<<..>>` nodes from a value type (recursively).
pub fn desugar_np_type(u: &ValType) -> ValType {
    match u {
        ValType::NpSugar(cs) => wrap_items(&cs.iter().map(|c| desugar_np_chan(c)).collect::<Vec<_>>()),
        ValType::LinArrow(cs) => ValType::LinArrow(cs.iter().map(desugar_np_chan).collect()),
        ValType::ShArrow(cs) => ValType::ShArrow(cs.iter().map(desugar_np_chan).collect()),
        ValType::Base(b) => ValType::Base(*b),
    }
}

pub fn desugar_np_chan(c: &ChanType) -> ChanType {
    match c {
        ChanType::Session(s) => ChanType::Session(desugar_np_sess(s)),
        ChanType::Shared(u) => ChanType::Shared(Box::new(desugar_np_type(u))),
        ChanType::Base(b) => ChanType::Base(*b),
    }
}

pub fn desugar_np_sess(s: &SessType) -> SessType {
    match s {
        SessType::End => SessType::End,
        SessType::Var(t) => SessType::Var(t.clone()),
        SessType::Rec(t, b) => SessType::Rec(t.clone(), Box::new(desugar_np_sess(b))),
        SessType::Out(us, b) => SessType::Out(
            us.iter().map(desugar_np_type).collect(),
            Box::new(desugar_np_sess(b)),
        ),
        SessType::In(us, b) => SessType::In(
            us.iter().map(desugar_np_type).collect(),
            Box::new(desugar_np_sess(b)),
        ),
        SessType::Sel(arms) => {
            SessType::Sel(arms.iter().map(|(l, x)| (l.clone(), desugar_np_sess(x))).collect())
        }
        SessType::Bra(arms) => {
            SessType::Bra(arms.iter().map(|(l, x)| (l.clone(), desugar_np_sess(x))).collect())
        }
    }
}

/// Expands every name-passing sugar form in `p` (and in nested values and
/// type annotations).
pub fn desugar_name_passing(p: &Proc, fresh: &mut Fresh) -> Proc {
    match p {
        Proc::OutputNp { subj, items, cont } => {
            let cont = desugar_name_passing(cont, fresh);
            let z = Var::plain(&fresh.base("z"));
            let x = fresh.base("x");
            let ts: Vec<ChanType> = items.iter().map(|(_, t)| desugar_np_chan(t)).collect();
            let z_type = ChanType::Session(SessType::In(
                vec![ValType::LinArrow(ts.iter().map(t_map).collect())],
                Box::new(SessType::End),
            ));
            let body = Proc::Input {
                subj: Chan::Var(z.clone()),
                binders: vec![x.clone()],
                cont: Box::new(Proc::App {
                    fun: Value::Var(x),
                    args: items.iter().map(|(a, _)| a.clone()).collect(),
                }),
            };
            let v = Value::abs(vec![(z, z_type)], ArrowKind::Lin, body);
            Proc::Output {
                subj: subj.clone(),
                payload: vec![v],
                cont: Box::new(cont),
            }
        }
        Proc::InputNp { subj, binders, cont } => {
            let cont = desugar_name_passing(cont, fresh);
            let y = fresh.base("y");
            let z = Name::session(&fresh.base("z"));
            let ts: Vec<ChanType> = binders.iter().map(|(_, t)| desugar_np_chan(t)).collect();
            let params: Vec<(Var, ChanType)> = binders
                .iter()
                .zip(ts.iter())
                .map(|((v, _), t)| (v.clone(), t_map(t)))
                .collect();
            let inner_abs = Value::abs(params, ArrowKind::Lin, cont);
            let z_type = SessType::In(
                vec![ValType::LinArrow(ts.iter().map(t_map).collect())],
                Box::new(SessType::End),
            );
            let body = Proc::res(
                z.clone(),
                ChanType::Session(z_type),
                Proc::par(
                    Proc::App {
                        fun: Value::Var(y.clone()),
                        args: vec![Arg::Chan(Chan::Name(z.clone()))],
                    },
                    Proc::output(Chan::Name(z.dual()), vec![inner_abs], Proc::Nil),
                ),
            );
            Proc::Input { subj: subj.clone(), binders: vec![y], cont: Box::new(body) }
        }
        Proc::Output { subj, payload, cont } => Proc::Output {
            subj: subj.clone(),
            payload: payload.iter().map(|v| desugar_value(v, fresh)).collect(),
            cont: Box::new(desugar_name_passing(cont, fresh)),
        },
        Proc::Input { subj, binders, cont } => Proc::Input {
            subj: subj.clone(),
            binders: binders.clone(),
            cont: Box::new(desugar_name_passing(cont, fresh)),
        },
        Proc::App { fun, args } => Proc::App {
            fun: desugar_value(fun, fresh),
            args: args
                .iter()
                .map(|a| match a {
                    Arg::Val(v) => Arg::Val(desugar_value(v, fresh)),
                    c => c.clone(),
                })
                .collect(),
        },
        Proc::Par(l, r) => Proc::par(
            desugar_name_passing(l, fresh),
            desugar_name_passing(r, fresh),
        ),
        Proc::Res { name, annot, body } => Proc::Res {
            name: name.clone(),
            annot: desugar_np_chan(annot),
            body: Box::new(desugar_name_passing(body, fresh)),
        },
        Proc::Nil => Proc::Nil,
        Proc::Select { subj, label, cont } => Proc::Select {
            subj: subj.clone(),
            label: label.clone(),
            cont: Box::new(desugar_name_passing(cont, fresh)),
        },
        Proc::Branch { subj, arms } => Proc::Branch {
            subj: subj.clone(),
            arms: arms
                .iter()
                .map(|(l, q)| (l.clone(), desugar_name_passing(q, fresh)))
                .collect(),
        },
        Proc::Rec { var, body } => Proc::Rec {
            var: var.clone(),
            body: Box::new(desugar_name_passing(body, fresh)),
        },
        Proc::RecVar(x) => Proc::RecVar(x.clone()),
    }
}

fn desugar_value(v: &Value, fresh: &mut Fresh) -> Value {
    match v {
        Value::Abs(a) => Value::Abs(Abs {
            params: a.params.iter().map(|(p, t)| (p.clone(), desugar_np_chan(t))).collect(),
            arrow: a.arrow,
            body: Box::new(desugar_name_passing(&a.body, fresh)),
        }),
        Value::Expr(op, args) => {
            Value::Expr(*op, args.iter().map(|x| desugar_value(x, fresh)).collect())
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sugar_free_terms_unchanged() {
        let p = Proc::output(Chan::Name(Name::session("u")), vec![], Proc::Nil);
        let mut f = Fresh::new();
        assert_eq!(desugar_name_passing(&p, &mut f), p);
    }

    #[test]
    fn output_np_shape() {
        // t!<<m : !(bool);end>>.0  ->  t!<\(z:?(lin(!(bool);end)->o);end). z?(x).x(m)>.0
        let m = Name::session("m");
        let c = ChanType::Session(SessType::out1(ValType::Base(BaseType::Bool), SessType::End));
        let p = Proc::OutputNp {
            subj: Chan::Name(Name::session("t")),
            items: vec![(Arg::name(m), c)],
            cont: Box::new(Proc::Nil),
        };
        let mut f = Fresh::new();
        let d = desugar_name_passing(&p, &mut f);
        match &d {
            Proc::Output { payload, .. } => match &payload[0] {
                Value::Abs(a) => {
                    assert_eq!(a.params.len(), 1);
                    match &*a.body {
                        Proc::Input { cont, .. } => {
                            assert!(matches!(**cont, Proc::App { .. }));
                        }
                        _ => panic!("expected input inside the packed abstraction"),
                    }
                }
                _ => panic!("expected abstraction payload"),
            },
            _ => panic!("expected plain output"),
        }
    }
}
