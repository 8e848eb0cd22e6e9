//! Deterministic pretty-printer; output re-parses to the same AST.

use std::fmt::Write;

use crate::syntax::*;
use crate::types::*;

pub fn print_proc(p: &Proc) -> String {
    let mut s = String::new();
    proc_at(&mut s, p);
    s
}

/// Prefix-level printing: parallels get parentheses so the term stays a
/// single juxtaposable unit.
fn atom(out: &mut String, p: &Proc) {
    if matches!(p, Proc::Par(_, _)) {
        out.push('(');
        proc_at(out, p);
        out.push(')');
    } else {
        proc_at(out, p);
    }
}

fn proc_at(out: &mut String, p: &Proc) {
    match p {
        Proc::Nil => out.push('0'),
        Proc::Output { subj, payload, cont } => {
            let _ = write!(out, "{subj}!<");
            commas(out, payload, |o, v| value(o, v));
            out.push_str(">.");
            atom(out, cont);
        }
        Proc::OutputNp { subj, items, cont } => {
            let _ = write!(out, "{subj}!<<");
            commas(out, items, |o, (a, t)| {
                arg(o, a);
                let _ = write!(o, " : {}", print_chan_type(t));
            });
            out.push_str(">>.");
            atom(out, cont);
        }
        Proc::Input { subj, binders, cont } => {
            let _ = write!(out, "{subj}?(");
            commas(out, binders, |o, b| o.push_str(b));
            out.push_str(").");
            atom(out, cont);
        }
        Proc::InputNp { subj, binders, cont } => {
            let _ = write!(out, "{subj}?((");
            commas(out, binders, |o, (v, t)| {
                let _ = write!(o, "{v} : {}", print_chan_type(t));
            });
            out.push_str(")).");
            atom(out, cont);
        }
        Proc::App { fun, args } => {
            match fun {
                Value::Var(x) => out.push_str(x),
                other => {
                    out.push('(');
                    value(out, other);
                    out.push(')');
                }
            }
            out.push('(');
            commas(out, args, |o, a| arg(o, a));
            out.push(')');
        }
        Proc::Par(_, _) => {
            let mut comps = Vec::new();
            flatten(p, &mut comps);
            for (i, c) in comps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                atom(out, c);
            }
        }
        Proc::Res { name, annot, body } => {
            let _ = write!(out, "new ({name} : {}) ", print_chan_type(annot));
            atom(out, body);
        }
        Proc::Select { subj, label, cont } => {
            let _ = write!(out, "{subj}<{label}.");
            atom(out, cont);
        }
        Proc::Branch { subj, arms } => {
            let _ = write!(out, "{subj}>{{");
            let mut first = true;
            for (l, q) in arms {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                let _ = write!(out, "{l}: ");
                proc_at(out, q);
            }
            out.push('}');
        }
        Proc::Rec { var, body } => {
            let _ = write!(out, "rec {var}. ");
            atom(out, body);
        }
        Proc::RecVar(x) => out.push_str(x),
    }
}

fn flatten(p: &Proc, out: &mut Vec<Proc>) {
    match p {
        Proc::Par(l, r) => {
            flatten(l, out);
            flatten(r, out);
        }
        other => out.push(other.clone()),
    }
}

fn commas<T>(out: &mut String, xs: &[T], f: impl Fn(&mut String, &T)) {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        f(out, x);
    }
}

fn arg(out: &mut String, a: &Arg) {
    match a {
        Arg::Chan(c) => {
            let _ = write!(out, "{c}");
        }
        Arg::Val(v) => value(out, v),
    }
}

pub fn print_value(v: &Value) -> String {
    let mut s = String::new();
    value(&mut s, v);
    s
}

fn value(out: &mut String, v: &Value) {
    match v {
        Value::Var(x) => out.push_str(x),
        Value::Lit(l) => {
            let _ = write!(out, "{l}");
        }
        Value::Expr(op, args) => match op {
            Op::Neg => {
                out.push('-');
                value_operand(out, &args[0]);
            }
            Op::Len => {
                out.push_str("len(");
                value(out, &args[0]);
                out.push(')');
            }
            Op::Add => {
                value_operand(out, &args[0]);
                out.push('+');
                value_operand(out, &args[1]);
            }
            Op::Eq => {
                value_operand(out, &args[0]);
                out.push('=');
                value_operand(out, &args[1]);
            }
        },
        Value::Abs(a) => {
            if a.arrow == ArrowKind::Sh {
                out.push('!');
            }
            out.push_str("\\(");
            commas(out, &a.params, |o, (p, t)| {
                let _ = write!(o, "{p} : {}", print_chan_type(t));
            });
            out.push_str(").");
            atom(out, &a.body);
        }
    }
}

fn value_operand(out: &mut String, v: &Value) {
    if matches!(v, Value::Expr(Op::Add | Op::Eq, _)) {
        out.push('(');
        value(out, v);
        out.push(')');
    } else {
        value(out, v);
    }
}

pub fn print_sess_type(s: &SessType) -> String {
    let mut out = String::new();
    sess(&mut out, s);
    out
}

fn sess(out: &mut String, s: &SessType) {
    match s {
        SessType::End => out.push_str("end"),
        SessType::Var(t) => out.push_str(t),
        SessType::Rec(t, b) => {
            let _ = write!(out, "mu {t}.");
            sess(out, b);
        }
        SessType::Out(us, b) => {
            out.push_str("!(");
            commas(out, us, |o, u| o.push_str(&print_val_type(u)));
            out.push_str(");");
            sess(out, b);
        }
        SessType::In(us, b) => {
            out.push_str("?(");
            commas(out, us, |o, u| o.push_str(&print_val_type(u)));
            out.push_str(");");
            sess(out, b);
        }
        SessType::Sel(arms) => {
            out.push_str("+{");
            choice(out, arms);
            out.push('}');
        }
        SessType::Bra(arms) => {
            out.push_str("&{");
            choice(out, arms);
            out.push('}');
        }
    }
}

fn choice(out: &mut String, arms: &std::collections::BTreeMap<Label, SessType>) {
    let mut first = true;
    for (l, s2) in arms {
        if !first {
            out.push_str(", ");
        }
        first = false;
        let _ = write!(out, "{l}: ");
        sess(out, s2);
    }
}

pub fn print_val_type(u: &ValType) -> String {
    match u {
        ValType::LinArrow(cs) => {
            let inner: Vec<String> = cs.iter().map(print_chan_type).collect();
            format!("lin({})->o", inner.join(", "))
        }
        ValType::ShArrow(cs) => {
            let inner: Vec<String> = cs.iter().map(print_chan_type).collect();
            format!("sh({})->o", inner.join(", "))
        }
        ValType::Base(b) => b.to_string(),
        ValType::NpSugar(cs) => {
            let inner: Vec<String> = cs.iter().map(print_chan_type).collect();
            format!("<<{}>>", inner.join(", "))
        }
    }
}

pub fn print_chan_type(c: &ChanType) -> String {
    match c {
        ChanType::Session(s) => print_sess_type(s),
        ChanType::Shared(u) => format!("chan<{}>", print_val_type(u)),
        ChanType::Base(b) => b.to_string(),
    }
}
