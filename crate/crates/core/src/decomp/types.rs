//! Slicing standard session types into lists of minimal session types.

use std::collections::BTreeMap;

use crate::syntax::{Chan, Name};
use crate::types::*;
use crate::typing::{GammaType, TypeEnvs};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DecompTypeError {
    #[error("nested recursion in {0} is not supported")]
    NestedRecursion(String),
    #[error("unguarded recursion in {0}")]
    Unguarded(String),
    #[error("mu type {0} is neither tail-recursive nor single-slice")]
    BadRecShape(String),
    #[error("{0} applied to a non-recursive type")]
    NotRecursive(String),
    #[error("name-passing sugar in type {0}; desugar first")]
    Sugar(String),
    #[error("session name `{0}` in the environment is not indexed")]
    Unindexed(String),
}

type Res<T> = Result<T, DecompTypeError>;

fn print_s(s: &SessType) -> String {
    crate::surface::print_sess_type(s)
}

fn check_simple(s: &SessType, under_mu: bool) -> Res<()> {
    match s {
        SessType::End | SessType::Var(_) => Ok(()),
        SessType::Rec(_, b) => {
            if under_mu {
                return Err(DecompTypeError::NestedRecursion(print_s(s)));
            }
            if matches!(**b, SessType::Var(_)) {
                return Err(DecompTypeError::Unguarded(print_s(s)));
            }
            check_simple(b, true)
        }
        SessType::Out(_, b) | SessType::In(_, b) => check_simple(b, under_mu),
        SessType::Sel(arms) | SessType::Bra(arms) => {
            arms.values().try_for_each(|a| check_simple(a, under_mu))
        }
    }
}

/// `G(S)`: the list of minimal session types decomposing `S`.
pub fn gt_sess(s: &SessType) -> Res<Vec<SessType>> {
    check_simple(s, false)?;
    gt_sess_unchecked(s)
}

fn gt_sess_unchecked(s: &SessType) -> Res<Vec<SessType>> {
    match s {
        SessType::End => Ok(vec![SessType::End]),
        SessType::Var(t) => Ok(vec![SessType::Var(t.clone())]),
        SessType::Out(us, cont) => {
            let head = SessType::Out(
                us.iter().map(gt_val).collect::<Res<_>>()?,
                Box::new(SessType::End),
            );
            if cont.is_end() {
                Ok(vec![head])
            } else {
                let mut rest = gt_sess_unchecked(cont)?;
                rest.insert(0, head);
                Ok(rest)
            }
        }
        SessType::In(us, cont) => {
            let head = SessType::In(
                us.iter().map(gt_val).collect::<Res<_>>()?,
                Box::new(SessType::End),
            );
            if cont.is_end() {
                Ok(vec![head])
            } else {
                let mut rest = gt_sess_unchecked(cont)?;
                rest.insert(0, head);
                Ok(rest)
            }
        }
        SessType::Rec(t, body) => {
            if s.is_tail_recursive() {
                rt(body)
            } else if let SessType::Bra(arms) | SessType::Sel(arms) = &**body {
                // recursive labeled choice: decompose the body, keeping mu
                let inner = match &**body {
                    SessType::Bra(_) => SessType::Bra(choice_arms_bra(arms)?),
                    _ => SessType::Sel(choice_arms_sel(arms)?),
                };
                Ok(vec![SessType::Rec(t.clone(), Box::new(inner))])
            } else {
                let inner = gt_sess_unchecked(body)?;
                if inner.len() == 1 {
                    Ok(vec![SessType::Rec(
                        t.clone(),
                        Box::new(inner.into_iter().next().unwrap()),
                    )])
                } else {
                    Err(DecompTypeError::BadRecShape(print_s(s)))
                }
            }
        }
        SessType::Bra(arms) => Ok(vec![SessType::Bra(choice_arms_bra(arms)?)]),
        SessType::Sel(arms) => Ok(vec![SessType::Sel(choice_arms_sel(arms)?)]),
    }
}

/// `G(&{l_i: S_i}) = &{l_i: !(lin(G(S_i))->o);end}`
fn choice_arms_bra(arms: &BTreeMap<Label, SessType>) -> Res<BTreeMap<Label, SessType>> {
    arms.iter()
        .map(|(l, s)| {
            if s.is_end() {
                // a terminating branch has nothing to hand over
                return Ok((l.clone(), SessType::End));
            }
            let inner = gt_chan_list(&ChanType::Session(s.clone()))?;
            Ok((
                l.clone(),
                SessType::Out(vec![ValType::LinArrow(inner)], Box::new(SessType::End)),
            ))
        })
        .collect()
}

/// `G(+{l_i: S_i}) = +{l_i: ?(lin(G(dual S_i))->o);end}`
fn choice_arms_sel(arms: &BTreeMap<Label, SessType>) -> Res<BTreeMap<Label, SessType>> {
    arms.iter()
        .map(|(l, s)| {
            if s.is_end() {
                return Ok((l.clone(), SessType::End));
            }
            let d = crate::typing::dual_sess(s);
            let inner = gt_chan_list(&ChanType::Session(d))?;
            Ok((
                l.clone(),
                SessType::In(vec![ValType::LinArrow(inner)], Box::new(SessType::End)),
            ))
        })
        .collect()
}

/// `G(U)` on value types.
pub fn gt_val(u: &ValType) -> Res<ValType> {
    match u {
        ValType::LinArrow(cs) => Ok(ValType::LinArrow(gt_chans(cs)?)),
        ValType::ShArrow(cs) => Ok(ValType::ShArrow(gt_chans(cs)?)),
        ValType::Base(b) => Ok(ValType::Base(*b)),
        ValType::NpSugar(_) => Err(DecompTypeError::Sugar(crate::surface::print_val_type(u))),
    }
}

fn gt_chans(cs: &[ChanType]) -> Res<Vec<ChanType>> {
    let mut out = Vec::new();
    for c in cs {
        out.extend(gt_chan_list(c)?);
    }
    Ok(out)
}

/// `G(C)` on a channel type: a session slices into several channels, a
/// shared or base channel stays single.
pub fn gt_chan_list(c: &ChanType) -> Res<Vec<ChanType>> {
    match c {
        ChanType::Session(s) => Ok(gt_sess(s)?.into_iter().map(ChanType::Session).collect()),
        ChanType::Shared(u) => Ok(vec![ChanType::Shared(Box::new(gt_val(u)?))]),
        ChanType::Base(b) => Ok(vec![ChanType::Base(*b)]),
    }
}

/// `G(C)`, exposed under the spec's name.
pub fn gt_chan(c: &ChanType) -> Res<Vec<ChanType>> {
    gt_chan_list(c)
}

/// `R(S)`: turns each prefix of a tail-recursive body into a one-prefix
/// recursive minimal type; `R(t)` is the empty list.
pub fn rt(s: &SessType) -> Res<Vec<SessType>> {
    match s {
        SessType::Var(_) => Ok(vec![]),
        SessType::Out(us, cont) => {
            let head = SessType::Rec(
                "t".into(),
                Box::new(SessType::Out(
                    us.iter().map(gt_val).collect::<Res<_>>()?,
                    Box::new(SessType::Var("t".into())),
                )),
            );
            let mut rest = rt(cont)?;
            rest.insert(0, head);
            Ok(rest)
        }
        SessType::In(us, cont) => {
            let head = SessType::Rec(
                "t".into(),
                Box::new(SessType::In(
                    us.iter().map(gt_val).collect::<Res<_>>()?,
                    Box::new(SessType::Var("t".into())),
                )),
            );
            let mut rest = rt(cont)?;
            rest.insert(0, head);
            Ok(rest)
        }
        other => Err(DecompTypeError::NotRecursive(print_s(other))),
    }
}

/// `R*_s(S)`: skips leading prefixes of an unfolded recursive type until the
/// mu and then applies `R`.
pub fn rts(s: &SessType) -> Res<Vec<SessType>> {
    match s {
        SessType::Rec(_, body) => rt(body),
        SessType::Out(_, cont) | SessType::In(_, cont) => rts(cont),
        other => Err(DecompTypeError::NotRecursive(print_s(other))),
    }
}

/// `f(S)`: position of the top-most prefix of an unfolded simple recursive
/// type within its mu-body.
pub fn index_of(s: &SessType) -> Res<u32> {
    fn aux(s: &SessType, l: u32) -> Res<u32> {
        match s {
            SessType::Rec(_, body) => {
                let n = rt(body)?.len() as u32;
                Ok(n - l + 1)
            }
            SessType::Out(_, cont) | SessType::In(_, cont) => aux(cont, l + 1),
            other => Err(DecompTypeError::NotRecursive(print_s(other))),
        }
    }
    match s {
        SessType::Rec(t, body) => {
            let unfolded = body.subst_var(t, s);
            aux(&unfolded, 0)
        }
        other => aux(other, 0),
    }
}

/// Decomposition of typing environments: each indexed session entry
/// `u_i : S` becomes `(u_i, .., u_{i+|G(S)|-1}) : G(S)`; shared and linear
/// entries are decomposed pointwise.
pub fn gt_env(envs: &TypeEnvs) -> Res<TypeEnvs> {
    let mut out = TypeEnvs::new();
    for (c, s) in &envs.delta {
        let i = c.index().ok_or_else(|| DecompTypeError::Unindexed(c.to_string()))?;
        let slices = gt_sess(s)?;
        for (j, m) in slices.into_iter().enumerate() {
            out.delta.insert(c.with_index(i + j as u32), m);
        }
    }
    for (c, g) in &envs.gamma {
        let g2 = match g {
            GammaType::Chan(u) => GammaType::Chan(gt_val(u)?),
            GammaType::Arrow(cs) => GammaType::Arrow(gt_chans(cs)?),
            GammaType::Base(b) => GammaType::Base(*b),
        };
        out.gamma.insert(c.clone(), g2);
    }
    for (x, cs) in &envs.lambda {
        out.lambda.insert(x.clone(), gt_chans(cs)?);
    }
    Ok(out)
}

/// For `r : S` with a tail-recursive `S`, the tuple served by the recursive
/// propagator: `r@1 .. r@|G(S)|`.
pub fn rec_tuple(name: &Name, s: &SessType) -> Res<Vec<Name>> {
    let n = gt_sess(s)?.len() as u32;
    Ok((1..=n).map(|i| name.with_index(i)).collect())
}

/// Channel variant of `rec_tuple`.
pub fn rec_tuple_chan(c: &Chan, s: &SessType) -> Res<Vec<Chan>> {
    let n = gt_sess(s)?.len() as u32;
    Ok((1..=n).map(|i| c.with_index(i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_sess_type;

    fn p(s: &str) -> SessType {
        parse_sess_type(s).unwrap()
    }

    #[test]
    fn nonrecursive_slices() {
        let g = gt_sess(&p("?(int);?(int);!(bool);end")).unwrap();
        assert_eq!(g, vec![p("?(int);end"), p("?(int);end"), p("!(bool);end")]);
    }

    #[test]
    fn tail_recursive_slices() {
        let g = gt_sess(&p("mu t.?(int);?(bool);!(bool);t")).unwrap();
        assert_eq!(
            g,
            vec![p("mu t.?(int);t"), p("mu t.?(bool);t"), p("mu t.!(bool);t")]
        );
    }

    #[test]
    fn non_tail_recursive_single_slice() {
        let s = p("mu t.?(sh(?(str);!(str);end, t)->o);end");
        let g = gt_sess(&s).unwrap();
        assert_eq!(g, vec![p("mu t.?(sh(?(str);end, !(str);end, t)->o);end")]);
    }

    #[test]
    fn rts_skips_prefixes() {
        let s = p("mu t.?(int);?(bool);!(bool);t");
        let unfolded = p("?(bool);!(bool);mu t.?(int);?(bool);!(bool);t");
        assert_eq!(rts(&unfolded).unwrap(), gt_sess(&s).unwrap());
        assert_eq!(rt(&SessType::Var("t".into())).unwrap(), vec![]);
    }

    #[test]
    fn index_function() {
        let s = p("mu t.?(int);?(bool);!(bool);t");
        assert_eq!(index_of(&s).unwrap(), 1);
        let s2 = p("?(bool);!(bool);mu t.?(int);?(bool);!(bool);t");
        assert_eq!(index_of(&s2).unwrap(), 2);
        let s3 = p("!(bool);mu t.?(int);?(bool);!(bool);t");
        assert_eq!(index_of(&s3).unwrap(), 3);
    }

    #[test]
    fn env_decomposition() {
        use crate::syntax::{Chan, Name};
        let u1 = Chan::Name(Name::session("u").with_index(1));
        let envs = TypeEnvs::new().with_session(u1.clone(), p("?(int);!(bool);end"));
        let out = gt_env(&envs).unwrap();
        assert_eq!(out.delta[&u1], p("?(int);end"));
        assert_eq!(
            out.delta[&Chan::Name(Name::session("u").with_index(2))],
            p("!(bool);end")
        );
        assert!(gt_env(&TypeEnvs::new()).unwrap().delta.is_empty());
        let bad = TypeEnvs::new().with_session(Chan::Name(Name::session("u")), p("end"));
        assert!(gt_env(&bad).is_err());
    }

    #[test]
    fn nested_recursion_rejected() {
        let s = p("mu t.!(lin(mu r.?(int);r)->o);t");
        assert!(gt_sess(&s).is_err());
    }
}
