//! Session types, value types, and channel types.
//!
//! Session types prescribe the order and payloads of communications on a
//! channel; value types classify the abstractions (and base values) that can
//! be exchanged; channel types classify names.

use std::collections::BTreeMap;
use std::fmt;

pub type Label = String;
pub type TypeVar = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Int,
    Bool,
    Str,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Int => write!(f, "int"),
            BaseType::Bool => write!(f, "bool"),
            BaseType::Str => write!(f, "str"),
        }
    }
}

/// Binary session types, with labeled choice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessType {
    End,
    /// `!(U1,..,Un);S` — send values, continue as S.
    Out(Vec<ValType>, Box<SessType>),
    /// `?(U1,..,Un);S` — receive values, continue as S.
    In(Vec<ValType>, Box<SessType>),
    /// `mu t.S`
    Rec(TypeVar, Box<SessType>),
    /// `t`
    Var(TypeVar),
    /// `+{l:S,..}` — internal choice.
    Sel(BTreeMap<Label, SessType>),
    /// `&{l:S,..}` — external choice.
    Bra(BTreeMap<Label, SessType>),
}

impl SessType {
    pub fn out1(u: ValType, s: SessType) -> SessType {
        SessType::Out(vec![u], Box::new(s))
    }

    pub fn in1(u: ValType, s: SessType) -> SessType {
        SessType::In(vec![u], Box::new(s))
    }

    pub fn rec(t: &str, s: SessType) -> SessType {
        SessType::Rec(t.into(), Box::new(s))
    }

    pub fn is_end(&self) -> bool {
        matches!(self, SessType::End)
    }

    /// Substitutes `body` for free occurrences of the type variable `var`.
    pub fn subst_var(&self, var: &str, body: &SessType) -> SessType {
        match self {
            SessType::End => SessType::End,
            SessType::Var(t) if t == var => body.clone(),
            SessType::Var(t) => SessType::Var(t.clone()),
            SessType::Rec(t, _) if t == var => self.clone(),
            SessType::Rec(t, s) => SessType::Rec(t.clone(), Box::new(s.subst_var(var, body))),
            SessType::Out(us, s) => SessType::Out(
                us.iter().map(|u| u.subst_var(var, body)).collect(),
                Box::new(s.subst_var(var, body)),
            ),
            SessType::In(us, s) => SessType::In(
                us.iter().map(|u| u.subst_var(var, body)).collect(),
                Box::new(s.subst_var(var, body)),
            ),
            SessType::Sel(arms) => SessType::Sel(
                arms.iter()
                    .map(|(l, s)| (l.clone(), s.subst_var(var, body)))
                    .collect(),
            ),
            SessType::Bra(arms) => SessType::Bra(
                arms.iter()
                    .map(|(l, s)| (l.clone(), s.subst_var(var, body)))
                    .collect(),
            ),
        }
    }

    /// One-level unfolding of a recursive type; other types are returned as-is.
    pub fn unfold(&self) -> SessType {
        match self {
            SessType::Rec(t, s) => s.subst_var(t, self),
            other => other.clone(),
        }
    }

    /// True for `mu t.S` whose body ends in `t` and contains only input/output
    /// prefixes (no choice, no nested recursion).
    pub fn is_tail_recursive(&self) -> bool {
        fn tail(body: &SessType, var: &str) -> bool {
            match body {
                SessType::Var(t) => t == var,
                SessType::Out(_, s) | SessType::In(_, s) => tail(s, var),
                _ => false,
            }
        }
        match self {
            SessType::Rec(t, s) => !matches!(**s, SessType::Var(_)) && tail(s, t),
            _ => false,
        }
    }

    /// Free type variables.
    pub fn free_tvars(&self) -> Vec<TypeVar> {
        fn go(s: &SessType, bound: &mut Vec<TypeVar>, out: &mut Vec<TypeVar>) {
            match s {
                SessType::End => {}
                SessType::Var(t) => {
                    if !bound.contains(t) && !out.contains(t) {
                        out.push(t.clone());
                    }
                }
                SessType::Rec(t, b) => {
                    bound.push(t.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                SessType::Out(us, b) | SessType::In(us, b) => {
                    for u in us {
                        u.visit_sessions(&mut |ss| go(ss, bound, out));
                    }
                    go(b, bound, out);
                }
                SessType::Sel(arms) | SessType::Bra(arms) => {
                    for s in arms.values() {
                        go(s, bound, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_tvars().is_empty()
    }
}

/// Value types: linear/shared abstraction types and base types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValType {
    /// `lin(C1,..,Cn)->o`
    LinArrow(Vec<ChanType>),
    /// `sh(C1,..,Cn)->o`
    ShArrow(Vec<ChanType>),
    Base(BaseType),
    /// Name-passing sugar `<<C1,..,Cn>>`; removed by `desugar_np_type`.
    NpSugar(Vec<ChanType>),
}

impl ValType {
    pub fn subst_var(&self, var: &str, body: &SessType) -> ValType {
        match self {
            ValType::LinArrow(cs) => {
                ValType::LinArrow(cs.iter().map(|c| c.subst_var(var, body)).collect())
            }
            ValType::ShArrow(cs) => {
                ValType::ShArrow(cs.iter().map(|c| c.subst_var(var, body)).collect())
            }
            ValType::Base(b) => ValType::Base(*b),
            ValType::NpSugar(cs) => {
                ValType::NpSugar(cs.iter().map(|c| c.subst_var(var, body)).collect())
            }
        }
    }

    fn visit_sessions(&self, f: &mut impl FnMut(&SessType)) {
        match self {
            ValType::LinArrow(cs) | ValType::ShArrow(cs) | ValType::NpSugar(cs) => {
                for c in cs {
                    c.visit_sessions(f);
                }
            }
            ValType::Base(_) => {}
        }
    }
}

/// Channel types: session types, shared channel types, and (as a degenerate
/// case used by the examples) base types in argument position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChanType {
    Session(SessType),
    /// `chan<U>` — shared channel carrying values of type U.
    Shared(Box<ValType>),
    Base(BaseType),
}

impl ChanType {
    pub fn session(&self) -> Option<&SessType> {
        match self {
            ChanType::Session(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_tail_recursive(&self) -> bool {
        matches!(self, ChanType::Session(s) if s.is_tail_recursive())
    }

    pub fn subst_var(&self, var: &str, body: &SessType) -> ChanType {
        match self {
            ChanType::Session(s) => ChanType::Session(s.subst_var(var, body)),
            ChanType::Shared(u) => ChanType::Shared(Box::new(u.subst_var(var, body))),
            ChanType::Base(b) => ChanType::Base(*b),
        }
    }

    fn visit_sessions(&self, f: &mut impl FnMut(&SessType)) {
        match self {
            ChanType::Session(s) => f(s),
            ChanType::Shared(u) => u.visit_sessions(f),
            ChanType::Base(_) => {}
        }
    }
}

impl From<SessType> for ChanType {
    fn from(s: SessType) -> Self {
        ChanType::Session(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_recursive_detection() {
        let s = SessType::rec(
            "t",
            SessType::in1(
                ValType::Base(BaseType::Int),
                SessType::out1(ValType::Base(BaseType::Int), SessType::Var("t".into())),
            ),
        );
        assert!(s.is_tail_recursive());
        // mu t.t is not contractive, not tail recursive either.
        assert!(!SessType::rec("t", SessType::Var("t".into())).is_tail_recursive());
        // choice inside breaks tail recursiveness
        let mut arms = BTreeMap::new();
        arms.insert("l".to_string(), SessType::Var("t".into()));
        assert!(!SessType::rec("t", SessType::Bra(arms)).is_tail_recursive());
    }

    #[test]
    fn unfold_refreshes_body() {
        let s = SessType::rec(
            "t",
            SessType::in1(ValType::Base(BaseType::Int), SessType::Var("t".into())),
        );
        let u = s.unfold();
        match u {
            SessType::In(_, cont) => assert_eq!(*cont, s),
            _ => panic!("unexpected unfolding"),
        }
    }
}
