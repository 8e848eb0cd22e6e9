//! The breakdown of processes and values into trios, and the top-level
//! decomposition: a well-typed process becomes a parallel composition of
//! short processes chained through reserved propagator channels, typable
//! with minimal session types.

use std::collections::BTreeMap;

use crate::congruence::normalize;
use crate::decomp::types::{
    gt_chan_list, gt_sess, gt_val, index_of, rts, DecompTypeError,
};
use crate::subst::{Fresh, Subst};
use crate::syntax::*;
use crate::types::*;
use crate::typing::{dual_sess, GammaType, TypeEnvs};

#[derive(Debug, Clone, thiserror::Error)]
pub enum DecompError {
    #[error("process is not closed: free variable `{0}`")]
    OpenProcess(String),
    #[error("no type known for `{0}` at this point")]
    MissingType(String),
    #[error(transparent)]
    Types(#[from] DecompTypeError),
    #[error("subject `{0}`: expected {1} here, type is {2}")]
    Shape(String, String, String),
    #[error("a mu type may only occur as a whole channel type (offender: {0})")]
    MixedRecursion(String),
    #[error("arguments mixing tail-recursive names after plain ones cannot be reordered on a variable application")]
    ArgOrder,
    #[error("a terminating branch arm must be inaction")]
    NonNilEndArm(String),
    #[error("name-passing sugar must be desugared before decomposition")]
    Sugar,
    #[error("recursion must be encoded before decomposition")]
    Rec,
    #[error("unsupported payload in this position: {0}")]
    BadPayload(String),
}

type Res<T> = Result<T, DecompError>;

/// Typing context threaded through the breakdown: current session types per
/// indexed channel, shared entries, and value-variable types. All types are
/// source-level; the emitted term carries decomposed annotations.
#[derive(Debug, Clone, Default)]
pub struct Ctx {
    pub delta: BTreeMap<Chan, SessType>,
    pub gamma: BTreeMap<Chan, ValType>,
    pub vars: BTreeMap<Ident, ValType>,
}

impl Ctx {
    pub fn from_envs(envs: &TypeEnvs) -> Ctx {
        let mut ctx = Ctx::default();
        for (c, s) in &envs.delta {
            ctx.delta.insert(c.clone(), s.clone());
        }
        for (c, g) in &envs.gamma {
            match g {
                GammaType::Chan(u) => {
                    ctx.gamma.insert(c.clone(), u.clone());
                }
                GammaType::Arrow(cs) => {
                    if let Chan::Var(v) = c {
                        ctx.vars.insert(v.base.clone(), ValType::ShArrow(cs.clone()));
                    }
                }
                GammaType::Base(b) => {
                    if let Chan::Var(v) = c {
                        ctx.vars.insert(v.base.clone(), ValType::Base(*b));
                    }
                }
            }
        }
        for (x, cs) in &envs.lambda {
            ctx.vars.insert(x.clone(), ValType::LinArrow(cs.clone()));
        }
        ctx
    }
}

/// Threaded breakdown state: the fresh-name supply, the propagator payload
/// types recorded per index (for the restriction annotations), and the
/// propagator namespace for the current scope. The next index `k` and the
/// context variables travel as arguments.
pub struct BreakdownState {
    fresh: Fresh,
    props: BTreeMap<u32, Vec<ValType>>,
    prop_base: Ident,
}

impl BreakdownState {
    pub fn new() -> BreakdownState {
        BreakdownState { fresh: Fresh::new(), props: BTreeMap::new(), prop_base: "c".into() }
    }

    fn prop(&self, k: u32) -> Chan {
        Chan::Name(Name::propagator_in(&self.prop_base, Some(k)))
    }

    fn prop_out(&self, k: u32) -> Chan {
        Chan::Name(Name::propagator_in(&self.prop_base, Some(k)).dual())
    }
}

impl Default for BreakdownState {
    fn default() -> Self {
        Self::new()
    }
}

type St = BreakdownState;

/// The outcome of `decompose`: the minimal-session-types process together
/// with the decomposed environments it typechecks under.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub proc: Proc,
    pub envs: TypeEnvs,
    pub degree: u32,
}

/// Is the channel tail-recursive at its current (possibly unfolded) type?
fn is_tr(s: &SessType) -> bool {
    match s {
        SessType::Rec(_, _) => s.is_tail_recursive(),
        SessType::Out(_, c) | SessType::In(_, c) => is_tr(c),
        _ => false,
    }
}

/// Rejects session types where a mu occurs behind prefixes (such channels
/// cannot be sliced into independent single-use pieces).
fn validate_decomposable(s: &SessType) -> Res<()> {
    fn chain_mu_free(s: &SessType) -> bool {
        match s {
            SessType::End | SessType::Var(_) => true,
            SessType::Out(_, c) | SessType::In(_, c) => chain_mu_free(c),
            SessType::Sel(arms) | SessType::Bra(arms) => arms.values().all(chain_mu_free),
            SessType::Rec(_, _) => false,
        }
    }
    match s {
        SessType::Rec(_, _) => Ok(()),
        other => {
            if chain_mu_free(other) {
                Ok(())
            } else {
                Err(DecompError::MixedRecursion(crate::surface::print_sess_type(other)))
            }
        }
    }
}

/// Sorted value-variable context of a subterm.
fn ctx_of(p: &Proc) -> Vec<Ident> {
    free_value_vars(p).into_iter().collect()
}

fn ctx_of_value(v: &Value) -> Vec<Ident> {
    match v {
        Value::Var(x) => vec![x.clone()],
        Value::Lit(_) => vec![],
        Value::Expr(_, args) => {
            let mut out: Vec<Ident> = args.iter().flat_map(ctx_of_value).collect();
            out.sort();
            out.dedup();
            out
        }
        Value::Abs(a) => {
            // value variables free in the body and not bound by the params;
            // channel-position variables stay in place and are not threaded
            let mut out: Vec<Ident> = free_value_vars(&a.body)
                .into_iter()
                .filter(|x| !a.params.iter().any(|(p, _)| p.base == *x))
                .collect();
            out.sort();
            out.dedup();
            out
        }
    }
}

fn ctx_vals(ctx: &[Ident]) -> Vec<Value> {
    ctx.iter().map(|x| Value::Var(x.clone())).collect()
}

fn ctx_types(ctx: &[Ident], c: &Ctx) -> Res<Vec<ValType>> {
    ctx.iter()
        .map(|x| {
            let u = c
                .vars
                .get(x)
                .ok_or_else(|| DecompError::MissingType(x.clone()))?;
            gt_val(u).map_err(DecompError::from)
        })
        .collect()
}

/// `D(P)`: the decomposition of a closed, well-typed process.
pub fn decompose(p: &Proc, envs: &TypeEnvs) -> Res<Decomposition> {
    if p.contains_np_sugar() {
        return Err(DecompError::Sugar);
    }
    if p.contains_rec() {
        return Err(DecompError::Rec);
    }
    if let Some(x) = free_vars(p).into_iter().next() {
        return Err(DecompError::OpenProcess(x));
    }
    // index the free names at 1
    let sigma = Subst::init(p.fn_set());
    let mut fresh = Fresh::new();
    let p1 = sigma.apply_proc(p, &mut fresh);
    // shift the environments alongside
    let mut envs1 = TypeEnvs::new();
    for (chan, s) in &envs.delta {
        validate_decomposable(s)?;
        let c1 = if chan.index().is_none() { chan.with_index(1) } else { chan.clone() };
        envs1.delta.insert(c1, s.clone());
    }
    for (chan, g) in &envs.gamma {
        let c1 = if chan.index().is_none() { chan.with_index(1) } else { chan.clone() };
        envs1.gamma.insert(c1, g.clone());
    }
    envs1.lambda = envs.lambda.clone();

    let mut ctx = Ctx::from_envs(&envs1);
    let mut st = St { fresh, props: BTreeMap::new(), prop_base: "c".into() };
    let deg = degree(&p1);
    let body = breakdown(&mut st, &mut ctx, 1, &[], &p1)?;

    // recursive-name servers for free tail-recursive names
    let mut servers = Vec::new();
    let mut server_binders: Vec<(Name, ChanType)> = Vec::new();
    for (chan, s) in &envs1.delta {
        if s.is_tail_recursive() {
            if let Chan::Name(n) = chan {
                let len = gt_sess(s)?.len() as u32;
                let tuple: Vec<Name> = (1..=len).map(|i| n.with_index(i)).collect();
                let cr = Name::rec_propagator(&n.base, n.dual);
                servers.push(rec_provider_name(&cr, &tuple));
                server_binders.push((cr, rec_prop_type(s)?));
            }
        }
    }

    let first = Proc::output(st.prop_out(1), vec![], Proc::Nil);
    let mut inner = Proc::par_all(
        std::iter::once(first).chain(std::iter::once(body)).chain(servers).collect(),
    );
    for (cr, t) in server_binders.into_iter().rev() {
        inner = Proc::res(cr, t, inner);
    }
    // propagator restrictions, innermost last
    for k in (1..=deg).rev() {
        let payload = st.props.get(&k).cloned().unwrap_or_default();
        inner = Proc::res(
            Name::propagator_in(&st.prop_base, Some(k)),
            ChanType::Session(SessType::In(payload, Box::new(SessType::End))),
            inner,
        );
    }

    let denvs = crate::decomp::types::gt_env(&envs1)?;
    Ok(Decomposition { proc: inner, envs: denvs, degree: deg })
}

/// `$r` server: `$r?(x). x(r1,..,rn)`.
fn rec_provider_name(cr: &Name, tuple: &[Name]) -> Proc {
    Proc::input(
        Chan::Name(cr.clone()),
        vec!["x".into()],
        Proc::App {
            fun: Value::Var("x".into()),
            args: tuple.iter().map(|n| Arg::name(n.clone())).collect(),
        },
    )
}

fn rec_provider_chan(cr: &Name, tuple: &[Chan]) -> Proc {
    Proc::input(
        Chan::Name(cr.clone()),
        vec!["x".into()],
        Proc::App {
            fun: Value::Var("x".into()),
            args: tuple.iter().map(|c| Arg::Chan(c.clone())).collect(),
        },
    )
}

/// Type of the `$r` channel: `chan<lin(R*(S))->o>`.
fn rec_prop_type(s: &SessType) -> Res<ChanType> {
    let slices = gt_sess(s)?;
    Ok(ChanType::Shared(Box::new(ValType::LinArrow(
        slices.into_iter().map(ChanType::Session).collect(),
    ))))
}

/// `B^k_ctx(p)` — the breakdown function.
pub fn breakdown(st: &mut St, ctx: &mut Ctx, k: u32, ctxv: &[Ident], p: &Proc) -> Res<Proc> {
    st.props.insert(k, ctx_types(ctxv, ctx)?);
    match p {
        Proc::Nil => Ok(Proc::input(st.prop(k), vec![], Proc::Nil)),
        Proc::Par(l, r) => {
            let y = ctx_of(l);
            let w = ctx_of(r);
            let ldeg = degree(l);
            let trio = Proc::input(
                st.prop(k),
                ctxv.to_vec(),
                Proc::output(
                    st.prop_out(k + 1),
                    ctx_vals(&y),
                    Proc::output(st.prop_out(k + ldeg + 1), ctx_vals(&w), Proc::Nil),
                ),
            );
            let bl = breakdown(st, ctx, k + 1, &y, l)?;
            let br = breakdown(st, ctx, k + ldeg + 1, &w, r)?;
            Ok(Proc::par_all(vec![trio, bl, br]))
        }
        Proc::Output { subj, payload, cont } => {
            self_output(st, ctx, k, ctxv, subj, payload, cont)
        }
        Proc::Input { subj, binders, cont } => {
            self_input(st, ctx, k, ctxv, subj, binders, cont)
        }
        Proc::App { fun, args } => self_app(st, ctx, k, ctxv, fun, args),
        Proc::Res { name, annot, body } => self_res(st, ctx, k, ctxv, name, annot, body),
        Proc::Select { subj, label, cont } => self_select(st, ctx, k, ctxv, subj, label, cont),
        Proc::Branch { subj, arms } => self_branch(st, ctx, k, ctxv, subj, arms),
        Proc::OutputNp { .. } | Proc::InputNp { .. } => Err(DecompError::Sugar),
        Proc::Rec { .. } | Proc::RecVar(_) => Err(DecompError::Rec),
    }
}

fn subject_type(ctx: &Ctx, subj: &Chan) -> Res<SubjType> {
    if let Some(s) = ctx.delta.get(subj) {
        return Ok(SubjType::Session(s.clone()));
    }
    if let Some(u) = ctx.gamma.get(subj) {
        return Ok(SubjType::Shared(u.clone()));
    }
    Err(DecompError::MissingType(subj.to_string()))
}

enum SubjType {
    Session(SessType),
    Shared(ValType),
}

fn self_output(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    subj: &Chan,
    payload: &[Value],
    cont: &Proc,
) -> Res<Proc> {
    match subject_type(ctx, subj)? {
        SubjType::Session(s) if is_tr(&s) => {
            // tail-recursive subject: request the decomposed tuple from $u
            let f = index_of(&s)?;
            let slices = rts(&s)?;
            let zbase = st.fresh.base("z");
            let zs: Vec<Var> = (1..=slices.len() as u32)
                .map(|i| Var::indexed(&zbase, i))
                .collect();
            let w = ctx_of(cont);
            // advance the subject phase: unfold, step one prefix
            let advanced = advance(&s)?;
            ctx.delta.insert(subj.clone(), advanced);
            let vy: Vec<Ident> = payload.iter().flat_map(ctx_of_value).collect();
            let broken: Vec<Value> = payload
                .iter()
                .map(|v| breakdown_value_in(st, ctx, &vy, v))
                .collect::<Res<_>>()?;
            let cr = rec_prop_of(subj);
            let x = st.fresh.base("x");
            let inner = Proc::output(
                Chan::Var(zs[(f - 1) as usize].clone()),
                broken,
                Proc::par(
                    Proc::output(st.prop_out(k + 1), ctx_vals(&w), Proc::Nil),
                    Proc::input(
                        Chan::Name(cr.clone()),
                        vec![x.clone()],
                        Proc::App {
                            fun: Value::Var(x),
                            args: zs.iter().map(|z| Arg::var(z.clone())).collect(),
                        },
                    ),
                ),
            );
            let n_v = Value::abs(
                zs.iter()
                    .cloned()
                    .zip(slices.iter().cloned().map(ChanType::Session))
                    .collect(),
                ArrowKind::Lin,
                inner,
            );
            let trio = Proc::input(
                st.prop(k),
                ctxv.to_vec(),
                Proc::output(Chan::Name(cr), vec![n_v], Proc::Nil),
            );
            let bq = breakdown(st, ctx, k + 1, &w, cont)?;
            Ok(Proc::par(trio, bq))
        }
        sty => {
            // plain (linear or shared) subject
            let sigma = match &sty {
                SubjType::Session(s) => {
                    let su = s.unfold();
                    match su {
                        SessType::Out(_, s2) => {
                            let nxt = Subst::next_index(subj, true);
                            ctx.delta.insert(subj.with_index(subj.index().unwrap_or(0) + 1), *s2);
                            nxt
                        }
                        other => {
                            return Err(DecompError::Shape(
                                subj.to_string(),
                                "an output type".into(),
                                crate::surface::print_sess_type(&other),
                            ))
                        }
                    }
                }
                SubjType::Shared(_) => Subst::new(),
            };
            let cont1 = sigma.apply_proc(cont, &mut st.fresh);
            let w = ctx_of(&cont1);
            let vy: Vec<Ident> = payload.iter().flat_map(ctx_of_value).collect();
            let broken: Vec<Value> = payload
                .iter()
                .map(|v| {
                    let v1 = sigma.apply_value(v, &mut st.fresh);
                    breakdown_value_in(st, ctx, &vy, &v1)
                })
                .collect::<Res<_>>()?;
            let trio = Proc::input(
                st.prop(k),
                ctxv.to_vec(),
                Proc::output(
                    subj.clone(),
                    broken,
                    Proc::output(st.prop_out(k + 1), ctx_vals(&w), Proc::Nil),
                ),
            );
            let bq = breakdown(st, ctx, k + 1, &w, &cont1)?;
            Ok(Proc::par(trio, bq))
        }
    }
}

fn self_input(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    subj: &Chan,
    binders: &[Ident],
    cont: &Proc,
) -> Res<Proc> {
    match subject_type(ctx, subj)? {
        SubjType::Session(s) if is_tr(&s) => {
            let f = index_of(&s)?;
            let slices = rts(&s)?;
            let zbase = st.fresh.base("z");
            let zs: Vec<Var> = (1..=slices.len() as u32)
                .map(|i| Var::indexed(&zbase, i))
                .collect();
            // bind received variables in the context
            let us = payload_types(&s)?;
            for (b, u) in binders.iter().zip(&us) {
                ctx.vars.insert(b.clone(), u.clone());
            }
            let advanced = advance(&s)?;
            ctx.delta.insert(subj.clone(), advanced);
            let w = ctx_of(cont);
            let cr = rec_prop_of(subj);
            let x = st.fresh.base("x");
            let inner = Proc::input(
                Chan::Var(zs[(f - 1) as usize].clone()),
                binders.to_vec(),
                Proc::par(
                    Proc::output(st.prop_out(k + 1), ctx_vals(&w), Proc::Nil),
                    Proc::input(
                        Chan::Name(cr.clone()),
                        vec![x.clone()],
                        Proc::App {
                            fun: Value::Var(x),
                            args: zs.iter().map(|z| Arg::var(z.clone())).collect(),
                        },
                    ),
                ),
            );
            let n_y = Value::abs(
                zs.iter()
                    .cloned()
                    .zip(slices.iter().cloned().map(ChanType::Session))
                    .collect(),
                ArrowKind::Lin,
                inner,
            );
            let trio = Proc::input(
                st.prop(k),
                ctxv.to_vec(),
                Proc::output(Chan::Name(cr), vec![n_y], Proc::Nil),
            );
            let bq = breakdown(st, ctx, k + 1, &w, cont)?;
            Ok(Proc::par(trio, bq))
        }
        sty => {
            let (us, sigma) = match &sty {
                SubjType::Session(s) => {
                    let su = s.unfold();
                    match su {
                        SessType::In(us, s2) => {
                            let nxt = Subst::next_index(subj, true);
                            ctx.delta.insert(subj.with_index(subj.index().unwrap_or(0) + 1), *s2);
                            (us, nxt)
                        }
                        other => {
                            return Err(DecompError::Shape(
                                subj.to_string(),
                                "an input type".into(),
                                crate::surface::print_sess_type(&other),
                            ))
                        }
                    }
                }
                SubjType::Shared(u) => (vec![u.clone()], Subst::new()),
            };
            for (b, u) in binders.iter().zip(&us) {
                ctx.vars.insert(b.clone(), u.clone());
            }
            let cont1 = sigma.apply_proc(cont, &mut st.fresh);
            let w = ctx_of(&cont1);
            let trio = Proc::input(
                st.prop(k),
                ctxv.to_vec(),
                Proc::input(
                    subj.clone(),
                    binders.to_vec(),
                    Proc::output(st.prop_out(k + 1), ctx_vals(&w), Proc::Nil),
                ),
            );
            let bq = breakdown(st, ctx, k + 1, &w, &cont1)?;
            Ok(Proc::par(trio, bq))
        }
    }
}

/// Payload types at the current prefix of a (possibly recursive) type.
fn payload_types(s: &SessType) -> Res<Vec<ValType>> {
    match s.unfold() {
        SessType::In(us, _) | SessType::Out(us, _) => Ok(us),
        other => Err(DecompError::Shape(
            "payload".into(),
            "a communication type".into(),
            crate::surface::print_sess_type(&other),
        )),
    }
}

/// Steps a tail-recursive type one prefix forward (unfolding first).
fn advance(s: &SessType) -> Res<SessType> {
    match s.unfold() {
        SessType::In(_, c) | SessType::Out(_, c) => Ok(*c),
        other => Err(DecompError::Shape(
            "subject".into(),
            "a communication type".into(),
            crate::surface::print_sess_type(&other),
        )),
    }
}

fn rec_prop_of(subj: &Chan) -> Name {
    match subj {
        Chan::Name(n) => Name::rec_propagator(&n.base, n.dual),
        Chan::Var(v) => Name::rec_propagator(&v.base, false),
    }
}

fn self_app(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    fun: &Value,
    args: &[Arg],
) -> Res<Proc> {
    // classify arguments
    #[derive(PartialEq)]
    enum Kind {
        Tr,
        Plain,
    }
    let mut kinds = Vec::new();
    for a in args {
        let kind = match a {
            Arg::Chan(c) => match subject_type(ctx, c)? {
                SubjType::Session(s) if is_tr(&s) => Kind::Tr,
                _ => Kind::Plain,
            },
            Arg::Val(_) => Kind::Plain,
        };
        kinds.push(kind);
    }
    // canonical order: tail-recursive arguments first
    let in_order = {
        let mut seen_plain = false;
        let mut ok = true;
        for kd in &kinds {
            match kd {
                Kind::Plain => seen_plain = true,
                Kind::Tr if seen_plain => ok = false,
                Kind::Tr => {}
            }
        }
        ok
    };
    let (fun, args): (Value, Vec<Arg>) = if in_order {
        (fun.clone(), args.to_vec())
    } else {
        // reorder both arguments and, for a literal abstraction, its params
        let mut perm: Vec<usize> = (0..args.len()).collect();
        perm.sort_by_key(|&i| match kinds[i] {
            Kind::Tr => 0,
            Kind::Plain => 1,
        });
        match fun {
            Value::Abs(a) => {
                let params = perm.iter().map(|&i| a.params[i].clone()).collect();
                let args2 = perm.iter().map(|&i| args[i].clone()).collect();
                (
                    Value::Abs(Abs { params, arrow: a.arrow, body: a.body.clone() }),
                    args2,
                )
            }
            _ => return Err(DecompError::ArgOrder),
        }
    };
    let mut tr_args: Vec<(Chan, SessType)> = Vec::new();
    let mut plain_args: Vec<Arg> = Vec::new();
    for a in &args {
        match a {
            Arg::Chan(c) => match subject_type(ctx, c)? {
                SubjType::Session(s) if is_tr(&s) => tr_args.push((c.clone(), s)),
                SubjType::Session(s) => {
                    let i = c.index().unwrap_or(1);
                    let n = gt_sess(&s)?.len() as u32;
                    for j in 0..n {
                        plain_args.push(Arg::Chan(c.with_index(i + j)));
                    }
                }
                SubjType::Shared(_) => plain_args.push(a.clone()),
            },
            Arg::Val(_) => plain_args.push(a.clone()),
        }
    }
    let vx: Vec<Ident> = ctxv.to_vec();
    let broken_fun = breakdown_value_in(st, ctx, &vx, &fun)?;
    // nested requests to each $r, innermost applies the value
    let mut z_tuples: Vec<Vec<Var>> = Vec::new();
    let mut z_annots: Vec<Vec<SessType>> = Vec::new();
    for (_, s) in &tr_args {
        let slices = rts(s)?;
        let zbase = st.fresh.base("z");
        z_tuples.push((1..=slices.len() as u32).map(|i| Var::indexed(&zbase, i)).collect());
        z_annots.push(slices);
    }
    let mut all_args: Vec<Arg> = Vec::new();
    for zt in &z_tuples {
        all_args.extend(zt.iter().map(|z| Arg::var(z.clone())));
    }
    all_args.extend(plain_args);
    let mut body = Proc::App { fun: broken_fun, args: all_args };
    for j in (0..tr_args.len()).rev() {
        let (c, _) = &tr_args[j];
        let abs = Value::abs(
            z_tuples[j]
                .iter()
                .cloned()
                .zip(z_annots[j].iter().cloned().map(ChanType::Session))
                .collect(),
            ArrowKind::Lin,
            body,
        );
        body = Proc::output(Chan::Name(rec_prop_of(c)), vec![abs], Proc::Nil);
    }
    Ok(Proc::input(st.prop(k), ctxv.to_vec(), body))
}

fn self_res(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    name: &Name,
    annot: &ChanType,
    body: &Proc,
) -> Res<Proc> {
    match annot {
        ChanType::Session(s) => {
            validate_decomposable(s)?;
            let slices = gt_sess(s)?;
            let pos1 = Chan::Name(name.with_index(1));
            let neg1 = Chan::Name(name.dual().with_index(1));
            let sigma = Subst::new()
                .chan(Chan::Name(name.clone()), pos1.clone())
                .chan(Chan::Name(name.dual()), neg1.clone());
            let body1 = sigma.apply_proc(body, &mut st.fresh);
            ctx.delta.insert(pos1, s.clone());
            ctx.delta.insert(neg1, dual_sess(s));
            if s.is_tail_recursive() {
                let tuple_pos: Vec<Name> =
                    (1..=slices.len() as u32).map(|i| name.with_index(i)).collect();
                let tuple_neg: Vec<Name> =
                    (1..=slices.len() as u32).map(|i| name.dual().with_index(i)).collect();
                let cr_pos = Name::rec_propagator(&name.base, false);
                let cr_neg = Name::rec_propagator(&name.base, true);
                let inner = breakdown(st, ctx, k, ctxv, &body1)?;
                let composed = Proc::par_all(vec![
                    rec_provider_name(&cr_pos, &tuple_pos),
                    rec_provider_name(&cr_neg, &tuple_neg),
                    inner,
                ]);
                let with_props = Proc::res(
                    cr_pos,
                    rec_prop_type(s)?,
                    Proc::res(cr_neg, rec_prop_type(s)?, composed),
                );
                let mut out = with_props;
                for (i, m) in slices.iter().enumerate().rev() {
                    out = Proc::res(
                        name.with_index(i as u32 + 1),
                        ChanType::Session(m.clone()),
                        out,
                    );
                }
                Ok(out)
            } else {
                let inner = breakdown(st, ctx, k, ctxv, &body1)?;
                let mut out = inner;
                for (i, m) in slices.iter().enumerate().rev() {
                    out = Proc::res(
                        name.with_index(i as u32 + 1),
                        ChanType::Session(m.clone()),
                        out,
                    );
                }
                Ok(out)
            }
        }
        ChanType::Shared(u) => {
            let pos1 = Chan::Name(name.with_index(1));
            let sigma = Subst::new().chan(Chan::Name(name.clone()), pos1.clone());
            let body1 = sigma.apply_proc(body, &mut st.fresh);
            ctx.gamma.insert(pos1, (**u).clone());
            let inner = breakdown(st, ctx, k, ctxv, &body1)?;
            Ok(Proc::res(
                name.with_index(1),
                ChanType::Shared(Box::new(gt_val(u)?)),
                inner,
            ))
        }
        ChanType::Base(_) => Err(DecompError::Shape(
            name.to_string(),
            "a channel type".into(),
            "base".into(),
        )),
    }
}

fn self_select(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    subj: &Chan,
    label: &str,
    cont: &Proc,
) -> Res<Proc> {
    let s = match subject_type(ctx, subj)? {
        SubjType::Session(s) => s,
        SubjType::Shared(_) => {
            return Err(DecompError::Shape(
                subj.to_string(),
                "a selection type".into(),
                "shared".into(),
            ))
        }
    };
    let arms = match s.unfold() {
        SessType::Sel(arms) => arms,
        other => {
            return Err(DecompError::Shape(
                subj.to_string(),
                "a selection type".into(),
                crate::surface::print_sess_type(&other),
            ))
        }
    };
    let t_l = arms
        .get(label)
        .ok_or_else(|| DecompError::Shape(subj.to_string(), format!("label {label}"), "absent".into()))?
        .clone();
    if t_l.is_end() {
        // terminating selection: a plain trio, no abstraction exchange
        let w = ctx_of(cont);
        let trio = Proc::input(
            st.prop(k),
            ctxv.to_vec(),
            Proc::select(
                subj.clone(),
                label,
                Proc::output(st.prop_out(k + 1), ctx_vals(&w), Proc::Nil),
            ),
        );
        ctx.delta.insert(subj.clone(), SessType::End);
        let bq = breakdown(st, ctx, k + 1, &w, cont)?;
        return Ok(Proc::par(trio, bq));
    }
    let server_side = dual_sess(&t_l);
    let server_slices = gt_sess(&server_side)?;
    let my_slices = gt_sess(&t_l)?;
    let i = subj.index().unwrap_or(1);
    let m = server_slices.len() as u32;
    // fresh continuation names subj@(i+1).. ; the abstraction receives the
    // opposite endpoints
    let my_names: Vec<Chan> = (1..=m).map(|j| subj.with_index(i + j)).collect();
    let opp_names: Vec<Chan> = my_names
        .iter()
        .map(|c| c.dual().expect("selection subjects are names or dualizable"))
        .collect();
    let sigma = Subst::next_index(subj, true);
    let cont1 = sigma.apply_proc(cont, &mut st.fresh);
    ctx.delta.insert(subj.with_index(i + 1), t_l.clone());
    let w = ctx_of(&cont1);
    let z = st.fresh.base("z");
    let trio = Proc::input(
        st.prop(k),
        ctxv.to_vec(),
        Proc::select(
            subj.clone(),
            label,
            Proc::input(
                subj.clone(),
                vec![z.clone()],
                Proc::output(
                    st.prop_out(k + 1),
                    ctx_vals(&w),
                    Proc::App {
                        fun: Value::Var(z),
                        args: opp_names.iter().map(|c| Arg::Chan(c.clone())).collect(),
                    },
                ),
            ),
        ),
    );
    let bq = breakdown(st, ctx, k + 1, &w, &cont1)?;
    let mut out = Proc::par(trio, bq);
    // the positive endpoint of each fresh name carries the subject-side type
    // when the subject is positive, the server-side type otherwise
    let positive_types: Vec<SessType> = if subject_is_dual(subj) {
        server_slices.clone()
    } else {
        my_slices.clone()
    };
    for (j, t) in positive_types.iter().enumerate().rev() {
        let binder = match &my_names[j] {
            Chan::Name(n) => Name { dual: false, ..n.clone() },
            Chan::Var(_) => {
                return Err(DecompError::Shape(
                    subj.to_string(),
                    "a name subject for selection".into(),
                    "variable".into(),
                ))
            }
        };
        out = Proc::res(binder, ChanType::Session(t.clone()), out);
    }
    Ok(out)
}

fn subject_is_dual(subj: &Chan) -> bool {
    match subj {
        Chan::Name(n) => n.dual,
        Chan::Var(_) => false,
    }
}

fn self_branch(
    st: &mut St,
    ctx: &mut Ctx,
    k: u32,
    ctxv: &[Ident],
    subj: &Chan,
    arms: &BTreeMap<Label, Proc>,
) -> Res<Proc> {
    let s = match subject_type(ctx, subj)? {
        SubjType::Session(s) => s,
        SubjType::Shared(_) => {
            return Err(DecompError::Shape(
                subj.to_string(),
                "a branching type".into(),
                "shared".into(),
            ))
        }
    };
    let tarms = match s.unfold() {
        SessType::Bra(t) => t,
        other => {
            return Err(DecompError::Shape(
                subj.to_string(),
                "a branching type".into(),
                crate::surface::print_sess_type(&other),
            ))
        }
    };
    let mut out_arms = BTreeMap::new();
    for (l, p_l) in arms {
        let t_l = tarms.get(l).ok_or_else(|| {
            DecompError::Shape(subj.to_string(), format!("label {l}"), "absent".into())
        })?;
        if t_l.is_end() {
            if !matches!(normalize(p_l), Proc::Nil) {
                return Err(DecompError::NonNilEndArm(l.clone()));
            }
            out_arms.insert(l.clone(), Proc::Nil);
            continue;
        }
        // pack the arm into an abstraction over the continuation names
        let y = Var::plain(&st.fresh.base("y"));
        let sigma = Subst::new().chan(subj.clone(), Chan::Var(y.clone()));
        let body = sigma.apply_proc(p_l, &mut st.fresh);
        let xs = ctx_of(&body);
        let lam = Value::abs(
            vec![(y, ChanType::Session(t_l.clone()))],
            ArrowKind::Lin,
            body,
        );
        let mut inner_ctx = ctx.clone();
        let packed = breakdown_value_in_ctx(st, &mut inner_ctx, &xs, &lam)?;
        out_arms.insert(
            l.clone(),
            Proc::output(subj.clone(), vec![packed], Proc::Nil),
        );
    }
    ctx.delta.insert(subj.clone(), SessType::End);
    Ok(Proc::input(
        st.prop(k),
        ctxv.to_vec(),
        Proc::Branch { subj: subj.clone(), arms: out_arms },
    ))
}

/// `V_ctx(V)` — value breakdown (variables, literals, expressions are left
/// alone; abstractions are rebuilt over decomposed parameter tuples).
fn breakdown_value_in(st: &mut St, ctx: &Ctx, ctxv: &[Ident], v: &Value) -> Res<Value> {
    let mut inner = ctx.clone();
    breakdown_value_in_ctx(st, &mut inner, ctxv, v)
}

fn breakdown_value_in_ctx(st: &mut St, ctx: &mut Ctx, ctxv: &[Ident], v: &Value) -> Res<Value> {
    match v {
        Value::Var(_) | Value::Lit(_) | Value::Expr(_, _) => Ok(v.clone()),
        Value::Abs(a) => {
            let mut new_params: Vec<(Var, ChanType)> = Vec::new();
            let mut body_subst = Subst::new();
            let mut servers: Vec<Proc> = Vec::new();
            let mut server_binders: Vec<(Name, ChanType)> = Vec::new();
            let mut body_ctx = ctx.clone();
            for (p, c) in &a.params {
                match c {
                    ChanType::Session(s) if s.is_tail_recursive() => {
                        let slices = gt_sess(s)?;
                        let tuple: Vec<Chan> = (1..=slices.len() as u32)
                            .map(|i| Chan::Var(p.with_index(i)))
                            .collect();
                        for (t, m) in tuple.iter().zip(&slices) {
                            // serve the minimal slices; the body refers to the
                            // unindexed parameter through $p
                            new_params.push((
                                match t {
                                    Chan::Var(v2) => v2.clone(),
                                    Chan::Name(_) => unreachable!(),
                                },
                                ChanType::Session(m.clone()),
                            ));
                        }
                        let cr = Name::rec_propagator(&p.base, false);
                        servers.push(rec_provider_chan(&cr, &tuple));
                        server_binders.push((cr, rec_prop_type(s)?));
                        body_ctx.delta.insert(Chan::Var(p.clone()), s.clone());
                    }
                    ChanType::Session(s) => {
                        validate_decomposable(s)?;
                        let slices = gt_sess(s)?;
                        for (i, m) in slices.iter().enumerate() {
                            new_params.push((
                                p.with_index(i as u32 + 1),
                                ChanType::Session(m.clone()),
                            ));
                        }
                        body_subst = body_subst
                            .chan(Chan::Var(p.clone()), Chan::Var(p.with_index(1)));
                        body_ctx.delta.insert(Chan::Var(p.with_index(1)), s.clone());
                    }
                    ChanType::Shared(u) => {
                        new_params.push((p.with_index(1), ChanType::Shared(Box::new(gt_val(u)?))));
                        body_subst = body_subst
                            .chan(Chan::Var(p.clone()), Chan::Var(p.with_index(1)));
                        body_ctx.gamma.insert(Chan::Var(p.with_index(1)), (**u).clone());
                    }
                    ChanType::Base(b) => {
                        new_params.push((p.clone(), ChanType::Base(*b)));
                        body_ctx.vars.insert(p.base.clone(), ValType::Base(*b));
                    }
                }
            }
            let body = body_subst.apply_proc(&a.body, &mut st.fresh);
            let deg = degree(&body);
            // a private propagator namespace for the packed body
            let ns = st.fresh.base("c");
            let mut inner_st = St {
                fresh: std::mem::take(&mut st.fresh),
                props: BTreeMap::new(),
                prop_base: ns.clone(),
            };
            let broken = breakdown(&mut inner_st, &mut body_ctx, 1, ctxv, &body);
            st.fresh = std::mem::take(&mut inner_st.fresh);
            let broken = broken?;
            let first = Proc::output(inner_st.prop_out(1), ctx_vals(ctxv), Proc::Nil);
            let mut composed =
                Proc::par_all(servers.into_iter().chain([first, broken]).collect());
            for (cr, t) in server_binders.into_iter().rev() {
                composed = Proc::res(cr, t, composed);
            }
            for k2 in (1..=deg).rev() {
                let payload = inner_st.props.get(&k2).cloned().unwrap_or_default();
                composed = Proc::res(
                    Name::propagator_in(&ns, Some(k2)),
                    ChanType::Session(SessType::In(payload, Box::new(SessType::End))),
                    composed,
                );
            }
            Ok(Value::Abs(Abs {
                params: new_params,
                arrow: a.arrow,
                body: Box::new(composed),
            }))
        }
    }
}

/// Public entry for the value breakdown.
pub fn breakdown_value(ctx: &Ctx, ctxv: &[Ident], v: &Value) -> Res<Value> {
    let mut st = St { fresh: Fresh::new(), props: BTreeMap::new(), prop_base: "c".into() };
    breakdown_value_in(&mut st, ctx, ctxv, v)
}
