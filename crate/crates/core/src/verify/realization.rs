use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{Counterexample, ProbeSpec, Report};
use crate::algebra::{
    abstract_bracket, canonicalize, cocycle_components, j_on_j, l_on_ideal, l_on_j, relation_instance, AbstractElement,
    ExtensionParams, IdealKey, COCYCLE_NAMES,
};
use crate::fock::{apply_mode, loop_poly_apply, Caps, EnergyWindow, FockState, LoopPoly, Mode};
use crate::linalg::EchelonSystem;
use crate::realize::{
    build_hamiltonian, build_j, build_l, EvalCache, Idx, RealizeError, RealizedOperator, Realizer, TensorMonomial,
    TensorState,
};
use crate::scalar::GaussianRational as Gq;
use crate::spacetime::{probe_functions, spatial_exponents, Monomial, SpacetimeFunction, VectorField};

const CACHE_LIMIT: usize = 400_000;

fn state_of(t: &TensorMonomial) -> TensorState {
    TensorState::basis(t.clone())
}

fn mismatch(probe: String, t: &TensorMonomial, lhs: &TensorState, rhs: &TensorState) -> Counterexample {
    Counterexample {
        probe,
        state: t.to_string(),
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        difference: lhs.sub(rhs).to_string(),
    }
}

fn cap_failure(probe: String, t: &TensorMonomial, e: &RealizeError) -> Counterexample {
    Counterexample { probe, state: t.to_string(), lhs: format!("error: {e}"), rhs: String::new(), difference: String::new() }
}

/// Runs `f` with the probe window's caps and, on a cap overflow, once more with
/// doubled caps.
fn with_retry<T>(spec: &ProbeSpec, r: &Realizer, mut f: impl FnMut(&Realizer) -> Result<T, RealizeError>) -> Result<T, RealizeError> {
    match f(r) {
        Err(RealizeError::Cap(_)) => {
            let caps = Caps { max_degree: spec.caps.max_degree * 2, max_width: spec.caps.max_width * 2 };
            let bigger = Realizer::new(spec.dim, spec.module()?, caps)?;
            f(&bigger)
        }
        other => other,
    }
}

/// `A(B v) - B(A v)`.
fn commutator(r: &Realizer, cache: &mut EvalCache, a: &RealizedOperator, b: &RealizedOperator, v: &TensorState) -> Result<TensorState, RealizeError> {
    let bv = r.op_apply_cached(cache, b, v)?;
    let av = r.op_apply_cached(cache, a, v)?;
    Ok(r.op_apply_cached(cache, a, &bv)?.sub(&r.op_apply_cached(cache, b, &av)?))
}

/// One commutator identity `[A, B] = C` to be checked on every basis state.
struct Identity {
    probe: String,
    a: RealizedOperator,
    b: RealizedOperator,
    rhs: RealizedOperator,
}

/// Checks all identities on all states; the reported counterexample has
/// the smallest identity ordinal, then the smallest state ordinal.
fn check_identities(report: &mut Report, spec: &ProbeSpec, r: &Realizer, states: &[TensorMonomial], ids: &[Identity]) {
    let results: Vec<(u64, Option<(usize, Counterexample)>)> = states
        .par_iter()
        .map(|t| {
            let v = state_of(t);
            let mut cache = EvalCache::new(CACHE_LIMIT);
            let mut n = 0u64;
            for (k, id) in ids.iter().enumerate() {
                let out = with_retry(spec, r, |r| {
                    let lhs = commutator(r, &mut cache, &id.a, &id.b, &v)?;
                    let rhs = r.op_apply_cached(&mut cache, &id.rhs, &v)?;
                    Ok((lhs, rhs))
                });
                n += 1;
                match out {
                    Ok((lhs, rhs)) if lhs == rhs => {}
                    Ok((lhs, rhs)) => return (n, Some((k, mismatch(id.probe.clone(), t, &lhs, &rhs)))),
                    Err(e) => return (n, Some((k, cap_failure(id.probe.clone(), t, &e)))),
                }
            }
            (n, None)
        })
        .collect();
    let mut evals = 0;
    let mut best: Option<(usize, usize, Counterexample)> = None;
    for (si, (n, fail)) in results.into_iter().enumerate() {
        evals += n;
        if let Some((k, c)) = fail {
            if best.as_ref().is_none_or(|(bk, bs, _)| (k, si) < (*bk, *bs)) {
                best = Some((k, si, c));
            }
        }
    }
    report.count("identities", ids.len() as u64).count("states", states.len() as u64).count("evaluations", evals);
    record_assertions(report, r);
    if let Some((_, _, c)) = best {
        report.fail(c);
    }
}

/// Records how many atom evaluations and operator applications had their
/// degree shift, frequency budget and caps asserted.
fn record_assertions(report: &mut Report, r: &Realizer) {
    report.counts.retain(|(k, _)| k != "asserted_atoms" && k != "asserted_operators");
    report.count("asserted_atoms", r.checks()).count("asserted_operators", r.operator_checks());
}

fn op(e: &AbstractElement) -> RealizedOperator {
    e.to_operator().expect("no chain symbols in realized checks")
}

// ---------------------------------------------------------------------------
// Cocycle fit

/// Result of solving for the extension parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitOutcome {
    /// Unique solution in the order of [`COCYCLE_NAMES`].
    Solved(Vec<Gq>),
    /// The data determine only the listed combinations.
    RankDeficient { rank: usize, combinations: Vec<(Vec<Gq>, Gq)> },
    /// The equations contradict each other: no choice of parameters
    /// reproduces the commutators.
    Inconsistent { equations: usize },
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub outcome: FitOutcome,
    pub pairs: u64,
    pub states: u64,
    pub equations: u64,
    pub asserted_atoms: u64,
    pub asserted_operators: u64,
    /// First `(pair, state)` at which the commutator differs from the
    /// expected parameters, when these were supplied.
    pub expected_failure: Option<Counterexample>,
}

struct PairData {
    probe: String,
    a: usize,
    b: usize,
    bracket: RealizedOperator,
    comps: Vec<RealizedOperator>,
}

struct StateFit {
    system: EchelonSystem,
    equations: u64,
    failure: Option<(usize, Counterexample)>,
}

fn fit_state(
    r: &Realizer,
    fields: &[RealizedOperator],
    pairs: &[PairData],
    expected: Option<&[Gq]>,
    t: &TensorMonomial,
) -> Result<StateFit, RealizeError> {
    let v = state_of(t);
    let mut cache = EvalCache::new(CACHE_LIMIT);
    let images: Vec<TensorState> = fields.iter().map(|f| r.op_apply_cached(&mut cache, f, &v)).collect::<Result<_, _>>()?;
    let mut system = EchelonSystem::new(7);
    let mut equations = 0;
    let mut failure = None;
    for (k, p) in pairs.iter().enumerate() {
        let lhs = r.op_apply_cached(&mut cache, &fields[p.a], &images[p.b])?.sub(&r.op_apply_cached(&mut cache, &fields[p.b], &images[p.a])?);
        let delta = lhs.sub(&r.op_apply_cached(&mut cache, &p.bracket, &v)?);
        let cols: Vec<TensorState> = p.comps.iter().map(|c| r.op_apply_cached(&mut cache, c, &v)).collect::<Result<_, _>>()?;
        let mut rows: FxHashMap<&TensorMonomial, (Vec<Gq>, Gq)> = FxHashMap::default();
        for (m, c) in delta.terms() {
            rows.entry(m).or_insert_with(|| (vec![Gq::zero(); 7], Gq::zero())).1 = c.clone();
        }
        for (j, col) in cols.iter().enumerate() {
            for (m, c) in col.terms() {
                rows.entry(m).or_insert_with(|| (vec![Gq::zero(); 7], Gq::zero())).0[j] = c.clone();
            }
        }
        let mut keys: Vec<&TensorMonomial> = rows.keys().copied().collect();
        keys.sort();
        for m in keys {
            let (a, b) = rows.remove(m).unwrap();
            equations += 1;
            system.add(a, b);
        }
        if failure.is_none() {
            if let Some(theta) = expected {
                let mut predicted = TensorState::zero();
                for (col, th) in cols.iter().zip(theta) {
                    predicted.add_scaled(col, th);
                }
                if predicted != delta {
                    failure = Some((k, mismatch(p.probe.clone(), t, &delta, &predicted)));
                }
            }
        }
    }
    Ok(StateFit { system, equations, failure })
}

/// Fits the seven extension parameters to `[L_xi, L_eta] - L_{[xi,eta]}`
/// over all unordered pairs of `fields` and all basis states of the spec.
pub fn fit_cocycle_coefficients(spec: &ProbeSpec, fields: &[VectorField], expected: Option<&ExtensionParams>) -> Result<FitResult, RealizeError> {
    let r = spec.realizer()?;
    let states = spec.states(&r);
    let ops: Vec<RealizedOperator> = fields.iter().map(build_l).collect();
    let mut pairs = Vec::new();
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            let comps = cocycle_components(&fields[a], &fields[b], 0).iter().map(|c| op(&canonicalize(c))).collect();
            pairs.push(PairData {
                probe: format!("pair ({a},{b}): {} , {}", ops[a].descriptor, ops[b].descriptor),
                a,
                b,
                bracket: build_l(&fields[a].lie_bracket(&fields[b])),
                comps,
            });
        }
    }
    let theta: Option<Vec<Gq>> = expected.map(|p| p.cocycles().to_vec());
    let per_state: Vec<Result<StateFit, RealizeError>> = states
        .par_iter()
        .map(|t| with_retry(spec, &r, |r| fit_state(r, &ops, &pairs, theta.as_deref(), t)))
        .collect();
    let mut system = EchelonSystem::new(7);
    let mut equations = 0;
    let mut best: Option<(usize, usize, Counterexample)> = None;
    for (si, res) in per_state.into_iter().enumerate() {
        let sf = res?;
        equations += sf.equations;
        for _ in 0..sf.system.inconsistent() {
            system.add(vec![Gq::zero(); 7], Gq::one());
        }
        for (a, b) in sf.system.reduced_rows() {
            system.add(a, b);
        }
        if let Some((k, c)) = sf.failure {
            if best.as_ref().is_none_or(|(bk, bs, _)| (k, si) < (*bk, *bs)) {
                best = Some((k, si, c));
            }
        }
    }
    let outcome = if system.inconsistent() > 0 {
        FitOutcome::Inconsistent { equations: system.inconsistent() }
    } else if let Some(x) = system.solution() {
        FitOutcome::Solved(x)
    } else {
        FitOutcome::RankDeficient { rank: system.rank(), combinations: system.reduced_rows() }
    };
    Ok(FitResult {
        outcome,
        pairs: pairs.len() as u64,
        states: states.len() as u64,
        equations,
        asserted_atoms: r.checks(),
        asserted_operators: r.operator_checks(),
        expected_failure: best.map(|b| b.2),
    })
}

/// Text of `sum a_i x_i = b` over the parameter names.
pub(crate) fn combination_text(a: &[Gq], b: &Gq) -> String {
    let mut parts = Vec::new();
    for (c, name) in a.iter().zip(COCYCLE_NAMES) {
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            parts.push(name.to_string());
        } else {
            parts.push(format!("({c})*{name}"));
        }
    }
    format!("{} = {}", parts.join(" + "), b)
}

/// Fits the parameters on the probe cube and compares them with
/// `(1+k1, k2, -2+(c+2N-2)/12, 1+k0; -1, (c+2N-2)/12, i/2)`.
pub fn check_realization(spec: &ProbeSpec) -> Report {
    Report::timed("realization", |rep| {
        rep.spec_params(spec);
        let expected = ExtensionParams::realized(&spec.module_params());
        let fields = spec.probe_fields();
        match fit_cocycle_coefficients(spec, &fields, Some(&expected)) {
            Err(e) => rep.fail(Counterexample::message("setup", e.to_string())),
            Ok(fit) => {
                rep.count("fields", fields.len() as u64).count("pairs", fit.pairs).count("states", fit.states).count("equations", fit.equations);
                rep.count("asserted_atoms", fit.asserted_atoms).count("asserted_operators", fit.asserted_operators);
                for (name, v) in COCYCLE_NAMES.iter().zip(expected.cocycles()) {
                    rep.value(&format!("expected_{name}"), v);
                }
                match &fit.outcome {
                    FitOutcome::Solved(x) => {
                        rep.fitted = Some(COCYCLE_NAMES.iter().map(|n| n.to_string()).zip(x.iter().cloned()).collect());
                        rep.value("residual", 0);
                        if x[..] != expected.cocycles()[..] {
                            let got: Vec<String> = x.iter().map(|g| g.to_string()).collect();
                            rep.fail(Counterexample::message("fit", format!("fitted ({}) differ from expected", got.join(", "))));
                        }
                    }
                    FitOutcome::RankDeficient { rank, combinations } => {
                        rep.value("residual_at_expected", if fit.expected_failure.is_none() { "0" } else { "nonzero" });
                        let t: Vec<String> = combinations.iter().map(|(a, b)| combination_text(a, b)).collect();
                        rep.fail(Counterexample::message("fit", format!("rank {rank} < 7: {}", t.join("; "))));
                    }
                    FitOutcome::Inconsistent { equations } => {
                        rep.value("residual", "nonzero");
                        rep.fail(Counterexample::message("fit", format!("{equations} inconsistent equations")));
                    }
                }
                if let Some(c) = fit.expected_failure {
                    rep.fail(c);
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Temporal subalgebra

fn temporal(dim: usize, m: i32) -> VectorField {
    VectorField::along(0, SpacetimeFunction::phase(dim, m))
}

/// Central value of `[L_{e(m) d0}, L_{e(-m) d0}]` for `m = 1..=mmax`, the
/// central charge `12 * (coefficient of m^3)`, and the parameter fit on
/// temporal probes alone.
pub fn check_temporal_virasoro(spec: &ProbeSpec, mmax: i32) -> Report {
    Report::timed("temporal", |rep| {
        rep.spec_params(spec);
        rep.param("mmax", mmax);
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let states = spec.states(&r);
        let expected = ExtensionParams::realized(&spec.module_params());
        let gd = spec.module_params().gauge.dim();
        let ext = crate::algebra::Extension::new(spec.dim, spec.module_params().gauge.clone(), expected.clone()).unwrap();
        let mut z: Vec<Gq> = Vec::new();
        for m in 1..=mmax {
            let (xi, eta) = (temporal(spec.dim, m), temporal(spec.dim, -m));
            let (a, b) = (build_l(&xi), build_l(&eta));
            let br = build_l(&xi.lie_bracket(&eta));
            let mut zm: Option<Gq> = None;
            let mut cache = EvalCache::new(CACHE_LIMIT);
            for t in &states {
                let v = state_of(t);
                let d = match commutator(&r, &mut cache, &a, &b, &v).and_then(|l| Ok(l.sub(&r.op_apply_cached(&mut cache, &br, &v)?))) {
                    Ok(d) => d,
                    Err(e) => return rep.fail(cap_failure(format!("m = {m}"), t, &e)),
                };
                let zc = zm.get_or_insert_with(|| d.coefficient(t)).clone();
                if d != v.scaled(&zc) {
                    return rep.fail(mismatch(format!("m = {m}: not central"), t, &d, &v.scaled(&zc)));
                }
            }
            let zc = zm.unwrap_or_else(Gq::zero);
            let abs = abstract_bracket(&AbstractElement::l(&xi, gd), &AbstractElement::l(&eta, gd), &ext).unwrap();
            let predicted = abs.scalar().clone();
            if !abs.ideal_part().is_empty() || predicted != zc {
                return rep.fail(Counterexample::message(format!("m = {m}"), format!("central value {zc}, abstract bracket gives {abs}")));
            }
            rep.value(&format!("central_m{m}"), &zc);
            z.push(zc);
        }
        if z.len() < 3 {
            return rep.fail(Counterexample::message("setup", "need at least m = 1, 2, 3"));
        }
        // z(m) = alpha m^3 + beta m from m = 1, 2, checked on the rest.
        let alpha = (&z[1] - &(&z[0] * &Gq::from_int(2))) * Gq::ratio(1, 6);
        let beta = &z[0] - &alpha;
        for (i, zm) in z.iter().enumerate() {
            let m = Gq::from_int(i as i64 + 1);
            let pred = &(&alpha * &m.pow(3)) + &(&beta * &m);
            if &pred != zm {
                return rep.fail(Counterexample::message(format!("m = {}", i + 1), format!("{zm} is not cubic-plus-linear")));
            }
        }
        let charge = &alpha * &Gq::from_int(12);
        let p = spec.module_params();
        let formula = &(&p.c + &Gq::from_int(2 * (spec.dim as i64 - 1))) + &(&(&(&p.k0 + &p.k1) + &p.k2) * &Gq::from_int(12));
        rep.value("m3_coefficient", &alpha).value("m1_coefficient", &beta).value("central_charge", &charge);
        rep.value("expected_central_charge", &formula);
        if charge != formula || charge != expected.temporal_central_charge() {
            rep.fail(Counterexample::message("central charge", format!("{charge} vs {formula}")));
        }
        rep.count("states", states.len() as u64);
        record_assertions(rep, &r);
        // Temporal probes alone cannot separate the four cocycles.
        let fields: Vec<VectorField> = (-mmax..=mmax).map(|m| temporal(spec.dim, m)).collect();
        match fit_cocycle_coefficients(spec, &fields, None) {
            Ok(FitResult { outcome: FitOutcome::RankDeficient { rank, combinations }, .. }) => {
                rep.value("temporal_fit_rank", rank);
                let t: Vec<String> = combinations.iter().map(|(a, b)| combination_text(a, b)).collect();
                rep.value("temporal_fit_identifiable", t.join("; "));
            }
            Ok(other) => rep.fail(Counterexample::message("temporal fit", format!("expected rank deficiency, got {:?}", other.outcome))),
            Err(e) => rep.fail(Counterexample::message("temporal fit", e.to_string())),
        }
    })
}

// ---------------------------------------------------------------------------
// Action on the ideal

/// Ideal symbols `S^I(f)`, `R^{rho|I}(f)` with `|I| <= max_rank` and `f`
/// a probe monomial; `S` with empty block and time-only argument is a
/// scalar and is omitted.
pub(crate) fn ideal_probes(dim: usize, deg: u32, freq: u32, max_rank: usize) -> Vec<IdealKey> {
    let monos: Vec<Monomial> = probe_functions(dim, deg, freq).iter().map(|f| f.terms().next().unwrap().0.clone()).collect();
    let mut out = Vec::new();
    for n in 0..=max_rank {
        for exps in spatial_exponents(dim - 1, n as u32) {
            if exps.iter().map(|&e| e as usize).sum::<usize>() != n {
                continue;
            }
            let idx: Idx = exps.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n((i + 1) as u8, e as usize)).collect();
            for mono in &monos {
                if !(idx.is_empty() && mono.degree() == 0) {
                    out.push(IdealKey::S { idx: idx.clone(), mono: mono.clone() });
                }
            }
            for rho in 1..dim as u8 {
                for mono in &monos {
                    out.push(IdealKey::R { rho, idx: idx.clone(), mono: mono.clone() });
                }
            }
        }
    }
    out
}

/// `[L_xi, S]` and `[L_xi, R]` against their transformation laws, plus the
/// relation instances, on all states.
pub fn check_action_brackets(spec: &ProbeSpec, max_rank: usize) -> Report {
    Report::timed("action", |rep| {
        rep.spec_params(spec);
        rep.param("max_rank", max_rank);
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let states = spec.states(&r);
        let fields = spec.probe_fields();
        let keys = ideal_probes(spec.dim, spec.deg, spec.freq, max_rank);
        let gd = spec.module_params().gauge.dim();
        let mut ids = Vec::new();
        for (fi, xi) in fields.iter().enumerate() {
            let a = build_l(xi);
            for (ki, key) in keys.iter().enumerate() {
                let b = op(&AbstractElement::ideal_symbol(key.clone(), spec.dim, gd));
                let rhs = op(&canonicalize(&l_on_ideal(xi, key, gd)));
                ids.push(Identity { probe: format!("field {fi} {}, symbol {ki} {key}", a.descriptor), a: a.clone(), b, rhs });
            }
        }
        rep.count("fields", fields.len() as u64).count("symbols", keys.len() as u64);
        check_identities(rep, spec, &r, &states, &ids);
        if !rep.pass && rep.counterexample.is_some() {
            return;
        }
        // Relation instances act as zero.
        let mut relations = 0u64;
        for n in 0..=max_rank {
            for exps in spatial_exponents(spec.dim - 1, n as u32) {
                if exps.iter().map(|&e| e as usize).sum::<usize>() != n {
                    continue;
                }
                let idx: Idx = exps.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n((i + 1) as u8, e as usize)).collect();
                for f in probe_functions(spec.dim, spec.deg, spec.freq) {
                    let (mono, _) = f.terms().next().unwrap();
                    let rel = relation_instance(spec.dim, &idx, &mono.exps, mono.freq);
                    let o = op(&rel);
                    relations += 1;
                    for t in &states {
                        match r.op_apply(&o, &state_of(t)) {
                            Ok(w) if w.is_zero() => {}
                            Ok(w) => return rep.fail(mismatch(format!("relation {rel}"), t, &w, &TensorState::zero())),
                            Err(e) => return rep.fail(cap_failure(format!("relation {rel}"), t, &e)),
                        }
                    }
                }
            }
        }
        rep.count("relations", relations);
        record_assertions(rep, &r);
    })
}

/// Commutators among ideal symbols (and with `J_X` when a gauge algebra is
/// present) vanish.
pub fn check_abelian(spec: &ProbeSpec, deg: u32, freq: u32, max_rank: usize) -> Report {
    Report::timed("abelian", |rep| {
        rep.spec_params(spec);
        rep.param("symbol_deg", deg).param("symbol_freq", freq).param("max_rank", max_rank);
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let states = spec.states(&r);
        let gd = spec.module_params().gauge.dim();
        let keys = ideal_probes(spec.dim, deg, freq, max_rank);
        let ops: Vec<RealizedOperator> = keys.iter().map(|k| op(&AbstractElement::ideal_symbol(k.clone(), spec.dim, gd))).collect();
        let zero = RealizedOperator::zero();
        let mut ids = Vec::new();
        for i in 0..ops.len() {
            for j in i + 1..ops.len() {
                ids.push(Identity { probe: format!("[{}, {}]", keys[i], keys[j]), a: ops[i].clone(), b: ops[j].clone(), rhs: zero.clone() });
            }
        }
        if gd > 0 && !spec.trivial {
            for x in gauge_probes(spec.dim, gd, deg, freq) {
                let jx = build_j(&x, gd).unwrap();
                for (k, o) in keys.iter().zip(&ops) {
                    ids.push(Identity { probe: format!("[{}, {k}]", jx.descriptor), a: jx.clone(), b: o.clone(), rhs: zero.clone() });
                }
            }
        }
        check_identities(rep, spec, &r, &states, &ids);
    })
}

// ---------------------------------------------------------------------------
// Gauge sector

fn gauge_probes(dim: usize, gd: usize, deg: u32, freq: u32) -> Vec<Vec<SpacetimeFunction>> {
    let mut out = Vec::new();
    for f in probe_functions(dim, deg, freq) {
        for a in 0..gd {
            let mut x = vec![SpacetimeFunction::zero(dim); gd];
            x[a] = f.clone();
            out.push(x);
        }
    }
    out
}

/// `[J_X, J_Y]` and `[L_xi, J_X]` against the gauge extension with the
/// module's level and charges.
pub fn check_gauge(spec: &ProbeSpec) -> Report {
    Report::timed("gauge", |rep| {
        rep.spec_params(spec);
        let p = spec.module_params();
        let gd = p.gauge.dim();
        if gd == 0 || spec.trivial {
            return rep.fail(Counterexample::message("setup", "gauge check needs an induced module with a gauge algebra"));
        }
        let g: Vec<String> = p.g.iter().map(|x| x.to_string()).collect();
        let gp: Vec<String> = p.gprime.iter().map(|x| x.to_string()).collect();
        rep.param("g", g.join(",")).param("gprime", gp.join(","));
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let states = spec.states(&r);
        let mut ext_params = ExtensionParams::realized(&p);
        ext_params.k = p.k.clone();
        let xs = gauge_probes(spec.dim, gd, spec.deg, spec.freq);
        let jops: Vec<RealizedOperator> = xs.iter().map(|x| build_j(x, gd).unwrap()).collect();
        let mut ids = Vec::new();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let rhs = op(&canonicalize(&j_on_j(&xs[i], &xs[j], &p.gauge, &p.k, spec.dim)));
                ids.push(Identity { probe: format!("[{}, {}]", jops[i].descriptor, jops[j].descriptor), a: jops[i].clone(), b: jops[j].clone(), rhs });
            }
        }
        let jj = ids.len();
        for xi in spec.probe_fields() {
            let a = build_l(&xi);
            for (x, jx) in xs.iter().zip(&jops) {
                let rhs = op(&canonicalize(&l_on_j(&xi, x, &ext_params)));
                ids.push(Identity { probe: format!("[{}, {}]", a.descriptor, jx.descriptor), a: a.clone(), b: jx.clone(), rhs });
            }
        }
        rep.count("jj_pairs", jj as u64).count("lj_pairs", (ids.len() - jj) as u64);
        check_identities(rep, spec, &r, &states, &ids);
    })
}

// ---------------------------------------------------------------------------
// Single modes and the grading

fn apply_fock_mode(m: Mode, v: &TensorState, caps: &Caps) -> Result<TensorState, RealizeError> {
    let mut out = TensorState::zero();
    for (t, c) in v.terms() {
        for (u, x) in apply_mode(m, &FockState::basis(t.fock.clone())).terms() {
            caps.check(u)?;
            out.add_term(TensorMonomial { fock: u.clone(), pbw: t.pbw.clone() }, &(x * c));
        }
    }
    Ok(out)
}

/// `[L_xi, q^i(n)] = [xi^i - xi^0 qdot^i]_n` on all states.
pub fn check_q_transform(spec: &ProbeSpec, nmax: i32) -> Report {
    Report::timed("q_transform", |rep| {
        rep.spec_params(spec);
        rep.param("nmax", nmax);
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let states = spec.states(&r);
        let fields = spec.probe_fields();
        let mut evals = 0u64;
        for (fi, xi) in fields.iter().enumerate() {
            let l = build_l(xi);
            for i in 1..spec.dim as u8 {
                let tilde = LoopPoly::from_function(xi.comp(i as usize))
                    .add(&LoopPoly::from_function(xi.comp(0)).times_factor(i, 1).scale(&-Gq::one()));
                for n in -nmax..=nmax {
                    let mode = Mode::q(i, n);
                    let mut cache = EvalCache::new(CACHE_LIMIT);
                    for t in &states {
                        let v = state_of(t);
                        let res = (|| -> Result<(TensorState, TensorState), RealizeError> {
                            let qv = apply_fock_mode(mode, &v, &spec.caps)?;
                            let lhs = r.op_apply_cached(&mut cache, &l, &qv)?.sub(&apply_fock_mode(mode, &r.op_apply_cached(&mut cache, &l, &v)?, &spec.caps)?);
                            let mut rhs = TensorState::zero();
                            for (e, fs) in loop_poly_apply(&tilde, &t.fock, EnergyWindow::Exactly(n as i64)) {
                                debug_assert_eq!(e, n as i64);
                                for (u, c) in fs.terms() {
                                    rhs.add_term(TensorMonomial { fock: u.clone(), pbw: t.pbw.clone() }, c);
                                }
                            }
                            Ok((lhs, rhs))
                        })();
                        evals += 1;
                        let probe = format!("field {fi} {}, mode {mode}", l.descriptor);
                        match res {
                            Ok((lhs, rhs)) if lhs == rhs => {}
                            Ok((lhs, rhs)) => return rep.fail(mismatch(probe, t, &lhs, &rhs)),
                            Err(e) => return rep.fail(cap_failure(probe, t, &e)),
                        }
                    }
                }
            }
        }
        rep.count("fields", fields.len() as u64).count("states", states.len() as u64).count("evaluations", evals);
        record_assertions(rep, &r);
    })
}

/// `H = L_{-i d0}` is diagonal with eigenvalue `degree + h` and bounded
/// below by `h`.
pub fn check_hamiltonian(spec: &ProbeSpec) -> Report {
    Report::timed("hamiltonian", |rep| {
        rep.spec_params(spec);
        let r = match spec.realizer() {
            Ok(r) => r,
            Err(e) => return rep.fail(Counterexample::message("setup", e.to_string())),
        };
        let h = if spec.trivial { Gq::zero() } else { spec.weight.h.clone() };
        let ham = build_hamiltonian(spec.dim);
        let states = spec.states(&r);
        let mut lowest: Option<i64> = None;
        for t in &states {
            let v = state_of(t);
            let ev = &Gq::from_int(t.degree()) + &h;
            match r.op_apply(&ham, &v) {
                Ok(w) if w == v.scaled(&ev) => {}
                Ok(w) => return rep.fail(mismatch("H".into(), t, &w, &v.scaled(&ev))),
                Err(e) => return rep.fail(cap_failure("H".into(), t, &e)),
            }
            lowest = Some(lowest.map_or(t.degree(), |l| l.min(t.degree())));
        }
        let single = Mode::q(1, 3);
        let raised = apply_fock_mode(single, &TensorState::basis(TensorMonomial::vacuum()), &spec.caps).ok();
        if let Some(w) = raised {
            if let Ok(hw) = r.op_apply(&ham, &w) {
                rep.value("eigenvalue_q1(3)_minus_vacuum", &(&hw.coefficient(&w.terms().next().unwrap().0.clone()) - &h));
            }
        }
        rep.count("states", states.len() as u64);
        record_assertions(rep, &r);
        rep.value("convention", "eigenvalue = degree + h");
        rep.value("lowest_eigenvalue", &(&Gq::from_int(lowest.unwrap_or(0)) + &h));
    })
}
