//! Realized operators on `F (x) M`, evaluated by their action on basis
//! vectors.
//!
//! With the conventions of [`crate::fock`] and [`crate::current`]:
//!
//! ```text
//! L_xi   = sum_n :[xi~^j]_{-n} P_j(n): + i sum_m [xi^0(q)]_m L_m + sum_m [d_nu xi^mu(q)]_m T^nu_{mu,m}
//! S^I(f) = -i [qdot^{I_1} ... qdot^{I_n} f(q)]_0
//! R^{rho|I}(f) = -i [qddot^rho qdot^I f(q)]_0
//! J_X    = sum_m [X_a(q)]_m J^a_m
//! ```
//!
//! where `xi~^j = xi^j(q) - xi^0(q) qdot^j`, `qdot^0 = 1`, `qddot^0 = 0`, and
//! `[F]_E` is the energy-`E` part of a loop expression. Every single-term
//! operator with phase `e(m)` shifts the degree by exactly `m`; this is
//! asserted on every application.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::current::{CurrentError, CurrentKind, CurrentMode, InducedModule, PbwMonomial};
use crate::fock::{
    add_into, loop_apply, normal_apply_monomial, Caps, CreatorMonomial, EnergyWindow, FockError, LoopPoly,
};
use crate::scalar::GaussianRational as Gq;
use crate::spacetime::{Monomial, MixedTensorArg, SpacetimeFunction, SymTensorArg, VectorField};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error(transparent)]
    Cap(#[from] FockError),
    #[error(transparent)]
    Current(#[from] CurrentError),
    #[error("degree shift {shift} outside the frequency budget {budget} of {atom}")]
    Budget { atom: String, shift: i64, budget: u32 },
    #[error("gauge index {0} out of range")]
    Gauge(usize),
    #[error("dimension mismatch")]
    Dimension,
}

/// Sorted multiset of spatial indices.
pub type Idx = SmallVec<[u8; 4]>;

/// Single-term building blocks of realized operators (unit coefficient).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Identity,
    /// `x^a e(m) d_mu`.
    L { mu: u8, mono: Monomial },
    /// `S^I(x^a e(m))`, `I` spatial.
    S { idx: Idx, mono: Monomial },
    /// `R^{rho|I}(x^a e(m))`, `rho` and `I` spatial.
    R { rho: u8, idx: Idx, mono: Monomial },
    /// `J_X` with `X = x^a e(m) J^a`.
    J { a: u8, mono: Monomial },
}

impl Atom {
    pub fn freq(&self) -> i32 {
        match self {
            Atom::Identity => 0,
            Atom::L { mono, .. } | Atom::S { mono, .. } | Atom::R { mono, .. } | Atom::J { mono, .. } => mono.freq,
        }
    }
}

fn idx_text(idx: &[u8]) -> String {
    idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Identity => write!(f, "1"),
            Atom::L { mu, mono } => write!(f, "L[{mono} d{mu}]"),
            Atom::S { idx, mono } => write!(f, "S{}^{{{}}}[{mono}]", idx.len(), idx_text(idx)),
            Atom::R { rho, idx, mono } => write!(f, "R{}^{{{}|{}}}[{mono}]", idx.len(), rho, idx_text(idx)),
            Atom::J { a, mono } => write!(f, "J[{mono} J{a}]"),
        }
    }
}

/// Basis vector of `F (x) M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorMonomial {
    pub fock: CreatorMonomial,
    pub pbw: PbwMonomial,
}

impl TensorMonomial {
    pub fn vacuum() -> Self {
        TensorMonomial { fock: CreatorMonomial::vacuum(), pbw: PbwMonomial::empty() }
    }

    pub fn degree(&self) -> i64 {
        self.fock.degree() + self.pbw.degree()
    }

    pub fn width(&self) -> usize {
        self.fock.width() + self.pbw.width()
    }
}

impl fmt::Display for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pbw.0.is_empty() {
            write!(f, "{}", self.fock)
        } else {
            write!(f, "{} (x) {}", self.fock, self.pbw)
        }
    }
}

/// Finite combination of tensor basis vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TensorState {
    terms: FxHashMap<TensorMonomial, Gq>,
}

impl TensorState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(m: TensorMonomial) -> Self {
        let mut s = Self::zero();
        s.add_term(m, &Gq::one());
        s
    }

    pub fn add_term(&mut self, m: TensorMonomial, c: &Gq) {
        add_into(&mut self.terms, m, c);
    }

    pub fn add_scaled(&mut self, o: &TensorState, c: &Gq) {
        if c.is_zero() {
            return;
        }
        if c.is_one() {
            for (m, v) in &o.terms {
                add_into(&mut self.terms, m.clone(), v);
            }
            return;
        }
        for (m, v) in &o.terms {
            add_into(&mut self.terms, m.clone(), &(v * c));
        }
    }

    pub fn sub(&self, o: &TensorState) -> TensorState {
        let mut r = self.clone();
        r.add_scaled(o, &-Gq::one());
        r
    }

    pub fn scaled(&self, c: &Gq) -> TensorState {
        let mut r = TensorState::zero();
        r.add_scaled(self, c);
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &TensorMonomial) -> Gq {
        self.terms.get(m).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TensorMonomial, &Gq)> {
        self.terms.iter()
    }

    pub fn sorted_terms(&self) -> Vec<(&TensorMonomial, &Gq)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.degree()).max()
    }
}

impl fmt::Display for TensorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.sorted_terms().iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Linear combination of atoms with a descriptor and frequency budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedOperator {
    pub descriptor: String,
    pub terms: Vec<(Atom, Gq)>,
    pub budget: u32,
}

impl RealizedOperator {
    pub fn new(descriptor: impl Into<String>, terms: Vec<(Atom, Gq)>) -> Self {
        let mut merged: FxHashMap<Atom, Gq> = FxHashMap::default();
        for (a, c) in terms {
            add_into(&mut merged, a, &c);
        }
        let mut terms: Vec<(Atom, Gq)> = merged.into_iter().collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let budget = terms.iter().map(|(a, _)| a.freq().unsigned_abs()).max().unwrap_or(0);
        RealizedOperator { descriptor: descriptor.into(), terms, budget }
    }

    pub fn zero() -> Self {
        Self::new("0", Vec::new())
    }

    pub fn identity() -> Self {
        Self::new("1", vec![(Atom::Identity, Gq::one())])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: &Gq) -> Self {
        Self::new(format!("({c})*{}", self.descriptor), self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect())
    }

    pub fn plus(&self, o: &RealizedOperator) -> Self {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        Self::new(format!("{} + {}", self.descriptor, o.descriptor), t)
    }
}

/// `L_xi`.
pub fn build_l(xi: &VectorField) -> RealizedOperator {
    let terms = xi.basis_terms().into_iter().map(|(mu, mono, c)| (Atom::L { mu: mu as u8, mono }, c)).collect();
    RealizedOperator::new(format!("L[{xi}]"), terms)
}

fn push_function_terms(
    out: &mut Vec<(Atom, Gq)>,
    f: &SpacetimeFunction,
    scale: &Gq,
    make: &dyn Fn(Monomial) -> Option<Atom>,
) {
    for (m, c) in f.terms() {
        if let Some(a) = make(m.clone()) {
            out.push((a, c * scale));
        }
    }
}

/// Number of distinct orderings of a sorted index tuple.
pub fn orderings(idx: &[u8]) -> i64 {
    let mut n = 1i64;
    let mut k = 1i64;
    let mut run = 1i64;
    for w in 1..=idx.len() {
        n *= w as i64;
        if w < idx.len() && idx[w] == idx[w - 1] {
            run += 1;
            k *= run;
        } else {
            run = 1;
        }
    }
    n / k
}

/// Removes the time index `0` from an index block.
pub fn spatial_part(idx: &[u8]) -> Idx {
    idx.iter().copied().filter(|&i| i != 0).collect()
}

/// `S_n(g) = sum over ordered tuples nu of S^nu(g_nu)`.
pub fn build_s(g: &SymTensorArg) -> RealizedOperator {
    let mut terms = Vec::new();
    for (key, f) in g.entries() {
        let mult = Gq::from_int(orderings(key));
        let idx = spatial_part(key);
        push_function_terms(&mut terms, f, &mult, &|mono| Some(Atom::S { idx: idx.clone(), mono }));
    }
    RealizedOperator::new(format!("S{}[g]", g.rank()), terms)
}

/// `R_n(h) = sum over rho and ordered tuples nu of R^{rho|nu}(h_{rho|nu})`.
pub fn build_r(h: &MixedTensorArg) -> RealizedOperator {
    let mut terms = Vec::new();
    for ((rho, key), f) in h.entries() {
        if *rho == 0 {
            continue;
        }
        let mult = Gq::from_int(orderings(key));
        let idx = spatial_part(key);
        push_function_terms(&mut terms, f, &mult, &|mono| Some(Atom::R { rho: *rho, idx: idx.clone(), mono }));
    }
    RealizedOperator::new(format!("R{}[h]", h.rank()), terms)
}

/// `J_X` for `X = X_a J^a`.
pub fn build_j(x: &[SpacetimeFunction], gauge_dim: usize) -> Result<RealizedOperator, RealizeError> {
    if x.len() != gauge_dim {
        return Err(RealizeError::Gauge(x.len()));
    }
    let mut terms = Vec::new();
    for (a, f) in x.iter().enumerate() {
        push_function_terms(&mut terms, f, &Gq::one(), &|mono| Some(Atom::J { a: a as u8, mono }));
    }
    let text: Vec<String> = x.iter().map(|f| f.to_string()).collect();
    Ok(RealizedOperator::new(format!("J[{}]", text.join(" ; ")), terms))
}

/// `L_{-i d_0}`.
pub fn build_hamiltonian(dim: usize) -> RealizedOperator {
    let mut op = build_l(&VectorField::along(0, SpacetimeFunction::constant(dim, -Gq::i())));
    op.descriptor = "H".into();
    op
}

/// Per-worker memo of atom applications.
#[derive(Debug, Default)]
pub struct EvalCache {
    map: FxHashMap<(Atom, TensorMonomial), Arc<TensorState>>,
    limit: usize,
}

impl EvalCache {
    pub fn new(limit: usize) -> Self {
        EvalCache { map: FxHashMap::default(), limit }
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Evaluates realized operators on `F (x) M` for a fixed module.
#[derive(Debug)]
pub struct Realizer {
    dim: usize,
    module: InducedModule,
    caps: Caps,
    checks: AtomicU64,
    op_checks: AtomicU64,
}

impl Realizer {
    pub fn new(dim: usize, module: InducedModule, caps: Caps) -> Result<Self, RealizeError> {
        if module.params().dim != dim {
            return Err(RealizeError::Dimension);
        }
        Ok(Realizer { dim, module, caps, checks: AtomicU64::new(0), op_checks: AtomicU64::new(0) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn module(&self) -> &InducedModule {
        &self.module
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// Number of atom evaluations whose degree shift and caps were asserted.
    pub fn checks(&self) -> u64 {
        self.checks.load(Ordering::Relaxed)
    }

    /// Number of operator applications whose frequency budget was asserted.
    pub fn operator_checks(&self) -> u64 {
        self.op_checks.load(Ordering::Relaxed)
    }

    /// Basis of `F (x) M` with total degree `<= max_degree`, total width `<= max_width`.
    pub fn tensor_basis(&self, max_degree: u32, max_width: usize) -> Vec<TensorMonomial> {
        let fock = crate::fock::fock_basis(self.dim, max_degree, max_width);
        let pbw = self.module.basis(max_degree, max_width);
        let mut out = Vec::new();
        for w in &pbw {
            for u in &fock {
                let t = TensorMonomial { fock: u.clone(), pbw: w.clone() };
                if t.degree() <= max_degree as i64 && t.width() <= max_width {
                    out.push(t);
                }
            }
        }
        out.sort_by(|a, b| (a.width(), a.degree(), a).cmp(&(b.width(), b.degree(), b)));
        out
    }

    fn apply_current(
        &self,
        g: &LoopPoly,
        kind: CurrentKind,
        scale: &Gq,
        t: &TensorMonomial,
        out: &mut TensorState,
    ) -> Result<(), RealizeError> {
        if self.module.is_trivial() || g.is_zero() {
            return Ok(());
        }
        let top = t.pbw.degree();
        let series = crate::fock::loop_poly_apply(g, &t.fock, EnergyWindow::AtMost(top));
        for (e, fs) in series {
            let r = self.module.apply_monomial(CurrentMode { kind, freq: e as i32 }, &t.pbw)?;
            for (w, cw) in r.terms() {
                let cw = cw * scale;
                for (u, cu) in fs.terms() {
                    out.add_term(TensorMonomial { fock: u.clone(), pbw: w.clone() }, &(cu * &cw));
                }
            }
        }
        Ok(())
    }

    fn apply_atom_raw(&self, atom: &Atom, t: &TensorMonomial) -> Result<TensorState, RealizeError> {
        let mut out = TensorState::zero();
        let dim = self.dim;
        match atom {
            Atom::Identity => out.add_term(t.clone(), &Gq::one()),
            Atom::L { mu, mono } => {
                let f = SpacetimeFunction::term(dim, mono.clone(), Gq::one());
                let lf = LoopPoly::from_function(&f);
                let mut push = |u: CreatorMonomial, c: Gq| {
                    out.add_term(TensorMonomial { fock: u, pbw: t.pbw.clone() }, &c);
                };
                if *mu == 0 {
                    for j in 1..dim as u8 {
                        let g = lf.times_factor(j, 1).scale(&-Gq::one());
                        normal_apply_monomial(&g, j, &t.fock, &mut push);
                    }
                } else {
                    normal_apply_monomial(&lf, *mu, &t.fock, &mut push);
                }
                if !self.module.is_trivial() {
                    if *mu == 0 {
                        self.apply_current(&lf, CurrentKind::L, &Gq::i(), t, &mut out)?;
                    }
                    for nu in 0..dim {
                        let d = f.d(nu);
                        if d.is_zero() {
                            continue;
                        }
                        let kind = CurrentKind::T { up: nu as u8, down: *mu };
                        self.apply_current(&LoopPoly::from_function(&d), kind, &Gq::one(), t, &mut out)?;
                    }
                }
            }
            Atom::S { idx, mono } | Atom::R { idx, mono, .. } => {
                let f = SpacetimeFunction::term(dim, mono.clone(), Gq::one());
                let mut g = LoopPoly::from_function(&f);
                for &i in idx.iter() {
                    g = g.times_factor(i, 1);
                }
                if let Atom::R { rho, .. } = atom {
                    g = g.times_factor(*rho, 2);
                }
                let minus_i = -Gq::i();
                for (lm, c) in g.terms() {
                    loop_apply(lm, &(c * &minus_i), &t.fock, EnergyWindow::Exactly(0), &mut |_, u, v| {
                        out.add_term(TensorMonomial { fock: u, pbw: t.pbw.clone() }, &v)
                    });
                }
            }
            Atom::J { a, mono } => {
                if (*a as usize) >= self.module.params().gauge.dim() {
                    return Err(RealizeError::Gauge(*a as usize));
                }
                let f = SpacetimeFunction::term(dim, mono.clone(), Gq::one());
                self.apply_current(&LoopPoly::from_function(&f), CurrentKind::J(*a), &Gq::one(), t, &mut out)?;
            }
        }
        let shift = atom.freq() as i64;
        let d0 = t.degree();
        for (m, _) in out.terms() {
            if m.degree() - d0 != shift {
                return Err(RealizeError::Budget { atom: atom.to_string(), shift: m.degree() - d0, budget: atom.freq().unsigned_abs() });
            }
            if m.degree() > self.caps.max_degree {
                return Err(FockError::DegreeCap { degree: m.degree(), cap: self.caps.max_degree }.into());
            }
            if m.width() > self.caps.max_width {
                return Err(FockError::WidthCap { width: m.width(), cap: self.caps.max_width }.into());
            }
        }
        self.checks.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    /// A single atom on a basis vector, memoized in `cache`.
    pub fn apply_atom(&self, cache: &mut EvalCache, atom: &Atom, t: &TensorMonomial) -> Result<Arc<TensorState>, RealizeError> {
        let key = (atom.clone(), t.clone());
        if let Some(r) = cache.map.get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.apply_atom_raw(atom, t)?);
        if cache.limit > 0 && cache.map.len() >= cache.limit {
            cache.map.clear();
        }
        cache.map.insert(key, r.clone());
        Ok(r)
    }

    /// `A v`, exact.
    pub fn op_apply_cached(&self, cache: &mut EvalCache, op: &RealizedOperator, v: &TensorState) -> Result<TensorState, RealizeError> {
        let mut out = TensorState::zero();
        for (t, c) in v.terms() {
            for (atom, a) in &op.terms {
                let r = self.apply_atom(cache, atom, t)?;
                out.add_scaled(&r, &(c * a));
            }
        }
        let (lo, hi) = (v.terms().map(|(t, _)| t.degree()).min(), v.terms().map(|(t, _)| t.degree()).max());
        if let (Some(lo), Some(hi)) = (lo, hi) {
            for (m, _) in out.terms() {
                let d = m.degree();
                if d < lo - op.budget as i64 || d > hi + op.budget as i64 {
                    return Err(RealizeError::Budget { atom: op.descriptor.clone(), shift: d - lo, budget: op.budget });
                }
            }
        }
        self.op_checks.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    pub fn op_apply(&self, op: &RealizedOperator, v: &TensorState) -> Result<TensorState, RealizeError> {
        self.op_apply_cached(&mut EvalCache::new(0), op, v)
    }

    /// `A(B v) - B(A v)`.
    pub fn commutator_apply(&self, a: &RealizedOperator, b: &RealizedOperator, v: &TensorState) -> Result<TensorState, RealizeError> {
        let mut cache = EvalCache::new(0);
        let bv = self.op_apply_cached(&mut cache, b, v)?;
        let av = self.op_apply_cached(&mut cache, a, v)?;
        let abv = self.op_apply_cached(&mut cache, a, &bv)?;
        let bav = self.op_apply_cached(&mut cache, b, &av)?;
        Ok(abv.sub(&bav))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current::CurrentParams;
    use crate::fock::Mode;

    fn trivial(dim: usize) -> Realizer {
        Realizer::new(dim, InducedModule::trivial(CurrentParams::zero(dim)).unwrap(), Caps::default()).unwrap()
    }

    fn fock(modes: &[Mode]) -> TensorState {
        TensorState::basis(TensorMonomial { fock: CreatorMonomial::from_modes(modes), pbw: PbwMonomial::empty() })
    }

    #[test]
    fn translation_contracts_zero_mode() {
        let r = trivial(2);
        let xi = VectorField::parse("0 ; 1", 2).unwrap();
        let out = r.op_apply(&build_l(&xi), &fock(&[Mode::q(1, 0)])).unwrap();
        assert_eq!(out, fock(&[]));
    }

    #[test]
    fn dilation_kills_vacuum() {
        let r = trivial(2);
        let xi = VectorField::parse("0 ; x1", 2).unwrap();
        assert!(r.op_apply(&build_l(&xi), &fock(&[])).unwrap().is_zero());
    }

    #[test]
    fn hamiltonian_counts_degree() {
        let r = trivial(2);
        let h = build_hamiltonian(2);
        let v = fock(&[Mode::q(1, 3)]);
        assert_eq!(r.op_apply(&h, &v).unwrap(), v.scaled(&Gq::from_int(3)));
        let v = fock(&[Mode::q(1, 1), Mode::p(1, 2)]);
        assert_eq!(r.op_apply(&h, &v).unwrap(), v.scaled(&Gq::from_int(3)));
        assert!(r.op_apply(&h, &fock(&[])).unwrap().is_zero());
    }

    #[test]
    fn time_only_s0_is_scalar() {
        let r = trivial(2);
        let mut g = SymTensorArg::new(2, 0);
        g.insert(&[], SpacetimeFunction::constant(2, Gq::one()));
        let v = fock(&[Mode::q(1, 2)]);
        assert_eq!(r.op_apply(&build_s(&g), &v).unwrap(), v.scaled(&-Gq::i()));
        let mut g = SymTensorArg::new(2, 0);
        g.insert(&[], SpacetimeFunction::phase(2, 3));
        assert!(r.op_apply(&build_s(&g), &v).unwrap().is_zero());
    }

    #[test]
    fn orderings_count() {
        assert_eq!(orderings(&[]), 1);
        assert_eq!(orderings(&[1, 1, 2]), 3);
        assert_eq!(orderings(&[0, 1, 2]), 6);
        assert_eq!(orderings(&[2, 2, 2]), 1);
    }
}
