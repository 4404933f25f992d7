//! The Fock module of the Heisenberg algebra of loops `q^i(t)`, `p_j(t)`.
//!
//! Conventions. Fields are expanded by energy:
//!
//! ```text
//! q^i(t) = sum_n q^i(n) e^{-int},      p_j(t) = (1/2pi) sum_n P_j(n) e^{-int}
//! ```
//!
//! so `P_j(n) = 2pi p_j(n)` and `[p_j(s), q^i(t)] = delta^i_j delta(s-t)` becomes
//! `[P_j(m), q^i(n)] = delta^i_j delta_{m+n,0}`. A mode labelled `n` raises the
//! energy by `n`. Creators are `q^i(n >= 0)` and `P_j(n > 0)`; on the
//! polynomial ring they generate,
//!
//! ```text
//! P_j(n <= 0) = d/dq^j(-n),            q^i(n < 0) = -d/dP_i(-n).
//! ```
//!
//! A phase `e^{imt}` carries energy `-m`, and `[F]_E` denotes the energy-`E`
//! component of a loop expression `F`; `int dt F` is `2pi [F]_0`.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::scalar::GaussianRational as Gq;
use crate::spacetime::SpacetimeFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeKind {
    Q,
    P,
}

/// `q^index(freq)` or `P_index(freq)`; spatial `index` in `1..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub kind: ModeKind,
    pub index: u8,
    pub freq: i32,
}

impl Mode {
    pub fn q(index: u8, freq: i32) -> Self {
        Mode { kind: ModeKind::Q, index, freq }
    }

    pub fn p(index: u8, freq: i32) -> Self {
        Mode { kind: ModeKind::P, index, freq }
    }

    pub fn is_creator(&self) -> bool {
        match self.kind {
            ModeKind::Q => self.freq >= 0,
            ModeKind::P => self.freq > 0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ModeKind::Q => 'q',
            ModeKind::P => 'P',
        };
        write!(f, "{}{}({})", k, self.index, self.freq)
    }
}

/// `[a, b]` as a scalar.
pub fn mode_commutator(a: Mode, b: Mode) -> Gq {
    if a.index != b.index || a.freq + b.freq != 0 {
        return Gq::zero();
    }
    match (a.kind, b.kind) {
        (ModeKind::P, ModeKind::Q) => Gq::one(),
        (ModeKind::Q, ModeKind::P) => -Gq::one(),
        _ => Gq::zero(),
    }
}

/// Sorted product of creators acting on the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CreatorMonomial(pub SmallVec<[Mode; 8]>);

impl CreatorMonomial {
    pub fn vacuum() -> Self {
        CreatorMonomial(SmallVec::new())
    }

    pub fn from_modes(modes: &[Mode]) -> Self {
        assert!(modes.iter().all(|m| m.is_creator()), "annihilator in creator monomial");
        let mut v: SmallVec<[Mode; 8]> = modes.iter().copied().collect();
        v.sort_unstable();
        CreatorMonomial(v)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|m| m.freq as i64).sum()
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self, m: Mode) -> usize {
        self.0.iter().filter(|&&x| x == m).count()
    }

    pub fn with(&self, m: Mode) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|x| *x <= m);
        v.insert(pos, m);
        CreatorMonomial(v)
    }

    /// Removes one copy of `m`, returning its multiplicity before removal.
    pub fn without(&self, m: Mode) -> Option<(Self, usize)> {
        let c = self.count(m);
        if c == 0 {
            return None;
        }
        let mut v = self.0.clone();
        let pos = v.iter().position(|x| *x == m).unwrap();
        v.remove(pos);
        Some((CreatorMonomial(v), c))
    }

    /// Total energy of the `P` creators, the most any string of `q`
    /// annihilators can remove.
    pub fn p_energy(&self) -> i64 {
        self.0.iter().filter(|m| m.kind == ModeKind::P).map(|m| m.freq as i64).sum()
    }
}

impl fmt::Display for CreatorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join("*"))
    }
}

pub(crate) fn add_into<K: std::hash::Hash + Eq>(map: &mut FxHashMap<K, Gq>, k: K, c: &Gq) {
    if c.is_zero() {
        return;
    }
    match map.entry(k) {
        std::collections::hash_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(c.clone());
        }
    }
}

/// Finite combination of creator monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FockState {
    terms: FxHashMap<CreatorMonomial, Gq>,
}

impl FockState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::basis(CreatorMonomial::vacuum())
    }

    pub fn basis(m: CreatorMonomial) -> Self {
        let mut s = Self::zero();
        s.add_term(m, &Gq::one());
        s
    }

    pub fn add_term(&mut self, m: CreatorMonomial, c: &Gq) {
        add_into(&mut self.terms, m, c);
    }

    pub fn add(&mut self, o: &FockState) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn scaled(&self, c: &Gq) -> FockState {
        let mut r = FockState::zero();
        for (m, v) in &self.terms {
            r.add_term(m.clone(), &(v * c));
        }
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

    pub fn coefficient(&self, m: &CreatorMonomial) -> Gq {
        self.terms.get(m).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CreatorMonomial, &Gq)> {
        self.terms.iter()
    }

    /// Terms in canonical monomial order.
    pub fn sorted_terms(&self) -> Vec<(&CreatorMonomial, &Gq)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.sorted_terms().iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Splits a state into homogeneous components by degree.
pub fn grade(v: &FockState) -> BTreeMap<i64, FockState> {
    let mut out: BTreeMap<i64, FockState> = BTreeMap::new();
    for (m, c) in v.terms() {
        out.entry(m.degree()).or_default().add_term(m.clone(), c);
    }
    out
}

/// Applies a single mode.
pub fn apply_mode(m: Mode, v: &FockState) -> FockState {
    let mut out = FockState::zero();
    for (mono, c) in v.terms() {
        if m.is_creator() {
            out.add_term(mono.with(m), c);
        } else {
            let partner = match m.kind {
                ModeKind::P => Mode::q(m.index, -m.freq),
                ModeKind::Q => Mode::p(m.index, -m.freq),
            };
            if let Some((rest, k)) = mono.without(partner) {
                let s = mode_commutator(m, partner);
                out.add_term(rest, &(c * &s.scale_int(k as i64)));
            }
        }
    }
    out
}

/// All creator monomials of degree `<= max_degree` with at most `max_width`
/// factors, by width and then lexicographically in the mode order.
pub fn fock_basis(dim: usize, max_degree: u32, max_width: usize) -> Vec<CreatorMonomial> {
    let d = max_degree as i32;
    let mut creators = Vec::new();
    for i in 1..dim as u8 {
        for n in 0..=d {
            creators.push(Mode::q(i, n));
        }
    }
    for i in 1..dim as u8 {
        for n in 1..=d {
            creators.push(Mode::p(i, n));
        }
    }
    creators.sort_unstable();
    let mut out = vec![CreatorMonomial::vacuum()];
    fn rec(
        creators: &[Mode],
        start: usize,
        left: usize,
        budget: i32,
        cur: &mut Vec<Mode>,
        out: &mut Vec<CreatorMonomial>,
    ) {
        if left == 0 {
            out.push(CreatorMonomial(cur.iter().copied().collect()));
            return;
        }
        for k in start..creators.len() {
            let m = creators[k];
            if m.freq > budget {
                continue;
            }
            cur.push(m);
            rec(creators, k, left - 1, budget - m.freq, cur, out);
            cur.pop();
        }
    }
    for w in 1..=max_width {
        let mut cur = Vec::new();
        rec(&creators, 0, w, d, &mut cur, &mut out);
    }
    out
}

/// `d^order/dt^order q^index(t)`, `order <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopFactor {
    pub index: u8,
    pub order: u8,
}

/// `e^{i phase t}` times a product of loop factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopMonomial {
    pub phase: i32,
    pub factors: SmallVec<[LoopFactor; 6]>,
}

impl LoopMonomial {
    pub fn energy_offset(&self) -> i64 {
        -(self.phase as i64)
    }

    fn with_factor(&self, f: LoopFactor) -> Self {
        let mut v = self.factors.clone();
        let pos = v.partition_point(|x| *x <= f);
        v.insert(pos, f);
        LoopMonomial { phase: self.phase, factors: v }
    }
}

/// A polynomial in `q(t)`, its first two time derivatives, and phases.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoopPoly {
    terms: BTreeMap<LoopMonomial, Gq>,
}

impl LoopPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut p = Self::zero();
        p.add_term(LoopMonomial { phase: 0, factors: SmallVec::new() }, &Gq::one());
        p
    }

    /// `f(q(t))`: spatial coordinates become loop coordinates, `e(m)` the phase `e^{imt}`.
    pub fn from_function(f: &SpacetimeFunction) -> Self {
        let mut p = Self::zero();
        for (m, c) in f.terms() {
            let mut factors = SmallVec::new();
            for (k, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    factors.push(LoopFactor { index: (k + 1) as u8, order: 0 });
                }
            }
            p.add_term(LoopMonomial { phase: m.freq, factors }, c);
        }
        p
    }

    pub fn add_term(&mut self, m: LoopMonomial, c: &Gq) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Gq::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &LoopPoly) -> LoopPoly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c);
        }
        r
    }

    pub fn scale(&self, c: &Gq) -> LoopPoly {
        let mut r = LoopPoly::zero();
        for (m, v) in &self.terms {
            r.add_term(m.clone(), &(v * c));
        }
        r
    }

    /// Multiplies by `d^order q^index/dt^order`.
    pub fn times_factor(&self, index: u8, order: u8) -> LoopPoly {
        let f = LoopFactor { index, order };
        LoopPoly { terms: self.terms.iter().map(|(m, c)| (m.with_factor(f), c.clone())).collect() }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LoopMonomial, &Gq)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_phase(&self) -> u32 {
        self.terms.keys().map(|m| m.phase.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Which energy components of a loop expression to produce.
#[derive(Debug, Clone, Copy)]
pub enum EnergyWindow {
    Exactly(i64),
    AtMost(i64),
}

/// Time-derivative weight `(-in)^order` of the mode `q(n)` inside `d^order q/dt^order`.
fn derivative_weight(n: i64, order: u8) -> Option<Gq> {
    match order {
        0 => Some(Gq::one()),
        1 if n == 0 => None,
        1 => Some(Gq::imag(-n)),
        2 if n == 0 => None,
        2 => Some(Gq::from_int(-n * n)),
        _ => panic!("loop factor order above 2"),
    }
}

/// Applies the selected energy components of `c * lm` to the monomial `u`,
/// reporting `(energy, monomial, coefficient)` for every surviving term.
/// Finite by construction: annihilators are bounded by the `P` content of
/// `u`, creator energies by the window together with that content.
pub fn loop_apply(
    lm: &LoopMonomial,
    c: &Gq,
    u: &CreatorMonomial,
    window: EnergyWindow,
    out: &mut dyn FnMut(i64, CreatorMonomial, Gq),
) {
    let hi = match window {
        EnergyWindow::Exactly(e) | EnergyWindow::AtMost(e) => e,
    };
    struct Ctx<'a> {
        factors: &'a [LoopFactor],
        window: EnergyWindow,
        hi: i64,
    }
    fn rec(
        ctx: &Ctx,
        k: usize,
        acc: i64,
        u: CreatorMonomial,
        coeff: Gq,
        out: &mut dyn FnMut(i64, CreatorMonomial, Gq),
    ) {
        if k == ctx.factors.len() {
            let ok = match ctx.window {
                EnergyWindow::Exactly(e) => acc == e,
                EnergyWindow::AtMost(e) => acc <= e,
            };
            if ok {
                out(acc, u, coeff);
            }
            return;
        }
        let f = ctx.factors[k];
        let last = k + 1 == ctx.factors.len();
        // Annihilators: q^i(-e) removes a P_i(e).
        let mut seen: SmallVec<[i32; 8]> = SmallVec::new();
        for m in u.modes() {
            if m.kind != ModeKind::P || m.index != f.index || seen.contains(&m.freq) {
                continue;
            }
            seen.push(m.freq);
            let n = -(m.freq as i64);
            if last {
                if let EnergyWindow::Exactly(e) = ctx.window {
                    if acc + n != e {
                        continue;
                    }
                }
            }
            let Some(w) = derivative_weight(n, f.order) else { continue };
            let (rest, mult) = u.without(*m).unwrap();
            let c2 = (&coeff * &w).scale_int(-(mult as i64));
            rec(ctx, k + 1, acc + n, rest, c2, out);
        }
        // Creators q^i(n), n >= 0.
        let slack = ctx.hi - acc + u.p_energy();
        if slack < 0 {
            return;
        }
        let (lo, hi) = if last {
            match ctx.window {
                EnergyWindow::Exactly(e) => (e - acc, e - acc),
                EnergyWindow::AtMost(e) => (0, e - acc),
            }
        } else {
            (0, slack)
        };
        for n in lo.max(0)..=hi {
            let Some(w) = derivative_weight(n, f.order) else { continue };
            let m = Mode::q(f.index, n as i32);
            rec(ctx, k + 1, acc + n, u.with(m), &coeff * &w, out);
        }
    }
    let ctx = Ctx { factors: &lm.factors, window, hi };
    rec(&ctx, 0, lm.energy_offset(), u.clone(), c.clone(), out);
}

/// Applies `[F]_E` for every `E` in the window, grouped by energy.
pub fn loop_poly_apply(
    f: &LoopPoly,
    u: &CreatorMonomial,
    window: EnergyWindow,
) -> BTreeMap<i64, FockState> {
    let mut out: BTreeMap<i64, FockState> = BTreeMap::new();
    for (lm, c) in f.terms() {
        loop_apply(lm, c, u, window, &mut |e, m, v| out.entry(e).or_default().add_term(m, &v));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FockError {
    #[error("state degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: i64, cap: i64 },
    #[error("state width {width} exceeds the cap {cap}")]
    WidthCap { width: usize, cap: usize },
}

/// Degree and width caps for intermediate states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_degree: i64,
    pub max_width: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_degree: 64, max_width: 64 }
    }
}

impl Caps {
    pub fn check(&self, m: &CreatorMonomial) -> Result<(), FockError> {
        if m.degree() > self.max_degree {
            return Err(FockError::DegreeCap { degree: m.degree(), cap: self.max_degree });
        }
        if m.width() > self.max_width {
            return Err(FockError::WidthCap { width: m.width(), cap: self.max_width });
        }
        Ok(())
    }
}

/// `int dt :f p_j:` on a single monomial, normal ordered: `P_j(n <= 0)`
/// act first, `P_j(n > 0)` multiply last.
pub fn normal_apply_monomial(
    f: &LoopPoly,
    j: u8,
    u: &CreatorMonomial,
    out: &mut dyn FnMut(CreatorMonomial, Gq),
) {
    // P_j(-e) = d/dq^j(e) followed by [f]_e.
    let mut seen: SmallVec<[i32; 8]> = SmallVec::new();
    for m in u.modes() {
        if m.kind != ModeKind::Q || m.index != j || seen.contains(&m.freq) {
            continue;
        }
        seen.push(m.freq);
        let (rest, mult) = u.without(*m).unwrap();
        let e = m.freq as i64;
        let k = Gq::from_int(mult as i64);
        for (lm, c) in f.terms() {
            loop_apply(lm, &(c * &k), &rest, EnergyWindow::Exactly(e), &mut |_, w, v| out(w, v));
        }
    }
    // [f]_{-n} followed by P_j(n), n > 0.
    for (lm, c) in f.terms() {
        loop_apply(lm, c, u, EnergyWindow::AtMost(-1), &mut |e, w, v| {
            out(w.with(Mode::p(j, (-e) as i32)), v)
        });
    }
}

/// `int dt :f p_j:` applied to `v`, with the result checked against `caps`.
pub fn normal_apply(f: &LoopPoly, j: u8, v: &FockState, caps: &Caps) -> Result<FockState, FockError> {
    let mut r = FockState::zero();
    for (u, c) in v.terms() {
        normal_apply_monomial(f, j, u, &mut |w, x| r.add_term(w, &(&x * c)));
    }
    for (m, _) in r.terms() {
        caps.check(m)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(modes: &[Mode]) -> FockState {
        FockState::basis(CreatorMonomial::from_modes(modes))
    }

    #[test]
    fn commutators() {
        assert_eq!(mode_commutator(Mode::p(1, 2), Mode::q(1, -2)), Gq::one());
        assert_eq!(mode_commutator(Mode::q(1, -2), Mode::p(1, 2)), -Gq::one());
        assert!(mode_commutator(Mode::p(1, 2), Mode::q(2, -2)).is_zero());
        assert!(mode_commutator(Mode::q(1, 3), Mode::q(1, -3)).is_zero());
        assert!(mode_commutator(Mode::p(1, 3), Mode::p(1, -3)).is_zero());
    }

    #[test]
    fn single_modes() {
        assert_eq!(apply_mode(Mode::p(1, -2), &st(&[Mode::q(1, 2)])), FockState::vacuum());
        assert_eq!(apply_mode(Mode::q(1, 0), &FockState::vacuum()), st(&[Mode::q(1, 0)]));
        assert!(apply_mode(Mode::p(1, 0), &FockState::vacuum()).is_zero());
        assert_eq!(apply_mode(Mode::q(1, -3), &st(&[Mode::p(1, 3)])), FockState::vacuum().scaled(&-Gq::one()));
        let sq = st(&[Mode::q(1, 0), Mode::q(1, 0)]);
        assert_eq!(apply_mode(Mode::p(1, 0), &sq), st(&[Mode::q(1, 0)]).scaled(&Gq::from_int(2)));
    }

    #[test]
    fn degrees() {
        let g = grade(&st(&[Mode::q(1, 2), Mode::p(1, 3)]));
        assert_eq!(g.keys().copied().collect::<Vec<_>>(), vec![5]);
        assert_eq!(grade(&FockState::vacuum()).keys().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(grade(&st(&[Mode::q(1, 0)])).keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn basis_enumeration() {
        let b: Vec<String> = fock_basis(2, 1, 2).iter().map(|m| m.to_string()).collect();
        assert_eq!(b, ["1", "q1(0)", "q1(1)", "P1(1)", "q1(0)*q1(0)", "q1(0)*q1(1)", "q1(0)*P1(1)"]);
        assert_eq!(fock_basis(5, 0, 0).len(), 1);
        assert_eq!(fock_basis(3, 1, 1).len(), 7);
    }

    #[test]
    fn normal_ordered_currents() {
        let caps = Caps::default();
        let one = LoopPoly::one();
        let r = normal_apply(&one, 1, &st(&[Mode::q(1, 0)]), &caps).unwrap();
        assert_eq!(r, FockState::vacuum());
        let qdot = LoopPoly::one().times_factor(1, 1);
        assert!(normal_apply(&qdot, 1, &FockState::vacuum(), &caps).unwrap().is_zero());
        let q = LoopPoly::one().times_factor(1, 0);
        assert!(normal_apply(&q, 1, &FockState::vacuum(), &caps).unwrap().is_zero());
    }
}
