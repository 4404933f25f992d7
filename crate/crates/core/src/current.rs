//! Mode algebra of the currents `L(t)`, `T^mu_nu(t)`, `J^a(t)` and its
//! highest-weight modules.
//!
//! Modes are normalized by
//!
//! ```text
//! L(t) = (i/2pi) sum_m L_m e^{imt},  T(t) = (1/2pi) sum_m T_m e^{imt},  J(t) = (1/2pi) sum_m J_m e^{imt}
//! ```
//!
//! which turns the distributional brackets into
//!
//! ```text
//! [L_m, L_n]             = (m-n) L_{m+n} + c/12 (m^3-m) d_{m+n}
//! [L_m, T^mu_{nu,n}]     = -n T^mu_{nu,m+n} + k0/2 m^2 d^mu_nu d_{m+n}
//! [T^mu_{nu,m}, T^s_{t,n}] = d^s_nu T^mu_{t,m+n} - d^mu_t T^s_{nu,m+n} - m (k1 d^mu_t d^s_nu + k2 d^mu_nu d^s_t) d_{m+n}
//! [J^a_m, J^b_n]         = i f^{ab}_c J^c_{m+n} + k m d^{ab} d_{m+n}
//! [T^mu_{nu,m}, J^a_n]   = g'^a m d^mu_nu d_{m+n}
//! [L_m, J^a_n]           = -n J^a_{m+n} + g^a m^2 d_{m+n}
//! ```
//!
//! A mode labelled `m` lowers the energy by `m`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::fock::add_into;
use crate::scalar::GaussianRational as Gq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurrentError {
    #[error("invalid gauge algebra: {0}")]
    Gauge(String),
    #[error("charges violate f^ab_c g^c = 0")]
    Charges,
    #[error("highest weight: {0}")]
    Weight(String),
    #[error("mode index out of range: {0}")]
    Index(String),
    #[error("rewriting depth cap {0} exceeded")]
    Depth(usize),
    #[error("the trivial module requires all currents and central terms to vanish")]
    Trivial,
}

/// Finite-dimensional gauge algebra with `[J^a, J^b] = i f^{ab}_c J^c` and
/// Killing metric `delta^{ab}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeAlgebra {
    pub name: String,
    /// `f[a][b][c] = f^{ab}_c`.
    pub f: Vec<Vec<Vec<Gq>>>,
}

impl GaugeAlgebra {
    pub fn none() -> Self {
        GaugeAlgebra { name: "none".into(), f: Vec::new() }
    }

    pub fn abelian(d: usize) -> Self {
        GaugeAlgebra { name: format!("u1:{d}"), f: vec![vec![vec![Gq::zero(); d]; d]; d] }
    }

    /// `su(2)` in the basis where `f^{ab}_c = epsilon_{abc}`.
    pub fn sl2() -> Self {
        let mut f = vec![vec![vec![Gq::zero(); 3]; 3]; 3];
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            f[a][b][c] = Gq::one();
            f[b][a][c] = -Gq::one();
        }
        GaugeAlgebra { name: "sl2".into(), f }
    }

    pub fn from_table(name: &str, f: Vec<Vec<Vec<Gq>>>) -> Result<Self, CurrentError> {
        let g = GaugeAlgebra { name: name.into(), f };
        g.validate()?;
        Ok(g)
    }

    pub fn parse(s: &str) -> Result<Self, CurrentError> {
        match s {
            "none" => Ok(Self::none()),
            "sl2" => Ok(Self::sl2()),
            _ => {
                let d = s
                    .strip_prefix("u1:")
                    .or_else(|| s.strip_prefix("u1^"))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| CurrentError::Gauge(format!("unknown gauge algebra {s:?}")))?;
                Ok(Self::abelian(d))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn validate(&self) -> Result<(), CurrentError> {
        let d = self.dim();
        if self.f.iter().any(|r| r.len() != d || r.iter().any(|c| c.len() != d)) {
            return Err(CurrentError::Gauge("structure constant table is not d x d x d".into()));
        }
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    if self.f[a][b][c] != -&self.f[b][a][c] {
                        return Err(CurrentError::Gauge("structure constants not antisymmetric".into()));
                    }
                }
            }
        }
        // Jacobi: f^{ab}_e f^{ec}_g + cyclic = 0.
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for g in 0..d {
                        let mut s = Gq::zero();
                        for e in 0..d {
                            s += &(&self.f[a][b][e] * &self.f[e][c][g]);
                            s += &(&self.f[b][c][e] * &self.f[e][a][g]);
                            s += &(&self.f[c][a][e] * &self.f[e][b][g]);
                        }
                        if !s.is_zero() {
                            return Err(CurrentError::Gauge("structure constants violate Jacobi".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// True when `f^{ab}_c v^c = 0` for all `a, b`.
    pub fn annihilates(&self, v: &[Gq]) -> bool {
        let d = self.dim();
        (0..d).all(|a| {
            (0..d).all(|b| {
                let mut s = Gq::zero();
                for c in 0..d {
                    s += &(&self.f[a][b][c] * &v[c]);
                }
                s.is_zero()
            })
        })
    }
}

/// Central and gauge data of the current algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurrentParams {
    pub dim: usize,
    pub c: Gq,
    pub k0: Gq,
    pub k1: Gq,
    pub k2: Gq,
    pub gauge: GaugeAlgebra,
    pub k: Gq,
    pub g: Vec<Gq>,
    pub gprime: Vec<Gq>,
}

impl CurrentParams {
    pub fn new(
        dim: usize,
        c: Gq,
        k0: Gq,
        k1: Gq,
        k2: Gq,
        gauge: GaugeAlgebra,
        k: Gq,
        g: Vec<Gq>,
        gprime: Vec<Gq>,
    ) -> Result<Self, CurrentError> {
        gauge.validate()?;
        let d = gauge.dim();
        if g.len() != d || gprime.len() != d {
            return Err(CurrentError::Gauge(format!("expected {d} charges per family")));
        }
        if !gauge.annihilates(&g) || !gauge.annihilates(&gprime) {
            return Err(CurrentError::Charges);
        }
        Ok(CurrentParams { dim, c, k0, k1, k2, gauge, k, g, gprime })
    }

    /// All central terms zero, no gauge sector.
    pub fn zero(dim: usize) -> Self {
        Self::virasoro_gl(dim, Gq::zero(), Gq::zero(), Gq::zero(), Gq::zero())
    }

    pub fn virasoro_gl(dim: usize, c: Gq, k0: Gq, k1: Gq, k2: Gq) -> Self {
        CurrentParams {
            dim,
            c,
            k0,
            k1,
            k2,
            gauge: GaugeAlgebra::none(),
            k: Gq::zero(),
            g: Vec::new(),
            gprime: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
            && self.k0.is_zero()
            && self.k1.is_zero()
            && self.k2.is_zero()
            && self.k.is_zero()
            && self.g.iter().all(|x| x.is_zero())
            && self.gprime.iter().all(|x| x.is_zero())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurrentKind {
    L,
    /// `T^up_down`.
    T { up: u8, down: u8 },
    J(u8),
}

/// A current mode; central terms are returned as scalars by [`current_bracket`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurrentMode {
    pub kind: CurrentKind,
    pub freq: i32,
}

impl CurrentMode {
    pub fn l(freq: i32) -> Self {
        CurrentMode { kind: CurrentKind::L, freq }
    }

    pub fn t(up: u8, down: u8, freq: i32) -> Self {
        CurrentMode { kind: CurrentKind::T { up, down }, freq }
    }

    pub fn j(a: u8, freq: i32) -> Self {
        CurrentMode { kind: CurrentKind::J(a), freq }
    }

    pub fn validate(&self, p: &CurrentParams) -> Result<(), CurrentError> {
        match self.kind {
            CurrentKind::L => Ok(()),
            CurrentKind::T { up, down } if (up as usize) < p.dim && (down as usize) < p.dim => Ok(()),
            CurrentKind::J(a) if (a as usize) < p.gauge.dim() => Ok(()),
            _ => Err(CurrentError::Index(self.to_string())),
        }
    }
}

impl fmt::Display for CurrentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CurrentKind::L => write!(f, "L({})", self.freq),
            CurrentKind::T { up, down } => write!(f, "T{up}_{down}({})", self.freq),
            CurrentKind::J(a) => write!(f, "J{a}({})", self.freq),
        }
    }
}

/// `sum c_x x + central`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CurrentCombination {
    pub modes: BTreeMap<CurrentMode, Gq>,
    pub central: Gq,
}

impl CurrentCombination {
    fn push(&mut self, m: CurrentMode, c: Gq) {
        if c.is_zero() {
            return;
        }
        let e = self.modes.entry(m).or_insert_with(Gq::zero);
        *e += &c;
        if e.is_zero() {
            self.modes.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty() && self.central.is_zero()
    }

    pub fn add_scaled(&mut self, o: &CurrentCombination, c: &Gq) {
        for (m, v) in &o.modes {
            self.push(*m, v * c);
        }
        self.central += &(&o.central * c);
    }
}

fn kron(a: u8, b: u8) -> bool {
    a == b
}

/// The mode bracket `[x, y]`.
pub fn current_bracket(x: CurrentMode, y: CurrentMode, p: &CurrentParams) -> Result<CurrentCombination, CurrentError> {
    x.validate(p)?;
    y.validate(p)?;
    Ok(bracket_unchecked(x, y, p))
}

fn bracket_unchecked(x: CurrentMode, y: CurrentMode, p: &CurrentParams) -> CurrentCombination {
    use CurrentKind::*;
    let (m, n) = (x.freq, y.freq);
    let s = m + n;
    let zero_sum = s == 0;
    let mi = m as i64;
    let mut r = CurrentCombination::default();
    match (x.kind, y.kind) {
        (L, L) => {
            r.push(CurrentMode::l(s), Gq::from_int((m - n) as i64));
            if zero_sum {
                r.central = &p.c * &Gq::ratio(mi * mi * mi - mi, 12);
            }
        }
        (L, T { up, down }) => {
            r.push(CurrentMode::t(up, down, s), Gq::from_int(-(n as i64)));
            if zero_sum && kron(up, down) {
                r.central = &p.k0 * &Gq::ratio(mi * mi, 2);
            }
        }
        (T { .. }, L) => {
            r = bracket_unchecked(y, x, p);
            negate(&mut r);
        }
        (T { up: mu, down: nu }, T { up: sg, down: tau }) => {
            if kron(sg, nu) {
                r.push(CurrentMode::t(mu, tau, s), Gq::one());
            }
            if kron(mu, tau) {
                r.push(CurrentMode::t(sg, nu, s), -Gq::one());
            }
            if zero_sum {
                let mut c = Gq::zero();
                if kron(mu, tau) && kron(sg, nu) {
                    c += &p.k1;
                }
                if kron(mu, nu) && kron(sg, tau) {
                    c += &p.k2;
                }
                r.central = c.scale_int(-mi);
            }
        }
        (J(a), J(b)) => {
            for c in 0..p.gauge.dim() {
                let f = &p.gauge.f[a as usize][b as usize][c];
                if !f.is_zero() {
                    r.push(CurrentMode::j(c as u8, s), f.mul_i());
                }
            }
            if zero_sum && a == b {
                r.central = p.k.scale_int(mi);
            }
        }
        (T { up, down }, J(a)) => {
            if zero_sum && kron(up, down) {
                r.central = p.gprime[a as usize].scale_int(mi);
            }
        }
        (J(_), T { .. }) => {
            r = bracket_unchecked(y, x, p);
            negate(&mut r);
        }
        (L, J(a)) => {
            r.push(CurrentMode::j(a, s), Gq::from_int(-(n as i64)));
            if zero_sum {
                r.central = p.g[a as usize].scale_int(mi * mi);
            }
        }
        (J(_), L) => {
            r = bracket_unchecked(y, x, p);
            negate(&mut r);
        }
    }
    r
}

fn negate(r: &mut CurrentCombination) {
    for v in r.modes.values_mut() {
        *v = -&*v;
    }
    r.central = -&r.central;
}

/// All modes with `|freq| <= window`.
pub fn all_modes(p: &CurrentParams, window: u32) -> Vec<CurrentMode> {
    let w = window as i32;
    let mut kinds = vec![CurrentKind::L];
    for up in 0..p.dim as u8 {
        for down in 0..p.dim as u8 {
            kinds.push(CurrentKind::T { up, down });
        }
    }
    for a in 0..p.gauge.dim() as u8 {
        kinds.push(CurrentKind::J(a));
    }
    let mut out = Vec::new();
    for kind in kinds {
        for freq in -w..=w {
            out.push(CurrentMode { kind, freq });
        }
    }
    out
}

fn bracket_combination(x: &CurrentCombination, z: CurrentMode, p: &CurrentParams) -> CurrentCombination {
    let mut r = CurrentCombination::default();
    for (m, c) in &x.modes {
        r.add_scaled(&bracket_unchecked(*m, z, p), c);
    }
    r
}

/// Triples `(x, y, z)` in the window whose Jacobi sum is nonzero, together
/// with the number of triples checked.
pub fn jacobi_failures(p: &CurrentParams, window: u32) -> (usize, Vec<(CurrentMode, CurrentMode, CurrentMode)>) {
    let modes = all_modes(p, window);
    let mut bad = Vec::new();
    let mut count = 0;
    for (i, &x) in modes.iter().enumerate() {
        for (j, &y) in modes.iter().enumerate().skip(i) {
            for &z in modes.iter().skip(j) {
                count += 1;
                let mut s = bracket_combination(&bracket_unchecked(x, y, p), z, p);
                s.add_scaled(&bracket_combination(&bracket_unchecked(y, z, p), x, p), &Gq::one());
                s.add_scaled(&bracket_combination(&bracket_unchecked(z, x, p), y, p), &Gq::one());
                if !s.is_zero() {
                    bad.push((x, y, z));
                }
            }
        }
    }
    (count, bad)
}

/// Character of the highest-weight vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HighestWeight {
    pub h: Gq,
    pub lambda: Gq,
    pub mu: Vec<Gq>,
}

impl HighestWeight {
    pub fn new(h: Gq, lambda: Gq, mu: Vec<Gq>, p: &CurrentParams) -> Result<Self, CurrentError> {
        if mu.len() != p.gauge.dim() {
            return Err(CurrentError::Weight(format!("expected {} gauge weights", p.gauge.dim())));
        }
        // mu must vanish on [g, g]: mu_c f^{ab}_c = 0.
        if !p.gauge.annihilates(&mu) {
            return Err(CurrentError::Weight("gauge character does not vanish on the derived algebra".into()));
        }
        Ok(HighestWeight { h, lambda, mu })
    }

    pub fn zero(p: &CurrentParams) -> Self {
        HighestWeight { h: Gq::zero(), lambda: Gq::zero(), mu: vec![Gq::zero(); p.gauge.dim()] }
    }

    fn zero_mode_value(&self, x: CurrentMode) -> Gq {
        match x.kind {
            CurrentKind::L => self.h.clone(),
            CurrentKind::T { up, down } if up == down => self.lambda.clone(),
            CurrentKind::T { .. } => Gq::zero(),
            CurrentKind::J(a) => self.mu[a as usize].clone(),
        }
    }
}

/// Word `y_1 y_2 ... y_k` of negative modes with `y_1 <= ... <= y_k`,
/// standing for `y_1 ... y_k v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PbwMonomial(pub SmallVec<[CurrentMode; 4]>);

impl PbwMonomial {
    pub fn empty() -> Self {
        PbwMonomial(SmallVec::new())
    }

    pub fn degree(&self) -> i64 {
        -self.0.iter().map(|m| m.freq as i64).sum::<i64>()
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn is_canonical(&self) -> bool {
        self.0.iter().all(|m| m.freq < 0) && self.0.windows(2).all(|w| w[0] <= w[1])
    }
}

impl fmt::Display for PbwMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "v");
        }
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}*v", parts.join("*"))
    }
}

/// Finite combination of PBW monomials.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InducedState {
    terms: FxHashMap<PbwMonomial, Gq>,
}

impl InducedState {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn highest() -> Self {
        Self::basis(PbwMonomial::empty())
    }

    pub fn basis(m: PbwMonomial) -> Self {
        let mut s = Self::zero();
        s.add_term(m, &Gq::one());
        s
    }

    pub fn add_term(&mut self, m: PbwMonomial, c: &Gq) {
        add_into(&mut self.terms, m, c);
    }

    pub fn add_scaled(&mut self, o: &InducedState, c: &Gq) {
        for (m, v) in &o.terms {
            self.add_term(m.clone(), &(v * c));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PbwMonomial, &Gq)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &PbwMonomial) -> Gq {
        self.terms.get(m).cloned().unwrap_or_else(Gq::zero)
    }
}

/// The module on which the currents act: either the trivial one-dimensional
/// module or the module induced from a character.
#[derive(Debug)]
pub struct InducedModule {
    params: CurrentParams,
    weight: HighestWeight,
    trivial: bool,
    depth_cap: usize,
    memo: RwLock<FxHashMap<(CurrentMode, PbwMonomial), InducedState>>,
}

impl Clone for InducedModule {
    fn clone(&self) -> Self {
        InducedModule {
            params: self.params.clone(),
            weight: self.weight.clone(),
            trivial: self.trivial,
            depth_cap: self.depth_cap,
            memo: RwLock::new(FxHashMap::default()),
        }
    }
}

impl InducedModule {
    pub fn induced(params: CurrentParams, weight: HighestWeight) -> Result<Self, CurrentError> {
        if weight.mu.len() != params.gauge.dim() {
            return Err(CurrentError::Weight("gauge weight length mismatch".into()));
        }
        Ok(InducedModule { params, weight, trivial: false, depth_cap: 10_000, memo: RwLock::new(FxHashMap::default()) })
    }

    /// All currents act by zero; requires vanishing central terms.
    pub fn trivial(params: CurrentParams) -> Result<Self, CurrentError> {
        if !params.is_zero() {
            return Err(CurrentError::Trivial);
        }
        let weight = HighestWeight::zero(&params);
        Ok(InducedModule { params, weight, trivial: true, depth_cap: 10_000, memo: RwLock::new(FxHashMap::default()) })
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    pub fn params(&self) -> &CurrentParams {
        &self.params
    }

    pub fn weight(&self) -> &HighestWeight {
        &self.weight
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    /// PBW monomials of degree `<= max_degree` and width `<= max_width`, by
    /// width and then in monomial order.
    pub fn basis(&self, max_degree: u32, max_width: usize) -> Vec<PbwMonomial> {
        if self.trivial {
            return vec![PbwMonomial::empty()];
        }
        let d = max_degree as i32;
        let mut gens: Vec<CurrentMode> = all_modes(&self.params, max_degree).into_iter().filter(|m| m.freq < 0).collect();
        gens.sort_unstable();
        let mut out = vec![PbwMonomial::empty()];
        fn rec(gens: &[CurrentMode], start: usize, left: usize, budget: i32, cur: &mut Vec<CurrentMode>, out: &mut Vec<PbwMonomial>) {
            if left == 0 {
                out.push(PbwMonomial(cur.iter().copied().collect()));
                return;
            }
            for k in start..gens.len() {
                let m = gens[k];
                if -m.freq > budget {
                    continue;
                }
                cur.push(m);
                rec(gens, k, left - 1, budget + m.freq, cur, out);
                cur.pop();
            }
        }
        for w in 1..=max_width {
            let mut cur = Vec::new();
            rec(&gens, 0, w, d, &mut cur, &mut out);
        }
        out
    }

    /// `x` applied to the basis vector `w`.
    pub fn apply_monomial(&self, x: CurrentMode, w: &PbwMonomial) -> Result<InducedState, CurrentError> {
        x.validate(&self.params)?;
        if self.trivial {
            return Ok(InducedState::zero());
        }
        if let Some(r) = self.memo.read().unwrap().get(&(x, w.clone())) {
            return Ok(r.clone());
        }
        let r = self.straighten(x, w, 0)?;
        self.memo.write().unwrap().insert((x, w.clone()), r.clone());
        Ok(r)
    }

    fn straighten(&self, x: CurrentMode, w: &PbwMonomial, depth: usize) -> Result<InducedState, CurrentError> {
        if depth > self.depth_cap {
            return Err(CurrentError::Depth(self.depth_cap));
        }
        let Some(&y) = w.0.first() else {
            return Ok(match x.freq {
                f if f > 0 => InducedState::zero(),
                0 => {
                    let mut s = InducedState::zero();
                    s.add_term(PbwMonomial::empty(), &self.weight.zero_mode_value(x));
                    s
                }
                _ => InducedState::basis(PbwMonomial(SmallVec::from_slice(&[x]))),
            });
        };
        if x.freq < 0 && x <= y {
            let mut v = w.0.clone();
            v.insert(0, x);
            return Ok(InducedState::basis(PbwMonomial(v)));
        }
        let rest = PbwMonomial(SmallVec::from_slice(&w.0[1..]));
        // x y rest = y (x rest) + [x, y] rest
        let inner = self.straighten(x, &rest, depth + 1)?;
        let mut out = InducedState::zero();
        for (u, c) in inner.terms() {
            let s = self.straighten(y, u, depth + 1)?;
            out.add_scaled(&s, c);
        }
        let br = bracket_unchecked(x, y, &self.params);
        for (m, c) in &br.modes {
            let s = self.straighten(*m, &rest, depth + 1)?;
            out.add_scaled(&s, c);
        }
        if !br.central.is_zero() {
            out.add_term(rest, &br.central);
        }
        Ok(out)
    }

    /// `x` applied to a state.
    pub fn induce_apply(&self, x: CurrentMode, v: &InducedState) -> Result<InducedState, CurrentError> {
        let mut out = InducedState::zero();
        for (w, c) in v.terms() {
            out.add_scaled(&self.apply_monomial(x, w)?, c);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Gq {
        s.parse().unwrap()
    }

    fn params() -> CurrentParams {
        CurrentParams::virasoro_gl(2, q("1/2"), q("2"), q("3"), q("-1"))
    }

    #[test]
    fn virasoro_brackets() {
        let p = params();
        let r = current_bracket(CurrentMode::l(2), CurrentMode::l(-2), &p).unwrap();
        assert_eq!(r.modes.get(&CurrentMode::l(0)), Some(&q("4")));
        assert_eq!(r.central, q("1/4"));
        let r = current_bracket(CurrentMode::t(1, 2, 0), CurrentMode::t(2, 1, 0), &CurrentParams::zero(3)).unwrap();
        let expect: BTreeMap<_, _> = [(CurrentMode::t(1, 1, 0), q("1")), (CurrentMode::t(2, 2, 0), q("-1"))].into_iter().collect();
        assert_eq!(r.modes, expect);
        assert!(r.central.is_zero());
    }

    #[test]
    fn gauge_validation() {
        let p = CurrentParams::new(2, q("0"), q("0"), q("0"), q("0"), GaugeAlgebra::sl2(), q("1"), vec![q("1"), q("0"), q("0")], vec![q("0"); 3]);
        assert_eq!(p.unwrap_err(), CurrentError::Charges);
        assert!(GaugeAlgebra::sl2().validate().is_ok());
    }

    #[test]
    fn highest_weight_actions() {
        let p = params();
        let hw = HighestWeight::new(q("3/7"), q("1"), vec![], &p).unwrap();
        let m = InducedModule::induced(p, hw).unwrap();
        let v1 = m.induce_apply(CurrentMode::l(-1), &InducedState::highest()).unwrap();
        let r = m.induce_apply(CurrentMode::l(1), &v1).unwrap();
        assert_eq!(r, { let mut s = InducedState::zero(); s.add_term(PbwMonomial::empty(), &q("6/7")); s });
        let v2 = m.induce_apply(CurrentMode::l(-2), &InducedState::highest()).unwrap();
        let r = m.induce_apply(CurrentMode::l(2), &v2).unwrap();
        assert_eq!(r.coefficient(&PbwMonomial::empty()), q("12/7") + q("1/4"));
        assert!(m.induce_apply(CurrentMode::t(0, 1, 1), &InducedState::highest()).unwrap().is_zero());
    }

    #[test]
    fn jacobi_small_window() {
        let (n, bad) = jacobi_failures(&params(), 2);
        assert!(n > 0);
        assert!(bad.is_empty());
    }
}
