//! Functions on `R^{N-1} x S^1` that are polynomial in space and Fourier
//! polynomials in time, together with vector fields and tensor arguments.
//!
//! Text syntax: terms such as `3/2*e(2)*x1^2*x2` joined by `+`/`-`, where
//! `e(m)` is `exp(i m x0)`. Complex coefficients with both parts are
//! parenthesized, e.g. `(1+i)*x1`. Vector field components are separated by
//! `;`. The time coordinate `x0` may only appear through phases.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use crate::scalar::GaussianRational as Gq;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpacetimeError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("index {index} out of range for N = {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("polynomial dependence on x0 is not supported: {0:?}")]
    TimePolynomial(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Exps = SmallVec<[u16; 4]>;

/// A spatial monomial `x^a` times the phase `e(freq)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub exps: Exps,
    pub freq: i32,
}

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial { exps: SmallVec::from_elem(0, dim - 1), freq: 0 }
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&o.exps).map(|(a, b)| a + b).collect(),
            freq: self.freq + o.freq,
        }
    }

    fn write_factors(&self, out: &mut Vec<String>) {
        if self.freq != 0 {
            out.push(format!("e({})", self.freq));
        }
        for (k, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => out.push(format!("x{}", k + 1)),
                _ => out.push(format!("x{}^{}", k + 1, e)),
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        self.write_factors(&mut parts);
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Finite sum of `c * x^a * e(m)` in dimension `N` (one time, `N-1` space).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpacetimeFunction {
    dim: usize,
    terms: BTreeMap<Monomial, Gq>,
}

impl SpacetimeFunction {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SpacetimeFunction { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Gq) -> Self {
        Self::term(dim, Monomial::one(dim), c)
    }

    pub fn term(dim: usize, m: Monomial, c: Gq) -> Self {
        assert_eq!(m.exps.len() + 1, dim, "monomial arity does not match dimension");
        let mut f = Self::zero(dim);
        if !c.is_zero() {
            f.terms.insert(m, c);
        }
        f
    }

    /// `x^exps * e(freq)` with unit coefficient.
    pub fn monomial(dim: usize, exps: &[u16], freq: i32) -> Self {
        Self::term(dim, Monomial { exps: exps.iter().copied().collect(), freq }, Gq::one())
    }

    pub fn phase(dim: usize, freq: i32) -> Self {
        let mut m = Monomial::one(dim);
        m.freq = freq;
        Self::term(dim, m, Gq::one())
    }

    /// The spatial coordinate `x^i`, `1 <= i < N`.
    pub fn coordinate(dim: usize, i: usize) -> Result<Self, SpacetimeError> {
        if i == 0 || i >= dim {
            return Err(SpacetimeError::IndexOutOfRange { index: i, dim });
        }
        let mut m = Monomial::one(dim);
        m.exps[i - 1] = 1;
        Ok(Self::term(dim, m, Gq::one()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Gq)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Gq {
        self.terms.get(m).cloned().unwrap_or_else(Gq::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &Gq) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    fn check_dim(&self, o: &Self) -> Result<(), SpacetimeError> {
        if self.dim != o.dim {
            Err(SpacetimeError::DimensionMismatch(self.dim, o.dim))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, SpacetimeError> {
        self.check_dim(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c);
        }
        Ok(r)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, SpacetimeError> {
        self.check_dim(o)?;
        let mut r = Self::zero(self.dim);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        Ok(r)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("dimension mismatch")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("dimension mismatch")
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Gq::one())
    }

    pub fn scale(&self, c: &Gq) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        SpacetimeFunction {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Exact `d/dx^mu`; `d_0` multiplies each term by `i m`.
    pub fn partial(&self, mu: usize) -> Result<Self, SpacetimeError> {
        if mu >= self.dim {
            return Err(SpacetimeError::IndexOutOfRange { index: mu, dim: self.dim });
        }
        let mut r = Self::zero(self.dim);
        for (m, c) in &self.terms {
            if mu == 0 {
                r.add_term(m.clone(), &(c * &Gq::imag(m.freq as i64)));
            } else {
                let e = m.exps[mu - 1];
                if e > 0 {
                    let mut m2 = m.clone();
                    m2.exps[mu - 1] = e - 1;
                    r.add_term(m2, &c.scale_int(e as i64));
                }
            }
        }
        Ok(r)
    }

    /// Panicking form of [`partial`](Self::partial) for internal use with checked indices.
    pub fn d(&self, mu: usize) -> Self {
        self.partial(mu).expect("derivative index out of range")
    }

    pub fn max_abs_freq(&self) -> u32 {
        self.terms.keys().map(|m| m.freq.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn spatial_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// True when no term depends on the spatial coordinates.
    pub fn is_time_only(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Parses the text syntax in dimension `dim`.
    pub fn parse(s: &str, dim: usize) -> Result<Self, SpacetimeError> {
        parse_function(s, dim)
    }
}

fn coeff_text(c: &Gq) -> String {
    if !c.is_real() && !c.is_imaginary() {
        format!("({c})")
    } else {
        c.to_string()
    }
}

fn term_text(m: &Monomial, c: &Gq) -> String {
    let mut parts = Vec::new();
    m.write_factors(&mut parts);
    if parts.is_empty() {
        return coeff_text(c);
    }
    let body = parts.join("*");
    if c.is_one() {
        body
    } else if (-c).is_one() {
        format!("-{body}")
    } else {
        format!("{}*{}", coeff_text(c), body)
    }
}

impl fmt::Display for SpacetimeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let t = term_text(m, c);
            if k == 0 {
                write!(f, "{t}")?;
            } else if let Some(rest) = t.strip_prefix('-') {
                write!(f, " - {rest}")?;
            } else {
                write!(f, " + {t}")?;
            }
        }
        Ok(())
    }
}

fn split_top_level(s: &str, seps: &[char]) -> Vec<(char, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = '+';
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            c if depth == 0 && seps.contains(&c) => {
                out.push((sign, std::mem::take(&mut cur)));
                sign = c;
            }
            c => cur.push(c),
        }
    }
    out.push((sign, cur));
    out
}

fn parse_function(s: &str, dim: usize) -> Result<SpacetimeFunction, SpacetimeError> {
    let err = || SpacetimeError::Parse(s.to_string());
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(err());
    }
    let mut f = SpacetimeFunction::zero(dim);
    let pieces = split_top_level(&compact, &['+', '-']);
    for (idx, (sign, body)) in pieces.into_iter().enumerate() {
        if body.is_empty() {
            // Only a leading sign may produce an empty first piece.
            if idx == 0 {
                continue;
            }
            return Err(err());
        }
        let mut coeff = if sign == '-' { -Gq::one() } else { Gq::one() };
        let mut mono = Monomial::one(dim);
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(err());
            }
            if let Some(inner) = factor.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
                let c: Gq = inner.parse().map_err(|_| err())?;
                coeff = &coeff * &c;
            } else if let Some(inner) = factor.strip_prefix("e(").and_then(|t| t.strip_suffix(')')) {
                let m: i32 = inner.parse().map_err(|_| err())?;
                mono.freq += m;
            } else if let Some(rest) = factor.strip_prefix('x') {
                let (idx, pow) = match rest.split_once('^') {
                    Some((a, b)) => (a, b.parse::<u16>().map_err(|_| err())?),
                    None => (rest, 1),
                };
                let k: usize = idx.parse().map_err(|_| err())?;
                if k == 0 {
                    return Err(SpacetimeError::TimePolynomial(s.to_string()));
                }
                if k >= dim {
                    return Err(SpacetimeError::IndexOutOfRange { index: k, dim });
                }
                mono.exps[k - 1] += pow;
            } else if factor == "i" {
                coeff = coeff.mul_i();
            } else {
                let c: Gq = factor.parse().map_err(|_| err())?;
                coeff = &coeff * &c;
            }
        }
        f.add_term(mono, &coeff);
    }
    Ok(f)
}

/// `xi = xi^mu d_mu` with `N` components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VectorField {
    comps: Vec<SpacetimeFunction>,
}

impl VectorField {
    pub fn new(comps: Vec<SpacetimeFunction>) -> Result<Self, SpacetimeError> {
        let dim = comps.len();
        if dim == 0 {
            return Err(SpacetimeError::Parse("empty vector field".into()));
        }
        for c in &comps {
            if c.dim() != dim {
                return Err(SpacetimeError::DimensionMismatch(dim, c.dim()));
            }
        }
        Ok(VectorField { comps })
    }

    pub fn zero(dim: usize) -> Self {
        VectorField { comps: vec![SpacetimeFunction::zero(dim); dim] }
    }

    /// `f d_mu`.
    pub fn along(mu: usize, f: SpacetimeFunction) -> Self {
        let dim = f.dim();
        assert!(mu < dim, "component index out of range");
        let mut v = Self::zero(dim);
        v.comps[mu] = f;
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, mu: usize) -> &SpacetimeFunction {
        &self.comps[mu]
    }

    pub fn comps(&self) -> &[SpacetimeFunction] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dim(), o.dim(), "dimension mismatch");
        VectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Gq::one()))
    }

    pub fn scale(&self, c: &Gq) -> Self {
        VectorField { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    /// `xi^mu d_mu f`.
    pub fn apply(&self, f: &SpacetimeFunction) -> SpacetimeFunction {
        let mut r = SpacetimeFunction::zero(self.dim());
        for (mu, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                r = r.add(&c.mul(&f.d(mu)));
            }
        }
        r
    }

    /// `d_mu xi^mu`.
    pub fn divergence(&self) -> SpacetimeFunction {
        let mut r = SpacetimeFunction::zero(self.dim());
        for (mu, c) in self.comps.iter().enumerate() {
            r = r.add(&c.d(mu));
        }
        r
    }

    pub fn try_lie_bracket(&self, o: &Self) -> Result<Self, SpacetimeError> {
        if self.dim() != o.dim() {
            return Err(SpacetimeError::DimensionMismatch(self.dim(), o.dim()));
        }
        Ok(VectorField {
            comps: (0..self.dim())
                .map(|nu| self.apply(&o.comps[nu]).sub(&o.apply(&self.comps[nu])))
                .collect(),
        })
    }

    /// `[xi, eta]^nu = xi^mu d_mu eta^nu - eta^mu d_mu xi^nu`.
    pub fn lie_bracket(&self, o: &Self) -> Self {
        self.try_lie_bracket(o).expect("dimension mismatch")
    }

    pub fn max_abs_freq(&self) -> u32 {
        self.comps.iter().map(|c| c.max_abs_freq()).max().unwrap_or(0)
    }

    /// Splits into single-term basis fields `c * x^a e(m) d_mu`.
    pub fn basis_terms(&self) -> Vec<(usize, Monomial, Gq)> {
        let mut out = Vec::new();
        for (mu, c) in self.comps.iter().enumerate() {
            for (m, v) in c.terms() {
                out.push((mu, m.clone(), v.clone()));
            }
        }
        out
    }

    pub fn parse(s: &str, dim: usize) -> Result<Self, SpacetimeError> {
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != dim {
            return Err(SpacetimeError::DimensionMismatch(dim, parts.len()));
        }
        let comps = parts
            .iter()
            .map(|p| SpacetimeFunction::parse(p, dim))
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(comps)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" ; "))
    }
}

/// Argument of `S_n`: a totally symmetric rank-`n` tensor of functions,
/// stored on sorted index tuples only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymTensorArg {
    dim: usize,
    rank: usize,
    entries: BTreeMap<Vec<u8>, SpacetimeFunction>,
}

impl SymTensorArg {
    pub fn new(dim: usize, rank: usize) -> Self {
        SymTensorArg { dim, rank, entries: BTreeMap::new() }
    }

    /// Adds `f` to the entry at `indices` (sorted internally).
    pub fn insert(&mut self, indices: &[u8], f: SpacetimeFunction) {
        assert_eq!(indices.len(), self.rank, "rank mismatch");
        assert!(indices.iter().all(|&i| (i as usize) < self.dim), "index out of range");
        let mut key = indices.to_vec();
        key.sort_unstable();
        let e = self.entries.entry(key).or_insert_with(|| SpacetimeFunction::zero(self.dim));
        *e = e.add(&f);
    }

    pub fn get(&self, indices: &[u8]) -> SpacetimeFunction {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.entries.get(&key).cloned().unwrap_or_else(|| SpacetimeFunction::zero(self.dim))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u8>, &SpacetimeFunction)> {
        self.entries.iter()
    }
}

/// Argument of `R_n`: distinguished index `rho` plus a symmetric block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedTensorArg {
    dim: usize,
    rank: usize,
    entries: BTreeMap<(u8, Vec<u8>), SpacetimeFunction>,
}

impl MixedTensorArg {
    pub fn new(dim: usize, rank: usize) -> Self {
        MixedTensorArg { dim, rank, entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, rho: u8, indices: &[u8], f: SpacetimeFunction) {
        assert_eq!(indices.len(), self.rank, "rank mismatch");
        assert!((rho as usize) < self.dim, "index out of range");
        assert!(indices.iter().all(|&i| (i as usize) < self.dim), "index out of range");
        let mut key = indices.to_vec();
        key.sort_unstable();
        let e = self.entries.entry((rho, key)).or_insert_with(|| SpacetimeFunction::zero(self.dim));
        *e = e.add(&f);
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u8, Vec<u8>), &SpacetimeFunction)> {
        self.entries.iter()
    }
}

/// Spatial exponent vectors of total degree `<= deg` in `vars` variables:
/// by total degree, then with higher powers of earlier coordinates first.
pub fn spatial_exponents(vars: usize, deg: u32) -> Vec<Exps> {
    fn rec(vars: usize, left: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if cur.len() == vars {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() + 1 == vars {
            cur.push(left as u16);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u16);
            rec(vars, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=deg {
        let mut cur = Exps::new();
        if vars == 0 {
            if d == 0 {
                out.push(cur);
            }
            continue;
        }
        rec(vars, d, &mut cur, &mut out);
    }
    out
}

/// The probe monomials `x^a e(m)`: spatial monomials in the order of
/// [`spatial_exponents`], frequencies ascending from `-max_frequency`.
pub fn probe_functions(dim: usize, max_spatial_degree: u32, max_frequency: u32) -> Vec<SpacetimeFunction> {
    let mut out = Vec::new();
    let f = max_frequency as i32;
    for exps in spatial_exponents(dim - 1, max_spatial_degree) {
        for m in -f..=f {
            out.push(SpacetimeFunction::monomial(dim, &exps, m));
        }
    }
    out
}

/// Basis fields `x^a e(m) d_mu`, enumerated as [`probe_functions`] with the
/// component index innermost.
pub fn probe_basis(dim: usize, max_spatial_degree: u32, max_frequency: u32) -> Vec<VectorField> {
    let mut out = Vec::new();
    for f in probe_functions(dim, max_spatial_degree, max_frequency) {
        for mu in 0..dim {
            out.push(VectorField::along(mu, f.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(s: &str, dim: usize) -> SpacetimeFunction {
        SpacetimeFunction::parse(s, dim).unwrap()
    }

    fn vf(s: &str, dim: usize) -> VectorField {
        VectorField::parse(s, dim).unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(sf("e(1)*x1", 2).mul(&sf("x1", 2)), sf("x1^2*e(1)", 2));
        assert!(sf("e(1)*x1", 2).mul(&SpacetimeFunction::zero(2)).is_zero());
        assert_eq!(sf("e(1)", 2).mul(&sf("e(-1)", 2)), sf("1", 2));
        assert!(sf("x1", 2).try_mul(&sf("x1", 3)).is_err());
    }

    #[test]
    fn partials() {
        assert_eq!(sf("e(3)", 2).d(0), sf("3*i*e(3)", 2));
        assert_eq!(sf("x1^2", 2).d(1), sf("2*x1", 2));
        assert!(sf("x1", 3).d(2).is_zero());
        assert!(sf("x1", 2).partial(2).is_err());
    }

    #[test]
    fn brackets() {
        assert_eq!(vf("0 ; x1", 2).lie_bracket(&vf("0 ; 1", 2)), vf("0 ; -1", 2));
        let m = 2;
        let n = -3;
        let a = VectorField::along(0, SpacetimeFunction::phase(2, m));
        let b = VectorField::along(0, SpacetimeFunction::phase(2, n));
        let expect = VectorField::along(0, SpacetimeFunction::phase(2, m + n).scale(&Gq::imag((n - m) as i64)));
        assert_eq!(a.lie_bracket(&b), expect);
        let x = vf("e(1)*x1^2 ; x1 - 2*e(-2)", 2);
        assert!(x.lie_bracket(&x).is_zero());
    }

    #[test]
    fn probe_counts() {
        let b = probe_basis(2, 0, 0);
        assert_eq!(b, vec![vf("1 ; 0", 2), vf("0 ; 1", 2)]);
        assert_eq!(probe_basis(2, 1, 0).len(), 4);
        assert_eq!(probe_basis(3, 0, 1).len(), 9);
        assert_eq!(probe_basis(2, 2, 2).len(), 30);
        assert_eq!(probe_basis(3, 2, 2).len(), 90);
        let ex = spatial_exponents(2, 2);
        let txt: Vec<String> = ex.iter().map(|e| Monomial { exps: e.clone(), freq: 0 }.to_string()).collect();
        assert_eq!(txt, ["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"]);
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "0",
            "1",
            "e(2)*x1^2",
            "-x1 + 3/2*e(-1)",
            "(1/2-i)*e(1)*x1*x2 - i*x2^3",
            "-1/3*i",
        ] {
            let f = sf(s, 3);
            assert_eq!(sf(&f.to_string(), 3), f);
        }
        assert_eq!(vf("e(2)*x1^2 ; x1*x2 ; 0", 3).to_string(), "e(2)*x1^2 ; x1*x2 ; 0");
        assert!(matches!(SpacetimeFunction::parse("x0*x1", 2), Err(SpacetimeError::TimePolynomial(_))));
        assert!(SpacetimeFunction::parse("x3", 3).is_err());
        assert!(SpacetimeFunction::parse("x1 +", 2).is_err());
    }
}
