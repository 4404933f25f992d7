use std::collections::BTreeMap;

use rand::Rng;
use smallvec::SmallVec;

use super::{random_scalar, Counterexample, ProbeSpec, Report};
use crate::scalar::GaussianRational as Gq;
use crate::spacetime::{probe_functions, SpacetimeFunction, VectorField};

// ---------------------------------------------------------------------------
// Positive and negative energy parts of the delta function

/// The three product identities for `d+(t) = sum_{m>0} e^{-imt}` and
/// `d-(t) = sum_{n<=0} e^{-int}` (both up to `1/2pi`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaIdentity {
    I,
    II,
    III,
}

/// One product `c * d+^{(a)}(s t) * d-^{(b)}(-s t)`.
struct Product {
    sign: i64,
    plus_order: u32,
    minus_order: u32,
    /// `+1` for `d+(t) d-(-t)`, `-1` for `d+(-t) d-(t)`.
    orientation: i64,
}

impl DeltaIdentity {
    pub const ALL: [DeltaIdentity; 3] = [DeltaIdentity::I, DeltaIdentity::II, DeltaIdentity::III];

    pub fn name(self) -> &'static str {
        match self {
            DeltaIdentity::I => "i",
            DeltaIdentity::II => "ii",
            DeltaIdentity::III => "iii",
        }
    }

    fn products(self) -> [Product; 2] {
        let (a1, b1, a2, b2) = match self {
            DeltaIdentity::I => (0, 0, 0, 0),
            DeltaIdentity::II => (0, 1, 1, 0),
            DeltaIdentity::III => (1, 1, 1, 1),
        };
        [
            Product { sign: 1, plus_order: a1, minus_order: b1, orientation: 1 },
            Product { sign: -1, plus_order: a2, minus_order: b2, orientation: -1 },
        ]
    }

    /// Right side `(1 / (kappa pi i)) sum_r alpha_r d^r delta`.
    fn right_side(self) -> (i64, Vec<(u32, Gq)>) {
        match self {
            DeltaIdentity::I => (2, vec![(1, -Gq::one())]),
            DeltaIdentity::II => (4, vec![(2, Gq::one()), (1, Gq::i())]),
            DeltaIdentity::III => (12, vec![(3, Gq::one()), (1, Gq::one())]),
        }
    }

    /// Factor turning `4 pi^2` times the left side into the closed form.
    fn closed_form_factor(self) -> Gq {
        match self {
            DeltaIdentity::I => Gq::one(),
            DeltaIdentity::II => Gq::i(),
            DeltaIdentity::III => -Gq::one(),
        }
    }

    /// `k`, `-k(k-1)/2`, `-(k^3-k)/6`.
    pub fn closed_form(self, k: i64) -> Gq {
        match self {
            DeltaIdentity::I => Gq::from_int(k),
            DeltaIdentity::II => Gq::from_int(-k * (k - 1) / 2),
            DeltaIdentity::III => Gq::from_int(-(k * k * k - k) / 6),
        }
    }
}

fn minus_i_power(x: i64, r: u32) -> Gq {
    Gq::imag(-x).pow(r)
}

/// `4 pi^2` times the coefficient of `e^{-ikt}` in the left side, as the
/// finite sum over `m > 0`, `n <= 0`.
pub fn delta_coefficient(id: DeltaIdentity, k: i64) -> Gq {
    let mut total = Gq::zero();
    for p in id.products() {
        // d+^{(a)}(s t) d-^{(b)}(-s t) contributes (-im)^a (-in)^b e^{-i s (m - n) t}.
        let diff = p.orientation * k;
        if diff <= 0 {
            continue;
        }
        for m in 1..=diff {
            let n = m - diff;
            let w = &minus_i_power(m, p.plus_order) * &minus_i_power(n, p.minus_order);
            total += &w.scale_int(p.sign);
        }
    }
    total
}

/// `4 pi^2` times the coefficient of `e^{-ikt}` in the right side, from
/// `d^r delta = (1/2pi) sum_k (-ik)^r e^{-ikt}`.
pub fn delta_right_coefficient(id: DeltaIdentity, k: i64) -> Gq {
    let (kappa, alphas) = id.right_side();
    let mut s = Gq::zero();
    for (r, a) in alphas {
        s += &(&a * &minus_i_power(k, r));
    }
    // 4 pi^2 / (kappa pi i) / (2 pi) = 2 / (kappa i)
    &s * &Gq::ratio(2, kappa).mul_i().scale_int(-1)
}

/// Compares the left side, the right side and the closed form for all
/// `1 <= |k| <= kmax`.
pub fn check_delta_lemma(kmax: i64) -> Report {
    Report::timed("delta", |rep| {
        rep.param("kmax", kmax);
        let mut n = 0u64;
        for id in DeltaIdentity::ALL {
            for k in (-kmax..=kmax).filter(|&k| k != 0) {
                n += 1;
                let lhs = delta_coefficient(id, k);
                let rhs = delta_right_coefficient(id, k);
                let closed = &lhs * &id.closed_form_factor();
                if lhs != rhs || closed != id.closed_form(k) {
                    return rep.fail(Counterexample {
                        probe: format!("identity {} k = {k}", id.name()),
                        state: String::new(),
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                        difference: format!("{} (closed form {})", &lhs - &rhs, id.closed_form(k)),
                    });
                }
            }
            rep.value(&format!("{}_k3", id.name()), &(&delta_coefficient(id, 3) * &id.closed_form_factor()));
        }
        rep.count("identities", n);
    })
}

// ---------------------------------------------------------------------------
// Jets and truncated loops

/// Jet variable `d^r q^i / dt^r`, encoded as `4 (i - 1) + r`.
type JetVar = u8;

fn jv(i: usize, r: u8) -> JetVar {
    (4 * (i - 1)) as u8 + r
}

type JetKey = (SmallVec<[JetVar; 8]>, i32);

/// Polynomial in jet variables times `e^{imt}`.
#[derive(Debug, Clone, Default, PartialEq)]
struct Jet {
    terms: BTreeMap<JetKey, Gq>,
}

impl Jet {
    fn add_term(&mut self, k: JetKey, c: &Gq) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_insert_with(Gq::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn var(v: JetVar) -> Jet {
        let mut j = Jet::default();
        j.add_term((SmallVec::from_slice(&[v]), 0), &Gq::one());
        j
    }

    fn from_function(f: &SpacetimeFunction) -> Jet {
        let mut j = Jet::default();
        for (m, c) in f.terms() {
            let mut vars = SmallVec::new();
            for (k, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    vars.push(jv(k + 1, 0));
                }
            }
            j.add_term((vars, m.freq), c);
        }
        j
    }

    fn add(&self, o: &Jet) -> Jet {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c);
        }
        r
    }

    fn scale(&self, s: &Gq) -> Jet {
        let mut r = Jet::default();
        for (k, c) in &self.terms {
            r.add_term(k.clone(), &(c * s));
        }
        r
    }

    fn mul(&self, o: &Jet) -> Jet {
        let mut r = Jet::default();
        for ((a, m), c) in &self.terms {
            for ((b, n), d) in &o.terms {
                let mut v: SmallVec<[JetVar; 8]> = a.iter().chain(b.iter()).copied().collect();
                v.sort_unstable();
                r.add_term((v, m + n), &(c * d));
            }
        }
        r
    }

    /// Partial derivative in one jet variable.
    fn partial(&self, x: JetVar) -> Jet {
        let mut r = Jet::default();
        for ((v, m), c) in &self.terms {
            let cnt = v.iter().filter(|&&y| y == x).count();
            if cnt == 0 {
                continue;
            }
            let pos = v.iter().position(|&y| y == x).unwrap();
            let mut w = v.clone();
            w.remove(pos);
            r.add_term((w, *m), &c.scale_int(cnt as i64));
        }
        r
    }

    /// Total time derivative: explicit phase derivative plus the chain rule
    /// along `q -> qdot -> qddot -> qdddot`.
    fn total_dt(&self, spatial: usize) -> Jet {
        let mut r = Jet::default();
        for ((v, m), c) in &self.terms {
            r.add_term((v.clone(), *m), &c.scale_int(*m as i64).mul_i());
        }
        for i in 1..=spatial {
            for order in 0..3u8 {
                let p = self.partial(jv(i, order));
                if !p.terms.is_empty() {
                    r = r.add(&p.mul(&Jet::var(jv(i, order + 1))));
                }
            }
        }
        r
    }
}

/// Product of mode amplitudes `qhat^i(n)` (sorted `(i, n)` pairs) with the
/// phase `e^{imt}`; the term oscillates as `e^{i(m - sum n)t}`.
type LoopKey = (SmallVec<[(u8, i8); 8]>, i32);

/// Element of the commutative polynomial ring in the mode amplitudes of
/// truncated loops `q^i(t) = sum_{|n|<=K} qhat^i(n) e^{-int}`.
#[derive(Debug, Clone, Default, PartialEq)]
struct LoopRing {
    terms: BTreeMap<LoopKey, Gq>,
}

impl LoopRing {
    fn add_term(&mut self, k: LoopKey, c: &Gq) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_insert_with(Gq::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn constant(c: Gq) -> LoopRing {
        let mut r = LoopRing::default();
        r.add_term((SmallVec::new(), 0), &c);
        r
    }

    fn add(&self, o: &LoopRing) -> LoopRing {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c);
        }
        r
    }

    fn sub(&self, o: &LoopRing) -> LoopRing {
        self.add(&o.scale(&-Gq::one()))
    }

    fn scale(&self, s: &Gq) -> LoopRing {
        let mut r = LoopRing::default();
        for (k, c) in &self.terms {
            r.add_term(k.clone(), &(c * s));
        }
        r
    }

    fn mul(&self, o: &LoopRing) -> LoopRing {
        let mut r = LoopRing::default();
        for ((a, m), c) in &self.terms {
            for ((b, n), d) in &o.terms {
                let mut v: SmallVec<[(u8, i8); 8]> = a.iter().chain(b.iter()).copied().collect();
                v.sort_unstable();
                r.add_term((v, m + n), &(c * d));
            }
        }
        r
    }

    /// `d/dt`: each term is multiplied by `i (m - sum n)`.
    fn dt(&self) -> LoopRing {
        let mut r = LoopRing::default();
        for ((v, m), c) in &self.terms {
            let e = *m as i64 - v.iter().map(|&(_, n)| n as i64).sum::<i64>();
            r.add_term((v.clone(), *m), &c.scale_int(e).mul_i());
        }
        r
    }

    /// `d^r q^i/dt^r` on the truncated loop.
    fn loop_derivative(i: usize, r: u8, cutoff: i8) -> LoopRing {
        let mut out = LoopRing::default();
        for n in -cutoff..=cutoff {
            let c = Gq::imag(-(n as i64)).pow(r as u32);
            out.add_term((SmallVec::from_slice(&[(i as u8, n)]), 0), &c);
        }
        out
    }

    /// `f(q(t), t)` on truncated loops.
    fn of_function(f: &SpacetimeFunction, cutoff: i8) -> LoopRing {
        let mut out = LoopRing::default();
        for (m, c) in f.terms() {
            let mut t = LoopRing::constant(c.clone());
            t = LoopRing { terms: t.terms.into_iter().map(|((v, _), c)| ((v, m.freq), c)).collect() };
            for (k, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&LoopRing::loop_derivative(k + 1, 0, cutoff));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Substitutes `d^r q^i/dt^r` for every jet variable.
    fn of_jet(j: &Jet, cutoff: i8) -> LoopRing {
        let mut out = LoopRing::default();
        let mut cache: BTreeMap<JetVar, LoopRing> = BTreeMap::new();
        for ((vars, m), c) in &j.terms {
            let mut t = LoopRing::default();
            t.add_term((SmallVec::new(), *m), c);
            for &v in vars {
                let l = cache
                    .entry(v)
                    .or_insert_with(|| LoopRing::loop_derivative((v / 4 + 1) as usize, v % 4, cutoff));
                t = t.mul(l);
            }
            out = out.add(&t);
        }
        out
    }
}

/// Jet form of `xi~^i = xi^i - xi^0 qdot^i`.
fn tilde_jet(xi: &VectorField, i: usize) -> Jet {
    Jet::from_function(xi.comp(i)).add(&Jet::from_function(xi.comp(0)).mul(&Jet::var(jv(i, 1))).scale(&-Gq::one()))
}

/// `d_i xi~^i` computed on jets.
fn divergence_jet_route(xi: &VectorField, cutoff: i8) -> LoopRing {
    let n = xi.dim();
    let mut j = Jet::default();
    for i in 1..n {
        j = j.add(&tilde_jet(xi, i).partial(jv(i, 0)));
    }
    LoopRing::of_jet(&j, cutoff)
}

/// `d_mu xi^mu - d/dt xi^0` computed on loops.
fn divergence_loop_route(xi: &VectorField, cutoff: i8) -> LoopRing {
    LoopRing::of_function(&xi.divergence(), cutoff).sub(&LoopRing::of_function(xi.comp(0), cutoff).dt())
}

/// `d_j (d/dt xi~^i) d_i eta~^j` computed on jets.
fn product_jet_route(xi: &VectorField, eta: &VectorField, cutoff: i8) -> LoopRing {
    let n = xi.dim();
    let mut j = Jet::default();
    for i in 1..n {
        let xdot = tilde_jet(xi, i).total_dt(n - 1);
        for k in 1..n {
            j = j.add(&xdot.partial(jv(k, 0)).mul(&tilde_jet(eta, k).partial(jv(i, 0))));
        }
    }
    LoopRing::of_jet(&j, cutoff)
}

/// The seven-term right side of the product identity, computed on loops.
fn product_loop_route(xi: &VectorField, eta: &VectorField, cutoff: i8) -> LoopRing {
    let n = xi.dim();
    let l = |f: &SpacetimeFunction| LoopRing::of_function(f, cutoff);
    let qdot = |rho: usize| {
        if rho == 0 {
            LoopRing::constant(Gq::one())
        } else {
            LoopRing::loop_derivative(rho, 1, cutoff)
        }
    };
    let (x0, e0) = (xi.comp(0), eta.comp(0));
    let mut out = LoopRing::default();
    for nu in 0..n {
        for mu in 0..n {
            out = out.add(&l(&xi.comp(mu).d(nu)).dt().mul(&l(&eta.comp(nu).d(mu))));
        }
        for rho in 0..n {
            out = out.add(&l(&x0.d(nu)).mul(&qdot(rho)).mul(&l(&eta.comp(nu).d(rho)).dt()));
        }
    }
    for rho in 0..n {
        for mu in 0..n {
            out = out.sub(&qdot(rho).mul(&l(&xi.comp(mu).d(rho)).dt()).mul(&l(&e0.d(mu))));
        }
    }
    let x0dot = l(x0).dt();
    let e0dot = l(e0).dt();
    out = out.sub(&x0dot.dt().mul(&e0dot));
    for rho in 0..n {
        out = out.sub(&x0dot.mul(&qdot(rho)).mul(&l(&e0.d(rho)).dt()));
        out = out.add(&qdot(rho).mul(&l(&x0.d(rho)).dt()).mul(&e0dot));
    }
    let mut total = x0dot.mul(&e0dot);
    for nu in 0..n {
        total = total.sub(&l(&x0.d(nu)).mul(&l(eta.comp(nu)).dt()));
    }
    out.add(&total.dt())
}

/// Random field with a sparse selection of probe monomials in every
/// component.
fn random_field<R: Rng>(rng: &mut R, dim: usize, deg: u32, freq: u32) -> VectorField {
    let monos = probe_functions(dim, deg, freq);
    let comps = (0..dim)
        .map(|_| {
            let mut f = SpacetimeFunction::zero(dim);
            for m in &monos {
                if rng.gen_range(0..4) == 0 {
                    f = f.add(&m.scale(&random_scalar(rng)));
                }
            }
            f
        })
        .collect();
    VectorField::new(comps).expect("components share the dimension")
}

/// Outcome of both identities on one pair of fields.
#[cfg(test)]
fn jet_identities(xi: &VectorField, eta: &VectorField, cutoff: i8) -> (bool, bool, usize) {
    let a = divergence_jet_route(xi, cutoff);
    let b = divergence_loop_route(xi, cutoff);
    let c = product_jet_route(xi, eta, cutoff);
    let d = product_loop_route(xi, eta, cutoff);
    (a == b, c == d, a.terms.len() + c.terms.len())
}

/// Both jet identities on `trials` random pairs of fields with spatial
/// degree `<= deg` and `|frequency| <= freq`, with loops truncated at `K`.
pub fn check_jet_lemma(dim: usize, cutoff: u32, deg: u32, freq: u32, trials: u32, seed: u64) -> Report {
    Report::timed("jet", |rep| {
        rep.param("N", dim).param("K", cutoff).param("deg", deg).param("freq", freq).param("trials", trials).param("seed", seed);
        let mut spec = ProbeSpec::trivial(dim);
        spec.seed = seed;
        let mut rng = spec.rng(0x6a65);
        let mut coefficients = 0u64;
        for t in 0..trials {
            let xi = random_field(&mut rng, dim, deg, freq);
            let eta = random_field(&mut rng, dim, deg, freq);
            let k = cutoff as i8;
            let a = divergence_jet_route(&xi, k);
            let b = divergence_loop_route(&xi, k);
            coefficients += a.terms.len().max(b.terms.len()) as u64;
            if a != b {
                return rep.fail(Counterexample {
                    probe: format!("draw {t}: divergence identity, xi = {xi}"),
                    state: String::new(),
                    lhs: format!("{} terms", a.terms.len()),
                    rhs: format!("{} terms", b.terms.len()),
                    difference: format!("{} terms", a.sub(&b).terms.len()),
                });
            }
            let c = product_jet_route(&xi, &eta, k);
            let d = product_loop_route(&xi, &eta, k);
            coefficients += c.terms.len().max(d.terms.len()) as u64;
            if c != d {
                return rep.fail(Counterexample {
                    probe: format!("draw {t}: product identity, xi = {xi}, eta = {eta}"),
                    state: String::new(),
                    lhs: format!("{} terms", c.terms.len()),
                    rhs: format!("{} terms", d.terms.len()),
                    difference: format!("{} terms", c.sub(&d).terms.len()),
                });
            }
        }
        rep.count("draws", trials as u64).count("coefficients", coefficients);
        rep.value("skipped_frequencies", "none");
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_k3() {
        assert_eq!(&delta_coefficient(DeltaIdentity::I, 3) * &DeltaIdentity::I.closed_form_factor(), Gq::from_int(3));
        assert_eq!(&delta_coefficient(DeltaIdentity::II, 3) * &DeltaIdentity::II.closed_form_factor(), Gq::from_int(-3));
        assert_eq!(&delta_coefficient(DeltaIdentity::III, 3) * &DeltaIdentity::III.closed_form_factor(), Gq::from_int(-4));
        assert!(delta_coefficient(DeltaIdentity::III, 0).is_zero());
    }

    #[test]
    fn jet_special_cases() {
        let xi = VectorField::parse("0; x1^2*e(1)", 2).unwrap();
        let (a, b, _) = jet_identities(&xi, &xi, 2);
        assert!(a && b);
        let xi = VectorField::parse("x1*e(-1) + 2; e(2)*x1", 2).unwrap();
        let (a, b, _) = jet_identities(&xi, &xi, 2);
        assert!(a && b);
    }

    #[test]
    fn loop_dt_matches_jet() {
        let f = SpacetimeFunction::parse("x1^2*e(1)", 2).unwrap();
        let lhs = LoopRing::of_jet(&Jet::from_function(&f).total_dt(1), 2);
        let rhs = LoopRing::of_function(&f, 2).dt();
        assert_eq!(lhs, rhs);
    }
}
