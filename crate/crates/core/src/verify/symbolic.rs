use rayon::prelude::*;

use super::realization::ideal_probes;
use super::{random_scalar, Counterexample, ProbeSpec, Report};
use super::FitOutcome;
use crate::algebra::{
    abstract_bracket, canonicalize, cocycle_components, coboundary_defect, exact_chain_closed, exact_chain_defect, jacobi_defect, AbstractElement, Extension,
    ExtensionParams,
};
use crate::current::{jacobi_failures, CurrentParams, GaugeAlgebra};
use crate::linalg::EchelonSystem;
use crate::scalar::GaussianRational as Gq;
use crate::spacetime::{probe_basis, probe_functions, SpacetimeFunction, VectorField};

/// Probe sets and parameter draws for the Jacobi campaign.
#[derive(Debug, Clone)]
pub struct JacobiSuite {
    pub dim: usize,
    /// Window of the vector-field cube.
    pub deg: u32,
    pub freq: u32,
    /// Window of the ideal symbols and gauge probes.
    pub small_deg: u32,
    pub small_freq: u32,
    pub max_rank: usize,
    pub draws: u32,
    pub seed: u64,
}

impl JacobiSuite {
    pub fn new(dim: usize) -> Self {
        JacobiSuite { dim, deg: 2, freq: 2, small_deg: 1, small_freq: 1, max_rank: 2, draws: 5, seed: 0 }
    }
}

fn random_params<R: rand::Rng>(rng: &mut R, gauge: &GaugeAlgebra) -> ExtensionParams {
    let v: Vec<Gq> = (0..7).map(|_| random_scalar(rng)).collect();
    let d = gauge.dim();
    let mut p = ExtensionParams::from_cocycles(&v, d);
    p.k = random_scalar(rng);
    if gauge.annihilates(&vec![Gq::one(); d]) {
        p.g = (0..d).map(|_| random_scalar(rng)).collect();
        p.gprime = (0..d).map(|_| random_scalar(rng)).collect();
    }
    p
}

struct Sector {
    name: &'static str,
    ext: Extension,
    elements: Vec<(String, AbstractElement)>,
    triples: Vec<[usize; 3]>,
}

/// Jacobi sums on the probe cube: all `L L L` triples, and triples mixing
/// vector fields with gauge currents and ideal symbols for abelian and
/// non-abelian gauge algebras. Every draw randomizes all parameters.
pub fn check_jacobi(suite: &JacobiSuite) -> Report {
    Report::timed("jacobi", |rep| {
        let n = suite.dim;
        rep.param("N", n)
            .param("deg", suite.deg)
            .param("freq", suite.freq)
            .param("small_deg", suite.small_deg)
            .param("small_freq", suite.small_freq)
            .param("max_rank", suite.max_rank)
            .param("draws", suite.draws)
            .param("seed", suite.seed);
        let mut spec = ProbeSpec::trivial(n);
        spec.seed = suite.seed;
        let mut rng = spec.rng(0x6a61);
        let fields = probe_basis(n, suite.deg, suite.freq);
        let small_fields = probe_basis(n, suite.small_deg, suite.small_freq);
        let keys = ideal_probes(n, suite.small_deg, suite.small_freq, suite.max_rank);
        let small_fns = probe_functions(n, suite.small_deg, suite.small_freq);
        let mut total = 0u64;
        for draw in 0..suite.draws {
            let mut sectors = Vec::new();
            for gauge in [GaugeAlgebra::none(), GaugeAlgebra::abelian(1), GaugeAlgebra::sl2()] {
                let gd = gauge.dim();
                let params = random_params(&mut rng, &gauge);
                let ext = Extension::new(n, gauge.clone(), params).expect("charge lengths match");
                let mut elements = Vec::new();
                let mut triples = Vec::new();
                if gd == 0 {
                    // The full cube of vector fields.
                    for xi in &fields {
                        elements.push((format!("L[{xi}]"), AbstractElement::l(xi, 0)));
                    }
                    let m = elements.len();
                    for a in 0..m {
                        for b in a + 1..m {
                            for c in b + 1..m {
                                triples.push([a, b, c]);
                            }
                        }
                    }
                    // Two fields and one ideal symbol.
                    let base = elements.len();
                    for k in &keys {
                        elements.push((k.to_string(), AbstractElement::ideal_symbol(k.clone(), n, 0)));
                    }
                    for a in 0..m {
                        for b in a + 1..m {
                            for c in base..elements.len() {
                                triples.push([a, b, c]);
                            }
                        }
                    }
                } else {
                    for xi in &small_fields {
                        elements.push((format!("L[{xi}]"), AbstractElement::l(xi, gd)));
                    }
                    let m = elements.len();
                    for f in &small_fns {
                        for a in 0..gd {
                            let mut x = vec![SpacetimeFunction::zero(n); gd];
                            x[a] = f.clone();
                            elements.push((format!("J{}[{f}]", a + 1), AbstractElement::j(&x, n)));
                        }
                    }
                    let mj = elements.len();
                    for k in keys.iter().step_by(3) {
                        elements.push((k.to_string(), AbstractElement::ideal_symbol(k.clone(), n, gd)));
                    }
                    let all = elements.len();
                    for a in 0..all {
                        for b in a + 1..all {
                            for c in b + 1..all {
                                let nj = [a, b, c].iter().filter(|&&i| i >= m && i < mj).count();
                                let ni = [a, b, c].iter().filter(|&&i| i >= mj).count();
                                if nj >= 1 && ni <= 1 {
                                    triples.push([a, b, c]);
                                }
                            }
                        }
                    }
                }
                sectors.push(Sector { name: ["none", "u1", "sl2"][sectors.len()], ext, elements, triples });
            }
            for s in &sectors {
                let bad = s
                    .triples
                    .par_iter()
                    .enumerate()
                    .filter_map(|(t, [a, b, c])| {
                        let d = jacobi_defect(&s.elements[*a].1, &s.elements[*b].1, &s.elements[*c].1, &s.ext).expect("compatible");
                        (!d.is_zero()).then_some((t, d))
                    })
                    .min_by_key(|(t, _)| *t);
                total += s.triples.len() as u64;
                if let Some((t, d)) = bad {
                    let [a, b, c] = s.triples[t];
                    return rep.fail(Counterexample {
                        probe: format!(
                            "draw {draw} sector {}: ({}, {}, {})",
                            s.name, s.elements[a].0, s.elements[b].0, s.elements[c].0
                        ),
                        state: String::new(),
                        lhs: d.to_string(),
                        rhs: "0".into(),
                        difference: d.to_string(),
                    });
                }
                if draw == 0 {
                    rep.count(&format!("triples_{}", s.name), s.triples.len() as u64);
                }
            }
        }
        rep.count("triples_total", total);
    })
}

/// The redefinition of `L_xi` removes the three coboundary terms from every
/// bracket of probe fields while leaving `c1..c4` untouched; checked at the
/// realized parameters and at `draws` random ones.
pub fn check_coboundary(dim: usize, deg: u32, freq: u32, draws: u32, seed: u64) -> Report {
    Report::timed("coboundary", |rep| {
        rep.param("N", dim).param("deg", deg).param("freq", freq).param("draws", draws).param("seed", seed);
        let mut spec = ProbeSpec::trivial(dim);
        spec.seed = seed;
        let mut rng = spec.rng(0x6362);
        let mut params = vec![ExtensionParams::realized(&CurrentParams::zero(dim))];
        for _ in 0..draws {
            params.push(random_params(&mut rng, &GaugeAlgebra::none()));
        }
        let fields = probe_basis(dim, deg, freq);
        let pairs: Vec<(usize, usize)> = (0..fields.len()).flat_map(|a| (a + 1..fields.len()).map(move |b| (a, b))).collect();
        for (di, p) in params.into_iter().enumerate() {
            let ext = Extension::new(dim, GaugeAlgebra::none(), p).unwrap();
            let bad = pairs
                .par_iter()
                .enumerate()
                .filter_map(|(t, &(a, b))| {
                    let d = coboundary_defect(&fields[a], &fields[b], &ext).expect("compatible");
                    (!d.is_zero()).then_some((t, d))
                })
                .min_by_key(|(t, _)| *t);
            if let Some((t, d)) = bad {
                let (a, b) = pairs[t];
                return rep.fail(Counterexample {
                    probe: format!("parameters {di}: ({}, {})", fields[a], fields[b]),
                    state: String::new(),
                    lhs: d.to_string(),
                    rhs: "0".into(),
                    difference: d.to_string(),
                });
            }
        }
        rep.count("pairs", pairs.len() as u64).count("parameter_sets", draws as u64 + 1);
    })
}

/// `S_1^rho(d_rho f)` vanishes as a chain, and the chain transformation law
/// agrees with the action on `S_1`.
pub fn check_exact_chain(dim: usize, deg: u32, freq: u32) -> Report {
    Report::timed("exact_chain", |rep| {
        rep.param("N", dim).param("deg", deg).param("freq", freq);
        let fns = probe_functions(dim, deg, freq);
        let fields = probe_basis(dim, deg, freq);
        let mut n = 0u64;
        for f in &fns {
            n += 1;
            let c = canonicalize(&exact_chain_closed(f, 0));
            if !c.is_zero() {
                return rep.fail(Counterexample::message(format!("closed {f}"), c.to_string()));
            }
        }
        let bad = fields
            .par_iter()
            .enumerate()
            .find_map_first(|(i, xi)| {
                for f in &fns {
                    for rho in 0..dim as u8 {
                        let d = canonicalize(&exact_chain_defect(xi, rho, f, 0));
                        if !d.is_zero() {
                            return Some((i, rho, f.clone(), d));
                        }
                    }
                }
                None
            });
        n += (fields.len() * fns.len() * dim) as u64;
        if let Some((i, rho, f, d)) = bad {
            return rep.fail(Counterexample::message(format!("L[{}] on S1^{rho}[{f}]", fields[i]), d.to_string()));
        }
        rep.count("identities", n);
    })
}

/// Jacobi identity of the mode algebra of the currents in a frequency
/// window.
pub fn check_current_jacobi(p: &CurrentParams, window: u32) -> Report {
    Report::timed("current_jacobi", |rep| {
        rep.param("N", p.dim).param("c", &p.c).param("k0", &p.k0).param("k1", &p.k1).param("k2", &p.k2).param("window", window);
        if p.gauge.dim() > 0 {
            rep.param("gauge", &p.gauge.name).param("level", &p.k);
        }
        let (count, bad) = jacobi_failures(p, window);
        rep.count("triples", count as u64);
        if let Some((x, y, z)) = bad.first() {
            rep.fail(Counterexample::message(format!("({x:?}, {y:?}, {z:?})"), format!("{} failing triples", bad.len())));
        }
    })
}

/// Solves for the seven parameters from abstract brackets
/// `[L_xi, L_eta] - L_{[xi,eta]}` in canonical form, one equation per
/// canonical symbol.
pub fn fit_abstract_cocycle(ext: &Extension, fields: &[VectorField]) -> FitOutcome {
    let gd = ext.gauge_dim();
    let mut system = EchelonSystem::new(7);
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            let (x, y) = (AbstractElement::l(&fields[a], gd), AbstractElement::l(&fields[b], gd));
            let data = abstract_bracket(&x, &y, ext).expect("compatible").minus(&AbstractElement::l(&fields[a].lie_bracket(&fields[b]), gd));
            let comps: Vec<AbstractElement> = cocycle_components(&fields[a], &fields[b], gd).iter().map(canonicalize).collect();
            let mut rows: std::collections::BTreeMap<Option<crate::algebra::IdealKey>, (Vec<Gq>, Gq)> = Default::default();
            let blank = || (vec![Gq::zero(); 7], Gq::zero());
            for (k, c) in data.ideal_part() {
                rows.entry(Some(k.clone())).or_insert_with(blank).1 = c.clone();
            }
            rows.entry(None).or_insert_with(blank).1 = data.scalar().clone();
            for (j, comp) in comps.iter().enumerate() {
                for (k, c) in comp.ideal_part() {
                    rows.entry(Some(k.clone())).or_insert_with(blank).0[j] = c.clone();
                }
                rows.entry(None).or_insert_with(blank).0[j] = comp.scalar().clone();
            }
            for (_, (row, rhs)) in rows {
                system.add(row, rhs);
            }
        }
    }
    if system.inconsistent() > 0 {
        FitOutcome::Inconsistent { equations: system.inconsistent() }
    } else if let Some(x) = system.solution() {
        FitOutcome::Solved(x)
    } else {
        FitOutcome::RankDeficient { rank: system.rank(), combinations: system.reduced_rows() }
    }
}
