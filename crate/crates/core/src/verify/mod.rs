//! Verification campaigns. Every check returns a [`Report`]; a report fails
//! exactly when it carries a counterexample.

mod lemmas;
mod realization;
mod symbolic;

pub use lemmas::{check_delta_lemma, check_jet_lemma, delta_coefficient, delta_right_coefficient, DeltaIdentity};
pub use realization::{
    check_abelian, check_action_brackets, check_gauge, check_hamiltonian, check_q_transform, check_realization,
    check_temporal_virasoro, fit_cocycle_coefficients, FitOutcome, FitResult,
};
pub use symbolic::{check_coboundary, check_current_jacobi, check_exact_chain, check_jacobi, fit_abstract_cocycle, JacobiSuite};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::current::{CurrentError, CurrentParams, HighestWeight, InducedModule};
use crate::fock::Caps;
use crate::realize::{RealizeError, Realizer, TensorMonomial};
use crate::scalar::GaussianRational as Gq;
use crate::spacetime::{probe_basis, VectorField};

/// Probe window and module for a campaign.
#[derive(Debug, Clone)]
pub struct ProbeSpec {
    pub dim: usize,
    /// Spatial degree bound of probe fields.
    pub deg: u32,
    /// Frequency bound of probe fields.
    pub freq: u32,
    /// Degree cap `D` of basis states.
    pub max_degree: u32,
    /// Width cap `W` of basis states.
    pub max_width: usize,
    pub params: CurrentParams,
    pub weight: HighestWeight,
    /// Use the trivial module instead of the induced one.
    pub trivial: bool,
    pub seed: u64,
    pub caps: Caps,
}

impl ProbeSpec {
    /// Trivial module with zero current parameters.
    pub fn trivial(dim: usize) -> Self {
        let params = CurrentParams::zero(dim);
        let weight = HighestWeight::zero(&params);
        ProbeSpec {
            dim,
            deg: 2,
            freq: 2,
            max_degree: 4,
            max_width: 4,
            params,
            weight,
            trivial: true,
            seed: 0,
            caps: Caps::default(),
        }
    }

    /// Module induced from `weight`.
    pub fn induced(params: CurrentParams, weight: HighestWeight) -> Self {
        let dim = params.dim;
        ProbeSpec { params, weight, trivial: false, ..Self::trivial(dim) }
    }

    pub fn with_window(mut self, deg: u32, freq: u32, max_degree: u32, max_width: usize) -> Self {
        self.deg = deg;
        self.freq = freq;
        self.max_degree = max_degree;
        self.max_width = max_width;
        self
    }

    pub fn module(&self) -> Result<InducedModule, CurrentError> {
        if self.trivial {
            InducedModule::trivial(CurrentParams::zero(self.dim))
        } else {
            InducedModule::induced(self.params.clone(), self.weight.clone())
        }
    }

    /// Parameters of the currents acting on the module.
    pub fn module_params(&self) -> CurrentParams {
        if self.trivial {
            CurrentParams::zero(self.dim)
        } else {
            self.params.clone()
        }
    }

    pub fn realizer(&self) -> Result<Realizer, RealizeError> {
        Realizer::new(self.dim, self.module()?, self.caps)
    }

    pub fn probe_fields(&self) -> Vec<VectorField> {
        probe_basis(self.dim, self.deg, self.freq)
    }

    pub fn states(&self, r: &Realizer) -> Vec<TensorMonomial> {
        r.tensor_basis(self.max_degree, self.max_width)
    }

    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

/// A small random Gaussian rational with numerators and denominators in
/// `[-7, 7]` and `[1, 5]`.
pub fn random_scalar<R: Rng>(rng: &mut R) -> Gq {
    Gq::complex(rng.gen_range(-7..=7), rng.gen_range(1..=5), rng.gen_range(-7..=7), rng.gen_range(1..=5))
}

/// The first violation found by a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub probe: String,
    pub state: String,
    pub lhs: String,
    pub rhs: String,
    pub difference: String,
}

impl Counterexample {
    pub fn message(probe: impl Into<String>, what: impl Into<String>) -> Self {
        Counterexample { probe: probe.into(), state: String::new(), lhs: what.into(), rhs: String::new(), difference: String::new() }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    /// Named parameters of the campaign, in insertion order.
    pub params: Vec<(String, String)>,
    /// Named counts, in insertion order.
    pub counts: Vec<(String, u64)>,
    pub fitted: Option<Vec<(String, Gq)>>,
    /// Additional named results.
    pub values: Vec<(String, String)>,
    pub counterexample: Option<Counterexample>,
    pub millis: u128,
}

impl Report {
    pub fn new(check: impl Into<String>) -> Self {
        Report {
            check: check.into(),
            pass: true,
            params: Vec::new(),
            counts: Vec::new(),
            fitted: None,
            values: Vec::new(),
            counterexample: None,
            millis: 0,
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.params.push((k.into(), v.to_string()));
        self
    }

    pub fn count(&mut self, k: &str, v: u64) -> &mut Self {
        self.counts.push((k.into(), v));
        self
    }

    pub fn value(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.values.push((k.into(), v.to_string()));
        self
    }

    pub fn get_count(&self, k: &str) -> Option<u64> {
        self.counts.iter().find(|(n, _)| n == k).map(|(_, v)| *v)
    }

    pub fn get_value(&self, k: &str) -> Option<&str> {
        self.values.iter().find(|(n, _)| n == k).map(|(_, v)| v.as_str())
    }

    /// Records a counterexample unless one is already present.
    pub fn fail(&mut self, c: Counterexample) {
        if self.counterexample.is_none() {
            self.counterexample = Some(c);
        }
        self.pass = false;
    }

    pub(crate) fn timed<F: FnOnce(&mut Report)>(check: &str, f: F) -> Report {
        let start = Instant::now();
        let mut r = Report::new(check);
        f(&mut r);
        r.millis = start.elapsed().as_millis();
        r.pass = r.counterexample.is_none();
        r
    }

    pub(crate) fn spec_params(&mut self, s: &ProbeSpec) {
        self.param("N", s.dim)
            .param("module", if s.trivial { "trivial" } else { "induced" })
            .param("deg", s.deg)
            .param("freq", s.freq)
            .param("D", s.max_degree)
            .param("W", s.max_width);
        if !s.trivial {
            let p = &s.params;
            self.param("c", &p.c).param("k0", &p.k0).param("k1", &p.k1).param("k2", &p.k2);
            self.param("h", &s.weight.h).param("lambda", &s.weight.lambda);
            if p.gauge.dim() > 0 {
                self.param("gauge", &p.gauge.name).param("level", &p.k);
            }
        }
    }
}
