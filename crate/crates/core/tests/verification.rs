use diffext::algebra::{canonicalize, l_on_j, ExtensionParams};
use diffext::current::{current_bracket, CurrentMode, CurrentParams, GaugeAlgebra, HighestWeight};
use diffext::realize::{build_j, build_l, TensorState};
use diffext::spacetime::{SpacetimeFunction, VectorField};
use diffext::verify::{self, DeltaIdentity, FitOutcome, JacobiSuite, ProbeSpec};
use diffext::GaussianRational as Gq;

fn q(s: &str) -> Gq {
    s.parse().unwrap()
}

fn u1_params(g: &str, gprime: &str) -> CurrentParams {
    CurrentParams::new(2, q("1/2"), q("2"), q("3"), q("-1"), GaugeAlgebra::abelian(1), q("5"), vec![q(g)], vec![q(gprime)]).unwrap()
}

fn u1_spec() -> ProbeSpec {
    let p = u1_params("2", "-3");
    let w = HighestWeight::new(q("1/3"), q("2"), vec![q("1")], &p).unwrap();
    ProbeSpec::induced(p, w).with_window(1, 1, 2, 2)
}

#[test]
fn fit_flags_wrong_expectation() {
    let spec = ProbeSpec::trivial(2).with_window(1, 1, 3, 3);
    let fields = spec.probe_fields();
    let right = ExtensionParams::realized(&spec.module_params());
    let fit = verify::fit_cocycle_coefficients(&spec, &fields, Some(&right)).unwrap();
    assert!(fit.expected_failure.is_none());
    assert!(fit.asserted_atoms > 0 && fit.asserted_operators > 0);

    let mut wrong = right.clone();
    wrong.a2 = &wrong.a2 + &Gq::one();
    let fit = verify::fit_cocycle_coefficients(&spec, &fields, Some(&wrong)).unwrap();
    assert!(fit.expected_failure.is_some());
}

#[test]
fn n2_fit_reports_the_null_direction() {
    let spec = ProbeSpec::trivial(2).with_window(1, 1, 3, 3);
    let fit = verify::fit_cocycle_coefficients(&spec, &spec.probe_fields(), None).unwrap();
    let FitOutcome::RankDeficient { rank, combinations } = fit.outcome else { panic!("expected a rank deficient fit") };
    assert_eq!(rank, 6);
    let null = [1i64, -1, -2, 2, -1, 0, 0].map(Gq::from_int);
    for (row, _) in &combinations {
        let dot = row.iter().zip(&null).fold(Gq::zero(), |acc, (a, b)| &acc + &(a * b));
        assert!(dot.is_zero(), "identifiable combination {row:?} sees the null direction");
    }
    let realization = verify::check_realization(&spec);
    assert!(!realization.pass);
    assert!(realization.counterexample.unwrap().lhs.starts_with("rank 6"));
}

#[test]
fn wrong_charges_break_the_gauge_bracket() {
    let spec = u1_spec();
    let r = spec.realizer().unwrap();
    let xi = VectorField::along(0, SpacetimeFunction::phase(2, 1));
    let x = vec![SpacetimeFunction::monomial(2, &[1], -1)];
    let (l, j) = (build_l(&xi), build_j(&x, 1).unwrap());
    let mut right = ExtensionParams::realized(&spec.params);
    right.k = spec.params.k.clone();
    let mut wrong = right.clone();
    wrong.g = vec![q("3")];
    let states = spec.states(&r);
    let mut differs = false;
    for t in &states {
        let v = TensorState::basis(t.clone());
        let lhs = r.op_apply(&l, &r.op_apply(&j, &v).unwrap()).unwrap().sub(&r.op_apply(&j, &r.op_apply(&l, &v).unwrap()).unwrap());
        let ok = r.op_apply(&canonicalize(&l_on_j(&xi, &x, &right)).to_operator().unwrap(), &v).unwrap();
        let bad = r.op_apply(&canonicalize(&l_on_j(&xi, &x, &wrong)).to_operator().unwrap(), &v).unwrap();
        assert_eq!(lhs, ok);
        differs |= lhs != bad;
    }
    assert!(differs);
}

#[test]
fn gauge_check_passes_on_small_window() {
    let rep = verify::check_gauge(&u1_spec());
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert!(rep.get_count("jj_pairs").unwrap() > 0);
}

#[test]
fn gauge_check_needs_a_gauge_sector() {
    assert!(!verify::check_gauge(&ProbeSpec::trivial(2)).pass);
}

#[test]
fn sl2_with_charges_violates_jacobi() {
    let mut p = CurrentParams::new(2, q("1"), q("0"), q("0"), q("0"), GaugeAlgebra::sl2(), q("4"), vec![Gq::zero(); 3], vec![Gq::zero(); 3]).unwrap();
    assert!(verify::check_current_jacobi(&p, 2).pass);
    p.g = vec![q("1"), q("0"), q("0")];
    assert!(!verify::check_current_jacobi(&p, 2).pass);
}

#[test]
fn sl2_charges_are_rejected() {
    let r = CurrentParams::new(2, q("1"), q("0"), q("0"), q("0"), GaugeAlgebra::sl2(), q("4"), vec![q("1"), q("0"), q("0")], vec![Gq::zero(); 3]);
    assert!(r.is_err());
}

#[test]
fn jj_central_term_is_level_times_mode() {
    let p = u1_params("2", "-3");
    for m in -4..=4 {
        let b = current_bracket(CurrentMode::j(0, m), CurrentMode::j(0, -m), &p).unwrap();
        assert_eq!(b.central, &q("5") * &Gq::from_int(m as i64));
        assert!(b.modes.is_empty());
    }
}

#[test]
fn delta_identities_at_small_k() {
    for id in DeltaIdentity::ALL {
        for k in -6..=6 {
            assert_eq!(verify::delta_coefficient(id, k), verify::delta_right_coefficient(id, k), "{} at k={k}", id.name());
        }
    }
    let rep = verify::check_delta_lemma(10);
    assert!(rep.pass);
    assert_eq!(rep.get_count("identities"), Some(60));
}

#[test]
fn q_transform_and_hamiltonian() {
    let spec = ProbeSpec::trivial(2).with_window(1, 1, 2, 2);
    let rep = verify::check_q_transform(&spec, 2);
    assert!(rep.pass, "{:?}", rep.counterexample);
    let rep = verify::check_hamiltonian(&spec);
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert_eq!(rep.get_value("lowest_eigenvalue"), Some("0"));

    let spec = u1_spec();
    let rep = verify::check_hamiltonian(&spec);
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert_eq!(rep.get_value("lowest_eigenvalue"), Some("1/3"));
}

#[test]
fn temporal_charges() {
    let rep = verify::check_temporal_virasoro(&ProbeSpec::trivial(2).with_window(1, 1, 3, 3), 3);
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert_eq!(rep.get_value("central_charge"), Some("2"));
    let rep = verify::check_temporal_virasoro(&ProbeSpec::trivial(4).with_window(1, 1, 3, 2), 3);
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert_eq!(rep.get_value("central_charge"), Some("6"));
}

#[test]
fn small_symbolic_campaigns() {
    let suite = JacobiSuite { deg: 1, freq: 1, draws: 1, ..JacobiSuite::new(2) };
    let rep = verify::check_jacobi(&suite);
    assert!(rep.pass, "{:?}", rep.counterexample);
    assert!(verify::check_coboundary(2, 1, 1, 2, 7).pass);
    assert!(verify::check_exact_chain(3, 1, 1).pass);
    assert!(verify::check_jet_lemma(2, 2, 1, 1, 3, 11).pass);
}
