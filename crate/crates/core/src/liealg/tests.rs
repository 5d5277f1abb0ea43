use super::*;
use crate::exact::q;
use crate::poly::parse;

fn inhomog() -> SchrodingerSpec {
    SchrodingerSpec::parse(2, &["0", "x1^3/3 - x1*x2"], "0").unwrap()
}

fn heisenberg() -> SchrodingerSpec {
    SchrodingerSpec::parse(2, &["0", "x1"], "0").unwrap()
}

#[test]
fn inhomogeneous_algebra() {
    let g = LieAlgebra::build(&inhomog());
    assert_eq!(g.dim(), 5);
    let mb: Vec<String> = g.mult_basis().iter().map(|p| p.to_string()).collect();
    assert_eq!(mb, vec!["x1^2 - x2", "x1", "1"]);
    // [L1, L2] = i(x1² − x2) = X
    assert_eq!(g.structure(0, 1), &[q(0), q(0), q(1), q(0), q(0)]);
    // [L1, X] = 2·i x1, [L2, X] = −i
    assert_eq!(g.structure(0, 2), &[q(0), q(0), q(0), q(2), q(0)]);
    assert_eq!(g.structure(1, 2), &[q(0), q(0), q(0), q(0), q(-1)]);
    g.check_axioms().unwrap();
    assert!(g.l0().is_none());
}

#[test]
fn small_algebras() {
    let h = LieAlgebra::build(&heisenberg());
    assert_eq!(h.dim(), 3);
    let w = LieAlgebra::build(&SchrodingerSpec::electric(parse("x1^2", 1).unwrap()));
    assert_eq!(w.dim(), 4);
    assert_eq!(w.l0().unwrap(), &[q(0), q(1), q(0), q(0)]);
    let z = LieAlgebra::build(&SchrodingerSpec::electric(MultiPoly::zero(2)));
    assert_eq!(z.dim(), 2);
    assert!(z.is_abelian());
}

#[test]
fn tensor_sign_convention() {
    let s = inhomog();
    let t = s.tensor();
    assert_eq!(t.get(0, 1), &parse("x2 - x1^2", 2).unwrap());
    assert_eq!(s.field_2d().unwrap(), parse("x1^2 - x2", 2).unwrap());
}

#[test]
fn poincare_gauge_reproduces_field() {
    let b = parse("x1^2 - x2", 2).unwrap();
    let s = SchrodingerSpec::from_field_2d(b.clone(), MultiPoly::zero(2)).unwrap();
    assert_eq!(s.field_2d().unwrap(), b);
    let c = SchrodingerSpec::from_field_2d(MultiPoly::constant(2, q(1)), MultiPoly::zero(2)).unwrap();
    assert_eq!(c.a()[0], parse("-1/2*x2", 2).unwrap());
    assert_eq!(c.a()[1], parse("1/2*x1", 2).unwrap());
}

#[test]
fn gauge_pairs() {
    let a = heisenberg();
    let b = SchrodingerSpec::parse(2, &["-x2", "0"], "0").unwrap();
    assert!(is_gauge_invariant_pair(&a, &b).unwrap());
    let c = SchrodingerSpec::parse(2, &["x2", "0"], "0").unwrap();
    assert!(!is_gauge_invariant_pair(&a, &c).unwrap());
    let d = a.gauge_transform(&parse("x1^2", 2).unwrap());
    assert_eq!(d.a()[0], parse("2*x1", 2).unwrap());
    assert!(is_gauge_invariant_pair(&a, &d).unwrap());
    assert!(is_gauge_invariant_pair(&a, &a).unwrap());
    let e = SchrodingerSpec::electric(MultiPoly::zero(3));
    assert!(matches!(is_gauge_invariant_pair(&a, &e), Err(LieError::DimensionMismatch { .. })));
}

#[test]
fn discreteness_examples() {
    assert!(discreteness(&inhomog()));
    assert!(!discreteness(&heisenberg()));
    assert!(discreteness(&SchrodingerSpec::electric(parse("x1^2*x2^2", 2).unwrap())));
    assert!(!discreteness(&SchrodingerSpec::electric(MultiPoly::zero(2))));
    assert!(!discreteness(&SchrodingerSpec::electric(parse("(x1 + x2)^2", 2).unwrap())));
}

#[test]
fn skew_forms() {
    let h = LieAlgebra::build(&heisenberg());
    let f = LinFunctional { values: vec![q(0), q(0), q(1)] };
    assert_eq!(h.skew_form(&f).rank(), 2);
    assert_eq!(h.radical(&f), vec![vec![q(0), q(0), q(1)]]);
    let z = LinFunctional::zero(3);
    assert!(h.skew_form(&z).is_zero());
    assert_eq!(h.radical(&z).len(), 3);

    let g = LieAlgebra::build(&inhomog());
    let f0 = g.base_point();
    assert_eq!(f0.values, vec![q(0), q(0), q(0), q(0), q(1)]);
    assert_eq!(g.skew_form(&f0).rank(), 4);
    assert_eq!(g.radical(&f0), vec![vec![q(0), q(0), q(0), q(0), q(1)]]);
}

#[test]
fn polarizations() {
    let g = LieAlgebra::build(&inhomog());
    let p = g.polarization(&g.base_point()).unwrap();
    assert_eq!(p.basis.len(), 3);
    assert_eq!(p.complement, vec![0, 1]);
    for i in 2..5 {
        assert!(in_span(&p.basis, &g.basis_vector(i)));
    }

    let h = LieAlgebra::build(&heisenberg());
    let f = LinFunctional { values: vec![q(0), q(0), q(1)] };
    let p = h.polarization(&f).unwrap();
    assert_eq!(p.basis.len(), 2);
    assert!(in_span(&p.basis, &h.basis_vector(0)));
    assert_eq!(p.complement, vec![1]);

    let ab = LieAlgebra::build(&SchrodingerSpec::electric(parse("x1 + 2*x2", 2).unwrap()));
    let p = ab.polarization(&ab.base_point()).unwrap();
    // V linear: brackets land in the constants, still a nonabelian algebra
    assert_eq!(p.basis.len(), (ab.dim() + ab.radical(&ab.base_point()).len()) / 2);
}

#[test]
fn abelian_polarization_is_everything() {
    let z = LieAlgebra::build(&SchrodingerSpec::electric(MultiPoly::zero(2)));
    let p = z.polarization(&z.base_point()).unwrap();
    assert_eq!(p.basis.len(), 2);
    assert!(p.complement.is_empty());
}

#[test]
fn quotient_of_inhomogeneous_algebra() {
    let g = LieAlgebra::build(&inhomog());
    let ideal = vec![g.basis_vector(4)];
    let gb = g.quotient(&ideal).unwrap();
    assert_eq!(gb.dim(), 4);
    gb.check_axioms().unwrap();
    // [L̄2, X̄] = 0 after killing the constants
    assert!(gb.structure(1, 2).iter().all(Zero::is_zero));
    assert_eq!(gb.structure(0, 2), &[q(0), q(0), q(0), q(2)]);
    assert!(g.quotient(&[g.basis_vector(3)]).is_err());
}

#[test]
fn nilpotency_and_center() {
    let g = LieAlgebra::build(&inhomog());
    assert_eq!(g.lower_central_series(), vec![5, 3, 2, 1, 0]);
    assert_eq!(g.center(), vec![g.basis_vector(4)]);
    let d = g.derived();
    assert!(g.bracket_span(&d, &d).is_empty());
}

#[test]
fn structure_json_lists_triples() {
    let h = LieAlgebra::build(&heisenberg());
    let j: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
    assert_eq!(j["brackets"][0], serde_json::json!([0, 1, 2, "1"]));
}

#[test]
fn from_structure_rejects_bad_jacobi() {
    let labels = vec!["A".to_string(), "B".into(), "C".into()];
    let kinds = vec![BasisKind::FirstOrder(1), BasisKind::FirstOrder(2), BasisKind::Mult];
    // sl2-like brackets are fine for Jacobi; break it with a bad extra constant
    let ok = LieAlgebra::from_structure(labels.clone(), kinds.clone(), &[(0, 1, 2, q(1))]);
    assert!(ok.is_ok());
    let bad = LieAlgebra::from_structure(labels, kinds, &[(0, 1, 2, q(1)), (0, 2, 0, q(1)), (1, 2, 2, q(1))]);
    assert!(bad.is_err());
}
