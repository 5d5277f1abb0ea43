use super::*;
use crate::exact::qr;
use crate::orbit::{base_chart, orbit_space, FamilyKind, FamilyParams};
use crate::poly::parse;

fn field(b: &str) -> SchrodingerSpec {
    SchrodingerSpec::from_field_2d(parse(b, 2).unwrap(), MultiPoly::zero(2)).unwrap()
}

fn weyl() -> SchrodingerSpec {
    SchrodingerSpec::electric(parse("x1^2 + x2^2", 2).unwrap())
}

fn limit(s: &SchrodingerSpec) -> (crate::liealg::LieAlgebra, OrbitChart, LimitMeasure) {
    let (g, c) = base_chart(s).unwrap();
    let mu = exact_limit_unchecked(&c, &spec_weights(s).unwrap()).unwrap();
    (g, c, mu)
}

fn quick_plan() -> ValidationPlan {
    ValidationPlan { samples: 200_000, ..Default::default() }
}

#[test]
fn star_functions_carry_constants() {
    let s = field("x1^2 - x2");
    let phi = phi_star(&s);
    let psi = psi_star(&s);
    assert!((phi.constant - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    assert!((psi.constant - (1.0 + 2f64.powf(0.25))).abs() < 1e-12);
    assert!((phi.eval(&[1.0, 1.0]) - (2f64.sqrt() + phi.constant)).abs() < 1e-12);
    assert!((psi.eval(&[1.0, 1.0]) - (2f64.powf(1.0 / 3.0) + psi.constant)).abs() < 1e-12);

    let v = SchrodingerSpec::electric(parse("x1^2", 1).unwrap());
    let psi = psi_star(&v);
    assert!((psi.constant - 2f64.powf(0.25)).abs() < 1e-12);
    assert!((psi.eval(&[3.0]) - (3.0 + 6f64.powf(1.0 / 3.0) + psi.constant)).abs() < 1e-12);
}

#[test]
fn inhomogeneous_limit_is_triangular() {
    let (g, _, mu) = limit(&field("x1^2 - x2"));
    assert_eq!((mu.alpha.clone(), mu.beta), (q(4), 0));
    assert_eq!(mu.kind, LimitKind::Triangular { jacobian: q(1) });
    let surv: Vec<Option<String>> = mu.survivors.iter().map(|s| s.as_ref().map(|p| p.to_string())).collect();
    assert_eq!(surv, vec![Some("x1".into()), Some("x2".into()), Some("x4".into()), Some("x3".into()), None]);
    assert_eq!(mu.annihilated, vec![g.basis_vector(4)]);
    let gb = reduced_algebra(&g, &mu).unwrap();
    let fam = orbit_space(&gb, &mu).unwrap();
    assert_eq!(fam.kind, FamilyKind::TriangularChain);
    assert_eq!(fam.params, FamilyParams::Triangular { factor: q(2) });
    assert!((fam.nu_density(&[3.0, 0.0]) - 3.0 / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn quasi_dilation_limits() {
    let (g, _, mu) = limit(&weyl());
    assert_eq!((mu.alpha.clone(), mu.beta), (q(3), 0));
    assert!(matches!(mu.kind, LimitKind::QuasiDilation { .. }));
    let fam = orbit_space(&reduced_algebra(&g, &mu).unwrap(), &mu).unwrap();
    assert_eq!(fam.kind, FamilyKind::Abelian);

    let (g, _, mu) = limit(&field("x1^2 + x2^2"));
    let fam = orbit_space(&reduced_algebra(&g, &mu).unwrap(), &mu).unwrap();
    assert_eq!(fam.kind, FamilyKind::HeisenbergCdV);

    let (_, _, mu) = limit(&SchrodingerSpec::electric(parse("x1^4", 1).unwrap()));
    assert_eq!(mu.alpha, qr(5, 4));
}

#[test]
fn monomial_limits() {
    let (g, _, mu) = limit(&field("x1*x2"));
    assert_eq!((mu.alpha.clone(), mu.beta), (q(3), 1));
    assert_eq!(mu.density, LimitDensity::Power { var: 2, factor: q(2), exponent: q(0) });
    let fam = orbit_space(&reduced_algebra(&g, &mu).unwrap(), &mu).unwrap();
    assert_eq!(fam.params, FamilyParams::MonomialBalanced { k: 1 });

    let (_, _, mu) = limit(&field("x1^2*x2^2"));
    assert_eq!((mu.alpha.clone(), mu.beta), (qr(5, 2), 1));
    assert_eq!(mu.density, LimitDensity::Power { var: 2, factor: qr(1, 2), exponent: qr(-1, 2) });

    let (g, _, mu) = limit(&field("x1^2*x2"));
    assert_eq!((mu.alpha.clone(), mu.beta), (q(3), 0));
    let fam = orbit_space(&reduced_algebra(&g, &mu).unwrap(), &mu).unwrap();
    assert_eq!(fam.params, FamilyParams::MonomialStrong { p: 2, q: 1 });

    // reflected exponents give the same family
    let (g, _, mu) = limit(&field("x1*x2^2"));
    let fam = orbit_space(&reduced_algebra(&g, &mu).unwrap(), &mu).unwrap();
    assert_eq!(fam.params, FamilyParams::MonomialStrong { p: 2, q: 1 });
}

#[test]
fn exact_and_sampled_exponents_agree() {
    for s in [field("x1^2 - x2"), field("x1*x2"), weyl()] {
        let (_, c) = base_chart(&s).unwrap();
        let mu = exact_limit_with(&c, &spec_weights(&s).unwrap(), &quick_plan()).unwrap();
        let v = mu.validation.clone().unwrap();
        assert!((v.fit.a - mu.alpha_f64()).abs() <= 0.1);
        assert_eq!(v.fit.b as u32, mu.beta);
    }
}

#[test]
fn triangular_growth_constant() {
    let coords: Vec<MultiPoly> = ["x1", "x2", "x3^2 - x4", "x3", "1"].iter().map(|s| parse(s, 4).unwrap()).collect();
    let c = mc_growth(&coords, &[100.0], 200_000, 5).unwrap();
    let exact = std::f64::consts::PI.powi(2) / 2.0 * (100.0f64.powi(2) - 1.0).powi(2);
    let p = &c.points[0];
    assert!((p.value - exact).abs() < 4.0 * p.error + 1e-9 * exact, "{p:?} vs {exact}");
}

#[test]
fn rescaling_changes_only_the_constant() {
    let (_, c) = base_chart(&field("x1*x2")).unwrap();
    let lambdas = log_space(1e3, 1e6, 7);
    let a = fit(&mc_growth(&c.coords, &lambdas, 200_000, 9).unwrap(), None).unwrap();
    let scaled: Vec<MultiPoly> = c.coords.iter().map(|p| p.scale(&q(3))).collect();
    let b = fit(&mc_growth(&scaled, &lambdas, 200_000, 9).unwrap(), None).unwrap();
    assert_eq!(a.b, b.b);
    assert!((a.a - b.a).abs() < 0.05);
}

#[test]
fn classifier_separates_strong_and_weak() {
    let lambdas = log_space(1e3, 1e6, 7);
    let strong = classify(&field("x1^2 - x2"), &lambdas, 200_000, 7).unwrap();
    assert_eq!(strong.classification, Degeneration::Strong);
    assert_eq!(strong.kappa.value, 1.0);
    let f1 = strong.fit1.unwrap();
    let f2 = strong.fit2.unwrap();
    assert!((f1.a - 4.0).abs() < 0.1 && (f2.a - 5.0).abs() < 0.1);
    assert_eq!(strong.dominance_violations, 0);
    assert!(strong.g1.points.iter().zip(&strong.g2.points).all(|(a, b)| b.value >= a.value));

    let weak = classify(&field("x1*x2"), &lambdas, 200_000, 7).unwrap();
    assert_eq!(weak.classification, Degeneration::WeakIntermediate);
    assert!((1.7..=2.3).contains(&weak.kappa.value), "{:?}", weak.kappa);

    let flat = classify(&weyl(), &lambdas, 200_000, 7).unwrap();
    assert_eq!(flat.classification, Degeneration::WeakIntermediate);
    assert!((flat.kappa.value - 1.0).abs() < 0.05, "{:?}", flat.kappa);
}

#[test]
fn unsupported_family_lists_reasons() {
    let (_, c) = base_chart(&field("x1^3 + x2^3 + x1*x2")).unwrap();
    let w = spec_weights(&field("x1^3 + x2^3 + x1*x2")).unwrap();
    match exact_limit_unchecked(&c, &w) {
        Err(ScalingError::UnsupportedFamily(msg)) => {
            assert!(msg.contains("monomial") && msg.contains("triangular"));
        }
        other => panic!("{other:?}"),
    }
}
