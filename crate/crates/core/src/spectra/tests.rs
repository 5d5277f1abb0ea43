use super::*;
use crate::liealg::SchrodingerSpec;
use crate::poly::parse;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;

fn p1(s: &str) -> crate::poly::MultiPoly {
    parse(s, 1).unwrap()
}

fn dense_count_1d(w: &crate::poly::MultiPoly, lambda: f64, g: &Grid1D) -> usize {
    let (d, o) = super::sturm::tridiagonal(&w.compile(), g);
    let n = d.len();
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else if i.abs_diff(j) == 1 { o[0] } else { 0.0 });
    m.symmetric_eigen().eigenvalues.iter().filter(|&&e| e < lambda).count()
}

#[test]
fn harmonic_oscillator_in_one_dimension() {
    let w = p1("x1^2");
    let g = Grid1D::auto(&w, 6.0, 4.0).unwrap();
    assert_eq!(count_1d(&w, 6.0, &g).unwrap(), 3);
    assert_eq!(count_1d(&w, 0.0, &g).unwrap(), 0);
}

#[test]
fn quartic_ground_state_exceeds_one() {
    let w = p1("x1^4");
    let g = Grid1D::auto(&w, 1.0, 8.0).unwrap();
    assert_eq!(count_1d(&w, 1.0, &g).unwrap(), 0);
    let fine = Grid1D::new(g.half_width, 399).unwrap();
    assert_eq!(dense_count_1d(&w, 1.0, &fine), 0);
}

#[test]
fn domain_and_resolution_errors() {
    let w = p1("x1^2");
    assert!(matches!(count_1d(&w, 10.0, &Grid1D::new(2.0, 400).unwrap()), Err(SpectraError::DomainTooSmall { .. })));
    assert!(matches!(count_1d(&w, 10.0, &Grid1D::new(10.0, 20).unwrap()), Err(SpectraError::GridTooCoarse { .. })));
    assert!(matches!(Grid1D::auto(&p1("x1^3"), 1.0, 1.0), Err(SpectraError::NotConfining(_))));
    assert_eq!(count_1d(&parse("x1*x2", 2).unwrap(), 1.0, &Grid1D::new(1.0, 10).unwrap()), Err(SpectraError::NotOneDimensional));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sturm_matches_dense_eigensolver(m in 2usize..=400, c2 in 0.1f64..4.0, c4 in 0.0f64..2.0, shift in -3.0f64..3.0, lambda in -5.0f64..60.0) {
        let w = crate::poly::MultiPoly::from_terms(1, [
            (vec![0], crate::exact::q_from_f64(shift)),
            (vec![2], crate::exact::q_from_f64(c2)),
            (vec![4], crate::exact::q_from_f64(c4)),
        ]);
        let g = Grid1D::new(3.0, m).unwrap();
        let (d, o) = super::sturm::tridiagonal(&w.compile(), &g);
        prop_assert_eq!(sturm_count(&d, &o, lambda), dense_count_1d(&w, lambda, &g));
    }

    #[test]
    fn counts_increase_with_lambda(l1 in 0.0f64..40.0, dl in 0.0f64..20.0) {
        let w = p1("x1^2 + x1^4/4");
        let g = Grid1D::auto(&w, 60.0, 1.0).unwrap();
        prop_assert!(count_1d(&w, l1, &g).unwrap() <= count_1d(&w, l1 + dl, &g).unwrap());
    }

    #[test]
    fn cdv_without_field_is_weyl(n in 1usize..=4, lambda in -2.0f64..50.0) {
        let z = vec![vec![0.0; n]; n];
        let weyl = if lambda > 0.0 {
            (2.0 * PI).powi(-(n as i32)) * crate::scaling::unit_ball_volume(n) * lambda.powf(n as f64 / 2.0)
        } else {
            0.0
        };
        prop_assert!((cdv_density(&z, lambda) - weyl).abs() <= 1e-12 * weyl.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn landau_sum_is_the_phase_integral(b1 in 0.5f64..3.0, b2 in 0.5f64..3.0, d in 1usize..=3, lambda in 0.5f64..20.0, two in proptest::bool::ANY) {
        let b = if two { vec![b1, b2] } else { vec![b1] };
        let exact = landau_sum(&b, d, lambda);
        // ∫_{ℝ^d} harmonic_count(b, |ξ|², λ) dξ in polar form, panel by panel between jump radii
        let surface = d as f64 * crate::scaling::unit_ball_volume(d);
        let mut radii = vec![0.0, lambda.sqrt()];
        landau_levels(&b, lambda, &mut |e| radii.push((lambda - e).sqrt()));
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let tol = quad::Tolerance::new(1e-13, 1e-12);
        let value: f64 = radii
            .windows(2)
            .map(|w| quad::adaptive(|r| surface * r.powi(d as i32 - 1) * harmonic_count(&b, r * r, lambda) as f64, w[0], w[1], tol).value)
            .sum();
        let radial = quad::QuadResult { value, error: 0.0, evals: 0, converged: true };
        prop_assert!((radial.value - exact).abs() <= 1e-6 * exact.max(1.0), "{} vs {}", radial.value, exact);
    }
}

#[test]
fn harmonic_count_examples() {
    assert_eq!(harmonic_count(&[1.0, 1.0], 0.0, 4.1), 3);
    assert_eq!(harmonic_count(&[1.0], 0.0, 1e3), 500);
    assert_eq!(harmonic_count(&[2.0, 3.0], 1.0, 6.0), 1);
    assert_eq!(harmonic_count(&[], 0.0, 1.0), 1);
}

#[test]
fn cdv_density_examples() {
    let b2 = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
    assert!((cdv_density(&b2, 4.0) - 1.0 / PI).abs() < 1e-14);
    assert!((cdv_density(&vec![vec![0.0; 2]; 2], 1.0) - 1.0 / (4.0 * PI)).abs() < 1e-14);
    let b4 = vec![
        vec![0.0, 1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0, 0.0],
    ];
    assert!((cdv_density(&b4, 2.5) - (2.0 * PI).powi(-2)).abs() < 1e-14);
    // three dimensions: one Landau pair along |ω| plus a free direction
    let b3 = vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 2.0], vec![0.0, -2.0, 0.0]];
    let expect = (2.0 * PI).powi(-2) * 2.0 * 2.0 * ((5.0f64 - 2.0).sqrt() + (5.0f64 - 6.0).max(0.0).sqrt());
    assert!((cdv_density(&b3, 5.0) - expect).abs() < 1e-14);
}

#[test]
fn landau_sum_examples() {
    assert!((landau_sum(&[1.0], 1, 2.0) - 2.0).abs() < 1e-14);
    assert_eq!(landau_sum(&[1.0], 1, 0.5), 0.0);
    assert!((landau_sum(&[1.0], 2, 4.0) - 4.0 * PI).abs() < 1e-12);
}

fn harmonic_2d() -> SchrodingerSpec {
    SchrodingerSpec::electric(parse("x1^2 + x2^2", 2).unwrap())
}

#[test]
fn two_dimensional_harmonic_levels() {
    let s = harmonic_2d();
    let g = GridND::new(vec![12.0, 12.0], vec![200, 200]).unwrap();
    let r = count_nd_direct(&s, 4.1, &g).unwrap();
    assert_eq!((r.count, r.method), (3, CountMethod::Separable));
    assert!(r.flags.is_empty());
}

#[test]
fn band_and_separable_paths_agree() {
    let s = harmonic_2d();
    let lat = GridND::resolved(&s, vec![5.0, 5.0], 9.3, 1.0).unwrap();
    let sep = count_nd_direct(&s, 9.3, &lat).unwrap();
    // a vanishing potential coupling term forces the band path on the same matrix
    let mixed = SchrodingerSpec::new(vec![parse("0", 2).unwrap(); 2], parse("x1^2 + x2^2 + 0*x1*x2", 2).unwrap()).unwrap();
    assert_eq!(sep.method, CountMethod::Separable);
    let tilted = SchrodingerSpec::electric(parse("x1^2 + x2^2 + x1*x2/1000000", 2).unwrap());
    let band = count_nd_direct(&tilted, 9.3, &lat).unwrap();
    assert_eq!(band.method, CountMethod::BandInertia { complex: false });
    assert_eq!(band.count, sep.count);
    assert_eq!(count_nd_direct(&mixed, 9.3, &lat).unwrap().count, sep.count);
}

/// Dense Hermitian discretization with the same Peierls links, realified.
fn dense_magnetic_count(spec: &SchrodingerSpec, g: &GridND, lambda: f64) -> usize {
    let (m1, m2) = (g.points[0], g.points[1]);
    let (h1, h2) = (g.spacing(0), g.spacing(1));
    let n = m1 * m2;
    let node = |i: usize, h: f64, l: f64| -l + (i + 1) as f64 * h;
    let a: Vec<_> = spec.a().iter().map(|p| p.compile()).collect();
    let v = spec.v().compile();
    let mut re = DMatrix::<f64>::zeros(n, n);
    let mut im = DMatrix::<f64>::zeros(n, n);
    for i2 in 0..m2 {
        for i1 in 0..m1 {
            let p = i1 + m1 * i2;
            let x = [node(i1, h1, g.half_widths[0]), node(i2, h2, g.half_widths[1])];
            re[(p, p)] = 2.0 / (h1 * h1) + 2.0 / (h2 * h2) + v.eval(&x);
            let links = [(i1 + 1 < m1, 1usize, 0usize, h1), (i2 + 1 < m2, m1, 1usize, h2)];
            for (ok, stride, axis, h) in links {
                if !ok {
                    continue;
                }
                let th = quad::kronrod15(
                    &|t: f64| {
                        let mut y = x;
                        y[axis] += t;
                        a[axis].eval(&y)
                    },
                    0.0,
                    h,
                )
                .0;
                let q = p + stride;
                re[(p, q)] = -th.cos() / (h * h);
                im[(p, q)] = -th.sin() / (h * h);
                re[(q, p)] = re[(p, q)];
                im[(q, p)] = -im[(p, q)];
            }
        }
    }
    let big = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let (r, c) = (i % n, j % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => re[(r, c)],
            (0, 1) => -im[(r, c)],
            _ => im[(r, c)],
        }
    });
    big.symmetric_eigen().eigenvalues.iter().filter(|&&e| e < lambda).count() / 2
}

#[test]
fn magnetic_band_inertia_matches_dense() {
    let s = SchrodingerSpec::from_field_2d(parse("x1^2 + x2^2 + 1", 2).unwrap(), parse("0", 2).unwrap()).unwrap();
    let g = GridND::new(vec![2.5, 2.0], vec![14, 12]).unwrap();
    for lambda in [2.0, 5.3, 9.7] {
        let c = super::direct::count_unchecked(&s, lambda, &g).unwrap();
        assert_eq!(c as usize, dense_magnetic_count(&s, &g, lambda), "λ = {lambda}");
    }
    let fine = GridND::resolved(&s, vec![2.5, 2.0], 5.3, 1.0).unwrap();
    assert_eq!(count_nd_direct(&s, 5.3, &fine).unwrap().method, CountMethod::BandInertia { complex: true });
}

#[test]
fn band_inertia_matches_dense_on_random_band() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for (n, w) in [(30usize, 3usize), (60, 7), (41, 1), (25, 24)] {
        let mut b = BandMatrix::zeros(n, w);
        for j in 0..n {
            for i in j..(j + w + 1).min(n) {
                b.add(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let dense = DMatrix::from_fn(n, n, |i, j| b.get(i, j));
        let eig = dense.symmetric_eigen().eigenvalues;
        for sigma in [-0.7, 0.0, 0.4] {
            let expect = eig.iter().filter(|&&e| e < sigma).count();
            assert_eq!(b.inertia(sigma).unwrap().negative, expect);
        }
    }
}

#[test]
fn two_by_two_pivots_handle_zero_diagonals() {
    let mut b = BandMatrix::zeros(4, 1);
    b.add(1, 0, 1.0);
    b.add(3, 2, 2.0);
    b.add(2, 1, 0.5);
    let i = b.inertia(0.0).unwrap();
    assert_eq!((i.negative, i.positive), (2, 2));
}

#[test]
fn gauge_changes_leave_discrete_counts_unchanged() {
    let s = SchrodingerSpec::from_field_2d(parse("x1^2 + x2^2 + 1", 2).unwrap(), parse("0", 2).unwrap()).unwrap();
    let t = s.gauge_transform(&parse("x1^3*x2 - 2*x2^2 + x1", 2).unwrap());
    let g = GridND::resolved(&s, vec![3.0, 3.0], 7.5, 1.0).unwrap();
    for lambda in [4.0, 7.5] {
        assert_eq!(count_nd_direct(&s, lambda, &g).unwrap().count, count_nd_direct(&t, lambda, &g).unwrap().count);
    }
}

#[test]
fn refinement_deltas_shrink() {
    let s = harmonic_2d();
    let lambda = 19.0;
    let counts: Vec<i64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&r| {
            let g = GridND::resolved(&s, vec![9.0, 9.0], lambda, r).unwrap();
            count_nd_direct(&s, lambda, &g).unwrap().count as i64
        })
        .collect();
    let deltas: Vec<i64> = counts.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(deltas.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    assert_eq!(*counts.last().unwrap(), 45);
}

#[test]
fn truncation_and_resolution_are_enforced() {
    let s = harmonic_2d();
    let g = GridND::new(vec![2.0, 2.0], vec![60, 60]).unwrap();
    let r = count_nd_direct(&s, 6.0, &g).unwrap();
    assert!(r.flags.iter().any(|f| matches!(f, DirectFlag::TruncationUnsound { .. })));
    let coarse = GridND::new(vec![10.0, 10.0], vec![20, 20]).unwrap();
    assert!(matches!(count_nd_direct(&s, 6.0, &coarse), Err(SpectraError::GridTooCoarse { .. })));
    let g = GridND::for_spec(&s, 30.0, 16.0, 1.0).unwrap();
    assert!((g.half_widths[0] - ((16.0f64 * 30.0).sqrt() - 2.0 * 2f64.powf(0.25))).abs() < 1e-9);
    assert!(g.spacing(0) * 30f64.sqrt() <= 0.25);
}

#[test]
fn storage_budget_is_reported() {
    let s = SchrodingerSpec::from_field_2d(parse("x1*x2", 2).unwrap(), parse("0", 2).unwrap()).unwrap();
    let g = GridND::for_spec(&s, 20.0, 16.0, 1.0).unwrap();
    assert!(matches!(count_nd_direct(&s, 20.0, &g), Err(SpectraError::GridTooLarge { .. })));
}

#[test]
fn weyl_integral_of_the_harmonic_oscillator() {
    let r = weyl_cdv_integral(&harmonic_2d(), 100.0, &Region::AllSpace, 1e-5).unwrap();
    assert!((r.value / 1250.0 - 1.0).abs() < 5e-3, "{r:?}");
}

#[test]
fn weyl_integral_on_a_bounded_region() {
    let free = SchrodingerSpec::electric(parse("0", 2).unwrap());
    let r = weyl_cdv_integral(&free, 3.0, &Region::Box(vec![1.0, 2.0]), 1e-8).unwrap();
    let expect = PI / (4.0 * PI * PI) * 3.0 * 8.0;
    assert!((r.value - expect).abs() < 1e-8 * expect);
}

#[test]
fn balanced_field_diverges() {
    for b in ["x1*x2", "x1^2*x2^2"] {
        let s = SchrodingerSpec::from_field_2d(parse(b, 2).unwrap(), parse("0", 2).unwrap()).unwrap();
        assert!(matches!(weyl_cdv_integral(&s, 10.0, &Region::AllSpace, 1e-3), Err(SpectraError::NonConvergent { .. })), "{b}");
    }
}

#[test]
fn weakly_degenerate_region_is_a_subset() {
    let s = SchrodingerSpec::from_field_2d(parse("x1^2 + x2^2 + 1", 2).unwrap(), parse("0", 2).unwrap()).unwrap();
    let all = weyl_cdv_integral(&s, 20.0, &Region::AllSpace, 1e-5).unwrap().value;
    let weak = weyl_cdv_integral(&s, 20.0, &Region::WeaklyDegenerate(1.2), 1e-5).unwrap().value;
    assert!(weak > 0.0 && weak <= all * (1.0 + 1e-6));
}
