//! Library results against values computed independently: closed forms,
//! direct determinant evaluation, lattice enumerations and finite differences.

use lagfib_core::betti::{
    betti_coords, betti_jacobian_matrix, locally_constant_rank, phi_nu_rank, torsion_search,
    BettiConfig, JacobianMethod, NewtonConfig, Section,
};
use lagfib_core::cubic::{det_polynomial, lossen_polynomial, simplex_lattice};
use lagfib_core::elliptic::{
    betti_elliptic, identity_family_oracle, rank_dichotomy, torsion_enumerate, EllipticFamily,
};
use lagfib_core::foliation::{leaf_potential, leaf_subspace, section_leaf_compat};
use lagfib_core::linalg::{exact_det, exact_span_basis};
use lagfib_core::period::{BaseBox, Potential};
use lagfib_core::{contract, Complex64, CubicForm, GaussRat, MVPoly, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(n: i64, d: i64) -> GaussRat {
    GaussRat::from_ratio(n, d)
}

#[test]
fn fermat_determinant_is_216_l1_l2_l3() {
    let x = |i| MVPoly::<GaussRat>::var(3, i);
    let fermat = &(&x(0).pow(3) + &x(1).pow(3)) + &x(2).pow(3);
    let d = det_polynomial(&CubicForm::from_polynomial(&fermat)).unwrap();
    assert_eq!(d.num_terms(), 1);
    assert_eq!(d.coefficient(&[1, 1, 1]), GaussRat::from_i64(216));
}

#[test]
fn determinant_polynomial_matches_pointwise_determinants() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4usize {
        for _ in 0..5 {
            let terms: Vec<(Vec<u32>, GaussRat)> = simplex_lattice(n, 3)
                .into_iter()
                .map(|e| (e, q(rng.random_range(-4..=4), rng.random_range(1..=3))))
                .collect();
            let cf = CubicForm::from_polynomial(&MVPoly::from_terms(n, terms).unwrap());
            let d = det_polynomial(&cf).unwrap();
            for _ in 0..4 {
                let lam: Vec<GaussRat> = (0..n).map(|_| q(rng.random_range(-6..=6), rng.random_range(1..=4))).collect();
                let direct = exact_det(contract(&cf, &lam).unwrap().rows());
                assert_eq!(d.eval(&lam).unwrap(), direct);
            }
        }
    }
}

#[test]
fn quadratic_section_torsion_points_form_a_lattice() {
    // g = (i/2)z², f = z²/2 gives a = (Re z, Im z)
    let p = Potential::new(MVPoly::var(1, 0).pow(2).scale(&c(0.0, 0.5)));
    let s = Section::new(MVPoly::var(1, 0).pow(2).scale(&c(0.5, 0.0)));
    let bx = BaseBox::new(vec![-0.5, 0.0], vec![0.5, 1.0]).unwrap();
    let cfg = BettiConfig::default();
    let found = torsion_search(&p, &s, &bx, 4, 9, &NewtonConfig::default(), &cfg).unwrap();
    let mut expected = Vec::new();
    for i in -2..=2 {
        for j in 0..=4 {
            expected.push((i as f64 / 4.0, j as f64 / 4.0));
        }
    }
    assert_eq!(found.hits.len(), expected.len());
    for (x, y) in expected {
        assert!(found
            .hits
            .iter()
            .any(|h| (h.b_re[0] - x).abs() < 1e-12 && (h.b_im[0] - y).abs() < 1e-12));
    }
}

#[test]
fn inadmissible_box_is_refused() {
    let p = Potential::new(MVPoly::var(1, 0).pow(2).scale(&c(0.0, -0.5)));
    let s = Section::new(MVPoly::var(1, 0));
    let bx = BaseBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let err = torsion_search(&p, &s, &bx, 2, 3, &NewtonConfig::default(), &BettiConfig::default())
        .unwrap_err();
    assert!(err.is_refusal());
    assert!(err.to_string().contains("inadmissible frame"));
}

/// Elliptic block `g = τ₀ z²/2 + k z³/6` against the closed-form toy solver:
/// on one variable the two routes must agree.
#[test]
fn betti_agrees_with_elliptic_closed_form_on_one_block() {
    let tau0 = c(0.2, 1.0);
    let k = c(0.3, 0.1);
    let z = MVPoly::<Complex64>::var(1, 0);
    let g = &z.pow(2).scale(&(tau0 / 2.0)) + &z.pow(3).scale(&(k / 6.0));
    let f = &z.pow(2).scale(&c(0.4, -0.2)) + &z.scale(&c(0.1, 0.7));
    let p = Potential::new(g);
    let s = Section::new(f.clone());
    let fam = EllipticFamily::new(
        MVPoly::from_terms(1, [(vec![0], tau0), (vec![1], k)]).unwrap(),
        f.diff(0).unwrap(),
        [-0.5, 0.5, -0.5, 0.5],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let b = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let a = betti_coords(&p, &s, &[b], &BettiConfig::default()).unwrap();
        let (b1, b2) = betti_elliptic(&fam, b).unwrap();
        assert!((a[0] - b1).abs() < 1e-12 && (a[1] - b2).abs() < 1e-12);
    }
}

#[test]
fn elliptic_enumeration_matches_oracle_for_large_orders() {
    let domain = [-1.0, 1.0, 0.5, 1.5];
    let fam = EllipticFamily::new(MVPoly::var(1, 0), MVPoly::constant(1, c(0.0, 1.0)), domain).unwrap();
    for order in [32u64, 64] {
        let got = torsion_enumerate(&fam, order, 1e-8).unwrap();
        let oracle = identity_family_oracle(order, domain);
        assert_eq!(got.hits.len(), oracle.len(), "N = {order}");
        for (k, m) in oracle {
            let (x, y) = (-(k as f64) / m as f64, order as f64 / m as f64);
            assert!(got.hits.iter().any(|h| (h.re - x).hypot(h.im - y) < 1e-8));
        }
    }
}

#[test]
fn elliptic_lattice_family_hits_the_grid() {
    // τ ≡ i, s(b) = b: β = (Re b, Im b)
    let fam = EllipticFamily::new(
        MVPoly::constant(1, c(0.0, 1.0)),
        MVPoly::var(1, 0),
        [-0.5, 0.5, 0.0, 1.0],
    )
    .unwrap();
    let got = torsion_enumerate(&fam, 6, 1e-8).unwrap();
    assert_eq!(got.hits.len(), 7 * 7);
    for h in &got.hits {
        assert!((h.re * 6.0 - (h.re * 6.0).round()).abs() < 1e-9);
        assert!((h.im * 6.0 - (h.im * 6.0).round()).abs() < 1e-9);
    }
}

#[test]
fn elliptic_rank_is_never_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..10_000 {
        let deg_tau = rng.random_range(0..=2u32);
        let deg_s = rng.random_range(0..=3u32);
        let coeff = |rng: &mut ChaCha8Rng| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut tau: Vec<(Vec<u32>, Complex64)> = vec![(vec![0], c(0.0, 2.0))];
        for d in 1..=deg_tau {
            tau.push((vec![d], coeff(&mut rng) * 0.3));
        }
        let s: Vec<(Vec<u32>, Complex64)> = (0..=deg_s).map(|d| (vec![d], coeff(&mut rng))).collect();
        let fam = EllipticFamily::new(
            MVPoly::from_terms(1, tau).unwrap(),
            MVPoly::from_terms(1, s).unwrap(),
            [-1.0, 1.0, -1.0, 1.0],
        )
        .unwrap();
        let b = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if let Ok(r) = rank_dichotomy(&fam, b, 1e-8, 1e-10) {
            assert_ne!(r.rank, 1, "rank 1 at {b} with singular values {:?}", r.singular_values);
            checked += 1;
        }
    }
    assert!(checked > 9_000);
}

#[test]
fn elliptic_betti_inverts_the_section() {
    let fam = EllipticFamily::new(
        MVPoly::from_terms(1, [(vec![0], c(0.1, 1.0)), (vec![2], c(0.2, 0.1))]).unwrap(),
        MVPoly::from_terms(1, [(vec![1], c(0.7, -0.3)), (vec![3], c(0.0, 1.0))]).unwrap(),
        [-0.5, 0.5, -0.5, 0.5],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1_000 {
        let b = c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        let (b1, b2) = betti_elliptic(&fam, b).unwrap();
        let back = c(b1, 0.0) + fam.tau_at(b) * b2;
        assert!((back - fam.s_at(b)).norm() < 1e-12);
    }
}

#[test]
fn leaf_plane_transforms_under_substitution() {
    // g(Az) has leaf plane A⁻¹W, so A maps it back onto span{e₃,e₄,e₅}
    let a: Vec<Vec<GaussRat>> = [
        [1, 0, 0, 0, 0],
        [1, 1, 0, 0, 0],
        [0, 2, 1, 0, 1],
        [0, 0, 1, 1, 0],
        [3, 0, 0, 0, 1],
    ]
    .iter()
    .map(|r| r.iter().map(|&x| GaussRat::from_i64(x)).collect())
    .collect();
    let base = leaf_potential::<GaussRat>();
    let moved = Potential::new(base.g().substitute_linear(&a).unwrap());
    let b = vec![GaussRat::zero(); 5];
    let w = leaf_subspace(&moved, &b, 1, 1e-8).unwrap();
    let mapped: Vec<Vec<GaussRat>> = w
        .iter()
        .map(|v| {
            (0..5)
                .map(|i| (0..5).fold(GaussRat::zero(), |acc, j| acc + a[i][j].clone() * v[j].clone()))
                .collect()
        })
        .collect();
    let e345: Vec<Vec<GaussRat>> = (2..5)
        .map(|i| (0..5).map(|j| GaussRat::from_i64(i64::from(i == j))).collect())
        .collect();
    assert_eq!(exact_span_basis(&mapped, 5), e345);
}

#[test]
fn compatible_sections_have_degenerate_phi() {
    let p = leaf_potential::<GaussRat>();
    let b: Vec<GaussRat> = [1, 1, -1, 2, 0].iter().map(|&k| q(k, 20)).collect();
    let x = |i| MVPoly::<GaussRat>::var(5, i);
    let f = Section::new(&(&x(0) * &x(1)).scale(&q(2, 3)) + &(&x(1).pow(2) + &x(3)));
    assert!(section_leaf_compat(&p, &f, &b, 0, 1e-8).unwrap().compatible);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..32 {
        let lam: Vec<GaussRat> = (0..5).map(|_| q(rng.random_range(-20..=20), rng.random_range(1..=7))).collect();
        assert!(phi_nu_rank(&p, &f, &b, &lam, 1e-8).unwrap() < 10);
    }
}

#[test]
fn lossen_leaf_potential_has_lossen_cubic() {
    let p = leaf_potential::<GaussRat>();
    let b: Vec<GaussRat> = (0..5).map(|k| q(k, 7)).collect();
    let expected = CubicForm::from_polynomial(&lossen_polynomial::<GaussRat>());
    assert_eq!(p.cubic_at(&b).unwrap(), expected);
}

fn random_potential_and_section(seed: u64, n: usize) -> (Potential<Complex64>, Section<Complex64>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeff = |s: f64| c(rng.random_range(-s..s), rng.random_range(-s..s));
    let mut g = MVPoly::zero(n);
    for i in 0..n {
        g = &g + &MVPoly::var(n, i).pow(2).scale(&c(0.0, 0.5));
    }
    let mut f = MVPoly::zero(n);
    for e in simplex_lattice(n, 3) {
        g = &g + &MVPoly::monomial(n, e.clone(), coeff(0.1));
        f = &f + &MVPoly::monomial(n, e, coeff(1.0));
    }
    for e in simplex_lattice(n, 2) {
        f = &f + &MVPoly::monomial(n, e, coeff(1.0));
    }
    let b = (0..n).map(|_| coeff(0.3)).collect();
    (Potential::new(g), Section::new(f), b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_jacobian_matches_finite_differences(seed in any::<u64>(), n in 1usize..=3) {
        let (p, s, b) = random_potential_and_section(seed, n);
        let cfg = BettiConfig::default();
        let (_, ja) = betti_jacobian_matrix(&p, &s, &b, JacobianMethod::Analytic, &cfg).unwrap();
        let (_, jf) = betti_jacobian_matrix(&p, &s, &b, JacobianMethod::FiniteDifference, &cfg).unwrap();
        let err = (&ja - &jf).norm() / ja.norm().max(1e-3);
        prop_assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn betti_rank_is_even(seed in any::<u64>(), n in 1usize..=3) {
        let (p, s, b) = random_potential_and_section(seed, n);
        if let Some(rank) = locally_constant_rank(&p, &s, &b, 1e-3, &BettiConfig::default()).unwrap() {
            prop_assert_eq!(rank % 2, 0);
        }
    }

    #[test]
    fn betti_vector_reconstructs_the_form(seed in any::<u64>(), n in 1usize..=3) {
        let (p, s, b) = random_potential_and_section(seed, n);
        let a = betti_coords(&p, &s, &b, &BettiConfig::default()).unwrap();
        let tau = p.tau_at(&b).unwrap();
        let grad = s.gradient_at(&b).unwrap();
        for j in 0..n {
            let rebuilt: Complex64 = c(a[j], 0.0) + (0..n).map(|i| tau.get(i, j) * a[n + i]).sum::<Complex64>();
            prop_assert!((rebuilt - grad[j]).norm() < 1e-10 * (1.0 + grad[j].norm()));
        }
    }

    #[test]
    fn polynomial_derivative_commutes(
        coeffs in proptest::collection::vec(-20i64..20, 10),
        i in 0usize..3,
        j in 0usize..3,
    ) {
        let terms = simplex_lattice(3, 3).into_iter().zip(coeffs).map(|(e, k)| (e, GaussRat::from_i64(k)));
        let p = MVPoly::from_terms(3, terms).unwrap();
        prop_assert_eq!(p.diff(i).unwrap().diff(j).unwrap(), p.diff(j).unwrap().diff(i).unwrap());
    }

    #[test]
    fn product_evaluates_to_product(
        a in proptest::collection::vec(-9i64..9, 6),
        b in proptest::collection::vec(-9i64..9, 6),
        z in proptest::collection::vec(-5i64..5, 2),
    ) {
        let mk = |cs: &[i64]| {
            let exps = [vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
            MVPoly::from_terms(2, exps.into_iter().zip(cs.iter().map(|&k| GaussRat::from_i64(k)))).unwrap()
        };
        let (pa, pb) = (mk(&a), mk(&b));
        let pt: Vec<GaussRat> = z.iter().map(|&k| GaussRat::from_ratio(k, 3)).collect();
        prop_assert_eq!((&pa * &pb).eval(&pt).unwrap(), pa.eval(&pt).unwrap() * pb.eval(&pt).unwrap());
    }
}
