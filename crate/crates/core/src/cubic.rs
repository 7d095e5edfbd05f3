//! Classification of cubic forms by the degeneracy of their partials.
//!
//! A cubic `C` is a cone when some direction `v` has `C(v, ·, ·) = 0`. The
//! partial-derivative quadrics are the contractions `Q_λ = C(λ, ·, ·)`, and
//! "all partials degenerate" means `D(λ) = det Q_λ` vanishes identically. In
//! up to four variables the two notions coincide; in five variables the
//! non-cone degenerate cubics are singular along a plane, which
//! [`singular_plane`] recovers from the kernels of generic `Q_λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{contract, form_rank, CubicForm, QuadraticForm, DEFAULT_RANK_TOL};
use crate::linalg;
use crate::poly::MVPoly;
use crate::scalar::{Complex64, Scalar, ScalarJson};

/// Random `λ` draws used by the float-mode degeneracy verdict.
pub const FLOAT_DEGENERACY_SAMPLES: usize = 32;
/// `λ` draws per attempt when recovering the singular plane.
pub const PLANE_DRAWS: usize = 12;
pub const PLANE_RETRIES: usize = 3;

fn linear_map_rows<S: Scalar>(c: &CubicForm<S>) -> Vec<Vec<S>> {
    let n = c.dim();
    let mut rows = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        for k in j..n {
            rows.push((0..n).map(|i| c.get(i, j, k).clone()).collect());
        }
    }
    rows
}

/// Kernel of `v ↦ contract(C, v)`; `Some(basis)` exactly when `C` is a cone.
pub fn is_cone<S: Scalar>(c: &CubicForm<S>) -> Option<Vec<Vec<S>>> {
    let ker = S::nullspace(&linear_map_rows(c), c.dim(), DEFAULT_RANK_TOL);
    (!ker.is_empty()).then_some(ker)
}

/// All `α ∈ ℕ^m` with `|α| = d`, in lexicographic order.
pub fn simplex_lattice(m: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(m: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == m {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k);
            rec(m, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(m, d, &mut Vec::new(), &mut out);
    out
}

fn require_exact<S: Scalar>(what: &str) -> Result<()> {
    if S::is_exact() {
        Ok(())
    } else {
        Err(Error::ModeMismatch(format!("{what} requires exact mode")))
    }
}

fn det_at<S: Scalar>(c: &CubicForm<S>, lambda: &[S]) -> S {
    let q = contract(c, lambda).expect("lambda has length n");
    linalg::exact_det(q.rows())
}

/// `D(λ) = det(contract(C, λ))` as an exact polynomial, interpolated from
/// its values on the integer grid `{0, …, n}ⁿ` (tensor-product Lagrange).
pub fn det_polynomial<S: Scalar>(c: &CubicForm<S>) -> Result<MVPoly<S>> {
    require_exact::<S>("det_polynomial")?;
    let n = c.dim();
    if n == 0 {
        return Ok(MVPoly::constant(0, S::one()));
    }
    let side = n + 1;
    let total = side.pow(n as u32);
    let index_of = |mut k: usize| -> Vec<usize> {
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = k % side;
            k /= side;
        }
        idx
    };
    let mut values: Vec<S> = (0..total)
        .map(|k| {
            let lam: Vec<S> = index_of(k).iter().map(|&x| S::from_i64(x as i64)).collect();
            det_at(c, &lam)
        })
        .collect();

    // inverse Vandermonde on nodes 0..n maps values to monomial coefficients
    let vander: Vec<Vec<S>> = (0..side)
        .map(|x| (0..side).map(|e| S::from_i64(x as i64).pow(e as u32)).collect())
        .collect();
    let vinv = invert(&vander);

    let mut stride = 1;
    for _axis in (0..n).rev() {
        let mut next = values.clone();
        for base in 0..total {
            if (base / stride) % side != 0 {
                continue;
            }
            for e in 0..side {
                let mut acc = S::zero();
                for x in 0..side {
                    let v = &values[base + x * stride];
                    if !v.is_zero() {
                        acc = acc + vinv[e][x].clone() * v.clone();
                    }
                }
                next[base + e * stride] = acc;
            }
        }
        values = next;
        stride *= side;
    }
    let terms = values.into_iter().enumerate().filter_map(|(k, v)| {
        (!v.is_zero()).then(|| (index_of(k).iter().map(|&e| e as u32).collect(), v))
    });
    MVPoly::from_terms(n, terms)
}

fn invert<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = m.len();
    let aug: Vec<Vec<S>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            r
        })
        .collect();
    let (rref, _) = linalg::exact_rref(&aug, 2 * n);
    rref.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// A point of the homogeneous lattice where `D` is nonzero, if any. The
/// lattice `{|α| = n}` is unisolvent for forms of degree `n`, so `None`
/// certifies `D ≡ 0`.
pub fn det_nonzero_witness<S: Scalar>(c: &CubicForm<S>) -> Result<Option<Vec<u32>>> {
    require_exact::<S>("exact degeneracy test")?;
    let n = c.dim();
    Ok(simplex_lattice(n, n as u32).into_iter().find(|alpha| {
        let lam: Vec<S> = alpha.iter().map(|&x| S::from_i64(x as i64)).collect();
        !det_at(c, &lam).is_zero()
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyVerdict {
    pub degenerate: bool,
    /// `true` for the sampled float-mode verdict.
    pub probabilistic: bool,
    pub samples: usize,
    /// Lattice point with `D(λ) ≠ 0` (exact mode, non-degenerate case).
    pub witness: Option<Vec<u32>>,
}

/// Exact: `D ≡ 0`. Float: every sampled `Q_λ` has rank `< n`.
pub fn degeneracy_verdict<S: Scalar>(c: &CubicForm<S>, seed: u64, tol: f64) -> DegeneracyVerdict {
    let n = c.dim();
    if S::is_exact() {
        let witness = det_nonzero_witness(c).expect("exact mode");
        return DegeneracyVerdict {
            degenerate: witness.is_none(),
            probabilistic: false,
            samples: simplex_lattice(n, n as u32).len(),
            witness,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degenerate = (0..FLOAT_DEGENERACY_SAMPLES).all(|_| {
        let lam: Vec<S> = (0..n)
            .map(|_| S::from_f64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let q = contract(c, &lam).expect("lambda has length n");
        form_rank(&q, tol) < n
    });
    DegeneracyVerdict {
        degenerate,
        probabilistic: true,
        samples: FLOAT_DEGENERACY_SAMPLES,
        witness: None,
    }
}

pub fn all_partials_degenerate<S: Scalar>(c: &CubicForm<S>) -> bool {
    degeneracy_verdict(c, 0, DEFAULT_RANK_TOL).degenerate
}

/// Whether every partial-derivative quadric of `C` vanishes on the span of
/// `basis`, i.e. `C(w, w', ·) = 0` for all `w, w'` in the span.
pub fn vanishes_doubly<S: Scalar>(c: &CubicForm<S>, basis: &[Vec<S>]) -> bool {
    let n = c.dim();
    if basis.iter().any(|w| w.len() != n) {
        return false;
    }
    let tol = 1e-9 * c.max_abs().max(1.0);
    (0..n).all(|i| {
        let e: Vec<S> = (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect();
        let q = contract(c, &e).expect("length n");
        q.restrict(basis)
            .expect("basis length checked")
            .iter()
            .flatten()
            .all(|x| if S::is_exact() { x.is_zero() } else { x.magnitude() <= tol })
    })
}

/// Canonical basis of a span: rref rows (exact) or orthonormal right singular
/// vectors above the threshold (float).
pub fn span_basis<S: Scalar>(vectors: &[Vec<S>], dim: usize, tol: f64) -> Vec<Vec<S>> {
    if S::is_exact() {
        return linalg::exact_span_basis(vectors, dim);
    }
    if vectors.is_empty() {
        return Vec::new();
    }
    let rows: Vec<Vec<Complex64>> = vectors
        .iter()
        .map(|v| v.iter().map(Scalar::to_c64).collect())
        .collect();
    let m = nalgebra::DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0_f64, f64::max);
    (0..sv.len())
        .filter(|&k| smax > 0.0 && sv[k] > tol * smax)
        .map(|k| (0..dim).map(|j| S::from_f64(v_t[(k, j)].re, v_t[(k, j)].im)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlaneRecovery<S> {
    Found {
        basis: Vec<Vec<S>>,
        lambdas: Vec<Vec<S>>,
    },
    /// The kernel span was not a plane singular for `C`; carries what was
    /// observed so ambiguous fits are reported rather than guessed.
    NotFound {
        span: Vec<Vec<S>>,
        reason: String,
    },
}

fn random_lambda<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<S> {
    (0..n)
        .map(|_| {
            if S::is_exact() {
                S::from_i64(rng.random_range(-7..=7))
            } else {
                S::from_f64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        })
        .collect()
}

/// Recovers the plane (a 3-dimensional linear subspace of 5-space) along
/// which a non-cone, all-partials-degenerate quinary cubic is singular.
pub fn singular_plane<S: Scalar>(c: &CubicForm<S>, seed: u64, tol: f64) -> Result<PlaneRecovery<S>> {
    let n = c.dim();
    if n != 5 {
        return Err(Error::precondition(
            "cubic_classify",
            format!("singular_plane is defined for n = 5, got n = {n}"),
        ));
    }
    if is_cone(c).is_some() {
        return Err(Error::precondition("cubic_classify", "cubic is a cone"));
    }
    if !degeneracy_verdict(c, seed, tol).degenerate {
        return Err(Error::precondition(
            "cubic_classify",
            "partial derivatives are not all degenerate",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernels: Vec<Vec<S>> = Vec::new();
    let mut lambdas = Vec::new();
    let mut span = Vec::new();
    for _attempt in 0..=PLANE_RETRIES {
        for _ in 0..PLANE_DRAWS {
            let lam: Vec<S> = random_lambda(&mut rng, n);
            let q = contract(c, &lam)?;
            if form_rank(&q, tol) == 4 {
                let ker = S::nullspace(q.rows(), n, tol);
                if let Some(v) = ker.into_iter().next() {
                    kernels.push(v);
                    lambdas.push(lam);
                }
            }
        }
        span = span_basis(&kernels, n, tol);
        if span.len() >= 3 {
            break;
        }
    }
    if span.len() != 3 {
        return Ok(PlaneRecovery::NotFound {
            reason: format!("kernel vectors span dimension {}, expected 3", span.len()),
            span,
        });
    }
    if !vanishes_doubly(c, &span) {
        return Ok(PlaneRecovery::NotFound {
            span,
            reason: "cubic is not singular along the recovered span".into(),
        });
    }
    Ok(PlaneRecovery::Found {
        basis: span,
        lambdas,
    })
}

/// Whether `det(μ Q₀ − contract(C, λ))` is not identically zero in `(μ, λ)`.
pub fn pencil_nondegenerate<S: Scalar>(q0: &QuadraticForm<S>, c: &CubicForm<S>) -> Result<bool> {
    require_exact::<S>("pencil_nondegenerate")?;
    let n = c.dim();
    crate::error::check_len(n, q0.dim())?;
    let lattice = simplex_lattice(n + 1, n as u32);
    Ok(lattice.iter().any(|alpha| {
        let mu = S::from_i64(alpha[0] as i64);
        let lam: Vec<S> = alpha[1..].iter().map(|&x| S::from_i64(x as i64)).collect();
        let q = q0.scale(&mu).sub(&contract(c, &lam).expect("length n"));
        !linalg::exact_det(q.rows()).is_zero()
    }))
}

/// Machine-readable classification of a cubic form.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub mode: crate::scalar::ScalarMode,
    pub is_cone: bool,
    pub vertex_basis: Option<Vec<Vec<ScalarJson>>>,
    pub all_partials_degenerate: bool,
    pub degeneracy: DegeneracyVerdict,
    /// Terms of `D(λ)`; omitted in float mode.
    pub det_poly: Option<crate::io::PolyJson>,
    pub singular_plane: Option<Vec<Vec<ScalarJson>>>,
    pub plane_diagnostic: Option<String>,
    pub plane_lambdas: Option<Vec<Vec<ScalarJson>>>,
}

fn to_json_rows<S: Scalar>(rows: &[Vec<S>]) -> Vec<Vec<ScalarJson>> {
    rows.iter()
        .map(|r| r.iter().map(Scalar::to_json).collect())
        .collect()
}

pub fn classify<S: Scalar>(c: &CubicForm<S>, seed: u64, tol: f64) -> Result<ClassificationReport> {
    let cone = is_cone(c);
    let degeneracy = degeneracy_verdict(c, seed, tol);
    let det_poly = if S::is_exact() {
        Some(crate::io::PolyJson::from_poly(&det_polynomial(c)?))
    } else {
        None
    };
    let (plane, diag, lambdas) = if c.dim() == 5 && cone.is_none() && degeneracy.degenerate {
        match singular_plane(c, seed, tol)? {
            PlaneRecovery::Found { basis, lambdas } => {
                (Some(to_json_rows(&basis)), None, Some(to_json_rows(&lambdas)))
            }
            PlaneRecovery::NotFound { reason, .. } => (None, Some(reason), None),
        }
    } else {
        (None, None, None)
    };
    Ok(ClassificationReport {
        n: c.dim(),
        mode: S::MODE,
        is_cone: cone.is_some(),
        vertex_basis: cone.as_deref().map(to_json_rows),
        all_partials_degenerate: degeneracy.degenerate,
        degeneracy,
        det_poly,
        singular_plane: plane,
        plane_diagnostic: diag,
        plane_lambdas: lambdas,
    })
}

/// `X₁²X₃ + X₂²X₄ + X₁X₂X₅` (third-partials convention): the basic
/// non-cone quinary cubic with degenerate partials.
pub fn lossen_witness<S: Scalar>() -> CubicForm<S> {
    CubicForm::from_polynomial(&lossen_polynomial())
}

pub fn lossen_polynomial<S: Scalar>() -> MVPoly<S> {
    let x = |i| MVPoly::<S>::var(5, i);
    let t1 = &x(0).pow(2) * &x(2);
    let t2 = &x(1).pow(2) * &x(3);
    let t3 = &(&x(0) * &x(1)) * &x(4);
    &(&t1 + &t2) + &t3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type Q = GaussRat;

    fn cubic(p: MVPoly<Q>) -> CubicForm<Q> {
        CubicForm::from_polynomial(&p)
    }

    fn x(n: usize, i: usize) -> MVPoly<Q> {
        MVPoly::var(n, i)
    }

    fn fermat() -> CubicForm<Q> {
        cubic(&(&x(3, 0).pow(3) + &x(3, 1).pow(3)) + &x(3, 2).pow(3))
    }

    fn e(n: usize, i: usize) -> Vec<Q> {
        (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(simplex_lattice(3, 3).len(), 10);
        assert_eq!(simplex_lattice(5, 5).len(), 126);
        assert!(simplex_lattice(4, 2).iter().all(|a| a.iter().sum::<u32>() == 2));
    }

    #[test]
    fn cone_examples() {
        let c = cubic(x(4, 0).pow(3));
        let ker = is_cone(&c).unwrap();
        assert_eq!(span_basis(&ker, 4, 0.0), vec![e(4, 1), e(4, 2), e(4, 3)]);
        assert!(is_cone(&fermat()).is_none());
        assert!(is_cone(&lossen_witness::<Q>()).is_none());
    }

    #[test]
    fn fermat_determinant() {
        let d = det_polynomial(&fermat()).unwrap();
        assert_eq!(d.num_terms(), 1);
        assert_eq!(d.coefficient(&[1, 1, 1]), Q::from_i64(216));
        assert!(!all_partials_degenerate(&fermat()));
    }

    #[test]
    fn degenerate_cases_have_zero_determinant() {
        let cone = cubic(&x(3, 0).pow(3) + &(&x(3, 0) * &x(3, 1).pow(2)));
        assert!(det_polynomial(&cone).unwrap().is_zero());
        assert!(all_partials_degenerate(&cone));
        let l = lossen_witness::<Q>();
        assert!(det_polynomial(&l).unwrap().is_zero());
        assert!(all_partials_degenerate(&l));
    }

    #[test]
    fn float_mode_rejected_for_exact_ops() {
        let c = fermat().to_float();
        assert!(matches!(det_polynomial(&c), Err(Error::ModeMismatch(_))));
        let q = QuadraticForm::<Complex64>::identity(3);
        assert!(matches!(pencil_nondegenerate(&q, &c), Err(Error::ModeMismatch(_))));
        let v = degeneracy_verdict(&c, 1, DEFAULT_RANK_TOL);
        assert!(v.probabilistic && !v.degenerate);
        assert!(all_partials_degenerate(&lossen_witness::<Q>().to_float()));
    }

    #[test]
    fn lossen_plane() {
        let l = lossen_witness::<Q>();
        match singular_plane(&l, 0, 0.0).unwrap() {
            PlaneRecovery::Found { basis, .. } => {
                assert_eq!(basis, vec![e(5, 2), e(5, 3), e(5, 4)]);
            }
            other => panic!("plane not found: {other:?}"),
        }
    }

    #[test]
    fn plane_refused_for_cone() {
        let c = cubic(&x(5, 0).pow(2) * &x(5, 2));
        assert!(matches!(singular_plane(&c, 0, 0.0), Err(Error::Precondition { .. })));
    }

    #[test]
    fn vanishing_examples() {
        let l = lossen_witness::<Q>();
        assert!(vanishes_doubly(&l, &[e(5, 2), e(5, 3), e(5, 4)]));
        assert!(!vanishes_doubly(&l, &[e(5, 0)]));
        assert!(vanishes_doubly(&l, &[]));
        assert!(!vanishes_doubly(&fermat(), &[e(3, 0), e(3, 1)]));
        let skew = vec![
            vec![Q::one(), Q::from_i64(2), Q::zero()],
            vec![Q::zero(), Q::one(), Q::from_i64(-3)],
        ];
        assert!(!vanishes_doubly(&fermat(), &skew));
    }

    #[test]
    fn pencil_examples() {
        let l = lossen_witness::<Q>();
        assert!(pencil_nondegenerate(&QuadraticForm::identity(5), &l).unwrap());
        let x1x3 = QuadraticForm::from_polynomial(&(&x(5, 0) * &x(5, 2)));
        assert!(!pencil_nondegenerate(&x1x3, &l).unwrap());
        let cone = cubic(x(4, 0).pow(3));
        assert!(!pencil_nondegenerate(&QuadraticForm::zero(4), &cone).unwrap());
    }
}
