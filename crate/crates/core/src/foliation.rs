//! Fibers of the Betti map and the leaf structure of quinary potentials.
//!
//! `fiber_trace` walks one fiber of `b ↦ a(b)` by predictor-corrector and
//! measures how far the traced points are from an affine subspace in the flat
//! coordinates and how much the functions `Σ uᵢ fᵢ` vary along them. The leaf
//! routines work with a potential on 5-space whose cubic is singular along a
//! plane `W_b`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::betti::{
    betti_coords, betti_jacobian_matrix, jacobian_rank, locally_constant_rank, newton_to_target,
    BettiConfig, JacobianMethod, NewtonConfig, Section,
};
use crate::cubic::{pencil_nondegenerate, singular_plane, PlaneRecovery};
use crate::error::{Error, Result};
use crate::forms::{contract, CubicForm};
use crate::linalg;
use crate::period::{check_riemann, complex_to_real, period_frame, real_to_complex, Potential};
use crate::scalar::{Complex64, Scalar, ScalarJson};

const MODULE: &str = "foliation";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceConfig {
    pub steps: usize,
    pub step_size: f64,
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
    pub seed: u64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            steps: 200,
            step_size: 1e-2,
            corrector_tol: 1e-10,
            corrector_max_iter: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    /// Flat coordinates `(Re zᵢ, Re gᵢ)`.
    pub x: Vec<f64>,
    /// `max |a(b) − a(b₀)|`.
    pub fiber_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberTrace {
    pub rank: usize,
    pub fiber_dim: usize,
    pub a0: Vec<f64>,
    pub points: Vec<TracePoint>,
    pub affine_residual: f64,
    pub holo_residual: f64,
    pub max_fiber_deviation: f64,
}

impl FiberTrace {
    /// One row per point: `Re z, Im z, x, fiber_deviation`.
    pub fn to_csv(&self) -> String {
        let Some(first) = self.points.first() else {
            return String::new();
        };
        let n = first.b_re.len();
        let mut header: Vec<String> = Vec::new();
        header.extend((1..=n).map(|i| format!("re_z{i}")));
        header.extend((1..=n).map(|i| format!("im_z{i}")));
        header.extend((1..=2 * n).map(|i| format!("x{i}")));
        header.push("fiber_deviation".into());
        let mut out = header.join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p
                .b_re
                .iter()
                .chain(&p.b_im)
                .chain(&p.x)
                .chain(std::iter::once(&p.fiber_deviation))
                .map(|v| format!("{v:.16e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn flat_values(p: &Potential<Complex64>, x: &[f64]) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let b = real_to_complex(x);
    let fr = period_frame(p, &b)?;
    let values: Vec<Complex64> = b.iter().chain(&fr.flat_values).copied().collect();
    Ok((fr.flat_real_coords(), values))
}

/// Right singular vectors of the `m.ncols() − rank` smallest singular values
/// and left singular vectors of the `rank` largest.
fn split_square(m: &DMatrix<f64>, rank: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let (big, small) = order.split_at(rank.min(order.len()));
    let kernel = DMatrix::from_fn(m.ncols(), small.len(), |i, j| v_t[(small[j], i)]);
    let image = DMatrix::from_fn(m.nrows(), big.len(), |i, j| u[(i, big[j])]);
    (kernel, image)
}

/// Largest singular value of the centred point cloud beyond `dim`.
fn affine_fit_residual(rows: &[Vec<f64>], dim: usize) -> f64 {
    if rows.len() < 2 {
        return 0.0;
    }
    let m = rows[0].len();
    let mut centroid = vec![0.0; m];
    for r in rows {
        for (c, v) in centroid.iter_mut().zip(r) {
            *c += v / rows.len() as f64;
        }
    }
    let mat = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j] - centroid[j]);
    let sv = linalg::real_singular_values(&mat);
    sv.get(dim).copied().unwrap_or(0.0)
}

/// Traces the Betti fiber through `b0`.
///
/// Refuses when the rank is full or not locally constant at `b0` (probed at
/// ten step sizes along every real axis).
pub fn fiber_trace(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b0: &[Complex64],
    trace: &TraceConfig,
    cfg: &BettiConfig,
) -> Result<FiberTrace> {
    let n = p.n();
    let dim = 2 * n;
    let rank = locally_constant_rank(p, s, b0, 10.0 * trace.step_size, cfg)?.ok_or_else(|| {
        Error::precondition(MODULE, "Betti rank is not locally constant at the start point")
    })?;
    if rank == dim {
        return Err(Error::precondition(
            MODULE,
            format!("Betti rank is full ({rank}); the fiber is a point"),
        ));
    }
    let fiber_dim = dim - rank;
    let (a0, jac0) = betti_jacobian_matrix(p, s, b0, JacobianMethod::Analytic, cfg)?;
    let (_, image) = split_square(&jac0, rank);

    let all_axes: Vec<usize> = (0..dim).collect();
    let corrector = NewtonConfig {
        tol: trace.corrector_tol,
        max_iter: trace.corrector_max_iter,
        ..NewtonConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(trace.seed);
    let mut x = complex_to_real(b0);
    let mut prev_dir: Option<DVector<f64>> = None;
    let mut points = Vec::with_capacity(trace.steps + 1);
    let mut values = Vec::with_capacity(trace.steps + 1);

    let record = |x: &[f64], points: &mut Vec<TracePoint>, values: &mut Vec<Vec<Complex64>>| -> Result<()> {
        let a = betti_coords(p, s, &real_to_complex(x), cfg)?;
        let dev = a.iter().zip(&a0).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let (xc, vals) = flat_values(p, x)?;
        points.push(TracePoint {
            b_re: x[..n].to_vec(),
            b_im: x[n..].to_vec(),
            x: xc,
            fiber_deviation: dev,
        });
        values.push(vals);
        Ok(())
    };
    record(&x, &mut points, &mut values)?;

    for step in 0..trace.steps {
        let (_, jac) =
            betti_jacobian_matrix(p, s, &real_to_complex(&x), JacobianMethod::Analytic, cfg)?;
        let (kernel, _) = split_square(&jac, rank);
        let coeffs = DVector::from_fn(kernel.ncols(), |_, _| rng.random_range(-1.0..1.0));
        let mut dir = &kernel * coeffs;
        if let Some(prev) = &prev_dir {
            if dir.dot(prev) < 0.0 {
                dir = -dir;
            }
        }
        let norm = dir.norm();
        if norm == 0.0 {
            continue;
        }
        dir /= norm;
        let predicted: Vec<f64> = x
            .iter()
            .zip(dir.iter())
            .map(|(xi, di)| xi + trace.step_size * di)
            .collect();
        let (corrected, _) = newton_to_target(p, s, &predicted, &a0, &all_axes, &corrector, cfg)
            .ok_or_else(|| Error::Diverged {
                module: MODULE,
                message: format!("corrector failed to return to the fiber at step {step}"),
            })?;
        x = corrected;
        prev_dir = Some(dir);
        record(&x, &mut points, &mut values)?;
    }

    let xs: Vec<Vec<f64>> = points.iter().map(|pt| pt.x.clone()).collect();
    let affine_residual = affine_fit_residual(&xs, fiber_dim);
    let mut holo_residual: f64 = 0.0;
    for col in image.column_iter() {
        let combo = |vals: &[Complex64]| -> Complex64 {
            vals.iter().zip(col.iter()).map(|(f, u)| f * u).sum()
        };
        let base = combo(&values[0]);
        for v in &values[1..] {
            holo_residual = holo_residual.max((combo(v) - base).norm());
        }
    }
    let max_fiber_deviation = points.iter().map(|pt| pt.fiber_deviation).fold(0.0, f64::max);
    Ok(FiberTrace {
        rank,
        fiber_dim,
        a0,
        points,
        affine_residual,
        holo_residual,
        max_fiber_deviation,
    })
}

/// The plane `W_b` along which the cubic of `g` at `b` is singular.
pub fn leaf_subspace<S: Scalar>(p: &Potential<S>, b: &[S], seed: u64, tol: f64) -> Result<Vec<Vec<S>>> {
    if p.n() != 5 {
        return Err(Error::precondition(
            MODULE,
            format!("leaf decomposition needs n = 5, got n = {}", p.n()),
        ));
    }
    let cubic = p.cubic_at(b)?;
    match singular_plane(&cubic, seed, tol)? {
        PlaneRecovery::Found { basis, .. } => Ok(basis),
        PlaneRecovery::NotFound { reason, .. } => Err(Error::precondition("cubic_classify", reason)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafTolerances {
    pub residual: f64,
    pub constancy: f64,
}

impl Default for LeafTolerances {
    fn default() -> Self {
        LeafTolerances {
            residual: 1e-8,
            constancy: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafReport {
    pub b: Vec<ScalarJson>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<ScalarJson>>,
    pub probes_used: usize,
    pub probes_skipped: usize,
    pub constancy_residual: f64,
    pub quadraticity_residual: f64,
    pub affine_partials_residual: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

fn unit<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()
}

fn to_complex_matrix<S: Scalar>(basis: &[Vec<S>], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, basis.len(), |r, c| basis[c][r].to_c64())
}

/// `max |C(w_a, w_b, w_c)|` over basis triples and `max |C(e_i, w_a, w_b)|`.
fn leaf_cubic_residuals<S: Scalar>(c: &CubicForm<S>, basis: &[Vec<S>]) -> Result<(f64, f64)> {
    let n = c.dim();
    let mut quad: f64 = 0.0;
    for w in basis {
        let restricted = contract(c, w)?.restrict(basis)?;
        for v in restricted.iter().flatten() {
            quad = quad.max(v.magnitude());
        }
    }
    let mut aff: f64 = 0.0;
    for i in 0..n {
        let restricted = contract(c, &unit::<S>(n, i))?.restrict(basis)?;
        for v in restricted.iter().flatten() {
            aff = aff.max(v.magnitude());
        }
    }
    Ok((quad, aff))
}

/// Compares the leaf data at `b` with probes `b′ = b + Σ tⱼ wⱼ`, each probe
/// given by its coefficient vector `t`. Inadmissible probes are skipped.
pub fn leaf_checks<S: Scalar>(
    p: &Potential<S>,
    b: &[S],
    probes: &[Vec<S>],
    seed: u64,
    rank_tol: f64,
    tols: &LeafTolerances,
) -> Result<LeafReport> {
    let n = p.n();
    let w = leaf_subspace(p, b, seed, rank_tol)?;
    let w_float = linalg::complex_orthonormal_columns(&to_complex_matrix(&w, n), rank_tol);
    let mut report = LeafReport {
        b: b.iter().map(Scalar::to_json).collect(),
        w: w.iter().map(|v| v.iter().map(Scalar::to_json).collect()).collect(),
        probes_used: 0,
        probes_skipped: 0,
        constancy_residual: 0.0,
        quadraticity_residual: 0.0,
        affine_partials_residual: 0.0,
        pass: true,
        warnings: Vec::new(),
    };
    for (k, t) in probes.iter().enumerate() {
        if t.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                found: t.len(),
            });
        }
        let bp: Vec<S> = (0..n)
            .map(|i| {
                t.iter()
                    .zip(&w)
                    .fold(b[i].clone(), |acc, (tj, wj)| acc + tj.clone() * wj[i].clone())
            })
            .collect();
        let adm = check_riemann(&period_frame(p, &bp)?, BettiConfig::default().admissible_tol);
        if !adm.admissible {
            report.probes_skipped += 1;
            report
                .warnings
                .push(format!("probe {k} skipped: {}", adm.reason.unwrap_or_default()));
            continue;
        }
        report.probes_used += 1;
        let cubic = p.cubic_at(&bp)?;
        let (quad, aff) = leaf_cubic_residuals(&cubic, &w)?;
        report.quadraticity_residual = report.quadraticity_residual.max(quad);
        report.affine_partials_residual = report.affine_partials_residual.max(aff);
        let constancy = match leaf_subspace(p, &bp, seed, rank_tol) {
            Ok(wp) => {
                let wp_float = linalg::complex_orthonormal_columns(&to_complex_matrix(&wp, n), rank_tol);
                linalg::max_principal_angle_sine(&w_float, &wp_float)
            }
            Err(e) if e.is_refusal() => {
                report.warnings.push(format!("probe {k}: no leaf plane ({e})"));
                1.0
            }
            Err(e) => return Err(e),
        };
        report.constancy_residual = report.constancy_residual.max(constancy);
    }
    report.pass = report.constancy_residual < tols.constancy
        && report.quadraticity_residual < tols.residual
        && report.affine_partials_residual < tols.residual;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeafCompat {
    pub compatible: bool,
    /// `max |f⁽²⁾(w, w′)|` over the leaf basis.
    pub restricted_norm: f64,
    pub pencil_nondegenerate: Option<bool>,
    /// `false` when a compatible section comes with a non-degenerate pencil.
    pub consistent: bool,
    #[serde(rename = "W")]
    pub w: Vec<Vec<ScalarJson>>,
}

/// Whether the Hessian of the section vanishes on the leaf plane at `b`.
/// The pencil `det(μ f⁽²⁾ − g⁽³⁾(λ))` is evaluated exactly; in float mode it
/// is left undecided.
pub fn section_leaf_compat<S: Scalar>(
    p: &Potential<S>,
    s: &Section<S>,
    b: &[S],
    seed: u64,
    tol: f64,
) -> Result<LeafCompat> {
    let w = leaf_subspace(p, b, seed, tol)?;
    let f2 = s.hessian_at(b)?;
    let restricted = f2.restrict(&w)?;
    let restricted_norm = restricted
        .iter()
        .flatten()
        .map(Scalar::magnitude)
        .fold(0.0, f64::max);
    let compatible = if S::is_exact() {
        restricted.iter().flatten().all(Scalar::is_zero)
    } else {
        restricted_norm < tol * f2.max_abs().max(1.0)
    };
    let pencil = if S::is_exact() {
        Some(pencil_nondegenerate(&f2, &p.cubic_at(b)?)?)
    } else {
        None
    };
    Ok(LeafCompat {
        compatible,
        restricted_norm,
        pencil_nondegenerate: pencil,
        consistent: !(compatible && pencil == Some(true)),
        w: w.iter().map(|v| v.iter().map(Scalar::to_json).collect()).collect(),
    })
}

/// Rank of the Betti Jacobian at a point, for callers that only need it.
pub fn betti_rank_at(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    cfg: &BettiConfig,
) -> Result<usize> {
    let (_, jac) = betti_jacobian_matrix(p, s, b, JacobianMethod::Analytic, cfg)?;
    Ok(jacobian_rank(&jac, cfg))
}

/// `g = (i/2)Σzᵢ² + z₁²z₃ + z₂²z₄ + z₁z₂z₅` on 5-space: its cubic at every
/// point is `X₁²X₃ + X₂²X₄ + X₁X₂X₅` up to the factor of the convention, so
/// the leaves are the translates of `span{e₃,e₄,e₅}`.
pub fn leaf_potential<S: Scalar>() -> Potential<S> {
    use crate::poly::MVPoly;
    let half_i = S::imag_unit() / S::from_i64(2);
    let mut g = MVPoly::zero(5);
    for i in 0..5 {
        g = &g + &MVPoly::var(5, i).pow(2).scale(&half_i);
    }
    Potential::new(&g + &crate::cubic::lossen_polynomial())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MVPoly;
    use crate::scalar::GaussRat;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_potential(n: usize) -> MVPoly<Complex64> {
        let mut g = MVPoly::zero(n);
        for i in 0..n {
            g = &g + &MVPoly::var(n, i).pow(2).scale(&c(0.0, 0.5));
        }
        g
    }

    #[test]
    fn trace_of_rank_two_section_stays_on_z1_slice() {
        let p = Potential::new(diag_potential(2));
        let s = Section::new(MVPoly::var(2, 0).pow(2).scale(&c(0.5, 0.0)));
        let b0 = [c(0.3, 0.2), c(-0.1, 0.4)];
        let tr = TraceConfig {
            steps: 40,
            ..TraceConfig::default()
        };
        let t = fiber_trace(&p, &s, &b0, &tr, &BettiConfig::default()).unwrap();
        assert_eq!(t.rank, 2);
        assert_eq!(t.fiber_dim, 2);
        assert_eq!(t.points.len(), 41);
        for pt in &t.points {
            assert!((pt.b_re[0] - 0.3).abs() < 1e-9 && (pt.b_im[0] - 0.2).abs() < 1e-9);
            assert!(pt.fiber_deviation < 1e-10);
        }
        assert!(t.affine_residual < 1e-8, "{}", t.affine_residual);
        assert!(t.holo_residual < 1e-8, "{}", t.holo_residual);
        assert!(t.to_csv().lines().count() == 42);
    }

    #[test]
    fn full_rank_is_refused() {
        let p = Potential::new(diag_potential(1));
        let s = Section::new(MVPoly::var(1, 0).pow(2).scale(&c(0.5, 0.0)));
        let err = fiber_trace(&p, &s, &[c(0.1, 0.0)], &TraceConfig::default(), &BettiConfig::default())
            .unwrap_err();
        assert!(err.is_refusal());
    }

    #[test]
    fn leaf_plane_is_e345_exactly() {
        let p = leaf_potential::<GaussRat>();
        let b: Vec<GaussRat> = [1, 2, 0, -1, 3]
            .iter()
            .map(|&k| GaussRat::from_ratio(k, 10))
            .collect();
        let w = leaf_subspace(&p, &b, 0, 1e-8).unwrap();
        let expected: Vec<Vec<GaussRat>> = (2..5).map(|i| unit(5, i)).collect();
        assert_eq!(w, expected);
    }

    #[test]
    fn leaf_checks_zero_probes_pass_vacuously() {
        let p = leaf_potential::<GaussRat>();
        let b = vec![GaussRat::zero(); 5];
        let r = leaf_checks(&p, &b, &[], 0, 1e-8, &LeafTolerances::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.constancy_residual, 0.0);
        assert_eq!(r.probes_used, 0);
    }

    #[test]
    fn section_compatibility_examples() {
        let p = leaf_potential::<GaussRat>();
        let b = vec![GaussRat::from_ratio(1, 10); 5];
        let x = |i| MVPoly::<GaussRat>::var(5, i);
        let f12 = Section::new(&(&x(0) * &x(1)) + &x(0).pow(2));
        let r = section_leaf_compat(&p, &f12, &b, 0, 1e-8).unwrap();
        assert!(r.compatible && r.consistent);
        assert_eq!(r.pencil_nondegenerate, Some(false));

        let f33 = Section::new(x(2).pow(2).scale(&GaussRat::from_ratio(1, 2)));
        let r = section_leaf_compat(&p, &f33, &b, 0, 1e-8).unwrap();
        assert!(!r.compatible);
        assert_eq!(r.pencil_nondegenerate, Some(true));

        let lin = Section::new(&x(2) + &x(4));
        assert!(section_leaf_compat(&p, &lin, &b, 0, 1e-8).unwrap().compatible);
    }
}
