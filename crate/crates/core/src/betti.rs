//! Betti coordinates of sections and the searches built on them.
//!
//! A section is an exact holomorphic 1-form `df`. At an admissible base point
//! its Betti vector `a ∈ ℝ^{2n}` is the unique real solution of
//! `df = Σ a_i df_i`, i.e. `∂f/∂z_j = a_j + Σ_i a_{n+i} τ_ij`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::forms::{contract, form_rank, QuadraticForm};
use crate::linalg;
use crate::period::{check_riemann, period_frame, real_to_complex, BaseBox, Potential};
use crate::poly::MVPoly;
use crate::scalar::{Complex64, Scalar};

/// Singular values below this absolute floor count as zero in Betti-Jacobian
/// rank decisions, on top of the relative threshold.
pub const JACOBIAN_ABS_FLOOR: f64 = 1e-10;

/// A section given by a global holomorphic function `f` (the form is `df`).
#[derive(Clone, Debug)]
pub struct Section<S> {
    f: MVPoly<S>,
    grad: Vec<MVPoly<S>>,
    hess: Vec<Vec<MVPoly<S>>>,
}

impl<S: Scalar> Section<S> {
    pub fn new(f: MVPoly<S>) -> Self {
        let grad = f.gradient();
        let hess = grad.iter().map(MVPoly::gradient).collect();
        Section { f, grad, hess }
    }

    /// The frame-constant section `Σ c_i f_i` for the potential `p`.
    pub fn frame_combination(p: &Potential<S>, c: &[S]) -> Result<Self> {
        let n = p.n();
        check_len(2 * n, c.len())?;
        let mut f = MVPoly::zero(n);
        for i in 0..n {
            f = &f + &MVPoly::var(n, i).scale(&c[i]);
            f = &f + &p.partials()[i].scale(&c[n + i]);
        }
        Ok(Section::new(f))
    }

    pub fn f(&self) -> &MVPoly<S> {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.f.nvars()
    }

    pub fn gradient_at(&self, b: &[S]) -> Result<Vec<S>> {
        self.grad.iter().map(|p| p.eval(b)).collect()
    }

    /// `f⁽²⁾_b`.
    pub fn hessian_at(&self, b: &[S]) -> Result<QuadraticForm<S>> {
        check_len(self.n(), b.len())?;
        let n = self.n();
        let mut m = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.hess[i][j].eval(b)?;
                m[j][i] = v.clone();
                m[i][j] = v;
            }
        }
        Ok(QuadraticForm::from_symmetric_unchecked(m))
    }

    pub fn to_float(&self) -> Section<Complex64> {
        Section::new(self.f.to_float())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Debug, Serialize)]
pub struct BettiState {
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    pub a: Vec<f64>,
    /// Row-major `2n × 2n` Jacobian in the coordinates `(Re z, Im z)`.
    pub jacobian: Option<Vec<Vec<f64>>>,
    pub rank: Option<usize>,
    pub rank_even_ok: Option<bool>,
}

/// Tolerances shared by the Betti routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BettiConfig {
    /// Pivot threshold of the positivity check, relative to `max diag Im τ`.
    pub admissible_tol: f64,
    pub rank_tol: f64,
    pub abs_floor: f64,
    /// Largest condition number accepted for the real frame system.
    pub max_cond: f64,
}

impl Default for BettiConfig {
    fn default() -> Self {
        BettiConfig {
            admissible_tol: 1e-10,
            rank_tol: crate::forms::DEFAULT_RANK_TOL,
            abs_floor: JACOBIAN_ABS_FLOOR,
            max_cond: 1e13,
        }
    }
}

/// Solver state at one base point: the LU of the real frame matrix plus the
/// quantities needed for the analytic Jacobian.
struct LocalSystem {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    a: Vec<f64>,
}

fn local_system(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    cfg: &BettiConfig,
) -> Result<LocalSystem> {
    let n = p.n();
    check_len(n, s.n())?;
    let fr = period_frame(p, b)?;
    let adm = check_riemann(&fr, cfg.admissible_tol);
    if !adm.admissible {
        return Err(Error::Inadmissible(adm.reason.unwrap_or_default()));
    }
    let m = fr.real_frame_matrix();
    let sv = linalg::real_singular_values(&m);
    let cond = sv.first().copied().unwrap_or(0.0) / sv.last().copied().unwrap_or(0.0);
    if !cond.is_finite() || cond > cfg.max_cond {
        return Err(Error::Singular { cond });
    }
    let h = s.gradient_at(b)?;
    let rhs = DVector::from_iterator(2 * n, h.iter().map(|z| z.re).chain(h.iter().map(|z| z.im)));
    let lu = m.lu();
    let a = lu.solve(&rhs).ok_or(Error::Singular { cond })?;
    Ok(LocalSystem {
        lu,
        a: a.iter().copied().collect(),
    })
}

/// Betti vector `a(b)`.
pub fn betti_coords(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    cfg: &BettiConfig,
) -> Result<Vec<f64>> {
    Ok(local_system(p, s, b, cfg)?.a)
}

fn analytic_jacobian(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    sys: &LocalSystem,
) -> Result<DMatrix<f64>> {
    let n = p.n();
    let q = &sys.a[n..];
    let fh = s.hessian_at(b)?;
    let cubic = p.cubic_at(b)?;
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        // holomorphic direction e_k: w = f⁽²⁾ e_k − (∂_k τ) q
        let w: Vec<Complex64> = (0..n)
            .map(|j| {
                let dtau_q: Complex64 = (0..n).map(|i| cubic.get(j, i, k) * q[i]).sum();
                *fh.get(j, k) - dtau_q
            })
            .collect();
        for (col, mult) in [(k, Complex64::new(1.0, 0.0)), (n + k, Complex64::new(0.0, 1.0))] {
            let rhs = DVector::from_iterator(
                2 * n,
                w.iter()
                    .map(|z| (mult * z).re)
                    .chain(w.iter().map(|z| (mult * z).im)),
            );
            let da = sys.lu.solve(&rhs).ok_or(Error::Singular { cond: f64::INFINITY })?;
            jac.set_column(col, &da);
        }
    }
    Ok(jac)
}

const FD_STEP: f64 = 1e-5;

fn fd_jacobian(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    cfg: &BettiConfig,
) -> Result<DMatrix<f64>> {
    let n = p.n();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for col in 0..2 * n {
        let h = FD_STEP * (1.0 + b[col % n].norm());
        let shift = if col < n { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
        let mut plus = b.to_vec();
        plus[col % n] += shift;
        let mut minus = b.to_vec();
        minus[col % n] -= shift;
        let ap = betti_coords(p, s, &plus, cfg)?;
        let am = betti_coords(p, s, &minus, cfg)?;
        for r in 0..2 * n {
            jac[(r, col)] = (ap[r] - am[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Jacobian of `b ↦ a(b)` as a dense real matrix.
pub fn betti_jacobian_matrix(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    method: JacobianMethod,
    cfg: &BettiConfig,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sys = local_system(p, s, b, cfg)?;
    let jac = match method {
        JacobianMethod::Analytic => analytic_jacobian(p, s, b, &sys)?,
        JacobianMethod::FiniteDifference => fd_jacobian(p, s, b, cfg)?,
    };
    Ok((sys.a, jac))
}

/// Rank with the relative threshold `tol` and an absolute floor.
pub fn jacobian_rank(jac: &DMatrix<f64>, cfg: &BettiConfig) -> usize {
    let sv = linalg::real_singular_values(jac);
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = (cfg.rank_tol * smax).max(cfg.abs_floor);
    sv.iter().filter(|&&x| x > thr).count()
}

pub fn betti_jacobian(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    method: JacobianMethod,
    cfg: &BettiConfig,
) -> Result<BettiState> {
    let (a, jac) = betti_jacobian_matrix(p, s, b, method, cfg)?;
    let rank = jacobian_rank(&jac, cfg);
    Ok(BettiState {
        b_re: b.iter().map(|z| z.re).collect(),
        b_im: b.iter().map(|z| z.im).collect(),
        a,
        jacobian: Some(
            (0..jac.nrows())
                .map(|r| jac.row(r).iter().copied().collect())
                .collect(),
        ),
        rank: Some(rank),
        rank_even_ok: Some(rank % 2 == 0),
    })
}

/// Rank at `b` if it agrees with the rank at the `2·(2n)` axis-perturbed
/// points at `radius`; `None` when the rank is not locally constant.
pub fn locally_constant_rank(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    b: &[Complex64],
    radius: f64,
    cfg: &BettiConfig,
) -> Result<Option<usize>> {
    let rank_at = |pt: &[Complex64]| -> Result<usize> {
        let (_, j) = betti_jacobian_matrix(p, s, pt, JacobianMethod::Analytic, cfg)?;
        Ok(jacobian_rank(&j, cfg))
    };
    let r0 = rank_at(b)?;
    let n = b.len();
    for axis in 0..2 * n {
        for sign in [-1.0, 1.0] {
            let mut q = b.to_vec();
            let d = sign * radius;
            q[axis % n] += if axis < n { Complex64::new(d, 0.0) } else { Complex64::new(0.0, d) };
            if rank_at(&q)? != r0 {
                return Ok(None);
            }
        }
    }
    Ok(Some(r0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// `None` means half the seed-grid spacing.
    pub dedup_radius: Option<f64>,
    /// Slack allowed when testing that a converged point lies in the box.
    pub box_slack: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 50,
            dedup_radius: None,
            box_slack: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorsionHit {
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    #[serde(rename = "N")]
    pub order: u64,
    pub p: Vec<i64>,
    pub residual: f64,
    pub newton_iters: usize,
}

impl TorsionHit {
    pub fn real_point(&self) -> Vec<f64> {
        self.b_re.iter().chain(&self.b_im).copied().collect()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TorsionSearch {
    pub hits: Vec<TorsionHit>,
    pub seeds: usize,
    pub non_converged: usize,
}

fn max_abs_diff(a: &[f64], target: &[f64]) -> f64 {
    a.iter()
        .zip(target)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Gauss-Newton on `a(x) − target = 0` over the free axes of the box, with a
/// rank-truncated pseudo-inverse step and step halving when the residual
/// grows. Returns the converged real point and the iteration count.
pub(crate) fn newton_to_target(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    start: &[f64],
    target: &[f64],
    free: &[usize],
    newton: &NewtonConfig,
    cfg: &BettiConfig,
) -> Option<(Vec<f64>, usize)> {
    let mut x = start.to_vec();
    let eval = |x: &[f64]| betti_coords(p, s, &real_to_complex(x), cfg).ok();
    let mut a = eval(&x)?;
    let mut res = max_abs_diff(&a, target);
    for iter in 0..=newton.max_iter {
        if res <= newton.tol {
            return Some((x, iter));
        }
        if iter == newton.max_iter {
            break;
        }
        let (_, jac) =
            betti_jacobian_matrix(p, s, &real_to_complex(&x), JacobianMethod::Analytic, cfg).ok()?;
        let jf = DMatrix::from_fn(jac.nrows(), free.len(), |r, c| jac[(r, free[c])]);
        let r = DVector::from_iterator(a.len(), a.iter().zip(target).map(|(u, v)| u - v));
        let step = linalg::real_pinv_solve(&jf, &r, cfg.rank_tol);
        if step.amax() == 0.0 {
            return None;
        }
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = x.clone();
            for (k, &ax) in free.iter().enumerate() {
                trial[ax] -= scale * step[k];
            }
            if let Some(at) = eval(&trial) {
                let tr = max_abs_diff(&at, target);
                if tr < res {
                    x = trial;
                    a = at;
                    res = tr;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Sorts hits lexicographically by their real coordinates and drops any hit
/// closer than `radius` to an earlier kept one.
pub fn dedup_hits(mut hits: Vec<TorsionHit>, radius: f64) -> Vec<TorsionHit> {
    hits.sort_by(|u, v| {
        u.real_point()
            .iter()
            .zip(v.real_point().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<TorsionHit> = Vec::with_capacity(hits.len());
    for h in hits {
        let x = h.real_point();
        let dup = kept.iter().any(|k| {
            let y = k.real_point();
            x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < radius
        });
        if !dup {
            kept.push(h);
        }
    }
    kept
}

/// Newton search for points of the box where `a(b) ∈ (1/N) ℤ^{2n}`, seeded
/// from a regular grid with `grid` points per free axis.
pub fn torsion_search(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    bx: &BaseBox,
    order: u64,
    grid: usize,
    newton: &NewtonConfig,
    cfg: &BettiConfig,
) -> Result<TorsionSearch> {
    check_len(2 * p.n(), bx.real_dim())?;
    if order == 0 {
        return Err(Error::precondition("betti", "torsion order must be positive"));
    }
    let free = bx.free_axes();
    let seeds = bx.grid(grid);
    let nf = order as f64;
    let mut hits = Vec::new();
    let mut non_converged = 0;
    for seed in &seeds {
        let a0 = betti_coords(p, s, &real_to_complex(seed), cfg)?;
        let pvec: Vec<i64> = a0.iter().map(|x| (x * nf).round() as i64).collect();
        let target: Vec<f64> = pvec.iter().map(|&k| k as f64 / nf).collect();
        match newton_to_target(p, s, seed, &target, &free, newton, cfg) {
            Some((x, iters)) if bx.contains(&x, newton.box_slack) => {
                // independent recomputation at the converged point
                let a = betti_coords(p, s, &real_to_complex(&x), cfg)?;
                let residual = max_abs_diff(&a, &target);
                if residual <= newton.tol {
                    let z = real_to_complex(&x);
                    hits.push(TorsionHit {
                        b_re: z.iter().map(|c| c.re).collect(),
                        b_im: z.iter().map(|c| c.im).collect(),
                        order,
                        p: pvec,
                        residual,
                        newton_iters: iters,
                    });
                } else {
                    non_converged += 1;
                }
            }
            Some(_) => {}
            None => non_converged += 1,
        }
    }
    let radius = newton
        .dedup_radius
        .unwrap_or_else(|| 0.5 * bx.grid_spacing(grid).min(1.0));
    Ok(TorsionSearch {
        hits: dedup_hits(hits, radius),
        seeds: seeds.len(),
        non_converged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    #[serde(rename = "N")]
    pub order: u64,
    pub epsilon: f64,
    pub coverage: f64,
    pub hit_count: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct DensityConfig {
    pub epsilon: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Fraction of uniformly sampled box points within `ε` of a torsion hit of
/// order `≤ N`, for each `N` in `orders`. Hits accumulate across the sorted
/// orders, so coverage is nondecreasing.
pub fn density_scan(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    bx: &BaseBox,
    orders: &[u64],
    dcfg: &DensityConfig,
    newton: &NewtonConfig,
    cfg: &BettiConfig,
) -> Result<Vec<DensityRow>> {
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(dcfg.seed);
    let samples: Vec<Vec<f64>> = (0..dcfg.samples)
        .map(|_| {
            (0..bx.real_dim())
                .map(|ax| {
                    if bx.hi[ax] > bx.lo[ax] {
                        rng.random_range(bx.lo[ax]..=bx.hi[ax])
                    } else {
                        bx.lo[ax]
                    }
                })
                .collect()
        })
        .collect();
    let mut covered = vec![false; samples.len()];
    let mut hit_count = 0;
    let mut rows = Vec::with_capacity(sorted.len());
    for &order in &sorted {
        let found = torsion_search(p, s, bx, order, dcfg.grid, newton, cfg)?;
        hit_count += found.hits.len();
        for h in &found.hits {
            let y = h.real_point();
            for (x, c) in samples.iter().zip(covered.iter_mut()) {
                if !*c {
                    let d = x.iter().zip(&y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
                    if d <= dcfg.epsilon {
                        *c = true;
                    }
                }
            }
        }
        let coverage = if samples.is_empty() {
            0.0
        } else {
            covered.iter().filter(|&&c| c).count() as f64 / samples.len() as f64
        };
        rows.push(DensityRow {
            order,
            epsilon: dcfg.epsilon,
            coverage,
            hit_count,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum AczVerdict {
    Consistent,
    ViolationWitness,
}

#[derive(Clone, Debug, Serialize)]
pub struct AczReport {
    pub samples: usize,
    pub lambda_draws: usize,
    pub max_betti_rank: usize,
    pub max_nabla_rank: usize,
    pub full_betti_rank: usize,
    pub verdict: AczVerdict,
}

/// Sampled consistency check: either the Betti map reaches full rank
/// somewhere on the samples, or every sampled `∇̄_λ` is degenerate. Anything
/// else is reported as a witness.
pub fn acz_consistency(
    p: &Potential<Complex64>,
    s: &Section<Complex64>,
    bx: &BaseBox,
    samples: usize,
    lambda_draws: usize,
    seed: u64,
    cfg: &BettiConfig,
) -> Result<AczReport> {
    let n = p.n();
    check_len(2 * n, bx.real_dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_betti = 0;
    let mut max_nabla = 0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..bx.real_dim())
            .map(|ax| {
                if bx.hi[ax] > bx.lo[ax] {
                    rng.random_range(bx.lo[ax]..=bx.hi[ax])
                } else {
                    bx.lo[ax]
                }
            })
            .collect();
        let b = real_to_complex(&x);
        let (_, jac) = betti_jacobian_matrix(p, s, &b, JacobianMethod::Analytic, cfg)?;
        max_betti = max_betti.max(jacobian_rank(&jac, cfg));
        let cubic = p.cubic_at(&b)?;
        for _ in 0..lambda_draws {
            let lambda: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let q = contract(&cubic, &lambda)?;
            max_nabla = max_nabla.max(nabla_rank(&q, cfg));
        }
    }
    let verdict = if max_betti == 2 * n || max_nabla < n {
        AczVerdict::Consistent
    } else {
        AczVerdict::ViolationWitness
    };
    Ok(AczReport {
        samples,
        lambda_draws,
        max_betti_rank: max_betti,
        max_nabla_rank: max_nabla,
        full_betti_rank: 2 * n,
        verdict,
    })
}

fn nabla_rank(q: &QuadraticForm<Complex64>, cfg: &BettiConfig) -> usize {
    let sv = linalg::complex_singular_values(q.rows(), q.dim());
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = (cfg.rank_tol * smax).max(cfg.abs_floor);
    sv.iter().filter(|&&x| x > thr).count()
}

/// Complex rank of the differential of
/// `(b, λ) ↦ Σ ∂_i f(b) e_i + Σ λ_i e'_i(b)`, which equals
/// `n + rank(f⁽²⁾_b − contract(g⁽³⁾_b, λ))`.
pub fn phi_nu_rank<S: Scalar>(
    p: &Potential<S>,
    s: &Section<S>,
    b: &[S],
    lambda: &[S],
    tol: f64,
) -> Result<usize> {
    let n = p.n();
    check_len(n, s.n())?;
    check_len(n, b.len())?;
    check_len(n, lambda.len())?;
    let quad = s.hessian_at(b)?.sub(&contract(&p.cubic_at(b)?, lambda)?);
    Ok(n + form_rank(&quad, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn standard(n: usize) -> Potential<Complex64> {
        let g = (0..n)
            .map(|i| MVPoly::var(n, i).pow(2))
            .fold(MVPoly::zero(n), |acc, t| &acc + &t)
            .scale(&c(0.0, 0.5));
        Potential::new(g)
    }

    #[test]
    fn linear_sections_have_constant_coordinates() {
        let p = standard(2);
        let cfg = BettiConfig::default();
        let b = [c(0.3, -0.2), c(1.0, 0.5)];
        let a = betti_coords(&p, &Section::new(MVPoly::var(2, 0)), &b, &cfg).unwrap();
        assert!(max_abs_diff(&a, &[1.0, 0.0, 0.0, 0.0]) < 1e-15);
        let f = MVPoly::var(2, 0).scale(&c(0.0, 1.0));
        let a = betti_coords(&p, &Section::new(f), &b, &cfg).unwrap();
        assert!(max_abs_diff(&a, &[0.0, 0.0, 1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn half_square_section() {
        // f = z1²/2 gives a = (x, 0, y, 0)
        let p = standard(2);
        let s = Section::new(MVPoly::var(2, 0).pow(2).scale(&c(0.5, 0.0)));
        let cfg = BettiConfig::default();
        let b = [c(0.7, -0.4), c(0.1, 0.9)];
        let st = betti_jacobian(&p, &s, &b, JacobianMethod::Analytic, &cfg).unwrap();
        assert!(max_abs_diff(&st.a, &[0.7, 0.0, -0.4, 0.0]) < 1e-15);
        assert_eq!(st.rank, Some(2));
        let j = st.jacobian.unwrap();
        assert!((j[0][0] - 1.0).abs() < 1e-14 && (j[2][2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inadmissible_point_is_refused() {
        let g = standard(1).g().scale(&c(-1.0, 0.0));
        let p = Potential::new(g);
        let s = Section::new(MVPoly::var(1, 0));
        let err = betti_coords(&p, &s, &[c(0.0, 0.0)], &BettiConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Inadmissible(_)));
    }

    #[test]
    fn phi_nu_rank_examples() {
        let p = standard(3);
        let s = Section::new(MVPoly::var(3, 0).pow(2).scale(&c(0.5, 0.0)));
        let b = [c(0.1, 0.0), c(0.0, 0.2), c(-0.3, 0.1)];
        let lam = [c(1.0, 2.0), c(0.5, 0.0), c(-1.0, 1.0)];
        assert_eq!(phi_nu_rank(&p, &s, &b, &lam, 1e-8).unwrap(), 4);
    }
}
