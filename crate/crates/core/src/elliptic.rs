//! Families of elliptic curves over a one-dimensional base, in closed form.
//!
//! The curve over `b` is `ℂ / (ℤ + τ(b)ℤ)` and a section is a lift `s(b)`.
//! Its Betti coordinates are the real pair `β` with `s = β₁ + β₂ τ`, solved
//! directly rather than through [`crate::betti`].

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::MVPoly;
use crate::scalar::{Complex64, GaussRat, Scalar};

const MODULE: &str = "elliptic_toy";
const DOMAIN_SLACK: f64 = 1e-9;

/// `τ` and `s` as polynomials in one variable over a rectangle
/// `[re_lo, re_hi] × [im_lo, im_hi]` of the base.
#[derive(Clone, Debug)]
pub struct EllipticFamily {
    tau: MVPoly<Complex64>,
    s: MVPoly<Complex64>,
    tau_d: MVPoly<Complex64>,
    s_d: MVPoly<Complex64>,
    domain: [f64; 4],
}

impl EllipticFamily {
    pub fn new(tau: MVPoly<Complex64>, s: MVPoly<Complex64>, domain: [f64; 4]) -> Result<Self> {
        if tau.nvars() != 1 || s.nvars() != 1 {
            return Err(Error::Schema("tau and s must be polynomials in one variable".into()));
        }
        if !(domain[0] <= domain[1] && domain[2] <= domain[3]) || domain.iter().any(|x| !x.is_finite()) {
            return Err(Error::Schema(format!("malformed domain {domain:?}")));
        }
        let tau_d = tau.diff(0)?;
        let s_d = s.diff(0)?;
        Ok(EllipticFamily {
            tau,
            s,
            tau_d,
            s_d,
            domain,
        })
    }

    pub fn domain(&self) -> [f64; 4] {
        self.domain
    }

    pub fn contains(&self, b: Complex64, slack: f64) -> bool {
        b.re >= self.domain[0] - slack
            && b.re <= self.domain[1] + slack
            && b.im >= self.domain[2] - slack
            && b.im <= self.domain[3] + slack
    }

    fn eval(p: &MVPoly<Complex64>, b: Complex64) -> Complex64 {
        p.eval(&[b]).expect("one variable")
    }

    pub fn tau_at(&self, b: Complex64) -> Complex64 {
        Self::eval(&self.tau, b)
    }

    pub fn s_at(&self, b: Complex64) -> Complex64 {
        Self::eval(&self.s, b)
    }

    /// `Im τ > 0` on a `grid × grid` lattice of the domain.
    pub fn verify_upper_half_plane(&self, grid: usize) -> bool {
        lattice(self.domain, grid).into_iter().all(|b| self.tau_at(b).im > 0.0)
    }
}

fn lattice(domain: [f64; 4], grid: usize) -> Vec<Complex64> {
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        if grid <= 1 || lo == hi {
            return vec![0.5 * (lo + hi)];
        }
        (0..grid)
            .map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64)
            .collect()
    };
    let xs = axis(domain[0], domain[1]);
    let ys = axis(domain[2], domain[3]);
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
        .collect()
}

/// Real pair `(u, v)` with `w = u + v τ`.
fn split(w: Complex64, tau: Complex64) -> (f64, f64) {
    let v = w.im / tau.im;
    (w.re - v * tau.re, v)
}

fn beta_unchecked(fam: &EllipticFamily, b: Complex64) -> Result<(f64, f64)> {
    let tau = fam.tau_at(b);
    if tau.im <= 0.0 || !tau.im.is_finite() {
        return Err(Error::Inadmissible(format!("Im tau = {} at b = {b}", tau.im)));
    }
    Ok(split(fam.s_at(b), tau))
}

/// `(β₁, β₂)` with `s(b) = β₁ + β₂ τ(b)`.
pub fn betti_elliptic(fam: &EllipticFamily, b: Complex64) -> Result<(f64, f64)> {
    if !fam.contains(b, DOMAIN_SLACK) {
        return Err(Error::precondition(MODULE, format!("b = {b} lies outside the domain")));
    }
    beta_unchecked(fam, b)
}

/// Columns `∂β/∂x` and `∂β/∂y` at `b = x + iy`.
fn beta_jacobian(fam: &EllipticFamily, b: Complex64) -> Result<[[f64; 2]; 2]> {
    let tau = fam.tau_at(b);
    let (_, b2) = beta_unchecked(fam, b)?;
    // s' = dβ₁ + dβ₂ τ + β₂ τ' along a holomorphic direction
    let w = EllipticFamily::eval(&fam.s_d, b) - EllipticFamily::eval(&fam.tau_d, b) * b2;
    let (ux, vx) = split(w, tau);
    let (uy, vy) = split(w * Complex64::new(0.0, 1.0), tau);
    Ok([[ux, uy], [vx, vy]])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: [f64; 2],
    /// Set when the thresholded rank is 1.
    pub odd_rank: bool,
}

fn singular_values_2x2(m: [[f64; 2]; 2]) -> [f64; 2] {
    let sv = linalg::real_singular_values(&nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[m[0][0], m[0][1], m[1][0], m[1][1]],
    ));
    [sv[0], sv[1]]
}

/// Rank of the real Jacobian of `b ↦ β(b)`, thresholded relative to the
/// largest singular value with an absolute floor.
pub fn rank_dichotomy(fam: &EllipticFamily, b: Complex64, tol: f64, abs_floor: f64) -> Result<RankReport> {
    if !fam.contains(b, DOMAIN_SLACK) {
        return Err(Error::precondition(MODULE, format!("b = {b} lies outside the domain")));
    }
    let sv = singular_values_2x2(beta_jacobian(fam, b)?);
    let thr = (tol * sv[0]).max(abs_floor);
    let rank = sv.iter().filter(|&&x| x > thr).count();
    Ok(RankReport {
        rank,
        singular_values: sv,
        odd_rank: rank == 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankCell {
    pub re: f64,
    pub im: f64,
    pub rank: Option<usize>,
}

/// Rank stratification on a `grid × grid` lattice; inadmissible cells carry
/// `None`.
pub fn rank_map(fam: &EllipticFamily, grid: usize, tol: f64, abs_floor: f64) -> Vec<RankCell> {
    lattice(fam.domain, grid)
        .into_iter()
        .map(|b| RankCell {
            re: b.re,
            im: b.im,
            rank: rank_dichotomy(fam, b, tol, abs_floor).ok().map(|r| r.rank),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticHit {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "N")]
    pub order: u64,
    pub p: [i64; 2],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticTorsion {
    pub hits: Vec<EllipticHit>,
    pub seed_grid: usize,
    /// `β` when it is constant over the domain; torsion is then all or nothing.
    pub constant_beta: Option<[f64; 2]>,
    pub whole_domain: bool,
}

const ENUM_TOL: f64 = 1e-13;
const MAX_SEED_GRID: usize = 2049;
const CELLS: usize = 16;

fn newton(fam: &EllipticFamily, start: Complex64, target: (f64, f64)) -> Option<(Complex64, f64)> {
    let [w, h] = [fam.domain[1] - fam.domain[0], fam.domain[3] - fam.domain[2]];
    let margin = 0.25 * w.max(h).max(1e-3);
    let mut b = start;
    for _ in 0..60 {
        let (b1, b2) = beta_unchecked(fam, b).ok()?;
        let r = (b1 - target.0, b2 - target.1);
        let res = r.0.abs().max(r.1.abs());
        if res <= ENUM_TOL {
            return Some((b, res));
        }
        let j = beta_jacobian(fam, b).ok()?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = (j[1][1] * r.0 - j[0][1] * r.1) / det;
        let dy = (-j[1][0] * r.0 + j[0][0] * r.1) / det;
        b -= Complex64::new(dx, dy);
        if !fam.contains(b, margin) {
            return None;
        }
    }
    let (b1, b2) = beta_unchecked(fam, b).ok()?;
    let res = (b1 - target.0).abs().max((b2 - target.1).abs());
    (res <= 1e3 * ENUM_TOL).then_some((b, res))
}

/// All points of the domain with `β(b) ∈ (1/N)ℤ²`.
///
/// Seeds come from a lattice fine enough that neighbouring seeds differ in
/// `N·β` by well under one; each lattice point proposes its nearest target
/// and the best seed per target and coarse cell is refined by Newton.
pub fn torsion_enumerate(fam: &EllipticFamily, order: u64, dedup_radius: f64) -> Result<EllipticTorsion> {
    if order == 0 {
        return Err(Error::Schema("torsion order must be positive".into()));
    }
    let n = order as f64;
    let coarse = lattice(fam.domain, 33);
    let mut lip: f64 = 0.0;
    let mut beta_min = [f64::INFINITY; 2];
    let mut beta_max = [f64::NEG_INFINITY; 2];
    for &b in &coarse {
        let (b1, b2) = betti_elliptic(fam, b)?;
        beta_min = [beta_min[0].min(b1), beta_min[1].min(b2)];
        beta_max = [beta_max[0].max(b1), beta_max[1].max(b2)];
        let j = beta_jacobian(fam, b)?;
        lip = lip.max(singular_values_2x2(j)[0]);
    }
    let spread = (beta_max[0] - beta_min[0]).max(beta_max[1] - beta_min[1]);
    if lip <= 1e-12 && spread <= 1e-12 {
        let beta = [beta_min[0], beta_min[1]];
        let rational = beta.iter().all(|x| (x * n - (x * n).round()).abs() <= 1e-9);
        return Ok(EllipticTorsion {
            hits: Vec::new(),
            seed_grid: coarse.len(),
            constant_beta: Some(beta),
            whole_domain: rational,
        });
    }
    let width = (fam.domain[1] - fam.domain[0]).max(fam.domain[3] - fam.domain[2]);
    // a hit's basin contains the disc of radius 1/(2·N·lip); spacing below
    // 0.5/(N·lip) puts a seed inside it
    let grid = ((2.0 * lip * width * n).ceil() as usize + 2).clamp(33, MAX_SEED_GRID);
    let seeds = lattice(fam.domain, grid);

    let cell_of = |b: Complex64| -> (usize, usize) {
        let cx = ((b.re - fam.domain[0]) / (fam.domain[1] - fam.domain[0]).max(1e-300) * CELLS as f64) as usize;
        let cy = ((b.im - fam.domain[2]) / (fam.domain[3] - fam.domain[2]).max(1e-300) * CELLS as f64) as usize;
        (cx.min(CELLS - 1), cy.min(CELLS - 1))
    };
    let mut best: BTreeMap<([i64; 2], (usize, usize)), (f64, Complex64)> = BTreeMap::new();
    for &b in &seeds {
        let (b1, b2) = beta_unchecked(fam, b)?;
        let p = [(b1 * n).round() as i64, (b2 * n).round() as i64];
        let d = (b1 * n - p[0] as f64).abs().max((b2 * n - p[1] as f64).abs());
        let key = (p, cell_of(b));
        match best.get(&key) {
            Some(&(dd, _)) if dd <= d => {}
            _ => {
                best.insert(key, (d, b));
            }
        }
    }
    let mut hits = Vec::new();
    for ((p, _), (_, seed)) in best {
        let target = (p[0] as f64 / n, p[1] as f64 / n);
        if let Some((b, residual)) = newton(fam, seed, target) {
            if fam.contains(b, DOMAIN_SLACK) {
                hits.push(EllipticHit {
                    re: b.re,
                    im: b.im,
                    order,
                    p,
                    residual,
                });
            }
        }
    }
    Ok(EllipticTorsion {
        hits: dedup(hits, dedup_radius),
        seed_grid: grid,
        constant_beta: None,
        whole_domain: false,
    })
}

fn dedup(mut hits: Vec<EllipticHit>, radius: f64) -> Vec<EllipticHit> {
    hits.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut kept: Vec<EllipticHit> = Vec::with_capacity(hits.len());
    for h in hits {
        if !kept
            .iter()
            .rev()
            .take_while(|k| h.re - k.re < radius)
            .any(|k| (k.re - h.re).hypot(k.im - h.im) < radius)
        {
            kept.push(h);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticDensityRow {
    #[serde(rename = "N")]
    pub order: u64,
    pub epsilon: f64,
    pub coverage: f64,
    pub hit_count: usize,
}

/// Fraction of a `grid × grid` lattice lying within `epsilon` of a hit of
/// order at most `N`, accumulated over the sorted orders.
pub fn elliptic_density(
    fam: &EllipticFamily,
    orders: &[u64],
    epsilon: f64,
    grid: usize,
) -> Result<Vec<EllipticDensityRow>> {
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let probes = lattice(fam.domain, grid);
    let mut covered = vec![false; probes.len()];
    let mut total = 0;
    let mut rows = Vec::new();
    for &order in &sorted {
        let t = torsion_enumerate(fam, order, 1e-8)?;
        total += t.hits.len();
        for (c, pt) in covered.iter_mut().zip(&probes) {
            if !*c {
                *c = t.whole_domain
                    || t.hits
                        .iter()
                        .any(|h| (h.re - pt.re).hypot(h.im - pt.im) <= epsilon);
            }
        }
        rows.push(EllipticDensityRow {
            order,
            epsilon,
            coverage: covered.iter().filter(|&&c| c).count() as f64 / probes.len() as f64,
            hit_count: total,
        });
    }
    Ok(rows)
}

/// A finitely generated group acting on `ℚ^d` through integer matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyProblem {
    generators: Vec<Vec<Vec<i64>>>,
    dim: usize,
}

impl MonodromyProblem {
    pub fn new(generators: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let dim = generators.first().map_or(0, Vec::len);
        for (k, g) in generators.iter().enumerate() {
            if g.len() != dim || g.iter().any(|r| r.len() != dim) {
                return Err(Error::Schema(format!("generator {k} is not {dim}×{dim}")));
            }
            if linalg::exact_det(&to_gauss(g)).is_zero() {
                return Err(Error::Schema(format!("generator {k} is not invertible")));
            }
        }
        Ok(MonodromyProblem { generators, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Vec<i64>>] {
        &self.generators
    }

    fn stacked_minus_identity(&self) -> Vec<Vec<GaussRat>> {
        self.generators
            .iter()
            .flat_map(|g| {
                g.iter().enumerate().map(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &x)| GaussRat::from_i64(x - i64::from(i == j)))
                        .collect()
                })
            })
            .collect()
    }
}

fn to_gauss(m: &[Vec<i64>]) -> Vec<Vec<GaussRat>> {
    m.iter()
        .map(|r| r.iter().map(|&x| GaussRat::from_i64(x)).collect())
        .collect()
}

/// Rational basis of the vectors fixed by every generator.
pub fn invariant_subspace(mp: &MonodromyProblem) -> Vec<Vec<BigRational>> {
    let rows = mp.stacked_minus_identity();
    linalg::exact_nullspace(&rows, mp.dim)
        .into_iter()
        .map(|v| v.into_iter().map(|x| x.re).collect())
        .collect()
}

/// Best rational approximation `p/q` with `1 ≤ q ≤ max_den`, by continued
/// fractions and their semiconvergents.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64) {
    if !x.is_finite() || max_den == 0 {
        return (0, 1);
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    let max_den = max_den as i128;
    let mut best = (x.round() as i128, 1i128);
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_den {
            let k = (max_den - q0) / q1.max(1);
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            let err = |p: i128, q: i128| (x - p as f64 / q as f64).abs();
            if qs >= 1 && err(ps, qs) < err(p1, q1) {
                best = (ps, qs);
            } else {
                best = (p1, q1);
            }
            break;
        }
        best = (p2, q2);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    (best.0 as i64, best.1 as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum QuasiRationalVerdict {
    /// Every difference is near-rational and `v` matches the rational vector
    /// they determine.
    ConsistentRational,
    /// Some difference `ρ(γ)v − v` is not near a rational of bounded
    /// denominator.
    ConsistentNotNearRational,
    /// All differences are near-rational but `v` is not near the rational
    /// vector they determine.
    NearViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiRationalReport {
    pub verdict: QuasiRationalVerdict,
    pub max_den: u64,
    /// Largest distance from a difference component to its best rational.
    pub max_rational_distance: f64,
    pub reconstructed_v: Option<Vec<String>>,
}

pub const QUASI_RATIONAL_TOL: f64 = 1e-9;

/// One-sided check that `ρ(γ)v − v` being rational for all generators forces
/// `v` rational, when there are no invariant vectors.
pub fn quasi_rational_check(mp: &MonodromyProblem, v: &[f64], max_den: u64) -> Result<QuasiRationalReport> {
    if !invariant_subspace(mp).is_empty() {
        return Err(Error::precondition(MODULE, "the representation has nonzero invariant vectors"));
    }
    if v.len() != mp.dim {
        return Err(Error::DimensionMismatch {
            expected: mp.dim,
            found: v.len(),
        });
    }
    let mut rhs = Vec::new();
    let mut max_dist: f64 = 0.0;
    let mut near = true;
    for g in &mp.generators {
        for (i, row) in g.iter().enumerate() {
            let r: f64 = row.iter().zip(v).map(|(&a, &x)| a as f64 * x).sum::<f64>() - v[i];
            let (p, q) = best_rational(r, max_den);
            let d = (r - p as f64 / q as f64).abs();
            max_dist = max_dist.max(d);
            near &= d <= QUASI_RATIONAL_TOL;
            rhs.push(BigRational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
    if !near {
        return Ok(QuasiRationalReport {
            verdict: QuasiRationalVerdict::ConsistentNotNearRational,
            max_den,
            max_rational_distance: max_dist,
            reconstructed_v: None,
        });
    }
    let rows = mp.stacked_minus_identity();
    let aug: Vec<Vec<GaussRat>> = rows
        .into_iter()
        .zip(&rhs)
        .map(|(mut r, b)| {
            r.push(GaussRat::real(b.clone()));
            r
        })
        .collect();
    let (rref, pivots) = linalg::exact_rref(&aug, mp.dim + 1);
    let solution = if pivots.contains(&mp.dim) {
        None
    } else {
        let mut x = vec![BigRational::zero(); mp.dim];
        for (row, &c) in rref.iter().zip(&pivots) {
            x[c] = row[mp.dim].re.clone();
        }
        Some(x)
    };
    let matches = solution.as_ref().is_some_and(|x| {
        x.iter().zip(v).all(|(q, &f)| {
            let qf = q.to_f64().unwrap_or(f64::NAN);
            (qf - f).abs() <= QUASI_RATIONAL_TOL * qf.abs().max(1.0)
        })
    });
    Ok(QuasiRationalReport {
        verdict: if matches {
            QuasiRationalVerdict::ConsistentRational
        } else {
            QuasiRationalVerdict::NearViolation
        },
        max_den,
        max_rational_distance: max_dist,
        reconstructed_v: solution.map(|x| x.iter().map(ToString::to_string).collect()),
    })
}

/// Closed-form torsion points of `τ(b) = b`, `s ≡ i` on
/// `[x_lo, x_hi] × [y_lo, y_hi]` (with `y_lo > 0`): `β = (−x/y, 1/y)`, so the
/// hits are `y = N/m`, `x = −k/m`.
pub fn identity_family_oracle(order: u64, domain: [f64; 4]) -> Vec<(i64, i64)> {
    let n = order as i64;
    let m_lo = (n as f64 / domain[3]).ceil() as i64 - 1;
    let m_hi = (n as f64 / domain[2]).floor() as i64 + 1;
    let mut out = Vec::new();
    for m in m_lo.max(1)..=m_hi {
        let y = n as f64 / m as f64;
        if y < domain[2] - 1e-12 || y > domain[3] + 1e-12 {
            continue;
        }
        for k in (-(domain[1] * m as f64).ceil() as i64 - 1)..=(-(domain[0] * m as f64).floor() as i64 + 1) {
            let x = -(k as f64) / m as f64;
            if x >= domain[0] - 1e-12 && x <= domain[1] + 1e-12 {
                out.push((k, m));
            }
        }
    }
    out
}
