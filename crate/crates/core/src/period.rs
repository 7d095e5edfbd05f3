//! Period data of a Donagi-Markman potential at a base point.
//!
//! For a potential `g(z₁, …, zₙ)` the flat frame is `f_i = z_i` and
//! `f_{n+i} = ∂g/∂z_i`, so `τ = Hess g(b)`, `df_{n+i} = Σ_j τ_ij dz_j`, and the
//! Hodge frame is `e'_i = e_{n+i} − Σ_j τ_ij e_j`. The pairing is the standard
//! symplectic form with `e₁..eₙ` isotropic; only positivity of `Im τ` is
//! consumed downstream.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::forms::{contract, CubicForm, QuadraticForm};
use crate::poly::MVPoly;
use crate::scalar::{Complex64, Scalar};

/// Potential `g` together with its cached partial derivatives.
#[derive(Clone, Debug)]
pub struct Potential<S> {
    g: MVPoly<S>,
    grad: Vec<MVPoly<S>>,
    hess: Vec<Vec<MVPoly<S>>>,
    third: Vec<Vec<Vec<MVPoly<S>>>>,
}

impl<S: Scalar> Potential<S> {
    pub fn new(g: MVPoly<S>) -> Self {
        let grad = g.gradient();
        let hess: Vec<Vec<MVPoly<S>>> = grad.iter().map(MVPoly::gradient).collect();
        let third = hess
            .iter()
            .map(|row| row.iter().map(MVPoly::gradient).collect())
            .collect();
        Potential {
            g,
            grad,
            hess,
            third,
        }
    }

    pub fn n(&self) -> usize {
        self.g.nvars()
    }

    pub fn g(&self) -> &MVPoly<S> {
        &self.g
    }

    /// `g_i = ∂g/∂z_i`, the second half of the flat frame.
    pub fn partials(&self) -> &[MVPoly<S>] {
        &self.grad
    }

    pub fn partials_at(&self, b: &[S]) -> Result<Vec<S>> {
        self.grad.iter().map(|p| p.eval(b)).collect()
    }

    pub fn tau_at(&self, b: &[S]) -> Result<QuadraticForm<S>> {
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

    /// `g⁽³⁾_b`: third partials of `g` at `b`.
    pub fn cubic_at(&self, b: &[S]) -> Result<CubicForm<S>> {
        check_len(self.n(), b.len())?;
        let n = self.n();
        let mut c = CubicForm::zero(n);
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    c.set_symmetric(i, j, k, self.third[i][j][k].eval(b)?);
                }
            }
        }
        Ok(c)
    }

    pub fn with_added(&self, extra: &MVPoly<S>) -> Self {
        Potential::new(&self.g + extra)
    }

    pub fn to_float(&self) -> Potential<Complex64> {
        Potential::new(self.g.to_float())
    }
}

#[derive(Clone, Debug)]
pub struct PeriodFrame<S> {
    pub b: Vec<S>,
    pub tau: QuadraticForm<S>,
    /// `f_{n+i}(b) = ∂g/∂z_i(b)`; the constants of the flat functions are the
    /// literal polynomial values.
    pub flat_values: Vec<S>,
}

impl<S: Scalar> PeriodFrame<S> {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// The 2n differentials `df_i` as coefficient vectors in `dz₁..dzₙ`.
    pub fn frame_differentials(&self) -> Vec<Vec<S>> {
        let n = self.n();
        let mut out: Vec<Vec<S>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        out.extend(self.tau.rows().iter().cloned());
        out
    }

    /// `e'_i = e_{n+i} − Σ_j τ_ij e_j` in the fixed frame `e₁..e_{2n}`.
    pub fn hodge_frame(&self) -> Vec<Vec<S>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut v = vec![S::zero(); 2 * n];
                for j in 0..n {
                    v[j] = -self.tau.get(i, j).clone();
                }
                v[n + i] = S::one();
                v
            })
            .collect()
    }

    /// Real `2n × 2n` matrix whose column `i` stacks `Re df_i` over `Im df_i`.
    pub fn real_frame_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let diffs = self.frame_differentials();
        DMatrix::from_fn(2 * n, 2 * n, |r, c| {
            let z = diffs[c][r % n].to_c64();
            if r < n {
                z.re
            } else {
                z.im
            }
        })
    }

    /// Flat real coordinates `x_i = Re f_i(b)`, `i = 1..2n`.
    pub fn flat_real_coords(&self) -> Vec<f64> {
        self.b
            .iter()
            .chain(&self.flat_values)
            .map(|v| v.to_c64().re)
            .collect()
    }
}

pub fn period_frame<S: Scalar>(p: &Potential<S>, b: &[S]) -> Result<PeriodFrame<S>> {
    check_len(p.n(), b.len())?;
    Ok(PeriodFrame {
        b: b.to_vec(),
        tau: p.tau_at(b)?,
        flat_values: p.partials_at(b)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub reason: Option<String>,
    pub min_eig_im_tau: f64,
}

/// Riemann relations: `τ` symmetric and `Im τ` positive definite, decided by
/// an LDLᵀ factorization whose pivots must exceed `tol · max diag`.
pub fn check_riemann<S: Scalar>(fr: &PeriodFrame<S>, tol: f64) -> Admissibility {
    let n = fr.n();
    let im = DMatrix::from_fn(n, n, |i, j| fr.tau.get(i, j).to_c64().im);
    let min_eig = if n == 0 {
        f64::INFINITY
    } else {
        SymmetricEigen::new(im.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    let fail = |reason: String| Admissibility {
        admissible: false,
        reason: Some(reason),
        min_eig_im_tau: min_eig,
    };

    let scale = fr.tau.max_abs().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let a = fr.tau.get(i, j);
            let b = fr.tau.get(j, i);
            let symmetric = if S::is_exact() {
                a == b
            } else {
                (a.clone() - b.clone()).magnitude() <= 1e-12 * scale
            };
            if !symmetric {
                return fail(format!("tau not symmetric at ({i}, {j})"));
            }
        }
    }

    let max_diag = (0..n).map(|i| im[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    if n > 0 && max_diag <= 0.0 {
        return fail("Im tau not positive definite (no positive diagonal entry)".into());
    }
    let threshold = tol * max_diag;
    let mut a = im;
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot.is_nan() || pivot <= threshold {
            return fail(format!(
                "Im tau not positive definite (pivot {k} = {pivot:e} <= {threshold:e})"
            ));
        }
        for i in (k + 1)..n {
            let l = a[(i, k)] / pivot;
            for j in (k + 1)..n {
                a[(i, j)] -= l * a[(k, j)];
            }
        }
    }
    Admissibility {
        admissible: true,
        reason: None,
        min_eig_im_tau: min_eig,
    }
}

/// `∇̄_v` at `b`: the contraction of `g⁽³⁾_b` with `v`.
pub fn nabla_bar<S: Scalar>(p: &Potential<S>, b: &[S], v: &[S]) -> Result<QuadraticForm<S>> {
    check_len(p.n(), v.len())?;
    contract(&p.cubic_at(b)?, v)
}

/// Axis-aligned box in the `2n` real base coordinates, ordered
/// `(Re z₁, …, Re zₙ, Im z₁, …, Im zₙ)`. An axis with `lo == hi` is a fixed
/// slice.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct BaseBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BaseBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if lo.len() % 2 != 0 {
            return Err(Error::Schema("box must have 2n real coordinates".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Schema("box bounds must be finite with lo <= hi".into()));
        }
        Ok(BaseBox { lo, hi })
    }

    pub fn real_dim(&self) -> usize {
        self.lo.len()
    }

    pub fn n(&self) -> usize {
        self.lo.len() / 2
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.lo.len()).filter(|&i| self.hi[i] > self.lo[i]).collect()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }

    /// Regular grid with `per_axis` points along every free axis.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let free = self.free_axes();
        let per_axis = per_axis.max(1);
        let mut out = vec![self.lo.clone()];
        for &ax in &free {
            let mut next = Vec::with_capacity(out.len() * per_axis);
            for p in &out {
                for k in 0..per_axis {
                    let t = if per_axis == 1 { 0.5 } else { k as f64 / (per_axis - 1) as f64 };
                    let mut q = p.clone();
                    q[ax] = self.lo[ax] + t * (self.hi[ax] - self.lo[ax]);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// Smallest spacing of [`BaseBox::grid`] over the free axes.
    pub fn grid_spacing(&self, per_axis: usize) -> f64 {
        if per_axis < 2 {
            return f64::INFINITY;
        }
        self.free_axes()
            .iter()
            .map(|&ax| (self.hi[ax] - self.lo[ax]) / (per_axis - 1) as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn real_to_complex(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect()
}

pub fn complex_to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type Q = GaussRat;

    fn diag_potential(n: usize) -> MVPoly<Q> {
        let half_i = Q::imag_unit() * Q::from_ratio(1, 2);
        (0..n)
            .map(|i| MVPoly::var(n, i).pow(2))
            .fold(MVPoly::zero(n), |acc, t| &acc + &t)
            .scale(&half_i)
    }

    #[test]
    fn frame_of_standard_potential() {
        let p = Potential::new(diag_potential(2));
        let fr = period_frame(&p, &[Q::from_i64(4), Q::from_ratio(-1, 3)]).unwrap();
        assert_eq!(fr.tau, QuadraticForm::identity(2).scale(&Q::imag_unit()));
        let d = fr.frame_differentials();
        assert_eq!(d[2], vec![Q::imag_unit(), Q::zero()]);
        assert_eq!(d[3], vec![Q::zero(), Q::imag_unit()]);
        let h = fr.hodge_frame();
        assert_eq!(h[0], vec![-Q::imag_unit(), Q::zero(), Q::one(), Q::zero()]);
        assert_eq!(h[1], vec![Q::zero(), -Q::imag_unit(), Q::zero(), Q::one()]);
        assert!(check_riemann(&fr, 1e-12).admissible);
    }

    #[test]
    fn frame_with_cubic_term() {
        let g = &diag_potential(2) + &MVPoly::var(2, 0).pow(3).scale(&Q::from_ratio(1, 6));
        let fr = period_frame(&Potential::new(g), &[Q::one(), Q::zero()]).unwrap();
        assert_eq!(fr.tau.get(0, 0), &(Q::imag_unit() + Q::one()));
        assert_eq!(fr.tau.get(1, 1), &Q::imag_unit());
        assert!(fr.tau.get(0, 1).is_zero());
    }

    #[test]
    fn negative_imaginary_part_is_inadmissible() {
        let g = diag_potential(2).scale(&-Q::one());
        let fr = period_frame(&Potential::new(g), &[Q::zero(), Q::zero()]).unwrap();
        let rep = check_riemann(&fr, 1e-12);
        assert!(!rep.admissible);
        assert!(rep.reason.unwrap().contains("positive definite"));
        assert!(rep.min_eig_im_tau < 0.0);
    }

    #[test]
    fn admissibility_boundary_for_cubic() {
        // g = (i/2)(z1²+z2²) + z1³ ; tau_11 = i + 6 z1, boundary at Im(6 t) = -1
        let g = &diag_potential(2) + &MVPoly::var(2, 0).pow(3);
        let p = Potential::new(g);
        let at = |im: f64| {
            let b = [Q::from_f64(0.0, im), Q::zero()];
            check_riemann(&period_frame(&p, &b).unwrap(), 1e-12).admissible
        };
        assert!(at(-0.1));
        assert!(at(-0.16));
        assert!(!at(-0.17));
        assert!(!at(-1.0));
    }

    #[test]
    fn nabla_bar_of_quadratic_is_zero() {
        let p = Potential::new(diag_potential(3));
        let b = [Q::one(), Q::from_i64(2), Q::imag_unit()];
        let v = [Q::from_i64(5), Q::from_i64(-1), Q::one()];
        assert!(nabla_bar(&p, &b, &v).unwrap().is_zero());
    }

    #[test]
    fn grid_respects_slices() {
        let bx = BaseBox::new(vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let g = bx.grid(3);
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(|p| p[1] == 0.0 && p[3] == 0.0));
        assert_eq!(bx.grid_spacing(3), 0.5);
    }
}
