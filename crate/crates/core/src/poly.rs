//! Sparse multivariate polynomials over a [`Scalar`] field.
//!
//! Variables are indexed from 0. Terms live in a `BTreeMap` keyed by
//! exponent vector, so iteration order (and everything serialized from it)
//! is deterministic.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_len, Error, Result};
use crate::forms::{CubicForm, QuadraticForm};
use crate::scalar::{Complex64, Scalar};

pub type Exponent = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct MVPoly<S> {
    nvars: usize,
    terms: BTreeMap<Exponent, S>,
}

impl<S: Scalar> MVPoly<S> {
    pub fn zero(nvars: usize) -> Self {
        MVPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: S) -> Self {
        MVPoly::monomial(nvars, vec![0; nvars], c)
    }

    /// The coordinate function `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        MVPoly::monomial(nvars, exp, S::one())
    }

    pub fn monomial(nvars: usize, exp: Exponent, c: S) -> Self {
        assert_eq!(exp.len(), nvars, "exponent length must equal nvars");
        let mut p = MVPoly::zero(nvars);
        p.add_term(exp, c);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// repeated exponents and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, S)>,
    {
        let mut p = MVPoly::zero(nvars);
        for (exp, c) in terms {
            check_len(nvars, exp.len())?;
            p.add_term(exp, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exp: Exponent, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exp) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(exp, sum);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coefficient(&self, exp: &[u32]) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, z: &[S]) -> Result<S> {
        check_len(self.nvars, z.len())?;
        let maxdeg: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<S>> = z
            .iter()
            .zip(&maxdeg)
            .map(|(x, &d)| {
                let mut pw = Vec::with_capacity(d as usize + 1);
                pw.push(S::one());
                for k in 1..=d as usize {
                    let next = pw[k - 1].clone() * x.clone();
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut acc = S::zero();
        for (exp, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    t = t * powers[i][e as usize].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to `z_i`.
    pub fn diff(&self, i: usize) -> Result<Self> {
        if i >= self.nvars {
            return Err(Error::IndexOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        let mut out = MVPoly::zero(self.nvars);
        for (exp, c) in &self.terms {
            let e = exp[i];
            if e == 0 {
                continue;
            }
            let mut ne = exp.clone();
            ne[i] = e - 1;
            out.add_term(ne, c.clone() * S::from_i64(e as i64));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars)
            .map(|i| self.diff(i).expect("index in range"))
            .collect()
    }

    pub fn gradient_at(&self, b: &[S]) -> Result<Vec<S>> {
        check_len(self.nvars, b.len())?;
        self.gradient().iter().map(|d| d.eval(b)).collect()
    }

    pub fn hessian_at(&self, b: &[S]) -> Result<QuadraticForm<S>> {
        check_len(self.nvars, b.len())?;
        let n = self.nvars;
        let grad = self.gradient();
        let mut m = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = grad[i].diff(j)?.eval(b)?;
                m[j][i] = v.clone();
                m[i][j] = v;
            }
        }
        Ok(QuadraticForm::from_symmetric_unchecked(m))
    }

    /// Tensor of third partials `∂³p/∂z_i∂z_j∂z_k` at `b`.
    pub fn third_tensor_at(&self, b: &[S]) -> Result<CubicForm<S>> {
        check_len(self.nvars, b.len())?;
        let n = self.nvars;
        let mut c = CubicForm::zero(n);
        for i in 0..n {
            let di = self.diff(i)?;
            for j in i..n {
                let dij = di.diff(j)?;
                for k in j..n {
                    let v = dij.diff(k)?.eval(b)?;
                    c.set_symmetric(i, j, k, v);
                }
            }
        }
        Ok(c)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return MVPoly::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, x)| (e.clone(), x.clone() * c.clone()))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        MVPoly {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = MVPoly::constant(self.nvars, S::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().sum::<u32>() == d)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        MVPoly {
            nvars: self.nvars,
            terms,
        }
    }

    /// Linear substitution `w ↦ p(A w)`; `a` is `nvars × m`, row-major.
    pub fn substitute_linear(&self, a: &[Vec<S>]) -> Result<Self> {
        check_len(self.nvars, a.len())?;
        let m = a.first().map_or(0, |r| r.len());
        let images: Vec<MVPoly<S>> = a
            .iter()
            .map(|row| {
                check_len(m, row.len())?;
                MVPoly::from_terms(
                    m,
                    row.iter().enumerate().map(|(j, c)| {
                        let mut e = vec![0; m];
                        e[j] = 1;
                        (e, c.clone())
                    }),
                )
            })
            .collect::<Result<_>>()?;
        let mut out = MVPoly::zero(m);
        for (exp, c) in &self.terms {
            let mut t = MVPoly::constant(m, c.clone());
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    t = &t * &images[i].pow(e);
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MVPoly<T> {
        let mut out = MVPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn to_float(&self) -> MVPoly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }
}

impl<S: Scalar> Add for &MVPoly<S> {
    type Output = MVPoly<S>;
    fn add(self, rhs: &MVPoly<S>) -> MVPoly<S> {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in polynomial sum");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &MVPoly<S> {
    type Output = MVPoly<S>;
    fn sub(self, rhs: &MVPoly<S>) -> MVPoly<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Neg for &MVPoly<S> {
    type Output = MVPoly<S>;
    fn neg(self) -> MVPoly<S> {
        self.map_coeffs(|c| -c.clone())
    }
}

impl<S: Scalar> Mul for &MVPoly<S> {
    type Output = MVPoly<S>;
    fn mul(self, rhs: &MVPoly<S>) -> MVPoly<S> {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in polynomial product");
        let mut out = MVPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type Q = GaussRat;

    fn z(n: usize, i: usize) -> MVPoly<Q> {
        MVPoly::var(n, i)
    }

    #[test]
    fn eval_examples() {
        // z1^2 + i z2 at (1, 2)
        let p = &z(2, 0).pow(2) + &z(2, 1).scale(&Q::imag_unit());
        let v = p.eval(&[Q::from_i64(1), Q::from_i64(2)]).unwrap();
        assert_eq!(v, Q::from_i64(1) + Q::from_i64(2) * Q::imag_unit());

        let zero = MVPoly::<Q>::zero(3);
        assert!(zero.eval(&[Q::one(), Q::one(), Q::one()]).unwrap().is_zero());

        let xyz = &(&z(3, 0) * &z(3, 1)) * &z(3, 2);
        let v = xyz
            .eval(&[Q::from_i64(2), Q::from_i64(3), Q::from_i64(5)])
            .unwrap();
        assert_eq!(v, Q::from_i64(30));
    }

    #[test]
    fn eval_dimension_mismatch() {
        let p = z(2, 0);
        assert_eq!(
            p.eval(&[Q::one()]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn diff_examples() {
        let p = z(1, 0).pow(3).scale(&Q::from_ratio(1, 6));
        let expect = z(1, 0).pow(2).scale(&Q::from_ratio(1, 2));
        assert_eq!(p.diff(0).unwrap(), expect);

        assert!(z(2, 1).diff(0).unwrap().is_zero());
        assert!(matches!(z(2, 1).diff(2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn hessian_examples() {
        // (i/2)(z1^2 + z2^2) -> i I
        let half_i = Q::imag_unit() * Q::from_ratio(1, 2);
        let g = (&z(2, 0).pow(2) + &z(2, 1).pow(2)).scale(&half_i);
        let h = g.hessian_at(&[Q::from_i64(3), Q::from_i64(-1)]).unwrap();
        assert_eq!(h.get(0, 0), &Q::imag_unit());
        assert_eq!(h.get(1, 1), &Q::imag_unit());
        assert!(h.get(0, 1).is_zero());

        // z1^2 z2 at (1,1) -> [[2,2],[2,0]]
        let p = &z(2, 0).pow(2) * &z(2, 1);
        let h = p.hessian_at(&[Q::one(), Q::one()]).unwrap();
        assert_eq!(h.get(0, 0), &Q::from_i64(2));
        assert_eq!(h.get(0, 1), &Q::from_i64(2));
        assert_eq!(h.get(1, 0), &Q::from_i64(2));
        assert!(h.get(1, 1).is_zero());
    }

    #[test]
    fn third_tensor_examples() {
        let p = z(3, 0).pow(3).scale(&Q::from_ratio(1, 6));
        let b = vec![Q::from_i64(2), Q::from_i64(-1), Q::from_ratio(1, 3)];
        let c = p.third_tensor_at(&b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expect = if (i, j, k) == (0, 0, 0) { Q::one() } else { Q::zero() };
                    assert_eq!(c.get(i, j, k), &expect);
                }
            }
        }

        let quad = &(&z(3, 0) * &z(3, 1)) + &z(3, 2).pow(2).scale(&Q::from_i64(7));
        assert!(quad.third_tensor_at(&b).unwrap().is_zero());

        let cubic = &z(3, 0).pow(2) * &z(3, 2);
        let shifted = &cubic + &quad;
        assert_eq!(
            cubic.third_tensor_at(&b).unwrap(),
            shifted.third_tensor_at(&b).unwrap()
        );
    }

    #[test]
    fn substitution_composes() {
        // p(x, y) = x^2 y ; A = [[1, 1], [0, 2]] -> (u + v)^2 (2v)
        let p = &z(2, 0).pow(2) * &z(2, 1);
        let a = vec![
            vec![Q::one(), Q::one()],
            vec![Q::zero(), Q::from_i64(2)],
        ];
        let s = p.substitute_linear(&a).unwrap();
        let uv = [Q::from_i64(3), Q::from_i64(-2)];
        let direct = p.eval(&[Q::from_i64(1), Q::from_i64(-4)]).unwrap();
        assert_eq!(s.eval(&uv).unwrap(), direct);
    }
}
