//! Symmetric matrices and symmetric 3-tensors.

use crate::error::{check_len, Error, Result};
use crate::poly::MVPoly;
use crate::scalar::{Complex64, Scalar};

/// Default relative singular-value threshold for float rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm<S> {
    m: Vec<Vec<S>>,
}

impl<S: Scalar> QuadraticForm<S> {
    /// Checks symmetry: exact equality in exact mode, entrywise within 1e-12
    /// relative to the largest entry in float mode.
    pub fn new(m: Vec<Vec<S>>) -> Result<Self> {
        let n = m.len();
        for row in &m {
            check_len(n, row.len())?;
        }
        let scale = m
            .iter()
            .flatten()
            .map(Scalar::magnitude)
            .fold(0.0_f64, f64::max);
        for i in 0..n {
            for j in (i + 1)..n {
                let ok = if S::is_exact() {
                    m[i][j] == m[j][i]
                } else {
                    (m[i][j].clone() - m[j][i].clone()).magnitude() <= 1e-12 * scale.max(1.0)
                };
                if !ok {
                    return Err(Error::Schema(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(QuadraticForm { m })
    }

    pub(crate) fn from_symmetric_unchecked(m: Vec<Vec<S>>) -> Self {
        QuadraticForm { m }
    }

    pub fn zero(n: usize) -> Self {
        QuadraticForm {
            m: vec![vec![S::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut q = Self::zero(n);
        for i in 0..n {
            q.m[i][i] = S::one();
        }
        q
    }

    /// Form of a homogeneous quadratic polynomial `q(x) = xᵀ M x`.
    pub fn from_polynomial(p: &MVPoly<S>) -> Self {
        let n = p.nvars();
        let mut q = Self::zero(n);
        let half = S::one() / S::from_i64(2);
        for (exp, c) in p.terms() {
            let idx: Vec<usize> = exp
                .iter()
                .enumerate()
                .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
                .collect();
            match idx.as_slice() {
                [i, j] if i == j => q.m[*i][*i] = q.m[*i][*i].clone() + c.clone(),
                [i, j] => {
                    let h = c.clone() * half.clone();
                    q.m[*i][*j] = q.m[*i][*j].clone() + h.clone();
                    q.m[*j][*i] = q.m[*j][*i].clone() + h;
                }
                _ => {}
            }
        }
        q
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.m[i][j]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().flatten().all(Scalar::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(Scalar::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &S) -> Self {
        QuadraticForm {
            m: self
                .m
                .iter()
                .map(|r| r.iter().map(|x| x.clone() * c.clone()).collect())
                .collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert_eq!(self.dim(), other.dim(), "form dimension mismatch");
        QuadraticForm {
            m: self
                .m
                .iter()
                .zip(&other.m)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x.clone(), y.clone())).collect())
                .collect(),
        }
    }

    /// Gram matrix `Wᵀ M W` of the form restricted to the span of `basis`
    /// (bilinear restriction, no conjugation).
    pub fn restrict(&self, basis: &[Vec<S>]) -> Result<Vec<Vec<S>>> {
        let n = self.dim();
        for w in basis {
            check_len(n, w.len())?;
        }
        let mw: Vec<Vec<S>> = basis.iter().map(|w| self.apply(w)).collect();
        Ok(basis
            .iter()
            .map(|u| mw.iter().map(|v| dot(u, v)).collect())
            .collect())
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        self.m.iter().map(|row| dot(row, v)).collect()
    }

    pub fn to_float(&self) -> QuadraticForm<Complex64> {
        QuadraticForm {
            m: self
                .m
                .iter()
                .map(|r| r.iter().map(Scalar::to_c64).collect())
                .collect(),
        }
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Rank of a quadratic form: exact elimination in exact mode, otherwise the
/// number of singular values above `tol` times the largest one.
pub fn form_rank<S: Scalar>(q: &QuadraticForm<S>, tol: f64) -> usize {
    S::matrix_rank(q.rows(), q.dim(), tol)
}

/// Fully symmetric `n × n × n` tensor, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicForm<S> {
    n: usize,
    c: Vec<S>,
}

impl<S: Scalar> CubicForm<S> {
    pub fn zero(n: usize) -> Self {
        CubicForm {
            n,
            c: vec![S::zero(); n * n * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &S {
        &self.c[self.idx(i, j, k)]
    }

    /// Writes `v` into all six permutations of `(i, j, k)`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, k: usize, v: S) {
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            let ix = self.idx(a, b, c);
            self.c[ix] = v.clone();
        }
    }

    /// Symmetrizes a sparse list of tensor entries by averaging over index
    /// permutations; unlisted entries are zero. Repeated entries add.
    pub fn from_entries(n: usize, entries: &[([usize; 3], S)]) -> Result<Self> {
        let mut raw = vec![S::zero(); n * n * n];
        for (ijk, v) in entries {
            for &i in ijk {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, nvars: n });
                }
            }
            let ix = (ijk[0] * n + ijk[1]) * n + ijk[2];
            raw[ix] = raw[ix].clone() + v.clone();
        }
        let sixth = S::one() / S::from_i64(6);
        let mut out = CubicForm::zero(n);
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let at = |a: usize, b: usize, c: usize| raw[(a * n + b) * n + c].clone();
                    let sum = at(i, j, k) + at(i, k, j) + at(j, i, k) + at(j, k, i) + at(k, i, j)
                        + at(k, j, i);
                    out.set_symmetric(i, j, k, sum * sixth.clone());
                }
            }
        }
        Ok(out)
    }

    /// Raw third-partials tensor of a polynomial (its cubic part), so that
    /// `X₁³` gives `C₁₁₁ = 6`.
    pub fn from_polynomial(p: &MVPoly<S>) -> Self {
        let zero = vec![S::zero(); p.nvars()];
        p.third_tensor_at(&zero).expect("matching length")
    }

    /// The cubic polynomial `Σ C_ijk x_i x_j x_k`.
    pub fn to_polynomial(&self) -> MVPoly<S> {
        let n = self.n;
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut e = vec![0u32; n];
                    e[i] += 1;
                    e[j] += 1;
                    e[k] += 1;
                    terms.push((e, self.get(i, j, k).clone()));
                }
            }
        }
        MVPoly::from_terms(n, terms).expect("exponent lengths match")
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = self.get(i, j, k);
                    if self.get(j, i, k) != v || self.get(i, k, j) != v || self.get(k, j, i) != v {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Substitution action `C'(x) = C(A x)`: `C'_abc = Σ C_ijk A_ia A_jb A_kc`.
    pub fn substitute(&self, a: &[Vec<S>]) -> Result<Self> {
        let n = self.n;
        check_len(n, a.len())?;
        for row in a {
            check_len(n, row.len())?;
        }
        // contract one index at a time
        let step = |t: &[S], axis: usize| -> Vec<S> {
            let mut out = vec![S::zero(); n * n * n];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = S::zero();
                        for m in 0..n {
                            let (src, coef) = match axis {
                                0 => ((m * n + j) * n + k, &a[m][i]),
                                1 => ((i * n + m) * n + k, &a[m][j]),
                                _ => ((i * n + j) * n + m, &a[m][k]),
                            };
                            if !coef.is_zero() && !t[src].is_zero() {
                                acc = acc + t[src].clone() * coef.clone();
                            }
                        }
                        out[(i * n + j) * n + k] = acc;
                    }
                }
            }
            out
        };
        let t = step(&self.c, 0);
        let t = step(&t, 1);
        let t = step(&t, 2);
        Ok(CubicForm { n, c: t })
    }

    pub fn to_float(&self) -> CubicForm<Complex64> {
        CubicForm {
            n: self.n,
            c: self.c.iter().map(Scalar::to_c64).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }
}

/// `Q_v` with `(Q_v)_jk = Σ_i v_i C_ijk`.
pub fn contract<S: Scalar>(c: &CubicForm<S>, v: &[S]) -> Result<QuadraticForm<S>> {
    let n = c.dim();
    check_len(n, v.len())?;
    let mut m = vec![vec![S::zero(); n]; n];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        for j in 0..n {
            for k in j..n {
                let e = c.get(i, j, k);
                if e.is_zero() {
                    continue;
                }
                m[j][k] = m[j][k].clone() + vi.clone() * e.clone();
            }
        }
    }
    for j in 0..n {
        for k in 0..j {
            m[j][k] = m[k][j].clone();
        }
    }
    Ok(QuadraticForm::from_symmetric_unchecked(m))
}
