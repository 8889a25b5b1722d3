//! Exact integer linear algebra over arbitrary-precision integers.
//!
//! Everything downstream (Gram determinants, discriminant groups, glue
//! quotients, the cohomology oracle) reduces to the handful of routines in
//! this module: Bareiss determinants, Smith and Hermite normal forms, and
//! integer kernels.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_diagonal(d: &[BigInt]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// True when every off-diagonal entry is zero (rectangular allowed).
    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Multiplies every entry by `k`.
    pub fn scaled(&self, k: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    /// Block-diagonal sum of the given matrices.
    pub fn block_diagonal(blocks: &[&IntMatrix]) -> IntMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        let c = self.cols;
        for j in 0..c {
            let s = &self.data[src * c + j];
            if !s.is_zero() {
                let delta = s * k;
                self.data[dst * c + j] += delta;
            }
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        let c = self.cols;
        for i in 0..self.rows {
            let s = &self.data[i * c + src];
            if !s.is_zero() {
                let delta = s * k;
                self.data[i * c + dst] += delta;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = &mut self.data[i * self.cols + j];
            *x = -std::mem::take(x);
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Exact determinant by Bareiss fraction-free elimination.
pub fn det_exact(a: &IntMatrix) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a non-square {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                Some(i) => {
                    m.swap_rows(i, k);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = num / &prev;
            }
        }
        prev = m[(k, k)].clone();
    }
    let d = m[(n - 1, n - 1)].clone();
    Ok(if negate { -d } else { d })
}

/// Smith normal form `u * a * v = diag(d)`.
///
/// `d` has `min(rows, cols)` entries, all nonnegative, each dividing the
/// next; zeros (if any) come last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub d: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }

    /// The rectangular diagonal matrix `u * a * v`.
    pub fn diagonal(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.u.rows(), self.v.rows());
        for (i, x) in self.d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let mut u = IntMatrix::identity(a.rows);
    let mut v = IntMatrix::identity(a.cols);
    let mut work = a.clone();
    let d = reduce_to_smith(&mut work, Some((&mut u, &mut v)));
    SmithForm { d, u, v }
}

/// Invariant factors only; skips the bookkeeping of the transforms, which
/// matters for tall sparse matrices such as bar-resolution coboundaries.
pub fn invariant_factors(a: &IntMatrix) -> Vec<BigInt> {
    let mut work = a.clone();
    reduce_to_smith(&mut work, None)
}

/// Nearest-integer quotient, so the remainder is at most half the divisor.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    let twice = &r * 2;
    if b.is_positive() {
        if twice > *b {
            q + 1
        } else {
            q
        }
    } else if twice < *b {
        q + 1
    } else {
        q
    }
}

fn reduce_to_smith(a: &mut IntMatrix, mut tr: Option<(&mut IntMatrix, &mut IntMatrix)>) -> Vec<BigInt> {
    let (m, n) = (a.rows, a.cols);
    let steps = m.min(n);
    for t in 0..steps {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = &a[(i, j)];
                    if x.is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some(b) => x.magnitude() < a[b].magnitude(),
                    };
                    if better {
                        best = Some((i, j));
                        if x.magnitude().is_one() {
                            break;
                        }
                    }
                }
                if best.is_some_and(|b| a[b].magnitude().is_one()) {
                    break;
                }
            }
            let Some((pi, pj)) = best else {
                // trailing block is zero
                return (0..steps)
                    .map(|k| if k < t { a[(k, k)].clone() } else { BigInt::zero() })
                    .collect();
            };
            a.swap_rows(t, pi);
            a.swap_cols(t, pj);
            if let Some((u, v)) = tr.as_mut() {
                u.swap_rows(t, pi);
                v.swap_cols(t, pj);
            }

            let mut clean = true;
            let pivot = a[(t, t)].clone();
            for i in t + 1..m {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -round_div(&a[(i, t)], &pivot);
                a.add_row_multiple(i, t, &q);
                if let Some((u, _)) = tr.as_mut() {
                    u.add_row_multiple(i, t, &q);
                }
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -round_div(&a[(t, j)], &pivot);
                a.add_col_multiple(j, t, &q);
                if let Some((_, v)) = tr.as_mut() {
                    v.add_col_multiple(j, t, &q);
                }
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !a[(i, j)].is_multiple_of(&pivot)));
            if let Some(i) = offender {
                let one = BigInt::one();
                a.add_row_multiple(t, i, &one);
                if let Some((u, _)) = tr.as_mut() {
                    u.add_row_multiple(t, i, &one);
                }
                continue;
            }
            break;
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            if let Some((u, _)) = tr.as_mut() {
                u.negate_row(t);
            }
        }
    }
    (0..steps).map(|k| a[(k, k)].clone()).collect()
}

/// Row-style Hermite normal form: the nonzero rows of an upper echelon
/// matrix with positive pivots and entries above each pivot reduced into
/// `[0, pivot)`. Spans the same row lattice as `a`.
pub fn hermite_normal_form(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let (m, n) = (h.rows, h.cols);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // gcd-combine everything below r in column c into row r
        loop {
            let nz = (r..m)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&x, &y| h[(x, c)].magnitude().cmp(h[(y, c)].magnitude()));
            let Some(p) = nz else { break };
            h.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                done &= h[(i, c)].is_zero();
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            if !q.is_zero() {
                h.add_row_multiple(i, r, &q);
            }
        }
        r += 1;
    }
    let data = h.data[..r * n].to_vec();
    IntMatrix { rows: r, cols: n, data }
}

/// Basis (as columns) of the integer kernel `{x : a x = 0}`.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let n = a.cols;
    let mut k = IntMatrix::zeros(n, n - r);
    for (out, j) in (r..n).enumerate() {
        for i in 0..n {
            k[(i, out)] = snf.v[(i, j)].clone();
        }
    }
    k
}

/// Solves `a x = b` over the rationals for square nonsingular `a`.
pub fn solve_rational(a: &IntMatrix, b: &[BigInt]) -> Result<Vec<BigRational>> {
    if !a.is_square() || b.len() != a.rows {
        return Err(Error::Dimension("solve needs a square system".into()));
    }
    let n = a.rows;
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> =
                a.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&i| !m[i][c].is_zero())
            .ok_or_else(|| Error::Degenerate("singular system".into()))?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..=n {
                let delta = &f * &m[c][j];
                m[i][j] -= delta;
            }
        }
    }
    Ok(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Inverse of a matrix with determinant `±1`.
pub fn inverse_unimodular(a: &IntMatrix) -> Result<IntMatrix> {
    let n = a.rows;
    let mut inv = IntMatrix::zeros(n, n);
    for j in 0..n {
        let e: Vec<BigInt> = (0..n).map(|i| BigInt::from((i == j) as i64)).collect();
        let col = solve_rational(a, &e)?;
        for (i, x) in col.into_iter().enumerate() {
            if !x.is_integer() {
                return Err(Error::Domain("matrix is not unimodular".into()));
            }
            inv[(i, j)] = x.to_integer();
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn neg_a3() -> IntMatrix {
        IntMatrix::from_rows(&[[-2, 1, 0], [1, -2, 1], [0, 1, -2]])
    }

    #[test]
    fn det_small_cases() {
        assert_eq!(det_exact(&IntMatrix::from_rows(&[[-2]])).unwrap(), BigInt::from(-2));
        let a2 = IntMatrix::from_rows(&[[-2, 1], [1, -2]]);
        assert_eq!(det_exact(&a2).unwrap(), BigInt::from(3));
        assert_eq!(det_exact(&IntMatrix::zeros(0, 0)).unwrap(), BigInt::one());
    }

    #[test]
    fn det_needs_pivoting() {
        let m = IntMatrix::from_rows(&[[0, 1, 2], [3, 0, 1], [1, 1, 0]]);
        // 0*(0-1) - 1*(0-1) + 2*(3-0) = 7
        assert_eq!(det_exact(&m).unwrap(), BigInt::from(7));
        let singular = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert!(det_exact(&singular).unwrap().is_zero());
    }

    #[test]
    fn det_rejects_non_square() {
        let m = IntMatrix::from_rows(&[[1, 2, 3]]);
        assert!(matches!(det_exact(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn smith_examples() {
        let d = smith_normal_form(&IntMatrix::from_rows(&[[2, 0], [0, 2]])).d;
        assert_eq!(d, big(&[2, 2]));
        let d = smith_normal_form(&neg_a3()).d;
        assert_eq!(d, big(&[1, 1, 4]));
        let d = smith_normal_form(&IntMatrix::from_rows(&[[0]])).d;
        assert_eq!(d, big(&[0]));
    }

    #[test]
    fn smith_transforms_reconstruct() {
        let a = IntMatrix::from_rows(&[[4, 6, 2], [2, 8, 10], [6, 0, 4], [1, 3, 5]]);
        let s = smith_normal_form(&a);
        assert_eq!(&(&s.u * &a) * &s.v, s.diagonal());
        let ui = inverse_unimodular(&s.u).unwrap();
        let vi = inverse_unimodular(&s.v).unwrap();
        assert_eq!(&(&ui * &s.diagonal()) * &vi, a);
        for w in s.d.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]) || w[0].is_zero() && w[1].is_zero());
        }
    }

    #[test]
    fn invariant_factors_match_full_form() {
        let a = IntMatrix::from_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]);
        assert_eq!(invariant_factors(&a), smith_normal_form(&a).d);
        assert_eq!(invariant_factors(&a), big(&[2, 6, 12]));
    }

    #[test]
    fn hermite_form_shape() {
        let a = IntMatrix::from_rows(&[[2, 3, 6], [4, 1, 2], [6, 4, 8]]);
        let h = hermite_normal_form(&a);
        // third row is the sum of the first two
        assert_eq!(h.rows(), 2);
        assert!(h[(0, 0)].is_positive());
        assert!(h[(1, 0)].is_zero());
        // the row lattice is unchanged: same invariant factors
        let hf: Vec<_> = invariant_factors(&h).into_iter().filter(|x| !x.is_zero()).collect();
        let af: Vec<_> = invariant_factors(&a).into_iter().filter(|x| !x.is_zero()).collect();
        assert_eq!(hf, af);
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = IntMatrix::from_rows(&[[1, 2, 3]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 2);
        assert!((&a * &k).entries().iter().all(Zero::is_zero));
        // the kernel is saturated: its Gram has unit content
        let d = invariant_factors(&k);
        assert!(d.iter().all(|x| x.is_one()));
    }

    #[test]
    fn solve_and_invert() {
        let a = IntMatrix::from_rows(&[[2, 1], [1, 1]]);
        let inv = inverse_unimodular(&a).unwrap();
        assert_eq!(&a * &inv, IntMatrix::identity(2));
        assert!(inverse_unimodular(&IntMatrix::from_rows(&[[2, 0], [0, 1]])).is_err());
    }
}
