//! Exact dense linear algebra over `Z` and `Q`.
//!
//! Lattice maps are small integer matrices (rank at most eight in practice);
//! products of reflection matrices stay well inside `i64`, and every place
//! where intermediate growth is a real risk (Smith normal form, kernel
//! computations) switches to arbitrary precision. Nothing here rounds.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

/// Dense row-major matrix over `i64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IMat {
    /// Number of rows.
    pub rows: usize,
    /// Number of columns.
    pub cols: usize,
    /// Row-major entries, `a[r * cols + c]`.
    pub a: Vec<i64>,
}

impl IMat {
    /// Builds a matrix from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IMat {
            rows: r,
            cols: c,
            a: rows.concat(),
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        IMat { rows: n, cols: n, a }
    }

    /// Entry accessor.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> i64 {
        self.a[r * self.cols + c]
    }

    /// Mutable entry accessor.
    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut i64 {
        &mut self.a[r * self.cols + c]
    }

    /// Matrix product `self * rhs` with overflow checks.
    pub fn mul(&self, rhs: &IMat) -> IMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IMat {
            rows: self.rows,
            cols: rhs.cols,
            a: vec![0; self.rows * rhs.cols],
        };
        for r in 0..self.rows {
            for k in 0..self.cols {
                let v = self.at(r, k);
                if v == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let cell = &mut out.a[r * rhs.cols + c];
                    *cell = cell
                        .checked_add(v.checked_mul(rhs.at(k, c)).expect("overflow"))
                        .expect("overflow");
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.at(r, c).checked_mul(v[c]).expect("overflow"))
                    .try_fold(0i64, i64::checked_add)
                    .expect("overflow")
            })
            .collect()
    }

    /// Transpose.
    pub fn transpose(&self) -> IMat {
        let mut out = IMat {
            rows: self.cols,
            cols: self.rows,
            a: vec![0; self.a.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.a[c * self.rows + r] = self.at(r, c);
            }
        }
        out
    }

    /// True for the square identity.
    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IMat::identity(self.rows)
    }

    /// Exact determinant via arbitrary precision expansion.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let big: Vec<Vec<BigRational>> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| BigRational::from_integer(BigInt::from(self.at(r, c))))
                    .collect()
            })
            .collect();
        let d = qmat_det(&big);
        assert!(d.is_integer());
        d.to_integer()
    }

    /// Exact inverse for matrices of determinant `+-1`; `None` otherwise.
    pub fn inverse_unimodular(&self) -> Option<IMat> {
        if self.rows != self.cols {
            return None;
        }
        let d = self.det();
        if !(d.clone().abs().is_one()) {
            return None;
        }
        let n = self.rows;
        let rows: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| BigRational::from_integer(BigInt::from(self.at(r, c))))
                    .collect()
            })
            .collect();
        let inv = qmat_inverse(&rows)?;
        let mut a = Vec::with_capacity(n * n);
        for row in &inv {
            for x in row {
                assert!(x.is_integer());
                a.push(i64::try_from(x.to_integer()).expect("entry out of i64 range"));
            }
        }
        Some(IMat { rows: n, cols: n, a })
    }
}

/// Nonzero elementary divisors `d_1 | d_2 | ...` of the integer matrix whose
/// rows are given, computed by Smith normal form over `BigInt`.
pub fn smith_invariants(rows: &[Vec<i64>]) -> Vec<BigInt> {
    if rows.is_empty() {
        return Vec::new();
    }
    let cols = rows[0].len();
    assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let nr = m.len();
    let nc = cols;
    let mut diag: Vec<BigInt> = Vec::new();
    let mut top = 0usize;
    let mut left = 0usize;
    while top < nr && left < nc {
        // Pivot search: smallest nonzero entry in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for r in top..nr {
            for c in left..nc {
                if !m[r][c].is_zero() {
                    match &pivot {
                        Some((pr, pc)) if m[*pr][*pc].clone().abs() <= m[r][c].clone().abs() => {}
                        _ => pivot = Some((r, c)),
                    }
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        m.swap(top, pr);
        for row in m.iter_mut() {
            row.swap(left, pc);
        }
        loop {
            let mut clean = true;
            for r in top + 1..nr {
                if m[r][left].is_zero() {
                    continue;
                }
                let q = div_round(&m[r][left], &m[top][left]);
                if !q.is_zero() {
                    for c in left..nc {
                        let t = &m[top][c] * &q;
                        m[r][c] -= t;
                    }
                }
                if !m[r][left].is_zero() {
                    m.swap(top, r);
                    clean = false;
                }
            }
            for c in left + 1..nc {
                if m[top][c].is_zero() {
                    continue;
                }
                let q = div_round(&m[top][c], &m[top][left]);
                if !q.is_zero() {
                    for r in top..nr {
                        let t = &m[r][left] * &q;
                        m[r][c] -= t;
                    }
                }
                if !m[top][c].is_zero() {
                    for row in m.iter_mut().skip(top) {
                        row.swap(left, c);
                    }
                    clean = false;
                }
            }
            let col_clear = (top + 1..nr).all(|r| m[r][left].is_zero());
            let row_clear = (left + 1..nc).all(|c| m[top][c].is_zero());
            if clean && col_clear && row_clear {
                break;
            }
        }
        diag.push(m[top][left].clone().abs());
        top += 1;
        left += 1;
    }
    // Enforce the divisibility chain d_i | d_{i+1}.
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..diag.len().saturating_sub(1) {
            let (a, b) = (diag[i].clone(), diag[i + 1].clone());
            if !(&b % &a).is_zero() {
                let g = a.gcd(&b);
                let l = (&a * &b) / &g;
                diag[i] = g;
                diag[i + 1] = l;
                changed = true;
            }
        }
    }
    diag.retain(|d| !d.is_zero());
    diag
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // Rounded division keeps remainders small, which keeps entries small.
    let two = BigInt::from(2);
    let (q, r) = a.div_rem(b);
    if &r.clone().abs() * &two > b.clone().abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + BigInt::one()
        } else {
            q - BigInt::one()
        }
    } else {
        q
    }
}

/// Converts integer rows to rational rows.
pub fn to_rational_rows(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect()
}

/// Rank of a rational matrix by Gaussian elimination.
pub fn qmat_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m = rows.to_vec();
    let nr = m.len();
    if nr == 0 {
        return 0;
    }
    let nc = m[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < nr && col < nc {
        if let Some(p) = (rank..nr).find(|&r| !m[r][col].is_zero()) {
            m.swap(rank, p);
            let inv = m[rank][col].clone();
            for c in col..nc {
                let v = &m[rank][c] / &inv;
                m[rank][c] = v;
            }
            for r in 0..nr {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in col..nc {
                        let t = &m[rank][c] * &f;
                        m[r][c] = &m[r][c] - &t;
                    }
                }
            }
            rank += 1;
        }
        col += 1;
    }
    rank
}

/// Basis of the right kernel `{x : M x = 0}` of a rational matrix.
pub fn qmat_nullspace(rows: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nc == 0 {
        return Vec::new();
    }
    if nr == 0 {
        return (0..nc)
            .map(|i| {
                let mut e = vec![BigRational::zero(); nc];
                e[i] = BigRational::one();
                e
            })
            .collect();
    }
    let mut m = rows.to_vec();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nc];
    let mut rank = 0;
    for col in 0..nc {
        if let Some(p) = (rank..nr).find(|&r| !m[r][col].is_zero()) {
            m.swap(rank, p);
            let inv = m[rank][col].clone();
            for c in 0..nc {
                let v = &m[rank][c] / &inv;
                m[rank][c] = v;
            }
            for r in 0..nr {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..nc {
                        let t = &m[rank][c] * &f;
                        m[r][c] = &m[r][c] - &t;
                    }
                }
            }
            pivot_of_col[col] = Some(rank);
            rank += 1;
            if rank == nr {
                break;
            }
        }
    }
    let mut basis = Vec::new();
    for free in 0..nc {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![BigRational::zero(); nc];
        v[free] = BigRational::one();
        for (col, piv) in pivot_of_col.iter().enumerate() {
            if let Some(r) = piv {
                v[col] = -m[*r][free].clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// Solves `M x = b` over the rationals; `None` when inconsistent. When the
/// system is underdetermined the free variables are set to zero, which makes
/// the returned solution canonical.
pub fn qmat_solve(rows: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let nr = rows.len();
    assert_eq!(nr, b.len(), "dimension mismatch");
    let nc = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; nc];
    let mut rank = 0;
    for col in 0..nc {
        if let Some(p) = (rank..nr).find(|&r| !m[r][col].is_zero()) {
            m.swap(rank, p);
            let inv = m[rank][col].clone();
            for c in 0..=nc {
                let v = &m[rank][c] / &inv;
                m[rank][c] = v;
            }
            for r in 0..nr {
                if r != rank && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for c in 0..=nc {
                        let t = &m[rank][c] * &f;
                        m[r][c] = &m[r][c] - &t;
                    }
                }
            }
            pivot_of_col[col] = Some(rank);
            rank += 1;
        }
    }
    if m.iter().skip(rank).any(|row| !row[nc].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); nc];
    for (col, piv) in pivot_of_col.iter().enumerate() {
        if let Some(r) = piv {
            x[col] = m[*r][nc].clone();
        }
    }
    Some(x)
}

fn qmat_det(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        det *= m[col][col].clone();
        let inv = m[col][col].clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &inv;
            for c in col..n {
                let t = &m[col][c] * &f;
                m[r][c] = &m[r][c] - &t;
            }
        }
    }
    det
}

fn qmat_inverse(rows: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = rows.len();
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            for j in 0..n {
                row.push(if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                });
            }
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].clone();
        for c in 0..2 * n {
            let v = &m[col][c] / &inv;
            m[col][c] = v;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * n {
                    let t = &m[col][c] * &f;
                    m[r][c] = &m[r][c] - &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}
