//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! An element is a coefficient vector of length `phi(N)` in the power basis
//! `1, zeta, ..., zeta^{phi(N)-1}`, reduced modulo the `N`-th cyclotomic
//! polynomial. Binary operations promote both sides to the least common
//! level. Character values, intertwiner entries and pairings all live here;
//! nothing is ever rounded, so "this trace is zero" is a theorem about the
//! input, not about floating point.

use crate::exact::qmat_solve;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Euler phi function.
pub fn euler_phi(n: u32) -> usize {
    let mut result = n;
    let mut n = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

/// Monic cyclotomic polynomial `Phi_n`, integer coefficients low to high.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    // x^n - 1 divided by the product of Phi_d over proper divisors d of n.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            num = poly_div_exact(&num, &phi_d);
        }
    }
    num
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        quot[k] = c.clone();
        for (j, dj) in den.iter().enumerate() {
            let t = dj * &c;
            rem[k + j] -= t;
        }
    }
    assert!(rem.iter().all(BigInt::is_zero), "division was not exact");
    quot
}

struct LevelData {
    phi: usize,
    /// `reduction[k]` expresses `x^(phi + k)` in the power basis.
    reduction: Vec<Vec<BigRational>>,
}

fn level_data(n: u32) -> std::sync::Arc<LevelData> {
    static CACHE: OnceLock<Mutex<HashMap<u32, std::sync::Arc<LevelData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("level cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let phi = euler_phi(n);
            let poly = cyclotomic_polynomial(n);
            // x^phi = -(c_0 + ... + c_{phi-1} x^{phi-1}).
            let head: Vec<BigRational> = poly[..phi]
                .iter()
                .map(|c| BigRational::from_integer(-c.clone()))
                .collect();
            let rows_needed = (2 * phi).max(n as usize).saturating_sub(phi);
            let mut reduction: Vec<Vec<BigRational>> = Vec::with_capacity(rows_needed);
            if rows_needed > 0 {
                reduction.push(head.clone());
                for _ in 1..rows_needed {
                    let prev = reduction.last().unwrap();
                    // Multiply by x: shift, then fold the overflow through head.
                    let overflow = prev[phi - 1].clone();
                    let mut next = vec![BigRational::zero(); phi];
                    for i in 1..phi {
                        next[i] = prev[i - 1].clone();
                    }
                    if !overflow.is_zero() {
                        for (i, h) in head.iter().enumerate() {
                            let t = h * &overflow;
                            next[i] += t;
                        }
                    }
                    reduction.push(next);
                }
            }
            std::sync::Arc::new(LevelData { phi, reduction })
        })
        .clone()
}

/// Element of `Q(zeta_N)` in the reduced power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cyc {
    level: u32,
    coeffs: Vec<BigRational>,
}

impl Cyc {
    /// Zero at the given level.
    pub fn zero(level: u32) -> Cyc {
        assert!(level >= 1);
        Cyc {
            level,
            coeffs: vec![BigRational::zero(); euler_phi(level)],
        }
    }

    /// One at the given level.
    pub fn one(level: u32) -> Cyc {
        Cyc::from_rational(level, BigRational::one())
    }

    /// A rational constant at the given level.
    pub fn from_rational(level: u32, r: BigRational) -> Cyc {
        let mut c = Cyc::zero(level);
        c.coeffs[0] = r;
        c
    }

    /// A rational integer constant at level 1.
    pub fn from_int(n: i64) -> Cyc {
        Cyc::from_rational(1, BigRational::from_integer(BigInt::from(n)))
    }

    /// The root of unity `zeta_level^k`.
    pub fn zeta(level: u32, k: i64) -> Cyc {
        let mut c = Cyc::zero(level);
        let k = k.rem_euclid(level as i64) as usize;
        c.add_power(k, &BigRational::one());
        c
    }

    /// Level of the ambient field in the current representation.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Borrow of the power-basis coefficients, length `phi(level)`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn add_power(&mut self, k: usize, scale: &BigRational) {
        if scale.is_zero() {
            return;
        }
        let data = level_data(self.level);
        let k = k % self.level as usize;
        if k < data.phi {
            self.coeffs[k] += scale;
        } else {
            for (i, c) in data.reduction[k - data.phi].iter().enumerate() {
                let t = c * scale;
                self.coeffs[i] += t;
            }
        }
    }

    /// Rewrites to a higher level; the new level must be a multiple.
    pub fn promote(&self, new_level: u32) -> Cyc {
        if new_level == self.level {
            return self.clone();
        }
        assert!(
            new_level % self.level == 0,
            "promotion target must be a multiple of the current level"
        );
        let ratio = (new_level / self.level) as usize;
        let mut out = Cyc::zero(new_level);
        for (j, c) in self.coeffs.iter().enumerate() {
            out.add_power(j * ratio, c);
        }
        out
    }

    fn aligned(&self, other: &Cyc) -> (Cyc, Cyc) {
        let l = lcm_u32(self.level, other.level);
        (self.promote(l), other.promote(l))
    }

    /// Addition.
    pub fn add(&self, other: &Cyc) -> Cyc {
        let (mut a, b) = self.aligned(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }

    /// Subtraction.
    pub fn sub(&self, other: &Cyc) -> Cyc {
        let (mut a, b) = self.aligned(other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        a
    }

    /// Negation.
    pub fn neg(&self) -> Cyc {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -c.clone();
        }
        out
    }

    /// Multiplication.
    pub fn mul(&self, other: &Cyc) -> Cyc {
        let (a, b) = self.aligned(other);
        let mut out = Cyc::zero(a.level);
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                out.add_power(i + j, &(x * y));
            }
        }
        out
    }

    /// Scale by a rational.
    pub fn scale(&self, r: &BigRational) -> Cyc {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = &*c * r;
        }
        out
    }

    /// True for the zero element.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(BigRational::is_zero)
    }

    /// `Some(r)` when the element is the rational constant `r`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(BigRational::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Equality across levels.
    pub fn eq_value(&self, other: &Cyc) -> bool {
        let (a, b) = self.aligned(other);
        a.coeffs == b.coeffs
    }

    /// Galois twist `zeta -> zeta^j`; `j` must be coprime to the level.
    pub fn galois(&self, j: u32) -> Cyc {
        assert_eq!(
            (j.gcd(&self.level)),
            1,
            "galois exponent must be coprime to the level"
        );
        let mut out = Cyc::zero(self.level);
        for (k, c) in self.coeffs.iter().enumerate() {
            out.add_power(k * j as usize, c);
        }
        out
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Cyc {
        if self.level == 1 {
            return self.clone();
        }
        self.galois(self.level - 1)
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Cyc {
        assert!(!self.is_zero(), "inverse of zero");
        let data = level_data(self.level);
        let phi = data.phi;
        // Solve (multiplication by self) v = 1 in the power basis.
        let mut cols: Vec<Cyc> = Vec::with_capacity(phi);
        for j in 0..phi {
            let mut prod = Cyc::zero(self.level);
            for (i, c) in self.coeffs.iter().enumerate() {
                prod.add_power(i + j, c);
            }
            cols.push(prod);
        }
        let rows: Vec<Vec<BigRational>> = (0..phi)
            .map(|r| (0..phi).map(|c| cols[c].coeffs[r].clone()).collect())
            .collect();
        let mut target = vec![BigRational::zero(); phi];
        target[0] = BigRational::one();
        let sol = qmat_solve(&rows, &target).expect("nonzero cyclotomic element is invertible");
        Cyc {
            level: self.level,
            coeffs: sol,
        }
    }

    /// Multiplicative order when the element is a root of unity; `None` if no
    /// power up to `bound` hits one.
    pub fn root_of_unity_order(&self, bound: u32) -> Option<u32> {
        let one = Cyc::one(self.level);
        let mut acc = self.clone();
        for k in 1..=bound {
            if acc.eq_value(&one) {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }

    /// Writes the element as `zeta_M^e` when it is a root of unity of order
    /// dividing `M`; `None` otherwise.
    pub fn as_zeta_power(&self, m: u32) -> Option<u32> {
        let mut acc = Cyc::one(m);
        let z = Cyc::zeta(m, 1);
        for e in 0..m {
            if self.eq_value(&acc) {
                return Some(e);
            }
            acc = acc.mul(&z);
        }
        None
    }

    /// Quadratic Gauss sum `sum_a legendre(a) zeta_p^a` over `F_p`. Its square
    /// is `p` for `p = 1 mod 4` and `-p` for `p = 3 mod 4`, and its product
    /// with its conjugate is exactly `p`.
    pub fn gauss_sum(p: u64) -> Cyc {
        let mut out = Cyc::zero(p as u32);
        for a in 1..p {
            let mut sq = false;
            for b in 1..p {
                if (b * b) % p == a {
                    sq = true;
                    break;
                }
            }
            let sign = if sq {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            out.add_power(a as usize, &sign);
        }
        out
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

/// Serialized form of a cyclotomic value: its level and the power-basis
/// coefficients as `"num/den"` strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CycRepr {
    /// Cyclotomic level `N` of the representation.
    pub level: u32,
    /// `phi(N)` coefficients, each in canonical rational string form.
    pub coeffs: Vec<String>,
}

impl From<&Cyc> for CycRepr {
    fn from(c: &Cyc) -> CycRepr {
        CycRepr {
            level: c.level,
            coeffs: c
                .coeffs
                .iter()
                .map(|r| format!("{}/{}", r.numer(), r.denom()))
                .collect(),
        }
    }
}

/// Dense matrix over a cyclotomic field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycMat {
    /// Number of rows.
    pub rows: usize,
    /// Number of columns.
    pub cols: usize,
    /// Row-major entries.
    pub a: Vec<Cyc>,
}

impl CycMat {
    /// Zero matrix.
    pub fn zero(rows: usize, cols: usize, level: u32) -> CycMat {
        CycMat {
            rows,
            cols,
            a: vec![Cyc::zero(level); rows * cols],
        }
    }

    /// Identity of size `n`.
    pub fn identity(n: usize, level: u32) -> CycMat {
        let mut m = CycMat::zero(n, n, level);
        for i in 0..n {
            m.a[i * n + i] = Cyc::one(level);
        }
        m
    }

    /// Entry accessor.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Cyc {
        &self.a[r * self.cols + c]
    }

    /// Mutable entry accessor.
    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Cyc {
        &mut self.a[r * self.cols + c]
    }

    /// Matrix product.
    pub fn mul(&self, rhs: &CycMat) -> CycMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = CycMat::zero(self.rows, rhs.cols, 1);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let v = self.at(r, k);
                if v.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let rv = rhs.at(k, c);
                    if rv.is_zero() {
                        continue;
                    }
                    let t = v.mul(rv);
                    *out.at_mut(r, c) = out.at(r, c).add(&t);
                }
            }
        }
        out
    }

    /// Scales every entry.
    pub fn scale_cyc(&self, s: &Cyc) -> CycMat {
        let mut out = self.clone();
        for e in &mut out.a {
            *e = e.mul(s);
        }
        out
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> Cyc {
        assert_eq!(self.rows, self.cols);
        let mut t = Cyc::zero(1);
        for i in 0..self.rows {
            t = t.add(self.at(i, i));
        }
        t
    }

    /// Equality as matrices of field values.
    pub fn eq_value(&self, other: &CycMat) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.a.iter().zip(&other.a).all(|(x, y)| x.eq_value(y))
    }

    /// `Some(s)` when the matrix is `s` times the identity.
    pub fn as_scalar(&self) -> Option<Cyc> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let s = self.at(0, 0).clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r == c {
                    if !self.at(r, c).eq_value(&s) {
                        return None;
                    }
                } else if !self.at(r, c).is_zero() {
                    return None;
                }
            }
        }
        Some(s)
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> CycMat {
        let mut out = CycMat::zero(self.cols, self.rows, 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).conj();
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<CycMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = CycMat::identity(n, 1);
        for col in 0..n {
            let p = (col..n).find(|&r| !m.at(r, col).is_zero())?;
            if p != col {
                for c in 0..n {
                    m.a.swap(col * n + c, p * n + c);
                    inv.a.swap(col * n + c, p * n + c);
                }
            }
            let pivot_inv = m.at(col, col).inv();
            for c in 0..n {
                *m.at_mut(col, c) = m.at(col, c).mul(&pivot_inv);
                *inv.at_mut(col, c) = inv.at(col, c).mul(&pivot_inv);
            }
            for r in 0..n {
                if r != col && !m.at(r, col).is_zero() {
                    let f = m.at(r, col).clone();
                    for c in 0..n {
                        let t = m.at(col, c).mul(&f);
                        *m.at_mut(r, c) = m.at(r, c).sub(&t);
                        let t = inv.at(col, c).mul(&f);
                        *inv.at_mut(r, c) = inv.at(r, c).sub(&t);
                    }
                }
            }
        }
        Some(inv)
    }

    /// Determinant by fraction-full Gaussian elimination.
    pub fn det(&self) -> Cyc {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Cyc::one(1);
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m.at(r, col).is_zero()) else {
                return Cyc::zero(1);
            };
            if p != col {
                for c in 0..n {
                    m.a.swap(col * n + c, p * n + c);
                }
                det = det.neg();
            }
            det = det.mul(m.at(col, col));
            let pivot_inv = m.at(col, col).inv();
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).mul(&pivot_inv);
                for c in col..n {
                    let t = m.at(col, c).mul(&f);
                    *m.at_mut(r, c) = m.at(r, c).sub(&t);
                }
            }
        }
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cyclotomic_polynomials_match_known_tables() {
        let to_i = |v: &[i64]| -> Vec<BigInt> { v.iter().map(|&x| BigInt::from(x)).collect() };
        assert_eq!(cyclotomic_polynomial(1), to_i(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(2), to_i(&[1, 1]));
        assert_eq!(cyclotomic_polynomial(3), to_i(&[1, 1, 1]));
        assert_eq!(cyclotomic_polynomial(4), to_i(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(6), to_i(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(8), to_i(&[1, 0, 0, 0, 1]));
        assert_eq!(cyclotomic_polynomial(12), to_i(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn zeta_powers_behave_like_roots_of_unity() {
        for n in [3u32, 4, 5, 8, 12] {
            let z = Cyc::zeta(n, 1);
            let mut acc = Cyc::one(n);
            for k in 0..n {
                assert!(acc.eq_value(&Cyc::zeta(n, k as i64)));
                acc = acc.mul(&z);
            }
            assert!(acc.eq_value(&Cyc::one(n)));
            assert_eq!(z.root_of_unity_order(2 * n), Some(n));
        }
        // Sum of all p-th roots of unity vanishes.
        for p in [3i64, 5, 7] {
            let mut s = Cyc::zero(p as u32);
            for k in 0..p {
                s = s.add(&Cyc::zeta(p as u32, k));
            }
            assert!(s.is_zero());
        }
    }

    #[test]
    fn promotion_preserves_values() {
        let z3 = Cyc::zeta(3, 1);
        let z12 = Cyc::zeta(12, 4);
        assert!(z3.promote(12).eq_value(&z12));
        assert!(z3.eq_value(&z12));
        let sum = z3.add(&Cyc::zeta(4, 1));
        assert_eq!(sum.level(), 12);
    }

    #[test]
    fn conjugation_and_inverse_agree_on_roots_of_unity() {
        for n in [3u32, 5, 8, 12] {
            for k in 1..n {
                let z = Cyc::zeta(n, k as i64);
                assert!(z.conj().eq_value(&z.inv()));
                assert!(z.mul(&z.conj()).eq_value(&Cyc::one(n)));
            }
        }
    }

    #[test]
    fn gauss_sum_squares_to_signed_p() {
        for p in [3u64, 5, 7, 11] {
            let g = Cyc::gauss_sum(p);
            let sq = g.mul(&g);
            let want = if p % 4 == 1 { p as i64 } else { -(p as i64) };
            assert!(sq.eq_value(&Cyc::from_int(want)), "p = {p}");
            assert!(g.mul(&g.conj()).eq_value(&Cyc::from_int(p as i64)));
        }
    }

    #[test]
    fn matrix_inverse_round_trips() {
        let z = Cyc::zeta(5, 1);
        let m = CycMat {
            rows: 2,
            cols: 2,
            a: vec![
                Cyc::one(5),
                z.clone(),
                z.mul(&z),
                Cyc::from_int(2).promote(5),
            ],
        };
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).eq_value(&CycMat::identity(2, 5)));
        let d = m.det();
        let d_inv = inv.det();
        assert!(d.mul(&d_inv).eq_value(&Cyc::one(1)));
    }

    proptest! {
        #[test]
        fn field_axioms_hold(
            a_num in -4i64..5, a_pow in 0i64..12,
            b_num in -4i64..5, b_pow in 0i64..12,
            c_num in -4i64..5, c_pow in 0i64..12,
        ) {
            let a = Cyc::zeta(12, a_pow).scale(&BigRational::from_integer(a_num.into()));
            let b = Cyc::zeta(12, b_pow).scale(&BigRational::from_integer(b_num.into()));
            let c = Cyc::zeta(12, c_pow).scale(&BigRational::from_integer(c_num.into()));
            prop_assert!(a.add(&b).eq_value(&b.add(&a)));
            prop_assert!(a.mul(&b).eq_value(&b.mul(&a)));
            prop_assert!(a.mul(&b.add(&c)).eq_value(&a.mul(&b).add(&a.mul(&c))));
            prop_assert!(a.mul(&b.mul(&c)).eq_value(&a.mul(&b).mul(&c)));
            if !a.is_zero() {
                prop_assert!(a.mul(&a.inv()).eq_value(&Cyc::one(1)));
            }
        }
    }
}
