//! Finite fields `F_{p^m}` with a deterministic choice of modulus.
//!
//! Elements are packed into a `u64` as base-`p` digit strings, so they hash
//! and compare cheaply; all arithmetic goes through a [`Gf`] context. The
//! modulus for `m > 1` is the lexicographically first monic irreducible
//! polynomial of degree `m` over `F_p`, which makes every run reproducible.

use serde::Serialize;
use thiserror::Error;

/// Element of a finite field, packed as base-`p` digits of the coordinate
/// vector in the power basis of the modulus. Only meaningful relative to the
/// [`Gf`] that produced it.
pub type FElt = u64;

/// Errors constructing a finite field context.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    /// Characteristic was not a prime number (zero and one included).
    #[error("characteristic {0} is not prime; a finite field is required")]
    CharacteristicNotPrime(u64),
    /// Degree zero does not define a field.
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    /// The field would be too large to enumerate.
    #[error("field of order {p}^{m} exceeds the enumeration bound")]
    TooLarge {
        /// Characteristic requested.
        p: u64,
        /// Degree requested.
        m: usize,
    },
}

/// A concrete finite field `F_{p^m}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gf {
    /// Characteristic, a prime.
    pub p: u64,
    /// Extension degree over the prime field.
    pub m: usize,
    /// Monic modulus of degree `m`, coefficients low to high, length `m + 1`.
    /// For `m = 1` this is `x`, so elements are plain residues.
    pub modulus: Vec<u64>,
}

/// Trial-division primality test, adequate for the small parameters used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Gf {
    /// Builds `F_{p^m}`. The order `p^m` must stay at or below `2^20` so that
    /// element enumeration and discrete logs stay cheap.
    pub fn new(p: u64, m: usize) -> Result<Gf, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::CharacteristicNotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let mut order: u64 = 1;
        for _ in 0..m {
            order = order.checked_mul(p).ok_or(FieldError::TooLarge { p, m })?;
            if order > 1 << 20 {
                return Err(FieldError::TooLarge { p, m });
            }
        }
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            first_irreducible(p, m)
        };
        Ok(Gf { p, m, modulus })
    }

    /// Field order `p^m`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.m as u32)
    }

    /// All field elements in canonical (packed-integer) order.
    pub fn elements(&self) -> impl Iterator<Item = FElt> {
        0..self.order()
    }

    /// Additive identity.
    pub fn zero(&self) -> FElt {
        0
    }

    /// Multiplicative identity.
    pub fn one(&self) -> FElt {
        1
    }

    /// Embeds a rational integer.
    pub fn from_int(&self, n: i64) -> FElt {
        let p = self.p as i64;
        n.rem_euclid(p) as u64
    }

    /// Decodes an element into its `m` digits, low to high.
    pub fn digits(&self, x: FElt) -> Vec<u64> {
        let mut x = x;
        (0..self.m)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    fn pack(&self, digits: &[u64]) -> FElt {
        digits
            .iter()
            .rev()
            .fold(0, |acc, &d| acc * self.p + (d % self.p))
    }

    /// Addition.
    pub fn add(&self, x: FElt, y: FElt) -> FElt {
        let (a, b) = (self.digits(x), self.digits(y));
        let sum: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.pack(&sum)
    }

    /// Negation.
    pub fn neg(&self, x: FElt) -> FElt {
        let a = self.digits(x);
        let neg: Vec<u64> = a.iter().map(|&u| (self.p - u) % self.p).collect();
        self.pack(&neg)
    }

    /// Subtraction.
    pub fn sub(&self, x: FElt, y: FElt) -> FElt {
        self.add(x, self.neg(y))
    }

    /// Multiplication modulo the field modulus.
    pub fn mul(&self, x: FElt, y: FElt) -> FElt {
        let (a, b) = (self.digits(x), self.digits(y));
        let mut prod = vec![0u64; 2 * self.m];
        for (i, &u) in a.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        self.reduce(&mut prod);
        self.pack(&prod[..self.m])
    }

    fn reduce(&self, poly: &mut [u64]) {
        // The modulus is monic, so x^m = -(lower part of modulus).
        for i in (self.m..poly.len()).rev() {
            let c = poly[i];
            if c == 0 {
                continue;
            }
            poly[i] = 0;
            for (j, &mj) in self.modulus.iter().enumerate().take(self.m) {
                let idx = i - self.m + j;
                poly[idx] = (poly[idx] + c * ((self.p - mj) % self.p)) % self.p;
            }
        }
    }

    /// Scalar multiple by an integer.
    pub fn int_mul(&self, n: i64, x: FElt) -> FElt {
        self.mul(self.from_int(n), x)
    }

    /// Exponentiation by squaring.
    pub fn pow(&self, x: FElt, e: u64) -> FElt {
        let mut base = x;
        let mut e = e;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, x: FElt) -> FElt {
        assert!(x != 0, "inverse of zero");
        self.pow(x, self.order() - 2)
    }

    /// The multiplicative order of a nonzero element.
    pub fn mult_order(&self, x: FElt) -> u64 {
        assert!(x != 0, "order of zero");
        let mut acc = x;
        let mut k = 1;
        while acc != self.one() {
            acc = self.mul(acc, x);
            k += 1;
        }
        k
    }

    /// A fixed generator of the multiplicative group: the smallest element in
    /// the packed order whose multiplicative order is `p^m - 1`.
    pub fn generator(&self) -> FElt {
        let target = self.order() - 1;
        (2..self.order())
            .find(|&x| self.mult_order(x) == target)
            .expect("multiplicative group of a finite field is cyclic")
    }

    /// Discrete log base [`Gf::generator`], by direct scan.
    pub fn dlog(&self, x: FElt) -> u64 {
        assert!(x != 0, "discrete log of zero");
        let g = self.generator();
        let mut acc = self.one();
        for k in 0.. {
            if acc == x {
                return k;
            }
            acc = self.mul(acc, g);
        }
        unreachable!()
    }

    /// Evaluates a polynomial with `F_p` coefficients (low to high) at `x`.
    pub fn eval_prime_poly(&self, coeffs: &[u64], x: FElt) -> FElt {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), c % self.p);
        }
        acc
    }

    /// The Frobenius `x -> x^p`.
    pub fn frobenius(&self, x: FElt) -> FElt {
        self.pow(x, self.p)
    }
}

/// Lexicographically first monic irreducible polynomial of degree `m` over
/// `F_p`, coefficients low to high.
fn first_irreducible(p: u64, m: usize) -> Vec<u64> {
    let mut count: u64 = 1;
    for _ in 0..m {
        count *= p;
    }
    for code in 0..count {
        let mut coeffs: Vec<u64> = Vec::with_capacity(m + 1);
        let mut c = code;
        for _ in 0..m {
            coeffs.push(c % p);
            c /= p;
        }
        coeffs.push(1);
        if poly_is_irreducible(p, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

fn poly_is_irreducible(p: u64, poly: &[u64]) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    // No roots, then no monic factors of degree 2..deg/2 by trial division.
    for x in 0..p {
        let mut acc = 0u64;
        for &c in poly.iter().rev() {
            acc = (acc * x + c) % p;
        }
        if acc == 0 {
            return false;
        }
    }
    for d in 2..=deg / 2 {
        let mut count: u64 = 1;
        for _ in 0..d {
            count *= p;
        }
        for code in 0..count {
            let mut div: Vec<u64> = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                div.push(c % p);
                c /= p;
            }
            div.push(1);
            if poly_divides(p, &div, poly) {
                return false;
            }
        }
    }
    true
}

fn poly_divides(p: u64, div: &[u64], poly: &[u64]) -> bool {
    let mut rem: Vec<u64> = poly.to_vec();
    let d = div.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap() % p;
        let k = rem.len() - 1 - d;
        if lead != 0 {
            for (j, &c) in div.iter().enumerate() {
                rem[k + j] = (rem[k + j] + (p - c % p) * lead) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}

/// An embedding `F_{p^m} -> F_{p^{km}}`, stored as an image table.
#[derive(Debug, Clone)]
pub struct FieldEmbedding {
    map: Vec<FElt>,
}

impl FieldEmbedding {
    /// Computes the embedding determined by the first root (in packed order)
    /// of the small field's modulus inside the big field. Panics unless both
    /// fields share the characteristic and the degrees divide.
    pub fn new(small: &Gf, big: &Gf) -> FieldEmbedding {
        assert_eq!(small.p, big.p, "characteristic mismatch");
        assert_eq!(big.m % small.m, 0, "degree must divide");
        let root = big
            .elements()
            .find(|&x| big.eval_prime_poly(&small.modulus, x) == 0)
            .expect("splitting field contains a root of the modulus");
        let map = (0..small.order())
            .map(|x| {
                let digits = small.digits(x);
                let mut acc = big.zero();
                for &d in digits.iter().rev() {
                    acc = big.add(big.mul(acc, root), d);
                }
                acc
            })
            .collect();
        FieldEmbedding { map }
    }

    /// Image of an element of the small field.
    pub fn embed(&self, x: FElt) -> FElt {
        self.map[x as usize]
    }
}

/// Dense matrix over a finite field; entries packed, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GfMat {
    /// Number of rows.
    pub rows: usize,
    /// Number of columns.
    pub cols: usize,
    /// Packed entries.
    pub a: Vec<FElt>,
}

impl GfMat {
    /// Builds from explicit rows.
    pub fn from_rows(rows: &[Vec<FElt>]) -> GfMat {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        GfMat {
            rows: r,
            cols: c,
            a: rows.concat(),
        }
    }

    /// Identity of size `n`.
    pub fn identity(f: &Gf, n: usize) -> GfMat {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = f.one();
        }
        GfMat { rows: n, cols: n, a }
    }

    /// Entry accessor.
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> FElt {
        self.a[r * self.cols + c]
    }

    /// Matrix product.
    pub fn mul(&self, f: &Gf, rhs: &GfMat) -> GfMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = GfMat {
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
                    let t = f.mul(v, rhs.at(k, c));
                    out.a[r * rhs.cols + c] = f.add(out.a[r * rhs.cols + c], t);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, f: &Gf, v: &[FElt]) -> Vec<FElt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(f.zero(), |acc, c| f.add(acc, f.mul(self.at(r, c), v[c])))
            })
            .collect()
    }

    /// Reduction of an integer matrix into the field.
    pub fn from_imat(f: &Gf, m: &crate::exact::IMat) -> GfMat {
        GfMat {
            rows: m.rows,
            cols: m.cols,
            a: m.a.iter().map(|&x| f.from_int(x)).collect(),
        }
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self, f: &Gf) -> FElt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| m.at(r, col) != 0) else {
                return f.zero();
            };
            if p != col {
                for c in 0..n {
                    m.a.swap(col * n + c, p * n + c);
                }
                det = f.neg(det);
            }
            det = f.mul(det, m.at(col, col));
            let inv = f.inv(m.at(col, col));
            for r in col + 1..n {
                if m.at(r, col) == 0 {
                    continue;
                }
                let factor = f.mul(m.at(r, col), inv);
                for c in col..n {
                    let t = f.mul(factor, m.at(col, c));
                    m.a[r * n + c] = f.sub(m.at(r, c), t);
                }
            }
        }
        det
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self, f: &Gf) -> usize {
        let mut m = self.clone();
        let (nr, nc) = (m.rows, m.cols);
        let mut rank = 0;
        for col in 0..nc {
            if rank == nr {
                break;
            }
            if let Some(p) = (rank..nr).find(|&r| m.at(r, col) != 0) {
                for c in 0..nc {
                    m.a.swap(rank * nc + c, p * nc + c);
                }
                let inv = f.inv(m.at(rank, col));
                for c in 0..nc {
                    m.a[rank * nc + c] = f.mul(m.at(rank, c), inv);
                }
                for r in 0..nr {
                    if r != rank && m.at(r, col) != 0 {
                        let factor = m.at(r, col);
                        for c in 0..nc {
                            let t = f.mul(factor, m.at(rank, c));
                            m.a[r * nc + c] = f.sub(m.at(r, c), t);
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// Solves `M x = b`; `None` when inconsistent. Free variables are set to
    /// zero so the solution is canonical.
    pub fn solve(&self, f: &Gf, b: &[FElt]) -> Option<Vec<FElt>> {
        assert_eq!(self.rows, b.len(), "dimension mismatch");
        let (nr, nc) = (self.rows, self.cols);
        let width = nc + 1;
        let mut m: Vec<FElt> = Vec::with_capacity(nr * width);
        for r in 0..nr {
            m.extend((0..nc).map(|c| self.at(r, c)));
            m.push(b[r]);
        }
        let mut pivot_of_col = vec![None; nc];
        let mut rank = 0;
        for col in 0..nc {
            if rank == nr {
                break;
            }
            if let Some(p) = (rank..nr).find(|&r| m[r * width + col] != 0) {
                for c in 0..width {
                    m.swap(rank * width + c, p * width + c);
                }
                let inv = f.inv(m[rank * width + col]);
                for c in 0..width {
                    m[rank * width + c] = f.mul(m[rank * width + c], inv);
                }
                for r in 0..nr {
                    if r != rank && m[r * width + col] != 0 {
                        let factor = m[r * width + col];
                        for c in 0..width {
                            let t = f.mul(factor, m[rank * width + c]);
                            m[r * width + c] = f.sub(m[r * width + c], t);
                        }
                    }
                }
                pivot_of_col[col] = Some(rank);
                rank += 1;
            }
        }
        for r in rank..nr {
            if m[r * width + nc] != 0 {
                return None;
            }
        }
        let mut x = vec![f.zero(); nc];
        for (col, piv) in pivot_of_col.iter().enumerate() {
            if let Some(r) = piv {
                x[col] = m[r * width + nc];
            }
        }
        Some(x)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self, f: &Gf) -> Option<GfMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let width = 2 * n;
        let mut m: Vec<FElt> = Vec::with_capacity(n * width);
        for r in 0..n {
            m.extend((0..n).map(|c| self.at(r, c)));
            m.extend((0..n).map(|c| if c == r { f.one() } else { f.zero() }));
        }
        for col in 0..n {
            let p = (col..n).find(|&r| m[r * width + col] != 0)?;
            for c in 0..width {
                m.swap(col * width + c, p * width + c);
            }
            let inv = f.inv(m[col * width + col]);
            for c in 0..width {
                m[col * width + c] = f.mul(m[col * width + c], inv);
            }
            for r in 0..n {
                if r != col && m[r * width + col] != 0 {
                    let factor = m[r * width + col];
                    for c in 0..width {
                        let t = f.mul(factor, m[col * width + c]);
                        m[r * width + c] = f.sub(m[r * width + c], t);
                    }
                }
            }
        }
        let mut a = Vec::with_capacity(n * n);
        for r in 0..n {
            a.extend((n..width).map(|c| m[r * width + c]));
        }
        Some(GfMat { rows: n, cols: n, a })
    }

    /// Transpose.
    pub fn transpose(&self) -> GfMat {
        let mut out = GfMat {
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
}
