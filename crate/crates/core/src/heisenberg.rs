//! Symplectic spaces over prime fields, the attached Heisenberg p-groups,
//! their irreducible representations with prescribed central character, and
//! extensions of those representations to finite symplectic subgroups.
//!
//! A symplectic space carries an alternating nondegenerate form `beta` over
//! F_p with p odd. The Heisenberg group on the space has elements `(w, k)`
//! with `w` in the space and `k` an additive exponent mod p; the center is
//! materialized as p-th roots of unity only inside representations. The
//! canonical representation is induced from the character `(w, k) -> zeta^k`
//! of the abelian subgroup spanned by one half of a polarization and the
//! center, and is realized concretely on the coset space, identified with
//! functions on the other half. Every operator is monomial: a permutation
//! of the coset basis with p-th roots of unity as entries.
//!
//! A symplectic matrix `s` acts on the group by `s.(w, k) = (sw, k)`. The
//! extension of the representation along a generated subgroup of symplectic
//! matrices is computed by averaging (Schur projection) to get an
//! intertwiner per matrix, normalizing by Gauss sums to make it unitary,
//! and then repairing the scalar defect by solving the coboundary equation
//! on the multiplication table. The result is certified: covariance and
//! multiplicativity are asserted exactly before anything is returned.

use crate::cyclo::{Cyc, CycMat};
use crate::fp::{FElt, FieldError, Gf, GfMat};
use crate::groups::{GroupError, GroupTable, LinearRep};
use num::rational::BigRational;
use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Errors from symplectic-space validation, group construction, and the
/// extension computation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeisenbergError {
    /// The characteristic is 2; the group law needs an inverse of 2.
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    /// The field is a proper extension; the space must live over F_p.
    #[error("expected a prime field, got degree {m} over characteristic {p}")]
    NotPrimeField {
        /// Characteristic of the offending field.
        p: u64,
        /// Extension degree of the offending field.
        m: usize,
    },
    /// The form matrix is not square.
    #[error("form matrix is {rows}x{cols}, expected square")]
    NotSquare {
        /// Row count supplied.
        rows: usize,
        /// Column count supplied.
        cols: usize,
    },
    /// A matrix entry is not a reduced residue of the field.
    #[error("matrix entry {0} is not a residue in the field")]
    EntryOutsideField(u64),
    /// The form has a nonzero diagonal entry or is not skew-symmetric.
    #[error("form is not alternating")]
    NotAlternating,
    /// The form is singular.
    #[error("form is degenerate")]
    DegenerateForm,
    /// The claimed polarization fails isotropy or complementarity.
    #[error("not a polarization: {0}")]
    NotAPolarization(String),
    /// Generator at the given index does not preserve the form.
    #[error("generator {0} does not preserve the symplectic form")]
    NotSymplectic(usize),
    /// The scalar defect could not be repaired within the configured search.
    #[error("cocycle not trivializable: {0}")]
    CocycleNotTrivializable(String),
    /// Group-table construction failed.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Field construction failed.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An alternating nondegenerate form on F_p^{2n}, p odd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticSpaceFp {
    gf: Gf,
    dim: usize,
    form: GfMat,
}

impl SymplecticSpaceFp {
    /// Validates the form and builds the space.
    pub fn new(gf: Gf, form: GfMat) -> Result<SymplecticSpaceFp, HeisenbergError> {
        if gf.m != 1 {
            return Err(HeisenbergError::NotPrimeField { p: gf.p, m: gf.m });
        }
        if gf.p == 2 {
            return Err(HeisenbergError::EvenCharacteristic);
        }
        if form.rows != form.cols {
            return Err(HeisenbergError::NotSquare {
                rows: form.rows,
                cols: form.cols,
            });
        }
        if let Some(&bad) = form.a.iter().find(|&&x| x >= gf.order()) {
            return Err(HeisenbergError::EntryOutsideField(bad));
        }
        let dim = form.rows;
        for r in 0..dim {
            if form.at(r, r) != gf.zero() {
                return Err(HeisenbergError::NotAlternating);
            }
            for c in 0..dim {
                if form.at(r, c) != gf.neg(form.at(c, r)) {
                    return Err(HeisenbergError::NotAlternating);
                }
            }
        }
        if form.rank(&gf) != dim {
            return Err(HeisenbergError::DegenerateForm);
        }
        Ok(SymplecticSpaceFp { gf, dim, form })
    }

    /// The standard space of dimension `2n`: `beta(e_i, e_{n+i}) = 1` and all
    /// other basis pairings zero.
    pub fn standard(p: u64, n: usize) -> Result<SymplecticSpaceFp, HeisenbergError> {
        let gf = Gf::new(p, 1)?;
        let dim = 2 * n;
        let mut rows = vec![vec![gf.zero(); dim]; dim];
        for i in 0..n {
            rows[i][n + i] = gf.one();
            rows[n + i][i] = gf.from_int(-1);
        }
        SymplecticSpaceFp::new(gf, GfMat::from_rows(&rows))
    }

    /// The underlying prime field.
    pub fn gf(&self) -> &Gf {
        &self.gf
    }

    /// The characteristic.
    pub fn p(&self) -> u64 {
        self.gf.p
    }

    /// Dimension `2n` of the space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The form matrix.
    pub fn form(&self) -> &GfMat {
        &self.form
    }

    /// The residue `(p+1)/2`, the inverse of 2 mod p.
    pub fn half(&self) -> FElt {
        (self.gf.p + 1) / 2
    }

    /// Evaluates the form: `u^T J v`.
    pub fn beta(&self, u: &[FElt], v: &[FElt]) -> FElt {
        assert_eq!(u.len(), self.dim, "vector length mismatch");
        let jv = self.form.mul_vec(&self.gf, v);
        u.iter()
            .zip(&jv)
            .fold(self.gf.zero(), |acc, (&a, &b)| {
                self.gf.add(acc, self.gf.mul(a, b))
            })
    }
}

/// A Heisenberg group element: a vector of the space and an additive
/// central exponent mod p.
pub type HeisenbergElement = (Vec<FElt>, u64);

/// The group law `(w1,k1)(w2,k2) = (w1+w2, k1+k2+((p+1)/2) beta(w1,w2))`.
pub fn heisenberg_mul(
    space: &SymplecticSpaceFp,
    a: &HeisenbergElement,
    b: &HeisenbergElement,
) -> HeisenbergElement {
    let f = space.gf();
    let w: Vec<FElt> = a.0.iter().zip(&b.0).map(|(&x, &y)| f.add(x, y)).collect();
    let twist = f.mul(space.half(), space.beta(&a.0, &b.0));
    (w, f.add(f.add(a.1, b.1), twist))
}

/// The inverse `(w,k)^{-1} = (-w,-k)`.
pub fn heisenberg_inv(space: &SymplecticSpaceFp, a: &HeisenbergElement) -> HeisenbergElement {
    let f = space.gf();
    (a.0.iter().map(|&x| f.neg(x)).collect(), f.neg(a.1))
}

/// Builds the full multiplication table of the Heisenberg group on the
/// space, of order p^{2n+1}, together with its elements in discovery order.
pub fn heisenberg_group(
    space: &SymplecticSpaceFp,
    max_elements: usize,
) -> Result<(GroupTable, Vec<HeisenbergElement>), GroupError> {
    let d = space.dim();
    let mut gens: Vec<HeisenbergElement> = (0..d)
        .map(|i| {
            let mut w = vec![space.gf().zero(); d];
            w[i] = space.gf().one();
            (w, 0)
        })
        .collect();
    gens.push((vec![space.gf().zero(); d], 1));
    GroupTable::from_mul_closure(
        (vec![space.gf().zero(); d], 0),
        &gens,
        |a, b| heisenberg_mul(space, a, b),
        max_elements,
    )
}

/// A splitting of the space into two complementary totally isotropic
/// halves, each given by a basis of n vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polarization {
    /// Basis of the half on which the inducing character is trivial.
    pub plus: Vec<Vec<FElt>>,
    /// Basis of the half that indexes the representation space.
    pub minus: Vec<Vec<FElt>>,
}

impl Polarization {
    /// The standard polarization of [`SymplecticSpaceFp::standard`]: the
    /// first n basis vectors against the last n.
    pub fn standard(space: &SymplecticSpaceFp) -> Polarization {
        let n = space.dim() / 2;
        let unit = |i: usize| {
            let mut v = vec![space.gf().zero(); space.dim()];
            v[i] = space.gf().one();
            v
        };
        Polarization {
            plus: (0..n).map(unit).collect(),
            minus: (n..2 * n).map(unit).collect(),
        }
    }
}

/// One monomial operator: basis column `y` is sent to row `dest[y]` with
/// entry `zeta_p^{phase[y]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialOp {
    /// Image basis index per column.
    pub dest: Vec<usize>,
    /// Exponent of the p-th root of unity per column.
    pub phase: Vec<u64>,
}

/// The representation of the Heisenberg group induced from the character
/// `(w,k) -> zeta^k` of the subgroup spanned by the plus half and the
/// center, realized on the coset space indexed by the minus half.
///
/// Basis vectors are indexed by coefficient vectors over the minus basis,
/// packed base p with the first coefficient least significant. The center
/// `(0,1)` acts as `zeta_p` times the identity and the dimension is `p^n`.
#[derive(Debug, Clone)]
pub struct HeisenbergRep {
    space: SymplecticSpaceFp,
    polarization: Polarization,
    dim: usize,
    basis_inverse: GfMat,
}

/// Validates the polarization and builds the representation.
pub fn build_heisenberg_rep(
    space: SymplecticSpaceFp,
    polarization: Polarization,
) -> Result<HeisenbergRep, HeisenbergError> {
    let d = space.dim();
    let n = d / 2;
    for (name, half) in [("plus", &polarization.plus), ("minus", &polarization.minus)] {
        if half.len() != n {
            return Err(HeisenbergError::NotAPolarization(format!(
                "the {name} half has {} vectors, expected {n}",
                half.len()
            )));
        }
        for v in half {
            if v.len() != d {
                return Err(HeisenbergError::NotAPolarization(format!(
                    "a vector in the {name} half has length {}, expected {d}",
                    v.len()
                )));
            }
            if let Some(&bad) = v.iter().find(|&&x| x >= space.gf().order()) {
                return Err(HeisenbergError::EntryOutsideField(bad));
            }
        }
        for a in half {
            for b in half {
                if space.beta(a, b) != space.gf().zero() {
                    return Err(HeisenbergError::NotAPolarization(format!(
                        "the {name} half is not totally isotropic"
                    )));
                }
            }
        }
    }
    let mut rows = vec![vec![space.gf().zero(); d]; d];
    for (j, v) in polarization.plus.iter().chain(&polarization.minus).enumerate() {
        for (i, &x) in v.iter().enumerate() {
            rows[i][j] = x;
        }
    }
    let basis = GfMat::from_rows(&rows);
    let basis_inverse = basis.inverse(space.gf()).ok_or_else(|| {
        HeisenbergError::NotAPolarization("the two halves do not span the space".into())
    })?;
    let dim = (space.p() as usize).pow(n as u32);
    Ok(HeisenbergRep {
        space,
        polarization,
        dim,
        basis_inverse,
    })
}

impl HeisenbergRep {
    /// The underlying space.
    pub fn space(&self) -> &SymplecticSpaceFp {
        &self.space
    }

    /// The polarization the model was built on.
    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    /// Dimension `p^n` of the representation space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Splits `w` into its plus part, its minus part, and the coefficient
    /// vector of the minus part over the minus basis.
    fn split(&self, w: &[FElt]) -> (Vec<FElt>, Vec<FElt>, Vec<FElt>) {
        let f = self.space.gf();
        let d = self.space.dim();
        let n = d / 2;
        assert_eq!(w.len(), d, "vector length mismatch");
        let coords = self.basis_inverse.mul_vec(f, w);
        let mut plus = vec![f.zero(); d];
        for (j, v) in self.polarization.plus.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                plus[i] = f.add(plus[i], f.mul(coords[j], x));
            }
        }
        let minus: Vec<FElt> = w.iter().zip(&plus).map(|(&a, &b)| f.sub(a, b)).collect();
        (plus, minus, coords[n..].to_vec())
    }

    /// The monomial data of the operator of `(w, k)`.
    pub fn monomial(&self, w: &[FElt], k: u64) -> MonomialOp {
        let f = self.space.gf();
        let p = self.space.p();
        let n = self.space.dim() / 2;
        let (w_plus, w_minus, m_coords) = self.split(w);
        let base = f.sub(k % p, f.mul(self.space.half(), self.space.beta(&w_minus, &w_plus)));
        let pairings: Vec<FElt> = self
            .polarization
            .minus
            .iter()
            .map(|v| self.space.beta(&w_plus, v))
            .collect();
        let mut dest = Vec::with_capacity(self.dim);
        let mut phase = Vec::with_capacity(self.dim);
        let mut digits = vec![0u64; n];
        for _ in 0..self.dim {
            let mut e = base;
            let mut target = 0usize;
            let mut weight = 1usize;
            for i in 0..n {
                e = f.add(e, f.mul(digits[i], pairings[i]));
                target += ((digits[i] + m_coords[i]) % p) as usize * weight;
                weight *= p as usize;
            }
            dest.push(target);
            phase.push(e);
            for i in 0..n {
                digits[i] += 1;
                if digits[i] < p {
                    break;
                }
                digits[i] = 0;
            }
        }
        MonomialOp { dest, phase }
    }

    /// The operator of `(w, k)` as an explicit matrix over Q(zeta_p).
    pub fn operator(&self, w: &[FElt], k: u64) -> CycMat {
        let p = self.space.p() as u32;
        let m = self.monomial(w, k);
        let mut out = CycMat::zero(self.dim, self.dim, p);
        for y in 0..self.dim {
            *out.at_mut(m.dest[y], y) = Cyc::zeta(p, m.phase[y] as i64);
        }
        out
    }

    /// The representation as explicit matrices parallel to an element list.
    pub fn linear_rep(&self, elements: &[HeisenbergElement]) -> LinearRep {
        LinearRep {
            dim: self.dim,
            images: elements.iter().map(|(w, k)| self.operator(w, *k)).collect(),
        }
    }
}

/// How the scalar correction of the extension was pinned down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftSelection {
    /// The coboundary equation had a single solution.
    Unique,
    /// Several solutions existed; requiring determinant-one images selected
    /// exactly one.
    DetSelected,
    /// The determinant condition did not single one out; the
    /// lexicographically smallest exponent assignment was taken.
    CanonicalLift,
}

/// A certified extension of a Heisenberg representation to a generated
/// subgroup of symplectic matrices.
#[derive(Debug, Clone)]
pub struct WeilExtension {
    /// Multiplication table of the generated matrix subgroup.
    pub table: GroupTable,
    /// The subgroup elements in discovery order.
    pub elements: Vec<GfMat>,
    /// The extension as one matrix per subgroup element.
    pub rep: LinearRep,
    /// Exponent of the scalar correction per element: the image is the
    /// normalized intertwiner times `zeta_N^{exponent}`.
    pub scalar_exponents: Vec<u64>,
    /// The modulus N of the scalar corrections.
    pub modulus: u64,
    /// How the correction was selected.
    pub selection: LiftSelection,
}

fn all_vectors(p: u64, d: usize) -> Vec<Vec<FElt>> {
    let mut out = Vec::with_capacity((p as usize).pow(d as u32));
    let mut v = vec![0u64; d];
    loop {
        out.push(v.clone());
        let mut i = 0;
        while i < d {
            v[i] += 1;
            if v[i] < p {
                break;
            }
            v[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    out
}

fn first_nonzero(m: &CycMat) -> Option<(usize, usize)> {
    for r in 0..m.rows {
        for c in 0..m.cols {
            if !m.at(r, c).is_zero() {
                return Some((r, c));
            }
        }
    }
    None
}

/// The averaged intertwiner between the representation twisted by `s` and
/// the representation itself, scaled so its first nonzero entry is 1.
///
/// Averages `tau(s.h) X tau(h)^{-1}` over coset representatives `(w, 0)`;
/// central factors cancel between the two sides, so the coset average
/// intertwines exactly like the full-group average. The matrix unit `X` is
/// scanned in index order until the average is nonzero, which must happen
/// because the intertwiner space is one-dimensional and spanned this way.
fn averaged_intertwiner(rep: &HeisenbergRep, s: &GfMat) -> CycMat {
    struct Term {
        left: MonomialOp,
        // Per row index of the right factor: the unique column hitting it
        // and the phase of that column.
        source: Vec<usize>,
        source_phase: Vec<u64>,
    }
    let f = rep.space().gf();
    let p = rep.space().p();
    let dim = rep.dim();
    let terms: Vec<Term> = all_vectors(p, rep.space().dim())
        .into_iter()
        .map(|w| {
            let sw = s.mul_vec(f, &w);
            let neg: Vec<FElt> = w.iter().map(|&x| f.neg(x)).collect();
            let left = rep.monomial(&sw, 0);
            let right = rep.monomial(&neg, 0);
            let mut source = vec![0usize; dim];
            let mut source_phase = vec![0u64; dim];
            for (y, &r) in right.dest.iter().enumerate() {
                source[r] = y;
                source_phase[r] = right.phase[y];
            }
            Term {
                left,
                source,
                source_phase,
            }
        })
        .collect();
    for u in 0..dim {
        for v in 0..dim {
            let mut counts = vec![vec![0u64; p as usize]; dim * dim];
            for t in &terms {
                let y = t.source[v];
                let e = (t.left.phase[u] + t.source_phase[v]) % p;
                counts[t.left.dest[u] * dim + y][e as usize] += 1;
            }
            let mut mat = CycMat::zero(dim, dim, p as u32);
            let mut any = false;
            for (idx, row) in counts.iter().enumerate() {
                let mut entry = Cyc::zero(p as u32);
                for (e, &cnt) in row.iter().enumerate() {
                    if cnt > 0 {
                        entry = entry.add(
                            &Cyc::zeta(p as u32, e as i64)
                                .scale(&BigRational::from_integer(BigInt::from(cnt))),
                        );
                    }
                }
                if !entry.is_zero() {
                    any = true;
                }
                mat.a[idx] = entry;
            }
            if !any {
                continue;
            }
            let (i0, j0) = first_nonzero(&mat).expect("a nonzero matrix has a nonzero entry");
            let scale = mat.at(i0, j0).inv();
            return mat.scale_cyc(&scale);
        }
    }
    unreachable!("averaging over the group produces a nonzero intertwiner for some matrix unit")
}

fn p_power_exponent(value: &BigRational, p: u64) -> Option<i64> {
    fn log_exact(mut x: BigInt, p: u64) -> Option<i64> {
        let pb = BigInt::from(p);
        let mut e = 0i64;
        while (&x % &pb).is_zero() {
            x /= &pb;
            e += 1;
        }
        (x == BigInt::from(1)).then_some(e)
    }
    if value <= &BigRational::zero() {
        return None;
    }
    let num = log_exact(value.numer().clone(), p)?;
    let den = log_exact(value.denom().clone(), p)?;
    Some(num - den)
}

fn cyc_pow(base: &Cyc, e: u32) -> Cyc {
    let mut acc = Cyc::one(base.level());
    for _ in 0..e {
        acc = acc.mul(base);
    }
    acc
}

/// The scalar ratio between `bs * bt` and `bst`, asserted to be a genuine
/// scalar by full entrywise comparison.
fn defect(bs: &CycMat, bt: &CycMat, bst: &CycMat) -> Cyc {
    let prod = bs.mul(bt);
    let (i0, j0) = first_nonzero(bst).expect("normalized intertwiner is nonzero");
    let c = prod.at(i0, j0).mul(&bst.at(i0, j0).inv());
    assert!(
        prod.eq_value(&bst.scale_cyc(&c)),
        "product of intertwiners is not a scalar multiple of the intertwiner of the product"
    );
    c
}

type Expression = (Vec<u64>, u64);

/// Assigns each subgroup element a linear expression for its scalar
/// exponent in terms of the generator exponents, by walking a spanning
/// tree of the closure graph. `reversed` walks generators in opposite
/// order from the other end of the queue, producing an independent tree.
fn propagate_expressions(
    table: &GroupTable,
    gen_idx: &[usize],
    gamma: &[Vec<u64>],
    modulus: u64,
    reversed: bool,
) -> Vec<Expression> {
    let k = gen_idx.len();
    let mut expr: Vec<Option<Expression>> = vec![None; table.order];
    expr[0] = Some((vec![0; k], 0));
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = if reversed {
        queue.pop_back()
    } else {
        queue.pop_front()
    } {
        let (cu, bu) = expr[u].clone().expect("queued elements have expressions");
        let order: Vec<usize> = if reversed {
            (0..k).rev().collect()
        } else {
            (0..k).collect()
        };
        for j in order {
            let v = table.mul(u, gen_idx[j]);
            if expr[v].is_none() {
                let mut cv = cu.clone();
                cv[j] = (cv[j] + 1) % modulus;
                expr[v] = Some((cv, (bu + gamma[u][j]) % modulus));
                queue.push_back(v);
            }
        }
    }
    expr.into_iter()
        .map(|e| e.expect("right multiplication by generators reaches the whole closure"))
        .collect()
}

/// All generator-exponent tuples solving the coboundary constraints, in
/// lexicographic order.
fn solve_coboundary(
    table: &GroupTable,
    gen_idx: &[usize],
    gamma: &[Vec<u64>],
    modulus: u64,
    expr: &[Expression],
) -> Result<Vec<Vec<u64>>, HeisenbergError> {
    let k = gen_idx.len();
    let mut rows: Vec<Expression> = Vec::new();
    for s in 0..table.order {
        for j in 0..k {
            let st = table.mul(s, gen_idx[j]);
            let mut coeff: Vec<u64> = (0..k)
                .map(|t| (expr[s].0[t] + modulus - expr[st].0[t]) % modulus)
                .collect();
            coeff[j] = (coeff[j] + 1) % modulus;
            let cst = (expr[s].1 + gamma[s][j] + modulus - expr[st].1) % modulus;
            rows.push((coeff, cst));
        }
    }
    rows.sort_unstable();
    rows.dedup();
    let total = (modulus as u128).checked_pow(k as u32).filter(|&t| t <= 1_000_000);
    let Some(total) = total else {
        return Err(HeisenbergError::CocycleNotTrivializable(format!(
            "scalar search space {modulus}^{k} exceeds the configured bound"
        )));
    };
    let mut solutions = Vec::new();
    for t in 0..total {
        let mut tuple = vec![0u64; k];
        let mut rem = t;
        for j in (0..k).rev() {
            tuple[j] = (rem % modulus as u128) as u64;
            rem /= modulus as u128;
        }
        let ok = rows.iter().all(|(coeff, cst)| {
            let mut acc = *cst;
            for (c, x) in coeff.iter().zip(&tuple) {
                acc = (acc + c * x) % modulus;
            }
            acc == 0
        });
        if ok {
            solutions.push(tuple);
            if solutions.len() > 100_000 {
                return Err(HeisenbergError::CocycleNotTrivializable(
                    "trivialization ambiguity exceeds the configured bound".into(),
                ));
            }
        }
    }
    if solutions.is_empty() {
        return Err(HeisenbergError::CocycleNotTrivializable(
            "no scalar correction satisfies the coboundary equation".into(),
        ));
    }
    Ok(solutions)
}

fn is_perfect(table: &GroupTable) -> bool {
    let mut seen = vec![false; table.order];
    let mut commutators = Vec::new();
    for a in 0..table.order {
        for b in 0..table.order {
            let c = table.mul(
                table.mul(a, b),
                table.mul(table.inv(a), table.inv(b)),
            );
            if !seen[c] {
                seen[c] = true;
                commutators.push(c);
            }
        }
    }
    table.subgroup_closure(&commutators).len() == table.order
}

/// Extends the Heisenberg representation to the subgroup generated by the
/// given symplectic matrices.
///
/// Per the construction contract: every returned image `omega(s)` is
/// unitary, satisfies the covariance `omega(s) tau(w,k) = tau(sw,k)
/// omega(s)` exactly, and the images multiply according to the subgroup
/// table. Scalar corrections live in the group of N-th roots of unity with
/// N the least common multiple of p and the subgroup exponent. When the
/// correction is not unique the determinant-one condition is applied, and
/// any remaining tie is broken by the smallest exponent assignment; the
/// selection path is reported.
pub fn weil_extend(
    rep: &HeisenbergRep,
    generators: &[GfMat],
    max_elements: usize,
) -> Result<WeilExtension, HeisenbergError> {
    let space = rep.space();
    let f = space.gf().clone();
    let d = space.dim();
    for (i, s) in generators.iter().enumerate() {
        if s.rows != d || s.cols != d {
            return Err(HeisenbergError::NotSymplectic(i));
        }
        if let Some(&bad) = s.a.iter().find(|&&x| x >= f.order()) {
            return Err(HeisenbergError::EntryOutsideField(bad));
        }
        let pulled = s.transpose().mul(&f, space.form()).mul(&f, s);
        if pulled != *space.form() {
            return Err(HeisenbergError::NotSymplectic(i));
        }
    }
    let (table, elements) = GroupTable::from_mul_closure(
        GfMat::identity(&f, d),
        generators,
        |a, b| a.mul(&f, b),
        max_elements,
    )?;
    let order = table.order;
    let p = space.p();
    let modulus = num::integer::lcm(p, table.exponent());
    let level = u32::try_from(modulus).expect("scalar modulus fits a matrix level");

    let gauss = Cyc::gauss_sum(p);
    let gauss_inv = gauss.inv();
    let mut b_mats = Vec::with_capacity(order);
    for s in &elements {
        let a = averaged_intertwiner(rep, s);
        let norm = a
            .mul(&a.conj_transpose())
            .as_scalar()
            .expect("an intertwiner of an irreducible representation composes to a scalar")
            .as_rational()
            .expect("the scalar is rational");
        let e = p_power_exponent(&norm, p)
            .expect("the intertwiner norm is a power of the characteristic");
        let factor = if e >= 0 {
            cyc_pow(&gauss_inv, e as u32)
        } else {
            cyc_pow(&gauss, (-e) as u32)
        };
        let b = a.scale_cyc(&factor);
        assert!(
            b.mul(&b.conj_transpose())
                .eq_value(&CycMat::identity(rep.dim(), 1)),
            "normalized intertwiner is unitary"
        );
        b_mats.push(b);
    }
    let det_b: Vec<Cyc> = b_mats.iter().map(CycMat::det).collect();
    for det in &det_b {
        det.root_of_unity_order(2 * level)
            .expect("determinant of a normalized intertwiner is a root of unity");
    }

    let gen_idx: Vec<usize> = generators
        .iter()
        .map(|g| {
            elements
                .iter()
                .position(|e| e == g)
                .expect("generators appear in their closure")
        })
        .collect();
    let k = gen_idx.len();
    let mut gamma = vec![vec![0u64; k]; order];
    for s in 0..order {
        for (j, &gj) in gen_idx.iter().enumerate() {
            let st = table.mul(s, gj);
            let c = defect(&b_mats[s], &b_mats[gj], &b_mats[st]);
            let e = c.as_zeta_power(level).ok_or_else(|| {
                HeisenbergError::CocycleNotTrivializable(format!(
                    "a pair defect has order not dividing {modulus}"
                ))
            })?;
            gamma[s][j] = e as u64;
        }
    }

    let expr = propagate_expressions(&table, &gen_idx, &gamma, modulus, false);
    let solutions = solve_coboundary(&table, &gen_idx, &gamma, modulus, &expr)?;
    let expr_alt = propagate_expressions(&table, &gen_idx, &gamma, modulus, true);
    let solutions_alt = solve_coboundary(&table, &gen_idx, &gamma, modulus, &expr_alt)?;
    assert_eq!(
        solutions, solutions_alt,
        "trivialization is independent of the propagation order"
    );
    if is_perfect(&table) {
        assert_eq!(
            solutions.len(),
            1,
            "trivialized cocycle of a perfect subgroup is unique"
        );
    }

    let exponents_of = |tuple: &[u64]| -> Vec<u64> {
        (0..order)
            .map(|s| {
                let mut acc = expr[s].1;
                for (c, x) in expr[s].0.iter().zip(tuple) {
                    acc = (acc + c * x) % modulus;
                }
                acc
            })
            .collect()
    };
    let one = Cyc::one(1);
    let det_one = |xs: &[u64]| -> bool {
        (0..order).all(|s| {
            let e = (rep.dim() as u64 % modulus) * xs[s] % modulus;
            Cyc::zeta(level, e as i64).mul(&det_b[s]).eq_value(&one)
        })
    };
    let all_exponents: Vec<Vec<u64>> = solutions.iter().map(|t| exponents_of(t)).collect();
    let passing: Vec<usize> = (0..solutions.len())
        .filter(|&i| det_one(&all_exponents[i]))
        .collect();
    let (chosen, selection) = if solutions.len() == 1 {
        (0, LiftSelection::Unique)
    } else if passing.len() == 1 {
        (passing[0], LiftSelection::DetSelected)
    } else if passing.is_empty() {
        (0, LiftSelection::CanonicalLift)
    } else {
        (passing[0], LiftSelection::CanonicalLift)
    };
    let scalar_exponents = all_exponents[chosen].clone();

    let images: Vec<CycMat> = b_mats
        .iter()
        .zip(&scalar_exponents)
        .map(|(b, &x)| b.scale_cyc(&Cyc::zeta(level, x as i64)))
        .collect();

    let mut h_gens: Vec<HeisenbergElement> = (0..d)
        .map(|i| {
            let mut w = vec![f.zero(); d];
            w[i] = f.one();
            (w, 0)
        })
        .collect();
    h_gens.push((vec![f.zero(); d], 1));
    for (i, s) in elements.iter().enumerate() {
        for (w, kk) in &h_gens {
            let tau = rep.operator(w, *kk);
            let moved = rep.operator(&s.mul_vec(&f, w), *kk);
            assert!(
                b_mats[i].mul(&tau).eq_value(&moved.mul(&b_mats[i])),
                "covariance fails on a group generator"
            );
        }
    }
    // Scalar corrections cancel in conjugation, so covariance of the
    // normalized intertwiners is covariance of the returned images.
    // Multiplicativity: with the defect relation asserted entrywise, the
    // image relation reduces to an exponent identity mod N. Products
    // against generators propagate to all pairs along the closure, so the
    // generator columns of gamma already certify the full table; the
    // remaining pairs are checked directly when the table is small.
    for s in 0..order {
        for (j, &gj) in gen_idx.iter().enumerate() {
            let st = table.mul(s, gj);
            assert_eq!(
                (scalar_exponents[s] + scalar_exponents[gj] + gamma[s][j]) % modulus,
                scalar_exponents[st],
                "scalar correction fails the coboundary equation"
            );
        }
    }
    if order * order <= 10_000 {
        for s in 0..order {
            for t in 0..order {
                let st = table.mul(s, t);
                let c = defect(&b_mats[s], &b_mats[t], &b_mats[st]);
                let e = c
                    .as_zeta_power(level)
                    .expect("pair defect is a root of unity of order dividing N")
                    as u64;
                assert_eq!(
                    (scalar_exponents[s] + scalar_exponents[t] + e) % modulus,
                    scalar_exponents[st],
                    "images fail multiplicativity on the full table"
                );
            }
        }
    }

    Ok(WeilExtension {
        table,
        elements,
        rep: LinearRep {
            dim: rep.dim(),
            images,
        },
        scalar_exponents,
        modulus,
        selection,
    })
}
