//! Brute-force verification of the distinction identity for cuspidal
//! characters of small matrix groups, plus the averaged induced-character
//! formula.
//!
//! The substrate is a fully enumerated matrix group (GL2 over a small odd
//! field, or a block-diagonal product of two such groups). Cuspidal
//! characters are built from parameters on the nonsplit torus and
//! certified internally: correct degree, self-pairing one, and vanishing
//! unipotent averages. Involutions of the group act by conjugation; for
//! each conjugation orbit and each cuspidal parameter the two sides of
//! the distinction identity are computed exactly and compared: the left
//! side counts invariant linear forms under a fixed-point subgroup, the
//! right side sums index-weighted sign-character pairings over the
//! suborbits of the torus action.

use crate::cyclo::{Cyc, CycMat};
use crate::fp::{FElt, FieldError, Gf, GfMat};
use crate::groups::{character_pairing, induce_rep, GroupError, GroupTable, LinearRep};
use num::rational::BigRational;
use num::ToPrimitive;
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

/// Errors from group construction and the distinction computations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistinctionError {
    /// The requested group order exceeds the enumeration bound.
    #[error("group of order {order} exceeds the bound {bound}")]
    TooLarge {
        /// The order the construction would produce.
        order: u64,
        /// The configured bound.
        bound: usize,
    },
    /// The field size is not an odd prime power.
    #[error("{0} is not an odd prime power")]
    NotAnOddPrimePower(u64),
    /// The torus character parameter is fixed by the field symmetry.
    #[error("parameter {k} is not in general position")]
    NotGeneralPosition {
        /// The offending parameter.
        k: u64,
    },
    /// The provided data does not define an order-two automorphism.
    #[error("not an involution: {0}")]
    NotAnInvolution(String),
    /// The involution does not map the given subgroup onto itself.
    #[error("the involution does not preserve the subgroup")]
    ThetaDoesNotPreserveL,
    /// The involution does not act on the stored matrix algebra.
    #[error("the involution does not preserve the matrix algebra")]
    ThetaDoesNotPreserveAlgebra,
    /// The provided values are not multiplicative on the subgroup.
    #[error("the provided values do not form a character of the subgroup")]
    NotACharacter,
    /// A function to induce is nonzero outside the inducing subgroup.
    #[error("the function is supported outside the subgroup at index {index}")]
    SupportNotInK {
        /// An element index outside the subgroup with a nonzero value.
        index: usize,
    },
    /// The two sides of the distinction identity disagree, or one of the
    /// certified intermediate quantities is malformed.
    #[error("distinction identity check failed: {0}")]
    TheoremViolation(String),
    /// Propagated group-theory error.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Propagated field error.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A fully enumerated matrix group with its multiplication table, class
/// partition, and the matrix algebra its adjoint action lives on.
#[derive(Debug, Clone)]
pub struct FiniteGroupTable {
    /// Dense multiplication table and derived group structure.
    pub table: GroupTable,
    /// Element matrices, index-aligned with the table.
    pub elements: Vec<GfMat>,
    /// The coefficient field.
    pub field: Gf,
    /// Indices of the generators the enumeration was built from.
    pub generators: Vec<usize>,
    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Class id of each element.
    pub class_of: Vec<usize>,
    /// Basis of the matrix algebra the group acts on by conjugation.
    pub algebra_basis: Vec<GfMat>,
    index: HashMap<GfMat, usize>,
}

impl FiniteGroupTable {
    /// Number of elements.
    pub fn order(&self) -> usize {
        self.table.order
    }

    /// Index of a matrix, if it belongs to the group.
    pub fn index_of(&self, m: &GfMat) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Side length of the element matrices.
    pub fn matrix_size(&self) -> usize {
        self.elements[0].rows
    }

    fn from_generators(
        field: Gf,
        generator_matrices: Vec<GfMat>,
        expected_order: u64,
        max_elements: usize,
        algebra_basis: Vec<GfMat>,
    ) -> Result<FiniteGroupTable, DistinctionError> {
        if expected_order > max_elements as u64 {
            return Err(DistinctionError::TooLarge {
                order: expected_order,
                bound: max_elements,
            });
        }
        let n = generator_matrices[0].rows;
        let f = field.clone();
        let (table, elements) = GroupTable::from_mul_closure(
            GfMat::identity(&field, n),
            &generator_matrices,
            |a, b| a.mul(&f, b),
            expected_order as usize,
        )?;
        assert_eq!(
            elements.len() as u64,
            expected_order,
            "the generators enumerate the whole group"
        );
        let index: HashMap<GfMat, usize> =
            elements.iter().cloned().zip(0..elements.len()).collect();
        let generators = generator_matrices
            .iter()
            .map(|m| index[m])
            .collect::<Vec<_>>();
        let classes = table.conjugacy_classes();
        let mut class_of = vec![0usize; elements.len()];
        for (id, class) in classes.iter().enumerate() {
            for &i in class {
                class_of[i] = id;
            }
        }
        Ok(FiniteGroupTable {
            table,
            elements,
            field,
            generators,
            classes,
            class_of,
            algebra_basis,
            index,
        })
    }
}

fn factor_prime_power(q: u64) -> Option<(u64, usize)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if p * p > q {
        return Some((q, 1));
    }
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    if rest == 1 { Some((p, m)) } else { None }
}

/// Enumerates the group of invertible 2x2 matrices over the field with
/// `q` elements, with its full multiplication table.
pub fn build_group_gl2(q: u64, max_elements: usize) -> Result<FiniteGroupTable, DistinctionError> {
    let (p, m) = factor_prime_power(q).ok_or(DistinctionError::NotAnOddPrimePower(q))?;
    if p == 2 {
        return Err(DistinctionError::NotAnOddPrimePower(q));
    }
    let order = (q * q - 1) * (q * q - q);
    if order > max_elements as u64 {
        return Err(DistinctionError::TooLarge {
            order,
            bound: max_elements,
        });
    }
    let field = Gf::new(p, m)?;
    let gamma = field.generator();
    let gens = vec![
        GfMat::from_rows(&[vec![1, 1], vec![0, 1]]),
        GfMat::from_rows(&[vec![1, 0], vec![1, 1]]),
        GfMat::from_rows(&[vec![gamma, 0], vec![0, 1]]),
    ];
    let mut algebra_basis = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            let mut rows = vec![vec![0u64; 2]; 2];
            rows[r][c] = 1;
            algebra_basis.push(GfMat::from_rows(&rows));
        }
    }
    FiniteGroupTable::from_generators(field, gens, order, max_elements, algebra_basis)
}

fn embed_block(f: &Gf, total: usize, offset: usize, m: &GfMat) -> GfMat {
    let mut out = GfMat::identity(f, total);
    for r in 0..m.rows {
        for c in 0..m.cols {
            out.a[(offset + r) * total + (offset + c)] = m.at(r, c);
        }
    }
    out
}

fn embed_block_zero(f: &Gf, total: usize, offset: usize, m: &GfMat) -> GfMat {
    let mut out = GfMat::from_rows(&vec![vec![f.zero(); total]; total]);
    for r in 0..m.rows {
        for c in 0..m.cols {
            out.a[(offset + r) * total + (offset + c)] = m.at(r, c);
        }
    }
    out
}

/// Enumerates the direct product of two enumerated groups over the same
/// field, realized as block-diagonal matrices.
pub fn build_product_group(
    a: &FiniteGroupTable,
    b: &FiniteGroupTable,
    max_elements: usize,
) -> Result<FiniteGroupTable, DistinctionError> {
    if a.field.p != b.field.p || a.field.m != b.field.m {
        return Err(DistinctionError::Group(GroupError::GroupMismatch));
    }
    let f = a.field.clone();
    let na = a.matrix_size();
    let nb = b.matrix_size();
    let total = na + nb;
    let order = a.order() as u64 * b.order() as u64;
    let mut gens = Vec::new();
    for &gi in &a.generators {
        gens.push(embed_block(&f, total, 0, &a.elements[gi]));
    }
    for &gi in &b.generators {
        gens.push(embed_block(&f, total, na, &b.elements[gi]));
    }
    let mut algebra_basis = Vec::new();
    for mat in &a.algebra_basis {
        algebra_basis.push(embed_block_zero(&f, total, 0, mat));
    }
    for mat in &b.algebra_basis {
        algebra_basis.push(embed_block_zero(&f, total, na, mat));
    }
    FiniteGroupTable::from_generators(f, gens, order, max_elements, algebra_basis)
}

/// A function on the group determined by its value on each element and
/// constant on conjugacy classes.
#[derive(Debug, Clone)]
pub struct ClassFunction {
    /// Value at each element index.
    pub values: Vec<Cyc>,
}

impl ClassFunction {
    /// Checks constancy on the conjugacy classes of the group.
    pub fn is_constant_on_classes(&self, g: &FiniteGroupTable) -> bool {
        g.classes.iter().all(|class| {
            class
                .iter()
                .all(|&i| self.values[i].eq_value(&self.values[class[0]]))
        })
    }
}

/// The nonsplit torus of the 2x2 group: the unit group of the quadratic
/// field extension acting on itself, realized through a companion matrix.
#[derive(Debug, Clone)]
pub struct EllipticTorus {
    /// Member indices in power order: `members[j]` is the `j`-th power of
    /// the chosen generator.
    pub members: Vec<usize>,
    /// Order of the torus, one less than the square of the field size.
    pub modulus: u64,
    log: HashMap<usize, u64>,
    char_poly_log: HashMap<(FElt, FElt), u64>,
}

impl EllipticTorus {
    /// Discrete logarithm of a member with respect to the generator.
    pub fn log(&self, index: usize) -> Option<u64> {
        self.log.get(&index).copied()
    }

    /// Logarithm of a torus element with the given trace and determinant.
    pub fn log_by_char_poly(&self, trace: FElt, det: FElt) -> Option<u64> {
        self.char_poly_log.get(&(trace, det)).copied()
    }

    /// Value at a member of the character sending the generator to the
    /// `k`-th power of the root of unity of torus order.
    pub fn character_value(&self, k: u64, index: usize) -> Option<Cyc> {
        self.log(index)
            .map(|j| Cyc::zeta(self.modulus as u32, (j * k % self.modulus) as i64))
    }
}

/// Finds the nonsplit torus of an enumerated 2x2 matrix group.
pub fn elliptic_torus(g: &FiniteGroupTable) -> Result<EllipticTorus, DistinctionError> {
    assert_eq!(g.matrix_size(), 2, "the nonsplit torus lives in a 2x2 group");
    let f = &g.field;
    let q = f.order();
    let mut companion = None;
    'outer: for s in f.elements() {
        for n in f.elements() {
            if n == f.zero() {
                continue;
            }
            let has_root = f
                .elements()
                .any(|a| f.add(f.sub(f.mul(a, a), f.mul(s, a)), n) == f.zero());
            if !has_root {
                companion = Some((s, n));
                break 'outer;
            }
        }
    }
    let (s, n) = companion.expect("an odd field admits an irreducible quadratic");
    let mut candidate_indices = Vec::new();
    for a in f.elements() {
        for b in f.elements() {
            if a == f.zero() && b == f.zero() {
                continue;
            }
            let mat = GfMat::from_rows(&[
                vec![a, f.mul(b, f.neg(n))],
                vec![b, f.add(a, f.mul(b, s))],
            ]);
            let idx = g
                .index_of(&mat)
                .expect("a nonzero combination of the identity and the companion is invertible");
            candidate_indices.push(idx);
        }
    }
    let modulus = q * q - 1;
    assert_eq!(candidate_indices.len() as u64, modulus);
    let generator = candidate_indices
        .iter()
        .copied()
        .find(|&i| g.table.element_order(i) == modulus)
        .expect("the unit group of a field extension is cyclic");
    let mut members = Vec::with_capacity(modulus as usize);
    let mut log = HashMap::new();
    let mut char_poly_log = HashMap::new();
    let mut current = g.table.identity();
    for j in 0..modulus {
        members.push(current);
        log.insert(current, j);
        let mat = &g.elements[current];
        let trace = f.add(mat.at(0, 0), mat.at(1, 1));
        let det = mat.det(f);
        char_poly_log.entry((trace, det)).or_insert(j);
        current = g.table.mul(current, generator);
    }
    assert_eq!(current, g.table.identity());
    Ok(EllipticTorus {
        members,
        modulus,
        log,
        char_poly_log,
    })
}

/// Canonical list of general-position torus parameters, one per orbit of
/// the field symmetry `k -> qk`.
pub fn cuspidal_parameters(q: u64) -> Vec<u64> {
    let modulus = q * q - 1;
    (1..modulus)
        .filter(|k| (q - 1) * k % modulus != 0)
        .filter(|&k| k < q * k % modulus)
        .collect()
}

/// The cuspidal character of the 2x2 group attached to a general-position
/// torus parameter, certified for degree, irreducibility, and vanishing
/// unipotent averages.
pub fn cuspidal_character(
    g: &FiniteGroupTable,
    torus: &EllipticTorus,
    k: u64,
) -> Result<ClassFunction, DistinctionError> {
    let f = &g.field;
    let q = f.order();
    let modulus = torus.modulus;
    if k % modulus == 0 || (q - 1) * k % modulus == 0 {
        return Err(DistinctionError::NotGeneralPosition { k });
    }
    let level = modulus as u32;
    let squares: HashSet<FElt> = f
        .elements()
        .filter(|&x| x != f.zero())
        .map(|x| f.mul(x, x))
        .collect();
    let half = f.inv(f.from_int(2));
    let phi = |j: u64| Cyc::zeta(level, (j * k % modulus) as i64);
    let degree = Cyc::from_int(q as i64 - 1);
    let mut values = vec![Cyc::zero(level); g.order()];
    for class in &g.classes {
        let rep = class[0];
        let mat = &g.elements[rep];
        let trace = f.add(mat.at(0, 0), mat.at(1, 1));
        let det = mat.det(f);
        let scalar = mat.at(0, 1) == f.zero()
            && mat.at(1, 0) == f.zero()
            && mat.at(0, 0) == mat.at(1, 1);
        let disc = f.sub(f.mul(trace, trace), f.int_mul(4, det));
        let value = if scalar {
            let j = torus.log(rep).expect("scalar matrices lie in the torus");
            degree.mul(&phi(j))
        } else if disc == f.zero() {
            let lambda = f.mul(trace, half);
            let scalar_mat = GfMat::from_rows(&[vec![lambda, 0], vec![0, lambda]]);
            let idx = g.index_of(&scalar_mat).expect("scalar matrix in the group");
            let j = torus.log(idx).expect("scalar matrices lie in the torus");
            phi(j).neg()
        } else if squares.contains(&disc) {
            Cyc::zero(level)
        } else {
            let j = torus
                .log_by_char_poly(trace, det)
                .expect("an irreducible characteristic polynomial matches a torus element");
            phi(j).add(&phi(j * q % modulus)).neg()
        };
        for &i in class {
            values[i] = value.clone();
        }
    }
    assert!(
        values[g.table.identity()].eq_value(&degree),
        "the character has degree one less than the field size"
    );
    let self_pairing = character_pairing(&g.table, &values, &values)?;
    assert!(
        self_pairing.eq_value(&Cyc::one(1)),
        "the character is irreducible"
    );
    let mut unipotents = Vec::new();
    for b in f.elements() {
        let mat = GfMat::from_rows(&[vec![f.one(), b], vec![f.zero(), f.one()]]);
        unipotents.push(g.index_of(&mat).expect("unipotent matrices lie in the group"));
    }
    for x in 0..g.order() {
        let mut sum = Cyc::zero(level);
        for &u in &unipotents {
            sum = sum.add(&values[g.table.mul(x, u)]);
        }
        assert!(sum.is_zero(), "unipotent averages vanish");
    }
    Ok(ClassFunction { values })
}

/// An order-two automorphism given by the data that defines it: either
/// conjugation by a stored matrix, or the composite of transpose-inverse
/// with such a conjugation. The stored matrix may lie outside the group
/// as long as the action preserves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Involution {
    /// Conjugation by the stored matrix.
    Inner {
        /// The conjugating matrix.
        t: GfMat,
    },
    /// `g` goes to the conjugate of the inverse transpose of `g` by the
    /// stored twist.
    TransposeInverse {
        /// The twisting matrix.
        twist: GfMat,
    },
}

/// An involution resolved against a group: the defining data together
/// with its action as a permutation of element indices.
#[derive(Debug, Clone)]
pub struct InvolutionData {
    /// The defining data.
    pub involution: Involution,
    /// Image index of each element index.
    pub table: Vec<usize>,
}

fn involution_table(
    g: &FiniteGroupTable,
    involution: &Involution,
) -> Result<Vec<usize>, DistinctionError> {
    let f = &g.field;
    let mut out = Vec::with_capacity(g.order());
    match involution {
        Involution::Inner { t } => {
            let t_inv = t
                .inverse(f)
                .ok_or_else(|| DistinctionError::NotAnInvolution("matrix not invertible".into()))?;
            for m in &g.elements {
                let image = t.mul(f, m).mul(f, &t_inv);
                let idx = g.index_of(&image).ok_or_else(|| {
                    DistinctionError::NotAnInvolution("the action leaves the group".into())
                })?;
                out.push(idx);
            }
        }
        Involution::TransposeInverse { twist } => {
            let t_inv = twist
                .inverse(f)
                .ok_or_else(|| DistinctionError::NotAnInvolution("twist not invertible".into()))?;
            for i in 0..g.order() {
                let inv_t = g.elements[g.table.inv(i)].transpose();
                let image = twist.mul(f, &inv_t).mul(f, &t_inv);
                let idx = g.index_of(&image).ok_or_else(|| {
                    DistinctionError::NotAnInvolution("the action leaves the group".into())
                })?;
                out.push(idx);
            }
        }
    }
    Ok(out)
}

/// Resolves defining data to a validated order-two automorphism.
pub fn resolve_involution(
    g: &FiniteGroupTable,
    involution: &Involution,
) -> Result<InvolutionData, DistinctionError> {
    let table = involution_table(g, involution)?;
    if (0..g.order()).all(|i| table[i] == i) {
        return Err(DistinctionError::NotAnInvolution(
            "the action is the identity".into(),
        ));
    }
    if (0..g.order()).any(|i| table[table[i]] != i) {
        return Err(DistinctionError::NotAnInvolution(
            "the action does not square to the identity".into(),
        ));
    }
    for &s in &g.generators {
        for x in 0..g.order() {
            if table[g.table.mul(s, x)] != g.table.mul(table[s], table[x]) {
                return Err(DistinctionError::NotAnInvolution(
                    "the action is not an automorphism".into(),
                ));
            }
        }
    }
    Ok(InvolutionData {
        involution: involution.clone(),
        table,
    })
}

fn conjugate_table(g: &FiniteGroupTable, table: &[usize], by: usize) -> Vec<usize> {
    let by_inv = g.table.inv(by);
    (0..g.order())
        .map(|x| {
            let pulled = g.table.mul(g.table.mul(by_inv, x), by);
            g.table.mul(g.table.mul(by, table[pulled]), by_inv)
        })
        .collect()
}

fn conjugate_involution(g: &FiniteGroupTable, theta: &InvolutionData, by: usize) -> InvolutionData {
    let f = &g.field;
    let b = &g.elements[by];
    let involution = match &theta.involution {
        Involution::Inner { t } => Involution::Inner {
            t: b.mul(f, t).mul(f, &b.inverse(f).expect("group elements are invertible")),
        },
        Involution::TransposeInverse { twist } => Involution::TransposeInverse {
            twist: b.mul(f, twist).mul(f, &b.transpose()),
        },
    };
    InvolutionData {
        involution,
        table: conjugate_table(g, &theta.table, by),
    }
}

/// Element indices fixed by the involution.
pub fn fixed_points(g: &FiniteGroupTable, theta: &InvolutionData) -> Vec<usize> {
    (0..g.order()).filter(|&i| theta.table[i] == i).collect()
}

/// Element indices whose conjugation action fixes the involution.
pub fn stabilizer(g: &FiniteGroupTable, theta: &InvolutionData) -> Vec<usize> {
    let mut out = Vec::new();
    for by in 0..g.order() {
        let by_inv = g.table.inv(by);
        let agrees = (0..g.order()).all(|x| {
            let pulled = g.table.mul(g.table.mul(by_inv, x), by);
            g.table.mul(g.table.mul(by, theta.table[pulled]), by_inv) == theta.table[x]
        });
        if agrees {
            out.push(by);
        }
    }
    out
}

/// Candidate involutions from the standard symmetric pairs: conjugation
/// by every element that squares into the center without being central,
/// and transpose-inverse twisted by symmetric and antisymmetric matrices.
/// Every returned entry has been validated against the group.
pub fn default_involution_seeds(g: &FiniteGroupTable) -> Vec<Involution> {
    let f = &g.field;
    let center: HashSet<usize> = (0..g.order())
        .filter(|&i| {
            g.generators
                .iter()
                .all(|&s| g.table.mul(i, s) == g.table.mul(s, i))
        })
        .collect();
    let mut seeds = Vec::new();
    for i in 0..g.order() {
        if center.contains(&i) {
            continue;
        }
        if center.contains(&g.table.mul(i, i)) {
            seeds.push(Involution::Inner {
                t: g.elements[i].clone(),
            });
        }
    }
    let minus_one = f.neg(f.one());
    for m in &g.elements {
        let t = m.transpose();
        let symmetric = t == *m;
        let antisymmetric = (0..m.rows)
            .all(|r| (0..m.cols).all(|c| t.at(r, c) == f.mul(minus_one, m.at(r, c))));
        if symmetric || antisymmetric {
            seeds.push(Involution::TransposeInverse { twist: m.clone() });
        }
    }
    seeds
        .into_iter()
        .filter(|s| resolve_involution(g, s).is_ok())
        .collect()
}

/// A conjugation orbit of involutions, members in discovery order.
#[derive(Debug, Clone)]
pub struct InvolutionOrbit {
    /// The involutions in the orbit.
    pub members: Vec<InvolutionData>,
}

/// Partitions the closure of the seeds under conjugation into orbits.
pub fn involution_orbits(
    g: &FiniteGroupTable,
    seeds: &[Involution],
) -> Result<Vec<InvolutionOrbit>, DistinctionError> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut orbits = Vec::new();
    for seed in seeds {
        let data = resolve_involution(g, seed)?;
        if seen.contains(&data.table) {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(data.table.clone());
        queue.push_back(data);
        while let Some(current) = queue.pop_front() {
            for &by in &g.generators {
                let next = conjugate_involution(g, &current, by);
                if !seen.contains(&next.table) {
                    seen.insert(next.table.clone());
                    queue.push_back(next);
                }
            }
            members.push(current);
        }
        orbits.push(InvolutionOrbit { members });
    }
    Ok(orbits)
}

/// The sign character of an involution on the fixed points of a subgroup:
/// the determinant of the adjoint action on the fixed subalgebra.
#[derive(Debug, Clone)]
pub struct EpsilonCharacter {
    /// Fixed subgroup members the character is defined on, ascending.
    pub domain: Vec<usize>,
    /// Character values, each 1 or -1, aligned with the domain.
    pub values: Vec<i64>,
}

fn kernel_basis(f: &Gf, m: &GfMat) -> Vec<Vec<FElt>> {
    let rows = m.rows;
    let cols = m.cols;
    let mut a: Vec<Vec<FElt>> = (0..rows)
        .map(|r| (0..cols).map(|c| m.at(r, c)).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pivot_row = (r..rows).find(|&i| a[i][c] != f.zero());
        let Some(pivot_row) = pivot_row else { continue };
        a.swap(r, pivot_row);
        let scale = f.inv(a[r][c]);
        for x in &mut a[r] {
            *x = f.mul(*x, scale);
        }
        for i in 0..rows {
            if i != r && a[i][c] != f.zero() {
                let factor = a[i][c];
                for cc in 0..cols {
                    a[i][cc] = f.sub(a[i][cc], f.mul(factor, a[r][cc]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivot_set.contains(c)) {
        let mut v = vec![f.zero(); cols];
        v[free] = f.one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(a[row][free]);
        }
        basis.push(v);
    }
    basis
}

fn flatten(m: &GfMat) -> Vec<FElt> {
    m.a.clone()
}

struct AlgebraCoords {
    basis_mat: GfMat,
    dim: usize,
}

impl AlgebraCoords {
    fn new(g: &FiniteGroupTable) -> AlgebraCoords {
        let n2 = g.matrix_size() * g.matrix_size();
        let dim = g.algebra_basis.len();
        let rows: Vec<Vec<FElt>> = (0..n2)
            .map(|r| (0..dim).map(|c| g.algebra_basis[c].a[r]).collect())
            .collect();
        AlgebraCoords {
            basis_mat: GfMat::from_rows(&rows),
            dim,
        }
    }

    fn coords(&self, f: &Gf, m: &GfMat) -> Option<Vec<FElt>> {
        let x = self.basis_mat.solve(f, &flatten(m))?;
        let check = self.basis_mat.mul_vec(f, &x);
        if check == flatten(m) { Some(x) } else { None }
    }
}

fn negate_matrix(f: &Gf, m: &GfMat) -> GfMat {
    let rows: Vec<Vec<FElt>> = (0..m.rows)
        .map(|r| (0..m.cols).map(|c| f.neg(m.at(r, c))).collect())
        .collect();
    GfMat::from_rows(&rows)
}

fn lie_action(
    f: &Gf,
    involution: &Involution,
    m: &GfMat,
) -> Result<GfMat, DistinctionError> {
    match involution {
        Involution::Inner { t } => {
            let t_inv = t
                .inverse(f)
                .ok_or_else(|| DistinctionError::NotAnInvolution("matrix not invertible".into()))?;
            Ok(t.mul(f, m).mul(f, &t_inv))
        }
        Involution::TransposeInverse { twist } => {
            let t_inv = twist
                .inverse(f)
                .ok_or_else(|| DistinctionError::NotAnInvolution("twist not invertible".into()))?;
            Ok(negate_matrix(f, &twist.mul(f, &m.transpose()).mul(f, &t_inv)))
        }
    }
}

/// Computes the sign character of an involution on the theta-fixed part
/// of a subgroup, as the determinant of the adjoint action on the fixed
/// subalgebra.
pub fn epsilon_character(
    g: &FiniteGroupTable,
    theta: &InvolutionData,
    subgroup: &[usize],
) -> Result<EpsilonCharacter, DistinctionError> {
    let f = &g.field;
    let mut image: Vec<usize> = subgroup.iter().map(|&i| theta.table[i]).collect();
    image.sort_unstable();
    let mut sorted: Vec<usize> = subgroup.to_vec();
    sorted.sort_unstable();
    if image != sorted {
        return Err(DistinctionError::ThetaDoesNotPreserveL);
    }
    let coords = AlgebraCoords::new(g);
    let mut d_columns = Vec::with_capacity(coords.dim);
    for basis in &g.algebra_basis {
        let moved = lie_action(f, &theta.involution, basis)?;
        let col = coords
            .coords(f, &moved)
            .ok_or(DistinctionError::ThetaDoesNotPreserveAlgebra)?;
        d_columns.push(col);
    }
    let d_minus_one_rows: Vec<Vec<FElt>> = (0..coords.dim)
        .map(|r| {
            (0..coords.dim)
                .map(|c| {
                    let shift = if r == c { f.one() } else { f.zero() };
                    f.sub(d_columns[c][r], shift)
                })
                .collect()
        })
        .collect();
    let fixed_basis = kernel_basis(f, &GfMat::from_rows(&d_minus_one_rows));
    let fixed_dim = fixed_basis.len();
    let fixed_rows: Vec<Vec<FElt>> = (0..coords.dim)
        .map(|r| (0..fixed_dim).map(|c| fixed_basis[c][r]).collect())
        .collect();
    let fixed_mat = GfMat::from_rows(&fixed_rows);
    let mut domain: Vec<usize> = sorted
        .iter()
        .copied()
        .filter(|&i| theta.table[i] == i)
        .collect();
    domain.dedup();
    let mut values = Vec::with_capacity(domain.len());
    for &h in &domain {
        let hm = &g.elements[h];
        let hm_inv = hm.inverse(f).expect("group elements are invertible");
        let mut restricted_cols = Vec::with_capacity(fixed_dim);
        for v in &fixed_basis {
            let mut mat = GfMat::from_rows(&vec![
                vec![f.zero(); g.matrix_size()];
                g.matrix_size()
            ]);
            for (j, &cj) in v.iter().enumerate() {
                if cj != f.zero() {
                    for (pos, &entry) in g.algebra_basis[j].a.iter().enumerate() {
                        mat.a[pos] = f.add(mat.a[pos], f.mul(cj, entry));
                    }
                }
            }
            let moved = hm.mul(f, &mat).mul(f, &hm_inv);
            let moved_coords = coords
                .coords(f, &moved)
                .expect("the adjoint action preserves the algebra");
            let restricted = fixed_mat
                .solve(f, &moved_coords)
                .expect("the adjoint action of a fixed point preserves the fixed subalgebra");
            assert_eq!(
                fixed_mat.mul_vec(f, &restricted),
                moved_coords,
                "the restriction is exact"
            );
            restricted_cols.push(restricted);
        }
        let restricted_rows: Vec<Vec<FElt>> = (0..fixed_dim)
            .map(|r| (0..fixed_dim).map(|c| restricted_cols[c][r]).collect())
            .collect();
        let det = GfMat::from_rows(&restricted_rows).det(f);
        let value = if det == f.one() {
            1
        } else if det == f.neg(f.one()) {
            -1
        } else {
            panic!("the adjoint determinant on the fixed subalgebra is a sign");
        };
        values.push(value);
    }
    Ok(EpsilonCharacter { domain, values })
}

/// Contribution of one torus suborbit to the right side of the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitContribution {
    /// Number of involutions in the suborbit.
    pub size: usize,
    /// Index of the stabilizer over the product of the fixed subgroup
    /// with the torus part of the stabilizer.
    pub m_l: u64,
    /// Multiplicity of the sign character in the torus character on the
    /// fixed part, 0 or 1.
    pub pairing: u64,
    /// Whether the suborbit contributes: the involution preserves the
    /// torus and the pairing is nonzero.
    pub selected: bool,
}

/// Both sides of the distinction identity with the per-suborbit data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    /// Averaged character sum over the fixed subgroup.
    pub lhs: u64,
    /// Weighted sum of sign-character pairings over torus suborbits.
    pub rhs: u64,
    /// One entry per torus suborbit of the involution orbit.
    pub orbits: Vec<OrbitContribution>,
}

fn cyc_to_count(c: &Cyc, context: &str) -> Result<u64, DistinctionError> {
    let rational = c.as_rational().ok_or_else(|| {
        DistinctionError::TheoremViolation(format!("{context} is not rational"))
    })?;
    if !rational.is_integer() {
        return Err(DistinctionError::TheoremViolation(format!(
            "{context} is not an integer: {rational}"
        )));
    }
    rational
        .to_integer()
        .to_u64()
        .ok_or_else(|| DistinctionError::TheoremViolation(format!("{context} is negative")))
}

/// Computes and compares both sides of the distinction identity for one
/// involution orbit, a subgroup playing the torus role, a character of
/// it, and the character of the associated representation.
pub fn theorem_sides(
    g: &FiniteGroupTable,
    orbit: &InvolutionOrbit,
    l_members: &[usize],
    rho_values: &[Cyc],
    chi: &ClassFunction,
) -> Result<TheoremReport, DistinctionError> {
    if rho_values.len() != l_members.len() || chi.values.len() != g.order() {
        return Err(DistinctionError::Group(GroupError::GroupMismatch));
    }
    if !g.table.is_subgroup(l_members) {
        return Err(DistinctionError::Group(GroupError::NotASubgroup));
    }
    let rho: HashMap<usize, Cyc> = l_members
        .iter()
        .copied()
        .zip(rho_values.iter().cloned())
        .collect();
    for &a in l_members {
        for &b in l_members {
            let product = g.table.mul(a, b);
            if !rho[&product].eq_value(&rho[&a].mul(&rho[&b])) {
                return Err(DistinctionError::NotACharacter);
            }
        }
    }

    let mut lhs = None;
    for member in &orbit.members {
        let fixed = fixed_points(g, member);
        let mut sum = Cyc::zero(1);
        for &i in &fixed {
            sum = sum.add(&chi.values[i]);
        }
        let average = sum.scale(&BigRational::new(1.into(), (fixed.len() as i64).into()));
        let value = cyc_to_count(&average, "the averaged character sum")?;
        match lhs {
            None => lhs = Some(value),
            Some(prev) => {
                if prev != value {
                    return Err(DistinctionError::TheoremViolation(format!(
                        "the averaged character sum depends on the orbit member: {prev} vs {value}"
                    )));
                }
            }
        }
    }
    let lhs = lhs.expect("an orbit has at least one member");

    let mut assigned = vec![false; orbit.members.len()];
    let table_index: HashMap<&[usize], usize> = orbit
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| (m.table.as_slice(), i))
        .collect();
    let mut contributions = Vec::new();
    let mut rhs = 0u64;
    for start in 0..orbit.members.len() {
        if assigned[start] {
            continue;
        }
        let mut suborbit = Vec::new();
        let mut queue = VecDeque::new();
        assigned[start] = true;
        queue.push_back(start);
        while let Some(current) = queue.pop_front() {
            suborbit.push(current);
            for &l in l_members {
                let moved = conjugate_table(g, &orbit.members[current].table, l);
                let target = *table_index
                    .get(moved.as_slice())
                    .expect("the torus action stays inside the orbit");
                if !assigned[target] {
                    assigned[target] = true;
                    queue.push_back(target);
                }
            }
        }
        let representative = &orbit.members[suborbit[0]];
        let fixed: HashSet<usize> = fixed_points(g, representative).into_iter().collect();
        let stab = stabilizer(g, representative);
        let stab_in_l: Vec<usize> = stab
            .iter()
            .copied()
            .filter(|i| l_members.contains(i))
            .collect();
        let mut product_set = HashSet::new();
        for &a in &fixed {
            for &b in &stab_in_l {
                product_set.insert(g.table.mul(a, b));
            }
        }
        if stab.len() % product_set.len() != 0 {
            return Err(DistinctionError::TheoremViolation(
                "the stabilizer index is not an integer".into(),
            ));
        }
        let m_l = (stab.len() / product_set.len()) as u64;
        let preserves = {
            let mut image: Vec<usize> = l_members
                .iter()
                .map(|&i| representative.table[i])
                .collect();
            image.sort_unstable();
            let mut sorted = l_members.to_vec();
            sorted.sort_unstable();
            image == sorted
        };
        let pairing = if preserves {
            let epsilon = epsilon_character(g, representative, l_members)?;
            let mut sum = Cyc::zero(1);
            for (&h, &sign) in epsilon.domain.iter().zip(&epsilon.values) {
                let term = rho[&h].scale(&BigRational::from_integer(sign.into()));
                sum = sum.add(&term);
            }
            let average = sum.scale(&BigRational::new(
                1.into(),
                (epsilon.domain.len() as i64).into(),
            ));
            let value = cyc_to_count(&average, "the sign-character pairing")?;
            if value > 1 {
                return Err(DistinctionError::TheoremViolation(format!(
                    "the sign-character pairing of one-dimensional characters is {value}"
                )));
            }
            value
        } else {
            0
        };
        let selected = preserves && pairing == 1;
        if selected {
            rhs += m_l * pairing;
        }
        contributions.push(OrbitContribution {
            size: suborbit.len(),
            m_l,
            pairing,
            selected,
        });
    }

    if lhs != rhs {
        return Err(DistinctionError::TheoremViolation(format!(
            "sides disagree: lhs {lhs}, rhs {rhs}, contributions {contributions:?}"
        )));
    }
    Ok(TheoremReport {
        lhs,
        rhs,
        orbits: contributions,
    })
}

/// The distinction identity for a cuspidal parameter on the nonsplit
/// torus of a 2x2 group: builds the character and the torus character,
/// then compares both sides.
pub fn theorem_sides_cuspidal(
    g: &FiniteGroupTable,
    orbit: &InvolutionOrbit,
    torus: &EllipticTorus,
    k: u64,
) -> Result<TheoremReport, DistinctionError> {
    let chi = cuspidal_character(g, torus, k)?;
    let rho_values: Vec<Cyc> = torus
        .members
        .iter()
        .map(|&i| {
            torus
                .character_value(k, i)
                .expect("torus members have logarithms")
        })
        .collect();
    theorem_sides(g, orbit, &torus.members, &rho_values, &chi)
}

/// Induces a function supported on a subgroup to the whole group by the
/// averaged conjugation sum.
pub fn frobenius_induce(
    g: &FiniteGroupTable,
    sub_members: &[usize],
    dotted: &[Cyc],
) -> Result<ClassFunction, DistinctionError> {
    if dotted.len() != g.order() {
        return Err(DistinctionError::Group(GroupError::GroupMismatch));
    }
    if !g.table.is_subgroup(sub_members) {
        return Err(DistinctionError::Group(GroupError::NotASubgroup));
    }
    let in_sub: HashSet<usize> = sub_members.iter().copied().collect();
    for (i, value) in dotted.iter().enumerate() {
        if !in_sub.contains(&i) && !value.is_zero() {
            return Err(DistinctionError::SupportNotInK { index: i });
        }
    }
    let mut values = Vec::with_capacity(g.order());
    for x in 0..g.order() {
        let mut sum = Cyc::zero(1);
        for h in 0..g.order() {
            let conjugated = g.table.mul(g.table.mul(h, x), g.table.inv(h));
            let term = &dotted[conjugated];
            if !term.is_zero() {
                sum = sum.add(term);
            }
        }
        values.push(sum.scale(&BigRational::new(
            1.into(),
            (sub_members.len() as i64).into(),
        )));
    }
    Ok(ClassFunction { values })
}

/// Character of the representation induced from a subgroup via explicit
/// block matrices, for cross-checking the averaged formula.
pub fn induced_character(
    g: &FiniteGroupTable,
    sub_members: &[usize],
    sub_images: &[CycMat],
) -> Result<Vec<Cyc>, DistinctionError> {
    let rep: LinearRep = induce_rep(&g.table, sub_members, sub_images)?;
    Ok(rep.character())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl2_3() -> FiniteGroupTable {
        build_group_gl2(3, 10_000).unwrap()
    }

    fn diag(g: &FiniteGroupTable, a: i64, d: i64) -> GfMat {
        let f = &g.field;
        GfMat::from_rows(&[vec![f.from_int(a), 0], vec![0, f.from_int(d)]])
    }

    #[test]
    fn group_construction_orders_and_classes() {
        let g3 = gl2_3();
        assert_eq!(g3.order(), 48);
        assert_eq!(g3.classes.len(), 8);
        assert!(g3.table.validate().is_ok());
        let g5 = build_group_gl2(5, 10_000).unwrap();
        assert_eq!(g5.order(), 480);
        assert_eq!(
            build_group_gl2(5, 100).unwrap_err(),
            DistinctionError::TooLarge {
                order: 480,
                bound: 100
            }
        );
        assert_eq!(
            build_group_gl2(4, 10_000).unwrap_err(),
            DistinctionError::NotAnOddPrimePower(4)
        );
        assert_eq!(
            build_group_gl2(6, 10_000).unwrap_err(),
            DistinctionError::NotAnOddPrimePower(6)
        );
    }

    #[test]
    fn torus_is_cyclic_of_the_right_order() {
        let g = gl2_3();
        let torus = elliptic_torus(&g).unwrap();
        assert_eq!(torus.modulus, 8);
        assert_eq!(torus.members.len(), 8);
        let distinct: HashSet<usize> = torus.members.iter().copied().collect();
        assert_eq!(distinct.len(), 8);
        for a in [1i64, 2] {
            let scalar = diag(&g, a, a);
            let idx = g.index_of(&scalar).unwrap();
            assert!(torus.log(idx).is_some());
        }
        let g5 = build_group_gl2(5, 10_000).unwrap();
        let torus5 = elliptic_torus(&g5).unwrap();
        assert_eq!(torus5.modulus, 24);
    }

    #[test]
    fn cuspidal_parameters_match_the_orbit_count() {
        assert_eq!(cuspidal_parameters(3), vec![1, 2, 5]);
        assert_eq!(cuspidal_parameters(5).len(), 10);
    }

    #[test]
    fn cuspidal_characters_are_certified_and_orthogonal() {
        let g = gl2_3();
        let torus = elliptic_torus(&g).unwrap();
        let chi1 = cuspidal_character(&g, &torus, 1).unwrap();
        assert!(chi1.values[0].eq_value(&Cyc::from_int(2)));
        assert!(chi1.is_constant_on_classes(&g));
        let chi2 = cuspidal_character(&g, &torus, 2).unwrap();
        let cross = character_pairing(&g.table, &chi1.values, &chi2.values).unwrap();
        assert!(cross.is_zero());
        let partner = cuspidal_character(&g, &torus, 3).unwrap();
        for (a, b) in chi1.values.iter().zip(&partner.values) {
            assert!(a.eq_value(b));
        }
        assert_eq!(
            cuspidal_character(&g, &torus, 0).unwrap_err(),
            DistinctionError::NotGeneralPosition { k: 0 }
        );
        assert_eq!(
            cuspidal_character(&g, &torus, 4).unwrap_err(),
            DistinctionError::NotGeneralPosition { k: 4 }
        );
    }

    #[test]
    fn involution_resolution_and_fixed_points() {
        let g = gl2_3();
        let split = resolve_involution(
            &g,
            &Involution::Inner {
                t: diag(&g, 1, -1),
            },
        )
        .unwrap();
        let fixed = fixed_points(&g, &split);
        assert_eq!(fixed.len(), 4);
        for &i in &fixed {
            let m = &g.elements[i];
            assert_eq!(m.at(0, 1), 0);
            assert_eq!(m.at(1, 0), 0);
        }
        let identity_seed = Involution::Inner {
            t: GfMat::identity(&g.field, 2),
        };
        assert!(matches!(
            resolve_involution(&g, &identity_seed),
            Err(DistinctionError::NotAnInvolution(_))
        ));
        let shear_seed = Involution::Inner {
            t: GfMat::from_rows(&[vec![1, 1], vec![0, 1]]),
        };
        assert!(matches!(
            resolve_involution(&g, &shear_seed),
            Err(DistinctionError::NotAnInvolution(_))
        ));
        let duality = resolve_involution(
            &g,
            &Involution::TransposeInverse {
                twist: GfMat::identity(&g.field, 2),
            },
        )
        .unwrap();
        assert_eq!(fixed_points(&g, &duality).len(), 8);
    }

    #[test]
    fn orbits_close_under_conjugation() {
        let g = gl2_3();
        let seed = Involution::Inner {
            t: diag(&g, 1, -1),
        };
        let orbits = involution_orbits(&g, std::slice::from_ref(&seed)).unwrap();
        assert_eq!(orbits.len(), 1);
        let orbit = &orbits[0];
        assert_eq!(orbit.members.len(), 6);
        let resolved = resolve_involution(&g, &seed).unwrap();
        let shear = g
            .index_of(&GfMat::from_rows(&[vec![1, 1], vec![0, 1]]))
            .unwrap();
        let moved = conjugate_involution(&g, &resolved, shear);
        assert!(orbit.members.iter().any(|m| m.table == moved.table));
        let re_resolved = resolve_involution(&g, &moved.involution).unwrap();
        assert_eq!(re_resolved.table, moved.table);
        for member in &orbit.members {
            let fixed: HashSet<usize> = fixed_points(&g, member).into_iter().collect();
            let stab: HashSet<usize> = stabilizer(&g, member).into_iter().collect();
            assert!(fixed.is_subset(&stab));
        }
    }

    #[test]
    fn epsilon_is_trivial_for_the_split_torus_pair() {
        let g = gl2_3();
        let theta = resolve_involution(
            &g,
            &Involution::Inner {
                t: diag(&g, 1, -1),
            },
        )
        .unwrap();
        let diagonal: Vec<usize> = (0..g.order())
            .filter(|&i| {
                let m = &g.elements[i];
                m.at(0, 1) == 0 && m.at(1, 0) == 0
            })
            .collect();
        let eps = epsilon_character(&g, &theta, &diagonal).unwrap();
        assert_eq!(eps.domain.len(), 4);
        assert!(eps.values.iter().all(|&v| v == 1));
    }

    #[test]
    fn epsilon_is_a_sign_character_on_the_torus() {
        let g = gl2_3();
        let torus = elliptic_torus(&g).unwrap();
        let theta = resolve_involution(
            &g,
            &Involution::TransposeInverse {
                twist: GfMat::identity(&g.field, 2),
            },
        )
        .unwrap();
        let eps = epsilon_character(&g, &theta, &torus.members).unwrap();
        assert!(!eps.domain.is_empty());
        let position: HashMap<usize, usize> = eps
            .domain
            .iter()
            .enumerate()
            .map(|(pos, &i)| (i, pos))
            .collect();
        for &a in &eps.domain {
            for &b in &eps.domain {
                let product = g.table.mul(a, b);
                assert_eq!(
                    eps.values[position[&product]],
                    eps.values[position[&a]] * eps.values[position[&b]]
                );
            }
        }
        let moved_out = resolve_involution(
            &g,
            &Involution::Inner {
                t: GfMat::from_rows(&[vec![1, 1], vec![0, 2]]),
            },
        )
        .unwrap();
        assert_eq!(
            epsilon_character(&g, &moved_out, &torus.members).unwrap_err(),
            DistinctionError::ThetaDoesNotPreserveL
        );
    }

    #[test]
    fn identity_holds_for_every_parameter_and_orbit_when_q_is_three() {
        let g = gl2_3();
        let torus = elliptic_torus(&g).unwrap();
        let seeds = default_involution_seeds(&g);
        assert!(!seeds.is_empty());
        let orbits = involution_orbits(&g, &seeds).unwrap();
        assert!(orbits.len() >= 3);
        let split = resolve_involution(
            &g,
            &Involution::Inner {
                t: diag(&g, 1, -1),
            },
        )
        .unwrap();
        let split_orbit = orbits
            .iter()
            .find(|o| o.members.iter().any(|m| m.table == split.table))
            .expect("the split seed appears among the default orbits");
        let anchor_distinguished = theorem_sides_cuspidal(&g, split_orbit, &torus, 2).unwrap();
        assert_eq!(anchor_distinguished.lhs, 1);
        let anchor_not = theorem_sides_cuspidal(&g, split_orbit, &torus, 1).unwrap();
        assert_eq!(anchor_not.lhs, 0);
        for k in cuspidal_parameters(3) {
            for orbit in &orbits {
                let report = theorem_sides_cuspidal(&g, orbit, &torus, k).unwrap();
                assert_eq!(report.lhs, report.rhs);
            }
        }
    }

    #[test]
    fn identity_holds_for_every_parameter_and_orbit_when_q_is_five() {
        let g = build_group_gl2(5, 10_000).unwrap();
        let torus = elliptic_torus(&g).unwrap();
        let orbits = involution_orbits(&g, &default_involution_seeds(&g)).unwrap();
        assert!(orbits.len() >= 3);
        for k in cuspidal_parameters(5) {
            for orbit in &orbits {
                let report = theorem_sides_cuspidal(&g, orbit, &torus, k).unwrap();
                assert_eq!(report.lhs, report.rhs);
            }
        }
    }

    #[test]
    fn averaged_induction_matches_matrix_induction() {
        let g = gl2_3();
        let f = &g.field;
        let torus = elliptic_torus(&g).unwrap();
        let shear = g
            .index_of(&GfMat::from_rows(&[vec![1, 1], vec![0, 1]]))
            .unwrap();
        let lower = g
            .index_of(&GfMat::from_rows(&[vec![1, 0], vec![1, 1]]))
            .unwrap();
        let gamma = f.generator();
        let d_gamma = g
            .index_of(&GfMat::from_rows(&[vec![gamma, 0], vec![0, 1]]))
            .unwrap();
        let d_gamma_low = g
            .index_of(&GfMat::from_rows(&[vec![1, 0], vec![0, gamma]]))
            .unwrap();
        let minus = g.index_of(&diag(&g, -1, -1)).unwrap();
        let trivial = vec![g.table.identity()];
        let center = g.table.subgroup_closure(&[minus]);
        let unipotent = g.table.subgroup_closure(&[shear]);
        let diagonal = g.table.subgroup_closure(&[d_gamma, d_gamma_low]);
        let borel = g.table.subgroup_closure(&[shear, d_gamma, d_gamma_low]);
        let special = g.table.subgroup_closure(&[shear, lower]);
        let whole: Vec<usize> = (0..g.order()).collect();
        let subgroups: Vec<(&str, Vec<usize>)> = vec![
            ("trivial", trivial),
            ("center", center),
            ("unipotent", unipotent),
            ("diagonal", diagonal),
            ("nonsplit torus", torus.members.clone()),
            ("borel", borel),
            ("special", special),
            ("whole", whole),
        ];
        assert_eq!(subgroups[5].1.len(), 12);
        for (name, members) in &subgroups {
            let mut dotted = vec![Cyc::zero(1); g.order()];
            for &i in members {
                dotted[i] = Cyc::one(1);
            }
            let averaged = frobenius_induce(&g, members, &dotted).unwrap();
            let images = vec![CycMat::identity(1, 1); members.len()];
            let direct = induced_character(&g, members, &images).unwrap();
            for (a, b) in averaged.values.iter().zip(&direct) {
                assert!(a.eq_value(b), "trivial character through {name}");
            }
            assert!(averaged.is_constant_on_classes(&g));
        }
        let borel_members = &subgroups[5].1;
        let mut dotted = vec![Cyc::zero(1); g.order()];
        for &i in borel_members {
            dotted[i] = Cyc::one(1);
        }
        let permutation = frobenius_induce(&g, borel_members, &dotted).unwrap();
        assert!(permutation.values[0].eq_value(&Cyc::from_int(4)));

        let mut rho_dotted = vec![Cyc::zero(8); g.order()];
        let mut rho_images = Vec::new();
        for &i in &torus.members {
            let value = torus.character_value(1, i).unwrap();
            rho_dotted[i] = value.clone();
            let mut mat = CycMat::zero(1, 1, 8);
            *mat.at_mut(0, 0) = value;
            rho_images.push(mat);
        }
        let averaged = frobenius_induce(&g, &torus.members, &rho_dotted).unwrap();
        let direct = induced_character(&g, &torus.members, &rho_images).unwrap();
        for (a, b) in averaged.values.iter().zip(&direct) {
            assert!(a.eq_value(b));
        }

        let chi = cuspidal_character(&g, &torus, 1).unwrap();
        let whole: Vec<usize> = (0..g.order()).collect();
        let same = frobenius_induce(&g, &whole, &chi.values).unwrap();
        for (a, b) in same.values.iter().zip(&chi.values) {
            assert!(a.eq_value(b));
        }

        let mut bad = vec![Cyc::zero(1); g.order()];
        bad[shear] = Cyc::one(1);
        let err = frobenius_induce(&g, &subgroups[1].1, &bad).unwrap_err();
        assert_eq!(err, DistinctionError::SupportNotInK { index: shear });
    }

    #[test]
    fn swap_involution_on_a_product_reduces_to_the_character_pairing() {
        let g = gl2_3();
        let torus = elliptic_torus(&g).unwrap();
        let prod = build_product_group(&g, &g, 10_000).unwrap();
        assert_eq!(prod.order(), 2304);
        let f = &prod.field;
        let mut swap_rows = vec![vec![f.zero(); 4]; 4];
        for i in 0..2 {
            swap_rows[i][2 + i] = f.one();
            swap_rows[2 + i][i] = f.one();
        }
        let swap = Involution::Inner {
            t: GfMat::from_rows(&swap_rows),
        };
        let resolved = resolve_involution(&prod, &swap).unwrap();
        assert_eq!(fixed_points(&prod, &resolved).len(), 48);
        let orbits = involution_orbits(&prod, std::slice::from_ref(&swap)).unwrap();
        assert_eq!(orbits.len(), 1);

        let block = |i: usize, j: usize| {
            let a = &g.elements[i];
            let b = &g.elements[j];
            let mut rows = vec![vec![f.zero(); 4]; 4];
            for r in 0..2 {
                for c in 0..2 {
                    rows[r][c] = a.at(r, c);
                    rows[2 + r][2 + c] = b.at(r, c);
                }
            }
            GfMat::from_rows(&rows)
        };
        let mut l_members = Vec::new();
        let mut member_pairs = Vec::new();
        for &t1 in &torus.members {
            for &t2 in &torus.members {
                l_members.push(prod.index_of(&block(t1, t2)).unwrap());
                member_pairs.push((t1, t2));
            }
        }

        for (k1, k2, expected) in [(1u64, 1u64, 1u64), (1, 2, 0)] {
            let chi1 = cuspidal_character(&g, &torus, k1).unwrap();
            let chi2 = cuspidal_character(&g, &torus, k2).unwrap();
            let mut chi_values = Vec::with_capacity(prod.order());
            for m in &prod.elements {
                let mut a_rows = vec![vec![f.zero(); 2]; 2];
                let mut b_rows = vec![vec![f.zero(); 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        a_rows[r][c] = m.at(r, c);
                        b_rows[r][c] = m.at(2 + r, 2 + c);
                    }
                }
                let ai = g.index_of(&GfMat::from_rows(&a_rows)).unwrap();
                let bi = g.index_of(&GfMat::from_rows(&b_rows)).unwrap();
                chi_values.push(chi1.values[ai].mul(&chi2.values[bi].conj()));
            }
            let chi = ClassFunction { values: chi_values };
            let rho_values: Vec<Cyc> = member_pairs
                .iter()
                .map(|&(t1, t2)| {
                    torus
                        .character_value(k1, t1)
                        .unwrap()
                        .mul(&torus.character_value(k2, t2).unwrap().conj())
                })
                .collect();
            let report = theorem_sides(&prod, &orbits[0], &l_members, &rho_values, &chi).unwrap();
            assert_eq!(report.lhs, expected);
            let direct =
                character_pairing(&g.table, &cuspidal_character(&g, &torus, k1).unwrap().values,
                    &cuspidal_character(&g, &torus, k2).unwrap().values)
                .unwrap();
            let direct_count = if direct.is_zero() {
                0
            } else {
                assert!(direct.eq_value(&Cyc::one(1)));
                1
            };
            assert_eq!(report.lhs, direct_count);
        }
    }
}
