//! Root data and their combinatorial invariants.
//!
//! A [`RootDatum`] packages the character lattice, the cocharacter lattice
//! and the finite list of root/coroot pairs of a split reductive group, with
//! the pairing realised as the dot product in the chosen coordinates. On top
//! of that this module provides the computations the rest of the crate
//! consumes: Cartan classification with Weyl orders
//! ([`classify_and_validate`]), Levi-subsystem detection
//! ([`is_levi_subsystem`]), orbit/stabilizer counts for Weyl actions on
//! points over a finite field ([`weyl_stabilizer_order`]), and the lattice
//! invariants [`fundamental_group_order`] and [`torsion_report`] that gate
//! the genericity analysis.
//!
//! Weyl groups are never enumerated element by element above order `10^5`;
//! orders come from the type classification and stabilizers from
//! orbit counting under the simple reflections.

use crate::exact::{qmat_rank, smith_invariants, to_rational_rows, IMat};
use crate::fp::{FElt, Gf};
use num::bigint::BigInt;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

/// Errors from root-datum construction and queries.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootDatumError {
    /// A root-datum axiom failed; the message names the first violation found.
    #[error("not a root system: {0}")]
    NotARootSystem(String),
    /// A root index referred outside the datum's root list.
    #[error("root index {0} is out of range")]
    IndexOutOfRange(usize),
    /// A proposed member set fails the Levi-subsystem invariants.
    #[error("not a Levi subsystem: {0}")]
    InvalidLevi(String),
    /// A supplied vector has the wrong number of coordinates.
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch {
        /// Coordinates required by the datum's rank.
        expected: usize,
        /// Coordinates actually supplied.
        got: usize,
    },
    /// The characteristic 2 is excluded throughout.
    #[error("p = 2 is excluded; all constructions assume odd characteristic")]
    EvenPrime,
    /// A parameter that must be prime is not.
    #[error("{0} is not prime")]
    NotPrime(u64),
    /// No finite Cartan matrix exists for the requested family and rank.
    #[error("no finite Cartan matrix of type {family}{rank}")]
    NoSuchCartanType {
        /// Requested family letter.
        family: char,
        /// Requested rank.
        rank: usize,
    },
}

/// Dot product of two integer vectors of equal length.
pub fn dot(x: &[i64], y: &[i64]) -> i64 {
    assert_eq!(x.len(), y.len(), "dot product on unequal lengths");
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A root datum in explicit coordinates.
///
/// `roots[i]` and `coroots[i]` form a root/coroot pair, and the pairing
/// between `X*` and `X_*` is the dot product. The struct is plain data so it
/// can be read from configuration files; call [`RootDatum::validate`] (or any
/// operation that does so internally) before trusting an instance that was
/// not produced by a constructor here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootDatum {
    /// Common rank of the character and cocharacter lattices.
    pub rank: usize,
    /// Root vectors in `X*` coordinates.
    pub roots: Vec<Vec<i64>>,
    /// Coroot vectors in `X_*` coordinates, parallel to `roots`.
    pub coroots: Vec<Vec<i64>>,
}

impl RootDatum {
    /// Builds and validates a datum from explicit lists.
    pub fn new(
        rank: usize,
        roots: Vec<Vec<i64>>,
        coroots: Vec<Vec<i64>>,
    ) -> Result<Self, RootDatumError> {
        let datum = RootDatum {
            rank,
            roots,
            coroots,
        };
        datum.validate()?;
        Ok(datum)
    }

    /// Number of roots (equivalently coroots).
    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    /// Pairing of `roots[i]` against `coroots[j]`.
    ///
    /// Panics when an index is out of range; use on validated indices.
    pub fn pairing(&self, i: usize, j: usize) -> i64 {
        dot(&self.roots[i], &self.coroots[j])
    }

    /// Index of the root with the given coordinates, if present.
    pub fn root_index_of(&self, v: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r.as_slice() == v)
    }

    /// Index of the negative of root `i`, if present.
    pub fn negation_index(&self, i: usize) -> Option<usize> {
        let neg: Vec<i64> = self.roots[i].iter().map(|c| -c).collect();
        self.root_index_of(&neg)
    }

    /// Reflection in root `i` acting on `X*`: `x ↦ x − ⟨x, a∨⟩ a`.
    pub fn reflection_matrix(&self, i: usize) -> IMat {
        let a = &self.roots[i];
        let av = &self.coroots[i];
        let mut m = IMat::identity(self.rank);
        for r in 0..self.rank {
            for c in 0..self.rank {
                *m.at_mut(r, c) -= a[r] * av[c];
            }
        }
        m
    }

    /// Reflection in coroot `i` acting on `X_*`: `y ↦ y − ⟨a, y⟩ a∨`.
    ///
    /// This is the transpose of [`RootDatum::reflection_matrix`], so the pair
    /// preserves the pairing between the two lattices.
    pub fn coreflection_matrix(&self, i: usize) -> IMat {
        self.reflection_matrix(i).transpose()
    }

    /// Checks every root-datum axiom, reporting the first violation found.
    pub fn validate(&self) -> Result<(), RootDatumError> {
        let fail = |msg: String| Err(RootDatumError::NotARootSystem(msg));
        if self.rank == 0 {
            return fail("rank must be positive".into());
        }
        if self.roots.len() != self.coroots.len() {
            return fail(format!(
                "{} roots but {} coroots",
                self.roots.len(),
                self.coroots.len()
            ));
        }
        for (i, r) in self.roots.iter().enumerate() {
            if r.len() != self.rank {
                return fail(format!("root {i} has {} coordinates, rank is {}", r.len(), self.rank));
            }
            if self.coroots[i].len() != self.rank {
                return fail(format!(
                    "coroot {i} has {} coordinates, rank is {}",
                    self.coroots[i].len(),
                    self.rank
                ));
            }
            if r.iter().all(|&c| c == 0) {
                return fail(format!("root {i} is zero"));
            }
        }
        let mut seen: HashMap<&[i64], usize> = HashMap::new();
        for (i, r) in self.roots.iter().enumerate() {
            if let Some(&j) = seen.get(r.as_slice()) {
                return fail(format!("duplicate root at indices {j} and {i}"));
            }
            seen.insert(r.as_slice(), i);
        }
        for i in 0..self.num_roots() {
            if self.pairing(i, i) != 2 {
                return fail(format!(
                    "pairing of root {i} with its own coroot is {}, not 2",
                    self.pairing(i, i)
                ));
            }
        }
        for i in 0..self.num_roots() {
            match self.negation_index(i) {
                None => return fail(format!("negation of root {i} is missing")),
                Some(j) => {
                    let neg_cov: Vec<i64> = self.coroots[i].iter().map(|c| -c).collect();
                    if self.coroots[j] != neg_cov {
                        return fail(format!("coroot of root {j} is not minus the coroot of root {i}"));
                    }
                }
            }
        }
        for i in 0..self.num_roots() {
            for j in 0..self.num_roots() {
                if i == j {
                    continue;
                }
                let (a, b) = (&self.roots[i], &self.roots[j]);
                let cross_consistent = (0..self.rank)
                    .flat_map(|r| (0..self.rank).map(move |c| (r, c)))
                    .all(|(r, c)| a[r] * b[c] == a[c] * b[r]);
                if cross_consistent && a != &b.iter().map(|x| -x).collect::<Vec<_>>() {
                    return fail(format!("roots {i} and {j} are proportional"));
                }
            }
        }
        for i in 0..self.num_roots() {
            for j in 0..self.num_roots() {
                let n = self.pairing(j, i);
                let image: Vec<i64> = (0..self.rank)
                    .map(|k| self.roots[j][k] - n * self.roots[i][k])
                    .collect();
                let Some(k) = self.root_index_of(&image) else {
                    return fail(format!("reflection in root {i} does not map root {j} into the root set"));
                };
                let m = dot(&self.roots[i], &self.coroots[j]);
                let cov_image: Vec<i64> = (0..self.rank)
                    .map(|t| self.coroots[j][t] - m * self.coroots[i][t])
                    .collect();
                if self.coroots[k] != cov_image {
                    return fail(format!(
                        "coroot of the reflection of root {j} in root {i} is not the reflected coroot"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Datum of a split torus of the given rank: no roots at all.
    pub fn torus(rank: usize) -> Self {
        assert!(rank > 0, "rank must be positive");
        RootDatum {
            rank,
            roots: Vec::new(),
            coroots: Vec::new(),
        }
    }

    /// Datum of `GL_n` in the standard coordinates: roots `e_i − e_j` with
    /// the coroots given by the same vectors on the cocharacter side.
    pub fn gl(n: usize) -> Self {
        assert!(n >= 2, "gl(n) needs n >= 2");
        let mut roots = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut v = vec![0i64; n];
                v[i] = 1;
                v[j] = -1;
                roots.push(v);
            }
        }
        RootDatum::new(n, roots.clone(), roots).expect("GL_n datum is valid")
    }

    /// Datum of `SL_n`: the simply connected group of type `A_{n−1}`,
    /// written in the basis of fundamental weights.
    pub fn sl(n: usize) -> Self {
        assert!(n >= 2, "sl(n) needs n >= 2");
        let c = standard_cartan_matrix(CartanFamily::A, n - 1).expect("A_{n-1} exists");
        RootDatum::simply_connected_from_cartan(&c).expect("Cartan matrix is finite type")
    }

    /// Datum of `PGL_n`: the adjoint group of type `A_{n−1}`, written in the
    /// basis of simple roots.
    pub fn pgl(n: usize) -> Self {
        assert!(n >= 2, "pgl(n) needs n >= 2");
        let c = standard_cartan_matrix(CartanFamily::A, n - 1).expect("A_{n-1} exists");
        RootDatum::adjoint_from_cartan(&c).expect("Cartan matrix is finite type")
    }

    /// Block direct sum of two data: lattices concatenate, root sets sit in
    /// their own blocks.
    pub fn direct_sum(a: &RootDatum, b: &RootDatum) -> Self {
        let rank = a.rank + b.rank;
        let pad_left = |v: &[i64]| {
            let mut w = v.to_vec();
            w.extend(std::iter::repeat(0).take(b.rank));
            w
        };
        let pad_right = |v: &[i64]| {
            let mut w = vec![0i64; a.rank];
            w.extend_from_slice(v);
            w
        };
        let mut roots: Vec<Vec<i64>> = a.roots.iter().map(|v| pad_left(v)).collect();
        let mut coroots: Vec<Vec<i64>> = a.coroots.iter().map(|v| pad_left(v)).collect();
        roots.extend(b.roots.iter().map(|v| pad_right(v)));
        coroots.extend(b.coroots.iter().map(|v| pad_right(v)));
        RootDatum::new(rank, roots, coroots).expect("direct sum of valid data is valid")
    }

    /// Adjoint datum of a finite-type Cartan matrix: `X*` is the root
    /// lattice in the basis of simple roots, `X_*` carries the dual basis.
    ///
    /// Roots are generated from the simple ones by closing under the simple
    /// reflections; the closure is capped at `10^4` vectors so a non-finite
    /// input matrix is rejected instead of looping.
    pub fn adjoint_from_cartan(c: &IMat) -> Result<Self, RootDatumError> {
        validate_cartan_shape(c)?;
        let n = c.rows;
        let row = |i: usize| -> Vec<i64> { (0..n).map(|j| c.at(i, j)).collect() };
        let mut found: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
        let mut queue: VecDeque<(Vec<i64>, Vec<i64>)> = VecDeque::new();
        for i in 0..n {
            let mut u = vec![0i64; n];
            u[i] = 1;
            let v = row(i);
            found.insert(u.clone(), v.clone());
            queue.push_back((u, v));
        }
        while let Some((u, v)) = queue.pop_front() {
            for i in 0..n {
                let coeff = dot(&row(i), &u);
                let mut u2 = u.clone();
                u2[i] -= coeff;
                let ri = row(i);
                let v2: Vec<i64> = (0..n).map(|j| v[j] - v[i] * ri[j]).collect();
                if !found.contains_key(&u2) {
                    if found.len() >= 10_000 {
                        return Err(RootDatumError::NotARootSystem(
                            "reflection closure exceeded 10^4 vectors; matrix is not finite type".into(),
                        ));
                    }
                    found.insert(u2.clone(), v2.clone());
                    queue.push_back((u2, v2));
                }
            }
        }
        let mut pairs: Vec<(Vec<i64>, Vec<i64>)> = found.into_iter().collect();
        pairs.sort();
        let (roots, coroots) = pairs.into_iter().unzip();
        RootDatum::new(n, roots, coroots)
    }

    /// Simply connected datum of a finite-type Cartan matrix: `X*` is the
    /// weight lattice in the basis of fundamental weights.
    ///
    /// Obtained from the adjoint datum of the transposed matrix by swapping
    /// the two sides, which exchanges root and coroot lattices.
    pub fn simply_connected_from_cartan(c: &IMat) -> Result<Self, RootDatumError> {
        let dual = RootDatum::adjoint_from_cartan(&c.transpose())?;
        RootDatum::new(dual.rank, dual.coroots, dual.roots)
    }
}

fn validate_cartan_shape(c: &IMat) -> Result<(), RootDatumError> {
    let n = c.rows;
    if n == 0 || c.cols != n {
        return Err(RootDatumError::NotARootSystem("Cartan matrix must be square and nonempty".into()));
    }
    for i in 0..n {
        if c.at(i, i) != 2 {
            return Err(RootDatumError::NotARootSystem(format!("Cartan diagonal entry {i} is not 2")));
        }
        for j in 0..n {
            if i != j {
                let e = c.at(i, j);
                if e > 0 {
                    return Err(RootDatumError::NotARootSystem(format!(
                        "Cartan entry ({i},{j}) is positive"
                    )));
                }
                if (e == 0) != (c.at(j, i) == 0) {
                    return Err(RootDatumError::NotARootSystem(format!(
                        "Cartan entries ({i},{j}) and ({j},{i}) disagree about adjacency"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Families of finite Cartan matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CartanFamily {
    /// `A_n`, `n ≥ 1`.
    A,
    /// `B_n`, `n ≥ 2`.
    B,
    /// `C_n`, `n ≥ 3`.
    C,
    /// `D_n`, `n ≥ 4`.
    D,
    /// `E_6`, `E_7`, `E_8`.
    E,
    /// `F_4`.
    F,
    /// `G_2`.
    G,
}

impl CartanFamily {
    fn letter(self) -> char {
        match self {
            CartanFamily::A => 'A',
            CartanFamily::B => 'B',
            CartanFamily::C => 'C',
            CartanFamily::D => 'D',
            CartanFamily::E => 'E',
            CartanFamily::F => 'F',
            CartanFamily::G => 'G',
        }
    }
}

/// The standard Cartan matrix of a finite family at a given rank.
///
/// Entry `(i, j)` is the pairing of simple root `j` against simple coroot
/// `i`. Rank bounds follow the usual conventions that make the labels
/// unambiguous: `A_n` for `n ≥ 1`, `B_n` for `n ≥ 2`, `C_n` for `n ≥ 3`,
/// `D_n` for `n ≥ 4`, `E_6`–`E_8`, `F_4`, `G_2`.
pub fn standard_cartan_matrix(family: CartanFamily, rank: usize) -> Result<IMat, RootDatumError> {
    let bad = || RootDatumError::NoSuchCartanType {
        family: family.letter(),
        rank,
    };
    let chain = |n: usize| -> Vec<(usize, usize)> { (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect() };
    let (n, edges, specials): (usize, Vec<(usize, usize)>, Vec<(usize, usize)>) = match family {
        CartanFamily::A => {
            if rank < 1 {
                return Err(bad());
            }
            (rank, chain(rank), vec![])
        }
        CartanFamily::B => {
            if rank < 2 {
                return Err(bad());
            }
            (rank, chain(rank), vec![(rank - 1, rank - 2)])
        }
        CartanFamily::C => {
            if rank < 3 {
                return Err(bad());
            }
            (rank, chain(rank), vec![(rank - 2, rank - 1)])
        }
        CartanFamily::D => {
            if rank < 4 {
                return Err(bad());
            }
            let mut e = chain(rank - 2);
            e.push((rank - 3, rank - 2));
            e.push((rank - 3, rank - 1));
            (rank, e, vec![])
        }
        CartanFamily::E => {
            if !(6..=8).contains(&rank) {
                return Err(bad());
            }
            let mut e = vec![(0, 2), (2, 3), (3, 4), (4, 5), (1, 3)];
            if rank >= 7 {
                e.push((5, 6));
            }
            if rank == 8 {
                e.push((6, 7));
            }
            (rank, e, vec![])
        }
        CartanFamily::F => {
            if rank != 4 {
                return Err(bad());
            }
            (4, chain(4), vec![(2, 1)])
        }
        CartanFamily::G => {
            if rank != 2 {
                return Err(bad());
            }
            (2, chain(2), vec![])
        }
    };
    let mut c = IMat::identity(n);
    for i in 0..n {
        *c.at_mut(i, i) = 2;
    }
    for (i, j) in edges {
        *c.at_mut(i, j) = -1;
        *c.at_mut(j, i) = -1;
    }
    for (i, j) in specials {
        *c.at_mut(i, j) = -2;
    }
    if family == CartanFamily::G {
        *c.at_mut(0, 1) = -3;
    }
    Ok(c)
}

/// A symmetric, span-closed subset of the roots of a fixed datum, stored as
/// sorted indices into the parent's root list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviSubsystem {
    /// Sorted indices of the member roots.
    pub members: Vec<usize>,
}

impl LeviSubsystem {
    /// Validates the member set against `datum` and builds the subsystem.
    pub fn new(
        datum: &RootDatum,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self, RootDatumError> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if !is_levi_subsystem(datum, &set)? {
            for &i in &set {
                if datum
                    .negation_index(i)
                    .map(|j| !set.contains(&j))
                    .unwrap_or(true)
                {
                    return Err(RootDatumError::InvalidLevi(format!(
                        "member set is not symmetric: negation of root {i} is missing"
                    )));
                }
            }
            return Err(RootDatumError::InvalidLevi(
                "member set is not closed: its rational span contains other roots".into(),
            ));
        }
        Ok(LeviSubsystem {
            members: set.into_iter().collect(),
        })
    }

    /// The full root set of a datum as a subsystem.
    pub fn full(datum: &RootDatum) -> Self {
        LeviSubsystem {
            members: (0..datum.num_roots()).collect(),
        }
    }

    /// The empty subsystem (the torus itself).
    pub fn empty() -> Self {
        LeviSubsystem { members: Vec::new() }
    }

    /// Whether root index `i` belongs to the subsystem.
    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// Decides whether a set of root indices is a Levi subsystem: symmetric and
/// equal to the intersection of the root set with its own rational span.
pub fn is_levi_subsystem(
    datum: &RootDatum,
    subset: &BTreeSet<usize>,
) -> Result<bool, RootDatumError> {
    for &i in subset {
        if i >= datum.num_roots() {
            return Err(RootDatumError::IndexOutOfRange(i));
        }
    }
    for &i in subset {
        match datum.negation_index(i) {
            Some(j) if subset.contains(&j) => {}
            _ => return Ok(false),
        }
    }
    let member_rows: Vec<Vec<i64>> = subset.iter().map(|&i| datum.roots[i].clone()).collect();
    let base_rank = qmat_rank(&to_rational_rows(&member_rows));
    for j in 0..datum.num_roots() {
        if subset.contains(&j) {
            continue;
        }
        let mut rows = member_rows.clone();
        rows.push(datum.roots[j].clone());
        if qmat_rank(&to_rational_rows(&rows)) == base_rank {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One irreducible component of a classified root system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Cartan label, e.g. `"A2"` or `"E8"`.
    pub label: String,
    /// Rank of the component.
    pub rank: usize,
    /// Order of the component's Weyl group.
    pub weyl_order: u64,
    /// Indices (into the classified root list) of the component's simple roots.
    pub simple_roots: Vec<usize>,
}

/// Classification of a root system into irreducible components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// Irreducible components, ordered by their smallest simple-root index.
    pub components: Vec<ComponentReport>,
    /// Order of the full Weyl group: the product over components.
    pub weyl_order: u64,
}

impl ClassificationReport {
    /// Simple-root indices of all components, in component order.
    pub fn simple_roots(&self) -> Vec<usize> {
        self.components
            .iter()
            .flat_map(|c| c.simple_roots.iter().copied())
            .collect()
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn weyl_order_of_type(letter: char, rank: usize) -> u64 {
    match letter {
        'A' => factorial(rank + 1),
        'B' | 'C' => (1u64 << rank) * factorial(rank),
        'D' => (1u64 << (rank - 1)) * factorial(rank),
        'G' => 12,
        'F' => 1152,
        'E' => match rank {
            6 => 51_840,
            7 => 2_903_040,
            8 => 696_729_600,
            _ => unreachable!("E rank is 6, 7 or 8"),
        },
        _ => unreachable!("classified letters are A-G"),
    }
}

fn lex_positive(v: &[i64]) -> bool {
    for &c in v {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

/// Extracts a simple system from a symmetric, reflection-closed subset of
/// roots: the lex-positive members that are not sums of two positive members.
fn simple_system(datum: &RootDatum, members: &[usize]) -> Vec<usize> {
    let positives: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&i| lex_positive(&datum.roots[i]))
        .collect();
    let positive_set: HashSet<&[i64]> = positives.iter().map(|&i| datum.roots[i].as_slice()).collect();
    positives
        .iter()
        .copied()
        .filter(|&s| {
            let sv = &datum.roots[s];
            !positives.iter().any(|&x| {
                let xv = &datum.roots[x];
                let diff: Vec<i64> = sv.iter().zip(xv).map(|(a, b)| a - b).collect();
                positive_set.contains(diff.as_slice())
            })
        })
        .collect()
}

fn classify_component(datum: &RootDatum, comp: &[usize]) -> Result<(char, usize), RootDatumError> {
    let n = comp.len();
    let c = |i: usize, j: usize| datum.pairing(comp[j], comp[i]);
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let m = c(i, j) * c(j, i);
            if m != 0 {
                if !(1..=3).contains(&m) {
                    return Err(RootDatumError::NotARootSystem(format!(
                        "bond strength {m} between simple roots is outside the finite range"
                    )));
                }
                edges.push((i, j, m));
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let triples = edges.iter().filter(|e| e.2 == 3).count();
    let doubles = edges.iter().filter(|e| e.2 == 2).count();
    let not_finite = |what: &str| {
        Err(RootDatumError::NotARootSystem(format!(
            "simple-root diagram is not of finite type: {what}"
        )))
    };
    if triples > 0 {
        if n == 2 && triples == 1 && edges.len() == 1 {
            return Ok(('G', 2));
        }
        return not_finite("a triple bond outside G2");
    }
    if doubles > 1 {
        return not_finite("more than one double bond");
    }
    if doubles == 1 {
        if degree.iter().any(|&d| d > 2) {
            return not_finite("a branch point together with a double bond");
        }
        let &(u, v, _) = edges.iter().find(|e| e.2 == 2).expect("double bond present");
        if n == 2 {
            return Ok(('B', 2));
        }
        let leaf = if degree[u] == 1 {
            Some(u)
        } else if degree[v] == 1 {
            Some(v)
        } else {
            None
        };
        match leaf {
            Some(leaf) => {
                let other = if leaf == u { v } else { u };
                if c(other, leaf) == -2 {
                    Ok(('C', n))
                } else {
                    Ok(('B', n))
                }
            }
            None => {
                if n == 4 {
                    Ok(('F', 4))
                } else {
                    not_finite("an interior double bond outside F4")
                }
            }
        }
    } else {
        let branch_points: Vec<usize> = (0..n).filter(|&i| degree[i] >= 3).collect();
        match branch_points.len() {
            0 => Ok(('A', n)),
            1 => {
                let t = branch_points[0];
                if degree[t] != 3 {
                    return not_finite("a vertex of degree four");
                }
                let mut lengths: Vec<usize> = edges
                    .iter()
                    .filter(|&&(a, b, _)| a == t || b == t)
                    .map(|&(a, b, _)| {
                        let mut prev = t;
                        let mut cur = if a == t { b } else { a };
                        let mut len = 1;
                        loop {
                            let next = edges
                                .iter()
                                .filter(|&&(x, y, _)| (x == cur) != (y == cur))
                                .map(|&(x, y, _)| if x == cur { y } else { x })
                                .find(|&w| w != prev);
                            match next {
                                Some(w) => {
                                    prev = cur;
                                    cur = w;
                                    len += 1;
                                }
                                None => break len,
                            }
                        }
                    })
                    .collect();
                lengths.sort_unstable();
                match lengths.as_slice() {
                    [1, 1, _] => Ok(('D', n)),
                    [1, 2, 2] => Ok(('E', 6)),
                    [1, 2, 3] => Ok(('E', 7)),
                    [1, 2, 4] => Ok(('E', 8)),
                    _ => not_finite("branch lengths outside the D and E patterns"),
                }
            }
            _ => not_finite("two branch points"),
        }
    }
}

/// Classifies the subsystem spanned by `members` without re-validating the
/// ambient datum. The member set must be symmetric and reflection-closed,
/// which holds for the full root set and for every Levi subsystem.
fn classify_subset(
    datum: &RootDatum,
    members: &[usize],
) -> Result<ClassificationReport, RootDatumError> {
    for &i in members {
        if i >= datum.num_roots() {
            return Err(RootDatumError::IndexOutOfRange(i));
        }
    }
    let simples = simple_system(datum, members);
    let k = simples.len();
    let mut component_of: Vec<Option<usize>> = vec![None; k];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..k {
        if component_of[start].is_some() {
            continue;
        }
        let id = components.len();
        let mut queue = VecDeque::from([start]);
        component_of[start] = Some(id);
        let mut comp = vec![start];
        while let Some(i) = queue.pop_front() {
            for j in 0..k {
                if component_of[j].is_none()
                    && datum.pairing(simples[i], simples[j]) != 0
                {
                    component_of[j] = Some(id);
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    let mut reports = Vec::new();
    let mut total: u64 = 1;
    for comp in &components {
        let comp_simple_indices: Vec<usize> = comp.iter().map(|&i| simples[i]).collect();
        let (letter, rank) = classify_component(datum, &comp_simple_indices)?;
        let order = weyl_order_of_type(letter, rank);
        total = total
            .checked_mul(order)
            .expect("total Weyl order fits in u64");
        reports.push(ComponentReport {
            label: format!("{letter}{rank}"),
            rank,
            weyl_order: order,
            simple_roots: comp_simple_indices,
        });
    }
    Ok(ClassificationReport {
        components: reports,
        weyl_order: total,
    })
}

/// Validates a datum and classifies its root system into irreducible
/// components with Cartan labels and Weyl-group orders.
pub fn classify_and_validate(datum: &RootDatum) -> Result<ClassificationReport, RootDatumError> {
    datum.validate()?;
    let all: Vec<usize> = (0..datum.num_roots()).collect();
    classify_subset(datum, &all)
}

/// Simple reflections of a subsystem together with the order of the group
/// they generate.
#[derive(Debug, Clone)]
pub struct WeylGroup {
    /// Reflection matrices acting on `X*`, one per simple root of the
    /// subsystem.
    pub generators: Vec<IMat>,
    /// Order of the generated group, from the type classification.
    pub order: u64,
}

/// Builds the Weyl group of a Levi subsystem inside a datum.
pub fn weyl_group(datum: &RootDatum, sub: &LeviSubsystem) -> Result<WeylGroup, RootDatumError> {
    let report = classify_subset(datum, &sub.members)?;
    let generators: Vec<IMat> = report
        .simple_roots()
        .iter()
        .map(|&i| datum.reflection_matrix(i))
        .collect();
    for g in &generators {
        debug_assert!(g.mul(g).is_identity(), "reflections are involutions");
    }
    Ok(WeylGroup {
        generators,
        order: report.weyl_order,
    })
}

/// Orbit and stabilizer sizes for the Weyl group of `sub` acting on a point
/// of `X* ⊗ F_{p^m}`.
///
/// The orbit is grown by breadth-first search under the simple reflections;
/// the stabilizer order is `|W(sub)| / orbit_size`, which is exact by the
/// orbit–stabilizer theorem and asserted here. The field is finite by
/// construction of [`Gf`].
pub fn weyl_stabilizer_order(
    datum: &RootDatum,
    sub: &LeviSubsystem,
    gf: &Gf,
    point: &[FElt],
) -> Result<(u64, u64), RootDatumError> {
    if point.len() != datum.rank {
        return Err(RootDatumError::DimensionMismatch {
            expected: datum.rank,
            got: point.len(),
        });
    }
    let report = classify_subset(datum, &sub.members)?;
    let simples = report.simple_roots();
    let roots_f: Vec<Vec<FElt>> = simples
        .iter()
        .map(|&i| datum.roots[i].iter().map(|&c| gf.from_int(c)).collect())
        .collect();
    let coroots_f: Vec<Vec<FElt>> = simples
        .iter()
        .map(|&i| datum.coroots[i].iter().map(|&c| gf.from_int(c)).collect())
        .collect();
    let mut orbit: HashSet<Vec<FElt>> = HashSet::new();
    let mut queue = VecDeque::from([point.to_vec()]);
    orbit.insert(point.to_vec());
    while let Some(x) = queue.pop_front() {
        for s in 0..simples.len() {
            let coeff = x
                .iter()
                .zip(&coroots_f[s])
                .fold(gf.zero(), |acc, (&xa, &ca)| gf.add(acc, gf.mul(xa, ca)));
            let image: Vec<FElt> = x
                .iter()
                .zip(&roots_f[s])
                .map(|(&xa, &ra)| gf.sub(xa, gf.mul(coeff, ra)))
                .collect();
            if !orbit.contains(&image) {
                orbit.insert(image.clone());
                queue.push_back(image);
            }
        }
    }
    let orbit_size = orbit.len() as u64;
    assert_eq!(
        report.weyl_order % orbit_size,
        0,
        "orbit size divides the Weyl order"
    );
    Ok((orbit_size, report.weyl_order / orbit_size))
}

/// Order of the quotient of the rational-span saturation of the coroot
/// lattice by the coroot lattice itself: `|(X_* ∩ ℚΦ∨)/ℤΦ∨|`.
///
/// Computed as the product of the nonzero elementary divisors of the coroot
/// matrix. A result of 1 means the derived group is simply connected.
pub fn fundamental_group_order(datum: &RootDatum) -> u64 {
    lattice_torsion_order(&datum.coroots)
}

fn lattice_torsion_order(rows: &[Vec<i64>]) -> u64 {
    let mut product = BigInt::one();
    for d in smith_invariants(rows) {
        if !d.is_zero() {
            product *= d;
        }
    }
    u64::try_from(product).expect("torsion order fits in u64")
}

/// Outcome of the torsion-prime test for a residue characteristic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    /// Whether the explicit stabilizer condition must be verified for this
    /// characteristic rather than deduced from the first three conditions.
    pub condition4_required: bool,
    /// Which clause fired, or why none did.
    pub reason: String,
}

/// Steinberg's torsion-prime test: decides whether the characteristic `p`
/// forces the explicit genericity condition to be checked.
///
/// The three clauses are: `p = 3` with a factor of type `E6`, `E7`, `E8` or
/// `F4`; `p = 5` with a factor of type `E8`; and a factor of type `A`
/// together with `p` dividing the torsion order of `X*/ℤΦ` (computed by
/// Smith normal form of the root matrix).
pub fn torsion_report(datum: &RootDatum, p: u64) -> Result<TorsionReport, RootDatumError> {
    if p % 2 == 0 {
        return Err(RootDatumError::EvenPrime);
    }
    if !crate::fp::is_prime(p) {
        return Err(RootDatumError::NotPrime(p));
    }
    let report = classify_and_validate(datum)?;
    let labels: Vec<&str> = report.components.iter().map(|c| c.label.as_str()).collect();
    if p == 3 {
        if let Some(l) = labels.iter().find(|l| ["E6", "E7", "E8", "F4"].contains(l)) {
            return Ok(TorsionReport {
                condition4_required: true,
                reason: format!("p = 3 and the derived group has a factor of type {l}"),
            });
        }
    }
    if p == 5 && labels.contains(&"E8") {
        return Ok(TorsionReport {
            condition4_required: true,
            reason: "p = 5 and the derived group has a factor of type E8".into(),
        });
    }
    let has_type_a = labels.iter().any(|l| l.starts_with('A'));
    if has_type_a {
        let torsion = lattice_torsion_order(&datum.roots);
        if torsion % p == 0 {
            return Ok(TorsionReport {
                condition4_required: true,
                reason: format!(
                    "a factor of type A is present and p = {p} divides the torsion order {torsion} of X*/ZPhi"
                ),
            });
        }
    }
    Ok(TorsionReport {
        condition4_required: false,
        reason: format!("no torsion clause applies for p = {p}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: the full Weyl group as the multiplicative closure
    /// of all root reflections, enumerated element by element.
    fn brute_force_weyl_order(datum: &RootDatum) -> usize {
        let gens: Vec<IMat> = (0..datum.num_roots())
            .map(|i| datum.reflection_matrix(i))
            .collect();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let id = IMat::identity(datum.rank);
        seen.insert(id.clone().a);
        let mut queue = VecDeque::from([id]);
        while let Some(m) = queue.pop_front() {
            for g in &gens {
                let prod = g.mul(&m);
                if !seen.contains(&prod.a) {
                    assert!(seen.len() < 200_000, "oracle closure out of bounds");
                    seen.insert(prod.a.clone());
                    queue.push_back(prod);
                }
            }
        }
        seen.len()
    }

    fn adjoint(family: CartanFamily, rank: usize) -> RootDatum {
        RootDatum::adjoint_from_cartan(&standard_cartan_matrix(family, rank).unwrap()).unwrap()
    }

    #[test]
    fn weyl_orders_match_brute_force_closure() {
        let cases: Vec<(RootDatum, usize)> = vec![
            (RootDatum::sl(2), 2),
            (RootDatum::sl(3), 6),
            (RootDatum::direct_sum(&RootDatum::sl(2), &RootDatum::sl(2)), 4),
            (RootDatum::sl(4), 24),
            (RootDatum::gl(3), 6),
            (adjoint(CartanFamily::B, 2), 8),
            (adjoint(CartanFamily::B, 3), 48),
            (adjoint(CartanFamily::C, 3), 48),
            (adjoint(CartanFamily::G, 2), 12),
            (adjoint(CartanFamily::D, 4), 192),
            (adjoint(CartanFamily::F, 4), 1152),
        ];
        for (datum, expected) in cases {
            let oracle = brute_force_weyl_order(&datum);
            assert_eq!(oracle, expected);
            let report = classify_and_validate(&datum).unwrap();
            assert_eq!(report.weyl_order, expected as u64);
        }
    }

    #[test]
    fn classification_round_trips_standard_types() {
        let table: Vec<(CartanFamily, usize, u64)> = vec![
            (CartanFamily::A, 1, 2),
            (CartanFamily::A, 2, 6),
            (CartanFamily::A, 3, 24),
            (CartanFamily::A, 4, 120),
            (CartanFamily::A, 5, 720),
            (CartanFamily::B, 2, 8),
            (CartanFamily::B, 3, 48),
            (CartanFamily::B, 4, 384),
            (CartanFamily::C, 3, 48),
            (CartanFamily::C, 4, 384),
            (CartanFamily::D, 4, 192),
            (CartanFamily::D, 5, 1920),
            (CartanFamily::E, 6, 51_840),
            (CartanFamily::E, 7, 2_903_040),
            (CartanFamily::E, 8, 696_729_600),
            (CartanFamily::F, 4, 1152),
            (CartanFamily::G, 2, 12),
        ];
        for (family, rank, order) in table {
            for datum in [
                adjoint(family, rank),
                RootDatum::simply_connected_from_cartan(
                    &standard_cartan_matrix(family, rank).unwrap(),
                )
                .unwrap(),
            ] {
                let report = classify_and_validate(&datum).unwrap();
                assert_eq!(report.components.len(), 1);
                let comp = &report.components[0];
                assert_eq!(comp.label, format!("{}{}", family.letter(), rank));
                assert_eq!(comp.rank, rank);
                assert_eq!(comp.weyl_order, order);
                assert_eq!(report.weyl_order, order);
            }
        }
        assert!(matches!(
            standard_cartan_matrix(CartanFamily::C, 2),
            Err(RootDatumError::NoSuchCartanType { family: 'C', rank: 2 })
        ));
    }

    #[test]
    fn direct_sums_split_into_components() {
        let datum = RootDatum::direct_sum(
            &RootDatum::direct_sum(&RootDatum::sl(2), &RootDatum::sl(3)),
            &adjoint(CartanFamily::G, 2),
        );
        let report = classify_and_validate(&datum).unwrap();
        let labels: Vec<&str> = report.components.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["A1", "A2", "G2"]);
        assert_eq!(report.weyl_order, 2 * 6 * 12);

        let torus_sum = RootDatum::direct_sum(&RootDatum::torus(2), &RootDatum::sl(2));
        let report = classify_and_validate(&torus_sum).unwrap();
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.weyl_order, 2);

        let bare = classify_and_validate(&RootDatum::torus(3)).unwrap();
        assert!(bare.components.is_empty());
        assert_eq!(bare.weyl_order, 1);
    }

    #[test]
    fn validation_reports_first_broken_axiom() {
        let mut datum = RootDatum::sl(3);
        datum.coroots[0] = datum.coroots[0].iter().map(|c| 2 * c).collect();
        match datum.validate() {
            Err(RootDatumError::NotARootSystem(msg)) => assert!(msg.contains("pairing")),
            other => panic!("expected pairing failure, got {other:?}"),
        }

        let mut datum = RootDatum::gl(2);
        datum.roots.pop();
        datum.coroots.pop();
        match datum.validate() {
            Err(RootDatumError::NotARootSystem(msg)) => assert!(msg.contains("negation")),
            other => panic!("expected negation failure, got {other:?}"),
        }

        let sl3 = RootDatum::sl(3);
        let keep: Vec<usize> = (0..sl3.num_roots())
            .filter(|&i| {
                let v = &sl3.roots[i];
                v.as_slice() != [1, 1] && v.as_slice() != [-1, -1]
            })
            .collect();
        let datum = RootDatum {
            rank: 2,
            roots: keep.iter().map(|&i| sl3.roots[i].clone()).collect(),
            coroots: keep.iter().map(|&i| sl3.coroots[i].clone()).collect(),
        };
        match datum.validate() {
            Err(RootDatumError::NotARootSystem(msg)) => assert!(msg.contains("reflection")),
            other => panic!("expected reflection failure, got {other:?}"),
        }

        let datum = RootDatum {
            rank: 1,
            roots: vec![vec![1], vec![-1], vec![2], vec![-2]],
            coroots: vec![vec![2], vec![-2], vec![1], vec![-1]],
        };
        match datum.validate() {
            Err(RootDatumError::NotARootSystem(msg)) => assert!(msg.contains("proportional")),
            other => panic!("expected proportionality failure, got {other:?}"),
        }
    }

    #[test]
    fn levi_detection_matches_hand_examples() {
        let sl3 = RootDatum::sl(3);
        let a1 = sl3.root_index_of(&[2, -1]).unwrap();
        let a2 = sl3.root_index_of(&[-1, 2]).unwrap();
        let a12 = sl3.root_index_of(&[1, 1]).unwrap();
        let neg = |i: usize| sl3.negation_index(i).unwrap();

        let set = BTreeSet::from([a1, neg(a1)]);
        assert!(is_levi_subsystem(&sl3, &set).unwrap());
        assert!(LeviSubsystem::new(&sl3, set).is_ok());

        let coxeter_orbit = BTreeSet::from([a1, a2, neg(a12)]);
        assert!(!is_levi_subsystem(&sl3, &coxeter_orbit).unwrap());
        assert!(matches!(
            LeviSubsystem::new(&sl3, coxeter_orbit),
            Err(RootDatumError::InvalidLevi(msg)) if msg.contains("symmetric")
        ));

        let not_closed = BTreeSet::from([a1, neg(a1), a2, neg(a2)]);
        assert!(!is_levi_subsystem(&sl3, &not_closed).unwrap());
        assert!(matches!(
            LeviSubsystem::new(&sl3, not_closed),
            Err(RootDatumError::InvalidLevi(msg)) if msg.contains("closed")
        ));

        assert!(is_levi_subsystem(&sl3, &BTreeSet::new()).unwrap());
        assert!(is_levi_subsystem(&sl3, &(0..6).collect()).unwrap());

        let gl3 = RootDatum::gl(3);
        let r = gl3.root_index_of(&[1, -1, 0]).unwrap();
        let set = BTreeSet::from([r, gl3.negation_index(r).unwrap()]);
        assert!(is_levi_subsystem(&gl3, &set).unwrap());

        assert!(matches!(
            is_levi_subsystem(&sl3, &BTreeSet::from([99])),
            Err(RootDatumError::IndexOutOfRange(99))
        ));
    }

    #[test]
    fn stabilizers_match_direct_weyl_enumeration() {
        let sl3 = RootDatum::sl(3);
        let gf = Gf::new(5, 1).unwrap();
        let full = LeviSubsystem::full(&sl3);

        let cases: Vec<(Vec<i64>, u64)> = vec![
            (vec![1, 1], 1),
            (vec![0, 1], 2),
            (vec![0, 0], 6),
        ];
        let gens: Vec<IMat> = vec![
            sl3.reflection_matrix(sl3.root_index_of(&[2, -1]).unwrap()),
            sl3.reflection_matrix(sl3.root_index_of(&[-1, 2]).unwrap()),
        ];
        let mut weyl: Vec<IMat> = vec![IMat::identity(2)];
        loop {
            let mut grew = false;
            let current = weyl.clone();
            for g in &gens {
                for m in &current {
                    let prod = g.mul(m);
                    if !weyl.contains(&prod) {
                        weyl.push(prod);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        assert_eq!(weyl.len(), 6);

        for (point_int, expected_stab) in cases {
            let point: Vec<FElt> = point_int.iter().map(|&c| gf.from_int(c)).collect();
            let fixed = weyl
                .iter()
                .filter(|m| {
                    let image: Vec<FElt> = (0..2)
                        .map(|r| {
                            (0..2).fold(gf.zero(), |acc, c| {
                                gf.add(acc, gf.mul(gf.from_int(m.at(r, c)), point[c]))
                            })
                        })
                        .collect();
                    image == point
                })
                .count() as u64;
            assert_eq!(fixed, expected_stab);
            let (orbit, stab) = weyl_stabilizer_order(&sl3, &full, &gf, &point).unwrap();
            assert_eq!(stab, expected_stab);
            assert_eq!(orbit * stab, 6);
        }

        let a1 = sl3.root_index_of(&[2, -1]).unwrap();
        let sub = LeviSubsystem::new(&sl3, [a1, sl3.negation_index(a1).unwrap()]).unwrap();
        let point = vec![gf.one(), gf.one()];
        assert_eq!(weyl_stabilizer_order(&sl3, &sub, &gf, &point).unwrap(), (2, 1));
        let empty = LeviSubsystem::empty();
        assert_eq!(weyl_stabilizer_order(&sl3, &empty, &gf, &point).unwrap(), (1, 1));

        let gf25 = Gf::new(5, 2).unwrap();
        let g = gf25.generator();
        let (orbit, stab) = weyl_stabilizer_order(&sl3, &full, &gf25, &[g, g]).unwrap();
        assert_eq!((orbit, stab), (6, 1));

        assert!(matches!(
            weyl_stabilizer_order(&sl3, &full, &gf, &[gf.one()]),
            Err(RootDatumError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn zero_point_is_fixed_by_the_whole_weyl_group() {
        for datum in [RootDatum::sl(3), adjoint(CartanFamily::B, 2), RootDatum::gl(3)] {
            let gf = Gf::new(3, 1).unwrap();
            let report = classify_and_validate(&datum).unwrap();
            let zero = vec![gf.zero(); datum.rank];
            let (orbit, stab) =
                weyl_stabilizer_order(&datum, &LeviSubsystem::full(&datum), &gf, &zero).unwrap();
            assert_eq!(orbit, 1);
            assert_eq!(stab, report.weyl_order);
        }
    }

    #[test]
    fn fundamental_group_known_values() {
        assert_eq!(fundamental_group_order(&RootDatum::sl(2)), 1);
        assert_eq!(fundamental_group_order(&RootDatum::pgl(2)), 2);
        assert_eq!(fundamental_group_order(&RootDatum::gl(2)), 1);
        assert_eq!(fundamental_group_order(&RootDatum::sl(3)), 1);
        assert_eq!(fundamental_group_order(&RootDatum::pgl(3)), 3);
        assert_eq!(fundamental_group_order(&RootDatum::sl(5)), 1);
        assert_eq!(fundamental_group_order(&RootDatum::gl(4)), 1);
        assert_eq!(fundamental_group_order(&adjoint(CartanFamily::G, 2)), 1);
        assert_eq!(fundamental_group_order(&adjoint(CartanFamily::B, 2)), 2);
        assert_eq!(fundamental_group_order(&RootDatum::torus(2)), 1);
    }

    fn random_unimodular(rank: usize, ops: &[(u8, usize, usize, i64)]) -> IMat {
        let mut u = IMat::identity(rank);
        for &(kind, i, j, c) in ops {
            let (i, j) = (i % rank, j % rank);
            match kind % 3 {
                0 if i != j => {
                    let row_j: Vec<i64> = (0..rank).map(|k| u.at(j, k)).collect();
                    for k in 0..rank {
                        *u.at_mut(i, k) += (c % 3) * row_j[k];
                    }
                }
                1 if i != j => {
                    for k in 0..rank {
                        let tmp = u.at(i, k);
                        *u.at_mut(i, k) = u.at(j, k);
                        *u.at_mut(j, k) = tmp;
                    }
                }
                _ => {
                    for k in 0..rank {
                        *u.at_mut(i, k) = -u.at(i, k);
                    }
                }
            }
        }
        u
    }

    proptest! {
        #[test]
        fn fundamental_group_invariant_under_basis_change(
            ops in proptest::collection::vec((0u8..3, 0usize..4, 0usize..4, -2i64..3), 0..8)
        ) {
            for (datum, expected) in [(RootDatum::pgl(3), 3u64), (adjoint(CartanFamily::B, 2), 2u64)] {
                let u = random_unimodular(datum.rank, &ops);
                let u_inv_t = u.inverse_unimodular().expect("ops build a unimodular matrix").transpose();
                let roots: Vec<Vec<i64>> = datum.roots.iter().map(|r| u.mul_vec(r)).collect();
                let coroots: Vec<Vec<i64>> = datum.coroots.iter().map(|r| u_inv_t.mul_vec(r)).collect();
                let moved = RootDatum::new(datum.rank, roots, coroots).unwrap();
                prop_assert_eq!(fundamental_group_order(&moved), expected);
            }
        }

        #[test]
        fn orbit_times_stabilizer_is_weyl_order(coords in proptest::collection::vec(0u64..5, 2)) {
            let sl3 = RootDatum::sl(3);
            let gf = Gf::new(5, 1).unwrap();
            let point: Vec<FElt> = coords.iter().map(|&c| gf.from_int(c as i64)).collect();
            let (orbit, stab) =
                weyl_stabilizer_order(&sl3, &LeviSubsystem::full(&sl3), &gf, &point).unwrap();
            prop_assert_eq!(orbit * stab, 6);
        }
    }

    #[test]
    fn torsion_report_matches_steinberg_table() {
        for n in 2..=6usize {
            for p in [3u64, 5] {
                let gl = torsion_report(&RootDatum::gl(n), p).unwrap();
                assert!(!gl.condition4_required, "GL_{n} at p = {p}");
                let sl = torsion_report(&RootDatum::sl(n), p).unwrap();
                assert_eq!(sl.condition4_required, n as u64 % p == 0, "SL_{n} at p = {p}");
            }
        }
        assert!(torsion_report(&adjoint(CartanFamily::F, 4), 3).unwrap().condition4_required);
        assert!(torsion_report(&adjoint(CartanFamily::E, 6), 3).unwrap().condition4_required);
        assert!(torsion_report(&adjoint(CartanFamily::E, 8), 5).unwrap().condition4_required);
        assert!(!torsion_report(&adjoint(CartanFamily::E, 8), 7).unwrap().condition4_required);
        assert!(!torsion_report(&adjoint(CartanFamily::F, 4), 5).unwrap().condition4_required);
        assert!(!torsion_report(&adjoint(CartanFamily::G, 2), 3).unwrap().condition4_required);
        assert!(!torsion_report(&RootDatum::sl(3), 5).unwrap().condition4_required);

        let sl3_at_3 = torsion_report(&RootDatum::sl(3), 3).unwrap();
        assert!(sl3_at_3.reason.contains("type A"));
        assert!(sl3_at_3.reason.contains('3'));

        assert!(matches!(
            torsion_report(&RootDatum::sl(3), 2),
            Err(RootDatumError::EvenPrime)
        ));
        assert!(matches!(
            torsion_report(&RootDatum::sl(3), 9),
            Err(RootDatumError::NotPrime(9))
        ));
    }

    #[test]
    fn reflections_negate_their_root_and_preserve_the_pairing() {
        for datum in [
            RootDatum::sl(3),
            RootDatum::gl(3),
            adjoint(CartanFamily::B, 2),
            adjoint(CartanFamily::G, 2),
        ] {
            for i in 0..datum.num_roots() {
                let m = datum.reflection_matrix(i);
                let n = datum.coreflection_matrix(i);
                let neg: Vec<i64> = datum.roots[i].iter().map(|c| -c).collect();
                assert_eq!(m.mul_vec(&datum.roots[i]), neg);
                for j in 0..datum.num_roots() {
                    for k in 0..datum.num_roots() {
                        assert_eq!(
                            dot(&m.mul_vec(&datum.roots[j]), &n.mul_vec(&datum.coroots[k])),
                            datum.pairing(j, k)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn serde_round_trips_are_stable() {
        let datum = RootDatum::sl(3);
        let json = serde_json::to_string(&datum).unwrap();
        let back: RootDatum = serde_json::from_str(&json).unwrap();
        assert_eq!(datum, back);

        let report = classify_and_validate(&datum).unwrap();
        let json1 = serde_json::to_string(&report).unwrap();
        let json2 = serde_json::to_string(&report).unwrap();
        assert_eq!(json1, json2);
        let back: ClassificationReport = serde_json::from_str(&json1).unwrap();
        assert_eq!(report, back);
    }
}
