//! Finite groups as explicit multiplication tables, and their linear
//! representations over cyclotomic fields.
//!
//! A [`GroupTable`] is built once by closing a generating set under an
//! abstract multiplication, then every later question (inverses, orders,
//! conjugacy classes, cosets) is table lookup. Elements are dense indices;
//! the closure returns the list of original keys so callers can translate
//! back. Representations are plain vectors of matrices parallel to an
//! element list, which keeps induction and character arithmetic free of any
//! lifetime coupling to the table.

use crate::cyclo::{Cyc, CycMat};
use num::rational::BigRational;
use num::BigInt;
use std::collections::HashMap;
use std::hash::Hash;
use thiserror::Error;

/// Errors from table construction and representation handling.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    /// The closure exceeded the element bound.
    #[error("group closure exceeded the bound of {0} elements")]
    ClosureBoundExceeded(usize),
    /// A member list is not closed under the group multiplication.
    #[error("the given subset is not a subgroup")]
    NotASubgroup,
    /// The images fail multiplicativity or shape requirements.
    #[error("not a representation: {0}")]
    NotARepresentation(String),
    /// Two class functions live on groups of different orders.
    #[error("class functions live on different groups")]
    GroupMismatch,
}

/// A finite group as a dense multiplication table.
///
/// Element `0` is the identity. Indices are assigned in breadth-first
/// discovery order from the generating set, so the same generators always
/// produce the same table.
#[derive(Debug, Clone)]
pub struct GroupTable {
    /// Number of elements.
    pub order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl GroupTable {
    /// Closes `generators` under `mul` starting from `identity` and fills in
    /// the full table.
    ///
    /// Returns the table together with the element keys in index order.
    pub fn from_mul_closure<K, F>(
        identity: K,
        generators: &[K],
        mul: F,
        max_elements: usize,
    ) -> Result<(GroupTable, Vec<K>), GroupError>
    where
        K: Clone + Eq + Hash,
        F: Fn(&K, &K) -> K,
    {
        let mut elements: Vec<K> = vec![identity.clone()];
        let mut index: HashMap<K, usize> = HashMap::new();
        index.insert(identity, 0);
        let mut next = 0;
        while next < elements.len() {
            let current = elements[next].clone();
            for g in generators {
                let product = mul(&current, g);
                if !index.contains_key(&product) {
                    if elements.len() >= max_elements {
                        return Err(GroupError::ClosureBoundExceeded(max_elements));
                    }
                    index.insert(product.clone(), elements.len());
                    elements.push(product);
                }
            }
            next += 1;
        }
        let order = elements.len();
        let mut table = vec![0u32; order * order];
        for i in 0..order {
            for j in 0..order {
                let product = mul(&elements[i], &elements[j]);
                let k = *index
                    .get(&product)
                    .expect("closure of a finite group is closed under products");
                table[i * order + j] = k as u32;
            }
        }
        let mut inv = vec![0u32; order];
        for i in 0..order {
            let j = (0..order)
                .find(|&j| table[i * order + j] == 0)
                .expect("every element of a finite group has an inverse");
            inv[i] = j as u32;
        }
        Ok((
            GroupTable {
                order,
                mul: table,
                inv,
            },
            elements,
        ))
    }

    /// Product of elements `a` and `b`.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    /// Inverse of element `a`.
    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// The identity element, always index `0`.
    pub fn identity(&self) -> usize {
        0
    }

    /// Order of the cyclic subgroup generated by `a`.
    pub fn element_order(&self, a: usize) -> u64 {
        let mut acc = a;
        let mut n = 1;
        while acc != 0 {
            acc = self.mul(acc, a);
            n += 1;
        }
        n
    }

    /// Exponent of the group: the least common multiple of all element
    /// orders.
    pub fn exponent(&self) -> u64 {
        (0..self.order).fold(1u64, |acc, a| num::integer::lcm(acc, self.element_order(a)))
    }

    /// Whether the members form a subgroup. Members may be listed in any
    /// order; the empty list is not a subgroup.
    pub fn is_subgroup(&self, members: &[usize]) -> bool {
        if members.is_empty() || members.iter().any(|&a| a >= self.order) {
            return false;
        }
        let set: Vec<bool> = {
            let mut s = vec![false; self.order];
            for &a in members {
                s[a] = true;
            }
            s
        };
        members
            .iter()
            .all(|&a| members.iter().all(|&b| set[self.mul(a, b)]))
    }

    /// Closure of the given elements as a sorted member list.
    pub fn subgroup_closure(&self, generators: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut members = vec![0usize];
        let mut next = 0;
        while next < members.len() {
            let a = members[next];
            for &g in generators {
                let product = self.mul(a, g);
                if !seen[product] {
                    seen[product] = true;
                    members.push(product);
                }
            }
            next += 1;
        }
        members.sort_unstable();
        members
    }

    /// Representatives `t` of the left cosets `tS`, smallest index first;
    /// the first representative is the identity.
    ///
    /// Panics when `members` is not a subgroup; call [`GroupTable::is_subgroup`]
    /// on untrusted input first.
    pub fn left_transversal(&self, members: &[usize]) -> Vec<usize> {
        assert!(self.is_subgroup(members), "transversal of a non-subgroup");
        let mut covered = vec![false; self.order];
        let mut reps = Vec::new();
        for t in 0..self.order {
            if covered[t] {
                continue;
            }
            reps.push(t);
            for &s in members {
                covered[self.mul(t, s)] = true;
            }
        }
        reps
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.order];
        let mut classes = Vec::new();
        for x in 0..self.order {
            if assigned[x] {
                continue;
            }
            let mut class = Vec::new();
            for g in 0..self.order {
                let y = self.mul(self.mul(g, x), self.inv(g));
                if !assigned[y] {
                    assigned[y] = true;
                    class.push(y);
                }
            }
            class.sort_unstable();
            classes.push(class);
        }
        classes
    }

    /// Full check of the group axioms on the stored table. Cubic in the
    /// order; meant for tests and small groups.
    pub fn validate(&self) -> Result<(), GroupError> {
        let n = self.order;
        let bad = |msg: &str| Err(GroupError::NotARepresentation(msg.into()));
        for a in 0..n {
            if self.mul(0, a) != a || self.mul(a, 0) != a {
                return bad("identity law fails");
            }
            if self.mul(a, self.inv(a)) != 0 || self.mul(self.inv(a), a) != 0 {
                return bad("inverse law fails");
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return bad("associativity fails");
                    }
                }
            }
        }
        Ok(())
    }
}

/// A linear representation: one invertible matrix per element of some
/// element list, in the same order.
#[derive(Debug, Clone)]
pub struct LinearRep {
    /// Dimension of the representation space.
    pub dim: usize,
    /// Image matrices, parallel to the element list the caller fixed.
    pub images: Vec<CycMat>,
}

impl LinearRep {
    /// Trace of each image.
    pub fn character(&self) -> Vec<Cyc> {
        self.images.iter().map(CycMat::trace).collect()
    }

    /// Checks multiplicativity against a full group table, the identity
    /// image, and square shapes. Quadratic in the order times a matrix
    /// multiplication; meant for tests and small groups.
    pub fn validate_on(&self, table: &GroupTable) -> Result<(), GroupError> {
        if self.images.len() != table.order {
            return Err(GroupError::NotARepresentation(format!(
                "{} images for a group of order {}",
                self.images.len(),
                table.order
            )));
        }
        for (i, m) in self.images.iter().enumerate() {
            if m.rows != self.dim || m.cols != self.dim {
                return Err(GroupError::NotARepresentation(format!(
                    "image {i} is {}x{}, expected {}x{}",
                    m.rows, m.cols, self.dim, self.dim
                )));
            }
        }
        if !self.images[0].eq_value(&CycMat::identity(self.dim, 1)) {
            return Err(GroupError::NotARepresentation(
                "identity does not map to the identity matrix".into(),
            ));
        }
        for a in 0..table.order {
            for b in 0..table.order {
                let product = self.images[a].mul(&self.images[b]);
                if !product.eq_value(&self.images[table.mul(a, b)]) {
                    return Err(GroupError::NotARepresentation(format!(
                        "images of {a} and {b} do not multiply to the image of their product"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_subgroup_rep(
    table: &GroupTable,
    subgroup: &[usize],
    images: &[CycMat],
) -> Result<(usize, HashMap<usize, usize>), GroupError> {
    if !table.is_subgroup(subgroup) {
        return Err(GroupError::NotASubgroup);
    }
    if images.len() != subgroup.len() {
        return Err(GroupError::NotARepresentation(format!(
            "{} images for a subgroup of order {}",
            images.len(),
            subgroup.len()
        )));
    }
    let dim = images
        .first()
        .map(|m| m.rows)
        .ok_or(GroupError::NotASubgroup)?;
    for m in images {
        if m.rows != dim || m.cols != dim {
            return Err(GroupError::NotARepresentation(
                "subgroup images have mixed shapes".into(),
            ));
        }
    }
    let position: HashMap<usize, usize> = subgroup
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, k))
        .collect();
    for (i, &a) in subgroup.iter().enumerate() {
        for (j, &b) in subgroup.iter().enumerate() {
            let k = position[&table.mul(a, b)];
            if !images[i].mul(&images[j]).eq_value(&images[k]) {
                return Err(GroupError::NotARepresentation(format!(
                    "subgroup images of {a} and {b} do not multiply correctly"
                )));
            }
        }
    }
    Ok((dim, position))
}

/// Induces a representation of a subgroup up to the whole group.
///
/// `subgroup` lists parent-group indices and `sub_images` is parallel to
/// it. The induced space is indexed by the left cosets; the image of `g`
/// has block `(i, j)` equal to the subgroup image of `t_i^{-1} g t_j` when
/// that element lies in the subgroup and zero otherwise.
pub fn induce_rep(
    table: &GroupTable,
    subgroup: &[usize],
    sub_images: &[CycMat],
) -> Result<LinearRep, GroupError> {
    let (dim, position) = check_subgroup_rep(table, subgroup, sub_images)?;
    let reps = table.left_transversal(subgroup);
    let r = reps.len();
    let mut coset_of = vec![usize::MAX; table.order];
    for (i, &t) in reps.iter().enumerate() {
        for &s in subgroup {
            coset_of[table.mul(t, s)] = i;
        }
    }
    let level = sub_images
        .iter()
        .flat_map(|m| m.a.iter().map(Cyc::level))
        .max()
        .unwrap_or(1);
    let mut images = Vec::with_capacity(table.order);
    for g in 0..table.order {
        let mut image = CycMat::zero(r * dim, r * dim, level);
        for (j, &t_j) in reps.iter().enumerate() {
            let x = table.mul(g, t_j);
            let i = coset_of[x];
            let s = table.mul(table.inv(reps[i]), x);
            let block = &sub_images[position[&s]];
            for br in 0..dim {
                for bc in 0..dim {
                    *image.at_mut(i * dim + br, j * dim + bc) = block.at(br, bc).clone();
                }
            }
        }
        images.push(image);
    }
    Ok(LinearRep {
        dim: r * dim,
        images,
    })
}

/// Inner product of two class functions given elementwise:
/// the average over the group of the first times the conjugate of the
/// second.
pub fn character_pairing(table: &GroupTable, f: &[Cyc], g: &[Cyc]) -> Result<Cyc, GroupError> {
    if f.len() != table.order || g.len() != table.order {
        return Err(GroupError::GroupMismatch);
    }
    let mut sum = Cyc::zero(1);
    for (a, b) in f.iter().zip(g) {
        sum = sum.add(&a.mul(&b.conj()));
    }
    let scale = BigRational::new(BigInt::from(1), BigInt::from(table.order as i64));
    Ok(sum.scale(&scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
        b.iter().map(|&i| a[i]).collect()
    }

    fn symmetric_3() -> (GroupTable, Vec<Vec<usize>>) {
        let id = vec![0, 1, 2];
        let swap01 = vec![1, 0, 2];
        let swap12 = vec![0, 2, 1];
        GroupTable::from_mul_closure(id, &[swap01, swap12], |a, b| compose(a, b), 100).unwrap()
    }

    fn sign_of(perm: &[usize]) -> i64 {
        let mut sign = 1;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    sign = -sign;
                }
            }
        }
        sign
    }

    #[test]
    fn closure_builds_a_valid_table() {
        let (table, elements) = symmetric_3();
        assert_eq!(table.order, 6);
        assert_eq!(elements.len(), 6);
        table.validate().unwrap();
        assert_eq!(table.exponent(), 6);
        let sizes: Vec<usize> = table
            .conjugacy_classes()
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(sizes.iter().sum::<usize>(), 6);
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3]);
    }

    #[test]
    fn closure_respects_the_bound() {
        let id = vec![0, 1, 2];
        let cycle = vec![1, 2, 0];
        assert_eq!(
            GroupTable::from_mul_closure(id.clone(), &[cycle.clone()], |a, b| compose(a, b), 2)
                .unwrap_err(),
            GroupError::ClosureBoundExceeded(2)
        );
        let (table, _) =
            GroupTable::from_mul_closure(id, &[cycle], |a, b| compose(a, b), 3).unwrap();
        assert_eq!(table.order, 3);
        assert_eq!(table.element_order(1), 3);
    }

    #[test]
    fn subgroup_queries_work() {
        let (table, elements) = symmetric_3();
        let rotations: Vec<usize> = (0..6)
            .filter(|&i| sign_of(&elements[i]) == 1)
            .collect();
        assert!(table.is_subgroup(&rotations));
        assert!(!table.is_subgroup(&[]));
        let transposition = (1..6).find(|&i| sign_of(&elements[i]) == -1).unwrap();
        assert!(!table.is_subgroup(&[0, transposition, rotations[1]]));
        assert_eq!(table.subgroup_closure(&[rotations[1]]), rotations);
        let transversal = table.left_transversal(&rotations);
        assert_eq!(transversal.len(), 2);
        assert_eq!(transversal[0], 0);
    }

    fn sign_rep(elements: &[Vec<usize>]) -> Vec<CycMat> {
        elements
            .iter()
            .map(|p| {
                let mut m = CycMat::zero(1, 1, 1);
                *m.at_mut(0, 0) = Cyc::from_int(sign_of(p));
                m
            })
            .collect()
    }

    #[test]
    fn inducing_from_the_whole_group_returns_the_same_rep() {
        let (table, elements) = symmetric_3();
        let whole: Vec<usize> = (0..6).collect();
        let sign = sign_rep(&elements);
        let induced = induce_rep(&table, &whole, &sign).unwrap();
        assert_eq!(induced.dim, 1);
        for (a, b) in induced.images.iter().zip(&sign) {
            assert!(a.eq_value(b));
        }
        induced.validate_on(&table).unwrap();
    }

    #[test]
    fn inducing_the_trivial_character_from_the_trivial_subgroup_gives_the_regular_rep() {
        let (table, _) = symmetric_3();
        let trivial = vec![CycMat::identity(1, 1)];
        let regular = induce_rep(&table, &[0], &trivial).unwrap();
        assert_eq!(regular.dim, 6);
        regular.validate_on(&table).unwrap();
        let chi = regular.character();
        assert!(chi[0].eq_value(&Cyc::from_int(6)));
        for value in &chi[1..] {
            assert!(value.is_zero());
        }
        let trivial_chi: Vec<Cyc> = (0..6).map(|_| Cyc::one(1)).collect();
        let pairing = character_pairing(&table, &chi, &trivial_chi).unwrap();
        assert!(pairing.eq_value(&Cyc::from_int(1)));
    }

    #[test]
    fn induction_in_stages_matches_direct_induction() {
        let (table, elements) = symmetric_3();
        let rotations: Vec<usize> = (0..6)
            .filter(|&i| sign_of(&elements[i]) == 1)
            .collect();
        let trivial_small = vec![CycMat::identity(1, 1)];
        let sub_images = induce_rep_on_subgroup(&table, &rotations, &[0], &trivial_small);
        let staged = induce_rep(&table, &rotations, &sub_images).unwrap();
        let direct = induce_rep(&table, &[0], &trivial_small).unwrap();
        assert_eq!(staged.dim, 6);
        assert_eq!(direct.dim, 6);
        for (a, b) in staged.character().iter().zip(&direct.character()) {
            assert!(a.eq_value(b));
        }
    }

    fn induce_rep_on_subgroup(
        table: &GroupTable,
        subgroup: &[usize],
        inner: &[usize],
        inner_images: &[CycMat],
    ) -> Vec<CycMat> {
        let (sub_table, sub_elements) = GroupTable::from_mul_closure(
            0usize,
            &subgroup.iter().copied().filter(|&s| s != 0).collect::<Vec<_>>(),
            |&a, &b| table.mul(a, b),
            table.order,
        )
        .unwrap();
        let inner_in_sub: Vec<usize> = inner
            .iter()
            .map(|&x| sub_elements.iter().position(|&e| e == x).unwrap())
            .collect();
        let lifted = induce_rep(&sub_table, &inner_in_sub, inner_images).unwrap();
        let mut images = vec![CycMat::identity(lifted.dim, 1); subgroup.len()];
        for (k, &s) in subgroup.iter().enumerate() {
            let idx = sub_elements.iter().position(|&e| e == s).unwrap();
            images[k] = lifted.images[idx].clone();
        }
        images
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let (table, elements) = symmetric_3();
        let transposition = (1..6).find(|&i| sign_of(&elements[i]) == -1).unwrap();
        let rotation = (1..6).find(|&i| sign_of(&elements[i]) == 1).unwrap();
        assert_eq!(
            induce_rep(
                &table,
                &[0, transposition, rotation],
                &[
                    CycMat::identity(1, 1),
                    CycMat::identity(1, 1),
                    CycMat::identity(1, 1)
                ],
            )
            .unwrap_err(),
            GroupError::NotASubgroup
        );
        let mut wrong = CycMat::zero(1, 1, 1);
        *wrong.at_mut(0, 0) = Cyc::from_int(2);
        assert!(matches!(
            induce_rep(&table, &[0, transposition], &[CycMat::identity(1, 1), wrong])
                .unwrap_err(),
            GroupError::NotARepresentation(_)
        ));
        let chi: Vec<Cyc> = (0..6).map(|_| Cyc::one(1)).collect();
        assert_eq!(
            character_pairing(&table, &chi, &chi[..3].to_vec()).unwrap_err(),
            GroupError::GroupMismatch
        );
    }

    #[test]
    fn sign_character_is_orthonormal_against_the_trivial_one() {
        let (table, elements) = symmetric_3();
        let sign: Vec<Cyc> = elements
            .iter()
            .map(|p| Cyc::from_int(sign_of(p)))
            .collect();
        let trivial: Vec<Cyc> = (0..6).map(|_| Cyc::one(1)).collect();
        let self_pairing = character_pairing(&table, &sign, &sign).unwrap();
        assert!(self_pairing.eq_value(&Cyc::from_int(1)));
        let cross = character_pairing(&table, &sign, &trivial).unwrap();
        assert!(cross.is_zero());
    }
}
