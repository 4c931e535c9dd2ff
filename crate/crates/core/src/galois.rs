//! Finite Galois actions on root data.
//!
//! An action is given by integer matrices on the character lattice that
//! permute the roots; the cocharacter side carries the contragredient
//! action. The operations here compute root orbits with their negation
//! pairing ([`compute_orbits`]) and the two rational invariant-subspace
//! tests that decide ellipticity of the ambient torus and anisotropy of
//! the relative center ([`ellipticity_report`]). The Galois group itself is
//! never materialized as a field extension: only its image in the
//! automorphisms of the datum and the ramification index matter.

use crate::exact::{qmat_nullspace, qmat_rank, to_rational_rows, IMat};
use crate::rootdata::{dot, LeviSubsystem, RootDatum, RootDatumError};
use crate::DEFAULT_MAX_ELEMENTS;
use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use thiserror::Error;

/// Errors from building or querying a Galois action.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaloisError {
    /// Closure under multiplication exceeded the element bound.
    #[error("group closure exceeded the bound of {0} elements")]
    ClosureBoundExceeded(usize),
    /// A generator is not invertible over the integers.
    #[error("generator {0} is not unimodular")]
    GeneratorNotUnimodular(usize),
    /// A generator moves some root outside the root set.
    #[error("generator {index} maps root {root} outside the root set")]
    GeneratorDoesNotPermuteRoots {
        /// Position of the offending generator.
        index: usize,
        /// Root index whose image is not a root.
        root: usize,
    },
    /// A generator permutes the roots but its contragredient action does not
    /// send the matching coroots onto each other.
    #[error("generator {index} does not respect the root/coroot pairing at root {root}")]
    GeneratorBreaksPairing {
        /// Position of the offending generator.
        index: usize,
        /// Root index where the coroot images disagree.
        root: usize,
    },
    /// A generator has the wrong dimensions for the datum.
    #[error("generator {0} does not match the datum rank")]
    GeneratorShape(usize),
    /// The ramification index must be positive.
    #[error("ramification index must be positive")]
    BadRamificationIndex,
    /// The Levi subsystem is not stable under the action.
    #[error("Levi subsystem is not stable under the Galois action")]
    LeviNotGaloisStable,
    /// The underlying datum failed validation.
    #[error(transparent)]
    Datum(#[from] RootDatumError),
}

/// A finite group of automorphisms of a root datum, with a tame
/// ramification index fixing the depth grid `(1/e)ℤ`.
///
/// Construction validates everything: each generator must be unimodular,
/// permute the root set, and match the contragredient permutation of the
/// coroots; the generated group must close up within the element bound.
#[derive(Debug, Clone)]
pub struct GaloisAction {
    datum: RootDatum,
    generators: Vec<IMat>,
    ramification_index: u32,
    group_elements: Vec<IMat>,
    generator_root_perms: Vec<Vec<usize>>,
}

impl GaloisAction {
    /// Builds an action with the default closure bound of
    /// [`DEFAULT_MAX_ELEMENTS`] group elements.
    pub fn new(
        datum: RootDatum,
        generators: Vec<IMat>,
        ramification_index: u32,
    ) -> Result<Self, GaloisError> {
        Self::with_bound(datum, generators, ramification_index, DEFAULT_MAX_ELEMENTS)
    }

    /// Builds an action, guarding the group closure by an explicit bound.
    pub fn with_bound(
        datum: RootDatum,
        generators: Vec<IMat>,
        ramification_index: u32,
        max_elements: usize,
    ) -> Result<Self, GaloisError> {
        datum.validate()?;
        if ramification_index == 0 {
            return Err(GaloisError::BadRamificationIndex);
        }
        let mut generator_root_perms = Vec::new();
        for (gi, g) in generators.iter().enumerate() {
            if g.rows != datum.rank || g.cols != datum.rank {
                return Err(GaloisError::GeneratorShape(gi));
            }
            let inv = g
                .inverse_unimodular()
                .ok_or(GaloisError::GeneratorNotUnimodular(gi))?;
            let contragredient = inv.transpose();
            let mut perm = Vec::with_capacity(datum.num_roots());
            for r in 0..datum.num_roots() {
                let image = g.mul_vec(&datum.roots[r]);
                let Some(s) = datum.root_index_of(&image) else {
                    return Err(GaloisError::GeneratorDoesNotPermuteRoots { index: gi, root: r });
                };
                perm.push(s);
            }
            for (r, &s) in perm.iter().enumerate() {
                if contragredient.mul_vec(&datum.coroots[r]) != datum.coroots[s] {
                    return Err(GaloisError::GeneratorBreaksPairing { index: gi, root: r });
                }
            }
            generator_root_perms.push(perm);
        }
        let group_elements = close_group(&generators, datum.rank, max_elements)?;
        Ok(GaloisAction {
            datum,
            generators,
            ramification_index,
            group_elements,
            generator_root_perms,
        })
    }

    /// The underlying root datum.
    pub fn datum(&self) -> &RootDatum {
        &self.datum
    }

    /// The generating matrices on `X*`.
    pub fn generators(&self) -> &[IMat] {
        &self.generators
    }

    /// Every element of the generated group, identity first.
    pub fn group_elements(&self) -> &[IMat] {
        &self.group_elements
    }

    /// Order of the generated group.
    pub fn order(&self) -> usize {
        self.group_elements.len()
    }

    /// Ramification index `e`; depths live in `(1/e)ℤ`.
    pub fn ramification_index(&self) -> u32 {
        self.ramification_index
    }

    /// Root permutations induced by the generators, parallel to
    /// [`GaloisAction::generators`].
    pub fn generator_root_perms(&self) -> &[Vec<usize>] {
        &self.generator_root_perms
    }

    /// Contragredient matrices acting on `X_*`, parallel to the generators.
    pub fn cogenerators(&self) -> Vec<IMat> {
        self.generators
            .iter()
            .map(|g| {
                g.inverse_unimodular()
                    .expect("generators were validated as unimodular")
                    .transpose()
            })
            .collect()
    }
}

fn close_group(
    generators: &[IMat],
    rank: usize,
    max_elements: usize,
) -> Result<Vec<IMat>, GaloisError> {
    let id = IMat::identity(rank);
    let mut seen: HashSet<Vec<i64>> = HashSet::from([id.a.clone()]);
    let mut elements = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in generators {
            let prod = g.mul(&m);
            if !seen.contains(&prod.a) {
                if elements.len() >= max_elements {
                    return Err(GaloisError::ClosureBoundExceeded(max_elements));
                }
                seen.insert(prod.a.clone());
                elements.push(prod.clone());
                queue.push_back(prod);
            }
        }
    }
    Ok(elements)
}

/// Partition of the root indices into Galois orbits, together with the
/// pairing of each orbit with the orbit of the negated roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitSet {
    /// Orbits as sorted index lists, ordered by smallest member.
    pub orbits: Vec<Vec<usize>>,
    /// `pair_map[k]` is the orbit consisting of the negatives of orbit `k`.
    pub pair_map: Vec<usize>,
}

impl OrbitSet {
    /// Index of the orbit containing a root.
    pub fn orbit_of(&self, root: usize) -> usize {
        self.orbits
            .iter()
            .position(|o| o.binary_search(&root).is_ok())
            .expect("root index belongs to some orbit")
    }

    /// Canonical representative of the orbit pair `{O, −O}` containing the
    /// orbit: the smaller of the two orbit indices.
    pub fn pair_class(&self, orbit: usize) -> usize {
        orbit.min(self.pair_map[orbit])
    }

    /// Sorted canonical representatives of all orbit pairs.
    pub fn pair_classes(&self) -> Vec<usize> {
        let mut classes: Vec<usize> = (0..self.orbits.len())
            .map(|k| self.pair_class(k))
            .collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }
}

/// Computes the orbit partition of the roots under the action, with the
/// negation pairing between orbits.
pub fn compute_orbits(action: &GaloisAction) -> OrbitSet {
    let n = action.datum().num_roots();
    let perms = action.generator_root_perms();
    let mut orbit_of: Vec<Option<usize>> = vec![None; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if orbit_of[start].is_some() {
            continue;
        }
        let id = orbits.len();
        let mut members = vec![start];
        orbit_of[start] = Some(id);
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            for perm in perms {
                let s = perm[r];
                if orbit_of[s].is_none() {
                    orbit_of[s] = Some(id);
                    members.push(s);
                    queue.push_back(s);
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    let pair_map = orbits
        .iter()
        .map(|members| {
            let neg = action
                .datum()
                .negation_index(members[0])
                .expect("validated data are closed under negation");
            orbit_of[neg].expect("all roots are assigned")
        })
        .collect();
    OrbitSet { orbits, pair_map }
}

/// Ellipticity and anisotropy verdicts for a Galois-stable Levi.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticityReport {
    /// Whether the torus is elliptic in the ambient group: the Galois
    /// invariants of `ℚΦ∨` vanish.
    pub t_elliptic_in_g: bool,
    /// Whether the center of the Levi relative to the ambient center is
    /// anisotropic: the invariants of `ann(Φ_H) ∩ ℚΦ∨` vanish.
    pub zh_mod_zg_anisotropic: bool,
}

fn rational_mul_vec(m: &IMat, v: &[BigRational]) -> Vec<BigRational> {
    (0..m.rows)
        .map(|r| {
            (0..m.cols)
                .map(|c| BigRational::from_integer(m.at(r, c).into()) * &v[c])
                .fold(BigRational::zero(), |acc, x| acc + x)
        })
        .collect()
}

/// Dimension of the joint fixed space of the matrices restricted to the
/// span of `basis`.
fn invariants_dimension(matrices: &[IMat], basis: &[Vec<BigRational>]) -> usize {
    if basis.is_empty() {
        return 0;
    }
    let dim = basis[0].len();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for m in matrices {
        let images: Vec<Vec<BigRational>> = basis.iter().map(|v| rational_mul_vec(m, v)).collect();
        for c in 0..dim {
            rows.push(
                (0..basis.len())
                    .map(|t| &images[t][c] - &basis[t][c])
                    .collect(),
            );
        }
    }
    if rows.is_empty() {
        return basis.len();
    }
    qmat_nullspace(&rows).len()
}

fn span_basis(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut basis: Vec<Vec<i64>> = Vec::new();
    let mut rank = 0;
    for row in rows {
        let mut candidate = basis.clone();
        candidate.push(row.clone());
        let r = qmat_rank(&to_rational_rows(&candidate));
        if r > rank {
            rank = r;
            basis.push(row.clone());
        }
    }
    basis
}

/// Tests ellipticity of the torus and anisotropy of the relative center of
/// a Galois-stable Levi subsystem, by exact rational linear algebra.
pub fn ellipticity_report(
    action: &GaloisAction,
    levi: &LeviSubsystem,
) -> Result<EllipticityReport, GaloisError> {
    for perm in action.generator_root_perms() {
        for &i in &levi.members {
            if i >= perm.len() {
                return Err(GaloisError::Datum(RootDatumError::IndexOutOfRange(i)));
            }
            if !levi.contains(perm[i]) {
                return Err(GaloisError::LeviNotGaloisStable);
            }
        }
    }
    let cogens = action.cogenerators();
    let datum = action.datum();
    let coroot_basis = span_basis(&datum.coroots);
    let coroot_basis_q: Vec<Vec<BigRational>> = to_rational_rows(&coroot_basis);
    let t_elliptic_in_g = invariants_dimension(&cogens, &coroot_basis_q) == 0;

    let relative_basis: Vec<Vec<BigRational>> = if levi.members.is_empty() {
        coroot_basis_q.clone()
    } else {
        let constraint_rows: Vec<Vec<BigRational>> = levi
            .members
            .iter()
            .map(|&i| {
                coroot_basis
                    .iter()
                    .map(|b| BigRational::from_integer(dot(&datum.roots[i], b).into()))
                    .collect()
            })
            .collect();
        qmat_nullspace(&constraint_rows)
            .into_iter()
            .map(|x| {
                let mut v = vec![BigRational::zero(); datum.rank];
                for (j, coeff) in x.iter().enumerate() {
                    for (k, slot) in v.iter_mut().enumerate() {
                        *slot += coeff * BigRational::from_integer(coroot_basis[j][k].into());
                    }
                }
                v
            })
            .collect()
    };
    let zh_mod_zg_anisotropic = invariants_dimension(&cogens, &relative_basis) == 0;
    Ok(EllipticityReport {
        t_elliptic_in_g,
        zh_mod_zg_anisotropic,
    })
}
