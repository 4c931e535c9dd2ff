//! Recovery of twisted Levi towers from character depth data.
//!
//! [`CharacterData`] is the computable shadow of a character of the torus:
//! one depth per Galois orbit pair, the depth of the top-level
//! representation, the base Levi subsystem, and optionally the leading
//! residue coefficients that feed the genericity checks. [`recover_tower`]
//! turns it into the chain of depths and nested Levi subsystems, using the
//! direct description (jumps are the distinct positive orbit depths outside
//! the base Levi) and cross-checking it against a top-down recursive
//! construction on every call.
//!
//! Depth entries for orbit pairs inside the base Levi must be zero, and
//! entries outside it must be positive: the recursion only sees jumps
//! outside the base, so any other configuration cannot arise from a
//! character and is rejected instead of repaired.

use crate::fp::{FElt, FieldEmbedding, FieldError, Gf};
use crate::galois::{compute_orbits, GaloisAction, GaloisError, OrbitSet};
use crate::genericity::{assemble_residue_functional, ge_check, GeReport, GenericityError};
use crate::rat::{denominator_divides, format_rat, Rat};
use crate::rootdata::{
    fundamental_group_order, is_levi_subsystem, torsion_report, LeviSubsystem, RootDatumError,
};
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Errors from character-data validation and tower recovery.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TowerError {
    /// A tower level is not a Levi subsystem; the input cannot come from a
    /// permissible character.
    #[error("level {0} of the tower is not a Levi subsystem")]
    NotLeviClosed(usize),
    /// A tower level is not stable under the Galois action.
    #[error("level {0} of the tower is not Galois-stable")]
    NotGaloisStable(usize),
    /// An orbit pair has no depth entry.
    #[error("no depth entry for the orbit pair of root {0}")]
    MissingOrbitDepth(usize),
    /// An orbit pair has more than one depth entry.
    #[error("a second depth entry for the orbit pair of root {0}")]
    DuplicateOrbitDepth(usize),
    /// A depth is negative or off the grid `(1/e)ℤ`.
    #[error("depth {depth} at root {root} is not a nonnegative multiple of 1/{e}")]
    DepthOutsideGrid {
        /// Formatted offending depth.
        depth: String,
        /// A root of the orbit pair carrying the depth.
        root: usize,
        /// Ramification index fixing the grid.
        e: u32,
    },
    /// The top-level depth is negative or off the grid.
    #[error("top-level depth {depth} is not a nonnegative multiple of 1/{e}")]
    RhoDepthOutsideGrid {
        /// Formatted offending depth.
        depth: String,
        /// Ramification index fixing the grid.
        e: u32,
    },
    /// The top-level depth is smaller than some orbit depth.
    #[error("top-level depth {rho} is smaller than the orbit depth {orbit}")]
    RhoDepthTooSmall {
        /// Formatted top-level depth.
        rho: String,
        /// Formatted larger orbit depth.
        orbit: String,
    },
    /// An orbit pair inside the base Levi carries a positive depth.
    #[error("orbit pair of root {0} lies inside the base Levi but has positive depth")]
    PositiveDepthInsideLevi(usize),
    /// An orbit pair outside the base Levi carries depth zero.
    #[error("orbit pair of root {0} lies outside the base Levi but has depth zero")]
    ZeroDepthOutsideLevi(usize),
    /// A residue value is zero, contradicting the jump depth it annotates.
    #[error("residue value for the orbit pair of root {0} is zero")]
    ZeroResidueValue(usize),
    /// A residue value is not an element of the stated field.
    #[error("residue value {value} at root {root} is not an element of the field")]
    ResidueOutsideField {
        /// The packed value supplied.
        value: u64,
        /// A root of the orbit pair carrying the value.
        root: usize,
    },
    /// A second residue entry for one orbit pair.
    #[error("a second residue entry for the orbit pair of root {0}")]
    DuplicateResidueEntry(usize),
    /// Residue data is required for the requested check but missing.
    #[error("residue data is required but missing")]
    MissingResidueData,
    /// The stored residue field does not embed into the requested one.
    #[error("residue data over F_{have_p}^{have_m} does not embed into the requested F_{p}^{m}")]
    ResidueFieldMismatch {
        /// Characteristic of the stored residue field.
        have_p: u64,
        /// Degree of the stored residue field.
        have_m: usize,
        /// Requested characteristic.
        p: u64,
        /// Requested degree.
        m: usize,
    },
    /// The Galois action failed validation.
    #[error(transparent)]
    Galois(#[from] GaloisError),
    /// The root datum failed validation.
    #[error(transparent)]
    Datum(#[from] RootDatumError),
    /// The requested check field could not be constructed.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// A genericity check on a tower level failed to run.
    #[error(transparent)]
    Genericity(#[from] GenericityError),
}

/// Leading-coefficient residue data over an explicit finite field.
///
/// Each orbit pair gets at most one entry, but the entry stays keyed by the
/// exact root the caller named: a value attaches to one coroot, and the
/// value at the opposite coroot is its negative, so collapsing the key to
/// the pair would lose a sign.
#[derive(Debug, Clone)]
pub struct ResidueData {
    /// The residue field `F_{p^m}`.
    pub gf: Gf,
    /// Nonzero leading coefficients, keyed by representative root index.
    pub values: BTreeMap<usize, FElt>,
}

/// Depth data of a character of the torus, validated against a Galois
/// action.
///
/// Depths are keyed by orbit pair: supplying entries for both an orbit and
/// its negative is a duplicate, which enforces that paired orbits carry
/// equal depth data.
#[derive(Debug, Clone)]
pub struct CharacterData {
    action: GaloisAction,
    orbit_set: OrbitSet,
    orbit_depths: BTreeMap<usize, Rat>,
    rho_depth: Rat,
    levi_h: LeviSubsystem,
    residues: Option<ResidueData>,
}

impl CharacterData {
    /// Validates and assembles character data.
    ///
    /// `orbit_depths` entries are keyed by any root index of the orbit pair
    /// they describe; each pair must receive exactly one entry. Residue
    /// values, when present, are packed field elements keyed the same way.
    pub fn new(
        action: GaloisAction,
        orbit_depths: &[(usize, Rat)],
        rho_depth: Rat,
        levi_h: LeviSubsystem,
        residues: Option<(Gf, Vec<(usize, u64)>)>,
    ) -> Result<Self, TowerError> {
        let orbit_set = compute_orbits(&action);
        let datum = action.datum();
        let e = action.ramification_index();

        for &i in &levi_h.members {
            if i >= datum.num_roots() {
                return Err(RootDatumError::IndexOutOfRange(i).into());
            }
        }
        let member_set: BTreeSet<usize> = levi_h.members.iter().copied().collect();
        if !is_levi_subsystem(datum, &member_set)? {
            return Err(TowerError::NotLeviClosed(0));
        }
        for perm in action.generator_root_perms() {
            if levi_h.members.iter().any(|&i| !levi_h.contains(perm[i])) {
                return Err(TowerError::NotGaloisStable(0));
            }
        }

        let mut depths: BTreeMap<usize, (usize, Rat)> = BTreeMap::new();
        for &(root, depth) in orbit_depths {
            if root >= datum.num_roots() {
                return Err(RootDatumError::IndexOutOfRange(root).into());
            }
            let pair = orbit_set.pair_class(orbit_set.orbit_of(root));
            if depths.insert(pair, (root, depth)).is_some() {
                return Err(TowerError::DuplicateOrbitDepth(root));
            }
        }
        for pair in orbit_set.pair_classes() {
            let first_root = orbit_set.orbits[pair][0];
            let Some(&(root, depth)) = depths.get(&pair) else {
                return Err(TowerError::MissingOrbitDepth(first_root));
            };
            if !denominator_divides(depth, i64::from(e)) {
                return Err(TowerError::DepthOutsideGrid {
                    depth: format_rat(depth),
                    root,
                    e,
                });
            }
            let inside = levi_h.contains(first_root);
            if inside && !depth.is_zero() {
                return Err(TowerError::PositiveDepthInsideLevi(root));
            }
            if !inside && depth.is_zero() {
                return Err(TowerError::ZeroDepthOutsideLevi(root));
            }
        }
        if !denominator_divides(rho_depth, i64::from(e)) {
            return Err(TowerError::RhoDepthOutsideGrid {
                depth: format_rat(rho_depth),
                e,
            });
        }
        if let Some((_, &(_, max_depth))) = depths.iter().max_by_key(|(_, &(_, d))| d) {
            if rho_depth < max_depth {
                return Err(TowerError::RhoDepthTooSmall {
                    rho: format_rat(rho_depth),
                    orbit: format_rat(max_depth),
                });
            }
        }

        let residues = match residues {
            None => None,
            Some((gf, entries)) => {
                let mut values: BTreeMap<usize, FElt> = BTreeMap::new();
                let mut seen_pairs: BTreeSet<usize> = BTreeSet::new();
                for (root, value) in entries {
                    if root >= datum.num_roots() {
                        return Err(RootDatumError::IndexOutOfRange(root).into());
                    }
                    if value >= gf.order() {
                        return Err(TowerError::ResidueOutsideField { value, root });
                    }
                    if value == 0 {
                        return Err(TowerError::ZeroResidueValue(root));
                    }
                    let pair = orbit_set.pair_class(orbit_set.orbit_of(root));
                    if !seen_pairs.insert(pair) {
                        return Err(TowerError::DuplicateResidueEntry(root));
                    }
                    values.insert(root, value);
                }
                Some(ResidueData { gf, values })
            }
        };

        Ok(CharacterData {
            action,
            orbit_set,
            orbit_depths: depths.into_iter().map(|(k, (_, d))| (k, d)).collect(),
            rho_depth,
            levi_h,
            residues,
        })
    }

    /// The validated Galois action.
    pub fn action(&self) -> &GaloisAction {
        &self.action
    }

    /// The orbit partition of the action.
    pub fn orbit_set(&self) -> &OrbitSet {
        &self.orbit_set
    }

    /// Depth per canonical orbit-pair class.
    pub fn orbit_depths(&self) -> &BTreeMap<usize, Rat> {
        &self.orbit_depths
    }

    /// Depth of the top-level representation.
    pub fn rho_depth(&self) -> Rat {
        self.rho_depth
    }

    /// The base Levi subsystem.
    pub fn levi_h(&self) -> &LeviSubsystem {
        &self.levi_h
    }

    /// Residue data, when supplied.
    pub fn residues(&self) -> Option<&ResidueData> {
        self.residues.as_ref()
    }
}

/// The recovered chain of depths and nested Levi subsystems.
///
/// `depths` has `d + 1` entries: the `d` jumps in increasing order followed
/// by the top-level depth; `subsystems` has `d + 1` entries ending in the
/// full root set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviTower {
    /// Number of jumps.
    pub d: usize,
    /// Jump depths followed by the top-level depth.
    #[serde(with = "crate::rat::rat_vec")]
    pub depths: Vec<Rat>,
    /// Nested subsystems from the base Levi up to the full root set.
    pub subsystems: Vec<LeviSubsystem>,
}

fn pair_members(orbit_set: &OrbitSet, pair: usize) -> Vec<usize> {
    let mut members = orbit_set.orbits[pair].clone();
    let partner = orbit_set.pair_map[pair];
    if partner != pair {
        members.extend(orbit_set.orbits[partner].iter().copied());
    }
    members.sort_unstable();
    members
}

/// Recovers the tower from character data.
///
/// Jumps are the distinct positive depths of orbit pairs outside the base
/// Levi; level `i` collects the base Levi together with all pairs of depth
/// strictly below the `i`-th jump, and the top level is the full root set.
/// A top-down recursive construction runs alongside and both must agree;
/// every level is checked to be a Galois-stable Levi subsystem.
pub fn recover_tower(data: &CharacterData) -> Result<LeviTower, TowerError> {
    let datum = data.action().datum();
    let orbit_set = data.orbit_set();
    let outside: Vec<(usize, Rat)> = data
        .orbit_depths()
        .iter()
        .filter(|(_, d)| !d.is_zero())
        .map(|(&pair, &d)| (pair, d))
        .collect();

    let mut jumps: Vec<Rat> = outside.iter().map(|&(_, d)| d).collect();
    jumps.sort_unstable();
    jumps.dedup();
    let d = jumps.len();

    let mut depths = jumps.clone();
    depths.push(data.rho_depth());

    let full: Vec<usize> = (0..datum.num_roots()).collect();
    let mut systems: Vec<Vec<usize>> = vec![data.levi_h().members.clone()];
    for &jump in jumps.iter().skip(1) {
        let mut members: BTreeSet<usize> = data.levi_h().members.iter().copied().collect();
        for &(pair, depth) in &outside {
            if depth < jump {
                members.extend(pair_members(orbit_set, pair));
            }
        }
        systems.push(members.into_iter().collect());
    }
    if d > 0 {
        systems.push(full.clone());
    } else {
        assert_eq!(
            systems[0], full,
            "no jumps forces the base Levi to be the full system"
        );
    }

    for (i, members) in systems.iter().enumerate() {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        if !is_levi_subsystem(datum, &set)? {
            return Err(TowerError::NotLeviClosed(i));
        }
        for perm in data.action().generator_root_perms() {
            if members.iter().any(|&r| !set.contains(&perm[r])) {
                return Err(TowerError::NotGaloisStable(i));
            }
        }
    }
    for i in 0..d {
        assert!(
            systems[i].len() < systems[i + 1].len()
                && systems[i].iter().all(|r| systems[i + 1].contains(r)),
            "tower levels nest strictly"
        );
    }
    for i in 0..d.saturating_sub(1) {
        assert!(depths[i] < depths[i + 1], "jumps increase strictly");
    }
    if d > 0 {
        assert!(depths[d - 1] <= depths[d], "top-level depth closes the chain");
    }

    let tower = LeviTower {
        d,
        depths,
        subsystems: systems
            .into_iter()
            .map(|members| LeviSubsystem { members })
            .collect(),
    };
    let recursive = recover_tower_recursive(data);
    assert_eq!(
        tower, recursive,
        "direct and recursive constructions agree"
    );
    Ok(tower)
}

/// Top-down oracle: peel off the maximal remaining depth at each step.
fn recover_tower_recursive(data: &CharacterData) -> LeviTower {
    let datum = data.action().datum();
    let orbit_set = data.orbit_set();
    let base: BTreeSet<usize> = data.levi_h().members.iter().copied().collect();
    let mut current: BTreeSet<usize> = (0..datum.num_roots()).collect();
    let mut systems_rev: Vec<Vec<usize>> = vec![current.iter().copied().collect()];
    let mut jumps_rev: Vec<Rat> = Vec::new();
    loop {
        let live: Vec<(usize, Rat)> = data
            .orbit_depths()
            .iter()
            .filter(|(&pair, d)| {
                !d.is_zero() && pair_members(orbit_set, pair).iter().all(|r| current.contains(r))
            })
            .map(|(&pair, &d)| (pair, d))
            .collect();
        let Some(&(_, r)) = live.iter().max_by_key(|&&(_, d)| d) else {
            break;
        };
        jumps_rev.push(r);
        let mut next = base.clone();
        for &(pair, depth) in &live {
            if depth < r {
                next.extend(pair_members(orbit_set, pair));
            }
        }
        current = next;
        systems_rev.push(current.iter().copied().collect());
    }
    let d = jumps_rev.len();
    let mut depths: Vec<Rat> = jumps_rev.into_iter().rev().collect();
    depths.push(data.rho_depth());
    let subsystems = systems_rev
        .into_iter()
        .rev()
        .map(|members| LeviSubsystem { members })
        .collect();
    LeviTower { d, depths, subsystems }
}

/// Everything this model can decide about whether character data could come
/// from a permissible character.
///
/// The representation-theoretic condition on the base level (that the data
/// arise from a depth-zero piece on the base group) is not modeled here;
/// `unchecked_note` records that gap so consumers of the report do not
/// mistake it for a verified condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissibilityReport {
    /// The recovered tower.
    pub tower: LeviTower,
    /// The prime and root system force an explicit stabilizer check on every
    /// level; when false, nonvanishing on jumping coroots already settles
    /// the stabilizer condition.
    pub torsion_flag: bool,
    /// Explanation accompanying `torsion_flag`.
    pub torsion_reason: String,
    /// The prime divides the order of the fundamental group, the case this
    /// model only flags.
    pub pi1_divisibility: bool,
    /// One genericity report per nested level pair, bottom to top.
    pub ge_results: Vec<GeReport>,
    /// The condition this report cannot decide.
    pub unchecked_note: String,
}

/// Runs every permissibility proxy on the data over the field `F_{p^m}`.
///
/// The tower is recovered first; each nested level pair then gets its
/// residue functional assembled from the stored leading coefficients,
/// embedded into `F_{p^m}` when the stored field is smaller, and checked
/// for genericity. When the tower has jumps, residue data must be present
/// and its field must embed into the requested one.
pub fn permissibility_report(
    data: &CharacterData,
    p: u64,
    m: usize,
) -> Result<PermissibilityReport, TowerError> {
    let datum = data.action().datum();
    let tower = recover_tower(data)?;
    let torsion = torsion_report(datum, p)?;
    let pi1_divisibility = fundamental_group_order(datum) % p == 0;

    let mut ge_results = Vec::with_capacity(tower.d);
    if tower.d > 0 {
        let Some(residues) = data.residues() else {
            return Err(TowerError::MissingResidueData);
        };
        if residues.gf.p != p || m % residues.gf.m != 0 {
            return Err(TowerError::ResidueFieldMismatch {
                have_p: residues.gf.p,
                have_m: residues.gf.m,
                p,
                m,
            });
        }
        let target = Gf::new(p, m)?;
        let embedding = if target == residues.gf {
            None
        } else {
            Some(FieldEmbedding::new(&residues.gf, &target))
        };
        for i in 0..tower.d {
            let jump = tower.depths[i];
            let mut prescriptions: Vec<(usize, u64)> = Vec::new();
            for (&root, &value) in &residues.values {
                let pair = data.orbit_set().pair_class(data.orbit_set().orbit_of(root));
                if data.orbit_depths().get(&pair) != Some(&jump) {
                    continue;
                }
                let lifted = embedding.as_ref().map_or(value, |e| e.embed(value));
                prescriptions.push((root, lifted));
            }
            let functional = assemble_residue_functional(
                datum,
                &tower.subsystems[i],
                &tower.subsystems[i + 1],
                &prescriptions,
                &target,
                jump,
            )?;
            ge_results.push(ge_check(
                datum,
                &tower.subsystems[i],
                &tower.subsystems[i + 1],
                &functional,
            )?);
        }
    }

    Ok(PermissibilityReport {
        tower,
        torsion_flag: torsion.condition4_required,
        torsion_reason: torsion.reason,
        pi1_divisibility,
        ge_results,
        unchecked_note: "the requirement that the base level carry a depth-zero supercuspidal \
                         is outside this model and was not checked"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IMat;
    use crate::rat::rat;
    use crate::rootdata::RootDatum;
    use proptest::prelude::*;

    fn a1_x_a1() -> RootDatum {
        RootDatum::direct_sum(&RootDatum::sl(2), &RootDatum::sl(2))
    }

    fn neg_identity(rank: usize) -> IMat {
        let mut m = IMat::identity(rank);
        for i in 0..rank {
            *m.at_mut(i, i) = -1;
        }
        m
    }

    #[test]
    fn two_jump_example_recovers_the_hand_traced_tower() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let action = GaloisAction::new(datum.clone(), vec![neg_identity(2)], 2).unwrap();
        let data = CharacterData::new(
            action,
            &[(a, rat(1, 2)), (b, rat(3, 2))],
            rat(3, 2),
            LeviSubsystem::empty(),
            None,
        )
        .unwrap();
        let tower = recover_tower(&data).unwrap();
        assert_eq!(tower.d, 2);
        assert_eq!(tower.depths, vec![rat(1, 2), rat(3, 2), rat(3, 2)]);
        assert_eq!(tower.subsystems.len(), 3);
        assert!(tower.subsystems[0].members.is_empty());
        let neg_a = datum.negation_index(a).unwrap();
        let mut expected_mid = vec![a, neg_a];
        expected_mid.sort_unstable();
        assert_eq!(tower.subsystems[1].members, expected_mid);
        assert_eq!(tower.subsystems[2].members, (0..4).collect::<Vec<_>>());
    }

    #[test]
    fn no_jumps_means_base_equals_full() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let action = GaloisAction::new(datum.clone(), vec![], 1).unwrap();
        let full = LeviSubsystem::full(&datum);
        let data = CharacterData::new(
            action.clone(),
            &[(a, rat(0, 1)), (b, rat(0, 1))],
            rat(0, 1),
            full.clone(),
            None,
        )
        .unwrap();
        let tower = recover_tower(&data).unwrap();
        assert_eq!(tower.d, 0);
        assert_eq!(tower.depths, vec![rat(0, 1)]);
        assert_eq!(tower.subsystems, vec![full.clone()]);

        let deep = CharacterData::new(
            action,
            &[(a, rat(0, 1)), (b, rat(0, 1))],
            rat(2, 1),
            full,
            None,
        )
        .unwrap();
        let tower = recover_tower(&deep).unwrap();
        assert_eq!(tower.d, 0);
        assert_eq!(tower.depths, vec![rat(2, 1)]);
    }

    #[test]
    fn single_jump_with_matching_top_depth() {
        let sl3 = RootDatum::sl(3);
        let a1 = sl3.root_index_of(&[2, -1]).unwrap();
        let a2 = sl3.root_index_of(&[-1, 2]).unwrap();
        let rotation = sl3.reflection_matrix(a1).mul(&sl3.reflection_matrix(a2));
        let action = GaloisAction::new(sl3, vec![rotation], 3).unwrap();
        let data = CharacterData::new(
            action,
            &[(a1, rat(1, 1))],
            rat(1, 1),
            LeviSubsystem::empty(),
            None,
        )
        .unwrap();
        let tower = recover_tower(&data).unwrap();
        assert_eq!(tower.d, 1);
        assert_eq!(tower.depths, vec![rat(1, 1), rat(1, 1)]);
        assert!(tower.subsystems[0].members.is_empty());
        assert_eq!(tower.subsystems[1].members.len(), 6);
    }

    #[test]
    fn non_levi_intermediate_level_fails_loudly() {
        let sl3 = RootDatum::sl(3);
        let a1 = sl3.root_index_of(&[2, -1]).unwrap();
        let a2 = sl3.root_index_of(&[-1, 2]).unwrap();
        let a12 = sl3.root_index_of(&[1, 1]).unwrap();
        let action = GaloisAction::new(sl3, vec![], 2).unwrap();
        let data = CharacterData::new(
            action,
            &[(a1, rat(1, 2)), (a2, rat(1, 2)), (a12, rat(3, 2))],
            rat(3, 2),
            LeviSubsystem::empty(),
            None,
        )
        .unwrap();
        assert_eq!(recover_tower(&data), Err(TowerError::NotLeviClosed(1)));
    }

    #[test]
    fn validation_rejects_malformed_data() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let neg_b = datum.negation_index(b).unwrap();
        let trivial = || GaloisAction::new(datum.clone(), vec![], 2).unwrap();
        let empty = LeviSubsystem::empty;

        assert_eq!(
            CharacterData::new(trivial(), &[(a, rat(1, 2))], rat(1, 2), empty(), None)
                .unwrap_err(),
            TowerError::MissingOrbitDepth(b.min(neg_b))
        );
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(1, 2)), (neg_b, rat(1, 2))],
                rat(1, 2),
                empty(),
                None,
            )
            .unwrap_err(),
            TowerError::DuplicateOrbitDepth(neg_b)
        );
        assert!(matches!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 3)), (b, rat(1, 2))],
                rat(1, 2),
                empty(),
                None,
            )
            .unwrap_err(),
            TowerError::DepthOutsideGrid { root, .. } if root == a
        ));
        assert!(matches!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(3, 2))],
                rat(1, 1),
                empty(),
                None,
            )
            .unwrap_err(),
            TowerError::RhoDepthTooSmall { .. }
        ));
        assert!(matches!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(3, 2))],
                rat(-1, 2),
                empty(),
                None,
            )
            .unwrap_err(),
            TowerError::RhoDepthOutsideGrid { .. }
        ));

        let levi_a = LeviSubsystem::new(&datum, [a, datum.negation_index(a).unwrap()]).unwrap();
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(1, 1))],
                rat(1, 1),
                levi_a.clone(),
                None,
            )
            .unwrap_err(),
            TowerError::PositiveDepthInsideLevi(a)
        );
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(0, 1)), (b, rat(0, 1))],
                rat(0, 1),
                levi_a.clone(),
                None,
            )
            .unwrap_err(),
            TowerError::ZeroDepthOutsideLevi(b)
        );

        let swap = IMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        let swap_action = GaloisAction::new(datum.clone(), vec![swap], 1).unwrap();
        assert_eq!(
            CharacterData::new(
                swap_action,
                &[(a, rat(0, 1)), (b, rat(0, 1))],
                rat(0, 1),
                levi_a,
                None,
            )
            .unwrap_err(),
            TowerError::NotGaloisStable(0)
        );

        let gf = Gf::new(3, 1).unwrap();
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(1, 2))],
                rat(1, 2),
                empty(),
                Some((gf.clone(), vec![(a, 0)])),
            )
            .unwrap_err(),
            TowerError::ZeroResidueValue(a)
        );
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(1, 2))],
                rat(1, 2),
                empty(),
                Some((gf.clone(), vec![(a, 7)])),
            )
            .unwrap_err(),
            TowerError::ResidueOutsideField { value: 7, root: a }
        );
        assert_eq!(
            CharacterData::new(
                trivial(),
                &[(a, rat(1, 2)), (b, rat(1, 2))],
                rat(1, 2),
                empty(),
                Some((gf, vec![(b, 1), (neg_b, 2)])),
            )
            .unwrap_err(),
            TowerError::DuplicateResidueEntry(neg_b)
        );
    }

    fn depth_pool() -> Vec<Rat> {
        vec![rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)]
    }

    proptest! {
        #[test]
        fn direct_and_recursive_agree_on_random_depths(
            datum_choice in 0usize..3,
            galois_choice in 0usize..2,
            depth_picks in proptest::collection::vec(0usize..4, 12),
            rho_extra in 0usize..2,
        ) {
            let datum = match datum_choice {
                0 => a1_x_a1(),
                1 => RootDatum::sl(3),
                _ => RootDatum::sl(4),
            };
            let rank = datum.rank;
            let generators = match galois_choice {
                0 => vec![],
                _ => vec![neg_identity(rank)],
            };
            let action = GaloisAction::new(datum.clone(), generators, 2).unwrap();
            let orbit_set = compute_orbits(&action);
            let pool = depth_pool();
            let entries: Vec<(usize, Rat)> = orbit_set
                .pair_classes()
                .iter()
                .enumerate()
                .map(|(k, &pair)| {
                    let root = orbit_set.orbits[pair][0];
                    (root, pool[depth_picks[k % depth_picks.len()]])
                })
                .collect();
            let max_depth = entries.iter().map(|&(_, d)| d).max().unwrap();
            let rho = if rho_extra == 0 { max_depth } else { max_depth + rat(1, 2) };
            let data = CharacterData::new(action, &entries, rho, LeviSubsystem::empty(), None)
                .unwrap();
            match recover_tower(&data) {
                Ok(tower) => {
                    prop_assert_eq!(tower.depths.len(), tower.d + 1);
                    prop_assert_eq!(tower.subsystems.len(), tower.d + 1);
                    prop_assert_eq!(
                        &tower.subsystems[tower.d].members,
                        &(0..datum.num_roots()).collect::<Vec<_>>()
                    );
                    for i in 0..tower.d {
                        prop_assert!(tower.subsystems[i].members.len()
                            < tower.subsystems[i + 1].members.len());
                        if i + 1 < tower.d {
                            prop_assert!(tower.depths[i] < tower.depths[i + 1]);
                        }
                    }
                }
                Err(TowerError::NotLeviClosed(_)) => {}
                Err(other) => return Err(TestCaseError::fail(format!("{other}"))),
            }
        }
    }

    #[test]
    fn report_on_a_datum_with_trivial_fundamental_group() {
        let datum = RootDatum::gl(2);
        let action = GaloisAction::new(datum, vec![], 2).unwrap();
        let gf = Gf::new(3, 1).unwrap();
        let data = CharacterData::new(
            action,
            &[(0, rat(1, 2))],
            rat(1, 2),
            LeviSubsystem::empty(),
            Some((gf, vec![(0, 1)])),
        )
        .unwrap();
        let report = permissibility_report(&data, 3, 1).unwrap();
        assert!(!report.pi1_divisibility);
        assert!(!report.torsion_flag);
        assert_eq!(report.tower.d, 1);
        assert_eq!(report.ge_results.len(), 1);
        assert!(report.ge_results[0].ge1);
        assert!(report.ge_results[0].ge2);
        assert!(report.ge_results[0].doubling_certified);
        assert!(!report.unchecked_note.is_empty());
    }

    fn steinberg_data(gf: Gf) -> CharacterData {
        let datum = RootDatum::sl(3);
        let a1 = datum.root_index_of(&[2, -1]).unwrap();
        let a2 = datum.root_index_of(&[-1, 2]).unwrap();
        let a12 = datum.root_index_of(&[1, 1]).unwrap();
        let action = GaloisAction::new(datum, vec![neg_identity(2)], 2).unwrap();
        CharacterData::new(
            action,
            &[(a1, rat(1, 2)), (a2, rat(1, 2)), (a12, rat(1, 2))],
            rat(1, 2),
            LeviSubsystem::empty(),
            Some((gf, vec![(a1, 1), (a2, 1)])),
        )
        .unwrap()
    }

    #[test]
    fn torsion_prime_requires_the_explicit_stabilizer_check() {
        let data = steinberg_data(Gf::new(3, 1).unwrap());
        let report = permissibility_report(&data, 3, 1).unwrap();
        assert!(report.torsion_flag);
        assert!(!report.pi1_divisibility);
        let ge = &report.ge_results[0];
        assert!(ge.ge1);
        assert!(!ge.ge2);
        assert_eq!(ge.stabilizer_order, 3);
        assert_eq!(ge.expected_order, 1);
        assert!(ge.doubling_certified);
    }

    #[test]
    fn residue_values_embed_into_a_larger_check_field() {
        let data = steinberg_data(Gf::new(3, 1).unwrap());
        let report = permissibility_report(&data, 3, 2).unwrap();
        let ge = &report.ge_results[0];
        assert!(ge.ge1);
        assert!(!ge.ge2);
        assert_eq!(ge.stabilizer_order, 3);
    }

    #[test]
    fn no_jump_data_passes_without_residues() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let action = GaloisAction::new(datum.clone(), vec![], 1).unwrap();
        let data = CharacterData::new(
            action,
            &[(a, rat(0, 1)), (b, rat(0, 1))],
            rat(0, 1),
            LeviSubsystem::full(&datum),
            None,
        )
        .unwrap();
        let report = permissibility_report(&data, 5, 1).unwrap();
        assert_eq!(report.tower.d, 0);
        assert!(report.ge_results.is_empty());
    }

    #[test]
    fn residue_field_problems_are_reported() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let make = |residues| {
            let action = GaloisAction::new(datum.clone(), vec![], 2).unwrap();
            CharacterData::new(
                action,
                &[(a, rat(1, 2)), (b, rat(1, 2))],
                rat(1, 2),
                LeviSubsystem::empty(),
                residues,
            )
            .unwrap()
        };
        assert_eq!(
            permissibility_report(&make(None), 3, 1).unwrap_err(),
            TowerError::MissingResidueData
        );
        let gf3 = Gf::new(3, 1).unwrap();
        let with_values = make(Some((gf3, vec![(a, 1), (b, 1)])));
        assert_eq!(
            permissibility_report(&with_values, 5, 1).unwrap_err(),
            TowerError::ResidueFieldMismatch {
                have_p: 3,
                have_m: 1,
                p: 5,
                m: 1,
            }
        );
        assert!(matches!(
            permissibility_report(&with_values, 3, 30).unwrap_err(),
            TowerError::Field(_)
        ));
        let gf9 = Gf::new(3, 2).unwrap();
        let wide = make(Some((gf9, vec![(a, 1), (b, 1)])));
        assert_eq!(
            permissibility_report(&wide, 3, 3).unwrap_err(),
            TowerError::ResidueFieldMismatch {
                have_p: 3,
                have_m: 2,
                p: 3,
                m: 3,
            }
        );
    }

    #[test]
    fn one_value_on_a_large_orbit_cannot_pin_the_functional() {
        let datum = RootDatum::sl(3);
        let a1 = datum.root_index_of(&[2, -1]).unwrap();
        let a2 = datum.root_index_of(&[-1, 2]).unwrap();
        let rotation = datum.reflection_matrix(a1).mul(&datum.reflection_matrix(a2));
        let action = GaloisAction::new(datum.clone(), vec![rotation], 3).unwrap();
        let gf = Gf::new(3, 1).unwrap();
        let data = CharacterData::new(
            action,
            &[(a1, rat(1, 1))],
            rat(1, 1),
            LeviSubsystem::empty(),
            Some((gf, vec![(a1, 1)])),
        )
        .unwrap();
        let undetermined = datum.root_index_of(&[-1, -1]).unwrap();
        assert_eq!(
            permissibility_report(&data, 3, 1).unwrap_err(),
            TowerError::Genericity(GenericityError::MissingPrescription(undetermined))
        );
    }

    #[test]
    fn recovery_is_deterministic() {
        let datum = a1_x_a1();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let action = GaloisAction::new(datum, vec![neg_identity(2)], 2).unwrap();
        let data = CharacterData::new(
            action,
            &[(a, rat(1, 2)), (b, rat(3, 2))],
            rat(3, 2),
            LeviSubsystem::empty(),
            None,
        )
        .unwrap();
        let t1 = serde_json::to_string(&recover_tower(&data).unwrap()).unwrap();
        let t2 = serde_json::to_string(&recover_tower(&data).unwrap()).unwrap();
        assert_eq!(t1, t2);
    }
}
