//! Residue functionals on the coroot side and the genericity checks on a
//! tower level.
//!
//! A [`ResidueFunctional`] is the leading coefficient of a character jump:
//! a vector over an explicit finite field, paired against coroots by
//! reducing their integer coordinates. [`assemble_residue_functional`]
//! recovers it from prescribed values on jumping coroots by exact linear
//! algebra, and [`ge_check`] decides the two genericity conditions for one
//! nested pair of Levi subsystems: every jumping coroot pairs to a nonzero
//! value, and the stabilizer of the functional inside the larger Weyl group
//! is no bigger than the smaller Weyl group.
//!
//! The ambient field stands in for an algebraic closure, so the stabilizer
//! comparison is recomputed over the quadratic extension and the report
//! records whether both fields agree.

use crate::fp::{FElt, FieldEmbedding, Gf, GfMat};
use crate::rat::Rat;
use crate::rootdata::{
    is_levi_subsystem, weyl_group, weyl_stabilizer_order, LeviSubsystem, RootDatum,
    RootDatumError,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Errors from functional assembly and genericity checking.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenericityError {
    /// The smaller subsystem is not contained in the larger one.
    #[error("the first subsystem is not contained in the second")]
    NotNested,
    /// The functional fails to vanish on a coroot of the smaller subsystem.
    #[error("functional is nonzero on the coroot of root {0}, which lies in the smaller subsystem")]
    InconsistentFunctional(usize),
    /// A jumping coroot is not determined by the prescriptions.
    #[error("prescriptions do not determine the value on the coroot of root {0}")]
    MissingPrescription(usize),
    /// The prescriptions contradict each other or the vanishing constraints.
    #[error("prescriptions admit no solution")]
    InconsistentPrescription,
    /// A prescribed value is zero, contradicting the jump it annotates.
    #[error("prescribed value for root {0} is zero")]
    ZeroValue(usize),
    /// A prescribed value is not an element of the stated field.
    #[error("prescribed value {value} at root {root} is not an element of the field")]
    ValueOutsideField {
        /// The packed value supplied.
        value: u64,
        /// Root whose coroot carries the value.
        root: usize,
    },
    /// The root datum or a subsystem failed validation.
    #[error(transparent)]
    Datum(#[from] RootDatumError),
}

/// A linear functional on the cocharacter side with coefficients in a
/// finite field, tagged with the depth of the jump it models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueFunctional {
    /// Field the coefficients live in.
    pub gf: Gf,
    /// Coefficients in the coordinates dual to the cocharacter lattice.
    pub coordinates: Vec<FElt>,
    /// Depth of the jump this functional represents.
    #[serde(with = "crate::rat")]
    pub depth: Rat,
}

impl ResidueFunctional {
    /// Pairs the functional against the coroot of root `i`.
    pub fn evaluate_coroot(&self, datum: &RootDatum, i: usize) -> FElt {
        assert_eq!(self.coordinates.len(), datum.rank, "coordinate length");
        datum.coroots[i]
            .iter()
            .zip(&self.coordinates)
            .fold(self.gf.zero(), |acc, (&c, &x)| {
                self.gf.add(acc, self.gf.mul(self.gf.from_int(c), x))
            })
    }
}

fn check_level_pair(
    datum: &RootDatum,
    inner: &LeviSubsystem,
    outer: &LeviSubsystem,
) -> Result<(), GenericityError> {
    for sub in [inner, outer] {
        let set: BTreeSet<usize> = sub.members.iter().copied().collect();
        if !is_levi_subsystem(datum, &set)? {
            return Err(RootDatumError::InvalidLevi(
                "tower level is not a Levi subsystem".into(),
            )
            .into());
        }
    }
    if inner.members.iter().any(|&i| !outer.contains(i)) {
        return Err(GenericityError::NotNested);
    }
    Ok(())
}

fn coroot_row(datum: &RootDatum, gf: &Gf, i: usize) -> Vec<FElt> {
    datum.coroots[i].iter().map(|&c| gf.from_int(c)).collect()
}

/// Solves for the functional pinned by vanishing on the smaller subsystem's
/// coroots and taking the prescribed values on the listed coroots.
///
/// Prescriptions are keyed by root index with packed field-element values.
/// Values forced by linearity need no entry of their own, but every jumping
/// coroot must end up determined; when the solution has a free direction
/// touching a jumping coroot, that coroot is reported instead of silently
/// fixing the gauge.
pub fn assemble_residue_functional(
    datum: &RootDatum,
    inner: &LeviSubsystem,
    outer: &LeviSubsystem,
    prescribed: &[(usize, u64)],
    gf: &Gf,
    depth: Rat,
) -> Result<ResidueFunctional, GenericityError> {
    check_level_pair(datum, inner, outer)?;
    let mut rows: Vec<Vec<FElt>> = Vec::new();
    let mut rhs: Vec<FElt> = Vec::new();
    for &i in &inner.members {
        rows.push(coroot_row(datum, gf, i));
        rhs.push(gf.zero());
    }
    for &(root, value) in prescribed {
        if root >= datum.num_roots() {
            return Err(RootDatumError::IndexOutOfRange(root).into());
        }
        if value >= gf.order() {
            return Err(GenericityError::ValueOutsideField { value, root });
        }
        if value == 0 {
            return Err(GenericityError::ZeroValue(root));
        }
        rows.push(coroot_row(datum, gf, root));
        rhs.push(value);
    }
    if rows.is_empty() {
        rows.push(vec![gf.zero(); datum.rank]);
        rhs.push(gf.zero());
    }
    let system = GfMat::from_rows(&rows);
    let Some(coordinates) = system.solve(gf, &rhs) else {
        return Err(GenericityError::InconsistentPrescription);
    };
    let base_rank = system.rank(gf);
    for &i in &outer.members {
        if inner.contains(i) {
            continue;
        }
        let mut extended = rows.clone();
        extended.push(coroot_row(datum, gf, i));
        if GfMat::from_rows(&extended).rank(gf) != base_rank {
            return Err(GenericityError::MissingPrescription(i));
        }
    }
    let functional = ResidueFunctional {
        gf: gf.clone(),
        coordinates,
        depth,
    };
    for &(root, value) in prescribed {
        assert_eq!(
            functional.evaluate_coroot(datum, root),
            value,
            "solution matches every prescription"
        );
    }
    Ok(functional)
}

/// Outcome of [`ge_check`] on one tower level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeReport {
    /// Every jumping coroot pairs to a nonzero value.
    pub ge1: bool,
    /// The stabilizer of the functional in the larger Weyl group is exactly
    /// the smaller Weyl group.
    pub ge2: bool,
    /// Order of the stabilizer of the functional in the larger Weyl group.
    pub stabilizer_order: u64,
    /// Order of the smaller Weyl group, always a divisor of the stabilizer
    /// order.
    pub expected_order: u64,
    /// The stabilizer order is unchanged over the quadratic extension field,
    /// so the verdict is not an artifact of the field being too small. False
    /// when the extension exceeds the field-size cap and could not be built.
    pub doubling_certified: bool,
}

/// Decides the genericity conditions for the functional on the level pair
/// `inner ⊆ outer`.
///
/// The functional must vanish on the coroots of `inner`. The first
/// condition asks that it is nonzero on every coroot of `outer` outside
/// `inner`; the second compares the order of its stabilizer inside the Weyl
/// group of `outer` with the order of the Weyl group of `inner`, which is
/// always a subgroup of that stabilizer.
pub fn ge_check(
    datum: &RootDatum,
    inner: &LeviSubsystem,
    outer: &LeviSubsystem,
    functional: &ResidueFunctional,
) -> Result<GeReport, GenericityError> {
    check_level_pair(datum, inner, outer)?;
    if functional.coordinates.len() != datum.rank {
        return Err(RootDatumError::DimensionMismatch {
            expected: datum.rank,
            got: functional.coordinates.len(),
        }
        .into());
    }
    let gf = &functional.gf;
    for &i in &inner.members {
        if functional.evaluate_coroot(datum, i) != gf.zero() {
            return Err(GenericityError::InconsistentFunctional(i));
        }
    }
    let ge1 = outer
        .members
        .iter()
        .filter(|&&i| !inner.contains(i))
        .all(|&i| functional.evaluate_coroot(datum, i) != gf.zero());
    let vanishing: Vec<usize> = outer
        .members
        .iter()
        .copied()
        .filter(|&i| functional.evaluate_coroot(datum, i) == gf.zero())
        .collect();
    assert_eq!(
        vanishing == inner.members,
        ge1,
        "the vanishing locus inside the larger subsystem is the smaller one exactly when every jump is nonzero"
    );
    let (_, stabilizer_order) = weyl_stabilizer_order(datum, outer, gf, &functional.coordinates)?;
    let expected_order = weyl_group(datum, inner)?.order;
    assert!(
        stabilizer_order % expected_order == 0 && stabilizer_order >= expected_order,
        "the smaller Weyl group embeds in the stabilizer"
    );
    let ge2 = stabilizer_order == expected_order;
    let doubling_certified = match Gf::new(gf.p, 2 * gf.m) {
        Err(_) => false,
        Ok(big) => {
            let emb = FieldEmbedding::new(gf, &big);
            let lifted: Vec<FElt> = functional.coordinates.iter().map(|&x| emb.embed(x)).collect();
            let (_, big_stab) = weyl_stabilizer_order(datum, outer, &big, &lifted)?;
            big_stab == stabilizer_order
        }
    };
    Ok(GeReport {
        ge1,
        ge2,
        stabilizer_order,
        expected_order,
        doubling_certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use proptest::prelude::*;

    fn a1_x_a1() -> RootDatum {
        RootDatum::direct_sum(&RootDatum::sl(2), &RootDatum::sl(2))
    }

    fn levi_of(datum: &RootDatum, roots: &[&[i64]]) -> LeviSubsystem {
        let mut members = Vec::new();
        for r in roots {
            let i = datum.root_index_of(r).unwrap();
            members.push(i);
            members.push(datum.negation_index(i).unwrap());
        }
        LeviSubsystem::new(datum, members).unwrap()
    }

    #[test]
    fn assembly_fills_in_the_prescribed_coroot() {
        let datum = a1_x_a1();
        let inner = levi_of(&datum, &[&[2, 0]]);
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(3, 1).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let f =
            assemble_residue_functional(&datum, &inner, &outer, &[(b, 1)], &gf, rat(1, 2))
                .unwrap();
        assert_eq!(f.coordinates, vec![0, 1]);
        assert_eq!(f.depth, rat(1, 2));
    }

    #[test]
    fn opposite_coroots_cannot_carry_the_same_nonzero_value() {
        let datum = a1_x_a1();
        let inner = levi_of(&datum, &[&[2, 0]]);
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(3, 1).unwrap();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let neg_b = datum.negation_index(b).unwrap();
        assert_eq!(
            assemble_residue_functional(
                &datum,
                &inner,
                &outer,
                &[(b, 1), (neg_b, 1)],
                &gf,
                rat(1, 2),
            )
            .unwrap_err(),
            GenericityError::InconsistentPrescription
        );
    }

    #[test]
    fn linearity_determines_unprescribed_coroots() {
        let datum = RootDatum::sl(3);
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(5, 1).unwrap();
        let a1 = datum.root_index_of(&[2, -1]).unwrap();
        let a2 = datum.root_index_of(&[-1, 2]).unwrap();
        let a12 = datum.root_index_of(&[1, 1]).unwrap();
        let f = assemble_residue_functional(
            &datum,
            &inner,
            &outer,
            &[(a1, 1), (a2, 1)],
            &gf,
            rat(1, 1),
        )
        .unwrap();
        assert_eq!(f.evaluate_coroot(&datum, a12), 2);
    }

    #[test]
    fn underdetermined_jumping_coroot_is_reported() {
        let datum = a1_x_a1();
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(3, 1).unwrap();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let err = assemble_residue_functional(&datum, &inner, &outer, &[(a, 1)], &gf, rat(1, 2))
            .unwrap_err();
        let b = datum.root_index_of(&[0, 2]).unwrap();
        let neg_b = datum.negation_index(b).unwrap();
        assert_eq!(err, GenericityError::MissingPrescription(b.min(neg_b)));
    }

    #[test]
    fn assembly_validates_inputs() {
        let datum = a1_x_a1();
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(3, 1).unwrap();
        let a = datum.root_index_of(&[2, 0]).unwrap();
        assert_eq!(
            assemble_residue_functional(&datum, &inner, &outer, &[(a, 0)], &gf, rat(1, 2))
                .unwrap_err(),
            GenericityError::ZeroValue(a)
        );
        assert_eq!(
            assemble_residue_functional(&datum, &inner, &outer, &[(a, 5)], &gf, rat(1, 2))
                .unwrap_err(),
            GenericityError::ValueOutsideField { value: 5, root: a }
        );
        assert_eq!(
            assemble_residue_functional(&datum, &inner, &outer, &[(99, 1)], &gf, rat(1, 2))
                .unwrap_err(),
            GenericityError::Datum(RootDatumError::IndexOutOfRange(99))
        );
        let not_nested = levi_of(&datum, &[&[2, 0]]);
        let other = levi_of(&datum, &[&[0, 2]]);
        assert_eq!(
            assemble_residue_functional(&datum, &not_nested, &other, &[], &gf, rat(1, 2))
                .unwrap_err(),
            GenericityError::NotNested
        );
    }

    #[test]
    fn both_conditions_hold_on_the_rank_two_split_example() {
        let datum = a1_x_a1();
        let inner = levi_of(&datum, &[&[2, 0]]);
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(5, 1).unwrap();
        let f = ResidueFunctional {
            gf,
            coordinates: vec![0, 1],
            depth: rat(3, 2),
        };
        let report = ge_check(&datum, &inner, &outer, &f).unwrap();
        assert!(report.ge1);
        assert!(report.ge2);
        assert_eq!(report.stabilizer_order, 2);
        assert_eq!(report.expected_order, 2);
        assert!(report.doubling_certified);
    }

    #[test]
    fn regular_functional_has_trivial_stabilizer() {
        let datum = RootDatum::sl(3);
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(5, 1).unwrap();
        let f = ResidueFunctional {
            gf,
            coordinates: vec![1, 1],
            depth: rat(1, 1),
        };
        let report = ge_check(&datum, &inner, &outer, &f).unwrap();
        assert!(report.ge1);
        assert!(report.ge2);
        assert_eq!(report.stabilizer_order, 1);
        assert_eq!(report.expected_order, 1);
        assert!(report.doubling_certified);
    }

    #[test]
    fn vanishing_on_the_long_coroot_fails_the_first_condition() {
        let datum = RootDatum::sl(3);
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(3, 1).unwrap();
        let f = ResidueFunctional {
            gf: gf.clone(),
            coordinates: vec![1, gf.from_int(-1)],
            depth: rat(1, 1),
        };
        let report = ge_check(&datum, &inner, &outer, &f).unwrap();
        assert!(!report.ge1);
    }

    #[test]
    fn nonvanishing_on_the_inner_subsystem_is_rejected() {
        let datum = a1_x_a1();
        let inner = levi_of(&datum, &[&[2, 0]]);
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(5, 1).unwrap();
        let f = ResidueFunctional {
            gf,
            coordinates: vec![1, 1],
            depth: rat(1, 2),
        };
        let a = datum.root_index_of(&[2, 0]).unwrap();
        let neg_a = datum.negation_index(a).unwrap();
        assert_eq!(
            ge_check(&datum, &inner, &outer, &f).unwrap_err(),
            GenericityError::InconsistentFunctional(a.min(neg_a))
        );
    }

    #[test]
    fn check_works_over_a_genuine_extension_field() {
        let datum = RootDatum::sl(3);
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(&datum);
        let gf = Gf::new(5, 2).unwrap();
        let g = gf.generator();
        let f = ResidueFunctional {
            gf: gf.clone(),
            coordinates: vec![g, gf.one()],
            depth: rat(1, 1),
        };
        let report = ge_check(&datum, &inner, &outer, &f).unwrap();
        assert!(report.ge1);
        assert!(report.ge2);
        assert!(report.doubling_certified);
    }

    proptest! {
        #[test]
        fn first_condition_implies_second_for_small_type_a(
            which in 0usize..3,
            raw in proptest::collection::vec(0u64..5, 3),
        ) {
            let (datum, p) = match which {
                0 => (RootDatum::sl(2), 3u64),
                1 => (RootDatum::sl(3), 5),
                _ => (RootDatum::sl(4), 3),
            };
            let gf = Gf::new(p, 1).unwrap();
            let coordinates: Vec<FElt> =
                (0..datum.rank).map(|k| raw[k] % gf.order()).collect();
            let f = ResidueFunctional { gf, coordinates, depth: rat(1, 1) };
            let inner = LeviSubsystem::empty();
            let outer = LeviSubsystem::full(&datum);
            let report = ge_check(&datum, &inner, &outer, &f).unwrap();
            if report.ge1 {
                prop_assert!(report.ge2);
            }
        }

        #[test]
        fn report_is_invariant_under_scaling(
            scale in 1u64..5,
            raw in proptest::collection::vec(0u64..5, 2),
        ) {
            let datum = RootDatum::sl(3);
            let gf = Gf::new(5, 1).unwrap();
            let coordinates: Vec<FElt> = raw.iter().map(|&x| x % gf.order()).collect();
            let scaled: Vec<FElt> =
                coordinates.iter().map(|&x| gf.mul(x, scale)).collect();
            let inner = LeviSubsystem::empty();
            let outer = LeviSubsystem::full(&datum);
            let base = ResidueFunctional {
                gf: gf.clone(),
                coordinates,
                depth: rat(1, 1),
            };
            let multiplied = ResidueFunctional { gf, coordinates: scaled, depth: rat(1, 1) };
            let r1 = ge_check(&datum, &inner, &outer, &base).unwrap();
            let r2 = ge_check(&datum, &inner, &outer, &multiplied).unwrap();
            prop_assert_eq!(r1, r2);
        }
    }
}
