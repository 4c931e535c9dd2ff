//! Serializable report and input-file types shared with the command-line
//! front end.
//!
//! Every value crosses the wire exactly: rationals as reduced `"num/den"`
//! strings, cyclotomic numbers as `{level, coeffs}` objects whose
//! coefficients are such strings. All report types serialize with a fixed
//! field order and ordered vectors only, so identical inputs produce
//! byte-identical files.

use crate::cyclo::Cyc;
use crate::distinction::TheoremReport;
use crate::exact::IMat;
use crate::fp::{FieldError, Gf};
use crate::galois::{GaloisAction, GaloisError};
use crate::groups::GroupTable;
use crate::intertwining::{FiberedSumData, IntertwinerReport};
use crate::rat::{parse_rat, RatParseError};
use crate::rootdata::{LeviSubsystem, RootDatum, RootDatumError, TorsionReport};
use crate::towers::{CharacterData, TowerError};
use num::integer::lcm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors turning input files into validated domain objects.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    /// A root vector in an input file is not a root of the datum.
    #[error("no root of the datum has coordinates {0:?}")]
    UnknownRoot(Vec<i64>),
    /// Residue entries name different fields.
    #[error("residue entries disagree on the field: [{0}, {1}] vs [{2}, {3}]")]
    MixedResidueFields(u64, usize, u64, usize),
    /// Malformed rational string.
    #[error(transparent)]
    Rat(#[from] RatParseError),
    /// Propagated root-datum error.
    #[error(transparent)]
    RootDatum(#[from] RootDatumError),
    /// Propagated symmetry-action error.
    #[error(transparent)]
    Galois(#[from] GaloisError),
    /// Propagated character-data error.
    #[error(transparent)]
    Tower(#[from] TowerError),
    /// Propagated field error.
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Exact cyclotomic number on the wire: coefficient strings for the powers
/// of the level-th root of unity, one per power below the level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycValue {
    /// Order of the root of unity the coefficients refer to.
    pub level: u32,
    /// Reduced `"num/den"` coefficient strings.
    pub coeffs: Vec<String>,
}

impl From<&Cyc> for CycValue {
    fn from(c: &Cyc) -> CycValue {
        CycValue {
            level: c.level(),
            coeffs: c
                .coeffs()
                .iter()
                .map(|r| format!("{}/{}", r.numer(), r.denom()))
                .collect(),
        }
    }
}

/// One conjugacy class row of a character table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRow {
    /// Flat coordinates of the class representative: concatenated matrix
    /// rows for matrix groups, or the space coordinates followed by the
    /// central coordinate for group elements given by tuples.
    pub class_rep: Vec<u64>,
    /// Number of elements in the class.
    pub size: usize,
    /// Character value on the class.
    pub value: CycValue,
}

/// A character table as one row per conjugacy class, all values promoted
/// to a common cyclotomic level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterTable {
    /// Rows ordered by the class order of the underlying group.
    pub rows: Vec<ClassRow>,
}

/// Builds a character table from a group table, a flat-coordinate reading
/// of its elements, and a character given elementwise.
pub fn character_table<F>(
    table: &GroupTable,
    values: &[Cyc],
    flatten: F,
) -> CharacterTable
where
    F: Fn(usize) -> Vec<u64>,
{
    let classes = table.conjugacy_classes();
    let level = values
        .iter()
        .map(Cyc::level)
        .fold(1u32, |a, b| lcm(a, b));
    let rows = classes
        .iter()
        .map(|class| ClassRow {
            class_rep: flatten(class[0]),
            size: class.len(),
            value: CycValue::from(&values[class[0]].promote(level)),
        })
        .collect();
    CharacterTable { rows }
}

impl CharacterTable {
    /// Renders the table as CSV: the representative coordinates joined by
    /// spaces, the class size, the level, then one column per coefficient.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class_rep,size,level,coeffs\n");
        for row in &self.rows {
            let rep = row
                .class_rep
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let coeffs = row.value.coeffs.join(",");
            out.push_str(&format!("{rep},{},{},{coeffs}\n", row.size, row.value.level));
        }
        out
    }
}

/// One torus suborbit row of a distinction run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctionOrbitRow {
    /// Stabilizer index weight of the suborbit.
    #[serde(rename = "m_L")]
    pub m_l: u64,
    /// Sign-character pairing on the fixed part, 0 or 1.
    pub pairing: u64,
    /// Whether the suborbit contributes to the right side.
    pub selected: bool,
}

/// A full distinction-identity run for one involution orbit and one torus
/// parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctionRunReport {
    /// Field size.
    pub q: u64,
    /// Position of the involution orbit in the seeded orbit list.
    pub theta_orbit_id: usize,
    /// Torus character parameter.
    pub rho_param: u64,
    /// Averaged character sum over the fixed subgroup.
    pub lhs: u64,
    /// Weighted sum over the torus suborbits.
    pub rhs: u64,
    /// Per-suborbit breakdown.
    pub orbits: Vec<DistinctionOrbitRow>,
}

/// Wraps a computed theorem report with its run coordinates.
pub fn distinction_run_report(
    q: u64,
    theta_orbit_id: usize,
    rho_param: u64,
    report: &TheoremReport,
) -> DistinctionRunReport {
    DistinctionRunReport {
        q,
        theta_orbit_id,
        rho_param,
        lhs: report.lhs,
        rhs: report.rhs,
        orbits: report
            .orbits
            .iter()
            .map(|o| DistinctionOrbitRow {
                m_l: o.m_l,
                pairing: o.pairing,
                selected: o.selected,
            })
            .collect(),
    }
}

/// Structural summary of a central extension run: the group sizes, the
/// scalar modulus of the lifted cocycle, and the character table of the
/// base representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeilRunReport {
    /// The prime.
    pub p: u64,
    /// Dimension of the symplectic space.
    pub dim_w: usize,
    /// Order of the two-step nilpotent group on the space.
    pub heisenberg_order: usize,
    /// Order of the generated symplectic subgroup that was extended.
    pub symplectic_order: usize,
    /// Modulus of the scalar exponents trivializing the cocycle.
    pub scalar_modulus: u64,
    /// Character table of the base representation.
    pub character_table: CharacterTable,
}

/// Dimension certificate of one intertwining configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntertwineRunReport {
    /// The prime.
    pub p: u64,
    /// Dimension of each outer symplectic block.
    pub dim_w13: usize,
    /// Dimension of the shared symplectic block.
    pub dim_w0: usize,
    /// Certified dimension of the space of intertwining maps.
    pub hom_dim: usize,
    /// Solution dimension when only the shared subgroup constrains maps.
    pub hom_dim_shared_only: usize,
    /// Dimension of the ambient representation space.
    pub dim_v_star: usize,
    /// Dimension of the two fixed spaces the operator maps between.
    pub dim_v_tau: usize,
    /// Dimension of the overlap submodule.
    pub dim_v_tau0: usize,
}

/// Wraps an intertwiner certificate with its configuration coordinates.
pub fn intertwine_run_report(
    data: &FiberedSumData,
    report: &IntertwinerReport,
) -> IntertwineRunReport {
    IntertwineRunReport {
        p: data.space().p(),
        dim_w13: data.dim_w13(),
        dim_w0: data.dim_w0(),
        hom_dim: report.hom_dim,
        hom_dim_shared_only: report.hom_dim_shared_only,
        dim_v_star: report.dim_v_star,
        dim_v_tau: report.dim_v_tau,
        dim_v_tau0: report.dim_v_tau0,
    }
}

/// Torsion verdict for a root datum at a prime, with the fundamental
/// group order for context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionRunReport {
    /// The prime.
    pub p: u64,
    /// Order of the quotient of the character lattice by the root lattice.
    pub fundamental_group_order: u64,
    /// The verdict and its reason.
    pub report: TorsionReport,
}

/// One named check of the self-test suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckLine {
    /// What was checked.
    pub name: String,
    /// Whether it held.
    pub pass: bool,
    /// Count of individual cases the check covered.
    pub cases: usize,
}

/// The self-test suite outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    /// Seed the randomized samples were drawn from.
    pub seed: u64,
    /// Every check with its verdict.
    pub checks: Vec<CheckLine>,
    /// Conjunction of all verdicts.
    pub passed: bool,
}

/// Machine-readable error envelope written on failed runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Stable short code naming the error family.
    pub code: String,
    /// Human-readable message.
    pub message: String,
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// On-disk form of a symmetry action: integer generator matrices acting on
/// the character lattice of a separately supplied root datum, with the
/// ramification index fixing the depth grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisActionFile {
    /// Generator matrices, row-major.
    pub generators: Vec<Vec<Vec<i64>>>,
    /// Tame ramification index.
    pub ramification_index: u32,
}

/// Builds the validated action from a parsed file.
pub fn assemble_galois_action(
    datum: RootDatum,
    file: &GaloisActionFile,
    max_elements: usize,
) -> Result<GaloisAction, ReportError> {
    let generators = file
        .generators
        .iter()
        .map(|rows| IMat::from_rows(rows))
        .collect();
    Ok(GaloisAction::with_bound(
        datum,
        generators,
        file.ramification_index,
        max_elements,
    )?)
}

/// One orbit depth prescription in a character-data file: the orbit is
/// named by any root in it, the root by its coordinate vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDepthEntry {
    /// Coordinates of a root in the orbit.
    pub orbit_rep: Vec<i64>,
    /// Depth as a `"num/den"` string.
    pub depth: String,
}

/// One leading-coefficient prescription in a character-data file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueEntry {
    /// Coordinates of a root in the orbit.
    pub orbit_rep: Vec<i64>,
    /// Packed field element, base p digits of the polynomial coefficients.
    pub value: u64,
    /// The field as `[p, m]`.
    pub field: (u64, usize),
}

/// On-disk form of character depth data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterDataFile {
    /// Depth of each orbit pair, keyed by a representative root.
    pub orbit_depths: Vec<OrbitDepthEntry>,
    /// Depth of the top-level representation, as a `"num/den"` string.
    pub rho_depth: String,
    /// Roots of the base subsystem, by coordinates.
    #[serde(rename = "levi_H")]
    pub levi_h: Vec<Vec<i64>>,
    /// Leading coefficients, present when genericity is to be checked.
    #[serde(default)]
    pub residue: Vec<ResidueEntry>,
}

/// Builds validated character data from a parsed file against an action.
pub fn assemble_character_data(
    action: GaloisAction,
    file: &CharacterDataFile,
) -> Result<CharacterData, ReportError> {
    let root_index = |v: &Vec<i64>| -> Result<usize, ReportError> {
        action
            .datum()
            .root_index_of(v)
            .ok_or_else(|| ReportError::UnknownRoot(v.clone()))
    };
    let mut orbit_depths = Vec::with_capacity(file.orbit_depths.len());
    for entry in &file.orbit_depths {
        orbit_depths.push((root_index(&entry.orbit_rep)?, parse_rat(&entry.depth)?));
    }
    let rho_depth = parse_rat(&file.rho_depth)?;
    let mut levi_members = Vec::with_capacity(file.levi_h.len());
    for v in &file.levi_h {
        levi_members.push(root_index(v)?);
    }
    let levi_h = LeviSubsystem::new(action.datum(), levi_members)?;
    let residues = if file.residue.is_empty() {
        None
    } else {
        let (p, m) = file.residue[0].field;
        for entry in &file.residue {
            if entry.field != (p, m) {
                return Err(ReportError::MixedResidueFields(
                    p,
                    m,
                    entry.field.0,
                    entry.field.1,
                ));
            }
        }
        let gf = Gf::new(p, m)?;
        let mut entries = Vec::with_capacity(file.residue.len());
        for entry in &file.residue {
            entries.push((root_index(&entry.orbit_rep)?, entry.value));
        }
        Some((gf, entries))
    };
    let datum_orbit_depths = orbit_depths;
    Ok(CharacterData::new(
        action,
        &datum_orbit_depths,
        rho_depth,
        levi_h,
        residues,
    )?)
}
