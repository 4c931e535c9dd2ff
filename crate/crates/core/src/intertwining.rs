//! Fibered sums of symplectic spaces and the one-dimensionality of the
//! intertwining space between the two Heisenberg representations glued
//! along the common piece.
//!
//! Two spaces `W = W13 + W0` and `gW = gW13 + W0` sharing the nondegenerate
//! piece `W0` amalgamate to `W* = W13 + W0 + gW13`, an orthogonal sum. The
//! representation of the big Heisenberg group on `W*` restricts to models
//! of the two glued representations on fixed-vector subspaces: the
//! operators of one isotropic half fix exactly the space carrying the
//! other representation. The intertwining space between the restrictions
//! is computed by solving the full linear commutation system; every
//! operator involved is monomial, so each equation couples two unknowns
//! and the system resolves exactly by a weighted union-find over basis
//! indices with phase bookkeeping mod p. The certified dimension must be
//! 1, and the normalized intertwiner acts as a prescribed scalar on the
//! overlap submodule and annihilates its complement.

use crate::cyclo::{Cyc, CycMat};
use crate::fp::{FElt, GfMat};
use crate::heisenberg::{
    build_heisenberg_rep, weil_extend, HeisenbergError, HeisenbergRep, Polarization,
    SymplecticSpaceFp,
};
use crate::DEFAULT_MAX_ELEMENTS;
use thiserror::Error;

/// Errors from fibered-sum construction and intertwining computation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntertwiningError {
    /// A symplectic piece was given an odd dimension.
    #[error("{which} = {dim} is odd; symplectic pieces have even dimension")]
    OddDimension {
        /// Which dimension argument is at fault.
        which: &'static str,
        /// The offending value.
        dim: usize,
    },
    /// Both pieces are zero-dimensional.
    #[error("both pieces are zero-dimensional")]
    EmptySum,
    /// A certified property of the construction failed; carries a dump of
    /// the offending configuration.
    #[error("intertwining certification failed: {0}")]
    TheoremViolation(String),
    /// Construction of the underlying spaces or representations failed.
    #[error(transparent)]
    Heisenberg(#[from] HeisenbergError),
}

/// The amalgam `W* = W13 + W0 + gW13` of two symplectic spaces glued along
/// `W0`, with its block form and standard polarization.
///
/// Coordinates are ordered `[W1 | W3 | W2 | W4 | gW1 | gW3]` where
/// `W13 = W1 + W3` and `W0 = W2 + W4` are hyperbolically polarized and the
/// `g`-copy repeats the `W13` block. The first space is `W = W13 + W0`,
/// the second is `gW = W0 + gW13`, and they intersect exactly in `W0`.
#[derive(Debug, Clone)]
pub struct FiberedSumData {
    space: SymplecticSpaceFp,
    polarization: Polarization,
    dim_w13: usize,
    dim_w0: usize,
}

/// Builds the amalgam with standard hyperbolic bases.
pub fn build_fibered_sum(
    dim_w13: usize,
    dim_w0: usize,
    p: u64,
) -> Result<FiberedSumData, IntertwiningError> {
    if dim_w13 % 2 != 0 {
        return Err(IntertwiningError::OddDimension {
            which: "dim_w13",
            dim: dim_w13,
        });
    }
    if dim_w0 % 2 != 0 {
        return Err(IntertwiningError::OddDimension {
            which: "dim_w0",
            dim: dim_w0,
        });
    }
    if dim_w13 == 0 && dim_w0 == 0 {
        return Err(IntertwiningError::EmptySum);
    }
    let n13 = dim_w13 / 2;
    let n0 = dim_w0 / 2;
    let total = 2 * dim_w13 + dim_w0;
    let mut rows = vec![vec![0u64; total]; total];
    let mut hyperbolic_block = |start: usize, n: usize| {
        for i in 0..n {
            rows[start + i][start + n + i] = 1;
            rows[start + n + i][start + i] = p - 1;
        }
    };
    hyperbolic_block(0, n13);
    hyperbolic_block(dim_w13, n0);
    hyperbolic_block(dim_w13 + dim_w0, n13);
    let field = crate::fp::Gf::new(p, 1).map_err(HeisenbergError::from)?;
    let space = SymplecticSpaceFp::new(field, GfMat::from_rows(&rows))?;
    let unit = |i: usize| {
        let mut v = vec![0u64; total];
        v[i] = 1;
        v
    };
    let plus_positions = (0..n13)
        .chain(dim_w13..dim_w13 + n0)
        .chain(dim_w13 + dim_w0..dim_w13 + dim_w0 + n13);
    let minus_positions = (n13..dim_w13)
        .chain(dim_w13 + n0..dim_w13 + dim_w0)
        .chain(dim_w13 + dim_w0 + n13..total);
    let polarization = Polarization {
        plus: plus_positions.map(unit).collect(),
        minus: minus_positions.map(unit).collect(),
    };
    Ok(FiberedSumData {
        space,
        polarization,
        dim_w13,
        dim_w0,
    })
}

impl FiberedSumData {
    /// The amalgam space.
    pub fn space(&self) -> &SymplecticSpaceFp {
        &self.space
    }

    /// The standard polarization of the amalgam.
    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    /// Dimension of the unshared piece of each glued space.
    pub fn dim_w13(&self) -> usize {
        self.dim_w13
    }

    /// Dimension of the shared piece.
    pub fn dim_w0(&self) -> usize {
        self.dim_w0
    }

    /// Dimension of each glued space.
    pub fn dim_w(&self) -> usize {
        self.dim_w13 + self.dim_w0
    }

    /// Dimension of the amalgam.
    pub fn dim_w_star(&self) -> usize {
        2 * self.dim_w13 + self.dim_w0
    }

    fn units(&self, range: std::ops::Range<usize>) -> Vec<Vec<FElt>> {
        let total = self.dim_w_star();
        range
            .map(|i| {
                let mut v = vec![0u64; total];
                v[i] = 1;
                v
            })
            .collect()
    }

    /// Basis of the isotropic half `W1` of the first unshared piece.
    pub fn w1_basis(&self) -> Vec<Vec<FElt>> {
        self.units(0..self.dim_w13 / 2)
    }

    /// Basis of the isotropic half `W3` dual to `W1`.
    pub fn w3_basis(&self) -> Vec<Vec<FElt>> {
        self.units(self.dim_w13 / 2..self.dim_w13)
    }

    /// Basis of the shared piece `W0`.
    pub fn w0_basis(&self) -> Vec<Vec<FElt>> {
        self.units(self.dim_w13..self.dim_w13 + self.dim_w0)
    }

    /// Basis of the isotropic half `gW1` of the second unshared piece.
    pub fn g_w1_basis(&self) -> Vec<Vec<FElt>> {
        let base = self.dim_w13 + self.dim_w0;
        self.units(base..base + self.dim_w13 / 2)
    }

    /// Basis of the isotropic half `gW3` dual to `gW1`.
    pub fn g_w3_basis(&self) -> Vec<Vec<FElt>> {
        let base = self.dim_w13 + self.dim_w0;
        self.units(base + self.dim_w13 / 2..base + self.dim_w13)
    }
}

/// A basis of a joint fixed space of monomial operators, one vector per
/// index class: the vector supported on the class with entry
/// `zeta_p^{phase}` at each member, phase 0 at the representative.
struct ClassBasis {
    p: u64,
    /// Per class: members as `(coordinate index, phase)`, representative
    /// first.
    classes: Vec<Vec<(usize, u64)>>,
    /// Per coordinate: the class containing it and the phase there, or
    /// `None` when the coordinate is forced to zero in the fixed space.
    class_of: Vec<Option<(usize, u64)>>,
}

struct PhasedUnionFind {
    p: u64,
    parent: Vec<usize>,
    /// Phase of a node relative to its parent: `v_node = zeta^{pot} v_parent`.
    pot: Vec<u64>,
    dead: Vec<bool>,
}

impl PhasedUnionFind {
    fn new(n: usize, p: u64) -> PhasedUnionFind {
        PhasedUnionFind {
            p,
            parent: (0..n).collect(),
            pot: vec![0; n],
            dead: vec![false; n],
        }
    }

    fn find(&mut self, i: usize) -> (usize, u64) {
        if self.parent[i] == i {
            return (i, 0);
        }
        let (root, parent_pot) = self.find(self.parent[i]);
        self.parent[i] = root;
        self.pot[i] = (self.pot[i] + parent_pot) % self.p;
        (root, self.pot[i])
    }

    /// Imposes `v_x = zeta^d v_y`.
    fn relate(&mut self, x: usize, y: usize, d: u64) {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            if px != (d + py) % self.p {
                self.dead[rx] = true;
            }
            return;
        }
        self.parent[ry] = rx;
        self.pot[ry] = (px + self.p - (d + py) % self.p) % self.p;
        if self.dead[ry] {
            self.dead[rx] = true;
        }
    }

    fn into_classes(mut self) -> ClassBasis {
        let n = self.parent.len();
        let p = self.p;
        let mut class_index = vec![usize::MAX; n];
        let mut classes: Vec<Vec<(usize, u64)>> = Vec::new();
        let mut members: Vec<(usize, usize, u64)> = Vec::with_capacity(n);
        for i in 0..n {
            let (root, phase) = self.find(i);
            members.push((root, i, phase));
        }
        let mut class_of = vec![None; n];
        for &(root, i, phase) in &members {
            if self.dead[root] {
                continue;
            }
            if class_index[root] == usize::MAX {
                class_index[root] = classes.len();
                classes.push(vec![(root, 0)]);
            }
            let a = class_index[root];
            if i != root {
                classes[a].push((i, phase));
            }
            class_of[i] = Some((a, phase));
        }
        ClassBasis {
            p,
            classes,
            class_of,
        }
    }
}

/// The joint fixed space of the operators of `(u, 0)` for `u` in the given
/// list of commuting isotropic translations.
fn fixed_space(rep: &HeisenbergRep, translations: &[Vec<FElt>]) -> ClassBasis {
    let p = rep.space().p();
    let mut uf = PhasedUnionFind::new(rep.dim(), p);
    for u in translations {
        let m = rep.monomial(u, 0);
        for y in 0..rep.dim() {
            uf.relate(m.dest[y], y, m.phase[y]);
        }
    }
    uf.into_classes()
}

/// Restriction of the operator of `(w, k)` to the span of a class basis,
/// as a monomial operator on the classes. Panics if the operator does not
/// preserve the span, which cannot happen for group elements commuting
/// with the defining translations.
fn restrict(rep: &HeisenbergRep, basis: &ClassBasis, w: &[FElt], k: u64) -> (Vec<usize>, Vec<u64>) {
    let p = basis.p;
    let m = rep.monomial(w, k);
    let mut dest = Vec::with_capacity(basis.classes.len());
    let mut phase = Vec::with_capacity(basis.classes.len());
    for class in &basis.classes {
        let (rep_index, _) = class[0];
        let (target, target_phase) = basis.class_of[m.dest[rep_index]]
            .expect("the operator maps a live class into a live class");
        let lambda = (m.phase[rep_index] + p - target_phase) % p;
        for &(i, e) in class {
            let expected = basis.class_of[m.dest[i]];
            let got = Some((target, (e + m.phase[i] + p - lambda) % p));
            assert_eq!(
                expected, got,
                "the operator permutes the class basis with consistent phases"
            );
        }
        dest.push(target);
        phase.push(lambda);
    }
    (dest, phase)
}

/// The generators whose commutation conditions define the certified
/// intertwining system: the two outer isotropic halves, the shared piece,
/// and the center.
fn certified_generators(data: &FiberedSumData) -> Vec<(Vec<FElt>, u64)> {
    let mut gens: Vec<(Vec<FElt>, u64)> = Vec::new();
    for u in data
        .w1_basis()
        .into_iter()
        .chain(data.w0_basis())
        .chain(data.g_w1_basis())
    {
        gens.push((u, 0));
    }
    gens.push((vec![0; data.dim_w_star()], 1));
    gens
}

fn shared_generators(data: &FiberedSumData) -> Vec<(Vec<FElt>, u64)> {
    let mut gens: Vec<(Vec<FElt>, u64)> = Vec::new();
    for u in data.w0_basis() {
        gens.push((u, 0));
    }
    gens.push((vec![0; data.dim_w_star()], 1));
    gens
}

/// Dimension of the space of maps between the two class bases commuting
/// with the restrictions of the given group elements.
fn commutant_dimension(
    rep: &HeisenbergRep,
    target: &ClassBasis,
    source: &ClassBasis,
    gens: &[(Vec<FElt>, u64)],
) -> (usize, ClassBasis) {
    let a = target.classes.len();
    let b = source.classes.len();
    let p = rep.space().p();
    let mut uf = PhasedUnionFind::new(a * b, p);
    for (w, k) in gens {
        let (ldest, lphase) = restrict(rep, target, w, *k);
        let (rdest, rphase) = restrict(rep, source, w, *k);
        for x in 0..a {
            for y in 0..b {
                let d = (lphase[x] + p - rphase[y]) % p;
                uf.relate(ldest[x] * b + rdest[y], x * b + y, d);
            }
        }
    }
    let classes = uf.into_classes();
    (classes.classes.len(), classes)
}

/// The certified intertwiner data: the operator, the certified dimension,
/// and the dimensions of all spaces involved.
#[derive(Debug, Clone)]
pub struct IntertwinerReport {
    /// The intertwining operator from the second fixed space to the first,
    /// acting as the prescribed scalar on the overlap submodule.
    pub operator: CycMat,
    /// Dimension of the certified intertwining system's solution space;
    /// always 1 when returned without error.
    pub hom_dim: usize,
    /// Dimension when only the shared piece and the center constrain the
    /// maps; p^{dim W13} at desk scale.
    pub hom_dim_shared_only: usize,
    /// Dimension of the ambient representation space, p^{(dim W*)/2}.
    pub dim_v_star: usize,
    /// Dimension of the first fixed space, p^{(dim W)/2}.
    pub dim_v_tau: usize,
    /// Dimension of the second fixed space, p^{(dim W)/2}.
    pub dim_v_gtau: usize,
    /// Dimension of the overlap submodule, p^{(dim W0)/2}.
    pub dim_v_tau0: usize,
}

/// Computes the intertwiner normalized to act as `c` on the overlap
/// submodule, certifying along the way that the intertwining space is
/// one-dimensional.
pub fn intertwiner(
    data: &FiberedSumData,
    c: &Cyc,
) -> Result<IntertwinerReport, IntertwiningError> {
    let rep = build_heisenberg_rep(data.space().clone(), data.polarization().clone())?;
    let p = data.space().p();
    let v_tau = fixed_space(&rep, &data.g_w1_basis());
    let v_gtau = fixed_space(&rep, &data.w1_basis());
    let both: Vec<Vec<FElt>> = data
        .w1_basis()
        .into_iter()
        .chain(data.g_w1_basis())
        .collect();
    let v_tau0 = fixed_space(&rep, &both);
    let expect_dim = |name: &str, got: usize, exponent: usize| -> Result<(), IntertwiningError> {
        let want = (p as usize).pow(exponent as u32);
        if got != want {
            return Err(IntertwiningError::TheoremViolation(format!(
                "{name} has dimension {got}, expected {want} (p={p}, dim_w13={}, dim_w0={})",
                data.dim_w13, data.dim_w0
            )));
        }
        Ok(())
    };
    expect_dim("the first fixed space", v_tau.classes.len(), data.dim_w() / 2)?;
    expect_dim(
        "the second fixed space",
        v_gtau.classes.len(),
        data.dim_w() / 2,
    )?;
    expect_dim("the overlap submodule", v_tau0.classes.len(), data.dim_w0 / 2)?;

    let gens = certified_generators(data);
    let (hom_dim, hom_classes) = commutant_dimension(&rep, &v_tau, &v_gtau, &gens);
    let (hom_dim_shared_only, _) =
        commutant_dimension(&rep, &v_tau, &v_gtau, &shared_generators(data));
    if hom_dim != 1 {
        let sample: Vec<(usize, usize)> = hom_classes
            .classes
            .iter()
            .take(4)
            .map(|class| {
                let idx = class[0].0;
                (idx / v_gtau.classes.len(), idx % v_gtau.classes.len())
            })
            .collect();
        return Err(IntertwiningError::TheoremViolation(format!(
            "solution space has dimension {hom_dim} (p={p}, dim_w13={}, dim_w0={}); \
             class representatives (row, column): {sample:?}",
            data.dim_w13, data.dim_w0
        )));
    }

    let b = v_gtau.classes.len();
    let level = p as u32;
    let mut raw = CycMat::zero(v_tau.classes.len(), b, level);
    for &(idx, e) in &hom_classes.classes[0] {
        *raw.at_mut(idx / b, idx % b) = Cyc::zeta(level, e as i64);
    }

    // Express each overlap basis vector over the two class bases; classes
    // partition the coordinates, so coefficients are read off at
    // representatives and certified over the full support.
    let coords_over = |basis: &ClassBasis, vector: &[(usize, u64)]| -> Vec<Cyc> {
        let mut out = vec![Cyc::zero(level); basis.classes.len()];
        for &(i, e) in vector {
            let (a, phase) = basis.class_of[i]
                .expect("an overlap vector is supported on live classes");
            let coeff = Cyc::zeta(level, e as i64 - phase as i64);
            if out[a].is_zero() {
                out[a] = coeff;
            } else {
                assert!(
                    out[a].eq_value(&coeff),
                    "overlap vector coefficients are consistent across a class"
                );
            }
        }
        out
    };
    let mut scalar: Option<Cyc> = None;
    for overlap_class in &v_tau0.classes {
        let alpha = coords_over(&v_tau, overlap_class);
        let beta = coords_over(&v_gtau, overlap_class);
        let mut image = vec![Cyc::zero(level); v_tau.classes.len()];
        for (y, coeff) in beta.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for x in 0..v_tau.classes.len() {
                if !raw.at(x, y).is_zero() {
                    image[x] = image[x].add(&raw.at(x, y).mul(coeff));
                }
            }
        }
        let pivot = alpha
            .iter()
            .position(|v| !v.is_zero())
            .expect("an overlap vector has a nonzero coordinate");
        let ratio = image[pivot].mul(&alpha[pivot].inv());
        for (got, want) in image.iter().zip(&alpha) {
            assert!(
                got.eq_value(&want.mul(&ratio)),
                "the raw intertwiner is a scalar on each overlap vector"
            );
        }
        match &scalar {
            None => scalar = Some(ratio),
            Some(s) => assert!(
                s.eq_value(&ratio),
                "the raw intertwiner acts by one scalar on the whole overlap"
            ),
        }
    }
    let scalar = scalar.expect("the overlap submodule is nonzero");
    assert!(
        !scalar.is_zero(),
        "the intertwiner is nonzero on the overlap submodule"
    );
    let operator = raw.scale_cyc(&c.mul(&scalar.inv()));

    Ok(IntertwinerReport {
        operator,
        hom_dim,
        hom_dim_shared_only,
        dim_v_star: rep.dim(),
        dim_v_tau: v_tau.classes.len(),
        dim_v_gtau: v_gtau.classes.len(),
        dim_v_tau0: v_tau0.classes.len(),
    })
}

/// Expresses the action of a symplectic element on the span of a class
/// basis, failing when the element does not preserve the span.
fn restricted_action(
    basis: &ClassBasis,
    omega: &CycMat,
) -> Result<CycMat, IntertwiningError> {
    let n = basis.classes.len();
    let level = omega.a.first().map(Cyc::level).unwrap_or(1);
    let mut out = CycMat::zero(n, n, level);
    for (a, class) in basis.classes.iter().enumerate() {
        let mut image = vec![Cyc::zero(level); basis.class_of.len()];
        for &(i, e) in class {
            let phase = Cyc::zeta(basis.p as u32, e as i64);
            for x in 0..omega.rows {
                if !omega.at(x, i).is_zero() {
                    image[x] = image[x].add(&omega.at(x, i).mul(&phase));
                }
            }
        }
        let mut coeffs = vec![Cyc::zero(level); n];
        for (target, target_class) in basis.classes.iter().enumerate() {
            coeffs[target] = image[target_class[0].0].clone();
        }
        for (i, value) in image.iter().enumerate() {
            let expected = match basis.class_of[i] {
                Some((target, e)) => coeffs[target].mul(&Cyc::zeta(basis.p as u32, e as i64)),
                None => Cyc::zero(level),
            };
            if !value.eq_value(&expected) {
                return Err(IntertwiningError::TheoremViolation(
                    "the sampled element does not preserve the fixed space".into(),
                ));
            }
        }
        for (target, coeff) in coeffs.into_iter().enumerate() {
            *out.at_mut(target, a) = coeff;
        }
    }
    Ok(out)
}

/// Checks that the intertwiner commutes with the action of a symplectic
/// element of the amalgam preserving both glued spaces and both outer
/// isotropic halves.
pub fn equivariance_check(
    data: &FiberedSumData,
    report: &IntertwinerReport,
    s: &GfMat,
) -> Result<(), IntertwiningError> {
    let rep = build_heisenberg_rep(data.space().clone(), data.polarization().clone())?;
    let ext = weil_extend(&rep, std::slice::from_ref(s), DEFAULT_MAX_ELEMENTS)?;
    let idx = ext
        .elements
        .iter()
        .position(|e| e == s)
        .expect("the sampled element generates its closure");
    let omega = &ext.rep.images[idx];
    let v_tau = fixed_space(&rep, &data.g_w1_basis());
    let v_gtau = fixed_space(&rep, &data.w1_basis());
    let action_tau = restricted_action(&v_tau, omega)?;
    let action_gtau = restricted_action(&v_gtau, omega)?;
    let lhs = report.operator.mul(&action_gtau);
    let rhs = action_tau.mul(&report.operator);
    if !lhs.eq_value(&rhs) {
        return Err(IntertwiningError::TheoremViolation(
            "the intertwiner does not commute with the sampled element".into(),
        ));
    }
    Ok(())
}
