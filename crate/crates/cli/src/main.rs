//! Command-line front end: parses input files, dispatches to the
//! computational core, and writes exact JSON/CSV reports.
//!
//! Exit codes: 0 on success, 1 on a domain error (malformed input,
//! out-of-range parameters), 2 when a certified identity or invariant
//! fails to hold. Every failure prints a machine-readable error object;
//! identical inputs always produce byte-identical outputs.

use clap::{Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tameforge_core::cyclo::Cyc;
use tameforge_core::distinction::{
    build_group_gl2, cuspidal_character, cuspidal_parameters, default_involution_seeds,
    elliptic_torus, frobenius_induce, induced_character, involution_orbits, resolve_involution,
    theorem_sides_cuspidal, DistinctionError, Involution,
};
use tameforge_core::exact::IMat;
use tameforge_core::exec::run_batch;
use tameforge_core::fp::{Gf, GfMat};
use tameforge_core::galois::GaloisAction;
use tameforge_core::genericity::{ge_check, ResidueFunctional};
use tameforge_core::groups::character_pairing;
use tameforge_core::heisenberg::{
    build_heisenberg_rep, heisenberg_group, weil_extend, Polarization, SymplecticSpaceFp,
};
use tameforge_core::intertwining::{build_fibered_sum, intertwiner};
use tameforge_core::rat::{rat, Rat};
use tameforge_core::report::{
    assemble_character_data, assemble_galois_action, character_table, distinction_run_report,
    intertwine_run_report, to_json, CharacterDataFile, CheckLine, ErrorReport, GaloisActionFile,
    SelftestReport, TorsionRunReport, WeilRunReport,
};
use tameforge_core::rootdata::{
    fundamental_group_order, torsion_report, LeviSubsystem, RootDatum,
};
use tameforge_core::towers::{permissibility_report, recover_tower, CharacterData, TowerError};
use tameforge_core::DEFAULT_MAX_ELEMENTS;

#[derive(Parser)]
#[command(name = "tameforge", version, about = "Exact reports on towers, genericity, oscillator representations, and distinction")]
struct Cli {
    /// Write the main report to this path instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the nested subsystem tower from character depth data.
    Tower {
        /// Root datum file.
        #[arg(long)]
        datum: PathBuf,
        /// Symmetry action file.
        #[arg(long)]
        galois: PathBuf,
        /// Character depth data file.
        #[arg(long)]
        chars: PathBuf,
    },
    /// Run every permissibility proxy: tower, torsion, and genericity.
    Generic {
        /// Root datum file.
        #[arg(long)]
        datum: PathBuf,
        /// Symmetry action file.
        #[arg(long)]
        galois: PathBuf,
        /// Character depth data file.
        #[arg(long)]
        chars: PathBuf,
        /// Residue field as `p,m`.
        #[arg(long, value_parser = parse_field)]
        field: (u64, usize),
    },
    /// Torsion-prime verdict for a root datum.
    Torsion {
        /// Root datum file.
        #[arg(long)]
        datum: PathBuf,
        /// Residue characteristic as `p,1`.
        #[arg(long, value_parser = parse_field)]
        field: (u64, usize),
    },
    /// Extend the Heisenberg representation to a generated symplectic
    /// subgroup and report the structure with a character table.
    Weil {
        /// Prime field as `p,1`.
        #[arg(long, value_parser = parse_field)]
        field: (u64, usize),
        /// Dimension of the symplectic space, even.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Certify the intertwining dimension of a glued-space configuration.
    Intertwine {
        /// Prime field as `p,1`.
        #[arg(long, value_parser = parse_field)]
        field: (u64, usize),
        /// Total dimension of each glued symplectic space.
        #[arg(long = "dim-w")]
        dim_w: usize,
        /// Dimension of the shared block.
        #[arg(long = "dim-w0")]
        dim_w0: usize,
    },
    /// Verify the distinction identity for every cuspidal parameter and
    /// every seeded involution orbit.
    Distinction {
        /// Field size, an odd prime power.
        #[arg(long)]
        q: u64,
        /// Enumeration bound for the group order.
        #[arg(long = "bound-group-size")]
        bound: Option<usize>,
        /// Corrupt the computed left side before the final comparison.
        #[arg(long, hide = true)]
        inject_mismatch: bool,
    },
    /// Run the full invariant suite on seeded samples.
    Selftest {
        /// Seed for the randomized samples.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_field(s: &str) -> Result<(u64, usize), String> {
    let (p, m) = s
        .split_once(',')
        .ok_or_else(|| format!("expected p,m but got {s:?}"))?;
    let p = p
        .trim()
        .parse::<u64>()
        .map_err(|_| format!("bad prime in {s:?}"))?;
    let m = m
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad extension degree in {s:?}"))?;
    Ok((p, m))
}

struct RunOutput {
    report: String,
    sidecars: Vec<(String, String)>,
    failed: bool,
}

impl RunOutput {
    fn report(report: String) -> RunOutput {
        RunOutput {
            report,
            sidecars: Vec::new(),
            failed: false,
        }
    }
}

struct RunFailure {
    code: String,
    message: String,
    violation: bool,
}

fn domain(code: &str, message: impl ToString) -> RunFailure {
    RunFailure {
        code: code.to_string(),
        message: message.to_string(),
        violation: false,
    }
}

fn violation(message: impl ToString) -> RunFailure {
    RunFailure {
        code: "theorem_violation".to_string(),
        message: message.to_string(),
        violation: true,
    }
}

impl From<TowerError> for RunFailure {
    fn from(e: TowerError) -> RunFailure {
        domain("character_data", e)
    }
}

impl From<tameforge_core::report::ReportError> for RunFailure {
    fn from(e: tameforge_core::report::ReportError) -> RunFailure {
        domain("input", e)
    }
}

impl From<tameforge_core::rootdata::RootDatumError> for RunFailure {
    fn from(e: tameforge_core::rootdata::RootDatumError) -> RunFailure {
        domain("root_datum", e)
    }
}

impl From<tameforge_core::heisenberg::HeisenbergError> for RunFailure {
    fn from(e: tameforge_core::heisenberg::HeisenbergError) -> RunFailure {
        domain("heisenberg", e)
    }
}

impl From<tameforge_core::intertwining::IntertwiningError> for RunFailure {
    fn from(e: tameforge_core::intertwining::IntertwiningError) -> RunFailure {
        use tameforge_core::intertwining::IntertwiningError as E;
        match &e {
            E::TheoremViolation(_) => violation(e),
            _ => domain("intertwining", e),
        }
    }
}

impl From<DistinctionError> for RunFailure {
    fn from(e: DistinctionError) -> RunFailure {
        match &e {
            DistinctionError::TheoremViolation(_) => violation(e),
            _ => domain("distinction", e),
        }
    }
}

impl From<tameforge_core::groups::GroupError> for RunFailure {
    fn from(e: tameforge_core::groups::GroupError) -> RunFailure {
        domain("group", e)
    }
}

fn max_elements() -> usize {
    std::env::var("TAMEFORGE_MAX_ELEMENTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_MAX_ELEMENTS)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, RunFailure> {
    let text = fs::read_to_string(path)
        .map_err(|e| domain("io", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| domain("parse", format!("{what} file {}: {e}", path.display())))
}

fn load_character_data(
    datum: &Path,
    galois: &Path,
    chars: &Path,
) -> Result<CharacterData, RunFailure> {
    let datum: RootDatum = read_json(datum, "root datum")?;
    let galois: GaloisActionFile = read_json(galois, "symmetry action")?;
    let action = assemble_galois_action(datum, &galois, max_elements())?;
    let chars: CharacterDataFile = read_json(chars, "character data")?;
    Ok(assemble_character_data(action, &chars)?)
}

fn run_tower(datum: &Path, galois: &Path, chars: &Path) -> Result<RunOutput, RunFailure> {
    let data = load_character_data(datum, galois, chars)?;
    let tower = recover_tower(&data)?;
    Ok(RunOutput::report(to_json(&tower)))
}

fn run_generic(
    datum: &Path,
    galois: &Path,
    chars: &Path,
    field: (u64, usize),
) -> Result<RunOutput, RunFailure> {
    let data = load_character_data(datum, galois, chars)?;
    let report = permissibility_report(&data, field.0, field.1)?;
    Ok(RunOutput::report(to_json(&report)))
}

fn run_torsion(datum: &Path, field: (u64, usize)) -> Result<RunOutput, RunFailure> {
    if field.1 != 1 {
        return Err(domain(
            "field",
            "the torsion verdict depends only on the prime; pass --field p,1",
        ));
    }
    let datum: RootDatum = read_json(datum, "root datum")?;
    datum.validate()?;
    let report = TorsionRunReport {
        p: field.0,
        fundamental_group_order: fundamental_group_order(&datum),
        report: torsion_report(&datum, field.0)?,
    };
    Ok(RunOutput::report(to_json(&report)))
}

fn prime_field(field: (u64, usize)) -> Result<u64, RunFailure> {
    if field.1 != 1 {
        return Err(domain(
            "field",
            "this construction lives over a prime field; pass --field p,1",
        ));
    }
    Ok(field.0)
}

fn symplectic_block_generators(space: &SymplecticSpaceFp) -> Vec<GfMat> {
    let f = space.gf();
    let d = space.dim();
    let n = d / 2;
    let mut shear = GfMat::identity(f, d);
    shear.a[n] = f.one();
    let mut rotate = GfMat::identity(f, d);
    rotate.a[0] = f.zero();
    rotate.a[n * d + n] = f.zero();
    rotate.a[n] = f.one();
    rotate.a[n * d] = f.neg(f.one());
    vec![shear, rotate]
}

fn run_weil(field: (u64, usize), dim: usize) -> Result<RunOutput, RunFailure> {
    let p = prime_field(field)?;
    if dim == 0 || dim % 2 != 0 {
        return Err(domain("dimension", "the symplectic dimension must be even and positive"));
    }
    let space = SymplecticSpaceFp::standard(p, dim / 2)?;
    let (h_table, h_elements) = heisenberg_group(&space, max_elements())?;
    let rep = build_heisenberg_rep(space.clone(), Polarization::standard(&space))?;
    let character = rep.linear_rep(&h_elements).character();
    let table = character_table(&h_table, &character, |i| {
        let (w, k) = &h_elements[i];
        let mut flat = w.clone();
        flat.push(*k);
        flat
    });
    let extension = weil_extend(&rep, &symplectic_block_generators(&space), max_elements())?;
    let report = WeilRunReport {
        p,
        dim_w: dim,
        heisenberg_order: h_elements.len(),
        symplectic_order: extension.elements.len(),
        scalar_modulus: extension.modulus,
        character_table: table.clone(),
    };
    Ok(RunOutput {
        report: to_json(&report),
        sidecars: vec![("characters.csv".to_string(), table.to_csv())],
        failed: false,
    })
}

fn run_intertwine(field: (u64, usize), dim_w: usize, dim_w0: usize) -> Result<RunOutput, RunFailure> {
    let p = prime_field(field)?;
    if dim_w0 > dim_w {
        return Err(domain(
            "dimension",
            "the shared block cannot exceed the glued space",
        ));
    }
    let data = build_fibered_sum(dim_w - dim_w0, dim_w0, p)?;
    let report = intertwiner(&data, &Cyc::one(1))?;
    Ok(RunOutput::report(to_json(&intertwine_run_report(
        &data, &report,
    ))))
}

fn run_distinction(q: u64, bound: Option<usize>, inject: bool) -> Result<RunOutput, RunFailure> {
    let bound = bound.unwrap_or_else(max_elements);
    let g = build_group_gl2(q, bound)?;
    let torus = elliptic_torus(&g)?;
    let orbits = involution_orbits(&g, &default_involution_seeds(&g))?;
    let params = cuspidal_parameters(q);
    let configs: Vec<(usize, u64)> = (0..orbits.len())
        .flat_map(|oid| params.iter().map(move |&k| (oid, k)))
        .collect();
    let results = run_batch(&configs, |&(oid, k)| {
        theorem_sides_cuspidal(&g, &orbits[oid], &torus, k)
    });
    let mut runs = Vec::with_capacity(results.len());
    for (&(oid, k), result) in configs.iter().zip(results) {
        let theorem = result?;
        runs.push(distinction_run_report(q, oid, k, &theorem));
    }
    if inject {
        let first = &runs[0];
        return Err(violation(format!(
            "injected mismatch: lhs {} disagrees with rhs {} for orbit {} parameter {}",
            first.lhs + 1,
            first.rhs,
            first.theta_orbit_id,
            first.rho_param
        )));
    }
    let mut csv = String::from("rho_param,class_rep,size,level,coeffs\n");
    for &k in &params {
        let chi = cuspidal_character(&g, &torus, k)?;
        let table = character_table(&g.table, &chi.values, |i| {
            g.elements[i].a.clone()
        });
        for row in &table.rows {
            let rep = row
                .class_rep
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            csv.push_str(&format!(
                "{k},{rep},{},{},{}\n",
                row.size,
                row.value.level,
                row.value.coeffs.join(",")
            ));
        }
    }
    Ok(RunOutput {
        report: to_json(&runs),
        sidecars: vec![("characters.csv".to_string(), csv)],
        failed: false,
    })
}

fn check(name: &str, cases: usize, pass: bool) -> CheckLine {
    CheckLine {
        name: name.to_string(),
        pass,
        cases,
    }
}

fn tower_setups() -> Vec<(RootDatum, Vec<Vec<IMat>>)> {
    let a1a1 = RootDatum::direct_sum(&RootDatum::sl(2), &RootDatum::sl(2));
    let neg = |rank: usize| {
        IMat::from_rows(
            &(0..rank)
                .map(|i| {
                    (0..rank)
                        .map(|j| if i == j { -1 } else { 0 })
                        .collect::<Vec<i64>>()
                })
                .collect::<Vec<_>>(),
        )
    };
    let reverse = |rank: usize| {
        IMat::from_rows(
            &(0..rank)
                .map(|i| {
                    (0..rank)
                        .map(|j| if i + j + 1 == rank { 1 } else { 0 })
                        .collect::<Vec<i64>>()
                })
                .collect::<Vec<_>>(),
        )
    };
    vec![
        (
            a1a1.clone(),
            vec![vec![], vec![neg(2)], vec![reverse(2)]],
        ),
        (
            RootDatum::sl(3),
            vec![vec![], vec![neg(2)], vec![reverse(2)]],
        ),
        (
            RootDatum::sl(4),
            vec![vec![], vec![neg(3)], vec![reverse(3)]],
        ),
    ]
}

fn check_tower_recovery(rng: &mut ChaCha8Rng) -> CheckLine {
    use tameforge_core::galois::compute_orbits;
    let pool = [rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)];
    let setups = tower_setups();
    let mut recovered = 0usize;
    let mut pass = true;
    let mut attempts = 0usize;
    while recovered < 30 && attempts < 400 {
        let (datum, actions) = &setups[attempts % setups.len()];
        let gens = &actions[attempts % actions.len()];
        attempts += 1;
        let action = GaloisAction::new(datum.clone(), gens.clone(), 2).expect("valid action");
        let orbit_set = compute_orbits(&action);
        let entries: Vec<(usize, Rat)> = orbit_set
            .pair_classes()
            .iter()
            .map(|&pair| {
                (
                    orbit_set.orbits[pair][0],
                    pool[rng.gen_range(0..pool.len())],
                )
            })
            .collect();
        let rho = entries.iter().map(|&(_, d)| d).max().expect("nonempty");
        let data = CharacterData::new(action, &entries, rho, LeviSubsystem::empty(), None)
            .expect("sampled data is valid");
        match recover_tower(&data) {
            Ok(tower) => {
                recovered += 1;
                pass &= tower.depths.len() == tower.d + 1;
                pass &= tower.subsystems.len() == tower.d + 1;
                pass &= tower.subsystems[tower.d].members
                    == (0..data.action().datum().num_roots()).collect::<Vec<_>>();
                for i in 0..tower.d {
                    pass &= tower.subsystems[i].members.len()
                        < tower.subsystems[i + 1].members.len();
                    if i + 1 < tower.d {
                        pass &= tower.depths[i] < tower.depths[i + 1];
                    }
                }
            }
            Err(TowerError::NotLeviClosed(_)) => {}
            Err(_) => pass = false,
        }
    }
    check(
        "randomized depth data recovers a consistent tower",
        recovered,
        pass && recovered >= 30,
    )
}

fn check_genericity_implication(rng: &mut ChaCha8Rng) -> CheckLine {
    let setups: Vec<(RootDatum, Vec<u64>)> = vec![
        (RootDatum::sl(2), vec![3, 5, 7]),
        (RootDatum::sl(3), vec![5, 7]),
        (RootDatum::sl(4), vec![3, 5, 7]),
    ];
    let mut first_condition_hits = 0usize;
    let mut pass = true;
    for (datum, primes) in &setups {
        let inner = LeviSubsystem::empty();
        let outer = LeviSubsystem::full(datum);
        for &p in primes {
            let gf = Gf::new(p, 1).expect("prime field");
            for _ in 0..50 {
                let coordinates: Vec<u64> =
                    (0..datum.rank).map(|_| rng.gen_range(0..p)).collect();
                let functional = ResidueFunctional {
                    gf: gf.clone(),
                    coordinates,
                    depth: rat(1, 2),
                };
                let report = ge_check(datum, &inner, &outer, &functional)
                    .expect("well-formed level pair");
                if report.ge1 {
                    first_condition_hits += 1;
                    pass &= report.ge2;
                    pass &= report.stabilizer_order == report.expected_order;
                }
            }
        }
    }
    check(
        "first genericity condition forces the second on type-A samples",
        first_condition_hits,
        pass && first_condition_hits > 0,
    )
}

fn check_torsion_verdicts() -> CheckLine {
    let mut cases = 0usize;
    let mut pass = true;
    for n in 2..=6usize {
        for p in [3u64, 5] {
            let gl = torsion_report(&RootDatum::gl(n), p).expect("valid datum");
            pass &= !gl.condition4_required;
            let sl = torsion_report(&RootDatum::sl(n), p).expect("valid datum");
            pass &= sl.condition4_required == (n as u64 % p == 0);
            cases += 2;
        }
    }
    check("torsion verdicts match the classification", cases, pass)
}

fn check_stone_von_neumann() -> CheckLine {
    let mut pass = true;
    let mut cases = 0usize;
    for (p, n) in [(3u64, 1usize), (5, 1)] {
        let space = SymplecticSpaceFp::standard(p, n).expect("valid space");
        let (table, elements) = heisenberg_group(&space, max_elements()).expect("closure fits");
        let rep = build_heisenberg_rep(space.clone(), Polarization::standard(&space))
            .expect("standard polarization");
        let character = rep.linear_rep(&elements).character();
        pass &= character[0].eq_value(&Cyc::from_int((p as i64).pow(n as u32)));
        let central = rep.operator(&vec![0u64; 2 * n], 1);
        let mut scalar = true;
        for r in 0..rep.dim() {
            for c in 0..rep.dim() {
                let expect = if r == c {
                    Cyc::zeta(p as u32, 1)
                } else {
                    Cyc::zero(p as u32)
                };
                scalar &= central.at(r, c).eq_value(&expect);
            }
        }
        pass &= scalar;
        let self_pairing =
            character_pairing(&table, &character, &character).expect("lengths match");
        pass &= self_pairing.eq_value(&Cyc::one(1));
        let swapped = Polarization {
            plus: Polarization::standard(&space).minus,
            minus: Polarization::standard(&space).plus,
        };
        let rep2 = build_heisenberg_rep(space.clone(), swapped).expect("swapped polarization");
        let character2 = rep2.linear_rep(&elements).character();
        pass &= character
            .iter()
            .zip(&character2)
            .all(|(a, b)| a.eq_value(b));
        cases += 1;
    }
    check(
        "induced representation satisfies the uniqueness package",
        cases,
        pass,
    )
}

fn check_weil_covariance() -> CheckLine {
    let space = SymplecticSpaceFp::standard(3, 1).expect("valid space");
    let f = space.gf().clone();
    let (_, h_elements) = heisenberg_group(&space, max_elements()).expect("closure fits");
    let rep = build_heisenberg_rep(space.clone(), Polarization::standard(&space))
        .expect("standard polarization");
    let extension = weil_extend(&rep, &symplectic_block_generators(&space), max_elements())
        .expect("extension exists");
    let mut pass = extension.elements.len() <= 48;
    let mut cases = 0usize;
    for (i, s) in extension.elements.iter().enumerate() {
        let omega = &extension.rep.images[i];
        let omega_inv = &extension.rep.images[extension.table.inv(i)];
        for (w, k) in &h_elements {
            let lhs = omega.mul(&rep.operator(w, *k)).mul(omega_inv);
            let rhs = rep.operator(&s.mul_vec(&f, w), *k);
            pass &= lhs.eq_value(&rhs);
            cases += 1;
        }
    }
    check(
        "conjugating the base operators tracks the matrix action",
        cases,
        pass,
    )
}

fn check_intertwining_dimension() -> CheckLine {
    let configs = [(3u64, 2usize, 0usize), (3, 0, 2), (3, 2, 2), (5, 2, 0)];
    let results = run_batch(&configs, |&(p, w13, w0)| {
        let data = build_fibered_sum(w13, w0, p)?;
        intertwiner(&data, &Cyc::one(1))
    });
    let pass = results.iter().all(|r| {
        r.as_ref()
            .map(|report| report.hom_dim == 1)
            .unwrap_or(false)
    });
    check(
        "intertwining systems certify a one-dimensional solution space",
        configs.len(),
        pass,
    )
}

fn check_distinction_identity() -> CheckLine {
    let mut pass = true;
    let mut cases = 0usize;
    let g = match build_group_gl2(3, max_elements()) {
        Ok(g) => g,
        Err(_) => return check("distinction identity at q = 3", 0, false),
    };
    let torus = elliptic_torus(&g).expect("nonsplit torus exists");
    let orbits =
        involution_orbits(&g, &default_involution_seeds(&g)).expect("seeds resolve");
    for k in cuspidal_parameters(3) {
        for orbit in &orbits {
            match theorem_sides_cuspidal(&g, orbit, &torus, k) {
                Ok(report) => pass &= report.lhs == report.rhs,
                Err(_) => pass = false,
            }
            cases += 1;
        }
    }
    let f = &g.field;
    let split = resolve_involution(
        &g,
        &Involution::Inner {
            t: GfMat::from_rows(&[vec![f.one(), f.zero()], vec![f.zero(), f.neg(f.one())]]),
        },
    )
    .expect("diagonal involution");
    let split_orbit = orbits
        .iter()
        .find(|o| o.members.iter().any(|m| m.table == split.table));
    match split_orbit {
        Some(orbit) => {
            pass &= theorem_sides_cuspidal(&g, orbit, &torus, 2)
                .map(|r| r.lhs == 1)
                .unwrap_or(false);
            pass &= theorem_sides_cuspidal(&g, orbit, &torus, 1)
                .map(|r| r.lhs == 0)
                .unwrap_or(false);
            cases += 2;
        }
        None => pass = false,
    }
    check("distinction identity at q = 3", cases, pass)
}

fn check_induction_agreement() -> CheckLine {
    let g = match build_group_gl2(3, max_elements()) {
        Ok(g) => g,
        Err(_) => return check("averaged and matrix induction agree", 0, false),
    };
    let f = &g.field;
    let torus = elliptic_torus(&g).expect("nonsplit torus exists");
    let shear = g
        .index_of(&GfMat::from_rows(&[
            vec![f.one(), f.one()],
            vec![f.zero(), f.one()],
        ]))
        .expect("unipotent in the group");
    let minus = g
        .index_of(&GfMat::from_rows(&[
            vec![f.neg(f.one()), f.zero()],
            vec![f.zero(), f.neg(f.one())],
        ]))
        .expect("central element");
    let gamma = f.generator();
    let d_gamma = g
        .index_of(&GfMat::from_rows(&[
            vec![gamma, f.zero()],
            vec![f.zero(), f.one()],
        ]))
        .expect("diagonal generator");
    let d_gamma_low = g
        .index_of(&GfMat::from_rows(&[
            vec![f.one(), f.zero()],
            vec![f.zero(), gamma],
        ]))
        .expect("diagonal generator");
    let subgroups = vec![
        vec![g.table.identity()],
        g.table.subgroup_closure(&[minus]),
        g.table.subgroup_closure(&[shear]),
        g.table.subgroup_closure(&[d_gamma, d_gamma_low]),
        torus.members.clone(),
    ];
    let mut pass = true;
    for members in &subgroups {
        let mut dotted = vec![Cyc::zero(1); g.order()];
        for &i in members {
            dotted[i] = Cyc::one(1);
        }
        let averaged = match frobenius_induce(&g, members, &dotted) {
            Ok(v) => v,
            Err(_) => {
                pass = false;
                continue;
            }
        };
        let images = vec![tameforge_core::cyclo::CycMat::identity(1, 1); members.len()];
        match induced_character(&g, members, &images) {
            Ok(direct) => {
                pass &= averaged
                    .values
                    .iter()
                    .zip(&direct)
                    .all(|(a, b)| a.eq_value(b));
            }
            Err(_) => pass = false,
        }
    }
    check("averaged and matrix induction agree", subgroups.len(), pass)
}

fn run_selftest(seed: u64) -> Result<RunOutput, RunFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check_tower_recovery(&mut rng),
        check_genericity_implication(&mut rng),
        check_torsion_verdicts(),
        check_stone_von_neumann(),
        check_weil_covariance(),
        check_intertwining_dimension(),
        check_distinction_identity(),
        check_induction_agreement(),
    ];
    let passed = checks.iter().all(|c| c.pass);
    let report = SelftestReport {
        seed,
        checks,
        passed,
    };
    Ok(RunOutput {
        report: to_json(&report),
        sidecars: Vec::new(),
        failed: !passed,
    })
}

fn dispatch(command: &Command) -> Result<RunOutput, RunFailure> {
    match command {
        Command::Tower {
            datum,
            galois,
            chars,
        } => run_tower(datum, galois, chars),
        Command::Generic {
            datum,
            galois,
            chars,
            field,
        } => run_generic(datum, galois, chars, *field),
        Command::Torsion { datum, field } => run_torsion(datum, *field),
        Command::Weil { field, dim } => run_weil(*field, *dim),
        Command::Intertwine {
            field,
            dim_w,
            dim_w0,
        } => run_intertwine(*field, *dim_w, *dim_w0),
        Command::Distinction {
            q,
            bound,
            inject_mismatch,
        } => run_distinction(*q, *bound, *inject_mismatch),
        Command::Selftest { seed } => run_selftest(*seed),
    }
}

fn write_output(out: &Option<PathBuf>, output: &RunOutput) -> Result<(), RunFailure> {
    match out {
        Some(path) => {
            fs::write(path, &output.report)
                .map_err(|e| domain("io", format!("cannot write {}: {e}", path.display())))?;
            for (suffix, content) in &output.sidecars {
                let sidecar = path.with_extension(suffix);
                fs::write(&sidecar, content).map_err(|e| {
                    domain("io", format!("cannot write {}: {e}", sidecar.display()))
                })?;
            }
        }
        None => print!("{}", output.report),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command).and_then(|output| {
        write_output(&cli.out, &output)?;
        Ok(output.failed)
    }) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(failure) => {
            let envelope = ErrorReport {
                code: failure.code,
                message: failure.message,
            };
            print!("{}", to_json(&envelope));
            ExitCode::from(if failure.violation { 2 } else { 1 })
        }
    }
}
