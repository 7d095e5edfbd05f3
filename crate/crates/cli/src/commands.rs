use std::path::Path;

use lagfib_core::betti::{
    acz_consistency, betti_jacobian, density_scan, torsion_search, BettiState, DensityConfig,
    DensityRow, JacobianMethod, TorsionSearch, JACOBIAN_ABS_FLOOR,
};
use lagfib_core::cubic::classify;
use lagfib_core::elliptic::{
    elliptic_density, quasi_rational_check, rank_map, torsion_enumerate, EllipticDensityRow,
    EllipticTorsion, QuasiRationalReport, RankCell,
};
use lagfib_core::foliation::{
    fiber_trace, leaf_checks, leaf_subspace, section_leaf_compat, LeafCompat, LeafTolerances,
    TraceConfig,
};
use lagfib_core::io::{
    from_json_str, to_canonical_json, AnyPoly, CubicJson, FamilyJson, PolyJson, PotentialJson,
    SectionProblemJson,
};
use lagfib_core::period::{check_riemann, period_frame, Admissibility};
use lagfib_core::scalar::ScalarJson;
use lagfib_core::selftest::{self_test_with, Fixtures};
use lagfib_core::{
    BaseBox, BettiConfig, ClassificationReport, Complex64, EllipticFamily, Error, FiberTrace,
    GaussRat, LeafReport, MonodromyProblem, NewtonConfig, Potential, Scalar, ScalarMode, Section,
};
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, DemoMode, Io, ModeArg, Tolerances};
use crate::output::{emit, read_input, Failure};

type Outcome<T> = std::result::Result<T, Failure>;

/// Attaches the output path so refusals can be written there too.
trait OrFail<T> {
    fn or_fail(self, output: Option<&Path>) -> Outcome<T>;
}

impl<T> OrFail<T> for lagfib_core::Result<T> {
    fn or_fail(self, output: Option<&Path>) -> Outcome<T> {
        self.map_err(|e| Failure::from_core(e, output))
    }
}

pub fn run(cli: Cli) -> Outcome<u8> {
    match cli.command {
        Command::ClassifyCubic { io, mode, tol } => classify_cubic(&io, mode, &tol),
        Command::AnalyzePotential { io, mode, tol } => analyze_potential(&io, mode, &tol),
        Command::TorsionSearch {
            io,
            order,
            grid,
            tol,
        } => torsion(&io, order, grid, &tol),
        Command::DensityScan {
            io,
            order,
            epsilon,
            grid,
            samples,
            tol,
        } => density(&io, &order, epsilon, grid, samples, &tol),
        Command::FoliationReport {
            io,
            mode,
            steps,
            step_size,
            csv,
            tol,
        } => foliation(&io, mode, steps, step_size, csv.as_deref(), &tol),
        Command::EllipticDemo {
            io,
            mode,
            order,
            grid,
            epsilon,
            csv,
            tol,
        } => elliptic(&io, mode, &order, grid, epsilon, csv.as_deref(), &tol),
        Command::AczCheck {
            io,
            samples,
            lambda_draws,
            tol,
        } => acz(&io, samples, lambda_draws, &tol),
        Command::SelfTest {
            input,
            output,
            seed,
            filter,
        } => self_test(input.as_deref(), output.as_deref(), seed, filter.as_deref()),
    }
}

fn load<T: for<'de> Deserialize<'de>>(io: &Io) -> Outcome<T> {
    let text = read_input(&io.input)?;
    from_json_str(&text).or_fail(None)
}

fn finish<T: Serialize>(io: &Io, report: &T) -> Outcome<u8> {
    emit(io.output.as_deref(), &to_canonical_json(report))?;
    Ok(0)
}

fn betti_config(tol: &Tolerances) -> BettiConfig {
    BettiConfig {
        rank_tol: tol.tol_rank,
        ..BettiConfig::default()
    }
}

fn newton_config(tol: &Tolerances) -> NewtonConfig {
    NewtonConfig {
        tol: tol.tol_newton,
        ..NewtonConfig::default()
    }
}

/// The mode named on the command line must agree with the numbers in the
/// document; without either, float is used.
fn resolve_mode(
    flag: Option<ModeArg>,
    doc: impl IntoIterator<Item = lagfib_core::Result<Option<ScalarMode>>>,
) -> lagfib_core::Result<ScalarMode> {
    let mut found: Option<ScalarMode> = None;
    for m in doc {
        match (found, m?) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::ModeMismatch("document mixes exact and float numbers".into()))
            }
            (None, Some(b)) => found = Some(b),
            _ => {}
        }
    }
    match (flag.map(ScalarMode::from), found) {
        (Some(f), Some(d)) if f != d => Err(Error::ModeMismatch(format!(
            "document is {d} but {f} mode was requested"
        ))),
        (Some(f), _) => Ok(f),
        (None, d) => Ok(d.unwrap_or(ScalarMode::Float)),
    }
}

fn parse_vec<S: Scalar>(v: &[ScalarJson]) -> lagfib_core::Result<Vec<S>> {
    v.iter().map(S::from_json).collect()
}

fn json_rows<S: Scalar>(rows: &[Vec<S>]) -> Vec<Vec<ScalarJson>> {
    rows.iter().map(|r| r.iter().map(Scalar::to_json).collect()).collect()
}

fn float_problem(
    j: &SectionProblemJson,
) -> lagfib_core::Result<(Potential<Complex64>, Section<Complex64>, BaseBox)> {
    j.potential.validate()?;
    if j.section.nvars != j.potential.n {
        return Err(Error::Schema("section and potential have different variable counts".into()));
    }
    let mode = resolve_mode(None, [j.potential.g.mode(), j.section.mode()])?;
    let g = AnyPoly::parse(&j.potential.g, mode)?.to_float();
    let f = AnyPoly::parse(&j.section, mode)?.to_float();
    let bx = BaseBox::new(j.domain.lo.clone(), j.domain.hi.clone())?;
    if bx.n() != j.potential.n {
        return Err(Error::Schema(format!(
            "box has {} real coordinates, expected {}",
            bx.real_dim(),
            2 * j.potential.n
        )));
    }
    Ok((Potential::new(g), Section::new(f), bx))
}

fn classify_cubic(io: &Io, mode: Option<ModeArg>, tol: &Tolerances) -> Outcome<u8> {
    let doc: CubicJson = load(io)?;
    let out = io.output.as_deref();
    let mode = resolve_mode(mode, [doc.mode()]).or_fail(None)?;
    let report: ClassificationReport = match mode {
        ScalarMode::Exact => {
            let c = doc.to_cubic::<GaussRat>().or_fail(None)?;
            classify(&c, io.seed, tol.tol_rank).or_fail(out)?
        }
        ScalarMode::Float => {
            let c = doc.to_cubic::<Complex64>().or_fail(None)?;
            classify(&c, io.seed, tol.tol_rank).or_fail(out)?
        }
    };
    finish(io, &report)
}

/// A potential, a base point and optional extras, shared by the point-wise
/// commands.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointProblem {
    potential: PotentialJson,
    point: Vec<ScalarJson>,
    #[serde(default)]
    section: Option<PolyJson>,
    /// Leaf-plane coefficient vectors of the probe points.
    #[serde(default)]
    probes: Vec<Vec<ScalarJson>>,
    #[serde(default)]
    trace: bool,
}

impl PointProblem {
    fn mode(&self, flag: Option<ModeArg>) -> lagfib_core::Result<ScalarMode> {
        self.potential.validate()?;
        if self.point.len() != self.potential.n {
            return Err(Error::DimensionMismatch {
                expected: self.potential.n,
                found: self.point.len(),
            });
        }
        if let Some(s) = &self.section {
            if s.nvars != self.potential.n {
                return Err(Error::Schema(
                    "section and potential have different variable counts".into(),
                ));
            }
        }
        let point_modes = self
            .point
            .iter()
            .chain(self.probes.iter().flatten())
            .map(|x| x.mode().map(Some));
        let section_mode = self.section.as_ref().map(PolyJson::mode);
        resolve_mode(
            flag,
            std::iter::once(self.potential.g.mode())
                .chain(section_mode)
                .chain(point_modes),
        )
    }

    fn potential<S: Scalar>(&self) -> lagfib_core::Result<Potential<S>> {
        Ok(Potential::new(self.potential.g.to_poly()?))
    }

    fn section<S: Scalar>(&self) -> lagfib_core::Result<Option<Section<S>>> {
        self.section
            .as_ref()
            .map(|f| Ok(Section::new(f.to_poly()?)))
            .transpose()
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    mode: ScalarMode,
    n: usize,
    point: Vec<ScalarJson>,
    tau: Vec<Vec<ScalarJson>>,
    admissibility: Admissibility,
    cubic: ClassificationReport,
    /// Present when a section was given and the point is admissible.
    betti: Option<BettiState>,
}

fn analyze<S: Scalar>(
    prob: &PointProblem,
    mode: ScalarMode,
    seed: u64,
    tol: &Tolerances,
    out: Option<&Path>,
) -> Outcome<AnalyzeReport> {
    let p = prob.potential::<S>().or_fail(None)?;
    let b: Vec<S> = parse_vec(&prob.point).or_fail(None)?;
    let section = prob.section::<S>().or_fail(None)?;
    let cfg = betti_config(tol);
    let fr = period_frame(&p, &b).or_fail(out)?;
    let admissibility = check_riemann(&fr, cfg.admissible_tol);
    let cubic = classify(&p.cubic_at(&b).or_fail(out)?, seed, tol.tol_rank).or_fail(out)?;
    let betti = match section {
        Some(s) if admissibility.admissible => {
            let bf: Vec<Complex64> = b.iter().map(Scalar::to_c64).collect();
            Some(
                betti_jacobian(&p.to_float(), &s.to_float(), &bf, JacobianMethod::Analytic, &cfg)
                    .or_fail(out)?,
            )
        }
        _ => None,
    };
    Ok(AnalyzeReport {
        mode,
        n: p.n(),
        point: b.iter().map(Scalar::to_json).collect(),
        tau: json_rows(fr.tau.rows()),
        admissibility,
        cubic,
        betti,
    })
}

fn analyze_potential(io: &Io, mode: Option<ModeArg>, tol: &Tolerances) -> Outcome<u8> {
    let prob: PointProblem = load(io)?;
    let mode = prob.mode(mode).or_fail(None)?;
    let out = io.output.as_deref();
    let report = match mode {
        ScalarMode::Exact => analyze::<GaussRat>(&prob, mode, io.seed, tol, out)?,
        ScalarMode::Float => analyze::<Complex64>(&prob, mode, io.seed, tol, out)?,
    };
    finish(io, &report)
}

#[derive(Serialize)]
struct TorsionReport {
    #[serde(rename = "N")]
    order: u64,
    grid: usize,
    #[serde(flatten)]
    search: TorsionSearch,
}

fn torsion(io: &Io, order: u64, grid: usize, tol: &Tolerances) -> Outcome<u8> {
    let doc: SectionProblemJson = load(io)?;
    let (p, s, bx) = float_problem(&doc).or_fail(None)?;
    let search = torsion_search(&p, &s, &bx, order, grid, &newton_config(tol), &betti_config(tol))
        .or_fail(io.output.as_deref())?;
    finish(io, &TorsionReport { order, grid, search })
}

#[derive(Serialize)]
struct DensityReport {
    rows: Vec<DensityRow>,
}

fn density(
    io: &Io,
    orders: &[u64],
    epsilon: f64,
    grid: usize,
    samples: usize,
    tol: &Tolerances,
) -> Outcome<u8> {
    let doc: SectionProblemJson = load(io)?;
    let (p, s, bx) = float_problem(&doc).or_fail(None)?;
    let dcfg = DensityConfig {
        epsilon,
        grid,
        samples,
        seed: io.seed,
    };
    let rows = density_scan(&p, &s, &bx, orders, &dcfg, &newton_config(tol), &betti_config(tol))
        .or_fail(io.output.as_deref())?;
    finish(io, &DensityReport { rows })
}

#[derive(Serialize)]
struct FoliationOutput {
    mode: ScalarMode,
    leaf: Option<LeafReport>,
    section_compat: Option<LeafCompat>,
    trace: Option<FiberTrace>,
}

/// Default probes: small steps along each leaf direction and one diagonal.
fn default_probes<S: Scalar>(dim: usize) -> Vec<Vec<S>> {
    let frac = |num: i64, den: i64| S::from_i64(num) / S::from_i64(den);
    let mut probes: Vec<Vec<S>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { frac(1, 2) } else { S::zero() })
                .collect()
        })
        .collect();
    probes.push((0..dim).map(|j| frac(if j % 2 == 0 { 1 } else { -1 }, 3 + j as i64)).collect());
    probes
}

fn foliation_generic<S: Scalar>(
    prob: &PointProblem,
    mode: ScalarMode,
    seed: u64,
    trace_cfg: &TraceConfig,
    tol: &Tolerances,
    out: Option<&Path>,
) -> Outcome<FoliationOutput> {
    let p = prob.potential::<S>().or_fail(None)?;
    let b: Vec<S> = parse_vec(&prob.point).or_fail(None)?;
    let section = prob.section::<S>().or_fail(None)?;
    if p.n() != 5 && !prob.trace {
        return Err(Failure::from_core(
            Error::precondition(
                "foliation",
                format!("leaf checks need n = 5 (got n = {}); request a trace instead", p.n()),
            ),
            out,
        ));
    }
    let (leaf, section_compat) = if p.n() == 5 {
        let probes = if prob.probes.is_empty() {
            let dim = leaf_subspace(&p, &b, seed, tol.tol_rank).or_fail(out)?.len();
            default_probes::<S>(dim)
        } else {
            prob.probes
                .iter()
                .map(|t| parse_vec::<S>(t))
                .collect::<lagfib_core::Result<_>>()
                .or_fail(None)?
        };
        let leaf = leaf_checks(&p, &b, &probes, seed, tol.tol_rank, &LeafTolerances::default())
            .or_fail(out)?;
        let compat = section
            .as_ref()
            .map(|s| section_leaf_compat(&p, s, &b, seed, tol.tol_rank))
            .transpose()
            .or_fail(out)?;
        (Some(leaf), compat)
    } else {
        (None, None)
    };
    let trace = if prob.trace {
        let Some(s) = &section else {
            return Err(Failure::from_core(
                Error::precondition("foliation", "a fiber trace needs a section"),
                out,
            ));
        };
        let bf: Vec<Complex64> = b.iter().map(Scalar::to_c64).collect();
        Some(
            fiber_trace(&p.to_float(), &s.to_float(), &bf, trace_cfg, &betti_config(tol))
                .or_fail(out)?,
        )
    } else {
        None
    };
    Ok(FoliationOutput {
        mode,
        leaf,
        section_compat,
        trace,
    })
}

fn foliation(
    io: &Io,
    mode: Option<ModeArg>,
    steps: usize,
    step_size: f64,
    csv: Option<&Path>,
    tol: &Tolerances,
) -> Outcome<u8> {
    let prob: PointProblem = load(io)?;
    let mode = prob.mode(mode).or_fail(None)?;
    let out = io.output.as_deref();
    let trace_cfg = TraceConfig {
        steps,
        step_size,
        seed: io.seed,
        ..TraceConfig::default()
    };
    let report = match mode {
        ScalarMode::Exact => foliation_generic::<GaussRat>(&prob, mode, io.seed, &trace_cfg, tol, out)?,
        ScalarMode::Float => foliation_generic::<Complex64>(&prob, mode, io.seed, &trace_cfg, tol, out)?,
    };
    if let (Some(path), Some(t)) = (csv, &report.trace) {
        emit(Some(path), t.to_csv().trim_end())?;
    }
    finish(io, &report)
}

#[derive(Deserialize)]
struct MonodromyJson {
    generators: Vec<Vec<Vec<i64>>>,
    v: Vec<f64>,
    #[serde(default = "default_max_den")]
    max_den: u64,
}

fn default_max_den() -> u64 {
    1000
}

#[derive(Deserialize)]
struct EllipticInput {
    #[serde(flatten)]
    family: FamilyJson,
    #[serde(default)]
    monodromy: Option<MonodromyJson>,
}

#[derive(Serialize, Default)]
struct EllipticReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    torsion: Option<Vec<EllipticTorsion>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_map: Option<Vec<RankCell>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<Vec<EllipticDensityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monodromy: Option<QuasiRationalReport>,
}

/// Hits closer than this are the same point.
const ELLIPTIC_DEDUP: f64 = 1e-8;
/// Samples per side when checking `Im τ > 0` on the box.
const UPPER_HALF_PLANE_GRID: usize = 65;

fn rank_csv(cells: &[RankCell]) -> String {
    let mut s = String::from("re,im,rank\n");
    for c in cells {
        let rank = c.rank.map(|r| r.to_string()).unwrap_or_default();
        s.push_str(&format!("{:.16e},{:.16e},{rank}\n", c.re, c.im));
    }
    s
}

fn elliptic(
    io: &Io,
    mode: DemoMode,
    orders: &[u64],
    grid: usize,
    epsilon: f64,
    csv: Option<&Path>,
    tol: &Tolerances,
) -> Outcome<u8> {
    let doc: EllipticInput = load(io)?;
    let out = io.output.as_deref();
    let fam = (|| {
        let f = &doc.family;
        let m = resolve_mode(None, [f.tau.mode(), f.s.mode()])?;
        let tau = AnyPoly::parse(&f.tau, m)?.to_float();
        let s = AnyPoly::parse(&f.s, m)?.to_float();
        EllipticFamily::new(tau, s, f.domain)
    })()
    .or_fail(None)?;
    if !fam.verify_upper_half_plane(UPPER_HALF_PLANE_GRID) {
        return Err(Failure::from_core(
            Error::Inadmissible("Im tau is not positive on the box".into()),
            out,
        ));
    }
    let mut report = EllipticReport::default();
    match mode {
        DemoMode::Enumerate => {
            let hits = orders
                .iter()
                .map(|&n| torsion_enumerate(&fam, n, ELLIPTIC_DEDUP))
                .collect::<lagfib_core::Result<Vec<_>>>()
                .or_fail(out)?;
            report.torsion = Some(hits);
        }
        DemoMode::RankMap => {
            let cells = rank_map(&fam, grid, tol.tol_rank, JACOBIAN_ABS_FLOOR);
            if let Some(path) = csv {
                emit(Some(path), rank_csv(&cells).trim_end())?;
            }
            report.rank_map = Some(cells);
        }
        DemoMode::Density => {
            report.density = Some(elliptic_density(&fam, orders, epsilon, grid).or_fail(out)?);
        }
    }
    if let Some(m) = doc.monodromy {
        let mp = MonodromyProblem::new(m.generators).or_fail(None)?;
        report.monodromy = Some(quasi_rational_check(&mp, &m.v, m.max_den).or_fail(out)?);
    }
    finish(io, &report)
}

fn acz(io: &Io, samples: usize, lambda_draws: usize, tol: &Tolerances) -> Outcome<u8> {
    let doc: SectionProblemJson = load(io)?;
    let (p, s, bx) = float_problem(&doc).or_fail(None)?;
    let report = acz_consistency(&p, &s, &bx, samples, lambda_draws, io.seed, &betti_config(tol))
        .or_fail(io.output.as_deref())?;
    finish(io, &report)
}

fn self_test(
    input: Option<&Path>,
    output: Option<&Path>,
    seed: u64,
    filter: Option<&str>,
) -> Outcome<u8> {
    let fixtures = match input {
        Some(path) => from_json_str::<Fixtures>(&read_input(path)?).or_fail(None)?,
        None => Fixtures::default(),
    };
    let report = self_test_with(&fixtures, seed, filter);
    for line in report.lines() {
        println!("{line}");
    }
    if let Some(path) = output {
        emit(Some(path), &to_canonical_json(&report))?;
    }
    Ok(if report.all_pass { 0 } else { 1 })
}
