//! The `tml` command line.
//!
//! Every subcommand prints one JSON document to stdout, or to `--out`.
//! Exit status is 0 on success, 1 when a check or numerical computation
//! fails, and 2 on usage or input errors.

pub mod error;
pub mod input;
pub mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use tml_core::geometry::{homology_class_on_torus, uniform_grid, CliffordTorus};
use tml_core::isotopy_lab::{
    induced_h1_map, simulate_case1, simulate_case2, simulate_case2_variant, IsotopyReport,
};
use tml_core::linking::{
    gauss_linking_trace, linking_class_eval, preimage_degree, DegreeGrid, DegreeResult, TorusSurface,
};
use tml_core::maslov::{
    det_squared_phase_trace, framing_planes, make_m_framing, maslov_class_eval, maslov_index_loop,
    torus_tangent_frames, MaslovReport,
};
use tml_core::monodromy_groups::{
    classify, decompose_e, decompose_gmu, decompose_x, maslov_defect, match_maslov, GroupTag,
};
use tml_core::{GeneratorWord, MaslovCovector, Mat2Z};

pub use error::CliError;
use verify::{verify_all, RunConfig};

pub const GRID_SCALE_VAR: &str = "TML_GRID_SCALE";

#[derive(Debug, Parser)]
#[command(name = "tml", version, about = "Integer monodromy checks and numerical invariants for tori in R^4")]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact algorithms on integer 2x2 matrices.
    #[command(subcommand)]
    Group(GroupCmd),
    #[command(subcommand)]
    Maslov(MaslovCmd),
    #[command(subcommand)]
    Linking(LinkingCmd),
    #[command(subcommand)]
    Geom(GeomCmd),
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Run every reproduction check and print a summary.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Gmu,
    E,
    X,
}

#[derive(Debug, Subcommand)]
enum GroupCmd {
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        matrix: Mat2Z,
    },
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        matrix: Mat2Z,
        #[arg(long, value_enum)]
        target: Target,
    },
    Defect {
        #[arg(long, allow_hyphen_values = true)]
        matrix: Mat2Z,
    },
    MatchMaslov {
        #[arg(long, allow_hyphen_values = true)]
        nu: MaslovCovector,
    },
}

#[derive(Debug, Subcommand)]
enum MaslovCmd {
    Class {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        n1: i64,
        #[arg(long, allow_negative_numbers = true)]
        n2: i64,
        #[arg(long)]
        samples: Option<usize>,
        /// CSV of the unwrapped det² phase (t,phase).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    Framing {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        m: i64,
    },
}

#[derive(Debug, Subcommand)]
enum LinkingCmd {
    Eval {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        n1: i64,
        #[arg(long, allow_negative_numbers = true)]
        n2: i64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        grid: Option<usize>,
        /// CSV of the degree density per curve sample (s,density).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    Raw {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        /// Also count signed preimages of a regular value.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum GeomCmd {
    Class {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
    },
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    Case1 {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        samples: Option<usize>,
    },
    Case2 {
        /// Use the core circle in the z1-plane.
        #[arg(long)]
        variant: bool,
        /// Radius of the core circle.
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long)]
        ns: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
    },
    H1map {
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Run only these criteria (comma-separated numbers).
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
    /// Test mode: corrupt the expected matrix of the named check.
    #[arg(long, hide = true)]
    inject_wrong_expected: Option<String>,
}

#[derive(Debug, Serialize)]
struct GroupOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    tag: Option<GroupTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    word: Option<GeneratorWord>,
    matrix: Mat2Z,
    #[serde(skip_serializing_if = "Option::is_none")]
    defect: Option<MaslovCovector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

#[derive(Debug, Serialize)]
struct LinkingOutput {
    #[serde(flatten)]
    result: DegreeResult,
    method: &'static str,
    grid: DegreeGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<i64>,
}

#[derive(Debug, Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    report: IsotopyReport,
    tag: GroupTag,
}

#[derive(Debug, Serialize)]
struct ClassOutput {
    n1: i64,
    n2: i64,
    samples: usize,
}

/// Default-grid multiplier from the environment.
pub fn grid_scale() -> Result<usize, CliError> {
    match std::env::var(GRID_SCALE_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::Usage(format!("{GRID_SCALE_VAR}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(CliError::Usage(format!(
                "{GRID_SCALE_VAR} must be an integer ≥ 1, got `{v}`"
            ))),
        },
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Check(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn torus(a: f64, b: f64) -> Result<CliffordTorus, CliError> {
    Ok(CliffordTorus::new(a, b)?)
}

fn group(cmd: GroupCmd) -> Result<GroupOutput, CliError> {
    Ok(match cmd {
        GroupCmd::Classify { matrix } => GroupOutput {
            tag: Some(classify(&matrix)?),
            word: None,
            matrix,
            defect: None,
            verified: None,
        },
        GroupCmd::Decompose { matrix, target } => {
            let d = match target {
                Target::Gmu => decompose_gmu(&matrix)?,
                Target::E => decompose_e(&matrix)?,
                Target::X => decompose_x(&matrix)?,
            };
            if !d.verified {
                return Err(CliError::Check(format!("decomposition of {matrix} does not re-evaluate")));
            }
            GroupOutput {
                tag: Some(classify(&matrix)?),
                word: Some(d.word),
                matrix,
                defect: None,
                verified: Some(d.verified),
            }
        }
        GroupCmd::Defect { matrix } => {
            let d = maslov_defect(&matrix, MaslovCovector::CLIFFORD)?;
            GroupOutput {
                tag: Some(classify(&matrix)?),
                word: None,
                matrix,
                defect: Some(d.defect),
                verified: Some(d.divisible_by_four),
            }
        }
        GroupCmd::MatchMaslov { nu } => {
            let g = match_maslov(nu)?;
            let verified = MaslovCovector::CLIFFORD.compose(&g)? == nu;
            GroupOutput {
                tag: Some(classify(&g)?),
                word: Some(decompose_x(&g)?.word),
                matrix: g,
                defect: Some(maslov_defect(&g, MaslovCovector::CLIFFORD)?.defect),
                verified: Some(verified),
            }
        }
    })
}

fn linking_output(
    result: Result<(DegreeResult, tml_core::linking::DegreeTrace), tml_core::Error>,
    grid: DegreeGrid,
    oracle: Option<i64>,
    trace: Option<&Path>,
) -> Result<LinkingOutput, CliError> {
    let (result, tr) = result?;
    if let Some(path) = trace {
        input::write_trace(path, ["s", "density"], &tr.s, &tr.density)?;
    }
    Ok(LinkingOutput {
        result,
        method: if oracle.is_some() { "gauss_integral+preimage" } else { "gauss_integral" },
        grid,
        oracle,
    })
}

fn simulate_output(report: IsotopyReport) -> Result<SimulateOutput, CliError> {
    let tag = classify(&report.monodromy)?;
    if !matches!(tag, GroupTag::GmuPlus | GroupTag::GmuMinus) {
        return Err(CliError::Check(format!(
            "simulated monodromy {} is not in the Maslov stabilizer",
            report.monodromy
        )));
    }
    Ok(SimulateOutput { report, tag })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let scale = grid_scale()?;
    let defaults = RunConfig::scaled(scale);
    let out = cli.out.as_deref();
    match cli.command {
        Command::Group(cmd) => emit(&group(cmd)?, out),
        Command::Maslov(MaslovCmd::Class { a, b, n1, n2, samples, trace }) => {
            let t = torus(a, b)?;
            let n = samples.unwrap_or(defaults.maslov_samples);
            let report = maslov_class_eval(&t, n1, n2, n)?;
            if let Some(path) = trace {
                let phase = det_squared_phase_trace(&torus_tangent_frames(&t, n1, n2, n)?)?;
                input::write_trace(&path, ["t", "phase"], &uniform_grid(n), &phase)?;
            }
            emit(&report, out)
        }
        Command::Maslov(MaslovCmd::Framing { curve, m }) => {
            let c = input::read_curve(&curve)?;
            let n = c.native_samples().unwrap_or(defaults.maslov_samples);
            let sigma = make_m_framing(&c, m, n)?;
            let report: MaslovReport = maslov_index_loop(&framing_planes(&c, &sigma)?)?;
            emit(&report, out)
        }
        Command::Linking(LinkingCmd::Eval { a, b, n1, n2, eps, grid, trace }) => {
            let t = torus(a, b)?;
            let g = DegreeGrid::cube(grid.unwrap_or(defaults.linking_grid));
            let r = linking_class_eval(&t, n1, n2, eps, g)?;
            if let Some(path) = trace {
                let curve = tml_core::geometry::basis_curve(&t, n1, n2)?.push_off(eps);
                let (_, tr) = gauss_linking_trace(&curve, &TorusSurface::Clifford(t), g)?;
                input::write_trace(&path, ["s", "density"], &tr.s, &tr.density)?;
            }
            let o = LinkingOutput {
                result: r,
                method: "gauss_integral",
                grid: g,
                oracle: None,
            };
            emit(&o, out)?;
            if r.rounded != 0 {
                return Err(CliError::Check(format!("linking class evaluates to {}, expected 0", r.rounded)));
            }
            Ok(())
        }
        Command::Linking(LinkingCmd::Raw { curve, surface, grid, oracle, trace }) => {
            let c = input::read_curve(&curve)?;
            let s = input::read_surface(&surface)?;
            let g = DegreeGrid::cube(grid.unwrap_or(defaults.linking_grid));
            let count = if oracle { Some(preimage_degree(&c, &s, g)?) } else { None };
            let o = linking_output(gauss_linking_trace(&c, &s, g), g, count, trace.as_deref())?;
            emit(&o, out)?;
            if let Some(k) = count {
                if k != o.result.rounded {
                    return Err(CliError::Check(format!(
                        "degree integral {} disagrees with preimage count {k}",
                        o.result.rounded
                    )));
                }
            }
            Ok(())
        }
        Command::Geom(GeomCmd::Class { curve, a, b }) => {
            let c = input::read_curve(&curve)?;
            let n = c.native_samples().unwrap_or(defaults.maslov_samples);
            let class = homology_class_on_torus(&c, &torus(a, b)?, n)?;
            emit(&ClassOutput { n1: class.n1, n2: class.n2, samples: n }, out)
        }
        Command::Simulate(SimulateCmd::Case1 { b, samples }) => {
            let r = simulate_case1(b, samples.unwrap_or(defaults.case1_samples))?;
            emit(&simulate_output(r)?, out)
        }
        Command::Simulate(SimulateCmd::Case2 { variant, b, eps, ns, nt }) => {
            let (ns, nt) = (ns.unwrap_or(defaults.ns), nt.unwrap_or(defaults.nt));
            let r = if variant {
                simulate_case2_variant(b, eps, ns, nt)?
            } else {
                simulate_case2(b, eps, ns, nt)?
            };
            emit(&simulate_output(r)?, out)
        }
        Command::Simulate(SimulateCmd::H1map { map }) => {
            let m = induced_h1_map(&input::read_map(&map)?)?;
            emit(
                &GroupOutput {
                    tag: Some(classify(&m)?),
                    word: None,
                    matrix: m,
                    defect: None,
                    verified: None,
                },
                out,
            )
        }
        Command::VerifyAll(args) => {
            let mut cfg = defaults;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(ns) = args.ns {
                cfg.ns = ns;
            }
            if let Some(nt) = args.nt {
                cfg.nt = nt;
            }
            if let Some(n) = args.samples {
                cfg.maslov_samples = n;
                cfg.case1_samples = n;
            }
            if let Some(g) = args.grid {
                cfg.linking_grid = g;
            }
            cfg.only = args.only;
            cfg.inject_wrong_expected = args.inject_wrong_expected;
            let summary = verify_all(&cfg)?;
            emit(&summary, out)?;
            if !summary.pass {
                let failed: Vec<&str> = summary.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
                return Err(CliError::Check(format!("failed checks: {}", failed.join(", "))));
            }
            Ok(())
        }
    }
}

/// Parse `argv` (program name first), execute, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tml: {e}");
            e.exit_code()
        }
    }
}
