use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmod_core::dilatations::{
    inner_dilatation, linear_dilatation, mean_inner_dilatation, mean_outer_dilatation, outer_dilatation,
    DilatationParams, MeanDilatation, QuadratureSpec,
};
use pmod_core::discrete::{
    covering_curve_count, covering_sphere_count, discrete_p_capacity, discrete_p_module_with, ring_cell_fractions,
    sample_joining_curves, sample_separating_surfaces, Grid, SolverOptions,
};
use pmod_core::linalg::Matrix;
use pmod_core::moduli::{annulus_curve_module, annulus_sphere_module, ring_module, RingSpec};
use pmod_harness::engine::RING_FRACTION_SAMPLES;
use pmod_harness::report::{format_17, Num, Param};
use pmod_harness::scenario::{Count, MappingConfig, Params, RingConfig, Scenario, Theorem, Tolerances, WeightConfig};
use pmod_harness::{exit, HarnessError, Report, Result};

#[derive(Parser)]
#[command(
    name = "pmod",
    version,
    about = "p-moduli, capacities and dilatations: closed forms, discrete solvers and inequality checks"
)]
struct Cli {
    /// Write JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form p-module of the curves joining the boundary of a ring (p ≠ n).
    RingModule {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        /// Print a JSON object instead of the bare number.
        #[arg(long)]
        json: bool,
    },
    /// Discrete p-capacity of the ring condenser.
    Capacity {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        p: f64,
        /// Write the cell-averaged potential as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Discrete p-module of the ring's radial curves or concentric spheres.
    DiscreteModule {
        #[command(flatten)]
        ring: RingArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "curves")]
        family: FamilyArg,
        /// Number of family members, or `auto` for a grid-covering count.
        #[arg(long, default_value = "auto")]
        count: String,
        /// Write the optimal density ρ as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Pointwise dilatations of a matrix given row-major.
    Dilatation {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        matrix: Vec<f64>,
        #[arg(long)]
        alpha: f64,
    },
    /// Mean inner (α, β) or outer (γ, δ) dilatation of a mapping over its domain box.
    MeanDilatation {
        /// Mapping as `kind[:args]`, e.g. `axis_stretch:0.4`.
        #[arg(long)]
        mapping: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "inner")]
        mean: MeanArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Cells per axis of the graded mesh.
        #[arg(long, default_value_t = 128)]
        cells: usize,
    },
    /// Ring or lower criterion for a mapping and constant weight.
    Criterion {
        #[arg(value_enum)]
        which: CriterionArg,
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Parameter transfer from the lower criterion to the ring criterion.
    Transfer {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Run one scenario file.
    Verify { file: PathBuf },
    /// Run scenario files (directories are searched for `*.scn`) and emit an array of reports.
    Report {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RingArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    #[arg(long, default_value_t = 2.0)]
    r2: f64,
    /// Cells per axis (default 256 in 2D, 48 in 3D).
    #[arg(long)]
    cells: Option<usize>,
}

#[derive(Args)]
struct CaseArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long)]
    p: f64,
    /// Mapping as `kind[:args]`.
    #[arg(long, default_value = "identity")]
    mapping: String,
    /// Constant weight Q.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Skip the discrete path.
    #[arg(long)]
    analytic_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Curves,
    Spheres,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanArg {
    Inner,
    Outer,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Ring,
    Lower,
}

type Object = BTreeMap<&'static str, Param>;

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn object_json(obj: &Object) -> String {
    serde_json::to_string_pretty(obj).expect("object serializes")
}

fn ring_of(args: &RingArgs) -> Result<RingSpec<f64>> {
    Ok(RingSpec::centered(args.n, args.r1, args.r2)?)
}

fn cells_of(args: &RingArgs) -> usize {
    args.cells.unwrap_or(if args.n == 2 { 256 } else { 48 })
}

fn write_csv(path: &Path, grid: &Grid, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    grid.write_csv(values, &mut w)?;
    w.flush()?;
    Ok(())
}

fn mapping_of(s: &str) -> Result<MappingConfig> {
    MappingConfig::from_compact(s).map_err(HarnessError::Config)
}

fn case_scenario(name: &str, theorem: Theorem, case: &CaseArgs) -> Result<Scenario> {
    let n = case.ring.n;
    let mut params = Params::new(n);
    params.p = Some(case.p);
    params.cells = case.ring.cells;
    params.analytic_only = case.analytic_only;
    let s = Scenario {
        name: name.to_string(),
        theorem,
        mapping: mapping_of(&case.mapping)?,
        weight: WeightConfig::Constant(case.q),
        ring: Some(RingConfig { center: None, r1: case.ring.r1, r2: case.ring.r2 }),
        params,
        tolerances: Tolerances::defaults(n),
    };
    s.validate()?;
    s.mapping_spec()?;
    s.ring_spec()?;
    s.weight_for(&s.mapping_spec()?)?;
    Ok(s)
}

fn report_code(r: &Report) -> u8 {
    if r.satisfied {
        exit::OK
    } else {
        exit::VIOLATED
    }
}

fn run_report(out: &Option<PathBuf>, r: &Report) -> Result<u8> {
    emit(out, &r.to_json())?;
    Ok(report_code(r))
}

fn scenario_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> =
                std::fs::read_dir(p)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
            found.retain(|f| f.extension().is_some_and(|e| e == "scn"));
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn dispatch(cli: Cli) -> Result<u8> {
    let out = &cli.out;
    match cli.command {
        Command::RingModule { n, p, a, b, json } => {
            let v = ring_module(n, p, a, b)?;
            if json {
                emit(out, &object_json(&Object::from([("value", Param::from(v))])))?;
            } else {
                emit(out, &format_17(v))?;
            }
            Ok(exit::OK)
        }
        Command::Capacity { ring, p, csv } => {
            let spec = ring_of(&ring)?;
            let grid = Grid::around_ring(&spec, cells_of(&ring))?;
            let sol = discrete_p_capacity(&grid, &spec, p)?;
            if let Some(path) = csv {
                write_csv(&path, &grid, &sol.cell_values(&grid))?;
            }
            // the condenser capacity equals the curve module of the ring
            let exact = annulus_curve_module(ring.n, p, ring.r1, ring.r2)?;
            let obj = Object::from([
                ("value", Param::from(sol.value)),
                ("closedForm", Param::from(exact)),
                ("iterations", Param::from(sol.iterations)),
                ("gradientNorm", Param::from(sol.gradient_norm)),
                ("cells", Param::from(grid.cells_per_axis())),
            ]);
            emit(out, &object_json(&obj))?;
            Ok(exit::OK)
        }
        Command::DiscreteModule { ring, p, family, count, csv } => {
            let spec = ring_of(&ring)?;
            let grid = Grid::around_ring(&spec, cells_of(&ring))?;
            let count = match count.as_str() {
                "auto" => Count::Auto,
                c => Count::Fixed(c.parse().map_err(|_| HarnessError::config("--count must be an integer or auto"))?),
            };
            let (fam, exact, kind) = match family {
                FamilyArg::Curves => {
                    let c = match count {
                        Count::Auto => covering_curve_count(&spec, &grid),
                        Count::Fixed(c) => c,
                    };
                    (
                        sample_joining_curves(&spec, &grid, c)?,
                        annulus_curve_module(ring.n, p, ring.r1, ring.r2)?,
                        "curves",
                    )
                }
                FamilyArg::Spheres => {
                    let c = match count {
                        Count::Auto => covering_sphere_count(&spec, &grid),
                        Count::Fixed(c) => c,
                    };
                    (
                        sample_separating_surfaces(&spec, &grid, c)?,
                        annulus_sphere_module(ring.n, p, ring.r1, ring.r2)?,
                        "spheres",
                    )
                }
            };
            // energy charged on the ring only
            let cost = ring_cell_fractions(&spec, &grid, RING_FRACTION_SAMPLES);
            let sol = discrete_p_module_with(&grid, &fam, p, Some(&cost), &SolverOptions::default())?;
            if let Some(path) = csv {
                write_csv(&path, &grid, &sol.rho)?;
            }
            let obj = Object::from([
                ("value", Param::from(sol.value)),
                ("closedForm", Param::from(exact)),
                ("dualLowerBound", Param::from(sol.dual_lower_bound)),
                ("iterations", Param::from(sol.iterations)),
                ("family", Param::from(kind)),
                ("count", Param::from(fam.len())),
                ("cells", Param::from(grid.cells_per_axis())),
            ]);
            emit(out, &object_json(&obj))?;
            Ok(exit::OK)
        }
        Command::Dilatation { matrix, alpha } => {
            let n = (matrix.len() as f64).sqrt().round() as usize;
            if n * n != matrix.len() {
                return Err(HarnessError::config("--matrix needs n² entries"));
            }
            let m = Matrix::new(n, &matrix)?;
            let sv = m.singular_values()?;
            let obj = Object::from([
                ("inner", Param::from(inner_dilatation(&m, alpha)?)),
                ("outer", Param::from(outer_dilatation(&m, alpha)?)),
                ("linear", Param::from(linear_dilatation(&m)?)),
                ("determinant", Param::from(m.determinant()?)),
                ("singularValues", Param::from(sv.values().to_vec())),
            ]);
            emit(out, &object_json(&obj))?;
            Ok(exit::OK)
        }
        Command::MeanDilatation { mapping, n, mean, alpha, beta, gamma, delta, cells } => {
            let map = mapping_of(&mapping)?.build(n)?;
            let quad = QuadratureSpec { cells_per_axis: cells, ..Default::default() };
            let nan = f64::NAN;
            let res = match mean {
                MeanArg::Inner => mean_inner_dilatation(
                    &map,
                    &DilatationParams::inner(alpha.unwrap_or(nan), beta.unwrap_or(nan)),
                    &quad,
                )?,
                MeanArg::Outer => mean_outer_dilatation(
                    &map,
                    &DilatationParams::outer(gamma.unwrap_or(nan), delta.unwrap_or(nan)),
                    &quad,
                )?,
            };
            let value = match &res {
                MeanDilatation::Finite { value, .. } => Param::Num(Num::Value(*value)),
                MeanDilatation::Divergent { .. } => Param::Num(Num::Divergent),
            };
            let mut obj = Object::from([
                ("value", value),
                ("levels", Param::from(res.levels().to_vec())),
                ("cells", Param::from(cells)),
            ]);
            if let MeanDilatation::Divergent { reason, .. } = &res {
                obj.insert("reason", Param::from(format!("{reason:?}")));
            }
            emit(out, &object_json(&obj))?;
            Ok(exit::OK)
        }
        Command::Criterion { which, case } => {
            let (name, th) = match which {
                CriterionArg::Ring => ("cli_ring_criterion", Theorem::RingCriterion),
                CriterionArg::Lower => ("cli_lower_criterion", Theorem::LowerCriterion),
            };
            let s = case_scenario(name, th, &case)?;
            run_report(out, &pmod_harness::run(&s)?)
        }
        Command::Transfer { case } => {
            let s = case_scenario("cli_transfer", Theorem::Transfer, &case)?;
            run_report(out, &pmod_harness::run(&s)?)
        }
        Command::Verify { file } => {
            let s = Scenario::from_file(&file)?;
            run_report(out, &pmod_harness::run(&s)?)
        }
        Command::Report { paths } => {
            let files = scenario_files(&paths)?;
            if files.is_empty() {
                return Err(HarnessError::config("no scenario files found"));
            }
            let mut reports = Vec::new();
            let mut code = exit::OK;
            for f in files {
                let s = Scenario::from_file(&f)?;
                let r = pmod_harness::run(&s)?;
                code = code.max(report_code(&r));
                reports.push(r);
            }
            emit(out, &serde_json::to_string_pretty(&reports).expect("reports serialize"))?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pmod: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
