use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use arrsheaf::cech::{default_window, lattice_cohomology_table, CechOptions, CoverKind, Engine, FunctorKind};
use arrsheaf::diagnostics::{diagnostics_report, factorization_check, freeness_verdict, kunneth_verify, FactorizationCheck, FreenessVerdict, ReportOptions};
use arrsheaf::lattice::LatticeSummary;
use arrsheaf::oracle::{local_cohomology_dims, pd_from_local_cohomology, punctured_cohomology, LocalCohomologyCell, OracleCover, OracleModule, OracleOptions, PdEstimate, PuncturedCohomologyResult};
use arrsheaf::{catalog_from_spec, parse_arrangement, Arrangement, Derivations, Error, IntersectionLattice, Result};

mod table;

#[derive(Parser)]
#[command(name = "arrsheaf", version, about = "Lattice sheaf cohomology of hyperplane arrangements")]
struct Cli {
    /// Worker threads; defaults to ARRSHEAF_THREADS, then the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Intersection lattice, Möbius function and characteristic polynomial.
    Lattice(InputArgs),
    /// Dimensions (and at a single degree, bases) of D(A_X)_d.
    Derivations(DerivationArgs),
    /// Hⁿ(L₀, F)_d for F = D or O.
    Cohomology(CohomologyArgs),
    /// Hⁿ of the punctured spectrum by truncated localization.
    Oracle(OracleArgs),
    /// Saito certificate combined with lattice vanishing.
    Freeness(FreenessArgs),
    /// Full diagnostics report.
    Report(ReportArgs),
    /// Emit a catalog arrangement in the text format.
    Catalog(CatalogArgs),
    /// Compare oracle and lattice cohomology cell by cell.
    VerifyKunneth(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Arrangement file, or `-` for standard input.
    input: Option<String>,
    /// Use a catalog entry such as `braid 3` instead of a file.
    #[arg(long, conflicts_with = "input")]
    catalog: Option<String>,
    /// Override the field: `Q` or a prime `p`.
    #[arg(long)]
    field: Option<String>,
}

#[derive(Args)]
struct DerivationArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Hyperplane indices whose intersection is the flat X; the whole arrangement by default.
    #[arg(long, value_delimiter = ',')]
    flat: Option<Vec<usize>>,
    /// A single degree; prints a basis as well.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "window")]
    degree: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctorArg {
    #[value(name = "D")]
    D,
    #[value(name = "O")]
    O,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeCoverArg {
    Minimal,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleCoverArg {
    Coords,
    Arrangement,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Quotient,
    Direct,
}

#[derive(Args)]
struct CohomologyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = FunctorArg::D)]
    functor: FunctorArg,
    /// Degree window `a:b`; defaults to `-|A|-ℓ:|A|`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long, value_enum, default_value_t = LatticeCoverArg::Minimal)]
    cover: LatticeCoverArg,
    #[command(flatten)]
    compute: ComputeArgs,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Quotient)]
    engine: EngineArg,
    /// Largest truncation level.
    #[arg(long, default_value_t = arrsheaf::cech::DEFAULT_K_MAX)]
    kmax: usize,
    /// Largest number of Čech tuples the direct engine may enumerate.
    #[arg(long, default_value_t = arrsheaf::cech::DEFAULT_TUPLE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = FunctorArg::D)]
    module: FunctorArg,
    #[arg(long, value_enum, default_value_t = OracleCoverArg::Coords)]
    cover: OracleCoverArg,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[command(flatten)]
    compute: ComputeArgs,
}

#[derive(Args)]
struct FreenessArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Cover of the punctured spectrum.
    #[arg(long, value_enum, default_value_t = OracleCoverArg::Coords)]
    cover: OracleCoverArg,
    /// Cover of L₀.
    #[arg(long, value_enum, default_value_t = LatticeCoverArg::Minimal)]
    lattice_cover: LatticeCoverArg,
    #[command(flatten)]
    compute: ComputeArgs,
}

#[derive(Args)]
struct CatalogArgs {
    /// boolean, braid, generic or near-pencil.
    name: String,
    params: Vec<usize>,
}

/// A run that produced output but also detected a contradiction.
struct Inconsistent(String);

enum Failure {
    Compute(Error),
    Inconsistent(Inconsistent),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Inconsistent(Inconsistent(msg))) => {
            eprintln!("consistency failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("ARRSHEAF_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| Error::InvalidParameters(format!("ARRSHEAF_THREADS=`{v}` is not a positive integer")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidParameters("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load(args: &InputArgs) -> Result<Arrangement> {
    let a = match (&args.input, &args.catalog) {
        (_, Some(spec)) => catalog_from_spec(spec)?,
        (Some(path), None) if path == "-" => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            parse_arrangement(&text)?
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{path}: {e}"))))?;
            parse_arrangement(&text)?
        }
        (None, None) => return Err(Error::Parse("no input: give a file, `-`, or --catalog".into())),
    };
    match &args.field {
        None => Ok(a),
        Some(f) => with_field(&a, f),
    }
}

/// Re-reads the same normals over another field.
fn with_field(a: &Arrangement, field: &str) -> Result<Arrangement> {
    let line = match field.trim() {
        "Q" | "q" => "field Q".to_string(),
        p => {
            let p = p.trim_start_matches("Fp").trim_start_matches(['p', ':', ' ']);
            format!("field Fp {p}")
        }
    };
    let text: String = a
        .serialize()
        .lines()
        .map(|l| if l.starts_with("field ") { line.clone() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    parse_arrangement(&text)
}

fn parse_window(text: Option<&str>, a: &Arrangement) -> Result<(i64, i64)> {
    let Some(text) = text else { return Ok(default_window(a)) };
    let bad = || Error::InvalidParameters(format!("window `{text}` is not of the form a:b"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::InvalidParameters(format!("window `{text}` is empty")));
    }
    Ok((lo, hi))
}

fn check_kmax(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameters(format!("--kmax must be at least 2, got {k}")));
    }
    Ok(())
}

fn emit<T: Serialize + table::Table>(value: &T, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(value).map_err(|e| Error::Io(io::Error::other(e)))? + "\n",
        Format::Table => value.table(),
    };
    let mut out = io::stdout().lock();
    Ok(out.write_all(text.as_bytes()).and_then(|_| out.flush())?)
}

fn cech_options(cover: LatticeCoverArg, compute: &ComputeArgs) -> CechOptions {
    CechOptions {
        cover: match cover {
            LatticeCoverArg::Minimal => CoverKind::Minimal,
            LatticeCoverArg::Full => CoverKind::Full,
        },
        engine: engine(compute.engine),
        tuple_cap: compute.cap,
        k_max: compute.kmax,
    }
}

fn oracle_options(cover: OracleCoverArg, compute: &ComputeArgs) -> OracleOptions {
    OracleOptions {
        cover: match cover {
            OracleCoverArg::Coords => OracleCover::Coords,
            OracleCoverArg::Arrangement => OracleCover::Arrangement,
        },
        engine: engine(compute.engine),
        k_max: compute.kmax,
        tuple_cap: compute.cap,
    }
}

fn engine(e: EngineArg) -> Engine {
    match e {
        EngineArg::Quotient => Engine::Quotient,
        EngineArg::Direct => Engine::Direct,
    }
}

#[derive(Serialize)]
pub struct LatticeOutput {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub hyperplanes: usize,
    #[serde(flatten)]
    pub summary: LatticeSummary,
}

#[derive(Serialize)]
pub struct DegreeDim {
    pub d: i64,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
pub struct DerivationsOutput {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub flat: usize,
    pub members: Vec<usize>,
    pub window: [i64; 2],
    pub degrees: Vec<DegreeDim>,
}

#[derive(Serialize)]
pub struct OracleOutput {
    #[serde(flatten)]
    pub punctured: PuncturedCohomologyResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_cohomology: Option<Vec<LocalCohomologyCell>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projective_dimension: Option<PdEstimate>,
}

#[derive(Serialize)]
pub struct FreenessOutput {
    pub arrangement: String,
    pub field: String,
    pub ell: usize,
    pub hyperplanes: usize,
    pub verdict: FreenessVerdict,
    pub factorization: FactorizationCheck,
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Catalog(args) => {
            let a = arrsheaf::catalog(&args.name, &args.params)?;
            let mut out = io::stdout().lock();
            out.write_all(a.serialize().as_bytes()).map_err(Error::from)?;
        }
        Command::Lattice(args) => {
            let a = load(args)?;
            let l = IntersectionLattice::build(&a);
            let out = LatticeOutput { arrangement: a.label(), field: a.field().label(), ell: a.ell(), hyperplanes: a.len(), summary: l.summary() };
            emit(&out, format)?;
        }
        Command::Derivations(args) => {
            let a = load(&args.input)?;
            let l = IntersectionLattice::build(&a);
            let ders = Derivations::new(&a);
            let flat = match &args.flat {
                None => l.top(),
                Some(hs) => {
                    let mut x = l.bottom();
                    for &h in hs {
                        let atom = l.find(&[h]).ok_or_else(|| Error::NotInLattice(h))?;
                        x = l.join(x, atom);
                    }
                    x
                }
            };
            let window = match args.degree {
                Some(d) => (d, d),
                None => match &args.window {
                    Some(w) => parse_window(Some(w), &a)?,
                    None => (0, a.len() as i64),
                },
            };
            let degrees = (window.0..=window.1)
                .map(|d| {
                    let space = ders.derivation_space(&l, flat, d)?;
                    let basis = args.degree.map(|_| {
                        space
                            .space
                            .basis()
                            .iter()
                            .map(|v| ders.coefficients(v, d.max(0) as usize).iter().map(ToString::to_string).collect())
                            .collect()
                    });
                    Ok(DegreeDim { d, dim: space.dim(), basis })
                })
                .collect::<Result<Vec<_>>>()?;
            let out = DerivationsOutput {
                arrangement: a.label(),
                field: a.field().label(),
                ell: a.ell(),
                flat,
                members: l.members(flat).to_vec(),
                window: [window.0, window.1],
                degrees,
            };
            emit(&out, format)?;
        }
        Command::Cohomology(args) => {
            check_kmax(args.compute.kmax)?;
            let a = load(&args.input)?;
            let window = parse_window(args.window.as_deref(), &a)?;
            let l = IntersectionLattice::build(&a);
            let ders = Derivations::new(&a);
            let functor = match args.functor {
                FunctorArg::D => FunctorKind::Derivations,
                FunctorArg::O => FunctorKind::Structure,
            };
            let t = lattice_cohomology_table(&a, &l, &ders, functor, window, &cech_options(args.cover, &args.compute))?;
            emit(&t, format)?;
            if !t.beyond_top.is_empty() {
                return Err(Failure::Inconsistent(Inconsistent(format!("{} nonzero cells above degree ℓ−1", t.beyond_top.len()))));
            }
        }
        Command::Oracle(args) => {
            check_kmax(args.compute.kmax)?;
            let a = load(&args.input)?;
            let window = parse_window(args.window.as_deref(), &a)?;
            let l = IntersectionLattice::build(&a);
            let ders = Derivations::new(&a);
            let module = match args.module {
                FunctorArg::D => OracleModule::Derivations,
                FunctorArg::O => OracleModule::Structure,
            };
            let r = punctured_cohomology(&ders, &l, module, window, &oracle_options(args.cover, &args.compute))?;
            let (local, pd) = match module {
                OracleModule::Derivations => {
                    let local = local_cohomology_dims(&r);
                    let pd = pd_from_local_cohomology(r.ell, r.window, &local);
                    (Some(local), Some(pd))
                }
                OracleModule::Structure => (None, None),
            };
            emit(&OracleOutput { punctured: r, local_cohomology: local, projective_dimension: pd }, format)?;
        }
        Command::Freeness(args) => {
            let a = load(&args.input)?;
            let window = parse_window(args.window.as_deref(), &a)?;
            let l = IntersectionLattice::build(&a);
            let ders = Derivations::new(&a);
            let t = lattice_cohomology_table(&a, &l, &ders, FunctorKind::Derivations, window, &CechOptions::default())?;
            let verdict = freeness_verdict(&ders, &t)?;
            let factorization = factorization_check(&l, &verdict.certificate);
            let mismatch = factorization.status == arrsheaf::diagnostics::FactorizationStatus::Mismatch;
            emit(&FreenessOutput { arrangement: a.label(), field: a.field().label(), ell: a.ell(), hyperplanes: a.len(), verdict, factorization }, format)?;
            if mismatch {
                return Err(Failure::Inconsistent(Inconsistent("characteristic polynomial does not factor by the exponents".into())));
            }
        }
        Command::Report(args) => {
            check_kmax(args.compute.kmax)?;
            let a = load(&args.input)?;
            let options = ReportOptions {
                window: parse_window(args.window.as_deref(), &a)?,
                cech: cech_options(args.lattice_cover, &args.compute),
                oracle: oracle_options(args.cover, &args.compute),
            };
            let r = diagnostics_report(&a, &options)?;
            emit(&r, format)?;
            if !r.is_consistent() {
                return Err(Failure::Inconsistent(Inconsistent(r.consistency.join("; "))));
            }
        }
        Command::VerifyKunneth(args) => {
            check_kmax(args.compute.kmax)?;
            let a = load(&args.input)?;
            let window = parse_window(args.window.as_deref(), &a)?;
            let l = IntersectionLattice::build(&a);
            let ders = Derivations::new(&a);
            let cech = cech_options(args.lattice_cover, &args.compute);
            let oracle = oracle_options(args.cover, &args.compute);
            let r = kunneth_verify(&a, &l, &ders, window, &cech, &oracle)?;
            emit(&r, format)?;
            if !r.all_match() {
                return Err(Failure::Inconsistent(Inconsistent(format!("mismatched cells {:?}", r.mismatches))));
            }
        }
    }
    Ok(())
}
