//! Command-line front end. `run` returns the process exit code so the binary
//! stays a one-liner and tests can drive the parser directly.
//!
//! Exit codes: 0 success, 1 usage, 2 validation, 3 verification failed, 4 IO.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::codec::{self, CodecError, Codeword, ReceivedWord};
use crate::construct::{ConstructError, LrcCode, POINT_ORDER, TARGET_DISTANCE};
use crate::field::{Fe, Field, FieldError, FieldSpec};
use crate::matrix::Matrix;
use crate::simulate::{self, ErasureModel, RepairPolicy, SimulationConfig, SimulationError};
use crate::verify::{self, SearchMode, VerificationReport, VerifyError, RNG_NAME};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "cartlrc",
    version,
    about = "Distance-5 locally repairable codes on F_q* x F_q*"
)]
struct Cli {
    /// Output directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for verification and simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record elapsed milliseconds in reports (makes them non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// Field order (a prime power).
    #[arg(long, conflicts_with_all = ["p", "m", "code"])]
    q: Option<u64>,
    #[arg(long, requires = "m", conflicts_with = "code")]
    p: Option<u32>,
    #[arg(long, requires = "p", conflicts_with = "code")]
    m: Option<u32>,
    /// Locality.
    #[arg(long, conflicts_with = "code")]
    r: Option<usize>,
    /// Load the code from a directory written by `gen`.
    #[arg(long, value_name = "DIR")]
    code: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Distance,
    Lemma,
    Locality,
    Bounds,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Policy {
    LocalOnly,
    Hybrid,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the parameter sheet.
    Params(CodeArgs),
    /// Write manifest.json, generator.csv, parity.csv and basis.txt.
    Gen(CodeArgs),
    /// Encode a message file (or a seeded random message).
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        message: Option<PathBuf>,
        /// Defaults to OUT/codeword.txt.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Repair one erased position from its recovery set.
    Repair {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        position: usize,
    },
    /// Fill erasures, or correct up to two errors with --correct.
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to OUT/decoded.txt.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        correct: bool,
    },
    /// Run verification suites and write report.json / report.txt.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: Mode,
        /// Subsets checked per sampled suite.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Random codewords used by the locality suite.
        #[arg(long, default_value_t = 100)]
        codewords: u64,
    },
    /// Monte Carlo erasure simulation; writes simulation.json / simulation.txt.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        /// Erase exactly T symbols per trial.
        #[arg(long, conflicts_with = "rho", required_unless_present = "rho")]
        t: Option<usize>,
        /// Erase each symbol independently with probability RHO.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value = "hybrid")]
        policy: Policy,
        /// Enumerate every T-subset instead of sampling.
        #[arg(long, requires = "t")]
        exhaustive: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation { code: &'static str, detail: String },
    VerifyFailed(String),
    Io { path: PathBuf, detail: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation { .. } => 2,
            CliError::VerifyFailed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn line(&self) -> String {
        let (code, detail) = match self {
            CliError::Usage(d) => ("Usage", d.clone()),
            CliError::Validation { code, detail } => (*code, detail.clone()),
            CliError::VerifyFailed(d) => ("VerificationFailed", d.clone()),
            CliError::Io { path, detail } => ("Io", format!("{}: {detail}", path.display())),
        };
        format!("ERR {code}: {}", detail.replace('\n', " "))
    }
}

fn invalid(code: &'static str, detail: impl Into<String>) -> CliError {
    CliError::Validation {
        code,
        detail: detail.into(),
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let code = match e {
            FieldError::NotPrime(_) => "NotPrime",
            FieldError::TooLarge { .. } => "FieldTooLarge",
            FieldError::ZeroDegree => "ZeroDegree",
            FieldError::DivisionByZero => "DivisionByZero",
            FieldError::NotADivisor { .. } => "NotADivisor",
            FieldError::OutOfRange { .. } => "OutOfRange",
        };
        invalid(code, e.to_string())
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        let code = match &e {
            ConstructError::DivisibilityViolation { .. } => "DivisibilityViolation",
            ConstructError::DegenerateCode { .. } => "DegenerateCode",
            ConstructError::CollapsedExclusion { .. } => "CollapsedExclusion",
            ConstructError::NotInDomain(..) => "NotInDomain",
            ConstructError::LocalDual { .. } => "LocalDual",
            ConstructError::Shape { .. } => "Shape",
            ConstructError::Field(inner) => return inner.clone().into(),
        };
        invalid(code, e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        invalid(e.code(), e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        let code = match e {
            VerifyError::BudgetExceeded { .. } => "BudgetExceeded",
            VerifyError::NotDistinct => "NotDistinct",
            VerifyError::NotInDomain(..) => "NotInDomain",
            VerifyError::WeightTooLarge { .. } => "WeightTooLarge",
            VerifyError::ConditionViolated { .. } => "ConditionViolated",
            VerifyError::NotDivisible { .. } => "NotDivisible",
        };
        invalid(code, e.to_string())
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        invalid("SimulationConfig", e.to_string())
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Errors print exactly one `ERR` line on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("invalid arguments");
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.line());
            return err.exit_code();
        }
    };
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.line());
            err.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Params(args) => cmd_params(args),
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Encode {
            code,
            message,
            output,
        } => cmd_encode(cli, code, message.as_deref(), output.as_deref()),
        Command::Repair {
            code,
            input,
            position,
        } => cmd_repair(code, input, *position),
        Command::Decode {
            code,
            input,
            output,
            correct,
        } => cmd_decode(cli, code, input, output.as_deref(), *correct),
        Command::Verify {
            code,
            suite,
            mode,
            trials,
            codewords,
        } => cmd_verify(cli, code, *suite, *mode, *trials, *codewords),
        Command::Simulate {
            code,
            t,
            rho,
            trials,
            policy,
            exhaustive,
        } => {
            let model = match (t, rho) {
                (Some(t), _) => ErasureModel::FixedCount { t: *t },
                (None, Some(rho)) => ErasureModel::Bernoulli { rho: *rho },
                (None, None) => {
                    return Err(CliError::Usage("one of --t or --rho is required".into()))
                }
            };
            let policy = match policy {
                Policy::LocalOnly => RepairPolicy::LocalOnly,
                Policy::Hybrid => RepairPolicy::Hybrid,
            };
            let config = SimulationConfig {
                model,
                trials: *trials,
                seed: cli.seed,
                policy,
                exhaustive: *exhaustive,
            };
            cmd_simulate(cli, code, &config)
        }
    }
}

// ---------------------------------------------------------------- loading

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub field: FieldSpec,
    pub code: ManifestCode,
    pub ordering: ManifestOrdering,
    pub files: ManifestFiles,
    pub rng: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCode {
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub d_claimed: usize,
    pub optimal_regime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestOrdering {
    pub primitive_element: usize,
    pub point_order: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub generator: String,
    pub parity: String,
    pub basis: String,
}

pub fn manifest_for(code: &LrcCode) -> Manifest {
    let p = code.params();
    Manifest {
        format_version: FORMAT_VERSION,
        field: code.field().spec().clone(),
        code: ManifestCode {
            r: p.r,
            n: p.n,
            k: p.k,
            d_claimed: TARGET_DISTANCE,
            optimal_regime: p.optimal_regime,
        },
        ordering: ManifestOrdering {
            primitive_element: code.domain().primitive().index(),
            point_order: POINT_ORDER.to_string(),
        },
        files: ManifestFiles {
            generator: "generator.csv".into(),
            parity: "parity.csv".into(),
            basis: "basis.txt".into(),
        },
        rng: RNG_NAME.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

fn parse_symbol(field: &Field, tok: &str, path: &Path) -> Result<Fe, CliError> {
    let v: u64 = tok
        .trim()
        .parse()
        .map_err(|_| invalid("Parse", format!("{}: bad symbol {tok:?}", path.display())))?;
    field
        .element(v)
        .map_err(|e| invalid("OutOfRange", format!("{}: {e}", path.display())))
}

pub fn parse_matrix(field: &Field, text: &str, path: &Path) -> Result<Matrix, CliError> {
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|t| parse_symbol(field, t, path))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(invalid("Parse", format!("{}: ragged rows", path.display())));
    }
    Ok(Matrix::from_rows(rows, cols))
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut s = String::new();
    for row in m.iter_rows() {
        s.push_str(&join(row.iter().map(|x| x.index())));
        s.push('\n');
    }
    s
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn format_word(symbols: &[Option<Fe>]) -> String {
    let toks: Vec<String> = symbols
        .iter()
        .map(|s| s.map_or("?".to_string(), |x| x.index().to_string()))
        .collect();
    toks.join(",") + "\n"
}

pub fn parse_word(field: &Field, text: &str, path: &Path) -> Result<Vec<Option<Fe>>, CliError> {
    let body = text.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|t| match t.trim() {
            "?" => Ok(None),
            tok => parse_symbol(field, tok, path).map(Some),
        })
        .collect()
}

fn load_code(args: &CodeArgs) -> Result<LrcCode, CliError> {
    if let Some(dir) = &args.code {
        return load_code_dir(dir);
    }
    let field = match (args.q, args.p, args.m) {
        (Some(q), _, _) => Field::with_order(q)?,
        (None, Some(p), Some(m)) => Field::new(p, m)?,
        _ => {
            return Err(CliError::Usage(
                "give --q, or --p and --m, or --code DIR".into(),
            ))
        }
    };
    let r = args
        .r
        .ok_or_else(|| CliError::Usage("--r is required".into()))?;
    Ok(LrcCode::build(field, r)?)
}

pub fn load_code_dir(dir: &Path) -> Result<LrcCode, CliError> {
    let mpath = dir.join("manifest.json");
    let manifest: Manifest = serde_json::from_str(&read_text(&mpath)?)
        .map_err(|e| invalid("Manifest", format!("{}: {e}", mpath.display())))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(invalid(
            "Manifest",
            format!("unsupported format_version {}", manifest.format_version),
        ));
    }
    let field = Field::new(manifest.field.p, manifest.field.m)?;
    if field.spec() != &manifest.field {
        return Err(invalid(
            "Manifest",
            "field modulus differs from the canonical choice",
        ));
    }
    if manifest.ordering.point_order != POINT_ORDER
        || manifest.ordering.primitive_element != field.primitive_element().index()
    {
        return Err(invalid(
            "Manifest",
            "point ordering differs from the canonical one",
        ));
    }
    let gpath = dir.join(&manifest.files.generator);
    let hpath = dir.join(&manifest.files.parity);
    let g = parse_matrix(&field, &read_text(&gpath)?, &gpath)?;
    let h = parse_matrix(&field, &read_text(&hpath)?, &hpath)?;
    let code = LrcCode::with_matrices(field, manifest.code.r, g, h)?;
    if (code.n(), code.k()) != (manifest.code.n, manifest.code.k) {
        return Err(invalid("Manifest", "n, k do not match the matrices"));
    }
    Ok(code)
}

// ---------------------------------------------------------------- output

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn polynomial(coeffs: &[u32]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(e, &c)| {
            let var = match e {
                0 => String::new(),
                1 => "x".into(),
                _ => format!("x^{e}"),
            };
            match (c, e) {
                (_, 0) => c.to_string(),
                (1, _) => var,
                _ => format!("{c}{var}"),
            }
        })
        .collect();
    terms.join(" + ")
}

// ---------------------------------------------------------------- commands

fn cmd_params(args: &CodeArgs) -> Result<(), CliError> {
    let code = load_code(args)?;
    let p = code.params();
    let bound = verify::singleton_like_bound(p.n, p.k, p.r);
    let spec = code.field().spec();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n={} k={} r={} d={} bound={} optimal={}",
        p.n,
        p.k,
        p.r,
        p.d_target,
        bound,
        if p.optimal_regime { "yes" } else { "no" }
    );
    let _ = writeln!(
        out,
        "field: GF({}^{}) = GF({}), modulus {}",
        spec.p,
        spec.m,
        spec.q,
        polynomial(&spec.modulus)
    );
    let _ = writeln!(out, "primitive element: {}", code.domain().primitive());
    let _ = writeln!(out, "recovery cells: {} of size {}", p.cells, p.r + 1);
    let eq = match verify::check_optimality_equiv(p, p.d_target) {
        Ok(holds) => format!(
            "{} ({} = {} + {})",
            if holds { "holds" } else { "fails" },
            p.n - p.k,
            p.n / (p.r + 1),
            p.d_target - 2 - (p.d_target - 2) / (p.r + 1)
        ),
        Err(e) => format!("inapplicable: {e}"),
    };
    let _ = writeln!(out, "optimality equivalence: {eq}");
    let l = verify::check_length_regime(p);
    let _ = writeln!(
        out,
        "length hypothesis: {} ({} >= {})",
        if l.hypothesis_holds { "holds" } else { "fails" },
        l.hypothesis_lhs,
        l.hypothesis_rhs
    );
    let _ = writeln!(
        out,
        "coset condition: {} (ceil((q-1)/(r+1)) = {} > 3)",
        if l.cosets_exceed_three {
            "holds"
        } else {
            "fails"
        },
        l.cosets_ceil
    );
    print!("{out}");
    Ok(())
}

fn cmd_gen(cli: &Cli, args: &CodeArgs) -> Result<(), CliError> {
    let code = load_code(args)?;
    let manifest = manifest_for(&code);
    let dir = &cli.out;
    write_atomic(
        &dir.join(&manifest.files.generator),
        format_matrix(&code.generator().0).as_bytes(),
    )?;
    write_atomic(
        &dir.join(&manifest.files.parity),
        format_matrix(&code.parity().0).as_bytes(),
    )?;
    let basis: String = code
        .basis()
        .monomials()
        .iter()
        .map(|m| format!("{} {}\n", m.i, m.j))
        .collect();
    write_atomic(&dir.join(&manifest.files.basis), basis.as_bytes())?;
    write_atomic(&dir.join("manifest.json"), &to_json(&manifest))?;
    println!(
        "wrote {} (n={} k={} r={})",
        dir.display(),
        code.n(),
        code.k(),
        code.r()
    );
    Ok(())
}

fn cmd_encode(
    cli: &Cli,
    args: &CodeArgs,
    message: Option<&Path>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let code = load_code(args)?;
    let field = code.field();
    let msg = match message {
        Some(path) => parse_word(field, &read_text(path)?, path)?
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| invalid("Parse", "message may not contain erasures"))?,
        None => {
            let mut rng = Pcg64::seed_from_u64(cli.seed);
            let msg = codec::random_message(field, code.k(), &mut rng);
            let m: Vec<Option<Fe>> = msg.iter().copied().map(Some).collect();
            write_atomic(&cli.out.join("message.txt"), format_word(&m).as_bytes())?;
            msg
        }
    };
    let cw = codec::encode(field, code.generator(), &msg)?;
    let path = output.map_or_else(|| cli.out.join("codeword.txt"), Path::to_path_buf);
    let text = format_word(&cw.symbols().iter().copied().map(Some).collect::<Vec<_>>());
    write_atomic(&path, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn read_received(code: &LrcCode, path: &Path) -> Result<ReceivedWord, CliError> {
    let symbols = parse_word(code.field(), &read_text(path)?, path)?;
    if symbols.len() != code.n() {
        return Err(CodecError::LengthMismatch {
            expected: code.n(),
            got: symbols.len(),
        }
        .into());
    }
    Ok(ReceivedWord::new(symbols))
}

fn cmd_repair(args: &CodeArgs, input: &Path, position: usize) -> Result<(), CliError> {
    let code = load_code(args)?;
    let received = read_received(&code, input)?;
    let fix = codec::local_repair(&code, &received, position)?;
    println!("position={} value={}", fix.position, fix.value);
    println!("reads={}", join(&fix.reads));
    Ok(())
}

fn cmd_decode(
    cli: &Cli,
    args: &CodeArgs,
    input: &Path,
    output: Option<&Path>,
    correct: bool,
) -> Result<(), CliError> {
    let code = load_code(args)?;
    let received = read_received(&code, input)?;
    let cw: Codeword = if correct {
        let word = received
            .complete()
            .ok_or_else(|| invalid("Parse", "--correct expects a word without erasures"))?;
        codec::error_correct_bd(code.field(), code.parity(), word.symbols())?
    } else {
        let out = codec::hybrid_decode(&code, &received)?;
        println!(
            "local={} global={} reads={}",
            join(out.local.iter().map(|l| l.position)),
            join(&out.global),
            out.symbols_read()
        );
        out.codeword
    };
    let path = output.map_or_else(|| cli.out.join("decoded.txt"), Path::to_path_buf);
    let text = format_word(&cw.symbols().iter().copied().map(Some).collect::<Vec<_>>());
    write_atomic(&path, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn run_suites(
    code: &LrcCode,
    suite: Suite,
    mode: Mode,
    trials: u64,
    codewords: u64,
    seed: u64,
) -> Result<(Vec<VerificationReport>, Vec<String>), CliError> {
    let field = code.field();
    let h = &code.parity().0;
    let search = match mode {
        Mode::Exhaustive => SearchMode::Exhaustive,
        Mode::Sampled => SearchMode::Sampled { trials, seed },
    };
    let want = |s: Suite| {
        matches!(suite, Suite::All) || std::mem::discriminant(&suite) == std::mem::discriminant(&s)
    };
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    if want(Suite::Distance) {
        reports.push(verify::verify_parity_consistency(code));
        reports.push(verify::verify_distance_at_least(
            field,
            h,
            TARGET_DISTANCE,
            search,
        )?);
        if mode == Mode::Exhaustive && code.params().optimal_regime {
            match verify::find_min_weight_codeword(field, h, TARGET_DISTANCE) {
                Ok(found) => reports.push(verify::exact_distance_report(&found, TARGET_DISTANCE)),
                Err(e) => notes.push(format!("exact-distance search skipped: {e}")),
            }
        }
    }
    if want(Suite::Lemma) {
        reports.push(verify::verify_lemma_exhaustive(field, search)?);
    }
    if want(Suite::Locality) {
        reports.push(verify::verify_locality(code, codewords, seed));
    }
    if want(Suite::Bounds) {
        reports.push(verify::bounds_report(code.params()));
        reports.push(verify::check_length_regime(code.params()).report());
    }
    Ok((reports, notes))
}

fn cmd_verify(
    cli: &Cli,
    args: &CodeArgs,
    suite: Suite,
    mode: Mode,
    trials: u64,
    codewords: u64,
) -> Result<(), CliError> {
    let code = load_code(args)?;
    let (mut reports, notes) = run_suites(&code, suite, mode, trials, codewords, cli.seed)?;
    if !cli.timing {
        for r in &mut reports {
            r.millis = None;
        }
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.claim.as_str())
        .collect();
    let p = code.params();
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "code": {"q": p.q, "r": p.r, "n": p.n, "k": p.k},
        "rng": RNG_NAME,
        "result": if failed.is_empty() { "pass" } else { "fail" },
        "notes": notes,
        "reports": reports,
    });
    let mut text = format!("code q={} r={} n={} k={}\n", p.q, p.r, p.n, p.k);
    for r in &reports {
        text.push_str(&r.to_string());
    }
    for n in &notes {
        let _ = writeln!(text, "note: {n}");
    }
    let _ = writeln!(
        text,
        "overall: {}",
        if failed.is_empty() { "PASS" } else { "FAIL" }
    );
    write_atomic(&cli.out.join("report.json"), &to_json(&doc))?;
    write_atomic(&cli.out.join("report.txt"), text.as_bytes())?;
    print!("{text}");
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed.join("; ")))
    }
}

fn cmd_simulate(cli: &Cli, args: &CodeArgs, config: &SimulationConfig) -> Result<(), CliError> {
    let code = load_code(args)?;
    let stats = simulate::simulate(&code, config)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "trials={} seed={} policy={:?} model={:?}",
        stats.trials, config.seed, config.policy, config.model
    );
    let _ = writeln!(
        text,
        "local_success={}/{} ({:.6})",
        stats.local_successes,
        stats.trials,
        stats.local_success_rate()
    );
    let _ = writeln!(
        text,
        "recovered={}/{} ({:.6})",
        stats.recoveries,
        stats.trials,
        stats.recovery_rate()
    );
    let _ = writeln!(
        text,
        "reads_per_repaired_symbol={:.6} ({} / {})",
        stats.mean_reads_per_repaired_symbol(),
        stats.symbols_read,
        stats.repaired_symbols
    );
    let _ = writeln!(text, "cell_histogram={}", join(&stats.cell_histogram));
    if let Some((i, p)) = &stats.first_failure {
        let _ = writeln!(text, "first_failure=trial {i} erasures {}", join(p));
    }
    write_atomic(&cli.out.join("simulation.json"), &to_json(&stats))?;
    write_atomic(&cli.out.join("simulation.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_rendering() {
        assert_eq!(polynomial(&[1, 1, 0, 1]), "x^3 + x + 1");
        assert_eq!(polynomial(&[1, 0, 1]), "x^2 + 1");
        assert_eq!(polynomial(&[2, 0, 1]), "x^2 + 2");
    }

    #[test]
    fn word_round_trip() {
        let f = Field::with_order(7).unwrap();
        let p = Path::new("w");
        let w = parse_word(&f, "1,?,6,0\n", p).unwrap();
        let e = |v| Some(f.element(v).unwrap());
        assert_eq!(w, vec![e(1), None, e(6), e(0)]);
        assert_eq!(format_word(&w), "1,?,6,0\n");
        assert!(parse_word(&f, "1,7", p).is_err());
        assert!(parse_word(&f, "1,x", p).is_err());
    }

    #[test]
    fn error_lines() {
        let e: CliError = ConstructError::DivisibilityViolation { q: 7, r: 3 }.into();
        assert_eq!(e.exit_code(), 2);
        assert!(e.line().starts_with("ERR DivisibilityViolation: "));
        assert_eq!(CliError::VerifyFailed("x".into()).exit_code(), 3);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["cartlrc", "no-such-command"]), 1);
        assert_eq!(run(["cartlrc", "params", "--q", "7"]), 1);
        assert_eq!(run(["cartlrc", "params", "--q", "7", "--r", "3"]), 2);
        assert_eq!(run(["cartlrc", "params", "--q", "7", "--r", "5"]), 0);
    }
}
