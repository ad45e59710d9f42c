use std::fmt::Debug;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use kakeya_core::bounds::{self, CheckStatus};
use kakeya_core::constructions::{self, Family};
use kakeya_core::kakeya::{analyze, cover, Analysis, DerivedViews};
use kakeya_core::plane::{desarguesian_affine, load_plane, AffinePlane};
use kakeya_core::search::{self, Mode, SearchConfig, DEFAULT_BUDGET};
use kakeya_core::{Field, LineSelection};

#[derive(Parser)]
#[command(
    name = "kakeya",
    version,
    about = "Kakeya sets in finite affine planes"
)]
struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load an affine plane; dump it or report its axiom checks.
    Plane(PlaneArgs),
    /// Knot spectrum, identities and classification of one selection.
    Analyze(AnalyzeArgs),
    /// Exact thresholds and admissible intervals for order q.
    Bounds(BoundsArgs),
    /// Build a named Kakeya selection.
    Construct(ConstructArgs),
    /// Enumerate or sample selections and tabulate sizes.
    Search(SearchArgs),
    /// Run the full check chain for one order.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["q", "plane"])))]
struct PlaneSource {
    /// Order of the Desarguesian plane AG(2,q).
    #[arg(long)]
    q: Option<u32>,
    /// Plane file to load instead.
    #[arg(long)]
    plane: Option<PathBuf>,
}

#[derive(Args)]
struct PlaneArgs {
    #[command(flatten)]
    source: PlaneSource,
    /// Print the validation report instead of the plane file.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: PlaneSource,
    /// Selection file: q+1 line indices, one per class.
    #[arg(long)]
    selection: PathBuf,
    /// Also report the derived views at this point.
    #[arg(long)]
    point: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    q: u64,
    /// JSON profile (the default).
    #[arg(long, conflicts_with_all = ["table", "lemmas"])]
    json: bool,
    /// CSV of f, g, h and interval endpoints for k = 0..=q.
    #[arg(long, conflicts_with = "lemmas")]
    table: bool,
    /// Report the checks on f and g instead of the profile.
    #[arg(long)]
    lemmas: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    q: u32,
    /// Which extended line through the tangent point to keep (Baer only).
    #[arg(long, default_value_t = 0)]
    m_choice: u32,
    /// Write the selection file here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the plane the selection indexes into.
    #[arg(long)]
    plane_out: Option<PathBuf>,
    /// Print the analysis record as JSON.
    #[arg(long)]
    emit_json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Exhaustive,
    Sample,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    source: PlaneSource,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: SearchMode,
    /// Number of samples.
    #[arg(long, required_if_eq("mode", "sample"))]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    jobs: u64,
    /// Pin the horizontal and vertical lines through the origin.
    #[arg(long)]
    reduce: bool,
    /// Allow exhaustive search at q >= 9.
    #[arg(long)]
    big: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    jobs: u64,
    /// Allow the reduced exhaustive search at q >= 9.
    #[arg(long)]
    big: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure inside the library, reported with its error kind.
struct DomainError {
    kind: String,
    message: String,
}

impl<E: std::error::Error + Debug> From<E> for DomainError {
    fn from(e: E) -> Self {
        let debug = format!("{e:?}");
        let kind = debug
            .split(|c: char| !c.is_alphanumeric() && c != '_')
            .next()
            .unwrap_or("Error")
            .to_string();
        DomainError {
            kind,
            message: e.to_string(),
        }
    }
}

fn domain(kind: &str, message: impl Into<String>) -> DomainError {
    DomainError {
        kind: kind.to_string(),
        message: message.into(),
    }
}

type Result<T> = std::result::Result<T, DomainError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.pretty;
    let outcome = match cli.command {
        Command::Plane(a) => cmd_plane(a, pretty),
        Command::Analyze(a) => cmd_analyze(a, pretty),
        Command::Bounds(a) => cmd_bounds(a, pretty),
        Command::Construct(a) => cmd_construct(a, pretty),
        Command::Search(a) => cmd_search(a, pretty),
        Command::Verify(a) => cmd_verify(a, pretty),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}: {}", e.kind, e.message);
            ExitCode::from(1)
        }
    }
}

fn budget() -> Result<u64> {
    match std::env::var("KAKEYA_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| {
            domain(
                "InvalidBudget",
                format!("KAKEYA_BUDGET={v} is not an unsigned integer"),
            )
        }),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn render<T: Serialize>(value: &T, pretty: bool) -> String {
    // Going through Value sorts object keys.
    let v = serde_json::to_value(value).expect("serializable output");
    let mut s = if pretty {
        serde_json::to_string_pretty(&v)
    } else {
        serde_json::to_string(&v)
    }
    .expect("json");
    s.push('\n');
    s
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn open_plane(source: &PlaneSource) -> Result<AffinePlane> {
    match (&source.plane, source.q) {
        (Some(path), _) => {
            let file = fs::File::open(path)
                .map_err(|e| domain("Io", format!("{}: {e}", path.display())))?;
            Ok(load_plane(BufReader::new(file))?)
        }
        (None, Some(q)) => Ok(desarguesian_affine(&Field::of_order(q)?)),
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn cmd_plane(args: PlaneArgs, pretty: bool) -> Result<bool> {
    let plane = open_plane(&args.source)?;
    if args.json {
        let report = plane.verify();
        let ok = report.all_passed();
        let out = json!({
            "q": plane.order(),
            "points": plane.num_points(),
            "lines": plane.num_lines(),
            "classes": plane.num_classes(),
            "translation_coordinates": plane.has_translation_coordinates(),
            "has_fano_subplane": plane.certificate().has_order_two_subplane(),
            "axioms": report,
            "valid": ok,
        });
        emit(&render(&out, pretty), args.out.as_deref())?;
        Ok(ok)
    } else {
        emit(&plane.dump_string(), args.out.as_deref())?;
        Ok(true)
    }
}

#[derive(Serialize)]
struct AnalyzeOutput {
    #[serde(flatten)]
    analysis: Analysis,
    verdict: bounds::Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<PointViews>,
}

#[derive(Serialize)]
struct PointViews {
    point: u32,
    incidence: u32,
    missing_p: Vec<u32>,
    unchosen_through_p: Vec<u32>,
}

fn analysis_output(
    plane: &AffinePlane,
    sel: &LineSelection,
    point: Option<u32>,
) -> Result<AnalyzeOutput> {
    let analysis = analyze(plane, sel)?;
    let q = plane.order() as u64;
    let verdict = bounds::classify(q, analysis.size, Some(analysis.max_knot.k as u64));
    let point = match point {
        None => None,
        Some(p) => {
            if p as usize >= plane.num_points() {
                return Err(domain(
                    "InvalidPoint",
                    format!("point {p} outside 0..{}", plane.num_points()),
                ));
            }
            let ks = cover(plane, sel)?;
            let DerivedViews {
                missing_p,
                unchosen_through_p,
            } = ks.derived_views(plane, p, false)?;
            Some(PointViews {
                point: p,
                incidence: ks.incidence(p),
                missing_p,
                unchosen_through_p,
            })
        }
    };
    Ok(AnalyzeOutput {
        analysis,
        verdict,
        point,
    })
}

fn cmd_analyze(args: AnalyzeArgs, pretty: bool) -> Result<bool> {
    let plane = open_plane(&args.source)?;
    let text = fs::read_to_string(&args.selection)
        .map_err(|e| domain("Io", format!("{}: {e}", args.selection.display())))?;
    let sel = LineSelection::parse(&plane, &text)?;
    let out = analysis_output(&plane, &sel, args.point)?;
    emit(&render(&out, pretty), args.out.as_deref())?;
    Ok(true)
}

fn cmd_bounds(args: BoundsArgs, pretty: bool) -> Result<bool> {
    let q = args.q;
    if q < 2 {
        return Err(domain("OrderTooSmall", "q must be at least 2"));
    }
    if args.table {
        let mut csv = String::from("k,f,g,h,lo,hi\n");
        for r in bounds::bounds_table(q) {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.k, r.f, r.g, r.h, r.lo, r.hi
            ));
        }
        emit(&csv, args.out.as_deref())?;
        return Ok(true);
    }
    if args.lemmas {
        let report = bounds::lemma_checks(q);
        emit(&render(&report, pretty), args.out.as_deref())?;
        return Ok(report.passed());
    }
    emit(
        &render(&bounds::theorem_threshold(q), pretty),
        args.out.as_deref(),
    )?;
    Ok(true)
}

fn cmd_construct(args: ConstructArgs, pretty: bool) -> Result<bool> {
    let family: Family = args.family.parse()?;
    let c = constructions::build(family, args.q, args.m_choice)?;
    if let Some(path) = &args.plane_out {
        fs::write(path, c.plane.dump_string())?;
    }
    let text = c.selection.to_text();
    if let Some(path) = &args.out {
        fs::write(path, &text)?;
    }
    if args.emit_json {
        let out = json!({
            "family": family,
            "q": args.q,
            "expected_size": family.expected_size(args.q),
            "analysis": analysis_output(&c.plane, &c.selection, None)?,
        });
        io::stdout().write_all(render(&out, pretty).as_bytes())?;
    } else if args.out.is_none() {
        io::stdout().write_all(text.as_bytes())?;
    }
    Ok(true)
}

fn cmd_search(args: SearchArgs, pretty: bool) -> Result<bool> {
    let plane = open_plane(&args.source)?;
    let mode = match args.mode {
        SearchMode::Exhaustive => Mode::Exhaustive,
        SearchMode::Sample => Mode::Sampled {
            n: args.n.expect("required by clap"),
            seed: args.seed,
        },
    };
    let config = SearchConfig {
        mode,
        reduce: args.reduce,
        workers: args.jobs as usize,
        budget: budget()?,
        allow_big: args.big,
    };
    let report = search::enumerate(&plane, &config)?;
    emit(&render(&report, pretty), args.out.as_deref())?;
    Ok(true)
}

#[derive(Serialize)]
struct FamilyCheck {
    family: Family,
    size: u64,
    expected_size: u64,
    max_knot: u32,
    identities: bool,
    inequalities: bool,
    passed: bool,
}

fn cmd_verify(args: VerifyArgs, pretty: bool) -> Result<bool> {
    let q = args.q;
    let field = Field::of_order(q)?;
    let plane = desarguesian_affine(&field);
    let axioms = plane.verify();

    let lemmas = bounds::lemma_checks(q as u64);
    let profile = bounds::theorem_threshold(q as u64);

    let mut families = Vec::new();
    for family in Family::ALL.into_iter().filter(|f| f.applies_to(q)) {
        let c = constructions::build(family, q, 0)?;
        let a = analyze(&c.plane, &c.selection)?;
        let expected_size = family.expected_size(q);
        families.push(FamilyCheck {
            family,
            size: a.size,
            expected_size,
            max_knot: a.max_knot.j,
            identities: a.identities.all(),
            inequalities: a.inequalities.all(),
            passed: a.size == expected_size && a.identities.all() && a.inequalities.all(),
        });
    }

    let config = SearchConfig {
        mode: Mode::Exhaustive,
        reduce: true,
        workers: args.jobs as usize,
        budget: budget()?,
        allow_big: args.big,
    };
    let (search_value, search_ok) = match search::enumerate(&plane, &config) {
        Ok(report) => {
            let summary = search::verify_theorem(&report, &profile);
            let ok = summary.conforms();
            let value = json!({
                "status": "done",
                "attained": report.attained,
                "gaps": report.gaps,
                "summary": summary,
            });
            (value, ok)
        }
        Err(
            e @ (search::SearchError::BudgetExceeded { .. }
            | search::SearchError::BigSearchNotAllowed(_)),
        ) => {
            let e = DomainError::from(e);
            (
                json!({"status": "skipped", "reason": e.kind, "detail": e.message}),
                true,
            )
        }
        Err(e) => return Err(e.into()),
    };

    let lemmas_ok = lemmas.items.iter().all(|i| i.status != CheckStatus::Fail);
    let passed = axioms.all_passed() && lemmas_ok && families.iter().all(|f| f.passed) && search_ok;
    let out = json!({
        "q": q,
        "axioms": axioms.all_passed(),
        "lemmas": lemmas,
        "bounds": profile,
        "constructions": families,
        "search": search_value,
        "passed": passed,
    });
    emit(&render(&out, pretty), args.out.as_deref())?;
    Ok(passed)
}
