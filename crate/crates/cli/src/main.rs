use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ctxq::born::{poset_coherence, BornTable, CoherenceResult};
use ctxq::context::{generate_context, ContextPoset};
use ctxq::fixtures::{mermin_peres_fixture, random_bloch_poset, random_linked_poset, Fixture};
use ctxq::linalg::{CMatrix, Tolerance};
use ctxq::qubit::{qubit_born_closed_form, qubit_context, BlochVector};
use ctxq::sections::{find_global_section, Section};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "ctxq",
    version,
    about = "Contexts, Born tables and global sections for finite quantum systems"
)]
struct Cli {
    /// Numerical tolerance for projector and commutator checks.
    #[arg(long, global = true, env = "CTXQ_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Gap below which eigenvalues are merged.
    #[arg(long, global = true, env = "CTXQ_EIGENGAP", default_value_t = 1e-8)]
    eigengap: f64,
    /// Seed for generated fixtures.
    #[arg(long, global = true, env = "CTXQ_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, env = "CTXQ_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true, env = "CTXQ_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build context posets from observable files.
    Contexts {
        #[command(subcommand)]
        action: ContextsAction,
    },
    /// Born table between two contexts of a poset.
    Born {
        poset: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Also check coherence against every pair of coarser contexts.
        #[arg(long)]
        check_coherence: bool,
    },
    /// Global section search.
    Sections {
        #[command(subcommand)]
        action: SectionsAction,
    },
    /// Qubit Born table, closed form against the generic computation.
    Qubit {
        #[command(subcommand)]
        action: QubitAction,
    },
    /// Write fixture JSON.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand, Debug)]
enum ContextsAction {
    /// Each file is a JSON array of matrices (one family) or a fixture
    /// object with a `families` field.
    Build {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SectionsAction {
    Search { poset: PathBuf },
}

#[derive(Subcommand, Debug)]
enum QubitAction {
    Table {
        /// Bloch vector `x,y,z`, unit length within 1e-6.
        #[arg(long, value_parser = parse_bloch, allow_hyphen_values = true)]
        a: BlochVector,
        #[arg(long, value_parser = parse_bloch, allow_hyphen_values = true)]
        b: BlochVector,
    },
}

#[derive(Subcommand, Debug)]
enum FixturesAction {
    Generate {
        #[arg(value_enum)]
        kind: FixtureKind,
        /// Number of families for the random kinds.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Dimension of linked bases.
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FixtureKind {
    MerminPeres,
    Bloch,
    Linked,
}

fn parse_bloch(s: &str) -> Result<BlochVector, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    let [x, y, z] = parts[..] else {
        return Err(format!(
            "expected three comma-separated components, got {}",
            parts.len()
        ));
    };
    BlochVector::normalized(x, y, z).map_err(|e| e.to_string())
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn domain(context: &str, err: ctxq::Error) -> Self {
        let code = if matches!(err, ctxq::Error::NoConvergence { .. }) {
            3
        } else {
            2
        };
        Failure {
            code,
            message: format!("{context}: {err}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn write(&self, body: &[u8]) -> CliResult<()> {
        match &self.path {
            Some(p) => fs::write(p, body).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
            None => std::io::stdout()
                .write_all(body)
                .map_err(|e| Failure::io(format!("stdout: {e}"))),
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut body = serde_json::to_vec_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
        body.push(b'\n');
        self.write(&body)
    }

    fn csv(&self, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut put = |rec: &[String]| w.write_record(rec).map_err(|e| Failure::io(e.to_string()));
        put(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
        for row in &rows {
            put(row)?;
        }
        let body = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
        self.write(&body)
    }
}

fn read_json(path: &Path) -> CliResult<serde_json::Value> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn read_families(path: &Path) -> CliResult<Vec<Vec<CMatrix>>> {
    let value = read_json(path)?;
    let parsed = if value.get("families").is_some() {
        serde_json::from_value::<Fixture>(value).map(|f| f.families)
    } else {
        serde_json::from_value::<Vec<CMatrix>>(value).map(|f| vec![f])
    };
    parsed.map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn read_poset(path: &Path) -> CliResult<ContextPoset> {
    serde_json::from_value(read_json(path)?)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Names the first matrix in a family that breaks a precondition, or
/// reports the family-level error.
fn validate_family(
    path: &Path,
    index: usize,
    family: &[CMatrix],
    dim: usize,
    tol: &Tolerance,
) -> CliResult<()> {
    let at = |m: usize| format!("{}: family {}, matrix {}", path.display(), index + 1, m + 1);
    for (m, a) in family.iter().enumerate() {
        if a.dim() != dim {
            return Err(Failure::validation(format!(
                "{}: dimension {} differs from {dim}",
                at(m),
                a.dim()
            )));
        }
        let residual = a.hermitian_residual();
        if residual >= tol.eps * (1.0 + a.frobenius_norm()) {
            return Err(Failure::validation(format!(
                "{}: not Hermitian (residual {residual:e})",
                at(m)
            )));
        }
    }
    generate_context(family, tol).map(|_| ()).map_err(|err| {
        let place = match &err {
            ctxq::Error::NotCommuting { left, right, .. } => {
                format!(
                    "{}: family {}, matrices {} and {}",
                    path.display(),
                    index + 1,
                    left + 1,
                    right + 1
                )
            }
            _ => format!("{}: family {}", path.display(), index + 1),
        };
        Failure::domain(&place, err)
    })
}

fn cmd_contexts(files: &[PathBuf], tol: &Tolerance, format: Format, out: &Output) -> CliResult<()> {
    let mut families = Vec::new();
    let mut dim = None;
    for path in files {
        for (k, family) in read_families(path)?.into_iter().enumerate() {
            let Some(first) = family.first() else {
                return Err(Failure::validation(format!(
                    "{}: family {} is empty",
                    path.display(),
                    k + 1
                )));
            };
            let n = *dim.get_or_insert(first.dim());
            validate_family(path, k, &family, n, tol)?;
            families.push(family);
        }
    }
    let poset = ContextPoset::build(&families, tol).map_err(|e| Failure::domain("poset", e))?;
    match format {
        Format::Json => out.json(&poset),
        Format::Csv => out.csv(
            &["index", "id", "ranks", "maximal"],
            poset
                .contexts()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let ranks: Vec<String> =
                        c.system.ranks().iter().map(|r| r.to_string()).collect();
                    vec![
                        i.to_string(),
                        c.id.clone(),
                        ranks.join("-"),
                        poset.maximal().contains(&i).to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

#[derive(Serialize)]
struct BornReport {
    left: String,
    right: String,
    rows: Vec<Vec<f64>>,
    row_marginals: Vec<f64>,
    col_marginals: Vec<f64>,
    total: f64,
    violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coherence: Option<Vec<CoherenceResult>>,
}

fn cmd_born(
    path: &Path,
    left: &str,
    right: &str,
    check_coherence: bool,
    tol: &Tolerance,
    format: Format,
    out: &Output,
) -> CliResult<()> {
    let poset = read_poset(path)?;
    let find = |id: &str| {
        poset
            .index_of(id)
            .map_err(|e| Failure::domain(&path.display().to_string(), e))
    };
    let (li, ri) = (find(left)?, find(right)?);
    let contexts = poset.contexts();
    let table = BornTable::new(&contexts[li], &contexts[ri])
        .map_err(|e| Failure::domain("born table", e))?;
    let coherence = if check_coherence {
        Some(poset_coherence(&poset, li, ri, tol).map_err(|e| Failure::domain("coherence", e))?)
    } else {
        None
    };
    let mut violations = table.violations();
    if let Some(results) = &coherence {
        violations.extend(results.iter().filter(|r| !r.coherent).map(|r| {
            format!(
                "incoherent with coarsening ({}, {})",
                r.coarse_left, r.coarse_right
            )
        }));
    }
    match format {
        Format::Json => out.json(&BornReport {
            left: table.left.id.clone(),
            right: table.right.id.clone(),
            rows: table.rows().to_vec(),
            row_marginals: table.row_marginals(),
            col_marginals: table.col_marginals(),
            total: table.total(),
            violations,
            coherence,
        }),
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = Vec::new();
            for (i, row) in table.rows().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    rows.push(vec![
                        "cell".into(),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        v.to_string(),
                    ]);
                }
            }
            for r in coherence.iter().flatten() {
                rows.push(vec![
                    "coherence".into(),
                    r.coarse_left.clone(),
                    r.coarse_right.clone(),
                    r.coherent.to_string(),
                ]);
            }
            for v in &violations {
                rows.push(vec![
                    "violation".into(),
                    String::new(),
                    String::new(),
                    v.clone(),
                ]);
            }
            out.csv(&["record", "left", "right", "value"], rows)
        }
    }
}

#[derive(Serialize)]
struct SectionsReport {
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    section: Option<Section>,
    nodes_visited: u64,
    contexts: usize,
    maximal_contexts: usize,
}

fn cmd_sections(path: &Path, format: Format, out: &Output) -> CliResult<()> {
    let poset = read_poset(path)?;
    let report = find_global_section(&poset);
    match format {
        Format::Json => out.json(&SectionsReport {
            outcome: if report.section.is_some() {
                "found"
            } else {
                "none"
            },
            section: report.section,
            nodes_visited: report.nodes_visited,
            contexts: poset.contexts().len(),
            maximal_contexts: poset.maximal().len(),
        }),
        Format::Csv => out.csv(
            &["context", "point"],
            report
                .section
                .iter()
                .flat_map(|s| s.assignment.iter())
                .map(|(id, p)| vec![id.clone(), (p + 1).to_string()])
                .collect(),
        ),
    }
}

#[derive(Serialize)]
struct QubitReport {
    a: [f64; 3],
    b: [f64; 3],
    left: String,
    right: String,
    closed_form: [[f64; 2]; 2],
    generic: Vec<Vec<f64>>,
    max_deviation: f64,
}

fn cmd_qubit(a: &BlochVector, b: &BlochVector, format: Format, out: &Output) -> CliResult<()> {
    let (left, right) = (qubit_context(a), qubit_context(b));
    let generic = BornTable::new(&left, &right).map_err(|e| Failure::domain("born table", e))?;
    let closed = qubit_born_closed_form(a, b);
    let mut max_deviation = 0.0f64;
    for (i, row) in closed.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            max_deviation = max_deviation.max((v - generic.get(i, j)).abs());
        }
    }
    match format {
        Format::Json => out.json(&QubitReport {
            a: a.components(),
            b: b.components(),
            left: left.id,
            right: right.id,
            closed_form: closed,
            generic: generic.rows().to_vec(),
            max_deviation,
        }),
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, row) in closed.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    rows.push(vec![
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        v.to_string(),
                        generic.get(i, j).to_string(),
                    ]);
                }
            }
            out.csv(&["left", "right", "closed_form", "generic"], rows)
        }
    }
}

fn cmd_fixtures(
    kind: FixtureKind,
    count: usize,
    dim: usize,
    seed: u64,
    format: Format,
    out: &Output,
) -> CliResult<()> {
    if format == Format::Csv {
        return Err(Failure::validation("fixtures are written as JSON only"));
    }
    let fixture = match kind {
        FixtureKind::MerminPeres => mermin_peres_fixture(),
        FixtureKind::Bloch | FixtureKind::Linked if count == 0 => {
            return Err(Failure::validation("--count must be at least 1"));
        }
        FixtureKind::Bloch => random_bloch_poset(count, seed),
        FixtureKind::Linked if dim < 2 => {
            return Err(Failure::validation("--dim must be at least 2"))
        }
        FixtureKind::Linked => random_linked_poset(dim, count, seed),
    };
    out.json(&fixture)
}

fn run(cli: Cli) -> CliResult<()> {
    let tol = Tolerance::new(cli.tol, cli.eigengap)
        .map_err(|e| Failure::validation(format!("tolerance: {e}")))?;
    let out = Output { path: cli.out };
    match cli.command {
        Command::Contexts {
            action: ContextsAction::Build { files },
        } => cmd_contexts(&files, &tol, cli.format, &out),
        Command::Born {
            poset,
            left,
            right,
            check_coherence,
        } => cmd_born(
            &poset,
            &left,
            &right,
            check_coherence,
            &tol,
            cli.format,
            &out,
        ),
        Command::Sections {
            action: SectionsAction::Search { poset },
        } => cmd_sections(&poset, cli.format, &out),
        Command::Qubit {
            action: QubitAction::Table { a, b },
        } => cmd_qubit(&a, &b, cli.format, &out),
        Command::Fixtures {
            action: FixturesAction::Generate { kind, count, dim },
        } => cmd_fixtures(kind, count, dim, cli.seed, cli.format, &out),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
