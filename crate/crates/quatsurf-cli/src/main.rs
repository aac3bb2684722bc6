use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use quatsurf::catalog::{self, describe, NAMES};
use quatsurf::conformal::{write_obj_charts, ConformalError};
use quatsurf::dirac_p1::{bound_suite, default_lattice};
use quatsurf::representations::Bundle;
use quatsurf::verify::{run_verify, Subject, VerificationReport, VerifyError, SUITES};

/// Exit code when `mesh` is asked for a surface outside Im H.
const EXIT_NOT_IMAGINARY: u8 = 4;

#[derive(Parser)]
#[command(name = "quatsurf", version, about = "Checks and exports for conformal surfaces in the quaternions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Kodaira,
    Weierstrass,
}

#[derive(Subcommand)]
enum Command {
    /// Run check suites on a catalog surface or a bundle file.
    Verify {
        /// Catalog name, or path to a JSON bundle.
        surface: String,
        #[arg(long, default_value_t = 0.02)]
        resolution: f64,
        /// Comma-separated suites; all by default.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Write the surface as an OBJ quad mesh.
    Mesh {
        /// Catalog name, or path to a JSON bundle.
        surface: String,
        #[arg(long, default_value_t = 0.02)]
        resolution: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Drop the real part of surfaces that leave Im H.
        #[arg(long)]
        project: bool,
    },
    /// Tabulate the kernel F_λ and its bounds on the default (λ, r) lattice.
    KernelTable {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List the catalog, or export one entry as a JSON bundle.
    Catalog {
        name: Option<String>,
        #[arg(long, default_value_t = 0.02)]
        resolution: f64,
        #[arg(long, value_enum, default_value_t = Kind::Kodaira)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn threads() -> Result<()> {
    if let Ok(n) = std::env::var("QUATSURF_THREADS") {
        let n: usize = n.trim().parse().with_context(|| format!("QUATSURF_THREADS={n:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn subject(surface: &str, h: f64) -> Result<Subject, VerifyError> {
    let path = Path::new(surface);
    if path.extension().is_some_and(|e| e == "json") || (path.is_file() && !NAMES.contains(&surface)) {
        let text = std::fs::read_to_string(path).map_err(|e| VerifyError::BadBundle(format!("{}: {e}", path.display())))?;
        return Subject::bundle(&text);
    }
    Subject::catalog(surface, h)
}

fn write_checks_csv(report: &VerificationReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "kind", "value", "expected", "tolerance", "pass"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in &report.checks {
        let kind = serde_json::to_value(c.kind)?.as_str().unwrap_or_default().to_string();
        w.write_record([c.id.clone(), kind, c.value.to_string(), opt(c.expected), opt(c.tolerance), c.pass.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn verify(surface: &str, h: f64, suites: Vec<String>, out: &Option<PathBuf>, format: Format) -> Result<ExitCode> {
    let suites = if suites.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { suites };
    let report = match subject(surface, h).and_then(|s| run_verify(&s, &suites)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(e.exit_code() as u8));
        }
    };
    let mut w = sink(out)?;
    match format {
        Format::Json => writeln!(w, "{}", report.to_json())?,
        Format::Csv => write_checks_csv(&report, &mut w)?,
    }
    w.flush()?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {} (value {})", c.id, c.description, c.value);
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn mesh(surface: &str, h: f64, out: &Option<PathBuf>, project: bool) -> Result<ExitCode> {
    let charts = match subject(surface, h) {
        Ok(s) => s.surfaces(),
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(e.exit_code() as u8));
        }
    };
    let Some(charts) = charts else {
        eprintln!("error: no surface map could be recovered from {surface}");
        return Ok(ExitCode::from(3));
    };
    let mut buf = vec![];
    match write_obj_charts(&charts, project, 1e-9, &mut buf) {
        Ok(stats) => {
            let mut w = sink(out)?;
            w.write_all(&buf)?;
            w.flush()?;
            eprintln!("{} vertices, {} faces", stats.vertices, stats.faces);
            Ok(ExitCode::SUCCESS)
        }
        Err(ConformalError::NotImaginary(re)) => {
            eprintln!("error: {surface} leaves Im H (sup |Re F| = {re:.3e}); pass --project to drop the real part");
            Ok(ExitCode::from(EXIT_NOT_IMAGINARY))
        }
        Err(e) => Err(e.into()),
    }
}

fn kernel_table(out: &Option<PathBuf>, format: Format) -> Result<ExitCode> {
    let (ls, rs) = default_lattice();
    let rows = bound_suite(&ls, &rs);
    let mut w = sink(out)?;
    match format {
        Format::Csv => {
            let mut c = csv::Writer::from_writer(&mut w);
            c.write_record(["lambda", "r", "F", "bound_i", "bound_ii", "margin"])?;
            for r in &rows {
                c.write_record([r.lambda, r.r, r.f, r.bound_i, r.bound_ii, r.margin()].map(|x| x.to_string()))?;
            }
            c.flush()?;
        }
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?,
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn catalog_cmd(name: Option<String>, h: f64, kind: Kind, out: &Option<PathBuf>, format: Format) -> Result<ExitCode> {
    let mut w = sink(out)?;
    let Some(name) = name else {
        match format {
            Format::Json => {
                let list: Vec<_> = NAMES.iter().map(|n| serde_json::json!({ "name": n, "description": describe(n) })).collect();
                writeln!(w, "{}", serde_json::to_string_pretty(&list)?)?;
            }
            Format::Csv => {
                let mut c = csv::Writer::from_writer(&mut w);
                c.write_record(["name", "description"])?;
                for n in NAMES {
                    c.write_record([n, describe(n).unwrap_or_default()])?;
                }
                c.flush()?;
            }
        }
        w.flush()?;
        return Ok(ExitCode::SUCCESS);
    };
    let entry = match catalog::make(&name, &[], h) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let bundle = match kind {
        Kind::Kodaira => Bundle::from_kodaira(Some(name), &entry.kodaira),
        Kind::Weierstrass => Bundle::from_weierstrass(Some(name), &entry.weierstrass),
    };
    writeln!(w, "{}", bundle.to_json())?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    threads()?;
    match cli.command {
        Command::Verify { surface, resolution, suite, out, format } => verify(&surface, resolution, suite, &out, format),
        Command::Mesh { surface, resolution, out, project } => mesh(&surface, resolution, &out, project),
        Command::KernelTable { out, format } => kernel_table(&out, format),
        Command::Catalog { name, resolution, kind, out, format } => catalog_cmd(name, resolution, kind, &out, format),
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(|e| matches!(e.kind(), csv::ErrorKind::Io(e) if e.kind() == io::ErrorKind::BrokenPipe))
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
