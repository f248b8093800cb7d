//! The `novikov` command line: `classify`, `scan`, `report areas|fracdim`
//! and `render`.
//!
//! Exit codes: 0 on success (for `classify`, a zone or null label), 2 when
//! `classify` ends unresolved, 1 on bad arguments, unreadable input or I/O
//! failure. Standard output only carries the machine-readable result;
//! progress and errors go to standard error.
//!
//! Every flag can also be given in a `--config` file as `key = value`,
//! using the long flag name as key; flags win over the file. `--workers`
//! additionally defaults to `NOVIKOV_WORKERS`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{set_tolerance, ConfigFile};
use crate::dynamics::{classify_direction, ClassifyOptions, RationalDirection};
use crate::geometry::DispersionRelation;
use crate::homology::ZoneLabel;
use crate::scan::fractal::{coordinate_spacing, sausage_dimension_in};
use crate::scan::{
    box_count_dimension, default_scales, extract_ergodic_set, read_scan, render_ppm, render_svg, scan_to_file,
    zone_areas_with, Domain, Normalization, Progress, RenderOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNRESOLVED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "novikov", version, about = "Stability zones of open orbits on Fermi surfaces")]
struct Cli {
    /// key = value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    /// built-in surface name or path to a term file
    #[arg(long)]
    surface: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// override one section option, e.g. `--tol seed_grid=30`
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify one field direction and print its record as JSON.
    Classify {
        /// direction as m,n,N
        #[arg(long)]
        dir: Option<String>,
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Classify the whole grid 0 <= m <= n <= N into a JSON Lines file.
    Scan {
        #[arg(long = "N")]
        big_n: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "NOVIKOV_WORKERS")]
        workers: Option<usize>,
        /// continue from `<out>.partial` instead of starting over
        #[arg(long)]
        resume: bool,
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Summaries of a scan file.
    Report {
        #[command(subcommand)]
        what: Report,
    },
    /// Draw the zone map of a scan file.
    Render {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        ppm: Option<PathBuf>,
        /// triangle size in pixels
        #[arg(long)]
        size: Option<u32>,
        #[arg(long)]
        palette_seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum Report {
    /// Zone areas as CSV `label,area,error`, largest first.
    Areas {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum)]
        normalization: Option<NormArg>,
    },
    /// Dimension of the unresolved set.
    Fracdim {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormArg {
    Sphere,
    Grid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Box,
    Sausage,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Flag, else config file entry, else nothing.
fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, Failure> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => Ok(file.parsed(key)?),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure(format!("missing required --{flag}")))
}

fn value_enum<T: ValueEnum>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        None => Ok(None),
        Some(v) => T::from_str(v, true)
            .map(Some)
            .map_err(|_| Failure(format!("invalid value {v:?} for {key}"))),
    }
}

struct Problem {
    surface: DispersionRelation,
    energy: f64,
    opts: ClassifyOptions,
}

fn problem(args: &SurfaceArgs, file: &ConfigFile) -> Result<Problem, Failure> {
    let name = pick(args.surface.clone(), file, "surface")?.unwrap_or_else(|| "simple-cubic".to_string());
    let surface = DispersionRelation::from_name_or_path(&name)?;
    let energy = pick(args.energy, file, "energy")?.unwrap_or(0.0);
    if !energy.is_finite() {
        return Err(Failure(format!("energy {energy} is not finite")));
    }
    let mut opts = ClassifyOptions::default();
    for (k, v) in file.tolerance_overrides() {
        set_tolerance(&mut opts.section, &k, &v)?;
    }
    for kv in &args.tol {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure(format!("--tol expects KEY=VALUE, got {kv:?}")))?;
        set_tolerance(&mut opts.section, k.trim(), v.trim())?;
    }
    Ok(Problem { surface, energy, opts })
}

fn parse_dir(text: &str) -> Result<RationalDirection, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let v: Vec<i64> = parts
        .iter()
        .map(|p| p.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure(format!("--dir expects m,n,N integers, got {text:?}")))?;
    if v.len() != 3 {
        return Err(Failure(format!("--dir expects three components, got {}", v.len())));
    }
    Ok(RationalDirection::from_vector([v[0], v[1], v[2]])?)
}

fn cmd_classify(dir: Option<String>, surface: &SurfaceArgs, file: &ConfigFile, out: &mut dyn Write) -> Outcome {
    let dir = parse_dir(&required(pick(dir, file, "dir")?, "dir")?)?;
    let p = problem(surface, file)?;
    let rec = classify_direction(&p.surface, p.energy, &dir, &p.opts);
    writeln!(out, "{}", serde_json::to_string(&rec)?)?;
    Ok(if rec.label.is_unresolved() { EXIT_UNRESOLVED } else { EXIT_OK })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_scan(
    big_n: Option<i64>,
    out_path: Option<PathBuf>,
    workers: Option<usize>,
    resume: bool,
    surface: &SurfaceArgs,
    file: &ConfigFile,
) -> Outcome {
    let big_n = required(pick(big_n, file, "N")?, "N")?;
    if big_n < 1 {
        return Err(Failure(format!("--N must be at least 1, got {big_n}")));
    }
    let out_path = required(pick(out_path, file, "out")?, "out")?;
    let workers = pick(workers, file, "workers")?.unwrap_or_else(default_workers);
    if workers < 1 {
        return Err(Failure("--workers must be at least 1".to_string()));
    }
    let resume = resume || file.parsed::<bool>("resume")?.unwrap_or(false);
    let p = problem(surface, file)?;
    let last = std::sync::Mutex::new(Instant::now());
    let report = |pr: Progress| {
        let mut t = last.lock().unwrap();
        if pr.done == pr.total || t.elapsed() >= Duration::from_secs(2) {
            *t = Instant::now();
            let rate = pr.done as f64 / pr.elapsed.as_secs_f64().max(1e-9);
            eprintln!("{}/{} directions, {:.1} directions/s", pr.done, pr.total, rate);
        }
    };
    let s = scan_to_file(&p.surface, p.energy, big_n, &p.opts, workers, &out_path, resume, Some(&report))?;
    let unresolved = s.records.iter().filter(|r| r.label.is_unresolved()).count();
    eprintln!("wrote {} records to {} ({unresolved} unresolved)", s.records.len(), out_path.display());
    Ok(EXIT_OK)
}

fn input_path(input: Option<PathBuf>, file: &ConfigFile) -> Result<PathBuf, Failure> {
    required(pick(input, file, "in")?, "in")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))
}

fn cmd_report(what: Report, file: &ConfigFile, out: &mut dyn Write) -> Outcome {
    match what {
        Report::Areas {
            input,
            csv,
            normalization,
        } => {
            let s = read_scan(&input_path(input, file)?)?;
            let norm = match value_enum(normalization, file, "normalization")? {
                Some(NormArg::Grid) => Normalization::Grid,
                _ => Normalization::Sphere,
            };
            let table = zone_areas_with(&s, norm);
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            if let Some(path) = pick(csv, file, "csv")? {
                write_file(&path, &buf)?;
            }
            out.write_all(&buf)?;
            Ok(EXIT_OK)
        }
        Report::Fracdim { input, csv, method } => {
            let s = read_scan(&input_path(input, file)?)?;
            let points = extract_ergodic_set(&s);
            let spacing = 1.0 / s.header.big_n as f64;
            let scales = default_scales(spacing.min(coordinate_spacing(&points)));
            let report = match value_enum(method, file, "method")? {
                Some(MethodArg::Sausage) => sausage_dimension_in(&points, &scales, Domain::Triangle)?,
                _ => box_count_dimension(&points, &scales)?,
            };
            write!(out, "points: {}\n{}", points.len(), report.summary())?;
            if let Some(path) = pick(csv, file, "csv")? {
                let mut buf = Vec::new();
                report.write_csv(&mut buf)?;
                write_file(&path, &buf)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_render(
    input: Option<PathBuf>,
    svg: Option<PathBuf>,
    ppm: Option<PathBuf>,
    size: Option<u32>,
    palette_seed: Option<u64>,
    file: &ConfigFile,
) -> Outcome {
    let s = read_scan(&input_path(input, file)?)?;
    let svg = pick(svg, file, "svg")?;
    let ppm = pick(ppm, file, "ppm")?;
    if svg.is_none() && ppm.is_none() {
        return Err(Failure("render needs --svg or --ppm".to_string()));
    }
    let mut opts = RenderOptions::default();
    if let Some(v) = pick(size, file, "size")? {
        opts.size = v.max(1);
    }
    if let Some(v) = pick(palette_seed, file, "palette_seed")? {
        opts.palette_seed = v;
    }
    if let Some(path) = svg {
        write_file(&path, render_svg(&s, &opts).as_bytes())?;
    }
    if let Some(path) = ppm {
        let mut buf = Vec::new();
        render_ppm(&s, &opts, &mut buf)?;
        write_file(&path, &buf)?;
    }
    let zones = s.records.iter().filter(|r| matches!(r.label, ZoneLabel::Zone(_))).count();
    eprintln!("rendered {} cells ({zones} in zones)", s.records.len());
    Ok(EXIT_OK)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    let file = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILURE;
            }
        },
        None => ConfigFile::default(),
    };
    let outcome = match cli.command {
        Command::Classify { dir, surface } => cmd_classify(dir, &surface, &file, out),
        Command::Scan {
            big_n,
            out: path,
            workers,
            resume,
            surface,
        } => cmd_scan(big_n, path, workers, resume, &surface, &file),
        Command::Report { what } => cmd_report(what, &file, out),
        Command::Render {
            input,
            svg,
            ppm,
            size,
            palette_seed,
        } => cmd_render(input, svg, ppm, size, palette_seed, &file),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
