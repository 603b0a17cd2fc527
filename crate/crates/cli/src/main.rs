use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tridisk::corpus::{generate, Family};
use tridisk::geodesic::{internal_side_distance, SidePair};
use tridisk::io::QuadFile;
use tridisk::medial_axis::{compute_medial_axis, GraphExport};
use tridisk::modulus::{estimate_modulus, ModulusOptions};
use tridisk::render::Figure;
use tridisk::report::{verify, InputIdentity, Route, Spacing, VerificationReport, VerifyOptions, REPORT_SCHEMA};
use tridisk::{ContactDisk, PolygonalQuadrilateral};

const EXIT_INVALID: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "tridisk", version, about = "Three-side disks, medial axes and modulus bounds for polygonal quadrilaterals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification pipeline on one or more quadrilateral files.
    Verify(VerifyArgs),
    /// Write seeded instance files.
    Gen(GenArgs),
    /// Render a quadrilateral and optional result files as SVG.
    Render(RenderArgs),
    /// Compute the medial axis graph.
    MedialAxis(ShapeArgs),
    /// Estimate the modulus of the curve family joining A1 and A2.
    Modulus(ModulusArgs),
    /// Internal distances between opposite sides, with witness paths.
    Geodesic(ShapeArgs),
}

#[derive(Args, Clone, Copy)]
struct SpacingArgs {
    /// Grid spacing as diam / CELLS.
    #[arg(long, conflicts_with = "h")]
    cells: Option<usize>,
    /// Absolute grid spacing.
    #[arg(long)]
    h: Option<f64>,
}

impl SpacingArgs {
    fn spacing(self) -> Spacing {
        match (self.cells, self.h) {
            (_, Some(h)) => Spacing::Absolute(h),
            (Some(n), None) => Spacing::Cells(n),
            (None, None) => Spacing::Cells(256),
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    spacing: SpacingArgs,
    /// Cross-check the sweep against the brute-force grid oracle.
    #[arg(long)]
    oracle: bool,
    /// Include wall-clock timings (makes the report non-reproducible).
    #[arg(long)]
    timings: bool,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the result as SVG (single input only).
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    /// Verification reports, medial axis graphs or contact disks to overlay.
    #[arg(long = "results", num_args = 1..)]
    results: Vec<PathBuf>,
    /// SVG path; stdout when absent.
    #[arg(long, alias = "svg")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShapeArgs {
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ModulusArgs {
    input: PathBuf,
    #[command(flatten)]
    spacing: SpacingArgs,
    /// Combine spacings h and h/2 by Richardson extrapolation.
    #[arg(long)]
    richardson: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

/// Failure with a dedicated exit code.
#[derive(Debug)]
struct Exit(u8, String);

type Outcome = Result<u8, Exit>;

fn invalid(msg: impl std::fmt::Display) -> Exit {
    Exit(EXIT_INVALID, msg.to_string())
}

struct Loaded {
    file: QuadFile,
    quad: PolygonalQuadrilateral,
    identity: InputIdentity,
}

fn load(path: &Path) -> Result<Loaded, Exit> {
    let bytes = fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let file = QuadFile::parse(text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let quad = file.to_quad().map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let identity = InputIdentity {
        file: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    };
    Ok(Loaded { file, quad, identity })
}

fn other(e: anyhow::Error) -> Exit {
    Exit(1, format!("{e:#}"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Exit> {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(other),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn title(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn check_spacing(q: &PolygonalQuadrilateral, spacing: Spacing) -> Result<(), Exit> {
    let h = spacing.for_quad(q);
    let max = q.diameter() / 32.0;
    if !(h > 0.0 && h <= max * (1.0 + 1e-12)) {
        return Err(invalid(format!("grid spacing {h} must lie in (0, diam/32 = {max}]")));
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    if a.svg.is_some() && a.inputs.len() != 1 {
        return Err(invalid("--svg needs exactly one input"));
    }
    let opts = VerifyOptions {
        spacing: a.spacing.spacing(),
        oracle: a.oracle,
        timings: a.timings,
    };
    let results: Vec<Result<_, Exit>> = a
        .inputs
        .par_iter()
        .map(|path| {
            let loaded = load(path)?;
            check_spacing(&loaded.quad, opts.spacing)?;
            Ok((path, verify(&loaded.quad, loaded.file.sampled, loaded.identity, &opts), loaded.quad))
        })
        .collect();
    let mut code = 0;
    let mut reports: Vec<&VerificationReport> = Vec::new();
    for r in &results {
        match r {
            Ok((_, v, _)) => {
                if !v.report.passed() {
                    code = code.max(EXIT_INVARIANT);
                }
                reports.push(&v.report);
            }
            Err(Exit(c, msg)) => {
                eprintln!("error: {msg}");
                code = if *c == EXIT_INVALID { EXIT_INVALID } else { code.max(*c) };
            }
        }
    }
    if code == EXIT_INVALID && reports.is_empty() {
        return Ok(code);
    }
    let text = if a.inputs.len() == 1 {
        reports.first().map(|r| r.to_json())
    } else {
        Some(pretty(&reports))
    };
    if let Some(text) = text {
        emit(a.out.as_deref(), &text)?;
    }
    if let (Some(svg), Some(Ok((path, v, quad)))) = (&a.svg, results.first()) {
        let graph = v.graph.as_ref().map(|g| g.export());
        let mut fig = Figure {
            title: title(path),
            quad: Some(quad),
            medial_axis: graph.as_ref(),
            disk: v.report.disk.as_ref(),
            ..Default::default()
        };
        if v.report.route == Route::Approximation {
            fig.levels.push(&v.swept);
        }
        if let Some(w) = &v.report.witnesses {
            fig.witnesses = vec![w.a.clone(), w.b.clone()];
        }
        emit(Some(svg), &fig.to_svg())?;
    }
    Ok(code)
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(other)?;
    for inst in generate(a.family, a.seed, a.count as usize) {
        let path = a.out.join(format!("{}.json", inst.name));
        emit(Some(&path), &QuadFile::from(&inst).to_json())?;
    }
    Ok(0)
}

/// Overlays read from result files.
#[derive(Default)]
struct Overlays {
    graph: Option<GraphExport>,
    disk: Option<ContactDisk>,
    witnesses: Vec<Vec<tridisk::Point>>,
}

fn read_overlay(path: &Path, acc: &mut Overlays) -> Result<(), Exit> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("warning: skipping {}: {e}", path.display());
            return Ok(());
        }
    };
    let bad = |e: serde_json::Error| invalid(format!("{}: {e}", path.display()));
    let v: Value = serde_json::from_str(&text).map_err(bad)?;
    if v.get("schema").and_then(Value::as_str) == Some(REPORT_SCHEMA) {
        let r: VerificationReport = serde_json::from_value(v).map_err(bad)?;
        acc.disk = r.disk.or(acc.disk.take());
        if let Some(w) = r.witnesses {
            acc.witnesses.extend([w.a, w.b]);
        }
    } else if v.get("nodes").is_some() && v.get("edges").is_some() {
        acc.graph = Some(serde_json::from_value(v).map_err(bad)?);
    } else if v.get("center").is_some() && v.get("radius").is_some() {
        acc.disk = Some(serde_json::from_value(v).map_err(bad)?);
    } else if let Some(w) = v.get("witnesses") {
        for key in ["a", "b"] {
            if let Some(p) = w.get(key).and_then(|x| x.get("path")) {
                acc.witnesses.push(serde_json::from_value(p.clone()).map_err(bad)?);
            }
        }
    } else {
        return Err(invalid(format!("{}: unrecognized result file", path.display())));
    }
    Ok(())
}

fn cmd_render(a: &RenderArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let mut acc = Overlays::default();
    for p in &a.results {
        read_overlay(p, &mut acc)?;
    }
    let fig = Figure {
        title: title(&a.input),
        quad: Some(&loaded.quad),
        medial_axis: acc.graph.as_ref(),
        disk: acc.disk.as_ref(),
        witnesses: acc.witnesses,
        ..Default::default()
    };
    emit(a.out.as_deref(), &fig.to_svg())?;
    Ok(0)
}

fn cmd_medial_axis(a: &ShapeArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let graph = compute_medial_axis(&loaded.quad).map_err(|e| Exit(EXIT_INVARIANT, e.to_string()))?;
    let export = graph.export();
    emit(a.out.as_deref(), &pretty(&export))?;
    if let Some(svg) = &a.svg {
        let fig = Figure {
            title: title(&a.input),
            quad: Some(&loaded.quad),
            medial_axis: Some(&export),
            ..Default::default()
        };
        emit(Some(svg), &fig.to_svg())?;
    }
    Ok(if graph.is_tree() { 0 } else { EXIT_INVARIANT })
}

fn cmd_modulus(a: &ModulusArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let spacing = a.spacing.spacing();
    check_spacing(&loaded.quad, spacing)?;
    let mut opts = ModulusOptions::with_spacing(spacing.for_quad(&loaded.quad));
    opts.richardson = a.richardson;
    let est = estimate_modulus(&loaded.quad, &opts).map_err(|e| Exit(EXIT_INVARIANT, e.to_string()))?;
    emit(a.out.as_deref(), &pretty(&est))?;
    Ok(0)
}

fn cmd_geodesic(a: &ShapeArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let q = &loaded.quad;
    let (s_a, wa) = internal_side_distance(q, SidePair::A);
    let (s_b, wb) = internal_side_distance(q, SidePair::B);
    let inside = wa.is_inside(q) && wb.is_inside(q);
    let out = json!({
        "s_a": s_a,
        "s_b": s_b,
        "witnesses": { "a": wa, "b": wb },
    });
    emit(a.out.as_deref(), &pretty(&out))?;
    if let Some(svg) = &a.svg {
        let fig = Figure {
            title: title(&a.input),
            quad: Some(q),
            witnesses: vec![wa.path.clone(), wb.path.clone()],
            ..Default::default()
        };
        emit(Some(svg), &fig.to_svg())?;
    }
    Ok(if inside { 0 } else { EXIT_INVARIANT })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Render(a) => cmd_render(a),
        Command::MedialAxis(a) => cmd_medial_axis(a),
        Command::Modulus(a) => cmd_modulus(a),
        Command::Geodesic(a) => cmd_geodesic(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
