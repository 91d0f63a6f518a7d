//! Command-line front end and file emitters.
//!
//! Subcommands build a model, compute constants, sample ranges, emit
//! region boundaries and figure data, or run the verification suite.
//! All floating-point file output goes through 17-significant-digit
//! decimal formatting; JSON carries numbers as strings so round-tripping
//! parsers cannot change them. Files are written atomically (temp file
//! plus rename) and identical config plus seed yields byte-identical
//! output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::constants::{self, DampingConstants};
use crate::enclosures::{self, EnclosureRegion};
use crate::model::{self, ModelPair};
use crate::ranges::{self, SampleStrategy};
use crate::spectrum::{self, LabeledRegion};
use crate::{fmt_f64, Error, Extended, Result};

/// Spectral enclosures for damped second-order systems.
#[derive(Debug, Parser)]
#[command(name = "qnr-enclose", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Compute damping constants, threshold values, and inequality margins
    Constants(ModelArgs),
    /// Emit boundary polylines, derived scalars, and an SVG for a numbered figure
    Figure(FigureArgs),
    /// Solve the eigenvalue problem and check every applicable enclosure
    Verify(ModelArgs),
    /// Sample the quadratic numerical range with the support polygon overlay
    Qnr(ModelArgs),
    /// Eigenvalues with residuals and refinement stability flags
    Spectrum(ModelArgs),
    /// Emit enclosure-region boundary polylines for a model
    Region(ModelArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Fluid-conveying pipe model: elasticity E, damping C, flow K
    #[arg(long, num_args = 3, value_names = ["E", "C", "K"], allow_negative_numbers = true)]
    pub pipe: Option<Vec<f64>>,
    /// Diagonal model with alternating damping, dimension N
    #[arg(long, value_name = "N", conflicts_with = "pipe")]
    pub diag: Option<usize>,
    /// JSON file holding the stiffness and damping matrices
    #[arg(long, value_name = "PATH", conflicts_with_all = ["pipe", "diag"])]
    pub custom: Option<PathBuf>,
    /// Galerkin truncation size for --pipe
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Sample count (random QNR draws, boundary polyline density)
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Relative membership tolerance
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Numerical-range support grid size
    #[arg(long, default_value_t = 720)]
    pub grid: usize,
    /// QNR sampling strategy: random, axis, or boundary
    #[arg(long, default_value = "random")]
    pub strategy: String,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Clip radius for unbounded region boundaries
    #[arg(long)]
    pub plot_cap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Figure id, 1 through 9
    #[arg(long)]
    pub figure: u32,
    /// Boundary polyline density
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Clip radius override for unbounded region boundaries
    #[arg(long)]
    pub plot_cap: Option<f64>,
}

/// Which model a command operates on.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Pipe { e: f64, c: f64, k: f64, n: usize },
    Diag { n: usize },
    Custom { path: PathBuf },
}

#[derive(Debug, Clone)]
pub enum CommandKind {
    Constants,
    Figure { id: u32 },
    Verify,
    Qnr,
    Spectrum,
    Region,
}

/// Fully resolved run configuration, independent of the flag parser.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Option<ModelSpec>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub samples: usize,
    pub nr_grid: usize,
    pub tol: f64,
    pub strategy: SampleStrategy,
    pub plot_cap: Option<f64>,
}

fn model_spec(args: &ModelArgs) -> Result<ModelSpec> {
    if let Some(p) = &args.pipe {
        if p.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "--pipe expects E C K, got {} values",
                p.len()
            )));
        }
        return Ok(ModelSpec::Pipe { e: p[0], c: p[1], k: p[2], n: args.n });
    }
    if let Some(n) = args.diag {
        return Ok(ModelSpec::Diag { n });
    }
    if let Some(path) = &args.custom {
        return Ok(ModelSpec::Custom { path: path.clone() });
    }
    Ok(ModelSpec::Pipe { e: 25.0, c: 1.0, k: 14.0, n: args.n })
}

fn config_from(kind: CommandKind, args: &ModelArgs) -> Result<RunConfig> {
    Ok(RunConfig {
        command: kind,
        model: Some(model_spec(args)?),
        out_dir: args.out.clone(),
        seed: args.seed,
        samples: args.samples,
        nr_grid: args.grid,
        tol: args.tol,
        strategy: args.strategy.parse()?,
        plot_cap: args.plot_cap,
    })
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        match &self.command {
            CliCommand::Constants(a) => config_from(CommandKind::Constants, a),
            CliCommand::Verify(a) => config_from(CommandKind::Verify, a),
            CliCommand::Qnr(a) => config_from(CommandKind::Qnr, a),
            CliCommand::Spectrum(a) => config_from(CommandKind::Spectrum, a),
            CliCommand::Region(a) => config_from(CommandKind::Region, a),
            CliCommand::Figure(a) => Ok(RunConfig {
                command: CommandKind::Figure { id: a.figure },
                model: None,
                out_dir: a.out.clone(),
                seed: 42,
                samples: a.samples,
                nr_grid: 720,
                tol: 1e-6,
                strategy: SampleStrategy::Random,
                plot_cap: a.plot_cap,
            }),
        }
    }
}

/// Entry point used by the binary: caps parallelism from the environment,
/// dispatches, and maps failures to exit codes (2 invalid input, 3
/// numerical failure; verification decides between 0 and 1 itself).
pub fn run_cli(cli: Cli) -> i32 {
    if let Ok(threads) = std::env::var("QNR_ENCLOSE_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            if t >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
        }
    }
    let config = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DidNotConverge(_) | Error::InsideGap => 3,
        _ => 2,
    }
}

/// Runs one command; the returned code is the process exit status.
pub fn run(config: &RunConfig) -> Result<i32> {
    fs::create_dir_all(&config.out_dir)?;
    match &config.command {
        CommandKind::Constants => cmd_constants(config),
        CommandKind::Figure { id } => cmd_figure(config, *id),
        CommandKind::Verify => cmd_verify(config),
        CommandKind::Qnr => cmd_qnr(config),
        CommandKind::Spectrum => cmd_spectrum(config),
        CommandKind::Region => cmd_region(config),
    }
}

fn build_model(spec: &ModelSpec) -> Result<ModelPair> {
    match spec {
        ModelSpec::Pipe { e, c, k, n } => model::build_pipe(*n, *e, *c, *k),
        ModelSpec::Diag { n } => model::build_diag_example(*n),
        ModelSpec::Custom { path } => model::load_custom(path),
    }
}

fn require_model(config: &RunConfig) -> Result<(&ModelSpec, ModelPair)> {
    let spec = config
        .model
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("this command needs a model".into()))?;
    Ok((spec, build_model(spec)?))
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json serialization: {e}")))?;
    text.push('\n');
    write_atomic(path, &text)
}

fn jnum(x: f64) -> Value {
    Value::String(fmt_f64(x))
}

fn jext(x: Extended) -> Value {
    match x.finite() {
        Some(v) => jnum(v),
        None => Value::String("inf".into()),
    }
}

fn jcomplex(z: Complex64) -> Value {
    json!([fmt_f64(z.re), fmt_f64(z.im)])
}

fn jinterval(i: Option<(f64, f64)>) -> Value {
    match i {
        Some((a, b)) => json!([fmt_f64(a), fmt_f64(b)]),
        None => Value::String("empty".into()),
    }
}

fn constants_json(c: &DampingConstants) -> Value {
    json!({
        "beta": jnum(c.beta),
        "gamma": jext(c.gamma),
        "delta": jnum(c.delta),
        "mu": jnum(c.mu),
        "a0": jnum(c.a0),
        "k": jext(c.k),
    })
}

fn provenance_json(spec: &ModelSpec) -> Value {
    match spec {
        ModelSpec::Pipe { e, c, k, n } => json!({
            "kind": "pipe",
            "e": jnum(*e),
            "c": jnum(*c),
            "k": jnum(*k),
            "n": n,
        }),
        ModelSpec::Diag { n } => json!({ "kind": "diag", "n": n }),
        ModelSpec::Custom { path } => json!({
            "kind": "custom",
            "path": path.display().to_string(),
        }),
    }
}

/// Threshold scalars derived from a constants set, with entries present
/// only when the underlying quantity is defined.
fn derived_json(c: &DampingConstants) -> Value {
    let mut map = Map::new();
    if let Some(k) = c.k.finite() {
        if c.mu > 0.0 {
            if let Ok(kmu) = enclosures::k_mu(k, c.mu) {
                map.insert("k_mu".into(), jnum(kmu));
                if let Ok(i0mu) = enclosures::interval_i0mu(c.beta, c.delta, kmu) {
                    map.insert("i0_mu".into(), jinterval(i0mu));
                }
            }
        }
        if let Ok((l12, l23)) = enclosures::lambdas(c) {
            map.insert("lambda12".into(), jnum(l12));
            map.insert("lambda23".into(), jext(l23));
        }
    }
    if let Ok(i0) = enclosures::interval_i0(c.beta, c.delta) {
        map.insert("i0".into(), jinterval(i0));
    }
    Value::Object(map)
}

fn cmd_constants(config: &RunConfig) -> Result<i32> {
    let (spec, model) = require_model(config)?;
    let computed = constants::compute_constants_seeded(&model, config.seed)?;
    let damping_scale = model.damping().max_abs();
    let mut warnings: Vec<String> = Vec::new();
    if !computed.beta_positive(damping_scale) {
        warnings.push(
            "beta = 0: sectorial and accretive enclosures are unavailable, only the \
             half-plane bound applies"
                .into(),
        );
    }
    let chain = {
        let mut map = Map::new();
        map.insert(
            "mu_sq_minus_beta_delta".into(),
            jnum(computed.mu * computed.mu - computed.beta * computed.delta),
        );
        map.insert(
            "gamma_minus_beta".into(),
            match computed.gamma.finite() {
                Some(g) => jnum(g - computed.beta),
                None => Value::String("inf".into()),
            },
        );
        map.insert(
            "beta_minus_a0_mu".into(),
            jnum(computed.beta - computed.a0 * computed.mu),
        );
        map.insert(
            "mu_minus_a0_delta".into(),
            jnum(computed.mu - computed.a0 * computed.delta),
        );
        Value::Object(map)
    };
    let mut doc = Map::new();
    doc.insert("model".into(), provenance_json(spec));
    doc.insert("computed".into(), constants_json(&computed));
    doc.insert("computed_derived".into(), derived_json(&computed));
    doc.insert("chain_margins".into(), chain);
    if let ModelSpec::Pipe { e, c, k, .. } = spec {
        let analytic = constants::pipe_constants(*e, *c, *k)?;
        doc.insert("analytic".into(), constants_json(&analytic));
        doc.insert("analytic_derived".into(), derived_json(&analytic));
    }
    doc.insert(
        "warnings".into(),
        Value::Array(warnings.iter().map(|w| Value::String(w.clone())).collect()),
    );
    let path = config.out_dir.join("constants.json");
    write_json(&path, &Value::Object(doc))?;
    println!("beta    = {}", fmt_f64(computed.beta));
    println!("gamma   = {}", computed.gamma);
    println!("delta   = {}", fmt_f64(computed.delta));
    println!("mu      = {}", fmt_f64(computed.mu));
    println!("a0      = {}", fmt_f64(computed.a0));
    println!("k       = {}", computed.k);
    for w in &warnings {
        println!("warning: {w}");
    }
    println!("wrote {}", path.display());
    Ok(0)
}

/// A figure is a constants set plus the region family it showcases.
struct FigureSpec {
    constants: DampingConstants,
    selfadjoint: bool,
}

/// Figure-id table. Ids 1-4 walk the oblique-damping family (k = 0.2,
/// beta = 4) through mu = 0, delta = 0, and the full strip case; 5-7 walk
/// the Hermitian-damping family (beta = 4); 8-9 are the pipe model at
/// C = 1 and at the strip-opening threshold C = 10/pi^2.
fn figure_spec(id: u32) -> Result<FigureSpec> {
    let synthetic = |beta: f64, mu: f64, delta: f64, k: f64| DampingConstants {
        beta,
        gamma: Extended::Infinite,
        delta,
        mu,
        a0: 1.0,
        k: Extended::Finite(k),
    };
    let spec = match id {
        1 => FigureSpec { constants: synthetic(4.0, 0.0, 0.0, 0.2), selfadjoint: false },
        2 => FigureSpec { constants: synthetic(4.0, 2.1, 0.0, 0.2), selfadjoint: false },
        3 | 4 => FigureSpec { constants: synthetic(4.0, 2.1, 1.05, 0.2), selfadjoint: false },
        5 => FigureSpec { constants: synthetic(4.0, 1.5, 0.0, 0.0), selfadjoint: true },
        6 => FigureSpec { constants: synthetic(4.0, 1.5, 0.4, 0.0), selfadjoint: true },
        7 => FigureSpec {
            constants: synthetic(4.0, (16.0f64 / 3.0).sqrt(), 4.0 / 3.0, 0.0),
            selfadjoint: true,
        },
        8 => FigureSpec {
            constants: constants::pipe_constants(25.0, 1.0, 14.0)?,
            selfadjoint: false,
        },
        9 => FigureSpec {
            constants: constants::pipe_constants(25.0, 10.0 / std::f64::consts::PI.powi(2), 14.0)?,
            selfadjoint: false,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown figure id {other}, expected 1 through 9"
            )))
        }
    };
    Ok(spec)
}

/// Default clip radius when a region is unbounded to the left: far enough
/// past every crossover that the plot shows all regime changes.
fn synthetic_plot_cap(c: &DampingConstants) -> f64 {
    let mut cap = c.beta;
    if let Ok((_, l23)) = enclosures::lambdas(c) {
        if let Some(v) = l23.finite() {
            cap = cap.max(v);
        }
    }
    if c.delta > 0.0 {
        cap = cap.max(2.0 / c.delta);
    }
    if let Some(g) = c.gamma.finite() {
        cap = cap.max(g);
    }
    1.5 * cap.max(1.0)
}

fn polylines_csv(polylines: &[Vec<Complex64>]) -> String {
    let mut out = String::from("polyline,re,im\n");
    for (i, line) in polylines.iter().enumerate() {
        for p in line {
            out.push_str(&format!("{i},{},{}\n", fmt_f64(p.re), fmt_f64(p.im)));
        }
    }
    out
}

fn svg_px(x: f64) -> String {
    format!("{x:.3}")
}

/// Composite SVG: the enclosure boundary and the wider range-based bound,
/// both mirrored across the real axis, with the coordinate axes.
fn figure_svg(qnr: &[Vec<Complex64>], nr: &[Vec<Complex64>], cap: f64) -> String {
    let mut ymax = 0.05 * cap;
    for line in qnr.iter().chain(nr.iter()) {
        for p in line {
            ymax = ymax.max(p.im.abs());
        }
    }
    let xmin = -1.05 * cap;
    let xmax = 0.05 * cap;
    let to_px = |p: Complex64, flip: bool| -> (f64, f64) {
        let im = if flip { -p.im } else { p.im };
        let x = 40.0 + (p.re - xmin) / (xmax - xmin) * 720.0;
        let y = 300.0 - im / ymax * 260.0;
        (x, y)
    };
    let group = |lines: &[Vec<Complex64>], stroke: &str, width: f64| -> String {
        let mut g = format!("  <g fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\">\n");
        for line in lines {
            for flip in [false, true] {
                let points: Vec<String> = line
                    .iter()
                    .map(|&p| {
                        let (x, y) = to_px(p, flip);
                        format!("{},{}", svg_px(x), svg_px(y))
                    })
                    .collect();
                if points.len() >= 2 {
                    g.push_str(&format!("    <polyline points=\"{}\" />\n", points.join(" ")));
                }
            }
        }
        g.push_str("  </g>\n");
        g
    };
    let (ox, oy) = {
        let x = 40.0 + (0.0 - xmin) / (xmax - xmin) * 720.0;
        (x, 300.0)
    };
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" \
         viewBox=\"0 0 800 600\">\n",
    );
    svg.push_str("  <rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\" />\n");
    svg.push_str(&format!(
        "  <line x1=\"40\" y1=\"{oy}\" x2=\"760\" y2=\"{oy}\" stroke=\"#999999\" stroke-width=\"0.5\" />\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{ox}\" y1=\"40\" x2=\"{ox}\" y2=\"560\" stroke=\"#999999\" stroke-width=\"0.5\" />\n",
        ox = svg_px(ox)
    ));
    svg.push_str(&group(nr, "#b0b0b0", 1.0));
    svg.push_str(&group(qnr, "#c0392b", 1.5));
    svg.push_str("</svg>\n");
    svg
}

fn build_figure_regions(fig: &FigureSpec) -> Result<(EnclosureRegion, EnclosureRegion)> {
    let qnr_region = if fig.selfadjoint {
        enclosures::region_selfadjoint(&fig.constants)?
    } else {
        enclosures::region_sectorial(&fig.constants)?
    };
    let nr_region = if fig.constants.delta > 0.0 && fig.constants.k.is_finite() {
        enclosures::region_nr_parabola(&fig.constants)?
    } else {
        enclosures::region_halfplane(&fig.constants)
    };
    Ok((qnr_region, nr_region))
}

fn cmd_figure(config: &RunConfig, id: u32) -> Result<i32> {
    let fig = figure_spec(id)?;
    let (qnr_region, nr_region) = build_figure_regions(&fig)?;
    let cap = config.plot_cap.unwrap_or_else(|| synthetic_plot_cap(&fig.constants));
    let samples = config.samples.max(16);
    let qnr_lines = enclosures::region_boundary(&qnr_region, samples, cap)?;
    let nr_lines = enclosures::region_boundary(&nr_region, samples, cap)?;

    let mut sidecar = Map::new();
    sidecar.insert("figure".into(), json!(id));
    sidecar.insert("constants".into(), constants_json(&fig.constants));
    sidecar.insert("region".into(), json!(qnr_region.kind().name()));
    sidecar.insert("plot_cap".into(), jnum(cap));
    let d = qnr_region.derived();
    if let Some(v) = d.k_mu {
        sidecar.insert("k_mu".into(), jnum(v));
    }
    if let Some(v) = d.lambda12 {
        sidecar.insert("lambda12".into(), jnum(v));
    }
    if let Some(v) = d.lambda23 {
        sidecar.insert("lambda23".into(), jext(v));
    }
    if d.i0.is_some() || !fig.selfadjoint {
        sidecar.insert("i0".into(), jinterval(d.i0));
    }
    if d.i0mu.is_some() || !fig.selfadjoint {
        sidecar.insert("i0_mu".into(), jinterval(d.i0mu));
    }
    if let Some(v) = d.sa_slope {
        sidecar.insert("sa_slope".into(), jnum(v));
    }
    if let Some(v) = d.disk_in {
        sidecar.insert("disk_in".into(), jnum(v));
    }
    if let Some(v) = d.disk_out {
        sidecar.insert("disk_out".into(), jnum(v));
    }

    let base = |name: &str| config.out_dir.join(format!("figure{id}_{name}"));
    write_atomic(&base("qnr_region.csv"), &polylines_csv(&qnr_lines))?;
    write_atomic(&base("nr_region.csv"), &polylines_csv(&nr_lines))?;
    write_json(&config.out_dir.join(format!("figure{id}.json")), &Value::Object(sidecar))?;
    write_atomic(
        &config.out_dir.join(format!("figure{id}.svg")),
        &figure_svg(&qnr_lines, &nr_lines, cap),
    )?;
    println!("figure {id}: wrote qnr_region.csv, nr_region.csv, sidecar json, svg in {}", config.out_dir.display());
    Ok(0)
}

/// Every enclosure the constants support, labeled with the constants'
/// origin. Regions whose preconditions fail are skipped, not errors.
fn applicable_regions(
    c: &DampingConstants,
    origin: &str,
    damping_scale: f64,
) -> Vec<LabeledRegion> {
    let mut regions = vec![LabeledRegion {
        label: format!("half_plane[{origin}]"),
        region: enclosures::region_halfplane(c),
    }];
    let beta_pos = c.beta_positive(damping_scale);
    if c.k.is_finite() && c.delta > 0.0 {
        if let Ok(region) = enclosures::region_nr_parabola(c) {
            regions.push(LabeledRegion { label: format!("nr_parabola[{origin}]"), region });
        }
    }
    if beta_pos && c.delta > 0.0 {
        if let Ok(region) = enclosures::region_accretive(c) {
            regions.push(LabeledRegion { label: format!("accretive[{origin}]"), region });
        }
    }
    if beta_pos && c.k.is_finite() {
        if let Ok(region) = enclosures::region_sectorial(c) {
            regions.push(LabeledRegion { label: format!("sectorial[{origin}]"), region });
        }
        if let Ok(region) = enclosures::region_selfadjoint(c) {
            regions.push(LabeledRegion { label: format!("self_adjoint[{origin}]"), region });
        }
    }
    regions
}

fn cmd_verify(config: &RunConfig) -> Result<i32> {
    let (spec, model) = require_model(config)?;
    let damping_scale = model.damping().max_abs();
    let computed = constants::compute_constants_seeded(&model, config.seed)?;
    let mut regions = applicable_regions(&computed, "computed", damping_scale);
    let mut analytic = None;
    if let ModelSpec::Pipe { e, c, k, .. } = spec {
        let a = constants::pipe_constants(*e, *c, *k)?;
        regions.extend(applicable_regions(&a, "analytic", damping_scale));
        analytic = Some(a);
    }
    let report = spectrum::verify_enclosures(&model, &regions, config.tol)?;
    let hermitian_damping = model.damping().is_hermitian();
    let symmetry = if hermitian_damping {
        Some(spectrum::symmetry_check(&report, (1e-8 * report.scale).max(1e-12)))
    } else {
        None
    };

    let mut all_pass = true;
    for v in &report.verdicts {
        let status = if v.passed { "PASS" } else { "FAIL" };
        all_pass &= v.passed;
        println!(
            "check {}: {} ({} violations, worst slack {})",
            v.label,
            status,
            v.violations,
            fmt_f64(v.worst_slack)
        );
    }
    for g in &report.gap_findings {
        let status = if g.clean { "PASS" } else { "FAIL" };
        all_pass &= g.clean;
        match g.interval {
            Some((a, b)) => println!("check gap {}: {} (strip ({}, {}))", g.label, status, fmt_f64(a), fmt_f64(b)),
            None => println!("check gap {}: {} (empty)", g.label, status),
        }
    }
    if let Some(sym) = symmetry {
        let status = if sym { "PASS" } else { "FAIL" };
        all_pass &= sym;
        println!("check conjugate_symmetry: {status}");
    }

    let constants_doc = {
        let mut m = Map::new();
        m.insert("computed".into(), constants_json(&computed));
        if let Some(a) = &analytic {
            m.insert("analytic".into(), constants_json(a));
        }
        Value::Object(m)
    };
    let doc = json!({
        "model": provenance_json(spec),
        "tol_rel": jnum(config.tol),
        "scale": jnum(report.scale),
        "eigenvalues": report.eigenvalues.iter().map(|&z| jcomplex(z)).collect::<Vec<_>>(),
        "verdicts": report.verdicts.iter().map(|v| json!({
            "label": v.label,
            "passed": v.passed,
            "violations": v.violations,
            "worst_slack": jnum(v.worst_slack),
            "worst_eigenvalue": v.worst_eigenvalue.map(jcomplex).unwrap_or(Value::Null),
        })).collect::<Vec<_>>(),
        "gap_findings": report.gap_findings.iter().map(|g| json!({
            "label": g.label,
            "interval": jinterval(g.interval),
            "clean": g.clean,
        })).collect::<Vec<_>>(),
        "conjugate_symmetry": symmetry.map(Value::Bool).unwrap_or(Value::String("not_applicable".into())),
        "constants": constants_doc,
    });
    let path = config.out_dir.join("verify_report.json");
    write_json(&path, &doc)?;
    println!("wrote {}", path.display());
    if all_pass {
        println!("verify: PASS");
        Ok(0)
    } else {
        println!("verify: FAIL");
        Ok(1)
    }
}

fn support_csv(support: &ranges::SupportFunction) -> String {
    let mut out = String::from("theta,support,vertex_re,vertex_im\n");
    let m = support.len();
    for i in 0..m {
        let j = (i + 1) % m;
        let (t1, s1) = (support.angles()[i], support.values()[i]);
        let (t2, s2) = (support.angles()[j], support.values()[j]);
        let det = (t2 - t1).sin();
        let (vx, vy) = if det.abs() > 1e-12 {
            ((s1 * t2.sin() - s2 * t1.sin()) / det, (s2 * t1.cos() - s1 * t2.cos()) / det)
        } else {
            (s1 * t1.cos(), s1 * t1.sin())
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(t1),
            fmt_f64(s1),
            fmt_f64(vx),
            fmt_f64(vy)
        ));
    }
    out
}

fn cmd_qnr(config: &RunConfig) -> Result<i32> {
    let (_, model) = require_model(config)?;
    let samples = ranges::sample_qnr(&model, config.strategy, config.samples, config.seed)?;
    let support = ranges::nr_support(&model, config.nr_grid)?;
    let samples_path = config.out_dir.join("qnr_samples.csv");
    let support_path = config.out_dir.join("nr_support.csv");
    write_atomic(&samples_path, &ranges::samples_csv(&samples))?;
    write_atomic(&support_path, &support_csv(&support))?;
    let min_re = samples
        .iter()
        .flat_map(|s| s.roots())
        .map(|l| l.re)
        .fold(f64::INFINITY, f64::min);
    println!("samples: {} ({} strategy)", samples.len(), config.strategy);
    println!("min Re over roots: {}", fmt_f64(min_re));
    println!("wrote {}", samples_path.display());
    println!("wrote {}", support_path.display());
    Ok(0)
}

fn cmd_spectrum(config: &RunConfig) -> Result<i32> {
    let (spec, model) = require_model(config)?;
    let (report, _) = spectrum::solve_qep_with_vectors(&model)?;
    let residuals = report.residuals.clone().unwrap_or_default();
    let mut csv = String::from("re,im,residual\n");
    for (lambda, r) in report.eigenvalues.iter().zip(residuals.iter()) {
        csv.push_str(&format!("{},{},{}\n", fmt_f64(lambda.re), fmt_f64(lambda.im), fmt_f64(*r)));
    }
    let refinement = match spec {
        ModelSpec::Pipe { e, c, k, n } if *n >= 2 => {
            let coarse_model = model::build_pipe(n / 2, *e, *c, *k)?;
            let coarse = spectrum::solve_qep(&coarse_model)?;
            let flags = spectrum::stabilized_against(
                &coarse.eigenvalues,
                &report.eigenvalues,
                1e-6 * report.scale,
            );
            let all_stable = flags.iter().all(|&f| f);
            json!({
                "coarse_n": n / 2,
                "stabilized": flags,
                "all_stable": all_stable,
            })
        }
        _ => Value::Null,
    };
    let max_re = report.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let min_abs = report.eigenvalues.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    let doc = json!({
        "model": provenance_json(spec),
        "scale": jnum(report.scale),
        "eigenvalues": report.eigenvalues.iter().map(|&z| jcomplex(z)).collect::<Vec<_>>(),
        "residuals": residuals.iter().map(|&r| jnum(r)).collect::<Vec<_>>(),
        "max_re": jnum(max_re),
        "min_abs": jnum(min_abs),
        "refinement": refinement,
    });
    let csv_path = config.out_dir.join("spectrum.csv");
    let json_path = config.out_dir.join("spectrum.json");
    write_atomic(&csv_path, &csv)?;
    write_json(&json_path, &doc)?;
    println!("eigenvalues: {}", report.eigenvalues.len());
    println!("spectral abscissa: {}", fmt_f64(max_re));
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(0)
}

fn cmd_region(config: &RunConfig) -> Result<i32> {
    let (spec, model) = require_model(config)?;
    let damping_scale = model.damping().max_abs();
    let computed = constants::compute_constants_seeded(&model, config.seed)?;
    let regions = applicable_regions(&computed, "computed", damping_scale);
    let cap = match config.plot_cap {
        Some(c) => c,
        None => {
            let report = spectrum::solve_qep(&model)?;
            let max_abs_re =
                report.eigenvalues.iter().map(|l| l.re.abs()).fold(0.0f64, f64::max);
            1.5 * max_abs_re.max(1.0)
        }
    };
    let samples = config.samples.clamp(16, 8192);
    let mut listing = Map::new();
    listing.insert("model".into(), provenance_json(spec));
    listing.insert("constants".into(), constants_json(&computed));
    listing.insert("plot_cap".into(), jnum(cap));
    let mut emitted = Vec::new();
    for labeled in &regions {
        let lines = enclosures::region_boundary(&labeled.region, samples, cap)?;
        let file = format!(
            "region_{}.csv",
            labeled.label.replace(['[', ']'], "_").trim_end_matches('_')
        );
        write_atomic(&config.out_dir.join(&file), &polylines_csv(&lines))?;
        emitted.push(json!({
            "label": labeled.label,
            "file": file,
            "derived": derived_json(labeled.region.constants()),
        }));
        println!("wrote {}", config.out_dir.join(&file).display());
    }
    listing.insert("regions".into(), Value::Array(emitted));
    let path = config.out_dir.join("regions.json");
    write_json(&path, &Value::Object(listing))?;
    println!("wrote {}", path.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_table_covers_ids() {
        for id in 1..=9u32 {
            let fig = figure_spec(id).unwrap();
            assert!(fig.constants.validate().is_ok(), "figure {id} constants invalid");
            build_figure_regions(&fig).unwrap();
        }
        assert!(figure_spec(0).is_err());
        assert!(figure_spec(10).is_err());
    }

    #[test]
    fn figure4_caption_values() {
        let fig = figure_spec(4).unwrap();
        let (region, _) = build_figure_regions(&fig).unwrap();
        let d = region.derived();
        assert!((d.lambda12.unwrap() - 1.04).abs() < 0.01);
        assert!((d.lambda23.unwrap().expect_finite() - 3.10).abs() < 0.01);
        let (a, b) = d.i0.unwrap();
        assert!((a - 1.56).abs() < 0.01 && (b - 2.44).abs() < 0.01);
        let (a, b) = d.i0mu.unwrap();
        assert!((a - 1.12).abs() < 0.01 && (b - 2.87).abs() < 0.01);
    }

    #[test]
    fn figure7_strip_is_one_three() {
        let fig = figure_spec(7).unwrap();
        let (region, _) = build_figure_regions(&fig).unwrap();
        let (a, b) = region.derived().i0.unwrap();
        assert!((a - 1.0).abs() < 1e-9 && (b - 3.0).abs() < 1e-9);
    }

    #[test]
    fn svg_is_balanced_xml() {
        let fig = figure_spec(4).unwrap();
        let (qnr_region, nr_region) = build_figure_regions(&fig).unwrap();
        let cap = synthetic_plot_cap(&fig.constants);
        let qnr = enclosures::region_boundary(&qnr_region, 64, cap).unwrap();
        let nr = enclosures::region_boundary(&nr_region, 64, cap).unwrap();
        let svg = figure_svg(&qnr, &nr, cap);
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<svg").count(), 1);
        assert_eq!(svg.matches("</svg>").count(), 1);
        assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
        assert!(svg.matches("<polyline").count() >= 2);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn json_numbers_are_strings() {
        let c = constants::pipe_constants(25.0, 1.0, 14.0).unwrap();
        let v = constants_json(&c);
        assert!(v["beta"].is_string());
        assert!(v["gamma"].is_string());
        assert_eq!(v["gamma"], "inf");
        let parsed: f64 = v["beta"].as_str().unwrap().parse().unwrap();
        assert!((parsed - c.beta).abs() < 1e-12 * c.beta);
    }

    #[test]
    fn default_model_is_pipe_32(){
        let args = ModelArgs {
            pipe: None,
            diag: None,
            custom: None,
            n: 32,
            samples: 100,
            seed: 42,
            tol: 1e-6,
            grid: 720,
            strategy: "random".into(),
            out: PathBuf::from("out"),
            plot_cap: None,
        };
        match model_spec(&args).unwrap() {
            ModelSpec::Pipe { e, c, k, n } => {
                assert_eq!((e, c, k, n), (25.0, 1.0, 14.0, 32));
            }
            other => panic!("unexpected default model {other:?}"),
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        assert!(fs::read_dir(dir.path()).unwrap().count() == 1);
    }

    #[test]
    fn support_csv_no_adjacent_duplicate_thetas() {
        let m = model::build_pipe(2, 25.0, 1.0, 14.0).unwrap();
        let support = ranges::nr_support(&m, 16).unwrap();
        let csv = support_csv(&support);
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("theta,support,vertex_re,vertex_im"));
    }
}
