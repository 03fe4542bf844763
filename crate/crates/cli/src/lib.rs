//! Batch front end for the `pmc-helix` library.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pmc_helix::frenet::{frenet_apparatus, sample_parameters};
use pmc_helix::surface::ImmersionSpec;
use pmc_helix::verify::{classify_surface, verify, ProbeGrid, SurfaceClass};

pub mod doc;
pub mod error;
pub mod grid_csv;

use doc::{AmbientDoc, CurveDocument, GridDoc, SurfaceDocument, SurfaceSource};
pub use error::CliError;
use grid_csv::num;

#[derive(Debug, Parser)]
#[command(
    name = "pmc-helix",
    version,
    about = "Build, verify and classify pmc helix surfaces in M^n(c)×ℝ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a surface; writes a grid CSV and a surface document next to it.
    Build(BuildArgs),
    /// Run every residual check on a surface document; prints the report JSON.
    Verify(CheckArgs),
    /// Verify, then print the case label and the diagnostics JSON.
    Classify(CheckArgs),
    /// Frenet curvatures along a curve document as CSV.
    Frenet(FrenetArgs),
    /// Verify over a parameter lattice; long-form CSV.
    Sweep(SweepArgs),
}

/// Surface parameters. In `sweep` each accepts a lattice `a:b:k` or a list `x,y,…`.
#[derive(Debug, Clone, Args)]
struct ParamFlags {
    /// slice, graph-strip, case3, torus-helix, cmc-torus, small-sphere, case4, case5 (or 3, 4, 5).
    #[arg(long)]
    case: String,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// |H|
    #[arg(long = "H", allow_hyphen_values = true)]
    h: Option<String>,
    /// |T|
    #[arg(long = "T", allow_hyphen_values = true)]
    t: Option<String>,
    /// Sign of ⟨H,N⟩ for case 4 (+1 or −1).
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<String>,
    /// Half-width of the integrated parameter square (cases 4 and 5).
    #[arg(long, allow_hyphen_values = true)]
    half: Option<String>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Grid CSV path; the surface document goes to the same path with extension .json.
    #[arg(short, long)]
    output: PathBuf,
    /// Nodes per direction when sampling a closed form.
    #[arg(long, default_value_t = 65)]
    nodes: usize,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Surface document (JSON).
    document: PathBuf,
    /// Multiply every tolerance by this factor (≥ 1).
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FrenetArgs {
    /// Curve document (JSON).
    #[arg(long)]
    curve: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamFlags,
    /// Probe grid is grid × grid.
    #[arg(long, default_value_t = 16)]
    grid: usize,
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn canonical_kind(case: &str) -> Result<String, CliError> {
    let k = match case {
        "3" => "case3",
        "4" => "case4",
        "5" => "case5",
        "1" | "2" => {
            return Err(CliError::param(format!(
                "case {case} is delegated to external classifications; build a control such as cmc-torus or small-sphere"
            )))
        }
        other => other,
    };
    Ok(k.replace('_', "-"))
}

fn default_n(kind: &str) -> usize {
    match kind {
        "case5" | "small-sphere" => 4,
        "torus-helix" | "cmc-torus" => 3,
        _ => 2,
    }
}

fn default_c(kind: &str) -> f64 {
    if kind == "case4" {
        -1.0
    } else {
        1.0
    }
}

/// Parses `x`, `a:b:k` (k points, inclusive) or `x,y,…`.
fn lattice(name: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::param(format!("--{name}: cannot parse \"{spec}\""));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if let Some((a, rest)) = spec.split_once(':') {
        let (b, k) = rest.split_once(':').ok_or_else(bad)?;
        let (a, b) = (parse(a)?, parse(b)?);
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        if k == 1 {
            return Ok(vec![a]);
        }
        return Ok((0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect());
    }
    spec.split(',').map(parse).collect()
}

/// (c, named parameters)
type Point = (f64, BTreeMap<String, f64>);

impl ParamFlags {
    fn named(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("H", &self.h),
            ("T", &self.t),
            ("sign", &self.sign),
            ("r1", &self.r1),
            ("r2", &self.r2),
            ("slope", &self.slope),
            ("rho", &self.rho),
            ("t0", &self.t0),
            ("half", &self.half),
        ]
    }

    /// Every combination of the given values, c first.
    fn expand(&self) -> Result<(String, usize, Vec<Point>), CliError> {
        let kind = canonical_kind(&self.case)?;
        let n = self.n.unwrap_or_else(|| default_n(&kind));
        let cs = match &self.c {
            Some(s) => lattice("c", s)?,
            None => vec![default_c(&kind)],
        };
        let mut combos: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
        for (name, value) in self.named() {
            if let Some(s) = value {
                let vals = lattice(name, s)?;
                combos = combos
                    .into_iter()
                    .flat_map(|m| {
                        vals.iter().map(move |v| {
                            let mut m = m.clone();
                            m.insert(name.to_string(), *v);
                            m
                        })
                    })
                    .collect();
            }
        }
        let out = cs
            .iter()
            .flat_map(|c| combos.iter().map(move |m| (*c, m.clone())))
            .collect();
        Ok((kind, n, out))
    }

    fn single(&self) -> Result<(String, AmbientDoc, BTreeMap<String, f64>), CliError> {
        let (kind, n, mut all) = self.expand()?;
        if all.len() != 1 {
            return Err(CliError::param(
                "build takes single parameter values, not lattices".into(),
            ));
        }
        let (c, params) = all.remove(0);
        Ok((kind, AmbientDoc { c, n }, params))
    }
}

fn write_out(output: &Option<PathBuf>, out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (kind, ambient, params) = a.params.single()?;
    let src = SurfaceSource {
        kind: Some(kind),
        params,
        grid_csv: None,
    };
    let spec = doc::build_surface(ambient, &src, Path::new("."))?;
    if a.nodes < 2 {
        return Err(CliError::param("--nodes must be at least 2".into()));
    }
    grid_csv::write_file(&a.output, |f| {
        grid_csv::write_surface(std::io::BufWriter::new(f), &spec, a.nodes)
    })?;
    let json_path = a.output.with_extension("json");
    let document = match spec.sampled_grid() {
        Some(grid) => SurfaceDocument {
            ambient,
            surface: SurfaceSource {
                kind: None,
                params: BTreeMap::new(),
                grid_csv: Some(PathBuf::from(a.output.file_name().unwrap_or_default())),
            },
            grid: Some(GridDoc { nu: 64, nv: 64 }),
            tolerances: None,
            provenance: Some(grid.provenance().clone()),
        },
        None => SurfaceDocument {
            ambient,
            surface: src,
            grid: Some(GridDoc { nu: 64, nv: 64 }),
            tolerances: None,
            provenance: None,
        },
    };
    let text = serde_json::to_string_pretty(&document).expect("documents serialize") + "\n";
    std::fs::write(&json_path, text).map_err(|e| CliError::io(&json_path, e))?;
    writeln!(out, "{}\n{}", a.output.display(), json_path.display())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(0)
}

fn load_and_verify(
    a: &CheckArgs,
) -> Result<(ImmersionSpec, pmc_helix::verify::ResidualReport), CliError> {
    let document: SurfaceDocument = doc::read_json(&a.document)?;
    let spec = document.spec(&base_dir(&a.document))?;
    let grid = document.probe_grid()?;
    let tol = document.tolerances(&spec, a.tol_scale)?;
    let report = verify(&spec, &grid, &tol)?;
    Ok((spec, report))
}

fn cmd_verify(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (_, report) = load_and_verify(a)?;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    write_out(&a.output, out, &text)?;
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn cmd_classify(a: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (spec, report) = load_and_verify(a)?;
    let cl = classify_surface(&spec, &report);
    let text = format!(
        "{}\n{}\n",
        cl.class,
        serde_json::to_string_pretty(&cl).expect("classifications serialize")
    );
    write_out(&a.output, out, &text)?;
    let failed = !report.all_pass()
        || matches!(
            cl.class,
            SurfaceClass::NotPmcHelix | SurfaceClass::Unclassified
        );
    Ok(if failed { 1 } else { 0 })
}

fn cmd_frenet(a: &FrenetArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let document: CurveDocument = doc::read_json(&a.curve)?;
    let curve = document.spec(&base_dir(&a.curve))?;
    let samples = a.samples.or(document.samples).unwrap_or(64);
    if samples == 0 {
        return Err(CliError::param("samples must be positive".into()));
    }
    let rows = sample_parameters(&curve, samples)
        .into_iter()
        .map(|s| Ok((s, frenet_apparatus(&curve, s, 4)?.curvatures)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let width = rows.iter().map(|(_, k)| k.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["s".to_string()];
    head.extend((1..=width).map(|i| format!("kappa{i}")));
    let csv_err = |e: csv::Error| CliError::param(e.to_string());
    w.write_record(&head).map_err(csv_err)?;
    for (s, ks) in rows {
        let mut rec = vec![num(s)];
        rec.extend((0..width).map(|i| ks.get(i).map(|k| num(*k)).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::param(e.to_string()))?;
    write_out(
        &a.output,
        out,
        &String::from_utf8(bytes).expect("csv is utf-8"),
    )?;
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    doc::check_scale(a.tol_scale)?;
    if a.grid == 0 {
        return Err(CliError::param("--grid must be positive".into()));
    }
    let (kind, n, points) = a.params.expand()?;
    let names: Vec<String> = points
        .first()
        .map(|(_, m)| m.keys().cloned().collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["kind".to_string(), "c".to_string(), "n".to_string()];
    head.extend(names.iter().cloned());
    head.extend(["label", "check", "max", "mean", "tol", "pass", "status"].map(String::from));
    let csv_err = |e: csv::Error| CliError::param(e.to_string());
    w.write_record(&head).map_err(csv_err)?;
    let grid = ProbeGrid {
        nu: a.grid,
        nv: a.grid,
    };
    let mut code = 0;
    for (c, params) in points {
        let mut lead = vec![kind.clone(), num(c), n.to_string()];
        lead.extend(names.iter().map(|k| num(params[k])));
        let document = SurfaceDocument {
            ambient: AmbientDoc { c, n },
            surface: SurfaceSource {
                kind: Some(kind.clone()),
                params,
                grid_csv: None,
            },
            grid: None,
            tolerances: None,
            provenance: None,
        };
        let outcome = document.spec(Path::new(".")).and_then(|spec| {
            let tol = document.tolerances(&spec, a.tol_scale)?;
            Ok((verify(&spec, &grid, &tol)?, spec))
        });
        match outcome {
            Ok((report, spec)) => {
                let label = classify_surface(&spec, &report).class.to_string();
                if !report.all_pass() {
                    code = 1;
                }
                for (name, e) in &report.checks {
                    let mut rec = lead.clone();
                    rec.extend([
                        label.clone(),
                        name.clone(),
                        num(e.max),
                        num(e.mean),
                        num(e.tol),
                        e.pass.to_string(),
                        serde_json::to_value(e.status)
                            .expect("status serializes")
                            .as_str()
                            .unwrap_or("")
                            .to_string(),
                    ]);
                    w.write_record(&rec).map_err(csv_err)?;
                }
            }
            Err(err) => {
                code = 1;
                let mut rec = lead.clone();
                rec.extend([
                    "error".to_string(),
                    "build".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "false".to_string(),
                    err.to_string(),
                ]);
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::param(e.to_string()))?;
    write_out(
        &a.output,
        out,
        &String::from_utf8(bytes).expect("csv is utf-8"),
    )?;
    Ok(code)
}

/// Runs the command line `argv` (including the program name), writing
/// results to `out` and diagnostics to `err`; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Frenet(a) => cmd_frenet(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}
