//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::contact::{b_coefficients, classify_contact_surface, contact_function, planar_contact_order};
use crate::cubic::{apolarity_residual, binary_cubic, blaschke_data, cubic_tensor_appendix, cubic_tensor_closed};
use crate::darboux::{
    darboux_at, darboux_directions_surface, darboux_locus_scan, is_generalized_darboux_with, Grid, ScanOptions,
    DEFAULT_THRESHOLD,
};
use crate::document::{
    b_json, class_json, contact_jet_json, cubic_json, darboux_json, frame_json, germ_json, poly_json, quadric_json,
    sha256_hex, write_scan_csv, GermDocument, Report, CONVENTION_NOTES,
};
use crate::error::{MkitError, Result};
use crate::moutard::{
    moutard_beta, moutard_pencil, moutard_quadric, osculating_conic, pencil_constructive, restrict_quadric,
    section_curve, section_germ, section_graph, SectionSpec,
};
use crate::normalform::{align_direction, normalize, HypersurfaceGerm};
use crate::scalar::{scalar_from_json, Backend, Rational, Scalar};
use crate::verify::{run_suite, Suite, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mkit",
    version,
    about = "Moutard hyperquadrics, cubic forms and Darboux directions of hypersurface germs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Germ document (JSON); standard input when omitted.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Arithmetic backend; defaults to the document's.
    #[arg(long, global = true)]
    pub backend: Option<Backend>,
    /// Truncation order.
    #[arg(long, global = true)]
    pub order: Option<u32>,
    /// Pencil parameter; defaults to the Moutard value.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Direction in germ coordinates, comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub direction: Option<String>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Attach convention notes to reports.
    #[arg(long, global = true, num_args = 0..=1, default_value_t = true, default_missing_value = "true",
          action = clap::ArgAction::Set)]
    pub typo_notes: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Recenter a global graph at a point and bring it to normal form.
    Normalize {
        /// Base point, comma separated; the origin when omitted.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Moutard pencil: closed form, constructive check, optional member.
    Pencil,
    /// Moutard parameter by both routes.
    Beta,
    /// Contact function against a pencil member and its coefficients.
    Contact,
    /// Cubic form by both routes, with apolarity.
    Cubic,
    /// Test a direction (the x1-axis by default); surfaces also get all roots.
    Darboux,
    /// E6/E7 contact type of a surface along a Darboux direction.
    Classify,
    /// Section by `x_s = lambda_s y` and the restricted Moutard quadric.
    Section {
        /// `s=value` pairs with 1-based `s` in `2..n`, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Darboux locus scan of a global graph over a grid.
    Scan {
        /// `lo:hi:steps` for every axis, or one triple per axis separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Sampled directions per point.
        #[arg(long, default_value_t = 64)]
        directions: usize,
        /// CSV table path; next to `--out` when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a randomized property suite (`all` runs every suite).
    Verify { suite: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Normalize { .. } => "normalize",
            Command::Pencil => "pencil",
            Command::Beta => "beta",
            Command::Contact => "contact",
            Command::Cubic => "cubic",
            Command::Darboux => "darboux",
            Command::Classify => "classify",
            Command::Section { .. } => "section",
            Command::Scan { .. } => "scan",
            Command::Verify { .. } => "verify",
        }
    }

    fn notes(&self) -> &'static [usize] {
        match self {
            Command::Classify => &[0, 1],
            Command::Contact => &[2],
            Command::Cubic => &[3],
            Command::Darboux => &[2, 3],
            _ => &[],
        }
    }
}

/// Exit status for a failed command.
pub fn exit_code(e: &MkitError) -> i32 {
    match e {
        MkitError::InternalMismatch(_) => EXIT_VERIFY_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Exit status of a verify run: 1 as soon as one suite found a counterexample.
pub fn verify_exit_status(reports: &[SuiteReport]) -> i32 {
    if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Parses `args` (program name first) and runs the command. The JSON report
/// goes to `--out` or `stdout`; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let command = cli.command.name();
    let mut report = Report {
        command: command.to_string(),
        input_digest: None,
        backend: None,
        results: Value::Null,
        warnings: Vec::new(),
        exit_status: EXIT_OK,
    };
    if cli.common.typo_notes {
        report.warnings.extend(cli.command.notes().iter().map(|&i| CONVENTION_NOTES[i].to_string()));
    }
    match execute(&cli, stdin, stderr, &mut report) {
        Ok(code) => report.exit_status = code,
        Err(e) => {
            let _ = writeln!(stderr, "mkit {command}: error: {e}");
            report.results = json!({"error": e.to_string()});
            report.exit_status = exit_code(&e);
        }
    }
    let text = report.to_json_string();
    let written = match &cli.common.out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| e.to_string()),
        None => writeln!(stdout, "{text}").map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "mkit {command}: cannot write report: {e}");
        return EXIT_USAGE;
    }
    report.exit_status
}

fn read_input(common: &Common, stdin: &mut dyn Read) -> Result<(String, String)> {
    let text = match &common.input {
        Some(p) => fs::read_to_string(p).map_err(|e| MkitError::InvalidInput(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            stdin.read_to_string(&mut s).map_err(|e| MkitError::InvalidInput(format!("stdin: {e}")))?;
            s
        }
    };
    let digest = sha256_hex(text.as_bytes());
    Ok((text, digest))
}

fn execute(cli: &Cli, stdin: &mut dyn Read, stderr: &mut dyn Write, report: &mut Report) -> Result<i32> {
    let common = &cli.common;
    if let Command::Verify { suite } = &cli.command {
        return cmd_verify(suite, common, stderr, report);
    }
    let (text, digest) = read_input(common, stdin)?;
    report.input_digest = Some(digest);
    let doc = GermDocument::parse(&text)?;
    let backend = common.backend.unwrap_or(doc.backend);
    report.backend = Some(backend);
    if let Command::Scan { grid, directions, csv } = &cli.command {
        report.results = cmd_scan(&doc, grid, *directions, csv.as_deref(), common, stderr)?;
        return Ok(EXIT_OK);
    }
    report.results = match backend {
        Backend::Exact => dispatch::<Rational>(&cli.command, &doc, common)?,
        Backend::Float => dispatch::<f64>(&cli.command, &doc, common)?,
    };
    Ok(EXIT_OK)
}

fn parse_scalar<S: Scalar>(s: &str) -> Result<S> {
    scalar_from_json(&Value::String(s.trim().to_string()))
}

fn parse_list<S: Scalar>(s: &str) -> Result<Vec<S>> {
    s.split(',').map(parse_scalar).collect()
}

fn beta_arg<S: Scalar>(common: &Common, germ: &HypersurfaceGerm<S>) -> Result<(S, bool)> {
    match &common.beta {
        Some(b) => Ok((parse_scalar(b)?, false)),
        None => Ok((moutard_beta(germ), true)),
    }
}

fn load_germ<S: Scalar>(doc: &GermDocument, common: &Common) -> Result<HypersurfaceGerm<S>> {
    let g: HypersurfaceGerm<S> = doc.germ()?;
    match common.order {
        Some(o) if o < g.order() => HypersurfaceGerm::with_signature(g.f().with_max_order(o), g.signature()),
        _ => Ok(g),
    }
}

fn dispatch<S: Scalar>(cmd: &Command, doc: &GermDocument, common: &Common) -> Result<Value> {
    if let Command::Normalize { point } = cmd {
        let f = doc.polynomial::<S>()?;
        let p = match point {
            Some(p) => parse_list::<S>(p)?,
            None => vec![S::zero(); doc.n],
        };
        let order = common.order.unwrap_or(doc.order.max(4));
        let (germ, frame) = normalize(&f, &p, order)?;
        return Ok(json!({
            "germ": germ_json(&germ),
            "frame": frame_json(&frame),
            "document": GermDocument::from_germ(&germ),
        }));
    }
    let germ = load_germ::<S>(doc, common)?;
    match cmd {
        Command::Pencil => {
            let pencil = moutard_pencil(&germ);
            let (constructive, beta_c) = pencil_constructive(&germ)?;
            let agree = constructive.base() == pencil.base() && beta_c == moutard_beta(&germ);
            if !agree && S::BACKEND == Backend::Exact {
                return Err(MkitError::InternalMismatch("constructive pencil differs from the closed form".into()));
            }
            let (beta, is_moutard) = beta_arg(common, &germ)?;
            Ok(json!({
                "germ": germ_json(&germ),
                "base": quadric_json(pencil.base()),
                "moutard_beta": moutard_beta(&germ).to_json(),
                "moutard_quadric": quadric_json(&moutard_quadric(&germ)),
                "constructive_agrees": agree,
                "member": {"beta": beta.to_json(), "is_moutard": is_moutard, "quadric": quadric_json(&pencil.member(&beta))},
            }))
        }
        Command::Beta => {
            let closed = moutard_beta(&germ);
            let (_, constructive) = pencil_constructive(&germ)?;
            Ok(json!({
                "beta": closed.to_json(),
                "constructive": constructive.to_json(),
                "agree": (closed - constructive).is_negligible(1e-9),
            }))
        }
        Command::Contact => {
            let (beta, is_moutard) = beta_arg(common, &germ)?;
            let order = common.order.unwrap_or(germ.order()).min(germ.order());
            let cj = contact_function(&germ, &moutard_pencil(&germ).member(&beta), order)?;
            let b = b_coefficients(&germ, &beta, &cj)?;
            Ok(json!({
                "beta": beta.to_json(),
                "is_moutard": is_moutard,
                "contact": contact_jet_json(&cj),
                "b": b_json(&b),
                "two_jet_vanishes": cj.two_jet_vanishes(1e-12),
            }))
        }
        Command::Cubic => {
            let bd = blaschke_data(&germ)?;
            let appendix = cubic_tensor_appendix(&germ)?;
            let closed = cubic_tensor_closed(&germ);
            let agree = appendix.approx_eq(&closed, 1e-9);
            if !agree && S::BACKEND == Backend::Exact {
                return Err(MkitError::InternalMismatch("cubic-form routes disagree".into()));
            }
            let residual = apolarity_residual(&closed, germ.signature())?;
            let binary = if germ.n() == 2 {
                Some(binary_cubic(&closed)?.iter().map(|v| v.to_json()).collect::<Vec<_>>())
            } else {
                None
            };
            Ok(json!({
                "phi0": bd.phi0.to_json(),
                "grad_phi": bd.grad_phi.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                "z": bd.z.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                "cubic_form": cubic_json(&closed),
                "routes_agree": agree,
                "apolarity_residual": residual.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                "binary_cubic": binary,
            }))
        }
        Command::Darboux => {
            let report = match &common.direction {
                Some(d) => darboux_at(&germ, &parse_list::<S>(d)?, common.threshold)?,
                None => is_generalized_darboux_with(&germ, common.threshold)?,
            };
            let surface = if germ.n() == 2 {
                Some(serde_json::to_value(darboux_directions_surface(&germ)?).expect("serializable"))
            } else {
                None
            };
            Ok(json!({"report": darboux_json(&report), "surface_directions": surface}))
        }
        Command::Classify => {
            let g = match &common.direction {
                Some(d) => align_direction(&germ, &parse_list::<S>(d)?)?.0,
                None => germ,
            };
            let (beta, is_moutard) = beta_arg(common, &g)?;
            let (class, reduced) = classify_contact_surface(&g, &beta)?;
            let mut v = class_json(&class, reduced.as_ref());
            v["beta"] = beta.to_json();
            v["is_moutard"] = json!(is_moutard);
            Ok(v)
        }
        Command::Section { lambda } => cmd_section(&germ, lambda),
        Command::Normalize { .. } | Command::Scan { .. } | Command::Verify { .. } => unreachable!("handled earlier"),
    }
}

fn cmd_section<S: Scalar>(germ: &HypersurfaceGerm<S>, lambda: &str) -> Result<Value> {
    let n = germ.n();
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for part in lambda.split(',').filter(|p| !p.trim().is_empty()) {
        let (i, v) = part.split_once('=').ok_or_else(|| MkitError::Parse(format!("expected s=value in `{part}`")))?;
        let i: usize = i.trim().parse().map_err(|_| MkitError::Parse(format!("bad index in `{part}`")))?;
        if i < 2 {
            return Err(MkitError::InvalidInput(format!("section index {i} is outside 2..{n}")));
        }
        indices.push(i - 1);
        values.push(parse_scalar::<S>(v)?);
    }
    let spec = SectionSpec::new(n, indices, values)?;
    let restricted = restrict_quadric(&moutard_quadric(germ), &spec)?;
    let sec = section_germ(germ, &spec)?;
    let intrinsic = moutard_quadric(&sec);
    let agree = restricted.poly().approx_eq(intrinsic.poly(), 1e-9);
    if !agree && S::BACKEND == Backend::Exact {
        return Err(MkitError::InternalMismatch("restricted Moutard quadric differs from the section's".into()));
    }
    let mut out = json!({
        "kept": spec.kept(n).iter().map(|i| i + 1).collect::<Vec<_>>(),
        "section_germ": germ_json(&sec),
        "restricted_quadric": quadric_json(&restricted),
        "section_moutard_quadric": quadric_json(&intrinsic),
        "agree": agree,
    });
    if spec.indices.len() + 1 == n {
        let lam: Vec<S> = (1..n).map(|i| spec.lambda_of(i).expect("all fixed").clone()).collect();
        let curve = section_curve(germ, &lam)?;
        let conic = osculating_conic(&curve)?;
        let graph = section_graph(germ, &lam, 4)?;
        let mq = moutard_quadric(germ).section_graph(&lam, 4)?;
        out["curve"] = json!({
            "a2": curve.a2().to_json(), "a3": curve.a3().to_json(), "a4": curve.a4().to_json(),
            "osculating_conic": quadric_json(&conic),
            "graph": poly_json(&graph),
            "moutard_contact_order": planar_contact_order(&graph, &mq),
        });
    }
    Ok(out)
}

/// `lo:hi:steps` for all axes, or one triple per axis separated by `;`.
pub fn parse_grid(spec: &str, n: usize) -> Result<Grid> {
    let triples: Vec<&str> = spec.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    let parse = |t: &str| -> Result<(f64, f64, usize)> {
        let parts: Vec<&str> = t.split(':').collect();
        let bad = || MkitError::Parse(format!("grid axis `{t}` is not lo:hi:steps"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok((
            parts[0].trim().parse().map_err(|_| bad())?,
            parts[1].trim().parse().map_err(|_| bad())?,
            parts[2].trim().parse().map_err(|_| bad())?,
        ))
    };
    let axes: Vec<(f64, f64, usize)> = match triples.len() {
        1 => vec![parse(triples[0])?; n],
        k if k == n => triples.iter().map(|t| parse(t)).collect::<Result<_>>()?,
        k => return Err(MkitError::Dimension(format!("grid has {k} axes, expected 1 or {n}"))),
    };
    Grid::new(
        axes.iter().map(|a| a.0).collect(),
        axes.iter().map(|a| a.1).collect(),
        axes.iter().map(|a| a.2).collect(),
    )
}

fn cmd_scan(
    doc: &GermDocument,
    grid: &str,
    directions: usize,
    csv: Option<&Path>,
    common: &Common,
    stderr: &mut dyn Write,
) -> Result<Value> {
    let f = doc.polynomial::<f64>()?;
    let grid = parse_grid(grid, doc.n)?;
    let options = ScanOptions { threshold: common.threshold, directions, seed: common.seed, threads: None };
    let _ = writeln!(stderr, "mkit scan: {} points, {} sampled directions", grid.len(), directions);
    let scan = darboux_locus_scan(&f, &grid, &options)?;
    let _ = writeln!(
        stderr,
        "mkit scan: done, {} degenerate, {} passing",
        scan.summary.degenerate, scan.summary.passing_points
    );
    let csv_path = csv.map(Path::to_path_buf).or_else(|| common.out.as_ref().map(|o| o.with_extension("csv")));
    if let Some(p) = &csv_path {
        let file = fs::File::create(p).map_err(|e| MkitError::InvalidInput(format!("{}: {e}", p.display())))?;
        write_scan_csv(&scan, file)?;
    }
    let mut v = serde_json::to_value(&scan).expect("serializable");
    v["grid"] = serde_json::to_value(&grid).expect("serializable");
    v["passing_fraction"] = json!(scan.passing_fraction(common.threshold));
    v["csv"] = json!(csv_path.map(|p| p.display().to_string()));
    Ok(v)
}

fn cmd_verify(suite: &str, common: &Common, stderr: &mut dyn Write, report: &mut Report) -> Result<i32> {
    let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
    let mut results = Vec::new();
    for s in suites {
        let count = common.count.unwrap_or_else(|| s.default_count());
        let r = run_suite(s, common.seed, count)?;
        let _ = writeln!(
            stderr,
            "mkit verify: {s} {} ({} trials, {} checks)",
            if r.passed { "pass" } else { "FAIL" },
            count,
            r.checks
        );
        results.push(r);
    }
    let status = verify_exit_status(&results);
    report.backend = Some(Backend::Exact);
    report.results = json!({"passed": status == EXIT_OK, "suites": results});
    Ok(status)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], input: &str) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["mkit"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    const PARABOLOID: &str = r#"{"n": 2, "order": 4, "backend": "exact",
        "coefficients": [{"index": [2, 0], "value": "1/2"}, {"index": [0, 2], "value": "1/2"}]}"#;

    #[test]
    fn normalize_paraboloid() {
        let (code, out, _) = call(&["normalize"], PARABOLOID);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["results"]["frame"]["identity"], json!(true));
        assert_eq!(v["results"]["germ"]["signature"], json!([1, 1]));
        assert_eq!(v["exit_status"], json!(0));
    }

    #[test]
    fn degenerate_point_exits_2() {
        let doc = r#"{"n": 2, "order": 4, "backend": "exact",
            "coefficients": [{"index": [2, 0], "value": "1/2"}, {"index": [0, 3], "value": "1"}]}"#;
        let (code, out, err) = call(&["normalize"], doc);
        assert_eq!(code, 2);
        assert!(err.contains("degenerate point"));
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["exit_status"], json!(2));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["verify", "bogus"], "").0, 2);
        assert_eq!(call(&["frobnicate"], "").0, 2);
        assert_eq!(call(&["beta", "--backend", "quad"], PARABOLOID).0, 2);
        assert_eq!(call(&["beta"], "{not json").0, 2);
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1:1:3", 2).unwrap();
        assert_eq!(g.len(), 9);
        let g = parse_grid("0:1:2;-1:1:5", 2).unwrap();
        assert_eq!(g.steps, vec![2, 5]);
        assert!(parse_grid("0:1", 2).is_err());
        assert!(parse_grid("0:1:2;0:1:2;0:1:2", 2).is_err());
    }
}
