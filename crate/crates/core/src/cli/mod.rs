//! Batch front end: parses arguments, runs one computation and writes its
//! artifacts together with a manifest that can replay the run.

mod args;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use args::*;

use crate::entropy::{
    covering_number, delta_packing_system, inner_entropy, packing_number, sigma_infty, sigma_line_exact_curve,
    sigma_selfsimilar_curve, write_curves_csv, Bound, EntropyCurve, EntropyKind, MixedParams,
};
use crate::error::{Error, Result};
use crate::fields::{sample, Kernel};
use crate::format::sig17;
use crate::geometry::PointCloud;
use crate::ifs::{
    builtin, cell_anchors, cover_with_min_cells, enumerate_level_words, load_system, SelfSimilarSystem, SystemSpec,
    DEFAULT_WORD_CAP,
};
use crate::smalldev::{
    fit_rate, geometric_grid, simulate_norms, system_prediction, system_sites, verify_system, Quadrature,
    SmallDevCurve, VerifyBudget, Window,
};

/// Everything a command produces before it is written out.
#[derive(Debug, Default)]
pub struct Outputs {
    /// Human-readable `key = value` lines for standard output.
    pub lines: Vec<String>,
    pub report: Option<serde_json::Value>,
    pub curve_csv: Option<Vec<u8>>,
    /// Additional files as (suffix, contents).
    pub extra: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

/// Configuration echo written next to every set of outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: Command,
    pub threads: Option<usize>,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    pub outputs: Vec<PathBuf>,
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

/// A config file when the path exists, otherwise a built-in name.
pub fn resolve_system(arg: &str) -> Result<SelfSimilarSystem> {
    let path = Path::new(arg);
    if path.exists() {
        return load_system(path);
    }
    if builtin::NAMES.contains(&arg) {
        return builtin::by_name(arg);
    }
    if arg.contains('/') || arg.contains('.') {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        });
    }
    builtin::by_name(arg)
}

fn default_ns(system: &SelfSimilarSystem) -> Vec<usize> {
    let m = system.len();
    (1..=8u32).map(|p| m.pow(p)).collect()
}

fn params_for(system: &SelfSimilarSystem, hq: &HqArgs) -> Result<MixedParams> {
    MixedParams::new(hq.h, hq.q, system.dim())
}

fn curve_lines(curve: &EntropyCurve, lines: &mut Vec<String>) {
    for (n, v) in &curve.points {
        lines.push(format!("{}({n}) = {}", curve.kind.as_str(), sig17(*v)));
    }
    if let Some(fit) = curve.fit {
        lines.push(format!("slope = {}", sig17(-fit.exponent)));
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn parse_window(text: &str) -> Result<Window> {
    if text.trim() == "adaptive" {
        return Ok(Window::Adaptive { min_count: 10, p_hi: 0.005 });
    }
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::invalid(format!("window '{text}': expected 'adaptive' or lo:hi"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad());
    }
    Ok(Window::Fixed { lo, hi })
}

fn parse_eps_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::invalid(format!("eps range '{text}': expected lo:hi:k"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    geometric_grid(lo, hi, k)
}

fn parse_grid(text: &str) -> Result<PointCloud> {
    let bad = || Error::invalid(format!("grid '{text}': expected N:k"));
    let (n, k) = text.split_once(':').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if n == 0 || n > 3 || k < 2 {
        return Err(Error::invalid(format!("grid '{text}': need 1 <= N <= 3 and k >= 2")));
    }
    if k.pow(n as u32) > 100_000 {
        return Err(Error::invalid(format!("grid '{text}' has more than 100000 points")));
    }
    Ok(PointCloud::unit_grid(n, k))
}

/// Cell anchors of the first word cover with at least `atoms` cells.
fn anchors(system: &SelfSimilarSystem, h: f64, q: f64, atoms: usize) -> Result<crate::geometry::WeightedPoints> {
    let (_, words) = cover_with_min_cells(system, h, q, atoms, DEFAULT_WORD_CAP)?;
    cell_anchors(system, &words)
}

fn run_dimension(a: &SystemArg) -> Result<Outputs> {
    let system = resolve_system(&a.system)?;
    let d = system.similarity_dimension()?;
    Ok(Outputs {
        lines: vec![format!("D = {}", sig17(d.value)), format!("residual = {}", sig17(d.residual))],
        report: Some(json!({ "dimension": d.value, "residual": d.residual })),
        ..Outputs::default()
    })
}

fn run_gamma(a: &GammaArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let g = system.gamma_exponent(a.hq.h, a.hq.q)?;
    let d = system.similarity_dimension()?;
    Ok(Outputs {
        lines: vec![
            format!("gamma = {}", sig17(g.gamma)),
            format!("a = {}", sig17(g.rate)),
            format!("residual = {}", sig17(g.residual)),
            format!("D = {}", sig17(d.value)),
        ],
        report: Some(json!({
            "H": a.hq.h,
            "q": if a.hq.q.is_infinite() { json!("inf") } else { json!(a.hq.q) },
            "gamma": g.gamma,
            "a": g.rate,
            "residual": g.residual,
            "dimension": d.value,
            "hausdorff_weights": system.has_hausdorff_weights(1e-9),
        })),
        ..Outputs::default()
    })
}

fn run_words(a: &WordsArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    if !(a.s > 0.0) {
        return Err(Error::invalid("level s must be positive"));
    }
    let words = enumerate_level_words(&system, a.hq.h, a.hq.q, a.s, a.cap)?;
    let gamma = system.gamma_exponent(a.hq.h, a.hq.q)?.gamma;
    let ratio = words.len() as f64 / (gamma * a.s).exp();
    let csv = csv_bytes(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["word", "scale", "mass", "weight", "cost"])?;
        for word in &words {
            let label: Vec<String> = word.indices.iter().map(|i| i.to_string()).collect();
            w.write_record([label.join("."), sig17(word.scale), sig17(word.mass), sig17(word.weight), sig17(word.cost)])?;
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    })?;
    Ok(Outputs {
        lines: vec![
            format!("words = {}", words.len()),
            format!("gamma = {}", sig17(gamma)),
            format!("count_over_exp_gamma_s = {}", sig17(ratio)),
        ],
        report: Some(json!({ "s": a.s, "words": words.len(), "gamma": gamma, "count_over_exp_gamma_s": ratio })),
        extra: vec![("words.csv".into(), csv)],
        ..Outputs::default()
    })
}

fn run_sigma(a: &SigmaArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let params = params_for(&system, &a.hq)?;
    let ns = if a.n.is_empty() { default_ns(&system) } else { a.n.clone() };
    if ns.contains(&0) {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut curve = if a.exact_line {
        let atoms = anchors(&system, a.hq.h, a.hq.q, a.atoms)?.sorted_atoms()?;
        let n_max = *ns.iter().max().expect("non-empty");
        let values = sigma_line_exact_curve(&atoms, &params, n_max)?;
        EntropyCurve::new(EntropyKind::Sigma, params, Bound::Exact, ns.iter().map(|&n| (n, values[n - 1])).collect())
    } else {
        sigma_selfsimilar_curve(&system, &params, &ns)?
    };
    curve.fit_power_law();
    let mut lines = Vec::new();
    curve_lines(&curve, &mut lines);
    Ok(Outputs {
        lines,
        report: Some(serde_json::to_value(&curve)?),
        curve_csv: Some(csv_bytes(|b| curve.write_csv(b))?),
        ..Outputs::default()
    })
}

fn run_delta(a: &DeltaArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let params = params_for(&system, &a.hq)?;
    let ns = if a.n.is_empty() { default_ns(&system) } else { a.n.clone() };
    let mut res = delta_packing_system(&system, &params, &ns, a.atoms, a.depth)?;
    res.curve.fit_power_law();
    let mut lines = Vec::new();
    curve_lines(&res.curve, &mut lines);
    Ok(Outputs {
        lines,
        report: Some(json!({ "curve": res.curve, "depths": res.depths, "warnings": res.warnings })),
        curve_csv: Some(csv_bytes(|b| res.curve.write_csv(b))?),
        warnings: res.warnings,
        ..Outputs::default()
    })
}

fn run_entropy(a: &EntropyArgs) -> Result<Outputs> {
    let cloud = match (&a.system, &a.grid) {
        (Some(s), None) => anchors(&resolve_system(s)?, a.h, 2.0, a.atoms)?.points,
        (None, Some(g)) => parse_grid(g)?,
        _ => return Err(Error::invalid("provide exactly one of --system or --grid")),
    };
    if a.eps.is_empty() && a.n.is_empty() {
        return Err(Error::invalid("provide --eps and/or --n"));
    }
    let mut lines = vec![format!("points = {}", cloud.len()), format!("diameter = {}", sig17(cloud.diameter()))];
    let mut table = Vec::new();
    for &eps in &a.eps {
        let cover = covering_number(&cloud, eps)?;
        let pack = packing_number(&cloud, eps)?;
        let cover_half = covering_number(&cloud, eps / 2.0)?;
        lines.push(format!("eps = {}: covering = {cover}, packing = {pack}, covering(eps/2) = {cover_half}", sig17(eps)));
        table.push(json!({ "eps": eps, "covering": cover, "packing": pack, "covering_half": cover_half }));
    }
    let params = MixedParams::new(a.h, f64::INFINITY, cloud.dim())?;
    let mut curves = Vec::new();
    if !a.n.is_empty() {
        let mut inner = Vec::new();
        let mut sig = Vec::new();
        for &n in &a.n {
            inner.push((n, inner_entropy(&cloud, n)?));
            sig.push((n, sigma_infty(&cloud, a.h, n)?));
        }
        curves.push(EntropyCurve::new(EntropyKind::InnerEntropy, params, Bound::Lower, inner));
        curves.push(EntropyCurve::new(EntropyKind::SigmaInfty, params, Bound::Upper, sig));
        for c in &curves {
            curve_lines(c, &mut lines);
        }
    }
    Ok(Outputs {
        lines,
        report: Some(json!({ "points": cloud.len(), "cardinalities": table, "curves": curves })),
        curve_csv: (!curves.is_empty()).then(|| csv_bytes(|b| write_curves_csv(&curves, b))).transpose()?,
        ..Outputs::default()
    })
}

fn kernel_of(f: &FieldArgs) -> Result<Kernel> {
    f.kernel.parse()
}

fn run_sample_field(a: &SampleFieldArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let kernel = kernel_of(&a.field)?;
    let (sites, quadrature) =
        system_sites(&system, kernel.hurst(), 2.0, a.field.min_cells, a.field.points_per_cell, a.field.seed)?;
    let batch = sample(&kernel, &sites.points, a.reps, a.field.seed)?;
    let samples = csv_bytes(|b| batch.write_csv(b))?;
    let sites_csv = csv_bytes(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["site_index".to_string()];
        header.extend((0..sites.points.dim()).map(|k| format!("x{k}")));
        header.push("mass".into());
        w.write_record(&header)?;
        for (i, (p, m)) in sites.points.iter().zip(&sites.masses).enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.iter().map(|x| sig17(*x)));
            row.push(sig17(*m));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Io { path: "<csv>".into(), source: e })?;
        Ok(())
    })?;
    Ok(Outputs {
        lines: vec![
            format!("sites = {}", sites.len()),
            format!("reps = {}", a.reps),
            format!("jitter_used = {}", sig17(batch.jitter_used)),
        ],
        report: Some(json!({
            "kernel": kernel, "quadrature": quadrature, "reps": a.reps,
            "seed": a.field.seed, "jitter_used": batch.jitter_used,
        })),
        extra: vec![("samples.csv".into(), samples), ("sites.csv".into(), sites_csv)],
        ..Outputs::default()
    })
}

fn run_smalldev(a: &SmalldevArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let kernel = kernel_of(&a.field)?;
    let grid = match (&a.eps_range, a.eps.is_empty()) {
        (Some(r), _) => parse_eps_range(r)?,
        (None, false) => a.eps.clone(),
        (None, true) => return Err(Error::invalid("provide --eps or --eps-range")),
    };
    if grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("eps values must be positive and finite"));
    }
    if a.reps < crate::smalldev::MIN_REPS {
        return Err(Error::invalid(format!("reps = {} below the minimum of {}", a.reps, crate::smalldev::MIN_REPS)));
    }
    let (sites, quadrature) =
        system_sites(&system, kernel.hurst(), a.q, a.field.min_cells, a.field.points_per_cell, a.field.seed)?;
    let (norms, jitter) = simulate_norms(&kernel, &sites, a.q, a.reps, a.field.seed)?;
    let mut curve = SmallDevCurve::from_sorted_norms(&norms, &grid, a.q, a.field.seed, Quadrature { ..quadrature });
    curve.jitter_used = jitter;
    let mut warnings = Vec::new();
    let fit = match fit_rate(&curve, a.fit_beta, None) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("no rate fit: {e}"));
            None
        }
    };
    let prediction = system_prediction(&system, &kernel, a.q).ok();
    let mut lines: Vec<String> = curve
        .points
        .iter()
        .map(|p| {
            format!(
                "eps = {}: p_hat = {}, phi = {}, flag = {}",
                sig17(p.eps),
                sig17(p.p_hat),
                p.phi.map(sig17).unwrap_or_else(|| "-".into()),
                p.flag.as_str()
            )
        })
        .collect();
    if let Some(f) = &fit {
        lines.push(format!("a_fit = {} +- {}", sig17(f.a), sig17(f.stderr_a)));
    }
    if let Some(p) = &prediction {
        lines.push(format!("a_pred = {}", sig17(p.a)));
    }
    Ok(Outputs {
        lines,
        report: Some(json!({ "curve": curve, "fit": fit, "prediction": prediction, "kernel": kernel })),
        curve_csv: Some(csv_bytes(|b| curve.write_csv(b))?),
        warnings,
        ..Outputs::default()
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Outputs> {
    let system = resolve_system(&a.system.system)?;
    let kernel = kernel_of(&a.field)?;
    let budget = VerifyBudget {
        min_cells: a.field.min_cells,
        points_per_cell: a.field.points_per_cell,
        reps: a.reps,
        window: parse_window(&a.window)?,
        grid_points: a.grid_points,
        tolerance: a.tolerance,
        fit_beta: a.fit_beta,
    };
    let report = verify_system(&system, &kernel, a.q, &budget, a.field.seed)?;
    let lines = vec![
        format!("verdict = {}", serde_json::to_value(report.verdict)?.as_str().unwrap_or("?")),
        format!("a_fit = {}", sig17(report.a_fit)),
        format!("stderr = {}", sig17(report.stderr)),
        format!("a_pred = {}", sig17(report.a_pred)),
        format!("rel_error = {}", sig17(report.rel_error)),
    ];
    Ok(Outputs {
        lines,
        curve_csv: Some(csv_bytes(|b| report.curve.write_csv(b))?),
        report: Some(serde_json::to_value(&report)?),
        ..Outputs::default()
    })
}

/// Runs one command (not `replay`) and collects its outputs.
pub fn execute(command: &Command) -> Result<Outputs> {
    match command {
        Command::Dimension(a) => run_dimension(a),
        Command::Gamma(a) => run_gamma(a),
        Command::Words(a) => run_words(a),
        Command::Sigma(a) => run_sigma(a),
        Command::Delta(a) => run_delta(a),
        Command::Entropy(a) => run_entropy(a),
        Command::SampleField(a) => run_sample_field(a),
        Command::Smalldev(a) => run_smalldev(a),
        Command::Verify(a) => run_verify(a),
        Command::Replay(_) => Err(Error::invalid("a manifest cannot record a replay")),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::Output { path: parent.to_path_buf(), source: e })?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::Output { path: path.to_path_buf(), source: e })
}

/// Writes the outputs under `prefix` and returns the written paths, manifest last.
fn write_outputs(
    prefix: &Path,
    command: &Command,
    threads: Option<usize>,
    outputs: &Outputs,
    started: Instant,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(report) = &outputs.report {
        let path = with_suffix(prefix, "report.json");
        let mut text = serde_json::to_string_pretty(report)?;
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        written.push(path);
    }
    if let Some(csv) = &outputs.curve_csv {
        let path = with_suffix(prefix, "curve.csv");
        write_file(&path, csv)?;
        written.push(path);
    }
    for (suffix, bytes) in &outputs.extra {
        let path = with_suffix(prefix, suffix);
        write_file(&path, bytes)?;
        written.push(path);
    }
    let system = command
        .system()
        .and_then(|s| resolve_system(s).ok())
        .map(|s| SystemSpec::from_system(&s));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: command.clone(),
        threads,
        out: prefix.to_path_buf(),
        system,
        outputs: written.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let path = with_suffix(prefix, "manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    written.push(path);
    Ok(written)
}

fn run_parsed(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    let (command, threads, out) = match cli.command {
        Command::Replay(r) => {
            let m = Manifest::load(&r.manifest)?;
            let out = cli.out.unwrap_or_else(|| with_suffix(&m.out, "replay"));
            (m.config, cli.threads.or(m.threads), Some(out))
        }
        other => (other, cli.threads, cli.out),
    };
    if threads == Some(0) {
        return Err(Error::invalid("--threads must be at least 1"));
    }
    let outputs = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Solver(format!("thread pool: {e}")))?
            .install(|| execute(&command))?,
        None => execute(&command)?,
    };
    for w in &outputs.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    for line in &outputs.lines {
        let _ = writeln!(stdout, "{line}");
    }
    if let Some(prefix) = out {
        for path in write_outputs(&prefix, &command, threads, &outputs, started)? {
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
    }
    Ok(())
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Entry point shared by the binary and the tests; returns the exit status
/// (0 success, 2 invalid input, 1 internal failure).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                | ErrorKind::MissingSubcommand => {
                    let given = args.get(1).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    let _ = writeln!(
                        stderr,
                        "error: unknown command '{given}'; valid commands: {}",
                        COMMANDS.join(", ")
                    );
                    2
                }
                _ => {
                    let text = e.to_string();
                    let head = text.split("Usage:").next().unwrap_or("invalid arguments");
                    let _ = writeln!(stderr, "{}", one_line(head));
                    2
                }
            };
        }
    };
    match run_parsed(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", one_line(&e.to_string()));
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}
