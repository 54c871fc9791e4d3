//! Command-line front end: the configuration file format, reports, exit
//! statuses and the `solve`, `analyze`, `oracle`, `signs` and `catalog`
//! subcommands. The binary only forwards its arguments to [`run`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value, json};
use sha2::{Digest, Sha256};

use crate::config::{self, CentralConfiguration, ConfigurationMatrix, MassVector, DEFAULT_RANK_TOL};
use crate::dziobek;
use crate::error::{Error, Result};
use crate::geometry;
use crate::hessian;
use crate::linalg;
use crate::oracles;
use crate::solver::{self, MultistartOptions, SeedShape, SolveOptions};
use crate::wintner_conley;

/// Default relative residual accepted by `analyze`.
pub const ANALYZE_TOL: f64 = 1e-10;
/// Inequalities may fail by this much, relative to `‖Z‖∞`.
const INEQUALITY_TOL: f64 = 1e-10;
const DEFAULT_STARTS: usize = 50;

/// A configuration with masses, stored as pretty-printed JSON. Numbers are
/// written in shortest round-trip form, so a save/load cycle is lossless.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub masses: Vec<f64>,
    /// One position per body; may be empty for `solve` input.
    #[serde(default)]
    pub positions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    fn validate(&self) -> Result<()> {
        let n = self.masses.len();
        if n == 0 {
            return Err(Error::Parse("`masses` is empty".into()));
        }
        if let Some(bad) = self.masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Parse(format!("mass {bad} is not positive")));
        }
        if !self.positions.is_empty() {
            if self.positions.len() != n {
                return Err(Error::Parse(format!("{} positions for {n} masses", self.positions.len())));
            }
            let p = self.positions[0].len();
            if p == 0 || self.positions.iter().any(|x| x.len() != p) {
                return Err(Error::Parse("positions must share one nonzero dimension".into()));
            }
            if self.positions.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Parse("positions must be finite".into()));
            }
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Parse(format!("lambda {l} is not positive")));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::Parse(format!("{} labels for {n} masses", labels.len())));
            }
        }
        Ok(())
    }

    /// Parse a file and return it with the SHA-256 digest of its bytes.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let bytes = fs::read(path)?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Ok((Self::parse(&text)?, hex::encode(Sha256::digest(&bytes))))
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_pretty())?;
        Ok(())
    }

    pub fn mass_vector(&self) -> Result<MassVector> {
        MassVector::new(self.masses.clone())
    }

    pub fn configuration(&self) -> Result<ConfigurationMatrix> {
        if self.positions.is_empty() {
            return Err(Error::Parse("file has no positions".into()));
        }
        ConfigurationMatrix::from_positions(&self.positions)
    }

    pub fn from_central(cc: &CentralConfiguration, labels: Option<Vec<String>>) -> Self {
        Self { masses: cc.masses.as_slice().to_vec(), positions: cc.config.positions(), lambda: Some(cc.lambda), labels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Numerical = 2,
    Violation = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Exit status for an error that aborted a command.
pub fn error_status(e: &Error) -> ExitStatus {
    match e {
        Error::Parse(_)
        | Error::Io(_)
        | Error::UnknownOracle(_)
        | Error::UnknownSeed(_)
        | Error::InvalidMasses(_)
        | Error::Shape(_)
        | Error::Collision { .. } => ExitStatus::Usage,
        Error::InequalityViolation(_) => ExitStatus::Violation,
        _ => ExitStatus::Numerical,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Result of one command. Apart from `wall_time_s`, the serialized report is
/// a function of the command line and the input bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub results: Map<String, Value>,
    pub wall_time_s: f64,
    /// Exit status forced by the command, e.g. a numerical failure.
    #[serde(skip)]
    pub forced_status: Option<ExitStatus>,
}

impl Report {
    fn new(command: Vec<String>) -> Self {
        Self { command, input_digest: None, seed: None, checks: Vec::new(), warnings: Vec::new(), results: Map::new(), wall_time_s: 0.0, forced_status: None }
    }

    fn check(&mut self, name: &str, passed: bool, value: Option<f64>, detail: Option<String>) {
        self.checks.push(Check { name: name.into(), passed, value, detail });
    }

    fn put<T: Serialize>(&mut self, key: &str, value: T) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("report data serializes"));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn status(&self) -> ExitStatus {
        match self.forced_status {
            Some(s) => s,
            None if self.all_passed() => ExitStatus::Success,
            None => ExitStatus::Violation,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "central-configs", version, about = "Solve and analyze central configurations of the N-body problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find central configurations for the masses in a file.
    Solve {
        input: PathBuf,
        /// Dimension of the search space.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of random starts (default: start from the file positions, or 50 if there are none).
        #[arg(long)]
        starts: Option<usize>,
        /// Start from a catalog shape instead: square-center, regular-polygon, collinear, trapezoid.
        #[arg(long = "seed-shape")]
        seed_shape: Option<String>,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        /// Relative residual tolerance.
        #[arg(long, default_value_t = solver::DEFAULT_TOL)]
        tol: f64,
        /// Directory for one configuration file per similarity class.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnose a configuration: centrality, ranks, inequalities, spectra, Dziobek structure.
    Analyze {
        input: PathBuf,
        /// Relative residual accepted as central.
        #[arg(long, default_value_t = ANALYZE_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sampling oracle for a sign-pattern impossibility: 5.1, 5.2, 5.3 or 5.4.
    Oracle {
        name: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Barycentric sign table of a planar 5-body configuration.
    Signs {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the reference sign tables and the seed shapes.
    Catalog {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn out(&self) -> Option<&Path> {
        match self {
            Command::Solve { .. } => None,
            Command::Analyze { out, .. }
            | Command::Oracle { out, .. }
            | Command::Signs { out, .. }
            | Command::Catalog { out, .. } => out.as_deref(),
        }
    }
}

/// Parse arguments, run the command, write the report and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Usage.code() } else { ExitStatus::Success.code() };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let started = Instant::now();
    match execute(&cli.command, echo) {
        Ok(mut report) => {
            report.wall_time_s = started.elapsed().as_secs_f64();
            let text = report.to_json();
            let written = match cli.command.out() {
                Some(path) => fs::write(path, &text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitStatus::Usage.code();
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {}{}", c.name, c.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default());
            }
            report.status().code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            error_status(&e).code()
        }
    }
}

/// Run a parsed command and build its report.
pub fn execute(command: &Command, echo: Vec<String>) -> Result<Report> {
    let mut report = Report::new(echo);
    match command {
        Command::Solve { input, dim, starts, seed_shape, rng, tol, out } => {
            cmd_solve(&mut report, input, *dim, *starts, seed_shape.as_deref(), *rng, *tol, out.as_deref())?
        }
        Command::Analyze { input, tol, .. } => cmd_analyze(&mut report, input, *tol)?,
        Command::Oracle { name, samples, rng, .. } => cmd_oracle(&mut report, name, *samples, *rng)?,
        Command::Signs { input, .. } => cmd_signs(&mut report, input)?,
        Command::Catalog { dim, .. } => cmd_catalog(&mut report, *dim)?,
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    report: &mut Report,
    input: &Path,
    dim: usize,
    starts: Option<usize>,
    seed_shape: Option<&str>,
    rng: u64,
    tol: f64,
    out: Option<&Path>,
) -> Result<()> {
    if dim == 0 {
        return Err(Error::Parse("--dim must be positive".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Parse(format!("--tol {tol} must be positive")));
    }
    let (file, digest) = ConfigFile::load(input)?;
    report.input_digest = Some(digest);
    report.seed = Some(rng);
    let masses = file.mass_vector()?;
    let n = masses.len();
    let solve_opts = SolveOptions { tol, dimension: Some(dim), ..SolveOptions::default() };

    let mut classes: Vec<(CentralConfiguration, usize)> = Vec::new();
    let mut failures = Map::new();
    if let Some(shape) = seed_shape {
        let seed = solver::seed_catalog(shape.parse::<SeedShape>()?, n, dim)?;
        classes.extend(single_solve(&seed, &masses, &solve_opts, &mut failures));
    } else if starts.is_none() && !file.positions.is_empty() {
        let seed = file.configuration()?;
        classes.extend(single_solve(&seed, &masses, &solve_opts, &mut failures));
    } else {
        let opts = MultistartOptions { starts: starts.unwrap_or(DEFAULT_STARTS), seed: rng, ambient_dim: dim, solve: solve_opts };
        let ms = solver::multistart(&masses, &opts);
        failures.insert("collisions".into(), json!(ms.collisions));
        failures.insert("nonconverged".into(), json!(ms.nonconverged));
        classes.extend(ms.classes.into_iter().map(|c| (c.representative, c.hits)));
    }

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut listed = Vec::new();
    for (k, (cc, hits)) in classes.iter().enumerate() {
        let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
        let ranks = wintner_conley::rank_report(&w, &cc.config, DEFAULT_RANK_TOL);
        let mut entry = json!({
            "class": k,
            "hits": hits,
            "lambda": cc.lambda,
            "residual": cc.residual,
            "dimension": cc.dimension(),
            "rank_zhat": ranks.rank_zhat,
            "signature": solver::similarity_signature(&cc.config),
        });
        if let Some(dir) = out {
            let path = dir.join(format!("class-{k:03}.json"));
            ConfigFile::from_central(cc, file.labels.clone()).save(&path)?;
            entry["file"] = json!(path.to_string_lossy());
        }
        listed.push(entry);
    }
    report.put("classes", listed);
    report.put("failures", failures);
    report.check("found_central_configuration", !classes.is_empty(), Some(classes.len() as f64), None);
    if classes.is_empty() {
        report.forced_status = Some(ExitStatus::Numerical);
    }
    Ok(())
}

fn single_solve(
    seed: &ConfigurationMatrix,
    masses: &MassVector,
    opts: &SolveOptions,
    failures: &mut Map<String, Value>,
) -> Option<(CentralConfiguration, usize)> {
    match solver::solve(seed, masses, opts).and_then(|out| {
        if out.converged {
            out.certify(masses)
        } else {
            Err(Error::NotCentral { residual: out.residual() })
        }
    }) {
        Ok(cc) => Some((cc, 1)),
        Err(e) => {
            failures.insert("error".into(), json!(e.to_string()));
            None
        }
    }
}

/// Vertical axis for a spectrum: a direction orthogonal to the span if the
/// ambient space has one, otherwise a new coordinate.
fn with_vertical_axis(cc: &CentralConfiguration) -> Result<(CentralConfiguration, DVector<f64>)> {
    let vertical = hessian::vertical_directions(&cc.config, &cc.masses, DEFAULT_RANK_TOL);
    if vertical.ncols() > 0 {
        return Ok((cc.clone(), vertical.column(0).into_owned()));
    }
    let p = cc.config.dim();
    let lifted = cc.embed(p + 1)?;
    let mut axis = DVector::zeros(p + 1);
    axis[p] = 1.0;
    Ok((lifted, axis))
}

fn cmd_analyze(report: &mut Report, input: &Path, tol: f64) -> Result<()> {
    let (file, digest) = ConfigFile::load(input)?;
    report.input_digest = Some(digest);
    let masses = file.mass_vector()?;
    let raw = file.configuration()?;
    if raw.len() != masses.len() {
        return Err(Error::Parse("positions and masses disagree in length".into()));
    }
    let (config, lambda, rescaled) = match file.lambda {
        Some(l) => (raw, l, false),
        None => (config::normalize_multiplier(&raw, &masses), masses.total(), true),
    };
    let config = config::recenter(&config, &masses);
    report.put("normalization", json!({ "lambda": lambda, "lambda_over_m": lambda / masses.total(), "rescaled_to_total_mass": rescaled }));

    let verdict = wintner_conley::is_central(&config, &masses, lambda, tol);
    report.put("centrality", verdict);
    report.check("central", verdict.central, Some(verdict.relative_residual), None);
    if !verdict.central {
        report.warnings.push(format!(
            "configuration is not central (relative residual {:e} > {tol:e}); properties below are not expected to hold",
            verdict.relative_residual
        ));
    }
    let cc = CentralConfiguration { config, masses, lambda, residual: verdict.relative_residual };
    let n = cc.len();
    let dimension = cc.dimension();
    report.put("dimension", dimension);

    let w = wintner_conley::shifted_matrix(&cc.config, &cc.masses, cc.lambda);
    let ranks = wintner_conley::rank_report(&w, &cc.config, DEFAULT_RANK_TOL);
    report.put("rank", &ranks);

    // theorem-backed checks only count on central input
    let central = verdict.central;
    let property = |report: &mut Report, name: &str, ok: bool, value: Option<f64>, detail: Option<String>| {
        if central {
            report.check(name, ok, value, detail);
        } else {
            report.warnings.push(format!("{name}: {}", if ok { "holds" } else { "fails" }));
        }
    };

    match wintner_conley::trace_inequality_check(&w, INEQUALITY_TOL) {
        Ok(t) => property(report, "trace_nonnegative", true, Some(t), None),
        Err(e) => property(report, "trace_nonnegative", false, Some(w.trace()), Some(e.to_string())),
    }
    match wintner_conley::pairwise_inequality_check(&w, INEQUALITY_TOL) {
        Ok(p) => {
            let expected = n as f64 * w.trace();
            // relative to the unshifted matrix: Ž itself vanishes on simplices
            let gap = (p.sum - expected).abs() / (n as f64 * linalg::max_abs(w.z())).max(f64::MIN_POSITIVE);
            property(report, "pairwise_inequalities", true, Some(p.min_slack), None);
            property(report, "pair_sum_identity", gap <= 1e-10, Some(gap), None);
            report.put("pairwise", p);
        }
        Err(e) => property(report, "pairwise_inequalities", false, None, Some(e.to_string())),
    }

    if n >= 2 {
        let (lifted, axis) = with_vertical_axis(&cc)?;
        match hessian::vertical_spectrum(&lifted, &axis) {
            Ok(spec) => {
                if dimension == 2 && n >= 4 {
                    property(report, "planar_vertical_instability", spec.negative >= 1, Some(spec.negative as f64), None);
                }
                report.put("vertical_spectrum", spec);
            }
            Err(e) => report.warnings.push(format!("vertical spectrum unavailable: {e}")),
        }
        report.put("degeneracy", hessian::degeneracy_detect(&cc, DEFAULT_RANK_TOL));
    }

    if ranks.rank_zhat == 1 {
        analyze_dziobek(report, &cc, central)?;
    }
    if n == 5 {
        let probe = dziobek::flat_dziobek_probe(&cc, DEFAULT_RANK_TOL);
        property(report, "no_flat_dziobek", !probe.flat_dziobek, probe.smallest_nonzero_sv, None);
        report.put("flat_probe", probe);
    }
    Ok(())
}

fn analyze_dziobek(report: &mut Report, cc: &CentralConfiguration, central: bool) -> Result<()> {
    let dv = match dziobek::extract_dziobek(cc, DEFAULT_RANK_TOL) {
        Ok(dv) => dv,
        Err(e) => {
            report.warnings.push(format!("Dziobek extraction failed: {e}"));
            return Ok(());
        }
    };
    let residual = dziobek::verify_dziobek_relations(&cc.config, &cc.masses, &dv);
    if central {
        report.check("dziobek_relations", residual.within(1e-9), Some(residual.relative), None);
    }
    let mut section = json!({ "vector": &dv, "residual": &residual });
    let vanishing = dv.vanishing_bodies(1e-8);
    if let [k] = vanishing[..] {
        match dziobek::vanishing_delta_consequences(cc, &dv, k, 1e-8) {
            Ok(v) => {
                if central {
                    report.check("vanishing_delta_equidistant", v.distance_deviation <= 1e-8, Some(v.distance_deviation), None);
                }
                if cc.len() == 5 && cc.dimension() == 3 {
                    if let Ok(circle) = dziobek::cocircularity(&v.reduced.config) {
                        let r = v.expected_distance;
                        let h = (r * r - circle.radius * circle.radius).max(0.0).sqrt();
                        let (lo, hi) = (r * 0.5f64.sqrt(), r * 0.75f64.sqrt());
                        if central {
                            report.check("apex_height_bounds", lo < h && h < hi, Some((h - lo).min(hi - h) / r), None);
                        }
                        section["apex"] = json!({ "body": k, "height": h, "apex_distance": r, "lower": lo, "upper": hi, "base_circle": circle });
                    }
                }
                section["vanishing"] = serde_json::to_value(&v).expect("serializes");
            }
            Err(e) => report.warnings.push(format!("vanishing coordinate analysis failed: {e}")),
        }
    }
    report.put("dziobek", section);
    Ok(())
}

fn cmd_oracle(report: &mut Report, name: &str, samples: usize, rng: u64) -> Result<()> {
    let result = oracles::run_oracle(name, samples, rng)?;
    report.seed = Some(rng);
    report.check("no_counterexamples", result.counterexamples == 0, Some(result.counterexamples as f64), None);
    report.check("per_instance_assertions", result.violations == 0, Some(result.violations as f64), None);
    if let Some(c) = &result.companion {
        report.check("companion_assertions", c.violations == 0, Some(c.violations as f64), None);
    }
    for case in &result.cases {
        report.check(
            &format!("case_{}_bounds", case.order),
            case.bound_violations == 0 && case.angle_violations == 0,
            Some(case.max_ratio),
            Some(format!("{} instances, bound {}", case.count, case.bound)),
        );
    }
    if result.non_vacuity_per_1000 < 1.0 {
        report.warnings.push(format!(
            "fewer than one allowed feasible instance per 1000 samples ({})",
            result.non_vacuity_per_1000
        ));
    }
    report.put("oracle", result);
    Ok(())
}

fn cmd_signs(report: &mut Report, input: &Path) -> Result<()> {
    let (file, digest) = ConfigFile::load(input)?;
    report.input_digest = Some(digest);
    let config = file.configuration()?;
    let sweep = geometry::sign_sweep(&config)?;
    let table: Vec<String> = sweep.rows.iter().map(|r| r.to_string()).collect();
    let direct = sweep.matching_table();
    let relabeled = geometry::match_up_to_relabeling(&config)?;
    report.put("table", &table);
    report.put("crossings", &sweep.crossings);
    report.put("matching_table", direct);
    report.put("match_up_to_relabeling", relabeled.as_ref().map(|(name, perm)| json!({ "table": name, "permutation": perm })));
    if let Some(name) = direct {
        report.check("catalog_match", true, None, Some(name.to_string()));
    } else if relabeled.is_none() {
        report.warnings.push("sweep matches no catalog table, even after relabeling".into());
    }
    Ok(())
}

fn cmd_catalog(report: &mut Report, dim: usize) -> Result<()> {
    report.put("tables", geometry::table_catalog());
    let shapes = [
        (SeedShape::SquareCenter, 5),
        (SeedShape::RegularPolygon, 5),
        (SeedShape::Collinear, 5),
        (SeedShape::Trapezoid, 4),
    ];
    let mut seeds = Vec::new();
    for (shape, n) in shapes {
        let c = solver::seed_catalog(shape, n, dim.max(1))
            .or_else(|_| solver::seed_catalog(shape, n, 2))?;
        seeds.push(json!({ "shape": shape, "n": n, "positions": c.positions() }));
    }
    report.put("seed_shapes", seeds);
    let reps: Vec<Value> = geometry::table_representatives()
        .into_iter()
        .map(|(name, c)| json!({ "table": name, "positions": c.positions() }))
        .collect();
    report.put("table_representatives", reps);
    Ok(())
}
