//! Command-line driver: loads a problem file, runs one pipeline stage and
//! renders the outcome as text and as a JSON document.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use radcone::solver::{constant_state, multi_start, solve, Operator, SolutionReport, SolveSettings, MIN_NODES};
use radcone::{
    certify_none, certify_one, certify_two, parse_spec, CertificateReport, CertifyMode, ConstantsReport, Error,
    ProblemSpec, Verdict,
};
use serde::Serialize;

mod json;

pub use json::{to_json_string, SignificantDigits};

pub const TOOL: &str = "radcone";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Relative tolerance for the stored reference values of the bundled example.
pub const REFERENCE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "radcone", version, about = "Cone constants, certificates and solutions for coupled radial systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Cone constants C_i, M_i with every intermediate integral.
    Constants(#[command(flatten)] Flags),
    /// Check the inequalities of an existence or nonexistence theorem.
    Certify(#[command(flatten)] Flags),
    /// Solve the reduced integral system by fixed-point iteration.
    Solve(#[command(flatten)] Flags),
    /// Run the bundled example end to end and compare with its known constants.
    Example(#[command(flatten)] Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    One,
    Two,
    NoneSmall,
    NoneLarge,
}

impl From<ModeArg> for CertifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::One => CertifyMode::One,
            ModeArg::Two => CertifyMode::Two,
            ModeArg::NoneSmall => CertifyMode::NoneSmall,
            ModeArg::NoneLarge => CertifyMode::NoneLarge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize)]
pub struct Flags {
    /// Problem file.
    #[arg(long)]
    #[serde(skip)]
    pub spec: Option<PathBuf>,
    /// Write the text report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
    /// Write the first nonzero solution profile as CSV.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    /// Which theorem to certify.
    #[arg(long, value_enum, default_value = "one")]
    pub mode: ModeArg,
    /// Number of solver intervals.
    #[arg(long, default_value_t = 256)]
    pub mesh: usize,
    /// Fixed-point update tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Picard damping θ in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    /// Constant initial guess for both components, as `u,v`.
    #[arg(long, default_value = "0.1,0.1", value_parser = parse_pair)]
    pub init: [f64; 2],
    /// Run the multi-start search seeded from the boxes.
    #[arg(long)]
    pub multi: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            spec: None,
            out: None,
            json: None,
            csv: None,
            mode: ModeArg::One,
            mesh: 256,
            tol: 1e-12,
            damping: 0.5,
            init: [0.1, 0.1],
            multi: false,
        }
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `u,v`, got `{s}`"));
    }
    let mut out = [0.0; 2];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse::<f64>().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Constants(f) | Command::Certify(f) | Command::Solve(f) | Command::Example(f) => f,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Certify(_) => "certify",
            Command::Solve(_) => "solve",
            Command::Example(_) => "example",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exit {
    Success,
    Failure,
    Usage,
}

impl Exit {
    pub fn code(self) -> i32 {
        match self {
            Exit::Success => 0,
            Exit::Failure => 1,
            Exit::Usage => 2,
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Exit::Success
        } else {
            Exit::Failure
        }
    }
}

/// A failed run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit(&self) -> Exit {
        match self {
            RunError::Usage(_) => Exit::Usage,
            RunError::Core(e) => match e {
                Error::Validation(_)
                | Error::Syntax { .. }
                | Error::Io { .. }
                | Error::Precondition(_)
                | Error::InvalidParameter(_) => Exit::Usage,
                _ => Exit::Failure,
            },
            RunError::Io(_) => Exit::Usage,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    /// Seconds since the Unix epoch when the run started.
    pub started_at: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    /// The only run-dependent field of the report.
    pub timing: Timing,
}

/// A computed quantity compared with its known value.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceCheck {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub expected_exact: &'static str,
    pub rel_error: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Body {
    pub command: &'static str,
    pub source: String,
    pub flags: Flags,
    pub spec: ProblemSpec,
    pub constants: Vec<ConstantsReport>,
    pub certificates: Vec<CertificateReport>,
    pub solutions: Vec<SolutionReport>,
    pub reference: Vec<ReferenceCheck>,
    pub exit: Exit,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub header: Header,
    pub body: Body,
}

impl RunReport {
    pub fn exit(&self) -> Exit {
        self.body.exit
    }

    /// The JSON document, numbers written with 17 significant digits.
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn body_json(&self) -> String {
        to_json_string(&self.body)
    }
}

fn solve_settings(flags: &Flags) -> SolveSettings {
    SolveSettings {
        damping: flags.damping,
        tol: flags.tol,
        ..SolveSettings::default()
    }
}

fn load(cmd: &Command) -> Result<(ProblemSpec, String), RunError> {
    let flags = cmd.flags();
    match (cmd, &flags.spec) {
        (Command::Example(_), None) => Ok((ProblemSpec::example(), "bundled example".into())),
        (_, Some(p)) => Ok((parse_spec(p)?, p.display().to_string())),
        (_, None) => Err(RunError::Usage(format!("`{}` needs --spec FILE", cmd.name()))),
    }
}

/// Exact constants of the bundled example.
pub fn reference_values() -> [(&'static str, &'static str, f64); 6] {
    [
        ("D1", "1/24", 1.0 / 24.0),
        ("D2", "5/32", 5.0 / 32.0),
        ("C1", "9/47", 9.0 / 47.0),
        ("C2", "10240/9561", 10240.0 / 9561.0),
        ("M1", "96/41", 96.0 / 41.0),
        ("M2", "10240/1209", 10240.0 / 1209.0),
    ]
}

fn reference_checks(k: &[ConstantsReport; 2]) -> Vec<ReferenceCheck> {
    let computed = [k[0].d, k[1].d, k[0].c.value, k[1].c.value, k[0].m.value, k[1].m.value];
    reference_values()
        .iter()
        .zip(computed)
        .map(|(&(name, exact, expected), computed)| {
            let rel_error = ((computed - expected) / expected).abs();
            ReferenceCheck {
                name: name.into(),
                computed,
                expected,
                expected_exact: exact,
                rel_error,
                tolerance: REFERENCE_TOL,
                ok: rel_error <= REFERENCE_TOL,
            }
        })
        .collect()
}

fn certify(spec: &ProblemSpec, mode: ModeArg) -> Result<CertificateReport, RunError> {
    let mode = CertifyMode::from(mode);
    let boxes = || {
        spec.boxes()
            .copied()
            .ok_or_else(|| RunError::Usage("certify modes `one` and `two` need a [boxes] section".into()))
    };
    Ok(match mode {
        CertifyMode::One => certify_one(spec, &boxes()?)?,
        CertifyMode::Two => certify_two(spec, &boxes()?)?,
        CertifyMode::NoneSmall | CertifyMode::NoneLarge => certify_none(spec, mode)?,
    })
}

fn solutions(spec: &ProblemSpec, flags: &Flags) -> Result<Vec<SolutionReport>, RunError> {
    if flags.mesh < MIN_NODES {
        return Err(RunError::Usage(format!("--mesh must be at least {MIN_NODES}")));
    }
    let settings = solve_settings(flags);
    settings.validate()?;
    let op = Operator::with_nodes(spec, flags.mesh)?;
    if flags.multi {
        let boxes = spec
            .boxes()
            .copied()
            .ok_or_else(|| RunError::Usage("--multi needs a [boxes] section".into()))?;
        Ok(multi_start(&op, &boxes, &settings)?)
    } else {
        let init = flags.init;
        if !init.iter().all(|x| x.is_finite()) {
            return Err(RunError::Usage("--init must be finite".into()));
        }
        Ok(vec![solve(&op, &constant_state(op.grid(), init), &settings)?])
    }
}

fn write_csv(spec: &ProblemSpec, sols: &[SolutionReport], path: &Path) -> Result<(), RunError> {
    let sol = sols
        .iter()
        .find(|s| !s.is_zero())
        .or(sols.first())
        .ok_or_else(|| RunError::Usage("--csv given but no solution was found".into()))?;
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    radcone::solver::write_csv(&mut w, spec, &sol.state)?;
    Ok(())
}

fn verdict_ok(c: &CertificateReport) -> bool {
    c.verdict == Verdict::Pass
}

/// Runs one command. Output files named in the flags are written here; the
/// caller decides where the text report goes.
pub fn run(cmd: &Command) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let started_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let flags = cmd.flags().clone();
    let (spec, source) = load(cmd)?;
    let mut notes: Vec<String> = spec.notes().to_vec();
    let mut constants = Vec::new();
    let mut certificates = Vec::new();
    let mut sols = Vec::new();
    let mut reference = Vec::new();

    let exit = match cmd {
        Command::Constants(_) => {
            constants.extend(spec.constants()?);
            if !constants.iter().all(|k| k.c_below_m) {
                notes.push("C_i < M_i fails for some equation".into());
            }
            Exit::Success
        }
        Command::Certify(_) => {
            let c = certify(&spec, flags.mode)?;
            let ok = verdict_ok(&c);
            certificates.push(c);
            Exit::of(ok)
        }
        Command::Solve(_) => {
            sols = solutions(&spec, &flags)?;
            if sols.is_empty() {
                notes.push("no converged solution inside the cone".into());
            }
            Exit::of(!sols.is_empty() && sols.iter().all(|s| s.converged))
        }
        Command::Example(_) => {
            let k = spec.constants()?;
            reference = reference_checks(&k);
            let boxes = spec
                .boxes()
                .copied()
                .ok_or_else(|| RunError::Usage("example spec has no [boxes] section".into()))?;
            let c = radcone::certify::certify_one_with(&spec, &k, &boxes)?;
            constants.extend(k);
            let ok = reference.iter().all(|r| r.ok) && verdict_ok(&c);
            certificates.push(c);
            sols = solutions(&spec, &flags)?;
            Exit::of(ok && sols.iter().all(|s| s.converged))
        }
    };
    if let Some(p) = &flags.csv {
        write_csv(&spec, &sols, p)?;
    }

    let report = RunReport {
        header: Header {
            tool: TOOL,
            version: VERSION,
            timing: Timing {
                started_at,
                wall_time_s: started.elapsed().as_secs_f64(),
            },
        },
        body: Body {
            command: cmd.name(),
            source,
            flags,
            spec,
            constants,
            certificates,
            solutions: sols,
            reference,
            exit,
            notes,
        },
    };
    if let Some(p) = &report.body.flags.json {
        std::fs::write(p, report.to_json() + "\n")?;
    }
    Ok(report)
}

fn est(e: &radcone::Estimate) -> String {
    format!("{:.12} ± {:.1e} [{}]", e.value, e.uncertainty, method_name(e.method))
}

fn method_name(m: radcone::Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// Human-readable rendering of a report.
pub fn render_text(r: &RunReport) -> String {
    let b = &r.body;
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {} ({})", r.header.tool, r.header.version, b.command, b.source);
    for n in &b.notes {
        let _ = writeln!(s, "note: {n}");
    }
    for (i, k) in b.constants.iter().enumerate() {
        let _ = writeln!(s, "\nequation {}", i + 1);
        let rows = [
            ("D", format!("{:.12}", k.d)),
            ("sup ∫k g", format!("{} at t = {:.6}", est(&k.sup_k.estimate), k.sup_k.t)),
            ("inf ∫_[a,b] k g", format!("{} at t = {:.6}", est(&k.inf_k.estimate), k.inf_k.t)),
            ("∫ α[k] g", est(&k.alpha_k)),
            ("∫ β[k] g", est(&k.beta_k)),
            ("∫_[a,b] α[k] g", est(&k.window_alpha_k)),
            ("∫_[a,b] β[k] g", est(&k.window_beta_k)),
            ("C", est(&k.c)),
            ("M", est(&k.m)),
        ];
        for (label, value) in rows {
            let _ = writeln!(s, "  {label:<16} = {value}");
        }
    }
    if !b.reference.is_empty() {
        let _ = writeln!(s, "\nreference values");
        for c in &b.reference {
            let _ = writeln!(
                s,
                "  {:<3} {:.12} vs {} (rel {:.1e}) {}",
                c.name,
                c.computed,
                c.expected_exact,
                c.rel_error,
                if c.ok { "ok" } else { "MISMATCH" }
            );
        }
    }
    for c in &b.certificates {
        let _ = writeln!(s, "\ncertificate {:?}: {:?}{}", c.mode, c.verdict, if c.rigorous { "" } else { " (non-rigorous)" });
        for e in &c.entries {
            let _ = writeln!(
                s,
                "  [{:?}] {}: {:.9e} {} {:.9e}, margin {:.3e}",
                e.status,
                e.name,
                e.lhs.value,
                e.relation.symbol(),
                e.rhs.value,
                e.margin
            );
        }
        for n in &c.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    for (i, sol) in b.solutions.iter().enumerate() {
        let _ = writeln!(
            s,
            "\nsolution {}: {:?} ({:?}) after {} iterations, residual {:.3e}, region {}",
            i + 1,
            sol.outcome,
            sol.strategy,
            sol.iterations,
            sol.residual,
            sol.region.map_or("n/a".to_string(), |r| format!("{r:?}"))
        );
        for (j, c) in sol.cone.iter().enumerate() {
            let _ = writeln!(
                s,
                "  component {}: ‖w‖ = {:.9}, cone {}, boundary residuals {:.1e} / {:.1e}",
                j + 1,
                c.sup_norm,
                if c.all_ok() { "ok" } else { "violated" },
                sol.boundary[j].at_zero,
                sol.boundary[j].at_one
            );
        }
    }
    let _ = writeln!(s, "\nexit {:?}, {:.3} s", b.exit, r.header.timing.wall_time_s);
    s
}
