//! Command-line front end: JSON in, canonical JSON (or text/SVG) reports out.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use logflatten::blowup::{blow_up, strict_function, subdivision_to_ideal, BlowupModel};
use logflatten::flatten::{flatten, verify_certificate, FlattenOptions, FlatteningCertificate, Overall};
use logflatten::homs::{is_integral_with, IntegralityOptions, IntegralityStatus, MonoidHom};
use logflatten::ideals::MonoidIdeal;
use logflatten::json::{canonical_string, parse_value, vector_to_json, Artifact};
use logflatten::lattice::IntVector;
use logflatten::monoids::{hilbert_basis, FineMonoid};
use logflatten::polyhedra::{resolve_to_smooth, Cone, Fan};
use logflatten::pool;
use logflatten::svg::render_fan_svg;
use logflatten::Error;

pub const TOOL: &str = "logflatten";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "logflatten", version, about = "Exact log blow-ups and toric flattening certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Input JSON file; `-` or absent reads stdin.
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Record wall-clock timings in the report (makes it nondeterministic).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Svg,
}

#[derive(Args, Debug, Clone)]
pub struct Bounds {
    #[arg(long, default_value_t = logflatten::homs::DEFAULT_ORACLE_BOUND)]
    pub oracle_bound: u64,
    /// Report InconclusiveAtBound when the bounded oracle disagrees.
    #[arg(long)]
    pub conservative: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Saturation of a monoid.
    Saturate,
    /// Hilbert basis of a pointed cone.
    HilbertBasis,
    /// Dual of a cone.
    DualCone,
    /// Decide integrality, exactness or locality of a homomorphism.
    Check {
        #[arg(long, group = "property")]
        integral: bool,
        #[arg(long, group = "property")]
        exact: bool,
        #[arg(long, group = "property")]
        local: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Blow up a monoid along an ideal.
    Blowup {
        /// Keep the charts fine instead of saturating them.
        #[arg(long)]
        no_saturate: bool,
    },
    /// Star-subdivide a fan, or realise it as the blow-up of a single ideal.
    Subdivide {
        /// Comma-separated primitive vector, e.g. `1,1`; may repeat.
        #[arg(long)]
        at: Vec<String>,
        /// Monoid JSON whose cone the fan subdivides; emits an ideal.
        #[arg(long)]
        monoid: Option<PathBuf>,
        #[arg(long, default_value_t = logflatten::blowup::DEFAULT_HEIGHT_BOUND)]
        height_bound: u64,
    },
    /// Resolve a fan (or the face fan of a cone) to a smooth fan.
    ResolveFan,
    /// Run the flattening pipeline on a homomorphism.
    Flatten {
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, default_value_t = logflatten::blowup::DEFAULT_HEIGHT_BOUND)]
        height_bound: u64,
        #[arg(long, default_value_t = logflatten::flatten::DEFAULT_MAX_ITERATIONS)]
        max_iterations: usize,
        #[arg(long)]
        no_fast_exit: bool,
    },
    /// Re-check a flattening certificate with the bounded oracle.
    Verify,
    /// Emit a seeded pool of test instances.
    #[command(hide = true)]
    Pool {
        #[arg(long, value_enum, default_value_t = PoolKind::Homs)]
        kind: PoolKind,
        #[arg(long, default_value_t = pool::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        size: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Homs,
    Ideals,
    Flatten,
}

/// Overall status of a report; exit codes depend on this alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
    Inconclusive,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => "failed",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "ok" => Some(Status::Ok),
            "failed" => Some(Status::Failed),
            "inconclusive" => Some(Status::Inconclusive),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive => 2,
        }
    }
}

pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub subcommand: String,
    pub status: Status,
    pub verdicts: Map<String, Value>,
    pub artifacts: Map<String, Value>,
    pub timings: Option<Map<String, Value>>,
    pub version: String,
    pub input_digest: String,
    /// Fan to draw for `--format svg`.
    pub fan: Option<Fan>,
    /// Human summary for `--format text`.
    pub summary: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut o = Map::new();
        o.insert("tool".into(), json!(TOOL));
        o.insert("version".into(), json!(self.version));
        o.insert("subcommand".into(), json!(self.subcommand));
        o.insert("status".into(), json!(self.status.as_str()));
        o.insert("input_digest".into(), json!(self.input_digest));
        o.insert("verdicts".into(), Value::Object(self.verdicts.clone()));
        o.insert("artifacts".into(), Value::Object(self.artifacts.clone()));
        if let Some(t) = &self.timings {
            o.insert("timings".into(), Value::Object(t.clone()));
        }
        Value::Object(o)
    }

    /// Inverse of [`Report::to_json`]; the drawing and text hints are not serialised.
    pub fn from_json(v: &Value) -> Result<Report, Error> {
        let s = |k: &str| {
            v.get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::InvalidInput(format!("report field \"{k}\"")))
        };
        let obj = |k: &str| {
            v.get(k)
                .and_then(Value::as_object)
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("report field \"{k}\"")))
        };
        Ok(Report {
            subcommand: s("subcommand")?,
            status: Status::parse(&s("status")?).ok_or_else(|| Error::InvalidInput("report status".into()))?,
            verdicts: obj("verdicts")?,
            artifacts: obj("artifacts")?,
            timings: v.get("timings").and_then(Value::as_object).cloned(),
            version: s("version")?,
            input_digest: s("input_digest")?,
            fan: None,
            summary: Vec::new(),
        })
    }

    fn new(subcommand: &str, digest: String) -> Report {
        Report {
            subcommand: subcommand.into(),
            status: Status::Ok,
            verdicts: Map::new(),
            artifacts: Map::new(),
            timings: None,
            version: VERSION.into(),
            input_digest: digest,
            fan: None,
            summary: Vec::new(),
        }
    }

    fn artifact(&mut self, k: &str, v: Value) {
        self.artifacts.insert(k.into(), v);
    }

    fn verdict(&mut self, k: &str, v: Value) {
        self.verdicts.insert(k.into(), v);
    }

    fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Fails with a diagnostic when a required input is missing.
fn read_input(path: &Option<PathBuf>) -> Result<Vec<u8>, Error> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read(p).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok(buf)
        }
    }
}

fn parse_bytes(bytes: &[u8]) -> Result<Value, Error> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("input is not UTF-8: {e}")))?;
    parse_value(text)
}

fn parse_vector(s: &str) -> Result<IntVector, Error> {
    let coords: Result<Vec<num::BigInt>, _> = s.split(',').map(|c| c.trim().parse::<num::BigInt>()).collect();
    coords
        .map(IntVector)
        .map_err(|_| Error::InvalidInput(format!("cannot parse vector \"{s}\"")))
}

/// A fan, or the face fan of a cone.
fn fan_or_cone(v: &Value) -> Result<Fan, Error> {
    if v.get("cones").is_some() {
        Fan::from_json(v)
    } else {
        Fan::face_fan(&Cone::from_json(v)?)
    }
}

fn status_of(s: IntegralityStatus) -> Status {
    match s {
        IntegralityStatus::Integral => Status::Ok,
        IntegralityStatus::NotIntegral => Status::Failed,
        IntegralityStatus::InconclusiveAtBound => Status::Inconclusive,
    }
}

fn bool_status(b: bool) -> Status {
    if b {
        Status::Ok
    } else {
        Status::Failed
    }
}

fn blowup_summary(r: &mut Report, b: &BlowupModel) {
    r.line(format!("ideal: {}", list(b.ideal.generators())));
    r.line(format!("fan rays: {}", list(b.fan.rays())));
    for c in &b.charts {
        r.line(format!("chart at {}: {}", c.pivot, list(c.monoid.generators())));
    }
}

fn list(v: &[IntVector]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("<{}>", parts.join(", "))
}

fn certificate_summary(r: &mut Report, c: &FlatteningCertificate) {
    r.line(format!("overall: {}", c.overall.as_str()));
    r.line(format!("ideal: {}", list(c.ideal.generators())));
    r.line(format!("base fan rays: {}", list(c.base_fan.rays())));
    r.line(format!("equidimensional: {}, base smooth: {}", c.equidimensional, c.base_smooth));
    if c.fast_exit {
        r.line("input already integral (fast exit)");
    }
    if c.fallback_iterations > 0 {
        r.line(format!("fallback subdivisions: {}", c.fallback_iterations));
    }
    for ch in &c.charts {
        r.line(format!("chart over {}: {}", list(&ch.base_cone.iter().map(|&i| c.base_fan.rays()[i].clone()).collect::<Vec<_>>()), ch.verdict.status.as_str()));
    }
}

/// Executes a parsed command line and returns the report.
pub fn run(cli: &Cli) -> Result<Report, Error> {
    let start = Instant::now();
    let needs_input = !matches!(cli.command, Command::Pool { .. });
    let bytes = if needs_input { read_input(&cli.common.input)? } else { Vec::new() };
    let mut report = Report::new(subcommand_name(&cli.command), digest(&bytes));
    match &cli.command {
        Command::Saturate => {
            let m = FineMonoid::from_json(&parse_bytes(&bytes)?)?;
            let s = m.saturate();
            report.verdict("was_saturated", json!(s.same_set(&m)));
            report.line(format!("saturation: {}", list(s.generators())));
            report.artifact("monoid", s.to_json());
        }
        Command::HilbertBasis => {
            let c = Cone::from_json(&parse_bytes(&bytes)?)?;
            let hb = hilbert_basis(&c)?;
            report.line(format!("hilbert basis: {}", list(hb.generators())));
            report.artifact("monoid", hb.to_json());
        }
        Command::DualCone => {
            let c = Cone::from_json(&parse_bytes(&bytes)?)?;
            let d = c.dual().canonical()?;
            report.line(format!("dual rays: {}", list(d.rays())));
            if d.rank() == 2 && d.is_pointed() {
                report.fan = Some(Fan::face_fan(&d)?);
            }
            report.artifact("cone", d.to_json());
        }
        Command::Check { exact, local, bounds, .. } => {
            let h = MonoidHom::from_json(&parse_bytes(&bytes)?)?;
            if *exact {
                let e = h.is_exact()?;
                report.verdict("exact", json!(e));
                report.status = bool_status(e);
                report.line(format!("exact: {e}"));
            } else if *local {
                let l = h.is_local();
                report.verdict("local", json!(l));
                report.status = bool_status(l);
                report.line(format!("local: {l}"));
            } else {
                let opts = IntegralityOptions { oracle_bound: bounds.oracle_bound, conservative: bounds.conservative };
                let v = is_integral_with(&h, &opts)?;
                report.status = status_of(v.status);
                report.line(format!("integrality: {}", v.status.as_str()));
                if let Some(ce) = &v.counterexample {
                    report.line(format!("counterexample: a1={} a2={} b1={} b2={}", ce.a1, ce.a2, ce.b1, ce.b2));
                }
                report.verdict("integral", v.to_json());
            }
        }
        Command::Blowup { no_saturate } => {
            let k = MonoidIdeal::from_json(&parse_bytes(&bytes)?)?;
            let b = blow_up(k.parent(), &k, !no_saturate)?;
            report.verdict("invertible", json!(b.verify_invertibility()?));
            blowup_summary(&mut report, &b);
            report.fan = Some(b.fan.clone());
            report.artifact("blowup", b.to_json());
        }
        Command::Subdivide { at, monoid, height_bound } => {
            let mut fan = fan_or_cone(&parse_bytes(&bytes)?)?;
            for s in at {
                fan = fan.stellar_subdivision(&parse_vector(s)?)?;
            }
            report.line(format!("fan rays: {}", list(fan.rays())));
            if let Some(path) = monoid {
                let p = FineMonoid::from_json(&parse_bytes(&read_input(&Some(path.clone()))?)?)?;
                let f = strict_function(&p, &fan, *height_bound)?;
                let k = subdivision_to_ideal(&p, &fan, *height_bound)?;
                report.line(format!("ideal: {}", list(k.generators())));
                report.artifact("support_function", f.to_json());
                report.artifact("ideal", k.to_json());
            }
            report.fan = Some(fan.clone());
            report.artifact("fan", fan.to_json());
        }
        Command::ResolveFan => {
            let fan = fan_or_cone(&parse_bytes(&bytes)?)?;
            let (smooth, centres) = resolve_to_smooth(&fan)?;
            report.verdict("smooth", json!(smooth.is_smooth()));
            report.line(format!("centres: {}", list(&centres)));
            report.line(format!("fan rays: {}", list(smooth.rays())));
            report.artifact("centres", Value::Array(centres.iter().map(vector_to_json).collect()));
            report.fan = Some(smooth.clone());
            report.artifact("fan", smooth.to_json());
        }
        Command::Flatten { bounds, height_bound, max_iterations, no_fast_exit } => {
            let h = MonoidHom::from_json(&parse_bytes(&bytes)?)?;
            let opts = FlattenOptions {
                oracle_bound: bounds.oracle_bound,
                height_bound: *height_bound,
                max_iterations: *max_iterations,
                fast_exit: !no_fast_exit,
                conservative: bounds.conservative,
            };
            let c = flatten(&h, &opts)?;
            report.status = match c.overall {
                Overall::Verified => Status::Ok,
                Overall::Failed => Status::Failed,
                Overall::Inconclusive => Status::Inconclusive,
            };
            report.verdict("overall", json!(c.overall.as_str()));
            certificate_summary(&mut report, &c);
            report.fan = Some(c.base_fan.clone());
            report.artifact("certificate", c.to_json());
        }
        Command::Verify => {
            let c = FlatteningCertificate::from_json(&parse_bytes(&bytes)?)?;
            let ok = verify_certificate(&c);
            report.verdict("valid", json!(ok));
            report.status = bool_status(ok);
            report.line(format!("certificate valid: {ok}"));
        }
        Command::Pool { kind, seed, size } => {
            let items: Vec<Value> = match kind {
                PoolKind::Homs => pool::hom_pool(*seed, *size).iter().map(|h| h.to_json()).collect(),
                PoolKind::Ideals => pool::ideal_pool(*seed, *size).iter().map(|k| k.to_json()).collect(),
                PoolKind::Flatten => pool::flatten_pool(*seed, *size).iter().map(|h| h.to_json()).collect(),
            };
            report.line(format!("{} instances", items.len()));
            report.artifact("pool", Value::Array(items));
        }
    }
    if cli.common.timings {
        let mut t = Map::new();
        t.insert("total_ms".into(), json!(start.elapsed().as_secs_f64() * 1000.0));
        report.timings = Some(t);
    }
    Ok(report)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Saturate => "saturate",
        Command::HilbertBasis => "hilbert-basis",
        Command::DualCone => "dual-cone",
        Command::Check { .. } => "check",
        Command::Blowup { .. } => "blowup",
        Command::Subdivide { .. } => "subdivide",
        Command::ResolveFan => "resolve-fan",
        Command::Flatten { .. } => "flatten",
        Command::Verify => "verify",
        Command::Pool { .. } => "pool",
    }
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => Ok(canonical_string(&report.to_json()) + "\n"),
        Format::Text => {
            let mut s = format!("{} {} [{}]\n", TOOL, report.subcommand, report.status.as_str());
            for l in &report.summary {
                s.push_str("  ");
                s.push_str(l);
                s.push('\n');
            }
            Ok(s)
        }
        Format::Svg => match &report.fan {
            Some(f) => render_fan_svg(f),
            None => Err(Error::InvalidInput(format!("{} produces no fan to draw", report.subcommand))),
        },
    }
}

/// Parses arguments, runs, writes output, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = run(&cli).and_then(|r| render(&r, cli.common.format).map(|text| (r.status, text)));
    match outcome {
        Ok((status, text)) => {
            let written = match &cli.common.output {
                Some(p) => fs::write(p, text.as_bytes()).map_err(|e| e.to_string()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => status.exit_code(),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_INVALID
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
