//! `entlab` command-line front end. Every stochastic command takes `--seed`
//! (default 42) and produces byte-identical output for identical arguments,
//! regardless of the worker count set through `ENTLAB_THREADS`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod spec;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use entlab_core::channels::{is_entanglement_breaking, validate_cptp};
use entlab_core::dynamics::{trajectory, tsep_analytic, tsep_numeric};
use entlab_core::measures::{assistance_lower_bound, ghz_assistance_demo, MeasureKind};
use entlab_core::ordering::{
    fibers, find_violation, four_qubit_counterexample, max_entangled_equivalence, run_axioms,
    scan_diagram, AxiomConfig, DiagramPoint, Family, SearchStrategy, FIBER_BIN_WIDTH,
};
use entlab_core::states::{ghz, DensityMatrix};

pub use error::{exit, CliError};

pub const DEFAULT_SEED: u64 = 42;

/// What a command produced for the console, plus its exit code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn line(&mut self, text: impl AsRef<str>) {
        self.stdout.push_str(text.as_ref());
        self.stdout.push('\n');
    }

    fn fail(mut self, message: &str) -> Result<Self, CliError> {
        self.stderr.push_str(&format!("error: {message}\n"));
        self.finish(exit::NUMERIC)
    }

    fn finish(mut self, code: u8) -> Result<Self, CliError> {
        self.code = code;
        Ok(self)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "entlab",
    version,
    about = "Entanglement ordering under local channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Input/output entanglement diagram of a unilocal channel (CSV, or SVG plus CSV).
    Diagram(DiagramArgs),
    /// Search for a pair of states whose entanglement order the channel reverses.
    Violations(ViolationArgs),
    /// Check a channel for CPTP validity or entanglement breaking.
    CheckChannel(CheckChannelArgs),
    /// Separability time under the depolarizing semigroup.
    Tsep(TsepArgs),
    /// Measure trajectory under the depolarizing semigroup (CSV).
    Trajectory(TrajectoryArgs),
    /// Run a built-in counterexample.
    Counterexample(CounterexampleArgs),
    /// Entanglement of assistance on a shared GHZ state.
    Ghz(GhzArgs),
    /// Sampled checks of the entanglement-measure axioms.
    Axioms(AxiomArgs),
    /// Do all maximally entangled inputs end up equally entangled?
    Maxent(MaxentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// Built-in channel name or path to a channel JSON file.
    #[arg(long, default_value = "depolarizing")]
    pub channel: String,
    /// Parameter of the depolarizing channel.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value = "concurrence")]
    pub measure: String,
    /// Comma-separated list of werner, pure, random.
    #[arg(long, default_value = "werner,pure")]
    pub families: String,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// `.csv`, or `.svg` (the CSV is written next to it). Standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ViolationArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value = "concurrence")]
    pub measure: String,
    #[arg(long, default_value = "grid")]
    pub strategy: String,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelTest {
    Cptp,
    Eb,
}

#[derive(Debug, Clone, Args)]
pub struct CheckChannelArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum)]
    pub test: ChannelTest,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TsepMode {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Args)]
pub struct TsepArgs {
    /// Decay time constant.
    #[arg(long = "T")]
    pub decay_time: f64,
    /// pplus, werner:<q>, pure:<alpha>, or a state JSON file.
    #[arg(long, default_value = "pplus")]
    pub initial: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: TsepMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[arg(long = "T")]
    pub decay_time: f64,
    #[arg(long, default_value = "pplus")]
    pub initial: String,
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    /// Number of samples, evenly spaced on `[0, t_max]`.
    #[arg(long, default_value_t = 31)]
    pub steps: usize,
    #[arg(long, default_value = "concurrence")]
    pub measure: String,
    /// Adds a column with the serialized state.
    #[arg(long)]
    pub with_state: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Counterexample {
    FourQubit,
}

#[derive(Debug, Clone, Args)]
pub struct CounterexampleArgs {
    #[arg(value_enum)]
    pub which: Counterexample,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GhzArgs {
    /// Random decompositions tried for the assistance lower bound (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub assist_samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AxiomArgs {
    /// `all` or a comma-separated list of measures.
    #[arg(long, default_value = "all")]
    pub measure: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MaxentArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Diagram(a) => diagram(a),
        Command::Violations(a) => violations(a),
        Command::CheckChannel(a) => check_channel(a),
        Command::Tsep(a) => tsep(a),
        Command::Trajectory(a) => trajectory_cmd(a),
        Command::Counterexample(a) => counterexample(a),
        Command::Ghz(a) => ghz_cmd(a),
        Command::Axioms(a) => axioms(a),
        Command::Maxent(a) => maxent(a),
    }
}

fn parse_measure(s: &str) -> Result<MeasureKind, CliError> {
    s.parse::<MeasureKind>()
        .map_err(|e| CliError::input(e.to_string()))
}

fn extension(path: &Path) -> Option<&str> {
    path.extension().and_then(|e| e.to_str())
}

/// Serializes `payload` with a `schema` tag and writes it to `out` (must be
/// `.json`). Returns the JSON text.
pub fn write_json<T: Serialize>(
    schema: &str,
    payload: &T,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let mut value = serde_json::to_value(payload)?;
    match &mut value {
        Value::Object(map) => {
            map.insert("schema".into(), Value::String(schema.into()));
        }
        _ => return Err(CliError::numeric("report did not serialize to an object")),
    }
    let text = serde_json::to_string_pretty(&value)? + "\n";
    if let Some(path) = out {
        if extension(path) != Some("json") {
            return Err(CliError::input(format!(
                "output '{}' must have a .json extension",
                path.display()
            )));
        }
        std::fs::write(path, &text)?;
    }
    Ok(text)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::input(format!("csv error: {e}")))
}

pub const DIAGRAM_HEADER: [&str; 5] = ["family", "param", "measure", "e_in", "e_out"];

pub fn diagram_csv(points: &[DiagramPoint]) -> Result<Vec<u8>, CliError> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.family.to_string(),
                p.param.to_string(),
                p.e_in.kind.to_string(),
                p.e_in.value.to_string(),
                p.e_out.value.to_string(),
            ]
        })
        .collect();
    csv_bytes(&DIAGRAM_HEADER, &rows)
}

pub fn diagram(a: &DiagramArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let channel = spec::channel(&a.channel.channel, a.channel.p)?;
    let kind = parse_measure(&a.measure)?;
    let families = a
        .families
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<Family>()
                .map_err(|e| CliError::input(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if a.grid == 0 {
        return Err(CliError::input("--grid must be at least 1"));
    }
    let points = scan_diagram(&channel, kind, &families, a.grid, a.seed)?;
    let csv = diagram_csv(&points)?;
    let fiber_report = fibers(&points, FIBER_BIN_WIDTH)?;
    let summary = format!(
        "{} points, {} fibers, {} overlapping fiber pairs",
        points.len(),
        fiber_report.fibers.len(),
        fiber_report.overlaps.len()
    );
    match &a.out {
        None => {
            o.stdout.push_str(&String::from_utf8_lossy(&csv));
            o.stderr = format!("{summary}\n");
        }
        Some(path) => {
            match extension(path) {
                Some("csv") => std::fs::write(path, &csv)?,
                Some("svg") => {
                    let title = format!("{} under {}", kind, a.channel.channel);
                    std::fs::write(path, svg::diagram(&points, kind.name(), &title))?;
                    std::fs::write(path.with_extension("csv"), &csv)?;
                }
                _ => {
                    return Err(CliError::input(format!(
                        "diagram output '{}' must end in .csv or .svg",
                        path.display()
                    )))
                }
            }
            o.line(&summary);
        }
    }
    o.finish(exit::OK)
}

pub fn violations(a: &ViolationArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let channel = spec::channel(&a.channel.channel, a.channel.p)?;
    let kind = parse_measure(&a.measure)?;
    let strategy: SearchStrategy = a
        .strategy
        .parse()
        .map_err(|e: entlab_core::Error| CliError::input(e.to_string()))?;
    if a.budget == 0 {
        return Err(CliError::input("--budget must be at least 1"));
    }
    let found = find_violation(&channel, kind, strategy, a.budget, a.seed)?;
    let search = json!({
        "measure": kind,
        "strategy": strategy.to_string(),
        "budget": a.budget,
        "seed": a.seed,
    });
    match found {
        Some(cert) => {
            if !cert.verify()? {
                return Err(CliError::numeric(
                    "certificate failed its own re-verification",
                ));
            }
            o.line(format!(
                "violation ({kind}): in {:.6} > {:.6}, out {:.6} < {:.6}, margin {:.3e}",
                cert.e_in1, cert.e_in2, cert.e_out1, cert.e_out2, cert.achieved_margin
            ));
            let payload = json!({ "found": true, "search": search, "certificate": cert.to_json() });
            write_json("entlab.violations.v1", &payload, a.out.as_deref())?;
            o.finish(exit::OK)
        }
        None => {
            o.line(format!("no violation found within budget {}", a.budget));
            let payload = json!({ "found": false, "search": search, "certificate": null });
            write_json("entlab.violations.v1", &payload, a.out.as_deref())?;
            o.finish(exit::NOT_FOUND)
        }
    }
}

pub fn check_channel(a: &CheckChannelArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let channel = spec::channel(&a.channel.channel, a.channel.p)?;
    match a.test {
        ChannelTest::Cptp => {
            let report = validate_cptp(&channel)?;
            o.line(format!(
                "cptp: {} (trace-preservation residual {:.3e}, min Choi eigenvalue {:.3e})",
                if report.passed() { "pass" } else { "fail" },
                report.tp_residual,
                report.choi_min_eigenvalue
            ));
            let payload = json!({ "test": "cptp", "passed": report.passed(), "report": report });
            write_json("entlab.check-channel.v1", &payload, a.out.as_deref())?;
            o.finish(if report.passed() {
                exit::OK
            } else {
                exit::CONTRACT
            })
        }
        ChannelTest::Eb => {
            let verdict = is_entanglement_breaking(&channel)?;
            o.line(format!(
                "entanglement breaking: {}{} (min partial-transpose eigenvalue of Choi state {:.6e})",
                verdict.entanglement_breaking,
                if verdict.exact { "" } else { " [PPT-necessary-only]" },
                verdict.min_pt_eigenvalue
            ));
            let payload = json!({ "test": "eb", "verdict": verdict });
            write_json("entlab.check-channel.v1", &payload, a.out.as_deref())?;
            o.finish(exit::OK)
        }
    }
}

pub fn tsep(a: &TsepArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (t_sep, initial) = match a.mode {
        TsepMode::Analytic => (tsep_analytic(a.decay_time)?, None),
        TsepMode::Numeric => {
            let rho = spec::initial_state(&a.initial)?;
            (
                tsep_numeric(a.decay_time, &rho, a.tol)?,
                Some(a.initial.clone()),
            )
        }
    };
    o.line(ten_digits(t_sep));
    let mode = match a.mode {
        TsepMode::Analytic => "analytic",
        TsepMode::Numeric => "numeric",
    };
    let payload = json!({
        "mode": mode,
        "T": a.decay_time,
        "initial": initial,
        "tol": if a.mode == TsepMode::Numeric { Some(a.tol) } else { None },
        "t_sep": t_sep,
    });
    write_json("entlab.tsep.v1", &payload, a.out.as_deref())?;
    o.finish(exit::OK)
}

/// Truncates (not rounds) to ten decimals, so `ln 3` prints as `1.0986122886`.
pub fn ten_digits(x: f64) -> String {
    let mut s = format!("{x:.12}");
    s.truncate(s.len() - 2);
    s
}

pub fn trajectory_cmd(a: &TrajectoryArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let rho: DensityMatrix = spec::initial_state(&a.initial)?;
    let kind = parse_measure(&a.measure)?;
    if a.steps == 0 || !(a.t_max >= 0.0) {
        return Err(CliError::input(
            "--steps must be positive and --t-max non-negative",
        ));
    }
    let times: Vec<f64> = if a.steps == 1 {
        vec![0.0]
    } else {
        (0..a.steps)
            .map(|i| a.t_max * i as f64 / (a.steps - 1) as f64)
            .collect()
    };
    let traj = trajectory(a.decay_time, &rho, &times, kind)?;
    let mut header = vec!["t", "measure_kind", "value"];
    if a.with_state {
        header.push("state");
    }
    let csv = csv_bytes(&header, &traj.csv_rows(a.with_state))?;
    match &a.out {
        None => o.stdout.push_str(&String::from_utf8_lossy(&csv)),
        Some(path) if extension(path) == Some("csv") => std::fs::write(path, &csv)?,
        Some(path) => {
            return Err(CliError::input(format!(
                "trajectory output '{}' must end in .csv",
                path.display()
            )))
        }
    }
    o.finish(exit::OK)
}

pub fn counterexample(a: &CounterexampleArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    match a.which {
        Counterexample::FourQubit => {
            let r = four_qubit_counterexample()?;
            o.line(format!(
                "N(rho1) = {:.6}, N(rho2) = {:.6}  ->  N(rho1') = {:.6}, N(rho2') = {:.6}",
                r.negativity_rho1_in,
                r.negativity_rho2_in,
                r.negativity_rho1_out,
                r.negativity_rho2_out
            ));
            o.line(format!(
                "rho1 invariant: {:.1e}, rho2' mixture residual: {:.1e}, ordering reversed: {}",
                r.rho1_invariance, r.rho2_mixture_residual, r.ordering_reversed
            ));
            let payload = json!({ "example": "four-qubit", "passed": r.passed(), "report": r });
            write_json("entlab.counterexample.v1", &payload, a.out.as_deref())?;
            if r.passed() {
                o.finish(exit::OK)
            } else {
                o.fail("four-qubit counterexample checks failed")
            }
        }
    }
}

pub fn ghz_cmd(a: &GhzArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let r = ghz_assistance_demo()?;
    o.line(format!(
        "C(rho_AB) = {:.6}; C(omega_+) = {:.6}, C(omega_-) = {:.6}; assisted average = {:.6}",
        r.concurrence_rho_ab,
        r.concurrence_omega_plus,
        r.concurrence_omega_minus,
        r.average_assisted
    ));
    let bound = if a.assist_samples > 0 {
        let rho_ab = ghz().density().reduced(&[0, 1])?;
        let b = assistance_lower_bound(&rho_ab, a.assist_samples, a.seed)?;
        o.line(format!(
            "sampled assistance lower bound ({} samples): {b:.6}",
            a.assist_samples
        ));
        Some(b)
    } else {
        None
    };
    let payload = json!({
        "passed": r.passed(),
        "report": r,
        "assistance_lower_bound": bound,
        "assist_samples": a.assist_samples,
        "seed": a.seed,
    });
    write_json("entlab.ghz.v1", &payload, a.out.as_deref())?;
    if r.passed() {
        o.finish(exit::OK)
    } else {
        o.fail("GHZ assistance checks failed")
    }
}

pub fn axioms(a: &AxiomArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let kinds: Vec<MeasureKind> = if a.measure == "all" {
        MeasureKind::ALL.to_vec()
    } else {
        a.measure
            .split(',')
            .map(|s| parse_measure(s.trim()))
            .collect::<Result<_, _>>()?
    };
    if a.trials == 0 {
        return Err(CliError::input("--trials must be at least 1"));
    }
    let report = run_axioms(&kinds, AxiomConfig::uniform(a.trials, a.seed))?;
    for m in &report.measures {
        o.line(format!(
            "{:<13} LU {:.2e}  convexity {}  monotonicity {}  {}",
            m.measure.name(),
            m.lu_max_change,
            m.convexity_max_excess
                .map_or("n/a".to_string(), |e| format!("{e:.2e}")),
            m.monotonicity_max_excess
                .map_or("n/a".to_string(), |e| format!("{e:.2e}")),
            if m.passed() { "ok" } else { "FAIL" }
        ));
    }
    o.line(format!(
        "additivity {:.2e}, sharpness mismatches {}, normalization violations {}",
        report.additivity_max_error, report.sharpness_mismatches, report.normalization_violations
    ));
    let payload = json!({ "passed": report.passed(), "report": report });
    write_json("entlab.axioms.v1", &payload, a.out.as_deref())?;
    if report.passed() {
        o.finish(exit::OK)
    } else {
        o.fail("axiom checks failed")
    }
}

pub fn maxent(a: &MaxentArgs) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let channel = spec::channel(&a.channel.channel, a.channel.p)?;
    let report = max_entangled_equivalence(&channel, a.trials, a.seed)?;
    for m in &report.measures {
        o.line(format!(
            "{:<12} [{:.9}, {:.9}] spread {:.2e}",
            m.measure.name(),
            m.min,
            m.max,
            m.spread
        ));
    }
    let payload = json!({ "passed": report.passed(), "seed": a.seed, "report": report });
    write_json("entlab.maxent.v1", &payload, a.out.as_deref())?;
    if report.passed() {
        o.finish(exit::OK)
    } else {
        o.fail("maximally entangled outputs differ")
    }
}

/// Worker cap from `ENTLAB_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("ENTLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::input(format!(
                "ENTLAB_THREADS must be a positive integer, got '{v}'"
            ))),
        },
    }
}
