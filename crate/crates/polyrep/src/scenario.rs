//! Declarative scenario documents and the runner behind the `polyrep`
//! binary.
//!
//! A scenario is a plain nested key/value text document (grammar in the
//! repository README) naming a strategy space, a payoff kernel, a target
//! state, and the analyses to run against it. Parsing enforces every
//! cross-field invariant — radius threshold against the target weights,
//! step-size cap against the kernel bound, analysis prerequisites — so a
//! config that parses is a config that runs.
//!
//! [`run_scenario`] executes the requested analyses in a fixed order,
//! writes the trajectory CSV, an atom-legend sidecar, and a JSON report,
//! and reports an exit status: `0` when every requested verdict passes,
//! `1` when at least one fails, `2` when an analysis could not be executed
//! at all. Reports embed the canonical form of the resolved config, so a
//! run can be reproduced from its report alone. Given equal inputs and
//! seeds, outputs are byte-identical across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{integrate, rest_point_residual, IntegratorConfig, Method, Trajectory};
use crate::error::{Error, Result};
use crate::games::{KernelForm, PayoffKernel};
use crate::measures::{DiscreteMeasure, StrategySpace, DROP_TOL, MASS_TOL, MERGE_TOL};
use crate::stability::{
    basin_probe, estimate_negdef_constant, test_strong_uninvadability, test_strong_unbeatability,
    verify_lyapunov_certificate, BasinReport, CertificateReport, MarginReport, NegdefReport,
    NeighborhoodSpec, C_TOL, CERT_COMPARISON_SLACK, CERT_NONNEG_SLACK, MARGIN_TOL, REST_TOL,
};

/// The analyses a scenario may request, in their fixed execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    RestPoint,
    Uninvadable,
    Unbeatable,
    Negdef,
    Certificate,
    Basin,
}

/// Canonical listing order; execution derives from it (with the one
/// exception that the basin integrations run before the certificate, which
/// consumes their trajectories).
const ANALYSIS_ORDER: [Analysis; 6] = [
    Analysis::RestPoint,
    Analysis::Uninvadable,
    Analysis::Unbeatable,
    Analysis::Negdef,
    Analysis::Certificate,
    Analysis::Basin,
];

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::RestPoint => "rest_point",
            Analysis::Uninvadable => "uninvadable",
            Analysis::Unbeatable => "unbeatable",
            Analysis::Negdef => "negdef",
            Analysis::Certificate => "certificate",
            Analysis::Basin => "basin",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        ANALYSIS_ORDER.iter().copied().find(|a| a.name() == name)
    }
}

/// Where a run leaves its artifacts, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub trajectory_csv: String,
    pub report: String,
}

/// A fully resolved scenario: every default filled in, every cross-field
/// invariant already checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub space: StrategySpace,
    pub kernel: PayoffKernel,
    pub target: DiscreteMeasure,
    pub initial: Option<DiscreteMeasure>,
    pub integrator: Option<IntegratorConfig>,
    pub neighborhood: Option<NeighborhoodSpec>,
    pub witness: Option<DiscreteMeasure>,
    pub analyses: Vec<Analysis>,
    pub outputs: OutputSpec,
}

// ---------------------------------------------------------------------------
// Document lexing: `key = value` lines, one level of `section { ... }`.
// ---------------------------------------------------------------------------

struct RawEntry {
    line: usize,
    key: String,
    value: String,
}

struct RawSection {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

struct RawDoc {
    top: Vec<RawEntry>,
    sections: Vec<RawSection>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn lex(text: &str) -> Result<RawDoc> {
    let mut doc = RawDoc {
        top: Vec::new(),
        sections: Vec::new(),
    };
    let mut current: Option<RawSection> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "}" {
            match current.take() {
                Some(section) => {
                    if doc.sections.iter().any(|s| s.name == section.name) {
                        return Err(parse_err(
                            section.line,
                            format!("duplicate section `{}`", section.name),
                        ));
                    }
                    doc.sections.push(section);
                }
                None => return Err(parse_err(line_no, "unmatched `}`")),
            }
            continue;
        }
        if let Some(header) = line.strip_suffix('{') {
            let name = header.trim();
            if !is_ident(name) {
                return Err(parse_err(line_no, format!("bad section header `{line}`")));
            }
            if current.is_some() {
                return Err(parse_err(line_no, "sections cannot nest"));
            }
            current = Some(RawSection {
                name: name.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let entry = RawEntry {
                line: line_no,
                key: key.trim().to_string(),
                value: value.trim().to_string(),
            };
            if !is_ident(&entry.key) {
                return Err(parse_err(line_no, format!("bad key `{}`", entry.key)));
            }
            match &mut current {
                Some(section) => section.entries.push(entry),
                None => doc.top.push(entry),
            }
            continue;
        }
        return Err(parse_err(
            line_no,
            format!("expected `key = value`, `section {{` or `}}`, found `{line}`"),
        ));
    }
    if let Some(section) = current {
        return Err(parse_err(
            section.line,
            format!("section `{}` is never closed", section.name),
        ));
    }
    Ok(doc)
}

impl RawDoc {
    fn section(&self, name: &str) -> Option<&RawSection> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn require_section(&self, name: &str) -> Result<&RawSection> {
        self.section(name)
            .ok_or_else(|| parse_err(0, format!("missing required section `{name}`")))
    }
}

impl RawSection {
    /// The entry for a key that may appear at most once.
    fn unique(&self, key: &str) -> Result<Option<&RawEntry>> {
        let mut found = None;
        for entry in &self.entries {
            if entry.key == key {
                if found.is_some() {
                    return Err(parse_err(
                        entry.line,
                        format!("duplicate key `{key}` in section `{}`", self.name),
                    ));
                }
                found = Some(entry);
            }
        }
        Ok(found)
    }

    fn require(&self, key: &str) -> Result<&RawEntry> {
        self.unique(key)?.ok_or_else(|| {
            parse_err(
                self.line,
                format!("section `{}` is missing required key `{key}`", self.name),
            )
        })
    }

    fn all(&self, key: &str) -> Vec<&RawEntry> {
        self.entries.iter().filter(|e| e.key == key).collect()
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for entry in &self.entries {
            if !allowed.contains(&entry.key.as_str()) {
                return Err(parse_err(
                    entry.line,
                    format!("unknown key `{}` in section `{}`", entry.key, self.name),
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Value parsing.
// ---------------------------------------------------------------------------

fn value_f64(entry: &RawEntry) -> Result<f64> {
    entry
        .value
        .parse::<f64>()
        .map_err(|_| parse_err(entry.line, format!("`{}` is not a number", entry.value)))
}

fn value_f64_list(entry: &RawEntry) -> Result<Vec<f64>> {
    entry
        .value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(entry.line, format!("`{}` is not a number", part.trim())))
        })
        .collect()
}

fn value_usize(entry: &RawEntry) -> Result<usize> {
    entry
        .value
        .parse::<usize>()
        .map_err(|_| parse_err(entry.line, format!("`{}` is not a count", entry.value)))
}

fn value_u64(entry: &RawEntry) -> Result<u64> {
    entry
        .value
        .parse::<u64>()
        .map_err(|_| parse_err(entry.line, format!("`{}` is not a seed", entry.value)))
}

fn value_bool(entry: &RawEntry) -> Result<bool> {
    match entry.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_err(
            entry.line,
            format!("`{other}` is not `true` or `false`"),
        )),
    }
}

/// `atom = c1, c2, ... : weight`
fn value_atom(entry: &RawEntry) -> Result<(Vec<f64>, f64)> {
    let (coords_part, weight_part) = entry.value.rsplit_once(':').ok_or_else(|| {
        parse_err(
            entry.line,
            format!("`{}` is not of the form `coords : weight`", entry.value),
        )
    })?;
    let coords = coords_part
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(entry.line, format!("`{}` is not a number", part.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    let weight = weight_part
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(entry.line, format!("`{}` is not a weight", weight_part.trim())))?;
    Ok((coords, weight))
}

// ---------------------------------------------------------------------------
// Section parsers.
// ---------------------------------------------------------------------------

fn parse_space(doc: &RawDoc) -> Result<StrategySpace> {
    let section = doc.require_section("space")?;
    section.check_keys(&["lower", "upper"])?;
    let lower = value_f64_list(section.require("lower")?)?;
    let upper = value_f64_list(section.require("upper")?)?;
    StrategySpace::new(lower, upper)
}

fn parse_kernel(doc: &RawDoc, space: &StrategySpace) -> Result<PayoffKernel> {
    let section = doc.require_section("kernel")?;
    let form_entry = section.require("form")?;
    let kernel = match form_entry.value.as_str() {
        "linear_2mzw" => {
            section.check_keys(&["form", "bound"])?;
            PayoffKernel::linear_2mzw(space.clone())?
        }
        "harvest_piecewise" => {
            section.check_keys(&["form", "bound"])?;
            PayoffKernel::harvest_piecewise(space.clone())?
        }
        "affine_quadratic" => {
            section.check_keys(&["form", "a", "b", "c", "d", "bound"])?;
            let coeff = |key: &str| -> Result<f64> {
                section.unique(key)?.map_or(Ok(0.0), value_f64)
            };
            PayoffKernel::affine_quadratic(
                space.clone(),
                coeff("a")?,
                coeff("b")?,
                coeff("c")?,
                coeff("d")?,
            )?
        }
        "grid_table" => {
            section.check_keys(&["form", "grid", "row", "bound"])?;
            let grid = value_f64_list(section.require("grid")?)?;
            let rows = section.all("row");
            if rows.is_empty() {
                return Err(parse_err(
                    section.line,
                    "grid_table kernels need one `row` per grid point",
                ));
            }
            let table = rows
                .iter()
                .map(|e| value_f64_list(e))
                .collect::<Result<Vec<Vec<f64>>>>()?;
            PayoffKernel::grid_table(space.clone(), grid, table)?
        }
        other => {
            return Err(parse_err(
                form_entry.line,
                format!("unknown kernel form `{other}`"),
            ))
        }
    };
    match section.unique("bound")? {
        Some(entry) => kernel.with_bound(value_f64(entry)?),
        None => Ok(kernel),
    }
}

fn parse_measure(section: &RawSection, space: &StrategySpace) -> Result<DiscreteMeasure> {
    section.check_keys(&["atom"])?;
    let entries = section.all("atom");
    if entries.is_empty() {
        return Err(parse_err(
            section.line,
            format!("section `{}` has no `atom` entries", section.name),
        ));
    }
    let atoms = entries
        .iter()
        .map(|e| value_atom(e))
        .collect::<Result<Vec<(Vec<f64>, f64)>>>()?;
    DiscreteMeasure::probability(space.clone(), atoms)
}

fn parse_integrator(section: &RawSection) -> Result<IntegratorConfig> {
    section.check_keys(&["method", "dt", "t_end", "record_every", "renormalize"])?;
    let method_entry = section.require("method")?;
    let method = match method_entry.value.as_str() {
        "rk4" => Method::Rk4,
        "exponential" => Method::Exponential,
        other => {
            return Err(parse_err(
                method_entry.line,
                format!("unknown integrator method `{other}`"),
            ))
        }
    };
    let dt = value_f64(section.require("dt")?)?;
    let t_end = value_f64(section.require("t_end")?)?;
    let mut cfg = IntegratorConfig::new(method, dt, t_end);
    if let Some(entry) = section.unique("record_every")? {
        cfg.record_every = value_usize(entry)?;
    }
    if let Some(entry) = section.unique("renormalize")? {
        cfg.renormalize = value_bool(entry)?;
    }
    Ok(cfg)
}

fn parse_neighborhood(section: &RawSection) -> Result<NeighborhoodSpec> {
    section.check_keys(&["epsilon", "n_samples", "mutant_grid", "seed"])?;
    let epsilon = value_f64(section.require("epsilon")?)?;
    let n_samples = value_usize(section.require("n_samples")?)?;
    let mutant_grid = section
        .unique("mutant_grid")?
        .map_or(Ok(3), value_usize)?;
    let seed = section.unique("seed")?.map_or(Ok(0), value_u64)?;
    Ok(NeighborhoodSpec::new(epsilon, n_samples, mutant_grid, seed))
}

fn parse_analyses(doc: &RawDoc) -> Result<Vec<Analysis>> {
    let mut requested = Vec::new();
    for entry in &doc.top {
        if entry.key != "analyses" {
            continue;
        }
        for token in entry.value.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let analysis = Analysis::from_name(token).ok_or_else(|| {
                parse_err(
                    entry.line,
                    format!(
                        "unknown analysis `{token}` (expected one of rest_point, uninvadable, \
                         unbeatable, negdef, certificate, basin)"
                    ),
                )
            })?;
            if !requested.contains(&analysis) {
                requested.push(analysis);
            }
        }
    }
    // Canonical order, independent of how the document listed them.
    Ok(ANALYSIS_ORDER
        .iter()
        .copied()
        .filter(|a| requested.contains(a))
        .collect())
}

const KNOWN_SECTIONS: [&str; 8] = [
    "space",
    "kernel",
    "target",
    "initial",
    "integrator",
    "neighborhood",
    "witness",
    "outputs",
];

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let doc = lex(text)?;
    for section in &doc.sections {
        if !KNOWN_SECTIONS.contains(&section.name.as_str()) {
            return Err(parse_err(
                section.line,
                format!("unknown section `{}`", section.name),
            ));
        }
    }
    let mut name = "scenario".to_string();
    for entry in &doc.top {
        match entry.key.as_str() {
            "name" => {
                if !is_ident(&entry.value) {
                    return Err(parse_err(
                        entry.line,
                        format!("scenario name `{}` is not a plain identifier", entry.value),
                    ));
                }
                name = entry.value.clone();
            }
            "analyses" => {}
            other => {
                return Err(parse_err(
                    entry.line,
                    format!("unknown top-level key `{other}`"),
                ))
            }
        }
    }

    let space = parse_space(&doc)?;
    let kernel = parse_kernel(&doc, &space)?;
    let target = parse_measure(doc.require_section("target")?, &space)?;
    let initial = doc
        .section("initial")
        .map(|s| parse_measure(s, &space))
        .transpose()?;
    let integrator = doc.section("integrator").map(parse_integrator).transpose()?;
    let neighborhood = doc
        .section("neighborhood")
        .map(parse_neighborhood)
        .transpose()?;
    let witness = doc
        .section("witness")
        .map(|s| parse_measure(s, &space))
        .transpose()?;
    let analyses = parse_analyses(&doc)?;

    let (mut trajectory_csv, mut report) = (
        format!("{name}_trajectory.csv"),
        format!("{name}_report.json"),
    );
    if let Some(section) = doc.section("outputs") {
        section.check_keys(&["trajectory_csv", "report"])?;
        if let Some(entry) = section.unique("trajectory_csv")? {
            trajectory_csv = entry.value.clone();
        }
        if let Some(entry) = section.unique("report")? {
            report = entry.value.clone();
        }
    }

    let cfg = ScenarioConfig {
        name,
        space,
        kernel,
        target,
        initial,
        integrator,
        neighborhood,
        witness,
        analyses,
        outputs: OutputSpec {
            trajectory_csv,
            report,
        },
    };
    validate_config(&cfg)?;
    Ok(cfg)
}

/// Cross-field invariants, enforced at parse time so a config that loads is
/// a config that runs.
fn validate_config(cfg: &ScenarioConfig) -> Result<()> {
    if let Some(integrator) = &cfg.integrator {
        integrator.validate(cfg.kernel.bound())?;
    }
    if let Some(neighborhood) = &cfg.neighborhood {
        neighborhood.validate_for(&cfg.target)?;
    }
    if let Some(initial) = &cfg.initial {
        if !cfg.target.support_within(initial) {
            return Err(Error::Validation {
                field: "initial",
                message: "the initial state must carry every atom of the target".into(),
            });
        }
        if cfg.integrator.is_none() {
            return Err(Error::Validation {
                field: "initial",
                message: "an initial state is useless without an `integrator` section".into(),
            });
        }
    }
    let wants = |a: Analysis| cfg.analyses.contains(&a);
    let sampler_requested =
        wants(Analysis::Uninvadable) || wants(Analysis::Unbeatable) || wants(Analysis::Negdef);
    if (sampler_requested || wants(Analysis::Basin)) && cfg.neighborhood.is_none() {
        return Err(Error::Validation {
            field: "analyses",
            message: "sampling analyses need a `neighborhood` section".into(),
        });
    }
    if (wants(Analysis::Basin) || wants(Analysis::Certificate)) && cfg.integrator.is_none() {
        return Err(Error::Validation {
            field: "analyses",
            message: "basin and certificate analyses need an `integrator` section".into(),
        });
    }
    if wants(Analysis::Certificate) && cfg.initial.is_none() && !wants(Analysis::Basin) {
        return Err(Error::Validation {
            field: "analyses",
            message: "the certificate needs trajectories: give an `initial` state or request \
                      `basin`"
                .into(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical serialization.
// ---------------------------------------------------------------------------

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")
}

fn push_measure(out: &mut String, name: &str, measure: &DiscreteMeasure) {
    let _ = writeln!(out, "{name} {{");
    for (point, weight) in measure.atoms() {
        let _ = writeln!(out, "    atom = {} : {}", fmt_list(point.coords()), fmt_f64(*weight));
    }
    let _ = writeln!(out, "}}");
}

/// Renders a config to the canonical document form: fixed section order,
/// every resolved default spelled out. `parse_scenario` inverts it exactly.
pub fn serialize_scenario(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", cfg.name);
    let _ = writeln!(out, "space {{");
    let _ = writeln!(out, "    lower = {}", fmt_list(cfg.space.lower()));
    let _ = writeln!(out, "    upper = {}", fmt_list(cfg.space.upper()));
    let _ = writeln!(out, "}}");

    let _ = writeln!(out, "kernel {{");
    match cfg.kernel.form() {
        KernelForm::Linear2Mzw => {
            let _ = writeln!(out, "    form = linear_2mzw");
        }
        KernelForm::HarvestPiecewise => {
            let _ = writeln!(out, "    form = harvest_piecewise");
        }
        KernelForm::AffineQuadratic { a, b, c, d } => {
            let _ = writeln!(out, "    form = affine_quadratic");
            let _ = writeln!(out, "    a = {}", fmt_f64(*a));
            let _ = writeln!(out, "    b = {}", fmt_f64(*b));
            let _ = writeln!(out, "    c = {}", fmt_f64(*c));
            let _ = writeln!(out, "    d = {}", fmt_f64(*d));
        }
        KernelForm::GridTable { grid, table } => {
            let _ = writeln!(out, "    form = grid_table");
            let _ = writeln!(out, "    grid = {}", fmt_list(grid));
            for row in table {
                let _ = writeln!(out, "    row = {}", fmt_list(row));
            }
        }
    }
    let _ = writeln!(out, "    bound = {}", fmt_f64(cfg.kernel.bound()));
    let _ = writeln!(out, "}}");

    push_measure(&mut out, "target", &cfg.target);
    if let Some(initial) = &cfg.initial {
        push_measure(&mut out, "initial", initial);
    }
    if let Some(integrator) = &cfg.integrator {
        let _ = writeln!(out, "integrator {{");
        let method = match integrator.method {
            Method::Rk4 => "rk4",
            Method::Exponential => "exponential",
        };
        let _ = writeln!(out, "    method = {method}");
        let _ = writeln!(out, "    dt = {}", fmt_f64(integrator.dt));
        let _ = writeln!(out, "    t_end = {}", fmt_f64(integrator.t_end));
        let _ = writeln!(out, "    record_every = {}", integrator.record_every);
        let _ = writeln!(out, "    renormalize = {}", integrator.renormalize);
        let _ = writeln!(out, "}}");
    }
    if let Some(neighborhood) = &cfg.neighborhood {
        let _ = writeln!(out, "neighborhood {{");
        let _ = writeln!(out, "    epsilon = {}", fmt_f64(neighborhood.epsilon));
        let _ = writeln!(out, "    n_samples = {}", neighborhood.n_samples);
        let _ = writeln!(out, "    mutant_grid = {}", neighborhood.mutant_grid);
        let _ = writeln!(out, "    seed = {}", neighborhood.seed);
        let _ = writeln!(out, "}}");
    }
    if let Some(witness) = &cfg.witness {
        push_measure(&mut out, "witness", witness);
    }
    let names: Vec<&str> = cfg.analyses.iter().map(|a| a.name()).collect();
    let _ = writeln!(out, "analyses = {}", names.join(", "));
    let _ = writeln!(out, "outputs {{");
    let _ = writeln!(out, "    trajectory_csv = {}", cfg.outputs.trajectory_csv);
    let _ = writeln!(out, "    report = {}", cfg.outputs.report);
    let _ = writeln!(out, "}}");
    out
}

// ---------------------------------------------------------------------------
// Builtin scenarios.
// ---------------------------------------------------------------------------

/// Builtin scenarios: `(name, one-line description, document)`.
pub const BUILTINS: [(&str, &str, &str); 5] = [
    (
        "example1",
        "harvest-timing kernel; equalized rows certify the three-atom rest point (exit 0)",
        r#"
name = example1
space {
    lower = 0
    upper = 1
}
kernel {
    form = harvest_piecewise
}
target {
    atom = 0 : 0.3333333333333333
    atom = 0.5 : 0.3333333333333333
    atom = 1 : 0.3333333333333333
}
analyses = rest_point
"#,
    ),
    (
        "example2",
        "anticoordination kernel; uninvadable in the samples yet not negative definite, the \
         witness exhibits the flat direction (exit 1 by design)",
        r#"
name = example2
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
neighborhood {
    epsilon = 0.5
    n_samples = 100
    mutant_grid = 3
    seed = 2020
}
witness {
    atom = -0.5 : 0.5
    atom = 0.5 : 0.5
}
analyses = rest_point, uninvadable, unbeatable, negdef
"#,
    ),
    (
        "example2_basin",
        "anticoordination kernel; fifty sampled starts contract onto the balanced pair and the \
         entropy certificate holds (exit 0)",
        r#"
name = example2_basin
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
initial {
    atom = -1 : 0.6
    atom = 1 : 0.4
}
integrator {
    method = rk4
    dt = 0.01
    t_end = 15
    record_every = 10
}
neighborhood {
    epsilon = 0.2
    n_samples = 50
    mutant_grid = 3
    seed = 2021
}
analyses = rest_point, certificate, basin
"#,
    ),
    (
        "coordination_zw",
        "coordination kernel; the balanced pair is a rest point but beatable, trajectories flee \
         and the certificate fails (exit 1 by design)",
        r#"
name = coordination_zw
space {
    lower = -1
    upper = 1
}
kernel {
    form = affine_quadratic
    d = 1
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
initial {
    atom = -1 : 0.45
    atom = 1 : 0.55
}
integrator {
    method = rk4
    dt = 0.01
    t_end = 15
    record_every = 10
}
neighborhood {
    epsilon = 0.5
    n_samples = 80
    mutant_grid = 3
    seed = 2022
}
analyses = rest_point, unbeatable, certificate
"#,
    ),
    (
        "negdef_mzw",
        "pure anticoordination kernel; margins and the definiteness estimate stay positive and \
         the designated witness ratio sits at one (exit 0)",
        r#"
name = negdef_mzw
space {
    lower = -1
    upper = 1
}
kernel {
    form = affine_quadratic
    d = -1
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
neighborhood {
    epsilon = 0.5
    n_samples = 100
    mutant_grid = 3
    seed = 2023
}
witness {
    atom = -1 : 0.45
    atom = 1 : 0.55
}
analyses = rest_point, uninvadable, unbeatable, negdef
"#,
    ),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(name, _, _)| *name).collect()
}

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, text)| *text)
}

pub fn builtin_description(name: &str) -> Option<&'static str> {
    BUILTINS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, description, _)| *description)
}

// ---------------------------------------------------------------------------
// Reports and artifacts.
// ---------------------------------------------------------------------------

/// Every tolerance a verdict in the report was judged against.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub rest_tol: f64,
    pub margin_tol: f64,
    pub c_tol: f64,
    pub cert_nonneg_slack: f64,
    pub cert_comparison_slack: f64,
    pub mass_tol: f64,
    pub merge_tol: f64,
    pub drop_tol: f64,
}

impl Tolerances {
    fn current() -> Self {
        Tolerances {
            rest_tol: REST_TOL,
            margin_tol: MARGIN_TOL,
            c_tol: C_TOL,
            cert_nonneg_slack: CERT_NONNEG_SLACK,
            cert_comparison_slack: CERT_COMPARISON_SLACK,
            mass_tol: MASS_TOL,
            merge_tol: MERGE_TOL,
            drop_tol: DROP_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestPointReport {
    pub residual: f64,
    pub tol: f64,
    pub verdict: bool,
}

/// One analysis slot: either its report or the error that stopped it.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T> Outcome<T> {
    fn ok(report: T) -> Self {
        Outcome {
            report: Some(report),
            error: None,
        }
    }

    fn failed(error: &Error) -> Self {
        Outcome {
            report: None,
            error: Some(error.to_string()),
        }
    }
}

/// Summary of the single simulation run from the `initial` state.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub n_records: usize,
    pub final_time: f64,
    pub final_distance: f64,
    pub final_entropy: f64,
    pub max_mass_drift: f64,
    pub trajectory_csv: String,
    pub atom_legend: String,
}

/// The full report written next to the trajectory CSV; embeds the resolved
/// config so the run can be reproduced from this document alone.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    /// `0` all requested verdicts passed, `1` at least one failed, `2` at
    /// least one analysis could not run.
    pub exit_status: u8,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rest_point: Option<Outcome<RestPointReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uninvadable: Option<Outcome<MarginReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unbeatable: Option<Outcome<MarginReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negdef: Option<Outcome<NegdefReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Outcome<SimulationReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Outcome<CertificateReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basin: Option<Outcome<BasinReport>>,
    /// Canonical form of the resolved scenario.
    pub scenario: String,
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

fn csv_cell(x: f64) -> String {
    format!("{x:.16e}")
}

fn render_trajectory_csv(trajectory: &Trajectory) -> String {
    let n = trajectory.states[0].len();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",w_{i}");
    }
    out.push_str(",V,dist,mass_err\n");
    let vs = trajectory
        .v_values
        .as_ref()
        .expect("simulation runs with the target attached");
    let ds = trajectory
        .distances
        .as_ref()
        .expect("simulation runs with the target attached");
    for (i, t) in trajectory.times.iter().enumerate() {
        let _ = write!(out, "{}", csv_cell(*t));
        for (_, w) in trajectory.states[i].atoms() {
            let _ = write!(out, ",{}", csv_cell(*w));
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            csv_cell(vs[i]),
            csv_cell(ds[i]),
            csv_cell(trajectory.mass_errors[i])
        );
    }
    out
}

/// Maps the `w_i` CSV columns back to strategy coordinates.
#[derive(Debug, Clone, Serialize)]
struct AtomLegend<'a> {
    columns: Vec<String>,
    atoms: Vec<&'a [f64]>,
}

fn render_atom_legend(trajectory: &Trajectory) -> String {
    let state = &trajectory.states[0];
    let legend = AtomLegend {
        columns: (1..=state.len()).map(|i| format!("w_{i}")).collect(),
        atoms: state.atoms().iter().map(|(p, _)| p.coords()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&legend).expect("legend serializes");
    text.push('\n');
    text
}

fn legend_path(csv_path: &str) -> String {
    match csv_path.strip_suffix(".csv") {
        Some(stem) => format!("{stem}_atoms.json"),
        None => format!("{csv_path}_atoms.json"),
    }
}

/// Runs every requested analysis of a validated scenario, writes the
/// artifacts under `out_dir`, and returns the report (which includes the
/// exit status; the binary turns it into the process exit code).
///
/// Analysis failures are embedded in the report and flip the status to 2;
/// only unwritable outputs abort the run with a hard error.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let wants = |a: Analysis| cfg.analyses.contains(&a);
    let mut any_failed = false;
    let mut any_error = false;

    let rest_point = wants(Analysis::RestPoint).then(|| {
        match rest_point_residual(&cfg.kernel, &cfg.target) {
            Ok(residual) => {
                let verdict = residual <= REST_TOL;
                any_failed |= !verdict;
                Outcome::ok(RestPointReport {
                    residual,
                    tol: REST_TOL,
                    verdict,
                })
            }
            Err(e) => {
                any_error = true;
                Outcome::failed(&e)
            }
        }
    });

    let neighborhood = cfg.neighborhood.as_ref();
    let mut margin_outcome = |run: fn(
        &PayoffKernel,
        &DiscreteMeasure,
        &NeighborhoodSpec,
    ) -> Result<MarginReport>|
     -> Outcome<MarginReport> {
        match run(
            &cfg.kernel,
            &cfg.target,
            neighborhood.expect("validated: sampler analyses have a neighborhood"),
        ) {
            Ok(report) => {
                any_failed |= !report.verdict;
                Outcome::ok(report)
            }
            Err(e) => {
                any_error = true;
                Outcome::failed(&e)
            }
        }
    };
    let uninvadable =
        wants(Analysis::Uninvadable).then(|| margin_outcome(test_strong_uninvadability));
    let unbeatable = wants(Analysis::Unbeatable).then(|| margin_outcome(test_strong_unbeatability));

    let negdef = wants(Analysis::Negdef).then(|| {
        match estimate_negdef_constant(
            &cfg.kernel,
            &cfg.target,
            neighborhood.expect("validated: sampler analyses have a neighborhood"),
            cfg.witness.as_ref(),
        ) {
            Ok(report) => {
                any_failed |= !report.verdict;
                Outcome::ok(report)
            }
            Err(e) => {
                any_error = true;
                Outcome::failed(&e)
            }
        }
    });

    // The single simulation from `initial`, which also produces the CSV.
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut simulation: Option<Outcome<SimulationReport>> = None;
    if let (Some(initial), Some(integrator)) = (&cfg.initial, &cfg.integrator) {
        match integrate(&cfg.kernel, initial, integrator, Some(&cfg.target)) {
            Ok(trajectory) => {
                let csv_name = cfg.outputs.trajectory_csv.clone();
                let legend_name = legend_path(&csv_name);
                write_text(&out_dir.join(&csv_name), &render_trajectory_csv(&trajectory))?;
                write_text(&out_dir.join(&legend_name), &render_atom_legend(&trajectory))?;
                let ds = trajectory.distances.as_ref().expect("target attached");
                let vs = trajectory.v_values.as_ref().expect("target attached");
                simulation = Some(Outcome::ok(SimulationReport {
                    n_records: trajectory.len(),
                    final_time: *trajectory.times.last().expect("nonempty"),
                    final_distance: *ds.last().expect("nonempty"),
                    final_entropy: *vs.last().expect("nonempty"),
                    max_mass_drift: trajectory
                        .mass_errors
                        .iter()
                        .fold(0.0f64, |m, e| m.max(*e)),
                    trajectory_csv: csv_name,
                    atom_legend: legend_name,
                }));
                trajectories.push(trajectory);
            }
            Err(e) => {
                any_error = true;
                simulation = Some(Outcome::failed(&e));
            }
        }
    }

    // Basin runs before the certificate so the certificate can inspect its
    // trajectories alongside the simulation's.
    let basin = wants(Analysis::Basin).then(|| {
        match basin_probe(
            &cfg.kernel,
            &cfg.target,
            neighborhood.expect("validated: basin has a neighborhood"),
            cfg.integrator
                .as_ref()
                .expect("validated: basin has an integrator"),
        ) {
            Ok((report, mut runs)) => {
                trajectories.append(&mut runs);
                Outcome::ok(report)
            }
            Err(e) => {
                any_error = true;
                Outcome::failed(&e)
            }
        }
    });

    let certificate = wants(Analysis::Certificate).then(|| {
        if trajectories.is_empty() {
            any_error = true;
            return Outcome::failed(&Error::MissingDiagnostics);
        }
        match verify_lyapunov_certificate(&cfg.kernel, &cfg.target, &trajectories) {
            Ok(report) => {
                any_failed |= !report.verdict;
                Outcome::ok(report)
            }
            Err(e) => {
                any_error = true;
                Outcome::failed(&e)
            }
        }
    });

    let exit_status = if any_error {
        2
    } else if any_failed {
        1
    } else {
        0
    };
    let report = RunReport {
        name: cfg.name.clone(),
        exit_status,
        tolerances: Tolerances::current(),
        rest_point,
        uninvadable,
        unbeatable,
        negdef,
        simulation,
        certificate,
        basin,
        scenario: serialize_scenario(cfg),
    };
    let mut report_text = serde_json::to_string_pretty(&report).expect("report serializes");
    report_text.push('\n');
    write_text(&out_dir.join(&cfg.outputs.report), &report_text)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn parse_builtin(name: &str) -> ScenarioConfig {
        parse_scenario(builtin_text(name).unwrap()).unwrap()
    }

    #[test]
    fn builtins_parse_and_round_trip() {
        for (name, _, text) in BUILTINS {
            let cfg = parse_scenario(text).unwrap_or_else(|e| panic!("builtin {name}: {e}"));
            assert_eq!(cfg.name, name);
            let rendered = serialize_scenario(&cfg);
            let reparsed = parse_scenario(&rendered)
                .unwrap_or_else(|e| panic!("round-trip of {name}: {e}\n{rendered}"));
            assert_eq!(reparsed, cfg, "round-trip changed builtin {name}");
            assert_eq!(serialize_scenario(&reparsed), rendered);
        }
    }

    #[test]
    fn example2_builds_the_documented_setup() {
        let cfg = parse_builtin("example2");
        assert_eq!(*cfg.kernel.form(), KernelForm::Linear2Mzw);
        assert_eq!(cfg.space, StrategySpace::interval(-1.0, 1.0).unwrap());
        let atoms = cfg.target.atoms();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].0.x(), -1.0);
        assert_eq!(atoms[0].1, 0.5);
        assert_eq!(atoms[1].0.x(), 1.0);
        assert_eq!(atoms[1].1, 0.5);
        assert_eq!(
            cfg.analyses,
            vec![
                Analysis::RestPoint,
                Analysis::Uninvadable,
                Analysis::Unbeatable,
                Analysis::Negdef
            ]
        );
        assert!(cfg.witness.is_some());
    }

    #[test]
    fn missing_kernel_section_is_a_parse_error() {
        let text = "\nspace {\n    lower = 0\n    upper = 1\n}\ntarget {\n    atom = 0 : 1\n}\n";
        let err = parse_scenario(text).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("kernel"), "{message}"),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn oversized_radius_is_rejected_at_parse_time() {
        let text = r#"
name = bad_radius
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
neighborhood {
    epsilon = 1.5
    n_samples = 10
}
analyses = unbeatable
"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(
            matches!(err, Error::InvalidEpsilon { epsilon, limit } if epsilon == 1.5 && limit == 1.0),
            "{err}"
        );
    }

    #[test]
    fn oversized_step_is_rejected_at_parse_time() {
        let text = r#"
name = bad_step
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
initial {
    atom = -1 : 0.6
    atom = 1 : 0.4
}
integrator {
    method = rk4
    dt = 0.05
    t_end = 1
}
"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(matches!(err, Error::StepSizeTooLarge { .. }), "{err}");
    }

    #[test]
    fn analysis_prerequisites_are_enforced() {
        let base = r#"
name = incomplete
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
"#;
        let sampler = format!("{base}analyses = uninvadable\n");
        let err = parse_scenario(&sampler).unwrap_err();
        assert!(
            matches!(err, Error::Validation { field: "analyses", .. }),
            "{err}"
        );
        let certificate = format!("{base}analyses = certificate\n");
        let err = parse_scenario(&certificate).unwrap_err();
        assert!(
            matches!(err, Error::Validation { field: "analyses", .. }),
            "{err}"
        );
    }

    #[test]
    fn initial_must_cover_the_target_support() {
        let text = r#"
name = missing_support
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.5
    atom = 1 : 0.5
}
initial {
    atom = -1 : 0.5
    atom = 0 : 0.5
}
integrator {
    method = rk4
    dt = 0.01
    t_end = 1
}
"#;
        let err = parse_scenario(text).unwrap_err();
        assert!(
            matches!(err, Error::Validation { field: "initial", .. }),
            "{err}"
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "name = x\nspace {\n    lower = 0\n    upper = one\n}\n";
        match parse_scenario(text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("one"), "{message}");
            }
            other => panic!("expected parse error, got {other}"),
        }
        let text = "nonsense line\n";
        match parse_scenario(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other}"),
        }
        let text = "analyses = rest_point, warp_drive\n\
                    space {\n    lower = 0\n    upper = 1\n}\n\
                    kernel {\n    form = harvest_piecewise\n}\n\
                    target {\n    atom = 0 : 1\n}\n";
        match parse_scenario(text).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("warp_drive"), "{message}");
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn grid_table_kernels_round_trip() {
        let text = r#"
name = tabulated
space {
    lower = -1
    upper = 1
}
kernel {
    form = grid_table
    grid = -1, 0, 1
    row = -1, 0, 0
    row = 0, -1, 0
    row = 0, 0, -1
}
target {
    atom = -1 : 0.25
    atom = 0 : 0.5
    atom = 1 : 0.25
}
analyses = rest_point
"#;
        let cfg = parse_scenario(text).unwrap();
        match cfg.kernel.form() {
            KernelForm::GridTable { grid, table } => {
                assert_eq!(grid, &vec![-1.0, 0.0, 1.0]);
                assert_eq!(table.len(), 3);
            }
            other => panic!("wrong form {other:?}"),
        }
        assert_eq!(cfg.kernel.bound(), 1.0);
        let reparsed = parse_scenario(&serialize_scenario(&cfg)).unwrap();
        assert_eq!(reparsed, cfg);
    }

    #[test]
    fn multidimensional_spaces_parse() {
        let text = r#"
name = planar
space {
    lower = 0, -1
    upper = 1, 1
}
kernel {
    form = affine_quadratic
    d = -1
}
target {
    atom = 0, 0 : 0.5
    atom = 1, 1 : 0.5
}
analyses =
"#;
        let cfg = parse_scenario(text).unwrap();
        assert_eq!(cfg.space.dimension(), 2);
        assert_eq!(cfg.target.atoms()[1].0.coords(), &[1.0, 1.0]);
        assert!(cfg.analyses.is_empty());
        let reparsed = parse_scenario(&serialize_scenario(&cfg)).unwrap();
        assert_eq!(reparsed, cfg);
    }

    #[test]
    fn example1_reports_an_exact_rest_point() {
        let cfg = parse_builtin("example1");
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        assert_eq!(report.exit_status, 0);
        let rest = report.rest_point.unwrap().report.unwrap();
        assert_eq!(rest.residual, 0.0);
        assert!(rest.verdict);
        assert!(dir.path().join("example1_report.json").exists());
        // No simulation was configured, so no CSV appears.
        assert!(!dir.path().join("example1_trajectory.csv").exists());
    }

    #[test]
    fn example2_fails_on_definiteness_alone() {
        let cfg = parse_builtin("example2");
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        assert_eq!(report.exit_status, 1);
        assert!(report.rest_point.unwrap().report.unwrap().verdict);
        let uninvadable = report.uninvadable.unwrap().report.unwrap();
        assert!(uninvadable.verdict, "sampled margins all positive");
        assert!(report.unbeatable.unwrap().report.unwrap().verdict);
        let negdef = report.negdef.unwrap().report.unwrap();
        assert!(!negdef.verdict);
        assert_eq!(negdef.witness_ratio, Some(0.0));
        assert_eq!(negdef.c_estimate, Some(0.0));
    }

    #[test]
    fn basin_builtin_certifies_and_writes_artifacts() {
        let cfg = parse_builtin("example2_basin");
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        assert_eq!(report.exit_status, 0);
        let certificate = report.certificate.unwrap().report.unwrap();
        assert!(certificate.verdict);
        assert_eq!(certificate.monotone_fraction, 1.0);
        assert_eq!(certificate.n_trajectories, 51);
        let basin = report.basin.unwrap().report.unwrap();
        assert_eq!(basin.n_runs, 50);
        assert!(basin.max_excursion < 0.5);
        let simulation = report.simulation.unwrap().report.unwrap();
        assert!(simulation.final_distance < 1e-3);
        assert!(simulation.max_mass_drift < 1e-9);
        for artifact in [
            "example2_basin_report.json",
            "example2_basin_trajectory.csv",
            "example2_basin_trajectory_atoms.json",
        ] {
            assert!(dir.path().join(artifact).exists(), "{artifact} missing");
        }
        let csv = fs::read_to_string(dir.path().join("example2_basin_trajectory.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,w_1,w_2,V,dist,mass_err");
        assert_eq!(csv.lines().count(), 152, "header plus 151 records");
    }

    #[test]
    fn coordination_builtin_fails_by_design() {
        let cfg = parse_builtin("coordination_zw");
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        assert_eq!(report.exit_status, 1);
        assert!(report.rest_point.unwrap().report.unwrap().verdict);
        assert!(!report.unbeatable.unwrap().report.unwrap().verdict);
        let certificate = report.certificate.unwrap().report.unwrap();
        assert!(!certificate.verdict);
        assert!(certificate.monotone_fraction < 1.0);
        let simulation = report.simulation.unwrap().report.unwrap();
        assert!(simulation.final_distance > 0.5);
    }

    #[test]
    fn runs_are_byte_identical() {
        let cfg = parse_builtin("example2_basin");
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        run_scenario(&cfg, dir_a.path()).unwrap();
        run_scenario(&cfg, dir_b.path()).unwrap();
        for artifact in [
            "example2_basin_report.json",
            "example2_basin_trajectory.csv",
            "example2_basin_trajectory_atoms.json",
        ] {
            let a = fs::read(dir_a.path().join(artifact)).unwrap();
            let b = fs::read(dir_b.path().join(artifact)).unwrap();
            assert_eq!(a, b, "{artifact} differs between identical runs");
        }
    }

    #[test]
    fn analysis_failures_exit_with_status_two() {
        let text = r#"
name = not_a_rest_point
space {
    lower = -1
    upper = 1
}
kernel {
    form = linear_2mzw
}
target {
    atom = -1 : 0.6
    atom = 1 : 0.4
}
neighborhood {
    epsilon = 0.5
    n_samples = 10
}
analyses = uninvadable
"#;
        let cfg = parse_scenario(text).unwrap();
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        assert_eq!(report.exit_status, 2);
        let outcome = report.uninvadable.unwrap();
        assert!(outcome.report.is_none());
        assert!(outcome.error.unwrap().contains("rest point"));
    }

    #[test]
    fn reports_reproduce_their_scenario() {
        let cfg = parse_builtin("example2");
        let dir = tempdir().unwrap();
        let report = run_scenario(&cfg, dir.path()).unwrap();
        let reparsed = parse_scenario(&report.scenario).unwrap();
        assert_eq!(reparsed, cfg);
    }
}
