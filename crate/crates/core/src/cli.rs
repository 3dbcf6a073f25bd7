//! Command runners and deterministic report assembly for the `wdvv` binary.
//!
//! Every command produces a report in one of three formats (json, csv, md)
//! plus a process exit code: 0 for pass, 1 for verification failure, 2 for
//! usage/config errors. Reports are fully determined by the config and seed.

use crate::dunkl::DunklRun;
use crate::exactform::{
    coupling_tensor, extract_canonical_constant, multiplicity_polynomial, table_compare,
};
use crate::prepotential::sample_chamber_point;
use crate::rat::{format_rat, rat_i, rat_to_f64, Rat};
use crate::report::{csv_field, fmt_f64, Json};
use crate::rootsystems::{build_root_system, Family, RootSystem, RootSystemSpec};
use crate::wdvv::{gamma_from_c, verify_at_points, GammaHypothesis, DEFINITIVE_FAILURE};
use num_complex::Complex64;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Table,
    Verify,
    Dunkl,
    GammaScan,
    Cpoly,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Command::Table => "table",
            Command::Verify => "verify",
            Command::Dunkl => "dunkl",
            Command::GammaScan => "gamma-scan",
            Command::Cpoly => "cpoly",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            _ => Err(format!("unknown format {s:?} (expected json, csv, or md)")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Md => "md",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisChoice {
    Half,
    Full,
    Scan,
}

impl std::str::FromStr for HypothesisChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "half" => Ok(HypothesisChoice::Half),
            "full" => Ok(HypothesisChoice::Full),
            "scan" => Ok(HypothesisChoice::Scan),
            _ => Err(format!(
                "unknown gamma hypothesis {s:?} (expected half, full, or scan)"
            )),
        }
    }
}

impl std::fmt::Display for HypothesisChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            HypothesisChoice::Half => "half",
            HypothesisChoice::Full => "full",
            HypothesisChoice::Scan => "scan",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad selector, flags, or multiplicity spec: exit code 2.
    #[error("usage error: {0}")]
    Usage(String),
    /// Verification-path failure (singular pivot, sampling exhausted, ...):
    /// exit code 1.
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// The raw selector string, echoed in the report.
    pub selector: String,
    pub systems: Vec<RootSystemSpec>,
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    pub tolerance: f64,
    pub hypothesis: HypothesisChoice,
    /// Named per-orbit multiplicities; empty means all ones.
    pub multiplicities: Vec<(String, Rat)>,
    pub format: Format,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: String,
    pub exit_code: i32,
}

/// Every Table 1 column at ranks 1..=6 (classical cap), plus G2.
pub fn all_systems() -> Vec<RootSystemSpec> {
    let mut v = Vec::new();
    for n in 1..=6 {
        v.push(RootSystemSpec::new(Family::A, n));
    }
    for n in 2..=6 {
        v.push(RootSystemSpec::new(Family::B, n));
    }
    for n in 2..=6 {
        v.push(RootSystemSpec::new(Family::C, n));
    }
    for n in 3..=6 {
        v.push(RootSystemSpec::new(Family::D, n));
    }
    for n in 6..=8 {
        v.push(RootSystemSpec::new(Family::E, n));
    }
    v.push(RootSystemSpec::new(Family::F, 4));
    v.push(RootSystemSpec::new(Family::G, 2));
    v
}

/// Parses the `--system` selector: "all" or one system like "B2".
pub fn parse_selector(s: &str) -> Result<Vec<RootSystemSpec>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(all_systems());
    }
    let spec: RootSystemSpec = s.parse().map_err(CliError::Usage)?;
    if !spec.is_admissible() {
        return Err(CliError::Usage(format!(
            "{spec}: {}",
            RootSystemSpec::rank_constraint(spec.family)
        )));
    }
    Ok(vec![spec])
}

/// Parses `--k short=2,long=3/2` into named rationals.
pub fn parse_multiplicities(s: &str) -> Result<Vec<(String, Rat)>, CliError> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("bad multiplicity {part:?} (expected orbit=p/q)"))
        })?;
        let value = crate::rat::parse_rat(value).ok_or_else(|| {
            CliError::Usage(format!("bad multiplicity value {value:?} (expected p/q)"))
        })?;
        out.push((name.trim().to_string(), value));
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty multiplicity list".into()));
    }
    Ok(out)
}

fn build(spec: RootSystemSpec) -> Result<RootSystem, CliError> {
    build_root_system(spec).map_err(|e| CliError::Run(format!("{spec}: {e}")))
}

/// Per-orbit multiplicities for one system; unnamed orbits default to 1.
fn resolve_k(rs: &RootSystem, named: &[(String, Rat)]) -> Result<Vec<Rat>, CliError> {
    let names = rs.orbit_names();
    let mut out = vec![rat_i(1); names.len()];
    for (name, value) in named {
        let idx = names
            .iter()
            .position(|n| *n == name.as_str())
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "{}: unknown orbit {name:?} (orbits: {})",
                    rs.spec,
                    names.join(", ")
                ))
            })?;
        out[idx] = value.clone();
    }
    Ok(out)
}

/// Exact canonical constant for the given multiplicities (rank >= 2).
fn oracle_c(rs: &RootSystem, k: &[Rat]) -> Result<Rat, CliError> {
    let run = |msg: String| CliError::Run(msg);
    if k.iter().all(|x| *x == rat_i(1)) {
        let ct = coupling_tensor(rs, k).map_err(|e| run(format!("{}: {e}", rs.spec)))?;
        Ok(extract_canonical_constant(&ct, &rs.projector)
            .map_err(|e| run(format!("{}: {e}", rs.spec)))?
            .c)
    } else {
        Ok(multiplicity_polynomial(rs)
            .map_err(|e| run(format!("{}: {e}", rs.spec)))?
            .evaluate(k))
    }
}

struct CommandOutput {
    records: Vec<Json>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    /// Markdown layout when it differs from the CSV layout.
    md: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    all_pass: bool,
}

pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    if config.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if !(config.margin > 0.0) {
        return Err(CliError::Usage("--margin must be positive".into()));
    }
    if !(config.tolerance > 0.0) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let out = match config.command {
        Command::Table => run_table(config)?,
        Command::Verify => run_verify(config)?,
        Command::Dunkl => run_dunkl(config)?,
        Command::GammaScan => run_gamma_scan(config)?,
        Command::Cpoly => run_cpoly(config)?,
    };
    let report = match config.format {
        Format::Json => render_json(config, &out),
        Format::Csv => render_csv(&out.header, &out.rows),
        Format::Md => {
            let (header, rows) = match &out.md {
                Some((h, r)) => (h.clone(), r.clone()),
                None => (out.header.clone(), out.rows.clone()),
            };
            render_md(&header, &rows)
        }
    };
    Ok(RunOutcome {
        report,
        exit_code: if out.all_pass { 0 } else { 1 },
    })
}

fn render_json(config: &RunConfig, out: &CommandOutput) -> String {
    let multiplicities = if config.multiplicities.is_empty() {
        Json::Null
    } else {
        Json::Arr(
            config
                .multiplicities
                .iter()
                .map(|(name, v)| {
                    Json::Obj(vec![
                        ("orbit", Json::Str(name.clone())),
                        ("value", Json::rat(v)),
                    ])
                })
                .collect(),
        )
    };
    let config_json = Json::Obj(vec![
        ("system", Json::Str(config.selector.clone())),
        ("samples", Json::int(config.samples as i64)),
        ("seed", Json::int(config.seed as i64)),
        ("margin", Json::num(config.margin)),
        ("tolerance", Json::num(config.tolerance)),
        ("gamma_hypothesis", Json::Str(config.hypothesis.to_string())),
        ("multiplicities", multiplicities),
        ("format", Json::Str(config.format.to_string())),
    ]);
    Json::Obj(vec![
        ("schema_version", Json::Str(SCHEMA_VERSION.into())),
        ("command", Json::Str(config.command.to_string())),
        ("config", config_json),
        ("records", Json::Arr(out.records.clone())),
        ("pass", Json::Bool(out.all_pass)),
    ])
    .render()
}

fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    text
}

fn render_md(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut text = format!("| {} |\n", header.join(" | "));
    text.push_str(&format!(
        "|{}\n",
        header.iter().map(|_| " --- |").collect::<String>()
    ));
    for row in rows {
        text.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    text
}

fn opt_rat_str(x: &Option<Rat>) -> String {
    match x {
        Some(v) => format_rat(v),
        None => "-".into(),
    }
}

fn gamma_json(g: Complex64) -> Json {
    Json::Obj(vec![("re", Json::num(g.re)), ("im", Json::num(g.im))])
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

fn run_table(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut md_rows = Vec::new();
    let mut all_pass = true;
    for &spec in &config.systems {
        let rs = build(spec)?;
        let k = vec![rat_i(1); rs.orbit_count()];
        let ct = coupling_tensor(&rs, &k).map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
        let (c_oracle, residual, c_table, verdict) = if rs.rank >= 2 {
            let res = extract_canonical_constant(&ct, &rs.projector)
                .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
            let cmp = table_compare(&spec, &res.c);
            (
                Some(res.c),
                res.proportionality_residual,
                cmp.table_value,
                cmp.verdict.to_string(),
            )
        } else {
            // rank 1: the coupling tensor vanishes identically and c is
            // undefined, so there is nothing to compare
            let residual = ct.tensor.max_abs();
            (None, residual, None, "no_table_entry".to_string())
        };
        if residual != rat_i(0) {
            all_pass = false;
        }
        records.push(Json::Obj(vec![
            ("system", Json::Str(spec.to_string())),
            ("rank", Json::int(rs.rank as i64)),
            ("roots", Json::int(rs.roots.len() as i64)),
            ("positive_roots", Json::int(rs.positive_roots.len() as i64)),
            (
                "c_oracle",
                c_oracle.as_ref().map(Json::rat).unwrap_or(Json::Null),
            ),
            (
                "c_table",
                c_table.as_ref().map(Json::rat).unwrap_or(Json::Null),
            ),
            ("verdict", Json::Str(verdict.clone())),
            ("proportionality_residual", Json::rat(&residual)),
        ]));
        rows.push(vec![
            spec.to_string(),
            rs.rank.to_string(),
            rs.roots.len().to_string(),
            rs.positive_roots.len().to_string(),
            opt_rat_str(&c_oracle),
            opt_rat_str(&c_table),
            verdict.clone(),
            format_rat(&residual),
        ]);
        md_rows.push(vec![
            spec.to_string(),
            opt_rat_str(&c_oracle),
            opt_rat_str(&c_table),
            verdict,
            format_rat(&residual),
        ]);
    }
    Ok(CommandOutput {
        records,
        header: vec![
            "system",
            "rank",
            "roots",
            "positive_roots",
            "c_oracle",
            "c_table",
            "verdict",
            "proportionality_residual",
        ],
        rows,
        md: Some((
            vec!["system", "c_oracle", "c_table", "verdict", "residual"],
            md_rows,
        )),
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn run_verify(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut md_rows = Vec::new();
    let mut all_pass = true;
    for &spec in &config.systems {
        let rs = build(spec)?;
        let k = resolve_k(&rs, &config.multiplicities)?;
        let k_f: Vec<f64> = k.iter().map(rat_to_f64).collect();
        let points = sample_chamber_point(&rs, config.seed, config.margin, config.samples)
            .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
        let verify = |gamma: Complex64| {
            verify_at_points(&rs, &k_f, gamma, &points)
                .map_err(|e| CliError::Run(format!("{spec}: {e}")))
        };
        let (c_oracle, label, gamma, residuals, max_comm, max_eq1, pass, note);
        if rs.rank < 2 {
            // one flat slice plus the identity: the system is vacuous for any
            // choice of gamma
            gamma = Complex64::new(0.0, 1.0);
            let (r, mc, me) = verify(gamma)?;
            c_oracle = None;
            label = "n/a".to_string();
            residuals = r;
            max_comm = mc;
            max_eq1 = me;
            pass = true;
            note = Some("rank 1: WDVV vacuous".to_string());
        } else {
            let c = oracle_c(&rs, &k)?;
            let c_f = rat_to_f64(&c);
            let gam =
                |h: GammaHypothesis| gamma_from_c(c_f, h).map_err(|e| CliError::Run(e.to_string()));
            match config.hypothesis {
                HypothesisChoice::Half | HypothesisChoice::Full => {
                    let hyp = if config.hypothesis == HypothesisChoice::Half {
                        GammaHypothesis::Half
                    } else {
                        GammaHypothesis::Full
                    };
                    gamma = gam(hyp)?;
                    let (r, mc, me) = verify(gamma)?;
                    label = hyp.to_string();
                    residuals = r;
                    max_comm = mc;
                    max_eq1 = me;
                    pass = mc < config.tolerance && me < config.tolerance;
                    note = None;
                }
                HypothesisChoice::Scan => {
                    let g_half = gam(GammaHypothesis::Half)?;
                    let g_full = gam(GammaHypothesis::Full)?;
                    let half = verify(g_half)?;
                    let full = verify(g_full)?;
                    let (half_comm, full_comm) = (half.1, full.1);
                    let half_ok = half_comm < config.tolerance;
                    let full_ok = full_comm < config.tolerance;
                    let (selected, g, data) = if half_comm <= full_comm {
                        (GammaHypothesis::Half, g_half, half)
                    } else {
                        (GammaHypothesis::Full, g_full, full)
                    };
                    gamma = g;
                    label = format!("scan:{selected}");
                    let (r, mc, me) = data;
                    residuals = r;
                    max_comm = mc;
                    max_eq1 = me;
                    if half_ok == full_ok {
                        pass = false;
                        note = Some(format!(
                            "gamma scan did not select a unique hypothesis \
                             (half: {}, full: {})",
                            fmt_f64(half_comm),
                            fmt_f64(full_comm),
                        ));
                    } else {
                        pass = mc < config.tolerance && me < config.tolerance;
                        note = None;
                    }
                }
            }
            c_oracle = Some(c);
        }
        all_pass &= pass;
        let point_records: Vec<Json> = points
            .iter()
            .zip(&residuals)
            .enumerate()
            .map(|(i, (p, r))| {
                Json::Obj(vec![
                    ("index", Json::int(i as i64)),
                    ("margin", Json::num(p.margin)),
                    ("commutator_residual", Json::num(r.commutator)),
                    ("eq1_residual", Json::num(r.eq1)),
                ])
            })
            .collect();
        records.push(Json::Obj(vec![
            ("system", Json::Str(spec.to_string())),
            (
                "c_oracle",
                c_oracle.as_ref().map(Json::rat).unwrap_or(Json::Null),
            ),
            ("gamma_hypothesis", Json::Str(label.clone())),
            ("gamma", gamma_json(gamma)),
            ("tolerance", Json::num(config.tolerance)),
            ("points", Json::Arr(point_records)),
            ("max_commutator_residual", Json::num(max_comm)),
            ("max_eq1_residual", Json::num(max_eq1)),
            ("pass", Json::Bool(pass)),
            (
                "note",
                note.as_ref()
                    .map(|n| Json::Str(n.clone()))
                    .unwrap_or(Json::Null),
            ),
        ]));
        for (i, (p, r)) in points.iter().zip(&residuals).enumerate() {
            rows.push(vec![
                spec.to_string(),
                i.to_string(),
                fmt_f64(p.margin),
                fmt_f64(r.commutator),
                fmt_f64(r.eq1),
                pass.to_string(),
            ]);
        }
        md_rows.push(vec![
            spec.to_string(),
            opt_rat_str(&c_oracle),
            label,
            fmt_f64(max_comm),
            fmt_f64(max_eq1),
            pass.to_string(),
        ]);
    }
    Ok(CommandOutput {
        records,
        header: vec![
            "system",
            "point",
            "margin",
            "commutator_residual",
            "eq1_residual",
            "pass",
        ],
        rows,
        md: Some((
            vec![
                "system",
                "c_oracle",
                "hypothesis",
                "max_commutator_residual",
                "max_eq1_residual",
                "pass",
            ],
            md_rows,
        )),
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// gamma-scan
// ---------------------------------------------------------------------------

fn run_gamma_scan(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &spec in &config.systems {
        let rs = build(spec)?;
        if rs.rank < 2 {
            records.push(Json::Obj(vec![
                ("system", Json::Str(spec.to_string())),
                ("c_oracle", Json::Null),
                ("max_residual_half", Json::Null),
                ("max_residual_full", Json::Null),
                ("passing", Json::Arr(vec![])),
                ("selected", Json::Null),
                ("definitive", Json::Null),
                ("note", Json::Str("rank 1: scan not applicable".into())),
            ]));
            rows.push(vec![spec.to_string(), "-".into(), "-".into(), "-".into(), "-".into(), "-".into()]);
            continue;
        }
        let k = resolve_k(&rs, &config.multiplicities)?;
        let k_f: Vec<f64> = k.iter().map(rat_to_f64).collect();
        let c = oracle_c(&rs, &k)?;
        let c_f = rat_to_f64(&c);
        let points = sample_chamber_point(&rs, config.seed, config.margin, config.samples)
            .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
        let mut residual = [0.0f64; 2];
        let mut passing = Vec::new();
        for (slot, hyp) in [GammaHypothesis::Half, GammaHypothesis::Full]
            .into_iter()
            .enumerate()
        {
            let gamma = gamma_from_c(c_f, hyp).map_err(|e| CliError::Run(e.to_string()))?;
            let (_, mc, _) = verify_at_points(&rs, &k_f, gamma, &points)
                .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
            residual[slot] = mc;
            if mc < config.tolerance {
                passing.push(hyp);
            }
        }
        let selected = if passing.len() == 1 { Some(passing[0]) } else { None };
        let rejected_residual = match selected {
            Some(GammaHypothesis::Half) => residual[1],
            Some(GammaHypothesis::Full) => residual[0],
            None => 0.0,
        };
        let definitive = selected.is_some() && rejected_residual > DEFINITIVE_FAILURE;
        all_pass &= definitive;
        records.push(Json::Obj(vec![
            ("system", Json::Str(spec.to_string())),
            ("c_oracle", Json::rat(&c)),
            ("max_residual_half", Json::num(residual[0])),
            ("max_residual_full", Json::num(residual[1])),
            (
                "passing",
                Json::Arr(
                    passing
                        .iter()
                        .map(|h| Json::Str(h.to_string()))
                        .collect(),
                ),
            ),
            (
                "selected",
                selected
                    .map(|h| Json::Str(h.to_string()))
                    .unwrap_or(Json::Null),
            ),
            ("definitive", Json::Bool(definitive)),
            ("note", Json::Null),
        ]));
        rows.push(vec![
            spec.to_string(),
            format_rat(&c),
            fmt_f64(residual[0]),
            fmt_f64(residual[1]),
            selected.map(|h| h.to_string()).unwrap_or_else(|| "-".into()),
            definitive.to_string(),
        ]);
    }
    Ok(CommandOutput {
        records,
        header: vec![
            "system",
            "c_oracle",
            "max_residual_half",
            "max_residual_full",
            "selected",
            "definitive",
        ],
        rows,
        md: None,
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// dunkl
// ---------------------------------------------------------------------------

fn run_dunkl(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut md_rows = Vec::new();
    let mut all_pass = true;
    for &spec in &config.systems {
        let rs = build(spec)?;
        let run = DunklRun::new(&rs);
        let points = sample_chamber_point(&rs, config.seed, config.margin, config.samples)
            .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
        let mut point_records = Vec::new();
        let mut max_residual: f64 = 0.0;
        let mut only_in_aggregate = false;
        for (i, point) in points.iter().enumerate() {
            let report = run
                .check_point(&rs, point, config.tolerance)
                .map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
            max_residual = max_residual.max(report.max_residual);
            only_in_aggregate |= report.identity_holds_only_in_aggregate;
            point_records.push(Json::Obj(vec![
                ("index", Json::int(i as i64)),
                ("margin", Json::num(point.margin)),
                ("max_fiber_residual", Json::num(report.max_residual)),
                (
                    "identity_holds_only_in_aggregate",
                    Json::Bool(report.identity_holds_only_in_aggregate),
                ),
            ]));
            rows.push(vec![
                spec.to_string(),
                i.to_string(),
                fmt_f64(point.margin),
                fmt_f64(report.max_residual),
                report.identity_holds_only_in_aggregate.to_string(),
            ]);
        }
        let pass =
            run.aggregate_exact_match && max_residual < config.tolerance && !only_in_aggregate;
        all_pass &= pass;
        records.push(Json::Obj(vec![
            ("system", Json::Str(spec.to_string())),
            ("fibers", Json::int(run.partition.fibers.len() as i64)),
            ("total_pairs", Json::int(run.partition.total_pairs() as i64)),
            ("aggregate_exact_match", Json::Bool(run.aggregate_exact_match)),
            ("tolerance", Json::num(config.tolerance)),
            ("points", Json::Arr(point_records)),
            ("max_fiber_residual", Json::num(max_residual)),
            ("pass", Json::Bool(pass)),
        ]));
        md_rows.push(vec![
            spec.to_string(),
            run.partition.fibers.len().to_string(),
            run.partition.total_pairs().to_string(),
            run.aggregate_exact_match.to_string(),
            fmt_f64(max_residual),
            pass.to_string(),
        ]);
    }
    Ok(CommandOutput {
        records,
        header: vec![
            "system",
            "point",
            "margin",
            "max_fiber_residual",
            "identity_holds_only_in_aggregate",
        ],
        rows,
        md: Some((
            vec![
                "system",
                "fibers",
                "total_pairs",
                "aggregate_exact_match",
                "max_fiber_residual",
                "pass",
            ],
            md_rows,
        )),
        all_pass,
    })
}

// ---------------------------------------------------------------------------
// cpoly
// ---------------------------------------------------------------------------

fn run_cpoly(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &spec in &config.systems {
        let rs = build(spec)?;
        if rs.rank < 2 {
            records.push(Json::Obj(vec![
                ("system", Json::Str(spec.to_string())),
                ("orbits", Json::Arr(vec![])),
                ("coefficients", Json::Arr(vec![])),
                ("max_block_residual", Json::Null),
                ("c_at_unit", Json::Null),
                ("c_at_k", Json::Null),
                ("pass", Json::Bool(true)),
                ("note", Json::Str("rank 1: c undefined".into())),
            ]));
            continue;
        }
        let poly =
            multiplicity_polynomial(&rs).map_err(|e| CliError::Run(format!("{spec}: {e}")))?;
        let k = resolve_k(&rs, &config.multiplicities)?;
        let names = &poly.orbit_names;
        let mut coeff_records = Vec::new();
        for o in 0..names.len() {
            for o2 in o..names.len() {
                let coeff = poly.combined_coeff(o, o2);
                let term = if o == o2 {
                    format!("{}^2", names[o])
                } else {
                    format!("{}*{}", names[o], names[o2])
                };
                coeff_records.push(Json::Obj(vec![
                    ("term", Json::Str(term.clone())),
                    ("coefficient", Json::rat(&coeff)),
                ]));
                rows.push(vec![spec.to_string(), term, format_rat(&coeff)]);
            }
        }
        let ones = vec![rat_i(1); names.len()];
        let c_unit = poly.evaluate(&ones);
        let c_at_k = if config.multiplicities.is_empty() {
            None
        } else {
            Some(poly.evaluate(&k))
        };
        let pass = poly.max_block_residual == rat_i(0);
        all_pass &= pass;
        records.push(Json::Obj(vec![
            ("system", Json::Str(spec.to_string())),
            (
                "orbits",
                Json::Arr(names.iter().map(|n| Json::Str((*n).into())).collect()),
            ),
            ("coefficients", Json::Arr(coeff_records)),
            ("max_block_residual", Json::rat(&poly.max_block_residual)),
            ("c_at_unit", Json::rat(&c_unit)),
            (
                "c_at_k",
                c_at_k.as_ref().map(Json::rat).unwrap_or(Json::Null),
            ),
            ("pass", Json::Bool(pass)),
            ("note", Json::Null),
        ]));
    }
    Ok(CommandOutput {
        records,
        header: vec!["system", "term", "coefficient"],
        rows,
        md: None,
        all_pass,
    })
}
