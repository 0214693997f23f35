//! Command-line front end: argument parsing, report assembly and rendering.
//!
//! Every subcommand builds a serializable report. JSON output is the report
//! itself; CSV flattens it to one row per record; text is for people.
//! Exit codes: 0 success, 2 invalid input, 3 precision unreachable,
//! 4 verification failure.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use crate::bounds::{
    b_n, empirical_delta_h_series, entropy_bounds, improved_bounds_symmetric, ratio_claim_check,
    t_value, BoundsResult, DEFAULT_RATIO_CHECK_DEPTH,
};
use crate::certified::{CertifiedValue, Interval, Precision};
use crate::error::Error;
use crate::euclid::{a_k_coefficients, a_k_from_counts, e_steps, larger_counts_up_to, EuclidLevel};
use crate::graph::{adjacency_ratio_range, frequency_histogram, initial_level, level_entropy};
use crate::params::{parse_rational, MdParams, ProbabilityVector};
use crate::series::verify_identities;
use crate::uniform::{ell_coefficients, uniform_entropy_with, EntropyResult, UniformConfig};

#[derive(Debug, Parser)]
#[command(
    name = "cantor-entropy",
    version,
    about = "Certified Garsia entropy and dimension bounds for Cantor-like (m,d)-measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Override the working precision (fractional bits).
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy of the uniform (m,d)-measure.
    Uniform(UniformArgs),
    /// Entropies of all uniform measures with 2 <= d <= max-d.
    Table1(Table1Args),
    /// Entropy bounds for arbitrary rational probabilities.
    Bounds(BoundsArgs),
    /// Bounds for the (3,2) family (1/(t+2), t/(t+2), 1/(t+2)).
    BoundsSymmetric(SymmetricArgs),
    /// Symmetric bounds for t = 1..=t-max.
    Table2(Table2Args),
    /// Level statistics of the weighted (m,d)-graph.
    Graph(GraphArgs),
    /// Euclidean tree aggregates s(n) and series coefficients l(n).
    Euclid(EuclidArgs),
    /// Cross-check formulas against the brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct UniformArgs {
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub m: i64,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 10)]
    pub max_d: u32,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub m: i64,
    /// Comma-separated rationals, e.g. 1/4,1/2,1/4.
    #[arg(long)]
    pub probs: String,
    /// Significant digits of the rendered endpoints.
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
    /// Intersect the interval with (-inf, 1] to read it as a dimension bound.
    #[arg(long)]
    pub clamp_dimension: bool,
}

#[derive(Debug, Args)]
pub struct SymmetricArgs {
    /// Positive rational t >= 1.
    #[arg(long)]
    pub t: String,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
    #[arg(long)]
    pub clamp_dimension: bool,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, default_value_t = 10)]
    pub t_max: u32,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
    #[arg(long)]
    pub clamp_dimension: bool,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub d: i64,
    #[arg(long)]
    pub m: i64,
    /// Probabilities; uniform when omitted.
    #[arg(long)]
    pub probs: Option<String>,
    #[arg(long)]
    pub level: u32,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
}

#[derive(Debug, Args)]
pub struct EuclidArgs {
    #[arg(long)]
    pub level: u32,
    #[arg(long, default_value_t = 10)]
    pub digits: u32,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Genfun,
    Euclid,
    Sandwich,
    All,
}

/// What a run printed and how the process should exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PrecisionUnreachable(_) | Error::DivisionByZero => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Upper bound on a radius, three significant digits, rounded up.
pub fn format_radius(r: f64) -> String {
    if r == 0.0 {
        return "0".into();
    }
    let mut exp = r.log10().floor() as i32;
    let mut mant = (r / 10f64.powi(exp) * 100.0).ceil() / 100.0;
    if mant >= 10.0 {
        mant /= 10.0;
        exp += 1;
    }
    format!("{mant:.2}e{exp}")
}

/// The ball to `decimals` places; the midpoint when rounding is undecided.
fn fixed(v: &CertifiedValue, decimals: u32) -> String {
    v.to_fixed(decimals)
        .unwrap_or_else(|| v.mid_fixed(decimals))
}

fn precision(cli_bits: Option<u32>, digits: u32) -> Precision {
    cli_bits.map_or_else(|| Precision::for_digits(digits), Precision::from_bits)
}

fn params(m: i64, d: i64) -> CliResult<MdParams> {
    MdParams::new(m, d).map_err(CliError::from)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

trait Report: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
    fn text(&self) -> String;
}

fn render<R: Report>(report: &R, format: Format) -> CliResult<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| invalid(e.to_string())),
        Format::Text => Ok(report.text()),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| invalid(e.to_string());
            w.write_record(report.csv_header()).map_err(io)?;
            for row in report.csv_rows() {
                w.write_record(&row).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniformRecord {
    pub d: u32,
    pub r: u32,
    pub m: u32,
    pub digits: u32,
    pub entropy: String,
    pub radius: String,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "N_rule")]
    pub n_rule: u32,
    pub dimension: String,
    pub dimension_widened: bool,
}

impl UniformRecord {
    fn from_result(res: &EntropyResult) -> Self {
        let p = res.params;
        let digits = res.requested_digits;
        Self {
            d: p.d(),
            r: p.r(),
            m: p.m(),
            digits,
            entropy: res.rendered.clone(),
            radius: format_radius(res.entropy.radius_f64()),
            n: res.n_used,
            n_rule: res.n_rule,
            dimension: fixed(&res.dimension, digits),
            dimension_widened: res.dimension_widened,
        }
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.r.to_string(),
            self.m.to_string(),
            self.entropy.clone(),
            self.n.to_string(),
        ]
    }
}

impl Report for UniformRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["d", "r", "m", "entropy", "N"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![self.row()]
    }

    fn text(&self) -> String {
        format!(
            "m={} d={} r={}\nentropy    {}\nradius     {}\nN          {} (rule {})\ndimension  {}{}\n",
            self.m,
            self.d,
            self.r,
            self.entropy,
            self.radius,
            self.n,
            self.n_rule,
            self.dimension,
            if self.dimension_widened {
                " (entropy straddles 1)"
            } else {
                ""
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Table1Report {
    pub rows: Vec<UniformRecord>,
}

impl Report for Table1Report {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["d", "r", "m", "entropy", "N"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(UniformRecord::row).collect()
    }

    fn text(&self) -> String {
        let mut out = String::from(" d  r   m  entropy        radius     N\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>2} {:>2} {:>3}  {}  {:<9}  {:>2}",
                r.d, r.r, r.m, r.entropy, r.radius, r.n
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsRecord {
    pub d: u32,
    pub m: u32,
    pub probs: String,
    pub lower: String,
    pub upper: String,
    pub method: String,
    pub similarity_dimension: String,
    pub clamped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl BoundsRecord {
    fn row(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.m.to_string(),
            self.probs.clone(),
            self.lower.clone(),
            self.upper.clone(),
            self.method.clone(),
            self.similarity_dimension.clone(),
        ]
    }
}

const BOUNDS_HEADER: [&str; 7] = [
    "d",
    "m",
    "probs",
    "lower",
    "upper",
    "method",
    "similarity_dimension",
];

impl Report for BoundsRecord {
    fn csv_header(&self) -> Vec<&'static str> {
        BOUNDS_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![self.row()]
    }

    fn text(&self) -> String {
        let mut out = format!(
            "m={} d={} p=({})\ninterval   [{}, {}]{}\nmethod     {}\nsim. dim.  {}\n",
            self.m,
            self.d,
            self.probs,
            self.lower,
            self.upper,
            if self.clamped { " (clamped to 1)" } else { "" },
            self.method,
            self.similarity_dimension
        );
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "warning    {w}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Table2Report {
    pub rows: Vec<BoundsRecord>,
}

impl Report for Table2Report {
    fn csv_header(&self) -> Vec<&'static str> {
        BOUNDS_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(BoundsRecord::row).collect()
    }

    fn text(&self) -> String {
        let mut out = String::from("probs            lower         upper         method\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:<13} {:<13} {}",
                r.probs, r.lower, r.upper, r.method
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphLevelRecord {
    pub n: u32,
    pub positions: usize,
    pub entropy: String,
    pub delta_h: String,
    pub a: String,
    pub b_n: String,
    pub a_minus_b_n: String,
    pub sandwiched: bool,
    pub ratio_min: Option<String>,
    pub ratio_max: Option<String>,
    /// Frequency -> node count; present for uniform probabilities only.
    pub histogram: Option<Vec<(u64, u64)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphReport {
    pub d: u32,
    pub m: u32,
    pub probs: String,
    pub levels: Vec<GraphLevelRecord>,
}

fn histogram_text(h: &Option<Vec<(u64, u64)>>) -> String {
    match h {
        None => String::new(),
        Some(h) => h
            .iter()
            .map(|(k, c)| format!("{k}:{c}"))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

impl Report for GraphReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "n",
            "positions",
            "entropy",
            "delta_h",
            "a_minus_b_n",
            "a",
            "ratio_min",
            "ratio_max",
            "histogram",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.levels
            .iter()
            .map(|l| {
                vec![
                    l.n.to_string(),
                    l.positions.to_string(),
                    l.entropy.clone(),
                    l.delta_h.clone(),
                    l.a_minus_b_n.clone(),
                    l.a.clone(),
                    l.ratio_min.clone().unwrap_or_default(),
                    l.ratio_max.clone().unwrap_or_default(),
                    histogram_text(&l.histogram),
                ]
            })
            .collect()
    }

    fn text(&self) -> String {
        let mut out = format!("m={} d={} p=({})\n", self.m, self.d, self.probs);
        for l in &self.levels {
            let _ = writeln!(
                out,
                "n={:<3} nodes={:<8} h={}  dh={}  in [{}, {}]{}",
                l.n,
                l.positions,
                l.entropy,
                l.delta_h,
                l.a_minus_b_n,
                l.a,
                if l.sandwiched { "" } else { "  VIOLATED" }
            );
            if let (Some(lo), Some(hi)) = (&l.ratio_min, &l.ratio_max) {
                let _ = writeln!(out, "      adjacent p/(p+q) in [{lo}, {hi}]");
            }
            if l.histogram.is_some() {
                let _ = writeln!(out, "      frequencies {}", histogram_text(&l.histogram));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EuclidLevelRecord {
    pub n: u32,
    pub pairs: String,
    pub distinct_larger: usize,
    pub max_label: u64,
    pub weighted_count: String,
    pub s: String,
    pub ell: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EuclidReport {
    pub levels: Vec<EuclidLevelRecord>,
}

impl Report for EuclidReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "n",
            "pairs",
            "distinct_larger",
            "max_label",
            "weighted_count",
            "s",
            "ell",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.levels
            .iter()
            .map(|l| {
                vec![
                    l.n.to_string(),
                    l.pairs.clone(),
                    l.distinct_larger.to_string(),
                    l.max_label.to_string(),
                    l.weighted_count.clone(),
                    l.s.clone(),
                    l.ell.clone(),
                ]
            })
            .collect()
    }

    fn text(&self) -> String {
        let mut out = String::from(" n  pairs     max   s(n)                       l(n)\n");
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{:>2}  {:<8} {:>5}   {:<26} {}",
                l.n, l.pairs, l.max_label, l.s, l.ell
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl Report for VerifyReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["suite", "check", "passed", "detail"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.suite.to_string(),
                    c.check.clone(),
                    c.passed.to_string(),
                    c.detail.clone(),
                ]
            })
            .collect()
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {:<8} {}{}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.check,
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!(": {}", c.detail)
                }
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub fn uniform_record(args: &UniformArgs, precision_bits: Option<u32>) -> CliResult<UniformRecord> {
    let p = params(args.m, args.d)?;
    let config = UniformConfig {
        precision: precision_bits.map(Precision::from_bits),
        ..UniformConfig::default()
    };
    let mut table = config.table_for(args.digits);
    let res = uniform_entropy_with(p, args.digits, &mut table, &config)?;
    Ok(UniformRecord::from_result(&res))
}

pub fn table1_report(args: &Table1Args, precision_bits: Option<u32>) -> CliResult<Table1Report> {
    if args.max_d < 2 {
        return Err(invalid(format!(
            "--max-d {} must be at least 2",
            args.max_d
        )));
    }
    let config = UniformConfig {
        precision: precision_bits.map(Precision::from_bits),
        ..UniformConfig::default()
    };
    let mut table = config.table_for(args.digits);
    let rows = MdParams::all_up_to(args.max_d)
        .into_iter()
        .map(|p| {
            uniform_entropy_with(p, args.digits, &mut table, &config)
                .map(|r| UniformRecord::from_result(&r))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Table1Report { rows })
}

fn probs_text(probs: &ProbabilityVector) -> String {
    probs
        .as_slice()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders both endpoints to `digits` significant digits, raising the working
/// precision until every point of each ball rounds the same way.
fn bounds_record(
    compute: impl Fn(Precision) -> crate::error::Result<BoundsResult>,
    probs: &ProbabilityVector,
    digits: u32,
    clamp: bool,
    precision_bits: Option<u32>,
) -> CliResult<BoundsRecord> {
    let mut prec = precision(precision_bits, digits);
    for _ in 0..6 {
        let res = compute(prec)?;
        let interval: Interval = if clamp {
            res.clamped_to_dimension()
        } else {
            res.interval.clone()
        };
        let rendered = (
            interval.lo.to_significant(digits),
            interval.hi.to_significant(digits),
            res.similarity_dimension.to_significant(digits),
        );
        if let (Some(lower), Some(upper), Some(sim)) = rendered {
            return Ok(BoundsRecord {
                d: res.params.d(),
                m: res.params.m(),
                probs: probs_text(probs),
                lower,
                upper,
                method: res.method.as_str().to_string(),
                similarity_dimension: sim,
                clamped: clamp,
                warning: res.warning,
            });
        }
        prec = Precision::from_bits(prec.bits() * 2);
    }
    Err(Error::PrecisionUnreachable(format!(
        "bounds do not round unambiguously to {digits} significant digits"
    ))
    .into())
}

pub fn bounds_report(args: &BoundsArgs, precision_bits: Option<u32>) -> CliResult<BoundsRecord> {
    let p = params(args.m, args.d)?;
    let probs = ProbabilityVector::parse(p, &args.probs)?;
    bounds_record(
        |prec| entropy_bounds(p, &probs, prec),
        &probs,
        args.digits,
        args.clamp_dimension,
        precision_bits,
    )
}

fn symmetric_record(
    t: &BigRational,
    digits: u32,
    clamp: bool,
    precision_bits: Option<u32>,
) -> CliResult<BoundsRecord> {
    let probs = ProbabilityVector::symmetric_three(t)?;
    bounds_record(
        |prec| improved_bounds_symmetric(t, prec),
        &probs,
        digits,
        clamp,
        precision_bits,
    )
}

pub fn symmetric_report(
    args: &SymmetricArgs,
    precision_bits: Option<u32>,
) -> CliResult<BoundsRecord> {
    let t = parse_rational(args.t.trim()).map_err(|e| invalid(e.to_string()))?;
    symmetric_record(&t, args.digits, args.clamp_dimension, precision_bits)
}

pub fn table2_report(args: &Table2Args, precision_bits: Option<u32>) -> CliResult<Table2Report> {
    if args.t_max < 1 {
        return Err(invalid("--t-max must be at least 1"));
    }
    let rows = (1..=args.t_max)
        .map(|t| {
            symmetric_record(
                &t_value(t),
                args.digits,
                args.clamp_dimension,
                precision_bits,
            )
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table2Report { rows })
}

pub fn graph_report(args: &GraphArgs, precision_bits: Option<u32>) -> CliResult<GraphReport> {
    let p = params(args.m, args.d)?;
    let probs = match &args.probs {
        Some(text) => ProbabilityVector::parse(p, text)?,
        None => ProbabilityVector::uniform(p),
    };
    let prec = precision(precision_bits, args.digits);
    let deltas = empirical_delta_h_series(p, &probs, args.level, prec)?;
    let mut dist = initial_level(p);
    let mut levels = Vec::with_capacity(args.level as usize);
    for delta in &deltas {
        dist = dist.advance(&probs)?;
        let h = level_entropy(&dist, prec);
        let ratio = adjacency_ratio_range(&dist).ok();
        let histogram = if probs.is_uniform() {
            Some(frequency_histogram(&dist)?.counts.into_iter().collect())
        } else {
            None
        };
        let lower = &delta.a - &CertifiedValue::from_ratio(&delta.b_n, prec);
        levels.push(GraphLevelRecord {
            n: delta.n,
            positions: dist.len(),
            entropy: fixed(&h, args.digits),
            delta_h: fixed(&delta.delta_h, args.digits),
            a: fixed(&delta.a, args.digits),
            b_n: b_n(p, &probs, delta.n)?.to_string(),
            a_minus_b_n: fixed(&lower, args.digits),
            sandwiched: delta.sandwiched(),
            ratio_min: ratio.as_ref().map(|r| r.min.to_string()),
            ratio_max: ratio.as_ref().map(|r| r.max.to_string()),
            histogram,
        });
    }
    Ok(GraphReport {
        d: p.d(),
        m: p.m(),
        probs: probs_text(&probs),
        levels,
    })
}

pub fn euclid_report(args: &EuclidArgs, precision_bits: Option<u32>) -> CliResult<EuclidReport> {
    if args.level < 1 {
        return Err(invalid("--level must be at least 1"));
    }
    let config = UniformConfig {
        precision: precision_bits.map(Precision::from_bits),
        ..UniformConfig::default()
    };
    let mut table = config.table_for(args.digits);
    let ell = ell_coefficients(args.level, &mut table)?;
    let mut tree = EuclidLevel::root();
    let levels = table
        .aggregates()
        .iter()
        .zip(&ell)
        .map(|(agg, l)| {
            tree = tree.expand();
            let weighted: BigUint = agg
                .larger_counts
                .iter()
                .map(|(&k, &a)| BigUint::from(k) * BigUint::from(a))
                .sum();
            EuclidLevelRecord {
                n: agg.level,
                pairs: tree.pair_count().to_string(),
                distinct_larger: agg.larger_counts.len(),
                max_label: tree.max_label(),
                weighted_count: weighted.to_string(),
                s: fixed(&agg.s, args.digits),
                ell: fixed(l, args.digits),
            }
        })
        .collect();
    Ok(EuclidReport { levels })
}

fn check(
    suite: &'static str,
    name: impl Into<String>,
    passed: bool,
    detail: impl Into<String>,
) -> CheckRecord {
    CheckRecord {
        suite,
        check: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn genfun_checks() -> CliResult<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let cases = [
        (3, 2, 8, 10),
        (4, 3, 8, 8),
        (5, 3, 8, 8),
        (5, 4, 8, 8),
        (7, 4, 8, 8),
    ];
    for (m, d, k, n) in cases {
        let report = verify_identities(params(m, d)?, k, n)?;
        let detail = match (report.mismatches.first(), report.mass_failures.first()) {
            (Some(x), _) => format!(
                "[x^{}]F_{} = {} but f({},{}) = {}",
                x.n, x.k, x.actual, x.n, x.k, x.expected
            ),
            (None, Some(f)) => format!(
                "level {}: sum k [x^n]F_k = {} but m^n = {}",
                f.n, f.actual, f.expected
            ),
            (None, None) => String::new(),
        };
        out.push(check(
            "genfun",
            format!("F_k = f(n,k) and mass identity, (m,d)=({m},{d}), k<={k}, n<={n}"),
            report.passed(),
            detail,
        ));
    }
    Ok(out)
}

fn euclid_checks() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut level = EuclidLevel::root();
    let mut failure: Option<String> = None;
    let (mut fa, mut fb) = (1u64, 2u64);
    for n in 1..=18u32 {
        level = level.expand();
        (fa, fb) = (fb, fa + fb);
        let count = level.pair_count();
        let coprime = level
            .pairs()
            .iter()
            .find(|&&((a, b), _)| num_integer::gcd(a, b) != 1);
        let weighted: u128 = level
            .larger_counts()
            .iter()
            .map(|(&k, &a)| u128::from(k) * u128::from(a))
            .sum();
        let steps = level
            .pairs()
            .iter()
            .find(|&&((a, b), _)| e_steps(a, b) != u64::from(n));
        let problem = if count != 1u128 << (n - 1) {
            Some(format!("level {n} has {count} pairs"))
        } else if let Some(((a, b), _)) = coprime {
            Some(format!("level {n} pair ({a},{b}) is not coprime"))
        } else if weighted != 2 * 3u128.pow(n - 1) {
            Some(format!("level {n}: sum k a(n,k) = {weighted}"))
        } else if let Some(((a, b), _)) = steps {
            Some(format!("level {n}: e({a},{b}) = {}", e_steps(*a, *b)))
        } else if level.max_label() != fa {
            Some(format!(
                "level {n}: max label {} vs Fibonacci {fa}",
                level.max_label()
            ))
        } else {
            None
        };
        if failure.is_none() {
            failure = problem;
        }
    }
    out.push(check(
        "euclid",
        "pair count 2^(n-1), coprimality, sum k a(n,k) = 2*3^(n-1), e-steps, Fibonacci max, n<=18",
        failure.is_none(),
        failure.unwrap_or_default(),
    ));

    let counts = larger_counts_up_to(20);
    let dual = (2..=50u64)
        .find(|&k| a_k_coefficients(k, 20).map_or(true, |s| s != a_k_from_counts(&counts, k, 20)));
    out.push(check(
        "euclid",
        "A_k from tree counts equals A_k from e(k,i), k<=50, n<=20",
        dual.is_none(),
        dual.map(|k| format!("A_{k} differs")).unwrap_or_default(),
    ));
    out
}

fn sandwich_checks() -> CliResult<Vec<CheckRecord>> {
    let prec = Precision::from_bits(100);
    let mut out = Vec::new();
    let mut cases: Vec<(String, MdParams, ProbabilityVector)> = Vec::new();
    for (m, d) in [(3, 2), (4, 3)] {
        let p = params(m, d)?;
        cases.push((
            format!("uniform ({m},{d})"),
            p,
            ProbabilityVector::uniform(p),
        ));
    }
    for t in [2u32, 3, 5] {
        let probs = ProbabilityVector::symmetric_three(&t_value(t))?;
        cases.push((format!("symmetric t={t}"), params(3, 2)?, probs));
    }
    for (name, p, probs) in &cases {
        let deltas = empirical_delta_h_series(*p, probs, 10, prec)?;
        let bad = deltas.iter().find(|dh| !dh.sandwiched());
        out.push(check(
            "sandwich",
            format!("dh_n in [a - b_n, a], {name}, n<=10"),
            bad.is_none(),
            bad.map(|dh| format!("n={}: dh={}", dh.n, dh.delta_h))
                .unwrap_or_default(),
        ));
    }

    let p32 = params(3, 2)?;
    let d2 = &empirical_delta_h_series(p32, &ProbabilityVector::uniform(p32), 2, prec)?[1];
    let lower = &d2.a - &CertifiedValue::from_ratio(&d2.b_n, prec);
    out.push(check(
        "sandwich",
        "dh_2 = a - b_2 for uniform (3,2)",
        d2.delta_h.overlaps(&lower),
        format!("dh_2 = {}, a - b_2 = {}", d2.delta_h, lower),
    ));

    for (t, depth, expect_pass) in [
        (2u32, DEFAULT_RATIO_CHECK_DEPTH, true),
        (3, DEFAULT_RATIO_CHECK_DEPTH, true),
        (1, 2, false),
    ] {
        let report = ratio_claim_check(&t_value(t), depth)?;
        let detail = report
            .first_failure()
            .map(|l| format!("level {}: ratios in [{}, {}]", l.n, l.min, l.max))
            .unwrap_or_default();
        out.push(check(
            "sandwich",
            format!(
                "adjacent ratios within [1/(t+1), t/(t+1)] for t={t} to depth {depth} {}",
                if expect_pass {
                    "hold"
                } else {
                    "fail (expected)"
                }
            ),
            report.passed() == expect_pass,
            detail,
        ));
    }
    Ok(out)
}

pub fn verify_report(args: &VerifyArgs) -> CliResult<VerifyReport> {
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Genfun | Suite::All) {
        checks.extend(genfun_checks()?);
    }
    if matches!(args.suite, Suite::Euclid | Suite::All) {
        checks.extend(euclid_checks());
    }
    if matches!(args.suite, Suite::Sandwich | Suite::All) {
        checks.extend(sandwich_checks()?);
    }
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let bits = cli.precision_bits;
    let ok = |stdout: String| Outcome { stdout, code: 0 };
    match &cli.command {
        Command::Uniform(a) => render(&uniform_record(a, bits)?, cli.format).map(ok),
        Command::Table1(a) => render(&table1_report(a, bits)?, cli.format).map(ok),
        Command::Bounds(a) => render(&bounds_report(a, bits)?, cli.format).map(ok),
        Command::BoundsSymmetric(a) => render(&symmetric_report(a, bits)?, cli.format).map(ok),
        Command::Table2(a) => render(&table2_report(a, bits)?, cli.format).map(ok),
        Command::Graph(a) => render(&graph_report(a, bits)?, cli.format).map(ok),
        Command::Euclid(a) => render(&euclid_report(a, bits)?, cli.format).map(ok),
        Command::Verify(a) => {
            let report = verify_report(a)?;
            let code = if report.passed { 0 } else { 4 };
            Ok(Outcome {
                stdout: render(&report, cli.format)?,
                code,
            })
        }
    }
}
