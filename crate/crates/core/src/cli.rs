//! Command-line front end: argument parsing, report assembly and emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ekr::{
    classify, find_bases, kneser_project, DerangementGraph, EkrError, IntersectingSet,
    DEFAULT_VERTEX_CAP,
};
use crate::ff::{FieldError, FieldSpec};
use crate::group::{GroupError, GroupTable, Subgroup, DEFAULT_LATTICE_CAP};
use crate::linalg::{LinalgError, Mat};
use crate::search::{self, LemmaCheck, SearchOptions};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "ekrlab";

/// Largest q for which `verify --which main` runs without `--long-run`.
const SHORT_RUN_MAX_Q: u32 = 5;
/// Largest q accepted by the clique-search commands.
const SEARCH_MAX_Q: u32 = 9;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("line {line}: {source}")]
    Input { line: usize, source: LinalgError },
    #[error("matrices on lines {0} and {1} do not intersect")]
    NotIntersecting(usize, usize),
    #[error("{0}")]
    Cap(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Cap(_) => EXIT_CAP,
            CliError::Group(GroupError::BoundExceeded { .. }) => EXIT_CAP,
            _ => EXIT_USAGE,
        }
    }
}

impl From<EkrError> for CliError {
    fn from(e: EkrError) -> Self {
        match e {
            EkrError::BoundExceeded { .. } => CliError::Cap(format!("{e}; raise --cap-vertices")),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ekrlab",
    version,
    about = "Intersecting sets of GL(2,q) on nonzero vectors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 600, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout_secs: u64,
    #[arg(long, env = "EKRLAB_CAP_VERTICES", default_value_t = DEFAULT_VERTEX_CAP, global = true, value_parser = positive)]
    pub cap_vertices: usize,
    /// Include wall-clock timings (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".to_string()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Field order (a prime power).
    #[arg(long, conflicts_with = "field")]
    pub q: Option<u32>,
    /// Field spec such as `GF(3^2;1,0,1)`.
    #[arg(long)]
    pub field: Option<String>,
}

impl FieldArgs {
    fn spec(&self) -> Result<FieldSpec, CliError> {
        match (&self.q, &self.field) {
            (Some(q), None) => Ok(FieldSpec::of_order(*q)?),
            (None, Some(s)) => Ok(s.parse()?),
            _ => Err(CliError::Usage(
                "one of --q or --field is required".to_string(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Ekr,
    Main,
    Main2,
    Lemmas,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run theorem and lemma checks for one field.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Subgroups for main2: one per line, generators separated by `;`.
        #[arg(long)]
        gens: Option<PathBuf>,
        /// Allow the maximal-set campaign for q ≥ 7.
        #[arg(long)]
        long_run: bool,
    },
    /// Classify a set of matrices, one per line.
    Classify {
        #[command(flatten)]
        field: FieldArgs,
        file: PathBuf,
    },
    /// Enumerate all maximal intersecting sets.
    Enumerate {
        #[command(flatten)]
        field: FieldArgs,
        /// Directory receiving one file per maximal set.
        #[arg(long)]
        emit_witnesses: Option<PathBuf>,
        #[arg(long)]
        long_run: bool,
    },
    /// Singer cycle and its regularity certificate.
    Singer {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Maximal intersecting sets of GL(3,2) against both coset families.
    #[command(name = "probe-gl32")]
    ProbeGl32,
    /// Subgroups of GL(2,q) and their transitivity.
    Subgroups {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        gens: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Violation,
    Incomplete,
    Skipped,
}

/// One verdict with its anchor label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub verdict: Outcome,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<Vec<String>>,
}

/// A row of a histogram table: sets of a given size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub table: String,
    pub size: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub counts: BTreeMap<String, u64>,
    pub histograms: Vec<HistogramRow>,
    pub data: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
    pub output_hash: String,
}

impl Report {
    fn new(command: &str) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: BTreeMap::new(),
            checks: Vec::new(),
            counts: BTreeMap::new(),
            histograms: Vec::new(),
            data: BTreeMap::new(),
            timings_ms: None,
            output_hash: String::new(),
        }
    }

    fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    fn count(&mut self, key: &str, value: usize) {
        self.counts.insert(key.to_string(), value as u64);
    }

    fn datum(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.to_string(), v);
    }

    fn histogram(&mut self, table: &str, h: &BTreeMap<usize, usize>) {
        self.histograms
            .extend(h.iter().map(|(&size, &count)| HistogramRow {
                table: table.to_string(),
                size,
                count,
            }));
    }

    fn check(&mut self, id: &str, anchor: &str, verdict: Outcome, detail: String) -> &mut Check {
        self.checks.push(Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            verdict,
            detail,
            witness: Vec::new(),
        });
        self.checks.last_mut().expect("just pushed")
    }

    fn lemma(&mut self, l: LemmaCheck) {
        let verdict = if l.passed {
            Outcome::Pass
        } else {
            Outcome::Violation
        };
        self.check(&l.name, &l.anchor, verdict, l.detail);
    }

    /// SHA-256 of the JSON rendering with an empty hash field.
    pub fn compute_hash(&self) -> String {
        let mut copy = self.clone();
        copy.output_hash.clear();
        let bytes = serde_json::to_vec(&copy).expect("report serializes");
        hex::encode(Sha256::digest(bytes))
    }

    fn seal(&mut self) {
        self.output_hash = self.compute_hash();
    }

    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.verdict == Outcome::Violation) {
            EXIT_VIOLATION
        } else if self.checks.iter().any(|c| c.verdict == Outcome::Incomplete) {
            EXIT_CAP
        } else {
            EXIT_PASS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        for (k, v) in &self.inputs {
            let _ = writeln!(s, "  {k} = {v}");
        }
        for c in &self.checks {
            let verdict = serde_json::to_value(c.verdict).expect("verdict serializes");
            let _ = writeln!(
                s,
                "[{}] {} ({}): {}",
                verdict.as_str().unwrap_or_default(),
                c.id,
                c.anchor,
                c.detail
            );
            for w in &c.witness {
                let _ = writeln!(s, "    witness: {}", w.join(" "));
            }
        }
        for (k, v) in &self.counts {
            let _ = writeln!(s, "  {k}: {v}");
        }
        for row in &self.histograms {
            let _ = writeln!(s, "  {} size {}: {}", row.table, row.size, row.count);
        }
        if let Some(t) = &self.timings_ms {
            for (k, v) in t {
                let _ = writeln!(s, "  time {k}: {v} ms");
            }
        }
        let _ = writeln!(s, "hash {}", self.output_hash);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("table,size,count\n");
        for row in &self.histograms {
            let _ = writeln!(s, "{},{},{}", row.table, row.size, row.count);
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }
}

fn outcome(passed: bool, complete: bool) -> Outcome {
    match (passed, complete) {
        (_, false) => Outcome::Incomplete,
        (true, true) => Outcome::Pass,
        (false, true) => Outcome::Violation,
    }
}

struct Timer {
    enabled: bool,
    laps: BTreeMap<String, u64>,
}

impl Timer {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.laps
                .insert(name.to_string(), start.elapsed().as_millis() as u64);
        }
        out
    }
}

struct Env<'a> {
    args: &'a OutputArgs,
    timer: Timer,
}

impl Env<'_> {
    fn opts(&self) -> SearchOptions {
        SearchOptions::with_timeout(Duration::from_secs(self.args.timeout_secs))
    }
}

/// Result of one invocation: exit code, stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Invocation {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Invocation {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let rendered = report.render(cli.output.format);
            let code = report.exit_code();
            match &cli.output.out {
                Some(path) => match std::fs::write(path, rendered) {
                    Ok(()) => Invocation {
                        code,
                        stdout: String::new(),
                        stderr: String::new(),
                    },
                    Err(source) => error(CliError::Io {
                        path: path.clone(),
                        source,
                    }),
                },
                None => Invocation {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                },
            }
        }
        Err(e) => error(e),
    }
}

fn error(e: CliError) -> Invocation {
    Invocation {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let mut env = Env {
        args: &cli.output,
        timer: Timer {
            enabled: cli.output.timings,
            laps: BTreeMap::new(),
        },
    };
    let mut report = match &cli.command {
        Command::Verify {
            field,
            which,
            gens,
            long_run,
        } => verify(&mut env, &field.spec()?, *which, gens.as_deref(), *long_run)?,
        Command::Classify { field, file } => classify_file(&field.spec()?, file)?,
        Command::Enumerate {
            field,
            emit_witnesses,
            long_run,
        } => enumerate(
            &mut env,
            &field.spec()?,
            emit_witnesses.as_deref(),
            *long_run,
        )?,
        Command::Singer { field } => singer(&field.spec()?)?,
        Command::ProbeGl32 => probe(&mut env)?,
        Command::Subgroups { field, gens } => subgroups(&mut env, &field.spec()?, gens.as_deref())?,
    };
    if env.timer.enabled {
        report.timings_ms = Some(env.timer.laps);
    }
    report.seal();
    Ok(report)
}

fn field_inputs(report: &mut Report, f: &FieldSpec) {
    report.input("q", f.q());
    report.input("field", f);
}

fn search_range(f: &FieldSpec, long_run: bool) -> Result<(), CliError> {
    if f.q() > SEARCH_MAX_Q {
        return Err(CliError::Cap(format!(
            "q = {} is beyond the clique-search range (q ≤ {SEARCH_MAX_Q})",
            f.q()
        )));
    }
    if f.q() > SHORT_RUN_MAX_Q && !long_run {
        return Err(CliError::Cap(format!(
            "q = {} needs --long-run for the maximal-set campaign",
            f.q()
        )));
    }
    Ok(())
}

fn verify(
    env: &mut Env,
    f: &FieldSpec,
    which: Which,
    gens: Option<&Path>,
    long_run: bool,
) -> Result<Report, CliError> {
    let mut report = Report::new("verify");
    field_inputs(&mut report, f);
    report.input("which", format!("{which:?}").to_lowercase());
    report.input("cap_vertices", env.args.cap_vertices);
    let all = which == Which::All;
    if f.q() < 3 {
        return Err(CliError::Usage(format!(
            "q = {} is too small; use q ≥ 3",
            f.q()
        )));
    }
    let needs_campaign =
        all || which == Which::Main || (which == Which::Lemmas && f.q() <= SHORT_RUN_MAX_Q);
    if all || which == Which::Main {
        search_range(f, long_run)?;
    }
    let g = GroupTable::gl2(f)?;
    report.count("group_order", g.order());
    let cap = env.args.cap_vertices;

    let campaign = if needs_campaign {
        let opts = env.opts();
        Some(
            env.timer
                .time("main", || search::verify_main_theorem(&g, cap, opts))?,
        )
    } else {
        None
    };

    if all || which == Which::Ekr {
        let graph = match &campaign {
            Some(c) => c.graph.clone(),
            None => DerangementGraph::of_group(&g, cap)?,
        };
        let opts = env.opts();
        let r = env
            .timer
            .time("ekr", || search::verify_ekr_bound(&g, &graph, opts));
        report
            .check(
                "ekr-bound",
                "thm:EKR-GL",
                outcome(r.max_intersecting == r.expected, r.complete),
                format!(
                    "maximum intersecting set has size {} (q(q-1) = {})",
                    r.max_intersecting, r.expected
                ),
            )
            .witness = vec![r.witness.clone()];
        report.check(
            "clique-coclique",
            "thm:EKR-GL",
            outcome(
                r.singer_clique_valid && r.certificate_bound == r.expected,
                true,
            ),
            format!(
                "Singer subgroup is a clique of size {}; |G|/{} = {}",
                r.singer_clique_size, r.singer_clique_size, r.certificate_bound
            ),
        );
        report.count("max_intersecting", r.max_intersecting);
        report.datum("ekr", &r);
    }

    if let Some(c) = campaign.as_ref().filter(|_| all || which == Which::Main) {
        main_checks(&mut report, &c.report);
    }

    if all || which == Which::Main2 {
        let subgroups = match gens {
            Some(path) => read_subgroups(&g, path)?,
            None if f.q() == 3 => lattice_subgroups(&g),
            None => search::builtin_subgroups(&g),
        };
        report.input(
            "subgroups",
            if gens.is_some() {
                "file"
            } else if f.q() == 3 {
                "lattice"
            } else {
                "builtin"
            },
        );
        let opts = env.opts();
        let r = env
            .timer
            .time("main2", || search::verify_main2(&g, &subgroups, cap, opts))?;
        for c in &r.checks {
            let verdict = if c.skipped.is_some() {
                Outcome::Skipped
            } else {
                outcome(c.passed(), c.complete)
            };
            let detail = match &c.skipped {
                Some(why) => format!("order {}: skipped, {why}", c.order),
                None => format!(
                    "order {}: {} maximal sets, largest {} (bound {}), all in coset families: {}, transitive on O2: {}",
                    c.order, c.maximal_sets, c.max_size, c.bound, c.all_in_families, c.transitive_on_o2
                ),
            };
            report.check(&format!("main2 {}", c.name), "thm:main2", verdict, detail);
        }
        report.count("subgroups_examined", r.subgroups_examined);
        report.count("subgroups_transitive", r.transitive);
        report.datum("main2", &r);
    }

    if all || which == Which::Lemmas {
        let lemmas = env.timer.time("lemmas", || {
            let mut v = vec![
                search::check_fixed_point_counts(&g),
                search::check_change_of_basis(&g),
                search::check_line_geometry(&g),
                search::check_hilton_milner(g.q()),
            ];
            let (fix, broader) = search::check_fix_line_line(&g);
            v.push(fix);
            if let Some(c) = &campaign {
                v.extend(search::check_bases(&g, &c.sets));
            }
            (v, broader)
        });
        for l in lemmas.0 {
            report.lemma(l);
        }
        report.count("fix_line_line_canonical_without_o2_line", lemmas.1);
    }
    Ok(report)
}

fn main_checks(report: &mut Report, r: &search::CliqueReport) {
    report
        .check(
            "main-theorem",
            "thm:main",
            outcome(r.neither == 0, r.complete),
            format!(
                "{} maximal sets: {} in point cosets, {} in line cosets, {} in neither",
                r.total, r.point_coset, r.line_coset, r.neither
            ),
        )
        .witness = r.neither_witnesses.clone();
    report
        .check(
            "maximal-is-maximum",
            "cor:maximal-maximum",
            outcome(r.wrong_size_witnesses.is_empty(), r.complete),
            format!("every maximal set has size q(q-1) = {}", r.expected_size),
        )
        .witness = r.wrong_size_witnesses.clone();
    report.check(
        "refuted-bound",
        "thm:main",
        outcome(
            r.neither == 0 && r.non_family_of_claimed_size == 0,
            r.complete,
        ),
        format!(
            "no maximal set outside both families, of size (q-1)(q-2)+1 = {} or any other",
            r.claimed_bound_size
        ),
    );
    report.check(
        "double-count",
        "thm:main",
        outcome(r.oracle_agrees, r.complete),
        format!(
            "directly built maximal cosets: {} point, {} line; agree with the search: {}",
            r.oracle_point_cosets, r.oracle_line_cosets, r.oracle_agrees
        ),
    );
    report.count("maximal_sets", r.total);
    report.count("point_coset", r.point_coset);
    report.count("line_coset", r.line_coset);
    report.count("neither", r.neither);
    report.count("line_stabilizer_plain", r.line_stabilizer_plain);
    report.histogram("maximal_sets", &r.histogram);
    report.datum("main", r);
}

fn lattice_subgroups(g: &GroupTable) -> Vec<(String, Subgroup)> {
    g.all_subgroups(DEFAULT_LATTICE_CAP)
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(i, h)| (format!("H{i}"), h))
        .collect()
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

fn parse_element(g: &GroupTable, line: usize, s: &str) -> Result<u32, CliError> {
    let f = g.field();
    let m = Mat::parse(s, f).map_err(|source| CliError::Input { line, source })?;
    if m.n() != 2 {
        return Err(CliError::Input {
            line,
            source: LinalgError::DimensionMismatch(m.n(), 2),
        });
    }
    g.id_of(&m).ok_or(CliError::Input {
        line,
        source: LinalgError::SingularMatrix,
    })
}

fn read_subgroups(g: &GroupTable, path: &Path) -> Result<Vec<(String, Subgroup)>, CliError> {
    read_lines(path)?
        .into_iter()
        .map(|(line, text)| {
            let gens = text
                .split(';')
                .map(|s| parse_element(g, line, s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((format!("line {line}"), g.subgroup_closure(&gens)))
        })
        .collect()
}

fn classify_file(f: &FieldSpec, path: &Path) -> Result<Report, CliError> {
    let g = GroupTable::gl2(f)?;
    let lines = read_lines(path)?;
    let mut ids = Vec::new();
    let mut line_of = BTreeMap::new();
    for (line, text) in &lines {
        let id = parse_element(&g, *line, text)?;
        line_of.entry(id).or_insert(*line);
        ids.push(id);
    }
    let set = IntersectingSet::new(&g, &ids).map_err(|e| match e {
        EkrError::NotIntersecting(a, b) => {
            let (la, lb) = (line_of[&a], line_of[&b]);
            CliError::NotIntersecting(la.min(lb), la.max(lb))
        }
        other => CliError::Usage(other.to_string()),
    })?;
    let mut report = Report::new("classify");
    field_inputs(&mut report, f);
    report.input("file", path.display());
    report.count("members", set.len());

    let c = classify(&g, set.members());
    report.check(
        "intersecting",
        "thm:main",
        Outcome::Pass,
        format!("{} distinct matrices, pairwise intersecting", set.len()),
    );
    let (norm, shift) = if set.is_normalized() {
        (set.clone(), g.identity())
    } else {
        set.normalize(&g)
    };
    let canonical = classify(&g, norm.members())
        .point_witnesses
        .iter()
        .any(|(a, b)| a == b);
    let verdict = if c.verdict == crate::ekr::Verdict::Neither {
        Outcome::Violation
    } else {
        Outcome::Pass
    };
    report.check("classification", "thm:main", verdict, c.describe(&g));
    report.datum("verdict", c.verdict.label());
    report.datum("shift", g.mat(shift).to_string());
    report.datum("canonical", canonical);
    report.datum(
        "normalized",
        norm.members()
            .iter()
            .map(|&m| g.mat(m).to_string())
            .collect::<Vec<_>>(),
    );
    report.count("point_witnesses", c.point_witnesses.len());
    report.count("line_witnesses", c.line_witnesses.len());

    let bases = find_bases(&g, &norm)?;
    let rendered: Vec<Vec<String>> = bases
        .iter()
        .map(|b| {
            let mut v = vec![g.mat(b.pair.0).to_string(), g.mat(b.pair.1).to_string()];
            if let Some(l) = &b.common_line {
                v.push(l.to_string());
            }
            v
        })
        .collect();
    report
        .check(
            "bases",
            "thm:bases",
            outcome(
                bases.is_empty() == canonical && bases.iter().all(|b| b.common_line.is_some()),
                true,
            ),
            format!(
                "{} bases; each pair has disjoint fixed points and fixes a line through 0",
                bases.len()
            ),
        )
        .witness = rendered;
    report.count("bases", bases.len());
    match kneser_project(&g, &norm) {
        Ok(p) => {
            let vertices: Vec<String> = p
                .distinct
                .iter()
                .map(|v| format!("{{{},{}}}", v.lines.0, v.lines.1))
                .collect();
            report.check(
                "kneser-projection",
                "thm:main",
                outcome(p.coclique, true),
                format!(
                    "eigenline pairs {} form a coclique: {}; common line: {}",
                    vertices.join(" "),
                    p.coclique,
                    p.common_line.map_or("none".to_string(), |l| l.to_string())
                ),
            );
        }
        Err(e) => {
            report.check(
                "kneser-projection",
                "thm:main",
                Outcome::Skipped,
                e.to_string(),
            );
        }
    }
    Ok(report)
}

fn enumerate(
    env: &mut Env,
    f: &FieldSpec,
    emit: Option<&Path>,
    long_run: bool,
) -> Result<Report, CliError> {
    search_range(f, long_run)?;
    let g = GroupTable::gl2(f)?;
    let mut report = Report::new("enumerate");
    field_inputs(&mut report, f);
    let opts = env.opts();
    let cap = env.args.cap_vertices;
    let c = env
        .timer
        .time("enumerate", || search::verify_main_theorem(&g, cap, opts))?;
    main_checks(&mut report, &c.report);
    if let Some(dir) = emit {
        let io = |source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        let width = c.sets.len().to_string().len();
        for (i, s) in c.sets.iter().enumerate() {
            let text: String = s.iter().map(|&m| format!("{}\n", g.mat(m))).collect();
            let path = dir.join(format!("set-{:0width$}.txt", i + 1));
            std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        }
        report.input("emit_witnesses", dir.display());
        report.count("files_written", c.sets.len());
    }
    Ok(report)
}

fn singer(f: &FieldSpec) -> Result<Report, CliError> {
    let g = GroupTable::gl2(f)?;
    let r = search::singer_report(&g);
    let mut report = Report::new("singer");
    field_inputs(&mut report, f);
    report.check(
        "singer-order",
        "thm:EKR-GL",
        outcome(r.order == r.expected_order, true),
        format!(
            "{} has order {} (q^2-1 = {})",
            r.matrix, r.order, r.expected_order
        ),
    );
    report.check(
        "singer-regular",
        "thm:EKR-GL",
        outcome(r.regular, true),
        "the cyclic group acts sharply transitively on nonzero vectors".to_string(),
    );
    report.check(
        "singer-clique",
        "thm:EKR-GL",
        outcome(r.clique && r.tight, true),
        format!(
            "distinct powers never intersect; (q^2-1)·q(q-1) = |GL(2,q)|: {}",
            r.tight
        ),
    );
    report.count("order", r.order);
    report.datum("singer", &r);
    Ok(report)
}

fn probe(env: &mut Env) -> Result<Report, CliError> {
    let opts = env.opts();
    let cap = env.args.cap_vertices;
    let r = env.timer.time("probe", || search::gl3_probe(cap, opts))?;
    let mut report = Report::new("probe-gl32");
    report.input("group", "GL(3,2)");
    let found = r.witness.is_some();
    report
        .check(
            "non-family-maximal-set",
            "probe:gl3",
            outcome(found, r.complete),
            format!(
                "{} maximal sets (largest {}); {} outside every point and hyperplane coset",
                r.total, r.max_size, r.outside_both
            ),
        )
        .witness = r.witness.iter().cloned().collect();
    report.count("maximal_sets", r.total);
    report.count("outside_both", r.outside_both);
    report.count("point_stabilizer_order", r.point_stabilizer_order);
    report.count("hyperplane_stabilizer_order", r.hyperplane_stabilizer_order);
    report.histogram("maximal_sets", &r.histogram);
    report.datum("probe", &r);
    Ok(report)
}

fn subgroups(env: &mut Env, f: &FieldSpec, gens: Option<&Path>) -> Result<Report, CliError> {
    let g = GroupTable::gl2(f)?;
    let mut report = Report::new("subgroups");
    field_inputs(&mut report, f);
    let list = match gens {
        Some(path) => read_subgroups(&g, path)?,
        None => match g.all_subgroups(DEFAULT_LATTICE_CAP) {
            Ok(_) => env.timer.time("lattice", || lattice_subgroups(&g)),
            Err(_) => search::builtin_subgroups(&g),
        },
    };
    let mut orders = BTreeMap::new();
    let mut rows = Vec::new();
    for (name, h) in &list {
        let points = g.is_transitive(h, crate::group::Domain::Points);
        let o2 = g.is_transitive(h, crate::group::Domain::O2);
        *orders.entry(h.order()).or_default() += 1;
        rows.push(serde_json::json!({
            "name": name,
            "order": h.order(),
            "generators": h.generators.iter().map(|&m| g.mat(m).to_string()).collect::<Vec<_>>(),
            "transitive_on_points": points,
            "transitive_on_o2": o2,
        }));
        if points {
            report.check(
                &format!("transitive {name}"),
                "thm:main2",
                outcome(o2, true),
                format!(
                    "order {}: transitive on nonzero vectors and on O2: {o2}",
                    h.order()
                ),
            );
        }
    }
    report.count("subgroups", list.len());
    report.histogram("subgroup_orders", &orders);
    report.datum("subgroups", rows);
    Ok(report)
}
