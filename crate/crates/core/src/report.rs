//! End-to-end analysis and its JSON, markdown and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::automaton::{self, TypeAutomaton};
use crate::cache;
use crate::config::AnalysisConfig;
use crate::dimension::{self, ExactSolution, OscEvidence, Verdict};
use crate::error::{Error, Result};
use crate::gamma::{self, CoverMode, GammaTruncation, OverlapSearch, TruncationStatus};
use crate::geometry::{format_rational, image_box, AxisBox};
use crate::spectral::SpectralBounds;

pub const REPORT_VERSION: u32 = 1;
/// Cap on the number of words examined by the exact-overlap search.
pub const OVERLAP_WORD_BUDGET: usize = 200_000;
/// Depth of the automaton-driven truncated lower bound.
pub const DEEP_TRUNCATION: usize = 30;
/// Slack for comparing the covering bound with `s`.
pub const VERDICT_SLACK: f64 = 1e-6;

/// Rounds to ten decimals so reports do not depend on last-bit noise.
fn r10(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e10).round() / 1e10
    } else {
        x
    }
}

fn r10_down(x: f64) -> f64 {
    (x * 1e10).floor() / 1e10
}

fn r10_up(x: f64) -> f64 {
    (x * 1e10).ceil() / 1e10
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    Partial,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxReport {
    pub lo: Vec<String>,
    pub hi: Vec<String>,
    pub suggested: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    pub k: usize,
    pub s: usize,
    pub t: usize,
    pub pruned: usize,
    pub ghosts: usize,
    /// Distinct maps among `T_k ∪ pruned_k`.
    pub n_dedup: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeSummary {
    pub id: usize,
    pub representative: String,
    pub first_depth: usize,
    pub recurrent: bool,
    pub neighbors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomatonSummary {
    pub closed: bool,
    pub depth_reached: usize,
    pub fingerprint_radius: usize,
    pub types: Vec<TypeSummary>,
    pub matrix: Vec<Vec<u64>>,
    pub emission: Vec<u64>,
    pub base_depth: usize,
    pub base_counts: Vec<u64>,
    pub preperiodic_s: Vec<u64>,
}

impl AutomatonSummary {
    fn new(aut: &TypeAutomaton) -> Self {
        AutomatonSummary {
            closed: aut.closed,
            depth_reached: aut.depth_reached,
            fingerprint_radius: aut.radius,
            types: aut
                .types
                .iter()
                .enumerate()
                .map(|(id, t)| TypeSummary {
                    id,
                    representative: t.representative.to_string(),
                    first_depth: t.first_depth,
                    recurrent: aut.recurrent[id],
                    neighbors: t.fingerprint.near.len(),
                })
                .collect(),
            matrix: aut.matrix.clone(),
            emission: aut.emission.clone(),
            base_depth: aut.base_depth,
            base_counts: aut.base_counts.clone(),
            preperiodic_s: aut.preperiodic_s.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DepthValue {
    pub n: usize,
    pub s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub similarity_dim: f64,
    pub empty_gamma: bool,
    pub s_lower_by_depth: Vec<DepthValue>,
    /// Truncated bound at a depth beyond the enumeration, from automaton counts.
    pub s_lower_deep: Option<DepthValue>,
    pub s_exact: Option<ExactSolution>,
    pub s_exact_note: Option<String>,
    /// `r^{-s}` for homogeneous systems with an exact solution.
    pub growth_constant: Option<f64>,
    pub s_best: f64,
    pub dv_upper: Option<f64>,
    pub verdict: Verdict,
    pub verdict_text: String,
    pub osc_evidence: OscEvidence,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub version: u32,
    pub status: Status,
    pub warnings: Vec<String>,
    pub config: AnalysisConfig,
    pub invariant_box: BoxReport,
    pub truncation: TruncationStatus,
    pub levels: Vec<LevelCounts>,
    pub overlaps: OverlapSearch,
    pub automaton: Option<AutomatonSummary>,
    pub spectral_radius: Option<SpectralBounds>,
    pub dimension: DimensionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions<'a> {
    pub cache: Option<&'a Path>,
    pub timings: bool,
}

/// The enumerated data behind a report, for callers that need words.
pub struct Analysis {
    pub report: AnalysisReport,
    pub truncation: GammaTruncation,
    pub automaton: Option<TypeAutomaton>,
}

/// Resolves the invariant box: the configured one, or a suggestion.
pub fn resolve_box(cfg: &AnalysisConfig) -> Result<(AxisBox, bool)> {
    let ifs = cfg.ifs()?;
    let (m, suggested) = match cfg.invariant_box()? {
        Some(m) => (m, false),
        None => (ifs.suggest_invariant_box()?, true),
    };
    for (i, f) in ifs.maps().iter().enumerate() {
        if !m.contains_box(&image_box(f, &m)?) {
            return Err(Error::NotInvariant(i + 1));
        }
    }
    Ok((m, suggested))
}

pub fn run_analysis(cfg: &AnalysisConfig) -> Result<AnalysisReport> {
    run_analysis_with(cfg, &RunOptions::default()).map(|a| a.report)
}

pub fn run_analysis_with(cfg: &AnalysisConfig, opts: &RunOptions<'_>) -> Result<Analysis> {
    let text = cfg.to_json();
    let cfg = crate::config::parse_config(&text)?;
    let ifs = cfg.ifs()?;
    let (m, suggested) = resolve_box(&cfg)?;
    let eopts = cfg.enumeration_options();
    let mut warnings = Vec::new();
    let mut timings = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut BTreeMap<String, f64>| {
        let now = Instant::now();
        timings.insert(name.to_string(), (now - clock).as_secs_f64() * 1e3);
        clock = now;
    };

    // enumeration, optionally resumed from a cache
    let mut lock = None;
    let mut prior = Vec::new();
    let hash = cache::config_hash(&cfg, &m);
    if let Some(path) = opts.cache {
        lock = Some(cache::CacheLock::acquire(path)?);
        match cache::load(path, &hash, &ifs, &m)? {
            cache::Loaded::Levels(levels) => prior = levels,
            cache::Loaded::Stale => warnings.push("cache written for another configuration; rebuilt".into()),
            cache::Loaded::Missing => {}
        }
    }
    let reused = prior.len().min(cfg.depth);
    let trunc = gamma::enumerate_from(&ifs, &m, prior, cfg.depth, &eopts)?;
    if let Some(path) = opts.cache {
        if trunc.depth() > reused {
            cache::store(path, &hash, &trunc.levels)?;
        }
    }
    drop(lock);
    if let TruncationStatus::TruncatedByBudget { depth } = trunc.status {
        if depth == 1 {
            return Err(Error::BudgetExceeded { budget: cfg.frontier_budget, depth });
        }
        warnings
            .push(format!("frontier budget {} exceeded at level {depth}; results are partial", cfg.frontier_budget));
    }
    lap("enumerate", &mut timings);

    let overlaps = gamma::detect_overlaps(&ifs, cfg.overlap_depth, OVERLAP_WORD_BUDGET);
    if overlaps.searched_depth < overlaps.requested_depth {
        warnings.push(format!(
            "overlap search stopped at depth {} of {} (word budget)",
            overlaps.searched_depth, overlaps.requested_depth
        ));
    }
    lap("overlaps", &mut timings);

    let aut = if eopts.prune_twins {
        automaton::from_truncation(&trunc)
    } else {
        automaton::build(&ifs, &m, cfg.depth, &eopts)
    };
    let aut = match aut {
        Ok(a) => Some(a),
        Err(e) => {
            warnings.push(format!("type automaton unavailable: {e}"));
            None
        }
    };
    let closed = aut.as_ref().is_some_and(|a| a.closed);
    if aut.is_some() && !closed {
        warnings.push(format!("type automaton did not close by depth {}", cfg.depth));
    }
    let spectral = aut.as_ref().and_then(|a| automaton::survivor_growth(a).ok());
    lap("automaton", &mut timings);

    let tol = cfg.tolerance;
    let similarity_dim = dimension::similarity_dim(&ifs, tol);
    let lower = dimension::gamma_lower(&trunc, tol);
    let empty_gamma = lower.is_empty();
    if empty_gamma {
        warnings.push("no isolated words up to the enumeration depth; s lower bound is 0".into());
    }
    let ratio = ifs.common_ratio().cloned();
    let mut s_exact = None;
    let mut s_exact_note = None;
    let mut s_lower_deep = None;
    match (closed, &ratio) {
        (false, _) => s_exact_note = Some("type automaton not closed; exact solve skipped".into()),
        (true, None) => s_exact_note = Some("unequal contraction ratios; exact solve skipped".into()),
        (true, Some(r)) => {
            let aut = aut.as_ref().expect("closed automaton");
            let sigma = spectral.map_or(0.0, |b| b.upper);
            match dimension::gamma_exact(aut, r, sigma, tol * 1e-2) {
                Ok(sol) => s_exact = Some(sol),
                Err(e) => s_exact_note = Some(e.to_string()),
            }
            if let Ok(counts) = aut.s_counts(DEEP_TRUNCATION) {
                s_lower_deep = dimension::gamma_lower_from_counts(r, &counts, tol)
                    .last()
                    .map(|&(n, s)| DepthValue { n, s: r10(s) });
            }
        }
    }
    let s_best = s_exact.map(|e| e.s).or_else(|| lower.last().map(|&(_, s)| s)).unwrap_or(0.0);
    let dv_upper = spectral.filter(|_| closed).map(|b| dimension::v_upper(b.upper, &ifs));
    let verdict = dimension::verdict(s_best, s_exact.is_some(), dv_upper, VERDICT_SLACK);
    let verdict_text = match verdict {
        Verdict::EqualityCertified => format!("dim_H U = s = {s_best:.5}"),
        Verdict::BracketOnly => format!(
            "dim_H U lies in [{s_best:.5}, {:.5}]; the covering bound does not decide equality",
            dv_upper.unwrap_or(f64::NAN).max(s_best)
        ),
        Verdict::Inconclusive => format!("dim_H U >= {s_best:.5}"),
    };
    let osc_evidence = dimension::osc_report(&overlaps.pairs, overlaps.searched_depth, closed, similarity_dim);
    lap("dimension", &mut timings);

    let n_dedup = gamma::survivor_cover_counts(&trunc, CoverMode::DedupOne);
    let levels = trunc
        .levels
        .iter()
        .zip(n_dedup)
        .map(|(l, n)| LevelCounts {
            k: l.depth,
            s: l.s.len(),
            t: l.t.len(),
            pruned: l.pruned.len(),
            ghosts: l.ghosts.len(),
            n_dedup: n,
        })
        .collect();

    let status = match trunc.status {
        TruncationStatus::Complete => Status::Complete,
        TruncationStatus::TruncatedByBudget { .. } => Status::Partial,
    };

    let report = AnalysisReport {
        version: REPORT_VERSION,
        status,
        warnings,
        config: cfg.clone(),
        invariant_box: BoxReport {
            lo: m.lo().iter().map(format_rational).collect(),
            hi: m.hi().iter().map(format_rational).collect(),
            suggested,
        },
        truncation: trunc.status,
        levels,
        overlaps,
        automaton: aut.as_ref().map(AutomatonSummary::new),
        spectral_radius: spectral.map(|b| SpectralBounds { lower: r10_down(b.lower), upper: r10_up(b.upper) }),
        dimension: DimensionReport {
            similarity_dim: r10(similarity_dim),
            empty_gamma,
            s_lower_by_depth: lower.iter().map(|&(n, s)| DepthValue { n, s: r10(s) }).collect(),
            s_lower_deep,
            s_exact: s_exact.map(|e| ExactSolution {
                s: r10(e.s),
                x: r10(e.x),
                residual: e.residual,
                tolerance: e.tolerance,
            }),
            s_exact_note,
            growth_constant: s_exact.map(|e| r10(1.0 / e.x)),
            s_best: r10(s_best),
            dv_upper: dv_upper.map(r10),
            verdict,
            verdict_text,
            osc_evidence,
        },
        timings_ms: opts.timings.then_some(timings),
    };
    Ok(Analysis { report, truncation: trunc, automaton: aut })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Markdown,
    CsvCounts,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            "csv-counts" | "csv" => Ok(Format::CsvCounts),
            other => Err(Error::Config(vec![format!("format: unknown format {other:?}")])),
        }
    }
}

pub fn emit_report(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Markdown => markdown(report),
        Format::CsvCounts => {
            let mut s = String::from("k,S,T,N\n");
            for l in &report.levels {
                let _ = writeln!(s, "{},{},{},{}", l.k, l.s, l.t, l.n_dedup);
            }
            s
        }
    }
}

fn f5(x: f64) -> String {
    format!("{x:.5}")
}

fn markdown(r: &AnalysisReport) -> String {
    let d = &r.dimension;
    let mut s = String::new();
    let title = r.config.name.as_deref().unwrap_or("IFS analysis");
    let _ = writeln!(s, "# {title}\n");
    let _ = writeln!(s, "- status: {}", if r.status == Status::Complete { "complete" } else { "partial" });
    let _ = writeln!(s, "- maps: {} in dimension {}", r.config.maps.len(), r.config.dimension);
    let _ = writeln!(
        s,
        "- invariant box: [{}] x [{}]{}",
        r.invariant_box.lo.join(", "),
        r.invariant_box.hi.join(", "),
        if r.invariant_box.suggested { " (suggested)" } else { "" }
    );
    for w in &r.warnings {
        let _ = writeln!(s, "- warning: {w}");
    }

    let _ = writeln!(s, "\n## Level counts\n\n| k | S_k | T_k | pruned | N_k |\n|---|---|---|---|---|");
    for l in &r.levels {
        let _ = writeln!(s, "| {} | {} | {} | {} | {} |", l.k, l.s, l.t, l.pruned, l.n_dedup);
    }

    let _ = writeln!(s, "\n## Exact overlaps (searched to depth {})\n", r.overlaps.searched_depth);
    if r.overlaps.pairs.is_empty() {
        let _ = writeln!(s, "none");
    }
    for p in r.overlaps.pairs.iter().take(20) {
        let _ = writeln!(s, "- {p}");
    }
    if r.overlaps.pairs.len() > 20 {
        let _ = writeln!(s, "- ... {} more", r.overlaps.pairs.len() - 20);
    }

    if let Some(a) = &r.automaton {
        let _ = writeln!(
            s,
            "\n## Type automaton\n\n- closed: {} (depth {})\n- base depth: {}\n- emission: {:?}\n- base counts: {:?}\n",
            a.closed, a.depth_reached, a.base_depth, a.emission, a.base_counts
        );
        if !a.matrix.is_empty() {
            let header: Vec<String> = (0..a.matrix.len()).map(|i| format!("t{i}")).collect();
            let _ = writeln!(s, "| | {} |", header.join(" | "));
            let _ = writeln!(s, "|---|{}", "---|".repeat(header.len()));
            for (i, row) in a.matrix.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                let _ = writeln!(s, "| t{i} ({}) | {} |", a.types[i].representative, cells.join(" | "));
            }
        }
    }
    if let Some(b) = &r.spectral_radius {
        let _ = writeln!(s, "\n- spectral radius in [{}, {}]", f5(b.lower), f5(b.upper));
    }

    let _ = writeln!(s, "\n## Dimensions\n\n| quantity | value |\n|---|---|");
    let _ = writeln!(s, "| similarity dimension | {} |", f5(d.similarity_dim));
    for v in &d.s_lower_by_depth {
        let _ = writeln!(s, "| s_{} | {} |", v.n, f5(v.s));
    }
    if let Some(v) = &d.s_lower_deep {
        let _ = writeln!(s, "| s_{} (automaton counts) | {} |", v.n, f5(v.s));
    }
    if let Some(e) = &d.s_exact {
        let _ = writeln!(s, "| s exact | {} |", f5(e.s));
    }
    if let Some(g) = d.growth_constant {
        let _ = writeln!(s, "| r^-s | {} |", f5(g));
    }
    if let Some(v) = d.dv_upper {
        let _ = writeln!(s, "| covering bound d_V | {} |", f5(v));
    }
    let _ = writeln!(s, "\n**Verdict:** {:?}: {}\n", d.verdict, d.verdict_text);
    if let Some(n) = &d.s_exact_note {
        let _ = writeln!(s, "Note: {n}\n");
    }
    let _ = writeln!(s, "**Open set condition:** {}", d.osc_evidence.text);
    s
}

/// Γ words by level, one line per level.
pub fn gamma_listing(trunc: &GammaTruncation) -> String {
    let mut s = String::new();
    for l in &trunc.levels {
        let words: Vec<String> = l.s.iter().map(|n| n.word.to_string()).collect();
        let _ = writeln!(s, "S_{} ({}): {}", l.depth, l.s.len(), words.join(" "));
    }
    s
}

/// Counts as plain integers when they fit.
pub fn small_counts(v: &[num_bigint::BigUint]) -> Vec<u64> {
    v.iter().map(|c| c.to_u64().unwrap_or(u64::MAX)).collect()
}
