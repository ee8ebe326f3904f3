//! Built-in example systems and a self-check table for each.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::automaton::equivalent_up_to_relabeling;
use crate::config::{map_config, AnalysisConfig, BoxConfig};
use crate::dimension::{OscConclusion, Verdict};
use crate::error::{Error, Result};
use crate::gamma::OverlapPair;
use crate::geometry::{format_rational, rat, Rational};
use crate::report::{self, Analysis, RunOptions};

/// `0 < r < (3 − √5)/2`, decided exactly as `3 − 2r > 0` and `(3 − 2r)² > 5`.
pub fn below_golden_threshold(r: &Rational) -> bool {
    let u = Rational::from_integer(BigInt::from(3)) - r * Rational::from_integer(BigInt::from(2));
    *r > Rational::zero() && u > Rational::zero() && &u * &u > Rational::from_integer(BigInt::from(5))
}

fn check_threshold(r: &Rational) -> Result<()> {
    if below_golden_threshold(r) {
        Ok(())
    } else {
        Err(Error::RatioOutOfRange(format!("{} (must lie below (3-sqrt 5)/2)", format_rational(r))))
    }
}

/// `{ρx, ρx + ρ, ρx + 1}` on `[0, 1/(1−ρ)]`.
pub fn ex1_config(rho: &Rational) -> Result<AnalysisConfig> {
    check_threshold(rho)?;
    let maps = [Rational::zero(), rho.clone(), Rational::one()]
        .iter()
        .map(|t| map_config(rho, std::slice::from_ref(t)))
        .collect();
    let top = Rational::one() / (Rational::one() - rho);
    let mut c = AnalysisConfig::new(1, maps, Some(BoxConfig { lo: vec!["0".into()], hi: vec![format_rational(&top)] }));
    c.name = Some(format!("three maps of ratio {}", format_rational(rho)));
    Ok(c)
}

/// Four corner squares plus a fifth square straddling two of them, on `[0,1]²`.
pub fn ex2_config(lambda: &Rational) -> Result<AnalysisConfig> {
    check_threshold(lambda)?;
    let z = Rational::zero();
    let c = Rational::one() - lambda;
    let trans = [
        [z.clone(), z.clone()],
        [c.clone(), z.clone()],
        [c.clone(), c.clone()],
        [z.clone(), c.clone()],
        [lambda * &c, &c * &c],
    ];
    let maps = trans.iter().map(|t| map_config(lambda, t)).collect();
    let unit = BoxConfig { lo: vec!["0".into(); 2], hi: vec!["1".into(); 2] };
    let mut cfg = AnalysisConfig::new(2, maps, Some(unit));
    cfg.name = Some(format!("five squares of ratio {}", format_rational(lambda)));
    cfg.depth = 10;
    Ok(cfg)
}

/// `{x/4, x/4 + 9/17, (x+3)/4}` on `[0,1]`.
pub fn ex4_config() -> AnalysisConfig {
    let r = rat(1, 4);
    let maps = [rat(0, 1), rat(9, 17), rat(3, 4)].iter().map(|t| map_config(&r, std::slice::from_ref(t))).collect();
    let mut c = AnalysisConfig::new(1, maps, Some(BoxConfig { lo: vec!["0".into()], hi: vec!["1".into()] }));
    c.name = Some("three maps of ratio 1/4".into());
    c
}

/// Middle-thirds Cantor system.
pub fn cantor_config() -> AnalysisConfig {
    let r = rat(1, 3);
    let maps = [rat(0, 1), rat(2, 3)].iter().map(|t| map_config(&r, std::slice::from_ref(t))).collect();
    let mut c = AnalysisConfig::new(1, maps, Some(BoxConfig { lo: vec!["0".into()], hi: vec!["1".into()] }));
    c.name = Some("middle-thirds Cantor set".into());
    c
}

pub const BUILTIN_NAMES: [&str; 4] = ["ex1", "ex2", "ex4", "cantor"];

pub fn builtin_config(name: &str) -> Result<AnalysisConfig> {
    match name {
        "ex1" => ex1_config(&rat(1, 3)),
        "ex2" => ex2_config(&rat(1, 3)),
        "ex4" => Ok(ex4_config()),
        "cantor" => Ok(cantor_config()),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Transfer matrix of the five recurrent types of `ex4`, rows indexed by child type.
pub const EX4_MATRIX: [[u64; 5]; 5] =
    [[0, 1, 0, 0, 1], [0, 1, 0, 1, 1], [1, 0, 1, 0, 0], [1, 0, 1, 0, 0], [0, 1, 0, 1, 0]];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

fn check(name: &str, expected: impl Into<String>, observed: impl Into<String>, pass: bool) -> Check {
    Check { name: name.into(), expected: expected.into(), observed: observed.into(), pass }
}

fn has_pair(a: &Analysis, u: &str, v: &str) -> bool {
    let want = OverlapPair { u: u.parse().expect("word"), v: v.parse().expect("word") };
    a.report.overlaps.pairs.contains(&want)
}

fn s_counts(a: &Analysis) -> Vec<usize> {
    a.truncation.s_counts()
}

fn exact(a: &Analysis) -> Option<(f64, f64)> {
    let d = &a.report.dimension;
    d.s_exact.map(|e| (e.s, e.x))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.6}"))
}

/// Runs a built-in example and checks its known values.
pub fn verify_builtin(name: &str) -> Result<Vec<Check>> {
    let cfg = builtin_config(name)?;
    let a = report::run_analysis_with(&cfg, &RunOptions::default())?;
    let d = &a.report.dimension;
    let closed = a.automaton.as_ref().is_some_and(|x| x.closed);
    let mut out = Vec::new();
    match name {
        "ex1" => {
            let want: Vec<usize> = (0..12).map(|k: usize| k.max(1)).collect();
            out.push(check(
                "S-counts k=1..12",
                format!("{want:?}"),
                format!("{:?}", s_counts(&a)),
                s_counts(&a) == want,
            ));
            out.push(check("automaton closes", "true", closed.to_string(), closed));
            let lam = exact(&a).map(|(_, x)| 1.0 / x);
            out.push(check(
                "growth constant 3^s",
                "2.3247 +- 5e-4",
                fmt_opt(lam),
                lam.is_some_and(|l| (l - 2.3247).abs() <= 5e-4),
            ));
            let res = lam.map(|l| (l * l * l - 3.0 * l * l + 2.0 * l - 1.0).abs());
            out.push(check("cubic residual", "< 1e-6", fmt_opt(res), res.is_some_and(|r| r < 1e-6)));
            out.push(check(
                "verdict",
                "EqualityCertified",
                format!("{:?}", d.verdict),
                d.verdict == Verdict::EqualityCertified,
            ));
            let dv_want = 2f64.ln() / 3f64.ln();
            out.push(check(
                "covering bound d_V",
                format!("{dv_want:.5} +- 1e-4"),
                fmt_opt(d.dv_upper),
                d.dv_upper.is_some_and(|v| (v - dv_want).abs() <= 1e-4),
            ));
            out.push(check("overlap 13 = 21", "found", has_pair(&a, "13", "21").to_string(), has_pair(&a, "13", "21")));
        }
        "ex2" => {
            let want: Vec<usize> = (1..=10).map(|k| if k == 1 { 3 } else { 3 * k - 1 }).collect();
            out.push(check(
                "S-counts k=1..10",
                format!("{want:?}"),
                format!("{:?}", s_counts(&a)),
                s_counts(&a) == want,
            ));
            let x = exact(&a).map(|(_, x)| x);
            let res = x.map(|x| (x * x * x - 2.0 * x * x + 5.0 * x - 1.0).abs());
            out.push(check("cubic residual", "< 1e-6", fmt_opt(res), res.is_some_and(|r| r < 1e-6)));
            let inv = x.map(|x| 1.0 / x);
            out.push(check("1/x", "4.61347 +- 1e-3", fmt_opt(inv), inv.is_some_and(|v| (v - 4.61347).abs() <= 1e-3)));
            let at2 = a.report.overlaps.pairs.iter().any(|p| p.u.to_string() == "42" && p.v.to_string() == "54");
            out.push(check("overlap 42 = 54 at depth 2", "found", at2.to_string(), at2));
            out.push(check(
                "verdict",
                "EqualityCertified",
                format!("{:?}", d.verdict),
                d.verdict == Verdict::EqualityCertified,
            ));
        }
        "ex4" => {
            let got: Vec<usize> = s_counts(&a).into_iter().take(6).collect();
            out.push(check("S-counts k=1..6", "[1, 1, 2, 4, 9, 21]", format!("{got:?}"), got == [1, 1, 2, 4, 9, 21]));
            let aut = a.automaton.as_ref();
            let types = aut.map_or(0, |x| x.recurrent_count());
            out.push(check("recurrent types", "5", types.to_string(), closed && types == 5));
            let reference: Vec<Vec<u64>> = EX4_MATRIX.iter().map(|r| r.to_vec()).collect();
            let same = aut.is_some_and(|x| equivalent_up_to_relabeling(&x.matrix, &reference).is_some());
            out.push(check("transfer matrix up to relabeling", "equal", same.to_string(), same));
            let support = aut.map_or(0, |x| x.emission.iter().filter(|&&e| e > 0).count());
            out.push(check("emission support", "2", support.to_string(), support == 2));
            let b = a.report.spectral_radius;
            let ok = b.is_some_and(|b| b.width() <= 1e-3 && b.lower <= 2.27755 && b.upper >= 2.27745);
            out.push(check(
                "spectral radius",
                "contains 2.2775, width <= 1e-3",
                b.map_or("none".into(), |b| format!("[{:.6}, {:.6}]", b.lower, b.upper)),
                ok,
            ));
            let s = exact(&a).map(|(s, _)| s);
            let four_s = s.map(|s| 4f64.powf(s));
            out.push(check("4^s", "> 2.4693", fmt_opt(four_s), four_s.is_some_and(|v| v > 2.4693)));
            let deep = d.s_lower_deep.map(|v| v.s);
            let gap = s.zip(deep).map(|(s, t)| (s - t).abs());
            out.push(check("s vs depth-30 truncation", "<= 1e-3", fmt_opt(gap), gap.is_some_and(|g| g <= 1e-3)));
            out.push(check(
                "overlap 232 = 311",
                "found",
                has_pair(&a, "232", "311").to_string(),
                has_pair(&a, "232", "311"),
            ));
            let dv_ok = d.dv_upper.zip(s).is_some_and(|(v, s)| (v - 0.59373).abs() <= 1e-3 && v < s);
            out.push(check("covering bound d_V", "~0.59373 < s", fmt_opt(d.dv_upper), dv_ok));
            out.push(check(
                "verdict",
                "EqualityCertified",
                format!("{:?}", d.verdict),
                d.verdict == Verdict::EqualityCertified,
            ));
        }
        "cantor" => {
            let want = 2f64.ln() / 3f64.ln();
            let s = exact(&a).map(|(s, _)| s);
            out.push(check("s", format!("{want:.6}"), fmt_opt(s), s.is_some_and(|s| (s - want).abs() <= 1e-6)));
            out.push(check(
                "no overlaps",
                "none",
                a.report.overlaps.pairs.len().to_string(),
                a.report.overlaps.pairs.is_empty(),
            ));
            let level1 = s_counts(&a).first().copied().unwrap_or(0);
            out.push(check("every symbol isolated", "2", level1.to_string(), level1 == 2));
            let osc = d.osc_evidence.conclusion;
            out.push(check("open set condition", "Osc", format!("{osc:?}"), osc == OscConclusion::Osc));
            out.push(check(
                "verdict",
                "EqualityCertified",
                format!("{:?}", d.verdict),
                d.verdict == Verdict::EqualityCertified,
            ));
        }
        _ => unreachable!("builtin_config rejects unknown names"),
    }
    Ok(out)
}

pub fn render_checks(name: &str, checks: &[Check]) -> String {
    let mut s = format!("{name}\n");
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in checks {
        s.push_str(&format!(
            "  {} {:<w$}  expected {}  observed {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.observed
        ));
    }
    s
}
