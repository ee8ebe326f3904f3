//! Moran-equation solvers, the covering bound and the resulting verdict.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::automaton::TypeAutomaton;
use crate::error::{Error, Result};
use crate::gamma::{GammaTruncation, OverlapPair};
use crate::geometry::{to_f64, Ifs, Rational};

/// Result of a bracketing bisection: `lo` and `hi` have residuals of opposite sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub residual: f64,
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<Root> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(Root { value: lo, lo, hi: lo, residual: 0.0 });
    }
    if fhi == 0.0 {
        return Ok(Root { value: hi, lo: hi, hi, residual: 0.0 });
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(Root { value: mid, lo: mid, hi: mid, residual: 0.0 });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    Ok(Root { value, lo, hi, residual: f(value) })
}

fn moran_sum(terms: &[(f64, f64)], s: f64) -> f64 {
    terms.iter().map(|&(lr, c)| c * (s * lr).exp()).sum::<f64>() - 1.0
}

/// An exponent at which the Moran sum is at most 1.
fn moran_upper(terms: &[(f64, f64)]) -> Result<f64> {
    let mut hi = 1.0;
    while moran_sum(terms, hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoRoot("Moran sum does not drop below 1".into()));
        }
    }
    Ok(hi)
}

/// Solves `Σ count·r^s = 1` for `s ∈ [0, hi]` over (ln r, count) terms with `r < 1`.
///
/// Bisection over a fixed bracket is monotone in the terms: adding terms
/// never lowers the returned root.
fn moran_root_in(terms: &[(f64, f64)], hi: f64, tol: f64) -> Result<f64> {
    if moran_sum(terms, 0.0) <= 0.0 {
        // a single word, or nothing at all
        return Ok(0.0);
    }
    Ok(bisect(|s| moran_sum(terms, s), 0.0, hi, tol)?.value)
}

fn moran_root(terms: &[(f64, f64)], tol: f64) -> Result<f64> {
    moran_root_in(terms, moran_upper(terms)?, tol)
}

fn solve_family(families: Vec<(usize, Vec<(f64, f64)>)>, tol: f64) -> Vec<(usize, f64)> {
    let Some((_, last)) = families.last() else { return Vec::new() };
    let hi = moran_upper(last).expect("finite family");
    families.iter().map(|(n, t)| (*n, moran_root_in(t, hi, tol).expect("bracket found"))).collect()
}

/// Similarity dimension: the root of `Σ r_i^s = 1`.
pub fn similarity_dim(ifs: &Ifs, tol: f64) -> f64 {
    let terms: Vec<(f64, f64)> = ifs.maps().iter().map(|f| (to_f64(f.ratio()).ln(), 1.0)).collect();
    moran_root(&terms, tol).expect("at least two contractions")
}

/// `s_N` solving the Moran equation over `Γ_{≤N}`, for every `N` with nonempty `Γ_{≤N}`.
pub fn gamma_lower(trunc: &GammaTruncation, tol: f64) -> Vec<(usize, f64)> {
    let mut by_ratio: BTreeMap<Rational, u64> = BTreeMap::new();
    let mut families = Vec::new();
    for level in &trunc.levels {
        for n in &level.s {
            *by_ratio.entry(n.map.ratio().clone()).or_default() += 1;
        }
        if !by_ratio.is_empty() {
            families.push((level.depth, by_ratio.iter().map(|(r, &c)| (to_f64(r).ln(), c as f64)).collect()));
        }
    }
    solve_family(families, tol)
}

/// `s_N` for a homogeneous system from exact level counts `|S_1|, …`.
pub fn gamma_lower_from_counts(ratio: &Rational, counts: &[BigUint], tol: f64) -> Vec<(usize, f64)> {
    let lr = to_f64(ratio).ln();
    let mut terms = Vec::new();
    let mut families = Vec::new();
    for (k, c) in counts.iter().enumerate() {
        let c = c.to_f64().unwrap_or(f64::INFINITY);
        if c > 0.0 {
            terms.push(((k + 1) as f64 * lr, c));
        }
        if !terms.is_empty() {
            families.push((k + 1, terms.clone()));
        }
    }
    solve_family(families, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactSolution {
    /// Root `s` of the Moran equation over all of Γ.
    pub s: f64,
    /// `x = r^s`.
    pub x: f64,
    /// Residual `G(x) − 1`.
    pub residual: f64,
    pub tolerance: f64,
}

/// Generating function `G(x) = Σ_k |S_k| x^k` of a closed automaton.
pub fn generating_function(aut: &TypeAutomaton, x: f64) -> Option<f64> {
    let k0 = aut.base_depth;
    let head: f64 = aut.preperiodic_s.iter().enumerate().map(|(k, &c)| c as f64 * x.powi(k as i32 + 1)).sum();
    let n = aut.len();
    if n == 0 {
        return Some(head);
    }
    let a = DMatrix::from_fn(n, n, |i, j| aut.matrix[i][j] as f64);
    let m = DMatrix::identity(n, n) - a * x;
    let b = DVector::from_iterator(n, aut.base_counts.iter().map(|&c| c as f64));
    let y = m.lu().solve(&b)?;
    let e = DVector::from_iterator(n, aut.emission.iter().map(|&c| c as f64));
    Some(head + x.powi(k0 as i32 + 1) * e.dot(&y))
}

/// Exact `s` for a closed automaton of a homogeneous system with ratio `ratio`.
///
/// Bisects `G(x) = 1` on `x ∈ (0, min(1, 1/σ))` where `σ` is an upper bound on
/// the spectral radius, so the resolvent series converges at every probe.
pub fn gamma_exact(aut: &TypeAutomaton, ratio: &Rational, sigma_upper: f64, tol: f64) -> Result<ExactSolution> {
    if !aut.closed {
        return Err(Error::AutomatonOpen);
    }
    let lr = to_f64(ratio).ln();
    let x_max = if sigma_upper > 1.0 { 1.0 / sigma_upper } else { 1.0 };
    let x_hi = x_max * (1.0 - 1e-12);
    let g = |x: f64| generating_function(aut, x).map(|v| v - 1.0).unwrap_or(f64::INFINITY);
    let g_hi = g(x_hi);
    if g_hi.is_finite() && g_hi < 0.0 {
        return Err(Error::NoRoot(format!(
            "G stays below 1 up to the radius of convergence: G({x_hi:.6}) = {:.6}",
            g_hi + 1.0
        )));
    }
    let root = bisect(g, 0.0, x_hi, tol)?;
    let x = root.value;
    Ok(ExactSolution { s: x.ln() / lr, x, residual: root.residual, tolerance: tol })
}

/// Covering upper bound `ln σ / (−ln r_max)` on the dimension of the
/// non-Γ part; zero when counts grow subexponentially.
pub fn v_upper(sigma_upper: f64, ifs: &Ifs) -> f64 {
    if sigma_upper <= 1.0 {
        0.0
    } else {
        sigma_upper.ln() / -to_f64(ifs.max_ratio()).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    EqualityCertified,
    BracketOnly,
    Inconclusive,
}

/// `EqualityCertified` needs an exact `s` and a covering bound not exceeding it.
pub fn verdict(s_best: f64, s_is_exact: bool, dv: Option<f64>, tol: f64) -> Verdict {
    match dv {
        None => Verdict::Inconclusive,
        Some(d) if d > s_best + tol => Verdict::BracketOnly,
        Some(_) if s_is_exact => Verdict::EqualityCertified,
        // covering bound is small but s itself is only bounded below
        Some(_) => Verdict::Inconclusive,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OscConclusion {
    NoOsc,
    Osc,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscEvidence {
    pub overlaps: Vec<OverlapPair>,
    pub searched_depth: usize,
    pub automaton_closed: bool,
    pub conclusion: OscConclusion,
    pub text: String,
}

pub fn osc_report(
    overlaps: &[OverlapPair],
    searched_depth: usize,
    aut_closed: bool,
    similarity_dim: f64,
) -> OscEvidence {
    let (conclusion, text) = if let Some(p) = overlaps.first() {
        (
            OscConclusion::NoOsc,
            format!("exact overlap {p}: open set condition fails; dim_H U < dim_S K = {similarity_dim:.5} expected"),
        )
    } else if aut_closed {
        (
            OscConclusion::Osc,
            format!(
                "finite type and no exact overlaps up to depth {searched_depth}: open set condition holds; \
                 dim_H U = dim_S K = {similarity_dim:.5}"
            ),
        )
    } else {
        (OscConclusion::Inconclusive, format!("inconclusive at depth {searched_depth}"))
    };
    OscEvidence { overlaps: overlaps.to_vec(), searched_depth, automaton_closed: aut_closed, conclusion, text }
}
