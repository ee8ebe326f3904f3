//! JSON analysis configuration. Rationals travel as strings so nothing is lost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::EnumerationOptions;
use crate::geometry::{format_rational, parse_rational, AxisBox, Ifs, Rational, SignedPermutation, Similitude};

fn default_depth() -> usize {
    12
}
fn default_true() -> bool {
    true
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_budget() -> usize {
    1_000_000
}
fn default_radius() -> usize {
    2
}
fn default_overlap_depth() -> usize {
    6
}

/// Signed permutation with 1-based indices: `(Rx)_i = signs[i]·x[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthConfig {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub ratio: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orth: Option<OrthConfig>,
    pub translation: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<String>,
    pub hi: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dimension: usize,
    pub maps: Vec<MapConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariant_box: Option<BoxConfig>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_true")]
    pub prune_twins: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_budget")]
    pub frontier_budget: usize,
    #[serde(default = "default_radius")]
    pub neighborhood_radius: usize,
    #[serde(default = "default_overlap_depth")]
    pub overlap_depth: usize,
}

impl AnalysisConfig {
    /// A configuration with default settings for the given maps.
    pub fn new(dimension: usize, maps: Vec<MapConfig>, invariant_box: Option<BoxConfig>) -> Self {
        AnalysisConfig {
            name: None,
            dimension,
            maps,
            invariant_box,
            depth: default_depth(),
            prune_twins: true,
            tolerance: default_tolerance(),
            frontier_budget: default_budget(),
            neighborhood_radius: default_radius(),
            overlap_depth: default_overlap_depth(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn enumeration_options(&self) -> EnumerationOptions {
        EnumerationOptions {
            prune_twins: self.prune_twins,
            neighborhood_radius: self.neighborhood_radius,
            frontier_budget: self.frontier_budget,
        }
    }

    /// Builds the IFS, collecting every field-level problem.
    pub fn ifs(&self) -> Result<Ifs> {
        let mut errs = Vec::new();
        let maps = self.similitudes(&mut errs);
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        Ifs::new(maps).map_err(|e| Error::Config(vec![format!("maps: {e}")]))
    }

    fn similitudes(&self, errs: &mut Vec<String>) -> Vec<Similitude> {
        let d = self.dimension;
        let mut out = Vec::new();
        for (i, mc) in self.maps.iter().enumerate() {
            let at = |field: &str| format!("maps[{i}].{field}");
            let ratio = match parse_rational(&mc.ratio) {
                Ok(r) if r > Rational::from_integer(0.into()) && r < Rational::from_integer(1.into()) => Some(r),
                Ok(r) => {
                    errs.push(format!("{}: ratio {} not in (0,1)", at("ratio"), format_rational(&r)));
                    None
                }
                Err(e) => {
                    errs.push(format!("{}: {e}", at("ratio")));
                    None
                }
            };
            let trans = parse_point(&mc.translation, d, &at("translation"), errs);
            let orth = match &mc.orth {
                None => Some(SignedPermutation::identity(d)),
                Some(o) => {
                    if o.perm.len() != d || o.signs.len() != d {
                        errs.push(format!("{}: expected {d} entries", at("orth")));
                        None
                    } else if o.perm.contains(&0) {
                        errs.push(format!("{}: permutation entries are 1-based", at("orth.perm")));
                        None
                    } else {
                        SignedPermutation::new(o.perm.iter().map(|p| p - 1).collect(), o.signs.clone())
                            .map_err(|e| errs.push(format!("{}: {e}", at("orth"))))
                            .ok()
                    }
                }
            };
            if let (Some(r), Some(o), Some(t)) = (ratio, orth, trans) {
                match Similitude::new(r, o, t) {
                    Ok(f) => out.push(f),
                    Err(e) => errs.push(format!("maps[{i}]: {e}")),
                }
            }
        }
        out
    }

    /// The configured box, if any.
    pub fn invariant_box(&self) -> Result<Option<AxisBox>> {
        let Some(b) = &self.invariant_box else { return Ok(None) };
        let mut errs = Vec::new();
        let lo = parse_point(&b.lo, self.dimension, "invariant_box.lo", &mut errs);
        let hi = parse_point(&b.hi, self.dimension, "invariant_box.hi", &mut errs);
        match (lo, hi) {
            (Some(lo), Some(hi)) if errs.is_empty() => {
                AxisBox::new(lo, hi).map(Some).map_err(|e| Error::Config(vec![format!("invariant_box: {e}")]))
            }
            _ => Err(Error::Config(errs)),
        }
    }

    fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.dimension == 0 {
            errs.push("dimension: must be at least 1".into());
        }
        if self.maps.len() < 2 {
            errs.push(format!("maps: need at least two maps, got {}", self.maps.len()));
        }
        self.similitudes(&mut errs);
        if let Err(Error::Config(e)) = self.invariant_box() {
            errs.extend(e);
        }
        if self.depth == 0 {
            errs.push("depth: must be at least 1".into());
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            errs.push(format!("tolerance: {} not in (0,1)", self.tolerance));
        }
        if self.frontier_budget == 0 {
            errs.push("frontier_budget: must be positive".into());
        }
        if self.neighborhood_radius == 0 {
            errs.push("neighborhood_radius: must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

fn parse_point(items: &[String], dim: usize, field: &str, errs: &mut Vec<String>) -> Option<Vec<Rational>> {
    if items.len() != dim {
        errs.push(format!("{field}: dimension mismatch: expected {dim}, found {}", items.len()));
        return None;
    }
    let mut out = Vec::with_capacity(dim);
    for (j, s) in items.iter().enumerate() {
        match parse_rational(s) {
            Ok(r) => out.push(r),
            Err(e) => errs.push(format!("{field}[{j}]: {e}")),
        }
    }
    (out.len() == dim).then_some(out)
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Map configuration from exact values.
pub fn map_config(ratio: &Rational, translation: &[Rational]) -> MapConfig {
    MapConfig {
        ratio: format_rational(ratio),
        orth: None,
        translation: translation.iter().map(format_rational).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EX4: &str = r#"{
        "dimension": 1,
        "maps": [
            {"ratio": "1/4", "translation": ["0"]},
            {"ratio": "1/4", "translation": ["9/17"]},
            {"ratio": "1/4", "translation": ["3/4"]}
        ],
        "invariant_box": {"lo": ["0"], "hi": ["1"]}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = parse_config(EX4).unwrap();
        assert_eq!(c.depth, 12);
        assert!(c.prune_twins);
        assert_eq!(c.tolerance, 1e-9);
        assert_eq!(c.frontier_budget, 1_000_000);
        assert_eq!(c.ifs().unwrap().len(), 3);
        assert_eq!(c.invariant_box().unwrap(), Some(AxisBox::unit(1)));
    }

    #[test]
    fn two_dimensional_config() {
        let text = r#"{"dimension": 2, "maps": [
            {"ratio": "1/3", "translation": ["0", "0"]},
            {"ratio": "1/3", "translation": ["2/3", "0"]},
            {"ratio": "1/3", "translation": ["2/3", "2/3"]},
            {"ratio": "1/3", "translation": ["0", "2/3"]},
            {"ratio": "1/3", "orth": {"perm": [2, 1], "signs": [1, -1]}, "translation": ["2/9", "4/9"]}
        ]}"#;
        let c = parse_config(text).unwrap();
        let f = &c.ifs().unwrap().maps()[4].clone();
        assert_eq!(f.orth().perm(), &[1, 0]);
        assert!(c.invariant_box().unwrap().is_none());
    }

    #[test]
    fn reports_field_errors() {
        let text = EX4.replacen("\"1/4\"", "\"5/4\"", 1);
        match parse_config(&text).unwrap_err() {
            Error::Config(e) => assert!(e[0].contains("maps[0].ratio") && e[0].contains("not in (0,1)"), "{e:?}"),
            e => panic!("{e}"),
        }
        let text = EX4.replace("\"9/17\"", "\"9/0\"").replace("\"3/4\"]", "\"3/4\", \"1\"]");
        match parse_config(&text).unwrap_err() {
            Error::Config(e) => {
                assert_eq!(e.len(), 2, "{e:?}");
                assert!(e[0].contains("maps[1].translation[0]"));
                assert!(e[1].contains("maps[2].translation") && e[1].contains("mismatch"));
            }
            e => panic!("{e}"),
        }
        let bad_perm =
            EX4.replacen(r#""translation": ["0"]"#, r#""orth": {"perm": [2], "signs": [1]}, "translation": ["0"]"#, 1);
        assert!(matches!(parse_config(&bad_perm), Err(Error::Config(_))));
        assert!(matches!(parse_config("{"), Err(Error::Config(_))));
        assert!(matches!(parse_config(r#"{"dimension": 1, "maps": [], "bogus": 1}"#), Err(Error::Config(_))));
    }

    fn arb_rational_string() -> impl Strategy<Value = String> {
        (1i64..50, 51i64..100).prop_map(|(p, q)| format!("{p}/{q}"))
    }

    fn arb_config() -> impl Strategy<Value = AnalysisConfig> {
        (1usize..3).prop_flat_map(|d| {
            let map = (arb_rational_string(), proptest::collection::vec(arb_rational_string(), d), any::<bool>())
                .prop_map(move |(ratio, translation, flip)| MapConfig {
                    ratio,
                    orth: flip.then(|| OrthConfig { perm: (1..=d).rev().collect(), signs: vec![-1; d] }),
                    translation,
                });
            (
                proptest::collection::vec(map, 2..5),
                1usize..20,
                any::<bool>(),
                1e-12f64..1e-3,
                1usize..5_000_000,
                any::<bool>(),
            )
                .prop_map(move |(maps, depth, prune, tol, budget, with_box)| AnalysisConfig {
                    name: None,
                    dimension: d,
                    maps,
                    invariant_box: with_box.then(|| BoxConfig { lo: vec!["0".into(); d], hi: vec!["1".into(); d] }),
                    depth,
                    prune_twins: prune,
                    tolerance: tol,
                    frontier_budget: budget,
                    neighborhood_radius: 2,
                    overlap_depth: 6,
                })
        })
    }

    proptest! {
        #[test]
        fn emit_then_parse_is_identity(c in arb_config()) {
            prop_assert_eq!(parse_config(&c.to_json()).unwrap(), c);
        }
    }
}
