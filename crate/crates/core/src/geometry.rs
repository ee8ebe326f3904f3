//! Exact rational similitudes, words over the IFS alphabet and axis-aligned boxes.
//!
//! Orthogonal parts are signed coordinate permutations, so the image of a box
//! under any composed map is again a box and every predicate here is decided
//! with exact rational comparisons.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::InvalidRational(s.to_string()));
    }
    match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| Error::InvalidRational(s.into()))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| Error::InvalidRational(s.into()))?;
            if q.is_zero() {
                return Err(Error::InvalidRational(s.into()));
            }
            Ok(Rational::new(p, q))
        }
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| Error::InvalidRational(s.into())),
    }
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

pub type Point = Vec<Rational>;

/// Closed axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisBox {
    lo: Point,
    hi: Point,
}

impl AxisBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        if let Some(j) = (0..lo.len()).find(|&j| lo[j] > hi[j]) {
            return Err(Error::InvalidBox(format!("lo > hi on axis {}", j + 1)));
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        AxisBox { lo: vec![Rational::zero(); dim], hi: vec![Rational::one(); dim] }
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Longest side length.
    pub fn max_side(&self) -> Rational {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).max().unwrap_or_else(Rational::zero)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|j| self.lo[j] <= other.lo[j] && other.hi[j] <= self.hi[j])
    }

    /// Closed-box intersection test: touching boxes intersect.
    pub fn intersects(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|j| self.lo[j] <= other.hi[j] && other.lo[j] <= self.hi[j])
    }
}

impl fmt::Display for AxisBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axes: Vec<String> = self.lo.iter().zip(&self.hi).map(|(l, h)| format!("[{l}, {h}]")).collect();
        write!(f, "{}", axes.join("×"))
    }
}

/// `(R x)_i = signs[i] * x[perm[i]]`, with 0-based `perm`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(dim: usize) -> Self {
        SignedPermutation { perm: (0..dim).collect(), signs: vec![1; dim] }
    }

    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if perm.len() != signs.len() {
            return Err(Error::InvalidPermutation(format!("{} axes but {} signs", perm.len(), signs.len())));
        }
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || seen[p] {
                return Err(Error::InvalidPermutation(format!("{perm:?} is not a bijection")));
            }
            seen[p] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidPermutation(format!("signs {signs:?} must be ±1")));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPermutation) -> SignedPermutation {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let signs = self.perm.iter().zip(&self.signs).map(|(&p, &s)| s * other.signs[p]).collect();
        SignedPermutation { perm, signs }
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SignedPermutation { perm, signs }
    }

    pub fn apply(&self, x: &[Rational]) -> Point {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| if s < 0 { -x[p].clone() } else { x[p].clone() }).collect()
    }
}

/// `x ↦ ratio · orth(x) + trans` with exact rational data.
///
/// Ratios are only required to be positive: relative maps `g⁻¹∘h` and the
/// identity of the empty word are similitudes too. Contractivity is enforced
/// by [`Ifs::new`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Similitude {
    ratio: Rational,
    orth: SignedPermutation,
    trans: Point,
}

impl Similitude {
    pub fn new(ratio: Rational, orth: SignedPermutation, trans: Point) -> Result<Self> {
        if orth.dim() != trans.len() {
            return Err(Error::DimensionMismatch { expected: orth.dim(), found: trans.len() });
        }
        if !ratio.is_positive() {
            return Err(Error::RatioOutOfRange(ratio.to_string()));
        }
        Ok(Similitude { ratio, orth, trans })
    }

    /// Scaling map with identity orthogonal part.
    pub fn scaled(ratio: Rational, trans: Point) -> Result<Self> {
        let d = trans.len();
        Self::new(ratio, SignedPermutation::identity(d), trans)
    }

    pub fn identity(dim: usize) -> Self {
        Similitude {
            ratio: Rational::one(),
            orth: SignedPermutation::identity(dim),
            trans: vec![Rational::zero(); dim],
        }
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn orth(&self) -> &SignedPermutation {
        &self.orth
    }

    pub fn trans(&self) -> &[Rational] {
        &self.trans
    }

    pub fn dim(&self) -> usize {
        self.trans.len()
    }

    pub fn is_contractive(&self) -> bool {
        self.ratio < Rational::one()
    }

    pub fn apply(&self, x: &[Rational]) -> Point {
        self.orth.apply(x).into_iter().zip(&self.trans).map(|(y, b)| &self.ratio * y + b).collect()
    }

    /// `self ∘ other` without a dimension check.
    fn compose_unchecked(&self, other: &Similitude) -> Similitude {
        let rotated = self.orth.apply(&other.trans);
        let trans = rotated.into_iter().zip(&self.trans).map(|(y, b)| &self.ratio * y + b).collect();
        Similitude { ratio: &self.ratio * &other.ratio, orth: self.orth.compose(&other.orth), trans }
    }

    pub fn inverse(&self) -> Similitude {
        let inv_ratio = self.ratio.recip();
        let orth = self.orth.inverse();
        let neg: Point = self.trans.iter().map(|b| -b.clone()).collect();
        let trans = orth.apply(&neg).into_iter().map(|y| &inv_ratio * y).collect();
        Similitude { ratio: inv_ratio, orth, trans }
    }

    /// `self⁻¹ ∘ other`: the position of `other` seen from `self`'s frame.
    pub fn relative(&self, other: &Similitude) -> Similitude {
        self.inverse().compose_unchecked(other)
    }
}

impl fmt::Display for Similitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.trans.iter().map(|x| x.to_string()).collect();
        if self.orth.is_identity() {
            write!(f, "x ↦ {}·x + ({})", self.ratio, t.join(", "))
        } else {
            write!(f, "x ↦ {}·R{:?}{:?}x + ({})", self.ratio, self.orth.perm, self.orth.signs, t.join(", "))
        }
    }
}

/// `f ∘ g`.
pub fn compose(f: &Similitude, g: &Similitude) -> Result<Similitude> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    Ok(f.compose_unchecked(g))
}

pub fn image_box(f: &Similitude, b: &AxisBox) -> Result<AxisBox> {
    if f.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: b.dim() });
    }
    Ok(image_box_unchecked(f, b))
}

pub(crate) fn image_box_unchecked(f: &Similitude, b: &AxisBox) -> AxisBox {
    let d = f.dim();
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for i in 0..d {
        let p = f.orth.perm[i];
        let (a, c) = if f.orth.signs[i] > 0 {
            (&b.lo[p] * &f.ratio, &b.hi[p] * &f.ratio)
        } else {
            (-(&b.hi[p] * &f.ratio), -(&b.lo[p] * &f.ratio))
        };
        lo.push(a + &f.trans[i]);
        hi.push(c + &f.trans[i]);
    }
    AxisBox { lo, hi }
}

pub fn boxes_disjoint(a: &AxisBox, b: &AxisBox) -> bool {
    !a.intersects(b)
}

pub fn map_equal(f: &Similitude, g: &Similitude) -> bool {
    f == g
}

/// A finite word over the alphabet `{1, …, m}`; symbols are stored 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(symbols: Vec<u32>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, symbol: u32) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(symbol);
        Word(v)
    }

    pub fn parent(&self) -> Word {
        Word(self.0[..self.0.len().saturating_sub(1)].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Shortlex comparison: shorter words first, then lexicographic.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    /// Single-digit alphabets concatenate (`232`); larger ones use dots (`12.3`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational(format!("bad word {s:?}"));
        if s.contains('.') {
            s.split('.').map(|p| p.parse::<u32>().map_err(|_| bad())).collect::<Result<_>>().map(Word)
        } else {
            s.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>().map(Word)
        }
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An iterated function system of contractive similitudes sharing one dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ifs {
    dim: usize,
    maps: Vec<Similitude>,
}

impl Ifs {
    pub fn new(maps: Vec<Similitude>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::TooFewMaps(maps.len()));
        }
        let dim = maps[0].dim();
        for f in &maps {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
            }
            if !f.is_contractive() {
                return Err(Error::RatioOutOfRange(f.ratio.to_string()));
            }
        }
        Ok(Ifs { dim, maps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn map(&self, symbol: u32) -> Result<&Similitude> {
        if symbol == 0 || symbol as usize > self.maps.len() {
            return Err(Error::SymbolOutOfRange { symbol, alphabet: self.maps.len() });
        }
        Ok(&self.maps[symbol as usize - 1])
    }

    /// Common ratio if all maps share one.
    pub fn common_ratio(&self) -> Option<&Rational> {
        let r = &self.maps[0].ratio;
        self.maps.iter().all(|f| &f.ratio == r).then_some(r)
    }

    pub fn max_ratio(&self) -> &Rational {
        self.maps.iter().map(|f| &f.ratio).max().expect("nonempty IFS")
    }

    /// `f_{w1} ∘ … ∘ f_{wk}`; the empty word gives the identity.
    pub fn word_map(&self, w: &Word) -> Result<Similitude> {
        let mut acc = Similitude::identity(self.dim);
        for &s in w.symbols() {
            acc = acc.compose_unchecked(self.map(s)?);
        }
        Ok(acc)
    }

    /// Child map `g ∘ f_symbol` for an already composed `g`.
    pub(crate) fn extend(&self, g: &Similitude, symbol: u32) -> Similitude {
        g.compose_unchecked(&self.maps[symbol as usize - 1])
    }

    pub fn validate_invariant_box(&self, m: &AxisBox) -> Result<bool> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.dim() });
        }
        Ok(self.maps.iter().all(|f| m.contains_box(&image_box_unchecked(f, m))))
    }

    /// Smallest invariant box, available when every orthogonal part is the identity.
    pub fn suggest_invariant_box(&self) -> Result<AxisBox> {
        suggest_invariant_box(&self.maps)
    }
}

/// Per-axis hull of the fixed points `b_i / (1 − r_i)` of identity-orthogonal maps.
pub fn suggest_invariant_box(maps: &[Similitude]) -> Result<AxisBox> {
    let first = maps.first().ok_or(Error::TooFewMaps(0))?;
    let d = first.dim();
    let mut lo: Option<Point> = None;
    let mut hi: Option<Point> = None;
    for (i, f) in maps.iter().enumerate() {
        if f.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
        }
        if !f.orth.is_identity() {
            return Err(Error::NonIdentityOrthogonal(i + 1));
        }
        if !f.is_contractive() {
            return Err(Error::RatioOutOfRange(f.ratio.to_string()));
        }
        let denom = Rational::one() - &f.ratio;
        let fixed: Point = f.trans.iter().map(|b| b / &denom).collect();
        lo = Some(match lo {
            None => fixed.clone(),
            Some(l) => l.into_iter().zip(&fixed).map(|(a, b)| a.min(b.clone())).collect(),
        });
        hi = Some(match hi {
            None => fixed,
            Some(h) => h.into_iter().zip(fixed).map(|(a, b)| a.max(b)).collect(),
        });
    }
    AxisBox::new(lo.expect("nonempty"), hi.expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn line(r: Rational, ts: &[Rational]) -> Ifs {
        Ifs::new(ts.iter().map(|t| Similitude::scaled(r.clone(), vec![t.clone()]).unwrap()).collect()).unwrap()
    }

    fn ex1() -> Ifs {
        line(rat(1, 3), &[rat(0, 1), rat(1, 3), rat(1, 1)])
    }

    fn ex4() -> Ifs {
        line(rat(1, 4), &[rat(0, 1), rat(9, 17), rat(3, 4)])
    }

    fn ex2() -> Ifs {
        let l = rat(1, 3);
        let one = Rational::one();
        let a = [
            (rat(0, 1), rat(0, 1)),
            (&one - &l, rat(0, 1)),
            (&one - &l, &one - &l),
            (rat(0, 1), &one - &l),
            (&l * (&one - &l), (&one - &l) * (&one - &l)),
        ];
        Ifs::new(a.iter().map(|(x, y)| Similitude::scaled(l.clone(), vec![x.clone(), y.clone()]).unwrap()).collect())
            .unwrap()
    }

    fn interval(a: Rational, b: Rational) -> AxisBox {
        AxisBox::new(vec![a], vec![b]).unwrap()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), rat(-3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&rat(6, 3)), "2");
        assert_eq!(format_rational(&rat(9, 17)), "9/17");
    }

    #[test]
    fn compose_matches_known_identities() {
        let ifs = ex1();
        let f13 = compose(ifs.map(1).unwrap(), ifs.map(3).unwrap()).unwrap();
        assert_eq!(f13.ratio(), &rat(1, 9));
        assert_eq!(f13.trans(), &[rat(1, 3)]);
        let f21 = compose(ifs.map(2).unwrap(), ifs.map(1).unwrap()).unwrap();
        assert!(map_equal(&f13, &f21));

        let ifs = ex4();
        let f23 = compose(ifs.map(2).unwrap(), ifs.map(3).unwrap()).unwrap();
        assert_eq!(f23.ratio(), &rat(1, 16));
        assert_eq!(f23.trans(), &[rat(9, 17) + rat(3, 16)]);
    }

    #[test]
    fn compose_rejects_dimension_mismatch() {
        let a = Similitude::scaled(rat(1, 2), vec![rat(0, 1)]).unwrap();
        let b = Similitude::scaled(rat(1, 2), vec![rat(0, 1), rat(0, 1)]).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn word_maps() {
        let ifs = ex4();
        let f21 = ifs.word_map(&w("21")).unwrap();
        assert_eq!(f21.ratio(), &rat(1, 16));
        assert_eq!(f21.trans(), &[rat(9, 17)]);
        assert_eq!(ifs.word_map(&Word::empty()).unwrap(), Similitude::identity(1));
        assert!(!Similitude::identity(1).is_contractive());
        assert!(matches!(ifs.word_map(&w("14")), Err(Error::SymbolOutOfRange { symbol: 4, .. })));

        let ifs = ex2();
        assert!(map_equal(&ifs.word_map(&w("42")).unwrap(), &ifs.word_map(&w("54")).unwrap()));
    }

    #[test]
    fn image_boxes() {
        let ifs = ex4();
        let m = AxisBox::unit(1);
        assert_eq!(image_box(ifs.map(2).unwrap(), &m).unwrap(), interval(rat(9, 17), rat(53, 68)));
        let f22 = ifs.word_map(&w("22")).unwrap();
        assert_eq!(image_box(&f22, &m).unwrap(), interval(rat(45, 68), rat(45, 68) + rat(1, 16)));

        let half = Similitude::scaled(rat(1, 2), vec![rat(0, 1), rat(0, 1)]).unwrap();
        let sq = AxisBox::unit(2);
        let img = image_box(&half, &sq).unwrap();
        assert_eq!(img, AxisBox::new(vec![rat(0, 1); 2], vec![rat(1, 2); 2]).unwrap());
    }

    #[test]
    fn image_box_with_reflection_and_swap() {
        let orth = SignedPermutation::new(vec![1, 0], vec![-1, 1]).unwrap();
        let f = Similitude::new(rat(1, 2), orth, vec![rat(1, 1), rat(0, 1)]).unwrap();
        let b = AxisBox::new(vec![rat(0, 1), rat(0, 1)], vec![rat(1, 1), rat(2, 1)]).unwrap();
        // y0 = 1 - x1/2 over x1∈[0,2], y1 = x0/2 over x0∈[0,1]
        let img = image_box(&f, &b).unwrap();
        assert_eq!(img, AxisBox::new(vec![rat(0, 1), rat(0, 1)], vec![rat(1, 1), rat(1, 2)]).unwrap());
    }

    #[test]
    fn disjointness() {
        let ifs = ex4();
        let m = AxisBox::unit(1);
        let i1 = image_box(ifs.map(1).unwrap(), &m).unwrap();
        let i2 = image_box(ifs.map(2).unwrap(), &m).unwrap();
        let i3 = image_box(ifs.map(3).unwrap(), &m).unwrap();
        assert!(boxes_disjoint(&i1, &i2));
        assert!(!boxes_disjoint(&i2, &i3));
        assert!(!boxes_disjoint(&i2, &i2));
        // touching closed boxes intersect
        assert!(!boxes_disjoint(&interval(rat(0, 1), rat(1, 2)), &interval(rat(1, 2), rat(1, 1))));
    }

    #[test]
    fn map_equality() {
        let ifs = ex4();
        assert!(map_equal(&ifs.word_map(&w("232")).unwrap(), &ifs.word_map(&w("311")).unwrap()));
        let ifs = ex1();
        let f13 = ifs.word_map(&w("13")).unwrap();
        let f23 = ifs.word_map(&w("23")).unwrap();
        assert!(map_equal(&f13, &f13));
        assert!(!map_equal(&f13, &f23));
        assert_eq!(f13.trans(), &[rat(1, 3)]);
        assert_eq!(f23.trans(), &[rat(2, 3)]);
    }

    #[test]
    fn invariant_boxes() {
        assert!(ex4().validate_invariant_box(&AxisBox::unit(1)).unwrap());
        assert!(ex1().validate_invariant_box(&interval(rat(0, 1), rat(3, 2))).unwrap());
        assert!(!ex1().validate_invariant_box(&AxisBox::unit(1)).unwrap());
        assert!(ex1().validate_invariant_box(&AxisBox::unit(2)).is_err());
    }

    #[test]
    fn suggested_boxes() {
        assert_eq!(ex1().suggest_invariant_box().unwrap(), interval(rat(0, 1), rat(3, 2)));
        assert_eq!(ex2().suggest_invariant_box().unwrap(), AxisBox::unit(2));
        let single = [Similitude::scaled(rat(1, 2), vec![rat(0, 1)]).unwrap()];
        assert_eq!(suggest_invariant_box(&single).unwrap(), interval(rat(0, 1), rat(0, 1)));

        let flip = SignedPermutation::new(vec![0], vec![-1]).unwrap();
        let maps = vec![
            Similitude::new(rat(1, 2), flip, vec![rat(1, 1)]).unwrap(),
            Similitude::scaled(rat(1, 2), vec![rat(0, 1)]).unwrap(),
        ];
        let ifs = Ifs::new(maps).unwrap();
        assert_eq!(ifs.suggest_invariant_box(), Err(Error::NonIdentityOrthogonal(1)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SignedPermutation::new(vec![0, 0], vec![1, 1]).is_err());
        assert!(SignedPermutation::new(vec![1, 0], vec![1, 2]).is_err());
        assert!(AxisBox::new(vec![rat(1, 1)], vec![rat(0, 1)]).is_err());
        let big = Similitude::scaled(rat(5, 4), vec![rat(0, 1)]).unwrap();
        let ok = Similitude::scaled(rat(1, 4), vec![rat(0, 1)]).unwrap();
        assert!(matches!(Ifs::new(vec![ok.clone(), big]), Err(Error::RatioOutOfRange(_))));
        assert!(matches!(Ifs::new(vec![ok]), Err(Error::TooFewMaps(1))));
    }

    #[test]
    fn word_display_roundtrip() {
        assert_eq!(w("232").to_string(), "232");
        let long = Word::new(vec![12, 3]);
        assert_eq!(long.to_string(), "12.3");
        assert_eq!("12.3".parse::<Word>().unwrap(), long);
    }

    fn arb_orth(d: usize) -> impl Strategy<Value = SignedPermutation> {
        (
            Just((0..d).collect::<Vec<_>>()).prop_shuffle(),
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], d),
        )
            .prop_map(|(p, s)| SignedPermutation::new(p, s).unwrap())
    }

    fn arb_map(d: usize) -> impl Strategy<Value = Similitude> {
        (1i64..8, 2i64..9, arb_orth(d), proptest::collection::vec((-6i64..7, 1i64..7), d)).prop_map(
            |(p, q, orth, t)| {
                let r = rat(p.min(q - 1).max(1), q);
                Similitude::new(r, orth, t.into_iter().map(|(a, b)| rat(a, b)).collect()).unwrap()
            },
        )
    }

    fn arb_ifs() -> impl Strategy<Value = Ifs> {
        (1usize..3).prop_flat_map(|d| proptest::collection::vec(arb_map(d), 2..4).prop_map(|m| Ifs::new(m).unwrap()))
    }

    fn arb_word(m: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(1..=m as u32, 0..5).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn composition_is_associative((ifs, u, v) in arb_ifs().prop_flat_map(|ifs| {
            let m = ifs.len();
            (Just(ifs), arb_word(m), arb_word(m))
        })) {
            let mut uv = u.symbols().to_vec();
            uv.extend_from_slice(v.symbols());
            let whole = ifs.word_map(&Word::new(uv.clone())).unwrap();
            let split = compose(&ifs.word_map(&u).unwrap(), &ifs.word_map(&v).unwrap()).unwrap();
            prop_assert_eq!(&whole, &split);
            let product = uv.iter().fold(Rational::one(), |acc, &s| acc * ifs.map(s).unwrap().ratio());
            prop_assert_eq!(whole.ratio(), &product);
        }

        #[test]
        fn image_box_commutes_with_compose(f in arb_map(2), g in arb_map(2)) {
            let b = AxisBox::new(vec![rat(-1, 2), rat(0, 1)], vec![rat(1, 1), rat(3, 2)]).unwrap();
            let fg = compose(&f, &g).unwrap();
            prop_assert_eq!(
                image_box(&fg, &b).unwrap(),
                image_box(&f, &image_box(&g, &b).unwrap()).unwrap()
            );
            let rel = f.relative(&g);
            prop_assert_eq!(compose(&f, &rel).unwrap(), g);
        }

        #[test]
        fn disjointness_is_symmetric(a in arb_map(2), b in arb_map(2)) {
            let m = AxisBox::unit(2);
            let ia = image_box(&a, &m).unwrap();
            let ib = image_box(&b, &m).unwrap();
            prop_assert_eq!(boxes_disjoint(&ia, &ib), boxes_disjoint(&ib, &ia));
            prop_assert!(!boxes_disjoint(&ia, &ia));
        }

        #[test]
        fn conjugation_preserves_disjointness(
            h in arb_map(1), a in arb_map(1), b in arb_map(1)
        ) {
            let m = AxisBox::unit(1);
            let hinv = h.inverse();
            let conj = |f: &Similitude| compose(&compose(&h, f).unwrap(), &hinv).unwrap();
            let hm = image_box(&h, &m).unwrap();
            let before = boxes_disjoint(&image_box(&a, &m).unwrap(), &image_box(&b, &m).unwrap());
            let after = boxes_disjoint(&image_box(&conj(&a), &hm).unwrap(), &image_box(&conj(&b), &hm).unwrap());
            prop_assert_eq!(before, after);
        }

        #[test]
        fn equal_maps_have_equal_images((ifs, u, v) in arb_ifs().prop_flat_map(|ifs| {
            let m = ifs.len();
            (Just(ifs), arb_word(m), arb_word(m))
        })) {
            let fu = ifs.word_map(&u).unwrap();
            let fv = ifs.word_map(&v).unwrap();
            if map_equal(&fu, &fv) {
                let b = AxisBox::unit(ifs.dim());
                prop_assert_eq!(image_box(&fu, &b).unwrap(), image_box(&fv, &b).unwrap());
            }
        }
    }
}
