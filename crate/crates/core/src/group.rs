//! Finite subsets of `Z^d` with the ℓ1 word metric.
//!
//! Subsets are either explicit element sets or symbolic ℓ1 balls. Balls stay
//! symbolic through products and powers (`ball(a) * ball(b) = ball(a + b)`), so
//! the large scales produced by the reduction pipeline never get enumerated.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{PrimInt, Signed};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer coordinate type for lattice points.
pub trait Coord:
    PrimInt + Signed + std::hash::Hash + fmt::Debug + fmt::Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
}

impl Coord for i32 {}
impl Coord for i64 {}
impl Coord for i128 {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("power exponent must be at least 1 (use the identity subset explicitly)")]
    ZeroPower,
    #[error("diameter of the empty subset is undefined")]
    Empty,
    #[error("subset too large to enumerate ({0} elements)")]
    TooLarge(u128),
    #[error("coordinate overflow")]
    Overflow,
}

/// An element of `Z^d`, written additively.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent, bound = "")]
pub struct GroupElement<T: Coord> {
    coords: Vec<T>,
}

impl<T: Coord> GroupElement<T> {
    pub fn new(coords: Vec<T>) -> Result<Self, GroupError> {
        if coords.is_empty() {
            return Err(GroupError::ZeroDimension);
        }
        Ok(Self { coords })
    }

    pub fn identity(dim: usize) -> Self {
        Self { coords: vec![T::zero(); dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn inverse(&self) -> Self {
        Self { coords: self.coords.iter().map(|&c| -c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.inverse())
    }

    /// ℓ1 norm, i.e. word length for the standard generators.
    pub fn norm(&self) -> T {
        self.coords.iter().fold(T::zero(), |acc, c| acc + c.abs())
    }

    pub fn distance(&self, other: &Self) -> T {
        self.sub(other).norm()
    }
}

impl<T: Coord> fmt::Debug for GroupElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

impl<T: Coord> fmt::Display for GroupElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
enum Repr<T: Coord> {
    /// All points of ℓ1 norm at most the radius.
    Ball(u64),
    Explicit(BTreeSet<GroupElement<T>>),
}

/// A finite subset of `Z^d`.
#[derive(Clone, Debug)]
pub struct FiniteSubset<T: Coord> {
    dim: usize,
    repr: Repr<T>,
}

/// Explicit subsets are enumerated only below this size.
pub const MAX_ENUMERATION: u128 = 50_000_000;

/// Number of lattice points of ℓ1 norm at most `radius` in dimension `dim`.
pub fn ball_size(dim: usize, radius: u64) -> u128 {
    // |B_d(R)| = sum_k 2^k C(d,k) C(R,k)
    let r = radius as u128;
    let mut total: u128 = 0;
    let mut binom_d: u128 = 1;
    let mut binom_r: u128 = 1;
    for k in 0..=dim as u128 {
        if k > 0 {
            binom_d = binom_d * (dim as u128 + 1 - k) / k;
            if k > r {
                break;
            }
            binom_r = binom_r * (r + 1 - k) / k;
        }
        total = total.saturating_add((1u128 << k).saturating_mul(binom_d).saturating_mul(binom_r));
    }
    total
}

impl<T: Coord> FiniteSubset<T> {
    pub fn empty(dim: usize) -> Self {
        Self { dim, repr: Repr::Explicit(BTreeSet::new()) }
    }

    pub fn identity(dim: usize) -> Self {
        Self::ball(dim, 0)
    }

    /// The closed ℓ1 ball of the given radius about the identity.
    pub fn ball(dim: usize, radius: u64) -> Self {
        Self { dim, repr: Repr::Ball(radius) }
    }

    pub fn from_elements<I>(dim: usize, elems: I) -> Result<Self, GroupError>
    where
        I: IntoIterator<Item = GroupElement<T>>,
    {
        if dim == 0 {
            return Err(GroupError::ZeroDimension);
        }
        let mut set = BTreeSet::new();
        for e in elems {
            if e.dim() != dim {
                return Err(GroupError::DimensionMismatch(dim, e.dim()));
            }
            set.insert(e);
        }
        Ok(Self { dim, repr: Repr::Explicit(set) })
    }

    /// Convenience constructor from raw coordinate vectors.
    pub fn from_coords(dim: usize, elems: &[Vec<T>]) -> Result<Self, GroupError> {
        let elems = elems.iter().map(|c| GroupElement::new(c.clone())).collect::<Result<Vec<_>, _>>()?;
        Self::from_elements(dim, elems)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Some(r)` when this subset is represented as the ball of radius `r`.
    pub fn as_ball(&self) -> Option<u64> {
        match self.repr {
            Repr::Ball(r) => Some(r),
            Repr::Explicit(_) => None,
        }
    }

    pub fn len(&self) -> u128 {
        match &self.repr {
            Repr::Ball(r) => ball_size(self.dim, *r),
            Repr::Explicit(s) => s.len() as u128,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, g: &GroupElement<T>) -> bool {
        if g.dim() != self.dim {
            return false;
        }
        match &self.repr {
            Repr::Ball(r) => g.norm().to_u64().is_some_and(|n| n <= *r),
            Repr::Explicit(s) => s.contains(g),
        }
    }

    pub fn contains_coords(&self, coords: &[T]) -> bool {
        if coords.len() != self.dim {
            return false;
        }
        match &self.repr {
            Repr::Ball(r) => {
                let n = coords.iter().fold(T::zero(), |a, c| a + c.abs());
                n.to_u64().is_some_and(|n| n <= *r)
            }
            Repr::Explicit(s) => s.contains(&GroupElement { coords: coords.to_vec() }),
        }
    }

    /// Largest ℓ1 norm of an element, `None` when empty.
    pub fn radius(&self) -> Option<u64> {
        match &self.repr {
            Repr::Ball(r) => Some(*r),
            Repr::Explicit(s) => s.iter().map(|g| g.norm().to_u64().unwrap_or(u64::MAX)).max(),
        }
    }

    /// Enumerates the elements in sorted order. Fails for balls above
    /// [`MAX_ENUMERATION`] points.
    pub fn elements(&self) -> Result<Vec<GroupElement<T>>, GroupError> {
        match &self.repr {
            Repr::Explicit(s) => Ok(s.iter().cloned().collect()),
            Repr::Ball(r) => {
                let n = self.len();
                if n > MAX_ENUMERATION {
                    return Err(GroupError::TooLarge(n));
                }
                let mut out = Vec::with_capacity(n as usize);
                let mut cur = vec![T::zero(); self.dim];
                enumerate_ball(self.dim, 0, *r as i128, &mut cur, &mut out);
                out.sort();
                Ok(out)
            }
        }
    }

    fn explicit_set(&self) -> Result<BTreeSet<GroupElement<T>>, GroupError> {
        match &self.repr {
            Repr::Explicit(s) => Ok(s.clone()),
            Repr::Ball(_) => Ok(self.elements()?.into_iter().collect()),
        }
    }

    /// `F ∪ F^{-1} ∪ {e}`.
    pub fn symmetrize(&self) -> Self {
        match &self.repr {
            Repr::Ball(_) => self.clone(),
            Repr::Explicit(s) => {
                let mut out: BTreeSet<_> = s.iter().cloned().collect();
                out.extend(s.iter().map(|g| g.inverse()));
                out.insert(GroupElement::identity(self.dim));
                Self { dim: self.dim, repr: Repr::Explicit(out) }
            }
        }
    }

    /// Membership in the finite symmetric subsets containing the identity.
    pub fn is_fs(&self) -> bool {
        match &self.repr {
            Repr::Ball(_) => true,
            Repr::Explicit(s) => {
                s.contains(&GroupElement::identity(self.dim)) && s.iter().all(|g| s.contains(&g.inverse()))
            }
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_dim(other)?;
        if let (Repr::Ball(a), Repr::Ball(b)) = (&self.repr, &other.repr) {
            return Ok(Self::ball(self.dim, (*a).max(*b)));
        }
        let mut s = self.explicit_set()?;
        s.extend(other.explicit_set()?);
        Ok(Self { dim: self.dim, repr: Repr::Explicit(s) })
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool, GroupError> {
        self.check_dim(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Ball(a), Repr::Ball(b)) => Ok(a <= b),
            (_, _) if self.is_empty() => Ok(true),
            (Repr::Explicit(s), _) => Ok(s.iter().all(|g| other.contains(g))),
            (Repr::Ball(_), Repr::Explicit(_)) => Ok(self.elements()?.iter().all(|g| other.contains(g))),
        }
    }

    /// Sumset `{f + g}`.
    pub fn product(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_dim(other)?;
        if let (Repr::Ball(a), Repr::Ball(b)) = (&self.repr, &other.repr) {
            return Ok(Self::ball(self.dim, a + b));
        }
        let a = self.elements()?;
        let b = other.elements()?;
        if (a.len() as u128) * (b.len() as u128) > MAX_ENUMERATION * 4 {
            return Err(GroupError::TooLarge(a.len() as u128 * b.len() as u128));
        }
        let mut out = BTreeSet::new();
        for f in &a {
            for g in &b {
                out.insert(f.add(g));
            }
        }
        Ok(Self { dim: self.dim, repr: Repr::Explicit(out) })
    }

    /// r-fold product; `power(F, 1) = F`.
    pub fn power(&self, r: u64) -> Result<Self, GroupError> {
        if r == 0 {
            return Err(GroupError::ZeroPower);
        }
        if let Repr::Ball(rad) = self.repr {
            return Ok(Self::ball(self.dim, rad * r));
        }
        // square-and-multiply on sumsets
        let mut result: Option<Self> = None;
        let mut base = self.clone();
        let mut e = r;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => acc.product(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.product(&base)?;
        }
        Ok(result.expect("r >= 1"))
    }

    /// ℓ1 diameter. Uses `max_σ (max σ·x - min σ·x)` over sign vectors.
    pub fn diam(&self) -> Result<u64, GroupError> {
        match &self.repr {
            Repr::Ball(r) => Ok(2 * r),
            Repr::Explicit(s) => {
                if s.is_empty() {
                    return Err(GroupError::Empty);
                }
                let pts: Vec<Vec<i128>> = s
                    .iter()
                    .map(|g| g.coords().iter().map(|c| c.to_i128().unwrap_or(0)).collect())
                    .collect();
                Ok(l1_diameter(&pts) as u64)
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), GroupError> {
        if self.dim != other.dim {
            return Err(GroupError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// Decomposes the subset into segments along the first axis: each entry
    /// `(rest, lo, hi)` stands for the elements `(x, rest...)` with `lo <= x <= hi`.
    pub fn axis_segments(&self) -> Result<Vec<(Vec<i64>, i64, i64)>, GroupError> {
        match &self.repr {
            Repr::Ball(r) => {
                let r = *r as i64;
                let mut out = Vec::new();
                let mut rest = vec![0i64; self.dim - 1];
                ball_rest(self.dim - 1, 0, r, &mut rest, &mut out);
                Ok(out)
            }
            Repr::Explicit(s) => {
                let mut out: Vec<(Vec<i64>, i64, i64)> = Vec::new();
                let mut pts: Vec<(Vec<i64>, i64)> = Vec::with_capacity(s.len());
                for g in s {
                    let c: Vec<i64> =
                        g.coords().iter().map(|c| c.to_i64().ok_or(GroupError::Overflow)).collect::<Result<_, _>>()?;
                    pts.push((c[1..].to_vec(), c[0]));
                }
                pts.sort();
                for (rest, x) in pts {
                    match out.last_mut() {
                        Some((r, _, hi)) if *r == rest && *hi + 1 == x => *hi = x,
                        _ => out.push((rest, x, x)),
                    }
                }
                Ok(out)
            }
        }
    }
}

fn ball_rest(remaining: usize, used: i64, r: i64, cur: &mut Vec<i64>, out: &mut Vec<(Vec<i64>, i64, i64)>) {
    let idx = cur.len() - remaining;
    if remaining == 0 {
        let w = r - used;
        out.push((cur.clone(), -w, w));
        return;
    }
    let left = r - used;
    for v in -left..=left {
        cur[idx] = v;
        ball_rest(remaining - 1, used + v.abs(), r, cur, out);
    }
    cur[idx] = 0;
}

fn enumerate_ball<T: Coord>(dim: usize, idx: usize, left: i128, cur: &mut Vec<T>, out: &mut Vec<GroupElement<T>>) {
    if idx == dim {
        out.push(GroupElement { coords: cur.clone() });
        return;
    }
    for v in -left..=left {
        cur[idx] = T::from(v).expect("ball coordinate fits");
        enumerate_ball(dim, idx + 1, left - v.abs(), cur, out);
    }
    cur[idx] = T::zero();
}

/// ℓ1 diameter of a point cloud.
pub fn l1_diameter(pts: &[Vec<i128>]) -> i128 {
    let Some(first) = pts.first() else { return 0 };
    let d = first.len();
    let mut best = 0;
    // σ and -σ give the same spread, so fix the first sign.
    for mask in 0..(1u64 << d.saturating_sub(1)) {
        let dot = |p: &Vec<i128>| -> i128 {
            p.iter().enumerate().map(|(i, &c)| if i > 0 && (mask >> (i - 1)) & 1 == 1 { -c } else { c }).sum()
        };
        let (mut lo, mut hi) = (i128::MAX, i128::MIN);
        for p in pts {
            let v = dot(p);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        best = best.max(hi - lo);
    }
    best
}

impl<T: Coord> PartialEq for FiniteSubset<T> {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Ball(a), Repr::Ball(b)) => a == b,
            _ => self.len() == other.len() && self.is_subset(other).unwrap_or(false),
        }
    }
}

impl<T: Coord> Eq for FiniteSubset<T> {}

impl<T: Coord> fmt::Display for FiniteSubset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Ball(r) => write!(f, "ball:{r}"),
            Repr::Explicit(s) => {
                write!(f, "{{")?;
                for (i, g) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Wire form: `{"dim":1,"ball":3}` or `{"dim":2,"elements":[[0,0],[1,0],...]}`
/// with elements sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetJson {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ball: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elements: Option<Vec<Vec<i64>>>,
}

impl<T: Coord> From<&FiniteSubset<T>> for SubsetJson {
    fn from(s: &FiniteSubset<T>) -> Self {
        match &s.repr {
            Repr::Ball(r) => SubsetJson { dim: s.dim, ball: Some(*r), elements: None },
            Repr::Explicit(set) => SubsetJson {
                dim: s.dim,
                ball: None,
                elements: Some(
                    set.iter().map(|g| g.coords().iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect()).collect(),
                ),
            },
        }
    }
}

impl<T: Coord> TryFrom<&SubsetJson> for FiniteSubset<T> {
    type Error = GroupError;
    fn try_from(j: &SubsetJson) -> Result<Self, GroupError> {
        match (&j.ball, &j.elements) {
            (Some(r), None) => Ok(FiniteSubset::ball(j.dim, *r)),
            (None, Some(es)) => {
                let conv = es
                    .iter()
                    .map(|c| c.iter().map(|&v| T::from(v).ok_or(GroupError::Overflow)).collect::<Result<Vec<T>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                FiniteSubset::from_coords(j.dim, &conv)
            }
            _ => Err(GroupError::Empty),
        }
    }
}

impl<T: Coord> Serialize for FiniteSubset<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SubsetJson::from(self).serialize(s)
    }
}

impl<'de, T: Coord> Deserialize<'de> for FiniteSubset<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SubsetJson::deserialize(d)?;
        FiniteSubset::try_from(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = FiniteSubset<i64>;

    fn set1(xs: &[i64]) -> S {
        S::from_coords(1, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    fn set2(xs: &[(i64, i64)]) -> S {
        S::from_coords(2, &xs.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn product_examples() {
        let f = set1(&[-2, 5, 7]);
        assert_eq!(S::identity(1).product(&f).unwrap(), f);
        assert_eq!(set1(&[-1, 0, 1]).product(&set1(&[-1, 0, 1])).unwrap(), set1(&[-2, -1, 0, 1, 2]));
        // ball(2,1) + ball(2,2) enumerated explicitly
        let a = S::from_elements(2, S::ball(2, 1).elements().unwrap()).unwrap();
        let b = S::from_elements(2, S::ball(2, 2).elements().unwrap()).unwrap();
        let sum = a.product(&b).unwrap();
        assert!(sum.as_ball().is_none());
        assert_eq!(sum, S::ball(2, 3));
        assert_eq!(sum.len(), 25);
        assert!(matches!(set1(&[0]).product(&S::ball(2, 1)), Err(GroupError::DimensionMismatch(1, 2))));
    }

    #[test]
    fn power_examples() {
        assert_eq!(set1(&[-1, 0, 1]).power(3).unwrap(), set1(&[-3, -2, -1, 0, 1, 2, 3]));
        assert_eq!(set1(&[0]).power(5).unwrap(), set1(&[0]));
        let cross = set2(&[(1, 0), (-1, 0), (0, 1), (0, -1), (0, 0)]);
        let sq = cross.power(2).unwrap();
        assert_eq!(sq.len(), 13);
        assert_eq!(sq, S::ball(2, 2));
        assert_eq!(cross.power(0), Err(GroupError::ZeroPower));
    }

    #[test]
    fn ball_examples() {
        assert_eq!(S::ball(1, 2), set1(&[-2, -1, 0, 1, 2]));
        assert_eq!(S::ball(2, 1).len(), 5);
        let mut count = 0;
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                for z in -2i64..=2 {
                    if x.abs() + y.abs() + z.abs() <= 2 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(S::ball(3, 2).len(), count);
        assert_eq!(S::ball(3, 2).elements().unwrap().len() as u128, count);
        assert!(S::ball(4, 3).is_fs());
    }

    #[test]
    fn diam_examples() {
        assert_eq!(set1(&[0]).diam().unwrap(), 0);
        assert_eq!(set1(&[-2, -1, 0, 1, 2]).diam().unwrap(), 4);
        let explicit = S::from_elements(2, S::ball(2, 3).elements().unwrap()).unwrap();
        let pts = explicit.elements().unwrap();
        let brute = pts.iter().flat_map(|a| pts.iter().map(move |b| a.distance(b))).max().unwrap();
        assert_eq!(brute, 6);
        assert_eq!(explicit.diam().unwrap(), 6);
        assert_eq!(S::ball(2, 3).diam().unwrap(), 6);
        assert_eq!(S::empty(1).diam(), Err(GroupError::Empty));
    }

    #[test]
    fn symmetrize_examples() {
        assert_eq!(set1(&[1]).symmetrize(), set1(&[-1, 0, 1]));
        assert_eq!(S::empty(1).symmetrize(), set1(&[0]));
        assert_eq!(
            set2(&[(2, 0), (0, -1)]).symmetrize(),
            set2(&[(2, 0), (-2, 0), (0, 1), (0, -1), (0, 0)])
        );
        assert!(!set1(&[1]).is_fs());
        assert!(set1(&[1]).symmetrize().is_fs());
    }

    #[test]
    fn axis_segments_cover_ball() {
        let segs = S::ball(2, 2).axis_segments().unwrap();
        let total: i64 = segs.iter().map(|(_, lo, hi)| hi - lo + 1).sum();
        assert_eq!(total, 13);
        let segs = set1(&[-3, -2, 0, 1, 2, 5]).axis_segments().unwrap();
        assert_eq!(segs, vec![(vec![], -3, -2), (vec![], 0, 2), (vec![], 5, 5)]);
    }

    #[test]
    fn json_round_trip() {
        let s = set2(&[(2, 0), (0, -1)]).symmetrize();
        let j = serde_json::to_string(&s).unwrap();
        let back: S = serde_json::from_str(&j).unwrap();
        assert_eq!(s, back);
        let b: S = serde_json::from_str(r#"{"dim":3,"ball":4}"#).unwrap();
        assert_eq!(b.as_ball(), Some(4));
    }

    #[test]
    fn generic_over_coordinate_width() {
        let f = FiniteSubset::<i32>::from_coords(1, &[vec![1]]).unwrap().symmetrize();
        assert_eq!(f.power(4).unwrap().diam().unwrap(), 8);
        let g = FiniteSubset::<i128>::ball(2, 5);
        assert_eq!(g.diam().unwrap(), 10);
    }
}
