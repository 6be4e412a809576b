//! Free symbolic systems: `Z^d` odometers, Sturmian shifts and the translation
//! action of `Z^d` on itself, with an exact calculus of clopen sets.
//!
//! Odometer clopen sets at depth `n` are sets of residues mod `p^n`, stored as
//! periodic subsets of `Z^d` with period `p^n` on every axis (the action is by
//! translation, so chain computations happen on that torus). Sturmian clopen
//! sets are unions of cylinders `{x : x[o..o+L) ∈ W}`; the shift acts by
//! `(γ·x)[i] = x[i + γ]`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cert::{Certificate, Counterexample, Verdict};
use crate::lattice::{LatticeError, TorusSet};
use crate::Subset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("dimension mismatch: system has dimension {0}, got {1}")]
    DimensionMismatch(usize, usize),
    #[error("set does not belong to this system: {0}")]
    WrongModel(String),
    #[error("word {0:?} is not admissible")]
    NotAdmissible(String),
    #[error("invalid system parameters: {0}")]
    BadSystem(String),
    #[error("cannot refine to a coarser resolution ({0} < {1})")]
    Coarser(i64, i64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Continued-fraction directive sequence `d_1, d_2, ...` given as a finite
/// prefix followed by a repeated tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    #[serde(default)]
    pub prefix: Vec<u32>,
    pub tail: Vec<u32>,
}

impl Slope {
    pub fn golden() -> Self {
        Self { prefix: vec![], tail: vec![1] }
    }

    pub fn is_rational(&self) -> bool {
        self.tail.iter().all(|&d| d == 0)
    }

    fn directive(&self, n: usize) -> u32 {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.tail[(n - self.prefix.len()) % self.tail.len()]
        }
    }

    /// A prefix of length at least `len` of the characteristic word, built from
    /// the standard words `s_{-1} = 1`, `s_0 = 0`, `s_n = s_{n-1}^{d_n} s_{n-2}`.
    /// For a rational slope the word is the periodic word `s_m^∞` of the last
    /// growing standard word.
    pub fn characteristic(&self, len: usize) -> Vec<u8> {
        let mut prev: Vec<u8> = vec![1];
        let mut cur: Vec<u8> = vec![0];
        let mut n = 0usize;
        let mut stalled = 0usize;
        let period_len = self.prefix.len() + self.tail.len();
        while cur.len() < len {
            let d = self.directive(n);
            n += 1;
            let mut next = Vec::with_capacity(cur.len() * d as usize + prev.len());
            for _ in 0..d {
                next.extend_from_slice(&cur);
            }
            next.extend_from_slice(&prev);
            if next.len() <= cur.len().max(prev.len()) {
                stalled += 1;
            } else {
                stalled = 0;
            }
            prev = std::mem::replace(&mut cur, next);
            if stalled > 2 * period_len + 2 {
                // no further growth: periodic word
                let unit = if cur.len() >= prev.len() { cur.clone() } else { prev.clone() };
                let mut out = Vec::with_capacity(len + unit.len());
                while out.len() < len {
                    out.extend_from_slice(&unit);
                }
                return out;
            }
        }
        cur
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}; ({:?})*]", self.prefix, self.tail)
    }
}

/// The factors of length `len` of the Sturmian language, sorted.
pub fn admissible_words(slope: &Slope, len: usize) -> Arc<Vec<Vec<u8>>> {
    static MEMO: OnceLock<Mutex<HashMap<(Slope, usize), Arc<Vec<Vec<u8>>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = memo.lock().expect("memo").get(&(slope.clone(), len)) {
        return v.clone();
    }
    let mut n = 4 * (len + 4);
    let words = loop {
        let w = slope.characteristic(n);
        let set: BTreeSet<Vec<u8>> = w.windows(len.max(1)).map(|s| s[..len].to_vec()).collect();
        if set.len() == len + 1 || n > (1 << 22) || (slope.is_rational() && n > 64 * (len + 4)) {
            break set.into_iter().collect::<Vec<_>>();
        }
        n *= 2;
    };
    let words = Arc::new(words);
    memo.lock().expect("memo").insert((slope.clone(), len), words.clone());
    words
}

pub fn word_string(w: &[u8]) -> String {
    w.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn parse_word(s: &str) -> Result<Vec<u8>, SystemError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(SystemError::NotAdmissible(s.to_string())),
        })
        .collect()
}

/// A union of cylinders `{x : x[offset .. offset + window) ∈ words}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CylinderSet {
    pub offset: i64,
    pub window: usize,
    /// Sorted words over `{0,1}`, written as strings.
    pub words: BTreeSet<String>,
}

impl CylinderSet {
    pub fn new(slope: &Slope, offset: i64, window: usize, words: impl IntoIterator<Item = String>) -> Result<Self, SystemError> {
        let lang: BTreeSet<String> = admissible_words(slope, window).iter().map(|w| word_string(w)).collect();
        let mut set = BTreeSet::new();
        for w in words {
            if w.len() != window || !lang.contains(&w) {
                return Err(SystemError::NotAdmissible(w));
            }
            set.insert(w);
        }
        Ok(Self { offset, window, words: set })
    }

    pub fn full(slope: &Slope, offset: i64, window: usize) -> Self {
        let words = admissible_words(slope, window).iter().map(|w| word_string(w)).collect();
        Self { offset, window, words }
    }

    pub fn empty(offset: i64, window: usize) -> Self {
        Self { offset, window, words: BTreeSet::new() }
    }

    pub fn end(&self) -> i64 {
        self.offset + self.window as i64
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Same set over the window `[lo, hi)`, which must contain the current one.
    pub fn refine_to(&self, slope: &Slope, lo: i64, hi: i64) -> Result<Self, SystemError> {
        if lo > self.offset || hi < self.end() {
            return Err(SystemError::Coarser(hi - lo, self.window as i64));
        }
        if lo == self.offset && hi == self.end() {
            return Ok(self.clone());
        }
        let len = (hi - lo) as usize;
        let start = (self.offset - lo) as usize;
        let words = admissible_words(slope, len)
            .iter()
            .filter(|w| self.words.contains(&word_string(&w[start..start + self.window])))
            .map(|w| word_string(w))
            .collect();
        Ok(Self { offset: lo, window: len, words })
    }

    /// Drops leading and trailing positions the set does not depend on.
    pub fn normalize(&self, slope: &Slope) -> Self {
        let mut cur = self.clone();
        loop {
            if cur.window == 0 {
                return cur;
            }
            let front = Self {
                offset: cur.offset + 1,
                window: cur.window - 1,
                words: cur.words.iter().map(|w| w[1..].to_string()).collect(),
            };
            if front.refine_to(slope, cur.offset, cur.end()).map(|r| r.words == cur.words).unwrap_or(false) {
                cur = front;
                continue;
            }
            let back = Self {
                offset: cur.offset,
                window: cur.window - 1,
                words: cur.words.iter().map(|w| w[..w.len() - 1].to_string()).collect(),
            };
            if back.refine_to(slope, cur.offset, cur.end()).map(|r| r.words == cur.words).unwrap_or(false) {
                cur = back;
                continue;
            }
            return cur;
        }
    }

    pub fn common(&self, other: &Self, slope: &Slope) -> Result<(Self, Self), SystemError> {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        Ok((self.refine_to(slope, lo, hi)?, other.refine_to(slope, lo, hi)?))
    }

    /// Membership of the point whose coordinate `i` is `word[origin + i]`.
    pub fn contains_point(&self, word: &[u8], origin: i64) -> Option<bool> {
        let a = origin + self.offset;
        let b = a + self.window as i64;
        if a < 0 || b > word.len() as i64 {
            return None;
        }
        Some(self.words.contains(&word_string(&word[a as usize..b as usize])))
    }
}

/// A clopen subset of one of the supported systems.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClopenSet {
    /// Periodic subset of `Z^d` (odometer residues or translation-system sets).
    Periodic(TorusSet),
    Cylinder(CylinderSet),
}

impl ClopenSet {
    pub fn as_periodic(&self) -> Option<&TorusSet> {
        match self {
            ClopenSet::Periodic(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_cylinder(&self) -> Option<&CylinderSet> {
        match self {
            ClopenSet::Cylinder(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ClopenSet::Periodic(t) => t.is_empty(),
            ClopenSet::Cylinder(c) => c.is_empty(),
        }
    }

    /// Number of cells at the set's own resolution.
    pub fn cell_count(&self) -> u128 {
        match self {
            ClopenSet::Periodic(t) => t.count(),
            ClopenSet::Cylinder(c) => c.words.len() as u128,
        }
    }
}

/// The acting system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum System {
    /// `Z^d` acting on `(Z_p)^d` by adding `γ`.
    Odometer { p: i64, dim: usize },
    /// The shift on the Sturmian subshift of the given slope.
    Sturmian { slope: Slope },
    /// `Z^d` acting on itself by translation.
    Translation { dim: usize },
}

impl System {
    pub fn odometer(p: i64, dim: usize) -> Self {
        System::Odometer { p, dim }
    }

    pub fn golden() -> Self {
        System::Sturmian { slope: Slope::golden() }
    }

    pub fn dim(&self) -> usize {
        match self {
            System::Odometer { dim, .. } | System::Translation { dim } => *dim,
            System::Sturmian { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        match self {
            System::Odometer { p, dim } if *p < 2 || *dim == 0 => {
                Err(SystemError::BadSystem(format!("odometer needs p >= 2 and d >= 1 (p={p}, d={dim})")))
            }
            System::Sturmian { slope } if slope.tail.is_empty() => {
                Err(SystemError::BadSystem("slope tail must be nonempty".into()))
            }
            System::Translation { dim } if *dim == 0 => Err(SystemError::BadSystem("dimension must be positive".into())),
            _ => Ok(()),
        }
    }

    pub fn slope(&self) -> Option<&Slope> {
        match self {
            System::Sturmian { slope } => Some(slope),
            _ => None,
        }
    }

    /// Moduli for odometer depth `n`.
    pub fn depth_moduli(&self, n: u32) -> Result<Vec<i64>, SystemError> {
        match self {
            System::Odometer { p, dim } => {
                let m = p.checked_pow(n).ok_or_else(|| SystemError::BadSystem(format!("depth {n} too large")))?;
                Ok(vec![m; *dim])
            }
            _ => Err(SystemError::WrongModel("depth applies to odometers".into())),
        }
    }

    /// Depth of an odometer set.
    pub fn depth_of(&self, t: &TorusSet) -> Option<u32> {
        let System::Odometer { p, .. } = self else { return None };
        let mut m = t.moduli()[0];
        let mut n = 0;
        while m > 1 {
            if m % p != 0 {
                return None;
            }
            m /= p;
            n += 1;
        }
        Some(n)
    }

    pub fn full(&self) -> ClopenSet {
        match self {
            System::Odometer { dim, .. } | System::Translation { dim } => {
                ClopenSet::Periodic(TorusSet::full(vec![1; *dim]).expect("unit moduli"))
            }
            System::Sturmian { slope } => ClopenSet::Cylinder(CylinderSet::full(slope, 0, 0)),
        }
    }

    pub fn empty(&self) -> ClopenSet {
        match self {
            System::Odometer { dim, .. } | System::Translation { dim } => {
                ClopenSet::Periodic(TorusSet::empty(vec![1; *dim]).expect("unit moduli"))
            }
            System::Sturmian { .. } => ClopenSet::Cylinder(CylinderSet::empty(0, 0)),
        }
    }

    /// Checks that the set is a valid descriptor for this system.
    pub fn check_set(&self, a: &ClopenSet) -> Result<(), SystemError> {
        match (self, a) {
            (System::Odometer { dim, .. }, ClopenSet::Periodic(t)) => {
                if t.dim() != *dim {
                    return Err(SystemError::DimensionMismatch(*dim, t.dim()));
                }
                if t.moduli().iter().any(|&m| m != t.moduli()[0]) || self.depth_of(t).is_none() {
                    return Err(SystemError::WrongModel(format!("moduli {:?} are not a common power of p", t.moduli())));
                }
                Ok(())
            }
            (System::Translation { dim }, ClopenSet::Periodic(t)) => {
                if t.dim() != *dim {
                    return Err(SystemError::DimensionMismatch(*dim, t.dim()));
                }
                Ok(())
            }
            (System::Sturmian { slope }, ClopenSet::Cylinder(c)) => {
                let lang: BTreeSet<String> = admissible_words(slope, c.window).iter().map(|w| word_string(w)).collect();
                match c.words.iter().find(|w| !lang.contains(*w)) {
                    Some(w) => Err(SystemError::NotAdmissible(w.clone())),
                    None => Ok(()),
                }
            }
            _ => Err(SystemError::WrongModel("set kind does not match the system".into())),
        }
    }

    /// Brings two sets to a common resolution.
    pub fn common(&self, a: &ClopenSet, b: &ClopenSet) -> Result<(ClopenSet, ClopenSet), SystemError> {
        match (a, b) {
            (ClopenSet::Periodic(x), ClopenSet::Periodic(y)) => {
                let (x, y) = x.common(y)?;
                Ok((ClopenSet::Periodic(x), ClopenSet::Periodic(y)))
            }
            (ClopenSet::Cylinder(x), ClopenSet::Cylinder(y)) => {
                let slope = self.slope().ok_or_else(|| SystemError::WrongModel("cylinders need a slope".into()))?;
                let (x, y) = x.common(y, slope)?;
                Ok((ClopenSet::Cylinder(x), ClopenSet::Cylinder(y)))
            }
            _ => Err(SystemError::WrongModel("mixed set kinds".into())),
        }
    }

    fn combine(
        &self,
        a: &ClopenSet,
        b: &ClopenSet,
        op: fn(&BTreeSet<String>, &BTreeSet<String>) -> BTreeSet<String>,
        top: fn(&TorusSet, &TorusSet) -> Result<TorusSet, LatticeError>,
    ) -> Result<ClopenSet, SystemError> {
        match self.common(a, b)? {
            (ClopenSet::Periodic(x), ClopenSet::Periodic(y)) => Ok(ClopenSet::Periodic(top(&x, &y)?)),
            (ClopenSet::Cylinder(x), ClopenSet::Cylinder(y)) => Ok(ClopenSet::Cylinder(CylinderSet {
                offset: x.offset,
                window: x.window,
                words: op(&x.words, &y.words),
            })),
            _ => unreachable!("common returns matching kinds"),
        }
    }

    pub fn union(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SystemError> {
        self.combine(a, b, |x, y| x.union(y).cloned().collect(), TorusSet::union)
    }

    pub fn intersection(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SystemError> {
        self.combine(a, b, |x, y| x.intersection(y).cloned().collect(), TorusSet::intersection)
    }

    pub fn difference(&self, a: &ClopenSet, b: &ClopenSet) -> Result<ClopenSet, SystemError> {
        self.combine(a, b, |x, y| x.difference(y).cloned().collect(), TorusSet::difference)
    }

    pub fn complement(&self, a: &ClopenSet) -> Result<ClopenSet, SystemError> {
        self.difference(&self.full(), a)
    }

    pub fn same_set(&self, a: &ClopenSet, b: &ClopenSet) -> Result<bool, SystemError> {
        Ok(match self.common(a, b)? {
            (ClopenSet::Periodic(x), ClopenSet::Periodic(y)) => x == y,
            (ClopenSet::Cylinder(x), ClopenSet::Cylinder(y)) => x.words == y.words,
            _ => false,
        })
    }

    pub fn is_subset(&self, a: &ClopenSet, b: &ClopenSet) -> Result<bool, SystemError> {
        Ok(self.difference(a, b)?.is_empty())
    }

    /// The image `γ·A`.
    pub fn translate(&self, a: &ClopenSet, g: &[i64]) -> Result<ClopenSet, SystemError> {
        if g.len() != self.dim() {
            return Err(SystemError::DimensionMismatch(self.dim(), g.len()));
        }
        self.check_set(a)?;
        match a {
            ClopenSet::Periodic(t) => Ok(ClopenSet::Periodic(t.translate(g)?)),
            ClopenSet::Cylinder(c) => {
                // (γ·x)[i] = x[i + γ], so γ·x ∈ γ·A iff x[o..] ∈ W iff (γ·x)[o - γ..] ∈ W
                Ok(ClopenSet::Cylinder(CylinderSet { offset: c.offset - g[0], ..c.clone() }))
            }
        }
    }

    /// Re-expresses `A` at a finer resolution: odometer depth `n`, or for
    /// cylinders the window `[offset, offset + n)`.
    pub fn refine(&self, a: &ClopenSet, n: u32) -> Result<ClopenSet, SystemError> {
        match a {
            ClopenSet::Periodic(t) => {
                let cur = self.depth_of(t).ok_or_else(|| SystemError::WrongModel("not an odometer set".into()))?;
                if n < cur {
                    return Err(SystemError::Coarser(n as i64, cur as i64));
                }
                Ok(ClopenSet::Periodic(t.refine(&self.depth_moduli(n)?)?))
            }
            ClopenSet::Cylinder(c) => {
                let slope = self.slope().ok_or_else(|| SystemError::WrongModel("cylinders need a slope".into()))?;
                if (n as usize) < c.window {
                    return Err(SystemError::Coarser(n as i64, c.window as i64));
                }
                Ok(ClopenSet::Cylinder(c.refine_to(slope, c.offset, c.offset + n as i64)?))
            }
        }
    }

    /// Minimal-resolution form of a set.
    pub fn normalize(&self, a: &ClopenSet) -> Result<ClopenSet, SystemError> {
        match (self, a) {
            (System::Sturmian { slope }, ClopenSet::Cylinder(c)) => Ok(ClopenSet::Cylinder(c.normalize(slope))),
            (System::Odometer { p, .. }, ClopenSet::Periodic(t)) => {
                let mut cur = t.clone();
                loop {
                    let m = cur.moduli()[0];
                    if m % p != 0 {
                        return Ok(ClopenSet::Periodic(cur));
                    }
                    let smaller = vec![m / p; cur.dim()];
                    match cur.coarsen(&smaller) {
                        Ok(c) => cur = c,
                        Err(_) => return Ok(ClopenSet::Periodic(cur)),
                    }
                }
            }
            (System::Translation { .. }, ClopenSet::Periodic(t)) => {
                let mut cur = t.clone();
                'outer: loop {
                    for axis in 0..cur.dim() {
                        let m = cur.moduli()[axis];
                        for q in 2..=m {
                            if m % q == 0 {
                                let mut sm = cur.moduli().to_vec();
                                sm[axis] = m / q;
                                if let Ok(c) = cur.coarsen(&sm) {
                                    cur = c;
                                    continue 'outer;
                                }
                            }
                        }
                    }
                    return Ok(ClopenSet::Periodic(cur));
                }
            }
            _ => Err(SystemError::WrongModel("set kind does not match the system".into())),
        }
    }

    /// Odometer set from residue vectors at depth `n`.
    pub fn residue_set(&self, n: u32, cells: &[Vec<i64>]) -> Result<ClopenSet, SystemError> {
        let m = self.depth_moduli(n)?;
        for c in cells {
            if c.len() != m.len() || c.iter().any(|&x| x < 0 || x >= m[0]) {
                return Err(SystemError::WrongModel(format!("residue {c:?} out of range mod {}", m[0])));
            }
        }
        Ok(ClopenSet::Periodic(TorusSet::from_cells(m, cells.iter().cloned())?))
    }

    /// Sturmian cylinder set.
    pub fn cylinder(&self, offset: i64, words: &[&str]) -> Result<ClopenSet, SystemError> {
        let slope = self.slope().ok_or_else(|| SystemError::WrongModel("cylinders need a slope".into()))?;
        let window = words.first().map(|w| w.len()).unwrap_or(0);
        Ok(ClopenSet::Cylinder(CylinderSet::new(slope, offset, window, words.iter().map(|w| w.to_string()))?))
    }

    /// Certifies that distinct elements of `F` act differently at every point,
    /// working at resolution `depth`.
    pub fn check_free(&self, f: &Subset, depth: usize) -> Result<Certificate, SystemError> {
        if f.dim() != self.dim() {
            return Err(SystemError::DimensionMismatch(self.dim(), f.dim()));
        }
        let base = Certificate::new("free", Verdict::Pass).param("system", self).param("depth", depth);
        match self {
            System::Odometer { .. } | System::Translation { .. } => Ok(base.note(
                "translation by a nonzero vector has no fixed point, so distinct group elements never agree",
            )),
            System::Sturmian { slope } => {
                // γ·x = λ·x iff x is (γ - λ)-periodic; no periodic factor of the given
                // length rules that out for every point
                let elems = f.elements().map_err(|e| SystemError::BadSystem(e.to_string()))?;
                let mut periods = BTreeSet::new();
                for a in &elems {
                    for b in &elems {
                        let q = (a.coords()[0] - b.coords()[0]).abs();
                        if q > 0 {
                            periods.insert(q as usize);
                        }
                    }
                }
                let words = admissible_words(slope, depth);
                for &q in &periods {
                    if q >= depth {
                        continue;
                    }
                    if let Some(w) = words.iter().find(|w| (0..depth - q).all(|i| w[i] == w[i + q])) {
                        let reason = if slope.is_rational() {
                            format!("rational slope: the subshift has periodic points; factor is {q}-periodic")
                        } else {
                            format!("factor of length {depth} is {q}-periodic; resolution too coarse to separate")
                        };
                        return Ok(base.param("periods", &periods).fail_with(Counterexample {
                            color: None,
                            reason,
                            start: word_string(w),
                            chain: vec![vec![0], vec![q as i64]],
                        }));
                    }
                }
                if periods.iter().any(|&q| q >= depth) {
                    return Ok(base.param("periods", &periods).fail_with(Counterexample {
                        color: None,
                        reason: format!("depth {depth} does not exceed the largest period to exclude"),
                        start: String::new(),
                        chain: vec![],
                    }));
                }
                Ok(base.param("periods", &periods))
            }
        }
    }
}

/// The closed subsystem on a clopen set `Y`, with domains `D_γ = Y ∩ γ^{-1}Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedSystem {
    pub parent: System,
    pub y: ClopenSet,
}

impl RestrictedSystem {
    /// An empty `Y` gives the empty system, of dimension -1.
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dad_floor(&self) -> Option<i64> {
        self.is_empty().then_some(-1)
    }

    /// `D_γ = {x ∈ Y : γ·x ∈ Y}`.
    pub fn domain(&self, g: &[i64]) -> Result<ClopenSet, SystemError> {
        let back = self.parent.translate(&self.y, &g.iter().map(|x| -x).collect::<Vec<_>>())?;
        self.parent.intersection(&self.y, &back)
    }

    /// The partial map `θ_γ` applied to `A ∩ D_γ`.
    pub fn act(&self, a: &ClopenSet, g: &[i64]) -> Result<ClopenSet, SystemError> {
        let inside = self.parent.intersection(a, &self.domain(g)?)?;
        self.parent.translate(&inside, g)
    }
}

pub fn restrict(system: &System, y: &ClopenSet) -> Result<RestrictedSystem, SystemError> {
    system.validate()?;
    if !y.is_empty() {
        system.check_set(y)?;
    }
    Ok(RestrictedSystem { parent: system.clone(), y: y.clone() })
}

/// Clopen sets are their own open neighbourhoods; the certificate records that
/// the enlargement step is the identity here.
pub fn open_enlarge(a: &ClopenSet) -> (ClopenSet, Certificate) {
    let cert = Certificate::new("open-enlarge", Verdict::Pass)
        .note("the set is clopen, hence open; it serves as its own neighbourhood with the same components");
    (a.clone(), cert)
}
