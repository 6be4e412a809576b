//! Periodic subsets of `Z^d` stored on one period (a discrete torus), and
//! F-components of such sets computed on the torus with lifted coordinates.
//!
//! A set is stored row by row: a row fixes coordinates `1..d`, and inside a row
//! the members along axis 0 are kept as sorted, disjoint, non-adjacent runs.
//! Components are found by a search over runs. Every run carries a lift (how
//! many periods away from the fundamental domain it sits), so a component that
//! reaches the same run twice with different lifts is infinite.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupError, MAX_ENUMERATION};
use crate::Subset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("moduli mismatch: {0:?} vs {1:?}")]
    ModuliMismatch(Vec<i64>, Vec<i64>),
    #[error("modulus must be positive, got {0:?}")]
    BadModuli(Vec<i64>),
    #[error("cell {0:?} has wrong dimension")]
    BadCell(Vec<i64>),
    #[error("cannot refine moduli {0:?} to {1:?}")]
    BadRefinement(Vec<i64>, Vec<i64>),
    #[error("step set is not symmetric or lacks the identity")]
    NotSymmetric,
    #[error("too many points to enumerate ({0})")]
    TooLarge(u128),
    #[error(transparent)]
    Group(#[from] GroupError),
}

pub type Run = (i64, i64);

/// A subset of `Z^d` invariant under translation by `moduli[i] * e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusSet {
    moduli: Vec<i64>,
    rows: Vec<Vec<Run>>,
}

fn check_moduli(m: &[i64]) -> Result<(), LatticeError> {
    if m.is_empty() || m.iter().any(|&x| x <= 0) {
        return Err(LatticeError::BadModuli(m.to_vec()));
    }
    Ok(())
}

fn normalize_runs(mut runs: Vec<Run>) -> Vec<Run> {
    runs.retain(|r| r.0 <= r.1);
    runs.sort_unstable();
    let mut out: Vec<Run> = Vec::with_capacity(runs.len());
    for (lo, hi) in runs {
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn union_runs(a: &[Run], b: &[Run]) -> Vec<Run> {
    let mut out: Vec<Run> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i].0 <= b[j].0) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        match out.last_mut() {
            Some(last) if next.0 <= last.1 + 1 => last.1 = last.1.max(next.1),
            _ => out.push(next),
        }
    }
    out
}

fn intersect_runs(a: &[Run], b: &[Run]) -> Vec<Run> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn subtract_runs(a: &[Run], b: &[Run]) -> Vec<Run> {
    let mut out = Vec::new();
    let mut j = 0;
    for &(lo, hi) in a {
        let mut cur = lo;
        while j < b.len() && b[j].1 < cur {
            j += 1;
        }
        let mut k = j;
        while k < b.len() && b[k].0 <= hi {
            if b[k].0 > cur {
                out.push((cur, b[k].0 - 1));
            }
            cur = cur.max(b[k].1 + 1);
            k += 1;
        }
        if cur <= hi {
            out.push((cur, hi));
        }
    }
    out
}

/// Index of the first run whose end is at or after `x`.
fn first_run_ending_at_or_after(runs: &[Run], x: i64) -> usize {
    runs.partition_point(|r| r.1 < x)
}

impl TorusSet {
    pub fn empty(moduli: Vec<i64>) -> Result<Self, LatticeError> {
        check_moduli(&moduli)?;
        let n = moduli[1..].iter().product::<i64>() as usize;
        Ok(Self { moduli, rows: vec![Vec::new(); n] })
    }

    pub fn full(moduli: Vec<i64>) -> Result<Self, LatticeError> {
        let mut s = Self::empty(moduli)?;
        let m0 = s.moduli[0];
        for r in &mut s.rows {
            r.push((0, m0 - 1));
        }
        Ok(s)
    }

    /// Builds a set from residue vectors (reduced modulo the moduli).
    pub fn from_cells<I>(moduli: Vec<i64>, cells: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = Vec<i64>>,
    {
        let mut s = Self::empty(moduli)?;
        let mut rows: Vec<Vec<Run>> = vec![Vec::new(); s.rows.len()];
        for c in cells {
            if c.len() != s.dim() {
                return Err(LatticeError::BadCell(c));
            }
            let x = c[0].rem_euclid(s.moduli[0]);
            rows[s.row_index(&c[1..])].push((x, x));
        }
        s.rows = rows.into_iter().map(normalize_runs).collect();
        Ok(s)
    }

    /// Dense construction from a membership predicate on residues.
    pub fn from_fn(moduli: Vec<i64>, mut f: impl FnMut(&[i64]) -> bool) -> Result<Self, LatticeError> {
        let mut s = Self::empty(moduli)?;
        let m0 = s.moduli[0];
        let mut cell = vec![0i64; s.dim()];
        for r in 0..s.rows.len() {
            let rest = s.row_coords(r);
            cell[1..].copy_from_slice(&rest);
            let mut runs = Vec::new();
            let mut start: Option<i64> = None;
            for x in 0..m0 {
                cell[0] = x;
                match (f(&cell), start) {
                    (true, None) => start = Some(x),
                    (false, Some(a)) => {
                        runs.push((a, x - 1));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(a) = start {
                runs.push((a, m0 - 1));
            }
            s.rows[r] = runs;
        }
        Ok(s)
    }

    /// Builds a set from per-row run lists; runs are clipped to the period and merged.
    pub fn from_rows(moduli: Vec<i64>, rows: Vec<Vec<Run>>) -> Result<Self, LatticeError> {
        let mut s = Self::empty(moduli)?;
        if rows.len() != s.rows.len() {
            return Err(LatticeError::BadModuli(s.moduli.clone()));
        }
        let m0 = s.moduli[0];
        s.rows = rows
            .into_iter()
            .map(|r| normalize_runs(r.into_iter().map(|(a, b)| (a.max(0), b.min(m0 - 1))).collect()))
            .collect();
        Ok(s)
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[Run] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<Run>] {
        &self.rows
    }

    /// Coordinates `1..d` of row `r`.
    pub fn row_coords(&self, mut r: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.dim() - 1);
        for &m in &self.moduli[1..] {
            out.push((r % m as usize) as i64);
            r /= m as usize;
        }
        out
    }

    /// Row index of coordinates `1..d`, reduced modulo the moduli.
    pub fn row_index(&self, rest: &[i64]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, &m) in rest.iter().zip(&self.moduli[1..]) {
            idx += c.rem_euclid(m) as usize * stride;
            stride *= m as usize;
        }
        idx
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        if cell.len() != self.dim() {
            return false;
        }
        let runs = &self.rows[self.row_index(&cell[1..])];
        let x = cell[0].rem_euclid(self.moduli[0]);
        let i = first_run_ending_at_or_after(runs, x);
        i < runs.len() && runs[i].0 <= x
    }

    pub fn count(&self) -> u128 {
        self.rows.iter().flatten().map(|r| (r.1 - r.0 + 1) as u128).sum()
    }

    pub fn run_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn period_size(&self) -> u128 {
        self.moduli.iter().map(|&m| m as u128).product()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn is_full(&self) -> bool {
        let m0 = self.moduli[0];
        self.rows.iter().all(|r| r.len() == 1 && r[0] == (0, m0 - 1))
    }

    /// Residue vectors in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.rows.iter().enumerate().flat_map(move |(r, runs)| {
            let rest = self.row_coords(r);
            runs.iter().flat_map(move |&(a, b)| {
                let rest = rest.clone();
                (a..=b).map(move |x| {
                    let mut c = Vec::with_capacity(rest.len() + 1);
                    c.push(x);
                    c.extend_from_slice(&rest);
                    c
                })
            })
        })
    }

    fn zip_rows(&self, other: &Self, f: impl Fn(&[Run], &[Run]) -> Vec<Run>) -> Result<Self, LatticeError> {
        let (a, b) = self.common(other)?;
        let rows = a.rows.iter().zip(&b.rows).map(|(x, y)| f(x, y)).collect();
        Ok(Self { moduli: a.moduli.clone(), rows })
    }

    /// Refines both sets to the componentwise lcm of their moduli.
    pub fn common(&self, other: &Self) -> Result<(Self, Self), LatticeError> {
        if self.moduli == other.moduli {
            return Ok((self.clone(), other.clone()));
        }
        if self.dim() != other.dim() {
            return Err(LatticeError::ModuliMismatch(self.moduli.clone(), other.moduli.clone()));
        }
        let m: Vec<i64> = self.moduli.iter().zip(&other.moduli).map(|(&a, &b)| lcm(a, b)).collect();
        Ok((self.refine(&m)?, other.refine(&m)?))
    }

    pub fn union(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_rows(other, union_runs)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_rows(other, intersect_runs)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, LatticeError> {
        self.zip_rows(other, subtract_runs)
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool, LatticeError> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn complement(&self) -> Self {
        let full = Self::full(self.moduli.clone()).expect("valid moduli");
        full.difference(self).expect("same moduli")
    }

    /// Translate by `g`: the result contains `c + g` for every member `c`.
    pub fn translate(&self, g: &[i64]) -> Result<Self, LatticeError> {
        if g.len() != self.dim() {
            return Err(LatticeError::BadCell(g.to_vec()));
        }
        let m0 = self.moduli[0];
        let shift = g[0].rem_euclid(m0);
        let mut rows: Vec<Vec<Run>> = vec![Vec::new(); self.rows.len()];
        for (r, runs) in self.rows.iter().enumerate() {
            if runs.is_empty() {
                continue;
            }
            let rest: Vec<i64> = self.row_coords(r).iter().zip(&g[1..]).map(|(c, d)| c + d).collect();
            let target = self.row_index(&rest);
            let mut out = Vec::with_capacity(runs.len() + 1);
            for &(a, b) in runs {
                let (a, b) = (a + shift, b + shift);
                if b < m0 {
                    out.push((a, b));
                } else if a >= m0 {
                    out.push((a - m0, b - m0));
                } else {
                    out.push((a, m0 - 1));
                    out.push((0, b - m0));
                }
            }
            rows[target] = normalize_runs(out);
        }
        Ok(Self { moduli: self.moduli.clone(), rows })
    }

    /// Re-expresses the set over larger moduli, each a multiple of the current one.
    pub fn refine(&self, moduli: &[i64]) -> Result<Self, LatticeError> {
        check_moduli(moduli)?;
        if moduli.len() != self.dim()
            || moduli.iter().zip(&self.moduli).any(|(&n, &m)| n < m || n % m != 0)
        {
            return Err(LatticeError::BadRefinement(self.moduli.clone(), moduli.to_vec()));
        }
        if moduli == self.moduli.as_slice() {
            return Ok(self.clone());
        }
        let mut out = Self::empty(moduli.to_vec())?;
        let reps = moduli[0] / self.moduli[0];
        let m0 = self.moduli[0];
        for r in 0..out.rows.len() {
            let rest = out.row_coords(r);
            let src = &self.rows[self.row_index(&rest)];
            let mut runs = Vec::with_capacity(src.len() * reps as usize);
            for k in 0..reps {
                runs.extend(src.iter().map(|&(a, b)| (a + k * m0, b + k * m0)));
            }
            out.rows[r] = normalize_runs(runs);
        }
        Ok(out)
    }

    /// Whether the set is invariant under translation by `step * e_axis`.
    pub fn invariant_under(&self, axis: usize, step: i64) -> bool {
        let mut g = vec![0; self.dim()];
        g[axis] = step;
        self.translate(&g).map(|t| &t == self).unwrap_or(false)
    }

    /// Re-expresses the set over smaller moduli; the set must be invariant
    /// under the corresponding translations.
    pub fn coarsen(&self, moduli: &[i64]) -> Result<Self, LatticeError> {
        if moduli.len() != self.dim() || moduli.iter().zip(&self.moduli).any(|(&n, &m)| n <= 0 || m % n != 0) {
            return Err(LatticeError::BadRefinement(self.moduli.clone(), moduli.to_vec()));
        }
        for (i, &n) in moduli.iter().enumerate() {
            if n != self.moduli[i] && !self.invariant_under(i, n) {
                return Err(LatticeError::BadRefinement(self.moduli.clone(), moduli.to_vec()));
            }
        }
        let mut out = Self::empty(moduli.to_vec())?;
        for r in 0..out.rows.len() {
            let rest = out.row_coords(r);
            let src = &self.rows[self.row_index(&rest)];
            out.rows[r] = intersect_runs(src, &[(0, moduli[0] - 1)]);
        }
        Ok(out)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// A symmetric step set split into segments along axis 0.
#[derive(Clone, Debug)]
pub struct Steps {
    dim: usize,
    /// `(offsets on axes 1..d, lo, hi)`.
    segs: Vec<(Vec<i64>, i64, i64)>,
    /// Whether `±e_0` are steps, so maximal runs are internally connected.
    unit_axis: bool,
    /// Largest `h` with `[-h, h] * e_0` inside the step set.
    axis_reach: i64,
}

impl Steps {
    pub fn new(f: &Subset) -> Result<Self, LatticeError> {
        if !f.is_fs() {
            return Err(LatticeError::NotSymmetric);
        }
        let dim = f.dim();
        let segs = f.axis_segments()?;
        let zero = vec![0i64; dim - 1];
        let axis_reach = segs
            .iter()
            .find(|(rest, lo, hi)| *rest == zero && *lo <= 0 && *hi >= 0)
            .map(|(_, lo, hi)| (-lo).min(*hi))
            .unwrap_or(0);
        Ok(Self { dim, segs, unit_axis: axis_reach >= 1, axis_reach })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.segs.iter().any(|(rest, lo, hi)| rest.as_slice() == &v[1..] && *lo <= v[0] && v[0] <= *hi)
    }
}

/// Summary of one F-component.
#[derive(Clone, Debug)]
pub struct Component {
    /// Index of the first run in row-major order; its first cell is the base cell.
    pub root: u32,
    pub run_count: u32,
    pub cells: u64,
    /// A nonzero translation (multiple of the moduli) preserving the component,
    /// present exactly when the component is infinite.
    pub period: Option<Vec<i64>>,
}

/// F-components of a periodic set.
#[derive(Clone, Debug)]
pub struct Components {
    moduli: Vec<i64>,
    /// `(row, lo, hi)` in row-major order.
    runs: Vec<(u32, i64, i64)>,
    row_start: Vec<usize>,
    comp_of: Vec<u32>,
    /// Per run, `d` wrap counts.
    lift: Vec<i64>,
    comps: Vec<Component>,
    /// Per component, `(min, max)` of `σ·p` for each sign vector `σ` with `σ_0 = +1`,
    /// followed by `(min, max)` of each coordinate.
    ext: Vec<(i64, i64)>,
    nsig: usize,
}

fn sign(mask: usize, i: usize) -> i64 {
    if i > 0 && (mask >> (i - 1)) & 1 == 1 {
        -1
    } else {
        1
    }
}

impl Components {
    pub fn compute(set: &TorusSet, steps: &Steps) -> Result<Self, LatticeError> {
        let d = set.dim();
        if steps.dim != d {
            return Err(LatticeError::Group(GroupError::DimensionMismatch(d, steps.dim)));
        }
        let m = set.moduli.clone();
        let m0 = m[0];
        let mut runs: Vec<(u32, i64, i64)> = Vec::with_capacity(set.run_count());
        let mut row_start = Vec::with_capacity(set.rows.len() + 1);
        for (r, rr) in set.rows.iter().enumerate() {
            row_start.push(runs.len());
            for &(a, b) in rr {
                if steps.unit_axis {
                    runs.push((r as u32, a, b));
                } else {
                    if runs.len() as u128 + (b - a + 1) as u128 > MAX_ENUMERATION {
                        return Err(LatticeError::TooLarge(set.count()));
                    }
                    runs.extend((a..=b).map(|x| (r as u32, x, x)));
                }
            }
        }
        row_start.push(runs.len());
        let n = runs.len();
        let nsig = 1usize << (d - 1);
        let mut comp_of = vec![u32::MAX; n];
        let mut lift = vec![0i64; n * d];
        let mut comps = Vec::new();
        let mut ext: Vec<(i64, i64)> = Vec::new();
        let row_coords: Vec<Vec<i64>> = (0..set.rows.len()).map(|r| set.row_coords(r)).collect();
        let mut stack: Vec<u32> = Vec::new();
        let mut wrap = vec![0i64; d];
        let mut target_rest = vec![0i64; d.saturating_sub(1)];
        let mut nk = vec![0i64; d];
        for root in 0..n {
            if comp_of[root] != u32::MAX {
                continue;
            }
            let cid = comps.len() as u32;
            comp_of[root] = cid;
            let mut comp = Component { root: root as u32, run_count: 0, cells: 0, period: None };
            let mut e = vec![(i64::MAX, i64::MIN); nsig + d];
            stack.push(root as u32);
            while let Some(ru) = stack.pop() {
                let ru = ru as usize;
                let (row, a, b) = runs[ru];
                let rest = &row_coords[row as usize];
                let k: Vec<i64> = lift[ru * d..ru * d + d].to_vec();
                comp.run_count += 1;
                comp.cells += (b - a + 1) as u64;
                // extremes
                let ua = a + k[0] * m0;
                let ub = b + k[0] * m0;
                for mask in 0..nsig {
                    let mut base = 0i64;
                    for i in 1..d {
                        base += sign(mask, i) * (rest[i - 1] + k[i] * m[i]);
                    }
                    let ent = &mut e[mask];
                    ent.0 = ent.0.min(ua + base);
                    ent.1 = ent.1.max(ub + base);
                }
                {
                    let ent = &mut e[nsig];
                    ent.0 = ent.0.min(ua);
                    ent.1 = ent.1.max(ub);
                }
                for i in 1..d {
                    let v = rest[i - 1] + k[i] * m[i];
                    let ent = &mut e[nsig + i];
                    ent.0 = ent.0.min(v);
                    ent.1 = ent.1.max(v);
                }
                for (delta, lo, hi) in &steps.segs {
                    for i in 1..d {
                        let t = rest[i - 1] + delta[i - 1];
                        wrap[i] = t.div_euclid(m[i]);
                        target_rest[i - 1] = t.rem_euclid(m[i]);
                    }
                    let tr = set.row_index(&target_rest);
                    let (s0, s1) = (row_start[tr], row_start[tr + 1]);
                    if s0 == s1 {
                        continue;
                    }
                    let trow = &runs[s0..s1];
                    let (xa, xb) = (a + lo, b + hi);
                    for j in xa.div_euclid(m0)..=xb.div_euclid(m0) {
                        let la = (xa - j * m0).max(0);
                        let lb = (xb - j * m0).min(m0 - 1);
                        let mut t = trow.partition_point(|r| r.2 < la);
                        while t < trow.len() && trow[t].1 <= lb {
                            let tu = s0 + t;
                            t += 1;
                            nk[0] = k[0] + j;
                            for i in 1..d {
                                nk[i] = k[i] + wrap[i];
                            }
                            if comp_of[tu] == u32::MAX {
                                comp_of[tu] = cid;
                                lift[tu * d..tu * d + d].copy_from_slice(&nk);
                                stack.push(tu as u32);
                            } else if comp.period.is_none() && lift[tu * d..tu * d + d] != *nk {
                                let per: Vec<i64> =
                                    (0..d).map(|i| (nk[i] - lift[tu * d + i]) * m[i]).collect();
                                comp.period = Some(per);
                            }
                        }
                    }
                }
            }
            comps.push(comp);
            ext.extend(e);
        }
        Ok(Self { moduli: m, runs, row_start, comp_of, lift, comps, ext, nsig })
    }

    pub fn dim(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, c: usize) -> &Component {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    fn row_coords(&self, row: u32) -> Vec<i64> {
        let mut r = row as usize;
        let mut out = Vec::with_capacity(self.dim() - 1);
        for &m in &self.moduli[1..] {
            out.push((r % m as usize) as i64);
            r /= m as usize;
        }
        out
    }

    fn row_index(&self, rest: &[i64]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, &m) in rest.iter().zip(&self.moduli[1..]) {
            idx += c.rem_euclid(m) as usize * stride;
            stride *= m as usize;
        }
        idx
    }

    /// Run index containing the residue cell, if any.
    pub fn run_of(&self, cell: &[i64]) -> Option<usize> {
        let r = self.row_index(&cell[1..]);
        let x = cell[0].rem_euclid(self.moduli[0]);
        let slice = &self.runs[self.row_start[r]..self.row_start[r + 1]];
        let t = slice.partition_point(|q| q.2 < x);
        (t < slice.len() && slice[t].1 <= x).then_some(self.row_start[r] + t)
    }

    pub fn component_of_cell(&self, cell: &[i64]) -> Option<usize> {
        self.run_of(cell).map(|r| self.comp_of[r] as usize)
    }

    pub fn component_of_run(&self, run: usize) -> usize {
        self.comp_of[run] as usize
    }

    /// `(row coordinates, lo, hi)` of a run, as residues.
    pub fn run(&self, i: usize) -> (Vec<i64>, i64, i64) {
        let (r, a, b) = self.runs[i];
        (self.row_coords(r), a, b)
    }

    /// Lifted position of `x` in run `i` (a point of `Z^d`).
    pub fn lifted(&self, i: usize, x: i64) -> Vec<i64> {
        let d = self.dim();
        let (r, _, _) = self.runs[i];
        let rest = self.row_coords(r);
        let mut p = Vec::with_capacity(d);
        p.push(x + self.lift[i * d] * self.moduli[0]);
        for k in 1..d {
            p.push(rest[k - 1] + self.lift[i * d + k] * self.moduli[k]);
        }
        p
    }

    /// Lifted position of the base cell of a component (the first cell of its root run).
    pub fn base_point(&self, c: usize) -> Vec<i64> {
        let root = self.comps[c].root as usize;
        self.lifted(root, self.runs[root].1)
    }

    /// Base cell as a residue vector.
    pub fn base_cell(&self, c: usize) -> Vec<i64> {
        let (rest, lo, _) = self.run(self.comps[c].root as usize);
        let mut v = vec![lo];
        v.extend(rest);
        v
    }

    /// Offset of a cell's point from its component's base point; `None` for
    /// cells outside the set or in infinite components.
    pub fn label(&self, cell: &[i64]) -> Option<Vec<i64>> {
        let r = self.run_of(cell)?;
        let c = self.comp_of[r] as usize;
        if self.comps[c].period.is_some() {
            return None;
        }
        let p = self.lifted(r, cell[0].rem_euclid(self.moduli[0]));
        let b = self.base_point(c);
        Some(p.iter().zip(&b).map(|(x, y)| x - y).collect())
    }

    /// Iterates `(run index, label of the run's first cell)` for the runs of
    /// finite components; labels of the other cells in a run follow along axis 0.
    pub fn run_labels(&self) -> impl Iterator<Item = (usize, Vec<i64>)> + '_ {
        (0..self.runs.len()).filter_map(move |i| {
            let c = self.comp_of[i] as usize;
            if self.comps[c].period.is_some() {
                return None;
            }
            let p = self.lifted(i, self.runs[i].1);
            let b = self.base_point(c);
            Some((i, p.iter().zip(&b).map(|(x, y)| x - y).collect()))
        })
    }

    fn ext(&self, c: usize) -> &[(i64, i64)] {
        let w = self.nsig + self.dim();
        &self.ext[c * w..(c + 1) * w]
    }

    /// ℓ1 diameter of a finite component.
    pub fn diameter(&self, c: usize) -> Option<i64> {
        if self.comps[c].period.is_some() {
            return None;
        }
        self.ext(c)[..self.nsig].iter().map(|&(lo, hi)| hi - lo).max()
    }

    /// A center `μ` (lifted coordinates) with the component inside `μ + ball(R)`.
    pub fn fit_ball(&self, c: usize, radius: i64) -> Option<Vec<i64>> {
        if self.comps[c].period.is_some() {
            return None;
        }
        let d = self.dim();
        let e = self.ext(c);
        // M_σ - R <= σ·μ <= m_σ + R for every σ
        let bounds: Vec<(i64, i64)> = e[..self.nsig].iter().map(|&(lo, hi)| (hi - radius, lo + radius)).collect();
        if bounds.iter().any(|(l, h)| l > h) {
            return None;
        }
        match d {
            1 => Some(vec![bounds[0].0 + (bounds[0].1 - bounds[0].0) / 2]),
            2 => {
                // u = x + y, v = x - y, same parity
                let (ul, uh) = bounds[0];
                let (vl, vh) = bounds[1];
                let u = ul + (uh - ul) / 2;
                for du in [0, 1, -1] {
                    let uu = u + du;
                    if uu < ul || uu > uh {
                        continue;
                    }
                    let v0 = vl + (vh - vl) / 2;
                    for dv in [0, 1, -1] {
                        let vv = v0 + dv;
                        if vv >= vl && vv <= vh && (uu - vv).rem_euclid(2) == 0 {
                            return Some(vec![(uu + vv) / 2, (uu - vv) / 2]);
                        }
                    }
                }
                None
            }
            _ => {
                let axis = &e[self.nsig..];
                let boxes: Vec<(i64, i64)> = axis.iter().map(|&(lo, hi)| (hi - radius, lo + radius)).collect();
                let ok = |mu: &[i64]| {
                    (0..self.nsig).all(|s| {
                        let v: i64 = mu.iter().enumerate().map(|(i, &x)| sign(s, i) * x).sum();
                        v >= bounds[s].0 && v <= bounds[s].1
                    })
                };
                let center: Vec<i64> = axis.iter().map(|&(lo, hi)| lo + (hi - lo) / 2).collect();
                let mut mu = center.clone();
                // small neighbourhood of the center first, then the full box
                for spread in [1i64, i64::MAX] {
                    let lo: Vec<i64> =
                        boxes.iter().zip(&center).map(|(b, c)| b.0.max(c.saturating_sub(spread))).collect();
                    let hi: Vec<i64> =
                        boxes.iter().zip(&center).map(|(b, c)| b.1.min(c.saturating_add(spread))).collect();
                    let size: u128 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0) as u128).product();
                    if size == 0 || size > MAX_ENUMERATION {
                        continue;
                    }
                    mu.copy_from_slice(&lo);
                    loop {
                        if ok(&mu) {
                            return Some(mu);
                        }
                        let mut i = 0;
                        loop {
                            if i == d {
                                break;
                            }
                            mu[i] += 1;
                            if mu[i] <= hi[i] {
                                break;
                            }
                            mu[i] = lo[i];
                            i += 1;
                        }
                        if i == d {
                            break;
                        }
                    }
                }
                None
            }
        }
    }

    /// All lifted points of a finite component.
    pub fn points(&self, c: usize) -> Result<Vec<Vec<i64>>, LatticeError> {
        let comp = &self.comps[c];
        if comp.cells as u128 > MAX_ENUMERATION {
            return Err(LatticeError::TooLarge(comp.cells as u128));
        }
        let mut out = Vec::with_capacity(comp.cells as usize);
        for i in self.runs_of(c) {
            let (_, a, b) = self.runs[i];
            for x in a..=b {
                out.push(self.lifted(i, x));
            }
        }
        Ok(out)
    }

    /// Run indices of a component (linear scan).
    pub fn runs_of(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        let root = self.comps[c].root as usize;
        (root..self.runs.len()).filter(move |&i| self.comp_of[i] as usize == c)
    }

    /// Fits the component into a translate of an explicit set `S`; returns the
    /// translate `μ` in lifted coordinates.
    pub fn fit_explicit(&self, c: usize, s: &Subset) -> Result<Option<Vec<i64>>, LatticeError> {
        if self.comps[c].period.is_some() {
            return Ok(None);
        }
        if let Some(r) = s.as_ball() {
            return Ok(self.fit_ball(c, r as i64));
        }
        let pts = self.points(c)?;
        let p0 = &pts[0];
        for sv in s.elements()? {
            let mu: Vec<i64> = p0.iter().zip(sv.coords()).map(|(a, b)| a - b).collect();
            if pts.iter().all(|p| {
                let diff: Vec<i64> = p.iter().zip(&mu).map(|(a, b)| a - b).collect();
                s.contains_coords(&diff)
            }) {
                return Ok(Some(mu));
            }
        }
        Ok(None)
    }

    /// Re-runs the search from the root of component `c` recording parents, and
    /// returns an explicit chain of lifted points. With `targets` empty and an
    /// infinite component, the chain closes up after a nonzero period; otherwise
    /// it visits the requested lifted points, returning to the base in between.
    pub fn chain(&self, c: usize, steps: &Steps, targets: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let d = self.dim();
        let m = &self.moduli;
        let m0 = m[0];
        let n = self.runs.len();
        // parent: (parent run, parent point x, own point x, own lift)
        let mut parent: Vec<Option<(usize, i64, i64)>> = vec![None; n];
        let mut plift: Vec<Option<Vec<i64>>> = vec![None; n];
        let root = self.comps[c].root as usize;
        plift[root] = Some(vec![0; d]);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(root);
        let mut closing: Option<(usize, i64, usize, i64, Vec<i64>)> = None;
        while let Some(ru) = queue.pop_front() {
            let (row, a, b) = self.runs[ru];
            let rest = self.row_coords(row);
            let k = plift[ru].clone().expect("visited");
            for (delta, lo, hi) in &steps.segs {
                let mut wrap = vec![0i64; d];
                let mut trest = vec![0i64; d - 1];
                for i in 1..d {
                    let t = rest[i - 1] + delta[i - 1];
                    wrap[i] = t.div_euclid(m[i]);
                    trest[i - 1] = t.rem_euclid(m[i]);
                }
                let tr = self.row_index(&trest);
                let (s0, s1) = (self.row_start[tr], self.row_start[tr + 1]);
                let (xa, xb) = (a + lo, b + hi);
                for j in xa.div_euclid(m0)..=xb.div_euclid(m0) {
                    let la = (xa - j * m0).max(0);
                    let lb = (xb - j * m0).min(m0 - 1);
                    for tu in s0..s1 {
                        let (_, ta, tb) = self.runs[tu];
                        if tb < la || ta > lb {
                            continue;
                        }
                        // concrete pair: y in target (torus coords + j*m0), x in source
                        let y = ta.max(la);
                        let yu = y + j * m0;
                        let x = a.max(yu - hi).min(b);
                        let mut nk = k.clone();
                        nk[0] += j;
                        for i in 1..d {
                            nk[i] += wrap[i];
                        }
                        match &plift[tu] {
                            None => {
                                plift[tu] = Some(nk);
                                parent[tu] = Some((ru, x, y));
                                queue.push_back(tu);
                            }
                            Some(old) if *old != nk && closing.is_none() && targets.is_empty() => {
                                closing = Some((ru, x, tu, y, nk));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        let lifted_at = |run: usize, x: i64, k: &[i64]| -> Vec<i64> {
            let (r, _, _) = self.runs[run];
            let rest = self.row_coords(r);
            let mut p = vec![x + k[0] * m0];
            for i in 1..d {
                p.push(rest[i - 1] + k[i] * m[i]);
            }
            p
        };
        // path of lifted points from the base to (run, x)
        let path_to = |run: usize, x: i64| -> Vec<Vec<i64>> {
            let mut segs: Vec<(usize, i64, i64)> = Vec::new(); // (run, entry x, exit x)
            let mut cur = run;
            let mut exit = x;
            loop {
                match parent[cur] {
                    Some((p, px, y)) => {
                        segs.push((cur, y, exit));
                        cur = p;
                        exit = px;
                    }
                    None => {
                        segs.push((cur, self.runs[cur].1, exit));
                        break;
                    }
                }
            }
            segs.reverse();
            let mut out = Vec::new();
            let reach = steps.axis_reach.max(1);
            for (run, entry, exit) in segs {
                let k = plift[run].as_ref().expect("visited");
                let mut t = entry;
                out.push(lifted_at(run, t, k));
                while t != exit {
                    t = if exit > t { (t + reach).min(exit) } else { (t - reach).max(exit) };
                    out.push(lifted_at(run, t, k));
                }
            }
            out
        };
        if targets.is_empty() {
            if let Some((ru, x, tu, y, nk)) = closing {
                let mut chain = path_to(ru, x);
                let old = plift[tu].clone().expect("visited");
                let shift: Vec<i64> = (0..d).map(|i| (nk[i] - old[i]) * m[i]).collect();
                let mut back = path_to(tu, y);
                back.reverse();
                for p in back {
                    chain.push(p.iter().zip(&shift).map(|(a, b)| a + b).collect());
                }
                return chain;
            }
            return vec![lifted_at(root, self.runs[root].1, &vec![0; d])];
        }
        let mut chain: Vec<Vec<i64>> = Vec::new();
        for t in targets {
            let cell: Vec<i64> = t.iter().zip(m).map(|(v, mm)| v.rem_euclid(*mm)).collect();
            let Some(run) = self.run_of(&cell) else { continue };
            let mut there = path_to(run, cell[0]);
            if !chain.is_empty() {
                // walk back to the base before heading to the next target
                let mut back = chain.clone();
                back.reverse();
                chain.extend(back.into_iter().skip(1));
                there.remove(0);
            }
            chain.extend(there);
        }
        chain
    }

    /// Lifted points realizing the extremes of the component, for counterexamples.
    pub fn extreme_points(&self, c: usize) -> Vec<Vec<i64>> {
        let e = self.ext(c).to_vec();
        let mut found: Vec<Option<Vec<i64>>> = vec![None; 2 * self.nsig];
        for i in self.runs_of(c) {
            let (_, a, b) = self.runs[i];
            for (x, is_max) in [(a, false), (b, true)] {
                let p = self.lifted(i, x);
                for s in 0..self.nsig {
                    let v: i64 = p.iter().enumerate().map(|(k, &q)| sign(s, k) * q).sum();
                    let slot = 2 * s + is_max as usize;
                    let target = if is_max { e[s].1 } else { e[s].0 };
                    if v == target && found[slot].is_none() {
                        found[slot] = Some(p.clone());
                    }
                }
            }
        }
        let mut out: Vec<Vec<i64>> = found.into_iter().flatten().collect();
        let mut seen = BTreeSet::new();
        out.retain(|p| seen.insert(p.clone()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set1(n: i64, xs: &[i64]) -> TorusSet {
        TorusSet::from_cells(vec![n], xs.iter().map(|&x| vec![x])).unwrap()
    }

    fn comps(s: &TorusSet, f: &Subset) -> Components {
        Components::compute(s, &Steps::new(f).unwrap()).unwrap()
    }

    #[test]
    fn run_set_algebra() {
        let a = set1(8, &[0, 1, 2, 6]);
        let b = set1(8, &[2, 3, 7]);
        assert_eq!(a.union(&b).unwrap(), set1(8, &[0, 1, 2, 3, 6, 7]));
        assert_eq!(a.intersection(&b).unwrap(), set1(8, &[2]));
        assert_eq!(a.difference(&b).unwrap(), set1(8, &[0, 1, 6]));
        assert_eq!(a.complement(), set1(8, &[3, 4, 5, 7]));
        assert_eq!(a.count(), 4);
    }

    #[test]
    fn translation_wraps() {
        assert_eq!(set1(8, &[0, 1]).translate(&[1]).unwrap(), set1(8, &[1, 2]));
        assert_eq!(set1(8, &[7]).translate(&[1]).unwrap(), set1(8, &[0]));
        assert_eq!(set1(8, &[6, 7]).translate(&[1]).unwrap(), set1(8, &[0, 7]));
        let s = TorusSet::from_cells(vec![4, 3], vec![vec![3, 2], vec![0, 0]]).unwrap();
        let t = s.translate(&[1, 1]).unwrap();
        assert!(t.contains(&[0, 0]) && t.contains(&[1, 1]));
        assert_eq!(t.translate(&[-1, -1]).unwrap(), s);
    }

    #[test]
    fn refine_and_coarsen() {
        let s = set1(2, &[0]);
        let r = s.refine(&[4]).unwrap();
        assert_eq!(r, set1(4, &[0, 2]));
        assert_eq!(r.coarsen(&[2]).unwrap(), s);
        assert!(set1(4, &[0]).coarsen(&[2]).is_err());
        assert!(s.refine(&[3]).is_err());
    }

    #[test]
    fn components_on_a_cycle() {
        let f = Subset::ball(1, 1);
        let c = comps(&set1(8, &[0, 1, 2]), &f);
        assert_eq!(c.len(), 1);
        assert_eq!(c.diameter(0), Some(2));
        assert_eq!(c.label(&[2]), Some(vec![2]));
        let full = comps(&TorusSet::full(vec![8]).unwrap(), &f);
        assert_eq!(full.components()[0].period.as_ref().map(|p| p[0].abs()), Some(8));
        assert_eq!(full.diameter(0), None);
        // wrap-around run joins 7 and 0
        let w = comps(&set1(8, &[7, 0, 1]), &f);
        assert_eq!(w.len(), 1);
        assert_eq!(w.diameter(0), Some(2));
        assert_eq!(w.label(&[7]), Some(vec![-1]));
    }

    #[test]
    fn steps_without_unit_moves() {
        let f = Subset::from_coords(1, &[vec![2]]).unwrap().symmetrize();
        let c = comps(&set1(8, &[0, 1, 2, 3]), &f);
        assert_eq!(c.len(), 2);
        assert_eq!(c.diameter(0), Some(2));
        let full = comps(&TorusSet::full(vec![8]).unwrap(), &f);
        assert_eq!(full.len(), 2);
        assert!(full.components().iter().all(|k| k.period.is_some()));
    }

    #[test]
    fn ball_fit_in_the_plane() {
        let s = TorusSet::from_cells(vec![10, 10], vec![vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        let c = comps(&s, &Subset::ball(2, 1));
        assert_eq!(c.len(), 1);
        assert_eq!(c.diameter(0), Some(2));
        let mu = c.fit_ball(0, 1).unwrap();
        for p in c.points(0).unwrap() {
            assert!((p[0] - mu[0]).abs() + (p[1] - mu[1]).abs() <= 1);
        }
        // two points at distance 2 along a diagonal need radius 1; three corners of a
        // unit square fit radius 1 only around the shared corner
        assert!(c.fit_ball(0, 0).is_none());
    }

    #[test]
    fn unbounded_chain_closes_up() {
        let f = Subset::ball(1, 1);
        let s = TorusSet::full(vec![5]).unwrap();
        let steps = Steps::new(&f).unwrap();
        let c = Components::compute(&s, &steps).unwrap();
        let chain = c.chain(0, &steps, &[]);
        let first = chain.first().unwrap();
        let last = chain.last().unwrap();
        assert_eq!((last[0] - first[0]).abs(), 5);
        for w in chain.windows(2) {
            assert!(steps.contains(&[w[1][0] - w[0][0]]));
        }
    }
}
