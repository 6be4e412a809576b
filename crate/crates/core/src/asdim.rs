//! Covers of `Z^d` by `d + 1` periodic colors whose r-components are uniformly
//! bounded, and the control function they realize.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cert::{cell_label, Certificate, Counterexample, Verdict};
use crate::covers::Cover;
use crate::group::GroupError;
use crate::lattice::{Components, LatticeError, Steps, TorusSet};
use crate::systems::{ClopenSet, System};
use crate::Subset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AsdimError {
    #[error("dimension and scale must be positive (d={0}, r={1})")]
    BadParameters(usize, u64),
    #[error("cover has no colors")]
    NoColors,
    #[error("color periods disagree")]
    PeriodMismatch,
    #[error("F must be symmetric and contain the identity")]
    NotFs,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A cover of `Z^d` by periodic colors sharing one period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupCover {
    pub dim: usize,
    /// Scale `r` the cover was built for.
    pub scale: u64,
    /// Claimed bound `R` on the diameter of r-components.
    pub bound: u64,
    pub period: Vec<i64>,
    pub colors: Vec<TorusSet>,
    #[serde(skip)]
    table: OnceLock<Vec<Vec<(i64, i64, u8)>>>,
}

impl PartialEq for GroupCover {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.scale == other.scale
            && self.bound == other.bound
            && self.period == other.period
            && self.colors == other.colors
    }
}

impl GroupCover {
    pub fn new(dim: usize, scale: u64, bound: u64, colors: Vec<TorusSet>) -> Result<Self, AsdimError> {
        let first = colors.first().ok_or(AsdimError::NoColors)?;
        let period = first.moduli().to_vec();
        if colors.iter().any(|c| c.moduli() != period.as_slice()) || period.len() != dim {
            return Err(AsdimError::PeriodMismatch);
        }
        Ok(Self { dim, scale, bound, period, colors, table: OnceLock::new() })
    }

    fn table(&self) -> &Vec<Vec<(i64, i64, u8)>> {
        self.table.get_or_init(|| {
            let rows = self.colors[0].num_rows();
            (0..rows)
                .map(|r| {
                    let mut row: Vec<(i64, i64, u8)> = Vec::new();
                    for (c, set) in self.colors.iter().enumerate() {
                        row.extend(set.row(r).iter().map(|&(a, b)| (a, b, c as u8)));
                    }
                    row.sort_unstable();
                    row
                })
                .collect()
        })
    }

    /// The first color containing the point.
    pub fn color_of(&self, p: &[i64]) -> Option<usize> {
        self.colors.iter().position(|c| c.contains(p))
    }

    /// Colors along the segment `{(x, rest) : lo <= x <= hi}` as maximal
    /// `(lo, hi, color)` pieces (first color wins where colors overlap).
    pub fn color_segments(&self, rest: &[i64], lo: i64, hi: i64) -> Vec<(i64, i64, usize)> {
        let row = &self.table()[self.colors[0].row_index(rest)];
        let m0 = self.period[0];
        let mut out: Vec<(i64, i64, usize)> = Vec::new();
        let mut push = |a: i64, b: i64, c: usize| match out.last_mut() {
            Some(last) if last.2 == c && last.1 + 1 == a => last.1 = b,
            _ => out.push((a, b, c)),
        };
        let mut x = lo;
        while x <= hi {
            let base = x.div_euclid(m0) * m0;
            let local = x - base;
            // smallest color index covering `local`, and how far it extends
            let mut best: Option<(usize, i64)> = None;
            let mut next_start = m0;
            for &(a, b, c) in row {
                if a <= local && local <= b {
                    match best {
                        Some((bc, _)) if bc <= c as usize => {}
                        _ => best = Some((c as usize, b)),
                    }
                } else if a > local {
                    next_start = next_start.min(a);
                }
            }
            match best {
                Some((c, b)) => {
                    let end = (base + b.min(next_start - 1)).min(hi);
                    push(x, end, c);
                    x = end + 1;
                }
                None => {
                    // uncovered stretch; skip it
                    x = base + next_start;
                }
            }
        }
        out
    }
}

/// `d + 1` colors for `Z^d` with r-components of diameter at most
/// [`control_function`]`(d, r)`.
pub fn grid_cover(d: usize, r: u64) -> Result<GroupCover, AsdimError> {
    if d == 0 || r == 0 {
        return Err(AsdimError::BadParameters(d, r));
    }
    let colors = match d {
        1 => alternating_blocks(r as i64)?,
        2 => brick_wall(r as i64)?,
        _ => shifted_bricks(d, r as i64)?,
    };
    let mut cover = GroupCover::new(d, r, 0, colors)?;
    cover.bound = measured_bound(&cover, r)?;
    Ok(cover)
}

/// Two colors on `Z`: blocks of `r + 1` consecutive integers, alternating.
fn alternating_blocks(r: i64) -> Result<Vec<TorusSet>, LatticeError> {
    let n = 2 * (r + 1);
    Ok(vec![
        TorusSet::from_rows(vec![n], vec![vec![(0, r)]])?,
        TorusSet::from_rows(vec![n], vec![vec![(r + 1, n - 1)]])?,
    ])
}

/// Two colors on `Z`: `[2kL, 2kL + L)` and the complementary intervals.
pub fn interval_cover(r: u64, len: i64) -> Result<GroupCover, AsdimError> {
    if r == 0 || len <= 0 {
        return Err(AsdimError::BadParameters(1, r));
    }
    let n = 2 * len;
    let colors = vec![
        TorusSet::from_rows(vec![n], vec![vec![(0, len - 1)]])?,
        TorusSet::from_rows(vec![n], vec![vec![(len, n - 1)]])?,
    ];
    let mut cover = GroupCover::new(1, r, 0, colors)?;
    cover.bound = measured_bound(&cover, r)?;
    Ok(cover)
}

/// Three colors on `Z^2`: bricks `W x H` with `W = max(2r - 2, 2)`, `H = r`,
/// band `j` shifted by `jW/2`, brick `i` of band `j` colored `(i + 2j) mod 3`.
fn brick_wall(r: i64) -> Result<Vec<TorusSet>, LatticeError> {
    let w = (2 * r - 2).max(2);
    let h = r;
    let moduli = vec![3 * w, 2 * h];
    let mut rows = vec![vec![Vec::new(); 2 * h as usize]; 3];
    for y in 0..2 * h {
        let j = y / h;
        let shift = j * w / 2;
        for i in -1..4 {
            let a = shift + i * w;
            let c = (i + 2 * j).rem_euclid(3) as usize;
            rows[c][y as usize].push((a, a + w - 1));
        }
    }
    rows.into_iter()
        .map(|color_rows| {
            // wrap runs into one period
            let fixed: Vec<Vec<(i64, i64)>> = color_rows
                .into_iter()
                .map(|runs| {
                    let mut out = Vec::new();
                    for (a, b) in runs {
                        for k in -2..=2 {
                            out.push((a + k * 3 * w, b + k * 3 * w));
                        }
                    }
                    out
                })
                .collect();
            TorusSet::from_rows(moduli.clone(), fixed)
        })
        .collect()
}

/// `d + 1` families of cubes of side `L = 2(d + 1)r`; family `j` is offset by
/// `2rj` along the diagonal and keeps points whose every coordinate lies in
/// `[r, L - r]` modulo `L`. A point takes the color of the first family keeping it.
fn shifted_bricks(d: usize, r: i64) -> Result<Vec<TorusSet>, LatticeError> {
    let l = 2 * (d as i64 + 1) * r;
    let keeps = |p: &[i64], j: i64| p.iter().all(|&t| (r..=l - r).contains(&(t - 2 * r * j).rem_euclid(l)));
    (0..=d as i64)
        .map(|j| TorusSet::from_fn(vec![l; d], |p| keeps(p, j) && (0..j).all(|i| !keeps(p, i))))
        .collect()
}

/// Largest diameter of an r-component of any color; `u64::MAX` if some is infinite.
fn measured_bound(cover: &GroupCover, r: u64) -> Result<u64, AsdimError> {
    let steps = Steps::new(&Subset::ball(cover.dim, r))?;
    let mut worst = 0u64;
    for color in &cover.colors {
        let comps = Components::compute(color, &steps)?;
        for c in 0..comps.len() {
            match comps.diameter(c) {
                Some(dm) => worst = worst.max(dm as u64),
                None => return Ok(u64::MAX),
            }
        }
    }
    Ok(worst)
}

/// The bound realized by [`grid_cover`]; computed once per `(d, r)`.
pub fn control_function(d: usize, r: u64) -> Result<u64, AsdimError> {
    static MEMO: OnceLock<Mutex<HashMap<(usize, u64), u64>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = memo.lock().expect("memo lock").get(&(d, r)) {
        return Ok(v);
    }
    let v = grid_cover(d, r)?.bound;
    memo.lock().expect("memo lock").insert((d, r), v);
    Ok(v)
}

/// The grid cover at scale `diam F` as a cover of the translation action of
/// `Z^d` on itself, with `S = ball(control_function(d, diam F))`.
pub fn gamma_action_cover(d: usize, f: &Subset) -> Result<(Cover, Subset), AsdimError> {
    if !f.is_fs() || f.dim() != d {
        return Err(AsdimError::NotFs);
    }
    let diam = f.diam()?;
    let (grid, bound) = if diam == 0 {
        (grid_cover(d, 1)?, 0)
    } else {
        let g = grid_cover(d, diam)?;
        let b = g.bound;
        (g, b)
    };
    let s = Subset::ball(d, bound);
    let cover = Cover {
        system: System::Translation { dim: d },
        restriction: None,
        colors: grid.colors.into_iter().map(ClopenSet::Periodic).collect(),
        f: f.clone(),
        s: s.clone(),
    };
    Ok((cover, s))
}

/// Checks that the colors cover `Z^d` and every r-component of every color has
/// diameter at most `bound`. Components are computed on one period with lifted
/// coordinates, which decides the global statement for periodic colors.
pub fn verify_group_cover(cover: &GroupCover, r: u64, bound: u64) -> Result<Certificate, AsdimError> {
    let mut cert = Certificate::new("group-cover", Verdict::Pass)
        .param("dim", cover.dim)
        .param("r", r)
        .param("R", bound)
        .param("period", &cover.period)
        .param("colors", cover.colors.len())
        .param("witnesses", false)
        .note("colors are periodic; r-components are computed on one period with lifted coordinates, so a component meeting a cell at two different lifts is infinite and every finite component is seen in full");
    cert.input = Some(serde_json::to_value(cover).expect("cover serializes"));
    let mut all = TorusSet::empty(cover.period.clone())?;
    for c in &cover.colors {
        all = all.union(c)?;
    }
    if !all.is_full() {
        let hole = all.complement().cells().next().expect("nonempty complement");
        return Ok(cert.fail_with(Counterexample {
            color: None,
            reason: "uncovered point".into(),
            start: cell_label(&hole),
            chain: vec![vec![0; cover.dim]],
        }));
    }
    let steps = Steps::new(&Subset::ball(cover.dim, r))?;
    let mut max_diam = 0i64;
    for (ci, color) in cover.colors.iter().enumerate() {
        let comps = Components::compute(color, &steps)?;
        cert.components += comps.len() as u64;
        for c in 0..comps.len() {
            let (reason, chain) = match comps.diameter(c) {
                Some(dm) if dm as u64 <= bound => {
                    max_diam = max_diam.max(dm);
                    continue;
                }
                Some(dm) => {
                    let ext = comps.extreme_points(c);
                    let (p, q) = farthest_pair(&ext);
                    (format!("component of diameter {dm} exceeds {bound}"), comps.chain(c, &steps, &[p, q]))
                }
                None => {
                    let cycle = comps.chain(c, &steps, &[]);
                    ("infinite component".to_string(), unroll(&cycle, bound as i64 + 1))
                }
            };
            let p0 = chain[0].clone();
            let offsets = chain.iter().map(|p| p.iter().zip(&p0).map(|(a, b)| a - b).collect()).collect();
            return Ok(cert.fail_with(Counterexample {
                color: Some(ci),
                reason,
                start: cell_label(&p0),
                chain: offsets,
            }));
        }
    }
    cert = cert.param("max_component_diameter", max_diam);
    Ok(cert)
}

fn farthest_pair(pts: &[Vec<i64>]) -> (Vec<i64>, Vec<i64>) {
    let mut best = (0i64, 0usize, 0usize);
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let dist: i64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).abs()).sum();
            if dist > best.0 {
                best = (dist, i, j);
            }
        }
    }
    (pts[best.1].clone(), pts[best.2].clone())
}

/// Repeats a closed-up chain (last point a period translate of the first)
/// until its ℓ1 extent from the start exceeds `span`.
pub fn unroll(cycle: &[Vec<i64>], span: i64) -> Vec<Vec<i64>> {
    let first = &cycle[0];
    let last = cycle.last().expect("nonempty chain");
    let mut period: Vec<i64> = last.iter().zip(first).map(|(a, b)| a - b).collect();
    if period.iter().all(|&x| x == 0) {
        return cycle.to_vec();
    }
    let owned: Vec<Vec<i64>>;
    let mut cycle = cycle;
    if period.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        // walk the loop the other way so the chain heads in the positive direction
        owned = cycle.iter().rev().map(|p| p.iter().zip(&period).map(|(a, t)| a - t).collect()).collect();
        cycle = &owned;
        period = period.iter().map(|x| -x).collect();
    }
    let mut out = cycle.to_vec();
    let mut k = 1i64;
    while out.iter().map(|p| p.iter().zip(first).map(|(a, b)| (a - b).abs()).sum::<i64>()).max().unwrap_or(0) < span {
        for p in &cycle[1..] {
            out.push(p.iter().zip(&period).map(|(a, t)| a + k * t).collect());
        }
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_cover_example() {
        let cover = interval_cover(2, 8).unwrap();
        assert!(verify_group_cover(&cover, 2, 7).unwrap().passed());
        let bad = verify_group_cover(&cover, 2, 3).unwrap();
        assert!(!bad.passed());
        let cx = bad.counterexample.unwrap();
        let span = cx.chain.iter().map(|p| p[0]).max().unwrap() - cx.chain.iter().map(|p| p[0]).min().unwrap();
        assert_eq!(span, 7);
    }

    #[test]
    fn single_color_line_fails() {
        let cover = GroupCover::new(1, 1, 10, vec![TorusSet::full(vec![1]).unwrap()]).unwrap();
        let cert = verify_group_cover(&cover, 1, 10).unwrap();
        assert!(!cert.passed());
        let chain: Vec<i64> = cert.counterexample.unwrap().chain.iter().map(|p| p[0]).collect();
        assert_eq!(chain, (0..=11).collect::<Vec<_>>());
    }

    #[test]
    fn control_function_values() {
        assert_eq!(control_function(1, 2).unwrap(), 2);
        assert_eq!(control_function(1, 1).unwrap(), 1);
        assert_eq!(control_function(2, 1).unwrap(), 1);
        assert_eq!(control_function(2, 2).unwrap(), 2);
        assert_eq!(control_function(2, 5).unwrap(), 11);
        for d in 1..=3 {
            let mut prev = 0;
            for r in 1..=4 {
                let v = control_function(d, r).unwrap();
                assert!(v >= r && v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn grid_covers_verify() {
        for (d, r) in [(1, 1), (1, 2), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let g = grid_cover(d, r).unwrap();
            assert_eq!(g.colors.len(), d + 1);
            assert!(verify_group_cover(&g, r, g.bound).unwrap().passed(), "d={d} r={r}");
        }
    }

    #[test]
    fn color_segments_follow_the_colors() {
        let g = grid_cover(2, 3).unwrap();
        for y in -3..9 {
            let segs = g.color_segments(&[y], -20, 40);
            assert_eq!(segs.first().unwrap().0, -20);
            assert_eq!(segs.last().unwrap().1, 40);
            for (a, b, c) in segs {
                for x in a..=b {
                    assert_eq!(g.color_of(&[x, y]), Some(c));
                }
            }
        }
    }
}
