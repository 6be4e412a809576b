//! Brute-force ground truth at desk scale: point-level chain search, exhaustive
//! colorings, a finite-window check for group covers and certificate replay.
//!
//! Nothing here uses the run/lift machinery of the lattice and chains modules.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::asdim::{verify_group_cover, GroupCover};
use crate::cert::{cell_label, Certificate};
use crate::chains::{f_components, ComponentAutomaton};
use crate::covers::{verify_with, Cover, VerifyOptions};
use crate::group::GroupError;
use crate::systems::{ClopenSet, CylinderSet, System};
use crate::Subset;

/// Largest model the point-level searches accept.
pub const MAX_POINTS: u128 = 100_000;
/// Largest model the exhaustive coloring search accepts.
pub const MAX_COLORING_CELLS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("model too large: {0} points (limit {1})")]
    SizeGuard(u128, u128),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("certificate schema: {0}")]
    Schema(String),
    #[error("component engine: {0}")]
    Engine(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A finite model of a system: all residues of a torus, or the positions of a
/// long Sturmian word generated by the Fibonacci substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteQuotientModel {
    Torus { moduli: Vec<i64> },
    Word { word: Vec<u8>, margin: usize },
}

impl FiniteQuotientModel {
    pub fn odometer(p: i64, dim: usize, depth: u32) -> Result<Self, OracleError> {
        let n = (p as u128).checked_pow(depth).and_then(|n| n.checked_pow(dim as u32)).unwrap_or(u128::MAX);
        if n > MAX_POINTS {
            return Err(OracleError::SizeGuard(n, MAX_POINTS));
        }
        Ok(FiniteQuotientModel::Torus { moduli: vec![p.pow(depth); dim] })
    }

    /// Fixed point of `0 -> 01, 1 -> 0`, truncated to `len`; positions within
    /// `margin` of either end are not used as start points.
    pub fn fibonacci(len: usize, margin: usize) -> Result<Self, OracleError> {
        if len as u128 > MAX_POINTS {
            return Err(OracleError::SizeGuard(len as u128, MAX_POINTS));
        }
        let mut w = vec![0u8];
        while w.len() < len {
            w = w.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
        }
        w.truncate(len);
        Ok(FiniteQuotientModel::Word { word: w, margin })
    }

    pub fn point_count(&self) -> u128 {
        match self {
            FiniteQuotientModel::Torus { moduli } => moduli.iter().map(|&m| m as u128).product(),
            FiniteQuotientModel::Word { word, .. } => word.len() as u128,
        }
    }

    /// All residue cells in lexicographic order (torus models only).
    pub fn cells(&self) -> Vec<Vec<i64>> {
        let FiniteQuotientModel::Torus { moduli } = self else { return Vec::new() };
        let mut out = vec![Vec::new()];
        for &m in moduli {
            out = out.into_iter().flat_map(|p: Vec<i64>| (0..m).map(move |x| [p.clone(), vec![x]].concat())).collect();
        }
        out
    }

    /// `γ·x` on a residue cell.
    pub fn act(&self, cell: &[i64], g: &[i64]) -> Vec<i64> {
        match self {
            FiniteQuotientModel::Torus { moduli } => {
                cell.iter().zip(g).zip(moduli).map(|((a, b), m)| (a + b).rem_euclid(*m)).collect()
            }
            FiniteQuotientModel::Word { .. } => cell.iter().zip(g).map(|(a, b)| a + b).collect(),
        }
    }
}

/// A start point with its label set; `None` marks an infinite component (or,
/// for word models, one leaving the usable part of the word).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeled {
    pub point: Vec<i64>,
    pub labels: Option<Vec<Vec<i64>>>,
}

fn step_list(f: &Subset) -> Result<Vec<Vec<i64>>, OracleError> {
    Ok(f.elements()?.into_iter().map(|g| g.coords().to_vec()).filter(|v| v.iter().any(|&x| x != 0)).collect())
}

fn in_torus_set(set: &ClopenSet, cell: &[i64]) -> bool {
    match set {
        ClopenSet::Periodic(t) => {
            // independent membership test: scan the row's runs
            let m = t.moduli();
            let mut r = 0usize;
            let mut stride = 1usize;
            for (c, &mi) in cell[1..].iter().zip(&m[1..]) {
                r += c.rem_euclid(mi) as usize * stride;
                stride *= mi as usize;
            }
            let x = cell[0].rem_euclid(m[0]);
            t.row(r).iter().any(|&(a, b)| a <= x && x <= b)
        }
        ClopenSet::Cylinder(_) => false,
    }
}

fn in_word_set(c: &CylinderSet, word: &[u8], pos: i64) -> Option<bool> {
    let a = pos + c.offset;
    if a < 0 || a as usize + c.window > word.len() {
        return None;
    }
    let s: String = word[a as usize..a as usize + c.window].iter().map(|&b| (b'0' + b) as char).collect();
    Some(c.words.contains(&s))
}

/// Offsets reachable from a point by F-chains inside `member`, found by plain
/// BFS over the integer lattice. A residue reached at two different offsets
/// means the component is infinite.
fn torus_labels(moduli: &[i64], start: &[i64], steps: &[Vec<i64>], member: &dyn Fn(&[i64]) -> bool) -> Option<Vec<Vec<i64>>> {
    let reduce = |v: &[i64]| -> Vec<i64> { v.iter().zip(moduli).map(|(a, m)| a.rem_euclid(*m)).collect() };
    let zero = vec![0i64; start.len()];
    let mut at: HashMap<Vec<i64>, Vec<i64>> = HashMap::from([(reduce(start), zero.clone())]);
    let mut queue = VecDeque::from([zero]);
    let mut out = Vec::new();
    while let Some(m) = queue.pop_front() {
        out.push(m.clone());
        for s in steps {
            let next: Vec<i64> = m.iter().zip(s).map(|(a, b)| a + b).collect();
            let p: Vec<i64> = start.iter().zip(&next).map(|(a, b)| a + b).collect();
            if !member(&p) {
                continue;
            }
            let cell = reduce(&p);
            match at.get(&cell) {
                Some(prev) if *prev != next => return None,
                Some(_) => {}
                None => {
                    at.insert(cell, next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    out.sort();
    Some(out)
}

/// Label sets of every point of `B` (torus models) or of every usable position
/// of the word lying in `B` (word models).
pub fn naive_components(model: &FiniteQuotientModel, b: &ClopenSet, f: &Subset) -> Result<Vec<Labeled>, OracleError> {
    if model.point_count() > MAX_POINTS {
        return Err(OracleError::SizeGuard(model.point_count(), MAX_POINTS));
    }
    let steps = step_list(f)?;
    match model {
        FiniteQuotientModel::Torus { moduli } => {
            if b.as_periodic().is_none() {
                return Err(OracleError::Unsupported("torus model needs a periodic set".into()));
            }
            let member = |p: &[i64]| in_torus_set(b, p);
            Ok(model
                .cells()
                .into_iter()
                .filter(|c| member(c))
                .map(|c| Labeled { labels: torus_labels(moduli, &c, &steps, &member), point: c })
                .collect())
        }
        FiniteQuotientModel::Word { word, margin } => {
            let c = b.as_cylinder().ok_or_else(|| OracleError::Unsupported("word model needs a cylinder set".into()))?;
            let lo = *margin as i64;
            let hi = word.len() as i64 - *margin as i64;
            // membership of every position; None where the window leaves the word
            let member: Vec<Option<bool>> = (0..word.len() as i64).map(|x| in_word_set(c, word, x)).collect();
            let at = |x: i64| if x < 0 || x >= member.len() as i64 { None } else { member[x as usize] };
            let mut comp = vec![usize::MAX; member.len()];
            let mut comps: Vec<(Vec<i64>, bool)> = Vec::new();
            for x0 in 0..member.len() as i64 {
                if at(x0) != Some(true) || comp[x0 as usize] != usize::MAX {
                    continue;
                }
                let id = comps.len();
                comp[x0 as usize] = id;
                let mut queue = VecDeque::from([x0]);
                let mut points = vec![x0];
                let mut escaped = false;
                while let Some(x) = queue.pop_front() {
                    for s in &steps {
                        let y = x + s[0];
                        match at(y) {
                            Some(true) if comp[y as usize] == usize::MAX => {
                                comp[y as usize] = id;
                                points.push(y);
                                queue.push_back(y);
                            }
                            Some(_) => {}
                            None => escaped = true,
                        }
                    }
                }
                points.sort_unstable();
                comps.push((points, escaped));
            }
            let mut out = Vec::new();
            for x in lo..hi {
                if at(x) != Some(true) {
                    continue;
                }
                let (points, escaped) = &comps[comp[x as usize]];
                let labels = (!escaped).then(|| points.iter().map(|&y| vec![y - x]).collect());
                out.push(Labeled { point: vec![x], labels });
            }
            Ok(out)
        }
    }
}

/// Whether every component of `color` (given as a cell predicate) fits in a
/// translate of `S`.
fn coloring_ok(moduli: &[i64], cells: &[Vec<i64>], color_of: &[usize], c: usize, steps: &[Vec<i64>], s: &[Vec<i64>]) -> bool {
    let index: HashMap<&Vec<i64>, usize> = cells.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let member = |p: &[i64]| {
        let r: Vec<i64> = p.iter().zip(moduli).map(|(a, m)| a.rem_euclid(*m)).collect();
        color_of[index[&r]] == c
    };
    let mut done = vec![false; cells.len()];
    for (i, cell) in cells.iter().enumerate() {
        if color_of[i] != c || done[i] {
            continue;
        }
        let Some(labels) = torus_labels(moduli, cell, steps, &member) else { return false };
        for m in &labels {
            let r: Vec<i64> = cell.iter().zip(m).zip(moduli).map(|((a, b), q)| (a + b).rem_euclid(*q)).collect();
            done[index[&r]] = true;
        }
        let fits = s.iter().any(|t| {
            let lambda: Vec<i64> = labels[0].iter().zip(t).map(|(a, b)| a - b).collect();
            labels.iter().all(|m| {
                let d: Vec<i64> = m.iter().zip(&lambda).map(|(a, b)| a - b).collect();
                s.contains(&d)
            })
        });
        if !fits {
            return false;
        }
    }
    true
}

/// Least number of colors `c <= cap` for which some coloring of the model's
/// cells has all F-components S-bounded.
pub fn exhaustive_min_colors(model: &FiniteQuotientModel, f: &Subset, s: &Subset, cap: usize) -> Result<Option<usize>, OracleError> {
    let FiniteQuotientModel::Torus { moduli } = model else {
        return Err(OracleError::Unsupported("exhaustive coloring needs a torus model".into()));
    };
    let cells = model.cells();
    if cells.len() > MAX_COLORING_CELLS {
        return Err(OracleError::SizeGuard(cells.len() as u128, MAX_COLORING_CELLS as u128));
    }
    let steps = step_list(f)?;
    let s_elems: Vec<Vec<i64>> = s.elements()?.into_iter().map(|g| g.coords().to_vec()).collect();
    let n = cells.len();
    for c in 1..=cap {
        // first cell fixed to color 0
        let total = (c as u128).pow(n.saturating_sub(1) as u32);
        let mut color_of = vec![0usize; n];
        for code in 0..total {
            let mut x = code;
            for slot in color_of.iter_mut().skip(1) {
                *slot = (x % c as u128) as usize;
                x /= c as u128;
            }
            if (0..c).all(|k| coloring_ok(moduli, &cells, &color_of, k, &steps, &s_elems)) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// Checks a group cover on the box `[-(P + R + r), P + R + r]^d` by BFS from
/// every point of one period, giving up on components that reach farther than
/// `bound` from their start.
pub fn group_cover_window(cover: &GroupCover, r: u64, bound: u64) -> Result<bool, OracleError> {
    let d = cover.dim;
    let half = cover.period.iter().max().copied().unwrap_or(0) + (bound + r) as i64;
    let side = (2 * half + 1) as u128;
    let total = side.checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > 50 * MAX_POINTS {
        return Err(OracleError::SizeGuard(total, 50 * MAX_POINTS));
    }
    let steps = step_list(&Subset::ball(d, r))?;
    let color = |p: &[i64]| cover.colors.iter().position(|c| in_torus_set(&ClopenSet::Periodic(c.clone()), p));
    let mut starts = vec![Vec::new()];
    for &m in &cover.period {
        starts = starts.into_iter().flat_map(|p: Vec<i64>| (0..m).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    for p in starts {
        let Some(c) = color(&p) else { return Ok(false) };
        let mut seen = BTreeSet::from([p.clone()]);
        let mut queue = VecDeque::from([p.clone()]);
        let mut pts = vec![p.clone()];
        while let Some(q) = queue.pop_front() {
            for s in &steps {
                let t: Vec<i64> = q.iter().zip(s).map(|(a, b)| a + b).collect();
                if t.iter().any(|x| x.abs() > half) {
                    return Ok(false);
                }
                if !seen.contains(&t) && color(&t) == Some(c) {
                    let far: i64 = t.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
                    if far > bound as i64 {
                        return Ok(false);
                    }
                    seen.insert(t.clone());
                    pts.push(t.clone());
                    queue.push_back(t);
                }
            }
        }
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let dist: i64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).abs()).sum();
                if dist > bound as i64 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayReport {
    /// Nodes re-executed.
    pub replayed: usize,
    /// Nodes without embedded input.
    pub skipped: usize,
    /// Descriptions of disagreements; empty when everything matches.
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs every certificate in the provenance tree that embeds its input and
/// compares verdict, component count, witnesses and counterexample.
pub fn replay(cert: &Certificate) -> Result<ReplayReport, OracleError> {
    let mut report = ReplayReport::default();
    replay_into(cert, "root", &mut report)?;
    Ok(report)
}

fn replay_into(cert: &Certificate, path: &str, report: &mut ReplayReport) -> Result<(), OracleError> {
    if cert.schema_version != crate::cert::SCHEMA_VERSION {
        return Err(OracleError::Schema(format!("schema version {} at {path}", cert.schema_version)));
    }
    match (&cert.input, cert.kind.as_str()) {
        (Some(input), "dad-cover") => {
            let cover: Cover = serde_json::from_value(input.clone()).map_err(|e| OracleError::Schema(format!("{path}: {e}")))?;
            let witnesses = cert.params.get("witnesses").and_then(|v| v.as_bool()).unwrap_or(true);
            let again = verify_with(&cover, VerifyOptions { witnesses, embed_input: true })
                .map_err(|e| OracleError::Schema(format!("{path}: {e}")))?;
            compare(cert, &again, path, report);
        }
        (Some(input), "group-cover") => {
            let cover: GroupCover = serde_json::from_value(input.clone()).map_err(|e| OracleError::Schema(format!("{path}: {e}")))?;
            let get = |k: &str| cert.params.get(k).and_then(|v| v.as_u64()).ok_or_else(|| OracleError::Schema(format!("{path}: missing {k}")));
            let again = verify_group_cover(&cover, get("r")?, get("R")?).map_err(|e| OracleError::Schema(format!("{path}: {e}")))?;
            compare(cert, &again, path, report);
        }
        (Some(_), kind) => return Err(OracleError::Schema(format!("{path}: cannot replay kind {kind}"))),
        (None, _) => report.skipped += 1,
    }
    for (i, child) in cert.provenance.iter().enumerate() {
        replay_into(child, &format!("{path}.{i}"), report)?;
    }
    Ok(())
}

fn compare(old: &Certificate, new: &Certificate, path: &str, report: &mut ReplayReport) {
    report.replayed += 1;
    if old.verdict != new.verdict {
        report.mismatches.push(format!("{path}: verdict {:?} replays as {:?}", old.verdict, new.verdict));
    }
    if old.components != new.components {
        report.mismatches.push(format!("{path}: {} components replay as {}", old.components, new.components));
    }
    if old.witnesses != new.witnesses {
        let at = old.witnesses.iter().zip(&new.witnesses).position(|(a, b)| a != b).unwrap_or(old.witnesses.len().min(new.witnesses.len()));
        report.mismatches.push(format!("{path}: witness {at} differs"));
    }
    if old.counterexample != new.counterexample {
        report.mismatches.push(format!("{path}: counterexample differs"));
    }
}

/// The system a model was built for, for reports.
pub fn describe(model: &FiniteQuotientModel) -> String {
    match model {
        FiniteQuotientModel::Torus { moduli } => format!("torus {moduli:?}"),
        FiniteQuotientModel::Word { word, margin } => format!("word of length {} (margin {margin})", word.len()),
    }
}

/// Convenience for systems: the torus model of an odometer at `depth`.
pub fn model_for(system: &System, depth: u32, word_len: usize) -> Result<FiniteQuotientModel, OracleError> {
    match system {
        System::Odometer { p, dim } => FiniteQuotientModel::odometer(*p, *dim, depth),
        System::Sturmian { slope } if slope.is_rational() => Err(OracleError::Unsupported("rational slope".into())),
        System::Sturmian { slope } if *slope != crate::systems::Slope::golden() => {
            Err(OracleError::Unsupported("word models exist for the golden slope only".into()))
        }
        System::Sturmian { .. } => FiniteQuotientModel::fibonacci(word_len, word_len / 4),
        System::Translation { .. } => Err(OracleError::Unsupported("translation systems have no finite model".into())),
    }
}

/// Compares the chains engine with the naive search on one set; returns the
/// disagreements. Word models compare the first `sample` usable positions.
pub fn compare_components(system: &System, model: &FiniteQuotientModel, b: &ClopenSet, f: &Subset, sample: usize) -> Result<Vec<String>, OracleError> {
    let engine = f_components(system, b, f).map_err(|e| OracleError::Engine(e.to_string()))?;
    let mut bad = Vec::new();
    match model {
        FiniteQuotientModel::Torus { .. } => {
            let naive = naive_components(model, b, f)?;
            let fast: HashMap<String, Option<Vec<Vec<i64>>>> =
                engine.cell_labels().map_err(|e| OracleError::Engine(e.to_string()))?.into_iter().collect();
            if fast.len() != naive.len() {
                bad.push(format!("{} cells vs {} points", fast.len(), naive.len()));
            }
            for l in naive {
                let key = cell_label(&l.point);
                match fast.get(&key) {
                    Some(x) if *x == l.labels => {}
                    Some(x) => bad.push(format!("cell {key}: engine {x:?}, naive {:?}", l.labels)),
                    None => bad.push(format!("cell {key} missing from engine")),
                }
            }
        }
        FiniteQuotientModel::Word { word, margin } => {
            let trimmed = FiniteQuotientModel::Word { word: word[..(2 * margin + sample).min(word.len())].to_vec(), margin: *margin };
            let naive = naive_components(&trimmed, b, f)?;
            match &engine {
                ComponentAutomaton::Empty => {
                    if !naive.is_empty() {
                        bad.push("engine empty, naive not".into());
                    }
                }
                ComponentAutomaton::Sturmian(st) => {
                    let mut used = BTreeSet::new();
                    for l in naive {
                        let x = l.point[0];
                        let a = (x + st.offset) as usize;
                        let cell = &word[a..a + st.window];
                        let hit = st.cells.iter().position(|(e, _)| e.as_slice() == cell);
                        let expect = if st.unbounded { None } else { hit.map(|i| st.cells[i].1.iter().map(|&m| vec![m]).collect()) };
                        if !st.unbounded && hit.is_none() {
                            bad.push(format!("position {x}: cell missing from engine"));
                            continue;
                        }
                        if let Some(i) = hit {
                            used.insert(i);
                        }
                        if expect != l.labels {
                            bad.push(format!("position {x}: engine {expect:?}, naive {:?}", l.labels));
                        }
                    }
                    if !st.unbounded && used.len() != st.cells.len() {
                        bad.push(format!("only {} of {} engine cells sampled", used.len(), st.cells.len()));
                    }
                }
                ComponentAutomaton::Periodic { .. } => bad.push("periodic engine result for a word model".into()),
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asdim::grid_cover;
    use crate::covers::{certify, combine_union, verify_dad_cover, UnionParams};

    fn odo() -> System {
        System::odometer(2, 1)
    }

    fn subset(n: u32, mask: u32) -> ClopenSet {
        let cells: Vec<Vec<i64>> = (0..1i64 << n).filter(|i| mask >> i & 1 == 1).map(|i| vec![i]).collect();
        odo().residue_set(n, &cells).unwrap()
    }

    #[test]
    fn agreement_on_small_odometers() {
        for n in 1..=3u32 {
            let model = FiniteQuotientModel::odometer(2, 1, n).unwrap();
            for mask in 0..1u32 << (1 << n) {
                for k in 0..=2 {
                    let bad = compare_components(&odo(), &model, &subset(n, mask), &Subset::ball(1, k), 0).unwrap();
                    assert!(bad.is_empty(), "n={n} mask={mask:b} k={k}: {bad:?}");
                }
            }
        }
    }

    #[test]
    fn trivial_components() {
        let model = FiniteQuotientModel::odometer(2, 1, 3).unwrap();
        assert!(naive_components(&model, &subset(3, 0), &Subset::ball(1, 1)).unwrap().is_empty());
        let all = naive_components(&model, &subset(3, 0xff), &Subset::ball(1, 0)).unwrap();
        assert!(all.iter().all(|l| l.labels == Some(vec![vec![0]])));
        assert!(FiniteQuotientModel::odometer(2, 1, 20).is_err());
    }

    #[test]
    fn agreement_on_sturmian_windows() {
        let g = System::golden();
        let slope = g.slope().unwrap().clone();
        let model = FiniteQuotientModel::fibonacci(4000, 400).unwrap();
        for len in 1..=4usize {
            let words = crate::systems::admissible_words(&slope, len);
            for mask in 1..1u32 << words.len() {
                let chosen: Vec<String> = words.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| crate::systems::word_string(w)).collect();
                let refs: Vec<&str> = chosen.iter().map(String::as_str).collect();
                let b = g.cylinder(-1, &refs).unwrap();
                for k in 0..=2 {
                    let bad = compare_components(&g, &model, &b, &Subset::ball(1, k), 1500).unwrap();
                    assert!(bad.is_empty(), "{chosen:?} k={k}: {bad:?}");
                }
            }
        }
    }

    #[test]
    fn min_colors() {
        let model = FiniteQuotientModel::odometer(2, 1, 3).unwrap();
        assert_eq!(exhaustive_min_colors(&model, &Subset::ball(1, 1), &Subset::ball(1, 3), 3).unwrap(), Some(2));
        assert_eq!(exhaustive_min_colors(&model, &Subset::ball(1, 1), &Subset::ball(1, 8), 1).unwrap(), None);
        assert_eq!(exhaustive_min_colors(&model, &Subset::ball(1, 0), &Subset::ball(1, 0), 3).unwrap(), Some(1));
        let big = FiniteQuotientModel::odometer(2, 1, 5).unwrap();
        assert!(matches!(exhaustive_min_colors(&big, &Subset::ball(1, 1), &Subset::ball(1, 1), 2), Err(OracleError::SizeGuard(..))));
    }

    #[test]
    fn window_check_matches_verifier() {
        for (d, r) in [(1, 1), (1, 2), (1, 3), (2, 1)] {
            let g = grid_cover(d, r).unwrap();
            assert!(group_cover_window(&g, r, g.bound).unwrap());
            if g.bound > 0 {
                assert!(!group_cover_window(&g, r, g.bound - 1).unwrap());
            }
        }
    }

    #[test]
    fn replays() {
        let s = odo();
        let f = Subset::ball(1, 1);
        let cover = Cover::new(s.clone(), vec![subset(3, 0x0f), subset(3, 0xf0)], f.clone(), Subset::ball(1, 3)).unwrap();
        let cert = verify_dad_cover(&cover).unwrap();
        assert!(replay(&cert).unwrap().ok());
        let mut tampered = cert.clone();
        tampered.witnesses[0].lambda[0] += 1;
        let rep = replay(&tampered).unwrap();
        assert_eq!(rep.mismatches, vec!["root: witness 0 differs".to_string()]);
        let mut gc = verify_group_cover(&grid_cover(1, 2).unwrap(), 2, 2).unwrap();
        assert!(replay(&gc).unwrap().ok());
        gc.verdict = crate::cert::Verdict::Fail;
        assert!(!replay(&gc).unwrap().ok());

        let res = |n: u32, xs: &[i64]| s.residue_set(n, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
        let b = Cover::on(s.clone(), res(6, &[0, 1]), vec![res(6, &[0]), res(6, &[1])], f.clone(), f.clone()).unwrap();
        let blocks: [(i64, i64); 6] = [(2, 11), (12, 21), (22, 31), (32, 41), (42, 51), (52, 63)];
        let color = |c: usize| res(6, &blocks.iter().skip(c).step_by(2).flat_map(|&(a, b)| a..=b).collect::<Vec<_>>());
        let a = Cover::on(s.clone(), res(6, &(2..64).collect::<Vec<_>>()), vec![color(0), color(1)], f.power(5).unwrap(), f.power(7).unwrap()).unwrap();
        let a = certify(a, Default::default()).unwrap();
        let b = certify(b, Default::default()).unwrap();
        let out = combine_union(&a, &b, &f, UnionParams { r_a: 5, big_r_a: 7, r_b: 1, big_r_b: 1 }).unwrap();
        let rep = replay(out.certificate()).unwrap();
        assert!(rep.ok());
        assert_eq!(rep.replayed, 3);
    }
}
