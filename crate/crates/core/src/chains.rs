//! F-chains and F-components of clopen sets, S-boundedness witnesses and
//! F-separation.
//!
//! Periodic sets (odometer residues, translation-system sets) are handled by the
//! lifted torus search in [`crate::lattice`]. For Sturmian cylinder sets a
//! point's component is decided by a window around it: the window is widened
//! until every chain started in it stays well inside, so every cell of the
//! widened window carries its exact label set `Λ`.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::asdim::unroll;
use crate::cert::{cell_label, Certificate, Counterexample, Verdict, Witness};
use crate::group::GroupError;
use crate::lattice::{Components, LatticeError, Steps, TorusSet};
use crate::systems::{admissible_words, word_string, ClopenSet, CylinderSet, RestrictedSystem, Slope, System, SystemError};
use crate::Subset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("step set must be symmetric and contain the identity")]
    NotFs,
    #[error("component structure undecided: {0}")]
    Undecided(String),
    #[error("seed set is not contained in the ambient set")]
    NotContained,
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Largest window half-width tried for Sturmian components.
const MAX_PAD: usize = 1 << 14;

/// F-components of a Sturmian cylinder set, cell by cell.
#[derive(Clone, Debug)]
pub struct SturmianComponents {
    pub slope: Slope,
    pub set: CylinderSet,
    /// Cells are the admissible words on `[offset, offset + window)`.
    pub offset: i64,
    pub window: usize,
    /// Cells of the set with their label sets (offsets `m` with `m·x` in the
    /// same component), sorted by word.
    pub cells: Vec<(Vec<u8>, Vec<i64>)>,
    /// The whole set is a single infinite component.
    pub unbounded: bool,
    steps: Vec<i64>,
    reach: i64,
}

/// F-components of a clopen set.
#[derive(Clone, Debug)]
pub enum ComponentAutomaton {
    Empty,
    Periodic { set: TorusSet, comps: Components, steps: Steps },
    Sturmian(SturmianComponents),
}

/// Per-component outcome of an S-boundedness check.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub components: u64,
    pub witnesses: Vec<Witness>,
    pub counterexample: Option<Counterexample>,
}

fn check_fs(f: &Subset) -> Result<(), ChainError> {
    if !f.is_fs() {
        return Err(ChainError::NotFs);
    }
    Ok(())
}

pub fn f_components(system: &System, b: &ClopenSet, f: &Subset) -> Result<ComponentAutomaton, ChainError> {
    check_fs(f)?;
    if f.dim() != system.dim() {
        return Err(GroupError::DimensionMismatch(system.dim(), f.dim()).into());
    }
    if b.is_empty() {
        return Ok(ComponentAutomaton::Empty);
    }
    system.check_set(b)?;
    match b {
        ClopenSet::Periodic(t) => {
            let steps = Steps::new(f)?;
            let comps = Components::compute(t, &steps)?;
            Ok(ComponentAutomaton::Periodic { set: t.clone(), comps, steps })
        }
        ClopenSet::Cylinder(c) => {
            let slope = system.slope().expect("checked set kind");
            Ok(ComponentAutomaton::Sturmian(sturmian_components(slope, c, f)?))
        }
    }
}

/// Components of `B ∩ Y` in a restricted system. Chains in a subset of `Y`
/// only use steps between points of `Y`, so every step lies in a domain `D_γ`.
pub fn f_components_in(rs: &RestrictedSystem, b: &ClopenSet, f: &Subset) -> Result<ComponentAutomaton, ChainError> {
    if rs.is_empty() {
        return Ok(ComponentAutomaton::Empty);
    }
    let inside = rs.parent.intersection(b, &rs.y)?;
    f_components(&rs.parent, &inside, f)
}

fn sturmian_components(slope: &Slope, set: &CylinderSet, f: &Subset) -> Result<SturmianComponents, ChainError> {
    let steps: Vec<i64> = f.elements()?.iter().map(|e| e.coords()[0]).filter(|&x| x != 0).collect();
    let reach = steps.iter().map(|x| x.abs()).max().unwrap_or(0);
    let l = set.window;
    let mut out = SturmianComponents {
        slope: slope.clone(),
        set: set.clone(),
        offset: set.offset,
        window: l,
        cells: Vec::new(),
        unbounded: false,
        steps: steps.clone(),
        reach,
    };
    if reach == 0 {
        out.cells = set.words.iter().map(|w| (w.bytes().map(|b| b - b'0').collect(), vec![0])).collect();
        return Ok(out);
    }
    let member = |w: &[u8]| set.words.contains(&word_string(w));
    // a run of `reach` consecutive non-members blocks every chain
    let gap_len = reach as usize + l - 1;
    let has_gap = admissible_words(slope, gap_len)
        .iter()
        .any(|g| (0..reach as usize).all(|m| !member(&g[m..m + l])));
    let interval = f.as_ball().is_some() || {
        let s: BTreeSet<i64> = steps.iter().copied().collect();
        (1..=reach).all(|k| s.contains(&k))
    };
    if !has_gap && interval {
        out.unbounded = true;
        out.cells = set.words.iter().map(|w| (w.bytes().map(|b| b - b'0').collect(), Vec::new())).collect();
        return Ok(out);
    }
    let mut pad = (2 * reach) as usize;
    loop {
        let len = l + 2 * pad;
        let words = admissible_words(slope, len);
        let p = pad as i64;
        let mut cells = Vec::new();
        let mut escaped = false;
        for e in words.iter() {
            let mem: Vec<bool> = (0..=2 * pad).map(|i| member(&e[i..i + l])).collect();
            if !mem[pad] {
                continue;
            }
            let mut seen = vec![false; 2 * pad + 1];
            seen[pad] = true;
            let mut queue = VecDeque::from([0i64]);
            let mut labels = vec![0i64];
            while let Some(m) = queue.pop_front() {
                if m.abs() > p - reach {
                    escaped = true;
                    break;
                }
                for &s in &steps {
                    let t = m + s;
                    let idx = (t + p) as usize;
                    if !seen[idx] && mem[idx] {
                        seen[idx] = true;
                        labels.push(t);
                        queue.push_back(t);
                    }
                }
            }
            if escaped {
                break;
            }
            labels.sort_unstable();
            cells.push((e.clone(), labels));
        }
        if !escaped {
            out.offset = set.offset - p;
            out.window = len;
            out.cells = cells;
            return Ok(out);
        }
        pad *= 2;
        if pad > MAX_PAD {
            return Err(ChainError::Undecided(format!(
                "components still growing at window half-width {MAX_PAD}; steps are not an interval and no blocking gap exists"
            )));
        }
    }
}

impl SturmianComponents {
    /// Membership of `m·x` for the point with cell word `e` (extended window).
    fn member_at(&self, e: &[u8], m: i64) -> bool {
        let start = (self.set.offset - self.offset + m) as usize;
        self.set.words.contains(&word_string(&e[start..start + self.set.window]))
    }

    /// A chain inside the set, as offsets from its first point, spanning more
    /// than `span`; used as the witness of an infinite component.
    fn long_chain(&self, span: i64) -> (String, Vec<Vec<i64>>) {
        let n = (4 * (span + self.reach) + 8 * self.set.window as i64 + 64) as usize;
        let w = self.slope.characteristic(n);
        let l = self.set.window;
        let mem: Vec<bool> = (0..=w.len() - l).map(|i| self.set.words.contains(&word_string(&w[i..i + l]))).collect();
        let start = mem.iter().position(|&b| b).expect("nonempty set");
        let mut chain = vec![vec![0i64]];
        let mut cur = start;
        while (cur - start) as i64 <= span {
            let next = (1..=self.reach as usize).rev().map(|k| cur + k).find(|&i| i < mem.len() && mem[i]);
            match next {
                Some(i) => {
                    cur = i;
                    chain.push(vec![(cur - start) as i64]);
                }
                None => break,
            }
        }
        let hi = (cur + l).min(w.len());
        (format!("@{}:{}", self.set.offset, word_string(&w[start..hi])), chain)
    }
}

impl ComponentAutomaton {
    pub fn is_empty(&self) -> bool {
        matches!(self, ComponentAutomaton::Empty)
    }

    /// Whether some component is infinite.
    pub fn is_unbounded(&self) -> bool {
        match self {
            ComponentAutomaton::Empty => false,
            ComponentAutomaton::Periodic { comps, .. } => comps.components().iter().any(|c| c.period.is_some()),
            ComponentAutomaton::Sturmian(s) => s.unbounded,
        }
    }

    /// Number of components (for Sturmian sets: number of cells examined).
    pub fn component_count(&self) -> usize {
        match self {
            ComponentAutomaton::Empty => 0,
            ComponentAutomaton::Periodic { comps, .. } => comps.len(),
            ComponentAutomaton::Sturmian(s) => s.cells.len(),
        }
    }

    /// Every cell with its label set `Λ`; `None` marks an infinite component.
    pub fn cell_labels(&self) -> Result<Vec<(String, Option<Vec<Vec<i64>>>)>, ChainError> {
        match self {
            ComponentAutomaton::Empty => Ok(Vec::new()),
            ComponentAutomaton::Periodic { set, comps, .. } => {
                let mut out = Vec::new();
                let mut cache: Vec<Option<Vec<Vec<i64>>>> = vec![None; comps.len()];
                for cell in set.cells() {
                    let c = comps.component_of_cell(&cell).expect("cell of the set");
                    if comps.component(c).period.is_some() {
                        out.push((cell_label(&cell), None));
                        continue;
                    }
                    if cache[c].is_none() {
                        cache[c] = Some(comps.points(c)?);
                    }
                    let run = comps.run_of(&cell).expect("cell of the set");
                    let here = comps.lifted(run, cell[0]);
                    let mut labels: Vec<Vec<i64>> = cache[c]
                        .as_ref()
                        .expect("filled")
                        .iter()
                        .map(|p| p.iter().zip(&here).map(|(a, b)| a - b).collect())
                        .collect();
                    labels.sort();
                    out.push((cell_label(&cell), Some(labels)));
                }
                Ok(out)
            }
            ComponentAutomaton::Sturmian(s) => Ok(s
                .cells
                .iter()
                .map(|(w, labels)| {
                    let name = format!("@{}:{}", s.offset, word_string(w));
                    if s.unbounded {
                        (name, None)
                    } else {
                        (name, Some(labels.iter().map(|&m| vec![m]).collect()))
                    }
                })
                .collect()),
        }
    }

    /// Checks every component against `S`, collecting per-component witnesses
    /// when asked; stops at the first failure.
    pub fn check_bounded(&self, s: &Subset, color: usize, collect: bool) -> Result<BoundReport, ChainError> {
        let mut report = BoundReport { components: 0, witnesses: Vec::new(), counterexample: None };
        match self {
            ComponentAutomaton::Empty => Ok(report),
            ComponentAutomaton::Periodic { comps, steps, .. } => {
                let span = s.diam().map(|d| d as i64).unwrap_or(0);
                for c in 0..comps.len() {
                    report.components += 1;
                    match comps.fit_explicit(c, s)? {
                        Some(mu) => {
                            if collect {
                                let base = comps.base_point(c);
                                report.witnesses.push(Witness {
                                    color,
                                    base: cell_label(&comps.base_cell(c)),
                                    lambda: mu.iter().zip(&base).map(|(a, b)| a - b).collect(),
                                    cells: comps.component(c).cells,
                                });
                            }
                        }
                        None => {
                            let (reason, chain) = if comps.component(c).period.is_some() {
                                ("infinite component".to_string(), unroll(&comps.chain(c, steps, &[]), span + 1))
                            } else {
                                let ext = comps.extreme_points(c);
                                ("component fits in no translate of S".to_string(), comps.chain(c, steps, &ext))
                            };
                            report.counterexample = Some(offsets_from_start(color, reason, &chain, comps.moduli()));
                            return Ok(report);
                        }
                    }
                }
                Ok(report)
            }
            ComponentAutomaton::Sturmian(st) => {
                if st.unbounded {
                    report.components = 1;
                    let span = s.diam().map(|d| d as i64).unwrap_or(0);
                    let (start, chain) = st.long_chain(span);
                    report.counterexample =
                        Some(Counterexample { color: Some(color), reason: "infinite component".into(), start, chain });
                    return Ok(report);
                }
                for (w, labels) in &st.cells {
                    report.components += 1;
                    match fit_1d(labels, s)? {
                        Some(lambda) => {
                            if collect {
                                report.witnesses.push(Witness {
                                    color,
                                    base: format!("@{}:{}", st.offset, word_string(w)),
                                    lambda: vec![lambda],
                                    cells: labels.len() as u64,
                                });
                            }
                        }
                        None => {
                            let lo = *labels.first().expect("nonempty");
                            let hi = *labels.last().expect("nonempty");
                            let chain = path_1d(labels, &st.steps, lo, hi);
                            report.counterexample = Some(Counterexample {
                                color: Some(color),
                                reason: "component fits in no translate of S".into(),
                                start: format!("@{}:{}", st.offset - lo, word_string(w)),
                                chain: chain.into_iter().map(|m| vec![m - lo]).collect(),
                            });
                            return Ok(report);
                        }
                    }
                }
                Ok(report)
            }
        }
    }
}

/// `λ` with `labels - λ ⊆ S` for a one-dimensional `S`.
fn fit_1d(labels: &[i64], s: &Subset) -> Result<Option<i64>, ChainError> {
    let lo = *labels.first().expect("nonempty");
    let hi = *labels.last().expect("nonempty");
    if let Some(r) = s.as_ball() {
        let r = r as i64;
        return Ok((hi - lo <= 2 * r).then_some(lo + (hi - lo) / 2));
    }
    for e in s.elements()? {
        let lambda = lo - e.coords()[0];
        if labels.iter().all(|&m| s.contains_coords(&[m - lambda])) {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

/// Chain from `a` to `b` through the given label set using the steps.
fn path_1d(labels: &[i64], steps: &[i64], a: i64, b: i64) -> Vec<i64> {
    let set: BTreeSet<i64> = labels.iter().copied().collect();
    let mut prev = std::collections::HashMap::new();
    prev.insert(a, a);
    let mut queue = VecDeque::from([a]);
    while let Some(m) = queue.pop_front() {
        if m == b {
            break;
        }
        for &s in steps {
            let t = m + s;
            if set.contains(&t) && !prev.contains_key(&t) {
                prev.insert(t, m);
                queue.push_back(t);
            }
        }
    }
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = prev[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

fn offsets_from_start(color: usize, reason: String, chain: &[Vec<i64>], moduli: &[i64]) -> Counterexample {
    let p0 = chain[0].clone();
    let cell: Vec<i64> = p0.iter().zip(moduli).map(|(a, m)| a.rem_euclid(*m)).collect();
    Counterexample {
        color: Some(color),
        reason,
        start: cell_label(&cell),
        chain: chain.iter().map(|p| p.iter().zip(&p0).map(|(a, b)| a - b).collect()).collect(),
    }
}

/// Whether every F-component is S-bounded, with a witness `λ` per component.
pub fn is_s_bounded(comp: &ComponentAutomaton, s: &Subset) -> Result<Certificate, ChainError> {
    let report = comp.check_bounded(s, 0, true)?;
    let mut cert = Certificate::new("s-bounded", Verdict::Pass).param("S", s);
    cert.components = report.components;
    cert.witnesses = report.witnesses;
    if let Some(cx) = report.counterexample {
        cert = cert.fail_with(cx);
    }
    Ok(cert)
}

/// Pass iff no F-chain in `A ∪ B` joins a point of `A` to a point of `B`.
pub fn f_separated(system: &System, a: &ClopenSet, b: &ClopenSet, f: &Subset) -> Result<Certificate, ChainError> {
    let cert = Certificate::new("separated", Verdict::Pass).param("F", f);
    if a.is_empty() || b.is_empty() {
        return Ok(cert);
    }
    let (a, b) = system.common(a, b)?;
    let union = system.union(&a, &b)?;
    match f_components(system, &union, f)? {
        ComponentAutomaton::Empty => Ok(cert),
        ComponentAutomaton::Periodic { comps, steps, .. } => {
            let (ta, tb) = (a.as_periodic().expect("periodic"), b.as_periodic().expect("periodic"));
            let mut in_a: Vec<Option<Vec<i64>>> = vec![None; comps.len()];
            let mut in_b: Vec<Option<Vec<i64>>> = vec![None; comps.len()];
            for (set, marks) in [(ta, &mut in_a), (tb, &mut in_b)] {
                for (r, runs) in set.rows().iter().enumerate() {
                    let rest = set.row_coords(r);
                    for &(lo, _) in runs {
                        let mut cell = vec![lo];
                        cell.extend(&rest);
                        let run = comps.run_of(&cell).expect("subset of the union");
                        let c = comps.component_of_run(run);
                        if marks[c].is_none() {
                            marks[c] = Some(comps.lifted(run, lo));
                        }
                    }
                }
            }
            for c in 0..comps.len() {
                if let (Some(pa), Some(pb)) = (&in_a[c], &in_b[c]) {
                    let chain = comps.chain(c, &steps, &[pa.clone(), pb.clone()]);
                    // keep the part from the A point onwards
                    let from = chain.iter().position(|p| p == pa).unwrap_or(0);
                    let cx = offsets_from_start(0, "chain from A to B".into(), &chain[from..], comps.moduli());
                    return Ok(cert.fail_with(cx));
                }
            }
            Ok(cert)
        }
        ComponentAutomaton::Sturmian(st) => {
            let (ca, cb) = (a.as_cylinder().expect("cylinder"), b.as_cylinder().expect("cylinder"));
            if st.unbounded {
                return Ok(cert.fail_with(Counterexample {
                    color: None,
                    reason: "A ∪ B is a single infinite component".into(),
                    start: String::new(),
                    chain: vec![],
                }));
            }
            let start_of = |c: &CylinderSet| (c.offset - st.offset) as usize;
            for (e, labels) in &st.cells {
                let at = |c: &CylinderSet, m: i64| {
                    let s = (start_of(c) as i64 + m) as usize;
                    c.words.contains(&word_string(&e[s..s + c.window]))
                };
                if at(ca, 0) {
                    if let Some(&m) = labels.iter().find(|&&m| at(cb, m)) {
                        let path = path_1d(labels, &st.steps, 0, m);
                        return Ok(cert.fail_with(Counterexample {
                            color: None,
                            reason: "chain from A to B".into(),
                            start: format!("@{}:{}", st.offset, word_string(e)),
                            chain: path.into_iter().map(|x| vec![x]).collect(),
                        }));
                    }
                }
            }
            Ok(cert)
        }
    }
}

/// Smallest subset of `V` containing `B` and closed under F-steps inside `V`.
pub fn component_of_in(system: &System, b: &ClopenSet, v: &ClopenSet, f: &Subset) -> Result<ClopenSet, ChainError> {
    if !system.is_subset(b, v)? {
        return Err(ChainError::NotContained);
    }
    if b.is_empty() {
        return Ok(b.clone());
    }
    let (b, v) = system.common(b, v)?;
    match f_components(system, &v, f)? {
        ComponentAutomaton::Empty => Ok(v),
        ComponentAutomaton::Periodic { set, comps, .. } => {
            let tb = b.as_periodic().expect("periodic");
            let mut keep = vec![false; comps.len()];
            for (r, runs) in tb.rows().iter().enumerate() {
                let rest = tb.row_coords(r);
                for &(lo, _) in runs {
                    let mut cell = vec![lo];
                    cell.extend(&rest);
                    keep[comps.component_of_cell(&cell).expect("B inside V")] = true;
                }
            }
            let mut rows = vec![Vec::new(); set.num_rows()];
            for i in 0..comps.run_count() {
                if keep[comps.component_of_run(i)] {
                    let (rest, lo, hi) = comps.run(i);
                    rows[set.row_index(&rest)].push((lo, hi));
                }
            }
            Ok(ClopenSet::Periodic(TorusSet::from_rows(set.moduli().to_vec(), rows)?))
        }
        ComponentAutomaton::Sturmian(st) => {
            if st.unbounded {
                return Ok(v);
            }
            let cb = b.as_cylinder().expect("cylinder");
            let start = (cb.offset - st.offset) as usize;
            let words = st
                .cells
                .iter()
                .filter(|(e, labels)| {
                    labels.iter().any(|&m| {
                        let s = (start as i64 + m) as usize;
                        cb.words.contains(&word_string(&e[s..s + cb.window]))
                    })
                })
                .map(|(e, _)| word_string(e))
                .collect();
            Ok(ClopenSet::Cylinder(CylinderSet { offset: st.offset, window: st.window, words }))
        }
    }
}

impl SturmianComponents {
    /// Label of each cell relative to the leftmost point of its component.
    pub fn leftmost_labels(&self) -> impl Iterator<Item = (&Vec<u8>, i64)> {
        self.cells.iter().map(|(w, labels)| (w, -labels[0]))
    }

    /// Membership of `m·x` in the set for a cell word, `|m|` within the window.
    pub fn member(&self, e: &[u8], m: i64) -> bool {
        self.member_at(e, m)
    }
}
