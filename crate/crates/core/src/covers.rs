//! (d, F, S)-covers of dynamical systems: verification, the union combiner,
//! restriction, orbit transport and the zero-dimensional tower pipeline.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::asdim::{control_function, gamma_action_cover, AsdimError, GroupCover};
use crate::cert::{cell_label, Certificate, Counterexample, Verdict};
use crate::chains::{f_components, f_separated, ChainError, ComponentAutomaton};
use crate::group::GroupError;
use crate::lattice::{LatticeError, Run, TorusSet};
use crate::systems::{admissible_words, word_string, ClopenSet, CylinderSet, System, SystemError};
use crate::Subset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("cover has no colors")]
    NoColors,
    #[error("{0} must be symmetric and contain the identity")]
    NotFs(&'static str),
    #[error("dimension mismatch: system has dimension {0}, got {1}")]
    DimensionMismatch(usize, usize),
    #[error("color counts differ: {0} vs {1}")]
    ColorCount(usize, usize),
    #[error("covers live on different systems")]
    SystemMismatch,
    #[error("union hypothesis 2*R_B + 2*r_B < r_A fails: 2*{big_r_b} + 2*{r_b} >= {r_a}")]
    SideCondition { r_a: u64, r_b: u64, big_r_b: u64 },
    #[error("scale parameters must be positive")]
    ZeroScale,
    #[error("{0} cover is not verified at the required parameters")]
    Unverified(&'static str),
    #[error("verification failed ({})", .0.kind)]
    Rejected(Box<Certificate>),
    #[error("orbit transport needs a cover of the whole space")]
    Restricted,
    #[error("{0}")]
    Pipeline(String),
    #[error("too many fibers to list ({0})")]
    TooLarge(u128),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Asdim(#[from] AsdimError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Colors of a dynamical system (or of the subsystem on `restriction`) with
/// claimed step set `f` and bound `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub system: System,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<ClopenSet>,
    pub colors: Vec<ClopenSet>,
    pub f: Subset,
    pub s: Subset,
}

impl Cover {
    pub fn new(system: System, colors: Vec<ClopenSet>, f: Subset, s: Subset) -> Result<Self, CoverError> {
        let cover = Cover { system, restriction: None, colors, f, s };
        cover.validate()?;
        Ok(cover)
    }

    pub fn on(system: System, y: ClopenSet, colors: Vec<ClopenSet>, f: Subset, s: Subset) -> Result<Self, CoverError> {
        let cover = Cover { system, restriction: Some(y), colors, f, s };
        cover.validate()?;
        Ok(cover)
    }

    /// The set being covered.
    pub fn space(&self) -> ClopenSet {
        self.restriction.clone().unwrap_or_else(|| self.system.full())
    }

    pub fn color_count(&self) -> usize {
        self.colors.len()
    }

    pub fn validate(&self) -> Result<(), CoverError> {
        self.system.validate()?;
        let dim = self.system.dim();
        if self.colors.is_empty() {
            return Err(CoverError::NoColors);
        }
        for set in self.colors.iter().chain(self.restriction.iter()) {
            self.system.check_set(set)?;
        }
        for sub in [&self.f, &self.s] {
            if sub.dim() != dim {
                return Err(CoverError::DimensionMismatch(dim, sub.dim()));
            }
        }
        if !self.f.is_fs() {
            return Err(CoverError::NotFs("F"));
        }
        if !self.s.is_fs() {
            return Err(CoverError::NotFs("S"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Record a witness `λ` for every component.
    pub witnesses: bool,
    /// Embed the cover in the certificate so it can be replayed.
    pub embed_input: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { witnesses: true, embed_input: true }
    }
}

impl VerifyOptions {
    /// For intermediate covers whose certificates only feed provenance.
    pub fn compact() -> Self {
        Self { witnesses: false, embed_input: false }
    }
}

/// A cover together with the pass certificate that vouches for it. Only the
/// verifier constructs these.
#[derive(Clone, Debug)]
pub struct VerifiedCover {
    cover: Cover,
    cert: Certificate,
}

impl VerifiedCover {
    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn certificate(&self) -> &Certificate {
        &self.cert
    }

    pub fn into_parts(self) -> (Cover, Certificate) {
        (self.cover, self.cert)
    }
}

fn model_name(system: &System) -> &'static str {
    match system {
        System::Odometer { .. } => "odometer",
        System::Sturmian { .. } => "sturmian",
        System::Translation { .. } => "translation",
    }
}

fn resolution(set: &ClopenSet) -> Value {
    match set {
        ClopenSet::Periodic(t) => serde_json::json!({ "moduli": t.moduli() }),
        ClopenSet::Cylinder(c) => serde_json::json!({ "offset": c.offset, "window": c.window }),
    }
}

/// Descriptor of some cell of a nonempty set.
fn some_cell(set: &ClopenSet) -> String {
    match set {
        ClopenSet::Periodic(t) => t.cells().next().map(|c| cell_label(&c)).unwrap_or_default(),
        ClopenSet::Cylinder(c) => c.words.iter().next().map(|w| format!("@{}:{}", c.offset, w)).unwrap_or_default(),
    }
}

pub fn verify_dad_cover(cover: &Cover) -> Result<Certificate, CoverError> {
    verify_with(cover, VerifyOptions::default())
}

/// Checks that the colors cover the space and that the F-components of every
/// color (inside the space) are S-bounded.
pub fn verify_with(cover: &Cover, opts: VerifyOptions) -> Result<Certificate, CoverError> {
    cover.validate()?;
    let sys = &cover.system;
    let space = cover.space();
    let mut cert = Certificate::new("dad-cover", Verdict::Pass)
        .param("model", model_name(sys))
        .param("d", cover.colors.len() - 1)
        .param("F", &cover.f)
        .param("S", &cover.s)
        .param("resolution", cover.colors.iter().map(resolution).collect::<Vec<_>>())
        .param("witnesses", opts.witnesses);
    if cover.restriction.is_some() {
        cert = cert.param("restricted", true);
    }
    if opts.embed_input {
        cert.input = Some(serde_json::to_value(cover).expect("cover serializes"));
    }
    let mut union = sys.empty();
    for c in &cover.colors {
        union = sys.union(&union, c)?;
    }
    let missing = sys.difference(&space, &union)?;
    if !missing.is_empty() {
        return Ok(cert.fail_with(Counterexample {
            color: None,
            reason: "uncovered point".into(),
            start: some_cell(&missing),
            chain: vec![vec![0; sys.dim()]],
        }));
    }
    for (i, color) in cover.colors.iter().enumerate() {
        let part = sys.intersection(color, &space)?;
        let comps = f_components(sys, &part, &cover.f)?;
        let report = comps.check_bounded(&cover.s, i, opts.witnesses)?;
        cert.components += report.components;
        cert.witnesses.extend(report.witnesses);
        if let Some(cx) = report.counterexample {
            return Ok(cert.fail_with(cx));
        }
    }
    if !opts.witnesses {
        cert = cert.note("per-component witnesses omitted");
    }
    Ok(cert)
}

/// Verifies and wraps a cover; a failing verdict comes back as `Rejected`.
pub fn certify(cover: Cover, opts: VerifyOptions) -> Result<VerifiedCover, CoverError> {
    let cert = verify_with(&cover, opts)?;
    if !cert.passed() {
        return Err(CoverError::Rejected(Box::new(cert)));
    }
    Ok(VerifiedCover { cover, cert })
}

/// Exponents for the union combination: A verified at `(F^r_a, F^R_a)`, B at
/// `(F^r_b, F^R_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionParams {
    pub r_a: u64,
    pub big_r_a: u64,
    pub r_b: u64,
    pub big_r_b: u64,
}

impl UnionParams {
    pub fn side_condition(&self) -> bool {
        2 * self.big_r_b + 2 * self.r_b < self.r_a
    }
}

fn verified_at(v: &VerifiedCover, f: &Subset, r: u64, big_r: u64) -> Result<bool, CoverError> {
    Ok(f.power(r)?.is_subset(&v.cover.f)? && v.cover.s.is_subset(&f.power(big_r)?)?)
}

pub fn combine_union(a: &VerifiedCover, b: &VerifiedCover, f: &Subset, p: UnionParams) -> Result<VerifiedCover, CoverError> {
    combine_union_with(a, b, f, p, VerifyOptions::default())
}

/// Colorwise union of a cover of `A` and a cover of `B`; the result is a cover
/// of `A ∪ B` claimed at `(F^r_b, F^(r_a + R_a))` and re-verified.
pub fn combine_union_with(
    a: &VerifiedCover,
    b: &VerifiedCover,
    f: &Subset,
    p: UnionParams,
    opts: VerifyOptions,
) -> Result<VerifiedCover, CoverError> {
    if !f.is_fs() {
        return Err(CoverError::NotFs("F"));
    }
    if [p.r_a, p.big_r_a, p.r_b, p.big_r_b].contains(&0) {
        return Err(CoverError::ZeroScale);
    }
    if !p.side_condition() {
        return Err(CoverError::SideCondition { r_a: p.r_a, r_b: p.r_b, big_r_b: p.big_r_b });
    }
    let (ca, cb) = (&a.cover, &b.cover);
    if ca.system != cb.system {
        return Err(CoverError::SystemMismatch);
    }
    if ca.colors.len() != cb.colors.len() {
        return Err(CoverError::ColorCount(ca.colors.len(), cb.colors.len()));
    }
    if !verified_at(a, f, p.r_a, p.big_r_a)? {
        return Err(CoverError::Unverified("A"));
    }
    if !verified_at(b, f, p.r_b, p.big_r_b)? {
        return Err(CoverError::Unverified("B"));
    }
    let sys = &ca.system;
    let restriction = match (&ca.restriction, &cb.restriction) {
        (Some(x), Some(y)) => {
            let u = sys.union(x, y)?;
            (!sys.same_set(&u, &sys.full())?).then_some(u)
        }
        _ => None,
    };
    let colors = ca.colors.iter().zip(&cb.colors).map(|(x, y)| sys.union(x, y)).collect::<Result<Vec<_>, _>>()?;
    let cover = Cover {
        system: sys.clone(),
        restriction,
        colors,
        f: f.power(p.r_b)?,
        s: f.power(p.r_a + p.big_r_a)?,
    };
    let mut cert = verify_with(&cover, opts)?
        .param("union", p)
        .param("unit", f);
    cert.provenance = vec![a.cert.clone(), b.cert.clone()];
    if !cert.passed() {
        return Err(CoverError::Rejected(Box::new(cert)));
    }
    Ok(VerifiedCover { cover, cert })
}

/// `𝒟(F)`: the ball of radius `control_function(dim, diam F)`, enlarged to
/// contain `F`.
pub fn control_set(f: &Subset) -> Result<Subset, CoverError> {
    let dim = f.dim();
    let diam = f.diam()?;
    let rad = f.radius().unwrap_or(0);
    if diam == 0 {
        return Ok(Subset::ball(dim, 0));
    }
    Ok(Subset::ball(dim, control_function(dim, diam)?.max(rad)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub f: Vec<Subset>,
    pub g: Vec<Subset>,
}

impl ScaleSchedule {
    pub fn d(&self) -> usize {
        self.f.len() - 1
    }

    /// Radii of `F_i`, `𝒟(F_i)` and `G_i`.
    pub fn radii(&self) -> Result<Vec<(u64, u64, u64)>, CoverError> {
        self.f
            .iter()
            .zip(&self.g)
            .map(|(f, g)| Ok((f.radius().unwrap_or(0), control_set(f)?.radius().unwrap_or(0), g.radius().unwrap_or(0))))
            .collect()
    }
}

/// `G_0 = 𝒟(F_0)`, `F_i = G_(i-1)^4`, `G_i = 𝒟(F_i)^2`.
pub fn scale_schedule(d: usize, f0: &Subset) -> Result<ScaleSchedule, CoverError> {
    if !f0.is_fs() {
        return Err(CoverError::NotFs("F_0"));
    }
    let mut f = vec![f0.clone()];
    let mut g = vec![control_set(f0)?];
    for i in 1..=d {
        let fi = g[i - 1].power(4)?;
        g.push(control_set(&fi)?.power(2)?);
        f.push(fi);
    }
    Ok(ScaleSchedule { f, g })
}

/// A piece of a tower whose labels run along axis 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    /// Cells `lo..=hi` of the row with coordinates `rest`; cell `lo` has label
    /// `label` and the labels of the others follow along axis 0.
    Run { rest: Vec<i64>, lo: i64, hi: i64, label: Vec<i64> },
    /// The fiber `label·[base]` of a Sturmian tower.
    Shift { label: i64, set: CylinderSet },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub base: String,
    pub pieces: Vec<Piece>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerDecomposition {
    pub system: System,
    pub color: usize,
    pub f: Subset,
    pub s: Subset,
    /// Torus moduli for periodic sets.
    pub moduli: Option<Vec<i64>>,
    pub towers: Vec<Tower>,
}

impl TowerDecomposition {
    /// The tower `D^k` as a clopen set.
    pub fn tower_set(&self, k: usize) -> Result<ClopenSet, CoverError> {
        self.pieces_set(&self.towers[k].pieces)
    }

    fn pieces_set(&self, pieces: &[Piece]) -> Result<ClopenSet, CoverError> {
        match &self.moduli {
            Some(m) => {
                let probe = TorusSet::empty(m.clone())?;
                let mut rows: Vec<Vec<Run>> = vec![Vec::new(); probe.num_rows()];
                for p in pieces {
                    if let Piece::Run { rest, lo, hi, .. } = p {
                        rows[probe.row_index(rest)].push((*lo, *hi));
                    }
                }
                Ok(ClopenSet::Periodic(TorusSet::from_rows(m.clone(), rows)?))
            }
            None => {
                let mut acc = self.system.empty();
                for p in pieces {
                    if let Piece::Shift { set, .. } = p {
                        acc = self.system.union(&acc, &ClopenSet::Cylinder(set.clone()))?;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Union of all towers.
    pub fn union(&self) -> Result<ClopenSet, CoverError> {
        let all: Vec<Piece> = self.towers.iter().flat_map(|t| t.pieces.iter().cloned()).collect();
        self.pieces_set(&all)
    }

    /// Fibers `E^(k,s)` of tower `k` with their labels.
    pub fn fibers(&self, k: usize) -> Result<Vec<(Vec<i64>, ClopenSet)>, CoverError> {
        const LIMIT: u128 = 1 << 20;
        let mut out = Vec::new();
        for p in &self.towers[k].pieces {
            match p {
                Piece::Run { rest, lo, hi, label } => {
                    if out.len() as u128 + (hi - lo + 1) as u128 > LIMIT {
                        return Err(CoverError::TooLarge(LIMIT));
                    }
                    let m = self.moduli.as_ref().expect("periodic tower");
                    for x in *lo..=*hi {
                        let mut cell = vec![x];
                        cell.extend(rest);
                        let mut l = label.clone();
                        l[0] += x - lo;
                        out.push((l, ClopenSet::Periodic(TorusSet::from_cells(m.clone(), [cell])?)));
                    }
                }
                Piece::Shift { label, set } => out.push((vec![*label], ClopenSet::Cylinder(set.clone()))),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// Pairwise disjointness and F-separation of the towers.
    pub fn check_separated(&self) -> Result<bool, CoverError> {
        let sets = (0..self.towers.len()).map(|k| self.tower_set(k)).collect::<Result<Vec<_>, _>>()?;
        for j in 0..sets.len() {
            for k in j + 1..sets.len() {
                if !self.system.intersection(&sets[j], &sets[k])?.is_empty() {
                    return Ok(false);
                }
                if !f_separated(&self.system, &sets[j], &sets[k], &self.f)?.passed() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Splits `U` into towers: one per F-component (periodic sets) or one per
/// base cylinder of leftmost points (Sturmian sets), each with fibers indexed
/// by the offset from the base.
pub fn tower_decomposition(system: &System, u: &ClopenSet, f: &Subset, s: &Subset) -> Result<TowerDecomposition, CoverError> {
    let comps = f_components(system, u, f)?;
    let report = comps.check_bounded(s, 0, false)?;
    if let Some(cx) = report.counterexample {
        let cert = Certificate::new("s-bounded", Verdict::Pass).param("F", f).param("S", s).fail_with(cx);
        return Err(CoverError::Rejected(Box::new(cert)));
    }
    let mut td = TowerDecomposition {
        system: system.clone(),
        color: 0,
        f: f.clone(),
        s: s.clone(),
        moduli: None,
        towers: Vec::new(),
    };
    match comps {
        ComponentAutomaton::Empty => {
            if let ClopenSet::Periodic(t) = u {
                td.moduli = Some(t.moduli().to_vec());
            }
        }
        ComponentAutomaton::Periodic { set, comps, .. } => {
            td.moduli = Some(set.moduli().to_vec());
            let mut towers: Vec<Tower> = (0..comps.len())
                .map(|c| Tower { base: cell_label(&comps.base_cell(c)), pieces: Vec::new() })
                .collect();
            for (i, label) in comps.run_labels() {
                let (rest, lo, hi) = comps.run(i);
                towers[comps.component_of_run(i)].pieces.push(Piece::Run { rest, lo, hi, label });
            }
            td.towers = towers;
        }
        ComponentAutomaton::Sturmian(st) => {
            for (e, labels) in &st.cells {
                if labels[0] != 0 {
                    continue;
                }
                let word = word_string(e);
                let pieces = labels
                    .iter()
                    .map(|&m| Piece::Shift {
                        label: m,
                        set: CylinderSet { offset: st.offset - m, window: st.window, words: BTreeSet::from([word.clone()]) },
                    })
                    .collect();
                td.towers.push(Tower { base: format!("@{}:{}", st.offset, word), pieces });
            }
        }
    }
    Ok(td)
}

/// Colors the given towers by pulling back a cover of the translation system
/// through the labels: a point with label `s` gets the color of `s`.
fn pull_back(td: &TowerDecomposition, towers: &[usize], gcov: &Cover) -> Result<Cover, CoverError> {
    let dim = td.system.dim();
    if !matches!(gcov.system, System::Translation { .. }) || gcov.system.dim() != dim {
        return Err(CoverError::SystemMismatch);
    }
    let tori: Vec<TorusSet> = gcov
        .colors
        .iter()
        .map(|c| c.as_periodic().cloned().ok_or(CoverError::SystemMismatch))
        .collect::<Result<_, _>>()?;
    let (tori, _) = common_tori(tori)?;
    let group = GroupCover::new(dim, 0, 0, tori)?;
    let k = gcov.colors.len();
    let pieces: Vec<Piece> = towers.iter().flat_map(|&t| td.towers[t].pieces.iter().cloned()).collect();
    let restriction = td.pieces_set(&pieces)?;
    let colors = match &td.moduli {
        Some(m) => {
            let probe = TorusSet::empty(m.clone())?;
            let mut rows: Vec<Vec<Vec<Run>>> = vec![vec![Vec::new(); probe.num_rows()]; k];
            for p in &pieces {
                if let Piece::Run { rest, lo, hi, label } = p {
                    let r = probe.row_index(rest);
                    for (a, b, c) in group.color_segments(&label[1..], label[0], label[0] + hi - lo) {
                        rows[c][r].push((lo + a - label[0], lo + b - label[0]));
                    }
                }
            }
            rows.into_iter()
                .map(|r| Ok(ClopenSet::Periodic(TorusSet::from_rows(m.clone(), r)?)))
                .collect::<Result<Vec<_>, CoverError>>()?
        }
        None => {
            let mut by_color: Vec<Vec<CylinderSet>> = vec![Vec::new(); k];
            for p in &pieces {
                if let Piece::Shift { label, set } = p {
                    let c = group.color_of(&[*label]).ok_or_else(|| CoverError::Pipeline(format!("label {label} is not colored")))?;
                    by_color[c].push(set.clone());
                }
            }
            by_color
                .into_iter()
                .map(|sets| union_cylinders(&td.system, sets))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(Cover { system: td.system.clone(), restriction: Some(restriction), colors, f: gcov.f.clone(), s: gcov.s.clone() })
}

fn common_tori(tori: Vec<TorusSet>) -> Result<(Vec<TorusSet>, Vec<i64>), CoverError> {
    let mut m = tori[0].moduli().to_vec();
    for t in &tori[1..] {
        m = m.iter().zip(t.moduli()).map(|(a, b)| crate::lattice::lcm(*a, *b)).collect();
    }
    let out = tori.iter().map(|t| t.refine(&m)).collect::<Result<Vec<_>, _>>()?;
    Ok((out, m))
}

/// Union of cylinders, refined once to their common window.
fn union_cylinders(system: &System, sets: Vec<CylinderSet>) -> Result<ClopenSet, CoverError> {
    if sets.is_empty() {
        return Ok(system.empty());
    }
    let slope = system.slope().ok_or(CoverError::SystemMismatch)?;
    let lo = sets.iter().map(|c| c.offset).min().expect("nonempty");
    let hi = sets.iter().map(|c| c.end()).max().expect("nonempty");
    let mut words = BTreeSet::new();
    for c in &sets {
        words.extend(c.refine_to(slope, lo, hi)?.words);
    }
    let set = CylinderSet { offset: lo, window: (hi - lo) as usize, words };
    Ok(ClopenSet::Cylinder(set.normalize(slope)))
}

/// Cover of tower `k` pulled back from `gcov`.
pub fn cover_tower(td: &TowerDecomposition, k: usize, gcov: &Cover) -> Result<Cover, CoverError> {
    pull_back(td, &[k], gcov)
}

/// All towers of the decomposition colored at once; the towers are
/// F-separated, so this is a cover of their union.
pub fn cover_towers(td: &TowerDecomposition, gcov: &Cover) -> Result<Cover, CoverError> {
    let all: Vec<usize> = (0..td.towers.len()).collect();
    pull_back(td, &all, gcov)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Witnesses in the final certificate.
    pub witnesses: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { witnesses: true }
    }
}

pub fn reduce_cover(cov: &VerifiedCover, f0: &Subset) -> Result<VerifiedCover, CoverError> {
    reduce_cover_with(cov, f0, PipelineOptions::default())
}

/// Turns a verified cover with `d + 1` colors at `(F_d, S)` into a verified
/// cover with `dim + 1` colors at `(F_0, G_d)`.
pub fn reduce_cover_with(cov: &VerifiedCover, f0: &Subset, opts: PipelineOptions) -> Result<VerifiedCover, CoverError> {
    let input = &cov.cover;
    let sys = &input.system;
    let dim = sys.dim();
    if f0.dim() != dim {
        return Err(CoverError::DimensionMismatch(dim, f0.dim()));
    }
    if !f0.is_fs() {
        return Err(CoverError::NotFs("F_0"));
    }
    let final_opts = VerifyOptions { witnesses: opts.witnesses, embed_input: true };
    let space = input.space();
    let rho0 = f0.radius().unwrap_or(0);
    if rho0 == 0 {
        let mut colors = vec![space.clone()];
        colors.extend((0..dim).map(|_| sys.empty()));
        let out = Cover { system: sys.clone(), restriction: input.restriction.clone(), colors, f: f0.clone(), s: Subset::ball(dim, 0) };
        let mut v = certify(out, final_opts)?;
        v.cert = v.cert.note("F_0 = {0}: every component is a single point");
        v.cert.provenance = vec![cov.cert.clone()];
        return Ok(v);
    }
    let d = input.colors.len() - 1;
    let unit = Subset::ball(dim, 1);
    let schedule = scale_schedule(d, &Subset::ball(dim, rho0))?;
    if !schedule.f[d].is_subset(&input.f)? {
        return Err(CoverError::Pipeline(format!(
            "input cover is verified at F = {} which does not contain F_{d} = {}",
            input.f, schedule.f[d]
        )));
    }
    let radii = schedule.radii()?;
    let mut pieces = Vec::with_capacity(d + 1);
    for (i, color) in input.colors.iter().enumerate() {
        let u = sys.intersection(color, &space)?;
        let mut td = tower_decomposition(sys, &u, &schedule.f[d], &input.s)?;
        td.color = i;
        let (gcov, _) = gamma_action_cover(dim, &schedule.f[i])?;
        let mut piece = cover_towers(&td, &gcov)?;
        piece.restriction = Some(u);
        let mut v = certify(piece, VerifyOptions::compact())?;
        v.cert = v.cert.param("color", i).param("towers", td.towers.len());
        pieces.push(v);
    }
    let mut acc = pieces[0].clone();
    for (i, a) in pieces.iter().enumerate().skip(1) {
        let p = UnionParams { r_a: radii[i].0, big_r_a: radii[i].1, r_b: rho0, big_r_b: radii[i - 1].2 };
        acc = combine_union_with(a, &acc, &unit, p, VerifyOptions::compact())?;
    }
    let out = Cover {
        system: sys.clone(),
        restriction: input.restriction.clone(),
        colors: acc.cover.colors.clone(),
        f: f0.clone(),
        s: schedule.g[d].clone(),
    };
    let mut v = certify(out, final_opts)?;
    let mut cert = v.cert.clone().param("schedule", &schedule).param("input_colors", d + 1);
    cert = cert
        .note("zero-dimensional case: towers have empty boundary, so the final union with a boundary neighbourhood cover is skipped")
        .note("bound reported is G_d");
    cert.provenance = vec![cov.cert.clone(), acc.cert.clone()];
    v.cert = cert;
    Ok(v)
}

/// Intersects every color (and the space) with `Y`.
pub fn restrict_cover(cov: &Cover, y: &ClopenSet) -> Result<Cover, CoverError> {
    let sys = &cov.system;
    let space = cov.space();
    let inside = sys.intersection(&space, y)?;
    if sys.same_set(&inside, &space)? {
        return Ok(cov.clone());
    }
    let colors = cov.colors.iter().map(|c| sys.intersection(c, &inside)).collect::<Result<Vec<_>, _>>()?;
    Ok(Cover { system: sys.clone(), restriction: Some(inside), colors, f: cov.f.clone(), s: cov.s.clone() })
}

/// Coloring of the group elements in a ball, induced by an orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitColoring {
    pub dim: usize,
    pub window: u64,
    pub basepoint: String,
    /// `(γ, color)` in lexicographic order of `γ`.
    pub points: Vec<(Vec<i64>, usize)>,
}

impl OrbitColoring {
    pub fn color_of(&self, g: &[i64]) -> Option<usize> {
        self.points.binary_search_by(|(p, _)| p.as_slice().cmp(g)).ok().map(|i| self.points[i].1)
    }
}

/// Largest `R` with `ball(R) ⊆ F`.
fn inner_radius(f: &Subset) -> Result<u64, CoverError> {
    if let Some(r) = f.as_ball() {
        return Ok(r);
    }
    let mut r = 0;
    while Subset::ball(f.dim(), r + 1).is_subset(f)? {
        r += 1;
    }
    Ok(r)
}

/// Colors `γ` in `ball(window)` by the color of `γ·x0` and checks that the
/// R-components of each color inside the window have diameter at most `diam S`.
pub fn orbit_transport(cov: &Cover, window: u64) -> Result<(OrbitColoring, Certificate), CoverError> {
    cov.validate()?;
    if cov.restriction.is_some() {
        return Err(CoverError::Restricted);
    }
    let sys = &cov.system;
    let dim = sys.dim();
    let r = inner_radius(&cov.f)?;
    let bound = cov.s.diam()? as i64;
    let elems = Subset::ball(dim, window).elements()?;
    let (basepoint, colors): (String, Vec<usize>) = match sys {
        System::Sturmian { slope } => {
            let mut cyl: Vec<CylinderSet> = Vec::new();
            let lo = cov.colors.iter().map(|c| c.as_cylinder().map_or(0, |c| c.offset)).min().unwrap_or(0);
            let hi = cov.colors.iter().map(|c| c.as_cylinder().map_or(0, |c| c.end())).max().unwrap_or(0);
            for c in &cov.colors {
                let c = c.as_cylinder().ok_or(CoverError::SystemMismatch)?;
                cyl.push(c.refine_to(slope, lo, hi)?);
            }
            let len = (hi - lo) as usize;
            let w = window as usize;
            let words = admissible_words(slope, 2 * w + len);
            let x0 = words.iter().min().expect("nonempty language").clone();
            let colors = elems
                .iter()
                .map(|g| {
                    let at = (g.coords()[0] + window as i64) as usize;
                    let word = word_string(&x0[at..at + len]);
                    cyl.iter().position(|c| c.words.contains(&word)).unwrap_or(usize::MAX)
                })
                .collect();
            (format!("@{}:{}", lo - window as i64, word_string(&x0)), colors)
        }
        _ => {
            let colors = elems
                .iter()
                .map(|g| {
                    cov.colors
                        .iter()
                        .position(|c| c.as_periodic().is_some_and(|t| t.contains(g.coords())))
                        .unwrap_or(usize::MAX)
                })
                .collect();
            (cell_label(&vec![0; dim]), colors)
        }
    };
    let points: Vec<(Vec<i64>, usize)> = elems.iter().map(|g| g.coords().to_vec()).zip(colors).collect();
    let coloring = OrbitColoring { dim, window, basepoint: basepoint.clone(), points };
    let mut cert = Certificate::new("orbit-fragment", Verdict::Pass)
        .param("R", r)
        .param("bound", bound)
        .param("window", window)
        .param("basepoint", &basepoint)
        .param("colors", cov.colors.len());
    if let Some((p, _)) = coloring.points.iter().find(|(_, c)| *c == usize::MAX) {
        return Ok((
            coloring.clone(),
            cert.fail_with(Counterexample { color: None, reason: "uncolored orbit point".into(), start: cell_label(p), chain: vec![vec![0; dim]] }),
        ));
    }
    let steps: Vec<Vec<i64>> = Subset::ball(dim, r)
        .elements()?
        .into_iter()
        .map(|g| g.coords().to_vec())
        .filter(|v| v.iter().any(|&x| x != 0))
        .collect();
    let index: HashMap<Vec<i64>, usize> = coloring.points.iter().cloned().collect();
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    for (p, c) in coloring.points.clone().iter() {
        if seen.contains(p) {
            continue;
        }
        cert.components += 1;
        let mut parent: HashMap<Vec<i64>, Vec<i64>> = HashMap::from([(p.clone(), p.clone())]);
        let mut queue = VecDeque::from([p.clone()]);
        let mut comp = vec![p.clone()];
        seen.insert(p.clone());
        while let Some(q) = queue.pop_front() {
            for s in &steps {
                let t: Vec<i64> = q.iter().zip(s).map(|(a, b)| a + b).collect();
                if index.get(&t) == Some(c) && !seen.contains(&t) {
                    seen.insert(t.clone());
                    parent.insert(t.clone(), q.clone());
                    comp.push(t.clone());
                    queue.push_back(t);
                }
            }
        }
        // farthest pair by brute force; components are small
        let mut best = (0i64, 0usize, 0usize);
        for i in 0..comp.len() {
            for j in i + 1..comp.len() {
                let dist: i64 = comp[i].iter().zip(&comp[j]).map(|(a, b)| (a - b).abs()).sum();
                if dist > best.0 {
                    best = (dist, i, j);
                }
            }
        }
        if best.0 > bound {
            let path = |x: &Vec<i64>| {
                let mut out = vec![x.clone()];
                let mut cur = x.clone();
                while cur != *p {
                    cur = parent[&cur].clone();
                    out.push(cur.clone());
                }
                out
            };
            let mut chain = path(&comp[best.1]);
            let mut back = path(&comp[best.2]);
            back.pop();
            back.reverse();
            // first extreme up to the root, then out to the second
            chain.extend(back);
            let start = chain[0].clone();
            let offsets = chain.iter().map(|q| q.iter().zip(&start).map(|(a, b)| a - b).collect()).collect();
            return Ok((
                coloring,
                cert.fail_with(Counterexample {
                    color: Some(*c),
                    reason: format!("component of diameter {} exceeds {bound}", best.0),
                    start: cell_label(&start),
                    chain: offsets,
                }),
            ));
        }
    }
    Ok((coloring, cert))
}

/// A cover of an odometer at `depth` whose colors are far apart relative to
/// `F`: arcs of the residue circle in dimension 1, and in dimension 2 two bands
/// of bricks, the second band shifted by half a period.
pub fn block_cover(system: &System, depth: u32, colors: usize, f: &Subset) -> Result<Cover, CoverError> {
    let moduli = system.depth_moduli(depth)?;
    let n = moduli[0];
    let cuts = |k: usize| -> Vec<i64> { (0..=k).map(|i| n * i as i64 / k as i64).collect() };
    let (sets, radius) = match moduli.len() {
        1 => {
            let c = cuts(colors);
            let sets = (0..colors)
                .map(|i| TorusSet::from_rows(moduli.clone(), vec![vec![(c[i], c[i + 1] - 1)]]))
                .collect::<Result<Vec<_>, _>>()?;
            let longest = (0..colors).map(|i| c[i + 1] - c[i]).max().unwrap_or(0);
            (sets, (longest / 2) as u64)
        }
        2 if colors >= 3 => {
            let c = cuts(colors);
            let shift = n / 2;
            let sets = (0..colors)
                .map(|i| {
                    TorusSet::from_fn(moduli.clone(), |p| {
                        let x = if p[1] < n / 2 { p[0] } else { (p[0] - shift).rem_euclid(n) };
                        c[i] <= x && x < c[i + 1]
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let w = (0..colors).map(|i| c[i + 1] - c[i]).max().unwrap_or(0);
            let h = n - n / 2;
            (sets, (w / 2 + h / 2) as u64)
        }
        d => return Err(CoverError::Pipeline(format!("no block cover with {colors} colors in dimension {d}"))),
    };
    let colors = sets.into_iter().map(ClopenSet::Periodic).collect();
    Cover::new(system.clone(), colors, f.clone(), Subset::ball(system.dim(), radius))
}

/// A cover of a Sturmian shift from the return times of a prefix `u` of the
/// characteristic word: every column between consecutive occurrences of `u`
/// is cut into `colors` consecutive blocks of levels.
pub fn marker_cover(system: &System, colors: usize, f: &Subset) -> Result<Cover, CoverError> {
    let slope = system.slope().ok_or(CoverError::SystemMismatch)?;
    if colors < 2 {
        return Err(CoverError::Pipeline("marker covers need at least two colors".into()));
    }
    let k = colors as i64;
    let rho = f.radius().unwrap_or(0) as i64;
    let need = (k * (rho + 1) + k - 2) / (k - 1) + 1;
    let mut len = 256usize;
    let (u, tmax) = 'search: loop {
        let w = slope.characteristic(len);
        for m in 1..w.len() / 8 {
            let u = &w[..m];
            let occ: Vec<usize> = (0..=w.len() - m).filter(|&i| &w[i..i + m] == u).collect();
            let gaps: Vec<i64> = occ.windows(2).map(|p| (p[1] - p[0]) as i64).collect();
            if gaps.len() < 8 {
                break;
            }
            if gaps.iter().all(|&g| g >= need) {
                break 'search (u.to_vec(), *gaps.iter().max().expect("gaps"));
            }
        }
        len *= 4;
        if len > 1 << 24 {
            return Err(CoverError::Pipeline("no marker with long enough return times".into()));
        }
    };
    let m = u.len() as i64;
    let offset = -(tmax - 1);
    let window = (2 * tmax + m - 1) as usize;
    let mut words: Vec<BTreeSet<String>> = vec![BTreeSet::new(); colors];
    for w in admissible_words(slope, window).iter() {
        let at = |p: i64| {
            let i = (p - offset) as usize;
            i + u.len() <= w.len() && w[i..i + u.len()] == u[..]
        };
        let j = (0..tmax).find(|&j| at(-j)).ok_or_else(|| CoverError::Pipeline("marker missing in window".into()))?;
        let t = (1..=tmax).find(|&t| at(t - j)).ok_or_else(|| CoverError::Pipeline("return time missing in window".into()))?;
        words[(j * k / t) as usize].insert(word_string(w));
    }
    let sets = words
        .into_iter()
        .map(|ws| ClopenSet::Cylinder(CylinderSet { offset, window, words: ws }.normalize(slope)))
        .collect();
    let block = (tmax + k - 1) / k;
    Cover::new(system.clone(), sets, f.clone(), Subset::ball(1, (block / 2 + 1) as u64))
}
