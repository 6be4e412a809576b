//! Command-line front end: TOML run configs, JSON covers and certificates.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::asdim::{gamma_action_cover, grid_cover, verify_group_cover};
use crate::cert::Certificate;
use crate::chains::f_components;
use crate::covers::{
    block_cover, certify, combine_union, marker_cover, reduce_cover, restrict_cover, scale_schedule, verify_dad_cover, Cover, CoverError,
    UnionParams, VerifyOptions,
};
use crate::oracle::{compare_components, exhaustive_min_colors, FiniteQuotientModel, OracleError};
use crate::systems::{admissible_words, word_string, ClopenSet, Slope, System};
use crate::Subset;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Oracle(OracleError::SizeGuard(..)) => EXIT_GUARD,
            _ => EXIT_MALFORMED,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "dadcert", version, about = "Build and verify dynamic asymptotic dimension certificates")]
pub struct Cli {
    /// Print machine-readable JSON instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Override the output directory of the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify a cover file; exit 0 on pass, 1 on fail.
    Verify { config: PathBuf },
    /// Run a construction (group-cover, gamma-cover, dad-cover, combine).
    Build { config: PathBuf },
    /// Print the F-components of a set.
    Components { config: PathBuf },
    /// Brute-force checks: min-colors or agreement.
    Oracle { config: PathBuf },
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub task: TaskSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub model: String,
    pub p: Option<i64>,
    pub dim: Option<usize>,
    pub slope: Option<SlopeSpec>,
    pub restriction: Option<SetSpec>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum SlopeSpec {
    Named(String),
    Directive { #[serde(default)] prefix: Vec<u32>, tail: Vec<u32> },
}

/// `"ball:r"`, `{ ball = r }`, or an explicit list of elements (integers in
/// dimension 1, coordinate lists otherwise).
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum SubsetSpec {
    Text(String),
    Ball { ball: u64 },
    Points(Vec<Vec<i64>>),
    Line(Vec<i64>),
}

/// A clopen set: `"full"`/`"empty"`, residues at a depth, cells of a torus, or
/// Sturmian words at an offset.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum SetSpec {
    Named(String),
    Residues { depth: u32, residues: Vec<ResidueSpec> },
    Cells { moduli: Vec<i64>, cells: Vec<Vec<i64>> },
    Words { offset: i64, words: Vec<String> },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum ResidueSpec {
    Scalar(i64),
    Vector(Vec<i64>),
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub command: Option<String>,
    #[serde(rename = "F")]
    pub f: Option<SubsetSpec>,
    #[serde(rename = "S")]
    pub s: Option<SubsetSpec>,
    pub cover: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub r_a: Option<u64>,
    #[serde(rename = "R_a")]
    pub big_r_a: Option<u64>,
    pub r_b: Option<u64>,
    #[serde(rename = "R_b")]
    pub big_r_b: Option<u64>,
    pub set: Option<SetSpec>,
    pub depth: Option<u32>,
    pub colors: Option<usize>,
    pub d: Option<usize>,
    pub r: Option<u64>,
    pub mode: Option<String>,
    pub cap: Option<usize>,
    pub max_depth: Option<u32>,
    pub max_window: Option<usize>,
    pub max_k: Option<u64>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_cover")]
    pub cover: String,
    #[serde(default = "default_certificate")]
    pub certificate: String,
    #[serde(default)]
    pub verbose: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_cover() -> String {
    "cover.json".into()
}

fn default_certificate() -> String {
    "certificate.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), cover: default_cover(), certificate: default_certificate(), verbose: false }
    }
}

impl SystemSpec {
    pub fn build(&self) -> Result<System, CliError> {
        let sys = match self.model.as_str() {
            "odometer" => System::Odometer { p: self.p.ok_or_else(|| config_err("odometer needs p"))?, dim: self.dim.unwrap_or(1) },
            "translation" => System::Translation { dim: self.dim.unwrap_or(1) },
            "sturmian" => {
                let slope = match &self.slope {
                    None => Slope::golden(),
                    Some(SlopeSpec::Named(n)) if n == "golden" => Slope::golden(),
                    Some(SlopeSpec::Named(n)) => return Err(config_err(format!("unknown slope {n}"))),
                    Some(SlopeSpec::Directive { prefix, tail }) => Slope { prefix: prefix.clone(), tail: tail.clone() },
                };
                System::Sturmian { slope }
            }
            m => return Err(config_err(format!("unknown model {m}"))),
        };
        sys.validate().map_err(config_err)?;
        Ok(sys)
    }
}

impl SubsetSpec {
    pub fn build(&self, dim: usize) -> Result<Subset, CliError> {
        match self {
            SubsetSpec::Text(t) => {
                let r = t.strip_prefix("ball:").ok_or_else(|| config_err(format!("bad subset {t}")))?;
                Ok(Subset::ball(dim, r.trim().parse().map_err(config_err)?))
            }
            SubsetSpec::Ball { ball } => Ok(Subset::ball(dim, *ball)),
            SubsetSpec::Points(pts) => Subset::from_coords(dim, pts).map_err(config_err),
            SubsetSpec::Line(xs) => Subset::from_coords(dim, &xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).map_err(config_err),
        }
    }
}

impl SetSpec {
    pub fn build(&self, sys: &System) -> Result<ClopenSet, CliError> {
        let set = match self {
            SetSpec::Named(n) if n == "full" => sys.full(),
            SetSpec::Named(n) if n == "empty" => sys.empty(),
            SetSpec::Named(n) => return Err(config_err(format!("unknown set {n}"))),
            SetSpec::Residues { depth, residues } => {
                let cells: Vec<Vec<i64>> = residues
                    .iter()
                    .map(|r| match r {
                        ResidueSpec::Scalar(x) => vec![*x],
                        ResidueSpec::Vector(v) => v.clone(),
                    })
                    .collect();
                sys.residue_set(*depth, &cells).map_err(config_err)?
            }
            SetSpec::Cells { moduli, cells } => {
                ClopenSet::Periodic(crate::lattice::TorusSet::from_cells(moduli.clone(), cells.iter().cloned()).map_err(config_err)?)
            }
            SetSpec::Words { offset, words } => {
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                sys.cylinder(*offset, &refs).map_err(config_err)?
            }
        };
        sys.check_set(&set).map_err(config_err)?;
        Ok(set)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e.to_string()))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    toml::from_str(&read(path)?).map_err(config_err)
}

struct Ctx {
    cfg: RunConfig,
    base: PathBuf,
    out_dir: PathBuf,
    json: bool,
}

impl Ctx {
    fn new(path: &Path, cli: &Cli) -> Result<Self, CliError> {
        let cfg = load_config(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let out_dir = match &cli.out {
            Some(o) => o.clone(),
            None => base.join(&cfg.output.dir),
        };
        Ok(Self { cfg, base, out_dir, json: cli.json })
    }

    fn input(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    fn system(&self) -> Result<System, CliError> {
        self.cfg.system.build()
    }

    fn subset(&self, spec: &Option<SubsetSpec>, dim: usize, name: &str) -> Result<Subset, CliError> {
        spec.as_ref().ok_or_else(|| config_err(format!("task needs {name}")))?.build(dim)
    }

    fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T, CliError> {
        v.ok_or_else(|| config_err(format!("task needs {name}")))
    }

    fn write_outputs(&self, cover: Option<String>, cert: &Certificate) -> Result<(), CliError> {
        if let Some(c) = cover {
            write(&self.out_dir.join(&self.cfg.output.cover), &(c + "\n"))?;
        }
        write(&self.out_dir.join(&self.cfg.output.certificate), &(cert.to_json() + "\n"))
    }

    fn report(&self, cert: &Certificate, summary: &str) {
        if self.json {
            println!("{}", cert.to_json());
            return;
        }
        println!("{summary}: {}", if cert.passed() { "pass" } else { "fail" });
        if let Some(cx) = &cert.counterexample {
            println!("  {} from {} (color {:?})", cx.reason, cx.start, cx.color);
            let steps: Vec<String> = cx.chain.iter().map(|p| format!("{p:?}")).collect();
            println!("  chain: {}", steps.join(" "));
        }
        if self.cfg.output.verbose {
            for n in &cert.notes {
                println!("  note: {n}");
            }
        }
    }
}

fn load_cover(path: &Path) -> Result<Cover, CliError> {
    let cover: Cover = serde_json::from_str(&read(path)?).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    cover.validate()?;
    Ok(cover)
}

fn verdict_code(cert: &Certificate) -> i32 {
    if cert.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_verify(ctx: &Ctx) -> Result<i32, CliError> {
    let task = &ctx.cfg.task;
    let path = ctx.input(task.cover.as_ref().ok_or_else(|| config_err("task needs cover"))?);
    let mut cover = load_cover(&path)?;
    let dim = cover.system.dim();
    if task.f.is_some() {
        cover.f = ctx.subset(&task.f, dim, "F")?;
    }
    if task.s.is_some() {
        cover.s = ctx.subset(&task.s, dim, "S")?;
    }
    let cert = verify_dad_cover(&cover)?;
    ctx.write_outputs(None, &cert)?;
    ctx.report(&cert, &format!("verify {}", path.display()));
    Ok(verdict_code(&cert))
}

fn cover_json(cover: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(cover).expect("cover serializes")
}

fn cmd_build(ctx: &Ctx) -> Result<i32, CliError> {
    let task = &ctx.cfg.task;
    let command = task.command.as_deref().ok_or_else(|| config_err("task needs command"))?;
    let sys = ctx.system()?;
    let dim = sys.dim();
    let (cover, cert) = match command {
        "group-cover" => {
            let d = task.d.unwrap_or(dim);
            let r = ctx.need(task.r, "r")?;
            let g = grid_cover(d, r).map_err(CoverError::from)?;
            let cert = verify_group_cover(&g, r, g.bound).map_err(CoverError::from)?;
            (cover_json(&g), cert)
        }
        "gamma-cover" => {
            let f = ctx.subset(&task.f, dim, "F")?;
            let (cover, _) = gamma_action_cover(dim, &f).map_err(CoverError::from)?;
            let v = certify(cover, VerifyOptions::default());
            match v {
                Ok(v) => {
                    let (c, cert) = v.into_parts();
                    (cover_json(&c), cert)
                }
                Err(CoverError::Rejected(cert)) => return refuse(ctx, &cert),
                Err(e) => return Err(e.into()),
            }
        }
        "dad-cover" => {
            let f0 = ctx.subset(&task.f, dim, "F")?;
            let colors = task.colors.unwrap_or(dim + 2);
            let schedule = scale_schedule(colors - 1, &Subset::ball(dim, f0.radius().unwrap_or(0)))?;
            let fd = schedule.f[colors - 1].clone();
            let input = match &sys {
                System::Sturmian { .. } => marker_cover(&sys, colors, &fd)?,
                _ => block_cover(&sys, ctx.need(task.depth, "depth")?, colors, &fd)?,
            };
            let input = match certify(input, VerifyOptions::compact()) {
                Ok(v) => v,
                Err(CoverError::Rejected(cert)) => return refuse(ctx, &cert),
                Err(e) => return Err(e.into()),
            };
            match reduce_cover(&input, &f0) {
                Ok(v) => match &ctx.cfg.system.restriction {
                    None => {
                        let (c, cert) = v.into_parts();
                        (cover_json(&c), cert)
                    }
                    Some(y) => {
                        let y = y.build(&sys)?;
                        let c = restrict_cover(v.cover(), &y)?;
                        let cert = verify_dad_cover(&c)?;
                        (cover_json(&c), cert)
                    }
                },
                Err(CoverError::Rejected(cert)) => return refuse(ctx, &cert),
                Err(e) => return Err(e.into()),
            }
        }
        "combine" => {
            let f = ctx.subset(&task.f, dim, "F")?;
            let a = load_cover(&ctx.input(task.a.as_ref().ok_or_else(|| config_err("task needs a"))?))?;
            let b = load_cover(&ctx.input(task.b.as_ref().ok_or_else(|| config_err("task needs b"))?))?;
            let p = UnionParams {
                r_a: ctx.need(task.r_a, "r_a")?,
                big_r_a: ctx.need(task.big_r_a, "R_a")?,
                r_b: ctx.need(task.r_b, "r_b")?,
                big_r_b: ctx.need(task.big_r_b, "R_b")?,
            };
            if !p.side_condition() {
                return Err(CoverError::SideCondition { r_a: p.r_a, r_b: p.r_b, big_r_b: p.big_r_b }.into());
            }
            let a = certify(a, VerifyOptions::default()).map_err(|e| match e {
                CoverError::Rejected(_) => CoverError::Unverified("A"),
                e => e,
            })?;
            let b = certify(b, VerifyOptions::default()).map_err(|e| match e {
                CoverError::Rejected(_) => CoverError::Unverified("B"),
                e => e,
            })?;
            match combine_union(&a, &b, &f, p) {
                Ok(v) => {
                    let (c, cert) = v.into_parts();
                    (cover_json(&c), cert)
                }
                Err(CoverError::Rejected(cert)) => return refuse(ctx, &cert),
                Err(e) => return Err(e.into()),
            }
        }
        other => return Err(config_err(format!("unknown build command {other}"))),
    };
    if !cert.all_passed() {
        return refuse(ctx, &cert);
    }
    ctx.write_outputs(Some(cover), &cert)?;
    ctx.report(&cert, &format!("build {command}"));
    Ok(EXIT_PASS)
}

/// A failed sub-verification: report the certificate, write no cover.
fn refuse(ctx: &Ctx, cert: &Certificate) -> Result<i32, CliError> {
    ctx.write_outputs(None, cert)?;
    ctx.report(cert, "build refused, verification");
    Ok(EXIT_FAIL)
}

fn cmd_components(ctx: &Ctx) -> Result<i32, CliError> {
    let task = &ctx.cfg.task;
    let sys = ctx.system()?;
    let f = ctx.subset(&task.f, sys.dim(), "F")?;
    let set = task.set.as_ref().ok_or_else(|| config_err("task needs set"))?.build(&sys)?;
    let comps = f_components(&sys, &set, &f).map_err(CoverError::from)?;
    let labels = comps.cell_labels().map_err(CoverError::from)?;
    let witness = match &task.s {
        Some(s) => Some(crate::chains::is_s_bounded(&comps, &s.build(sys.dim())?).map_err(CoverError::from)?),
        None => None,
    };
    if ctx.json {
        let rows: Vec<serde_json::Value> = labels
            .iter()
            .map(|(c, l)| serde_json::json!({ "cell": c, "labels": l, "unbounded": l.is_none() }))
            .collect();
        let out = serde_json::json!({ "cells": rows, "bounded": witness });
        println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    } else {
        println!("{} cells, {} components", labels.len(), comps.component_count());
        for (c, l) in &labels {
            match l {
                Some(l) => {
                    let ls: Vec<String> = l.iter().map(|v| if v.len() == 1 { v[0].to_string() } else { format!("{v:?}") }).collect();
                    println!("  {c}: {{{}}}", ls.join(", "));
                }
                None => println!("  {c}: unbounded (wrap)"),
            }
        }
        if let Some(w) = &witness {
            println!("S-bounded: {}", if w.passed() { "yes" } else { "no" });
            for x in &w.witnesses {
                println!("  component at {}: lambda {:?}", x.base, x.lambda);
            }
        }
    }
    Ok(match &witness {
        Some(w) if !w.passed() => EXIT_FAIL,
        _ => EXIT_PASS,
    })
}

fn cmd_oracle(ctx: &Ctx) -> Result<i32, CliError> {
    let task = &ctx.cfg.task;
    let sys = ctx.system()?;
    let mode = task.mode.as_deref().unwrap_or("agreement");
    match mode {
        "min-colors" => {
            let System::Odometer { p, dim } = sys else { return Err(config_err("min-colors needs an odometer")) };
            let model = FiniteQuotientModel::odometer(p, dim, ctx.need(task.depth, "depth")?)?;
            let f = ctx.subset(&task.f, dim, "F")?;
            let s = ctx.subset(&task.s, dim, "S")?;
            let cap = task.cap.unwrap_or(3);
            let best = exhaustive_min_colors(&model, &f, &s, cap)?;
            if ctx.json {
                println!("{}", serde_json::json!({ "points": model.point_count() as u64, "min_colors": best, "cap": cap }));
            } else {
                match best {
                    Some(c) => println!("min colors on {} points: {c}", model.point_count()),
                    None => println!("min colors on {} points: none up to {cap}", model.point_count()),
                }
            }
            Ok(EXIT_PASS)
        }
        "agreement" => {
            let max_k = task.max_k.unwrap_or(2);
            let mut rows: Vec<(String, usize, usize)> = Vec::new();
            match &sys {
                System::Odometer { p, dim: 1 } => {
                    for n in 1..=task.max_depth.unwrap_or(4) {
                        let model = FiniteQuotientModel::odometer(*p, 1, n)?;
                        let cells = model.cells();
                        if cells.len() > 20 {
                            return Err(OracleError::SizeGuard(1u128 << cells.len(), 1 << 20).into());
                        }
                        for k in 0..=max_k {
                            let (mut total, mut bad) = (0, 0);
                            for mask in 0u64..1 << cells.len() {
                                let chosen: Vec<Vec<i64>> = cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c.clone()).collect();
                                let b = sys.residue_set(n, &chosen).map_err(config_err)?;
                                total += 1;
                                if !compare_components(&sys, &model, &b, &Subset::ball(1, k), 0)?.is_empty() {
                                    bad += 1;
                                }
                            }
                            rows.push((format!("depth {n}, F = ball:{k}"), total, bad));
                        }
                    }
                }
                System::Sturmian { slope } => {
                    let model = FiniteQuotientModel::fibonacci(6000, 600)?;
                    for len in 1..=task.max_window.unwrap_or(6) {
                        let words = admissible_words(slope, len);
                        if words.len() > 20 {
                            return Err(OracleError::SizeGuard(1u128 << words.len(), 1 << 20).into());
                        }
                        for k in 0..=max_k {
                            let (mut total, mut bad) = (0, 0);
                            for mask in 1u64..1 << words.len() {
                                let chosen: Vec<String> = words.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, w)| word_string(w)).collect();
                                let refs: Vec<&str> = chosen.iter().map(String::as_str).collect();
                                let b = sys.cylinder(0, &refs).map_err(config_err)?;
                                total += 1;
                                if !compare_components(&sys, &model, &b, &Subset::ball(1, k), 2000)?.is_empty() {
                                    bad += 1;
                                }
                            }
                            rows.push((format!("window {len}, F = ball:{k}"), total, bad));
                        }
                    }
                }
                _ => return Err(config_err("agreement sweeps cover 1-dimensional odometers and Sturmian shifts")),
            }
            let all = rows.iter().all(|r| r.2 == 0);
            if ctx.json {
                let out: Vec<serde_json::Value> =
                    rows.iter().map(|(n, t, b)| serde_json::json!({ "case": n, "sets": t, "disagreements": b })).collect();
                println!("{}", serde_json::json!({ "rows": out, "all_agree": all }));
            } else {
                for (n, t, b) in &rows {
                    println!("{n:<24} {t:>6} sets  {b} disagreements");
                }
                println!("{}", if all { "all agree" } else { "DISAGREEMENT" });
            }
            Ok(if all { EXIT_PASS } else { EXIT_FAIL })
        }
        m => Err(config_err(format!("unknown oracle mode {m}"))),
    }
}

/// Runs the CLI on the given arguments and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_MALFORMED } else { EXIT_PASS };
        }
    };
    let path = match &cli.command {
        Command::Verify { config } | Command::Build { config } | Command::Components { config } | Command::Oracle { config } => config.clone(),
    };
    let result = Ctx::new(&path, &cli).and_then(|ctx| match &cli.command {
        Command::Verify { .. } => cmd_verify(&ctx),
        Command::Build { .. } => cmd_build(&ctx),
        Command::Components { .. } => cmd_components(&ctx),
        Command::Oracle { .. } => cmd_oracle(&ctx),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
