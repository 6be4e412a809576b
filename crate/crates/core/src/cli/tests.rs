use std::fs;
use std::path::Path;

use super::{run, EXIT_FAIL, EXIT_GUARD, EXIT_MALFORMED, EXIT_PASS};
use crate::cert::Certificate;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn cert(path: &Path) -> Certificate {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const ODO_BUILD: &str = r#"
[system]
model = "odometer"
p = 2

[task]
command = "dad-cover"
F = "ball:1"
colors = 3
depth = 10

[output]
dir = "out"
"#;

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "build.toml", ODO_BUILD);
    assert_eq!(run(["dadcert", "build", &cfg]), EXIT_PASS);
    let c = cert(&dir.path().join("out/certificate.json"));
    assert!(c.all_passed());
    assert_eq!(c.kind, "dad-cover");

    let verify = "[system]\nmodel = \"odometer\"\np = 2\n\n[task]\ncover = \"out/cover.json\"\n\n[output]\ndir = \"v\"\n";
    let vcfg = write(dir.path(), "verify.toml", verify);
    assert_eq!(run(["dadcert", "verify", &vcfg]), EXIT_PASS);

    // shrinking S below the diameter of a component must fail
    let tight = verify.replace("cover = \"out/cover.json\"", "cover = \"out/cover.json\"\nS = \"ball:0\"");
    let tcfg = write(dir.path(), "tight.toml", &tight);
    assert_eq!(run(["dadcert", "verify", &tcfg]), EXIT_FAIL);
    let c = cert(&dir.path().join("v/certificate.json"));
    assert!(!c.passed());
    assert!(c.counterexample.is_some());
}

#[test]
fn out_override_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "build.toml", ODO_BUILD);
    let out = dir.path().join("elsewhere");
    assert_eq!(run(["dadcert", "--json", "--out", out.to_str().unwrap(), "build", &cfg]), EXIT_PASS);
    assert!(out.join("cover.json").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(["dadcert", "build", missing.to_str().unwrap()]), EXIT_MALFORMED);
    let bad = write(dir.path(), "bad.toml", "[system]\nmodel = \"odometer\"\n[task]\ncommand = \"dad-cover\"\n");
    assert_eq!(run(["dadcert", "build", &bad]), EXIT_MALFORMED);
    let unknown = write(dir.path(), "unknown.toml", "[system]\nmodel = \"torus\"\n[task]\n");
    assert_eq!(run(["dadcert", "components", &unknown]), EXIT_MALFORMED);
    let not_fs = write(dir.path(), "notfs.toml", "[system]\nmodel = \"odometer\"\np = 2\n[task]\nF = [1]\nset = \"full\"\n");
    assert_eq!(run(["dadcert", "components", &not_fs]), EXIT_MALFORMED);
    assert_eq!(run(["dadcert", "frobnicate"]), EXIT_MALFORMED);
}

#[test]
fn combine_refuses_side_condition() {
    let demo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo");
    let dir = tempfile::tempdir().unwrap();
    for f in ["union_a.json", "union_b.json"] {
        fs::copy(demo.join(f), dir.path().join(f)).unwrap();
    }
    let good = fs::read_to_string(demo.join("combine.toml")).unwrap();
    let cfg = write(dir.path(), "c.toml", &good);
    assert_eq!(run(["dadcert", "build", &cfg]), EXIT_PASS);
    let c = cert(&dir.path().join("out/combine/certificate.json"));
    assert_eq!(c.provenance.len(), 2);

    let bad = write(dir.path(), "bad.toml", &good.replace("r_a = 5", "r_a = 4").replace("out/combine", "out/bad"));
    assert_eq!(run(["dadcert", "build", &bad]), EXIT_MALFORMED);
    assert!(!dir.path().join("out/bad/cover.json").exists());
}

#[test]
fn components_and_empty_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[system]\nmodel = \"odometer\"\np = 2\n[task]\nF = \"ball:1\"\nS = \"ball:4\"\nset = { depth = 3, residues = [0, 1, 4] }\n";
    assert_eq!(run(["dadcert", "components", &write(dir.path(), "a.toml", cfg)]), EXIT_PASS);
    let tight = cfg.replace("ball:4", "ball:0");
    assert_eq!(run(["dadcert", "components", &write(dir.path(), "b.toml", &tight)]), EXIT_FAIL);
    let empty = "[system]\nmodel = \"sturmian\"\n[task]\nF = \"ball:2\"\nset = \"empty\"\n";
    assert_eq!(run(["dadcert", "--json", "components", &write(dir.path(), "c.toml", empty)]), EXIT_PASS);
}

#[test]
fn oracle_modes() {
    let dir = tempfile::tempdir().unwrap();
    let mc = "[system]\nmodel = \"odometer\"\np = 2\n[task]\nmode = \"min-colors\"\ndepth = 3\nF = \"ball:1\"\nS = \"ball:7\"\n";
    assert_eq!(run(["dadcert", "oracle", &write(dir.path(), "a.toml", mc)]), EXIT_PASS);
    let big = mc.replace("depth = 3", "depth = 20");
    assert_eq!(run(["dadcert", "oracle", &write(dir.path(), "b.toml", &big)]), EXIT_GUARD);
    let agree = "[system]\nmodel = \"odometer\"\np = 2\n[task]\nmode = \"agreement\"\nmax_depth = 2\nmax_k = 1\n";
    assert_eq!(run(["dadcert", "oracle", &write(dir.path(), "c.toml", agree)]), EXIT_PASS);
}

#[test]
fn group_and_gamma_builds() {
    let dir = tempfile::tempdir().unwrap();
    let g = "[system]\nmodel = \"translation\"\ndim = 2\n[task]\ncommand = \"group-cover\"\nr = 2\n";
    assert_eq!(run(["dadcert", "build", &write(dir.path(), "g.toml", g)]), EXIT_PASS);
    assert_eq!(cert(&dir.path().join("certificate.json")).kind, "group-cover");
    let gamma = "[system]\nmodel = \"translation\"\ndim = 1\n[task]\ncommand = \"gamma-cover\"\nF = \"ball:3\"\n";
    assert_eq!(run(["dadcert", "build", &write(dir.path(), "h.toml", gamma)]), EXIT_PASS);
    assert_eq!(cert(&dir.path().join("certificate.json")).kind, "dad-cover");
}
