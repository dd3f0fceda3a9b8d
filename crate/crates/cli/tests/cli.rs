use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use compdyn::cset::CSetInstance;
use compdyn::wiring::{Diagram, UWDiagram};
use compdyn_cli::files::instance_text;
use compdyn_cli::sim::write_csv;
use tempfile::TempDir;

mod common;

use common::data;

fn compdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compdyn")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = compdyn(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn eco_models() -> Vec<String> {
    common::eco_model_paths().iter().map(|m| p(m).to_string()).collect()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(compdyn(&[]).status.code(), Some(2));
    assert_eq!(compdyn(&["grid", "x", "2", "-o", "g.json"]).status.code(), Some(2));
    assert_eq!(compdyn(&["builtin", "nope", "-o", "m.json"]).status.code(), Some(2));
}

#[test]
fn validate_reports_violations() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["validate", p(&data("ecosystem/land.json"))]);
    assert!(out.contains("0 violations"), "{out}");

    let bad = write(
        &dir,
        "bad.json",
        r#"{"schema":"UWD","B":1,"P":2,"J":2,"Q":1,"box":[0,0],"junc_in":[0,5],"junc_out":[1]}"#,
    );
    let out = compdyn(&["validate", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("1 violations") && text.contains("junc_in[1]"), "{text}");

    let model = write(
        &dir,
        "model.json",
        r#"{"kind":"sharer","flavor":"continuous","states":["x"],"params":{},"dynamics":{"x":"-delta*x"},"ports":["x"]}"#,
    );
    let out = compdyn(&["validate", p(&model)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("delta"));
}

#[test]
fn domain_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.json");
    // three inners for a two-box outer
    let inner = data("ecosystem/land.json");
    let res = compdyn(&[
        "compose", "--outer", p(&data("ecosystem/total.json")), "--inner", p(&inner), p(&inner), p(&inner), "-o", p(&out),
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    let res = compdyn(&["validate", p(&dir.path().join("missing.json"))]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn compose_with_identities_is_canonical_outer() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &instance_text(UWDiagram::identity(3).instance()));
    let out = dir.path().join("c.json");
    ok(&["compose", "--outer", p(&data("ecosystem/total.json")), "--inner", p(&id), p(&id), "-o", p(&out)]);
    let composed = std::fs::read_to_string(&out).unwrap();
    let text = std::fs::read_to_string(data("ecosystem/total.json")).unwrap();
    let outer = CSetInstance::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    let expected = Diagram::from_instance(outer).unwrap().canonical();
    assert_eq!(composed, instance_text(expected.instance()));
}

#[test]
fn ecosystem_composes_to_shipped_flattening() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("eco.json");
    ok(&[
        "compose", "--outer", p(&data("ecosystem/total.json")),
        "--inner", p(&data("ecosystem/land.json")), p(&data("ecosystem/river.json")), "-o", p(&out),
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(data("ecosystem/eco.json")).unwrap());
}

#[test]
fn slot_form_matches_full_form() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &instance_text(UWDiagram::identity(3).instance()));
    let (total, river) = (data("ecosystem/total.json"), data("ecosystem/river.json"));
    let slot = dir.path().join("slot.json");
    let full = dir.path().join("full.json");
    ok(&["compose", "--outer", p(&total), "--inner", p(&river), "--slot", "1", "-o", p(&slot)]);
    ok(&["compose", "--outer", p(&total), "--inner", p(&id), p(&river), "-o", p(&full)]);
    assert_eq!(std::fs::read(&slot).unwrap(), std::fs::read(&full).unwrap());
}

#[test]
fn constant_system_stays_constant() {
    let dir = TempDir::new().unwrap();
    let diagram = write(&dir, "d.json", &instance_text(UWDiagram::identity(1).instance()));
    let model = write(
        &dir,
        "m.json",
        r#"{"kind":"sharer","flavor":"continuous","states":["x"],"dynamics":{"x":"0"},"ports":["x"]}"#,
    );
    let config = write(&dir, "c.json", r#"{"h":0.37,"steps":50,"initial":[5.0]}"#);
    let out = dir.path().join("t.csv");
    ok(&["simulate", "--diagram", p(&diagram), "--models", p(&model), "--config", p(&config), "--out", p(&out)]);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "b0.x"]);
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r[1] == 5.0));
}

#[test]
fn isolated_city_stays_uninfected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    ok(&[
        "simulate", "--diagram", p(&data("sir/isolation.json")), "--models", p(&data("sir/sir_city.json")),
        "--config", p(&data("sir/config.json")), "--labels", p(&data("sir/labels.json")), "--out", p(&out),
    ]);
    let (header, rows) = read_csv(&out);
    let i = header.iter().position(|h| h == "c3.I").unwrap();
    assert!(rows.iter().all(|r| r[i] == 0.0));
    // cities 1 and 2 exchange people while city 1 has an epidemic
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let last = rows.last().unwrap();
    assert!(last[col("c1.R")] > 0.5);
    assert!(last[col("c2.S")] > 0.6 + 1e-3);
    assert_eq!(last[col("c3.S")], 0.3);
}

#[test]
fn heat_flux_balances_at_boundary() {
    let dir = TempDir::new().unwrap();
    let grid = dir.path().join("g.json");
    ok(&["grid", "10", "10", "-o", p(&grid)]);
    let out = dir.path().join("t.csv");
    ok(&[
        "simulate", "--diagram", p(&grid), "--models", p(&data("heat/heat_node.json")),
        "--config", p(&data("heat/config.json")), "--out", p(&out),
    ]);
    let (_, rows) = read_csv(&out);
    // Each exposed port of a cell leaks h·α·x of its heat into the zero boundary.
    let leak = |x: &[f64]| -> f64 {
        (0..100)
            .map(|c| {
                let (i, j) = (c % 10, c / 10);
                let sides = [j == 0, i == 9, j == 9, i == 0].iter().filter(|&&b| b).count();
                sides as f64 * x[c]
            })
            .sum::<f64>()
            * 0.01
            * 0.1
    };
    for w in rows.windows(2) {
        let (a, b) = (&w[0][1..], &w[1][1..]);
        let delta: f64 = b.iter().sum::<f64>() - a.iter().sum::<f64>();
        assert!((delta + leak(a)).abs() < 1e-9, "{delta} vs {}", leak(a));
    }
}

#[test]
fn grid_then_migrate_counts() {
    let dir = TempDir::new().unwrap();
    let (grid, dwd) = (dir.path().join("g.json"), dir.path().join("d.json"));
    ok(&["grid", "2", "2", "-o", p(&grid)]);
    ok(&["migrate", "--cpg", p(&grid), "-o", p(&dwd)]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&dwd).unwrap()).unwrap();
    let counts: Vec<u64> =
        ["B", "P_in", "P_out", "Q_in", "Q_out", "W_in", "W", "W_out"].iter().map(|k| v[k].as_u64().unwrap()).collect();
    assert_eq!(counts, [4, 16, 16, 8, 8, 8, 8, 8]);
}

#[test]
fn dot_of_identity() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "id.json", &instance_text(UWDiagram::identity(1).instance()));
    let out = dir.path().join("id.dot");
    ok(&["export-dot", "--diagram", p(&d), "-o", p(&out)]);
    let dot = std::fs::read_to_string(&out).unwrap();
    assert!(dot.starts_with("graph"), "{dot}");
    assert!(dot.contains("b0"));
}

#[test]
fn plot_draws_one_line_per_column() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "t.csv", "t,a,b\n0,1,2\n1,2,3\n2,4,1\n");
    let out = dir.path().join("p.svg");
    ok(&["plot", "--csv", p(&csv), "-o", p(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().matches("<polyline").count(), 2);
    ok(&["plot", "--csv", p(&csv), "--columns", "b", "-o", p(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().matches("<polyline").count(), 1);
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let models = eco_models();
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let (eco, cfg, labels) = (data("ecosystem/eco.json"), data("ecosystem/config.json"), data("ecosystem/eco_labels.json"));
        let mut args = vec!["simulate", "--diagram", p(&eco), "--models"];
        args.extend(models.iter().map(String::as_str));
        args.extend(["--config", p(&cfg), "--labels", p(&labels), "--out", p(&out), "--svg", p(&svg)]);
        ok(&args);
        (std::fs::read(&out).unwrap(), std::fs::read(&svg).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn rk4_is_flagged_non_functorial() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    ok(&[
        "simulate", "--diagram", p(&data("sir/single.json")), "--models", p(&data("sir/sir_city.json")),
        "--config", p(&data("sir/single_config.json")), "--out", p(&out), "--scheme", "rk4",
    ]);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["discretization"], "rk4");
    assert_eq!(meta["functorial"], false);
}

#[test]
fn ecosystem_strategies_agree() {
    let dir = TempDir::new().unwrap();
    let models = eco_models();
    let cfg = data("ecosystem/config.json");

    // flattened diagram in one step
    let flat = dir.path().join("flat.csv");
    let mut args = vec!["simulate", "--diagram"];
    let eco = data("ecosystem/eco.json");
    let labels = data("ecosystem/eco_labels.json");
    args.push(p(&eco));
    args.push("--models");
    args.extend(models.iter().map(String::as_str));
    args.extend(["--config", p(&cfg), "--labels", p(&labels), "--out", p(&flat)]);
    ok(&args);

    // nested: land and river composed on their own, then glued by the total diagram
    let nested = dir.path().join("nested.csv");
    write_csv(std::fs::File::create(&nested).unwrap(), &common::eco_nested("ecosystem/config.json")).unwrap();
    let (h1, a) = read_csv(&flat);
    let (h2, b) = read_csv(&nested);
    assert_eq!(h1, h2);
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }
}
