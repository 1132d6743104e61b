use std::path::Path;
use std::process::Command as Process;

use fogcache_cli::commands::{csv_bytes, Metadata};
use fogcache_cli::{cmd_analytic, cmd_bounds, cmd_simulate, run, Command, ExperimentConfig};
use fogcache_core::ndt;
use fogcache_core::PolicyKind;

fn config(base: &str, policies: &str, sweep: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{"schema": "fogcache.experiment/v1", "base": {base}, "policies": {policies},
            "sweep": {sweep}, {extra} "outputs": "unused"}}"#
    );
    ExperimentConfig::from_json(&text).unwrap()
}

const REFERENCE: &str = r#"{"M": 10, "K": 5, "N": 20, "mu": 0.1, "r": 0.2, "p": 0.5, "alpha": 2.0}"#;
const ADAPTIVE: &str = r#"{"M": 10, "K": 5, "N": 5, "mu": 0.5, "r": 1.1, "p": 0.0, "alpha": 2.0}"#;

fn p_grid(step: usize) -> String {
    let values: Vec<String> = (0..=step).map(|i| format!("{}", i as f64 / step as f64)).collect();
    format!(r#"{{"variable": "p", "values": [{}]}}"#, values.join(", "))
}

#[test]
fn analytic_reactive_known_passthrough() {
    let c = config(REFERENCE, r#"["reactive_known"]"#, r#"{"variable": "p", "values": [0, 0.5, 1]}"#, "");
    let rows = cmd_analytic(&c).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row.ndt.unwrap(), ndt::reactive_known_longterm(&row.params).unwrap());
        assert_eq!(row.cached_fraction, None);
    }
    assert!((rows[1].ndt.unwrap() - 1.6325581395348838).abs() < 1e-12);
}

#[test]
fn analytic_cran_is_flat_in_p() {
    let c = config(REFERENCE, r#"["cran_only"]"#, &p_grid(10), "");
    let rows = cmd_analytic(&c).unwrap();
    assert!(rows.iter().all(|r| r.ndt == rows[0].ndt));
    assert!((rows[0].ndt.unwrap() - 3.5).abs() < 1e-12);
}

#[test]
fn analytic_adaptive_breakpoints() {
    let c = config(ADAPTIVE, r#"["reactive_adaptive_known"]"#, &p_grid(20), "");
    for row in cmd_analytic(&c).unwrap() {
        let want = if row.params.p <= 22.0 / 45.0 {
            0.5
        } else if row.params.p <= 0.6 + 1e-12 {
            0.1
        } else {
            0.0
        };
        assert_eq!(row.cached_fraction, Some(want), "p = {}", row.params.p);
    }
}

#[test]
fn analytic_leaves_cells_empty_without_closed_form() {
    let c = config(
        REFERENCE,
        r#"["reactive_unknown_lru", "reactive_pipelined_known", "reactive_unknown_random"]"#,
        &p_grid(2),
        "",
    );
    let rows = cmd_analytic(&c).unwrap();
    assert!(rows[..6].iter().all(|r| r.ndt.is_none() && r.pair.is_none()));
    assert!(rows[6..].iter().all(|r| r.ndt.is_some()));
    let text = String::from_utf8(csv_bytes(&rows).unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "policy,M,K,N,mu,r,p,alpha,ndt,delta_F,delta_E,cached_fraction");
    assert_eq!(lines.next().unwrap(), "reactive_unknown_lru,10,5,20,0.1,0.2,0,2,,,,");
}

#[test]
fn bounds_examples() {
    let c = config(
        r#"{"M": 6, "K": 3, "N": 8, "mu": 1.0, "r": 0.5, "p": 0.3, "alpha": 2.0}"#,
        r#"["reactive_known"]"#,
        &p_grid(1),
        "",
    );
    assert!(cmd_bounds(&c).unwrap().iter().all(|r| (r.offline_lb - 1.0).abs() < 1e-12));

    let c = config(
        r#"{"M": 2, "K": 2, "N": 4, "mu": 0.0, "r": 1.0, "p": 0.0, "alpha": 2.0}"#,
        r#"["reactive_known"]"#,
        &p_grid(1),
        "",
    );
    assert!((cmd_bounds(&c).unwrap()[0].offline_lb - 2.0).abs() < 1e-12);
}

#[test]
fn bounds_rows_are_certified() {
    for sweep in [p_grid(20), r#"{"variable": "mu", "values": [0, 0.05, 0.1, 0.3, 0.7, 1]}"#.into()] {
        let c = config(REFERENCE, r#"["reactive_known"]"#, &sweep, "");
        for row in cmd_bounds(&c).unwrap() {
            assert_eq!(row.certified(), Some(true), "{:?}", row.params);
        }
    }
}

#[test]
fn simulate_reactive_known_near_closed_form() {
    let c = config(
        REFERENCE,
        r#"["reactive_known"]"#,
        r#"{"variable": "p", "values": [0.5]}"#,
        r#""sim": {"horizon": 50000, "replications": 8, "seed": 3},"#,
    );
    let row = &cmd_simulate(&c).unwrap()[0];
    assert!((row.result.ndt_mean - 1.6325581395348838).abs() <= 3.0 * row.result.ndt_ci95_halfwidth);
}

fn temp_config(dir: &Path, sim: &str) -> ExperimentConfig {
    let mut c = config(
        REFERENCE,
        r#"["reactive_known", "reactive_unknown_random", "reactive_unknown_lru", "reactive_unknown_fifo"]"#,
        &p_grid(4),
        sim,
    );
    c.outputs = dir.join("reference").to_string_lossy().into_owned();
    c
}

#[test]
fn files_and_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = temp_config(dir.path(), r#""sim": {"horizon": 2000, "replications": 3, "seed": 11},"#);
    let written = run(&c, Command::SweepAll).unwrap();
    assert_eq!(written.len(), 3);
    for (w, name) in written.iter().zip(["analytic", "bounds", "simulate"]) {
        assert!(w.csv.ends_with(format!("reference_{name}.csv")));
        let meta: Metadata = serde_json::from_str(&std::fs::read_to_string(&w.meta).unwrap()).unwrap();
        assert_eq!(meta.config, c);
        assert_eq!(meta.command, name);
        let header = std::fs::read_to_string(&w.csv).unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, meta.columns.join(","));
        if name == "simulate" {
            assert_eq!(meta.warmup_slots.len(), 20);
            assert!(meta.generator.contains("ChaCha8"));
        }
    }
}

#[test]
fn sweep_all_requires_sim_section() {
    let dir = tempfile::tempdir().unwrap();
    let c = temp_config(dir.path(), "");
    let err = run(&c, Command::SweepAll).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join("reference_analytic.csv").exists());
}

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sim = r#""sim": {"horizon": 5000, "replications": 4, "seed": 21},"#;
    let mut outputs = Vec::new();
    for (i, threads) in [1, 4, 0].into_iter().enumerate() {
        let mut c = temp_config(dir.path(), sim);
        c.outputs = dir.path().join(format!("run{i}")).to_string_lossy().into_owned();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let written = pool.install(|| run(&c, Command::Simulate)).unwrap();
        outputs.push(std::fs::read(&written[0].csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn policies_come_out_in_config_order() {
    let c = temp_config(Path::new("."), r#""sim": {"horizon": 500, "replications": 2},"#);
    let rows = cmd_simulate(&c).unwrap();
    let order: Vec<PolicyKind> = rows.iter().step_by(5).map(|r| r.policy).collect();
    assert_eq!(order, c.policies);
    assert!(rows.chunks(5).all(|chunk| chunk.windows(2).all(|w| w[0].params.p < w[1].params.p)));
}

fn fogcache(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_fogcache")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let prefix = dir.path().join("out").to_string_lossy().into_owned();
    let write = |text: &str| std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();

    write(&format!(
        r#"{{"schema": "fogcache.experiment/v1", "base": {REFERENCE}, "policies": ["reactive_known"],
            "sim": {{"horizon": 300, "replications": 2}}, "outputs": "ignored"}}"#
    ));
    let out = fogcache(&["simulate", "--config", p, "--out", &prefix, "--seed", "5", "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = std::fs::read_to_string(format!("{prefix}_simulate.meta.json")).unwrap();
    let meta: Metadata = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta.config.sim.unwrap().seed, 5);
    assert_eq!(meta.config.outputs, prefix);

    assert_eq!(fogcache(&["analytic"]).status.code(), Some(2));
    assert_eq!(fogcache(&["analytic", "--config", "/nonexistent/c.json"]).status.code(), Some(2));

    write(r#"{"schema": "fogcache.experiment/v1", "base": {"#);
    let out = fogcache(&["analytic", "--config", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    write(&format!(
        r#"{{"schema": "fogcache.experiment/v1", "base": {REFERENCE}, "policies": ["reactive_known"],
            "sweep": {{"variable": "alpha", "values": [2, 0.5]}}, "outputs": "x"}}"#
    ));
    let out = fogcache(&["analytic", "--config", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.values[1]"));

    // Caching policies cannot refresh their caches without fronthaul.
    write(&format!(
        r#"{{"schema": "fogcache.experiment/v1", "base": {}, "policies": ["reactive_known"],
            "sim": {{"horizon": 300, "replications": 1}}, "outputs": "{prefix}"}}"#,
        REFERENCE.replace("\"r\": 0.2", "\"r\": 0.0")
    ));
    assert_eq!(fogcache(&["simulate", "--config", p]).status.code(), Some(3));
}
