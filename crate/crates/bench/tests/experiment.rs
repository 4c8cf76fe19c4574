use std::fs;
use std::path::Path;
use std::process::Command;

use ipas::solver::read_trace_csv;
use ipas_bench::experiment::{read_manifest, CURVES_FILE, MANIFEST_FILE, SUMMARY_FILE};
use ipas_bench::{run_experiment, summarize_dir, ExperimentConfig};

const GRID: &str = r#"
seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]

[problem]
kind = "noisy_quadratic"
n = 4
components = 20
sigma = 1.0
seed = 5

[solver]
k_max = 3
n0 = 2

[sweep]
s_exp = [0.53, 1.0, 3.0]
dn = [1, 100]
sigma = [0.1, 1.0, 3.0]
"#;

fn traces_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains("__seed"))
        .collect();
    names.sort();
    names
}

#[test]
fn full_grid_writes_one_trace_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(GRID).unwrap();
    let outcome = run_experiment(&cfg, dir.path(), Some(2)).unwrap();
    assert_eq!(outcome.failures(), 0);
    assert_eq!(traces_in(dir.path()).len(), 180);

    let manifest = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.len(), 180);
    for row in &manifest {
        let records = read_trace_csv(fs::File::open(dir.path().join(&row.file)).unwrap()).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records.last().unwrap().scalar_products, row.final_budget);
        let same_point = manifest.iter().filter(|r| r.config_id == row.config_id);
        assert!(same_point.clone().all(|r| r.config_hash == row.config_hash));
        assert_eq!(same_point.count(), 10);
    }
    let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.lines().count(), 19);
}

#[test]
fn zero_iterations_records_only_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let text = GRID.replace("k_max = 3", "k_max = 0").replace("seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "seeds = [4]");
    let mut cfg = ExperimentConfig::from_toml(&text).unwrap();
    cfg.sweep = Default::default();
    run_experiment(&cfg, dir.path(), Some(1)).unwrap();
    let names = traces_in(dir.path());
    assert_eq!(names, vec!["ipas_s1_dn1_sigma1__seed4.csv"]);
    let records = read_trace_csv(fs::File::open(dir.path().join(&names[0])).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].k, 0);
    assert_eq!(records[0].scalar_products, 0);
}

#[test]
fn reruns_and_resummaries_are_byte_identical() {
    let text = GRID.replace("k_max = 3", "k_max = 25").replace("s_exp = [0.53, 1.0, 3.0]", "s_exp = [1.0]");
    let mut cfg = ExperimentConfig::from_toml(&text).unwrap();
    cfg.methods = vec!["ipas".into(), "baseline".into()];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&cfg, a.path(), Some(1)).unwrap();
    run_experiment(&cfg, b.path(), Some(3)).unwrap();
    for file in [SUMMARY_FILE, CURVES_FILE, MANIFEST_FILE] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    for name in traces_in(a.path()) {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name}");
    }

    let before = fs::read(a.path().join(SUMMARY_FILE)).unwrap();
    let (rows, curves) = summarize_dir(a.path()).unwrap();
    ipas_bench::summary::write_summary(&a.path().join(SUMMARY_FILE), &rows).unwrap();
    ipas_bench::summary::write_curves(&a.path().join(CURVES_FILE), &curves).unwrap();
    assert_eq!(before, fs::read(a.path().join(SUMMARY_FILE)).unwrap());
}

const TRACE_HEADER: &str = "k,N_k,t_k,norm_p,norm_d_true,e_x,f_true,scalar_products,accepted,unsuccessful,cg_iters";

fn write_trace(dir: &Path, name: &str, rows: &[(u64, f64)]) {
    let mut text = format!("{TRACE_HEADER}\n");
    for (k, (budget, d)) in rows.iter().enumerate() {
        text.push_str(&format!("{k},5,0,0,{d},0,0,{budget},false,false,0\n"));
    }
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn summary_statistics_match_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    write_trace(dir.path(), "g__seed0.csv", &[(0, 1.0), (10, 0.1), (20, 0.01)]);
    write_trace(dir.path(), "g__seed1.csv", &[(0, 10.0), (20, 1e-3), (40, 9.0)]);
    write_trace(dir.path(), "h__seed0.csv", &[(0, 1.0), (5, 1.0)]);
    write_trace(dir.path(), "h__seed1.csv", &[(0, 2.0), (5, 2.0)]);
    write_trace(dir.path(), "h__seed2.csv", &[(0, 9.0), (5, 9.0)]);

    let (rows, curves) = summarize_dir(dir.path()).unwrap();
    assert_eq!(rows.len(), 2);
    let h = rows.iter().find(|r| r.config_id == "h").unwrap();
    assert_eq!(h.median_final_d, 2.0);
    assert_eq!(h.runs, 3);
    let g = rows.iter().find(|r| r.config_id == "g").unwrap();
    assert_eq!(g.median_budget, 30.0);
    assert_eq!(g.hit_2, 1.0);
    assert_eq!(g.hit_3, 0.5);

    // Grid spans [0, 20]. log10 ‖d‖ at budget 5: run 0 gives −0.5, run 1
    // gives 1 + (5/20)(−4) = 0.
    let g_curve: Vec<_> = curves.iter().filter(|c| c.config_id == "g").collect();
    assert_eq!(g_curve.first().unwrap().budget, 0.0);
    assert_eq!(g_curve.last().unwrap().budget, 20.0);
    let at = |b: f64| g_curve.iter().find(|c| (c.budget - b).abs() < 1e-9).unwrap();
    assert!((at(5.0).mean_log10_d + 0.25).abs() < 1e-12);
    let half = 1.96 * (0.125f64).sqrt() / 2f64.sqrt();
    assert!((at(5.0).upper - (-0.25 + half)).abs() < 1e-12);
    assert!((at(10.0).mean_log10_d + 1.0).abs() < 1e-12);
    assert!((at(15.0).mean_log10_d + 1.75).abs() < 1e-12);
}

#[test]
fn summarize_needs_completed_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(summarize_dir(dir.path()), Err(ipas_bench::BenchError::EmptyGroup(_))));
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipas-bench"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seeds = []\n[problem]\nkind = \"noisy_quadratic\"\nn = 3\ncomponents = 5\nsigma = 1.0\n").unwrap();
    assert_eq!(bench().arg("validate").arg(&bad).status().unwrap().code(), Some(2));
    assert_eq!(bench().arg("run").arg(&bad).status().unwrap().code(), Some(2));

    let good = dir.path().join("good.toml");
    let text = GRID.replace("seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "seeds = [0, 1]");
    fs::write(&good, &text).unwrap();
    assert_eq!(bench().arg("validate").arg(&good).status().unwrap().code(), Some(0));

    // Asking for more samples than the problem has passes static validation
    // and fails when the run starts.
    let failing = dir.path().join("failing.toml");
    fs::write(&failing, text.replace("n0 = 2", "n0 = 500")).unwrap();
    let out = dir.path().join("failing_out");
    let status = bench().arg("run").arg(&failing).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let manifest = read_manifest(&out.join(MANIFEST_FILE)).unwrap();
    assert!(manifest.iter().all(|r| r.status == "error" && !r.message.is_empty()));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    let text = GRID.replace("seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "seeds = [0]").replace("[sweep]", "[unused]");
    let text = text.split("[unused]").next().unwrap().to_string();
    fs::write(&cfg, text).unwrap();
    let target = dir.path().join("from_env");
    let status = bench()
        .arg("run")
        .arg(&cfg)
        .env("IPAS_OUTPUT_DIR", &target)
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(traces_in(&target), vec!["ipas_s1_dn1_sigma1__seed0.csv"]);

    let status = bench().arg("summarize").arg(&target).status().unwrap();
    assert_eq!(status.code(), Some(0));
}
