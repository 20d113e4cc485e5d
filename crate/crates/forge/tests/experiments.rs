use std::process::Command;

use mikado_core::torus::TorusGrid;
use mikado_forge::experiments::toy_fields;
use mikado_forge::tfld::{self, FieldData};
use mikado_forge::{run, Experiment, ExperimentConfig, ForgeError, MemSink};
use serde_json::Value;

fn run_mem(e: Experiment, pairs: &[(&str, &str)]) -> (mikado_forge::Report, MemSink) {
    let cfg = ExperimentConfig::from_pairs(e, pairs).unwrap();
    let mut sink = MemSink::default();
    let r = run(&cfg, &mut sink).unwrap();
    (r, sink)
}

fn json_of(sink: &MemSink, rel: &str) -> Value {
    serde_json::from_slice(&sink.files[rel]).unwrap()
}

#[test]
fn mikado_verify_small_family() {
    let (r, sink) = run_mem(
        Experiment::MikadoVerify,
        &[("d", "3"), ("N", "64"), ("mu", "8"), ("min_cells", "4"), ("fields", "true")],
    );
    assert!(r.pass(), "{:?}", r.failed());
    for name in ["div_w", "mean_theta", "cancellation", "disjoint", "product_l1_le_m"] {
        assert!(r.find(name).is_some(), "{name}");
    }
    let manifest = json_of(&sink, "family.json");
    assert!(manifest.is_object());
    for j in 0..3 {
        assert!(r.fields.contains_key(&format!("theta_{j}.bin")));
        assert!(sink.files.contains_key(&format!("w_{j}.bin")));
    }
    assert_eq!(json_of(&sink, "report.json")["status"], "pass");
}

#[test]
fn solve_and_moser_pass() {
    let (r, sink) = run_mem(Experiment::Solve, &[("N", "16"), ("cases", "3")]);
    assert!(r.pass(), "{:?}", r.failed());
    let csv = String::from_utf8(sink.files["solve.csv"].clone()).unwrap();
    assert!(csv.starts_with("# columns: case, drift_l2, relative_error, energy_defect, iterations\n"));
    assert_eq!(csv.lines().count(), 2 + 3);
    let (r, _) = run_mem(Experiment::Moser, &[("N", "32"), ("k_max", "2")]);
    assert!(r.pass(), "{:?}", r.failed());
}

#[test]
fn counterexample_document_has_spec_keys() {
    let (r, sink) = run_mem(Experiment::Counterexample, &[]);
    assert!(r.pass(), "{:?}", r.failed());
    let doc = json_of(&sink, "counterexample.json");
    for key in ["alpha_spec", "beta_spec", "constraints", "grad_energy", "drift_term", "defect", "lp_norms"] {
        assert!(doc.get(key).is_some(), "{key}");
    }
    let defect = doc["defect"].as_f64().unwrap();
    assert!((defect + 1.0).abs() < 1e-6);
    let lp = doc["lp_norms"].as_object().unwrap();
    assert_eq!(lp.len(), 5);
}

#[test]
fn bad_parameters_map_to_exit_code_two() {
    let cfg = ExperimentConfig::from_pairs(Experiment::Solve, &[("N", "15")]).unwrap();
    let err = run(&cfg, &mut MemSink::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    let cfg = ExperimentConfig::from_pairs(Experiment::Counterexample, &[("n_r", "4")]).unwrap();
    let err = run(&cfg, &mut MemSink::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    let cfg = ExperimentConfig::from_pairs(Experiment::CiStep, &[("N", "32"), ("delta", "1")]).unwrap();
    assert!(matches!(run(&cfg, &mut MemSink::default()), Err(ForgeError::Config(_))));
    let cfg = ExperimentConfig::from_pairs(Experiment::CiStep, &[("mode", "L2")]).unwrap();
    assert_eq!(run(&cfg, &mut MemSink::default()).unwrap_err().exit_code(), 2);
}

#[test]
fn toy_fields_are_admissible_and_seeded() {
    let g = TorusGrid::new(3, 16).unwrap();
    let (b, u) = toy_fields(g, 7);
    assert!(b.divergence().max_abs() < 1e-10 * b.max_abs());
    assert!(u.mean().abs() < 1e-14);
    let (b2, u2) = toy_fields(g, 7);
    assert_eq!((&b, &u), (&b2, &u2));
    let (_, u3) = toy_fields(g, 8);
    assert_ne!(u2, u3);
}

#[test]
fn ci_step_writes_both_steps() {
    let (r, sink) = run_mem(Experiment::CiStep, &[("N", "64"), ("min_cells", "4")]);
    for dir in ["step_0", "step_1"] {
        for f in ["b", "u", "f"] {
            assert!(r.fields.contains_key(&format!("{dir}/{f}.bin")), "{dir}/{f}");
        }
    }
    let step = json_of(&sink, "step_1/report.json");
    assert!(step["lhs_raz"].is_number());
    for name in ["raz", "dwa", "g_chi", "div_b", "mean_u"] {
        assert!(r.find(name).is_some(), "{name}");
    }
    assert!(r.find("div_b").unwrap().pass);
}

#[test]
fn ci_step_fixed_parameters_skip_the_search() {
    let (r, _) = run_mem(
        Experiment::CiStep,
        &[("N", "64"), ("min_cells", "4"), ("delta", "1.0"), ("lambda", "2"), ("mu", "8")],
    );
    assert!(!r.exhausted);
    let params = &r.results["search"]["params"];
    assert_eq!(params["lambda"], 2);
    assert_eq!(params["mu"].as_f64(), Some(8.0));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mikado-forge"))
}

#[test]
fn cli_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ce");
    let st = binary()
        .args(["counterexample", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(out.join("counterexample.json").exists());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "counterexample");

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "N = 16\nlambda = 3\n").unwrap();
    let st = binary().args(["solve", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = binary().args(["nope"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = binary().args(["solve", "--config", "/nonexistent/x.cfg"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = binary().env("MF_THREADS", "zero").arg("counterexample").status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn cli_exhaustion_is_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("run");
    std::fs::write(&cfg, format!("N = 64\nmin_cells = 4\nK = 1\nout_dir = {}\n", out.display())).unwrap();
    let o = binary()
        .env("MF_THREADS", "1")
        .args(["ci-run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let run: Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["status"], "exhausted");
    let seed = tfld::read(&out.join("step_0/u.bin")).unwrap();
    assert!(matches!(seed, FieldData::Scalar(_)));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let st = binary()
        .args(["solve", "--seed", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], "5");
}

#[test]
fn ci_run_without_room_still_reports() {
    let cfg = ExperimentConfig::from_pairs(Experiment::CiRun, &[("N", "32"), ("min_cells", "4")]).unwrap();
    let mut sink = MemSink::default();
    let r = run(&cfg, &mut sink).unwrap();
    assert!(r.exhausted);
    assert_eq!(json_of(&sink, "run.json")["status"], "exhausted");
    assert!(!sink.files.contains_key("report.json"));
}
