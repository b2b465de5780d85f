//! End-to-end tests of the `agw` binary: exit codes, report contents,
//! determinism, and the documented file formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn agw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_agw"))
}

fn run(args: &[&str]) -> Output {
    agw().args(args).output().expect("binary runs")
}

fn report_field(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("report.txt")).expect("report exists");
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(&format!("{key} = ")) {
            return rest.to_string();
        }
    }
    panic!("report has no field {key}:\n{text}");
}

fn report_f64(dir: &Path, key: &str) -> f64 {
    report_field(dir, key).parse().expect("numeric field")
}

struct Fixture {
    dir: TempDir,
    x: PathBuf,
    y: PathBuf,
}

/// X is a fixed well-spread cloud; Y permutes its columns, so every method
/// should drive the objective to zero.
fn column_permuted_fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let x_text = "\
0.0,1.5,-2.0,0.5\n\
1.0,-0.5,0.0,2.5\n\
-1.5,2.0,1.0,-0.5\n\
2.0,0.0,-1.0,1.5\n\
0.5,-2.0,2.0,0.0\n";
    // columns reordered as [2, 0, 3, 1]
    let y_text = "\
-2.0,0.0,0.5,1.5\n\
0.0,1.0,2.5,-0.5\n\
1.0,-1.5,-0.5,2.0\n\
-1.0,2.0,1.5,0.0\n\
2.0,0.5,0.0,-2.0\n";
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    fs::write(&x, x_text).unwrap();
    fs::write(&y, y_text).unwrap();
    Fixture { dir, x, y }
}

#[test]
fn dist_agw_alpha_one_matches_gw() {
    let f = column_permuted_fixture();
    let out_gw = f.dir.path().join("gw");
    let out_agw = f.dir.path().join("agw");
    let st = run(&[
        "dist",
        "--method",
        "gw",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out_gw.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let st = run(&[
        "dist",
        "--method",
        "agw",
        "--alpha",
        "1.0",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out_agw.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let gw = report_f64(&out_gw, "final_objective");
    let agw = report_f64(&out_agw, "final_objective");
    assert!((gw - agw).abs() <= 1e-8, "gw {gw} vs agw {agw}");
}

#[test]
fn dist_coot_column_permutation_vanishes() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("coot");
    let st = run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert!(report_f64(&out, "final_objective") <= 1e-8);
}

#[test]
fn dist_malformed_csv_exits_2_with_position() {
    let f = column_permuted_fixture();
    let bad = f.dir.path().join("bad.csv");
    fs::write(&bad, "1.0,2.0\n3.0,banana\n").unwrap();
    let out = f.dir.path().join("nope");
    let st = run(&[
        "dist",
        "--x",
        bad.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
    let err = String::from_utf8_lossy(&st.stderr);
    assert!(err.contains("line 2"), "missing line diagnostic: {err}");
    assert!(err.contains("column 5"), "missing column diagnostic: {err}");
}

#[test]
fn dist_reads_binary_matrices() {
    let f = column_permuted_fixture();
    // convert x to binary via prep, then solve from the binary file
    let xbin = f.dir.path().join("x.agw");
    let st = run(&[
        "prep",
        "--in",
        f.x.to_str().unwrap(),
        "--out",
        xbin.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let out = f.dir.path().join("binrun");
    let st = run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        xbin.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert!(report_f64(&out, "final_objective") <= 1e-8);
}

#[test]
fn align_identical_inputs_zero_foscttm() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("self");
    let st = run(&[
        "align",
        "--method",
        "agw",
        "--alpha",
        "0.5",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.x.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert_eq!(report_f64(&out, "foscttm"), 0.0);
    assert_eq!(report_f64(&out, "matching_accuracy"), 1.0);
    assert!(out.join("projected.agw").exists());
}

#[test]
fn align_missing_out_exits_2() {
    let f = column_permuted_fixture();
    let st = run(&[
        "align",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn align_mismatched_correspondence_exits_2() {
    let f = column_permuted_fixture();
    let pairs = f.dir.path().join("pairs.csv");
    fs::write(&pairs, "0,0\n1,1\n").unwrap(); // too short for 5 samples
    let out = f.dir.path().join("badpairs");
    let st = run(&[
        "align",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--pairs",
        pairs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn align_respects_explicit_correspondence() {
    let f = column_permuted_fixture();
    // y rows reversed relative to x, matched by an explicit pairing
    let y_rev: String = fs::read_to_string(&f.y)
        .unwrap()
        .lines()
        .rev()
        .map(|l| format!("{l}\n"))
        .collect();
    let yr = f.dir.path().join("y_rev.csv");
    fs::write(&yr, y_rev).unwrap();
    let pairs = f.dir.path().join("pairs.csv");
    fs::write(&pairs, "0,4\n1,3\n2,2\n3,1\n4,0\n").unwrap();
    let out = f.dir.path().join("revrun");
    let st = run(&[
        "align",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        yr.to_str().unwrap(),
        "--pairs",
        pairs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert_eq!(report_f64(&out, "foscttm"), 0.0);
    assert_eq!(report_f64(&out, "matching_accuracy"), 1.0);
}

fn hda_fixture() -> (Fixture, PathBuf, PathBuf) {
    let f = column_permuted_fixture();
    let lx = f.dir.path().join("lx.txt");
    let ly = f.dir.path().join("ly.txt");
    fs::write(&lx, "0\n1\n0\n1\n0\n").unwrap();
    fs::write(&ly, "0\n1\n0\n1\n0\n").unwrap();
    (f, lx, ly)
}

#[test]
fn hda_identical_domains_full_accuracy() {
    let (f, lx, ly) = hda_fixture();
    let out = f.dir.path().join("hda");
    let st = run(&[
        "hda",
        "--method",
        "agw",
        "--alpha",
        "0.5",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.x.to_str().unwrap(),
        "--source-labels",
        lx.to_str().unwrap(),
        "--target-labels",
        ly.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert_eq!(report_f64(&out, "accuracy_all_targets"), 1.0);
    assert_eq!(report_f64(&out, "accuracy_unlabeled_targets"), 1.0);
}

#[test]
fn hda_everything_supervised_reports_absent() {
    let (f, lx, ly) = hda_fixture();
    let out = f.dir.path().join("hda_full");
    let st = run(&[
        "hda",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.x.to_str().unwrap(),
        "--source-labels",
        lx.to_str().unwrap(),
        "--target-labels",
        ly.to_str().unwrap(),
        "--supervised-per-class",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert_eq!(report_field(&out, "accuracy_unlabeled_targets"), "absent");
    assert_eq!(report_field(&out, "revealed_targets"), "5");
}

#[test]
fn hda_seeded_runs_are_byte_identical() {
    let (f, lx, ly) = hda_fixture();
    let out_a = f.dir.path().join("hda_a");
    let out_b = f.dir.path().join("hda_b");
    for out in [&out_a, &out_b] {
        let st = run(&[
            "hda",
            "--x",
            f.x.to_str().unwrap(),
            "--y",
            f.x.to_str().unwrap(),
            "--source-labels",
            lx.to_str().unwrap(),
            "--target-labels",
            ly.to_str().unwrap(),
            "--supervised-per-class",
            "1",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(
        fs::read(out_a.join("report.txt")).unwrap(),
        fs::read(out_b.join("report.txt")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("sample_coupling.agw")).unwrap(),
        fs::read(out_b.join("sample_coupling.agw")).unwrap()
    );
}

#[test]
fn hda_supervision_repairs_sign_flip_confusion() {
    // Y = -X preserves euclidean geometry but swaps which cluster is
    // value-close to which, so unsupervised value-based matching crosses the
    // classes; a few revealed target labels must repair the propagation.
    let dir = TempDir::new().unwrap();
    let n = 12;
    let d = 3;
    let mut x_text = String::new();
    let mut labels = String::new();
    for i in 0..n {
        let center: f64 = if i % 2 == 0 { 3.0 } else { -3.0 };
        let wiggle = 0.1 * (i as f64 / n as f64 - 0.5);
        for j in 0..d {
            if j > 0 {
                x_text.push(',');
            }
            x_text.push_str(&format!("{}", center + wiggle * (j as f64 + 1.0)));
        }
        x_text.push('\n');
        labels.push_str(if i % 2 == 0 { "0\n" } else { "1\n" });
    }
    let y_text: String = x_text
        .lines()
        .map(|line| {
            let flipped: Vec<String> = line
                .split(',')
                .map(|v| format!("{}", -v.parse::<f64>().unwrap()))
                .collect();
            format!("{}\n", flipped.join(","))
        })
        .collect();

    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    let lx = dir.path().join("lx.txt");
    let ly = dir.path().join("ly.txt");
    fs::write(&x, &x_text).unwrap();
    fs::write(&y, &y_text).unwrap();
    fs::write(&lx, &labels).unwrap();
    fs::write(&ly, &labels).unwrap();

    let base_args = |t: &str, out: &Path| {
        vec![
            "hda".to_string(),
            "--method".into(),
            "agw".into(),
            "--alpha".into(),
            "0.5".into(),
            "--x".into(),
            x.to_str().unwrap().into(),
            "--y".into(),
            y.to_str().unwrap().into(),
            "--source-labels".into(),
            lx.to_str().unwrap().into(),
            "--target-labels".into(),
            ly.to_str().unwrap().into(),
            "--supervised-per-class".into(),
            t.into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };

    let out_unsup = dir.path().join("unsup");
    let st = agw().args(base_args("0", &out_unsup)).output().unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let unsup = report_f64(&out_unsup, "accuracy_all_targets");
    assert!(
        unsup <= 0.2,
        "sign flip should confuse value matching: {unsup}"
    );

    // with a majority of targets revealed per class, the distance term tips
    // the remaining columns into the consistent assignment
    let out_sup = dir.path().join("sup");
    let st = agw().args(base_args("4", &out_sup)).output().unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let sup_all = report_f64(&out_sup, "accuracy_all_targets");
    let sup_unlabeled = report_f64(&out_sup, "accuracy_unlabeled_targets");
    assert!(
        sup_all >= 0.9,
        "supervision should repair the mapping: {sup_all}"
    );
    assert!(
        sup_unlabeled >= 0.9,
        "repair must extend to unrevealed targets: {sup_unlabeled}"
    );
}

#[test]
fn hda_class_count_mismatch_exits_2() {
    let (f, lx, _) = hda_fixture();
    let ly3 = f.dir.path().join("ly3.txt");
    fs::write(&ly3, "0\n1\n2\n1\n0\n").unwrap(); // three classes vs two
    let out = f.dir.path().join("hda_bad");
    let st = run(&[
        "hda",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.x.to_str().unwrap(),
        "--source-labels",
        lx.to_str().unwrap(),
        "--target-labels",
        ly3.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn sweep_grid_shape_and_selection() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("sweep");
    let st = run(&[
        "sweep",
        "--method",
        "agw",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--alphas",
        "0.3,0.7",
        "--eps-s-grid",
        "0,0.05",
        "--eps-v-grid",
        "0",
        "--select",
        "foscttm",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let table = fs::read_to_string(out.join("table.tsv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 4, "2x2x1 grid plus header");
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("best_row = "));
}

#[test]
fn sweep_grid_with_zero_eps_rows_works_after_entropic_flag() {
    // a base --eps-s flag must not poison eps = 0 grid rows
    let f = column_permuted_fixture();
    let out = f.dir.path().join("sweep_zero");
    let st = run(&[
        "sweep",
        "--method",
        "agw",
        "--eps-s",
        "0.1",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--alphas",
        "0.5",
        "--eps-s-grid",
        "0,0.05",
        "--eps-v-grid",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let table = fs::read_to_string(out.join("table.tsv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn sweep_empty_grid_exits_2() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("sweep_empty");
    let st = run(&[
        "sweep",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--alphas",
        " ",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn prep_unit_normalize_and_knn() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("v.csv");
    fs::write(&input, "3.0,4.0\n").unwrap();
    let out = dir.path().join("unit.csv");
    let st = run(&[
        "prep",
        "--in",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--normalize",
        "unit",
    ]);
    assert!(st.status.success());
    let parsed = agw_cli::io::parse_text_matrix(&fs::read_to_string(&out).unwrap(), false).unwrap();
    assert_eq!(parsed[[0, 0]], 0.6);
    assert_eq!(parsed[[0, 1]], 0.8);

    let colinear = dir.path().join("line.csv");
    fs::write(&colinear, "0.0\n1.0\n2.0\n").unwrap();
    let geo = dir.path().join("geo.csv");
    let st = run(&[
        "prep",
        "--in",
        colinear.to_str().unwrap(),
        "--out",
        geo.to_str().unwrap(),
        "--metric",
        "knn:1",
    ]);
    assert!(st.status.success());
    let parsed = agw_cli::io::parse_text_matrix(&fs::read_to_string(&geo).unwrap(), false).unwrap();
    let want = [[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((parsed[[i, j]] - want[i][j]).abs() < 1e-12);
        }
    }

    // invalid k
    let bad = dir.path().join("bad.csv");
    let st = run(&[
        "prep",
        "--in",
        colinear.to_str().unwrap(),
        "--out",
        bad.to_str().unwrap(),
        "--metric",
        "knn:9",
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn prep_text_binary_text_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("m.csv");
    fs::write(
        &input,
        "0.1,0.2\n0.30000000000000004,-7.123456789012345e-3\n",
    )
    .unwrap();
    let bin = dir.path().join("m.agw");
    let back = dir.path().join("m_back.csv");
    assert!(run(&[
        "prep",
        "--in",
        input.to_str().unwrap(),
        "--out",
        bin.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "prep",
        "--in",
        bin.to_str().unwrap(),
        "--out",
        back.to_str().unwrap()
    ])
    .status
    .success());
    let a = agw_cli::io::parse_text_matrix(&fs::read_to_string(&input).unwrap(), false).unwrap();
    let b = agw_cli::io::parse_text_matrix(&fs::read_to_string(&back).unwrap(), false).unwrap();
    assert_eq!(a, b, "17-significant-digit text round trip drifted");
}

#[test]
fn config_file_drives_run_and_flags_override() {
    let f = column_permuted_fixture();
    let config = f.dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "[solver]\nmethod = \"agw\"\nalpha = 1.0\n\n[data]\nx = \"{}\"\ny = \"{}\"\n",
            f.x.file_name().unwrap().to_str().unwrap(),
            f.y.file_name().unwrap().to_str().unwrap()
        ),
    )
    .unwrap();
    let out = f.dir.path().join("cfg_run");
    let st = run(&[
        "dist",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    assert_eq!(report_field(&out, "method"), "agw");
    assert_eq!(report_f64(&out, "alpha"), 1.0);

    // flag overrides config alpha
    let out2 = f.dir.path().join("cfg_run2");
    let st = run(&[
        "dist",
        "--config",
        config.to_str().unwrap(),
        "--alpha",
        "0.25",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    assert_eq!(report_f64(&out2, "alpha"), 0.25);
}

#[test]
fn config_unknown_key_exits_2() {
    let f = column_permuted_fixture();
    let config = f.dir.path().join("typo.toml");
    fs::write(&config, "[solver]\nalpa = 0.5\n").unwrap();
    let out = f.dir.path().join("typo_run");
    let st = run(&[
        "dist",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("alpa"));
}

#[test]
fn agw_threads_env_caps_workers() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("capped");
    let st = agw()
        .args([
            "sweep",
            "--method",
            "coot",
            "--x",
            f.x.to_str().unwrap(),
            "--y",
            f.y.to_str().unwrap(),
            "--alphas",
            "0",
            "--eps-s-grid",
            "0",
            "--eps-v-grid",
            "0",
            "--workers",
            "8",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("AGW_THREADS", "2")
        .output()
        .unwrap();
    assert!(st.status.success());
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("workers = 2"), "{summary}");
}

#[test]
fn timing_is_opt_in() {
    let f = column_permuted_fixture();
    let out = f.dir.path().join("no_timing");
    assert!(run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(!report.contains("wall_time_seconds"));

    let out = f.dir.path().join("with_timing");
    assert!(run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--timing",
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("wall_time_seconds"));
}

#[test]
fn dist_non_convergence_exits_3_with_partial_outputs() {
    let f = column_permuted_fixture();
    // deliberately starved iteration budget with an unreachable tolerance
    let out = f.dir.path().join("partial");
    let st = run(&[
        "dist",
        "--method",
        "agw",
        "--alpha",
        "0.5",
        "--eps-s",
        "0.4",
        "--eps-v",
        "0.4",
        "--max-bcd-iters",
        "1",
        "--tol-abs",
        "1e-300",
        "--tol-rel",
        "1e-300",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(3));
    assert!(out.join("report.txt").exists());
    assert!(out.join("sample_coupling.agw").exists());
    assert_eq!(report_field(&out, "converged"), "false");
}

#[test]
fn dist_accepts_explicit_marginal_files() {
    let f = column_permuted_fixture();
    let mu = f.dir.path().join("mu.csv");
    fs::write(&mu, "0.5,0.125,0.125,0.125,0.125\n").unwrap();
    let out = f.dir.path().join("weighted");
    let st = run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--mu",
        mu.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    // first row of the returned plan carries the declared 0.5 mass
    let plan =
        agw_cli::io::parse_binary_matrix(&fs::read(out.join("sample_coupling.agw")).unwrap())
            .unwrap();
    let first_row: f64 = plan.row(0).sum();
    assert!((first_row - 0.5).abs() <= 1e-7);

    // marginals that do not sum to one are rejected
    let bad = f.dir.path().join("bad_mu.csv");
    fs::write(&bad, "0.5,0.2,0.1,0.1,0.2\n").unwrap();
    let st = run(&[
        "dist",
        "--method",
        "coot",
        "--x",
        f.x.to_str().unwrap(),
        "--y",
        f.y.to_str().unwrap(),
        "--mu",
        bad.to_str().unwrap(),
        "--out",
        f.dir.path().join("bad_run").to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn fixed_seed_dist_runs_are_byte_identical() {
    let f = column_permuted_fixture();
    let out_a = f.dir.path().join("rep_a");
    let out_b = f.dir.path().join("rep_b");
    for out in [&out_a, &out_b] {
        assert!(run(&[
            "dist",
            "--method",
            "agw",
            "--alpha",
            "0.5",
            "--eps-s",
            "0.01",
            "--x",
            f.x.to_str().unwrap(),
            "--y",
            f.y.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ])
        .status
        .success());
    }
    for file in ["report.txt", "sample_coupling.agw", "feature_coupling.agw"] {
        assert_eq!(
            fs::read(out_a.join(file)).unwrap(),
            fs::read(out_b.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
}
