use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mmgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mmgraph(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path) {
    ok(
        dir,
        &[
            "synth", "--seed", "5", "--out", "d", "--n-eeg", "4", "--n-fmri", "6", "--dwell", "200",
        ],
    );
}

#[test]
fn synth_then_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    assert_eq!(
        fs::read_to_string(d.join("d/labels.txt"))
            .unwrap()
            .lines()
            .count(),
        400
    );
    fs::write(
        d.join("d/run.toml"),
        "eeg_matrix = \"eeg.csv\"\nfmri_matrix = \"fmri.csv\"\nlabels = \"labels.txt\"\nhrf = false\nseed = 5\n",
    )
    .unwrap();
    let stdout = ok(
        d,
        &[
            "run",
            "--config",
            "d/run.toml",
            "--output",
            "out",
            "--threads",
            "2",
        ],
    );
    assert!(stdout.contains("381 windows"), "{stdout}");
    assert!(stdout.contains("2 states"), "{stdout}");
    let summary = fs::read_to_string(d.join("out/summary.json")).unwrap();
    assert!(summary.contains("\"schema_version\": 1"));
    assert!(d.join("out/combined/state_1_w_plus.csv").exists());
}

#[test]
fn flags_override_config_and_runs_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    let base = [
        "run",
        "--eeg-matrix",
        "d/eeg.csv",
        "--fmri-matrix",
        "d/fmri.csv",
        "--seed",
        "9",
        "--window-length",
        "30",
    ];
    let mut a = base.to_vec();
    a.extend(["-o", "a", "--threads", "1"]);
    let mut b = base.to_vec();
    b.extend(["-o", "b", "--threads", "4"]);
    ok(d, &a);
    ok(d, &b);
    for f in [
        "summary.json",
        "combined/similarity.csv",
        "combined/dynamic_ge_pos.csv",
        "combined/states.txt",
    ] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(fs::read_to_string(d.join("a/summary.json"))
        .unwrap()
        .contains("\"window_length\": 30"));
}

#[test]
fn stages_compose_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    ok(
        d,
        &[
            "preprocess",
            "-i",
            "d/eeg.csv",
            "-i",
            "d/fmri.csv",
            "-o",
            "clean.csv",
        ],
    );
    let header = fs::read_to_string(d.join("clean.csv")).unwrap();
    assert!(header.starts_with("time,eeg01:EEG,eeg02:EEG,eeg03:EEG,eeg04:EEG,ic01:FMRI"));
    let stdout = ok(d, &["static", "-i", "clean.csv", "-o", "st"]);
    assert!(stdout.starts_with("sign,cs_net,cc_net,ge_net\npositive,"));
    assert!(d.join("st/static_metrics.csv").exists());
    let stdout = ok(
        d,
        &[
            "dynamic",
            "-i",
            "clean.csv",
            "-o",
            "dy",
            "--window-step",
            "2",
        ],
    );
    assert!(stdout.starts_with("191 windows"), "{stdout}");
    assert!(d.join("dy/temporal_summary.csv").exists());
    let stdout = ok(
        d,
        &[
            "states",
            "-i",
            "clean.csv",
            "-o",
            "st",
            "--seed",
            "1",
            "--labels",
            "d/labels.txt",
        ],
    );
    assert!(stdout.contains("n_states=2"), "{stdout}");
    assert!(stdout.contains("adjusted_rand_index="));
}

#[test]
fn bandpower_writes_one_file_per_band() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = String::from("time,Oz:EEG,Cz:EEG\n");
    for i in 0..1000 {
        let t = i as f64 / 100.0;
        text.push_str(&format!(
            "{t},{},{}\n",
            (2.0 * std::f64::consts::PI * 10.0 * t).sin(),
            (i % 7) as f64
        ));
    }
    fs::write(d.join("raw.csv"), text).unwrap();
    ok(
        d,
        &[
            "bandpower",
            "-i",
            "raw.csv",
            "-o",
            "bp",
            "--band",
            "alpha",
            "--band",
            "theta",
            "--no-hrf",
        ],
    );
    let alpha = fs::read_to_string(d.join("bp/alpha.csv")).unwrap();
    assert_eq!(alpha.lines().count(), 6);
    assert!(d.join("bp/theta.csv").exists());
    assert!(!d.join("bp/beta.csv").exists());
}

#[test]
fn ttest_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("t.csv"), "measure,subject,a,b\ncs,1,1,0\nge,1,0.5,0.1\ncs,2,2,0\nge,2,0.4,0.2\ncs,3,3,0\nge,3,0.9,0.3\n").unwrap();
    let stdout = ok(d, &["ttest", "-i", "t.csv"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "measure,n,mean_difference,t,df,p_two_sided");
    assert!(
        lines[1].starts_with("cs,3,2.0000000000000000e0,3.46410161513775"),
        "{}",
        lines[1]
    );
    assert!(lines[2].starts_with("ge,3,"));
}

#[test]
fn errors_are_reported_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = mmgraph(d, &["run", "--fmri-matrix", "missing.csv", "--seed", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    synth(d);
    let out = mmgraph(d, &["run", "--fmri-matrix", "d/fmri.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    fs::write(d.join("bad.csv"), "time,a:EEG\n0,1\n1,oops\n").unwrap();
    let out = mmgraph(d, &["static", "-i", "bad.csv", "-o", "x"]);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("bad.csv:3:"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = mmgraph(d, &["states", "-i", "d/fmri.csv", "-o", "x"]);
    assert!(!out.status.success(), "states without --seed must fail");
}
