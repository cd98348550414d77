//! End-to-end checks of the command-line surface through the built binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn hvi() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hvi"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hvi_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_fig_front(dir: &Path) -> PathBuf {
    let path = dir.join("front.csv");
    std::fs::write(&path, "# ref: 6.5,6.5\n1,5\n3,3\n5,1\n").unwrap();
    path
}

#[test]
fn dist_grid_with_mc_column() {
    let dir = temp_dir("dist");
    let front = write_fig_front(&dir);
    let out = dir.join("dist.csv");
    let status = hvi()
        .args(["dist", "--front"])
        .arg(&front)
        .args(["--mu", "2,0.8", "--sigma", "1,0.5", "--grid", "512"])
        .args(["--mc", "2500", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "delta,pdf,cdf,mc_cdf");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 512);
    let mut sup: f64 = 0.0;
    for w in rows.windows(2) {
        assert!(w[1][2] >= w[0][2] - 1e-12, "cdf not monotone");
    }
    for r in &rows {
        sup = sup.max((r[2] - r[3]).abs());
    }
    // 99% DKW band at 2500 samples.
    assert!(sup <= 0.04, "sup |cdf - mc_cdf| = {sup}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dist_rejects_empty_and_malformed_fronts() {
    let dir = temp_dir("dist_bad");
    let empty = dir.join("empty.csv");
    std::fs::write(&empty, "# ref: 1,1\n").unwrap();
    let out = dir.join("out.csv");
    let output = hvi()
        .args(["dist", "--front"])
        .arg(&empty)
        .args(["--mu", "0,0", "--sigma", "1,1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(!output.stderr.is_empty());

    let malformed = dir.join("malformed.csv");
    std::fs::write(&malformed, "# ref: 1,1\n0.5,0.5\nnot-a-number\n").unwrap();
    let output = hvi()
        .args(["dist", "--front"])
        .arg(&malformed)
        .args(["--mu", "0,0", "--sigma", "1,1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_writes_timing_table() {
    let dir = temp_dir("bench");
    let out = dir.join("bench.csv");
    let status = hvi()
        .args([
            "bench",
            "--sizes",
            "5,10",
            "--mc-samples",
            "2000",
            "--reps",
            "1",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,t_exact_s,t_mc_s");
    assert_eq!(lines.len(), 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn optimize_then_ecdf_round_trip() {
    let dir = temp_dir("opt");
    let config = dir.join("exp.toml");
    std::fs::write(
        &config,
        r#"
problem = "zdt1"
acquisition = "eps-poi"
doe_size = 6
budget = 10
repetitions = 2
seed = 11
"#,
    )
    .unwrap();
    let out_dir = dir.join("results");
    let status = hvi()
        .args(["optimize", "--config"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let run0 = out_dir.join("run_00.csv");
    let run1 = out_dir.join("run_01.csv");
    let summary = out_dir.join("summary.csv");
    assert!(run0.exists() && run1.exists() && summary.exists());
    let summary_text = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(summary_text.lines().count(), 11); // header + 10 rows

    let ecdf_out = dir.join("ecdf.csv");
    let status = hvi()
        .args(["ecdf", "--targets", "5", "--out"])
        .arg(&ecdf_out)
        .arg(&run0)
        .arg(&run1)
        .status()
        .unwrap();
    assert!(status.success());
    let ecdf_text = std::fs::read_to_string(&ecdf_out).unwrap();
    assert!(ecdf_text.starts_with("# targets: "));
    let values: Vec<f64> = ecdf_text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 10);
    for w in values.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for v in &values {
        assert!((0.0..=1.0).contains(v));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn optimize_is_byte_deterministic() {
    let dir = temp_dir("det");
    let config = dir.join("exp.toml");
    std::fs::write(
        &config,
        r#"
problem = "zdt1"
acquisition = "eps-pohvi"
doe_size = 6
budget = 9
repetitions = 1
seed = 1234
"#,
    )
    .unwrap();
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let status = hvi()
            .args(["optimize", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out_a.join("run_00.csv")).unwrap();
    let b = std::fs::read(out_b.join("run_00.csv")).unwrap();
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn ecdf_rejects_mismatched_problems() {
    let dir = temp_dir("ecdf_bad");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    std::fs::write(
        &a,
        "# problem: zdt1\n# acquisition: poi\n# rep: 0\n# reference: 15,15\nt,x1,f1,f2,hv_best\n0,0.5,1,1,1\n",
    )
    .unwrap();
    std::fs::write(
        &b,
        "# problem: zdt2\n# acquisition: poi\n# rep: 1\n# reference: 15,15\nt,x1,f1,f2,hv_best\n0,0.5,1,1,2\n",
    )
    .unwrap();
    let out = dir.join("ecdf.csv");
    let output = hvi()
        .args(["ecdf", "--out"])
        .arg(&out)
        .arg(&a)
        .arg(&b)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("different problems"));
    std::fs::remove_dir_all(&dir).ok();
}
