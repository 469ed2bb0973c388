use std::path::Path;
use std::process::{Command, Output};

use heavymin::{verify_family, ExtReal, VerifyConfig};
use heavymin_cli::PlanDocument;

fn heavymin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heavymin"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn load(path: &Path) -> PlanDocument {
    PlanDocument::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn construct_identity_gauge_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = heavymin(
        &[
            "construct",
            "--target",
            "exponential:1",
            "--gauge",
            "identity_plus",
            "--mode",
            "pair",
            "--horizon",
            "32",
            "-o",
            "p.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    let d = load(&dir.path().join("p.json"));
    assert_eq!(d.intervals.len(), 32);
    assert!(d
        .intervals
        .iter()
        .all(|r| heavymin::certificate_passes(r.log_certificate.as_ref())));
    assert!(text(&o.stderr).contains("32 intervals"));
}

#[test]
fn family_cycles_three_sets() {
    let dir = tempfile::tempdir().unwrap();
    let o = heavymin(
        &[
            "construct",
            "--target",
            "exponential:1",
            "--gauge",
            "exp:0.5",
            "--mode",
            "family",
            "--n",
            "3",
            "--k",
            "2",
            "--horizon",
            "9",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let d = PlanDocument::from_json(&text(&o.stdout)).unwrap();
    assert_eq!(d.subsets, vec![vec![0], vec![1], vec![2]]);
    let frozen: Vec<usize> = d.intervals.iter().map(|r| r.frozen[0]).collect();
    assert_eq!(frozen, [0, 1, 2, 0, 1, 2, 0, 1, 2]);
}

#[test]
fn sqrt_split_mentions_shortcut() {
    let dir = tempfile::tempdir().unwrap();
    let o = heavymin(
        &[
            "construct",
            "--target",
            "exponential:1",
            "--gauge",
            "exp:2",
            "--mode",
            "sqrt-split",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(text(&o.stderr).contains("exponential shortcut"));
    let d = PlanDocument::from_json(&text(&o.stdout)).unwrap();
    assert_eq!(
        d.risks[0],
        heavymin::RiskFunction::of_target(&heavymin::TargetDistribution::exponential(0.5).unwrap())
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let hyp = heavymin(
        &[
            "construct",
            "--target",
            "exponential:1",
            "--gauge",
            "exp:2",
            "--policy",
            "closed-form",
        ],
        p,
    );
    assert_eq!(hyp.status.code(), Some(3));
    assert!(text(&hyp.stderr).contains("beta < alpha"));
    let fam = heavymin(
        &[
            "construct",
            "--target",
            "exponential:1",
            "--gauge",
            "exp:1",
            "--mode",
            "family",
            "--n",
            "2",
            "--k",
            "3",
        ],
        p,
    );
    assert_eq!(fam.status.code(), Some(3));
    assert_eq!(
        heavymin(&["construct", "--target", "gamma:1", "--gauge", "exp:1"], p)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        heavymin(&["verify", "missing.json"], p).status.code(),
        Some(1)
    );
    assert_eq!(
        heavymin(
            &["figures", "--family", "weibull", "--alpha", "0.2", "--beta", "0.5"],
            p
        )
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn verify_names_tampered_interval() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(heavymin(
        &[
            "construct",
            "--target",
            "weibull:0.5",
            "--gauge",
            "exp_power:0.25",
            "--horizon",
            "16",
            "-o",
            "p.json"
        ],
        p
    )
    .status
    .success());
    let ok = heavymin(
        &[
            "verify",
            "p.json",
            "--samples",
            "2000",
            "--report",
            "r.json",
        ],
        p,
    );
    assert!(ok.status.success(), "{}", text(&ok.stdout));
    assert!(p.join("r.json").exists());
    let mut d = load(&p.join("p.json"));
    d.intervals[6].log_certificate = Some(ExtReal::from_f64(0.5f64.ln()));
    std::fs::write(p.join("t.json"), d.to_json().unwrap()).unwrap();
    let bad = heavymin(&["verify", "t.json", "--samples", "0"], p);
    assert_eq!(bad.status.code(), Some(4));
    assert!(
        text(&bad.stdout).contains("FAIL interval 6"),
        "{}",
        text(&bad.stdout)
    );
    assert!(text(&bad.stderr).contains("interval 6"));
}

#[test]
fn verify_family_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = "target = \"exponential:1\"\ngauge = \"exp:0.5\"\nmode = \"family\"\nn = 4\nk = 3\nhorizon = 30\n";
    std::fs::write(p.join("run.toml"), cfg).unwrap();
    assert!(heavymin(
        &[
            "--config",
            "run.toml",
            "construct",
            "--horizon",
            "24",
            "-o",
            "f.json"
        ],
        p
    )
    .status
    .success());
    assert_eq!(load(&p.join("f.json")).intervals.len(), 24);
    let o = heavymin(&["verify", "f.json", "--samples", "3000", "--seed", "4"], p);
    let out = text(&o.stdout);
    assert!(o.status.success(), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("minimum ")).count(), 4);
    assert_eq!(
        out.lines().filter(|l| l.starts_with("divergence ")).count(),
        6
    );
    assert_eq!(
        out.lines()
            .filter(|l| l.starts_with("ks one-sided"))
            .count(),
        4
    );
    assert!(out.contains("seed = 4"));
}

#[test]
fn sampling_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(heavymin(
        &[
            "construct",
            "--target",
            "exponential:2",
            "--gauge",
            "exp:1",
            "-o",
            "p.json"
        ],
        p
    )
    .status
    .success());
    for f in ["a.csv", "b.csv"] {
        assert!(heavymin(
            &["sample", "p.json", "-n", "10", "--seed", "17", "-o", f],
            p
        )
        .status
        .success());
    }
    let a = std::fs::read_to_string(p.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(p.join("b.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "h1,h2,min");
    assert_eq!(lines.len(), 11);
    for l in &lines[1..] {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[2], v[0].min(v[1]));
    }
    let default = heavymin(&["sample", "p.json", "-n", "3"], p);
    assert!(text(&default.stderr).contains(&format!("seed = {}", heavymin_cli::DEFAULT_SEED)));
}

#[test]
fn explicit_policy_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("seq.txt"), "# breakpoints\n0\n4\n64, 16384\n").unwrap();
    let o = heavymin(
        &[
            "construct",
            "--target",
            "exponential:2",
            "--gauge",
            "exp:1",
            "--policy",
            "explicit:seq.txt",
            "--horizon",
            "3",
        ],
        p,
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    let d = PlanDocument::from_json(&text(&o.stdout)).unwrap();
    assert_eq!(d.intervals[2].end, ExtReal::from_f64(16384.0));
    assert_eq!(d.policy, Some(heavymin::PolicyKind::Explicit));
}

#[test]
fn round_trip_verifies_identically() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(heavymin(
        &[
            "construct",
            "--target",
            "polynomial:3",
            "--gauge",
            "power:1",
            "--policy",
            "paper-minimal",
            "-o",
            "p.json"
        ],
        p
    )
    .status
    .success());
    let fam = heavymin::construct_pair(
        &heavymin::TargetDistribution::polynomial(3.0).unwrap(),
        &heavymin::GrowthFunction::power(1.0).unwrap(),
        heavymin::Policy::TargetMinimal,
        heavymin::Horizon::Intervals(32),
    )
    .unwrap();
    let (loaded, issues) = load(&p.join("p.json")).to_family().unwrap();
    assert!(issues.is_empty());
    assert_eq!(loaded, fam);
    let cfg = VerifyConfig {
        samples: 2000,
        seed: 9,
        ..Default::default()
    };
    assert_eq!(
        verify_family(&loaded, &cfg).unwrap(),
        verify_family(&fam, &cfg).unwrap()
    );
}

#[test]
fn validate_seq_reports_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("s.txt"), "0 1 1.5 10\n").unwrap();
    let o = heavymin(
        &[
            "validate-seq",
            "--target",
            "exponential:1",
            "--gauge",
            "exp:0.5",
            "--seq",
            "s.txt",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(text(&o.stderr).contains("interval 1: gap below 1"));
    let ok = heavymin(
        &[
            "validate-seq",
            "--target",
            "exponential:2",
            "--gauge",
            "exp:1",
            "--closed-form",
            "exponential",
            "--count",
            "8",
        ],
        p,
    );
    assert!(ok.status.success());
    assert!(text(&ok.stdout).contains("verdict: valid (8 intervals)"));
}

#[test]
fn figures_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = heavymin(
        &[
            "figures",
            "--family",
            "polynomial",
            "--alpha",
            "3",
            "--beta",
            "1",
            "--count",
            "6",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let out = text(&o.stdout);
    let mut lines = out.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# figures family=polynomial alpha=3 beta=1"));
    assert_eq!(
        lines.next().unwrap(),
        "k,log2_a_star,log2_a,loglog_a_star,loglog_a"
    );
    let rows: Vec<Vec<ExtReal>> = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][1], ExtReal::from_f64(3.0));
    for col in 0..4 {
        assert!(
            rows.windows(2).all(|w| w[0][col] <= w[1][col]),
            "column {col}"
        );
    }
}
