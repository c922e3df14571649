use std::path::{Path, PathBuf};

use tempfile::TempDir;

const HADAMARD_COIN: &str = r#"[[[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
                 [[0.7071067811865476, 0.0], [-0.7071067811865476, 0.0]]]"#;
const IDENTITY_COIN: &str = r#"[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]"#;
const DELTA_E1: &str = r#"{"type": "pure", "amplitudes": [{"position": [0], "coin": [[1.0, 0.0], [0.0, 0.0]]}]}"#;

fn config_1d(coin: &str, initial: &str) -> String {
    format!(
        r#"{{"dimension": 1, "coin_size": 2,
            "shifts": [[{{"num": 1, "den": 1}}], [{{"num": -1, "den": 1}}]],
            "coin": {coin}, "initial": {initial}, "n": 3, "seed": 5}}"#
    )
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture { dir: tempfile::tempdir().unwrap() }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["qwalk"];
    full.extend_from_slice(args);
    qwalk::cli::run(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# qwalk "));
    lines.skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn simulate_rescaled_and_raw() {
    let fx = Fixture::new();
    let cfg = fx.write("h.json", &config_1d(HADAMARD_COIN, DELTA_E1));
    let out = fx.path("d.csv");
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]), 0);
    let rows = data_rows(&out);
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(xs, vec![-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0]);

    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out), "--raw"]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap() == "coord_1,mass");
    assert_eq!(data_rows(&out).len(), 4);

    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out), "--n", "0"]), 0);
    assert_eq!(data_rows(&out), vec![vec!["0".to_string(), "1".to_string()]]);
}

#[test]
fn exit_codes() {
    let fx = Fixture::new();
    let bad = fx.write("bad.json", "{ not json");
    let out = fx.path("x.csv");
    assert_eq!(run(&["simulate", "--config", s(&bad), "--out", s(&out)]), 2);

    let non_unitary = config_1d(r#"[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]]"#, DELTA_E1);
    let cfg = fx.write("nu.json", &non_unitary);
    assert_eq!(run(&["simulate", "--config", s(&cfg), "--out", s(&out)]), 2);

    let missing = fx.path("missing.json");
    assert_eq!(run(&["simulate", "--config", s(&missing), "--out", s(&out)]), 3);

    let good = fx.write("h.json", &config_1d(HADAMARD_COIN, DELTA_E1));
    let unwritable = fx.path("no/such/dir/out.csv");
    assert_eq!(run(&["simulate", "--config", s(&good), "--out", s(&unwritable)]), 3);
}

#[test]
fn spectrum_export() {
    let fx = Fixture::new();
    let id = fx.write("id.json", &config_1d(IDENTITY_COIN, DELTA_E1));
    let out = fx.path("spec.csv");
    assert_eq!(run(&["spectrum", "--config", s(&id), "--out", s(&out), "--k-points", "256"]), 0);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 512);
    for r in &rows {
        if r[4].is_empty() {
            continue;
        }
        let re: f64 = r[2].parse().unwrap();
        let pi: f64 = r[4].parse().unwrap();
        // e^{−ik} belongs to shift +1, e^{+ik} to −1
        let k: f64 = r[0].parse().unwrap();
        let expected = if (re - k.cos()).abs() < 1e-9 && r[3].parse::<f64>().unwrap() * k.sin() <= 0.0 { 1.0 } else { -1.0 };
        assert_eq!(pi.abs(), 1.0);
        assert_eq!(pi, expected);
    }

    let h = fx.write("h.json", &config_1d(HADAMARD_COIN, DELTA_E1));
    assert_eq!(
        run(&["spectrum", "--config", s(&h), "--out", s(&out), "--k-points", "3", "--k-from", "0", "--k-to", "1"]),
        0
    );
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 6);
    let mut at_zero: Vec<f64> = rows[..2].iter().map(|r| r[4].parse().unwrap()).collect();
    at_zero.sort_by(f64::total_cmp);
    assert!((at_zero[0] + 0.7071067811865475).abs() < 1e-12);
    assert!((at_zero[1] - 0.7071067811865475).abs() < 1e-12);
}

#[test]
fn spectrum_marks_degenerate_rows() {
    let fx = Fixture::new();
    let id = fx.write("id.json", &config_1d(IDENTITY_COIN, DELTA_E1));
    let out = fx.path("spec.csv");
    assert_eq!(run(&["spectrum", "--config", s(&id), "--out", s(&out), "--k-points", "3"]), 0);
    // path −π, 0, π: all three are crossings of e^{∓ik}
    for r in data_rows(&out) {
        assert_eq!(r[4], "");
        assert!(r[5].parse::<f64>().unwrap() < 1e-8);
    }
}

#[test]
fn limit_of_ballistic_walk_is_one_atom() {
    let fx = Fixture::new();
    let id = fx.write("id.json", &config_1d(IDENTITY_COIN, DELTA_E1));
    let out = fx.path("limit.csv");
    assert_eq!(run(&["limit", "--config", s(&id), "--out", s(&out)]), 0);
    assert_eq!(data_rows(&out), vec![vec!["1".to_string(), "1".to_string()]]);
    let header = std::fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("# qwalk limit config_hash="));
    assert!(header.lines().next().unwrap().contains("grid=4096"));
}

#[test]
fn sampling_is_reproducible() {
    let fx = Fixture::new();
    let mixed = fx.write("m.json", &config_1d(HADAMARD_COIN, r#"{"type": "origin_mixed"}"#));
    let (a, b) = (fx.path("a.csv"), fx.path("b.csv"));
    assert_eq!(run(&["sample", "--config", s(&mixed), "--out", s(&a), "--count", "10"]), 0);
    assert_eq!(run(&["sample", "--config", s(&mixed), "--out", s(&b), "--count", "10"]), 0);
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    assert_eq!(data_rows(&a).len(), 10);
    assert_eq!(run(&["sample", "--config", s(&mixed), "--out", s(&b), "--count", "10", "--seed", "6"]), 0);
    assert_ne!(ta, std::fs::read(&b).unwrap());
    assert!(String::from_utf8(ta).unwrap().contains("seed=5"));
}

#[test]
fn sampling_general_state_uses_quadrature() {
    let fx = Fixture::new();
    let cfg = fx.write("h.json", &config_1d(HADAMARD_COIN, DELTA_E1));
    let out = fx.path("s.csv");
    assert_eq!(run(&["sample", "--config", s(&cfg), "--out", s(&out), "--count", "50", "--k-grid", "512"]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().contains("method=inverse_cdf"));
    for r in data_rows(&out) {
        assert!(r[0].parse::<f64>().unwrap().abs() <= 0.7071067811865476 + 1e-12);
    }
}

#[test]
fn converge_report() {
    let fx = Fixture::new();
    let cfg = fx.write("h.json", &config_1d(HADAMARD_COIN, DELTA_E1));
    let out = fx.path("conv.csv");
    assert_eq!(run(&["converge", "--config", s(&cfg), "--out", s(&out), "--n-list", "50,100,200,400,800"]), 0);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 5);
    let ks: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(ks[4] < ks[0]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "n,ks,cf_sup,mean_err,m2_err");

    let again = fx.path("conv2.csv");
    assert_eq!(run(&["converge", "--config", s(&cfg), "--out", s(&again), "--n-list", "50,100,200,400,800"]), 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());

    assert_eq!(run(&["converge", "--config", s(&cfg), "--out", s(&out), "--n-list", "100,50"]), 2);
}

#[test]
fn converge_in_two_dimensions_leaves_ks_empty() {
    let fx = Fixture::new();
    let grover = r#"{"dimension": 2, "coin_size": 4,
        "shifts": [[{"num": 1, "den": 1}, {"num": 0, "den": 1}], [{"num": -1, "den": 1}, {"num": 0, "den": 1}],
                   [{"num": 0, "den": 1}, {"num": 1, "den": 1}], [{"num": 0, "den": 1}, {"num": -1, "den": 1}]],
        "coin": [[[-0.5, 0], [0.5, 0], [0.5, 0], [0.5, 0]], [[0.5, 0], [-0.5, 0], [0.5, 0], [0.5, 0]],
                 [[0.5, 0], [0.5, 0], [-0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0], [0.5, 0], [-0.5, 0]]],
        "initial": {"type": "origin_mixed"}, "k_grid": 64,
        "omega_grid": {"min": -1.0, "max": 1.0, "step": 0.5}}"#;
    let cfg = fx.write("g.json", grover);
    let out = fx.path("conv.csv");
    assert_eq!(run(&["converge", "--config", s(&cfg), "--out", s(&out), "--n-list", "5,10"]), 0);
    for r in data_rows(&out) {
        assert_eq!(r[1], "");
    }
}
