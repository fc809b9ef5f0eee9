use std::path::PathBuf;
use std::process::Command;

use statedisc::io;
use statedisc_cli::{run, EXIT_OK, EXIT_VALIDATION};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_str().unwrap().to_string()
}

fn scratch(name: &str) -> String {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name).to_str().unwrap().to_string()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("statedisc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no line starting with {key:?} in\n{out}"))
        .trim()
        .to_string()
}

fn summary_min(out: &str) -> String {
    let line = out.lines().find(|l| l.starts_with("minimal copies")).expect("summary line");
    line.rsplit(": ").next().unwrap().to_string()
}

#[test]
fn bounds_examples() {
    let (code, out, _) = cli(&["bounds", "--N", "16", "--F", "0.5", "--eps", "0.0625"]);
    assert_eq!(code, EXIT_OK);
    assert!(field(&out, "n_upper").starts_with("16 "));
    let (_, out, _) = cli(&["bounds", "--N", "4", "--eta", "0.5", "--lambda", "0.5", "--d", "4"]);
    assert!(field(&out, "n_lower").starts_with("1 "));
    let (_, out, _) = cli(&["bounds", "--N", "4", "--eta", "0.5", "--lambda", "0.25", "--d", "4", "--json"]);
    assert!(field(&out, "n_lower").starts_with("no finite bound"));
    assert!(out.contains("\"n_lower\": \"no finite bound\""));
}

#[test]
fn bounds_validation_names_the_flag() {
    let (code, _, err) = cli(&["bounds", "--N", "2", "--F", "1.5", "--eps", "0.1"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("--F") && err.contains("(0, 1)"), "{err}");
    let (code, _, err) = cli(&["bounds", "--N", "4", "--eta", "0.5", "--lambda", "0.1", "--d", "4"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("--lambda"), "{err}");
    let (code, _, _) = cli(&["bounds"]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, _, _) = cli(&["bounds", "--N", "x"]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn discriminate_examples() {
    let (code, out, _) = cli(&["discriminate", &data("orthogonal.json")]);
    assert_eq!(code, EXIT_OK);
    assert!((field(&out, "worst_case").parse::<f64>().unwrap() - 1.0).abs() < 1e-9);

    let (_, out, _) = cli(&["discriminate", &data("zero_plus.json"), "--method", "minimax"]);
    assert!((field(&out, "primal").parse::<f64>().unwrap() - 0.853553).abs() < 1e-3);

    // ½(1 + √(1 − 2^{-3})) = 0.967707
    let (_, out, _) = cli(&["discriminate", &data("zero_plus.json"), "--copies", "3", "--method", "minimax", "--out", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["method"], "minimax");
    let primal = v["primal_value"].as_f64().unwrap();
    assert!((primal - 0.5 * (1.0 + 0.875f64.sqrt())).abs() < 1e-3);
    assert!(primal <= v["dual_value"].as_f64().unwrap() + 1e-9);

    let (_, out, _) = cli(&["discriminate", &data("zero_plus.json"), "--out", "csv"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,worst_case,average,bk_bound,method"));
    assert!(lines.next().unwrap().starts_with("1,0.853553390593,0.853553390593,0.292893218813,pgm"));
}

#[test]
fn discriminate_errors() {
    let (code, _, err) = cli(&["discriminate", &data("bad_trace.json")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("$.states[1]") && err.contains("trace"), "{err}");
    let (code, _, err) = cli(&["discriminate", &data("zero_plus.json"), "--copies", "13"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("d = 2") && err.contains("n = 13") && err.contains("4096"), "{err}");
    let (code, _, _) = cli(&["discriminate", &data("zero_plus.json"), "--copies", "13", "--dim-cap", "8192"]);
    assert_eq!(code, EXIT_OK);
    let (code, _, _) = cli(&["discriminate", &data("missing.json")]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn sweep_examples() {
    let (code, out, _) = cli(&["sweep", &data("orthogonal.json"), "--epsilon", "0.1", "--n-max", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(summary_min(&out), "1");

    let csv_path = scratch("zero_plus.csv");
    let (_, out, _) =
        cli(&["sweep", &data("zero_plus.json"), "--eps", "0.05", "--method", "minimax", "--n-max", "8", "--csv", &csv_path]);
    assert_eq!(summary_min(&out), "3");
    let upper = out.lines().find(|l| l.starts_with("predicted sufficient")).unwrap();
    assert!(upper.ends_with(": 11"), "{upper}");

    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i + 1);
        for k in 1..4 {
            let p: f64 = r[k].parse().unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
        assert_eq!(&r[4], "minimax");
    }
}

#[test]
fn sweep_reports_search_ceiling() {
    let (code, out, _) = cli(&["sweep", &data("zero_plus.json"), "--eps", "0.001", "--n-max", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(summary_min(&out), "exceeds n_max = 3");
    let (code, _, err) = cli(&["sweep", &data("zero_plus.json"), "--n-max", "13"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("4096"), "{err}");
}

#[test]
fn hsp_examples() {
    let (code, out, _) = cli(&["hsp", "--family", "cyclic:2", "--all-subgroups", "--eps", "0.1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "subgroups (N)"), "2");
    assert_eq!(field(&out, "max pairwise F"), "0.500000000000");
    assert_eq!(field(&out, "n_upper"), "9");

    let (_, out, _) = cli(&["hsp", "--family", "cyclic:4", "--all-subgroups", "--n-max", "2"]);
    assert_eq!(field(&out, "subgroups (N)"), "3");
    assert_eq!(field(&out, "dimension"), "4");

    let (_, out, _) = cli(&["hsp", "--family", "cyclic:1", "--all-subgroups"]);
    assert_eq!(field(&out, "subgroups (N)"), "1");
    assert_eq!(summary_min(&out), "1");

    let (_, out, _) = cli(&["hsp", "--family", "cyclic:4", "--subgroups", &data("z4_pair.json"), "--eps", "0.1"]);
    assert_eq!(summary_min(&out), "4");
}

#[test]
fn hsp_errors() {
    let (code, _, err) = cli(&["hsp", "--family", "cyclic:65", "--all-subgroups"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("64"), "{err}");
    let (code, _, err) = cli(&["hsp", "--family", "dihedral:4", "--all-subgroups", "--n-max", "5"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("--n-max"), "{err}");
    let (code, _, _) = cli(&["hsp", "--family", "square:3", "--all-subgroups"]);
    assert_eq!(code, EXIT_VALIDATION);
    let (code, _, _) = cli(&["hsp", "--family", "cyclic:3"]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn generated_files_round_trip() {
    let (code, out, _) = cli(&["gen-ensemble", "--states", "3", "--dim", "3", "--rank", "2"]);
    assert_eq!(code, EXIT_OK);
    let ens = io::parse_ensemble(&out).unwrap();
    assert_eq!((ens.len(), ens.dim()), (3, 3));
    assert_eq!(io::ensemble_to_json(&ens), out.trim_end());
    let (_, again, _) = cli(&["gen-ensemble", "--states", "3", "--dim", "3", "--rank", "2", "--seed", "42"]);
    assert_eq!(out, again);
    let (_, other, _) = cli(&["gen-ensemble", "--states", "3", "--dim", "3", "--rank", "2", "--seed", "7"]);
    assert_ne!(out, other);

    let path = scratch("d4.json");
    assert_eq!(cli(&["gen-group", "--family", "dihedral:4", "-o", &path]).0, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    let g = io::parse_group(&text).unwrap();
    assert_eq!(io::group_to_json(&g), text);
    let (_, subs, _) = cli(&["subgroups", "--group", &path]);
    assert_eq!(io::parse_subgroups(&subs, &g).unwrap().len(), 10);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_statedisc");
    let ok = Command::new(bin).args(["bounds", "--N", "2", "--F", "0.5", "--eps", "0.1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["bounds", "--N", "2", "--F", "0", "--eps", "0.1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
