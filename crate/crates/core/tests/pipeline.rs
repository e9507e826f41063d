use std::path::PathBuf;
use std::process::Command;

use m2galois::cli::{run_find, RunConfig};
use m2galois::finder::{classify, render_text, Finder, ListKind, RepType};
use m2galois::gf2k::{BinaryField, FieldElem};
use m2galois::heckepoly::{load_packet_files, PacketFile};
use m2galois::newforms::{parse_db, NewformDb};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn db() -> NewformDb {
    parse_db(&std::fs::read_to_string(fixture("newforms.json")).unwrap(), &[3, 5, 7, 11, 13, 17]).unwrap()
}

fn packets() -> Vec<PacketFile> {
    load_packet_files(&fixture("s5_packets.json")).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_m2galois"))
}

#[test]
fn supplied_reductions_match_computed_ones() {
    let db = db();
    let mut checked = 0;
    for rec in db.records.iter().filter(|r| !r.reductions.is_empty()) {
        let Ok(data) = rec.order.decompose_mod2() else { continue };
        let mut ours = Vec::new();
        let mut reducible = true;
        for (n, p) in data.ideals.iter().enumerate() {
            let field = p.residue_field();
            let traces: Result<Vec<(u64, FieldElem)>, _> =
                rec.a.iter().map(|(&l, x)| data.reduce_elem(x, n, field, 0).map(|v| (l, v))).collect();
            match traces {
                Ok(t) => ours.push((p.e, p.f, t)),
                Err(_) => reducible = false,
            }
        }
        if !reducible {
            continue;
        }
        let mut ef_ours: Vec<(u32, u32)> = ours.iter().map(|(e, f, _)| (*e, *f)).collect();
        let mut ef_theirs: Vec<(u32, u32)> = rec.reductions.iter().map(|r| (r.e, r.f)).collect();
        ef_ours.sort();
        ef_theirs.sort();
        assert_eq!(ef_ours, ef_theirs, "{}", rec.label);
        // each supplied trace vector is a Frobenius conjugate of one of ours
        for r in &rec.reductions {
            let field = BinaryField::new(r.f).unwrap();
            let theirs: Vec<(u64, FieldElem)> = r
                .a_mod2
                .iter()
                .map(|(k, &v)| (k.parse().unwrap(), field.elem(v).unwrap()))
                .collect();
            let found = ours.iter().filter(|(e, f, _)| (*e, *f) == (r.e, r.f)).any(|(_, _, t)| {
                (0..r.f).any(|j| {
                    theirs
                        .iter()
                        .all(|(l, v)| t.iter().any(|(m, w)| m == l && w.frobenius(j) == *v))
                })
            });
            assert!(found, "{}: ideal {} has no matching conjugate", rec.label, r.ideal);
        }
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} records cross-checked");
}

#[test]
fn withheld_weight_four_data_fails_with_quadratic_residual() {
    let mut db = db();
    // 13.4.0.b is congruent to 13.4.0.a, so both go; coverage stays
    db.records.retain(|r| (r.level, r.weight) != (13, 4));
    let cfg = RunConfig {
        levels: Some(vec![13]),
        lists: vec![ListKind::ChiS],
        ..RunConfig::default()
    };
    let reports = run_find(&packets(), &cfg, &db).unwrap();
    let rep = &reports[0];
    let failed: Vec<_> = rep.chis.iter().filter(|r| !r.success).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(classify(failed[0]), RepType::Failure);
    assert!(failed[0].residual.iter().all(|(_, p)| p.degree() == Some(2)));
    assert!(render_text(&reports).contains("failure"));
}

#[test]
fn search_fallback_recovers_congruent_sums() {
    // 27.2.0.a + 27.4.0.b: the pair of cubic characters of conductor 9
    // divides the sum at every prime, which strands the greedy pass
    let db = db();
    let field = BinaryField::new(12).unwrap();
    let finder = Finder::new(27, field, &[3, 5, 7, 11, 13, 17], &db).unwrap();
    let forms = finder.chis_forms().unwrap();
    let pick = |label: &str| forms.iter().find(|c| c.block.reference().to_string().starts_with(label)).unwrap();
    let sys = pick("27.2.0.a").system.mul(&pick("27.4.0.b").system).unwrap();
    let rep = finder.find(&sys, ListKind::ChiS).unwrap();
    assert!(rep.success && rep.backtracked);
    assert_eq!(rep.product_system(), sys);
    assert_eq!(rep.total_degree(), 4);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let db = db();
    let files = packets();
    let run = |jobs| {
        let cfg = RunConfig {
            jobs: Some(jobs),
            ..RunConfig::default()
        };
        let reports = run_find(&files, &cfg, &db).unwrap();
        (serde_json::to_string(&reports).unwrap(), render_text(&reports))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn empty_input_gives_empty_report() {
    let reports = run_find(&[], &RunConfig::default(), &db()).unwrap();
    assert!(reports.is_empty());
    assert!(render_text(&reports).is_empty());
}

#[test]
fn cli_report_matches_library() {
    let out = bin()
        .args(["report", "--levels", "11,59", "--packets"])
        .arg(fixture("s5_packets.json"))
        .arg("--newforms")
        .arg(fixture("newforms.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg = RunConfig {
        levels: Some(vec![11, 59]),
        ..RunConfig::default()
    };
    let expected = render_text(&run_find(&packets(), &cfg, &db()).unwrap());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn cli_refine_then_find() {
    let dir = tempfile::tempdir().unwrap();
    let refined = dir.path().join("packets.json");
    let status = bin()
        .arg("refine")
        .arg("--matrices")
        .arg(fixture("level59_operators.json"))
        .arg("--out")
        .arg(&refined)
        .status()
        .unwrap();
    assert!(status.success());
    let files = load_packet_files(&refined).unwrap();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].packets.len(), 6);
    let report = dir.path().join("report.json");
    let status = bin()
        .args(["--jobs", "2", "find", "--list", "chis", "--packets"])
        .arg(&refined)
        .arg("--newforms")
        .arg(fixture("newforms.json"))
        .arg("--out")
        .arg(&report)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let types: Vec<&str> = json[0]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["type"].as_str().unwrap())
        .collect();
    assert_eq!(types.iter().filter(|t| **t == "II").count(), 4);
}

#[test]
fn cli_coset_reps_and_errors() {
    let out = bin().args(["coset-reps", "--ell", "3", "--k", "2"]).output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["matrices"].as_array().unwrap().len(), 130);

    let out = bin().args(["coset-reps", "--ell", "4", "--k", "1"]).output().unwrap();
    assert!(!out.status.success());

    let out = bin().args(["report", "--packets", "/nonexistent/packets.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
