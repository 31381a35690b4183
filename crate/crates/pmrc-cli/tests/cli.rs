//! Binary-level tests: every subcommand, every exit code class.

use std::path::Path;
use std::process::{Command, Output};

fn pmrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pmrc_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmrc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

#[test]
fn params_reports_derived_values() {
    let out = pmrc(&["params", "--mode", "msr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1", "--ell-prime", "1"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("alpha=2"));
    assert!(text.contains("B=6"));
    assert!(text.contains("B_s=2"));
    assert!(text.contains("R=4"));
}

#[test]
fn usage_errors_exit_2() {
    // d < k is invalid for MBR.
    let out = pmrc(&["params", "--mode", "mbr", "--n", "6", "--k", "5", "--d", "4"]);
    assert_exit(&out, 2);
    // Unknown flag is a clap error.
    let out = pmrc(&["params", "--bogus"]);
    assert_exit(&out, 2);
    // Unknown mode.
    let out = pmrc(&["params", "--mode", "rs", "--n", "6", "--k", "3", "--d", "4"]);
    assert_exit(&out, 2);
    // MSR below the supported regime.
    let out = pmrc(&["params", "--mode", "msr", "--n", "6", "--k", "4", "--d", "4"]);
    assert_exit(&out, 2);
}

fn write_input(dir: &Path, len: usize) -> Vec<u8> {
    let data: Vec<u8> = (0..len).map(|i| ((i * 31 + i / 257) % 256) as u8).collect();
    std::fs::write(dir.join("input.bin"), &data).unwrap();
    data
}

#[test]
fn encode_repair_reconstruct_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_input(tmp.path(), 3000);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "11"],
    );
    assert_exit(&out, 0);

    // Lose a node, repair it from explicit helpers.
    let node3 = tmp.path().join("dep/node_3.pmrc");
    let original_share = std::fs::read(&node3).unwrap();
    std::fs::remove_file(&node3).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["repair", "--dir", "dep", "--node", "3", "--helpers", "1,2,5,6"],
    );
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("4 symbols/stripe"));
    assert_eq!(std::fs::read(&node3).unwrap(), original_share);

    // Reconstruct through the repaired node.
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--nodes", "3,4,6", "--output", "out.bin"],
    );
    assert_exit(&out, 0);
    assert_eq!(std::fs::read(tmp.path().join("out.bin")).unwrap(), data);
}

#[test]
fn base_q_field_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_input(tmp.path(), 500);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "msr", "--n", "5", "--k", "3", "--d", "4", "--q", "11",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "1"],
    );
    assert_exit(&out, 0);
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--nodes", "1,3,5", "--output", "out.bin"],
    );
    assert_exit(&out, 0);
    assert_eq!(std::fs::read(tmp.path().join("out.bin")).unwrap(), data);
}

#[test]
fn corruption_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    write_input(tmp.path(), 1000);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "4", "--k", "2", "--d", "3", "--input", "input.bin",
          "--output-dir", "dep", "--seed", "2"],
    );
    assert_exit(&out, 0);

    // Tampered manifest.
    let manifest_path = tmp.path().join("dep/manifest.txt");
    let manifest = std::fs::read_to_string(&manifest_path).unwrap();
    std::fs::write(&manifest_path, manifest.replace("n=4", "n=5")).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--output", "out.bin"],
    );
    assert_exit(&out, 3);
    std::fs::write(&manifest_path, &manifest).unwrap();

    // Tampered share payload: decoding now disagrees with the content digest.
    let share_path = tmp.path().join("dep/node_1.pmrc");
    let mut share = std::fs::read(&share_path).unwrap();
    let last = share.len() - 1;
    share[last] ^= 1;
    std::fs::write(&share_path, &share).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--nodes", "1,2", "--output", "out.bin"],
    );
    assert_exit(&out, 3);

    // Truncated share file.
    std::fs::write(&share_path, &share[..30]).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--nodes", "1,2", "--output", "out.bin"],
    );
    assert_exit(&out, 3);

    // Missing input file.
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "4", "--k", "2", "--d", "3", "--input", "nope.bin",
          "--output-dir", "dep2"],
    );
    assert_exit(&out, 3);
}

#[test]
fn audit_exit_codes() {
    let out = pmrc(&["audit", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1", "--verbose"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("zero leakage everywhere"));

    let out = pmrc(&["audit", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--audit-ell", "1"]);
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("SECRECY VIOLATION"));

    // Brute-force cross-check on a tiny code.
    let out = pmrc(&["audit", "--mode", "mbr", "--n", "3", "--k", "2", "--d", "2", "--ell", "1", "--q", "3", "--brute-force"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("brute-force cross-check"));

    // Too large to enumerate.
    let out = pmrc(&["audit", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1", "--brute-force"]);
    assert_exit(&out, 2);
}

#[test]
fn audit_a_deployment_directory() {
    let tmp = tempfile::tempdir().unwrap();
    write_input(tmp.path(), 100);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "3"],
    );
    assert_exit(&out, 0);
    let out = pmrc_in(tmp.path(), &["audit", "--dir", "dep"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("6 specs"));
}

#[test]
fn simulate_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("ok.txt"),
        "FAIL 2\nREPAIR 2\nFAIL 1\nREPAIR 1 POLICY adversary-avoiding\nCOLLECT 1,2,3\n",
    )
    .unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["simulate", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--script", "ok.txt", "--adversary", "2", "--seed", "4"],
    );
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("leakage 0 q-ary units (within design budget)"));
    assert!(text.contains("collect #1"));

    // Script errors are usage errors.
    std::fs::write(tmp.path().join("bad.txt"), "EXPLODE 1\n").unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["simulate", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4",
          "--script", "bad.txt"],
    );
    assert_exit(&out, 2);

    // Missing script file is an I/O error.
    let out = pmrc_in(
        tmp.path(),
        &["simulate", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4",
          "--script", "missing.txt"],
    );
    assert_exit(&out, 3);
}

#[test]
fn env_seed_fallback_makes_encoding_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    write_input(tmp.path(), 400);
    for dir in ["a", "b"] {
        let out = Command::new(env!("CARGO_BIN_EXE_pmrc"))
            .current_dir(tmp.path())
            .env("PMRC_SEED", "99")
            .args(["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
                   "--input", "input.bin", "--output-dir", dir])
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    for i in 1..=6 {
        let a = std::fs::read(tmp.path().join(format!("a/node_{i}.pmrc"))).unwrap();
        let b = std::fs::read(tmp.path().join(format!("b/node_{i}.pmrc"))).unwrap();
        assert_eq!(a, b, "node {i}");
    }
    // A bad env seed is a usage error.
    let out = Command::new(env!("CARGO_BIN_EXE_pmrc"))
        .current_dir(tmp.path())
        .env("PMRC_SEED", "not-a-number")
        .args(["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4",
               "--input", "input.bin", "--output-dir", "c"])
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn encoded_shares_match_a_library_recomputation() {
    use pmrc::gf::SeededSource;
    use pmrc_cli::{bytes, manifest::Manifest, sharefile::ShareFile};

    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("input.bin"), [10u8, 20, 30, 40, 50]).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "7"],
    );
    assert_exit(&out, 0);

    // Replay the pipeline through the library and demand byte-equal shares.
    let text = std::fs::read_to_string(tmp.path().join("dep/manifest.txt")).unwrap();
    let manifest = Manifest::from_text(&text).unwrap();
    let code = manifest.code().unwrap();
    let q = code.modulus();
    let b_s = code.secrecy().b_s;
    let mut symbols = bytes::bytes_to_symbols(&[10, 20, 30, 40, 50], manifest.q).unwrap();
    assert_eq!(symbols.len(), 6); // five bytes plus the sentinel
    assert_eq!(manifest.stripes, 2);
    symbols.resize(manifest.stripes * b_s, 0);

    let mut source = SeededSource::new(7);
    let mut expected: Vec<Vec<u64>> = vec![Vec::new(); code.params().n];
    for chunk in symbols.chunks(b_s) {
        let message: Vec<_> = chunk.iter().map(|&v| q.element(v)).collect();
        for share in code.encode(&message, &mut source).unwrap() {
            expected[share.node_id - 1].extend(share.symbols.iter().map(|e| e.value()));
        }
    }
    for node in 1..=code.params().n {
        let raw = std::fs::read(tmp.path().join(format!("dep/node_{node}.pmrc"))).unwrap();
        let share = ShareFile::from_bytes(&raw, manifest.q).unwrap();
        assert_eq!(share.symbols, expected[node - 1], "node {node}");
    }
}

#[test]
fn reconstruct_from_every_k_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_input(tmp.path(), 64);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "5"],
    );
    assert_exit(&out, 0);
    for a in 1..=6u32 {
        for b in (a + 1)..=6 {
            for c in (b + 1)..=6 {
                let nodes = format!("{a},{b},{c}");
                let out = pmrc_in(
                    tmp.path(),
                    &["reconstruct", "--dir", "dep", "--nodes", &nodes, "--output", "out.bin"],
                );
                assert_exit(&out, 0);
                assert_eq!(std::fs::read(tmp.path().join("out.bin")).unwrap(), data, "{nodes}");
            }
        }
    }
}

#[test]
fn wrong_share_counts_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    write_input(tmp.path(), 100);
    let out = pmrc_in(
        tmp.path(),
        &["encode", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--input", "input.bin", "--output-dir", "dep", "--seed", "6"],
    );
    assert_exit(&out, 0);

    // k - 1 nodes.
    let out = pmrc_in(
        tmp.path(),
        &["reconstruct", "--dir", "dep", "--nodes", "1,2", "--output", "out.bin"],
    );
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("exactly k = 3"));

    // d - 1 helpers, then a node helping itself.
    let out = pmrc_in(tmp.path(), &["repair", "--dir", "dep", "--node", "3", "--helpers", "1,2,5"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("exactly d = 4"));
    let out = pmrc_in(tmp.path(), &["repair", "--dir", "dep", "--node", "3", "--helpers", "1,2,3,5"]);
    assert_exit(&out, 2);
}

#[test]
fn simulate_traffic_accounting() {
    let tmp = tempfile::tempdir().unwrap();

    // Repairing every node once moves n*d*beta = 24 symbols; two storage
    // taps exceed the ell = 1 budget, so the leak is reported as expected.
    let mut script = String::new();
    for node in 1..=6 {
        script.push_str(&format!("FAIL {node}\nREPAIR {node}\n"));
    }
    std::fs::write(tmp.path().join("all.txt"), script).unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["simulate", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--script", "all.txt", "--adversary", "1,2", "--seed", "8"],
    );
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("traffic: 24 repair symbols, 0 collect symbols"));
    assert!(text.contains("beyond design budget"));
    assert!(text.contains("note: leakage beyond the design budget is expected"));

    // An empty scenario moves nothing.
    std::fs::write(tmp.path().join("empty.txt"), "# nothing\n").unwrap();
    let out = pmrc_in(
        tmp.path(),
        &["simulate", "--mode", "mbr", "--n", "6", "--k", "3", "--d", "4", "--ell", "1",
          "--script", "empty.txt"],
    );
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("traffic: 0 repair symbols, 0 collect symbols"));
}
