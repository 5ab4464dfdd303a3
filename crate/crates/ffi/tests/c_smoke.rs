//! Compiles and runs tests/smoke.c against the generated header and the
//! built shared library, proving the ABI from the C side.

use std::path::PathBuf;
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn target_dir() -> PathBuf {
    // Integration tests run from target/<profile>/deps; the workspace
    // target directory is two levels up from the test binary.
    let exe = std::env::current_exe().expect("test binary path");
    exe.ancestors()
        .nth(2)
        .expect("profile directory")
        .to_path_buf()
}

#[test]
fn c_program_runs_against_the_header_and_library() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_string());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler available");
        return;
    }

    // Make sure the cdylib artifact exists (plain `cargo test` only builds
    // the rlib for the harness).
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".to_string());
    let build = Command::new(&cargo)
        .args(["build", "-p", "spectrum-sim-ffi"])
        .current_dir(manifest_dir())
        .status()
        .expect("cargo build runs");
    assert!(build.success(), "building the cdylib failed");

    let profile_dir = target_dir();
    let dylib = profile_dir.join("libspectrum_sim_ffi.so");
    assert!(dylib.exists(), "missing {}", dylib.display());

    let include = manifest_dir().join("include");
    assert!(include.join("spectrum_sim.h").exists());
    let source = manifest_dir().join("tests").join("smoke.c");
    let binary = profile_dir.join("spectrum_sim_c_smoke");

    let compile = Command::new(&cc)
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg(dylib.as_os_str())
        .arg("-o")
        .arg(&binary)
        .output()
        .expect("compiler runs");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary)
        .env("LD_LIBRARY_PATH", &profile_dir)
        .output()
        .expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke test failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    let _ = std::fs::remove_file(&binary);
}
