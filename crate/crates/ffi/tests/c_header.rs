//! Compiles and runs a small C program against the generated header and the
//! static library. Skipped when no C compiler is on the PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "bdris.h"

int main(void) {
    BdrisConfig *cfg = NULL;
    if (bdris_config_new(32, BDRIS_MODE_REFLECTIVE, 0, BDRIS_ARCHITECTURE_FULLY_CONNECTED, 0, &cfg) != BDRIS_STATUS_OK)
        return 1;
    uint64_t n = 0;
    if (bdris_circuit_complexity(cfg, &n) != BDRIS_STATUS_OK || n != 528)
        return 2;
    BdrisScene scene;
    bdris_scene_default(&scene);
    BdrisState *state = NULL;
    if (bdris_state_random(cfg, 1, &state) != BDRIS_STATUS_OK)
        return 3;
    int passed = 0;
    double dev = 0.0;
    bdris_state_validate(state, 1e-9, &passed, &dev);
    if (!passed)
        return 4;
    BdrisConfig *bad = NULL;
    if (bdris_config_new(31, BDRIS_MODE_HYBRID, 0, BDRIS_ARCHITECTURE_SINGLE_CONNECTED, 0, &bad) != BDRIS_STATUS_INVALID_CONFIG)
        return 5;
    printf("%s\n", bdris_last_error_message());
    bdris_state_free(state);
    bdris_config_free(cfg);
    return 0;
}
"#;

fn lib_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib = lib_dir().join("libbdris_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "C program exited with {:?}", run.status.code());
    let msg = String::from_utf8_lossy(&run.stdout);
    assert!(!msg.trim().is_empty(), "no error message printed");
}
