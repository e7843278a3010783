//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "anticip.h"

int main(void) {
    AnticipSpectrum *sd = NULL;
    if (anticip_spectrum_model_new(ANTICIP_MODEL_KIND_ALT_PERIODIC, 16, 1.0, &sd) != ANTICIP_STATUS_OK) return 1;
    AnticipProbabilities *probs = NULL;
    if (anticip_probabilities_new(sd, 0, 0, true, &probs) != ANTICIP_STATUS_OK) return 2;
    double p8 = 0.0, want = 0.0;
    anticip_probabilities_get(probs, 8, &p8);
    anticip_model_pn(ANTICIP_MODEL_KIND_ALT_PERIODIC, 16, 1.0, 8, &want);
    if (fabs(p8 - want) > 1e-14) return 3;
    anticip_probabilities_free(probs);
    anticip_spectrum_free(sd);
    if (anticip_spectrum_model_new(ANTICIP_MODEL_KIND_ALT_PERIODIC, 5, 1.0, &sd) != ANTICIP_STATUS_INVALID_MODEL) return 4;
    char msg[128];
    anticip_last_error(msg, sizeof msg);
    printf("%.17g %s\n", p8, msg);
    return 0;
}
"#;

/// `cargo test` links the rlib only, so the static library is built here.
fn static_library() -> PathBuf {
    let target = Path::new(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let status = Command::new(cargo)
        .args(["build", "--quiet", "-p", "anticip-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .status()
        .expect("cargo available");
    assert!(status.success());
    target.join("debug").join("libanticip_ffi.a")
}

#[test]
fn header_compiles_and_links() {
    let lib = static_library();
    assert!(lib.exists(), "{} missing", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = tmp.join("abi_check.c");
    let bin = tmp.join("abi_check");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("half the step size"), "{text}");
}
