//! Compiles and runs a small C program against the generated header and
//! the static library, exercising bounds, measure handles, and the book.

use std::path::PathBuf;
use std::process::Command;

fn target_dir() -> PathBuf {
    // tests run from the workspace target profile dir's ancestor
    let exe = std::env::current_exe().expect("test exe path");
    // target/<profile>/deps/<test-bin> -> target/<profile>
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    let lib_dir = target_dir();
    let lib = lib_dir.join("libgtsim_capi.a");

    // `cargo test` compiles the lib as an rlib for the harness; the static
    // archive itself comes from a plain build, so refresh it here
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let build = Command::new(cargo)
        .args(["build", "-p", "gtsim-capi"])
        .current_dir(&manifest)
        .output()
        .expect("invoke cargo build");
    assert!(
        build.status.success(),
        "cargo build failed: {}",
        String::from_utf8_lossy(&build.stderr)
    );
    assert!(lib.exists(), "static library not built at {lib:?}");

    let scratch = tempfile::tempdir().expect("tempdir");
    let c_path = scratch.path().join("smoke.c");
    std::fs::write(
        &c_path,
        r#"
#include <stdio.h>
#include <string.h>
#include "gtsim.h"

int main(void) {
    double threshold = 0.0;
    if (gtsim_regret_threshold(7, 1000, 0.1, &threshold) != GtsimStatus_Ok) return 1;
    if (threshold < 253.0 || threshold > 255.0) return 2;

    if (gtsim_regret_threshold(7, 1000, 0.9, &threshold) != GtsimStatus_InvalidArgument) return 3;
    if (gtsim_last_error() == NULL) return 4;

    double w[4] = {0.1, 0.2, 0.3, 0.4};
    GtsimMeasure *m = gtsim_measure_new(2, 2, w, 4);
    if (m == NULL) return 5;
    size_t prefix[1] = {1};
    double marg = 0.0;
    if (gtsim_measure_marginal(m, prefix, 1, &marg) != GtsimStatus_Ok) return 6;
    if (marg < 0.699999 || marg > 0.700001) return 7;
    gtsim_measure_free(m);

    GtsimOrderBook *b = gtsim_book_new();
    uint64_t id = 0;
    if (gtsim_book_submit_limit(b, 0, 6000, 3, -1, &id) != GtsimStatus_Ok) return 8;
    GtsimFill fills[4];
    size_t count = 0;
    if (gtsim_book_submit_market(b, 1, 2, fills, 4, &count) != GtsimStatus_Ok) return 9;
    if (count != 1 || fills[0].qty != 2 || fills[0].price_ticks != 6000) return 10;
    gtsim_book_free(b);

    double plus = 0.0, minus = 0.0;
    if (gtsim_counter_example(3, 0.4, &plus, &minus) != GtsimStatus_Ok) return 11;
    if (plus != 0.4 || minus != 0.6) return 12;

    printf("gtsim %s ok\n", gtsim_version());
    return 0;
}
"#,
    )
    .expect("write C source");

    let bin = scratch.path().join("smoke");
    let compile = Command::new("cc")
        .arg(&c_path)
        .arg("-I")
        .arg(&include)
        .arg(lib)
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-lm")
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("invoke cc");
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().expect("run smoke binary");
    assert!(
        run.status.success(),
        "smoke exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("ok"));
}
