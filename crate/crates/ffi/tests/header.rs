//! Builds a C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "scatterx.h"

int main(void) {
    size_t e_shape[] = {4, 2, 4};
    int64_t e_data[32];
    for (int n = 0; n < 8; n++)
        for (int bit = 0; bit < 4; bit++)
            e_data[n * 4 + bit] = (n >> (3 - bit)) & 1;
    size_t a_shape[] = {4, 2};
    double a_data[] = {1, 2, 3, 4, 5, 6, 7, 8};
    size_t x_shape[] = {2, 2, 2, 2};
    double x_data[16] = {0};

    SxTensor *e = NULL, *a = NULL, *x = NULL, *b = NULL;
    if (sx_tensor_new_i64(e_shape, 3, e_data, 32, &e) != SX_STATUS_OK) return 10;
    if (sx_tensor_new_f64(a_shape, 2, a_data, 8, &a) != SX_STATUS_OK) return 11;
    if (sx_tensor_new_f64(x_shape, 4, x_data, 16, &x) != SX_STATUS_OK) return 12;

    SxScatterReport report;
    if (sx_scatter(e, a, x, SX_POLICY_LAST, &b, &report) != SX_STATUS_OK) return 13;
    double out[16];
    if (sx_tensor_copy_f64(b, out, 16) != SX_STATUS_OK) return 14;
    for (int i = 0; i < 16; i++)
        if (out[i] != (i < 8 ? i + 1 : 0)) return 15;
    if (report.writes != 8 || report.uncovered_targets != 8) return 16;

    SxTensor *c = NULL;
    if (sx_scatter(e, a, e, SX_POLICY_LAST, &c, NULL) != SX_STATUS_INVALID) return 17;
    if (sx_last_error() == NULL) return 18;

    char *text = NULL;
    if (sx_tensor_to_json(b, &text) != SX_STATUS_OK) return 19;
    printf("%s", text);
    sx_string_free(text);
    sx_tensor_free(e);
    sx_tensor_free(a);
    sx_tensor_free(x);
    sx_tensor_free(b);
    return 0;
}
"#;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>`, where the static library lands.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/scatterx.h")).unwrap();
    for name in [
        "typedef struct SxTensor SxTensor;",
        "SX_STATUS_COLLISION = 3",
        "SX_POLICY_LAST = 2",
        "sx_tensor_new_f64",
        "sx_tensor_new_i64",
        "sx_tensor_free",
        "sx_tensor_shape",
        "sx_tensor_copy_f64",
        "sx_tensor_from_json",
        "sx_tensor_to_json",
        "sx_string_free",
        "sx_scatter(",
        "sx_scatter_nd_update",
        "sx_torch_scatter",
        "sx_compose",
        "sx_analyze",
        "sx_last_error",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let lib = profile_dir().join("libscatterx_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("{\"dtype\":\"f64\",\"shape\":[2,2,2,2],\"data\":[1.0,2.0"), "{text}");
}
