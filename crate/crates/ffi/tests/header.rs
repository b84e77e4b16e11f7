use std::path::Path;
use std::process::Command;

const EXPORTS: &[&str] = &[
    "sympidx_last_error",
    "sympidx_version",
    "sympidx_matrix_new",
    "sympidx_matrix_from_json",
    "sympidx_matrix_free",
    "sympidx_rho",
    "sympidx_path_new",
    "sympidx_path_from_json",
    "sympidx_path_free",
    "sympidx_mean_index",
    "sympidx_cz_index",
    "sympidx_loop_from_json",
    "sympidx_loop_free",
    "sympidx_maslov_index",
    "sympidx_ellipsoid",
];

fn header() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("sympidx.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).expect("header generated by the build script");
    for name in EXPORTS {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct SympidxPath SympidxPath;"));
    assert!(text.contains("SYMPIDX_STATUS_NUMERICAL = 3"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(header())
        .output()
    else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
