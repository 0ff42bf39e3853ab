//! The generated header must compile as C and as C++ and agree with the Rust
//! enum values.

use std::path::PathBuf;
use std::process::Command;

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/echomem.h")
}

const PROGRAM: &str = r#"
#include "echomem.h"
_Static_assert(ECHOMEM_STATUS_OK == 0, "ok");
_Static_assert(ECHOMEM_STATUS_INVALID_INPUT == 2, "invalid");
_Static_assert(ECHOMEM_STATUS_PANIC == 15, "panic");
int use(void) {
    EchomemProtocol *p = 0;
    double re, im;
    EchomemAreaConfig cfg = {0.5, 3.14, 3.14, 1.0, 1.0, 1.0, 0};
    (void)cfg;
    return (int)echomem_protocol_transfer(p, 0.0, &re, &im);
}
"#;

fn compile(compiler: &str, lang: &str, extra: &[&str]) {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.src");
    std::fs::write(&src, PROGRAM.replace("_Static_assert", if lang == "c++" { "static_assert" } else { "_Static_assert" }))
        .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let out = Command::new(compiler)
        .args(["-x", lang, "-fsyntax-only", "-Wall", "-Werror"])
        .args(extra)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap_or_else(|e| panic!("{compiler} not runnable: {e}"));
    assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn header_is_present_and_declares_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in ["echomem_protocol_from_json", "echomem_protocol_echo", "echomem_last_error", "EchomemStatus"] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    compile("cc", "c", &["-std=c11"]);
}

#[test]
fn header_compiles_as_cpp() {
    compile("c++", "c++", &["-std=c++17"]);
}
