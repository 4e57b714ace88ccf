use std::path::Path;
use std::process::Command;

/// The generated header compiles as C and as C++.
#[test]
fn header_compiles() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/brwre.h");
    assert!(header.exists(), "header was not generated");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"brwre.h\"\nint main(void) { BrwreLaw *l = 0; brwre_law_free(l); return BRWRE_STATUS_OK; }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(dir.join("include"))
            .arg(&src)
            .output()
        else {
            eprintln!("{compiler} not found, skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
