//! Compiles and runs a small C program against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "wmsteg.h"

int main(void) {
    WmKey *key = NULL;
    if (wm_key_generate("spread-spatial", 7, &key) != WM_STATUS_OK) return 1;
    double px[16 * 16 * 3];
    for (int i = 0; i < 16 * 16 * 3; i++) px[i] = 0.4 + 0.2 * (double)(i % 5) / 5.0;
    WmMedia *cover = NULL, *marked = NULL, *removed = NULL;
    if (wm_image_new(16, 16, 3, px, 16 * 16 * 3, &cover) != WM_STATUS_OK) return 2;
    if (wm_embed(key, cover, &marked) != WM_STATUS_OK) return 3;
    const WmMedia *wm[1] = { marked }, *cl[1] = { cover };
    WmPattern *pattern = NULL;
    if (wm_extract_pattern(wm, cl, 1, 1, WM_MODE_GRAYBOX, &pattern) != WM_STATUS_OK) return 4;
    if (wm_remove(marked, pattern, 1.0, &removed) != WM_STATUS_OK) return 5;
    double db = 0.0;
    if (wm_psnr(removed, cover, &db) != WM_STATUS_OK) return 6;
    WmStatus st = wm_embed(NULL, cover, &marked);
    printf("psnr=%.1f null=%s msg=%s\n", db, wm_status_name(st), wm_last_error());
    wm_media_free(cover); wm_media_free(marked); wm_media_free(removed);
    wm_pattern_free(pattern); wm_key_free(key);
    return 0;
}
"#;

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/c_header-<hash> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libwmsteg_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    let bin = tmp.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("psnr=99.0 null=null pointer msg=key is null"), "{text}");
}
