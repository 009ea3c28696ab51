//! Compiles a C client against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const CLIENT: &str = r#"
#include <math.h>
#include <stdio.h>
#include "spectra_cdma.h"

int main(void) {
    uint64_t c = 0;
    if (spectra_catalan(6, &c) != SPECTRA_STATUS_OK || c != 132) return 1;

    SpectraWaveform *w = NULL;
    if (spectra_waveform_parse("srrc:1", &w) != SPECTRA_STATUS_OK) return 2;
    SpectraLaw *law = NULL;
    if (spectra_law_new(0.5, w, "rayleigh", &law) != SPECTRA_STATUS_OK) return 3;
    spectra_waveform_free(w);

    SpectraSequence *m = NULL;
    if (spectra_law_moments(law, 2, &m) != SPECTRA_STATUS_OK) return 4;
    double m2 = 0.0;
    spectra_sequence_get(m, 2, &m2);
    /* P2 + beta W2 P1^2 = 2 + 0.5 * 0.75 */
    if (fabs(m2 - 2.375) > 1e-9) return 5;
    spectra_sequence_free(m);

    SpectraRule *rule = NULL;
    if (spectra_law_rule(law, 0, &rule) != SPECTRA_STATUS_OK) return 6;
    double mmse = 0.0;
    if (spectra_rule_mmse(rule, 100.0, &mmse) != SPECTRA_STATUS_OK) return 7;
    printf("%zu %.6f\n", spectra_rule_len(rule), mmse);
    spectra_rule_free(rule);
    spectra_law_free(law);

    if (spectra_law_new(-2.0, NULL, NULL, &law) != SPECTRA_STATUS_INVALID_ARGUMENT) return 8;
    if (spectra_last_error()[0] == '\0') return 9;
    return 0;
}
"#;

#[test]
fn c_client_builds_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libspectra_cdma_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());

    let dir = tempfile_dir();
    let src = dir.join("client.c");
    let exe = dir.join("client");
    std::fs::write(&src, CLIENT).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "client exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut parts = text.split_whitespace();
    assert_eq!(parts.next(), Some("15"));
    let mmse: f64 = parts.next().unwrap().parse().unwrap();
    assert!(mmse > 0.0 && mmse < 1.0);
    std::fs::remove_dir_all(&dir).ok();
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spectra-cdma-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
