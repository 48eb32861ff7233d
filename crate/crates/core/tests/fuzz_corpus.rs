//! Replays the checked-in fuzz seeds through every parser entry point.

use bandfmm::io::{parse_range, read_points, read_table, read_values};
use bandfmm::RadialKernel;
use std::fs;
use std::path::PathBuf;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn kernel_spec_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("kernel_spec") {
        if let Ok(k) = String::from_utf8_lossy(&data).parse::<RadialKernel>() {
            if k.validate().is_ok() {
                assert!(k.eval(0.5).is_finite());
                accepted += 1;
            }
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn point_seeds() {
    let ok: Vec<bool> = seeds("read_points").iter().map(|(_, d)| read_points(&d[..]).is_ok()).collect();
    assert_eq!(ok, [true, true, false, false]);
}

#[test]
fn value_and_table_seeds() {
    for (_, d) in seeds("read_values") {
        let _ = read_values(&d[..]);
    }
    for (name, d) in seeds("read_table") {
        let r = read_table(&d[..]);
        if name == "seed-0" {
            assert_eq!(r.unwrap().rows.len(), 2);
        }
    }
}

#[test]
fn range_seeds() {
    for (_, d) in seeds("parse_range") {
        if let Ok(r) = parse_range(&String::from_utf8_lossy(&d)) {
            assert!(r.start() <= r.end());
        }
    }
}
