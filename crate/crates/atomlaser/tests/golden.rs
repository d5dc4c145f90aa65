//! Regression pin on the exported map format: data rows must match the
//! committed file byte for byte. Comment lines carry provenance (including
//! a timestamp) and stay out of the diff.

use atomlaser::export::map_to_csv;
use atomlaser::sweep::{analytic_map, default_spec};

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn rb87_map_export_matches_the_committed_file() {
    let mut spec = default_spec("rb87", false).unwrap();
    spec.omega.n = 25;
    spec.r.n = 11;
    let fresh = map_to_csv(&analytic_map(&spec).unwrap());
    let golden = include_str!("golden/rb87_map.csv");
    let fresh_rows = data_rows(&fresh);
    let golden_rows = data_rows(golden);
    assert_eq!(fresh_rows.len(), golden_rows.len());
    for (i, (f, g)) in fresh_rows.iter().zip(&golden_rows).enumerate() {
        assert_eq!(f, g, "data row {i} drifted");
    }
}
