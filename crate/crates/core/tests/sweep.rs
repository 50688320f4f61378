use std::collections::BTreeSet;

use ep_core::ep::RegimeTag;
use ep_core::sweep::{export_to_vec, fig1_presets, parse_csv, run_sweep, ExportFormat, CSV_HEADER};

#[test]
fn csv_round_trip_is_lossless() {
    let p = fig1_presets().right;
    let t = run_sweep(&p.trajectory, p.a_min, p.a_max, 301).unwrap();
    let text = String::from_utf8(export_to_vec(&t, ExportFormat::Csv)).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), t.rows.len());
    for (a, b) in rows.iter().zip(&t.rows) {
        assert_eq!(a.a.to_bits(), b.a.to_bits());
        assert_eq!(a.e1.to_bits(), b.e1.to_bits());
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.regime, b.regime);
        assert_eq!(a.near_ep, b.near_ep);
    }
    assert!(parse_csv("a,b\n1,2\n").is_err());
}

#[test]
fn export_is_byte_stable() {
    let p = fig1_presets().left;
    let once = export_to_vec(&run_sweep(&p.trajectory, p.a_min, p.a_max, 401).unwrap(), ExportFormat::Json);
    let twice = export_to_vec(&run_sweep(&p.trajectory, p.a_min, p.a_max, 401).unwrap(), ExportFormat::Json);
    assert_eq!(once, twice);
}

#[test]
fn regimes_flip_at_the_located_eps() {
    let p = fig1_presets().right;
    let t = run_sweep(&p.trajectory, p.a_min, p.a_max, 1201).unwrap();
    let (lo, hi) = (t.eps[0].a_star, t.eps[1].a_star);
    for r in &t.rows {
        if (r.a - lo).abs() < 1e-9 || (r.a - hi).abs() < 1e-9 {
            continue;
        }
        let want = if r.a > lo && r.a < hi {
            RegimeTag::WidthBifurcation
        } else {
            RegimeTag::LevelRepulsion
        };
        assert_eq!(r.regime, want, "a = {}", r.a);
    }
    assert!(t.rows.iter().any(|r| r.near_ep));
}

#[test]
fn energy_and_width_roles_are_mirrored() {
    let pr = fig1_presets().right;
    let pl = fig1_presets().left;
    let r = run_sweep(&pr.trajectory, pr.a_min, pr.a_max, 1201).unwrap();
    let l = run_sweep(&pl.trajectory, pl.a_min, pl.a_max, 1201).unwrap();
    let (r_lo, r_hi, l_ep) = (r.eps[0].a_star, r.eps[1].a_star, l.eps[0].a_star);
    let off_ep = |a: f64, eps: &[f64]| eps.iter().all(|e| (a - e).abs() > 1e-9);
    let split = |x: f64, y: f64| (x - y).abs() > 1e-10;

    // (inside, first split, second split) with the roles of E and Γ swapped on the left
    let right: BTreeSet<_> = r
        .rows
        .iter()
        .filter(|row| off_ep(row.a, &[r_lo, r_hi]))
        .map(|row| (row.a > r_lo && row.a < r_hi, split(row.e1, row.e2), split(row.g1_half, row.g2_half)))
        .collect();
    // the left panel's "inside" is the unbroken side below its single EP
    let left: BTreeSet<_> = l
        .rows
        .iter()
        .filter(|row| off_ep(row.a, &[l_ep]))
        .map(|row| (row.a < l_ep, split(row.g1_half, row.g2_half), split(row.e1, row.e2)))
        .collect();
    assert_eq!(right, left);
    assert_eq!(right.len(), 2);
}

#[test]
fn left_panel_widths_vanish_below_the_ep() {
    let p = fig1_presets().left;
    let t = run_sweep(&p.trajectory, p.a_min, p.a_max, 1201).unwrap();
    let ep = t.eps[0].a_star;
    for r in t.rows.iter().filter(|r| r.a < ep - 1e-9) {
        assert!(r.g1_half.abs() < 1e-12 && r.g2_half.abs() < 1e-12);
    }
}

#[test]
fn refinement_keeps_eps_in_place() {
    let p = fig1_presets().right;
    let coarse = run_sweep(&p.trajectory, p.a_min, p.a_max, 601).unwrap();
    let fine = run_sweep(&p.trajectory, p.a_min, p.a_max, 1201).unwrap();
    assert_eq!(coarse.eps.len(), fine.eps.len());
    for (a, b) in coarse.eps.iter().zip(&fine.eps) {
        assert!((a.a_star - b.a_star).abs() < 1e-9);
    }
}

#[test]
fn branches_are_continuous() {
    let p = fig1_presets().right;
    let t = run_sweep(&p.trajectory, p.a_min, p.a_max, 1201).unwrap();
    for w in t.rows.windows(2) {
        let step = (w[1].e1 - w[0].e1).abs() + (w[1].g1_half - w[0].g1_half).abs();
        assert!(step < 0.05, "jump at a = {}", w[1].a);
    }
}
