//! Parameter-plane scans and event solvers along real `w` at `k = 0.85`.

use exobasin::family::{from_kw, KwParams};
use exobasin::orbits::{critical_fates, ClassifierConfig, FateClass};
use exobasin::render::{render_scan, SCAN_PALETTE};
use exobasin::scan::{
    bisect_event, boundary_classifier, event_predicate, scan, scan_cell, solve_event, solve_fixed_u, solve_fixed_v,
    EventKind, ScanGrid,
};

#[test]
fn fixed_point_roots_are_newton_like() {
    let u = solve_fixed_u(0.85, (0.70, 0.72)).unwrap();
    assert!((u.w - 0.7136114).abs() < 1e-3 && u.verified);
    let v = solve_fixed_v(0.85, (0.28, 0.32)).unwrap();
    assert!((v.w - 0.301).abs() < 5e-3 && v.verified);
    let p = from_kw(&KwParams::new(0.85, u.w)).unwrap();
    assert!(p.is_newton(1e-6).unwrap().is_newton);
}

#[test]
fn bisection_brackets_a_predicate_flip() {
    let e = solve_event(EventKind::LeaveMc3, 0.85, (1.85, 1.88)).unwrap();
    assert!(e.bracket.1 - e.bracket.0 < 1e-6);
    assert!(e.verified);
    let pred = event_predicate(EventKind::LeaveMc3).unwrap();
    let swapped = bisect_event(0.85, EventKind::LeaveMc3, |f| !pred(f), (1.85, 1.88), &boundary_classifier()).unwrap();
    assert_eq!(swapped.w, e.w);
}

#[test]
fn scan_rows_are_ordered_and_deterministic() {
    let grid = ScanGrid::new((0.84, 0.86), (1.5, 1.9), 5, 7).unwrap();
    let a = scan(&grid).unwrap();
    let b = scan(&grid).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for j in 0..7 {
        for i in 0..5 {
            let c = a.cell(i, j);
            assert_eq!(c.k, grid.k_at(i));
            assert_eq!(c.w, grid.w_at(j));
            assert_eq!(*c, scan_cell(c.k, c.w, &grid.classifier));
        }
    }
}

#[test]
fn milestone_cell_color() {
    let c = scan_cell(0.85, 1.88053, &ClassifierConfig::default()).color.unwrap();
    assert_eq!((c.u, c.v), (FateClass::Inf, FateClass::Other));
}

/// Rows where the colour of column `col` changes, as `w` midpoints.
fn color_changes(img: &exobasin::render::Image, grid: &ScanGrid, col: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for row in 1..img.height {
        if img.pixel(col, row) != img.pixel(col, row - 1) {
            let (j_hi, j_lo) = (grid.nw - row, grid.nw - 1 - row);
            out.push(0.5 * (grid.w_at(j_hi) + grid.w_at(j_lo)));
        }
    }
    out
}

/// First `step`-wide interval above `from` where the event predicate changes value.
fn first_flip(k: f64, event: EventKind, from: f64, step: f64) -> (f64, f64) {
    let pred = event_predicate(event).unwrap();
    let cfg = boundary_classifier();
    let at = |w: f64| pred(&critical_fates(&from_kw(&KwParams::new(k, w)).unwrap(), &cfg).unwrap());
    let start = at(from);
    (1..200).map(|i| from + i as f64 * step).find(|&w| at(w) != start).map(|w| (w - step, w)).expect("no flip")
}

#[test]
fn scan_image_changes_color_at_the_milestones() {
    let grid = ScanGrid::new((0.80, 0.90), (0.2, 2.2), 256, 256).unwrap();
    let map = scan(&grid).unwrap();
    let img = render_scan(&map);
    assert!(img.rgb.chunks(3).all(|c| SCAN_PALETTE.iter().any(|p| p == c) || c == [0x00, 0xce, 0xd1]));
    let col = (0..grid.nk).min_by(|&a, &b| (grid.k_at(a) - 0.85).abs().total_cmp(&(grid.k_at(b) - 0.85).abs())).unwrap();
    let changes = color_changes(&img, &grid, col);
    let px = (grid.w_range.1 - grid.w_range.0) / (grid.nw - 1) as f64;
    let k = grid.k_at(col);
    for (event, from) in [(EventKind::LeaveMc3, 1.80), (EventKind::Mc2Onset, 1.45)] {
        let bracket = first_flip(k, event, from, 2e-3);
        let located = solve_event(event, k, bracket).unwrap().w;
        let nearest = changes.iter().map(|w| (w - located).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest <= 2.0 * px, "{event:?} at {located}: nearest change {nearest}");
    }
}
