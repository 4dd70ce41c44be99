//! The `(k, w)` parameter plane: nine-color scans of the joint fate of the
//! free critical points, and one-dimensional solvers for the events that
//! mark where the fates change along real `w` at fixed real `k`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{from_kw, slice_criticals, Complex, KwParams, MapParams};
use crate::orbits::{classify_orbit, critical_fates_kw, ClassifierConfig, CriticalFates, FateClass, NineColor};
use crate::raster::par_map;
use crate::symbolic::{build_trap, verify_full_shift, CodingReport, ShiftConfig, TrapConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub k_range: (f64, f64),
    pub w_range: (f64, f64),
    pub nk: usize,
    pub nw: usize,
    #[serde(default)]
    pub classifier: ClassifierConfig,
}

impl ScanGrid {
    pub fn new(k_range: (f64, f64), w_range: (f64, f64), nk: usize, nw: usize) -> Result<Self> {
        let g = ScanGrid { k_range, w_range, nk, nw, classifier: ClassifierConfig::default() };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nk < 2 || self.nw < 2 {
            return Err(Error::Invalid("scan grids need at least 2 samples per axis".into()));
        }
        let finite = [self.k_range.0, self.k_range.1, self.w_range.0, self.w_range.1].iter().all(|x| x.is_finite());
        if !finite || !(self.k_range.0 < self.k_range.1) || !(self.w_range.0 < self.w_range.1) {
            return Err(Error::Invalid("scan ranges must be finite and increasing".into()));
        }
        self.classifier.validate()
    }

    pub fn k_at(&self, i: usize) -> f64 {
        lerp(self.k_range, i, self.nk)
    }

    pub fn w_at(&self, j: usize) -> f64 {
        lerp(self.w_range, j, self.nw)
    }
}

fn lerp(r: (f64, f64), i: usize, n: usize) -> f64 {
    if i + 1 == n {
        r.1
    } else {
        (r.0 * (n - 1 - i) as f64 + r.1 * i as f64) / (n - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanCell {
    pub k: f64,
    pub w: f64,
    /// `None` where the slice degenerates (`k = 1` or `w = 0`).
    pub color: Option<NineColor>,
    pub u_period: Option<usize>,
    pub v_period: Option<usize>,
}

/// Cells in rows of increasing `w`, each row in increasing `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NineColorMap {
    pub grid: ScanGrid,
    pub cells: Vec<ScanCell>,
    pub undecided_fraction: f64,
}

impl NineColorMap {
    pub fn cell(&self, i_k: usize, j_w: usize) -> &ScanCell {
        &self.cells[j_w * self.grid.nk + i_k]
    }

    /// Codes in `0..=8`, `None` for degenerate cells.
    pub fn codes(&self) -> Vec<Option<u8>> {
        self.cells.iter().map(|c| c.color.map(|n| n.code())).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,w,u_fate,v_fate,color,u_period,v_period,undecided\n");
        for c in &self.cells {
            let opt = |p: Option<usize>| p.map_or(String::new(), |p| p.to_string());
            match c.color {
                Some(n) => {
                    let undecided = match (n.u_undecided, n.v_undecided) {
                        (false, false) => "none",
                        (true, false) => "u",
                        (false, true) => "v",
                        (true, true) => "uv",
                    };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        c.k,
                        c.w,
                        n.u.as_str(),
                        n.v.as_str(),
                        n.code(),
                        opt(c.u_period),
                        opt(c.v_period),
                        undecided
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},degenerate,degenerate,,,,none", c.k, c.w);
                }
            }
        }
        out
    }
}

pub fn scan_cell(k: f64, w: f64, cfg: &ClassifierConfig) -> ScanCell {
    let kw = KwParams::new(k, w);
    let fates = from_kw(&kw).and_then(|p| critical_fates_kw(&kw, &p, cfg));
    match fates {
        Ok(f) => ScanCell { k, w, color: Some(f.color), u_period: f.u.period(), v_period: f.v.period() },
        Err(_) => ScanCell { k, w, color: None, u_period: None, v_period: None },
    }
}

/// Classifies every cell; rows run in parallel and are reassembled in order.
pub fn scan(grid: &ScanGrid) -> Result<NineColorMap> {
    grid.validate()?;
    let rows: Vec<usize> = (0..grid.nw).collect();
    let cells: Vec<ScanCell> = par_map(&rows, |&j| {
        (0..grid.nk).map(|i| scan_cell(grid.k_at(i), grid.w_at(j), &grid.classifier)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let undecided = cells.iter().filter(|c| c.color.is_some_and(|n| n.u_undecided || n.v_undecided)).count();
    let undecided_fraction = undecided as f64 / cells.len() as f64;
    Ok(NineColorMap { grid: *grid, cells, undecided_fraction })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// `f²(v) = v` with `u` escaping.
    Period2V,
    /// `f(u) = u`.
    FixedU,
    /// `f(v) = v`.
    FixedV,
    /// `v` stops being captured by a cycle other than `w`.
    LeaveMc3,
    /// `u` starts being captured by a cycle other than `w`.
    Mc2Onset,
}

impl EventKind {
    pub fn is_root(self) -> bool {
        matches!(self, EventKind::Period2V | EventKind::FixedU | EventKind::FixedV)
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "period2-v" => EventKind::Period2V,
            "fixed-u" => EventKind::FixedU,
            "fixed-v" => EventKind::FixedV,
            "leave-mc3" => EventKind::LeaveMc3,
            "mc2-onset" => EventKind::Mc2Onset,
            _ => return Err(Error::Invalid(format!("unknown event '{s}'"))),
        })
    }
}

/// Located event. For root events `residual` is the defining residual at
/// `w`; for predicate events it is the final bracket width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventResult {
    pub k: f64,
    pub w: f64,
    pub event: EventKind,
    pub residual: f64,
    pub bracket: (f64, f64),
    /// Post-condition at the root: `u` escapes for `period2-v`, the map is
    /// Newton-like for the fixed-point events, the predicate flips for
    /// predicate events.
    pub verified: bool,
    pub iterations: usize,
}

/// Root residual tolerance.
pub const ROOT_RESIDUAL: f64 = 1e-10;
/// Width at which predicate bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-6;
/// Tolerance on the multipliers for the Newton check at fixed-point roots.
pub const NEWTON_TOL: f64 = 1e-6;

fn slice_map(k: f64, w: f64) -> Result<(MapParams, Complex, Complex)> {
    let kw = KwParams::new(k, w);
    let p = from_kw(&kw)?;
    let s = slice_criticals(&kw)?;
    Ok((p, s.u, s.v))
}

/// Real residual defining a root event.
pub fn event_residual(event: EventKind, k: f64, w: f64) -> Result<f64> {
    let (p, u, v) = slice_map(k, w)?;
    let r = match event {
        EventKind::Period2V => p.eval_finite(p.eval_finite(v)) - v,
        EventKind::FixedU => p.eval_finite(u) - u,
        EventKind::FixedV => p.eval_finite(v) - v,
        _ => return Err(Error::Invalid("not a root event".into())),
    };
    Ok(r.re)
}

fn check_bracket(bracket: (f64, f64)) -> Result<()> {
    if !(bracket.0 < bracket.1) || !bracket.0.is_finite() || !bracket.1.is_finite() {
        return Err(Error::Invalid("bracket must be finite and increasing".into()));
    }
    Ok(())
}

/// Bisection on a sign change, then secant steps while they reduce `|F|`.
fn solve_root(event: EventKind, k: f64, bracket: (f64, f64)) -> Result<EventResult> {
    check_bracket(bracket)?;
    let f = |w: f64| event_residual(event, k, w);
    let (mut lo, mut hi) = bracket;
    let (mut flo, fhi) = (f(lo)?, f(hi)?);
    if !(flo * fhi <= 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    while hi - lo > 1e-15 * (1.0 + lo.abs()) && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        iterations += 1;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (mut w, mut fw) = if f(lo)?.abs() <= f(hi)?.abs() { (lo, f(lo)?) } else { (hi, f(hi)?) };
    let (mut w_prev, mut f_prev) = if w == lo { (hi, f(hi)?) } else { (lo, f(lo)?) };
    for _ in 0..20 {
        if fw == f_prev || fw.abs() < 1e-15 {
            break;
        }
        let next = w - fw * (w - w_prev) / (fw - f_prev);
        let fn_ = f(next)?;
        if !(fn_.abs() < fw.abs()) || !(next >= bracket.0 && next <= bracket.1) {
            break;
        }
        (w_prev, f_prev, w, fw) = (w, fw, next, fn_);
        iterations += 1;
    }
    let residual = f(w)?.abs();
    if !(residual < ROOT_RESIDUAL) {
        return Err(Error::SolverFailure { what: "event root (sign change at a pole?)", residual });
    }
    let (p, u, _) = slice_map(k, w)?;
    let verified = match event {
        EventKind::Period2V => classify_orbit(&p, u, &ClassifierConfig::default()).escapes(),
        _ => p.is_newton(NEWTON_TOL)?.is_newton,
    };
    Ok(EventResult { k, w, event, residual, bracket: (lo, hi), verified, iterations })
}

pub fn solve_period2_v(k: f64, bracket: (f64, f64)) -> Result<EventResult> {
    solve_root(EventKind::Period2V, k, bracket)
}

pub fn solve_fixed_u(k: f64, bracket: (f64, f64)) -> Result<EventResult> {
    solve_root(EventKind::FixedU, k, bracket)
}

pub fn solve_fixed_v(k: f64, bracket: (f64, f64)) -> Result<EventResult> {
    solve_root(EventKind::FixedV, k, bracket)
}

/// Classifier settings for boundary events, where transients are long.
pub fn boundary_classifier() -> ClassifierConfig {
    ClassifierConfig::default().with_max_iter(100_000)
}

/// Predicate of a boundary event, evaluated on the critical fates.
pub fn event_predicate(event: EventKind) -> Result<fn(&CriticalFates) -> bool> {
    match event {
        EventKind::LeaveMc3 => Ok(|f| f.color.v == FateClass::Other),
        EventKind::Mc2Onset => Ok(|f| f.color.u == FateClass::Other),
        _ => Err(Error::Invalid("not a predicate event".into())),
    }
}

/// Bisects `predicate(critical_fates(k, w))` on `bracket` down to
/// [`BISECTION_WIDTH`]; every midpoint halves the interval.
pub fn bisect_event<P>(k: f64, event: EventKind, predicate: P, bracket: (f64, f64), cfg: &ClassifierConfig) -> Result<EventResult>
where
    P: Fn(&CriticalFates) -> bool,
{
    check_bracket(bracket)?;
    let eval = |w: f64| -> Result<bool> {
        let kw = KwParams::new(k, w);
        let p = from_kw(&kw)?;
        Ok(predicate(&critical_fates_kw(&kw, &p, cfg)?))
    };
    let (mut lo, mut hi) = bracket;
    let plo = eval(lo)?;
    if plo == eval(hi)? {
        return Err(Error::SamePredicateValue { lo, hi });
    }
    let mut iterations = 0;
    while hi - lo >= BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? == plo {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let verified = eval(lo)? != eval(hi)?;
    Ok(EventResult { k, w: 0.5 * (lo + hi), event, residual: hi - lo, bracket: (lo, hi), verified, iterations })
}

/// Solves any event by name: root events by sign change, predicate events
/// by bisection with [`boundary_classifier`].
pub fn solve_event(event: EventKind, k: f64, bracket: (f64, f64)) -> Result<EventResult> {
    if event.is_root() {
        solve_root(event, k, bracket)
    } else {
        bisect_event(k, event, event_predicate(event)?, bracket, &boundary_classifier())
    }
}

/// Facts about the real orbit of `v` at one parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealOrbitCheck {
    pub k: f64,
    pub w: f64,
    pub u: f64,
    pub f2_v: f64,
    pub f4_v: f64,
    pub v_attracted_to_w: bool,
    pub f2_v_below_u: bool,
}

pub fn real_orbit_check(k: f64, w: f64) -> Result<RealOrbitCheck> {
    let kw = KwParams::new(k, w);
    let p = from_kw(&kw)?;
    let fates = critical_fates_kw(&kw, &p, &ClassifierConfig::default())?;
    let v = fates.criticals.v;
    let f2 = p.eval_finite(p.eval_finite(v));
    let f4 = p.eval_finite(p.eval_finite(f2));
    let u = fates.criticals.u.re;
    Ok(RealOrbitCheck {
        k,
        w,
        u,
        f2_v: f2.re,
        f4_v: f4.re,
        v_attracted_to_w: fates.color.v == FateClass::W,
        f2_v_below_u: f2.re < u,
    })
}

/// Degree-3 family member whose Julia set is a Cantor set coded by the full
/// 3-shift, located by [`find_cantor_instance`] over the default grid.
pub const CANTOR_CUBIC: (f64, f64, f64) = (0.5, 6.0, -4.0);

#[derive(Clone, Debug, Serialize)]
pub struct CantorCandidate {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub report: CodingReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantorSearch {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub resolution: usize,
}

impl Default for CantorSearch {
    fn default() -> Self {
        CantorSearch {
            a: vec![0.5, 1.0, 1.5, 2.0],
            b: vec![2.0, 4.0, 6.0],
            c: vec![-4.0, -5.0, -6.0],
            resolution: 384,
        }
    }
}

/// Coarse search over real `(a, b, c)` for maps whose three finite critical
/// points escape and whose Julia set verifies as a full 3-shift. Returns the
/// passing candidates, best separated first.
pub fn find_cantor_instance(search: &CantorSearch) -> Result<Vec<CantorCandidate>> {
    let mut params = Vec::new();
    for &a in &search.a {
        for &b in &search.b {
            for &c in &search.c {
                params.push((a, b, c));
            }
        }
    }
    let trap_cfg = TrapConfig { resolution: search.resolution, window: None };
    let shift_cfg = ShiftConfig { recheck: false, ..ShiftConfig::default() };
    let mut found = Vec::new();
    for (a, b, c) in params {
        let p = MapParams::real(a, b, c)?;
        let Ok(trap) = build_trap(&p, &trap_cfg) else { continue };
        let Ok(report) = verify_full_shift(&p, &trap, &shift_cfg) else { continue };
        if report.full_shift {
            found.push(CantorCandidate { a, b, c, report });
        }
    }
    found.sort_by(|x, y| y.report.min_separation.total_cmp(&x.report.min_separation));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = ScanGrid::new((0.8, 0.9), (0.2, 2.2), 11, 5).unwrap();
        assert_eq!(g.k_at(0), 0.8);
        assert_eq!(g.k_at(10), 0.9);
        assert_eq!(g.w_at(4), 2.2);
        assert!(ScanGrid::new((0.8, 0.9), (0.2, 2.2), 1, 5).is_err());
    }

    #[test]
    fn milestone_cell() {
        let c = scan_cell(0.85, 1.88053, &ClassifierConfig::default());
        let n = c.color.unwrap();
        assert_eq!((n.u, n.v), (FateClass::Inf, FateClass::Other));
        assert_eq!(c.v_period, Some(2));
    }

    #[test]
    fn degenerate_cell() {
        let c = scan_cell(1.0, 1.3, &ClassifierConfig::default());
        assert!(c.color.is_none());
    }

    #[test]
    fn csv_header_and_rows() {
        let g = ScanGrid::new((0.84, 0.86), (1.8, 1.9), 2, 2).unwrap();
        let m = scan(&g).unwrap();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,w,u_fate,v_fate,color,u_period,v_period,undecided");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0.84,1.8,"));
    }

    #[test]
    fn period2_root() {
        let e = solve_period2_v(0.85, (1.85, 1.92)).unwrap();
        assert!((e.w - 1.88053).abs() < 5e-4);
        assert!(e.residual < ROOT_RESIDUAL && e.verified);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(solve_period2_v(0.85, (0.1, 0.2)), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn event_names_round_trip() {
        for name in ["period2-v", "fixed-u", "fixed-v", "leave-mc3", "mc2-onset"] {
            let e: EventKind = name.parse().unwrap();
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{name}\""));
        }
    }
}
