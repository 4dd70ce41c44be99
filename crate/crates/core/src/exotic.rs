//! Basin masks on a pixel grid, their connectivity, the census of critical
//! points per basin, and the verdict on whether the basin of `∞` is exotic:
//! completely invariant and not simply connected.
//!
//! Thin filaments of the basin of `∞` squeezed between pieces of the Julia
//! set are often narrower than a pixel, so pixel labels alone would glue
//! together basin components that are separated by the Julia set. Pixels of
//! the basin whose distance estimate `G / |∇G|` is below `thin_factor`
//! pixels are therefore treated as Julia pixels in all connectivity counts.
//! That band also cuts the genuine necks of the basin, which sit at the
//! saddles of `G`; those are restored by [`saddle_bridges`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{pair, Complex, MapParams};
use crate::orbits::{classify_orbit, critical_fates, ClassifierConfig, FateClass, OrbitFate, CYCLE_MATCH_TOL};
use crate::potential::{
    escape_window, figure_eight_level, floor_iterations, green_infinity, green_with_gradient, FigureEightConfig,
};
use crate::raster::{label_components, par_map, Components, Connectivity, Grid, Window};
use crate::symbolic::preimages;

pub const LABEL_INFINITY: u8 = 0;
pub const LABEL_W: u8 = 1;
/// Labels `2..=254` are other attracting cycles, numbered in order of
/// discovery (row-major); overflow cycles share 254.
pub const LABEL_OTHER_BASE: u8 = 2;
pub const LABEL_UNDECIDED: u8 = 255;

/// Superattracting threshold for picking `w`. The printed constants of
/// published maps are rounded, which leaves `w` with a tiny multiplier.
pub const W_MULTIPLIER_TOL: f64 = 1e-3;


#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    pub classifier: ClassifierConfig,
    /// Basin pixels closer than this many pixel widths to the Julia set
    /// (by distance estimate) count as Julia pixels for connectivity.
    pub thin_factor: f64,
    /// Preimage depth of the saddles whose necks are bridged.
    pub saddle_depth: usize,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig { classifier: ClassifierConfig::default().with_max_iter(2_000), thin_factor: 1.0, saddle_depth: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleInfo {
    pub label: u8,
    pub period: usize,
    #[serde(with = "pair::vec")]
    pub points: Vec<Complex>,
    #[serde(with = "pair")]
    pub multiplier: Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinMask {
    pub grid: Grid,
    pub labels: Vec<u8>,
    /// Basin-of-`∞` pixels within the distance-estimate band of the Julia set.
    pub thin: Vec<bool>,
    pub cycles: Vec<CycleInfo>,
    pub w: Option<Complex>,
}

/// The finite fixed point that is (numerically) superattracting, if any.
pub fn superattracting_fixed_point(p: &MapParams) -> Result<Option<Complex>> {
    let mut best: Option<(f64, Complex)> = None;
    for fp in p.fixed_points()? {
        if let Some(z) = fp.point.finite() {
            let m = fp.multiplier.norm();
            if m < W_MULTIPLIER_TOL && best.is_none_or(|(bm, _)| m < bm) {
                best = Some((m, z));
            }
        }
    }
    Ok(best.map(|(_, z)| z))
}

enum PixelFate {
    Infinity { thin: bool },
    Cycle(OrbitFate),
    Undecided,
}

pub fn basin_mask(p: &MapParams, window: Window, resolution: usize, cfg: &MaskConfig) -> Result<BasinMask> {
    if resolution < 16 {
        return Err(Error::Invalid("mask resolution must be at least 16".into()));
    }
    cfg.classifier.validate()?;
    let grid = Grid::with_resolution(window, resolution)?;
    let w = superattracting_fixed_point(p)?;
    let band = cfg.thin_factor * grid.pixel_size();
    let fates = grid.sample(|z| match classify_orbit(p, z, &cfg.classifier) {
        OrbitFate::ToInfinity { .. } => {
            let thin = green_with_gradient(p, z, cfg.classifier.max_iter)
                .is_some_and(|(g, grad)| g.is_finite() && grad.norm() > 0.0 && g / grad.norm() < band);
            PixelFate::Infinity { thin }
        }
        f @ OrbitFate::ToCycle { .. } => PixelFate::Cycle(f),
        OrbitFate::Undecided { .. } => PixelFate::Undecided,
    });

    let mut labels = Vec::with_capacity(grid.len());
    let mut thin = Vec::with_capacity(grid.len());
    let mut cycles: Vec<CycleInfo> = Vec::new();
    for f in fates {
        let (label, t) = match f {
            PixelFate::Infinity { thin } => (LABEL_INFINITY, thin),
            PixelFate::Undecided => (LABEL_UNDECIDED, false),
            PixelFate::Cycle(fate) => {
                if w.is_some_and(|w| fate.is_fixed_at(w)) {
                    (LABEL_W, false)
                } else {
                    (cycle_label(&mut cycles, fate), false)
                }
            }
        };
        labels.push(label);
        thin.push(t);
    }
    Ok(BasinMask { grid, labels, thin, cycles, w })
}

fn cycle_label(cycles: &mut Vec<CycleInfo>, fate: OrbitFate) -> u8 {
    let OrbitFate::ToCycle { period, cycle, multiplier } = fate else {
        return LABEL_UNDECIDED;
    };
    let z0 = cycle[0];
    if let Some(c) = cycles.iter().find(|c| {
        c.period == period && c.points.iter().any(|q| (q - z0).norm() < CYCLE_MATCH_TOL * (1.0 + q.norm()))
    }) {
        return c.label;
    }
    let label = (LABEL_OTHER_BASE as usize + cycles.len()).min(254) as u8;
    if label < 254 || cycles.last().is_none_or(|c| c.label < 254) {
        cycles.push(CycleInfo { label, period, points: cycle, multiplier });
    }
    label
}

impl BasinMask {
    pub fn label_at(&self, z: Complex) -> Option<u8> {
        let (c, r) = self.grid.locate(z)?;
        Some(self.labels[self.grid.index(c, r)])
    }

    /// Pixels of the basin of `∞` away from the Julia set.
    pub fn infinity_core(&self) -> Vec<bool> {
        self.labels.iter().zip(&self.thin).map(|(&l, &t)| l == LABEL_INFINITY && !t).collect()
    }

    /// Pixels whose 3×3 neighbourhood holds two labels, an undecided pixel
    /// or a thin basin pixel.
    pub fn julia_pixels(&self) -> Vec<bool> {
        let (w, h) = (self.grid.width, self.grid.height);
        let key = |i: usize| if self.thin[i] { LABEL_UNDECIDED } else { self.labels[i] };
        let mut out = vec![false; w * h];
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let me = key(i);
                let mut hit = me == LABEL_UNDECIDED;
                'n: for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                        if hit {
                            break 'n;
                        }
                        if rr < 0 || cc < 0 || rr >= h as i64 || cc >= w as i64 {
                            continue;
                        }
                        hit = key(rr as usize * w + cc as usize) != me;
                    }
                }
                out[i] = hit;
            }
        }
        out
    }

    pub fn fraction(&self, label: u8) -> f64 {
        self.labels.iter().filter(|&&l| l == label).count() as f64 / self.labels.len() as f64
    }
}

/// Region of a critical point in the mask.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum Region {
    ImmediateInfinity,
    Infinity,
    W,
    Other { label: u8 },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalCensus {
    #[serde(with = "pair")]
    pub point: Complex,
    #[serde(with = "pair")]
    pub value: Complex,
    #[serde(flatten)]
    pub region: Region,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityReport {
    pub resolution: usize,
    pub infinity_components: usize,
    pub complement_components: usize,
    pub criticals: Vec<CriticalCensus>,
    /// Finite critical points in the basin of `∞`; `∞` itself always is.
    #[serde(with = "pair::vec")]
    pub criticals_in_infinity_basin: Vec<Complex>,
    #[serde(with = "pair::vec")]
    pub criticals_in_immediate_infinity_basin: Vec<Complex>,
    #[serde(with = "pair::vec")]
    pub criticals_in_w_basin: Vec<Complex>,
    pub w_basin_holes: Option<usize>,
    pub refined: Option<RefinedCounts>,
    pub resolution_stable: bool,
    pub monitors: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedCounts {
    pub resolution: usize,
    pub infinity_components: usize,
    pub complement_components: usize,
    #[serde(with = "pair::vec")]
    pub criticals_in_immediate_infinity_basin: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub mandatory: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, mandatory: bool, detail: String) -> Self {
        Check { name: name.into(), passed, mandatory, detail }
    }
}

struct Counts {
    infinity_components: usize,
    complement_components: usize,
    immediate: Vec<Complex>,
    census: Vec<CriticalCensus>,
    w_holes: Option<usize>,
}

/// Component of `comps` that owns the pixel of `z`, looking one pixel
/// around it when `z` sits on a boundary pixel.
fn component_near(grid: &Grid, comps: &Components, z: Complex) -> Option<u32> {
    let (col, row) = grid.locate(z)?;
    let own = comps.label_at(col, row);
    if own > 0 {
        return Some(own);
    }
    let mut found = None;
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            let (c, r) = (col as i64 + dc, row as i64 + dr);
            if c < 0 || r < 0 || c >= grid.width as i64 || r >= grid.height as i64 {
                continue;
            }
            let l = comps.label_at(c as usize, r as usize);
            if l > 0 {
                match found {
                    None => found = Some(l),
                    Some(f) if f != l => return None,
                    _ => {}
                }
            }
        }
    }
    found
}

/// Components of the complement of `region` on the sphere that meet Julia
/// pixels: those touching the window border join through `∞`.
fn complement_on_sphere(grid: &Grid, region: &[bool], julia: &[bool]) -> usize {
    let comp: Vec<bool> = region.iter().map(|r| !r).collect();
    let c = label_components(&comp, grid.width, grid.height, Connectivity::Eight);
    let mut meets = vec![false; c.count() + 1];
    for (i, &l) in c.labels.iter().enumerate() {
        if l > 0 && julia[i] {
            meets[l as usize] = true;
        }
    }
    let border = c.border_labels();
    let inner = (1..=c.count() as u32).filter(|l| meets[*l as usize] && !border.contains(l)).count();
    inner + usize::from(border.iter().any(|l| meets[*l as usize]))
}

/// Pixels along the two ascending gradient lines of `G` through each saddle
/// (an escaping critical point or one of its preimages up to `depth`), from
/// the saddle to the first core pixel on either side.
///
/// Near a saddle the basin narrows to a neck that the distance estimate
/// marks as thin; the neck is where two pieces of `{G > G(saddle)}` join.
pub fn saddle_bridges(p: &MapParams, mask: &BasinMask, depth: usize, cfg: &ClassifierConfig) -> Result<Vec<usize>> {
    let grid = &mask.grid;
    let core = mask.infinity_core();
    let px = grid.pixel_size();
    // Preimages whose neck is far below pixel scale (by the derivative of the
    // iterate carrying them to the critical point) are not followed.
    let max_gain = 20.0 / px;
    let mut saddles = Vec::new();
    for c in p.critical_points()?.points() {
        if !classify_orbit(p, c, cfg).escapes() {
            continue;
        }
        let mut layer = vec![(c, Complex::new(1.0, 0.0))];
        for j in 0..=depth {
            saddles.extend(layer.iter().map(|x| x.0).filter(|z| grid.window.contains(*z)));
            if j < depth {
                let mut next = Vec::new();
                for &(z, dz) in &layer {
                    for y in preimages(p, z)?.preimages {
                        let dy = dz * p.derivative_unchecked(y);
                        if dy.norm() <= max_gain {
                            next.push((y, dy));
                        }
                    }
                }
                layer = next;
            }
        }
    }
    let paths = par_map(&saddles, |&s| {
        let mut out = Vec::new();
        let Some((col, row)) = grid.locate(s) else { return out };
        let own = grid.index(col, row);
        let core_around = [(0i64, 0i64), (1, 0), (-1, 0), (0, 1), (0, -1)].iter().all(|(dc, dr)| {
            let (c, r) = (col as i64 + dc, row as i64 + dr);
            c >= 0 && r >= 0 && c < grid.width as i64 && r < grid.height as i64 && core[grid.index(c as usize, r as usize)]
        });
        if core_around {
            return out;
        }
        let cap = floor_iterations(1e-3 * green_infinity(p, s, cfg.max_iter).map_or(0.0, |v| v.value));
        let g = |z: Complex| green_infinity(p, z, cap).map_or(0.0, |v| v.value);
        let r = 0.5 * px;
        let best = (0..32)
            .map(|k| {
                let th = k as f64 * std::f64::consts::TAU / 32.0;
                (th, g(s + Complex::from_polar(r, th)))
            })
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        out.push(own);
        for th in [best.0, best.0 + std::f64::consts::PI] {
            let mut z = s + Complex::from_polar(r, th);
            let start = out.len();
            for _ in 0..8 * grid.width.max(grid.height) {
                let Some((col, row)) = grid.locate(z) else { break };
                let i = grid.index(col, row);
                if mask.labels[i] != LABEL_INFINITY {
                    break;
                }
                if out.last() != Some(&i) {
                    // Circling a pole of G in a thin pixel.
                    if out[start..].contains(&i) {
                        break;
                    }
                    out.push(i);
                }
                if core[i] {
                    break;
                }
                let Some((_, grad)) = green_with_gradient(p, z, cap) else { break };
                if !(grad.norm() > 0.0 && grad.norm().is_finite()) {
                    break;
                }
                z += 0.5 * px * grad / grad.norm();
            }
        }
        out
    });
    let mut all: Vec<usize> = paths.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    Ok(all)
}

fn counts(p: &MapParams, mask: &BasinMask, mcfg: &MaskConfig) -> Result<Counts> {
    let cfg = &mcfg.classifier;
    let grid = &mask.grid;
    let base = mask.infinity_core();
    let mut core = base.clone();
    for i in saddle_bridges(p, mask, mcfg.saddle_depth, cfg)? {
        core[i] = true;
    }
    let joined = label_components(&core, grid.width, grid.height, Connectivity::Four);
    // Bridge pixels that touch no core pixel join nothing.
    let mut anchored = vec![false; joined.count() + 1];
    for (i, &l) in joined.labels.iter().enumerate() {
        if l > 0 && base[i] {
            anchored[l as usize] = true;
        }
    }
    for (i, &l) in joined.labels.iter().enumerate() {
        if l > 0 && !anchored[l as usize] {
            core[i] = false;
        }
    }
    let comps = label_components(&core, grid.width, grid.height, Connectivity::Four);
    let border = comps.border_labels();
    // The immediate basin is the border-touching component of largest area.
    let immediate = border.iter().copied().max_by_key(|l| comps.sizes[*l as usize - 1]);
    let julia = mask.julia_pixels();
    let complement_components = match immediate {
        Some(l) => {
            let region: Vec<bool> = comps.labels.iter().map(|&x| x == l).collect();
            complement_on_sphere(grid, &region, &julia)
        }
        None => 0,
    };

    let w_region = mask.w.and_then(|w| {
        let wmask: Vec<bool> = mask.labels.iter().map(|&l| l == LABEL_W).collect();
        let wc = label_components(&wmask, grid.width, grid.height, Connectivity::Four);
        component_near(grid, &wc, w).map(|l| {
            let region: Vec<bool> = wc.labels.iter().map(|&x| x == l).collect();
            (wc, l, complement_on_sphere(grid, &region, &julia))
        })
    });

    let mut census = Vec::new();
    let mut imm = Vec::new();
    for c in p.critical_points()?.points() {
        let fate = classify_orbit(p, c, cfg);
        let region = match &fate {
            OrbitFate::ToInfinity { .. } => {
                if immediate.is_some() && component_near(grid, &comps, c) == immediate {
                    imm.push(c);
                    Region::ImmediateInfinity
                } else {
                    Region::Infinity
                }
            }
            f @ OrbitFate::ToCycle { .. } => {
                if mask.w.is_some_and(|w| f.is_fixed_at(w)) {
                    Region::W
                } else {
                    match mask.label_at(c) {
                        Some(l) if l >= LABEL_OTHER_BASE && l != LABEL_UNDECIDED => Region::Other { label: l },
                        _ => Region::Other { label: LABEL_UNDECIDED },
                    }
                }
            }
            OrbitFate::Undecided { .. } => Region::Undecided,
        };
        census.push(CriticalCensus { point: c, value: p.eval_finite(c), region });
    }
    Ok(Counts {
        infinity_components: comps.count(),
        complement_components,
        immediate: imm,
        census,
        w_holes: w_region.map(|(_, _, h)| h.saturating_sub(1)),
    })
}

fn same_points(a: &[Complex], b: &[Complex]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| (x - y).norm() < 1e-9 * (1.0 + x.norm())))
}

/// Connectivity of the basins at `resolution`, re-checked at twice the
/// resolution when `recheck` is set. Stability compares the derived
/// predicates: whether the basin of `∞` is connected, whether its immediate
/// basin has at least two complementary components, and which critical
/// points it holds. The raw counts grow with resolution as finer preimage
/// islands resolve.
pub fn connectivity(
    p: &MapParams,
    window: Window,
    resolution: usize,
    cfg: &MaskConfig,
    recheck: bool,
) -> Result<ConnectivityReport> {
    let mask = basin_mask(p, window, resolution, cfg)?;
    let base = counts(p, &mask, cfg)?;
    let refined = if recheck {
        let fine = basin_mask(p, window, 2 * resolution, cfg)?;
        let c = counts(p, &fine, cfg)?;
        Some(RefinedCounts {
            resolution: 2 * resolution,
            infinity_components: c.infinity_components,
            complement_components: c.complement_components,
            criticals_in_immediate_infinity_basin: c.immediate,
        })
    } else {
        None
    };
    let resolution_stable = refined.as_ref().is_none_or(|r| {
        (r.infinity_components == 1) == (base.infinity_components == 1)
            && (r.complement_components >= 2) == (base.complement_components >= 2)
            && same_points(&r.criticals_in_immediate_infinity_basin, &base.immediate)
    });

    let in_inf: Vec<Complex> = base
        .census
        .iter()
        .filter(|c| matches!(c.region, Region::ImmediateInfinity | Region::Infinity))
        .map(|c| c.point)
        .collect();
    let in_w: Vec<Complex> = base.census.iter().filter(|c| c.region == Region::W).map(|c| c.point).collect();
    let monitors = proposition_monitors(&base, &in_inf, &in_w, mask.w);
    Ok(ConnectivityReport {
        resolution,
        infinity_components: base.infinity_components,
        complement_components: base.complement_components,
        criticals: base.census,
        criticals_in_infinity_basin: in_inf,
        criticals_in_immediate_infinity_basin: base.immediate,
        criticals_in_w_basin: in_w,
        w_basin_holes: base.w_holes,
        refined,
        resolution_stable,
        monitors,
    })
}

fn distinct_values(values: &[Option<Complex>]) -> usize {
    let mut seen: Vec<Option<Complex>> = Vec::new();
    for v in values {
        let dup = seen.iter().any(|s| match (s, v) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).norm() < 1e-9 * (1.0 + a.norm()),
            _ => false,
        });
        if !dup {
            seen.push(*v);
        }
    }
    seen.len()
}

/// Necessary conditions for a non-simply-connected basin: some finite
/// critical point in it, and at least two distinct critical values among
/// its resident critical points (`None` stands for `∞`).
fn proposition_monitors(c: &Counts, in_inf: &[Complex], in_w: &[Complex], w: Option<Complex>) -> Vec<Check> {
    let mut out = Vec::new();
    let inf_multiply = c.complement_components >= 2;
    out.push(Check::new(
        "non_simply_connected_basin_has_critical_point",
        !inf_multiply || !in_inf.is_empty(),
        false,
        format!("infinity basin complement components {}, finite critical points in basin {}", c.complement_components, in_inf.len()),
    ));
    let mut values: Vec<Option<Complex>> = vec![None];
    values.extend(
        c.census.iter().filter(|x| x.region == Region::ImmediateInfinity).map(|x| Some(x.value)),
    );
    let n_inf = distinct_values(&values);
    out.push(Check::new(
        "non_simply_connected_infinity_basin_has_two_critical_values",
        !inf_multiply || n_inf >= 2,
        false,
        format!("distinct critical values in the immediate basin of infinity: {n_inf}"),
    ));
    if let (Some(w), Some(holes)) = (w, c.w_holes) {
        let mut values: Vec<Option<Complex>> = vec![Some(w)];
        values.extend(c.census.iter().filter(|x| x.region == Region::W).map(|x| Some(x.value)));
        let n_w = distinct_values(&values);
        out.push(Check::new(
            "non_simply_connected_w_basin_has_two_critical_values",
            holes == 0 || n_w >= 2 || in_w.len() > 1,
            false,
            format!("holes in the immediate basin of w: {holes}, distinct critical values: {n_w}"),
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExoticConfig {
    pub resolution: usize,
    pub mask: MaskConfig,
    pub window: Option<Window>,
    pub check_stability: bool,
    pub figure_eight: bool,
}

impl Default for ExoticConfig {
    fn default() -> Self {
        ExoticConfig {
            resolution: 512,
            mask: MaskConfig::default(),
            window: None,
            check_stability: true,
            figure_eight: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExoticVerdict {
    pub is_exotic: bool,
    pub evidence: Vec<Check>,
    pub caveats: Vec<String>,
    pub connectivity: ConnectivityReport,
}

pub fn exotic_verdict(p: &MapParams, cfg: &ExoticConfig) -> Result<ExoticVerdict> {
    if p.is_degenerate() {
        return Err(Error::Invalid("the exotic verdict needs a degree-3 map".into()));
    }
    let window = cfg.window.unwrap_or_else(|| escape_window(p));
    let mut evidence = Vec::new();

    let fates = critical_fates(p, &cfg.mask.classifier);
    let (profile, u) = match &fates {
        Ok(f) => {
            let w_escapes = f.w.escapes();
            let ok = f.color.u == FateClass::Inf && f.color.v != FateClass::Inf && !w_escapes;
            let detail = format!("u: {}, v: {}, w escapes: {w_escapes}", f.color.u.as_str(), f.color.v.as_str());
            ((ok, detail), Some(f.criticals.u))
        }
        Err(e) => ((false, format!("map is not on the (k, w) slice: {e}")), None),
    };
    evidence.push(Check::new("u_escapes_v_w_do_not", profile.0, true, profile.1));

    let report = connectivity(p, window, cfg.resolution, &cfg.mask, cfg.check_stability)?;
    // A failed orbit profile settles the verdict whatever the grid says.
    if !report.resolution_stable && profile.0 {
        let r = report.refined.as_ref().expect("refined counts exist when unstable");
        return Err(Error::UnstableAtResolution(format!(
            "at {}: infinity components {}, complement components {}; at {}: {}, {}",
            report.resolution,
            report.infinity_components,
            report.complement_components,
            r.resolution,
            r.infinity_components,
            r.complement_components
        )));
    }
    evidence.push(Check::new(
        "infinity_basin_connected",
        report.infinity_components == 1,
        true,
        format!("{} component(s)", report.infinity_components),
    ));
    evidence.push(Check::new(
        "infinity_basin_not_simply_connected",
        report.complement_components >= 2,
        true,
        format!("{} complementary component(s) meeting the Julia set", report.complement_components),
    ));
    let imm = &report.criticals_in_immediate_infinity_basin;
    let only_u = imm.len() == 1 && u.is_some_and(|u| (imm[0] - u).norm() < CYCLE_MATCH_TOL * (1.0 + u.norm()));
    evidence.push(Check::new(
        "immediate_basin_holds_only_infinity_and_u",
        only_u,
        true,
        format!("finite critical points in the immediate basin: {}", imm.len()),
    ));

    if let Some(u) = u {
        let fu = p.eval_finite(u);
        evidence.push(Check::new(
            "two_distinct_critical_values",
            fu.re.is_finite() && fu.im.is_finite(),
            false,
            "critical values infinity and f(u) differ".into(),
        ));
    }
    if cfg.figure_eight && profile.0 {
        let f8 = figure_eight_level(p, &FigureEightConfig::default());
        let (ok, detail) = match &f8 {
            Ok(f) => (f.verified, format!("t0 = {:.9}, components {} above and {} below", f.t0, f.count_above, f.count_below)),
            Err(e) => (false, e.to_string()),
        };
        evidence.push(Check::new("figure_eight_level", ok, false, detail));
    }
    evidence.extend(report.monitors.iter().cloned());

    let is_exotic = evidence.iter().filter(|c| c.mandatory).all(|c| c.passed);
    let mut caveats = vec![
        "grid connectivity is a heuristic; the escape of u alone is not taken as proof of connectedness".into(),
        format!(
            "basin pixels within {} pixel(s) of the Julia set by distance estimate count as Julia pixels",
            cfg.mask.thin_factor
        ),
    ];
    if !report.resolution_stable {
        caveats.push("grid predicates change under refinement; the verdict rests on the orbit profile".into());
    }
    Ok(ExoticVerdict { is_exotic, evidence, caveats, connectivity: report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{from_kw, KwParams};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn unit_disc_mask() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let m = basin_mask(&p, Window::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 128, &MaskConfig::default()).unwrap();
        let px = m.grid.pixel_size();
        for (i, &l) in m.labels.iter().enumerate() {
            let r = m.grid.center_of_index(i).norm();
            if r > 1.0 + px {
                assert_eq!(l, LABEL_INFINITY);
            } else if r < 1.0 - px {
                assert_eq!(l, LABEL_W);
            }
        }
    }

    #[test]
    fn unit_disc_connectivity() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let r = connectivity(&p, Window::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 128, &MaskConfig::default(), false)
            .unwrap();
        assert_eq!(r.infinity_components, 1);
        assert_eq!(r.complement_components, 1);
        assert_eq!(r.w_basin_holes, Some(0));
    }

    #[test]
    fn newton_regime_is_not_exotic() {
        let p = from_kw(&KwParams::new(0.85, 0.7136114)).unwrap();
        let cfg = ExoticConfig { resolution: 128, check_stability: false, ..ExoticConfig::default() };
        let v = exotic_verdict(&p, &cfg).unwrap();
        assert!(!v.is_exotic);
        assert!(!v.evidence[0].passed);
    }

    #[test]
    fn degenerate_is_rejected() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        assert!(exotic_verdict(&p, &ExoticConfig::default()).is_err());
    }
}
