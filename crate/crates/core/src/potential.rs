//! Potentials: the Green function of the basin of `∞`, the Koenigs
//! linearizer at an attracting fixed point, the Böttcher-type potential at
//! a superattracting one, and equipotential curves of the Green function.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{pair, Complex, Holomorphic, MapParams, MULTIPLIER_TOL};
use crate::orbits::{classify_orbit, escape_radius, ClassifierConfig};
use crate::raster::{label_components, marching_squares, Connectivity, Grid, Polyline, Window};
use crate::symbolic::preimages;

/// Iterates are followed until `|z| > GREEN_BAILOUT`.
pub const GREEN_BAILOUT: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialValue {
    pub value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KoenigsValue {
    #[serde(with = "pair")]
    pub phi: Complex,
    pub g: f64,
    pub iterations_used: usize,
}

/// `G(z) = lim 2^-n log|f^n(z)|` on the basin of `∞`.
///
/// The orbit is followed to `|z_n| > 1e8`, where the tail is replaced by the
/// first-order term `½ log|f(z_n)/z_n^2|`. The pole and its preimages have
/// `G = +∞`.
pub fn green_infinity(p: &MapParams, z: Complex, max_iter: usize) -> Result<PotentialValue> {
    let mut z = z;
    let mut scale = 1.0;
    for n in 0..=max_iter {
        let r = z.norm();
        if !r.is_finite() || (!p.is_degenerate() && z == p.a) {
            return Ok(PotentialValue { value: f64::INFINITY, iterations_used: n, converged: true });
        }
        if r > GREEN_BAILOUT {
            let z2 = z * z;
            let mut tail = Complex::new(1.0, 0.0) + p.c / z2;
            if !p.is_degenerate() {
                tail += p.b / (z2 * (z - p.a));
            }
            let value = scale * (r.ln() + 0.5 * tail.norm().ln());
            return Ok(PotentialValue { value, iterations_used: n, converged: true });
        }
        z = p.eval_finite(z);
        scale *= 0.5;
    }
    Err(Error::NotInBasin { iterations: max_iter })
}

/// Green function together with its gradient, as the complex number
/// `∂G/∂x + i ∂G/∂y`. The distance to the Julia set is estimated as
/// `G / |∇G|`. Returns `None` off the basin.
pub fn green_with_gradient(p: &MapParams, z: Complex, max_iter: usize) -> Option<(f64, Complex)> {
    let mut z = z;
    let mut dz = Complex::new(1.0, 0.0);
    let mut scale = 1.0;
    for _ in 0..=max_iter {
        let r = z.norm();
        if !r.is_finite() {
            return Some((f64::INFINITY, Complex::new(0.0, 0.0)));
        }
        if r > GREEN_BAILOUT {
            let g = scale * r.ln();
            let grad = scale * (dz / z).conj();
            return Some((g, grad));
        }
        dz *= p.derivative_unchecked(z);
        z = p.eval_finite(z);
        scale *= 0.5;
    }
    None
}

/// Iteration cap after which an orbit that has not escaped certainly has
/// potential below `floor`.
pub fn floor_iterations(floor: f64) -> usize {
    if floor > 0.0 {
        (((GREEN_BAILOUT.ln() / floor).log2().ceil().max(0.0) as usize).saturating_add(2)).min(10_000)
    } else {
        10_000
    }
}

/// Green function for level-set work: returns `0` for points that have not
/// escaped once `2^-n log(bailout)` has dropped below `floor`, i.e. points
/// whose potential is certainly below `floor`.
pub fn green_floor(p: &MapParams, z: Complex, floor: f64) -> f64 {
    green_infinity(p, z, floor_iterations(floor)).map_or(0.0, |v| v.value)
}

fn check_attracting<M: Holomorphic>(map: &M, fixed: Complex) -> Result<Complex> {
    let lambda = map.deriv(fixed);
    let m = lambda.norm();
    if m < MULTIPLIER_TOL {
        return Err(Error::SuperattractingFixedPoint);
    }
    if !(m < 1.0 - MULTIPLIER_TOL) {
        return Err(Error::NotAttracting { modulus: m });
    }
    Ok(lambda)
}

/// Koenigs coordinate `Φ(z) = lim λ^-n (f^n(z) - p)` and `G_f = |Φ|^2`.
///
/// The orbit is followed until `|f^n(z) - p| < 1e-5 (1 + |p|)` and closed
/// with the second-order term `a₂ζ²`, `a₂ = f''(p) / (2λ(λ - 1))`. At that
/// radius the neglected cubic term and the cancellation in `f(p + ζ) - p`
/// are both near `1e-10` relative.
pub fn koenigs<M: Holomorphic>(map: &M, fixed: Complex, z: Complex) -> Result<KoenigsValue> {
    const MAX_ITER: usize = 100_000;
    let lambda = check_attracting(map, fixed)?;
    let a2 = map.second_deriv(fixed) / (2.0 * lambda * (lambda - 1.0));
    let inv = 1.0 / lambda;
    let stop = 1e-5 * (1.0 + fixed.norm());
    let mut zeta = z - fixed;
    let mut scale = Complex::new(1.0, 0.0);
    for n in 0..MAX_ITER {
        let r = zeta.norm();
        if !r.is_finite() || r > 1e6 {
            return Err(Error::NotInBasin { iterations: n });
        }
        if r < stop {
            let phi = scale * (zeta + a2 * zeta * zeta);
            if !(phi.re.is_finite() && phi.im.is_finite()) {
                return Err(Error::NotInBasin { iterations: n });
            }
            return Ok(KoenigsValue { phi, g: phi.norm_sqr(), iterations_used: n });
        }
        zeta = map.apply(fixed + zeta) - fixed;
        scale *= inv;
    }
    Err(Error::NotInBasin { iterations: MAX_ITER })
}

/// `lim 2^-n log|f^n(z) - p|` at a superattracting fixed point `p` of local
/// degree 2. The orbit is followed until `|f^n(z) - p| < 1e-7`, and the tail
/// is closed with `log|f''(p)/2|`.
pub fn boettcher_super<M: Holomorphic>(map: &M, fixed: Complex, z: Complex) -> Result<PotentialValue> {
    const MAX_ITER: usize = 10_000;
    if map.deriv(fixed).norm() >= MULTIPLIER_TOL {
        return Err(Error::NotAttracting { modulus: map.deriv(fixed).norm() });
    }
    let a = 0.5 * map.second_deriv(fixed);
    if a.norm() < MULTIPLIER_TOL {
        return Err(Error::Invalid("local degree above 2".into()));
    }
    let stop = 1e-7;
    let mut zeta = z - fixed;
    let mut scale = 1.0;
    for n in 0..MAX_ITER {
        let r = zeta.norm();
        if !r.is_finite() || r > 1e6 {
            return Err(Error::NotInBasin { iterations: n });
        }
        if r == 0.0 {
            return Ok(PotentialValue { value: f64::NEG_INFINITY, iterations_used: n, converged: true });
        }
        if r < stop {
            let value = scale * (r.ln() + a.norm().ln());
            return Ok(PotentialValue { value, iterations_used: n, converged: true });
        }
        zeta = map.apply(fixed + zeta) - fixed;
        scale *= 0.5;
    }
    Err(Error::NotInBasin { iterations: MAX_ITER })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Saddle {
    #[serde(with = "pair")]
    pub point: Complex,
    /// Index of the critical point this saddle is a preimage of.
    pub critical: usize,
    pub depth: usize,
    pub level: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleSpectrum {
    pub saddles: Vec<Saddle>,
    /// Preimages of `∞` (the pole and its preimages) with their depth; these
    /// are the extremal points of `G`, where it is infinite.
    pub attractor_preimages: Vec<(crate::family::Point, usize)>,
}

impl SaddleSpectrum {
    /// Distinct saddle levels, descending.
    pub fn levels(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.saddles.iter().map(|s| s.level).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        v
    }
}

/// Escaping critical points and their iterated preimages up to `depth`,
/// each at level `G(c) / 2^j`.
pub fn saddle_levels(p: &MapParams, depth: usize) -> Result<SaddleSpectrum> {
    let cfg = ClassifierConfig::default();
    let crit = p.critical_points()?;
    let mut saddles = Vec::new();
    for (i, c) in crit.points().into_iter().enumerate() {
        if !classify_orbit(p, c, &cfg).escapes() {
            continue;
        }
        let g = green_infinity(p, c, cfg.max_iter)?.value;
        let mut layer = vec![c];
        for j in 0..=depth {
            let level = g / f64::powi(2.0, j as i32);
            for &x in &layer {
                saddles.push(Saddle { point: x, critical: i, depth: j, level });
            }
            if j < depth {
                let mut next = Vec::with_capacity(layer.len() * p.degree());
                for &x in &layer {
                    next.extend(preimages(p, x)?.preimages);
                }
                layer = next;
            }
        }
    }
    let mut attractor_preimages = Vec::new();
    if !p.is_degenerate() && depth >= 1 {
        let mut layer = vec![p.a];
        for j in 1..=depth {
            for &x in &layer {
                attractor_preimages.push((crate::family::Point::Finite(x), j));
            }
            if j < depth {
                let mut next = Vec::new();
                for &x in &layer {
                    next.extend(preimages(p, x)?.preimages);
                }
                layer = next;
            }
        }
    }
    Ok(SaddleSpectrum { saddles, attractor_preimages })
}

/// Traced equipotential `{G = level}`.
///
/// `sublevel_components` counts the 4-connected components of `{G < level}`
/// on the grid. Small loops around the pole and its preimages (where
/// `G = +∞`) bound holes of that set and do not change the count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelCurve {
    pub level: f64,
    pub curves: Vec<Polyline>,
    pub sublevel_components: usize,
    pub grid_resolution: usize,
    pub window: Window,
}

impl LevelCurve {
    pub fn component_count(&self) -> usize {
        self.sublevel_components
    }
}

/// Green function sampled at pixel centers; potentials well below `floor`
/// are reported as 0.
pub fn green_grid(p: &MapParams, grid: &Grid, floor: f64) -> Vec<f64> {
    grid.sample(|z| green_floor(p, z, floor))
}

pub fn trace_level(p: &MapParams, level: f64, window: Window, resolution: usize) -> Result<LevelCurve> {
    if !(level > 0.0) {
        return Err(Error::Invalid("level must be positive".into()));
    }
    let grid = Grid::with_resolution(window, resolution)?;
    let floor = level * 1e-3;
    let values = green_grid(p, &grid, floor);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < level && hi >= level) {
        return Err(Error::LevelOutsideWindow { level });
    }
    let curves = marching_squares(&grid, &values, level, |z| green_floor(p, z, floor));
    let sublevel_components = sublevel_count(&grid, &values, level);
    Ok(LevelCurve { level, curves, sublevel_components, grid_resolution: resolution, window })
}

fn sublevel_count(grid: &Grid, values: &[f64], level: f64) -> usize {
    let mask: Vec<bool> = values.iter().map(|&v| v < level).collect();
    label_components(&mask, grid.width, grid.height, Connectivity::Four).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureEightConfig {
    /// Relative band: the count is taken at `t0·(1 ± band)`.
    pub band: f64,
    pub resolution: usize,
}

impl Default for FigureEightConfig {
    fn default() -> Self {
        FigureEightConfig { band: 1e-3, resolution: 800 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureEight {
    pub t0: f64,
    #[serde(with = "pair")]
    pub critical: Complex,
    pub count_above: usize,
    pub count_below: usize,
    pub verified: bool,
    pub window: Window,
}

/// Default window for whole-Julia-set work: the square of half-width
/// `1.05·R` around the origin.
pub fn escape_window(p: &MapParams) -> Window {
    let r = 1.05 * escape_radius(p);
    Window { re_min: -r, re_max: r, im_min: -r, im_max: r }
}

/// Level of the equipotential through the single escaping free critical
/// point, verified by the sublevel component count going 1 → 2 across it.
pub fn figure_eight_level(p: &MapParams, cfg: &FigureEightConfig) -> Result<FigureEight> {
    let ccfg = ClassifierConfig::default();
    let crit = p.critical_points()?;
    let escaping: Vec<Complex> =
        crit.points().into_iter().filter(|&c| classify_orbit(p, c, &ccfg).escapes()).collect();
    let critical = match escaping.len() {
        0 => return Err(Error::NoEscapingCritical),
        1 => escaping[0],
        n => return Err(Error::MultipleEscaping { count: n }),
    };
    let t0 = green_infinity(p, critical, ccfg.max_iter)?.value;
    let window = escape_window(p);
    let grid = Grid::with_resolution(window, cfg.resolution)?;
    let lo = t0 * (1.0 - cfg.band);
    let values = green_grid(p, &grid, lo * 1e-3);
    let count_above = sublevel_count(&grid, &values, t0 * (1.0 + cfg.band));
    let count_below = sublevel_count(&grid, &values, lo);
    Ok(FigureEight {
        t0,
        critical,
        count_above,
        count_below,
        verified: count_above == 1 && count_below == 2,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{from_kw, KwParams};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn intro() -> MapParams {
        MapParams::real(1.719727, 0.3142117, -3.121092).unwrap()
    }

    #[test]
    fn green_of_z_squared() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let g = green_infinity(&p, c(2.0, 0.0), 100).unwrap();
        assert!((g.value - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn green_far_out_is_log_modulus() {
        let p = intro();
        let z = Complex::from_polar(1e6, 0.7);
        let g = green_infinity(&p, z, 100).unwrap().value;
        assert!((g - 1e6f64.ln()).abs() < 1e-5 * 1e6f64.ln());
    }

    #[test]
    fn green_not_in_basin() {
        let p = intro();
        assert!(matches!(green_infinity(&p, c(2.0, 0.0), 500), Err(Error::NotInBasin { .. })));
    }

    struct Affine {
        p: Complex,
        lambda: Complex,
    }

    impl Holomorphic for Affine {
        fn apply(&self, z: Complex) -> Complex {
            self.p + self.lambda * (z - self.p)
        }
        fn deriv(&self, _: Complex) -> Complex {
            self.lambda
        }
        fn second_deriv(&self, _: Complex) -> Complex {
            c(0.0, 0.0)
        }
    }

    #[test]
    fn koenigs_of_affine_map_is_translation() {
        let m = Affine { p: c(0.3, -0.2), lambda: c(0.5, 0.0) };
        let z = c(0.9, 0.4);
        let k = koenigs(&m, m.p, z).unwrap();
        assert!((k.phi - (z - m.p)).norm() < 1e-9);
    }

    #[test]
    fn koenigs_rejects_superattracting() {
        let p = from_kw(&KwParams::new(0.85, 1.88053)).unwrap();
        assert!(matches!(koenigs(&p, c(1.88053, 0.0), c(1.9, 0.0)), Err(Error::SuperattractingFixedPoint)));
    }

    #[test]
    fn boettcher_of_z_squared() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let z = c(0.3, 0.4);
        let v = boettcher_super(&p, c(0.0, 0.0), z).unwrap();
        assert!((v.value - 0.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn boettcher_functional_equation_intro() {
        // The printed constants are rounded, which leaves w with multiplier
        // ~1e-5; the slice map through them has w exactly superattracting.
        let q = crate::family::to_kw(&intro()).unwrap();
        let p = q.to_map().unwrap();
        let fixed = q.w;
        for z in [c(2.05, 0.0), c(1.97, 0.03), c(2.0, -0.04)] {
            let v = boettcher_super(&p, fixed, z).unwrap().value;
            let vf = boettcher_super(&p, fixed, p.eval_finite(z)).unwrap().value;
            assert!((vf - 2.0 * v).abs() < 1e-8 * (1.0 + v.abs()));
            assert!(vf < v);
        }
    }

    #[test]
    fn saddle_ladder_quadratic() {
        let p = MapParams::quadratic(c(-6.0, 0.0));
        let s = saddle_levels(&p, 3).unwrap();
        let g0 = green_infinity(&p, c(0.0, 0.0), 100).unwrap().value;
        for sd in &s.saddles {
            assert!((sd.level - g0 / f64::powi(2.0, sd.depth as i32)).abs() < 1e-12);
            let g = green_infinity(&p, sd.point, 100).unwrap().value;
            assert!((g - sd.level).abs() < 1e-8 * (1.0 + g));
        }
        assert_eq!(s.saddles.iter().filter(|x| x.depth == 3).count(), 8);
        assert_eq!(saddle_levels(&p, 0).unwrap().saddles.len(), 1);
    }

    #[test]
    fn circle_level_of_z_squared() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let lc = trace_level(&p, 2f64.ln(), Window::new(-3.0, 3.0, -3.0, 3.0).unwrap(), 200).unwrap();
        assert_eq!(lc.component_count(), 1);
        assert_eq!(lc.curves.len(), 1);
        for z in &lc.curves[0].points {
            assert!((z.norm() - 2.0).abs() < 0.03);
        }
    }

    #[test]
    fn level_outside_window() {
        let p = MapParams::quadratic(c(0.0, 0.0));
        let r = trace_level(&p, 50.0, Window::new(-3.0, 3.0, -3.0, 3.0).unwrap(), 64);
        assert!(matches!(r, Err(Error::LevelOutsideWindow { .. })));
    }

    #[test]
    fn figure_eight_quadratic() {
        let p = MapParams::quadratic(c(-6.0, 0.0));
        let f = figure_eight_level(&p, &FigureEightConfig::default()).unwrap();
        assert!(f.verified, "{f:?}");
        assert!(f.critical.norm() < 1e-12);
    }

    #[test]
    fn figure_eight_newton_regime_has_no_escaping_point() {
        let p = from_kw(&KwParams::new(0.85, 0.7136114)).unwrap();
        assert!(matches!(figure_eight_level(&p, &FigureEightConfig::default()), Err(Error::NoEscapingCritical)));
    }
}
