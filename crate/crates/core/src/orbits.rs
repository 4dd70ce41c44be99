//! Orbit iteration: certified escape, attracting-cycle detection with Newton
//! refinement, and the joint fate of the two free critical points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{pair, slice_criticals, to_kw, Complex, KwParams, MapParams, SliceCriticals};

/// Distance below which an iterate is treated as the pole itself.
pub const POLE_TOL: f64 = 1e-12;
/// Two cycles (or a cycle and `w`) are the same when this close.
pub const CYCLE_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub max_iter: usize,
    pub cycle_tol: f64,
    pub newton_steps: usize,
    pub escape_radius_override: Option<f64>,
    pub period_cap: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            max_iter: 10_000,
            cycle_tol: 1e-9,
            newton_steps: 30,
            escape_radius_override: None,
            period_cap: 64,
        }
    }
}

impl ClassifierConfig {
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Invalid("max_iter must be at least 1".into()));
        }
        if !(self.cycle_tol > 0.0) || self.period_cap == 0 {
            return Err(Error::Invalid("cycle_tol and period_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitFate {
    #[serde(rename = "infinity")]
    ToInfinity { escape_time: usize },
    #[serde(rename = "cycle")]
    ToCycle {
        period: usize,
        #[serde(rename = "points", with = "pair::vec")]
        cycle: Vec<Complex>,
        #[serde(with = "pair")]
        multiplier: Complex,
    },
    Undecided { iterations: usize },
}

impl OrbitFate {
    pub fn escapes(&self) -> bool {
        matches!(self, OrbitFate::ToInfinity { .. })
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            OrbitFate::ToCycle { period, .. } => Some(*period),
            _ => None,
        }
    }

    /// True when the orbit is attracted to the fixed point `target`.
    pub fn is_fixed_at(&self, target: Complex) -> bool {
        match self {
            OrbitFate::ToCycle { period: 1, cycle, .. } => {
                (cycle[0] - target).norm() < CYCLE_MATCH_TOL * (1.0 + target.norm())
            }
            _ => false,
        }
    }

    /// True when the orbit is attracted to a cycle containing `target`.
    pub fn cycle_contains(&self, target: Complex) -> bool {
        match self {
            OrbitFate::ToCycle { cycle, .. } => {
                cycle.iter().any(|z| (z - target).norm() < CYCLE_MATCH_TOL * (1.0 + target.norm()))
            }
            _ => false,
        }
    }
}

/// `max(|a| + 1, 2 + sqrt(1 + |b| + |c|))`: beyond it `|f(z)| ≥ 2|z|`.
pub fn escape_radius(p: &MapParams) -> f64 {
    let a_term = if p.is_degenerate() { 0.0 } else { p.a.norm() + 1.0 };
    a_term.max(2.0 + (1.0 + p.b.norm() + p.c.norm()).sqrt())
}

fn radius(p: &MapParams, cfg: &ClassifierConfig) -> f64 {
    let r = escape_radius(p);
    cfg.escape_radius_override.map_or(r, |o| o.max(r))
}

#[inline]
fn near_pole(p: &MapParams, z: Complex) -> bool {
    !p.is_degenerate() && (z - p.a).norm() < POLE_TOL
}

/// Classifies the forward orbit of `z0`.
///
/// Escape is declared once `|z| > R`. Otherwise a Brent-style tortoise
/// (re-saved at power-of-two distances, at most `period_cap` apart) looks for
/// near returns; a candidate period is Newton-refined and accepted only if
/// the resulting cycle is attracting.
pub fn classify_orbit(p: &MapParams, z0: Complex, cfg: &ClassifierConfig) -> OrbitFate {
    let r = radius(p, cfg);
    let r2 = r * r;
    let mut z = z0;
    if !(z.norm_sqr() <= r2) {
        return OrbitFate::ToInfinity { escape_time: 0 };
    }
    let mut saved = z;
    let mut saved_at = 0usize;
    let mut power = 1usize;
    for n in 1..=cfg.max_iter {
        if near_pole(p, z) {
            return OrbitFate::ToInfinity { escape_time: n };
        }
        z = p.eval_finite(z);
        if !(z.norm_sqr() <= r2) {
            return OrbitFate::ToInfinity { escape_time: n };
        }
        let lag = n - saved_at;
        if lag <= cfg.period_cap && (z - saved).norm() < cfg.cycle_tol * (1.0 + z.norm()) {
            if let Some(fate) = accept_cycle(p, z, lag, cfg) {
                return fate;
            }
        }
        if lag >= power {
            saved = z;
            saved_at = n;
            power = (power * 2).min(cfg.period_cap);
        }
    }
    OrbitFate::Undecided { iterations: cfg.max_iter }
}

fn accept_cycle(p: &MapParams, z: Complex, period: usize, cfg: &ClassifierConfig) -> Option<OrbitFate> {
    let (cycle, multiplier) = refine_cycle(p, z, period, cfg.newton_steps).ok()?;
    if !cycle.iter().any(|x| (x - z).norm() < 1e-3 * (1.0 + z.norm())) {
        return None;
    }
    if !(multiplier.norm() < 1.0) {
        return None;
    }
    Some(OrbitFate::ToCycle { period: cycle.len(), cycle, multiplier })
}

/// `(f^n(z), (f^n)'(z))`.
fn iterate_with_derivative(p: &MapParams, mut z: Complex, n: usize) -> (Complex, Complex) {
    let mut d = Complex::new(1.0, 0.0);
    for _ in 0..n {
        d *= p.derivative_unchecked(z);
        z = p.eval_finite(z);
    }
    (z, d)
}

/// Newton iteration on `g(z) = f^period(z) - z` from `approx`.
///
/// Returns the cycle at its minimal period, rotated so that it starts at the
/// point with the smallest real part, together with the multiplier `Π f'(z_i)`.
pub fn refine_cycle(
    p: &MapParams,
    approx: Complex,
    period: usize,
    newton_steps: usize,
) -> Result<(Vec<Complex>, Complex)> {
    if period == 0 {
        return Err(Error::Invalid("period must be positive".into()));
    }
    let mut z = approx;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..=newton_steps {
        let (fz, d) = iterate_with_derivative(p, z, period);
        let g = fz - z;
        residual = g.norm();
        if !residual.is_finite() {
            break;
        }
        if residual < 1e-12 {
            converged = true;
            break;
        }
        let step = g / (d - 1.0);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            let (fz, _) = iterate_with_derivative(p, z, period);
            residual = (fz - z).norm();
            converged = residual < 1e-9 * (1.0 + z.norm());
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { period, residual });
    }
    let minimal = (1..=period)
        .filter(|&q| period.is_multiple_of(q))
        .find(|&q| {
            let (fz, _) = iterate_with_derivative(p, z, q);
            (fz - z).norm() < 1e-9 * (1.0 + z.norm())
        })
        .unwrap_or(period);
    let mut cycle = Vec::with_capacity(minimal);
    let mut multiplier = Complex::new(1.0, 0.0);
    let mut x = z;
    for _ in 0..minimal {
        cycle.push(x);
        multiplier *= p.derivative_unchecked(x);
        x = p.eval_finite(x);
    }
    let start = (0..cycle.len())
        .min_by(|&i, &j| cycle[i].re.total_cmp(&cycle[j].re).then(cycle[i].im.total_cmp(&cycle[j].im)))
        .unwrap_or(0);
    cycle.rotate_left(start);
    Ok((cycle, multiplier))
}

/// Fate of a critical point relative to the fixed critical point `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FateClass {
    Inf,
    W,
    Other,
}

impl FateClass {
    pub fn index(self) -> u8 {
        match self {
            FateClass::Inf => 0,
            FateClass::W => 1,
            FateClass::Other => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(FateClass::Inf),
            1 => Some(FateClass::W),
            2 => Some(FateClass::Other),
            _ => None,
        }
    }

    pub fn of(fate: &OrbitFate, w: Complex) -> Self {
        match fate {
            OrbitFate::ToInfinity { .. } => FateClass::Inf,
            f if f.is_fixed_at(w) => FateClass::W,
            _ => FateClass::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FateClass::Inf => "inf",
            FateClass::W => "w",
            FateClass::Other => "other",
        }
    }
}

/// Joint fate of `u` and `v`; code `3·u + v` in `0..=8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NineColor {
    pub u: FateClass,
    pub v: FateClass,
    pub u_undecided: bool,
    pub v_undecided: bool,
}

impl NineColor {
    pub fn code(&self) -> u8 {
        3 * self.u.index() + self.v.index()
    }

    pub fn from_code(code: u8) -> Option<Self> {
        if code > 8 {
            return None;
        }
        Some(NineColor {
            u: FateClass::from_index(code / 3)?,
            v: FateClass::from_index(code % 3)?,
            u_undecided: false,
            v_undecided: false,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalFates {
    pub kw: KwParams,
    pub criticals: SliceCriticals,
    pub u: OrbitFate,
    pub v: OrbitFate,
    pub w: OrbitFate,
    pub color: NineColor,
}

/// Classifies the free critical points `u`, `v` of a slice map.
pub fn critical_fates(p: &MapParams, cfg: &ClassifierConfig) -> Result<CriticalFates> {
    let kw = to_kw(p)?;
    critical_fates_kw(&kw, p, cfg)
}

/// Same as [`critical_fates`] when `(k, w)` is already known.
pub fn critical_fates_kw(kw: &KwParams, p: &MapParams, cfg: &ClassifierConfig) -> Result<CriticalFates> {
    let criticals = slice_criticals(kw)?;
    let u = classify_orbit(p, criticals.u, cfg);
    let v = classify_orbit(p, criticals.v, cfg);
    let w = classify_orbit(p, criticals.w, cfg);
    let color = NineColor {
        u: FateClass::of(&u, criticals.w),
        v: FateClass::of(&v, criticals.w),
        u_undecided: matches!(u, OrbitFate::Undecided { .. }),
        v_undecided: matches!(v, OrbitFate::Undecided { .. }),
    };
    Ok(CriticalFates { kw: *kw, criticals, u, v, w, color })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{from_kw, KwParams};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn map(k: f64, w: f64) -> MapParams {
        from_kw(&KwParams::new(k, w)).unwrap()
    }

    #[test]
    fn radius_branches() {
        assert_eq!(escape_radius(&MapParams::quadratic(c(0.0, 0.0))), 3.0);
        let p = MapParams::real(10.0, 0.1, 0.2).unwrap();
        assert_eq!(escape_radius(&p), 11.0);
    }

    #[test]
    fn radius_doubles_on_circle() {
        let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
        let r = escape_radius(&p);
        for i in 0..100 {
            let t = i as f64 * std::f64::consts::TAU / 100.0;
            let z = Complex::from_polar(r, t);
            assert!(p.eval_finite(z).norm() >= 2.0 * r);
        }
    }

    #[test]
    fn slice_fates_at_period_two_root() {
        let p = map(0.85, 1.88053);
        let s = slice_criticals(&KwParams::new(0.85, 1.88053)).unwrap();
        let cfg = ClassifierConfig::default();
        match classify_orbit(&p, s.w, &cfg) {
            OrbitFate::ToCycle { period: 1, multiplier, .. } => assert!(multiplier.norm() < 1e-8),
            other => panic!("w: {other:?}"),
        }
        assert_eq!(classify_orbit(&p, s.v, &cfg).period(), Some(2));
        assert!(classify_orbit(&p, s.u, &cfg).escapes());
    }

    #[test]
    fn outside_radius_escapes_immediately() {
        let p = map(0.85, 1.88053);
        let r = escape_radius(&p);
        let fate = classify_orbit(&p, c(r + 1.0, 0.0), &ClassifierConfig::default());
        assert!(matches!(fate, OrbitFate::ToInfinity { escape_time: 0 | 1 }));
    }

    #[test]
    fn pole_routes_to_infinity() {
        let p = map(0.85, 1.88053);
        let fate = classify_orbit(&p, p.a, &ClassifierConfig::default());
        assert!(matches!(fate, OrbitFate::ToInfinity { escape_time: 1 }));
    }

    #[test]
    fn refine_at_exact_w() {
        let p = map(0.85, 1.88053);
        let (cycle, m) = refine_cycle(&p, c(1.88053, 0.0), 1, 30).unwrap();
        assert!((cycle[0] - c(1.88053, 0.0)).norm() < 1e-12);
        assert!(m.norm() < 1e-10);
    }

    #[test]
    fn refine_period_two_from_v() {
        let p = map(0.85, 1.88053);
        let s = slice_criticals(&KwParams::new(0.85, 1.88053)).unwrap();
        let (cycle, _) = refine_cycle(&p, s.v, 2, 30).unwrap();
        assert_eq!(cycle.len(), 2);
        let z = cycle[0];
        let back = p.eval_finite(p.eval_finite(z));
        assert!((back - z).norm() < 1e-12);
        assert!(cycle.iter().any(|x| (x - s.v).norm() < 1e-3));
    }

    #[test]
    fn refine_from_escaping_seed_fails() {
        let p = map(0.85, 1.88053);
        assert!(matches!(refine_cycle(&p, c(50.0, 50.0), 3, 30), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn intro_fates() {
        let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
        let f = critical_fates(&p, &ClassifierConfig::default()).unwrap();
        assert_eq!(f.color.u, FateClass::Inf);
        assert_eq!(f.color.v, FateClass::Other);
        assert_eq!(f.v.period(), Some(2));
    }

    #[test]
    fn newton_regime_v_goes_to_u() {
        let p = map(0.85, 0.7136114);
        let f = critical_fates(&p, &ClassifierConfig::default()).unwrap();
        assert_eq!((f.color.u, f.color.v), (FateClass::Other, FateClass::Other));
        // w is a 7-digit value, so u is fixed only up to a few 1e-6.
        match (&f.u, &f.v) {
            (OrbitFate::ToCycle { period: 1, cycle: cu, .. }, OrbitFate::ToCycle { period: 1, cycle: cv, .. }) => {
                assert!((cu[0] - f.criticals.u).norm() < 1e-4);
                assert!((cv[0] - cu[0]).norm() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn u_in_basin_of_w() {
        let p = map(0.81, 1.49);
        let f = critical_fates(&p, &ClassifierConfig::default()).unwrap();
        assert_eq!(f.color.u, FateClass::W);
    }

    #[test]
    fn nine_color_codes() {
        for code in 0..9 {
            assert_eq!(NineColor::from_code(code).unwrap().code(), code);
        }
        assert!(NineColor::from_code(9).is_none());
    }

    #[test]
    fn fate_json() {
        let f = OrbitFate::ToCycle { period: 1, cycle: vec![c(1.0, 2.0)], multiplier: c(0.0, 0.0) };
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"kind":"cycle","period":1,"points":[[1.0,2.0]],"multiplier":[0.0,0.0]}"#
        );
    }
}
