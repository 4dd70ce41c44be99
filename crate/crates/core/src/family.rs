//! The family `f(z) = z^2 + c + b/(z - a)`, its critical and fixed points,
//! and the `(k, w)` slice on which `w` is a fixed critical point.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// Residual tolerance for critical and fixed points, scaled by `1 + |b|`.
pub const ROOT_TOL: f64 = 1e-9;
/// Band around `|λ| = 1` (and around `λ = 0`) used for multiplier classes.
pub const MULTIPLIER_TOL: f64 = 1e-8;

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(Complex),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<Complex> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Point::Infinity)
    }
}

impl From<Complex> for Point {
    fn from(z: Complex) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Point::Finite(z)
        } else {
            Point::Infinity
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            Point::Infinity => f.write_str("inf"),
        }
    }
}

/// Complex numbers travel as `[re, im]` pairs in every JSON document.
pub mod pair {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex::new(re, im))
    }

    pub mod vec {
        use super::Complex;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|z| [z.re, z.im]))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
            let v = Vec::<[f64; 2]>::deserialize(d)?;
            Ok(v.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(&z.re)?;
                seq.serialize_element(&z.im)?;
                seq.end()
            }
            Point::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair([re, im]) => Ok(Point::Finite(Complex::new(re, im))),
            Raw::Tag(t) if t == "inf" => Ok(Point::Infinity),
            Raw::Tag(t) => Err(de::Error::custom(format!("expected [re, im] or \"inf\", got {t:?}"))),
        }
    }
}

/// Anything that can be iterated by the potential and orbit code.
pub trait Holomorphic {
    fn apply(&self, z: Complex) -> Complex;
    fn deriv(&self, z: Complex) -> Complex;
    fn second_deriv(&self, z: Complex) -> Complex;
}

/// The `n`-th iterate of a map, with derivatives by the chain rule.
#[derive(Clone, Copy, Debug)]
pub struct Iterate<'a, M> {
    pub map: &'a M,
    pub n: usize,
}

impl<M: Holomorphic> Holomorphic for Iterate<'_, M> {
    fn apply(&self, mut z: Complex) -> Complex {
        for _ in 0..self.n {
            z = self.map.apply(z);
        }
        z
    }

    fn deriv(&self, mut z: Complex) -> Complex {
        let mut d = ONE;
        for _ in 0..self.n {
            d *= self.map.deriv(z);
            z = self.map.apply(z);
        }
        d
    }

    fn second_deriv(&self, mut z: Complex) -> Complex {
        // (g∘h)'' = g''(h)·h'^2 + g'(h)·h''
        let mut d1 = ONE;
        let mut d2 = ZERO;
        for _ in 0..self.n {
            let g1 = self.map.deriv(z);
            let g2 = self.map.second_deriv(z);
            d2 = g2 * d1 * d1 + g1 * d2;
            d1 *= g1;
            z = self.map.apply(z);
        }
        d2
    }
}

/// Coefficients of `f(z) = z^2 + c + b/(z - a)`.
///
/// `b = 0` is only accepted through [`MapParams::quadratic`], which sets an
/// explicit degenerate flag: the map is then `z^2 + c` of degree 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapParams {
    #[serde(with = "pair")]
    pub a: Complex,
    #[serde(with = "pair")]
    pub b: Complex,
    #[serde(with = "pair")]
    pub c: Complex,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    degenerate: bool,
}

impl MapParams {
    pub fn new(a: Complex, b: Complex, c: Complex) -> Result<Self> {
        if b == ZERO {
            return Err(Error::DegenerateFamily);
        }
        if !(a.norm().is_finite() && b.norm().is_finite() && c.norm().is_finite()) {
            return Err(Error::Invalid("non-finite map coefficient".into()));
        }
        Ok(MapParams { a, b, c, degenerate: false })
    }

    pub fn real(a: f64, b: f64, c: f64) -> Result<Self> {
        MapParams::new(Complex::new(a, 0.0), Complex::new(b, 0.0), Complex::new(c, 0.0))
    }

    /// The quadratic `z^2 + c`, i.e. the `b = 0` degeneration.
    pub fn quadratic(c: Complex) -> Self {
        MapParams { a: ZERO, b: ZERO, c, degenerate: true }
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn degree(&self) -> usize {
        if self.degenerate {
            2
        } else {
            3
        }
    }

    /// `f(z)` on finite input; returns a non-finite value at the pole.
    #[inline]
    pub fn eval_finite(&self, z: Complex) -> Complex {
        if self.degenerate {
            z * z + self.c
        } else {
            z * z + self.c + self.b / (z - self.a)
        }
    }

    /// `f` on the sphere.
    pub fn eval(&self, z: Point) -> Point {
        match z {
            Point::Infinity => Point::Infinity,
            Point::Finite(z) if !self.degenerate && z == self.a => Point::Infinity,
            Point::Finite(z) => Point::from(self.eval_finite(z)),
        }
    }

    #[inline]
    pub fn derivative_unchecked(&self, z: Complex) -> Complex {
        if self.degenerate {
            2.0 * z
        } else {
            let d = z - self.a;
            2.0 * z - self.b / (d * d)
        }
    }

    /// `f'(z) = 2z - b/(z - a)^2`.
    pub fn derivative(&self, z: Point) -> Result<Complex> {
        match z {
            Point::Infinity => Err(Error::PoleDerivative),
            Point::Finite(z) if !self.degenerate && z == self.a => Err(Error::PoleDerivative),
            Point::Finite(z) => Ok(self.derivative_unchecked(z)),
        }
    }

    pub fn second_derivative_unchecked(&self, z: Complex) -> Complex {
        if self.degenerate {
            Complex::new(2.0, 0.0)
        } else {
            let d = z - self.a;
            2.0 + 2.0 * self.b / (d * d * d)
        }
    }

    /// `2z(z - a)^2 - b`, whose roots are the finite critical points.
    pub fn critical_polynomial(&self) -> Poly {
        if self.degenerate {
            return Poly::linear(ZERO);
        }
        let a = self.a;
        Poly::new(vec![-self.b, 2.0 * a * a, -4.0 * a, Complex::new(2.0, 0.0)])
    }

    /// `(z^2 - z + c)(z - a) + b`, whose roots are the finite fixed points.
    pub fn fixed_point_polynomial(&self) -> Poly {
        if self.degenerate {
            return Poly::new(vec![self.c, -ONE, ONE]);
        }
        let (a, b, c) = (self.a, self.b, self.c);
        Poly::new(vec![b - a * c, a + c, -(a + ONE), ONE])
    }

    /// Numerator of `f(z) - y`: the preimage polynomial.
    pub fn preimage_polynomial(&self, y: Complex) -> Poly {
        let s = self.c - y;
        if self.degenerate {
            return Poly::new(vec![s, ZERO, ONE]);
        }
        let a = self.a;
        Poly::new(vec![self.b - a * s, s, -a, ONE])
    }

    fn residual_scale(&self) -> f64 {
        1.0 + self.b.norm()
    }

    /// Finite critical points (roots of `2z(z-a)^2 = b`) plus the flag for `∞`.
    pub fn critical_points(&self) -> Result<CriticalData> {
        let poly = self.critical_polynomial();
        let roots = poly.roots()?;
        let scale = self.residual_scale();
        let mut points = Vec::with_capacity(roots.len());
        for z in roots {
            let residual = poly.eval(z).norm();
            if residual >= ROOT_TOL * scale {
                return Err(Error::SolverFailure { what: "critical points", residual });
            }
            points.push(CriticalPoint { point: z, residual });
        }
        Ok(CriticalData { finite: points, includes_infinity: true })
    }

    /// Finite fixed points with multipliers, followed by the superattracting `∞`.
    pub fn fixed_points(&self) -> Result<Vec<FixedPointData>> {
        let poly = self.fixed_point_polynomial();
        let roots = poly.roots()?;
        let scale = self.residual_scale();
        let mut out = Vec::with_capacity(roots.len() + 1);
        for z in roots {
            let residual = poly.eval(z).norm();
            if residual >= ROOT_TOL * scale {
                return Err(Error::SolverFailure { what: "fixed points", residual });
            }
            let multiplier = self.derivative_unchecked(z);
            out.push(FixedPointData {
                point: Point::Finite(z),
                multiplier,
                class: FixedPointClass::of(multiplier),
                residual,
            });
        }
        out.push(FixedPointData {
            point: Point::Infinity,
            multiplier: ZERO,
            class: FixedPointClass::Superattracting,
            residual: 0.0,
        });
        Ok(out)
    }

    /// Newton's-method test: exactly three fixed points on the sphere with
    /// `|λ| < tol`.
    pub fn is_newton(&self, tol: f64) -> Result<NewtonReport> {
        let fixed_points = self.fixed_points()?;
        let superattracting = fixed_points.iter().filter(|f| f.multiplier.norm() < tol).count();
        Ok(NewtonReport { is_newton: superattracting == 3, superattracting, tol, fixed_points })
    }
}

impl Holomorphic for MapParams {
    fn apply(&self, z: Complex) -> Complex {
        self.eval_finite(z)
    }
    fn deriv(&self, z: Complex) -> Complex {
        self.derivative_unchecked(z)
    }
    fn second_deriv(&self, z: Complex) -> Complex {
        self.second_derivative_unchecked(z)
    }
}

impl<'de> Deserialize<'de> for MapParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ParamInput::deserialize(d)?.resolve().map_err(de::Error::custom)
    }
}

/// Accepted JSON shapes for map parameters.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamInput {
    Abc(AbcInput),
    Kw(KwParams),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcInput {
    #[serde(with = "pair")]
    pub a: Complex,
    #[serde(with = "pair")]
    pub b: Complex,
    #[serde(with = "pair")]
    pub c: Complex,
    #[serde(default)]
    pub degenerate: bool,
}

impl ParamInput {
    pub fn resolve(&self) -> Result<MapParams> {
        match self {
            ParamInput::Abc(p) if p.degenerate => {
                if p.b != ZERO {
                    return Err(Error::Invalid("degenerate mode requires b = 0".into()));
                }
                Ok(MapParams::quadratic(p.c))
            }
            ParamInput::Abc(p) => MapParams::new(p.a, p.b, p.c),
            ParamInput::Kw(q) => q.to_map(),
        }
    }
}

/// The experiment slice: `a = kw`, `b = 2w^3(1-k)^2`, `c = w^2(2k-3) + w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KwParams {
    pub k: f64,
    #[serde(with = "real_or_pair")]
    pub w: Complex,
}

/// `w` may be given as a bare number or as `[re, im]`.
mod real_or_pair {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Complex, s: S) -> Result<S::Ok, S::Error> {
        if w.im == 0.0 {
            s.serialize_f64(w.re)
        } else {
            s.collect_seq([w.re, w.im])
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Real(f64),
            Pair([f64; 2]),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Real(x) => Complex::new(x, 0.0),
            Raw::Pair([re, im]) => Complex::new(re, im),
        })
    }
}

impl KwParams {
    pub fn new(k: f64, w: f64) -> Self {
        KwParams { k, w: Complex::new(w, 0.0) }
    }

    /// True when `w` has a non-zero imaginary part; the experiments use real `w`.
    pub fn is_complex(&self) -> bool {
        self.w.im != 0.0
    }

    pub fn to_map(&self) -> Result<MapParams> {
        from_kw(self)
    }

    /// Closed-form critical points `u, v = w(-1/2 + k ∓ sqrt(4k - 3)/2)`.
    /// `u` takes the minus branch; for `4k - 3 < 0` the root is imaginary.
    pub fn closed_form_uv(&self) -> (Complex, Complex) {
        let s = Complex::new(4.0 * self.k - 3.0, 0.0).sqrt();
        let base = -0.5 + self.k;
        (self.w * (base - 0.5 * s), self.w * (base + 0.5 * s))
    }
}

pub fn from_kw(q: &KwParams) -> Result<MapParams> {
    let (k, w) = (q.k, q.w);
    let one_minus_k = 1.0 - k;
    let b = 2.0 * w * w * w * one_minus_k * one_minus_k;
    if one_minus_k == 0.0 || b == ZERO {
        return Err(Error::DegenerateFamily);
    }
    MapParams::new(k * w, b, w * w * (2.0 * k - 3.0) + w)
}

/// Recovers `(k, w)` from `(a, b, c)`.
///
/// Eliminating `k = a/w` gives `3w^2 - (2a + 1)w + c = 0`; of its two roots
/// the one reproducing `b = 2w(w - a)^2` best is kept.
pub fn to_kw(p: &MapParams) -> Result<KwParams> {
    if p.is_degenerate() {
        return Err(Error::DegenerateFamily);
    }
    let tol = 1e-4 * (1.0 + p.b.norm());
    let roots = Poly::new(vec![p.c, -(2.0 * p.a + ONE), Complex::new(3.0, 0.0)]).roots()?;
    let mut best: Option<(f64, Complex)> = None;
    for w in roots {
        if w.norm() < 1e-300 {
            continue;
        }
        let d = w - p.a;
        let residual = (2.0 * w * d * d - p.b).norm();
        if best.is_none_or(|(r, _)| residual < r) {
            best = Some((residual, w));
        }
    }
    let (residual, w) = best.ok_or(Error::NotInFamilySlice { residual: f64::INFINITY })?;
    if residual >= tol {
        return Err(Error::NotInFamilySlice { residual });
    }
    let k = p.a / w;
    if k.im.abs() > 1e-8 * (1.0 + k.re.abs()) {
        return Err(Error::NotInFamilySlice { residual: k.im.abs() });
    }
    Ok(KwParams { k: k.re, w })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    #[serde(with = "pair")]
    pub point: Complex,
    pub residual: f64,
}

/// Finite critical points listed with multiplicity (a double root appears
/// twice), together with the simple critical point at `∞`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalData {
    pub finite: Vec<CriticalPoint>,
    pub includes_infinity: bool,
}

impl CriticalData {
    pub fn points(&self) -> Vec<Complex> {
        self.finite.iter().map(|c| c.point).collect()
    }

    /// Total count on the sphere, `2d - 2` for a degree-`d` map.
    pub fn total_count(&self) -> usize {
        self.finite.len() + usize::from(self.includes_infinity)
    }
}

/// Critical points of a slice map labelled `u`, `v` (free) and `w` (fixed).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SliceCriticals {
    #[serde(with = "pair")]
    pub u: Complex,
    #[serde(with = "pair")]
    pub v: Complex,
    #[serde(with = "pair")]
    pub w: Complex,
}

/// Polished critical points of the slice map, matched against the closed form.
pub fn slice_criticals(q: &KwParams) -> Result<SliceCriticals> {
    let p = from_kw(q)?;
    let crit = p.critical_points()?.points();
    let (u0, v0) = q.closed_form_uv();
    let mut remaining = crit;
    let mut take = |target: Complex| {
        let (i, _) = remaining
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - target).norm().total_cmp(&(y.1 - target).norm()))
            .expect("three critical points");
        remaining.swap_remove(i)
    };
    let w = take(q.w);
    let u = take(u0);
    let v = take(v0);
    Ok(SliceCriticals { u, v, w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointClass {
    Superattracting,
    Attracting,
    Indifferent,
    Repelling,
}

impl FixedPointClass {
    pub fn of(multiplier: Complex) -> Self {
        let m = multiplier.norm();
        if m < MULTIPLIER_TOL {
            FixedPointClass::Superattracting
        } else if (m - 1.0).abs() <= MULTIPLIER_TOL {
            FixedPointClass::Indifferent
        } else if m < 1.0 {
            FixedPointClass::Attracting
        } else {
            FixedPointClass::Repelling
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointData {
    pub point: Point,
    #[serde(with = "pair")]
    pub multiplier: Complex,
    pub class: FixedPointClass,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    pub is_newton: bool,
    pub superattracting: usize,
    pub tol: f64,
    pub fixed_points: Vec<FixedPointData>,
}

/// Leading-order small-`b` positions of the critical points created by a
/// pole at `a`, and their critical values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolePairPrediction {
    #[serde(with = "pair")]
    pub pole: Complex,
    /// `a - sqrt(b / 2a)` and `a + sqrt(b / 2a)`.
    #[serde(serialize_with = "pair::vec::serialize")]
    pub points: [Complex; 2],
    /// `a^2 + c - 2 sqrt(2a) sqrt(b)` and `a^2 + c + 2 sqrt(2a) sqrt(b)`.
    #[serde(serialize_with = "pair::vec::serialize")]
    pub values: [Complex; 2],
}

pub fn pole_pair_prediction(a: Complex, b: Complex, c: Complex) -> PolePairPrediction {
    let delta = (b / (2.0 * a)).sqrt();
    let jump = 2.0 * (2.0 * a).sqrt() * b.sqrt();
    let base = a * a + c;
    PolePairPrediction { pole: a, points: [a - delta, a + delta], values: [base - jump, base + jump] }
}

/// Leading-order position `b / 2a^2` of the critical point that the pole
/// pushes off `0`.
pub fn near_zero_critical_prediction(a: Complex, b: Complex) -> Complex {
    b / (2.0 * a * a)
}

/// The general-degree model `z^2 + c + b Σ 1/(z - a_m)` with poles
/// `a_m = sqrt(-c) + i m T`, `m = 1..=d-2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPoleParams {
    #[serde(with = "pair")]
    pub c: Complex,
    pub b: f64,
    pub t: f64,
    pub d: usize,
}

impl MultiPoleParams {
    pub fn new(c: Complex, b: f64, t: f64, d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::Invalid(format!("degree {d} < 3")));
        }
        if !(b > 0.0 && t > 0.0) {
            return Err(Error::Invalid("b and T must be positive".into()));
        }
        Ok(MultiPoleParams { c, b, t, d })
    }

    pub fn poles(&self) -> Vec<Complex> {
        let root = (-self.c).sqrt();
        (1..=self.d - 2).map(|m| root + Complex::new(0.0, m as f64 * self.t)).collect()
    }

    pub fn eval(&self, z: Complex) -> Complex {
        let sum: Complex = self.poles().iter().map(|&a| 1.0 / (z - a)).sum();
        z * z + self.c + self.b * sum
    }

    pub fn derivative(&self, z: Complex) -> Complex {
        let sum: Complex = self.poles().iter().map(|&a| 1.0 / ((z - a) * (z - a))).sum();
        2.0 * z - self.b * sum
    }

    /// `2z Π (z - a_m)^2 - b Σ_m Π_{t≠m} (z - a_t)^2`, of degree `2d - 3`.
    pub fn critical_polynomial(&self) -> Poly {
        let poles = self.poles();
        let sq = |a: Complex| {
            let l = Poly::linear(a);
            l.mul(&l)
        };
        let mut all = Poly::constant(Complex::new(2.0, 0.0)).mul(&Poly::linear(ZERO));
        for &a in &poles {
            all = all.mul(&sq(a));
        }
        let mut sum = Poly::constant(ZERO);
        for m in 0..poles.len() {
            let mut term = Poly::constant(ONE);
            for (t, &a) in poles.iter().enumerate() {
                if t != m {
                    term = term.mul(&sq(a));
                }
            }
            sum = sum.add(&term);
        }
        all.add(&sum.scale(Complex::new(-self.b, 0.0)))
    }

    pub fn critical_points(&self) -> Result<CriticalData> {
        let poly = self.critical_polynomial();
        let roots = poly.roots()?;
        let mut finite = Vec::with_capacity(roots.len());
        for z in roots {
            let residual = poly.relative_residual(z);
            if residual >= ROOT_TOL {
                return Err(Error::SolverFailure { what: "multi-pole critical points", residual });
            }
            finite.push(CriticalPoint { point: z, residual });
        }
        Ok(CriticalData { finite, includes_infinity: true })
    }

    /// For each pole, the two critical points nearest to it, ordered so that
    /// the first has the smaller real part.
    pub fn pole_pairs(&self, crit: &CriticalData) -> Vec<(Complex, Complex, Complex)> {
        self.poles()
            .into_iter()
            .map(|a| {
                let mut pts = crit.points();
                pts.sort_by(|x, y| (x - a).norm().total_cmp(&(y - a).norm()));
                let (mut lo, mut hi) = (pts[0], pts[1]);
                if hi.re < lo.re {
                    std::mem::swap(&mut lo, &mut hi);
                }
                (a, lo, hi)
            })
            .collect()
    }

    /// Sign of `Re z + (Im z)^2 / 4`: negative left of the parabola
    /// `τ ↦ (-T^2 τ^2, 2Tτ)` through the pole images, positive right of it.
    pub fn parabola_side(z: Complex) -> f64 {
        z.re + z.im * z.im / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn intro() -> MapParams {
        MapParams::real(1.719727, 0.3142117, -3.121092).unwrap()
    }

    #[test]
    fn quadratic_mode_is_z_squared() {
        let p = MapParams::quadratic(ZERO);
        assert_eq!(p.eval(Point::Finite(c(1.0, 1.0))), Point::Finite(c(0.0, 2.0)));
        assert_eq!(p.derivative(Point::Finite(c(3.0, 0.0))).unwrap(), c(6.0, 0.0));
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn b_zero_needs_explicit_mode() {
        assert!(matches!(MapParams::real(1.0, 0.0, 0.0), Err(Error::DegenerateFamily)));
    }

    #[test]
    fn intro_map_fixes_two() {
        let p = intro();
        let fz = p.eval(Point::Finite(c(2.0, 0.0))).finite().unwrap();
        assert!((fz - c(2.0, 0.0)).norm() < 1e-5);
        assert!(p.derivative(Point::Finite(c(2.0, 0.0))).unwrap().norm() < 1e-4);
    }

    #[test]
    fn pole_and_infinity() {
        let p = intro();
        assert_eq!(p.eval(Point::Finite(p.a)), Point::Infinity);
        assert_eq!(p.eval(Point::Infinity), Point::Infinity);
        assert!(matches!(p.derivative(Point::Finite(p.a)), Err(Error::PoleDerivative)));
        assert!(matches!(p.derivative(Point::Infinity), Err(Error::PoleDerivative)));
    }

    #[test]
    fn kw_degenerate() {
        assert!(matches!(from_kw(&KwParams::new(1.0, 1.0)), Err(Error::DegenerateFamily)));
    }

    #[test]
    fn kw_reproduces_intro_constants() {
        let p = from_kw(&KwParams::new(0.8598635, 2.0)).unwrap();
        assert!((p.a.re - 1.719727).abs() < 1e-5);
        assert!((p.b.re - 0.3142117).abs() < 1e-5);
        assert!((p.c.re + 3.121092).abs() < 1e-5);
    }

    #[test]
    fn kw_formula_values() {
        let w = 1.88053;
        let p = from_kw(&KwParams::new(0.85, w)).unwrap();
        assert_relative_eq!(p.a.re, 1.5984505, epsilon = 1e-12);
        assert_relative_eq!(p.b.re, 2.0 * w * w * w * 0.0225, epsilon = 1e-12);
        assert_relative_eq!(p.c.re, w * w * (1.7 - 3.0) + w, epsilon = 1e-12);
        let fw = p.eval_finite(c(w, 0.0));
        assert!((fw - c(w, 0.0)).norm() < 1e-10 * w);
        assert!(p.derivative_unchecked(c(w, 0.0)).norm() < 1e-10 * w);
    }

    #[test]
    fn to_kw_recovers_intro() {
        // Oracle: quadratic formula on 3w^2 - (2a+1)w + c = 0, then the b check.
        let (a, b, cc) = (1.719727_f64, 0.3142117_f64, -3.121092_f64);
        let disc = ((2.0 * a + 1.0).powi(2) - 12.0 * cc).sqrt();
        let cands = [((2.0 * a + 1.0) + disc) / 6.0, ((2.0 * a + 1.0) - disc) / 6.0];
        let w_oracle = cands
            .iter()
            .copied()
            .min_by(|x, y| {
                let r = |w: f64| (2.0 * w * (w - a).powi(2) - b).abs();
                r(*x).total_cmp(&r(*y))
            })
            .unwrap();
        let q = to_kw(&intro()).unwrap();
        assert!((q.w.re - w_oracle).abs() < 1e-9);
        assert!((q.w.re - 2.0).abs() < 1e-4);
        assert!((q.k - 0.8598635).abs() < 1e-4);
    }

    #[test]
    fn to_kw_rejects_off_slice() {
        let p = MapParams::real(1.0, 5.0, 0.0).unwrap();
        assert!(matches!(to_kw(&p), Err(Error::NotInFamilySlice { .. })));
    }

    #[test]
    fn to_kw_round_trip() {
        let q = KwParams::new(0.85, 1.88053);
        let p = from_kw(&q).unwrap();
        let back = from_kw(&to_kw(&p).unwrap()).unwrap();
        assert!((back.a - p.a).norm() < 1e-10);
        assert!((back.b - p.b).norm() < 1e-10);
        assert!((back.c - p.c).norm() < 1e-10);
    }

    #[test]
    fn slice_criticals_match_closed_form() {
        let q = KwParams::new(0.85, 1.88053);
        let s = slice_criticals(&q).unwrap();
        let w = 1.88053;
        let root = 0.4_f64.sqrt();
        let u = w * (-0.5 + 0.85 - 0.5 * root);
        let v = w * (-0.5 + 0.85 + 0.5 * root);
        assert!((s.u - c(u, 0.0)).norm() < 1e-8);
        assert!((s.v - c(v, 0.0)).norm() < 1e-8);
        assert!((s.w - c(w, 0.0)).norm() < 1e-8);
        assert!((s.u.re - 0.063512).abs() < 1e-5);
        assert!((s.v.re - 1.252861).abs() < 1e-5);
    }

    #[test]
    fn critical_asymptotics_small_b() {
        let p = MapParams::real(2.0, 1e-6, -4.0).unwrap();
        let mut pts = p.critical_points().unwrap().points();
        pts.sort_by(|x, y| x.re.total_cmp(&y.re));
        let near_zero = 1e-6 / (2.0 * 4.0);
        assert!((pts[0].re - near_zero).abs() < 0.05 * near_zero);
        let off = (1e-6_f64 / 4.0).sqrt();
        assert!((pts[1].re - (2.0 - off)).abs() < 0.05 * off);
        assert!((pts[2].re - (2.0 + off)).abs() < 0.05 * off);
    }

    #[test]
    fn fixed_points_on_slice() {
        let q = KwParams::new(0.85, 1.88053);
        let p = from_kw(&q).unwrap();
        let fps = p.fixed_points().unwrap();
        assert_eq!(fps.len(), 4);
        assert!(fps.last().unwrap().point.is_infinite());
        let w = fps
            .iter()
            .find(|f| f.point.finite().is_some_and(|z| (z - q.w).norm() < 1e-8))
            .unwrap();
        assert_eq!(w.class, FixedPointClass::Superattracting);
        assert!(w.multiplier.norm() < 1e-8);
        for f in &fps {
            assert!(f.residual < 1e-9);
        }
    }

    #[test]
    fn quadratic_fixed_points() {
        let fps = MapParams::quadratic(ZERO).fixed_points().unwrap();
        let mut pts: Vec<f64> = fps.iter().filter_map(|f| f.point.finite()).map(|z| z.re).collect();
        pts.sort_by(f64::total_cmp);
        assert!((pts[0]).abs() < 1e-12 && (pts[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiplier_classes() {
        assert_eq!(FixedPointClass::of(c(0.0, 0.0)), FixedPointClass::Superattracting);
        assert_eq!(FixedPointClass::of(c(0.5, 0.0)), FixedPointClass::Attracting);
        assert_eq!(FixedPointClass::of(c(0.0, 1.0 - 1e-9)), FixedPointClass::Indifferent);
        assert_eq!(FixedPointClass::of(c(1.5, 0.0)), FixedPointClass::Repelling);
    }

    #[test]
    fn intro_map_is_not_newton() {
        assert!(!intro().is_newton(1e-3).unwrap().is_newton);
    }

    #[test]
    fn multipole_d3_matches_family() {
        let m = MultiPoleParams::new(c(-4.0, 0.0), 1e-6, 0.1, 3).unwrap();
        let a = m.poles()[0];
        let p = MapParams::new(a, c(1e-6, 0.0), c(-4.0, 0.0)).unwrap();
        let z = c(0.3, -0.7);
        assert!((m.eval(z) - p.eval_finite(z)).norm() < 1e-14);
        let mut x = m.critical_points().unwrap().points();
        let mut y = p.critical_points().unwrap().points();
        let key = |z: &Complex| (z.re * 1e6).round() as i64;
        x.sort_by_key(key);
        y.sort_by_key(key);
        for (s, t) in x.iter().zip(&y) {
            assert!((s - t).norm() < 1e-9);
        }
    }

    #[test]
    fn json_shapes() {
        let p: MapParams = serde_json::from_str(r#"{"a":[1.719727,0],"b":[0.3142117,0],"c":[-3.121092,0]}"#).unwrap();
        assert_eq!(p, intro());
        let q: MapParams = serde_json::from_str(r#"{"k":0.85,"w":1.88053}"#).unwrap();
        assert!((q.a.re - 1.5984505).abs() < 1e-9);
        assert!(serde_json::from_str::<MapParams>(r#"{"k":0.85,"w":1.8,"x":1}"#).is_err());
        assert!(serde_json::from_str::<MapParams>(r#"{"k":1.0,"w":1.0}"#).is_err());
    }
}
