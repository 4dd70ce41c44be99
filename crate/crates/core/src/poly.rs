//! Dense complex polynomials and a companion-matrix root finder.
//!
//! Coefficients are stored in ascending order: `coeffs[i]` multiplies `z^i`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

const POLISH_STEPS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The monic linear factor `z - root`.
    pub fn linear(root: Complex64) -> Self {
        Poly::new(vec![-root, Complex64::new(1.0, 0.0)])
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Sum of coefficient moduli weighted by `|z|^i`; the natural scale for residuals.
    pub fn magnitude_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or_default()
                    + other.coeffs.get(i).copied().unwrap_or_default()
            })
            .collect();
        Poly::new(out)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// All roots, counted with multiplicity.
    ///
    /// Eigenvalues of the companion matrix seed each root, then at most
    /// twenty Newton steps polish it against the original coefficients.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / lead]);
        }
        let mut companion = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let schur = Schur::try_new(companion, 1e-15, 10_000).ok_or(Error::SolverFailure {
            what: "companion eigenvalues",
            residual: f64::NAN,
        })?;
        let (_, t) = schur.unpack();
        Ok((0..n).map(|i| self.polish(t[(i, i)])).collect())
    }

    /// Newton polishing; keeps the best iterate seen so that steps near a
    /// multiple root cannot make things worse.
    pub fn polish(&self, seed: Complex64) -> Complex64 {
        let mut z = seed;
        let mut best = (self.eval(z).norm(), z);
        for _ in 0..POLISH_STEPS {
            let (p, dp) = self.eval_with_derivative(z);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            let r = self.eval(z).norm();
            if r < best.0 {
                best = (r, z);
            }
            if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                break;
            }
        }
        best.1
    }

    /// Residual of `root` scaled by the coefficient magnitude at that point.
    pub fn relative_residual(&self, root: Complex64) -> f64 {
        let scale = self.magnitude_at(root).max(f64::MIN_POSITIVE);
        self.eval(root).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn cubic_with_known_roots() {
        let p = Poly::linear(c(1.0, 0.0))
            .mul(&Poly::linear(c(-2.0, 0.5)))
            .mul(&Poly::linear(c(3.0, -1.0)));
        let r = sorted_by_re(p.roots().unwrap());
        assert!((r[0] - c(-2.0, 0.5)).norm() < 1e-12);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((r[2] - c(3.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root_is_reported_twice() {
        let p = Poly::linear(c(0.5, 0.0)).mul(&Poly::linear(c(0.5, 0.0))).mul(&Poly::linear(c(-1.0, 0.0)));
        let r = sorted_by_re(p.roots().unwrap());
        assert_eq!(r.len(), 3);
        assert!((r[1] - c(0.5, 0.0)).norm() < 1e-7);
        assert!((r[2] - c(0.5, 0.0)).norm() < 1e-7);
        for z in r {
            assert!(p.eval(z).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_power_rule() {
        let p = Poly::from_real(&[1.0, -2.0, 0.0, 4.0]);
        let (_, dp) = p.eval_with_derivative(c(2.0, 0.0));
        assert!((dp - c(-2.0 + 12.0 * 4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(Poly::from_real(&[1.0, 2.0, 0.0, 0.0]).degree(), 1);
        assert_eq!(Poly::from_real(&[]).degree(), 0);
    }
}
