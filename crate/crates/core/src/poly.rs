//! Real polynomials in ascending-power storage, plus a small complex
//! counterpart used for residue and recombination arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eig, Matrix};

/// Relative residual accepted from the root finder.
pub const TAU_ROOT: f64 = 1e-8;

/// Real polynomial; `coeffs[k]` multiplies `s^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping exact trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        Ok(Self::from_finite(coeffs))
    }

    fn from_finite(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_finite(vec![c])
    }

    /// `s`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self { coeffs: c }
    }

    /// Monic polynomial with the given roots; imaginary parts of the
    /// expanded coefficients are discarded, so roots should be closed
    /// under conjugation.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let c = CPoly::from_roots(roots);
        Self::from_finite(c.coeffs.iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Coefficient of `s^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_finite(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::from_finite(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// `p(s − λ)`.
    pub fn shift(&self, lambda: f64) -> Self {
        // Horner in the variable (s − λ).
        let mut out = vec![0.0; self.coeffs.len()];
        for &c in self.coeffs.iter().rev() {
            // out ← out·(s − λ) + c
            let mut next = vec![0.0; out.len()];
            for k in 0..out.len() {
                if k + 1 < next.len() {
                    next[k + 1] += out[k];
                }
                next[k] -= lambda * out[k];
            }
            next[0] += c;
            out = next;
        }
        Self::from_finite(out)
    }

    /// Polynomial long division, `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if d.is_zero() {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        }
        let dn = d.degree();
        if self.degree() < dn || self.is_zero() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quo = vec![0.0; self.degree() - dn + 1];
        let lead = d.leading();
        for k in (0..quo.len()).rev() {
            let c = rem[k + dn] / lead;
            quo[k] = c;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= c * dc;
            }
            rem[k + dn] = 0.0;
        }
        rem.truncate(dn.max(1));
        Ok((Self::from_finite(quo), Self::from_finite(rem)))
    }

    /// Drops leading coefficients below `tol · max|c|`.
    pub fn trim_relative(&self, tol: f64) -> Self {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().unwrap().abs() <= tol * scale {
            c.pop();
        }
        if c.len() == 1 && c[0].abs() <= tol * scale {
            c[0] = 0.0;
        }
        Self::from_finite(c)
    }

    /// Roots with multiplicity, from the eigenvalues of the companion matrix.
    ///
    /// Each root satisfies `|p(r)| ≤ τ_root·(1 + ‖p‖)` after normalising
    /// `p` to unit leading coefficient.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::InvalidInput("the zero polynomial has no finite root set".into()));
        }
        let monic = self.scale(1.0 / self.leading());
        let c = &monic.coeffs;
        // Exact zeros at the origin.
        let zeros = c.iter().take_while(|&&x| x == 0.0).count();
        let rest = &c[zeros..];
        let n = rest.len() - 1;
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        if n > 0 {
            let mut comp = Matrix::zeros(n, n);
            for i in 1..n {
                comp[(i, i - 1)] = 1.0;
            }
            for i in 0..n {
                comp[(i, n - 1)] = -rest[i];
            }
            roots.extend(eig(&comp)?);
        }
        let dp = monic.derivative();
        let bound = TAU_ROOT * (1.0 + monic.norm());
        for r in roots.iter_mut() {
            polish(&monic, &dp, r);
            let res = monic.eval_complex(*r).norm();
            // Residual relative to the magnitude of the terms being summed.
            let mag: f64 = monic
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * r.norm().powi(k as i32))
                .sum();
            if res > bound * mag.max(1.0) {
                return Err(Error::NumericalFailure(format!(
                    "root {r} has residual {res:.3e}"
                )));
            }
        }
        Ok(roots)
    }
}

/// A couple of Newton steps, kept only when they reduce the residual.
fn polish(p: &Polynomial, dp: &Polynomial, r: &mut Complex64) {
    let was_real = r.im == 0.0;
    for _ in 0..3 {
        let f = p.eval_complex(*r);
        let d = dp.eval_complex(*r);
        if d.norm() == 0.0 {
            return;
        }
        let mut cand = *r - f / d;
        if was_real {
            cand.im = 0.0;
        }
        if !(cand.re.is_finite() && cand.im.is_finite()) {
            return;
        }
        if p.eval_complex(cand).norm() < f.norm() {
            *r = cand;
        } else {
            return;
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && !(k == 0 && first) {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 if a == 1.0 => write!(f, "s")?,
                1 => write!(f, "{a}s")?,
                _ if a == 1.0 => write!(f, "s^{k}")?,
                _ => write!(f, "{a}s^{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_finite((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_finite((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_finite(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Complex polynomial, ascending powers. Internal arithmetic helper.
#[derive(Debug, Clone)]
pub(crate) struct CPoly {
    pub coeffs: Vec<Complex64>,
}

impl CPoly {
    pub fn one() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn from_real(p: &Polynomial) -> Self {
        Self {
            coeffs: p.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = p.mul_linear(r);
        }
        p
    }

    /// `self · (s − r)`
    pub fn mul_linear(&self, r: Complex64) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k + 1] += c;
            out[k] -= c * r;
        }
        Self { coeffs: out }
    }

    pub fn mul(&self, rhs: &CPoly) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    pub fn add_assign(&mut self, rhs: &CPoly) {
        if rhs.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Complex64::new(0.0, 0.0));
        }
        for (k, c) in rhs.coeffs.iter().enumerate() {
            self.coeffs[k] += c;
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Taylor coefficients about `a`: `p(s) = Σ t_j (s − a)^j`.
    pub fn taylor_at(&self, a: Complex64) -> Vec<Complex64> {
        // Repeated synthetic division by (s − a).
        let mut work = self.coeffs.clone();
        let n = work.len();
        let mut out = Vec::with_capacity(n);
        for start in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in (start..n).rev() {
                acc = acc * a + work[k];
                work[k] = acc;
            }
            out.push(work[start]);
        }
        out
    }

    /// Real parts as a real polynomial.
    pub fn real_part(&self) -> Polynomial {
        Polynomial::from_finite(self.coeffs.iter().map(|c| c.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sort_roots(mut r: Vec<Complex64>) -> Vec<Complex64> {
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    #[test]
    fn roots_of_factored_quadratic() {
        let p = Polynomial::new(vec![2.0, 3.0, 1.0]).unwrap();
        let r = sort_roots(p.roots().unwrap());
        assert!((r[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-13);
        assert!((r[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn roots_of_damped_quadratic() {
        let p = Polynomial::new(vec![1.0, 0.2, 1.0]).unwrap();
        let r = sort_roots(p.roots().unwrap());
        let w = 0.99f64.sqrt();
        assert!((r[0] - Complex64::new(-0.1, -w)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(-0.1, w)).norm() < 1e-12);
        for z in r {
            assert!(p.eval_complex(z).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(Polynomial::constant(5.0).roots().unwrap().is_empty());
        assert!(matches!(Polynomial::zero().roots(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn roots_include_origin() {
        // s^2 (s + 5)
        let p = Polynomial::new(vec![0.0, 0.0, 5.0, 1.0]).unwrap();
        let r = sort_roots(p.roots().unwrap());
        assert_eq!(r.len(), 3);
        assert!((r[0].re + 5.0).abs() < 1e-13);
        assert_eq!(r[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn shift_substitutes() {
        // (s + 2) shifted by 1 -> s + 1
        let p = Polynomial::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(p.shift(1.0).coeffs(), &[1.0, 1.0]);
        let q = Polynomial::new(vec![1.0, -3.0, 0.5, 2.0]).unwrap();
        let sq = q.shift(0.7);
        for x in [-2.0, 0.0, 0.3, 4.0] {
            assert!((sq.eval(x) - q.eval(x - 0.7)).abs() < 1e-12);
        }
    }

    #[test]
    fn division() {
        // s^3 + 5 s^2 - 1 = (s + 5)(s^2) - 1
        let p = Polynomial::new(vec![-1.0, 0.0, 5.0, 1.0]).unwrap();
        let d = Polynomial::new(vec![0.0, 0.0, 1.0]).unwrap();
        let (q, r) = p.div_rem(&d).unwrap();
        assert_eq!(q.coeffs(), &[5.0, 1.0]);
        assert_eq!(r.coeffs(), &[-1.0]);
    }

    #[test]
    fn taylor_coefficients() {
        // (s - 1)^2 about 1 -> [0, 0, 1]
        let p = CPoly::from_real(&Polynomial::new(vec![1.0, -2.0, 1.0]).unwrap());
        let t = p.taylor_at(Complex64::new(1.0, 0.0));
        assert!(t[0].norm() < 1e-15 && t[1].norm() < 1e-15 && (t[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn display() {
        let p = Polynomial::new(vec![-1.0, 0.0, 5.0, 1.0]).unwrap();
        assert_eq!(p.to_string(), "s^3 + 5s^2 - 1");
    }

    proptest! {
        #[test]
        fn roots_reconstruct(c in proptest::collection::vec(-5.0f64..5.0, 2..7)) {
            let p = Polynomial::new(c).unwrap();
            prop_assume!(p.degree() >= 1 && p.leading().abs() > 0.1);
            let r = p.roots().unwrap();
            prop_assert_eq!(r.len(), p.degree());
            let rebuilt = Polynomial::from_roots(&r).scale(p.leading());
            for x in [-1.3, 0.2, 0.9] {
                let scale = 1.0 + p.coeffs().iter().map(|c| c.abs()).sum::<f64>() * 10.0;
                prop_assert!((rebuilt.eval(x) - p.eval(x)).abs() <= 1e-6 * scale);
            }
        }

        #[test]
        fn shift_round_trip(c in proptest::collection::vec(-5.0f64..5.0, 1..7), lam in -3.0f64..3.0) {
            let p = Polynomial::new(c).unwrap();
            let back = p.shift(lam).shift(-lam);
            for k in 0..=p.degree() {
                prop_assert!((back.coeff(k) - p.coeff(k)).abs() <= 1e-9 * (1.0 + p.norm()) * 100.0);
            }
        }
    }
}
