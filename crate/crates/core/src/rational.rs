//! Rational functions with real coefficients.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{CPoly, Polynomial};
use crate::strip::{Line, Strip};

/// Common-root cancellation tolerance, relative to root magnitude.
pub const TAU_GCD: f64 = 1e-9;
/// Relative evaluation tolerance used for identity checks.
pub const TAU_EVAL: f64 = 1e-9;
/// Pole proximity threshold factor: `τ_pole·(1 + |s|)`.
pub const TAU_POLE: f64 = 1e-9;
/// Line membership threshold factor: `τ_line·(1 + |Re p|)`.
pub const TAU_LINE: f64 = 1e-8;

/// Roots closer than this (relative) are treated as one repeated pole.
const CLUSTER_TOL: f64 = 1e-5;

pub(crate) fn line_tolerance(re: f64) -> f64 {
    TAU_LINE * (1.0 + re.abs())
}

/// `num/den` with a monic denominator and best-effort common-root removal.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
    poles: Vec<Complex64>,
    cancelled: usize,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("denominator is identically zero".into()));
        }
        let lead = den.leading();
        let num = num.scale(1.0 / lead);
        let den = den.scale(1.0 / lead);
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let poles = den.roots()?;
        let mut out = Self {
            num,
            den,
            poles,
            cancelled: 0,
        };
        out.cancel_common_roots();
        Ok(out)
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec())?, Polynomial::new(den.to_vec())?)
    }

    /// Builds without attempting common-root cancellation.
    pub fn new_unreduced(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("denominator is identically zero".into()));
        }
        let lead = den.leading();
        let num = num.scale(1.0 / lead);
        let den = den.scale(1.0 / lead);
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let poles = den.roots()?;
        Ok(Self {
            num,
            den,
            poles,
            cancelled: 0,
        })
    }

    pub fn zero() -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::constant(1.0),
            poles: Vec::new(),
            cancelled: 0,
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            num: Polynomial::constant(c),
            den: Polynomial::constant(1.0),
            poles: Vec::new(),
            cancelled: 0,
        }
    }

    fn cancel_common_roots(&mut self) {
        if self.num.degree() == 0 || self.den.degree() == 0 {
            return;
        }
        let Ok(zeros) = self.num.roots() else {
            return;
        };
        let mut poles = self.poles.clone();
        let mut kept_zeros = Vec::new();
        let mut cancelled = 0;
        for z in zeros {
            let hit = poles
                .iter()
                .position(|p| (p - z).norm() <= TAU_GCD * (1.0 + p.norm()));
            match hit {
                Some(i) => {
                    poles.swap_remove(i);
                    cancelled += 1;
                }
                None => kept_zeros.push(z),
            }
        }
        if cancelled == 0 {
            return;
        }
        let num = Polynomial::from_roots(&kept_zeros).scale(self.num.leading());
        let den = Polynomial::from_roots(&poles);
        let candidate = Self {
            num,
            den,
            poles,
            cancelled: self.cancelled + cancelled,
        };
        // Keep the reduction only if it leaves evaluations unchanged.
        let radius = 1.0 + self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let probes = [
            Complex64::new(0.31, 1.7),
            Complex64::new(-0.83, 0.47),
            Complex64::new(1.9, -0.66),
        ];
        let agrees = probes.iter().all(|&u| {
            let s = u * radius;
            let a = self.eval_unchecked(s);
            let b = candidate.eval_unchecked(s);
            (a - b).norm() <= TAU_EVAL * (1.0 + a.norm())
        });
        if agrees {
            *self = candidate;
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    /// Number of pole/zero pairs removed at construction.
    pub fn cancelled(&self) -> usize {
        self.cancelled
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Value at `s`; fails within `τ_pole·(1+|s|)` of a pole.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let tol = TAU_POLE * (1.0 + s.norm());
        if let Some(p) = self.poles.iter().find(|p| (*p - s).norm() <= tol) {
            return Err(Error::PoleProximity { pole: *p });
        }
        Ok(self.eval_unchecked(s))
    }

    pub fn eval_unchecked(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// `G(s − λ)`; poles move by `+λ`.
    pub fn shift(&self, lambda: f64) -> Self {
        if lambda == 0.0 || self.is_zero() {
            return self.clone();
        }
        Self {
            num: self.num.shift(lambda),
            den: self.den.shift(lambda),
            poles: self.poles.iter().map(|p| p + lambda).collect(),
            cancelled: self.cancelled,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        Self {
            num: self.num.scale(k),
            ..self.clone()
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        Self::new(num, &self.den * &rhs.den)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(-1.0))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("reciprocal of the zero function".into()));
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Counts of poles right of the strip and left of it.
    pub fn pole_partition(&self, strip: &Strip) -> Result<(usize, usize)> {
        let re_right = -strip.lo();
        let re_left = -strip.hi();
        let mut right = 0;
        let mut left = 0;
        for &p in &self.poles {
            let tol = line_tolerance(p.re);
            if p.re > re_right + tol {
                right += 1;
            } else if p.re < re_left - tol {
                left += 1;
            } else {
                return Err(Error::PoleInStrip { pole: p });
            }
        }
        Ok((right, left))
    }

    /// Counts of poles right and left of the line `Re(s) = −λ`.
    pub fn pole_partition_line(&self, line: &Line) -> Result<(usize, usize)> {
        let re_line = line.re();
        let mut right = 0;
        for &p in &self.poles {
            if (p.re - re_line).abs() <= line_tolerance(p.re) {
                return Err(Error::PoleOnLine { pole: p, re_line });
            }
            if p.re > re_line {
                right += 1;
            }
        }
        Ok((right, self.poles.len() - right))
    }

    pub(crate) fn check_line(&self, line: &Line) -> Result<()> {
        self.pole_partition_line(line).map(|_| ())
    }

    /// Polynomial part plus pole terms `f/(s − α)^m`.
    pub fn partial_fractions(&self) -> Result<PartialFractions> {
        let (poly_part, rem) = self.num.div_rem(&self.den)?;
        if rem.is_zero() {
            return Ok(PartialFractions {
                polynomial: poly_part,
                terms: Vec::new(),
            });
        }
        let clusters = cluster_poles(&self.poles)?;
        let rem_c = CPoly::from_real(&rem);
        let mut terms = Vec::new();
        let mut upper: Vec<(Complex64, usize, Vec<Complex64>)> = Vec::new();
        for (idx, &(alpha, m)) in clusters.iter().enumerate() {
            if alpha.im < 0.0 {
                continue;
            }
            let mut q = CPoly::one();
            for (j, &(beta, mb)) in clusters.iter().enumerate() {
                if j != idx {
                    for _ in 0..mb {
                        q = q.mul_linear(beta);
                    }
                }
            }
            let a = rem_c.taylor_at(alpha);
            let b = q.taylor_at(alpha);
            // h = a / b as power series in (s − α), first m coefficients.
            let mut h = vec![Complex64::new(0.0, 0.0); m];
            for j in 0..m {
                let mut acc = a.get(j).copied().unwrap_or_default();
                for i in 1..=j {
                    acc -= b.get(i).copied().unwrap_or_default() * h[j - i];
                }
                h[j] = acc / b[0];
            }
            if alpha.im == 0.0 {
                for (j, hj) in h.iter().enumerate() {
                    terms.push(PartialFractionTerm {
                        residue: Complex64::new(hj.re, 0.0),
                        pole: alpha,
                        order: m - j,
                    });
                }
            } else {
                upper.push((alpha, m, h));
            }
        }
        for (alpha, m, h) in upper {
            for (j, hj) in h.iter().enumerate() {
                terms.push(PartialFractionTerm {
                    residue: *hj,
                    pole: alpha,
                    order: m - j,
                });
                terms.push(PartialFractionTerm {
                    residue: hj.conj(),
                    pole: alpha.conj(),
                    order: m - j,
                });
            }
        }
        terms.retain(|t| t.residue != Complex64::new(0.0, 0.0));
        let pf = PartialFractions {
            polynomial: poly_part,
            terms,
        };
        let radius = 1.0 + self.poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        for u in [Complex64::new(0.4, 1.3), Complex64::new(-1.1, 0.35)] {
            let s = u * radius;
            let g = self.eval_unchecked(s);
            let r = pf.eval(s);
            if (g - r).norm() > 1e-6 * (1.0 + g.norm()) {
                return Err(Error::NumericalFailure(format!(
                    "partial fraction recombination mismatch {:.3e}",
                    (g - r).norm()
                )));
            }
        }
        Ok(pf)
    }

    /// Recombines a polynomial part and pole terms into one real function.
    pub fn from_partial_fractions(polynomial: &Polynomial, terms: &[PartialFractionTerm]) -> Result<Self> {
        // Highest order per distinct pole.
        let mut poles: Vec<(Complex64, usize)> = Vec::new();
        for t in terms {
            match poles
                .iter_mut()
                .find(|(p, _)| (*p - t.pole).norm() <= 1e-12 * (1.0 + p.norm()))
            {
                Some(entry) => entry.1 = entry.1.max(t.order),
                None => poles.push((t.pole, t.order)),
            }
        }
        let mut den = CPoly::one();
        for &(p, m) in &poles {
            for _ in 0..m {
                den = den.mul_linear(p);
            }
        }
        let mut num = CPoly::from_real(polynomial).mul(&den);
        for t in terms {
            let mut part = CPoly::one().scale(t.residue);
            for &(p, m) in &poles {
                let same = (p - t.pole).norm() <= 1e-12 * (1.0 + p.norm());
                let reps = if same { m - t.order } else { m };
                for _ in 0..reps {
                    part = part.mul_linear(p);
                }
            }
            num.add_assign(&part);
        }
        Self::new_unreduced(num.real_part(), den.real_part())
    }
}

/// Groups numerically repeated roots; output is closed under conjugation.
fn cluster_poles(roots: &[Complex64]) -> Result<Vec<(Complex64, usize)>> {
    let mut used = vec![false; roots.len()];
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let tol = CLUSTER_TOL * (1.0 + roots[i].norm());
        let mut members = vec![roots[i]];
        used[i] = true;
        for j in (i + 1)..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() <= tol {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let m = members.len();
        let mut center = members.iter().sum::<Complex64>() / m as f64;
        if center.im.abs() <= tol {
            center.im = 0.0;
        }
        clusters.push((center, m));
    }
    // Rebuild lower-half clusters as exact conjugates of the upper ones.
    let mut out: Vec<(Complex64, usize)> = clusters.iter().filter(|c| c.0.im == 0.0).copied().collect();
    let upper: Vec<_> = clusters.iter().filter(|c| c.0.im > 0.0).copied().collect();
    let lower_total: usize = clusters.iter().filter(|c| c.0.im < 0.0).map(|c| c.1).sum();
    let upper_total: usize = upper.iter().map(|c| c.1).sum();
    if lower_total != upper_total {
        return Err(Error::NumericalFailure(
            "complex poles are not closed under conjugation".into(),
        ));
    }
    for (c, m) in upper {
        out.push((c, m));
        out.push((c.conj(), m));
    }
    Ok(out)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// `residue / (s − pole)^order`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialFractionTerm {
    pub residue: Complex64,
    pub pole: Complex64,
    pub order: usize,
}

impl PartialFractionTerm {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.residue / (s - self.pole).powi(self.order as i32)
    }
}

#[derive(Debug, Clone)]
pub struct PartialFractions {
    pub polynomial: Polynomial,
    pub terms: Vec<PartialFractionTerm>,
}

impl PartialFractions {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.polynomial.eval_complex(s) + self.terms.iter().map(|t| t.eval(s)).sum::<Complex64>()
    }

    pub fn recombine(&self) -> Result<RationalFunction> {
        RationalFunction::from_partial_fractions(&self.polynomial, &self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
        RationalFunction::from_coeffs(num, den).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = rf(&[1.0], &[2.0, 1.0]);
        assert!((g.eval(c(0.0, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(g.eval(c(-2.0, 0.0)), Err(Error::PoleProximity { .. })));
        // Δ(s) = −0.1 s / (1 + 0.1 s) at s = −1
        let delta = rf(&[0.0, -0.1], &[1.0, 0.1]);
        let v = delta.eval(c(-1.0, 0.0)).unwrap();
        assert!((v.re - 0.1 / 0.9).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn normalised_monic() {
        let delta = rf(&[0.0, -0.1], &[1.0, 0.1]);
        assert_eq!(delta.den().coeffs(), &[10.0, 1.0]);
        assert!((delta.num().coeff(1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_examples() {
        let g = rf(&[1.0], &[2.0, 1.0]).shift(1.0);
        assert_eq!(g.den().coeffs(), &[1.0, 1.0]);
        let d = rf(&[0.0, -0.1], &[1.0, 0.1]).shift(1.0);
        assert!((d.num().coeff(0) - 1.0).abs() < 1e-14 && (d.num().coeff(1) + 1.0).abs() < 1e-14);
        assert!((d.den().coeff(0) - 9.0).abs() < 1e-14 && d.den().coeff(1) == 1.0);
        let s = [c(0.3, 1.0), c(-2.0, 0.7), c(5.0, -3.0), c(0.0, 2.0), c(1.1, 0.1)];
        let orig = rf(&[0.0, -0.1], &[1.0, 0.1]);
        for p in s {
            assert!((d.eval(p).unwrap() - orig.eval(p - 1.0).unwrap()).norm() < 1e-13);
        }
        let z = rf(&[1.0, 2.0], &[3.0, 1.0, 1.0]);
        assert_eq!(z.shift(0.0).num(), z.num());
    }

    #[test]
    fn common_roots_cancel() {
        // (s + 1) / ((s + 1)(s + 2))
        let g = rf(&[1.0, 1.0], &[2.0, 3.0, 1.0]);
        assert_eq!(g.cancelled(), 1);
        assert_eq!(g.den().degree(), 1);
        assert!((g.den().coeff(0) - 2.0).abs() < 1e-12);
    }

    fn find<'a>(pf: &'a PartialFractions, pole: f64, order: usize) -> &'a PartialFractionTerm {
        pf.terms
            .iter()
            .find(|t| (t.pole.re - pole).abs() < 1e-9 && t.order == order)
            .expect("term present")
    }

    #[test]
    fn partial_fraction_examples() {
        // 1 / ((s − 1)(s + 3))
        let pf = rf(&[1.0], &[-3.0, 2.0, 1.0]).partial_fractions().unwrap();
        assert!(pf.polynomial.is_zero());
        assert!((find(&pf, 1.0, 1).residue.re - 0.25).abs() < 1e-14);
        assert!((find(&pf, -3.0, 1).residue.re + 0.25).abs() < 1e-14);

        // −2 / (s² − 1) = 1/(s+1) − 1/(s−1)
        let pf = rf(&[-2.0], &[-1.0, 0.0, 1.0]).partial_fractions().unwrap();
        assert!((find(&pf, -1.0, 1).residue.re - 1.0).abs() < 1e-14);
        assert!((find(&pf, 1.0, 1).residue.re + 1.0).abs() < 1e-14);

        let pf = rf(&[1.0], &[2.0, 1.0]).partial_fractions().unwrap();
        assert!(pf.polynomial.is_zero());
        assert_eq!(pf.terms.len(), 1);
        assert!((pf.terms[0].residue.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn repeated_pole_orders() {
        // 1 / (s²(s + 5)) = −1/25 /s + 1/5 /s² + 1/25 /(s+5)
        let pf = rf(&[1.0], &[0.0, 0.0, 5.0, 1.0]).partial_fractions().unwrap();
        assert!((find(&pf, 0.0, 2).residue.re - 0.2).abs() < 1e-10);
        assert!((find(&pf, 0.0, 1).residue.re + 0.04).abs() < 1e-10);
        assert!((find(&pf, -5.0, 1).residue.re - 0.04).abs() < 1e-10);
    }

    #[test]
    fn improper_polynomial_part() {
        // (s² + 1) / (s + 1) = s − 1 + 2/(s + 1)
        let pf = rf(&[1.0, 0.0, 1.0], &[1.0, 1.0]).partial_fractions().unwrap();
        assert_eq!(pf.polynomial.coeffs(), &[-1.0, 1.0]);
        assert!((pf.terms[0].residue.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn conjugate_residues() {
        let pf = rf(&[1.0, 2.0], &[1.0, 0.2, 1.0]).partial_fractions().unwrap();
        assert_eq!(pf.terms.len(), 2);
        assert!((pf.terms[0].residue - pf.terms[1].residue.conj()).norm() < 1e-15);
        assert!((pf.terms[0].pole - pf.terms[1].pole.conj()).norm() < 1e-15);
    }

    #[test]
    fn pole_partition_examples() {
        let strip = Strip::new(0.0, 2.0).unwrap();
        assert_eq!(rf(&[1.0], &[-3.0, 2.0, 1.0]).pole_partition(&strip).unwrap(), (1, 1));
        let strip = Strip::new(0.0, 1.0).unwrap();
        assert_eq!(rf(&[1.0], &[2.0, 1.0]).pole_partition(&strip).unwrap(), (0, 1));
        let strip = Strip::new(0.5, 2.0).unwrap();
        assert!(matches!(
            rf(&[1.0], &[1.0, 1.0]).pole_partition(&strip),
            Err(Error::PoleInStrip { .. })
        ));
        // boundary pole counts as inside
        let strip = Strip::new(1.0, 2.0).unwrap();
        assert!(rf(&[1.0], &[1.0, 1.0]).pole_partition(&strip).is_err());
    }

    fn arb_rational() -> impl Strategy<Value = RationalFunction> {
        (1usize..6)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(-3.0f64..3.0, n + 1),
                    proptest::collection::vec(-3.0f64..3.0, n),
                )
            })
            .prop_filter_map("well-posed", |(num, mut den)| {
                den.push(1.0);
                let g = RationalFunction::from_coeffs(&num, &den).ok()?;
                // keep poles reasonably separated so residues are well conditioned
                let p = g.poles();
                for i in 0..p.len() {
                    for j in (i + 1)..p.len() {
                        if (p[i] - p[j]).norm() < 0.05 {
                            return None;
                        }
                    }
                }
                Some(g)
            })
    }

    proptest! {
        #[test]
        fn shift_round_trip(g in arb_rational(), lam in -2.0f64..2.0) {
            let back = g.shift(lam).shift(-lam);
            for k in 0..=g.den().degree() {
                prop_assert!((back.den().coeff(k) - g.den().coeff(k)).abs() <= 1e-9 * (1.0 + g.den().norm()) * 10.0);
                prop_assert!((back.num().coeff(k) - g.num().coeff(k)).abs() <= 1e-9 * (1.0 + g.num().norm()) * 10.0);
            }
        }

        #[test]
        fn shift_matches_evaluation(g in arb_rational(), lam in -2.0f64..2.0, w in -10.0f64..10.0) {
            let s = Complex64::new(0.0, w);
            let shifted = g.shift(lam);
            if let (Ok(a), Ok(b)) = (shifted.eval(s), g.eval(s - lam)) {
                prop_assert!((a - b).norm() <= 1e-8 * (1.0 + b.norm()));
            }
        }

        #[test]
        fn partial_fractions_recombine(g in arb_rational(), seed in 0u64..1000) {
            let pf = g.partial_fractions().unwrap();
            let mut x = seed as f64 * 0.618;
            for _ in 0..10 {
                x = (x * 7.3 + 0.41).fract();
                let s = Complex64::new(4.0 * x - 2.0, 3.0 * (1.0 - x) - 1.0);
                if let Ok(v) = g.eval(s) {
                    prop_assert!((v - pf.eval(s)).norm() <= 1e-6 * (1.0 + v.norm()));
                }
            }
        }

        #[test]
        fn partition_counts_sum(g in arb_rational(), lo in 0.0f64..2.0, width in 0.1f64..2.0) {
            let strip = Strip::new(lo, lo + width).unwrap();
            if let Ok((r, l)) = g.pole_partition(&strip) {
                prop_assert_eq!(r + l, g.den().degree());
            }
        }
    }
}
