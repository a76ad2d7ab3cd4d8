//! Bilateral Laplace transforms of exponential-polynomial signals.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{line_tolerance, PartialFractionTerm, RationalFunction, TAU_EVAL};
use crate::strip::Strip;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Supported on `t > 0`.
    Causal,
    /// Supported on `t < 0`.
    Anticausal,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Causal => "causal",
            Direction::Anticausal => "anticausal",
        }
    }
}

/// `c·t^k·e^{at}` restricted to one side of `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalTerm {
    pub coeff: Complex64,
    pub power: u32,
    pub exponent: Complex64,
    pub direction: Direction,
}

impl SignalTerm {
    pub fn new(coeff: Complex64, power: u32, exponent: Complex64, direction: Direction) -> Self {
        Self {
            coeff,
            power,
            exponent,
            direction,
        }
    }

    pub fn causal(coeff: f64, power: u32, exponent: f64) -> Self {
        Self::new(coeff.into(), power, exponent.into(), Direction::Causal)
    }

    pub fn anticausal(coeff: f64, power: u32, exponent: f64) -> Self {
        Self::new(coeff.into(), power, exponent.into(), Direction::Anticausal)
    }

    /// Value of the unrestricted expression `c·t^k·e^{at}`.
    fn raw(&self, t: f64) -> Complex64 {
        self.coeff * t.powi(self.power as i32) * (self.exponent * t).exp()
    }

    /// ROC of this term alone.
    pub fn roc(&self) -> Roc {
        match self.direction {
            Direction::Causal => Roc {
                lo: self.exponent.re,
                hi: f64::INFINITY,
            },
            Direction::Anticausal => Roc {
                lo: f64::NEG_INFINITY,
                hi: self.exponent.re,
            },
        }
    }
}

/// Sum of [`SignalTerm`]s; real-valued on the real line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignalSpec {
    terms: Vec<SignalTerm>,
}

impl SignalSpec {
    pub fn new(terms: Vec<SignalTerm>) -> Result<Self> {
        for t in &terms {
            let finite = t.coeff.re.is_finite()
                && t.coeff.im.is_finite()
                && t.exponent.re.is_finite()
                && t.exponent.im.is_finite();
            if !finite {
                return Err(Error::InvalidInput("signal terms must be finite".into()));
            }
        }
        let spec = Self { terms };
        for t in [-1.7, -0.6, -0.05, 0.0, 0.05, 0.45, 1.3, 2.2] {
            let v = spec.eval_complex(t);
            if v.im.abs() > TAU_EVAL * (1.0 + v.norm()) * 10.0 {
                return Err(Error::InvalidInput(format!(
                    "signal is not real-valued (imaginary part {:.3e} at t = {t}); complex terms need their conjugates",
                    v.im
                )));
            }
        }
        Ok(spec)
    }

    pub fn terms(&self) -> &[SignalTerm] {
        &self.terms
    }

    fn eval_complex(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let active = match term.direction {
                Direction::Causal => t >= 0.0,
                Direction::Anticausal => t <= 0.0,
            };
            if !active {
                continue;
            }
            let weight = if t == 0.0 { 0.5 } else { 1.0 };
            acc += term.raw(t) * weight;
        }
        acc
    }
}

/// `f(t)`, with the midpoint value at the jump `t = 0`.
pub fn eval_signal(spec: &SignalSpec, t: f64) -> f64 {
    spec.eval_complex(t).re
}

/// Region of convergence `lo < Re(s) < hi`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roc {
    lo: f64,
    hi: f64,
}

impl Roc {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY || lo >= hi {
            return Err(Error::InvalidInput(format!("ROC needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn whole_plane() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Open-interval membership of a real part.
    pub fn contains(&self, re: f64) -> bool {
        re > self.lo && re < self.hi
    }

    /// The ROC of a strip `S_Λ`: `−λ_hi < Re(s) < −λ_lo`.
    pub fn from_strip(strip: &Strip) -> Self {
        Self {
            lo: -strip.hi(),
            hi: -strip.lo(),
        }
    }

    /// Inverse of [`Roc::from_strip`]; needs finite ends and `hi ≤ 0`.
    pub fn to_strip(&self) -> Result<Strip> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidInput(format!("ROC ({}, {}) is not a finite strip", self.lo, self.hi)));
        }
        Strip::new(-self.hi, -self.lo)
    }
}

impl fmt::Display for Roc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (false, false) => write!(f, "all s"),
            (true, false) => write!(f, "Re(s) > {}", self.lo),
            (false, true) => write!(f, "Re(s) < {}", self.hi),
            (true, true) => write!(f, "{} < Re(s) < {}", self.lo, self.hi),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LaplacePair {
    pub f: RationalFunction,
    pub roc: Roc,
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Termwise transform over the common ROC.
pub fn forward(spec: &SignalSpec) -> Result<LaplacePair> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for t in spec.terms() {
        let r = t.roc();
        lo = lo.max(r.lo);
        hi = hi.min(r.hi);
    }
    if lo >= hi {
        return Err(Error::NoCommonRoc { lower: lo, upper: hi });
    }
    let terms: Vec<PartialFractionTerm> = spec
        .terms()
        .iter()
        .map(|t| {
            let sign = match t.direction {
                Direction::Causal => 1.0,
                Direction::Anticausal => -1.0,
            };
            PartialFractionTerm {
                residue: t.coeff * factorial(t.power) * sign,
                pole: t.exponent,
                order: t.power as usize + 1,
            }
        })
        .collect();
    let raw = RationalFunction::from_partial_fractions(&Polynomial::zero(), &terms)?;
    let f = RationalFunction::new(raw.num().clone(), raw.den().clone())?;
    Ok(LaplacePair { f, roc: Roc { lo, hi } })
}

/// Partial-fraction inversion: poles left of the ROC give causal terms,
/// poles right of it anticausal ones.
pub fn inverse(f: &RationalFunction, roc: &Roc) -> Result<SignalSpec> {
    if f.is_zero() {
        return Ok(SignalSpec::default());
    }
    if !f.is_strictly_proper() {
        return Err(Error::Unsupported(
            "inversion of a non-strictly-proper function needs impulsive terms".into(),
        ));
    }
    for &p in f.poles() {
        let tol = line_tolerance(p.re);
        if p.re > roc.lo + tol && p.re < roc.hi - tol {
            return Err(Error::PoleInRoc { pole: p });
        }
    }
    let pf = f.partial_fractions()?;
    let terms = pf
        .terms
        .iter()
        .map(|t| {
            let k = (t.order - 1) as u32;
            let c = t.residue / factorial(k);
            let tol = line_tolerance(t.pole.re);
            if roc.lo >= t.pole.re - tol {
                SignalTerm::new(c, k, t.pole, Direction::Causal)
            } else {
                SignalTerm::new(-c, k, t.pole, Direction::Anticausal)
            }
        })
        .collect();
    SignalSpec::new(terms)
}

/// Every maximal ROC: the open bands between consecutive distinct pole
/// real parts and the two outer half-planes.
pub fn roc_options(f: &RationalFunction) -> Vec<Roc> {
    let mut re: Vec<f64> = f.poles().iter().map(|p| p.re).collect();
    re.sort_by(f64::total_cmp);
    re.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(re);
    edges.push(f64::INFINITY);
    edges.windows(2).map(|w| Roc { lo: w[0], hi: w[1] }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
        RationalFunction::from_coeffs(num, den).unwrap()
    }

    fn same(a: &RationalFunction, b: &RationalFunction) -> bool {
        let close = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-12);
        close(a.num().coeffs(), b.num().coeffs()) && close(a.den().coeffs(), b.den().coeffs())
    }

    fn two_sided() -> SignalSpec {
        SignalSpec::new(vec![SignalTerm::causal(1.0, 0, -1.0), SignalTerm::anticausal(1.0, 0, 1.0)]).unwrap()
    }

    #[test]
    fn forward_examples() {
        let pair = forward(&two_sided()).unwrap();
        assert!(same(&pair.f, &rf(&[-2.0], &[-1.0, 0.0, 1.0])));
        assert_eq!((pair.roc.lo(), pair.roc.hi()), (-1.0, 1.0));

        let pair = forward(&SignalSpec::new(vec![SignalTerm::causal(1.0, 0, -2.0)]).unwrap()).unwrap();
        assert!(same(&pair.f, &rf(&[1.0], &[2.0, 1.0])));
        assert_eq!(pair.roc.lo(), -2.0);
        assert!(pair.roc.hi().is_infinite());

        let growing =
            SignalSpec::new(vec![SignalTerm::causal(1.0, 0, 1.0), SignalTerm::anticausal(1.0, 0, -1.0)]).unwrap();
        assert!(matches!(forward(&growing), Err(Error::NoCommonRoc { .. })));
    }

    #[test]
    fn forward_higher_power() {
        let spec = SignalSpec::new(vec![SignalTerm::causal(3.0, 2, -1.0)]).unwrap();
        let pair = forward(&spec).unwrap();
        let s = Complex64::new(0.4, 0.9);
        assert!((pair.f.eval(s).unwrap() - 6.0 / (s + 1.0).powi(3)).norm() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let spec = inverse(&rf(&[-2.0], &[-1.0, 0.0, 1.0]), &Roc::new(-1.0, 1.0).unwrap()).unwrap();
        for t in [-2.0f64, -0.5, 0.3, 1.7] {
            assert!((eval_signal(&spec, t) - (-f64::abs(t)).exp()).abs() < 1e-12);
        }

        let spec = inverse(&rf(&[1.0], &[-3.0, 2.0, 1.0]), &Roc::new(-3.0, 1.0).unwrap()).unwrap();
        for t in [-2.0f64, -0.5, 0.3, 1.7] {
            let expect = if t < 0.0 { -0.25 * t.exp() } else { -0.25 * (-3.0 * t).exp() };
            assert!((eval_signal(&spec, t) - expect).abs() < 1e-12);
        }

        let spec = inverse(&rf(&[1.0], &[2.0, 1.0]), &Roc::new(-2.0, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(spec.terms().len(), 1);
        assert_eq!(spec.terms()[0].direction, Direction::Causal);
        assert!((eval_signal(&spec, 1.0) - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn inverse_errors() {
        let f = rf(&[1.0], &[-3.0, 2.0, 1.0]);
        assert!(matches!(inverse(&f, &Roc::new(-4.0, 0.0).unwrap()), Err(Error::PoleInRoc { .. })));
        assert!(matches!(
            inverse(&rf(&[1.0, 1.0], &[2.0, 1.0]), &Roc::whole_plane()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn round_trip_each_option() {
        let f = rf(&[1.0, 2.0], &[-3.0, 2.0, 1.0]);
        for roc in roc_options(&f) {
            let pair = forward(&inverse(&f, &roc).unwrap()).unwrap();
            assert!(same(&pair.f, &f), "{roc}");
            assert_eq!(pair.roc, roc);
        }
    }

    #[test]
    fn roc_option_examples() {
        let opts = roc_options(&rf(&[1.0], &[-3.0, 2.0, 1.0]));
        assert_eq!(opts.len(), 3);
        assert_eq!((opts[1].lo(), opts[1].hi()), (-3.0, 1.0));
        assert_eq!(roc_options(&rf(&[1.0], &[2.0, 1.0])).len(), 2);
        let osc = rf(&[1.0], &[1.01, 0.2, 1.0]);
        let opts = roc_options(&osc);
        assert_eq!(opts.len(), 2);
        assert!((opts[0].hi() + 0.1).abs() < 1e-12);
    }

    #[test]
    fn eval_signal_examples() {
        assert!((eval_signal(&two_sided(), -2.0) - (-2.0f64).exp()).abs() < 1e-15);
        let step = SignalSpec::new(vec![SignalTerm::causal(1.0, 0, 0.0)]).unwrap();
        assert_eq!(eval_signal(&step, 0.0), 0.5);
        assert_eq!(eval_signal(&SignalSpec::default(), 3.0), 0.0);
    }

    #[test]
    fn complex_terms_need_conjugates() {
        let t = SignalTerm::new(Complex64::new(0.0, 1.0), 0, Complex64::new(-1.0, 2.0), Direction::Causal);
        assert!(SignalSpec::new(vec![t]).is_err());
        let u = SignalTerm::new(Complex64::new(0.0, -1.0), 0, Complex64::new(-1.0, -2.0), Direction::Causal);
        let spec = SignalSpec::new(vec![t, u]).unwrap();
        // i e^{(−1+2i)t} − i e^{(−1−2i)t} = −2 e^{−t} sin 2t
        assert!((eval_signal(&spec, 0.4) + 2.0 * (-0.4f64).exp() * 0.8f64.sin()).abs() < 1e-14);
        let pair = forward(&spec).unwrap();
        let s = Complex64::new(0.5, 0.1);
        assert!((pair.f.eval(s).unwrap() - (-4.0) / ((s + 1.0) * (s + 1.0) + 4.0)).norm() < 1e-12);
    }

    #[test]
    fn strip_conversion() {
        let strip = Strip::new(1.0, 2.0).unwrap();
        let roc = Roc::from_strip(&strip);
        assert_eq!((roc.lo(), roc.hi()), (-2.0, -1.0));
        assert_eq!(roc.to_strip().unwrap(), strip);
        assert!(Roc::new(-1.0, f64::INFINITY).unwrap().to_strip().is_err());
        assert!(Roc::new(-1.0, 1.0).unwrap().to_strip().is_err());
    }
}
