//! State-space realizations, modal splitting about a strip, two-sided
//! impulse responses, sampled convolution and exponentially weighted
//! signal norms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, eig, expm, spectral_split, Matrix, Vector};
use crate::poly::Polynomial;
use crate::rational::{line_tolerance, RationalFunction};
use crate::strip::{Line, RateRange, Strip};

/// `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidInput(format!("A must be square, got {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::InvalidInput(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::InvalidInput(format!("C has {} columns, expected {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::InvalidInput(format!(
                "D must be {}x{}, got {}x{}",
                c.nrows(),
                b.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        if [&a, &b, &c, &d].iter().any(|m| m.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("state-space matrices must be finite".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// Single-input single-output system from row-major data.
    pub fn siso(a: &[f64], b: &[f64], c: &[f64], d: f64) -> Result<Self> {
        let n = b.len();
        if a.len() != n * n || c.len() != n {
            return Err(Error::InvalidInput("inconsistent SISO dimensions".into()));
        }
        Self::new(
            Matrix::from_row_slice(n, n, a),
            Matrix::from_column_slice(n, 1, b),
            Matrix::from_row_slice(1, n, c),
            Matrix::from_element(1, 1, d),
        )
    }

    /// Memoryless gain `y = k u`.
    pub fn gain(k: f64) -> Self {
        Self {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, 1),
            c: Matrix::zeros(1, 0),
            d: Matrix::from_element(1, 1, k),
        }
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }
    pub fn is_siso(&self) -> bool {
        self.inputs() == 1 && self.outputs() == 1
    }

    pub(crate) fn require_siso(&self) -> Result<()> {
        if self.is_siso() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "only single-input single-output systems are supported here ({} inputs, {} outputs)",
                self.inputs(),
                self.outputs()
            )))
        }
    }

    /// Scalar feedthrough of a SISO system.
    pub fn d_scalar(&self) -> f64 {
        self.d[(0, 0)]
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eig(&self.a)
    }

    /// Realization of `G(s − λ)`: `A` becomes `A + λI`.
    pub fn shifted(&self, lambda: f64) -> Self {
        let n = self.order();
        Self {
            a: &self.a + Matrix::identity(n, n) * lambda,
            ..self.clone()
        }
    }

    /// Frequency response matrix `C(sI − A)⁻¹B + D`.
    pub fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let d = self.d.map(|v| Complex64::new(v, 0.0));
        if self.order() == 0 {
            return Ok(d);
        }
        let x = linalg::resolvent_apply(&self.a, &self.b, s)
            .ok_or_else(|| Error::PoleProximity { pole: s })?;
        let c = self.c.map(|v| Complex64::new(v, 0.0));
        Ok(c * x + d)
    }

    pub fn eval_siso(&self, s: Complex64) -> Result<Complex64> {
        self.require_siso()?;
        Ok(self.eval(s)?[(0, 0)])
    }
}

/// Controllable canonical (companion) realization of a proper `G`.
pub fn realize(g: &RationalFunction) -> Result<StateSpace> {
    if !g.is_proper() {
        return Err(Error::ImproperTransferFunction {
            num: g.num().degree(),
            den: g.den().degree(),
        });
    }
    let den = g.den();
    let n = den.degree();
    let d = if g.num().degree() == n && !g.is_zero() {
        g.num().coeff(n)
    } else {
        0.0
    };
    if n == 0 {
        return Ok(StateSpace::gain(d));
    }
    let rem = g.num() - &den.scale(d);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den.coeff(j);
    }
    let mut b = Matrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let c = Matrix::from_fn(1, n, |_, j| rem.coeff(j));
    StateSpace::new(a, b, c, Matrix::from_element(1, 1, d))
}

fn charpoly(a: &Matrix) -> Result<Polynomial> {
    Ok(Polynomial::from_roots(&eig(a)?))
}

/// Transfer function of a SISO realization.
///
/// Uses `C adj(sI − A) B = det(sI − A + BC) − det(sI − A)`.
pub fn tf_of(ss: &StateSpace) -> Result<RationalFunction> {
    ss.require_siso()?;
    let d = ss.d_scalar();
    if ss.order() == 0 {
        return Ok(RationalFunction::constant(d));
    }
    let den = charpoly(ss.a())?;
    let closed = charpoly(&(ss.a() - ss.b() * ss.c()))?;
    let diff = &closed - &den;
    // The s^n terms cancel exactly; round-off in the rest is relative to
    // the characteristic polynomial coefficients.
    let scale = den.norm().max(closed.norm());
    let mut coeffs: Vec<f64> = (0..den.degree()).map(|k| diff.coeff(k)).collect();
    for c in coeffs.iter_mut() {
        if c.abs() <= 1e-14 * scale {
            *c = 0.0;
        }
    }
    let num = Polynomial::new(coeffs)?;
    let num = &num + &den.scale(d);
    RationalFunction::new(num, den)
}

/// One side of a modal split.
#[derive(Debug, Clone)]
pub struct ModalBlock {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl ModalBlock {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// `T⁻¹AT = blockdiag(A₊, A₋)` with `A₊` right of the strip and `A₋` left of it.
#[derive(Debug, Clone)]
pub struct ModalSplit {
    pub plus: ModalBlock,
    pub minus: ModalBlock,
    pub t: Matrix,
    pub t_inv: Matrix,
    pub d: Matrix,
}

/// Splits `ss` so that no mode lies in the closed band `Re ∈ [re_lo, re_hi]`.
fn split_band(ss: &StateSpace, re_lo: f64, re_hi: f64) -> Result<ModalSplit> {
    let ev = ss.eigenvalues()?;
    for e in &ev {
        let tol = line_tolerance(e.re);
        if e.re >= re_lo - tol && e.re <= re_hi + tol {
            return Err(Error::EigenvalueInStrip { eigenvalue: *e });
        }
    }
    let mid = 0.5 * (re_lo + re_hi);
    let sp = spectral_split(ss.a(), mid, 0.0)?;
    let (wr, wl) = (sp.w_right(), sp.w_left());
    let plus = ModalBlock {
        a: &wr * ss.a() * &sp.right,
        b: &wr * ss.b(),
        c: ss.c() * &sp.right,
    };
    let minus = ModalBlock {
        a: &wl * ss.a() * &sp.left,
        b: &wl * ss.b(),
        c: ss.c() * &sp.left,
    };
    Ok(ModalSplit {
        plus,
        minus,
        t: sp.t,
        t_inv: sp.t_inv,
        d: ss.d().clone(),
    })
}

pub fn modal_split(ss: &StateSpace, strip: &Strip) -> Result<ModalSplit> {
    split_band(ss, -strip.hi(), -strip.lo())
}

/// Degenerate split about the single line `Re(s) = −λ`.
pub fn modal_split_line(ss: &StateSpace, line: &Line) -> Result<ModalSplit> {
    split_band(ss, line.re(), line.re())
}

impl ModalSplit {
    /// `g(t)`: causal modes for `t > 0`, anticausal (with the sign flip
    /// of the bilateral inverse) for `t < 0`, midpoint at `t = 0`.
    pub fn kernel(&self, t: f64) -> Result<Matrix> {
        let causal = |t: f64| -> Result<Matrix> {
            Ok(&self.minus.c * expm(&self.minus.a, t)? * &self.minus.b)
        };
        let anticausal = |t: f64| -> Result<Matrix> {
            let phi = expm(&(-&self.plus.a), -t)?;
            Ok(-(&self.plus.c * phi * &self.plus.b))
        };
        if t > 0.0 {
            causal(t)
        } else if t < 0.0 {
            anticausal(t)
        } else {
            Ok((causal(0.0)? + anticausal(0.0)?) * 0.5)
        }
    }

    /// Trapezoidal convolution with exact modal stepping.
    pub fn convolve(&self, u: &SampledSignal) -> Result<SampledSignal> {
        let m = self.d.ncols();
        if u.dim() != m {
            return Err(Error::InvalidInput(format!(
                "input has dimension {}, system expects {m}",
                u.dim()
            )));
        }
        let h = u.dt;
        let len = u.len();
        let q = self.d.nrows();
        let mut y: Vec<Vector> = u.samples.iter().map(|uk| &self.d * uk).collect();

        // causal part, forward in time
        let nl = self.minus.dim();
        if nl > 0 && len > 0 {
            let phi = expm(&self.minus.a, h)?;
            let phi_b = &phi * &self.minus.b;
            let mut x = Vector::zeros(nl);
            for k in 1..len {
                x = &phi * &x + (&phi_b * &u.samples[k - 1] + &self.minus.b * &u.samples[k]) * (0.5 * h);
                y[k] += &self.minus.c * &x;
            }
        }
        // anticausal part, backward in time
        let nr = self.plus.dim();
        if nr > 0 && len > 0 {
            let psi = expm(&(-&self.plus.a), h)?;
            let psi_b = &psi * &self.plus.b;
            let mut z = Vector::zeros(nr);
            for k in (0..len - 1).rev() {
                z = &psi * &z + (&self.plus.b * &u.samples[k] + &psi_b * &u.samples[k + 1]) * (0.5 * h);
                y[k] -= &self.plus.c * &z;
            }
        }
        debug_assert!(y.iter().all(|v| v.len() == q));
        SampledSignal::new(u.t0, u.dt, y)
    }
}

/// Two-sided impulse response of a SISO system at time `t`.
pub fn impulse_response(ss: &StateSpace, strip: &Strip, t: f64) -> Result<f64> {
    ss.require_siso()?;
    Ok(modal_split(ss, strip)?.kernel(t)?[(0, 0)])
}

pub fn convolve(ss: &StateSpace, strip: &Strip, u: &SampledSignal) -> Result<SampledSignal> {
    modal_split(ss, strip)?.convolve(u)
}

/// Uniformly sampled vector signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<Vector>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, samples: Vec<Vector>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidInput(format!("invalid time grid t0={t0}, dt={dt}")));
        }
        if let Some(first) = samples.first() {
            let m = first.len();
            if samples.iter().any(|s| s.len() != m) {
                return Err(Error::InvalidInput("samples have inconsistent dimensions".into()));
            }
        }
        if samples.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput("samples must be finite".into()));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn scalar(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(t0, dt, values.into_iter().map(|v| Vector::from_element(1, v)).collect())
    }

    /// Samples `f` at `t0 + k·dt`, `k = 0..len`.
    pub fn from_fn(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::scalar(t0, dt, (0..len).map(|k| f(t0 + k as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(1, |s| s.len())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// First component of every sample.
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s[0]).collect()
    }

    /// Zero-extends by the given number of samples on each side.
    pub fn padded(&self, before: usize, after: usize) -> Self {
        let zero = Vector::zeros(self.dim());
        let mut samples = vec![zero.clone(); before];
        samples.extend(self.samples.iter().cloned());
        samples.extend(std::iter::repeat_n(zero, after));
        Self {
            t0: self.t0 - before as f64 * self.dt,
            dt: self.dt,
            samples,
        }
    }
}

/// Tail mass allowed outside the sampled window, relative to the total.
pub const TAU_TAIL: f64 = 1e-6;

/// `sup_λ (∫ e^{2λt}|f(t)|² dt)^{1/2}` over the rate range, by trapezoid.
///
/// Strips are sampled at both endpoints and nine interior rates.
pub fn weighted_l2_norm<R: RateRange>(f: &SampledSignal, rates: &R) -> Result<f64> {
    let (lo, hi) = rates.bounds();
    let lambdas: Vec<f64> = if lo == hi {
        vec![lo]
    } else {
        (0..=10).map(|k| lo + (hi - lo) * k as f64 / 10.0).collect()
    };
    let mut best = 0.0f64;
    for lam in lambdas {
        best = best.max(weighted_l2_at(f, lam)?);
    }
    Ok(best)
}

fn weighted_l2_at(f: &SampledSignal, lambda: f64) -> Result<f64> {
    let n = f.len();
    if n == 0 {
        return Ok(0.0);
    }
    // log of e^{2λt}|f|²; -inf where f vanishes
    let logs: Vec<f64> = f
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let m2 = s.norm_squared();
            if m2 == 0.0 {
                f64::NEG_INFINITY
            } else {
                2.0 * lambda * f.time(k) + m2.ln()
            }
        })
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let mut total = 0.0;
    for k in 0..n {
        let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        total += weight * w[k];
    }
    total *= f.dt;
    if n > 1 {
        let probe = (n / 10).max(1);
        let ends = [(0usize, probe), (n - 1, n - 1 - probe)];
        for (end, inner) in ends {
            if w[end] <= 1e-14 {
                continue;
            }
            let dist = (end as f64 - inner as f64).abs() * f.dt;
            let tail = if w[inner] > w[end] {
                let rate = (w[inner] / w[end]).ln() / dist;
                w[end] / rate
            } else {
                f64::INFINITY
            };
            let ratio = tail / total;
            if ratio > TAU_TAIL {
                return Err(Error::WindowTooShort { rate: lambda, ratio });
            }
        }
    }
    Ok((0.5 * peak).exp() * total.sqrt())
}
