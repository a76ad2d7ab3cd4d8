//! Norm engines on vertical lines and strips.
//!
//! A line is `Re(s) = −λ`; a strip is the set of points with
//! `Re(s) ∈ [−λ_hi, −λ_lo]`. Every norm is taken of the shifted function
//! `G_λ(s) = G(s − λ)` on the imaginary axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, eig, lyap_solve, Matrix};
use crate::poly::Polynomial;
use crate::quad;
use crate::rational::{line_tolerance, RationalFunction};
use crate::statespace::{modal_split_line, realize, StateSpace};

/// The vertical line `Re(s) = −λ`, `λ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    lambda: f64,
}

impl Line {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidInput(format!("rate must be finite and non-negative, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Real part of every point on the line.
    pub fn re(&self) -> f64 {
        0.0 - self.lambda
    }

    pub fn point(&self, omega: f64) -> Complex64 {
        Complex64::new(-self.lambda, omega)
    }
}

/// Rates `Λ = (λ_lo, λ_hi)` with `0 ≤ λ_lo < λ_hi < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strip {
    lo: f64,
    hi: f64,
}

impl Strip {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || lo >= hi {
            return Err(Error::InvalidInput(format!("strip needs 0 <= lo < hi < inf, got ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo_line(&self) -> Line {
        Line { lambda: self.lo }
    }

    pub fn hi_line(&self) -> Line {
        Line { lambda: self.hi }
    }
}

/// Either a single rate or an interval of rates.
pub trait RateRange {
    fn bounds(&self) -> (f64, f64);
}

impl RateRange for Line {
    fn bounds(&self) -> (f64, f64) {
        (self.lambda, self.lambda)
    }
}

impl RateRange for Strip {
    fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Grid,
    Bisection,
    BoundaryMax,
}

impl NormMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMethod::Grid => "grid",
            NormMethod::Bisection => "bisection",
            NormMethod::BoundaryMax => "boundary-max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Lo,
    Hi,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Lo => "lo",
            Boundary::Hi => "hi",
        }
    }
}

/// Line engine used by [`strip_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineMethod {
    Grid,
    Bisection { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    pub tolerance: f64,
    /// May be infinite when the supremum is only approached as `ω → ∞`.
    pub peak_frequency: f64,
    pub boundary: Option<Boundary>,
    pub bracket: Option<(f64, f64)>,
    /// Line norms at `(λ_lo, λ_hi)` for strip results.
    pub boundary_values: Option<(f64, f64)>,
}

/// Relative threshold for calling a Hamiltonian eigenvalue imaginary.
pub const TAU_HAM: f64 = 1e-7;

/// `n_points` log-spaced values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n_points)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n_points - 1) as f64))
                .collect()
        }
    }
}

fn merge_grid(mut grid: Vec<f64>, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    grid.push(0.0);
    grid.extend(extra.into_iter().filter(|w| w.is_finite()).map(f64::abs));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `{0} ∪ 512 log points on [1e−3, 1e3] ∪ |Im(poles)|`.
pub fn default_grid(g: &RationalFunction) -> Vec<f64> {
    merge_grid(log_grid(1e-3, 1e3, 512), g.poles().iter().map(|p| p.im))
}

const GOLDEN_ITERS: usize = 40;
const REFINE_ROUNDS: usize = 3;

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid estimate of `sup_ω |G(−λ + iω)|` with golden-section refinement.
///
/// The result is a lower bound on the true norm. The limit `|G(∞)|` is
/// included, so functions whose supremum is approached only at infinite
/// frequency report `peak_frequency = ∞`.
pub fn line_norm_grid(g: &RationalFunction, line: &Line, grid: &[f64]) -> Result<NormResult> {
    g.check_line(line)?;
    let modulus = |w: f64| g.eval_unchecked(line.point(w)).norm();
    let mut pts: Vec<f64> = grid.iter().copied().filter(|w| w.is_finite()).map(f64::abs).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.is_empty() {
        pts.push(0.0);
    }
    let mut vals: Vec<f64> = pts.par_iter().map(|&w| modulus(w)).collect();

    for _ in 0..REFINE_ROUNDS {
        let n = pts.len();
        let mut found = Vec::new();
        for k in 0..n {
            let left_ok = k == 0 || vals[k] >= vals[k - 1];
            let right_ok = k + 1 == n || vals[k] >= vals[k + 1];
            if left_ok && right_ok {
                let a = if k == 0 { pts[0] } else { pts[k - 1] };
                let b = if k + 1 == n { pts[k] } else { pts[k + 1] };
                if b > a {
                    found.push((a, b));
                }
            }
        }
        let refined: Vec<(f64, f64)> = found.par_iter().map(|&(a, b)| golden_max(&modulus, a, b)).collect();
        for (w, v) in refined {
            if let Err(pos) = pts.binary_search_by(|p| p.total_cmp(&w)) {
                pts.insert(pos, w);
                vals.insert(pos, v);
            }
        }
    }

    let (mut best_w, mut best) = (pts[0], vals[0]);
    for (&w, &v) in pts.iter().zip(&vals) {
        if v > best {
            best = v;
            best_w = w;
        }
    }
    let at_inf = if g.is_strictly_proper() || g.is_zero() {
        0.0
    } else {
        (g.num().leading() / g.den().leading()).abs()
    };
    if at_inf > best {
        best = at_inf;
        best_w = f64::INFINITY;
    }
    Ok(NormResult {
        value: best,
        method: NormMethod::Grid,
        tolerance: 0.0,
        peak_frequency: best_w,
        boundary: None,
        bracket: None,
        boundary_values: None,
    })
}

/// Hamiltonian whose imaginary eigenvalues `iω` mark frequencies with
/// `|G_λ(iω)| = γ`.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub gamma: f64,
    pub matrix: Matrix,
    /// Magnitude used for the relative imaginary-axis threshold.
    pub scale: f64,
}

impl HamiltonianMatrix {
    /// Builds `H_γ` from the shifted SISO realization `(A + λI, B, C, D)`.
    pub fn new(ss: &StateSpace, line: &Line, gamma: f64) -> Result<Self> {
        ss.require_siso()?;
        let d = ss.d_scalar();
        let r = d * d - gamma * gamma;
        if !(gamma > 0.0) || r.abs() <= 1e-12 * gamma * gamma {
            return Err(Error::InvalidInput(format!(
                "gamma = {gamma} must be positive and differ from |D| = {}",
                d.abs()
            )));
        }
        let n = ss.order();
        // balanced state coordinates; companion forms are badly scaled
        let (a, scale) = linalg::balanced(ss.a());
        let a = a + Matrix::identity(n, n) * line.lambda();
        let b = Matrix::from_fn(n, 1, |i, j| ss.b()[(i, j)] / scale[i]);
        let c = Matrix::from_fn(1, n, |i, j| ss.c()[(i, j)] * scale[j]);
        let (b, c) = (&b, &c);
        let f = &a - b * c * (d / r);
        let mut h = Matrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&f);
        h.view_mut((0, n), (n, n)).copy_from(&(b * b.transpose() * (-gamma / r)));
        h.view_mut((n, 0), (n, n)).copy_from(&(c.transpose() * c * (gamma / r)));
        h.view_mut((n, n), (n, n)).copy_from(&(-f.transpose()));
        // diag(αI, I/α) similarity evens out the off-diagonal blocks
        let top = h.view((0, n), (n, n)).norm();
        let bottom = h.view((n, 0), (n, n)).norm();
        if top > 0.0 && bottom > 0.0 {
            let alpha2 = (bottom / top).sqrt();
            h.view_mut((0, n), (n, n)).scale_mut(alpha2);
            h.view_mut((n, 0), (n, n)).scale_mut(1.0 / alpha2);
        }
        // invariant under that similarity, unlike ‖H‖ itself
        let scale = (linalg::norm2(&f) + (top * bottom).sqrt()).max(f64::MIN_POSITIVE);
        Ok(Self { gamma, matrix: h, scale })
    }

    /// Eigenvalues with `|Re μ| ≤ τ_ham·‖H‖`, and whether any eigenvalue was
    /// close enough to the threshold to make the call doubtful.
    fn imaginary_eigenvalues(&self) -> Result<(Vec<Complex64>, bool)> {
        let thr = TAU_HAM * self.scale;
        let ev = eig(&self.matrix)?;
        let imag: Vec<Complex64> = ev.iter().copied().filter(|e| e.re.abs() <= thr).collect();
        let doubtful = ev.iter().any(|e| e.re.abs() > 0.1 * thr && e.re.abs() < 10.0 * thr);
        Ok((imag, doubtful))
    }

    pub fn has_imaginary_eigenvalue(&self) -> Result<bool> {
        Ok(!self.imaginary_eigenvalues()?.0.is_empty())
    }
}

fn check_shifted_axis(ss: &StateSpace, line: &Line) -> Result<()> {
    for e in ss.eigenvalues()? {
        if (e.re - line.re()).abs() <= line_tolerance(e.re) {
            return Err(Error::PoleOnLine { pole: e, re_line: line.re() });
        }
    }
    Ok(())
}

/// `γ ≤ ‖G_λ‖_∞` test with a re-test at `γ(1 ± 1e−6)` near the threshold.
fn gamma_reached(ss: &StateSpace, line: &Line, gamma: f64) -> Result<(bool, Vec<Complex64>)> {
    let h = HamiltonianMatrix::new(ss, line, gamma)?;
    let (imag, doubtful) = h.imaginary_eigenvalues()?;
    let verdict = !imag.is_empty();
    if !doubtful {
        return Ok((verdict, imag));
    }
    let below = HamiltonianMatrix::new(ss, line, gamma * (1.0 - 1e-6))?.has_imaginary_eigenvalue()?;
    let above = HamiltonianMatrix::new(ss, line, gamma * (1.0 + 1e-6))?.has_imaginary_eigenvalue()?;
    if below == above {
        Ok((below, imag))
    } else {
        Ok((verdict, imag))
    }
}

fn coarse_estimate(ss: &StateSpace, line: &Line) -> Result<(f64, f64)> {
    let shifted_poles: Vec<f64> = ss.eigenvalues()?.iter().map(|e| e.im).collect();
    let grid = merge_grid(log_grid(1e-3, 1e3, 64), shifted_poles);
    let mut best = (0.0, 0.0);
    for w in grid {
        let v = ss.eval_siso(line.point(w))?.norm();
        if v > best.1 {
            best = (w, v);
        }
    }
    Ok(best)
}

const MAX_DOUBLINGS: usize = 50;

/// `‖G‖_{L∞(line)}` by bisection on the Hamiltonian imaginary-eigenvalue test.
pub fn line_norm_bisection(ss: &StateSpace, line: &Line, tol: f64) -> Result<NormResult> {
    ss.require_siso()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let d = ss.d_scalar().abs();
    if ss.order() == 0 {
        return Ok(NormResult {
            value: d,
            method: NormMethod::Bisection,
            tolerance: tol,
            peak_frequency: 0.0,
            boundary: None,
            bracket: Some((d, d)),
            boundary_values: None,
        });
    }
    check_shifted_axis(ss, line)?;
    let (w_est, est) = coarse_estimate(ss, line)?;
    let d_floor = if d > 0.0 { d * (1.0 + 1e-9) } else { 0.0 };
    let mut lo = d_floor.max(0.99 * est);
    let mut hi = 2.0 * est + 1.0;
    let mut doublings = 0;
    while gamma_reached(ss, line, hi)?.0 {
        lo = lo.max(hi);
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NumericalFailure("could not bracket the line norm from above".into()));
        }
    }
    let mut peak_candidates: Vec<Complex64> = Vec::new();
    if lo > 0.0 {
        let (ok, imag) = gamma_reached(ss, line, lo)?;
        if ok {
            peak_candidates = imag;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, imag) = gamma_reached(ss, line, mid)?;
        if ok {
            lo = mid;
            peak_candidates = imag;
        } else {
            hi = mid;
        }
    }
    let peak = peak_from_crossings(ss, line, &peak_candidates, w_est)?;
    Ok(NormResult {
        value: 0.5 * (lo + hi),
        method: NormMethod::Bisection,
        tolerance: tol,
        peak_frequency: peak,
        boundary: None,
        bracket: Some((lo, hi)),
        boundary_values: None,
    })
}

/// Picks the best of the crossing frequencies and their midpoints.
fn peak_from_crossings(ss: &StateSpace, line: &Line, imag: &[Complex64], fallback: f64) -> Result<f64> {
    let mut ws: Vec<f64> = imag.iter().map(|e| e.im.abs()).collect();
    ws.sort_by(f64::total_cmp);
    ws.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    let mut cands = vec![0.0, fallback];
    cands.extend(ws.iter().copied());
    cands.extend(ws.windows(2).map(|p| 0.5 * (p[0] + p[1])));
    let mut best = (fallback, f64::NEG_INFINITY);
    for w in cands {
        let v = ss.eval_siso(line.point(w))?.norm();
        if v > best.1 {
            best = (w, v);
        }
    }
    Ok(best.0)
}

/// Whether `γ` is a singular value of `G_λ(iω₀)`, read from `σ_min(H_γ − iω₀I)`.
pub fn singular_value_test(ss: &StateSpace, gamma: f64, omega0: f64, line: &Line) -> Result<bool> {
    ss.require_siso()?;
    let d = ss.d_scalar().abs();
    if !(gamma > 0.0) || (gamma - d).abs() <= 1e-9 * (1.0 + gamma) {
        return Err(Error::InvalidInput(format!(
            "gamma = {gamma} must be positive and away from |D| = {d}"
        )));
    }
    for e in ss.eigenvalues()? {
        if (e.re - line.re()).abs() <= line_tolerance(e.re) {
            return Err(Error::InvalidInput(format!(
                "shifted system has the imaginary-axis eigenvalue {}",
                e + line.lambda()
            )));
        }
    }
    let h = HamiltonianMatrix::new(ss, line, gamma)?;
    Ok(linalg::sigma_min_shifted(&h.matrix, omega0) <= TAU_HAM * h.scale)
}

fn line_norm(g: &RationalFunction, line: &Line, method: LineMethod) -> Result<NormResult> {
    match method {
        LineMethod::Grid => line_norm_grid(g, line, &default_grid(g)),
        LineMethod::Bisection { tol } => {
            g.check_line(line)?;
            line_norm_bisection(&realize(g)?, line, tol)
        }
    }
}

/// `‖G‖_{H∞(S_Λ)}` as the larger of the two boundary line norms.
///
/// A 5×5 interior sample checks that no point inside the strip exceeds
/// the boundary maximum.
pub fn strip_norm(g: &RationalFunction, strip: &Strip, method: LineMethod) -> Result<NormResult> {
    g.pole_partition(strip)?;
    let lo = line_norm(g, &strip.lo_line(), method)?;
    let hi = line_norm(g, &strip.hi_line(), method)?;
    let (best, boundary) = if lo.value >= hi.value {
        (&lo, Boundary::Lo)
    } else {
        (&hi, Boundary::Hi)
    };
    let value = best.value;
    let tau_maxmod = 1e-9 + 1e-6 * value + best.tolerance;
    let omegas = [0.0, lo.peak_frequency, hi.peak_frequency, 1.0, 10.0];
    for i in 1..=5 {
        let lam = strip.lo + (strip.hi - strip.lo) * i as f64 / 6.0;
        for &w in &omegas {
            let w = if w.is_finite() { w } else { 1e3 };
            let v = g.eval_unchecked(Complex64::new(-lam, w)).norm();
            if v > value + tau_maxmod {
                return Err(Error::NumericalFailure(format!(
                    "interior sample |G({}{:+}i)| = {v} exceeds the boundary maximum {value}",
                    -lam, w
                )));
            }
        }
    }
    Ok(NormResult {
        value,
        method: NormMethod::BoundaryMax,
        tolerance: best.tolerance,
        peak_frequency: best.peak_frequency,
        boundary: Some(boundary),
        bracket: best.bracket,
        boundary_values: Some((lo.value, hi.value)),
    })
}

/// Closed-form `((1/2π)∫|G(−λ+iω)|² dω)^{1/2}` from Lyapunov equations.
pub fn h2_line_norm(g: &RationalFunction, line: &Line) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    if !g.is_strictly_proper() {
        return Err(Error::DivergentIntegral(
            "the L2 norm on a line needs a strictly proper function".into(),
        ));
    }
    g.check_line(line)?;
    let ss = realize(&g.shift(line.lambda()))?;
    let split = modal_split_line(&ss, &Line::new(0.0)?)?;
    let mut sq = 0.0;
    let stable = &split.minus;
    if stable.dim() > 0 {
        let l = lyap_solve(&stable.a, &(stable.c.transpose() * &stable.c))?;
        sq += (stable.b.transpose() * l * &stable.b)[(0, 0)];
    }
    // anticausal part, mirrored to a stable system (−A₊, B₊, −C₊)
    let anti = &split.plus;
    if anti.dim() > 0 {
        let l = lyap_solve(&(-&anti.a), &(anti.c.transpose() * &anti.c))?;
        sq += (anti.b.transpose() * l * &anti.b)[(0, 0)];
    }
    Ok(sq.max(0.0).sqrt())
}

/// `(1/2π)∫ f(−λ+iω) conj(g(−λ+iω)) dω` by adaptive quadrature.
pub fn line_inner_product(f: &RationalFunction, g: &RationalFunction, line: &Line, tol: f64) -> Result<Complex64> {
    for h in [f, g] {
        if !h.is_zero() && !h.is_strictly_proper() {
            return Err(Error::DivergentIntegral("inner product needs strictly proper functions".into()));
        }
        h.check_line(line)?;
    }
    let v = quad::integrate_real_line(
        |w| {
            let s = line.point(w);
            f.eval_unchecked(s) * g.eval_unchecked(s).conj()
        },
        tol * 2.0 * PI,
    );
    Ok(v / (2.0 * PI))
}

/// Quadrature counterpart of [`h2_line_norm`].
pub fn h2_line_norm_quadrature(g: &RationalFunction, line: &Line, tol: f64) -> Result<f64> {
    Ok(line_inner_product(g, g, line, tol)?.re.max(0.0).sqrt())
}

/// Splits `G` into the part with poles left of the line and the rest.
pub fn decompose_line(g: &RationalFunction, line: &Line) -> Result<(RationalFunction, RationalFunction)> {
    if g.is_zero() {
        return Ok((RationalFunction::zero(), RationalFunction::zero()));
    }
    if !g.is_strictly_proper() {
        return Err(Error::DivergentIntegral(
            "decomposition on a line needs a strictly proper function".into(),
        ));
    }
    g.check_line(line)?;
    let pf = g.partial_fractions()?;
    let (minus, plus): (Vec<_>, Vec<_>) = pf.terms.iter().cloned().partition(|t| t.pole.re < line.re());
    let zero = Polynomial::zero();
    Ok((
        RationalFunction::from_partial_fractions(&zero, &minus)?,
        RationalFunction::from_partial_fractions(&zero, &plus)?,
    ))
}

/// One Nyquist row: `G_λ(iω)` and the uncertainty disk radius `r·|G_λ(iω)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyRow {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
    pub mag: f64,
    pub disk_radius: f64,
}

pub fn frequency_response_data(
    g: &RationalFunction,
    line: &Line,
    omegas: &[f64],
    radius: f64,
) -> Result<Vec<FrequencyRow>> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInput(format!("uncertainty radius must be finite and >= 0, got {radius}")));
    }
    g.check_line(line)?;
    omegas
        .par_iter()
        .map(|&w| {
            let v = g.eval(line.point(w))?;
            Ok(FrequencyRow {
                omega: w,
                re: v.re,
                im: v.im,
                mag: v.norm(),
                disk_radius: radius * v.norm(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodeRow {
    pub omega: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// Magnitude in dB and phase in degrees, unwrapped along the input order.
pub fn bode_data(g: &RationalFunction, line: &Line, omegas: &[f64]) -> Result<Vec<BodeRow>> {
    let rows = frequency_response_data(g, line, omegas, 0.0)?;
    let mut out = Vec::with_capacity(rows.len());
    let mut prev: Option<f64> = None;
    for r in rows {
        let mut phase = r.im.atan2(r.re).to_degrees();
        if let Some(p) = prev {
            phase += 360.0 * ((p - phase) / 360.0).round();
        }
        prev = Some(phase);
        out.push(BodeRow {
            omega: r.omega,
            mag_db: 20.0 * r.mag.log10(),
            phase_deg: phase,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
        RationalFunction::from_coeffs(num, den).unwrap()
    }

    fn line(l: f64) -> Line {
        Line::new(l).unwrap()
    }

    #[test]
    fn line_and_strip_validation() {
        assert!(Line::new(-1.0).is_err());
        assert!(Line::new(f64::NAN).is_err());
        assert!(Strip::new(2.0, 1.0).is_err());
        assert!(Strip::new(1.0, 1.0).is_err());
        assert!(Strip::new(-0.5, 1.0).is_err());
        assert_eq!(line(2.0).re(), -2.0);
    }

    #[test]
    fn grid_examples() {
        let g = rf(&[1.0], &[2.0, 1.0]);
        let r = line_norm_grid(&g, &line(0.0), &default_grid(&g)).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert_eq!(r.peak_frequency, 0.0);

        let g = rf(&[1.0], &[1.0, 0.2, 1.0]);
        let r = line_norm_grid(&g, &line(0.0), &default_grid(&g)).unwrap();
        let zeta: f64 = 0.1;
        let exact = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        assert!((r.value - exact).abs() < 1e-9, "{}", r.value);
        assert!((r.peak_frequency - (1.0 - 2.0 * zeta * zeta).sqrt()).abs() < 1e-5);

        let g = rf(&[1.0], &[-3.0, 2.0, 1.0]);
        let r = line_norm_grid(&g, &line(0.0), &default_grid(&g)).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_supremum_at_infinity() {
        let delta = rf(&[0.0, -0.1], &[1.0, 0.1]);
        let r = line_norm_grid(&delta, &line(1.0), &default_grid(&delta)).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.peak_frequency.is_infinite());
    }

    #[test]
    fn grid_rejects_pole_on_line() {
        let g = rf(&[1.0], &[1.0, 1.0]);
        assert!(matches!(
            line_norm_grid(&g, &line(1.0), &[0.0]),
            Err(Error::PoleOnLine { .. })
        ));
    }

    #[test]
    fn bisection_examples() {
        let ss = StateSpace::siso(&[-1.0], &[1.0], &[1.0], 0.0).unwrap();
        let r = line_norm_bisection(&ss, &line(0.0), 1e-6).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6);
        let (lo, hi) = r.bracket.unwrap();
        assert!(hi - lo <= 1e-6 && lo <= 1.0 && 1.0 <= hi + 1e-12);

        let ss = realize(&rf(&[1.0], &[1.0, 0.2, 1.0])).unwrap();
        let r = line_norm_bisection(&ss, &line(0.0), 1e-6).unwrap();
        assert!((r.value - 5.025189).abs() < 1e-5, "{}", r.value);
        assert!((r.peak_frequency - 0.98995).abs() < 1e-3, "{}", r.peak_frequency);

        let ss = realize(&rf(&[1.0], &[-1.0, 0.0, 5.0, 1.0])).unwrap();
        let r = line_norm_bisection(&ss, &line(1.0), 1e-6).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-5, "{}", r.value);
    }

    #[test]
    fn bisection_with_feedthrough() {
        // (s + 3)/(s + 1): sup 3 at ω = 0, |D| = 1
        let ss = realize(&rf(&[3.0, 1.0], &[1.0, 1.0])).unwrap();
        let r = line_norm_bisection(&ss, &line(0.0), 1e-7).unwrap();
        assert!((r.value - 3.0).abs() < 1e-6, "{}", r.value);
        // (s + 1)/(s + 3): sup 1 approached at infinity
        let ss = realize(&rf(&[1.0, 1.0], &[3.0, 1.0])).unwrap();
        let r = line_norm_bisection(&ss, &line(0.0), 1e-7).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn hamiltonian_requires_gamma_above_feedthrough() {
        let ss = StateSpace::siso(&[-1.0], &[1.0], &[1.0], 2.0).unwrap();
        assert!(HamiltonianMatrix::new(&ss, &line(0.0), 2.0).is_err());
    }

    #[test]
    fn singular_value_examples() {
        let ss = StateSpace::siso(&[-1.0], &[1.0], &[1.0], 0.0).unwrap();
        assert!(singular_value_test(&ss, 1.0, 0.0, &line(0.0)).unwrap());
        assert!(singular_value_test(&ss, 0.5f64.sqrt(), 1.0, &line(0.0)).unwrap());
        assert!(!singular_value_test(&ss, 2.0, 0.0, &line(0.0)).unwrap());
        assert!(matches!(
            singular_value_test(&ss, 1.0, 0.0, &line(1.0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn strip_examples() {
        let g = rf(&[1.0], &[-3.0, 2.0, 1.0]);
        let r = strip_norm(&g, &Strip::new(0.0, 2.0).unwrap(), LineMethod::Grid).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        let (a, b) = r.boundary_values.unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12 && (b - 1.0 / 3.0).abs() < 1e-12);

        let g = rf(&[1.0], &[-1.0, 1.0]);
        let r = strip_norm(&g, &Strip::new(1.5, 3.0).unwrap(), LineMethod::Bisection { tol: 1e-8 }).unwrap();
        assert!((r.value - 0.4).abs() < 1e-7);
        assert_eq!(r.boundary, Some(Boundary::Lo));

        let r = strip_norm(&RationalFunction::constant(-2.5), &Strip::new(0.0, 1.0).unwrap(), LineMethod::Grid).unwrap();
        assert_eq!(r.value, 2.5);
    }

    #[test]
    fn strip_rejects_inner_pole() {
        let g = rf(&[1.0], &[1.0, 1.0]);
        assert!(matches!(
            strip_norm(&g, &Strip::new(0.5, 2.0).unwrap(), LineMethod::Grid),
            Err(Error::PoleInStrip { .. })
        ));
    }

    #[test]
    fn h2_examples() {
        let h = 0.5f64.sqrt();
        assert!((h2_line_norm(&rf(&[1.0], &[1.0, 1.0]), &line(0.0)).unwrap() - h).abs() < 1e-12);
        assert!((h2_line_norm(&rf(&[1.0], &[2.0, 1.0]), &line(1.0)).unwrap() - h).abs() < 1e-12);
        assert_eq!(h2_line_norm(&RationalFunction::zero(), &line(0.0)).unwrap(), 0.0);
        assert!(matches!(
            h2_line_norm(&rf(&[1.0, 1.0], &[2.0, 1.0]), &line(0.0)),
            Err(Error::DivergentIntegral(_))
        ));
    }

    #[test]
    fn h2_matches_quadrature_with_two_sided_poles() {
        let g = rf(&[1.0, 2.0], &[-3.0, 2.0, 1.0]);
        let l = line(1.5);
        let a = h2_line_norm(&g, &l).unwrap();
        let b = h2_line_norm_quadrature(&g, &l, 1e-12).unwrap();
        assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn decompose_examples() {
        let g = rf(&[1.0], &[-3.0, 2.0, 1.0]);
        let (m, p) = decompose_line(&g, &line(1.0)).unwrap();
        let s = Complex64::new(0.3, 0.7);
        assert!((m.eval(s).unwrap() - (-0.25) / (s + 3.0)).norm() < 1e-12);
        assert!((p.eval(s).unwrap() - 0.25 / (s - 1.0)).norm() < 1e-12);
        let ip = line_inner_product(&m, &p, &line(1.0), 1e-12).unwrap();
        let bound = 1e-6 * h2_line_norm(&m, &line(1.0)).unwrap() * h2_line_norm(&p, &line(1.0)).unwrap();
        assert!(ip.norm() <= bound, "{ip}");

        let g = rf(&[1.0], &[1.0, 1.0]);
        let (m, p) = decompose_line(&g, &line(2.0)).unwrap();
        assert!(m.is_zero());
        assert!((p.eval(s).unwrap() - g.eval(s).unwrap()).norm() < 1e-12);
        let (m, p) = decompose_line(&g, &line(0.0)).unwrap();
        assert!(p.is_zero() && !m.is_zero());
    }

    #[test]
    fn frequency_rows() {
        let g = rf(&[1.0], &[2.0, 1.0]);
        let r = frequency_response_data(&g, &line(1.0), &[0.0], 0.0).unwrap();
        assert_eq!(r[0], FrequencyRow { omega: 0.0, re: 1.0, im: 0.0, mag: 1.0, disk_radius: 0.0 });

        let g = rf(&[-1.0], &[0.0, 0.0, 5.0, 1.0]);
        let r = frequency_response_data(&g, &line(1.0), &[0.0], 0.0).unwrap();
        assert!((r[0].re + 0.25).abs() < 1e-15 && r[0].im.abs() < 1e-15);
        assert!((r[0].mag - 0.25).abs() < 1e-15);

        let r = frequency_response_data(&g, &line(1.0), &[0.5, 2.0], 1.0).unwrap();
        assert!(r.iter().all(|row| row.disk_radius == row.mag));
    }

    #[test]
    fn bode_rows() {
        let g = rf(&[1.0], &[1.0, 1.0]);
        let r = bode_data(&g, &line(0.0), &[1.0]).unwrap();
        assert!((r[0].mag_db + 10.0 * 2f64.log10()).abs() < 1e-12);
        assert!((r[0].phase_deg + 45.0).abs() < 1e-12);
        let g = rf(&[1.0], &[1.0, 3.0, 3.0, 1.0]);
        let r = bode_data(&g, &line(0.0), &log_grid(0.01, 100.0, 200)).unwrap();
        assert!((r.last().unwrap().phase_deg + 270.0).abs() < 5.0);
    }
}
