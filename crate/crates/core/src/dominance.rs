//! p-dominance certificates, rate-λ gains, small-gain composition and
//! slope-grid bounds for loops closed through a static nonlinearity.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{block_diag, eig, lyap_solve, spectral_split, sym_eig, sym_max_eig, Matrix, TAU_INERTIA};
use crate::rational::line_tolerance;
use crate::statespace::StateSpace;
use crate::strip::{line_norm_bisection, Boundary, Line, Strip};

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    /// The `(p, 0, n − p)` pattern required of a p-dominance certificate.
    pub fn dominant(p: usize, n: usize) -> Self {
        Self {
            negative: p,
            zero: 0,
            positive: n - p,
        }
    }
}

impl fmt::Display for Inertia {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.negative, self.zero, self.positive)
    }
}

pub fn inertia(m: &Matrix) -> Result<Inertia> {
    let ev = sym_eig(m)?;
    let scale = ev.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let thr = TAU_INERTIA * scale;
    let mut out = Inertia {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for v in ev {
        if v < -thr {
            out.negative += 1;
        } else if v > thr {
            out.positive += 1;
        } else {
            out.zero += 1;
        }
    }
    Ok(out)
}

/// `P` with inertia `(p, 0, n − p)` and `(A+λI)ᵀP + P(A+λI) + εI ≼ 0`.
#[derive(Debug, Clone)]
pub struct DominanceCertificate {
    pub p: usize,
    pub lambda: f64,
    pub p_matrix: Matrix,
    pub epsilon: f64,
    /// Largest eigenvalue of `AᵀP + PA + 2λP + εI`.
    pub lmi_residual: f64,
    pub inertia: Inertia,
}

fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

fn shifted_a(ss: &StateSpace, lambda: f64) -> Matrix {
    let n = ss.order();
    ss.a() + Matrix::identity(n, n) * lambda
}

/// Number of eigenvalues of `A` right of `Re(s) = −λ`.
pub fn count_right(a: &Matrix, lambda: f64) -> Result<usize> {
    let re_line = 0.0 - lambda;
    let mut right = 0;
    for e in eig(a)? {
        if (e.re - re_line).abs() <= line_tolerance(e.re) {
            return Err(Error::MarginalRate { eigenvalue: e, re_line });
        }
        if e.re > re_line {
            right += 1;
        }
    }
    Ok(right)
}

/// Certifies that exactly `p` eigenvalues of `A` lie right of `Re(s) = −λ`.
///
/// `P` is assembled from two Lyapunov solves on the modal blocks of
/// `A + λI`, and `ε` is half of the margin it achieves. A system without
/// states gets the empty certificate with `ε = 0`.
pub fn dominance_check(ss: &StateSpace, p: usize, lambda: f64) -> Result<DominanceCertificate> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("rate must be finite and non-negative, got {lambda}")));
    }
    let n = ss.order();
    let actual = count_right(ss.a(), lambda)?;
    if actual != p {
        return Err(Error::NotPDominant {
            expected: p,
            actual,
            re_line: 0.0 - lambda,
        });
    }
    if n == 0 {
        return Ok(DominanceCertificate {
            p,
            lambda,
            p_matrix: Matrix::zeros(0, 0),
            epsilon: 0.0,
            lmi_residual: 0.0,
            inertia: Inertia::dominant(0, 0),
        });
    }
    let at = shifted_a(ss, lambda);
    let sp = spectral_split(&at, 0.0, 0.0)?;
    let (wr, wl) = (sp.w_right(), sp.w_left());
    let a_plus = &wr * &at * &sp.right;
    let a_minus = &wl * &at * &sp.left;
    let p_plus = if p > 0 {
        lyap_solve(&(-a_plus), &Matrix::identity(p, p))?
    } else {
        Matrix::zeros(0, 0)
    };
    let p_minus = if n > p {
        lyap_solve(&a_minus, &Matrix::identity(n - p, n - p))?
    } else {
        Matrix::zeros(0, 0)
    };
    let modal = block_diag(&(-p_plus), &p_minus);
    let pm = symmetrize(&(sp.t_inv.transpose() * modal * &sp.t_inv));
    let lyap = symmetrize(&(at.transpose() * &pm + &pm * &at));
    let worst = sym_max_eig(&lyap)?;
    if worst >= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "assembled certificate is not strict (largest eigenvalue {worst:.3e})"
        )));
    }
    let epsilon = -0.5 * worst;
    let residual = sym_max_eig(&(lyap + Matrix::identity(n, n) * epsilon))?;
    let inert = inertia(&pm)?;
    if inert != Inertia::dominant(p, n) || residual > 0.0 {
        return Err(Error::NumericalFailure(format!(
            "certificate check failed: inertia {inert}, residual {residual:.3e}"
        )));
    }
    Ok(DominanceCertificate {
        p,
        lambda,
        p_matrix: pm,
        epsilon,
        lmi_residual: residual,
        inertia: inert,
    })
}

/// Outcome of assembling the gain LMI for a candidate `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainLmiCheck {
    pub max_eig: f64,
    pub inertia: Inertia,
}

impl GainLmiCheck {
    pub fn holds(&self) -> bool {
        self.max_eig <= 0.0
    }
}

/// Largest eigenvalue of
/// `[[AᵀP + PA + 2λP + εI + CᵀC, PB + CᵀD], [BᵀP + DᵀC, DᵀD − γ²I]]`.
pub fn verify_gain_lmi(ss: &StateSpace, p: &Matrix, gamma: f64, lambda: f64, epsilon: f64) -> Result<GainLmiCheck> {
    let n = ss.order();
    let m = ss.inputs();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "P must be {n}x{n}, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    let inert = inertia(p)?;
    let (a, b, c, d) = (ss.a(), ss.b(), ss.c(), ss.d());
    let top_left = a.transpose() * p + p * a + p * (2.0 * lambda) + Matrix::identity(n, n) * epsilon + c.transpose() * c;
    let top_right = p * b + c.transpose() * d;
    let bottom = d.transpose() * d - Matrix::identity(m, m) * (gamma * gamma);
    let mut big = Matrix::zeros(n + m, n + m);
    big.view_mut((0, 0), (n, n)).copy_from(&top_left);
    big.view_mut((0, n), (n, m)).copy_from(&top_right);
    big.view_mut((n, 0), (m, n)).copy_from(&top_right.transpose());
    big.view_mut((n, n), (m, m)).copy_from(&bottom);
    Ok(GainLmiCheck {
        max_eig: sym_max_eig(&symmetrize(&big))?,
        inertia: inert,
    })
}

/// Rate-λ gain `γ_λ` of a p-dominant system, optionally with an LMI certificate.
#[derive(Debug, Clone)]
pub struct GainCertificate {
    pub gamma: f64,
    pub lambda: f64,
    pub p: usize,
    pub bracket: (f64, f64),
    pub peak_frequency: f64,
    pub p_matrix: Option<Matrix>,
    pub epsilon: f64,
    pub lmi_residual: Option<f64>,
    /// The `γ` at which `P` was verified; above `bracket.1` by at most `10⁻⁴γ`.
    pub certified_gamma: Option<f64>,
}

/// `P` from the stabilizing solution of the Riccati equation behind the gain
/// LMI at `gamma`, regularised by `η` on a descending ladder.
fn riccati_certificate(ss: &StateSpace, p: usize, lambda: f64, gamma: f64) -> Option<(Matrix, f64, f64)> {
    let n = ss.order();
    let m = ss.inputs();
    let at = shifted_a(ss, lambda);
    let (b, c, d) = (ss.b(), ss.c(), ss.d());
    let r = Matrix::identity(m, m) * (gamma * gamma) - d.transpose() * d;
    let r_inv = r.try_inverse()?;
    let f = &at + b * &r_inv * d.transpose() * c;
    let g = b * &r_inv * b.transpose();
    let q0 = c.transpose() * (Matrix::identity(c.nrows(), c.nrows()) + d * &r_inv * d.transpose()) * c;
    let mut eta = 1e-2;
    while eta >= 1e-12 {
        let q = &q0 + Matrix::identity(n, n) * eta;
        let mut h = Matrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&f);
        h.view_mut((0, n), (n, n)).copy_from(&g);
        h.view_mut((n, 0), (n, n)).copy_from(&(-q));
        h.view_mut((n, n), (n, n)).copy_from(&(-f.transpose()));
        if let Ok(sp) = spectral_split(&h, 0.0, 1e-10 * (1.0 + h.norm())) {
            if sp.dim_left() == n {
                let x1 = sp.left.rows(0, n).into_owned();
                let x2 = sp.left.rows(n, n).into_owned();
                if let Some(x1_inv) = x1.try_inverse() {
                    let x = symmetrize(&(x2 * x1_inv));
                    let eps = 0.5 * eta;
                    if let Ok(chk) = verify_gain_lmi(ss, &x, gamma, lambda, eps) {
                        if chk.holds() && chk.inertia == Inertia::dominant(p, n) {
                            return Some((x, eps, chk.max_eig));
                        }
                    }
                }
            }
        }
        eta *= 0.1;
    }
    None
}

/// `γ_λ` of a p-dominant system by Hamiltonian bisection.
///
/// With `with_certificate`, also tries to build and verify `P` at a `γ`
/// just above the bracket; `P` is left out if that fails.
pub fn l2p_gain(ss: &StateSpace, p: usize, line: &Line, tol: f64, with_certificate: bool) -> Result<GainCertificate> {
    ss.require_siso()?;
    dominance_check(ss, p, line.lambda())?;
    let nr = line_norm_bisection(ss, line, tol)?;
    let bracket = nr.bracket.unwrap_or((nr.value, nr.value));
    let mut out = GainCertificate {
        gamma: nr.value,
        lambda: line.lambda(),
        p,
        bracket,
        peak_frequency: nr.peak_frequency,
        p_matrix: None,
        epsilon: 0.0,
        lmi_residual: None,
        certified_gamma: None,
    };
    if with_certificate {
        // a wider margin above γ_λ lets the regularisation η stay above rounding
        for rel in [10.0 * tol, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4] {
            if rel < 10.0 * tol {
                continue;
            }
            let gamma_c = (nr.value * (1.0 + rel)).max(bracket.1 + tol);
            if let Some((x, eps, res)) = riccati_certificate(ss, p, line.lambda(), gamma_c) {
                out.p_matrix = Some(x);
                out.epsilon = eps;
                out.lmi_residual = Some(res);
                out.certified_gamma = Some(gamma_c);
                break;
            }
        }
    }
    Ok(out)
}

/// `γ_Λ` with the two endpoint gains and the interior diagnostics.
#[derive(Debug, Clone)]
pub struct StripGain {
    pub gamma: f64,
    pub boundary: Boundary,
    pub lo: GainCertificate,
    pub hi: GainCertificate,
    /// `(λ, γ_λ)` at five interior rates.
    pub interior: Vec<(f64, f64)>,
}

/// `γ_Λ = max(γ_{λ_lo}, γ_{λ_hi})`.
pub fn strip_gain(ss: &StateSpace, p: usize, strip: &Strip, tol: f64, with_certificate: bool) -> Result<StripGain> {
    let lo = l2p_gain(ss, p, &strip.lo_line(), tol, with_certificate)?;
    let hi = l2p_gain(ss, p, &strip.hi_line(), tol, with_certificate)?;
    let (gamma, boundary) = if lo.gamma >= hi.gamma {
        (lo.gamma, Boundary::Lo)
    } else {
        (hi.gamma, Boundary::Hi)
    };
    let rates: Vec<f64> = (1..=5)
        .map(|i| strip.lo() + (strip.hi() - strip.lo()) * i as f64 / 6.0)
        .collect();
    let interior = rates
        .par_iter()
        .map(|&lam| Ok((lam, line_norm_bisection(ss, &Line::new(lam)?, tol)?.value)))
        .collect::<Result<Vec<_>>>()?;
    for &(lam, g) in &interior {
        if g > gamma + 2.0 * tol + 1e-6 * gamma {
            return Err(Error::NumericalFailure(format!(
                "interior gain {g} at rate {lam} exceeds the endpoint maximum {gamma}"
            )));
        }
    }
    Ok(StripGain {
        gamma,
        boundary,
        lo,
        hi,
        interior,
    })
}

/// Negative feedback `u₁ = r − y₂`, `u₂ = y₁`, output `y₁`, state `(x₁, x₂)`.
pub fn feedback_compose(ss1: &StateSpace, ss2: &StateSpace) -> Result<StateSpace> {
    let (n1, n2) = (ss1.order(), ss2.order());
    let (m1, q1) = (ss1.inputs(), ss1.outputs());
    if ss2.inputs() != q1 || ss2.outputs() != m1 {
        return Err(Error::InvalidInput(format!(
            "feedback path must be {m1}x{q1} (outputs x inputs), got {}x{}",
            ss2.outputs(),
            ss2.inputs()
        )));
    }
    let (d1, d2) = (ss1.d(), ss2.d());
    let loop_m = Matrix::identity(q1, q1) + d1 * d2;
    let sv = loop_m.singular_values();
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::IllPosed);
    }
    let e = loop_m.try_inverse().ok_or(Error::IllPosed)?;
    let n = n1 + n2;
    // y₁ = Cy x + Dy r
    let mut cx = Matrix::zeros(q1, n);
    cx.view_mut((0, 0), (q1, n1)).copy_from(ss1.c());
    cx.view_mut((0, n1), (q1, n2)).copy_from(&(-(d1 * ss2.c())));
    let cy = &e * cx;
    let dy = &e * d1;
    // u₁ = Cu x + Du r
    let mut cu = -(d2 * &cy);
    {
        let mut blk = cu.view_mut((0, n1), (m1, n2));
        blk -= ss2.c();
    }
    let du = Matrix::identity(m1, m1) - d2 * &dy;
    let mut a = block_diag(ss1.a(), ss2.a());
    {
        let mut top = a.rows_mut(0, n1);
        top += ss1.b() * &cu;
    }
    {
        let mut bottom = a.rows_mut(n1, n2);
        bottom += ss2.b() * &cy;
    }
    let mut b = Matrix::zeros(n, m1);
    b.rows_mut(0, n1).copy_from(&(ss1.b() * du));
    b.rows_mut(n1, n2).copy_from(&(ss2.b() * &dy));
    StateSpace::new(a, b, cy, dy)
}

#[derive(Debug, Clone)]
pub enum SmallGainVerdict {
    /// `γ₁γ₂ < 1` and the closed loop is `(p₁+p₂)`-dominant at both endpoints.
    Confirmed {
        closed_loop: StateSpace,
        lo: DominanceCertificate,
        hi: DominanceCertificate,
    },
    /// `γ₁γ₂ ≥ 1`: the theorem says nothing.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SmallGainReport {
    pub gain1: StripGain,
    pub gain2: StripGain,
    pub product: f64,
    pub verdict: SmallGainVerdict,
}

pub fn small_gain_check(
    ss1: &StateSpace,
    p1: usize,
    ss2: &StateSpace,
    p2: usize,
    strip: &Strip,
    tol: f64,
) -> Result<SmallGainReport> {
    // an ill-posed loop is an error whatever the gains are
    let closed_loop = feedback_compose(ss1, ss2)?;
    let gain1 = strip_gain(ss1, p1, strip, tol, false)?;
    let gain2 = strip_gain(ss2, p2, strip, tol, false)?;
    // upper ends of the brackets, so that the product test is conservative
    let g1 = gain1.lo.bracket.1.max(gain1.hi.bracket.1);
    let g2 = gain2.lo.bracket.1.max(gain2.hi.bracket.1);
    let product = g1 * g2;
    let verdict = if product < 1.0 {
        let lo = dominance_check(&closed_loop, p1 + p2, strip.lo())?;
        let hi = dominance_check(&closed_loop, p1 + p2, strip.hi())?;
        SmallGainVerdict::Confirmed { closed_loop, lo, hi }
    } else {
        SmallGainVerdict::Inconclusive
    };
    Ok(SmallGainReport {
        gain1,
        gain2,
        product,
        verdict,
    })
}

/// Asymptotic behaviour of bounded solutions of a p-dominant system.
pub fn classify_attractors(p: usize) -> &'static str {
    match p {
        0 => "every bounded solution converges to the unique equilibrium point",
        1 => "every bounded solution converges to a (possibly non-unique) equilibrium point",
        2 => "every bounded solution converges to an equilibrium point, a set of equilibria with connected arcs, or a limit cycle",
        _ => "no classification available for p >= 3",
    }
}

/// Loop closed through a static slope `σ` at the plant output, seen from an
/// input `w` added at the plant input to the slope output `z = −σy`:
/// `A_σ = A − kBC`, `B_σ = B(1 − kD)`, `C_σ = −kC`, `D_σ = −kD` with
/// `k = σ/(1 + σD)`.
pub fn slope_closed_loop(ss: &StateSpace, sigma: f64) -> Result<StateSpace> {
    ss.require_siso()?;
    let d = ss.d_scalar();
    let den = 1.0 + sigma * d;
    if den.abs() <= 1e-12 * (1.0 + (sigma * d).abs()) {
        return Err(Error::IllPosed);
    }
    let k = sigma / den;
    StateSpace::new(
        ss.a() - ss.b() * ss.c() * k,
        ss.b() * (1.0 - k * d),
        ss.c() * (-k),
        Matrix::from_element(1, 1, -k * d),
    )
}

/// `n` evenly spaced slopes on `[lo, hi]`.
pub fn slope_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub const DEFAULT_SLOPES: usize = 11;

/// Label attached to every [`sector_slope_gain`] result.
pub const SLOPE_GRID_LABEL: &str = "slope-grid bound";

#[derive(Debug, Clone)]
pub struct SlopeGridBound {
    pub gamma: f64,
    /// `(σ, γ_λ(σ))` in slope order.
    pub per_slope: Vec<(f64, f64)>,
    pub label: &'static str,
}

/// Maximum of `γ_λ` over the slope-σ closed loops.
///
/// This is a lower bound for the differential gain of the loop with a
/// sector nonlinearity, not a common-certificate bound.
pub fn sector_slope_gain(ss: &StateSpace, slopes: &[f64], p: usize, line: &Line, tol: f64) -> Result<SlopeGridBound> {
    if slopes.is_empty() {
        return Err(Error::InvalidInput("slope grid is empty".into()));
    }
    let per_slope = slopes
        .par_iter()
        .map(|&sigma| {
            let at_slope = |e: Error| Error::NotPDominantAtSlope {
                slope: sigma,
                reason: Box::new(e),
            };
            let cl = slope_closed_loop(ss, sigma).map_err(at_slope)?;
            let g = l2p_gain(&cl, p, line, tol, false).map_err(|e| match e {
                e @ (Error::NotPDominant { .. } | Error::MarginalRate { .. }) => at_slope(e),
                other => other,
            })?;
            Ok((sigma, g.gamma))
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma = per_slope.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(SlopeGridBound {
        gamma,
        per_slope,
        label: SLOPE_GRID_LABEL,
    })
}
