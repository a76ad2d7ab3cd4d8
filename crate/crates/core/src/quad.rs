//! Adaptive Simpson quadrature, including integrals over the whole real line.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const MAX_DEPTH: u32 = 48;

struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
}

fn simpson(h: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + fm * 4.0 + fb) * (h / 6.0)
}

fn refine<F: Fn(f64) -> Complex64>(f: &F, p: Panel, tol: f64, depth: u32) -> Complex64 {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(m - p.a, p.fa, flm, p.fm);
    let right = simpson(p.b - m, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if depth >= MAX_DEPTH || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(
        f,
        Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left },
        0.5 * tol,
        depth + 1,
    ) + refine(
        f,
        Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right },
        0.5 * tol,
        depth + 1,
    )
}

/// `∫_a^b f` to absolute tolerance `tol`, starting from `panels` equal pieces.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64, panels: usize) -> Complex64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let pa = a + k as f64 * h;
        let pb = if k + 1 == panels { b } else { pa + h };
        let fa = f(pa);
        let fb = f(pb);
        let fm = f(0.5 * (pa + pb));
        let whole = simpson(pb - pa, fa, fm, fb);
        total += refine(&f, Panel { a: pa, b: pb, fa, fm, fb, whole }, tol / panels as f64, 0);
    }
    total
}

/// `∫_{−∞}^{∞} f(ω) dω` through `ω = tan θ`.
///
/// `f` must decay at least like `1/ω²` for the transformed integrand to
/// stay bounded at `θ = ±π/2`.
pub fn integrate_real_line<F: Fn(f64) -> Complex64>(f: F, tol: f64) -> Complex64 {
    let edge = FRAC_PI_2 - 1e-9;
    let g = |theta: f64| {
        let w = theta.tan();
        f(w) * (1.0 + w * w)
    };
    integrate(g, -edge, edge, tol, 64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| Complex64::new(x * x * x, 0.0), 0.0, 2.0, 1e-12, 1);
        assert!((v.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian() {
        let v = integrate_real_line(|w| Complex64::new(1.0 / (1.0 + w * w), 0.0), 1e-10);
        assert!((v.re - std::f64::consts::PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn sharp_resonance() {
        // |1/(s² + 0.2s + 1)|² on the imaginary axis; integral equals π/(2ζ) with ζ = 0.1.
        let f = |w: f64| {
            let d = Complex64::new(1.0 - w * w, 0.2 * w);
            Complex64::new(1.0 / d.norm_sqr(), 0.0)
        };
        let v = integrate_real_line(f, 1e-10);
        assert!((v.re - std::f64::consts::PI / 0.2).abs() < 1e-7, "{v}");
    }
}
