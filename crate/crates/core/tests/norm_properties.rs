mod common;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stripgain::laplace::{eval_signal, inverse, roc_options};
use stripgain::quad;
use stripgain::strip::{
    decompose_line, default_grid, h2_line_norm_quadrature, line_inner_product, HamiltonianMatrix, LineMethod,
};
use stripgain::{
    h2_line_norm, line_norm_bisection, line_norm_grid, realize, singular_value_test, strip_norm, Line, RationalFunction,
    Strip,
};

#[test]
fn bisection_agrees_with_grid() {
    let mut rng = common::rng(21);
    for case in 0..20 {
        let n = 1 + case % 6;
        let lam = rng.random_range(0.0..2.0);
        let poles = common::random_poles(&mut rng, n, -4.0, 2.0, &[-lam], 0.05);
        let g = common::random_tf(&mut rng, &poles, case % 4 == 0);
        let line = Line::new(lam).unwrap();
        let tol = 1e-7;
        let b = line_norm_bisection(&realize(&g).unwrap(), &line, tol).unwrap();
        let gr = line_norm_grid(&g, &line, &default_grid(&g)).unwrap();
        let allowed = tol.max(1e-3 * b.value);
        assert!((b.value - gr.value).abs() <= allowed, "case {case}: {} vs {}", b.value, gr.value);
        let (lo, hi) = b.bracket.unwrap();
        assert!(hi - lo <= tol && lo <= b.value && b.value <= hi);
    }
}

#[test]
fn bisection_classification_is_monotone() {
    let mut rng = common::rng(22);
    for case in 0..12 {
        let n = 1 + case % 5;
        let poles = common::random_poles(&mut rng, n, -3.0, 2.0, &[-0.5], 0.1);
        let g = common::random_tf(&mut rng, &poles, false);
        let ss = realize(&g).unwrap();
        let line = Line::new(0.5).unwrap();
        let b = line_norm_bisection(&ss, &line, 1e-8).unwrap();
        let (lo, hi) = b.bracket.unwrap();
        for f in [0.3, 0.7, 0.99] {
            let h = HamiltonianMatrix::new(&ss, &line, lo * f).unwrap();
            assert!(h.has_imaginary_eigenvalue().unwrap(), "case {case}: below {f}");
        }
        for f in [1.01, 1.5, 4.0] {
            let h = HamiltonianMatrix::new(&ss, &line, hi * f).unwrap();
            assert!(!h.has_imaginary_eigenvalue().unwrap(), "case {case}: above {f}");
        }
    }
}

fn random_strip_case(rng: &mut ChaCha8Rng, case: usize) -> (RationalFunction, Strip) {
    let lo = rng.random_range(0.0..1.5);
    let hi = lo + rng.random_range(0.2..1.5);
    let strip = Strip::new(lo, hi).unwrap();
    (strip_avoiding_tf(rng, &strip, 1 + case % 6, case % 3 == 0), strip)
}

fn strip_avoiding_tf(rng: &mut ChaCha8Rng, strip: &Strip, n: usize, feedthrough: bool) -> RationalFunction {
    let mid = -0.5 * (strip.lo() + strip.hi());
    let gap = 0.5 * (strip.hi() - strip.lo()) + 0.05;
    let poles = common::random_poles(rng, n, mid - gap - 3.0, mid + gap + 3.0, &[mid], gap);
    common::random_tf(rng, &poles, feedthrough)
}

#[test]
fn interior_never_exceeds_boundary_max() {
    let mut rng = common::rng(23);
    for case in 0..20 {
        let (g, strip) = random_strip_case(&mut rng, case);
        let r = strip_norm(&g, &strip, LineMethod::Grid).unwrap();
        let tau = 1e-9 + 1e-6 * r.value;
        for i in 1..=5 {
            let lam = strip.lo() + (strip.hi() - strip.lo()) * i as f64 / 6.0;
            for w in [0.0, 0.3, 1.0, 2.5, 7.0] {
                let v = g.eval(Complex64::new(-lam, w)).unwrap().norm();
                assert!(v <= r.value + tau, "case {case}: {v} > {}", r.value);
            }
        }
    }
}

#[test]
fn multiplication_operator_bound() {
    let mut rng = common::rng(24);
    for case in 0..10 {
        let (g, strip) = random_strip_case(&mut rng, case);
        let u = strip_avoiding_tf(&mut rng, &strip, 1 + case % 3, false);
        let gamma = strip_norm(&g, &strip, LineMethod::Grid).unwrap().value;
        let gu = g.mul(&u).unwrap();
        let u_sup = [strip.lo_line(), strip.hi_line()]
            .iter()
            .map(|l| h2_line_norm(&u, l).unwrap())
            .fold(0.0, f64::max);
        for l in [strip.lo_line(), strip.hi_line()] {
            if !gu.is_strictly_proper() {
                continue;
            }
            let v = h2_line_norm(&gu, &l).unwrap();
            assert!(v <= gamma * u_sup + 1e-6, "case {case}: {v} > {gamma} * {u_sup}");
        }
    }
}

#[test]
fn h2_matches_quadrature() {
    let mut rng = common::rng(25);
    for case in 0..10 {
        let n = 1 + case % 6;
        let lam = rng.random_range(0.0..2.0);
        let poles = common::random_poles(&mut rng, n, -4.0, 2.0, &[-lam], 0.2);
        let g = common::random_tf(&mut rng, &poles, false);
        let line = Line::new(lam).unwrap();
        let a = h2_line_norm(&g, &line).unwrap();
        let b = h2_line_norm_quadrature(&g, &line, 1e-12).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.max(1e-12), "case {case}: {a} vs {b}");
    }
}

#[test]
fn parseval_against_weighted_impulse_response() {
    let mut rng = common::rng(26);
    for case in 0..10 {
        let n = 1 + case % 5;
        let lam = rng.random_range(0.0..1.5);
        let poles = common::random_poles(&mut rng, n, -3.5, 1.5, &[-lam], 0.3);
        let g = common::random_tf(&mut rng, &poles, false);
        let line = Line::new(lam).unwrap();
        let roc = roc_options(&g).into_iter().find(|r| r.contains(-lam)).unwrap();
        let spec = inverse(&g, &roc).unwrap();
        let f = |t: f64| {
            let v = eval_signal(&spec, t) * (lam * t).exp();
            Complex64::new(v * v, 0.0)
        };
        let energy = quad::integrate(f, -80.0, 0.0, 1e-12, 400).re + quad::integrate(f, 0.0, 80.0, 1e-12, 400).re;
        let h2 = h2_line_norm(&g, &line).unwrap();
        assert!((h2 * h2 - energy).abs() <= 1e-4 * energy, "case {case}: {} vs {energy}", h2 * h2);
    }
}

#[test]
fn decomposition_is_orthogonal_and_complete() {
    let mut rng = common::rng(27);
    for case in 0..10 {
        let n = 2 + case % 5;
        let lam = rng.random_range(0.0..2.0);
        let poles = common::random_poles(&mut rng, n, -4.0, 2.0, &[-lam], 0.2);
        let g = common::random_tf(&mut rng, &poles, false);
        let line = Line::new(lam).unwrap();
        let (m, p) = decompose_line(&g, &line).unwrap();
        for _ in 0..5 {
            let s = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (Ok(a), Ok(b), Ok(c)) = (g.eval(s), m.eval(s), p.eval(s)) else { continue };
            assert!((a - b - c).norm() <= 1e-8 * (1.0 + a.norm()));
        }
        if m.is_zero() || p.is_zero() {
            continue;
        }
        let ip = line_inner_product(&m, &p, &line, 1e-13).unwrap();
        let bound = 1e-6 * h2_line_norm(&m, &line).unwrap() * h2_line_norm(&p, &line).unwrap();
        assert!(ip.norm() <= bound, "case {case}: {} > {bound}", ip.norm());
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

    #[test]
    fn modulus_is_a_singular_value(seed in proptest::prelude::any::<u64>(), n in 1usize..7, w0 in 0.0f64..6.0) {
        let mut rng = common::rng(seed);
        let lam = rng.random_range(0.0..2.0);
        let poles = common::random_poles(&mut rng, n, -4.0, 2.0, &[-lam], 0.1);
        let g = common::random_tf(&mut rng, &poles, false);
        let line = Line::new(lam).unwrap();
        let gamma = g.eval(line.point(w0)).unwrap().norm();
        proptest::prop_assume!(gamma > 1e-6);
        let ss = realize(&g).unwrap();
        proptest::prop_assert!(singular_value_test(&ss, gamma, w0, &line).unwrap());
    }
}
