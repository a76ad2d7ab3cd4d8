#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stripgain::{Polynomial, RationalFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real part in `[lo, hi]` that stays at least `gap` away from every
/// entry of `avoid`.
pub fn real_part(rng: &mut ChaCha8Rng, lo: f64, hi: f64, avoid: &[f64], gap: f64) -> f64 {
    loop {
        let x = rng.random_range(lo..hi);
        if avoid.iter().all(|a| (x - a).abs() >= gap) {
            return x;
        }
    }
}

/// `n` poles, closed under conjugation, with real parts in `[lo, hi]`
/// avoiding the given abscissae.
pub fn random_poles(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, avoid: &[f64], gap: f64) -> Vec<Complex64> {
    let mut poles = Vec::with_capacity(n);
    while poles.len() < n {
        let re = real_part(rng, lo, hi, avoid, gap);
        if n - poles.len() >= 2 && rng.random_bool(0.4) {
            let im = rng.random_range(0.2..3.0);
            poles.push(Complex64::new(re, im));
            poles.push(Complex64::new(re, -im));
        } else {
            poles.push(Complex64::new(re, 0.0));
        }
    }
    poles
}

/// Random rational function over the given poles; numerator degree below
/// `n` unless `proper_feedthrough` is set.
pub fn random_tf(rng: &mut ChaCha8Rng, poles: &[Complex64], proper_feedthrough: bool) -> RationalFunction {
    let n = poles.len();
    let num_deg = if proper_feedthrough { n } else { rng.random_range(0..n.max(1)) };
    let mut coeffs: Vec<f64> = (0..=num_deg).map(|_| rng.random_range(-2.0..2.0)).collect();
    let lead = coeffs.last_mut().unwrap();
    if lead.abs() < 0.3 {
        *lead = 0.3f64.copysign(*lead);
    }
    let num = Polynomial::new(coeffs).unwrap();
    RationalFunction::new(num, Polynomial::from_roots(poles)).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> stripgain::linalg::Matrix {
    stripgain::linalg::Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}
