//! Fixtures shared by the benchmarks in `benches/`.

use stripgain::{realize, RationalFunction, StateSpace};

/// Lightly damped chain of `order / 2` resonances (plus a lag when `order`
/// is odd), all poles left of `Re s = −0.5`.
pub fn resonant_chain(order: usize) -> RationalFunction {
    let mut den = RationalFunction::constant(1.0);
    for k in 0..order / 2 {
        let w = 1.0 + k as f64;
        let pair = RationalFunction::from_coeffs(&[1.0], &[w * w + 0.36, 1.2, 1.0]).unwrap();
        den = den.mul(&pair).unwrap();
    }
    if order % 2 == 1 {
        den = den.mul(&RationalFunction::from_coeffs(&[1.0], &[2.0, 1.0]).unwrap()).unwrap();
    }
    den
}

pub fn resonant_chain_ss(order: usize) -> StateSpace {
    realize(&resonant_chain(order)).unwrap()
}

/// Slope-1 loop of the saturated integral controller.
pub fn integral_loop() -> StateSpace {
    realize(&RationalFunction::from_coeffs(&[1.0], &[-1.0, 0.0, 5.0, 1.0]).unwrap()).unwrap()
}
