mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use stripgain::dominance::inertia;
use stripgain::linalg::{eig, lyap_solve, sym_eig, Matrix};

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn block_triangular_spectrum(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a11 = common::random_matrix(&mut rng, 2, 2) * 3.0;
        let a22 = common::random_matrix(&mut rng, 2, 2) * 3.0;
        let a12 = common::random_matrix(&mut rng, 2, 2);
        let mut a = Matrix::zeros(4, 4);
        a.view_mut((0, 0), (2, 2)).copy_from(&a11);
        a.view_mut((2, 2), (2, 2)).copy_from(&a22);
        a.view_mut((0, 2), (2, 2)).copy_from(&a12);
        let whole = sorted(eig(&a).unwrap());
        let mut parts = eig(&a11).unwrap();
        parts.extend(eig(&a22).unwrap());
        let parts = sorted(parts);
        // repeated eigenvalues are only determined to about sqrt(eps)
        for (x, y) in whole.iter().zip(&parts) {
            prop_assert!((x - y).norm() <= 1e-6 * (1.0 + y.norm()), "{x} vs {y}");
        }
    }

    #[test]
    fn inertia_survives_congruence(seed in any::<u64>(), neg in 0usize..3, zero in 0usize..2, pos in 0usize..3) {
        let n = neg + zero + pos;
        prop_assume!(n > 0);
        let mut rng = common::rng(seed);
        let mut d = Vec::new();
        d.extend((0..neg).map(|_| -rng.random_range(0.5..3.0)));
        d.extend((0..zero).map(|_| 0.0));
        d.extend((0..pos).map(|_| rng.random_range(0.5..3.0)));
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        let s = Matrix::identity(n, n) + common::random_matrix(&mut rng, n, n) * 0.3;
        let congruent = s.transpose() * &m * &s;
        let congruent = (&congruent + congruent.transpose()) * 0.5;
        prop_assert_eq!(inertia(&m).unwrap(), inertia(&congruent).unwrap());
    }

    #[test]
    fn lyapunov_of_hurwitz_is_positive(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = common::rng(seed);
        let r = common::random_matrix(&mut rng, n, n);
        let shift = r.singular_values().max() + 0.5;
        let a = r - Matrix::identity(n, n) * shift;
        let l = common::random_matrix(&mut rng, n, n);
        let q = &l * l.transpose() + Matrix::identity(n, n) * 0.1;
        let p = lyap_solve(&a, &q).unwrap();
        prop_assert!(sym_eig(&p).unwrap().iter().all(|&v| v > 0.0));
    }
}
