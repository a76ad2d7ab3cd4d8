//! Dense matrix kernels.
//!
//! Storage is `nalgebra::DMatrix<f64>`. Nonsymmetric eigenvalues use a
//! balanced Hessenberg reduction followed by Francis double-shift QR;
//! symmetric eigenvalues, SVD, LU and the matrix exponential are delegated
//! to nalgebra. Invariant-subspace splitting uses the matrix sign function.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative tolerance on eigenvalue residuals and Sylvester singularity.
pub const TAU_EIG: f64 = 1e-9;
/// Relative asymmetry accepted by symmetric routines.
pub const TAU_SYM: f64 = 1e-12;
/// Relative residual accepted from Lyapunov solves.
pub const TAU_LYAP: f64 = 1e-9;
/// Zero-eigenvalue threshold used for inertia.
pub const TAU_INERTIA: f64 = 1e-8;

const QR_MAX_SWEEPS: usize = 30;

fn check_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

fn check_square(a: &Matrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// Eigenvalues of a real square matrix, with multiplicity.
///
/// Complex eigenvalues come out in exact conjugate pairs.
pub fn eig(a: &Matrix) -> Result<Vec<Complex64>> {
    let n = check_square(a, "matrix")?;
    check_finite(a, "matrix")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let mut b = a.clone();
    balance(&mut b);
    let h = b.hessenberg().h();
    hqr(h)
}

/// Balanced copy `D⁻¹AD` of `a` and the diagonal of `D` (powers of two, so
/// the scaling is exact).
pub fn balanced(a: &Matrix) -> (Matrix, Vec<f64>) {
    let mut b = a.clone();
    let d = balance(&mut b);
    (b, d)
}

/// Diagonal similarity scaling that equalises row and column norms.
fn balance(a: &mut Matrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.nrows();
    let mut scale = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                    scale[i] *= f;
                }
            }
        }
    }
    scale
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
#[allow(unused_assignments)]
fn hqr(h: Matrix) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    // 1-based working copy keeps the index arithmetic readable.
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[(i, j)];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    // nearly repeated eigenvalues (Hamiltonians close to a crossing) converge
    // only linearly, hence the generous budget
    let max_sweeps = QR_MAX_SWEEPS * n.max(10);
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r, mut s, mut w, mut x, mut y, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == max_sweeps {
                        return Err(Error::NumericalFailure(
                            "QR iteration did not converge".into(),
                        ));
                    }
                    if its % 10 == 0 && its > 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eig(m: &Matrix) -> Result<Vec<f64>> {
    let n = check_square(m, "symmetric matrix")?;
    check_finite(m, "symmetric matrix")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let asym = (m - m.transpose()).norm();
    if asym > TAU_SYM * m.norm() {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Largest eigenvalue of a symmetric matrix (`-inf` for an empty matrix).
pub fn sym_max_eig(m: &Matrix) -> Result<f64> {
    Ok(sym_eig(m)?.last().copied().unwrap_or(f64::NEG_INFINITY))
}

/// Solves `AᵀP + PA = −Q` for symmetric `P`.
///
/// Dense Kronecker formulation; fine up to a few dozen states.
pub fn lyap_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = check_square(a, "A")?;
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "Q must be {n}x{n}, got {}x{}",
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let ev = eig(a)?;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for (i, &li) in ev.iter().enumerate() {
        for &lj in &ev[i..] {
            if (li + lj).norm() <= TAU_EIG * scale {
                return Err(Error::SingularSylvester(li, lj));
            }
        }
    }
    // vec(AᵀP + PA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P), column-major vec.
    let at = a.transpose();
    let nn = n * n;
    let mut k = Matrix::zeros(nn, nn);
    for j in 0..n {
        for i in 0..n {
            let row = i + j * n;
            for l in 0..n {
                // (Aᵀ P)_{ij} = Σ_l Aᵀ_{il} P_{lj}
                k[(row, l + j * n)] += at[(i, l)];
                // (P A)_{ij} = Σ_l P_{il} A_{lj}
                k[(row, i + l * n)] += a[(l, j)];
            }
        }
    }
    let rhs = Vector::from_iterator(nn, q.iter().map(|v| -v));
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure("Lyapunov system is singular".into()))?;
    let p = Matrix::from_column_slice(n, n, sol.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    let resid = (at * &p + &p * a + q).norm();
    let bound = TAU_LYAP * (a.norm() * p.norm() + q.norm()).max(f64::MIN_POSITIVE);
    if resid > bound {
        return Err(Error::NumericalFailure(format!(
            "Lyapunov residual {resid:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(p)
}

/// Matrix exponential `e^{Ah}`, sub-stepped when `‖A‖h` is large.
pub fn expm(a: &Matrix, h: f64) -> Result<Matrix> {
    let n = check_square(a, "A")?;
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step must be finite and >= 0, got {h}")));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let growth = a.norm() * h;
    let steps = ((growth / 8.0).ceil() as usize).clamp(1, 4096);
    let phi = (a * (h / steps as f64)).exp();
    let mut out = phi.clone();
    for _ in 1..steps {
        out = &out * &phi;
    }
    Ok(out)
}

/// State after holding `ẋ = Ax` for time `h` from `x0`.
pub fn lti_propagate(a: &Matrix, x0: &Vector, h: f64) -> Result<Vector> {
    let n = check_square(a, "A")?;
    if x0.len() != n {
        return Err(Error::InvalidInput(format!(
            "state has length {}, expected {n}",
            x0.len()
        )));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step must be finite and >= 0, got {h}")));
    }
    if n == 0 {
        return Ok(x0.clone());
    }
    let steps = ((a.norm() * h / 8.0).ceil() as usize).clamp(1, 1 << 20);
    let phi = (a * (h / steps as f64)).exp();
    let mut x = x0.clone();
    for _ in 0..steps {
        x = &phi * x;
    }
    Ok(x)
}

/// Matrix sign function by scaled Newton iteration.
fn sign_function(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    let mut z = m.clone();
    let mut scaling = true;
    let mut prev_change = f64::INFINITY;
    for _ in 0..100 {
        let zi = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("sign iteration hit a singular matrix".into()))?;
        let mu = if scaling {
            (zi.norm() / z.norm()).sqrt()
        } else {
            1.0
        };
        let next = (&z * mu + zi / mu) * 0.5;
        let change = (&next - &z).norm();
        let size = next.norm();
        z = next;
        if change <= 1e-2 * size {
            scaling = false;
        }
        if change <= 1e-14 * size.max(1.0) * (n as f64).sqrt() {
            return Ok(z);
        }
        // quadratic convergence has stalled at the rounding floor
        if !scaling && change <= 1e-7 * size && change >= 0.5 * prev_change {
            return Ok(z);
        }
        prev_change = change;
    }
    Err(Error::NumericalFailure("sign iteration did not converge".into()))
}

/// Orthonormal basis for the column space of a rank-`rank` matrix.
///
/// Column-pivoted QR; nalgebra's SVD returned a wrong `U` on some
/// rank-one projectors.
fn range_basis(m: &Matrix, rank: usize) -> Matrix {
    let n = m.nrows();
    if rank == 0 {
        return Matrix::zeros(n, 0);
    }
    let q = m.clone().col_piv_qr().q();
    q.columns(0, rank).into_owned()
}

/// Block-diagonalising change of basis that separates eigenvalues with
/// `Re > re_split` from those with `Re < re_split`.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Basis of the invariant subspace right of the split line (n × p).
    pub right: Matrix,
    /// Basis of the invariant subspace left of the split line (n × (n−p)).
    pub left: Matrix,
    /// `T = [right | left]`.
    pub t: Matrix,
    /// `T⁻¹`.
    pub t_inv: Matrix,
}

impl SpectralSplit {
    pub fn dim_right(&self) -> usize {
        self.right.ncols()
    }

    pub fn dim_left(&self) -> usize {
        self.left.ncols()
    }

    /// Rows of `T⁻¹` projecting onto the right block.
    pub fn w_right(&self) -> Matrix {
        self.t_inv.rows(0, self.dim_right()).into_owned()
    }

    /// Rows of `T⁻¹` projecting onto the left block.
    pub fn w_left(&self) -> Matrix {
        self.t_inv
            .rows(self.dim_right(), self.dim_left())
            .into_owned()
    }
}

/// Splits the spectrum of `a` about the vertical line `Re(s) = re_split`.
///
/// Fails when an eigenvalue sits within `guard` of the line.
pub fn spectral_split(a: &Matrix, re_split: f64, guard: f64) -> Result<SpectralSplit> {
    let n = check_square(a, "A")?;
    let ev = eig(a)?;
    if let Some(bad) = ev.iter().find(|e| (e.re - re_split).abs() <= guard) {
        return Err(Error::EigenvalueInStrip { eigenvalue: *bad });
    }
    let p = ev.iter().filter(|e| e.re > re_split).count();
    if n == 0 {
        return Ok(SpectralSplit {
            right: Matrix::zeros(0, 0),
            left: Matrix::zeros(0, 0),
            t: Matrix::zeros(0, 0),
            t_inv: Matrix::zeros(0, 0),
        });
    }
    let (right, left) = if p == 0 {
        (Matrix::zeros(n, 0), Matrix::identity(n, n))
    } else if p == n {
        (Matrix::identity(n, n), Matrix::zeros(n, 0))
    } else {
        let shifted = a - Matrix::identity(n, n) * re_split;
        let sign = sign_function(&shifted)?;
        let trace_rank = ((sign.trace() + n as f64) * 0.5).round() as i64;
        if trace_rank != p as i64 {
            return Err(Error::NumericalFailure(format!(
                "spectral projector rank {trace_rank} disagrees with eigenvalue count {p}"
            )));
        }
        let eye = Matrix::identity(n, n);
        let proj_right = (&eye + &sign) * 0.5;
        let proj_left = (&eye - &sign) * 0.5;
        (range_basis(&proj_right, p), range_basis(&proj_left, n - p))
    };
    let mut t = Matrix::zeros(n, n);
    t.columns_mut(0, p).copy_from(&right);
    t.columns_mut(p, n - p).copy_from(&left);
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("invariant subspaces are not complementary".into()))?;
    Ok(SpectralSplit {
        right,
        left,
        t,
        t_inv,
    })
}

/// Smallest singular value of `M − iωI`.
pub fn sigma_min_shifted(m: &Matrix, omega: f64) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let c = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let d = if i == j { Complex64::new(0.0, -omega) } else { Complex64::new(0.0, 0.0) };
        Complex64::new(m[(i, j)], 0.0) + d
    });
    c.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Induced 2-norm via singular values.
pub fn norm2(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Solves `(sI − A) x = b` over the complex field.
pub fn resolvent_apply(a: &Matrix, b: &Matrix, s: Complex64) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let d = if i == j { s } else { Complex64::new(0.0, 0.0) };
        d - Complex64::new(a[(i, j)], 0.0)
    });
    let rhs = b.map(|v| Complex64::new(v, 0.0));
    m.lu().solve(&rhs)
}

pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Matrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}
