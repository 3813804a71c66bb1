//! SVD-based ground truth: pseudoinverse solutions, spectral constants and
//! the convergence-bound formulas.
//!
//! Nothing in [`crate::solvers`] calls into this module. All factorizations
//! run in `f64` regardless of the caller's scalar type.

use faer::Mat;

use crate::error::{Error, Result};
use crate::matrix::{frobenius_norm_sq, DenseMatrix};
use crate::scalar::Real;

/// Largest `rows·cols` of the Kronecker matrix `kron_vec_solution` accepts.
pub const KRON_LIMIT: usize = 1_000_000;

/// Absolute tolerance on `|ρ₁ − ρ₂|` below which the rates count as equal.
pub const RATE_EQ_TOL: f64 = 1e-12;

/// `X* = A⁺CB⁺`, `Y* = A⁺C`, `Z* = (I − AA⁺)C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution<T> {
    pub x_star: DenseMatrix<T>,
    pub y_star: DenseMatrix<T>,
    pub z_star: DenseMatrix<T>,
    /// `‖AA⁺CB⁺B − C‖_F ≤ 1e-8·max(1, ‖C‖_F)`.
    pub consistent: bool,
}

/// Extreme singular values and contraction rates of `A` and `B`.
///
/// `sigma_min_*` is the smallest singular value above the numerical-rank
/// cutoff `max(rows, cols)·ε·σ_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProfile {
    pub sigma_min_a: f64,
    pub sigma_max_a: f64,
    pub sigma_min_b: f64,
    pub sigma_max_b: f64,
    pub fro_sq_a: f64,
    pub fro_sq_b: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl SpectralProfile {
    /// Profile with only the rates set; enough for `eta_factor` and
    /// `gamma_factor`.
    pub fn from_rates(rho1: f64, rho2: f64) -> Self {
        Self {
            sigma_min_a: f64::NAN,
            sigma_max_a: f64::NAN,
            sigma_min_b: f64::NAN,
            sigma_max_b: f64::NAN,
            fro_sq_a: f64::NAN,
            fro_sq_b: f64::NAN,
            rho1,
            rho2,
        }
    }
}

type Dense = Mat<f64>;

fn to_fa<T: Real>(m: &DenseMatrix<T>) -> Dense {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_f64_lossy())
}

fn from_fa<T: Real>(m: &Dense) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| T::of(m[(i, j)]))
}

fn rank_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Singular values in decreasing order.
pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Vec<f64> {
    to_fa(m).singular_values().expect("SVD converges")
}

/// Count of singular values above the rank cutoff.
pub fn numerical_rank<T: Real>(m: &DenseMatrix<T>) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = rank_cutoff(m.rows(), m.cols(), smax);
    s.iter().filter(|&&v| v > cut).count()
}

fn pinv_fa(m: &Dense) -> Result<Dense> {
    let (rows, cols) = m.shape();
    let svd = m.thin_svd().expect("SVD converges");
    let s = svd.S().column_vector();
    let smax = if s.nrows() == 0 { 0.0 } else { s[0] };
    if smax == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let cut = rank_cutoff(rows, cols, smax);
    let (u, v) = (svd.U(), svd.V());
    let mut out = Dense::zeros(cols, rows);
    for k in (0..s.nrows()).take_while(|&k| s[k] > cut) {
        // out += v_k u_kᵀ / s_k
        let inv = 1.0 / s[k];
        for j in 0..rows {
            let ujk = u[(j, k)] * inv;
            for i in 0..cols {
                out[(i, j)] += v[(i, k)] * ujk;
            }
        }
    }
    Ok(out)
}

/// Moore-Penrose inverse via truncated SVD.
pub fn pseudoinverse<T: Real>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(from_fa(&pinv_fa(&to_fa(m))?))
}

fn check_shapes<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, c: &DenseMatrix<T>) -> Result<()> {
    let (m, _) = a.shape();
    let (_, n) = b.shape();
    if c.shape() != (m, n) {
        return Err(Error::ShapeMismatch(format!(
            "A is {:?}, B is {:?}, so C must be {m}x{n}, got {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    Ok(())
}

/// Minimal-norm least-squares solution and its companions.
pub fn reference_solution<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
) -> Result<ReferenceSolution<T>> {
    check_shapes(a, b, c)?;
    let (a, b, c) = (to_fa(a), to_fa(b), to_fa(c));
    let a_pinv = pinv_fa(&a)?;
    let b_pinv = pinv_fa(&b)?;
    let y = &a_pinv * &c;
    let x = &y * &b_pinv;
    let z = &c - &a * &y;
    let recon = &a * &x * &b;
    let c_norm = c.norm_l2();
    let consistent = (&recon - &c).norm_l2() <= 1e-8 * c_norm.max(1.0);
    Ok(ReferenceSolution {
        x_star: from_fa(&x),
        y_star: from_fa(&y),
        z_star: from_fa(&z),
        consistent,
    })
}

pub fn spectral_profile<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<SpectralProfile> {
    let ext = |m: &DenseMatrix<T>| -> Result<(f64, f64, f64)> {
        let s = singular_values(m);
        let smax = s[0];
        if smax == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let cut = rank_cutoff(m.rows(), m.cols(), smax);
        let smin = s.iter().copied().filter(|&v| v > cut).fold(smax, f64::min);
        Ok((smin, smax, frobenius_norm_sq(m).to_f64_lossy()))
    };
    let (sigma_min_a, sigma_max_a, fro_sq_a) = ext(a)?;
    let (sigma_min_b, sigma_max_b, fro_sq_b) = ext(b)?;
    Ok(SpectralProfile {
        sigma_min_a,
        sigma_max_a,
        sigma_min_b,
        sigma_max_b,
        fro_sq_a,
        fro_sq_b,
        rho1: (1.0 - sigma_min_a * sigma_min_a / fro_sq_a).max(0.0),
        rho2: (1.0 - sigma_min_b * sigma_min_b / fro_sq_b).max(0.0),
    })
}

/// Three-case factor multiplying `σ²_max(B)/‖B‖²_F` in the CME-RK bound.
pub fn eta_factor(profile: &SpectralProfile, k: u64) -> f64 {
    let (r1, r2) = (profile.rho1, profile.rho2);
    if (r1 - r2).abs() <= RATE_EQ_TOL {
        k as f64
    } else if r1 < r2 {
        r1 / (r2 - r1)
    } else {
        r1 / (r1 - r2) * ((r1 / r2).powf(k as f64) - 1.0)
    }
}

/// Three-case factor on the `Z⁰` term of the IME-REKRK bound.
pub fn gamma_factor(profile: &SpectralProfile, k: u64) -> f64 {
    let (r1, r2) = (profile.rho1, profile.rho2);
    let kf = k as f64;
    if (r1 - r2).abs() <= RATE_EQ_TOL {
        kf * (kf + 1.0) / 2.0
    } else if r1 < r2 {
        r1 * r2 / ((r2 - r1) * (r2 - r1))
    } else {
        kf * r1 / (r1 - r2) * (r1 / r2).powf(kf)
    }
}

/// Upper bound on `E‖X^k − X*‖²_F` for CME-RK started from zero.
pub fn bound_cme_rk(profile: &SpectralProfile, k: u64, init_err: f64) -> f64 {
    if init_err == 0.0 {
        return 0.0;
    }
    let amp = 1.0 + profile.sigma_max_b.powi(2) * eta_factor(profile, k) / profile.fro_sq_b;
    amp * profile.rho2.powf(k as f64) * init_err
}

/// Upper bound on `E‖A X^k B − AA⁺CB⁺B‖²_F` for IME-RGS.
///
/// `init_semi_err` is `‖AX⁰B − AA⁺CB⁺B‖²_F`, `inconsistency` is
/// `‖AA⁺C − AA⁺CB⁺B‖²_F`.
pub fn bound_ime_rgs(
    profile: &SpectralProfile,
    k: u64,
    init_semi_err: f64,
    inconsistency: f64,
) -> f64 {
    let eta = eta_factor(profile, k);
    let decay = profile.rho2.powf(k as f64);
    (1.0 + eta) * decay * init_semi_err + eta * decay * inconsistency
}

/// `‖A(X − X*)B‖_F`, the error measure of the Gauss-Seidel variants.
pub fn semi_norm_error<T: Real>(
    a: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    x_star: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<f64> {
    let d = to_fa(&x.sub(x_star)?);
    Ok((to_fa(a) * d * to_fa(b)).norm_l2())
}

/// Solves the vectorized system `(Bᵀ ⊗ A) vec(X) = vec(C)` by pseudoinverse.
///
/// Desk-scale cross-check only: refuses systems above [`KRON_LIMIT`] entries.
pub fn kron_vec_solution<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>> {
    check_shapes(a, b, c)?;
    let (m, p) = a.shape();
    let (q, n) = b.shape();
    let (rows, cols) = (m * n, p * q);
    if rows.saturating_mul(cols) > KRON_LIMIT {
        return Err(Error::TooLarge {
            rows,
            cols,
            limit: KRON_LIMIT,
        });
    }
    // Column-major vec: C[i, j] -> i + j·m, X[k, l] -> k + l·p.
    let mut kron = Dense::zeros(rows, cols);
    for j in 0..n {
        for l in 0..q {
            let blj = b[(l, j)].to_f64_lossy();
            if blj == 0.0 {
                continue;
            }
            for i in 0..m {
                for k in 0..p {
                    kron[(i + j * m, k + l * p)] = blj * a[(i, k)].to_f64_lossy();
                }
            }
        }
    }
    let mut vec_c = Dense::zeros(rows, 1);
    for j in 0..n {
        for i in 0..m {
            vec_c[(i + j * m, 0)] = c[(i, j)].to_f64_lossy();
        }
    }
    let vec_x = pinv_fa(&kron)? * vec_c;
    Ok(DenseMatrix::from_fn(p, q, |k, l| {
        T::of(vec_x[(k + l * p, 0)])
    }))
}
