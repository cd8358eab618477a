//! Cramér–Rao bound for unbiased channel estimates from intensities.
//!
//! With `γ_l = |μ_l|²/σ²` and
//!
//! ```text
//! J(γ) = ∫₀^∞ γt e^{−γ(1+t)} I0(2γ√t) R²(2γ√t) dt,
//! ```
//!
//! the score `∇_{h*}F` has covariance `I_h = Φ* diag{(J(γ_l) − 1)|μ_l|²} Φᵀ/σ⁴`
//! and pseudo-covariance `P_h = Φ* diag{(J(γ_l) − 1)μ_l²} Φᴴ/σ⁴`. The bound on
//! `Cov(ĥ)` is the upper-left block of the inverse of `[[I_h, P_h], [P_h*, I_h*]]`.

use num_complex::Complex;

use crate::linalg::CMatrix;
use crate::specfun::{bessel_i0_scaled, bessel_i1_scaled, bessel_ratio, log_bessel_i0};
use crate::whml::LikelihoodContext;
use crate::{lit, Error, Real, Result};

/// How `J(γ)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JMode {
    #[default]
    Quadrature,
    Approx,
}

/// Which information matrices are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InformationForm {
    /// Covariance and pseudo-covariance of the zero-mean score.
    #[default]
    Score,
    /// `Φ*(μμᴴ + 4(J − 1)diag|μ|²)Φᵀ/σ⁴` and its pseudo counterpart, i.e.
    /// second moments of twice a score shifted by its noiseless mean.
    Uncentered,
}

/// Condition numbers above this make the information singular.
pub const MAX_CONDITION: f64 = 1e12;

const QUAD_TOLERANCE: f64 = 1e-11;
const QUAD_MAX_INTERVALS: usize = 4000;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss–Kronrod over `breaks`, bisecting the worst interval until
/// the summed error estimate drops below `tol`.
fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut pieces: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gauss_kronrod(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if error <= tol.max(1e-13 * total.abs()) {
            return Ok(total);
        }
        if pieces.len() >= QUAD_MAX_INTERVALS || !error.is_finite() {
            return Err(Error::Quadrature { estimate: total, error });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (a, b, _, _) = pieces.swap_remove(worst);
        let m = 0.5 * (a + b);
        for (lo, hi) in [(a, m), (m, b)] {
            let (v, e) = gauss_kronrod(&f, lo, hi);
            pieces.push((lo, hi, v, e));
        }
    }
}

fn check_gamma(gamma: f64, what: &'static str) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain { what, value: gamma });
    }
    Ok(())
}

/// `J(γ)` by adaptive quadrature. The integrand is formed in the log domain,
/// `ln(γt) − γ(1+t) + ln I0(2γ√t) + 2 ln R(2γ√t)`, and the range is cut
/// where `−γ(1 − √t)²` falls below the tail threshold.
pub fn j_gamma_quadrature<T: Real>(gamma: T) -> Result<T> {
    let g = crate::to_f64(gamma);
    check_gamma(g, "j_gamma_quadrature")?;
    let s = (80.0 / g).sqrt();
    let t_lo = if s < 1.0 { (1.0 - s).powi(2) } else { 0.0 };
    let t_hi = (1.0 + s).powi(2) + 80.0 / g;
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let z = 2.0 * g * t.sqrt();
        let (Ok(li0), Ok(r)) = (log_bessel_i0(z), bessel_ratio(z)) else {
            return f64::NAN;
        };
        if r <= 0.0 {
            return 0.0;
        }
        ((g * t).ln() - g * (1.0 + t) + li0 + 2.0 * r.ln()).exp()
    };
    let n = 32;
    let breaks: Vec<f64> = (0..=n).map(|i| t_lo + (t_hi - t_lo) * i as f64 / n as f64).collect();
    let value = integrate(integrand, &breaks, QUAD_TOLERANCE)?;
    Ok(lit(value))
}

/// `Ĵ(γ) = 1 + 1/γ − ¼√(π/γ) e^{−γ/2}[(1 + 1/γ)I0(γ/2) + I1(γ/2)]`, with the
/// exponentially scaled Bessel functions carrying `e^{−γ/2}`.
pub fn j_gamma_approx<T: Real>(gamma: T) -> Result<T> {
    check_gamma(crate::to_f64(gamma), "j_gamma_approx")?;
    let half = gamma / lit(2.0);
    let inv = gamma.recip();
    let bracket = (T::one() + inv) * bessel_i0_scaled(half)? + bessel_i1_scaled(half)?;
    Ok(T::one() + inv - lit::<T>(0.25) * (T::PI() / gamma).sqrt() * bracket)
}

pub fn j_gamma<T: Real>(gamma: T, mode: JMode) -> Result<T> {
    match mode {
        JMode::Quadrature => j_gamma_quadrature(gamma),
        JMode::Approx => j_gamma_approx(gamma),
    }
}

/// `(I_h, P_h)` at `h`.
pub fn information_matrices<T: Real>(
    h: &[Complex<T>],
    ctx: &LikelihoodContext<T>,
    mode: JMode,
    form: InformationForm,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let mu = ctx.means(h)?;
    let s2 = ctx.noise_variance;
    let s4 = s2 * s2;
    let weight = match form {
        InformationForm::Score => T::one(),
        InformationForm::Uncentered => lit(4.0),
    };
    let mut w_abs = Vec::with_capacity(mu.len());
    let mut w_sq = Vec::with_capacity(mu.len());
    for (index, m) in mu.iter().enumerate() {
        let p = m.norm_sqr();
        if !(p > T::zero()) {
            return Err(Error::DegenerateMean { index, modulus: 0.0 });
        }
        let c = weight * (j_gamma(p / s2, mode)? - T::one()) / s4;
        w_abs.push(c * p);
        w_sq.push((m * m).scale(c));
    }
    let a = &ctx.basis;
    let n = ctx.n_subcarriers();
    let scaled_abs = CMatrix::from_fn(mu.len(), n, |l, k| a[(l, k)].scale(w_abs[l]));
    let scaled_sq = CMatrix::from_fn(mu.len(), n, |l, k| a[(l, k)].conj() * w_sq[l]);
    let a_h = a.adjoint();
    let mut info = a_h.matmul(&scaled_abs);
    let mut pseudo = a_h.matmul(&scaled_sq);
    if form == InformationForm::Uncentered {
        let v = a_h.mul_vec(&mu);
        for i in 0..n {
            for j in 0..n {
                info[(i, j)] += (v[i] * v[j].conj()).unscale(s4);
                pseudo[(i, j)] += (v[i] * v[j]).unscale(s4);
            }
        }
    }
    let half = Complex::new(lit::<T>(0.5), T::zero());
    let info = info.add(&info.adjoint()).scale(half);
    let pseudo = pseudo.add(&pseudo.transpose()).scale(half);
    Ok((info, pseudo))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrlbReport<T> {
    pub info_matrix: CMatrix<T>,
    pub pseudo_info: CMatrix<T>,
    /// Inverse of `[[I_h, P_h], [P_h*, I_h*]]`.
    pub bound_matrix: CMatrix<T>,
    /// `R_h = I_h − P_h (I_h⁻¹)* P_h*`
    pub schur: CMatrix<T>,
    /// `R_h⁻¹`, the bound on `Cov(ĥ)`.
    pub schur_inverse: CMatrix<T>,
    pub nmse_floor_db: Option<T>,
}

fn checked_inverse<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let inv = match m.inverse() {
        Ok(inv) => inv,
        Err(Error::Singular) => return Err(Error::SingularInformation { condition: f64::INFINITY }),
        Err(e) => return Err(e),
    };
    let condition = crate::to_f64(m.norm1() * inv.norm1());
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularInformation { condition });
    }
    Ok(inv)
}

/// Block inversion of the augmented information matrix.
pub fn crlb_matrix<T: Real>(info: &CMatrix<T>, pseudo: &CMatrix<T>) -> Result<CrlbReport<T>> {
    let info_inv = checked_inverse(info)?;
    let q = pseudo.matmul(&info_inv.conj());
    let schur = info.sub(&q.matmul(&pseudo.conj()));
    let r_inv = checked_inverse(&schur)?;
    let minus = Complex::new(-T::one(), T::zero());
    let top_right = r_inv.matmul(&q).scale(minus);
    let bottom_left = q.adjoint().matmul(&r_inv).scale(minus);
    let bound_matrix = CMatrix::from_blocks(&r_inv, &top_right, &bottom_left, &r_inv.conj());
    Ok(CrlbReport {
        info_matrix: info.clone(),
        pseudo_info: pseudo.clone(),
        bound_matrix,
        schur,
        schur_inverse: r_inv,
        nmse_floor_db: None,
    })
}

/// `10 log10(tr ℜR_h⁻¹ / ‖h‖²)`
pub fn crlb_nmse_floor<T: Real>(report: &CrlbReport<T>, h_true: &[Complex<T>]) -> Result<T> {
    let power = crate::norm_sqr(h_true);
    if !(power > T::zero()) {
        return Err(Error::ZeroChannel);
    }
    let trace = report.schur_inverse.trace().re;
    Ok(lit::<T>(10.0) * (trace / power).log10())
}

/// Information, bound and NMSE floor at the true channel.
pub fn bound_for<T: Real>(
    h_true: &[Complex<T>],
    ctx: &LikelihoodContext<T>,
    mode: JMode,
    form: InformationForm,
) -> Result<CrlbReport<T>> {
    let (info, pseudo) = information_matrices(h_true, ctx, mode, form)?;
    let mut report = crlb_matrix(&info, &pseudo)?;
    report.nmse_floor_db = Some(crlb_nmse_floor(&report, h_true)?);
    Ok(report)
}
