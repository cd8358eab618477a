//! Maximum-likelihood channel estimation from intensities.
//!
//! Each intensity `E_l` is `σ²/2` times a non-central chi-squared variable
//! with two degrees of freedom about `μ_l = E_r(t_l) + Φ(t_l)ᵀh`, so
//!
//! ```text
//! F(h) = Σ_l [ln I0(z_l) − (E_l + |μ_l|²)/σ²] − L ln σ²,   z_l = 2√E_l |μ_l| / σ².
//! ```
//!
//! `F` is maximised with a Newton method in Wirtinger coordinates `(h, h*)`
//! and Armijo backtracking.

use num_complex::Complex;
use num_traits::Zero;

use crate::channel::FrequencyGrid;
use crate::estimate::{Estimate, Termination};
use crate::holography::{HologramRecord, ReferenceWave};
use crate::linalg::CMatrix;
use crate::specfun::{bessel_ratio, log_bessel_i0};
use crate::{lit, Error, Real, Result};

/// Intensities, sampling instants and the quantities `μ_l` depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodContext<T> {
    pub intensities: Vec<T>,
    pub times: Vec<T>,
    pub reference_values: Vec<Complex<T>>,
    /// Row `l` is `Φ(t_l)ᵀ`, so the matrix is `L_tot × N_f`.
    pub basis: CMatrix<T>,
    pub noise_variance: T,
    pub reference_amplitude: T,
}

impl<T: Real> LikelihoodContext<T> {
    pub fn new(
        intensities: Vec<T>,
        times: Vec<T>,
        reference: &ReferenceWave<T>,
        grid: &FrequencyGrid<T>,
        noise_variance: T,
    ) -> Result<Self> {
        if intensities.is_empty() {
            return Err(Error::invalid("intensities", "at least one sample required"));
        }
        if intensities.len() != times.len() {
            return Err(Error::LengthMismatch {
                what: "sample times",
                expected: intensities.len(),
                found: times.len(),
            });
        }
        if !(noise_variance > T::zero() && noise_variance.is_finite()) {
            return Err(Error::invalid("noise_variance", "must be positive and finite"));
        }
        if let Some(&bad) = intensities.iter().find(|e| !(**e >= T::zero() && e.is_finite())) {
            return Err(Error::Domain {
                what: "intensity",
                value: crate::to_f64(bad),
            });
        }
        let reference_values = times.iter().map(|&t| reference.value(t)).collect();
        let rows: Vec<_> = times.iter().map(|&t| grid.basis(t)).collect();
        let basis = CMatrix::from_fn(times.len(), grid.n_subcarriers, |l, k| rows[l][k]);
        Ok(Self {
            intensities,
            times,
            reference_values,
            basis,
            noise_variance,
            reference_amplitude: reference.amplitude,
        })
    }

    pub fn from_record(
        record: &HologramRecord<T>,
        reference: &ReferenceWave<T>,
        grid: &FrequencyGrid<T>,
        noise_variance: T,
    ) -> Result<Self> {
        Self::new(
            record.intensities.clone(),
            record.times.clone(),
            reference,
            grid,
            noise_variance,
        )
    }

    pub fn n_samples(&self) -> usize {
        self.intensities.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.basis.cols()
    }

    /// `μ_l = E_r(t_l) + Φ(t_l)ᵀh` for every sample.
    pub fn means(&self, h: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(h)?;
        Ok(self
            .basis
            .mul_vec(h)
            .into_iter()
            .zip(&self.reference_values)
            .map(|(a, r)| a + r)
            .collect())
    }

    /// Smallest `|μ_l|` the derivatives accept.
    pub fn mean_tolerance(&self) -> T {
        T::epsilon() * self.reference_amplitude
    }

    fn check_len(&self, h: &[Complex<T>]) -> Result<()> {
        if h.len() != self.n_subcarriers() {
            return Err(Error::LengthMismatch {
                what: "channel vector",
                expected: self.n_subcarriers(),
                found: h.len(),
            });
        }
        Ok(())
    }

    fn nondegenerate_means(&self, h: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let mu = self.means(h)?;
        let tol = self.mean_tolerance();
        if let Some((index, m)) = mu.iter().enumerate().find(|(_, m)| !(m.norm() > tol)) {
            return Err(Error::DegenerateMean {
                index,
                modulus: crate::to_f64(m.norm()),
            });
        }
        Ok(mu)
    }

    fn z(&self, e: T, mu_abs: T) -> T {
        lit::<T>(2.0) * e.sqrt() * mu_abs / self.noise_variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub armijo_alpha: T,
    pub reduction: T,
    pub max_iterations: usize,
    pub gradient_tolerance: T,
    pub step_tolerance: T,
    pub hessian_damping: T,
    pub max_reductions: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            armijo_alpha: lit(0.25),
            reduction: lit(0.5),
            max_iterations: 100,
            gradient_tolerance: lit(1e-6),
            step_tolerance: lit(1e-8),
            hessian_damping: T::zero(),
            max_reductions: 60,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.armijo_alpha > T::zero() && self.armijo_alpha < lit(0.5)) {
            return Err(Error::invalid("armijo_alpha", "must lie in (0, 0.5)"));
        }
        if !(self.reduction > T::zero() && self.reduction < T::one()) {
            return Err(Error::invalid("reduction", "must lie in (0, 1)"));
        }
        if !(self.gradient_tolerance >= T::zero() && self.step_tolerance >= T::zero()) {
            return Err(Error::invalid("tolerance", "must be nonnegative"));
        }
        if !(self.hessian_damping >= T::zero()) {
            return Err(Error::invalid("hessian_damping", "must be nonnegative"));
        }
        Ok(())
    }
}

/// `F(h)`.
pub fn log_likelihood<T: Real>(h: &[Complex<T>], ctx: &LikelihoodContext<T>) -> Result<T> {
    let mu = ctx.means(h)?;
    let s2 = ctx.noise_variance;
    let mut f = T::zero();
    for (e, m) in ctx.intensities.iter().zip(&mu) {
        let z = ctx.z(*e, m.norm());
        f += log_bessel_i0(z)? - (*e + m.norm_sqr()) / s2;
    }
    Ok(f - lit::<T>(ctx.n_samples() as f64) * s2.ln())
}

/// `∇_{h*}F = Φ* R₁ μ` with `R₁ = diag{(√E_l R(z_l)/|μ_l| − 1)/σ²}`.
pub fn wirtinger_gradient<T: Real>(h: &[Complex<T>], ctx: &LikelihoodContext<T>) -> Result<Vec<Complex<T>>> {
    let mu = ctx.nondegenerate_means(h)?;
    gradient_from_means(ctx, &mu)
}

fn gradient_from_means<T: Real>(ctx: &LikelihoodContext<T>, mu: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let s2 = ctx.noise_variance;
    let mut g = vec![Complex::zero(); ctx.n_subcarriers()];
    for (l, (e, m)) in ctx.intensities.iter().zip(mu).enumerate() {
        let a = m.norm();
        let r = bessel_ratio(ctx.z(*e, a))?;
        let w = m.scale((e.sqrt() * r / a - T::one()) / s2);
        for (gk, phi) in g.iter_mut().zip(ctx.basis.row(l)) {
            *gk += phi.conj() * w;
        }
    }
    Ok(g)
}

/// The four `N_f × N_f` second-derivative blocks, named by the order of
/// differentiation: `h_conj_h = ∂/∂hᵀ (∂F/∂h*)` and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks<T> {
    /// `H_{h,h} = Φ R₃ Φᵀ`
    pub h_h: CMatrix<T>,
    /// `H_{h,h*} = Φ R₂ Φᴴ`
    pub h_hconj: CMatrix<T>,
    /// `H_{h*,h} = Φ* R₂ Φᵀ`
    pub hconj_h: CMatrix<T>,
    /// `H_{h*,h*} = Φ* R₃* Φᴴ`
    pub hconj_hconj: CMatrix<T>,
}

/// Hessian blocks with `R₂ = diag{(E_l − E_l R² − σ²)/σ⁴}` and
/// `R₃ = diag{(z² − z²R² − 2zR)/(4μ_l²)}`.
pub fn hessian_blocks<T: Real>(h: &[Complex<T>], ctx: &LikelihoodContext<T>) -> Result<HessianBlocks<T>> {
    let mu = ctx.nondegenerate_means(h)?;
    hessian_from_means(ctx, &mu)
}

fn hessian_from_means<T: Real>(ctx: &LikelihoodContext<T>, mu: &[Complex<T>]) -> Result<HessianBlocks<T>> {
    let s2 = ctx.noise_variance;
    let s4 = s2 * s2;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let phi = &ctx.basis;
    let n = ctx.n_subcarriers();
    let mut r2 = Vec::with_capacity(mu.len());
    let mut r3 = Vec::with_capacity(mu.len());
    for (e, m) in ctx.intensities.iter().zip(mu) {
        let z = ctx.z(*e, m.norm());
        let r = bessel_ratio(z)?;
        r2.push((*e - *e * r * r - s2) / s4);
        let num = z * z - z * z * r * r - two * z * r;
        r3.push(Complex::new(num, T::zero()) / (m * m).scale(four));
    }
    let weighted2 = CMatrix::from_fn(mu.len(), n, |l, k| phi[(l, k)].scale(r2[l]));
    let weighted3 = CMatrix::from_fn(mu.len(), n, |l, k| phi[(l, k)] * r3[l]);
    let hconj_h = phi.adjoint().matmul(&weighted2);
    let h_h = phi.transpose().matmul(&weighted3);
    Ok(HessianBlocks {
        h_hconj: hconj_h.conj(),
        hconj_hconj: h_h.conj(),
        h_h,
        hconj_h,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep<T> {
    pub step: Vec<Complex<T>>,
    /// Damping that made the augmented system solvable.
    pub damping: T,
    /// The Newton direction was not an ascent direction and the gradient was used.
    pub gradient_fallback: bool,
}

const DAMPING_RETRIES: usize = 6;

/// Solves
///
/// ```text
/// [H_{h*,h}  H_{h*,h*}] [Δh ]     [∇_{h*}F]
/// [H_{h,h}   H_{h,h*} ] [Δh*] = − [∇_h F  ]
/// ```
///
/// shifted by `−λI`, and symmetrises the solution into one `Δh`.
pub fn newton_step<T: Real>(gradient: &[Complex<T>], blocks: &HessianBlocks<T>, damping: T) -> Result<NewtonStep<T>> {
    let n = gradient.len();
    if blocks.hconj_h.rows() != n {
        return Err(Error::LengthMismatch {
            what: "Hessian blocks",
            expected: n,
            found: blocks.hconj_h.rows(),
        });
    }
    if gradient.iter().all(|g| g.is_zero()) {
        return Ok(NewtonStep {
            step: vec![Complex::zero(); n],
            damping,
            gradient_fallback: false,
        });
    }
    let aug = CMatrix::from_blocks(&blocks.hconj_h, &blocks.hconj_hconj, &blocks.h_h, &blocks.h_hconj);
    let rhs: Vec<_> = gradient.iter().map(|g| -g).chain(gradient.iter().map(|g| -g.conj())).collect();
    let mut scale = aug.trace().norm() / lit(2.0 * n as f64);
    if !(scale > T::zero()) {
        scale = aug.max_abs();
    }
    if !(scale > T::zero()) {
        scale = T::one();
    }

    let mut lambda = damping;
    let mut attempt = 0;
    let solution = loop {
        let shifted = if lambda > T::zero() {
            aug.sub(&CMatrix::identity(2 * n).scale(Complex::new(lambda, T::zero())))
        } else {
            aug.clone()
        };
        match shifted.lu() {
            Ok(lu) => break lu.solve(&rhs),
            Err(Error::Singular) if attempt < DAMPING_RETRIES => {
                lambda = if lambda > T::zero() {
                    lambda * lit(10.0)
                } else {
                    scale * lit(1e-8)
                };
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let step: Vec<_> = (0..n)
        .map(|k| (solution[k] + solution[n + k].conj()).scale(lit(0.5)))
        .collect();
    if ascent_slope(gradient, &step) > T::zero() {
        Ok(NewtonStep {
            step,
            damping: lambda,
            gradient_fallback: false,
        })
    } else {
        Ok(NewtonStep {
            step: gradient.to_vec(),
            damping: lambda,
            gradient_fallback: true,
        })
    }
}

/// `D = 2ℜ(∇_{h*}Fᴴ Δh)`, the directional derivative of `F` along `Δh`.
pub fn ascent_slope<T: Real>(gradient: &[Complex<T>], step: &[Complex<T>]) -> T {
    let dot = gradient
        .iter()
        .zip(step)
        .fold(Complex::zero(), |acc: Complex<T>, (g, d)| acc + g.conj() * d);
    lit::<T>(2.0) * dot.re
}

/// First `q = βᵏ`, `k = 0..=max_reductions`, with
/// `objective(q) ≥ f0 + α q slope`; zero if none qualifies. `objective`
/// returning `None` counts as a failed trial.
pub fn backtrack<T: Real>(
    f0: T,
    slope: T,
    alpha: T,
    beta: T,
    max_reductions: usize,
    mut objective: impl FnMut(T) -> Option<T>,
) -> T {
    let mut q = T::one();
    for _ in 0..=max_reductions {
        if let Some(f) = objective(q) {
            if f >= f0 + alpha * q * slope {
                return q;
            }
        }
        q *= beta;
    }
    T::zero()
}

/// Armijo step length for moving `h` along `step`; zero signals stagnation.
pub fn armijo_search<T: Real>(
    h: &[Complex<T>],
    step: &[Complex<T>],
    gradient: &[Complex<T>],
    f0: T,
    ctx: &LikelihoodContext<T>,
    opts: &SolverOptions<T>,
) -> Result<T> {
    let slope = ascent_slope(gradient, step);
    if !(slope > T::zero()) {
        return Err(Error::NotAscent {
            slope: crate::to_f64(slope),
        });
    }
    let mut trial = h.to_vec();
    Ok(backtrack(f0, slope, opts.armijo_alpha, opts.reduction, opts.max_reductions, |q| {
        for ((t, x), d) in trial.iter_mut().zip(h).zip(step) {
            *t = x + d.scale(q);
        }
        log_likelihood(&trial, ctx).ok().filter(|f| f.is_finite())
    }))
}

const PERTURB_RETRIES: usize = 8;

/// Moves `h` off samples where `μ_l` vanishes, along `Φ(t_l)*`.
fn perturb_off_degenerate<T: Real>(h: &mut [Complex<T>], ctx: &LikelihoodContext<T>) -> Result<Vec<Complex<T>>> {
    let eps = lit::<T>(1e-9) * ctx.reference_amplitude;
    let mut attempt = 0;
    loop {
        match ctx.nondegenerate_means(h) {
            Ok(mu) => return Ok(mu),
            Err(Error::DegenerateMean { index, .. }) if attempt < PERTURB_RETRIES => {
                for (x, phi) in h.iter_mut().zip(ctx.basis.row(index)) {
                    *x += phi.conj().scale(eps);
                }
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Newton–Armijo maximisation of `F` from `init`.
pub fn whml_estimate<T: Real>(
    init: &[Complex<T>],
    ctx: &LikelihoodContext<T>,
    opts: &SolverOptions<T>,
) -> Result<Estimate<T>> {
    opts.validate()?;
    ctx.check_len(init)?;
    let mut h = init.to_vec();
    let mut mu = perturb_off_degenerate(&mut h, ctx)?;
    let mut f = log_likelihood(&h, ctx)?;
    let mut history = vec![f];
    let mut iterations = 0;
    let termination = loop {
        let g = gradient_from_means(ctx, &mu)?;
        if crate::norm(&g) < opts.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break Termination::MaxIterations;
        }
        let blocks = hessian_from_means(ctx, &mu)?;
        let direction = newton_step(&g, &blocks, opts.hessian_damping)?;
        let q = armijo_search(&h, &direction.step, &g, f, ctx, opts)?;
        if q == T::zero() {
            break Termination::Stagnated;
        }
        let mut moved = T::zero();
        for (x, d) in h.iter_mut().zip(&direction.step) {
            let dx = d.scale(q);
            moved += dx.norm_sqr();
            *x += dx;
        }
        iterations += 1;
        f = log_likelihood(&h, ctx)?;
        history.push(f);
        if moved.sqrt() / crate::norm(&h).max(T::one()) < opts.step_tolerance {
            break Termination::StepTolerance;
        }
        mu = match ctx.nondegenerate_means(&h) {
            Ok(mu) => mu,
            Err(Error::DegenerateMean { .. }) => {
                let mu = perturb_off_degenerate(&mut h, ctx)?;
                f = log_likelihood(&h, ctx)?;
                mu
            }
            Err(e) => return Err(e),
        };
    };
    log::debug!("whml stopped after {iterations} iterations: {termination:?}");
    let mut est = Estimate::new(h);
    est.diagnostics.iterations = iterations;
    est.diagnostics.log_likelihood = Some(f);
    est.diagnostics.termination = Some(termination);
    est.diagnostics.history = history;
    Ok(est)
}
