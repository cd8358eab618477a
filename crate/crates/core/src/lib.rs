//! Intensity-only wideband channel sensing.
//!
//! A planar array records only the power of the superposition of a locally
//! generated reference sinusoid and the multi-subcarrier signal arriving from a
//! user. This crate synthesises such channels and recordings, and estimates the
//! per-subcarrier channel coefficients of every array unit from the intensities:
//!
//! * [`recovery`] inverts two intensity samples one symbol apart into the
//!   complex object wave (two equivalent closed forms).
//! * [`grows`] chains that recovery over a symbol, derotates and extracts the
//!   channel with an L-point DFT.
//! * [`whml`] maximises the non-central chi-squared likelihood with a complex
//!   (Wirtinger) Newton method and Armijo backtracking.
//! * [`crlb`] assembles the complex Cramér–Rao bound.
//! * [`harness`] runs seeded Monte Carlo sweeps and writes CSV.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the simulation harness uses.

pub mod channel;
pub mod crlb;
mod error;
pub mod estimate;
pub mod grows;
pub mod harness;
pub mod holography;
pub mod linalg;
pub mod recovery;
pub mod specfun;
pub mod whml;

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub use error::{Error, Result};

/// Scalar type the numerical core is written against.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + rustfft::FftNum
    + Default
    + fmt::Display
    + fmt::LowerExp
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + rustfft::FftNum
        + Default
        + fmt::Display
        + fmt::LowerExp
{
}

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;

pub type ArrayGeometry = channel::ArrayGeometry<f64>;
pub type FrequencyGrid = channel::FrequencyGrid<f64>;
pub type Path = channel::Path<f64>;
pub type PathSet = channel::PathSet<f64>;
pub type ChannelSnapshot = channel::ChannelSnapshot<f64>;
pub type ReferenceWave = holography::ReferenceWave<f64>;
pub type HologramRecord = holography::HologramRecord<f64>;
pub type RecoveryContext = recovery::RecoveryContext<f64>;
pub type GrowsSettings = grows::GrowsSettings<f64>;
pub type LikelihoodContext = whml::LikelihoodContext<f64>;
pub type SolverOptions = whml::SolverOptions<f64>;
pub type Estimate = estimate::Estimate<f64>;
pub type CrlbReport = crlb::CrlbReport<f64>;
pub type CMatrix = linalg::CMatrix<f64>;

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a scalar to `f64` for error reporting.
#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `e^{jθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

/// `e^{j2πx}` with the integer part of `x` discarded first, so that large
/// cycle counts (carrier frequency times time) keep their fractional accuracy.
#[inline]
pub(crate) fn cis_cycles<T: Real>(cycles: T) -> Complex<T> {
    cis(T::TAU() * cycles.fract())
}

pub(crate) fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

pub(crate) fn norm<T: Real>(v: &[Complex<T>]) -> T {
    norm_sqr(v).sqrt()
}
