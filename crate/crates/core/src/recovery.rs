//! Object-wave recovery from two intensities one symbol apart.
//!
//! With `z = E_o(t) e^{-j2πf_r t}` the pair reads `E1 = |A_r + z|²` and
//! `E2 = |A_r e^{jδ} + z|²`, two circles in the `z` plane. Both closed forms
//! below pick the intersection nearer the origin, which is the true object
//! wave whenever `|E_o| < A_r |cos(δ/2)|`.

use num_complex::Complex;

use crate::holography::ReferenceWave;
use crate::{cis, lit, Error, Real, Result};

/// Phase steps with `|sin δ|` below this are rejected.
pub const MIN_SIN_DELTA: f64 = 1e-6;
/// Relative amount by which a discriminant or radicand may dip below zero
/// before the pair is reported as inconsistent.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryContext<T> {
    pub reference: ReferenceWave<T>,
    cos_delta: T,
    sin_delta: T,
}

/// A recovered sample and whether a slightly negative discriminant or
/// radicand was set to zero to obtain it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovered<T> {
    pub value: Complex<T>,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryMethod {
    Quadratic,
    #[default]
    Geometric,
}

impl<T: Real> RecoveryContext<T> {
    pub fn new(reference: ReferenceWave<T>) -> Result<Self> {
        let delta = reference.phase_step();
        let (sin_delta, cos_delta) = delta.sin_cos();
        if !(sin_delta.abs() > lit(MIN_SIN_DELTA)) {
            return Err(Error::IllConditionedDelta {
                sin_delta: crate::to_f64(sin_delta),
            });
        }
        Ok(Self {
            reference,
            cos_delta,
            sin_delta,
        })
    }

    pub fn amplitude(&self) -> T {
        self.reference.amplitude
    }

    pub fn delta(&self) -> T {
        self.reference.phase_step()
    }

    /// Largest object-wave modulus the recovery returns exactly.
    pub fn exact_radius(&self) -> T {
        self.amplitude() * (self.delta() / lit(2.0)).cos().abs()
    }

    pub fn recover(&self, method: RecoveryMethod, e1: T, e2: T, t: T) -> Result<Complex<T>> {
        match method {
            RecoveryMethod::Quadratic => recover_quadratic(self, e1, e2, t),
            RecoveryMethod::Geometric => recover_geometric(self, e1, e2, t),
        }
    }
}

fn check_intensities<T: Real>(e1: T, e2: T) -> Result<()> {
    for e in [e1, e2] {
        if !(e >= T::zero() && e.is_finite()) {
            return Err(Error::Domain {
                what: "intensity",
                value: crate::to_f64(e),
            });
        }
    }
    Ok(())
}

/// Heron-type product `((r1+r2)² − q²)(q² − (r1−r2)²)` for circles of radii
/// `√e1`, `√e2` whose centres are `q` apart, evaluated in factored form.
fn circle_product<T: Real>(e1: T, e2: T, q: T) -> T {
    let (r1, r2) = (e1.sqrt(), e2.sqrt());
    (r1 + r2 - q) * (r1 + r2 + q) * (q - r1 + r2) * (q + r1 - r2)
}

fn centre_distance<T: Real>(ctx: &RecoveryContext<T>) -> T {
    lit::<T>(2.0) * (ctx.delta() / lit(2.0)).sin().abs() * ctx.amplitude()
}

/// Solves `u'b² + v'b + w' = 0` for `b = A_r² + |z|²` and reads off `z`.
/// The discriminant `v'² − 4u'w'` equals `4 sin²δ` times the circle product.
/// With `strict` a discriminant below `-tol·v'²` is an error, otherwise any
/// negative discriminant is set to zero.
pub(crate) fn quadratic<T: Real>(ctx: &RecoveryContext<T>, e1: T, e2: T, t: T, strict: bool) -> Result<Recovered<T>> {
    check_intensities(e1, e2)?;
    let (c, s) = (ctx.cos_delta, ctx.sin_delta);
    let a = ctx.amplitude();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let one_minus_c = T::one() - c;
    let v = -two * one_minus_c * (e1 + e2) - four * a * a * s * s;
    let w = e1 * e1 + e2 * e2 - two * e1 * e2 * c + four * a.powi(4) * s * s;
    let mut disc = four * s * s * circle_product(e1, e2, centre_distance(ctx));
    let mut clamped = false;
    if disc < T::zero() {
        if strict && disc < -lit::<T>(CLAMP_TOLERANCE) * v * v {
            return Err(Error::InconsistentIntensities {
                discriminant: crate::to_f64(disc),
            });
        }
        disc = T::zero();
        clamped = true;
    }
    // Smaller root, written without cancellation (v' < 0, w' > 0).
    let b = two * w / (-v + disc.sqrt());
    let re = (e1 - b) / (two * a);
    let im = (e2 - e1 * c - one_minus_c * b) / (two * a * s);
    let value = Complex::new(re, im) * cis(T::TAU() * ctx.reference.cycles(t));
    Ok(Recovered { value, clamped })
}

/// Intersects the two circles geometrically and keeps the candidate with the
/// smaller modulus.
pub(crate) fn geometric<T: Real>(ctx: &RecoveryContext<T>, e1: T, e2: T, t: T, strict: bool) -> Result<Recovered<T>> {
    check_intensities(e1, e2)?;
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let delta = ctx.delta();
    let q = centre_distance(ctx);
    let q2 = q * q;
    let s1 = (e1 - e2) / (two * q2);
    let mut radicand = circle_product(e1, e2, q) / (four * q2 * q2);
    let mut clamped = false;
    if radicand < T::zero() {
        if strict && radicand < -lit::<T>(CLAMP_TOLERANCE) {
            return Err(Error::CirclesDisjoint {
                radicand: crate::to_f64(radicand),
            });
        }
        radicand = T::zero();
        clamped = true;
    }
    let s2 = radicand.sqrt();
    let step = cis(delta);
    let one = Complex::new(T::one(), T::zero());
    let half = (step + one).scale(lit(0.5));
    let reference = ctx.reference.value(t);
    let plus = ((one - step) * Complex::new(s1, -s2) - half) * reference;
    let minus = ((one - step) * Complex::new(s1, s2) - half) * reference;
    let value = if plus.norm_sqr() <= minus.norm_sqr() { plus } else { minus };
    Ok(Recovered { value, clamped })
}

/// Quadratic-form recovery of `E_o(t)` from `(E_I(t), E_I(t + T_s))`.
pub fn recover_quadratic<T: Real>(ctx: &RecoveryContext<T>, e1: T, e2: T, t: T) -> Result<Complex<T>> {
    quadratic(ctx, e1, e2, t, true).map(|r| r.value)
}

/// Circle-intersection recovery of `E_o(t)` from `(E_I(t), E_I(t + T_s))`.
pub fn recover_geometric<T: Real>(ctx: &RecoveryContext<T>, e1: T, e2: T, t: T) -> Result<Complex<T>> {
    geometric(ctx, e1, e2, t, true).map(|r| r.value)
}

/// Recovery that never fails on noisy pairs: a negative discriminant or
/// radicand is set to zero and reported.
pub fn recover_clamped<T: Real>(
    ctx: &RecoveryContext<T>,
    method: RecoveryMethod,
    e1: T,
    e2: T,
    t: T,
) -> Result<Recovered<T>> {
    match method {
        RecoveryMethod::Quadratic => quadratic(ctx, e1, e2, t, false),
        RecoveryMethod::Geometric => geometric(ctx, e1, e2, t, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FrequencyGrid;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ctx(amplitude: f64, delta: f64) -> RecoveryContext<f64> {
        let g = FrequencyGrid::from_spacing(3.5e9, 30e3, 8).unwrap();
        RecoveryContext::new(ReferenceWave::from_phase_step(amplitude, &g, delta).unwrap()).unwrap()
    }

    fn pair(c: &RecoveryContext<f64>, eo: Complex<f64>, t: f64) -> (f64, f64) {
        // E_o(t + T_s) differs from E_o(t) by the carrier rotation only.
        let ts = c.reference.symbol_period;
        let rot = Complex::from_polar(1.0, 2.0 * PI * (c.reference.carrier_hz * ts).fract());
        let e1 = (c.reference.value(t) + eo).norm_sqr();
        let e2 = (c.reference.value(t + ts) + eo * rot).norm_sqr();
        (e1, e2)
    }

    #[test]
    fn worked_example_at_quarter_step() {
        let c = ctx(2.0, FRAC_PI_2);
        let eo = Complex::new(0.4, -0.3);
        let (e1, e2) = pair(&c, eo, 0.0);
        assert!((e1 - 5.85).abs() < 1e-12);
        assert!((recover_quadratic(&c, e1, e2, 0.0).unwrap() - eo).norm() < 1e-12);
        assert!((recover_geometric(&c, e1, e2, 0.0).unwrap() - eo).norm() < 1e-12);
    }

    #[test]
    fn zero_object_wave() {
        let c = ctx(1.5, FRAC_PI_2);
        let (e1, e2) = pair(&c, Complex::new(0.0, 0.0), 1e-5);
        assert!(recover_quadratic(&c, e1, e2, 1e-5).unwrap().norm() < 1e-12);
        assert!(recover_geometric(&c, e1, e2, 1e-5).unwrap().norm() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_step_and_bad_input() {
        let g = FrequencyGrid::from_spacing(3.5e9, 30e3, 8).unwrap();
        for d in [0.0, PI, 2.0 * PI] {
            let r = ReferenceWave::from_phase_step(1.0, &g, d).unwrap();
            assert!(matches!(RecoveryContext::new(r), Err(Error::IllConditionedDelta { .. })));
        }
        let c = ctx(1.0, FRAC_PI_2);
        assert!(recover_quadratic(&c, -1.0, 1.0, 0.0).is_err());
        assert!(recover_geometric(&c, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn inconsistent_pairs_are_reported_or_clamped() {
        let c = ctx(1.0, FRAC_PI_2);
        // Circles of radius 0.1 about 1 and j cannot meet.
        let (e1, e2) = (0.01, 0.01);
        assert!(matches!(recover_geometric(&c, e1, e2, 0.0), Err(Error::CirclesDisjoint { .. })));
        assert!(matches!(recover_quadratic(&c, e1, e2, 0.0), Err(Error::InconsistentIntensities { .. })));
        for m in [RecoveryMethod::Quadratic, RecoveryMethod::Geometric] {
            let r = recover_clamped(&c, m, e1, e2, 0.0).unwrap();
            assert!(r.clamped);
            assert!(r.value.is_finite());
        }
    }

    #[test]
    fn fails_outside_exact_radius() {
        // Beyond A_r cos(δ/2) the far intersection is the truth.
        let c = ctx(1.0, FRAC_PI_2);
        let eo = Complex::new(-0.9, -0.9);
        assert!(eo.norm() > c.exact_radius());
        let (e1, e2) = pair(&c, eo, 0.0);
        assert!((recover_geometric(&c, e1, e2, 0.0).unwrap() - eo).norm() > 1e-3);
    }

    #[test]
    fn single_precision() {
        let g = FrequencyGrid::<f32>::from_spacing(3.5e9, 30e3, 8).unwrap();
        let r = ReferenceWave::from_phase_step(2.0f32, &g, std::f32::consts::FRAC_PI_2).unwrap();
        let c = RecoveryContext::new(r).unwrap();
        let eo = Complex::new(0.4f32, -0.3);
        let e1 = (c.reference.value(0.0) + eo).norm_sqr();
        let rot = Complex::from_polar(1.0f32, std::f32::consts::TAU * (3.5e9f32 * g.symbol_period).fract());
        let e2 = (c.reference.value(g.symbol_period) + eo * rot).norm_sqr();
        assert!((recover_quadratic(&c, e1, e2, 0.0).unwrap() - eo).norm() < 1e-3);
        assert!((recover_geometric(&c, e1, e2, 0.0).unwrap() - eo).norm() < 1e-3);
    }

    #[test]
    fn nearly_opposite_references_agree() {
        for delta in [PI - 1e-3, PI + 2e-3, PI - 0.05] {
            let c = ctx(3.0, delta);
            for frac in [0.1, 0.5, 0.9, 0.99] {
                let eo = Complex::from_polar(frac * c.exact_radius(), 0.7);
                let (e1, e2) = pair(&c, eo, 1e-6);
                let q = recover_quadratic(&c, e1, e2, 1e-6).unwrap();
                let g = recover_geometric(&c, e1, e2, 1e-6).unwrap();
                assert!((q - g).norm() < 1e-10, "delta {delta} frac {frac}: {q} vs {g}");
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip_inside_exact_radius(
            amplitude in 0.5f64..5.0,
            delta in 0.3f64..2.8,
            frac in 0.0f64..0.95,
            phase in -PI..PI,
            t in 0.0f64..3e-5,
        ) {
            let c = ctx(amplitude, delta);
            let eo = Complex::from_polar(frac * c.exact_radius(), phase);
            let (e1, e2) = pair(&c, eo, t);
            let q = recover_quadratic(&c, e1, e2, t).unwrap();
            let g = recover_geometric(&c, e1, e2, t).unwrap();
            let tol = 1e-7 * amplitude;
            prop_assert!((q - eo).norm() < tol, "quadratic {} vs {}", q, eo);
            prop_assert!((g - eo).norm() < tol, "geometric {} vs {}", g, eo);
        }
    }
}
