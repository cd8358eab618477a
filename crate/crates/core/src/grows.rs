//! Per-unit channel estimation from one symbol of intensity pairs.
//!
//! Each pair `(E_I(t_l), E_I(t_l + T_s))` yields `Ê_o(t_l)`. Removing the
//! common rotation `e^{j2π(f_c T_s − 1)l/L}` leaves `Σ_k h_k e^{j2πkl/L}`, whose
//! `L`-point DFT puts `L·h_k` in bin `k mod L`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::channel::FrequencyGrid;
use crate::estimate::Estimate;
use crate::holography::HologramRecord;
use crate::recovery::{recover_clamped, RecoveryContext, RecoveryMethod};
use crate::{cis_cycles, lit, Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowsSettings<T> {
    pub samples_per_symbol: usize,
    pub method: RecoveryMethod,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> GrowsSettings<T> {
    pub fn new(samples_per_symbol: usize, n_subcarriers: usize) -> Result<Self> {
        if samples_per_symbol < n_subcarriers || samples_per_symbol == 0 {
            return Err(Error::TooFewSamples {
                samples: samples_per_symbol,
                subcarriers: n_subcarriers,
            });
        }
        Ok(Self {
            samples_per_symbol,
            method: RecoveryMethod::default(),
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn with_method(mut self, method: RecoveryMethod) -> Self {
        self.method = method;
        self
    }
}

/// `Ê_o(t_l)` for `l < L` and the number of clamped recoveries.
pub fn recover_sequence<T: Real>(
    ctx: &RecoveryContext<T>,
    record: &HologramRecord<T>,
    method: RecoveryMethod,
) -> Result<(Vec<Complex<T>>, usize)> {
    let l_count = record.samples_per_symbol;
    if record.len() != 2 * l_count {
        return Err(Error::LengthMismatch {
            what: "hologram record",
            expected: 2 * l_count,
            found: record.len(),
        });
    }
    let mut clamps = 0;
    let mut out = Vec::with_capacity(l_count);
    for l in 0..l_count {
        let (e1, e2) = record.pair(l);
        let r = recover_clamped(ctx, method, e1, e2, record.times[l])?;
        clamps += usize::from(r.clamped);
        out.push(r.value);
    }
    Ok((out, clamps))
}

/// `p[l] = Ê_o[l] e^{-j2π(f_c T_s − 1) l / L}`
pub fn derotate<T: Real>(samples: &[Complex<T>], grid: &FrequencyGrid<T>) -> Vec<Complex<T>> {
    let l_count = samples.len();
    let l_f = lit::<T>(l_count as f64);
    // Only (f_c T_s − 1) mod L matters; reducing first keeps the phase exact.
    let shift = (grid.carrier_cycles_per_symbol() - T::one()) % l_f;
    samples
        .iter()
        .enumerate()
        .map(|(l, s)| {
            let cycles = (shift * lit::<T>(l as f64) / l_f).fract();
            s * cis_cycles(cycles).conj()
        })
        .collect()
}

/// `ĥ_k = P(k mod L) / L` for `k = 1..N_f`, `P` the forward DFT of `p`.
pub fn extract_channel<T: Real>(derotated: &[Complex<T>], n_subcarriers: usize) -> Result<Vec<Complex<T>>> {
    let l_count = derotated.len();
    if l_count < n_subcarriers || l_count == 0 {
        return Err(Error::TooFewSamples {
            samples: l_count,
            subcarriers: n_subcarriers,
        });
    }
    let mut buf = derotated.to_vec();
    FftPlanner::new().plan_fft_forward(l_count).process(&mut buf);
    let inv = lit::<T>(l_count as f64).recip();
    Ok((1..=n_subcarriers).map(|k| buf[k % l_count].scale(inv)).collect())
}

/// Closed-form channel estimate for one unit.
pub fn grows_estimate<T: Real>(
    ctx: &RecoveryContext<T>,
    record: &HologramRecord<T>,
    grid: &FrequencyGrid<T>,
    settings: &GrowsSettings<T>,
) -> Result<Estimate<T>> {
    if record.samples_per_symbol != settings.samples_per_symbol {
        return Err(Error::LengthMismatch {
            what: "samples per symbol",
            expected: settings.samples_per_symbol,
            found: record.samples_per_symbol,
        });
    }
    let (samples, clamps) = recover_sequence(ctx, record, settings.method)?;
    let h = extract_channel(&derotate(&samples, grid), grid.n_subcarriers)?;
    let mut est = Estimate::new(h);
    est.diagnostics.clamps = clamps;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holography::{complex_gaussian, object_wave, sample_holograms, sample_times, ReferenceWave};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn direct_dft(x: &[Complex<f64>], m: usize) -> Complex<f64> {
        let n = x.len() as f64;
        x.iter()
            .enumerate()
            .map(|(l, v)| v * Complex::from_polar(1.0, -TAU * (m * l) as f64 / n))
            .sum()
    }

    #[test]
    fn extraction_matches_direct_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l_count in [7, 12, 97, 100] {
            let p: Vec<_> = (0..l_count).map(|_| complex_gaussian(1.0, &mut rng)).collect();
            let h = extract_channel(&p, 7).unwrap();
            for (k, v) in h.iter().enumerate() {
                let oracle = direct_dft(&p, (k + 1) % l_count) / l_count as f64;
                assert!((v - oracle).norm() < 1e-12);
            }
        }
        assert!(matches!(extract_channel(&[Complex::new(1.0, 0.0); 3], 4), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn derotated_samples_are_subcarrier_sum() {
        let g = FrequencyGrid::from_spacing(3.5e9, 30e3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h: Vec<_> = (0..5).map(|_| complex_gaussian(1.0, &mut rng)).collect();
        let l_count = 9;
        let eo: Vec<_> = sample_times(&g, l_count)[..l_count].iter().map(|&t| object_wave(&h, &g, t)).collect();
        for (l, p) in derotate(&eo, &g).iter().enumerate() {
            let oracle: Complex<f64> = h
                .iter()
                .enumerate()
                .map(|(k, hk)| hk * Complex::from_polar(1.0, TAU * ((k + 1) * l) as f64 / l_count as f64))
                .sum();
            assert!((p - oracle).norm() < 1e-8, "l = {l}");
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n_f, l_count) in [(4, 4), (16, 100), (33, 40)] {
            let g = FrequencyGrid::from_spacing(3.5e9, 30e3, n_f).unwrap();
            let h: Vec<_> = (0..n_f).map(|_| complex_gaussian(1.0 / n_f as f64, &mut rng)).collect();
            let peak = sample_times(&g, l_count)
                .iter()
                .map(|&t| object_wave(&h, &g, t).norm())
                .fold(0.0, f64::max);
            let r = ReferenceWave::from_phase_step(4.0 * peak, &g, FRAC_PI_2).unwrap();
            let ctx = RecoveryContext::new(r).unwrap();
            let rec = sample_holograms(&h, &r, &g, l_count, 0.0, (0, 0), &mut rng).unwrap();
            for method in [RecoveryMethod::Quadratic, RecoveryMethod::Geometric] {
                let s = GrowsSettings::new(l_count, n_f).unwrap().with_method(method);
                let est = grows_estimate(&ctx, &rec, &g, &s).unwrap();
                let err: f64 = est.h.iter().zip(&h).map(|(a, b)| (a - b).norm_sqr()).sum();
                let pow: f64 = h.iter().map(|v| v.norm_sqr()).sum();
                assert!(err / pow < 1e-16, "n_f = {n_f}, nmse {}", err / pow);
                assert_eq!(est.diagnostics.clamps, 0);
            }
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(GrowsSettings::<f64>::new(3, 4), Err(Error::TooFewSamples { .. })));
    }
}
