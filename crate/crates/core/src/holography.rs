//! Reference wave, object wave and intensity-only recording.
//!
//! A unit with channel `h` receives `E_o(t) = Σ_k h_k e^{j2πf_k t}` and adds the
//! reference `E_r(t) = A_r e^{j2πf_r t}`; only `|E_r + E_o + ω|²` is recorded,
//! with `ω ~ CN(0, σ²)` drawn once per sample. Each record holds `L` samples
//! over one symbol followed by the same instants shifted by `T_s`.

use std::io::{Read, Write};

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::FrequencyGrid;
use crate::{cis_cycles, lit, Error, Real, Result};

/// `E_r(t) = A_r e^{j2πf_r t}` with `f_r = f_c + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceWave<T> {
    pub amplitude: T,
    pub carrier_hz: T,
    pub offset_hz: T,
    pub symbol_period: T,
}

impl<T: Real> ReferenceWave<T> {
    pub fn new(amplitude: T, grid: &FrequencyGrid<T>, offset_hz: T) -> Result<Self> {
        if !(amplitude > T::zero() && amplitude.is_finite()) {
            return Err(Error::invalid("reference amplitude", "must be positive and finite"));
        }
        if !offset_hz.is_finite() {
            return Err(Error::invalid("reference offset", "must be finite"));
        }
        Ok(Self {
            amplitude,
            carrier_hz: grid.carrier_hz,
            offset_hz,
            symbol_period: grid.symbol_period,
        })
    }

    /// Reference whose phase advances by `delta` more than the carrier over one
    /// symbol, `f_r = f_c + δ/(2πT_s)`.
    pub fn from_phase_step(amplitude: T, grid: &FrequencyGrid<T>, delta: T) -> Result<Self> {
        Self::new(amplitude, grid, delta / (T::TAU() * grid.symbol_period))
    }

    pub fn frequency(&self) -> T {
        self.carrier_hz + self.offset_hz
    }

    /// `δ = 2π(f_r − f_c)T_s`
    pub fn phase_step(&self) -> T {
        T::TAU() * self.offset_hz * self.symbol_period
    }

    /// `f_r t` modulo one.
    pub fn cycles(&self, t: T) -> T {
        (self.carrier_hz * t).fract() + (self.offset_hz * t).fract()
    }

    pub fn value(&self, t: T) -> Complex<T> {
        cis_cycles(self.cycles(t)).scale(self.amplitude)
    }
}

/// `E_o(t) = Σ_k h_k e^{j2πf_k t}`
pub fn object_wave<T: Real>(h: &[Complex<T>], grid: &FrequencyGrid<T>, t: T) -> Complex<T> {
    h.iter()
        .enumerate()
        .fold(Complex::zero(), |acc, (k, hk)| acc + hk * cis_cycles(grid.cycles(k, t)))
}

/// `|E_r + E_o + ω|²`
pub fn hologram_intensity<T: Real>(reference: Complex<T>, object: Complex<T>, noise: Complex<T>) -> T {
    (reference + object + noise).norm_sqr()
}

/// `t_l = (l/L)T_s` for `l < L`, then `t_{l-L} + T_s`.
pub fn sample_times<T: Real>(grid: &FrequencyGrid<T>, samples_per_symbol: usize) -> Vec<T> {
    let l_f = lit::<T>(samples_per_symbol as f64);
    (0..2 * samples_per_symbol)
        .map(|i| {
            let l = i % samples_per_symbol;
            let base = lit::<T>(l as f64) / l_f * grid.symbol_period;
            if i < samples_per_symbol {
                base
            } else {
                base + grid.symbol_period
            }
        })
        .collect()
}

/// `σ² = mean |E_o(t_l)|² / SNR`
pub fn noise_variance_for_snr<T: Real>(object_samples: &[Complex<T>], snr_linear: T) -> Result<T> {
    if !(snr_linear > T::zero()) {
        return Err(Error::invalid("snr", "must be positive"));
    }
    if object_samples.is_empty() {
        return Err(Error::invalid("object samples", "empty"));
    }
    let power = crate::norm_sqr(object_samples) / lit(object_samples.len() as f64);
    Ok(power / snr_linear)
}

/// Complex Gaussian sample with `E|ω|² = variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(variance: T, rng: &mut R) -> Complex<T> {
    let s = (variance / lit(2.0)).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(lit::<T>(re) * s, lit::<T>(im) * s)
}

/// Intensity samples recorded by one unit.
#[derive(Debug, Clone, PartialEq)]
pub struct HologramRecord<T> {
    pub unit_m: usize,
    pub unit_n: usize,
    pub samples_per_symbol: usize,
    pub times: Vec<T>,
    pub intensities: Vec<T>,
}

impl<T: Real> HologramRecord<T> {
    /// `(E_I(t_l), E_I(t_l + T_s))`
    pub fn pair(&self, l: usize) -> (T, T) {
        (self.intensities[l], self.intensities[l + self.samples_per_symbol])
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }
}

/// Records `2L` intensities for the unit with channel `h`. `noise_variance`
/// of zero gives the noiseless hologram.
pub fn sample_holograms<T: Real, R: Rng + ?Sized>(
    h: &[Complex<T>],
    reference: &ReferenceWave<T>,
    grid: &FrequencyGrid<T>,
    samples_per_symbol: usize,
    noise_variance: T,
    unit: (usize, usize),
    rng: &mut R,
) -> Result<HologramRecord<T>> {
    if h.len() != grid.n_subcarriers {
        return Err(Error::LengthMismatch {
            what: "channel vector",
            expected: grid.n_subcarriers,
            found: h.len(),
        });
    }
    if samples_per_symbol == 0 {
        return Err(Error::invalid("samples_per_symbol", "must be positive"));
    }
    if !(noise_variance >= T::zero()) {
        return Err(Error::invalid("noise_variance", "must be nonnegative"));
    }
    let times = sample_times(grid, samples_per_symbol);
    let intensities = times
        .iter()
        .map(|&t| {
            let noise = if noise_variance > T::zero() {
                complex_gaussian(noise_variance, rng)
            } else {
                Complex::zero()
            };
            hologram_intensity(reference.value(t), object_wave(h, grid, t), noise)
        })
        .collect();
    Ok(HologramRecord {
        unit_m: unit.0,
        unit_n: unit.1,
        samples_per_symbol,
        times,
        intensities,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    unit_m: usize,
    unit_n: usize,
    l: usize,
    t_seconds: f64,
    intensity: f64,
}

pub fn write_records_csv<T: Real, W: Write>(records: &[HologramRecord<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        for (l, (t, e)) in r.times.iter().zip(&r.intensities).enumerate() {
            w.serialize(RecordRow {
                unit_m: r.unit_m,
                unit_n: r.unit_n,
                l,
                t_seconds: crate::to_f64(*t),
                intensity: crate::to_f64(*e),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads records back, grouping consecutive rows by unit.
pub fn read_records_csv<T: Real, R: Read>(reader: R) -> Result<Vec<HologramRecord<T>>> {
    let mut out: Vec<HologramRecord<T>> = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: RecordRow = row?;
        let start_new = match out.last() {
            Some(r) => (r.unit_m, r.unit_n) != (row.unit_m, row.unit_n),
            None => true,
        };
        if start_new {
            out.push(HologramRecord {
                unit_m: row.unit_m,
                unit_n: row.unit_n,
                samples_per_symbol: 0,
                times: Vec::new(),
                intensities: Vec::new(),
            });
        }
        let r = out.last_mut().expect("pushed above");
        if row.l != r.times.len() {
            return Err(Error::invalid("l", format!("expected index {}, found {}", r.times.len(), row.l)));
        }
        r.times.push(lit(row.t_seconds));
        r.intensities.push(lit(row.intensity));
    }
    for r in &mut out {
        if r.len() % 2 != 0 {
            return Err(Error::invalid("hologram record", "needs an even number of samples"));
        }
        r.samples_per_symbol = r.len() / 2;
    }
    Ok(out)
}
