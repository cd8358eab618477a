//! Wideband multipath channel over a uniform planar array.
//!
//! `H(t) = A · diag{c_p(t)} · B`, where the columns of `A` are the planar
//! steering vectors of the paths, `c_p(t)` carries the complex gain and
//! Doppler rotation, and the rows of `B` are the per-subcarrier delay
//! responses. Unit `(m, n)` (column `m`, row `n`) is row `m·N_v + n` of `H`.

use std::io::{Read, Write};

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::CMatrix;
use crate::{cis, cis_cycles, lit, Error, Real, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    /// `N_v`
    pub n_rows: usize,
    /// `N_h`
    pub n_cols: usize,
    pub spacing_v: T,
    pub spacing_h: T,
    pub wavelength: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(n_rows: usize, n_cols: usize, spacing_v: T, spacing_h: T, wavelength: T) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid("geometry", "array needs at least one row and one column"));
        }
        for (name, v) in [("spacing_v", spacing_v), ("spacing_h", spacing_h), ("wavelength", wavelength)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            spacing_v,
            spacing_h,
            wavelength,
        })
    }

    /// Half-wavelength spacing at the given carrier.
    pub fn half_wavelength(n_rows: usize, n_cols: usize, carrier_hz: T) -> Result<Self> {
        let wavelength = lit::<T>(SPEED_OF_LIGHT) / carrier_hz;
        let half = wavelength / lit(2.0);
        Self::new(n_rows, n_cols, half, half, wavelength)
    }

    /// `N_t = N_v · N_h`
    pub fn n_units(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Row of `H` holding unit `(m, n)`, `m` the column and `n` the row index.
    pub fn unit_index(&self, m: usize, n: usize) -> usize {
        m * self.n_rows + n
    }

    /// Inverse of [`unit_index`](Self::unit_index).
    pub fn unit_coords(&self, index: usize) -> (usize, usize) {
        (index / self.n_rows, index % self.n_rows)
    }
}

/// OFDM subcarriers `f_k = f_c + (k-1)/T_s`, `k = 1..N_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid<T> {
    pub carrier_hz: T,
    pub n_subcarriers: usize,
    pub symbol_period: T,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(carrier_hz: T, n_subcarriers: usize, symbol_period: T) -> Result<Self> {
        if n_subcarriers == 0 {
            return Err(Error::invalid("n_subcarriers", "must be positive"));
        }
        if !(carrier_hz > T::zero() && carrier_hz.is_finite()) {
            return Err(Error::invalid("carrier_hz", "must be positive and finite"));
        }
        if !(symbol_period > T::zero() && symbol_period.is_finite()) {
            return Err(Error::invalid("symbol_period", "must be positive and finite"));
        }
        Ok(Self {
            carrier_hz,
            n_subcarriers,
            symbol_period,
        })
    }

    pub fn from_spacing(carrier_hz: T, spacing_hz: T, n_subcarriers: usize) -> Result<Self> {
        if !(spacing_hz > T::zero()) {
            return Err(Error::invalid("subcarrier_spacing", "must be positive"));
        }
        Self::new(carrier_hz, n_subcarriers, spacing_hz.recip())
    }

    /// `Δf = 1/T_s`
    pub fn spacing(&self) -> T {
        self.symbol_period.recip()
    }

    /// Frequency of the subcarrier with zero-based index `k`.
    pub fn frequency(&self, k: usize) -> T {
        self.carrier_hz + lit::<T>(k as f64) / self.symbol_period
    }

    /// `f_c · T_s`, the carrier phase advance over one symbol in cycles.
    pub fn carrier_cycles_per_symbol(&self) -> T {
        self.carrier_hz * self.symbol_period
    }

    /// `f_k · t` modulo one, for zero-based `k`. The carrier and subcarrier
    /// parts are reduced separately to keep precision at GHz carriers.
    pub fn cycles(&self, k: usize, t: T) -> T {
        let carrier = (self.carrier_hz * t).fract();
        let offset = (lit::<T>(k as f64) * (t / self.symbol_period)).fract();
        carrier + offset
    }

    /// `Φ(t) = [e^{j2πf_1 t}, …, e^{j2πf_{N_f} t}]`
    pub fn basis(&self, t: T) -> Vec<Complex<T>> {
        (0..self.n_subcarriers).map(|k| cis_cycles(self.cycles(k, t))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path<T> {
    pub delay: T,
    /// Complex gain with the static position phase folded in.
    pub beta: Complex<T>,
    pub zoa: T,
    pub aoa: T,
    pub doppler: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRecord {
    delay_s: f64,
    beta_re: f64,
    beta_im: f64,
    zoa_rad: f64,
    aoa_rad: f64,
    doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet<T> {
    pub paths: Vec<Path<T>>,
}

impl<T: Real> PathSet<T> {
    pub fn new(paths: Vec<Path<T>>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn total_power(&self) -> T {
        self.paths.iter().fold(T::zero(), |acc, p| acc + p.beta.norm_sqr())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let records: Vec<PathRecord> = self
            .paths
            .iter()
            .map(|p| PathRecord {
                delay_s: crate::to_f64(p.delay),
                beta_re: crate::to_f64(p.beta.re),
                beta_im: crate::to_f64(p.beta.im),
                zoa_rad: crate::to_f64(p.zoa),
                aoa_rad: crate::to_f64(p.aoa),
                doppler_hz: crate::to_f64(p.doppler),
            })
            .collect();
        serde_json::to_writer_pretty(writer, &records)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let records: Vec<PathRecord> = serde_json::from_reader(reader)?;
        let paths = records
            .into_iter()
            .map(|r| {
                if !(r.delay_s >= 0.0) {
                    return Err(Error::invalid("delay_s", "path delays must be nonnegative"));
                }
                Ok(Path {
                    delay: lit(r.delay_s),
                    beta: Complex::new(lit(r.beta_re), lit(r.beta_im)),
                    zoa: lit(r.zoa_rad),
                    aoa: lit(r.aoa_rad),
                    doppler: lit(r.doppler_hz),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paths })
    }
}

/// `H(t)` for all units and subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot<T> {
    pub matrix: CMatrix<T>,
    pub time: T,
}

impl<T: Real> ChannelSnapshot<T> {
    /// `h^{(m,n)}` for the unit stored in row `unit`.
    pub fn unit_row(&self, unit: usize) -> &[Complex<T>] {
        self.matrix.row(unit)
    }
}

/// Planar steering vector `a_h ⊗ a_v`; entry `m·N_v + n` is
/// `exp(j2π(m D_h sinθ sinφ + n D_v cosθ)/λ0)`.
pub fn steering_vector<T: Real>(geom: &ArrayGeometry<T>, zenith: T, azimuth: T) -> Vec<Complex<T>> {
    let h_cycles = geom.spacing_h * zenith.sin() * azimuth.sin() / geom.wavelength;
    let v_cycles = geom.spacing_v * zenith.cos() / geom.wavelength;
    let mut out = Vec::with_capacity(geom.n_units());
    for m in 0..geom.n_cols {
        for n in 0..geom.n_rows {
            let cycles = lit::<T>(m as f64) * h_cycles + lit::<T>(n as f64) * v_cycles;
            out.push(cis_cycles(cycles));
        }
    }
    out
}

/// `b(τ)_k = e^{-j2π f_k τ}`
pub fn delay_response<T: Real>(delay: T, grid: &FrequencyGrid<T>) -> Vec<Complex<T>> {
    (0..grid.n_subcarriers)
        .map(|k| cis_cycles(grid.cycles(k, delay)).conj())
        .collect()
}

/// `c_p(t) = β_p e^{j2π ω_p t}`
pub fn doppler_coefficient<T: Real>(path: &Path<T>, t: T) -> Complex<T> {
    path.beta * cis_cycles(path.doppler * t)
}

/// `H(t) = A · C(t) · B`.
pub fn assemble_channel<T: Real>(
    paths: &PathSet<T>,
    geom: &ArrayGeometry<T>,
    grid: &FrequencyGrid<T>,
    t: T,
) -> Result<ChannelSnapshot<T>> {
    if paths.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let p = paths.len();
    let steering: Vec<_> = paths.paths.iter().map(|q| steering_vector(geom, q.zoa, q.aoa)).collect();
    let a = CMatrix::from_fn(geom.n_units(), p, |i, j| steering[j][i]);
    let delays: Vec<_> = paths.paths.iter().map(|q| delay_response(q.delay, grid)).collect();
    let b = CMatrix::from_fn(p, grid.n_subcarriers, |i, j| delays[i][j]);
    let c: Vec<_> = paths.paths.iter().map(|q| doppler_coefficient(q, t)).collect();
    let cb = CMatrix::from_fn(p, grid.n_subcarriers, |i, j| c[i] * b[(i, j)]);
    Ok(ChannelSnapshot {
        matrix: a.matmul(&cb),
        time: t,
    })
}

/// Settings for the clustered path generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub clusters: usize,
    pub rays_per_cluster: usize,
    /// RMS zenith-of-arrival spread, degrees.
    pub zoa_spread_deg: f64,
    /// RMS azimuth-of-arrival spread, degrees.
    pub aoa_spread_deg: f64,
    /// Mean of the exponential cluster-delay distribution, seconds.
    pub delay_spread_s: f64,
    /// Relative cluster powers; equal when absent.
    pub cluster_powers: Option<Vec<f64>>,
    pub total_power: f64,
    pub speed_mps: f64,
    pub velocity_zenith_rad: f64,
    pub velocity_azimuth_rad: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            clusters: 2,
            rays_per_cluster: 20,
            zoa_spread_deg: 82.0,
            aoa_spread_deg: 98.0,
            delay_spread_s: 100e-9,
            cluster_powers: None,
            total_power: 1.0,
            speed_mps: 0.0,
            velocity_zenith_rad: std::f64::consts::FRAC_PI_2,
            velocity_azimuth_rad: 0.0,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::invalid("clusters", "must be positive"));
        }
        if self.rays_per_cluster == 0 {
            return Err(Error::invalid("rays_per_cluster", "must be positive"));
        }
        if !(self.delay_spread_s > 0.0) {
            return Err(Error::invalid("delay_spread_s", "must be positive"));
        }
        if !(self.total_power > 0.0) {
            return Err(Error::invalid("total_power", "must be positive"));
        }
        if let Some(p) = &self.cluster_powers {
            if p.len() != self.clusters {
                return Err(Error::invalid("cluster_powers", "one entry per cluster required"));
            }
            if p.iter().any(|&v| !(v >= 0.0)) || p.iter().sum::<f64>() <= 0.0 {
                return Err(Error::invalid("cluster_powers", "must be nonnegative with a positive sum"));
            }
        }
        Ok(())
    }
}

/// Folds a zenith angle into `[0, π]` by reflection.
pub fn wrap_zenith(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    if t > std::f64::consts::PI {
        std::f64::consts::TAU - t
    } else {
        t
    }
}

/// Wraps an azimuth into `[-π, π)`.
pub fn wrap_azimuth(phi: f64) -> f64 {
    (phi + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
}

/// Draws `clusters × rays` paths: uniform cluster centres, Gaussian ray
/// offsets scaled by the RMS spreads, exponential cluster delays, equal power
/// per ray within a cluster and uniform ray phases. Total power is normalised
/// to `config.total_power`.
pub fn generate_paths<T: Real, R: Rng + ?Sized>(
    config: &PathConfig,
    wavelength: T,
    rng: &mut R,
) -> Result<PathSet<T>> {
    use std::f64::consts::{PI, TAU};
    config.validate()?;
    let weights = config
        .cluster_powers
        .clone()
        .unwrap_or_else(|| vec![1.0; config.clusters]);
    let weight_sum: f64 = weights.iter().sum();
    let delay_dist = Exp::new(1.0 / config.delay_spread_s).expect("positive rate");
    let zoa_spread = config.zoa_spread_deg.to_radians();
    let aoa_spread = config.aoa_spread_deg.to_radians();
    let velocity = [
        config.speed_mps * config.velocity_zenith_rad.sin() * config.velocity_azimuth_rad.cos(),
        config.speed_mps * config.velocity_zenith_rad.sin() * config.velocity_azimuth_rad.sin(),
        config.speed_mps * config.velocity_zenith_rad.cos(),
    ];
    let wavelength = crate::to_f64(wavelength);

    let mut paths = Vec::with_capacity(config.clusters * config.rays_per_cluster);
    for weight in &weights {
        let mean_zoa = rng.random_range(0.0..PI);
        let mean_aoa = rng.random_range(-PI..PI);
        let delay: f64 = delay_dist.sample(rng);
        let ray_power = config.total_power * weight / weight_sum / config.rays_per_cluster as f64;
        for _ in 0..config.rays_per_cluster {
            let dz: f64 = StandardNormal.sample(rng);
            let da: f64 = StandardNormal.sample(rng);
            let zoa = wrap_zenith(mean_zoa + zoa_spread * dz);
            let aoa = wrap_azimuth(mean_aoa + aoa_spread * da);
            let phase = rng.random_range(0.0..TAU);
            let direction = [zoa.sin() * aoa.cos(), zoa.sin() * aoa.sin(), zoa.cos()];
            let doppler = direction.iter().zip(&velocity).map(|(a, b)| a * b).sum::<f64>() / wavelength;
            paths.push(Path {
                delay: lit(delay),
                beta: cis(lit::<T>(phase)).scale(lit::<T>(ray_power.sqrt())),
                zoa: lit(zoa),
                aoa: lit(aoa),
                doppler: lit(doppler),
            });
        }
    }
    Ok(PathSet { paths })
}

/// Row `unit` of `H(t)` computed directly as `Σ_p a_p c_p(t) b(τ_p)`.
pub fn unit_channel<T: Real>(
    paths: &PathSet<T>,
    geom: &ArrayGeometry<T>,
    grid: &FrequencyGrid<T>,
    unit: usize,
    t: T,
) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); grid.n_subcarriers];
    for p in &paths.paths {
        let a = steering_vector(geom, p.zoa, p.aoa)[unit];
        let c = doppler_coefficient(p, t);
        for (o, b) in out.iter_mut().zip(delay_response(p.delay, grid)) {
            *o += a * c * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn grid(n: usize) -> FrequencyGrid<f64> {
        FrequencyGrid::from_spacing(3.5e9, 30e3, n).unwrap()
    }

    fn geom(rows: usize, cols: usize) -> ArrayGeometry<f64> {
        ArrayGeometry::half_wavelength(rows, cols, 3.5e9).unwrap()
    }

    #[test]
    fn steering_examples() {
        let g = geom(3, 4);
        for v in steering_vector(&g, FRAC_PI_2, 0.0) {
            assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-15);
        }
        let g = geom(1, 2);
        let a = steering_vector(&g, FRAC_PI_2, FRAC_PI_2);
        assert!((a[0] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((a[1] - Complex::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_is_kronecker_product() {
        let g = ArrayGeometry::new(3, 5, 0.031, 0.047, 0.0857).unwrap();
        let (theta, phi) = (1.1f64, -2.3f64);
        let ah: Vec<Complex<f64>> = (0..5)
            .map(|m| Complex::from_polar(1.0, TAU * m as f64 * g.spacing_h * theta.sin() * phi.sin() / g.wavelength))
            .collect();
        let av: Vec<Complex<f64>> = (0..3)
            .map(|n| Complex::from_polar(1.0, TAU * n as f64 * g.spacing_v * theta.cos() / g.wavelength))
            .collect();
        let a = steering_vector(&g, theta, phi);
        let mut idx = 0;
        for x in &ah {
            for y in &av {
                assert!((a[idx] - x * y).norm() < 1e-12);
                assert!((a[idx].norm() - 1.0).abs() < 1e-12);
                idx += 1;
            }
        }
    }

    #[test]
    fn delay_response_examples() {
        let g = grid(8);
        assert!(delay_response(0.0, &g).iter().all(|b| (b - Complex::new(1.0, 0.0)).norm() < 1e-15));
        let b = delay_response(g.symbol_period, &g);
        let expected = Complex::from_polar(1.0, -TAU * (3.5e9 * g.symbol_period).fract());
        assert!(b.iter().all(|v| (v - expected).norm() < 1e-9));

        let g = grid(4);
        let tau = 100e-9;
        let b = delay_response(tau, &g);
        for (k, v) in b.iter().enumerate() {
            let f = 3.5e9 + k as f64 * 30e3;
            let oracle = Complex::from_polar(1.0, -TAU * f * tau);
            assert!((v - oracle).norm() < 1e-9);
        }
    }

    #[test]
    fn doppler_examples() {
        let p = Path {
            delay: 0.0,
            beta: Complex::new(0.3, -0.4),
            zoa: 1.0,
            aoa: 0.0,
            doppler: 100.0,
        };
        assert_eq!(doppler_coefficient(&p, 0.0), p.beta);
        let c = doppler_coefficient(&p, 2.5e-3);
        assert!((c - p.beta * Complex::from_polar(1.0, PI / 2.0)).norm() < 1e-12);
        assert!((c.norm() - p.beta.norm()).abs() < 1e-15);
        let still = Path { doppler: 0.0, ..p };
        assert_eq!(doppler_coefficient(&still, 17.3), p.beta);
    }

    #[test]
    fn single_trivial_path_gives_all_ones() {
        let paths = PathSet::new(vec![Path {
            delay: 0.0,
            beta: Complex::new(1.0, 0.0),
            zoa: FRAC_PI_2,
            aoa: 0.0,
            doppler: 0.0,
        }]);
        let h = assemble_channel(&paths, &geom(4, 4), &grid(12), 0.0).unwrap();
        assert_eq!((h.matrix.rows(), h.matrix.cols()), (16, 12));
        assert!(h.matrix.as_slice().iter().all(|v| (v - Complex::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn empty_pathset_rejected() {
        let r = assemble_channel(&PathSet::<f64>::default(), &geom(2, 2), &grid(4), 0.0);
        assert!(matches!(r, Err(Error::EmptyPathSet)));
    }

    #[test]
    fn factored_matches_triple_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = PathConfig {
            speed_mps: 30.0,
            ..PathConfig::default()
        };
        let g = geom(4, 4);
        let fg = grid(64);
        let paths = generate_paths::<f64, _>(&cfg, g.wavelength, &mut rng).unwrap();
        let t = 1.7e-3;
        let h = assemble_channel(&paths, &g, &fg, t).unwrap();
        // Entry-wise triple sum with plain floating-point phases.
        let mut num = 0.0;
        let mut den = 0.0;
        for m in 0..g.n_cols {
            for n in 0..g.n_rows {
                for k in 0..fg.n_subcarriers {
                    let f = 3.5e9 + k as f64 * 30e3;
                    let mut acc = Complex::new(0.0, 0.0);
                    for p in &paths.paths {
                        let spatial = m as f64 * g.spacing_h * p.zoa.sin() * p.aoa.sin() / g.wavelength
                            + n as f64 * g.spacing_v * p.zoa.cos() / g.wavelength;
                        acc += p.beta
                            * Complex::from_polar(1.0, TAU * spatial)
                            * Complex::from_polar(1.0, TAU * p.doppler * t)
                            * Complex::from_polar(1.0, -TAU * f * p.delay);
                    }
                    let v = h.matrix[(g.unit_index(m, n), k)];
                    num += (v - acc).norm_sqr();
                    den += acc.norm_sqr();
                }
            }
        }
        assert!((num / den).sqrt() < 1e-12, "relative error {}", (num / den).sqrt());
        let bound: f64 = paths.paths.iter().map(|p| p.beta.norm()).sum();
        assert!(h.matrix.as_slice().iter().all(|v| v.norm() <= bound + 1e-12));
        let u = g.unit_index(2, 1);
        for (a, b) in unit_channel(&paths, &g, &fg, u, t).iter().zip(h.unit_row(u)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn static_channel_is_time_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = geom(2, 3);
        let fg = grid(16);
        let paths = generate_paths::<f64, _>(&PathConfig::default(), g.wavelength, &mut rng).unwrap();
        let a = assemble_channel(&paths, &g, &fg, 0.0).unwrap();
        let b = assemble_channel(&paths, &g, &fg, fg.symbol_period).unwrap();
        let c = assemble_channel(&paths, &g, &fg, 12.345).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.matrix, c.matrix);
    }

    #[test]
    fn generator_counts_power_and_determinism() {
        let cfg = PathConfig::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_paths::<f64, _>(&cfg, 0.0857, &mut rng).unwrap()
        };
        let a = draw(42);
        assert_eq!(a.len(), 40);
        assert!((a.total_power() - 1.0).abs() < 1e-12);
        assert_eq!(a, draw(42));
        assert_ne!(a, draw(43));
        for p in &a.paths {
            assert!((0.0..=PI).contains(&p.zoa));
            assert!((-PI..PI).contains(&p.aoa));
            assert!(p.delay >= 0.0);
        }

        let weighted = PathConfig {
            cluster_powers: Some(vec![3.0, 1.0]),
            total_power: 2.5,
            ..cfg.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = generate_paths::<f64, _>(&weighted, 0.0857, &mut rng).unwrap();
        assert!((w.total_power() - 2.5).abs() < 1e-12);
        let first: f64 = w.paths[..20].iter().map(|p| p.beta.norm_sqr()).sum();
        assert!((first - 2.5 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn generator_rejects_bad_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for cfg in [
            PathConfig { clusters: 0, ..PathConfig::default() },
            PathConfig { rays_per_cluster: 0, ..PathConfig::default() },
            PathConfig { cluster_powers: Some(vec![1.0]), ..PathConfig::default() },
        ] {
            assert!(generate_paths::<f64, _>(&cfg, 0.1, &mut rng).is_err());
        }
    }

    #[test]
    fn pathset_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let paths = generate_paths::<f64, _>(&PathConfig::default(), 0.0857, &mut rng).unwrap();
        let mut buf = Vec::new();
        paths.write_json(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"delay_s\"") && text.contains("\"doppler_hz\""));
        assert_eq!(PathSet::<f64>::read_json(buf.as_slice()).unwrap(), paths);
        let bad = r#"[{"delay_s": -1, "beta_re": 1, "beta_im": 0, "zoa_rad": 0, "aoa_rad": 0, "doppler_hz": 0}]"#;
        assert!(PathSet::<f64>::read_json(bad.as_bytes()).is_err());
    }

    #[test]
    fn angle_wrapping() {
        assert!((wrap_zenith(-0.2) - 0.2).abs() < 1e-15);
        assert!((wrap_zenith(PI + 0.3) - (PI - 0.3)).abs() < 1e-12);
        assert!((wrap_azimuth(PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap_azimuth(-PI - 0.5) - (PI - 0.5)).abs() < 1e-12);
    }
}
